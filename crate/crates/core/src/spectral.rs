//! Spectral-domain machinery: interferer PSD, receiver filter magnitude
//! response, the overlap kernel Ω and its band moments κ(j).
//!
//! Normalization convention: the PSD integrates to 1 over its support and
//! the filter has unit passband gain, so Ω(f) ∈ [0, 1] is the fraction of
//! an offset interferer's power captured by the receiver. Both shapes are
//! supported on exactly [-W/2, W/2]; a raised cosine with roll-off 0 is
//! identically the ideal rectangle.

use thiserror::Error;

use crate::quad;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpectralError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
}

/// Baseband magnitude shape used for both the interferer PSD and the
/// receiver filter response.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandShape {
    /// Ideal brick-wall occupying the whole band.
    RectIdeal,
    /// Raised cosine with roll-off β ∈ [0, 1], scaled so its support is
    /// exactly [-W/2, W/2].
    RaisedCosine { rolloff: f64 },
}

impl BandShape {
    fn rolloff(&self) -> f64 {
        match self {
            BandShape::RectIdeal => 0.0,
            BandShape::RaisedCosine { rolloff } => *rolloff,
        }
    }

    /// Shape value at |f|, normalized to unit integral over [-W/2, W/2].
    fn density(&self, f_abs: f64, w: f64) -> f64 {
        let beta = self.rolloff();
        if f_abs > w / 2.0 {
            return 0.0;
        }
        if beta == 0.0 {
            return 1.0 / w;
        }
        // Flat value 1/w' with w' = w/(1+beta); transition starts at f1.
        let flat = (1.0 + beta) / w;
        let f1 = (1.0 - beta) / (2.0 * flat);
        if f_abs <= f1 {
            flat
        } else {
            0.5 * flat * (1.0 + (std::f64::consts::PI * flat / beta * (f_abs - f1)).cos())
        }
    }
}

/// Interferer PSD shape, receiver filter shape, and the shared bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    pub psd_shape: BandShape,
    pub filter_shape: BandShape,
    pub bandwidth_w: f64,
}

const OVERLAP_REL_TOL: f64 = 1e-11;
const KAPPA_REL_TOL: f64 = 1e-11;

impl SpectralModel {
    /// Brick-wall PSD and filter over bandwidth `w` (roll-off 0 everywhere).
    pub fn rect_ideal(w: f64) -> Self {
        Self {
            psd_shape: BandShape::RectIdeal,
            filter_shape: BandShape::RectIdeal,
            bandwidth_w: w,
        }
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        if !(self.bandwidth_w > 0.0 && self.bandwidth_w.is_finite()) {
            return Err(SpectralError::InvalidParameter {
                field: "bandwidth_w",
                reason: "bandwidth must be positive".to_string(),
            });
        }
        for (field, shape) in [("psd_shape", &self.psd_shape), ("filter_shape", &self.filter_shape)] {
            let beta = shape.rolloff();
            if !(0.0..=1.0).contains(&beta) || !beta.is_finite() {
                return Err(SpectralError::InvalidParameter {
                    field,
                    reason: format!("roll-off must lie in [0, 1], got {beta}"),
                });
            }
        }
        Ok(())
    }

    /// Interferer PSD Φ(f); integrates to 1 over [-W/2, W/2].
    pub fn psd(&self, f: f64) -> f64 {
        self.psd_shape.density(f.abs(), self.bandwidth_w)
    }

    /// Receiver filter |H(f)|²; 1 at f = 0, ≤ 1 everywhere.
    pub fn filter_gain_sq(&self, f: f64) -> f64 {
        let peak = self.filter_shape.density(0.0, self.bandwidth_w);
        self.filter_shape.density(f.abs(), self.bandwidth_w) / peak
    }

    fn is_rect_pair(&self) -> bool {
        self.psd_shape.rolloff() == 0.0 && self.filter_shape.rolloff() == 0.0
    }

    /// Spectral overlap Ω(f_k) = ∫_{-W/2}^{W/2} Φ(f - f_k) |H(f)|² df.
    ///
    /// Closed form (W - |f_k|)/W for the rectangle pair, adaptive
    /// quadrature otherwise. Even in `f_offset`, 0 outside |f_offset| > W.
    pub fn overlap(&self, f_offset: f64) -> f64 {
        let w = self.bandwidth_w;
        let shift = f_offset.abs();
        if shift >= w {
            return 0.0;
        }
        if self.is_rect_pair() {
            return (w - shift) / w;
        }
        self.overlap_by_quadrature(shift)
    }

    fn overlap_by_quadrature(&self, shift: f64) -> f64 {
        let w = self.bandwidth_w;
        let f = |x: f64| self.psd(x - shift) * self.filter_gain_sq(x);
        // The shifted PSD's support edges land at shift +/- W/2; put panel
        // boundaries there so the adaptive rule never straddles a jump.
        let mut cuts = [-w / 2.0, shift - w / 2.0, shift, shift + w / 2.0, w / 2.0];
        for c in &mut cuts {
            *c = c.clamp(-w / 2.0, w / 2.0);
        }
        cuts.sort_by(f64::total_cmp);
        let mut total = 0.0;
        for pair in cuts.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if b <= a {
                continue;
            }
            total += match quad::integrate(&f, a, b, OVERLAP_REL_TOL, 1e-15, 256) {
                Ok(r) => r.value,
                Err(quad::QuadError::Tolerance { value, .. }) => value,
            };
        }
        total
    }

    /// Band moment κ(j) = ∫_{-W/2}^{W/2} Ω(f)^j df.
    ///
    /// Closed form 2W(1 - 2^{-(j+1)})/(j+1) for the rectangle pair.
    pub fn kappa(&self, j: u32) -> f64 {
        let w = self.bandwidth_w;
        if self.is_rect_pair() {
            let jf = j as f64;
            return 2.0 * w * (1.0 - 0.5f64.powi(j as i32 + 1)) / (jf + 1.0);
        }
        self.kappa_by_quadrature(j)
    }

    fn kappa_by_quadrature(&self, j: u32) -> f64 {
        let w = self.bandwidth_w;
        // Omega is even: integrate the half band and double.
        let f = |x: f64| self.overlap(x).powi(j as i32);
        match quad::integrate(f, 0.0, w / 2.0, KAPPA_REL_TOL, 1e-15, 128) {
            Ok(r) => 2.0 * r.value,
            Err(quad::QuadError::Tolerance { value, .. }) => 2.0 * value,
        }
    }
}
