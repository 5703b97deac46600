//! Network model: domain parameters and the closed-form geometric and
//! statistical primitives (cone areas, blockage survival, active-interferer
//! rate, radial distance density, blockage-indicator PGF).

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("argument outside domain: {0}")]
    Domain(&'static str),
}

fn check(ok: bool, field: &'static str, reason: &str) -> Result<(), ModelError> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::InvalidParameter {
            field,
            reason: reason.to_string(),
        })
    }
}

/// All physical and statistical parameters of the link under study.
///
/// Interferers form a Poisson field of density `lambda_sf` per (m² · Hz),
/// so the mean interferer count inside the disk of radius `radius_d` across
/// the band `bandwidth_w` is λ·π·D²·W. Blockages form an independent planar
/// Poisson field of density `rho` per m².
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Interferer density λ, count per (m² · Hz).
    pub lambda_sf: f64,
    /// Blockage density ρ, count per m².
    pub rho: f64,
    /// Interference-circle radius D, m.
    pub radius_d: f64,
    /// Half beamwidth θ, radians (the full beamwidth is 2θ).
    pub half_beamwidth: f64,
    /// Pathloss exponent α (> 2).
    pub pathloss_exp: f64,
    /// Nakagami shape m (≥ 1/2).
    pub nakagami_m: f64,
    /// Signal bandwidth W, Hz (normalized; 1 by default).
    pub bandwidth_w: f64,
    /// Common interferer transmit power q, linear W.
    pub q_interferer: f64,
    /// Desired-link transmit power q₀, linear W.
    pub q_desired: f64,
    /// Desired-link distance ℓ₀, m.
    pub ell_desired: f64,
    /// Noise power σ_n², linear W; swept to produce the SNR axis.
    pub noise_power: f64,
    /// Modulation constant c in BER = ½ erfc √(c·SINR).
    pub mod_constant: f64,
}

impl Default for NetworkConfig {
    /// Short-range defaults: unit-power nodes at 1 m, 20° total beamwidth,
    /// a 100 m² interference region and a normalized 1 Hz band.
    fn default() -> Self {
        Self {
            lambda_sf: 1e-4,
            rho: 1e-4,
            radius_d: 5.6419,
            half_beamwidth: 10f64.to_radians(),
            pathloss_exp: 2.5,
            nakagami_m: 3.0,
            bandwidth_w: 1.0,
            q_interferer: 1.0,
            q_desired: 1.0,
            ell_desired: 1.0,
            noise_power: 1.0,
            mod_constant: 1.0,
        }
    }
}

impl NetworkConfig {
    /// Check every structural invariant, reporting the first violated field.
    ///
    /// `q_interferer` may be zero (silent interferers are a meaningful
    /// degenerate case); the remaining powers must be strictly positive.
    pub fn validate(&self) -> Result<(), ModelError> {
        check(
            self.lambda_sf >= 0.0 && self.lambda_sf.is_finite(),
            "lambda_sf",
            "interferer density must be finite and >= 0",
        )?;
        check(
            self.rho >= 0.0 && self.rho.is_finite(),
            "rho",
            "blockage density must be finite and >= 0",
        )?;
        check(
            self.radius_d > 0.0 && self.radius_d.is_finite(),
            "radius_d",
            "interference radius must be positive",
        )?;
        check(
            self.half_beamwidth > 0.0 && self.half_beamwidth < std::f64::consts::FRAC_PI_2,
            "half_beamwidth",
            "half beamwidth must lie in (0, pi/2) so tan(theta) is finite and positive",
        )?;
        check(
            self.pathloss_exp > 2.0 && self.pathloss_exp.is_finite(),
            "pathloss_exp",
            "pathloss exponent must exceed 2 for the 2/alpha moment structure to converge",
        )?;
        check(
            self.nakagami_m >= 0.5 && self.nakagami_m.is_finite(),
            "nakagami_m",
            "Nakagami shape must be >= 0.5",
        )?;
        check(
            self.bandwidth_w > 0.0 && self.bandwidth_w.is_finite(),
            "bandwidth_w",
            "bandwidth must be positive",
        )?;
        check(
            self.q_interferer >= 0.0 && self.q_interferer.is_finite(),
            "q_interferer",
            "interferer power must be finite and >= 0",
        )?;
        check(
            self.q_desired > 0.0 && self.q_desired.is_finite(),
            "q_desired",
            "desired-link power must be positive",
        )?;
        check(
            self.ell_desired > 0.0 && self.ell_desired.is_finite(),
            "ell_desired",
            "desired-link distance must be positive",
        )?;
        check(
            self.noise_power > 0.0 && self.noise_power.is_finite(),
            "noise_power",
            "noise power must be positive",
        )?;
        check(
            self.mod_constant > 0.0 && self.mod_constant.is_finite(),
            "mod_constant",
            "modulation constant must be positive",
        )?;
        Ok(())
    }

    /// Mean interferer count in the disk x band, λ·π·D²·W.
    pub fn mean_count_in_disk(&self) -> f64 {
        self.lambda_sf * std::f64::consts::PI * self.radius_d * self.radius_d * self.bandwidth_w
    }

    /// Mean received desired power q₀·ℓ₀^{-α} (unit-mean fading).
    pub fn desired_mean_power(&self) -> f64 {
        self.q_desired * self.ell_desired.powf(-self.pathloss_exp)
    }

    /// SNR in dB implied by the current noise power, q₀ℓ₀^{-α}/σ_n².
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.desired_mean_power() / self.noise_power).log10()
    }

    /// Copy with the noise power set so that [`Self::snr_db`] equals `snr_db`.
    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        let mut cfg = self.clone();
        cfg.noise_power = self.desired_mean_power() * 10f64.powf(-snr_db / 10.0);
        cfg
    }
}

/// Triangular radiation cone between a transmitter and the victim receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiationCone {
    apex_distance: f64,
    half_beamwidth: f64,
    area: f64,
}

impl RadiationCone {
    pub fn new(apex_distance: f64, half_beamwidth: f64) -> Result<Self, ModelError> {
        let area = cone_area(apex_distance, half_beamwidth)?;
        Ok(Self {
            apex_distance,
            half_beamwidth,
            area,
        })
    }

    pub fn apex_distance(&self) -> f64 {
        self.apex_distance
    }

    pub fn half_beamwidth(&self) -> f64 {
        self.half_beamwidth
    }

    /// ℓ² · tan θ, fixed at construction.
    pub fn area(&self) -> f64 {
        self.area
    }
}

/// Radiation cone area ℓ²·tan(θ) for a link of length `ell` and half
/// beamwidth `theta` in (0, π/2).
pub fn cone_area(ell: f64, theta: f64) -> Result<f64, ModelError> {
    if !(theta > 0.0 && theta < std::f64::consts::FRAC_PI_2) {
        return Err(ModelError::Domain("half beamwidth must lie in (0, pi/2)"));
    }
    if ell < 0.0 || ell.is_nan() {
        return Err(ModelError::Domain("link length must be >= 0"));
    }
    Ok(ell * ell * theta.tan())
}

/// Probability that a link of length `ell` is not blocked: e^{-ρ ℓ² tan θ}.
pub fn survival_probability(ell: f64, cfg: &NetworkConfig) -> f64 {
    (-cfg.rho * ell * ell * cfg.half_beamwidth.tan()).exp()
}

// Below this, (1 - e^{-x})/x is evaluated by series to sidestep the 0/0.
const SMALL_EXPONENT: f64 = 1e-8;

/// (1 - e^{-x})/x, the thinning attenuation factor, with the x -> 0 limit
/// handled explicitly.
fn thinning_factor(x: f64) -> f64 {
    if x < SMALL_EXPONENT {
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Mean number of unblocked (active) interferers in the disk x band:
/// μ_K = λπW (1 - e^{-D²ρtanθ}) / (ρ tanθ), with the ρ -> 0 limit λπWD².
pub fn active_count_rate(cfg: &NetworkConfig) -> f64 {
    let d2 = cfg.radius_d * cfg.radius_d;
    let x = cfg.rho * d2 * cfg.half_beamwidth.tan();
    cfg.lambda_sf * std::f64::consts::PI * cfg.bandwidth_w * d2 * thinning_factor(x)
}

/// Radial distance density of a uniform point in the disk: 2ℓ/D² on (0, D).
pub fn radial_pdf(ell: f64, radius_d: f64) -> f64 {
    if ell > 0.0 && ell < radius_d {
        2.0 * ell / (radius_d * radius_d)
    } else {
        0.0
    }
}

/// PGF of the per-interferer not-blocked indicator averaged over distance:
/// G_X(z) = 1 + (1 - z)(e^{-ρD²tanθ} - 1)/(ρD²tanθ); G_X(1) = 1 and
/// G_X(z) -> z as ρ -> 0.
pub fn pgf_active_indicator(z: f64, cfg: &NetworkConfig) -> f64 {
    let d2 = cfg.radius_d * cfg.radius_d;
    let x = cfg.rho * d2 * cfg.half_beamwidth.tan();
    1.0 - (1.0 - z) * thinning_factor(x)
}
