//! Special-function kernel for the analytic engine.
//!
//! Self-contained implementations of the complementary error function,
//! log-gamma, the upper incomplete gamma function (including negative
//! non-integer first argument), the confluent hypergeometric function
//! ₁F₁, and the averaged-erfc kernel g_m that drives the BER integral.

use thiserror::Error;

/// Truncation control for series evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// Relative tail tolerance.
    pub rel_tol: f64,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_terms: 500,
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpecFunError {
    #[error("series did not converge within {max_terms} terms (rel_tol {rel_tol:.1e})")]
    NonConvergence { max_terms: usize, rel_tol: f64 },
    #[error("argument outside domain: {0}")]
    Domain(&'static str),
}

// Lanczos approximation, g = 7, n = 9 (Godfrey coefficients).
const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

const LN_SQRT_2PI: f64 = 0.918938533204672741780329736406;
const LN_PI: f64 = 1.144729885849400174143427351353;

/// Natural log of |Γ(x)| for any non-pole x; exact log-gamma for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx).
        return LN_PI - (std::f64::consts::PI * x).sin().abs().ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut sum = LANCZOS_COEFFS[0];
    for (i, &c) in LANCZOS_COEFFS[1..].iter().enumerate() {
        sum += c / (z + (i + 1) as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (z + 0.5) * t.ln() - t + sum.ln()
}

/// Γ(x) for non-pole x, with the sign handled through reflection.
pub fn gamma(x: f64) -> f64 {
    if x > 0.0 {
        ln_gamma(x).exp()
    } else {
        // Γ(x) = π / (sin(πx) Γ(1-x))
        std::f64::consts::PI / ((std::f64::consts::PI * x).sin() * ln_gamma(1.0 - x).exp())
    }
}

const INCGAMMA_MAX_ITER: usize = 400;

/// Regularized lower incomplete gamma P(a, x), a > 0, x ≥ 0.
pub fn regularized_gamma_p(a: f64, x: f64) -> Result<f64, SpecFunError> {
    regularized_pair(a, x).map(|(p, _)| p)
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), a > 0, x ≥ 0.
pub fn regularized_gamma_q(a: f64, x: f64) -> Result<f64, SpecFunError> {
    regularized_pair(a, x).map(|(_, q)| q)
}

/// Series for x < a + 1, Lentz continued fraction otherwise; the pair is
/// computed from whichever side converges fast and complemented.
fn regularized_pair(a: f64, x: f64) -> Result<(f64, f64), SpecFunError> {
    if a <= 0.0 || !a.is_finite() {
        return Err(SpecFunError::Domain("regularized gamma requires a > 0"));
    }
    if x < 0.0 || !x.is_finite() {
        return Err(SpecFunError::Domain("regularized gamma requires x >= 0"));
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    let prefactor = log_prefactor.exp();
    if x < a + 1.0 {
        let p = lower_series(a, x, prefactor)?;
        Ok((p, 1.0 - p))
    } else {
        let q = upper_cf(a, x, prefactor)?;
        Ok((1.0 - q, q))
    }
}

fn lower_series(a: f64, x: f64, prefactor: f64) -> Result<f64, SpecFunError> {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..INCGAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * f64::EPSILON {
            return Ok(prefactor * sum);
        }
    }
    Err(SpecFunError::NonConvergence {
        max_terms: INCGAMMA_MAX_ITER,
        rel_tol: f64::EPSILON,
    })
}

/// Modified Lentz evaluation of the Q(a, x) continued fraction.
/// Only reached for x >= a + 1, where b0 = x + 1 - a >= 2.
fn upper_cf(a: f64, x: f64, prefactor: f64) -> Result<f64, SpecFunError> {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=INCGAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < f64::EPSILON {
            return Ok(prefactor * h);
        }
    }
    Err(SpecFunError::NonConvergence {
        max_terms: INCGAMMA_MAX_ITER,
        rel_tol: f64::EPSILON,
    })
}

/// Complementary error function, |error| ≤ 1e-12 on [-6, 6].
///
/// Computed as Q(1/2, x²); far tails underflow cleanly to 0.
pub fn erfc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x > 0.0 {
        regularized_gamma_q(0.5, x * x).expect("a=1/2, x^2 > 0 is always in domain")
    } else {
        2.0 - erfc(-x)
    }
}

/// Upper incomplete gamma Γ(a, x) = ∫ₓ^∞ t^{a-1} e^{-t} dt.
///
/// `a` may be negative non-integer; that branch descends through
/// Γ(a, x) = (Γ(a+1, x) - x^a e^{-x}) / a from a positive-a seed, which is
/// stable for the a ∈ (-1, 0) arguments the analytic engine produces.
pub fn upper_incomplete_gamma(a: f64, x: f64) -> Result<f64, SpecFunError> {
    if !x.is_finite() || x < 0.0 {
        return Err(SpecFunError::Domain("upper incomplete gamma requires x >= 0"));
    }
    if x == 0.0 {
        if a > 0.0 {
            return Ok(gamma(a));
        }
        return Err(SpecFunError::Domain(
            "upper incomplete gamma diverges at x = 0 for a <= 0",
        ));
    }
    if a > 0.0 {
        let q = regularized_gamma_q(a, x)?;
        return Ok(q * ln_gamma(a).exp());
    }
    if a == a.floor() {
        return Err(SpecFunError::Domain(
            "non-positive integer a is outside the recurrence path",
        ));
    }
    let steps = (-a).floor() as usize + 1;
    let seed = a + steps as f64;
    let mut value = regularized_gamma_q(seed, x)? * ln_gamma(seed).exp();
    let mut aa = seed;
    for _ in 0..steps {
        aa -= 1.0;
        value = (value - (aa * x.ln() - x).exp()) / aa;
    }
    Ok(value)
}

/// Confluent hypergeometric function ₁F₁(a; b; x) by ascending series with
/// compensated summation. A non-positive integer `a` makes the series a
/// polynomial that terminates after exactly 1 - a terms.
pub fn hyp1f1(a: f64, b: f64, x: f64, ctrl: &SeriesControl) -> Result<f64, SpecFunError> {
    if b <= 0.0 && b == b.floor() {
        return Err(SpecFunError::Domain("1F1 undefined for non-positive integer b"));
    }
    let polynomial_terms = if a <= 0.0 && a == a.floor() {
        Some(1 + (-a) as usize)
    } else {
        None
    };

    let mut sum = 1.0f64;
    let mut comp = 0.0f64; // Kahan compensation
    let mut term = 1.0f64;
    let mut small_streak = 0;
    let budget = match polynomial_terms {
        Some(n) => {
            if n > ctrl.max_terms {
                return Err(SpecFunError::NonConvergence {
                    max_terms: ctrl.max_terms,
                    rel_tol: ctrl.rel_tol,
                });
            }
            n - 1
        }
        None => ctrl.max_terms,
    };

    for n in 0..budget {
        let nf = n as f64;
        term *= (a + nf) / (b + nf) * x / (nf + 1.0);
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if polynomial_terms.is_none() {
            if term.abs() <= ctrl.rel_tol * sum.abs().max(f64::MIN_POSITIVE) {
                small_streak += 1;
                if small_streak >= 2 {
                    return Ok(sum);
                }
            } else {
                small_streak = 0;
            }
        }
    }

    if polynomial_terms.is_some() {
        Ok(sum)
    } else {
        Err(SpecFunError::NonConvergence {
            max_terms: ctrl.max_terms,
            rel_tol: ctrl.rel_tol,
        })
    }
}

/// Kernel of the averaged-erfc identity:
/// g_m(s) = -(√c/π) · Γ(m+1/2)/Γ(m) · e^{-cs}/√s · ₁F₁(1-m; 3/2; cs).
///
/// Integrable 1/√s singularity at the origin; s must be positive.
pub fn g_m_kernel(s: f64, m: f64, c: f64) -> Result<f64, SpecFunError> {
    if s <= 0.0 {
        return Err(SpecFunError::Domain("g_m requires s > 0"));
    }
    let ratio = (ln_gamma(m + 0.5) - ln_gamma(m)).exp();
    let hyp = hyp1f1(1.0 - m, 1.5, c * s, &SeriesControl::default())?;
    Ok(-(c.sqrt() / std::f64::consts::PI) * ratio * (-c * s).exp() / s.sqrt() * hyp)
}
