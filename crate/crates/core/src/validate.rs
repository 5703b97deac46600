//! Statistical checks shared by the validation and acceptance suites:
//! Poisson goodness-of-fit and proportion comparison.

use crate::specfun;

/// Chi-square goodness-of-fit outcome.
#[derive(Debug, Clone, Copy)]
pub struct GofResult {
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Poisson probability mass function.
pub fn poisson_pmf(k: u64, mu: f64) -> f64 {
    if mu <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    (k as f64 * mu.ln() - mu - specfun::ln_gamma(k as f64 + 1.0)).exp()
}

/// Chi-square fit of an observed count histogram against Poisson(mu).
///
/// `counts[k]` holds the number of observations equal to k; the final entry
/// must also absorb any observations ≥ counts.len() - 1 (its expected mass
/// is the matching Poisson tail). Bins with expected mass below
/// `min_expected` are merged leftward before the statistic is formed.
pub fn poisson_chi_square_fit(counts: &[u64], mu: f64, min_expected: f64) -> GofResult {
    let n: u64 = counts.iter().sum();
    let nf = n as f64;
    let last = counts.len() - 1;

    let mut expected: Vec<f64> = (0..counts.len())
        .map(|k| nf * poisson_pmf(k as u64, mu))
        .collect();
    let head: f64 = (0..last).map(|k| poisson_pmf(k as u64, mu)).sum();
    expected[last] = nf * (1.0 - head).max(0.0);

    let mut observed: Vec<f64> = counts.iter().map(|&c| c as f64).collect();

    // Merge sparse bins into their left neighbor, from the tail inward.
    let mut i = expected.len() - 1;
    while i > 0 {
        if expected[i] < min_expected {
            expected[i - 1] += expected[i];
            observed[i - 1] += observed[i];
            expected.remove(i);
            observed.remove(i);
        }
        i -= 1;
    }

    let mut chi_square = 0.0;
    for (o, e) in observed.iter().zip(&expected) {
        if *e > 0.0 {
            chi_square += (o - e) * (o - e) / e;
        }
    }
    let dof = expected.len().saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        specfun::regularized_gamma_q(dof as f64 / 2.0, chi_square / 2.0).unwrap_or(0.0)
    };
    GofResult {
        chi_square,
        dof,
        p_value,
    }
}

/// Two-sided two-proportion z-test. Returns (z, p_value).
pub fn two_proportion_z_test(x1: u64, n1: u64, x2: u64, n2: u64) -> (f64, f64) {
    let p1 = x1 as f64 / n1 as f64;
    let p2 = x2 as f64 / n2 as f64;
    let pooled = (x1 + x2) as f64 / (n1 + n2) as f64;
    let var = pooled * (1.0 - pooled) * (1.0 / n1 as f64 + 1.0 / n2 as f64);
    if var <= 0.0 {
        return (0.0, 1.0);
    }
    let z = (p1 - p2) / var.sqrt();
    (z, normal_p_two_sided(z))
}

/// Two-sided tail probability of a standard normal deviate.
pub fn normal_p_two_sided(z: f64) -> f64 {
    specfun::erfc(z.abs() / std::f64::consts::SQRT_2)
}
