//! Distributional validation of the scene sampler and estimator: Poisson
//! count statistics, thinning-vs-explicit equivalence, worker-count
//! reproducibility, the empirical Laplace cross-check, and the pairwise
//! LoS independence probe.

use mmwsim_core::analytic::{MgfEvaluator, MgfMethod};
use mmwsim_core::model::{self, NetworkConfig};
use mmwsim_core::montecarlo::{
    self, blockage_correlation_probe, estimate_ber, pair_los_statistics, sample_scene,
    BlockageMode,
};
use mmwsim_core::spectral::SpectralModel;
use mmwsim_core::validate;

fn rect(cfg: &NetworkConfig) -> SpectralModel {
    SpectralModel::rect_ideal(cfg.bandwidth_w)
}

#[test]
fn scene_count_matches_poisson_mean() {
    let cfg = NetworkConfig::default();
    let spectral = rect(&cfg);
    let scenes = 100_000u64;
    let mut total = 0u64;
    for t in 0..scenes {
        let mut rng = montecarlo::trial_rng(11, t);
        total += sample_scene(&cfg, &spectral, BlockageMode::Thinning, &mut rng)
            .interferers
            .len() as u64;
    }
    let mean = total as f64 / scenes as f64;
    let expected = cfg.mean_count_in_disk();
    let sigma = (expected / scenes as f64).sqrt();
    assert!(
        (mean - expected).abs() <= 3.0 * sigma,
        "count mean {mean} vs {expected} (sigma {sigma})"
    );
}

#[test]
fn los_count_is_poisson_with_closed_form_rate() {
    let cfg = NetworkConfig::default();
    let spectral = rect(&cfg);
    let mu_k = model::active_count_rate(&cfg);
    let scenes = 100_000u64;
    let mut hist = vec![0u64; 8];
    let mut total = 0u64;
    for t in 0..scenes {
        let mut rng = montecarlo::trial_rng(23, t);
        let scene = sample_scene(&cfg, &spectral, BlockageMode::Thinning, &mut rng);
        let k = scene.interferers.iter().filter(|i| i.los).count();
        total += k as u64;
        let bin = k.min(hist.len() - 1);
        hist[bin] += 1;
    }
    let mean = total as f64 / scenes as f64;
    let sigma = (mu_k / scenes as f64).sqrt();
    assert!((mean - mu_k).abs() <= 3.0 * sigma, "{mean} vs {mu_k}");
    let fit = validate::poisson_chi_square_fit(&hist, mu_k, 5.0);
    assert!(
        fit.p_value > 0.01,
        "chi2 {} dof {} p {}",
        fit.chi_square,
        fit.dof,
        fit.p_value
    );
}

#[test]
fn thinning_and_explicit_blockage_share_marginals() {
    // Dense interferers so both samplers see plenty of links; LoS marginals
    // must match in distribution regardless of cone overlap.
    let mut cfg = NetworkConfig::default();
    cfg.lambda_sf = 1e-2;
    cfg.rho = 1e-2;
    let spectral = rect(&cfg);
    let scenes = 3_000u64;
    let mut los = [0u64; 2];
    let mut n = [0u64; 2];
    for (idx, mode) in [BlockageMode::Thinning, BlockageMode::ExplicitBlockage]
        .into_iter()
        .enumerate()
    {
        for t in 0..scenes {
            let mut rng = montecarlo::trial_rng(31 + idx as u64, t);
            let scene = sample_scene(&cfg, &spectral, mode, &mut rng);
            n[idx] += scene.interferers.len() as u64;
            los[idx] += scene.interferers.iter().filter(|i| i.los).count() as u64;
        }
    }
    let (z, p) = validate::two_proportion_z_test(los[0], n[0], los[1], n[1]);
    assert!(
        p > 0.01,
        "modes diverge: {}/{} vs {}/{} (z {z:.3}, p {p:.4})",
        los[0],
        n[0],
        los[1],
        n[1]
    );
}

#[test]
fn estimate_is_bitwise_reproducible_across_worker_counts() {
    let cfg = NetworkConfig::default();
    let spectral = rect(&cfg);
    let mut bits = Vec::new();
    for workers in [1usize, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .unwrap();
        let est = pool.install(|| estimate_ber(&cfg, &spectral, 20.0, 50_000, 99));
        bits.push((est.ber_mean.to_bits(), est.std_error.to_bits()));
    }
    assert_eq!(bits[0], bits[1]);
    assert_eq!(bits[1], bits[2]);
}

#[test]
fn empirical_laplace_matches_analytic() {
    let mut cfg = NetworkConfig::default();
    cfg.rho = 1e-2; // blockage-heavy variant
    let spectral = rect(&cfg);
    let ev = MgfEvaluator::new(MgfMethod::Quadrature, cfg.clone(), spectral.clone()).unwrap();
    let s_values = [0.1, 1.0, 10.0];
    let measured = montecarlo::empirical_aggregate_laplace(&cfg, &spectral, &s_values, 200_000, 7);
    for (&s, (mean, se)) in s_values.iter().zip(measured) {
        let analytic = ev.aggregate_laplace(s).unwrap();
        assert!(
            (mean - analytic).abs() <= 3.0 * se,
            "s={s}: MC {mean} +/- {se} vs analytic {analytic}"
        );
    }
}

#[test]
fn empirical_laplace_matches_analytic_with_raised_cosine() {
    // Nonzero roll-off drives the quadrature overlap path through both
    // engines; a dense field makes the transform interference-sensitive.
    let mut cfg = NetworkConfig::default();
    cfg.lambda_sf = 1e-2;
    let spectral = SpectralModel {
        psd_shape: mmwsim_core::spectral::BandShape::RaisedCosine { rolloff: 0.5 },
        filter_shape: mmwsim_core::spectral::BandShape::RaisedCosine { rolloff: 0.5 },
        bandwidth_w: cfg.bandwidth_w,
    };
    let ev = MgfEvaluator::new(MgfMethod::Quadrature, cfg.clone(), spectral.clone()).unwrap();
    let s_values = [1.0];
    let measured = montecarlo::empirical_aggregate_laplace(&cfg, &spectral, &s_values, 50_000, 19);
    let (mean, se) = measured[0];
    let analytic = ev.aggregate_laplace(1.0).unwrap();
    // The transform must visibly differ from 1 for the check to bite.
    assert!(1.0 - analytic > 20.0 * se, "test has no power: {analytic} vs se {se}");
    assert!(
        (mean - analytic).abs() <= 3.0 * se,
        "MC {mean} +/- {se} vs analytic {analytic}"
    );
}

#[test]
fn disjoint_cones_are_independent() {
    // Opposite azimuths: the two triangles share only the measure-zero base
    // line through the receiver, so their blockage counts are independent.
    let mut cfg = NetworkConfig::default();
    cfg.rho = 1e-2;
    let report = pair_los_statistics(&cfg, (4.0, 0.0), (4.0, std::f64::consts::PI), 200_000, 13);
    assert!(
        report.deviation.abs() <= 3.0 * report.std_error,
        "deviation {} +/- {}",
        report.deviation,
        report.std_error
    );
}

#[test]
fn overlapping_cones_show_positive_correlation() {
    // Nearly collinear links share blockages; the joint LoS probability
    // must exceed the independence product detectably.
    let mut cfg = NetworkConfig::default();
    cfg.rho = 5e-2;
    let report = pair_los_statistics(&cfg, (4.0, 0.0), (5.0, 0.05), 200_000, 17);
    assert!(
        report.deviation > 3.0 * report.std_error,
        "expected positive correlation, got {} +/- {}",
        report.deviation,
        report.std_error
    );
}

#[test]
fn correlation_probe_study_geometry_regression() {
    // Dense-interferer variant of the study geometry so scenes carry pairs.
    let mut cfg = NetworkConfig::default();
    cfg.lambda_sf = 3e-2;
    cfg.rho = 1e-2;
    let report = blockage_correlation_probe(&cfg, 20_000, 41);
    eprintln!("correlation probe: {report:?}");
    assert!(report.pairs > 50_000);
    // The independence approximation should hold to well under a percent.
    assert!(
        report.deviation.abs() <= 3.0 * report.std_error + 5e-3,
        "deviation {} +/- {}",
        report.deviation,
        report.std_error
    );
    // Regression pin (deterministic seeded run).
    assert!(
        (report.deviation - REGRESSION_DEVIATION).abs() < 1e-12,
        "probe deviation drifted: {} vs {}",
        report.deviation,
        REGRESSION_DEVIATION
    );
}

/// First-computation value of the probe deviation for seed 41, 20k scenes:
/// a ~0.4% positive excess of joint LoS over the independence product,
/// produced by cone overlap near the receiver.
const REGRESSION_DEVIATION: f64 = 0.004303637872256827;

#[test]
fn estimate_tracks_closed_form_without_interference() {
    // lambda = 0, m = 1: the estimator must reproduce the Rayleigh closed
    // form within 3 standard errors.
    let mut cfg = NetworkConfig::default();
    cfg.lambda_sf = 0.0;
    cfg.nakagami_m = 1.0;
    let spectral = rect(&cfg);
    let est = estimate_ber(&cfg, &spectral, 10.0, 1_000_000, 3);
    let closed = 0.5 * (1.0 - (10.0f64 / 11.0).sqrt());
    assert!(
        (est.ber_mean - closed).abs() <= 3.0 * est.std_error,
        "MC {} +/- {} vs closed {closed}",
        est.ber_mean,
        est.std_error
    );
}
