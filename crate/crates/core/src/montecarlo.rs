//! Independent stochastic simulator: samples interferer/blockage scenes,
//! computes per-trial SINR, and estimates average BER with confidence
//! intervals. Cross-validates the analytic engine.
//!
//! Determinism contract: every trial derives its own generator as
//! `ChaCha8Rng::seed_from_u64(seed ^ trial_index)` (a splittable,
//! counter-based scheme), and reductions merge fixed-size blocks in trial
//! order, so results are bitwise identical for any worker count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;

use crate::model::{self, NetworkConfig};
use crate::specfun;
use crate::spectral::SpectralModel;

/// How blockage is applied to a sampled scene.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockageMode {
    /// Each interferer survives independently with probability
    /// e^{-ρℓ²tanθ} (the thinning the analysis assumes).
    Thinning,
    /// A blockage point field is materialized and an interferer is blocked
    /// iff some point falls inside its radiation triangle.
    ExplicitBlockage,
}

/// One sampled interferer.
#[derive(Debug, Clone, Copy)]
pub struct Interferer {
    /// Position in the plane, m; the victim receiver sits at the origin.
    pub position: [f64; 2],
    /// Distance to the receiver, m.
    pub ell: f64,
    /// Carrier offset, Hz, in [-W/2, W/2].
    pub freq: f64,
    /// Squared Nakagami fading gain, unit mean.
    pub fading_h: f64,
    /// Line-of-sight flag; blocked interferers contribute nothing.
    pub los: bool,
}

/// One Monte Carlo realization of the interference field.
#[derive(Debug, Clone)]
pub struct InterferenceScene {
    pub interferers: Vec<Interferer>,
    /// Blockage point positions; populated only in explicit mode.
    pub blockages: Vec<[f64; 2]>,
    pub mode: BlockageMode,
}

/// BER estimate with its sampling uncertainty.
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub ber_mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

/// Pairwise LoS independence measurement over sampled scenes.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationReport {
    pub scenes: u64,
    pub pairs: u64,
    /// Mean of los_i · los_j over interferer pairs.
    pub joint_mean: f64,
    /// Mean of p_i · p_j, the prediction under link independence.
    pub independence_mean: f64,
    /// joint_mean - independence_mean.
    pub deviation: f64,
    /// Standard error of the deviation.
    pub std_error: f64,
}

/// Joint LoS measurement for one fixed pair of link geometries.
#[derive(Debug, Clone, Copy)]
pub struct PairLosReport {
    pub fields: u64,
    pub joint_mean: f64,
    /// Product of the closed-form marginal survival probabilities.
    pub independence_product: f64,
    pub deviation: f64,
    pub std_error: f64,
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial generator: the user seed is diffused through SplitMix64 and
/// XORed with the trial counter. Without the diffusion step, two small
/// seeds would address permutations of the same key set and produce the
/// same estimate.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(splitmix64(seed) ^ trial_index)
}

/// Trials per reduction block. Fixed so the merge order (and therefore the
/// floating-point result) does not depend on the worker count.
const TRIAL_BLOCK: u64 = 4096;

fn gamma_fading(m: f64) -> Gamma<f64> {
    Gamma::new(m, 1.0 / m).expect("validated Nakagami shape")
}

/// Sample one interference scene.
///
/// Interferer count ~ Poisson(λπD²W); distances follow the 2ℓ/D² radial
/// density (inverse CDF: ℓ = D√u), angles and carriers are uniform, fading
/// is Gamma(m, 1/m). Blockage handling depends on `mode`.
pub fn sample_scene(
    cfg: &NetworkConfig,
    spectral: &SpectralModel,
    mode: BlockageMode,
    rng: &mut impl Rng,
) -> InterferenceScene {
    let mean_count = cfg.mean_count_in_disk();
    let count = if mean_count > 0.0 {
        Poisson::new(mean_count).expect("positive mean").sample(rng) as usize
    } else {
        0
    };

    let fading = gamma_fading(cfg.nakagami_m);
    let w = spectral.bandwidth_w;
    let tan_theta = cfg.half_beamwidth.tan();
    let mut interferers = Vec::with_capacity(count);
    for _ in 0..count {
        let ell = cfg.radius_d * rng.gen::<f64>().sqrt();
        let angle = rng.gen_range(0.0..std::f64::consts::TAU);
        let freq = rng.gen_range(-w / 2.0..=w / 2.0);
        let fading_h = fading.sample(rng);
        let los = match mode {
            BlockageMode::Thinning => rng.gen::<f64>() < model::survival_probability(ell, cfg),
            BlockageMode::ExplicitBlockage => true, // resolved below
        };
        interferers.push(Interferer {
            position: [ell * angle.cos(), ell * angle.sin()],
            ell,
            freq,
            fading_h,
            los,
        });
    }

    let mut blockages = Vec::new();
    if mode == BlockageMode::ExplicitBlockage && cfg.rho > 0.0 {
        // Bounding disk: every point of a radiation triangle with apex at
        // distance ell <= D lies within ell/cos(theta) of the receiver.
        let bound = cfg.radius_d / cfg.half_beamwidth.cos();
        let mean_blockages = cfg.rho * std::f64::consts::PI * bound * bound;
        let n_blk = Poisson::new(mean_blockages).expect("positive mean").sample(rng) as usize;
        blockages.reserve(n_blk);
        for _ in 0..n_blk {
            let r = bound * rng.gen::<f64>().sqrt();
            let a = rng.gen_range(0.0..std::f64::consts::TAU);
            blockages.push([r * a.cos(), r * a.sin()]);
        }
        for itf in &mut interferers {
            itf.los = !blockages
                .iter()
                .any(|b| triangle_blocks(itf.position, itf.ell, tan_theta, *b));
        }
    }

    InterferenceScene {
        interferers,
        blockages,
        mode,
    }
}

/// Whether `point` falls inside the radiation triangle of a transmitter at
/// `apex` (distance `ell` from the origin): base of half-width ell·tanθ
/// centered on the receiver, perpendicular to the link axis.
fn triangle_blocks(apex: [f64; 2], ell: f64, tan_theta: f64, point: [f64; 2]) -> bool {
    if ell == 0.0 {
        return false;
    }
    let half_base = ell * tan_theta;
    let normal = [-apex[1] / ell, apex[0] / ell];
    let b1 = [half_base * normal[0], half_base * normal[1]];
    let b2 = [-b1[0], -b1[1]];
    point_in_triangle(point, apex, b1, b2)
}

fn point_in_triangle(p: [f64; 2], a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> bool {
    let cross = |o: [f64; 2], u: [f64; 2], v: [f64; 2]| {
        (u[0] - o[0]) * (v[1] - o[1]) - (u[1] - o[1]) * (v[0] - o[0])
    };
    let d1 = cross(a, b, p);
    let d2 = cross(b, c, p);
    let d3 = cross(c, a, p);
    let has_neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let has_pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(has_neg && has_pos)
}

/// Aggregate interference power normalized by the mean desired power:
/// Σ_{k LoS} q h_k ℓ_k^{-α} Ω(f_k) / (q₀ℓ₀^{-α}).
pub fn normalized_interference(
    scene: &InterferenceScene,
    cfg: &NetworkConfig,
    spectral: &SpectralModel,
) -> f64 {
    interference_power(scene, cfg, spectral) / cfg.desired_mean_power()
}

fn interference_power(
    scene: &InterferenceScene,
    cfg: &NetworkConfig,
    spectral: &SpectralModel,
) -> f64 {
    let alpha = cfg.pathloss_exp;
    scene
        .interferers
        .iter()
        .filter(|i| i.los)
        .map(|i| cfg.q_interferer * i.fading_h * i.ell.powf(-alpha) * spectral.overlap(i.freq))
        .sum()
}

/// SINR for a scene with the desired-link fading pinned to `h0`.
pub fn scene_sinr_with_h0(
    scene: &InterferenceScene,
    cfg: &NetworkConfig,
    spectral: &SpectralModel,
    h0: f64,
) -> f64 {
    let signal = cfg.q_desired * h0 * cfg.ell_desired.powf(-cfg.pathloss_exp);
    let sinr = signal / (interference_power(scene, cfg, spectral) + cfg.noise_power);
    if sinr.is_finite() {
        sinr
    } else {
        0.0
    }
}

/// SINR with a fresh desired-link fading draw h₀ ~ Gamma(m, 1/m).
pub fn scene_sinr(
    scene: &InterferenceScene,
    cfg: &NetworkConfig,
    spectral: &SpectralModel,
    rng: &mut impl Rng,
) -> f64 {
    let h0 = gamma_fading(cfg.nakagami_m).sample(rng);
    scene_sinr_with_h0(scene, cfg, spectral, h0)
}

/// Instantaneous BER: ½ erfc √(c·SINR).
pub fn ber_for_sinr(mod_constant: f64, sinr: f64) -> f64 {
    let arg = mod_constant * sinr;
    if arg > 1500.0 {
        // erfc(sqrt(1500)) underflows f64; skip the evaluation.
        return 0.0;
    }
    0.5 * specfun::erfc(arg.sqrt())
}

/// Welford accumulator state (count, mean, M2), mergeable in fixed order.
#[derive(Debug, Clone, Copy)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    const EMPTY: Moments = Moments {
        n: 0,
        mean: 0.0,
        m2: 0.0,
    };

    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * (other.n as f64 / n as f64),
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64),
        }
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Run per-trial work in fixed blocks, merging block moments in trial order.
fn blocked_moments<F>(trials: u64, per_trial: F) -> Moments
where
    F: Fn(u64, &mut Moments) + Sync,
{
    let n_blocks = trials.div_ceil(TRIAL_BLOCK);
    (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut acc = Moments::EMPTY;
            let start = block * TRIAL_BLOCK;
            let end = (start + TRIAL_BLOCK).min(trials);
            for t in start..end {
                per_trial(t, &mut acc);
            }
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Moments::EMPTY, Moments::merge)
}

/// Estimate the average BER at `snr_db` over `trials` independent scenes
/// (thinning mode, the analysis-matched blockage model).
///
/// Per-trial draw order: scene, then desired-link fading h₀. Deterministic
/// for fixed (seed, trials) regardless of worker count.
pub fn estimate_ber(
    cfg: &NetworkConfig,
    spectral: &SpectralModel,
    snr_db: f64,
    trials: u64,
    seed: u64,
) -> McEstimate {
    let cfg_pt = cfg.with_snr_db(snr_db);
    let moments = blocked_moments(trials, |t, acc| {
        let mut rng = trial_rng(seed, t);
        let scene = sample_scene(&cfg_pt, spectral, BlockageMode::Thinning, &mut rng);
        let sinr = scene_sinr(&scene, &cfg_pt, spectral, &mut rng);
        acc.push(ber_for_sinr(cfg_pt.mod_constant, sinr));
    });
    McEstimate {
        ber_mean: moments.mean,
        std_error: moments.std_error(),
        trials,
        seed,
    }
}

/// Empirical aggregate Laplace transform: mean and standard error of
/// e^{-s·I_norm} over sampled scenes (thinning mode) for each `s`.
pub fn empirical_aggregate_laplace(
    cfg: &NetworkConfig,
    spectral: &SpectralModel,
    s_values: &[f64],
    scenes: u64,
    seed: u64,
) -> Vec<(f64, f64)> {
    let n_blocks = scenes.div_ceil(TRIAL_BLOCK);
    let per_block = |block: u64| {
        let mut accs = vec![Moments::EMPTY; s_values.len()];
        let start = block * TRIAL_BLOCK;
        let end = (start + TRIAL_BLOCK).min(scenes);
        for t in start..end {
            let mut rng = trial_rng(seed, t);
            let scene = sample_scene(cfg, spectral, BlockageMode::Thinning, &mut rng);
            let i_norm = normalized_interference(&scene, cfg, spectral);
            for (acc, &s) in accs.iter_mut().zip(s_values) {
                acc.push((-s * i_norm).exp());
            }
        }
        accs
    };
    let blocks: Vec<Vec<Moments>> = (0..n_blocks).into_par_iter().map(per_block).collect();
    let mut totals = vec![Moments::EMPTY; s_values.len()];
    for block in blocks {
        for (total, acc) in totals.iter_mut().zip(block) {
            *total = total.merge(acc);
        }
    }
    totals
        .into_iter()
        .map(|m| (m.mean, m.std_error()))
        .collect()
}

/// Measure how far pairwise LoS events deviate from independence under the
/// explicit blockage field (the approximation the thinning analysis makes).
pub fn blockage_correlation_probe(cfg: &NetworkConfig, scenes: u64, seed: u64) -> CorrelationReport {
    let spectral = SpectralModel::rect_ideal(cfg.bandwidth_w);
    let n_blocks = scenes.div_ceil(TRIAL_BLOCK);
    // Per block: deviation moments plus joint/prediction sums.
    let blocks: Vec<(Moments, f64, f64)> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let mut dev = Moments::EMPTY;
            let mut joint_sum = 0.0;
            let mut pred_sum = 0.0;
            let start = block * TRIAL_BLOCK;
            let end = (start + TRIAL_BLOCK).min(scenes);
            for t in start..end {
                let mut rng = trial_rng(seed, t);
                let scene = sample_scene(cfg, &spectral, BlockageMode::ExplicitBlockage, &mut rng);
                let itf = &scene.interferers;
                for i in 0..itf.len() {
                    for j in (i + 1)..itf.len() {
                        let joint = (itf[i].los && itf[j].los) as u8 as f64;
                        let pred = model::survival_probability(itf[i].ell, cfg)
                            * model::survival_probability(itf[j].ell, cfg);
                        dev.push(joint - pred);
                        joint_sum += joint;
                        pred_sum += pred;
                    }
                }
            }
            (dev, joint_sum, pred_sum)
        })
        .collect();

    let mut dev = Moments::EMPTY;
    let mut joint_sum = 0.0;
    let mut pred_sum = 0.0;
    for (d, j, p) in blocks {
        dev = dev.merge(d);
        joint_sum += j;
        pred_sum += p;
    }
    let pairs = dev.n;
    let denom = (pairs.max(1)) as f64;
    CorrelationReport {
        scenes,
        pairs,
        joint_mean: joint_sum / denom,
        independence_mean: pred_sum / denom,
        deviation: dev.mean,
        std_error: dev.std_error(),
    }
}

/// Joint LoS statistics for two fixed link geometries given as (distance,
/// azimuth) pairs, against the closed-form independence product.
pub fn pair_los_statistics(
    cfg: &NetworkConfig,
    link_a: (f64, f64),
    link_b: (f64, f64),
    fields: u64,
    seed: u64,
) -> PairLosReport {
    let tan_theta = cfg.half_beamwidth.tan();
    let pos = |(ell, az): (f64, f64)| [ell * f64::cos(az), ell * f64::sin(az)];
    let (pos_a, pos_b) = (pos(link_a), pos(link_b));
    let product =
        model::survival_probability(link_a.0, cfg) * model::survival_probability(link_b.0, cfg);
    let bound = link_a.0.max(link_b.0) / cfg.half_beamwidth.cos();
    let mean_blockages = cfg.rho * std::f64::consts::PI * bound * bound;

    let moments = blocked_moments(fields, |t, acc| {
        let mut rng = trial_rng(seed, t);
        let n_blk = if mean_blockages > 0.0 {
            Poisson::new(mean_blockages).expect("positive mean").sample(&mut rng) as usize
        } else {
            0
        };
        let mut los_a = true;
        let mut los_b = true;
        for _ in 0..n_blk {
            let r = bound * rng.gen::<f64>().sqrt();
            let az = rng.gen_range(0.0..std::f64::consts::TAU);
            let p = [r * az.cos(), r * az.sin()];
            los_a &= !triangle_blocks(pos_a, link_a.0, tan_theta, p);
            los_b &= !triangle_blocks(pos_b, link_b.0, tan_theta, p);
        }
        acc.push(((los_a && los_b) as u8 as f64) - product);
    });

    PairLosReport {
        fields,
        joint_mean: moments.mean + product,
        independence_product: product,
        deviation: moments.mean,
        std_error: moments.std_error(),
    }
}
