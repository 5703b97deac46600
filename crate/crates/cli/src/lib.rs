//! Experiment runner: parses run configurations, sweeps parameters, drives
//! the analytic and Monte Carlo engines, and emits CSV curves, a resolved
//! manifest, and a gnuplot script.
//!
//! Config files are TOML; a written manifest is itself a loadable config
//! (the `[provenance]` table is informational), so re-running from a
//! manifest reproduces the original outputs byte for byte.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use mmwsim_core::analytic::{AnalyticError, MgfEvaluator, MgfMethod};
use mmwsim_core::model::{self, NetworkConfig};
use mmwsim_core::montecarlo::{estimate_ber, McEstimate};
use mmwsim_core::spectral::{BandShape, SpectralModel};

pub const TOOL_NAME: &str = "mmwsim";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("numeric: {0}")]
    Numeric(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Process exit code: 1 config, 2 numeric, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numeric(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<AnalyticError> for CliError {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::Quadrature { .. } | AnalyticError::Series(_) => {
                CliError::Numeric(e.to_string())
            }
            other => CliError::Config(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// Config file schema
// ---------------------------------------------------------------------------

/// Beamwidth entry: a bare number is the full beamwidth 2θ in degrees;
/// strings take a unit suffix ("20 deg", "0.35 rad").
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AngleSpec {
    Degrees(f64),
    Text(String),
}

impl AngleSpec {
    fn full_beamwidth_radians(&self) -> Result<f64, CliError> {
        match self {
            AngleSpec::Degrees(d) => Ok(d.to_radians()),
            AngleSpec::Text(t) => {
                let s = t.trim();
                if let Some(num) = s.strip_suffix("deg") {
                    Ok(parse_angle_number(num)?.to_radians())
                } else if let Some(num) = s.strip_suffix("rad") {
                    parse_angle_number(num)
                } else {
                    Err(CliError::Config(format!(
                        "beamwidth: expected a number with `deg` or `rad` suffix, got `{s}`"
                    )))
                }
            }
        }
    }
}

fn parse_angle_number(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError::Config(format!("beamwidth: cannot parse number `{s}`")))
}

/// Spectral shape entry: `"rect"` or `{ shape = "raised_cosine", rolloff = x }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ShapeSpec {
    Name(String),
    Detailed {
        shape: String,
        #[serde(default)]
        rolloff: f64,
    },
}

impl ShapeSpec {
    fn to_band_shape(&self, field: &str) -> Result<BandShape, CliError> {
        let (name, rolloff) = match self {
            ShapeSpec::Name(n) => (n.as_str(), 0.0),
            ShapeSpec::Detailed { shape, rolloff } => (shape.as_str(), *rolloff),
        };
        match name {
            "rect" | "rect_ideal" => Ok(BandShape::RectIdeal),
            "raised_cosine" => Ok(BandShape::RaisedCosine { rolloff }),
            other => Err(CliError::Config(format!(
                "{field}: unknown shape `{other}` (expected `rect` or `raised_cosine`)"
            ))),
        }
    }

    fn from_band_shape(shape: &BandShape) -> ShapeSpec {
        match shape {
            BandShape::RectIdeal => ShapeSpec::Name("rect".to_string()),
            BandShape::RaisedCosine { rolloff } => ShapeSpec::Detailed {
                shape: "raised_cosine".to_string(),
                rolloff: *rolloff,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct NetworkSection {
    lambda_sf: f64,
    rho: f64,
    radius_d: f64,
    beamwidth: AngleSpec,
    pathloss_exp: f64,
    nakagami_m: f64,
    bandwidth_w: f64,
    q_interferer: f64,
    q_desired: f64,
    ell_desired: f64,
    mod_constant: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpectralSection {
    psd: ShapeSpec,
    filter: ShapeSpec,
}

impl Default for SpectralSection {
    fn default() -> Self {
        Self {
            psd: ShapeSpec::Name("rect".to_string()),
            filter: ShapeSpec::Name("rect".to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ExperimentSection {
    snr_grid_db: Vec<f64>,
    engines: Vec<String>,
    trials: u64,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    output: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SweepSection {
    param: String,
    values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ProvenanceSection {
    tool: String,
    version: String,
    seed: u64,
    trials: u64,
    wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    network: NetworkSection,
    #[serde(default)]
    spectral: SpectralSection,
    experiment: ExperimentSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<SweepSection>,
    /// Present in manifests; informational only.
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<ProvenanceSection>,
}

// ---------------------------------------------------------------------------
// Resolved experiment
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    LambdaSf,
    Rho,
    BlockageToggle,
}

impl SweepParam {
    fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "lambda_sf" => Ok(SweepParam::LambdaSf),
            "rho" => Ok(SweepParam::Rho),
            "blockage_toggle" => Ok(SweepParam::BlockageToggle),
            other => Err(CliError::Config(format!(
                "sweep.param: unknown parameter `{other}` \
                 (expected lambda_sf, rho, or blockage_toggle)"
            ))),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            SweepParam::LambdaSf => "lambda_sf",
            SweepParam::Rho => "rho",
            SweepParam::BlockageToggle => "blockage_toggle",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineSet {
    pub analytic: bool,
    pub montecarlo: bool,
}

impl EngineSet {
    pub fn parse_list(items: &[String]) -> Result<Self, CliError> {
        let mut set = EngineSet {
            analytic: false,
            montecarlo: false,
        };
        for item in items {
            match item.as_str() {
                "analytic" => set.analytic = true,
                "montecarlo" => set.montecarlo = true,
                other => {
                    return Err(CliError::Config(format!(
                        "engines: unknown engine `{other}` (expected analytic, montecarlo)"
                    )))
                }
            }
        }
        if !set.analytic && !set.montecarlo {
            return Err(CliError::Config(
                "engines: at least one engine must be enabled".to_string(),
            ));
        }
        Ok(set)
    }

    fn to_list(self) -> Vec<String> {
        let mut v = Vec::new();
        if self.analytic {
            v.push("analytic".to_string());
        }
        if self.montecarlo {
            v.push("montecarlo".to_string());
        }
        v
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub name: String,
    pub base: NetworkConfig,
    pub spectral: SpectralModel,
    pub snr_grid_db: Vec<f64>,
    pub sweep: Option<Sweep>,
    pub engines: EngineSet,
    pub trials: u64,
    pub seed: u64,
    pub output_path: Option<PathBuf>,
}

pub fn load_config(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = fs::read_to_string(path)?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<ExperimentSpec, CliError> {
    let file: ConfigFile =
        toml::from_str(text).map_err(|e| CliError::Config(format!("parse failure: {e}")))?;
    let half_beamwidth = file.network.beamwidth.full_beamwidth_radians()? / 2.0;
    let n = &file.network;
    let base = NetworkConfig {
        lambda_sf: n.lambda_sf,
        rho: n.rho,
        radius_d: n.radius_d,
        half_beamwidth,
        pathloss_exp: n.pathloss_exp,
        nakagami_m: n.nakagami_m,
        bandwidth_w: n.bandwidth_w,
        q_interferer: n.q_interferer,
        q_desired: n.q_desired,
        ell_desired: n.ell_desired,
        // Placeholder; the runner derives noise from each SNR grid point.
        noise_power: n.q_desired * n.ell_desired.powf(-n.pathloss_exp),
        mod_constant: n.mod_constant,
    };
    let spectral = SpectralModel {
        psd_shape: file.spectral.psd.to_band_shape("spectral.psd")?,
        filter_shape: file.spectral.filter.to_band_shape("spectral.filter")?,
        bandwidth_w: n.bandwidth_w,
    };
    let sweep = match file.sweep {
        Some(s) => Some(Sweep {
            param: SweepParam::parse(&s.param)?,
            values: s.values,
        }),
        None => None,
    };
    let spec = ExperimentSpec {
        name: file.name.unwrap_or_else(|| "experiment".to_string()),
        base,
        spectral,
        snr_grid_db: file.experiment.snr_grid_db,
        sweep,
        engines: EngineSet::parse_list(&file.experiment.engines)?,
        trials: file.experiment.trials,
        seed: file.experiment.seed,
        output_path: file.experiment.output.map(PathBuf::from),
    };
    validate_spec(&spec)?;
    Ok(spec)
}

/// Render the resolved spec back to config TOML. The beamwidth is written
/// in radians at full precision so a round trip reproduces the exact f64.
fn to_config_file(spec: &ExperimentSpec, provenance: Option<ProvenanceSection>) -> ConfigFile {
    let cfg = &spec.base;
    ConfigFile {
        name: Some(spec.name.clone()),
        network: NetworkSection {
            lambda_sf: cfg.lambda_sf,
            rho: cfg.rho,
            radius_d: cfg.radius_d,
            beamwidth: AngleSpec::Text(format!("{} rad", 2.0 * cfg.half_beamwidth)),
            pathloss_exp: cfg.pathloss_exp,
            nakagami_m: cfg.nakagami_m,
            bandwidth_w: cfg.bandwidth_w,
            q_interferer: cfg.q_interferer,
            q_desired: cfg.q_desired,
            ell_desired: cfg.ell_desired,
            mod_constant: cfg.mod_constant,
        },
        spectral: SpectralSection {
            psd: ShapeSpec::from_band_shape(&spec.spectral.psd_shape),
            filter: ShapeSpec::from_band_shape(&spec.spectral.filter_shape),
        },
        experiment: ExperimentSection {
            snr_grid_db: spec.snr_grid_db.clone(),
            engines: spec.engines.to_list(),
            trials: spec.trials,
            seed: spec.seed,
            output: spec
                .output_path
                .as_ref()
                .map(|p| p.display().to_string()),
        },
        sweep: spec.sweep.as_ref().map(|s| SweepSection {
            param: s.param.name().to_string(),
            values: s.values.clone(),
        }),
        provenance,
    }
}

pub fn render_config(spec: &ExperimentSpec) -> String {
    toml::to_string_pretty(&to_config_file(spec, None)).expect("spec serializes")
}

// ---------------------------------------------------------------------------
// Validation (dry run)
// ---------------------------------------------------------------------------

/// Check all nested invariants and return a resolved-parameter report with
/// the active-interferer rate and the SNR -> noise mapping, without
/// computing any curve.
pub fn validate_spec(spec: &ExperimentSpec) -> Result<String, CliError> {
    spec.base
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    spec.spectral
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    if spec.snr_grid_db.is_empty() {
        return Err(CliError::Config(
            "snr_grid_db: the SNR grid must not be empty".to_string(),
        ));
    }
    if spec.trials == 0 && spec.engines.montecarlo {
        return Err(CliError::Config(
            "trials: the Monte Carlo engine needs at least one trial".to_string(),
        ));
    }
    if let Some(sweep) = &spec.sweep {
        if sweep.values.is_empty() {
            return Err(CliError::Config(
                "sweep.values: the sweep value list must not be empty".to_string(),
            ));
        }
        match sweep.param {
            SweepParam::LambdaSf | SweepParam::Rho => {
                if sweep.values.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                    return Err(CliError::Config(format!(
                        "sweep.values: {} values must be positive and finite",
                        sweep.param.name()
                    )));
                }
            }
            SweepParam::BlockageToggle => {}
        }
    }

    let mut report = String::new();
    let _ = writeln!(report, "experiment `{}`", spec.name);
    let _ = writeln!(
        report,
        "  engines: analytic={} montecarlo={} trials={} seed={}",
        spec.engines.analytic, spec.engines.montecarlo, spec.trials, spec.seed
    );
    let _ = writeln!(
        report,
        "  snr grid: {} points from {} to {} dB",
        spec.snr_grid_db.len(),
        spec.snr_grid_db.first().unwrap(),
        spec.snr_grid_db.last().unwrap()
    );
    for (label, cfg) in sweep_variants(spec) {
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let _ = writeln!(
            report,
            "  [{label}] lambda_sf={:e} rho={:e} mean_in_disk={:.6e} mu_K={:.12e}",
            cfg.lambda_sf,
            cfg.rho,
            cfg.mean_count_in_disk(),
            model::active_count_rate(&cfg),
        );
    }
    let desired = spec.base.desired_mean_power();
    let _ = writeln!(
        report,
        "  snr mapping: sigma_n^2 = q0*l0^-alpha * 10^(-snr/10), q0*l0^-alpha = {desired:.6e}"
    );
    for &snr in &spec.snr_grid_db {
        let _ = writeln!(
            report,
            "    {snr} dB -> sigma_n^2 = {:.6e}",
            spec.base.with_snr_db(snr).noise_power
        );
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

/// Sweep variants as (file label, resolved config) pairs.
pub fn sweep_variants(spec: &ExperimentSpec) -> Vec<(String, NetworkConfig)> {
    match &spec.sweep {
        None => vec![("curve".to_string(), spec.base.clone())],
        Some(sweep) => sweep
            .values
            .iter()
            .map(|&v| {
                let mut cfg = spec.base.clone();
                let label = match sweep.param {
                    SweepParam::LambdaSf => {
                        cfg.lambda_sf = v;
                        format!("lambda_sf_{v:e}")
                    }
                    SweepParam::Rho => {
                        cfg.rho = v;
                        format!("rho_{v:e}")
                    }
                    SweepParam::BlockageToggle => {
                        if v == 0.0 {
                            cfg.rho = 0.0;
                            "blockage_off".to_string()
                        } else {
                            "blockage_on".to_string()
                        }
                    }
                };
                (label, cfg)
            })
            .collect(),
    }
}

/// One CSV row; `None` fields belong to engines that did not run.
#[derive(Debug, Clone)]
pub struct CurveRow {
    pub snr_db: f64,
    pub ber_analytic: Option<f64>,
    pub ber_mc: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub trials: Option<u64>,
}

pub struct RunArtifacts {
    pub csv_paths: Vec<PathBuf>,
    pub manifest_path: PathBuf,
    pub plot_path: PathBuf,
    pub wall_time_s: f64,
}

fn curve_rows(spec: &ExperimentSpec, cfg: &NetworkConfig) -> Result<Vec<CurveRow>, CliError> {
    let analytic: Option<Vec<f64>> = if spec.engines.analytic {
        let ev = MgfEvaluator::new(MgfMethod::Quadrature, cfg.clone(), spec.spectral.clone())?;
        let curve = ev.ber_curve(&spec.snr_grid_db)?;
        Some(curve.points.into_iter().map(|p| p.ber).collect())
    } else {
        None
    };
    let mc: Option<Vec<McEstimate>> = if spec.engines.montecarlo {
        Some(
            spec.snr_grid_db
                .iter()
                .map(|&snr| estimate_ber(cfg, &spec.spectral, snr, spec.trials, spec.seed))
                .collect(),
        )
    } else {
        None
    };

    Ok(spec
        .snr_grid_db
        .iter()
        .enumerate()
        .map(|(i, &snr_db)| CurveRow {
            snr_db,
            ber_analytic: analytic.as_ref().map(|a| a[i]),
            ber_mc: mc.as_ref().map(|m| m[i].ber_mean),
            mc_stderr: mc.as_ref().map(|m| m[i].std_error),
            trials: mc.as_ref().map(|m| m[i].trials),
        })
        .collect())
}

pub const CSV_HEADER: &str = "snr_db,ber_analytic,ber_mc,mc_stderr,trials";

fn render_csv(rows: &[CurveRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = write!(out, "{}", row.snr_db);
        match row.ber_analytic {
            Some(v) => {
                let _ = write!(out, ",{v:.8e}");
            }
            None => out.push(','),
        }
        match row.ber_mc {
            Some(v) => {
                let _ = write!(out, ",{v:.8e}");
            }
            None => out.push(','),
        }
        match row.mc_stderr {
            Some(v) => {
                let _ = write!(out, ",{v:.4e}");
            }
            None => out.push(','),
        }
        match row.trials {
            Some(v) => {
                let _ = write!(out, ",{v}");
            }
            None => out.push(','),
        }
        out.push('\n');
    }
    out
}

fn render_plot_script(csv_names: &[String], engines: EngineSet) -> String {
    let mut s = String::new();
    s.push_str("# gnuplot script for the emitted curves\n");
    s.push_str("set datafile separator \",\"\n");
    s.push_str("set logscale y\n");
    s.push_str("set xlabel \"SNR (dB)\"\n");
    s.push_str("set ylabel \"average BER\"\n");
    s.push_str("set key bottom left\n");
    s.push_str("set grid\n");
    s.push_str("plot \\\n");
    let mut parts = Vec::new();
    for name in csv_names {
        let label = name.trim_end_matches(".csv");
        if engines.analytic {
            parts.push(format!(
                "  \"{name}\" using 1:2 with lines title \"{label} analytic\" noenhanced"
            ));
        }
        if engines.montecarlo {
            parts.push(format!(
                "  \"{name}\" using 1:3 with points title \"{label} mc\" noenhanced"
            ));
        }
    }
    s.push_str(&parts.join(", \\\n"));
    s.push('\n');
    s
}

/// Execute the experiment: one CSV per sweep variant, a manifest with the
/// fully resolved configuration, and a plot script, all under `out_dir`.
pub fn run(spec: &ExperimentSpec, out_dir: &Path) -> Result<RunArtifacts, CliError> {
    let started = Instant::now();
    validate_spec(spec)?;
    fs::create_dir_all(out_dir)?;

    let mut csv_paths = Vec::new();
    let mut csv_names = Vec::new();
    for (label, cfg) in sweep_variants(spec) {
        let rows = curve_rows(spec, &cfg)?;
        let name = format!("{label}.csv");
        let path = out_dir.join(&name);
        fs::write(&path, render_csv(&rows))?;
        csv_paths.push(path);
        csv_names.push(name);
    }

    let plot_path = out_dir.join("plot.gp");
    fs::write(&plot_path, render_plot_script(&csv_names, spec.engines))?;

    let wall_time_s = started.elapsed().as_secs_f64();
    let manifest = to_config_file(
        spec,
        Some(ProvenanceSection {
            tool: TOOL_NAME.to_string(),
            version: TOOL_VERSION.to_string(),
            seed: spec.seed,
            trials: spec.trials,
            wall_time_s,
        }),
    );
    let manifest_path = out_dir.join("manifest.toml");
    fs::write(
        &manifest_path,
        toml::to_string_pretty(&manifest).expect("manifest serializes"),
    )?;

    Ok(RunArtifacts {
        csv_paths,
        manifest_path,
        plot_path,
        wall_time_s,
    })
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

/// Shared preset scaffold: the short-range study geometry with a 0-80 dB
/// grid in 5 dB steps and both engines at 10^6 trials.
fn preset_base(name: &str) -> ExperimentSpec {
    let base = NetworkConfig::default();
    let spectral = SpectralModel::rect_ideal(base.bandwidth_w);
    ExperimentSpec {
        name: name.to_string(),
        base,
        spectral,
        snr_grid_db: (0..=16).map(|i| 5.0 * i as f64).collect(),
        sweep: None,
        engines: EngineSet {
            analytic: true,
            montecarlo: true,
        },
        trials: 1_000_000,
        seed: 1,
        output_path: None,
    }
}

/// Built-in experiment presets.
///
/// - `fig2`: interferer-density sweep (λ ∈ {1e-5, 1e-4, 1e-3}, ρ = 1e-4).
/// - `fig3`: blockage-density sweep (ρ ∈ {1e-4, 1e-3, 1e-2}, λ = 1e-4).
/// - `fig4`: blockage on/off comparison at λ = 1e-4, ρ = 1e-2.
///
/// Anchor values follow the study configuration; the remaining sweep points
/// are decade steps chosen here.
pub fn preset(name: &str) -> Result<ExperimentSpec, CliError> {
    let mut spec = preset_base(name);
    match name {
        "fig2" => {
            spec.base.rho = 1e-4;
            spec.sweep = Some(Sweep {
                param: SweepParam::LambdaSf,
                values: vec![1e-5, 1e-4, 1e-3],
            });
        }
        "fig3" => {
            spec.base.lambda_sf = 1e-4;
            spec.sweep = Some(Sweep {
                param: SweepParam::Rho,
                values: vec![1e-4, 1e-3, 1e-2],
            });
        }
        "fig4" => {
            spec.base.lambda_sf = 1e-4;
            spec.base.rho = 1e-2;
            spec.sweep = Some(Sweep {
                param: SweepParam::BlockageToggle,
                values: vec![1.0, 0.0],
            });
        }
        other => {
            return Err(CliError::Config(format!(
                "unknown preset `{other}` (expected fig2, fig3, or fig4)"
            )))
        }
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
name = "sample"

[network]
lambda_sf = 1e-4
rho = 1e-4
radius_d = 5.6419
beamwidth = "20 deg"
pathloss_exp = 2.5
nakagami_m = 3.0
bandwidth_w = 1.0
q_interferer = 1.0
q_desired = 1.0
ell_desired = 1.0
mod_constant = 1.0

[spectral]
psd = "rect"
filter = { shape = "raised_cosine", rolloff = 0.0 }

[experiment]
snr_grid_db = [0.0, 10.0]
engines = ["analytic"]
trials = 100
seed = 9
"#;

    #[test]
    fn parses_sample_config() {
        let spec = parse_config_str(SAMPLE).unwrap();
        assert_eq!(spec.name, "sample");
        assert!((spec.base.half_beamwidth - 10f64.to_radians()).abs() < 1e-15);
        assert!(spec.engines.analytic && !spec.engines.montecarlo);
        assert_eq!(spec.snr_grid_db, vec![0.0, 10.0]);
    }

    #[test]
    fn beamwidth_accepts_degree_number_and_rad_suffix() {
        for (text, expected_half) in [
            ("beamwidth = 20.0", 10f64.to_radians()),
            ("beamwidth = \"20 deg\"", 10f64.to_radians()),
            ("beamwidth = \"0.5 rad\"", 0.25),
            ("beamwidth = \"0.5rad\"", 0.25),
        ] {
            let cfg = SAMPLE.replace("beamwidth = \"20 deg\"", text);
            let spec = parse_config_str(&cfg).unwrap();
            assert!(
                (spec.base.half_beamwidth - expected_half).abs() < 1e-15,
                "{text}"
            );
        }
        let bad = SAMPLE.replace("beamwidth = \"20 deg\"", "beamwidth = \"20 furlongs\"");
        assert!(parse_config_str(&bad).is_err());
    }

    #[test]
    fn empty_grid_is_rejected_naming_the_field() {
        let cfg = SAMPLE.replace("snr_grid_db = [0.0, 10.0]", "snr_grid_db = []");
        match parse_config_str(&cfg) {
            Err(CliError::Config(msg)) => assert!(msg.contains("snr_grid_db"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn right_angle_beam_is_rejected() {
        let cfg = SAMPLE.replace("beamwidth = \"20 deg\"", "beamwidth = 180.0");
        match parse_config_str(&cfg) {
            Err(CliError::Config(msg)) => assert!(msg.contains("half_beamwidth"), "{msg}"),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_engine_is_rejected() {
        let cfg = SAMPLE.replace("engines = [\"analytic\"]", "engines = [\"fpga\"]");
        assert!(matches!(parse_config_str(&cfg), Err(CliError::Config(_))));
    }

    #[test]
    fn config_round_trips_through_render() {
        let spec = parse_config_str(SAMPLE).unwrap();
        let rendered = render_config(&spec);
        let again = parse_config_str(&rendered).unwrap();
        assert_eq!(spec.base, again.base);
        assert_eq!(spec.spectral, again.spectral);
        assert_eq!(spec.snr_grid_db, again.snr_grid_db);
        assert_eq!(spec.seed, again.seed);
    }

    #[test]
    fn presets_resolve_and_validate() {
        for name in ["fig2", "fig3", "fig4"] {
            let spec = preset(name).unwrap();
            assert!(validate_spec(&spec).is_ok(), "{name}");
            assert_eq!(sweep_variants(&spec).len(), if name == "fig4" { 2 } else { 3 });
        }
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn sweep_labels() {
        let spec = preset("fig2").unwrap();
        let labels: Vec<String> = sweep_variants(&spec).into_iter().map(|(l, _)| l).collect();
        assert_eq!(labels, ["lambda_sf_1e-5", "lambda_sf_1e-4", "lambda_sf_1e-3"]);
        let spec = preset("fig4").unwrap();
        let variants = sweep_variants(&spec);
        assert_eq!(variants[0].0, "blockage_on");
        assert_eq!(variants[1].0, "blockage_off");
        assert_eq!(variants[1].1.rho, 0.0);
    }

    #[test]
    fn csv_rendering_with_missing_engine_fields() {
        let rows = vec![
            CurveRow {
                snr_db: 0.0,
                ber_analytic: Some(0.103515625),
                ber_mc: None,
                mc_stderr: None,
                trials: None,
            },
            CurveRow {
                snr_db: 5.0,
                ber_analytic: None,
                ber_mc: Some(1e-3),
                mc_stderr: Some(1e-5),
                trials: Some(1000),
            },
        ];
        let csv = render_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(lines.next().unwrap(), "0,1.03515625e-1,,,");
        assert_eq!(lines.next().unwrap(), "5,,1.00000000e-3,1.0000e-5,1000");
    }

    #[test]
    fn validate_report_contains_rate() {
        let mut spec = preset("fig2").unwrap();
        spec.trials = 10;
        let report = validate_spec(&spec).unwrap();
        assert!(report.contains("mu_K"));
        assert!(report.contains("snr mapping"));
    }
}
