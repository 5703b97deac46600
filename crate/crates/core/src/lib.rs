//! Spatial-spectral interference modeling for directional mmWave links.
//!
//! Two independent engines evaluate the same network model — a Poisson
//! field of narrow-beam interferers thinned by a Poisson field of
//! blockages, with Nakagami-m fading and partial spectral overlap at the
//! victim receiver:
//!
//! - [`analytic`]: Laplace-transform (MGF) representation of the aggregate
//!   interference and the average-BER integral built on it.
//! - [`montecarlo`]: scene-level simulation with deterministic, seedable
//!   parallel reduction, used to cross-validate the analytic results.
//!
//! Supporting modules: [`model`] (parameters and closed-form geometry /
//! counting primitives), [`spectral`] (PSD, receiver filter, and overlap
//! moments), [`specfun`] (special functions), [`quad`] (adaptive
//! integration), and [`validate`] (statistical test helpers).

pub mod analytic;
pub mod model;
pub mod montecarlo;
pub mod quad;
pub mod specfun;
pub mod spectral;
pub mod validate;

pub use analytic::{AnalyticError, BerCurve, BerPoint, MgfEvaluator, MgfMethod};
pub use model::{ModelError, NetworkConfig, RadiationCone};
pub use montecarlo::{BlockageMode, InterferenceScene, McEstimate};
pub use specfun::SeriesControl;
pub use spectral::{BandShape, SpectralModel};
