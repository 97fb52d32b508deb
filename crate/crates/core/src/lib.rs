//! Probability that a pulsed radar corrupts channel-estimation pilots in an
//! OFDM link.
//!
//! A radar with repetition interval `t_rep` and uniformly random first arrival
//! shares the band with `n_p` equally spaced pilot symbols. The crate computes
//! `P[M >= m]`, the probability that at least `m` pilots are overlapped, by an
//! exact interval sweep, along with analytic bounds, closed forms for special
//! configurations, a predicted support in `t_rep`, and a Monte Carlo oracle.
//!
//! ```
//! use pilot_interference::{prob_at_least, ScenarioConfig};
//!
//! let scn = ScenarioConfig::new(71.43e-6, 1e-3, 5, 2e-3).validate().unwrap();
//! let r = prob_at_least(&scn, 1).unwrap();
//! assert!((r.p_exact - 71.43e-6 / 1e-3).abs() < 1e-9);
//! ```

pub mod advisor;
pub mod closed_form;
pub mod engine;
pub mod error;
pub mod interval;
pub mod montecarlo;
pub mod scenario;
pub mod sweep;
pub mod validation;

pub use advisor::{
    blind_region, recommend_dmrs, scsi_accuracy, DmrsRecommendation, FeedbackScheme, ScsiAccuracy,
};
pub use closed_form::{
    bounds, exact_special_case, feasible_set, predict_nonzero, Bounds, ClosedForm, FeasibleSet,
    SpecialCase,
};
pub use engine::{
    coverage_profile, exact_probabilities, exact_probability, prob_at_least, ProbabilityReport,
};
pub use error::{Error, Result};
pub use interval::{Interval, IntervalSet};
pub use montecarlo::{prob_monte_carlo, McEstimate};
pub use scenario::{PilotIndex, Scenario, ScenarioConfig};
