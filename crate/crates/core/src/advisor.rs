//! Pilot spacing for demodulation and feedback-accuracy diagnostics.

use serde::Serialize;

use crate::closed_form::feasible_set;
use crate::engine::exact_probability;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DmrsRecommendation {
    pub k_opt: u32,
    pub t_dmrs: f64,
    pub p_interference: f64,
    pub coherence_ok: bool,
}

/// Demodulation pilot spacing that divides the radar PRI while staying within
/// the coherence time.
///
/// Spacings `t_rep / k` are local minima of the single-hit probability, with
/// value `k * t_ofdm / t_rep`; the smallest admissible `k` is
/// `ceil(t_rep / t_coh)`.
pub fn recommend_dmrs(t_rep: f64, t_coh: f64, t_ofdm: f64) -> Result<DmrsRecommendation> {
    for (name, v) in [("t_rep", t_rep), ("t_coh", t_coh), ("t_ofdm", t_ofdm)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be finite and > 0 (got {v})"
            )));
        }
    }
    if t_rep <= t_ofdm {
        return Err(Error::InvalidArgument(format!(
            "t_rep ({t_rep}) <= t_ofdm ({t_ofdm}): every symbol is hit, no spacing helps"
        )));
    }
    let k_opt = (t_rep / t_coh).ceil().max(1.0);
    let t_dmrs = t_rep / k_opt;
    Ok(DmrsRecommendation {
        k_opt: k_opt as u32,
        t_dmrs,
        p_interference: (k_opt * t_ofdm / t_rep).min(1.0),
        coherence_ok: t_dmrs <= t_coh,
    })
}

/// Limited-feedback reduction of the per-pilot rate vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackScheme {
    /// Minimum over the window: accurate once any pilot is hit.
    Min,
    /// Window average: needs about half the pilots hit.
    Avg,
}

impl FeedbackScheme {
    /// Hits needed for an accurate interference-channel estimate.
    pub fn threshold(self, n_p: u32) -> u32 {
        match self {
            FeedbackScheme::Min => 1,
            FeedbackScheme::Avg => n_p.div_ceil(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScsiAccuracy {
    pub scheme: FeedbackScheme,
    pub threshold_m: u32,
    pub p_accurate: f64,
}

pub fn scsi_accuracy(scn: &Scenario, scheme: FeedbackScheme) -> Result<ScsiAccuracy> {
    let threshold_m = scheme.threshold(scn.n_p());
    Ok(ScsiAccuracy {
        scheme,
        threshold_m,
        p_accurate: exact_probability(scn, threshold_m)?,
    })
}

/// Repetition intervals in `trep_range` (above `t_ofdm`) for which
/// window-averaged feedback never sees the interference channel.
pub fn blind_region(
    t_pil: f64,
    t_ofdm: f64,
    n_p: u32,
    trep_range: Interval,
) -> Result<IntervalSet> {
    if n_p < 2 {
        return Err(Error::InvalidArgument(format!(
            "blind region needs n_p >= 2 (got {n_p})"
        )));
    }
    let lo = trep_range.lo().max(t_ofdm);
    if lo >= trep_range.hi() {
        return Ok(IntervalSet::empty());
    }
    let window = Interval::new(lo, trep_range.hi())?;
    let m = FeedbackScheme::Avg.threshold(n_p);
    if m == 1 {
        // A single hit always has positive probability.
        return Ok(IntervalSet::empty());
    }
    let fs = feasible_set(m, n_p, t_pil, t_ofdm, window.lo(), window.hi())?;
    Ok(fs.set.complement_within(window))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;

    const T_OFDM: f64 = 71.43e-6;

    #[test]
    fn recommendation_examples() {
        let r = recommend_dmrs(5e-3, 2e-3, T_OFDM).unwrap();
        assert_eq!(r.k_opt, 3);
        assert!((r.t_dmrs - 5e-3 / 3.0).abs() < 1e-18);
        assert!((r.p_interference - 0.042858).abs() < 1e-12);
        assert!(r.coherence_ok);

        let r = recommend_dmrs(2e-3, 2e-3, T_OFDM).unwrap();
        assert_eq!((r.k_opt, r.t_dmrs), (1, 2e-3));

        let r = recommend_dmrs(2e-3, 0.5e-3, T_OFDM).unwrap();
        assert_eq!((r.k_opt, r.t_dmrs, r.coherence_ok), (4, 0.5e-3, true));
    }

    #[test]
    fn recommendation_errors() {
        assert!(recommend_dmrs(0.0, 1e-3, T_OFDM).is_err());
        assert!(recommend_dmrs(1e-3, -1.0, T_OFDM).is_err());
        assert!(recommend_dmrs(50e-6, 1e-3, T_OFDM).is_err());
    }

    #[test]
    fn accuracy_examples() {
        let s = ScenarioConfig::new(T_OFDM, 2e-3, 2, 2e-3)
            .validate()
            .unwrap();
        let a = scsi_accuracy(&s, FeedbackScheme::Avg).unwrap();
        assert_eq!(a.threshold_m, 1);
        assert!((a.p_accurate - T_OFDM / 2e-3).abs() < 1e-9);

        for k in 1..=5 {
            let s = ScenarioConfig::new(T_OFDM, 1e-3, 5, k as f64 * 1e-3)
                .validate()
                .unwrap();
            let a = scsi_accuracy(&s, FeedbackScheme::Min).unwrap();
            assert!((a.p_accurate - T_OFDM / 1e-3).abs() < 1e-9, "k = {k}");
        }

        let s = ScenarioConfig::new(T_OFDM, 1e-3, 5, 1.5e-3)
            .validate()
            .unwrap();
        let a = scsi_accuracy(&s, FeedbackScheme::Avg).unwrap();
        assert_eq!(a.threshold_m, 3);
        assert_eq!(a.p_accurate, 0.0);
    }

    #[test]
    fn blind_region_examples() {
        let range = Interval::new(2e-3, 3e-3).unwrap();
        assert!(blind_region(2e-3, T_OFDM, 2, range).unwrap().is_empty());

        let blind = blind_region(2e-3, T_OFDM, 32, range).unwrap();
        let seen = 2.0 * T_OFDM / 15.0 / 2.0;
        assert!((blind.measure() - (1e-3 - seen)).abs() < 1e-12);
        assert!(!blind.contains(2e-3 + 0.5 * seen));
        assert!(blind.contains(2.5e-3));

        let low = Interval::new(1e-6, T_OFDM).unwrap();
        assert!(blind_region(2e-3, T_OFDM, 2, low).unwrap().is_empty());
        assert!(blind_region(2e-3, T_OFDM, 1, range).is_err());
    }
}
