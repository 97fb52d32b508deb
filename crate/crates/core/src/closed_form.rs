//! Analytical bounds, closed-form special cases and the set of repetition
//! intervals for which multi-pilot interference is possible.

use serde::{Serialize, Serializer};

use crate::engine::check_m;
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet, TOL};
use crate::scenario::Scenario;

/// Relative tolerance when testing `t_rep = k * t_pil`.
pub const MULTIPLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

/// Bounds on `P[M >= 1]`.
///
/// The upper bound counts every path and uses the broadened hit width
/// `t_ofdm + t_pulse`; the lower bound is the pilot duty cycle of the bare
/// symbol, which broadening and echoes can only increase. Past the window
/// length only the first pulse can land, and the lower bound becomes
/// `n_p * t_ofdm / t_rep` (exact for the baseline model).
pub fn bounds_m1(scn: &Scenario) -> Bounds {
    let upper = upper_bound(scn, 1);
    if scn.t_rep() <= scn.t_csi() {
        Bounds {
            lower: (scn.t_ofdm() / scn.t_pil()).min(1.0),
            upper,
        }
    } else {
        Bounds {
            lower: (f64::from(scn.n_p()) * scn.t_ofdm() / scn.t_rep()).min(1.0),
            upper,
        }
    }
}

/// Bounds on `P[M >= m]` for `m >= 2`.
pub fn bounds_m(scn: &Scenario, m: u32) -> Result<Bounds> {
    check_m(scn, m)?;
    if m < 2 {
        return Err(Error::MOutOfRange {
            m,
            min: 2,
            max: scn.n_p(),
        });
    }
    Ok(Bounds {
        lower: 0.0,
        upper: upper_bound(scn, m),
    })
}

pub fn bounds(scn: &Scenario, m: u32) -> Result<Bounds> {
    check_m(scn, m)?;
    if m == 1 {
        Ok(bounds_m1(scn))
    } else {
        bounds_m(scn, m)
    }
}

// The pilots-per-m ratio is formed first so that scenarios sharing
// `n_p / m` produce bit-identical bounds.
fn upper_bound(scn: &Scenario, m: u32) -> f64 {
    let ratio = f64::from(scn.n_paths()) * f64::from(scn.n_p()) / f64::from(m);
    (ratio * (scn.t_ofdm() + scn.t_pulse()) / scn.t_rep()).min(1.0)
}

/// Which exact expression applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialCase {
    /// `t_rep <= t_ofdm`: every symbol is hit.
    Saturated,
    /// `t_rep = k * t_pil` with `1 <= k <= n_p`: the duty-cycle lower bound is
    /// attained.
    PilotMultiple,
    /// `t_rep >= t_csi`: at most one pulse falls in the window.
    SinglePulse,
}

impl SpecialCase {
    pub fn label(self) -> &'static str {
        match self {
            SpecialCase::Saturated => "saturated",
            SpecialCase::PilotMultiple => "pilot_multiple",
            SpecialCase::SinglePulse => "single_pulse",
        }
    }
}

impl Serialize for SpecialCase {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForm {
    pub value: f64,
    pub case: SpecialCase,
}

/// `Some(k)` when `t_rep` is an integer multiple `k * t_pil`, `1 <= k <= n_p`.
pub fn pilot_multiple(scn: &Scenario) -> Option<u32> {
    let ratio = scn.t_rep() / scn.t_pil();
    let k = ratio.round();
    let ok = k >= 1.0 && k <= f64::from(scn.n_p()) && (ratio - k).abs() <= MULTIPLE_TOL * k;
    ok.then_some(k as u32)
}

/// Closed-form `P[M >= m]` when one is known.
///
/// Outside saturation only `m = 1` has closed forms, and only for the
/// baseline model (no broadening, no echoes).
pub fn exact_special_case(scn: &Scenario, m: u32) -> Option<ClosedForm> {
    if scn.is_saturated() {
        return Some(ClosedForm {
            value: 1.0,
            case: SpecialCase::Saturated,
        });
    }
    if m != 1 || !scn.is_baseline() {
        return None;
    }
    if pilot_multiple(scn).is_some() && scn.t_rep() <= scn.t_csi() * (1.0 + MULTIPLE_TOL) {
        return Some(ClosedForm {
            value: scn.t_ofdm() / scn.t_pil(),
            case: SpecialCase::PilotMultiple,
        });
    }
    if scn.t_rep() >= scn.t_csi() {
        return Some(ClosedForm {
            value: f64::from(scn.n_p()) * scn.t_ofdm() / scn.t_rep(),
            case: SpecialCase::SinglePulse,
        });
    }
    None
}

/// Repetition intervals, inside a query range, for which at least `m` of
/// `n_p` pilots can be hit.
///
/// Pulses `q` periods apart advance `k` pilot spacings up to a drift of
/// `q*t_rep - k*t_pil` per step. Hitting `m` pilots spaced `k` apart needs the
/// drift to accumulate to less than one symbol over `m - 1` steps, i.e.
/// `|q*t_rep - k*t_pil| < t_ofdm / (m - 1)`, and needs `(m - 1) * k <= n_p - 1`
/// so that the progression fits in the window.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    pub m: u32,
    pub n_p: u32,
    pub t_pil: f64,
    pub t_ofdm: f64,
    pub trep_min: f64,
    pub trep_max: f64,
    pub set: IntervalSet,
    /// Largest divisor `q` enumerated. All larger divisors only produce
    /// intervals below `max(trep_min, t_ofdm)`.
    pub q_max: u32,
}

impl Serialize for FeasibleSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("FeasibleSet", 6)?;
        st.serialize_field("m", &self.m)?;
        st.serialize_field("n_p", &self.n_p)?;
        st.serialize_field("t_pil", &self.t_pil)?;
        st.serialize_field("t_ofdm", &self.t_ofdm)?;
        st.serialize_field("q_max", &self.q_max)?;
        st.serialize_field("intervals", &self.set)?;
        st.end()
    }
}

/// Largest pilot stride `k` that fits `m` hits into `n_p` pilots.
pub fn max_stride(m: u32, n_p: u32) -> u32 {
    (n_p - 1) / (m - 1)
}

pub fn feasible_set(
    m: u32,
    n_p: u32,
    t_pil: f64,
    t_ofdm: f64,
    trep_min: f64,
    trep_max: f64,
) -> Result<FeasibleSet> {
    if m < 2 {
        return Err(Error::MOutOfRange {
            m,
            min: 2,
            max: n_p,
        });
    }
    if n_p < 2 {
        return Err(Error::InvalidArgument(format!(
            "feasible set needs n_p > 1 (got {n_p})"
        )));
    }
    let finite_pos = |x: f64| x.is_finite() && x > 0.0;
    if !finite_pos(t_pil) || !finite_pos(t_ofdm) || t_pil < t_ofdm {
        return Err(Error::InvalidArgument(format!(
            "need 0 < t_ofdm <= t_pil (got t_ofdm={t_ofdm}, t_pil={t_pil})"
        )));
    }
    if !(trep_min.is_finite() && trep_max.is_finite() && trep_min < trep_max) {
        return Err(Error::InvalidArgument(format!(
            "empty query range [{trep_min}, {trep_max}]"
        )));
    }

    let k_max = max_stride(m, n_p);
    let half_width = t_ofdm / f64::from(m - 1);
    let floor = trep_min.max(t_ofdm);
    let clip_lo = trep_min.max(t_ofdm + TOL);

    let mut raw = Vec::new();
    let mut q_max = 0;
    if k_max >= 1 {
        let top = f64::from(k_max) * t_pil + half_width;
        // Smallest q whose widest interval already ends below the floor.
        q_max = (top / floor).floor() as u32 + 1;
        for q in 1..=q_max {
            let q = f64::from(q);
            for k in 1..=k_max {
                let centre = f64::from(k) * t_pil;
                let lo = ((centre - half_width) / q).max(clip_lo);
                let hi = ((centre + half_width) / q).min(trep_max);
                if hi > lo {
                    raw.push(Interval::from_ordered(lo, hi));
                }
            }
        }
    }

    Ok(FeasibleSet {
        m,
        n_p,
        t_pil,
        t_ofdm,
        trep_min,
        trep_max,
        set: IntervalSet::normalize(raw),
        q_max,
    })
}

/// Zero/non-zero prediction for one repetition interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub nonzero: bool,
    /// Within [`TOL`] of a feasible-set endpoint.
    pub boundary: bool,
}

impl FeasibleSet {
    /// Predicts `P[M >= m] > 0` at `t_rep`, which must lie in the query range.
    pub fn classify(&self, t_rep: f64) -> Verdict {
        if t_rep <= self.t_ofdm {
            return Verdict {
                nonzero: true,
                boundary: false,
            };
        }
        let boundary = self.set.near_endpoint(t_rep);
        Verdict {
            nonzero: !boundary && self.set.contains(t_rep),
            boundary,
        }
    }
}

/// Predicts whether `P[M >= m]` is non-zero at the scenario's `t_rep`.
///
/// Assumes the baseline pulse model; broadening and echoes are ignored.
pub fn classify_t_rep(scn: &Scenario, m: u32) -> Result<Verdict> {
    check_m(scn, m)?;
    if scn.is_saturated() || m == 1 {
        return Ok(Verdict {
            nonzero: true,
            boundary: false,
        });
    }
    let t_rep = scn.t_rep();
    let fs = feasible_set(
        m,
        scn.n_p(),
        scn.t_pil(),
        scn.t_ofdm(),
        0.5 * t_rep,
        2.0 * t_rep,
    )?;
    Ok(fs.classify(t_rep))
}

pub fn predict_nonzero(scn: &Scenario, m: u32) -> Result<bool> {
    classify_t_rep(scn, m).map(|v| v.nonzero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::exact_probability;
    use crate::scenario::ScenarioConfig;

    const T_OFDM: f64 = 71.43e-6;

    fn reference(t_rep: f64) -> Scenario {
        ScenarioConfig::new(T_OFDM, 1e-3, 5, t_rep)
            .validate()
            .unwrap()
    }

    fn pairs(s: &IntervalSet) -> Vec<(f64, f64)> {
        s.intervals().iter().map(|iv| (iv.lo(), iv.hi())).collect()
    }

    #[test]
    fn single_hit_bounds() {
        let b = bounds_m1(&reference(2.5e-3));
        assert!((b.lower - 0.07143).abs() < 1e-12);
        assert!((b.upper - 0.14286).abs() < 1e-12);

        let b = bounds_m1(&reference(10e-3));
        assert!((b.lower - 0.035715).abs() < 1e-12);
        assert!((b.upper - 0.035715).abs() < 1e-12);

        let sat = ScenarioConfig::new(1.0, 1.0, 1, 1.0).validate().unwrap();
        assert_eq!(
            bounds_m1(&sat),
            Bounds {
                lower: 1.0,
                upper: 1.0
            }
        );
    }

    #[test]
    fn multi_hit_bounds() {
        let b = bounds_m(&reference(1e-3), 2).unwrap();
        assert_eq!(b.lower, 0.0);
        assert!((b.upper - 0.178575).abs() < 1e-12);
        let b = bounds_m(&reference(1e-3), 5).unwrap();
        assert!((b.upper - 0.07143).abs() < 1e-12);

        let echo = ScenarioConfig::new(T_OFDM, 1e-3, 5, 1e-3)
            .with_echo_delays(vec![3e-6])
            .validate()
            .unwrap();
        assert!((bounds_m(&echo, 2).unwrap().upper - 0.35715).abs() < 1e-12);

        assert!(bounds_m(&reference(1e-3), 1).is_err());
        assert!(bounds_m(&reference(1e-3), 6).is_err());
    }

    #[test]
    fn special_cases() {
        let cf = exact_special_case(&reference(3e-3), 1).unwrap();
        assert_eq!(cf.case, SpecialCase::PilotMultiple);
        assert!((cf.value - 0.07143).abs() < 1e-12);

        let s = reference(7e-3);
        let cf = exact_special_case(&s, 1).unwrap();
        assert_eq!(cf.case, SpecialCase::SinglePulse);
        assert!((cf.value - 5.0 * T_OFDM / 7e-3).abs() < 1e-15);
        assert!((cf.value - exact_probability(&s, 1).unwrap()).abs() < 1e-9);

        assert!(exact_special_case(&reference(1.5e-3), 1).is_none());
        assert!(exact_special_case(&reference(3e-3), 2).is_none());

        let sat = exact_special_case(&reference(0.9 * T_OFDM), 4).unwrap();
        assert_eq!((sat.case, sat.value), (SpecialCase::Saturated, 1.0));

        let broadened = ScenarioConfig::new(T_OFDM, 1e-3, 5, 3e-3)
            .with_t_pulse(1e-6)
            .validate()
            .unwrap();
        assert!(exact_special_case(&broadened, 1).is_none());
    }

    #[test]
    fn special_case_json_label() {
        let cf = exact_special_case(&reference(7e-3), 1).unwrap();
        let v = serde_json::to_value(cf).unwrap();
        assert_eq!(v["case"], "single_pulse");
    }

    #[test]
    fn toy_feasible_set() {
        let fs = feasible_set(2, 2, 1.0, 0.5, 0.5, 2.0).unwrap();
        let got = pairs(&fs.set);
        assert_eq!(got.len(), 1);
        assert!((got[0].0 - 0.5).abs() < 1e-11 && (got[0].1 - 1.5).abs() < 1e-15);
        assert!(fs.q_max >= 3);
    }

    #[test]
    fn narrowest_spike_at_pilot_spacing() {
        let eps = 1e-4;
        let fs = feasible_set(5, 5, 1e-3, T_OFDM, 1e-3 - eps, 1e-3 + eps).unwrap();
        let (lo, hi) = (1e-3 - T_OFDM / 4.0, 1e-3 + T_OFDM / 4.0);
        let iv = fs
            .set
            .intervals()
            .iter()
            .find(|iv| iv.contains(1e-3))
            .unwrap();
        assert!((iv.lo() - lo).abs() < 1e-15 && (iv.hi() - hi).abs() < 1e-15);
    }

    #[test]
    fn empty_above_all_strides() {
        let t_pil = 1e-3;
        let fs = feasible_set(2, 5, t_pil, T_OFDM, 4.0 * t_pil + T_OFDM, 20e-3).unwrap();
        assert!(fs.set.is_empty());
    }

    #[test]
    fn feasible_set_errors() {
        assert!(feasible_set(1, 5, 1e-3, T_OFDM, 1e-4, 1e-2).is_err());
        assert!(feasible_set(2, 1, 1e-3, T_OFDM, 1e-4, 1e-2).is_err());
        assert!(feasible_set(2, 5, 1e-3, T_OFDM, 1e-2, 1e-2).is_err());
    }

    #[test]
    fn feasible_set_json_shape() {
        let fs = feasible_set(2, 2, 1.0, 0.5, 0.5, 2.0).unwrap();
        let v = serde_json::to_value(&fs).unwrap();
        let keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys.len(), 6);
        for key in ["m", "n_p", "t_pil", "t_ofdm", "q_max", "intervals"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert!(v["intervals"][0].as_array().unwrap().len() == 2);
    }

    #[test]
    fn predictions() {
        let toy = ScenarioConfig::new(0.5, 1.0, 2, 0.8).validate().unwrap();
        assert!(predict_nonzero(&toy, 2).unwrap());

        let s = reference(1.5e-3);
        assert!(!predict_nonzero(&s, 5).unwrap());
        assert_eq!(exact_probability(&s, 5).unwrap(), 0.0);

        let sat = reference(0.9 * T_OFDM);
        for m in 1..=5 {
            assert!(predict_nonzero(&sat, m).unwrap());
        }
        assert!(predict_nonzero(&reference(40e-3), 1).unwrap());
    }

    #[test]
    fn stride_limited_by_window() {
        // Pulses every two pilot spacings reach pilots 0, 2 and 4 only, so
        // four hits out of five pilots are impossible near t_rep = 2 t_pil.
        let s = reference(2e-3 + 1e-6);
        assert_eq!(exact_probability(&s, 4).unwrap(), 0.0);
        assert!(!predict_nonzero(&s, 4).unwrap());
        assert!(exact_probability(&s, 3).unwrap() > 0.0);
        assert!(predict_nonzero(&s, 3).unwrap());
    }
}
