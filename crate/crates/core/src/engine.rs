//! Exact interference probabilities by interval geometry.
//!
//! For a fixed first-pulse arrival `t_f`, pilot `l` is hit when some pulse of
//! some path overlaps it. The set of `t_f` that hit pilot `l` is a finite union
//! of hit windows; overlaying the per-pilot sets splits the arrival domain into
//! segments on which the number of distinct pilots hit is constant. Because
//! `t_f` is uniform on `[0, t_rep]`, `P[M >= m]` is the total length of the
//! segments with count `>= m`, divided by `t_rep`. No quadrature is involved.

use serde::Serialize;

use crate::closed_form::{self, Bounds, ClosedForm};
use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet, TOL};
use crate::scenario::{PilotIndex, Scenario};

/// Probabilities at or below this value are treated as zero.
pub const NONZERO_THRESHOLD: f64 = 1e-12;

/// Arrival offsets `t_f` (within the arrival domain) for which pilot `l` is
/// hit by at least one pulse of at least one path.
pub fn pilot_hit_set(scn: &Scenario, l: PilotIndex) -> IntervalSet {
    let domain = scn.toa_domain();
    let (t_rep, t_ofdm, t_pulse) = (scn.t_rep(), scn.t_ofdm(), scn.t_pulse());
    let mut windows = Vec::new();
    for delay in scn.path_delays() {
        let anchor = f64::from(l.get()) * scn.t_pil() - delay;
        let top = anchor + t_ofdm;
        if top < domain.lo() {
            continue;
        }
        // Pulses whose window can reach the domain, padded by one on each side
        // so rounding never loses a window; clipping discards the extras.
        let j_hi = (top / t_rep).floor() as u64 + 1;
        let j_lo = ((anchor - t_pulse - domain.hi()) / t_rep).ceil().max(0.0) as u64;
        for j in j_lo.saturating_sub(1)..=j_hi {
            windows.push(scn.hit_window(l, j, delay));
        }
    }
    IntervalSet::normalize(windows).clip(domain)
}

/// Piece of the arrival domain with a constant number of distinct pilots hit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub interval: Interval,
    pub count: u32,
}

/// Partition of the arrival domain into constant-count segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageProfile {
    domain: Interval,
    segments: Vec<Segment>,
}

impl CoverageProfile {
    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Length of the arrival offsets hitting at least `m` distinct pilots.
    pub fn measure_at_least(&self, m: u32) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.count >= m)
            .fold(0.0, |acc, s| acc + s.interval.width())
    }

    /// Number of distinct pilots hit at offset `t_f`, `None` outside the domain.
    pub fn count_at(&self, t_f: f64) -> Option<u32> {
        let idx = self.segments.partition_point(|s| s.interval.hi() < t_f);
        self.segments
            .get(idx)
            .filter(|s| s.interval.contains(t_f))
            .map(|s| s.count)
    }
}

/// Overlays the per-pilot hit sets with an endpoint sweep.
pub fn coverage_profile(scn: &Scenario) -> CoverageProfile {
    let domain = scn.toa_domain();
    if scn.is_saturated() {
        return CoverageProfile {
            domain,
            segments: vec![Segment {
                interval: domain,
                count: scn.n_p(),
            }],
        };
    }

    // Each per-pilot set is normalized, so entering/leaving events alternate
    // per pilot and the running sum is the number of distinct pilots hit.
    let mut events: Vec<(f64, i32)> = Vec::new();
    for l in scn.pilots() {
        for iv in pilot_hit_set(scn, l).intervals() {
            events.push((iv.lo(), 1));
            events.push((iv.hi(), -1));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut segments: Vec<Segment> = Vec::new();
    let mut push = |lo: f64, hi: f64, count: i32| {
        if hi - lo <= TOL {
            return;
        }
        let count = count as u32;
        match segments.last_mut() {
            Some(last) if last.count == count => {
                last.interval = Interval::from_ordered(last.interval.lo(), hi);
            }
            _ => segments.push(Segment {
                interval: Interval::from_ordered(lo, hi),
                count,
            }),
        }
    };

    let mut cursor = domain.lo();
    let mut active = 0i32;
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        push(cursor, x, active);
        // Coordinates within tolerance form one breakpoint.
        while i < events.len() && events[i].0 - x <= TOL {
            active += events[i].1;
            i += 1;
        }
        cursor = cursor.max(x);
    }
    push(cursor, domain.hi(), active);
    debug_assert_eq!(active, 0);

    // Keep the partition contiguous across dropped slivers.
    for k in 1..segments.len() {
        let prev_hi = segments[k - 1].interval.hi();
        let hi = segments[k].interval.hi();
        segments[k].interval = Interval::from_ordered(prev_hi, hi);
    }
    if let Some(first) = segments.first_mut() {
        first.interval = Interval::from_ordered(domain.lo(), first.interval.hi());
    }
    if let Some(last) = segments.last_mut() {
        last.interval = Interval::from_ordered(last.interval.lo(), domain.hi());
    }

    CoverageProfile { domain, segments }
}

pub(crate) fn check_m(scn: &Scenario, m: u32) -> Result<()> {
    if m == 0 || m > scn.n_p() {
        return Err(Error::MOutOfRange {
            m,
            min: 1,
            max: scn.n_p(),
        });
    }
    Ok(())
}

fn probability_from_profile(scn: &Scenario, profile: &CoverageProfile, m: u32) -> f64 {
    if scn.is_saturated() {
        return 1.0;
    }
    (profile.measure_at_least(m) / scn.t_rep()).clamp(0.0, 1.0)
}

/// Exact `P[M >= m]` without the surrounding report.
pub fn exact_probability(scn: &Scenario, m: u32) -> Result<f64> {
    check_m(scn, m)?;
    Ok(probability_from_profile(scn, &coverage_profile(scn), m))
}

/// Exact `P[M >= m]` for every `m = 1..=n_p`, from a single overlay.
pub fn exact_probabilities(scn: &Scenario) -> Vec<f64> {
    let profile = coverage_profile(scn);
    (1..=scn.n_p())
        .map(|m| probability_from_profile(scn, &profile, m))
        .collect()
}

/// Exact probability together with the analytical context for one `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityReport {
    pub m: u32,
    pub p_exact: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub closed_form: Option<ClosedForm>,
    pub predicted_nonzero: bool,
    /// `t_rep` sits on an endpoint of the feasible set; the prediction there
    /// depends on a measure-zero coincidence.
    pub prediction_boundary: bool,
}

pub fn prob_at_least(scn: &Scenario, m: u32) -> Result<ProbabilityReport> {
    check_m(scn, m)?;
    let p_exact = probability_from_profile(scn, &coverage_profile(scn), m);
    let Bounds { lower, upper } = closed_form::bounds(scn, m)?;
    let verdict = closed_form::classify_t_rep(scn, m)?;
    Ok(ProbabilityReport {
        m,
        p_exact,
        lower_bound: lower,
        upper_bound: upper,
        closed_form: closed_form::exact_special_case(scn, m),
        predicted_nonzero: verdict.nonzero,
        prediction_boundary: verdict.boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;

    fn scn(t_ofdm: f64, t_pil: f64, n_p: u32, t_rep: f64) -> Scenario {
        ScenarioConfig::new(t_ofdm, t_pil, n_p, t_rep)
            .validate()
            .unwrap()
    }

    fn pairs(s: &IntervalSet) -> Vec<(f64, f64)> {
        s.intervals().iter().map(|iv| (iv.lo(), iv.hi())).collect()
    }

    fn close(a: &[(f64, f64)], b: &[(f64, f64)]) -> bool {
        a.len() == b.len()
            && a.iter()
                .zip(b)
                .all(|(x, y)| (x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12)
    }

    /// Counts distinct pilots hit by brute force over pulses `j = 0..`.
    fn brute_count(s: &Scenario, t_f: f64) -> u32 {
        let mut n = 0;
        for l in 0..s.n_p() {
            let (a, b) = (l as f64 * s.t_pil(), l as f64 * s.t_pil() + s.t_ofdm());
            let hit = (0..10_000).any(|j| {
                let t = t_f + j as f64 * s.t_rep();
                t >= a && t <= b
            });
            n += hit as u32;
        }
        n
    }

    #[test]
    fn hit_sets_of_hand_scenario() {
        let s = scn(0.5, 1.0, 2, 0.8);
        let h0 = pilot_hit_set(&s, s.pilot_index(0).unwrap());
        let h1 = pilot_hit_set(&s, s.pilot_index(1).unwrap());
        assert!(close(&pairs(&h0), &[(0.0, 0.5)]));
        assert!(close(&pairs(&h1), &[(0.2, 0.7)]));
    }

    #[test]
    fn hit_sets_coincide_when_pri_equals_spacing() {
        let s = scn(0.5, 1.0, 4, 1.0);
        for l in s.pilots() {
            assert!(close(&pairs(&pilot_hit_set(&s, l)), &[(0.0, 0.5)]), "{l:?}");
        }
    }

    #[test]
    fn hand_profile() {
        let s = scn(0.5, 1.0, 2, 0.8);
        let p = coverage_profile(&s);
        let got: Vec<_> = p
            .segments()
            .iter()
            .map(|seg| (seg.interval.lo(), seg.interval.hi(), seg.count))
            .collect();
        let want = [(0.0, 0.2, 1), (0.2, 0.5, 2), (0.5, 0.7, 1), (0.7, 0.8, 0)];
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g.0 - w.0).abs() < 1e-12 && (g.1 - w.1).abs() < 1e-12 && g.2 == w.2);
        }
        // Grid oracle against brute-force pulse enumeration.
        for i in 0..800 {
            let t = (i as f64 + 0.5) * 1e-3;
            assert_eq!(p.count_at(t), Some(brute_count(&s, t)), "t_f = {t}");
        }
    }

    #[test]
    fn saturated_profile_is_single_segment() {
        let s = scn(1.0, 2.0, 3, 0.7);
        let p = coverage_profile(&s);
        assert_eq!(p.segments().len(), 1);
        assert_eq!(p.segments()[0].count, 3);
        for m in 1..=3 {
            assert_eq!(exact_probability(&s, m).unwrap(), 1.0);
        }
    }

    #[test]
    fn single_pilot_long_pri() {
        let s = scn(0.5, 1.0, 1, 3.0);
        let p = coverage_profile(&s);
        let got: Vec<_> = p
            .segments()
            .iter()
            .map(|seg| (seg.interval.lo(), seg.interval.hi(), seg.count))
            .collect();
        assert_eq!(got, vec![(0.0, 0.5, 1), (0.5, 1.0, 0)]);
        assert!((exact_probability(&s, 1).unwrap() - 0.5 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn hand_probabilities() {
        let s = scn(0.5, 1.0, 2, 0.8);
        assert!((exact_probability(&s, 1).unwrap() - 0.875).abs() < 1e-12);
        assert!((exact_probability(&s, 2).unwrap() - 0.375).abs() < 1e-12);
    }

    #[test]
    fn reference_numerology() {
        let s = scn(71.43e-6, 1e-3, 5, 1e-3);
        assert!((exact_probability(&s, 1).unwrap() - 0.07143).abs() < 1e-9);
        let s = scn(71.43e-6, 1e-3, 5, 10e-3);
        assert!((exact_probability(&s, 1).unwrap() - 0.035715).abs() < 1e-9);
    }

    #[test]
    fn m_out_of_range() {
        let s = scn(0.5, 1.0, 2, 0.8);
        assert!(matches!(
            prob_at_least(&s, 0),
            Err(Error::MOutOfRange { m: 0, .. })
        ));
        assert!(matches!(
            prob_at_least(&s, 3),
            Err(Error::MOutOfRange { m: 3, max: 2, .. })
        ));
    }

    #[test]
    fn report_fields() {
        let s = scn(0.5, 1.0, 2, 0.8);
        let r = prob_at_least(&s, 2).unwrap();
        assert!((r.p_exact - 0.375).abs() < 1e-12);
        assert_eq!(r.lower_bound, 0.0);
        assert!(r.upper_bound >= r.p_exact);
        assert!(r.predicted_nonzero);
        assert!(r.closed_form.is_none());
    }

    #[test]
    fn broadened_pulse_widens_hits() {
        let base = scn(0.5, 1.0, 2, 0.8);
        let wide = ScenarioConfig::new(0.5, 1.0, 2, 0.8)
            .with_t_pulse(0.1)
            .validate()
            .unwrap();
        let h1 = pilot_hit_set(&wide, wide.pilot_index(1).unwrap());
        assert!(close(&pairs(&h1), &[(0.1, 0.7)]));
        assert!(exact_probability(&wide, 1).unwrap() >= exact_probability(&base, 1).unwrap());
    }

    #[test]
    fn echo_hits_count_once_per_pilot() {
        // Echo at 0.3: pilot 0 gains [0, 0.2] (already covered), pilot 1 gains
        // [0, 0.4] and [0.7, 0.8].
        let s = ScenarioConfig::new(0.5, 1.0, 2, 0.8)
            .with_echo_delays(vec![0.3])
            .validate()
            .unwrap();
        let h0 = pilot_hit_set(&s, s.pilot_index(0).unwrap());
        let h1 = pilot_hit_set(&s, s.pilot_index(1).unwrap());
        assert!(close(&pairs(&h0), &[(0.0, 0.5)]));
        assert!(close(&pairs(&h1), &[(0.0, 0.8)]));
        assert!((exact_probability(&s, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((exact_probability(&s, 2).unwrap() - 0.625).abs() < 1e-12);
        assert!(coverage_profile(&s)
            .segments()
            .iter()
            .all(|seg| seg.count <= 2));
    }

    #[test]
    fn zero_probability_is_positive_zero() {
        let s = scn(71.43e-6, 1e-3, 5, 120.34e-6);
        let p = exact_probability(&s, 5).unwrap();
        assert_eq!(p.to_bits(), 0.0f64.to_bits());
        assert!(exact_probability(&s, 3).unwrap() > 0.78);
    }
}
