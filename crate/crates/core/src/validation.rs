//! Randomized self-check of the exact engine against its bounds, closed
//! forms, feasible-set predictions and the Monte Carlo oracle.
//!
//! Configurations are drawn from fixed ranges (seconds):
//!
//! * `t_ofdm` uniform in `[20e-6, 100e-6]`
//! * `t_pil = t_ofdm * u`, `u` uniform in `[1.5, 20]`
//! * `n_p` uniform in `1..=8`
//! * `t_rep` log-uniform in `(t_ofdm, 3 * t_csi]`; every tenth configuration
//!   is saturated instead, `t_rep = t_ofdm * u`, `u` uniform in `[0.05, 1]`
//! * one in four has `t_pulse` uniform in `[0, 0.1 * t_ofdm]`
//! * one in four has one or two echo delays uniform in `(0, t_pil)`

use std::collections::BTreeMap;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{self, feasible_set, pilot_multiple};
use crate::engine::{exact_probabilities, NONZERO_THRESHOLD};
use crate::error::Result;
use crate::montecarlo::{derive_seed, estimates_from_histogram, hit_histogram, McEstimate};
use crate::scenario::ScenarioConfig;

/// Absolute tolerance for bound and closed-form comparisons.
pub const EXACT_TOL: f64 = 1e-9;
/// Monte Carlo agreement threshold in standard errors.
pub const MC_SIGMAS: f64 = 4.0;
/// Feasible-set grid points per configuration and `m`.
pub const FEASIBLE_GRID: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Bounds,
    ClosedForm,
    Saturated,
    PilotMultiple,
    /// Predicted non-zero implies exact non-zero.
    FeasibleSound,
    /// Exact non-zero implies predicted non-zero.
    FeasibleComplete,
    MonteCarlo,
}

impl Check {
    pub const ALL: [Check; 7] = [
        Check::Bounds,
        Check::ClosedForm,
        Check::Saturated,
        Check::PilotMultiple,
        Check::FeasibleSound,
        Check::FeasibleComplete,
        Check::MonteCarlo,
    ];

    /// Whether a failure fails the run by default. Exact non-zero points
    /// outside the predicted support are reported but only gate under
    /// [`ValidationReport::passed_strict`]: the support is built from pilot
    /// hits in arithmetic progression, and for `m >= 3` other hit patterns
    /// occasionally realize `m` hits at short repetition intervals.
    pub fn gating(self) -> bool {
        self != Check::FeasibleComplete
    }

    pub fn name(self) -> &'static str {
        match self {
            Check::Bounds => "bounds",
            Check::ClosedForm => "closed_form",
            Check::Saturated => "saturated",
            Check::PilotMultiple => "pilot_multiple",
            Check::FeasibleSound => "feasible_sound",
            Check::FeasibleComplete => "feasible_complete",
            Check::MonteCarlo => "monte_carlo",
        }
    }
}

/// Outcome of one check on one configuration. `worst_margin` is tolerance
/// minus error at the worst evaluation (negative means failure); for Monte
/// Carlo it is in standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: Check,
    pub config_index: usize,
    pub config: ScenarioConfig,
    pub checked: u64,
    pub failed: u64,
    pub worst_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckSummary {
    pub check: Check,
    pub checked: u64,
    pub failed: u64,
    pub worst_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub n_configs: usize,
    pub mc_samples: u64,
    pub seed: u64,
    pub summary: Vec<CheckSummary>,
    pub records: Vec<CheckRecord>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.summary
            .iter()
            .all(|s| s.failed == 0 || !s.check.gating())
    }

    pub fn passed_strict(&self) -> bool {
        self.summary.iter().all(|s| s.failed == 0)
    }

    pub fn write_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(
            w,
            "check,config,t_ofdm,t_pil,n_p,t_rep,t_pulse,n_paths,checked,failed,worst_margin"
        )?;
        for r in &self.records {
            let c = &r.config;
            writeln!(
                w,
                "{},{},{:.9e},{:.9e},{},{:.9e},{:.9e},{},{},{},{}",
                r.check.name(),
                r.config_index,
                c.t_ofdm,
                c.t_pil,
                c.n_p,
                c.t_rep,
                c.t_pulse,
                1 + c.echo_delays.len(),
                r.checked,
                r.failed,
                r.worst_margin
                    .map(|m| format!("{m:.9e}"))
                    .unwrap_or_default(),
            )?;
        }
        Ok(())
    }

    pub fn write_summary(&self, w: &mut impl Write) -> io::Result<()> {
        for s in &self.summary {
            writeln!(
                w,
                "{:<18} {:>8} checked {:>6} failed  worst margin {}{}",
                s.check.name(),
                s.checked,
                s.failed,
                s.worst_margin
                    .map(|m| format!("{m:.3e}"))
                    .unwrap_or_else(|| "-".into()),
                if s.check.gating() {
                    ""
                } else {
                    "  (reported, gates only with --strict)"
                },
            )?;
        }
        Ok(())
    }
}

/// Draws configuration `index` of a validation run.
pub fn random_config(seed: u64, index: usize) -> ScenarioConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, index as u64));
    let t_ofdm = rng.random_range(20e-6..=100e-6);
    let t_pil = t_ofdm * rng.random_range(1.5..=20.0);
    let n_p = rng.random_range(1..=8u32);
    let t_csi = f64::from(n_p) * t_pil;
    let t_rep = if index % 10 == 9 {
        t_ofdm * rng.random_range(0.05..=1.0)
    } else {
        let (lo, hi) = (t_ofdm.ln(), (3.0 * t_csi).ln());
        // Open at the low end.
        let u: f64 = 1.0 - rng.random::<f64>();
        (lo + u * (hi - lo)).exp().max(t_ofdm * (1.0 + 1e-9))
    };
    let mut cfg = ScenarioConfig::new(t_ofdm, t_pil, n_p, t_rep);
    if rng.random_bool(0.25) {
        cfg.t_pulse = rng.random_range(0.0..=0.1 * t_ofdm);
    }
    if rng.random_bool(0.25) {
        let n = rng.random_range(1..=2usize);
        let mut d: Vec<f64> = (0..n).map(|_| rng.random_range(1e-9..t_pil)).collect();
        d.sort_by(f64::total_cmp);
        d.dedup();
        cfg.echo_delays = d;
    }
    cfg
}

/// `m` values compared against Monte Carlo: `{1, 2, ceil(n_p / 2)}`.
pub fn mc_m_values(n_p: u32) -> Vec<u32> {
    let mut ms: Vec<u32> = [1, 2, n_p.div_ceil(2)]
        .into_iter()
        .filter(|&m| m <= n_p)
        .collect();
    ms.sort_unstable();
    ms.dedup();
    ms
}

/// Monte Carlo agreement test. The standard error is floored at the binomial
/// standard error implied by the exact value, so an estimate of exactly 0 or 1
/// is not judged with zero spread.
pub fn mc_agrees(p_exact: f64, est: &McEstimate) -> (bool, f64) {
    let n = est.n_samples as f64;
    let sigma = est.stderr.max((p_exact * (1.0 - p_exact) / n).sqrt());
    let err = (p_exact - est.estimate).abs();
    if sigma == 0.0 {
        let ok = err <= EXACT_TOL;
        return (ok, if ok { MC_SIGMAS } else { f64::NEG_INFINITY });
    }
    let z = err / sigma;
    (z <= MC_SIGMAS, MC_SIGMAS - z)
}

#[derive(Default)]
struct Tally {
    checked: u64,
    failed: u64,
    worst: Option<f64>,
}

impl Tally {
    fn add(&mut self, ok: bool, margin: Option<f64>) {
        self.checked += 1;
        self.failed += u64::from(!ok);
        if let Some(m) = margin {
            self.worst = Some(self.worst.map_or(m, |w| w.min(m)));
        }
    }
}

fn check_config(
    index: usize,
    cfg: ScenarioConfig,
    mc_samples: u64,
    seed: u64,
) -> Result<Vec<CheckRecord>> {
    let scn = cfg.clone().validate()?;
    let n_p = scn.n_p();
    let probs = exact_probabilities(&scn);
    let mut tallies: BTreeMap<Check, Tally> = BTreeMap::new();

    for m in 1..=n_p {
        let p = probs[m as usize - 1];
        let b = closed_form::bounds(&scn, m)?;
        let margin = (p - b.lower).min(b.upper - p) + EXACT_TOL;
        tallies
            .entry(Check::Bounds)
            .or_default()
            .add(margin >= 0.0, Some(margin));

        if let Some(cf) = closed_form::exact_special_case(&scn, m) {
            let margin = EXACT_TOL - (cf.value - p).abs();
            tallies
                .entry(Check::ClosedForm)
                .or_default()
                .add(margin >= 0.0, Some(margin));
        }
        if scn.is_saturated() {
            tallies
                .entry(Check::Saturated)
                .or_default()
                .add(p == 1.0, Some(EXACT_TOL - (1.0 - p)));
        }
    }

    if scn.is_baseline() {
        for k in 1..=n_p {
            let t_rep = f64::from(k) * scn.t_pil();
            if t_rep <= scn.t_ofdm() {
                continue;
            }
            let probe = ScenarioConfig {
                t_rep,
                ..cfg.clone()
            }
            .validate()?;
            debug_assert_eq!(pilot_multiple(&probe), Some(k));
            let p = exact_probabilities(&probe)[0];
            let margin = EXACT_TOL - (p - scn.t_ofdm() / scn.t_pil()).abs();
            tallies
                .entry(Check::PilotMultiple)
                .or_default()
                .add(margin >= 0.0, Some(margin));
        }

        let (lo, hi) = (scn.t_ofdm(), 3.0 * scn.t_csi());
        let step = (hi - lo) / FEASIBLE_GRID as f64;
        for m in 2..=n_p {
            let fs = feasible_set(m, n_p, scn.t_pil(), scn.t_ofdm(), lo, hi)?;
            for i in 0..FEASIBLE_GRID {
                let t_rep = lo + (i as f64 + 0.5) * step;
                let verdict = fs.classify(t_rep);
                if verdict.boundary {
                    continue;
                }
                let probe = ScenarioConfig {
                    t_rep,
                    ..cfg.clone()
                }
                .validate()?;
                let nonzero = exact_probabilities(&probe)[m as usize - 1] > NONZERO_THRESHOLD;
                if verdict.nonzero {
                    tallies
                        .entry(Check::FeasibleSound)
                        .or_default()
                        .add(nonzero, None);
                } else {
                    tallies
                        .entry(Check::FeasibleComplete)
                        .or_default()
                        .add(!nonzero, None);
                }
            }
        }
    }

    if mc_samples > 0 {
        let run = |s: u64| -> Result<Vec<McEstimate>> {
            Ok(estimates_from_histogram(&hit_histogram(
                &scn, mc_samples, s,
            )?))
        };
        let first = run(derive_seed(seed, 2 * index as u64))?;
        let mut retry: Option<Vec<McEstimate>> = None;
        for m in mc_m_values(n_p) {
            let p = probs[m as usize - 1];
            let (mut ok, mut margin) = mc_agrees(p, &first[m as usize - 1]);
            if !ok {
                // Excursions beyond 4 sigma happen; a fresh seed must agree.
                if retry.is_none() {
                    retry = Some(run(derive_seed(seed, 2 * index as u64 + 1))?);
                }
                let est = &retry.as_ref().expect("retry computed")[m as usize - 1];
                (ok, margin) = mc_agrees(p, est);
            }
            tallies
                .entry(Check::MonteCarlo)
                .or_default()
                .add(ok, Some(margin));
        }
    }

    Ok(tallies
        .into_iter()
        .map(|(check, t)| CheckRecord {
            check,
            config_index: index,
            config: cfg.clone(),
            checked: t.checked,
            failed: t.failed,
            worst_margin: t.worst,
        })
        .collect())
}

pub fn run_validation(n_configs: usize, mc_samples: u64, seed: u64) -> Result<ValidationReport> {
    let per_config = (0..n_configs)
        .into_par_iter()
        .map(|i| check_config(i, random_config(seed, i), mc_samples, seed))
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<CheckRecord> = per_config.into_iter().flatten().collect();

    let summary = Check::ALL
        .iter()
        .map(|&check| {
            let mut s = CheckSummary {
                check,
                checked: 0,
                failed: 0,
                worst_margin: None,
            };
            for r in records.iter().filter(|r| r.check == check) {
                s.checked += r.checked;
                s.failed += r.failed;
                if let Some(m) = r.worst_margin {
                    s.worst_margin = Some(s.worst_margin.map_or(m, |w: f64| w.min(m)));
                }
            }
            s
        })
        .collect();

    Ok(ValidationReport {
        n_configs,
        mc_samples,
        seed,
        summary,
        records,
    })
}

/// Validates an explicit scenario list with the same checks.
pub fn validate_scenarios(
    configs: &[ScenarioConfig],
    mc_samples: u64,
    seed: u64,
) -> Result<Vec<CheckRecord>> {
    let per = configs
        .par_iter()
        .enumerate()
        .map(|(i, c)| check_config(i, c.clone(), mc_samples, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(per.into_iter().flatten().collect())
}
