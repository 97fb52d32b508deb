//! Parameter sweeps and the figure presets, emitted as long-format CSV.
//!
//! CSV layout is fixed: the header in [`CSV_HEADER`], one row per grid point
//! and `m`, reals formatted with `{:.9e}`, booleans as `true`/`false`, absent
//! values as empty fields. Lines starting with `#` are metadata.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{self, Verdict};
use crate::engine::exact_probabilities;
use crate::error::{Error, Result};
use crate::montecarlo::{
    derive_seed, estimates_from_histogram, hit_histogram, McEstimate, MC_ALGORITHM,
};
use crate::scenario::{Scenario, ScenarioConfig};

/// OFDM symbol duration used by the presets, seconds.
pub const PRESET_T_OFDM: f64 = 71.43e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    TRep,
    TCsi,
    M,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::TRep => "t_rep",
            SweepAxis::TCsi => "t_csi",
            SweepAxis::M => "m",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: ScenarioConfig,
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    /// Number of grid cells. Ignored for the `m` and `t_csi` axes, which step
    /// through integers.
    pub count: usize,
    /// Sample cell midpoints instead of cell edges, keeping grid points off
    /// exact multiples of the pilot spacing.
    pub half_step: bool,
    /// Values of `m` evaluated at each point; empty means `1..=n_p`.
    pub m_list: Vec<u32>,
    pub with_mc: bool,
    pub mc_samples: u64,
    pub seed: u64,
    /// Free-form label copied into the `series` column.
    pub series: String,
}

impl SweepSpec {
    pub fn new(base: ScenarioConfig, axis: SweepAxis, start: f64, stop: f64, count: usize) -> Self {
        Self {
            base,
            axis,
            start,
            stop,
            count,
            half_step: true,
            m_list: Vec::new(),
            with_mc: false,
            mc_samples: 100_000,
            seed: 0,
            series: String::new(),
        }
    }

    /// Cell count for a given step size.
    pub fn count_for_step(start: f64, stop: f64, step: f64) -> Result<usize> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "step must be > 0 (got {step})"
            )));
        }
        Ok(((stop - start) / step).round().max(1.0) as usize)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return bad(format!(
                "start ({}) must be < stop ({})",
                self.start, self.stop
            ));
        }
        if self.axis == SweepAxis::TRep && self.count == 0 {
            return bad("count must be >= 1".into());
        }
        if self.m_list.contains(&0) {
            return bad("m_list entries must be >= 1".into());
        }
        if self.with_mc && self.mc_samples == 0 {
            return bad("mc_samples must be >= 1".into());
        }
        Ok(())
    }

    fn grid(&self) -> Result<Vec<f64>> {
        match self.axis {
            SweepAxis::TRep => {
                let h = (self.stop - self.start) / self.count as f64;
                Ok(if self.half_step {
                    (0..self.count)
                        .map(|i| self.start + (i as f64 + 0.5) * h)
                        .collect()
                } else {
                    (0..=self.count)
                        .map(|i| self.start + i as f64 * h)
                        .collect()
                })
            }
            SweepAxis::TCsi => {
                let t_pil = self.base.t_pil;
                let first = ((self.start / t_pil) - 1e-9).ceil().max(1.0) as u32;
                let last = ((self.stop / t_pil) + 1e-9).floor() as u32;
                if last < first {
                    return Err(Error::InvalidArgument(format!(
                        "no whole number of pilots fits t_csi in [{}, {}]",
                        self.start, self.stop
                    )));
                }
                Ok((first..=last).map(|n| f64::from(n) * t_pil).collect())
            }
            SweepAxis::M => {
                let first = self.start.ceil().max(1.0) as u32;
                let last = self.stop.floor() as u32;
                Ok((first..=last).map(f64::from).collect())
            }
        }
    }

    fn point(&self, value: f64) -> Result<(Scenario, Vec<u32>)> {
        let mut cfg = self.base.clone();
        match self.axis {
            SweepAxis::TRep => cfg.t_rep = value,
            SweepAxis::TCsi => cfg.n_p = (value / cfg.t_pil).round() as u32,
            SweepAxis::M => {}
        }
        let scn = cfg.validate()?;
        let ms = match self.axis {
            SweepAxis::M => vec![value as u32],
            _ if self.m_list.is_empty() => (1..=scn.n_p()).collect(),
            _ => self.m_list.clone(),
        };
        if let Some(&bad) = ms.iter().find(|&&m| m > scn.n_p()) {
            return Err(Error::MOutOfRange {
                m: bad,
                min: 1,
                max: scn.n_p(),
            });
        }
        Ok((scn, ms))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub series: String,
    pub axis: SweepAxis,
    pub axis_value: f64,
    pub t_ofdm: f64,
    pub t_pil: f64,
    pub n_p: u32,
    pub t_csi: f64,
    pub t_rep: f64,
    pub t_pulse: f64,
    pub n_paths: u32,
    pub m: u32,
    pub p_exact: f64,
    pub lower: f64,
    pub upper: f64,
    pub closed_form: Option<f64>,
    pub closed_form_case: Option<&'static str>,
    pub predicted_nonzero: bool,
    pub prediction_boundary: bool,
    pub mc: Option<McEstimate>,
}

pub const CSV_HEADER: &str =
    "series,axis,axis_value,t_ofdm,t_pil,n_p,t_csi,t_rep,t_pulse,n_paths,m,\
p_exact,lower,upper,closed_form,closed_form_case,predicted_nonzero,prediction_boundary,\
mc_estimate,mc_stderr";

fn sci(x: f64) -> String {
    format!("{x:.9e}")
}

fn opt_sci(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        [
            self.series.clone(),
            self.axis.name().to_string(),
            sci(self.axis_value),
            sci(self.t_ofdm),
            sci(self.t_pil),
            self.n_p.to_string(),
            sci(self.t_csi),
            sci(self.t_rep),
            sci(self.t_pulse),
            self.n_paths.to_string(),
            self.m.to_string(),
            sci(self.p_exact),
            sci(self.lower),
            sci(self.upper),
            opt_sci(self.closed_form),
            self.closed_form_case.unwrap_or_default().to_string(),
            self.predicted_nonzero.to_string(),
            self.prediction_boundary.to_string(),
            opt_sci(self.mc.map(|e| e.estimate)),
            opt_sci(self.mc.map(|e| e.stderr)),
        ]
        .join(",")
    }
}

fn verdict(scn: &Scenario, m: u32) -> Result<Verdict> {
    closed_form::classify_t_rep(scn, m)
}

/// All rows for one scenario.
pub fn evaluate_point(
    scn: &Scenario,
    ms: &[u32],
    mc: Option<(u64, u64)>,
    series: &str,
    axis: SweepAxis,
    axis_value: f64,
) -> Result<Vec<SweepRow>> {
    let probs = exact_probabilities(scn);
    let mc = match mc {
        Some((n, seed)) => Some(estimates_from_histogram(&hit_histogram(scn, n, seed)?)),
        None => None,
    };
    ms.iter()
        .map(|&m| {
            let b = closed_form::bounds(scn, m)?;
            let cf = closed_form::exact_special_case(scn, m);
            let v = verdict(scn, m)?;
            Ok(SweepRow {
                series: series.to_string(),
                axis,
                axis_value,
                t_ofdm: scn.t_ofdm(),
                t_pil: scn.t_pil(),
                n_p: scn.n_p(),
                t_csi: scn.t_csi(),
                t_rep: scn.t_rep(),
                t_pulse: scn.t_pulse(),
                n_paths: scn.n_paths(),
                m,
                p_exact: probs[m as usize - 1],
                lower: b.lower,
                upper: b.upper,
                closed_form: cf.map(|c| c.value),
                closed_form_case: cf.map(|c| c.case.label()),
                predicted_nonzero: v.nonzero,
                prediction_boundary: v.boundary,
                mc: mc.as_ref().map(|e| e[m as usize - 1]),
            })
        })
        .collect()
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let grid = spec.grid()?;
    let per_point = grid
        .par_iter()
        .enumerate()
        .map(|(i, &value)| {
            let (scn, ms) = spec.point(value)?;
            let mc = spec
                .with_mc
                .then(|| (spec.mc_samples, derive_seed(spec.seed, i as u64)));
            evaluate_point(&scn, &ms, mc, &spec.series, spec.axis, value)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_point.into_iter().flatten().collect())
}

/// Options shared by the figure presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PresetOptions {
    pub with_mc: bool,
    pub mc_samples: u64,
    pub seed: u64,
}

impl Default for PresetOptions {
    fn default() -> Self {
        Self {
            with_mc: false,
            mc_samples: 100_000,
            seed: 0,
        }
    }
}

fn apply(mut spec: SweepSpec, opts: PresetOptions) -> SweepSpec {
    spec.with_mc = opts.with_mc;
    spec.mc_samples = opts.mc_samples;
    spec.seed = opts.seed;
    spec
}

/// Single-hit probability and bounds against `t_rep` for several pilot
/// counts in a 5 ms window. The grid includes exact multiples of each pilot
/// spacing, where the lower bound is attained.
pub fn preset_fig3a(opts: PresetOptions) -> Result<Vec<SweepRow>> {
    let t_csi = 5e-3;
    let mut rows = Vec::new();
    for n_p in [1u32, 2, 5, 10] {
        let base = ScenarioConfig::new(PRESET_T_OFDM, t_csi / f64::from(n_p), n_p, t_csi);
        let mut spec = SweepSpec::new(base, SweepAxis::TRep, 0.1e-3, 15e-3, 1490);
        spec.half_step = false;
        spec.m_list = vec![1];
        spec.series = format!("n_p={n_p}");
        rows.extend(run_sweep(&apply(spec, opts))?);
    }
    Ok(rows)
}

/// `P[M >= m]` for `m = 1..=5` against `t_rep`, five pilots 1 ms apart.
pub fn preset_fig3b(opts: PresetOptions) -> Result<Vec<SweepRow>> {
    let base = ScenarioConfig::new(PRESET_T_OFDM, 1e-3, 5, 1e-3);
    let mut spec = SweepSpec::new(base, SweepAxis::TRep, PRESET_T_OFDM, 6e-3, 10_000);
    spec.series = "n_p=5".into();
    run_sweep(&apply(spec, opts))
}

/// Window lengths of the 2 ms pilot-spacing preset, seconds.
pub const FIG4_T_CSI: [f64; 5] = [4e-3, 8e-3, 16e-3, 32e-3, 64e-3];

/// Half-window hit probability against `t_rep` in `[2, 3]` ms for pilots
/// 2 ms apart and growing estimation windows.
pub fn preset_fig4(opts: PresetOptions) -> Result<Vec<SweepRow>> {
    preset_fig4_with(opts, 2000)
}

pub fn preset_fig4_with(opts: PresetOptions, count: usize) -> Result<Vec<SweepRow>> {
    let t_pil = 2e-3;
    let mut rows = Vec::new();
    for t_csi in FIG4_T_CSI {
        let n_p = (t_csi / t_pil).round() as u32;
        let base = ScenarioConfig::new(PRESET_T_OFDM, t_pil, n_p, t_pil);
        let mut spec = SweepSpec::new(base, SweepAxis::TRep, 2e-3, 3e-3, count);
        spec.m_list = vec![n_p.div_ceil(2)];
        spec.series = format!("t_csi={t_csi}");
        rows.extend(run_sweep(&apply(spec, opts))?);
    }
    Ok(rows)
}

/// Metadata written ahead of the CSV header.
#[derive(Debug, Clone, Default)]
pub struct CsvPreamble {
    pub lines: Vec<String>,
    /// Adds a `# generated_unix=` line; disable for byte-stable output.
    pub timestamp: bool,
}

impl CsvPreamble {
    pub fn for_run(command: &str, mc_seed: Option<u64>, timestamp: bool) -> Self {
        let mut lines = vec![format!("pilotint {} {command}", env!("CARGO_PKG_VERSION"))];
        if let Some(seed) = mc_seed {
            lines.push(format!("mc_rng={MC_ALGORITHM} seed={seed}"));
        }
        Self { lines, timestamp }
    }

    pub fn write(&self, w: &mut impl Write) -> io::Result<()> {
        for line in &self.lines {
            writeln!(w, "# {line}")?;
        }
        if self.timestamp {
            let secs = std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            writeln!(w, "# generated_unix={secs}")?;
        }
        Ok(())
    }
}

pub fn write_csv(rows: &[SweepRow], preamble: &CsvPreamble, w: &mut impl Write) -> io::Result<()> {
    preamble.write(w)?;
    writeln!(w, "{CSV_HEADER}")?;
    for row in rows {
        writeln!(w, "{}", row.to_csv())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_spec() -> SweepSpec {
        let base = ScenarioConfig::new(0.5, 1.0, 2, 0.8);
        SweepSpec::new(base, SweepAxis::TRep, 0.6, 2.6, 20)
    }

    #[test]
    fn half_step_grid_avoids_edges() {
        let spec = toy_spec();
        let g = spec.grid().unwrap();
        assert_eq!(g.len(), 20);
        assert!((g[0] - 0.65).abs() < 1e-12);
        assert!(g.iter().all(|&t| ((t / 0.1).round() - t / 0.1).abs() > 0.4));

        let mut edges = toy_spec();
        edges.half_step = false;
        let g = edges.grid().unwrap();
        assert_eq!(g.len(), 21);
        assert!((g[4] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rows_cover_grid_and_all_m() {
        let rows = run_sweep(&toy_spec()).unwrap();
        assert_eq!(rows.len(), 40);
        for r in &rows {
            assert!(r.lower <= r.p_exact + 1e-9 && r.p_exact <= r.upper + 1e-9);
        }
    }

    #[test]
    fn t_csi_axis_steps_whole_pilots() {
        let mut spec = toy_spec();
        spec.axis = SweepAxis::TCsi;
        spec.start = 1.0;
        spec.stop = 4.0;
        spec.m_list = vec![1];
        let rows = run_sweep(&spec).unwrap();
        let n: Vec<u32> = rows.iter().map(|r| r.n_p).collect();
        assert_eq!(n, vec![1, 2, 3, 4]);
    }

    #[test]
    fn m_axis() {
        let mut spec = toy_spec();
        spec.axis = SweepAxis::M;
        spec.start = 1.0;
        spec.stop = 2.0;
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.iter().map(|r| r.m).collect::<Vec<_>>(), vec![1, 2]);
        assert!((rows[1].p_exact - 0.375).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs_are_named() {
        let mut spec = toy_spec();
        spec.stop = spec.start;
        assert!(matches!(run_sweep(&spec), Err(Error::InvalidArgument(m)) if m.contains("start")));

        let mut spec = toy_spec();
        spec.m_list = vec![3];
        assert!(matches!(
            run_sweep(&spec),
            Err(Error::MOutOfRange { m: 3, .. })
        ));

        let mut spec = toy_spec();
        spec.count = 0;
        assert!(run_sweep(&spec).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut spec = toy_spec();
        spec.count = 1;
        spec.m_list = vec![2];
        let rows = run_sweep(&spec).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &CsvPreamble::default(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row = lines.next().unwrap();
        let fields: Vec<_> = row.split(',').collect();
        assert_eq!(fields.len(), CSV_HEADER.split(',').count());
        assert_eq!(fields[1], "t_rep");
        assert_eq!(fields[2], "1.600000000e0");
        assert_eq!(fields[18], "");
    }

    #[test]
    fn mc_columns_filled_when_requested() {
        let mut spec = toy_spec();
        spec.count = 2;
        spec.with_mc = true;
        spec.mc_samples = 10_000;
        spec.seed = 3;
        let rows = run_sweep(&spec).unwrap();
        assert!(rows.iter().all(|r| r.mc.is_some()));
        assert_eq!(rows, run_sweep(&spec).unwrap());
    }
}
