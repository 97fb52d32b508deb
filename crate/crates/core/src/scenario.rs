//! Coexistence scenario: pilot grid plus periodic radar pulse train.
//!
//! Pilot `l` occupies `[l * t_pil, l * t_pil + t_ofdm]` for `l = 0..n_p`.
//! The radar emits pulses at `t_f + j * t_rep` for `j = 0, 1, 2, ...`, where
//! `t_f` is the arrival time of the first pulse in the estimation window
//! `[0, n_p * t_pil]`. Each pulse may be broadened to width `t_pulse` and
//! repeated by specular echoes at fixed extra delays.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Raw scenario parameters, all durations in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub t_ofdm: f64,
    pub t_pil: f64,
    pub n_p: u32,
    pub t_rep: f64,
    #[serde(default)]
    pub t_pulse: f64,
    #[serde(default)]
    pub echo_delays: Vec<f64>,
}

impl ScenarioConfig {
    /// Baseline scenario: impulsive pulses, no echoes.
    pub fn new(t_ofdm: f64, t_pil: f64, n_p: u32, t_rep: f64) -> Self {
        Self {
            t_ofdm,
            t_pil,
            n_p,
            t_rep,
            t_pulse: 0.0,
            echo_delays: Vec::new(),
        }
    }

    pub fn with_t_pulse(mut self, t_pulse: f64) -> Self {
        self.t_pulse = t_pulse;
        self
    }

    pub fn with_echo_delays(mut self, delays: Vec<f64>) -> Self {
        self.echo_delays = delays;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(format!("bad JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization is infallible")
    }

    pub fn validate(self) -> Result<Scenario> {
        Scenario::new(self)
    }
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidConfig(msg()))
    }
}

/// A validated scenario with derived window quantities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    #[serde(flatten)]
    config: ScenarioConfig,
    t_csi: f64,
    n_r: u64,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let c = &config;
        check(c.t_ofdm.is_finite() && c.t_ofdm > 0.0, || {
            format!("t_ofdm must be finite and > 0 (got {})", c.t_ofdm)
        })?;
        check(c.t_pil.is_finite() && c.t_pil >= c.t_ofdm, || {
            format!(
                "t_pil ({}) must be finite and >= t_ofdm ({})",
                c.t_pil, c.t_ofdm
            )
        })?;
        check(c.n_p >= 1, || "n_p must be >= 1".to_string())?;
        check(c.t_rep.is_finite() && c.t_rep > 0.0, || {
            format!("t_rep must be finite and > 0 (got {})", c.t_rep)
        })?;
        check(c.t_pulse.is_finite() && c.t_pulse >= 0.0, || {
            format!("t_pulse must be finite and >= 0 (got {})", c.t_pulse)
        })?;
        for (i, &d) in c.echo_delays.iter().enumerate() {
            check(d.is_finite() && d >= 0.0, || {
                format!("echo_delays[{i}] must be finite and >= 0 (got {d})")
            })?;
            if i > 0 {
                let prev = c.echo_delays[i - 1];
                check(d > prev, || {
                    format!("echo_delays must be strictly increasing ({prev} then {d})")
                })?;
            }
        }

        let ratio = c.t_pil / c.t_ofdm;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio {
            log::warn!(
                "t_pil ({}) is not an integer multiple of t_ofdm ({})",
                c.t_pil,
                c.t_ofdm
            );
        }

        let t_csi = f64::from(c.n_p) * c.t_pil;
        let n_r = (t_csi / c.t_rep).ceil() as u64;
        Ok(Self { config, t_csi, n_r })
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn into_config(self) -> ScenarioConfig {
        self.config
    }

    pub fn t_ofdm(&self) -> f64 {
        self.config.t_ofdm
    }

    pub fn t_pil(&self) -> f64 {
        self.config.t_pil
    }

    pub fn n_p(&self) -> u32 {
        self.config.n_p
    }

    pub fn t_rep(&self) -> f64 {
        self.config.t_rep
    }

    pub fn t_pulse(&self) -> f64 {
        self.config.t_pulse
    }

    pub fn echo_delays(&self) -> &[f64] {
        &self.config.echo_delays
    }

    /// Estimation window length `n_p * t_pil`.
    pub fn t_csi(&self) -> f64 {
        self.t_csi
    }

    /// Maximum number of pulses in the window, `ceil(t_csi / t_rep)`.
    pub fn n_r(&self) -> u64 {
        self.n_r
    }

    /// Number of propagation paths: the direct path plus each echo.
    pub fn n_paths(&self) -> u32 {
        1 + self.config.echo_delays.len() as u32
    }

    /// Path delays including the implicit zero-delay direct path.
    pub fn path_delays(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(0.0).chain(self.config.echo_delays.iter().copied())
    }

    /// No pulse broadening and no echoes.
    pub fn is_baseline(&self) -> bool {
        self.config.t_pulse == 0.0 && self.config.echo_delays.is_empty()
    }

    /// Every OFDM symbol is hit regardless of the arrival offset.
    pub fn is_saturated(&self) -> bool {
        self.config.t_rep <= self.config.t_ofdm
    }

    /// Range of first-pulse arrival times that can produce a hit,
    /// `[0, min(t_rep, t_csi)]`.
    pub fn toa_domain(&self) -> Interval {
        Interval::from_ordered(0.0, self.config.t_rep.min(self.t_csi))
    }

    pub fn pilot_index(&self, l: u32) -> Result<PilotIndex> {
        if l < self.config.n_p {
            Ok(PilotIndex(l))
        } else {
            Err(Error::PilotIndexOutOfRange {
                index: l,
                n_p: self.config.n_p,
            })
        }
    }

    pub fn pilots(&self) -> impl Iterator<Item = PilotIndex> {
        (0..self.config.n_p).map(PilotIndex)
    }

    pub fn pilot_interval(&self, l: PilotIndex) -> Interval {
        let start = f64::from(l.0) * self.config.t_pil;
        Interval::from_ordered(start, start + self.config.t_ofdm)
    }

    /// First-pulse arrival times `t_f` for which pulse `j` of the path with
    /// extra delay `echo_delay` overlaps pilot `l`.
    ///
    /// A pulse occupying `[s, s + t_pulse]` overlaps the pilot iff
    /// `l*t_pil - t_pulse <= s <= l*t_pil + t_ofdm`, with
    /// `s = t_f + j*t_rep + echo_delay`.
    pub fn hit_window(&self, l: PilotIndex, j: u64, echo_delay: f64) -> Interval {
        let c = &self.config;
        let base = f64::from(l.0) * c.t_pil - j as f64 * c.t_rep - echo_delay;
        Interval::from_ordered(base - c.t_pulse, base + c.t_ofdm)
    }
}

/// Index of a pilot inside the estimation window, `0..n_p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PilotIndex(u32);

impl PilotIndex {
    pub fn get(self) -> u32 {
        self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Scenario {
        ScenarioConfig::new(0.5, 1.0, 2, 0.8).validate().unwrap()
    }

    #[test]
    fn derived_window_quantities() {
        let s = ScenarioConfig::new(71.43e-6, 1e-3, 5, 2e-3)
            .validate()
            .unwrap();
        assert!((s.t_csi() - 5e-3).abs() < 1e-18);
        assert_eq!(s.n_r(), 3);

        let s = toy();
        assert_eq!(s.t_csi(), 2.0);
        assert_eq!(s.n_r(), 3);
    }

    #[test]
    fn rejects_each_field_invariant() {
        let cases = [
            (ScenarioConfig::new(1.0, 0.5, 2, 1.0), "t_pil"),
            (ScenarioConfig::new(0.0, 1.0, 2, 1.0), "t_ofdm"),
            (ScenarioConfig::new(0.5, 1.0, 0, 1.0), "n_p"),
            (ScenarioConfig::new(0.5, 1.0, 2, -1.0), "t_rep"),
            (
                ScenarioConfig::new(0.5, 1.0, 2, 1.0).with_t_pulse(-0.1),
                "t_pulse",
            ),
            (
                ScenarioConfig::new(0.5, 1.0, 2, 1.0).with_echo_delays(vec![0.2, 0.1]),
                "strictly increasing",
            ),
            (
                ScenarioConfig::new(0.5, 1.0, 2, 1.0).with_echo_delays(vec![-0.2]),
                "echo_delays[0]",
            ),
        ];
        for (cfg, needle) in cases {
            match cfg.validate() {
                Err(Error::InvalidConfig(msg)) => assert!(msg.contains(needle), "{msg}"),
                other => panic!("expected error naming {needle}, got {other:?}"),
            }
        }
    }

    #[test]
    fn saturated_regime_is_accepted() {
        let s = ScenarioConfig::new(1.0, 1.0, 3, 0.5).validate().unwrap();
        assert!(s.is_saturated());
    }

    #[test]
    fn pilot_intervals() {
        let s = ScenarioConfig::new(71.43e-6, 1e-3, 5, 2e-3)
            .validate()
            .unwrap();
        let p0 = s.pilot_interval(s.pilot_index(0).unwrap());
        assert_eq!((p0.lo(), p0.hi()), (0.0, 71.43e-6));
        let p4 = s.pilot_interval(s.pilot_index(4).unwrap());
        assert!((p4.lo() - 4e-3).abs() < 1e-18);
        assert!((p4.hi() - 4.07143e-3).abs() < 1e-15);

        let t = toy();
        let p1 = t.pilot_interval(t.pilot_index(1).unwrap());
        assert_eq!((p1.lo(), p1.hi()), (1.0, 1.5));
        assert!(matches!(
            t.pilot_index(2),
            Err(Error::PilotIndexOutOfRange { index: 2, n_p: 2 })
        ));
    }

    #[test]
    fn hit_windows() {
        let t = toy();
        let l1 = t.pilot_index(1).unwrap();
        let w = t.hit_window(l1, 1, 0.0);
        assert!((w.lo() - 0.2).abs() < 1e-12 && (w.hi() - 0.7).abs() < 1e-12);

        let w = t.hit_window(t.pilot_index(0).unwrap(), 0, 0.0);
        assert_eq!((w.lo(), w.hi()), (0.0, 0.5));

        let wide = ScenarioConfig::new(0.5, 1.0, 2, 0.8)
            .with_t_pulse(0.1)
            .validate()
            .unwrap();
        let w = wide.hit_window(l1, 1, 0.0);
        assert!((w.lo() - 0.1).abs() < 1e-12 && (w.hi() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip_and_unknown_keys() {
        let cfg = ScenarioConfig::new(71.43e-6, 1e-3, 5, 2e-3).with_echo_delays(vec![1e-6]);
        let back = ScenarioConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);

        let minimal = r#"{"t_ofdm":0.5,"t_pil":1,"n_p":2,"t_rep":0.8}"#;
        let parsed = ScenarioConfig::from_json(minimal).unwrap();
        assert_eq!(parsed.t_pulse, 0.0);
        assert!(parsed.echo_delays.is_empty());

        let extra = r#"{"t_ofdm":0.5,"t_pil":1,"n_p":2,"t_rep":0.8,"bogus":1}"#;
        assert!(ScenarioConfig::from_json(extra).is_err());
    }
}
