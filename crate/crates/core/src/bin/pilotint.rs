use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pilot_interference::advisor::{self, FeedbackScheme};
use pilot_interference::closed_form;
use pilot_interference::engine;
use pilot_interference::interval::Interval;
use pilot_interference::montecarlo;
use pilot_interference::sweep::{self, CsvPreamble, PresetOptions, SweepAxis, SweepRow, SweepSpec};
use pilot_interference::validation;
use pilot_interference::{Error, Scenario, ScenarioConfig};

/// Radar pulse-train interference on OFDM pilot symbols.
#[derive(Parser)]
#[command(name = "pilotint", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact P[M >= m], bounds and closed forms (all m unless --m is given)
    Prob {
        #[command(flatten)]
        scn: ScenarioArgs,
        #[arg(long)]
        m: Option<u32>,
        /// Also run the Monte Carlo oracle
        #[arg(long)]
        mc: bool,
        #[command(flatten)]
        mcargs: McArgs,
        #[arg(long)]
        json: bool,
    },
    /// Analytical bounds on P[M >= m]
    Bounds {
        #[command(flatten)]
        scn: ScenarioArgs,
        #[arg(long)]
        m: Option<u32>,
        #[arg(long)]
        json: bool,
    },
    /// Repetition intervals where P[M >= m] can be non-zero
    FeasibleSet {
        #[command(flatten)]
        scn: ScenarioArgs,
        #[arg(long)]
        m: u32,
        #[arg(long)]
        trep_min: f64,
        #[arg(long)]
        trep_max: f64,
        #[arg(long)]
        json: bool,
    },
    /// Demodulation pilot spacing for a known radar PRI
    RecommendDmrs {
        #[arg(long)]
        t_rep: f64,
        #[arg(long)]
        t_coh: f64,
        #[arg(long)]
        t_ofdm: f64,
        #[arg(long)]
        json: bool,
    },
    /// Probability that limited feedback reflects the interference channel
    ScsiAccuracy {
        #[command(flatten)]
        scn: ScenarioArgs,
        #[arg(long, value_enum, default_value = "avg")]
        scheme: Scheme,
        #[arg(long)]
        json: bool,
    },
    /// Custom sweep over one axis
    Sweep {
        #[command(flatten)]
        scn: ScenarioArgs,
        #[arg(long, value_enum)]
        axis: Axis,
        #[arg(long)]
        start: f64,
        #[arg(long)]
        stop: f64,
        /// Grid cells on the t_rep axis
        #[arg(long, conflicts_with = "step")]
        count: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
        /// Comma-separated m values (default: all)
        #[arg(long, value_delimiter = ',')]
        m_list: Vec<u32>,
        /// Sample grid edges instead of cell midpoints
        #[arg(long)]
        no_half_step: bool,
        #[arg(long, default_value = "")]
        series: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Single-hit probability and bounds, several pilot counts
    Fig3a(PresetArgs),
    /// P[M >= m] for m = 1..5, five pilots
    Fig3b(PresetArgs),
    /// Half-window hit probability for growing estimation windows
    Fig4(PresetArgs),
    /// Randomized consistency checks; exits 1 on any failure
    Validate {
        #[arg(long, default_value_t = 100)]
        configs: usize,
        #[arg(long, default_value_t = 1_000_000)]
        mc_samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-config CSV
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
        #[arg(long)]
        no_timestamp: bool,
        /// Also fail on exact non-zero points outside the predicted support
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// JSON scenario file; individual flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    t_ofdm: Option<f64>,
    #[arg(long)]
    t_pil: Option<f64>,
    #[arg(long)]
    n_p: Option<u32>,
    #[arg(long)]
    t_rep: Option<f64>,
    #[arg(long)]
    t_pulse: Option<f64>,
    /// Comma-separated, strictly increasing
    #[arg(long, value_delimiter = ',')]
    echo_delays: Option<Vec<f64>>,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 1_000_000)]
    mc_samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct OutArgs {
    #[arg(long)]
    mc: bool,
    #[command(flatten)]
    mcargs: McArgs,
    /// CSV destination (default: standard output)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print rows as JSON instead of CSV
    #[arg(long)]
    json: bool,
    /// Omit the generation-time metadata line
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Args)]
struct PresetArgs {
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Min,
    Avg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    TRep,
    TCsi,
    M,
}

enum Failure {
    Input(String),
    Validation,
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Io(e.into())
    }
}

type Outcome = Result<(), Failure>;

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
                ScenarioConfig::from_json(&text)?
            }
            None => {
                let need = |v: Option<f64>, name: &str| {
                    v.ok_or_else(|| Failure::Input(format!("missing --{name} (or --config)")))
                };
                ScenarioConfig::new(
                    need(self.t_ofdm, "t-ofdm")?,
                    need(self.t_pil, "t-pil")?,
                    self.n_p
                        .ok_or_else(|| Failure::Input("missing --n-p (or --config)".into()))?,
                    need(self.t_rep, "t-rep")?,
                )
            }
        };
        if let Some(v) = self.t_ofdm {
            cfg.t_ofdm = v;
        }
        if let Some(v) = self.t_pil {
            cfg.t_pil = v;
        }
        if let Some(v) = self.n_p {
            cfg.n_p = v;
        }
        if let Some(v) = self.t_rep {
            cfg.t_rep = v;
        }
        if let Some(v) = self.t_pulse {
            cfg.t_pulse = v;
        }
        if let Some(v) = &self.echo_delays {
            cfg.echo_delays = v.clone();
        }
        Ok(cfg.validate()?)
    }
}

fn m_values(scn: &Scenario, m: Option<u32>) -> Vec<u32> {
    match m {
        Some(m) => vec![m],
        None => (1..=scn.n_p()).collect(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.9e}")).unwrap_or_else(|| "-".into())
}

fn print_json(v: &impl Serialize) -> Outcome {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn emit_rows(rows: &[SweepRow], out: &OutArgs, command: &str) -> Outcome {
    if out.json {
        return print_json(&rows);
    }
    let seed = out.mc.then_some(out.mcargs.seed);
    let preamble = CsvPreamble::for_run(command, seed, !out.no_timestamp);
    match &out.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            sweep::write_csv(rows, &preamble, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            sweep::write_csv(rows, &preamble, &mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn preset_opts(out: &OutArgs) -> PresetOptions {
    PresetOptions {
        with_mc: out.mc,
        mc_samples: out.mcargs.mc_samples,
        seed: out.mcargs.seed,
    }
}

#[derive(Serialize)]
struct ProbOutput {
    scenario: Scenario,
    results: Vec<ProbEntry>,
}

#[derive(Serialize)]
struct ProbEntry {
    #[serde(flatten)]
    report: engine::ProbabilityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    monte_carlo: Option<montecarlo::McEstimate>,
}

fn run(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Prob {
            scn,
            m,
            mc,
            mcargs,
            json,
        } => {
            let scn = scn.load()?;
            let ms = m_values(&scn, m);
            let mc_est = if mc {
                let hist = montecarlo::hit_histogram(&scn, mcargs.mc_samples, mcargs.seed)?;
                Some(montecarlo::estimates_from_histogram(&hist))
            } else {
                None
            };
            let mut results = Vec::new();
            for m in ms {
                results.push(ProbEntry {
                    report: engine::prob_at_least(&scn, m)?,
                    monte_carlo: mc_est.as_ref().map(|e| e[m as usize - 1]),
                });
            }
            if json {
                return print_json(&ProbOutput {
                    scenario: scn,
                    results,
                });
            }
            let mut out = io::stdout().lock();
            for e in &results {
                let r = &e.report;
                write!(
                    out,
                    "m={} p_exact={:.9e} lower={:.9e} upper={:.9e} closed_form={} case={} predicted_nonzero={}",
                    r.m,
                    r.p_exact,
                    r.lower_bound,
                    r.upper_bound,
                    fmt_opt(r.closed_form.map(|c| c.value)),
                    r.closed_form.map(|c| c.case.label()).unwrap_or("-"),
                    r.predicted_nonzero,
                )?;
                if let Some(est) = e.monte_carlo {
                    write!(out, " mc={:.9e} mc_stderr={:.9e}", est.estimate, est.stderr)?;
                }
                writeln!(out)?;
            }
            Ok(())
        }
        Cmd::Bounds { scn, m, json } => {
            let scn = scn.load()?;
            #[derive(Serialize)]
            struct Entry {
                m: u32,
                lower: f64,
                upper: f64,
            }
            let mut entries = Vec::new();
            for m in m_values(&scn, m) {
                let b = closed_form::bounds(&scn, m)?;
                entries.push(Entry {
                    m,
                    lower: b.lower,
                    upper: b.upper,
                });
            }
            if json {
                return print_json(&entries);
            }
            let mut out = io::stdout().lock();
            for e in entries {
                writeln!(out, "m={} lower={:.9e} upper={:.9e}", e.m, e.lower, e.upper)?;
            }
            Ok(())
        }
        Cmd::FeasibleSet {
            scn,
            m,
            trep_min,
            trep_max,
            json,
        } => {
            // Only the pilot grid matters here; t_rep need not be given.
            let mut args = scn;
            if args.t_rep.is_none() && args.config.is_none() {
                args.t_rep = Some(trep_max);
            }
            let scn = args.load()?;
            let fs = closed_form::feasible_set(
                m,
                scn.n_p(),
                scn.t_pil(),
                scn.t_ofdm(),
                trep_min,
                trep_max,
            )?;
            if json {
                return print_json(&fs);
            }
            let mut out = io::stdout().lock();
            writeln!(
                out,
                "m={} n_p={} q_max={} measure={:.9e}",
                fs.m,
                fs.n_p,
                fs.q_max,
                fs.set.measure()
            )?;
            for iv in fs.set.intervals() {
                writeln!(out, "{:.9e} {:.9e}", iv.lo(), iv.hi())?;
            }
            Ok(())
        }
        Cmd::RecommendDmrs {
            t_rep,
            t_coh,
            t_ofdm,
            json,
        } => {
            let r = advisor::recommend_dmrs(t_rep, t_coh, t_ofdm)?;
            if json {
                return print_json(&r);
            }
            writeln!(
                io::stdout(),
                "k_opt={} t_dmrs={:.9e} p_interference={:.9e} coherence_ok={}",
                r.k_opt,
                r.t_dmrs,
                r.p_interference,
                r.coherence_ok
            )?;
            Ok(())
        }
        Cmd::ScsiAccuracy { scn, scheme, json } => {
            let scn = scn.load()?;
            let scheme = match scheme {
                Scheme::Min => FeedbackScheme::Min,
                Scheme::Avg => FeedbackScheme::Avg,
            };
            let a = advisor::scsi_accuracy(&scn, scheme)?;
            if json {
                return print_json(&a);
            }
            writeln!(
                io::stdout(),
                "threshold_m={} p_accurate={:.9e}",
                a.threshold_m,
                a.p_accurate
            )?;
            if scheme == FeedbackScheme::Avg && scn.n_p() >= 2 {
                let range = Interval::new(0.5 * scn.t_rep(), 2.0 * scn.t_rep())?;
                let blind = advisor::blind_region(scn.t_pil(), scn.t_ofdm(), scn.n_p(), range)?;
                writeln!(
                    io::stdout(),
                    "blind_measure_in_[t_rep/2,2*t_rep]={:.9e}",
                    blind.measure()
                )?;
            }
            Ok(())
        }
        Cmd::Sweep {
            scn,
            axis,
            start,
            stop,
            count,
            step,
            m_list,
            no_half_step,
            series,
            out,
        } => {
            let base = scn.load()?.into_config();
            let axis = match axis {
                Axis::TRep => SweepAxis::TRep,
                Axis::TCsi => SweepAxis::TCsi,
                Axis::M => SweepAxis::M,
            };
            let count = match (count, step) {
                (Some(c), _) => c,
                (None, Some(s)) => SweepSpec::count_for_step(start, stop, s)?,
                (None, None) if axis == SweepAxis::TRep => {
                    return Err(Failure::Input(
                        "sweep over t_rep needs --count or --step".into(),
                    ))
                }
                (None, None) => 1,
            };
            let mut spec = SweepSpec::new(base, axis, start, stop, count);
            spec.half_step = !no_half_step;
            spec.m_list = m_list;
            spec.with_mc = out.mc;
            spec.mc_samples = out.mcargs.mc_samples;
            spec.seed = out.mcargs.seed;
            spec.series = series;
            let rows = sweep::run_sweep(&spec)?;
            emit_rows(&rows, &out, "sweep")
        }
        Cmd::Fig3a(p) => emit_rows(&sweep::preset_fig3a(preset_opts(&p.out))?, &p.out, "fig3a"),
        Cmd::Fig3b(p) => emit_rows(&sweep::preset_fig3b(preset_opts(&p.out))?, &p.out, "fig3b"),
        Cmd::Fig4(p) => emit_rows(&sweep::preset_fig4(preset_opts(&p.out))?, &p.out, "fig4"),
        Cmd::Validate {
            configs,
            mc_samples,
            seed,
            out,
            json,
            no_timestamp,
            strict,
        } => {
            if configs == 0 || mc_samples == 0 {
                return Err(Failure::Input(
                    "--configs and --mc-samples must be >= 1".into(),
                ));
            }
            let report = validation::run_validation(configs, mc_samples, seed)?;
            if let Some(path) = &out {
                let mut w = BufWriter::new(File::create(path)?);
                let preamble = CsvPreamble::for_run("validate", Some(seed), !no_timestamp);
                preamble.write(&mut w)?;
                report.write_csv(&mut w)?;
                w.flush()?;
            }
            if json {
                print_json(&report)?;
            } else {
                report.write_summary(&mut io::stdout().lock())?;
            }
            let ok = if strict {
                report.passed_strict()
            } else {
                report.passed()
            };
            if ok {
                Ok(())
            } else {
                Err(Failure::Validation)
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation) => {
            eprintln!("validation failed");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(Failure::Io(e)) => {
            eprintln!("I/O error: {e}");
            ExitCode::from(2)
        }
    }
}
