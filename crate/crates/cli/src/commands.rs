//! Subcommand definitions and their execution.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::builder::TypedValueParser as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use densecode::bounds::{
    certified_schmidt_number, certified_schmidt_number_mub, classical_bound, critical_visibility,
    schmidt_bound, sdp_reference, unassisted_quantum_bound,
};
use densecode::optimize::{seesaw_physical, seesaw_relaxed, SeesawConfig, Strategy};
use densecode::protocol::{
    correlation, mub_game_correlation_with_state, mub_game_value, success_rate,
};
use densecode::stats::{azuma_pvalue, estimate_success, poisson_bootstrap, ExperimentDataset};
use densecode::DensityOperator;

use crate::dataset::DatasetFile;
use crate::error::{CliError, CliResult};
use crate::protocol_file::{ProtocolFile, StateSpec};
use crate::report::{RunReport, Value, DEFAULT_PRECISION};

/// Name under which the bundled experimental dataset can be ingested.
pub const BUNDLED_DATASET: &str = "tables_s2_s3";
pub const BUNDLED_DATASET_TEXT: &str = include_str!("../data/tables_s2_s3.txt");

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "densecode",
    version,
    about = "Simulate, bound and certify entanglement-assisted stochastic communication"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Significant digits for real numbers in the report.
    #[arg(long, default_value_t = DEFAULT_PRECISION, global = true,
          value_parser = clap::value_parser!(u8).range(1..=17).map(|v| v as usize))]
    pub precision: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a strategy and certify the Schmidt number it demonstrates.
    Simulate(SimulateArgs),
    /// Tabulate the Schmidt-number bounds and critical visibilities.
    Bounds(BoundsArgs),
    /// Run see-saw lower bounds.
    Seesaw(SeesawArgs),
    /// Load count data, estimate the success rate and its error bar.
    Ingest(IngestArgs),
    /// Azuma–Hoeffding p-value against a Schmidt-number null hypothesis.
    Pvalue(PvalueArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Game {
    Stochastic,
    Mub,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Relaxed,
    Physical,
}

/// Noise model applied to the maximally entangled state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Noise {
    Isotropic(f64),
}

impl FromStr for Noise {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "none" {
            return Ok(Noise::Isotropic(1.0));
        }
        let v = s
            .strip_prefix("isotropic:")
            .ok_or_else(|| format!("expected isotropic:<visibility> or none, got {s:?}"))?;
        let v: f64 = v.parse().map_err(|_| format!("bad visibility {v:?}"))?;
        if !(0.0..=1.0).contains(&v) {
            return Err(format!("visibility {v} outside [0, 1]"));
        }
        Ok(Noise::Isotropic(v))
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, required_unless_present = "protocol")]
    pub n: Option<usize>,
    #[arg(long, value_enum, default_value_t = Game::Stochastic)]
    pub game: Game,
    /// Number of bases in the MUB game.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value = "isotropic:1.0")]
    pub noise: Noise,
    /// Protocol file to evaluate instead of the noisy ideal strategy.
    #[arg(long, conflicts_with_all = ["n", "noise"])]
    pub protocol: Option<PathBuf>,
    /// Write the evaluated strategy as a protocol file.
    #[arg(long)]
    pub save_protocol: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d_min: Option<usize>,
    #[arg(long)]
    pub d_max: Option<usize>,
    /// Also write the table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SeesawArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = Mode::Relaxed)]
    pub mode: Mode,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iterations: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    #[arg(long, env = "DENSECODE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Write every restart's objective trajectory as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the best physical strategy as a protocol file.
    #[arg(long)]
    pub save_strategy: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Dataset file, or `tables_s2_s3` for the bundled experimental data.
    pub source: String,
    /// Assumed events per setting for probability-form files.
    #[arg(long)]
    pub total_counts: Option<u64>,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, env = "DENSECODE_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Number of lowest-scoring settings to list.
    #[arg(long, default_value_t = 3)]
    pub worst: usize,
    /// Write the dataset back out in raw-count form.
    #[arg(long)]
    pub save_counts: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PvalueArgs {
    #[arg(long, required_unless_present = "dataset", conflicts_with = "dataset")]
    pub s_hat: Option<f64>,
    /// Dataset (or `tables_s2_s3`) providing the estimate, n and round count.
    #[arg(long)]
    pub dataset: Option<String>,
    /// Largest Schmidt number of the null hypothesis; defaults to n − 1.
    #[arg(long)]
    pub d_null: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub rounds: Option<u64>,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
}

fn validation(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Parses arguments (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CliResult<(RunReport, Format, usize)>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = Cli::try_parse_from(&args).map_err(|e| validation(e.to_string()))?;
    let echo = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join(" ");
    let report = execute(&cli.command, &echo)?;
    Ok((report.finish(), cli.format, cli.precision))
}

pub fn execute(command: &Command, echo: &str) -> CliResult<RunReport> {
    match command {
        Command::Simulate(a) => simulate(a, echo),
        Command::Bounds(a) => bounds(a, echo),
        Command::Seesaw(a) => seesaw(a, echo),
        Command::Ingest(a) => ingest(a, echo),
        Command::Pvalue(a) => pvalue(a, echo),
    }
}

fn certified_value(d: Option<usize>) -> Value {
    d.map_or(Value::Text("none".into()), Value::from)
}

fn bound_rows(n: usize, value: f64) -> CliResult<Value> {
    let mut rows = Vec::with_capacity(n);
    for d in 1..=n {
        let b = schmidt_bound(n, d)?;
        rows.push(vec![d.into(), b.into(), (value > b).into()]);
    }
    Ok(Value::Table(
        vec!["d".into(), "schmidt_bound".into(), "exceeded".into()],
        rows,
    ))
}

fn simulate(a: &SimulateArgs, echo: &str) -> CliResult<RunReport> {
    let (file, input) = match &a.protocol {
        Some(path) => {
            if a.game == Game::Mub {
                return Err(validation(
                    "protocol files describe the stochastic task only",
                ));
            }
            let (f, bytes) = ProtocolFile::read(path)?;
            (f, bytes)
        }
        None => {
            let n = a.n.ok_or_else(|| validation("--n is required"))?;
            let Noise::Isotropic(v) = a.noise;
            let state = if v == 1.0 {
                StateSpec::Ideal
            } else {
                StateSpec::Isotropic { visibility: v }
            };
            let f = ProtocolFile {
                n,
                state,
                encodings: Default::default(),
                measurements: Default::default(),
            };
            (f, echo.as_bytes().to_vec())
        }
    };
    let mut report = RunReport::new(echo.to_string(), &input);
    let n = file.n;
    report.push("n", n);
    match a.game {
        Game::Stochastic => {
            if a.m.is_some() {
                return Err(validation("--m only applies to the MUB game"));
            }
            let protocol = file.to_protocol()?;
            let s = success_rate(&correlation(&protocol)?)?;
            report.push("game", "stochastic");
            if let StateSpec::Isotropic { visibility } = file.state {
                report.push("visibility", visibility);
            } else if file.state == StateSpec::Ideal {
                report.push("visibility", 1.0);
            }
            report.push("success_rate", s);
            report.push("classical_bound", classical_bound(n));
            report.push("unassisted_quantum_bound", unassisted_quantum_bound(n));
            report.push("bounds", bound_rows(n, s)?);
            report.push(
                "certified_schmidt_number",
                certified_value(certified_schmidt_number(s, n)),
            );
            if certified_schmidt_number(s, n).is_none() {
                report.note(
                    "the success rate does not exceed the unentangled bound; nothing is certified",
                );
            }
        }
        Game::Mub => {
            let m =
                a.m.ok_or_else(|| validation("--m is required for the MUB game"))?;
            let Noise::Isotropic(v) = a.noise;
            let state = DensityOperator::isotropic(n, v)?;
            let r = mub_game_value(&mub_game_correlation_with_state(n, m, &state)?, n, m)?;
            report.push("game", "mub");
            report.push("m", m);
            report.push("visibility", v);
            report.push("game_value", r);
            let mut rows = Vec::new();
            for d in 1..n {
                if let Ok(b) = sdp_reference(n, m, d) {
                    rows.push(vec![d.into(), b.into(), (r > b).into()]);
                }
            }
            if rows.is_empty() {
                report.note(format!("no reference bounds for n={n}, m={m}"));
            } else {
                report.push(
                    "reference_bounds",
                    Value::Table(vec!["d".into(), "bound".into(), "exceeded".into()], rows),
                );
                report.push(
                    "certified_schmidt_number",
                    certified_value(certified_schmidt_number_mub(r, n, m)),
                );
            }
        }
    }
    if let Some(path) = &a.save_protocol {
        write_file(path, &file.write())?;
    }
    Ok(report)
}

fn bounds(a: &BoundsArgs, echo: &str) -> CliResult<RunReport> {
    let n = a.n;
    if n < 2 {
        return Err(validation(format!("n must be at least 2, got {n}")));
    }
    let d_min = a.d_min.unwrap_or(1);
    let d_max = a.d_max.unwrap_or(n);
    if d_min < 1 || d_max > n || d_min > d_max {
        return Err(validation(format!(
            "invalid range d={d_min}..={d_max} for n={n}"
        )));
    }
    let mut report = RunReport::new(echo.to_string(), echo.as_bytes());
    report.push("n", n);
    report.push("classical_bound", classical_bound(n));
    report.push("unassisted_quantum_bound", unassisted_quantum_bound(n));
    let mut rows = Vec::new();
    let mut csv = String::from("d,schmidt_bound,critical_visibility\n");
    for d in d_min..=d_max {
        let b = schmidt_bound(n, d)?;
        let v = critical_visibility(b, n)?;
        rows.push(vec![d.into(), b.into(), v.into()]);
        let _ = writeln!(csv, "{d},{b},{v}");
    }
    report.push(
        "bounds",
        Value::Table(
            vec![
                "d".into(),
                "schmidt_bound".into(),
                "critical_visibility".into(),
            ],
            rows,
        ),
    );
    if let Some(path) = &a.csv {
        write_file(path, &csv)?;
    }
    Ok(report)
}

fn seesaw(a: &SeesawArgs, echo: &str) -> CliResult<RunReport> {
    let cfg = SeesawConfig {
        n: a.n,
        d: a.d,
        restarts: a.restarts,
        max_iterations: a.max_iterations,
        tolerance: a.tolerance,
        seed: a.seed,
    };
    if a.save_strategy.is_some() && a.mode == Mode::Relaxed {
        return Err(validation("--save-strategy needs --mode physical"));
    }
    let result = match a.mode {
        Mode::Relaxed => seesaw_relaxed(&cfg)?,
        Mode::Physical => seesaw_physical(&cfg)?,
    };
    let bound = schmidt_bound(a.n, a.d)?;
    let mut report = RunReport::new(echo.to_string(), echo.as_bytes());
    report.seed = Some(a.seed);
    report.push(
        "mode",
        match a.mode {
            Mode::Relaxed => "relaxed",
            Mode::Physical => "physical",
        },
    );
    report.push("n", a.n);
    report.push("d", a.d);
    report.push("best_objective", result.best_objective);
    report.push("schmidt_bound", bound);
    report.push("gap", bound - result.best_objective);
    report.push("relative_gap", (bound - result.best_objective) / bound);
    report.push("best_restart", result.best_restart);
    report.push("restarts", a.restarts);
    let converged = result.converged.iter().filter(|&&c| c).count();
    report.push("converged_restarts", converged);
    report.push("total_iterations", result.iterations.iter().sum::<usize>());
    let finals: Vec<Vec<Value>> = result
        .trajectories
        .iter()
        .enumerate()
        .map(|(r, t)| {
            vec![
                r.into(),
                result.iterations[r].into(),
                (*t.last().expect("nonempty")).into(),
                result.converged[r].into(),
            ]
        })
        .collect();
    report.push(
        "restart_summary",
        Value::Table(
            vec![
                "restart".into(),
                "iterations".into(),
                "objective".into(),
                "converged".into(),
            ],
            finals,
        ),
    );
    if converged < a.restarts {
        report.note(format!(
            "{} restart(s) stopped at the iteration limit before converging",
            a.restarts - converged
        ));
    }
    if let Some(path) = &a.csv {
        let mut csv = String::from("restart,iteration,objective\n");
        for (r, t) in result.trajectories.iter().enumerate() {
            for (i, v) in t.iter().enumerate() {
                let _ = writeln!(csv, "{r},{i},{v}");
            }
        }
        write_file(path, &csv)?;
    }
    if let (Some(path), Strategy::Physical(p)) = (&a.save_strategy, &result.strategy) {
        write_file(path, &ProtocolFile::from_protocol(p).write())?;
    }
    Ok(report)
}

/// Reads a dataset file, or the bundled data when `source` names it.
pub fn load_dataset(source: &str) -> CliResult<(DatasetFile, Vec<u8>)> {
    let path = Path::new(source);
    if !path.exists() && source == BUNDLED_DATASET {
        let bytes = BUNDLED_DATASET_TEXT.as_bytes().to_vec();
        return Ok((DatasetFile::parse(BUNDLED_DATASET_TEXT)?, bytes));
    }
    DatasetFile::read(path)
}

fn ingest(a: &IngestArgs, echo: &str) -> CliResult<RunReport> {
    let (mut file, bytes) = load_dataset(&a.source)?;
    if let Some(total) = a.total_counts {
        file = file.with_total_counts(total)?;
    }
    let ds = file.to_dataset()?;
    let n = ds.n();
    let estimate = estimate_success(&ds)?;
    let boot = poisson_bootstrap(&ds, a.samples, a.seed)?;
    let mut report = RunReport::new(echo.to_string(), &bytes);
    report.seed = Some(a.seed);
    report.push("n", n);
    report.push("total_events", ds.total_events());
    report.push("success_rate", estimate.value);
    report.push("bootstrap_std_dev", boot.std_dev);
    report.push("bootstrap_mean", boot.value);
    report.push("bootstrap_samples", boot.sample_count);
    report.push("worst_settings", worst_settings(&ds, a.worst)?);
    let top = schmidt_bound(n, n - 1)?;
    report.push("schmidt_bound_d_n_minus_1", top);
    let certified = certified_schmidt_number(estimate.value, n);
    report.push("certified_schmidt_number", certified_value(certified));
    report.push(
        "verdict",
        match certified {
            Some(d) if d == n => format!("Schmidt number {n} certified"),
            Some(d) => format!("Schmidt number at least {d}"),
            None => "no entanglement dimension certified".to_string(),
        },
    );
    if let Some(path) = &a.save_counts {
        write_file(path, &DatasetFile::from_dataset(&ds).write())?;
    }
    Ok(report)
}

fn worst_settings(ds: &ExperimentDataset, k: usize) -> CliResult<Value> {
    let n = ds.n();
    let freqs = ds.win_frequencies()?;
    let mut order: Vec<usize> = (0..freqs.len()).collect();
    order.sort_by(|&i, &j| freqs[i].total_cmp(&freqs[j]).then(i.cmp(&j)));
    let rows = order
        .into_iter()
        .take(k)
        .map(|i| {
            let x = i / 2;
            vec![
                (x / n).into(),
                (x % n).into(),
                (i % 2 + 1).into(),
                freqs[i].into(),
            ]
        })
        .collect();
    Ok(Value::Table(
        vec!["x1".into(), "x2".into(), "y".into(), "p_win".into()],
        rows,
    ))
}

fn pvalue(a: &PvalueArgs, echo: &str) -> CliResult<RunReport> {
    let (s_hat, n, rounds, input) = match (&a.dataset, a.s_hat) {
        (Some(source), _) => {
            let (file, bytes) = load_dataset(source)?;
            let ds = file.to_dataset()?;
            if a.n.is_some_and(|n| n != ds.n()) {
                return Err(validation(format!(
                    "--n disagrees with the dataset (n={})",
                    ds.n()
                )));
            }
            let rounds = a.rounds.unwrap_or(ds.total_events());
            (estimate_success(&ds)?.value, ds.n(), rounds, bytes)
        }
        (None, Some(s)) => {
            let n =
                a.n.ok_or_else(|| validation("--n is required with --s-hat"))?;
            let rounds = a
                .rounds
                .ok_or_else(|| validation("--rounds is required with --s-hat"))?;
            (s, n, rounds, echo.as_bytes().to_vec())
        }
        (None, None) => return Err(validation("give --s-hat or --dataset")),
    };
    if n < 2 {
        return Err(validation(format!("n must be at least 2, got {n}")));
    }
    let d_null = a.d_null.unwrap_or(n - 1);
    let bound = schmidt_bound(n, d_null)?;
    let p = azuma_pvalue(s_hat, bound, rounds, a.delta)?;
    let mut report = RunReport::new(echo.to_string(), &input);
    report.push("s_hat", s_hat);
    report.push("n", n);
    report.push("d_null", d_null);
    report.push("bound", bound);
    report.push("mu", s_hat - bound);
    report.push("rounds", rounds);
    report.push("delta", a.delta);
    report.push("p_value", p.p);
    report.push("log10_p_value", p.log10_p);
    if p.p == 1.0 {
        report.note(if rounds == 0 {
            "no rounds recorded, so the data cannot reject the null hypothesis"
        } else {
            "the estimate does not exceed the bound, so the null hypothesis is not rejected"
        });
    }
    Ok(report)
}
