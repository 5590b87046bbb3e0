//! Subcommands and exit codes.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use adhoc_cloud_core::model::Scenario;
use adhoc_cloud_core::sim::{makespan, run_baseline, run_scenario, RunError, RunOptions, RunOutput};
use clap::{Args, Parser, Subcommand};

use crate::report::{self, SweepRow};
use crate::scenario_file::{parse_scenario, with_input_size, ParseOptions, ParsedScenario, ScenarioFileError};
use crate::trace_check::{check_records, parse_trace};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

pub const OUT_ENV: &str = "ADHOC_CLOUD_OUT";

#[derive(Debug, Parser)]
#[command(name = "adhoc-cloud", version, about = "Mobile ad hoc cloud simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    scenario: PathBuf,
    /// Skip unknown keys with a warning instead of failing.
    #[arg(long)]
    lenient: bool,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Overrides the scenario's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = OUT_ENV, default_value = "out")]
    out: PathBuf,
    /// Do not record or write the event trace.
    #[arg(long)]
    no_trace: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the scenario on the cluster and on the source node alone.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the workload on the source node alone.
    Baseline {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Re-run a profile workload at several input sizes (MB).
    Sweep {
        /// Comma-separated input sizes in MB, e.g. 30,50.
        sizes: String,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Parse and validate a scenario file.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Check causality and loop freedom in a written trace.
    TraceCheck {
        /// Trace file.
        trace: PathBuf,
    },
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Scenario(#[from] ScenarioFileError),
    #[error("{0}")]
    Run(RunError),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    BadTrace(String),
    #[error("{0}")]
    Internal(String),
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Failure::Run(e)
    }
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) | Failure::Io(_) => EXIT_USAGE,
            Failure::Scenario(ScenarioFileError::Io { .. }) => EXIT_USAGE,
            Failure::Scenario(_) | Failure::BadTrace(_) => EXIT_VALIDATION,
            Failure::Run(RunError::Engine(_)) => EXIT_INTERNAL,
            Failure::Run(_) => EXIT_VALIDATION,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }
}

/// Writes `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    write_atomic(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load(args: &ScenarioArgs, err: &mut dyn Write) -> Result<ParsedScenario, Failure> {
    let parsed = parse_scenario(&args.scenario, ParseOptions { lenient: args.lenient })?;
    for w in &parsed.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    Ok(parsed)
}

fn render_trace(out: &RunOutput) -> String {
    let mut s = String::new();
    for r in &out.trace {
        s.push_str(&r.to_string());
        s.push('\n');
    }
    s
}

/// Writes report.txt, report.json and (if traced) trace.log into `dir`.
/// The trace is re-checked before it is written.
fn write_run(dir: &Path, out: &RunOutput, traced: bool) -> Result<(), Failure> {
    if traced {
        let summary = check_records(&out.trace);
        if !summary.ok() {
            return Err(Failure::Internal(format!("trace invariant breach: {}", summary.violations.join("; "))));
        }
    }
    write_file(&dir.join("report.txt"), &report::render_text(&out.report))?;
    write_file(&dir.join("report.json"), &report::render_json(&out.report))?;
    if traced {
        write_file(&dir.join("trace.log"), &render_trace(out))?;
    }
    Ok(())
}

fn seeded(mut s: Scenario, seed: Option<u64>) -> Scenario {
    if let Some(seed) = seed {
        s.rng_seed = seed;
    }
    s
}

fn cmd_run(scenario: &ScenarioArgs, output: &OutputArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let s = seeded(load(scenario, err)?.scenario, output.seed);
    let traced = !output.no_trace;
    let result = run_scenario(&s, RunOptions { trace: traced })?;
    write_run(&output.out, &result, traced)?;
    let r = &result.report;
    let _ = writeln!(out, "makespan           {:.6} s", r.makespan);
    let _ = writeln!(out, "baseline makespan  {:.6} s", r.baseline_makespan);
    let _ = writeln!(out, "improvement        {:.6} %", 100.0 * r.improvement());
    let _ = writeln!(out, "wrote {}", output.out.display());
    if r.feasible {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(err, "scenario infeasible:");
        for line in adhoc_cloud_core::sim::runner::describe_failures(r) {
            let _ = writeln!(err, "  {line}");
        }
        Ok(EXIT_INFEASIBLE)
    }
}

fn cmd_baseline(scenario: &ScenarioArgs, output: &OutputArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let s = seeded(load(scenario, err)?.scenario, output.seed);
    let tasks = run_baseline(&s, 0.0)?;
    let span = makespan(&tasks);
    let src = s.source_node.0;
    write_file(&output.out.join("baseline.txt"), &report::render_baseline_text(src, &tasks, span))?;
    write_file(&output.out.join("baseline.json"), &report::render_baseline_json(src, &tasks, span))?;
    let _ = writeln!(out, "baseline makespan  {span:.6} s");
    let _ = writeln!(out, "wrote {}", output.out.display());
    Ok(EXIT_OK)
}

pub fn parse_sizes(list: &str) -> Result<Vec<f64>, String> {
    let sizes: Result<Vec<f64>, String> = list
        .split(',')
        .map(|p| {
            let p = p.trim();
            match p.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
                _ => Err(format!("bad input size {p:?}")),
            }
        })
        .collect();
    let sizes = sizes?;
    if sizes.is_empty() {
        return Err("no input sizes".into());
    }
    Ok(sizes)
}

fn cmd_sweep(sizes: &str, scenario: &ScenarioArgs, output: &OutputArgs, threads: usize, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let sizes = parse_sizes(sizes).map_err(Failure::Usage)?;
    let mut parsed = load(scenario, err)?;
    parsed.scenario = seeded(parsed.scenario, output.seed);
    let scenarios: Vec<Scenario> = sizes.iter().map(|mb| with_input_size(&parsed, *mb)).collect::<Result<_, _>>()?;
    let traced = !output.no_trace;
    let opts = RunOptions { trace: traced };
    let workers = threads.clamp(1, scenarios.len());
    let mut results: Vec<Option<Result<RunOutput, RunError>>> = (0..scenarios.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let scenarios = &scenarios;
                scope.spawn(move || {
                    (w..scenarios.len())
                        .step_by(workers)
                        .map(|i| (i, run_scenario(&scenarios[i], opts)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("sweep worker panicked") {
                results[i] = Some(r);
            }
        }
    });
    let mut rows = Vec::with_capacity(sizes.len());
    for (mb, result) in sizes.iter().zip(results) {
        let result = result.expect("every size ran")?;
        write_run(&output.out.join(format!("mb-{mb}")), &result, traced)?;
        rows.push(SweepRow::from_report(*mb, &result.report));
    }
    let table = report::render_sweep_text(&rows);
    write_file(&output.out.join("sweep.txt"), &table)?;
    write_file(&output.out.join("sweep.json"), &report::render_sweep_json(&rows))?;
    let _ = write!(out, "{table}");
    if rows.iter().all(|r| r.feasible) {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(err, "some sizes were infeasible");
        Ok(EXIT_INFEASIBLE)
    }
}

fn cmd_validate(scenario: &ScenarioArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let p = load(scenario, err)?;
    let s = &p.scenario;
    let _ = writeln!(
        out,
        "ok: {} nodes, {} tasks, {} edges, source {}",
        s.nodes.len(),
        s.workload.tasks.len(),
        s.workload.edges.len(),
        s.source_node
    );
    Ok(EXIT_OK)
}

fn cmd_trace_check(path: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let records = parse_trace(&text).map_err(|e| Failure::BadTrace(format!("{}: {e}", path.display())))?;
    let s = check_records(&records);
    let _ = writeln!(
        out,
        "{} records, {} task starts, {} route chains, {} paths checked",
        s.records, s.tasks_checked, s.chains_checked, s.paths_checked
    );
    if s.ok() {
        let _ = writeln!(out, "ok");
        Ok(EXIT_OK)
    } else {
        for v in &s.violations {
            let _ = writeln!(out, "violation: {v}");
        }
        Ok(EXIT_INTERNAL)
    }
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Run { scenario, output } => cmd_run(scenario, output, out, err),
        Command::Baseline { scenario, output } => cmd_baseline(scenario, output, out, err),
        Command::Sweep { sizes, scenario, output, threads } => cmd_sweep(sizes, scenario, output, *threads, out, err),
        Command::Validate { scenario } => cmd_validate(scenario, out, err),
        Command::TraceCheck { trace } => cmd_trace_check(trace, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {f}");
            f.code()
        }
    }
}
