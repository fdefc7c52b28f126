use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sticky_manet::audit::{audit_confidentiality, delivered_sets, AuditResult};
use sticky_manet::fuzz::fuzz;
use sticky_manet::gen;
use sticky_manet::metrics::delay_report;
use sticky_manet::sim::{run, Scenario};
use sticky_manet::trace::Trace;

const EXIT_OK: u8 = 0;
const EXIT_ERROR: u8 = 1;
const EXIT_VIOLATION: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "sticky-manet",
    version,
    about = "Policy-enforcing MANET flooding simulator"
)]
struct Cli {
    /// Where `run` writes its trace (default: <trace dir>/<scenario stem>.tr)
    #[arg(long, global = true, value_name = "PATH")]
    trace_out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = ReportFormat::Text)]
    report: ReportFormat,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Print nothing on success
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Builtin {
    Fig5,
    Scenario3node,
    #[value(name = "delay_sweep", alias = "delay-sweep")]
    DelaySweep,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario, write its trace, print the delay report and audit
    Run { scenario: PathBuf },
    /// Write a built-in scenario (delay_sweep writes a directory of eight)
    Gen {
        #[arg(value_enum)]
        name: Builtin,
        out: PathBuf,
    },
    /// Check random scenarios against the reachability oracle
    Fuzz {
        count: usize,
        max_nodes: usize,
        seed: Option<u64>,
    },
    /// Audit an existing trace file against its scenario
    Audit { trace: PathBuf, scenario: PathBuf },
}

struct Failure(u8, String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(EXIT_ERROR, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(Failure(code, msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Run { scenario } => cmd_run(cli, scenario),
        Command::Gen { name, out } => cmd_gen(cli, *name, out),
        Command::Fuzz {
            count,
            max_nodes,
            seed,
        } => cmd_fuzz(cli, *count, *max_nodes, seed.unwrap_or(cli.seed)),
        Command::Audit { trace, scenario } => cmd_audit(cli, trace, scenario),
    }
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let scenario = Scenario::load(path)?;
    scenario.validate()?;
    Ok(scenario)
}

fn default_trace_path(scenario: &Path) -> PathBuf {
    let dir = std::env::var_os("STICKY_MANET_TRACE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    let stem = scenario
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trace".into());
    dir.join(format!("{stem}.tr"))
}

fn audit_verdict(audit: &AuditResult, quiet: bool) -> Result<(), Failure> {
    if audit.is_pass() {
        if !quiet {
            println!("audit: PASS");
        }
        return Ok(());
    }
    println!("audit: FAIL ({} violation(s))", audit.violations.len());
    for v in &audit.violations {
        println!("  {v}");
    }
    Err(Failure(EXIT_VIOLATION, String::new()))
}

fn cmd_run(cli: &Cli, scenario_path: &Path) -> Result<(), Failure> {
    let scenario = load_scenario(scenario_path)?;
    let trace = run(&scenario, cli.seed)?;
    let trace_path = cli
        .trace_out
        .clone()
        .unwrap_or_else(|| default_trace_path(scenario_path));
    if let Some(dir) = trace_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    trace
        .save(&trace_path)
        .map_err(|e| Failure(EXIT_ERROR, format!("writing {}: {e}", trace_path.display())))?;

    let report = delay_report(&trace);
    let audit = audit_confidentiality(&trace, &scenario);
    if !cli.quiet {
        match cli.report {
            ReportFormat::Text => {
                println!(
                    "scenario {}: {} nodes, {} originations, {} cbr flows",
                    scenario_path.display(),
                    scenario.nodes.len(),
                    scenario.originations.len(),
                    scenario.flows.len()
                );
                println!("trace {} ({} records)", trace_path.display(), trace.len());
                for (msg, nodes) in delivered_sets(&trace) {
                    let list: Vec<String> = nodes.iter().map(|n| n.to_string()).collect();
                    println!("delivered {msg} -> {{{}}}", list.join(","));
                }
                print!("{}", report.to_text());
            }
            ReportFormat::Csv => print!("{}", report.to_csv()),
        }
    }
    audit_verdict(&audit, cli.quiet)
}

fn cmd_gen(cli: &Cli, name: Builtin, out: &Path) -> Result<(), Failure> {
    let write = |path: &Path, scenario: &Scenario| -> Result<(), Failure> {
        std::fs::write(path, scenario.render())
            .map_err(|e| Failure(EXIT_ERROR, format!("writing {}: {e}", path.display())))?;
        if !cli.quiet {
            println!("wrote {}", path.display());
        }
        Ok(())
    };
    match name {
        Builtin::Fig5 => write(out, &gen::fig5()),
        Builtin::Scenario3node => write(out, &gen::scenario3node()),
        Builtin::DelaySweep => {
            std::fs::create_dir_all(out)?;
            for (stem, scenario) in gen::delay_sweep() {
                write(&out.join(format!("{stem}.scn")), &scenario)?;
            }
            Ok(())
        }
    }
}

fn cmd_fuzz(cli: &Cli, count: usize, max_nodes: usize, seed: u64) -> Result<(), Failure> {
    if count == 0 || max_nodes == 0 {
        return Err(Failure(
            EXIT_ERROR,
            "count and max_nodes must be positive".into(),
        ));
    }
    match fuzz(count, max_nodes, seed) {
        Ok(n) => {
            if !cli.quiet {
                println!("fuzz: {n} scenarios, max {max_nodes} nodes, seed {seed}: PASS");
            }
            Ok(())
        }
        Err(failure) => {
            println!(
                "fuzz: scenario {} (reproduce: fuzz 1 {max_nodes} {}) FAILED: {}",
                failure.index, failure.seed, failure.reason
            );
            println!("--- scenario ---");
            print!("{}", failure.scenario.render());
            Err(Failure(EXIT_VIOLATION, String::new()))
        }
    }
}

fn cmd_audit(cli: &Cli, trace_path: &Path, scenario_path: &Path) -> Result<(), Failure> {
    let scenario = load_scenario(scenario_path)?;
    let trace = Trace::load(trace_path)?;
    audit_verdict(&audit_confidentiality(&trace, &scenario), cli.quiet)
}
