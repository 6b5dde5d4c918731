mod checks;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use coopgeo::metrics::{compute_metrics, to_csv};
use coopgeo::routing::route;
use coopgeo::sim::{
    gen_random_topology, point_config, run_scenario, stream_id, substream, Arm, Scenario, ScenarioKind,
};
use coopgeo::Error;

#[derive(Parser)]
#[command(name = "coopgeo", version, about = "Cooperative geographic routing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Topologies for fig5, packets per topology for the protocol sweeps.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// CSV output path; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Scenario file of `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also run the direct-transmission baseline.
    #[arg(long, global = true)]
    baseline: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// SER of every relay rank, a random relay and direct transmission.
    Fig5,
    /// Packet error rate versus neighbor count.
    Per,
    /// Collision probability and throughput versus T_max.
    Tmax,
    /// Throughput versus constellation size.
    Throughput,
    /// Frame-by-frame trace of one route.
    RouteTrace,
    /// Runs the invariant suite.
    Validate,
}

impl Command {
    fn kind(self) -> ScenarioKind {
        match self {
            Command::Fig5 => ScenarioKind::RelayOrdering,
            Command::Per | Command::RouteTrace | Command::Validate => ScenarioKind::PerVsDensity,
            Command::Tmax => ScenarioKind::TmaxSweep,
            Command::Throughput => ScenarioKind::ThroughputVsConstellation,
        }
    }
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_)
            | Error::InvalidParameter { .. }
            | Error::InvalidConstellation(_)
            | Error::InvalidSubAreaCount(_) => Failure::Config(e.to_string()),
            e => Failure::Runtime(e.to_string()),
        }
    }
}

fn load_scenario(cmd: Command, common: &Common) -> Result<Scenario, Failure> {
    let kind = cmd.kind();
    let mut s = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
            let s = Scenario::parse_with_default(&text, kind)?;
            let fits = s.kind == kind
                || (matches!(cmd, Command::RouteTrace | Command::Validate) && s.kind != ScenarioKind::RelayOrdering);
            if !fits {
                return Err(Failure::Config(format!("key `kind`: `{}` does not fit this subcommand", s.kind)));
            }
            s
        }
        None => Scenario::preset(kind),
    };
    if let Some(seed) = common.seed {
        s.seed = seed;
    }
    if let Some(trials) = common.trials {
        s.trials = trials;
    }
    if common.baseline {
        s.baseline = true;
    }
    if matches!(cmd, Command::RouteTrace) {
        if common.config.is_none() {
            s.neighbors = vec![10];
        }
        s.neighbors.truncate(1);
    }
    s.validate()?;
    Ok(s)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| Failure::Runtime(e.to_string())),
    }
}

/// Trace of one packet over topology 0 of the first sweep point.
fn route_trace(s: &Scenario) -> Result<String, Failure> {
    let x = s.axis_values()[0];
    let (cfg, spec) = point_config(s, x)?;
    let p = gen_random_topology(&spec, &mut substream(s.seed, stream_id(0, 0, 0)))?;
    let mut out = String::from("# coopgeo route trace\n");
    for line in s.to_text().lines() {
        let _ = writeln!(out, "# {line}");
    }
    let _ = writeln!(out, "# nodes = {}, source = {}, destination = {}", p.topology.len(), p.source, p.dest);
    out.push_str("# time_us is measured from the start of the attempt's DATA frame\n");
    out.push_str("arm,attempt,start_us,time_us,kind,src,dst,outcome\n");
    let arms: &[Arm] = if s.baseline { &[Arm::CoopGeo, Arm::Baseline] } else { &[Arm::CoopGeo] };
    let mut summary = String::new();
    for &arm in arms {
        let arm_cfg = if arm == Arm::Baseline { cfg.baseline() } else { cfg };
        let r = route(&p.topology, p.source, p.dest, &arm_cfg, &mut substream(s.seed, stream_id(0, 0, 1)));
        let mut start = 0.0;
        for (k, attempt) in r.attempts.iter().enumerate() {
            for rec in &attempt.trace {
                let _ = writeln!(out, "{},{k},{start:.3},{rec}", arm.name());
            }
            start += attempt.elapsed.0;
        }
        let path: Vec<String> = r.path(p.source).iter().map(|v| v.to_string()).collect();
        let status = match r.failure_reason {
            None => "delivered".to_string(),
            Some(f) => format!("failed ({f:?})"),
        };
        let _ = writeln!(summary, "# {}: {status}, path {}, elapsed {:.3} us", arm.name(), path.join(" "), r.elapsed.0);
    }
    out.push_str(&summary);
    Ok(out)
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let s = load_scenario(cli.command, &cli.common)?;
    let out = cli.common.out.as_deref();
    match cli.command {
        Command::Validate => {
            let report = checks::run_all(s.seed);
            emit(out, &report.to_string())?;
            Ok(report.passed())
        }
        Command::RouteTrace => {
            emit(out, &route_trace(&s)?)?;
            Ok(true)
        }
        _ => {
            let result = run_scenario(&s)?;
            emit(out, &to_csv(&compute_metrics(&result)))?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
