use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gridpi_core::grid::{check_invariants, classify_phase, encode_grid, GridError};
use gridpi_core::sim::{
    emit_trace, explore, load_scenario, read_scenario, read_trace, run, run_interactive, verify, ExploreOptions,
    Scenario, SimError, Trace, VerificationReport,
};

/// Simulate and check grid resource assignment encoded as higher-order
/// pi-calculus processes.
#[derive(Parser)]
#[command(name = "gridpi", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the static invariants of a scenario.
    Check { scenario: PathBuf },
    /// Run with a seeded random scheduler.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Write the JSONL trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Step through a run, choosing each redex.
    Step {
        scenario: PathBuf,
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Explore every reachable state breadth-first.
    Explore {
        scenario: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, default_value_t = 1_000_000)]
        max_states: usize,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Re-check a stored trace.
    Verify { trace: PathBuf },
    /// Print the process definitions and initial term for a scenario.
    Encode { scenario: PathBuf },
}

/// A finished command: whether every check passed.
type Outcome = Result<bool, SimError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.cmd {
        Cmd::Check { scenario } => check(&scenario),
        Cmd::Run {
            scenario,
            seed,
            max_steps,
            trace,
        } => load(&scenario).and_then(|mut s| {
            if let Some(v) = seed {
                s.options.seed = v;
            }
            if let Some(v) = max_steps {
                s.options.max_steps = v;
            }
            if trace.is_some() {
                s.options.trace = trace;
            }
            run_cmd(&s)
        }),
        Cmd::Step { scenario, max_steps } => load(&scenario).and_then(|mut s| {
            if let Some(v) = max_steps {
                s.options.max_steps = v;
            }
            step_cmd(&s)
        }),
        Cmd::Explore {
            scenario,
            depth,
            workers,
            max_states,
            json,
        } => load(&scenario).and_then(|s| {
            let opts = ExploreOptions {
                depth: depth.unwrap_or(s.options.depth),
                workers,
                max_states,
            };
            explore_cmd(&s, &opts, json)
        }),
        Cmd::Verify { trace } => read_trace(&trace).and_then(|t| verify_cmd(&t)),
        Cmd::Encode { scenario } => read_scenario(&scenario).and_then(|s| {
            let enc = encode_grid(&s.config)?;
            print!("{}", enc.prelude());
            Ok(true)
        }),
    };
    match out {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(SimError::Grid(GridError::InvariantViolation(r))) => {
            for v in &r.violations {
                eprintln!("{}: {}", v.invariant, v.message);
            }
            eprintln!("gridpi: scenario refused");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("gridpi: {e}");
            ExitCode::from(2)
        }
    }
}

fn load(path: &Path) -> Result<Scenario, SimError> {
    let (s, warnings) = load_scenario(path)?;
    for w in warnings {
        eprintln!("warning: {}: {}", w.invariant, w.message);
    }
    Ok(s)
}

fn check(path: &Path) -> Outcome {
    let s = read_scenario(path)?;
    let r = check_invariants(&s.config);
    for v in &r.violations {
        println!("{}: {}", v.invariant, v.message);
    }
    if r.is_empty() {
        println!("ok: all invariants hold");
    }
    Ok(r.is_empty())
}

fn print_verification(v: &VerificationReport) {
    for m in v.monotonicity.iter().chain(&v.exclusivity).chain(&v.invariants) {
        println!("violation: {m}");
    }
    println!(
        "verify: {} snapshots, {}",
        v.snapshots,
        if v.passed() { "pass" } else { "FAIL" }
    );
}

fn run_cmd(s: &Scenario) -> Outcome {
    let r = run(s)?;
    let trace = Trace::from_run(s, &r);
    if let Some(p) = &s.options.trace {
        emit_trace(&trace, p)?;
    }
    println!("seed {}: {} steps, stopped: {:?}", s.options.seed, r.events.len(), r.stop);
    for (u, labels) in classify_phase(&r.snapshots()) {
        println!("  {u}: {}", labels.join(" -> "));
    }
    let v = verify(&trace)?;
    print_verification(&v);
    Ok(v.passed())
}

fn step_cmd(s: &Scenario) -> Outcome {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut output = BufWriter::new(io::stdout());
    let r = run_interactive(s, &mut input, &mut output)?;
    let v = verify(&Trace::from_run(s, &r))?;
    drop(output);
    print_verification(&v);
    Ok(v.passed())
}

fn explore_cmd(s: &Scenario, opts: &ExploreOptions, json: bool) -> Outcome {
    let (r, elapsed) = explore(s, opts)?;
    let ok = r.violations() == 0 && r.deadlocks.is_empty() && r.livelocks.is_empty();
    if json {
        let mut v = serde_json::to_value(&r).expect("report serialises");
        v["elapsed_ms"] = (elapsed.as_millis() as u64).into();
        let mut out = io::stdout().lock();
        serde_json::to_writer_pretty(&mut out, &v).expect("stdout");
        writeln!(out).ok();
        return Ok(ok);
    }
    println!("states:        {}", r.states);
    println!("transitions:   {}", r.transitions);
    println!("depth reached: {}", r.depth_reached);
    if r.depth_exhausted {
        println!("depth bound {} exhausted: results are partial", opts.depth);
    }
    if r.truncated {
        println!("state cap {} hit: results are partial", opts.max_states);
    }
    match &r.delivered_all {
        Some(w) => println!("delivered-all: reachable in {} steps", w.path.len()),
        None => println!("delivered-all: not reached"),
    }
    println!("deadlocks:     {}", r.deadlocks.len());
    for d in r.deadlocks.iter().take(5) {
        println!("  state {} path {:?}", d.state, d.path);
    }
    println!("livelocks:     {}", r.livelocks.len());
    for l in &r.livelocks {
        println!("  {} states, entered at state {} path {:?}", l.states, l.witness.state, l.witness.path);
    }
    println!("invariant violations:   {}", r.invariant_failures.len());
    println!("exclusivity violations: {}", r.exclusivity_failures.len());
    for f in r.invariant_failures.iter().chain(&r.exclusivity_failures).take(5) {
        println!("  state {}: {}", f.witness.state, f.messages.join("; "));
    }
    println!("elapsed: {:.3}s", elapsed.as_secs_f64());
    Ok(ok)
}

fn verify_cmd(t: &Trace) -> Outcome {
    let v = verify(t)?;
    print_verification(&v);
    Ok(v.passed())
}
