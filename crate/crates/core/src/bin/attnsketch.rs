//! Experiment CLI: generate instances, run estimators against exact oracles,
//! decode planted bits, cluster point sets, and gate statistical checks.
//!
//! Exit codes: 0 success, 1 usage error, 2 invariant violation during a run,
//! 3 statistical/acceptance threshold failure in --check mode.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use attnsketch_core::attention::{
    exact_attention, sliding_window_attention_exact, KvCache, SlidingWindowSpec,
};
use attnsketch_core::checks;
use attnsketch_core::cluster::{covering_formula, greedy_cluster};
use attnsketch_core::error::Error;
use attnsketch_core::instances::{
    build_benign, build_index_instance, build_time_family, build_time_sigma,
    build_window_instance, decode_instance, BitMatrix, HardInstance, InstanceKind, OracleNoise,
};
use attnsketch_core::iofmt::{read_instance, write_instance};
use attnsketch_core::jl::dim_for;
use attnsketch_core::randkit::{chacha, derive_seed, sample_unit_ball};
use attnsketch_core::report::{RunReport, CSV_HEADER};
use attnsketch_core::sampling::ScalarStreamState;
use attnsketch_core::vector::Vector;
use attnsketch_core::window::{boost_config, boosted_estimate, WindowEnsemble, WindowState};

#[derive(Parser)]
#[command(name = "attnsketch", version, about = "Streaming attention estimators and hard-instance experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance file.
    Gen(GenArgs),
    /// Stream an instance through an estimator and compare with the oracle.
    Run(RunArgs),
    /// Decode planted bits from an index or window reduction instance.
    Decode(DecodeArgs),
    /// Greedily cluster a point set and compare against the covering bound.
    Cluster(ClusterArgs),
    /// Run the statistical check suites.
    Check(CheckArgs),
}

#[derive(Args)]
struct GenArgs {
    /// index | window | time-family | time-sigma | benign
    #[arg(long)]
    kind: String,
    #[arg(long)]
    n: usize,
    /// Embedding dimension; defaults to the preservation bound for
    /// index/window kinds.
    #[arg(long)]
    d: Option<usize>,
    /// Window width (window kind only).
    #[arg(long)]
    w: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Planted position for time-family instances (1-based).
    #[arg(long)]
    planted: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    /// exact | window | window-boosted | scalar-gumbel
    #[arg(long)]
    estimator: String,
    /// Window width; defaults to the instance's width if it has one.
    #[arg(long)]
    w: Option<usize>,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Value-magnitude bound for boosting; defaults to the stream's max.
    #[arg(long)]
    vmax: Option<f64>,
    /// Mean lower bound for relative-error accounting.
    #[arg(long, default_value_t = 1.0)]
    mlb: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Comma-separated 1-based query steps, or "final".
    #[arg(long, default_value = "final")]
    steps: String,
    /// CSV output path; stdout when omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Gate estimator guarantees as exit codes.
    #[arg(long, default_value_t = false)]
    check: bool,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Decode a single 1-based row; all rows when omitted.
    #[arg(long)]
    row: Option<usize>,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// none | adversarial | random
    #[arg(long, default_value = "none")]
    noise: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    check: bool,
}

#[derive(Args)]
struct ClusterArgs {
    /// Text file of whitespace-separated coordinates, one point per line.
    #[arg(long, conflicts_with = "random")]
    points: Option<PathBuf>,
    /// Generate this many uniform unit-ball points instead.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    check: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// eq3 | window-unbiased | window-space | boost | lazy-gumbel |
    /// scalar-stream | jl | decode-index | decode-margin | decode-window |
    /// time-family | cluster | all
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = checks::defaults::MASTER_SEED)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Invariant(String),
    Threshold(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Invariant(_) => 2,
            Failure::Threshold(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Invariant(m) | Failure::Threshold(m) => m,
        }
    }
}

fn usage(e: Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn invariant(e: Error) -> Failure {
    Failure::Invariant(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Run(args) => cmd_run(args),
        Command::Decode(args) => cmd_decode(args),
        Command::Cluster(args) => cmd_cluster(args),
        Command::Check(args) => cmd_check(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<(), Failure> {
    let kind = InstanceKind::parse(&args.kind).map_err(usage)?;
    let inst = match kind {
        InstanceKind::IndexReduction => {
            let d = match args.d {
                Some(d) => d,
                None => dim_for(args.n, args.eps).map_err(usage)?,
            };
            let mut rng = chacha(derive_seed(args.seed, 1));
            let bits = BitMatrix::random(args.n, d, &mut rng).map_err(usage)?;
            build_index_instance(&bits, args.eps, args.seed).map_err(usage)?
        }
        InstanceKind::WindowReduction => {
            let w = args.w.ok_or_else(|| Failure::Usage("window instances need --w".into()))?;
            let d = match args.d {
                Some(d) => d,
                None => dim_for(args.n, args.eps).map_err(usage)?,
            };
            let mut rng = chacha(derive_seed(args.seed, 1));
            let bits = BitMatrix::random(w, d, &mut rng).map_err(usage)?;
            build_window_instance(&bits, args.n, w, args.eps, args.eta, args.seed).map_err(usage)?
        }
        InstanceKind::TimeFamily => {
            let i = args
                .planted
                .ok_or_else(|| Failure::Usage("time-family instances need --planted".into()))?;
            let d = args.d.ok_or_else(|| Failure::Usage("time-family instances need --d".into()))?;
            build_time_family(args.n, d, i).map_err(usage)?
        }
        InstanceKind::TimeSigma => {
            let d = args.d.ok_or_else(|| Failure::Usage("time-sigma instances need --d".into()))?;
            build_time_sigma(args.n, d).map_err(usage)?
        }
        InstanceKind::Benign => {
            let d = args.d.ok_or_else(|| Failure::Usage("benign instances need --d".into()))?;
            build_benign(args.n, d, args.seed).map_err(usage)?
        }
    };
    write_instance(&args.out, &inst).map_err(invariant)?;
    println!(
        "wrote {} ({}, n={}, d={}, C={})",
        args.out.display(),
        inst.kind.name(),
        inst.n,
        inst.d,
        inst.c
    );
    Ok(())
}

fn parse_steps(arg: &str, n: usize) -> Result<Vec<usize>, Failure> {
    if arg == "final" {
        return Ok(vec![n]);
    }
    let mut steps = Vec::new();
    for tok in arg.split(',') {
        let s: usize = tok
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("bad step '{tok}'")))?;
        if s == 0 || s > n {
            return Err(Failure::Usage(format!("step {s} out of range 1..={n}")));
        }
        steps.push(s);
    }
    if steps.is_empty() {
        return Err(Failure::Usage("no query steps given".into()));
    }
    Ok(steps)
}

/// Oracle at a query step: sliding-window attention when a width applies,
/// otherwise full attention with the step's own query.
fn oracle_at(inst: &HardInstance, w: Option<usize>, step: usize) -> Result<Vector, Error> {
    match w {
        Some(w) => {
            let spec = SlidingWindowSpec::new(w)?;
            sliding_window_attention_exact(&inst.stream, spec, step)
        }
        None => {
            let mut cache = KvCache::new(inst.d)?;
            for t in &inst.stream[..step] {
                cache.append_triple(t)?;
            }
            exact_attention(&cache, &inst.stream[step - 1].q)
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let inst = read_instance(&args.instance).map_err(usage)?;
    let estimator = args.estimator.as_str();
    if !["exact", "window", "window-boosted", "scalar-gumbel"].contains(&estimator) {
        return Err(Failure::Usage(format!("unknown estimator '{estimator}'")));
    }
    // compatibility gates before any work
    if estimator == "scalar-gumbel" && inst.d != 1 {
        return Err(Failure::Usage(format!(
            "scalar-gumbel needs a d=1 instance, got d={}",
            inst.d
        )));
    }
    let width = args.w.or(inst.w);
    if matches!(estimator, "window" | "window-boosted") && width.is_none() {
        return Err(Failure::Usage("window estimators need --w (or a window instance)".into()));
    }
    let steps = parse_steps(&args.steps, inst.n)?;
    let instance_id = inst.id();

    let v_max = args.vmax.unwrap_or_else(|| {
        inst.stream
            .iter()
            .flat_map(|t| t.v.as_slice().iter().map(|v| v.abs()))
            .fold(0.0f64, f64::max)
            .max(1e-12)
    });

    let trial_reports: Vec<Result<Vec<RunReport>, Error>> = (0..args.trials)
        .into_par_iter()
        .map(|trial| -> Result<Vec<RunReport>, Error> {
            let trial_seed = derive_seed(args.seed, trial as u64);
            let started = Instant::now();
            let mut reports = Vec::new();
            match estimator {
                "exact" => {
                    for &s in &steps {
                        let exact = oracle_at(&inst, width, s)?;
                        let stored = 2 * s;
                        reports.push(RunReport::from_comparison(
                            &instance_id,
                            estimator,
                            s,
                            exact.clone(),
                            exact,
                            args.mlb,
                            stored,
                            inst.d,
                            started.elapsed().as_millis(),
                            trial_seed,
                        ));
                    }
                }
                "window" => {
                    let w = width.expect("gated above");
                    let spec = SlidingWindowSpec::new(w)?;
                    let mut rng = chacha(trial_seed);
                    let mut state = WindowState::new(spec, inst.d)?;
                    for (i, t) in inst.stream.iter().enumerate() {
                        state.process(t, &mut rng)?;
                        let step = i + 1;
                        if steps.contains(&step) {
                            let estimate = state.sample(&t.q, &mut rng)?;
                            let exact = oracle_at(&inst, Some(w), step)?;
                            reports.push(RunReport::from_comparison(
                                &instance_id,
                                estimator,
                                step,
                                exact,
                                estimate,
                                args.mlb,
                                state.stored_vector_count(),
                                inst.d,
                                started.elapsed().as_millis(),
                                trial_seed,
                            ));
                        }
                    }
                }
                "window-boosted" => {
                    let w = width.expect("gated above");
                    let spec = SlidingWindowSpec::new(w)?;
                    let cfg = boost_config(args.eps, args.delta, v_max, args.mlb)?;
                    let mut ensemble =
                        WindowEnsemble::new(spec, inst.d, cfg.replicas(), trial_seed)?;
                    for (i, t) in inst.stream.iter().enumerate() {
                        ensemble.process(t)?;
                        let step = i + 1;
                        if steps.contains(&step) {
                            let estimate = boosted_estimate(&mut ensemble, &t.q, &cfg)?;
                            let exact = oracle_at(&inst, Some(w), step)?;
                            reports.push(RunReport::from_comparison(
                                &instance_id,
                                estimator,
                                step,
                                exact,
                                estimate,
                                args.mlb,
                                ensemble.stored_vector_count_logical(),
                                inst.d,
                                started.elapsed().as_millis(),
                                trial_seed,
                            ));
                        }
                    }
                }
                "scalar-gumbel" => {
                    let mut rng = chacha(trial_seed);
                    let mut state = ScalarStreamState::new();
                    for (i, t) in inst.stream.iter().enumerate() {
                        state.update(t, &mut rng)?;
                        let step = i + 1;
                        if steps.contains(&step) {
                            let estimate = state.query(t.q[0], &mut rng)?;
                            let exact = oracle_at(&inst, None, step)?;
                            reports.push(RunReport::from_comparison(
                                &instance_id,
                                estimator,
                                step,
                                exact,
                                Vector::new(vec![estimate])?,
                                args.mlb,
                                state.stored_scalars(),
                                inst.d,
                                started.elapsed().as_millis(),
                                trial_seed,
                            ));
                        }
                    }
                }
                _ => unreachable!(),
            }
            Ok(reports)
        })
        .collect();

    let mut all_reports = Vec::new();
    for r in trial_reports {
        all_reports.extend(r.map_err(invariant)?);
    }

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for report in &all_reports {
        for row in report.csv_rows() {
            csv.push_str(&row);
            csv.push('\n');
        }
    }
    emit(&args.csv, &csv).map_err(invariant)?;

    let worst = all_reports.iter().map(|r| r.max_rel_error).fold(0.0f64, f64::max);
    eprintln!(
        "{} trials x {} steps on {}: worst max_rel_error {:.6}",
        args.trials,
        steps.len(),
        instance_id,
        worst
    );

    if args.check {
        match estimator {
            "window" => {
                let w = width.expect("gated above");
                if all_reports.iter().any(|r| r.stored_vector_count > 2 * w + 1) {
                    return Err(Failure::Invariant("window space bound 2W+1 violated".into()));
                }
            }
            "scalar-gumbel" => {
                for r in &all_reports {
                    let limit = 8.0 * (r.step as f64).sqrt();
                    if r.stored_vector_count as f64 > limit {
                        return Err(Failure::Invariant(format!(
                            "scalar space bound violated: {} scalars at step {}",
                            r.stored_vector_count, r.step
                        )));
                    }
                }
            }
            "window-boosted" => {
                if worst > args.eps {
                    return Err(Failure::Threshold(format!(
                        "boosted relative error {worst:.6} exceeds eps {}",
                        args.eps
                    )));
                }
            }
            "exact" if worst > 0.0 => {
                return Err(Failure::Invariant("exact estimator disagrees with oracle".into()));
            }
            _ => {}
        }
    }
    Ok(())
}

fn cmd_decode(args: DecodeArgs) -> Result<(), Failure> {
    let inst = read_instance(&args.instance).map_err(usage)?;
    if !matches!(inst.kind, InstanceKind::IndexReduction | InstanceKind::WindowReduction) {
        return Err(Failure::Usage(format!(
            "decode needs an index or window instance, got {}",
            inst.kind.name()
        )));
    }
    let noise = match args.noise.as_str() {
        "none" => OracleNoise::None,
        "adversarial" => OracleNoise::Adversarial,
        "random" => OracleNoise::Seeded(args.seed),
        other => return Err(Failure::Usage(format!("unknown noise mode '{other}'"))),
    };
    let rows_total = match inst.kind {
        InstanceKind::WindowReduction => inst.w.unwrap_or(0),
        _ => inst.n,
    };
    if let Some(r) = args.row {
        if r == 0 || r > rows_total {
            return Err(Failure::Usage(format!("row {r} out of range 1..={rows_total}")));
        }
    }

    let report = decode_instance(&inst, args.eta, noise).map_err(invariant)?;
    let bits = inst.bits.as_ref().expect("decodable instances carry bits");

    let mut csv = String::from("instance_id,row,col,planted,readout,decoded,correct,jl_passed,seed\n");
    let mut shown_correct = 0usize;
    let mut shown_total = 0usize;
    for row in 1..=rows_total {
        if args.row.is_some_and(|r| r != row) {
            continue;
        }
        for col in 1..=inst.d {
            let planted = bits.get(row - 1, col - 1);
            let readout = report.readouts[(row - 1) * inst.d + (col - 1)];
            let correct = !report.failures.contains(&(row, col));
            let decoded = if correct { planted } else { 1 - planted };
            shown_total += 1;
            shown_correct += usize::from(correct);
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                inst.id(),
                row,
                col,
                planted,
                readout,
                decoded,
                correct,
                report.jl_passed,
                args.seed
            ));
        }
    }
    emit(&args.csv, &csv).map_err(invariant)?;
    eprintln!(
        "decoded {shown_correct}/{shown_total} bits (thresholds lo={:.6}, hi={:.6}; projection event {})",
        report.lo,
        report.hi,
        if report.jl_passed { "passed" } else { "FAILED" }
    );

    if args.check {
        if !report.jl_passed {
            return Err(Failure::Threshold(
                "projection event failed for this seed (expected rate <= 1/n)".into(),
            ));
        }
        if shown_correct != shown_total {
            return Err(Failure::Invariant(format!(
                "decode failed on {} bits despite projection success",
                shown_total - shown_correct
            )));
        }
    }
    Ok(())
}

fn cmd_cluster(args: ClusterArgs) -> Result<(), Failure> {
    let points: Vec<Vector> = if let Some(path) = &args.points {
        let text = fs::read_to_string(path).map_err(|e| Failure::Usage(e.to_string()))?;
        let mut pts = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let comps: Result<Vec<f64>, _> =
                line.split_whitespace().map(|t| t.parse::<f64>()).collect();
            let comps = comps
                .map_err(|_| Failure::Usage(format!("bad float on line {}", lineno + 1)))?;
            pts.push(Vector::new(comps).map_err(usage)?);
        }
        pts
    } else if let Some(count) = args.random {
        let d = args.d.ok_or_else(|| Failure::Usage("--random needs --d".into()))?;
        let mut rng = chacha(args.seed);
        (0..count)
            .map(|_| sample_unit_ball(d, &mut rng))
            .collect::<Result<_, _>>()
            .map_err(usage)?
    } else {
        return Err(Failure::Usage("need --points or --random".into()));
    };
    if points.is_empty() {
        return Err(Failure::Usage("no points to cluster".into()));
    }
    let d = points[0].dim();

    let assignment = greedy_cluster(&points, args.radius).map_err(usage)?;
    let count = assignment.cluster_count();
    let formula = covering_formula(d as u32, args.radius).map_err(usage)?;
    let slack = formula * 4.0f64.powi(d as i32);
    let passed = (count as f64) <= slack;

    let mut csv = String::from("d,radius,points,clusters,covering_formula,slack_bound,passed,seed\n");
    csv.push_str(&format!(
        "{},{},{},{},{},{},{},{}\n",
        d,
        args.radius,
        points.len(),
        count,
        formula,
        slack,
        passed,
        args.seed
    ));
    emit(&args.csv, &csv).map_err(invariant)?;
    eprintln!(
        "{} points in d={}: {} clusters at radius {} (covering formula {:.2}, slack bound {:.2})",
        points.len(),
        d,
        count,
        args.radius,
        formula,
        slack
    );
    if args.check && !passed {
        return Err(Failure::Threshold(format!(
            "cluster count {count} exceeds slackened covering bound {slack:.2}"
        )));
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<(), Failure> {
    let outcomes = checks::run_suite(&args.suite, args.seed).map_err(usage)?;
    let mut failed = false;
    for o in &outcomes {
        println!("check {}: {} ({})", o.name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed |= !o.passed;
    }
    if failed {
        return Err(Failure::Threshold("one or more checks failed".into()));
    }
    Ok(())
}

fn emit(path: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match path {
        Some(p) => {
            fs::write(p, content)?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}
