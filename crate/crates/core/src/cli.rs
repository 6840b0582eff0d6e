//! Command-line front end: checked runs, baseline benchmarks and a small
//! step-by-step demo.
//!
//! Exit codes: 0 when every check passed, 1 when a run hit a violation,
//! 2 for usage errors (including unwritable output paths).

use std::fmt::{Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use thiserror::Error;

use crate::bench::{bench, BenchSide};
use crate::dot;
use crate::fraction::RebalanceFraction;
use crate::node::NodeRef;
use crate::tree::TimerTree;
use crate::validation::height_bound;
use crate::workload::{gen, run, RunReport, StepSample, Violation, Workload, WorkloadKind};

#[derive(Debug, Parser)]
#[command(
    name = "timer-tree",
    version,
    about = "Timer-scheduled balanced BST: checked runs, benchmarks, demo"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Replay a workload with every invariant checked; optionally write a CSV trace.
    Run(RunArgs),
    /// Time the timer tree against a naive BST on the same workload.
    Bench(BenchArgs),
    /// Insert a few ascending keys and print the tree and its timers after each step.
    Demo(DemoArgs),
}

#[derive(Debug, Args)]
pub struct WorkloadArgs {
    /// ascending, descending, random-insert, random-mixed, zigzag or churn
    #[arg(long, default_value = "random-mixed")]
    pub workload: WorkloadKind,
    /// Number of keys (operations, for random-insert and random-mixed).
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    /// Delete probability for random-mixed.
    #[arg(long, default_value_t = 0.4)]
    pub p_delete: f64,
    /// Delete/insert pairs after the initial fill, for churn. Defaults to n.
    #[arg(long)]
    pub churn: Option<usize>,
}

impl WorkloadArgs {
    fn kind(&self) -> Result<WorkloadKind, CliError> {
        Ok(match self.workload {
            WorkloadKind::RandomMixed { .. } => {
                if !(0.0..=1.0).contains(&self.p_delete) {
                    return Err(CliError::Usage(format!(
                        "--p-delete must lie in [0, 1], got {}",
                        self.p_delete
                    )));
                }
                WorkloadKind::RandomMixed {
                    p_delete: self.p_delete,
                }
            }
            WorkloadKind::Churn { .. } => WorkloadKind::Churn {
                m: self.churn.unwrap_or(self.n),
            },
            other => other,
        })
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub workload: WorkloadArgs,
    /// Seeds to run; repeat or comma-separate for several runs.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    pub seed: Vec<u64>,
    /// Rebalance fractions as NUM/DEN; repeat or comma-separate for several runs.
    #[arg(long, value_delimiter = ',', default_value = "1/2")]
    pub k: Vec<RebalanceFraction>,
    /// Audit the whole tree every this many steps; 0 audits only at the end.
    #[arg(long, default_value_t = 1)]
    pub check_every: usize,
    /// Per-operation trace. With several runs each file gets a `.seedS.kN-D` suffix.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Final tree (or the tree at a violation) in Graphviz format.
    #[arg(long)]
    pub dot: Option<PathBuf>,
    /// Worker threads for independent runs.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    None,
    Naive,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub workload: WorkloadArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "1/2")]
    pub k: RebalanceFraction,
    #[arg(long, value_enum, default_value_t = Baseline::Naive)]
    pub baseline: Baseline,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long, default_value_t = 7)]
    pub n: usize,
    #[arg(long, default_value = "1/2")]
    pub k: RebalanceFraction,
    /// Also write the final tree in Graphviz format.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
}

impl CliError {
    fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Self + '_ {
        move |source| Self::Io {
            path: path.to_owned(),
            source,
        }
    }

    fn csv(path: &Path) -> impl FnOnce(csv::Error) -> Self + '_ {
        move |source| Self::Csv {
            path: path.to_owned(),
            source,
        }
    }
}

/// Parses `args` (program name first) and executes the command.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

/// Runs a parsed command. `Ok(false)` means some run hit a violation.
pub fn execute(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Run(args) => run_command(&args),
        Command::Bench(args) => bench_command(&args).map(|()| true),
        Command::Demo(args) => demo_command(&args).map(|()| true),
    }
}

fn output_path(base: &Path, suffix: Option<&str>) -> PathBuf {
    let Some(suffix) = suffix else {
        return base.to_owned();
    };
    let stem = base.file_stem().unwrap_or_default().to_string_lossy();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{suffix}"),
    };
    base.with_file_name(name)
}

fn write_csv(path: &Path, samples: &[StepSample]) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path).map_err(CliError::csv(path))?;
    writer
        .write_record(StepSample::CSV_HEADER)
        .map_err(CliError::csv(path))?;
    for sample in samples {
        writer
            .write_record(sample.csv_record())
            .map_err(CliError::csv(path))?;
    }
    writer.flush().map_err(CliError::io(path))
}

struct RunJob {
    seed: u64,
    k: RebalanceFraction,
    workload: Workload,
}

fn run_command(args: &RunArgs) -> Result<bool, CliError> {
    if args.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    let kind = args.workload.kind()?;
    let jobs: Vec<RunJob> = args
        .seed
        .iter()
        .flat_map(|&seed| {
            let workload = gen(kind, args.workload.n, seed);
            args.k.iter().map(move |&k| RunJob {
                seed,
                k,
                workload: workload.clone(),
            })
        })
        .collect();
    let many = jobs.len() > 1;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} worker threads: {e}", args.jobs)))?;
    let results: Vec<Result<RunReport, Violation>> = pool.install(|| {
        jobs.par_iter()
            .map(|job| run(&job.workload, job.k, args.check_every))
            .collect()
    });

    let mut clean = true;
    for (job, result) in jobs.iter().zip(results) {
        let suffix = many.then(|| format!("seed{}.k{}-{}", job.seed, job.k.num(), job.k.den()));
        let label = format!(
            "{} n={} seed={} k={}",
            kind, args.workload.n, job.seed, job.k
        );
        match result {
            Ok(report) => {
                println!(
                    "{label}: ok size={} height={} max_height={} bound={} rebuilds={} rebuilt_nodes={} decrements={}",
                    report.final_size,
                    report.final_height,
                    report.max_height,
                    report.final_height_bound,
                    report.counters.total_rebuilds,
                    report.counters.total_rebuilt_nodes,
                    report.counters.total_decrements,
                );
                if let Some(csv) = &args.csv {
                    write_csv(&output_path(csv, suffix.as_deref()), &report.samples)?;
                }
                if let Some(path) = &args.dot {
                    let tree = replay(&job.workload, job.k);
                    let path = output_path(path, suffix.as_deref());
                    fs::write(&path, dot::to_dot(&tree)).map_err(CliError::io(&path))?;
                }
            }
            Err(violation) => {
                clean = false;
                eprintln!("{label}: VIOLATION {violation}");
                match &args.dot {
                    Some(path) => {
                        let path = output_path(path, suffix.as_deref());
                        fs::write(&path, &violation.dot).map_err(CliError::io(&path))?;
                        eprintln!("tree at failure written to {}", path.display());
                    }
                    None => eprint!("{}", violation.dot),
                }
            }
        }
    }
    Ok(clean)
}

fn replay(workload: &Workload, k: RebalanceFraction) -> TimerTree<i64> {
    let mut tree = TimerTree::new(k);
    for op in &workload.ops {
        match op.kind {
            crate::workload::OpKind::Insert => {
                tree.insert(op.key);
            }
            crate::workload::OpKind::Delete => {
                tree.delete(&op.key);
            }
            crate::workload::OpKind::Contains => {}
        }
    }
    tree
}

fn bench_command(args: &BenchArgs) -> Result<(), CliError> {
    let kind = args.workload.kind()?;
    let workload = gen(kind, args.workload.n, args.seed);
    let report = bench(&workload, args.k, args.baseline == Baseline::Naive);

    println!(
        "workload {kind} n={} seed={} k={} ops={}",
        args.workload.n,
        args.seed,
        args.k,
        workload.ops.len()
    );
    println!(
        "{:<8} {:>10} {:>10} {:>8} {:>12}",
        "tree", "size", "height", "bound", "time_ms"
    );
    let row = |name: &str, side: &BenchSide, bound: &dyn Display| {
        println!(
            "{:<8} {:>10} {:>10} {:>8} {:>12.3}",
            name,
            side.final_size,
            side.final_height,
            bound,
            side.elapsed.as_secs_f64() * 1e3
        );
    };
    row("timer", &report.timer_tree, &report.height_bound);
    if let Some(naive) = &report.naive {
        row("naive", naive, &"-");
    }
    Ok(())
}

/// Renders a subtree top-down with box-drawing connectors, one node per line.
pub fn render_tree<K: Display>(root: Option<NodeRef<'_, K>>) -> String {
    fn line<K: Display>(node: NodeRef<'_, K>, out: &mut String) {
        let _ = writeln!(
            out,
            "{} (t={}/{})",
            node.key(),
            node.timer(),
            node.timer_start()
        );
    }
    fn children<K: Display>(node: NodeRef<'_, K>, prefix: &str, out: &mut String) {
        let kids: Vec<_> = [(node.left(), "L"), (node.right(), "R")]
            .into_iter()
            .filter_map(|(child, side)| child.map(|c| (c, side)))
            .collect();
        for (i, (child, side)) in kids.iter().enumerate() {
            let last = i + 1 == kids.len();
            let _ = write!(out, "{prefix}{} {side} ", if last { "└──" } else { "├──" });
            line(*child, out);
            let deeper = format!("{prefix}{}", if last { "    " } else { "│   " });
            children(*child, &deeper, out);
        }
    }
    let mut out = String::new();
    match root {
        None => out.push_str("(empty)\n"),
        Some(root) => {
            line(root, &mut out);
            children(root, "", &mut out);
        }
    }
    out
}

fn demo_command(args: &DemoArgs) -> Result<(), CliError> {
    let mut tree = TimerTree::new(args.k);
    println!("ascending inserts 1..={} with k = {}", args.n, args.k);
    for key in 1..=args.n as i64 {
        let outcome = tree.insert_traced(key);
        let size = tree.len() as u64;
        print!("\ninsert {key}: ");
        match outcome.rebuild {
            Some(info) => println!(
                "timer hit 0 at depth {}, rebuilt {} nodes (timer start was {})",
                info.depth, info.subtree_size, info.timer0
            ),
            None => println!("no rebuild"),
        }
        println!(
            "size {size}, height {}, bound {}",
            tree.height(),
            height_bound(size, args.k)
        );
        print!("{}", render_tree(tree.root()));
    }
    if let Some(path) = &args.dot {
        fs::write(path, dot::to_dot(&tree)).map_err(CliError::io(path))?;
    }
    Ok(())
}
