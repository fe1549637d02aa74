//! `vecbal`: generate, partition, select, and verify balanced vector instances.
//!
//! Exit codes: 0 when the result meets its bound, 1 when a bound is
//! violated, 2 on usage or input errors. `VECBAL_TOL` overrides the relative
//! slack (default `1e-6`) used when comparing against bounds.

mod files;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use vecbal::generate::{gen_sequence, gen_sets, CounterRng, Distribution};
use vecbal::r_partition::verify_partition_with;
use vecbal::selection::{k_subset_rounding, r_selection_bound, selection_report, subset_deviation};
use vecbal::{
    balanced_partition, c_table, r_selection, zero_sum_selection, DiscrepancyReport, NormKind,
    RPartition, Selection,
};

use files::{read_json, write_json, InstanceFile, InstanceKind, Params, ReportFile};

/// Input/usage failure; maps to exit code 2.
#[derive(Debug)]
pub struct Failure(String);

impl Failure {
    pub fn input(msg: impl Into<String>) -> Self {
        Failure(msg.into())
    }
}

impl From<vecbal::Error> for Failure {
    fn from(e: vecbal::Error) -> Self {
        Failure(e.to_string())
    }
}

#[derive(Parser)]
#[command(
    name = "vecbal",
    version,
    about = "Balanced partitions of vector sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sequence,
    Sets,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded random instance.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(short)]
        n: usize,
        #[arg(short)]
        d: usize,
        /// ball | signs | zerosum
        #[arg(long, default_value = "ball")]
        dist: String,
        #[arg(long, default_value = "l2")]
        norm: String,
        /// Comma-separated weights for --norm wdiag.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
        /// Members per set (sets kind).
        #[arg(long = "set-size", default_value_t = 3)]
        set_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Split a vector sequence into r balanced classes.
    Partition {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short = 'r', long = "classes")]
        classes: usize,
        #[arg(long)]
        rescale: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Choose r members per set (one per class), or a k-subset per set.
    Select {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(
            short = 'r',
            long = "classes",
            conflicts_with = "k",
            required_unless_present = "k"
        )]
        classes: Option<usize>,
        /// Pick k-subsets instead of an r-selection.
        #[arg(long)]
        k: Option<usize>,
        /// Require zero-sum sets and report raw class prefix sums.
        #[arg(long = "zero-sum", conflicts_with = "k")]
        zero_sum: bool,
        #[arg(long)]
        rescale: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check an assignment file against an instance.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        /// Result file holding `labels`, `chi`, or `subsets`.
        #[arg(long)]
        labels: PathBuf,
        #[arg(short = 'r', long = "classes")]
        classes: Option<usize>,
        #[arg(long)]
        rescale: bool,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print r, C(r), the chosen split, and C(r) + 1/r.
    CrTable {
        #[arg(long = "max", default_value_t = 16)]
        max: usize,
    },
    /// Time partitions and selections over generated instances.
    Bench {
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(short, default_value_t = 1000)]
        n: usize,
        #[arg(short, default_value_t = 4)]
        d: usize,
        #[arg(long, default_value = "l2")]
        norm: String,
        #[arg(short = 'r', long = "classes", default_value_t = 4)]
        classes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn slack() -> Result<f64, Failure> {
    match std::env::var("VECBAL_TOL") {
        Ok(s) => {
            s.parse::<f64>().ok().filter(|t| *t >= 0.0).ok_or_else(|| {
                Failure::input(format!("VECBAL_TOL={s:?} is not a nonnegative number"))
            })
        }
        Err(_) => Ok(vecbal::BOUND_SLACK),
    }
}

fn norm_arg(name: &str, weights: Option<Vec<f64>>) -> Result<NormKind, Failure> {
    Ok(NormKind::from_name(name, weights)?)
}

// Returns whether the result met its bound.
fn run(cmd: Command) -> Result<bool, Failure> {
    match cmd {
        Command::Gen {
            kind,
            n,
            d,
            dist,
            norm,
            weights,
            set_size,
            seed,
            output,
        } => {
            let norm_kind = norm_arg(&norm, weights.clone())?;
            let dist = Distribution::from_name(&dist)?;
            let mut inst = InstanceFile {
                kind: InstanceKind::Sequence,
                d,
                norm,
                weights,
                seed: Some(seed),
                vectors: None,
                sets: None,
            };
            match kind {
                Kind::Sequence => inst.vectors = Some(gen_sequence(n, d, &norm_kind, dist, seed)?),
                Kind::Sets => {
                    inst.kind = InstanceKind::Sets;
                    inst.sets = Some(gen_sets(n, set_size, d, &norm_kind, dist, seed)?);
                }
            }
            write_json(&inst, output.as_deref())?;
            Ok(true)
        }

        Command::Partition {
            input,
            classes,
            rescale,
            output,
        } => {
            let inst: InstanceFile = read_json(&input)?;
            let (seq, scale) = inst.sequence(rescale)?;
            let table = c_table(classes);
            let part = balanced_partition(&seq, classes, &table)?;
            let bound = table.c(classes) * seq.d() as f64;
            let report = verify_partition_with(&seq, &part, bound, slack()?)?;
            let mut file = ReportFile::new(
                &report,
                params(
                    "partition",
                    &inst,
                    Some(classes),
                    None,
                    rescale.then_some(scale),
                ),
            );
            file.labels = Some(part.labels.iter().map(|l| l + 1).collect());
            write_json(&file, output.as_deref())?;
            Ok(report.pass)
        }

        Command::Select {
            input,
            classes,
            k,
            zero_sum,
            rescale,
            output,
        } => {
            let inst: InstanceFile = read_json(&input)?;
            let (sets, scale) = inst.set_sequence(rescale)?;
            let scale = rescale.then_some(scale);
            let slack = slack()?;
            let d = sets.d() as f64;
            let file = if let Some(k) = k {
                let subsets = k_subset_rounding(&sets, k)?;
                let report = subset_deviation(&sets, &subsets)?.with_bound(2.0 * d, slack);
                let mut file =
                    ReportFile::new(&report, params("select", &inst, None, Some(k), scale));
                file.subsets = Some(subsets);
                file
            } else {
                let r = classes.expect("clap requires --classes without --k");
                let table = c_table(r);
                let (chi, report) = if zero_sum {
                    let z = zero_sum_selection(&sets, r, &table)?;
                    let report = z.report.with_bound(5.0 * d, slack);
                    (z.selection, report)
                } else {
                    let chi = r_selection(&sets, r, &table)?;
                    let bound = r_selection_bound(&sets, r, &table);
                    (
                        chi.clone(),
                        selection_report(&sets, &chi, true, bound)?.with_bound(bound, slack),
                    )
                };
                let mut p = params("select", &inst, Some(r), None, scale);
                p.zero_sum = zero_sum;
                let mut file = ReportFile::new(&report, p);
                file.chi = Some(chi.chi);
                file
            };
            write_json(&file, output.as_deref())?;
            Ok(file.pass)
        }

        Command::Verify {
            input,
            labels,
            classes,
            rescale,
            output,
        } => {
            let inst: InstanceFile = read_json(&input)?;
            let result: ReportFile = read_json(&labels)?;
            let file = verify(&inst, &result, classes, rescale)?;
            write_json(&file, output.as_deref())?;
            Ok(file.pass)
        }

        Command::CrTable { max } => {
            if max == 0 {
                return Err(Failure::input("--max must be at least 1"));
            }
            let table = c_table(max);
            println!("r\tC(r)\tr1\tr2\tC(r)+1/r");
            for r in 1..=max {
                let c = table.c(r);
                let split = if r >= 2 {
                    let (r1, r2) = table.split(r);
                    format!("{r1}\t{r2}")
                } else {
                    "-\t-".to_string()
                };
                println!("{r}\t{c:.17}\t{split}\t{:.17}", c + 1.0 / r as f64);
            }
            Ok(true)
        }

        Command::Bench {
            count,
            n,
            d,
            norm,
            classes,
            seed,
            output,
        } => bench(count, n, d, &norm, classes, seed, output),
    }
}

fn params(
    command: &str,
    inst: &InstanceFile,
    r: Option<usize>,
    k: Option<usize>,
    scale: Option<f64>,
) -> Params {
    Params {
        command: command.into(),
        r,
        k,
        norm: inst.norm.clone(),
        seed: inst.seed,
        scale,
        zero_sum: false,
    }
}

fn verify(
    inst: &InstanceFile,
    result: &ReportFile,
    classes: Option<usize>,
    rescale: bool,
) -> Result<ReportFile, Failure> {
    let slack = slack()?;
    let scale = |s: f64| rescale.then_some(s);
    if let Some(labels) = &result.labels {
        let (seq, s) = inst.sequence(rescale)?;
        let r = classes
            .or(result.params.r)
            .or_else(|| labels.iter().copied().max())
            .unwrap_or(1);
        if labels.iter().any(|&l| l == 0 || l > r) {
            return Err(Failure::input(format!("labels must lie in 1..={r}")));
        }
        let part = RPartition::new(labels.iter().map(|l| l - 1).collect(), r)?;
        let table = c_table(r);
        let report = verify_partition_with(&seq, &part, table.c(r) * seq.d() as f64, slack)?;
        let mut file = ReportFile::new(&report, params("verify", inst, Some(r), None, scale(s)));
        file.labels = Some(labels.clone());
        Ok(file)
    } else if let Some(chi) = &result.chi {
        let (sets, s) = inst.set_sequence(rescale)?;
        let selection = Selection { chi: chi.clone() };
        selection.validate(&sets)?;
        let r = selection.r().max(1);
        let d = sets.d() as f64;
        let report = if result.params.zero_sum {
            selection_report(&sets, &selection, false, 5.0 * d)?.with_bound(5.0 * d, slack)
        } else {
            let bound = r_selection_bound(&sets, r, &c_table(r));
            selection_report(&sets, &selection, true, bound)?.with_bound(bound, slack)
        };
        let mut p = params("verify", inst, Some(r), None, scale(s));
        p.zero_sum = result.params.zero_sum;
        let mut file = ReportFile::new(&report, p);
        file.chi = Some(chi.clone());
        Ok(file)
    } else if let Some(subsets) = &result.subsets {
        let (sets, s) = inst.set_sequence(rescale)?;
        let k = subsets.first().map_or(0, Vec::len);
        if subsets.iter().any(|u| u.len() != k) {
            return Err(Failure::input("subsets differ in size"));
        }
        let report = subset_deviation(&sets, subsets)?.with_bound(2.0 * sets.d() as f64, slack);
        let mut file = ReportFile::new(&report, params("verify", inst, None, Some(k), scale(s)));
        file.subsets = Some(subsets.clone());
        Ok(file)
    } else {
        Err(Failure::input("result file has no labels, chi, or subsets"))
    }
}

#[derive(Serialize)]
struct BenchRow {
    seed: u64,
    task: &'static str,
    n: usize,
    d: usize,
    r: usize,
    millis: f64,
    achieved: f64,
    bound: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct BenchSummary {
    rows: Vec<BenchRow>,
    total_millis: f64,
    max_ratio: f64,
    all_pass: bool,
}

fn bench(
    count: usize,
    n: usize,
    d: usize,
    norm: &str,
    r: usize,
    seed: u64,
    output: Option<PathBuf>,
) -> Result<bool, Failure> {
    if r == 0 {
        return Err(Failure::input("--classes must be positive"));
    }
    let norm_kind = norm_arg(norm, None)?;
    let slack = slack()?;
    let table = c_table(r);
    let mut seeds = CounterRng::new(seed);
    let mut rows = Vec::with_capacity(2 * count);
    let mut all_pass = true;
    let started = Instant::now();
    for _ in 0..count {
        let s = seeds.next_u64();

        let vs = gen_sequence(n, d, &norm_kind, Distribution::Ball, s)?;
        let seq = vecbal::VectorSequence::new(d, norm_kind.clone(), vs)?;
        let t = Instant::now();
        let part = balanced_partition(&seq, r, &table)?;
        let millis = t.elapsed().as_secs_f64() * 1e3;
        let report = verify_partition_with(&seq, &part, table.c(r) * d as f64, slack)?;
        all_pass &= report.pass;
        rows.push(row(s, "partition", n, d, r, millis, &report));

        let sets = gen_sets(n, r + 1, d, &norm_kind, Distribution::Ball, s)?;
        let sets = vecbal::SetSequence::new(d, norm_kind.clone(), sets)?;
        let t = Instant::now();
        let chi = r_selection(&sets, r, &table)?;
        let millis = t.elapsed().as_secs_f64() * 1e3;
        let bound = r_selection_bound(&sets, r, &table);
        let report = selection_report(&sets, &chi, true, bound)?.with_bound(bound, slack);
        all_pass &= report.pass;
        rows.push(row(s, "selection", n, d, r, millis, &report));
    }
    let summary = BenchSummary {
        max_ratio: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        total_millis: started.elapsed().as_secs_f64() * 1e3,
        rows,
        all_pass,
    };
    write_json(&summary, output.as_deref())?;
    Ok(all_pass)
}

fn row(
    seed: u64,
    task: &'static str,
    n: usize,
    d: usize,
    r: usize,
    millis: f64,
    rep: &DiscrepancyReport,
) -> BenchRow {
    BenchRow {
        seed,
        task,
        n,
        d,
        r,
        millis,
        achieved: rep.achieved,
        bound: rep.bound,
        ratio: if rep.bound > 0.0 {
            rep.achieved / rep.bound
        } else {
            0.0
        },
    }
}
