mod files;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prodsamp::bench::{bench_pipeline, cartesian_smooth_study, write_bench_csv, write_study_csv, BenchConfig};
use prodsamp::io::{read_matrix_market, read_signal, write_matrix_market, write_signal, SignalFormat};
use prodsamp::signals::{relative_error, synthesize_product};
use prodsamp::{eigendecompose, product_reconstruct, product_sample, Error, ProductGraph, ProductKind};

use files::{Experiment, PlanFile};

const DENSE_CAP_VAR: &str = "PRODSAMP_DENSE_CAP";

#[derive(Parser)]
#[command(name = "prodsamp", version, about = "Sampling and recovery of bandlimited signals on product graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize a product graph to Matrix Market.
    Product {
        #[arg(long)]
        kind: ProductKind,
        #[arg(required = true)]
        factors: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the top eigenvalues of a graph as CSV.
    Spectrum {
        graph: PathBuf,
        #[arg(long)]
        top: usize,
    },
    /// Build a product sampling plan from an experiment config.
    Plan {
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Gather a signal at the plan's sample nodes.
    Sample {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        signal: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Signal format; inferred from the file extension by default.
        #[arg(long)]
        format: Option<SignalFormat>,
    },
    /// Interpolate a full signal from its samples.
    Reconstruct {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        samples: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Original signal; prints the relative recovery error.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        format: Option<SignalFormat>,
    },
    /// Write a random bandlimited signal over the config's support.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long)]
        format: Option<SignalFormat>,
    },
    /// Time the factorized and dense pipelines.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Sample count against K + J for the Cartesian product of two paths.
    StudyCartesian {
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[arg(long)]
        kmax: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
}

struct Failure {
    stage: &'static str,
    err: Error,
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T, E: Into<Error>> Stage<T> for Result<T, E> {
    fn stage(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure { stage, err: e.into() })
    }
}

fn format_for(path: &Path, explicit: Option<SignalFormat>) -> SignalFormat {
    explicit.unwrap_or_else(|| SignalFormat::from_path(path))
}

fn dense_cap(config: Option<usize>) -> Result<Option<usize>, Error> {
    match std::env::var(DENSE_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Config(format!("{DENSE_CAP_VAR}='{v}' is not a node count"))),
        Err(_) => Ok(config),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Product { kind, factors, output } => {
            let graphs = factors
                .iter()
                .enumerate()
                .map(|(j, p)| read_matrix_market(p).map_err(|e| e.in_factor(j)))
                .collect::<Result<Vec<_>, _>>()
                .stage("load")?;
            let pg = ProductGraph::new(graphs, kind).stage("product")?;
            let a = pg.materialize().stage("product")?;
            write_matrix_market(&output, &a).stage("write")?;
        }
        Command::Spectrum { graph, top } => {
            let g = read_matrix_market(&graph).stage("load")?;
            if top > g.n() {
                return Err(Error::OutOfRange(format!("top {top} of {} eigenvalues", g.n()))).stage("spectrum");
            }
            let s = eigendecompose(&g).stage("spectrum")?;
            let mut out = String::new();
            out.push_str(&format!("# prodsamp {}\nindex,eigenvalue\n", prodsamp::VERSION));
            for (i, v) in s.values().iter().take(top).enumerate() {
                out.push_str(&format!("{},{v:.16e}\n", i + 1));
            }
            std::io::stdout().write_all(out.as_bytes()).stage("write")?;
        }
        Command::Plan { config, output } => {
            let exp = Experiment::load(&config).stage("config")?;
            let plan = exp.plan().stage("plan")?;
            let file = PlanFile::from_plan(&exp, &plan);
            file.write(&output).stage("write")?;
            println!(
                "K={} S={} R={:?} sigma_min={:?}",
                file.k, file.s, file.r, file.sigma_min
            );
        }
        Command::Sample { plan, signal, output, format } => {
            let file = PlanFile::read(&plan).stage("plan")?;
            let (_, p) = file.rebuild().stage("plan")?;
            let x = read_signal(&signal, format_for(&signal, format)).stage("read")?;
            let x_m = product_sample(&x, &p).stage("sample")?;
            write_signal(&output, &x_m, format_for(&output, format), Some(file.seed)).stage("write")?;
        }
        Command::Reconstruct { plan, samples, output, reference, format } => {
            let file = PlanFile::read(&plan).stage("plan")?;
            let (_, p) = file.rebuild().stage("plan")?;
            let x_m = read_signal(&samples, format_for(&samples, format)).stage("read")?;
            let x = product_reconstruct(&x_m, &p).stage("reconstruct")?;
            write_signal(&output, &x, format_for(&output, format), Some(file.seed)).stage("write")?;
            if let Some(r) = reference {
                let x_ref = read_signal(&r, format_for(&r, format)).stage("read")?;
                let e = relative_error(&x_ref, &x).stage("compare")?;
                println!("relative_error {e:e}");
            }
        }
        Command::Synth { config, seed, output, format } => {
            let exp = Experiment::load(&config).stage("config")?;
            let seed = seed.unwrap_or(exp.config.seed);
            let sig = synthesize_product(&exp.spectrum, &exp.support, None, Some(seed)).stage("synth")?;
            write_signal(&output, &sig.x, format_for(&output, format), Some(seed)).stage("write")?;
        }
        Command::Bench { config, output } => {
            let text = fs::read_to_string(&config).stage("config")?;
            let mut cfg = BenchConfig::from_json(&text).stage("config")?;
            cfg.dense_cap = dense_cap(cfg.dense_cap).stage("config")?;
            let base = config.parent().map(Path::to_path_buf).unwrap_or_default();
            let records = bench_pipeline(&cfg, &base).stage("bench")?;
            let f = fs::File::create(&output).stage("write")?;
            write_bench_csv(f, &records).stage("write")?;
            for r in &records {
                match r.setup_speedup() {
                    Some(x) => println!("{}: N={} setup speedup {x:.1}x", r.scenario, r.n),
                    None => println!("{}: N={} dense pipeline skipped", r.scenario, r.n),
                }
            }
        }
        Command::StudyCartesian { n1, n2, kmax, output } => {
            let rows = cartesian_smooth_study(n1, n2, kmax).stage("study")?;
            let f = fs::File::create(&output).stage("write")?;
            write_study_csv(f, n1, n2, &rows).stage("write")?;
            let violations = rows.iter().filter(|r| !r.bound_holds).count();
            println!("{} rows, {violations} with S > K + J", rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("prodsamp: {}: {}", f.stage, f.err);
            ExitCode::FAILURE
        }
    }
}
