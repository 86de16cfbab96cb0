//! Benchmark scenarios comparing the factorized pipeline against sampling
//! the materialized product as one graph, plus the Cartesian smooth-signal
//! sample-count study.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::{Graph, ProductGraph, ProductKind};
use crate::io::read_matrix_market;
use crate::product::{build_product_plan_with, kron_apply_flops, product_reconstruct_with, product_sample, project_support, FactorSampling};
use crate::sampling::{build_plan, select_sample_set_with, SelectionStrategy, SupportSet};
use crate::signals::{normal_coeffs, random_graph, relative_error, synthesize, synthesize_product, GraphModel};
use crate::spectral::{eigendecompose, ProductSpectrum};

/// Default node-count cap for running the dense comparison.
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Where a factor graph comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorSpec {
    File {
        file: PathBuf,
    },
    Generated {
        n: usize,
        #[serde(flatten)]
        model: GraphModel,
        #[serde(default)]
        seed: u64,
    },
}

impl FactorSpec {
    /// Loads or generates the graph; relative paths resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<Graph> {
        match self {
            FactorSpec::File { file } => read_matrix_market(base.join(file)),
            FactorSpec::Generated { n, model, seed } => random_graph(*n, *model, *seed),
        }
    }
}

fn default_repetitions() -> usize {
    1
}

fn default_strategy() -> String {
    "pivoted".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub factors: Vec<FactorSpec>,
    pub kind: ProductKind,
    /// Bandwidth: the top-`k` frequencies of the default ordering.
    pub k: usize,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub scenarios: Vec<Scenario>,
    /// Largest `N` for which the dense pipeline also runs.
    #[serde(default)]
    pub dense_cap: Option<usize>,
    /// Run scenarios concurrently. Each scenario still times its own stages.
    #[serde(default)]
    pub concurrent: bool,
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: BenchConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::Config("no scenarios".into()));
        }
        for s in &self.scenarios {
            if s.factors.is_empty() {
                return Err(Error::Config(format!("scenario '{}' has no factors", s.id)));
            }
            if s.k == 0 {
                return Err(Error::Config(format!("scenario '{}' has k = 0", s.id)));
            }
            if s.repetitions == 0 {
                return Err(Error::Config(format!("scenario '{}' has zero repetitions", s.id)));
            }
            s.strategy
                .parse::<SelectionStrategy>()
                .map_err(|e| Error::Config(format!("scenario '{}': {e}", s.id)))?;
        }
        Ok(())
    }
}

/// Per-stage wall-clock seconds (best of the repetitions) and outcome of one
/// pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StageTimes {
    pub spectral_s: f64,
    pub selection_s: f64,
    pub sampling_s: f64,
    pub recovery_s: f64,
    pub error: f64,
    /// Textbook eigendecomposition cost `Σ n³`.
    pub flops_spectral: f64,
    /// Multiply-adds of the interpolation step.
    pub flops_recovery: f64,
}

impl StageTimes {
    /// Spectral setup plus plan construction.
    pub fn setup_s(&self) -> f64 {
        self.spectral_s + self.selection_s
    }

    fn best_of(&mut self, other: &StageTimes) {
        self.spectral_s = self.spectral_s.min(other.spectral_s);
        self.selection_s = self.selection_s.min(other.selection_s);
        self.sampling_s = self.sampling_s.min(other.sampling_s);
        self.recovery_s = self.recovery_s.min(other.recovery_s);
        self.error = self.error.max(other.error);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub scenario: String,
    pub kind: ProductKind,
    pub n: usize,
    pub dims: Vec<usize>,
    pub k: usize,
    pub s: usize,
    pub seed: u64,
    pub factorized: StageTimes,
    pub dense: Option<StageTimes>,
}

impl BenchRecord {
    pub fn j(&self) -> usize {
        self.dims.len()
    }

    /// Dense over factorized setup time, when the dense pipeline ran.
    pub fn setup_speedup(&self) -> Option<f64> {
        self.dense.map(|d| d.setup_s() / self.factorized.setup_s())
    }

    pub fn flop_ratio(&self) -> Option<f64> {
        self.dense
            .map(|d| d.flops_spectral / self.factorized.flops_spectral)
    }
}

/// Flat CSV row for a [`BenchRecord`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scenario: String,
    pub kind: String,
    pub n: usize,
    pub j: usize,
    pub dims: String,
    pub k: usize,
    pub s: usize,
    pub seed: u64,
    pub fact_spectral_s: f64,
    pub fact_selection_s: f64,
    pub fact_sampling_s: f64,
    pub fact_recovery_s: f64,
    pub fact_error: f64,
    pub fact_flops_spectral: f64,
    pub fact_flops_recovery: f64,
    pub dense_spectral_s: Option<f64>,
    pub dense_selection_s: Option<f64>,
    pub dense_sampling_s: Option<f64>,
    pub dense_recovery_s: Option<f64>,
    pub dense_error: Option<f64>,
    pub dense_flops_spectral: Option<f64>,
    pub dense_flops_recovery: Option<f64>,
    pub setup_speedup: Option<f64>,
    pub flop_ratio: Option<f64>,
    pub tool_version: String,
}

impl From<&BenchRecord> for BenchRow {
    fn from(r: &BenchRecord) -> Self {
        let d = r.dense;
        BenchRow {
            scenario: r.scenario.clone(),
            kind: r.kind.short_name().into(),
            n: r.n,
            j: r.j(),
            dims: r.dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x"),
            k: r.k,
            s: r.s,
            seed: r.seed,
            fact_spectral_s: r.factorized.spectral_s,
            fact_selection_s: r.factorized.selection_s,
            fact_sampling_s: r.factorized.sampling_s,
            fact_recovery_s: r.factorized.recovery_s,
            fact_error: r.factorized.error,
            fact_flops_spectral: r.factorized.flops_spectral,
            fact_flops_recovery: r.factorized.flops_recovery,
            dense_spectral_s: d.map(|d| d.spectral_s),
            dense_selection_s: d.map(|d| d.selection_s),
            dense_sampling_s: d.map(|d| d.sampling_s),
            dense_recovery_s: d.map(|d| d.recovery_s),
            dense_error: d.map(|d| d.error),
            dense_flops_spectral: d.map(|d| d.flops_spectral),
            dense_flops_recovery: d.map(|d| d.flops_recovery),
            setup_speedup: r.setup_speedup(),
            flop_ratio: r.flop_ratio(),
            tool_version: crate::VERSION.into(),
        }
    }
}

/// Runs every scenario, resolving factor files against `base`.
pub fn bench_pipeline(config: &BenchConfig, base: &Path) -> Result<Vec<BenchRecord>> {
    config.validate()?;
    let cap = config.dense_cap.unwrap_or(DEFAULT_DENSE_CAP);
    let exec = if config.concurrent {
        Execution::Parallel
    } else {
        Execution::Sequential
    };
    exec.map_slice(&config.scenarios, |s| run_scenario(s, cap, base))
        .into_iter()
        .collect()
}

fn secs(t: Instant) -> f64 {
    t.elapsed().as_secs_f64()
}

fn run_scenario(sc: &Scenario, dense_cap: usize, base: &Path) -> Result<BenchRecord> {
    let factors = sc
        .factors
        .iter()
        .enumerate()
        .map(|(j, f)| f.load(base).map_err(|e| e.in_factor(j)))
        .collect::<Result<Vec<_>>>()?;
    let pg = ProductGraph::new(factors, sc.kind)?;
    let strategy = SelectionStrategy::parse_with_seed(&sc.strategy, sc.seed)?;
    let coeffs = normal_coeffs(sc.k, sc.seed);

    let mut fact: Option<StageTimes> = None;
    let mut dense: Option<StageTimes> = None;
    let mut s_count = 0;
    for _ in 0..sc.repetitions {
        let (t, s) = factorized_run(&pg, sc.k, strategy, &coeffs)?;
        s_count = s;
        fact = Some(match fact {
            Some(mut best) => {
                best.best_of(&t);
                best
            }
            None => t,
        });
        if pg.n() <= dense_cap {
            let t = dense_run(&pg, sc.k, strategy, &coeffs)?;
            dense = Some(match dense {
                Some(mut best) => {
                    best.best_of(&t);
                    best
                }
                None => t,
            });
        }
    }
    Ok(BenchRecord {
        scenario: sc.id.clone(),
        kind: sc.kind,
        n: pg.n(),
        dims: pg.dims().to_vec(),
        k: sc.k,
        s: s_count,
        seed: sc.seed,
        factorized: fact.expect("at least one repetition"),
        dense,
    })
}

fn factorized_run(
    pg: &ProductGraph,
    k: usize,
    strategy: SelectionStrategy,
    coeffs: &[f64],
) -> Result<(StageTimes, usize)> {
    let exec = Execution::default();
    let t = Instant::now();
    let ps = ProductSpectrum::new(pg, exec)?;
    let spectral_s = secs(t);

    let t = Instant::now();
    let support = ps.top_frequencies(k)?;
    let plan = build_product_plan_with(&ps, &support, &FactorSampling::Select(strategy), exec)?;
    let selection_s = secs(t);

    let sig = synthesize_product(&ps, &support, Some(coeffs), None)?;

    let t = Instant::now();
    let x_m = product_sample(&sig.x, &plan)?;
    let sampling_s = secs(t);

    let t = Instant::now();
    let rec = product_reconstruct_with(exec, &x_m, &plan)?;
    let recovery_s = secs(t);

    let shapes: Vec<(usize, usize)> = plan.factor_plans().iter().map(|p| (p.n(), p.m())).collect();
    Ok((
        StageTimes {
            spectral_s,
            selection_s,
            sampling_s,
            recovery_s,
            error: relative_error(&sig.x, &rec)?,
            flops_spectral: pg.dims().iter().map(|&n| (n as f64).powi(3)).sum(),
            flops_recovery: kron_apply_flops(&shapes),
        },
        plan.s(),
    ))
}

/// Treats the materialized product as one graph. The signal is synthesized
/// in the dense eigenbasis with the same coefficients, so the recovery error
/// is meaningful even when eigenvalues at the band edge are degenerate.
fn dense_run(
    pg: &ProductGraph,
    k: usize,
    strategy: SelectionStrategy,
    coeffs: &[f64],
) -> Result<StageTimes> {
    let exec = Execution::default();
    let t = Instant::now();
    let g = pg.materialize()?;
    let spec = eigendecompose(&g)?;
    drop(g);
    let spectral_s = secs(t);

    let t = Instant::now();
    let support = SupportSet::first(k, spec.n())?;
    let nodes = select_sample_set_with(exec, &spec, &support, strategy, k)?;
    let plan = build_plan(&spec, &support, &nodes)?;
    let selection_s = secs(t);

    let sig = synthesize(&spec, &support, Some(coeffs), None)?;

    let t = Instant::now();
    let x_m = plan.sample(&sig.x)?;
    let sampling_s = secs(t);

    let t = Instant::now();
    let rec = plan.reconstruct(&x_m)?;
    let recovery_s = secs(t);

    Ok(StageTimes {
        spectral_s,
        selection_s,
        sampling_s,
        recovery_s,
        error: relative_error(&sig.x, &rec)?,
        flops_spectral: (spec.n() as f64).powi(3),
        flops_recovery: (spec.n() * plan.m()) as f64,
    })
}

/// Writes bench records as CSV, preceded by a `#` comment line.
pub fn write_bench_csv<W: std::io::Write>(mut w: W, records: &[BenchRecord]) -> Result<()> {
    writeln!(w, "# prodsamp {} bench", crate::VERSION)?;
    let mut wtr = csv::Writer::from_writer(w);
    for r in records {
        wtr.serialize(BenchRow::from(r))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_bench_csv<R: std::io::Read>(r: R) -> Result<Vec<BenchRow>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Frequency ordering used by [`cartesian_smooth_study`].
pub const STUDY_ORDERING: &str = "descending adjacency eigenvalue sum";

/// One row of the Cartesian sample-count study.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StudyRow {
    pub k: usize,
    pub s: usize,
    pub k_plus_j: usize,
    pub bound_holds: bool,
    pub r1: usize,
    pub r2: usize,
}

/// For `K = 1..=k_max`, projects the top-`K` frequencies of `P_{n1} ⊕ P_{n2}`
/// and records `S` against `K + J`. Violations are reported, not treated as
/// errors. `k_max` is clamped to `n1·n2`.
pub fn cartesian_smooth_study(n1: usize, n2: usize, k_max: usize) -> Result<Vec<StudyRow>> {
    let pg = ProductGraph::new(
        vec![
            random_graph(n1, GraphModel::Path, 0)?,
            random_graph(n2, GraphModel::Path, 0)?,
        ],
        ProductKind::Cartesian,
    )?;
    let ps = ProductSpectrum::new(&pg, Execution::Sequential)?;
    let k_max = k_max.min(ps.n());
    let order: Vec<_> = ps.order_frequencies().take(k_max).collect();
    let mut rows = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let (r, s) = project_support(&order[..k])?;
        rows.push(StudyRow {
            k,
            s,
            k_plus_j: k + 2,
            bound_holds: s <= k + 2,
            r1: r[0].len(),
            r2: r[1].len(),
        });
    }
    Ok(rows)
}

pub fn write_study_csv<W: std::io::Write>(mut w: W, n1: usize, n2: usize, rows: &[StudyRow]) -> Result<()> {
    writeln!(
        w,
        "# prodsamp {} cartesian study P{n1} x P{n2}; ordering: {STUDY_ORDERING}",
        crate::VERSION
    )?;
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_study_csv<R: std::io::Read>(r: R) -> Result<Vec<StudyRow>> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}
