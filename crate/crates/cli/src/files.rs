//! Experiment configs and plan files. Every index in these files is 1-based.

use std::fs;
use std::path::{Path, PathBuf};

use prodsamp::io::read_matrix_market;
use prodsamp::{
    build_product_plan_with, product_sample_set, Error, Execution, FactorSampling, FreqIndex, ProductGraph,
    ProductKind, ProductSamplingPlan, ProductSpectrum, Result, SelectionStrategy,
};
use serde::{Deserialize, Serialize};

fn default_strategy() -> String {
    "pivoted".into()
}

/// Which product frequencies are supported.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportSpec {
    /// Explicit frequency tuples.
    Tuples(Vec<Vec<usize>>),
    /// The `K` largest product eigenvalues.
    TopK(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Matrix Market files, relative to the config file.
    pub factors: Vec<PathBuf>,
    pub kind: ProductKind,
    pub support: SupportSpec,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    /// Fixed factor sample sets; when absent they are selected by `strategy`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_sets: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        if cfg.factors.is_empty() {
            return Err(Error::Config("no factor graphs listed".into()));
        }
        if cfg.support == SupportSpec::TopK(0) {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        Ok(cfg)
    }
}

/// A config with its graphs loaded and spectra computed.
pub struct Experiment {
    pub config: ExperimentConfig,
    pub factor_paths: Vec<PathBuf>,
    pub spectrum: ProductSpectrum,
    pub support: Vec<FreqIndex>,
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn load_factors(paths: &[PathBuf], kind: ProductKind) -> Result<(Vec<PathBuf>, ProductSpectrum)> {
    let mut resolved = Vec::with_capacity(paths.len());
    let mut graphs = Vec::with_capacity(paths.len());
    for (j, p) in paths.iter().enumerate() {
        let g = read_matrix_market(p).map_err(|e| {
            Error::Config(format!("{}: {e}", p.display())).in_factor(j)
        })?;
        resolved.push(fs::canonicalize(p)?);
        graphs.push(g);
    }
    let pg = ProductGraph::new(graphs, kind)?;
    let ps = ProductSpectrum::new(&pg, Execution::default())?;
    Ok((resolved, ps))
}

fn to_zero_based(v: &[usize], what: &str) -> Result<Vec<usize>> {
    v.iter()
        .map(|&i| {
            i.checked_sub(1)
                .ok_or_else(|| Error::OutOfRange(format!("{what} index 0 (indices are 1-based)")))
        })
        .collect()
}

fn to_one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn tuples_to_freqs(tuples: &[Vec<usize>], ps: &ProductSpectrum) -> Result<Vec<FreqIndex>> {
    tuples
        .iter()
        .map(|t| {
            if t.len() != ps.order() {
                return Err(Error::BadParam(format!(
                    "frequency tuple {t:?} has {} entries for {} factors",
                    t.len(),
                    ps.order()
                )));
            }
            let f = to_zero_based(t, "frequency")?;
            ps.check(&f)?;
            Ok(FreqIndex(f))
        })
        .collect()
}

impl Experiment {
    pub fn load(config_path: &Path) -> Result<Self> {
        let config = ExperimentConfig::read(config_path)?;
        let base = base_dir(config_path);
        let paths: Vec<PathBuf> = config.factors.iter().map(|p| base.join(p)).collect();
        let (factor_paths, spectrum) = load_factors(&paths, config.kind)?;
        let support = match &config.support {
            SupportSpec::Tuples(t) => tuples_to_freqs(t, &spectrum)?,
            SupportSpec::TopK(k) => spectrum.top_frequencies(*k)?,
        };
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        Ok(Experiment {
            config,
            factor_paths,
            spectrum,
            support,
        })
    }

    pub fn plan(&self) -> Result<ProductSamplingPlan> {
        let sampling = match &self.config.sample_sets {
            Some(sets) => FactorSampling::Explicit(
                sets.iter()
                    .map(|s| to_zero_based(s, "sample node"))
                    .collect::<Result<_>>()?,
            ),
            None => FactorSampling::Select(SelectionStrategy::parse_with_seed(
                &self.config.strategy,
                self.config.seed,
            )?),
        };
        build_product_plan_with(&self.spectrum, &self.support, &sampling, Execution::default())
    }
}

/// On-disk record of a product sampling plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub tool_version: String,
    pub seed: u64,
    pub kind: ProductKind,
    pub strategy: String,
    pub factors: Vec<PathBuf>,
    pub dims: Vec<usize>,
    pub support: Vec<Vec<usize>>,
    pub r: Vec<Vec<usize>>,
    pub sample_sets: Vec<Vec<usize>>,
    pub s: usize,
    pub k: usize,
    pub sigma_min: Vec<f64>,
    pub sample_tuples: Vec<Vec<usize>>,
}

impl PlanFile {
    pub fn from_plan(exp: &Experiment, plan: &ProductSamplingPlan) -> Self {
        let strategy = match exp.config.sample_sets {
            Some(_) => "explicit".to_string(),
            None => exp.config.strategy.clone(),
        };
        PlanFile {
            tool_version: prodsamp::VERSION.to_string(),
            seed: exp.config.seed,
            kind: plan.kind(),
            strategy,
            factors: exp.factor_paths.clone(),
            dims: plan.dims().to_vec(),
            support: plan.product_support().iter().map(|f| to_one_based(&f.0)).collect(),
            r: plan.r().iter().map(|r| to_one_based(r)).collect(),
            sample_sets: plan.factor_plans().iter().map(|p| to_one_based(p.sample_set())).collect(),
            s: plan.s(),
            k: plan.k(),
            sigma_min: plan.factor_plans().iter().map(|p| p.sigma_min()).collect(),
            sample_tuples: product_sample_set(plan).iter().map(|t| to_one_based(&t.0)).collect(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    /// Rebuilds the plan from the recorded factors and sample sets.
    pub fn rebuild(&self) -> Result<(ProductSpectrum, ProductSamplingPlan)> {
        let (_, ps) = load_factors(&self.factors, self.kind)?;
        if ps.dims() != self.dims.as_slice() {
            return Err(Error::Config(format!(
                "factor sizes {:?} differ from the plan's {:?}",
                ps.dims(),
                self.dims
            )));
        }
        let support = tuples_to_freqs(&self.support, &ps)?;
        let sets = self
            .sample_sets
            .iter()
            .map(|s| to_zero_based(s, "sample node"))
            .collect::<Result<_>>()?;
        let plan = build_product_plan_with(&ps, &support, &FactorSampling::Explicit(sets), Execution::default())?;
        if plan.sample_count() != self.sample_tuples.len() {
            return Err(Error::Config(format!(
                "plan lists {} sample tuples, factor sets give {}",
                self.sample_tuples.len(),
                plan.sample_count()
            )));
        }
        Ok((ps, plan))
    }
}
