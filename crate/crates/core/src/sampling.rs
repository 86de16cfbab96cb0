//! Sampling and perfect recovery of bandlimited signals on a single graph.
//!
//! A signal is bandlimited on a [`SupportSet`] of `K` frequencies when its
//! GFT vanishes elsewhere. Sampling gathers the values at `m ≥ K` nodes `M`.
//! With `V_K` the supported eigenvectors and `W = (Ψ V_K)†`, the signal is
//! recovered by `Φ = V_K W` as long as `Ψ V_K` has full column rank.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVectorView};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::exec::Execution;
use crate::linalg::{pinv, sigma_min};
use crate::spectral::Spectrum;

/// Numerical rank threshold on `σ_min(Ψ V_K)`.
pub const RANK_TOL: f64 = 1e-10;
/// Relative cutoff for the pseudoinverse.
pub const PINV_CUTOFF: f64 = 1e-12;
/// Largest graph the exhaustive strategy will search.
pub const EXHAUSTIVE_MAX_N: usize = 12;
/// Attempts made by the random strategy before giving up.
pub const RANDOM_ATTEMPTS: usize = 1000;

/// Distinct frequency indices (columns of `V`) a signal is supported on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    /// Validates `indices` against a graph with `n` frequencies.
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptySupport);
        }
        let mut seen = HashSet::with_capacity(indices.len());
        for &i in &indices {
            if i >= n {
                return Err(Error::OutOfRange(format!("frequency {i} of {n}")));
            }
            if !seen.insert(i) {
                return Err(Error::BadParam(format!("frequency {i} listed twice")));
            }
        }
        Ok(SupportSet { indices })
    }

    /// The first `k` frequencies.
    pub fn first(k: usize, n: usize) -> Result<Self> {
        Self::new((0..k).collect(), n)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Bandwidth `K`.
    pub fn k(&self) -> usize {
        self.indices.len()
    }
}

/// How [`select_sample_set`] picks nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionStrategy {
    /// Column-pivoted orthogonal-triangular factorization of `V_Kᵀ`.
    #[default]
    PivotedQr,
    /// Maximize `σ_min` over every subset; only for small graphs.
    Exhaustive,
    /// Uniform random subsets, kept once the rank condition holds.
    RandomVerified { seed: u64 },
}

impl SelectionStrategy {
    /// Parses a strategy name; `seed` only matters for the random strategy.
    pub fn parse_with_seed(name: &str, seed: u64) -> Result<Self> {
        match name.parse()? {
            SelectionStrategy::RandomVerified { .. } => Ok(SelectionStrategy::RandomVerified { seed }),
            other => Ok(other),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SelectionStrategy::PivotedQr => "pivoted",
            SelectionStrategy::Exhaustive => "exhaustive",
            SelectionStrategy::RandomVerified { .. } => "random",
        }
    }
}

impl std::str::FromStr for SelectionStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pivoted" | "pivoted-qr" | "pivoted-orthogonal-triangular" => {
                Ok(SelectionStrategy::PivotedQr)
            }
            "exhaustive" => Ok(SelectionStrategy::Exhaustive),
            "random" | "random-verified" => Ok(SelectionStrategy::RandomVerified { seed: 0 }),
            other => Err(Error::BadParam(format!("unknown selection strategy '{other}'"))),
        }
    }
}

/// `Ψ V_K`: rows `nodes` and columns `support` of the eigenvector matrix.
pub fn sampled_basis(s: &Spectrum, support: &SupportSet, nodes: &[usize]) -> DMatrix<f64> {
    let v = s.vectors();
    DMatrix::from_fn(nodes.len(), support.k(), |r, c| {
        v[(nodes[r], support.indices[c])]
    })
}

/// The supported eigenvectors `V_K` (n×K).
pub fn support_basis(s: &Spectrum, support: &SupportSet) -> DMatrix<f64> {
    let v = s.vectors();
    DMatrix::from_fn(s.n(), support.k(), |r, c| v[(r, support.indices[c])])
}

/// Chooses `m` sample nodes so that `Ψ V_K` has full column rank.
pub fn select_sample_set(
    s: &Spectrum,
    support: &SupportSet,
    strategy: SelectionStrategy,
    m: usize,
) -> Result<Vec<usize>> {
    select_sample_set_with(Execution::default(), s, support, strategy, m)
}

pub fn select_sample_set_with(
    exec: Execution,
    s: &Spectrum,
    support: &SupportSet,
    strategy: SelectionStrategy,
    m: usize,
) -> Result<Vec<usize>> {
    let n = s.n();
    let k = support.k();
    if m < k {
        return Err(Error::BadParam(format!(
            "{m} samples cannot cover bandwidth {k}"
        )));
    }
    if m > n {
        return Err(Error::OutOfRange(format!("{m} samples from {n} nodes")));
    }
    let chosen = match strategy {
        SelectionStrategy::PivotedQr => pivoted_rows(&support_basis(s, support), m),
        SelectionStrategy::Exhaustive => exhaustive(exec, s, support, m)?,
        SelectionStrategy::RandomVerified { seed } => return random_verified(s, support, m, seed),
    };
    let smin = sigma_min(&sampled_basis(s, support, &chosen))?;
    if smin > RANK_TOL {
        Ok(chosen)
    } else {
        Err(Error::Infeasible(format!(
            "best sample set has sigma_min {smin:e}"
        )))
    }
}

/// Row selection by modified Gram-Schmidt with pivoting on the rows of `basis`
/// (equivalently, column pivoting on its transpose). Rows beyond the rank
/// are filled in by descending row norm.
fn pivoted_rows(basis: &DMatrix<f64>, m: usize) -> Vec<usize> {
    let (n, k) = basis.shape();
    let mut resid: Vec<Vec<f64>> = (0..n)
        .map(|i| basis.row(i).iter().copied().collect())
        .collect();
    let mut taken = vec![false; n];
    let mut chosen = Vec::with_capacity(m);

    for _ in 0..k.min(m) {
        let mut best = None;
        let mut best_norm = -1.0;
        for (i, r) in resid.iter().enumerate() {
            if taken[i] {
                continue;
            }
            let nrm: f64 = r.iter().map(|x| x * x).sum();
            if nrm > best_norm {
                best_norm = nrm;
                best = Some(i);
            }
        }
        let Some(p) = best else { break };
        taken[p] = true;
        chosen.push(p);
        let scale = best_norm.sqrt();
        if scale == 0.0 {
            continue;
        }
        let q: Vec<f64> = resid[p].iter().map(|x| x / scale).collect();
        for (i, r) in resid.iter_mut().enumerate() {
            if taken[i] {
                continue;
            }
            let dot: f64 = r.iter().zip(&q).map(|(a, b)| a * b).sum();
            for (a, b) in r.iter_mut().zip(&q) {
                *a -= dot * b;
            }
        }
    }

    if chosen.len() < m {
        let mut rest: Vec<(usize, f64)> = (0..n)
            .filter(|&i| !taken[i])
            .map(|i| (i, basis.row(i).norm_squared()))
            .collect();
        rest.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        chosen.extend(rest.into_iter().take(m - chosen.len()).map(|(i, _)| i));
    }
    chosen
}

/// All `m`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    if m > n {
        return out;
    }
    loop {
        out.push(cur.clone());
        let Some(i) = (0..m).rev().find(|&i| cur[i] != i + n - m) else {
            return out;
        };
        cur[i] += 1;
        for l in i + 1..m {
            cur[l] = cur[l - 1] + 1;
        }
    }
}

fn exhaustive(exec: Execution, s: &Spectrum, support: &SupportSet, m: usize) -> Result<Vec<usize>> {
    let n = s.n();
    if n > EXHAUSTIVE_MAX_N {
        return Err(Error::TooLarge(format!(
            "exhaustive search over {n} nodes (limit {EXHAUSTIVE_MAX_N})"
        )));
    }
    let sets = combinations(n, m);
    let scores = exec
        .map_slice(&sets, |set| sigma_min(&sampled_basis(s, support, set)))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, &sc) in scores.iter().enumerate() {
        if sc > scores[best] {
            best = i;
        }
    }
    Ok(sets.into_iter().nth(best).unwrap_or_default())
}

fn random_verified(s: &Spectrum, support: &SupportSet, m: usize, seed: u64) -> Result<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_ATTEMPTS {
        let mut set = index::sample(&mut rng, s.n(), m).into_vec();
        set.sort_unstable();
        if sigma_min(&sampled_basis(s, support, &set))? > RANK_TOL {
            return Ok(set);
        }
    }
    Err(Error::Infeasible(format!(
        "no valid sample set in {RANDOM_ATTEMPTS} random draws"
    )))
}

/// Sampling and interpolation operators for one graph and one support.
#[derive(Debug, Clone)]
pub struct SamplingPlan {
    n: usize,
    support: SupportSet,
    sample_set: Vec<usize>,
    v_k: DMatrix<f64>,
    sampled_basis: DMatrix<f64>,
    w: DMatrix<f64>,
    phi: DMatrix<f64>,
    sigma_min: f64,
}

/// Builds `W = (Ψ V_K)†` and `Φ = V_K W` for the sample set `nodes`.
pub fn build_plan(s: &Spectrum, support: &SupportSet, nodes: &[usize]) -> Result<SamplingPlan> {
    let n = s.n();
    let mut seen = HashSet::with_capacity(nodes.len());
    for &v in nodes {
        if v >= n {
            return Err(Error::OutOfRange(format!("sample node {v} of {n}")));
        }
        if !seen.insert(v) {
            return Err(Error::BadParam(format!("sample node {v} listed twice")));
        }
    }
    if support.indices.iter().any(|&i| i >= n) {
        return Err(Error::OutOfRange("support exceeds the spectrum".into()));
    }
    let b = sampled_basis(s, support, nodes);
    let smin = if nodes.len() < support.k() {
        0.0
    } else {
        sigma_min(&b)?
    };
    if smin <= RANK_TOL {
        return Err(Error::RankDeficient { sigma_min: smin });
    }
    let w = pinv(&b, PINV_CUTOFF)?;
    let v_k = support_basis(s, support);
    let phi = &v_k * &w;
    Ok(SamplingPlan {
        n,
        support: support.clone(),
        sample_set: nodes.to_vec(),
        v_k,
        sampled_basis: b,
        w,
        phi,
        sigma_min: smin,
    })
}

impl SamplingPlan {
    /// Node count of the graph the plan samples.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn sample_set(&self) -> &[usize] {
        &self.sample_set
    }

    /// Number of samples `m`.
    pub fn m(&self) -> usize {
        self.sample_set.len()
    }

    pub fn k(&self) -> usize {
        self.support.k()
    }

    pub fn v_k(&self) -> &DMatrix<f64> {
        &self.v_k
    }

    /// `Ψ V_K` (m×K).
    pub fn sampled_basis(&self) -> &DMatrix<f64> {
        &self.sampled_basis
    }

    /// `W = (Ψ V_K)†` (K×m).
    pub fn w(&self) -> &DMatrix<f64> {
        &self.w
    }

    /// Interpolation operator `Φ` (n×m).
    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn sigma_min(&self) -> f64 {
        self.sigma_min
    }

    /// Dense 0/1 sampling matrix `Ψ` (m×n), for export and oracles.
    pub fn psi(&self) -> DMatrix<f64> {
        let mut psi = DMatrix::zeros(self.m(), self.n);
        for (i, &j) in self.sample_set.iter().enumerate() {
            psi[(i, j)] = 1.0;
        }
        psi
    }

    /// `x_M = Ψ x`.
    pub fn sample(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        Ok(self.sample_set.iter().map(|&i| x[i]).collect())
    }

    /// `x' = Φ x_M`.
    pub fn reconstruct(&self, x_m: &[f64]) -> Result<Vec<f64>> {
        check_len(self.m(), x_m.len())?;
        let v = DVectorView::from_slice(x_m, x_m.len());
        Ok((&self.phi * v).as_slice().to_vec())
    }

    /// Supported frequency content `W x_M`.
    pub fn frequency_content(&self, x_m: &[f64]) -> Result<Vec<f64>> {
        check_len(self.m(), x_m.len())?;
        let v = DVectorView::from_slice(x_m, x_m.len());
        Ok((&self.w * v).as_slice().to_vec())
    }
}

pub fn sample(x: &[f64], plan: &SamplingPlan) -> Result<Vec<f64>> {
    plan.sample(x)
}

pub fn reconstruct(x_m: &[f64], plan: &SamplingPlan) -> Result<Vec<f64>> {
    plan.reconstruct(x_m)
}

/// The graph a critically sampled signal lives on.
#[derive(Debug, Clone)]
pub struct SampledGraph {
    shift: DMatrix<f64>,
    gft_basis: DMatrix<f64>,
}

impl SampledGraph {
    /// `A_M = W⁻¹ Λ_K W` (K×K).
    pub fn shift(&self) -> &DMatrix<f64> {
        &self.shift
    }

    /// The sampled graph's Fourier basis `W`.
    pub fn gft_basis(&self) -> &DMatrix<f64> {
        &self.gft_basis
    }

    pub fn gft(&self, x_m: &[f64]) -> Result<Vec<f64>> {
        check_len(self.gft_basis.ncols(), x_m.len())?;
        let v = DVectorView::from_slice(x_m, x_m.len());
        Ok((&self.gft_basis * v).as_slice().to_vec())
    }
}

/// Sampled shift `A_M = W⁻¹ Λ_K W`; requires `m = K`.
pub fn sampled_graph(plan: &SamplingPlan, s: &Spectrum) -> Result<SampledGraph> {
    if plan.m() != plan.k() {
        return Err(Error::NotSquare {
            samples: plan.m(),
            bandwidth: plan.k(),
        });
    }
    if plan.n != s.n() {
        return Err(Error::DimensionMismatch {
            expected: plan.n,
            got: s.n(),
        });
    }
    if plan.sigma_min <= RANK_TOL {
        return Err(Error::RankDeficient {
            sigma_min: plan.sigma_min,
        });
    }
    // W is square and W⁻¹ = Ψ V_K
    let k = plan.k();
    let lambda = DMatrix::from_fn(k, k, |r, c| {
        if r == c {
            s.values()[plan.support.indices[r]]
        } else {
            0.0
        }
    });
    let shift = &plan.sampled_basis * lambda * &plan.w;
    Ok(SampledGraph {
        shift,
        gft_basis: plan.w.clone(),
    })
}
