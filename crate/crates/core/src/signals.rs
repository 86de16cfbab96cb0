//! Bandlimited signal synthesis, error metrics and test graph generators.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::Graph;
use crate::product::{kron_apply, project_support};
use crate::sampling::SupportSet;
use crate::spectral::{FreqIndex, ProductSpectrum, Spectrum};

/// Frequency support of a synthesized signal.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    Single(SupportSet),
    Product(Vec<FreqIndex>),
}

impl Support {
    pub fn k(&self) -> usize {
        match self {
            Support::Single(s) => s.k(),
            Support::Product(t) => t.len(),
        }
    }
}

/// A signal together with the coefficients it was synthesized from.
#[derive(Debug, Clone)]
pub struct BandlimitedSignal {
    pub x: Vec<f64>,
    pub support: Support,
    pub coeffs: Vec<f64>,
}

/// Standard-normal coefficients from a seeded stream.
pub fn normal_coeffs(k: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k).map(|_| rng.sample(StandardNormal)).collect()
}

fn resolve_coeffs(k: usize, coeffs: Option<&[f64]>, seed: Option<u64>) -> Result<Vec<f64>> {
    match coeffs {
        Some(c) => {
            check_len(k, c.len())?;
            Ok(c.to_vec())
        }
        None => Ok(normal_coeffs(k, seed.unwrap_or(0))),
    }
}

/// `x = Σ_k c_k v_k` over a single-graph support.
pub fn synthesize(
    s: &Spectrum,
    support: &SupportSet,
    coeffs: Option<&[f64]>,
    seed: Option<u64>,
) -> Result<BandlimitedSignal> {
    if support.indices().iter().any(|&i| i >= s.n()) {
        return Err(Error::OutOfRange("support exceeds the spectrum".into()));
    }
    let c = resolve_coeffs(support.k(), coeffs, seed)?;
    let mut xhat = vec![0.0; s.n()];
    for (&i, &ci) in support.indices().iter().zip(&c) {
        xhat[i] = ci;
    }
    let x = s.igft(&xhat)?;
    Ok(BandlimitedSignal {
        x,
        support: Support::Single(support.clone()),
        coeffs: c,
    })
}

/// `x = Σ_f c_f (v⁽¹⁾ ⊗ … ⊗ v⁽ᴶ⁾)_f` on a product graph.
///
/// The coefficients are placed in a tensor over `R_1 × … × R_J` and mapped
/// through `⊗ V⁽ʲ⁾_{R_j}`, so the product basis is never formed.
pub fn synthesize_product(
    ps: &ProductSpectrum,
    support: &[FreqIndex],
    coeffs: Option<&[f64]>,
    seed: Option<u64>,
) -> Result<BandlimitedSignal> {
    for f in support {
        ps.check(&f.0)?;
    }
    let (r, s) = project_support(support)?;
    let c = resolve_coeffs(support.len(), coeffs, seed)?;

    let bases: Vec<DMatrix<f64>> = r
        .iter()
        .zip(ps.factors())
        .map(|(rj, spec)| {
            let v = spec.vectors();
            DMatrix::from_fn(spec.n(), rj.len(), |row, col| v[(row, rj[col])])
        })
        .collect();
    let sizes: Vec<usize> = r.iter().map(Vec::len).collect();
    let mut core = vec![0.0; s];
    for (f, &cf) in support.iter().zip(&c) {
        let mut pos = 0;
        for ((&i, rj), &d) in f.0.iter().zip(&r).zip(&sizes) {
            let p = rj.binary_search(&i).expect("projected support contains every component");
            pos = pos * d + p;
        }
        core[pos] += cf;
    }
    let refs: Vec<&DMatrix<f64>> = bases.iter().collect();
    let x = kron_apply(&refs, &core)?;
    Ok(BandlimitedSignal {
        x,
        support: Support::Product(support.to_vec()),
        coeffs: c,
    })
}

/// `‖x − x'‖₂ / ‖x‖₂`, or `‖x'‖₂` when `x = 0`.
pub fn relative_error(x: &[f64], x_rec: &[f64]) -> Result<f64> {
    check_len(x.len(), x_rec.len())?;
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let diff = x
        .iter()
        .zip(x_rec)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        Ok(x_rec.iter().map(|v| v * v).sum::<f64>().sqrt())
    } else {
        Ok(diff / norm)
    }
}

/// Families of unweighted test graphs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "model")]
pub enum GraphModel {
    Path,
    Cycle,
    ErdosRenyi { p: f64 },
}

/// Symmetric 0/1 adjacency of the requested model, deterministic in `seed`.
pub fn random_graph(n: usize, model: GraphModel, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::BadParam("graph needs at least one node".into()));
    }
    let mut a = DMatrix::zeros(n, n);
    let mut link = |i: usize, j: usize| {
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    };
    match model {
        GraphModel::Path => (1..n).for_each(|i| link(i - 1, i)),
        GraphModel::Cycle => {
            (1..n).for_each(|i| link(i - 1, i));
            if n > 2 {
                link(n - 1, 0);
            }
        }
        GraphModel::ErdosRenyi { p } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::BadParam(format!("edge probability {p} not in [0, 1]")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..n {
                for j in i + 1..n {
                    if rng.random_bool(p) {
                        link(i, j);
                    }
                }
            }
        }
    }
    Graph::new(a)
}

/// Symmetric matrix with entries uniform in `[-1, 1]`, for property tests.
pub fn random_symmetric(n: usize, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v: f64 = rng.random_range(-1.0..=1.0);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Graph::new(a).expect("square by construction")
}
