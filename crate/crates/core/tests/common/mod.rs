#![allow(dead_code)]

use nalgebra::DMatrix;
use prodsamp::signals::random_symmetric;
use prodsamp::{Execution, FreqIndex, Graph, ProductGraph, ProductKind, ProductSpectrum};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Kronecker product straight from the entry formula
/// `(A ⊗ B)[(i1,i2),(j1,j2)] = A[i1,j1] B[i2,j2]`.
pub fn kron_entrywise(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |r, c| a[(r / br, c / bc)] * b[(r % br, c % bc)])
}

pub fn kron_fold(mats: &[DMatrix<f64>]) -> DMatrix<f64> {
    let mut acc = mats[0].clone();
    for m in &mats[1..] {
        acc = kron_entrywise(&acc, m);
    }
    acc
}

pub fn max_abs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn random_product(r: &mut ChaCha8Rng, dims: &[usize], kind: ProductKind) -> (ProductGraph, ProductSpectrum) {
    let factors: Vec<Graph> = dims.iter().map(|&n| random_symmetric(n, r.random())).collect();
    let pg = ProductGraph::new(factors, kind).unwrap();
    let ps = ProductSpectrum::new(&pg, Execution::Sequential).unwrap();
    (pg, ps)
}

/// `k` distinct random frequency tuples.
pub fn random_support(r: &mut ChaCha8Rng, dims: &[usize], k: usize) -> Vec<FreqIndex> {
    let total: usize = dims.iter().product();
    let flat = index::sample(r, total, k).into_vec();
    flat.into_iter()
        .map(|mut f| {
            let mut t = vec![0; dims.len()];
            for (slot, &d) in t.iter_mut().zip(dims).rev() {
                *slot = f % d;
                f /= d;
            }
            FreqIndex(t)
        })
        .collect()
}

pub fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let n: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    d / n
}

/// Sorted-descending eigenvalues of a dense symmetric matrix.
pub fn dense_eigs(a: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}
