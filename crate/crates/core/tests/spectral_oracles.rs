mod common;

use common::{dense_eigs, random_product, rng};
use nalgebra::{DMatrix, DVector};
use prodsamp::signals::random_symmetric;
use prodsamp::{eigendecompose, Execution, FreqIndex, Graph, ProductGraph, ProductKind, ProductSpectrum};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn random_symmetric_reassembles() {
    for seed in 0..20 {
        let g = random_symmetric(6, seed);
        let s = eigendecompose(&g).unwrap();
        let lam = DMatrix::from_diagonal(&DVector::from_vec(s.values().to_vec()));
        let back = s.vectors() * lam * s.inverse();
        let err = (back - g.shift()).abs().max();
        assert!(err <= 1e-8, "seed {seed}: {err:e}");
        for w in s.values().windows(2) {
            assert!(w[0] >= w[1]);
        }
    }
}

#[test]
fn gft_round_trips() {
    let s = eigendecompose(&random_symmetric(8, 3)).unwrap();
    let mut r = rng(1);
    let xhat: Vec<f64> = (0..8).map(|_| r.random_range(-1.0..1.0)).collect();
    let back = s.gft(&s.igft(&xhat).unwrap()).unwrap();
    for (a, b) in xhat.iter().zip(&back) {
        assert!((a - b).abs() <= 1e-10);
    }
}

#[test]
fn product_spectrum_matches_dense_for_all_kinds() {
    let mut r = rng(7);
    for kind in ProductKind::ALL {
        for trial in 0..15 {
            let j = 1 + trial % 3;
            let dims: Vec<usize> = (0..j).map(|_| r.random_range(1..=5)).collect();
            let (pg, ps) = random_product(&mut r, &dims, kind);
            let a = pg.materialize().unwrap();
            let dense = dense_eigs(a.shift());
            let lazy: Vec<f64> = ps
                .order_frequencies()
                .map(|f| ps.product_eigenvalue(&f.0).unwrap())
                .collect();
            assert_eq!(lazy.len(), dense.len());
            for (l, d) in lazy.iter().zip(&dense) {
                assert!((l - d).abs() <= 1e-8, "{kind} {dims:?}: {l} vs {d}");
            }
            for flat in 0..ps.n() {
                let f = ps.radix().decode(flat).unwrap();
                let v = DVector::from_vec(ps.product_eigenvector(&f).unwrap());
                let lambda = ps.product_eigenvalue(&f).unwrap();
                let res = (a.shift() * &v - &v * lambda).norm();
                assert!(res <= 1e-8, "{kind} {f:?}: residual {res:e}");
            }
        }
    }
}

#[test]
fn product_eigenvectors_match_dense_columns() {
    // generic random factors have simple product spectra, so columns can be
    // matched by eigenvalue and compared up to sign
    let mut r = rng(11);
    let (pg, ps) = random_product(&mut r, &[3, 4], ProductKind::Kronecker);
    let dense = eigendecompose(&pg.materialize().unwrap()).unwrap();
    for flat in 0..ps.n() {
        let f = ps.radix().decode(flat).unwrap();
        let lambda = ps.product_eigenvalue(&f).unwrap();
        let (col, gap) = dense
            .values()
            .iter()
            .enumerate()
            .map(|(i, &d)| (i, (d - lambda).abs()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!(gap <= 1e-8);
        let v = ps.product_eigenvector(&f).unwrap();
        let d = dense.vector(col).unwrap();
        let dot: f64 = v.iter().zip(d).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - 1.0).abs() <= 1e-8, "{f:?}: |<v, d>| = {dot}");
    }
}

#[test]
fn strong_product_example_matches_dense_multiset() {
    let k2 = Graph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
    let pg = ProductGraph::new(vec![k2.clone(), k2], ProductKind::Strong).unwrap();
    let ps = ProductSpectrum::new(&pg, Execution::Sequential).unwrap();
    assert!((ps.product_eigenvalue(&[1, 1]).unwrap() + 1.0).abs() < 1e-14);
    let dense = dense_eigs(pg.materialize().unwrap().shift());
    // K4: 3, -1, -1, -1
    let want = [3.0, -1.0, -1.0, -1.0];
    for (d, w) in dense.iter().zip(want) {
        assert!((d - w).abs() < 1e-12);
    }
}

/// Brute-force oracle: enumerate every tuple, sort by value then tuple.
fn brute_order(ps: &ProductSpectrum) -> Vec<FreqIndex> {
    let mut all: Vec<(f64, Vec<usize>)> = (0..ps.n())
        .map(|flat| {
            let t = ps.radix().decode(flat).unwrap();
            (ps.product_eigenvalue(&t).unwrap() + 0.0, t)
        })
        .collect();
    all.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
    all.into_iter().map(|(_, t)| FreqIndex(t)).collect()
}

fn diag_graph(values: &[i32]) -> Graph {
    let d = DVector::from_iterator(values.len(), values.iter().map(|&v| v as f64));
    Graph::new(DMatrix::from_diagonal(&d)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Small integer spectra force many exact ties, zeros and sign changes.
    #[test]
    fn lazy_order_matches_brute_force(
        spectra in prop::collection::vec(prop::collection::vec(-3i32..=3, 1..5), 1..4),
        kind_ix in 0usize..3,
    ) {
        let kind = ProductKind::ALL[kind_ix];
        let factors: Vec<Graph> = spectra.iter().map(|v| diag_graph(v)).collect();
        let pg = ProductGraph::new(factors, kind).unwrap();
        let ps = ProductSpectrum::new(&pg, Execution::Sequential).unwrap();
        let lazy: Vec<FreqIndex> = ps.order_frequencies().collect();
        prop_assert_eq!(lazy, brute_order(&ps));
    }

    #[test]
    fn lazy_order_matches_brute_force_random(seed in any::<u64>(), kind_ix in 0usize..3) {
        let mut r = rng(seed);
        let j = r.random_range(1..=3);
        let dims: Vec<usize> = (0..j).map(|_| r.random_range(1..=6)).collect();
        let (_, ps) = random_product(&mut r, &dims, ProductKind::ALL[kind_ix]);
        let lazy: Vec<FreqIndex> = ps.order_frequencies().collect();
        prop_assert_eq!(lazy, brute_order(&ps));
    }

    #[test]
    fn gft_preserves_norm(seed in any::<u64>(), n in 1usize..12) {
        let s = eigendecompose(&random_symmetric(n, seed)).unwrap();
        let mut r = rng(seed ^ 0x55);
        let x: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        let xh = s.gft(&x).unwrap();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nh = xh.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((nx - nh).abs() <= 1e-10 * nx.max(1e-300));
    }
}
