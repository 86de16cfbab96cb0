//! Eigendecomposition of symmetric graph shifts, the graph Fourier
//! transform, and the factor-wise product spectrum.
//!
//! A product of symmetric factors shares the eigenbasis `V = ⊗ V⁽ʲ⁾` under
//! all three product kinds. Only the eigenvalues differ: products under
//! Kronecker, sums under Cartesian, and `∏(1 + λ⁽ʲ⁾) − 1` under the strong
//! product. [`ProductSpectrum`] keeps the factor decompositions only and
//! assembles product eigenpairs on demand.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::{DMatrix, DVectorView};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::exec::Execution;
use crate::graph::{Graph, ProductGraph, ProductKind, Radix};
use crate::linalg::{gram, kron_vec, matmul, symmetric_eigen};

const RESIDUAL_TOL: f64 = 1e-8;
const ORTHO_TOL: f64 = 1e-10;
/// Upper bound on the length of a product vector we are willing to allocate.
const MAX_VECTOR_LEN: usize = 1 << 28;

/// Eigenvectors (columns of `V`) and eigenvalues of a symmetric shift,
/// sorted by descending eigenvalue. `V` is orthonormal, so `V⁻¹ = Vᵀ`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    vectors: DMatrix<f64>,
    values: Vec<f64>,
}

impl Spectrum {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// The eigenvector matrix `V`.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    /// The inverse basis `U = V⁻¹ = Vᵀ`.
    pub fn inverse(&self) -> DMatrix<f64> {
        self.vectors.transpose()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column `k` of `V`.
    pub fn vector(&self, k: usize) -> Result<&[f64]> {
        if k >= self.n() {
            return Err(Error::OutOfRange(format!("frequency {k} of {}", self.n())));
        }
        let n = self.n();
        Ok(&self.vectors.as_slice()[k * n..(k + 1) * n])
    }

    /// Graph Fourier transform `x̂ = U x = Vᵀ x`.
    pub fn gft(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), x.len())?;
        let x = DVectorView::from_slice(x, x.len());
        Ok(self.vectors.tr_mul(&x).as_slice().to_vec())
    }

    /// Inverse transform `x = V x̂`.
    pub fn igft(&self, xhat: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), xhat.len())?;
        let xhat = DVectorView::from_slice(xhat, xhat.len());
        Ok((&self.vectors * xhat).as_slice().to_vec())
    }

    /// Assembles a spectrum from parts, checking the eigenpair invariants
    /// against `shift`.
    pub fn from_parts(shift: &DMatrix<f64>, vectors: DMatrix<f64>, values: Vec<f64>) -> Result<Self> {
        let s = Spectrum { vectors, values };
        s.validate(shift)?;
        Ok(s)
    }

    fn validate(&self, shift: &DMatrix<f64>) -> Result<()> {
        let n = self.n();
        if self.vectors.shape() != (n, n) || shift.shape() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: self.vectors.nrows(),
            });
        }
        let av = matmul(shift, &self.vectors);
        for k in 0..n {
            let v = self.vectors.column(k);
            let norm = v.norm();
            if (norm - 1.0).abs() > ORTHO_TOL {
                return Err(Error::NumericalFailure(format!(
                    "eigenvector {k} has norm {norm}"
                )));
            }
            let lambda = self.values[k];
            let res = (av.column(k) - v * lambda).norm();
            if res > RESIDUAL_TOL * (1.0 + lambda.abs()) * norm {
                return Err(Error::NumericalFailure(format!(
                    "eigenpair {k} residual {res:e}"
                )));
            }
        }
        let gram = gram(&self.vectors);
        let off = gram
            .iter()
            .enumerate()
            .map(|(idx, &g)| {
                let ideal = if idx % n == idx / n { 1.0 } else { 0.0 };
                (g - ideal).abs()
            })
            .fold(0.0, f64::max);
        if off > ORTHO_TOL {
            return Err(Error::NumericalFailure(format!(
                "eigenbasis not orthonormal (max |UV - I| = {off:e})"
            )));
        }
        Ok(())
    }
}

/// Eigendecomposition of a symmetric graph shift.
///
/// Eigenvalues are sorted descending; each eigenvector is flipped so that its
/// largest-magnitude entry (the first one, on ties) is positive.
pub fn eigendecompose(g: &Graph) -> Result<Spectrum> {
    if !g.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = g.n();
    let (eigenvalues, eigenvectors) = symmetric_eigen(g.shift())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));

    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eigenvectors.column(src);
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        vectors.column_mut(dst).copy_from(&(col * sign));
        values.push(eigenvalues[src]);
    }
    Spectrum::from_parts(g.shift(), vectors, values)
}

/// A product-graph frequency: one factor eigen-index per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FreqIndex(pub Vec<usize>);

impl FreqIndex {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for FreqIndex {
    fn from(v: Vec<usize>) -> Self {
        FreqIndex(v)
    }
}

/// Spectrum of a product graph, held as its factor spectra.
#[derive(Debug, Clone)]
pub struct ProductSpectrum {
    factors: Vec<Spectrum>,
    kind: ProductKind,
    radix: Radix,
}

impl ProductSpectrum {
    /// Eigendecomposes every factor of `pg`.
    pub fn new(pg: &ProductGraph, exec: Execution) -> Result<Self> {
        let spectra = exec.map_slice(pg.factors(), eigendecompose);
        let factors = spectra
            .into_iter()
            .enumerate()
            .map(|(j, s)| s.map_err(|e| e.in_factor(j)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_spectra(factors, pg.kind())
    }

    pub fn from_spectra(factors: Vec<Spectrum>, kind: ProductKind) -> Result<Self> {
        let radix = Radix::new(factors.iter().map(Spectrum::n).collect())?;
        Ok(ProductSpectrum {
            factors,
            kind,
            radix,
        })
    }

    pub fn factors(&self) -> &[Spectrum] {
        &self.factors
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn dims(&self) -> &[usize] {
        self.radix.dims()
    }

    pub fn n(&self) -> usize {
        self.radix.total()
    }

    pub fn radix(&self) -> &Radix {
        &self.radix
    }

    /// Checks that `f` addresses a valid frequency.
    pub fn check(&self, f: &[usize]) -> Result<()> {
        self.radix.encode(f).map(|_| ())
    }

    pub fn product_eigenvalue(&self, f: &[usize]) -> Result<f64> {
        self.check(f)?;
        Ok(self.eigenvalue_unchecked(f))
    }

    fn eigenvalue_unchecked(&self, f: &[usize]) -> f64 {
        self.kind
            .combine_eigenvalues(f.iter().zip(&self.factors).map(|(&i, s)| s.values[i]))
    }

    /// The product eigenvector `v⁽¹⁾ ⊗ … ⊗ v⁽ᴶ⁾` in flat node order.
    pub fn product_eigenvector(&self, f: &[usize]) -> Result<Vec<f64>> {
        self.check(f)?;
        if self.n() > MAX_VECTOR_LEN {
            return Err(Error::Overflow(format!("{} nodes", self.n())));
        }
        let cols: Vec<&[f64]> = f
            .iter()
            .zip(&self.factors)
            .map(|(&i, s)| s.vector(i))
            .collect::<Result<_>>()?;
        Ok(kron_vec(&cols))
    }

    /// All frequencies by descending product eigenvalue, exact ties broken by
    /// lexicographic tuple order. The enumeration is lazy.
    pub fn order_frequencies(&self) -> FrequencyOrder<'_> {
        FrequencyOrder::new(self)
    }

    /// The first `k` entries of [`order_frequencies`](Self::order_frequencies).
    pub fn top_frequencies(&self, k: usize) -> Result<Vec<FreqIndex>> {
        if k > self.n() {
            return Err(Error::OutOfRange(format!(
                "requested {k} frequencies from a graph with {} nodes",
                self.n()
            )));
        }
        Ok(self.order_frequencies().take(k).collect())
    }
}

/// Lazy descending enumeration of product frequencies.
///
/// The product value is split by the sign of each factor's contribution. For
/// a fixed sign pattern the value is monotone in every coordinate once the
/// factor indices are sorted by magnitude (descending for non-negative
/// products, ascending for non-positive ones), so each pattern is walked as
/// a best-first lattice search. Patterns share one heap.
pub struct FrequencyOrder<'a> {
    spectrum: &'a ProductSpectrum,
    streams: Vec<Vec<Vec<usize>>>,
    heap: BinaryHeap<Node>,
    pending: std::vec::IntoIter<FreqIndex>,
}

struct Node {
    value: f64,
    tuple: Vec<usize>,
    stream: usize,
    pos: Vec<usize>,
    last: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| other.tuple.cmp(&self.tuple))
    }
}

impl<'a> FrequencyOrder<'a> {
    fn new(spectrum: &'a ProductSpectrum) -> Self {
        let kind = spectrum.kind;
        let base = |l: f64| match kind {
            ProductKind::Kronecker => l,
            ProductKind::Strong => 1.0 + l,
            ProductKind::Cartesian => l,
        };

        let streams: Vec<Vec<Vec<usize>>> = if kind == ProductKind::Cartesian {
            // sums: factor spectra are already sorted descending
            vec![spectrum.factors.iter().map(|s| (0..s.n()).collect()).collect()]
        } else {
            let parts: Vec<[Vec<usize>; 2]> = spectrum
                .factors
                .iter()
                .map(|s| {
                    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) =
                        (0..s.n()).partition(|&i| base(s.values[i]) >= 0.0);
                    let mag = |i: &usize| base(s.values[*i]).abs();
                    pos.sort_by(|a, b| mag(b).total_cmp(&mag(a)).then(a.cmp(b)));
                    neg.sort_by(|a, b| mag(a).total_cmp(&mag(b)).then(a.cmp(b)));
                    [pos, neg]
                })
                .collect();
            let j = parts.len();
            let mut out = Vec::new();
            for pattern in 0u64..(1u64 << j) {
                let negs = pattern.count_ones();
                let mut lists = Vec::with_capacity(j);
                for (f, p) in parts.iter().enumerate() {
                    let neg = (pattern >> f) & 1 == 1;
                    lists.push(p[neg as usize].clone());
                }
                if lists.iter().any(Vec::is_empty) {
                    continue;
                }
                if negs % 2 == 1 {
                    // non-positive products: descending value means ascending
                    // magnitude, which the negative lists already have; the
                    // positive lists must be flipped to ascending too
                    for (f, list) in lists.iter_mut().enumerate() {
                        if (pattern >> f) & 1 == 0 {
                            list.reverse();
                        }
                    }
                } else {
                    for (f, list) in lists.iter_mut().enumerate() {
                        if (pattern >> f) & 1 == 1 {
                            list.reverse();
                        }
                    }
                }
                out.push(lists);
            }
            out
        };

        let mut it = FrequencyOrder {
            spectrum,
            streams,
            heap: BinaryHeap::new(),
            pending: Vec::new().into_iter(),
        };
        for s in 0..it.streams.len() {
            let pos = vec![0; spectrum.order()];
            let node = it.node(s, pos, 0);
            it.heap.push(node);
        }
        it
    }

    fn node(&self, stream: usize, pos: Vec<usize>, last: usize) -> Node {
        let tuple: Vec<usize> = pos
            .iter()
            .zip(&self.streams[stream])
            .map(|(&p, list)| list[p])
            .collect();
        // + 0.0 folds -0.0 into 0.0 so both compare as one tie group
        let value = self.spectrum.eigenvalue_unchecked(&tuple) + 0.0;
        Node {
            value,
            tuple,
            stream,
            pos,
            last,
        }
    }

    fn expand(&mut self, n: &Node) {
        let lists = &self.streams[n.stream];
        for c in n.last..lists.len() {
            if n.pos[c] + 1 < lists[c].len() {
                let mut pos = n.pos.clone();
                pos[c] += 1;
                let child = self.node(n.stream, pos, c);
                self.heap.push(child);
            }
        }
    }
}

impl Iterator for FrequencyOrder<'_> {
    type Item = FreqIndex;

    fn next(&mut self) -> Option<FreqIndex> {
        if let Some(f) = self.pending.next() {
            return Some(f);
        }
        let first = self.heap.pop()?;
        let value = first.value;
        self.expand(&first);
        let mut batch = vec![first.tuple];
        while self.heap.peek().is_some_and(|n| n.value == value) {
            let n = self.heap.pop().expect("peeked");
            self.expand(&n);
            batch.push(n.tuple);
        }
        batch.sort();
        self.pending = batch
            .into_iter()
            .map(FreqIndex)
            .collect::<Vec<_>>()
            .into_iter();
        self.pending.next()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn k2() -> Graph {
        Graph::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn k2_product(kind: ProductKind) -> ProductSpectrum {
        let pg = ProductGraph::new(vec![k2(), k2()], kind).unwrap();
        ProductSpectrum::new(&pg, Execution::Sequential).unwrap()
    }

    #[test]
    fn k2_spectrum() {
        let s = eigendecompose(&k2()).unwrap();
        assert!((s.values()[0] - 1.0).abs() < 1e-14);
        assert!((s.values()[1] + 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v0 = s.vector(0).unwrap();
        assert!((v0[0] - r).abs() < 1e-14 && (v0[1] - r).abs() < 1e-14);
        let v1 = s.vector(1).unwrap();
        assert!((v1[0].abs() - r).abs() < 1e-14 && (v1[0] + v1[1]).abs() < 1e-14);
        // sign convention: first largest-magnitude entry positive
        assert!(v1[0] > 0.0);
    }

    #[test]
    fn zero_matrix_spectrum() {
        let g = Graph::new(DMatrix::zeros(3, 3)).unwrap();
        let s = eigendecompose(&g).unwrap();
        assert_eq!(s.values(), &[0.0, 0.0, 0.0]);
        let uv = s.inverse() * s.vectors();
        assert!(max_abs_diff(&uv, &DMatrix::identity(3, 3)) <= 1e-10);
    }

    #[test]
    fn directed_graph_rejected() {
        let d = Graph::from_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(eigendecompose(&d), Err(Error::NotSymmetric)));
    }

    #[test]
    fn gft_examples() {
        let s = eigendecompose(&k2()).unwrap();
        let e0 = s.gft(s.vector(0).unwrap()).unwrap();
        assert!((e0[0] - 1.0).abs() < 1e-10 && e0[1].abs() < 1e-10);
        assert_eq!(s.gft(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        let x = [0.3, -1.7];
        let back = s.igft(&s.gft(&x).unwrap()).unwrap();
        assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-12);
        assert!(matches!(
            s.gft(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn igft_examples() {
        let s = eigendecompose(&k2()).unwrap();
        assert_eq!(s.igft(&[1.0, 0.0]).unwrap(), s.vector(0).unwrap().to_vec());
        assert_eq!(s.igft(&[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(s.igft(&[0.0; 3]).is_err());
    }

    #[test]
    fn product_eigenvalue_examples() {
        let kr = k2_product(ProductKind::Kronecker);
        assert!((kr.product_eigenvalue(&[0, 1]).unwrap() + 1.0).abs() < 1e-14);
        let ca = k2_product(ProductKind::Cartesian);
        assert!((ca.product_eigenvalue(&[0, 0]).unwrap() - 2.0).abs() < 1e-14);
        let st = k2_product(ProductKind::Strong);
        assert!((st.product_eigenvalue(&[1, 1]).unwrap() + 1.0).abs() < 1e-14);
        assert!(matches!(kr.product_eigenvalue(&[2, 0]), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn product_eigenvector_examples() {
        let kr = k2_product(ProductKind::Kronecker);
        let v = kr.product_eigenvector(&[0, 0]).unwrap();
        for x in v {
            assert!((x - 0.5).abs() < 1e-14);
        }
        let one = Graph::from_rows(&[vec![3.0]]).unwrap();
        let pg = ProductGraph::new(vec![one.clone(), one], ProductKind::Kronecker).unwrap();
        let ps = ProductSpectrum::new(&pg, Execution::Sequential).unwrap();
        assert_eq!(ps.product_eigenvector(&[0, 0]).unwrap(), vec![1.0]);
        assert_eq!(ps.product_eigenvalue(&[0, 0]).unwrap(), 9.0);
    }

    #[test]
    fn order_cartesian_k2() {
        let ps = k2_product(ProductKind::Cartesian);
        let order: Vec<Vec<usize>> = ps.order_frequencies().map(|f| f.0).collect();
        assert_eq!(order, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn order_kronecker_k2() {
        let ps = k2_product(ProductKind::Kronecker);
        let vals: Vec<f64> = ps
            .order_frequencies()
            .map(|f| ps.product_eigenvalue(&f.0).unwrap())
            .collect();
        let want = [1.0, 1.0, -1.0, -1.0];
        for (v, w) in vals.iter().zip(want) {
            assert!((v - w).abs() < 1e-14);
        }
    }

    #[test]
    fn top_frequencies_rejects_too_many() {
        let ps = k2_product(ProductKind::Kronecker);
        assert_eq!(ps.top_frequencies(4).unwrap().len(), 4);
        assert!(matches!(ps.top_frequencies(5), Err(Error::OutOfRange(_))));
    }
}
