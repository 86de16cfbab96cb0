//! Weighted graphs and their Kronecker, Cartesian and strong products.
//!
//! Product nodes are addressed either by a [`NodeTuple`] of factor node
//! indices or by a flat index. The flat index is the mixed-radix encoding
//! with factor 1 most significant, which is the row order of `A₁ ⊗ A₂ ⊗ …`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::kron;

/// Largest product that [`ProductGraph::materialize`] will build densely.
pub const MAX_DENSE_NODES: usize = 16_384;

/// A graph given by its weighted shift (adjacency) matrix. Entry `(m, n)`
/// holds the weight of the edge `n → m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    shift: DMatrix<f64>,
    symmetric: bool,
}

impl Graph {
    pub fn new(shift: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = shift.shape();
        if rows != cols || rows == 0 {
            return Err(Error::NonSquare { rows, cols });
        }
        let symmetric = shift == shift.transpose();
        Ok(Graph { shift, symmetric })
    }

    /// Builds a graph from row-major rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::NonSquare { rows: n, cols });
        }
        Graph::new(DMatrix::from_fn(n, cols, |i, j| rows[i][j]))
    }

    pub fn n(&self) -> usize {
        self.shift.nrows()
    }

    pub fn shift(&self) -> &DMatrix<f64> {
        &self.shift
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn into_shift(self) -> DMatrix<f64> {
        self.shift
    }
}

/// How factor graphs are composed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProductKind {
    #[serde(alias = "kron")]
    Kronecker,
    #[serde(alias = "cart")]
    Cartesian,
    Strong,
}

impl ProductKind {
    pub const ALL: [ProductKind; 3] = [
        ProductKind::Kronecker,
        ProductKind::Cartesian,
        ProductKind::Strong,
    ];

    /// Short name used on the command line and in CSV output.
    pub fn short_name(self) -> &'static str {
        match self {
            ProductKind::Kronecker => "kron",
            ProductKind::Cartesian => "cart",
            ProductKind::Strong => "strong",
        }
    }

    /// Pairwise composition of two shift matrices.
    pub fn compose(self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        match self {
            ProductKind::Kronecker => kron(a, b),
            ProductKind::Cartesian => cartesian(a, b),
            ProductKind::Strong => kron(a, b) + cartesian(a, b),
        }
    }

    /// Combines one eigenvalue per factor into the product eigenvalue. The
    /// evaluation order is fixed (factor 1 first) so the result is
    /// reproducible bit for bit.
    pub fn combine_eigenvalues<I: IntoIterator<Item = f64>>(self, values: I) -> f64 {
        match self {
            ProductKind::Kronecker => values.into_iter().fold(1.0, |acc, l| acc * l),
            ProductKind::Cartesian => values.into_iter().fold(0.0, |acc, l| acc + l),
            ProductKind::Strong => values.into_iter().fold(1.0, |acc, l| acc * (1.0 + l)) - 1.0,
        }
    }
}

impl fmt::Display for ProductKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl std::str::FromStr for ProductKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kron" | "kronecker" => Ok(ProductKind::Kronecker),
            "cart" | "cartesian" => Ok(ProductKind::Cartesian),
            "strong" => Ok(ProductKind::Strong),
            other => Err(Error::BadParam(format!("unknown product kind '{other}'"))),
        }
    }
}

fn cartesian(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let ia = DMatrix::identity(a.nrows(), a.ncols());
    let ib = DMatrix::identity(b.nrows(), b.ncols());
    kron(a, &ib) + kron(&ia, b)
}

/// Indices of one product node, one per factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeTuple(pub Vec<usize>);

impl NodeTuple {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for NodeTuple {
    fn from(v: Vec<usize>) -> Self {
        NodeTuple(v)
    }
}

/// Mixed-radix index arithmetic over factor sizes `dims`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radix {
    dims: Vec<usize>,
    total: usize,
}

impl Radix {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(Error::BadParam("factor sizes must be positive".into()));
        }
        let total = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or_else(|| Error::Overflow(format!("node count of {dims:?}")))?;
        Ok(Radix { dims, total })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn encode(&self, t: &[usize]) -> Result<usize> {
        if t.len() != self.dims.len() {
            return Err(Error::OutOfRange(format!(
                "tuple has {} components, expected {}",
                t.len(),
                self.dims.len()
            )));
        }
        let mut flat = 0usize;
        for (j, (&i, &d)) in t.iter().zip(&self.dims).enumerate() {
            if i >= d {
                return Err(Error::OutOfRange(format!(
                    "component {} is {i}, factor size {d}",
                    j + 1
                )));
            }
            flat = flat * d + i;
        }
        Ok(flat)
    }

    pub fn decode(&self, flat: usize) -> Result<Vec<usize>> {
        if flat >= self.total {
            return Err(Error::OutOfRange(format!(
                "flat index {flat} with {} nodes",
                self.total
            )));
        }
        let mut t = vec![0; self.dims.len()];
        let mut rest = flat;
        for (slot, &d) in t.iter_mut().zip(&self.dims).rev() {
            *slot = rest % d;
            rest /= d;
        }
        Ok(t)
    }
}

/// An ordered list of symmetric factor graphs composed under one product.
#[derive(Debug, Clone)]
pub struct ProductGraph {
    factors: Vec<Graph>,
    kind: ProductKind,
    radix: Radix,
}

impl ProductGraph {
    pub fn new(factors: Vec<Graph>, kind: ProductKind) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::BadParam("a product needs at least one factor".into()));
        }
        for (j, g) in factors.iter().enumerate() {
            if !g.is_symmetric() {
                return Err(Error::NotSymmetric.in_factor(j));
            }
        }
        let radix = Radix::new(factors.iter().map(Graph::n).collect())?;
        Ok(ProductGraph {
            factors,
            kind,
            radix,
        })
    }

    pub fn factors(&self) -> &[Graph] {
        &self.factors
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    /// Number of factors `J`.
    pub fn order(&self) -> usize {
        self.factors.len()
    }

    pub fn dims(&self) -> &[usize] {
        self.radix.dims()
    }

    /// Total node count `N = ∏ n_j`.
    pub fn n(&self) -> usize {
        self.radix.total()
    }

    pub fn radix(&self) -> &Radix {
        &self.radix
    }

    pub fn flat_index(&self, t: &[usize]) -> Result<usize> {
        self.radix.encode(t)
    }

    pub fn tuple_index(&self, flat: usize) -> Result<NodeTuple> {
        self.radix.decode(flat).map(NodeTuple)
    }

    /// Dense shift of the whole product graph, folded left to right. Only
    /// meant for oracles and small exports.
    pub fn materialize(&self) -> Result<Graph> {
        let n = self.n();
        if n > MAX_DENSE_NODES {
            return Err(Error::Overflow(format!(
                "{n} nodes exceeds the dense limit of {MAX_DENSE_NODES}"
            )));
        }
        let mut acc = self.factors[0].shift().clone();
        for g in &self.factors[1..] {
            acc = self.kind.compose(&acc, g.shift());
        }
        Graph::new(acc)
    }
}
