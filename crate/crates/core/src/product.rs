//! Sampling and recovery on product graphs through the graph atoms.
//!
//! A product support of `K` frequency tuples is projected onto per-factor
//! supports `R_j`. Each factor gets its own [`SamplingPlan`] with `|R_j|`
//! samples, and the product operators `Ψ = ⊗Ψ⁽ʲ⁾`, `Φ = ⊗Φ⁽ʲ⁾` are applied
//! implicitly: sampling is a gather over the Cartesian product of the factor
//! sample sets, interpolation is a sequence of mode products. Nothing of size
//! `N×N` is ever formed.

use std::collections::{BTreeSet, HashSet};

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::exec::Execution;
use crate::graph::{NodeTuple, ProductKind, Radix};
use crate::sampling::{build_plan, sampled_graph, select_sample_set_with, SamplingPlan, SelectionStrategy, SupportSet};
use crate::spectral::{FreqIndex, ProductSpectrum};

/// Projects a product support onto its factors. Returns the sorted distinct
/// components `R_j` and `S = ∏ |R_j|`.
pub fn project_support(support: &[FreqIndex]) -> Result<(Vec<Vec<usize>>, usize)> {
    let first = support.first().ok_or(Error::EmptySupport)?;
    let j = first.0.len();
    if j == 0 {
        return Err(Error::BadParam("frequency tuples must be non-empty".into()));
    }
    let mut sets = vec![BTreeSet::new(); j];
    for f in support {
        if f.0.len() != j {
            return Err(Error::BadParam(format!(
                "mixed tuple lengths {} and {}",
                j,
                f.0.len()
            )));
        }
        for (set, &i) in sets.iter_mut().zip(&f.0) {
            set.insert(i);
        }
    }
    let r: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
    let s = r
        .iter()
        .try_fold(1usize, |acc, rj| acc.checked_mul(rj.len()))
        .ok_or_else(|| Error::Overflow("sample count".into()))?;
    Ok((r, s))
}

/// How the factor sample sets of a product plan are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorSampling {
    /// Critical sampling: `|R_j|` nodes per factor picked by the strategy.
    Select(SelectionStrategy),
    /// `counts[j] ≥ |R_j|` nodes per factor. Disables the sampled shift.
    Oversample {
        strategy: SelectionStrategy,
        counts: Vec<usize>,
    },
    /// Caller-supplied factor sample sets (0-based), each of size `≥ |R_j|`.
    Explicit(Vec<Vec<usize>>),
}

/// Factor-wise sampling plan for a product graph.
#[derive(Debug, Clone)]
pub struct ProductSamplingPlan {
    kind: ProductKind,
    radix: Radix,
    factor_plans: Vec<SamplingPlan>,
    r: Vec<Vec<usize>>,
    s: usize,
    product_support: Vec<FreqIndex>,
    oversampled: bool,
}

/// Critically sampled product plan, one plan per graph atom.
pub fn build_product_plan(
    ps: &ProductSpectrum,
    support: &[FreqIndex],
    strategy: SelectionStrategy,
) -> Result<ProductSamplingPlan> {
    build_product_plan_with(ps, support, &FactorSampling::Select(strategy), Execution::default())
}

pub fn build_product_plan_with(
    ps: &ProductSpectrum,
    support: &[FreqIndex],
    sampling: &FactorSampling,
    exec: Execution,
) -> Result<ProductSamplingPlan> {
    let mut seen = HashSet::with_capacity(support.len());
    for f in support {
        ps.check(&f.0)?;
        if !seen.insert(f) {
            return Err(Error::BadParam(format!("frequency {:?} listed twice", f.0)));
        }
    }
    let (r, s) = project_support(support)?;
    let j = ps.order();

    let counts: Vec<usize> = match sampling {
        FactorSampling::Select(_) => r.iter().map(Vec::len).collect(),
        FactorSampling::Oversample { counts, .. } => {
            check_len(j, counts.len())?;
            counts.clone()
        }
        FactorSampling::Explicit(sets) => {
            check_len(j, sets.len())?;
            sets.iter().map(Vec::len).collect()
        }
    };

    let plans = exec.map_range(j, |f| -> Result<SamplingPlan> {
        let spec = &ps.factors()[f];
        let supp = SupportSet::new(r[f].clone(), spec.n())?;
        if counts[f] < supp.k() {
            return Err(Error::BadParam(format!(
                "{} samples for {} factor frequencies",
                counts[f],
                supp.k()
            )));
        }
        let nodes = match sampling {
            FactorSampling::Select(st) | FactorSampling::Oversample { strategy: st, .. } => {
                // nested data parallelism buys nothing at factor scale
                select_sample_set_with(Execution::Sequential, spec, &supp, *st, counts[f])?
            }
            FactorSampling::Explicit(sets) => sets[f].clone(),
        };
        build_plan(spec, &supp, &nodes)
    });
    let factor_plans = plans
        .into_iter()
        .enumerate()
        .map(|(f, p)| p.map_err(|e| e.in_factor(f)))
        .collect::<Result<Vec<_>>>()?;

    let oversampled = factor_plans.iter().any(|p| p.m() > p.k());
    let plan = ProductSamplingPlan {
        kind: ps.kind(),
        radix: ps.radix().clone(),
        factor_plans,
        r,
        s,
        product_support: support.to_vec(),
        oversampled,
    };
    plan.check_invariants()?;
    Ok(plan)
}

impl ProductSamplingPlan {
    /// Re-checks the structural guarantees of the plan: `K ≤ S ≤ K^J`, every
    /// support tuple lies in `⊗R_j`, and (unless oversampled) `m_j = |R_j|`.
    pub fn check_invariants(&self) -> Result<()> {
        let k = self.k();
        let j = self.order() as u32;
        let upper = k.checked_pow(j).unwrap_or(usize::MAX);
        if !(k <= self.s && self.s <= upper) {
            return Err(Error::Invariant(format!(
                "S = {} outside [K, K^J] = [{k}, {upper}]",
                self.s
            )));
        }
        for f in &self.product_support {
            for (c, (&i, rj)) in f.0.iter().zip(&self.r).enumerate() {
                if rj.binary_search(&i).is_err() {
                    return Err(Error::Invariant(format!(
                        "component {} of {:?} missing from R_{}",
                        c + 1,
                        f.0,
                        c + 1
                    )));
                }
            }
        }
        for (f, (p, rj)) in self.factor_plans.iter().zip(&self.r).enumerate() {
            if p.support().indices() != rj.as_slice() {
                return Err(Error::Invariant(format!("factor {} support differs from R", f + 1)));
            }
            if !self.oversampled && p.m() != rj.len() {
                return Err(Error::Invariant(format!(
                    "factor {} samples {} nodes for |R| = {}",
                    f + 1,
                    p.m(),
                    rj.len()
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> ProductKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.factor_plans.len()
    }

    /// Product node count `N`.
    pub fn n(&self) -> usize {
        self.radix.total()
    }

    pub fn dims(&self) -> &[usize] {
        self.radix.dims()
    }

    pub fn factor_plans(&self) -> &[SamplingPlan] {
        &self.factor_plans
    }

    /// Per-factor frequency sets `R_j` (0-based, sorted).
    pub fn r(&self) -> &[Vec<usize>] {
        &self.r
    }

    /// `S = ∏ |R_j|`.
    pub fn s(&self) -> usize {
        self.s
    }

    /// Original bandwidth `K`.
    pub fn k(&self) -> usize {
        self.product_support.len()
    }

    pub fn product_support(&self) -> &[FreqIndex] {
        &self.product_support
    }

    pub fn is_oversampled(&self) -> bool {
        self.oversampled
    }

    /// Number of product samples `∏ m_j` (equals `S` under critical sampling).
    pub fn sample_count(&self) -> usize {
        self.factor_plans.iter().map(SamplingPlan::m).product()
    }

    /// `σ_min(Ψ V_S) = ∏ σ_min(Ψ⁽ʲ⁾ V⁽ʲ⁾_{R_j})`.
    pub fn sigma_min(&self) -> f64 {
        self.factor_plans.iter().map(SamplingPlan::sigma_min).product()
    }

    /// Flat product-node index of every sample, in sample order.
    pub fn sample_flat_indices(&self) -> Vec<usize> {
        let sets: Vec<&[usize]> = self.factor_plans.iter().map(|p| p.sample_set()).collect();
        let mut out = vec![0usize];
        for (set, &d) in sets.iter().zip(self.radix.dims()) {
            let mut next = Vec::with_capacity(out.len() * set.len());
            for &base in &out {
                next.extend(set.iter().map(|&i| base * d + i));
            }
            out = next;
        }
        out
    }

    pub fn phi_factors(&self) -> Vec<&DMatrix<f64>> {
        self.factor_plans.iter().map(SamplingPlan::phi).collect()
    }
}

/// All combinations of the factor sample sets, ordered lexicographically by
/// position within each factor set (the row order of `⊗Ψ⁽ʲ⁾`).
pub fn product_sample_set(plan: &ProductSamplingPlan) -> Vec<NodeTuple> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for p in &plan.factor_plans {
        let mut next = Vec::with_capacity(out.len() * p.m());
        for prefix in &out {
            for &i in p.sample_set() {
                let mut t = prefix.clone();
                t.push(i);
                next.push(t);
            }
        }
        out = next;
    }
    out.into_iter().map(NodeTuple).collect()
}

/// `x_M = (⊗Ψ⁽ʲ⁾) x` as a gather.
pub fn product_sample(x: &[f64], plan: &ProductSamplingPlan) -> Result<Vec<f64>> {
    check_len(plan.n(), x.len())?;
    Ok(plan.sample_flat_indices().into_iter().map(|i| x[i]).collect())
}

/// `x' = (⊗Φ⁽ʲ⁾) x_M` via mode products.
pub fn product_reconstruct(x_m: &[f64], plan: &ProductSamplingPlan) -> Result<Vec<f64>> {
    product_reconstruct_with(Execution::default(), x_m, plan)
}

pub fn product_reconstruct_with(
    exec: Execution,
    x_m: &[f64],
    plan: &ProductSamplingPlan,
) -> Result<Vec<f64>> {
    check_len(plan.sample_count(), x_m.len())?;
    kron_apply_with(exec, &plan.phi_factors(), x_m)
}

/// The factors `A_M⁽ʲ⁾ = (W⁽ʲ⁾)⁻¹ Λ_{R_j} W⁽ʲ⁾` of the sampled product shift.
/// Composing them under the plan's product kind gives the shift the sampled
/// signal lives on.
pub fn sampled_product_shift(plan: &ProductSamplingPlan, ps: &ProductSpectrum) -> Result<Vec<DMatrix<f64>>> {
    check_len(plan.order(), ps.order())?;
    plan.factor_plans
        .iter()
        .zip(ps.factors())
        .enumerate()
        .map(|(f, (p, s))| {
            sampled_graph(p, s)
                .map(|g| g.shift().clone())
                .map_err(|e| e.in_factor(f))
        })
        .collect()
}

/// `(M⁽¹⁾ ⊗ … ⊗ M⁽ᴶ⁾) y` without forming the Kronecker product.
pub fn kron_apply(factors: &[&DMatrix<f64>], y: &[f64]) -> Result<Vec<f64>> {
    kron_apply_with(Execution::default(), factors, y)
}

/// [`kron_apply`] with an explicit execution policy.
///
/// `y` is viewed as a row-major tensor of shape `(q_1, …, q_J)`. Modes are
/// contracted from `J` down to `1`; after mode `j` the tensor has shape
/// `(q_1, …, q_{j-1}, p_j, …, p_J)`.
pub fn kron_apply_with(exec: Execution, factors: &[&DMatrix<f64>], y: &[f64]) -> Result<Vec<f64>> {
    if factors.is_empty() {
        return Err(Error::BadParam("kron_apply needs at least one factor".into()));
    }
    let q: Vec<usize> = factors.iter().map(|m| m.ncols()).collect();
    let p: Vec<usize> = factors.iter().map(|m| m.nrows()).collect();
    let q_total = q
        .iter()
        .try_fold(1usize, |a, &b| a.checked_mul(b))
        .ok_or_else(|| Error::Overflow("kron_apply input".into()))?;
    check_len(q_total, y.len())?;
    p.iter()
        .try_fold(1usize, |a, &b| a.checked_mul(b))
        .ok_or_else(|| Error::Overflow("kron_apply output".into()))?;

    let mut cur = y.to_vec();
    for j in (0..factors.len()).rev() {
        let m = factors[j];
        let (pj, qj) = (p[j], q[j]);
        let left: usize = q[..j].iter().product();
        let right: usize = p[j + 1..].iter().product();
        let mut out = vec![0.0; left * pj * right];
        let src = &cur;
        exec.for_each_chunk_mut(&mut out, right.max(1), |idx, dst| {
            if right == 0 {
                return;
            }
            let (a, r) = (idx / pj, idx % pj);
            let base = a * qj * right;
            for b in 0..qj {
                let coef = m[(r, b)];
                if coef == 0.0 {
                    continue;
                }
                let row = &src[base + b * right..base + (b + 1) * right];
                for (d, s) in dst.iter_mut().zip(row) {
                    *d += coef * s;
                }
            }
        });
        cur = out;
    }
    Ok(cur)
}

/// Multiply-add count of [`kron_apply`] for factor shapes `(p_j, q_j)`.
pub fn kron_apply_flops(shapes: &[(usize, usize)]) -> f64 {
    let mut total = 0.0;
    for j in 0..shapes.len() {
        let left: f64 = shapes[..j].iter().map(|s| s.1 as f64).product();
        let right: f64 = shapes[j + 1..].iter().map(|s| s.0 as f64).product();
        total += shapes[j].0 as f64 * shapes[j].1 as f64 * left * right;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Graph, ProductGraph};
    use crate::linalg::kron_all;

    fn fi(v: &[usize]) -> FreqIndex {
        FreqIndex(v.to_vec())
    }

    #[test]
    fn toy_support_projection() {
        // 1-based (1,1),(4,3),(3,3)
        let supp = [fi(&[0, 0]), fi(&[3, 2]), fi(&[2, 2])];
        let (r, s) = project_support(&supp).unwrap();
        assert_eq!(r, vec![vec![0, 2, 3], vec![0, 2]]);
        assert_eq!(s, 6);
    }

    #[test]
    fn projection_bounds_are_tight() {
        let (r, s) = project_support(&[fi(&[2, 1, 0])]).unwrap();
        assert!(r.iter().all(|x| x.len() == 1));
        assert_eq!(s, 1);

        let supp: Vec<FreqIndex> = (0..4).map(|i| fi(&[i, (i + 1) % 4])).collect();
        let (r, s) = project_support(&supp).unwrap();
        assert_eq!((r[0].len(), r[1].len(), s), (4, 4, 16));
    }

    #[test]
    fn projection_errors() {
        assert!(matches!(project_support(&[]), Err(Error::EmptySupport)));
        assert!(matches!(
            project_support(&[fi(&[0, 0]), fi(&[0])]),
            Err(Error::BadParam(_))
        ));
    }

    #[test]
    fn kron_apply_identity() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        let i3 = DMatrix::<f64>::identity(3, 3);
        let y: Vec<f64> = (0..6).map(|v| v as f64 * 0.5 - 1.0).collect();
        assert_eq!(kron_apply(&[&i2, &i3], &y).unwrap(), y);
    }

    #[test]
    fn kron_apply_rectangular_matches_dense() {
        let a = DMatrix::from_fn(3, 2, |i, j| (i as f64 + 1.0) * 0.3 - j as f64);
        let b = DMatrix::from_fn(2, 4, |i, j| ((i * 4 + j) as f64).sin());
        let y: Vec<f64> = (0..8).map(|v| (v as f64).cos()).collect();
        let dense = kron_all([&a, &b]) * nalgebra::DVector::from_vec(y.clone());
        let got = kron_apply(&[&a, &b], &y).unwrap();
        for (g, d) in got.iter().zip(dense.iter()) {
            assert!((g - d).abs() < 1e-12);
        }
        assert!(kron_apply(&[&a, &b], &y[..7]).is_err());
        assert!(kron_apply(&[], &y).is_err());
    }

    #[test]
    fn kron_apply_sequential_and_parallel_agree() {
        let a = DMatrix::from_fn(4, 3, |i, j| ((i + 2 * j) as f64).sin());
        let b = DMatrix::from_fn(5, 5, |i, j| ((3 * i + j) as f64).cos());
        let y: Vec<f64> = (0..15).map(|v| v as f64).collect();
        let s = kron_apply_with(Execution::Sequential, &[&a, &b], &y).unwrap();
        let p = kron_apply_with(Execution::Parallel, &[&a, &b], &y).unwrap();
        assert_eq!(s, p);
    }

    #[test]
    fn flop_formula() {
        // square factors n×n: J n^(J+1)
        assert_eq!(kron_apply_flops(&[(4, 4), (4, 4)]), 2.0 * 64.0);
        assert_eq!(kron_apply_flops(&[(3, 2)]), 6.0);
    }

    #[test]
    fn single_factor_product_matches_single_plan() {
        let a = DMatrix::from_fn(5, 5, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let pg = ProductGraph::new(vec![Graph::new(a).unwrap()], ProductKind::Kronecker).unwrap();
        let ps = ProductSpectrum::new(&pg, Execution::Sequential).unwrap();
        let supp = [fi(&[0]), fi(&[2])];
        let plan = build_product_plan(&ps, &supp, SelectionStrategy::PivotedQr).unwrap();
        let ss = SupportSet::new(vec![0, 2], 5).unwrap();
        let single = build_plan(&ps.factors()[0], &ss, plan.factor_plans()[0].sample_set()).unwrap();
        assert_eq!(plan.factor_plans()[0].phi(), single.phi());
        assert_eq!(plan.s(), 2);
    }

    #[test]
    fn sample_set_order() {
        let a = DMatrix::from_fn(4, 4, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let b = DMatrix::from_fn(3, 3, |i, j| if i != j { 1.0 } else { 0.0 });
        let pg = ProductGraph::new(
            vec![Graph::new(a).unwrap(), Graph::new(b).unwrap()],
            ProductKind::Kronecker,
        )
        .unwrap();
        let ps = ProductSpectrum::new(&pg, Execution::Sequential).unwrap();
        let supp = [fi(&[0, 0]), fi(&[1, 1])];
        let plan = build_product_plan(&ps, &supp, SelectionStrategy::PivotedQr).unwrap();
        let tuples = product_sample_set(&plan);
        assert_eq!(tuples.len(), 4);
        let mut sorted_by_pos = tuples.clone();
        let pos = |t: &NodeTuple| {
            t.0.iter()
                .zip(plan.factor_plans())
                .map(|(i, p)| p.sample_set().iter().position(|x| x == i).unwrap())
                .collect::<Vec<_>>()
        };
        sorted_by_pos.sort_by_key(pos);
        assert_eq!(tuples, sorted_by_pos);
        let flat: Vec<usize> = tuples.iter().map(|t| pg.flat_index(&t.0).unwrap()).collect();
        assert_eq!(flat, plan.sample_flat_indices());

        let ramp: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let xs = product_sample(&ramp, &plan).unwrap();
        assert_eq!(xs, flat.iter().map(|&i| i as f64).collect::<Vec<_>>());
        assert_eq!(product_sample(&[0.0; 12], &plan).unwrap(), vec![0.0; 4]);
        assert!(product_sample(&[0.0; 11], &plan).is_err());
        assert_eq!(product_reconstruct(&[0.0; 4], &plan).unwrap(), vec![0.0; 12]);
    }

    #[test]
    fn duplicate_and_out_of_range_support() {
        let a = DMatrix::from_fn(3, 3, |i, j| if i != j { 1.0 } else { 0.0 });
        let pg = ProductGraph::new(
            vec![Graph::new(a.clone()).unwrap(), Graph::new(a).unwrap()],
            ProductKind::Cartesian,
        )
        .unwrap();
        let ps = ProductSpectrum::new(&pg, Execution::Sequential).unwrap();
        assert!(matches!(
            build_product_plan(&ps, &[fi(&[0, 0]), fi(&[0, 0])], SelectionStrategy::PivotedQr),
            Err(Error::BadParam(_))
        ));
        assert!(matches!(
            build_product_plan(&ps, &[fi(&[0, 3])], SelectionStrategy::PivotedQr),
            Err(Error::OutOfRange(_))
        ));
        assert!(matches!(
            build_product_plan(&ps, &[], SelectionStrategy::PivotedQr),
            Err(Error::EmptySupport)
        ));
    }

    #[test]
    fn explicit_sets_report_factor_of_failure() {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 2.0, 1.0]));
        let pg = ProductGraph::new(
            vec![Graph::new(d.clone()).unwrap(), Graph::new(d).unwrap()],
            ProductKind::Kronecker,
        )
        .unwrap();
        let ps = ProductSpectrum::new(&pg, Execution::Sequential).unwrap();
        // V = I: frequency 0 lives on node 0 only
        let sets = FactorSampling::Explicit(vec![vec![0], vec![1]]);
        let err = build_product_plan_with(&ps, &[fi(&[0, 0])], &sets, Execution::Sequential).unwrap_err();
        assert!(matches!(err, Error::Factor { index: 2, .. }));
        assert!(matches!(err.root(), Error::RankDeficient { .. }));
    }

    #[test]
    fn oversampled_plan_disables_shift() {
        let a = DMatrix::from_fn(4, 4, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let pg = ProductGraph::new(
            vec![Graph::new(a.clone()).unwrap(), Graph::new(a).unwrap()],
            ProductKind::Kronecker,
        )
        .unwrap();
        let ps = ProductSpectrum::new(&pg, Execution::Sequential).unwrap();
        let sampling = FactorSampling::Oversample {
            strategy: SelectionStrategy::PivotedQr,
            counts: vec![2, 3],
        };
        let plan = build_product_plan_with(&ps, &[fi(&[0, 0])], &sampling, Execution::Sequential).unwrap();
        assert!(plan.is_oversampled());
        assert_eq!(plan.sample_count(), 6);
        assert_eq!(plan.s(), 1);
        let err = sampled_product_shift(&plan, &ps).unwrap_err();
        assert!(matches!(err.root(), Error::NotSquare { .. }));
    }
}
