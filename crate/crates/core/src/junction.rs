//! Junction Hamiltonians and monotone junction functions.
//!
//! A junction function `F0: R^N -> R` prescribes the desired condition
//! `u_t + F0(u_x) = 0` at the origin. It must be continuous and nonincreasing
//! in each argument. The families here are all continuous by construction;
//! monotonicity is structural for every family except the tabulated one,
//! where it is verified node by node at construction.

use crate::error::{Error, Result};
use crate::hamiltonians::{BranchHamiltonian, PiecewiseLinearFunction};

/// The tuple `(H^1, ..., H^N)` of coercive branch Hamiltonians, with their
/// lower nonincreasing hulls precomputed.
#[derive(Debug, Clone)]
pub struct JunctionHamiltonian {
    branches: Vec<BranchHamiltonian>,
    hulls: Vec<PiecewiseLinearFunction>,
}

impl JunctionHamiltonian {
    pub fn new(branches: Vec<BranchHamiltonian>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::DimensionMismatch { expected: 1, got: 0 });
        }
        let branches: Vec<BranchHamiltonian> = branches
            .into_iter()
            .enumerate()
            .map(|(i, b)| BranchHamiltonian::with_label(b.shape().clone(), i + 1))
            .collect::<Result<_>>()?;
        let hulls = branches.iter().map(|b| b.lower_monotone_hull()).collect();
        Ok(Self { branches, hulls })
    }

    pub fn from_shapes(shapes: Vec<PiecewiseLinearFunction>) -> Result<Self> {
        Self::new(
            shapes
                .into_iter()
                .map(BranchHamiltonian::new)
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.branches.len()
    }

    pub fn branch(&self, alpha: usize) -> &BranchHamiltonian {
        &self.branches[alpha]
    }

    pub fn branches(&self) -> &[BranchHamiltonian] {
        &self.branches
    }

    /// Lower nonincreasing hull of branch `alpha`.
    pub fn hull(&self, alpha: usize) -> &PiecewiseLinearFunction {
        &self.hulls[alpha]
    }

    fn check_dim(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(())
    }

    /// Componentwise `(min_a H^a(p^a), max_a H^a(p^a))`.
    pub fn h_min_max(&self, p: &[f64]) -> Result<(f64, f64)> {
        self.check_dim(p)?;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (b, &x) in self.branches.iter().zip(p) {
            let v = b.eval_ext(x);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok((lo, hi))
    }

    pub fn h_min(&self, p: &[f64]) -> Result<f64> {
        Ok(self.h_min_max(p)?.0)
    }

    pub fn h_max(&self, p: &[f64]) -> Result<f64> {
        Ok(self.h_min_max(p)?.1)
    }

    /// `H_-(p) = max_a H^a_-(p^a)`, the universal lower bound for effective
    /// junction conditions.
    pub fn big_h_minus(&self, p: &[f64]) -> Result<f64> {
        self.check_dim(p)?;
        Ok(self
            .hulls
            .iter()
            .zip(p)
            .map(|(h, &x)| h.eval_ext(x))
            .fold(f64::NEG_INFINITY, f64::max))
    }

    /// Restriction to a single branch, as a junction Hamiltonian of
    /// dimension one.
    pub fn restrict(&self, alpha: usize) -> JunctionHamiltonian {
        JunctionHamiltonian::new(vec![self.branches[alpha].clone()]).expect("single branch")
    }
}

/// A map `R^N -> R` over junction gradients, extended-real valued at
/// infinite coordinates. Implementors must be continuous and nonincreasing
/// in each argument on the finite part.
pub trait JunctionMap {
    fn dim(&self) -> usize;

    /// Total on extended reals: coordinates may be `+/-inf` and the result
    /// may be infinite.
    fn value(&self, p: &[f64]) -> f64;
}

/// Tagged families of monotone junction functions.
#[derive(Debug, Clone)]
pub enum JunctionFamily {
    /// `F0(p) = c`.
    Constant(f64),
    /// `F0(p) = a - sum_a b^a p^a` with `b^a >= 0`.
    AffineMonotone { a: f64, b: Vec<f64> },
    /// `F0(p) = max(A, max_a H^a_-(p^a))`, the flux-limited condition.
    FluxLimiter(f64),
    /// `F0(p) = A - (p - A)/eps`, one branch only; the steep-graph
    /// approximation of the Dirichlet-type gradient condition.
    EpsilonGraph { a: f64, eps: f64 },
    /// Values on a tensor grid, multilinear inside, constant continuation on
    /// the upper side and linear growth with slope `lower_slope` below.
    TabulatedMonotone {
        grids: Vec<Vec<f64>>,
        /// Row-major over the grid index tuple.
        values: Vec<f64>,
        lower_slope: f64,
    },
    PointwiseMax(Vec<JunctionFunction>),
    PointwiseMin(Vec<JunctionFunction>),
    /// `max(inner, H_-)`; the semi-coercification of `inner`.
    SemiCoercified(Box<JunctionFunction>),
}

/// A junction function: a family together with its dimension.
#[derive(Debug, Clone)]
pub struct JunctionFunction {
    family: JunctionFamily,
    dim: usize,
}

impl JunctionFunction {
    pub fn constant(c: f64, dim: usize) -> Self {
        Self { family: JunctionFamily::Constant(c), dim }
    }

    pub fn affine(a: f64, b: Vec<f64>) -> Result<Self> {
        if b.iter().any(|&c| c < 0.0) {
            return Err(Error::MonotonicityViolation(
                "affine coefficients must be nonnegative".into(),
            ));
        }
        let dim = b.len();
        Ok(Self { family: JunctionFamily::AffineMonotone { a, b }, dim })
    }

    pub fn flux_limiter(a: f64, dim: usize) -> Self {
        Self { family: JunctionFamily::FluxLimiter(a), dim }
    }

    pub fn epsilon_graph(a: f64, eps: f64) -> Result<Self> {
        if eps <= 0.0 {
            return Err(Error::Scenario("epsilon must be positive".into()));
        }
        Ok(Self { family: JunctionFamily::EpsilonGraph { a, eps }, dim: 1 })
    }

    /// Builds the tabulated family, rejecting any grid violation of
    /// componentwise monotonicity. Multilinear interpolation of monotone
    /// nodes is monotone, so the node check is exact.
    pub fn tabulated(grids: Vec<Vec<f64>>, values: Vec<f64>, lower_slope: f64) -> Result<Self> {
        let dim = grids.len();
        if dim == 0 {
            return Err(Error::Scenario("tabulated family needs at least one axis".into()));
        }
        let mut total = 1usize;
        for g in &grids {
            if g.len() < 2 {
                return Err(Error::Scenario("each tabulation axis needs two nodes".into()));
            }
            for w in g.windows(2) {
                if !(w[0] < w[1]) {
                    return Err(Error::Scenario("tabulation grids must be increasing".into()));
                }
            }
            total *= g.len();
        }
        if values.len() != total {
            return Err(Error::DimensionMismatch { expected: total, got: values.len() });
        }
        if lower_slope < 0.0 {
            return Err(Error::MonotonicityViolation(
                "lower continuation slope must be nonnegative".into(),
            ));
        }
        // adjacent-node monotonicity along every axis
        let shape: Vec<usize> = grids.iter().map(|g| g.len()).collect();
        let mut strides = vec![1usize; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * shape[k + 1];
        }
        for (flat, &v) in values.iter().enumerate() {
            for axis in 0..dim {
                let idx = flat / strides[axis] % shape[axis];
                if idx + 1 < shape[axis] {
                    let next = values[flat + strides[axis]];
                    if next > v + 1e-12 {
                        return Err(Error::MonotonicityViolation(format!(
                            "tabulated values increase along axis {axis} at flat index {flat}"
                        )));
                    }
                }
            }
            let _ = v;
        }
        Ok(Self {
            family: JunctionFamily::TabulatedMonotone { grids, values, lower_slope },
            dim,
        })
    }

    pub fn pointwise_max(members: Vec<JunctionFunction>) -> Result<Self> {
        let dim = Self::common_dim(&members)?;
        Ok(Self { family: JunctionFamily::PointwiseMax(members), dim })
    }

    pub fn pointwise_min(members: Vec<JunctionFunction>) -> Result<Self> {
        let dim = Self::common_dim(&members)?;
        Ok(Self { family: JunctionFamily::PointwiseMin(members), dim })
    }

    fn common_dim(members: &[JunctionFunction]) -> Result<usize> {
        let dim = members.first().map(|m| m.dim).ok_or(Error::Scenario(
            "pointwise combination needs at least one member".into(),
        ))?;
        for m in members {
            if m.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.dim });
            }
        }
        Ok(dim)
    }

    pub fn semi_coercified(inner: JunctionFunction) -> Self {
        let dim = inner.dim;
        Self { family: JunctionFamily::SemiCoercified(Box::new(inner)), dim }
    }

    pub fn family(&self) -> &JunctionFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluates the family at `p`, extended-real coordinates allowed.
    pub fn eval(&self, h: &JunctionHamiltonian, p: &[f64]) -> f64 {
        match &self.family {
            JunctionFamily::Constant(c) => *c,
            JunctionFamily::AffineMonotone { a, b } => {
                // -inf coordinates dominate: they push the value to +inf
                let mut acc = *a;
                for (&bk, &pk) in b.iter().zip(p) {
                    if bk == 0.0 {
                        continue;
                    }
                    if pk == f64::NEG_INFINITY {
                        return f64::INFINITY;
                    }
                    if pk == f64::INFINITY {
                        return f64::NEG_INFINITY;
                    }
                    acc -= bk * pk;
                }
                acc
            }
            JunctionFamily::FluxLimiter(a) => {
                let mut v = *a;
                for (alpha, &pk) in p.iter().enumerate() {
                    v = v.max(h.hull(alpha).eval_ext(pk));
                }
                v
            }
            JunctionFamily::EpsilonGraph { a, eps } => {
                let pk = p[0];
                if pk == f64::NEG_INFINITY {
                    return f64::INFINITY;
                }
                if pk == f64::INFINITY {
                    return f64::NEG_INFINITY;
                }
                a - (pk - a) / eps
            }
            JunctionFamily::TabulatedMonotone { grids, values, lower_slope } => {
                eval_tabulated(grids, values, *lower_slope, p)
            }
            JunctionFamily::PointwiseMax(ms) => ms
                .iter()
                .map(|m| m.eval(h, p))
                .fold(f64::NEG_INFINITY, f64::max),
            JunctionFamily::PointwiseMin(ms) => ms
                .iter()
                .map(|m| m.eval(h, p))
                .fold(f64::INFINITY, f64::min),
            JunctionFamily::SemiCoercified(inner) => {
                let mut v = inner.eval(h, p);
                for (alpha, &pk) in p.iter().enumerate() {
                    v = v.max(h.hull(alpha).eval_ext(pk));
                }
                v
            }
        }
    }

    /// Per-axis Lipschitz bound over the box `[lo, hi]` on axis `alpha`.
    pub fn axis_lipschitz(&self, h: &JunctionHamiltonian, alpha: usize, lo: f64, hi: f64) -> f64 {
        match &self.family {
            JunctionFamily::Constant(_) => 0.0,
            JunctionFamily::AffineMonotone { b, .. } => b[alpha],
            JunctionFamily::FluxLimiter(_) => h.hull(alpha).max_abs_slope_over(lo, hi),
            JunctionFamily::EpsilonGraph { eps, .. } => 1.0 / eps,
            JunctionFamily::TabulatedMonotone { grids, values, lower_slope } => {
                let mut m = *lower_slope;
                let shape: Vec<usize> = grids.iter().map(|g| g.len()).collect();
                let mut strides = vec![1usize; grids.len()];
                for k in (0..grids.len().saturating_sub(1)).rev() {
                    strides[k] = strides[k + 1] * shape[k + 1];
                }
                for flat in 0..values.len() {
                    let idx = flat / strides[alpha] % shape[alpha];
                    if idx + 1 < shape[alpha] {
                        let dv = values[flat] - values[flat + strides[alpha]];
                        let dx = grids[alpha][idx + 1] - grids[alpha][idx];
                        m = m.max((dv / dx).abs());
                    }
                }
                m
            }
            JunctionFamily::PointwiseMax(ms) | JunctionFamily::PointwiseMin(ms) => ms
                .iter()
                .map(|m| m.axis_lipschitz(h, alpha, lo, hi))
                .fold(0.0, f64::max),
            JunctionFamily::SemiCoercified(inner) => inner
                .axis_lipschitz(h, alpha, lo, hi)
                .max(h.hull(alpha).max_abs_slope_over(lo, hi)),
        }
    }
}

fn eval_tabulated(grids: &[Vec<f64>], values: &[f64], lower_slope: f64, p: &[f64]) -> f64 {
    // clamp every coordinate into the grid box, remembering the undershoot
    // below the lower edge; multilinear interpolation at the clamped point
    // plus lower_slope times the total undershoot realizes constant
    // continuation above and linear growth below.
    let dim = grids.len();
    let mut clamped = Vec::with_capacity(dim);
    let mut undershoot = 0.0;
    for (g, &x) in grids.iter().zip(p) {
        let lo = g[0];
        let hi = g[g.len() - 1];
        if x == f64::NEG_INFINITY {
            if lower_slope > 0.0 {
                return f64::INFINITY;
            }
            clamped.push(lo);
        } else if x < lo {
            undershoot += lo - x;
            clamped.push(lo);
        } else if x > hi || x == f64::INFINITY {
            clamped.push(hi);
        } else {
            clamped.push(x);
        }
    }
    let shape: Vec<usize> = grids.iter().map(|g| g.len()).collect();
    let mut strides = vec![1usize; dim];
    for k in (0..dim.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    // cell index and local coordinate per axis
    let mut base = Vec::with_capacity(dim);
    let mut theta = Vec::with_capacity(dim);
    for (g, &x) in grids.iter().zip(&clamped) {
        let mut i = g.partition_point(|&gx| gx <= x);
        i = i.clamp(1, g.len() - 1);
        base.push(i - 1);
        theta.push((x - g[i - 1]) / (g[i] - g[i - 1]));
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << dim) {
        let mut w = 1.0;
        let mut flat = 0;
        for axis in 0..dim {
            let up = (corner >> axis) & 1 == 1;
            w *= if up { theta[axis] } else { 1.0 - theta[axis] };
            flat += (base[axis] + up as usize) * strides[axis];
        }
        if w != 0.0 {
            acc += w * values[flat];
        }
    }
    acc + lower_slope * undershoot
}

/// Evaluates a junction function against `H` at `p`.
pub fn eval_junction(f: &JunctionFunction, h: &JunctionHamiltonian, p: &[f64]) -> Result<f64> {
    if p.len() != f.dim() || f.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: p.len() });
    }
    Ok(f.eval(h, p))
}

/// Componentwise branch min and max of `H` at `p`.
pub fn h_min_max(h: &JunctionHamiltonian, p: &[f64]) -> Result<(f64, f64)> {
    h.h_min_max(p)
}

/// `H_-(p)`, the maximum of the branch hulls.
pub fn big_h_minus(h: &JunctionHamiltonian, p: &[f64]) -> Result<f64> {
    h.big_h_minus(p)
}

/// `max(F0, H_-)`: the smallest semi-coercive junction function above `F0`
/// with the same relaxation.
pub fn semi_coercify(f: &JunctionFunction) -> JunctionFunction {
    JunctionFunction::semi_coercified(f.clone())
}

/// Freezes every coordinate of `p` except branch `alpha`, producing a
/// one-dimensional junction function to be used with `h.restrict(alpha)`.
pub fn restrict_to_branch(
    f: &JunctionFunction,
    h: &JunctionHamiltonian,
    p: &[f64],
    alpha: usize,
) -> Result<JunctionFunction> {
    if p.len() != f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: p.len() });
    }
    if alpha >= f.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: alpha + 1 });
    }
    let out = match f.family() {
        JunctionFamily::Constant(c) => JunctionFunction::constant(*c, 1),
        JunctionFamily::AffineMonotone { a, b } => {
            let mut shift = *a;
            for (k, (&bk, &pk)) in b.iter().zip(p).enumerate() {
                if k != alpha {
                    shift -= bk * pk;
                }
            }
            JunctionFunction::affine(shift, vec![b[alpha]])?
        }
        JunctionFamily::FluxLimiter(a) => {
            let mut level = *a;
            for (k, &pk) in p.iter().enumerate() {
                if k != alpha {
                    level = level.max(h.hull(k).eval_ext(pk));
                }
            }
            JunctionFunction::flux_limiter(level, 1)
        }
        JunctionFamily::EpsilonGraph { a, eps } => JunctionFunction::epsilon_graph(*a, *eps)?,
        JunctionFamily::TabulatedMonotone { grids, lower_slope, .. } => {
            // resample along the line through p in direction alpha
            let axis = &grids[alpha];
            let values: Vec<f64> = axis
                .iter()
                .map(|&q| {
                    let mut point = p.to_vec();
                    point[alpha] = q;
                    f.eval(h, &point)
                })
                .collect();
            JunctionFunction::tabulated(vec![axis.clone()], values, *lower_slope)?
        }
        JunctionFamily::PointwiseMax(ms) => JunctionFunction::pointwise_max(
            ms.iter()
                .map(|m| restrict_to_branch(m, h, p, alpha))
                .collect::<Result<_>>()?,
        )?,
        JunctionFamily::PointwiseMin(ms) => JunctionFunction::pointwise_min(
            ms.iter()
                .map(|m| restrict_to_branch(m, h, p, alpha))
                .collect::<Result<_>>()?,
        )?,
        JunctionFamily::SemiCoercified(inner) => {
            // the frozen coordinates contribute a constant hull level, the
            // free one keeps its own hull term
            let mut level = f64::NEG_INFINITY;
            for (k, &pk) in p.iter().enumerate() {
                if k != alpha {
                    level = level.max(h.hull(k).eval_ext(pk));
                }
            }
            let restricted_inner = restrict_to_branch(inner, h, p, alpha)?;
            let mut members = vec![
                JunctionFunction::semi_coercified(restricted_inner),
            ];
            if level > f64::NEG_INFINITY {
                members.push(JunctionFunction::flux_limiter(level, 1));
            }
            JunctionFunction::pointwise_max(members)?
        }
    };
    Ok(out)
}

/// A junction function bound to its Hamiltonian, as a [`JunctionMap`].
#[derive(Debug, Clone, Copy)]
pub struct Bound<'a> {
    pub f: &'a JunctionFunction,
    pub h: &'a JunctionHamiltonian,
}

impl<'a> Bound<'a> {
    pub fn new(f: &'a JunctionFunction, h: &'a JunctionHamiltonian) -> Self {
        Self { f, h }
    }
}

impl JunctionMap for Bound<'_> {
    fn dim(&self) -> usize {
        self.f.dim()
    }

    fn value(&self, p: &[f64]) -> f64 {
        self.f.eval(self.h, p)
    }
}

impl<M: JunctionMap + ?Sized> JunctionMap for &M {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn value(&self, p: &[f64]) -> f64 {
        (**self).value(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::shapes::{absolute_value, double_well};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn h1_abs() -> JunctionHamiltonian {
        JunctionHamiltonian::new(vec![absolute_value()]).unwrap()
    }

    fn h1_dw() -> JunctionHamiltonian {
        JunctionHamiltonian::new(vec![double_well()]).unwrap()
    }

    fn h2_mixed() -> JunctionHamiltonian {
        JunctionHamiltonian::new(vec![absolute_value(), double_well()]).unwrap()
    }

    #[test]
    fn eval_junction_families() {
        let h = h1_abs();
        let c = JunctionFunction::constant(1.0, 1);
        assert_eq!(eval_junction(&c, &h, &[2.0]).unwrap(), 1.0);

        let aff = JunctionFunction::affine(2.0, vec![1.0]).unwrap();
        assert_eq!(eval_junction(&aff, &h, &[0.0]).unwrap(), 2.0);

        let fl = JunctionFunction::flux_limiter(1.0, 1);
        assert_eq!(eval_junction(&fl, &h, &[-3.0]).unwrap(), 3.0);

        assert!(eval_junction(&c, &h, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn h_min_max_examples() {
        let habs2 = JunctionHamiltonian::new(vec![absolute_value(), absolute_value()]).unwrap();
        assert_eq!(h_min_max(&habs2, &[1.0, -2.0]).unwrap(), (1.0, 2.0));
        let h1 = h1_abs();
        assert_eq!(h_min_max(&h1, &[0.7]).unwrap(), (0.7, 0.7));
        let hm = JunctionHamiltonian::new(vec![absolute_value(), double_well()]).unwrap();
        assert_eq!(h_min_max(&hm, &[0.0, 0.0]).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn big_h_minus_examples() {
        let h1 = h1_abs();
        assert_eq!(big_h_minus(&h1, &[-2.0]).unwrap(), 2.0);
        let habs2 = JunctionHamiltonian::new(vec![absolute_value(), absolute_value()]).unwrap();
        assert_eq!(big_h_minus(&habs2, &[3.0, 3.0]).unwrap(), 0.0);
        let hm = JunctionHamiltonian::new(vec![double_well(), absolute_value()]).unwrap();
        assert!((big_h_minus(&hm, &[-1.5, 0.0]).unwrap() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn semi_coercify_examples() {
        let h = h1_abs();
        let sc = semi_coercify(&JunctionFunction::constant(1.0, 1));
        for p in [-4.0f64, -1.0, 0.0, 3.0] {
            let expect = 1.0f64.max((-p).max(0.0));
            assert!((sc.eval(&h, &[p]) - expect).abs() < 1e-12);
        }

        // a flux limiter with A >= min H is already semi-coercive
        let fl = JunctionFunction::flux_limiter(1.0, 1);
        let sc = semi_coercify(&fl);
        let mut p = -5.0;
        while p <= 5.0 {
            assert!((sc.eval(&h, &[p]) - fl.eval(&h, &[p])).abs() < 1e-12);
            p += 0.05;
        }

        // constant 0 over the double well reduces to the hull itself
        let hdw = h1_dw();
        let sc = semi_coercify(&JunctionFunction::constant(0.0, 1));
        let mut p = -4.0;
        while p <= 4.0 {
            assert!((sc.eval(&hdw, &[p]) - hdw.hull(0).eval(p)).abs() < 1e-12);
            p += 0.05;
        }
    }

    #[test]
    fn restriction_examples() {
        let h2 = JunctionHamiltonian::new(vec![absolute_value(), absolute_value()]).unwrap();
        let h1 = h2.restrict(0);

        let c = JunctionFunction::constant(1.0, 2);
        let r = restrict_to_branch(&c, &h2, &[0.0, 0.0], 0).unwrap();
        assert_eq!(r.eval(&h1, &[5.0]), 1.0);

        let aff = JunctionFunction::affine(2.0, vec![1.0, 1.0]).unwrap();
        let r = restrict_to_branch(&aff, &h2, &[0.0, 3.0], 0).unwrap();
        for q in [-2.0, 0.0, 1.5] {
            assert!((r.eval(&h1, &[q]) - (-1.0 - q)).abs() < 1e-12);
        }

        let fl = JunctionFunction::flux_limiter(1.0, 2);
        let r = restrict_to_branch(&fl, &h2, &[-4.0, 0.0], 1).unwrap();
        let h1b = h2.restrict(1);
        for q in [-4.0, -1.0, 0.0, 2.0] {
            let expect = 4.0f64.max(h2.hull(1).eval(q));
            assert!((r.eval(&h1b, &[q]) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn restriction_agrees_with_substitution() {
        let h = h2_mixed();
        let fns = [
            JunctionFunction::affine(1.0, vec![0.5, 2.0]).unwrap(),
            JunctionFunction::flux_limiter(0.5, 2),
            semi_coercify(&JunctionFunction::constant(0.3, 2)),
        ];
        let p = [0.7, -1.3];
        for f in &fns {
            for alpha in 0..2 {
                let r = restrict_to_branch(f, &h, &p, alpha).unwrap();
                let h1 = h.restrict(alpha);
                let mut q = -4.0;
                while q <= 4.0 {
                    let mut full = p.to_vec();
                    full[alpha] = q;
                    assert!(
                        (r.eval(&h1, &[q]) - f.eval(&h, &full)).abs() < 1e-12,
                        "alpha = {alpha}, q = {q}"
                    );
                    q += 0.13;
                }
            }
        }
    }

    #[test]
    fn tabulated_is_monotone_and_extends() {
        let f = JunctionFunction::tabulated(
            vec![vec![-1.0, 0.0, 1.0]],
            vec![3.0, 1.0, 1.0],
            2.0,
        )
        .unwrap();
        let h = h1_abs();
        assert_eq!(f.eval(&h, &[-0.5]), 2.0);
        assert_eq!(f.eval(&h, &[5.0]), 1.0); // constant continuation above
        assert_eq!(f.eval(&h, &[-2.0]), 3.0 + 2.0); // linear growth below
        assert_eq!(f.eval(&h, &[f64::NEG_INFINITY]), f64::INFINITY);

        // increasing values are rejected
        assert!(JunctionFunction::tabulated(
            vec![vec![0.0, 1.0]],
            vec![0.0, 1.0],
            0.0
        )
        .is_err());
    }

    #[test]
    fn monotonicity_audit_randomized() {
        let h = h2_mixed();
        let instances = vec![
            JunctionFunction::constant(0.7, 2),
            JunctionFunction::affine(1.0, vec![0.3, 1.7]).unwrap(),
            JunctionFunction::flux_limiter(0.5, 2),
            semi_coercify(&JunctionFunction::constant(-1.0, 2)),
            JunctionFunction::pointwise_max(vec![
                JunctionFunction::constant(0.2, 2),
                JunctionFunction::affine(0.0, vec![1.0, 0.0]).unwrap(),
            ])
            .unwrap(),
            JunctionFunction::pointwise_min(vec![
                JunctionFunction::constant(2.0, 2),
                JunctionFunction::affine(3.0, vec![0.0, 2.0]).unwrap(),
            ])
            .unwrap(),
            JunctionFunction::tabulated(
                vec![vec![-2.0, 0.0, 2.0], vec![-2.0, 0.0, 2.0]],
                vec![4.0, 3.0, 3.0, 2.5, 2.0, 1.0, 2.5, 1.0, 0.0],
                1.0,
            )
            .unwrap(),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in &instances {
            for _ in 0..1000 {
                let p: Vec<f64> = (0..2).map(|_| rng.gen_range(-4.0..4.0)).collect();
                let q: Vec<f64> = p.iter().map(|&x| x - rng.gen_range(0.0..3.0)).collect();
                assert!(
                    f.eval(&h, &q) >= f.eval(&h, &p) - 1e-12,
                    "monotonicity violated for {:?}",
                    f.family()
                );
            }
        }
    }

    #[test]
    fn semi_coercify_dominates_input_and_hull() {
        let h = h2_mixed();
        let f = JunctionFunction::affine(0.0, vec![0.2, 0.1]).unwrap();
        let sc = semi_coercify(&f);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p: Vec<f64> = (0..2).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let v = sc.eval(&h, &p);
            assert!(v >= f.eval(&h, &p) - 1e-12);
            assert!(v >= h.big_h_minus(&p).unwrap() - 1e-12);
        }
    }
}
