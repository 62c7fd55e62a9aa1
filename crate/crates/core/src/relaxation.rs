//! Relaxation of junction conditions.
//!
//! The sub-relaxation of `F0` is `sup over q >= p of min(F0(q), H_min(q))`,
//! the super-relaxation is `inf over q <= p of max(F0(q), H_max(q))`, and the
//! two compositions agree and define the relaxation `R F0`, the condition a
//! weak solution actually satisfies at the junction.
//!
//! For semi-coercive `F0` each one-sided relaxation is computed as a scalar
//! fixed point: a trial level `lambda` determines per branch the directed
//! level crossing `q^a(lambda)`, and `lambda - F0(q(lambda))` is strictly
//! increasing, so bisection finds the unique root. The same mechanism with a
//! two-sided crossing rule computes the Godunov fixed point
//! `lambda = F0(q) = G^a(q^a, p^a)` directly, which must agree with both
//! composition orders. A grid brute force over the defining sup/inf serves as
//! the independent oracle.

use crate::error::{Error, Result};
use crate::junction::{semi_coercify, Bound, JunctionFunction, JunctionHamiltonian, JunctionMap};
use crate::tol;

/// How a relaxation value was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxMethod {
    SemifluxLower,
    SemifluxUpper,
    SemifluxFull,
    Composed,
    BruteForce,
    ExplicitTensor,
    Riemann,
}

impl RelaxMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            RelaxMethod::SemifluxLower => "semiflux_lower",
            RelaxMethod::SemifluxUpper => "semiflux_upper",
            RelaxMethod::SemifluxFull => "semiflux_full",
            RelaxMethod::Composed => "composed",
            RelaxMethod::BruteForce => "brute_force",
            RelaxMethod::ExplicitTensor => "explicit_tensor",
            RelaxMethod::Riemann => "riemann",
        }
    }
}

/// A computed junction-condition value with the gradient realizing it.
#[derive(Debug, Clone)]
pub struct RelaxationValue {
    pub value: f64,
    pub witness: Vec<f64>,
    pub method: RelaxMethod,
}

/// Brute-force search mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BruteForceMode {
    Lower,
    Upper,
    Full,
}

fn check_point(dim: usize, p: &[f64]) -> Result<()> {
    if p.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
    }
    Ok(())
}

/// Bisection for a strictly increasing `g` with a root inside `[lo, hi]`.
/// Infinite `g` values are legal; only signs are used.
fn bisect_increasing<G: Fn(f64) -> f64>(g: G, mut lo: f64, mut hi: f64) -> f64 {
    if !(lo < hi) {
        return lo;
    }
    if g(lo) >= 0.0 {
        return lo;
    }
    if g(hi) <= 0.0 {
        return hi;
    }
    let mut iters = 0;
    while hi - lo > tol::BISECT_TOL && iters < tol::BISECT_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iters += 1;
    }
    0.5 * (lo + hi)
}

fn rightward(h: &JunctionHamiltonian, alpha: usize, p: f64, level: f64) -> f64 {
    if !p.is_finite() {
        return p;
    }
    h.branch(alpha)
        .level_crossing(p, level, crate::hamiltonians::CrossingDirection::Rightward)
}

fn leftward(h: &JunctionHamiltonian, alpha: usize, p: f64, level: f64) -> f64 {
    if !p.is_finite() {
        return p;
    }
    h.branch(alpha)
        .level_crossing(p, level, crate::hamiltonians::CrossingDirection::Leftward)
}

/// Rightward crossing with knife-edge protection for witness extraction
/// (levels carry fixed-point noise).
pub(crate) fn rightward_snapped(h: &JunctionHamiltonian, alpha: usize, p: f64, level: f64) -> f64 {
    if !p.is_finite() {
        return p;
    }
    h.branch(alpha).level_crossing_snapped(
        p,
        level,
        crate::hamiltonians::CrossingDirection::Rightward,
        tol::ROUTE_TOL,
    )
}

/// Leftward crossing with knife-edge protection, additionally tolerating the
/// level sitting a bisection-noise below the running minimum of `H` left of
/// `p` (where the exact crossing exists but the perturbed one diverges).
pub(crate) fn leftward_snapped(
    h: &JunctionHamiltonian,
    alpha: usize,
    p: f64,
    level: f64,
) -> Option<f64> {
    if !p.is_finite() {
        return Some(p);
    }
    let c = h.branch(alpha).level_crossing_snapped(
        p,
        level,
        crate::hamiltonians::CrossingDirection::Leftward,
        tol::ROUTE_TOL,
    );
    if c > f64::NEG_INFINITY {
        return Some(c);
    }
    let floor = h.hull(alpha).eval(p);
    if level >= floor - tol::ROUTE_TOL {
        Some(leftward(h, alpha, p, floor))
    } else {
        None
    }
}

/// Monotone 1-D solve of `F(witness with slot a = x) = lambda` on
/// `[xa, xb]`, assuming `F(xa) >= lambda >= F(xb)`.
fn solve_slot<M: JunctionMap>(
    f: &M,
    witness: &[f64],
    a: usize,
    mut xa: f64,
    mut xb: f64,
    lambda: f64,
) -> f64 {
    let mut probe = witness.to_vec();
    let mut iters = 0;
    while xb - xa > tol::BISECT_TOL && iters < tol::BISECT_MAX_ITERS {
        let mid = 0.5 * (xa + xb);
        probe[a] = mid;
        if f.value(&probe) >= lambda {
            xa = mid;
        } else {
            xb = mid;
        }
        iters += 1;
    }
    0.5 * (xa + xb)
}

/// Restores `F(witness) = lambda` when the fixed-point level sits exactly at
/// a jump of the crossing map. The raw crossing then lands on the near end
/// of a plateau of `q -> G^a(q, p^a)`; the defining flux relations hold
/// anywhere on the plateau while `F` still varies along it, so the witness
/// is moved outward branch by branch until the level is met.
fn refine_witness_on_plateaus<M: JunctionMap>(
    f: &M,
    h: &JunctionHamiltonian,
    lambda: f64,
    witness: &mut [f64],
    outward: &[crate::hamiltonians::CrossingDirection],
) {
    use crate::hamiltonians::CrossingDirection::*;
    let fit = 1e-10;
    for a in 0..witness.len() {
        let current = f.value(witness);
        if (current - lambda).abs() <= fit {
            return;
        }
        let level = h.branch(a).eval(witness[a]);
        if (level - lambda).abs() > tol::ROUTE_TOL {
            // not a crossing branch: its flux relation pins the witness
            continue;
        }
        match outward[a] {
            Rightward => {
                if current < lambda {
                    continue; // moving right only lowers F
                }
                let far = h.branch(a).plateau_end_rightward(witness[a], level);
                if !(far > witness[a]) {
                    continue;
                }
                let mut probe = witness.to_vec();
                probe[a] = far;
                if f.value(&probe) >= lambda {
                    witness[a] = far;
                    continue;
                }
                witness[a] = solve_slot(f, witness, a, witness[a], far, lambda);
            }
            Leftward => {
                if current > lambda {
                    continue; // moving left only raises F
                }
                let far = h.branch(a).plateau_end_leftward(witness[a], level);
                if !(far < witness[a]) {
                    continue;
                }
                let mut lo_x = if far.is_finite() { far } else { witness[a] - 1.0 };
                let mut probe = witness.to_vec();
                if !far.is_finite() {
                    let mut iters = 0;
                    loop {
                        probe[a] = lo_x;
                        if f.value(&probe) >= lambda || iters >= 60 {
                            break;
                        }
                        lo_x = witness[a] - 2.0 * (witness[a] - lo_x);
                        iters += 1;
                    }
                }
                probe[a] = lo_x;
                if f.value(&probe) < lambda {
                    if far.is_finite() {
                        witness[a] = far;
                    }
                    continue;
                }
                witness[a] = solve_slot(f, witness, a, lo_x, witness[a], lambda);
            }
        }
    }
}

/// `sup over q >= p of min(F(q), H_min(q))` for semi-coercive `F`.
///
/// The witness satisfies, per branch, either `q^a = p^a` with
/// `lambda <= H^a(p^a)` or `q^a > p^a` with `lambda = max of H^a on
/// [p^a, q^a]`; it is always `>= p` componentwise.
pub fn sub_relax_map<M: JunctionMap>(
    f: &M,
    h: &JunctionHamiltonian,
    p: &[f64],
) -> Result<RelaxationValue> {
    check_point(f.dim(), p)?;
    check_point(h.dim(), p)?;
    let f_p = f.value(p);
    let h_min = h.h_min(p)?;
    let q_of = |lambda: f64| -> Vec<f64> {
        (0..h.dim()).map(|a| rightward(h, a, p[a], lambda)).collect()
    };
    let g = |lambda: f64| lambda - f.value(&q_of(lambda));
    let lambda = bisect_increasing(g, f_p.min(h_min), f_p);
    let mut witness: Vec<f64> =
        (0..h.dim()).map(|a| rightward_snapped(h, a, p[a], lambda)).collect();
    let outward = vec![crate::hamiltonians::CrossingDirection::Rightward; h.dim()];
    refine_witness_on_plateaus(f, h, lambda, &mut witness, &outward);
    Ok(RelaxationValue {
        value: lambda,
        witness,
        method: RelaxMethod::SemifluxLower,
    })
}

/// `inf over q <= p of max(F(q), H_max(q))` for semi-coercive `F`.
///
/// The witness is `<= p` componentwise; a diverging leftward crossing means
/// `F` was not semi-coercive.
pub fn super_relax_map<M: JunctionMap>(
    f: &M,
    h: &JunctionHamiltonian,
    p: &[f64],
) -> Result<RelaxationValue> {
    check_point(f.dim(), p)?;
    check_point(h.dim(), p)?;
    let f_p = f.value(p);
    let h_max = h.h_max(p)?;
    let q_of = |lambda: f64| -> Vec<f64> {
        (0..h.dim()).map(|a| leftward(h, a, p[a], lambda)).collect()
    };
    let g = |lambda: f64| lambda - f.value(&q_of(lambda));
    let lambda = bisect_increasing(g, f_p, f_p.max(h_max));
    let mut witness = Vec::with_capacity(h.dim());
    for a in 0..h.dim() {
        match leftward_snapped(h, a, p[a], lambda) {
            Some(q) => witness.push(q),
            None => return Err(Error::NotSemiCoercive { branch: a + 1 }),
        }
    }
    let outward = vec![crate::hamiltonians::CrossingDirection::Leftward; h.dim()];
    refine_witness_on_plateaus(f, h, lambda, &mut witness, &outward);
    Ok(RelaxationValue {
        value: lambda,
        witness,
        method: RelaxMethod::SemifluxUpper,
    })
}

/// The Godunov fixed point: the unique `lambda` with
/// `lambda = F(q) = G^a(q^a, p^a)` for every branch, for semi-coercive `F`.
///
/// The crossing rule is two-sided: at levels above `H^a(p^a)` the preimage
/// of `q -> G^a(q, p^a)` lies right of `p^a` (first rightward crossing), at
/// levels below it lies left (first leftward crossing), and at equality it
/// is `p^a` itself.
pub fn godunov_relax_map<M: JunctionMap>(
    f: &M,
    h: &JunctionHamiltonian,
    p: &[f64],
) -> Result<RelaxationValue> {
    check_point(f.dim(), p)?;
    check_point(h.dim(), p)?;
    let f_p = f.value(p);
    let (h_min, h_max) = h.h_min_max(p)?;
    let q_at = |a: usize, lambda: f64| -> f64 {
        if lambda >= h.branch(a).eval(p[a]) {
            rightward(h, a, p[a], lambda)
        } else {
            leftward(h, a, p[a], lambda)
        }
    };
    let g = |lambda: f64| -> f64 {
        let mut q = Vec::with_capacity(h.dim());
        for a in 0..h.dim() {
            let qa = q_at(a, lambda);
            if qa == f64::NEG_INFINITY {
                // the level is below the reachable range of G^a(., p^a)
                return f64::NEG_INFINITY;
            }
            q.push(qa);
        }
        lambda - f.value(&q)
    };
    let lambda = bisect_increasing(g, f_p.min(h_min), f_p.max(h_max));
    let mut witness = Vec::with_capacity(h.dim());
    let mut outward = Vec::with_capacity(h.dim());
    for a in 0..h.dim() {
        if lambda >= h.branch(a).eval(p[a]) {
            witness.push(rightward_snapped(h, a, p[a], lambda));
            outward.push(crate::hamiltonians::CrossingDirection::Rightward);
        } else {
            match leftward_snapped(h, a, p[a], lambda) {
                Some(q) => witness.push(q),
                None => return Err(Error::NotSemiCoercive { branch: a + 1 }),
            }
            outward.push(crate::hamiltonians::CrossingDirection::Leftward);
        }
    }
    refine_witness_on_plateaus(f, h, lambda, &mut witness, &outward);
    Ok(RelaxationValue {
        value: lambda,
        witness,
        method: RelaxMethod::SemifluxFull,
    })
}

/// `max(F, H_-)` as a map: the semi-coercification of an arbitrary map.
#[derive(Clone, Copy)]
pub struct FlooredByHull<'a, M: JunctionMap> {
    pub inner: &'a M,
    pub h: &'a JunctionHamiltonian,
}

impl<M: JunctionMap> JunctionMap for FlooredByHull<'_, M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, p: &[f64]) -> f64 {
        let mut v = self.inner.value(p);
        for a in 0..self.h.dim() {
            v = v.max(self.h.hull(a).eval_ext(p[a]));
        }
        v
    }
}

/// The sub-relaxation of a semi-coercive map, itself a map.
#[derive(Clone, Copy)]
pub struct SubRelaxed<'a, M: JunctionMap> {
    pub inner: &'a M,
    pub h: &'a JunctionHamiltonian,
}

impl<M: JunctionMap> JunctionMap for SubRelaxed<'_, M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, p: &[f64]) -> f64 {
        if p.iter().any(|x| *x == f64::NEG_INFINITY) {
            // the sub-relaxation of a semi-coercive map is semi-coercive
            return f64::INFINITY;
        }
        sub_relax_map(self.inner, self.h, p)
            .expect("sub-relaxation of a semi-coercive map")
            .value
    }
}

/// The super-relaxation of a semi-coercive map, itself a map.
#[derive(Clone, Copy)]
pub struct SuperRelaxed<'a, M: JunctionMap> {
    pub inner: &'a M,
    pub h: &'a JunctionHamiltonian,
}

impl<M: JunctionMap> JunctionMap for SuperRelaxed<'_, M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, p: &[f64]) -> f64 {
        if p.iter().any(|x| *x == f64::NEG_INFINITY) {
            return f64::INFINITY;
        }
        super_relax_map(self.inner, self.h, p)
            .expect("super-relaxation of a semi-coercive map")
            .value
    }
}

/// The relaxation `R F0` of an arbitrary map. Semi-coercification is applied
/// internally (it does not change the relaxation), both composition orders
/// are computed, and their agreement within [`tol::ROUTE_TOL`] is enforced;
/// a mismatch indicates a representation bug and is reported as an error.
pub fn relax_map<M: JunctionMap>(
    f: &M,
    h: &JunctionHamiltonian,
    p: &[f64],
) -> Result<RelaxationValue> {
    check_point(f.dim(), p)?;
    check_point(h.dim(), p)?;
    let floored = FlooredByHull { inner: f, h };
    let sub = SubRelaxed { inner: &floored, h };
    let super_of_sub = super_relax_map(&sub, h, p)?;
    let sup = SuperRelaxed { inner: &floored, h };
    let sub_of_super = sub_relax_map(&sup, h, p)?;
    if (super_of_sub.value - sub_of_super.value).abs() > tol::ROUTE_TOL {
        return Err(Error::CommutationMismatch {
            p: p.to_vec(),
            first: super_of_sub.value,
            second: sub_of_super.value,
        });
    }
    Ok(RelaxationValue {
        value: super_of_sub.value,
        witness: super_of_sub.witness,
        method: RelaxMethod::Composed,
    })
}

/// Sub-relaxation of a junction function (expected semi-coercive; pass the
/// output of [`semi_coercify`] when unsure).
pub fn sub_relax(
    f0: &JunctionFunction,
    h: &JunctionHamiltonian,
    p: &[f64],
) -> Result<RelaxationValue> {
    sub_relax_map(&Bound::new(f0, h), h, p)
}

/// Super-relaxation of a junction function (expected semi-coercive).
pub fn super_relax(
    f0: &JunctionFunction,
    h: &JunctionHamiltonian,
    p: &[f64],
) -> Result<RelaxationValue> {
    super_relax_map(&Bound::new(f0, h), h, p)
}

/// The relaxation of a junction function; no semi-coercivity required.
pub fn relax(
    f0: &JunctionFunction,
    h: &JunctionHamiltonian,
    p: &[f64],
) -> Result<RelaxationValue> {
    relax_map(&Bound::new(f0, h), h, p)
}

/// Godunov fixed point of a junction function (expected semi-coercive).
pub fn godunov_relax(
    f0: &JunctionFunction,
    h: &JunctionHamiltonian,
    p: &[f64],
) -> Result<RelaxationValue> {
    godunov_relax_map(&Bound::new(f0, h), h, p)
}

/// The effective junction condition `R F0` as a reusable map, evaluated
/// through the Godunov fixed point of the semi-coercified input.
pub struct Relaxed<'a> {
    sc: JunctionFunction,
    h: &'a JunctionHamiltonian,
}

impl<'a> Relaxed<'a> {
    pub fn new(f0: &JunctionFunction, h: &'a JunctionHamiltonian) -> Self {
        Self { sc: semi_coercify(f0), h }
    }
}

impl JunctionMap for Relaxed<'_> {
    fn dim(&self) -> usize {
        self.sc.dim()
    }

    fn value(&self, p: &[f64]) -> f64 {
        if p.iter().any(|x| *x == f64::NEG_INFINITY) {
            return f64::INFINITY;
        }
        godunov_relax_map(&Bound::new(&self.sc, self.h), self.h, p)
            .expect("godunov fixed point of a semi-coercified function")
            .value
    }
}

/// Direct grid evaluation of the defining sup/inf: the independent oracle.
///
/// The search box extends, on each branch, to the last point where `H^a`
/// stays at or below the relevant level, plus `box_margin`; beyond it the
/// objective can only get worse. `Full` mode composes the two one-sided
/// searches on a shared grid with a quadrant dynamic program.
pub fn brute_force_relax(
    f0: &JunctionFunction,
    h: &JunctionHamiltonian,
    p: &[f64],
    box_margin: f64,
    grid_step: f64,
    mode: BruteForceMode,
) -> Result<RelaxationValue> {
    check_point(f0.dim(), p)?;
    check_point(h.dim(), p)?;
    if !(grid_step > 0.0) {
        return Err(Error::InvalidInterval { a: grid_step, b: 0.0 });
    }
    let n = h.dim();
    let f = Bound::new(f0, h);

    // rightmost point with H <= level per branch
    let right_extent = |a: usize, level: f64| -> f64 {
        let b = h.branch(a);
        let bp = b.shape().breakpoints();
        let (xn, yn) = bp[bp.len() - 1];
        if level >= yn {
            return xn + (level - yn) / b.shape().right_tail_slope();
        }
        for i in (1..bp.len()).rev() {
            let (xa, ya) = bp[i - 1];
            let (xb, yb) = bp[i];
            if ya <= level && level < yb {
                return xa + (level - ya) / ((yb - ya) / (xb - xa));
            }
            if yb <= level {
                return xb;
            }
        }
        bp[0].0
    };
    // leftmost point with H <= level per branch
    let left_extent = |a: usize, level: f64| -> f64 {
        let b = h.branch(a);
        let bp = b.shape().breakpoints();
        let (x0, y0) = bp[0];
        if level >= y0 {
            return x0 + (level - y0) / b.shape().left_tail_slope();
        }
        for i in 0..bp.len() - 1 {
            let (xa, ya) = bp[i];
            let (xb, yb) = bp[i + 1];
            if yb <= level && level < ya {
                return xa + (level - ya) / ((yb - ya) / (xb - xa));
            }
            if ya <= level {
                return xa;
            }
        }
        bp[bp.len() - 1].0
    };

    let grid_1d = |lo: f64, hi: f64| -> Vec<f64> {
        let cells = ((hi - lo) / grid_step).ceil().max(1.0) as usize;
        (0..=cells).map(|i| lo + (hi - lo) * i as f64 / cells as f64).collect()
    };

    let upper_level = {
        let (_, h_max) = h.h_min_max(p)?;
        f.value(p).max(h_max)
    };
    let lower_corner: Vec<f64> = (0..n)
        .map(|a| (left_extent(a, upper_level) - box_margin).min(p[a]))
        .collect();
    let lower_level = f.value(&lower_corner);
    let upper_corner: Vec<f64> = (0..n)
        .map(|a| (right_extent(a, lower_level) + box_margin).max(p[a]))
        .collect();

    let axes: Vec<Vec<f64>> = match mode {
        BruteForceMode::Lower => (0..n).map(|a| grid_1d(p[a], upper_corner[a])).collect(),
        BruteForceMode::Upper => (0..n).map(|a| grid_1d(lower_corner[a], p[a])).collect(),
        BruteForceMode::Full => (0..n)
            .map(|a| {
                let mut g = grid_1d(lower_corner[a], upper_corner[a]);
                // make sure p itself is a grid node
                if g.iter().all(|&x| (x - p[a]).abs() > 1e-12) {
                    g.push(p[a]);
                    g.sort_by(|u, v| u.partial_cmp(v).unwrap());
                }
                g
            })
            .collect(),
    };
    let shape: Vec<usize> = axes.iter().map(|g| g.len()).collect();
    let total: usize = shape.iter().product();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    let coords = |flat: usize| -> Vec<f64> {
        (0..n).map(|a| axes[a][flat / strides[a] % shape[a]]).collect()
    };

    match mode {
        BruteForceMode::Lower => {
            let mut best = f64::NEG_INFINITY;
            let mut arg = p.to_vec();
            for flat in 0..total {
                let q = coords(flat);
                let v = f.value(&q).min(h.h_min(&q)?);
                if v > best {
                    best = v;
                    arg = q;
                }
            }
            Ok(RelaxationValue { value: best, witness: arg, method: RelaxMethod::BruteForce })
        }
        BruteForceMode::Upper => {
            let mut best = f64::INFINITY;
            let mut arg = p.to_vec();
            for flat in 0..total {
                let q = coords(flat);
                let v = f.value(&q).max(h.h_max(&q)?);
                if v < best {
                    best = v;
                    arg = q;
                }
            }
            Ok(RelaxationValue { value: best, witness: arg, method: RelaxMethod::BruteForce })
        }
        BruteForceMode::Full => {
            // inner sup over the upper quadrant {r >= q} by dynamic
            // programming, then outer inf over the lower quadrant {q <= p}
            let mut quad = vec![f64::NEG_INFINITY; total];
            for flat in (0..total).rev() {
                let q = coords(flat);
                let mut v = f.value(&q).min(h.h_min(&q)?);
                for a in 0..n {
                    let idx = flat / strides[a] % shape[a];
                    if idx + 1 < shape[a] {
                        v = v.max(quad[flat + strides[a]]);
                    }
                }
                quad[flat] = v;
            }
            let mut best = f64::INFINITY;
            let mut arg = p.to_vec();
            for flat in 0..total {
                let q = coords(flat);
                if q.iter().zip(p).any(|(&qa, &pa)| qa > pa + 1e-12) {
                    continue;
                }
                let v = quad[flat].max(h.h_max(&q)?);
                if v < best {
                    best = v;
                    arg = q;
                }
            }
            Ok(RelaxationValue { value: best, witness: arg, method: RelaxMethod::BruteForce })
        }
    }
}

/// The extremal gradients `(p_bar, p_low)` of the constancy characterization:
/// `p_bar^a` is the rightward crossing of `H^a` at height `F(p)` (or `p^a`
/// when `H^a(p^a) >= F(p)`), `p_low^a` the leftward crossing (possibly
/// `-inf`).
pub fn characterization_points<M: JunctionMap>(
    f: &M,
    h: &JunctionHamiltonian,
    p: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_point(f.dim(), p)?;
    check_point(h.dim(), p)?;
    let level = f.value(p);
    let p_bar = (0..h.dim()).map(|a| rightward_snapped(h, a, p[a], level)).collect();
    let p_low = (0..h.dim())
        .map(|a| {
            h.branch(a).level_crossing_snapped(
                p[a],
                level,
                crate::hamiltonians::CrossingDirection::Leftward,
                tol::ROUTE_TOL,
            )
        })
        .collect();
    Ok((p_bar, p_low))
}

/// One failed check in a relaxedness audit.
#[derive(Debug, Clone)]
pub struct RelaxFailure {
    pub p: Vec<f64>,
    pub property: &'static str,
    pub detail: String,
}

/// Result of auditing a junction function for sub/super-relaxedness on a
/// sample grid.
#[derive(Debug, Clone)]
pub struct RelaxednessReport {
    pub sub_relaxed: bool,
    pub super_relaxed: bool,
    pub failures: Vec<RelaxFailure>,
}

/// Audits the constancy characterizations: `F` constant on `[p, p_bar]` and
/// on `[p_low, p]` (sampled), with `p_low` finite wherever
/// `H^a(p^a) > F(p)`. A fully relaxed function passes both.
pub fn is_relaxed<M: JunctionMap>(
    f: &M,
    h: &JunctionHamiltonian,
    sample_grid: &[Vec<f64>],
) -> Result<RelaxednessReport> {
    let n = h.dim();
    let mut report = RelaxednessReport { sub_relaxed: true, super_relaxed: true, failures: vec![] };
    let samples_per_axis = 5usize;
    for p in sample_grid {
        check_point(n, p)?;
        let fp = f.value(p);
        let (p_bar, p_low) = characterization_points(f, h, p)?;
        let tolerance = tol::ROUTE_TOL * (1.0 + fp.abs());

        if report.sub_relaxed {
            'sub: for flat in 0..samples_per_axis.pow(n as u32) {
                let mut q = vec![0.0; n];
                let mut rem = flat;
                for a in 0..n {
                    let t = (rem % samples_per_axis) as f64 / (samples_per_axis - 1) as f64;
                    rem /= samples_per_axis;
                    q[a] = p[a] + t * (p_bar[a] - p[a]);
                }
                if (f.value(&q) - fp).abs() > tolerance {
                    report.sub_relaxed = false;
                    report.failures.push(RelaxFailure {
                        p: p.clone(),
                        property: "sub_relaxed",
                        detail: format!("F not constant on [p, p_bar]: F({q:?}) = {} vs F(p) = {fp}", f.value(&q)),
                    });
                    break 'sub;
                }
            }
        }

        if report.super_relaxed {
            let mut infinite = None;
            for a in 0..n {
                if p_low[a] == f64::NEG_INFINITY && h.branch(a).eval(p[a]) > fp + tol::ROUTE_TOL {
                    infinite = Some(a);
                    break;
                }
            }
            if let Some(a) = infinite {
                report.super_relaxed = false;
                report.failures.push(RelaxFailure {
                    p: p.clone(),
                    property: "super_relaxed",
                    detail: format!("p_low diverges on branch {} at level {fp}", a + 1),
                });
            } else if p_low.iter().all(|x| x.is_finite()) {
                'sup: for flat in 0..samples_per_axis.pow(n as u32) {
                    let mut q = vec![0.0; n];
                    let mut rem = flat;
                    for a in 0..n {
                        let t = (rem % samples_per_axis) as f64 / (samples_per_axis - 1) as f64;
                        rem /= samples_per_axis;
                        q[a] = p[a] + t * (p_low[a] - p[a]);
                    }
                    if (f.value(&q) - fp).abs() > tolerance {
                        report.super_relaxed = false;
                        report.failures.push(RelaxFailure {
                            p: p.clone(),
                            property: "super_relaxed",
                            detail: format!("F not constant on [p_low, p]: F({q:?}) = {} vs F(p) = {fp}", f.value(&q)),
                        });
                        break 'sup;
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Strictness classification of a gradient vector against the branch
/// Hamiltonians.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharKind {
    SuperCharacteristic,
    SubCharacteristic,
    Both,
    Neither,
}

#[derive(Debug, Clone, Copy)]
pub struct CharacteristicClass {
    pub kind: CharKind,
    pub epsilon_used: f64,
}

impl CharacteristicClass {
    pub fn is_super_characteristic(&self) -> bool {
        matches!(self.kind, CharKind::SuperCharacteristic | CharKind::Both)
    }

    pub fn is_sub_characteristic(&self) -> bool {
        matches!(self.kind, CharKind::SubCharacteristic | CharKind::Both)
    }
}

/// Classifies `p` as a characteristic point of `F`.
///
/// `p` is super-characteristic when `H^a(p^a) = F(p)` on every branch and
/// `H^a` is strictly above that value on `(p^a, p^a + eps)`;
/// sub-characteristic with strictly below on `(p^a - eps, p^a)`. Both can
/// hold at once (a strict crossing through a rising segment), and both fail
/// when the level equality fails on any branch.
pub fn classify_characteristic<M: JunctionMap>(
    f: &M,
    h: &JunctionHamiltonian,
    p: &[f64],
    eps_probe: f64,
) -> Result<CharacteristicClass> {
    check_point(f.dim(), p)?;
    check_point(h.dim(), p)?;
    assert!(eps_probe > 0.0);
    let fp = f.value(p);
    let level_eq = (0..h.dim()).all(|a| (h.branch(a).eval(p[a]) - fp).abs() <= tol::STRICTNESS_TOL);
    if !level_eq {
        return Ok(CharacteristicClass { kind: CharKind::Neither, epsilon_used: eps_probe });
    }
    let mut super_ok = true;
    let mut sub_ok = true;
    for a in 0..h.dim() {
        let hp = h.branch(a).eval(p[a]);
        for k in 1..=tol::PROBE_SAMPLES {
            let d = eps_probe * k as f64 / (tol::PROBE_SAMPLES + 1) as f64;
            if !(h.branch(a).eval(p[a] + d) > hp + tol::STRICTNESS_TOL) {
                super_ok = false;
            }
            if !(h.branch(a).eval(p[a] - d) < hp - tol::STRICTNESS_TOL) {
                sub_ok = false;
            }
        }
    }
    let kind = match (super_ok, sub_ok) {
        (true, true) => CharKind::Both,
        (true, false) => CharKind::SuperCharacteristic,
        (false, true) => CharKind::SubCharacteristic,
        (false, false) => CharKind::Neither,
    };
    Ok(CharacteristicClass { kind, epsilon_used: eps_probe })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::shapes::{absolute_value, double_well};
    use crate::junction::semi_coercify;
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
    fn sub_relax_examples() {
        let h = h1_abs();
        let sc = semi_coercify(&JunctionFunction::constant(1.0, 1));
        let r = sub_relax(&sc, &h, &[0.0]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!((r.witness[0] - 1.0).abs() < 1e-9);
        // oracle: brute-force sup over a q-grid of min(F0, H_min)
        let bf = brute_force_relax(&sc, &h, &[0.0], 1.0, 1e-3, BruteForceMode::Lower).unwrap();
        assert!((r.value - bf.value).abs() < 5e-3);

        let fl = JunctionFunction::flux_limiter(1.0, 1);
        let r = sub_relax(&fl, &h, &[-2.0]).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
        assert!((r.witness[0] - (-2.0)).abs() < 1e-9);
        let bf = brute_force_relax(&fl, &h, &[-2.0], 1.0, 1e-3, BruteForceMode::Lower).unwrap();
        assert!((r.value - bf.value).abs() < 5e-3);

        // diagonal case: F0(p) <= H_min(p) keeps the witness at p
        let r = sub_relax(&fl, &h, &[2.0]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert_eq!(r.witness[0], 2.0);
    }

    #[test]
    fn super_relax_examples() {
        let h = h1_abs();
        let sc = semi_coercify(&JunctionFunction::constant(1.0, 1));
        let r = super_relax(&sc, &h, &[-2.0]).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
        assert!((r.witness[0] - (-2.0)).abs() < 1e-9);
        let bf = brute_force_relax(&sc, &h, &[-2.0], 1.0, 1e-3, BruteForceMode::Upper).unwrap();
        assert!((r.value - bf.value).abs() < 5e-3);

        let r = super_relax(&sc, &h, &[3.0]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!(r.witness[0] <= 3.0);
        let bf = brute_force_relax(&sc, &h, &[3.0], 1.0, 1e-3, BruteForceMode::Upper).unwrap();
        assert!((r.value - bf.value).abs() < 5e-3);

        // diagonal case: F0(p) >= H_max(p)
        let fl = JunctionFunction::flux_limiter(1.0, 1);
        let r = super_relax(&fl, &h, &[-0.5]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert_eq!(r.witness[0], -0.5);
    }

    #[test]
    fn super_relax_rejects_non_semi_coercive() {
        let h = h1_abs();
        let c = JunctionFunction::constant(1.0, 1);
        let err = super_relax(&c, &h, &[-2.0]).unwrap_err();
        assert!(matches!(err, Error::NotSemiCoercive { .. }));
    }

    #[test]
    fn relax_examples() {
        let h = h1_abs();
        let c = JunctionFunction::constant(1.0, 1);
        let r = relax(&c, &h, &[2.0]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        // full brute-force composition oracle
        let sc = semi_coercify(&c);
        let bf = brute_force_relax(&sc, &h, &[2.0], 1.0, 5e-3, BruteForceMode::Full).unwrap();
        assert!((r.value - bf.value).abs() < 3e-2);

        // crossing point: H(-1) = 1 = F0 forces the relaxation to F0(p)
        let r = relax(&c, &h, &[-1.0]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);

        // equal effective conditions for the affine data 2A - p with A = 1
        let aff = JunctionFunction::affine(2.0, vec![1.0]).unwrap();
        let ra = relax(&aff, &h, &[0.0]).unwrap();
        let rc = relax(&c, &h, &[0.0]).unwrap();
        assert!((ra.value - rc.value).abs() < 1e-9);
    }

    #[test]
    fn relaxed_equals_flux_limited_form_for_constant_data() {
        // the effective condition of a constant A >= min H over H(p) = |p|
        // is the flux-limited max(A, H_-)
        let h = h1_abs();
        let c = JunctionFunction::constant(1.0, 1);
        let mut p = -5.0;
        while p <= 5.0 {
            let r = relax(&c, &h, &[p]).unwrap();
            let expect = 1.0f64.max((-p).max(0.0));
            assert!((r.value - expect).abs() < 1e-9, "p = {p}");
            p += 0.1;
        }
    }

    #[test]
    fn godunov_relax_examples() {
        let h = h1_abs();
        let sc = semi_coercify(&JunctionFunction::constant(1.0, 1));
        let r = godunov_relax(&sc, &h, &[-1.0]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!((r.witness[0] - (-1.0)).abs() < 1e-9);

        let r = godunov_relax(&sc, &h, &[0.0]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!((r.witness[0] - 1.0).abs() < 1e-9);

        let h2 = JunctionHamiltonian::new(vec![absolute_value(), absolute_value()]).unwrap();
        let fl = JunctionFunction::flux_limiter(1.0, 2);
        let r = godunov_relax(&fl, &h2, &[0.0, 0.0]).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!((r.witness[0] - 1.0).abs() < 1e-9);
        assert!((r.witness[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn godunov_witness_solves_fixed_point() {
        let h = h2_mixed();
        let f0 = semi_coercify(&JunctionFunction::constant(0.7, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let p: Vec<f64> = (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let r = godunov_relax(&f0, &h, &p).unwrap();
            assert!((f0.eval(&h, &r.witness) - r.value).abs() < 1e-9);
            for a in 0..2 {
                let g = h.branch(a).godunov_flux(r.witness[a], p[a]);
                assert!((g - r.value).abs() < 1e-9, "p = {p:?}");
            }
        }
    }

    #[test]
    fn witness_sidedness() {
        let h = h2_mixed();
        let f0 = semi_coercify(&JunctionFunction::affine(1.0, vec![0.5, 0.5]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let p: Vec<f64> = (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let lo = sub_relax(&f0, &h, &p).unwrap();
            let hi = super_relax(&f0, &h, &p).unwrap();
            for a in 0..2 {
                assert!(lo.witness[a] >= p[a] - 1e-12);
                assert!(hi.witness[a] <= p[a] + 1e-12);
            }
        }
    }

    #[test]
    fn brute_force_two_branch_cross_check() {
        let h = h2_mixed();
        let f0 = semi_coercify(&JunctionFunction::constant(0.8, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let p: Vec<f64> = (0..2).map(|_| rng.gen_range(-2.5..2.5)).collect();
            let lo = sub_relax(&f0, &h, &p).unwrap();
            let bf = brute_force_relax(&f0, &h, &p, 0.5, 5e-3, BruteForceMode::Lower).unwrap();
            assert!((lo.value - bf.value).abs() < 5e-2, "p = {p:?}");
            let hi = super_relax(&f0, &h, &p).unwrap();
            let bf = brute_force_relax(&f0, &h, &p, 0.5, 5e-3, BruteForceMode::Upper).unwrap();
            assert!((hi.value - bf.value).abs() < 5e-2, "p = {p:?}");
        }
    }

    #[test]
    fn characterization_point_examples() {
        let h = h1_abs();
        let c = JunctionFunction::constant(1.0, 1);
        let b = Bound::new(&c, &h);
        let (p_bar, p_low) = characterization_points(&b, &h, &[0.0]).unwrap();
        assert_eq!(p_bar, vec![1.0]);
        assert_eq!(p_low, vec![0.0]);

        let (p_bar, p_low) = characterization_points(&b, &h, &[-3.0]).unwrap();
        assert_eq!(p_bar, vec![-3.0]);
        assert_eq!(p_low, vec![f64::NEG_INFINITY]);

        let fl = JunctionFunction::flux_limiter(1.0, 1);
        let bfl = Bound::new(&fl, &h);
        let (p_bar, p_low) = characterization_points(&bfl, &h, &[2.0]).unwrap();
        assert_eq!(p_bar, vec![2.0]);
        assert_eq!(p_low, vec![1.0]);
    }

    #[test]
    fn is_relaxed_examples() {
        let h = h1_abs();
        let grid: Vec<Vec<f64>> = (-12..=12).map(|k| vec![k as f64 * 0.25]).collect();

        let fl = JunctionFunction::flux_limiter(1.0, 1);
        let rep = is_relaxed(&Bound::new(&fl, &h), &h, &grid).unwrap();
        assert!(rep.sub_relaxed && rep.super_relaxed, "{:?}", rep.failures);

        let c = JunctionFunction::constant(1.0, 1);
        let rep = is_relaxed(&Bound::new(&c, &h), &h, &grid).unwrap();
        assert!(rep.sub_relaxed);
        assert!(!rep.super_relaxed);

        // the relaxation of anything is relaxed
        let relaxed = Relaxed::new(&c, &h);
        let rep = is_relaxed(&relaxed, &h, &grid).unwrap();
        assert!(rep.sub_relaxed && rep.super_relaxed, "{:?}", rep.failures);
    }

    #[test]
    fn classify_characteristic_examples() {
        let h = h1_abs();
        let c = JunctionFunction::constant(1.0, 1);
        let relaxed = Relaxed::new(&c, &h);

        // at p = -1 the level matches but H descends rightward and ascends
        // leftward, so neither strict condition holds
        let cls = classify_characteristic(&relaxed, &h, &[-1.0], 1e-3).unwrap();
        assert_eq!(cls.kind, CharKind::Neither);

        // at p = 1 the level matches, H rises to the right and falls to the
        // left, so both strict conditions hold
        let cls = classify_characteristic(&relaxed, &h, &[1.0], 1e-3).unwrap();
        assert!(cls.is_super_characteristic());
        assert!(cls.is_sub_characteristic());

        // at the V-minimum of the double well H rises on the right (strictly
        // super-characteristic) but also rises leftward, so not sub
        let hdw = h1_dw();
        let zero = JunctionFunction::constant(0.0, 1);
        let cls =
            classify_characteristic(&Bound::new(&zero, &hdw), &hdw, &[1.0], 1e-3).unwrap();
        assert_eq!(cls.kind, CharKind::SuperCharacteristic);
    }

    #[test]
    fn relaxation_inequalities_at_characteristic_points() {
        // on characteristic points of R F0, the relaxation is ordered
        // against F0: below on sub-characteristic, above on super
        let h = h1_abs();
        for (f0, pts) in [
            (JunctionFunction::constant(1.0, 1), vec![1.0, -1.0]),
            (JunctionFunction::affine(2.0, vec![1.0]).unwrap(), vec![1.0]),
        ] {
            let relaxed = Relaxed::new(&f0, &h);
            for p in pts {
                let cls = classify_characteristic(&relaxed, &h, &[p], 1e-3).unwrap();
                let rv = relaxed.value(&[p]);
                let fv = f0.eval(&h, &[p]);
                if cls.is_sub_characteristic() {
                    assert!(rv <= fv + 1e-9);
                }
                if cls.is_super_characteristic() {
                    assert!(rv >= fv - 1e-9);
                }
            }
        }
    }

    #[test]
    fn crossing_points_pin_the_relaxation() {
        // whenever H^a(p^a) = F0(p) for all branches, all three values
        // coincide with F0(p)
        let h = h2_mixed();
        let f0 = JunctionFunction::constant(1.0, 2);
        // H_abs(1) = 1 and H_dw(x) = 1 at x = 0; F0 = 1 everywhere
        let p = [1.0, 0.0];
        let sc = semi_coercify(&f0);
        assert!((sub_relax(&sc, &h, &p).unwrap().value - 1.0).abs() < 1e-9);
        assert!((super_relax(&sc, &h, &p).unwrap().value - 1.0).abs() < 1e-9);
        assert!((relax(&f0, &h, &p).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn monotonicity_of_semi_relaxations() {
        // F0 <= F1 pointwise implies ordered sub- and super-relaxations
        let h = h1_dw();
        let f0 = semi_coercify(&JunctionFunction::constant(0.4, 1));
        let f1 = semi_coercify(&JunctionFunction::constant(0.9, 1));
        let mut p = -3.0;
        while p <= 3.0 {
            let a = sub_relax(&f0, &h, &[p]).unwrap().value;
            let b = sub_relax(&f1, &h, &[p]).unwrap().value;
            assert!(a <= b + 1e-9);
            let a = super_relax(&f0, &h, &[p]).unwrap().value;
            let b = super_relax(&f1, &h, &[p]).unwrap().value;
            assert!(a <= b + 1e-9);
            p += 0.17;
        }
    }

    #[test]
    fn restriction_of_sub_relaxed_is_sub_relaxed() {
        let h = h2_mixed();
        let fl = JunctionFunction::flux_limiter(1.5, 2);
        let grid2: Vec<Vec<f64>> = {
            let mut g = vec![];
            for i in -6..=6 {
                for j in -6..=6 {
                    g.push(vec![i as f64 * 0.5, j as f64 * 0.5]);
                }
            }
            g
        };
        let rep = is_relaxed(&Bound::new(&fl, &h), &h, &grid2).unwrap();
        assert!(rep.sub_relaxed);

        let p = [-0.5, 1.5];
        for alpha in 0..2 {
            let r = crate::junction::restrict_to_branch(&fl, &h, &p, alpha).unwrap();
            let h1 = h.restrict(alpha);
            let grid1: Vec<Vec<f64>> = (-12..=12).map(|k| vec![k as f64 * 0.25]).collect();
            let rep1 = is_relaxed(&Bound::new(&r, &h1), &h1, &grid1).unwrap();
            assert!(rep1.sub_relaxed, "{:?}", rep1.failures);
        }
    }
}
