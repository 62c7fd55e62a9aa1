//! Explicit relaxation through the limiter tensor.
//!
//! When every branch Hamiltonian has finitely many extrema `m^a_1 < M^a_1 <
//! ... < m^a_n`, the effective junction condition is determined by a finite
//! tensor of limiters `A_I`, one per multi-index of minima. The recipe per
//! cell: take the crossing level where `F0(p_I) = H^a(p^a_I)` on the
//! increasing segments when that level fits between the floor
//! `A0_I = max_a H^a(m^a)` and the cap `B0_I = min_a H^a(M^a)`; otherwise
//! propagate from the lower or upper index neighbours. The relaxed function
//! is then recovered pointwise as an infimum of admissible levels `mu` over
//! quadrant decompositions anchored at the decreasing-branch inverses
//! `p^-_I(mu)`.

use crate::error::{Error, Result};
use crate::hamiltonians::ExtremaProfile;
use crate::junction::{JunctionFunction, JunctionHamiltonian};
use crate::tol;

/// The limiter tensor with its extrema tables and the floor/cap tensors.
#[derive(Debug, Clone)]
pub struct LimiterTensor {
    extrema: Vec<ExtremaProfile>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    a0: Vec<f64>,
    b0: Vec<f64>,
    a: Vec<f64>,
}

/// The cell containing a gradient vector: `p^a` lies in
/// `[M^a_{i_a - 1}, M^a_{i_a}]` for each branch (1-based indices, boundary
/// points assigned to the lower cell).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellLocation {
    pub index: Vec<usize>,
}

impl LimiterTensor {
    pub fn extrema(&self) -> &[ExtremaProfile] {
        &self.extrema
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    fn flat(&self, index: &[usize]) -> usize {
        index
            .iter()
            .zip(&self.strides)
            .map(|(&i, &s)| (i - 1) * s)
            .sum()
    }

    /// `A0_I` for an interior index.
    pub fn a0(&self, index: &[usize]) -> f64 {
        self.a0[self.flat(index)]
    }

    /// `B0_I` for an interior index.
    pub fn b0(&self, index: &[usize]) -> f64 {
        self.b0[self.flat(index)]
    }

    /// Padded limiter access: `+inf` when any index is 0, `-inf` when any
    /// index exceeds its branch count.
    pub fn limiter(&self, index: &[isize]) -> f64 {
        if index.iter().any(|&i| i <= 0) {
            return f64::INFINITY;
        }
        if index
            .iter()
            .zip(&self.shape)
            .any(|(&i, &n)| i as usize > n)
        {
            return f64::NEG_INFINITY;
        }
        let interior: Vec<usize> = index.iter().map(|&i| i as usize).collect();
        self.a[self.flat(&interior)]
    }

    /// Abscissa of the k-th minimum (1-based), `+inf` at `n_a + 1`.
    fn m(&self, alpha: usize, k: usize) -> f64 {
        let mins = &self.extrema[alpha].minima;
        if k == 0 {
            f64::NEG_INFINITY
        } else if k <= mins.len() {
            mins[k - 1].0
        } else {
            f64::INFINITY
        }
    }

    /// Abscissa of the k-th maximum (1-based), `-inf` at 0 and `+inf` at
    /// `n_a`.
    fn big_m(&self, alpha: usize, k: usize) -> f64 {
        let maxs = &self.extrema[alpha].maxima;
        if k == 0 {
            f64::NEG_INFINITY
        } else if k <= maxs.len() {
            maxs[k - 1].0
        } else {
            f64::INFINITY
        }
    }

    /// Emits extrema tables and the limiter tensor in row-major order.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        for (alpha, e) in self.extrema.iter().enumerate() {
            writeln!(s, "branch {}", alpha + 1).unwrap();
            for (k, (x, v)) in e.minima.iter().enumerate() {
                writeln!(s, "  m_{} = {x} (H = {v})", k + 1).unwrap();
            }
            for (k, (x, v)) in e.maxima.iter().enumerate() {
                writeln!(s, "  M_{} = {x} (H = {v})", k + 1).unwrap();
            }
        }
        writeln!(s, "shape = {:?}", self.shape).unwrap();
        writeln!(s, "limiters (row-major) = {:?}", self.a).unwrap();
        s
    }
}

fn eval_at_minima(
    f0: &JunctionFunction,
    h: &JunctionHamiltonian,
    t: &LimiterTensor,
    index: &[usize],
) -> f64 {
    let p: Vec<f64> = index.iter().enumerate().map(|(a, &k)| t.m(a, k)).collect();
    f0.eval(h, &p)
}

fn eval_at_maxima(
    f0: &JunctionFunction,
    h: &JunctionHamiltonian,
    t: &LimiterTensor,
    index: &[usize],
) -> f64 {
    let p: Vec<f64> = index.iter().enumerate().map(|(a, &k)| t.big_m(a, k)).collect();
    f0.eval(h, &p)
}

/// Leftmost point at or right of `lo` where `H` reaches the level (the
/// increasing-segment inverse used by the crossing case).
fn increasing_inverse(h: &JunctionHamiltonian, alpha: usize, lo: f64, level: f64) -> f64 {
    h.branch(alpha)
        .level_crossing(lo, level, crate::hamiltonians::CrossingDirection::Rightward)
}

/// Builds the limiter tensor of `F0` over `H`.
///
/// Interior cells split into three mutually exclusive cases by comparing
/// `F0` at the cell corners with the floor and cap; crossing cells are
/// solved directly by bisection on the common level, the other two are
/// resolved by Jacobi sweeps seeded with the floor or cap until stationary.
pub fn build_limiter_tensor(
    f0: &JunctionFunction,
    h: &JunctionHamiltonian,
) -> Result<LimiterTensor> {
    let n = h.dim();
    if f0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f0.dim() });
    }
    let extrema: Vec<ExtremaProfile> = (0..n).map(|a| h.branch(a).extrema()).collect();
    let shape: Vec<usize> = extrema.iter().map(|e| e.minima.len()).collect();
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    let total: usize = shape.iter().product();
    let mut t = LimiterTensor {
        extrema,
        shape: shape.clone(),
        strides,
        a0: vec![0.0; total],
        b0: vec![0.0; total],
        a: vec![f64::NAN; total],
    };

    let strides_copy = t.strides.clone();
    let shape_copy = t.shape.clone();
    let index_of = move |flat: usize| -> Vec<usize> {
        (0..n)
            .map(|a| flat / strides_copy[a] % shape_copy[a] + 1)
            .collect()
    };

    // floors and caps, convention H(+/-inf) = +inf
    for flat in 0..total {
        let idx = index_of(flat);
        let a0 = idx
            .iter()
            .enumerate()
            .map(|(a, &k)| h.branch(a).eval(t.m(a, k)))
            .fold(f64::NEG_INFINITY, f64::max);
        let b0 = idx
            .iter()
            .enumerate()
            .map(|(a, &k)| {
                let x = t.big_m(a, k);
                if x.is_finite() { h.branch(a).eval(x) } else { f64::INFINITY }
            })
            .fold(f64::INFINITY, f64::min);
        if a0 > b0 {
            return Err(Error::LimiterTensor(format!(
                "A0 = {a0} exceeds B0 = {b0} at index {idx:?}"
            )));
        }
        t.a0[flat] = a0;
        t.b0[flat] = b0;
    }

    // case split and direct solve for crossing cells
    #[derive(Clone, Copy, PartialEq)]
    enum Case {
        Low,
        High,
        Crossing,
    }
    let mut cases = vec![Case::Crossing; total];
    for flat in 0..total {
        let idx = index_of(flat);
        let f_m = eval_at_minima(f0, h, &t, &idx);
        let f_big_m = eval_at_maxima(f0, h, &t, &idx);
        if f_m < t.a0[flat] {
            cases[flat] = Case::Low;
            t.a[flat] = t.a0[flat];
        } else if f_big_m > t.b0[flat] {
            cases[flat] = Case::High;
            t.a[flat] = t.b0[flat];
        } else {
            // common level lambda with F0(p(lambda)) = lambda, p on the
            // increasing segments; the root is clamped to [A0, B0] in
            // degenerate situations where F0 is flat along the binding branch
            let p_of = |lambda: f64| -> Vec<f64> {
                idx.iter()
                    .enumerate()
                    .map(|(a, &k)| increasing_inverse(h, a, t.m(a, k), lambda))
                    .collect()
            };
            let g = |lambda: f64| lambda - f0.eval(h, &p_of(lambda));
            let mut lo = t.a0[flat];
            let mut hi = f_m.min(t.b0[flat]).max(t.a0[flat]);
            if g(lo) >= 0.0 {
                t.a[flat] = lo;
            } else {
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
                t.a[flat] = 0.5 * (lo + hi);
            }
        }
    }

    // Jacobi sweeps for the neighbour-coupled cells
    let budget = total + 2;
    let mut stationary = false;
    for _ in 0..budget {
        let mut changed = false;
        let snapshot = t.a.clone();
        for flat in 0..total {
            let idx = index_of(flat);
            let idx_i: Vec<isize> = idx.iter().map(|&i| i as isize).collect();
            let new = match cases[flat] {
                Case::Crossing => continue,
                Case::Low => {
                    let mut v = t.a0[flat];
                    for a in 0..n {
                        let mut nb = idx_i.clone();
                        nb[a] -= 1;
                        v = v.min(limiter_of(&t, &snapshot, &nb));
                    }
                    v
                }
                Case::High => {
                    let mut v = t.b0[flat];
                    for a in 0..n {
                        let mut nb = idx_i.clone();
                        nb[a] += 1;
                        v = v.max(limiter_of(&t, &snapshot, &nb));
                    }
                    v
                }
            };
            if new != t.a[flat] {
                t.a[flat] = new;
                changed = true;
            }
        }
        if !changed {
            stationary = true;
            break;
        }
    }
    if !stationary {
        return Err(Error::LimiterTensor(
            "neighbour sweeps did not reach a stationary tensor within budget".into(),
        ));
    }

    // index monotonicity: A_I >= A_I' whenever I <= I'
    for flat in 0..total {
        let idx = index_of(flat);
        for a in 0..n {
            if idx[a] < t.shape[a] {
                let upper = t.a[flat + t.strides[a]];
                if t.a[flat] < upper - tol::ABS_TOL {
                    return Err(Error::LimiterTensor(format!(
                        "limiters not monotone in the index at {idx:?} along branch {}",
                        a + 1
                    )));
                }
            }
        }
    }
    Ok(t)
}

fn limiter_of(t: &LimiterTensor, values: &[f64], index: &[isize]) -> f64 {
    if index.iter().any(|&i| i <= 0) {
        return f64::INFINITY;
    }
    if index.iter().zip(&t.shape).any(|(&i, &n)| i as usize > n) {
        return f64::NEG_INFINITY;
    }
    let interior: Vec<usize> = index.iter().map(|&i| i as usize).collect();
    values[t.flat(&interior)]
}

/// The decreasing-branch inverse `p^-_I(mu)` componentwise: the rightmost
/// point of `[M^a_{k-1}, m^a_k]` where `H` still sits at or above `mu`,
/// clamped to the interval ends.
pub fn p_minus(
    tensor: &LimiterTensor,
    h: &JunctionHamiltonian,
    index: &[usize],
    mu: f64,
) -> Result<Vec<f64>> {
    if index.len() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: index.len() });
    }
    let mut out = Vec::with_capacity(index.len());
    for (a, &k) in index.iter().enumerate() {
        if k == 0 || k > tensor.shape[a] + 1 {
            return Err(Error::LimiterTensor(format!(
                "p_minus index {k} out of padded range on branch {}",
                a + 1
            )));
        }
        let lo = tensor.big_m(a, k - 1);
        let hi = tensor.m(a, k);
        if mu == f64::INFINITY {
            out.push(lo);
            continue;
        }
        if !hi.is_finite() {
            // k = n_a + 1: the interval collapses onto +inf
            out.push(f64::INFINITY);
            continue;
        }
        let b = h.branch(a);
        if b.eval(hi) >= mu {
            out.push(hi);
            continue;
        }
        if lo.is_finite() && b.eval(lo) < mu {
            out.push(lo);
            continue;
        }
        out.push(decreasing_inverse(h, a, lo, hi, mu));
    }
    Ok(out)
}

/// Rightmost `x` in `[lo, hi]` with `H(x) >= mu`, assuming `H` nonincreasing
/// there with `H(hi) < mu` and (when `lo` is finite) `H(lo) >= mu`.
fn decreasing_inverse(h: &JunctionHamiltonian, alpha: usize, lo: f64, hi: f64, mu: f64) -> f64 {
    let b = h.branch(alpha);
    let bp = b.shape().breakpoints();
    let mut right_x = hi;
    let mut right_y = b.eval(hi);
    for &(x, y) in bp.iter().rev() {
        if x >= hi || (lo.is_finite() && x < lo) {
            continue;
        }
        if y >= mu {
            let slope = (right_y - y) / (right_x - x);
            return x + (mu - y) / slope;
        }
        right_x = x;
        right_y = y;
    }
    // left tail (lo = -inf): slope < 0, solve on the tail
    let (x0, y0) = bp[0];
    if right_x > x0 {
        right_x = x0;
        right_y = y0;
    }
    let s = b.shape().left_tail_slope();
    right_x + (mu - right_y) / s
}

/// Locates the cell of `p`; boundary abscissas go to the lower cell.
pub fn locate_cell(tensor: &LimiterTensor, p: &[f64]) -> Result<CellLocation> {
    if p.len() != tensor.shape.len() {
        return Err(Error::DimensionMismatch { expected: tensor.shape.len(), got: p.len() });
    }
    let mut index = Vec::with_capacity(p.len());
    for (a, &x) in p.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::CellLocation { p: p.to_vec() });
        }
        let n = tensor.shape[a];
        let mut k = n;
        for cand in 1..=n {
            if x <= tensor.big_m(a, cand) {
                k = cand;
                break;
            }
        }
        index.push(k);
    }
    Ok(CellLocation { index })
}

/// Membership test `p in p^-_I(mu) + S_I(mu)`: some quadrant sign vector
/// `g` in `{-1, 0}^N` has `A_{I+g} <= mu` and places `p` on the correct
/// side of `p^-_I(mu)` componentwise. Monotone in `mu`.
fn member(
    tensor: &LimiterTensor,
    h: &JunctionHamiltonian,
    index: &[usize],
    p: &[f64],
    mu: f64,
) -> Result<bool> {
    let n = p.len();
    let pm = p_minus(tensor, h, index, mu)?;
    'quadrants: for bits in 0..(1usize << n) {
        let shifted: Vec<isize> = (0..n)
            .map(|a| index[a] as isize - ((bits >> a) & 1) as isize)
            .collect();
        if tensor.limiter(&shifted) > mu {
            continue;
        }
        for a in 0..n {
            let down = (bits >> a) & 1 == 1;
            if down {
                if !(p[a] <= pm[a]) {
                    continue 'quadrants;
                }
            } else if !(p[a] >= pm[a]) {
                continue 'quadrants;
            }
        }
        return Ok(true);
    }
    Ok(false)
}

/// Evaluates the explicit relaxation formula
/// `F(p) = inf { mu : p in p^-_I(mu) + S_I(mu) }` at `p`.
pub fn explicit_relax_eval(
    tensor: &LimiterTensor,
    h: &JunctionHamiltonian,
    p: &[f64],
) -> Result<f64> {
    let cell = locate_cell(tensor, p)?;
    let idx = &cell.index;
    // below every Hamiltonian value the membership must fail
    let lo0 = (0..p.len())
        .map(|a| h.branch(a).min_value())
        .fold(f64::INFINITY, f64::min)
        - 1.0;
    let mut lo = lo0;
    let mut hi = lo + 2.0;
    let mut tries = 0;
    while !member(tensor, h, idx, p, hi)? {
        hi += (hi - lo).max(1.0);
        tries += 1;
        if tries > 80 {
            return Err(Error::LimiterTensor(format!(
                "no admissible level found for p = {p:?}"
            )));
        }
    }
    debug_assert!(!member(tensor, h, idx, p, lo)?);
    let mut iters = 0;
    while hi - lo > tol::BISECT_TOL && iters < tol::BISECT_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if member(tensor, h, idx, p, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
        iters += 1;
    }
    Ok(0.5 * (lo + hi))
}
