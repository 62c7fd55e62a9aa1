//! Exact calculus for continuous piecewise-linear functions with linear tails.
//!
//! Every branch Hamiltonian is represented this way, which makes interval
//! extrema, Godunov fluxes, monotone hulls, level crossings and extrema
//! extraction exact finite computations: no quadrature and no sampling error.
//! Extended reals (`f64::INFINITY` / `f64::NEG_INFINITY`) are first-class
//! return values where the underlying quantities are genuinely unbounded.

use crate::error::{Error, Result};

/// Continuous piecewise-linear function on the whole real line.
///
/// Between consecutive breakpoints the function interpolates linearly; outside
/// the breakpoint range it continues with the declared tail slopes. Breakpoint
/// abscissas are strictly increasing and there is at least one breakpoint, so
/// the function is continuous by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearFunction {
    breakpoints: Vec<(f64, f64)>,
    left_tail_slope: f64,
    right_tail_slope: f64,
}

/// Direction of a level crossing scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingDirection {
    Rightward,
    Leftward,
}

impl PiecewiseLinearFunction {
    pub fn new(
        breakpoints: Vec<(f64, f64)>,
        left_tail_slope: f64,
        right_tail_slope: f64,
    ) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::InvalidPiecewiseLinear(
                "at least one breakpoint is required".into(),
            ));
        }
        for w in breakpoints.windows(2) {
            if !(w[0].0 < w[1].0) {
                return Err(Error::InvalidPiecewiseLinear(format!(
                    "breakpoint abscissas must be strictly increasing, got {} then {}",
                    w[0].0, w[1].0
                )));
            }
        }
        for &(x, y) in &breakpoints {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidPiecewiseLinear(format!(
                    "non-finite breakpoint ({x}, {y})"
                )));
            }
        }
        if !left_tail_slope.is_finite() || !right_tail_slope.is_finite() {
            return Err(Error::InvalidPiecewiseLinear("non-finite tail slope".into()));
        }
        Ok(Self {
            breakpoints,
            left_tail_slope,
            right_tail_slope,
        })
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn left_tail_slope(&self) -> f64 {
        self.left_tail_slope
    }

    pub fn right_tail_slope(&self) -> f64 {
        self.right_tail_slope
    }

    /// Exact value at `x`, including the linear tails.
    pub fn eval(&self, x: f64) -> f64 {
        let bp = &self.breakpoints;
        let (x0, y0) = bp[0];
        if x <= x0 {
            return y0 + self.left_tail_slope * (x - x0);
        }
        let (xn, yn) = bp[bp.len() - 1];
        if x >= xn {
            return yn + self.right_tail_slope * (x - xn);
        }
        // partition_point: first index with bp.x > x, so the segment is [i-1, i]
        let i = bp.partition_point(|&(bx, _)| bx <= x);
        let (xa, ya) = bp[i - 1];
        let (xb, yb) = bp[i];
        ya + (yb - ya) / (xb - xa) * (x - xa)
    }

    /// Value extended to `x = +/-inf` via the tail slopes.
    pub fn eval_ext(&self, x: f64) -> f64 {
        if x == f64::NEG_INFINITY {
            return match self.left_tail_slope.partial_cmp(&0.0).unwrap() {
                std::cmp::Ordering::Less => f64::INFINITY,
                std::cmp::Ordering::Equal => self.breakpoints[0].1,
                std::cmp::Ordering::Greater => f64::NEG_INFINITY,
            };
        }
        if x == f64::INFINITY {
            return match self.right_tail_slope.partial_cmp(&0.0).unwrap() {
                std::cmp::Ordering::Less => f64::NEG_INFINITY,
                std::cmp::Ordering::Equal => self.breakpoints[self.breakpoints.len() - 1].1,
                std::cmp::Ordering::Greater => f64::INFINITY,
            };
        }
        self.eval(x)
    }

    /// Exact minimum and maximum over the finite interval `[a, b]`.
    ///
    /// Candidates are the endpoint values plus every breakpoint strictly
    /// inside the interval; linearity between candidates makes this exact.
    pub fn range_min_max(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        if !(a <= b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidInterval { a, b });
        }
        let mut lo = self.eval(a).min(self.eval(b));
        let mut hi = self.eval(a).max(self.eval(b));
        for &(x, y) in &self.breakpoints {
            if a < x && x < b {
                lo = lo.min(y);
                hi = hi.max(y);
            }
        }
        Ok((lo, hi))
    }

    /// Largest absolute segment slope met on `[a, b]` (tails included when
    /// the interval reaches them). Used for Lipschitz bounds.
    pub fn max_abs_slope_over(&self, a: f64, b: f64) -> f64 {
        let bp = &self.breakpoints;
        let mut m: f64 = 0.0;
        if a < bp[0].0 {
            m = m.max(self.left_tail_slope.abs());
        }
        if b > bp[bp.len() - 1].0 {
            m = m.max(self.right_tail_slope.abs());
        }
        for w in bp.windows(2) {
            let (xa, ya) = w[0];
            let (xb, yb) = w[1];
            if xb > a && xa < b {
                m = m.max(((yb - ya) / (xb - xa)).abs());
            }
        }
        m
    }

    /// Segment slopes in order: left tail, interior segments, right tail.
    fn slopes(&self) -> Vec<f64> {
        let bp = &self.breakpoints;
        let mut s = Vec::with_capacity(bp.len() + 1);
        s.push(self.left_tail_slope);
        for w in bp.windows(2) {
            s.push((w[1].1 - w[0].1) / (w[1].0 - w[0].0));
        }
        s.push(self.right_tail_slope);
        s
    }

    /// Drops breakpoints that lie on the line through their neighbours.
    pub fn simplify(&self) -> Self {
        let bp = &self.breakpoints;
        if bp.len() <= 1 {
            return self.clone();
        }
        let slopes = self.slopes();
        let mut kept = Vec::with_capacity(bp.len());
        for (i, &point) in bp.iter().enumerate() {
            // slope entering breakpoint i is slopes[i], leaving is slopes[i+1]
            if slopes[i] != slopes[i + 1] || kept.is_empty() {
                kept.push(point);
            }
        }
        if kept.is_empty() {
            kept.push(bp[0]);
        }
        Self {
            breakpoints: kept,
            left_tail_slope: self.left_tail_slope,
            right_tail_slope: self.right_tail_slope,
        }
    }
}

/// A coercive branch Hamiltonian: a piecewise-linear function with
/// `left_tail_slope < 0 < right_tail_slope`, so `H(p) -> +inf` as `|p| -> inf`.
#[derive(Debug, Clone)]
pub struct BranchHamiltonian {
    shape: PiecewiseLinearFunction,
    label: usize,
}

/// Alternating strict local extrema of a coercive piecewise-linear function.
///
/// Minima and maxima interlace as `m_1 < M_1 < m_2 < ... < M_{n-1} < m_n`;
/// coercivity forces the sequence to start and end with a minimum. Flat
/// plateaus of extremal value are collapsed to their midpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremaProfile {
    pub minima: Vec<(f64, f64)>,
    pub maxima: Vec<(f64, f64)>,
}

impl BranchHamiltonian {
    pub fn new(shape: PiecewiseLinearFunction) -> Result<Self> {
        Self::with_label(shape, 1)
    }

    /// `label` is the 1-based branch index used in error reports.
    pub fn with_label(shape: PiecewiseLinearFunction, label: usize) -> Result<Self> {
        if !(shape.left_tail_slope() < 0.0 && shape.right_tail_slope() > 0.0) {
            return Err(Error::NotCoercive {
                left: shape.left_tail_slope(),
                right: shape.right_tail_slope(),
            });
        }
        Ok(Self { shape, label })
    }

    pub fn shape(&self) -> &PiecewiseLinearFunction {
        &self.shape
    }

    pub fn label(&self) -> usize {
        self.label
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.shape.eval(x)
    }

    pub fn eval_ext(&self, x: f64) -> f64 {
        self.shape.eval_ext(x)
    }

    pub fn range_min_max(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        self.shape.range_min_max(a, b)
    }

    /// Godunov flux: `min over [p, q]` of `H` when `p <= q`, `max over [q, p]`
    /// when `p >= q`. Nondecreasing in `p`, nonincreasing in `q`, and
    /// `G(p, p) = H(p)`.
    pub fn godunov_flux(&self, p: f64, q: f64) -> f64 {
        if p <= q {
            self.shape.range_min_max(p, q).expect("p <= q").0
        } else {
            self.shape.range_min_max(q, p).expect("q <= p").1
        }
    }

    /// Lower nonincreasing hull: `H_-(p) = inf over q <= p of H(q)`.
    ///
    /// The hull is again piecewise linear, follows `H` on its descents below
    /// the running minimum and is flat elsewhere; right of the global
    /// minimizer it is constant.
    pub fn lower_monotone_hull(&self) -> PiecewiseLinearFunction {
        let bp = self.shape.breakpoints();
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(bp.len());
        // left tail slope < 0, so the hull coincides with H up to the first
        // breakpoint
        out.push(bp[0]);
        let mut running = bp[0].1;
        for i in 1..bp.len() {
            let (xa, ya) = bp[i - 1];
            let (xb, yb) = bp[i];
            if yb < running {
                if ya > running {
                    // the segment descends through the running minimum
                    let slope = (yb - ya) / (xb - xa);
                    let xc = xa + (running - ya) / slope;
                    out.push((xc, running));
                }
                out.push((xb, yb));
                running = yb;
            }
            // otherwise the hull stays flat at `running`, no breakpoint needed
        }
        let hull = PiecewiseLinearFunction {
            breakpoints: out,
            left_tail_slope: self.shape.left_tail_slope(),
            right_tail_slope: 0.0,
        };
        hull.simplify()
    }

    /// Directed level crossing at height `level`.
    ///
    /// Rightward: `sup { q >= p : H < level on [p, q) }`. Returns `p` when
    /// `H(p) >= level`, otherwise the first point to the right where `H`
    /// reaches the level (finite by coercivity for finite levels).
    ///
    /// Leftward: `inf { q <= p : H > level on (q, p] }`. Returns `p` when
    /// `H(p) <= level`; may be `-inf` when `H` stays above the level on the
    /// whole left half-line.
    pub fn level_crossing(&self, p: f64, level: f64, direction: CrossingDirection) -> f64 {
        match direction {
            CrossingDirection::Rightward => self.crossing_right(p, level),
            CrossingDirection::Leftward => self.crossing_left(p, level),
        }
    }

    /// Level crossing with knife-edge protection: the crossing map jumps in
    /// the level at `H(p)` and at each intervening local extremum value, so
    /// a level within `snap_tol` past such a value (above for rightward,
    /// below for leftward) is snapped onto it and the crossing stops at the
    /// near end of the plateau instead of leaping across it. Levels produced
    /// by fixed-point solves carry that much noise, and the snapped point
    /// stays inside the constancy box of the exact level.
    pub fn level_crossing_snapped(
        &self,
        p: f64,
        level: f64,
        direction: CrossingDirection,
        snap_tol: f64,
    ) -> f64 {
        let mut snapped = level;
        if level.is_finite() && p.is_finite() {
            let profile = self.extrema();
            match direction {
                CrossingDirection::Rightward => {
                    let hp = self.eval(p);
                    if hp < snapped && snapped <= hp + snap_tol {
                        snapped = hp;
                    }
                    for &(_, v) in &profile.maxima {
                        if v < snapped && snapped <= v + snap_tol {
                            snapped = v;
                        }
                    }
                }
                CrossingDirection::Leftward => {
                    let hp = self.eval(p);
                    if hp - snap_tol <= snapped && snapped < hp {
                        snapped = hp;
                    }
                    for &(_, v) in &profile.minima {
                        if v - snap_tol <= snapped && snapped < v {
                            snapped = v;
                        }
                    }
                }
            }
        }
        self.level_crossing(p, snapped, direction)
    }

    fn crossing_right(&self, p: f64, level: f64) -> f64 {
        if level == f64::INFINITY {
            return f64::INFINITY;
        }
        if self.eval(p) >= level {
            return p;
        }
        let bp = self.shape.breakpoints();
        // walk breakpoints right of p; the value entering each segment is
        // below the level, so only ascending segments can produce the crossing
        let mut prev_x = p;
        let mut prev_y = self.eval(p);
        for &(x, y) in bp.iter() {
            if x <= p {
                continue;
            }
            if y >= level {
                // crossing inside (prev_x, x]
                let slope = (y - prev_y) / (x - prev_x);
                return prev_x + (level - prev_y) / slope;
            }
            prev_x = x;
            prev_y = y;
        }
        // right tail, slope > 0
        prev_x + (level - prev_y) / self.shape.right_tail_slope()
    }

    fn crossing_left(&self, p: f64, level: f64) -> f64 {
        if level == f64::INFINITY {
            return f64::NEG_INFINITY;
        }
        if self.eval(p) <= level {
            return p;
        }
        let bp = self.shape.breakpoints();
        let mut prev_x = p;
        let mut prev_y = self.eval(p);
        for &(x, y) in bp.iter().rev() {
            if x >= p {
                continue;
            }
            if y <= level {
                let slope = (prev_y - y) / (prev_x - x);
                return x + (level - y) / slope;
            }
            prev_x = x;
            prev_y = y;
        }
        // left tail: H increases without bound going left, never re-crossing
        f64::NEG_INFINITY
    }

    /// Largest `x >= from` with `H <= level` on the whole `[from, x]`.
    /// Finite for finite levels by coercivity.
    pub fn plateau_end_rightward(&self, from: f64, level: f64) -> f64 {
        let slack = 1e-12;
        let mut prev_x = from;
        let mut prev_y = self.eval(from);
        for &(x, y) in self.shape.breakpoints() {
            if x <= from {
                continue;
            }
            if y > level + slack {
                let slope = (y - prev_y) / (x - prev_x);
                return prev_x + ((level - prev_y) / slope).max(0.0);
            }
            prev_x = x;
            prev_y = y;
        }
        let s = self.shape.right_tail_slope();
        prev_x + ((level - prev_y) / s).max(0.0)
    }

    /// Smallest `x <= from` with `H >= level` on the whole `[x, from]`;
    /// `-inf` when `H` stays above the level on the entire left half-line.
    pub fn plateau_end_leftward(&self, from: f64, level: f64) -> f64 {
        let slack = 1e-12;
        let mut prev_x = from;
        let mut prev_y = self.eval(from);
        for &(x, y) in self.shape.breakpoints().iter().rev() {
            if x >= from {
                continue;
            }
            if y < level - slack {
                let slope = (prev_y - y) / (prev_x - x);
                return prev_x - ((prev_y - level) / slope).max(0.0);
            }
            prev_x = x;
            prev_y = y;
        }
        // left tail rises without bound, never dipping below the level
        f64::NEG_INFINITY
    }

    /// Alternating strict local extrema, plateaus collapsed to midpoints.
    pub fn extrema(&self) -> ExtremaProfile {
        let bp = self.shape.breakpoints();
        let slopes = self.shape.slopes();
        let mut minima = Vec::new();
        let mut maxima = Vec::new();
        let mut i = 0;
        while i < bp.len() {
            // maximal run of breakpoints joined by zero slopes
            let mut j = i;
            while j + 1 < bp.len() && slopes[j + 1] == 0.0 {
                j += 1;
            }
            let incoming = slopes[i];
            let outgoing = slopes[j + 1];
            let x = 0.5 * (bp[i].0 + bp[j].0);
            let y = bp[i].1;
            if incoming < 0.0 && outgoing > 0.0 {
                minima.push((x, y));
            } else if incoming > 0.0 && outgoing < 0.0 {
                maxima.push((x, y));
            }
            i = j + 1;
        }
        debug_assert!(!minima.is_empty(), "coercivity guarantees a local minimum");
        debug_assert_eq!(maxima.len() + 1, minima.len());
        ExtremaProfile { minima, maxima }
    }

    /// Global minimum value, `inf H = H_-(+inf)`.
    pub fn min_value(&self) -> f64 {
        self.shape
            .breakpoints()
            .iter()
            .map(|&(_, y)| y)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Fits an exact-looking piecewise-linear interpolant of `f` on `[a, b]`.
///
/// Starts from a uniform sampling of `base_cells` cells and recursively
/// splits any cell whose midpoint deviates from the chord, localizing kinks
/// down to width `1e-12`. For a function that is genuinely piecewise linear
/// with isolated kinks the result is accurate to roughly the kink
/// localization width times the slope jump.
pub fn fit_piecewise_linear<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    base_cells: usize,
    chord_tol: f64,
) -> Result<PiecewiseLinearFunction> {
    assert!(a < b && base_cells >= 1);
    let mut xs: Vec<f64> = Vec::new();
    let h = (b - a) / base_cells as f64;

    fn refine<F: Fn(f64) -> f64>(
        f: &F,
        xa: f64,
        ya: f64,
        xb: f64,
        yb: f64,
        chord_tol: f64,
        out: &mut Vec<f64>,
    ) {
        let xm = 0.5 * (xa + xb);
        let ym = f(xm);
        let chord = 0.5 * (ya + yb);
        if (ym - chord).abs() <= chord_tol || (xb - xa) <= 1e-12 {
            return;
        }
        refine(f, xa, ya, xm, ym, chord_tol, out);
        out.push(xm);
        refine(f, xm, ym, xb, yb, chord_tol, out);
    }

    for i in 0..base_cells {
        let xa = a + i as f64 * h;
        let xb = if i + 1 == base_cells { b } else { a + (i + 1) as f64 * h };
        xs.push(xa);
        refine(&f, xa, f(xa), xb, f(xb), chord_tol, &mut xs);
    }
    xs.push(b);
    xs.sort_by(|u, v| u.partial_cmp(v).unwrap());
    xs.dedup();
    let pts: Vec<(f64, f64)> = xs.into_iter().map(|x| (x, f(x))).collect();
    let first_slope = (pts[1].1 - pts[0].1) / (pts[1].0 - pts[0].0);
    let n = pts.len();
    let last_slope = (pts[n - 1].1 - pts[n - 2].1) / (pts[n - 1].0 - pts[n - 2].0);
    Ok(PiecewiseLinearFunction::new(pts, first_slope, last_slope)?.simplify())
}

/// Stock Hamiltonian shapes used across tests, demos and the CLI examples.
pub mod shapes {
    use super::{BranchHamiltonian, PiecewiseLinearFunction};

    /// `H(p) = |p|` as an exact piecewise-linear function.
    pub fn absolute_value() -> BranchHamiltonian {
        BranchHamiltonian::new(
            PiecewiseLinearFunction::new(vec![(-1.0, 1.0), (0.0, 0.0), (1.0, 1.0)], -1.0, 1.0)
                .unwrap(),
        )
        .unwrap()
    }

    /// Double well with minima at -1 and 1 (value 0) and a local max at 0
    /// (value 1); tail slopes -3 and 3.
    pub fn double_well() -> BranchHamiltonian {
        BranchHamiltonian::new(
            PiecewiseLinearFunction::new(
                vec![(-2.0, 3.0), (-1.0, 0.0), (0.0, 1.0), (1.0, 0.0), (2.0, 3.0)],
                -3.0,
                3.0,
            )
            .unwrap(),
        )
        .unwrap()
    }
}
