//! Monotone explicit finite-difference solver for the junction problem.
//!
//! Interior nodes are updated with the Godunov numerical Hamiltonian,
//! `u_i <- u_i - dt G((u_i - u_{i-1})/dx, (u_{i+1} - u_i)/dx)`, and the
//! shared junction node with a monotone junction flux of the one-sided
//! slopes. Under the CFL restriction `dt <= theta dx / L` the full update is
//! monotone, which is what the comparison and gradient-box checks exercise.
//!
//! The junction flux in its default mode is the effective condition: the
//! Godunov fixed point of the semi-coercified data, evaluated directly each
//! step (one fixed point per step; the interior updates dominate the cost).
//! The raw mode applies the desired condition unrelaxed, for the
//! weak-versus-strong comparison experiments.

use crate::error::{Error, Result};
use crate::hamiltonians::PiecewiseLinearFunction;
use crate::junction::{semi_coercify, Bound, JunctionFunction, JunctionHamiltonian};
use crate::relaxation::godunov_relax_map;

/// Far-boundary policy at the outer end of each branch.
#[derive(Debug, Clone)]
pub enum FarBoundary {
    /// Pin to the exact planar solution `p x - t H(p)`; valid as long as the
    /// influence cone does not reach the boundary.
    PlanarPin { p: Vec<f64>, rate: Vec<f64> },
    /// Zero-slope copy of the neighbouring node.
    NeumannExtrapolate,
}

/// Discretization of the junction: `N` branches sharing the node at the
/// origin, each with `cells` nodes beyond it at spacing `dx`.
#[derive(Debug, Clone)]
pub struct JunctionGrid {
    pub dx: f64,
    pub cells: Vec<usize>,
    pub far: FarBoundary,
}

impl JunctionGrid {
    pub fn new(dx: f64, cells: Vec<usize>, far: FarBoundary) -> Result<Self> {
        if !(dx > 0.0) || cells.iter().any(|&n| n < 3) {
            return Err(Error::Scenario(
                "grid needs dx > 0 and at least 3 cells per branch".into(),
            ));
        }
        Ok(Self { dx, cells, far })
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }
}

/// Solution values at one time: the shared junction value plus, per branch,
/// the nodes at `x = dx, 2 dx, ...`.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    pub t: f64,
    pub junction: f64,
    pub branches: Vec<Vec<f64>>,
}

impl EvolutionState {
    /// Samples initial data (one piecewise-linear profile per branch) on the
    /// grid. The profiles must agree at the origin.
    pub fn from_profiles(grid: &JunctionGrid, u0: &[PiecewiseLinearFunction]) -> Result<Self> {
        if u0.len() != grid.dim() {
            return Err(Error::DimensionMismatch { expected: grid.dim(), got: u0.len() });
        }
        let j0 = u0[0].eval(0.0);
        for f in u0 {
            if (f.eval(0.0) - j0).abs() > 1e-12 {
                return Err(Error::Scenario(
                    "initial profiles must agree at the junction".into(),
                ));
            }
        }
        let branches = u0
            .iter()
            .zip(&grid.cells)
            .map(|(f, &n)| (1..=n).map(|i| f.eval(i as f64 * grid.dx)).collect())
            .collect();
        Ok(Self { t: 0.0, junction: j0, branches })
    }

    pub fn value(&self, alpha: usize, i: usize) -> f64 {
        if i == 0 {
            self.junction
        } else {
            self.branches[alpha][i - 1]
        }
    }
}

/// Junction flux used in the scheme.
#[derive(Debug, Clone)]
pub enum JunctionFlux {
    /// Effective condition: Godunov fixed point of the semi-coercified data.
    StrongRelaxed(JunctionFunction),
    /// The desired condition applied unrelaxed.
    RawF0(JunctionFunction),
}

impl JunctionFlux {
    pub fn strong(f0: &JunctionFunction) -> Self {
        JunctionFlux::StrongRelaxed(semi_coercify(f0))
    }

    pub fn raw(f0: &JunctionFunction) -> Self {
        JunctionFlux::RawF0(f0.clone())
    }

    pub fn value(&self, h: &JunctionHamiltonian, slopes: &[f64]) -> f64 {
        match self {
            JunctionFlux::StrongRelaxed(sc) => godunov_relax_map(&Bound::new(sc, h), h, slopes)
                .expect("fixed point of a semi-coercified condition")
                .value,
            JunctionFlux::RawF0(f0) => f0.eval(h, slopes),
        }
    }

    /// Per-axis Lipschitz bound over the working slope box.
    fn axis_lipschitz(&self, h: &JunctionHamiltonian, alpha: usize, lo: f64, hi: f64) -> f64 {
        match self {
            // the effective condition moves along level sets of the branch
            // Hamiltonians or along F0 itself, so both slopes bound it
            JunctionFlux::StrongRelaxed(sc) => sc
                .axis_lipschitz(h, alpha, lo, hi)
                .max(h.branch(alpha).shape().max_abs_slope_over(lo - 1.0, hi + 1.0)),
            JunctionFlux::RawF0(f0) => f0.axis_lipschitz(h, alpha, lo, hi),
        }
    }
}

/// Time step and working gradient box for a run.
#[derive(Debug, Clone)]
pub struct SchemeConfig {
    pub dt: f64,
    pub theta: f64,
    /// Per-branch slope box the run is expected to stay in; every step
    /// verifies it (the CFL constant is only valid inside).
    pub working: Vec<(f64, f64)>,
}

impl SchemeConfig {
    /// Derives `dt` from the CFL condition over the given working box.
    pub fn auto(
        grid: &JunctionGrid,
        h: &JunctionHamiltonian,
        flux: &JunctionFlux,
        working: Vec<(f64, f64)>,
        theta: f64,
    ) -> Self {
        let mut l_interior: f64 = 0.0;
        let mut l_junction: f64 = 0.0;
        for (a, &(lo, hi)) in working.iter().enumerate() {
            l_interior = l_interior.max(h.branch(a).shape().max_abs_slope_over(lo, hi));
            l_junction += flux.axis_lipschitz(h, a, lo, hi);
        }
        let l = l_interior.max(l_junction).max(1e-9);
        SchemeConfig { dt: theta * grid.dx / l, theta, working }
    }
}

/// One-sided slope range per branch, junction slope included.
pub fn gradient_range(state: &EvolutionState, grid: &JunctionGrid) -> Vec<(f64, f64)> {
    state
        .branches
        .iter()
        .map(|vals| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let mut prev = state.junction;
            for &v in vals {
                let s = (v - prev) / grid.dx;
                lo = lo.min(s);
                hi = hi.max(s);
                prev = v;
            }
            (lo, hi)
        })
        .collect()
}

/// One explicit step. Fails when the measured slope range leaves the
/// working box the CFL constant was computed for.
pub fn step(
    state: &EvolutionState,
    grid: &JunctionGrid,
    cfg: &SchemeConfig,
    flux: &JunctionFlux,
    h: &JunctionHamiltonian,
) -> Result<EvolutionState> {
    let dx = grid.dx;
    let dt = cfg.dt;
    let ranges = gradient_range(state, grid);
    for (a, (&(lo, hi), &(wlo, whi))) in ranges.iter().zip(&cfg.working).enumerate() {
        if lo < wlo - 1e-9 || hi > whi + 1e-9 {
            return Err(Error::CflViolation { branch: a + 1, min: lo, max: hi, lo: wlo, hi: whi });
        }
    }

    let junction_slopes: Vec<f64> = state
        .branches
        .iter()
        .map(|vals| (vals[0] - state.junction) / dx)
        .collect();
    let new_junction = state.junction - dt * flux.value(h, &junction_slopes);

    let t_new = state.t + dt;
    let mut new_branches = Vec::with_capacity(grid.dim());
    for (a, vals) in state.branches.iter().enumerate() {
        let n = vals.len();
        let mut out = vec![0.0; n];
        for i in 0..n - 1 {
            let u = vals[i];
            let left = if i == 0 { state.junction } else { vals[i - 1] };
            let right = vals[i + 1];
            let g = h.branch(a).godunov_flux((u - left) / dx, (right - u) / dx);
            out[i] = u - dt * g;
        }
        out[n - 1] = match &grid.far {
            FarBoundary::PlanarPin { p, rate } => p[a] * (n as f64 * dx) - t_new * rate[a],
            FarBoundary::NeumannExtrapolate => out[n - 2],
        };
        new_branches.push(out);
    }
    Ok(EvolutionState { t: t_new, junction: new_junction, branches: new_branches })
}

/// A run's stored states at the requested output times.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<EvolutionState>,
    pub dt: f64,
}

impl Trajectory {
    pub fn initial(&self) -> &EvolutionState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &EvolutionState {
        self.states.last().unwrap()
    }
}

/// Runs the scheme from `u0` to `t_final`, storing `outputs` evenly spaced
/// states (initial and final included).
pub fn run(
    u0: &[PiecewiseLinearFunction],
    h: &JunctionHamiltonian,
    grid: &JunctionGrid,
    flux: &JunctionFlux,
    cfg: &SchemeConfig,
    t_final: f64,
    outputs: usize,
) -> Result<Trajectory> {
    let n_steps = (t_final / cfg.dt).ceil().max(1.0) as usize;
    let dt = t_final / n_steps as f64;
    let cfg = SchemeConfig { dt, theta: cfg.theta, working: cfg.working.clone() };
    let outputs = outputs.max(2);
    let mut keep: Vec<usize> = (0..outputs).map(|k| (k * n_steps) / (outputs - 1)).collect();
    keep.dedup();

    let mut state = EvolutionState::from_profiles(grid, u0)?;
    let mut states = Vec::with_capacity(keep.len());
    if keep[0] == 0 {
        states.push(state.clone());
    }
    let mut next_keep = 1;
    for step_idx in 1..=n_steps {
        state = step(&state, grid, &cfg, flux, h)?;
        if next_keep < keep.len() && step_idx == keep[next_keep] {
            states.push(state.clone());
            next_keep += 1;
        }
    }
    Ok(Trajectory { states, dt })
}

/// Backward difference of the junction value over the last stored interval:
/// the measured `-u_t(T, 0)`.
pub fn junction_time_slope(traj: &Trajectory) -> Result<f64> {
    if traj.states.len() < 2 {
        return Err(Error::Scenario("trajectory needs at least two stored times".into()));
    }
    let last = &traj.states[traj.states.len() - 1];
    let prev = &traj.states[traj.states.len() - 2];
    Ok((prev.junction - last.junction) / (last.t - prev.t))
}

/// Planar initial data `u0(x) = p^a x` as per-branch profiles.
pub fn planar_profiles(p: &[f64]) -> Vec<PiecewiseLinearFunction> {
    p.iter()
        .map(|&s| PiecewiseLinearFunction::new(vec![(0.0, 0.0)], s, s).unwrap())
        .collect()
}

/// Sawtooth starting upward from the junction: slopes alternate between
/// `+amplitude` and `-amplitude` every `half_period`.
pub fn sawtooth_profile(amplitude: f64, half_period: f64, length: f64) -> PiecewiseLinearFunction {
    let mut pts = vec![(0.0, 0.0)];
    let mut x = 0.0;
    let mut y = 0.0;
    let mut sign = 1.0;
    while x < length {
        x += half_period;
        y += sign * amplitude * half_period;
        pts.push((x, y));
        sign = -sign;
    }
    let last_slope = sign * amplitude;
    PiecewiseLinearFunction::new(pts, amplitude, last_slope).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::shapes::absolute_value;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn h1_abs() -> JunctionHamiltonian {
        JunctionHamiltonian::new(vec![absolute_value()]).unwrap()
    }

    #[test]
    fn planar_germ_data_is_scheme_exact() {
        // (lambda, p) = (1, 1) is in the germ of max(1, H^-) over |p|
        let h = h1_abs();
        let f0 = JunctionFunction::flux_limiter(1.0, 1);
        let flux = JunctionFlux::strong(&f0);
        let grid = JunctionGrid::new(
            0.05,
            vec![40],
            FarBoundary::PlanarPin { p: vec![1.0], rate: vec![1.0] },
        )
        .unwrap();
        let cfg = SchemeConfig::auto(&grid, &h, &flux, vec![(0.0, 2.0)], 0.45);
        let u0 = planar_profiles(&[1.0]);
        let state = EvolutionState::from_profiles(&grid, &u0).unwrap();
        let next = step(&state, &grid, &cfg, &flux, &h).unwrap();
        let dt = cfg.dt;
        assert!((next.junction - (0.0 - dt)).abs() < 1e-12);
        for (i, &v) in next.branches[0].iter().enumerate() {
            let x = (i + 1) as f64 * grid.dx;
            assert!((v - (x - dt)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn constant_data_drops_at_relaxed_rate() {
        let h = h1_abs();
        let f0 = JunctionFunction::constant(1.0, 1);
        let flux = JunctionFlux::strong(&f0);
        let grid = JunctionGrid::new(0.05, vec![20], FarBoundary::NeumannExtrapolate).unwrap();
        let cfg = SchemeConfig::auto(&grid, &h, &flux, vec![(-2.0, 2.0)], 0.45);
        let u0 = vec![PiecewiseLinearFunction::new(vec![(0.0, 0.0)], 0.0, 0.0).unwrap()];
        let state = EvolutionState::from_profiles(&grid, &u0).unwrap();
        let next = step(&state, &grid, &cfg, &flux, &h).unwrap();
        // junction drops at the effective rate R F0(0) = 1, interior at
        // H(0) = 0
        assert!((state.junction - next.junction - cfg.dt).abs() < 1e-10);
        assert!((next.branches[0][3] - 0.0).abs() < 1e-12);
    }

    #[test]
    fn randomized_upward_perturbations_never_lower_outputs() {
        let h = h1_abs();
        let f0 = JunctionFunction::flux_limiter(1.0, 1);
        let flux = JunctionFlux::strong(&f0);
        let grid = JunctionGrid::new(0.1, vec![12], FarBoundary::NeumannExtrapolate).unwrap();
        let cfg = SchemeConfig::auto(&grid, &h, &flux, vec![(-12.0, 12.0)], 0.45);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..40 {
            let state = EvolutionState {
                t: 0.0,
                junction: rng.gen_range(-0.5..0.5),
                branches: vec![(0..12).map(|_| rng.gen_range(-0.5..0.5)).collect()],
            };
            let base = step(&state, &grid, &cfg, &flux, &h).unwrap();
            let mut bumped = state.clone();
            let delta = rng.gen_range(0.0..0.05);
            let node = rng.gen_range(0..13);
            if node == 0 {
                bumped.junction += delta;
            } else {
                bumped.branches[0][node - 1] += delta;
            }
            let pert = step(&bumped, &grid, &cfg, &flux, &h).unwrap();
            assert!(pert.junction >= base.junction - 1e-12);
            for (a, b) in pert.branches[0].iter().zip(&base.branches[0]) {
                assert!(*a >= *b - 1e-12);
            }
        }
    }

    #[test]
    fn cfl_violation_is_reported() {
        let h = h1_abs();
        let f0 = JunctionFunction::constant(0.0, 1);
        let flux = JunctionFlux::strong(&f0);
        let grid = JunctionGrid::new(0.1, vec![5], FarBoundary::NeumannExtrapolate).unwrap();
        let cfg = SchemeConfig::auto(&grid, &h, &flux, vec![(-0.5, 0.5)], 0.45);
        let u0 = planar_profiles(&[2.0]); // slope outside the working box
        let state = EvolutionState::from_profiles(&grid, &u0).unwrap();
        assert!(matches!(step(&state, &grid, &cfg, &flux, &h), Err(Error::CflViolation { .. })));
    }

    #[test]
    fn junction_time_slope_on_germ_runs() {
        let h = h1_abs();
        let f0 = JunctionFunction::flux_limiter(1.0, 1);
        let flux = JunctionFlux::strong(&f0);
        let grid = JunctionGrid::new(
            0.05,
            vec![30],
            FarBoundary::PlanarPin { p: vec![1.0], rate: vec![1.0] },
        )
        .unwrap();
        let cfg = SchemeConfig::auto(&grid, &h, &flux, vec![(0.5, 1.5)], 0.45);
        let u0 = planar_profiles(&[1.0]);
        let traj = run(&u0, &h, &grid, &flux, &cfg, 1.0, 5).unwrap();
        assert!((junction_time_slope(&traj).unwrap() - 1.0).abs() < 1e-10);

        // steady state: germ at level 0 under max(0, H^-)
        let f0 = JunctionFunction::flux_limiter(0.0, 1);
        let flux = JunctionFlux::strong(&f0);
        let grid = JunctionGrid::new(
            0.05,
            vec![30],
            FarBoundary::PlanarPin { p: vec![0.0], rate: vec![0.0] },
        )
        .unwrap();
        let cfg = SchemeConfig::auto(&grid, &h, &flux, vec![(-0.5, 0.5)], 0.45);
        let u0 = planar_profiles(&[0.0]);
        let traj = run(&u0, &h, &grid, &flux, &cfg, 1.0, 5).unwrap();
        assert!(junction_time_slope(&traj).unwrap().abs() < 1e-12);
    }

    #[test]
    fn gradient_range_examples() {
        let grid = JunctionGrid::new(0.5, vec![4], FarBoundary::NeumannExtrapolate).unwrap();
        let u0 = planar_profiles(&[0.7]);
        let state = EvolutionState::from_profiles(&grid, &u0).unwrap();
        let r = gradient_range(&state, &grid);
        assert!((r[0].0 - 0.7).abs() < 1e-12 && (r[0].1 - 0.7).abs() < 1e-12);

        let saw = sawtooth_profile(1.0, 0.5, 2.0);
        let state = EvolutionState::from_profiles(&grid, &[saw]).unwrap();
        let r = gradient_range(&state, &grid);
        assert!((r[0].0 + 1.0).abs() < 1e-12 && (r[0].1 - 1.0).abs() < 1e-12);
    }
}
