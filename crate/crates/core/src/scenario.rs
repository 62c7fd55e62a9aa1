//! Scenario-driven front end.
//!
//! A scenario file is a TOML record naming the branch Hamiltonians (as
//! breakpoint lists with tail slopes), a junction function (tagged family
//! record) and one command with its parameters. Each run writes CSV data
//! files plus a single `summary.toml` record and reports pass/fail of the
//! tolerance checks embedded in the command. Runs are deterministic: grids
//! are swept in fixed order and randomized audits draw from a seeded
//! generator whose seed is recorded in the summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::PiecewiseLinearFunction;
use crate::junction::{Bound, JunctionFunction, JunctionHamiltonian};
use crate::limiters::{build_limiter_tensor, explicit_relax_eval};
use crate::relaxation::{godunov_relax, is_relaxed, relax};
use crate::riemann::{solve_riemann, RiemannResolution};
use crate::solver::{
    planar_profiles, run, sawtooth_profile, FarBoundary, JunctionFlux, JunctionGrid, SchemeConfig,
};
use crate::tol;

#[derive(Debug, Clone, Deserialize)]
pub struct PlRecord {
    pub breakpoints: Vec<(f64, f64)>,
    pub left_tail_slope: f64,
    pub right_tail_slope: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct JunctionFunctionRecord {
    pub family: String,
    pub value: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub grids: Option<Vec<Vec<f64>>>,
    pub values: Option<Vec<f64>>,
    pub lower_slope: Option<f64>,
    pub members: Option<Vec<JunctionFunctionRecord>>,
    pub inner: Option<Box<JunctionFunctionRecord>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RelaxEvalParams {
    pub p: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RelaxTableParams {
    pub grid_min: Vec<f64>,
    pub grid_max: Vec<f64>,
    pub grid_step: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RiemannParams {
    pub p: Vec<f64>,
    pub dx: f64,
    pub t_final: f64,
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct InitialDataRecord {
    pub kind: String,
    pub p: Option<Vec<f64>>,
    pub amplitude: Option<f64>,
    pub half_period: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SolveParams {
    pub initial: InitialDataRecord,
    pub mode: String,
    pub dx: f64,
    pub t_final: f64,
    pub domain: f64,
    pub outputs: Option<usize>,
    pub working_min: Option<Vec<f64>>,
    pub working_max: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct AuditParams {
    pub grid_min: Vec<f64>,
    pub grid_max: Vec<f64>,
    pub grid_step: f64,
    pub random_samples: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EquivalenceDemoParams {
    pub a: f64,
    pub grid_min: f64,
    pub grid_max: f64,
    pub grid_step: f64,
    pub epsilons: Option<Vec<f64>>,
}

/// Parsed scenario file: Hamiltonians, junction function, one command.
#[derive(Debug, Clone, Deserialize)]
pub struct Scenario {
    pub command: String,
    pub seed: Option<u64>,
    pub tolerance_scale: Option<f64>,
    pub hamiltonian: Vec<PlRecord>,
    pub junction_function: Option<JunctionFunctionRecord>,
    pub relax_eval: Option<RelaxEvalParams>,
    pub relax_table: Option<RelaxTableParams>,
    pub riemann: Option<RiemannParams>,
    pub solve: Option<SolveParams>,
    pub audit: Option<AuditParams>,
    pub equivalence_demo: Option<EquivalenceDemoParams>,
}

/// Machine-readable result of a run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub status: String,
    pub max_error: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub files: Vec<String>,
    pub detail: String,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.status == "pass"
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Scenario(format!("scenario parse error: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn build_hamiltonian(&self) -> Result<JunctionHamiltonian> {
        let shapes: Vec<PiecewiseLinearFunction> = self
            .hamiltonian
            .iter()
            .map(|r| {
                PiecewiseLinearFunction::new(
                    r.breakpoints.clone(),
                    r.left_tail_slope,
                    r.right_tail_slope,
                )
            })
            .collect::<Result<_>>()?;
        JunctionHamiltonian::from_shapes(shapes)
    }

    pub fn build_junction_function(&self, dim: usize) -> Result<JunctionFunction> {
        let record = self
            .junction_function
            .as_ref()
            .ok_or_else(|| Error::Scenario("scenario needs a junction_function".into()))?;
        build_function(record, dim)
    }
}

fn build_function(r: &JunctionFunctionRecord, dim: usize) -> Result<JunctionFunction> {
    let missing =
        |field: &str| Error::Scenario(format!("family '{}' needs field '{}'", r.family, field));
    let f = match r.family.as_str() {
        "constant" => JunctionFunction::constant(r.value.ok_or_else(|| missing("value"))?, dim),
        "affine" => JunctionFunction::affine(
            r.a.ok_or_else(|| missing("a"))?,
            r.b.clone().ok_or_else(|| missing("b"))?,
        )?,
        "flux_limiter" => JunctionFunction::flux_limiter(r.a.ok_or_else(|| missing("a"))?, dim),
        "epsilon_graph" => JunctionFunction::epsilon_graph(
            r.a.ok_or_else(|| missing("a"))?,
            r.eps.ok_or_else(|| missing("eps"))?,
        )?,
        "tabulated" => JunctionFunction::tabulated(
            r.grids.clone().ok_or_else(|| missing("grids"))?,
            r.values.clone().ok_or_else(|| missing("values"))?,
            r.lower_slope.unwrap_or(0.0),
        )?,
        "max" | "min" => {
            let members = r
                .members
                .as_ref()
                .ok_or_else(|| missing("members"))?
                .iter()
                .map(|m| build_function(m, dim))
                .collect::<Result<Vec<_>>>()?;
            if r.family == "max" {
                JunctionFunction::pointwise_max(members)?
            } else {
                JunctionFunction::pointwise_min(members)?
            }
        }
        "semi_coercified" => {
            let inner = r.inner.as_ref().ok_or_else(|| missing("inner"))?;
            JunctionFunction::semi_coercified(build_function(inner, dim)?)
        }
        other => return Err(Error::Scenario(format!("unknown family '{other}'"))),
    };
    if f.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: f.dim() });
    }
    Ok(f)
}

fn write_file(out_dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn axis_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round().max(1.0) as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn product_grid(mins: &[f64], maxs: &[f64], step: f64) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = mins
        .iter()
        .zip(maxs)
        .map(|(&lo, &hi)| axis_grid(lo, hi, step))
        .collect();
    let mut out = vec![vec![]];
    for axis in &axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for stem in &out {
            for &x in axis {
                let mut v = stem.clone();
                v.push(x);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Executes the scenario's command, writing outputs under `out_dir`.
///
/// `seed_override` and `tolerance_scale_override` take precedence over the
/// scenario fields.
pub fn run_scenario(
    scenario: &Scenario,
    out_dir: &Path,
    seed_override: Option<u64>,
    tolerance_scale_override: Option<f64>,
) -> Result<RunReport> {
    let seed = seed_override.or(scenario.seed).unwrap_or(0);
    let scale = tolerance_scale_override
        .or(scenario.tolerance_scale)
        .unwrap_or(1.0);
    let h = scenario.build_hamiltonian()?;
    let mut files = Vec::new();

    let report = match scenario.command.as_str() {
        "relax-eval" => {
            let params = scenario
                .relax_eval
                .as_ref()
                .ok_or_else(|| Error::Scenario("relax-eval needs [relax_eval]".into()))?;
            let f0 = scenario.build_junction_function(h.dim())?;
            let composed = relax(&f0, &h, &params.p)?;
            let fixed_point = godunov_relax(&crate::junction::semi_coercify(&f0), &h, &params.p)?;
            let err = (composed.value - fixed_point.value).abs();
            let tolerance = tol::ROUTE_TOL * scale;
            let mut s = String::new();
            writeln!(s, "p = {:?}", params.p).unwrap();
            writeln!(s, "value = {}", composed.value).unwrap();
            writeln!(s, "witness = {:?}", composed.witness).unwrap();
            writeln!(s, "method = {}", composed.method.as_str()).unwrap();
            writeln!(s, "godunov_value = {}", fixed_point.value).unwrap();
            files.push(write_file(out_dir, "relax_eval.txt", &s)?);
            RunReport {
                command: scenario.command.clone(),
                status: if err <= tolerance { "pass" } else { "fail" }.into(),
                max_error: err,
                tolerance,
                seed,
                files: vec![],
                detail: format!(
                    "relaxed value {} with witness {:?}",
                    composed.value, composed.witness
                ),
            }
        }
        "relax-table" => {
            let params = scenario
                .relax_table
                .as_ref()
                .ok_or_else(|| Error::Scenario("relax-table needs [relax_table]".into()))?;
            let f0 = scenario.build_junction_function(h.dim())?;
            let sc = crate::junction::semi_coercify(&f0);
            let grid = product_grid(&params.grid_min, &params.grid_max, params.grid_step);
            let mut csv = String::new();
            for a in 0..h.dim() {
                write!(csv, "p{},", a + 1).unwrap();
            }
            write!(csv, "value,").unwrap();
            for a in 0..h.dim() {
                write!(csv, "witness{},", a + 1).unwrap();
            }
            writeln!(csv, "method").unwrap();
            let mut max_err: f64 = 0.0;
            for p in &grid {
                let r = relax(&f0, &h, p)?;
                let g = godunov_relax(&sc, &h, p)?;
                max_err = max_err.max((r.value - g.value).abs());
                for x in p {
                    write!(csv, "{x},").unwrap();
                }
                write!(csv, "{},", r.value).unwrap();
                for w in &r.witness {
                    write!(csv, "{w},").unwrap();
                }
                writeln!(csv, "{}", r.method.as_str()).unwrap();
            }
            files.push(write_file(out_dir, "relax_table.csv", &csv)?);
            let tolerance = tol::ROUTE_TOL * scale;
            RunReport {
                command: scenario.command.clone(),
                status: if max_err <= tolerance { "pass" } else { "fail" }.into(),
                max_error: max_err,
                tolerance,
                seed,
                files: vec![],
                detail: format!(
                    "{} grid points; max |composed - fixed point| = {max_err:e}",
                    grid.len()
                ),
            }
        }
        "riemann" => {
            let params = scenario
                .riemann
                .as_ref()
                .ok_or_else(|| Error::Scenario("riemann needs [riemann]".into()))?;
            let f0 = scenario.build_junction_function(h.dim())?;
            let tolerance = params.tolerance.unwrap_or(5e-2) * scale;
            // tolerance is checked here so the report can carry the error
            let res = RiemannResolution::new(params.dx, params.t_final);
            let sol = solve_riemann(&f0, &h, &params.p, &res)?;
            for (a, w) in sol.profiles.iter().enumerate() {
                let mut csv = String::from("xi,w\n");
                for &(x, y) in w.breakpoints() {
                    writeln!(csv, "{x},{y}").unwrap();
                }
                files.push(write_file(
                    out_dir,
                    &format!("profile_branch_{}.csv", a + 1),
                    &csv,
                )?);
            }
            let mut s = String::new();
            writeln!(s, "p = {:?}", sol.p).unwrap();
            writeln!(s, "effective_value = {}", sol.effective_value).unwrap();
            writeln!(s, "relax_value = {}", sol.diagnostics.relax_value).unwrap();
            writeln!(s, "p_hat = {:?}", sol.p_hat).unwrap();
            writeln!(s, "p_hat_reference = {:?}", sol.diagnostics.hat_p_reference).unwrap();
            writeln!(s, "convexity = {:?}", sol.convexity).unwrap();
            writeln!(
                s,
                "self_similarity_residual = {}",
                sol.diagnostics.self_similarity_residual
            )
            .unwrap();
            files.push(write_file(out_dir, "riemann_summary.txt", &s)?);
            RunReport {
                command: scenario.command.clone(),
                status: if sol.diagnostics.value_error <= tolerance {
                    "pass"
                } else {
                    "fail"
                }
                .into(),
                max_error: sol.diagnostics.value_error,
                tolerance,
                seed,
                files: vec![],
                detail: format!(
                    "junction slope {} vs effective value {}",
                    sol.effective_value, sol.diagnostics.relax_value
                ),
            }
        }
        "solve" => {
            let params = scenario
                .solve
                .as_ref()
                .ok_or_else(|| Error::Scenario("solve needs [solve]".into()))?;
            let f0 = scenario.build_junction_function(h.dim())?;
            let cells = (params.domain / params.dx).ceil() as usize;
            let u0: Vec<PiecewiseLinearFunction> = match params.initial.kind.as_str() {
                "planar" => planar_profiles(
                    params
                        .initial
                        .p
                        .as_ref()
                        .ok_or_else(|| Error::Scenario("planar initial data needs p".into()))?,
                ),
                "sawtooth" => {
                    let amp = params.initial.amplitude.unwrap_or(1.0);
                    let hp = params.initial.half_period.unwrap_or(0.5);
                    (0..h.dim())
                        .map(|_| sawtooth_profile(amp, hp, params.domain))
                        .collect()
                }
                other => return Err(Error::Scenario(format!("unknown initial data '{other}'"))),
            };
            let far = match params.initial.kind.as_str() {
                "planar" => {
                    let p = params.initial.p.clone().unwrap();
                    let rate = (0..h.dim()).map(|a| h.branch(a).eval(p[a])).collect();
                    FarBoundary::PlanarPin { p, rate }
                }
                _ => FarBoundary::NeumannExtrapolate,
            };
            let grid = JunctionGrid::new(params.dx, vec![cells; h.dim()], far)?;
            let flux = match params.mode.as_str() {
                "strong" => JunctionFlux::strong(&f0),
                "raw" => JunctionFlux::raw(&f0),
                other => return Err(Error::Scenario(format!("unknown mode '{other}'"))),
            };
            let state0 = crate::solver::EvolutionState::from_profiles(&grid, &u0)?;
            let init_range = crate::solver::gradient_range(&state0, &grid);
            let working: Vec<(f64, f64)> = (0..h.dim())
                .map(|a| {
                    let lo = params
                        .working_min
                        .as_ref()
                        .map(|v| v[a])
                        .unwrap_or(init_range[a].0 - 2.0);
                    let hi = params
                        .working_max
                        .as_ref()
                        .map(|v| v[a])
                        .unwrap_or(init_range[a].1 + 2.0);
                    (lo, hi)
                })
                .collect();
            let cfg = SchemeConfig::auto(&grid, &h, &flux, working, 0.45);
            let traj = run(
                &u0,
                &h,
                &grid,
                &flux,
                &cfg,
                params.t_final,
                params.outputs.unwrap_or(5),
            )?;
            let mut csv = String::from("t,branch,x,u\n");
            for state in &traj.states {
                for a in 0..h.dim() {
                    writeln!(csv, "{},{},0,{}", state.t, a + 1, state.junction).unwrap();
                    for (i, &v) in state.branches[a].iter().enumerate() {
                        writeln!(
                            csv,
                            "{},{},{},{v}",
                            state.t,
                            a + 1,
                            (i + 1) as f64 * params.dx
                        )
                        .unwrap();
                    }
                }
            }
            files.push(write_file(out_dir, "trajectory.csv", &csv)?);
            RunReport {
                command: scenario.command.clone(),
                status: "pass".into(),
                max_error: 0.0,
                tolerance: 0.0,
                seed,
                files: vec![],
                detail: format!("{} stored states, dt = {}", traj.states.len(), traj.dt),
            }
        }
        "tensor" => {
            let f0 = scenario.build_junction_function(h.dim())?;
            let t = build_limiter_tensor(&f0, &h)?;
            files.push(write_file(out_dir, "tensor.txt", &t.to_text())?);
            // cross-check the explicit formula against the fixed point
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut max_err: f64 = 0.0;
            for _ in 0..25 {
                let p: Vec<f64> = (0..h.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let v = explicit_relax_eval(&t, &h, &p)?;
                let r = relax(&f0, &h, &p)?;
                max_err = max_err.max((v - r.value).abs());
            }
            let tolerance = 1e-6 * scale;
            RunReport {
                command: scenario.command.clone(),
                status: if max_err <= tolerance { "pass" } else { "fail" }.into(),
                max_error: max_err,
                tolerance,
                seed,
                files: vec![],
                detail: format!("tensor shape {:?}", t.shape()),
            }
        }
        "audit" => {
            let params = scenario
                .audit
                .as_ref()
                .ok_or_else(|| Error::Scenario("audit needs [audit]".into()))?;
            let f0 = scenario.build_junction_function(h.dim())?;
            let mut grid = product_grid(&params.grid_min, &params.grid_max, params.grid_step);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..params.random_samples.unwrap_or(0) {
                grid.push(
                    (0..h.dim())
                        .map(|a| rng.gen_range(params.grid_min[a]..params.grid_max[a]))
                        .collect(),
                );
            }
            let report = is_relaxed(&Bound::new(&f0, &h), &h, &grid)?;
            let mut s = String::new();
            writeln!(s, "sub_relaxed = {}", report.sub_relaxed).unwrap();
            writeln!(s, "super_relaxed = {}", report.super_relaxed).unwrap();
            for fail in &report.failures {
                writeln!(
                    s,
                    "failure: {} at p = {:?}: {}",
                    fail.property, fail.p, fail.detail
                )
                .unwrap();
            }
            files.push(write_file(out_dir, "audit.txt", &s)?);
            RunReport {
                command: scenario.command.clone(),
                status: "pass".into(),
                max_error: 0.0,
                tolerance: 0.0,
                seed,
                files: vec![],
                detail: format!(
                    "sub_relaxed = {}, super_relaxed = {}",
                    report.sub_relaxed, report.super_relaxed
                ),
            }
        }
        "equivalence-demo" => {
            let params = scenario.equivalence_demo.as_ref().ok_or_else(|| {
                Error::Scenario("equivalence-demo needs [equivalence_demo]".into())
            })?;
            if h.dim() != 1 {
                return Err(Error::Scenario(
                    "equivalence-demo is a single-branch comparison".into(),
                ));
            }
            let a = params.a;
            let epsilons = params.epsilons.clone().unwrap_or(vec![1.0, 0.1, 0.01]);
            let mut conditions: Vec<(String, JunctionFunction)> = vec![
                ("flux_limited".into(), JunctionFunction::flux_limiter(a, 1)),
                ("constant".into(), JunctionFunction::constant(a, 1)),
                ("affine".into(), JunctionFunction::affine(2.0 * a, vec![1.0])?),
            ];
            for eps in &epsilons {
                conditions.push((
                    format!("graph_eps_{eps}"),
                    JunctionFunction::epsilon_graph(a, *eps)?,
                ));
            }
            let grid = axis_grid(params.grid_min, params.grid_max, params.grid_step);
            let mut table: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
            for &p in &grid {
                let row = conditions
                    .iter()
                    .map(|(_, f0)| relax(f0, &h, &[p]).map(|r| r.value))
                    .collect::<Result<Vec<f64>>>()?;
                table.push(row);
            }
            let mut max_dev: f64 = 0.0;
            for row in &table {
                for i in 0..row.len() {
                    for j in i + 1..row.len() {
                        max_dev = max_dev.max((row[i] - row[j]).abs());
                    }
                }
            }
            let mut csv = String::from("p");
            for (name, _) in &conditions {
                write!(csv, ",{name}").unwrap();
            }
            csv.push('\n');
            for (k, &p) in grid.iter().enumerate() {
                write!(csv, "{p}").unwrap();
                for v in &table[k] {
                    write!(csv, ",{v}").unwrap();
                }
                csv.push('\n');
            }
            files.push(write_file(out_dir, "equivalence_demo.csv", &csv)?);
            let tolerance = tol::ROUTE_TOL * scale;
            RunReport {
                command: scenario.command.clone(),
                status: if max_dev <= tolerance { "pass" } else { "fail" }.into(),
                max_error: max_dev,
                tolerance,
                seed,
                files: vec![],
                detail: format!(
                    "{} conditions over {} grid points share one relaxation",
                    conditions.len(),
                    grid.len()
                ),
            }
        }
        other => return Err(Error::Scenario(format!("unknown command '{other}'"))),
    };

    let mut report = report;
    report.files = files.iter().map(|p| p.display().to_string()).collect();
    let summary = toml::to_string_pretty(&report)
        .map_err(|e| Error::Scenario(format!("summary serialization: {e}")))?;
    let summary_path = write_file(out_dir, "summary.toml", &summary)?;
    report.files.push(summary_path.display().to_string());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const ABS_H: &str = r#"
breakpoints = [[-1.0, 1.0], [0.0, 0.0], [1.0, 1.0]]
left_tail_slope = -1.0
right_tail_slope = 1.0
"#;

    fn scenario(command: &str, body: &str) -> Scenario {
        let text = format!("command = \"{command}\"\n\n[[hamiltonian]]\n{ABS_H}\n{body}");
        Scenario::from_toml(&text).unwrap()
    }

    #[test]
    fn relax_eval_matches_oracle_value() {
        let s = scenario(
            "relax-eval",
            r#"
[junction_function]
family = "constant"
value = 1.0

[relax_eval]
p = [2.0]
"#,
        );
        let dir = std::env::temp_dir().join("hjj_test_relax_eval");
        let report = run_scenario(&s, &dir, None, None).unwrap();
        assert!(report.passed());
        assert!(report.detail.contains("relaxed value 1"));
    }

    #[test]
    fn audit_reports_flux_limiter_as_relaxed() {
        let s = scenario(
            "audit",
            r#"
[junction_function]
family = "flux_limiter"
a = 1.0

[audit]
grid_min = [-4.0]
grid_max = [4.0]
grid_step = 0.5
random_samples = 20
"#,
        );
        let dir = std::env::temp_dir().join("hjj_test_audit");
        let report = run_scenario(&s, &dir, None, None).unwrap();
        assert!(report.passed());
        assert!(report.detail.contains("sub_relaxed = true"));
        assert!(report.detail.contains("super_relaxed = true"));
    }

    #[test]
    fn equivalence_demo_passes_at_route_tolerance() {
        let s = scenario(
            "equivalence-demo",
            r#"
[equivalence_demo]
a = 1.0
grid_min = -5.0
grid_max = 5.0
grid_step = 0.5
"#,
        );
        let dir = std::env::temp_dir().join("hjj_test_equivalence");
        let report = run_scenario(&s, &dir, None, None).unwrap();
        assert!(report.passed(), "max deviation {}", report.max_error);
        assert!(report.max_error <= 1e-9);
    }

    #[test]
    fn unknown_command_is_rejected() {
        let s = scenario("frobnicate", "");
        let dir = std::env::temp_dir().join("hjj_test_unknown");
        assert!(run_scenario(&s, &dir, None, None).is_err());
    }

    #[test]
    fn nested_families_parse_and_evaluate() {
        let s = scenario(
            "relax-eval",
            r#"
[junction_function]
family = "max"

[[junction_function.members]]
family = "semi_coercified"
inner = { family = "constant", value = 0.5 }

[[junction_function.members]]
family = "tabulated"
grids = [[-2.0, 0.0, 2.0]]
values = [1.0, 0.5, 0.0]
lower_slope = 1.0

[relax_eval]
p = [0.0]
"#,
        );
        let dir = std::env::temp_dir().join("hjj_test_nested");
        let report = run_scenario(&s, &dir, None, None).unwrap();
        assert!(report.passed());
    }
}
