//! The constructive existence argument as an algorithm: the Duhamel
//! fixed-point map
//!
//! 𝒯(V−E)(t) = W(t)(V(0)−E) − ∫₀ᵗ W(t−s)[S(V)(V−E)_x + F×(V−E)] ds
//!
//! iterated to convergence on a short window, then continued window by
//! window. W is the exact heat semigroup, the integral is composite
//! trapezoid on the window mesh.

use crate::error::{Result, RswError};
use crate::grid::{from_spectrum, heat_coeffs, to_spectrum, Grid, Spectrum};
use crate::model::{
    advective_term, check_admissible, coriolis_term, deviation_norms, n_norm, CoriolisProfile,
    Params, State3,
};
use num_complex::Complex64;
use serde::Serialize;

/// Time nodes and states of one window (or a whole continuation run).
#[derive(Debug, Clone)]
pub struct TrajectoryMesh {
    pub times: Vec<f64>,
    pub states: Vec<State3>,
}

impl TrajectoryMesh {
    pub fn new(times: Vec<f64>, states: Vec<State3>) -> Result<Self> {
        if times.len() != states.len() || times.is_empty() {
            return Err(RswError::InvalidParameter(
                "mesh needs matching, nonempty times and states".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(RswError::InvalidParameter(
                "mesh must start at t = 0".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RswError::InvalidParameter(
                "mesh times must be strictly increasing".into(),
            ));
        }
        let grid = states[0].grid();
        if states.iter().any(|s| s.grid() != grid) {
            return Err(RswError::GridMismatch(
                "mesh states live on different grids".into(),
            ));
        }
        Ok(Self { times, states })
    }

    /// Constant-in-time mesh: M+1 uniform nodes on [0, T], all equal to `v0`.
    pub fn constant(v0: &State3, t_window: f64, nodes: usize) -> Result<Self> {
        if !(t_window > 0.0) || nodes < 2 {
            return Err(RswError::InvalidParameter(
                "window must be positive with at least 2 nodes".into(),
            ));
        }
        let m = nodes - 1;
        let times = (0..=m).map(|i| t_window * i as f64 / m as f64).collect();
        let states = vec![v0.clone(); nodes];
        Ok(Self { times, states })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &State3 {
        self.states.last().expect("mesh is nonempty")
    }
}

/// Convergence record of one fixed-point window.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointReport {
    pub iterations: usize,
    /// Sup-in-time N-norm distance between successive iterates.
    pub distances: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub converged: bool,
}

/// Tunables of the fixed-point construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MildOptions {
    /// Window constant C_w in T_w = C_w·ε·min(1, N(V−E)⁻²).
    pub window_const: f64,
    /// Nodes per window mesh (M+1).
    pub nodes_per_window: usize,
    /// Fixed-point tolerance in the sup-in-time N norm.
    pub tol: f64,
    pub max_iter: usize,
    /// Continuation stops with BlowupSuspected once N exceeds this.
    pub blowup_ceiling: f64,
}

impl Default for MildOptions {
    fn default() -> Self {
        Self {
            window_const: 0.5,
            nodes_per_window: 33,
            tol: 1e-9,
            max_iter: 60,
            blowup_ceiling: 1e6,
        }
    }
}

struct StateSpectra {
    coeffs: [Vec<Complex64>; 3],
}

fn state_spectra(s: &State3) -> StateSpectra {
    StateSpectra {
        coeffs: [
            to_spectrum(&s.lambda).coeffs().to_vec(),
            to_spectrum(&s.u).coeffs().to_vec(),
            to_spectrum(&s.v).coeffs().to_vec(),
        ],
    }
}

fn spectra_to_state(grid: Grid, spectra: &StateSpectra) -> State3 {
    let mk = |c: &Vec<Complex64>| {
        from_spectrum(&Spectrum::from_coeffs(grid, c.clone()).expect("matching grid"))
    };
    State3 {
        lambda: mk(&spectra.coeffs[0]),
        u: mk(&spectra.coeffs[1]),
        v: mk(&spectra.coeffs[2]),
    }
}

/// One application of the Duhamel operator to a trajectory. Node 0 of the
/// output is exactly `v0`.
pub fn duhamel_map(
    traj: &TrajectoryMesh,
    v0: &State3,
    p: &Params,
    cor: &CoriolisProfile,
) -> Result<TrajectoryMesh> {
    let grid = v0.grid();
    if traj.states[0].grid() != grid {
        return Err(RswError::GridMismatch(
            "trajectory and initial state on different grids".into(),
        ));
    }
    let e = State3::rest(grid, p.lambda_bar());
    let dev0 = state_spectra(&v0.sub(&e));

    // Nonlinearity G(V) = S(V)V_x + F×(V−E) at every node, in spectral form.
    let g_hat: Vec<StateSpectra> = traj
        .states
        .iter()
        .map(|s| -> Result<StateSpectra> {
            let g = advective_term(s).add(&coriolis_term(s, &e, cor)?);
            Ok(state_spectra(&g))
        })
        .collect::<Result<Vec<_>>>()?;

    // Composite trapezoid weights over nodes 0..=i of the mesh.
    let weights_up_to = |i: usize| -> Vec<f64> {
        let t = &traj.times;
        (0..=i)
            .map(|j| {
                if i == 0 {
                    0.0
                } else if j == 0 {
                    0.5 * (t[1] - t[0])
                } else if j == i {
                    0.5 * (t[i] - t[i - 1])
                } else {
                    0.5 * (t[j + 1] - t[j - 1])
                }
            })
            .collect()
    };

    let n = grid.n();
    let mut out_states = Vec::with_capacity(traj.len());
    out_states.push(v0.clone());
    for i in 1..traj.len() {
        let t_i = traj.times[i];
        let w = weights_up_to(i);
        let mut acc = StateSpectra {
            coeffs: [
                vec![Complex64::new(0.0, 0.0); n],
                vec![Complex64::new(0.0, 0.0); n],
                vec![Complex64::new(0.0, 0.0); n],
            ],
        };
        // Heat flow of the initial deviation.
        for c in 0..3 {
            let mut buf = dev0.coeffs[c].clone();
            heat_coeffs(grid, p.eps, t_i, &mut buf);
            for (a, b) in acc.coeffs[c].iter_mut().zip(&buf) {
                *a += b;
            }
        }
        // Minus the propagated nonlinearity.
        for (j, wj) in w.iter().enumerate() {
            if *wj == 0.0 {
                continue;
            }
            let lag = t_i - traj.times[j];
            for c in 0..3 {
                let mut buf = g_hat[j].coeffs[c].clone();
                heat_coeffs(grid, p.eps, lag, &mut buf);
                for (a, b) in acc.coeffs[c].iter_mut().zip(&buf) {
                    *a -= wj * b;
                }
            }
        }
        out_states.push(spectra_to_state(grid, &acc).add(&e));
    }
    TrajectoryMesh::new(traj.times.clone(), out_states)
}

/// Sup over nodes of the N-norm distance between two meshes on the same
/// time nodes.
fn mesh_distance(a: &TrajectoryMesh, b: &TrajectoryMesh) -> f64 {
    a.states
        .iter()
        .zip(&b.states)
        .map(|(x, y)| deviation_norms(&x.sub(y)).n)
        .fold(0.0_f64, f64::max)
}

/// Fixed-point solve on one window, starting from the constant-in-time
/// initial guess. Fails with `NotContracting` after three consecutive
/// expanding iterations.
pub fn solve_window(
    v0: &State3,
    t_window: f64,
    p: &Params,
    cor: &CoriolisProfile,
    opts: &MildOptions,
) -> Result<(TrajectoryMesh, FixedPointReport)> {
    if !(opts.tol > 0.0) {
        return Err(RswError::InvalidParameter("tol must be positive".into()));
    }
    let mut traj = TrajectoryMesh::constant(v0, t_window, opts.nodes_per_window)?;
    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut expanding = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;
    while iterations < opts.max_iter {
        let next = duhamel_map(&traj, v0, p, cor)?;
        iterations += 1;
        let dist = mesh_distance(&next, &traj);
        if let Some(&prev) = distances.last() {
            let ratio = dist / prev.max(1e-300);
            ratios.push(ratio);
            if !dist.is_finite() {
                return Err(RswError::NotContracting { ratio: f64::INFINITY });
            }
            if ratio > 1.0 {
                expanding += 1;
                if expanding >= 3 {
                    return Err(RswError::NotContracting { ratio });
                }
            } else {
                expanding = 0;
            }
        } else if !dist.is_finite() {
            return Err(RswError::NotContracting { ratio: f64::INFINITY });
        }
        distances.push(dist);
        traj = next;
        if dist <= opts.tol {
            converged = true;
            break;
        }
    }
    Ok((
        traj,
        FixedPointReport {
            iterations,
            distances,
            contraction_ratios: ratios,
            converged,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ContinuationStatus {
    Completed,
    BlowupSuspected { t: f64 },
}

/// Windowed continuation result. `mesh` covers [0, T_total] unless the run
/// stopped early with `BlowupSuspected`.
#[derive(Debug, Clone)]
pub struct Continuation {
    pub mesh: TrajectoryMesh,
    pub status: ContinuationStatus,
    pub windows: usize,
    pub reports: Vec<FixedPointReport>,
}

/// Chain fixed-point windows of size T_w = C_w·ε·min(1, N(V−E)⁻²), halving
/// the window whenever the map fails to contract.
pub fn continuation(
    v0: &State3,
    t_total: f64,
    p: &Params,
    cor: &CoriolisProfile,
    opts: &MildOptions,
) -> Result<Continuation> {
    if !(p.eps > 0.0) {
        return Err(RswError::InvalidParameter(
            "the mild construction requires eps > 0".into(),
        ));
    }
    if !(t_total > 0.0) {
        return Err(RswError::InvalidParameter(format!(
            "horizon must be positive, got {t_total}"
        )));
    }
    let lambda_bar = p.lambda_bar();
    check_admissible(v0, lambda_bar, 0.0)?;
    let e = State3::rest(v0.grid(), lambda_bar);

    let mut times = vec![0.0];
    let mut states = vec![v0.clone()];
    let mut reports = Vec::new();
    let mut windows = 0usize;
    let mut t = 0.0;
    let mut current = v0.clone();
    let t_eps = 1e-12 * t_total.max(1.0);
    let mut status = ContinuationStatus::Completed;

    while t < t_total - t_eps {
        let n = n_norm(&current, &e)?;
        if n > opts.blowup_ceiling {
            status = ContinuationStatus::BlowupSuspected { t };
            break;
        }
        let shrink = if n > 1.0 { 1.0 / (n * n) } else { 1.0 };
        let mut t_w = (opts.window_const * p.eps * shrink).min(t_total - t);
        loop {
            match solve_window(&current, t_w, p, cor, opts) {
                Ok((mesh, report)) if report.converged => {
                    for i in 1..mesh.len() {
                        times.push(t + mesh.times[i]);
                        states.push(mesh.states[i].clone());
                    }
                    current = mesh.last_state().clone();
                    t += t_w;
                    windows += 1;
                    reports.push(report);
                    break;
                }
                Ok((_, report)) => {
                    reports.push(report);
                    t_w *= 0.5;
                }
                Err(RswError::NotContracting { .. }) => {
                    t_w *= 0.5;
                }
                Err(err) => return Err(err),
            }
            if t_w < 1e-12 * p.eps.max(1e-12) {
                return Err(RswError::NotContracting { ratio: f64::NAN });
            }
        }
        check_admissible(&current, lambda_bar, t)?;
    }

    Ok(Continuation {
        mesh: TrajectoryMesh::new(times, states)?,
        status,
        windows,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{heat_propagate, Field, Grid};
    use crate::model::hyperbolic_rhs;
    use std::f64::consts::PI;

    fn setup(n: usize, eps: f64) -> (Grid, Params, CoriolisProfile, State3) {
        let g = Grid::new(n, 2.0 * PI).unwrap();
        let p = Params::new(1.0, 1.0, eps).unwrap();
        let cor = CoriolisProfile::sinusoidal(g, 1.0, 0.5);
        let e = State3::rest(g, p.lambda_bar());
        (g, p, cor, e)
    }

    fn bump_state(g: Grid, lambda_bar: f64, amp: f64) -> State3 {
        let l = g.length();
        State3 {
            lambda: Field::from_fn(g, |x| {
                lambda_bar * (1.0 + amp * (-((x - 0.5 * l) / (l / 16.0)).powi(2)).exp())
            }),
            u: Field::from_fn(g, |x| amp * (2.0 * PI * x / l).sin()),
            v: Field::zeros(g),
        }
    }

    #[test]
    fn mesh_validation() {
        let (g, _, _, e) = setup(64, 0.1);
        assert!(TrajectoryMesh::new(vec![], vec![]).is_err());
        assert!(TrajectoryMesh::new(vec![0.1], vec![e.clone()]).is_err());
        assert!(TrajectoryMesh::new(vec![0.0, 0.0], vec![e.clone(), e.clone()]).is_err());
        let ok = TrajectoryMesh::constant(&e, 1.0, 5).unwrap();
        assert_eq!(ok.len(), 5);
        assert_eq!(ok.times[4], 1.0);
        let _ = g;
    }

    #[test]
    fn duhamel_fixes_rest_state() {
        let (_, p, cor, e) = setup(64, 0.1);
        let traj = TrajectoryMesh::constant(&e, 0.2, 9).unwrap();
        let out = duhamel_map(&traj, &e, &p, &cor).unwrap();
        for s in &out.states {
            assert!(s.sub(&e).sup_vec_norm() < 1e-13);
        }
    }

    #[test]
    fn duhamel_without_nonlinearity_is_pure_heat() {
        // With u ≡ 0, λ ≡ λ̄ and f ≡ 0 the integrand vanishes, leaving
        // W(t)(V0−E) + E exactly.
        let (g, p, _, e) = setup(64, 0.2);
        let cor0 = CoriolisProfile::constant(g, 0.0);
        let profile = Field::from_fn(g, |x| (2.0 * x).sin());
        let v0 = State3 {
            lambda: Field::constant(g, p.lambda_bar()),
            u: Field::zeros(g),
            v: profile.clone(),
        };
        let traj = TrajectoryMesh::constant(&v0, 0.5, 17).unwrap();
        let out = duhamel_map(&traj, &v0, &p, &cor0).unwrap();
        for (i, s) in out.states.iter().enumerate() {
            let t = out.times[i];
            let exact = heat_propagate(&profile, p.eps, t).unwrap();
            assert!(s.v.sub(&exact).sup_norm() < 1e-12, "node {i}");
            assert!(s.u.sup_norm() < 1e-13);
            assert!(s.lambda.sub(&e.lambda).sup_norm() < 1e-13);
        }
    }

    #[test]
    fn duhamel_output_node_zero_is_initial_state() {
        let (g, p, cor, _) = setup(64, 0.1);
        let v0 = bump_state(g, p.lambda_bar(), 0.1);
        let traj = TrajectoryMesh::constant(&v0, 0.05, 9).unwrap();
        let out = duhamel_map(&traj, &v0, &p, &cor).unwrap();
        assert!(out.states[0].sub(&v0).sup_vec_norm() == 0.0);
    }

    #[test]
    fn window_converges_in_one_iteration_at_rest() {
        let (_, p, cor, e) = setup(64, 0.1);
        let (mesh, report) = solve_window(&e, 0.1, &p, &cor, &MildOptions::default()).unwrap();
        assert!(report.converged);
        assert_eq!(report.iterations, 1);
        assert!(mesh.last_state().sub(&e).sup_vec_norm() < 1e-13);
    }

    #[test]
    fn window_contracts_geometrically_for_small_data() {
        let (g, p, cor, _) = setup(64, 0.1);
        let v0 = bump_state(g, p.lambda_bar(), 0.05);
        let opts = MildOptions {
            tol: 1e-11,
            ..MildOptions::default()
        };
        let t_w = 0.5 * p.eps; // window rule with N(0) < 1
        let (_, report) = solve_window(&v0, t_w, &p, &cor, &opts).unwrap();
        assert!(report.converged);
        // Ratios below 1 once the iteration settles.
        let settled = &report.contraction_ratios[..report.contraction_ratios.len() - 1];
        for r in settled {
            assert!(*r < 1.0, "ratios {:?}", report.contraction_ratios);
        }
    }

    #[test]
    fn oversized_window_fails_to_contract() {
        let (g, p, cor, _) = setup(64, 0.05);
        let v0 = bump_state(g, p.lambda_bar(), 0.5);
        let res = solve_window(&v0, 50.0, &p, &cor, &MildOptions::default());
        match res {
            Err(RswError::NotContracting { .. }) => {}
            Ok((_, report)) => {
                assert!(!report.converged, "a 50-unit window must not converge");
            }
            Err(other) => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn contraction_ratio_monotone_under_window_halving() {
        let (g, p, cor, _) = setup(64, 0.1);
        let v0 = bump_state(g, p.lambda_bar(), 0.1);
        let opts = MildOptions {
            tol: 1e-13,
            max_iter: 8,
            ..MildOptions::default()
        };
        let early_ratio = |t_w: f64| -> f64 {
            let (_, report) = solve_window(&v0, t_w, &p, &cor, &opts).unwrap();
            report.contraction_ratios[0]
        };
        let base = 0.5 * p.eps;
        let r1 = early_ratio(base);
        let r2 = early_ratio(0.5 * base);
        let r3 = early_ratio(0.25 * base);
        assert!(r2 <= r1 * 1.05, "halving made contraction worse: {r1} -> {r2}");
        assert!(r3 <= r2 * 1.05, "halving made contraction worse: {r2} -> {r3}");
    }

    #[test]
    fn continuation_of_rest_state_is_rest() {
        let (_, p, cor, e) = setup(64, 0.1);
        let run = continuation(&e, 0.4, &p, &cor, &MildOptions::default()).unwrap();
        assert_eq!(run.status, ContinuationStatus::Completed);
        assert!((run.mesh.times.last().unwrap() - 0.4).abs() < 1e-10);
        for s in &run.mesh.states {
            assert!(s.sub(&e).sup_vec_norm() < 1e-12);
        }
    }

    #[test]
    fn continuation_requires_viscosity() {
        let (g, _, cor, e) = setup(64, 0.0);
        let p0 = Params::new(1.0, 1.0, 0.0).unwrap();
        assert!(continuation(&e, 1.0, &p0, &cor, &MildOptions::default()).is_err());
        let _ = g;
    }

    #[test]
    fn window_count_grows_with_squared_amplitude() {
        // The window rule T_w ∝ N(0)⁻² (for N > 1) makes the number of
        // windows scale like A² once the data is large enough.
        let (g, p, cor, _) = setup(64, 0.1);
        let count = |amp: f64| -> usize {
            // Narrow bump with a strong second derivative so N(0) > 1.
            let l = g.length();
            let v0 = State3 {
                lambda: Field::from_fn(g, |x| {
                    p.lambda_bar()
                        * (1.0 + amp * (-((x - 0.5 * l) / (l / 40.0)).powi(2)).exp())
                }),
                u: Field::zeros(g),
                v: Field::zeros(g),
            };
            let e = State3::rest(g, p.lambda_bar());
            let n0 = n_norm(&v0, &e).unwrap();
            assert!(n0 > 1.0, "test assumes the N⁻² branch, N(0) = {n0}");
            continuation(&v0, 0.05, &p, &cor, &MildOptions::default())
                .unwrap()
                .windows
        };
        let w1 = count(0.1);
        let w2 = count(0.2);
        let w4 = count(0.4);
        assert!(w1 < w2 && w2 < w4, "counts {w1}, {w2}, {w4} not increasing");
        let ratio = w4 as f64 / w1 as f64;
        assert!(
            (8.0..32.0).contains(&ratio),
            "expected ~16x window growth from A to 4A, got {ratio:.1} ({w1} -> {w4})"
        );
    }

    #[test]
    fn fixed_point_residual_matches_pde() {
        // A converged window satisfies the PDE up to O(dt²) + O(tol):
        // centered differences of V in time against −S(V)V_x − F×(V−E) + εV_xx.
        let (g, p, cor, e) = setup(64, 0.1);
        let v0 = bump_state(g, p.lambda_bar(), 0.05);
        let opts = MildOptions {
            nodes_per_window: 65,
            tol: 1e-12,
            ..MildOptions::default()
        };
        let t_w = 0.5 * p.eps;
        let (mesh, report) = solve_window(&v0, t_w, &p, &cor, &opts).unwrap();
        assert!(report.converged);
        let dt = mesh.times[1] - mesh.times[0];
        let mut worst: f64 = 0.0;
        for i in 1..mesh.len() - 1 {
            let dv_dt = mesh.states[i + 1].sub(&mesh.states[i - 1]).scale(1.0 / (2.0 * dt));
            let rhs = hyperbolic_rhs(&mesh.states[i], &e, &cor)
                .unwrap()
                .add(&mesh.states[i].derivative(2).scale(p.eps));
            worst = worst.max(dv_dt.sub(&rhs).l2_norm());
        }
        assert!(
            worst < 20.0 * dt * dt + 1e-6,
            "PDE residual {worst:.3e} too large for dt = {dt:.3e}"
        );
    }
}
