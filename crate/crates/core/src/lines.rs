//! Practical time integrator for the regularized system and its ε = 0 limit:
//! Strang splitting with an exact spectral diffusion substep and a classical
//! RK4 hyperbolic substep under CFL control.

use crate::diagnostics::{sample_record, DiagnosticsRecord};
use crate::error::{Result, RswError};
use crate::grid::heat_propagate;
use crate::model::{
    check_admissible, hyperbolic_rhs, max_char_speed, CoriolisProfile, Params, State3,
};
use serde::Serialize;

/// Time-step control for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepControl {
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub sample_every: usize,
}

impl StepControl {
    pub fn new(cfl: f64, dt_max: f64, t_end: f64, sample_every: usize) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(RswError::InvalidParameter(format!(
                "cfl must lie in (0, 1], got {cfl}"
            )));
        }
        if !(dt_max > 0.0) {
            return Err(RswError::InvalidParameter(format!(
                "dt_max must be positive, got {dt_max}"
            )));
        }
        if !(t_end >= 0.0) {
            return Err(RswError::InvalidParameter(format!(
                "t_end must be nonnegative, got {t_end}"
            )));
        }
        if sample_every == 0 {
            return Err(RswError::InvalidParameter(
                "sample_every must be at least 1".into(),
            ));
        }
        Ok(Self {
            cfl,
            dt_max,
            t_end,
            sample_every,
        })
    }
}

/// CFL time step: cfl·dx / max(|u|, |u ± λ/2|), capped at `dt_max`.
/// A degenerate state with no wave speed falls back to the cap.
pub fn cfl_dt(v: &State3, cfl: f64, dt_max: f64) -> f64 {
    let speed = max_char_speed(v);
    if speed <= f64::MIN_POSITIVE {
        return dt_max;
    }
    (cfl * v.grid().dx() / speed).min(dt_max)
}

/// One classical four-stage explicit step of V' = −S(V)V_x − F×(V−E).
pub fn step_hyperbolic_rk4(
    v: &State3,
    dt: f64,
    e: &State3,
    cor: &CoriolisProfile,
) -> Result<State3> {
    let k1 = hyperbolic_rhs(v, e, cor)?;
    let k2 = hyperbolic_rhs(&v.add_scaled(&k1, 0.5 * dt), e, cor)?;
    let k3 = hyperbolic_rhs(&v.add_scaled(&k2, 0.5 * dt), e, cor)?;
    let k4 = hyperbolic_rhs(&v.add_scaled(&k3, dt), e, cor)?;
    let out = v
        .add_scaled(&k1, dt / 6.0)
        .add_scaled(&k2, dt / 3.0)
        .add_scaled(&k3, dt / 3.0)
        .add_scaled(&k4, dt / 6.0);
    if !out.is_finite() {
        return Err(RswError::NonFinite { t: f64::NAN });
    }
    Ok(out)
}

fn heat_state(v: &State3, eps: f64, t: f64) -> Result<State3> {
    Ok(State3 {
        lambda: heat_propagate(&v.lambda, eps, t)?,
        u: heat_propagate(&v.u, eps, t)?,
        v: heat_propagate(&v.v, eps, t)?,
    })
}

pub(crate) fn step_strang_with(
    v: &State3,
    dt: f64,
    p: &Params,
    e: &State3,
    cor: &CoriolisProfile,
) -> Result<State3> {
    if p.eps == 0.0 {
        // Identity heat substeps: reduce exactly to the hyperbolic step.
        return step_hyperbolic_rk4(v, dt, e, cor);
    }
    let half = heat_state(v, p.eps, 0.5 * dt)?;
    let advected = step_hyperbolic_rk4(&half, dt, e, cor)?;
    heat_state(&advected, p.eps, 0.5 * dt)
}

/// Strang step W(dt/2) ∘ RK4(dt) ∘ W(dt/2); for ε = 0 this is bitwise the
/// RK4 step.
pub fn step_strang(v: &State3, dt: f64, p: &Params, cor: &CoriolisProfile) -> Result<State3> {
    let e = State3::rest(v.grid(), p.lambda_bar());
    step_strang_with(v, dt, p, &e, cor)
}

/// Why an integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StopReason {
    Completed,
    NonFinite { t: f64 },
    NonPositiveHeight { t: f64 },
}

impl StopReason {
    pub fn is_completed(&self) -> bool {
        matches!(self, StopReason::Completed)
    }
}

/// Sampled trajectory with per-sample diagnostics. On early stop the partial
/// trajectory up to the last accepted state is returned, tagged with the
/// reason and time.
#[derive(Debug, Clone)]
pub struct Integration {
    pub times: Vec<f64>,
    pub states: Vec<State3>,
    pub records: Vec<DiagnosticsRecord>,
    pub steps: usize,
    pub stop: StopReason,
}

pub fn integrate(
    v0: &State3,
    ctrl: &StepControl,
    p: &Params,
    cor: &CoriolisProfile,
) -> Result<Integration> {
    let lambda_bar = p.lambda_bar();
    check_admissible(v0, lambda_bar, 0.0)?;
    let e = State3::rest(v0.grid(), lambda_bar);

    let mut times = vec![0.0];
    let mut states = vec![v0.clone()];
    let mut records = vec![sample_record(0.0, v0, &e, p)?];

    let mut state = v0.clone();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut last_sampled = 0usize;
    let mut stop = StopReason::Completed;
    let horizon = ctrl.t_end;
    let t_eps = 1e-12 * horizon.max(1.0);

    while t < horizon - t_eps {
        let dt = cfl_dt(&state, ctrl.cfl, ctrl.dt_max).min(horizon - t);
        let next = match step_strang_with(&state, dt, p, &e, cor) {
            Ok(s) => s,
            Err(RswError::NonFinite { .. }) => {
                stop = StopReason::NonFinite { t: t + dt };
                break;
            }
            Err(err) => return Err(err),
        };
        t += dt;
        steps += 1;
        match check_admissible(&next, lambda_bar, t) {
            Ok(()) => {}
            Err(RswError::NonFinite { .. }) => {
                stop = StopReason::NonFinite { t };
                break;
            }
            Err(RswError::NonPositiveLambda { .. }) => {
                stop = StopReason::NonPositiveHeight { t };
                break;
            }
            Err(err) => return Err(err),
        }
        state = next;
        if steps - last_sampled >= ctrl.sample_every || t >= horizon - t_eps {
            times.push(t);
            states.push(state.clone());
            records.push(sample_record(t, &state, &e, p)?);
            last_sampled = steps;
        }
    }

    Ok(Integration {
        times,
        states,
        records,
        steps,
        stop,
    })
}

/// Integrate with CFL-controlled steps, landing exactly on each requested
/// time; used for cross-solver comparison and ε sweeps on a shared mesh.
/// Early stops are hard errors here since callers need full coverage.
pub fn solve_at_times(
    v0: &State3,
    times: &[f64],
    cfl: f64,
    dt_max: f64,
    p: &Params,
    cor: &CoriolisProfile,
) -> Result<Vec<State3>> {
    if times.is_empty() {
        return Err(RswError::InvalidParameter("no sample times given".into()));
    }
    if !(times[0] >= 0.0) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(RswError::InvalidParameter(
            "sample times must be nonnegative and strictly increasing".into(),
        ));
    }
    let lambda_bar = p.lambda_bar();
    check_admissible(v0, lambda_bar, 0.0)?;
    let e = State3::rest(v0.grid(), lambda_bar);
    let mut out = Vec::with_capacity(times.len());
    let mut state = v0.clone();
    let mut t = 0.0;
    for &target in times {
        let t_eps = 1e-12 * target.max(1.0);
        while t < target - t_eps {
            let dt = cfl_dt(&state, cfl, dt_max).min(target - t);
            state = step_strang_with(&state, dt, p, &e, cor).map_err(|err| match err {
                RswError::NonFinite { .. } => RswError::NonFinite { t: t + dt },
                other => other,
            })?;
            t += dt;
            check_admissible(&state, lambda_bar, t)?;
        }
        out.push(state.clone());
    }
    Ok(out)
}
