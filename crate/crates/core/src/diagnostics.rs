//! Trajectory diagnostics: norms, the entropy–flux pair and its dissipation,
//! stopping times, the small-data energy inequality, the V_x growth bound,
//! positivity of h, and the h ↔ √h regularity equivalence.

use crate::error::{Result, RswError};
use crate::grid::{derivative, sobolev_norm, Field};
use crate::model::{deviation_norms, desymmetrize, Params, PhysState, State3};
use serde::{Deserialize, Serialize};

/// Per-sample diagnostics of a trajectory. Serializes to the records.csv
/// schema in this column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_dist: f64,
    pub h1_dist: f64,
    pub n_norm: f64,
    pub sup_vx: f64,
    pub entropy: f64,
    pub dissipation: f64,
    pub min_h: f64,
    pub mass: f64,
    pub log_h_h1: f64,
    pub hessian_min_eig: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str =
        "t,l2_dist,h1_dist,n_norm,sup_vx,entropy,dissipation,min_h,mass,log_h_h1,hessian_min_eig";

    /// One CSV row at 17 significant digits, matching [`Self::CSV_HEADER`].
    pub fn csv_row(&self) -> String {
        let cols = [
            self.t,
            self.l2_dist,
            self.h1_dist,
            self.n_norm,
            self.sup_vx,
            self.entropy,
            self.dissipation,
            self.min_h,
            self.mass,
            self.log_h_h1,
            self.hessian_min_eig,
        ];
        cols.iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    pub fn from_csv_row(row: &str) -> Option<Self> {
        let mut it = row.split(',').map(|s| s.trim().parse::<f64>());
        let mut next = || it.next()?.ok();
        Some(Self {
            t: next()?,
            l2_dist: next()?,
            h1_dist: next()?,
            n_norm: next()?,
            sup_vx: next()?,
            entropy: next()?,
            dissipation: next()?,
            min_h: next()?,
            mass: next()?,
            log_h_h1: next()?,
            hessian_min_eig: next()?,
        })
    }

    /// Full H² distance reconstructed from the stored norms:
    /// ‖V−E‖²_{H²} = h1² + n² − l2².
    pub fn h2_dist(&self) -> f64 {
        (self.h1_dist.powi(2) + self.n_norm.powi(2) - self.l2_dist.powi(2))
            .max(0.0)
            .sqrt()
    }

    /// ‖V_x‖_{L²} reconstructed as sqrt(h1² − l2²).
    pub fn vx_l2(&self) -> f64 {
        (self.h1_dist.powi(2) - self.l2_dist.powi(2)).max(0.0).sqrt()
    }

    pub fn all_finite(&self) -> bool {
        [
            self.t,
            self.l2_dist,
            self.h1_dist,
            self.n_norm,
            self.sup_vx,
            self.entropy,
            self.dissipation,
            self.min_h,
            self.mass,
            self.log_h_h1,
            self.hessian_min_eig,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

/// Entropy density η(V) = (λ²/8)(u²+v²) + ½((λ²−λ̄²)/4)², nonnegative with
/// equality only at the rest state.
pub fn entropy_density(v: &State3, lambda_bar: f64) -> Field {
    let lb2 = lambda_bar * lambda_bar;
    let n = v.grid().n();
    let mut vals = Vec::with_capacity(n);
    for j in 0..n {
        let l = v.lambda.values()[j];
        let u = v.u.values()[j];
        let w = v.v.values()[j];
        let quarter = (l * l - lb2) / 4.0;
        vals.push(l * l / 8.0 * (u * u + w * w) + 0.5 * quarter * quarter);
    }
    Field::from_values(v.grid(), vals).expect("matching grid")
}

/// Entropy flux G(V) = (λ²u/8)(u²+v²) + (λ²u/4)·(λ²−λ̄²)/4.
pub fn entropy_flux(v: &State3, lambda_bar: f64) -> Field {
    let lb2 = lambda_bar * lambda_bar;
    let n = v.grid().n();
    let mut vals = Vec::with_capacity(n);
    for j in 0..n {
        let l = v.lambda.values()[j];
        let u = v.u.values()[j];
        let w = v.v.values()[j];
        let l2u = l * l * u;
        vals.push(l2u / 8.0 * (u * u + w * w) + l2u / 4.0 * (l * l - lb2) / 4.0);
    }
    Field::from_values(v.grid(), vals).expect("matching grid")
}

/// Hessian of the entropy density at one point.
pub fn entropy_hessian(lambda: f64, u: f64, v: f64, lambda_bar: f64) -> [[f64; 3]; 3] {
    let l2 = lambda * lambda;
    let lb2 = lambda_bar * lambda_bar;
    let a = (u * u + v * v) / 4.0 + 3.0 * l2 / 8.0 - lb2 / 8.0;
    let b = lambda * u / 2.0;
    let c = lambda * v / 2.0;
    let d = l2 / 4.0;
    [[a, b, c], [b, d, 0.0], [c, 0.0, d]]
}

/// Smallest eigenvalue of the entropy Hessian at one point, in closed form.
///
/// The Hessian has the arrow structure [[a,b,c],[b,d,0],[c,0,d]]: one
/// eigenvalue is d, the other two are (a+d)/2 ± sqrt(((a−d)/2)² + b² + c²).
pub fn entropy_hessian_min_eig(lambda: f64, u: f64, v: f64, lambda_bar: f64) -> f64 {
    let m = entropy_hessian(lambda, u, v, lambda_bar);
    let (a, b, c, d) = (m[0][0], m[0][1], m[0][2], m[1][1]);
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b + c * c).sqrt();
    d.min(mid - rad)
}

/// Minimum over the grid of the smallest Hessian eigenvalue; compared against
/// λ̄²/8 in the small-data regime.
pub fn hessian_coercivity(v: &State3, lambda_bar: f64) -> f64 {
    let mut min_eig = f64::INFINITY;
    for j in 0..v.grid().n() {
        let e = entropy_hessian_min_eig(
            v.lambda.values()[j],
            v.u.values()[j],
            v.v.values()[j],
            lambda_bar,
        );
        min_eig = min_eig.min(e);
    }
    min_eig
}

/// Pointwise quadratic form V_x·η″(V)V_x integrated over the domain,
/// multiplied by ε: the entropy dissipation rate.
pub fn entropy_dissipation(v: &State3, lambda_bar: f64, eps: f64) -> f64 {
    let vx = v.derivative(1);
    let mut total = 0.0;
    for j in 0..v.grid().n() {
        let m = entropy_hessian(
            v.lambda.values()[j],
            v.u.values()[j],
            v.v.values()[j],
            lambda_bar,
        );
        let g = [vx.lambda.values()[j], vx.u.values()[j], vx.v.values()[j]];
        let mut q = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                q += g[r] * m[r][c] * g[c];
            }
        }
        total += q;
    }
    eps * total * v.grid().dx()
}

/// Full diagnostics sample of a state. Fails if λ has lost positivity so the
/// physical variables are undefined.
pub fn sample_record(t: f64, v: &State3, e: &State3, p: &Params) -> Result<DiagnosticsRecord> {
    let lambda_bar = p.lambda_bar();
    let dev = v.sub(e);
    let norms = deviation_norms(&dev);
    let sup_vx = v.derivative(1).sup_vec_norm();
    let entropy = entropy_density(v, lambda_bar).integral();
    let dissipation = entropy_dissipation(v, lambda_bar, p.eps);
    let phys = desymmetrize(v, p.g)?;
    let min_h = phys.h.min();
    let mass = phys.h.integral() - p.h_bar * v.grid().length();
    let log_h = phys.h.map(|h| (h / p.h_bar).ln());
    let log_h_h1 = sobolev_norm(&log_h, 1);
    let hessian_min_eig = hessian_coercivity(v, lambda_bar);
    Ok(DiagnosticsRecord {
        t,
        l2_dist: norms.l2,
        h1_dist: norms.h1,
        n_norm: norms.n,
        sup_vx,
        entropy,
        dissipation,
        min_h,
        mass,
        log_h_h1,
        hessian_min_eig,
    })
}

/// Residual of the integrated entropy balance
/// d/dt ∫η + ε∫V_x·η″(V)V_x = 0 (the flux term integrates to zero on the
/// torus), evaluated with second-order time differences on the sample mesh.
#[derive(Debug, Clone, Serialize)]
pub struct EntropyBalance {
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub max_dissipation: f64,
    /// max |residual| / max |dissipation|; infinite for inviscid runs.
    pub normalized: f64,
    /// max |∫η(t) − ∫η(0)| / |∫η(0)|; the conservation figure for ε = 0.
    pub entropy_drift: f64,
}

pub fn entropy_balance(records: &[DiagnosticsRecord]) -> Result<EntropyBalance> {
    if records.len() < 3 {
        return Err(RswError::TooFewSamples {
            need: 3,
            got: records.len(),
        });
    }
    let dt = records[1].t - records[0].t;
    for w in records.windows(2) {
        let step = w[1].t - w[0].t;
        if !(step > 0.0) || (step - dt).abs() > 1e-8 * dt.max(1e-300) {
            return Err(RswError::InvalidParameter(
                "entropy balance requires uniformly spaced samples".into(),
            ));
        }
    }
    let m = records.len();
    let eta: Vec<f64> = records.iter().map(|r| r.entropy).collect();
    let mut residuals = Vec::with_capacity(m);
    for i in 0..m {
        let d_eta = if i == 0 {
            (-3.0 * eta[0] + 4.0 * eta[1] - eta[2]) / (2.0 * dt)
        } else if i == m - 1 {
            (3.0 * eta[m - 1] - 4.0 * eta[m - 2] + eta[m - 3]) / (2.0 * dt)
        } else {
            (eta[i + 1] - eta[i - 1]) / (2.0 * dt)
        };
        residuals.push(d_eta + records[i].dissipation);
    }
    let max_residual = residuals.iter().fold(0.0_f64, |a, r| a.max(r.abs()));
    let max_dissipation = records
        .iter()
        .fold(0.0_f64, |a, r| a.max(r.dissipation.abs()));
    let normalized = if max_dissipation > 0.0 {
        max_residual / max_dissipation
    } else {
        f64::INFINITY
    };
    let base = eta[0].abs().max(1e-300);
    let entropy_drift = eta
        .iter()
        .fold(0.0_f64, |a, &e| a.max((e - eta[0]).abs() / base));
    Ok(EntropyBalance {
        residuals,
        max_residual,
        max_dissipation,
        normalized,
        entropy_drift,
    })
}

/// First crossing times of the a-priori thresholds: τ tracks the full H²
/// doubling threshold 2·M₀, T_δ the max(‖V−E‖_{L²}, ‖V_x‖_{L²}) > √δ
/// threshold of the small-data argument.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StoppingTimes {
    pub tau: Option<f64>,
    pub t_delta: Option<f64>,
}

pub fn stopping_times(records: &[DiagnosticsRecord], m0: f64, delta: f64) -> StoppingTimes {
    let mut tau = None;
    let mut t_delta = None;
    let sqrt_delta = delta.sqrt();
    for r in records {
        if tau.is_none() && r.h2_dist() > 2.0 * m0 {
            tau = Some(r.t);
        }
        if t_delta.is_none() && r.l2_dist.max(r.vx_l2()) > sqrt_delta {
            t_delta = Some(r.t);
        }
        if tau.is_some() && t_delta.is_some() {
            break;
        }
    }
    StoppingTimes { tau, t_delta }
}

/// The small-data energy inequality
/// ‖V(t)−E‖²_{L²} + 4ε∫₀ᵗ‖V_x‖²_{L²} ds ≤ 9δ², time integral by trapezoid.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyInequality {
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub pass: bool,
}

pub fn energy_inequality_check(
    records: &[DiagnosticsRecord],
    p: &Params,
    delta: f64,
) -> EnergyInequality {
    let bound = 9.0 * delta * delta;
    let mut margins = Vec::with_capacity(records.len());
    let mut cum = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for r in records {
        let vx2 = r.vx_l2().powi(2);
        if let Some((tp, vp)) = prev {
            cum += 0.5 * (r.t - tp) * (vp + vx2);
        }
        prev = Some((r.t, vx2));
        let lhs = r.l2_dist.powi(2) + 4.0 * p.eps * cum;
        margins.push(bound - lhs);
    }
    // The inequality is asserted up to T_δ; evaluate everywhere but only
    // require it before the threshold crossing.
    let t_delta = stopping_times(records, f64::INFINITY, delta).t_delta;
    let pass = records
        .iter()
        .zip(&margins)
        .filter(|(r, _)| t_delta.map_or(true, |td| r.t < td))
        .all(|(_, m)| *m >= 0.0);
    let min_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    EnergyInequality {
        margins,
        min_margin,
        pass,
    }
}

/// Discrete form of the V_x growth bound
/// d/dt‖V_x‖² ≤ 3/(2(4ε)^{1/3})·‖V_x‖^{10/3} + 6δ‖f'‖_∞‖V_x‖:
/// each sampled increment of ‖V_x‖² must stay below the trapezoidal integral
/// of the right-hand side, with 5% slack for sampling error.
#[derive(Debug, Clone, Serialize)]
pub struct VxGrowth {
    pub pass: bool,
    pub worst_excess: f64,
    pub violations: usize,
}

pub fn vx_growth_bound(
    records: &[DiagnosticsRecord],
    p: &Params,
    delta: f64,
    sup_fx: f64,
) -> Result<VxGrowth> {
    if !(p.eps > 0.0) {
        return Err(RswError::InvalidParameter(
            "the V_x growth bound requires eps > 0".into(),
        ));
    }
    let coeff = 3.0 / (2.0 * (4.0 * p.eps).cbrt());
    let rhs_rate = |vx: f64| coeff * vx.powf(10.0 / 3.0) + 6.0 * delta * sup_fx * vx;
    let mut worst_excess: f64 = 0.0;
    let mut violations = 0;
    for w in records.windows(2) {
        let dt = w[1].t - w[0].t;
        let lhs = w[1].vx_l2().powi(2) - w[0].vx_l2().powi(2);
        let rhs = 0.5 * dt * (rhs_rate(w[0].vx_l2()) + rhs_rate(w[1].vx_l2()));
        let allowance = 1.05 * rhs + 1e-12;
        if lhs > allowance {
            violations += 1;
            worst_excess = worst_excess.max(lhs - allowance);
        }
    }
    Ok(VxGrowth {
        pass: violations == 0,
        worst_excess,
        violations,
    })
}

/// The interpolation inequality ‖V_x‖²_{L²} ≤ ‖V_xx‖_{L²}·‖V−E‖_{L²}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InterpolationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

pub fn interpolation_check(v: &State3, e: &State3) -> Result<InterpolationCheck> {
    if v.grid() != e.grid() {
        return Err(RswError::GridMismatch(
            "interpolation operands differ".into(),
        ));
    }
    let n = deviation_norms(&v.sub(e));
    let lhs = n.dx_l2.powi(2);
    let rhs = n.dxx_l2 * n.l2;
    Ok(InterpolationCheck {
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + 1e-12) + 1e-300,
    })
}

/// Positivity and ln h tracking: min h, ‖ln(h/h̄)‖_{H¹}, and the Gronwall
/// envelope from integrating
/// d/dt‖ln h‖_{H¹} ≤ ‖u_x‖_∞‖ln h‖_{H¹} + 2‖u_x‖_{H¹}
/// with the recorded coefficients (explicit Euler on the sample mesh).
#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub min_h: Vec<f64>,
    pub log_h_h1: Vec<f64>,
    pub envelope: Vec<f64>,
    pub pass: bool,
    pub worst_excess: f64,
}

pub fn positivity_monitor(
    times: &[f64],
    traj: &[PhysState],
    h_bar: f64,
    alpha_floor: f64,
) -> Result<PositivityReport> {
    if times.len() != traj.len() || times.is_empty() {
        return Err(RswError::InvalidParameter(
            "positivity monitor needs matching, nonempty times and states".into(),
        ));
    }
    let mut min_h = Vec::with_capacity(traj.len());
    let mut log_norm = Vec::with_capacity(traj.len());
    let mut coeff_a = Vec::with_capacity(traj.len());
    let mut coeff_b = Vec::with_capacity(traj.len());
    for p in traj {
        let m = p.h.min();
        if m <= alpha_floor {
            return Err(RswError::NonPositiveHeight { min: m });
        }
        min_h.push(m);
        let log_h = p.h.map(|h| (h / h_bar).ln());
        log_norm.push(sobolev_norm(&log_h, 1));
        let ux = derivative(&p.u, 1);
        coeff_a.push(ux.sup_norm());
        coeff_b.push(2.0 * sobolev_norm(&ux, 1));
    }
    let mut envelope = Vec::with_capacity(traj.len());
    envelope.push(log_norm[0]);
    for i in 1..traj.len() {
        let dt = times[i] - times[i - 1];
        let prev = envelope[i - 1];
        envelope.push(prev + dt * (coeff_a[i - 1] * prev + coeff_b[i - 1]));
    }
    let mut pass = true;
    let mut worst_excess: f64 = 0.0;
    for i in 0..traj.len() {
        let allowance = 1.05 * envelope[i] + 1e-12;
        if log_norm[i] > allowance {
            pass = false;
            worst_excess = worst_excess.max(log_norm[i] - allowance);
        }
    }
    Ok(PositivityReport {
        min_h,
        log_h_h1: log_norm,
        envelope,
        pass,
        worst_excess,
    })
}

/// Norm-ratio form of the h ↔ √h regularity equivalence. For m = 0 the two
/// pointwise bounds from the equivalence proof are checked sample by sample:
/// |√h−√h̄| ≤ |h−h̄|/√h̄ and |h−h̄| ≤ |√h−√h̄|(√h̄+‖√h‖_∞).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegularityReport {
    pub ratio_fwd: f64,
    pub ratio_bwd: f64,
    pub pointwise_fwd_ok: bool,
    pub pointwise_bwd_ok: bool,
}

pub fn regularity_equivalence(h: &Field, h_bar: f64, m: u32) -> Result<RegularityReport> {
    let min_h = h.min();
    if !(min_h > 0.0) {
        return Err(RswError::NonPositiveHeight { min: min_h });
    }
    if !(h_bar > 0.0) {
        return Err(RswError::InvalidParameter(format!(
            "rest height must be positive, got {h_bar}"
        )));
    }
    let sqrt_hbar = h_bar.sqrt();
    let dev_h = h.shift(-h_bar);
    let dev_s = h.map(|x| x.sqrt() - sqrt_hbar);
    let nh = sobolev_norm(&dev_h, m);
    let ns = sobolev_norm(&dev_s, m);
    let (ratio_fwd, ratio_bwd) = if nh < 1e-300 && ns < 1e-300 {
        (1.0, 1.0) // zero-perturbation convention
    } else {
        (ns / nh, nh / ns)
    };
    let mut fwd_ok = true;
    let mut bwd_ok = true;
    if m == 0 {
        let sup_sqrt_h = h.map(f64::sqrt).sup_norm();
        for j in 0..h.grid().n() {
            let dh = dev_h.values()[j].abs();
            let ds = dev_s.values()[j].abs();
            if ds > dh / sqrt_hbar * (1.0 + 1e-13) + 1e-300 {
                fwd_ok = false;
            }
            if dh > ds * (sqrt_hbar + sup_sqrt_h) * (1.0 + 1e-13) + 1e-300 {
                bwd_ok = false;
            }
        }
    }
    Ok(RegularityReport {
        ratio_fwd,
        ratio_bwd,
        pointwise_fwd_ok: fwd_ok,
        pointwise_bwd_ok: bwd_ok,
    })
}
