//! Physical and symmetrized state representations, the change of variables
//! λ = 2√(gh), the symmetric flux matrix S(V), the Coriolis term, and the
//! right-hand-side assembly for both formulations.

use crate::error::{Result, RswError};
use crate::grid::{
    dealias_coeffs, derivative, derivative_coeffs, from_spectrum, sobolev_norm_sq_coeffs,
    to_spectrum, Field, Grid,
};

/// Physical constants of a run. `eps` is the viscosity of the regularized
/// system; `eps = 0` selects the hyperbolic limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub g: f64,
    pub h_bar: f64,
    pub eps: f64,
}

impl Params {
    pub fn new(g: f64, h_bar: f64, eps: f64) -> Result<Self> {
        if !(g > 0.0) {
            return Err(RswError::InvalidParameter(format!(
                "gravity must be positive, got {g}"
            )));
        }
        if !(h_bar > 0.0) {
            return Err(RswError::InvalidParameter(format!(
                "rest height must be positive, got {h_bar}"
            )));
        }
        if !(eps >= 0.0) {
            return Err(RswError::InvalidParameter(format!(
                "viscosity must be nonnegative, got {eps}"
            )));
        }
        Ok(Self { g, h_bar, eps })
    }

    /// Rest value of the symmetrized variable: λ̄ = 2√(g h̄).
    pub fn lambda_bar(&self) -> f64 {
        2.0 * (self.g * self.h_bar).sqrt()
    }
}

/// Coriolis coefficient f(x) with its first two derivatives and cached sup
/// norms. f, f', f'' must all be bounded; on the torus that holds for any
/// smooth periodic profile.
#[derive(Debug, Clone)]
pub struct CoriolisProfile {
    f: Field,
    f_x: Field,
    f_xx: Field,
    sup_f: f64,
    sup_fx: f64,
    sup_fxx: f64,
}

impl CoriolisProfile {
    pub fn from_field(f: Field) -> Self {
        let f_x = derivative(&f, 1);
        let f_xx = derivative(&f, 2);
        let sup_f = f.sup_norm();
        let sup_fx = f_x.sup_norm();
        let sup_fxx = f_xx.sup_norm();
        Self {
            f,
            f_x,
            f_xx,
            sup_f,
            sup_fx,
            sup_fxx,
        }
    }

    pub fn constant(grid: Grid, f0: f64) -> Self {
        Self {
            f: Field::constant(grid, f0),
            f_x: Field::zeros(grid),
            f_xx: Field::zeros(grid),
            sup_f: f0.abs(),
            sup_fx: 0.0,
            sup_fxx: 0.0,
        }
    }

    /// Smooth periodic stand-in for a β-plane: f0 + f1·sin(2πx/L).
    pub fn sinusoidal(grid: Grid, f0: f64, f1: f64) -> Self {
        let length = grid.length();
        let k = 2.0 * std::f64::consts::PI / length;
        Self::from_field(Field::from_fn(grid, |x| f0 + f1 * (k * x).sin()))
    }

    pub fn f(&self) -> &Field {
        &self.f
    }

    pub fn f_x(&self) -> &Field {
        &self.f_x
    }

    pub fn f_xx(&self) -> &Field {
        &self.f_xx
    }

    pub fn sup_f(&self) -> f64 {
        self.sup_f
    }

    pub fn sup_fx(&self) -> f64 {
        self.sup_fx
    }

    pub fn sup_fxx(&self) -> f64 {
        self.sup_fxx
    }
}

/// Symmetrized unknown V = (λ, u, v). Deviations V−E and state differences
/// reuse the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct State3 {
    pub lambda: Field,
    pub u: Field,
    pub v: Field,
}

impl State3 {
    pub fn new(lambda: Field, u: Field, v: Field) -> Result<Self> {
        if lambda.grid() != u.grid() || lambda.grid() != v.grid() {
            return Err(RswError::GridMismatch(
                "state components live on different grids".into(),
            ));
        }
        Ok(Self { lambda, u, v })
    }

    /// Rest state E = (λ̄, 0, 0).
    pub fn rest(grid: Grid, lambda_bar: f64) -> Self {
        Self {
            lambda: Field::constant(grid, lambda_bar),
            u: Field::zeros(grid),
            v: Field::zeros(grid),
        }
    }

    pub fn grid(&self) -> Grid {
        self.lambda.grid()
    }

    pub fn components(&self) -> [&Field; 3] {
        [&self.lambda, &self.u, &self.v]
    }

    pub fn sub(&self, other: &State3) -> State3 {
        State3 {
            lambda: self.lambda.sub(&other.lambda),
            u: self.u.sub(&other.u),
            v: self.v.sub(&other.v),
        }
    }

    pub fn add(&self, other: &State3) -> State3 {
        State3 {
            lambda: self.lambda.add(&other.lambda),
            u: self.u.add(&other.u),
            v: self.v.add(&other.v),
        }
    }

    pub fn scale(&self, c: f64) -> State3 {
        State3 {
            lambda: self.lambda.scale(c),
            u: self.u.scale(c),
            v: self.v.scale(c),
        }
    }

    pub fn add_scaled(&self, other: &State3, c: f64) -> State3 {
        State3 {
            lambda: self.lambda.add_scaled(&other.lambda, c),
            u: self.u.add_scaled(&other.u, c),
            v: self.v.add_scaled(&other.v, c),
        }
    }

    pub fn derivative(&self, m: u32) -> State3 {
        State3 {
            lambda: derivative(&self.lambda, m),
            u: derivative(&self.u, m),
            v: derivative(&self.v, m),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.lambda.is_finite() && self.u.is_finite() && self.v.is_finite()
    }

    /// L² norm of the 3-vector field: sqrt(Σ_c ‖·_c‖²).
    pub fn l2_norm(&self) -> f64 {
        self.components()
            .iter()
            .map(|f| f.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Sup over x of the pointwise Euclidean norm |(λ, u, v)(x)|.
    pub fn sup_vec_norm(&self) -> f64 {
        let mut sup: f64 = 0.0;
        for j in 0..self.grid().n() {
            let a = self.lambda.values()[j];
            let b = self.u.values()[j];
            let c = self.v.values()[j];
            sup = sup.max((a * a + b * b + c * c).sqrt());
        }
        sup
    }

    pub fn inner(&self, other: &State3) -> f64 {
        self.lambda.inner(&other.lambda) + self.u.inner(&other.u) + self.v.inner(&other.v)
    }
}

/// Physical unknown (h, u, v).
#[derive(Debug, Clone, PartialEq)]
pub struct PhysState {
    pub h: Field,
    pub u: Field,
    pub v: Field,
}

impl PhysState {
    pub fn new(h: Field, u: Field, v: Field) -> Result<Self> {
        if h.grid() != u.grid() || h.grid() != v.grid() {
            return Err(RswError::GridMismatch(
                "state components live on different grids".into(),
            ));
        }
        Ok(Self { h, u, v })
    }

    pub fn rest(grid: Grid, h_bar: f64) -> Self {
        Self {
            h: Field::constant(grid, h_bar),
            u: Field::zeros(grid),
            v: Field::zeros(grid),
        }
    }

    pub fn grid(&self) -> Grid {
        self.h.grid()
    }
}

/// Change of variables (h, u, v) → (2√(gh), u, v). Fails if h is not
/// strictly positive.
pub fn symmetrize(p: &PhysState, g: f64) -> Result<State3> {
    let min_h = p.h.min();
    if !(min_h > 0.0) {
        return Err(RswError::NonPositiveHeight { min: min_h });
    }
    Ok(State3 {
        lambda: p.h.map(|h| 2.0 * (g * h).sqrt()),
        u: p.u.clone(),
        v: p.v.clone(),
    })
}

/// Inverse change of variables: h = λ²/(4g).
pub fn desymmetrize(v: &State3, g: f64) -> Result<PhysState> {
    let min_l = v.lambda.min();
    if !(min_l > 0.0) {
        return Err(RswError::NonPositiveLambda { min: min_l });
    }
    Ok(PhysState {
        h: v.lambda.map(|l| l * l / (4.0 * g)),
        u: v.u.clone(),
        v: v.v.clone(),
    })
}

/// Relative λ floor below which a state is rejected as having lost positivity.
pub const LAMBDA_FLOOR: f64 = 1e-8;

/// Admissibility guard used by the integrators: finite samples and
/// min λ > 1e-8·λ̄.
pub fn check_admissible(v: &State3, lambda_bar: f64, t: f64) -> Result<()> {
    if !v.is_finite() {
        return Err(RswError::NonFinite { t });
    }
    let min_l = v.lambda.min();
    if min_l <= LAMBDA_FLOOR * lambda_bar {
        return Err(RswError::NonPositiveLambda { min: min_l });
    }
    Ok(())
}

fn truncated(f: &Field) -> (Field, crate::grid::Spectrum) {
    let mut s = to_spectrum(f);
    dealias_coeffs(s.grid(), s.coeffs_mut());
    (from_spectrum(&s), s)
}

fn truncate_field(f: &Field) -> Field {
    truncated(f).0
}

/// S(V)W for the symmetric flux matrix
/// S = [[u, λ/2, 0], [λ/2, u, 0], [0, 0, u]], with all quadratic products
/// dealiased by the 2/3 rule.
pub fn apply_s(v: &State3, w: &State3) -> Result<State3> {
    if v.grid() != w.grid() {
        return Err(RswError::GridMismatch("apply_s operands differ".into()));
    }
    let ut = truncate_field(&v.u);
    let lt = truncate_field(&v.lambda);
    let half_lt = lt.scale(0.5);
    let w1 = truncate_field(&w.lambda);
    let w2 = truncate_field(&w.u);
    let w3 = truncate_field(&w.v);
    let r1 = ut.mul(&w1).add(&half_lt.mul(&w2));
    let r2 = half_lt.mul(&w1).add(&ut.mul(&w2));
    let r3 = ut.mul(&w3);
    Ok(State3 {
        lambda: truncate_field(&r1),
        u: truncate_field(&r2),
        v: truncate_field(&r3),
    })
}

/// Characteristic speeds (u, u + λ/2, u − λ/2): the eigenvalues of S(V).
pub fn char_speeds(v: &State3) -> (Field, Field, Field) {
    let plus = v.u.zip_with(&v.lambda, |u, l| u + 0.5 * l);
    let minus = v.u.zip_with(&v.lambda, |u, l| u - 0.5 * l);
    (v.u.clone(), plus, minus)
}

pub fn max_char_speed(v: &State3) -> f64 {
    let (a, b, c) = char_speeds(v);
    a.sup_norm().max(b.sup_norm()).max(c.sup_norm())
}

/// Pointwise operator norm of S_x:
/// max(|u_x|, |u_x + λ_x/2|, |u_x − λ_x/2|).
pub fn s_x_opnorm(v: &State3) -> Field {
    let ux = derivative(&v.u, 1);
    let lx = derivative(&v.lambda, 1);
    ux.zip_with(&lx, |a, b| {
        a.abs().max((a + 0.5 * b).abs()).max((a - 0.5 * b).abs())
    })
}

/// Coriolis term F × (V − E) with F = (f, 0, 0): pointwise (0, −f·v, f·u).
pub fn coriolis_term(v: &State3, e: &State3, cor: &CoriolisProfile) -> Result<State3> {
    if v.grid() != e.grid() || v.grid() != cor.f().grid() {
        return Err(RswError::GridMismatch(
            "coriolis operands on different grids".into(),
        ));
    }
    let dev_u = v.u.sub(&e.u);
    let dev_v = v.v.sub(&e.v);
    Ok(State3 {
        lambda: Field::zeros(v.grid()),
        u: cor.f().mul(&dev_v).scale(-1.0),
        v: cor.f().mul(&dev_u),
    })
}

/// Advective term S(V)(V−E)_x = S(V)V_x with dealiased products, sharing one
/// truncation of the state between the matrix entries and the derivatives.
pub fn advective_term(v: &State3) -> State3 {
    let grid = v.grid();
    let (lt, mut ls) = truncated(&v.lambda);
    let (ut, mut us) = truncated(&v.u);
    let (_, mut vs) = truncated(&v.v);
    derivative_coeffs(grid, 1, ls.coeffs_mut());
    derivative_coeffs(grid, 1, us.coeffs_mut());
    derivative_coeffs(grid, 1, vs.coeffs_mut());
    let lx = from_spectrum(&ls);
    let ux = from_spectrum(&us);
    let vx = from_spectrum(&vs);
    let half_lt = lt.scale(0.5);
    let r1 = ut.mul(&lx).add(&half_lt.mul(&ux));
    let r2 = half_lt.mul(&lx).add(&ut.mul(&ux));
    let r3 = ut.mul(&vx);
    State3 {
        lambda: truncate_field(&r1),
        u: truncate_field(&r2),
        v: truncate_field(&r3),
    }
}

/// Tendency of the symmetrized hyperbolic system:
/// −S(V)(V−E)_x − F×(V−E). Since E is constant, (V−E)_x = V_x.
pub fn hyperbolic_rhs(v: &State3, e: &State3, cor: &CoriolisProfile) -> Result<State3> {
    let adv = advective_term(v);
    let cori = coriolis_term(v, e, cor)?;
    Ok(adv.add(&cori).scale(-1.0))
}

/// The paper's solution norm N = sqrt(‖V−E‖²_{L²} + ‖V_xx‖²_{L²}); an
/// equivalent H² norm on the torus.
pub fn n_norm(v: &State3, e: &State3) -> Result<f64> {
    if v.grid() != e.grid() {
        return Err(RswError::GridMismatch("n_norm operands differ".into()));
    }
    Ok(deviation_norms(&v.sub(e)).n)
}

/// Norms of a deviation (or difference) state computed in one spectral pass.
#[derive(Debug, Clone, Copy)]
pub struct DeviationNorms {
    /// ‖D‖_{L²}
    pub l2: f64,
    /// ‖D‖_{H¹}
    pub h1: f64,
    /// full ‖D‖_{H²}
    pub h2: f64,
    /// sqrt(‖D‖²_{L²} + ‖D_xx‖²_{L²})
    pub n: f64,
    /// ‖D_x‖_{L²}
    pub dx_l2: f64,
    /// ‖D_xx‖_{L²}
    pub dxx_l2: f64,
}

pub fn deviation_norms(d: &State3) -> DeviationNorms {
    let grid = d.grid();
    let mut l2 = 0.0;
    let mut dx = 0.0;
    let mut dxx = 0.0;
    for f in d.components() {
        let s = to_spectrum(f);
        l2 += sobolev_norm_sq_coeffs(grid, 0, s.coeffs());
        for (idx, c) in s.coeffs().iter().enumerate() {
            let k2 = grid.wavenumber(idx).powi(2);
            let e = c.norm_sqr();
            dx += k2 * e * grid.length();
            dxx += k2 * k2 * e * grid.length();
        }
    }
    DeviationNorms {
        l2: l2.sqrt(),
        h1: (l2 + dx).sqrt(),
        h2: (l2 + dx + dxx).sqrt(),
        n: (l2 + dxx).sqrt(),
        dx_l2: dx.sqrt(),
        dxx_l2: dxx.sqrt(),
    }
}

/// Residual of the conservative form along a uniformly sampled trajectory:
/// centered-difference ∂_t(h, hu, hv) plus spectral flux divergence minus the
/// Coriolis source, reported as L² norms per interior time node.
pub fn conservative_residual(
    traj: &[PhysState],
    dt: f64,
    cor: &CoriolisProfile,
    g: f64,
) -> Result<Vec<[f64; 3]>> {
    if traj.len() < 3 {
        return Err(RswError::TooFewSamples {
            need: 3,
            got: traj.len(),
        });
    }
    if !(dt > 0.0) {
        return Err(RswError::InvalidParameter(format!(
            "time spacing must be positive, got {dt}"
        )));
    }
    let conserved = |p: &PhysState| -> [Field; 3] {
        [p.h.clone(), p.h.mul(&p.u), p.h.mul(&p.v)]
    };
    let mut out = Vec::with_capacity(traj.len() - 2);
    for i in 1..traj.len() - 1 {
        let prev = conserved(&traj[i - 1]);
        let next = conserved(&traj[i + 1]);
        let p = &traj[i];
        let hu = p.h.mul(&p.u);
        let flux = [
            hu.clone(),
            p.h.mul(&p.u).mul(&p.u).zip_with(&p.h, |q, h| q + 0.5 * g * h * h),
            hu.mul(&p.v),
        ];
        let source = [
            Field::zeros(p.grid()),
            cor.f().mul(&p.h).mul(&p.v),
            cor.f().mul(&p.h).mul(&p.u).scale(-1.0),
        ];
        let mut norms = [0.0; 3];
        for c in 0..3 {
            let ddt = next[c].sub(&prev[c]).scale(1.0 / (2.0 * dt));
            let div = derivative(&flux[c], 1);
            let r = ddt.add(&div).sub(&source[c]);
            norms[c] = r.l2_norm();
        }
        out.push(norms);
    }
    Ok(out)
}
