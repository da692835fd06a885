//! The group of generalized diffeomorphisms of the torus: flows of
//! time-dependent infinitesimal elements `(X_t, b_t, a_t)` with `b_t, a_t`
//! closed, the semidirect composition law, and the action on spinor fields.
//!
//! Diffeomorphisms are represented only as (compositions of) flows of stored
//! generators, integrated per grid point by the classical 4th-order scheme
//! together with the variational equation for the Jacobian. A generator is
//! anything that can report rates `(X, DX, b, a)` at a stage time and point:
//! exact trig-polynomial stages are the common case, the deformation flows
//! provide rates from pointwise linear solves. The form parts `(B, A)` live
//! as grid samples with a trigonometric-interpolation evaluator for off-node
//! use.

use std::sync::Arc;

use crate::algebra::{wedge11, BaTransform, MixedForm};
use crate::error::Error;
use crate::fields::{d_one_form, d_two_form, grad, GenVectorField};
use crate::grid::{CompiledForm, CompiledScalar, SpectralForm, TorusGrid};
use crate::linalg::{det3, mat3_mul, mat3_tvec, pullback2, Mat3, MAT3_ID};
use crate::trig::TrigScalar;

/// Rates of a generator at one stage time and point.
#[derive(Clone, Copy, Debug, Default)]
pub struct RateEval {
    pub x: [f64; 3],
    /// dx[i][j] = d_j X_i
    pub dx: [[f64; 3]; 3],
    /// 2-form rate, components (c12, c13, c23)
    pub b: [f64; 3],
    /// 1-form rate
    pub a: [f64; 3],
}

/// A time-dependent generator sampled at stage times. One stage means an
/// autonomous generator; `2N + 1` stages are uniform samples at `k / 2N` of
/// the flow interval, exactly the nodes `N` classical 4th-order steps read.
pub trait StageRates: Send + Sync {
    fn n_stages(&self) -> usize;
    fn eval(&self, idx: usize, q: &[f64; 3]) -> RateEval;
}

/// One time slice of an infinitesimal generalized diffeomorphism.
#[derive(Clone, Debug)]
pub struct InfStage {
    pub x: [TrigScalar; 3],
    /// closed 2-form rate, components `(c12, c13, c23)`
    pub b: [TrigScalar; 3],
    /// closed 1-form rate
    pub a: [TrigScalar; 3],
}

impl InfStage {
    pub fn zero() -> Self {
        InfStage {
            x: std::array::from_fn(|_| TrigScalar::zero()),
            b: std::array::from_fn(|_| TrigScalar::zero()),
            a: std::array::from_fn(|_| TrigScalar::zero()),
        }
    }

    fn check_closed(&self) -> Result<(), Error> {
        if !d_two_form(&self.b).is_zero() {
            return Err(Error::NotClosed { monomial: "d123" });
        }
        let da = d_one_form(&self.a);
        for (i, comp) in da.iter().enumerate() {
            if !comp.is_zero() {
                return Err(Error::NotClosed {
                    monomial: crate::algebra::MONOMIAL_NAMES[4 + i],
                });
            }
        }
        Ok(())
    }
}

/// A time-dependent infinitesimal element with exact trig-polynomial stages.
#[derive(Clone, Debug)]
pub struct InfGDiff {
    stages: Vec<InfStage>,
}

impl InfGDiff {
    pub fn autonomous(x: [TrigScalar; 3], b: [TrigScalar; 3], a: [TrigScalar; 3]) -> Result<Self, Error> {
        let stage = InfStage { x, b, a };
        stage.check_closed()?;
        Ok(InfGDiff { stages: vec![stage] })
    }

    /// Autonomous generator of a generalized vector field: rates
    /// `(X, d xi, d lambda)`, closed by construction.
    pub fn from_genvec(u: &GenVectorField) -> Self {
        InfGDiff {
            stages: vec![InfStage { x: u.x.clone(), b: d_one_form(&u.xi), a: grad(&u.lam) }],
        }
    }

    pub fn sampled(stages: Vec<InfStage>) -> Result<Self, Error> {
        assert!(stages.len() % 2 == 1, "stage count must be odd (steps plus half steps)");
        for stage in &stages {
            stage.check_closed()?;
        }
        Ok(InfGDiff { stages })
    }

    pub fn is_autonomous(&self) -> bool {
        self.stages.len() == 1
    }

    pub fn stages(&self) -> &[InfStage] {
        &self.stages
    }

    fn has_zero_flow_part(&self) -> bool {
        self.stages.iter().all(|s| s.x.iter().all(TrigScalar::is_zero))
    }
}

/// Integrator settings: the sample grid, step count for autonomous flows,
/// and the interpolation band for the `(B, A)` output (needs
/// `grid.m >= 2 band + 1`).
#[derive(Clone, Copy, Debug)]
pub struct FlowSettings {
    pub grid: TorusGrid,
    pub steps: usize,
    pub band: u32,
}

impl FlowSettings {
    pub fn new(m: usize, steps: usize) -> Self {
        let band = ((m - 1) / 2) as u32;
        FlowSettings { grid: TorusGrid::new(m), steps, band }
    }
}

struct CompiledStage {
    x: [CompiledScalar; 3],
    dx: [[CompiledScalar; 3]; 3],
    b: [CompiledScalar; 3],
    a: [CompiledScalar; 3],
}

impl CompiledStage {
    fn compile(s: &InfStage) -> Self {
        CompiledStage {
            x: std::array::from_fn(|i| CompiledScalar::compile(&s.x[i])),
            dx: std::array::from_fn(|i| {
                std::array::from_fn(|j| CompiledScalar::compile(&s.x[i].deriv(j)))
            }),
            b: std::array::from_fn(|i| CompiledScalar::compile(&s.b[i])),
            a: std::array::from_fn(|i| CompiledScalar::compile(&s.a[i])),
        }
    }
}

struct CompiledStages(Vec<CompiledStage>);

impl StageRates for CompiledStages {
    fn n_stages(&self) -> usize {
        self.0.len()
    }

    fn eval(&self, idx: usize, q: &[f64; 3]) -> RateEval {
        let s = if self.0.len() == 1 { &self.0[0] } else { &self.0[idx] };
        RateEval {
            x: std::array::from_fn(|i| s.x[i].eval(q)),
            dx: std::array::from_fn(|i| std::array::from_fn(|j| s.dx[i][j].eval(q))),
            b: std::array::from_fn(|i| s.b[i].eval(q)),
            a: std::array::from_fn(|i| s.a[i].eval(q)),
        }
    }
}

/// One flow leg: the time-`t` flow of a stored generator, possibly reversed.
#[derive(Clone)]
struct FlowLeg {
    rates: Arc<dyn StageRates>,
    t: f64,
    steps: usize,
    reverse: bool,
}

impl FlowLeg {
    fn reversed(&self) -> FlowLeg {
        FlowLeg { rates: self.rates.clone(), t: self.t, steps: self.steps, reverse: !self.reverse }
    }

    /// Stage lookup honoring time reversal: the reversed flow of a generator
    /// `X_s` is the forward flow of `-X_{1-s}`.
    fn stage_eval(&self, idx: usize, q: &[f64; 3]) -> RateEval {
        let n = self.rates.n_stages();
        let idx = if n == 1 {
            0
        } else if self.reverse {
            n - 1 - idx
        } else {
            idx
        };
        let mut r = self.rates.eval(idx, q);
        if self.reverse {
            for i in 0..3 {
                r.x[i] = -r.x[i];
                for j in 0..3 {
                    r.dx[i][j] = -r.dx[i][j];
                }
            }
        }
        r
    }

    /// Flow the point and its Jacobian for the leg's duration.
    fn flow(&self, p: &[f64; 3]) -> ([f64; 3], Mat3) {
        let mut q = *p;
        let mut j = MAT3_ID;
        let h = self.t / self.steps as f64;
        let rate = |idx: usize, q: &[f64; 3], j: &Mat3| -> ([f64; 3], Mat3) {
            let r = self.stage_eval(idx, q);
            (r.x, mat3_mul(&r.dx, j))
        };
        for i in 0..self.steps {
            let (dq1, dj1) = rate(2 * i, &q, &j);
            let (q2, j2) = offset(&q, &j, &dq1, &dj1, h / 2.0);
            let (dq2, dj2) = rate(2 * i + 1, &q2, &j2);
            let (q3, j3) = offset(&q, &j, &dq2, &dj2, h / 2.0);
            let (dq3, dj3) = rate(2 * i + 1, &q3, &j3);
            let (q4, j4) = offset(&q, &j, &dq3, &dj3, h);
            let (dq4, dj4) = rate(2 * i + 2, &q4, &j4);
            for c in 0..3 {
                q[c] += h / 6.0 * (dq1[c] + 2.0 * dq2[c] + 2.0 * dq3[c] + dq4[c]);
                for d in 0..3 {
                    j[c][d] += h / 6.0 * (dj1[c][d] + 2.0 * dj2[c][d] + 2.0 * dj3[c][d] + dj4[c][d]);
                }
            }
        }
        (q, j)
    }
}

fn offset(q: &[f64; 3], j: &Mat3, dq: &[f64; 3], dj: &Mat3, h: f64) -> ([f64; 3], Mat3) {
    (
        std::array::from_fn(|c| q[c] + h * dq[c]),
        std::array::from_fn(|c| std::array::from_fn(|d| j[c][d] + h * dj[c][d])),
    )
}

#[derive(Clone, Copy, Debug)]
pub struct FlowMeta {
    pub steps: usize,
    pub band: u32,
}

/// A generalized diffeomorphism `f (B, A)`: the diffeomorphism part is a
/// composition of stored flows, the form parts are interpolated grid samples.
#[derive(Clone)]
pub struct GDiffElement {
    pub grid: TorusGrid,
    /// applied first to last when mapping a point forward
    legs: Vec<FlowLeg>,
    pub bspec: [CompiledScalar; 3],
    pub aspec: [CompiledScalar; 3],
    pub meta: FlowMeta,
}

impl GDiffElement {
    pub fn identity(cfg: &FlowSettings) -> Self {
        GDiffElement {
            grid: cfg.grid,
            legs: Vec::new(),
            bspec: std::array::from_fn(|_| CompiledScalar::default()),
            aspec: std::array::from_fn(|_| CompiledScalar::default()),
            meta: FlowMeta { steps: cfg.steps, band: cfg.band },
        }
    }

    pub fn is_identity_map(&self) -> bool {
        self.legs.is_empty()
    }

    /// Forward map and its Jacobian at an arbitrary point.
    pub fn map_with_jac(&self, p: &[f64; 3]) -> Result<([f64; 3], Mat3), Error> {
        let mut q = *p;
        let mut j = MAT3_ID;
        for leg in &self.legs {
            let (q2, jl) = leg.flow(&q);
            j = mat3_mul(&jl, &j);
            q = q2;
            check_finite(&q, leg.t)?;
        }
        Ok((q, j))
    }

    /// Inverse map and its Jacobian at an arbitrary point.
    pub fn inv_with_jac(&self, p: &[f64; 3]) -> Result<([f64; 3], Mat3), Error> {
        let mut q = *p;
        let mut j = MAT3_ID;
        for leg in self.legs.iter().rev() {
            let (q2, jl) = leg.reversed().flow(&q);
            j = mat3_mul(&jl, &j);
            q = q2;
            check_finite(&q, leg.t)?;
        }
        Ok((q, j))
    }

    fn with_fields(
        &self,
        bvals: Vec<[f64; 3]>,
        avals: Vec<[f64; 3]>,
        legs: Vec<FlowLeg>,
    ) -> GDiffElement {
        let fit = |vals: &[[f64; 3]]| -> [CompiledScalar; 3] {
            std::array::from_fn(|i| {
                let comp: Vec<f64> = vals.iter().map(|v| v[i]).collect();
                self.grid.fit_scalar(&comp, self.meta.band, 1e-14)
            })
        };
        GDiffElement {
            grid: self.grid,
            legs,
            bspec: fit(&bvals),
            aspec: fit(&avals),
            meta: self.meta,
        }
    }

    fn b_at(&self, q: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.bspec[i].eval(q))
    }

    fn a_at(&self, q: &[f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.aspec[i].eval(q))
    }
}

fn check_finite(q: &[f64; 3], t: f64) -> Result<(), Error> {
    if q.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::IntegratorDiverged { t })
    }
}

/// Flow a generator for time `t`. Per grid point the joint system for
/// position, Jacobian, and the accumulated form parts
/// `A = integral of f_s* a_s`, `B = integral of (f_s* b_s + f_s* a_s wedge A_s)`
/// is stepped with the classical 4th-order scheme. `keep_leg = false` drops
/// the (known trivial) diffeomorphism part.
pub(crate) fn integrate_rates(
    rates: Arc<dyn StageRates>,
    t: f64,
    cfg: &FlowSettings,
    keep_leg: bool,
) -> Result<GDiffElement, Error> {
    let steps = if rates.n_stages() == 1 {
        cfg.steps.max(1)
    } else {
        (rates.n_stages() - 1) / 2
    };
    let leg = FlowLeg { rates, t, steps, reverse: false };

    #[derive(Clone, Copy)]
    struct St {
        q: [f64; 3],
        j: Mat3,
        a: [f64; 3],
        b: [f64; 3],
    }
    let rate = |idx: usize, y: &St| -> St {
        let r = leg.stage_eval(idx, &y.q);
        let pa = mat3_tvec(&y.j, &r.a);
        let pb = pullback2(&y.j, &r.b);
        let wedge = wedge11(&pa, &y.a);
        St {
            q: r.x,
            j: mat3_mul(&r.dx, &y.j),
            a: pa,
            b: std::array::from_fn(|i| pb[i] + wedge[i]),
        }
    };
    let shift = |y: &St, d: &St, h: f64| -> St {
        St {
            q: std::array::from_fn(|c| y.q[c] + h * d.q[c]),
            j: std::array::from_fn(|c| std::array::from_fn(|e| y.j[c][e] + h * d.j[c][e])),
            a: std::array::from_fn(|c| y.a[c] + h * d.a[c]),
            b: std::array::from_fn(|c| y.b[c] + h * d.b[c]),
        }
    };

    let h = t / steps as f64;
    let mut bvals = Vec::with_capacity(cfg.grid.len());
    let mut avals = Vec::with_capacity(cfg.grid.len());
    for p in cfg.grid.nodes() {
        let mut y = St { q: p, j: MAT3_ID, a: [0.0; 3], b: [0.0; 3] };
        for i in 0..steps {
            let d1 = rate(2 * i, &y);
            let d2 = rate(2 * i + 1, &shift(&y, &d1, h / 2.0));
            let d3 = rate(2 * i + 1, &shift(&y, &d2, h / 2.0));
            let d4 = rate(2 * i + 2, &shift(&y, &d3, h));
            y = St {
                q: std::array::from_fn(|c| {
                    y.q[c] + h / 6.0 * (d1.q[c] + 2.0 * d2.q[c] + 2.0 * d3.q[c] + d4.q[c])
                }),
                j: std::array::from_fn(|c| {
                    std::array::from_fn(|e| {
                        y.j[c][e] + h / 6.0 * (d1.j[c][e] + 2.0 * d2.j[c][e] + 2.0 * d3.j[c][e] + d4.j[c][e])
                    })
                }),
                a: std::array::from_fn(|c| {
                    y.a[c] + h / 6.0 * (d1.a[c] + 2.0 * d2.a[c] + 2.0 * d3.a[c] + d4.a[c])
                }),
                b: std::array::from_fn(|c| {
                    y.b[c] + h / 6.0 * (d1.b[c] + 2.0 * d2.b[c] + 2.0 * d3.b[c] + d4.b[c])
                }),
            };
        }
        check_finite(&y.q, t)?;
        if y.a.iter().chain(y.b.iter()).any(|c| !c.is_finite()) {
            return Err(Error::IntegratorDiverged { t });
        }
        bvals.push(y.b);
        avals.push(y.a);
    }

    let legs = if keep_leg { vec![leg] } else { Vec::new() };
    let skeleton = GDiffElement {
        grid: cfg.grid,
        legs: Vec::new(),
        bspec: std::array::from_fn(|_| CompiledScalar::default()),
        aspec: std::array::from_fn(|_| CompiledScalar::default()),
        meta: FlowMeta { steps: cfg.steps, band: cfg.band },
    };
    Ok(skeleton.with_fields(bvals, avals, legs))
}

/// Flow an infinitesimal element with exact stages for time `t`. A sampled
/// generator fixes the step count and integrates its whole interval.
pub fn integrate_inf_gdiff(g: &InfGDiff, t: f64, cfg: &FlowSettings) -> Result<GDiffElement, Error> {
    if !g.is_autonomous() {
        assert!(
            (t - 1.0).abs() < 1e-12,
            "a time-sampled generator integrates over its whole interval"
        );
    }
    let keep_leg = !g.has_zero_flow_part();
    let compiled = CompiledStages(g.stages.iter().map(CompiledStage::compile).collect());
    integrate_rates(Arc::new(compiled), t, cfg, keep_leg)
}

/// Semidirect composition `F G = fg (g*B + D + g*A wedge C, g*A + C)`
/// for `F = f (B, A)`, `G = g (D, C)`; pullbacks by `g` are evaluated
/// pseudo-spectrally on the shared grid.
pub fn gdiff_compose(f: &GDiffElement, g: &GDiffElement) -> Result<GDiffElement, Error> {
    assert_eq!(f.grid, g.grid, "elements must share a sample grid");
    let mut bvals = Vec::with_capacity(f.grid.len());
    let mut avals = Vec::with_capacity(f.grid.len());
    for p in f.grid.nodes() {
        let (y, jg) = g.map_with_jac(&p)?;
        let pb = pullback2(&jg, &f.b_at(&y));
        let pa = mat3_tvec(&jg, &f.a_at(&y));
        let c = g.a_at(&p);
        let d = g.b_at(&p);
        let wedge = wedge11(&pa, &c);
        bvals.push(std::array::from_fn(|i| pb[i] + d[i] + wedge[i]));
        avals.push(std::array::from_fn(|i| pa[i] + c[i]));
    }
    let mut legs = g.legs.clone();
    legs.extend(f.legs.iter().cloned());
    Ok(f.with_fields(bvals, avals, legs))
}

/// Group inverse: `(f (B, A))^{-1} = f^{-1} (-(f^{-1})*B, -(f^{-1})*A)`.
pub fn gdiff_inverse(f: &GDiffElement) -> Result<GDiffElement, Error> {
    let mut bvals = Vec::with_capacity(f.grid.len());
    let mut avals = Vec::with_capacity(f.grid.len());
    for p in f.grid.nodes() {
        let (q, k) = f.inv_with_jac(&p)?;
        let pb = pullback2(&k, &f.b_at(&q));
        let pa = mat3_tvec(&k, &f.a_at(&q));
        bvals.push(std::array::from_fn(|i| -pb[i]));
        avals.push(std::array::from_fn(|i| -pa[i]));
    }
    let legs = f.legs.iter().rev().map(FlowLeg::reversed).collect();
    Ok(f.with_fields(bvals, avals, legs))
}

/// Contract a pointwise form value with a Jacobian: degree 0 unchanged,
/// degree 1 by the transpose, degree 2 by signed minors, degree 3 by the
/// determinant.
pub fn pullback_point(j: &Mat3, v: &MixedForm<f64>) -> MixedForm<f64> {
    let one = mat3_tvec(j, &[v.c[1], v.c[2], v.c[3]]);
    let two = pullback2(j, &[v.c[4], v.c[5], v.c[6]]);
    MixedForm {
        c: [v.c[0], one[0], one[1], one[2], two[0], two[1], two[2], det3(j) * v.c[7]],
    }
}

/// Pull a form field back by the diffeomorphism part of `F`: at each node
/// `p` the value at `f(p)` is contracted with the Jacobian at `p`.
pub fn pullback_form(
    f: &GDiffElement,
    phi: &crate::fields::FormField3,
    grid: &TorusGrid,
) -> Result<Vec<MixedForm<f64>>, Error> {
    let compiled = CompiledForm::compile(phi);
    let mut out = Vec::with_capacity(grid.len());
    for p in grid.nodes() {
        let (y, j) = f.map_with_jac(&p)?;
        out.push(pullback_point(&j, &compiled.eval(&y)));
    }
    Ok(out)
}

/// Action of a generalized diffeomorphism on a spinor field:
/// `F phi = (f^{-1})* (exp(-B) exp(-A tau) phi)`. The order is fixed by the
/// requirement that `(F_t phi - phi) / t` tends to minus the spinor
/// derivative of the generator as `t -> 0`.
pub fn gdiff_act_spinor(
    f: &GDiffElement,
    phi: &crate::fields::FormField3,
) -> Result<Vec<MixedForm<f64>>, Error> {
    let compiled = CompiledForm::compile(phi);
    act_general(f, &|q| compiled.eval(q))
}

/// Same action on an interpolated (already sampled) form.
pub fn gdiff_act_spectral(
    f: &GDiffElement,
    phi: &SpectralForm,
) -> Result<Vec<MixedForm<f64>>, Error> {
    act_general(f, &|q| phi.eval(q))
}

fn act_general(
    f: &GDiffElement,
    eval: &dyn Fn(&[f64; 3]) -> MixedForm<f64>,
) -> Result<Vec<MixedForm<f64>>, Error> {
    let mut out = Vec::with_capacity(f.grid.len());
    for p in f.grid.nodes() {
        let (q, k) = f.inv_with_jac(&p)?;
        let ba = BaTransform { b: f.b_at(&q), a: f.a_at(&q) };
        out.push(pullback_point(&k, &ba.act_spinor(&eval(&q))));
    }
    Ok(out)
}
