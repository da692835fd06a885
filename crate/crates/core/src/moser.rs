//! Moser-style deformation: carry a structure to a nearby one along an exact
//! path by the time-one flow of a generalized vector field.
//!
//! Two pointwise-solvable shapes are handled. A base with nonzero scalar part
//! takes the cheap top-slot correction `perp_correct_nonzero`. An adapted
//! base (zero scalar part, constant covector along one coordinate axis) takes
//! the correction operator `operator_r`, which rewrites a potential as a
//! multiple of the base 2-form plus an exact form without changing its
//! exterior derivative. On a constant adapted base, `operator_q` inverts
//! Clifford multiplication mode by mode, `operator_p` composes the two into
//! the recursion step of `moser_series`, and `moser_flow` integrates the
//! implicitly defined generator into a generalized diffeomorphism.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_traits::Zero;

use crate::algebra::{
    chevalley_pair, clifford_act, interior2, quadratic_form, rat_int, rat_to_f64, GenVec,
    MixedForm, Rat, MONOMIAL_NAMES,
};
use crate::clifford::clifford_matrix;
use crate::error::Error;
use crate::fields::{
    check_band_cap, d_one_form, eval_form, ext_d, form_band, form_scale_rat, grad, FormField3,
    GenVectorField,
};
use crate::g22::G22Structure;
use crate::gdiff::{
    gdiff_act_spinor, integrate_rates, FlowSettings, GDiffElement, RateEval, StageRates,
};
use crate::grid::{CompiledForm, CompiledScalar, TorusGrid};
use crate::hodge::{codiff, fiber_integrate, fiberwise_hodge, green};
use crate::linalg::{qr87, qr87_solve, solve_exact, RatMat, SolveOutcome};
use crate::trig::{Mode, TrigScalar};

/// Replace the top-degree slot of `phi` so that the Chevalley pairing with
/// `rho` vanishes pointwise. Needs a nonzero constant scalar part on `rho`;
/// the exterior derivative of `phi` is unchanged.
pub fn perp_correct_nonzero(rho: &FormField3, phi: &FormField3) -> Result<FormField3, Error> {
    let rho0 = rho.c[0].as_constant().ok_or(Error::NonconstantRho0)?;
    if Zero::is_zero(&rho0) {
        return Err(Error::ZeroRho0);
    }
    let mut low = phi.clone();
    low.c[7] = TrigScalar::zero();
    let pair = chevalley_pair(rho, &low);
    let mut out = phi.clone();
    out.c[7] = pair.scale(&-rho0.recip());
    debug_assert!(chevalley_pair(rho, &out).is_zero());
    Ok(out)
}

/// An adapted base: zero scalar part, covector `r dx_axis` with one constant
/// nonzero coefficient, closed 2-form part whose fiber mean `c'` transverse
/// to the axis is a nonzero constant.
pub(crate) struct Adapted {
    pub axis: usize,
    pub r: Rat,
    pub cprime: Rat,
}

pub(crate) fn detect_adapted(rho: &FormField3) -> Result<Adapted, Error> {
    if !rho.c[0].is_zero() {
        return Err(Error::NotAdapted { reason: "scalar part is nonzero".into() });
    }
    let mut found: Option<(usize, Rat)> = None;
    for i in 0..3 {
        let ci = &rho.c[1 + i];
        if ci.is_zero() {
            continue;
        }
        let Some(r) = ci.as_constant() else {
            return Err(Error::NotAdapted {
                reason: format!("covector component {} is not constant", MONOMIAL_NAMES[1 + i]),
            });
        };
        if found.is_some() {
            return Err(Error::NotAdapted {
                reason: "covector part involves more than one coordinate axis".into(),
            });
        }
        found = Some((i, r));
    }
    let Some((axis, r)) = found else {
        return Err(Error::NotAdapted { reason: "covector part is zero".into() });
    };
    let two = rho.two_form_part();
    if !crate::fields::d_two_form(&two).is_zero() {
        return Err(Error::NotClosed { monomial: "d123" });
    }
    // closedness makes the transverse fiber mean a genuine constant
    let cprime = fiber_integrate(&two, axis)
        .as_constant()
        .expect("fiber mean of a closed 2-form is constant");
    if Zero::is_zero(&cprime) {
        return Err(Error::NotAdapted {
            reason: "fiber mean of the 2-form part vanishes".into(),
        });
    }
    Ok(Adapted { axis, r, cprime })
}

/// Correction operator on an adapted base: returns a form `R phi` with
/// `<rho, phi + R phi> = 0` pointwise. `R phi` is a constant multiple of the
/// base 2-form plus an exact form, so it is closed, its class is that
/// multiple of the 2-form class, and it leaves `d phi` unchanged.
pub fn operator_r(base: &G22Structure, phi: &FormField3) -> Result<FormField3, Error> {
    operator_r_raw(&base.rho, phi)
}

pub(crate) fn operator_r_raw(rho: &FormField3, phi: &FormField3) -> Result<FormField3, Error> {
    let ad = detect_adapted(rho)?;
    let rho2 = &rho.two_form_part();
    let top = MixedForm::one_form(rho.one_form_part()).wedge(&MixedForm::two_form(rho2.clone()));

    // split the pairing into its mean, matched by c * rho_2, and a mean-free
    // remainder eta killed by an exact form
    let pair = chevalley_pair(rho, phi);
    let c = pair.mean() / top.c[7].mean();
    let eta = pair - top.c[7].scale(&c);
    debug_assert!(Zero::is_zero(&eta.mean()));

    // alpha is a 2-form primitive of eta d123
    let alpha_form = codiff(&green(&FormField3::three_form(eta.clone())));
    let alpha = alpha_form.two_form_part();
    debug_assert!((crate::fields::d_two_form(&alpha) - eta.clone()).is_zero());

    // peel off the part of alpha visible to the fiber mean, then solve away
    // the rest fiberwise; what survives has no transverse component
    let g = fiber_integrate(&alpha, ad.axis);
    let f = g.scale(&ad.cprime.recip());
    let alpha0: [TrigScalar; 3] =
        std::array::from_fn(|i| alpha[i].clone() - f.clone() * rho2[i].clone());
    let beta = fiberwise_hodge(&alpha0, ad.axis)?;
    let dbeta = d_one_form(&beta);
    let rem: [TrigScalar; 3] = std::array::from_fn(|i| alpha0[i].clone() - dbeta[i].clone());
    debug_assert!(rem[2 - ad.axis].is_zero());
    let mut x: [TrigScalar; 3] = std::array::from_fn(|_| TrigScalar::zero());
    x[ad.axis] = TrigScalar::constant(ad.r.recip());
    let gamma: [TrigScalar; 3] = {
        let ix = interior2(&x, &rem);
        std::array::from_fn(|i| -ix[i].clone())
    };

    let df = grad(&f);
    let dgamma = d_one_form(&gamma);
    let mut out = FormField3::zero();
    for i in 0..3 {
        out.c[1 + i] = df[i].clone();
        out.c[4 + i] = rho2[i].scale(&c) + dgamma[i].clone();
    }
    if !chevalley_pair(rho, &phi.add(&out)).is_zero() {
        return Err(Error::NotPerpAfterR);
    }
    Ok(out)
}

/// Solve `u . rho = rhs` mode by mode against a constant base matrix.
fn solve_modes(mat: &RatMat, rhs: &FormField3) -> Result<GenVectorField, Error> {
    use std::collections::BTreeMap;
    let mut modes: BTreeMap<Mode, [Rat; 8]> = BTreeMap::new();
    for (idx, slot) in rhs.c.iter().enumerate() {
        for (mode, coeff) in slot.terms() {
            modes.entry(mode.clone()).or_insert_with(|| std::array::from_fn(|_| rat_int(0)))
                [idx] = coeff.clone();
        }
    }
    let mut u = GenVectorField::zero();
    for (mode, b) in modes {
        match solve_exact(mat, &b) {
            SolveOutcome::Unique(sol) => {
                for (i, coeff) in sol.into_iter().enumerate() {
                    if Zero::is_zero(&coeff) {
                        continue;
                    }
                    match i {
                        0..=2 => u.x[i].push(mode.k, mode.parity, coeff),
                        3..=5 => u.xi[i - 3].push(mode.k, mode.parity, coeff),
                        _ => u.lam.push(mode.k, mode.parity, coeff),
                    }
                }
            }
            _ => {
                return Err(Error::SingularSystem {
                    detail: format!("mode solve at frequency {:?}", mode.k),
                })
            }
        }
    }
    Ok(u)
}

fn constant_base_matrix(base: &G22Structure) -> Result<RatMat, Error> {
    if base.rho.c.iter().any(|s| !s.is_constant()) {
        return Err(Error::NotAdapted { reason: "base has nonconstant coefficients".into() });
    }
    let rho0 = crate::fields::mean_form(&base.rho);
    if Zero::is_zero(&quadratic_form(&rho0)) {
        return Err(Error::NullSpinor);
    }
    let m = clifford_matrix(&rho0);
    Ok(m.iter().map(|row| row.to_vec()).collect())
}

/// Exact inverse of Clifford multiplication on a constant adapted base:
/// the unique generalized vector field with `u . rho = -(phi + R phi)`.
pub fn operator_q(base: &G22Structure, phi: &FormField3) -> Result<GenVectorField, Error> {
    let mat = constant_base_matrix(base)?;
    let rphi = operator_r_raw(&base.rho, phi)?;
    let rhs = phi.add(&rphi).neg();
    let u = solve_modes(&mat, &rhs)?;
    debug_assert!(clifford_act(&u, &base.rho).sub(&rhs).is_zero());
    Ok(u)
}

/// One step of the perturbation recursion in a closed direction `beta` with
/// zero scalar part: `P phi = (Q phi) . beta`.
pub fn operator_p(
    base: &G22Structure,
    beta: &FormField3,
    phi: &FormField3,
) -> Result<FormField3, Error> {
    check_direction(beta)?;
    let u = operator_q(base, phi)?;
    Ok(clifford_act(&u, beta))
}

fn check_direction(beta: &FormField3) -> Result<(), Error> {
    if !beta.c[0].is_zero() {
        return Err(Error::NotAdapted {
            reason: "deformation direction would change the scalar part".into(),
        });
    }
    let dbeta = ext_d(beta);
    for (idx, slot) in dbeta.c.iter().enumerate() {
        if !slot.is_zero() {
            return Err(Error::NotClosed { monomial: MONOMIAL_NAMES[idx] });
        }
    }
    Ok(())
}

/// Order-by-order solution of the deformation along `rho + lambda beta`.
#[derive(Clone, Debug)]
pub struct SeriesSolution {
    /// coefficient fields `u_j`, independent of lambda
    pub terms: Vec<GenVectorField>,
    pub lambda: Rat,
    /// sup norm of the exact residual of each partial sum
    pub residuals: Vec<f64>,
    /// measured growth ratio of the iterates, a crude stand-in for the
    /// analytic smallness constant
    pub contraction: f64,
    /// lambda at or beyond half the radius the measured ratio suggests
    pub lambda_flagged: bool,
}

/// Perturbation series for the family `rho + lambda beta`: term `j` is
/// `u_j = Q(P^j phi)`, and the partial sum of order `m` satisfies
/// `u . (rho + lambda beta) = -(phi + sum lambda^j R P^j phi)` up to an exact
/// residual `lambda^(m+1) P^(m+1) phi`. Residual sup norms are measured on
/// `grid`; growth of successive residuals aborts with `SeriesDiverging`.
pub fn moser_series(
    base: &G22Structure,
    beta: &FormField3,
    phi: &FormField3,
    lambda: &Rat,
    order: usize,
    band_cap: u32,
    grid: &TorusGrid,
) -> Result<SeriesSolution, Error> {
    check_direction(beta)?;
    let mat = constant_base_matrix(base)?;

    let mut terms = Vec::with_capacity(order + 1);
    let mut corrections = Vec::with_capacity(order + 1);
    let mut iterates = vec![phi.clone()];
    for j in 0..=order {
        let p = &iterates[j];
        check_band_cap(form_band(p), band_cap)?;
        let rp = operator_r_raw(&base.rho, p)?;
        let u = solve_modes(&mat, &p.add(&rp).neg())?;
        iterates.push(clifford_act(&u, beta));
        terms.push(u);
        corrections.push(rp);
    }

    let sup = |f: &FormField3| -> f64 {
        let cf = CompiledForm::compile(f);
        let mut s: f64 = 0.0;
        for x in grid.nodes() {
            let v = cf.eval(&x);
            for c in &v.c {
                s = s.max(c.abs());
            }
        }
        s
    };

    let sups: Vec<f64> = iterates.iter().map(|p| sup(p)).collect();
    let mut contraction: f64 = 0.0;
    for w in sups.windows(2) {
        if w[0] > 0.0 {
            contraction = contraction.max(w[1] / w[0]);
        }
    }
    let lambda_f = rat_to_f64(lambda).abs();
    let lambda_flagged = contraction > 0.0 && 2.0 * contraction * lambda_f >= 1.0;

    // exact residual of each partial sum; identity with the next iterate is
    // exercised in the tests
    let rho_lam = base.rho.add(&form_scale_rat(beta, lambda));
    let mut residuals = Vec::with_capacity(order + 1);
    let mut usum = GenVectorField::zero();
    let mut rsum = FormField3::zero();
    let mut lj = rat_int(1);
    for j in 0..=order {
        let ljs = TrigScalar::constant(lj.clone());
        usum = usum.add(&terms[j].scale(&ljs));
        rsum = rsum.add(&form_scale_rat(&corrections[j], &lj));
        let res = clifford_act(&usum, &rho_lam).add(phi).add(&rsum);
        residuals.push(sup(&res));
        lj *= lambda.clone();
    }
    for m in 1..residuals.len() {
        if residuals[m - 1] > 1e-12 && residuals[m] >= residuals[m - 1] {
            return Err(Error::SeriesDiverging {
                order: m,
                ratio: residuals[m] / residuals[m - 1],
            });
        }
    }

    Ok(SeriesSolution { terms, lambda: lambda.clone(), residuals, contraction, lambda_flagged })
}

/// A deformation task: flow the base structure to `rho + d phi`.
#[derive(Clone)]
pub struct MoserProblem {
    pub base: G22Structure,
    pub phi: FormField3,
    pub cfg: FlowSettings,
    /// abort threshold for `|Q|` along the path
    pub margin: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct MoserReport {
    /// stage count of the time-sampled generator (steps plus half steps)
    pub stages: usize,
    /// worst pointwise least-squares defect of the implicit generator solves
    pub solve_residual_max: f64,
    /// sup distance between the flowed base and the target on the grid
    pub terminal_residual: f64,
}

struct StageData {
    rho: CompiledForm,
    drho: [CompiledForm; 3],
    phi: CompiledForm,
    dphi: [CompiledForm; 3],
}

/// Generator defined implicitly by `u . rho_t = -phi_t`: each evaluation
/// factors the pointwise Clifford matrix once and reuses it for the three
/// differentiated systems that give the Jacobian and the form rates.
struct MoserRates {
    stages: Vec<StageData>,
    residual_bits: AtomicU64,
}

impl MoserRates {
    fn note_residual(&self, r: f64) {
        let mut cur = self.residual_bits.load(Ordering::Relaxed);
        // nonnegative doubles order like their bit patterns
        while r.to_bits() > cur {
            match self.residual_bits.compare_exchange_weak(
                cur,
                r.to_bits(),
                Ordering::Relaxed,
                Ordering::Relaxed,
            ) {
                Ok(_) => break,
                Err(seen) => cur = seen,
            }
        }
    }

    fn residual_max(&self) -> f64 {
        f64::from_bits(self.residual_bits.load(Ordering::Relaxed))
    }
}

impl StageRates for MoserRates {
    fn n_stages(&self) -> usize {
        self.stages.len()
    }

    fn eval(&self, idx: usize, q: &[f64; 3]) -> RateEval {
        let st = &self.stages[idx];
        let rho = st.rho.eval(q);
        let m = clifford_matrix(&rho);
        let mut fac = m;
        let diag = qr87(&mut fac);

        let phi = st.phi.eval(q);
        let mut b: [f64; 8] = std::array::from_fn(|i| -phi.c[i]);
        let u = qr87_solve(&fac, &diag, &mut b);

        let mut worst: f64 = 0.0;
        for i in 0..8 {
            let mut r = phi.c[i];
            for j in 0..7 {
                r += m[i][j] * u[j];
            }
            worst = worst.max(r.abs());
        }
        self.note_residual(worst);

        // differentiate the defining system in place of differentiating u
        let ug = GenVec { x: [u[0], u[1], u[2]], xi: [u[3], u[4], u[5]], lam: u[6] };
        let mut du = [[0.0f64; 7]; 3];
        for i in 0..3 {
            let dphi = st.dphi[i].eval(q);
            let drho_u = clifford_act(&ug, &st.drho[i].eval(q));
            let mut rhs: [f64; 8] = std::array::from_fn(|r| -dphi.c[r] - drho_u.c[r]);
            du[i] = qr87_solve(&fac, &diag, &mut rhs);
        }

        RateEval {
            x: [u[0], u[1], u[2]],
            dx: std::array::from_fn(|c| std::array::from_fn(|i| du[i][c])),
            b: [
                du[0][4] - du[1][3],
                du[0][5] - du[2][3],
                du[1][5] - du[2][4],
            ],
            a: std::array::from_fn(|i| du[i][6]),
        }
    }
}

/// Flow the base structure along `rho_t = rho + t d phi`. The generator is
/// recovered per stage and point from the corrected potential; the returned
/// element carries the base to the target up to integration error, measured
/// in the report.
pub fn moser_flow(problem: &MoserProblem) -> Result<(GDiffElement, MoserReport), Error> {
    let rho0 = &problem.base.rho;
    let dphi = ext_d(&problem.phi);
    let rho1 = rho0.add(&dphi);
    let scalar_part = rho0.c[0].as_constant().ok_or(Error::NonconstantRho0)?;
    let adapted = Zero::is_zero(&scalar_part);
    if adapted {
        detect_adapted(rho0)?;
        if !problem.phi.c[0].is_constant() {
            return Err(Error::NotAdapted {
                reason: "potential with nonconstant scalar part would tilt the covector axis"
                    .into(),
            });
        }
    }

    let n = problem.cfg.steps.max(1);
    let half = 2 * n;
    let mut stages = Vec::with_capacity(half + 1);
    for k in 0..=half {
        let t = Rat::new(k.into(), half.into());
        let rhok = rho0.add(&form_scale_rat(&dphi, &t));

        // certificate along the path: the pointwise pairing must stay away
        // from zero, on a grid dense enough for the band
        let q = quadratic_form(&rhok);
        let m_eff = problem.cfg.grid.m.max(3 * form_band(&rhok) as usize + 1);
        let cq = CompiledScalar::compile(&q);
        let geff = TorusGrid::new(m_eff);
        for i in 0..m_eff {
            for j in 0..m_eff {
                for l in 0..m_eff {
                    let v = cq.eval(&geff.node(i, j, l));
                    if v.abs() < problem.margin {
                        return Err(Error::PathNull {
                            t: rat_to_f64(&t),
                            value: v,
                            point: [i, j, l],
                        });
                    }
                }
            }
        }

        let phik = if adapted {
            problem.phi.add(&operator_r_raw(&rhok, &problem.phi)?)
        } else {
            perp_correct_nonzero(&rhok, &problem.phi)?
        };
        stages.push(StageData {
            rho: CompiledForm::compile(&rhok),
            drho: std::array::from_fn(|i| CompiledForm::compile(&rhok.map(|s| s.deriv(i)))),
            phi: CompiledForm::compile(&phik),
            dphi: std::array::from_fn(|i| CompiledForm::compile(&phik.map(|s| s.deriv(i)))),
        });
    }

    let rates = Arc::new(MoserRates { stages, residual_bits: AtomicU64::new(0) });
    let handle = rates.clone();
    let flow = integrate_rates(rates, 1.0, &problem.cfg, true)?;

    let acted = gdiff_act_spinor(&flow, rho0)?;
    let mut terminal: f64 = 0.0;
    for (idx, p) in problem.cfg.grid.nodes().enumerate() {
        let want = eval_form(&rho1, &p);
        for i in 0..8 {
            terminal = terminal.max((acted[idx].c[i] - want.c[i]).abs());
        }
    }

    let report = MoserReport {
        stages: 2 * n + 1,
        solve_residual_max: handle.residual_max(),
        terminal_residual: terminal,
    };
    Ok((flow, report))
}
