//! Split-signature structures on the torus defined by a closed, everywhere
//! non-null mixed form: validation with a sampling certificate,
//! normalization by a closed `exp(B + A)` field, extraction of the
//! fibration vector field when the scalar part vanishes, mapping-torus
//! constructions, and the cohomological cone test with representatives.

use num_traits::{Signed, Zero};

use crate::algebra::{quadratic_form, Rat};
use crate::clifford::{Form3, SpinorSign};
use crate::error::Error;
use crate::fields::{constant_form, ext_d, form_band, mean_form, BaField, FormField3};
use crate::grid::{CompiledForm, CompiledScalar, TorusGrid};
use crate::trig::TrigScalar;

/// Degreewise cohomology class, coordinatized by constant representatives:
/// `h1` on `(d1, d2, d3)`, `h2` on `(d12, d13, d23)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CohomologyVector {
    pub h0: Rat,
    pub h1: [Rat; 3],
    pub h2: [Rat; 3],
    pub h3: Rat,
}

impl CohomologyVector {
    pub fn as_form(&self) -> Form3 {
        let mut f = Form3::scalar(self.h0.clone());
        f = f.add(&Form3::one_form(self.h1.clone()));
        f = f.add(&Form3::two_form(self.h2.clone()));
        f.add(&Form3::three_form(self.h3.clone()))
    }

    pub fn from_form(f: &Form3) -> Self {
        CohomologyVector {
            h0: f.c[0].clone(),
            h1: f.one_form_part(),
            h2: f.two_form_part(),
            h3: f.c[7].clone(),
        }
    }

    /// Cup product `h1 . h2`, the `d123` coefficient of the constant wedge.
    pub fn cup12(&self) -> Rat {
        Form3::one_form(self.h1.clone())
            .wedge(&Form3::two_form(self.h2.clone()))
            .c[7]
            .clone()
    }
}

/// Cohomology class of a closed field: the constant Fourier mode,
/// degree by degree.
pub fn cohomology_class(rho: &FormField3) -> CohomologyVector {
    CohomologyVector::from_form(&mean_form(rho))
}

/// Sampling certificate attached to a validated structure.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationCert {
    pub grid_m: usize,
    pub margin: f64,
    pub min_abs_q: f64,
    pub sign: SpinorSign,
}

/// A validated structure: a closed mixed form with constant scalar part
/// whose invariant quadratic form is bounded away from zero (one sign) on
/// the certificate grid.
#[derive(Clone, Debug)]
pub struct G22Structure {
    pub rho: FormField3,
    pub cert: ValidationCert,
    pub cls: CohomologyVector,
}

/// Check closedness exactly, constancy of the scalar part, and non-nullity
/// by sampling `<rho, rho>` with the given margin. The certificate grid is
/// grown to at least `3 band + 1` nodes per axis.
pub fn validate(rho: &FormField3, grid: &TorusGrid, margin: f64) -> Result<G22Structure, Error> {
    if rho.c[0].as_constant().is_none() {
        return Err(Error::NonconstantRho0);
    }
    let drho = ext_d(rho);
    for idx in 0..8 {
        if !drho.c[idx].is_zero() {
            return Err(Error::NotClosed { monomial: crate::algebra::MONOMIAL_NAMES[idx] });
        }
    }

    let m = grid.m.max(3 * form_band(rho) as usize + 1);
    let g = TorusGrid::new(m);
    let q = CompiledScalar::compile(&quadratic_form(rho));
    let mut min_abs = f64::INFINITY;
    let mut sign = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let v = q.eval(&g.node(i, j, k));
                if v.abs() < margin || (sign != 0.0 && v.signum() != sign) {
                    return Err(Error::NullAtSample { point: [i, j, k], value: v, margin });
                }
                sign = v.signum();
                min_abs = min_abs.min(v.abs());
            }
        }
    }
    let sign = if sign > 0.0 { SpinorSign::Positive } else { SpinorSign::Negative };
    Ok(G22Structure {
        rho: rho.clone(),
        cert: ValidationCert { grid_m: m, margin, min_abs_q: min_abs, sign },
        cls: cohomology_class(rho),
    })
}

/// Normalize a structure with nonzero scalar part by the closed field
/// `B = rho2/rho0, A = rho1/rho0`. The transformed spinor is exactly
/// `rho0 + (1/rho0)(rho0 rho3 - rho1 ^ rho2)`, with no degree-1 or
/// degree-2 part; the quadratic form is preserved pointwise.
pub fn normalize(s: &G22Structure) -> Result<(BaField, FormField3), Error> {
    let rho0 = s.rho.c[0].as_constant().expect("validated scalar part is constant");
    if Zero::is_zero(&rho0) {
        return Err(Error::ZeroRho0);
    }
    let inv = rho0.recip();
    let b: [TrigScalar; 3] = std::array::from_fn(|i| s.rho.c[4 + i].scale(&inv));
    let a: [TrigScalar; 3] = std::array::from_fn(|i| s.rho.c[1 + i].scale(&inv));
    let field = BaField::new(b, a);
    let out = field.act_spinor(&s.rho);

    debug_assert!(out.degree_part(1).is_zero() && out.degree_part(2).is_zero());
    debug_assert_eq!(
        out.c[7],
        (s.rho.c[0].clone() * s.rho.c[7].clone()
            - FormField3::one_form(s.rho.one_form_part())
                .wedge(&FormField3::two_form(s.rho.two_form_part()))
                .c[7]
                .clone())
        .scale(&inv)
    );
    Ok((field, out))
}

/// Sampled fibration vector field of a structure with vanishing scalar part.
#[derive(Clone, Debug)]
pub struct FibrationSamples {
    pub grid: TorusGrid,
    /// Row-major over grid nodes, last axis fastest.
    pub x: Vec<[f64; 3]>,
    /// Sup over nodes of the defect in `i_X rho1 = 1` and `i_X rho2 = 0`.
    pub max_residual: f64,
}

/// At each grid node solve `i_X rho2 = 0, i_X rho1 = 1`; the solution is
/// unique because `rho1 ^ rho2` is nowhere zero, namely `X = v / (rho1 . v)`
/// where `v` is the vector with `i_v d123 = rho2`.
pub fn fibration_vector(s: &G22Structure, grid: &TorusGrid) -> Result<FibrationSamples, Error> {
    if !s.rho.c[0].is_zero() {
        return Err(Error::NotAdapted {
            reason: "fibration vector needs a vanishing scalar part".into(),
        });
    }
    let compiled = CompiledForm::compile(&s.rho);
    let mut out = Vec::with_capacity(grid.len());
    let mut max_residual = 0.0f64;
    for p in grid.nodes() {
        let val = compiled.eval(&p);
        let a = [val.c[1], val.c[2], val.c[3]];
        let b = [val.c[4], val.c[5], val.c[6]];
        let v = [b[2], -b[1], b[0]];
        let s_val = a[0] * v[0] + a[1] * v[1] + a[2] * v[2];
        if s_val.abs() < 1e-12 {
            return Err(Error::SingularSystem {
                detail: format!("fibration system singular at {p:?}: rho1^rho2 = {s_val:e}"),
            });
        }
        let x = [v[0] / s_val, v[1] / s_val, v[2] / s_val];
        let pair = a[0] * x[0] + a[1] * x[1] + a[2] * x[2];
        let hook = [
            -b[0] * x[1] - b[1] * x[2],
            b[0] * x[0] - b[2] * x[2],
            b[1] * x[0] + b[2] * x[1],
        ];
        let res = (pair - 1.0)
            .abs()
            .max(hook[0].abs())
            .max(hook[1].abs())
            .max(hook[2].abs());
        max_residual = max_residual.max(res);
        out.push(x);
    }
    Ok(FibrationSamples { grid: *grid, x: out, max_residual })
}

/// `rho = dx_axis + scale * (fiber volume)`, the structure of the torus as
/// a mapping torus of `T^2` by the identity; `axis` is 0-based.
pub fn mapping_torus_structure(scale: &Rat, axis: usize) -> Result<G22Structure, Error> {
    if Zero::is_zero(scale) {
        return Err(Error::ZeroScale);
    }
    let mut rho = FormField3::zero();
    rho.c[1 + axis] = TrigScalar::one();
    let fiber_idx = match axis {
        0 => 6, // d23
        1 => 5, // d13
        2 => 4, // d12
        _ => panic!("torus has 3 axes"),
    };
    rho.c[fiber_idx] = TrigScalar::constant(scale.clone());
    validate(&rho, &TorusGrid::new(4), rat_to_margin(scale))
}

fn rat_to_margin(scale: &Rat) -> f64 {
    crate::algebra::rat_to_f64(&scale.abs())
}

/// For a structure with vanishing scalar part, `rho2 + rho1 ^ dtheta` is a
/// symplectic form on the product with a circle iff its square
/// `2 rho1 ^ rho2 ^ dtheta` is nowhere zero; that reduces to sampling the
/// top coefficient of `rho1 ^ rho2`.
pub fn product_symplectic_check(rho: &FormField3, grid: &TorusGrid, margin: f64) -> bool {
    if !rho.c[0].is_zero() {
        return false;
    }
    let top = FormField3::one_form(rho.one_form_part())
        .wedge(&FormField3::two_form(rho.two_form_part()))
        .c[7]
        .clone();
    let compiled = CompiledScalar::compile(&top);
    let mut sign = 0.0f64;
    for p in grid.nodes() {
        let v = compiled.eval(&p);
        if v.abs() < margin || (sign != 0.0 && v.signum() != sign) {
            return false;
        }
        sign = v.signum();
    }
    true
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConeResult {
    pub in_cone: bool,
    pub witness: String,
}

/// Cone test on a cohomology vector. With `h0 != 0` the condition is
/// `h0 h3 - h1.h2 > 0`; with `h0 = 0` it is `h1 != 0` and `h1.h2 < 0`
/// (every nonzero degree-1 class here is fibered), `h3` unconstrained.
pub fn cone_membership(c: &CohomologyVector) -> ConeResult {
    let cup = c.cup12();
    if !Zero::is_zero(&c.h0) {
        let omega = &c.h0 * &c.h3 - &cup;
        ConeResult {
            in_cone: omega.is_positive(),
            witness: format!("h0*h3 - h1.h2 = {omega}"),
        }
    } else if c.h1.iter().all(Zero::is_zero) {
        ConeResult { in_cone: false, witness: "h0 = 0 and h1 = 0".into() }
    } else {
        ConeResult {
            in_cone: cup.is_negative(),
            witness: format!("h0 = 0, h1 != 0, h1.h2 = {cup}"),
        }
    }
}

/// Constant-coefficient representative of an in-cone class with `h0 != 0`:
/// `rho' = h0 + h1 + h2 + (1/h0)(omega + h1.h2) d123` with
/// `omega = h0 h3 - h1.h2`, so the quadratic form is the constant
/// `2 omega > 0` and the class of `rho'` is the input.
pub fn cone_representative(c: &CohomologyVector) -> Result<G22Structure, Error> {
    if Zero::is_zero(&c.h0) {
        return Err(Error::NotInCone {
            reason: "representative construction needs h0 != 0".into(),
        });
    }
    let verdict = cone_membership(c);
    if !verdict.in_cone {
        return Err(Error::NotInCone { reason: verdict.witness });
    }
    let cup = c.cup12();
    let omega = &c.h0 * &c.h3 - &cup;
    let top = (&omega + &cup) / &c.h0;
    let mut rho = Form3::scalar(c.h0.clone());
    rho = rho.add(&Form3::one_form(c.h1.clone()));
    rho = rho.add(&Form3::two_form(c.h2.clone()));
    rho = rho.add(&Form3::three_form(top));
    let margin = crate::algebra::rat_to_f64(&omega);
    validate(&constant_form(&rho), &TorusGrid::new(2), margin)
}
