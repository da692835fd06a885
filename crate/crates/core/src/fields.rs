//! Global fields on the torus: mixed forms, generalized vector fields, and
//! `exp(B + A)` fields with trigonometric-polynomial coefficients, plus the
//! exterior derivative and the harmonic (constant-mode) projection that
//! computes cohomology classes.

use std::array;

use crate::algebra::{rat_to_f64, BaTransform, GenVec, MixedForm, Rat};
use crate::algebra::{wedge_sign, IDX_OF_MASK, MASK_OF_IDX};
use crate::clifford::Form3;
use crate::error::Error;
use crate::trig::TrigScalar;

pub type FormField3 = MixedForm<TrigScalar>;
pub type GenVectorField = GenVec<TrigScalar>;
pub type BaField = BaTransform<TrigScalar>;

/// Exterior derivative of a mixed form field.
pub fn ext_d(phi: &FormField3) -> FormField3 {
    let mut out = FormField3::zero();
    for idx in 0..8 {
        if phi.c[idx].is_zero() {
            continue;
        }
        let mask = MASK_OF_IDX[idx];
        for axis in 0..3u8 {
            let df = phi.c[idx].deriv(axis as usize);
            if df.is_zero() {
                continue;
            }
            if let Some(s) = wedge_sign(1 << axis, mask) {
                let target = IDX_OF_MASK[(mask | (1 << axis)) as usize];
                let term = if s > 0 { df } else { -df };
                out.c[target] = out.c[target].clone() + term;
            }
        }
    }
    out
}

/// Gradient components of a scalar field.
pub fn grad(f: &TrigScalar) -> [TrigScalar; 3] {
    array::from_fn(|i| f.deriv(i))
}

/// `d` of a 1-form `(x1, x2, x3)` as 2-form components `(c12, c13, c23)`.
pub fn d_one_form(xi: &[TrigScalar; 3]) -> [TrigScalar; 3] {
    [
        xi[1].deriv(0) - xi[0].deriv(1),
        xi[2].deriv(0) - xi[0].deriv(2),
        xi[2].deriv(1) - xi[1].deriv(2),
    ]
}

/// `d` of a 2-form `(c12, c13, c23)`, as the `d123` coefficient.
pub fn d_two_form(b: &[TrigScalar; 3]) -> TrigScalar {
    b[0].deriv(2) - b[1].deriv(1) + b[2].deriv(0)
}

pub fn is_closed(phi: &FormField3) -> bool {
    ext_d(phi).is_zero()
}

/// Constant embedding of a pointwise form as a field.
pub fn constant_form(f: &Form3) -> FormField3 {
    f.map(|c| TrigScalar::constant(c.clone()))
}

/// Componentwise constant Fourier mode. For a closed field this is the
/// harmonic representative of its cohomology class.
pub fn mean_form(phi: &FormField3) -> Form3 {
    phi.map(|c| c.mean())
}

pub fn form_band(phi: &FormField3) -> u32 {
    phi.c.iter().map(TrigScalar::band).max().unwrap_or(0)
}

pub fn genvec_band(u: &GenVectorField) -> u32 {
    u.x.iter()
        .chain(u.xi.iter())
        .chain(std::iter::once(&u.lam))
        .map(TrigScalar::band)
        .max()
        .unwrap_or(0)
}

pub fn check_band_cap(band: u32, cap: u32) -> Result<(), Error> {
    if band > cap {
        Err(Error::BandCapExceeded { band, cap })
    } else {
        Ok(())
    }
}

pub fn eval_form(phi: &FormField3, x: &[f64; 3]) -> MixedForm<f64> {
    phi.map(|c| c.eval(x))
}

pub fn eval_genvec(u: &GenVectorField, x: &[f64; 3]) -> GenVec<f64> {
    GenVec {
        x: array::from_fn(|i| u.x[i].eval(x)),
        xi: array::from_fn(|i| u.xi[i].eval(x)),
        lam: u.lam.eval(x),
    }
}

pub fn form_to_f64(phi: &Form3) -> MixedForm<f64> {
    phi.map(rat_to_f64)
}

/// Largest absolute coefficient over all monomials, with rational
/// coefficients mapped through `f64`; a cheap sup-norm bound.
pub fn form_coeff_sup(phi: &FormField3) -> f64 {
    let mut sup: f64 = 0.0;
    for comp in &phi.c {
        let mut total = 0.0f64;
        for (_, coeff) in comp.terms() {
            total += rat_to_f64(coeff).abs();
        }
        sup = sup.max(total);
    }
    sup
}

/// Exact evaluation of a field of rationals is only possible for constants;
/// this extracts them, or fails with the offending monomial name.
pub fn require_constant_form(phi: &FormField3) -> Result<Form3, &'static str> {
    let mut out = Form3::zero();
    for idx in 0..8 {
        match phi.c[idx].as_constant() {
            Some(c) => out.c[idx] = c,
            None => return Err(crate::algebra::MONOMIAL_NAMES[idx]),
        }
    }
    Ok(out)
}

/// Scale every component by a rational constant.
pub fn form_scale_rat(phi: &FormField3, s: &Rat) -> FormField3 {
    phi.map(|c| c.scale(s))
}
