//! Brackets on sections of `T + T* + 1` over the torus: the Dorfman bracket
//! (a Leibniz bracket characterized by its action on spinors), its
//! antisymmetrization the Courant bracket, the spinor Lie derivative, and
//! the defect formula measuring how far an `exp(B + A)` field is from a
//! bracket symmetry.

use std::array;

use crate::algebra::{dot3, Coeff};
use crate::fields::{ext_d, grad, BaField, FormField3, GenVectorField};
use crate::trig::TrigScalar;

/// Lie bracket of vector fields.
pub fn lie_vector(x: &[TrigScalar; 3], y: &[TrigScalar; 3]) -> [TrigScalar; 3] {
    array::from_fn(|i| {
        let mut s = TrigScalar::zero();
        for j in 0..3 {
            s = s + x[j].clone() * y[i].deriv(j) - y[j].clone() * x[i].deriv(j);
        }
        s
    })
}

/// Lie derivative of a mixed form along a vector field, via Cartan's
/// formula `i_X d + d i_X`.
pub fn lie_form(x: &[TrigScalar; 3], phi: &FormField3) -> FormField3 {
    ext_d(phi).interior(x).add(&ext_d(&phi.interior(x)))
}

/// Dorfman bracket
/// `[X+xi+l, Y+eta+m] = [X,Y] + (L_X eta - i_Y dxi + 2 m dl) + (i_X dm - i_Y dl)`.
pub fn dorfman(u: &GenVectorField, v: &GenVectorField) -> GenVectorField {
    let dxi = ext_d(&FormField3::one_form(u.xi.clone()));
    let dl = grad(&u.lam);
    let dm = grad(&v.lam);
    let lie_eta = lie_form(&u.x, &FormField3::one_form(v.xi.clone())).one_form_part();
    let iy_dxi = dxi.interior(&v.x).one_form_part();
    let two_m = v.lam.clone() + v.lam.clone();
    let xi = array::from_fn(|i| {
        lie_eta[i].clone() - iy_dxi[i].clone() + two_m.clone() * dl[i].clone()
    });
    GenVectorField {
        x: lie_vector(&u.x, &v.x),
        xi,
        lam: dot3(&u.x, &dm) - dot3(&v.x, &dl),
    }
}

/// Courant bracket, the antisymmetrization of [`dorfman`]:
/// `[X,Y] + (L_X eta - L_Y xi - d(i_X eta - i_Y xi)/2 + m dl - l dm)
///  + (i_X dm - i_Y dl)`.
pub fn courant(u: &GenVectorField, v: &GenVectorField) -> GenVectorField {
    let dl = grad(&u.lam);
    let dm = grad(&v.lam);
    let lie_eta = lie_form(&u.x, &FormField3::one_form(v.xi.clone())).one_form_part();
    let lie_xi = lie_form(&v.x, &FormField3::one_form(u.xi.clone())).one_form_part();
    let pair = dot3(&u.x, &v.xi) - dot3(&v.x, &u.xi);
    let dpair = grad(&pair);
    let xi = array::from_fn(|i| {
        lie_eta[i].clone() - lie_xi[i].clone() - dpair[i].half()
            + v.lam.clone() * dl[i].clone()
            - u.lam.clone() * dm[i].clone()
    });
    GenVectorField {
        x: lie_vector(&u.x, &v.x),
        xi,
        lam: dot3(&u.x, &dm) - dot3(&v.x, &dl),
    }
}

/// Spinor Lie derivative `L_u phi = L_X phi + dxi ^ phi + dl ^ tau(phi)`;
/// satisfies the Cartan-type identity `L_u phi = d(u.phi) + u.(d phi)` and
/// generates [`dorfman`] through
/// `L_u (v.phi) - v.(L_u phi) = [u,v].phi`.
pub fn spinor_lie(u: &GenVectorField, phi: &FormField3) -> FormField3 {
    let dxi = ext_d(&FormField3::one_form(u.xi.clone()));
    let dl = FormField3::one_form(grad(&u.lam));
    lie_form(&u.x, phi).add(&dxi.wedge(phi)).add(&dl.wedge(&phi.tau()))
}

/// Defect of an `exp(B + A)` field as a Courant-bracket symmetry:
/// `[gu, gv] - g[u, v]`, computed directly.
pub fn ba_bracket_defect(g: &BaField, u: &GenVectorField, v: &GenVectorField) -> GenVectorField {
    courant(&g.act_vector(u), &g.act_vector(v)).sub(&g.act_vector(&courant(u, v)))
}

/// Closed form of [`ba_bracket_defect`]: no vector part,
///
/// ```text
/// 1-form: i_Y i_X (dB + A ^ dA) - 2 (i_Y i_X dA) A + 2 l i_Y dA - 2 m i_X dA
/// scalar: i_Y i_X dA
/// ```
///
/// so the field is a symmetry exactly when `dA = 0` and `dB = 0`.
pub fn ba_bracket_defect_formula(
    g: &BaField,
    u: &GenVectorField,
    v: &GenVectorField,
) -> GenVectorField {
    let a_form = FormField3::one_form(g.a.clone());
    let da = ext_d(&a_form);
    let db = ext_d(&FormField3::two_form(g.b.clone()));
    let omega = db.add(&a_form.wedge(&da));
    let iyix_omega = omega.interior(&u.x).interior(&v.x).one_form_part();
    let s = da.interior(&u.x).interior(&v.x).c[0].clone();
    let ix_da = da.interior(&u.x).one_form_part();
    let iy_da = da.interior(&v.x).one_form_part();
    let two_s = s.clone() + s.clone();
    let two_l = u.lam.clone() + u.lam.clone();
    let two_m = v.lam.clone() + v.lam.clone();
    let xi = array::from_fn(|i| {
        iyix_omega[i].clone() - two_s.clone() * g.a[i].clone()
            + two_l.clone() * iy_da[i].clone()
            - two_m.clone() * ix_da[i].clone()
    });
    GenVectorField { x: array::from_fn(|_| TrigScalar::zero()), xi, lam: s }
}
