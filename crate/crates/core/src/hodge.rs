//! Hodge theory of the flat metric: star, codifferential, Laplacian, Green
//! operator, harmonic projection, and the L2 pairing, all exact on
//! trigonometric polynomials (the Laplacian is diagonal on Fourier modes
//! with rational multipliers). Also the fiberwise operators for the torus
//! seen as a T^2 bundle over a circle coordinate.

use num_bigint::BigInt;

use crate::algebra::Rat;
use crate::error::Error;
use crate::fields::{constant_form, ext_d, mean_form, FormField3};
use crate::trig::TrigScalar;

/// Hodge star of the flat metric with orientation `d123`:
/// `*1 = d123, *d1 = d23, *d2 = -d13, *d3 = d12`, and `** = id` in every
/// degree (odd dimension).
pub fn star(phi: &FormField3) -> FormField3 {
    let c = &phi.c;
    FormField3 {
        c: [
            c[7].clone(),
            c[6].clone(),
            -c[5].clone(),
            c[4].clone(),
            c[3].clone(),
            -c[2].clone(),
            c[1].clone(),
            c[0].clone(),
        ],
    }
}

/// Codifferential, the L2 adjoint of `d`: on k-forms `(-1)^k * d *`.
pub fn codiff(phi: &FormField3) -> FormField3 {
    let mut out = FormField3::zero();
    for k in 0..4u32 {
        let part = phi.degree_part(k);
        if part.is_zero() {
            continue;
        }
        let sds = star(&ext_d(&star(&part)));
        out = if k % 2 == 0 { out.add(&sds) } else { out.sub(&sds) };
    }
    out
}

/// Hodge Laplacian `d d* + d* d`; acts on each Fourier mode as
/// multiplication by `|k|^2`.
pub fn laplacian(phi: &FormField3) -> FormField3 {
    ext_d(&codiff(phi)).add(&codiff(&ext_d(phi)))
}

/// Green operator: inverts the Laplacian on mean-free modes and annihilates
/// constants, so `laplacian(green(phi)) = phi - harmonic_proj(phi)`.
pub fn green(phi: &FormField3) -> FormField3 {
    phi.map(|c| {
        c.map_modes(|mode| {
            let n2 = mode.freq_norm2();
            if n2 == 0 {
                None
            } else {
                Some(Rat::new(BigInt::from(1), BigInt::from(n2)))
            }
        })
    })
}

/// Projection onto harmonic (constant-coefficient) forms.
pub fn harmonic_proj(phi: &FormField3) -> FormField3 {
    constant_form(&mean_form(phi))
}

/// L2 inner product normalized by the torus volume: the mean of the
/// top coefficient of `a ^ *b`. Degrees pair diagonally.
pub fn l2_pair(a: &FormField3, b: &FormField3) -> Rat {
    a.wedge(&star(b)).c[7].mean()
}

/// Mean over the `T^2` fiber transverse to the base coordinate `axis`: the
/// fiber-volume component of a 2-form, restricted to modes constant along
/// the fiber. The result depends on the base coordinate only.
pub fn fiber_integrate(two_form: &[TrigScalar; 3], axis: usize) -> TrigScalar {
    let (j, k) = fiber_coords(axis);
    two_form[2 - axis].map_modes(|mode| {
        if mode.k[j] == 0 && mode.k[k] == 0 {
            Some(crate::algebra::rat_int(1))
        } else {
            None
        }
    })
}

/// The two fiber axes transverse to `axis`, in increasing order.
pub fn fiber_coords(axis: usize) -> (usize, usize) {
    match axis {
        0 => (1, 2),
        1 => (0, 2),
        2 => (0, 1),
        _ => panic!("torus has 3 axes"),
    }
}

/// Fiberwise primitive: given a 2-form whose fiber component `u` has zero
/// mean on every fiber, produce a 1-form `beta` tangent to the fibers with
/// `(d beta)` matching `u` on the fiber component. Solves the fiber Laplace
/// equation mode by mode.
pub fn fiberwise_hodge(two_form: &[TrigScalar; 3], axis: usize) -> Result<[TrigScalar; 3], Error> {
    let (j, k) = fiber_coords(axis);
    let u = &two_form[2 - axis];
    for (mode, _) in u.terms() {
        if mode.k[j] == 0 && mode.k[k] == 0 {
            return Err(Error::NonzeroFiberMean);
        }
    }
    let w = u.map_modes(|mode| {
        let n2 = (mode.k[j] as i64) * (mode.k[j] as i64) + (mode.k[k] as i64) * (mode.k[k] as i64);
        Some(Rat::new(BigInt::from(1), BigInt::from(n2)))
    });
    let mut beta = [TrigScalar::zero(), TrigScalar::zero(), TrigScalar::zero()];
    beta[j] = w.deriv(k);
    beta[k] = -w.deriv(j);
    Ok(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rat, rat_int, MixedForm};
    use crate::fields::d_one_form;
    use crate::trig::Parity;
    use proptest::prelude::*;

    #[test]
    fn star_table_and_involution() {
        for idx in 0..8 {
            let m = FormField3::monomial(idx, TrigScalar::one());
            let once = star(&m);
            // *1 = d123, *d1 = d23, *d2 = -d13, *d3 = d12
            let (want_idx, sign) = [(7, 1), (6, 1), (5, -1), (4, 1), (3, 1), (2, -1), (1, 1), (0, 1)][idx];
            let want = FormField3::monomial(want_idx, TrigScalar::constant(rat_int(sign)));
            assert_eq!(once, want, "star of monomial {idx}");
            assert_eq!(star(&once), m, "star squared on monomial {idx}");
        }
    }

    #[test]
    fn laplacian_is_frequency_multiplier() {
        // Delta(cos(k.x) dI) = |k|^2 cos(k.x) dI
        for idx in [0, 2, 5, 7] {
            let k = [1, -2, 0];
            let phi = FormField3::monomial(idx, TrigScalar::cos(k, rat_int(1)));
            assert_eq!(laplacian(&phi), phi.scale(&TrigScalar::constant(rat_int(5))));
        }
        let constant = FormField3::monomial(4, TrigScalar::one());
        assert!(laplacian(&constant).is_zero());
    }

    #[test]
    fn fiber_integrate_examples() {
        let d23 = |c: TrigScalar| [TrigScalar::zero(), TrigScalar::zero(), c];
        assert_eq!(fiber_integrate(&d23(TrigScalar::one()), 0), TrigScalar::one());
        let cosx1 = TrigScalar::cos([1, 0, 0], rat_int(1));
        assert_eq!(fiber_integrate(&d23(cosx1.clone()), 0), cosx1);
        // modes varying along the fiber drop out
        let cosx2 = TrigScalar::cos([0, 1, 0], rat_int(1));
        assert!(fiber_integrate(&d23(cosx2), 0).is_zero());
        // other components are transverse to the fiber
        let d12 = [TrigScalar::one(), TrigScalar::zero(), TrigScalar::zero()];
        assert!(fiber_integrate(&d12, 0).is_zero());
        assert_eq!(fiber_integrate(&d12, 2), TrigScalar::one());
    }

    #[test]
    fn fiberwise_hodge_example_and_contract() {
        // cos x2 d23 over base axis 1 has primitive sin x2 d3
        let alpha = [TrigScalar::zero(), TrigScalar::zero(), TrigScalar::cos([0, 1, 0], rat_int(1))];
        let beta = fiberwise_hodge(&alpha, 0).unwrap();
        assert!(beta[0].is_zero() && beta[1].is_zero());
        assert_eq!(beta[2], TrigScalar::sin([0, 1, 0], rat_int(1)));
        // full exterior derivative recovers the input here
        assert_eq!(d_one_form(&beta), alpha);

        // base-dependent fiber data still matches on the fiber component
        let u = TrigScalar::cos([2, 1, 0], rat(1, 3)) + TrigScalar::sin([1, 1, 1], rat_int(2));
        let alpha = [TrigScalar::zero(), TrigScalar::zero(), u.clone()];
        let beta = fiberwise_hodge(&alpha, 0).unwrap();
        assert_eq!(d_one_form(&beta)[2], u);

        // nonzero fiber mean is rejected
        let bad = [TrigScalar::zero(), TrigScalar::zero(), TrigScalar::cos([1, 0, 0], rat_int(1))];
        assert!(matches!(fiberwise_hodge(&bad, 0), Err(Error::NonzeroFiberMean)));
    }

    fn arb_trig() -> impl Strategy<Value = TrigScalar> {
        proptest::collection::vec(
            (
                proptest::array::uniform3(-2i32..3),
                prop_oneof![Just(Parity::Cos), Just(Parity::Sin)],
                (-3i64..4, 1i64..3),
            ),
            0..3,
        )
        .prop_map(|terms| {
            TrigScalar::from_terms(terms.into_iter().map(|(k, p, (n, d))| (k, p, rat(n, d))))
        })
    }

    fn arb_field() -> impl Strategy<Value = FormField3> {
        proptest::array::uniform8(arb_trig()).prop_map(|c| MixedForm { c })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn star_is_an_involution(phi in arb_field()) {
            prop_assert_eq!(star(&star(&phi)), phi);
        }

        #[test]
        fn codiff_is_adjoint_to_d(a in arb_field(), b in arb_field()) {
            prop_assert_eq!(l2_pair(&ext_d(&a), &b), l2_pair(&a, &codiff(&b)));
        }

        #[test]
        fn codiff_squares_to_zero(phi in arb_field()) {
            prop_assert!(codiff(&codiff(&phi)).is_zero());
        }

        #[test]
        fn hodge_decomposition_is_exact(phi in arb_field()) {
            let g = green(&phi);
            let reassembled = harmonic_proj(&phi)
                .add(&ext_d(&codiff(&g)))
                .add(&codiff(&ext_d(&g)));
            prop_assert_eq!(reassembled, phi.clone());
            prop_assert_eq!(laplacian(&g), phi.sub(&harmonic_proj(&phi)));
        }

        #[test]
        fn l2_pair_is_symmetric(a in arb_field(), b in arb_field()) {
            prop_assert_eq!(l2_pair(&a, &b), l2_pair(&b, &a));
        }
    }
}
