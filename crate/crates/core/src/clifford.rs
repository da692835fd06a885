//! Spinor-level operations at a point: the action matrix of a mixed form,
//! annihilator spaces, the transport equation solve `u . rho = -psi`, and
//! 7x7 matrix forms of infinitesimal and exponentiated symmetries.

use std::array;

use num_traits::Signed;

use crate::algebra::{
    chevalley_pair, clifford_act, quadratic_form, rat_int, Coeff, GenVec, MixedForm, Rat,
};
use crate::error::Error;
use crate::linalg::{exp_nilpotent, kernel_basis, mat_identity, solve_exact, RatMat, SolveOutcome};

/// Mixed form with exact rational coefficients.
pub type Form3 = MixedForm<Rat>;
/// Generalized vector with exact rational coefficients.
pub type GenVector = GenVec<Rat>;

/// Sign class of the invariant quadratic form on spinors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpinorSign {
    Null,
    Positive,
    Negative,
}

pub fn classify_spinor(phi: &Form3) -> SpinorSign {
    let q = quadratic_form(phi);
    if q.is_zero() {
        SpinorSign::Null
    } else if q.is_positive() {
        SpinorSign::Positive
    } else {
        SpinorSign::Negative
    }
}

/// 8x7 matrix of `u -> u . rho` on the monomial basis; column `j` is the
/// action of the j-th coordinate section.
pub fn clifford_matrix<T: Coeff>(rho: &MixedForm<T>) -> [[T; 7]; 8] {
    let cols: [MixedForm<T>; 7] = array::from_fn(|j| clifford_act(&GenVec::basis(j), rho));
    array::from_fn(|i| array::from_fn(|j| cols[j].c[i].clone()))
}

/// Basis of the annihilator `{u : u . phi = 0}`. Trivial when `phi` is
/// non-null; a nonzero isotropic space when `phi` is null and nonzero.
pub fn annihilator(phi: &Form3) -> Vec<GenVector> {
    let m = clifford_matrix(phi);
    let mat: RatMat = m.iter().map(|row| row.to_vec()).collect();
    kernel_basis(&mat)
        .into_iter()
        .map(|v| {
            GenVector::new(
                [v[0].clone(), v[1].clone(), v[2].clone()],
                [v[3].clone(), v[4].clone(), v[5].clone()],
                v[6].clone(),
            )
        })
        .collect()
}

/// Solve `u . rho = -psi` for the unique generalized vector `u`.
///
/// Requires `rho` non-null (the action matrix then has full rank 7, with
/// image the pairing-orthogonal complement of `rho`) and `<rho, psi> = 0`.
pub fn pointwise_solve(rho: &Form3, psi: &Form3) -> Result<GenVector, Error> {
    if quadratic_form(rho).is_zero() {
        return Err(Error::NullSpinor);
    }
    let pairing = chevalley_pair(rho, psi);
    if !pairing.is_zero() {
        return Err(Error::NotPerp { pairing: pairing.to_string() });
    }
    let m = clifford_matrix(rho);
    let mat: RatMat = m.iter().map(|row| row.to_vec()).collect();
    let rhs: Vec<Rat> = psi.c.iter().map(|c| -c.clone()).collect();
    match solve_exact(&mat, &rhs) {
        SolveOutcome::Unique(u) => Ok(GenVector::new(
            [u[0].clone(), u[1].clone(), u[2].clone()],
            [u[3].clone(), u[4].clone(), u[5].clone()],
            u[6].clone(),
        )),
        SolveOutcome::RankDeficient => Err(Error::SingularSystem {
            detail: "action matrix rank-deficient for non-null spinor".into(),
        }),
        SolveOutcome::Inconsistent => Err(Error::SingularSystem {
            detail: "transport system inconsistent despite zero pairing".into(),
        }),
    }
}

/// Infinitesimal symmetry of the generalized tangent bundle: an endomorphism
/// `E` of the tangent, a 2-form `b`, a bivector `beta`, a 1-form `a`, and a
/// vector `alpha` (2-form and bivector as `(p12, p13, p23)` components).
#[derive(Clone, Debug, PartialEq)]
pub struct SkewGenEndo {
    pub e: [[Rat; 3]; 3],
    pub b: [Rat; 3],
    pub beta: [Rat; 3],
    pub a: [Rat; 3],
    pub alpha: [Rat; 3],
}

impl SkewGenEndo {
    pub fn zero() -> Self {
        SkewGenEndo {
            e: array::from_fn(|_| array::from_fn(|_| rat_int(0))),
            b: array::from_fn(|_| rat_int(0)),
            beta: array::from_fn(|_| rat_int(0)),
            a: array::from_fn(|_| rat_int(0)),
            alpha: array::from_fn(|_| rat_int(0)),
        }
    }

    pub fn from_ba(b: [Rat; 3], a: [Rat; 3]) -> Self {
        SkewGenEndo { b, a, ..Self::zero() }
    }
}

/// Skew matrix of interior multiplication by components `(p12, p13, p23)`.
fn hook_matrix(p: &[Rat; 3]) -> [[Rat; 3]; 3] {
    [
        [rat_int(0), -p[0].clone(), -p[1].clone()],
        [p[0].clone(), rat_int(0), -p[2].clone()],
        [p[1].clone(), p[2].clone(), rat_int(0)],
    ]
}

/// 7x7 matrix of an infinitesimal symmetry on components
/// `(x1..x3, xi1..xi3, lambda)`:
///
/// ```text
/// [ E      beta   -2 alpha ]
/// [ b     -E^T    -2 a     ]
/// [ a      alpha   0       ]
/// ```
///
/// Skew with respect to [`gram_matrix`].
pub fn skew_matrix(s: &SkewGenEndo) -> RatMat {
    let bm = hook_matrix(&s.b);
    let betam = hook_matrix(&s.beta);
    let mut m = vec![vec![rat_int(0); 7]; 7];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = s.e[i][j].clone();
            m[i][3 + j] = betam[i][j].clone();
            m[3 + i][j] = bm[i][j].clone();
            m[3 + i][3 + j] = -s.e[j][i].clone();
        }
        m[i][6] = -(s.alpha[i].clone() + s.alpha[i].clone());
        m[3 + i][6] = -(s.a[i].clone() + s.a[i].clone());
        m[6][i] = s.a[i].clone();
        m[6][3 + i] = s.alpha[i].clone();
    }
    m
}

/// 7x7 matrix of the vector action of `exp(B + A)`; equals
/// `exp(skew_matrix)` of the matching infinitesimal element.
pub fn ba_matrix(b: &[Rat; 3], a: &[Rat; 3]) -> RatMat {
    let mut m = mat_identity(7);
    let bm = hook_matrix(b);
    for i in 0..3 {
        for j in 0..3 {
            m[3 + i][j] = bm[i][j].clone() - &a[i] * &a[j];
        }
        m[3 + i][6] = -(a[i].clone() + a[i].clone());
        m[6][i] = a[i].clone();
    }
    m
}

/// Exact exponential of an infinitesimal `(b, a)` element, through the
/// terminating matrix series.
pub fn ba_matrix_by_exp(b: &[Rat; 3], a: &[Rat; 3]) -> RatMat {
    let n = skew_matrix(&SkewGenEndo::from_ba(b.clone(), a.clone()));
    exp_nilpotent(&n, 8).expect("pure (b, a) generators cube to zero")
}

/// Gram matrix of the signature-(4,3) inner product on components
/// `(x, xi, lambda)`.
pub fn gram_matrix() -> RatMat {
    let mut g = vec![vec![rat_int(0); 7]; 7];
    let half = Rat::new(1.into(), 2.into());
    for i in 0..3 {
        g[i][3 + i] = half.clone();
        g[3 + i][i] = half.clone();
    }
    g[6][6] = rat_int(1);
    g
}

/// 8x8 Gram matrix of the pairing on the monomial basis; signature (4,4).
pub fn pairing_gram() -> RatMat {
    let monomials: Vec<Form3> = (0..8).map(|i| MixedForm::monomial(i, rat_int(1))).collect();
    (0..8)
        .map(|i| (0..8).map(|j| chevalley_pair(&monomials[i], &monomials[j])).collect())
        .collect()
}

/// `u . rho` meant as a consistency check against the matrix route.
pub fn apply_action_matrix(m: &[[Rat; 7]; 8], u: &GenVector) -> Form3 {
    let comps: [Rat; 7] = array::from_fn(|j| u.component(j).clone());
    MixedForm {
        c: array::from_fn(|i| {
            let mut s = rat_int(0);
            for j in 0..7 {
                s += &m[i][j] * &comps[j];
            }
            s
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{inner, rat, BaTransform};
    use crate::linalg::{mat_add, mat_mul, mat_transpose, mat_vec, signature};
    use proptest::prelude::*;

    fn d(i: usize) -> Form3 {
        MixedForm::monomial(i, rat_int(1))
    }

    fn ones(xs: [i64; 3]) -> [Rat; 3] {
        [rat_int(xs[0]), rat_int(xs[1]), rat_int(xs[2])]
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify_spinor(&MixedForm::scalar(rat_int(1)).add(&d(7))), SpinorSign::Positive);
        assert_eq!(classify_spinor(&d(1).add(&d(6))), SpinorSign::Negative);
        assert_eq!(classify_spinor(&MixedForm::scalar(rat_int(1))), SpinorSign::Null);
    }

    #[test]
    fn annihilator_of_the_unit_spinor() {
        // u . 1 = xi + lambda, so the annihilator is the tangent space
        let ann = annihilator(&MixedForm::scalar(rat_int(1)));
        assert_eq!(ann.len(), 3);
        for (i, u) in ann.iter().enumerate() {
            let mut want = GenVector::zero();
            want.x[i] = rat_int(1);
            assert_eq!(u, &want);
        }
    }

    #[test]
    fn annihilator_trivial_for_non_null() {
        assert!(annihilator(&MixedForm::scalar(rat_int(1)).add(&d(7))).is_empty());
        assert!(annihilator(&d(1).add(&d(6))).is_empty());
    }

    #[test]
    fn solve_volume_shift() {
        // rho = 1 + d123, psi = 2 + d1 + d23 - 2 d123: u = -(e1 + d1 + 2)
        let rho = MixedForm::scalar(rat_int(1)).add(&d(7));
        let psi = MixedForm::scalar(rat_int(2))
            .add(&d(1))
            .add(&d(6))
            .sub(&d(7).scale(&rat_int(2)));
        let u = pointwise_solve(&rho, &psi).unwrap();
        assert_eq!(u.x, ones([-1, 0, 0]));
        assert_eq!(u.xi, ones([-1, 0, 0]));
        assert_eq!(u.lam, rat_int(-2));
        assert_eq!(clifford_act(&u, &rho), psi.neg());
    }

    #[test]
    fn solve_negative_line() {
        // rho = d1 + d23, psi = d123: u = -d1
        let rho = d(1).add(&d(6));
        let u = pointwise_solve(&rho, &d(7)).unwrap();
        assert!(u.x.iter().all(|t| t.is_zero()));
        assert_eq!(u.xi, ones([-1, 0, 0]));
        assert!(u.lam.is_zero());
    }

    #[test]
    fn solve_rejects_null_and_non_perp() {
        let null = MixedForm::scalar(rat_int(1)).add(&d(1));
        assert!(matches!(pointwise_solve(&null, &d(7)), Err(Error::NullSpinor)));
        let rho = MixedForm::scalar(rat_int(1)).add(&d(7));
        let bad = MixedForm::scalar(rat_int(1));
        assert!(matches!(pointwise_solve(&rho, &bad), Err(Error::NotPerp { .. })));
    }

    #[test]
    fn pairing_gram_signature_is_split() {
        assert_eq!(signature(&pairing_gram()), (4, 4, 0));
    }

    #[test]
    fn gram_signature_is_4_3() {
        assert_eq!(signature(&gram_matrix()), (4, 3, 0));
    }

    #[test]
    fn ba_matrix_matches_exponential_and_action() {
        let b = [rat_int(2), rat_int(-1), rat_int(3)];
        let a = [rat_int(1), rat_int(0), rat_int(-2)];
        assert_eq!(ba_matrix(&b, &a), ba_matrix_by_exp(&b, &a));
        let g = BaTransform::new(b.clone(), a.clone());
        let u = GenVector::new(ones([1, -2, 0]), ones([0, 1, 1]), rat_int(2));
        let comps: Vec<Rat> = (0..7).map(|i| u.component(i).clone()).collect();
        let image = mat_vec(&ba_matrix(&b, &a), &comps);
        let direct = g.act_vector(&u);
        for i in 0..7 {
            assert_eq!(&image[i], direct.component(i));
        }
    }

    #[test]
    fn skew_matrix_is_gram_skew() {
        let s = SkewGenEndo {
            e: [
                ones([1, 2, 0]),
                ones([0, -1, 3]),
                ones([2, 0, 1]),
            ],
            b: ones([1, -2, 3]),
            beta: ones([0, 1, -1]),
            a: ones([2, 0, 1]),
            alpha: ones([-1, 1, 0]),
        };
        let m = skew_matrix(&s);
        let g = gram_matrix();
        let sym = mat_add(&mat_mul(&mat_transpose(&m), &g), &mat_mul(&g, &m));
        assert!(crate::linalg::mat_is_zero(&sym));
    }

    fn arb_rat() -> impl Strategy<Value = Rat> {
        (-6i64..7, 1i64..4).prop_map(|(n, d)| rat(n, d))
    }

    fn arb_form() -> impl Strategy<Value = Form3> {
        proptest::array::uniform8(arb_rat()).prop_map(|c| MixedForm { c })
    }

    fn arb_genvec() -> impl Strategy<Value = GenVector> {
        (
            proptest::array::uniform3(arb_rat()),
            proptest::array::uniform3(arb_rat()),
            arb_rat(),
        )
            .prop_map(|(x, xi, lam)| GenVector::new(x, xi, lam))
    }

    fn arb_three() -> impl Strategy<Value = [Rat; 3]> {
        proptest::array::uniform3(arb_rat())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn clifford_relation(u in arb_genvec(), phi in arb_form()) {
            let twice = clifford_act(&u, &clifford_act(&u, &phi));
            prop_assert_eq!(twice, phi.scale(&inner(&u, &u)));
        }

        #[test]
        fn pairing_symmetric_and_invariant(
            phi in arb_form(),
            psi in arb_form(),
            b in arb_three(),
            a in arb_three(),
        ) {
            prop_assert_eq!(chevalley_pair(&phi, &psi), chevalley_pair(&psi, &phi));
            let g = BaTransform::new(b, a);
            prop_assert_eq!(
                chevalley_pair(&g.act_spinor(&phi), &g.act_spinor(&psi)),
                chevalley_pair(&phi, &psi)
            );
        }

        #[test]
        fn action_is_equivariant(
            u in arb_genvec(),
            phi in arb_form(),
            b in arb_three(),
            a in arb_three(),
        ) {
            // sigma(g)(u . phi) = (g u) . (sigma(g) phi)
            let g = BaTransform::new(b, a);
            let lhs = g.act_spinor(&clifford_act(&u, &phi));
            let rhs = clifford_act(&g.act_vector(&u), &g.act_spinor(&phi));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn matrix_route_matches_direct_action(u in arb_genvec(), phi in arb_form()) {
            let m = clifford_matrix(&phi);
            prop_assert_eq!(apply_action_matrix(&m, &u), clifford_act(&u, &phi));
        }

        #[test]
        fn exp_of_ba_generator(b in arb_three(), a in arb_three()) {
            prop_assert_eq!(ba_matrix(&b, &a), ba_matrix_by_exp(&b, &a));
        }

        #[test]
        fn ba_vector_action_preserves_inner(
            u in arb_genvec(),
            v in arb_genvec(),
            b in arb_three(),
            a in arb_three(),
        ) {
            let g = BaTransform::new(b, a);
            prop_assert_eq!(inner(&g.act_vector(&u), &g.act_vector(&v)), inner(&u, &v));
        }

        #[test]
        fn annihilator_dichotomy(phi in arb_form()) {
            let ann = annihilator(&phi);
            if !quadratic_form(&phi).is_zero() {
                prop_assert!(ann.is_empty());
            } else {
                for u in &ann {
                    prop_assert!(clifford_act(u, &phi).is_zero());
                    for v in &ann {
                        prop_assert!(inner(u, v).is_zero());
                    }
                }
                if !phi.is_zero() {
                    prop_assert!(!ann.is_empty());
                }
            }
        }

        #[test]
        fn solve_round_trip(seed in arb_form(), u in arb_genvec()) {
            // shift the scalar head until the spinor is non-null
            let mut rho = seed;
            while quadratic_form(&rho).is_zero() {
                rho.c[0] += rat_int(1);
                rho.c[7] += rat_int(1);
            }
            let psi = clifford_act(&u, &rho).neg();
            let got = pointwise_solve(&rho, &psi).unwrap();
            prop_assert_eq!(got, u);
        }
    }
}
