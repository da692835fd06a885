//! Pointwise algebra of the generalized tangent bundle `T + T* + 1` in
//! dimension 3.
//!
//! A mixed form is stored densely on the monomial basis
//!
//! ```text
//! (1, dx1, dx2, dx3, dx12, dx13, dx23, dx123)
//! ```
//!
//! and a generalized vector as `(x1, x2, x3, xi1, xi2, xi3, lambda)`. The
//! inner product on generalized vectors is
//! `(X+xi+l, Y+eta+m) = (i_X eta + i_Y xi)/2 + l*m`, of signature (4,3); the
//! Clifford action on mixed forms is `u . phi = i_X phi + xi ^ phi + l*tau(phi)`
//! with `tau` the even/odd sign flip. Everything here is generic over the
//! coefficient ring, so the same formulas run over exact rationals,
//! trigonometric polynomials, and grid floats.

use std::array;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational scalar used by the exact layer.
pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Coefficient ring for the generic algebra layer.
pub trait Coeff:
    Clone
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    /// Exact multiplication by 1/2.
    fn half(&self) -> Self;
}

impl Coeff for Rat {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn half(&self) -> Self {
        self / rat_int(2)
    }
}

impl Coeff for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn half(&self) -> Self {
        0.5 * self
    }
}

/// Names of the eight monomials in basis order.
pub const MONOMIAL_NAMES: [&str; 8] = ["1", "d1", "d2", "d3", "d12", "d13", "d23", "d123"];

/// Bitmask of each basis monomial (bit i set = dx_{i+1} present).
pub const MASK_OF_IDX: [u8; 8] = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];

/// Inverse of [`MASK_OF_IDX`].
pub const IDX_OF_MASK: [usize; 8] = [0, 1, 2, 4, 3, 5, 6, 7];

/// Form degree of each basis monomial.
pub const DEGREE_OF_IDX: [u32; 8] = [0, 1, 1, 1, 2, 2, 2, 3];

/// Sign of `d(mask a) ^ d(mask b)`, or `None` when the monomials share a
/// coordinate. The sign counts the transpositions needed to interleave b
/// into a in ascending coordinate order.
pub fn wedge_sign(a: u8, b: u8) -> Option<i8> {
    if a & b != 0 {
        return None;
    }
    let mut inversions = 0u32;
    for i in 0..3u8 {
        if a & (1 << i) != 0 {
            inversions += (b & ((1 << i) - 1)).count_ones();
        }
    }
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

/// A mixed (inhomogeneous) differential form at a point, or with coefficients
/// in any ring `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedForm<T> {
    /// Coefficients in basis order `(1, d1, d2, d3, d12, d13, d23, d123)`.
    pub c: [T; 8],
}

impl<T: Coeff> MixedForm<T> {
    pub fn zero() -> Self {
        MixedForm { c: array::from_fn(|_| T::zero()) }
    }

    pub fn scalar(t: T) -> Self {
        let mut f = Self::zero();
        f.c[0] = t;
        f
    }

    pub fn one_form(xs: [T; 3]) -> Self {
        let mut f = Self::zero();
        let [a, b, c] = xs;
        f.c[1] = a;
        f.c[2] = b;
        f.c[3] = c;
        f
    }

    /// 2-form from `(c12, c13, c23)` coefficients.
    pub fn two_form(xs: [T; 3]) -> Self {
        let mut f = Self::zero();
        let [a, b, c] = xs;
        f.c[4] = a;
        f.c[5] = b;
        f.c[6] = c;
        f
    }

    pub fn three_form(t: T) -> Self {
        let mut f = Self::zero();
        f.c[7] = t;
        f
    }

    pub fn monomial(idx: usize, t: T) -> Self {
        let mut f = Self::zero();
        f.c[idx] = t;
        f
    }

    pub fn one_form_part(&self) -> [T; 3] {
        [self.c[1].clone(), self.c[2].clone(), self.c[3].clone()]
    }

    pub fn two_form_part(&self) -> [T; 3] {
        [self.c[4].clone(), self.c[5].clone(), self.c[6].clone()]
    }

    /// Projection onto form degree `k`.
    pub fn degree_part(&self, k: u32) -> Self {
        let mut f = Self::zero();
        for i in 0..8 {
            if DEGREE_OF_IDX[i] == k {
                f.c[i] = self.c[i].clone();
            }
        }
        f
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|t| t.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        MixedForm { c: array::from_fn(|i| self.c[i].clone() + other.c[i].clone()) }
    }

    pub fn sub(&self, other: &Self) -> Self {
        MixedForm { c: array::from_fn(|i| self.c[i].clone() - other.c[i].clone()) }
    }

    pub fn neg(&self) -> Self {
        MixedForm { c: array::from_fn(|i| -self.c[i].clone()) }
    }

    pub fn scale(&self, t: &T) -> Self {
        MixedForm { c: array::from_fn(|i| self.c[i].clone() * t.clone()) }
    }

    /// Exterior product.
    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for i in 0..8 {
            if self.c[i].is_zero() {
                continue;
            }
            for j in 0..8 {
                if other.c[j].is_zero() {
                    continue;
                }
                if let Some(s) = wedge_sign(MASK_OF_IDX[i], MASK_OF_IDX[j]) {
                    let k = IDX_OF_MASK[(MASK_OF_IDX[i] | MASK_OF_IDX[j]) as usize];
                    let term = self.c[i].clone() * other.c[j].clone();
                    out.c[k] = out.c[k].clone() + if s > 0 { term } else { -term };
                }
            }
        }
        out
    }

    /// Interior product with the vector `(x1, x2, x3)`; an antiderivation.
    pub fn interior(&self, x: &[T; 3]) -> Self {
        let mut out = Self::zero();
        for i in 0..8 {
            if self.c[i].is_zero() {
                continue;
            }
            let mask = MASK_OF_IDX[i];
            let mut below = 0u32;
            for axis in 0..3u8 {
                if mask & (1 << axis) != 0 {
                    let target = IDX_OF_MASK[(mask & !(1 << axis)) as usize];
                    let term = x[axis as usize].clone() * self.c[i].clone();
                    out.c[target] =
                        out.c[target].clone() + if below % 2 == 0 { term } else { -term };
                    below += 1;
                }
            }
        }
        out
    }

    /// Main involution: flips the sign of odd-degree components.
    pub fn tau(&self) -> Self {
        MixedForm {
            c: array::from_fn(|i| {
                if DEGREE_OF_IDX[i] % 2 == 1 {
                    -self.c[i].clone()
                } else {
                    self.c[i].clone()
                }
            }),
        }
    }

    /// Anti-involution `alpha(w) = (-1)^(deg(w) choose 2) w`: flips degrees 2 and 3.
    pub fn alpha_invol(&self) -> Self {
        MixedForm {
            c: array::from_fn(|i| {
                if DEGREE_OF_IDX[i] >= 2 {
                    -self.c[i].clone()
                } else {
                    self.c[i].clone()
                }
            }),
        }
    }

    pub fn map<U: Coeff>(&self, f: impl Fn(&T) -> U) -> MixedForm<U> {
        MixedForm { c: array::from_fn(|i| f(&self.c[i])) }
    }
}

/// A section value of `T + T* + 1`: vector, covector, scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct GenVec<T> {
    pub x: [T; 3],
    pub xi: [T; 3],
    pub lam: T,
}

impl<T: Coeff> GenVec<T> {
    pub fn zero() -> Self {
        GenVec { x: array::from_fn(|_| T::zero()), xi: array::from_fn(|_| T::zero()), lam: T::zero() }
    }

    pub fn new(x: [T; 3], xi: [T; 3], lam: T) -> Self {
        GenVec { x, xi, lam }
    }

    pub fn vector(x: [T; 3]) -> Self {
        GenVec { x, ..Self::zero() }
    }

    pub fn covector(xi: [T; 3]) -> Self {
        GenVec { xi, ..Self::zero() }
    }

    pub fn scalar(lam: T) -> Self {
        GenVec { lam, ..Self::zero() }
    }

    /// The seven coordinate sections, in component order `(x1..x3, xi1..xi3, lam)`.
    pub fn basis(i: usize) -> Self {
        let mut u = Self::zero();
        match i {
            0..=2 => u.x[i] = T::one(),
            3..=5 => u.xi[i - 3] = T::one(),
            6 => u.lam = T::one(),
            _ => panic!("generalized vector has 7 components"),
        }
        u
    }

    pub fn component(&self, i: usize) -> &T {
        match i {
            0..=2 => &self.x[i],
            3..=5 => &self.xi[i - 3],
            6 => &self.lam,
            _ => panic!("generalized vector has 7 components"),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        GenVec {
            x: array::from_fn(|i| self.x[i].clone() + other.x[i].clone()),
            xi: array::from_fn(|i| self.xi[i].clone() + other.xi[i].clone()),
            lam: self.lam.clone() + other.lam.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        GenVec {
            x: array::from_fn(|i| self.x[i].clone() - other.x[i].clone()),
            xi: array::from_fn(|i| self.xi[i].clone() - other.xi[i].clone()),
            lam: self.lam.clone() - other.lam.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        GenVec {
            x: array::from_fn(|i| -self.x[i].clone()),
            xi: array::from_fn(|i| -self.xi[i].clone()),
            lam: -self.lam.clone(),
        }
    }

    pub fn scale(&self, t: &T) -> Self {
        GenVec {
            x: array::from_fn(|i| self.x[i].clone() * t.clone()),
            xi: array::from_fn(|i| self.xi[i].clone() * t.clone()),
            lam: self.lam.clone() * t.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.x.iter().all(T::is_zero) && self.xi.iter().all(T::is_zero) && self.lam.is_zero()
    }
}

pub fn dot3<T: Coeff>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0].clone() * b[0].clone() + a[1].clone() * b[1].clone() + a[2].clone() * b[2].clone()
}

/// `a ^ b` of two 1-forms, as `(c12, c13, c23)`.
pub fn wedge11<T: Coeff>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
        a[0].clone() * b[2].clone() - a[2].clone() * b[0].clone(),
        a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
    ]
}

/// Interior product of the vector `x` with the 2-form `(b12, b13, b23)`.
pub fn interior2<T: Coeff>(x: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        -(b[0].clone() * x[1].clone()) - b[1].clone() * x[2].clone(),
        b[0].clone() * x[0].clone() - b[2].clone() * x[2].clone(),
        b[1].clone() * x[0].clone() + b[2].clone() * x[1].clone(),
    ]
}

/// Inner product of signature (4,3):
/// `(X+xi+l, Y+eta+m) = (i_X eta + i_Y xi)/2 + l m`.
pub fn inner<T: Coeff>(u: &GenVec<T>, v: &GenVec<T>) -> T {
    (dot3(&u.x, &v.xi) + dot3(&v.x, &u.xi)).half() + u.lam.clone() * v.lam.clone()
}

/// Clifford action `u . phi = i_X phi + xi ^ phi + lambda tau(phi)`.
pub fn clifford_act<T: Coeff>(u: &GenVec<T>, phi: &MixedForm<T>) -> MixedForm<T> {
    let mut out = phi.interior(&u.x);
    if !u.xi.iter().all(T::is_zero) {
        out = out.add(&MixedForm::one_form(u.xi.clone()).wedge(phi));
    }
    if !u.lam.is_zero() {
        out = out.add(&phi.tau().scale(&u.lam));
    }
    out
}

/// Coefficient of `d123` in `p ^ q` for a 1-form `p` and a 2-form
/// `q = (q12, q13, q23)`.
fn top_of_wedge12<T: Coeff>(p: &[T; 3], q: &[T; 3]) -> T {
    p[0].clone() * q[2].clone() - p[1].clone() * q[1].clone() + p[2].clone() * q[0].clone()
}

/// Chevalley pairing of two mixed forms on a 3-manifold, as the coefficient
/// of the volume monomial:
/// `<phi,psi> = phi0 psi3 + psi0 phi3 - phi1 ^ psi2 - psi1 ^ phi2`.
pub fn chevalley_pair<T: Coeff>(phi: &MixedForm<T>, psi: &MixedForm<T>) -> T {
    phi.c[0].clone() * psi.c[7].clone() + psi.c[0].clone() * phi.c[7].clone()
        - top_of_wedge12(&phi.one_form_part(), &psi.two_form_part())
        - top_of_wedge12(&psi.one_form_part(), &phi.two_form_part())
}

/// The quadratic form `Q(phi) = <phi,phi> = 2(phi0 phi3 - phi1 ^ phi2)`.
pub fn quadratic_form<T: Coeff>(phi: &MixedForm<T>) -> T {
    chevalley_pair(phi, phi)
}

/// A pointwise `exp(B + A)` transform: a 2-form `B = (b12, b13, b23)` and a
/// 1-form `A = (a1, a2, a3)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaTransform<T> {
    pub b: [T; 3],
    pub a: [T; 3],
}

impl<T: Coeff> BaTransform<T> {
    pub fn identity() -> Self {
        BaTransform { b: array::from_fn(|_| T::zero()), a: array::from_fn(|_| T::zero()) }
    }

    pub fn new(b: [T; 3], a: [T; 3]) -> Self {
        BaTransform { b, a }
    }

    /// Group law: `(B,A)(B',A') = (B + B' + A ^ A', A + A')`.
    pub fn compose(&self, other: &Self) -> Self {
        let aa = wedge11(&self.a, &other.a);
        BaTransform {
            b: array::from_fn(|i| self.b[i].clone() + other.b[i].clone() + aa[i].clone()),
            a: array::from_fn(|i| self.a[i].clone() + other.a[i].clone()),
        }
    }

    pub fn inverse(&self) -> Self {
        BaTransform {
            b: array::from_fn(|i| -self.b[i].clone()),
            a: array::from_fn(|i| -self.a[i].clone()),
        }
    }

    /// Action on generalized vectors:
    /// `X + xi + i_X B - 2 lambda A - (i_X A) A + lambda + i_X A`.
    pub fn act_vector(&self, u: &GenVec<T>) -> GenVec<T> {
        let ixb = interior2(&u.x, &self.b);
        let ixa = dot3(&u.x, &self.a);
        let two_lam = u.lam.clone() + u.lam.clone();
        let xi = array::from_fn(|i| {
            u.xi[i].clone() + ixb[i].clone()
                - two_lam.clone() * self.a[i].clone()
                - ixa.clone() * self.a[i].clone()
        });
        GenVec { x: u.x.clone(), xi, lam: u.lam.clone() + ixa }
    }

    /// Spinor action `sigma(exp(B+A)) phi = e^{-B} e^{-A tau} phi` where
    /// `e^{-A tau} phi = phi - A ^ tau(phi)`. The exponential of the 2-form
    /// truncates to `1 - B^` because `B ^ B` is a 4-form, hence zero in
    /// dimension 3; the two factors commute.
    pub fn act_spinor(&self, phi: &MixedForm<T>) -> MixedForm<T> {
        let a_form = MixedForm::one_form(self.a.clone());
        let after_a = phi.sub(&a_form.wedge(&phi.tau()));
        let b_form = MixedForm::two_form(self.b.clone());
        after_a.sub(&b_form.wedge(&after_a))
    }
}
