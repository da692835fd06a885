//! Exact trigonometric polynomials on the torus `(R/2pi Z)^3`: finite sums
//! `sum_k a_k cos(k.x) + b_k sin(k.x)` with rational coefficients and integer
//! frequency vectors. Products expand exactly by product-to-sum, so the ring
//! is closed and identities like `cos^2 + sin^2 = 1` hold on the nose.
//!
//! Canonical form: the first nonzero component of a stored frequency is
//! positive (cosine is even, sine odd under `k -> -k`), `sin(0) = 0` is never
//! stored, and zero coefficients are dropped. Equality of values is equality
//! of representations.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::Zero;

use crate::algebra::{rat_int, rat_to_f64, Coeff, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Parity {
    Cos,
    Sin,
}

/// A single Fourier mode `cos(k.x)` or `sin(k.x)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mode {
    pub k: [i32; 3],
    pub parity: Parity,
}

impl Mode {
    pub const CONSTANT: Mode = Mode { k: [0, 0, 0], parity: Parity::Cos };

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        let phase = self.k[0] as f64 * x[0] + self.k[1] as f64 * x[1] + self.k[2] as f64 * x[2];
        match self.parity {
            Parity::Cos => phase.cos(),
            Parity::Sin => phase.sin(),
        }
    }

    /// Squared Euclidean length of the frequency vector.
    pub fn freq_norm2(&self) -> i64 {
        self.k.iter().map(|&c| (c as i64) * (c as i64)).sum()
    }
}

/// Reduce `(k, parity, coeff)` to canonical form; `None` when the term is zero.
fn canonical(mut k: [i32; 3], parity: Parity, mut coeff: Rat) -> Option<(Mode, Rat)> {
    if Zero::is_zero(&coeff) {
        return None;
    }
    match k.iter().find(|&&c| c != 0) {
        None => {
            if parity == Parity::Sin {
                return None;
            }
        }
        Some(&lead) => {
            if lead < 0 {
                for c in &mut k {
                    *c = -*c;
                }
                if parity == Parity::Sin {
                    coeff = -coeff;
                }
            }
        }
    }
    Some((Mode { k, parity }, coeff))
}

/// Exact trigonometric polynomial with rational coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TrigScalar {
    terms: BTreeMap<Mode, Rat>,
}

impl TrigScalar {
    pub fn zero() -> Self {
        TrigScalar::default()
    }

    pub fn constant(c: Rat) -> Self {
        let mut t = Self::zero();
        t.push(Mode::CONSTANT.k, Parity::Cos, c);
        t
    }

    pub fn one() -> Self {
        Self::constant(rat_int(1))
    }

    pub fn cos(k: [i32; 3], coeff: Rat) -> Self {
        let mut t = Self::zero();
        t.push(k, Parity::Cos, coeff);
        t
    }

    pub fn sin(k: [i32; 3], coeff: Rat) -> Self {
        let mut t = Self::zero();
        t.push(k, Parity::Sin, coeff);
        t
    }

    pub fn from_terms(iter: impl IntoIterator<Item = ([i32; 3], Parity, Rat)>) -> Self {
        let mut t = Self::zero();
        for (k, parity, coeff) in iter {
            t.push(k, parity, coeff);
        }
        t
    }

    /// Add one term, canonicalizing and dropping cancellations.
    pub fn push(&mut self, k: [i32; 3], parity: Parity, coeff: Rat) {
        let Some((mode, coeff)) = canonical(k, parity, coeff) else {
            return;
        };
        let entry = self.terms.entry(mode).or_insert_with(|| rat_int(0));
        *entry += coeff;
        if Zero::is_zero(entry) {
            self.terms.remove(&mode);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mode, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Constant (mean) part.
    pub fn mean(&self) -> Rat {
        self.terms.get(&Mode::CONSTANT).cloned().unwrap_or_else(|| rat_int(0))
    }

    /// `None` unless the value is a constant.
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(rat_int(0)),
            1 => self.terms.get(&Mode::CONSTANT).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// Largest frequency component in absolute value.
    pub fn band(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|m| m.k.iter().map(|c| c.unsigned_abs()))
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, s: &Rat) -> Self {
        if Zero::is_zero(s) {
            return Self::zero();
        }
        TrigScalar { terms: self.terms.iter().map(|(m, c)| (*m, c * s)).collect() }
    }

    /// Partial derivative along coordinate axis `axis`.
    pub fn deriv(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (mode, coeff) in &self.terms {
            if mode.k[axis] == 0 {
                continue;
            }
            let f = rat_int(mode.k[axis] as i64);
            match mode.parity {
                Parity::Cos => out.push(mode.k, Parity::Sin, -(coeff * &f)),
                Parity::Sin => out.push(mode.k, Parity::Cos, coeff * &f),
            }
        }
        out
    }

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        self.terms.iter().map(|(m, c)| rat_to_f64(c) * m.eval(x)).sum()
    }

    /// Apply a rational multiplier per mode (diagonal Fourier operator);
    /// `f` may return `None` to annihilate a mode.
    pub fn map_modes(&self, f: impl Fn(&Mode) -> Option<Rat>) -> Self {
        let mut out = Self::zero();
        for (mode, coeff) in &self.terms {
            if let Some(mult) = f(mode) {
                out.push(mode.k, mode.parity, coeff * mult);
            }
        }
        out
    }

    fn mul_ref(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let c = (ca * cb).half();
                let sum = [ma.k[0] + mb.k[0], ma.k[1] + mb.k[1], ma.k[2] + mb.k[2]];
                let diff = [ma.k[0] - mb.k[0], ma.k[1] - mb.k[1], ma.k[2] - mb.k[2]];
                match (ma.parity, mb.parity) {
                    (Parity::Cos, Parity::Cos) => {
                        out.push(diff, Parity::Cos, c.clone());
                        out.push(sum, Parity::Cos, c);
                    }
                    (Parity::Sin, Parity::Sin) => {
                        out.push(diff, Parity::Cos, c.clone());
                        out.push(sum, Parity::Cos, -c);
                    }
                    (Parity::Sin, Parity::Cos) => {
                        out.push(sum, Parity::Sin, c.clone());
                        out.push(diff, Parity::Sin, c);
                    }
                    (Parity::Cos, Parity::Sin) => {
                        out.push(sum, Parity::Sin, c.clone());
                        out.push(diff, Parity::Sin, -c);
                    }
                }
            }
        }
        out
    }
}

impl Add for TrigScalar {
    type Output = TrigScalar;
    fn add(mut self, other: TrigScalar) -> TrigScalar {
        for (mode, coeff) in other.terms {
            self.push(mode.k, mode.parity, coeff);
        }
        self
    }
}

impl Sub for TrigScalar {
    type Output = TrigScalar;
    fn sub(mut self, other: TrigScalar) -> TrigScalar {
        for (mode, coeff) in other.terms {
            self.push(mode.k, mode.parity, -coeff);
        }
        self
    }
}

impl Neg for TrigScalar {
    type Output = TrigScalar;
    fn neg(self) -> TrigScalar {
        TrigScalar { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl Mul for TrigScalar {
    type Output = TrigScalar;
    fn mul(self, other: TrigScalar) -> TrigScalar {
        self.mul_ref(&other)
    }
}

impl Coeff for TrigScalar {
    fn zero() -> Self {
        TrigScalar::zero()
    }
    fn one() -> Self {
        TrigScalar::one()
    }
    fn is_zero(&self) -> bool {
        TrigScalar::is_zero(self)
    }
    fn half(&self) -> Self {
        self.scale(&Rat::new(1.into(), 2.into()))
    }
}

impl fmt::Display for TrigScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mode, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if mode.k == [0, 0, 0] {
                write!(f, "{coeff}")?;
                continue;
            }
            let name = match mode.parity {
                Parity::Cos => "cos",
                Parity::Sin => "sin",
            };
            write!(f, "{coeff} {name}({},{},{})", mode.k[0], mode.k[1], mode.k[2])?;
        }
        Ok(())
    }
}
