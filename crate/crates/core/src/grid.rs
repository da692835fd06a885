//! Uniform grids on the torus: sampling trigonometric fields, recovering
//! them from samples by discrete Fourier transform with exact rational
//! snapping, and compiled float evaluators for the time integrators.
//!
//! Alias rules: reconstructing a band-`B` field from `m` samples per axis
//! needs `m >= 2B + 1`; sampling for later pointwise products keeps the
//! band-`B` part of a quadratic product alias-free only when `m >= 3B + 1`,
//! so that is the sampling precondition.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::f64::consts::TAU;

use crate::algebra::{rat_to_f64, GenVec, MixedForm, Rat};
use crate::error::Error;
use crate::fields::{FormField3, GenVectorField};
use crate::trig::{Parity, TrigScalar};

/// Uniform `m^3` grid with nodes `x_i = 2 pi j / m`; values are stored
/// row-major, last axis fastest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusGrid {
    pub m: usize,
}

impl TorusGrid {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "grid needs at least one node per axis");
        TorusGrid { m }
    }

    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn coord(&self, j: usize) -> f64 {
        TAU * j as f64 / self.m as f64
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.m + j) * self.m + k
    }

    pub fn nodes(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        let m = self.m;
        (0..m).flat_map(move |i| {
            (0..m).flat_map(move |j| (0..m).map(move |k| self.node(i, j, k)))
        })
    }

    /// Sample a scalar field; fails unless `m >= 3 band + 1`.
    pub fn to_grid(&self, s: &TrigScalar) -> Result<Vec<f64>, Error> {
        let band = s.band();
        let needed = 3 * band as usize + 1;
        if self.m < needed {
            return Err(Error::AliasedBand { m: self.m, band, needed });
        }
        let c = CompiledScalar::compile(s);
        Ok(self.nodes().map(|x| c.eval(&x)).collect())
    }

    /// Recover a band-limited field from samples (needs `m >= 2 band + 1`),
    /// snapping each Fourier coefficient to the simplest rational within
    /// `tol` and dropping coefficients below `tol`.
    pub fn from_grid(&self, values: &[f64], band: u32, tol: f64) -> Result<TrigScalar, Error> {
        let needed = 2 * band as usize + 1;
        if self.m < needed {
            return Err(Error::AliasedBand { m: self.m, band, needed });
        }
        assert_eq!(values.len(), self.len(), "sample count must match the grid");
        let spectrum = self.dft(values, band);
        let k_count = 2 * band as i64 + 1;
        let idx = |k: i32| (k as i64 + band as i64) as usize;
        let mut out = TrigScalar::zero();
        for k1 in -(band as i32)..=band as i32 {
            for k2 in -(band as i32)..=band as i32 {
                for k3 in -(band as i32)..=band as i32 {
                    let k = [k1, k2, k3];
                    // one representative per {k, -k} pair
                    match k.iter().find(|&&c| c != 0) {
                        None => {
                            let (re, _) = spectrum
                                [(idx(k1) * k_count as usize + idx(k2)) * k_count as usize + idx(k3)];
                            out.push(k, Parity::Cos, nearest_rational(re, tol));
                            continue;
                        }
                        Some(&lead) if lead < 0 => continue,
                        _ => {}
                    }
                    let (re, im) = spectrum
                        [(idx(k1) * k_count as usize + idx(k2)) * k_count as usize + idx(k3)];
                    out.push(k, Parity::Cos, nearest_rational(2.0 * re, tol));
                    out.push(k, Parity::Sin, nearest_rational(-2.0 * im, tol));
                }
            }
        }
        Ok(out)
    }

    /// Trigonometric interpolation of real samples with float coefficients,
    /// for evaluating grid-sampled data off the nodes. No rational snapping;
    /// coefficients below `drop_tol` are dropped.
    pub fn fit_scalar(&self, values: &[f64], band: u32, drop_tol: f64) -> CompiledScalar {
        assert_eq!(values.len(), self.len(), "sample count must match the grid");
        assert!(self.m >= 2 * band as usize + 1, "band too wide for this grid");
        let spectrum = self.dft(values, band);
        let kc = 2 * band as usize + 1;
        let idx = |k: i32| (k + band as i32) as usize;
        let mut terms = Vec::new();
        for k1 in -(band as i32)..=band as i32 {
            for k2 in -(band as i32)..=band as i32 {
                for k3 in -(band as i32)..=band as i32 {
                    let k = [k1, k2, k3];
                    let lead = k.iter().find(|&&c| c != 0);
                    if matches!(lead, Some(&l) if l < 0) {
                        continue;
                    }
                    let (re, im) = spectrum[(idx(k1) * kc + idx(k2)) * kc + idx(k3)];
                    let kf = [k1 as f64, k2 as f64, k3 as f64];
                    if lead.is_none() {
                        if re.abs() > drop_tol {
                            terms.push((kf, false, re));
                        }
                        continue;
                    }
                    if (2.0 * re).abs() > drop_tol {
                        terms.push((kf, false, 2.0 * re));
                    }
                    if (2.0 * im).abs() > drop_tol {
                        terms.push((kf, true, -2.0 * im));
                    }
                }
            }
        }
        CompiledScalar { terms }
    }

    /// Componentwise trigonometric interpolation of sampled mixed forms.
    pub fn fit_form(&self, values: &[MixedForm<f64>], band: u32, drop_tol: f64) -> SpectralForm {
        SpectralForm {
            c: std::array::from_fn(|i| {
                let comp: Vec<f64> = values.iter().map(|v| v.c[i]).collect();
                self.fit_scalar(&comp, band, drop_tol)
            }),
        }
    }

    /// Normalized DFT restricted to the band cube, separable axis by axis.
    fn dft(&self, values: &[f64], band: u32) -> Vec<(f64, f64)> {
        let m = self.m;
        let kc = 2 * band as usize + 1;
        // twiddles[q][n] = e^{-i (q - band) x_n} / m
        let twiddle: Vec<Vec<(f64, f64)>> = (0..kc)
            .map(|q| {
                let k = q as f64 - band as f64;
                (0..m)
                    .map(|n| {
                        let phase = -k * TAU * n as f64 / m as f64;
                        (phase.cos() / m as f64, phase.sin() / m as f64)
                    })
                    .collect()
            })
            .collect();
        let transform_last = |input: &[(f64, f64)], rows: usize| -> Vec<(f64, f64)> {
            let mut out = vec![(0.0, 0.0); rows * kc];
            for r in 0..rows {
                for (q, tw) in twiddle.iter().enumerate() {
                    let mut acc = (0.0, 0.0);
                    for n in 0..m {
                        let (vr, vi) = input[r * m + n];
                        let (tr, ti) = tw[n];
                        acc.0 += vr * tr - vi * ti;
                        acc.1 += vr * ti + vi * tr;
                    }
                    out[r * kc + q] = acc;
                }
            }
            out
        };
        // rotate axes so each pass transforms the last one: (i,j,k) data
        let complex: Vec<(f64, f64)> = values.iter().map(|&v| (v, 0.0)).collect();
        let pass3 = transform_last(&complex, m * m); // dims [m, m, kc]
        let rot1 = rotate_last_to_front(&pass3, [m, m, kc]); // [kc, m, m]
        let pass2 = transform_last(&rot1, kc * m); // [kc, m, kc]
        let rot2 = rotate_last_to_front(&pass2, [kc, m, kc]); // [kc, kc, m]
        let pass1 = transform_last(&rot2, kc * kc); // [kc, kc, kc] order (k2, k3, k1)
        // back to (k1, k2, k3) order
        let mut out = vec![(0.0, 0.0); kc * kc * kc];
        for q2 in 0..kc {
            for q3 in 0..kc {
                for q1 in 0..kc {
                    out[(q1 * kc + q2) * kc + q3] = pass1[(q2 * kc + q3) * kc + q1];
                }
            }
        }
        out
    }
}

fn rotate_last_to_front(data: &[(f64, f64)], dims: [usize; 3]) -> Vec<(f64, f64)> {
    let [a, b, c] = dims;
    let mut out = vec![(0.0, 0.0); a * b * c];
    for i in 0..a {
        for j in 0..b {
            for k in 0..c {
                out[(k * a + i) * b + j] = data[(i * b + j) * c + k];
            }
        }
    }
    out
}

/// Simplest rational within `tol` of `x` (continued-fraction convergents);
/// values below `tol` in magnitude snap to zero.
pub fn nearest_rational(x: f64, tol: f64) -> Rat {
    if !x.is_finite() {
        panic!("cannot snap a non-finite sample");
    }
    if x.abs() < tol {
        return Rat::zero();
    }
    let negative = x < 0.0;
    let target = x.abs();
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::from(target.floor() as i64), BigInt::one());
    let mut frac = target.fract();
    for _ in 0..64 {
        let approx = big_ratio_to_f64(&p1, &q1);
        if (approx - target).abs() <= tol {
            break;
        }
        if frac.abs() < f64::EPSILON {
            break;
        }
        let r = 1.0 / frac;
        let a = r.floor();
        frac = r.fract();
        let ai = BigInt::from(a as i64);
        let p2 = &ai * &p1 + &p0;
        let q2 = &ai * &q1 + &q0;
        (p0, q0) = (p1, q1);
        (p1, q1) = (p2, q2);
    }
    let mut r = Rat::new(p1, q1);
    if negative {
        r = -r;
    }
    r
}

fn big_ratio_to_f64(p: &BigInt, q: &BigInt) -> f64 {
    rat_to_f64(&Rat::new(p.clone(), q.clone()))
}

/// Flat term list of a scalar field for fast repeated evaluation.
#[derive(Clone, Debug, Default)]
pub struct CompiledScalar {
    terms: Vec<([f64; 3], bool, f64)>,
}

impl CompiledScalar {
    pub fn compile(s: &TrigScalar) -> Self {
        CompiledScalar {
            terms: s
                .terms()
                .map(|(mode, coeff)| {
                    (
                        [mode.k[0] as f64, mode.k[1] as f64, mode.k[2] as f64],
                        mode.parity == Parity::Sin,
                        rat_to_f64(coeff),
                    )
                })
                .collect(),
        }
    }

    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        let mut acc = 0.0;
        for (k, is_sin, c) in &self.terms {
            let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
            acc += c * if *is_sin { phase.sin() } else { phase.cos() };
        }
        acc
    }

    pub fn negated(&self) -> CompiledScalar {
        CompiledScalar {
            terms: self.terms.iter().map(|&(k, s, c)| (k, s, -c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// A mixed form with float Fourier coefficients, evaluable anywhere.
#[derive(Clone, Debug)]
pub struct SpectralForm {
    pub c: [CompiledScalar; 8],
}

impl SpectralForm {
    pub fn eval(&self, x: &[f64; 3]) -> MixedForm<f64> {
        MixedForm { c: std::array::from_fn(|i| self.c[i].eval(x)) }
    }
}

#[derive(Clone, Debug)]
pub struct CompiledForm {
    pub c: [CompiledScalar; 8],
}

impl CompiledForm {
    pub fn compile(phi: &FormField3) -> Self {
        CompiledForm { c: std::array::from_fn(|i| CompiledScalar::compile(&phi.c[i])) }
    }

    pub fn eval(&self, x: &[f64; 3]) -> MixedForm<f64> {
        MixedForm { c: std::array::from_fn(|i| self.c[i].eval(x)) }
    }
}

#[derive(Clone, Debug)]
pub struct CompiledGenVec {
    pub x: [CompiledScalar; 3],
    pub xi: [CompiledScalar; 3],
    pub lam: CompiledScalar,
}

impl CompiledGenVec {
    pub fn compile(u: &GenVectorField) -> Self {
        CompiledGenVec {
            x: std::array::from_fn(|i| CompiledScalar::compile(&u.x[i])),
            xi: std::array::from_fn(|i| CompiledScalar::compile(&u.xi[i])),
            lam: CompiledScalar::compile(&u.lam),
        }
    }

    pub fn eval(&self, x: &[f64; 3]) -> GenVec<f64> {
        GenVec {
            x: std::array::from_fn(|i| self.x[i].eval(x)),
            xi: std::array::from_fn(|i| self.xi[i].eval(x)),
            lam: self.lam.eval(x),
        }
    }
}

/// Sup over grid nodes of the largest monomial coefficient difference.
pub fn sup_form_diff(grid: &TorusGrid, a: &FormField3, b: &FormField3) -> f64 {
    let ca = CompiledForm::compile(a);
    let cb = CompiledForm::compile(b);
    let mut sup: f64 = 0.0;
    for x in grid.nodes() {
        let va = ca.eval(&x);
        let vb = cb.eval(&x);
        for i in 0..8 {
            sup = sup.max((va.c[i] - vb.c[i]).abs());
        }
    }
    sup
}
