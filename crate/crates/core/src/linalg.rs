//! Small dense linear algebra: exact rational routines for the pointwise
//! spinor systems (at most 8x8 here), and a few float helpers for the flow
//! integrators. Sizes are tiny and fixed, so everything is direct
//! elimination; the exact path uses fraction-free (Bareiss) pivoting over
//! integers to keep intermediate rationals from churning through gcds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::algebra::{rat_int, Rat};

pub type RatMat = Vec<Vec<Rat>>;

pub fn mat_identity(n: usize) -> RatMat {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { rat_int(1) } else { rat_int(0) }).collect())
        .collect()
}

pub fn mat_mul(a: &RatMat, b: &RatMat) -> RatMat {
    let (m, k, n) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![rat_int(0); n]; m];
    for i in 0..m {
        for l in 0..k {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..n {
                out[i][j] += &a[i][l] * &b[l][j];
            }
        }
    }
    out
}

pub fn mat_transpose(a: &RatMat) -> RatMat {
    let (m, n) = (a.len(), a[0].len());
    (0..n).map(|j| (0..m).map(|i| a[i][j].clone()).collect()).collect()
}

pub fn mat_add(a: &RatMat, b: &RatMat) -> RatMat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn mat_scale(a: &RatMat, s: &Rat) -> RatMat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn mat_vec(a: &RatMat, v: &[Rat]) -> Vec<Rat> {
    a.iter()
        .map(|row| row.iter().zip(v).fold(rat_int(0), |acc, (x, y)| acc + x * y))
        .collect()
}

pub fn mat_is_zero(a: &RatMat) -> bool {
    a.iter().all(|r| r.iter().all(Zero::is_zero))
}

#[derive(Debug, PartialEq)]
pub enum SolveOutcome {
    Unique(Vec<Rat>),
    RankDeficient,
    Inconsistent,
}

/// Solve `A x = b` for an m x n system with m >= n, expecting full column
/// rank. Rows are cleared to integers, eliminated by Bareiss pivoting (each
/// division is exact), then back-substituted over rationals. Surplus rows
/// act as consistency checks.
pub fn solve_exact(a: &RatMat, b: &[Rat]) -> SolveOutcome {
    let m = a.len();
    let n = a[0].len();
    assert!(m >= n && b.len() == m);

    // integerize each augmented row
    let mut w: Vec<Vec<BigInt>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut lcm = BigInt::one();
        for x in a[i].iter().chain(std::iter::once(&b[i])) {
            lcm = lcm.lcm(x.denom());
        }
        let mut row: Vec<BigInt> = Vec::with_capacity(n + 1);
        for x in a[i].iter().chain(std::iter::once(&b[i])) {
            row.push(x.numer() * (&lcm / x.denom()));
        }
        w.push(row);
    }

    let mut prev = BigInt::one();
    for col in 0..n {
        let pivot = match (col..m).find(|&r| !w[r][col].is_zero()) {
            Some(r) => r,
            None => return SolveOutcome::RankDeficient,
        };
        w.swap(col, pivot);
        for i in col + 1..m {
            for j in col + 1..=n {
                let t = &w[col][col] * &w[i][j] - &w[i][col] * &w[col][j];
                w[i][j] = &t / &prev;
            }
            w[i][col] = BigInt::zero();
        }
        prev = w[col][col].clone();
    }

    for row in w.iter().take(m).skip(n) {
        if !row[n].is_zero() {
            return SolveOutcome::Inconsistent;
        }
    }

    let mut x = vec![rat_int(0); n];
    for k in (0..n).rev() {
        let mut rhs = Rat::from(w[k][n].clone());
        for j in k + 1..n {
            rhs -= Rat::from(w[k][j].clone()) * &x[j];
        }
        x[k] = rhs / Rat::from(w[k][k].clone());
    }
    SolveOutcome::Unique(x)
}

/// Reduced row echelon form; returns the pivot columns.
pub fn rref(mut a: RatMat) -> (RatMat, Vec<usize>) {
    let m = a.len();
    let n = if m == 0 { 0 } else { a[0].len() };
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        let Some(p) = (row..m).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].recip();
        for j in col..n {
            a[row][j] *= &inv;
        }
        for i in 0..m {
            if i != row && !a[i][col].is_zero() {
                let f = a[i][col].clone();
                for j in col..n {
                    let t = &f * &a[row][j];
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Basis of the null space of `a`, one vector per free column.
pub fn kernel_basis(a: &RatMat) -> Vec<Vec<Rat>> {
    let n = if a.is_empty() { 0 } else { a[0].len() };
    let (r, pivots) = rref(a.clone());
    let mut basis = Vec::new();
    for free in 0..n {
        if pivots.contains(&free) {
            continue;
        }
        let mut v = vec![rat_int(0); n];
        v[free] = rat_int(1);
        for (prow, &pcol) in pivots.iter().enumerate() {
            v[pcol] = -r[prow][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Inertia (positive, negative, zero counts) of a symmetric rational matrix,
/// by congruence diagonalization.
pub fn signature(a: &RatMat) -> (usize, usize, usize) {
    let n = a.len();
    let mut w = a.clone();
    let (mut pos, mut neg, mut zero) = (0usize, 0usize, 0usize);
    for k in 0..n {
        if w[k][k].is_zero() {
            if let Some(i) = (k + 1..n).find(|&i| !w[i][i].is_zero()) {
                // symmetric swap of indices k and i
                w.swap(k, i);
                for row in w.iter_mut() {
                    row.swap(k, i);
                }
            } else {
                // all trailing diagonal entries vanish; look off-diagonal
                let mut found = None;
                'scan: for i in k..n {
                    for j in i + 1..n {
                        if !w[i][j].is_zero() {
                            found = Some((i, j));
                            break 'scan;
                        }
                    }
                }
                let Some((i, j)) = found else {
                    zero += n - k;
                    break;
                };
                // row/col j added to row/col i makes w[i][i] = 2 w[i][j] != 0
                for c in 0..n {
                    let t = w[j][c].clone();
                    w[i][c] += t;
                }
                for r in 0..n {
                    let t = w[r][j].clone();
                    w[r][i] += t;
                }
                if i != k {
                    w.swap(k, i);
                    for row in w.iter_mut() {
                        row.swap(k, i);
                    }
                }
            }
        }
        let d = w[k][k].clone();
        debug_assert!(!d.is_zero());
        for i in k + 1..n {
            if w[i][k].is_zero() {
                continue;
            }
            let f = &w[i][k] / &d;
            for j in k..n {
                let t = &f * &w[k][j];
                w[i][j] -= t;
            }
            for r in k..n {
                let t = &f * &w[r][k];
                w[r][i] -= t;
            }
        }
        if d.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
    }
    (pos, neg, zero)
}

/// `exp(N)` for nilpotent `N`; `None` if the series has not terminated
/// after `cap` powers.
pub fn exp_nilpotent(n: &RatMat, cap: usize) -> Option<RatMat> {
    let dim = n.len();
    let mut sum = mat_identity(dim);
    let mut term = mat_identity(dim);
    for k in 1..=cap {
        term = mat_scale(&mat_mul(&term, n), &rat(1, k as i64));
        if mat_is_zero(&term) {
            return Some(sum);
        }
        sum = mat_add(&sum, &term);
    }
    None
}

fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

// ---------------------------------------------------------------------------
// float helpers for the flow integrators

/// Least-squares solve of an m x n system (m >= n, full column rank) by
/// Householder QR. The callers feed consistent systems, so the residual is
/// numerical noise; they recheck it directly where it matters.
/// In-place Householder factorization of an 8x7 matrix; reflectors stay in
/// the strict lower part of `a`, the diagonal of `R` is returned. Built for
/// the inner loop of the deformation flows, so no allocation.
pub fn qr87(a: &mut [[f64; 7]; 8]) -> [f64; 7] {
    let mut diag = [0.0; 7];
    for k in 0..7 {
        let mut norm = 0.0;
        for row in a.iter().skip(k) {
            norm += row[k] * row[k];
        }
        let norm = norm.sqrt();
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        diag[k] = alpha;
        if norm == 0.0 {
            continue;
        }
        a[k][k] -= alpha;
        let mut vnorm2 = 0.0;
        for row in a.iter().skip(k) {
            vnorm2 += row[k] * row[k];
        }
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k + 1..7 {
            let mut dot = 0.0;
            for row in a.iter().skip(k) {
                dot += row[k] * row[j];
            }
            let f = 2.0 * dot / vnorm2;
            for row in a.iter_mut().skip(k) {
                row[j] -= f * row[k];
            }
        }
    }
    diag
}

/// Least-squares solve against a factorization from `qr87`; `b` is consumed
/// as workspace.
pub fn qr87_solve(a: &[[f64; 7]; 8], diag: &[f64; 7], b: &mut [f64; 8]) -> [f64; 7] {
    for k in 0..7 {
        let mut vnorm2 = 0.0;
        for row in a.iter().skip(k) {
            vnorm2 += row[k] * row[k];
        }
        if vnorm2 == 0.0 {
            continue;
        }
        let mut dot = 0.0;
        for (row, bv) in a.iter().zip(b.iter()).skip(k) {
            dot += row[k] * bv;
        }
        let f = 2.0 * dot / vnorm2;
        for (row, bv) in a.iter().zip(b.iter_mut()).skip(k) {
            *bv -= f * row[k];
        }
    }
    let mut x = [0.0; 7];
    for k in (0..7).rev() {
        if diag[k] == 0.0 {
            continue;
        }
        let mut s = b[k];
        for j in k + 1..7 {
            s -= a[k][j] * x[j];
        }
        x[k] = s / diag[k];
    }
    x
}

pub fn lstsq(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let m = a.len();
    let n = a[0].len();
    assert!(m >= n && b.len() == m);
    let mut r: Vec<Vec<f64>> = a.to_vec();
    let mut y = b.to_vec();
    for k in 0..n {
        let mut norm = 0.0;
        for i in k..m {
            norm += r[i][k] * r[i][k];
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if r[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| r[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let dot: f64 = (k..m).map(|i| v[i - k] * r[i][j]).sum();
            let f = 2.0 * dot / vnorm2;
            for i in k..m {
                r[i][j] -= f * v[i - k];
            }
        }
        let dot: f64 = (k..m).map(|i| v[i - k] * y[i]).sum();
        let f = 2.0 * dot / vnorm2;
        for i in k..m {
            y[i] -= f * v[i - k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let mut s = y[k];
        for j in k + 1..n {
            s -= r[k][j] * x[j];
        }
        x[k] = s / r[k][k];
    }
    x
}

pub type Mat3 = [[f64; 3]; 3];

pub const MAT3_ID: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub fn mat3_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

pub fn mat3_vec(a: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    [
        a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
        a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
        a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
    ]
}

/// `a^T v`; pulls a 1-form back through the Jacobian `a`.
pub fn mat3_tvec(a: &Mat3, v: &[f64; 3]) -> [f64; 3] {
    [
        a[0][0] * v[0] + a[1][0] * v[1] + a[2][0] * v[2],
        a[0][1] * v[0] + a[1][1] * v[1] + a[2][1] * v[2],
        a[0][2] * v[0] + a[1][2] * v[1] + a[2][2] * v[2],
    ]
}

pub fn det3(a: &Mat3) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

pub fn mat3_inv(a: &Mat3) -> Mat3 {
    let d = det3(a);
    let inv = 1.0 / d;
    [
        [
            (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv,
            (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv,
            (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv,
        ],
        [
            (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv,
            (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv,
            (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv,
        ],
        [
            (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv,
            (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv,
            (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv,
        ],
    ]
}

/// Pullback of a 2-form `(b12, b13, b23)` through the Jacobian `j`:
/// `(f*b)(e_p, e_q) = b(J e_p, J e_q)`.
pub fn pullback2(j: &Mat3, b: &[f64; 3]) -> [f64; 3] {
    let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
        j[r0][c0] * j[r1][c1] - j[r0][c1] * j[r1][c0]
    };
    let comp = |c0: usize, c1: usize| {
        b[0] * minor(0, 1, c0, c1) + b[1] * minor(0, 2, c0, c1) + b[2] * minor(1, 2, c0, c1)
    };
    [comp(0, 1), comp(0, 2), comp(1, 2)]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rat {
        rat_int(n)
    }

    #[test]
    fn solve_square_and_overdetermined() {
        let a = vec![vec![r(2), r(1)], vec![r(1), r(3)], vec![r(3), r(4)]];
        let b = vec![r(5), r(10), r(15)];
        // rows are consistent: x = (1, 3)
        match solve_exact(&a, &b) {
            SolveOutcome::Unique(x) => assert_eq!(x, vec![r(1), r(3)]),
            other => panic!("expected unique solution, got {other:?}"),
        }
        let bad = vec![r(5), r(10), r(16)];
        assert_eq!(solve_exact(&a, &bad), SolveOutcome::Inconsistent);
        let thin = vec![vec![r(1), r(2)], vec![r(2), r(4)], vec![r(3), r(6)]];
        assert_eq!(solve_exact(&thin, &vec![r(1), r(2), r(3)]), SolveOutcome::RankDeficient);
    }

    #[test]
    fn solve_with_fractions() {
        let a = vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 5), rat(1, 7)]];
        let b = vec![rat(5, 6), rat(12, 35)];
        match solve_exact(&a, &b) {
            SolveOutcome::Unique(x) => assert_eq!(x, vec![r(1), r(1)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn kernel_of_rank_one_map() {
        let a = vec![vec![r(1), r(2), r(-1)]];
        let k = kernel_basis(&a);
        assert_eq!(k.len(), 2);
        for v in &k {
            let val = &a[0][0] * &v[0] + &a[0][1] * &v[1] + &a[0][2] * &v[2];
            assert!(val.is_zero());
        }
        let full = vec![vec![r(1), r(0)], vec![r(0), r(1)]];
        assert!(kernel_basis(&full).is_empty());
    }

    #[test]
    fn signature_handles_zero_diagonal() {
        let hyper = vec![vec![r(0), r(1)], vec![r(1), r(0)]];
        assert_eq!(signature(&hyper), (1, 1, 0));
        let diag = vec![
            vec![r(3), r(0), r(0)],
            vec![r(0), r(-2), r(0)],
            vec![r(0), r(0), r(0)],
        ];
        assert_eq!(signature(&diag), (1, 1, 1));
    }

    #[test]
    fn exp_of_strictly_upper_triangular() {
        let n = vec![
            vec![r(0), r(2), r(1)],
            vec![r(0), r(0), r(3)],
            vec![r(0), r(0), r(0)],
        ];
        let e = exp_nilpotent(&n, 8).unwrap();
        // exp(N) = I + N + N^2/2
        assert_eq!(e[0][1], r(2));
        assert_eq!(e[0][2], r(1) + r(3));
        assert_eq!(e[1][2], r(3));
        assert_eq!(e[0][0], r(1));
        let not_nilpotent = vec![vec![r(1)]];
        assert!(exp_nilpotent(&not_nilpotent, 8).is_none());
    }

    #[test]
    fn lstsq_recovers_consistent_solution() {
        let a = vec![
            vec![1.0, 2.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![2.0, -1.0],
        ];
        let x_true = [0.75, -1.25];
        let b: Vec<f64> = a.iter().map(|row| row[0] * x_true[0] + row[1] * x_true[1]).collect();
        let x = lstsq(&a, &b);
        assert!((x[0] - x_true[0]).abs() < 1e-12);
        assert!((x[1] - x_true[1]).abs() < 1e-12);
    }

    #[test]
    fn fixed_size_qr_matches_lstsq() {
        let mut seed = 11u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 33) as f64 / (1u64 << 31) as f64) - 1.0
        };
        for _ in 0..20 {
            let mut a = [[0.0; 7]; 8];
            for row in a.iter_mut() {
                for v in row.iter_mut() {
                    *v = next();
                }
            }
            let mut b = [0.0; 8];
            for v in b.iter_mut() {
                *v = next();
            }
            let avec: Vec<Vec<f64>> = a.iter().map(|r| r.to_vec()).collect();
            let want = lstsq(&avec, &b);
            let mut fa = a;
            let diag = qr87(&mut fa);
            let got = qr87_solve(&fa, &diag, &mut b.clone());
            for i in 0..7 {
                assert!((got[i] - want[i]).abs() < 1e-10, "{} vs {}", got[i], want[i]);
            }
        }
    }

    #[test]
    fn mat3_inverse_and_pullback_compose() {
        let j = [[1.0, 2.0, 0.5], [0.0, 1.0, -1.0], [2.0, 0.0, 3.0]];
        let k = mat3_inv(&j);
        let p = mat3_mul(&j, &k);
        for i in 0..3 {
            for l in 0..3 {
                let want = if i == l { 1.0 } else { 0.0 };
                assert!((p[i][l] - want).abs() < 1e-12);
            }
        }
        // (f.g)* b = g*(f* b)
        let g = [[0.5, 1.0, 0.0], [1.0, 0.0, 2.0], [0.0, -1.0, 1.0]];
        let b = [1.0, -2.0, 3.0];
        let lhs = pullback2(&mat3_mul(&j, &g), &b);
        let rhs = pullback2(&g, &pullback2(&j, &b));
        for i in 0..3 {
            assert!((lhs[i] - rhs[i]).abs() < 1e-12);
        }
        assert!((det3(&MAT3_ID) - 1.0).abs() < 1e-15);
        let v = [1.0, 2.0, 3.0];
        let tv = mat3_tvec(&j, &v);
        let expect = [
            j[0][0] * v[0] + j[1][0] * v[1] + j[2][0] * v[2],
            j[0][1] * v[0] + j[1][1] * v[1] + j[2][1] * v[2],
            j[0][2] * v[0] + j[1][2] * v[1] + j[2][2] * v[2],
        ];
        for i in 0..3 {
            assert!((tv[i] - expect[i]).abs() < 1e-15);
        }
    }
}
