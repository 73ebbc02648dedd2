//! Small dense complex linear algebra.
//!
//! Everything in this crate works on matrices with at most a few thousand rows
//! and at most ~20 columns, so the implementations favour robustness and zero
//! dependencies over asymptotics: Householder QR for least squares, cyclic
//! Jacobi for Hermitian eigenvalues (singular values come from the Gram
//! matrix), and modified Gram-Schmidt for orthonormal bases.

use num_complex::Complex64;

pub type C64 = Complex64;

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Build from a row-major nested slice.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        CMat {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    /// Build from real entries (imaginary parts zero).
    pub fn from_real(rows: &[Vec<f64>]) -> Self {
        let arr: Vec<Vec<C64>> = rows
            .iter()
            .map(|row| row.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        CMat::from_rows(&arr)
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum::<C64>()
            })
            .collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Gram matrix `A* A` (cols × cols, Hermitian positive semidefinite).
    pub fn gram(&self) -> CMat {
        let k = self.cols;
        let mut g = CMat::zeros(k, k);
        for p in 0..k {
            for q in p..k {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..self.rows {
                    s += self[(i, p)].conj() * self[(i, q)];
                }
                g[(p, q)] = s;
                g[(q, p)] = s.conj();
            }
        }
        g
    }

    pub fn push_row(&mut self, row: &[C64]) {
        assert_eq!(row.len(), self.cols);
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn inf_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn two_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Least squares `min_x ‖Ax − b‖₂` by Householder QR, `rows ≥ cols` required.
///
/// Returns `None` when a diagonal of `R` collapses below `1e-14` times the
/// largest one (numerically rank deficient).
pub fn lstsq(a: &CMat, b: &[C64]) -> Option<Vec<C64>> {
    assert_eq!(a.rows, b.len());
    let (m, n) = (a.rows, a.cols);
    assert!(m >= n, "lstsq needs rows >= cols");
    let mut r = a.clone();
    let mut rhs = b.to_vec();

    for j in 0..n {
        // Householder vector for column j below the diagonal.
        let norm_x: f64 = (j..m).map(|i| r[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = r[(j, j)];
        let phase = if x0.norm() == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm_x;
        let mut v: Vec<C64> = (j..m).map(|i| r[(i, j)]).collect();
        v[0] -= alpha;
        let vnorm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sqr == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm_sqr;
        // Apply H = I − β v v* to the trailing columns and the rhs.
        for col in j..n {
            let dot: C64 = v
                .iter()
                .enumerate()
                .map(|(i, vi)| vi.conj() * r[(j + i, col)])
                .sum();
            let scale = beta * dot;
            for (i, vi) in v.iter().enumerate() {
                let val = r[(j + i, col)] - scale * vi;
                r[(j + i, col)] = val;
            }
        }
        let dot: C64 = v
            .iter()
            .enumerate()
            .map(|(i, vi)| vi.conj() * rhs[j + i])
            .sum();
        let scale = beta * dot;
        for (i, vi) in v.iter().enumerate() {
            rhs[j + i] -= scale * vi;
        }
    }

    let diag_max = (0..n).map(|j| r[(j, j)].norm()).fold(0.0, f64::max);
    if diag_max == 0.0 {
        return None;
    }
    for j in 0..n {
        if r[(j, j)].norm() < 1e-14 * diag_max {
            return None;
        }
    }

    // Back substitution on the upper triangle.
    let mut x = vec![C64::new(0.0, 0.0); n];
    for j in (0..n).rev() {
        let mut s = rhs[j];
        for l in j + 1..n {
            s -= r[(j, l)] * x[l];
        }
        x[j] = s / r[(j, j)];
    }
    Some(x)
}

/// Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations,
/// ascending order. Intended for `k ≤ ~20`.
pub fn hermitian_eigenvalues(g: &CMat) -> Vec<f64> {
    assert_eq!(g.rows, g.cols);
    let n = g.rows;
    let mut a = g.clone();
    let scale = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| a[(i, j)].norm())
        .fold(0.0, f64::max)
        .max(1e-300);

    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[(p, q)].norm_sqr())
            .sum();
        if off.sqrt() < 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm() < 1e-18 * scale {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / apq.norm();
                // Rotation angle zeroing the (p,q) entry.
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Columns p and q of the unitary rotation:
                //   R[p,p]=c, R[p,q]=s·phase, R[q,p]=−s·conj(phase), R[q,q]=c.
                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * c - aiq * (s * phase.conj());
                    a[(i, q)] = aip * (s * phase) + aiq * c;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = apj * c - aqj * (s * phase);
                    a[(q, j)] = apj * (s * phase.conj()) + aqj * c;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Singular values of `a` in the column sense: `cols` values, padded with
/// zeros when `rows < cols`, ascending. This is the convention under which
/// `‖Ax‖₂ ≥ σ_min ‖x‖₂` holds for every `x`.
///
/// One-sided (Hestenes) Jacobi on the columns: unitary plane rotations
/// orthogonalize column pairs until the mutual projections vanish, and the
/// singular values are the resulting column norms. Working on the matrix
/// itself rather than its Gram matrix keeps tiny singular values accurate to
/// about `ε·‖A‖` absolutely — the Gram route loses half the digits and floors
/// near-zero values at ~1e−8.
pub fn column_singular_values(a: &CMat) -> Vec<f64> {
    let n = a.cols;
    if n == 0 {
        return Vec::new();
    }
    let m = a.rows.max(n);
    // Column-major working copy, zero-padded to at least n rows.
    let mut cols: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut col = vec![C64::new(0.0, 0.0); m];
            for i in 0..a.rows {
                col[i] = a[(i, j)];
            }
            col
        })
        .collect();

    for _sweep in 0..60 {
        let mut converged = true;
        for p in 0..n {
            for q in p + 1..n {
                let app: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let aqq: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let apq: C64 = cols[p]
                    .iter()
                    .zip(&cols[q])
                    .map(|(x, y)| x.conj() * y)
                    .sum();
                if apq.norm() <= 1e-15 * (app * aqq).sqrt().max(1e-300) {
                    continue;
                }
                converged = false;
                let phase = apq / apq.norm();
                let tau = (aqq - app) / (2.0 * apq.norm());
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cth = 1.0 / (1.0 + t * t).sqrt();
                let sth = t * cth;
                for i in 0..m {
                    let bp = cols[p][i];
                    let bq = cols[q][i];
                    cols[p][i] = bp * cth - bq * (sth * phase.conj());
                    cols[q][i] = bp * (sth * phase) + bq * cth;
                }
            }
        }
        if converged {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|col| two_norm(col)).collect();
    sv.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sv
}

/// Ratio of the largest to the smallest column singular value; `f64::INFINITY`
/// when the matrix is numerically rank deficient.
pub fn condition_number(a: &CMat) -> f64 {
    let sv = column_singular_values(a);
    let max = sv.last().copied().unwrap_or(0.0);
    let min = sv.first().copied().unwrap_or(0.0);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// Returns an orthonormal basis for the span of `cols` (vectors in `ℂ^dim`),
/// dropping directions whose residual norm falls below `1e-12` of the input.
pub fn orthonormalize(cols: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for c in cols {
        let scale = two_norm(c).max(1e-300);
        let mut v = c.clone();
        for _ in 0..2 {
            for b in &basis {
                let dot: C64 = b.iter().zip(v.iter()).map(|(bi, vi)| bi.conj() * vi).sum();
                for (vi, bi) in v.iter_mut().zip(b.iter()) {
                    *vi -= dot * bi;
                }
            }
        }
        let n = two_norm(&v);
        if n > 1e-12 * scale {
            for vi in v.iter_mut() {
                *vi /= n;
            }
            basis.push(v);
        }
    }
    basis
}

/// Complex Kahan (compensated) accumulator for long or ill-scaled sums.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: C64,
    comp: C64,
}

impl KahanSum {
    pub fn add(&mut self, x: C64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> C64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn lstsq_exact_square() {
        // [[1, i], [2, 0]] x = [1+i, 2] has solution x = (1, 1).
        let a = CMat::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(2.0, 0.0), c(0.0, 0.0)]]);
        let b = vec![c(1.0, 1.0), c(2.0, 0.0)];
        let x = lstsq(&a, &b).unwrap();
        assert_relative_eq!(x[0].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[0].im, 0.0, epsilon = 1e-12);
        assert_relative_eq!(x[1].re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(x[1].im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn lstsq_overdetermined_residual_orthogonal() {
        // Residual of a least-squares fit must be orthogonal to the columns.
        let a = CMat::from_rows(&[
            vec![c(1.0, 0.0), c(0.5, 0.2)],
            vec![c(0.0, 1.0), c(1.0, -0.3)],
            vec![c(2.0, -1.0), c(0.1, 0.0)],
            vec![c(0.3, 0.3), c(-1.0, 0.5)],
        ]);
        let b = vec![c(1.0, 0.0), c(0.0, 2.0), c(-1.0, 1.0), c(0.5, -0.5)];
        let x = lstsq(&a, &b).unwrap();
        let ax = a.matvec(&x);
        let resid: Vec<C64> = ax.iter().zip(&b).map(|(p, q)| p - q).collect();
        for j in 0..2 {
            let dot: C64 = a
                .col(j)
                .iter()
                .zip(&resid)
                .map(|(ai, ri)| ai.conj() * ri)
                .sum();
            assert!(dot.norm() < 1e-10, "column {j} not orthogonal: {dot}");
        }
    }

    #[test]
    fn lstsq_rank_deficient_detected() {
        let a = CMat::from_rows(&[
            vec![c(1.0, 0.0), c(2.0, 0.0)],
            vec![c(2.0, 0.0), c(4.0, 0.0)],
            vec![c(3.0, 0.0), c(6.0, 0.0)],
        ]);
        let b = vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)];
        assert!(lstsq(&a, &b).is_none());
    }

    #[test]
    fn hermitian_eigenvalues_2x2_closed_form() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let g = CMat::from_rows(&[vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]]);
        let ev = hermitian_eigenvalues(&g);
        assert_relative_eq!(ev[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(ev[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_values_symmetric_2x2() {
        // [[1, s], [s, 1]] has singular values 1−s and 1+s.
        let s = 0.7;
        let a = CMat::from_real(&[vec![1.0, s], vec![s, 1.0]]);
        let sv = column_singular_values(&a);
        assert_relative_eq!(sv[0], 1.0 - s, epsilon = 1e-10);
        assert_relative_eq!(sv[1], 1.0 + s, epsilon = 1e-10);
    }

    #[test]
    fn singular_values_wide_matrix_pad_zero() {
        // A 1×2 row has column rank 1, so the column singular values are (0, ‖a‖).
        let a = CMat::from_real(&[vec![1.0, 1.0]]);
        let sv = column_singular_values(&a);
        assert_relative_eq!(sv[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(sv[1], 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn orthonormalize_produces_unitary_basis() {
        let cols = vec![
            vec![c(1.0, 0.0), c(1.0, 1.0), c(0.0, -1.0)],
            vec![c(0.5, 0.0), c(0.0, 2.0), c(1.0, 0.0)],
        ];
        let basis = orthonormalize(&cols);
        assert_eq!(basis.len(), 2);
        for (i, u) in basis.iter().enumerate() {
            assert_relative_eq!(two_norm(u), 1.0, epsilon = 1e-12);
            for v in basis.iter().skip(i + 1) {
                let dot: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
                assert!(dot.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn kahan_beats_naive_accumulation() {
        let n = 1_000_000;
        let mut acc = KahanSum::default();
        let mut naive = C64::new(0.0, 0.0);
        for _ in 0..n {
            acc.add(c(0.1, -0.1));
            naive += c(0.1, -0.1);
        }
        let want = 0.1 * n as f64;
        let kahan_err = (acc.value().re - want).abs();
        let naive_err = (naive.re - want).abs();
        assert!(kahan_err < 1e-9, "kahan error {kahan_err}");
        assert!(kahan_err <= naive_err);
    }
}
