//! Dense square matrices over R or C in double precision.
//!
//! Every entry is stored as an explicit (re, im) pair; matrices tagged
//! `Field::Real` keep all imaginary parts at zero so both fields share one
//! code path. Sizes stay at desk scale (n <= 16), so the factorizations
//! below favor clarity and stable pivots over blocked performance.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Scalar of the ambient field; real values carry a zero imaginary part.
pub type Scalar = Complex64;

/// Default tolerance for exact identities (reconstruction, residuals).
pub const TOL_IDENTITY: f64 = 1e-9;
/// Default tolerance for spectral quantities (singular values, norms).
pub const TOL_SPECTRAL: f64 = 1e-8;

/// Base field tag shared by all entries of a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    /// Real dimension of the field: 1 for R, 2 for C.
    pub fn dim_r(self) -> usize {
        match self {
            Field::Real => 1,
            Field::Complex => 2,
        }
    }
}

impl std::fmt::Display for Field {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Field::Real => write!(f, "R"),
            Field::Complex => write!(f, "C"),
        }
    }
}

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    field: Field,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(n: usize, field: Field) -> Self {
        Matrix {
            n,
            field,
            data: vec![Scalar::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize, field: Field) -> Self {
        let mut m = Self::zeros(n, field);
        for i in 0..n {
            m[(i, i)] = Scalar::new(1.0, 0.0);
        }
        m
    }

    /// Build from a closure over (row, col).
    pub fn from_fn(n: usize, field: Field, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut m = Self::zeros(n, field);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build a real matrix from row slices.
    pub fn from_rows_real(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "rows must be square");
        Matrix::from_fn(n, Field::Real, |i, j| Scalar::new(rows[i][j], 0.0))
    }

    pub fn diag(entries: &[Scalar], field: Field) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, field);
        for i in 0..n {
            m[(i, i)] = entries[i];
        }
        m
    }

    pub fn diag_real(entries: &[f64], field: Field) -> Self {
        let d: Vec<Scalar> = entries.iter().map(|&x| Scalar::new(x, 0.0)).collect();
        Self::diag(&d, field)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn col(&self, j: usize) -> Vec<Scalar> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Scalar> {
        self.data[i * self.n..(i + 1) * self.n].to_vec()
    }

    /// Conjugate transpose (plain transpose over R).
    pub fn adjoint(&self) -> Matrix {
        Matrix::from_fn(self.n, self.field, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "matrix product dimension mismatch");
        let n = self.n;
        let mut out = Matrix::zeros(n, self.field);
        for i in 0..n {
            for k in 0..n {
                let s = self[(i, k)];
                if s.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += s * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// Scale row i by a real factor.
    pub fn scale_row(&mut self, i: usize, factor: f64) {
        for j in 0..self.n {
            self[(i, j)] *= factor;
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest modulus of entry-wise difference.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// max |g g* - I|: zero iff g is orthogonal/unitary.
    pub fn unitary_residual(&self) -> f64 {
        self.mul(&self.adjoint())
            .max_abs_diff(&Matrix::identity(self.n, self.field))
    }

    /// Determinant via LU with partial pivoting.
    pub fn det(&self) -> Scalar {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = Scalar::new(1.0, 0.0);
        for k in 0..n {
            let mut piv = k;
            let mut best = a[k * n + k].norm();
            for i in k + 1..n {
                let v = a[i * n + k].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 {
                return Scalar::new(0.0, 0.0);
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                if f.norm_sqr() == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
            }
        }
        det
    }

    /// Inverse via Gauss-Jordan with partial pivoting.
    pub fn inverse(&self) -> Result<Matrix> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Matrix::identity(n, self.field);
        for k in 0..n {
            let mut piv = k;
            let mut best = a[(k, k)].norm();
            for i in k + 1..n {
                let v = a[(i, k)].norm();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best.is_nan() || best <= f64::MIN_POSITIVE * 1e10 {
                return Err(Error::Singular);
            }
            if piv != k {
                for j in 0..n {
                    let t = a[(k, j)];
                    a[(k, j)] = a[(piv, j)];
                    a[(piv, j)] = t;
                    let t = inv[(k, j)];
                    inv[(k, j)] = inv[(piv, j)];
                    inv[(piv, j)] = t;
                }
            }
            let pivot = a[(k, k)];
            for j in 0..n {
                a[(k, j)] /= pivot;
                inv[(k, j)] /= pivot;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)];
                if f.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let akj = a[(k, j)];
                    let ikj = inv[(k, j)];
                    a[(i, j)] -= f * akj;
                    inv[(i, j)] -= f * ikj;
                }
            }
        }
        Ok(inv)
    }

    /// Exact-shape inverse for unit upper-triangular matrices (back substitution).
    pub fn inverse_unit_upper(&self) -> Matrix {
        let n = self.n;
        let mut inv = Matrix::identity(n, self.field);
        // columns of the inverse solved one at a time, bottom-up
        for j in 0..n {
            for i in (0..j).rev() {
                let mut s = Scalar::new(0.0, 0.0);
                for k in i + 1..=j {
                    s += self[(i, k)] * inv[(k, j)];
                }
                inv[(i, j)] = -s;
            }
        }
        inv
    }

    /// True when the matrix is upper triangular with unit diagonal (tolerance `tol`).
    pub fn is_unit_upper_triangular(&self, tol: f64) -> bool {
        for i in 0..self.n {
            if (self[(i, i)] - Scalar::new(1.0, 0.0)).norm() > tol {
                return false;
            }
            for j in 0..i {
                if self[(i, j)].norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// LDL* factorization of a Hermitian positive-definite matrix:
    /// returns unit lower-triangular L and positive real d with L diag(d) L* = self.
    ///
    /// Reads the lower triangle only. Fails on a non-positive pivot.
    pub fn ldl_unit_lower(&self) -> Result<(Matrix, Vec<f64>)> {
        let n = self.n;
        let mut l = Matrix::identity(n, self.field);
        let mut d = vec![0.0f64; n];
        let scale = self.max_abs().max(1.0);
        for j in 0..n {
            let mut dj = self[(j, j)].re;
            for k in 0..j {
                dj -= l[(j, k)].norm_sqr() * d[k];
            }
            if dj <= scale * 1e-300 || !dj.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    index: j,
                    pivot: dj,
                });
            }
            d[j] = dj;
            for i in j + 1..n {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)].conj() * d[k];
                }
                l[(i, j)] = s / dj;
            }
        }
        Ok((l, d))
    }

    /// Eigenvalues of a Hermitian matrix by cyclic Jacobi, ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let n = self.n;
        let mut h = self.clone();
        let fro: f64 = h.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if fro == 0.0 {
            return vec![0.0; n];
        }
        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in p + 1..n {
                    off += h[(p, q)].norm_sqr();
                }
            }
            if off.sqrt() <= 1e-15 * fro {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let gamma = h[(p, q)];
                    let g = gamma.norm();
                    if g <= 1e-300 {
                        continue;
                    }
                    let phase = gamma / g;
                    let app = h[(p, p)].re;
                    let aqq = h[(q, q)].re;
                    let tau = (aqq - app) / (2.0 * g);
                    let t = if tau >= 0.0 {
                        1.0 / (tau + (1.0 + tau * tau).sqrt())
                    } else {
                        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    // U = [[c, s],[-s*conj(phase), c*conj(phase)]]; apply H <- U* H U
                    let u11 = Scalar::new(c, 0.0);
                    let u12 = Scalar::new(s, 0.0);
                    let u21 = -phase.conj() * s;
                    let u22 = phase.conj() * c;
                    for i in 0..n {
                        let hp = h[(i, p)];
                        let hq = h[(i, q)];
                        h[(i, p)] = hp * u11 + hq * u21;
                        h[(i, q)] = hp * u12 + hq * u22;
                    }
                    for j in 0..n {
                        let hp = h[(p, j)];
                        let hq = h[(q, j)];
                        h[(p, j)] = u11.conj() * hp + u21.conj() * hq;
                        h[(q, j)] = u12.conj() * hp + u22.conj() * hq;
                    }
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| h[(i, i)].re).collect();
        eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eig
    }

    /// Singular values in descending order, via eigenvalues of g* g.
    pub fn singular_values(&self) -> Result<Vec<f64>> {
        let h = self.adjoint().mul(self);
        let eig = h.hermitian_eigenvalues();
        if eig.iter().any(|&e| e.is_nan() || e <= 0.0 || e.is_infinite()) {
            return Err(Error::Singular);
        }
        let mut sv: Vec<f64> = eig.iter().map(|&e| e.sqrt()).collect();
        sv.reverse();
        Ok(sv)
    }

    /// Matrix exponential by scaling-and-squaring with a truncated series.
    /// Terminates exactly for nilpotent input.
    pub fn exp(&self) -> Matrix {
        let n = self.n;
        let norm = self.max_abs();
        let s = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let factor = 1.0 / f64::powi(2.0, s as i32);
        let b = Matrix::from_fn(n, self.field, |i, j| self[(i, j)] * factor);
        let mut sum = Matrix::identity(n, self.field);
        let mut term = Matrix::identity(n, self.field);
        for k in 1..200 {
            term = term.mul(&b);
            for e in term.data.iter_mut() {
                *e /= k as f64;
            }
            let tn = term.max_abs();
            if tn == 0.0 {
                break;
            }
            for (acc, t) in sum.data.iter_mut().zip(&term.data) {
                *acc += t;
            }
            if tn < 1e-16 * sum.max_abs() {
                break;
            }
        }
        let mut out = sum;
        for _ in 0..s {
            out = out.mul(&out);
        }
        out
    }

    /// Top-left k x k block.
    pub fn leading_block(&self, k: usize) -> Matrix {
        assert!(k <= self.n);
        Matrix::from_fn(k, self.field, |i, j| self[(i, j)])
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Scalar;
    fn index(&self, (i, j): (usize, usize)) -> &Scalar {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Scalar {
        &mut self.data[i * self.n + j]
    }
}

/// log det of the Gram matrix G = M* M of the given columns.
///
/// Computed as 2 sum log |r_jj| from a Householder QR of the (normalized)
/// column matrix. Forming G and factoring it squares the condition number
/// and wipes out the nearly collinear column sets that dominate large
/// truncation radii; QR sees them at working precision. Collinear inputs
/// return -inf rather than an error.
pub fn gram_log_det(cols: &[Vec<Scalar>]) -> Result<f64> {
    let k = cols.len();
    if k == 0 {
        return Err(Error::DimensionMismatch("no columns given".into()));
    }
    let dim = cols[0].len();
    if cols.iter().any(|c| c.len() != dim) {
        return Err(Error::DimensionMismatch(
            "columns have differing lengths".into(),
        ));
    }
    if k > dim {
        return Err(Error::DimensionMismatch(format!(
            "{k} columns exceed ambient dimension {dim}"
        )));
    }
    let mut log_scale = 0.0f64;
    // column-major working copy, unit column norms
    let mut a: Vec<Vec<Scalar>> = Vec::with_capacity(k);
    for c in cols {
        let nrm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm == 0.0 || !nrm.is_finite() {
            return Ok(f64::NEG_INFINITY);
        }
        log_scale += 2.0 * nrm.ln();
        a.push(c.iter().map(|z| z / nrm).collect());
    }
    let mut log_det = 0.0f64;
    let mut v = vec![Scalar::new(0.0, 0.0); dim];
    for j in 0..k {
        let sigma = a[j][j..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if sigma == 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        log_det += 2.0 * sigma.ln();
        if j + 1 == k {
            break;
        }
        // reflector v = x + phase(x_0) sigma e_0 annihilating the subcolumn
        let head = a[j][j];
        let phase = if head.norm() == 0.0 {
            Scalar::new(1.0, 0.0)
        } else {
            head / head.norm()
        };
        v[j..dim].copy_from_slice(&a[j][j..]);
        v[j] += phase * sigma;
        let vnorm_sq: f64 = v[j..].iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(j + 1) {
            let mut dot = Scalar::new(0.0, 0.0);
            for t in j..dim {
                dot += v[t].conj() * col[t];
            }
            let f = dot * (2.0 / vnorm_sq);
            for t in j..dim {
                col[t] -= f * v[t];
            }
        }
    }
    Ok(log_det + log_scale)
}

/// Norm of the wedge product c_1 ^ ... ^ c_k, i.e. sqrt(det(M* M)).
/// Equals |det M| when k matches the ambient dimension.
pub fn gram_norm(cols: &[Vec<Scalar>]) -> Result<f64> {
    Ok((0.5 * gram_log_det(cols)?).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(re: f64) -> Scalar {
        Scalar::new(re, 0.0)
    }

    #[test]
    fn ldl_identity() {
        let m = Matrix::identity(4, Field::Real);
        let (l, d) = m.ldl_unit_lower().unwrap();
        assert_eq!(l, Matrix::identity(4, Field::Real));
        assert!(d.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn ldl_hand_2x2() {
        // m = [[2,1],[1,1]] -> L = [[1,0],[0.5,1]], d = [2, 0.5]
        let m = Matrix::from_rows_real(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let (l, d) = m.ldl_unit_lower().unwrap();
        assert!((l[(1, 0)].re - 0.5).abs() < 1e-15);
        assert!((d[0] - 2.0).abs() < 1e-15);
        assert!((d[1] - 0.5).abs() < 1e-15);
        // reconstruction
        let dm = Matrix::diag_real(&d, Field::Real);
        let rec = l.mul(&dm).mul(&l.adjoint());
        assert!(rec.max_abs_diff(&m) < 1e-9 * m.max_abs());
    }

    #[test]
    fn ldl_reconstructs_gram_of_unimodular() {
        use crate::rng::random_sl;
        for i in 0..100u64 {
            let g = random_sl(61, i, 3, Field::Real);
            let m = g.mul(&g.adjoint());
            let (l, d) = m.ldl_unit_lower().unwrap();
            let rec = l.mul(&Matrix::diag_real(&d, Field::Real)).mul(&l.adjoint());
            assert!(rec.max_abs_diff(&m) < 1e-9 * m.max_abs());
        }
    }

    #[test]
    fn ldl_rejects_indefinite() {
        let m = Matrix::from_rows_real(&[&[1.0, 2.0], &[2.0, 1.0]]);
        assert!(matches!(
            m.ldl_unit_lower(),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn gram_norm_orthonormal_and_single() {
        let e1 = vec![s(1.0), s(0.0), s(0.0)];
        let e2 = vec![s(0.0), s(1.0), s(0.0)];
        assert!((gram_norm(&[e1, e2]).unwrap() - 1.0).abs() < 1e-12);
        let v = vec![s(3.0), s(4.0)];
        assert!((gram_norm(&[v]).unwrap() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn gram_norm_full_rank_matches_det() {
        let m = Matrix::from_rows_real(&[
            &[1.0, 2.0, 0.5, -1.0],
            &[0.0, 1.0, 3.0, 2.0],
            &[4.0, -2.0, 1.0, 0.0],
            &[1.0, 1.0, 1.0, 1.0],
        ]);
        let cols: Vec<Vec<Scalar>> = (0..4).map(|j| m.col(j)).collect();
        let g = gram_norm(&cols).unwrap();
        assert!((g - m.det().norm()).abs() < 1e-9 * g);
    }

    #[test]
    fn gram_norm_dimension_mismatch() {
        let a = vec![s(1.0), s(0.0)];
        let b = vec![s(1.0)];
        assert!(gram_norm(&[a, b]).is_err());
    }

    #[test]
    fn singular_values_diagonal() {
        let m = Matrix::diag_real(&[2.0, 0.5], Field::Real);
        let sv = m.singular_values().unwrap();
        assert!((sv[0] - 2.0).abs() < 1e-12);
        assert!((sv[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_values_identity() {
        let sv = Matrix::identity(5, Field::Complex).singular_values().unwrap();
        assert!(sv.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn singular_values_multiply_to_det() {
        use crate::rng::random_sl;
        for i in 0..50u64 {
            let g = random_sl(88, i, 3, Field::Real);
            let product: f64 = g.singular_values().unwrap().iter().product();
            assert!((product - 1.0).abs() < 1e-8, "sample {i}: {product}");
        }
    }

    #[test]
    fn singular_input_rejected() {
        let m = Matrix::from_rows_real(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert!(m.singular_values().is_err());
        assert!(m.inverse().is_err());
    }

    #[test]
    fn inverse_roundtrip_complex() {
        let m = Matrix::from_fn(3, Field::Complex, |i, j| {
            Scalar::new(
                ((i * i + 2 * j) % 5) as f64 + 1.0,
                ((3 * i + j * j) % 4) as f64 - 1.5,
            )
        });
        let inv = m.inverse().unwrap();
        assert!(m.mul(&inv).max_abs_diff(&Matrix::identity(3, Field::Complex)) < 1e-12);
    }

    #[test]
    fn unit_upper_inverse_exact() {
        let mut m = Matrix::identity(4, Field::Real);
        m[(0, 1)] = s(2.0);
        m[(0, 3)] = s(-1.0);
        m[(1, 2)] = s(0.5);
        m[(2, 3)] = s(3.0);
        let inv = m.inverse_unit_upper();
        assert!(m.mul(&inv).max_abs_diff(&Matrix::identity(4, Field::Real)) == 0.0);
    }

    #[test]
    fn exp_nilpotent_terminates() {
        let mut x = Matrix::zeros(3, Field::Real);
        x[(0, 1)] = s(1.0);
        x[(1, 2)] = s(2.0);
        let e = x.exp();
        // exp of this 2-step nilpotent: I + X + X^2/2 with X^2 = 2 E13
        assert!((e[(0, 1)].re - 1.0).abs() < 1e-15);
        assert!((e[(1, 2)].re - 2.0).abs() < 1e-15);
        assert!((e[(0, 2)].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_diagonal() {
        let x = Matrix::diag_real(&[1.0, -1.0], Field::Real);
        let e = x.exp();
        assert!((e[(0, 0)].re - 1.0f64.exp()).abs() < 1e-12);
        assert!((e[(1, 1)].re - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn ldl_reconstruction_random_ensemble() {
        use crate::rng::{random_positive_definite, SampleStream};
        for i in 0..1000u64 {
            let n = 2 + (i % 7) as usize;
            let field = if i % 2 == 0 { Field::Real } else { Field::Complex };
            let mut stream = SampleStream::at(271, i);
            let m = random_positive_definite(&mut stream, n, field);
            let (l, d) = m.ldl_unit_lower().expect("positive definite");
            let rec = l.mul(&Matrix::diag_real(&d, field)).mul(&l.adjoint());
            assert!(
                rec.max_abs_diff(&m) < 1e-9 * m.max_abs(),
                "sample {i}: reconstruction off by {}",
                rec.max_abs_diff(&m) / m.max_abs()
            );
            assert!(d.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn gram_norm_orthogonal_append() {
        use crate::rng::SampleStream;
        // appending u orthogonal to the span multiplies the wedge norm by |u|
        for i in 0..200u64 {
            let mut stream = SampleStream::at(99, i);
            let n = 5;
            let k = 1 + (i % 3) as usize;
            let cols: Vec<Vec<Scalar>> = (0..k)
                .map(|_| {
                    (0..n)
                        .map(|_| Scalar::new(stream.uniform(-5.0, 5.0), stream.uniform(-5.0, 5.0)))
                        .collect()
                })
                .collect();
            let mut u: Vec<Scalar> = (0..n)
                .map(|_| Scalar::new(stream.uniform(-5.0, 5.0), stream.uniform(-5.0, 5.0)))
                .collect();
            // orthonormalize the columns, then project u onto the complement
            let mut basis: Vec<Vec<Scalar>> = Vec::new();
            for c in &cols {
                let mut q = c.clone();
                for b in &basis {
                    let dot: Scalar = b.iter().zip(&q).map(|(a, x)| a.conj() * x).sum();
                    for (qe, be) in q.iter_mut().zip(b) {
                        *qe -= dot * be;
                    }
                }
                let nq = q.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                for qe in q.iter_mut() {
                    *qe /= nq;
                }
                basis.push(q);
            }
            for _ in 0..2 {
                for b in &basis {
                    let dot: Scalar = b.iter().zip(&u).map(|(a, x)| a.conj() * x).sum();
                    for (ue, be) in u.iter_mut().zip(b) {
                        *ue -= dot * be;
                    }
                }
            }
            let u_norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if u_norm < 1e-6 {
                continue;
            }
            let base = gram_norm(&cols).unwrap();
            let mut extended = cols.clone();
            extended.push(u);
            let ext = gram_norm(&extended).unwrap();
            assert!(
                (ext - base * u_norm).abs() < 1e-9 * ext.max(base * u_norm),
                "sample {i}: {ext} vs {}",
                base * u_norm
            );
        }
    }

    #[test]
    fn singular_values_reciprocal_under_inverse() {
        use crate::rng::random_sl;
        for i in 0..200u64 {
            let n = 2 + (i % 5) as usize;
            let field = if i % 2 == 0 { Field::Real } else { Field::Complex };
            let g = random_sl(1234, i, n, field);
            let sv = g.singular_values().unwrap();
            let mut sv_inv = g.inverse().unwrap().singular_values().unwrap();
            sv_inv.reverse();
            for (a, b) in sv.iter().zip(&sv_inv) {
                assert!(
                    (a - 1.0 / b).abs() < 1e-8 * a.max(1.0 / b),
                    "sample {i}: {a} vs 1/{b}"
                );
            }
        }
    }

    #[test]
    fn hermitian_eigenvalues_complex() {
        // [[2, i],[-i, 2]] has eigenvalues 1 and 3
        let mut h = Matrix::zeros(2, Field::Complex);
        h[(0, 0)] = s(2.0);
        h[(1, 1)] = s(2.0);
        h[(0, 1)] = Scalar::new(0.0, 1.0);
        h[(1, 0)] = Scalar::new(0.0, -1.0);
        let e = h.hermitian_eigenvalues();
        assert!((e[0] - 1.0).abs() < 1e-12);
        assert!((e[1] - 3.0).abs() < 1e-12);
    }
}
