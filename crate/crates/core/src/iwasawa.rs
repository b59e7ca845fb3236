//! Iwasawa decomposition g = vbar a k and the weight functionals built on it.
//!
//! Convention, fixed once for the whole crate: vbar is unit lower-triangular,
//! a is a positive diagonal, k is orthogonal/unitary. The decomposition is
//! computed from the LDL* factorization of g g* = vbar diag(a^2) vbar*, and
//! every weight formula below is validated against this single a-vector.
//!
//! On the a-vector (natural index order) the basic weights act as
//! `Lambda_i(a) = prod_{j>n-i} a_j^{-1}`, which is exactly what the wedge
//! formula `a^{Lambda_i} = |last i columns of g^{-1} wedged|` produces for
//! any invertible g; `mu_j(a) = a_1 ... a_j` matches the leading-row wedge
//! `|first j rows of g wedged|`. These two identities are regression-tested
//! rather than assumed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{gram_log_det, Field, Matrix, Scalar};

/// Factors of g = vbar diag(a) k.
#[derive(Clone, Debug)]
pub struct IwasawaFactors {
    /// Unit lower-triangular factor.
    pub vbar: Matrix,
    /// Positive diagonal, natural order (not sorted).
    pub a: Vec<f64>,
    /// Orthogonal/unitary factor.
    pub k: Matrix,
}

impl IwasawaFactors {
    /// vbar diag(a) k, for reconstruction checks.
    pub fn reconstruct(&self) -> Matrix {
        let ad = Matrix::diag_real(&self.a, self.vbar.field());
        self.vbar.mul(&ad).mul(&self.k)
    }
}

/// Iwasawa decomposition of an invertible matrix.
pub fn iwasawa(g: &Matrix) -> Result<IwasawaFactors> {
    let n = g.n();
    let m = g.mul(&g.adjoint());
    let (l, d) = m.ldl_unit_lower().map_err(|_| Error::Singular)?;
    let a: Vec<f64> = d.iter().map(|&x| x.sqrt()).collect();
    // k = diag(a)^{-1} L^{-1} g via forward substitution on L y = g
    let mut y = g.clone();
    for col in 0..n {
        for i in 0..n {
            let mut s = y[(i, col)];
            for t in 0..i {
                s -= l[(i, t)] * y[(t, col)];
            }
            y[(i, col)] = s;
        }
    }
    let mut k = y;
    for (i, ai) in a.iter().enumerate() {
        k.scale_row(i, 1.0 / ai);
    }
    Ok(IwasawaFactors { vbar: l, a, k })
}

/// log of a(g)^{Lambda_i} for i = 1..n-1, via Gram determinants of the
/// trailing columns of g^{-1}. Computes the inverse once.
pub fn basic_weight_logs(g: &Matrix) -> Result<Vec<f64>> {
    let n = g.n();
    let inv = if g.is_unit_upper_triangular(0.0) {
        g.inverse_unit_upper()
    } else {
        g.inverse()?
    };
    let cols: Vec<Vec<Scalar>> = (0..n).map(|j| inv.col(j)).collect();
    let mut logs = Vec::with_capacity(n - 1);
    for i in 1..n {
        let tail = &cols[n - i..];
        logs.push(0.5 * gram_log_det(tail)?);
    }
    Ok(logs)
}

/// a(g)^{Lambda_i} = |g^{-1} e_{n-i+1} ^ ... ^ g^{-1} e_n|, 1 <= i <= n-1.
pub fn basic_weight(g: &Matrix, i: usize) -> Result<f64> {
    let n = g.n();
    if i == 0 || i >= n {
        return Err(Error::IndexOutOfRange {
            index: i,
            max: n - 1,
        });
    }
    let inv = g.inverse()?;
    let cols: Vec<Vec<Scalar>> = (n - i..n).map(|j| inv.col(j)).collect();
    Ok((0.5 * gram_log_det(&cols)?).exp())
}

/// a(g)^{mu_j} = |e_1 g ^ ... ^ e_j g|, 1 <= j <= n.
pub fn mu_weight(g: &Matrix, j: usize) -> Result<f64> {
    let n = g.n();
    if j == 0 || j > n {
        return Err(Error::IndexOutOfRange { index: j, max: n });
    }
    let rows: Vec<Vec<Scalar>> = (0..j).map(|i| g.row(i)).collect();
    Ok((0.5 * gram_log_det(&rows)?).exp())
}

/// Value of Lambda_i on a diagonal a-vector under the vbar-a-k convention.
pub fn lambda_on_a(a: &[f64], i: usize) -> f64 {
    let n = a.len();
    a[n - i..].iter().map(|&x| 1.0 / x).product()
}

/// Value of mu_j on a diagonal a-vector: a_1 ... a_j.
pub fn mu_on_a(a: &[f64], j: usize) -> f64 {
    a[..j].iter().product()
}

/// rho(log a) for SL(n, F) on an a-vector in natural order:
/// (dim_R F / 2) * sum_i (n + 1 - 2i) log a_i.
pub fn rho_log_on_a(a: &[f64], field: Field) -> f64 {
    let n = a.len();
    let s: f64 = a
        .iter()
        .enumerate()
        .map(|(idx, &ai)| (n as f64 - 1.0 - 2.0 * idx as f64) * ai.ln())
        .sum();
    0.5 * field.dim_r() as f64 * s
}

/// log a(g)^{2 rho} for g in SL(n, F), as the product of trailing-column
/// wedge norms of g^{-1}. Valid for unimodular g; exact on unipotent input.
pub fn sl_rho2_log(g: &Matrix) -> Result<f64> {
    let logs = basic_weight_logs(g)?;
    Ok(2.0 * g.field().dim_r() as f64 * logs.iter().sum::<f64>())
}

/// Exact rational coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

impl Ratio {
    pub fn new(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Ratio { num, den }
    }

    pub fn int(num: i64) -> Self {
        Ratio { num, den: 1 }
    }

    pub fn as_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// Which family of basic weights a combination refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WeightBasis {
    /// Highest weights Lambda_1 .. Lambda_{n-1} (trailing-column wedges of g^{-1}).
    Lambda,
    /// Partial products mu_1 .. mu_n (leading-row wedges of g).
    Mu,
}

/// Rational combination of basic weights; evaluates as a product of powers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightCombo {
    pub basis: WeightBasis,
    pub coeffs: Vec<Ratio>,
}

impl WeightCombo {
    pub fn new(basis: WeightBasis, coeffs: Vec<Ratio>) -> Self {
        WeightCombo { basis, coeffs }
    }

    fn check_len(&self, n: usize) -> Result<()> {
        let max = match self.basis {
            WeightBasis::Lambda => n - 1,
            WeightBasis::Mu => n,
        };
        if self.coeffs.len() > max {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients exceed the {} weights available at n = {}",
                self.coeffs.len(),
                max,
                n
            )));
        }
        Ok(())
    }

    /// Evaluate a^{sum c_i w_i} on a group element via the wedge formulas.
    pub fn evaluate(&self, g: &Matrix) -> Result<f64> {
        self.check_len(g.n())?;
        let mut log_val = 0.0f64;
        match self.basis {
            WeightBasis::Lambda => {
                let logs = basic_weight_logs(g)?;
                for (idx, c) in self.coeffs.iter().enumerate() {
                    log_val += c.as_f64() * logs[idx];
                }
            }
            WeightBasis::Mu => {
                for (idx, c) in self.coeffs.iter().enumerate() {
                    if c.num == 0 {
                        continue;
                    }
                    let rows: Vec<Vec<Scalar>> = (0..=idx).map(|i| g.row(i)).collect();
                    log_val += c.as_f64() * 0.5 * gram_log_det(&rows)?;
                }
            }
        }
        Ok(log_val.exp())
    }

    /// Evaluate on a bare a-vector (the oracle side of the weight tests).
    pub fn evaluate_on_a(&self, a: &[f64]) -> Result<f64> {
        self.check_len(a.len())?;
        let mut log_val = 0.0f64;
        for (idx, c) in self.coeffs.iter().enumerate() {
            let w = match self.basis {
                WeightBasis::Lambda => lambda_on_a(a, idx + 1),
                WeightBasis::Mu => mu_on_a(a, idx + 1),
            };
            log_val += c.as_f64() * w.ln();
        }
        Ok(log_val.exp())
    }
}

/// Group norm |g| = a^rho on the descending singular values; equals 1 on K
/// and >= 1 for unimodular g.
pub fn group_norm(g: &Matrix) -> Result<f64> {
    let sv = g.singular_values()?;
    Ok(rho_log_on_a(&sv, g.field()).exp())
}

fn is_block_diag_unipotent(v: &Matrix, tol: f64) -> bool {
    let n = v.n();
    if !v.is_unit_upper_triangular(tol) {
        return false;
    }
    (0..n - 1).all(|i| v[(i, n - 1)].norm() <= tol)
}

fn is_last_column_unipotent(v: &Matrix, tol: f64) -> bool {
    let n = v.n();
    if !v.is_unit_upper_triangular(tol) {
        return false;
    }
    (0..n).all(|i| (i + 1..n - 1).all(|j| v[(i, j)].norm() <= tol))
}

/// Residual of the factorization identity
/// a(v* v1) = a(v*) a(k(v*) v1 k(v*)^{-1})
/// for v* block-diagonal unipotent and v1 last-column unipotent:
/// the largest relative component difference of the two a-vectors.
pub fn cocycle_residual(v_star: &Matrix, v1: &Matrix) -> Result<f64> {
    let n = v_star.n();
    if v1.n() != n {
        return Err(Error::DimensionMismatch(
            "cocycle inputs differ in size".into(),
        ));
    }
    let tol = 1e-12;
    if !is_block_diag_unipotent(v_star, tol) {
        return Err(Error::BadShape(
            "first argument must be unipotent with trivial last row and column".into(),
        ));
    }
    if !is_last_column_unipotent(v1, tol) {
        return Err(Error::BadShape(
            "second argument must be identity plus a last-column block".into(),
        ));
    }
    let lhs = iwasawa(&v_star.mul(v1))?.a;
    let star = iwasawa(v_star)?;
    let conj = star.k.mul(v1).mul(&star.k.adjoint());
    let inner = iwasawa(&conj)?.a;
    let mut worst = 0.0f64;
    for i in 0..n {
        let rhs = star.a[i] * inner[i];
        let rel = (lhs[i] - rhs).abs() / lhs[i].max(rhs);
        worst = worst.max(rel);
    }
    Ok(worst)
}
