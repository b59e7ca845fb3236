//! Explicit a^{2rho} / a^{rho} polynomials on unipotent families, the matrix
//! builders realizing those families, the comparison function psi, and two
//! block identities for the compact factor.
//!
//! Every closed form here is cross-checked against the Iwasawa a-projection
//! in the test suites; the `*_log` variants are the overflow-safe paths used
//! by the fuzz and scan machinery.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iwasawa::{iwasawa, Ratio, WeightBasis, WeightCombo};
use crate::logspace::{ln_sq, logsumexp};
use crate::matrix::{Field, Matrix, Scalar};

/// Root-space dimensions and normalization of a real rank-one group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankOneParams {
    /// dim of the lambda root space, >= 1.
    pub m_lambda: u32,
    /// dim of the 2 lambda root space (0 when the nilradical is abelian).
    pub m_2lambda: u32,
    /// lambda(H_lambda) > 0 in the chosen inner product.
    pub lam_h: f64,
}

impl RankOneParams {
    pub fn new(m_lambda: u32, m_2lambda: u32, lam_h: f64) -> Result<Self> {
        if m_lambda < 1 {
            return Err(Error::ParamRange("m_lambda must be >= 1".into()));
        }
        if m_2lambda > 0 && m_lambda <= 1 {
            return Err(Error::ParamRange(
                "m_lambda must exceed 1 when the 2-lambda space is nonzero".into(),
            ));
        }
        if lam_h.is_nan() || lam_h <= 0.0 {
            return Err(Error::ParamRange("lam_h must be positive".into()));
        }
        Ok(RankOneParams {
            m_lambda,
            m_2lambda,
            lam_h,
        })
    }

    /// SO(n,1) preset: abelian nilradical.
    pub fn so_n1(n: u32, lam_h: f64) -> Result<Self> {
        Self::new(n - 1, 0, lam_h)
    }

    /// SU(n,1) preset: m_lambda = 2(n-1), m_2lambda = 1.
    pub fn su_n1(n: u32, lam_h: f64) -> Result<Self> {
        Self::new(2 * (n - 1), 1, lam_h)
    }

    /// Exponent m_lambda/4 + m_2lambda/2 carried by the a^rho formula.
    pub fn exponent(&self) -> f64 {
        self.m_lambda as f64 / 4.0 + self.m_2lambda as f64 / 2.0
    }
}

/// Which group family an integrand or builder refers to.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GroupSpec {
    /// SL(n, F), n >= 2.
    Sl { n: usize, field: Field },
    /// Sp_4(F) in the antidiagonal-form realization.
    Sp4 { field: Field },
    /// SO(n+2, 2) realized in SL(n+4, R); `n` is the free-vector length, n >= 1.
    So { n: usize },
    /// Abstract rank-one group; formula evaluator only, no matrix model.
    RankOne(RankOneParams),
}

impl GroupSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            GroupSpec::Sl { n, .. } if n < 2 => {
                Err(Error::ParamRange("SL needs n >= 2".into()))
            }
            GroupSpec::So { n } if n < 1 => {
                Err(Error::ParamRange("SO(n+2,2) needs n >= 1".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn field(&self) -> Field {
        match *self {
            GroupSpec::Sl { field, .. } | GroupSpec::Sp4 { field } => field,
            GroupSpec::So { .. } | GroupSpec::RankOne(_) => Field::Real,
        }
    }
}

// ---------------------------------------------------------------------------
// SL(4): the six-coordinate polynomial and its commutator restriction
// ---------------------------------------------------------------------------

/// The 4x4 unipotent element with superdiagonal coordinates x1..x6.
pub fn sl4_element(x: &[f64; 6]) -> Matrix {
    let mut m = Matrix::identity(4, Field::Real);
    let s = |v: f64| Scalar::new(v, 0.0);
    m[(0, 1)] = s(x[0]);
    m[(0, 2)] = s(x[1]);
    m[(0, 3)] = s(x[2]);
    m[(1, 2)] = s(x[3]);
    m[(1, 3)] = s(x[4]);
    m[(2, 3)] = s(x[5]);
    m
}

/// a(X)^{2 rho} for the SL(4, R) element above, as the three-factor product.
pub fn phi_sl4(x: &[f64; 6]) -> f64 {
    let [x1, x2, x3, x4, x5, x6] = *x;
    let f1 = 1.0 + x1 * x1 + x2 * x2 + x3 * x3;
    let f2 = 1.0
        + x4 * x4
        + x5 * x5
        + (x2 - x1 * x4).powi(2)
        + (x3 - x1 * x5).powi(2)
        + (x3 * x4 - x2 * x5).powi(2);
    let f3 = 1.0
        + x6 * x6
        + (x5 - x4 * x6).powi(2)
        + (x3 - x1 * x5 - x2 * x6 + x1 * x4 * x6).powi(2);
    f1 * f2 * f3
}

/// Restriction of phi_sl4 to the commutator coordinates (x1 = x4 = x6 = 0).
pub fn phi_sl4_commutator(x2: f64, x3: f64, x5: f64) -> f64 {
    phi_sl4_commutator_log(x2, x3, x5).exp()
}

/// ln of phi_sl4_commutator, safe up to coordinates ~1e150.
pub fn phi_sl4_commutator_log(x2: f64, x3: f64, x5: f64) -> f64 {
    let a = x2 * x2;
    let b = x3 * x3;
    let c = x5 * x5;
    let f1 = (a + b).ln_1p();
    // (1+x2^2)(1+x5^2) + x3^2
    let f2 = logsumexp(&[a.ln_1p() + c.ln_1p(), ln_sq(x3)]);
    let f3 = (b + c).ln_1p();
    f1 + f2 + f3
}

// ---------------------------------------------------------------------------
// Lemma keyformula: last-column unipotents in SL(n, F)
// ---------------------------------------------------------------------------

/// The element `[[I, y],[0, 1]]` of SL(len(y)+1, F).
pub fn last_column_element(y: &[Scalar], field: Field) -> Matrix {
    let n = y.len() + 1;
    let mut m = Matrix::identity(n, field);
    for (i, &yi) in y.iter().enumerate() {
        m[(i, n - 1)] = yi;
    }
    m
}

/// a(v)^{2 rho} = prod_i (1 + sum_{j<=i} |y_j|^2)^{dim_R F} on `[[I, y],[0,1]]`.
pub fn keyformula_rho2(y: &[Scalar], field: Field) -> f64 {
    keyformula_rho2_log(y, field).exp()
}

pub fn keyformula_rho2_log(y: &[Scalar], field: Field) -> f64 {
    let d = field.dim_r() as f64;
    let mut prefix = 0.0f64;
    let mut acc = 0.0f64;
    for yi in y {
        prefix += yi.norm_sqr();
        acc += prefix.ln_1p();
    }
    d * acc
}

// ---------------------------------------------------------------------------
// Sp_4(F)
// ---------------------------------------------------------------------------

/// The symplectic form `J = [[0, L],[-L, 0]]` with L the 2x2 antidiagonal.
pub fn sp4_form(field: Field) -> Matrix {
    let mut j = Matrix::zeros(4, field);
    let one = Scalar::new(1.0, 0.0);
    j[(0, 3)] = one;
    j[(1, 2)] = one;
    j[(2, 1)] = -one;
    j[(3, 0)] = -one;
    j
}

/// Commutator element n(y, z) of Sp_4(F).
pub fn sp4_element(y: Scalar, z: Scalar, field: Field) -> Matrix {
    let mut m = Matrix::identity(4, field);
    m[(0, 2)] = y;
    m[(0, 3)] = z;
    m[(1, 3)] = y;
    m
}

/// max |g J g^T - J|: zero iff g preserves the symplectic (bilinear) form.
pub fn sp4_membership_residual(g: &Matrix) -> f64 {
    let j = sp4_form(g.field());
    let gt = Matrix::from_fn(4, g.field(), |i, jdx| g[(jdx, i)]);
    g.mul(&j).mul(&gt).max_abs_diff(&j)
}

/// a(n(y,z))^{rho} = ((1+|y|^2+|z|^2)((1+|y|^2)^2+|z|^2))^{dim_R F / 2}.
pub fn sp4_commutator_rho(y: Scalar, z: Scalar, field: Field) -> f64 {
    sp4_commutator_rho_log(y, z, field).exp()
}

pub fn sp4_commutator_rho_log(y: Scalar, z: Scalar, field: Field) -> f64 {
    let d = field.dim_r() as f64;
    let y2 = y.norm_sqr();
    let z2 = z.norm_sqr();
    let t1 = (y2 + z2).ln_1p();
    let t2 = logsumexp(&[2.0 * y2.ln_1p(), ln_sq(z.norm())]);
    0.5 * d * (t1 + t2)
}

// ---------------------------------------------------------------------------
// SO(n+2, 2)
// ---------------------------------------------------------------------------

/// The invariant form `H = [[0,0,L],[0,I,0],[L,0,0]]` of size n+4.
pub fn so_form(n: usize) -> Matrix {
    let size = n + 4;
    let mut h = Matrix::zeros(size, Field::Real);
    let one = Scalar::new(1.0, 0.0);
    h[(0, size - 1)] = one;
    h[(1, size - 2)] = one;
    for i in 0..n {
        h[(2 + i, 2 + i)] = one;
    }
    h[(size - 2, 1)] = one;
    h[(size - 1, 0)] = one;
    h
}

/// The commutator-algebra element X of so(n+2,2) with data (y, z).
pub fn so_algebra_element(y: &[f64], z: f64) -> Matrix {
    let n = y.len();
    let size = n + 4;
    let mut x = Matrix::zeros(size, Field::Real);
    let s = |v: f64| Scalar::new(v, 0.0);
    for (j, &yj) in y.iter().enumerate() {
        x[(0, 2 + j)] = s(yj);
        x[(2 + j, size - 1)] = s(-yj);
    }
    x[(0, size - 2)] = s(z);
    x[(1, size - 1)] = s(-z);
    x
}

/// exp of the element above, written out directly.
pub fn so_element(y: &[f64], z: f64) -> Matrix {
    let n = y.len();
    let size = n + 4;
    let norm2: f64 = y.iter().map(|v| v * v).sum();
    let mut m = Matrix::identity(size, Field::Real);
    let s = |v: f64| Scalar::new(v, 0.0);
    for (j, &yj) in y.iter().enumerate() {
        m[(0, 2 + j)] = s(yj);
        m[(2 + j, size - 1)] = s(-yj);
    }
    m[(0, size - 2)] = s(z);
    m[(0, size - 1)] = s(-norm2 / 2.0);
    m[(1, size - 1)] = s(-z);
    m
}

/// max |g H g^T - H| against the invariant form of SO(n+2,2).
pub fn so_membership_residual(g: &Matrix, n: usize) -> f64 {
    let h = so_form(n);
    let gt = Matrix::from_fn(g.n(), Field::Real, |i, j| g[(j, i)]);
    g.mul(&h).mul(&gt).max_abs_diff(&h)
}

/// a(exp X)^{2 rho} = ((1+|y|^2/2)^2 + z^2)(1 + z^2 + |y|^2/2)^n.
pub fn so_rho2(y: &[f64], z: f64) -> f64 {
    so_rho2_log(y, z).exp()
}

pub fn so_rho2_log(y: &[f64], z: f64) -> f64 {
    let n = y.len() as f64;
    let q = y.iter().map(|v| v * v).sum::<f64>() / 2.0;
    let t1 = logsumexp(&[2.0 * q.ln_1p(), ln_sq(z)]);
    let t2 = (z * z + q).ln_1p();
    t1 + n * t2
}

/// rho of SO(n+2,2) expanded in the mu basis: mu_1 + ... + mu_{k+1}
/// (n = 2k) plus mu_{k+2}/2 when n = 2k+1 is odd.
pub fn so_rho_combo(n: usize) -> WeightCombo {
    let k = n / 2;
    let mut coeffs = vec![Ratio::int(1); k + 1];
    if n % 2 == 1 {
        coeffs.push(Ratio::new(1, 2));
    }
    WeightCombo::new(WeightBasis::Mu, coeffs)
}

/// rho of SL(n, F) in the Lambda basis: dim_R F times every basic weight.
pub fn sl_rho_combo(n: usize, field: Field) -> WeightCombo {
    WeightCombo::new(
        WeightBasis::Lambda,
        vec![Ratio::int(field.dim_r() as i64); n - 1],
    )
}

// ---------------------------------------------------------------------------
// Rank one
// ---------------------------------------------------------------------------

/// a(exp(X+Y))^{rho} = ((1 + lamH/2 |X|^2)^2 + 2 lamH |Y|^2)^{m_l/4 + m_2l/2}.
pub fn rank_one_rho(norm_x2: f64, norm_y2: f64, p: &RankOneParams) -> f64 {
    rank_one_rho_log(norm_x2, norm_y2, p).exp()
}

pub fn rank_one_rho_log(norm_x2: f64, norm_y2: f64, p: &RankOneParams) -> f64 {
    let base = logsumexp(&[
        2.0 * (0.5 * p.lam_h * norm_x2).ln_1p(),
        if norm_y2 == 0.0 {
            f64::NEG_INFINITY
        } else {
            (2.0 * p.lam_h * norm_y2).ln()
        },
    ]);
    p.exponent() * base
}

// ---------------------------------------------------------------------------
// The comparison function psi of the decay lemma
// ---------------------------------------------------------------------------

/// psi_{alpha,u,m}(x) = (1 + sum |x_i|^2 + |<u,x>|^2)^alpha prod (1 + |x_i|^2).
///
/// The first factor carries the exponent alpha: the plain product appears in
/// the definition display, but every use of the function requires the power.
pub fn psi(x: &[Scalar], u: &[Scalar], alpha: f64) -> Result<f64> {
    Ok(psi_log(x, u, alpha)?.exp())
}

pub fn psi_log(x: &[Scalar], u: &[Scalar], alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::ParamRange(format!(
            "alpha = {alpha} outside [0, 1)"
        )));
    }
    if x.len() != u.len() {
        return Err(Error::DimensionMismatch(
            "x and u differ in length".into(),
        ));
    }
    let s: f64 = x.iter().map(|xi| xi.norm_sqr()).sum();
    let ip: Scalar = u
        .iter()
        .zip(x)
        .map(|(ui, xi)| ui.conj() * xi)
        .sum();
    let first = logsumexp(&[0.0, if s == 0.0 { f64::NEG_INFINITY } else { s.ln() }, ln_sq(ip.norm())]);
    let prod: f64 = x.iter().map(|xi| xi.norm_sqr().ln_1p()).sum();
    Ok(alpha * first + prod)
}

// ---------------------------------------------------------------------------
// Block identities for the compact factor
// ---------------------------------------------------------------------------

/// |det A - det L / |x|| where A is the leading block of the k-factor of g,
/// L the leading block of g, and x the last column of g^{-1}. Near zero for
/// unimodular g.
pub fn det_block_residual(g: &Matrix) -> Result<f64> {
    let n = g.n();
    let inv = g.inverse()?;
    let x_norm = inv
        .col(n - 1)
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let k = iwasawa(g)?.k;
    let det_a = k.leading_block(n - 1).det();
    let det_l = g.leading_block(n - 1).det();
    Ok((det_a - det_l / x_norm).norm())
}

/// For a unitary B split as `[[A, b],[c, d]]`: returns
/// (| |det A| - |d| |, |c A^{-1} + b*/conj(d)|).
pub fn unitary_block_residuals(b: &Matrix) -> Result<(f64, f64)> {
    let n = b.n();
    if b.unitary_residual() > 1e-9 {
        return Err(Error::BadShape(
            "input is not orthogonal/unitary within 1e-9".into(),
        ));
    }
    let a = b.leading_block(n - 1);
    let d = b[(n - 1, n - 1)];
    let r1 = (a.det().norm() - d.norm()).abs();
    // |det A| = |d|, so a tiny d makes A near-singular and c A^{-1} loses
    // roughly two digits per digit of |d|; below this the residual would
    // measure roundoff rather than the identity
    if d.norm() < 2e-3 {
        return Err(Error::DegenerateBlock);
    }
    let a_inv = a.inverse()?;
    let mut r2_sq = 0.0f64;
    for j in 0..n - 1 {
        let mut ca = Scalar::new(0.0, 0.0);
        for t in 0..n - 1 {
            ca += b[(n - 1, t)] * a_inv[(t, j)];
        }
        let target = -b[(j, n - 1)].conj() / d.conj();
        r2_sq += (ca - target).norm_sqr();
    }
    Ok((r1, r2_sq.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::iwasawa::{iwasawa, lambda_on_a, mu_weight, rho_log_on_a};
    use crate::rng::{random_sl, random_unitary, SampleStream};

    fn s(re: f64) -> Scalar {
        Scalar::new(re, 0.0)
    }

    #[test]
    fn phi_sl4_origin_and_restriction() {
        assert_eq!(phi_sl4(&[0.0; 6]), 1.0);
        let (x2, x3, x5) = (0.7, -1.3, 2.1);
        let full = phi_sl4(&[0.0, x2, x3, 0.0, x5, 0.0]);
        let restricted = phi_sl4_commutator(x2, x3, x5);
        assert!((full - restricted).abs() < 1e-12 * full);
    }

    #[test]
    fn phi_commutator_hand_value() {
        // (1,0,0): (1+1) * ((1+1)(1+0)+0) * (1+0) = 4
        assert!((phi_sl4_commutator(1.0, 0.0, 0.0) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn phi_sl4_matches_iwasawa_oracle() {
        let mut stream = SampleStream::at(2024, 0);
        for _ in 0..200 {
            let x: [f64; 6] = std::array::from_fn(|_| stream.uniform(-10.0, 10.0));
            let g = sl4_element(&x);
            let a = iwasawa(&g).unwrap().a;
            let oracle = (2.0 * rho_log_on_a(&a, Field::Real)).exp();
            let closed = phi_sl4(&x);
            assert!(
                (closed - oracle).abs() / oracle < 1e-8,
                "phi {closed} vs oracle {oracle} at {x:?}"
            );
        }
    }

    #[test]
    fn keyformula_hand_value_and_oracle() {
        // n = 3, F = R, y = (1, 0): (1+1)(1+1) = 4
        let y = [s(1.0), s(0.0)];
        assert!((keyformula_rho2(&y, Field::Real) - 4.0).abs() < 1e-12);

        let mut stream = SampleStream::at(5, 9);
        for field in [Field::Real, Field::Complex] {
            for _ in 0..50 {
                let y: Vec<Scalar> = (0..4)
                    .map(|_| match field {
                        Field::Real => s(stream.uniform(-10.0, 10.0)),
                        Field::Complex => {
                            Scalar::new(stream.uniform(-10.0, 10.0), stream.uniform(-10.0, 10.0))
                        }
                    })
                    .collect();
                let v = last_column_element(&y, field);
                let a = iwasawa(&v).unwrap().a;
                let oracle = (2.0 * rho_log_on_a(&a, field)).exp();
                let closed = keyformula_rho2(&y, field);
                assert!((closed - oracle).abs() / oracle < 1e-8);
            }
        }
    }

    #[test]
    fn sp4_element_membership_and_rho() {
        assert_eq!(
            sp4_element(s(0.0), s(0.0), Field::Real),
            Matrix::identity(4, Field::Real)
        );
        let n = sp4_element(s(1.0), s(0.0), Field::Real);
        assert!((n[(0, 2)].re - 1.0).abs() < 1e-15);
        assert!((n[(1, 3)].re - 1.0).abs() < 1e-15);
        assert!(sp4_membership_residual(&n) < 1e-12);

        // (1, 0), F = R: sqrt(2) * sqrt(4) = 2 sqrt(2)
        let v = sp4_commutator_rho(s(1.0), s(0.0), Field::Real);
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-12);

        let mut stream = SampleStream::at(8, 2);
        for field in [Field::Real, Field::Complex] {
            for _ in 0..50 {
                let draw = |st: &mut SampleStream| match field {
                    Field::Real => s(st.uniform(-10.0, 10.0)),
                    Field::Complex => {
                        Scalar::new(st.uniform(-10.0, 10.0), st.uniform(-10.0, 10.0))
                    }
                };
                let (y, z) = (draw(&mut stream), draw(&mut stream));
                let g = sp4_element(y, z, field);
                assert!(sp4_membership_residual(&g) < 1e-12);
                // rho of Sp4 is dim F (Lambda_1 + Lambda_2) on the a-vector
                let a = iwasawa(&g).unwrap().a;
                let d = field.dim_r() as f64;
                let oracle =
                    (d * (lambda_on_a(&a, 1).ln() + lambda_on_a(&a, 2).ln())).exp();
                let closed = sp4_commutator_rho(y, z, field);
                assert!(
                    (closed - oracle).abs() / oracle < 1e-8,
                    "sp4 {closed} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn so_element_membership_exp_and_rho() {
        assert_eq!(so_element(&[0.0], 0.0), Matrix::identity(5, Field::Real));
        let mut stream = SampleStream::at(12, 4);
        for n in 1..=4usize {
            for _ in 0..25 {
                let y: Vec<f64> = (0..n).map(|_| stream.uniform(-5.0, 5.0)).collect();
                let z = stream.uniform(-5.0, 5.0);
                let g = so_element(&y, z);
                assert!(so_membership_residual(&g, n) < 1e-12);
                // closed exp vs series
                let series = so_algebra_element(&y, z).exp();
                assert!(g.max_abs_diff(&series) < 1e-12);
                // mu_1 identity from the construction
                let r2: f64 = y.iter().map(|v| v * v).sum();
                let mu1sq = (1.0 + r2 / 2.0).powi(2) + z * z;
                let w = mu_weight(&g, 1).unwrap();
                assert!((w * w - mu1sq).abs() / mu1sq < 1e-10);
                // closed form vs the mu-expansion of rho on the a-vector
                let combo = so_rho_combo(n);
                let a = iwasawa(&g).unwrap().a;
                let rho_val = combo.evaluate_on_a(&a).unwrap();
                let closed = so_rho2(&y, z);
                assert!(
                    (rho_val * rho_val - closed).abs() / closed < 1e-8,
                    "so n={n}: combo^2 {} vs closed {closed}",
                    rho_val * rho_val
                );
            }
        }
    }

    #[test]
    fn so_rho2_hand_value() {
        // |y|^2 = 2, z = 0, n = 1: (2^2)(2)^1 = 8
        let v = so_rho2(&[2f64.sqrt()], 0.0);
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_values_and_monotonicity() {
        let p = RankOneParams::new(2, 1, 1.0).unwrap();
        assert_eq!(rank_one_rho(0.0, 0.0, &p), 1.0);
        // normX2 = 0, normY2 = t, exponent 1: 1 + 2t
        for t in [0.1, 1.0, 7.5] {
            assert!((rank_one_rho(0.0, t, &p) - (1.0 + 2.0 * t)).abs() < 1e-12);
        }
        let mut prev = 0.0;
        for x2 in [0.0, 0.5, 1.0, 2.0, 8.0] {
            let v = rank_one_rho(x2, 3.0, &p);
            assert!(v >= prev);
            prev = v;
        }
        assert!(RankOneParams::new(1, 1, 1.0).is_err());
        assert!(RankOneParams::new(0, 0, 1.0).is_err());
        assert_eq!(RankOneParams::so_n1(4, 1.0).unwrap().m_2lambda, 0);
        let su = RankOneParams::su_n1(3, 1.0).unwrap();
        assert_eq!((su.m_lambda, su.m_2lambda), (4, 1));
    }

    #[test]
    fn psi_basic_properties() {
        let zero = [s(0.0), s(0.0)];
        assert_eq!(psi(&zero, &zero, 0.5).unwrap(), 1.0);
        assert!(psi(&zero, &zero, 1.0).is_err());
        assert!(psi(&zero, &[s(0.0)], 0.5).is_err());

        let mut stream = SampleStream::at(77, 0);
        for _ in 0..200 {
            let x = [s(stream.uniform(-20.0, 20.0)), s(stream.uniform(-20.0, 20.0))];
            let u = [s(stream.uniform(-20.0, 20.0)), s(stream.uniform(-20.0, 20.0))];
            let with_u = psi(&x, &u, 0.5).unwrap();
            let without = psi(&x, &zero, 0.5).unwrap();
            assert!(with_u >= without * (1.0 - 1e-12));
        }
    }

    #[test]
    fn det_block_residual_cases() {
        assert!(det_block_residual(&Matrix::identity(3, Field::Real)).unwrap() < 1e-15);
        for field in [Field::Real, Field::Complex] {
            for idx in 0..40 {
                let g = random_sl(99, idx, 4, field);
                let r = det_block_residual(&g).unwrap();
                assert!(r < 1e-8, "residual {r} over {field}");
            }
        }
    }

    #[test]
    fn unitary_block_residual_cases() {
        let (r1, r2) = unitary_block_residuals(&Matrix::identity(4, Field::Real)).unwrap();
        assert!(r1 < 1e-15 && r2 < 1e-15);

        // 2x2 rotation: c A^{-1} = tan(theta)
        let t = 0.7f64;
        let b = Matrix::from_rows_real(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
        let (r1, r2) = unitary_block_residuals(&b).unwrap();
        assert!(r1 < 1e-12 && r2 < 1e-12);

        for field in [Field::Real, Field::Complex] {
            for idx in 0..40 {
                let u = random_unitary(55, idx, 5, field);
                let (r1, r2) = unitary_block_residuals(&u).unwrap();
                assert!(r1 < 1e-8 && r2 < 1e-8, "residuals {r1} {r2}");
            }
        }

        let not_unitary = Matrix::from_rows_real(&[&[2.0, 0.0], &[0.0, 1.0]]);
        assert!(unitary_block_residuals(&not_unitary).is_err());

        // d = 0: the second residual is undefined
        let quarter_turn = Matrix::from_rows_real(&[&[0.0, -1.0], &[1.0, 0.0]]);
        assert!(matches!(
            unitary_block_residuals(&quarter_turn),
            Err(Error::DegenerateBlock)
        ));
    }
}
