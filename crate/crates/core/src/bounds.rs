//! Margin-reporting predicates for the exponent-splitting inequalities.
//!
//! All comparisons happen in log space (sums of log1p terms), so reports stay
//! meaningful for coordinates up to ~1e150. In every report `lhs` and `rhs`
//! are the natural logs of the two sides of the displayed inequality unless
//! the operation documents otherwise; `holds` tolerates a relative slack of
//! 1e-12 against |rhs|.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::logsumexp;
use crate::matrix::{Field, Scalar};

/// Outcome of a single inequality evaluation.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    /// lhs - rhs; nonnegative when the inequality holds exactly.
    pub margin: f64,
    pub holds: bool,
}

impl BoundReport {
    pub fn compare(lhs: f64, rhs: f64) -> Self {
        let margin = lhs - rhs;
        BoundReport {
            lhs,
            rhs,
            margin,
            holds: margin >= -rhs.abs() * 1e-12,
        }
    }
}

fn require_nonneg(vals: &[f64], what: &str) -> Result<()> {
    if vals.iter().any(|&v| v.is_nan() || v < 0.0 || v.is_infinite()) {
        return Err(Error::ParamRange(format!(
            "{what} must be nonnegative and finite"
        )));
    }
    Ok(())
}

/// (1 + A_1 + ... + A_n)^{a_1+...+a_n} >= prod (1 + A_i)^{a_i},
/// reported in log scale.
pub fn power_product_bound(amounts: &[f64], exponents: &[f64]) -> Result<BoundReport> {
    if amounts.len() != exponents.len() {
        return Err(Error::DimensionMismatch(
            "amounts and exponents differ in length".into(),
        ));
    }
    require_nonneg(amounts, "amounts")?;
    require_nonneg(exponents, "exponents")?;
    let total: f64 = amounts.iter().sum();
    let lhs = exponents.iter().sum::<f64>() * total.ln_1p();
    let rhs = amounts
        .iter()
        .zip(exponents)
        .map(|(&a, &e)| e * a.ln_1p())
        .sum();
    Ok(BoundReport::compare(lhs, rhs))
}

/// The two-sided log comparison
/// sum log(1+A_i) >= log(1 + sum A_i) >= (1/n) sum log(1+A_i);
/// both sides are already logarithmic quantities, reported as-is.
pub fn log_sum_sandwich(amounts: &[f64]) -> Result<(BoundReport, BoundReport)> {
    if amounts.is_empty() {
        return Err(Error::DimensionMismatch("empty input".into()));
    }
    require_nonneg(amounts, "amounts")?;
    let n = amounts.len() as f64;
    let sum_logs: f64 = amounts.iter().map(|&a| a.ln_1p()).sum();
    let log_sum = amounts.iter().sum::<f64>().ln_1p();
    let upper = BoundReport::compare(sum_logs, log_sum);
    let lower = BoundReport::compare(log_sum, sum_logs / n);
    Ok((upper, lower))
}

/// ((1+p)^2 + z^2)(1 + z^2 + p)^n >= (1+p)^{2 eps + n(1-delta)} (1+z^2)^{1-eps+n delta}
/// with p = r^2/2, reported in log scale.
pub fn epsilon_delta_split(
    r2_half: f64,
    z2: f64,
    n: u32,
    eps: f64,
    delta: f64,
) -> Result<BoundReport> {
    require_nonneg(&[r2_half, z2], "squared inputs")?;
    if !(0.0 < eps && eps < 1.0 && 0.0 < delta && delta < 1.0) {
        return Err(Error::ParamRange(format!(
            "need 0 < eps, delta < 1; got eps = {eps}, delta = {delta}"
        )));
    }
    let nf = n as f64;
    let log_z2 = if z2 == 0.0 {
        f64::NEG_INFINITY
    } else {
        z2.ln()
    };
    let lhs = logsumexp(&[2.0 * r2_half.ln_1p(), log_z2]) + nf * (z2 + r2_half).ln_1p();
    let rhs = (2.0 * eps + nf * (1.0 - delta)) * r2_half.ln_1p()
        + (1.0 - eps + nf * delta) * z2.ln_1p();
    Ok(BoundReport::compare(lhs, rhs))
}

/// Decay of the psi-integral along a |u|-ladder.
///
/// Estimates I(u) = int psi_{alpha,u,m}(x)^{-dim F/2} dx at |u| in {1, 10, 100}
/// along the direction of `u`, fits log I against log(1 + |u|^2), and compares
/// the fitted slope to the envelope exponent -alpha eps dimF/2 with a slack of
/// 0.1. In the report, lhs = -slope and rhs = alpha eps dimF/2 - 0.1, so
/// `holds` means the integral decays at least as fast as the envelope allows.
///
/// For u = 0 there is no ladder; the report degenerates to a finiteness check
/// of the single estimate.
pub fn psi_decay_check(
    u: &[Scalar],
    field: Field,
    alpha: f64,
    eps: f64,
    samples: u64,
    seed: u64,
) -> Result<BoundReport> {
    if !(0.0 < alpha && alpha < 1.0) || !(0.0 < eps && eps < 1.0) {
        return Err(Error::ParamRange(
            "psi decay check needs 0 < alpha, eps < 1".into(),
        ));
    }
    let d = field.dim_r() as f64;
    let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        let (est, _stderr) = crate::integrate::psi_integral_estimate(u, field, alpha, samples, seed)?;
        let holds = est.is_finite() && est > 0.0;
        return Ok(BoundReport {
            lhs: est,
            rhs: 0.0,
            margin: est,
            holds,
        });
    }
    let ladder = [1.0, 10.0, 100.0];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (k, &scale) in ladder.iter().enumerate() {
        let scaled: Vec<Scalar> = u.iter().map(|&z| z * (scale / norm)).collect();
        let (est, _) = crate::integrate::psi_integral_estimate(
            &scaled,
            field,
            alpha,
            samples,
            crate::rng::derive_seed(seed, k as u64),
        )?;
        xs.push((1.0 + scale * scale).ln());
        ys.push(est.ln());
    }
    let slope = crate::integrate::ols_slope(&xs, &ys);
    Ok(BoundReport::compare(-slope, alpha * eps * d / 2.0 - 0.1))
}
