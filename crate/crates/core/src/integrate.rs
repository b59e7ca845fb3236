//! Seeded Monte-Carlo estimation over truncated coordinate boxes, radial
//! convergence scans with growth classification, and the two 1-D quadrature
//! lemmas.
//!
//! Haar measure on a unipotent group is Lebesgue measure in the free matrix
//! coordinates, so truncation domains are coordinate boxes [-R, R]^dim (each
//! complex coordinate contributing two real dimensions). Sampling is fully
//! counter-based: the value at sample index i depends only on (seed, i), and
//! partial sums are merged through a fixed pairwise tree, so a scan returns
//! bit-identical results no matter how the work is split across threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{
    keyformula_rho2_log, rank_one_rho_log, so_element, so_rho_combo, so_rho2_log,
    sp4_commutator_rho_log, sp4_element, GroupSpec,
};
use crate::iwasawa::{basic_weight_logs, iwasawa, lambda_on_a, rho_log_on_a};
use crate::matrix::{Field, Matrix, Scalar};
use crate::quadrature::adaptive_simpson;
use crate::rng::{derive_seed, SampleStream};

// ---------------------------------------------------------------------------
// Integrand specification
// ---------------------------------------------------------------------------

/// Which slice of the unipotent group the coordinates parametrize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainTag {
    /// All of N: every strictly upper entry is free.
    FullN,
    /// [N, N]: entries strictly above the first superdiagonal.
    Commutator,
    /// V cap [N, N]: the last column with its lowest free entry zeroed.
    VSlice,
}

/// Integrand a(v)^{c rho} a(v)^{alpha dimF Lambda_{n-1}} (1 + rho(log a(v)))^p
/// over a coordinate slice of the unipotent group of `group`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegrandSpec {
    pub group: GroupSpec,
    pub domain: DomainTag,
    /// Coefficient of rho in the exponent; -1 for the convergence integrals.
    pub rho_coeff: f64,
    /// Coefficient of dimF Lambda_{n-1}; only meaningful for SL.
    pub alpha: f64,
    /// Signed exponent on (1 + rho(log a)).
    pub log_power: f64,
}

impl IntegrandSpec {
    pub fn new(
        group: GroupSpec,
        domain: DomainTag,
        rho_coeff: f64,
        alpha: f64,
        log_power: f64,
    ) -> Result<Self> {
        let spec = IntegrandSpec {
            group,
            domain,
            rho_coeff,
            alpha,
            log_power,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.group.validate()?;
        if !(0.0..1.0).contains(&self.alpha) {
            return Err(Error::ParamRange(format!(
                "alpha = {} outside [0, 1)",
                self.alpha
            )));
        }
        if self.alpha != 0.0 && !matches!(self.group, GroupSpec::Sl { .. }) {
            return Err(Error::ParamRange(
                "the alpha weight factor is defined only for SL".into(),
            ));
        }
        self.f_dim().map(|_| ())
    }

    /// Number of field coordinates (real coordinates for SO and rank one).
    pub fn f_dim(&self) -> Result<usize> {
        match (&self.group, self.domain) {
            (GroupSpec::Sl { n, .. }, DomainTag::FullN) => Ok(n * (n - 1) / 2),
            (GroupSpec::Sl { n, .. }, DomainTag::Commutator) => {
                if *n < 3 {
                    Err(Error::ParamRange(
                        "commutator subgroup is trivial for n < 3".into(),
                    ))
                } else {
                    Ok((n - 1) * (n - 2) / 2)
                }
            }
            (GroupSpec::Sl { n, .. }, DomainTag::VSlice) => {
                if *n < 3 {
                    Err(Error::ParamRange("V slice needs n >= 3".into()))
                } else {
                    Ok(n - 2)
                }
            }
            (GroupSpec::Sp4 { .. }, DomainTag::FullN) => Ok(4),
            (GroupSpec::Sp4 { .. }, DomainTag::Commutator) => Ok(2),
            (GroupSpec::So { n }, DomainTag::Commutator) => Ok(n + 1),
            (GroupSpec::RankOne(p), DomainTag::Commutator) => {
                if p.m_2lambda == 0 {
                    Err(Error::ParamRange(
                        "rank-one commutator is trivial when m_2lambda = 0".into(),
                    ))
                } else {
                    Ok(p.m_2lambda as usize)
                }
            }
            (GroupSpec::RankOne(p), DomainTag::FullN) => {
                Ok((p.m_lambda + p.m_2lambda) as usize)
            }
            (g, d) => Err(Error::ParamRange(format!(
                "domain {d:?} is not supported for {g:?}"
            ))),
        }
    }

    /// Real sampling dimension: complex coordinates count twice.
    pub fn real_dim(&self) -> Result<usize> {
        let per = match self.group {
            GroupSpec::Sl { field, .. } | GroupSpec::Sp4 { field } => field.dim_r(),
            GroupSpec::So { .. } | GroupSpec::RankOne(_) => 1,
        };
        Ok(self.f_dim()? * per)
    }
}

// ---------------------------------------------------------------------------
// Coordinate maps
// ---------------------------------------------------------------------------

/// Free matrix positions (row, col), 0-indexed, row-major, for a slice of
/// the upper unitriangular group of SL(n).
pub fn domain_positions(n: usize, domain: DomainTag) -> Result<Vec<(usize, usize)>> {
    match domain {
        DomainTag::FullN => Ok((0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect()),
        DomainTag::Commutator => commutator_coords(n),
        DomainTag::VSlice => {
            if n < 3 {
                return Err(Error::ParamRange("V slice needs n >= 3".into()));
            }
            Ok((0..n - 2).map(|i| (i, n - 1)).collect())
        }
    }
}

/// Coordinates of [N_n, N_n]: the entries strictly above the first
/// superdiagonal; (n-1)(n-2)/2 positions. Errors for n < 3.
pub fn commutator_coords(n: usize) -> Result<Vec<(usize, usize)>> {
    if n < 3 {
        return Err(Error::ParamRange(
            "commutator subgroup is trivial for n < 3".into(),
        ));
    }
    Ok((0..n)
        .flat_map(|i| (i + 2..n).map(move |j| (i, j)))
        .collect())
}

fn scalars_from_reals(coords: &[f64], field: Field) -> Vec<Scalar> {
    match field {
        Field::Real => coords.iter().map(|&x| Scalar::new(x, 0.0)).collect(),
        Field::Complex => coords
            .chunks_exact(2)
            .map(|c| Scalar::new(c[0], c[1]))
            .collect(),
    }
}

/// Unipotent SL(n) element with the given values at the given positions.
fn sl_element(n: usize, positions: &[(usize, usize)], vals: &[Scalar], field: Field) -> Matrix {
    let mut m = Matrix::identity(n, field);
    for (&(i, j), &v) in positions.iter().zip(vals) {
        m[(i, j)] = v;
    }
    m
}

/// Sp4 element of the full unipotent group from algebra coordinates
/// (x, y, z, w), as exp of the displayed nilpotent matrix.
fn sp4_full_element(vals: &[Scalar], field: Field) -> Matrix {
    let (x, y, z, w) = (vals[0], vals[1], vals[2], vals[3]);
    let mut alg = Matrix::zeros(4, field);
    alg[(0, 1)] = x;
    alg[(0, 2)] = y;
    alg[(0, 3)] = z;
    alg[(1, 2)] = w;
    alg[(1, 3)] = y;
    alg[(2, 3)] = -x;
    alg.exp()
}

/// Group element realizing the coordinates of `spec` (no model for rank one).
pub fn domain_element(spec: &IntegrandSpec, coords: &[f64]) -> Result<Matrix> {
    let expect = spec.real_dim()?;
    if coords.len() != expect {
        return Err(Error::DimensionMismatch(format!(
            "got {} coordinates, spec needs {}",
            coords.len(),
            expect
        )));
    }
    match spec.group {
        GroupSpec::Sl { n, field } => {
            let vals = scalars_from_reals(coords, field);
            let positions = domain_positions(n, spec.domain)?;
            Ok(sl_element(n, &positions, &vals, field))
        }
        GroupSpec::Sp4 { field } => {
            let vals = scalars_from_reals(coords, field);
            match spec.domain {
                DomainTag::Commutator => Ok(sp4_element(vals[0], vals[1], field)),
                DomainTag::FullN => Ok(sp4_full_element(&vals, field)),
                DomainTag::VSlice => Err(Error::ParamRange(
                    "V slice is not defined for Sp4".into(),
                )),
            }
        }
        GroupSpec::So { n } => {
            let (y, z) = coords.split_at(n);
            Ok(so_element(y, z[0]))
        }
        GroupSpec::RankOne(_) => Err(Error::ParamRange(
            "rank-one groups have no matrix model".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Integrand evaluation: closed-form route and Iwasawa-oracle route
// ---------------------------------------------------------------------------

/// (rho(log a), log a^{Lambda_{n-1}}) via the closed forms / wedge products.
fn rho_and_lambda_log_closed(spec: &IntegrandSpec, coords: &[f64]) -> Result<(f64, f64)> {
    match spec.group {
        GroupSpec::Sl { n, field } => {
            let d = field.dim_r() as f64;
            match spec.domain {
                DomainTag::VSlice => {
                    // keyformula on y = (coords, 0); its i-th prefix factor is
                    // a^{2 Lambda_{n-i}}, so Lambda_{n-1} is the i = 1 factor
                    let mut vals = scalars_from_reals(coords, field);
                    vals.push(Scalar::new(0.0, 0.0));
                    let rho_log = 0.5 * keyformula_rho2_log(&vals, field);
                    let lam = 0.5 * vals[0].norm_sqr().ln_1p();
                    Ok((rho_log, lam))
                }
                _ => {
                    let g = domain_element(spec, coords)?;
                    let logs = basic_weight_logs(&g)?;
                    let rho_log = d * logs.iter().sum::<f64>();
                    Ok((rho_log, logs[n - 2]))
                }
            }
        }
        GroupSpec::Sp4 { field } => match spec.domain {
            DomainTag::Commutator => {
                let vals = scalars_from_reals(coords, field);
                Ok((sp4_commutator_rho_log(vals[0], vals[1], field), 0.0))
            }
            _ => {
                let g = domain_element(spec, coords)?;
                let logs = basic_weight_logs(&g)?;
                let d = field.dim_r() as f64;
                Ok((d * (logs[0] + logs[1]), 0.0))
            }
        },
        GroupSpec::So { n } => {
            let (y, z) = coords.split_at(n);
            Ok((0.5 * so_rho2_log(y, z[0]), 0.0))
        }
        GroupSpec::RankOne(p) => {
            let (x2, y2) = match spec.domain {
                DomainTag::Commutator => {
                    (0.0, coords.iter().map(|c| c * c).sum::<f64>())
                }
                _ => {
                    let (x, y) = coords.split_at(p.m_lambda as usize);
                    (
                        x.iter().map(|c| c * c).sum::<f64>(),
                        y.iter().map(|c| c * c).sum::<f64>(),
                    )
                }
            };
            Ok((rank_one_rho_log(x2, y2, &p), 0.0))
        }
    }
}

/// Same quantities via the full Iwasawa decomposition of the built element.
fn rho_and_lambda_log_oracle(spec: &IntegrandSpec, coords: &[f64]) -> Result<(f64, f64)> {
    let g = domain_element(spec, coords)?;
    let a = iwasawa(&g)?.a;
    match spec.group {
        GroupSpec::Sl { n, field } => Ok((
            rho_log_on_a(&a, field),
            lambda_on_a(&a, n - 1).ln(),
        )),
        GroupSpec::Sp4 { field } => {
            let d = field.dim_r() as f64;
            Ok((
                d * (lambda_on_a(&a, 1).ln() + lambda_on_a(&a, 2).ln()),
                0.0,
            ))
        }
        GroupSpec::So { n } => {
            Ok((so_rho_combo(n).evaluate_on_a(&a)?.ln(), 0.0))
        }
        GroupSpec::RankOne(_) => unreachable!("domain_element rejects rank one"),
    }
}

fn assemble_log(spec: &IntegrandSpec, rho_log: f64, lambda_log: f64) -> f64 {
    let d = spec.group.field().dim_r() as f64;
    spec.rho_coeff * rho_log
        + spec.alpha * d * lambda_log
        + spec.log_power * rho_log.ln_1p()
}

/// ln of the integrand at the given coordinates (closed-form route).
pub fn evaluate_integrand_log(spec: &IntegrandSpec, coords: &[f64]) -> Result<f64> {
    let expect = spec.real_dim()?;
    if coords.len() != expect {
        return Err(Error::DimensionMismatch(format!(
            "got {} coordinates, spec needs {}",
            coords.len(),
            expect
        )));
    }
    let (rho_log, lam) = rho_and_lambda_log_closed(spec, coords)?;
    Ok(assemble_log(spec, rho_log, lam))
}

/// Integrand value at the given coordinates.
pub fn evaluate_integrand(spec: &IntegrandSpec, coords: &[f64]) -> Result<f64> {
    Ok(evaluate_integrand_log(spec, coords)?.exp())
}

/// ln of the integrand via the Iwasawa decomposition of the built element;
/// the independent route of the dual-path agreement tests.
pub fn evaluate_integrand_log_oracle(spec: &IntegrandSpec, coords: &[f64]) -> Result<f64> {
    let (rho_log, lam) = rho_and_lambda_log_oracle(spec, coords)?;
    Ok(assemble_log(spec, rho_log, lam))
}

// ---------------------------------------------------------------------------
// Monte Carlo over coordinate boxes
// ---------------------------------------------------------------------------

/// Proposal law per real coordinate on [-R, R].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// Plain uniform: the auditable default.
    Uniform,
    /// Truncated standard Cauchy: density 1/((1+x^2) 2 atan R).
    Cauchy,
    /// Truncated density 1/(sqrt(1+x^2) 2 asinh R); heaviest tails, suited
    /// to integrands whose decay is near the critical power of the box.
    Asinh,
}

impl Sampler {
    /// Draw one coordinate; returns (x, log density).
    #[inline]
    fn draw(self, stream: &mut SampleStream, radius: f64) -> (f64, f64) {
        let u = 2.0 * stream.next_f64() - 1.0;
        match self {
            Sampler::Uniform => (radius * u, -(2.0 * radius).ln()),
            Sampler::Cauchy => {
                let c = radius.atan();
                let x = (c * u).tan();
                (x, -(x * x).ln_1p() - (2.0 * c).ln())
            }
            Sampler::Asinh => {
                let s = radius.asinh();
                let x = (s * u).sinh();
                (x, -0.5 * (x * x).ln_1p() - (2.0 * s).ln())
            }
        }
    }
}

const CHUNK: u64 = 4096;

/// Deterministic pairwise merge of per-chunk partial sums.
fn pairwise(parts: &[(f64, f64)]) -> (f64, f64) {
    match parts.len() {
        0 => (0.0, 0.0),
        1 => parts[0],
        len => {
            let (a, b) = parts.split_at(len / 2);
            let (s1, q1) = pairwise(a);
            let (s2, q2) = pairwise(b);
            (s1 + s2, q1 + q2)
        }
    }
}

fn mc_core<F>(samples: u64, seed: u64, point_value: F) -> (f64, f64)
where
    F: Fn(&mut SampleStream) -> f64 + Sync,
{
    assert!(samples > 0);
    let n_chunks = samples.div_ceil(CHUNK);
    let parts: Vec<(f64, f64)> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(samples);
            let mut s = 0.0;
            let mut q = 0.0;
            for i in lo..hi {
                let mut stream = SampleStream::at(seed, i);
                let v = point_value(&mut stream);
                s += v;
                q += v * v;
            }
            (s, q)
        })
        .collect();
    let (sum, sumsq) = pairwise(&parts);
    let n = samples as f64;
    let mean = sum / n;
    let var = ((sumsq - sum * sum / n) / (n - 1.0).max(1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

fn mc_box(
    spec: &IntegrandSpec,
    radius: f64,
    inner_cut: Option<f64>,
    samples: u64,
    seed: u64,
    sampler: Sampler,
) -> Result<(f64, f64)> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::ParamRange("radius must be positive".into()));
    }
    if samples < 1000 {
        return Err(Error::ParamRange(
            "at least 1000 samples are required".into(),
        ));
    }
    let dim = spec.real_dim()?;
    let spec = spec.clone();
    let value = move |stream: &mut SampleStream| -> f64 {
        let mut coords = vec![0.0f64; dim];
        let mut log_w = 0.0f64;
        let mut inside_inner = true;
        for c in coords.iter_mut() {
            let (x, log_q) = sampler.draw(stream, radius);
            *c = x;
            log_w -= log_q;
            if let Some(cut) = inner_cut {
                if x.abs() > cut {
                    inside_inner = false;
                }
            } else {
                inside_inner = false;
            }
        }
        if inside_inner {
            return 0.0;
        }
        let log_f = evaluate_integrand_log(&spec, &coords)
            .expect("coordinate dimension fixed by construction");
        (log_f + log_w).exp()
    };
    Ok(mc_core(samples, seed, value))
}

/// Volume-weighted Monte-Carlo estimate of the integrand over [-R, R]^dim
/// with uniform sampling: (mean, standard error). Deterministic for fixed
/// (spec, R, samples, seed) regardless of thread count.
pub fn mc_estimate(
    spec: &IntegrandSpec,
    radius: f64,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    mc_box(spec, radius, None, samples, seed, Sampler::Uniform)
}

/// As `mc_estimate` with an explicit proposal law.
pub fn mc_estimate_sampled(
    spec: &IntegrandSpec,
    radius: f64,
    samples: u64,
    seed: u64,
    sampler: Sampler,
) -> Result<(f64, f64)> {
    mc_box(spec, radius, None, samples, seed, sampler)
}

// ---------------------------------------------------------------------------
// Radial scans and growth classification
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Convergent,
    LogDivergent,
    PowerDivergent,
    Inconclusive,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Classification::Convergent => "convergent",
            Classification::LogDivergent => "log_divergent",
            Classification::PowerDivergent => "power_divergent",
            Classification::Inconclusive => "inconclusive",
        };
        write!(f, "{s}")
    }
}

/// Thresholds of the growth classifier.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanConfig {
    pub sampler: Sampler,
    /// Saturation rule: convergent when the shell increments past the first
    /// radius decrease and the last one falls below this fraction of the
    /// running total.
    pub saturation_fraction: f64,
    /// Fit rule: convergent when the log-R slope is below this multiple of
    /// its standard error.
    pub convergent_sigma: f64,
    /// Shape rule: with b_k the decade-local slopes of log estimate against
    /// log R, growth is logarithmic when b_last/b_first drops below this
    /// (any pure power keeps the ratio near 1, any power of log R pushes it
    /// to log(x_last/x_mid)/log(x_mid/x_first) independent of the exponent).
    pub log_shape_ratio: f64,
    /// Shape rule: power-divergent when b_last/b_first stays below this cap
    /// (above it the growth is accelerating faster than any fixed power).
    pub power_shape_cap: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            sampler: Sampler::Uniform,
            saturation_fraction: 0.05,
            convergent_sigma: 3.0,
            log_shape_ratio: 2.0 / 3.0,
            power_shape_cap: 1.5,
        }
    }
}

/// Nested-truncation scan results.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub radii: Vec<f64>,
    /// Partial-integral estimates over the nested boxes (cumulative shells).
    pub estimates: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub slope_vs_log_r: f64,
    pub slope_stderr: f64,
    pub classification: Classification,
    pub samples_per_radius: u64,
    pub seed: u64,
}

impl ScanReport {
    /// Fixed-column CSV: R, estimate, stderr, cumulative_samples.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("R,estimate,stderr,cumulative_samples\n");
        for (i, r) in self.radii.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r,
                self.estimates[i],
                self.stderrs[i],
                self.samples_per_radius * (i as u64 + 1)
            ));
        }
        out
    }
}

/// Simple OLS slope of y on x.
pub fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|&x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(&x, &y)| (x - xbar) * (y - ybar)).sum();
    sxy / sxx
}

/// OLS of y on {1, x}: returns (intercept, slope, slope stderr) where the
/// stderr combines the residual-based estimate with the propagated
/// per-point measurement errors.
fn ols_with_errors(xs: &[f64], ys: &[f64], sigmas: &[f64]) -> (f64, f64, f64) {
    let k = xs.len();
    let n = k as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|&x| (x - xbar) * (x - xbar)).sum();
    let slope = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (x - xbar) * (y - ybar))
        .sum::<f64>()
        / sxx;
    let intercept = ybar - slope * xbar;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    let var_resid = if k > 2 {
        ssr / (n - 2.0) / sxx
    } else {
        0.0
    };
    let var_mc: f64 = xs
        .iter()
        .zip(sigmas)
        .map(|(&x, &s)| {
            let w = (x - xbar) / sxx;
            w * w * s * s
        })
        .sum();
    (intercept, slope, (var_resid + var_mc).sqrt())
}

/// True when the shell increments past the first radius decrease and the
/// last one is below `frac` of the running total.
fn saturated(estimates: &[f64], stderrs: &[f64], frac: f64) -> bool {
    let k = estimates.len();
    if k < 3 {
        return false;
    }
    let incs: Vec<f64> = (1..k).map(|i| estimates[i] - estimates[i - 1]).collect();
    let noise = 2.0 * stderrs[k - 1];
    let decreasing = incs.windows(2).all(|w| w[1] <= w[0] + noise);
    decreasing && incs[incs.len() - 1] < frac * estimates[k - 1]
}

fn classify(
    radii: &[f64],
    estimates: &[f64],
    stderrs: &[f64],
    slope: f64,
    slope_se: f64,
    cfg: &ScanConfig,
) -> Classification {
    if saturated(estimates, stderrs, cfg.saturation_fraction) {
        return Classification::Convergent;
    }
    if slope < cfg.convergent_sigma * slope_se {
        return Classification::Convergent;
    }
    let k = radii.len();
    if k < 3 || estimates.iter().any(|&e| e.is_nan() || e <= 0.0) {
        return Classification::Inconclusive;
    }
    // decade-local slopes of log estimate against log R
    let b: Vec<f64> = (1..k)
        .map(|i| {
            (estimates[i] / estimates[i - 1]).ln() / (radii[i] / radii[i - 1]).ln()
        })
        .collect();
    let b_first = b[0];
    let b_last = b[b.len() - 1];
    if b_first.is_nan() || b_first <= 0.0 {
        return Classification::Inconclusive;
    }
    let ratio = b_last / b_first;
    if ratio <= cfg.log_shape_ratio {
        Classification::LogDivergent
    } else if ratio <= cfg.power_shape_cap && b_last > 0.0 {
        Classification::PowerDivergent
    } else {
        Classification::Inconclusive
    }
}

/// Monte-Carlo scan over nested truncation boxes.
///
/// Each radius adds an independent estimate of the box shell between it and
/// its predecessor (so the cumulative estimates are nondecreasing by
/// construction), then the growth of the cumulative estimates against log R
/// drives the classification.
pub fn radial_scan(
    spec: &IntegrandSpec,
    radii: &[f64],
    samples: u64,
    seed: u64,
    cfg: &ScanConfig,
) -> Result<ScanReport> {
    if radii.is_empty() {
        return Err(Error::ParamRange("no radii given".into()));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) || radii[0] <= 0.0 {
        return Err(Error::ParamRange(
            "radii must be positive and strictly ascending".into(),
        ));
    }
    let mut estimates = Vec::with_capacity(radii.len());
    let mut stderrs = Vec::with_capacity(radii.len());
    let mut total = 0.0f64;
    let mut var_acc = 0.0f64;
    for (k, &r) in radii.iter().enumerate() {
        let inner = if k == 0 { None } else { Some(radii[k - 1]) };
        let (mean, se) = mc_box(spec, r, inner, samples, derive_seed(seed, k as u64), cfg.sampler)?;
        total += mean;
        var_acc += se * se;
        estimates.push(total);
        stderrs.push(var_acc.sqrt());
    }
    let (slope, slope_se) = if radii.len() >= 2 {
        let logs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
        let (_, slope, slope_se) = ols_with_errors(&logs, &estimates, &stderrs);
        (slope, slope_se)
    } else {
        (0.0, 0.0)
    };
    let classification = if radii.len() >= 2 {
        classify(radii, &estimates, &stderrs, slope, slope_se, cfg)
    } else {
        Classification::Inconclusive
    };
    Ok(ScanReport {
        radii: radii.to_vec(),
        estimates,
        stderrs,
        slope_vs_log_r: slope,
        slope_stderr: slope_se,
        classification,
        samples_per_radius: samples,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Full-space psi integral (importance sampling with Pareto-mixture tails)
// ---------------------------------------------------------------------------

/// MC estimate of int_{F^m} psi_{alpha,u,m}(x)^{-dimF/2} dx over the whole
/// space. The proposal is, per real coordinate, an even mixture of
/// uniform[-1,1] and a symmetric Pareto tail |x| = v^{-1/beta} with
/// beta = alpha/m, which keeps the second moment finite for all alpha in
/// (0,1) (a standard-Cauchy proposal does not once alpha <= 1/2).
pub fn psi_integral_estimate(
    u: &[Scalar],
    field: Field,
    alpha: f64,
    samples: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::ParamRange("alpha outside (0, 1)".into()));
    }
    if samples < 1000 {
        return Err(Error::ParamRange(
            "at least 1000 samples are required".into(),
        ));
    }
    let m = u.len();
    let dim = m * field.dim_r();
    let beta = alpha / m as f64;
    let d_half = field.dim_r() as f64 / 2.0;
    let u = u.to_vec();
    let value = move |stream: &mut SampleStream| -> f64 {
        let mut coords = vec![0.0f64; dim];
        let mut log_w = 0.0f64;
        for c in coords.iter_mut() {
            let bits = stream.next_u64();
            let v = stream.next_f64_open();
            let sign = if bits & 1 == 0 { 1.0 } else { -1.0 };
            if bits & 2 == 0 {
                // uniform core on [-1, 1]: density 1/4 within the mixture
                *c = sign * v;
                log_w -= 0.25f64.ln();
            } else {
                // Pareto tail: |x| = v^{-1/beta}, density (beta/4) |x|^{-1-beta}
                let x = v.powf(-1.0 / beta);
                *c = sign * x;
                log_w -= (beta / 4.0).ln() - (1.0 + beta) * x.ln();
            }
        }
        let x = scalars_from_reals(&coords, field);
        let log_psi = crate::forms::psi_log(&x, &u, alpha).expect("validated parameters");
        (-d_half * log_psi + log_w).exp()
    };
    Ok(mc_core(samples, derive_seed(seed, 0x951), value))
}

// ---------------------------------------------------------------------------
// 1-D lemmas
// ---------------------------------------------------------------------------

/// Adaptive quadrature of int_F (1+|x|^2)^{-dimF/2} (1+log(1+|x|^2))^{-1-eps} dx,
/// split at |x| = 2; returns (estimate, analytic tail bound). The bound is
/// the comparison value 2 pi^{dimF-1} eps^{-1} (log 2)^{-eps} dominating the
/// |x| >= 2 piece.
pub fn log_lemma_1d(eps: f64, field: Field) -> Result<(f64, f64)> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::ParamRange(
            "the integral diverges for eps <= 0".into(),
        ));
    }
    let tol = 1e-10;
    let est = match field {
        Field::Real => {
            let head = adaptive_simpson(
                &|r: f64| {
                    (1.0 + r * r).sqrt().recip() * (1.0 + (r * r).ln_1p()).powf(-1.0 - eps)
                },
                0.0,
                2.0,
                tol,
            );
            // tail in t = log(1+r^2) from log 5; integrand (1-e^{-t})^{-1/2}(1+t)^{-1-eps}/2
            let t0 = 5f64.ln();
            let t_max = 60.0;
            let tail = adaptive_simpson(
                &|t: f64| 0.5 * (1.0 - (-t).exp()).sqrt().recip() * (1.0 + t).powf(-1.0 - eps),
                t0,
                t_max,
                tol,
            );
            let remainder = (1.0 + t_max).powf(-eps) / (2.0 * eps);
            2.0 * (head + tail + remainder)
        }
        Field::Complex => {
            let head = adaptive_simpson(
                &|r: f64| r / (1.0 + r * r) * (1.0 + (r * r).ln_1p()).powf(-1.0 - eps),
                0.0,
                2.0,
                tol,
            );
            // exact tail: pi/eps (1+log 5)^{-eps} over |x| >= 2
            let tail = (1.0 + 5f64.ln()).powf(-eps) / (2.0 * eps);
            2.0 * std::f64::consts::PI * (head + tail)
        }
    };
    let prefactor = 2.0 * std::f64::consts::PI.powi(field.dim_r() as i32 - 1);
    let bound = prefactor * 2f64.ln().powf(-eps) / eps;
    Ok((est, bound))
}

/// Quadrature of the 1-D decay integral against its reference envelope:
/// returns (estimate, C_beta (1+a^2)^{-beta/2}) with C_beta = 2^beta/(1-beta)
/// over R and pi 2^beta/(1-beta/2) over C. Over R the estimate is the
/// positive-half integral int_0^1 (1+a^2 x^2)^{-beta/2} dx, matching the
/// derivation the constant comes from; over C it is the full unit disk.
pub fn beta_decay_1d(a: f64, beta: f64, field: Field) -> Result<(f64, f64)> {
    if a.is_nan() || a < 1.0 {
        return Err(Error::ParamRange("need a >= 1".into()));
    }
    if !(0.0 < beta && beta < 1.0) {
        return Err(Error::ParamRange("need 0 < beta < 1".into()));
    }
    let tol = 1e-11;
    let (est, c_beta) = match field {
        Field::Real => (
            adaptive_simpson(&|x: f64| (1.0 + a * a * x * x).powf(-beta / 2.0), 0.0, 1.0, tol),
            2f64.powf(beta) / (1.0 - beta),
        ),
        Field::Complex => (
            2.0 * std::f64::consts::PI
                * adaptive_simpson(
                    &|s: f64| s * (1.0 + a * a * s * s).powf(-beta / 2.0),
                    0.0,
                    1.0,
                    tol,
                ),
            std::f64::consts::PI * 2f64.powf(beta) / (1.0 - beta / 2.0),
        ),
    };
    Ok((est, c_beta * (1.0 + a * a).powf(-beta / 2.0)))
}
