//! Named property suites: seeded fuzz runs of the library invariants,
//! shared by the CLI `check` command and the acceptance tests.
//!
//! Every suite is deterministic in (seed, samples); sampling parallelizes
//! over disjoint index ranges and the combining operators (count, max with
//! lowest-index tie break) are order-independent, so results do not depend
//! on the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{epsilon_delta_split, log_sum_sandwich, power_product_bound, psi_decay_check};
use crate::error::{Error, Result};
use crate::forms::{
    det_block_residual, keyformula_rho2_log, last_column_element, phi_sl4,
    phi_sl4_commutator_log, psi_log, sl4_element, so_element, so_rho_combo, so_rho2_log,
    sp4_commutator_rho_log, sp4_element, unitary_block_residuals,
};
use crate::integrate::{beta_decay_1d, log_lemma_1d};
use crate::iwasawa::{
    basic_weight, cocycle_residual, group_norm, iwasawa, lambda_on_a, mu_on_a, mu_weight,
    rho_log_on_a,
};
use crate::matrix::{Field, Matrix, Scalar};
use crate::rng::{derive_seed, random_sl, random_unitary, SampleStream};

/// Result of one fuzzed property.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub samples: u64,
    /// Badness threshold: a sample fails when its badness exceeds this.
    pub threshold: f64,
    pub failures: u64,
    /// Largest badness seen (residual, or negative normalized margin).
    pub worst: f64,
    /// Sample index attaining the worst badness; reproducible from the seed.
    pub worst_index: u64,
    pub pass: bool,
}

/// Outcome of a whole named suite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub samples: u64,
    pub outcomes: Vec<PropertyOutcome>,
    pub pass: bool,
}

pub const SUITES: &[&str] = &[
    "iwasawa",
    "closed-forms",
    "inequalities",
    "appendix-a",
    "appendix-b",
];

/// Run one named suite with `samples` draws per fuzzed property.
pub fn run_suite(name: &str, seed: u64, samples: u64) -> Result<SuiteReport> {
    if samples == 0 {
        return Err(Error::ParamRange("at least one sample is required".into()));
    }
    let outcomes = match name {
        "iwasawa" => suite_iwasawa(seed, samples),
        "closed-forms" => suite_closed_forms(seed, samples),
        "inequalities" => suite_inequalities(seed, samples),
        "appendix-a" => suite_appendix_a(seed, samples),
        "appendix-b" => suite_appendix_b(seed, samples),
        other => return Err(Error::UnknownSuite(other.to_string())),
    };
    let pass = outcomes.iter().all(|o| o.pass);
    Ok(SuiteReport {
        suite: name.to_string(),
        seed,
        samples,
        outcomes,
        pass,
    })
}

/// Parallel fuzz driver: `badness(index)` with max-reduction.
fn fuzz<F>(name: &str, samples: u64, threshold: f64, badness: F) -> PropertyOutcome
where
    F: Fn(u64) -> f64 + Sync,
{
    let (failures, worst, worst_index) = (0..samples)
        .into_par_iter()
        .map(|i| {
            let b = badness(i);
            let fail = u64::from(b.is_nan() || b > threshold);
            (fail, b, i)
        })
        .reduce(
            || (0u64, f64::NEG_INFINITY, u64::MAX),
            |a, b| {
                let fails = a.0 + b.0;
                if a.1 > b.1 || (a.1 == b.1 && a.2 <= b.2) {
                    (fails, a.1, a.2)
                } else {
                    (fails, b.1, b.2)
                }
            },
        );
    PropertyOutcome {
        name: name.to_string(),
        samples,
        threshold,
        failures,
        worst,
        worst_index,
        pass: failures == 0,
    }
}

fn field_of(i: u64) -> Field {
    if i.is_multiple_of(2) {
        Field::Real
    } else {
        Field::Complex
    }
}

fn scalar_in(stream: &mut SampleStream, field: Field, range: f64) -> Scalar {
    match field {
        Field::Real => Scalar::new(stream.uniform(-range, range), 0.0),
        Field::Complex => Scalar::new(
            stream.uniform(-range, range),
            stream.uniform(-range, range),
        ),
    }
}

/// Coordinate draw used by the bound fuzzes: uniform in [-100, 100] on even
/// indices, reciprocal-uniform (log-uniform magnitude up to 1e150) on odd.
fn bound_coord(stream: &mut SampleStream, i: u64) -> f64 {
    if i.is_multiple_of(2) {
        stream.uniform(-100.0, 100.0)
    } else {
        stream.heavy_tailed(150.0)
    }
}

/// Normalized violation of an inequality given in log scale: positive when
/// lhs < rhs beyond the 1e-12 relative allowance.
fn log_margin_badness(lhs: f64, rhs: f64) -> f64 {
    -(lhs - rhs) / rhs.abs().max(1.0)
}

// ---------------------------------------------------------------------------

fn suite_iwasawa(seed: u64, samples: u64) -> Vec<PropertyOutcome> {
    let mut out = Vec::new();

    out.push(fuzz("reconstruction", samples, 1e-9, |i| {
        let n = 2 + (i % 7) as usize; // 2..=8
        let g = random_sl(derive_seed(seed, 1), i, n, field_of(i));
        let f = iwasawa(&g).expect("random SL decomposes");
        let recon = f.reconstruct().max_abs_diff(&g) / g.max_abs();
        recon.max(f.k.unitary_residual())
    }));

    out.push(fuzz("weights_match_factors", samples, 1e-8, |i| {
        let n = 2 + (i % 5) as usize; // 2..=6
        let g = random_sl(derive_seed(seed, 2), i, n, field_of(i));
        let a = iwasawa(&g).expect("decomposes").a;
        let mut worst = 0.0f64;
        for idx in 1..n {
            let w = basic_weight(&g, idx).expect("index in range");
            let o = lambda_on_a(&a, idx);
            worst = worst.max((w - o).abs() / o.max(w));
        }
        for idx in 1..=n {
            let w = mu_weight(&g, idx).expect("index in range");
            let o = mu_on_a(&a, idx);
            worst = worst.max((w - o).abs() / o.max(w));
        }
        worst
    }));

    out.push(fuzz("norm_inverse_symmetry", samples, 1e-8, |i| {
        let n = 2 + (i % 4) as usize;
        let g = random_sl(derive_seed(seed, 3), i, n, field_of(i));
        let a = group_norm(&g).expect("norm of invertible");
        let b = group_norm(&g.inverse().expect("invertible")).expect("norm");
        (a - b).abs() / a.max(b)
    }));

    out.push(fuzz("norm_submultiplicative", samples, 1e-9, |i| {
        let sd = derive_seed(seed, 4);
        let x = random_sl(sd, 2 * i, 3, Field::Real);
        let y = random_sl(sd, 2 * i + 1, 3, Field::Real);
        let nxy = group_norm(&x.mul(&y)).expect("norm");
        let nx = group_norm(&x).expect("norm");
        let ny = group_norm(&y).expect("norm");
        nxy / (nx * ny) - 1.0
    }));

    out.push(fuzz("one_parameter_power", samples, 1e-6, |i| {
        let mut stream = SampleStream::at(derive_seed(seed, 5), i);
        // symmetric traceless X of size 3
        let mut x = Matrix::zeros(3, Field::Real);
        for r in 0..3 {
            for c in r..3 {
                let v = Scalar::new(stream.uniform(-1.0, 1.0), 0.0);
                x[(r, c)] = v;
                x[(c, r)] = v;
            }
        }
        let tr = (x[(0, 0)] + x[(1, 1)] + x[(2, 2)]) / 3.0;
        for d in 0..3 {
            x[(d, d)] -= tr;
        }
        let base = group_norm(&x.exp()).expect("norm").ln();
        let mut worst = 0.0f64;
        for t in [0.5, 2.0, 3.0] {
            let xt = Matrix::from_fn(3, Field::Real, |r, c| x[(r, c)] * t);
            let nt = group_norm(&xt.exp()).expect("norm").ln();
            worst = worst.max((nt - t * base).abs() / (t * base).abs().max(1e-3));
        }
        worst
    }));

    out.push(fuzz("cocycle", samples, 1e-8, |i| {
        let n = 3 + (i % 3) as usize; // 3..=5
        let field = field_of(i / 3);
        let mut stream = SampleStream::at(derive_seed(seed, 6), i);
        let mut v_star = Matrix::identity(n, field);
        for r in 0..n - 1 {
            for c in r + 1..n - 1 {
                v_star[(r, c)] = scalar_in(&mut stream, field, 3.0);
            }
        }
        let mut v1 = Matrix::identity(n, field);
        for r in 0..n - 1 {
            v1[(r, n - 1)] = scalar_in(&mut stream, field, 3.0);
        }
        cocycle_residual(&v_star, &v1).expect("shapes are valid")
    }));

    out
}

fn suite_closed_forms(seed: u64, samples: u64) -> Vec<PropertyOutcome> {
    let mut out = Vec::new();

    out.push(fuzz("phi_sl4_oracle", samples, 1e-8, |i| {
        let mut stream = SampleStream::at(derive_seed(seed, 10), i);
        let x: [f64; 6] = std::array::from_fn(|_| stream.uniform(-10.0, 10.0));
        let closed = phi_sl4(&x);
        let a = iwasawa(&sl4_element(&x)).expect("unipotent").a;
        let oracle = (2.0 * rho_log_on_a(&a, Field::Real)).exp();
        (closed - oracle).abs() / oracle.max(closed)
    }));

    out.push(fuzz("keyformula_oracle", samples, 1e-8, |i| {
        let n = 3 + (i % 3) as usize; // 3..=5
        let field = field_of(i / 3);
        let mut stream = SampleStream::at(derive_seed(seed, 11), i);
        let y: Vec<Scalar> = (0..n - 1)
            .map(|_| scalar_in(&mut stream, field, 10.0))
            .collect();
        let closed = keyformula_rho2_log(&y, field);
        let a = iwasawa(&last_column_element(&y, field)).expect("unipotent").a;
        let oracle = 2.0 * rho_log_on_a(&a, field);
        (closed - oracle).abs() / oracle.abs().max(1.0)
    }));

    out.push(fuzz("sp4_oracle", samples, 1e-8, |i| {
        let field = field_of(i);
        let mut stream = SampleStream::at(derive_seed(seed, 12), i);
        let y = scalar_in(&mut stream, field, 10.0);
        let z = scalar_in(&mut stream, field, 10.0);
        let closed = sp4_commutator_rho_log(y, z, field);
        let a = iwasawa(&sp4_element(y, z, field)).expect("unipotent").a;
        let d = field.dim_r() as f64;
        let oracle = d * (lambda_on_a(&a, 1).ln() + lambda_on_a(&a, 2).ln());
        (closed - oracle).abs() / oracle.abs().max(1.0)
    }));

    out.push(fuzz("so_oracle", samples, 1e-8, |i| {
        let n = 1 + (i % 4) as usize; // 1..=4
        let mut stream = SampleStream::at(derive_seed(seed, 13), i);
        let y: Vec<f64> = (0..n).map(|_| stream.uniform(-10.0, 10.0)).collect();
        let z = stream.uniform(-10.0, 10.0);
        let closed = so_rho2_log(&y, z);
        let a = iwasawa(&so_element(&y, z)).expect("unipotent").a;
        let oracle = 2.0 * so_rho_combo(n).evaluate_on_a(&a).expect("combo fits").ln();
        (closed - oracle).abs() / oracle.abs().max(1.0)
    }));

    out.push(fuzz("at_least_one", samples, 0.0, |i| {
        let mut stream = SampleStream::at(derive_seed(seed, 14), i);
        let mut draw = |heavy: bool| {
            if heavy {
                stream.heavy_tailed(150.0)
            } else {
                stream.uniform(-10.0, 10.0)
            }
        };
        let heavy = i % 2 == 1;
        let mut worst = f64::NEG_INFINITY;
        let x2 = draw(heavy);
        let x3 = draw(heavy);
        let x5 = draw(heavy);
        worst = worst.max(-phi_sl4_commutator_log(x2, x3, x5));
        let y: Vec<Scalar> = (0..4).map(|_| Scalar::new(draw(heavy), 0.0)).collect();
        worst = worst.max(-keyformula_rho2_log(&y, Field::Real));
        worst = worst.max(-sp4_commutator_rho_log(
            Scalar::new(x2, 0.0),
            Scalar::new(x3, 0.0),
            Field::Real,
        ));
        let yv: Vec<f64> = (0..3).map(|_| draw(heavy)).collect();
        worst = worst.max(-so_rho2_log(&yv, x5));
        worst
    }));

    out.push(fuzz("psi_u_monotone", samples, 1e-12, |i| {
        let m = 1 + (i % 4) as usize;
        let field = field_of(i / 2);
        let mut stream = SampleStream::at(derive_seed(seed, 15), i);
        let x: Vec<Scalar> = (0..m).map(|_| scalar_in(&mut stream, field, 50.0)).collect();
        let u: Vec<Scalar> = (0..m).map(|_| scalar_in(&mut stream, field, 50.0)).collect();
        let zero = vec![Scalar::new(0.0, 0.0); m];
        let alpha = 0.1 + 0.8 * stream.next_f64();
        let with_u = psi_log(&x, &u, alpha).expect("valid alpha");
        let without = psi_log(&x, &zero, alpha).expect("valid alpha");
        log_margin_badness(with_u, without)
    }));

    out.push(fuzz("psi_product_lower", samples, 1e-12, |i| {
        let m = 1 + (i % 4) as usize;
        let field = field_of(i / 2);
        let mut stream = SampleStream::at(derive_seed(seed, 16), i);
        let x: Vec<Scalar> = (0..m).map(|_| scalar_in(&mut stream, field, 50.0)).collect();
        let zero = vec![Scalar::new(0.0, 0.0); m];
        let alpha = 0.1 + 0.8 * stream.next_f64();
        let lhs = psi_log(&x, &zero, alpha).expect("valid alpha");
        let rhs: f64 = x
            .iter()
            .map(|xi| (1.0 + alpha / m as f64) * xi.norm_sqr().ln_1p())
            .sum();
        log_margin_badness(lhs, rhs)
    }));

    out
}

fn suite_inequalities(seed: u64, samples: u64) -> Vec<PropertyOutcome> {
    let mut out = Vec::new();

    out.push(fuzz("power_product", samples, 1e-12, |i| {
        let n = 1 + (i % 6) as usize;
        let mut stream = SampleStream::at(derive_seed(seed, 20), i);
        let amounts: Vec<f64> = (0..n)
            .map(|_| {
                let c = bound_coord(&mut stream, i);
                c * c
            })
            .collect();
        let exps: Vec<f64> = (0..n).map(|_| stream.uniform(0.0, 4.0)).collect();
        let r = power_product_bound(&amounts, &exps).expect("valid input");
        -r.margin / r.rhs.abs().max(1.0)
    }));

    out.push(fuzz("log_sandwich", samples, 1e-12, |i| {
        let n = 1 + (i % 6) as usize;
        let mut stream = SampleStream::at(derive_seed(seed, 21), i);
        let amounts: Vec<f64> = (0..n)
            .map(|_| {
                let c = bound_coord(&mut stream, i);
                c * c
            })
            .collect();
        let (upper, lower) = log_sum_sandwich(&amounts).expect("valid input");
        let b1 = -upper.margin / upper.rhs.abs().max(1.0);
        let b2 = -lower.margin / lower.rhs.abs().max(1.0);
        b1.max(b2)
    }));

    out.push(fuzz("epsilon_delta", samples, 1e-12, |i| {
        let n = 1 + (i % 6) as u32;
        let mut stream = SampleStream::at(derive_seed(seed, 22), i);
        let r = bound_coord(&mut stream, i);
        let z = bound_coord(&mut stream, i);
        let rep = epsilon_delta_split(0.5 * r * r, z * z, n, 1.0 / 3.0, 1.0 / (2.0 * n as f64))
            .expect("valid parameters");
        -rep.margin / rep.rhs.abs().max(1.0)
    }));

    out.push(fuzz("intro_76_bound", samples, 1e-12, |i| {
        let mut stream = SampleStream::at(derive_seed(seed, 23), i);
        let x2 = bound_coord(&mut stream, i);
        let x3 = bound_coord(&mut stream, i);
        let x5 = bound_coord(&mut stream, i);
        let lhs = phi_sl4_commutator_log(x2, x3, x5);
        let rhs = (7.0 / 6.0)
            * ((x2 * x2).ln_1p() + (x3 * x3).ln_1p() + (x5 * x5).ln_1p());
        log_margin_badness(lhs, rhs)
    }));

    out.push(fuzz("sp4_43_76_bound", samples, 1e-12, |i| {
        let field = field_of(i);
        let mut stream = SampleStream::at(derive_seed(seed, 24), i);
        let mut draw = || {
            let re = bound_coord(&mut stream, i);
            match field {
                Field::Real => Scalar::new(re, 0.0),
                Field::Complex => Scalar::new(re, bound_coord(&mut stream, i + 1)),
            }
        };
        let y = draw();
        let z = draw();
        let lhs = sp4_commutator_rho_log(y, z, field);
        let d = field.dim_r() as f64;
        let rhs = 0.5
            * d
            * ((4.0 / 3.0) * y.norm_sqr().ln_1p() + (7.0 / 6.0) * z.norm_sqr().ln_1p());
        log_margin_badness(lhs, rhs)
    }));

    out.push(fuzz("so_eps_delta_bound", samples, 1e-12, |i| {
        let n = 1 + (i % 6) as usize;
        let mut stream = SampleStream::at(derive_seed(seed, 25), i);
        let y: Vec<f64> = (0..n).map(|_| bound_coord(&mut stream, i)).collect();
        let z = bound_coord(&mut stream, i);
        let lhs = so_rho2_log(&y, z);
        let q = y.iter().map(|v| v * v).sum::<f64>() / 2.0;
        let rhs = (n as f64 + 1.0 / 6.0) * q.ln_1p() + (7.0 / 6.0) * (z * z).ln_1p();
        log_margin_badness(lhs, rhs)
    }));

    out
}

fn suite_appendix_a(seed: u64, samples: u64) -> Vec<PropertyOutcome> {
    let mut out = Vec::new();

    out.push(fuzz("det_block", samples, 1e-8, |i| {
        let n = 2 + (i % 7) as usize; // 2..=8
        let g = random_sl(derive_seed(seed, 30), i, n, field_of(i));
        det_block_residual(&g).expect("invertible")
    }));

    out.push(fuzz("unitary_block", samples, 1e-8, |i| {
        let n = 2 + (i % 7) as usize;
        let b = random_unitary(derive_seed(seed, 31), i, n, field_of(i));
        match unitary_block_residuals(&b) {
            Ok((r1, r2)) => r1.max(r2),
            // d = 0 has measure zero; treat a degenerate draw as skipped
            Err(_) => 0.0,
        }
    }));

    // Diagnostic for the phase identity: the proof derives
    // conj(d) det B = det A (the displayed statement has d det B).
    out.push(fuzz("det_phase_proof_form", samples, 1e-8, |i| {
        let n = 2 + (i % 7) as usize;
        let b = random_unitary(derive_seed(seed, 32), i, n, field_of(i));
        let det_b = b.det();
        let det_a = b.leading_block(n - 1).det();
        let d = b[(n - 1, n - 1)];
        (det_a - d.conj() * det_b).norm()
    }));

    out
}

fn suite_appendix_b(seed: u64, samples: u64) -> Vec<PropertyOutcome> {
    let mut out = Vec::new();
    let mc_samples = samples.max(1000);

    // the decay-lemma configuration of the acceptance gate
    out.push(fuzz("psi_decay_ladder", 1, 0.0, |_| {
        let u = [Scalar::new(3.0, 0.0), Scalar::new(-4.0, 0.0)];
        let rep = psi_decay_check(&u, Field::Real, 0.5, 0.5, mc_samples, derive_seed(seed, 40))
            .expect("valid parameters");
        -rep.margin
    }));

    out.push(fuzz("psi_u0_finite", 4, 0.0, |i| {
        let m = 1 + (i % 4) as usize;
        let u = vec![Scalar::new(0.0, 0.0); m];
        let (est, _) = crate::integrate::psi_integral_estimate(
            &u,
            Field::Real,
            0.5,
            mc_samples,
            derive_seed(seed, 41 + i),
        )
        .expect("valid parameters");
        if est.is_finite() && est > 0.0 {
            -1.0
        } else {
            1.0
        }
    }));

    out.push(fuzz("beta_decay", 18, 0.0, |i| {
        let a = [1.0, 10.0, 100.0][(i % 3) as usize];
        let beta = [0.25, 0.5, 0.75][((i / 3) % 3) as usize];
        let field = field_of(i / 9);
        let (est, bound) = beta_decay_1d(a, beta, field).expect("valid parameters");
        est / bound - 1.0
    }));

    out.push(fuzz("log_lemma", 4, 0.0, |i| {
        let eps = [0.5, 1.0][(i % 2) as usize];
        let field = field_of(i / 2);
        let (est, bound) = log_lemma_1d(eps, field).expect("valid eps");
        if !est.is_finite() {
            return 1.0;
        }
        est / bound - 1.0
    }));

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_rejected() {
        assert!(matches!(
            run_suite("nope", 1, 10),
            Err(Error::UnknownSuite(_))
        ));
    }

    #[test]
    fn all_suites_pass_at_small_scale() {
        for name in SUITES {
            let rep = run_suite(name, 42, 300).unwrap();
            assert!(
                rep.pass,
                "suite {name} failed: {:#?}",
                rep.outcomes
                    .iter()
                    .filter(|o| !o.pass)
                    .collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn suite_runs_are_deterministic() {
        let a = run_suite("inequalities", 7, 500).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| run_suite("inequalities", 7, 500).unwrap());
        for (x, y) in a.outcomes.iter().zip(&b.outcomes) {
            assert_eq!(x.worst.to_bits(), y.worst.to_bits());
            assert_eq!(x.worst_index, y.worst_index);
            assert_eq!(x.failures, y.failures);
        }
    }
}
