//! Tiny log-space helpers shared by the closed forms and the bound checks.
//! Everything downstream works with ln of huge products, so sums of the form
//! log(e^a + e^b + ...) must never materialize the exponentials.

/// log(sum exp(t_i)); tolerates -inf entries (empty terms).
pub fn logsumexp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let s: f64 = terms.iter().map(|&t| (t - m).exp()).sum();
    m + s.ln()
}

/// ln(x^2) that survives x = 0 and |x| near the f64 ceiling.
pub fn ln_sq(x: f64) -> f64 {
    let a = x.abs();
    if a == 0.0 {
        f64::NEG_INFINITY
    } else {
        2.0 * a.ln()
    }
}
