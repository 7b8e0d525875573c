//! Binomial coefficients and Bernstein basis polynomials.
//!
//! `B(k, n; x) = C(n, k) x^k (1 - x)^(n - k)`. Binomial probabilities, the
//! integer-parameter beta densities and their tails are all sums of these.

/// Rows up to this degree use exact integer coefficients.
const EXACT_ROW_LIMIT: u32 = 120;

/// Exact binomial coefficients `C(n, 0..=n)` for `n <= 120`.
pub fn binomial_row_exact(n: u32) -> Option<Vec<u128>> {
    if n > EXACT_ROW_LIMIT {
        return None;
    }
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c: u128 = 1;
    row.push(c);
    for k in 0..n {
        // C(n, k+1) = C(n, k) (n - k) / (k + 1), exact at every step.
        c = c.checked_mul(u128::from(n - k))? / u128::from(k + 1);
        row.push(c);
    }
    Some(row)
}

fn ln_factorials(n: u32) -> Vec<f64> {
    let mut table = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0f64;
    table.push(acc);
    for k in 1..=n {
        acc += f64::from(k).ln();
        table.push(acc);
    }
    table
}

/// Binomial coefficients `C(n, 0..=n)` as floats.
pub fn binomial_row(n: u32) -> Vec<f64> {
    if let Some(row) = binomial_row_exact(n) {
        return row.into_iter().map(|c| c as f64).collect();
    }
    let lf = ln_factorials(n);
    (0..=n as usize)
        .map(|k| (lf[n as usize] - lf[k] - lf[n as usize - k]).exp())
        .collect()
}

/// All Bernstein basis values `B(k, n; x)` for `k = 0..=n`.
pub fn basis(n: u32, x: f64) -> Vec<f64> {
    let len = n as usize + 1;
    if x <= 0.0 {
        let mut out = vec![0.0; len];
        out[0] = 1.0;
        return out;
    }
    if x >= 1.0 {
        let mut out = vec![0.0; len];
        out[len - 1] = 1.0;
        return out;
    }
    let y = 1.0 - x;
    if let Some(row) = binomial_row_exact(n) {
        return row
            .into_iter()
            .enumerate()
            .map(|(k, c)| c as f64 * x.powi(k as i32) * y.powi((n as usize - k) as i32))
            .collect();
    }
    // Large degree: walk the term ratios outward from the mode, then use
    // sum_k B(k, n; x) = 1 to normalize. Far tails underflow to zero.
    let nu = n as usize;
    let odds = x / y;
    let mode = (((n as f64 + 1.0) * x).floor() as usize).min(nu);
    let mut out = vec![0.0; len];
    out[mode] = 1.0;
    for k in mode..nu {
        out[k + 1] = out[k] * (nu - k) as f64 / (k + 1) as f64 * odds;
    }
    for k in (0..mode).rev() {
        out[k] = out[k + 1] * (k + 1) as f64 / (nu - k) as f64 / odds;
    }
    let total: f64 = out.iter().sum();
    out.iter_mut().for_each(|v| *v /= total);
    out
}

/// Evaluates `sum_k coeffs[k] B(k, n; x)` with `n = coeffs.len() - 1`.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    debug_assert!(!coeffs.is_empty());
    let n = (coeffs.len() - 1) as u32;
    basis(n, x).iter().zip(coeffs).map(|(b, c)| b * c).sum()
}

/// Bernstein coefficients (degree `n - 1`) of the derivative.
pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len() as f64 - 1.0;
    coeffs.windows(2).map(|w| n * (w[1] - w[0])).collect()
}

/// Converts Bernstein coefficients to ascending monomial coefficients.
///
/// The monomial form is badly conditioned for large degree; prefer [`eval`].
pub fn to_monomial(coeffs: &[f64]) -> Vec<f64> {
    let n = (coeffs.len() - 1) as u32;
    let outer = binomial_row(n);
    let mut mono = vec![0.0; coeffs.len()];
    for (k, &d) in coeffs.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let inner = binomial_row(n - k as u32);
        for (i, &c) in inner.iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            mono[k + i] += d * outer[k] * c * sign;
        }
    }
    mono
}
