//! Gowers uniformity norms on `Z/MZ` and on intervals `[N]`.
//!
//! `‖f‖_{U^s}^{2^s} = E_{x,h_1..h_s} Δ_{h_1}⋯Δ_{h_s} f(x)` with the
//! multiplicative derivative `Δ_h f(x) = f(x)·conj(f(x+h))`.
//!
//! Two evaluators are provided. [`gowers_norm_naive`] enumerates every
//! `(x, h_1, …, h_s)`. [`gowers_norm_recursive`] uses
//! `‖f‖_{U^s}^{2^s} = E_h ‖Δ_h f‖_{U^{s-1}}^{2^{s-1}}` down to `U²`, where
//! `‖f‖_{U²}^4 = Σ_ξ |f̂(ξ)|⁴` is a single FFT.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::progressions::embedding_modulus;
use crate::ring::{fourth_moment_of_spectrum, residue, CyclicFunction};

/// Largest `M^{s+1}` the naive evaluator accepts.
pub const NAIVE_BUDGET: u128 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Naive,
    Recursive,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GowersReport {
    pub s: usize,
    pub value: f64,
    pub method: Method,
    /// Elementary operations performed (product terms for the naive path,
    /// an `M log M` estimate per FFT for the recursive one).
    pub cost: u64,
}

/// `Δ_h f(x) = f(x)·conj(f(x+h))`.
pub fn mult_derivative(f: &CyclicFunction, h: i64) -> CyclicFunction {
    let m = f.modulus();
    let v = f.values();
    let h = residue(h, m);
    CyclicFunction::new((0..m).map(|x| v[x] * v[(x + h) % m].conj()).collect())
        .expect("non-empty")
}

#[inline]
fn derivative_into(src: &[Complex64], h: usize, dst: &mut [Complex64]) {
    let m = src.len();
    for x in 0..m {
        let y = if x + h >= m { x + h - m } else { x + h };
        dst[x] = src[x] * src[y].conj();
    }
}

fn real_root(avg: Complex64, s: usize, scale: f64) -> Result<f64> {
    if avg.im.abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::NonRealAverage(avg.im));
    }
    Ok(avg.re.max(0.0).powf(1.0 / (1u64 << s) as f64))
}

fn check_degree(s: usize, min: usize) -> Result<()> {
    if s < min || s > 16 {
        return Err(Error::InvalidArgument(format!("degree s = {s} must lie in [{min}, 16]")));
    }
    Ok(())
}

/// `‖f‖_{U^s}` straight from the definition, `O(M^{s+1})`.
pub fn gowers_norm_naive(f: &CyclicFunction, s: usize) -> Result<GowersReport> {
    check_degree(s, 1)?;
    let m = f.modulus();
    let estimate = (m as u128).saturating_pow(s as u32 + 1);
    if estimate > NAIVE_BUDGET {
        return Err(Error::BudgetExceeded { estimate, budget: NAIVE_BUDGET });
    }
    let v = f.values();
    let partials = par::map_range(m, |h1| {
        let mut bufs = vec![vec![Complex64::new(0.0, 0.0); m]; s];
        derivative_into(v, h1, &mut bufs[0]);
        naive_tail(&mut bufs, 1)
    });
    let total: Complex64 = partials.into_iter().sum();
    let avg = total / (m as f64).powi(s as i32 + 1);
    let scale = f.linf().powi(1 << s);
    Ok(GowersReport { s, value: real_root(avg, s, scale)?, method: Method::Naive, cost: estimate as u64 })
}

// Sum over the remaining shifts and x of the iterated derivative in bufs[depth - 1].
fn naive_tail(bufs: &mut [Vec<Complex64>], depth: usize) -> Complex64 {
    if depth == bufs.len() {
        return bufs[depth - 1].iter().sum();
    }
    let m = bufs[0].len();
    let mut acc = Complex64::new(0.0, 0.0);
    for h in 0..m {
        let (head, tail) = bufs.split_at_mut(depth);
        derivative_into(&head[depth - 1], h, &mut tail[0]);
        acc += naive_tail(bufs, depth + 1);
    }
    acc
}

/// `‖f‖_{U^s}^{2^s}` through the recursion with an FFT base case.
pub fn gowers_power_recursive(f: &CyclicFunction, s: usize) -> Result<f64> {
    check_degree(s, 2)?;
    let v = f.values();
    let m = v.len();
    if s == 2 {
        return Ok(fourth_moment_of_spectrum(v, &mut Vec::with_capacity(m)));
    }
    let per_shift = par::map_range(m, |h| {
        let mut bufs = vec![vec![Complex64::new(0.0, 0.0); m]; s - 2];
        let mut scratch = Vec::with_capacity(m);
        derivative_into(v, h, &mut bufs[0]);
        recursive_tail(&mut bufs, 1, &mut scratch)
    });
    Ok(per_shift.into_iter().sum::<f64>() / m as f64)
}

// bufs[depth - 1] holds a function whose U^{2 + len - depth + 1} power is wanted.
fn recursive_tail(bufs: &mut [Vec<Complex64>], depth: usize, scratch: &mut Vec<Complex64>) -> f64 {
    if depth == bufs.len() {
        return fourth_moment_of_spectrum(&bufs[depth - 1], scratch);
    }
    let m = bufs[0].len();
    let mut acc = 0.0;
    for h in 0..m {
        let (head, tail) = bufs.split_at_mut(depth);
        derivative_into(&head[depth - 1], h, &mut tail[0]);
        acc += recursive_tail(bufs, depth + 1, scratch);
    }
    acc / m as f64
}

/// `‖f‖_{U^s}` for `s ≥ 2`, `O(M^{s-1} log M)`.
pub fn gowers_norm_recursive(f: &CyclicFunction, s: usize) -> Result<GowersReport> {
    let power = gowers_power_recursive(f, s)?;
    let m = f.modulus() as u64;
    let log = 64 - (m.max(2) - 1).leading_zeros() as u64;
    let ffts = m.saturating_pow(s as u32 - 2);
    Ok(GowersReport {
        s,
        value: power.max(0.0).powf(1.0 / (1u64 << s) as f64),
        method: Method::Recursive,
        cost: ffts.saturating_mul(m * (log + 1)),
    })
}

pub fn gowers_norm(f: &CyclicFunction, s: usize, method: Method) -> Result<GowersReport> {
    match method {
        Method::Naive => gowers_norm_naive(f, s),
        Method::Recursive if s == 1 => gowers_norm_naive(f, 1),
        Method::Recursive => gowers_norm_recursive(f, s),
    }
}

fn norm_value(f: &CyclicFunction, s: usize) -> Result<f64> {
    Ok(gowers_norm(f, s, Method::Recursive)?.value)
}

/// Default modulus for `U^s[N]`: smallest `M > 2^s·N` with `gcd(M, s!) = 1`.
pub fn interval_modulus(n: usize, s: usize) -> usize {
    embedding_modulus(n as u64, s + 1) as usize
}

/// `‖f‖_{U^s[N]} = ‖f‖_{U^s(Z/MZ)} / ‖1_{[N]}‖_{U^s(Z/MZ)}` at the default
/// modulus. `f` must vanish at every residue outside `1..=N`.
pub fn gowers_norm_interval(f: &CyclicFunction, n: usize, s: usize) -> Result<f64> {
    gowers_norm_interval_in(f, n, s, interval_modulus(n, s))
}

/// [`gowers_norm_interval`] at an explicit modulus `M > 2^s·N`.
pub fn gowers_norm_interval_in(f: &CyclicFunction, n: usize, s: usize, m: usize) -> Result<f64> {
    check_degree(s, 1)?;
    if n == 0 {
        return Err(Error::InvalidArgument("interval length must be positive".into()));
    }
    if m <= (n << s) {
        return Err(Error::InvalidArgument(format!("modulus {m} must exceed 2^{s}·{n}")));
    }
    let src = f.values();
    if src.len() <= n {
        return Err(Error::InvalidArgument(format!(
            "input modulus {} cannot hold [1, {n}]",
            src.len()
        )));
    }
    if let Some(r) = (0..src.len()).find(|&r| (r == 0 || r > n) && src[r] != Complex64::new(0.0, 0.0)) {
        return Err(Error::SupportViolation { n, residue: r });
    }
    let zero = Complex64::new(0.0, 0.0);
    let lifted = CyclicFunction::from_fn(m, |x| if (1..=n).contains(&x) { src[x] } else { zero })?;
    let interval = CyclicFunction::from_fn(m, |x| {
        if (1..=n).contains(&x) {
            Complex64::new(1.0, 0.0)
        } else {
            zero
        }
    })?;
    Ok(norm_value(&lifted, s)? / norm_value(&interval, s)?)
}

/// Both sides of the Gowers–Cauchy–Schwarz inequality
/// `|E Π_ω C^{|ω|} f_ω(x + ω·h)| ≤ Π_ω ‖f_ω‖_{U^s}`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct GcsBounds {
    pub lhs: f64,
    pub rhs: f64,
}

/// `fs[ω]` is indexed by the bitmask `ω`, bit `i` selecting `h_{i+1}`.
pub fn gcs_check(fs: &[CyclicFunction], s: usize) -> Result<GcsBounds> {
    check_degree(s, 1)?;
    let corners = 1usize << s;
    if fs.len() != corners {
        return Err(Error::InvalidArgument(format!("need {corners} functions for s = {s}, got {}", fs.len())));
    }
    for f in &fs[1..] {
        fs[0].same_modulus(f)?;
    }
    for f in fs {
        f.check_unit_bounded(1e-12)?;
    }
    let m = fs[0].modulus();
    let estimate = (m as u128).saturating_pow(s as u32 + 1);
    if estimate > NAIVE_BUDGET {
        return Err(Error::BudgetExceeded { estimate, budget: NAIVE_BUDGET });
    }
    let tuples = m.pow(s as u32);
    let rows = par::map_range(m, |x| {
        let mut acc = Complex64::new(0.0, 0.0);
        let mut h = vec![0usize; s];
        for t in 0..tuples {
            let mut rest = t;
            for hi in h.iter_mut() {
                *hi = rest % m;
                rest /= m;
            }
            let mut prod = Complex64::new(1.0, 0.0);
            for (w, f) in fs.iter().enumerate() {
                let mut pos = x;
                for (i, &hi) in h.iter().enumerate() {
                    if w >> i & 1 == 1 {
                        pos += hi;
                    }
                }
                let val = f.values()[pos % m];
                prod *= if w.count_ones() % 2 == 1 { val.conj() } else { val };
            }
            acc += prod;
        }
        acc
    });
    let lhs = (rows.into_iter().sum::<Complex64>() / (m as f64).powi(s as i32 + 1)).norm();
    let mut rhs = 1.0;
    for f in fs {
        rhs *= norm_value(f, s)?;
    }
    Ok(GcsBounds { lhs, rhs })
}
