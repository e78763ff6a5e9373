//! Weighted counts of k-term arithmetic progressions.
//!
//! `Λ_k(f_0, …, f_{k-1}) = E_{x,y} f_0(x) f_1(x+y) ⋯ f_{k-1}(x+(k-1)y)`,
//! trivial progressions (`y = 0`) included.

use num_complex::Complex64;
use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;
use crate::ring::{dft, CyclicFunction, Indicator};

/// Moduli above this are rejected by [`lambda_k`] unless forced.
pub const DIRECT_COUNT_LIMIT: usize = 100_000;

/// `Λ_k` by direct `O(k·M²)` enumeration.
pub fn lambda_k(fs: &[CyclicFunction]) -> Result<Complex64> {
    lambda_k_inner(fs, false)
}

/// Like [`lambda_k`] but without the modulus guard.
pub fn lambda_k_forced(fs: &[CyclicFunction]) -> Result<Complex64> {
    lambda_k_inner(fs, true)
}

fn lambda_k_inner(fs: &[CyclicFunction], force: bool) -> Result<Complex64> {
    let k = fs.len();
    if k < 3 {
        return Err(Error::InvalidArgument(format!("need k >= 3 functions, got {k}")));
    }
    let m = fs[0].modulus();
    for f in &fs[1..] {
        fs[0].same_modulus(f)?;
    }
    if !force && m > DIRECT_COUNT_LIMIT {
        return Err(Error::BudgetExceeded {
            estimate: (m as u128) * (m as u128),
            budget: (DIRECT_COUNT_LIMIT as u128).pow(2),
        });
    }
    let vals: Vec<&[Complex64]> = fs.iter().map(|f| f.values()).collect();
    let rows = par::map_range(m, |x| {
        let mut pos = vec![x; k];
        let mut acc = Complex64::new(0.0, 0.0);
        for _y in 0..m {
            let mut prod = vals[0][x];
            for i in 1..k {
                prod *= vals[i][pos[i]];
            }
            acc += prod;
            for (i, p) in pos.iter_mut().enumerate().skip(1) {
                *p += i;
                if *p >= m {
                    *p -= m;
                    if *p >= m {
                        *p %= m;
                    }
                }
            }
        }
        acc
    });
    let total: Complex64 = rows.into_iter().sum();
    Ok(total / (m as f64 * m as f64))
}

/// `Λ_3(f, g, h) = Σ_ξ f̂(ξ) ĝ(-2ξ) ĥ(ξ)` in `O(M log M)`. Requires odd `M`.
pub fn lambda3_via_fourier(f: &CyclicFunction, g: &CyclicFunction, h: &CyclicFunction) -> Result<Complex64> {
    f.same_modulus(g)?;
    f.same_modulus(h)?;
    let m = f.modulus();
    if m.is_multiple_of(2) {
        return Err(Error::EvenModulus(m));
    }
    let (fh, gh, hh) = (dft(f), dft(g), dft(h));
    let (fc, gc, hc) = (fh.coeffs(), gh.coeffs(), hh.coeffs());
    let mut acc = Complex64::new(0.0, 0.0);
    for xi in 0..m {
        let minus_two = (m - (2 * xi) % m) % m;
        acc += fc[xi] * gc[minus_two] * hc[xi];
    }
    Ok(acc)
}

/// Both sides of `|Λ₃(1_A,1_A,1_A) − α³| ≤ α·max_{ξ≠0}|1̂_A(ξ)|` and of the
/// weaker square-root form.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DeviationBounds {
    pub lhs: f64,
    pub rhs_linear: f64,
    pub rhs_sqrt: f64,
}

impl DeviationBounds {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs_linear + tol && self.lhs <= self.rhs_sqrt + tol
    }
}

pub fn deviation_bound_check(a: &Indicator) -> Result<DeviationBounds> {
    let m = a.modulus();
    if m.is_multiple_of(2) {
        return Err(Error::EvenModulus(m));
    }
    let f = a.to_function();
    let lambda = lambda3_via_fourier(&f, &f, &f)?;
    let alpha = a.density();
    let max_nonzero = dft(&f).max_nonzero();
    Ok(DeviationBounds {
        lhs: (lambda - alpha.powi(3)).norm(),
        rhs_linear: alpha * max_nonzero,
        rhs_sqrt: max_nonzero.sqrt(),
    })
}

/// `|Λ₃(f,g,h)|` next to `min(‖f̂‖_∞, ‖ĝ‖_∞, ‖ĥ‖_∞)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LinfBound {
    pub lambda_abs: f64,
    pub min_spectral_linf: f64,
}

pub fn lambda3_linf_bound_check(f: &CyclicFunction, g: &CyclicFunction, h: &CyclicFunction) -> Result<LinfBound> {
    for u in [f, g, h] {
        u.check_unit_bounded(1e-12)?;
    }
    let lambda = lambda3_via_fourier(f, g, h)?;
    let min_spectral_linf = [f, g, h]
        .iter()
        .map(|u| dft(u).coeffs().iter().map(|z| z.norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    Ok(LinfBound { lambda_abs: lambda.norm(), min_spectral_linf })
}

/// Smallest `M > 2^{k-1}·N` with `gcd(M, (k-1)!) = 1`.
pub fn embedding_modulus(n: u64, k: usize) -> u64 {
    let fact: u64 = (1..k as u64).product::<u64>().max(1);
    let mut m = (n << (k - 1)) + 1;
    while m.gcd(&fact) != 1 {
        m += 1;
    }
    m
}

/// Embed `A ⊆ [N]` into `Z/MZ` with `M` large enough that k-term progressions
/// do not wrap around.
pub fn embed_interval(a: &[u64], n: u64, k: usize) -> Result<Indicator> {
    if k < 3 {
        return Err(Error::InvalidArgument(format!("k must be >= 3, got {k}")));
    }
    if let Some(&x) = a.iter().find(|&&x| x == 0 || x > n) {
        return Err(Error::InvalidArgument(format!("{x} is not in [1, {n}]")));
    }
    let m = embedding_modulus(n, k) as usize;
    Indicator::new(m, a.iter().map(|&x| x as usize))
}

/// Ordered count of nontrivial k-APs `(x, y)`, `y ≠ 0`, inside `A ⊆ Z/MZ`.
pub fn count_nontrivial_aps_mod(a: &Indicator, k: usize) -> u64 {
    let m = a.modulus();
    let mask = a.mask();
    let starts: Vec<usize> = a.elements().collect();
    par::map_slice(&starts, |&x| {
        let mut count = 0u64;
        for y in 1..m {
            if (1..k).all(|i| mask[(x + i * y) % m]) {
                count += 1;
            }
        }
        count
    })
    .into_iter()
    .sum()
}

/// Ordered count of nontrivial k-APs with both signs of the common difference
/// among integers of `A ⊆ [N]`.
pub fn count_nontrivial_aps_interval(a: &[u64], n: u64, k: usize) -> u64 {
    let mut mask = vec![false; n as usize + 1];
    for &x in a {
        if x >= 1 && x <= n {
            mask[x as usize] = true;
        }
    }
    let mut count = 0;
    for x in 1..=n as i64 {
        if !mask[x as usize] {
            continue;
        }
        for d in -(n as i64)..=n as i64 {
            if d == 0 {
                continue;
            }
            let ok = (1..k as i64).all(|i| {
                let t = x + i * d;
                t >= 1 && t <= n as i64 && mask[t as usize]
            });
            if ok {
                count += 1;
            }
        }
    }
    count
}

/// A nontrivial 3-term progression `x < y < z` inside the integer set `a`,
/// smallest `x` first, then smallest `z`.
pub fn find_three_ap(a: &[u64]) -> Option<[u64; 3]> {
    let mut sorted: Vec<u64> = a.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let max = *sorted.last()? as usize;
    let mut mask = vec![false; max + 1];
    for &x in &sorted {
        mask[x as usize] = true;
    }
    for (i, &x) in sorted.iter().enumerate() {
        for &z in &sorted[i + 1..] {
            if (x + z) % 2 == 0 && mask[((x + z) / 2) as usize] {
                return Some([x, (x + z) / 2, z]);
            }
        }
    }
    None
}
