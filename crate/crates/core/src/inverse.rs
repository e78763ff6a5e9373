//! The `U²` inverse theorem as a frequency finder, its converse, and the
//! `F_p` toy inverse problem (exact modular arithmetic).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ring::{dft, CyclicFunction, Spectrum};
use crate::uniformity::gowers_power_recursive;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrequencyFinding {
    pub frequency: usize,
    /// `|f̂(ξ)| = |E_x f(x) e_M(-ξx)|`.
    pub correlation: f64,
    pub u2: f64,
    /// True when `‖f‖_{U²} ≥ δ`, in which case `correlation ≥ δ²`.
    pub guaranteed: bool,
}

/// Index of the largest `|coeff|`, smallest index on ties.
pub fn spectral_argmax(s: &Spectrum, skip_zero: bool) -> (usize, f64) {
    let start = usize::from(skip_zero);
    let mut best = (start, -1.0);
    for (xi, z) in s.coeffs().iter().enumerate().skip(start) {
        let a = z.norm();
        if a > best.1 {
            best = (xi, a);
        }
    }
    best
}

/// Find `ξ` maximising `|f̂(ξ)|`. `‖f‖_{U²}⁴ = Σ|f̂|⁴ ≤ max|f̂|²·Σ|f̂|²` and
/// `Σ|f̂|² ≤ 1`, so the maximum is at least `‖f‖_{U²}²`.
pub fn inverse_u2(f: &CyclicFunction, delta: f64) -> Result<FrequencyFinding> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must lie in (0, 1]")));
    }
    f.check_unit_bounded(1e-12)?;
    let spectrum = dft(f);
    let (frequency, correlation) = spectral_argmax(&spectrum, false);
    let u2 = spectrum.coeffs().iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>().powf(0.25);
    Ok(FrequencyFinding { frequency, correlation, u2, guaranteed: u2 >= delta })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConverseCheck {
    /// `|E_x f(x) e_M(ξx)|`.
    pub correlation: f64,
    pub u2: f64,
}

/// Correlation with `e_M(ξ·)` never exceeds the `U²` norm.
pub fn converse_u2_check(f: &CyclicFunction, xi: i64) -> Result<ConverseCheck> {
    f.check_unit_bounded(1e-12)?;
    let correlation = dft(f).at(-xi).norm();
    let u2 = gowers_power_recursive(f, 2)?.max(0.0).powf(0.25);
    Ok(ConverseCheck { correlation, u2 })
}

// ---------------------------------------------------------------------------
// F_p toy problem
// ---------------------------------------------------------------------------

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// A polynomial over `F_p`, coefficients in increasing degree, trailing
/// zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FpPoly {
    pub p: u64,
    pub coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, coeffs: &[u64]) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        let mut coeffs: Vec<u64> = coeffs.iter().map(|&c| c % p).collect();
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Ok(Self { p, coeffs })
    }

    /// `-1` for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn eval(&self, x: u64) -> u64 {
        let x = x % self.p;
        self.coeffs.iter().rev().fold(0, |acc, &c| (acc * x + c) % self.p)
    }

    /// Values at `0..p`.
    pub fn table(&self) -> Vec<u64> {
        (0..self.p).map(|x| self.eval(x)).collect()
    }
}

/// Outcome of [`check_vanishing_derivatives`].
#[derive(Clone, Debug, Serialize)]
pub struct VanishingReport {
    pub vanishes: bool,
    /// `(x, [h_1, …, h_s])` with a nonzero iterated derivative.
    pub witness: Option<(u64, Vec<u64>)>,
    pub exhaustive: bool,
    pub tuples_checked: u64,
}

pub const EXHAUSTIVE_LIMIT: u128 = 100_000_000;
pub const SAMPLED_TUPLES: u64 = 100_000;
const SAMPLING_SEED: u64 = 0x005e_ed0f_f00d;

fn additive_derivative(table: &[u64], p: u64, x: u64, hs: &[u64]) -> u64 {
    // Σ_{S ⊆ [s]} (-1)^{s-|S|} φ(x + Σ_{i∈S} h_i)
    let s = hs.len();
    let mut acc = 0u64;
    for mask in 0u32..(1 << s) {
        let mut pos = x;
        for (i, &h) in hs.iter().enumerate() {
            if mask >> i & 1 == 1 {
                pos = (pos + h) % p;
            }
        }
        let v = table[pos as usize];
        if (s as u32 - mask.count_ones()).is_multiple_of(2) {
            acc = (acc + v) % p;
        } else {
            acc = (acc + p - v) % p;
        }
    }
    acc
}

/// Do all `s`-fold additive derivatives `∂_{h_1}⋯∂_{h_s}φ` vanish?
/// Exhaustive when `p^{s+1} ≤ 10⁸`, otherwise `10⁵` seeded random tuples.
pub fn check_vanishing_derivatives(table: &[u64], s: usize) -> Result<VanishingReport> {
    let p = table.len() as u64;
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if s == 0 || p <= s as u64 {
        return Err(Error::InvalidArgument(format!("need 1 <= s < p, got s = {s}, p = {p}")));
    }
    if let Some(&v) = table.iter().find(|&&v| v >= p) {
        return Err(Error::InvalidArgument(format!("value {v} is not a residue mod {p}")));
    }
    let work = (p as u128).saturating_pow(s as u32 + 1);
    if work <= EXHAUSTIVE_LIMIT {
        // Depth-first over shifts, keeping each partial derivative as a table.
        let mut levels: Vec<Vec<u64>> = vec![table.to_vec(); s + 1];
        let mut hs = vec![0u64; s];
        let mut checked = 0u64;
        let witness = exhaustive_search(&mut levels, &mut hs, 0, p, &mut checked);
        return Ok(VanishingReport { vanishes: witness.is_none(), witness, exhaustive: true, tuples_checked: checked });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLING_SEED);
    let mut hs = vec![0u64; s];
    for i in 0..SAMPLED_TUPLES {
        let x = rng.random_range(0..p);
        for h in hs.iter_mut() {
            *h = rng.random_range(0..p);
        }
        if additive_derivative(table, p, x, &hs) != 0 {
            return Ok(VanishingReport {
                vanishes: false,
                witness: Some((x, hs)),
                exhaustive: false,
                tuples_checked: i + 1,
            });
        }
    }
    Ok(VanishingReport { vanishes: true, witness: None, exhaustive: false, tuples_checked: SAMPLED_TUPLES })
}

fn exhaustive_search(
    levels: &mut [Vec<u64>],
    hs: &mut [u64],
    depth: usize,
    p: u64,
    checked: &mut u64,
) -> Option<(u64, Vec<u64>)> {
    let s = hs.len();
    if depth == s {
        *checked += p;
        return levels[s].iter().position(|&v| v != 0).map(|x| (x as u64, hs.to_vec()));
    }
    for h in 0..p {
        hs[depth] = h;
        let (head, tail) = levels.split_at_mut(depth + 1);
        let src = &head[depth];
        for x in 0..p as usize {
            tail[0][x] = (src[(x + h as usize) % p as usize] + p - src[x]) % p;
        }
        if let Some(w) = exhaustive_search(levels, hs, depth + 1, p, checked) {
            return Some(w);
        }
    }
    None
}

/// Coefficients of `S_k(m) = Σ_{n<m} n^k` for `k = 0..=max_k`, from
/// `Σ_{j≤k} C(k+1, j) S_j(m) = m^{k+1}`. Needs `p > max_k + 1`.
pub fn power_sum_polynomials(max_k: usize, p: u64) -> Vec<Vec<u64>> {
    let mut binom = vec![vec![0u64; max_k + 2]; max_k + 2];
    for n in 0..max_k + 2 {
        binom[n][0] = 1 % p;
        for r in 1..=n {
            binom[n][r] = (binom[n - 1][r - 1] + if r < n { binom[n - 1][r] } else { 0 }) % p;
        }
    }
    let mut sums: Vec<Vec<u64>> = Vec::with_capacity(max_k + 1);
    for k in 0..=max_k {
        let mut c = vec![0u64; k + 2];
        c[k + 1] = 1;
        for (j, sj) in sums.iter().enumerate() {
            for (d, &v) in sj.iter().enumerate() {
                c[d] = (c[d] + p - binom[k + 1][j] * v % p) % p;
            }
        }
        let inv = inv_mod((k as u64 + 1) % p, p);
        c.iter_mut().for_each(|v| *v = *v * inv % p);
        sums.push(c);
    }
    sums
}

/// The unique `Q` of degree `≤ deg P₁ + 1` with `Q(0) = φ0` and
/// `Q(m+1) − Q(m) = P₁(m)`: `Q(m) = φ0 + Σ_{n<m} P₁(n)`.
pub fn integrate_derivative(p1: &FpPoly, phi0: u64) -> Result<FpPoly> {
    let p = p1.p;
    let s = (p1.degree() + 1).max(0) as u64;
    if p <= s + 1 {
        return Err(Error::InvalidArgument(format!(
            "derivative of degree {} cannot be integrated over F_{p}",
            p1.degree()
        )));
    }
    let mut out = vec![0u64; s as usize + 1];
    out[0] = phi0 % p;
    if !p1.coeffs.is_empty() {
        let sums = power_sum_polynomials(p1.coeffs.len() - 1, p);
        for (k, &a) in p1.coeffs.iter().enumerate() {
            for (d, &v) in sums[k].iter().enumerate() {
                out[d] = (out[d] + a * v) % p;
            }
        }
    }
    FpPoly::new(p, &out)
}

#[derive(Clone, Debug, Serialize)]
pub struct Reconstruction {
    pub poly: FpPoly,
    /// Whether `P_{h+k}(x) = P_k(x+h) + P_h(x)` was checked on all of `F_p³`.
    pub cocycle_verified: bool,
}

/// Recover the polynomial of degree `≤ s` agreeing with `φ` (given by its
/// table on `F_p`) by integrating the reconstructed derivative `∂_1φ`.
pub fn reconstruct_polynomial(table: &[u64], s: usize) -> Result<Reconstruction> {
    let p = table.len() as u64;
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p <= s as u64 + 1 {
        return Err(Error::InvalidArgument(format!("need p > s + 1, got p = {p}, s = {s}")));
    }
    let poly = reconstruct_rec(table, s, p)?;
    let cocycle_verified = p <= 31 && verify_cocycle(table);
    Ok(Reconstruction { poly, cocycle_verified })
}

fn reconstruct_rec(table: &[u64], s: usize, p: u64) -> Result<FpPoly> {
    let poly = if s == 0 {
        FpPoly::new(p, &[table[0]])?
    } else {
        let derivative: Vec<u64> = (0..p as usize).map(|x| (table[(x + 1) % p as usize] + p - table[x]) % p).collect();
        let lower = reconstruct_rec(&derivative, s - 1, p)?;
        integrate_derivative(&lower, table[0])?
    };
    for x in 0..p {
        let got = poly.eval(x);
        if got != table[x as usize] {
            return Err(Error::ReconstructionMismatch { x, expected: table[x as usize], got });
        }
    }
    Ok(poly)
}

/// Exhaustive check of `P_{h+k}(x) = P_k(x+h) + P_h(x)` with `P_h = ∂_hφ`.
pub fn verify_cocycle(table: &[u64]) -> bool {
    let p = table.len();
    let d = |h: usize, x: usize| (table[(x + h) % p] + p as u64 - table[x]) % p as u64;
    (0..p).all(|h| {
        (0..p).all(|k| (0..p).all(|x| d((h + k) % p, x) == (d(k, (x + h) % p) + d(h, x)) % p as u64))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{character, Indicator};
    use num_complex::Complex64;

    #[test]
    fn character_is_found() {
        let chi = character(16, 5).unwrap();
        let r = inverse_u2(&chi, 1.0).unwrap();
        assert_eq!(r.frequency, 5);
        assert!((r.correlation - 1.0).abs() < 1e-12);
        assert!(r.guaranteed);
    }

    #[test]
    fn even_residues_peak_at_half_frequency() {
        // 1_A - 1/2 = (-1)^x / 2 on Z/10Z
        let f = Indicator::new(10, [0, 2, 4, 6, 8]).unwrap().balanced();
        let r = inverse_u2(&f, 0.5).unwrap();
        assert_eq!(r.frequency, 5);
        assert!((r.correlation - 0.5).abs() < 1e-14);
    }

    #[test]
    fn inverse_rejects_bad_input() {
        let f = CyclicFunction::constant(4, Complex64::new(2.0, 0.0)).unwrap();
        assert!(matches!(inverse_u2(&f, 0.5), Err(Error::Unbounded { .. })));
        let g = CyclicFunction::zeros(4).unwrap();
        assert!(inverse_u2(&g, 0.0).is_err());
        assert!(inverse_u2(&g, 1.5).is_err());
    }

    #[test]
    fn scaled_character_converse() {
        let m = 13;
        let xi = 4;
        let f = character(m, (m - xi) % m).unwrap().scale(Complex64::new(0.5, 0.0));
        let r = converse_u2_check(&f, xi as i64).unwrap();
        assert!((r.correlation - 0.5).abs() < 1e-14);
        assert!((r.u2 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn vanishing_derivatives_small_cases() {
        let sq = FpPoly::new(7, &[0, 0, 1]).unwrap().table();
        assert!(check_vanishing_derivatives(&sq, 3).unwrap().vanishes);
        let cube = FpPoly::new(7, &[0, 0, 0, 1]).unwrap().table();
        let r = check_vanishing_derivatives(&cube, 3).unwrap();
        assert!(!r.vanishes && r.exhaustive);
        let (x, hs) = r.witness.unwrap();
        assert_ne!(additive_derivative(&cube, 7, x, &hs), 0);
        assert!(check_vanishing_derivatives(&[4; 7], 1).unwrap().vanishes);
        assert!(check_vanishing_derivatives(&[0; 7], 7).is_err());
        assert!(matches!(check_vanishing_derivatives(&[0; 8], 1), Err(Error::NotPrime(8))));
    }

    #[test]
    fn sampled_path_for_large_tuples() {
        let table = FpPoly::new(101, &[3, 1, 4, 1]).unwrap().table();
        let r = check_vanishing_derivatives(&table, 4).unwrap();
        assert!(r.vanishes && !r.exhaustive);
        assert_eq!(r.tuples_checked, SAMPLED_TUPLES);
        let r = check_vanishing_derivatives(&table, 3).unwrap();
        assert!(!r.vanishes);
    }

    #[test]
    fn power_sums_match_direct_sums() {
        let p = 13;
        let sums = power_sum_polynomials(4, p);
        for (k, poly) in sums.iter().enumerate() {
            let poly = FpPoly::new(p, poly).unwrap();
            for m in 0..p {
                let direct = (0..m).map(|n| pow_mod(n, k as u64, p)).sum::<u64>() % p;
                assert_eq!(poly.eval(m), direct, "k={k} m={m}");
            }
        }
    }

    #[test]
    fn integration_examples() {
        let c = integrate_derivative(&FpPoly::new(11, &[]).unwrap(), 6).unwrap();
        assert_eq!(c.coeffs, vec![6]);
        let sq = integrate_derivative(&FpPoly::new(11, &[1, 2]).unwrap(), 0).unwrap();
        assert_eq!(sq.coeffs, vec![0, 0, 1]);
        let lin = integrate_derivative(&FpPoly::new(11, &[1]).unwrap(), 4).unwrap();
        assert_eq!(lin.coeffs, vec![4, 1]);
        assert!(integrate_derivative(&FpPoly::new(5, &[0, 0, 0, 1]).unwrap(), 0).is_err());
    }

    #[test]
    fn reconstruction_examples() {
        let table = FpPoly::new(13, &[1, 3, 1]).unwrap().table();
        let r = reconstruct_polynomial(&table, 2).unwrap();
        assert_eq!(r.poly.coeffs, vec![1, 3, 1]);
        assert!(r.cocycle_verified);
        let r = reconstruct_polynomial(&[9; 13], 0).unwrap();
        assert_eq!(r.poly.coeffs, vec![9]);
        let cube = FpPoly::new(13, &[0, 0, 0, 1]).unwrap().table();
        assert_eq!(reconstruct_polynomial(&cube, 3).unwrap().poly.coeffs, vec![0, 0, 0, 1]);
        // a cubic claimed to have degree 2 cannot be reconstructed
        assert!(matches!(reconstruct_polynomial(&cube, 2), Err(Error::ReconstructionMismatch { .. })));
    }
}
