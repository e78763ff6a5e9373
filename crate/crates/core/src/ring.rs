//! Functions on `Z/MZ`, characters and the Fourier transform.
//!
//! Conventions: `f̂(ξ) = E_x f(x) e_M(-ξx)` (averaged), and inversion is the
//! plain sum `f(x) = Σ_ξ f̂(ξ) e_M(ξx)`. `L^p` norms average over the group,
//! `ℓ^p` norms sum.

use std::cell::RefCell;
use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// `e^{2πi r/m}` for `r = 0..m`.
pub fn unit_roots(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|r| {
            if r == 0 {
                return Complex64::new(1.0, 0.0);
            }
            let (s, c) = (TAU * r as f64 / m as f64).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}

/// `e(t) = e^{2πit}`.
pub fn e(t: f64) -> Complex64 {
    let (s, c) = (TAU * t.rem_euclid(1.0)).sin_cos();
    Complex64::new(c, s)
}

/// Canonical residue of `x` modulo `m`.
#[inline]
pub fn residue(x: i64, m: usize) -> usize {
    x.rem_euclid(m as i64) as usize
}

/// A complex-valued function on `Z/MZ`; the modulus is the number of values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionRecord", into = "FunctionRecord")]
pub struct CyclicFunction {
    values: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct FunctionRecord {
    modulus: usize,
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

impl TryFrom<FunctionRecord> for CyclicFunction {
    type Error = Error;

    fn try_from(r: FunctionRecord) -> Result<Self> {
        if r.re.len() != r.modulus {
            return Err(Error::LengthMismatch { expected: r.modulus, got: r.re.len() });
        }
        let im = r.im.unwrap_or_else(|| vec![0.0; r.modulus]);
        if im.len() != r.modulus {
            return Err(Error::LengthMismatch { expected: r.modulus, got: im.len() });
        }
        Self::new(r.re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect())
    }
}

impl From<CyclicFunction> for FunctionRecord {
    fn from(f: CyclicFunction) -> Self {
        FunctionRecord {
            modulus: f.modulus(),
            re: f.values.iter().map(|z| z.re).collect(),
            im: Some(f.values.iter().map(|z| z.im).collect()),
        }
    }
}

impl CyclicFunction {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyModulus);
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(m: usize, f: impl Fn(usize) -> Complex64) -> Result<Self> {
        Self::new((0..m).map(f).collect())
    }

    pub fn zeros(m: usize) -> Result<Self> {
        Self::constant(m, Complex64::new(0.0, 0.0))
    }

    pub fn constant(m: usize, c: Complex64) -> Result<Self> {
        Self::new(vec![c; m])
    }

    /// `x ↦ e_M(c·x²)`, with the phase reduced exactly in integers.
    pub fn quadratic_phase(m: usize, c: i64) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyModulus);
        }
        let roots = unit_roots(m);
        let mm = m as i128;
        Self::from_fn(m, |x| {
            let x = x as i128;
            roots[(c as i128 * x * x).rem_euclid(mm) as usize]
        })
    }

    pub fn modulus(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Value at any integer, reduced modulo `M`.
    pub fn at(&self, x: i64) -> Complex64 {
        self.values[residue(x, self.modulus())]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self { values: self.values.iter().map(|&z| f(z)).collect() }
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    /// Translate: `x ↦ f(x + h)`.
    pub fn shift(&self, h: i64) -> Self {
        let m = self.modulus();
        let h = residue(h, m);
        Self { values: (0..m).map(|x| self.values[(x + h) % m]).collect() }
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.modulus() as f64
    }

    pub fn linf(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        norm(&self.values, kind)
    }

    /// Errors with the first value whose modulus exceeds `1 + tol`.
    pub fn check_unit_bounded(&self, tol: f64) -> Result<()> {
        match self.values.iter().position(|z| z.norm() > 1.0 + tol) {
            Some(index) => Err(Error::Unbounded { index, magnitude: self.values[index].norm() }),
            None => Ok(()),
        }
    }

    pub fn same_modulus(&self, other: &Self) -> Result<()> {
        if self.modulus() != other.modulus() {
            return Err(Error::ModulusMismatch { left: self.modulus(), right: other.modulus() });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Self> {
        self.same_modulus(other)?;
        Ok(Self { values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect() })
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }
}

impl Add for &CyclicFunction {
    type Output = CyclicFunction;
    fn add(self, rhs: Self) -> CyclicFunction {
        self.try_add(rhs).expect("modulus mismatch")
    }
}

impl Sub for &CyclicFunction {
    type Output = CyclicFunction;
    fn sub(self, rhs: Self) -> CyclicFunction {
        self.try_sub(rhs).expect("modulus mismatch")
    }
}

impl Mul for &CyclicFunction {
    type Output = CyclicFunction;
    fn mul(self, rhs: Self) -> CyclicFunction {
        self.try_mul(rhs).expect("modulus mismatch")
    }
}

/// Fourier coefficients `f̂(ξ)`, `ξ ∈ Z/MZ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    coeffs: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyModulus);
        }
        Ok(Self { coeffs })
    }

    pub fn modulus(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient at any integer frequency, reduced modulo `M`.
    pub fn at(&self, xi: i64) -> Complex64 {
        self.coeffs[residue(xi, self.modulus())]
    }

    pub fn norm(&self, kind: NormKind) -> Result<f64> {
        norm(&self.coeffs, kind)
    }

    /// `max_{ξ≠0} |f̂(ξ)|`; zero when `M = 1`.
    pub fn max_nonzero(&self) -> f64 {
        self.coeffs[1..].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// A subset of `Z/MZ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "IndicatorRecord", into = "IndicatorRecord")]
pub struct Indicator {
    members: Vec<bool>,
    size: usize,
}

#[derive(Serialize, Deserialize)]
struct IndicatorRecord {
    modulus: usize,
    subset: Vec<u64>,
}

impl TryFrom<IndicatorRecord> for Indicator {
    type Error = Error;

    fn try_from(r: IndicatorRecord) -> Result<Self> {
        if let Some(&bad) = r.subset.iter().find(|&&x| x >= r.modulus as u64) {
            return Err(Error::InvalidArgument(format!(
                "residue {bad} outside 0..{}",
                r.modulus
            )));
        }
        Indicator::new(r.modulus, r.subset.iter().map(|&x| x as usize))
    }
}

impl From<Indicator> for IndicatorRecord {
    fn from(a: Indicator) -> Self {
        IndicatorRecord { modulus: a.modulus(), subset: a.elements().map(|x| x as u64).collect() }
    }
}

impl Indicator {
    /// Residues are reduced modulo `m`; duplicates are merged.
    pub fn new(m: usize, subset: impl IntoIterator<Item = usize>) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyModulus);
        }
        let mut members = vec![false; m];
        for x in subset {
            members[x % m] = true;
        }
        Ok(Self::from_mask(members))
    }

    pub fn from_mask(members: Vec<bool>) -> Self {
        let size = members.iter().filter(|&&b| b).count();
        Self { members, size }
    }

    pub fn modulus(&self) -> usize {
        self.members.len()
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn contains(&self, x: i64) -> bool {
        self.members[residue(x, self.modulus())]
    }

    pub fn mask(&self) -> &[bool] {
        &self.members
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    /// `α = |A|/M`.
    pub fn density(&self) -> f64 {
        self.size as f64 / self.modulus() as f64
    }

    pub fn to_function(&self) -> CyclicFunction {
        let values = self
            .members
            .iter()
            .map(|&b| Complex64::new(if b { 1.0 } else { 0.0 }, 0.0))
            .collect();
        CyclicFunction { values }
    }

    /// Balanced function `1_A - α`.
    pub fn balanced(&self) -> CyclicFunction {
        let alpha = self.density();
        let values = self
            .members
            .iter()
            .map(|&b| Complex64::new(if b { 1.0 } else { 0.0 } - alpha, 0.0))
            .collect();
        CyclicFunction { values }
    }
}

/// The character `x ↦ e_M(ξx)`.
pub fn character(m: usize, xi: usize) -> Result<CyclicFunction> {
    if m == 0 {
        return Err(Error::EmptyModulus);
    }
    if xi >= m {
        return Err(Error::InvalidArgument(format!("frequency {xi} not in 0..{m}")));
    }
    let roots = unit_roots(m);
    CyclicFunction::from_fn(m, |x| roots[(xi * x) % m])
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    fft.process(buf);
}

/// Fourier transform through the general-length FFT.
pub fn dft(f: &CyclicFunction) -> Spectrum {
    let m = f.modulus();
    let mut buf = f.values.clone();
    fft_in_place(&mut buf, false);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|z| *z *= scale);
    Spectrum { coeffs: buf }
}

/// `Σ_ξ |f̂(ξ)|⁴`, reusing the caller's scratch buffer.
pub(crate) fn fourth_moment_of_spectrum(values: &[Complex64], scratch: &mut Vec<Complex64>) -> f64 {
    scratch.clear();
    scratch.extend_from_slice(values);
    fft_in_place(scratch, false);
    let m = values.len() as f64;
    let m4 = m * m * m * m;
    scratch.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum::<f64>() / m4
}

/// `O(M²)` Fourier transform by direct summation.
pub fn dft_naive(f: &CyclicFunction) -> Spectrum {
    let m = f.modulus();
    let roots = unit_roots(m);
    let coeffs = par::map_range(m, |xi| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (x, &v) in f.values.iter().enumerate() {
            acc += v * roots[(m - (xi * x) % m) % m];
        }
        acc / m as f64
    });
    Spectrum { coeffs }
}

/// Fourier inversion `f(x) = Σ_ξ f̂(ξ) e_M(ξx)`.
pub fn inverse_dft(s: &Spectrum) -> CyclicFunction {
    let mut buf = s.coeffs.clone();
    fft_in_place(&mut buf, true);
    CyclicFunction { values: buf }
}

pub fn inverse_dft_naive(s: &Spectrum) -> CyclicFunction {
    let m = s.modulus();
    let roots = unit_roots(m);
    let values = par::map_range(m, |x| {
        s.coeffs.iter().enumerate().map(|(xi, &c)| c * roots[(xi * x) % m]).sum()
    });
    CyclicFunction { values }
}

/// `⟨g, h⟩ = E_x g(x) conj(h(x))`.
pub fn inner_product(g: &CyclicFunction, h: &CyclicFunction) -> Result<Complex64> {
    g.same_modulus(h)?;
    let s: Complex64 = g.values.iter().zip(&h.values).map(|(&a, &b)| a * b.conj()).sum();
    Ok(s / g.modulus() as f64)
}

/// Which norm to take: averaged `L^p`, summed `ℓ^p`, or the sup norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    Lp(f64),
    SmallLp(f64),
    Linf,
}

pub fn norm(values: &[Complex64], kind: NormKind) -> Result<f64> {
    let check = |p: f64| {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::InvalidArgument(format!("norm exponent {p} must lie in [1, ∞)")));
        }
        Ok(())
    };
    match kind {
        NormKind::Linf => Ok(values.iter().map(|z| z.norm()).fold(0.0, f64::max)),
        NormKind::Lp(p) => {
            check(p)?;
            let s: f64 = values.iter().map(|z| z.norm().powf(p)).sum();
            Ok((s / values.len() as f64).powf(1.0 / p))
        }
        NormKind::SmallLp(p) => {
            check(p)?;
            let s: f64 = values.iter().map(|z| z.norm().powf(p)).sum();
            Ok(s.powf(1.0 / p))
        }
    }
}
