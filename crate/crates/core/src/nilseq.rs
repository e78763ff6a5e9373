//! Filtered nilpotent groups, polynomial sequences and nilsequences.
//!
//! Concrete groups only: `R^d` (additive) and the Heisenberg group
//! `H₃(R)` of unipotent upper-triangular 3×3 matrices, stored by the
//! entries `x = (1,2)`, `y = (2,3)`, `z = (1,3)`. The lattice is `H₃(Z)`
//! with fundamental domain `[0,1)³` given by
//! `(x, y, z)·H₃(Z) ↦ ({x}, {y}, {z − x⌊y⌋})`.

use std::fmt::Debug;
use std::marker::PhantomData;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::par;
use crate::ring::e;

/// Scalars the Heisenberg group can be built over.
pub trait Coord:
    Clone + Debug + PartialEq + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn from_int(n: i128) -> Self;
    fn floor(&self) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coord for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_int(n: i128) -> Self {
        n as f64
    }
    fn floor(&self) -> Self {
        f64::floor(*self)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coord for Rational64 {
    fn zero() -> Self {
        <Rational64 as Zero>::zero()
    }
    fn from_int(n: i128) -> Self {
        Rational64::from_integer(i64::try_from(n).expect("integer exceeds i64"))
    }
    fn floor(&self) -> Self {
        Rational64::floor(self)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

pub trait Group: Clone + Debug + Send + Sync {
    fn identity_like(&self) -> Self;
    fn op(&self, other: &Self) -> Self;
    fn inverse(&self) -> Self;
    /// `g^k` for any integer `k`.
    fn pow(&self, k: i128) -> Self;

    fn commutator(&self, other: &Self) -> Self {
        self.op(other).op(&self.inverse()).op(&other.inverse())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Heisenberg<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Coord> Heisenberg<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn identity() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn is_integral(&self, tol: f64) -> bool {
        [&self.x, &self.y, &self.z].iter().all(|c| {
            let v = c.to_f64();
            (v - v.round()).abs() <= tol
        })
    }
}

impl<T: Coord> Group for Heisenberg<T> {
    fn identity_like(&self) -> Self {
        Self::identity()
    }

    /// `(x₁,y₁,z₁)(x₂,y₂,z₂) = (x₁+x₂, y₁+y₂, z₁+z₂+x₁y₂)`.
    fn op(&self, o: &Self) -> Self {
        Self::new(
            self.x.clone() + o.x.clone(),
            self.y.clone() + o.y.clone(),
            self.z.clone() + o.z.clone() + self.x.clone() * o.y.clone(),
        )
    }

    fn inverse(&self) -> Self {
        Self::new(-self.x.clone(), -self.y.clone(), self.x.clone() * self.y.clone() - self.z.clone())
    }

    /// `(x,y,z)^k = (kx, ky, kz + C(k,2)xy)`.
    fn pow(&self, k: i128) -> Self {
        let kk = T::from_int(k);
        let pairs = T::from_int(k * (k - 1) / 2);
        Self::new(
            kk.clone() * self.x.clone(),
            kk.clone() * self.y.clone(),
            kk * self.z.clone() + pairs * self.x.clone() * self.y.clone(),
        )
    }
}

/// A point of `R^d` under addition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RealVector(pub Vec<f64>);

impl Group for RealVector {
    fn identity_like(&self) -> Self {
        RealVector(vec![0.0; self.0.len()])
    }
    fn op(&self, o: &Self) -> Self {
        RealVector(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }
    fn inverse(&self) -> Self {
        RealVector(self.0.iter().map(|a| -a).collect())
    }
    fn pow(&self, k: i128) -> Self {
        RealVector(self.0.iter().map(|a| a * k as f64).collect())
    }
}

type Member<G> = Arc<dyn Fn(&G, usize) -> bool + Send + Sync>;

/// `G = G₀ = G₁ ⊇ G₂ ⊇ …`, with `G_i` trivial for `i > degree`.
#[derive(Clone)]
pub struct Filtration<G> {
    pub degree: usize,
    member: Member<G>,
}

impl<G> Debug for Filtration<G> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Filtration").field("degree", &self.degree).finish()
    }
}

impl<G: Group> Filtration<G> {
    /// `member(g, i)` is consulted for levels `i ≥ 2`.
    pub fn new(degree: usize, member: impl Fn(&G, usize) -> bool + Send + Sync + 'static) -> Self {
        Self { degree, member: Arc::new(member) }
    }

    pub fn contains(&self, g: &G, level: usize) -> bool {
        level <= 1 || (self.member)(g, level)
    }

    /// Spot-check `[G_i, G_j] ⊆ G_{i+j}` on elements tagged with their level.
    pub fn commutators_close(&self, samples: &[(G, usize)]) -> bool {
        samples.iter().all(|(g, i)| {
            samples.iter().all(|(h, j)| self.contains(&g.commutator(h), i + j))
        })
    }
}

/// Lower central series of `H₃`: `G₂` is the centre, `G₃` is trivial.
/// Membership is tested to within `tol` (use 0 for exact rationals).
pub fn heisenberg_lower_central<T: Coord + 'static>(tol: f64) -> Filtration<Heisenberg<T>> {
    Filtration::new(2, move |g: &Heisenberg<T>, level| {
        let small = |c: &T| c.to_f64().abs() <= tol;
        match level {
            0..=1 => true,
            2 => small(&g.x) && small(&g.y),
            _ => small(&g.x) && small(&g.y) && small(&g.z),
        }
    })
}

/// Standard degree-`s` filtration on `R^d`: `G_i = R^d` for `i ≤ s`.
pub fn real_standard(s: usize, tol: f64) -> Filtration<RealVector> {
    Filtration::new(s, move |g: &RealVector, level| level <= s || g.0.iter().all(|v| v.abs() <= tol))
}

/// `C(n, i)` for any integer `n`.
pub fn binomial(n: i64, i: usize) -> i128 {
    let mut r: i128 = 1;
    for j in 0..i as i128 {
        r = r * (n as i128 - j) / (j + 1);
    }
    r
}

/// `φ(n) = g₀ · g₁^{C(n,1)} ⋯ g_s^{C(n,s)}` with `g_i ∈ G_i`.
#[derive(Clone, Debug)]
pub struct PolySequence<G> {
    coeffs: Vec<G>,
}

impl<G: Group> PolySequence<G> {
    pub fn new(coeffs: Vec<G>, filtration: &Filtration<G>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("polynomial sequence needs g₀".into()));
        }
        if let Some(i) = (0..coeffs.len()).find(|&i| !filtration.contains(&coeffs[i], i)) {
            return Err(Error::InvalidArgument(format!("Taylor coefficient g_{i} is not in G_{i}")));
        }
        Ok(Self { coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[G] {
        &self.coeffs
    }

    pub fn eval(&self, n: i64) -> G {
        self.coeffs[1..]
            .iter()
            .enumerate()
            .fold(self.coeffs[0].clone(), |acc, (i, g)| acc.op(&g.pow(binomial(n, i + 1))))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PolyCheckConfig {
    /// Base points `n ∈ [-window, window]`.
    pub window: i64,
    /// Shifts `h ∈ [-max_shift, max_shift] \ {0}`.
    pub max_shift: i64,
    /// Cap on the number of `(n, h_1..h_k)` tuples examined.
    pub budget: u64,
}

impl Default for PolyCheckConfig {
    fn default() -> Self {
        Self { window: 6, max_shift: 3, budget: 200_000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PolyWitness {
    pub n: i64,
    pub shifts: Vec<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PolyMapCheck {
    pub is_polynomial: bool,
    pub witness: Option<PolyWitness>,
    pub tuples_checked: u64,
}

fn iterated_derivative<G: Group>(f: &dyn Fn(i64) -> G, shifts: &[i64], n: i64) -> G {
    match shifts.split_last() {
        None => f(n),
        Some((&h, rest)) => iterated_derivative(f, rest, n + h).op(&iterated_derivative(f, rest, n).inverse()),
    }
}

/// Test `∂_{h_1}⋯∂_{h_k} f(n) ∈ G_k` for `k = 1..=s+1`, where
/// `∂_h f(n) = f(n+h)·f(n)^{-1}`, over a window of base points and shifts.
pub fn is_polynomial_map<G: Group>(
    f: &dyn Fn(i64) -> G,
    filtration: &Filtration<G>,
    s: usize,
    cfg: PolyCheckConfig,
) -> PolyMapCheck {
    let shifts: Vec<i64> = (-cfg.max_shift..=cfg.max_shift).filter(|&h| h != 0).collect();
    let mut checked = 0u64;
    for order in 1..=s + 1 {
        let mut idx = vec![0usize; order];
        loop {
            let hs: Vec<i64> = idx.iter().map(|&i| shifts[i]).collect();
            for n in -cfg.window..=cfg.window {
                if checked >= cfg.budget {
                    return PolyMapCheck { is_polynomial: true, witness: None, tuples_checked: checked };
                }
                checked += 1;
                if !filtration.contains(&iterated_derivative(f, &hs, n), order) {
                    return PolyMapCheck {
                        is_polynomial: false,
                        witness: Some(PolyWitness { n, shifts: hs }),
                        tuples_checked: checked,
                    };
                }
            }
            // odometer over shift tuples
            let mut pos = 0;
            loop {
                if pos == order {
                    break;
                }
                idx[pos] += 1;
                if idx[pos] < shifts.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == order {
                break;
            }
        }
    }
    PolyMapCheck { is_polynomial: true, witness: None, tuples_checked: checked }
}

/// `G/Γ` with a chosen fundamental domain.
pub trait Nilmanifold: Send + Sync {
    type Element: Group;
    /// Representative of `gΓ` in the fundamental domain.
    fn reduce(&self, g: &Self::Element) -> Self::Element;
    /// Coordinates of a representative, each in `[0, 1)`.
    fn coordinates(&self, rep: &Self::Element) -> Vec<f64>;
    fn dimension(&self) -> usize;
}

#[derive(Clone, Debug, Serialize)]
pub struct HeisenbergReduction<T> {
    pub rep: Heisenberg<T>,
    pub gamma: Heisenberg<T>,
}

/// `g = rep · γ` with `rep = ({x}, {y}, {z − x⌊y⌋})` and `γ ∈ H₃(Z)`.
pub fn heisenberg_reduce<T: Coord>(g: &Heisenberg<T>) -> HeisenbergReduction<T> {
    let fx = g.x.floor();
    let fy = g.y.floor();
    let shifted = g.z.clone() - g.x.clone() * fy.clone();
    let fz = shifted.floor();
    let rep = Heisenberg::new(g.x.clone() - fx.clone(), g.y.clone() - fy.clone(), shifted - fz.clone());
    let gamma = Heisenberg::new(fx.clone(), fy.clone(), fz + fx * fy);
    HeisenbergReduction { rep, gamma }
}

/// `H₃(R)/H₃(Z)`.
#[derive(Clone, Debug, Default)]
pub struct HeisenbergNilmanifold<T>(PhantomData<T>);

impl<T> HeisenbergNilmanifold<T> {
    pub fn new() -> Self {
        Self(PhantomData)
    }
}

impl<T: Coord + 'static> Nilmanifold for HeisenbergNilmanifold<T> {
    type Element = Heisenberg<T>;
    fn reduce(&self, g: &Heisenberg<T>) -> Heisenberg<T> {
        heisenberg_reduce(g).rep
    }
    fn coordinates(&self, rep: &Heisenberg<T>) -> Vec<f64> {
        vec![rep.x.to_f64(), rep.y.to_f64(), rep.z.to_f64()]
    }
    fn dimension(&self) -> usize {
        3
    }
}

/// `R^d/Z^d`.
#[derive(Clone, Copy, Debug)]
pub struct Torus {
    pub dim: usize,
}

impl Nilmanifold for Torus {
    type Element = RealVector;
    fn reduce(&self, g: &RealVector) -> RealVector {
        RealVector(g.0.iter().map(|v| v.rem_euclid(1.0)).collect())
    }
    fn coordinates(&self, rep: &RealVector) -> Vec<f64> {
        rep.0.clone()
    }
    fn dimension(&self) -> usize {
        self.dim
    }
}

type DomainFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// `ψ(n) = F(φ(n)Γ)`, with `F` given on the fundamental domain and a declared
/// Lipschitz bound.
#[derive(Clone)]
pub struct Nilsequence<N: Nilmanifold> {
    pub manifold: N,
    pub poly: PolySequence<N::Element>,
    pub lipschitz: f64,
    f: DomainFn,
}

impl<N: Nilmanifold> Nilsequence<N> {
    pub fn new(
        manifold: N,
        poly: PolySequence<N::Element>,
        lipschitz: f64,
        f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self { manifold, poly, lipschitz, f: Arc::new(f) }
    }

    pub fn eval(&self, n: i64) -> Complex64 {
        let rep = self.manifold.reduce(&self.poly.eval(n));
        (self.f)(&self.manifold.coordinates(&rep))
    }

    pub fn eval_domain(&self, coords: &[f64]) -> Complex64 {
        (self.f)(coords)
    }

    /// Largest difference quotient of `F` between axis-neighbours of a
    /// uniform grid with `per_axis` points per coordinate.
    pub fn sampled_lipschitz(&self, per_axis: usize) -> f64 {
        let d = self.manifold.dimension();
        let per_axis = per_axis.max(2);
        let step = 1.0 / per_axis as f64;
        let total = per_axis.pow(d as u32);
        let point = |mut idx: usize| -> Vec<f64> {
            (0..d)
                .map(|_| {
                    let c = idx % per_axis;
                    idx /= per_axis;
                    c as f64 * step
                })
                .collect()
        };
        par::map_range(total, |i| {
            let p = point(i);
            let fp = (self.f)(&p);
            (0..d)
                .filter(|&axis| p[axis] + step < 1.0 - 1e-12)
                .map(|axis| {
                    let mut q = p.clone();
                    q[axis] += step;
                    ((self.f)(&q) - fp).norm() / step
                })
                .fold(0.0, f64::max)
        })
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// The degree-2 sequence `φ(n) = (n/L, n/L, 0)` in `H₃`, exact over the
/// rationals: `g₁ = (1/L, 1/L, 0)`, `g₂ = (0, 0, -1/L²)`.
pub fn bracket_sequence(l: i64) -> Result<PolySequence<Heisenberg<Rational64>>> {
    if l < 1 {
        return Err(Error::InvalidArgument(format!("L must be positive, got {l}")));
    }
    let inv = Rational64::new(1, l);
    let zero = <Rational64 as Zero>::zero();
    PolySequence::new(
        vec![
            Heisenberg::identity(),
            Heisenberg::new(inv, inv, zero),
            Heisenberg::new(zero, zero, -(inv * inv)),
        ],
        &heisenberg_lower_central(0.0),
    )
}

/// `n ↦ e(c)` where `({n/L}, {n/L}, c)` represents `φ(n)H₃(Z)`; this is the
/// bracket phase `e(-(n/L)⌊n/L⌋)`.
pub fn bracket_nilsequence(l: i64) -> Result<Nilsequence<HeisenbergNilmanifold<Rational64>>> {
    Ok(Nilsequence::new(HeisenbergNilmanifold::new(), bracket_sequence(l)?, std::f64::consts::TAU, |c: &[f64]| e(c[2])))
}

/// `h(n) = g(n)·ρ({n/L})`: the bracket phase damped near the discontinuity in
/// the `y` coordinate.
pub fn smoothed_bracket_nilsequence(
    l: i64,
    cutoff: SmoothCutoff,
) -> Result<Nilsequence<HeisenbergNilmanifold<Rational64>>> {
    let k = std::f64::consts::TAU + cutoff.lipschitz();
    Ok(Nilsequence::new(HeisenbergNilmanifold::new(), bracket_sequence(l)?, k, move |c: &[f64]| {
        e(c[2]) * cutoff.eval(c[1])
    }))
}

/// Degree-1 nilsequence `e(ξn)` on the circle.
pub fn linear_phase_nilsequence(xi: f64) -> Nilsequence<Torus> {
    let poly = PolySequence::new(vec![RealVector(vec![0.0]), RealVector(vec![xi])], &real_standard(1, 0.0))
        .expect("degree-1 coefficients");
    Nilsequence::new(Torus { dim: 1 }, poly, std::f64::consts::TAU, |c: &[f64]| e(c[0]))
}

/// `g(n) = e(-(n/L)⌊n/L⌋)`, reduced exactly in integers.
pub fn bracket_phase(l: i64, n: i64) -> Result<Complex64> {
    if l < 1 {
        return Err(Error::InvalidArgument(format!("L must be positive, got {l}")));
    }
    let q = n.div_euclid(l) as i128;
    let r = (n as i128 * q).rem_euclid(l as i128);
    Ok(e(-(r as f64) / l as f64))
}

/// Piecewise-linear `ρ: [0,1] → [0,1]`, zero at both ends and 1 on
/// `[margin, 1 − margin]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SmoothCutoff {
    pub margin: f64,
}

impl SmoothCutoff {
    pub const DEFAULT_MARGIN: f64 = 1e-6;

    pub fn new(margin: f64) -> Result<Self> {
        if !(margin > 0.0 && margin < 0.5) {
            return Err(Error::InvalidArgument(format!("plateau [{margin}, {}] is degenerate", 1.0 - margin)));
        }
        Ok(Self { margin })
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            0.0
        } else if t < self.margin {
            t / self.margin
        } else if t > 1.0 - self.margin {
            (1.0 - t) / self.margin
        } else {
            1.0
        }
    }

    pub fn lipschitz(&self) -> f64 {
        1.0 / self.margin
    }
}

impl Default for SmoothCutoff {
    fn default() -> Self {
        Self { margin: Self::DEFAULT_MARGIN }
    }
}

/// Output of [`weyl_diagnostic`].
#[derive(Clone, Debug, Serialize)]
pub struct WeylDiagnostic {
    pub exp_sum: Complex64,
    pub magnitude: f64,
    /// Best denominator found in `1..=q_max`.
    pub q: u64,
    pub q_max: u64,
    /// `N^i ‖q a_i‖` for `i = 1..=d`.
    pub approx_errors: Vec<f64>,
}

/// Distance to the nearest integer.
pub fn dist_to_int(t: f64) -> f64 {
    (t - t.round()).abs()
}

/// `E_{n∈[N]} e(P(n))` together with the `q ≤ q_max` minimising
/// `max_i N^i ‖q a_i‖`. `coeffs[i]` is the coefficient of `n^i`. The default
/// search budget is `⌈δ^{-2d}⌉`, capped at `10⁶`.
pub fn weyl_diagnostic(coeffs: &[f64], n: u64, delta: f64, q_max: Option<u64>) -> Result<WeylDiagnostic> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must lie in (0, 1]")));
    }
    let d = coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0).max(1);
    let q_max = q_max.unwrap_or_else(|| delta.powi(-2 * d as i32).ceil().min(1e6) as u64).max(1);
    let eval = |m: u64| {
        let x = m as f64;
        coeffs.iter().rev().fold(0.0f64, |acc, &c| acc.mul_add(x, c))
    };
    let sum: Complex64 = par::chunked_sum(n as usize, 4096, |i| e(eval(i as u64 + 1).rem_euclid(1.0)));
    let exp_sum = sum / n as f64;
    let nf = n as f64;
    let errors = |q: u64| -> Vec<f64> {
        (1..=d)
            .map(|i| nf.powi(i as i32) * dist_to_int(q as f64 * coeffs.get(i).copied().unwrap_or(0.0)))
            .collect()
    };
    let quality = |errs: &[f64]| errs.iter().copied().fold(0.0, f64::max);
    let mut best = (1, quality(&errors(1)));
    for q in 2..=q_max {
        let qual = quality(&errors(q));
        if qual < best.1 {
            best = (q, qual);
        }
    }
    Ok(WeylDiagnostic { exp_sum, magnitude: exp_sum.norm(), q: best.0, q_max, approx_errors: errors(best.0) })
}
