//! Extremal examples: Behrend sets, the quadratic-phase quadruple, quadratic
//! Bohr sets, the block-random local-correlation example and the bilinear
//! "almost nilsequence" with large `U³` norm.

use std::sync::OnceLock;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::progressions::count_nontrivial_aps_mod;
use crate::ring::{dft, unit_roots, CyclicFunction, Indicator};

/// What to build, with kind-specific parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructionSpec {
    Behrend { n: u64 },
    QuadPhase { m: usize },
    QuadBohr { m: usize, w: u32 },
    BlockRandom { n: usize, seed: u64 },
    AlmostNil { m: usize, box_fraction: f64 },
}

impl ConstructionSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        match *self {
            Self::Behrend { n } if n < 2 => bad(format!("Behrend needs N >= 2, got {n}")),
            Self::QuadPhase { m } if m.gcd(&6) != 1 => bad(format!("gcd({m}, 6) must be 1")),
            Self::QuadBohr { m, w } if m == 0 || w == 0 => bad("quadratic Bohr set needs M, w >= 1".into()),
            Self::BlockRandom { n, .. } if n < 2 => bad(format!("block-random needs N >= 2, got {n}")),
            Self::AlmostNil { box_fraction, .. } if !(box_fraction > 0.0 && box_fraction < 1.0) => {
                bad(format!("box fraction {box_fraction} must lie in (0, 1)"))
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Construction> {
        self.validate()?;
        Ok(match *self {
            Self::Behrend { n } => Construction::Behrend(behrend_set(n)?),
            Self::QuadPhase { m } => Construction::QuadPhase(quad_phase_quadruple(m)?.to_vec()),
            Self::QuadBohr { m, w } => Construction::QuadBohr(quad_bohr_set(m, w)?),
            Self::BlockRandom { n, seed } => Construction::BlockRandom(block_random_counterexample(n, seed)?),
            Self::AlmostNil { m, box_fraction } => Construction::AlmostNil(almost_nil_function(m, box_fraction)?),
        })
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", content = "output", rename_all = "snake_case")]
pub enum Construction {
    Behrend(BehrendSet),
    QuadPhase(Vec<CyclicFunction>),
    QuadBohr(Indicator),
    BlockRandom(BlockRandom),
    AlmostNil(AlmostNil),
}

// ---------------------------------------------------------------------------
// Behrend
// ---------------------------------------------------------------------------

/// A 3-AP-free subset of `[N]` from the digit/sphere construction.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BehrendSet {
    pub n: u64,
    pub elements: Vec<u64>,
    pub base: u64,
    /// `None` when every digit is 0 or 1, where the whole digit cube is
    /// progression-free and no sphere restriction is needed.
    pub radius: Option<u64>,
}

impl BehrendSet {
    pub fn density(&self) -> f64 {
        self.elements.len() as f64 / self.n as f64
    }
}

/// Integers `1 + Σ c_i d^i ≤ N` with digits `c_i ≤ ⌊(d-1)/2⌋` and
/// `Σ c_i² = r`. Digit sums never carry, so `x + z = 2y` holds digitwise and
/// strict convexity of the sphere forces `x = y = z`. The base ranges over
/// `3..=2⌈√N⌉+1` and the largest sphere wins (smallest base, then smallest
/// radius on ties).
pub fn behrend_set(n: u64) -> Result<BehrendSet> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("Behrend needs N >= 2, got {n}")));
    }
    let d_max = (2 * (n as f64).sqrt().ceil() as u64 + 1).min(n).max(3);
    let bases: Vec<u64> = (3..=d_max).collect();
    let candidates = par::map_slice(&bases, |&d| best_sphere(n, d));
    let mut best: Option<BehrendSet> = None;
    for cand in candidates.into_iter().flatten() {
        if best.as_ref().is_none_or(|b| cand.elements.len() > b.elements.len()) {
            best = Some(cand);
        }
    }
    Ok(best.unwrap_or(BehrendSet { n, elements: vec![1], base: 3, radius: None }))
}

fn best_sphere(n: u64, d: u64) -> Option<BehrendSet> {
    let top = (d - 1) / 2;
    let mut spheres: Vec<Vec<u64>> = Vec::new();
    let mut cube = Vec::new();
    'values: for v in 0..n {
        let (mut rest, mut r) = (v, 0u64);
        while rest > 0 {
            let c = rest % d;
            if c > top {
                continue 'values;
            }
            r += c * c;
            rest /= d;
        }
        if spheres.len() <= r as usize {
            spheres.resize(r as usize + 1, Vec::new());
        }
        spheres[r as usize].push(v + 1);
        cube.push(v + 1);
    }
    if top == 1 {
        return Some(BehrendSet { n, elements: cube, base: d, radius: None });
    }
    let (r, elems) = spheres
        .into_iter()
        .enumerate()
        .fold((0, Vec::new()), |best, (r, s)| if s.len() > best.1.len() { (r, s) } else { best });
    Some(BehrendSet { n, elements: elems, base: d, radius: Some(r as u64) })
}

// ---------------------------------------------------------------------------
// Quadratic phases and Bohr sets
// ---------------------------------------------------------------------------

/// `(e_M(x²), e_M(-3x²), e_M(3x²), e_M(-x²))`; `Λ₄` of the quadruple is 1
/// because `x² − 3(x+y)² + 3(x+2y)² − (x+3y)² = 0`.
pub fn quad_phase_quadruple(m: usize) -> Result<[CyclicFunction; 4]> {
    if m == 0 || m.gcd(&6) != 1 {
        return Err(Error::InvalidArgument(format!("gcd({m}, 6) must be 1")));
    }
    Ok([
        CyclicFunction::quadratic_phase(m, 1)?,
        CyclicFunction::quadratic_phase(m, -3)?,
        CyclicFunction::quadratic_phase(m, 3)?,
        CyclicFunction::quadratic_phase(m, -1)?,
    ])
}

/// Above this, `{√2 m²}` is computed in fixed point instead of `f64`.
pub const DOUBLE_PRECISION_LIMIT: u64 = 1_000_000;

fn sqrt2_fixed() -> &'static BigUint {
    static SQRT2: OnceLock<BigUint> = OnceLock::new();
    // ⌊√2 · 2^128⌋
    SQRT2.get_or_init(|| (BigUint::from(2u32) << 256u32).sqrt())
}

/// Fractional part of `√2·m²`.
pub fn frac_sqrt2_square(m: u64) -> f64 {
    if m <= DOUBLE_PRECISION_LIMIT {
        let sq = (m * m) as f64;
        return (std::f64::consts::SQRT_2 * sq).rem_euclid(1.0);
    }
    let prod = BigUint::from(m) * BigUint::from(m) * sqrt2_fixed();
    let low: BigUint = prod & ((BigUint::from(1u32) << 128u32) - 1u32);
    let digits = low.to_u64_digits();
    let hi = digits.get(1).copied().unwrap_or(0);
    let lo = digits.first().copied().unwrap_or(0);
    (hi as f64 + lo as f64 / 2f64.powi(64)) / 2f64.powi(64)
}

/// `B = {m ∈ [M] : {√2 m²} ∈ [0, 1/w)}` as a subset of `Z/MZ` (`M ≡ 0`).
pub fn quad_bohr_set(m: usize, w: u32) -> Result<Indicator> {
    if m == 0 || w == 0 {
        return Err(Error::InvalidArgument("quadratic Bohr set needs M, w >= 1".into()));
    }
    let width = 1.0 / w as f64;
    let mask = par::map_range(m, |r| {
        let integer = if r == 0 { m as u64 } else { r as u64 };
        frac_sqrt2_square(integer) < width
    });
    Ok(Indicator::from_mask(mask))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BohrReport {
    pub modulus: usize,
    pub density: f64,
    pub max_nonzero_coefficient: f64,
    pub nontrivial_four_aps: u64,
    /// `α⁴M²`, the ordered count expected of a random set of density `α`.
    pub random_four_aps: f64,
}

pub fn bohr_report(b: &Indicator) -> BohrReport {
    let m = b.modulus();
    let alpha = b.density();
    BohrReport {
        modulus: m,
        density: alpha,
        max_nonzero_coefficient: dft(&b.to_function()).max_nonzero(),
        nontrivial_four_aps: count_nontrivial_aps_mod(b, 4),
        random_four_aps: alpha.powi(4) * (m as f64).powi(2),
    }
}

// ---------------------------------------------------------------------------
// Block-random function
// ---------------------------------------------------------------------------

/// `f = Σ_i e_M(a_i x)·1_{P_i}` on `M = N²`, `P_i = {1+iN, …, N+iN}`.
#[derive(Clone, Debug, Serialize)]
pub struct BlockRandom {
    pub n: usize,
    pub seed: u64,
    pub phases: Vec<u64>,
    pub function: CyclicFunction,
    #[serde(skip)]
    phase_index: Vec<usize>,
}

impl BlockRandom {
    pub fn modulus(&self) -> usize {
        self.n * self.n
    }

    /// Residues of block `i`.
    pub fn block(&self, i: usize) -> Vec<usize> {
        let m = self.modulus();
        (1..=self.n).map(|j| (j + i * self.n) % m).collect()
    }

    pub fn blocks(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|i| self.block(i)).collect()
    }

    /// `|E_{x∈P_i} f(x) e_M(-a_i x)|`, with phases combined as exact residues.
    pub fn block_correlation(&self, i: usize) -> f64 {
        let m = self.modulus() as u64;
        let roots = unit_roots(self.modulus());
        let a = self.phases[i];
        let sum: Complex64 = self
            .block(i)
            .into_iter()
            .map(|x| {
                let own = self.phase_index[x] as u64;
                let shift = a * x as u64 % m;
                roots[((own + m - shift) % m) as usize]
            })
            .sum();
        (sum / self.n as f64).norm()
    }
}

pub fn block_random_counterexample(n: usize, seed: u64) -> Result<BlockRandom> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("block-random needs N >= 2, got {n}")));
    }
    let m = n * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<u64> = (0..n).map(|_| rng.random_range(0..m as u64)).collect();
    let mut phase_index = vec![0usize; m];
    for (i, &a) in phases.iter().enumerate() {
        for j in 1..=n {
            let x = (j + i * n) % m;
            phase_index[x] = (a as u128 * x as u128 % m as u128) as usize;
        }
    }
    let roots = unit_roots(m);
    let function = CyclicFunction::from_fn(m, |x| roots[phase_index[x]])?;
    Ok(BlockRandom { n, seed, phases, function, phase_index })
}

// ---------------------------------------------------------------------------
// Bilinear phase on a box
// ---------------------------------------------------------------------------

pub const DEFAULT_BOX_FRACTION: f64 = 0.01;

/// `f(x + Ly) = e(xy/L)` for `0 ≤ x, y ≤ ⌊ρL⌋`, zero elsewhere, `L = ⌊√M⌋`.
#[derive(Clone, Debug, Serialize)]
pub struct AlmostNil {
    pub modulus: usize,
    pub l: usize,
    pub box_fraction: f64,
    /// Largest coordinate `⌊ρL⌋` of the support box.
    pub side: usize,
    pub function: CyclicFunction,
}

impl AlmostNil {
    pub fn support_size(&self) -> usize {
        (self.side + 1) * (self.side + 1)
    }
}

pub fn almost_nil_function(m: usize, box_fraction: f64) -> Result<AlmostNil> {
    if !(box_fraction > 0.0 && box_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("box fraction {box_fraction} must lie in (0, 1)")));
    }
    let l = (m as f64).sqrt() as usize;
    let l = if (l + 1) * (l + 1) <= m { l + 1 } else if l * l > m { l - 1 } else { l };
    let side = (l as f64 * box_fraction).floor() as usize;
    if side == 0 {
        return Err(Error::EmptySupport(format!(
            "box [0, {box_fraction}·{l}] holds only the origin at M = {m}"
        )));
    }
    let roots = unit_roots(l);
    let mut values = vec![Complex64::new(0.0, 0.0); m];
    for x in 0..=side {
        for y in 0..=side {
            values[x + l * y] = roots[(x * y) % l];
        }
    }
    Ok(AlmostNil { modulus: m, l, box_fraction, side, function: CyclicFunction::new(values)? })
}

/// Result of scanning `|E_z f(z) e_M(az² + bz)|` over `a ≠ 0` and all `b`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadraticScan {
    pub max_correlation: f64,
    pub a: usize,
    pub b: usize,
}

/// One FFT per quadratic coefficient `a`.
pub fn quadratic_correlation_scan(f: &CyclicFunction) -> Result<QuadraticScan> {
    let m = f.modulus();
    if m < 2 {
        return Err(Error::InvalidArgument("need M >= 2 for a nonzero quadratic coefficient".into()));
    }
    let roots = unit_roots(m);
    let mm = m as u128;
    let best = par::map_range(m - 1, |i| {
        let a = i + 1;
        let g = CyclicFunction::from_fn(m, |z| {
            let q = (a as u128 * z as u128 * z as u128 % mm) as usize;
            f.values()[z] * roots[(m - q) % m]
        })
        .expect("non-empty");
        // ĝ(b) = E f(z) e_M(-az² - bz); ±(a, b) range over the same set.
        let s = dft(&g);
        let (b, v) = s
            .coeffs()
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (b, z)| if z.norm() > acc.1 { (b, z.norm()) } else { acc });
        (m - a, (m - b) % m, v)
    });
    let (a, b, max_correlation) =
        best.into_iter()
            .fold((0, 0, -1.0), |acc, (a, b, v)| if v > acc.2 { (a, b, v) } else { acc });
    Ok(QuadraticScan { max_correlation, a, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::progressions::{find_three_ap, lambda_k};

    #[test]
    fn behrend_small_cases() {
        let b = behrend_set(10).unwrap();
        assert!(b.elements.len() >= 4, "{:?}", b);
        assert_eq!(find_three_ap(&b.elements), None);
        assert!(b.elements.iter().all(|&x| (1..=10).contains(&x)));
        assert!(behrend_set(1).is_err());
        let b = behrend_set(2).unwrap();
        assert!(!b.elements.is_empty());
    }

    #[test]
    fn behrend_thousand_is_progression_free() {
        let b = behrend_set(1000).unwrap();
        assert_eq!(find_three_ap(&b.elements), None);
        assert!(b.elements.len() >= 20);
    }

    #[test]
    fn quad_phase_identity_small() {
        let fs = quad_phase_quadruple(35).unwrap();
        let l = lambda_k(&fs).unwrap();
        assert!((l - 1.0).norm() < 1e-10);
        assert!(quad_phase_quadruple(9).is_err());
        assert!(quad_phase_quadruple(10).is_err());
    }

    #[test]
    fn gauss_sum_at_five() {
        let f = CyclicFunction::quadratic_phase(5, 1).unwrap();
        // (1 + 2e(1/5) + 2e(4/5)) / 5 has modulus 1/√5
        assert!((f.mean().norm() - 0.447_213_595_499_958).abs() < 1e-12);
    }

    #[test]
    fn bohr_window_one_is_everything() {
        let b = quad_bohr_set(50, 1).unwrap();
        assert_eq!(b.len(), 50);
        assert!(quad_bohr_set(50, 0).is_err());
    }

    #[test]
    fn fixed_point_fraction_matches_double() {
        for m in [3u64, 1000, 54321, 999_999] {
            let sq = BigUint::from(m) * BigUint::from(m) * sqrt2_fixed();
            let low: BigUint = sq & ((BigUint::from(1u32) << 128u32) - 1u32);
            let digits = low.to_u64_digits();
            let fixed = digits.get(1).copied().unwrap_or(0) as f64 / 2f64.powi(64);
            assert!((fixed - frac_sqrt2_square(m)).abs() < 1e-3, "m={m}");
        }
        let big = frac_sqrt2_square(3_000_000);
        assert!((0.0..1.0).contains(&big));
    }

    #[test]
    fn block_random_structure() {
        let b = block_random_counterexample(2, 7).unwrap();
        assert_eq!(b.modulus(), 4);
        assert_eq!(b.blocks(), vec![vec![1, 2], vec![3, 0]]);
        for i in 0..2 {
            assert_eq!(b.block_correlation(i), 1.0);
        }
        let again = block_random_counterexample(2, 7).unwrap();
        assert_eq!(b.phases, again.phases);
        assert!(block_random_counterexample(1, 0).is_err());
    }

    #[test]
    fn almost_nil_support() {
        let f = almost_nil_function(1600, 0.25).unwrap();
        assert_eq!(f.l, 40);
        assert_eq!(f.side, 10);
        let nonzero = f.function.values().iter().filter(|z| z.norm() > 0.0).count();
        assert_eq!(nonzero, f.support_size());
        assert_eq!(nonzero, 121);
        assert!(matches!(almost_nil_function(1600, 0.01), Err(Error::EmptySupport(_))));
        assert!(almost_nil_function(10_000, DEFAULT_BOX_FRACTION).is_ok());
    }

    #[test]
    fn quadratic_scan_finds_planted_phase() {
        let f = CyclicFunction::quadratic_phase(31, 5).unwrap();
        let s = quadratic_correlation_scan(&f).unwrap();
        assert!((s.max_correlation - 1.0).abs() < 1e-12);
        // e_M(5z²)·e_M(az² + bz) is constant only for a = -5, b = 0
        assert_eq!((s.a, s.b), (26, 0));
    }

    #[test]
    fn spec_json_roundtrip() {
        let spec = ConstructionSpec::QuadBohr { m: 101, w: 5 };
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(s, r#"{"kind":"quad_bohr","m":101,"w":5}"#);
        assert!(ConstructionSpec::AlmostNil { m: 100, box_fraction: 1.5 }.validate().is_err());
    }
}
