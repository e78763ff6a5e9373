//! Density increment for 3-term progressions.
//!
//! One step: a 3-AP-free `A ⊆ [N]` of density `α` has a nonzero frequency `ξ`
//! with a large coefficient; a Dirichlet denominator `q` of `ξ/M` makes
//! `e_M(ξx)` nearly constant along short progressions of step `q`; one of those
//! progressions carries density at least `α + c·α²`. Rescaling and repeating
//! either finds a progression or runs out of room.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::progressions::{embedding_modulus, find_three_ap};
use crate::ring::{dft, CyclicFunction};

pub const TRACE_SCHEMA: &str = "gowers-lab/roth-trace/v1";

/// `{a + q·n : 1 ≤ n ≤ length}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progression {
    pub a: i64,
    pub q: u64,
    pub length: u64,
}

impl Progression {
    pub fn new(a: i64, q: u64, length: u64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidArgument("progression step must be positive".into()));
        }
        Ok(Self { a, q, length })
    }

    pub fn element(&self, n: u64) -> i64 {
        self.a + (self.q * n) as i64
    }

    pub fn elements(&self) -> impl Iterator<Item = i64> + '_ {
        (1..=self.length).map(|n| self.element(n))
    }

    pub fn within(&self, n: u64) -> bool {
        self.length == 0 || (self.element(1) >= 1 && self.element(self.length) <= n as i64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IncrementConfig {
    /// Stop once `α ≤ N^{-density_floor_exponent}`.
    pub density_floor_exponent: f64,
    /// Required gain per step is `c_inc·α²`.
    pub increment_constant: f64,
    /// A frequency qualifies when its coefficient is at least this times `α²`.
    pub frequency_factor: f64,
    /// Allowed drift of `ξx/M` along a chosen progression, in periods.
    pub phase_budget: f64,
    /// New lengths must satisfy `N' ≥ c_len·α²·√N − 1`.
    pub c_len: f64,
    pub min_length: u64,
}

impl Default for IncrementConfig {
    fn default() -> Self {
        Self {
            density_floor_exponent: 0.5,
            increment_constant: 0.125,
            frequency_factor: 0.5,
            phase_budget: 0.1,
            c_len: 1.0 / (20.0 * std::f64::consts::PI),
            min_length: 8,
        }
    }
}

impl IncrementConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("density_floor_exponent", self.density_floor_exponent),
            ("increment_constant", self.increment_constant),
            ("frequency_factor", self.frequency_factor),
            ("phase_budget", self.phase_budget),
            ("c_len", self.c_len),
            ("min_length", self.min_length as f64),
        ];
        match positive.iter().find(|(_, v)| !(*v > 0.0 && v.is_finite())) {
            Some((name, v)) => Err(Error::InvalidArgument(format!("{name} must be positive, got {v}"))),
            None => Ok(()),
        }
    }

    /// `⌈1/(c_inc·α₀)⌉ + 1`.
    pub fn step_budget(&self, alpha0: f64) -> u64 {
        if alpha0 <= 0.0 {
            return 1;
        }
        (1.0 / (self.increment_constant * alpha0)).ceil() as u64 + 1
    }
}

/// `A' = {n ∈ [N'] : a + q·n ∈ A}`.
pub fn rescale(a: &[u64], n: u64, p: &Progression) -> Result<Vec<u64>> {
    if !p.within(n) {
        return Err(Error::ProgressionOutOfRange { n });
    }
    let mut mask = vec![false; n as usize + 1];
    for &x in a.iter().filter(|&&x| x >= 1 && x <= n) {
        mask[x as usize] = true;
    }
    Ok((1..=p.length).filter(|&j| mask[p.element(j) as usize]).collect())
}

/// Continued-fraction convergents `(p_k, q_k)` of `num/den`.
pub fn convergents(num: u64, den: u64) -> Vec<(u64, u64)> {
    let (mut a, mut b) = (num, den);
    let (mut p0, mut q0, mut p1, mut q1) = (0u64, 1u64, 1u64, 0u64);
    let mut out = Vec::new();
    while b != 0 {
        let t = a / b;
        let (p2, q2) = (t * p1 + p0, t * q1 + q0);
        out.push((p2, q2));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        (a, b) = (b, a - t * b);
    }
    out
}

/// `‖t/m‖` for an integer `t`.
fn circle_dist(t: u128, m: u64) -> f64 {
    let r = (t % m as u128) as u64;
    r.min(m - r) as f64 / m as f64
}

/// Largest convergent denominator `q ≤ bound` of `ξ/M`, and `‖qξ/M‖`.
pub fn dirichlet_step(xi: u64, m: u64, bound: u64) -> (u64, f64) {
    let q = convergents(xi, m)
        .into_iter()
        .map(|(_, q)| q)
        .filter(|&q| q >= 1 && q <= bound.max(1))
        .max()
        .unwrap_or(1);
    (q, circle_dist(q as u128 * xi as u128, m))
}

/// Large-coefficient data for `A ⊆ [N]` embedded in `Z/MZ`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Frequency {
    pub modulus: u64,
    pub xi: u64,
    /// `|Σ_{x∈[N]} (1_A − α)(x) e_M(−ξx)| / N`.
    pub coefficient: f64,
}

/// The nonzero frequency with the largest balanced coefficient; smallest `ξ`
/// on ties.
pub fn dominant_frequency(a: &[u64], n: u64) -> Result<Frequency> {
    let a = sorted_members(a, n)?;
    let m = embedding_modulus(n, 3);
    let alpha = a.len() as f64 / n as f64;
    let mut vals = vec![Complex64::new(0.0, 0.0); m as usize];
    for v in vals.iter_mut().take(n as usize + 1).skip(1) {
        *v = Complex64::new(-alpha, 0.0);
    }
    for &x in &a {
        vals[x as usize] += 1.0;
    }
    let spec = dft(&CyclicFunction::new(vals)?);
    let scale = m as f64 / n as f64;
    let (xi, best) = spec.coeffs().iter().enumerate().skip(1).fold((0usize, -1.0), |acc, (i, z)| {
        let v = z.norm();
        if v > acc.1 {
            (i, v)
        } else {
            acc
        }
    });
    Ok(Frequency { modulus: m, xi: xi as u64, coefficient: best * scale })
}

/// Why a step failed to produce an increment.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum CertificateReason {
    SmallCoefficients,
    NoDenseProgression,
}

/// Everything the engine measured when its constants failed to close.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub reason: CertificateReason,
    pub n: u64,
    pub size: u64,
    pub alpha: f64,
    pub frequency: Frequency,
    pub threshold: f64,
    pub q: Option<u64>,
    pub drift: Option<f64>,
    pub chunk_length: Option<u64>,
    pub best_density: Option<f64>,
    pub required_density: f64,
}

/// A successful step.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Increment {
    pub n: u64,
    pub size: u64,
    pub alpha: f64,
    pub frequency: Frequency,
    pub q: u64,
    /// `‖qξ/M‖`.
    pub drift: f64,
    pub progression: Progression,
    /// `|A ∩ P|`.
    pub hits: u64,
    pub new_density: f64,
    pub required_density: f64,
    /// `max_{x∈P} ‖ξ(x − x₀)/M‖`.
    pub phase_variation: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum StepOutcome {
    Increment(Increment),
    Certificate(Certificate),
}

fn sorted_members(a: &[u64], n: u64) -> Result<Vec<u64>> {
    let mut v = a.to_vec();
    v.sort_unstable();
    v.dedup();
    if let Some(&x) = v.iter().find(|&&x| x == 0 || x > n) {
        return Err(Error::InvalidArgument(format!("{x} is not in [1, {n}]")));
    }
    Ok(v)
}

/// One density-increment step for a 3-AP-free `A ⊆ [N]`.
pub fn find_increment(a: &[u64], n: u64, cfg: &IncrementConfig) -> Result<StepOutcome> {
    cfg.validate()?;
    let a = sorted_members(a, n)?;
    if let Some(w) = find_three_ap(&a) {
        return Err(Error::ContainsProgression(w));
    }
    if n < cfg.min_length {
        return Err(Error::BelowLengthFloor { n, floor: cfg.min_length });
    }
    let alpha = a.len() as f64 / n as f64;
    let required_density = alpha + cfg.increment_constant * alpha * alpha;
    let threshold = cfg.frequency_factor * alpha * alpha;
    let frequency = dominant_frequency(&a, n)?;
    let cert = |reason, q, drift, chunk_length, best_density| Certificate {
        reason,
        n,
        size: a.len() as u64,
        alpha,
        frequency,
        threshold,
        q,
        drift,
        chunk_length,
        best_density,
        required_density,
    };
    if frequency.coefficient < threshold - 1e-9 {
        return Ok(StepOutcome::Certificate(cert(CertificateReason::SmallCoefficients, None, None, None, None)));
    }

    let m = frequency.modulus;
    let (q, drift) = dirichlet_step(frequency.xi, m, (n as f64).sqrt().floor() as u64);
    let chunk = if drift == 0.0 { n } else { ((cfg.phase_budget / drift).floor() as u64 + 1).min(n) };
    let min_len = (cfg.c_len * alpha * alpha * (n as f64).sqrt() - 1.0).max(cfg.min_length as f64).ceil() as u64;

    let mut mask = vec![false; n as usize + 1];
    for &x in &a {
        mask[x as usize] = true;
    }
    // (hits, length, first element); densest first, then longest, then leftmost
    let mut best: Option<(u64, u64, u64)> = None;
    let better = |cand: (u64, u64, u64), cur: Option<(u64, u64, u64)>| match cur {
        None => true,
        Some(c) => {
            let lhs = cand.0 as u128 * c.1 as u128;
            let rhs = c.0 as u128 * cand.1 as u128;
            lhs > rhs || (lhs == rhs && cand.1 > c.1)
        }
    };
    for r in 1..=q.min(n) {
        let class_len = (n - r) / q + 1;
        let pieces = class_len.div_ceil(chunk);
        let (base, extra) = (class_len / pieces, class_len % pieces);
        let mut start = 0u64;
        for i in 0..pieces {
            let len = base + u64::from(i < extra);
            if len >= min_len && len < n {
                let first = r + q * start;
                let hits = (0..len).filter(|&j| mask[(first + q * j) as usize]).count() as u64;
                if better((hits, len, first), best) {
                    best = Some((hits, len, first));
                }
            }
            start += len;
        }
    }

    let Some((hits, len, first)) = best else {
        return Ok(StepOutcome::Certificate(cert(CertificateReason::NoDenseProgression, Some(q), Some(drift), Some(chunk), None)));
    };
    let new_density = hits as f64 / len as f64;
    if new_density < required_density {
        return Ok(StepOutcome::Certificate(cert(
            CertificateReason::NoDenseProgression,
            Some(q),
            Some(drift),
            Some(chunk),
            Some(new_density),
        )));
    }
    let phase_variation = (0..len)
        .map(|j| circle_dist(j as u128 * q as u128 * frequency.xi as u128, m))
        .fold(0.0, f64::max);
    Ok(StepOutcome::Increment(Increment {
        n,
        size: a.len() as u64,
        alpha,
        frequency,
        q,
        drift,
        progression: Progression { a: first as i64 - q as i64, q, length: len },
        hits,
        new_density,
        required_density,
        phase_variation,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitReason {
    #[serde(rename = "found_3ap")]
    Found3ap,
    SmallDensity,
    LengthFloor,
    StepBudget,
    NoIncrement,
}

/// A 3-AP found by the loop, in local and original coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub local: [u64; 3],
    pub original: [i64; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IncrementTrace {
    pub schema: String,
    pub config: IncrementConfig,
    pub initial_n: u64,
    pub initial_alpha: f64,
    pub step_budget: u64,
    pub steps: Vec<Increment>,
    pub final_n: u64,
    pub final_size: u64,
    pub final_alpha: f64,
    pub final_exit: ExitReason,
    pub witness: Option<Witness>,
    pub certificate: Option<Certificate>,
}

impl IncrementTrace {
    /// Densities strictly increase and lengths strictly decrease along the trace.
    pub fn is_monotone(&self) -> bool {
        let densities: Vec<f64> = self.steps.iter().map(|s| s.alpha).chain([self.final_alpha]).collect();
        let lengths: Vec<u64> = self.steps.iter().map(|s| s.n).chain([self.final_n]).collect();
        densities.windows(2).all(|w| w[1] > w[0]) && lengths.windows(2).all(|w| w[1] < w[0])
    }
}

/// Iterate [`find_increment`] and [`rescale`] until one of the exits fires.
pub fn run_increment_loop(a: &[u64], n: u64, cfg: &IncrementConfig) -> Result<IncrementTrace> {
    cfg.validate()?;
    let mut cur = sorted_members(a, n)?;
    let mut cur_n = n;
    // original = offset + scale·local
    let (mut offset, mut scale) = (0i64, 1i64);
    let alpha0 = if n == 0 { 0.0 } else { cur.len() as f64 / n as f64 };
    let budget = cfg.step_budget(alpha0);
    let mut steps = Vec::new();
    let mut witness = None;
    let mut certificate = None;

    let exit = loop {
        if let Some(w) = find_three_ap(&cur) {
            let original = w.map(|x| offset + scale * x as i64);
            witness = Some(Witness { local: w, original });
            break ExitReason::Found3ap;
        }
        if cur_n < cfg.min_length {
            break ExitReason::LengthFloor;
        }
        let alpha = cur.len() as f64 / cur_n as f64;
        if alpha <= (cur_n as f64).powf(-cfg.density_floor_exponent) {
            break ExitReason::SmallDensity;
        }
        if steps.len() as u64 >= budget {
            break ExitReason::StepBudget;
        }
        match find_increment(&cur, cur_n, cfg)? {
            StepOutcome::Certificate(c) => {
                certificate = Some(c);
                break ExitReason::NoIncrement;
            }
            StepOutcome::Increment(inc) => {
                let p = inc.progression;
                cur = rescale(&cur, cur_n, &p)?;
                cur_n = p.length;
                offset += scale * p.a;
                scale *= p.q as i64;
                steps.push(inc);
            }
        }
    };

    Ok(IncrementTrace {
        schema: TRACE_SCHEMA.to_string(),
        config: *cfg,
        initial_n: n,
        initial_alpha: alpha0,
        step_budget: budget,
        steps,
        final_n: cur_n,
        final_size: cur.len() as u64,
        final_alpha: if cur_n == 0 { 0.0 } else { cur.len() as f64 / cur_n as f64 },
        final_exit: exit,
        witness,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::behrend_set;

    #[test]
    fn rescale_examples() {
        let p = Progression::new(1, 1, 6).unwrap();
        assert_eq!(rescale(&[2, 4, 6], 7, &p).unwrap(), vec![1, 3, 5]);
        let p = Progression::new(1, 2, 5).unwrap();
        assert_eq!(rescale(&[3, 5, 7], 11, &p).unwrap(), vec![1, 2, 3]);
        let p = Progression::new(5, 2, 5).unwrap();
        assert_eq!(rescale(&[3], 11, &p), Err(Error::ProgressionOutOfRange { n: 11 }));
    }

    #[test]
    fn convergents_of_a_rational() {
        assert_eq!(convergents(13, 8), vec![(1, 1), (2, 1), (3, 2), (5, 3), (13, 8)]);
        let (q, drift) = dirichlet_step(2000, 4001, 31);
        assert!(q <= 31);
        assert!(drift < 1.0 / 31f64.sqrt());
    }

    #[test]
    fn preconditions() {
        let full: Vec<u64> = (1..=20).collect();
        assert_eq!(find_increment(&full, 20, &IncrementConfig::default()).unwrap_err(), Error::ContainsProgression([1, 2, 3]));
        let odds: Vec<u64> = (1..=100).filter(|x| x % 2 == 1).collect();
        assert_eq!(find_increment(&odds, 100, &IncrementConfig::default()).unwrap_err(), Error::ContainsProgression([1, 3, 5]));
        assert!(matches!(find_increment(&[1], 4, &IncrementConfig::default()), Err(Error::BelowLengthFloor { .. })));
    }

    #[test]
    fn behrend_1000_step() {
        let b = behrend_set(1000).unwrap();
        let cfg = IncrementConfig::default();
        let StepOutcome::Increment(inc) = find_increment(&b.elements, 1000, &cfg).unwrap() else {
            panic!("expected an increment");
        };
        let recount = inc.progression.elements().filter(|x| b.elements.contains(&(*x as u64))).count() as u64;
        assert_eq!(recount, inc.hits);
        assert!(inc.hits as f64 / inc.progression.length as f64 >= inc.alpha + cfg.increment_constant * inc.alpha.powi(2));
        assert!(inc.phase_variation <= cfg.phase_budget + 1e-12);
        assert!(inc.progression.within(1000));
    }

    #[test]
    fn loop_exits() {
        let t = run_increment_loop(&[1], 1, &IncrementConfig::default()).unwrap();
        assert_eq!(t.final_exit, ExitReason::LengthFloor);
        let t = run_increment_loop(&[5, 17, 29, 60], 64, &IncrementConfig::default()).unwrap();
        assert_eq!(t.final_exit, ExitReason::Found3ap);
        assert_eq!(t.witness.unwrap().original, [5, 17, 29]);
    }

    #[test]
    fn config_json_defaults() {
        let cfg: IncrementConfig = serde_json::from_str(r#"{"min_length": 16}"#).unwrap();
        assert_eq!(cfg.min_length, 16);
        assert_eq!(cfg.increment_constant, 0.125);
        assert!(IncrementConfig { c_len: 0.0, ..cfg }.validate().is_err());
    }
}
