//! Poisson model of cluster sizes.
//!
//! For a genome position whose shortest unique right context has length `k`,
//! the number of its read-copies landing in the position's eBWT cluster is
//! Poisson with mean `λ = t·m·(r−k)/n·(1−ε)^k`, where `m` reads of mean
//! length `r` are sampled from a genome of length `n` with per-base error
//! rate `ε`, and `t` is the multiplicity of the context. The per-position
//! coverage has mean `λ' = m·r/n`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoissonModel {
    /// Number of reads sampled per strand (`m`).
    pub reads: f64,
    /// Genome length (`n`).
    pub genome_len: f64,
    /// Mean read length (`r`).
    pub read_len: f64,
    /// Per-base substitution probability (`ε`).
    pub epsilon: f64,
    /// Context length (`k`).
    pub context_len: u32,
    /// Multiplicity of the cluster (`t`); 1 for non-ambiguous clusters.
    pub multiplicity: u32,
}

impl PoissonModel {
    pub fn new(reads: f64, genome_len: f64, read_len: f64, epsilon: f64, context_len: u32) -> Result<Self> {
        let model = PoissonModel {
            reads,
            genome_len,
            read_len,
            epsilon,
            context_len,
            multiplicity: 1,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn with_multiplicity(mut self, t: u32) -> Result<Self> {
        self.multiplicity = t;
        self.validate()?;
        Ok(self)
    }

    pub fn with_context_len(mut self, k: u32) -> Result<Self> {
        self.context_len = k;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.reads > 0.0 && self.genome_len > 0.0 && self.read_len > 0.0) {
            return Err(Error::domain("m, n and r must be positive"));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(Error::domain(format!("epsilon {} outside [0, 1)", self.epsilon)));
        }
        if self.context_len == 0 || f64::from(self.context_len) >= self.read_len {
            return Err(Error::domain(format!(
                "context length {} must satisfy 0 < k < r = {}",
                self.context_len, self.read_len
            )));
        }
        if self.multiplicity == 0 {
            return Err(Error::domain("multiplicity must be positive"));
        }
        Ok(())
    }

    /// Expected cluster size `t·λ`.
    pub fn lambda(&self) -> f64 {
        let k = f64::from(self.context_len);
        f64::from(self.multiplicity)
            * self.reads
            * ((self.read_len - k) / self.genome_len)
            * (k * (-self.epsilon).ln_1p()).exp()
    }

    /// Expected per-position coverage `λ' = m·r/n`.
    pub fn coverage(&self) -> f64 {
        self.reads * self.read_len / self.genome_len
    }
}

/// `ln(n!)`, exact summation for small `n`, Stirling series beyond.
fn ln_factorial(n: u64) -> f64 {
    if n < 64 {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        let x = n as f64;
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        x * x.ln() - x
            + 0.5 * (2.0 * std::f64::consts::PI * x).ln()
            + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0))
    }
}

pub fn poisson_ln_pmf(mu: f64, i: u64) -> f64 {
    if mu == 0.0 {
        return if i == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    i as f64 * mu.ln() - mu - ln_factorial(i)
}

pub fn poisson_pmf(mu: f64, i: u64) -> f64 {
    poisson_ln_pmf(mu, i).exp()
}

/// Neumaier-compensated running sum.
#[derive(Default)]
struct Sum {
    s: f64,
    c: f64,
}

impl Sum {
    fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }

    fn value(&self) -> f64 {
        self.s + self.c
    }
}

// Below this mean the term recurrence can start from exp(-mu) without
// underflow.
const DIRECT_LIMIT: f64 = 700.0;

/// `P(X ≤ z)` for `X ~ Poisson(mu)`.
pub fn poisson_cdf(mu: f64, z: u64) -> f64 {
    if mu <= 0.0 {
        return 1.0;
    }
    let mut sum = Sum::default();
    if mu < DIRECT_LIMIT {
        let mut term = (-mu).exp();
        sum.add(term);
        for i in 1..=z {
            term *= mu / i as f64;
            sum.add(term);
            if i as f64 > mu && term < sum.value() * 1e-18 {
                break;
            }
        }
    } else {
        for i in 0..=z {
            let term = poisson_pmf(mu, i);
            sum.add(term);
            if i as f64 > mu && term < sum.value() * 1e-18 {
                break;
            }
        }
    }
    sum.value().clamp(0.0, 1.0)
}

/// `P(X > z)`, summed over the upper tail directly.
pub fn poisson_sf(mu: f64, z: u64) -> f64 {
    if mu <= 0.0 {
        return 0.0;
    }
    if (z as f64) < mu {
        return (1.0 - poisson_cdf(mu, z)).clamp(0.0, 1.0);
    }
    let mut sum = Sum::default();
    let mut i = z + 1;
    let mut term = poisson_pmf(mu, i);
    while term > 0.0 {
        sum.add(term);
        if term < sum.value() * 1e-18 {
            break;
        }
        i += 1;
        term *= mu / i as f64;
    }
    sum.value().clamp(0.0, 1.0)
}

/// Acceptance band for cluster sizes; sizes outside `[lo, hi]` fall in a tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Band {
    pub lo: u64,
    pub hi: u64,
}

impl Band {
    pub fn contains(&self, size: u64) -> bool {
        (self.lo..=self.hi).contains(&size)
    }
}

/// Tightest `[lo, hi]` whose two tails under `Poisson(t·λ)` each carry at
/// most `alpha / 2`: `lo` is the largest value with `P(X < lo) ≤ alpha/2`
/// and `hi` the smallest with `P(X > hi) ≤ alpha/2`.
pub fn cluster_length_band(model: &PoissonModel, alpha: f64) -> Result<Band> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha {alpha} outside (0, 1)")));
    }
    Ok(band_for_mean(model.lambda(), alpha))
}

pub fn band_for_mean(mu: f64, alpha: f64) -> Band {
    let half = alpha / 2.0;
    let mut lo = 0;
    while poisson_cdf(mu, lo) <= half {
        lo += 1;
    }
    // P(X > hi) is non-increasing in hi; start the search at lo.
    let mut hi = lo;
    while poisson_sf(mu, hi) > half {
        hi += 1;
    }
    Band { lo, hi }
}

const ERROR_PATTERN_WEIGHTS: [f64; 4] = [1.0, 1.0, 2.0 / 3.0, 2.0 / 9.0];

/// Lower bound on the probability that distinct suffixes of a cluster never
/// share both the offset and the letter of their leftmost sequencing error,
/// for a given slack `delta` on the cluster size.
pub fn condition2_lower_bound(model: &PoissonModel, delta: u64) -> f64 {
    let mean = model.lambda();
    let y = mean.ceil() as u64 + delta;
    let eps = model.epsilon;
    let mut inner = Sum::default();
    for (e, &w) in ERROR_PATTERN_WEIGHTS.iter().enumerate() {
        let e = e as u64;
        if e > y {
            break;
        }
        if eps == 0.0 {
            if e == 0 {
                inner.add(w);
            }
            continue;
        }
        let ln_choose = ln_factorial(y) - ln_factorial(e) - ln_factorial(y - e);
        let ln_term = ln_choose + (y - e) as f64 * (-eps).ln_1p() + e as f64 * eps.ln();
        inner.add(w * ln_term.exp());
    }
    let inner = inner.value().min(1.0);
    let exponent = model.read_len - f64::from(model.context_len);
    let bound = poisson_cdf(mean, y).ln() + exponent * inner.ln();
    bound.exp().clamp(0.0, 1.0)
}

/// Maximum of [`condition2_lower_bound`] over `delta ∈ [0, 3·⌈tλ⌉]`.
pub fn condition2_best_bound(model: &PoissonModel) -> (u64, f64) {
    let max_delta = 3 * model.lambda().ceil().max(1.0) as u64;
    (0..=max_delta)
        .map(|d| (d, condition2_lower_bound(model, d)))
        .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best })
}

/// One line of the parameter table printed by the `stats` command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatsRow {
    pub k: u32,
    pub lambda: f64,
    pub coverage: f64,
    pub band: Band,
    pub best_delta: u64,
    pub condition2_bound: f64,
}

pub fn stats_table(base: &PoissonModel, ks: impl IntoIterator<Item = u32>, alpha: f64) -> Result<Vec<StatsRow>> {
    ks.into_iter()
        .map(|k| {
            let model = base.with_context_len(k)?;
            let (best_delta, condition2_bound) = condition2_best_bound(&model);
            Ok(StatsRow {
                k,
                lambda: model.lambda(),
                coverage: model.coverage(),
                band: cluster_length_band(&model, alpha)?,
                best_delta,
                condition2_bound,
            })
        })
        .collect()
}
