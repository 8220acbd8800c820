//! Hit rates under ideal LFU replacement: the cache statically holds the
//! most popular objects, which maximizes the hit rate under the independent
//! reference model and serves as the benchmark for LRU.

use std::io::Write;

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::traffic::{harmonic_sum, PopularityLaw, TrafficMix};

/// A monotone (cache size, hit rate) curve. Sizes are objects for
/// homogeneous laws and bytes for mixes.
#[derive(Debug, Clone, PartialEq)]
pub struct HitCurve {
    points: Vec<(f64, f64)>,
}

impl HitCurve {
    /// Validates monotonicity: sizes strictly increasing, hit rates
    /// non-decreasing within [0, 1].
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let mut prev_size = f64::NEG_INFINITY;
        let mut prev_hit = 0.0;
        for &(size, hit) in &points {
            if size <= prev_size {
                return Err(Error::InvalidParameter(format!(
                    "curve sizes must be strictly increasing at {size}"
                )));
            }
            if !(0.0..=1.0 + 1e-12).contains(&hit) || hit < prev_hit - 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "hit rates must be non-decreasing within [0,1], got {hit}"
                )));
            }
            prev_size = size;
            prev_hit = hit;
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "cache_size,hit_rate")?;
        for (size, hit) in &self.points {
            writeln!(w, "{size},{hit}")?;
        }
        Ok(())
    }
}

/// LFU hit rate of a homogeneous catalog with a cache of `c` objects:
/// `sum_{n<=C} q(n) / sum_{n<=N} q(n)`, with `c` clamped at the population.
pub fn hit_homogeneous(law: &PopularityLaw, c: u64) -> f64 {
    if c == 0 {
        return 0.0;
    }
    law.prefix_weight(c) / law.total_weight()
}

/// Number of type-i objects with request rate above threshold `x`:
/// `gamma_i(x) = min(N_i, floor((r_i/x)^(1/alpha_i)))`.
fn gamma(rate: f64, alpha: f64, parents: u64, x: f64) -> u64 {
    if x > rate {
        return 0;
    }
    let g = (rate / x).powf(1.0 / alpha);
    if g >= parents as f64 {
        parents
    } else {
        g.floor() as u64
    }
}

/// Cache size needed to hold every object with rate above `x`, in bytes.
fn size_at(mix: &TrafficMix, x: f64) -> f64 {
    mix.entries
        .iter()
        .map(|e| e.parent_size * gamma(e.rate, e.alpha, e.parents, x) as f64)
        .sum()
}

/// Byte hit rate of the size_at(x) cache: `sum_i sum_{n<=gamma_i} q_i(n) theta_i`.
fn hit_at(mix: &TrafficMix, x: f64) -> f64 {
    let mut sum = KahanSum::new();
    for e in &mix.entries {
        let g = gamma(e.rate, e.alpha, e.parents, x);
        if g >= 1 {
            sum.add(e.rate * e.parent_size * harmonic_sum(e.alpha, g));
        }
    }
    sum.value() / mix.byte_request_rate()
}

/// Parametric LFU curve of a mix: one (size, hit) point per rate threshold.
/// Thresholds must be positive and sorted descending.
pub fn curve_mix(mix: &TrafficMix, rate_thresholds: &[f64]) -> Result<HitCurve> {
    if rate_thresholds.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::InvalidParameter(
            "rate thresholds must be positive".into(),
        ));
    }
    if rate_thresholds.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidParameter(
            "rate thresholds must be sorted descending".into(),
        ));
    }
    let mut points = Vec::with_capacity(rate_thresholds.len());
    let mut last_size = f64::NEG_INFINITY;
    for &x in rate_thresholds {
        let size = size_at(mix, x);
        let hit = hit_at(mix, x);
        // distinct thresholds can fall between consecutive object rates
        if size > last_size {
            points.push((size, hit));
            last_size = size;
        }
    }
    HitCurve::new(points)
}

/// LFU byte hit rate of a mix at a byte budget `c`: the best rate threshold
/// whose stored set fits in `c`, found by bisection on the monotone
/// size-threshold relation.
pub fn hit_mix_at_size(mix: &TrafficMix, c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    if c >= mix.total_bytes() {
        return 1.0;
    }
    let mut hi = mix
        .entries
        .iter()
        .map(|e| e.rate)
        .fold(f64::MIN_POSITIVE, f64::max)
        * 2.0;
    let mut lo = mix
        .entries
        .iter()
        .map(|e| e.rate * (e.parents as f64).powf(-e.alpha))
        .fold(f64::MAX, f64::min)
        * 0.5;
    // size_at is non-increasing in x; keep size_at(hi) <= c < size_at(lo)
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if size_at(mix, mid) <= c {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hit_at(mix, hi)
}
