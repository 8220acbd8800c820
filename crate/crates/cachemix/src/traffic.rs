//! Popularity laws and the multi-type content catalog.
//!
//! A [`TrafficMix`] turns per-type traffic shares into per-object request
//! rates `q_i(n) = r_i / n^alpha_i`, normalized so the total byte request
//! rate is one: `sum_i sum_n q_i(n) theta_i = 1`.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Shares must sum to one within this tolerance.
pub const SHARE_SUM_TOL: f64 = 1e-9;
/// Relative tolerance on the byte-rate normalization of a mix.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Ranks summed term by term before switching to the Euler-Maclaurin tail.
pub const HARMONIC_HEAD: u64 = 10_000_000;

/// Ranked request-probability family. `weight(n)` is proportional to the
/// request rate of the rank-n object; weights are positive and non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub enum PopularityLaw {
    /// weight(n) = n^-alpha
    Zipf { alpha: f64, population: u64 },
    /// weight(n) = ratio^n, ratio in (0, 1)
    Geometric { ratio: f64, population: u64 },
    /// Arbitrary positive weights, sorted non-increasing on construction.
    Explicit(Vec<f64>),
}

impl PopularityLaw {
    pub fn zipf(alpha: f64, population: u64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "Zipf exponent must be positive, got {alpha}"
            )));
        }
        if population == 0 {
            return Err(Error::InvalidParameter("population must be >= 1".into()));
        }
        Ok(Self::Zipf { alpha, population })
    }

    pub fn geometric(ratio: f64, population: u64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "geometric ratio must lie in (0,1), got {ratio}"
            )));
        }
        if population == 0 {
            return Err(Error::InvalidParameter("population must be >= 1".into()));
        }
        Ok(Self::Geometric { ratio, population })
    }

    /// Canonically sorts the weights (non-increasing) and validates them.
    pub fn explicit(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter("weights must be non-empty".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidParameter(
                "explicit weights must be finite and positive".into(),
            ));
        }
        weights.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(Self::Explicit(weights))
    }

    /// Equal weight on every rank.
    pub fn uniform(population: u64) -> Result<Self> {
        if population == 0 {
            return Err(Error::InvalidParameter("population must be >= 1".into()));
        }
        Self::explicit(vec![1.0; population as usize])
    }

    pub fn population(&self) -> u64 {
        match self {
            Self::Zipf { population, .. } | Self::Geometric { population, .. } => *population,
            Self::Explicit(w) => w.len() as u64,
        }
    }

    /// Unnormalized weight of the rank-n object, 1-based.
    pub fn weight(&self, rank: u64) -> f64 {
        debug_assert!(rank >= 1 && rank <= self.population());
        match self {
            Self::Zipf { alpha, .. } => (rank as f64).powf(-alpha),
            Self::Geometric { ratio, .. } => ratio.powi(rank as i32),
            Self::Explicit(w) => w[rank as usize - 1],
        }
    }

    /// Sum of weights over all ranks.
    pub fn total_weight(&self) -> f64 {
        match self {
            Self::Zipf { alpha, population } => harmonic_sum(*alpha, *population),
            Self::Geometric { ratio, population } => {
                // ratio (1 - ratio^N) / (1 - ratio)
                ratio * (1.0 - ratio.powi(*population as i32)) / (1.0 - ratio)
            }
            Self::Explicit(w) => {
                let mut k = KahanSum::new();
                for x in w {
                    k.add(*x);
                }
                k.value()
            }
        }
    }

    /// Sum of weights over ranks 1..=prefix (prefix clamped at N).
    pub fn prefix_weight(&self, prefix: u64) -> f64 {
        let prefix = prefix.min(self.population());
        if prefix == 0 {
            return 0.0;
        }
        match self {
            Self::Zipf { alpha, .. } => harmonic_sum(*alpha, prefix),
            Self::Geometric { ratio, .. } => {
                ratio * (1.0 - ratio.powi(prefix as i32)) / (1.0 - ratio)
            }
            Self::Explicit(w) => {
                let mut k = KahanSum::new();
                for x in &w[..prefix as usize] {
                    k.add(*x);
                }
                k.value()
            }
        }
    }
}

/// Generalized harmonic number `sum_{n=1..N} n^-alpha`.
///
/// Exact term-by-term summation up to [`HARMONIC_HEAD`] ranks; beyond that,
/// the tail is the closed-form integral with second-order Euler-Maclaurin
/// corrections, accurate to well under 1e-9 relative.
pub fn harmonic_sum(alpha: f64, n: u64) -> f64 {
    harmonic_sum_with_head(alpha, n, HARMONIC_HEAD)
}

/// [`harmonic_sum`] with a configurable head/tail split, used by tests to
/// validate the tail against exact summation.
pub fn harmonic_sum_with_head(alpha: f64, n: u64, head: u64) -> f64 {
    assert!(alpha > 0.0, "alpha must be positive");
    assert!(n >= 1, "N must be >= 1");
    assert!(head >= 1, "head must be >= 1");
    let h = n.min(head);
    let mut sum = KahanSum::new();
    for k in 1..=h {
        sum.add((k as f64).powf(-alpha));
    }
    if n > h {
        sum.add(power_tail(alpha, h + 1, n));
    }
    sum.value()
}

/// `sum_{n=lo..=hi} n^-alpha` for an arbitrary rank range.
pub fn harmonic_range(alpha: f64, lo: u64, hi: u64) -> f64 {
    assert!(alpha > 0.0 && lo >= 1);
    if lo > hi {
        return 0.0;
    }
    if hi <= HARMONIC_HEAD {
        let mut sum = KahanSum::new();
        for k in lo..=hi {
            sum.add((k as f64).powf(-alpha));
        }
        return sum.value();
    }
    if lo > HARMONIC_HEAD {
        return power_tail(alpha, lo, hi);
    }
    harmonic_range(alpha, lo, HARMONIC_HEAD) + power_tail(alpha, HARMONIC_HEAD + 1, hi)
}

/// Euler-Maclaurin sum of n^-alpha over a..=b with the closed-form integral.
fn power_tail(alpha: f64, a: u64, b: u64) -> f64 {
    let (af, bf) = (a as f64, b as f64);
    let integral = if (alpha - 1.0).abs() < 1e-12 {
        (bf / af).ln()
    } else {
        (bf.powf(1.0 - alpha) - af.powf(1.0 - alpha)) / (1.0 - alpha)
    };
    let f = |x: f64| x.powf(-alpha);
    let df = |x: f64| -alpha * x.powf(-alpha - 1.0);
    integral + 0.5 * (f(af) + f(bf)) + (df(bf) - df(af)) / 12.0
}

/// One traffic class of the mix: its share of total traffic, catalog size,
/// constant object size in bytes, and popularity law.
#[derive(Debug, Clone)]
pub struct ContentType {
    pub name: String,
    pub traffic_share: f64,
    pub population: u64,
    pub mean_object_size: f64,
    pub law: PopularityLaw,
}

impl ContentType {
    pub fn new(
        name: impl Into<String>,
        traffic_share: f64,
        population: u64,
        mean_object_size: f64,
        law: PopularityLaw,
    ) -> Result<Self> {
        let name = name.into();
        if !(traffic_share > 0.0 && traffic_share <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "traffic share of `{name}` must lie in (0,1], got {traffic_share}"
            )));
        }
        if population == 0 {
            return Err(Error::InvalidParameter(format!(
                "population of `{name}` must be >= 1"
            )));
        }
        if !(mean_object_size > 0.0) || !mean_object_size.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "object size of `{name}` must be positive, got {mean_object_size}"
            )));
        }
        if law.population() != population {
            return Err(Error::InvalidParameter(format!(
                "law population {} of `{name}` does not match type population {population}",
                law.population()
            )));
        }
        Ok(Self {
            name,
            traffic_share,
            population,
            mean_object_size,
            law,
        })
    }
}

/// One type inside a normalized mix. Chunked views keep the parent-object
/// rate structure and record how many equally popular chunks each parent
/// object was split into.
#[derive(Debug, Clone)]
pub(crate) struct MixEntry {
    pub name: String,
    pub share: f64,
    /// Parent-object population N_i.
    pub parents: u64,
    /// Bytes per parent object, theta_i.
    pub parent_size: f64,
    pub alpha: f64,
    /// Rate constant r_i = p_i / (theta_i H(alpha_i, N_i)).
    pub rate: f64,
    /// Chunks per parent object (1 when unchunked).
    pub chunks: u64,
}

impl MixEntry {
    /// Bytes per cached unit.
    pub fn unit_size(&self) -> f64 {
        self.parent_size / self.chunks as f64
    }

    /// Cached units in the catalog.
    pub fn population(&self) -> u64 {
        self.parents * self.chunks
    }
}

/// Normalized multi-type catalog. Only Zipf laws are supported inside a mix;
/// other laws are used in homogeneous (single-law) analyses only.
#[derive(Debug, Clone)]
pub struct TrafficMix {
    pub(crate) entries: Vec<MixEntry>,
}

impl TrafficMix {
    /// Builds the mix, deriving each rate constant from Little's formula.
    pub fn new(types: Vec<ContentType>) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::InvalidParameter("mix needs at least one type".into()));
        }
        let share_sum: f64 = types.iter().map(|t| t.traffic_share).sum();
        if (share_sum - 1.0).abs() > SHARE_SUM_TOL {
            return Err(Error::ShareSum {
                got: share_sum,
                tol: SHARE_SUM_TOL,
            });
        }
        let mut entries = Vec::with_capacity(types.len());
        for t in types {
            let alpha = match t.law {
                PopularityLaw::Zipf { alpha, .. } => alpha,
                _ => return Err(Error::NonZipfInMix(t.name)),
            };
            let rate =
                t.traffic_share / (t.mean_object_size * harmonic_sum(alpha, t.population));
            entries.push(MixEntry {
                name: t.name,
                share: t.traffic_share,
                parents: t.population,
                parent_size: t.mean_object_size,
                alpha,
                rate,
                chunks: 1,
            });
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn type_names(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.name.as_str()).collect()
    }

    pub fn type_index(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.name == name)
    }

    pub fn traffic_share(&self, type_index: usize) -> Result<f64> {
        self.entry(type_index).map(|e| e.share)
    }

    pub fn rate_constant(&self, type_index: usize) -> Result<f64> {
        self.entry(type_index).map(|e| e.rate)
    }

    pub fn population(&self, type_index: usize) -> Result<u64> {
        self.entry(type_index).map(|e| e.population())
    }

    /// Bytes per cached unit (the chunk size for chunked views).
    pub fn unit_size(&self, type_index: usize) -> Result<f64> {
        self.entry(type_index).map(|e| e.unit_size())
    }

    /// Total catalog volume in bytes.
    pub fn total_bytes(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.parent_size * e.parents as f64)
            .sum()
    }

    /// Request rate q_i(n) of the rank-n cached unit of type i.
    pub fn request_rate(&self, type_index: usize, rank: u64) -> Result<f64> {
        let e = self.entry(type_index)?;
        if rank == 0 || rank > e.population() {
            return Err(Error::RankOutOfRange {
                type_index,
                rank,
                population: e.population(),
            });
        }
        let parent_rank = rank.div_ceil(e.chunks);
        Ok(e.rate * (parent_rank as f64).powf(-e.alpha))
    }

    /// Splits every object into `chunk_size`-byte chunks that inherit the
    /// parent object's request rate. Total byte demand is unchanged.
    pub fn chunk_view(&self, chunk_size: f64) -> Result<TrafficMix> {
        if !(chunk_size > 0.0) || !chunk_size.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "chunk size must be positive, got {chunk_size}"
            )));
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            let unit = e.unit_size();
            let k = unit / chunk_size;
            let k_round = k.round();
            if k_round < 1.0 || (k - k_round).abs() > 1e-9 * k.max(1.0) {
                return Err(Error::ChunkSize {
                    name: e.name.clone(),
                    chunk: chunk_size,
                    object: unit,
                });
            }
            let mut chunked = e.clone();
            chunked.chunks = e.chunks * k_round as u64;
            entries.push(chunked);
        }
        Ok(TrafficMix { entries })
    }

    /// Total byte request rate `sum_i sum_n q_i(n) theta_i`, computed through
    /// the same head/tail machinery as everything else. Equals 1 within
    /// [`NORMALIZATION_TOL`] for any mix built by [`TrafficMix::new`].
    pub fn byte_request_rate(&self) -> f64 {
        let mut total = KahanSum::new();
        for e in &self.entries {
            // sum_n r n^-alpha * theta = r theta H(alpha, N), over parents
            total.add(e.rate * e.parent_size * harmonic_sum(e.alpha, e.parents));
        }
        total.value()
    }

    pub(crate) fn entry(&self, type_index: usize) -> Result<&MixEntry> {
        self.entries
            .get(type_index)
            .ok_or(Error::TypeOutOfRange(type_index))
    }
}
