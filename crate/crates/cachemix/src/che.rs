//! Fixed-point solver for the characteristic time of an LRU cache.
//!
//! Per-object hit rates are modeled as `h(n) = 1 - exp(-q(n) T_C)` where the
//! characteristic time `T_C` is the root of the occupancy equation
//! `C = sum_i sum_n (1 - exp(-q_i(n) T_C)) theta_i`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::numeric::{euler_maclaurin_sum, occupancy_prob, solve_increasing, KahanSum};
use crate::traffic::{PopularityLaw, TrafficMix};

/// Ranks summed exactly before the Euler-Maclaurin tail takes over.
pub(crate) const EXP_HEAD: u64 = 10_000;
/// Relative tolerance of tail quadrature.
pub(crate) const QUAD_REL_TOL: f64 = 1e-11;
/// Required relative residual of the solved fixed point.
pub const RESIDUAL_REL_TOL: f64 = 1e-8;
/// Population guard for materialized (non-Zipf) rate tables.
pub(crate) const TABLE_GUARD: u64 = 10_000_000;
/// Sizes within this relative distance of the full catalog count as fully
/// cacheable; the occupancy equation has no finite root at the boundary.
const FULL_CACHE_REL: f64 = 1e-12;

/// Request rate as a function of (parent) rank.
#[derive(Debug, Clone)]
pub(crate) enum RankRate {
    Zipf { rate: f64, alpha: f64 },
    Table(Arc<Vec<f64>>),
}

impl RankRate {
    pub fn at(&self, rank: u64) -> f64 {
        match self {
            Self::Zipf { rate, alpha } => rate * (rank as f64).powf(-alpha),
            Self::Table(t) => t[rank as usize - 1],
        }
    }

    /// Continuous extension, used by the tail integrals (Zipf only; tables
    /// are always summed exactly).
    fn at_continuous(&self, x: f64) -> f64 {
        match self {
            Self::Zipf { rate, alpha } => rate * x.powf(-alpha),
            Self::Table(_) => unreachable!("tables have no tail"),
        }
    }

    /// d rate / d rank of the continuous extension.
    fn slope(&self, x: f64) -> f64 {
        match self {
            Self::Zipf { rate, alpha } => -alpha * rate * x.powf(-alpha - 1.0),
            Self::Table(_) => unreachable!("tables have no tail"),
        }
    }
}

/// One type of a solvable catalog.
#[derive(Debug, Clone)]
pub(crate) struct CatalogType {
    pub name: String,
    /// Bytes per cached unit (1.0 for homogeneous object-counted catalogs).
    pub unit_size: f64,
    /// Parent ranks carrying distinct rates.
    pub parents: u64,
    /// Cached units per parent rank (chunks; 1 when unchunked).
    pub multiplicity: u64,
    pub rate: RankRate,
}

impl CatalogType {
    /// Catalog volume of this type, in cache-size units.
    pub fn size(&self) -> f64 {
        self.unit_size * self.multiplicity as f64 * self.parents as f64
    }

    /// `multiplicity * sum_{n=1..parents} f(rate(n))` with an exact head and
    /// an Euler-Maclaurin tail. `df_dq` is df/dq, needed for the tail's
    /// derivative correction.
    pub fn rank_sum(&self, f: &dyn Fn(f64) -> f64, df_dq: &dyn Fn(f64) -> f64) -> f64 {
        let head = match self.rate {
            RankRate::Zipf { .. } => self.parents.min(EXP_HEAD),
            RankRate::Table(_) => self.parents,
        };
        let mut sum = KahanSum::new();
        for n in 1..=head {
            sum.add(f(self.rate.at(n)));
        }
        if self.parents > head {
            let g = |x: f64| f(self.rate.at_continuous(x));
            let dg = |x: f64| df_dq(self.rate.at_continuous(x)) * self.rate.slope(x);
            sum.add(euler_maclaurin_sum(
                &g,
                &dg,
                head + 1,
                self.parents,
                QUAD_REL_TOL,
            ));
        }
        sum.value() * self.multiplicity as f64
    }
}

/// A catalog the Che fixed point can be solved against: either a homogeneous
/// popularity law (cache sizes in objects) or a traffic mix (sizes in bytes).
#[derive(Debug, Clone)]
pub struct Catalog {
    pub(crate) types: Vec<CatalogType>,
}

impl Catalog {
    /// Homogeneous catalog with normalized request rates `q(n) = w(n)/W`.
    /// Cache sizes are counted in objects.
    pub fn homogeneous(law: &PopularityLaw) -> Result<Self> {
        let n = law.population();
        let total = law.total_weight();
        let rate = match law {
            PopularityLaw::Zipf { alpha, .. } => RankRate::Zipf {
                rate: 1.0 / total,
                alpha: *alpha,
            },
            PopularityLaw::Geometric { .. } | PopularityLaw::Explicit(_) => {
                if n > TABLE_GUARD {
                    return Err(Error::PopulationGuard {
                        population: n,
                        guard: TABLE_GUARD,
                        context: "non-Zipf analytic catalogs",
                    });
                }
                let table: Vec<f64> = (1..=n).map(|k| law.weight(k) / total).collect();
                RankRate::Table(Arc::new(table))
            }
        };
        Ok(Self {
            types: vec![CatalogType {
                name: "all".into(),
                unit_size: 1.0,
                parents: n,
                multiplicity: 1,
                rate,
            }],
        })
    }

    /// Mixed-content catalog; cache sizes are counted in bytes.
    pub fn from_mix(mix: &TrafficMix) -> Self {
        let types = mix
            .entries
            .iter()
            .map(|e| CatalogType {
                name: e.name.clone(),
                unit_size: e.unit_size(),
                parents: e.parents,
                multiplicity: e.chunks,
                rate: RankRate::Zipf {
                    rate: e.rate,
                    alpha: e.alpha,
                },
            })
            .collect();
        Self { types }
    }

    /// Restriction to a subset of type indices (layer-1 dedication).
    pub(crate) fn restrict(&self, indices: &[usize]) -> Self {
        Self {
            types: indices.iter().map(|&i| self.types[i].clone()).collect(),
        }
    }

    pub fn type_count(&self) -> usize {
        self.types.len()
    }

    pub fn type_names(&self) -> Vec<&str> {
        self.types.iter().map(|t| t.name.as_str()).collect()
    }

    /// Total catalog volume (objects or bytes, per the catalog's units).
    pub fn total_size(&self) -> f64 {
        self.types.iter().map(|t| t.size()).sum()
    }

    /// Total request weight `sum_i sum_n q_i(n) theta_i` (the byte request
    /// rate for mixes, 1 for homogeneous catalogs up to rounding).
    pub fn total_byte_rate(&self) -> f64 {
        self.types
            .iter()
            .map(|ty| {
                let th = ty.unit_size;
                ty.rank_sum(&|q| th * q, &|_| th)
            })
            .sum()
    }

    pub(crate) fn rate_at(&self, type_index: usize, rank: u64) -> Result<f64> {
        let ty = self
            .types
            .get(type_index)
            .ok_or(Error::TypeOutOfRange(type_index))?;
        let units = ty.parents * ty.multiplicity;
        if rank == 0 || rank > units {
            return Err(Error::RankOutOfRange {
                type_index,
                rank,
                population: units,
            });
        }
        Ok(ty.rate.at(rank.div_ceil(ty.multiplicity)))
    }
}

/// Expected number of cached units (bytes for mixes) after the cache has been
/// observed for time `t`: the right-hand side of the occupancy equation.
/// Strictly increasing in `t`, tending to the total catalog size.
pub fn expected_occupancy(catalog: &Catalog, t: f64) -> f64 {
    catalog
        .types
        .iter()
        .map(|ty| {
            let th = ty.unit_size;
            ty.rank_sum(&|q| th * occupancy_prob(q, t), &|q| th * occupancy_slope(q, t))
        })
        .sum()
}

/// d/dq of `1 - exp(-q t)`.
pub(crate) fn occupancy_slope(q: f64, t: f64) -> f64 {
    if t.is_infinite() {
        0.0
    } else {
        t * (-q * t).exp()
    }
}

/// A solved Che fixed point. `t_c` is `f64::INFINITY` when the cache holds
/// the entire catalog.
#[derive(Debug, Clone)]
pub struct CheSolution<'a> {
    catalog: &'a Catalog,
    pub t_c: f64,
    pub cache_size: f64,
    /// occupancy(t_c) - cache_size (0 for the fully cacheable boundary).
    pub residual: f64,
}

/// Solves the occupancy equation for the characteristic time at cache size
/// `c` by geometric bracket expansion and bisection.
pub fn solve_tc(catalog: &Catalog, c: f64) -> Result<CheSolution<'_>> {
    if !(c > 0.0) {
        return Err(Error::NonPositiveCacheSize(c));
    }
    let total = catalog.total_size();
    if c >= total * (1.0 - FULL_CACHE_REL) {
        return Ok(CheSolution {
            catalog,
            t_c: f64::INFINITY,
            cache_size: c,
            residual: 0.0,
        });
    }
    let f = |t: f64| expected_occupancy(catalog, t);
    let sol = solve_increasing(&f, c, c, RESIDUAL_REL_TOL, 200);
    Ok(CheSolution {
        catalog,
        t_c: sol.root,
        cache_size: c,
        residual: sol.residual,
    })
}

impl<'a> CheSolution<'a> {
    pub fn catalog(&self) -> &'a Catalog {
        self.catalog
    }

    pub fn is_fully_cacheable(&self) -> bool {
        self.t_c.is_infinite()
    }

    /// `1 - exp(-q_i(rank) T_C)`, non-increasing in rank.
    pub fn object_hit_rate(&self, type_index: usize, rank: u64) -> Result<f64> {
        let q = self.catalog.rate_at(type_index, rank)?;
        Ok(occupancy_prob(q, self.t_c))
    }

    /// Fraction of requested traffic volume served by the cache:
    /// `sum_i sum_n q_i(n) h_i(n) theta_i / sum_i sum_n q_i(n) theta_i`.
    pub fn overall_byte_hit(&self) -> f64 {
        let t = self.t_c;
        let num: f64 = self
            .catalog
            .types
            .iter()
            .map(|ty| {
                let th = ty.unit_size;
                ty.rank_sum(
                    &|q| th * q * occupancy_prob(q, t),
                    &|q| th * (occupancy_prob(q, t) + q * occupancy_slope(q, t)),
                )
            })
            .sum();
        num / self.catalog.total_byte_rate()
    }

    /// Fraction of requests (not bytes) served by the cache. Differs from
    /// [`Self::overall_byte_hit`] whenever object sizes differ across types;
    /// the two are deliberately kept as separately named outputs.
    pub fn overall_request_hit(&self) -> f64 {
        let t = self.t_c;
        let mut num = 0.0;
        let mut den = 0.0;
        for ty in &self.catalog.types {
            num += ty.rank_sum(
                &|q| q * occupancy_prob(q, t),
                &|q| occupancy_prob(q, t) + q * occupancy_slope(q, t),
            );
            den += ty.rank_sum(&|q| q, &|_| 1.0);
        }
        num / den
    }

    /// Request hit rate of one type: `sum_n q_i(n) h_i(n) / sum_n q_i(n)`.
    pub fn per_type_hit(&self, type_index: usize) -> Result<f64> {
        let ty = self
            .catalog
            .types
            .get(type_index)
            .ok_or(Error::TypeOutOfRange(type_index))?;
        let t = self.t_c;
        let num = ty.rank_sum(
            &|q| q * occupancy_prob(q, t),
            &|q| occupancy_prob(q, t) + q * occupancy_slope(q, t),
        );
        let den = ty.rank_sum(&|q| q, &|_| 1.0);
        Ok(num / den)
    }

    /// Fraction of the cache occupied by each type:
    /// `theta_i sum_n h_i(n) / C`. Sums to 1 by the occupancy equation.
    pub fn cache_shares(&self) -> Vec<f64> {
        let t = self.t_c;
        self.catalog
            .types
            .iter()
            .map(|ty| {
                let th = ty.unit_size;
                let occ = ty.rank_sum(
                    &|q| th * occupancy_prob(q, t),
                    &|q| th * occupancy_slope(q, t),
                );
                occ / self.cache_size
            })
            .collect()
    }
}
