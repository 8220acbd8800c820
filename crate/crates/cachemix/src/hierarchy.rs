//! Two-layer cache hierarchies.
//!
//! Layer 1 is a representative edge LRU cache; its misses feed a layer-2 LRU
//! cache. Layer-2 demand for an object with rate `q` is the thinned rate
//! `q' = q (1 - h1) = q exp(-q t1)`, and the fixed point is re-solved with
//! the thinned rates. Layers are treated as statistically independent, so
//! the combined hit rate of one object is `h1 + h2 - h1 h2`.

use crate::che::{occupancy_slope, solve_tc, Catalog, RESIDUAL_REL_TOL};
use crate::error::{Error, Result};
use crate::numeric::{occupancy_prob, solve_increasing};

const FULL_CACHE_REL: f64 = 1e-12;

/// Which content types a layer-1 cache admits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LayerPolicy {
    /// Layer 1 caches every type.
    Shared,
    /// Layer 1 caches only the named types; all other traffic bypasses it
    /// and is served directly by layer 2.
    Dedicated(Vec<String>),
}

/// Per-type hit rates of a two-layer evaluation. `layer2` is conditional on
/// a layer-1 miss, so `combined = layer1 + layer2 - layer1 * layer2`.
#[derive(Debug, Clone)]
pub struct TypeHits {
    pub name: String,
    pub layer1: f64,
    pub layer2: f64,
    pub combined: f64,
}

/// Result of composing two cache layers over one catalog.
#[derive(Debug, Clone)]
pub struct HierarchyResult {
    pub c1: f64,
    pub c2: f64,
    pub t1: f64,
    pub t2: f64,
    /// Fraction of requested traffic volume served by layer 1.
    pub layer1_reduction: f64,
    /// Fraction served by either layer.
    pub total_reduction: f64,
    pub per_type: Vec<TypeHits>,
}

/// `q exp(-q t1)`: the demand an object leaks past a layer with
/// characteristic time `t1`.
fn thinned(q: f64, t1: f64) -> f64 {
    if t1.is_infinite() {
        0.0
    } else {
        q * (-q * t1).exp()
    }
}

/// d/dq of [`thinned`].
fn thinned_slope(q: f64, t1: f64) -> f64 {
    if t1.is_infinite() {
        0.0
    } else {
        (-q * t1).exp() * (1.0 - q * t1)
    }
}

/// Probability that a request misses both layers.
fn miss_prob(q: f64, t1: f64, t2: f64) -> f64 {
    if t1.is_infinite() {
        return 0.0;
    }
    let qp = thinned(q, t1);
    if t2.is_infinite() {
        // everything with residual demand is eventually held by layer 2
        return if qp > 0.0 { 0.0 } else { (-q * t1).exp() };
    }
    (-(q * t1 + qp * t2)).exp()
}

/// d/dq of [`miss_prob`]. Zero at the infinite-time boundaries, where the
/// miss probability is constant in `q`.
fn miss_slope(q: f64, t1: f64, t2: f64) -> f64 {
    if t1.is_infinite() || t2.is_infinite() {
        return 0.0;
    }
    -miss_prob(q, t1, t2) * (t1 + t2 * thinned_slope(q, t1))
}

fn admitted_flags(catalog: &Catalog, policy: &LayerPolicy) -> Result<Vec<bool>> {
    match policy {
        LayerPolicy::Shared => Ok(vec![true; catalog.type_count()]),
        LayerPolicy::Dedicated(names) => {
            if names.is_empty() {
                return Err(Error::EmptyPolicy);
            }
            let known = catalog.type_names();
            let mut flags = vec![false; catalog.type_count()];
            for name in names {
                match known.iter().position(|k| k == name) {
                    Some(i) => flags[i] = true,
                    None => return Err(Error::UnknownPolicyType(name.clone())),
                }
            }
            Ok(flags)
        }
    }
}

/// Solves both layers and combines them.
///
/// A zero size means the layer is absent (`t = 0`, nothing cached). Types
/// not admitted by the policy bypass layer 1 and reach layer 2 unthinned.
pub fn evaluate_two_layer(
    catalog: &Catalog,
    c1: f64,
    c2: f64,
    policy: &LayerPolicy,
) -> Result<HierarchyResult> {
    if c1 < 0.0 {
        return Err(Error::NegativeCacheSize(c1));
    }
    if c2 < 0.0 {
        return Err(Error::NegativeCacheSize(c2));
    }
    let admitted = admitted_flags(catalog, policy)?;
    let indices: Vec<usize> = (0..catalog.type_count()).filter(|&i| admitted[i]).collect();

    let t1 = if c1 == 0.0 {
        0.0
    } else {
        let layer1 = catalog.restrict(&indices);
        solve_tc(&layer1, c1)?.t_c
    };

    // layer-2 occupancy under the thinned demand
    let t1_of = |i: usize| if admitted[i] { t1 } else { 0.0 };
    let occ2 = |t2: f64| -> f64 {
        catalog
            .types
            .iter()
            .enumerate()
            .map(|(i, ty)| {
                let te = t1_of(i);
                let th = ty.unit_size;
                ty.rank_sum(
                    &|q| th * occupancy_prob(thinned(q, te), t2),
                    &|q| th * occupancy_slope(thinned(q, te), t2) * thinned_slope(q, te),
                )
            })
            .sum()
    };
    // supremum of layer-2 occupancy: types with any residual demand
    let reachable2: f64 = catalog
        .types
        .iter()
        .enumerate()
        .filter(|(i, _)| !(admitted[*i] && t1.is_infinite()))
        .map(|(_, ty)| ty.size())
        .sum();
    let t2 = if c2 == 0.0 {
        0.0
    } else if c2 >= reachable2 * (1.0 - FULL_CACHE_REL) {
        f64::INFINITY
    } else {
        solve_increasing(&occ2, c2, c2, RESIDUAL_REL_TOL, 200).root
    };

    let byte_rate = catalog.total_byte_rate();
    let mut layer1_num = 0.0;
    let mut total_num = 0.0;
    let mut per_type = Vec::with_capacity(catalog.type_count());
    for (i, ty) in catalog.types.iter().enumerate() {
        let te = t1_of(i);
        let th = ty.unit_size;

        let den = ty.rank_sum(&|q| q, &|_| 1.0);
        let hit1 = ty.rank_sum(
            &|q| q * occupancy_prob(q, te),
            &|q| occupancy_prob(q, te) + q * occupancy_slope(q, te),
        );
        let served = ty.rank_sum(
            &|q| q * (1.0 - miss_prob(q, te, t2)),
            &|q| 1.0 - miss_prob(q, te, t2) - q * miss_slope(q, te, t2),
        );
        layer1_num += th * hit1;
        total_num += th * served;

        // conditional layer-2 hit over the thinned stream; the stream itself
        // can be empty (type fully held at layer 1)
        let leak = ty.rank_sum(&|q| thinned(q, te), &|q| thinned_slope(q, te));
        let hit2 = if leak > 0.0 {
            ty.rank_sum(
                &|q| {
                    let qp = thinned(q, te);
                    qp * occupancy_prob(qp, t2)
                },
                &|q| {
                    let qp = thinned(q, te);
                    (occupancy_prob(qp, t2) + qp * occupancy_slope(qp, t2))
                        * thinned_slope(q, te)
                },
            ) / leak
        } else {
            0.0
        };
        per_type.push(TypeHits {
            name: ty.name.clone(),
            layer1: hit1 / den,
            layer2: hit2,
            combined: served / den,
        });
    }

    Ok(HierarchyResult {
        c1,
        c2,
        t1,
        t2,
        layer1_reduction: layer1_num / byte_rate,
        total_reduction: total_num / byte_rate,
        per_type,
    })
}

/// Overall hit rates on a (c1, c2) grid under the shared policy. Grids must
/// be sorted ascending; the result is indexed `[c1_index][c2_index]`.
pub fn contour_grid(catalog: &Catalog, c1_grid: &[f64], c2_grid: &[f64]) -> Result<Vec<Vec<f64>>> {
    for grid in [c1_grid, c2_grid] {
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "contour grids must be sorted strictly ascending".into(),
            ));
        }
    }
    c1_grid
        .iter()
        .map(|&c1| {
            c2_grid
                .iter()
                .map(|&c2| {
                    evaluate_two_layer(catalog, c1, c2, &LayerPolicy::Shared)
                        .map(|r| r.total_reduction)
                })
                .collect()
        })
        .collect()
}

/// One row of a bandwidth-savings report.
#[derive(Debug, Clone)]
pub struct SavingsRow {
    pub label: String,
    pub layer1_reduction: f64,
    pub total_reduction: f64,
}

impl SavingsRow {
    pub fn layer1_percent(&self) -> i64 {
        round_percent(self.layer1_reduction)
    }

    pub fn total_percent(&self) -> i64 {
        round_percent(self.total_reduction)
    }
}

/// Half-up rounding of a fraction to integer percent.
pub fn round_percent(x: f64) -> i64 {
    (x * 100.0 + 0.5).floor() as i64
}

/// Evaluates a list of labeled (catalog, policy) rows at fixed layer sizes.
pub fn savings_table(
    rows: &[(String, Catalog, LayerPolicy)],
    c1: f64,
    c2: f64,
) -> Result<Vec<SavingsRow>> {
    rows.iter()
        .map(|(label, catalog, policy)| {
            let r = evaluate_two_layer(catalog, c1, c2, policy)?;
            Ok(SavingsRow {
                label: label.clone(),
                layer1_reduction: r.layer1_reduction,
                total_reduction: r.total_reduction,
            })
        })
        .collect()
}
