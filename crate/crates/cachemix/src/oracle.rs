//! Exact LRU hit rates for tiny catalogs.
//!
//! Under the independent reference model the LRU stack has a product-form
//! stationary law over ordered cache states. The state space grows
//! factorially, so this is a ground-truth oracle for tests, not an analysis
//! tool; populations are capped at 10 objects.

use crate::error::{Error, Result};

/// Largest population the oracle enumerates.
pub const ORACLE_GUARD: u64 = 10;

const PROBABILITY_TOL: f64 = 1e-9;

/// Exact stationary hit rates of one LRU instance.
#[derive(Debug, Clone)]
pub struct ExactLru {
    pub overall_hit: f64,
    /// `h(n)`: stationary probability that object `n` is cached.
    pub per_object_hits: Vec<f64>,
}

fn validate(q: &[f64], c: usize) -> Result<()> {
    let n = q.len();
    if n == 0 || q.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidParameter(
            "object probabilities must be positive and finite".into(),
        ));
    }
    if n as u64 > ORACLE_GUARD {
        return Err(Error::PopulationGuard {
            population: n as u64,
            guard: ORACLE_GUARD,
            context: "exact LRU oracle",
        });
    }
    let sum: f64 = q.iter().sum();
    if (sum - 1.0).abs() > PROBABILITY_TOL {
        return Err(Error::InvalidParameter(format!(
            "object probabilities sum to {sum}, expected 1"
        )));
    }
    if c > n {
        return Err(Error::InvalidParameter(format!(
            "cache size {c} exceeds population {n}"
        )));
    }
    Ok(())
}

/// All ordered `c`-tuples of distinct ids from `0..n`, most recent first.
fn ordered_states(n: usize, c: usize) -> Vec<Vec<u8>> {
    let mut states = Vec::new();
    let mut current = Vec::with_capacity(c);
    let mut used = vec![false; n];
    fn recurse(
        n: usize,
        c: usize,
        current: &mut Vec<u8>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<u8>>,
    ) {
        if current.len() == c {
            out.push(current.clone());
            return;
        }
        for id in 0..n {
            if !used[id] {
                used[id] = true;
                current.push(id as u8);
                recurse(n, c, current, used, out);
                current.pop();
                used[id] = false;
            }
        }
    }
    recurse(n, c, &mut current, &mut used, &mut states);
    states
}

/// Product-form stationary probability of one ordered state:
/// `prod_k q(a_k) / (1 - sum_{j<k} q(a_j))`.
fn product_prob(q: &[f64], state: &[u8]) -> f64 {
    let mut prob = 1.0;
    let mut prefix = 0.0;
    for &id in state {
        prob *= q[id as usize] / (1.0 - prefix);
        prefix += q[id as usize];
    }
    prob
}

fn hits_from_distribution(q: &[f64], states: &[Vec<u8>], probs: &[f64]) -> ExactLru {
    let mut per_object_hits = vec![0.0; q.len()];
    for (state, &p) in states.iter().zip(probs) {
        for &id in state {
            per_object_hits[id as usize] += p;
        }
    }
    let overall_hit = q
        .iter()
        .zip(&per_object_hits)
        .map(|(&qi, &hi)| qi * hi)
        .sum();
    ExactLru {
        overall_hit,
        per_object_hits,
    }
}

/// Exact LRU hit rates from the product-form stationary law.
pub fn exact_lru_hit(q: &[f64], c: usize) -> Result<ExactLru> {
    validate(q, c)?;
    if c == 0 {
        return Ok(ExactLru {
            overall_hit: 0.0,
            per_object_hits: vec![0.0; q.len()],
        });
    }
    let states = ordered_states(q.len(), c);
    let probs: Vec<f64> = states.iter().map(|s| product_prob(q, s)).collect();
    Ok(hits_from_distribution(q, &states, &probs))
}

/// Exact LRU hit rates from a brute-force stationary solve of the
/// full-state Markov chain, independent of the product form. Power
/// iteration runs until the L1 step change drops below 1e-13.
pub fn brute_force_lru_hit(q: &[f64], c: usize) -> Result<ExactLru> {
    validate(q, c)?;
    if c == 0 {
        return Ok(ExactLru {
            overall_hit: 0.0,
            per_object_hits: vec![0.0; q.len()],
        });
    }
    let states = ordered_states(q.len(), c);
    let probs = brute_force_distribution(q, &states);
    Ok(hits_from_distribution(q, &states, &probs))
}

/// Stationary distribution over `states` by power iteration. The chain is
/// irreducible for strictly positive `q` (any full state reaches any other).
fn brute_force_distribution(q: &[f64], states: &[Vec<u8>]) -> Vec<f64> {
    use std::collections::HashMap;
    let index: HashMap<&[u8], usize> = states
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i))
        .collect();

    // transitions[i] = [(target, probability)] for each requested object
    let transitions: Vec<Vec<(usize, f64)>> = states
        .iter()
        .map(|state| {
            (0..q.len())
                .map(|id| {
                    let id = id as u8;
                    let mut next: Vec<u8> = vec![id];
                    next.extend(state.iter().filter(|&&x| x != id));
                    next.truncate(state.len());
                    (index[next.as_slice()], q[id as usize])
                })
                .collect()
        })
        .collect();

    let m = states.len();
    let mut dist = vec![1.0 / m as f64; m];
    let mut next = vec![0.0; m];
    for _ in 0..200_000 {
        next.iter_mut().for_each(|x| *x = 0.0);
        for (i, outs) in transitions.iter().enumerate() {
            for &(j, p) in outs {
                next[j] += dist[i] * p;
            }
        }
        let delta: f64 = dist.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut dist, &mut next);
        if delta < 1e-13 {
            break;
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const ZIPF4: [f64; 4] = [0.48, 0.24, 0.16, 0.12];

    #[test]
    fn uniform_hits_are_capacity_ratio() {
        let q = vec![0.25; 4];
        for c in 0..=4 {
            let r = exact_lru_hit(&q, c).unwrap();
            for h in &r.per_object_hits {
                assert_relative_eq!(*h, c as f64 / 4.0, max_relative = 1e-12);
            }
            assert_relative_eq!(r.overall_hit, c as f64 / 4.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn full_cache_always_hits() {
        let r = exact_lru_hit(&ZIPF4, 4).unwrap();
        assert_relative_eq!(r.overall_hit, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn state_probabilities_sum_to_one() {
        for c in 1..=4 {
            let states = ordered_states(4, c);
            let sum: f64 = states.iter().map(|s| product_prob(&ZIPF4, s)).sum();
            assert_relative_eq!(sum, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn product_form_matches_brute_force_statewise() {
        let laws: Vec<Vec<f64>> = vec![
            ZIPF4.to_vec(),
            vec![0.5, 0.3, 0.2],
            vec![0.4, 0.3, 0.15, 0.1, 0.05],
            {
                let h: f64 = (1..=6).map(|k| 1.0 / k as f64).sum();
                (1..=6).map(|k| 1.0 / (k as f64 * h)).collect()
            },
        ];
        for q in &laws {
            for c in 1..=q.len().min(4) {
                let states = ordered_states(q.len(), c);
                let product: Vec<f64> = states.iter().map(|s| product_prob(q, s)).collect();
                let brute = brute_force_distribution(q, &states);
                for (p, b) in product.iter().zip(&brute) {
                    assert!(
                        (p - b).abs() < 1e-12,
                        "state probability mismatch: {p} vs {b} (N={}, C={c})",
                        q.len()
                    );
                }
            }
        }
    }

    #[test]
    fn oracle_never_beats_lfu() {
        for c in 1..=3 {
            let r = exact_lru_hit(&ZIPF4, c).unwrap();
            let lfu: f64 = ZIPF4[..c].iter().sum();
            assert!(r.overall_hit <= lfu + 1e-12);
        }
    }

    #[test]
    fn zipf4_c2_reference_value() {
        let product = exact_lru_hit(&ZIPF4, 2).unwrap();
        let brute = brute_force_lru_hit(&ZIPF4, 2).unwrap();
        assert!((product.overall_hit - brute.overall_hit).abs() < 1e-12);
        // top object is cached more often than its probability mass
        assert!(product.per_object_hits[0] > 0.48);
        assert!(product.overall_hit > 0.48 && product.overall_hit < 0.72);
    }

    #[test]
    fn guards_and_validation() {
        assert!(exact_lru_hit(&[0.5, 0.5], 3).is_err());
        assert!(exact_lru_hit(&[0.7, 0.2], 1).is_err());
        assert!(exact_lru_hit(&[], 0).is_err());
        let q = vec![1.0 / 11.0; 11];
        assert!(matches!(
            exact_lru_hit(&q, 2),
            Err(Error::PopulationGuard { .. })
        ));
    }
}
