//! Event-driven LRU simulation under the independent reference model.
//!
//! Request timing is collapsed: with Poisson arrivals only the request order
//! affects hit rates, so requests are i.i.d. rank draws. Populations are
//! capped at 10^7 objects; larger catalogs are analytic-only.

use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::traffic::PopularityLaw;

/// Largest population the simulator materializes.
pub const SIM_POPULATION_GUARD: u64 = 10_000_000;

/// Draws ranks with probability proportional to the law's weights, using an
/// alias table built once per law (Vose's method, O(1) per draw).
#[derive(Debug, Clone)]
pub struct RankSampler {
    prob: Vec<f64>,
    alias: Vec<u32>,
}

impl RankSampler {
    pub fn new(law: &PopularityLaw) -> Result<Self> {
        let n = law.population();
        if n > SIM_POPULATION_GUARD {
            return Err(Error::PopulationGuard {
                population: n,
                guard: SIM_POPULATION_GUARD,
                context: "simulation",
            });
        }
        let n = n as usize;
        let total = law.total_weight();
        // scaled probabilities; columns with p < 1 donate their slack to
        // columns with p > 1
        let mut prob: Vec<f64> = (1..=n as u64)
            .map(|k| law.weight(k) * n as f64 / total)
            .collect();
        let mut alias = vec![0u32; n];
        let mut small: Vec<u32> = Vec::new();
        let mut large: Vec<u32> = Vec::new();
        for (i, &p) in prob.iter().enumerate() {
            if p < 1.0 {
                small.push(i as u32);
            } else {
                large.push(i as u32);
            }
        }
        while let (Some(s), Some(l)) = (small.pop(), large.pop()) {
            alias[s as usize] = l;
            let leftover = prob[l as usize] + prob[s as usize] - 1.0;
            prob[l as usize] = leftover;
            if leftover < 1.0 {
                small.push(l);
            } else {
                large.push(l);
            }
        }
        // numerical leftovers land exactly at 1
        for i in small.into_iter().chain(large) {
            prob[i as usize] = 1.0;
        }
        Ok(Self { prob, alias })
    }

    pub fn population(&self) -> u64 {
        self.prob.len() as u64
    }

    /// A rank in `1..=population`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        let i = rng.gen_range(0..self.prob.len());
        let column = if rng.gen::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i] as usize
        };
        column as u64 + 1
    }
}

const NIL: u32 = u32::MAX;

/// LRU cache over dense object ids `0..population`: a doubly linked recency
/// list threaded through a slot vector, O(1) lookup and move-to-front.
#[derive(Debug, Clone)]
struct LruCache {
    capacity: usize,
    prev: Vec<u32>,
    next: Vec<u32>,
    present: Vec<bool>,
    head: u32,
    tail: u32,
    len: usize,
}

impl LruCache {
    fn new(capacity: usize, population: usize) -> Self {
        Self {
            capacity,
            prev: vec![NIL; population],
            next: vec![NIL; population],
            present: vec![false; population],
            head: NIL,
            tail: NIL,
            len: 0,
        }
    }

    fn unlink(&mut self, id: u32) {
        let (p, n) = (self.prev[id as usize], self.next[id as usize]);
        if p == NIL {
            self.head = n;
        } else {
            self.next[p as usize] = n;
        }
        if n == NIL {
            self.tail = p;
        } else {
            self.prev[n as usize] = p;
        }
    }

    fn push_front(&mut self, id: u32) {
        self.prev[id as usize] = NIL;
        self.next[id as usize] = self.head;
        if self.head != NIL {
            self.prev[self.head as usize] = id;
        }
        self.head = id;
        if self.tail == NIL {
            self.tail = id;
        }
    }

    /// Processes one request; returns (hit, evicted_something).
    fn request(&mut self, id: u32) -> (bool, bool) {
        if self.present[id as usize] {
            if self.head != id {
                self.unlink(id);
                self.push_front(id);
            }
            return (true, false);
        }
        if self.capacity == 0 {
            return (false, false);
        }
        let mut evicted = false;
        if self.len == self.capacity {
            let victim = self.tail;
            self.unlink(victim);
            self.present[victim as usize] = false;
            self.len -= 1;
            evicted = true;
        }
        self.present[id as usize] = true;
        self.push_front(id);
        self.len += 1;
        (false, evicted)
    }

    #[cfg(test)]
    fn len(&self) -> usize {
        self.len
    }
}

/// Measured window of one simulation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimReport {
    pub warmup_requests: u64,
    pub seed: u64,
    /// (requests, hits) per rank, rank 1 first.
    per_rank: Vec<(u64, u64)>,
}

impl SimReport {
    fn new(population: usize, warmup_requests: u64, seed: u64) -> Self {
        Self {
            warmup_requests,
            seed,
            per_rank: vec![(0, 0); population],
        }
    }

    fn record(&mut self, rank: u64, hit: bool) {
        let cell = &mut self.per_rank[rank as usize - 1];
        cell.0 += 1;
        cell.1 += hit as u64;
    }

    /// Requests in the measured window.
    pub fn total_requests(&self) -> u64 {
        self.per_rank.iter().map(|(r, _)| r).sum()
    }

    pub fn total_hits(&self) -> u64 {
        self.per_rank.iter().map(|(_, h)| h).sum()
    }

    pub fn overall_hit(&self) -> f64 {
        let total = self.total_requests();
        if total == 0 {
            0.0
        } else {
            self.total_hits() as f64 / total as f64
        }
    }

    pub fn rank_requests(&self, rank: u64) -> u64 {
        self.per_rank[rank as usize - 1].0
    }

    /// Empirical hit rate of one rank; `None` when the rank was never
    /// requested in the measured window.
    pub fn rank_hit_rate(&self, rank: u64) -> Option<f64> {
        let (reqs, hits) = self.per_rank[rank as usize - 1];
        (reqs > 0).then(|| hits as f64 / reqs as f64)
    }

    /// Binomial standard error `sqrt(p(1-p)/n)` of one rank's hit rate.
    pub fn rank_stderr(&self, rank: u64) -> Option<f64> {
        let (reqs, _) = self.per_rank[rank as usize - 1];
        self.rank_hit_rate(rank)
            .map(|p| (p * (1.0 - p) / reqs as f64).sqrt())
    }

    /// Standard error of the overall hit rate.
    pub fn overall_stderr(&self) -> f64 {
        let n = self.total_requests();
        if n == 0 {
            return 0.0;
        }
        let p = self.overall_hit();
        (p * (1.0 - p) / n as f64).sqrt()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "rank,requests,hits,hit_rate,stderr")?;
        for (i, (reqs, hits)) in self.per_rank.iter().enumerate() {
            let rank = i as u64 + 1;
            if *reqs == 0 {
                writeln!(w, "{rank},0,0,,")?;
            } else {
                let p = *hits as f64 / *reqs as f64;
                let se = (p * (1.0 - p) / *reqs as f64).sqrt();
                writeln!(w, "{rank},{reqs},{hits},{p},{se}")?;
            }
        }
        writeln!(
            w,
            "# total_requests={} warmup={} overall_hit={} seed={}",
            self.total_requests(),
            self.warmup_requests,
            self.overall_hit(),
            self.seed
        )
    }
}

/// Warmup policy: either a fixed request count or the adaptive default,
/// `max(10 C, 10^6)` extended past the first eviction by another `10 C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Warmup {
    #[default]
    Adaptive,
    Fixed(u64),
}

struct WarmupState {
    base: u64,
    extension: u64,
    first_eviction: Option<u64>,
    can_evict: bool,
}

impl WarmupState {
    fn new(total_capacity: u64, population: u64) -> Self {
        Self {
            base: (10 * total_capacity).max(1_000_000),
            extension: 10 * total_capacity,
            first_eviction: None,
            can_evict: total_capacity < population,
        }
    }

    fn done(&self, served: u64) -> bool {
        if served < self.base {
            return false;
        }
        if !self.can_evict {
            return true;
        }
        match self.first_eviction {
            Some(at) => served >= at + self.extension,
            None => false,
        }
    }
}

/// Simulates a single LRU cache over `n_requests` total requests. Warmup
/// requests come first and are excluded from the report; the warmup must
/// leave a non-empty measured window.
pub fn run_single_cache(
    law: &PopularityLaw,
    capacity: u64,
    n_requests: u64,
    warmup: Warmup,
    seed: u64,
) -> Result<SimReport> {
    let sampler = RankSampler::new(law)?;
    let population = sampler.population();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache = LruCache::new(capacity.min(population) as usize, population as usize);

    let mut served = 0u64;
    match warmup {
        Warmup::Fixed(count) => {
            for _ in 0..count {
                let rank = sampler.sample(&mut rng);
                cache.request(rank as u32 - 1);
            }
            served = count;
        }
        Warmup::Adaptive => {
            let mut state = WarmupState::new(capacity.min(population), population);
            while !state.done(served) {
                let rank = sampler.sample(&mut rng);
                let (_, evicted) = cache.request(rank as u32 - 1);
                served += 1;
                if evicted && state.first_eviction.is_none() {
                    state.first_eviction = Some(served);
                }
            }
        }
    }

    if served >= n_requests {
        return Err(Error::WarmupTooLong {
            warmup: served,
            requests: n_requests,
        });
    }
    let mut report = SimReport::new(population as usize, served, seed);
    for _ in served..n_requests {
        let rank = sampler.sample(&mut rng);
        let (hit, _) = cache.request(rank as u32 - 1);
        report.record(rank, hit);
    }
    Ok(report)
}

/// Reports of a two-layer tandem run. The layer-2 report covers only the
/// requests that missed layer 1, so its hit rate is conditional.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TandemReport {
    pub layer1: SimReport,
    pub layer2: SimReport,
}

impl TandemReport {
    /// Fraction of all measured requests served by either layer.
    pub fn overall_hit(&self) -> f64 {
        let total = self.layer1.total_requests();
        if total == 0 {
            return 0.0;
        }
        (self.layer1.total_hits() + self.layer2.total_hits()) as f64 / total as f64
    }
}

/// Simulates `m` layer-1 LRU caches of `c1_each` objects behind a shared
/// layer-2 cache of `c2` objects. Each request is routed to a uniformly
/// random layer-1 cache; misses are forwarded to layer 2.
pub fn run_tandem(
    law: &PopularityLaw,
    m_layer1: u64,
    c1_each: u64,
    c2: u64,
    n_requests: u64,
    warmup: Warmup,
    seed: u64,
) -> Result<TandemReport> {
    if m_layer1 == 0 {
        return Err(Error::InvalidParameter(
            "tandem needs at least one layer-1 cache".into(),
        ));
    }
    let sampler = RankSampler::new(law)?;
    let population = sampler.population();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap1 = c1_each.min(population) as usize;
    let mut edges: Vec<LruCache> = (0..m_layer1)
        .map(|_| LruCache::new(cap1, population as usize))
        .collect();
    let mut core = LruCache::new(c2.min(population) as usize, population as usize);

    let total_capacity = (m_layer1 * c1_each + c2).min(population * (m_layer1 + 1));
    let route = |rng: &mut ChaCha8Rng,
                     edges: &mut [LruCache],
                     core: &mut LruCache|
     -> (u64, bool, bool, bool) {
        let rank = sampler.sample(rng);
        let id = rank as u32 - 1;
        let edge = rng.gen_range(0..edges.len());
        let (hit1, ev1) = edges[edge].request(id);
        if hit1 {
            (rank, true, false, ev1)
        } else {
            let (hit2, ev2) = core.request(id);
            (rank, false, hit2, ev1 || ev2)
        }
    };

    let mut served = 0u64;
    match warmup {
        Warmup::Fixed(count) => {
            for _ in 0..count {
                route(&mut rng, &mut edges, &mut core);
            }
            served = count;
        }
        Warmup::Adaptive => {
            let mut state = WarmupState::new(total_capacity, population);
            while !state.done(served) {
                let (_, _, _, evicted) = route(&mut rng, &mut edges, &mut core);
                served += 1;
                if evicted && state.first_eviction.is_none() {
                    state.first_eviction = Some(served);
                }
            }
        }
    }

    if served >= n_requests {
        return Err(Error::WarmupTooLong {
            warmup: served,
            requests: n_requests,
        });
    }
    let mut layer1 = SimReport::new(population as usize, served, seed);
    let mut layer2 = SimReport::new(population as usize, served, seed);
    for _ in served..n_requests {
        let (rank, hit1, hit2, _) = route(&mut rng, &mut edges, &mut core);
        layer1.record(rank, hit1);
        if !hit1 {
            layer2.record(rank, hit2);
        }
    }
    Ok(TandemReport { layer1, layer2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::che::{solve_tc, Catalog};

    #[test]
    fn sampler_single_object() {
        let law = PopularityLaw::zipf(0.8, 1).unwrap();
        let sampler = RankSampler::new(&law).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            assert_eq!(sampler.sample(&mut rng), 1);
        }
    }

    #[test]
    fn sampler_uniform_frequencies() {
        let law = PopularityLaw::uniform(4).unwrap();
        let sampler = RankSampler::new(&law).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0u64; 4];
        let draws = 1_000_000;
        for _ in 0..draws {
            counts[sampler.sample(&mut rng) as usize - 1] += 1;
        }
        for c in counts {
            let freq = c as f64 / draws as f64;
            assert!((freq - 0.25).abs() < 0.002, "frequency {freq}");
        }
    }

    #[test]
    fn sampler_zipf_top_rank_frequency() {
        let law = PopularityLaw::zipf(0.8, 10_000).unwrap();
        let sampler = RankSampler::new(&law).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let draws = 10_000_000u64;
        let mut top = 0u64;
        for _ in 0..draws {
            if sampler.sample(&mut rng) == 1 {
                top += 1;
            }
        }
        let q1 = law.weight(1) / law.total_weight();
        let freq = top as f64 / draws as f64;
        let sigma = (q1 * (1.0 - q1) / draws as f64).sqrt();
        assert!(
            (freq - q1).abs() < 3.0 * sigma,
            "freq {freq}, q1 {q1}, sigma {sigma}"
        );
    }

    #[test]
    fn sampler_population_guard() {
        let law = PopularityLaw::Zipf {
            alpha: 0.8,
            population: SIM_POPULATION_GUARD + 1,
        };
        assert!(RankSampler::new(&law).is_err());
    }

    #[test]
    fn lru_structural_stress() {
        // independent model of the recency order
        let mut cache = LruCache::new(5, 40);
        let mut model: Vec<u32> = Vec::new();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20_000 {
            let id = rng.gen_range(0..40u32);
            let (hit, _) = cache.request(id);
            assert_eq!(hit, model.contains(&id));
            model.retain(|&x| x != id);
            model.insert(0, id);
            model.truncate(5);
            assert_eq!(cache.head, model[0]);
            assert_eq!(cache.len(), model.len());
            assert_eq!(cache.tail, *model.last().unwrap());
            for (i, &x) in model.iter().enumerate() {
                assert!(cache.present[x as usize]);
                if i > 0 {
                    assert_eq!(cache.prev[x as usize], model[i - 1]);
                }
            }
        }
    }

    #[test]
    fn zero_capacity_never_hits() {
        let law = PopularityLaw::uniform(10).unwrap();
        let report = run_single_cache(&law, 0, 10_000, Warmup::Fixed(0), 3).unwrap();
        assert_eq!(report.total_hits(), 0);
    }

    #[test]
    fn warmup_must_leave_measured_window() {
        let law = PopularityLaw::uniform(10).unwrap();
        assert!(matches!(
            run_single_cache(&law, 2, 1000, Warmup::Fixed(1000), 3),
            Err(Error::WarmupTooLong { .. })
        ));
    }

    #[test]
    fn oversized_cache_hits_everything_after_warmup() {
        let law = PopularityLaw::zipf(0.8, 50).unwrap();
        let report = run_single_cache(&law, 100, 1_100_000, Warmup::Adaptive, 5).unwrap();
        assert_eq!(report.overall_hit(), 1.0);
    }

    #[test]
    fn deterministic_per_seed() {
        let law = PopularityLaw::zipf(0.8, 1000).unwrap();
        let a = run_single_cache(&law, 100, 100_000, Warmup::Fixed(20_000), 42).unwrap();
        let b = run_single_cache(&law, 100, 100_000, Warmup::Fixed(20_000), 42).unwrap();
        let c = run_single_cache(&law, 100, 100_000, Warmup::Fixed(20_000), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_hit_matches_capacity_ratio() {
        let law = PopularityLaw::uniform(1000).unwrap();
        let report = run_single_cache(&law, 100, 2_000_000, Warmup::Adaptive, 19).unwrap();
        assert!(
            (report.overall_hit() - 0.1).abs() < 0.005,
            "hit {}",
            report.overall_hit()
        );
    }

    #[test]
    fn single_cache_tracks_che_prediction() {
        let law = PopularityLaw::zipf(0.8, 10_000).unwrap();
        let cat = Catalog::homogeneous(&law).unwrap();
        let sol = solve_tc(&cat, 100.0).unwrap();
        let report = run_single_cache(&law, 100, 2_000_000, Warmup::Adaptive, 23).unwrap();
        assert!(
            (report.overall_hit() - sol.overall_byte_hit()).abs() < 0.02,
            "sim {} vs che {}",
            report.overall_hit(),
            sol.overall_byte_hit()
        );
    }

    #[test]
    fn tandem_without_core_matches_single_edge() {
        // one edge cache and no layer 2: identical to a single cache
        let law = PopularityLaw::zipf(0.8, 1000).unwrap();
        let tandem = run_tandem(&law, 1, 100, 0, 200_000, Warmup::Fixed(50_000), 29).unwrap();
        assert_eq!(tandem.layer2.total_hits(), 0);
        assert!(tandem.layer1.overall_hit() > 0.1);
    }

    #[test]
    fn tandem_passthrough_edge() {
        // m=1 with c1=0 forwards everything; layer 2 behaves like a single
        // cache at capacity c2
        let law = PopularityLaw::zipf(0.8, 1000).unwrap();
        let tandem = run_tandem(&law, 1, 0, 100, 2_000_000, Warmup::Adaptive, 31).unwrap();
        assert_eq!(tandem.layer1.total_hits(), 0);
        let single = run_single_cache(&law, 100, 2_000_000, Warmup::Adaptive, 31).unwrap();
        assert!(
            (tandem.overall_hit() - single.overall_hit()).abs() < 0.01,
            "tandem {} vs single {}",
            tandem.overall_hit(),
            single.overall_hit()
        );
    }

    #[test]
    fn report_csv_has_summary_line() {
        let law = PopularityLaw::uniform(4).unwrap();
        let report = run_single_cache(&law, 2, 1000, Warmup::Fixed(100), 37).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("rank,requests,hits,hit_rate,stderr\n"));
        assert!(text.lines().last().unwrap().starts_with("# total_requests="));
    }
}
