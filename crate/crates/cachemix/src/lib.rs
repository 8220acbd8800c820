//! Analytic and simulated cache performance for mixed content workloads.
//!
//! The crate models a catalog of content types, each with a popularity law,
//! and answers the question "what hit rate does a cache of size C achieve?"
//! three ways: exact LFU analytics, the Che approximation for LRU, and an
//! event-driven LRU simulator. Small instances can additionally be checked
//! against an exact LRU stationary law.

pub mod che;
pub mod error;
pub mod hierarchy;
pub mod lfu;
pub mod numeric;
pub mod oracle;
pub mod scenario;
pub mod sim;
pub mod traffic;

pub use che::{expected_occupancy, solve_tc, Catalog, CheSolution};
pub use error::{Error, Result};
pub use hierarchy::{
    contour_grid, evaluate_two_layer, savings_table, HierarchyResult, LayerPolicy, SavingsRow,
};
pub use lfu::{curve_mix, hit_homogeneous, hit_mix_at_size, HitCurve};
pub use oracle::{brute_force_lru_hit, exact_lru_hit};
pub use scenario::{builtin_mix, load_scenario, parse_size, Scenario, Workload};
pub use sim::{run_single_cache, run_tandem, RankSampler, SimReport, TandemReport, Warmup};
pub use traffic::{harmonic_sum, ContentType, PopularityLaw, TrafficMix};

// mdbook cannot run chapter snippets against the crate, so the chapters are
// included as doc comments here and `cargo test --doc` keeps them honest.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/traffic.md")]
    mod traffic {}
    #[doc = include_str!("../../../book/src/lfu.md")]
    mod lfu {}
    #[doc = include_str!("../../../book/src/lru.md")]
    mod lru {}
    #[doc = include_str!("../../../book/src/hierarchy.md")]
    mod hierarchy {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
