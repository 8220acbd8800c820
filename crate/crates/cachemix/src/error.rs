use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("traffic shares sum to {got} (expected 1 within {tol})")]
    ShareSum { got: f64, tol: f64 },

    #[error("traffic mixes support Zipf popularity only; type `{0}` uses another law")]
    NonZipfInMix(String),

    #[error("rank {rank} out of range for type {type_index} (population {population})")]
    RankOutOfRange {
        type_index: usize,
        rank: u64,
        population: u64,
    },

    #[error("type index {0} out of range")]
    TypeOutOfRange(usize),

    #[error("chunk size {chunk} does not divide object size {object} of type `{name}`")]
    ChunkSize { name: String, chunk: f64, object: f64 },

    #[error("cache size {0} must be positive")]
    NonPositiveCacheSize(f64),

    #[error("negative cache size {0}")]
    NegativeCacheSize(f64),

    #[error("population {population} exceeds the {guard} guard for {context}")]
    PopulationGuard {
        population: u64,
        guard: u64,
        context: &'static str,
    },

    #[error("layer policy admits no known type")]
    EmptyPolicy,

    #[error("unknown type `{0}` in layer policy")]
    UnknownPolicyType(String),

    #[error("warmup {warmup} must leave room for measured requests ({requests})")]
    WarmupTooLong { warmup: u64, requests: u64 },

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("unknown built-in scenario `{0}` and no such file exists")]
    UnknownScenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
