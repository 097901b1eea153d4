use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected: no path between {0} and {1}")]
    Disconnected(usize, usize),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid distance matrix: {0}")]
    InvalidMatrix(String),

    #[error("instance must contain at least one point")]
    EmptyInstance,

    #[error("cost undefined for empty facility set")]
    EmptyFacilitySet,

    #[error("marginal costs need at least two facilities, got {0}")]
    TooFewFacilities(usize),

    #[error("k = {k} out of range for n = {n} (need 1 <= k <= n)")]
    InvalidK { k: usize, n: usize },

    #[error("point {point} out of range for n = {n}")]
    PointOutOfRange { point: usize, n: usize },

    #[error("invalid scripted policy: {0}")]
    InvalidScript(String),

    #[error("illegal scripted step {step}: facility {facility} has marginal cost {cost} > minimum {min}")]
    IllegalScriptedStep {
        step: usize,
        facility: usize,
        cost: f64,
        min: f64,
    },

    #[error("exact oracle cap exceeded")]
    ExactCapExceeded,

    #[error("Γ brute force infeasible (proven lower bound {lower_bound})")]
    GammaInfeasible { lower_bound: usize },

    #[error("construction requires k ≥ 2")]
    ConstructionNeedsK2,

    #[error("n = {n} is below the minimum {min} for k = {k}")]
    TooFewPoints { k: usize, n: usize, min: usize },

    #[error("invalid file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
