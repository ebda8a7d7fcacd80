use thiserror::Error;

use crate::model::NodeId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("duplicate node id {0}")]
    DuplicateId(NodeId),
    #[error("node {0} has non-positive power {1}")]
    NonPositivePower(NodeId, f64),
    #[error("node {id} has transmission radius {radius} outside [1, {max}]")]
    RadiusOutOfRange { id: NodeId, radius: f64, max: f64 },
    #[error("path-loss exponent {0} is outside [2, 4]")]
    InvalidAlpha(f64),
    #[error("obstacle endpoints coincide")]
    DegenerateObstacle,
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    #[error("graph is disconnected: {to} is unreachable from {from}")]
    Disconnected { from: NodeId, to: NodeId },
    #[error("node {0} is not part of the subgraph")]
    NotInSubgraph(NodeId),
    #[error("invalid backbone: {0}")]
    InvalidBackbone(String),
    #[error("exact search limited to {limit} nodes, graph has {n}")]
    OracleTooLarge { n: usize, limit: usize },
    #[error("compression factor {c} must satisfy 1 <= c <= k = {k}")]
    InvalidCompression { c: usize, k: usize },
    #[error("no source nodes given")]
    NoSources,
    #[error("batch of {len} rumors exceeds capacity {capacity}")]
    BatchTooLarge { len: usize, capacity: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("round {round}: node {sender} transmits more than once")]
    DuplicateSender { round: usize, sender: NodeId },
    #[error("round {round}: node {sender} transmits rumor {rumor} it does not hold")]
    Causality {
        round: usize,
        sender: NodeId,
        rumor: String,
    },
    #[error("transmitter {0} has no pending batch")]
    NoPendingBatch(NodeId),
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("no connected network after {attempts} attempts; try a larger radius")]
    ConnectivityNotAchieved { attempts: usize },
    #[error("element {0} is not covered by any subset")]
    NotCovered(usize),
    #[error("invalid fixture parameter: {0}")]
    InvalidParameter(String),
}
