use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("graph is not connected: vertex `{0}` is unreachable")]
    DisconnectedGraph(String),
    #[error("edge `{edge}` has non-positive length {length}")]
    NonpositiveLength { edge: String, length: f64 },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("point is not on the graph: {0}")]
    PointNotOnGraph(String),
    #[error("p = infinity requires a weight without atoms")]
    UnboundedWeight,
    #[error("function is not continuous: {0}")]
    DiscontinuousInput(String),
    #[error("the first measure of a product functional must be atom-free")]
    AtomicFirstMeasure,
    #[error("weight is not integrable: {0}")]
    WeightNotIntegrable(String),
    #[error("graph is not a tree")]
    NotATree,
    #[error("epsilon {eps} is outside (0, {total})")]
    EpsilonOutOfRange { eps: f64, total: f64 },
    #[error("partition verification failed: {0}")]
    VerificationFailed(String),
    #[error("mesh too coarse: edge `{edge}` has {cells} cells (need at least 4)")]
    MeshTooCoarse { edge: String, cells: usize },
    #[error("SVD did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed input {file}: {message}")]
    Parse { file: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
