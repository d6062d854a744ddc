use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("node {node} is out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { node: u64, node_count: usize },
    #[error("self-loop on node {node}")]
    SelfLoop { node: u32 },
    #[error("duplicate arc {from} -> {to}")]
    DuplicateArc { from: u32, to: u32 },
    #[error("arc {from} -> {to} given twice with conflicting probabilities {first} and {second}")]
    ConflictingArc {
        from: u32,
        to: u32,
        first: f64,
        second: f64,
    },
    #[error("{what} = {value} is not a probability in [0, 1]")]
    NotAProbability { what: &'static str, value: f64 },
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("incoming LT weights of node {node} sum to {sum}, which exceeds 1")]
    WeightSumExceeded { node: u32, sum: f64 },
    #[error("node {node} has in-degree {degree}, above the enumeration cap {cap}")]
    DegreeCapExceeded { node: u32, degree: usize, cap: usize },
    #[error("exact enumeration needs {needed} {what}, above the cap of {cap}")]
    OracleTooLarge {
        what: &'static str,
        needed: usize,
        cap: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("infeasible generator spec: {0}")]
    Infeasible(String),
    #[error("pairing model failed to produce a simple graph after {attempts} attempts")]
    PairingRetriesExhausted { attempts: u32 },
}
