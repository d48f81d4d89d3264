use alloc::string::String;

use crate::model::{CommEdge, LinkId, NodeId};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("no flows")]
    NoFlows,
    #[error("flow {flow}: cycle/hypercycle mismatch (cycle {cycle} does not divide {gamma})")]
    CycleMismatch { flow: u32, cycle: u32, gamma: u32 },
    #[error("invalid flow {flow}: {reason}")]
    InvalidFlow { flow: u32, reason: &'static str },
    #[error("invalid topology: {0}")]
    InvalidTopology(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("unknown node index {0:?}")]
    UnknownNodeId(NodeId),
    #[error("unknown link {0:?}")]
    UnknownLink(LinkId),
    #[error("no link from {0:?} to {1:?}")]
    NoSuchLink(NodeId, NodeId),
    #[error("slot {slot} outside [1, {gamma}]")]
    SlotOutOfRange { slot: u32, gamma: u32 },
    #[error("edge {0:?} is already occupied")]
    AlreadyOccupied(CommEdge),
    #[error("edge {0:?} is not occupied")]
    NotOccupied(CommEdge),
    #[error("edge {0:?} lies outside the packet lifespan")]
    OutsideSpan(CommEdge),
    #[error("oracle scale exceeded: {0}")]
    OracleScaleExceeded(String),
    #[error("count overflow guard: more than {0} paths")]
    CountOverflowGuard(u64),
    #[error("solution counting undefined when max_delay {max_delay} exceeds cycle {cycle}")]
    OverlappingLifespans { cycle: u32, max_delay: u32 },
    #[error("time limit must be positive")]
    NonPositiveTimeLimit,
    #[error("hypercycle {gamma} is not a multiple of every flow cycle")]
    InconsistentHypercycle { gamma: u32 },
    #[error("malformed LP text: {0}")]
    LpParse(String),
    #[error("unknown name {0:?}")]
    UnknownName(String),
}
