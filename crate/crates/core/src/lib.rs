//! Scheduling of periodic flows on time-triggered Ethernet.
//!
//! The crate models one hypercycle of a switched network as a time-expanded
//! cyclic graph ([`tecg::Tecg`]): one vertex per node and slot, one
//! communication edge per free link-slot and one storage edge per node-slot,
//! with slot `Γ` wrapping back to slot `1`. Flows are admitted on top of it by
//!
//! * the lightest-load-first heuristic ([`llf`]), which routes every packet of
//!   a hypercycle independently along a minimum-load schedule path,
//! * an exact branch-and-bound search ([`exact`]) over the same feasible sets,
//!   in both the flexible per-packet mode and the fixed cyclic mode,
//! * three reconstructed comparison schemes ([`baselines`]).
//!
//! Every schedule can be checked by the independent [`verify`] module, and
//! [`analysis`] provides the gcd collision predicates and solution counting.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, generators and
//! the command-line tool live in the `ttsched` companion crate.

#![no_std]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod analysis;
pub mod baselines;
mod bitset;
pub mod error;
pub mod exact;
pub mod llf;
pub mod load;
pub mod model;
pub mod paths;
pub mod tecg;
pub mod verify;

pub use error::Error;
pub use model::{
    hypercycle_of, packet_windows, CommEdge, FlowId, FlowSpec, Hop, Hypercycle, LinkId, NodeId,
    PacketId, PacketWindow, Schedule, SchedulePath, Topology,
};
pub use tecg::{PacketGraph, Tecg};

/// Scheduling semantics shared by the exact solver, the verifier and the
/// solution counter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Hypercycle-level flexible scheduling: every packet picks its own path.
    Hfs,
    /// Fixed cyclic scheduling: packet `i` reuses packet 1's path shifted by
    /// `(i - 1)·λ` slots.
    Fcs,
}

impl core::fmt::Display for Mode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Mode::Hfs => f.write_str("hfs"),
            Mode::Fcs => f.write_str("fcs"),
        }
    }
}

impl core::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "hfs" | "HFS" => Ok(Mode::Hfs),
            "fcs" | "FCS" => Ok(Mode::Fcs),
            other => Err(Error::UnknownName(other.into())),
        }
    }
}
