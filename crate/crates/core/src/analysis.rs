//! Schedulability predicates for strictly periodic slot patterns and
//! feasible-solution counting.

use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::One;

use crate::model::{packet_windows, FlowSpec};
use crate::paths::count_paths;
use crate::tecg::Tecg;
use crate::{Error, Mode};

/// Largest per-packet path count [`count_solutions`] will enumerate.
pub const COUNT_GUARD: u64 = 1_000_000_000_000;

/// Slots `{origin + c·cycle | c ≥ 0}` a cyclic flow occupies on a link.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IndexSet {
    pub origin: u64,
    pub cycle: u64,
}

impl IndexSet {
    pub fn new(origin: u64, cycle: u64) -> Self {
        assert!(cycle >= 1, "cycle must be at least 1");
        IndexSet { origin, cycle }
    }

    pub fn contains(&self, slot: u64) -> bool {
        slot >= self.origin && (slot - self.origin).is_multiple_of(self.cycle)
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Whether two index sets share a slot: true iff `gcd(λa, λb)` divides the
/// origin difference.
pub fn collides(a: IndexSet, b: IndexSet) -> bool {
    let g = gcd(a.cycle, b.cycle);
    a.origin.abs_diff(b.origin).is_multiple_of(g)
}

/// Slots in `[1, horizon]` that a flow with index set `a` makes unusable as
/// an origin for a flow of cycle `other_cycle`: `{o + c·gcd(λa, λb)}`.
pub fn blocked_slots(a: IndexSet, other_cycle: u64, horizon: u64) -> Vec<u64> {
    let step = gcd(a.cycle, other_cycle.max(1));
    let mut out = Vec::new();
    let mut s = a.origin;
    while s <= horizon {
        if s >= 1 {
            out.push(s);
        }
        s += step;
    }
    out
}

/// Number of feasible schedules of a single flow on `tecg`, counted the way
/// the fixed/flexible comparison does it: the FCS count is the number of
/// simple time-respecting paths in packet 1's lifespan; the HFS count
/// multiplies the per-packet path counts, ignoring conflicts between packets.
///
/// Rejects flows whose lifespans overlap (`max_delay > cycle`).
pub fn count_solutions(tecg: &Tecg, flow: &FlowSpec, mode: Mode) -> Result<BigUint, Error> {
    if flow.max_delay > flow.cycle {
        return Err(Error::OverlappingLifespans { cycle: flow.cycle, max_delay: flow.max_delay });
    }
    let windows = packet_windows(flow, tecg.hypercycle())?;
    let per_packet = |w| count_paths(&tecg.packet_graph(flow, w), COUNT_GUARD).ok_or(Error::CountOverflowGuard(COUNT_GUARD));
    match mode {
        Mode::Fcs => Ok(BigUint::from(per_packet(windows[0])?)),
        Mode::Hfs => {
            let mut total = BigUint::one();
            for w in windows {
                total *= per_packet(w)?;
            }
            Ok(total)
        }
    }
}
