//! Wall-clock limits for the exact solver.

use std::time::{Duration, Instant};

use ttsched_core::exact::{solve, Budget, ExactResult, IlpModel};

use crate::Error;

/// Budget that runs out at a fixed instant.
pub struct Deadline {
    until: Instant,
}

impl Deadline {
    pub fn after(limit: Duration) -> Self {
        Deadline { until: Instant::now() + limit }
    }
}

impl Budget for Deadline {
    fn exhausted(&mut self) -> bool {
        Instant::now() >= self.until
    }
}

/// Solves `model` within `seconds` of wall time. The result is flagged
/// `best_known` when the limit cut the search.
pub fn solve_with_limit(model: &IlpModel, seconds: f64) -> Result<ExactResult, Error> {
    if !(seconds > 0.0) || !seconds.is_finite() {
        return Err(ttsched_core::Error::NonPositiveTimeLimit.into());
    }
    let mut budget = Deadline::after(Duration::from_secs_f64(seconds));
    Ok(solve(model, &mut budget)?)
}
