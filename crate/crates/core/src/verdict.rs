use std::fmt;

use crate::history::{Run, Segment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Outcome {
    Pass,
    Fail,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
        })
    }
}

/// Counters reported alongside a verdict.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    /// Product states visited by the search.
    pub explored: usize,
    /// (implementation state, spec state set) pairs visited; correctness only.
    pub pairs: usize,
    /// Segments examined.
    pub segments: usize,
    /// The segment-length bound in force, if any.
    pub bound: Option<usize>,
}

/// Result of a membership or correctness check.
///
/// For membership, a passing verdict carries a specification run equivalent
/// to the input. For correctness, a failing verdict carries a run of the
/// implementation that the specification does not allow, and its last
/// segment as `unmatched`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub outcome: Outcome,
    pub witness: Option<Run>,
    pub unmatched: Option<Segment>,
    /// Positions in the witness (counted in events) where it is quiescent.
    pub quiescent_points: Vec<usize>,
    pub stats: Stats,
    pub warnings: Vec<String>,
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        self.outcome == Outcome::Pass
    }

    pub(crate) fn new(outcome: Outcome) -> Self {
        Verdict {
            outcome,
            witness: None,
            unmatched: None,
            quiescent_points: Vec::new(),
            stats: Stats::default(),
            warnings: Vec::new(),
        }
    }
}
