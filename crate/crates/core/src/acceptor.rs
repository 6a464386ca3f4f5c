//! Acceptors for the permutation closures of a segment.
//!
//! All three representations keep their state in a `u64`:
//!
//! * `Subset` (QC): the set of consumed positions. Accepts every
//!   permutation of the segment.
//! * `OrderedSubset` (QSC): as `Subset`, but a position is only enabled once
//!   every earlier position of the same process is consumed. Accepts the
//!   permutations that keep each process's order.
//! * `Counter` (QSC): one position counter per process, packed in mixed
//!   radix. Same language as `OrderedSubset` with at most
//!   `∏ (|π_p| + 1)` states.
//!
//! Identical actions are interchangeable, so a step on an action always
//! consumes the leftmost unconsumed position carrying it. The language is
//! unchanged and symmetric states collapse.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::event::{Action, ProcessId};
use crate::history::Segment;

pub const DEFAULT_WIDTH_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Qc,
    Qsc,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Qc => "qc",
            Mode::Qsc => "qsc",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "qc" => Ok(Mode::Qc),
            "qsc" => Ok(Mode::Qsc),
            _ => Err(format!("unknown mode `{s}` (expected qc or qsc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AcceptorKind {
    Subset,
    OrderedSubset,
    Counter,
}

#[derive(Debug, Clone)]
pub struct PermAcceptor {
    kind: AcceptorKind,
    actions: Vec<Action>,
    positions: HashMap<Action, Vec<usize>>,
    /// Previous position on the same process (ordered subset only).
    prev_same_process: Vec<Option<usize>>,
    /// Counter mode: per process, its positions in order, and the radix
    /// multiplier of its digit.
    lanes: Vec<Lane>,
    lane_of: HashMap<ProcessId, usize>,
}

#[derive(Debug, Clone)]
struct Lane {
    actions: Vec<Action>,
    mult: u64,
}

/// Builds the acceptor for `seg` under `mode` with the default width limit.
///
/// With `mode = Qsc` and a process bound at least the number of processes in
/// the segment, the counter representation is used.
pub fn build_perm_acceptor(seg: &Segment, mode: Mode, proc_bound: Option<usize>) -> Result<PermAcceptor> {
    PermAcceptor::for_mode(&seg.actions(), mode, proc_bound, DEFAULT_WIDTH_LIMIT)
}

impl PermAcceptor {
    pub fn for_mode(
        actions: &[Action],
        mode: Mode,
        proc_bound: Option<usize>,
        width_limit: usize,
    ) -> Result<Self> {
        let kind = match mode {
            Mode::Qc => AcceptorKind::Subset,
            Mode::Qsc => {
                let procs = count_processes(actions);
                match proc_bound {
                    Some(b) if procs <= b => AcceptorKind::Counter,
                    _ => AcceptorKind::OrderedSubset,
                }
            }
        };
        Self::new(actions, kind, width_limit)
    }

    pub fn new(actions: &[Action], kind: AcceptorKind, width_limit: usize) -> Result<Self> {
        let limit = width_limit.min(64);
        if kind != AcceptorKind::Counter && actions.len() > limit {
            return Err(Error::SegmentTooLarge {
                length: actions.len(),
                limit,
            });
        }
        let mut positions: HashMap<Action, Vec<usize>> = HashMap::new();
        let mut prev_same_process = Vec::with_capacity(actions.len());
        let mut last: HashMap<ProcessId, usize> = HashMap::new();
        for (i, a) in actions.iter().enumerate() {
            positions.entry(a.clone()).or_default().push(i);
            prev_same_process.push(last.insert(a.process, i));
        }

        let mut lanes = Vec::new();
        let mut lane_of = HashMap::new();
        if kind == AcceptorKind::Counter {
            let mut procs: Vec<ProcessId> = actions.iter().map(|a| a.process).collect();
            procs.sort_unstable();
            procs.dedup();
            let mut mult: u64 = 1;
            for p in procs {
                let lane: Vec<Action> = actions.iter().filter(|a| a.process == p).cloned().collect();
                let radix = lane.len() as u64 + 1;
                lane_of.insert(p, lanes.len());
                lanes.push(Lane { actions: lane, mult });
                mult = mult.checked_mul(radix).ok_or(Error::SegmentTooLarge {
                    length: actions.len(),
                    limit: 64,
                })?;
            }
        }

        Ok(PermAcceptor {
            kind,
            actions: actions.to_vec(),
            positions,
            prev_same_process,
            lanes,
            lane_of,
        })
    }

    pub fn kind(&self) -> AcceptorKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn initial(&self) -> u64 {
        0
    }

    pub fn is_final(&self, state: u64) -> bool {
        match self.kind {
            AcceptorKind::Subset | AcceptorKind::OrderedSubset => {
                state.count_ones() as usize == self.actions.len()
            }
            AcceptorKind::Counter => self
                .lanes
                .iter()
                .enumerate()
                .all(|(i, l)| self.digit(state, i) == l.actions.len() as u64),
        }
    }

    fn digit(&self, state: u64, lane: usize) -> u64 {
        let l = &self.lanes[lane];
        (state / l.mult) % (l.actions.len() as u64 + 1)
    }

    /// The state reached by reading `a`, if `a` is enabled.
    pub fn step(&self, state: u64, a: &Action) -> Option<u64> {
        match self.kind {
            AcceptorKind::Subset | AcceptorKind::OrderedSubset => {
                let i = *self
                    .positions
                    .get(a)?
                    .iter()
                    .find(|&&i| state & (1 << i) == 0)?;
                if self.kind == AcceptorKind::OrderedSubset {
                    if let Some(p) = self.prev_same_process[i] {
                        if state & (1 << p) == 0 {
                            return None;
                        }
                    }
                }
                Some(state | (1 << i))
            }
            AcceptorKind::Counter => {
                let lane = *self.lane_of.get(&a.process)?;
                let pos = self.digit(state, lane) as usize;
                let l = &self.lanes[lane];
                (l.actions.get(pos) == Some(a)).then(|| state + l.mult)
            }
        }
    }

    /// Distinct actions enabled in `state`, with their successor states.
    pub fn enabled(&self, state: u64) -> Vec<(Action, u64)> {
        let mut out: Vec<(Action, u64)> = Vec::new();
        for a in &self.actions {
            if out.iter().any(|(b, _)| b == a) {
                continue;
            }
            if let Some(next) = self.step(state, a) {
                out.push((a.clone(), next));
            }
        }
        out
    }

    pub fn accepts(&self, word: &[Action]) -> bool {
        let mut s = self.initial();
        for a in word {
            match self.step(s, a) {
                Some(n) => s = n,
                None => return false,
            }
        }
        self.is_final(s)
    }

    /// Number of states reachable from the initial state.
    pub fn state_count(&self) -> usize {
        let mut seen = std::collections::HashSet::from([self.initial()]);
        let mut stack = vec![self.initial()];
        while let Some(s) = stack.pop() {
            for (_, n) in self.enabled(s) {
                if seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        seen.len()
    }

    /// Every accepted word, in depth-first order. Exponential; for tests and
    /// small segments.
    pub fn language(&self) -> Vec<Vec<Action>> {
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.collect(self.initial(), &mut prefix, &mut out);
        out
    }

    fn collect(&self, s: u64, prefix: &mut Vec<Action>, out: &mut Vec<Vec<Action>>) {
        if self.is_final(s) {
            out.push(prefix.clone());
            return;
        }
        for (a, n) in self.enabled(s) {
            prefix.push(a);
            self.collect(n, prefix, out);
            prefix.pop();
        }
    }
}

pub(crate) fn count_processes(actions: &[Action]) -> usize {
    let mut procs: Vec<ProcessId> = actions.iter().map(|a| a.process).collect();
    procs.sort_unstable();
    procs.dedup();
    procs.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use itertools::Itertools;
    use std::collections::BTreeSet;

    fn acts(s: &str) -> Vec<Action> {
        s.split_whitespace().map(|t| t.parse().unwrap()).collect()
    }

    #[test]
    fn qc_two_events() {
        let w = acts("inv:1:a inv:2:b");
        let m = PermAcceptor::new(&w, AcceptorKind::Subset, 24).unwrap();
        assert_eq!(m.state_count(), 4);
        assert!(m.accepts(&w));
        assert!(m.accepts(&acts("inv:2:b inv:1:a")));
        assert!(!m.accepts(&acts("inv:2:b")));
        assert!(!m.accepts(&acts("inv:2:b inv:1:a inv:1:a")));
    }

    #[test]
    fn single_event() {
        let w = acts("inv:1:a");
        for kind in [AcceptorKind::Subset, AcceptorKind::OrderedSubset, AcceptorKind::Counter] {
            let m = PermAcceptor::new(&w, kind, 24).unwrap();
            assert_eq!(m.language(), vec![w.clone()]);
        }
    }

    #[test]
    fn qsc_keeps_process_order() {
        let w = acts("inv:1:a res:1:a inv:2:b res:2:b");
        let expected: BTreeSet<Vec<Action>> = w
            .iter()
            .cloned()
            .permutations(4)
            .filter(|p| {
                let pos = |x: &Action| p.iter().position(|y| y == x).unwrap();
                pos(&w[0]) < pos(&w[1]) && pos(&w[2]) < pos(&w[3])
            })
            .collect();
        assert_eq!(expected.len(), 6);
        for kind in [AcceptorKind::OrderedSubset, AcceptorKind::Counter] {
            let m = PermAcceptor::new(&w, kind, 24).unwrap();
            let lang: BTreeSet<Vec<Action>> = m.language().into_iter().collect();
            assert_eq!(lang, expected, "{kind:?}");
        }
        let counter = PermAcceptor::new(&w, AcceptorKind::Counter, 24).unwrap();
        assert_eq!(counter.state_count(), 9);
    }

    #[test]
    fn width_limit() {
        let w: Vec<Action> = (0..30).map(|p| Action::invoke(p, "a")).collect();
        assert!(matches!(
            PermAcceptor::new(&w, AcceptorKind::Subset, 24),
            Err(Error::SegmentTooLarge { length: 30, limit: 24 })
        ));
        assert!(PermAcceptor::new(&w, AcceptorKind::Counter, 24).is_ok());
    }

    #[test]
    fn mode_selection() {
        let w = acts("inv:1:a res:1:a inv:2:b res:2:b");
        let k = |m, b| PermAcceptor::for_mode(&w, m, b, 24).unwrap().kind();
        assert_eq!(k(Mode::Qc, Some(8)), AcceptorKind::Subset);
        assert_eq!(k(Mode::Qsc, None), AcceptorKind::OrderedSubset);
        assert_eq!(k(Mode::Qsc, Some(1)), AcceptorKind::OrderedSubset);
        assert_eq!(k(Mode::Qsc, Some(2)), AcceptorKind::Counter);
    }
}
