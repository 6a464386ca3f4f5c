//! Membership: is a run allowed by a specification?
//!
//! The run is split into end-to-end quiescent segments; each segment gets a
//! permutation acceptor, and the concatenation of those acceptors is
//! intersected with the specification on the fly. The search is depth-first
//! over (segment, acceptor state, spec state) and follows spec transitions in
//! declaration order, so the witness it returns is the lexicographically
//! least accepting spec path.

use std::collections::HashSet;

use crate::acceptor::{PermAcceptor, DEFAULT_WIDTH_LIMIT};
use crate::automaton::{Automaton, StateId};
use crate::error::{Error, Result};
use crate::event::{Action, ProcessId};
use crate::history::{quiescent_points, segment, strip_delta, Run, Segment, Token};
use crate::parallel::map_ordered;
use crate::verdict::{Outcome, Verdict};

pub use crate::acceptor::Mode;

/// Default run length accepted by [`check_membership_brute`].
pub const BRUTE_FORCE_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipOptions {
    /// Maximum events per segment; longer segments are an error.
    pub bound: Option<usize>,
    /// Use the per-process counter acceptor for QSC when a segment has at
    /// most this many processes.
    pub proc_bound: Option<usize>,
    /// Maximum segment length for the subset acceptors.
    pub width_limit: usize,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        MembershipOptions {
            bound: None,
            proc_bound: None,
            width_limit: DEFAULT_WIDTH_LIMIT,
        }
    }
}

/// Strips δ, segments, and reports δ markers that disagree with the
/// computed quiescent points.
fn prepare(run: &Run) -> Result<(Vec<Segment>, Vec<String>)> {
    let mut warnings = Vec::new();
    let stripped = strip_delta(run);
    let segments = segment(&stripped)?;
    if run.contains_delta() {
        let mut marked = Vec::new();
        let mut seen = 0;
        for t in run.tokens() {
            match t {
                Token::Delta => marked.push(seen),
                Token::Event(_) => seen += 1,
            }
        }
        marked.dedup();
        let points = quiescent_points(&stripped);
        if marked != points {
            warnings.push(format!(
                "delta markers at event positions {marked:?} differ from the quiescent points {points:?}; using the latter"
            ));
        }
    }
    Ok((segments, warnings))
}

fn boundaries(segments: &[Segment]) -> Vec<usize> {
    let mut points = vec![0];
    let mut acc = 0;
    for s in segments {
        acc += s.len();
        points.push(acc);
    }
    points
}

/// Decides whether `run` is allowed by `spec` under `mode`.
///
/// δ markers in the input are removed first and segments are recomputed
/// from the events.
pub fn check_membership(
    spec: &Automaton<Action>,
    run: &Run,
    mode: Mode,
    opts: &MembershipOptions,
) -> Result<Verdict> {
    let (segments, warnings) = prepare(run)?;
    if let Some(bound) = opts.bound {
        if let Some((i, s)) = segments.iter().enumerate().find(|(_, s)| s.len() > bound) {
            return Err(Error::BoundExceeded {
                segment: i,
                length: s.len(),
                bound,
            });
        }
    }
    let acceptors = segments
        .iter()
        .map(|s| PermAcceptor::for_mode(&s.actions(), mode, opts.proc_bound, opts.width_limit))
        .collect::<Result<Vec<_>>>()?;

    let (path, explored) = search(spec, &acceptors, spec.initial());
    let mut verdict = Verdict::new(if path.is_some() {
        Outcome::Pass
    } else {
        Outcome::Fail
    });
    if let Some(path) = path {
        verdict.witness = Some(Run::from_actions(path));
        verdict.quiescent_points = boundaries(&segments);
    }
    verdict.stats.explored = explored;
    verdict.stats.segments = segments.len();
    verdict.stats.bound = opts.bound;
    verdict.warnings = warnings;
    Ok(verdict)
}

/// Lex-least accepting path through the product of the concatenated
/// acceptors and the spec, starting at `start`. Returns the path label (if
/// any) and the number of product states visited.
fn search(
    spec: &Automaton<Action>,
    acceptors: &[PermAcceptor],
    start: StateId,
) -> (Option<Vec<Action>>, usize) {
    type Node = (usize, u64, StateId);
    // Leaving a finished segment is a silent move to the next one.
    let normalize = |(mut k, mut a, s): Node| {
        while k < acceptors.len() && acceptors[k].is_final(a) {
            k += 1;
            a = 0;
        }
        (k, a, s)
    };
    struct Frame {
        node: Node,
        next_edge: usize,
        via: Option<usize>,
    }

    let root = normalize((0, 0, start));
    let mut visited: HashSet<Node> = HashSet::from([root]);
    let mut stack = vec![Frame {
        node: root,
        next_edge: 0,
        via: None,
    }];
    let label = |stack: &[Frame]| -> Vec<Action> {
        stack
            .iter()
            .filter_map(|f| f.via)
            .map(|t| spec.letter(spec.transitions()[t].letter).clone())
            .collect()
    };

    while let Some(top) = stack.last_mut() {
        let (k, a, s) = top.node;
        if k == acceptors.len() {
            if spec.is_final(s) {
                return (Some(label(&stack)), visited.len());
            }
            stack.pop();
            continue;
        }
        let edges = spec.outgoing_ids(s);
        let mut pushed = None;
        while top.next_edge < edges.len() {
            let ti = edges[top.next_edge];
            top.next_edge += 1;
            let t = &spec.transitions()[ti];
            if let Some(a2) = acceptors[k].step(a, spec.letter(t.letter)) {
                let child = normalize((k, a2, t.target));
                if visited.insert(child) {
                    pushed = Some(Frame {
                        node: child,
                        next_edge: 0,
                        via: Some(ti),
                    });
                    break;
                }
            }
        }
        match pushed {
            Some(f) => stack.push(f),
            None => {
                stack.pop();
            }
        }
    }
    (None, visited.len())
}

/// All spec states reachable from `start` by a path whose label is accepted
/// by `acceptor`, in ascending order.
pub(crate) fn reachable_through(
    spec: &Automaton<Action>,
    acceptor: &PermAcceptor,
    start: StateId,
) -> (Vec<StateId>, usize) {
    let mut visited: HashSet<(u64, StateId)> = HashSet::from([(0, start)]);
    let mut stack = vec![(0u64, start)];
    let mut ends = Vec::new();
    while let Some((a, s)) = stack.pop() {
        if acceptor.is_final(a) {
            ends.push(s);
            continue;
        }
        for t in spec.outgoing(s) {
            if let Some(a2) = acceptor.step(a, spec.letter(t.letter)) {
                if visited.insert((a2, t.target)) {
                    stack.push((a2, t.target));
                }
            }
        }
    }
    ends.sort_unstable();
    ends.dedup();
    (ends, visited.len())
}

/// Independent oracle: enumerates every (order-preserving, for QSC)
/// permutation of every segment and runs it through the spec.
///
/// Runs with more than `limit` events are rejected with [`Error::TooLarge`].
pub fn check_membership_brute(
    spec: &Automaton<Action>,
    run: &Run,
    mode: Mode,
    limit: usize,
) -> Result<Verdict> {
    let (segments, warnings) = prepare(run)?;
    let total: usize = segments.iter().map(Segment::len).sum();
    if total > limit {
        return Err(Error::TooLarge {
            length: total,
            limit,
        });
    }
    let segs: Vec<Vec<Action>> = segments.iter().map(Segment::actions).collect();
    let mut brute = Brute {
        spec,
        segs: &segs,
        mode,
        failed: HashSet::new(),
        explored: 0,
    };
    let found = brute.search_segment(0, spec.initial());
    let mut verdict = Verdict::new(if found.is_some() {
        Outcome::Pass
    } else {
        Outcome::Fail
    });
    if let Some(mut w) = found {
        w.reverse();
        verdict.witness = Some(Run::from_actions(w));
        verdict.quiescent_points = boundaries(&segments);
    }
    verdict.stats.explored = brute.explored;
    verdict.stats.segments = segments.len();
    verdict.warnings = warnings;
    Ok(verdict)
}

struct Brute<'a> {
    spec: &'a Automaton<Action>,
    segs: &'a [Vec<Action>],
    mode: Mode,
    failed: HashSet<(usize, StateId)>,
    explored: usize,
}

impl Brute<'_> {
    /// A witness for segments `k..` from spec state `s`, reversed.
    fn search_segment(&mut self, k: usize, s: StateId) -> Option<Vec<Action>> {
        if k == self.segs.len() {
            return self.spec.is_final(s).then(Vec::new);
        }
        if self.failed.contains(&(k, s)) {
            return None;
        }
        let mut used = vec![false; self.segs[k].len()];
        let found = self.permute(k, s, &mut used, 0);
        if found.is_none() {
            self.failed.insert((k, s));
        }
        found
    }

    fn permute(&mut self, k: usize, s: StateId, used: &mut [bool], depth: usize) -> Option<Vec<Action>> {
        self.explored += 1;
        let segs = self.segs;
        let seg = &segs[k];
        if depth == seg.len() {
            return self.search_segment(k + 1, s);
        }
        let mut tried: Vec<&Action> = Vec::new();
        for i in 0..seg.len() {
            if used[i] || tried.contains(&&seg[i]) {
                continue;
            }
            if self.mode == Mode::Qsc && !self.predecessors_used(seg, used, i) {
                continue;
            }
            tried.push(&seg[i]);
            let Some(letter) = self.spec.letter_id(&seg[i]) else {
                continue;
            };
            let targets: Vec<StateId> = self.spec.successors(s, letter).collect();
            used[i] = true;
            for t in targets {
                if let Some(mut w) = self.permute(k, t, used, depth + 1) {
                    w.push(seg[i].clone());
                    used[i] = false;
                    return Some(w);
                }
            }
            used[i] = false;
        }
        None
    }

    fn predecessors_used(&self, seg: &[Action], used: &[bool], i: usize) -> bool {
        let p: ProcessId = seg[i].process;
        (0..i).all(|j| seg[j].process != p || used[j])
    }
}

/// Checks many runs against one spec, in parallel when asked. Results are in
/// input order and identical to checking each run alone.
pub fn check_membership_batch(
    spec: &Automaton<Action>,
    runs: &[Run],
    mode: Mode,
    opts: &MembershipOptions,
    parallel: bool,
) -> Vec<Result<Verdict>> {
    map_ordered(runs, parallel, |r| check_membership(spec, r, mode, opts))
}

/// Whether `witness` is equivalent to `input` segment by segment: the same
/// multiset of actions per segment (QC), or the same per-process sequences
/// (QSC). Segments are those of `input`; δ is ignored in both runs.
pub fn witness_equivalent(input: &Run, witness: &Run, mode: Mode) -> bool {
    let Ok(segments) = segment(&strip_delta(input)) else {
        return false;
    };
    let w = witness.actions();
    let total: usize = segments.iter().map(Segment::len).sum();
    if w.len() != total {
        return false;
    }
    let mut at = 0;
    for seg in &segments {
        let mut a = seg.actions();
        let mut b = w[at..at + seg.len()].to_vec();
        at += seg.len();
        match mode {
            Mode::Qc => {
                a.sort();
                b.sort();
            }
            Mode::Qsc => {
                a.sort_by_key(|x| x.process);
                b.sort_by_key(|x| x.process);
            }
        }
        if a != b {
            return false;
        }
    }
    true
}
