//! Bounded correctness: is every run of an implementation allowed by the
//! specification, given that the implementation never performs more than
//! `bound` events between two quiescent points?
//!
//! The search runs breadth-first over pairs (quiescent implementation state,
//! set of spec states). From each pair, every end-to-end quiescent segment
//! the implementation can perform is matched against the spec up to the
//! mode's equivalence; the spec states reached form the next pair. A segment
//! that ends in a final implementation state with no final spec state
//! reachable is a counterexample.
//!
//! Each breadth-first level is expanded in two parallelizable phases
//! (segment enumeration, then spec matching) followed by a sequential pass in
//! frontier order, so verdicts and witnesses do not depend on whether the
//! parallel backend is used.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use crate::acceptor::{Mode, PermAcceptor, DEFAULT_WIDTH_LIMIT};
use crate::automaton::{Automaton, StateId};
use crate::error::{Error, Result};
use crate::event::{Action, Label, ProcessId};
use crate::history::{Run, Segment};
use crate::membership::reachable_through;
use crate::parallel::map_ordered;
use crate::quiescence::{build_impl_delta, build_spec_delta, DeltaAutomaton};
use crate::verdict::{Outcome, Verdict};

pub const DEFAULT_PAIR_LIMIT: usize = 1_000_000;

/// What to do with a path that is still open when it reaches the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Overflow {
    /// Fail with [`Error::SegmentBoundExceeded`]: the implementation does
    /// not respect the bound.
    #[default]
    Error,
    /// Drop the path and check only the segments that fit. The verdict then
    /// covers exactly the runs whose segments are all within the bound.
    Prune,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectnessOptions {
    pub bound: usize,
    pub overflow: Overflow,
    pub pair_limit: usize,
    pub width_limit: usize,
    pub proc_bound: Option<usize>,
    pub parallel: bool,
}

impl CorrectnessOptions {
    pub fn new(bound: usize) -> Self {
        CorrectnessOptions {
            bound,
            overflow: Overflow::Error,
            pair_limit: DEFAULT_PAIR_LIMIT,
            width_limit: DEFAULT_WIDTH_LIMIT,
            proc_bound: None,
            parallel: false,
        }
    }
}

/// A segment of the implementation: its label and the quiescent state it
/// ends in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ImplSegment {
    pub actions: Vec<Action>,
    pub target: StateId,
}

/// Every end-to-end quiescent label of at most `bound` events from the
/// quiescent state `q` of the δ-extended implementation, with the quiescent
/// states each one can end in.
///
/// Paths are explored word by word (all automaton paths sharing a label are
/// merged), in order of first transition declaration.
pub fn enumerate_segments(
    qd: &DeltaAutomaton,
    q: StateId,
    bound: usize,
    overflow: Overflow,
) -> Result<Vec<ImplSegment>> {
    let (segments, exceeded) = collect_segments(qd, q, bound)?;
    match exceeded {
        Some(e) if overflow == Overflow::Error => Err(e),
        _ => Ok(segments),
    }
}

/// The segments within the bound, and the first path that outgrew it.
fn collect_segments(qd: &DeltaAutomaton, q: StateId, bound: usize) -> Result<(Vec<ImplSegment>, Option<Error>)> {
    if !qd.is_segment_end(q) {
        return Err(Error::InvalidInstance(format!(
            "state {} is not a quiescent state",
            qd.base().state_name(q)
        )));
    }
    let start = qd.delta_copy(q).unwrap_or(q);
    let mut walker = Walker {
        qd,
        bound,
        word: Vec::new(),
        out: Vec::new(),
        exceeded: None,
    };
    walker.walk(&[start]);
    Ok((walker.out, walker.exceeded))
}

struct Walker<'a> {
    qd: &'a DeltaAutomaton,
    bound: usize,
    word: Vec<Action>,
    out: Vec<ImplSegment>,
    exceeded: Option<Error>,
}

impl Walker<'_> {
    fn walk(&mut self, states: &[StateId]) {
        let a = self.qd.base();
        // Group outgoing transitions by letter, keeping first-seen order.
        let mut by_letter: Vec<(usize, Vec<StateId>)> = Vec::new();
        for &s in states {
            for t in a.outgoing(s) {
                if a.letter(t.letter).is_delta() {
                    continue;
                }
                match by_letter.iter_mut().find(|(l, _)| *l == t.letter) {
                    Some((_, targets)) => targets.push(t.target),
                    None => by_letter.push((t.letter, vec![t.target])),
                }
            }
        }
        for (letter, mut targets) in by_letter {
            let Label::Action(action) = a.letter(letter) else {
                unreachable!("delta letters are skipped")
            };
            targets.sort_unstable();
            targets.dedup();
            self.word.push(action.clone());
            let (ends, open): (Vec<StateId>, Vec<StateId>) =
                targets.into_iter().partition(|&s| self.qd.is_segment_end(s));
            for target in ends {
                self.out.push(ImplSegment {
                    actions: self.word.clone(),
                    target,
                });
            }
            if !open.is_empty() {
                if self.word.len() >= self.bound {
                    let extensible = open
                        .iter()
                        .any(|&s| a.outgoing(s).any(|t| !a.letter(t.letter).is_delta()));
                    if extensible && self.exceeded.is_none() {
                        self.exceeded = Some(Error::SegmentBoundExceeded {
                            bound: self.bound,
                            length: self.word.len(),
                            prefix: Run::from_actions(self.word.iter().cloned()).to_string(),
                        });
                    }
                } else {
                    self.walk(&open);
                }
            }
            self.word.pop();
        }
    }
}

/// The part of a segment that survives the mode's equivalence: its multiset
/// of actions (QC) or its per-process sequences (QSC).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SegmentSignature {
    Multiset(Vec<Action>),
    PerProcess(Vec<(ProcessId, Vec<Action>)>),
}

impl SegmentSignature {
    pub fn of(actions: &[Action], mode: Mode) -> Self {
        match mode {
            Mode::Qc => {
                let mut v = actions.to_vec();
                v.sort();
                SegmentSignature::Multiset(v)
            }
            Mode::Qsc => {
                let mut lanes: BTreeMap<ProcessId, Vec<Action>> = BTreeMap::new();
                for a in actions {
                    lanes.entry(a.process).or_default().push(a.clone());
                }
                SegmentSignature::PerProcess(lanes.into_iter().collect())
            }
        }
    }

    /// One word with this signature.
    pub fn representative(&self) -> Vec<Action> {
        match self {
            SegmentSignature::Multiset(v) => v.clone(),
            SegmentSignature::PerProcess(lanes) => {
                lanes.iter().flat_map(|(_, l)| l.iter().cloned()).collect()
            }
        }
    }
}

/// An implementation segment reduced to what the spec can observe.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SegmentBehavior {
    pub signature: SegmentSignature,
    pub target: StateId,
    /// The first label found with this signature and target.
    pub example: Vec<Action>,
}

/// Segments from `q`, deduplicated by (signature, target state).
pub fn segment_behaviors(
    qd: &DeltaAutomaton,
    q: StateId,
    mode: Mode,
    bound: usize,
    overflow: Overflow,
) -> Result<Vec<SegmentBehavior>> {
    let (list, exceeded) = behaviors_within(qd, q, mode, bound)?;
    match exceeded {
        Some(e) if overflow == Overflow::Error => Err(e),
        _ => Ok(list),
    }
}

type Behaviors = (Vec<SegmentBehavior>, Option<Error>);

fn behaviors_within(qd: &DeltaAutomaton, q: StateId, mode: Mode, bound: usize) -> Result<Behaviors> {
    let (segments, exceeded) = collect_segments(qd, q, bound)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for seg in segments {
        let signature = SegmentSignature::of(&seg.actions, mode);
        if seen.insert((signature.clone(), seg.target)) {
            out.push(SegmentBehavior {
                signature,
                target: seg.target,
                example: seg.actions,
            });
        }
    }
    Ok((out, exceeded))
}

/// The spec states reachable from some state of `from` by a path whose
/// label is equivalent to `seg` under `mode`, ascending.
pub fn spec_successors(
    spec: &Automaton<Action>,
    from: &[StateId],
    seg: &[Action],
    mode: Mode,
    width_limit: usize,
    proc_bound: Option<usize>,
) -> Result<Vec<StateId>> {
    let acceptor = PermAcceptor::for_mode(seg, mode, proc_bound, width_limit)?;
    let mut out: Vec<StateId> = from
        .iter()
        .flat_map(|&s| reachable_through(spec, &acceptor, s).0)
        .collect();
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

struct Node {
    q: StateId,
    set: Vec<StateId>,
    parent: Option<(usize, Vec<Action>)>,
}

type SuccResult = Result<(Vec<StateId>, usize)>;

/// Bounded correctness of `imp` against `spec` under `mode`.
///
/// With [`Overflow::Error`], a path that outgrows the bound is reported only
/// if no counterexample is found among the segments that fit: such a
/// counterexample is a genuine one either way.
pub fn check_correctness(
    spec: &Automaton<Action>,
    imp: &Automaton<Action>,
    mode: Mode,
    opts: &CorrectnessOptions,
) -> Result<Verdict> {
    build_spec_delta(spec)?;
    let qd = build_impl_delta(imp)?;
    let coreachable = imp.coreachable();

    let mut nodes: Vec<Node> = vec![Node {
        q: imp.initial(),
        set: vec![spec.initial()],
        parent: None,
    }];
    let mut stats = crate::verdict::Stats {
        bound: Some(opts.bound),
        ..Default::default()
    };

    if imp.is_final(imp.initial()) && !spec.is_final(spec.initial()) {
        stats.pairs = 1;
        return Ok(fail(&nodes, 0, Vec::new(), stats));
    }

    let mut visited: HashSet<(StateId, Vec<StateId>)> =
        HashSet::from([(imp.initial(), vec![spec.initial()])]);
    let mut behaviors: HashMap<StateId, Arc<Result<Behaviors>>> = HashMap::new();
    let mut exceeded: Option<Error> = None;
    let mut successors: HashMap<(StateId, SegmentSignature), SuccResult> = HashMap::new();
    let mut frontier: Vec<usize> = vec![0];

    while !frontier.is_empty() {
        // Phase 1: segments of every implementation state on the frontier.
        let mut qs: Vec<StateId> = frontier.iter().map(|&n| nodes[n].q).collect();
        qs.sort_unstable();
        qs.dedup();
        qs.retain(|q| !behaviors.contains_key(q));
        let found = map_ordered(&qs, opts.parallel, |&q| behaviors_within(&qd, q, mode, opts.bound));
        for (q, b) in qs.into_iter().zip(found) {
            if let Ok((list, _)) = &b {
                stats.segments += list.len();
            }
            behaviors.insert(q, Arc::new(b));
        }

        // Phase 2: spec successors for every (spec state, signature) needed.
        let mut wanted: Vec<(StateId, SegmentSignature)> = Vec::new();
        let mut wanted_set = HashSet::new();
        for &n in &frontier {
            if let Ok((list, _)) = behaviors[&nodes[n].q].as_ref() {
                for b in list {
                    for &s in &nodes[n].set {
                        let key = (s, b.signature.clone());
                        if !successors.contains_key(&key) && wanted_set.insert(key.clone()) {
                            wanted.push(key);
                        }
                    }
                }
            }
        }
        let computed = map_ordered(&wanted, opts.parallel, |(s, sig)| {
            let acceptor =
                PermAcceptor::for_mode(&sig.representative(), mode, opts.proc_bound, opts.width_limit)?;
            Ok(reachable_through(spec, &acceptor, *s))
        });
        for (key, r) in wanted.into_iter().zip(computed) {
            if let Ok((_, explored)) = &r {
                stats.explored += explored;
            }
            successors.insert(key, r);
        }

        // Phase 3: sequential expansion in frontier order.
        let mut next = Vec::new();
        for &n in &frontier {
            let list = match behaviors[&nodes[n].q].as_ref() {
                Ok((list, over)) => {
                    if exceeded.is_none() && opts.overflow == Overflow::Error {
                        exceeded.clone_from(over);
                    }
                    list
                }
                Err(e) => return Err(e.clone()),
            };
            for b in list {
                let mut set = Vec::new();
                for &s in &nodes[n].set {
                    match &successors[&(s, b.signature.clone())] {
                        Ok((states, _)) => set.extend_from_slice(states),
                        Err(e) => return Err(e.clone()),
                    }
                }
                set.sort_unstable();
                set.dedup();
                if imp.is_final(b.target) && !set.iter().any(|&s| spec.is_final(s)) {
                    stats.pairs = visited.len();
                    return Ok(fail(&nodes, n, b.example.clone(), stats));
                }
                if !coreachable[b.target] {
                    continue;
                }
                if visited.insert((b.target, set.clone())) {
                    if visited.len() > opts.pair_limit {
                        return Err(Error::ResourceLimit {
                            limit: opts.pair_limit,
                        });
                    }
                    nodes.push(Node {
                        q: b.target,
                        set,
                        parent: Some((n, b.example.clone())),
                    });
                    next.push(nodes.len() - 1);
                }
            }
        }
        frontier = next;
    }

    if let Some(e) = exceeded {
        return Err(e);
    }
    stats.pairs = visited.len();
    let mut v = Verdict::new(Outcome::Pass);
    v.stats = stats;
    Ok(v)
}

fn fail(nodes: &[Node], at: usize, last: Vec<Action>, stats: crate::verdict::Stats) -> Verdict {
    let mut segments = vec![last];
    let mut cur = at;
    while let Some((parent, seg)) = &nodes[cur].parent {
        segments.push(seg.clone());
        cur = *parent;
    }
    segments.reverse();
    let mut points = vec![0];
    for s in &segments {
        points.push(points.last().unwrap() + s.len());
    }
    let witness = Run::from_actions(segments.concat());
    let mut v = Verdict::new(Outcome::Fail);
    let tail = segments.last().map_or(0, Vec::len);
    if tail > 0 {
        let events: Vec<_> = witness.events().cloned().collect();
        v.unmatched = Some(Segment::new_unchecked(events[events.len() - tail..].to_vec()));
    }
    v.witness = Some(witness);
    v.quiescent_points = points;
    v.stats = stats;
    v
}

/// Occurrence counts of each symbol in a word.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParikhVector {
    counts: BTreeMap<String, usize>,
}

impl ParikhVector {
    pub fn of<S: AsRef<str>>(word: &[S]) -> Self {
        let mut counts = BTreeMap::new();
        for s in word {
            *counts.entry(s.as_ref().to_string()).or_insert(0) += 1;
        }
        ParikhVector { counts }
    }

    pub fn count(&self, symbol: &str) -> usize {
        self.counts.get(symbol).copied().unwrap_or(0)
    }

    /// Total number of symbols, i.e. the length of any word with this image.
    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }
}

impl fmt::Display for ParikhVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (s, n)) in self.counts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}: {n}")?;
        }
        f.write_str(")")
    }
}

/// Whether every Parikh image of `L(a)` is a Parikh image of `L(b)`, for
/// automata with finite languages.
pub fn parikh_inclusion_finite(a: &Automaton<String>, b: &Automaton<String>) -> Result<bool> {
    let images = |m: &Automaton<String>| -> Result<HashSet<ParikhVector>> {
        Ok(m.finite_language()?.iter().map(|w| ParikhVector::of(w)).collect())
    };
    let ia = images(a)?;
    let ib = images(b)?;
    Ok(ia.is_subset(&ib))
}
