//! Runs, legality, quiescence, segmentation and the projection operators.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::event::{Action, Event, Label, ProcessId, DELTA_TOKEN};

/// One element of a run: an event or the quiescence marker δ.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Token {
    Delta,
    Event(Event),
}

impl Token {
    pub fn event(&self) -> Option<&Event> {
        match self {
            Token::Delta => None,
            Token::Event(e) => Some(e),
        }
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, Token::Delta)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Delta => f.write_str(DELTA_TOKEN),
            Token::Event(e) => e.fmt(f),
        }
    }
}

/// A finite sequence of events, possibly containing δ markers.
///
/// Occurrence indices are assigned on construction: the n-th occurrence of
/// an identical action gets `occ = n`, which keeps every event of a run
/// unique.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Run {
    tokens: Vec<Token>,
}

impl Run {
    pub fn empty() -> Self {
        Run::default()
    }

    /// Builds a run from labels, numbering repeated actions left to right.
    pub fn from_labels<I>(labels: I) -> Self
    where
        I: IntoIterator<Item = Label>,
    {
        let mut seen: HashMap<Action, u32> = HashMap::new();
        let tokens = labels
            .into_iter()
            .map(|l| match l {
                Label::Delta => Token::Delta,
                Label::Action(action) => {
                    let n = seen.entry(action.clone()).or_insert(0);
                    let occ = *n;
                    *n += 1;
                    Token::Event(Event { action, occ })
                }
            })
            .collect();
        Run { tokens }
    }

    pub fn from_actions<I>(actions: I) -> Self
    where
        I: IntoIterator<Item = Action>,
    {
        Run::from_labels(actions.into_iter().map(Label::Action))
    }

    /// Parses whitespace-separated tokens; `#` starts a comment that runs to
    /// the end of the line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut labels = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("");
            let mut offset = 0;
            for tok in content.split_whitespace() {
                let col = content[offset..].find(tok).map(|i| i + offset).unwrap_or(0);
                offset = col + tok.len();
                let label =
                    Label::parse_token(tok).map_err(|m| Error::parse(lineno + 1, col + 1, m))?;
                labels.push(label);
            }
        }
        Ok(Run::from_labels(labels))
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains_delta(&self) -> bool {
        self.tokens.iter().any(Token::is_delta)
    }

    /// Events in order, skipping δ.
    pub fn events(&self) -> impl Iterator<Item = &Event> + '_ {
        self.tokens.iter().filter_map(Token::event)
    }

    pub fn actions(&self) -> Vec<Action> {
        self.events().map(|e| e.action.clone()).collect()
    }

    pub fn labels(&self) -> Vec<Label> {
        self.tokens
            .iter()
            .map(|t| match t {
                Token::Delta => Label::Delta,
                Token::Event(e) => Label::Action(e.action.clone()),
            })
            .collect()
    }

    /// Processes occurring in the run, ascending.
    pub fn processes(&self) -> BTreeSet<ProcessId> {
        self.events().map(Event::process).collect()
    }

    /// Concatenation, renumbering occurrence indices over the result.
    pub fn concat(&self, other: &Run) -> Run {
        Run::from_labels(self.labels().into_iter().chain(other.labels()))
    }
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            t.fmt(f)?;
        }
        Ok(())
    }
}

impl FromStr for Run {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Run::parse(s)
    }
}

/// A nonempty, end-to-end quiescent piece of a legal quiescent run.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segment {
    events: Vec<Event>,
}

impl Segment {
    pub(crate) fn new_unchecked(events: Vec<Event>) -> Self {
        debug_assert!(!events.is_empty());
        Segment { events }
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn actions(&self) -> Vec<Action> {
        self.events.iter().map(|e| e.action.clone()).collect()
    }

    pub fn to_run(&self) -> Run {
        Run {
            tokens: self.events.iter().cloned().map(Token::Event).collect(),
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_run().fmt(f)
    }
}

/// Legality: for every process the projection alternates invoke/response,
/// starting with an invoke, and each adjacent pair matches. δ is ignored.
pub fn is_legal(run: &Run) -> bool {
    legality_violation(run).is_none()
}

fn legality_violation(run: &Run) -> Option<String> {
    let mut open: HashMap<ProcessId, &Action> = HashMap::new();
    for (i, e) in run.events().enumerate() {
        let p = e.process();
        match open.get(&p) {
            None if e.is_invoke() => {
                open.insert(p, &e.action);
            }
            None => return Some(format!("event {i} ({e}) responds with no open call on process {p}")),
            Some(inv) if inv.matches(&e.action) => {
                open.remove(&p);
            }
            Some(inv) => {
                return Some(format!("event {i} ({e}) follows unmatched {inv} on process {p}"))
            }
        }
    }
    None
}

/// Quiescence: no pending invocation. Responses claim the leftmost unclaimed
/// matching invocation of their process.
pub fn is_quiescent(run: &Run) -> bool {
    let mut pending: HashMap<(ProcessId, &str), usize> = HashMap::new();
    for e in run.events() {
        let key = (e.process(), &*e.action.op);
        if e.is_invoke() {
            *pending.entry(key).or_insert(0) += 1;
        } else if let Some(n) = pending.get_mut(&key) {
            if *n > 0 {
                *n -= 1;
            }
        }
    }
    pending.values().all(|&n| n == 0)
}

/// Positions (in the δ-free event sequence) at which a legal run is
/// quiescent, including 0 and the end when it is quiescent there.
pub fn quiescent_points(run: &Run) -> Vec<usize> {
    let mut open: BTreeSet<ProcessId> = BTreeSet::new();
    let mut points = vec![0];
    for (i, e) in run.events().enumerate() {
        if e.is_invoke() {
            open.insert(e.process());
        } else {
            open.remove(&e.process());
        }
        if open.is_empty() {
            points.push(i + 1);
        }
    }
    points
}

/// Splits a legal quiescent run (δ ignored) into its end-to-end quiescent
/// segments.
pub fn segment(run: &Run) -> Result<Vec<Segment>> {
    if let Some(why) = legality_violation(run) {
        return Err(Error::NotLegal(why));
    }
    if !is_quiescent(run) {
        return Err(Error::NotQuiescent(format!("{run}")));
    }
    let events: Vec<Event> = run.events().cloned().collect();
    let points = quiescent_points(run);
    Ok(points
        .windows(2)
        .map(|w| Segment::new_unchecked(events[w[0]..w[1]].to_vec()))
        .collect())
}

/// π_p: the events of process `p`, δ dropped.
pub fn project_process(run: &Run, p: ProcessId) -> Run {
    Run {
        tokens: run
            .tokens
            .iter()
            .filter(|t| matches!(t, Token::Event(e) if e.process() == p))
            .cloned()
            .collect(),
    }
}

/// π_p^δ: the events of process `p` together with every δ.
pub fn project_process_delta(run: &Run, p: ProcessId) -> Run {
    Run {
        tokens: run
            .tokens
            .iter()
            .filter(|t| match t {
                Token::Delta => true,
                Token::Event(e) => e.process() == p,
            })
            .cloned()
            .collect(),
    }
}

/// π_Σ: the run with every δ removed.
pub fn strip_delta(run: &Run) -> Run {
    Run {
        tokens: run.tokens.iter().filter(|t| !t.is_delta()).cloned().collect(),
    }
}

/// The ≈ relation: equal δ-keeping projections on every process that occurs
/// in either run.
///
/// Occurrence indices are part of the comparison, so both runs should be
/// numbered the same way (which [`Run`] constructors guarantee for runs over
/// the same actions).
pub fn equiv_qsc(a: &Run, b: &Run) -> bool {
    let procs: BTreeSet<ProcessId> = a.processes().union(&b.processes()).copied().collect();
    if procs.is_empty() {
        return count_delta(a) == count_delta(b);
    }
    procs
        .into_iter()
        .all(|p| project_process_delta(a, p) == project_process_delta(b, p))
}

fn count_delta(r: &Run) -> usize {
    r.tokens.iter().filter(|t| t.is_delta()).count()
}

/// The ∼_U relation restricted to one segment: same multiset of events.
pub fn equiv_qc_segment(a: &[Event], b: &[Event]) -> bool {
    let mut x: Vec<&Event> = a.iter().collect();
    let mut y: Vec<&Event> = b.iter().collect();
    x.sort();
    y.sort();
    x == y
}

/// Breadth-first closure of a run under adjacent swaps of events on
/// different processes. Exponential; meant for small runs in tests and
/// diagnostics.
pub fn rewrite_closure_distinct_processes(run: &Run) -> BTreeSet<Vec<Event>> {
    let start: Vec<Event> = run.events().cloned().collect();
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([start.clone()]);
    seen.insert(start);
    while let Some(w) = queue.pop_front() {
        for i in 0..w.len().saturating_sub(1) {
            if w[i].process() != w[i + 1].process() {
                let mut v = w.clone();
                v.swap(i, i + 1);
                if seen.insert(v.clone()) {
                    queue.push_back(v);
                }
            }
        }
    }
    seen
}
