//! Quiescence labeling and the δ-extensions of specification and
//! implementation automata.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use crate::automaton::{Automaton, AutomatonBuilder, Letter, StateId};
use crate::error::{Error, Result};
use crate::event::{Action, Label, ProcessId};

/// Letters that may carry an action. δ carries none.
pub trait ActionLetter: Letter {
    fn as_action(&self) -> Option<&Action>;
}

impl ActionLetter for Action {
    fn as_action(&self) -> Option<&Action> {
        Some(self)
    }
}

impl ActionLetter for Label {
    fn as_action(&self) -> Option<&Action> {
        self.action()
    }
}

/// Open calls per process: process → operation name.
pub type Pending = BTreeMap<ProcessId, Arc<str>>;

/// Per-state pending calls. Unreachable states have no label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiescenceLabeling {
    pending: Vec<Option<Pending>>,
}

impl QuiescenceLabeling {
    pub fn pending(&self, s: StateId) -> Option<&Pending> {
        self.pending[s].as_ref()
    }

    pub fn pending_processes(&self, s: StateId) -> Option<Vec<ProcessId>> {
        self.pending[s].as_ref().map(|p| p.keys().copied().collect())
    }

    pub fn is_reachable(&self, s: StateId) -> bool {
        self.pending[s].is_some()
    }

    /// Reachable with nothing pending. Unreachable states are never
    /// quiescent.
    pub fn is_quiescent(&self, s: StateId) -> bool {
        self.pending[s].as_ref().is_some_and(|p| p.is_empty())
    }

    pub fn quiescent_states(&self) -> Vec<StateId> {
        (0..self.pending.len()).filter(|&s| self.is_quiescent(s)).collect()
    }

    pub fn num_states(&self) -> usize {
        self.pending.len()
    }
}

/// Computes the pending set of every reachable state by propagation from
/// the initial state, failing if two paths disagree or a transition breaks
/// per-process sequentiality.
pub fn label_quiescence<L: ActionLetter>(a: &Automaton<L>) -> Result<QuiescenceLabeling> {
    let mut pending: Vec<Option<Pending>> = vec![None; a.num_states()];
    pending[a.initial()] = Some(Pending::new());
    let mut queue = VecDeque::from([a.initial()]);
    while let Some(s) = queue.pop_front() {
        let here = pending[s].clone().expect("queued states are labelled");
        for t in a.outgoing(s) {
            let letter = a.letter(t.letter);
            let illegal = |reason: String| Error::IllegalAutomaton {
                source_state: a.state_name(s).to_string(),
                letter: letter.to_string(),
                target: a.state_name(t.target).to_string(),
                reason,
            };
            let next = match letter.as_action() {
                None if !here.is_empty() => {
                    return Err(illegal("delta leaves a state with open calls".into()))
                }
                None => here.clone(),
                Some(act) => {
                    let mut next = here.clone();
                    if act.is_invoke() {
                        if let Some(op) = here.get(&act.process) {
                            return Err(illegal(format!(
                                "process {} already has an open `{op}` call",
                                act.process
                            )));
                        }
                        next.insert(act.process, act.op.clone());
                    } else {
                        match here.get(&act.process) {
                            None => {
                                return Err(illegal(format!(
                                    "process {} has no open call",
                                    act.process
                                )))
                            }
                            Some(op) if *op != act.op => {
                                return Err(illegal(format!(
                                    "process {} has an open `{op}` call",
                                    act.process
                                )))
                            }
                            Some(_) => {
                                next.remove(&act.process);
                            }
                        }
                    }
                    next
                }
            };
            match &pending[t.target] {
                None => {
                    pending[t.target] = Some(next);
                    queue.push_back(t.target);
                }
                Some(existing) if *existing != next => {
                    return Err(Error::AmbiguousQuiescence {
                        state: a.state_name(t.target).to_string(),
                        first: existing.keys().copied().collect(),
                        second: next.keys().copied().collect(),
                    });
                }
                Some(_) => {}
            }
        }
    }
    for f in a.finals() {
        if let Some(p) = &pending[f] {
            if !p.is_empty() {
                return Err(Error::FinalNotQuiescent {
                    state: a.state_name(f).to_string(),
                    pending: p.keys().copied().collect(),
                });
            }
        }
    }
    Ok(QuiescenceLabeling { pending })
}

/// Reachable states from which no quiescent state can be reached in one or
/// more steps and which are not quiescent themselves. A diagnostic only.
pub fn stuck_states<L: Letter>(a: &Automaton<L>, labels: &QuiescenceLabeling) -> Vec<StateId> {
    let mut incoming: Vec<Vec<StateId>> = vec![Vec::new(); a.num_states()];
    for t in a.transitions() {
        incoming[t.target].push(t.source);
    }
    let mut ok = vec![false; a.num_states()];
    let mut queue: VecDeque<StateId> = labels.quiescent_states().into();
    for &s in &queue {
        ok[s] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &p in &incoming[s] {
            if !ok[p] {
                ok[p] = true;
                queue.push_back(p);
            }
        }
    }
    (0..a.num_states())
        .filter(|&s| labels.is_reachable(s) && !ok[s])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaKind {
    /// δ self-loops at quiescent states; δ is optional.
    Spec,
    /// Every quiescent state is left through a single δ step; δ is
    /// mandatory.
    Impl,
}

/// An automaton over actions and δ, built by [`build_spec_delta`] or
/// [`build_impl_delta`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeltaAutomaton {
    base: Automaton<Label>,
    kind: DeltaKind,
    quiescent: Vec<bool>,
    num_original: usize,
    delta_copy: Vec<Option<StateId>>,
}

impl DeltaAutomaton {
    pub fn base(&self) -> &Automaton<Label> {
        &self.base
    }

    pub fn kind(&self) -> DeltaKind {
        self.kind
    }

    pub fn is_quiescent(&self, s: StateId) -> bool {
        self.quiescent[s]
    }

    pub fn quiescent_states(&self) -> Vec<StateId> {
        (0..self.quiescent.len()).filter(|&s| self.quiescent[s]).collect()
    }

    /// States carried over from the source automaton keep their ids; fresh
    /// δ-copies come after them.
    pub fn num_original_states(&self) -> usize {
        self.num_original
    }

    /// For impl automata, the fresh state entered by the δ step out of the
    /// quiescent original state `q`.
    pub fn delta_copy(&self, q: StateId) -> Option<StateId> {
        self.delta_copy.get(q).copied().flatten()
    }

    /// True for original quiescent states: the points at which an impl
    /// segment ends.
    pub fn is_segment_end(&self, s: StateId) -> bool {
        s < self.num_original && self.quiescent[s]
    }

    pub fn accepts(&self, word: &[Label]) -> bool {
        self.base.accepts(word)
    }
}

fn copy_actions(a: &Automaton<Action>) -> AutomatonBuilder<Label> {
    let mut b = AutomatonBuilder::new();
    for s in 0..a.num_states() {
        b.add_state(a.state_name(s));
    }
    b.set_initial(a.initial());
    for l in a.letters() {
        b.add_letter(Label::Action(l.clone()));
    }
    b
}

/// S_δ: the specification plus a δ self-loop at every quiescent state.
pub fn build_spec_delta(s: &Automaton<Action>) -> Result<DeltaAutomaton> {
    let labels = label_quiescence(s)?;
    let mut b = copy_actions(s);
    for f in s.finals() {
        b.add_final(f);
    }
    for t in s.transitions() {
        b.add_transition(t.source, Label::Action(s.letter(t.letter).clone()), t.target);
    }
    let quiescent: Vec<bool> = (0..s.num_states()).map(|q| labels.is_quiescent(q)).collect();
    for q in labels.quiescent_states() {
        b.add_transition(q, Label::Delta, q);
    }
    Ok(DeltaAutomaton {
        base: b.build(),
        kind: DeltaKind::Spec,
        quiescent,
        num_original: s.num_states(),
        delta_copy: vec![None; s.num_states()],
    })
}

/// Q_δ: each quiescent state `q` gets a fresh copy `q_δ` that takes over
/// all of `q`'s outgoing transitions and is reached by the single
/// transition `(q, δ, q_δ)`; finals move to their copies.
pub fn build_impl_delta(q: &Automaton<Action>) -> Result<DeltaAutomaton> {
    let labels = label_quiescence(q)?;
    let n = q.num_states();
    let mut b = copy_actions(q);
    let mut delta_copy = vec![None; n];
    for s in labels.quiescent_states() {
        delta_copy[s] = Some(b.add_fresh_state(&format!("{}_delta", q.state_name(s))));
    }
    for f in q.finals() {
        b.add_final(delta_copy[f].unwrap_or(f));
    }
    for t in q.transitions() {
        let src = delta_copy[t.source].unwrap_or(t.source);
        b.add_transition(src, Label::Action(q.letter(t.letter).clone()), t.target);
    }
    for s in labels.quiescent_states() {
        b.add_transition(s, Label::Delta, delta_copy[s].unwrap());
    }
    let base = b.build();
    let mut quiescent: Vec<bool> = (0..n).map(|s| labels.is_quiescent(s)).collect();
    quiescent.resize(base.num_states(), true);
    Ok(DeltaAutomaton {
        base,
        kind: DeltaKind::Impl,
        quiescent,
        num_original: n,
        delta_copy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::Run;

    fn fa(text: &str) -> Automaton<Action> {
        text.parse().unwrap()
    }

    fn labels(run: &str) -> Vec<Label> {
        Run::parse(run).unwrap().labels()
    }

    const SEQ: &str = "states: s0 s1 s2 s3\ninitial: s0\nfinal: s0 s2\n\
        trans: s0 inv:1:a s1\ntrans: s1 res:1:a s2\ntrans: s2 inv:2:b s3\ntrans: s3 res:2:b s2\n";

    #[test]
    fn sequential_spec_is_quiescent_after_responses() {
        let a = fa("states: s0 s1 s2 s3\ninitial: s0\nfinal: s0 s2\n\
            trans: s0 inv:1:a s1\ntrans: s1 res:1:a s2\ntrans: s2 inv:1:a s3\ntrans: s3 res:1:a s2\n");
        let l = label_quiescence(&a).unwrap();
        assert_eq!(l.quiescent_states(), vec![0, 2]);
        assert_eq!(l.pending_processes(1), Some(vec![1]));
    }

    #[test]
    fn ambiguous_and_illegal_automata() {
        let a = fa("states: s q\ninitial: s\ntrans: s inv:1:op q\ntrans: q res:1:op q\n");
        assert!(matches!(label_quiescence(&a), Err(Error::AmbiguousQuiescence { .. })));
        let a = fa("states: s q\ninitial: s\ntrans: s res:1:op q\n");
        assert!(matches!(label_quiescence(&a), Err(Error::IllegalAutomaton { .. })));
        let a = fa("states: s q r\ninitial: s\ntrans: s inv:1:op q\ntrans: q inv:1:op r\n");
        assert!(matches!(label_quiescence(&a), Err(Error::IllegalAutomaton { .. })));
        let a = fa("states: s q\ninitial: s\nfinal: q\ntrans: s inv:1:op q\n");
        assert!(matches!(label_quiescence(&a), Err(Error::FinalNotQuiescent { .. })));
    }

    #[test]
    fn stuck_states_are_reported() {
        let a = fa("states: s q r\ninitial: s\nfinal: s\ntrans: s inv:1:op q\ntrans: s inv:2:op r\ntrans: q res:1:op s\n");
        let l = label_quiescence(&a).unwrap();
        assert_eq!(stuck_states(&a, &l), vec![2]);
    }

    #[test]
    fn spec_delta_allows_optional_delta() {
        let d = build_spec_delta(&fa(SEQ)).unwrap();
        assert!(d.accepts(&labels("inv:1:a res:1:a")));
        assert!(d.accepts(&labels("delta delta inv:1:a res:1:a delta")));
        assert!(!d.accepts(&labels("inv:1:a delta res:1:a")));
        for t in d.base().transitions() {
            if d.base().letter(t.letter).is_delta() {
                assert_eq!(t.source, t.target);
                assert!(d.is_quiescent(t.source));
            }
        }
    }

    #[test]
    fn spec_delta_of_empty_word_automaton() {
        let d = build_spec_delta(&fa("states: s\ninitial: s\nfinal: s\n")).unwrap();
        for k in 0..4 {
            assert!(d.accepts(&vec![Label::Delta; k]));
        }
    }

    #[test]
    fn impl_delta_forces_delta_at_quiescent_points() {
        let d = build_impl_delta(&fa(SEQ)).unwrap();
        assert!(d.accepts(&labels("delta")));
        assert!(d.accepts(&labels("delta inv:1:a res:1:a delta")));
        assert!(d.accepts(&labels("delta inv:1:a res:1:a delta inv:2:b res:2:b delta")));
        assert!(!d.accepts(&labels("inv:1:a res:1:a")));
        assert!(!d.accepts(&labels("delta inv:1:a res:1:a")));
        assert!(!d.accepts(&labels("delta inv:1:a res:1:a delta delta")));
        assert_eq!(d.base().state_name(d.delta_copy(0).unwrap()), "s0_delta");
    }

    #[test]
    fn impl_delta_of_empty_language() {
        let d = build_impl_delta(&fa("states: s\ninitial: s\nfinal: s\n")).unwrap();
        assert!(d.accepts(&labels("delta")));
        assert!(!d.accepts(&[]));
        assert!(!d.accepts(&labels("delta delta")));
    }

    #[test]
    fn delta_copy_names_are_unique() {
        let d = build_impl_delta(&fa("states: s s_delta\ninitial: s\nfinal: s\n")).unwrap();
        assert_eq!(d.base().state_name(d.delta_copy(0).unwrap()), "s_delta_1");
    }
}
