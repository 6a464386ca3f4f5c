//! Random instance generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use qcheck::history::{segment, Segment};
use qcheck::{Action, Automaton, AutomatonBuilder, Mode, ProcessId, Run};
use rand::seq::SliceRandom;
use rand::Rng;

pub const OPS: [&str; 2] = ["a", "b"];

/// A legal, quiescent run of at most `max_events` events over processes
/// `1..=procs`. Every invocation is eventually answered.
pub fn random_run<R: Rng>(rng: &mut R, max_events: usize, procs: ProcessId) -> Run {
    let mut calls = rng.gen_range(0..=max_events / 2);
    let mut pending: BTreeMap<ProcessId, &str> = BTreeMap::new();
    let mut out = Vec::new();
    while calls > 0 || !pending.is_empty() {
        let idle: Vec<ProcessId> = (1..=procs).filter(|p| !pending.contains_key(p)).collect();
        let invoke = calls > 0 && !idle.is_empty() && (pending.is_empty() || rng.gen_bool(0.5));
        if invoke {
            let p = *idle.choose(rng).unwrap();
            let op = *OPS.choose(rng).unwrap();
            out.push(Action::invoke(p, op));
            pending.insert(p, op);
            calls -= 1;
        } else {
            let p = *pending.keys().collect::<Vec<_>>().choose(rng).copied().unwrap();
            let op = pending.remove(&p).unwrap();
            out.push(Action::response(p, op));
        }
    }
    Run::from_actions(out)
}

/// A random interleaving of the process lanes of `seg`: a QSC-equivalent
/// reordering.
pub fn shuffle_keeping_lanes<R: Rng>(rng: &mut R, seg: &[Action]) -> Vec<Action> {
    let mut lanes: BTreeMap<ProcessId, Vec<Action>> = BTreeMap::new();
    for a in seg {
        lanes.entry(a.process).or_default().push(a.clone());
    }
    let mut lanes: Vec<std::collections::VecDeque<Action>> =
        lanes.into_values().map(Into::into).collect();
    let mut out = Vec::with_capacity(seg.len());
    while out.len() < seg.len() {
        let live: Vec<usize> = (0..lanes.len()).filter(|&i| !lanes[i].is_empty()).collect();
        let i = *live.choose(rng).unwrap();
        out.push(lanes[i].pop_front().unwrap());
    }
    out
}

/// A segment-wise reordering of `run`: arbitrary for QC, lane-preserving
/// for QSC.
pub fn reorder<R: Rng>(rng: &mut R, run: &Run, mode: Mode) -> Vec<Action> {
    let mut out = Vec::new();
    for seg in segment(run).unwrap() {
        let mut acts = seg.actions();
        match mode {
            Mode::Qc => acts.shuffle(rng),
            Mode::Qsc => acts = shuffle_keeping_lanes(rng, &acts),
        }
        out.extend(acts);
    }
    out
}

/// A random automaton with at most `max_states` states over the letters of
/// `run` plus one distractor. With probability one half a reordering of the
/// run is planted as an accepted path.
pub fn random_spec_for<R: Rng>(rng: &mut R, run: &Run, max_states: usize) -> Automaton<Action> {
    let n = rng.gen_range(1..=max_states);
    let mut letters: Vec<Action> = run.actions().into_iter().unique().collect();
    letters.push(Action::invoke(1, "z"));
    let mut b = AutomatonBuilder::new();
    let states: Vec<_> = (0..n).map(|i| b.add_state(&format!("s{i}"))).collect();
    b.set_initial(states[0]);
    for _ in 0..rng.gen_range(0..=3 * n) {
        let from = *states.choose(rng).unwrap();
        let to = *states.choose(rng).unwrap();
        b.add_transition(from, letters.choose(rng).unwrap().clone(), to);
    }
    for &s in &states {
        if rng.gen_bool(0.3) {
            b.add_final(s);
        }
    }
    if rng.gen_bool(0.5) {
        let mode = if rng.gen_bool(0.5) { Mode::Qc } else { Mode::Qsc };
        let word = reorder(rng, run, mode);
        let mut cur = states[0];
        for a in word {
            let next = *states.choose(rng).unwrap();
            b.add_transition(cur, a, next);
            cur = next;
        }
        b.add_final(cur);
    }
    b.build()
}

/// A sequential specification: quiescent states joined by call pairs, each
/// through its own pending state. At most `max_states` states in total.
pub fn random_sequential_spec<R: Rng>(rng: &mut R, max_states: usize) -> Automaton<Action> {
    let quiescent = rng.gen_range(1..=max_states.div_ceil(2).max(1));
    let mut b = AutomatonBuilder::new();
    let qs: Vec<_> = (0..quiescent).map(|i| b.add_state(&format!("q{i}"))).collect();
    b.set_initial(qs[0]);
    for &q in &qs {
        if rng.gen_bool(0.5) {
            b.add_final(q);
        }
    }
    b.add_final(*qs.choose(rng).unwrap());
    for i in 0..max_states - quiescent {
        let from = *qs.choose(rng).unwrap();
        let to = *qs.choose(rng).unwrap();
        let p = rng.gen_range(1..=2);
        let op = *OPS.choose(rng).unwrap();
        let mid = b.add_state(&format!("m{i}"));
        b.add_transition(from, Action::invoke(p, op), mid);
        let res = Action::response(p, op);
        let res = if rng.gen_bool(0.5) { res.with_value("v") } else { res };
        b.add_transition(mid, res, to);
    }
    b.build()
}

/// The prefix-tree automaton of a set of legal quiescent runs. Exactly the
/// given runs are accepted.
pub fn trie_automaton(runs: &[Run]) -> Automaton<Action> {
    let mut b = AutomatonBuilder::new();
    let root = b.add_state("r");
    b.set_initial(root);
    let mut nodes: BTreeMap<Vec<Action>, qcheck::StateId> = BTreeMap::new();
    nodes.insert(Vec::new(), root);
    for run in runs {
        let acts = run.actions();
        let mut cur = root;
        for i in 0..acts.len() {
            let key = acts[..=i].to_vec();
            let next = match nodes.get(&key) {
                Some(&s) => s,
                None => {
                    let s = b.add_state(&format!("n{}", nodes.len()));
                    nodes.insert(key, s);
                    s
                }
            };
            b.add_transition(cur, acts[i].clone(), next);
            cur = next;
        }
        b.add_final(cur);
    }
    b.build()
}

/// A random acyclic automaton over single-symbol letters. Every letter of
/// `alphabet` is declared, used or not.
pub fn random_acyclic<R: Rng>(rng: &mut R, max_states: usize, alphabet: &[&str]) -> Automaton<String> {
    let n = rng.gen_range(1..=max_states);
    let mut b = AutomatonBuilder::new();
    let states: Vec<_> = (0..n).map(|i| b.add_state(&format!("s{i}"))).collect();
    b.set_initial(states[0]);
    for l in alphabet {
        b.add_letter(l.to_string());
    }
    for i in 0..n {
        for j in i + 1..n {
            for l in alphabet {
                if rng.gen_bool(0.3) {
                    b.add_transition(states[i], l.to_string(), states[j]);
                }
            }
        }
        if rng.gen_bool(0.4) {
            b.add_final(states[i]);
        }
    }
    b.build()
}

/// All distinct permutations of a word.
pub fn permutations(word: &[Action]) -> BTreeSet<Vec<Action>> {
    word.iter().cloned().permutations(word.len()).collect()
}

/// Permutations that keep every process's subsequence.
pub fn lane_permutations(word: &[Action]) -> BTreeSet<Vec<Action>> {
    let lanes = |w: &[Action]| -> BTreeMap<ProcessId, Vec<Action>> {
        let mut m: BTreeMap<ProcessId, Vec<Action>> = BTreeMap::new();
        for a in w {
            m.entry(a.process).or_default().push(a.clone());
        }
        m
    };
    let target = lanes(word);
    permutations(word).into_iter().filter(|p| lanes(p) == target).collect()
}

pub fn segments(run: &Run) -> Vec<Segment> {
    segment(run).unwrap()
}
