//! Post's correspondence problem reduced to QSC correctness.
//!
//! Letter `a` written by process `p` (1 or 2) is the call pair
//! `inv:p:a res:p:a`. The implementation performs `e`, then one or more
//! index blocks `α_i` on process 1 followed by `β_i` on process 2, then `ē`;
//! `e` runs on process 0 so that the run stays legal while it is open. The
//! specification accepts `σ e ē` exactly when the two process projections of
//! `σ` spell different words. A QSC counterexample is therefore a solution.

use std::fmt;
use std::str::FromStr;

use crate::automaton::{Automaton, AutomatonBuilder, StateId};
use crate::error::{Error, Result};
use crate::event::{Action, ProcessId};
use crate::history::Run;

pub const FRAME_PROCESS: ProcessId = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcpInstance {
    pub alphabet: Vec<char>,
    pub pairs: Vec<(String, String)>,
}

impl PcpInstance {
    pub fn new(alphabet: Vec<char>, pairs: Vec<(String, String)>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::InvalidInstance("empty alphabet".into()));
        }
        if let Some(c) = alphabet.iter().find(|c| !c.is_ascii_alphanumeric()) {
            return Err(Error::InvalidInstance(format!("letter `{c}` is not ASCII alphanumeric")));
        }
        if pairs.is_empty() {
            return Err(Error::InvalidInstance("at least one pair is required".into()));
        }
        for (i, (a, b)) in pairs.iter().enumerate() {
            if a.is_empty() && b.is_empty() {
                return Err(Error::InvalidInstance(format!("pair {} has two empty words", i + 1)));
            }
            if let Some(c) = a.chars().chain(b.chars()).find(|c| !alphabet.contains(c)) {
                return Err(Error::InvalidInstance(format!(
                    "pair {} uses `{c}`, which is not in the alphabet",
                    i + 1
                )));
            }
        }
        Ok(PcpInstance { alphabet, pairs })
    }

    /// Whether the index sequence solves the instance.
    pub fn is_solution(&self, indices: &[usize]) -> bool {
        !indices.is_empty() && {
            let top: String = indices.iter().map(|&i| self.pairs[i].0.as_str()).collect();
            let bottom: String = indices.iter().map(|&i| self.pairs[i].1.as_str()).collect();
            top == bottom
        }
    }

    /// Events in the implementation run for a 0-based index sequence.
    pub fn run_length(&self, indices: &[usize]) -> usize {
        2 + indices
            .iter()
            .map(|&i| 2 * (self.pairs[i].0.len() + self.pairs[i].1.len()))
            .sum::<usize>()
    }

    /// Parses `alphabet: a b ...` followed by `pair: <alpha> <beta>` lines;
    /// `-` is the empty word.
    pub fn parse(text: &str) -> Result<Self> {
        let mut alphabet: Option<Vec<char>> = None;
        let mut pairs = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            let trimmed = line.trim_start();
            if trimmed.is_empty() {
                continue;
            }
            let col = line.len() - trimmed.len() + 1;
            if let Some(rest) = trimmed.strip_prefix("alphabet:") {
                let mut letters = Vec::new();
                for tok in rest.split_whitespace() {
                    let mut cs = tok.chars();
                    match (cs.next(), cs.next()) {
                        (Some(c), None) => letters.push(c),
                        _ => {
                            return Err(Error::parse(idx + 1, col, format!("`{tok}` is not a single letter")))
                        }
                    }
                }
                alphabet = Some(letters);
            } else if let Some(rest) = trimmed.strip_prefix("pair:") {
                let words: Vec<&str> = rest.split_whitespace().collect();
                if words.len() != 2 {
                    return Err(Error::parse(idx + 1, col, "`pair:` takes two words"));
                }
                let w = |s: &str| if s == "-" { String::new() } else { s.to_string() };
                pairs.push((w(words[0]), w(words[1])));
            } else {
                return Err(Error::parse(idx + 1, col, "expected `alphabet:` or `pair:`"));
            }
        }
        let alphabet = alphabet.ok_or_else(|| Error::parse(1, 1, "missing `alphabet:` line"))?;
        PcpInstance::new(alphabet, pairs)
    }
}

impl fmt::Display for PcpInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "alphabet:")?;
        for c in &self.alphabet {
            write!(f, " {c}")?;
        }
        writeln!(f)?;
        let w = |s: &str| if s.is_empty() { "-".to_string() } else { s.to_string() };
        for (a, b) in &self.pairs {
            writeln!(f, "pair: {} {}", w(a), w(b))?;
        }
        Ok(())
    }
}

impl FromStr for PcpInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PcpInstance::parse(s)
    }
}

/// `to_Σ(word, p)`: each letter becomes a call pair on process `p`.
pub fn to_sigma(word: &str, p: ProcessId) -> Vec<Action> {
    let mut out = Vec::with_capacity(2 * word.len());
    for c in word.chars() {
        let op = c.to_string();
        out.push(Action::invoke(p, &op));
        out.push(Action::response(p, &op));
    }
    out
}

/// The `≡` relation: equal after forgetting processes.
pub fn equiv_ignoring_process(a: &[Action], b: &[Action]) -> bool {
    a.len() == b.len()
        && a
            .iter()
            .zip(b)
            .all(|(x, y)| x.kind == y.kind && x.op == y.op && x.value == y.value)
}

/// Whether a run's projections on processes 1 and 2 are `≡`.
pub fn projections_match(run: &Run) -> bool {
    let proj = |p| -> Vec<Action> { run.actions().into_iter().filter(|a| a.process == p).collect() };
    equiv_ignoring_process(&proj(1), &proj(2))
}

fn frame() -> [Action; 2] {
    [Action::invoke(FRAME_PROCESS, "e"), Action::response(FRAME_PROCESS, "e")]
}

/// Builds `(implementation, specification)`.
pub fn gen_pcp_instance(inst: &PcpInstance) -> (Automaton<Action>, Automaton<Action>) {
    let [e, er] = frame();

    let mut ib = AutomatonBuilder::new();
    let q0 = ib.add_state("q0");
    let q = ib.add_state("q");
    let q1 = ib.add_state("q1");
    let qf = ib.add_state("qf");
    ib.set_initial(q0);
    ib.add_final(qf);
    ib.add_transition(q0, e.clone(), q);
    for (i, (a, b)) in inst.pairs.iter().enumerate() {
        let block: Vec<Action> = to_sigma(a, 1).into_iter().chain(to_sigma(b, 2)).collect();
        ib.add_path(q, &block, q1, &format!("first{}", i + 1));
        ib.add_path(q1, &block, q1, &format!("next{}", i + 1));
    }
    ib.add_transition(q1, er.clone(), qf);

    let mut sb = AutomatonBuilder::new();
    let s0 = sb.add_state("s0");
    let s1 = sb.add_state("s1");
    let s2 = sb.add_state("s2");
    let s3 = sb.add_state("s3");
    let sf = sb.add_state("sf");
    sb.set_initial(s0);
    sb.add_final(sf);
    let letters: Vec<String> = inst.alphabet.iter().map(|c| c.to_string()).collect();
    let pair = |l: &str, p: ProcessId| to_sigma(l, p);
    let cycle = |sb: &mut AutomatonBuilder<Action>, at: StateId, w: Vec<Action>, stem: &str| {
        sb.add_path(at, &w, at, stem);
    };
    for a in &letters {
        let both: Vec<Action> = pair(a, 1).into_iter().chain(pair(a, 2)).collect();
        cycle(&mut sb, s0, both, &format!("same_{a}"));
    }
    for a in &letters {
        for b in letters.iter().filter(|b| *b != a) {
            let w: Vec<Action> = pair(a, 1).into_iter().chain(pair(b, 2)).collect();
            sb.add_path(s0, &w, s1, &format!("diff_{a}{b}"));
        }
    }
    for a in &letters {
        cycle(&mut sb, s1, pair(a, 1), &format!("s1_{a}1"));
        cycle(&mut sb, s1, pair(a, 2), &format!("s1_{a}2"));
    }
    for a in &letters {
        sb.add_path(s0, &pair(a, 1), s2, &format!("long1_{a}"));
        cycle(&mut sb, s2, pair(a, 1), &format!("s2_{a}"));
    }
    for a in &letters {
        sb.add_path(s0, &pair(a, 2), s3, &format!("long2_{a}"));
        cycle(&mut sb, s3, pair(a, 2), &format!("s3_{a}"));
    }
    let close = sb.add_state("close");
    for s in [s1, s2, s3] {
        sb.add_transition(s, e.clone(), close);
    }
    sb.add_transition(close, er, sf);

    (ib.build(), sb.build())
}
