//! Nondeterministic finite automata over a generic letter type, plus the
//! line-based text format.
//!
//! ```text
//! # comment
//! states: s0 s1 s2
//! initial: s0
//! final: s0 s2
//! trans: s0 inv:1:deq s1
//! trans: s1 res:1:deq:a s2
//! ```
//!
//! An optional `alphabet:` line declares letters that no transition uses;
//! it is only written when such letters exist.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::event::{is_identifier, Action, Label};

pub type StateId = usize;
pub type LetterId = usize;

/// Something that can label a transition and round-trip through a token.
pub trait Letter: Clone + Eq + Hash + fmt::Display + Send + Sync {
    fn parse_letter(token: &str) -> std::result::Result<Self, String>;
}

impl Letter for Action {
    fn parse_letter(token: &str) -> std::result::Result<Self, String> {
        Action::parse_token(token)
    }
}

impl Letter for Label {
    fn parse_letter(token: &str) -> std::result::Result<Self, String> {
        Label::parse_token(token)
    }
}

/// Plain symbols, as used by the Parikh construction.
impl Letter for String {
    fn parse_letter(token: &str) -> std::result::Result<Self, String> {
        if is_identifier(token) {
            Ok(token.to_string())
        } else {
            Err(format!("`{token}` is not an identifier"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transition {
    pub source: StateId,
    pub letter: LetterId,
    pub target: StateId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton<L: Letter> {
    states: Vec<String>,
    state_ids: HashMap<String, StateId>,
    initial: StateId,
    finals: Vec<bool>,
    letters: Vec<L>,
    letter_ids: HashMap<L, LetterId>,
    transitions: Vec<Transition>,
    outgoing: Vec<Vec<usize>>,
}

impl<L: Letter> Automaton<L> {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s]
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_ids.get(name).copied()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    pub fn is_final(&self, s: StateId) -> bool {
        self.finals[s]
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len()).filter(|&s| self.finals[s])
    }

    pub fn letters(&self) -> &[L] {
        &self.letters
    }

    pub fn letter(&self, id: LetterId) -> &L {
        &self.letters[id]
    }

    pub fn letter_id(&self, l: &L) -> Option<LetterId> {
        self.letter_ids.get(l).copied()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    /// Transitions leaving `s`, in declaration order.
    pub fn outgoing(&self, s: StateId) -> impl Iterator<Item = &Transition> + '_ {
        self.outgoing[s].iter().map(move |&i| &self.transitions[i])
    }

    /// Indices into [`Automaton::transitions`] of the transitions leaving
    /// `s`, in declaration order.
    pub fn outgoing_ids(&self, s: StateId) -> &[usize] {
        &self.outgoing[s]
    }

    pub fn successors(&self, s: StateId, letter: LetterId) -> impl Iterator<Item = StateId> + '_ {
        self.outgoing(s)
            .filter(move |t| t.letter == letter)
            .map(|t| t.target)
    }

    /// Membership by subset simulation.
    pub fn accepts(&self, word: &[L]) -> bool {
        let mut current = vec![false; self.num_states()];
        current[self.initial] = true;
        for l in word {
            let Some(id) = self.letter_id(l) else {
                return false;
            };
            let mut next = vec![false; self.num_states()];
            let mut any = false;
            for s in (0..self.num_states()).filter(|&s| current[s]) {
                for t in self.successors(s, id) {
                    next[t] = true;
                    any = true;
                }
            }
            if !any {
                return false;
            }
            current = next;
        }
        (0..self.num_states()).any(|s| current[s] && self.finals[s])
    }

    /// States reachable from the initial state.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut queue = VecDeque::from([self.initial]);
        seen[self.initial] = true;
        while let Some(s) = queue.pop_front() {
            for t in self.outgoing(s) {
                if !seen[t.target] {
                    seen[t.target] = true;
                    queue.push_back(t.target);
                }
            }
        }
        seen
    }

    /// States from which some final state is reachable.
    pub fn coreachable(&self) -> Vec<bool> {
        let mut incoming: Vec<Vec<StateId>> = vec![Vec::new(); self.num_states()];
        for t in &self.transitions {
            incoming[t.target].push(t.source);
        }
        let mut seen = self.finals.clone();
        let mut queue: VecDeque<StateId> = self.finals().collect();
        while let Some(s) = queue.pop_front() {
            for &p in &incoming[s] {
                if !seen[p] {
                    seen[p] = true;
                    queue.push_back(p);
                }
            }
        }
        seen
    }

    /// Whether the transition graph (all states, reachable or not) has no
    /// cycle.
    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }

    /// Some state lying on a cycle, if any.
    pub fn find_cycle(&self) -> Option<StateId> {
        // Kahn's algorithm; whatever is left over sits on or behind a cycle.
        let n = self.num_states();
        let mut indegree = vec![0usize; n];
        for t in &self.transitions {
            indegree[t.target] += 1;
        }
        let mut queue: VecDeque<StateId> = (0..n).filter(|&s| indegree[s] == 0).collect();
        let mut removed = 0;
        while let Some(s) = queue.pop_front() {
            removed += 1;
            for t in self.outgoing(s) {
                indegree[t.target] -= 1;
                if indegree[t.target] == 0 {
                    queue.push_back(t.target);
                }
            }
        }
        if removed == n {
            None
        } else {
            (0..n).find(|&s| indegree[s] > 0)
        }
    }

    /// Every accepted word, for automata whose reachable part is acyclic.
    pub fn finite_language(&self) -> Result<Vec<Vec<L>>> {
        let reach = self.reachable();
        let trimmed: Vec<bool> = self
            .coreachable()
            .iter()
            .zip(&reach)
            .map(|(a, b)| *a && *b)
            .collect();
        if let Some(s) = self.find_cycle_within(&trimmed) {
            return Err(Error::NotAcyclic(format!(
                "state {} lies on a cycle",
                self.state_name(s)
            )));
        }
        let mut words = Vec::new();
        let mut prefix = Vec::new();
        self.collect_words(self.initial, &trimmed, &mut prefix, &mut words);
        let mut seen = HashSet::new();
        words.retain(|w| seen.insert(w.clone()));
        Ok(words)
    }

    fn find_cycle_within(&self, keep: &[bool]) -> Option<StateId> {
        let n = self.num_states();
        let mut indegree = vec![0usize; n];
        for t in &self.transitions {
            if keep[t.source] && keep[t.target] {
                indegree[t.target] += 1;
            }
        }
        let mut queue: VecDeque<StateId> =
            (0..n).filter(|&s| keep[s] && indegree[s] == 0).collect();
        let mut removed = 0;
        while let Some(s) = queue.pop_front() {
            removed += 1;
            for t in self.outgoing(s).filter(|t| keep[t.target]) {
                indegree[t.target] -= 1;
                if indegree[t.target] == 0 {
                    queue.push_back(t.target);
                }
            }
        }
        if removed == keep.iter().filter(|&&k| k).count() {
            None
        } else {
            (0..n).find(|&s| keep[s] && indegree[s] > 0)
        }
    }

    fn collect_words(&self, s: StateId, keep: &[bool], prefix: &mut Vec<L>, out: &mut Vec<Vec<L>>) {
        if !keep[s] {
            return;
        }
        if self.finals[s] {
            out.push(prefix.clone());
        }
        for t in self.outgoing(s) {
            prefix.push(self.letters[t.letter].clone());
            self.collect_words(t.target, keep, prefix, out);
            prefix.pop();
        }
    }

    /// Applies `f` to every letter. Letters that become equal are merged.
    pub fn map_letters<M: Letter>(&self, f: impl Fn(&L) -> M) -> Automaton<M> {
        let mut b = AutomatonBuilder::new();
        for name in &self.states {
            b.add_state(name);
        }
        b.set_initial(self.initial);
        for s in self.finals() {
            b.add_final(s);
        }
        let ids: Vec<LetterId> = self.letters.iter().map(|l| b.add_letter(f(l))).collect();
        for t in &self.transitions {
            b.add_transition_id(t.source, ids[t.letter], t.target);
        }
        b.build()
    }

    /// Parses the text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut b = AutomatonBuilder::new();
        let mut declared: HashSet<String> = HashSet::new();
        let mut initial: Option<(usize, String)> = None;
        let mut finals: Vec<(usize, usize, String)> = Vec::new();
        let mut pending_trans: Vec<(usize, usize, String, L, String)> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.split('#').next().unwrap_or("");
            let trimmed = line.trim_start();
            if trimmed.is_empty() {
                continue;
            }
            let lead = line.len() - trimmed.len();
            let Some(colon) = trimmed.find(':') else {
                return Err(Error::parse(lineno, lead + 1, "expected `<keyword>:`"));
            };
            let keyword = &trimmed[..colon];
            let rest_offset = lead + colon + 1;
            let fields = fields_with_columns(&line[rest_offset..], rest_offset);
            match keyword {
                "states" => {
                    for (_, name) in fields {
                        declared.insert(name.to_string());
                        b.add_state(name);
                    }
                }
                "initial" => {
                    if fields.len() != 1 {
                        return Err(Error::parse(lineno, lead + 1, "`initial:` takes exactly one state"));
                    }
                    if initial.is_some() {
                        return Err(Error::parse(lineno, lead + 1, "duplicate `initial:` line"));
                    }
                    initial = Some((lineno, fields[0].1.to_string()));
                }
                "final" => {
                    for (col, name) in fields {
                        finals.push((lineno, col, name.to_string()));
                    }
                }
                "alphabet" => {
                    for (col, tok) in fields {
                        let l = L::parse_letter(tok).map_err(|m| Error::parse(lineno, col, m))?;
                        b.add_letter(l);
                    }
                }
                "trans" => {
                    if fields.len() != 3 {
                        return Err(Error::parse(
                            lineno,
                            lead + 1,
                            "`trans:` takes a source, a letter and a target",
                        ));
                    }
                    let (col, tok) = fields[1];
                    let l = L::parse_letter(tok).map_err(|m| Error::parse(lineno, col, m))?;
                    pending_trans.push((
                        lineno,
                        fields[0].0,
                        fields[0].1.to_string(),
                        l,
                        fields[2].1.to_string(),
                    ));
                }
                other => {
                    return Err(Error::parse(lineno, lead + 1, format!("unknown keyword `{other}`")));
                }
            }
        }

        let lookup = |b: &AutomatonBuilder<L>, name: &str, line: usize, col: usize| {
            if declared.contains(name) {
                Ok(b.state_ids[name])
            } else {
                Err(Error::parse(line, col, format!("state `{name}` is not declared")))
            }
        };
        let Some((init_line, init_name)) = initial else {
            return Err(Error::MalformedAutomaton("missing `initial:` line".into()));
        };
        let init = lookup(&b, &init_name, init_line, 1)?;
        b.set_initial(init);
        for (line, col, name) in finals {
            let s = lookup(&b, &name, line, col)?;
            b.add_final(s);
        }
        for (line, col, src, l, dst) in pending_trans {
            let s = lookup(&b, &src, line, col)?;
            let t = lookup(&b, &dst, line, col)?;
            b.add_transition(s, l, t);
        }
        Ok(b.build())
    }
}

fn fields_with_columns(s: &str, offset: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut pos = 0;
    for tok in s.split_whitespace() {
        let at = s[pos..].find(tok).unwrap() + pos;
        out.push((offset + at + 1, tok));
        pos = at + tok.len();
    }
    out
}

impl<L: Letter> fmt::Display for Automaton<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "states:")?;
        for s in &self.states {
            write!(f, " {s}")?;
        }
        writeln!(f)?;
        writeln!(f, "initial: {}", self.states[self.initial])?;
        write!(f, "final:")?;
        for s in self.finals() {
            write!(f, " {}", self.states[s])?;
        }
        writeln!(f)?;
        let mut used = vec![false; self.letters.len()];
        for t in &self.transitions {
            used[t.letter] = true;
        }
        if used.iter().any(|u| !u) {
            write!(f, "alphabet:")?;
            for l in &self.letters {
                write!(f, " {l}")?;
            }
            writeln!(f)?;
        }
        for t in &self.transitions {
            writeln!(
                f,
                "trans: {} {} {}",
                self.states[t.source], self.letters[t.letter], self.states[t.target]
            )?;
        }
        Ok(())
    }
}

impl<L: Letter> FromStr for Automaton<L> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Automaton::parse(s)
    }
}

/// Incremental construction. States and letters are deduplicated by value,
/// transitions by (source, letter, target).
#[derive(Debug, Clone)]
pub struct AutomatonBuilder<L: Letter> {
    states: Vec<String>,
    state_ids: HashMap<String, StateId>,
    initial: Option<StateId>,
    finals: Vec<bool>,
    letters: Vec<L>,
    letter_ids: HashMap<L, LetterId>,
    transitions: Vec<Transition>,
    seen: HashSet<Transition>,
}

impl<L: Letter> Default for AutomatonBuilder<L> {
    fn default() -> Self {
        Self::new()
    }
}

impl<L: Letter> AutomatonBuilder<L> {
    pub fn new() -> Self {
        AutomatonBuilder {
            states: Vec::new(),
            state_ids: HashMap::new(),
            initial: None,
            finals: Vec::new(),
            letters: Vec::new(),
            letter_ids: HashMap::new(),
            transitions: Vec::new(),
            seen: HashSet::new(),
        }
    }

    /// Returns the id of the named state, creating it if needed.
    pub fn add_state(&mut self, name: &str) -> StateId {
        if let Some(&id) = self.state_ids.get(name) {
            return id;
        }
        let id = self.states.len();
        self.states.push(name.to_string());
        self.state_ids.insert(name.to_string(), id);
        self.finals.push(false);
        id
    }

    /// Adds a state whose name is `base`, or `base` with a numeric suffix if
    /// that name is taken.
    pub fn add_fresh_state(&mut self, base: &str) -> StateId {
        let mut name = base.to_string();
        let mut n = 1;
        while self.state_ids.contains_key(&name) {
            name = format!("{base}_{n}");
            n += 1;
        }
        self.add_state(&name)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn set_initial(&mut self, s: StateId) {
        self.initial = Some(s);
    }

    pub fn add_final(&mut self, s: StateId) {
        self.finals[s] = true;
    }

    pub fn add_letter(&mut self, l: L) -> LetterId {
        if let Some(&id) = self.letter_ids.get(&l) {
            return id;
        }
        let id = self.letters.len();
        self.letters.push(l.clone());
        self.letter_ids.insert(l, id);
        id
    }

    pub fn add_transition(&mut self, source: StateId, letter: L, target: StateId) {
        let id = self.add_letter(letter);
        self.add_transition_id(source, id, target);
    }

    pub fn add_transition_id(&mut self, source: StateId, letter: LetterId, target: StateId) {
        let t = Transition {
            source,
            letter,
            target,
        };
        if self.seen.insert(t) {
            self.transitions.push(t);
        }
    }

    /// Adds a chain of fresh intermediate states spelling `word` from
    /// `source` to `target`. An empty word is not representable and panics.
    pub fn add_path(&mut self, source: StateId, word: &[L], target: StateId, stem: &str) {
        assert!(!word.is_empty(), "paths need at least one letter");
        let mut cur = source;
        for (i, l) in word.iter().enumerate() {
            let next = if i + 1 == word.len() {
                target
            } else {
                self.add_fresh_state(&format!("{stem}_{}", i + 1))
            };
            self.add_transition(cur, l.clone(), next);
            cur = next;
        }
    }

    /// Finishes construction. Letters are renumbered: those used by
    /// transitions come first, by first use, then the unused ones in
    /// insertion order. This makes the result independent of the order in
    /// which letters were declared.
    ///
    /// # Panics
    /// If no initial state was set.
    pub fn build(self) -> Automaton<L> {
        let initial = self.initial.expect("initial state not set");
        let mut order: Vec<LetterId> = Vec::with_capacity(self.letters.len());
        let mut placed = vec![false; self.letters.len()];
        for t in &self.transitions {
            if !placed[t.letter] {
                placed[t.letter] = true;
                order.push(t.letter);
            }
        }
        order.extend((0..self.letters.len()).filter(|&l| !placed[l]));
        let mut remap = vec![0; self.letters.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let letters: Vec<L> = order.iter().map(|&l| self.letters[l].clone()).collect();
        let letter_ids = letters.iter().cloned().enumerate().map(|(i, l)| (l, i)).collect();
        let transitions: Vec<Transition> = self
            .transitions
            .iter()
            .map(|t| Transition {
                letter: remap[t.letter],
                ..*t
            })
            .collect();
        let mut outgoing = vec![Vec::new(); self.states.len()];
        for (i, t) in transitions.iter().enumerate() {
            outgoing[t.source].push(i);
        }
        Automaton {
            states: self.states,
            state_ids: self.state_ids,
            initial,
            finals: self.finals,
            letters,
            letter_ids,
            transitions,
            outgoing,
        }
    }
}
