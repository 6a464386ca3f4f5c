//! The diffracting queue and a sequential blocking queue.
//!
//! ```text
//! enqueue(el)                    dequeue
//!   E1: do lb := eb;               D1: do lb := db;
//!   E2: until CAS(eb, lb, 1-lb)    D2: until CAS(db, lb, 1-lb)
//!   E3: Enq(queue[lb], el)         D3: return Deq(queue[lb])
//! ```
//!
//! Every operation instance runs on its own thread and process. Lines E1-E3
//! and D1-D3 are atomic internal steps; only invocations and responses are
//! visible. D3 blocks while `queue[lb]` is empty.
//!
//! The automaton is deterministic: a state is the set of configurations
//! reachable by internal steps after the history read so far. All of them
//! agree on which operations are pending.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::automaton::{Automaton, AutomatonBuilder, StateId};
use crate::error::{Error, Result};
use crate::event::{is_identifier, Action, ProcessId};
use crate::history::Run;

pub const ENQ: &str = "enq";
pub const DEQ: &str = "deq";

/// A history of the diffracting queue that is quiescent only at its ends.
pub const H1: &str = "inv:1:deq inv:2:enq:a res:2:enq inv:3:enq:b res:3:enq inv:4:deq \
res:4:deq:b inv:5:deq res:5:deq:a inv:6:enq:c res:6:enq res:1:deq:c";

/// A sequential history that `H1` is matched with under QC.
pub const H2: &str = "inv:3:enq:b res:3:enq inv:2:enq:a res:2:enq inv:4:deq res:4:deq:b \
inv:5:deq res:5:deq:a inv:6:enq:c res:6:enq inv:1:deq res:1:deq:c";

pub const DEFAULT_STATE_LIMIT: usize = 2_000_000;
pub const DEFAULT_HISTORY_LIMIT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QueueOptions {
    /// Maximum number of configurations explored.
    pub state_limit: usize,
    /// Maximum number of histories returned.
    pub history_limit: usize,
}

impl Default for QueueOptions {
    fn default() -> Self {
        QueueOptions {
            state_limit: DEFAULT_STATE_LIMIT,
            history_limit: DEFAULT_HISTORY_LIMIT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct QueueCorpus {
    pub implementation: Automaton<Action>,
    pub specification: Automaton<Action>,
    pub histories: Vec<Run>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Enq,
    Deq,
}

#[derive(Debug, Clone, Copy)]
struct Thread {
    kind: Kind,
    process: ProcessId,
    value: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Pc {
    Idle,
    Read,
    Cas(u8),
    Act(u8),
    Ret(Option<u8>),
    Done,
}

impl Pc {
    fn is_pending(self) -> bool {
        !matches!(self, Pc::Idle | Pc::Done)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Config {
    eb: u8,
    db: u8,
    queues: [Vec<u8>; 2],
    pcs: Vec<Pc>,
}

/// Thread layout: dequeue, enqueue, enqueue, dequeue, repeated, skipping a
/// kind once its budget is spent. Process ids start at 1; enqueue threads
/// take values in order.
fn threads(max_enq: usize, max_deq: usize) -> Vec<Thread> {
    let pattern = [Kind::Deq, Kind::Enq, Kind::Enq, Kind::Deq];
    let (mut enq, mut deq) = (0, 0);
    let mut out = Vec::new();
    let mut i = 0;
    while enq < max_enq || deq < max_deq {
        let kind = pattern[i % 4];
        i += 1;
        let value = match kind {
            Kind::Enq if enq < max_enq => {
                enq += 1;
                enq - 1
            }
            Kind::Deq if deq < max_deq => {
                deq += 1;
                0
            }
            _ => continue,
        };
        out.push(Thread {
            kind,
            process: out.len() as ProcessId + 1,
            value: value as u8,
        });
    }
    out
}

fn bit(n: &mut Config, kind: Kind) -> &mut u8 {
    match kind {
        Kind::Enq => &mut n.eb,
        Kind::Deq => &mut n.db,
    }
}

struct Explorer<'a> {
    threads: &'a [Thread],
    values: &'a [String],
    ids: HashMap<Config, usize>,
    configs: Vec<Config>,
    succ: Vec<Option<Vec<usize>>>,
    limit: usize,
}

impl Explorer<'_> {
    fn intern(&mut self, c: Config) -> Result<usize> {
        if let Some(&id) = self.ids.get(&c) {
            return Ok(id);
        }
        if self.configs.len() >= self.limit {
            return Err(Error::CapacityExceeded { limit: self.limit });
        }
        let id = self.configs.len();
        self.ids.insert(c.clone(), id);
        self.configs.push(c);
        self.succ.push(None);
        Ok(id)
    }

    fn internal(&self, c: &Config) -> Vec<Config> {
        let mut out = Vec::new();
        for (t, th) in self.threads.iter().enumerate() {
            let mut n = c.clone();
            n.pcs[t] = match c.pcs[t] {
                Pc::Read => Pc::Cas(*bit(&mut n, th.kind)),
                Pc::Cas(lb) => {
                    let b = bit(&mut n, th.kind);
                    if *b == lb {
                        *b = 1 - lb;
                        Pc::Act(lb)
                    } else {
                        Pc::Read
                    }
                }
                Pc::Act(lb) => match th.kind {
                    Kind::Enq => {
                        n.queues[lb as usize].push(th.value);
                        Pc::Ret(None)
                    }
                    Kind::Deq => {
                        let q = &mut n.queues[lb as usize];
                        if q.is_empty() {
                            continue;
                        }
                        Pc::Ret(Some(q.remove(0)))
                    }
                },
                _ => continue,
            };
            out.push(n);
        }
        out
    }

    fn visible(&self, c: &Config) -> Vec<(Action, Config)> {
        let mut out = Vec::new();
        for (t, th) in self.threads.iter().enumerate() {
            let op = match th.kind {
                Kind::Enq => ENQ,
                Kind::Deq => DEQ,
            };
            let (action, pc) = match c.pcs[t] {
                Pc::Idle => {
                    let a = Action::invoke(th.process, op);
                    let a = match th.kind {
                        Kind::Enq => a.with_value(&self.values[th.value as usize]),
                        Kind::Deq => a,
                    };
                    (a, Pc::Read)
                }
                Pc::Ret(v) => {
                    let a = Action::response(th.process, op);
                    let a = match v {
                        Some(v) => a.with_value(&self.values[v as usize]),
                        None => a,
                    };
                    (a, Pc::Done)
                }
                _ => continue,
            };
            let mut n = c.clone();
            n.pcs[t] = pc;
            out.push((action, n));
        }
        out
    }

    /// All configurations reachable from `starts` by internal steps, sorted.
    fn closure(&mut self, starts: impl IntoIterator<Item = usize>) -> Result<Vec<usize>> {
        let mut seen: BTreeSet<usize> = starts.into_iter().collect();
        let mut queue: VecDeque<usize> = seen.iter().copied().collect();
        while let Some(c) = queue.pop_front() {
            if self.succ[c].is_none() {
                let mut ids = Vec::new();
                for n in self.internal(&self.configs[c].clone()) {
                    ids.push(self.intern(n)?);
                }
                self.succ[c] = Some(ids);
            }
            for &id in self.succ[c].as_ref().expect("filled above") {
                if seen.insert(id) {
                    queue.push_back(id);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }
}

/// The diffracting-queue implementation with one thread per operation.
pub fn queue_implementation(
    max_enq: usize,
    max_deq: usize,
    values: &[String],
    opts: &QueueOptions,
) -> Result<Automaton<Action>> {
    validate(max_enq, max_deq, values)?;
    let threads = threads(max_enq, max_deq);
    let mut ex = Explorer {
        threads: &threads,
        values,
        ids: HashMap::new(),
        configs: Vec::new(),
        succ: Vec::new(),
        limit: opts.state_limit,
    };
    let init = Config {
        eb: 0,
        db: 0,
        queues: [Vec::new(), Vec::new()],
        pcs: vec![Pc::Idle; threads.len()],
    };
    let c0 = ex.intern(init)?;

    let start = ex.closure([c0])?;
    let mut b = AutomatonBuilder::new();
    let mut states: HashMap<Vec<usize>, StateId> = HashMap::new();
    let s0 = b.add_state("c0");
    states.insert(start.clone(), s0);
    b.set_initial(s0);
    let mut work = VecDeque::from([start]);
    while let Some(set) = work.pop_front() {
        let src = states[&set];
        if !ex.configs[set[0]].pcs.iter().any(|pc| pc.is_pending()) {
            b.add_final(src);
        }
        let mut by_action: Vec<(Action, BTreeSet<usize>)> = Vec::new();
        for &c in &set {
            for (action, n) in ex.visible(&ex.configs[c].clone()) {
                let id = ex.intern(n)?;
                match by_action.iter_mut().find(|(a, _)| *a == action) {
                    Some((_, t)) => {
                        t.insert(id);
                    }
                    None => by_action.push((action, BTreeSet::from([id]))),
                }
            }
        }
        by_action.sort_by(|x, y| x.0.cmp(&y.0));
        for (action, targets) in by_action {
            let next = ex.closure(targets)?;
            let tgt = match states.get(&next) {
                Some(&t) => t,
                None => {
                    let t = b.add_state(&format!("c{}", states.len()));
                    states.insert(next.clone(), t);
                    work.push_back(next);
                    t
                }
            };
            b.add_transition(src, action, tgt);
        }
    }
    Ok(b.build())
}

/// A sequential queue of capacity `capacity` over `values`, callable by
/// processes `1..=processes`. Dequeue is only invoked on a nonempty queue.
pub fn queue_spec(capacity: usize, processes: ProcessId, values: &[String]) -> Automaton<Action> {
    let mut b = AutomatonBuilder::new();
    let key = |q: &[u8]| -> String {
        if q.is_empty() {
            "q_".to_string()
        } else {
            let parts: Vec<&str> = q.iter().map(|&v| values[v as usize].as_str()).collect();
            format!("q_{}", parts.join("_"))
        }
    };
    let init = b.add_state(&key(&[]));
    b.set_initial(init);
    let mut seen = BTreeSet::from([Vec::<u8>::new()]);
    let mut work = VecDeque::from([Vec::<u8>::new()]);
    while let Some(q) = work.pop_front() {
        let src = b.add_state(&key(&q));
        b.add_final(src);
        let mut next = Vec::new();
        if q.len() < capacity {
            for v in 0..values.len() as u8 {
                let mut n = q.clone();
                n.push(v);
                for p in 1..=processes {
                    let mid = b.add_state(&format!("{}_enq{p}_{}", key(&q), values[v as usize]));
                    let tgt = b.add_state(&key(&n));
                    b.add_transition(src, Action::invoke(p, ENQ).with_value(&values[v as usize]), mid);
                    b.add_transition(mid, Action::response(p, ENQ), tgt);
                }
                next.push(n);
            }
        }
        if let Some((&head, rest)) = q.split_first() {
            for p in 1..=processes {
                let mid = b.add_state(&format!("{}_deq{p}", key(&q)));
                let tgt = b.add_state(&key(rest));
                b.add_transition(src, Action::invoke(p, DEQ), mid);
                b.add_transition(mid, Action::response(p, DEQ).with_value(&values[head as usize]), tgt);
            }
            next.push(rest.to_vec());
        }
        for n in next {
            if seen.insert(n.clone()) {
                work.push_back(n);
            }
        }
    }
    b.build()
}

fn validate(max_enq: usize, max_deq: usize, values: &[String]) -> Result<()> {
    if max_deq > max_enq {
        return Err(Error::InvalidInstance(format!(
            "{max_deq} dequeues exceed {max_enq} enqueues"
        )));
    }
    if values.len() < max_enq {
        return Err(Error::InvalidInstance(format!(
            "{} values for {max_enq} enqueues",
            values.len()
        )));
    }
    if values.len() > u8::MAX as usize {
        return Err(Error::InvalidInstance("at most 255 values are supported".into()));
    }
    if let Some(v) = values.iter().find(|v| !is_identifier(v)) {
        return Err(Error::InvalidInstance(format!("value `{v}` is not an identifier")));
    }
    let distinct: BTreeSet<&String> = values.iter().collect();
    if distinct.len() != values.len() {
        return Err(Error::InvalidInstance("values must be distinct".into()));
    }
    Ok(())
}

/// Accepted words of an automaton in depth-first order over its
/// determinization, at most `limit` of them. Terminates only on automata with
/// a finite language.
pub fn enumerate_words(m: &Automaton<Action>, limit: usize) -> Vec<Vec<Action>> {
    let mut out = Vec::new();
    let mut word = Vec::new();
    let start = BTreeSet::from([m.initial()]);
    words_from(m, &start, &mut word, &mut out, limit);
    out
}

fn words_from(
    m: &Automaton<Action>,
    set: &BTreeSet<StateId>,
    word: &mut Vec<Action>,
    out: &mut Vec<Vec<Action>>,
    limit: usize,
) {
    if out.len() >= limit {
        return;
    }
    if set.iter().any(|&s| m.is_final(s)) {
        out.push(word.clone());
    }
    let mut by_letter: Vec<(usize, BTreeSet<StateId>)> = Vec::new();
    for &s in set {
        for t in m.outgoing(s) {
            match by_letter.iter_mut().find(|(l, _)| *l == t.letter) {
                Some((_, next)) => {
                    next.insert(t.target);
                }
                None => by_letter.push((t.letter, BTreeSet::from([t.target]))),
            }
        }
    }
    by_letter.sort_by_key(|(l, _)| *l);
    for (l, next) in by_letter {
        if out.len() >= limit {
            return;
        }
        word.push(m.letter(l).clone());
        words_from(m, &next, word, out, limit);
        word.pop();
    }
}

/// Builds the implementation, the sequential specification over `values`,
/// and a list of implementation histories. `H1` comes first when both
/// budgets are at least three and the first three values are `a b c`.
pub fn gen_queue_corpus(max_enq: usize, max_deq: usize, values: &[String]) -> Result<QueueCorpus> {
    gen_queue_corpus_with(max_enq, max_deq, values, &QueueOptions::default())
}

pub fn gen_queue_corpus_with(
    max_enq: usize,
    max_deq: usize,
    values: &[String],
    opts: &QueueOptions,
) -> Result<QueueCorpus> {
    let implementation = queue_implementation(max_enq, max_deq, values, opts)?;
    let processes = (max_enq + max_deq) as ProcessId;
    let specification = queue_spec(max_enq, processes, values);
    let mut histories = Vec::new();
    let h1 = Run::parse(H1).expect("H1 is well formed");
    let include_h1 = max_enq >= 3
        && max_deq >= 3
        && implementation.accepts(&h1.actions());
    if include_h1 && opts.history_limit > 0 {
        histories.push(h1.clone());
    }
    for w in enumerate_words(&implementation, opts.history_limit) {
        if histories.len() >= opts.history_limit {
            break;
        }
        let run = Run::from_actions(w);
        if include_h1 && run == h1 {
            continue;
        }
        histories.push(run);
    }
    Ok(QueueCorpus {
        implementation,
        specification,
        histories,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::history::{is_legal, is_quiescent};
    use crate::quiescence::label_quiescence;

    fn vals(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn thread_layout() {
        let kinds: String = threads(3, 3)
            .iter()
            .map(|t| match t.kind {
                Kind::Enq => 'E',
                Kind::Deq => 'D',
            })
            .collect();
        assert_eq!(kinds, "DEEDDE");
        let ts = threads(3, 3);
        let enq_values: Vec<u8> = ts.iter().filter(|t| t.kind == Kind::Enq).map(|t| t.value).collect();
        assert_eq!(enq_values, vec![0, 1, 2]);
        assert_eq!(threads(2, 0).len(), 2);
        assert!(threads(0, 0).is_empty());
    }

    #[test]
    fn empty_instance_accepts_only_epsilon() {
        let c = gen_queue_corpus(0, 0, &[]).unwrap();
        assert_eq!(enumerate_words(&c.implementation, 10), vec![Vec::<Action>::new()]);
        assert_eq!(c.histories, vec![Run::empty()]);
    }

    #[test]
    fn single_pair() {
        let c = gen_queue_corpus(1, 1, &vals("a")).unwrap();
        label_quiescence(&c.implementation).unwrap();
        label_quiescence(&c.specification).unwrap();
        for h in &c.histories {
            assert!(is_legal(h) && is_quiescent(h), "{h}");
        }
        let full = Run::parse("inv:1:deq inv:2:enq:a res:2:enq res:1:deq:a").unwrap();
        assert!(c.histories.contains(&full));
        let seq = Run::parse("inv:2:enq:a res:2:enq inv:1:deq res:1:deq:a").unwrap();
        assert!(c.histories.contains(&seq));
        // A dequeue alone blocks forever and never returns.
        let lone = Run::parse("inv:1:deq res:1:deq:a").unwrap();
        assert!(!c.implementation.accepts(&lone.actions()));
    }

    #[test]
    fn h1_is_generated() {
        let c = gen_queue_corpus_with(
            3,
            3,
            &vals("a b c"),
            &QueueOptions {
                history_limit: 5,
                ..QueueOptions::default()
            },
        )
        .unwrap();
        assert_eq!(c.histories[0], Run::parse(H1).unwrap());
        assert_eq!(c.histories.len(), 5);
        assert!(c.specification.accepts(&Run::parse(H2).unwrap().actions()));
        assert!(!c.specification.accepts(&Run::parse(H1).unwrap().actions()));
    }

    #[test]
    fn spec_states() {
        let s = queue_spec(2, 1, &vals("a b"));
        // 7 queue contents, enqueue midpoints from 3 of them, dequeue
        // midpoints from 6.
        assert_eq!(s.num_states(), 7 + 3 * 2 + 6);
        let w = Run::parse("inv:1:enq:a res:1:enq inv:1:enq:b res:1:enq inv:1:deq res:1:deq:a")
            .unwrap()
            .actions();
        assert!(s.accepts(&w));
        let w = Run::parse("inv:1:deq res:1:deq:a").unwrap().actions();
        assert!(!s.accepts(&w));
    }

    #[test]
    fn preconditions_and_limits() {
        assert!(matches!(gen_queue_corpus(1, 2, &vals("a")), Err(Error::InvalidInstance(_))));
        assert!(matches!(gen_queue_corpus(2, 1, &vals("a")), Err(Error::InvalidInstance(_))));
        assert!(matches!(gen_queue_corpus(2, 1, &vals("a a")), Err(Error::InvalidInstance(_))));
        let opts = QueueOptions {
            state_limit: 10,
            history_limit: 10,
        };
        assert!(matches!(
            gen_queue_corpus_with(2, 2, &vals("a b"), &opts),
            Err(Error::CapacityExceeded { limit: 10 })
        ));
    }
}
