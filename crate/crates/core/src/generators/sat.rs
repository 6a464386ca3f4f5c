//! One-in-three SAT reduced to QC membership.
//!
//! The spec has main states `s`, `s0..sk` and `s_final`. Variable `i` gets
//! two paths from `s{i-1}` to `s{i}`: the true path carries one call pair
//! `e_j` per occurrence of `v_i` in clause `j`, the false path one per
//! occurrence of `¬v_i`. Clause `j`'s calls run on process `j`; the framing
//! call `e0` runs on process 0 and the closing call `e` on process `n+1`.
//! The run `e0 e1 ē1 … en ēn e ē ē0` is a single segment, so it is QC-allowed
//! iff some choice of paths uses every clause pair exactly once.

use std::fmt;
use std::str::FromStr;

use crate::automaton::{Automaton, AutomatonBuilder};
use crate::error::{Error, Result};
use crate::event::{Action, ProcessId};
use crate::history::Run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    /// 1-based variable index.
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal { var, positive: true }
    }

    pub fn neg(var: usize) -> Self {
        Literal {
            var,
            positive: false,
        }
    }

    pub fn eval(&self, assignment: &[bool]) -> bool {
        assignment[self.var - 1] == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.var)
        } else {
            write!(f, "-{}", self.var)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatInstance {
    pub num_vars: usize,
    pub clauses: Vec<[Literal; 3]>,
}

impl SatInstance {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>) -> Result<Self> {
        if num_vars == 0 {
            return Err(Error::InvalidInstance("at least one variable is required".into()));
        }
        for (j, c) in clauses.iter().enumerate() {
            for l in c {
                if l.var == 0 || l.var > num_vars {
                    return Err(Error::InvalidInstance(format!(
                        "clause {} mentions variable {} outside 1..={num_vars}",
                        j + 1,
                        l.var
                    )));
                }
            }
        }
        Ok(SatInstance { num_vars, clauses })
    }

    /// C1 = v1 ∨ v2 ∨ ¬v3, C2 = v1 ∨ ¬v2 ∨ v4, C3 = v2 ∨ v3 ∨ ¬v4.
    pub fn worked_example() -> Self {
        use Literal as L;
        SatInstance {
            num_vars: 4,
            clauses: vec![
                [L::pos(1), L::pos(2), L::neg(3)],
                [L::pos(1), L::neg(2), L::pos(4)],
                [L::pos(2), L::pos(3), L::neg(4)],
            ],
        }
    }

    /// Whether every clause has exactly one true literal, counting repeated
    /// literals once per occurrence.
    pub fn one_in_three(&self, assignment: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().filter(|l| l.eval(assignment)).count() == 1)
    }

    /// True if some clause repeats a variable.
    pub fn has_duplicate_literals(&self) -> bool {
        self.clauses
            .iter()
            .any(|c| c[0].var == c[1].var || c[0].var == c[2].var || c[1].var == c[2].var)
    }

    /// Parses `vars: k` followed by one clause of three signed integers per
    /// line. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut num_vars = None;
        let mut clauses = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let col = line.len() - line.trim_start().len() + 1;
            if let Some(rest) = line.trim_start().strip_prefix("vars:") {
                if num_vars.is_some() {
                    return Err(Error::parse(idx + 1, col, "duplicate `vars:` line"));
                }
                let k = rest
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::parse(idx + 1, col, format!("bad variable count: {e}")))?;
                num_vars = Some(k);
                continue;
            }
            if num_vars.is_none() {
                return Err(Error::parse(idx + 1, col, "expected `vars: k` first"));
            }
            let mut lits = Vec::new();
            let mut pos = 0;
            for tok in line.split_whitespace() {
                let at = line[pos..].find(tok).unwrap() + pos;
                pos = at + tok.len();
                let n: i64 = tok
                    .parse()
                    .map_err(|_| Error::parse(idx + 1, at + 1, format!("`{tok}` is not an integer")))?;
                if n == 0 {
                    return Err(Error::parse(idx + 1, at + 1, "literal 0 is not allowed"));
                }
                lits.push(Literal {
                    var: n.unsigned_abs() as usize,
                    positive: n > 0,
                });
            }
            let clause: [Literal; 3] = lits
                .try_into()
                .map_err(|_| Error::parse(idx + 1, col, "a clause has exactly three literals"))?;
            clauses.push(clause);
        }
        let num_vars = num_vars.ok_or_else(|| Error::parse(1, 1, "missing `vars:` line"))?;
        SatInstance::new(num_vars, clauses)
    }
}

impl fmt::Display for SatInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vars: {}", self.num_vars)?;
        for c in &self.clauses {
            writeln!(f, "{} {} {}", c[0], c[1], c[2])?;
        }
        Ok(())
    }
}

impl FromStr for SatInstance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SatInstance::parse(s)
    }
}

/// Tries all 2^k assignments.
pub fn sat_brute_force(inst: &SatInstance) -> bool {
    assert!(inst.num_vars < 32, "brute force is limited to 31 variables");
    (0u32..1 << inst.num_vars).any(|bits| {
        let assignment: Vec<bool> = (0..inst.num_vars).map(|i| bits >> i & 1 == 1).collect();
        inst.one_in_three(&assignment)
    })
}

#[derive(Debug, Clone)]
pub struct SatReduction {
    pub spec: Automaton<Action>,
    pub run: Run,
    /// Label of the true path of each variable, in variable order.
    pub true_paths: Vec<Vec<Action>>,
    /// Label of the false path of each variable.
    pub false_paths: Vec<Vec<Action>>,
    pub duplicate_literals: bool,
}

fn call(process: ProcessId, op: &str) -> [Action; 2] {
    [Action::invoke(process, op), Action::response(process, op)]
}

/// The call pair standing for clause `j` (1-based).
pub fn clause_call(j: usize) -> [Action; 2] {
    call(j as ProcessId, &format!("e{j}"))
}

pub fn gen_sat_membership(inst: &SatInstance) -> SatReduction {
    let n = inst.clauses.len();
    let k = inst.num_vars;
    let label = |var: usize, positive: bool| -> Vec<Action> {
        let mut w = Vec::new();
        for (j, c) in inst.clauses.iter().enumerate() {
            for l in c {
                if l.var == var && l.positive == positive {
                    w.extend(clause_call(j + 1));
                }
            }
        }
        w
    };
    let true_paths: Vec<Vec<Action>> = (1..=k).map(|i| label(i, true)).collect();
    let false_paths: Vec<Vec<Action>> = (1..=k).map(|i| label(i, false)).collect();

    let mut eps = EpsBuilder::default();
    let s = eps.state("s");
    let main: Vec<usize> = (0..=k).map(|i| eps.state(&format!("s{i}"))).collect();
    let fin = eps.state("s_final");
    let [e0, e0r] = call(0, "e0");
    let [e, er] = call(n as ProcessId + 1, "e");
    eps.path(s, &[e0, e0r], main[0], "open");
    for i in 1..=k {
        eps.path(main[i - 1], &true_paths[i - 1], main[i], &format!("t{i}"));
        eps.path(main[i - 1], &false_paths[i - 1], main[i], &format!("f{i}"));
    }
    eps.path(main[k], &[e.clone(), er.clone()], fin, "close");
    let spec = eps.build(s, fin);

    let [e0, e0r] = call(0, "e0");
    let mut word = vec![e0];
    for j in 1..=n {
        word.extend(clause_call(j));
    }
    word.extend([e, er, e0r]);

    SatReduction {
        spec,
        run: Run::from_actions(word),
        true_paths,
        false_paths,
        duplicate_literals: inst.has_duplicate_literals(),
    }
}

/// Automaton with silent edges, compiled away by closure.
#[derive(Default)]
struct EpsBuilder {
    names: Vec<String>,
    edges: Vec<(usize, Option<Action>, usize)>,
}

impl EpsBuilder {
    fn state(&mut self, name: &str) -> usize {
        self.names.push(name.to_string());
        self.names.len() - 1
    }

    fn path(&mut self, from: usize, word: &[Action], to: usize, stem: &str) {
        if word.is_empty() {
            self.edges.push((from, None, to));
            return;
        }
        let mut cur = from;
        for (i, a) in word.iter().enumerate() {
            let next = if i + 1 == word.len() {
                to
            } else {
                self.state(&format!("{stem}_{}", i + 1))
            };
            self.edges.push((cur, Some(a.clone()), next));
            cur = next;
        }
    }

    fn closure(&self, s: usize) -> Vec<usize> {
        let mut out = vec![s];
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            for (src, l, dst) in &self.edges {
                if *src == x && l.is_none() && !out.contains(dst) {
                    out.push(*dst);
                }
            }
            i += 1;
        }
        out
    }

    fn build(&self, initial: usize, fin: usize) -> Automaton<Action> {
        let mut b = AutomatonBuilder::new();
        for name in &self.names {
            b.add_state(name);
        }
        b.set_initial(initial);
        for s in 0..self.names.len() {
            let cl = self.closure(s);
            if cl.contains(&fin) {
                b.add_final(s);
            }
            for &x in &cl {
                for (src, l, dst) in &self.edges {
                    if let (true, Some(a)) = (*src == x, l) {
                        b.add_transition(s, a.clone(), *dst);
                    }
                }
            }
        }
        b.build()
    }
}
