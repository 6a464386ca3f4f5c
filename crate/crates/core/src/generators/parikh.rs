//! Parikh-image inclusion reduced to QC correctness.
//!
//! Each symbol `x` becomes a call pair `inv:1:x res:1:x`; a framing call
//! `e` runs on process 0. The implementation `A′` wraps every word of `A`
//! as `e · pairs · ē`, which keeps the whole run inside one segment. The
//! specification `B′` appends `e ē` to every word of `B`. Then every run of
//! `A′` is QC-allowed by `B′` iff each Parikh image of `A` is one of `B`.

use std::collections::BTreeSet;

use crate::automaton::{Automaton, AutomatonBuilder, StateId};
use crate::error::{Error, Result};
use crate::event::{Action, ProcessId};

pub const FRAME_PROCESS: ProcessId = 0;
pub const SYMBOL_PROCESS: ProcessId = 1;

fn frame() -> [Action; 2] {
    [
        Action::invoke(FRAME_PROCESS, "e"),
        Action::response(FRAME_PROCESS, "e"),
    ]
}

fn symbol(x: &str) -> [Action; 2] {
    [
        Action::invoke(SYMBOL_PROCESS, x),
        Action::response(SYMBOL_PROCESS, x),
    ]
}

/// Builds `(A′, B′)`. Both automata must have the same alphabet.
pub fn gen_parikh_pair(
    a: &Automaton<String>,
    b: &Automaton<String>,
) -> Result<(Automaton<Action>, Automaton<Action>)> {
    let sa: BTreeSet<&String> = a.letters().iter().collect();
    let sb: BTreeSet<&String> = b.letters().iter().collect();
    if sa != sb {
        return Err(Error::AlphabetMismatch(format!(
            "{{{}}} vs {{{}}}",
            sa.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", "),
            sb.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    let [e, er] = frame();

    let mut ab = AutomatonBuilder::new();
    for s in 0..a.num_states() {
        ab.add_state(a.state_name(s));
    }
    let init = ab.add_fresh_state("init");
    ab.set_initial(init);
    ab.add_transition(init, e.clone(), a.initial());
    expand(a, &mut ab);
    let fin = ab.add_fresh_state("fin");
    ab.add_final(fin);
    for f in a.finals() {
        ab.add_transition(f, er.clone(), fin);
    }

    let mut bb = AutomatonBuilder::new();
    for s in 0..b.num_states() {
        bb.add_state(b.state_name(s));
    }
    bb.set_initial(b.initial());
    expand(b, &mut bb);
    let mid = bb.add_fresh_state("close");
    let fin = bb.add_fresh_state("fin");
    bb.add_final(fin);
    for f in b.finals() {
        bb.add_transition(f, e.clone(), mid);
    }
    bb.add_transition(mid, er, fin);

    Ok((ab.build(), bb.build()))
}

fn expand(m: &Automaton<String>, b: &mut AutomatonBuilder<Action>) {
    for x in m.letters() {
        for act in symbol(x) {
            b.add_letter(act);
        }
    }
    for (i, t) in m.transitions().iter().enumerate() {
        let [inv, res] = symbol(m.letter(t.letter));
        let mid = b.add_fresh_state(&format!("t{i}"));
        b.add_transition(t.source, inv, mid);
        b.add_transition(mid, res, t.target);
    }
}

/// A bound under which every path of `A′` fits in one segment:
/// `2 · longest reachable path of A + 2`. Fails if a cycle of `A` is
/// reachable.
pub fn parikh_bound(a: &Automaton<String>) -> Result<usize> {
    // 0 = unvisited, 1 = on the stack, 2 = done.
    fn longest(a: &Automaton<String>, s: StateId, mark: &mut [u8], memo: &mut [usize]) -> Result<usize> {
        match mark[s] {
            1 => return Err(Error::NotAcyclic(format!("state {} is on a reachable cycle", a.state_name(s)))),
            2 => return Ok(memo[s]),
            _ => {}
        }
        mark[s] = 1;
        let mut best = 0;
        for t in a.outgoing(s) {
            best = best.max(1 + longest(a, t.target, mark, memo)?);
        }
        mark[s] = 2;
        memo[s] = best;
        Ok(best)
    }
    let mut mark = vec![0; a.num_states()];
    let mut memo = vec![0; a.num_states()];
    Ok(2 * longest(a, a.initial(), &mut mark, &mut memo)? + 2)
}
