//! Checking concurrent histories and implementations against sequential
//! specifications under quiescent consistency (QC) and quiescent sequential
//! consistency (QSC).
//!
//! Specifications and implementations are finite automata over invoke and
//! response events. [`membership`] decides whether one run is allowed by a
//! specification; [`correctness`] decides, for a bound on the number of
//! events between quiescent points, whether every run of an implementation
//! is. [`generators`] builds hardness-reduction instances and a
//! diffracting-queue model for differential testing.

pub mod acceptor;
pub mod automaton;
pub mod correctness;
pub mod error;
pub mod event;
pub mod generators;
pub mod history;
pub mod membership;
pub mod parallel;
pub mod quiescence;
pub mod verdict;

pub use acceptor::{build_perm_acceptor, PermAcceptor};
pub use automaton::{Automaton, AutomatonBuilder, Letter, StateId};
pub use correctness::{check_correctness, CorrectnessOptions, Overflow};
pub use error::{Error, Result};
pub use event::{Action, Event, EventKind, Label, ProcessId};
pub use history::{Run, Segment, Token};
pub use membership::{check_membership, check_membership_brute, MembershipOptions, Mode};
pub use quiescence::{build_impl_delta, build_spec_delta, label_quiescence, DeltaAutomaton};
pub use verdict::{Outcome, Verdict};
