//! Events and the token grammar shared by automaton and history files.
//!
//! An [`Action`] is what an automaton transition is labelled with: an invoke
//! or a response, tagged with a process, an operation name and an optional
//! value. An [`Event`] is an action occurrence inside a run; the occurrence
//! index keeps repeated identical actions distinct within one run.
//!
//! Tokens are written `inv:<proc>:<op>[:<value>]` or
//! `res:<proc>:<op>[:<value>]`; the quiescence marker is the bare token
//! `delta`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub type ProcessId = u32;

/// The bare token used for the quiescence marker.
pub const DELTA_TOKEN: &str = "delta";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EventKind {
    Invoke,
    Response,
}

/// An un-indexed event: the alphabet of specification and implementation
/// automata.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub kind: EventKind,
    pub process: ProcessId,
    pub op: Arc<str>,
    pub value: Option<Arc<str>>,
}

impl Action {
    pub fn invoke(process: ProcessId, op: &str) -> Self {
        Action {
            kind: EventKind::Invoke,
            process,
            op: op.into(),
            value: None,
        }
    }

    pub fn response(process: ProcessId, op: &str) -> Self {
        Action {
            kind: EventKind::Response,
            process,
            op: op.into(),
            value: None,
        }
    }

    pub fn with_value(mut self, value: &str) -> Self {
        self.value = Some(value.into());
        self
    }

    pub fn is_invoke(&self) -> bool {
        self.kind == EventKind::Invoke
    }

    pub fn is_response(&self) -> bool {
        self.kind == EventKind::Response
    }

    /// `self ⇀ other`: `self` is an invocation and `other` the response of
    /// the same operation on the same process. Values are not compared.
    pub fn matches(&self, other: &Action) -> bool {
        self.is_invoke()
            && other.is_response()
            && self.process == other.process
            && self.op == other.op
    }

    /// Parses a single event token. `delta` is rejected with a message that
    /// points at the δ-run / δ-automaton formats.
    pub fn parse_token(token: &str) -> std::result::Result<Self, String> {
        if token == DELTA_TOKEN {
            return Err("`delta` is only legal in delta automata and delta runs".into());
        }
        let mut parts = token.split(':');
        let kind = match parts.next() {
            Some("inv") => EventKind::Invoke,
            Some("res") => EventKind::Response,
            _ => return Err(format!("`{token}` does not start with `inv:` or `res:`")),
        };
        let process = parts
            .next()
            .filter(|p| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit()))
            .ok_or_else(|| format!("`{token}` lacks a nonnegative integer process"))?
            .parse::<ProcessId>()
            .map_err(|e| format!("`{token}`: process id {e}"))?;
        let op = parts
            .next()
            .filter(|op| is_identifier(op))
            .ok_or_else(|| format!("`{token}` lacks an operation identifier"))?;
        let value = match parts.next() {
            None => None,
            Some(v) if is_identifier(v) => Some(Arc::from(v)),
            Some(v) => return Err(format!("`{token}`: `{v}` is not an identifier")),
        };
        if parts.next().is_some() {
            return Err(format!("`{token}` has too many `:`-separated fields"));
        }
        Ok(Action {
            kind,
            process,
            op: op.into(),
            value,
        })
    }
}

/// Identifiers are nonempty runs of ASCII letters, digits and underscores.
pub fn is_identifier(s: &str) -> bool {
    !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            EventKind::Invoke => "inv",
            EventKind::Response => "res",
        };
        write!(f, "{kind}:{}:{}", self.process, self.op)?;
        if let Some(v) = &self.value {
            write!(f, ":{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Action {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Action::parse_token(s)
    }
}

/// An action occurrence within a run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    pub action: Action,
    pub occ: u32,
}

impl Event {
    pub fn process(&self) -> ProcessId {
        self.action.process
    }

    pub fn is_invoke(&self) -> bool {
        self.action.is_invoke()
    }

    pub fn is_response(&self) -> bool {
        self.action.is_response()
    }

    pub fn matches(&self, other: &Event) -> bool {
        self.action.matches(&other.action)
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.action.fmt(f)
    }
}

/// Alphabet letter of a δ-automaton: an action or the quiescence marker.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Delta,
    Action(Action),
}

impl Label {
    pub fn action(&self) -> Option<&Action> {
        match self {
            Label::Delta => None,
            Label::Action(a) => Some(a),
        }
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, Label::Delta)
    }

    pub fn parse_token(token: &str) -> std::result::Result<Self, String> {
        if token == DELTA_TOKEN {
            Ok(Label::Delta)
        } else {
            Action::parse_token(token).map(Label::Action)
        }
    }
}

impl From<Action> for Label {
    fn from(a: Action) -> Self {
        Label::Action(a)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Delta => f.write_str(DELTA_TOKEN),
            Label::Action(a) => a.fmt(f),
        }
    }
}
