//! `qcheck`: membership and correctness checks for quiescent consistency,
//! plus generators for reduction instances and the diffracting queue.
//!
//! Exit status: 0 PASS, 1 FAIL, 2 input error, 3 bound or resource error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qcheck::correctness::DEFAULT_PAIR_LIMIT;
use qcheck::generators::parikh::{gen_parikh_pair, parikh_bound};
use qcheck::generators::pcp::{gen_pcp_instance, PcpInstance};
use qcheck::generators::queue::{gen_queue_corpus_with, QueueOptions};
use qcheck::generators::sat::{gen_sat_membership, SatInstance};
use qcheck::quiescence::stuck_states;
use qcheck::{
    check_correctness, check_membership, label_quiescence, Action, Automaton, CorrectnessOptions,
    MembershipOptions, Mode, Overflow, Run, Verdict,
};

const LIMIT_VAR: &str = "QCHECK_LIMIT";

#[derive(Parser)]
#[command(name = "qcheck", version, about = "Quiescent consistency checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Is a history allowed by a sequential specification?
    Member(MemberArgs),
    /// Are all histories of an implementation allowed by a specification?
    Correct(CorrectArgs),
    /// One-in-three SAT instance to a membership instance.
    GenSat(GenSatArgs),
    /// PCP instance to a QSC correctness instance.
    GenPcp(GenPcpArgs),
    /// Two symbol automata to a QC correctness instance.
    GenParikh(GenParikhArgs),
    /// Diffracting-queue implementation, queue spec and sample histories.
    GenQueue(GenQueueArgs),
    /// Pending processes of every state of an automaton.
    Label(LabelArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "qc")]
    mode: Mode,
    /// Use the per-process counter acceptor for QSC segments with at most
    /// this many processes.
    #[arg(long)]
    proc_bound: Option<usize>,
    /// Longest segment handled by the subset acceptors.
    #[arg(long, default_value_t = qcheck::acceptor::DEFAULT_WIDTH_LIMIT)]
    width_limit: usize,
    /// Emit one JSON document instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct MemberArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    history: PathBuf,
    /// Reject histories with a segment longer than this.
    #[arg(long)]
    bound: Option<usize>,
    /// Print the matching specification run.
    #[arg(long)]
    witness: bool,
}

#[derive(Args)]
struct CorrectArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long = "impl")]
    implementation: PathBuf,
    /// Maximum segment length.
    #[arg(long)]
    bound: usize,
    /// Skip implementation segments longer than the bound instead of failing.
    #[arg(long)]
    truncate: bool,
    /// Maximum number of (state, state set) pairs; overrides QCHECK_LIMIT.
    #[arg(long)]
    limit: Option<usize>,
    /// Compute segment behaviours on all cores. Output is unchanged.
    #[arg(long)]
    parallel: bool,
}

#[derive(Args)]
struct GenSatArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Directory for `spec.fa` and `history.run`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenPcpArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Directory for `spec.fa` and `impl.fa`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenParikhArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    /// Directory for `spec.fa` and `impl.fa`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenQueueArgs {
    #[arg(long)]
    enq: usize,
    #[arg(long)]
    deq: usize,
    /// Comma-separated enqueue values.
    #[arg(long, value_delimiter = ',', default_value = "a,b,c")]
    values: Vec<String>,
    /// Directory for `spec.fa`, `impl.fa` and `histories/`.
    #[arg(long)]
    out: PathBuf,
    /// Maximum number of histories written.
    #[arg(long, default_value_t = qcheck::generators::queue::DEFAULT_HISTORY_LIMIT)]
    histories: usize,
    /// Maximum number of implementation configurations.
    #[arg(long, default_value_t = qcheck::generators::queue::DEFAULT_STATE_LIMIT)]
    state_limit: usize,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    fa: PathBuf,
    /// Also list states from which no final state is reachable.
    #[arg(long)]
    stuck: bool,
}

enum Failure {
    Input(String),
    File(PathBuf, qcheck::Error),
    Check(qcheck::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check(e) | Failure::File(_, e) if e.is_resource() => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Input(_) => "InputError",
            Failure::File(_, e) | Failure::Check(e) => e.name(),
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Input(m) => m.clone(),
            Failure::File(p, e) => format!("{}: {e}", p.display()),
            Failure::Check(e) => e.to_string(),
        }
    }
}

impl From<qcheck::Error> for Failure {
    fn from(e: qcheck::Error) -> Self {
        Failure::Check(e)
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_file<T>(path: &Path, parse: impl FnOnce(&str) -> qcheck::Result<T>) -> Result<T, Failure> {
    let text = read(path)?;
    parse(&text).map_err(|e| Failure::File(path.to_path_buf(), e))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn pair_limit(flag: Option<usize>) -> Result<usize, Failure> {
    if let Some(l) = flag {
        return Ok(l);
    }
    match std::env::var(LIMIT_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Input(format!("{LIMIT_VAR}={v} is not a nonnegative integer"))),
        Err(_) => Ok(DEFAULT_PAIR_LIMIT),
    }
}

struct Report {
    json: bool,
    text: String,
    doc: Value,
    code: u8,
}

fn points(p: &[usize]) -> String {
    p.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

fn verdict_report(v: &Verdict, json: bool, show_witness: bool, witness_key: &str) -> Report {
    let mut text = String::new();
    let _ = writeln!(text, "{}", v.outcome);
    let bound = v.stats.bound.map_or("none".to_string(), |b| b.to_string());
    let _ = writeln!(text, "# bound: {bound}");
    let _ = writeln!(text, "# explored: {}", v.stats.explored);
    let _ = writeln!(text, "# pairs: {}", v.stats.pairs);
    let _ = writeln!(text, "# segments: {}", v.stats.segments);
    for w in &v.warnings {
        let _ = writeln!(text, "# warning: {w}");
    }
    if show_witness {
        if let Some(w) = &v.witness {
            let _ = writeln!(text, "# {witness_key}:");
            let _ = writeln!(text, "{w}");
            let _ = writeln!(text, "# quiescent: {}", points(&v.quiescent_points));
        }
    }
    if let Some(u) = &v.unmatched {
        let _ = writeln!(text, "# unmatched-segment: {u}");
    }
    let doc = json!({
        "verdict": v.outcome.to_string(),
        "witness": if show_witness { v.witness.as_ref().map(|w| w.to_string()) } else { None },
        "quiescent_points": if show_witness { v.quiescent_points.clone() } else { Vec::new() },
        "unmatched_segment": v.unmatched.as_ref().map(|u| u.to_string()),
        "stats": {
            "explored": v.stats.explored,
            "pairs": v.stats.pairs,
            "segments": v.stats.segments,
            "bound": v.stats.bound,
        },
        "warnings": v.warnings,
        "errors": [],
    });
    Report {
        json,
        text,
        doc,
        code: if v.is_pass() { 0 } else { 1 },
    }
}

fn info_report(json: bool, lines: Vec<(String, Value)>) -> Report {
    let mut text = String::new();
    let mut doc = serde_json::Map::new();
    for (k, v) in lines {
        let shown = match &v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        let _ = writeln!(text, "# {k}: {shown}");
        doc.insert(k, v);
    }
    doc.insert("errors".into(), json!([]));
    Report {
        json,
        text,
        doc: Value::Object(doc),
        code: 0,
    }
}

fn member(a: &MemberArgs) -> Result<Report, Failure> {
    let spec: Automaton<Action> = parse_file(&a.spec, Automaton::parse)?;
    let run = parse_file(&a.history, Run::parse)?;
    let opts = MembershipOptions {
        bound: a.bound,
        proc_bound: a.common.proc_bound,
        width_limit: a.common.width_limit,
    };
    let v = check_membership(&spec, &run, a.common.mode, &opts)?;
    Ok(verdict_report(&v, a.common.json, a.witness, "witness"))
}

fn correct(a: &CorrectArgs) -> Result<Report, Failure> {
    let spec: Automaton<Action> = parse_file(&a.spec, Automaton::parse)?;
    let imp: Automaton<Action> = parse_file(&a.implementation, Automaton::parse)?;
    let opts = CorrectnessOptions {
        bound: a.bound,
        overflow: if a.truncate { Overflow::Prune } else { Overflow::Error },
        pair_limit: pair_limit(a.limit)?,
        width_limit: a.common.width_limit,
        proc_bound: a.common.proc_bound,
        parallel: a.parallel,
    };
    let v = check_correctness(&spec, &imp, a.common.mode, &opts)?;
    Ok(verdict_report(&v, a.common.json, true, "counterexample"))
}

fn gen_sat(a: &GenSatArgs) -> Result<Report, Failure> {
    let inst = parse_file(&a.instance, SatInstance::parse)?;
    let red = gen_sat_membership(&inst);
    create_dir(&a.out)?;
    write(&a.out.join("spec.fa"), &red.spec.to_string())?;
    write(&a.out.join("history.run"), &format!("{}\n", red.run))?;
    Ok(info_report(
        false,
        vec![
            ("variables".into(), json!(inst.num_vars)),
            ("clauses".into(), json!(inst.clauses.len())),
            ("duplicate-literals".into(), json!(red.duplicate_literals)),
            ("spec-states".into(), json!(red.spec.num_states())),
            ("history-events".into(), json!(red.run.len())),
        ],
    ))
}

fn gen_pcp(a: &GenPcpArgs) -> Result<Report, Failure> {
    let inst = parse_file(&a.instance, PcpInstance::parse)?;
    let (imp, spec) = gen_pcp_instance(&inst);
    create_dir(&a.out)?;
    write(&a.out.join("impl.fa"), &imp.to_string())?;
    write(&a.out.join("spec.fa"), &spec.to_string())?;
    Ok(info_report(
        false,
        vec![
            ("index-pairs".into(), json!(inst.pairs.len())),
            ("impl-states".into(), json!(imp.num_states())),
            ("spec-states".into(), json!(spec.num_states())),
        ],
    ))
}

fn gen_parikh(a: &GenParikhArgs) -> Result<Report, Failure> {
    let ma: Automaton<String> = parse_file(&a.a, Automaton::parse)?;
    let mb: Automaton<String> = parse_file(&a.b, Automaton::parse)?;
    let (imp, spec) = gen_parikh_pair(&ma, &mb)?;
    create_dir(&a.out)?;
    write(&a.out.join("impl.fa"), &imp.to_string())?;
    write(&a.out.join("spec.fa"), &spec.to_string())?;
    let bound = match parikh_bound(&ma) {
        Ok(b) => json!(b),
        Err(_) => json!("none (A has a cycle)"),
    };
    Ok(info_report(
        false,
        vec![
            ("bound".into(), bound),
            ("impl-states".into(), json!(imp.num_states())),
            ("spec-states".into(), json!(spec.num_states())),
        ],
    ))
}

fn gen_queue(a: &GenQueueArgs) -> Result<Report, Failure> {
    let opts = QueueOptions {
        state_limit: a.state_limit,
        history_limit: a.histories,
    };
    let corpus = gen_queue_corpus_with(a.enq, a.deq, &a.values, &opts)?;
    create_dir(&a.out)?;
    write(&a.out.join("impl.fa"), &corpus.implementation.to_string())?;
    write(&a.out.join("spec.fa"), &corpus.specification.to_string())?;
    let dir = a.out.join("histories");
    create_dir(&dir)?;
    let width = corpus.histories.len().max(1).to_string().len();
    for (i, h) in corpus.histories.iter().enumerate() {
        write(&dir.join(format!("h{i:0width$}.run")), &format!("{h}\n"))?;
    }
    Ok(info_report(
        false,
        vec![
            ("impl-states".into(), json!(corpus.implementation.num_states())),
            ("spec-states".into(), json!(corpus.specification.num_states())),
            ("histories".into(), json!(corpus.histories.len())),
        ],
    ))
}

fn label(a: &LabelArgs) -> Result<Report, Failure> {
    let m: Automaton<Action> = parse_file(&a.fa, Automaton::parse)?;
    let l = label_quiescence(&m)?;
    let mut text = String::new();
    let mut states = Vec::new();
    for s in 0..m.num_states() {
        let name = m.state_name(s);
        match l.pending(s) {
            Some(p) => {
                let pending: Vec<String> = p.iter().map(|(proc, op)| format!("{proc}:{op}")).collect();
                let _ = writeln!(
                    text,
                    "{name} quiescent={} pending=[{}]",
                    l.is_quiescent(s),
                    pending.join(" ")
                );
                states.push(json!({
                    "state": name,
                    "reachable": true,
                    "quiescent": l.is_quiescent(s),
                    "pending": pending,
                }));
            }
            None => {
                let _ = writeln!(text, "{name} unreachable");
                states.push(json!({ "state": name, "reachable": false }));
            }
        }
    }
    let mut doc = json!({ "states": states, "errors": [] });
    if a.stuck {
        let stuck: Vec<&str> = stuck_states(&m, &l).into_iter().map(|s| m.state_name(s)).collect();
        let _ = writeln!(text, "# stuck: {}", stuck.join(" "));
        doc["stuck"] = json!(stuck);
    }
    Ok(Report {
        json: false,
        text,
        doc,
        code: 0,
    })
}

fn json_flag(cmd: &Command) -> bool {
    match cmd {
        Command::Member(a) => a.common.json,
        Command::Correct(a) => a.common.json,
        _ => false,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let json = json_flag(&cli.command);
    let result = match &cli.command {
        Command::Member(a) => member(a),
        Command::Correct(a) => correct(a),
        Command::GenSat(a) => gen_sat(a),
        Command::GenPcp(a) => gen_pcp(a),
        Command::GenParikh(a) => gen_parikh(a),
        Command::GenQueue(a) => gen_queue(a),
        Command::Label(a) => label(a),
    };
    match result {
        Ok(r) => {
            if r.json {
                println!("{}", r.doc);
            } else {
                print!("{}", r.text);
            }
            ExitCode::from(r.code)
        }
        Err(f) => {
            if json {
                let doc = json!({
                    "verdict": Value::Null,
                    "witness": Value::Null,
                    "quiescent_points": [],
                    "unmatched_segment": Value::Null,
                    "stats": Value::Null,
                    "warnings": [],
                    "errors": [{ "kind": f.kind(), "message": f.message() }],
                });
                println!("{doc}");
            } else {
                eprintln!("error: {}: {}", f.kind(), f.message());
            }
            ExitCode::from(f.code())
        }
    }
}
