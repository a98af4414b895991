use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::exec::{ExecStatus, ExecutionResult, IdentifierScript, RunnerError, ScriptRunner};
use super::extract::{extract_code, extract_instruction};
use super::provider::{Message, Provider, ProviderError};
use super::target::{render_ground_truth, render_test_cases, Demo, Target};
use super::templates::{render, RenderError, CODE_GEN, CODE_REPAIR, INSTRUCTION_GEN, INSTRUCTION_MERGE};
use crate::annotation::AnnotationSet;
use crate::netlist::Netlist;

pub const DEFAULT_RETRY_LIMIT: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PipelineError {
    Provider(ProviderError),
    MalformedReply(String),
    Render(RenderError),
    Runner(RunnerError),
    NoDemos(String),
    AlreadyPassing,
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PipelineError::Provider(e) => write!(f, "{e}"),
            PipelineError::MalformedReply(why) => write!(f, "malformed reply: {why}"),
            PipelineError::Render(e) => write!(f, "{e}"),
            PipelineError::Runner(e) => write!(f, "{e}"),
            PipelineError::NoDemos(t) => write!(f, "no demonstration covers target {t}"),
            PipelineError::AlreadyPassing => f.write_str("repair requested for a passing execution"),
        }
    }
}

impl core::error::Error for PipelineError {}

impl From<ProviderError> for PipelineError {
    fn from(e: ProviderError) -> Self {
        PipelineError::Provider(e)
    }
}
impl From<RenderError> for PipelineError {
    fn from(e: RenderError) -> Self {
        PipelineError::Render(e)
    }
}
impl From<RunnerError> for PipelineError {
    fn from(e: RunnerError) -> Self {
        PipelineError::Runner(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    InstructionGen,
    InstructionMerge,
    CodeGen,
    CodeRepair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Accepted,
    Cautious,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum LogRecord {
    Call {
        target: String,
        step: Step,
        prompt: String,
        reply: Option<String>,
        error: Option<String>,
    },
    Execution {
        target: String,
        attempt: usize,
        status: ExecStatus,
        message: String,
        parsed_output: bool,
    },
    Outcome {
        target: String,
        outcome: Outcome,
        repairs: usize,
        retry_limit: usize,
        error: Option<String>,
    },
}

impl LogRecord {
    pub fn target(&self) -> &str {
        match self {
            LogRecord::Call { target, .. } | LogRecord::Execution { target, .. } | LogRecord::Outcome { target, .. } => target,
        }
    }
}

/// Every prompt, reply, execution and outcome of a run, in order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<LogRecord>,
}

impl RunLog {
    pub fn push(&mut self, r: LogRecord) {
        self.records.push(r);
    }

    pub fn provider_calls(&self, target: &str) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r, LogRecord::Call { .. }) && r.target() == target)
            .count()
    }

    pub fn calls_at(&self, target: &str, step: Step) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r, LogRecord::Call { step: s, .. } if *s == step) && r.target() == target)
            .count()
    }

    pub fn executions(&self) -> usize {
        self.records.iter().filter(|r| matches!(r, LogRecord::Execution { .. })).count()
    }

    pub fn status_counts(&self) -> BTreeMap<ExecStatus, usize> {
        let mut m: BTreeMap<ExecStatus, usize> = ExecStatus::ALL.iter().map(|s| (*s, 0)).collect();
        for r in &self.records {
            if let LogRecord::Execution { status, .. } = r {
                *m.get_mut(status).unwrap() += 1;
            }
        }
        m
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (&str, Outcome, usize, usize)> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Outcome { target, outcome, repairs, retry_limit, .. } => {
                Some((target.as_str(), *outcome, *repairs, *retry_limit))
            }
            _ => None,
        })
    }

    pub fn errors(&self) -> impl Iterator<Item = (&str, &str)> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Outcome { target, error: Some(e), .. } => Some((target.as_str(), e.as_str())),
            _ => None,
        })
    }

    /// One `"<target> <repairs>/<limit>"` line per target.
    pub fn retry_summary(&self) -> Vec<String> {
        self.outcomes().map(|(t, _, used, limit)| format!("{t} {used}/{limit}")).collect()
    }

    pub fn status_histogram(&self) -> String {
        let counts = self.status_counts();
        let total = self.executions();
        let mut out = String::new();
        for (status, n) in counts {
            let pct = if total == 0 { 0.0 } else { 100.0 * n as f64 / total as f64 };
            out.push_str(&format!("{:<18} {:>4} {:>6.1}%\n", status.as_str(), n, pct));
        }
        out.push_str(&format!("{:<18} {:>4}\n", "total", total));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CodebaseEntry {
    Accepted { script: IdentifierScript },
    Cautious { script: IdentifierScript },
    Empty,
}

impl CodebaseEntry {
    pub fn kind(&self) -> Outcome {
        match self {
            CodebaseEntry::Accepted { .. } => Outcome::Accepted,
            CodebaseEntry::Cautious { .. } => Outcome::Cautious,
            CodebaseEntry::Empty => Outcome::Empty,
        }
    }

    pub fn script(&self) -> Option<&IdentifierScript> {
        match self {
            CodebaseEntry::Accepted { script } | CodebaseEntry::Cautious { script } => Some(script),
            CodebaseEntry::Empty => None,
        }
    }
}

/// One entry per target.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebase {
    pub entries: BTreeMap<String, CodebaseEntry>,
}

impl Codebase {
    pub fn get(&self, target: &str) -> Option<&CodebaseEntry> {
        self.entries.get(target)
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub retry_limit: usize,
    pub seed: u64,
    pub demos: Vec<Demo>,
}

impl PipelineConfig {
    pub fn new(demos: Vec<Demo>) -> Self {
        PipelineConfig { retry_limit: DEFAULT_RETRY_LIMIT, seed: 0, demos }
    }

    /// Demos whose annotations contain the target, in configured order.
    pub fn demos_for(&self, target: &Target) -> Vec<&Demo> {
        self.demos.iter().filter(|d| target.covered_by(&d.truth)).collect()
    }
}

/// An extracted, step-structured identification procedure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instruction {
    pub target: String,
    pub body: String,
}

/// Provider access for one target, logging every call.
pub struct Session<'a> {
    provider: &'a mut dyn Provider,
    log: &'a mut RunLog,
    target: Target,
}

impl<'a> Session<'a> {
    pub fn new(provider: &'a mut dyn Provider, log: &'a mut RunLog, target: Target) -> Self {
        Session { provider, log, target }
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    fn ask(&mut self, step: Step, conversation: &[Message]) -> Result<String, PipelineError> {
        let prompt = conversation.last().map(|m| m.content.clone()).unwrap_or_default();
        let result = self.provider.complete(conversation);
        let (reply, error) = match &result {
            Ok(r) => (Some(r.clone()), None),
            Err(e) => (None, Some(e.message.clone())),
        };
        self.log.push(LogRecord::Call { target: self.target.name.clone(), step, prompt, reply, error });
        Ok(result?)
    }

    fn bindings<'b>(&'b self, extra: &[(&'b str, &'b str)]) -> BTreeMap<&'b str, &'b str> {
        let mut b: BTreeMap<&str, &str> = extra.iter().copied().collect();
        b.insert("subcircuit", &self.target.description);
        b
    }
}

/// One instruction from one demonstration, in a fresh conversation.
pub fn generate_instruction(session: &mut Session<'_>, demo: &Demo) -> Result<Instruction, PipelineError> {
    let netlist = demo.netlist.serialize();
    let gt = render_ground_truth(&session.target, &demo.truth);
    let prompt = render(INSTRUCTION_GEN, &session.bindings(&[("netlist", &netlist), ("ground_truth", &gt)]))?;
    let reply = session.ask(Step::InstructionGen, &[Message::user(prompt)])?;
    let body = extract_instruction(&reply).map_err(PipelineError::MalformedReply)?;
    Ok(Instruction { target: session.target.name.clone(), body })
}

/// Combines two instructions, in a fresh conversation.
pub fn merge_instructions(session: &mut Session<'_>, a: &Instruction, b: &Instruction) -> Result<Instruction, PipelineError> {
    let prompt = render(
        INSTRUCTION_MERGE,
        &session.bindings(&[("instruction_1", &a.body), ("instruction_2", &b.body)]),
    )?;
    let reply = session.ask(Step::InstructionMerge, &[Message::user(prompt)])?;
    let body = extract_instruction(&reply).map_err(PipelineError::MalformedReply)?;
    Ok(Instruction { target: session.target.name.clone(), body })
}

/// Folds instructions left to right; a single instruction is returned without
/// any provider call.
pub fn fold_instructions(session: &mut Session<'_>, instructions: Vec<Instruction>) -> Result<Instruction, PipelineError> {
    let mut it = instructions.into_iter();
    let mut acc = it.next().ok_or_else(|| PipelineError::NoDemos(session.target.name.clone()))?;
    for next in it {
        acc = merge_instructions(session, &acc, &next)?;
    }
    Ok(acc)
}

fn script_from(session: &Session<'_>, reply: &str) -> Result<IdentifierScript, PipelineError> {
    let source = extract_code(reply).map_err(PipelineError::MalformedReply)?;
    Ok(IdentifierScript { target: session.target.name.clone(), source })
}

/// Starts the code-generation conversation. The conversation is left holding
/// the prompt and the reply so repairs can continue it.
pub fn generate_identifier(
    session: &mut Session<'_>,
    conversation: &mut Vec<Message>,
    instruction: &Instruction,
    demo: &Demo,
) -> Result<IdentifierScript, PipelineError> {
    let tests = render_test_cases(&session.target, demo);
    let prompt = render(
        CODE_GEN,
        &session.bindings(&[("instruction_final", &instruction.body), ("test_cases", &tests)]),
    )?;
    conversation.clear();
    conversation.push(Message::user(prompt));
    let reply = session.ask(Step::CodeGen, conversation)?;
    conversation.push(Message::assistant(reply.clone()));
    script_from(session, &reply)
}

/// Asks for a fix within the same conversation.
pub fn repair_identifier(
    session: &mut Session<'_>,
    conversation: &mut Vec<Message>,
    error: &ExecutionResult,
) -> Result<IdentifierScript, PipelineError> {
    if error.status == ExecStatus::Pass {
        return Err(PipelineError::AlreadyPassing);
    }
    let prompt = render(CODE_REPAIR, &session.bindings(&[("error_message", &error.message)]))?;
    conversation.push(Message::user(prompt));
    let reply = session.ask(Step::CodeRepair, conversation)?;
    conversation.push(Message::assistant(reply.clone()));
    script_from(session, &reply)
}

fn seed_for(seed: u64, target: &str) -> u64 {
    // FNV-1a over the target name keeps selection independent of target order.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in target.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h
}

fn run_target(
    config: &PipelineConfig,
    session: &mut Session<'_>,
    runner: &mut dyn ScriptRunner,
) -> Result<(CodebaseEntry, usize), PipelineError> {
    let target = session.target.clone();
    let demos = config.demos_for(&target);
    if demos.is_empty() {
        return Err(PipelineError::NoDemos(target.name));
    }

    let mut instructions = Vec::with_capacity(demos.len());
    for d in &demos {
        instructions.push(generate_instruction(session, d)?);
    }
    let instruction = fold_instructions(session, instructions)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(config.seed, &target.name));
    let demo = demos[rng.random_range(0..demos.len())];
    let netlist = demo.netlist.serialize();

    let mut conversation = Vec::new();
    let mut attempt = generate_identifier(session, &mut conversation, &instruction, demo);
    let mut repairs = 0;
    loop {
        let (script, result) = match attempt {
            Ok(script) => {
                let r = runner.validate(&script, &netlist)?;
                (Some(script), r)
            }
            Err(PipelineError::MalformedReply(why)) => (
                None,
                ExecutionResult { status: ExecStatus::SyntaxError, message: why, parsed_output: None },
            ),
            Err(e) => return Err(e),
        };
        session.log.push(LogRecord::Execution {
            target: target.name.clone(),
            attempt: repairs,
            status: result.status,
            message: result.message.clone(),
            parsed_output: result.parsed_output.is_some(),
        });
        if result.status == ExecStatus::Pass {
            if let Some(script) = script {
                return Ok((CodebaseEntry::Accepted { script }, repairs));
            }
        }
        if repairs >= config.retry_limit {
            let entry = match (script, result.parsed_output) {
                (Some(script), Some(_)) => CodebaseEntry::Cautious { script },
                _ => CodebaseEntry::Empty,
            };
            return Ok((entry, repairs));
        }
        repairs += 1;
        attempt = repair_identifier(session, &mut conversation, &result);
    }
}

/// Both phases for every target. A failure aborts only its own target, which
/// then gets an empty entry; the cause is in the log.
pub fn run_pipeline(
    config: &PipelineConfig,
    targets: &[Target],
    provider: &mut dyn Provider,
    runner: &mut dyn ScriptRunner,
) -> (Codebase, RunLog) {
    let mut codebase = Codebase::default();
    let mut log = RunLog::default();
    for target in targets {
        let mut session = Session::new(&mut *provider, &mut log, target.clone());
        let result = run_target(config, &mut session, runner);
        let (entry, repairs, error) = match result {
            Ok((entry, repairs)) => (entry, repairs, None),
            Err(e) => {
                log::warn!("target {}: {e}", target.name);
                let repairs = log.calls_at(&target.name, Step::CodeRepair);
                (CodebaseEntry::Empty, repairs, Some(e.to_string()))
            }
        };
        log.push(LogRecord::Outcome {
            target: target.name.clone(),
            outcome: entry.kind(),
            repairs,
            retry_limit: config.retry_limit,
            error,
        });
        codebase.entries.insert(target.name.clone(), entry);
    }
    (codebase, log)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentifyFailure {
    pub target: String,
    pub message: String,
}

/// Runs every usable script of `codebase` on `netlist` and unions their
/// outputs. No provider is involved.
pub fn identify_with_codebase(
    codebase: &Codebase,
    netlist: &Netlist,
    runner: &mut dyn ScriptRunner,
) -> (AnnotationSet, Vec<IdentifyFailure>) {
    let text = netlist.serialize();
    let mut set = AnnotationSet::new();
    let mut failures = Vec::new();
    for (target, entry) in &codebase.entries {
        let Some(script) = entry.script() else { continue };
        match runner.identify(script, &text) {
            Ok(ExecutionResult { parsed_output: Some(out), .. }) => set.union(&out),
            Ok(r) => failures.push(IdentifyFailure {
                target: target.clone(),
                message: format!("{}: {}", r.status, r.message),
            }),
            Err(e) => failures.push(IdentifyFailure { target: target.clone(), message: e.to_string() }),
        }
    }
    (set, failures)
}
