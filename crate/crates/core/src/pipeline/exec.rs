use alloc::string::String;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::annotation::AnnotationSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecStatus {
    Pass,
    AssertionFailure,
    SyntaxError,
    RuntimeError,
    Timeout,
}

impl ExecStatus {
    pub const ALL: [ExecStatus; 5] = [
        ExecStatus::Pass,
        ExecStatus::AssertionFailure,
        ExecStatus::SyntaxError,
        ExecStatus::RuntimeError,
        ExecStatus::Timeout,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExecStatus::Pass => "pass",
            ExecStatus::AssertionFailure => "assertion_failure",
            ExecStatus::SyntaxError => "syntax_error",
            ExecStatus::RuntimeError => "runtime_error",
            ExecStatus::Timeout => "timeout",
        }
    }
}

impl fmt::Display for ExecStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a child process ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProcessExit {
    Code(i32),
    /// Killed by a signal or otherwise without an exit code.
    Abnormal,
    TimedOut,
}

/// Maps a process exit and its diagnostics onto the status taxonomy. The
/// exception named on the last traceback line decides between assertion,
/// syntax and other runtime failures.
pub fn classify_exit(exit: ProcessExit, stderr: &str) -> ExecStatus {
    match exit {
        ProcessExit::TimedOut => return ExecStatus::Timeout,
        ProcessExit::Code(0) => return ExecStatus::Pass,
        _ => {}
    }
    let last = stderr
        .lines()
        .rev()
        .map(str::trim)
        .find(|l| {
            let head = l.split(':').next().unwrap_or("");
            !head.is_empty() && !head.contains(' ') && (head.ends_with("Error") || head.ends_with("Exception"))
        })
        .unwrap_or("");
    let kind = last.split(':').next().unwrap_or("");
    let kind = kind.rsplit('.').next().unwrap_or(kind);
    match kind {
        "AssertionError" => ExecStatus::AssertionFailure,
        "SyntaxError" | "IndentationError" | "TabError" => ExecStatus::SyntaxError,
        _ => ExecStatus::RuntimeError,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionResult {
    pub status: ExecStatus,
    /// Captured diagnostics (stdout and stderr).
    pub message: String,
    /// The entry point's result when it printed a well-formed label list.
    pub parsed_output: Option<AnnotationSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentifierScript {
    pub target: String,
    pub source: String,
}

pub const ENTRY_SIGNATURE: &str = "def findSubCircuit(";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunnerError {
    InterpreterUnavailable(String),
    SandboxSetupFailure(String),
}

impl fmt::Display for RunnerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunnerError::InterpreterUnavailable(m) => write!(f, "interpreter unavailable: {m}"),
            RunnerError::SandboxSetupFailure(m) => write!(f, "sandbox setup failed: {m}"),
        }
    }
}

impl core::error::Error for RunnerError {}

/// Executes identifier scripts. Script failures are data in the returned
/// result; only environment problems are errors.
pub trait ScriptRunner {
    /// Runs the script as a program (its embedded assertions) with `netlist`
    /// on standard input, then captures the entry point's output on it.
    fn validate(&mut self, script: &IdentifierScript, netlist: &str) -> Result<ExecutionResult, RunnerError>;

    /// Runs only the entry point on `netlist`.
    fn identify(&mut self, script: &IdentifierScript, netlist: &str) -> Result<ExecutionResult, RunnerError>;
}

impl<R: ScriptRunner + ?Sized> ScriptRunner for &mut R {
    fn validate(&mut self, script: &IdentifierScript, netlist: &str) -> Result<ExecutionResult, RunnerError> {
        (**self).validate(script, netlist)
    }
    fn identify(&mut self, script: &IdentifierScript, netlist: &str) -> Result<ExecutionResult, RunnerError> {
        (**self).identify(script, netlist)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification() {
        assert_eq!(classify_exit(ProcessExit::Code(0), ""), ExecStatus::Pass);
        assert_eq!(classify_exit(ProcessExit::TimedOut, "AssertionError"), ExecStatus::Timeout);
        let tb = "Traceback (most recent call last):\n  File \"s.py\", line 3\nAssertionError: Current mirror detection failed\n";
        assert_eq!(classify_exit(ProcessExit::Code(1), tb), ExecStatus::AssertionFailure);
        let tb = "  File \"s.py\", line 1\n    def f(\n         ^\nSyntaxError: '(' was never closed\n";
        assert_eq!(classify_exit(ProcessExit::Code(1), tb), ExecStatus::SyntaxError);
        assert_eq!(classify_exit(ProcessExit::Code(1), "IndentationError: unexpected indent"), ExecStatus::SyntaxError);
        assert_eq!(classify_exit(ProcessExit::Code(1), "KeyError: 'x'"), ExecStatus::RuntimeError);
        assert_eq!(classify_exit(ProcessExit::Abnormal, ""), ExecStatus::RuntimeError);
    }
}
