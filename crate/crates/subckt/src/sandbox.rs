//! Runs identifier scripts in a child process: fresh temporary directory,
//! cleared environment, wall-clock timeout.
//!
//! Network isolation is not enforced here. Prefix the interpreter template
//! with a wrapper such as `unshare -rn` where the host allows it.

use std::io::{Read, Write};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::Duration;

use subckt_core::benchmark::{load_labels, TaxonomyMap};
use subckt_core::pipeline::{
    classify_exit, ExecStatus, ExecutionResult, IdentifierScript, ProcessExit, RunnerError, ScriptRunner,
};
use wait_timeout::ChildExt;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);
pub const DEFAULT_INTERPRETER: &str = "python3 {script}";

const SCRIPT_FILE: &str = "script.py";
const DRIVER_FILE: &str = "driver.py";
const RESULT_MARKER: &str = "<<subckt-result>>";
const MESSAGE_LIMIT: usize = 8000;

const DRIVER: &str = r#"import importlib.util, json, sys
spec = importlib.util.spec_from_file_location("identifier", "script.py")
module = importlib.util.module_from_spec(spec)
spec.loader.exec_module(module)
result = module.findSubCircuit(sys.stdin.read())
def plain(o):
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    return str(o)
print("<<subckt-result>>")
print(json.dumps(result, default=plain))
"#;

#[derive(Debug, Clone)]
pub struct Captured {
    pub exit: ProcessExit,
    pub stdout: String,
    pub stderr: String,
}

impl Captured {
    fn message(&self) -> String {
        let mut m = String::new();
        for part in [self.stdout.trim(), self.stderr.trim()] {
            if !part.is_empty() {
                if !m.is_empty() {
                    m.push('\n');
                }
                m.push_str(part);
            }
        }
        if self.exit == ProcessExit::TimedOut {
            if !m.is_empty() {
                m.push('\n');
            }
            m.push_str("execution timed out");
        }
        truncate(m)
    }
}

/// Keeps the tail, where tracebacks end.
fn truncate(s: String) -> String {
    if s.len() <= MESSAGE_LIMIT {
        return s;
    }
    let mut cut = s.len() - MESSAGE_LIMIT;
    while !s.is_char_boundary(cut) {
        cut += 1;
    }
    format!("[... truncated]\n{}", &s[cut..])
}

#[derive(Debug, Clone)]
pub struct SubprocessRunner {
    argv: Vec<String>,
    timeout: Duration,
    taxonomy: TaxonomyMap,
}

impl SubprocessRunner {
    /// `interpreter` is a whitespace-separated command in which `{script}`
    /// stands for the script path.
    pub fn new(interpreter: &str, timeout: Duration) -> Result<Self, RunnerError> {
        let argv: Vec<String> = interpreter.split_whitespace().map(str::to_string).collect();
        if argv.is_empty() || !argv.iter().any(|a| a.contains("{script}")) {
            return Err(RunnerError::InterpreterUnavailable(format!(
                "interpreter template '{interpreter}' lacks a {{script}} placeholder"
            )));
        }
        Ok(SubprocessRunner { argv, timeout, taxonomy: TaxonomyMap::default() })
    }

    pub fn python(timeout: Duration) -> Self {
        Self::new(DEFAULT_INTERPRETER, timeout).expect("default template is valid")
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// Runs `file` (relative to `dir`) with `stdin` on standard input.
    pub fn run(&self, dir: &Path, file: &str, stdin: &str) -> Result<Captured, RunnerError> {
        let args: Vec<String> = self.argv[1..].iter().map(|a| a.replace("{script}", file)).collect();
        let mut cmd = Command::new(self.argv[0].replace("{script}", file));
        cmd.args(&args)
            .current_dir(dir)
            .env_clear()
            .env("PYTHONDONTWRITEBYTECODE", "1")
            .env("PYTHONIOENCODING", "utf-8")
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());
        if let Some(path) = std::env::var_os("PATH") {
            cmd.env("PATH", path);
        }
        let mut child = cmd.spawn().map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound | std::io::ErrorKind::PermissionDenied => {
                RunnerError::InterpreterUnavailable(format!("{}: {e}", self.argv[0]))
            }
            _ => RunnerError::SandboxSetupFailure(e.to_string()),
        })?;
        self.collect(&mut child, stdin)
    }

    fn collect(&self, child: &mut Child, stdin: &str) -> Result<Captured, RunnerError> {
        let setup = |e: std::io::Error| RunnerError::SandboxSetupFailure(e.to_string());
        let mut input = child.stdin.take().expect("piped stdin");
        let data = stdin.to_string();
        // A script that never reads stdin must not block the writer.
        let writer = thread::spawn(move || {
            let _ = input.write_all(data.as_bytes());
        });
        let mut out = child.stdout.take().expect("piped stdout");
        let mut err = child.stderr.take().expect("piped stderr");
        let out_reader = thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = out.read_to_end(&mut buf);
            buf
        });
        let err_reader = thread::spawn(move || {
            let mut buf = Vec::new();
            let _ = err.read_to_end(&mut buf);
            buf
        });

        let exit = match child.wait_timeout(self.timeout).map_err(setup)? {
            Some(status) => match status.code() {
                Some(code) => ProcessExit::Code(code),
                None => ProcessExit::Abnormal,
            },
            None => {
                let _ = child.kill();
                child.wait().map_err(setup)?;
                ProcessExit::TimedOut
            }
        };
        let _ = writer.join();
        let stdout = String::from_utf8_lossy(&out_reader.join().unwrap_or_default()).into_owned();
        let stderr = String::from_utf8_lossy(&err_reader.join().unwrap_or_default()).into_owned();
        Ok(Captured { exit, stdout, stderr })
    }

    fn workspace(&self, script: &IdentifierScript) -> Result<tempfile::TempDir, RunnerError> {
        let dir = tempfile::Builder::new()
            .prefix("subckt-run-")
            .tempdir()
            .map_err(|e| RunnerError::SandboxSetupFailure(e.to_string()))?;
        for (name, body) in [(SCRIPT_FILE, script.source.as_str()), (DRIVER_FILE, DRIVER)] {
            std::fs::write(dir.path().join(name), body)
                .map_err(|e| RunnerError::SandboxSetupFailure(e.to_string()))?;
        }
        Ok(dir)
    }

    /// Runs the entry point through the driver; returns the parsed result or
    /// a diagnostic.
    fn drive(&self, dir: &Path, netlist: &str) -> Result<(Captured, Result<subckt_core::AnnotationSet, String>), RunnerError> {
        let run = self.run(dir, DRIVER_FILE, netlist)?;
        let parsed = match run.exit {
            ProcessExit::Code(0) => match run.stdout.rsplit_once(RESULT_MARKER) {
                Some((_, json)) => load_labels(json.trim(), &self.taxonomy)
                    .map_err(|e| format!("findSubCircuit output is not a label list: {e}")),
                None => Err("findSubCircuit produced no result".to_string()),
            },
            _ => Err(run.message()),
        };
        Ok((run, parsed))
    }
}

impl ScriptRunner for SubprocessRunner {
    fn validate(&mut self, script: &IdentifierScript, netlist: &str) -> Result<ExecutionResult, RunnerError> {
        let dir = self.workspace(script)?;
        let program = self.run(dir.path(), SCRIPT_FILE, netlist)?;
        let status = classify_exit(program.exit, &program.stderr);
        let mut message = program.message();
        let parsed_output = match status {
            ExecStatus::SyntaxError | ExecStatus::Timeout => None,
            _ => {
                let (_, parsed) = self.drive(dir.path(), netlist)?;
                match parsed {
                    Ok(set) => Some(set),
                    Err(why) => {
                        log::debug!("{}: {why}", script.target);
                        if status == ExecStatus::Pass {
                            message = why;
                        }
                        None
                    }
                }
            }
        };
        Ok(ExecutionResult { status, message, parsed_output })
    }

    fn identify(&mut self, script: &IdentifierScript, netlist: &str) -> Result<ExecutionResult, RunnerError> {
        let dir = self.workspace(script)?;
        let (run, parsed) = self.drive(dir.path(), netlist)?;
        let status = classify_exit(run.exit, &run.stderr);
        Ok(match parsed {
            Ok(set) => ExecutionResult { status, message: run.message(), parsed_output: Some(set) },
            Err(why) => ExecutionResult {
                status: if status == ExecStatus::Pass { ExecStatus::RuntimeError } else { status },
                message: why,
                parsed_output: None,
            },
        })
    }
}
