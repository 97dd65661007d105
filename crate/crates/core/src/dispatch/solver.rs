use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::Duration;

use wait_timeout::ChildExt;

/// An external solver: an executable reading SMT-LIB on standard input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverCmd {
    pub program: String,
    pub args: Vec<String>,
}

impl SolverCmd {
    /// Splits a command line such as `z3 -in` with shell quoting rules.
    pub fn parse(line: &str) -> Option<SolverCmd> {
        let mut words = shlex::split(line)?.into_iter();
        let program = words.next()?;
        Some(SolverCmd { program, args: words.collect() })
    }
}

impl std::fmt::Display for SolverCmd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let words: Vec<&str> = std::iter::once(self.program.as_str()).chain(self.args.iter().map(String::as_str)).collect();
        f.write_str(&shlex::try_join(words).unwrap_or_else(|_| self.program.clone()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverAnswer {
    Sat,
    Unsat,
    Unknown,
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverRun {
    pub answer: SolverAnswer,
    /// Script followed by the solver's output.
    pub transcript: String,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("solver unavailable: {0}")]
    Unavailable(String),
    #[error("solver error")]
    Failed { transcript: String },
}

fn transcript(script: &str, output: &str) -> String {
    format!("{script};; response\n{output}")
}

/// Feeds `script` to the solver and reads its first answer line.
pub fn run_solver(cmd: &SolverCmd, script: &str, timeout: Duration) -> Result<SolverRun, SolverError> {
    let mut child = Command::new(&cmd.program)
        .args(&cmd.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| SolverError::Unavailable(format!("{}: {e}", cmd.program)))?;
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    if let Some(mut stdin) = child.stdin.take() {
        let _ = stdin.write_all(script.as_bytes());
    }
    let status = child.wait_timeout(timeout).map_err(|e| SolverError::Unavailable(e.to_string()))?;
    if status.is_none() {
        let _ = child.kill();
        let _ = child.wait();
        // a grandchild may still hold the pipe, so the reader is left behind
        return Ok(SolverRun { answer: SolverAnswer::Timeout, transcript: transcript(script, "timeout\n") });
    }
    let out = reader.join().unwrap_or_default();
    let t = transcript(script, &out);
    if out.lines().any(|l| l.trim_start().starts_with("(error")) {
        return Err(SolverError::Failed { transcript: t });
    }
    let answer = match out.lines().map(str::trim).find(|l| !l.is_empty()) {
        Some("unsat") => SolverAnswer::Unsat,
        Some("sat") => SolverAnswer::Sat,
        Some("unknown") => SolverAnswer::Unknown,
        _ => return Err(SolverError::Failed { transcript: t }),
    };
    Ok(SolverRun { answer, transcript: t })
}
