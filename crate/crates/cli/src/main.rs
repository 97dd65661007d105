use std::io::Read;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};

use vtkit::dispatch::{text_hash, verify_method, DispatchConfig, Export, MethodVerdict, SolverCmd, Status, VerifyReport};
use vtkit::gen::{GenConfig, Rng};
use vtkit::harness::{test_method, HarnessOptions, HarnessStatus};
use vtkit::sem::json::{from_json, to_json};
use vtkit::sem::run_method;
use vtkit::spectest::{load_cases, run_spec_suite, SpecError, SpecUnderTest, SuiteOptions, SuiteStatus};
use vtkit::syntax::{parse, Program};
use vtkit::vcgen::{generate_vcs, render_vc, CorrectnessMode};

#[derive(Parser)]
#[command(name = "vtkit", version, about = "Check, run, test and verify annotated programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Random seed.
    #[arg(long, global = true, env = "VTKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Directory for reports and obligation files.
    #[arg(long, global = true, default_value = "vt-out")]
    out: PathBuf,
    /// Read the program from standard input; FILE then only names it in messages.
    #[arg(long, global = true)]
    stdin: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Partial,
    Total,
}

impl From<Mode> for CorrectnessMode {
    fn from(m: Mode) -> CorrectnessMode {
        match m {
            Mode::Partial => CorrectnessMode::Partial,
            Mode::Total => CorrectnessMode::Total,
        }
    }
}

#[derive(Args)]
struct GenFlags {
    /// TOML file with a `[gen]` table; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    size_bound: Option<usize>,
    #[arg(long)]
    int_magnitude: Option<u64>,
    #[arg(long)]
    rejection_budget: Option<u32>,
    #[arg(long)]
    fuel: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and type-check a file.
    Check { file: PathBuf },
    /// Run a method on JSON arguments, one per parameter.
    Run { file: PathBuf, method: String, args: Vec<String> },
    /// Run the precondition, soundness and uniqueness checks on test cases.
    TestSpec {
        file: PathBuf,
        /// Resolves `<spec>_pre` and `<spec>_post`.
        spec: String,
        cases: PathBuf,
        #[arg(long)]
        pre: Option<String>,
        #[arg(long)]
        post: Option<String>,
        #[arg(long)]
        skip_uniqueness: bool,
        #[command(flatten)]
        gen: GenFlags,
    },
    /// Random testing of a method with invariant and postcondition checks.
    Test {
        file: PathBuf,
        method: String,
        #[arg(long, value_enum, default_value_t = Mode::Partial)]
        mode: Mode,
        #[arg(long)]
        keep_going: bool,
        #[command(flatten)]
        gen: GenFlags,
    },
    /// Write the verification conditions of a method.
    Vcgen {
        file: PathBuf,
        method: String,
        #[arg(long, value_enum, default_value_t = Mode::Partial)]
        mode: Mode,
    },
    /// Discharge the verification conditions of one method, or of every method.
    Verify {
        file: PathBuf,
        method: Option<String>,
        #[arg(long, value_enum, default_value_t = Mode::Partial)]
        mode: Mode,
        /// Solver command line reading SMT-LIB on standard input.
        #[arg(long, env = "VTKIT_SMT_CMD")]
        smt_cmd: Option<String>,
        /// Seconds per solver call.
        #[arg(long, default_value_t = 10.0)]
        timeout: f64,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        gen: GenFlags,
    },
    /// Summarize verify.json files (or directories containing them).
    Report { paths: Vec<PathBuf> },
}

/// An error with its exit code.
struct Fail(u8, String);

type Outcome = Result<u8, Fail>;

fn usage(msg: impl Into<String>) -> Fail {
    Fail(2, msg.into())
}

fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

static STDIN: OnceLock<bool> = OnceLock::new();

/// Program text from FILE, or from standard input under `--stdin` or when FILE is `-`.
fn read_source(path: &Path) -> Result<String, Fail> {
    if *STDIN.get().unwrap_or(&false) || path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| usage(format!("stdin: {e}")))?;
        return Ok(s);
    }
    read(path)
}

fn load(path: &Path) -> Result<Program, Fail> {
    let src = read_source(path)?;
    parse(&src).map_err(|e| Fail(1, format!("{}:{e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Fail> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn pretty(j: &Json) -> String {
    let mut s = serde_json::to_string_pretty(j).expect("serializable");
    s.push('\n');
    s
}

impl GenFlags {
    fn resolve(&self) -> Result<GenConfig, Fail> {
        let mut cfg = match &self.config {
            Some(p) => GenConfig::from_toml(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?,
            None => GenConfig::default(),
        };
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.size_bound {
            cfg.size_bound = v;
        }
        if let Some(v) = self.int_magnitude {
            cfg.int_magnitude = v;
        }
        if let Some(v) = self.rejection_budget {
            cfg.rejection_budget = v;
        }
        if let Some(v) = self.fuel {
            cfg.fuel = v;
        }
        cfg.validate().map_err(|e| usage(e.to_string()))?;
        Ok(cfg)
    }
}

fn check(file: &Path) -> Outcome {
    let prog = load(file)?;
    let plural = |n: usize, word: &str| format!("{n} {word}{}", if n == 1 { "" } else { "s" });
    println!(
        "{}, {}, {}",
        plural(prog.methods.len(), "method"),
        plural(prog.defs.len(), "def"),
        plural(prog.invariant_count(), "invariant")
    );
    Ok(0)
}

fn run(file: &Path, method: &str, args: &[String]) -> Outcome {
    let prog = load(file)?;
    let m = prog.method(method).ok_or_else(|| usage(format!("no method named `{method}`")))?;
    if args.len() != m.params.len() {
        return Err(usage(format!("`{method}` expects {} argument(s), got {}", m.params.len(), args.len())));
    }
    let mut values = Vec::new();
    for (a, p) in args.iter().zip(&m.params) {
        let j: Json = serde_json::from_str(a).map_err(|e| usage(format!("argument `{}`: {e}", p.name)))?;
        values.push(from_json(&j, &p.ty).map_err(|e| usage(format!("argument `{}`: {e}", p.name)))?);
    }
    let fuel = GenConfig::default().fuel;
    let out = run_method(&prog, method, values, fuel).map_err(|e| Fail(1, e.to_string()))?;
    let j = match out.as_slice() {
        [single] => to_json(single),
        many => Json::Array(many.iter().map(to_json).collect()),
    };
    println!("{j}");
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn test_spec(cli: &Cli, file: &Path, spec: &str, cases: &Path, pre: &Option<String>, post: &Option<String>, skip: bool, gen: &GenFlags) -> Outcome {
    let cfg = gen.resolve()?;
    let prog = load(file)?;
    let resolved = match (pre, post) {
        (None, None) => SpecUnderTest::resolve(&prog, spec),
        _ => SpecUnderTest::from_defs(
            &prog,
            pre.as_deref().unwrap_or(&format!("{spec}_pre")),
            post.as_deref().unwrap_or(&format!("{spec}_post")),
        ),
    };
    let s = resolved.map_err(|e| usage(e.to_string()))?;
    let cases = load_cases(&read(cases)?, &s).map_err(|e| usage(e.to_string()))?;
    let report = match run_spec_suite(&s, &cases, &Rng::new(cli.seed), &cfg, SuiteOptions { skip_uniqueness: skip }) {
        Ok(r) => r,
        Err(SpecError::NoCases) => return Err(usage("no cases")),
        Err(e) => return Err(usage(e.to_string())),
    };
    let j = report.to_json(&s, &cases);
    write(&cli.out.join("test-spec.json"), &pretty(&j))?;
    match cli.format {
        Format::Json => print!("{}", pretty(&j)),
        Format::Human => print!("{}", report.summary(&s)),
    }
    Ok(match report.status() {
        SuiteStatus::Pass => 0,
        SuiteStatus::Fail => 1,
        SuiteStatus::Inconclusive => 2,
    })
}

fn test(cli: &Cli, file: &Path, method: &str, mode: Mode, keep_going: bool, gen: &GenFlags) -> Outcome {
    let cfg = gen.resolve()?;
    let prog = load(file)?;
    let opts = HarnessOptions { keep_going };
    let report = test_method(&prog, method, mode.into(), &Rng::new(cli.seed), &cfg, opts).map_err(|e| usage(e.to_string()))?;
    let failures: Vec<Json> = report
        .failures
        .iter()
        .map(|f| {
            json!({
                "check": f.kind.label(),
                "message": f.kind.to_string(),
                "input": f.input.iter().map(to_json).collect::<Vec<_>>(),
                "iterations": f.trace,
                "trial": f.trial,
            })
        })
        .collect();
    let status = match report.status() {
        HarnessStatus::Pass => "pass",
        HarnessStatus::Fail => "fail",
        HarnessStatus::Inconclusive => "inconclusive",
    };
    let j = json!({
        "method": report.method,
        "mode": report.mode.to_string(),
        "status": status,
        "trials": report.trials,
        "discarded": report.discarded,
        "failures": failures,
        "seed": report.seed,
    });
    write(&cli.out.join("test.json"), &pretty(&j))?;
    match cli.format {
        Format::Json => print!("{}", pretty(&j)),
        Format::Human => {
            for f in &report.failures {
                let input: Vec<String> = f.input.iter().map(|v| to_json(v).to_string()).collect();
                println!("FAIL: {}", f.kind);
                println!("  input: [{}]", input.join(", "));
                println!("  iterations: {}", f.trace);
            }
            println!("{status}: {} trial(s), {} discarded", report.trials, report.discarded);
        }
    }
    Ok(match report.status() {
        HarnessStatus::Pass => 0,
        HarnessStatus::Fail => 1,
        HarnessStatus::Inconclusive => 2,
    })
}

fn vcgen(cli: &Cli, file: &Path, method: &str, mode: Mode) -> Outcome {
    let prog = load(file)?;
    let vcs = generate_vcs(&prog, method, mode.into()).map_err(|e| Fail(1, e.to_string()))?;
    let mut index = Vec::new();
    for vc in &vcs {
        let text = render_vc(vc);
        write(&cli.out.join(format!("{}.vc.txt", vc.id)), &text)?;
        let hash = text_hash(&text);
        index.push(json!({ "id": vc.id, "kind": vc.kind.to_string(), "method": vc.method.to_string(), "hash": hash }));
        if cli.format == Format::Human {
            println!("{text}");
        }
    }
    let j = Json::Array(index);
    write(&cli.out.join("vcs.json"), &pretty(&j))?;
    if cli.format == Format::Json {
        print!("{}", pretty(&j));
    }
    Ok(0)
}

fn human_verify(r: &VerifyReport) {
    println!("{} ({}): {}", r.method, r.mode, r.verdict.name());
    for o in &r.outcomes {
        let status = match &o.status {
            Status::Discharged(t) => format!("discharged by {}", t.name()),
            Status::Refuted(a) => {
                let cex: Vec<String> = a.iter().map(|(n, _, v)| format!("{n} = {v}")).collect();
                format!("refuted: {}", cex.join(", "))
            }
            Status::Residual => format!("residual ({})", o.reason.as_deref().unwrap_or("")),
        };
        println!("  {}: {status}", o.id);
    }
}

#[allow(clippy::too_many_arguments)]
fn verify(cli: &Cli, file: &Path, method: &Option<String>, mode: Mode, smt: &Option<String>, timeout: f64, jobs: usize, gen: &GenFlags) -> Outcome {
    let cfg = gen.resolve()?;
    let solver = match smt.as_deref().filter(|s| !s.trim().is_empty()) {
        Some(s) => Some(SolverCmd::parse(s).ok_or_else(|| usage(format!("bad solver command `{s}`")))?),
        None => None,
    };
    if !(timeout.is_finite() && timeout > 0.0) {
        return Err(usage("`--timeout` must be positive"));
    }
    let dcfg = DispatchConfig {
        gen: cfg,
        seed: cli.seed,
        solver,
        timeout: Duration::from_secs_f64(timeout),
        jobs,
        ..DispatchConfig::default()
    };
    let src = read_source(file)?;
    let source = file.file_name().map(|f| f.to_string_lossy().into_owned());
    let mode: CorrectnessMode = mode.into();
    let reports: Vec<VerifyReport> = match parse(&src) {
        Err(e) => {
            let name = method.clone().unwrap_or_default();
            vec![VerifyReport::failure(&name, mode, &dcfg, format!("{}:{e}", file.display()))]
        }
        Ok(prog) => {
            let names: Vec<String> = match method {
                Some(m) => vec![m.clone()],
                None => prog.methods.iter().map(|m| m.name.to_string()).collect(),
            };
            let mut out = Vec::new();
            for name in names {
                let dir = cli.out.join(&name);
                let export = Export { dir: Some(&dir), source: source.as_deref() };
                out.push(verify_method(&prog, &name, mode, &dcfg, export).map_err(|e| usage(e.to_string()))?);
            }
            out
        }
    };
    for r in &reports {
        let j = r.to_json();
        let dir = if r.method.is_empty() { cli.out.clone() } else { cli.out.join(&r.method) };
        write(&dir.join("verify.json"), &pretty(&j))?;
        match cli.format {
            Format::Json => print!("{}", pretty(&j)),
            Format::Human => human_verify(r),
        }
    }
    // the most severe verdict decides
    let code = |v: &MethodVerdict| match v {
        MethodVerdict::Refuted(_) => (3, 1),
        MethodVerdict::SynthesisFailure(_) => (2, 2),
        MethodVerdict::PartiallyProven(_) => (1, 3),
        MethodVerdict::FullyProven => (0, 0),
    };
    Ok(reports.iter().map(|r| code(&r.verdict)).max().map_or(0, |(_, c)| c))
}

fn collect_reports(path: &Path, out: &mut Vec<PathBuf>) -> Result<(), Fail> {
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(path)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        for e in entries {
            if e.is_dir() || e.file_name().is_some_and(|n| n == "verify.json") {
                collect_reports(&e, out)?;
            }
        }
    } else {
        out.push(path.to_path_buf());
    }
    Ok(())
}

fn report(cli: &Cli, paths: &[PathBuf]) -> Outcome {
    let mut files = Vec::new();
    for p in paths {
        collect_reports(p, &mut files)?;
    }
    if files.is_empty() {
        return Err(usage("no verify.json files"));
    }
    let mut rows = Vec::new();
    let mut counts = [0usize; 4];
    for f in &files {
        let j: Json = serde_json::from_str(&read(f)?).map_err(|e| usage(format!("{}: {e}", f.display())))?;
        let verdict = j["verdict"].as_str().unwrap_or("").to_string();
        let slot = ["fully_proven", "partially_proven", "refuted", "synthesis_failure"].iter().position(|v| *v == verdict);
        let Some(slot) = slot else {
            return Err(usage(format!("{}: not a verify report", f.display())));
        };
        counts[slot] += 1;
        let statuses: Vec<&str> = j["vcs"].as_array().map_or(vec![], |a| a.iter().filter_map(|v| v["status"].as_str()).collect());
        let vcs = statuses.len();
        let residual = statuses.iter().filter(|s| **s == "residual").count();
        rows.push((j["method"].as_str().unwrap_or("").to_string(), verdict, vcs, residual));
    }
    match cli.format {
        Format::Json => {
            let methods: Vec<Json> = rows
                .iter()
                .map(|(m, v, n, r)| json!({ "method": m, "verdict": v, "vcs": n, "residual": r }))
                .collect();
            let j = json!({
                "fully_proven": counts[0],
                "partially_proven": counts[1],
                "refuted": counts[2],
                "synthesis_failure": counts[3],
                "methods": methods,
            });
            print!("{}", pretty(&j));
        }
        Format::Human => {
            let w = rows.iter().map(|r| r.0.len()).max().unwrap_or(6).max(6);
            println!("{:<w$}  {:<17}  {:>4}  {:>8}", "method", "verdict", "vcs", "residual");
            for (m, v, n, r) in &rows {
                println!("{m:<w$}  {v:<17}  {n:>4}  {r:>8}");
            }
            println!();
            println!("fully proven: {}", counts[0]);
            println!("partially proven: {}", counts[1]);
            println!("refuted: {}", counts[2]);
            println!("synthesis failure: {}", counts[3]);
        }
    }
    Ok(0)
}

/// Piping into `head` and friends should end the process quietly.
fn reset_sigpipe() {
    #[cfg(unix)]
    // SAFETY: runs before any other thread exists.
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
}

fn main() -> ExitCode {
    reset_sigpipe();
    let cli = Cli::parse();
    STDIN.set(cli.stdin).expect("set once");
    let result = match &cli.command {
        Command::Check { file } => check(file),
        Command::Run { file, method, args } => run(file, method, args),
        Command::TestSpec { file, spec, cases, pre, post, skip_uniqueness, gen } => {
            test_spec(&cli, file, spec, cases, pre, post, *skip_uniqueness, gen)
        }
        Command::Test { file, method, mode, keep_going, gen } => test(&cli, file, method, *mode, *keep_going, gen),
        Command::Vcgen { file, method, mode } => vcgen(&cli, file, method, *mode),
        Command::Verify { file, method, mode, smt_cmd, timeout, jobs, gen } => {
            verify(&cli, file, method, *mode, smt_cmd, *timeout, *jobs, gen)
        }
        Command::Report { paths } => report(&cli, paths),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Fail(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
