//! Command-line front end.
//!
//! Output is plain `key=value` or one-record-per-line text. Exit codes: 0
//! success, 1 oracle disagreement, 2 parse or usage error, 3 unsupported,
//! 4 strategy undefined.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::extent::{extent_generic, extent_recursive, ExtentError, ExtentMap};
use crate::model::{parse_model, Model, ModelError, StateId};
use crate::oracle::{oracle_batch, Profile};
use crate::resource_game::GameError;
use crate::runs::{check_annotation, is_accepting, parse_run, run_value, unfold, RunError};
use crate::semiring::{format_rational, Rational, SemiringKind};
use crate::strategy::{
    parse_memory, parse_strategy, synth_buchi, Adversary, CarryOver, FirstOption, RandomAdversary,
    ReducedStrategy, StateStrategy, StrategyError, WorstAdversary,
};

pub const EXIT_DISAGREE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_UNSUPPORTED: i32 = 3;
pub const EXIT_UNDEFINED: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "resaware",
    version,
    about = "Resource-aware parity automata and games"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse and validate a model, then print a summary.
    Check { model: PathBuf },
    /// Print the extent of every state.
    Extent {
        model: PathBuf,
        #[arg(long, value_enum, default_value_t = Engine::Generic)]
        engine: Engine,
    },
    /// Synthesize a two-move strategy for a Büchi model.
    Synth {
        model: PathBuf,
        /// Write the strategy file here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a regular run file.
    Value { model: PathBuf, run: PathBuf },
    /// Play a strategy file against an adversary.
    Simulate {
        model: PathBuf,
        strategy: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        mem: String,
        /// Maximum number of configurations to unfold.
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        /// `worst`, `random:<seed>` or `interactive`.
        #[arg(long, default_value = "worst")]
        adversary: String,
    },
    /// Compare the solvers against the brute-force oracle on seeded models.
    OracleCheck {
        /// Inclusive seed range `a..b`.
        #[arg(long)]
        seeds: String,
        #[arg(long, default_value = "buchi-automaton")]
        profile: Profile,
    },
    /// Play the `∀` role on the terminal against a synthesized strategy.
    Play {
        model: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        mem: String,
        /// Use this strategy file instead of synthesizing one.
        #[arg(long)]
        strategy: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    /// Nested Kleene iteration over any semiring.
    Generic,
    /// The shared-table recursion over bounded tropical semirings.
    #[value(alias = "fig1")]
    Recursive,
}

/// A failed command: exit code plus diagnostic.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Failure {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Failure {
        Failure::new(EXIT_PARSE, e.to_string())
    }
}

impl From<ExtentError> for Failure {
    fn from(e: ExtentError) -> Failure {
        Failure::new(EXIT_UNSUPPORTED, e.to_string())
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Failure {
        Failure::new(EXIT_UNSUPPORTED, e.to_string())
    }
}

impl From<StrategyError> for Failure {
    fn from(e: StrategyError) -> Failure {
        let code = match e {
            StrategyError::Unsupported(_) | StrategyError::Precision(_) => EXIT_UNSUPPORTED,
            StrategyError::Undefined { .. } => EXIT_UNDEFINED,
            _ => EXIT_PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Failure {
        match e {
            RunError::Strategy(s) => s.into(),
            RunError::TooLarge(_) => Failure::new(EXIT_UNSUPPORTED, e.to_string()),
            _ => Failure::new(EXIT_PARSE, e.to_string()),
        }
    }
}

type Outcome = Result<i32, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    parse_model(&read(path)?)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn state_arg(m: &Model, name: &str) -> Result<StateId, Failure> {
    m.state_id(name)
        .ok_or_else(|| Failure::new(EXIT_PARSE, format!("unknown state `{name}`")))
}

/// Parses the whole command line and runs it, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_PARSE } else { 0 };
        }
    };
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out, &mut input) {
        Ok(code) => code,
        Err(f) => {
            let _ = out.flush();
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

/// Runs one command; `input` feeds the interactive adversary.
pub fn execute(cmd: Command, out: &mut dyn Write, input: &mut dyn BufRead) -> Outcome {
    let text = match cmd {
        Command::Check { model } => check(&model)?,
        Command::Extent { model, engine } => extent(&model, engine)?,
        Command::Synth { model, out } => synth(&model, out.as_deref())?,
        Command::Value { model, run } => value(&model, &run)?,
        Command::Simulate {
            model,
            strategy,
            from,
            mem,
            steps,
            adversary,
        } => {
            let m = load_model(&model)?;
            let reduced = parse_strategy(&m, &read(&strategy)?)?;
            return simulate(&m, &reduced, &from, &mem, steps, &adversary, out, input);
        }
        Command::OracleCheck { seeds, profile } => {
            let (text, code) = oracle_check(&seeds, profile)?;
            write_out(out, &text)?;
            return Ok(code);
        }
        Command::Play {
            model,
            from,
            mem,
            strategy,
            steps,
        } => {
            let m = load_model(&model)?;
            let reduced = match strategy {
                Some(p) => parse_strategy(&m, &read(&p)?)?,
                None => synth_buchi(&m)?.reduced,
            };
            return simulate(&m, &reduced, &from, &mem, steps, "interactive", out, input);
        }
    };
    write_out(out, &text)?;
    Ok(0)
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::new(EXIT_PARSE, format!("writing output: {e}")))
}

fn check(path: &Path) -> Result<String, Failure> {
    let m = load_model(path)?;
    for w in m.warnings() {
        eprintln!("warning: {w}");
    }
    let mut s = String::new();
    writeln!(s, "semiring={}", m.semiring).unwrap();
    writeln!(
        s,
        "kind={}",
        if m.is_automaton() {
            "automaton"
        } else {
            "game"
        }
    )
    .unwrap();
    writeln!(s, "states={}", m.num_states()).unwrap();
    writeln!(s, "transitions={}", m.transition_count()).unwrap();
    writeln!(s, "max_parity={}", m.max_parity()).unwrap();
    writeln!(s, "buchi={}", m.is_buchi()).unwrap();
    writeln!(s, "word={}", m.is_word()).unwrap();
    Ok(s)
}

fn extent(path: &Path, engine: Engine) -> Result<String, Failure> {
    let m = load_model(path)?;
    let e = match engine {
        Engine::Generic => extent_generic(&m),
        Engine::Recursive => extent_recursive(&m)?.0,
    };
    Ok(e.render(&m))
}

fn synth(path: &Path, file: Option<&Path>) -> Result<String, Failure> {
    let m = load_model(path)?;
    let syn = synth_buchi(&m)?;
    let rendered = syn.reduced.render(&m);
    let Some(file) = file else {
        return Ok(rendered);
    };
    fs::write(file, &rendered)
        .map_err(|e| Failure::new(EXIT_PARSE, format!("{}: {e}", file.display())))?;
    let mut s = String::new();
    for (i, st) in syn.reduced.states.iter().enumerate() {
        let name = m.name(StateId(i));
        match st {
            StateStrategy::Odd { theta, .. } => writeln!(s, "{name} theta={theta}").unwrap(),
            StateStrategy::Even { .. } => {}
            StateStrategy::Hopeless if m.state(StateId(i)).parity % 2 == 1 => {
                writeln!(s, "{name} theta=inf").unwrap()
            }
            StateStrategy::Hopeless => {}
        }
    }
    Ok(s)
}

fn value(model: &Path, run: &Path) -> Result<String, Failure> {
    let m = load_model(model)?;
    let (z, annotation) = parse_run(&m, &read(run)?)?;
    let mut s = String::new();
    writeln!(s, "value={}", run_value(&m, &z)).unwrap();
    writeln!(s, "accepting={}", is_accepting(&m, &z)).unwrap();
    if let Some(a) = annotation {
        if matches!(m.semiring, SemiringKind::Tropical { .. }) {
            let ext = extent_generic(&m);
            writeln!(s, "annotation={}", check_annotation(&m, &z, &a, &ext)).unwrap();
        }
    }
    Ok(s)
}

/// Reads `∀`'s choices as decimal option indices; bad input re-prompts.
struct Interactive<'a> {
    input: &'a mut dyn BufRead,
    closed: bool,
}

impl Adversary for Interactive<'_> {
    fn choose(&mut self, m: &Model, q: StateId, mem: Rational) -> usize {
        let options = &m.state(q).options;
        if self.closed {
            return 0;
        }
        loop {
            eprintln!(
                "forall to move at ({},{}):",
                m.name(q),
                format_rational(&mem)
            );
            for (i, d) in options.iter().enumerate() {
                eprintln!("  {i}) {}", m.dist(*d).name);
            }
            eprint!("> ");
            let mut line = String::new();
            match self.input.read_line(&mut line) {
                Ok(0) | Err(_) => {
                    eprintln!("input closed; choosing option 0 from now on");
                    self.closed = true;
                    return 0;
                }
                Ok(_) => {}
            }
            match line.trim().parse::<usize>() {
                Ok(i) if i < options.len() => return i,
                _ => eprintln!("enter a number between 0 and {}", options.len() - 1),
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    m: &Model,
    reduced: &ReducedStrategy,
    from: &str,
    mem: &str,
    steps: usize,
    adversary: &str,
    out: &mut dyn Write,
    input: &mut dyn BufRead,
) -> Outcome {
    let text = if adversary == "interactive" && !m.is_automaton() {
        let mut adv = Interactive {
            input,
            closed: false,
        };
        simulation_report(m, reduced, from, mem, steps, Some(&mut adv))?
    } else {
        simulation_report_with(m, reduced, from, mem, steps, adversary)?
    };
    write_out(out, &text)?;
    Ok(0)
}

/// [`simulation_report`] with a named adversary: `worst` or `random:<seed>`.
pub fn simulation_report_with(
    m: &Model,
    reduced: &ReducedStrategy,
    from: &str,
    mem: &str,
    steps: usize,
    adversary: &str,
) -> Result<String, Failure> {
    if m.is_automaton() {
        return simulation_report(m, reduced, from, mem, steps, None);
    }
    if adversary == "worst" {
        let ext = extent_recursive(m)?.0;
        let mut worst = WorstAdversary::new(m, &ext)?;
        return simulation_report(m, reduced, from, mem, steps, Some(&mut worst));
    }
    match adversary.strip_prefix("random:").map(str::parse::<u64>) {
        Some(Ok(seed)) => simulation_report(
            m,
            reduced,
            from,
            mem,
            steps,
            Some(&mut RandomAdversary { seed }),
        ),
        _ => Err(Failure::new(
            EXIT_PARSE,
            format!("bad adversary `{adversary}`: expected worst, random:<seed> or interactive"),
        )),
    }
}

/// Plays the carry-over reading of `reduced` from `(from, mem)` and renders
/// one line per configuration plus a verdict. Automata need no adversary;
/// games without one let `∀` always take the first option.
pub fn simulation_report(
    m: &Model,
    reduced: &ReducedStrategy,
    from: &str,
    mem: &str,
    steps: usize,
    adversary: Option<&mut dyn Adversary>,
) -> Result<String, Failure> {
    let q0 = state_arg(m, from)?;
    let mem0 = parse_memory(mem)?;
    let ext: ExtentMap = extent_recursive(m)?.0;
    let skeleton = reduced.skeleton(&ext);
    let strat = CarryOver(&skeleton);
    let mut first = FirstOption;
    let adv = adversary.unwrap_or(&mut first);
    let (run, ann) = match unfold(m, &strat, q0, mem0, adv, steps.max(1)) {
        Ok(r) => r,
        Err(RunError::TooLarge(n)) => return Ok(format!("INCONCLUSIVE steps={n}\n")),
        Err(e) => return Err(e.into()),
    };
    let config = |v: usize| {
        format!(
            "({},{})",
            m.name(run.nodes[v].state),
            format_rational(&ann.levels[v])
        )
    };
    let mut s = String::new();
    for (v, node) in run.nodes.iter().enumerate() {
        s.push_str(&config(v));
        if !m.is_automaton() {
            let d = m.state(node.state).options[node.option];
            write!(s, " via {}", m.dist(d).name).unwrap();
        }
        let children: String = node.children.iter().map(|c| config(*c)).collect();
        writeln!(s, " -> {children}").unwrap();
    }
    let verdict = if is_accepting(m, &run) {
        "ACCEPTING"
    } else {
        "REJECTING"
    };
    writeln!(s, "{verdict} value={}", run_value(m, &run)).unwrap();
    Ok(s)
}

/// Parses an inclusive `a..b` range; `b < a` is empty.
fn seed_range(text: &str) -> Result<std::ops::Range<u64>, Failure> {
    let bad = || {
        Failure::new(
            EXIT_PARSE,
            format!("bad seed range `{text}`: expected a..b"),
        )
    };
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    Ok(a..b.saturating_add(1).max(a))
}

fn oracle_check(seeds: &str, profile: Profile) -> Result<(String, i32), Failure> {
    let range = seed_range(seeds)?;
    let reports = oracle_batch(range, profile);
    let mut s = String::new();
    let mut failing = Vec::new();
    let mut skipped = 0;
    for lines in &reports {
        for l in lines {
            writeln!(s, "{l}").unwrap();
        }
        if lines.iter().any(|l| l.status == "SKIPPED") {
            skipped += 1;
        }
        if lines.iter().any(|l| !l.ok() && l.status != "SKIPPED") {
            failing.push(lines[0].seed);
        }
    }
    let total = reports.len();
    write!(s, "{}/{} ok", total - failing.len(), total).unwrap();
    if skipped > 0 {
        write!(s, " ({skipped} skipped: oracle game too large)").unwrap();
    }
    s.push('\n');
    if failing.is_empty() {
        Ok((s, 0))
    } else {
        let list: Vec<String> = failing.iter().map(u64::to_string).collect();
        writeln!(s, "disagreeing seeds: {}", list.join(" ")).unwrap();
        Ok((s, EXIT_DISAGREE))
    }
}
