//! Strategies that realize extents.
//!
//! A [`SkeletonStrategy`] maps configurations `(q, n)` to moves that hand each
//! successor a memory level. The memory-full strategy replays it exactly; the
//! carry-over strategy plays the entry at the largest domain level not above
//! the current memory and passes the surplus on. The [`ReducedStrategy`]
//! keeps only two entries per odd state: the acceptor move at the threshold
//! and the base move at the extent.
//!
//! In games every entry holds one move per option, since `∀` picks the
//! option before `∃` moves.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use num_traits::{CheckedAdd, CheckedDiv, CheckedSub, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::extent::{evaluate, extent_recursive, option_value, tropical, ExtentMap, UpdateTrace};
use crate::model::{Model, StateId};
use crate::resource_game::{build_resource_game, zielonka_solve, Config, Player, ResourceGame};
use crate::semiring::{format_rational, parse_rational, Cost, Extended, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("strategy undefined at ({state},{memory})")]
    Undefined { state: String, memory: String },
    #[error("inconsistent strategy: {0}")]
    Inconsistent(String),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Usage(String),
    /// Carried-over memory no longer fits the exact rational representation,
    /// as happens when surplus keeps being halved down an infinite tree.
    #[error("{0}: memory too fine to represent")]
    Precision(String),
}

/// `∃`'s answer to one option: which entry to take and the memory each
/// successor starts with.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Move {
    pub option: usize,
    pub transition: usize,
    pub successors: Vec<(StateId, u64)>,
}

/// One move per option of the state, in option order.
pub type Choice = Vec<Move>;

fn choice_from(witnesses: &[crate::extent::Witness]) -> Choice {
    witnesses
        .iter()
        .map(|w| Move {
            option: w.option,
            transition: w.transition,
            successors: w
                .successors
                .iter()
                .map(|(q, c)| (*q, c.finite().expect("witness successors are finite")))
                .collect(),
        })
        .collect()
}

/// A partial map from configurations to choices.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SkeletonStrategy {
    pub entries: BTreeMap<(StateId, u64), Choice>,
}

impl SkeletonStrategy {
    pub fn get(&self, q: StateId, level: u64) -> Option<&Choice> {
        self.entries.get(&(q, level))
    }

    /// Domain levels of `q`, ascending.
    pub fn domain(&self, q: StateId) -> Vec<u64> {
        self.entries
            .range((q, 0)..=(q, u64::MAX))
            .map(|((_, n), _)| *n)
            .collect()
    }

    /// Largest domain level of `q` not exceeding `mem`.
    pub fn level_at_most(&self, q: StateId, mem: Rational) -> Option<u64> {
        let cap = mem.floor().to_integer();
        if cap < 0 {
            return None;
        }
        self.entries
            .range((q, 0)..=(q, cap as u64))
            .next_back()
            .map(|((_, n), _)| *n)
    }
}

/// Per-state part of a [`ReducedStrategy`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StateStrategy {
    Odd {
        theta: u64,
        acceptor: Choice,
        base: Option<Choice>,
    },
    Even {
        sigma: Choice,
    },
    /// The state has infinite extent; nothing to play.
    Hopeless,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedStrategy {
    pub states: Vec<StateStrategy>,
}

impl ReducedStrategy {
    /// Acceptor entries at the threshold, base entries at the extent, even
    /// entries at the extent.
    pub fn skeleton(&self, ext: &ExtentMap) -> SkeletonStrategy {
        let mut s = SkeletonStrategy::default();
        for (i, st) in self.states.iter().enumerate() {
            let q = StateId(i);
            let Some(e) = ext.cost(q).finite() else {
                continue;
            };
            match st {
                StateStrategy::Odd {
                    theta,
                    acceptor,
                    base,
                } => {
                    s.entries.insert((q, *theta), acceptor.clone());
                    if let Some(b) = base {
                        s.entries.insert((q, e), b.clone());
                    }
                }
                StateStrategy::Even { sigma } => {
                    s.entries.insert((q, e), sigma.clone());
                }
                StateStrategy::Hopeless => {}
            }
        }
        s
    }

    /// One line per state in declaration order.
    pub fn render(&self, m: &Model) -> String {
        let mut out = String::new();
        for (i, st) in self.states.iter().enumerate() {
            let q = StateId(i);
            let name = m.name(q);
            match st {
                StateStrategy::Hopeless => {
                    if m.state(q).parity.is_multiple_of(2) {
                        writeln!(out, "{name} sigma=none").unwrap();
                    } else {
                        writeln!(out, "{name} theta=inf acceptor=none base=none").unwrap();
                    }
                }
                StateStrategy::Odd {
                    theta,
                    acceptor,
                    base,
                } => {
                    let base = base
                        .as_ref()
                        .map(|b| render_choice(m, q, b))
                        .unwrap_or_else(|| "none".to_string());
                    writeln!(
                        out,
                        "{name} theta={theta} acceptor={} base={base}",
                        render_choice(m, q, acceptor)
                    )
                    .unwrap();
                }
                StateStrategy::Even { sigma } => {
                    writeln!(out, "{name} sigma={}", render_choice(m, q, sigma)).unwrap();
                }
            }
        }
        out
    }
}

/// `dist:symbol(succ:level,…)`, options joined by `+`.
pub fn render_choice(m: &Model, q: StateId, c: &Choice) -> String {
    c.iter()
        .map(|mv| {
            let d = m.dist(m.state(q).options[mv.option]);
            let t = &d.entries[mv.transition];
            let succ: Vec<String> = mv
                .successors
                .iter()
                .map(|(s, n)| format!("{}:{}", m.name(*s), n))
                .collect();
            format!(
                "{}:{}({})",
                d.name,
                m.signature.get(t.symbol).name,
                succ.join(",")
            )
        })
        .collect::<Vec<_>>()
        .join("+")
}

fn parse_choice(m: &Model, q: StateId, text: &str, line: usize) -> Result<Choice, StrategyError> {
    let err = |message: String| StrategyError::Syntax { line, message };
    let parts: Vec<&str> = text.split('+').collect();
    let options = &m.state(q).options;
    if parts.len() != options.len() {
        return Err(err(format!(
            "state `{}` has {} options but {} moves are given",
            m.name(q),
            options.len(),
            parts.len()
        )));
    }
    let mut out = Vec::new();
    for (option, part) in parts.iter().enumerate() {
        let (dname, term) = part
            .split_once(':')
            .ok_or_else(|| err(format!("expected `dist:symbol(…)`, got `{part}`")))?;
        let dist = m.dist(options[option]);
        if dist.name != dname {
            return Err(err(format!(
                "option {option} of `{}` is `{}`, not `{dname}`",
                m.name(q),
                dist.name
            )));
        }
        let open = term
            .find('(')
            .ok_or_else(|| err(format!("missing `(` in `{term}`")))?;
        let inner = term[open + 1..]
            .strip_suffix(')')
            .ok_or_else(|| err(format!("missing `)` in `{term}`")))?;
        let symbol = m
            .signature
            .lookup(&term[..open])
            .ok_or_else(|| err(format!("unknown symbol in `{term}`")))?;
        let mut successors = Vec::new();
        for item in inner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (s, n) = item
                .split_once(':')
                .ok_or_else(|| err(format!("expected `state:level`, got `{item}`")))?;
            let s = m
                .state_id(s)
                .ok_or_else(|| err(format!("unknown state `{s}`")))?;
            let n: u64 = n
                .parse()
                .map_err(|_| err(format!("bad level in `{item}`")))?;
            successors.push((s, n));
        }
        let states: Vec<StateId> = successors.iter().map(|(s, _)| *s).collect();
        let transition = dist
            .entries
            .iter()
            .position(|t| t.symbol == symbol && t.successors == states)
            .ok_or_else(|| err(format!("`{part}` is not an entry of `{dname}`")))?;
        out.push(Move {
            option,
            transition,
            successors,
        });
    }
    Ok(out)
}

/// Reads a strategy file written by [`ReducedStrategy::render`].
pub fn parse_strategy(m: &Model, text: &str) -> Result<ReducedStrategy, StrategyError> {
    let mut states: Vec<Option<StateStrategy>> = vec![None; m.num_states()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| StrategyError::Syntax { line, message };
        let mut words = body.split_whitespace();
        let name = words.next().unwrap();
        let q = m
            .state_id(name)
            .ok_or_else(|| err(format!("unknown state `{name}`")))?;
        let mut fields = HashMap::new();
        for w in words {
            let (k, v) = w
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got `{w}`")))?;
            fields.insert(k, v);
        }
        let even = m.state(q).parity.is_multiple_of(2);
        let st = if even {
            let sigma = fields
                .get("sigma")
                .ok_or_else(|| err(format!("even state `{name}` needs sigma=")))?;
            if *sigma == "none" {
                StateStrategy::Hopeless
            } else {
                StateStrategy::Even {
                    sigma: parse_choice(m, q, sigma, line)?,
                }
            }
        } else {
            let get = |k: &str| {
                fields
                    .get(k)
                    .copied()
                    .ok_or_else(|| err(format!("odd state `{name}` needs {k}=")))
            };
            let theta = get("theta")?;
            if theta == "inf" {
                StateStrategy::Hopeless
            } else {
                let theta: u64 = theta
                    .parse()
                    .map_err(|_| err(format!("bad threshold `{theta}`")))?;
                let base = get("base")?;
                StateStrategy::Odd {
                    theta,
                    acceptor: parse_choice(m, q, get("acceptor")?, line)?,
                    base: if base == "none" {
                        None
                    } else {
                        Some(parse_choice(m, q, base, line)?)
                    },
                }
            }
        };
        if states[q.0].replace(st).is_some() {
            return Err(err(format!("state `{name}` listed twice")));
        }
    }
    let states = states
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            s.ok_or_else(|| {
                StrategyError::Inconsistent(format!("no line for state `{}`", m.name(StateId(i))))
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReducedStrategy { states })
}

/// Output of [`synth_buchi`].
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub reduced: ReducedStrategy,
    pub ext: ExtentMap,
    pub trace: UpdateTrace,
    /// Rounds of the parity-1 repeat loop.
    pub rounds: usize,
}

/// Attractor and base strategies for Büchi automata and games.
///
/// Extents come from the full recursion; even states get a witnessing move
/// at their extent; odd states are then reset to `∞` and recomputed, the
/// first strict update of each fixing its threshold and acceptor move and
/// every later one overwriting its base move.
pub fn synth_buchi(m: &Model) -> Result<Synthesis, StrategyError> {
    if !m.is_buchi() {
        return Err(StrategyError::Unsupported("parity synthesis".to_string()));
    }
    let s = tropical(m).map_err(|e| StrategyError::Unsupported(e.to_string()))?;
    let (ext, trace) =
        extent_recursive(m).map_err(|e| StrategyError::Unsupported(e.to_string()))?;
    let mut e: Vec<Cost> = ext.costs().expect("tropical extents");

    let mut states: Vec<StateStrategy> = vec![StateStrategy::Hopeless; m.num_states()];
    for q in m.class(2) {
        if e[q.0].is_finite() {
            let witnesses: Vec<_> = (0..m.state(q).options.len())
                .map(|o| option_value(&s, m, q, o, &e))
                .collect();
            states[q.0] = StateStrategy::Even {
                sigma: choice_from(&witnesses),
            };
        }
    }

    let odd = m.class(1);
    let mut first: Vec<Option<(u64, Choice)>> = vec![None; m.num_states()];
    let mut last: Vec<Option<Choice>> = vec![None; m.num_states()];
    for q in &odd {
        e[q.0] = Extended::Inf;
    }
    let mut rounds = 0;
    loop {
        rounds += 1;
        let old = e.clone();
        for q in &odd {
            let (to, witnesses, _) = evaluate(&s, m, *q, &old);
            if to != old[q.0] {
                let level = to.finite().expect("updates decrease to finite values");
                if first[q.0].is_none() {
                    first[q.0] = Some((level, choice_from(&witnesses)));
                } else {
                    last[q.0] = Some(choice_from(&witnesses));
                }
            }
            e[q.0] = to;
        }
        if e == old {
            break;
        }
    }
    for q in &odd {
        if let Some((theta, acceptor)) = first[q.0].take() {
            states[q.0] = StateStrategy::Odd {
                theta,
                acceptor,
                base: last[q.0].take(),
            };
        }
    }
    if e != ext.costs().unwrap() {
        return Err(StrategyError::Inconsistent(
            "recomputed odd values differ from the extents".to_string(),
        ));
    }
    Ok(Synthesis {
        reduced: ReducedStrategy { states },
        ext,
        trace,
        rounds,
    })
}

/// The full skeleton read off the last parity-1 pass of the trace, and its
/// reduction to acceptor, base and even entries.
pub fn skeleton_of(
    m: &Model,
    reduced: &ReducedStrategy,
    trace: &UpdateTrace,
    ext: &ExtentMap,
) -> Result<(SkeletonStrategy, SkeletonStrategy), StrategyError> {
    if reduced.states.len() != m.num_states() {
        return Err(StrategyError::Usage(
            "strategy and model have different state counts".to_string(),
        ));
    }
    let mut full = SkeletonStrategy::default();
    let mut per_state: HashMap<StateId, Vec<(u64, Choice)>> = HashMap::new();
    for c in trace.final_updates(1) {
        let level = c.to.finite().expect("updates are finite");
        let choice = choice_from(&c.witnesses);
        full.entries.insert((c.state, level), choice.clone());
        per_state.entry(c.state).or_default().push((level, choice));
    }
    for q in m.state_ids() {
        let bad = |what: &str| {
            StrategyError::Inconsistent(format!(
                "{what} of `{}` disagrees with the trace",
                m.name(q)
            ))
        };
        match &reduced.states[q.0] {
            StateStrategy::Even { sigma } => {
                let e = ext.cost(q).finite().ok_or_else(|| bad("extent"))?;
                full.entries.insert((q, e), sigma.clone());
            }
            StateStrategy::Odd {
                theta,
                acceptor,
                base,
            } => {
                let ups = per_state.get(&q).ok_or_else(|| bad("threshold"))?;
                let (l0, c0) = &ups[0];
                if l0 != theta || c0 != acceptor {
                    return Err(bad("acceptor"));
                }
                let expected_base = if ups.len() > 1 {
                    ups.last().map(|u| &u.1)
                } else {
                    None
                };
                if expected_base != base.as_ref() {
                    return Err(bad("base"));
                }
                if Extended::Fin(ups.last().unwrap().0) != ext.cost(q) {
                    return Err(bad("extent"));
                }
            }
            StateStrategy::Hopeless => {
                if ext.cost(q).is_finite() {
                    return Err(bad("extent"));
                }
            }
        }
    }
    Ok((full, reduced.skeleton(ext)))
}

/// No conform play leaves an odd configuration `(q, n)` and comes back to
/// `(q, n')` with `n' < n` without visiting an even state. Successors outside
/// the domain are not followed.
pub fn no_redundancy(m: &Model, s: &SkeletonStrategy) -> bool {
    let odd = |q: StateId| m.state(q).parity % 2 == 1;
    for (&(q, n), _) in s.entries.iter().filter(|((q, _), _)| odd(*q)) {
        let mut seen = HashSet::new();
        let mut stack = vec![(q, n)];
        while let Some(cfg) = stack.pop() {
            let Some(choice) = s.entries.get(&cfg) else {
                continue;
            };
            for mv in choice {
                for &(t, l) in &mv.successors {
                    if !s.entries.contains_key(&(t, l)) || !odd(t) {
                        continue;
                    }
                    if t == q && l < n {
                        return false;
                    }
                    if seen.insert((t, l)) {
                        stack.push((t, l));
                    }
                }
            }
        }
    }
    true
}

/// What a strategy does at one configuration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    /// Domain level of the skeleton entry that was used.
    pub level: u64,
    pub transition: usize,
    pub successors: Vec<(StateId, Rational)>,
}

pub trait Strategy {
    /// The move for `option` of `q` when holding `mem`.
    fn decide(
        &self,
        m: &Model,
        q: StateId,
        mem: Rational,
        option: usize,
    ) -> Result<Decision, StrategyError>;
}

fn undefined(m: &Model, q: StateId, mem: Rational) -> StrategyError {
    StrategyError::Undefined {
        state: m.name(q).to_string(),
        memory: format_rational(&mem),
    }
}

fn pick(c: &Choice, option: usize) -> Result<&Move, StrategyError> {
    c.iter()
        .find(|mv| mv.option == option)
        .ok_or_else(|| StrategyError::Usage(format!("no move for option {option}")))
}

/// Replays skeleton entries exactly; memory is the level of the entry.
pub struct MemoryFull<'a>(pub &'a SkeletonStrategy);

impl Strategy for MemoryFull<'_> {
    fn decide(
        &self,
        m: &Model,
        q: StateId,
        mem: Rational,
        option: usize,
    ) -> Result<Decision, StrategyError> {
        let level = if mem.is_integer() {
            mem.to_integer().to_u64()
        } else {
            None
        };
        let Some(level) = level else {
            return Err(undefined(m, q, mem));
        };
        let c = self.0.get(q, level).ok_or_else(|| undefined(m, q, mem))?;
        let mv = pick(c, option)?;
        Ok(Decision {
            level,
            transition: mv.transition,
            successors: mv
                .successors
                .iter()
                .map(|(s, n)| (*s, Rational::from_integer(*n as i64)))
                .collect(),
        })
    }
}

/// Plays the entry at the largest domain level `n ≤ mem` and hands the
/// surplus `mem − n` to the successors, split equally when there are
/// several. The surplus passed on is capped so that weight plus successor
/// memories stays within the bound; at arity 0 it is discarded.
pub struct CarryOver<'a>(pub &'a SkeletonStrategy);

impl Strategy for CarryOver<'_> {
    fn decide(
        &self,
        m: &Model,
        q: StateId,
        mem: Rational,
        option: usize,
    ) -> Result<Decision, StrategyError> {
        let level = self
            .0
            .level_at_most(q, mem)
            .ok_or_else(|| undefined(m, q, mem))?;
        let c = self.0.get(q, level).expect("level from the domain");
        let mv = pick(c, option)?;
        let bound = m
            .semiring
            .nat_bound()
            .ok_or_else(|| StrategyError::Unsupported("carry-over needs a bound".to_string()))?;
        let dist = m.dist(m.state(q).options[option]);
        let w = dist.entries[mv.transition]
            .weight
            .as_cost()
            .and_then(Extended::finite)
            .expect("skeleton moves have finite weight");
        let used: u64 = w + mv.successors.iter().map(|(_, n)| n).sum::<u64>();
        let room = Rational::from_integer(bound.saturating_sub(used) as i64);
        let precision = || StrategyError::Precision(m.name(q).to_string());
        let surplus = mem
            .checked_sub(&Rational::from_integer(level as i64))
            .ok_or_else(precision)?
            .min(room);
        let shares = if mv.successors.is_empty() {
            Vec::new()
        } else {
            distribute_carryover(surplus, mv.successors.len())?
        };
        let successors = mv
            .successors
            .iter()
            .zip(shares)
            .map(|((s, n), share)| {
                Rational::from_integer(*n as i64)
                    .checked_add(&share)
                    .map(|l| (*s, l))
                    .ok_or_else(precision)
            })
            .collect::<Result<_, _>>()?;
        Ok(Decision {
            level,
            transition: mv.transition,
            successors,
        })
    }
}

/// `k` equal shares of `surplus`.
pub fn distribute_carryover(surplus: Rational, k: usize) -> Result<Vec<Rational>, StrategyError> {
    if k == 0 {
        return Err(StrategyError::Usage(
            "cannot distribute resources among zero successors".to_string(),
        ));
    }
    if surplus < Rational::zero() {
        return Err(StrategyError::Usage("negative surplus".to_string()));
    }
    let share = surplus
        .checked_div(&Rational::from_integer(k as i64))
        .ok_or_else(|| {
            StrategyError::Precision(format!("split of {}", format_rational(&surplus)))
        })?;
    Ok(vec![share; k])
}

/// Successors and memories under the memory-full strategy (automata).
pub fn next_memory_full(
    m: &Model,
    s: &SkeletonStrategy,
    q: StateId,
    mem: Rational,
) -> Result<Vec<(StateId, Rational)>, StrategyError> {
    Ok(MemoryFull(s).decide(m, q, mem, 0)?.successors)
}

/// The move and successor memories under the carry-over strategy (automata).
pub fn next_carry_over(
    m: &Model,
    s: &SkeletonStrategy,
    q: StateId,
    mem: Rational,
) -> Result<Decision, StrategyError> {
    CarryOver(s).decide(m, q, mem, 0)
}

/// Chooses options for `∀`.
pub trait Adversary {
    fn choose(&mut self, m: &Model, q: StateId, mem: Rational) -> usize;
}

/// The only option there is (automata), or always the first one.
pub struct FirstOption;

impl Adversary for FirstOption {
    fn choose(&mut self, _: &Model, _: StateId, _: Rational) -> usize {
        0
    }
}

/// A memoryless policy for `∀` on a solved game: from every `∀`
/// configuration, the first successor inside `∀`'s winning region, else the
/// first successor.
pub fn adversary_policy(g: &ResourceGame, winner: &[Player]) -> HashMap<usize, usize> {
    let mut out = HashMap::new();
    for v in 0..g.len() {
        if g.owner[v] != Player::Forall || g.succ[v].is_empty() {
            continue;
        }
        let t = g.succ[v]
            .iter()
            .copied()
            .find(|t| winner[*t] == Player::Forall)
            .unwrap_or(g.succ[v][0]);
        out.insert(v, t);
    }
    out
}

/// `∀` plays into its winning region when it can, and otherwise picks the
/// option whose value against the extents is largest (first on ties).
pub struct WorstAdversary {
    winning: HashMap<(StateId, u64), usize>,
    fallback: Vec<usize>,
}

impl WorstAdversary {
    pub fn new(m: &Model, ext: &ExtentMap) -> Result<WorstAdversary, StrategyError> {
        let s = tropical(m).map_err(|e| StrategyError::Unsupported(e.to_string()))?;
        let costs = ext.costs().expect("tropical extents");
        let fallback = m
            .state_ids()
            .map(|q| evaluate(&s, m, q, &costs).2)
            .collect();
        let mut winning = HashMap::new();
        if !m.is_automaton() {
            let g = build_resource_game(m, ext)
                .map_err(|e| StrategyError::Unsupported(e.to_string()))?;
            let w = zielonka_solve(&g);
            for (v, t) in adversary_policy(&g, &w) {
                if let (Config::State { state, level }, Config::Option { option, .. }) =
                    (&g.configs[v], &g.configs[t])
                {
                    if w[t] == Player::Forall {
                        winning.insert((*state, *level), *option);
                    }
                }
            }
        }
        Ok(WorstAdversary { winning, fallback })
    }
}

impl Adversary for WorstAdversary {
    fn choose(&mut self, _: &Model, q: StateId, mem: Rational) -> usize {
        if mem.is_integer() {
            if let Some(level) = mem.to_integer().to_u64() {
                if let Some(o) = self.winning.get(&(q, level)) {
                    return *o;
                }
            }
        }
        self.fallback[q.0]
    }
}

/// A memoryless random policy: the option depends only on the seed and the
/// configuration, so repeated configurations get repeated answers.
pub struct RandomAdversary {
    pub seed: u64,
}

impl Adversary for RandomAdversary {
    fn choose(&mut self, m: &Model, q: StateId, mem: Rational) -> usize {
        let n = m.state(q).options.len();
        let key = self
            .seed
            .wrapping_mul(0x9e37_79b9_7f4a_7c15)
            .wrapping_add((q.0 as u64) << 40)
            .wrapping_add((*mem.numer() as u64) << 20)
            .wrapping_add(*mem.denom() as u64);
        ChaCha8Rng::seed_from_u64(key).gen_range(0..n)
    }
}

/// Reads the memory argument of the command line: a natural or `p/q`.
pub fn parse_memory(text: &str) -> Result<Rational, StrategyError> {
    parse_rational(text)
        .filter(|r| *r >= Rational::zero())
        .ok_or_else(|| StrategyError::Usage(format!("bad memory value `{text}`")))
}
