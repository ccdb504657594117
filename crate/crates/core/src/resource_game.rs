//! The standard parity game behind a resource-aware model.
//!
//! Configurations pair model states with resource levels in `0..=B`. For
//! automata `∃` sits at `(q, n)` and picks a transition together with a split
//! of the available resources among the successors; `∀` then picks which
//! successor to follow. For games an extra `∀` layer in front lets the
//! opponent pick one of the options of `q`, collecting the offset on the way.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::extent::{ExtentMap, UpdateTrace};
use crate::model::{Model, StateId, SymbolId};
use crate::semiring::{Cost, Extended, SemiringKind, Value};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource game would need {needed} state configurations, limit is {limit}")]
    TooLarge { needed: usize, limit: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Player {
    Exists,
    Forall,
}

impl Player {
    pub fn opponent(self) -> Player {
        match self {
            Player::Exists => Player::Forall,
            Player::Forall => Player::Exists,
        }
    }

    fn of_parity(p: u32) -> Player {
        if p.is_multiple_of(2) {
            Player::Exists
        } else {
            Player::Forall
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Config {
    /// A model state holding `level` resources.
    State { state: StateId, level: u64 },
    /// Game models only: option `option` of `state` has been picked and the
    /// offset collected, leaving `level` resources to spend.
    Option {
        state: StateId,
        option: usize,
        level: u64,
    },
    /// A transition was taken; the children are the successors with the
    /// resources handed to each.
    Branch {
        symbol: SymbolId,
        children: Vec<(StateId, u64)>,
    },
}

impl Config {
    /// `(q, n)` state configurations.
    pub fn as_state(&self) -> Option<(StateId, u64)> {
        match self {
            Config::State { state, level } => Some((*state, *level)),
            _ => None,
        }
    }
}

pub struct ConfigDisplay<'a> {
    m: &'a Model,
    c: &'a Config,
}

impl fmt::Display for ConfigDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.m;
        match self.c {
            Config::State { state, level } => write!(f, "({},{})", m.name(*state), level),
            Config::Option {
                state,
                option,
                level,
            } => {
                let d = m.dist(m.state(*state).options[*option]);
                write!(f, "({},{},{})", m.name(*state), d.name, level)
            }
            Config::Branch { symbol, children } => {
                let parts: Vec<String> = children
                    .iter()
                    .map(|(q, n)| format!("({},{})", m.name(*q), n))
                    .collect();
                write!(f, "{}[{}]", m.signature.get(*symbol).name, parts.join(","))
            }
        }
    }
}

/// A finite parity game; max-parity convention, even parities favour `∃`.
#[derive(Clone, Debug)]
pub struct ResourceGame {
    pub configs: Vec<Config>,
    pub owner: Vec<Player>,
    pub parity: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
    pub bound: u64,
    index: HashMap<Config, usize>,
}

impl ResourceGame {
    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn find(&self, c: &Config) -> Option<usize> {
        self.index.get(c).copied()
    }

    pub fn state_config(&self, q: StateId, level: u64) -> Option<usize> {
        self.find(&Config::State { state: q, level })
    }

    pub fn display<'a>(&'a self, m: &'a Model, v: usize) -> ConfigDisplay<'a> {
        ConfigDisplay {
            m,
            c: &self.configs[v],
        }
    }

    pub fn has_move(&self, from: &Config, to: &Config) -> bool {
        match (self.find(from), self.find(to)) {
            (Some(a), Some(b)) => self.succ[a].contains(&b),
            _ => false,
        }
    }

    /// One `owner parity config -> targets` line per configuration, sorted.
    pub fn dump(&self, m: &Model) -> String {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|a, b| self.configs[*a].cmp(&self.configs[*b]));
        let mut out = String::new();
        for v in order {
            let owner = match self.owner[v] {
                Player::Exists => "E",
                Player::Forall => "A",
            };
            let mut targets: Vec<usize> = self.succ[v].clone();
            targets.sort_by(|a, b| self.configs[*a].cmp(&self.configs[*b]));
            let targets: Vec<String> = targets
                .iter()
                .map(|t| self.display(m, *t).to_string())
                .collect();
            writeln!(
                out,
                "{owner} {} {} -> {}",
                self.parity[v],
                self.display(m, v),
                targets.join(" ")
            )
            .unwrap();
        }
        out
    }

    /// Checks the move arithmetic: every `∃` move satisfies
    /// `level + offset ≥ weight + Σ child levels` with the right-hand side
    /// within the bound, and every move goes to the next layer.
    pub fn check_moves(&self, m: &Model) -> Result<(), String> {
        let game = !m.is_automaton();
        for (v, c) in self.configs.iter().enumerate() {
            for &t in &self.succ[v] {
                let target = &self.configs[t];
                let ok_layer =
                    matches!(
                        (c, target),
                        (Config::State { .. }, Config::Option { .. }) if game
                    ) || matches!(
                        (c, target),
                        (Config::State { .. }, Config::Branch { .. }) if !game
                    ) || matches!((c, target), (Config::Option { .. }, Config::Branch { .. }))
                        || matches!((c, target), (Config::Branch { .. }, Config::State { .. }));
                if !ok_layer {
                    return Err(format!("move {c:?} -> {target:?} skips a layer"));
                }
                if self.owner[v] == self.owner[t] && !matches!(c, Config::Branch { .. }) {
                    return Err(format!("move {c:?} -> {target:?} keeps the owner"));
                }
                if let Config::Branch { symbol, children } = target {
                    let (state, option, available) = match c {
                        Config::State { state, level } => {
                            (*state, 0, add_offset(m, *state, *level, self.bound))
                        }
                        Config::Option {
                            state,
                            option,
                            level,
                        } => (*state, *option, *level),
                        _ => unreachable!(),
                    };
                    let succ: Vec<StateId> = children.iter().map(|(q, _)| *q).collect();
                    let dist = m.dist(m.state(state).options[option]);
                    let t = dist
                        .find(*symbol, &succ)
                        .ok_or_else(|| format!("move {c:?} -> {target:?} has no transition"))?;
                    let need = weight_cost(&t.weight)
                        .finite()
                        .map(|w| w + children.iter().map(|(_, n)| n).sum::<u64>());
                    match need {
                        Some(n) if n <= self.bound && n <= available => {}
                        _ => return Err(format!("move {c:?} -> {target:?} is not affordable")),
                    }
                }
            }
        }
        Ok(())
    }
}

/// Weights as costs; boolean weights cost nothing.
fn weight_cost(v: &Value) -> Cost {
    match v {
        Value::Nat(c) => *c,
        Value::Bool(true) => Extended::Fin(0),
        Value::Bool(false) => Extended::Inf,
        Value::Rat(_) => unreachable!("rational models have no resource game"),
    }
}

/// `level + r(q)`, capped at `bound`; offsets of boolean models are ignored.
fn add_offset(m: &Model, q: StateId, level: u64, bound: u64) -> u64 {
    match m.state(q).offset {
        Value::Nat(Extended::Fin(r)) => (level + r).min(bound),
        Value::Nat(Extended::Inf) => bound,
        _ => level,
    }
}

struct Builder<'a> {
    m: &'a Model,
    bound: u64,
    floor: Vec<Option<u64>>,
    g: ResourceGame,
    work: Vec<usize>,
}

impl Builder<'_> {
    fn intern(&mut self, c: Config) -> usize {
        if let Some(v) = self.g.index.get(&c) {
            return *v;
        }
        let v = self.g.configs.len();
        let game = !self.m.is_automaton();
        let (owner, parity) = match &c {
            Config::State { state, .. } => (
                if game { Player::Forall } else { Player::Exists },
                self.m.state(*state).parity,
            ),
            Config::Option { state, .. } => (Player::Exists, self.m.state(*state).parity),
            Config::Branch { children, .. } => (
                Player::Forall,
                children
                    .iter()
                    .map(|(q, _)| self.m.state(*q).parity)
                    .min()
                    .unwrap_or(0),
            ),
        };
        self.g.index.insert(c.clone(), v);
        self.g.configs.push(c);
        self.g.owner.push(owner);
        self.g.parity.push(parity);
        self.g.succ.push(Vec::new());
        self.work.push(v);
        v
    }

    fn run(&mut self) {
        while let Some(v) = self.work.pop() {
            let c = self.g.configs[v].clone();
            let targets = self.expand(&c);
            let ids: Vec<usize> = targets.into_iter().map(|t| self.intern(t)).collect();
            self.g.succ[v] = ids;
        }
    }

    fn expand(&self, c: &Config) -> Vec<Config> {
        let m = self.m;
        match c {
            Config::State { state, level } => {
                if m.is_automaton() {
                    self.branches(*state, 0, add_offset(m, *state, *level, self.bound))
                } else {
                    let available = add_offset(m, *state, *level, self.bound);
                    (0..m.state(*state).options.len())
                        .map(|option| Config::Option {
                            state: *state,
                            option,
                            level: available,
                        })
                        .collect()
                }
            }
            Config::Option {
                state,
                option,
                level,
            } => self.branches(*state, *option, *level),
            Config::Branch { children, .. } => children
                .iter()
                .map(|(q, n)| Config::State {
                    state: *q,
                    level: *n,
                })
                .collect(),
        }
    }

    /// All branch configurations affordable with `available` resources.
    fn branches(&self, q: StateId, option: usize, available: u64) -> Vec<Config> {
        let m = self.m;
        let dist = m.dist(m.state(q).options[option]);
        let mut out = Vec::new();
        for t in &dist.entries {
            let Some(w) = weight_cost(&t.weight).finite() else {
                continue;
            };
            if w > available {
                continue;
            }
            let floors: Option<Vec<u64>> = t.successors.iter().map(|x| self.floor[x.0]).collect();
            let Some(floors) = floors else { continue };
            let budget = available - w;
            let mut levels = floors.clone();
            splits(&floors, budget, 0, &mut levels, &mut |lv| {
                out.push(Config::Branch {
                    symbol: t.symbol,
                    children: t
                        .successors
                        .iter()
                        .copied()
                        .zip(lv.iter().copied())
                        .collect(),
                });
            });
        }
        out
    }
}

/// Enumerates level vectors `lv ≥ floors` with `Σ lv ≤ budget`.
fn splits(floors: &[u64], budget: u64, i: usize, lv: &mut Vec<u64>, emit: &mut impl FnMut(&[u64])) {
    if i == floors.len() {
        if lv.iter().sum::<u64>() <= budget {
            emit(lv);
        }
        return;
    }
    let used: u64 = lv[..i].iter().sum::<u64>() + floors[i + 1..].iter().sum::<u64>();
    if used > budget {
        return;
    }
    for n in floors[i]..=budget - used {
        lv[i] = n;
        splits(floors, budget, i + 1, lv, emit);
    }
    lv[i] = floors[i];
}

fn nat_bound(m: &Model) -> Result<u64, GameError> {
    match m.semiring {
        SemiringKind::Tropical { bound } => Ok(bound),
        other => Err(GameError::Unsupported(format!(
            "resource games need a tropical-bounded semiring, not {other}"
        ))),
    }
}

fn build(
    m: &Model,
    bound: u64,
    floor: Vec<Option<u64>>,
    probes: &[(StateId, u64)],
) -> ResourceGame {
    let mut b = Builder {
        m,
        bound,
        floor,
        g: ResourceGame {
            configs: Vec::new(),
            owner: Vec::new(),
            parity: Vec::new(),
            succ: Vec::new(),
            bound,
            index: HashMap::new(),
        },
        work: Vec::new(),
    };
    for q in m.state_ids() {
        if let Some(f) = b.floor[q.0] {
            for level in f..=bound {
                b.intern(Config::State { state: q, level });
            }
        }
    }
    for (q, level) in probes {
        b.intern(Config::State {
            state: *q,
            level: *level,
        });
    }
    b.run();
    b.g
}

fn floors_from(ext: &ExtentMap) -> Vec<Option<u64>> {
    ext.values
        .iter()
        .map(|v| v.as_cost().and_then(Extended::finite))
        .collect()
}

/// The resource game over levels `ext(q)..=B`; states of infinite extent and
/// moves into them are left out.
pub fn build_resource_game(m: &Model, ext: &ExtentMap) -> Result<ResourceGame, GameError> {
    let bound = nat_bound(m)?;
    Ok(build(m, bound, floors_from(ext), &[]))
}

/// [`build_resource_game`] plus extra state configurations below the extent
/// (with the moves they afford into the regular part of the game).
pub fn build_resource_game_with_probes(
    m: &Model,
    ext: &ExtentMap,
    probes: &[(StateId, u64)],
) -> Result<ResourceGame, GameError> {
    let bound = nat_bound(m)?;
    Ok(build(m, bound, floors_from(ext), probes))
}

/// The resource game over all levels `0..=B`, ignoring extents entirely.
pub fn build_full_game(m: &Model, limit: usize) -> Result<ResourceGame, GameError> {
    let bound = nat_bound(m)?;
    let needed = m.num_states() * (bound as usize + 1);
    if needed > limit {
        return Err(GameError::TooLarge { needed, limit });
    }
    Ok(build(m, bound, vec![Some(0); m.num_states()], &[]))
}

/// The unweighted parity game of a boolean model: one configuration per state.
pub fn build_plain_game(m: &Model) -> Result<ResourceGame, GameError> {
    if m.semiring != SemiringKind::Boolean {
        return Err(GameError::Unsupported(format!(
            "plain games are built for boolean models, not {}",
            m.semiring
        )));
    }
    Ok(build(m, 0, vec![Some(0); m.num_states()], &[]))
}

/// The sub-game induced by the last parity-1 pass of the extent recursion:
/// the levels at which odd states were updated plus `(q, ext(q))` for even
/// states, keeping only moves that stay inside.
pub fn build_subgame(
    m: &Model,
    trace: &UpdateTrace,
    ext: &ExtentMap,
) -> Result<ResourceGame, GameError> {
    if !m.is_buchi() {
        return Err(GameError::Unsupported(
            "sub-games are defined for Büchi models".to_string(),
        ));
    }
    let full = build_resource_game(m, ext)?;
    let mut keep = vec![false; full.len()];
    let mut roots = Vec::new();
    for c in trace.final_updates(1) {
        if let Extended::Fin(n) = c.to {
            roots.extend(full.state_config(c.state, n));
        }
    }
    for q in m.class(2) {
        if let Some(Extended::Fin(n)) = ext.get(q).as_cost() {
            roots.extend(full.state_config(q, n));
        }
    }
    for r in &roots {
        keep[*r] = true;
    }
    // Branches survive only if every child is a kept state configuration.
    let admissible = |v: usize, keep: &[bool]| match &full.configs[v] {
        Config::Branch { .. } => full.succ[v].iter().all(|c| keep[*c]),
        _ => true,
    };
    let mut stack = roots.clone();
    let mut seen = keep.clone();
    let mut order = Vec::new();
    while let Some(v) = stack.pop() {
        order.push(v);
        for &t in &full.succ[v] {
            if !seen[t] && admissible(t, &keep) {
                seen[t] = true;
                stack.push(t);
            }
        }
    }
    let mut g = ResourceGame {
        configs: Vec::new(),
        owner: Vec::new(),
        parity: Vec::new(),
        succ: Vec::new(),
        bound: full.bound,
        index: HashMap::new(),
    };
    let mut remap = HashMap::new();
    order.sort_unstable();
    for &v in &order {
        remap.insert(v, g.configs.len());
        g.index.insert(full.configs[v].clone(), g.configs.len());
        g.configs.push(full.configs[v].clone());
        g.owner.push(full.owner[v]);
        g.parity.push(full.parity[v]);
    }
    for &v in &order {
        let targets = full.succ[v]
            .iter()
            .filter_map(|t| remap.get(t).copied())
            .collect();
        g.succ.push(targets);
    }
    Ok(g)
}

fn preds(g: &ResourceGame) -> Vec<Vec<usize>> {
    let mut p = vec![Vec::new(); g.len()];
    for (v, ts) in g.succ.iter().enumerate() {
        for &t in ts {
            p[t].push(v);
        }
    }
    p
}

/// Attractor of `target` for `player` inside `mask`.
fn attractor(
    g: &ResourceGame,
    pred: &[Vec<usize>],
    mask: &[bool],
    target: &[usize],
    player: Player,
) -> Vec<bool> {
    let mut inside = vec![false; g.len()];
    let mut count: Vec<usize> = vec![0; g.len()];
    for v in 0..g.len() {
        if mask[v] {
            count[v] = g.succ[v].iter().filter(|t| mask[**t]).count();
        }
    }
    let mut stack: Vec<usize> = Vec::new();
    for &t in target {
        if mask[t] && !inside[t] {
            inside[t] = true;
            stack.push(t);
        }
    }
    while let Some(v) = stack.pop() {
        for &p in &pred[v] {
            if !mask[p] || inside[p] {
                continue;
            }
            if g.owner[p] == player {
                inside[p] = true;
                stack.push(p);
            } else {
                count[p] -= 1;
                if count[p] == 0 {
                    inside[p] = true;
                    stack.push(p);
                }
            }
        }
    }
    inside
}

fn zielonka(g: &ResourceGame, pred: &[Vec<usize>], mask: &[bool]) -> [Vec<bool>; 2] {
    let n = g.len();
    let Some(d) = (0..n).filter(|v| mask[*v]).map(|v| g.parity[v]).max() else {
        return [vec![false; n], vec![false; n]];
    };
    let p = Player::of_parity(d);
    let (me, them) = if p == Player::Exists { (0, 1) } else { (1, 0) };
    let top: Vec<usize> = (0..n).filter(|v| mask[*v] && g.parity[*v] == d).collect();
    let a = attractor(g, pred, mask, &top, p);
    let rest: Vec<bool> = (0..n).map(|v| mask[v] && !a[v]).collect();
    let w = zielonka(g, pred, &rest);
    if !w[them].iter().any(|x| *x) {
        let mut out = [vec![false; n], vec![false; n]];
        out[me] = mask.to_vec();
        return out;
    }
    let lost: Vec<usize> = (0..n).filter(|v| w[them][*v]).collect();
    let b = attractor(g, pred, mask, &lost, p.opponent());
    let rest: Vec<bool> = (0..n).map(|v| mask[v] && !b[v]).collect();
    let mut w = zielonka(g, pred, &rest);
    for v in 0..n {
        if b[v] {
            w[them][v] = true;
        }
    }
    w
}

/// Winner of every configuration. Plays stuck at a `∀` configuration are won
/// by `∃`, plays stuck at an `∃` configuration by `∀`.
pub fn zielonka_solve(g: &ResourceGame) -> Vec<Player> {
    let n = g.len();
    let pred = preds(g);
    let all = vec![true; n];
    let dead_forall: Vec<usize> = (0..n)
        .filter(|v| g.succ[*v].is_empty() && g.owner[*v] == Player::Forall)
        .collect();
    let won_e = attractor(g, &pred, &all, &dead_forall, Player::Exists);
    let rest: Vec<bool> = (0..n).map(|v| !won_e[v]).collect();
    let dead_exists: Vec<usize> = (0..n)
        .filter(|v| rest[*v] && g.succ[*v].is_empty() && g.owner[*v] == Player::Exists)
        .collect();
    let won_a = attractor(g, &pred, &rest, &dead_exists, Player::Forall);
    let core: Vec<bool> = (0..n).map(|v| rest[v] && !won_a[v]).collect();
    let w = zielonka(g, &pred, &core);
    (0..n)
        .map(|v| {
            if won_e[v] || w[0][v] {
                Player::Exists
            } else {
                Player::Forall
            }
        })
        .collect()
}

/// Smallest `∃`-winning level per state, `∞` when there is none.
pub fn min_winning_levels(m: &Model, g: &ResourceGame, winner: &[Player]) -> Vec<Cost> {
    let mut out = vec![Extended::Inf; m.num_states()];
    for (v, c) in g.configs.iter().enumerate() {
        if let Some((q, n)) = c.as_state() {
            if winner[v] == Player::Exists && Extended::Fin(n) < out[q.0] {
                out[q.0] = Extended::Fin(n);
            }
        }
    }
    out
}
