//! Brute-force ground truth for extents.
//!
//! The credit oracle solves the resource game over every level `0..=B` and
//! reads off the least winning level per state. The enumeration oracle
//! searches regular runs up to a node budget for the cheapest accepting one.
//! [`random_model`] produces small seeded models to feed both.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::extent::{extent_generic, extent_recursive};
use crate::model::{
    DistId, Distribution, Model, Signature, State, StateId, Symbol, SymbolId, Transition,
};
use crate::resource_game::{
    build_full_game, build_plain_game, min_winning_levels, zielonka_solve, GameError, Player,
};
use crate::runs::{accepting_graph, RegularRun, RunNode};
use crate::semiring::{Cost, Extended, Semiring, SemiringKind, Tropical, Value};

/// Default cap on `|Q| × (B + 1)` for the credit oracle.
pub const CREDIT_LIMIT: usize = 200_000;

/// Least `∃`-winning level per state in the resource game over all levels.
pub fn oracle_extent_credit(m: &Model) -> Result<Vec<Cost>, GameError> {
    let g = build_full_game(m, CREDIT_LIMIT)?;
    let w = zielonka_solve(&g);
    Ok(min_winning_levels(m, &g, &w))
}

/// Winners of the unweighted game of a boolean model, as boolean extents.
pub fn oracle_boolean(m: &Model) -> Result<Vec<Value>, GameError> {
    let g = build_plain_game(m)?;
    let w = zielonka_solve(&g);
    Ok(m.state_ids()
        .map(|q| {
            let v = g
                .state_config(q, 0)
                .expect("every state has a configuration");
            Value::Bool(w[v] == Player::Exists)
        })
        .collect())
}

/// Outcome of [`oracle_extent_enumerate`].
#[derive(Clone, Debug)]
pub struct Enumeration {
    /// Least value of an accepting run found, `∞` if none.
    pub value: Cost,
    /// Whether the search space (runs of at most `max_nodes` nodes) was
    /// covered within the expansion budget.
    pub exhaustive: bool,
    pub witness: Option<RegularRun>,
    pub expansions: usize,
}

struct Draft {
    state: StateId,
    /// Entry index and children, once expanded.
    choice: Option<(usize, Vec<usize>)>,
}

struct Search<'a> {
    m: &'a Model,
    s: Tropical,
    max_nodes: usize,
    budget: usize,
    expansions: usize,
    aborted: bool,
    nodes: Vec<Draft>,
    threshold: u64,
    found: Option<RegularRun>,
}

impl Search<'_> {
    fn entries(&self, q: StateId) -> &[Transition] {
        &self.m.dist(self.m.state(q).options[0]).entries
    }

    /// Root value with every pending node valued at `0`, a lower bound on
    /// every completion.
    fn lower_bound(&self) -> Cost {
        let mut v = vec![Extended::Fin(0); self.nodes.len()];
        loop {
            let mut changed = false;
            for (i, d) in self.nodes.iter().enumerate() {
                let Some((t, kids)) = &d.choice else { continue };
                let mut c = self.entries(d.state)[*t].weight.as_cost().unwrap();
                for k in kids {
                    c = self.s.mul(&c, &v[*k]);
                }
                let r = self.m.state(d.state).offset.as_cost().unwrap();
                let c = self.s.residual(&c, &r);
                if c != v[i] {
                    v[i] = c;
                    changed = true;
                }
            }
            if !changed {
                return v[0];
            }
        }
    }

    fn accepting_so_far(&self) -> bool {
        let parities: Vec<u32> = self
            .nodes
            .iter()
            .map(|d| self.m.state(d.state).parity)
            .collect();
        let children: Vec<&[usize]> = self
            .nodes
            .iter()
            .map(|d| d.choice.as_ref().map(|(_, k)| k.as_slice()).unwrap_or(&[]))
            .collect();
        accepting_graph(&parities, &children)
    }

    fn viable(&self) -> bool {
        matches!(self.lower_bound(), Extended::Fin(v) if v <= self.threshold)
            && self.accepting_so_far()
    }

    fn dfs(&mut self, next: usize) {
        if self.found.is_some() || self.aborted {
            return;
        }
        if next == self.nodes.len() {
            self.found = Some(self.to_run());
            return;
        }
        let q = self.nodes[next].state;
        for t in 0..self.entries(q).len() {
            let succ = self.entries(q)[t].successors.clone();
            let mut kids = Vec::with_capacity(succ.len());
            self.assign(next, t, &succ, &mut kids);
            if self.found.is_some() || self.aborted {
                return;
            }
        }
    }

    /// Chooses a child node for each successor position: an existing node of
    /// the right state, or a fresh one.
    fn assign(&mut self, next: usize, t: usize, succ: &[StateId], kids: &mut Vec<usize>) {
        if kids.len() == succ.len() {
            self.expansions += 1;
            if self.expansions > self.budget {
                self.aborted = true;
                return;
            }
            self.nodes[next].choice = Some((t, kids.clone()));
            if self.viable() {
                self.dfs(next + 1);
            }
            self.nodes[next].choice = None;
            return;
        }
        let want = succ[kids.len()];
        let existing: Vec<usize> = (0..self.nodes.len())
            .filter(|i| self.nodes[*i].state == want)
            .collect();
        for k in existing {
            kids.push(k);
            self.assign(next, t, succ, kids);
            kids.pop();
            if self.found.is_some() || self.aborted {
                return;
            }
        }
        if self.nodes.len() < self.max_nodes {
            self.nodes.push(Draft {
                state: want,
                choice: None,
            });
            kids.push(self.nodes.len() - 1);
            self.assign(next, t, succ, kids);
            kids.pop();
            self.nodes.pop();
        }
    }

    fn to_run(&self) -> RegularRun {
        RegularRun {
            nodes: self
                .nodes
                .iter()
                .map(|d| {
                    let (t, kids) = d.choice.clone().expect("complete run");
                    RunNode {
                        state: d.state,
                        option: 0,
                        symbol: self.entries(d.state)[t].symbol,
                        children: kids,
                    }
                })
                .collect(),
            root: 0,
        }
    }
}

/// Least value of an accepting regular run from `q0` with at most
/// `max_nodes` nodes, by iterative deepening on the value. `budget` caps
/// the number of partial runs examined over the whole search.
pub fn oracle_extent_enumerate(
    m: &Model,
    q0: StateId,
    max_nodes: usize,
    budget: usize,
) -> Result<Enumeration, GameError> {
    let SemiringKind::Tropical { bound } = m.semiring else {
        return Err(GameError::Unsupported(
            "run enumeration needs a tropical-bounded semiring".to_string(),
        ));
    };
    if !m.is_automaton() {
        return Err(GameError::Unsupported(
            "run enumeration is defined for automata".to_string(),
        ));
    }
    let mut search = Search {
        m,
        s: Tropical::new(bound),
        max_nodes,
        budget,
        expansions: 0,
        aborted: false,
        nodes: Vec::new(),
        threshold: 0,
        found: None,
    };
    for v in 0..=bound {
        search.threshold = v;
        search.nodes = vec![Draft {
            state: q0,
            choice: None,
        }];
        search.dfs(0);
        if search.aborted {
            break;
        }
        if let Some(run) = search.found.take() {
            return Ok(Enumeration {
                value: Extended::Fin(v),
                exhaustive: true,
                witness: Some(run),
                expansions: search.expansions,
            });
        }
    }
    Ok(Enumeration {
        value: Extended::Inf,
        exhaustive: !search.aborted,
        witness: None,
        expansions: search.expansions,
    })
}

/// Size and shape parameters for [`random_model`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Profile {
    BuchiAutomaton,
    BuchiGame,
    Parity3Automaton,
    Parity3Game,
    TreeAutomaton,
    Boolean,
}

impl Profile {
    pub const ALL: [Profile; 6] = [
        Profile::BuchiAutomaton,
        Profile::BuchiGame,
        Profile::Parity3Automaton,
        Profile::Parity3Game,
        Profile::TreeAutomaton,
        Profile::Boolean,
    ];

    fn name(self) -> &'static str {
        match self {
            Profile::BuchiAutomaton => "buchi-automaton",
            Profile::BuchiGame => "buchi-game",
            Profile::Parity3Automaton => "parity3-automaton",
            Profile::Parity3Game => "parity3-game",
            Profile::TreeAutomaton => "tree-automaton",
            Profile::Boolean => "boolean",
        }
    }

    fn is_game(self) -> bool {
        matches!(
            self,
            Profile::BuchiGame | Profile::Parity3Game | Profile::Boolean
        )
    }

    fn max_parity(self) -> u32 {
        match self {
            Profile::BuchiAutomaton | Profile::BuchiGame | Profile::TreeAutomaton => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Profile::ALL.iter().map(|p| p.name()).collect();
                format!(
                    "unknown profile `{s}`; expected one of {}",
                    names.join(", ")
                )
            })
    }
}

/// A deterministic pseudo-random model: at most 6 states (4 for trees), at
/// most 3 entries per distribution, weights and offsets at most 4, and a
/// bound between 4 and 32 (12 for trees).
pub fn random_model(seed: u64, profile: Profile) -> Model {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(profile as u64));
    let tree = profile == Profile::TreeAutomaton;
    let boolean = profile == Profile::Boolean;
    let n = rng.gen_range(2..=if tree { 4 } else { 6 });
    let bound = rng.gen_range(4..=if tree { 12 } else { 32 });
    let semiring = if boolean {
        SemiringKind::Boolean
    } else {
        SemiringKind::Tropical { bound }
    };
    let mut symbols = vec![
        Symbol {
            name: "step".to_string(),
            arity: 1,
        },
        Symbol {
            name: "stop".to_string(),
            arity: 0,
        },
    ];
    if tree {
        symbols.push(Symbol {
            name: "split".to_string(),
            arity: 2,
        });
    }
    let value = |rng: &mut ChaCha8Rng| {
        if boolean {
            Value::Bool(true)
        } else {
            Value::nat(rng.gen_range(0..=4))
        }
    };

    let mut parities: Vec<u32> = (0..n)
        .map(|_| rng.gen_range(1..=profile.max_parity()))
        .collect();
    if parities.iter().all(|p| p % 2 == 1) {
        let i = rng.gen_range(0..n);
        parities[i] = 2;
    }

    let mut distributions = Vec::new();
    let mut states = Vec::new();
    for (q, parity) in parities.iter().enumerate() {
        let options = if profile.is_game() {
            rng.gen_range(1..=2)
        } else {
            1
        };
        let mut opts = Vec::new();
        for o in 0..options {
            let mut entries: Vec<Transition> = Vec::new();
            for _ in 0..rng.gen_range(1..=3) {
                let roll: f64 = rng.gen();
                let (symbol, arity) = if roll < 0.06 {
                    (1, 0)
                } else if tree && roll < 0.45 {
                    (2, 2)
                } else {
                    (0, 1)
                };
                let successors = (0..arity).map(|_| StateId(rng.gen_range(0..n))).collect();
                let t = Transition {
                    symbol: SymbolId(symbol),
                    successors,
                    weight: value(&mut rng),
                };
                if !entries
                    .iter()
                    .any(|e| e.symbol == t.symbol && e.successors == t.successors)
                {
                    entries.push(t);
                }
            }
            opts.push(DistId(distributions.len()));
            distributions.push(Distribution {
                name: format!("d{q}_{o}"),
                entries,
            });
        }
        states.push(State {
            name: format!("q{q}"),
            parity: *parity,
            offset: value(&mut rng),
            options: opts,
        });
    }
    // Shuffle option order so the first option is not systematically the
    // first distribution.
    for s in &mut states {
        s.options.shuffle(&mut rng);
    }
    Model::new(semiring, Signature { symbols }, distributions, states)
        .expect("generated models are valid")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReportLine {
    pub seed: u64,
    pub state: String,
    pub expected: Value,
    pub got: Value,
    pub status: &'static str,
}

impl ReportLine {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

impl fmt::Display for ReportLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            self.seed, self.state, self.expected, self.got, self.status
        )
    }
}

/// Compares the nested solver against the credit oracle (or the plain game
/// for boolean models) on one seeded model; tropical models also compare the
/// recursive engine.
pub fn check_seed(seed: u64, profile: Profile) -> Vec<ReportLine> {
    let m = random_model(seed, profile);
    let expected = extent_generic(&m);
    let oracle: Result<Vec<Value>, GameError> = if profile == Profile::Boolean {
        oracle_boolean(&m)
    } else {
        oracle_extent_credit(&m).map(|v| v.into_iter().map(Value::Nat).collect())
    };
    let recursive = extent_recursive(&m).ok().map(|(e, _)| e);
    m.state_ids()
        .map(|q| {
            let want = expected.get(q);
            let (got, mut status) = match &oracle {
                Ok(v) if v[q.0] == want => (v[q.0], "ok"),
                Ok(v) => (v[q.0], "MISMATCH"),
                Err(_) => (want, "SKIPPED"),
            };
            if let Some(f) = &recursive {
                if f.get(q) != want && status == "ok" {
                    status = "ENGINE-MISMATCH";
                }
            }
            ReportLine {
                seed,
                state: m.name(q).to_string(),
                expected: want,
                got,
                status,
            }
        })
        .collect()
}

/// [`check_seed`] over a seed range in parallel, ordered by seed.
pub fn oracle_batch(seeds: std::ops::Range<u64>, profile: Profile) -> Vec<Vec<ReportLine>> {
    seeds
        .into_par_iter()
        .map(|s| check_seed(s, profile))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{A1, A2};
    use crate::model::parse_model;

    #[test]
    fn credit_oracle_on_references() {
        let m = parse_model(A1).unwrap();
        assert_eq!(
            oracle_extent_credit(&m).unwrap(),
            [1, 1, 0, 0].map(Extended::Fin)
        );
        let m = parse_model(A2).unwrap();
        assert_eq!(
            oracle_extent_credit(&m).unwrap(),
            [2, 1, 0].map(Extended::Fin)
        );
        let m =
            parse_model("semiring tropical-bounded 4\nsig s/1\nstate p parity 1\ntrans p s(p) 0\n")
                .unwrap();
        assert_eq!(oracle_extent_credit(&m).unwrap(), vec![Extended::Inf]);
    }

    #[test]
    fn enumeration_on_references() {
        let m = parse_model(A1).unwrap();
        let x = m.state_id("x").unwrap();
        let e = oracle_extent_enumerate(&m, x, 16, 2_000_000).unwrap();
        assert_eq!(e.value, Extended::Fin(1));
        assert!(e.exhaustive);
        let y2 = m.state_id("y2").unwrap();
        assert_eq!(
            oracle_extent_enumerate(&m, y2, 16, 2_000_000)
                .unwrap()
                .value,
            Extended::Fin(0)
        );
        let m = parse_model(
            "semiring tropical-bounded 8\nsig s/1\nstate p parity 2 offset 3\ntrans p s(p) 3\n",
        )
        .unwrap();
        assert_eq!(
            oracle_extent_enumerate(&m, StateId(0), 4, 1000)
                .unwrap()
                .value,
            Extended::Fin(0)
        );
    }

    #[test]
    fn random_models_are_deterministic_and_round_trip() {
        for p in Profile::ALL {
            for seed in 0..20 {
                let m = random_model(seed, p);
                assert_eq!(m, random_model(seed, p));
                assert_eq!(parse_model(&m.render()).unwrap(), m);
                if matches!(
                    p,
                    Profile::BuchiAutomaton | Profile::BuchiGame | Profile::TreeAutomaton
                ) {
                    assert!(m.is_buchi());
                }
                if !p.is_game() {
                    assert!(m.is_automaton());
                }
            }
        }
        assert!("nope".parse::<Profile>().is_err());
    }

    #[test]
    fn small_batch_agrees() {
        for p in Profile::ALL {
            for lines in oracle_batch(0..10, p) {
                for l in lines {
                    assert!(l.ok(), "{p}: {l}");
                }
            }
        }
    }
}
