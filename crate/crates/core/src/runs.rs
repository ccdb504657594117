//! Regular runs: infinite run trees given as finite graphs.
//!
//! Each node names a model state, the option it was played under, a symbol
//! and one child node per argument of the symbol. Unfolding the graph from
//! the root gives the run tree. Values are greatest fixpoints over the node
//! set; acceptance asks that no cycle has an odd maximal parity.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use num_traits::Zero;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use thiserror::Error;

use crate::extent::ExtentMap;
use crate::model::{Model, StateId, SymbolId, Transition};
use crate::semiring::{
    format_rational, parse_rational, BooleanSemiring, Extended, Rational, Semiring, SemiringKind,
    Tropical, TropicalRational, Value,
};
use crate::strategy::{Adversary, Strategy, StrategyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RunError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid run: {0}")]
    Invalid(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("unfolding exceeded {0} nodes")]
    TooLarge(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunNode {
    pub state: StateId,
    /// Position of the option this node was played under.
    pub option: usize,
    pub symbol: SymbolId,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularRun {
    pub nodes: Vec<RunNode>,
    pub root: usize,
}

/// Resource levels per node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Annotation {
    pub levels: Vec<Rational>,
}

impl RegularRun {
    /// The transition a node takes, when it belongs to the model.
    pub fn transition<'a>(&self, m: &'a Model, node: usize) -> Option<&'a Transition> {
        let n = &self.nodes[node];
        let succ: Vec<StateId> = self.nodes_of(&n.children);
        m.state(n.state)
            .options
            .get(n.option)
            .and_then(|d| m.dist(*d).find(n.symbol, &succ))
    }

    fn nodes_of(&self, ids: &[usize]) -> Vec<StateId> {
        ids.iter().map(|c| self.nodes[*c].state).collect()
    }

    /// Checks arities, child references and reachability from the root.
    pub fn validate(&self, m: &Model) -> Result<(), RunError> {
        if self.root >= self.nodes.len() {
            return Err(RunError::Invalid("root node does not exist".to_string()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.state.0 >= m.num_states() {
                return Err(RunError::Invalid(format!("node {i} has an unknown state")));
            }
            let sym = m
                .signature
                .symbols
                .get(n.symbol.0)
                .ok_or_else(|| RunError::Invalid(format!("node {i} has an unknown symbol")))?;
            if sym.arity != n.children.len() {
                return Err(RunError::Invalid(format!(
                    "node {i}: `{}` takes {} children, got {}",
                    sym.name,
                    sym.arity,
                    n.children.len()
                )));
            }
            if n.children.iter().any(|c| *c >= self.nodes.len()) {
                return Err(RunError::Invalid(format!("node {i} has a missing child")));
            }
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![self.root];
        seen[self.root] = true;
        while let Some(v) = stack.pop() {
            for &c in &self.nodes[v].children {
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(RunError::Invalid(format!(
                "node {i} is unreachable from the root"
            )));
        }
        Ok(())
    }

    /// Nodes whose transition is not in the support of their option.
    pub fn non_run_nodes(&self, m: &Model) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|i| self.transition(m, *i).is_none())
            .collect()
    }

    /// The run file form, node ids `0..len`.
    pub fn render(&self, m: &Model, annotation: Option<&Annotation>) -> String {
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let kids: Vec<String> = n.children.iter().map(|c| c.to_string()).collect();
            write!(
                out,
                "node {i} {} {}({})",
                m.name(n.state),
                m.signature.get(n.symbol).name,
                kids.join(",")
            )
            .unwrap();
            if !m.is_automaton() {
                let d = m.dist(m.state(n.state).options[n.option]);
                write!(out, " via {}", d.name).unwrap();
            }
            out.push('\n');
        }
        writeln!(out, "root {}", self.root).unwrap();
        if let Some(a) = annotation {
            for (i, l) in a.levels.iter().enumerate() {
                writeln!(out, "level {i} {}", format_rational(l)).unwrap();
            }
        }
        out
    }
}

/// Reads a run file; `via <dist>` picks the option in games and defaults to
/// the first option.
pub fn parse_run(m: &Model, text: &str) -> Result<(RegularRun, Option<Annotation>), RunError> {
    struct Raw {
        line: usize,
        id: String,
        state: StateId,
        option: usize,
        symbol: SymbolId,
        children: Vec<String>,
    }
    let mut raw: Vec<Raw> = Vec::new();
    let mut root: Option<(usize, String)> = None;
    let mut levels: Vec<(usize, String, Rational)> = Vec::new();
    for (idx, text) in text.lines().enumerate() {
        let line = idx + 1;
        let body = text.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| RunError::Syntax { line, message };
        let words: Vec<&str> = body.split_whitespace().collect();
        match words[0] {
            "node" => {
                if words.len() < 4 {
                    return Err(err("expected `node <id> <state> <symbol>(…)`".to_string()));
                }
                let state = m
                    .state_id(words[2])
                    .ok_or_else(|| err(format!("unknown state `{}`", words[2])))?;
                let mut rest = words[3..].join(" ");
                let mut option = 0;
                if let Some(pos) = rest.find(" via ") {
                    let dname = rest[pos + 5..].trim().to_string();
                    rest.truncate(pos);
                    option = m
                        .state(state)
                        .options
                        .iter()
                        .position(|d| m.dist(*d).name == dname)
                        .ok_or_else(|| {
                            err(format!("`{dname}` is not an option of `{}`", words[2]))
                        })?;
                }
                let open = rest
                    .find('(')
                    .ok_or_else(|| err(format!("missing `(` in `{rest}`")))?;
                let inner = rest[open + 1..]
                    .trim_end()
                    .strip_suffix(')')
                    .ok_or_else(|| err(format!("missing `)` in `{rest}`")))?;
                let symbol = m
                    .signature
                    .lookup(rest[..open].trim())
                    .ok_or_else(|| err(format!("unknown symbol in `{rest}`")))?;
                let children = inner
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(str::to_string)
                    .collect();
                raw.push(Raw {
                    line,
                    id: words[1].to_string(),
                    state,
                    option,
                    symbol,
                    children,
                });
            }
            "root" if words.len() == 2 => {
                if root.replace((line, words[1].to_string())).is_some() {
                    return Err(err("second `root` line".to_string()));
                }
            }
            "level" if words.len() == 3 => {
                let l = parse_rational(words[2])
                    .filter(|r| *r >= Rational::zero())
                    .ok_or_else(|| err(format!("bad level `{}`", words[2])))?;
                levels.push((line, words[1].to_string(), l));
            }
            other => return Err(err(format!("unexpected `{other}` line"))),
        }
    }
    let mut index = HashMap::new();
    for (i, r) in raw.iter().enumerate() {
        if index.insert(r.id.clone(), i).is_some() {
            return Err(RunError::Syntax {
                line: r.line,
                message: format!("node `{}` defined twice", r.id),
            });
        }
    }
    let lookup = |line: usize, id: &str| {
        index.get(id).copied().ok_or_else(|| RunError::Syntax {
            line,
            message: format!("undefined node `{id}`"),
        })
    };
    let mut nodes = Vec::new();
    for r in &raw {
        let children = r
            .children
            .iter()
            .map(|c| lookup(r.line, c))
            .collect::<Result<Vec<_>, _>>()?;
        nodes.push(RunNode {
            state: r.state,
            option: r.option,
            symbol: r.symbol,
            children,
        });
    }
    let (line, root) = root.ok_or_else(|| RunError::Invalid("missing `root` line".to_string()))?;
    let run = RegularRun {
        nodes,
        root: lookup(line, &root)?,
    };
    run.validate(m)?;
    let annotation = if levels.is_empty() {
        None
    } else {
        let mut out: Vec<Option<Rational>> = vec![None; run.nodes.len()];
        for (line, id, l) in levels {
            out[lookup(line, &id)?] = Some(l);
        }
        let levels = out
            .into_iter()
            .enumerate()
            .map(|(i, l)| {
                l.ok_or_else(|| RunError::Invalid(format!("node {} has no level", raw[i].id)))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Some(Annotation { levels })
    };
    Ok((run, annotation))
}

fn node_values<S: Semiring>(s: &S, m: &Model, z: &RegularRun) -> Vec<S::Elem> {
    let weights: Vec<S::Elem> = (0..z.nodes.len())
        .map(|i| match z.transition(m, i) {
            Some(t) => s.lift(&t.weight).expect("model weights lift"),
            None => s.zero(),
        })
        .collect();
    let offsets: Vec<S::Elem> = z
        .nodes
        .iter()
        .map(|n| {
            s.lift(&m.state(n.state).offset)
                .expect("model offsets lift")
        })
        .collect();
    let mut v = vec![s.one(); z.nodes.len()];
    loop {
        let next: Vec<S::Elem> = z
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let mut p = weights[i].clone();
                for c in &n.children {
                    p = s.mul(&p, &v[*c]);
                }
                s.residual(&p, &offsets[i])
            })
            .collect();
        if next == v {
            return v;
        }
        v = next;
    }
}

/// The value of the root: greatest fixpoint of
/// `v(z) = (weight • v(z₁) • … • v(zₙ)) ⊘ r(q)`, iterated from the semiring
/// one. Nodes outside the model carry the semiring zero as their weight; see
/// [`RegularRun::non_run_nodes`].
pub fn run_value(m: &Model, z: &RegularRun) -> Value {
    fn go<S: Semiring>(s: &S, m: &Model, z: &RegularRun) -> Value {
        s.lower(&node_values(s, m, z)[z.root])
    }
    match m.semiring {
        SemiringKind::Boolean => go(&BooleanSemiring, m, z),
        SemiringKind::Tropical { bound } => go(&Tropical::new(bound), m, z),
        SemiringKind::TropicalRational { bound } => go(&TropicalRational::new(bound), m, z),
    }
}

/// No cycle of the node graph has an odd maximal parity.
pub fn is_accepting(m: &Model, z: &RegularRun) -> bool {
    let parities: Vec<u32> = z.nodes.iter().map(|n| m.state(n.state).parity).collect();
    let children: Vec<&[usize]> = z.nodes.iter().map(|n| n.children.as_slice()).collect();
    accepting_graph(&parities, &children)
}

/// For every odd `p`, no node of parity `p` lies on a cycle through nodes of
/// parity at most `p`.
pub(crate) fn accepting_graph(parities: &[u32], children: &[&[usize]]) -> bool {
    let mut odd: Vec<u32> = parities.iter().copied().filter(|p| p % 2 == 1).collect();
    odd.sort_unstable();
    odd.dedup();
    for p in odd {
        let mut g = DiGraph::<usize, ()>::new();
        let mut idx = HashMap::new();
        for i in (0..parities.len()).filter(|i| parities[*i] <= p) {
            idx.insert(i, g.add_node(i));
        }
        for (i, kids) in children.iter().enumerate() {
            let Some(a) = idx.get(&i) else { continue };
            for c in kids.iter() {
                if let Some(b) = idx.get(c) {
                    g.add_edge(*a, *b, ());
                }
            }
        }
        for scc in tarjan_scc(&g) {
            let cyclic = scc.len() > 1 || g.contains_edge(scc[0], scc[0]);
            if cyclic && scc.iter().any(|v| parities[g[*v]] == p) {
                return false;
            }
        }
    }
    true
}

/// Every node holds at least the extent of its state and at most the bound,
/// and can pay for its transition: `level + r(q) ≥ w + Σ child levels`, with
/// the right-hand side within the bound.
pub fn check_annotation(m: &Model, z: &RegularRun, a: &Annotation, ext: &ExtentMap) -> bool {
    let Some(bound) = m.semiring.nat_bound() else {
        return false;
    };
    let bound = Rational::from_integer(bound as i64);
    if a.levels.len() != z.nodes.len() {
        return false;
    }
    for (i, n) in z.nodes.iter().enumerate() {
        let level = a.levels[i];
        match ext.cost(n.state) {
            Extended::Fin(e) if level >= Rational::from_integer(e as i64) => {}
            _ => return false,
        }
        if level > bound {
            return false;
        }
        let Some(t) = z.transition(m, i) else {
            return false;
        };
        let Some(Extended::Fin(w)) = t.weight.as_cost() else {
            return false;
        };
        let need = Rational::from_integer(w as i64)
            + n.children.iter().map(|c| a.levels[*c]).sum::<Rational>();
        if need > bound {
            return false;
        }
        match m.state(n.state).offset.as_cost() {
            Some(Extended::Fin(r)) if level + Rational::from_integer(r as i64) >= need => {}
            Some(Extended::Inf) => {}
            _ => return false,
        }
    }
    true
}

/// Plays `strat` from `(q0, mem0)`, asking `adversary` for options, and ties
/// the resulting run tree into a graph by reusing nodes for repeated
/// `(state, memory)` configurations.
pub fn unfold(
    m: &Model,
    strat: &dyn Strategy,
    q0: StateId,
    mem0: Rational,
    adversary: &mut dyn Adversary,
    max_nodes: usize,
) -> Result<(RegularRun, Annotation), RunError> {
    let mut nodes: Vec<Option<RunNode>> = Vec::new();
    let mut keys: Vec<(StateId, Rational)> = Vec::new();
    let mut index: HashMap<(StateId, Rational), usize> = HashMap::new();
    let mut queue = VecDeque::new();
    index.insert((q0, mem0), 0);
    keys.push((q0, mem0));
    nodes.push(None);
    queue.push_back(0);
    while let Some(v) = queue.pop_front() {
        let (q, mem) = keys[v];
        let option = if m.state(q).options.len() == 1 {
            0
        } else {
            adversary.choose(m, q, mem)
        };
        let d = strat.decide(m, q, mem, option)?;
        let dist = m.dist(m.state(q).options[option]);
        let mut children = Vec::new();
        for key in d.successors {
            let id = match index.get(&key) {
                Some(id) => *id,
                None => {
                    if nodes.len() >= max_nodes {
                        return Err(RunError::TooLarge(max_nodes));
                    }
                    let id = nodes.len();
                    index.insert(key, id);
                    keys.push(key);
                    nodes.push(None);
                    queue.push_back(id);
                    id
                }
            };
            children.push(id);
        }
        nodes[v] = Some(RunNode {
            state: q,
            option,
            symbol: dist.entries[d.transition].symbol,
            children,
        });
    }
    let run = RegularRun {
        nodes: nodes
            .into_iter()
            .map(|n| n.expect("every node expanded"))
            .collect(),
        root: 0,
    };
    let annotation = Annotation {
        levels: keys.iter().map(|(_, l)| *l).collect(),
    };
    Ok((run, annotation))
}

/// Simple cycle runs: `lasso(m, &["x", "y"], 0)` goes `x → y → x → …`,
/// each node taking the entry of its first option that leads to the next.
pub fn lasso(m: &Model, states: &[&str], back_to: usize) -> Option<RegularRun> {
    let ids: Vec<StateId> = states
        .iter()
        .map(|s| m.state_id(s))
        .collect::<Option<_>>()?;
    let mut nodes = Vec::new();
    for (i, q) in ids.iter().enumerate() {
        let next = if i + 1 < ids.len() { i + 1 } else { back_to };
        let target = ids[next];
        let (option, t) = m.state(*q).options.iter().enumerate().find_map(|(o, d)| {
            m.dist(*d)
                .entries
                .iter()
                .find(|t| t.successors == [target])
                .map(|t| (o, t))
        })?;
        nodes.push(RunNode {
            state: *q,
            option,
            symbol: t.symbol,
            children: vec![next],
        });
    }
    Some(RegularRun { nodes, root: 0 })
}
