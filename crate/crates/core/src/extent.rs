//! Extents: the solution of the nested equational system a model induces.
//!
//! The variable of parity `k` is bound by a least fixpoint when `k` is odd and
//! by a greatest fixpoint when `k` is even; parity 1 is innermost. Two
//! engines are provided: [`extent_generic`] solves the system over any of the
//! provided semirings with clean nested restarts, and [`extent_recursive`] runs
//! the classic shared-table recursion over `ℕ_B^∞`, recording every change it
//! makes so that strategies can be read off afterwards.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Model, StateId};
use crate::semiring::{
    BooleanSemiring, Cost, Extended, Semiring, SemiringKind, Tropical, TropicalRational, Value,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExtentError {
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// One value per state, indexed by [`StateId`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtentMap {
    pub values: Vec<Value>,
}

impl ExtentMap {
    pub fn get(&self, q: StateId) -> Value {
        self.values[q.0]
    }

    /// Tropical costs, when the map holds natural tropical values.
    pub fn costs(&self) -> Option<Vec<Cost>> {
        self.values.iter().map(Value::as_cost).collect()
    }

    pub fn cost(&self, q: StateId) -> Cost {
        self.values[q.0]
            .as_cost()
            .expect("extent map over the natural tropical semiring")
    }

    /// `state=value` lines in declaration order.
    pub fn render(&self, m: &Model) -> String {
        let mut out = String::new();
        for q in m.state_ids() {
            writeln!(out, "{}={}", m.name(q), self.get(q)).unwrap();
        }
        out
    }

    fn from_costs(costs: &[Cost]) -> ExtentMap {
        ExtentMap {
            values: costs.iter().map(|c| Value::Nat(*c)).collect(),
        }
    }
}

/// One distribution entry: weight and successor indices.
type Entry<E> = (E, Vec<usize>);

/// A model whose weights and offsets have been lifted into a concrete
/// semiring element type.
struct Lifted<E> {
    offset: Vec<E>,
    /// Per state, per option, the entries `(weight, successors)`.
    options: Vec<Vec<Vec<Entry<E>>>>,
}

impl<E: Clone> Lifted<E> {
    fn new<S: Semiring<Elem = E>>(s: &S, m: &Model) -> Lifted<E> {
        let lift = |v: &Value| s.lift(v).expect("validated model values lift");
        Lifted {
            offset: m.states.iter().map(|st| lift(&st.offset)).collect(),
            options: m
                .state_ids()
                .map(|q| {
                    m.options(q)
                        .map(|d| {
                            d.entries
                                .iter()
                                .map(|t| {
                                    (lift(&t.weight), t.successors.iter().map(|x| x.0).collect())
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

fn step<S: Semiring>(s: &S, l: &Lifted<S::Elem>, q: usize, e: &[S::Elem]) -> S::Elem {
    let mut best: Option<S::Elem> = None;
    for option in &l.options[q] {
        let mut sum = s.zero();
        for (w, succ) in option {
            let mut prod = w.clone();
            for x in succ {
                prod = s.mul(&prod, &e[*x]);
            }
            sum = s.add(&sum, &prod);
        }
        best = Some(match best {
            None => sum,
            Some(b) => s.meet(&b, &sum),
        });
    }
    s.residual(&best.expect("states have options"), &l.offset[q])
}

/// The one-step unfolding of the system at `q`: the `⊑`-infimum over the
/// options of `q` of `Σ weight • current(q₁) • … • current(qₙ)`, residuated
/// by the offset of `q`.
pub fn one_step_value(m: &Model, q: StateId, current: &ExtentMap) -> Value {
    fn go<S: Semiring>(s: &S, m: &Model, q: StateId, current: &ExtentMap) -> Value {
        let l = Lifted::new(s, m);
        let e: Vec<S::Elem> = current
            .values
            .iter()
            .map(|v| {
                s.lift(v)
                    .expect("current values belong to the model semiring")
            })
            .collect();
        s.lower(&step(s, &l, q.0, &e))
    }
    match m.semiring {
        SemiringKind::Boolean => go(&BooleanSemiring, m, q, current),
        SemiringKind::Tropical { bound } => go(&Tropical::new(bound), m, q, current),
        SemiringKind::TropicalRational { bound } => {
            go(&TropicalRational::new(bound), m, q, current)
        }
    }
}

fn classes(m: &Model) -> Vec<Vec<usize>> {
    let top = m.max_parity() as usize;
    let mut out = vec![Vec::new(); top + 1];
    for (i, s) in m.states.iter().enumerate() {
        out[s.parity as usize].push(i);
    }
    out
}

/// Solves the nested system over any semiring.
pub fn solve_generic<S: Semiring>(s: &S, m: &Model) -> Vec<S::Elem> {
    let l = Lifted::new(s, m);
    let classes = classes(m);
    let mut e = vec![s.one(); m.num_states()];
    block(s, &l, &classes, classes.len() - 1, &mut e);
    e
}

fn block<S: Semiring>(
    s: &S,
    l: &Lifted<S::Elem>,
    classes: &[Vec<usize>],
    k: usize,
    e: &mut [S::Elem],
) {
    if k == 0 {
        return;
    }
    let class = &classes[k];
    if class.is_empty() {
        block(s, l, classes, k - 1, e);
        return;
    }
    let init = if k % 2 == 1 { s.zero() } else { s.one() };
    for &q in class {
        e[q] = init.clone();
    }
    loop {
        block(s, l, classes, k - 1, e);
        let next: Vec<S::Elem> = class.iter().map(|&q| step(s, l, q, e)).collect();
        let mut changed = false;
        for (&q, v) in class.iter().zip(next) {
            if e[q] != v {
                e[q] = v;
                changed = true;
            }
        }
        if !changed {
            return;
        }
    }
}

/// Extents by nested Kleene iteration; odd blocks start at the semiring zero,
/// even blocks at the semiring one.
pub fn extent_generic(m: &Model) -> ExtentMap {
    fn go<S: Semiring>(s: &S, m: &Model) -> ExtentMap {
        ExtentMap {
            values: solve_generic(s, m).iter().map(|e| s.lower(e)).collect(),
        }
    }
    match m.semiring {
        SemiringKind::Boolean => go(&BooleanSemiring, m),
        SemiringKind::Tropical { bound } => go(&Tropical::new(bound), m),
        SemiringKind::TropicalRational { bound } => go(&TropicalRational::new(bound), m),
    }
}

/// The entry of one option that attains the option's value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// Position of the option in the state's option list.
    pub option: usize,
    /// Index of the entry in the option's distribution.
    pub transition: usize,
    /// Successors with the values they had in the round's snapshot.
    pub successors: Vec<(StateId, Cost)>,
    /// The option's value before the offset is applied.
    pub value: Cost,
}

/// One assignment that changed a state's value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Change {
    pub class: u32,
    /// Index of the enclosing `Extent(class)` call among all calls of that class.
    pub call: usize,
    /// 1-based round within that call.
    pub round: usize,
    pub state: StateId,
    pub from: Cost,
    pub to: Cost,
    /// One witness per option, in option order.
    pub witnesses: Vec<Witness>,
    /// Index into `witnesses` of the option that determined the new value.
    pub worst: usize,
}

impl Change {
    pub fn witness(&self) -> &Witness {
        &self.witnesses[self.worst]
    }

    /// A strict decrease, i.e. a strict `⊑`-increase.
    pub fn is_update(&self) -> bool {
        self.to < self.from
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CallStats {
    pub class: u32,
    pub call: usize,
    pub rounds: usize,
}

/// Everything [`extent_recursive`] did, in chronological order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UpdateTrace {
    pub changes: Vec<Change>,
    /// Calls in the order they finished.
    pub calls: Vec<CallStats>,
}

impl UpdateTrace {
    /// Strict decreases only.
    pub fn updates(&self) -> impl Iterator<Item = &Change> + '_ {
        self.changes.iter().filter(|c| c.is_update())
    }

    /// Index of the last call made for `class`.
    pub fn last_call(&self, class: u32) -> Option<usize> {
        self.calls
            .iter()
            .filter(|c| c.class == class)
            .map(|c| c.call)
            .max()
    }

    /// Updates recorded in the last call of `class`.
    pub fn final_updates(&self, class: u32) -> Vec<&Change> {
        match self.last_call(class) {
            None => Vec::new(),
            Some(call) => self
                .updates()
                .filter(|c| c.class == class && c.call == call)
                .collect(),
        }
    }

    /// Largest round count over all calls of `class`.
    pub fn max_rounds(&self, class: u32) -> usize {
        self.calls
            .iter()
            .filter(|c| c.class == class)
            .map(|c| c.rounds)
            .max()
            .unwrap_or(0)
    }
}

/// Value of one option under `snap`, with the first minimizing entry.
pub(crate) fn option_value(
    s: &Tropical,
    m: &Model,
    q: StateId,
    option: usize,
    snap: &[Cost],
) -> Witness {
    let dist = m.dist(m.state(q).options[option]);
    let mut best: Option<(usize, Cost)> = None;
    for (i, t) in dist.entries.iter().enumerate() {
        let mut v = t.weight.as_cost().expect("tropical weight");
        for x in &t.successors {
            v = s.mul(&v, &snap[x.0]);
        }
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    let (transition, value) = best.expect("distributions are nonempty");
    Witness {
        option,
        transition,
        successors: dist.entries[transition]
            .successors
            .iter()
            .map(|x| (*x, snap[x.0]))
            .collect(),
        value,
    }
}

/// The worst option for `∃` at `q` (largest option value, first on ties),
/// together with the resulting value after the offset.
pub(crate) fn evaluate(
    s: &Tropical,
    m: &Model,
    q: StateId,
    snap: &[Cost],
) -> (Cost, Vec<Witness>, usize) {
    let witnesses: Vec<Witness> = (0..m.state(q).options.len())
        .map(|o| option_value(s, m, q, o, snap))
        .collect();
    let mut worst = 0;
    for (i, w) in witnesses.iter().enumerate() {
        if w.value > witnesses[worst].value {
            worst = i;
        }
    }
    let offset = m.state(q).offset.as_cost().expect("tropical offset");
    (
        s.residual(&witnesses[worst].value, &offset),
        witnesses,
        worst,
    )
}

pub(crate) fn tropical(m: &Model) -> Result<Tropical, ExtentError> {
    match m.semiring {
        SemiringKind::Tropical { bound } => Ok(Tropical::new(bound)),
        other => Err(ExtentError::Unsupported(format!(
            "this algorithm runs over tropical-bounded semirings, not {other}"
        ))),
    }
}

struct Recursion<'a> {
    s: Tropical,
    m: &'a Model,
    classes: Vec<Vec<StateId>>,
    e: Vec<Cost>,
    trace: UpdateTrace,
    next_call: Vec<usize>,
}

impl Recursion<'_> {
    fn extent(&mut self, n: usize) {
        if n == 0 {
            return;
        }
        if self.classes[n].is_empty() {
            self.extent(n - 1);
            return;
        }
        let init = if n.is_multiple_of(2) {
            Extended::Fin(0)
        } else {
            Extended::Inf
        };
        for q in &self.classes[n] {
            self.e[q.0] = init;
        }
        let call = self.next_call[n];
        self.next_call[n] += 1;
        let mut round = 0;
        loop {
            round += 1;
            let old = self.e.clone();
            self.extent(n - 1);
            // The recursive call leaves class n untouched, so this snapshot
            // agrees with `old` on class n and holds the fresh lower values.
            let snap = self.e.clone();
            for i in 0..self.classes[n].len() {
                let q = self.classes[n][i];
                let (to, witnesses, worst) = evaluate(&self.s, self.m, q, &snap);
                let from = self.e[q.0];
                if to != from {
                    self.trace.changes.push(Change {
                        class: n as u32,
                        call,
                        round,
                        state: q,
                        from,
                        to,
                        witnesses,
                        worst,
                    });
                    self.e[q.0] = to;
                }
            }
            // Lower classes are re-solved from class n on every round, so
            // once class n is stable the next round would reproduce them.
            if self.classes[n].iter().all(|q| self.e[q.0] == old[q.0]) {
                break;
            }
        }
        self.trace.calls.push(CallStats {
            class: n as u32,
            call,
            rounds: round,
        });
    }
}

/// Runs the recursive `Extent(max parity)` procedure on a shared table.
pub fn extent_recursive(m: &Model) -> Result<(ExtentMap, UpdateTrace), ExtentError> {
    let s = tropical(m)?;
    let classes: Vec<Vec<StateId>> = classes(m)
        .into_iter()
        .map(|c| c.into_iter().map(StateId).collect())
        .collect();
    let top = classes.len() - 1;
    let mut e = vec![Extended::Fin(0); m.num_states()];
    for (k, class) in classes.iter().enumerate() {
        for q in class {
            e[q.0] = if k % 2 == 0 {
                Extended::Fin(0)
            } else {
                Extended::Inf
            };
        }
    }
    let mut run = Recursion {
        s,
        m,
        classes,
        e,
        trace: UpdateTrace::default(),
        next_call: vec![0; top + 1],
    };
    run.extent(top);
    Ok((ExtentMap::from_costs(&run.e), run.trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{A1, A2};
    use crate::model::parse_model;

    fn nat(v: &[u64]) -> ExtentMap {
        ExtentMap {
            values: v.iter().map(|n| Value::nat(*n)).collect(),
        }
    }

    #[test]
    fn one_step_examples() {
        let a1 = parse_model(A1).unwrap();
        let y = a1.state_id("y").unwrap();
        assert_eq!(one_step_value(&a1, y, &nat(&[1, 1, 0, 0])), Value::nat(1));
        let y1 = a1.state_id("y1").unwrap();
        assert_eq!(one_step_value(&a1, y1, &nat(&[0, 6, 0, 0])), Value::nat(4));
        let a2 = parse_model(A2).unwrap();
        let x = a2.state_id("x").unwrap();
        assert_eq!(one_step_value(&a2, x, &nat(&[2, 1, 0])), Value::nat(2));
    }

    #[test]
    fn reference_extents() {
        let a1 = parse_model(A1).unwrap();
        assert_eq!(extent_generic(&a1), nat(&[1, 1, 0, 0]));
        let (e, trace) = extent_recursive(&a1).unwrap();
        assert_eq!(e, nat(&[1, 1, 0, 0]));
        let y = a1.state_id("y").unwrap();
        let ys: Vec<Cost> = trace
            .final_updates(1)
            .iter()
            .filter(|c| c.state == y)
            .map(|c| c.to)
            .collect();
        assert_eq!(ys, [6, 4, 2, 1].map(Extended::Fin));

        let a2 = parse_model(A2).unwrap();
        assert_eq!(extent_generic(&a2), nat(&[2, 1, 0]));
        assert_eq!(extent_recursive(&a2).unwrap().0, nat(&[2, 1, 0]));
    }

    #[test]
    fn boolean_self_loop_is_least_fixpoint() {
        let m =
            parse_model("semiring boolean\nsig s/1\nstate p parity 1\ntrans p s(p) 1\n").unwrap();
        assert_eq!(extent_generic(&m).values, vec![Value::Bool(false)]);
        assert!(extent_recursive(&m).is_err());
    }

    #[test]
    fn changes_are_monotone_per_block() {
        let (_, trace) = extent_recursive(&parse_model(A1).unwrap()).unwrap();
        for c in &trace.changes {
            if c.class % 2 == 1 {
                assert!(c.to < c.from);
            } else {
                assert!(c.to > c.from);
            }
        }
    }

    #[test]
    fn rational_engine_agrees_on_integral_weights() {
        let text = A1.replace("tropical-bounded 64", "tropical-rational-bounded 64");
        let m = parse_model(&text).unwrap();
        let e = extent_generic(&m);
        assert_eq!(e.values, [1, 1, 0, 0].map(|n| Value::rat(n, 1)));
    }
}
