//! Weighted parity automata and games with offsetting, and their text format.
//!
//! A model has a semiring, a signature of branching symbols, a list of named
//! distributions (finitely supported weightings of `symbol(successors…)`
//! terms) and a list of states. Each state carries a parity, an offset and a
//! nonempty list of options, each option naming a distribution. An automaton
//! is a model where every state has exactly one option.
//!
//! ```text
//! semiring tropical-bounded 64
//! sig step/1
//! dist f { 4 step(x); 1 step(y1); 2 step(y2) }
//! dist g { 0 step(x); 2 step(y1) }
//! state x  parity 2 offset 0 options f g
//! state y1 parity 1 offset 1 options f g
//! state y2 parity 1 offset 4 options f
//! ```
//!
//! Automata may instead give `trans <source> <symbol>(<succ>,…) <weight>`
//! lines after the states; all lines sharing a source form one anonymous
//! distribution named `_<source>`.

use std::collections::{HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::semiring::{SemiringError, SemiringKind, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DistId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymbolId(pub usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub symbols: Vec<Symbol>,
}

impl Signature {
    pub fn lookup(&self, name: &str) -> Option<SymbolId> {
        self.symbols
            .iter()
            .position(|s| s.name == name)
            .map(SymbolId)
    }

    pub fn get(&self, id: SymbolId) -> &Symbol {
        &self.symbols[id.0]
    }
}

/// One support entry of a distribution: `weight · symbol(successors…)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub symbol: SymbolId,
    pub successors: Vec<StateId>,
    pub weight: Value,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Distribution {
    pub name: String,
    pub entries: Vec<Transition>,
}

impl Distribution {
    /// Finds the entry for `symbol(successors…)`, if it is in the support.
    pub fn find(&self, symbol: SymbolId, successors: &[StateId]) -> Option<&Transition> {
        self.entries
            .iter()
            .find(|t| t.symbol == symbol && t.successors == successors)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub name: String,
    pub parity: u32,
    pub offset: Value,
    pub options: Vec<DistId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    pub semiring: SemiringKind,
    pub signature: Signature,
    pub distributions: Vec<Distribution>,
    pub states: Vec<State>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{entity}: {message}")]
    Invalid { entity: String, message: String },
}

impl ModelError {
    fn invalid(entity: impl Into<String>, message: impl Into<String>) -> Self {
        ModelError::Invalid {
            entity: entity.into(),
            message: message.into(),
        }
    }
}

impl Model {
    /// Builds a model and checks every structural invariant.
    pub fn new(
        semiring: SemiringKind,
        signature: Signature,
        distributions: Vec<Distribution>,
        states: Vec<State>,
    ) -> Result<Model, ModelError> {
        let m = Model {
            semiring,
            signature,
            distributions,
            states,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut seen = HashSet::new();
        for s in &self.signature.symbols {
            if !seen.insert(s.name.as_str()) {
                return Err(ModelError::invalid(
                    format!("symbol `{}`", s.name),
                    "declared twice",
                ));
            }
        }
        let mut seen = HashSet::new();
        for d in &self.distributions {
            let entity = format!("distribution `{}`", d.name);
            if !seen.insert(d.name.as_str()) {
                return Err(ModelError::invalid(entity, "declared twice"));
            }
            if d.entries.is_empty() {
                return Err(ModelError::invalid(entity, "has no entries"));
            }
            let mut keys = HashSet::new();
            for t in &d.entries {
                let Some(sym) = self.signature.symbols.get(t.symbol.0) else {
                    return Err(ModelError::invalid(entity, "uses an unknown symbol"));
                };
                if sym.arity != t.successors.len() {
                    return Err(ModelError::invalid(
                        entity,
                        format!(
                            "symbol `{}` has arity {} but is applied to {} successors",
                            sym.name,
                            sym.arity,
                            t.successors.len()
                        ),
                    ));
                }
                if let Some(bad) = t.successors.iter().find(|q| q.0 >= self.states.len()) {
                    return Err(ModelError::invalid(
                        entity,
                        format!("successor #{} does not exist", bad.0),
                    ));
                }
                self.semiring
                    .check(&t.weight)
                    .map_err(|e| ModelError::invalid(entity.clone(), e.to_string()))?;
                if t.weight == self.semiring.zero() {
                    return Err(ModelError::invalid(
                        entity,
                        "entries must not carry the semiring zero as weight",
                    ));
                }
                if !keys.insert((t.symbol, t.successors.clone())) {
                    return Err(ModelError::invalid(
                        entity,
                        format!("duplicate entry for `{}`", self.term(t)),
                    ));
                }
            }
        }
        let mut seen = HashSet::new();
        for s in &self.states {
            let entity = format!("state `{}`", s.name);
            if !seen.insert(s.name.as_str()) {
                return Err(ModelError::invalid(entity, "declared twice"));
            }
            if s.parity == 0 {
                return Err(ModelError::invalid(entity, "parities start at 1"));
            }
            self.semiring
                .check(&s.offset)
                .map_err(|e| ModelError::invalid(entity.clone(), e.to_string()))?;
            if s.options.is_empty() {
                return Err(ModelError::invalid(entity, "has no options"));
            }
            if s.options.iter().any(|d| d.0 >= self.distributions.len()) {
                return Err(ModelError::invalid(
                    entity,
                    "refers to an unknown distribution",
                ));
            }
        }
        if self.states.is_empty() {
            return Err(ModelError::invalid("model", "has no states"));
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, q: StateId) -> &State {
        &self.states[q.0]
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len()).map(StateId)
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.name == name).map(StateId)
    }

    pub fn dist(&self, d: DistId) -> &Distribution {
        &self.distributions[d.0]
    }

    pub fn dist_id(&self, name: &str) -> Option<DistId> {
        self.distributions
            .iter()
            .position(|d| d.name == name)
            .map(DistId)
    }

    pub fn name(&self, q: StateId) -> &str {
        &self.states[q.0].name
    }

    /// The distributions offered at `q`, in declaration order.
    pub fn options(&self, q: StateId) -> impl Iterator<Item = &Distribution> + '_ {
        self.states[q.0]
            .options
            .iter()
            .map(|d| &self.distributions[d.0])
    }

    pub fn max_parity(&self) -> u32 {
        self.states.iter().map(|s| s.parity).max().unwrap_or(1)
    }

    pub fn min_parity(&self) -> u32 {
        self.states.iter().map(|s| s.parity).min().unwrap_or(1)
    }

    /// States of parity `k`, in declaration order.
    pub fn class(&self, k: u32) -> Vec<StateId> {
        self.state_ids()
            .filter(|q| self.states[q.0].parity == k)
            .collect()
    }

    /// Every state has exactly one option.
    pub fn is_automaton(&self) -> bool {
        self.states.iter().all(|s| s.options.len() == 1)
    }

    /// Parities lie in `{1, 2}` and some state is accepting.
    pub fn is_buchi(&self) -> bool {
        self.states.iter().all(|s| s.parity == 1 || s.parity == 2)
            && self.states.iter().any(|s| s.parity == 2)
    }

    /// Every symbol used by some transition has arity at most one.
    pub fn is_word(&self) -> bool {
        self.distributions
            .iter()
            .flat_map(|d| &d.entries)
            .all(|t| t.successors.len() <= 1)
    }

    pub fn transition_count(&self) -> usize {
        self.distributions.iter().map(|d| d.entries.len()).sum()
    }

    /// Non-fatal observations about the model.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.states.iter().all(|s| s.parity % 2 == 1) {
            out.push("no state has even parity: every extent is the semiring zero".to_string());
        }
        out
    }

    /// `symbol(succ,…)` with state names.
    pub fn term(&self, t: &Transition) -> String {
        let succ: Vec<&str> = t.successors.iter().map(|q| self.name(*q)).collect();
        format!("{}({})", self.signature.get(t.symbol).name, succ.join(","))
    }

    /// Canonical text form; `parse_model(render())` reproduces the model.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "semiring {}", self.semiring).unwrap();
        if !self.signature.symbols.is_empty() {
            let sig: Vec<String> = self
                .signature
                .symbols
                .iter()
                .map(|s| format!("{}/{}", s.name, s.arity))
                .collect();
            writeln!(out, "sig {}", sig.join(" ")).unwrap();
        }
        for d in &self.distributions {
            let entries: Vec<String> = d
                .entries
                .iter()
                .map(|t| format!("{} {}", t.weight, self.term(t)))
                .collect();
            writeln!(out, "dist {} {{ {} }}", d.name, entries.join("; ")).unwrap();
        }
        for s in &self.states {
            let opts: Vec<&str> = s
                .options
                .iter()
                .map(|d| self.distributions[d.0].name.as_str())
                .collect();
            writeln!(
                out,
                "state {} parity {} offset {} options {}",
                s.name,
                s.parity,
                s.offset,
                opts.join(" ")
            )
            .unwrap();
        }
        out
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for Model {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_model(s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
enum Section {
    Semiring,
    Sig,
    Dist,
    State,
    Trans,
}

struct RawTerm {
    symbol: String,
    successors: Vec<String>,
}

struct RawEntry {
    line: usize,
    weight: Value,
    term: RawTerm,
}

struct RawDist {
    line: usize,
    name: String,
    entries: Vec<RawEntry>,
}

struct RawState {
    line: usize,
    name: String,
    parity: u32,
    offset: Option<Value>,
    options: Vec<String>,
}

fn syntax(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Syntax {
        line,
        message: message.into(),
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '\'' | '.' | '-'))
}

fn parse_term(line: usize, text: &str) -> Result<RawTerm, ModelError> {
    let text = text.trim();
    let (symbol, successors) = match text.find('(') {
        None => (text, Vec::new()),
        Some(open) => {
            let inner = text[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| syntax(line, format!("unbalanced parentheses in `{text}`")))?;
            let succ: Vec<String> = if inner.trim().is_empty() {
                Vec::new()
            } else {
                inner.split(',').map(|s| s.trim().to_string()).collect()
            };
            (text[..open].trim(), succ)
        }
    };
    if !is_ident(symbol) {
        return Err(syntax(line, format!("bad symbol name in `{text}`")));
    }
    if let Some(bad) = successors.iter().find(|s| !is_ident(s)) {
        return Err(syntax(line, format!("bad state name `{bad}` in `{text}`")));
    }
    Ok(RawTerm {
        symbol: symbol.to_string(),
        successors,
    })
}

fn parse_value(kind: &SemiringKind, line: usize, text: &str) -> Result<Value, ModelError> {
    kind.parse_value(text)
        .map_err(|e: SemiringError| syntax(line, e.to_string()))
}

/// Parses and validates a model in the line-based text format.
pub fn parse_model(text: &str) -> Result<Model, ModelError> {
    let mut kind: Option<SemiringKind> = None;
    let mut section = Section::Semiring;
    let mut symbols: Vec<Symbol> = Vec::new();
    let mut dists: Vec<RawDist> = Vec::new();
    let mut states: Vec<RawState> = Vec::new();
    let mut trans: Vec<(String, RawEntry)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (keyword, rest) = body
            .split_once(char::is_whitespace)
            .map(|(k, r)| (k, r.trim()))
            .unwrap_or((body, ""));
        let this = match keyword {
            "semiring" => Section::Semiring,
            "sig" => Section::Sig,
            "dist" => Section::Dist,
            "state" => Section::State,
            "trans" => Section::Trans,
            other => return Err(syntax(line, format!("unknown keyword `{other}`"))),
        };
        if this < section || (this == Section::Semiring && kind.is_some()) {
            return Err(syntax(line, format!("`{keyword}` line out of order")));
        }
        if this != Section::Semiring && kind.is_none() {
            return Err(syntax(line, "the first line must declare the semiring"));
        }
        section = this;
        match this {
            Section::Semiring => {
                kind = Some(
                    rest.parse::<SemiringKind>()
                        .map_err(|e| syntax(line, e.to_string()))?,
                );
            }
            Section::Sig => {
                for decl in rest.split_whitespace() {
                    let (name, arity) = decl.split_once('/').ok_or_else(|| {
                        syntax(line, format!("expected name/arity, got `{decl}`"))
                    })?;
                    let arity: usize = arity
                        .parse()
                        .map_err(|_| syntax(line, format!("bad arity in `{decl}`")))?;
                    if !is_ident(name) {
                        return Err(syntax(line, format!("bad symbol name `{name}`")));
                    }
                    symbols.push(Symbol {
                        name: name.to_string(),
                        arity,
                    });
                }
            }
            Section::Dist => {
                let k = kind.unwrap();
                let (name, body) = rest
                    .split_once(char::is_whitespace)
                    .ok_or_else(|| syntax(line, "expected `dist <name> { … }`"))?;
                if !is_ident(name) {
                    return Err(syntax(line, format!("bad distribution name `{name}`")));
                }
                let inner = body
                    .trim()
                    .strip_prefix('{')
                    .and_then(|b| b.strip_suffix('}'))
                    .ok_or_else(|| syntax(line, "distribution body must be enclosed in { }"))?;
                let mut entries = Vec::new();
                for item in inner.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                    let (w, term) = item.split_once(char::is_whitespace).ok_or_else(|| {
                        syntax(line, format!("expected `<weight> <term>`, got `{item}`"))
                    })?;
                    entries.push(RawEntry {
                        line,
                        weight: parse_value(&k, line, w)?,
                        term: parse_term(line, term)?,
                    });
                }
                dists.push(RawDist {
                    line,
                    name: name.to_string(),
                    entries,
                });
            }
            Section::State => {
                let k = kind.unwrap();
                let mut words = rest.split_whitespace();
                let name = words
                    .next()
                    .ok_or_else(|| syntax(line, "expected a state name"))?;
                if !is_ident(name) {
                    return Err(syntax(line, format!("bad state name `{name}`")));
                }
                let mut st = RawState {
                    line,
                    name: name.to_string(),
                    parity: 0,
                    offset: None,
                    options: Vec::new(),
                };
                let mut have_parity = false;
                while let Some(key) = words.next() {
                    match key {
                        "parity" => {
                            let p = words
                                .next()
                                .ok_or_else(|| syntax(line, "missing parity value"))?;
                            st.parity = p
                                .parse()
                                .map_err(|_| syntax(line, format!("bad parity `{p}`")))?;
                            have_parity = true;
                        }
                        "offset" => {
                            let o = words
                                .next()
                                .ok_or_else(|| syntax(line, "missing offset value"))?;
                            st.offset = Some(parse_value(&k, line, o)?);
                        }
                        "options" => {
                            st.options.extend(words.by_ref().map(str::to_string));
                        }
                        other => return Err(syntax(line, format!("unexpected `{other}`"))),
                    }
                }
                if !have_parity {
                    return Err(syntax(line, format!("state `{name}` needs a parity")));
                }
                states.push(st);
            }
            Section::Trans => {
                let k = kind.unwrap();
                let words: Vec<&str> = rest.split_whitespace().collect();
                if words.len() < 3 {
                    return Err(syntax(line, "expected `trans <state> <term> <weight>`"));
                }
                let term = words[1..words.len() - 1].join(" ");
                trans.push((
                    words[0].to_string(),
                    RawEntry {
                        line,
                        weight: parse_value(&k, line, words[words.len() - 1])?,
                        term: parse_term(line, &term)?,
                    },
                ));
            }
        }
    }

    let semiring = kind.ok_or_else(|| syntax(1, "missing `semiring` line"))?;
    let signature = Signature { symbols };

    let mut state_index = HashMap::new();
    for (i, s) in states.iter().enumerate() {
        if state_index.insert(s.name.clone(), StateId(i)).is_some() {
            return Err(syntax(s.line, format!("state `{}` declared twice", s.name)));
        }
    }

    let resolve = |entry: &RawEntry| -> Result<Transition, ModelError> {
        let symbol = signature.lookup(&entry.term.symbol).ok_or_else(|| {
            syntax(
                entry.line,
                format!("undeclared symbol `{}`", entry.term.symbol),
            )
        })?;
        let mut successors = Vec::with_capacity(entry.term.successors.len());
        for name in &entry.term.successors {
            let q = state_index
                .get(name)
                .ok_or_else(|| syntax(entry.line, format!("undeclared state `{name}`")))?;
            successors.push(*q);
        }
        Ok(Transition {
            symbol,
            successors,
            weight: entry.weight,
        })
    };

    let mut distributions = Vec::new();
    for d in &dists {
        let entries = d
            .entries
            .iter()
            .map(resolve)
            .collect::<Result<Vec<_>, _>>()?;
        distributions.push(Distribution {
            name: d.name.clone(),
            entries,
        });
    }
    let mut dist_index: HashMap<String, DistId> = HashMap::new();
    for (i, d) in dists.iter().enumerate() {
        if dist_index.insert(d.name.clone(), DistId(i)).is_some() {
            return Err(syntax(
                d.line,
                format!("distribution `{}` declared twice", d.name),
            ));
        }
    }

    // Anonymous distributions, one per source, in state declaration order.
    let mut anon: Vec<Vec<Transition>> = vec![Vec::new(); states.len()];
    for (source, entry) in &trans {
        let q = state_index
            .get(source)
            .ok_or_else(|| syntax(entry.line, format!("undeclared state `{source}`")))?;
        anon[q.0].push(resolve(entry)?);
    }

    let mut out_states = Vec::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        let mut options = Vec::new();
        for o in &s.options {
            let d = dist_index.get(o).ok_or_else(|| {
                syntax(
                    s.line,
                    format!("state `{}` refers to undeclared distribution `{o}`", s.name),
                )
            })?;
            options.push(*d);
        }
        if !anon[i].is_empty() {
            if !options.is_empty() {
                return Err(syntax(
                    s.line,
                    format!("state `{}` has both `options` and `trans` lines", s.name),
                ));
            }
            let name = format!("_{}", s.name);
            if dist_index.contains_key(&name) {
                return Err(syntax(
                    s.line,
                    format!("distribution name `{name}` is reserved"),
                ));
            }
            let id = DistId(distributions.len());
            dist_index.insert(name.clone(), id);
            distributions.push(Distribution {
                name,
                entries: std::mem::take(&mut anon[i]),
            });
            options.push(id);
        }
        out_states.push(State {
            name: s.name.clone(),
            parity: s.parity,
            offset: s.offset.unwrap_or_else(|| semiring.one()),
            options,
        });
    }

    Model::new(semiring, signature, distributions, out_states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{A1, A2};

    #[test]
    fn parses_reference_automaton() {
        let m = parse_model(A1).unwrap();
        assert_eq!(m.num_states(), 4);
        assert_eq!(m.transition_count(), 6);
        assert!(m.is_automaton());
        assert!(m.is_buchi());
        assert_eq!(m.class(2), vec![m.state_id("x").unwrap()]);
    }

    #[test]
    fn parses_reference_game() {
        let m = parse_model(A2).unwrap();
        assert_eq!(m.num_states(), 3);
        assert_eq!(m.distributions.len(), 2);
        assert!(!m.is_automaton());
        assert!(m.is_buchi());
    }

    #[test]
    fn rejects_dangling_successor() {
        let text =
            "semiring tropical-bounded 8\nsig step/1\nstate x parity 2\ntrans x step(zzz) 0\n";
        let err = parse_model(text).unwrap_err();
        assert!(err.to_string().contains("zzz"), "{err}");
        assert!(matches!(err, ModelError::Syntax { line: 4, .. }));
    }

    #[test]
    fn rejects_semantic_violations() {
        let arity =
            "semiring tropical-bounded 8\nsig step/1\nstate x parity 2\ntrans x step(x,x) 0\n";
        assert!(parse_model(arity)
            .unwrap_err()
            .to_string()
            .contains("arity"));
        let over = "semiring tropical-bounded 8\nsig step/1\nstate x parity 2\ntrans x step(x) 9\n";
        assert!(parse_model(over).unwrap_err().to_string().contains("bound"));
        let zero = "semiring tropical-bounded 8\nsig step/1\nstate x parity 0\ntrans x step(x) 1\n";
        assert!(parse_model(zero)
            .unwrap_err()
            .to_string()
            .contains("parities"));
        let inf =
            "semiring tropical-bounded 8\nsig step/1\nstate x parity 2\ntrans x step(x) inf\n";
        assert!(parse_model(inf).unwrap_err().to_string().contains("zero"));
        let order = "semiring boolean\nstate x parity 2\nsig step/1\n";
        assert!(matches!(
            parse_model(order).unwrap_err(),
            ModelError::Syntax { line: 3, .. }
        ));
        let dup =
            "semiring boolean\nsig s/0\ndist d { 1 s(); 1 s() }\nstate x parity 2 options d\n";
        assert!(parse_model(dup)
            .unwrap_err()
            .to_string()
            .contains("duplicate"));
    }

    #[test]
    fn classification() {
        let twice = "semiring boolean\nsig s/0\ndist d { 1 s() }\nstate p parity 2 options d d\n";
        assert!(!parse_model(twice).unwrap().is_automaton());
        let three = "semiring boolean\nsig s/1\ndist d { 1 s(p) }\nstate p parity 3 options d\n";
        assert!(!parse_model(three).unwrap().is_buchi());
        let odd = "semiring boolean\nsig s/1\ndist d { 1 s(p) }\nstate p parity 1 options d\n";
        let m = parse_model(odd).unwrap();
        assert!(!m.is_buchi());
        assert_eq!(m.warnings().len(), 1);
    }

    #[test]
    fn render_round_trips() {
        for text in [A1, A2] {
            let m = parse_model(text).unwrap();
            assert_eq!(parse_model(&m.render()).unwrap(), m);
        }
    }
}
