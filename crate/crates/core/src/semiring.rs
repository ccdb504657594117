//! Commutative semirings with their induced order and residual operation.
//!
//! Every instance here is totally ordered by `⊑` (the preorder `x ⊑ y` iff
//! `x + z = y` for some `z`), has the semiring zero as bottom and the semiring
//! one as top, and bounded variants have no infinite chains. The residual
//! `s ⊘ t` is the `⊑`-least `u` with `u • t ⊒ s`.
//!
//! Two layers are provided: the [`Semiring`] trait with one zero-sized or
//! bound-carrying struct per instance (used by the fixpoint engines), and the
//! dynamically typed [`SemiringKind`] / [`Value`] pair used by models, files
//! and the command line.

use std::fmt;
use std::hash::Hash;
use std::ops::{Add, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::Zero;
use thiserror::Error;

/// Exact nonnegative rationals.
pub type Rational = Ratio<i64>;

/// A number extended with `∞`. The derived order is the numeric one, with
/// `Inf` above every finite value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Extended<T> {
    Fin(T),
    Inf,
}

impl<T> Extended<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Fin(_))
    }

    pub fn finite(self) -> Option<T> {
        match self {
            Extended::Fin(v) => Some(v),
            Extended::Inf => None,
        }
    }
}

/// Tropical cost over naturals: the element type of `ℕ_B^∞`.
pub type Cost = Extended<u64>;

impl<T: fmt::Display> fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::Fin(v) => write!(f, "{v}"),
            Extended::Inf => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemiringError {
    #[error("value {value} does not belong to semiring {kind}")]
    KindMismatch { kind: String, value: String },
    #[error("bounded semirings need a bound B >= 1, got {0}")]
    InvalidBound(String),
    #[error("cannot read `{literal}` as a value of {kind}")]
    BadLiteral { literal: String, kind: String },
    #[error("value {value} exceeds the bound {bound}")]
    OutOfRange { value: String, bound: String },
    #[error("unknown semiring `{0}`")]
    UnknownKind(String),
}

/// The operations every weight domain supports.
pub trait Semiring: Sync {
    type Elem: Clone + Eq + Hash + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    /// `a ⊑ b` in the induced order.
    fn leq(&self, a: &Self::Elem, b: &Self::Elem) -> bool;
    /// `s ⊘ t`.
    fn residual(&self, s: &Self::Elem, t: &Self::Elem) -> Self::Elem;

    fn lift(&self, v: &Value) -> Option<Self::Elem>;
    fn lower(&self, e: &Self::Elem) -> Value;

    /// Greatest lower bound of two elements w.r.t. `⊑`.
    fn meet(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        if self.leq(a, b) {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Least upper bound of two elements w.r.t. `⊑`.
    fn join(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        if self.leq(a, b) {
            b.clone()
        } else {
            a.clone()
        }
    }
}

/// `({0,1}, ∨, 0, ∧, 1)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BooleanSemiring;

impl Semiring for BooleanSemiring {
    type Elem = bool;

    fn zero(&self) -> bool {
        false
    }
    fn one(&self) -> bool {
        true
    }
    fn add(&self, a: &bool, b: &bool) -> bool {
        *a || *b
    }
    fn mul(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn leq(&self, a: &bool, b: &bool) -> bool {
        !*a || *b
    }
    fn residual(&self, s: &bool, _t: &bool) -> bool {
        *s
    }
    fn lift(&self, v: &Value) -> Option<bool> {
        match v {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }
    fn lower(&self, e: &bool) -> Value {
        Value::Bool(*e)
    }
}

/// Scalars usable in a bounded tropical semiring.
pub trait TropicalScalar:
    Copy
    + Ord
    + Hash
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Zero
    + Send
    + Sync
{
    fn wrap(e: Extended<Self>) -> Value;
    fn unwrap(v: &Value) -> Option<Extended<Self>>;
}

impl TropicalScalar for u64 {
    fn wrap(e: Extended<u64>) -> Value {
        Value::Nat(e)
    }
    fn unwrap(v: &Value) -> Option<Extended<u64>> {
        match v {
            Value::Nat(e) => Some(*e),
            _ => None,
        }
    }
}

impl TropicalScalar for Rational {
    fn wrap(e: Extended<Rational>) -> Value {
        Value::Rat(e)
    }
    fn unwrap(v: &Value) -> Option<Extended<Rational>> {
        match v {
            Value::Rat(e) => Some(*e),
            _ => None,
        }
    }
}

/// `({0..B} ∪ {∞}, min, ∞, +_B, 0)`, where sums above `B` saturate to `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundedTropical<T> {
    pub bound: T,
}

/// The natural-number instance `ℕ_B^∞`.
pub type Tropical = BoundedTropical<u64>;
/// The rational instance with bound `B ∈ ℚ⁺`.
pub type TropicalRational = BoundedTropical<Rational>;

impl<T: TropicalScalar> BoundedTropical<T> {
    pub fn new(bound: T) -> Self {
        BoundedTropical { bound }
    }

    /// Saturating sum of finite scalars.
    pub fn sum_fin(&self, a: T, b: T) -> Extended<T> {
        let s = a + b;
        if s <= self.bound {
            Extended::Fin(s)
        } else {
            Extended::Inf
        }
    }
}

impl<T: TropicalScalar> Semiring for BoundedTropical<T> {
    type Elem = Extended<T>;

    fn zero(&self) -> Extended<T> {
        Extended::Inf
    }
    fn one(&self) -> Extended<T> {
        Extended::Fin(T::zero())
    }
    fn add(&self, a: &Extended<T>, b: &Extended<T>) -> Extended<T> {
        *a.min(b)
    }
    fn mul(&self, a: &Extended<T>, b: &Extended<T>) -> Extended<T> {
        match (a, b) {
            (Extended::Fin(x), Extended::Fin(y)) => self.sum_fin(*x, *y),
            _ => Extended::Inf,
        }
    }
    fn leq(&self, a: &Extended<T>, b: &Extended<T>) -> bool {
        a >= b
    }
    fn residual(&self, s: &Extended<T>, t: &Extended<T>) -> Extended<T> {
        match (s, t) {
            (Extended::Inf, _) => Extended::Inf,
            (Extended::Fin(_), Extended::Inf) => Extended::Fin(T::zero()),
            (Extended::Fin(x), Extended::Fin(y)) => {
                Extended::Fin(if x > y { *x - *y } else { T::zero() })
            }
        }
    }
    fn lift(&self, v: &Value) -> Option<Extended<T>> {
        T::unwrap(v).filter(|e| match e {
            Extended::Fin(x) => *x >= T::zero() && *x <= self.bound,
            Extended::Inf => true,
        })
    }
    fn lower(&self, e: &Extended<T>) -> Value {
        T::wrap(*e)
    }
}

/// Which semiring a model is weighted over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SemiringKind {
    Boolean,
    Tropical { bound: u64 },
    TropicalRational { bound: Rational },
}

/// An element of one of the provided semirings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Bool(bool),
    Nat(Cost),
    Rat(Extended<Rational>),
}

impl Value {
    pub const INF: Value = Value::Nat(Extended::Inf);

    pub fn nat(n: u64) -> Value {
        Value::Nat(Extended::Fin(n))
    }

    pub fn rat(numer: i64, denom: i64) -> Value {
        Value::Rat(Extended::Fin(Rational::new(numer, denom)))
    }

    /// The tropical cost payload, if this is a natural tropical value.
    pub fn as_cost(&self) -> Option<Cost> {
        match self {
            Value::Nat(c) => Some(*c),
            _ => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => f.write_str(if *b { "1" } else { "0" }),
            Value::Nat(e) => write!(f, "{e}"),
            Value::Rat(Extended::Fin(r)) => write_rational(f, r),
            Value::Rat(Extended::Inf) => f.write_str("inf"),
        }
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if *r.denom() == 1 {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// Renders a rational as `n` or `p/q`.
pub fn format_rational(r: &Rational) -> String {
    struct Show<'a>(&'a Rational);
    impl fmt::Display for Show<'_> {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            write_rational(f, self.0)
        }
    }
    Show(r).to_string()
}

/// Parses `n` or `p/q` into a nonnegative rational.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let (numer, denom) = match text.split_once('/') {
        Some((p, q)) => (p.parse::<i64>().ok()?, q.parse::<i64>().ok()?),
        None => (text.parse::<i64>().ok()?, 1),
    };
    if numer < 0 || denom <= 0 {
        return None;
    }
    Some(Rational::new(numer, denom))
}

impl fmt::Display for SemiringKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemiringKind::Boolean => f.write_str("boolean"),
            SemiringKind::Tropical { bound } => write!(f, "tropical-bounded {bound}"),
            SemiringKind::TropicalRational { bound } => {
                f.write_str("tropical-rational-bounded ")?;
                write_rational(f, bound)
            }
        }
    }
}

impl FromStr for SemiringKind {
    type Err = SemiringError;

    /// Accepts `boolean`, `tropical-bounded <B>` and
    /// `tropical-rational-bounded <B>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        match words.as_slice() {
            ["boolean"] => Ok(SemiringKind::Boolean),
            ["tropical-bounded", b] => {
                let bound: u64 = b
                    .parse()
                    .map_err(|_| SemiringError::InvalidBound(b.to_string()))?;
                if bound < 1 {
                    return Err(SemiringError::InvalidBound(b.to_string()));
                }
                Ok(SemiringKind::Tropical { bound })
            }
            ["tropical-rational-bounded", b] => {
                let bound =
                    parse_rational(b).ok_or_else(|| SemiringError::InvalidBound(b.to_string()))?;
                if bound < Rational::from_integer(1) {
                    return Err(SemiringError::InvalidBound(b.to_string()));
                }
                Ok(SemiringKind::TropicalRational { bound })
            }
            _ => Err(SemiringError::UnknownKind(s.trim().to_string())),
        }
    }
}

impl SemiringKind {
    pub fn zero(&self) -> Value {
        match self {
            SemiringKind::Boolean => Value::Bool(false),
            SemiringKind::Tropical { .. } => Value::Nat(Extended::Inf),
            SemiringKind::TropicalRational { .. } => Value::Rat(Extended::Inf),
        }
    }

    pub fn one(&self) -> Value {
        match self {
            SemiringKind::Boolean => Value::Bool(true),
            SemiringKind::Tropical { .. } => Value::nat(0),
            SemiringKind::TropicalRational { .. } => Value::rat(0, 1),
        }
    }

    /// The natural bound, for `tropical-bounded` models.
    pub fn nat_bound(&self) -> Option<u64> {
        match self {
            SemiringKind::Tropical { bound } => Some(*bound),
            _ => None,
        }
    }

    /// Checks that `v` is an element of this semiring (kind and range).
    pub fn check(&self, v: &Value) -> Result<(), SemiringError> {
        let ok = match self {
            SemiringKind::Boolean => BooleanSemiring.lift(v).is_some(),
            SemiringKind::Tropical { bound } => Tropical::new(*bound).lift(v).is_some(),
            SemiringKind::TropicalRational { bound } => {
                TropicalRational::new(*bound).lift(v).is_some()
            }
        };
        if ok {
            return Ok(());
        }
        let same_kind = matches!(
            (self, v),
            (SemiringKind::Boolean, Value::Bool(_))
                | (SemiringKind::Tropical { .. }, Value::Nat(_))
                | (SemiringKind::TropicalRational { .. }, Value::Rat(_))
        );
        if same_kind {
            Err(SemiringError::OutOfRange {
                value: v.to_string(),
                bound: self.bound_text(),
            })
        } else {
            Err(SemiringError::KindMismatch {
                kind: self.to_string(),
                value: v.to_string(),
            })
        }
    }

    fn bound_text(&self) -> String {
        match self {
            SemiringKind::Boolean => "1".into(),
            SemiringKind::Tropical { bound } => bound.to_string(),
            SemiringKind::TropicalRational { bound } => format_rational(bound),
        }
    }

    /// Reads a literal (`0`/`1`, a decimal, `p/q`, or `inf`) as an element.
    pub fn parse_value(&self, literal: &str) -> Result<Value, SemiringError> {
        let bad = || SemiringError::BadLiteral {
            literal: literal.to_string(),
            kind: self.to_string(),
        };
        let v = match self {
            SemiringKind::Boolean => match literal {
                "0" => Value::Bool(false),
                "1" => Value::Bool(true),
                _ => return Err(bad()),
            },
            SemiringKind::Tropical { .. } => {
                if literal == "inf" {
                    Value::Nat(Extended::Inf)
                } else {
                    Value::nat(literal.parse().map_err(|_| bad())?)
                }
            }
            SemiringKind::TropicalRational { .. } => {
                if literal == "inf" {
                    Value::Rat(Extended::Inf)
                } else {
                    Value::Rat(Extended::Fin(parse_rational(literal).ok_or_else(bad)?))
                }
            }
        };
        self.check(&v)?;
        Ok(v)
    }

    fn binary(
        &self,
        a: &Value,
        b: &Value,
        boolean: impl Fn(&BooleanSemiring, &bool, &bool) -> Value,
        nat: impl Fn(&Tropical, &Cost, &Cost) -> Value,
        rat: impl Fn(&TropicalRational, &Extended<Rational>, &Extended<Rational>) -> Value,
    ) -> Result<Value, SemiringError> {
        self.check(a)?;
        self.check(b)?;
        Ok(match (self, a, b) {
            (SemiringKind::Boolean, Value::Bool(x), Value::Bool(y)) => {
                boolean(&BooleanSemiring, x, y)
            }
            (SemiringKind::Tropical { bound }, Value::Nat(x), Value::Nat(y)) => {
                nat(&Tropical::new(*bound), x, y)
            }
            (SemiringKind::TropicalRational { bound }, Value::Rat(x), Value::Rat(y)) => {
                rat(&TropicalRational::new(*bound), x, y)
            }
            _ => unreachable!("checked above"),
        })
    }

    pub fn add(&self, a: &Value, b: &Value) -> Result<Value, SemiringError> {
        self.binary(
            a,
            b,
            |s, x, y| s.lower(&s.add(x, y)),
            |s, x, y| s.lower(&s.add(x, y)),
            |s, x, y| s.lower(&s.add(x, y)),
        )
    }

    pub fn mul(&self, a: &Value, b: &Value) -> Result<Value, SemiringError> {
        self.binary(
            a,
            b,
            |s, x, y| s.lower(&s.mul(x, y)),
            |s, x, y| s.lower(&s.mul(x, y)),
            |s, x, y| s.lower(&s.mul(x, y)),
        )
    }

    pub fn residual(&self, a: &Value, b: &Value) -> Result<Value, SemiringError> {
        self.binary(
            a,
            b,
            |s, x, y| s.lower(&s.residual(x, y)),
            |s, x, y| s.lower(&s.residual(x, y)),
            |s, x, y| s.lower(&s.residual(x, y)),
        )
    }

    pub fn leq(&self, a: &Value, b: &Value) -> Result<bool, SemiringError> {
        let r = self.binary(
            a,
            b,
            |s, x, y| Value::Bool(s.leq(x, y)),
            |s, x, y| Value::Bool(s.leq(x, y)),
            |s, x, y| Value::Bool(s.leq(x, y)),
        )?;
        Ok(r == Value::Bool(true))
    }
}
