//! Two small reference models used in tests, docs and the browser demo.

/// A Büchi word automaton over one symbol where `y` must save up before it
/// can afford the expensive move back to the accepting state `x`.
pub const A1: &str = "\
semiring tropical-bounded 64
sig step/1
state x  parity 2 offset 0
state y  parity 1 offset 0
state y1 parity 1 offset 2
state y2 parity 1 offset 4
trans x  step(y)  0
trans y  step(x)  5
trans y  step(y1) 1
trans y  step(y2) 2
trans y1 step(y)  0
trans y2 step(y)  0
";

/// A Büchi game: `x` and `y1` each offer the opponent a choice of two
/// distributions.
pub const A2: &str = "\
semiring tropical-bounded 64
sig step/1
dist f { 4 step(x); 1 step(y1); 2 step(y2) }
dist g { 0 step(x); 2 step(y1) }
state x  parity 2 offset 0 options f g
state y1 parity 1 offset 1 options f g
state y2 parity 1 offset 4 options f
";
