//! Coalesced Tsetlin Machine.
//!
//! A single clause bank serves every output. Each clause is a conjunction of
//! the literals whose automaton state exceeds the midpoint `N`; its vote for
//! output `o` is its signed weight `weight[c][o]`. Prediction thresholds the
//! weighted sum of firing clauses at zero.
//!
//! Clause include masks are kept bit-packed alongside the automaton states so
//! evaluation is a block-wise `include & !x == 0` test.

mod bank;
mod literals;

pub use bank::{ClauseBank, CotmParams, Feedback, Mode};
pub use literals::LiteralVector;
