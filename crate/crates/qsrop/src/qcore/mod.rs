//! Registers, amplitude vectors and the unitary/measurement primitives every
//! game is built from.
//!
//! A register is described by a [`RegisterLayout`]: an ordered list of named
//! segments, segment 0 occupying the least-significant bits of the basis
//! index. A [`QState`] is the full amplitude vector over that register.
//! Oracles are exhaustive truth tables ([`FunctionTable`],
//! [`PermutationTable`]) because a superposition query touches every input at
//! once.

mod bits;
mod layout;
mod metrics;
mod state;
mod table;

pub use bits::BitString;
pub use layout::{RegisterLayout, Segment, Span};
pub use metrics::{fidelity, inner_product, pure_trace_distance};
pub use state::QState;
pub use table::{FunctionTable, PermutationTable};

pub(crate) fn mask(width: usize) -> u64 {
    debug_assert!(width <= 64);
    if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}
