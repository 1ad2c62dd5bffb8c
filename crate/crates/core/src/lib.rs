//! Two-way teleportation of a `d1`-level and a `d2`-level qudit through one
//! shared pair of `d`-level qudits, for `d1·d2 ≤ d`.
//!
//! [`protocol`] runs the protocol on dense state vectors built with
//! [`qudit`]; [`oracle`] replays every measurement branch and certifies unit
//! fidelity, flat outcome statistics and an identity input→output map.
//! The guide in `book/` walks through each stage.

pub mod cli;
pub mod error;
pub mod oracle;
pub mod protocol;
pub mod qudit;

pub use error::{Error, Result};

// Book chapters run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/registers.md")]
    mod registers {}
    #[doc = include_str!("../../../book/src/gates.md")]
    mod gates {}
    #[doc = include_str!("../../../book/src/measurement.md")]
    mod measurement {}
    #[doc = include_str!("../../../book/src/protocol.md")]
    mod protocol {}
    #[doc = include_str!("../../../book/src/tailoring.md")]
    mod tailoring {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
