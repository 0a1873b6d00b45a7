//! Core model for logic and accuracy (L&A) test deck construction.
//!
//! A test deck is a multiset of marked ballots run through a tabulator
//! before an election. A *swap* is a candidate permutation modelling a
//! misconfigured tabulator; the deck detects the swap when the tally it
//! produces under the swap differs from the correct tally. This crate holds
//! the tabulation semantics, the swap algebra, the mixed-integer models used
//! to find short decks that detect every swap, and the constructive bounds.
//!
//! Everything here is `no_std` (with `alloc`). Solving the MILPs is
//! delegated to an implementation of [`milp::MilpSolver`] supplied by the
//! caller.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod ballot;
pub mod bounds;
pub mod cut;
mod error;
pub mod experiments;
pub mod legal;
pub mod master;
pub mod milp;
pub mod normalize;
pub mod redteam;
pub mod samples;
pub mod search;
pub mod swap;

pub use ballot::{Ballot, BallotStyle, Contest, Deck, Tally};
pub use error::Error;
pub use swap::Swap;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
