//! Solver driver, batch pipeline, file formats and backends for building
//! logic and accuracy test decks. The models and tabulation rules live in
//! `latdeck-core`; this crate adds everything that needs `std`.

pub mod backend;
pub mod io;
pub mod pipeline;
pub mod solver;

pub use backend::{Backend, HighsSolver};
pub use latdeck_core as core;
