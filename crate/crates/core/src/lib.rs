//! Schematic CERES for the infinitary pigeonhole family: terms, carriage
//! return lists, clause-set terms, characteristic-term extraction,
//! resolution schemata and Herbrand sequents.

pub mod clause_sets;
pub mod cli;
pub mod crlist;
pub mod error;
pub mod herbrand;
pub mod lks;
pub mod math;
pub mod nia;
pub mod resolution;
pub mod saturate;
pub mod syntax;
pub mod terms;

pub use error::{Error, Result};
