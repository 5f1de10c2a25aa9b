//! Process polars, bipolars and superhedging duality on finite event trees.
//!
//! Everything here runs in exact rational arithmetic. The crate is organised
//! bottom-up:
//!
//! - [`tree`]: finite filtered probability spaces as rooted event trees.
//! - [`lp`]: an exact simplex solver with verifiable certificates.
//! - [`conditional`]: conditional polars and bipolars of random variables.
//! - [`process`]: positive processes, supermartingales and the
//!   fork-convex and solid hull operations.
//! - [`polar`]: process polars, the two bipolar membership oracles and the
//!   envelope construction.
//! - [`market`]: wealth processes, martingale measures, superhedging and the
//!   consumption budget constraint.
//! - [`instance`], [`report`], [`cli`]: the instance file format, check
//!   reports and the command-line front end.
//! - [`fuzz`], [`suites`], [`fixtures`]: random instance generators, the
//!   randomized verification suites and small hand-built instances.
//!
//! Runnable walkthroughs live in the crate's `examples/` directory.

pub mod conditional;
pub mod fixtures;
pub mod fuzz;
pub mod instance;
pub mod lp;
pub mod market;
pub mod polar;
pub mod process;
pub mod rational;
pub mod report;
pub mod suites;
pub mod tree;

pub mod cli;

pub use rational::{rat, Rational};
