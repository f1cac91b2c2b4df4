//! The Toucher-Isolator game on trees: exact values, a constructive Isolator
//! strategy driven by tree reductions, and an exhaustive verification harness.

pub mod board;
pub mod enumeration;
pub mod game;
pub mod reductions;
pub mod solver;
pub mod strategy;
pub mod verify;

pub use game::{DelayedGame, GameError, Graph, PlayState, Player, Tree, VertexClassification};
pub use solver::{SolveError, SolveResult, Solver};
