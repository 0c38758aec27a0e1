//! Planar semimodular lattice diagrams, their congruences, the swing calculus
//! and the Swing Lattice Game.

pub mod builder;
pub mod congruence;
pub mod diagram;
pub mod fixtures;
pub mod swing;
pub mod game;
pub mod service;
pub mod properties;
pub mod cli;
