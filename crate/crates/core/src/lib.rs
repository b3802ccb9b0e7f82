//! Simulation and game-theoretic analysis of locally checkable labeling
//! tasks played by selfish nodes.

pub mod cc;
pub mod game;
pub mod graph;
pub mod lang;
pub mod pref;
pub mod rng;
pub mod sim;

/// An action is an index into the language alphabet.
pub type Action = u8;
