//! Hanabi engine and search agents.
//!
//! * [`engine`]: referee, hint knowledge, views and determinization.
//! * [`features`]: fixed-length position and move encodings.
//! * [`learn`]: shallow networks and learned evaluators.
//! * [`mcts`]: open-loop information-set tree search.
//! * [`opponent`]: posteriors over which policy a teammate plays.
//! * [`policy`]: the named teammate policies.
//! * [`rules`]: pruning rules, the "playable now" convention and fixed policies.
//! * [`rng`]: seeded ChaCha streams.

pub mod engine;
pub mod features;
pub mod learn;
pub mod mcts;
pub mod opponent;
pub mod policy;
pub mod rng;
pub mod rules;

pub use engine::{Action, Card, Clue, Colour, EngineError, GameState, PlayerView, View};

pub type Mlp32 = learn::Mlp<f32>;
pub type Mlp64 = learn::Mlp<f64>;
