//! Hanabi referee: cards, hint knowledge, state transitions, information-set
//! views and determinization primitives.

use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

pub mod action;
pub mod belief;
pub mod card;
pub mod knowledge;
pub mod record;
pub mod sample;
pub mod state;
pub mod view;

pub use action::{Action, Clue, Outcome};
pub use belief::{card_probability, Distribution, Predicate, TableMasks};
pub use card::{full_census, Card, Census, Colour, COLOURS, DECK_SIZE, NUM_IDENTITIES};
pub use knowledge::CardKnowledge;
pub use record::{GameRecord, MoveRecord};
pub use state::{hand_size_for, ActionList, GameState, Hand, Slot, MAX_HAND, MAX_HINTS, MAX_LIVES, MAX_PLAYERS};
pub use view::{PlayerView, View};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("player count {0} outside 2..=5")]
    PlayerCount(usize),
    #[error("game is over")]
    Terminal,
    #[error("player {player} acted on player {current}'s turn")]
    OutOfTurn { player: usize, current: usize },
    #[error("illegal action {0}")]
    IllegalAction(Action),
    #[error("no card assignment consistent with player {0}'s knowledge")]
    NoConsistentDeal(usize),
    #[error("census violation: {0}")]
    Census(String),
    #[error("parse error: {0}")]
    Parse(String),
}

static RELAXED_FILLS: AtomicU64 = AtomicU64::new(0);

pub(crate) fn note_relaxed_fills(n: usize) {
    RELAXED_FILLS.fetch_add(n as u64, Ordering::Relaxed);
}

/// Process-wide count of empty-slot fills that had to ignore the slot's
/// knowledge because no consistent card was left.
pub fn relaxed_fill_count() -> u64 {
    RELAXED_FILLS.load(Ordering::Relaxed)
}
