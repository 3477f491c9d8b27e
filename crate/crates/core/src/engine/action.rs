use std::fmt;
use std::str::FromStr;

use crate::engine::card::{Card, Colour};
use crate::engine::EngineError;

/// What a hint points at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Clue {
    Colour(Colour),
    Value(u8),
}

impl Clue {
    #[inline]
    pub fn matches(self, card: Card) -> bool {
        match self {
            Clue::Colour(c) => card.colour() == c,
            Clue::Value(v) => card.value() == v,
        }
    }

    /// All ten clues, colours first.
    pub fn all() -> impl Iterator<Item = Clue> {
        crate::engine::COLOURS
            .into_iter()
            .map(Clue::Colour)
            .chain((1..=5).map(Clue::Value))
    }
}

impl fmt::Display for Clue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clue::Colour(c) => write!(f, "{}", c.letter()),
            Clue::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Play(u8),
    Discard(u8),
    Hint { target: u8, clue: Clue },
}

impl Action {
    pub fn is_hint(&self) -> bool {
        matches!(self, Action::Hint { .. })
    }

    pub fn slot(&self) -> Option<u8> {
        match *self {
            Action::Play(s) | Action::Discard(s) => Some(s),
            Action::Hint { .. } => None,
        }
    }
}

/// Text form: `P2`, `D0`, `H1:R`, `H3:4`.
impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Play(s) => write!(f, "P{s}"),
            Action::Discard(s) => write!(f, "D{s}"),
            Action::Hint { target, clue } => write!(f, "H{target}:{clue}"),
        }
    }
}

impl FromStr for Action {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EngineError::Parse(format!("bad action {s:?}"));
        let (kind, rest) = s.split_at_checked(1).ok_or_else(bad)?;
        match kind {
            "P" | "D" => {
                let slot: u8 = rest.parse().map_err(|_| bad())?;
                if slot >= 5 {
                    return Err(bad());
                }
                Ok(if kind == "P" { Action::Play(slot) } else { Action::Discard(slot) })
            }
            "H" => {
                let (t, c) = rest.split_once(':').ok_or_else(bad)?;
                let target: u8 = t.parse().map_err(|_| bad())?;
                if target >= 5 {
                    return Err(bad());
                }
                let mut chars = c.chars();
                let ch = chars.next().ok_or_else(bad)?;
                if chars.next().is_some() {
                    return Err(bad());
                }
                let clue = match ch.to_digit(10) {
                    Some(v @ 1..=5) => Clue::Value(v as u8),
                    Some(_) => return Err(bad()),
                    None => Clue::Colour(Colour::from_letter(ch).ok_or_else(bad)?),
                };
                Ok(Action::Hint { target, clue })
            }
            _ => Err(bad()),
        }
    }
}

/// What every player observes when an action resolves.
///
/// Played and discarded card identities become public; hints reveal which
/// slots were touched. Deck order is never part of an outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Outcome {
    Play { slot: u8, card: Card, success: bool, drew: bool },
    Discard { slot: u8, card: Card, drew: bool },
    Hint { target: u8, clue: Clue, touched: u8 },
}

impl Outcome {
    pub fn revealed(&self) -> Option<Card> {
        match *self {
            Outcome::Play { card, .. } | Outcome::Discard { card, .. } => Some(card),
            Outcome::Hint { .. } => None,
        }
    }

    pub(crate) fn set_drew(&mut self, value: bool) {
        match self {
            Outcome::Play { drew, .. } | Outcome::Discard { drew, .. } => *drew = value,
            Outcome::Hint { .. } => {}
        }
    }
}

/// Text form: `play:R2:ok:draw`, `play:Y5:fail:nodraw`, `discard:B1:draw`, `hint:01011`.
impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let draw = |d: bool| if d { "draw" } else { "nodraw" };
        match *self {
            Outcome::Play { card, success, drew, .. } => write!(
                f,
                "play:{card}:{}:{}",
                if success { "ok" } else { "fail" },
                draw(drew)
            ),
            Outcome::Discard { card, drew, .. } => write!(f, "discard:{card}:{}", draw(drew)),
            Outcome::Hint { touched, .. } => {
                write!(f, "hint:")?;
                for i in 0..5 {
                    write!(f, "{}", (touched >> i) & 1)?;
                }
                Ok(())
            }
        }
    }
}

impl Outcome {
    /// Inverse of `Display`, given the action that produced the outcome.
    pub fn parse_for(action: Action, s: &str) -> Result<Outcome, EngineError> {
        let bad = || EngineError::Parse(format!("bad outcome {s:?} for {action}"));
        let parts: Vec<&str> = s.split(':').collect();
        let drew = |p: &str| match p {
            "draw" => Ok(true),
            "nodraw" => Ok(false),
            _ => Err(bad()),
        };
        match (action, parts.as_slice()) {
            (Action::Play(slot), ["play", card, res, d]) => Ok(Outcome::Play {
                slot,
                card: card.parse()?,
                success: match *res {
                    "ok" => true,
                    "fail" => false,
                    _ => return Err(bad()),
                },
                drew: drew(d)?,
            }),
            (Action::Discard(slot), ["discard", card, d]) => Ok(Outcome::Discard {
                slot,
                card: card.parse()?,
                drew: drew(d)?,
            }),
            (Action::Hint { target, clue }, ["hint", bits]) if bits.len() == 5 => {
                let mut touched = 0u8;
                for (i, b) in bits.chars().enumerate() {
                    match b {
                        '1' => touched |= 1 << i,
                        '0' => {}
                        _ => return Err(bad()),
                    }
                }
                Ok(Outcome::Hint { target, clue, touched })
            }
            _ => Err(bad()),
        }
    }
}
