use std::fmt;
use std::str::FromStr;

use crate::engine::EngineError;

/// Number of distinct card identities (5 colours x 5 values).
pub const NUM_IDENTITIES: usize = 25;
/// Physical cards in a full deck.
pub const DECK_SIZE: usize = 50;
/// Copies of each value within one colour, indexed by `value - 1`.
pub const COPIES_PER_VALUE: [u8; 5] = [3, 2, 2, 2, 1];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Colour {
    Red = 0,
    Blue = 1,
    Green = 2,
    White = 3,
    Yellow = 4,
}

pub const COLOURS: [Colour; 5] = [
    Colour::Red,
    Colour::Blue,
    Colour::Green,
    Colour::White,
    Colour::Yellow,
];

impl Colour {
    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_index(i: usize) -> Colour {
        COLOURS[i]
    }

    pub fn letter(self) -> char {
        ['R', 'B', 'G', 'W', 'Y'][self.index()]
    }

    pub fn from_letter(c: char) -> Option<Colour> {
        match c.to_ascii_uppercase() {
            'R' => Some(Colour::Red),
            'B' => Some(Colour::Blue),
            'G' => Some(Colour::Green),
            'W' => Some(Colour::White),
            'Y' => Some(Colour::Yellow),
            _ => None,
        }
    }
}

/// A card identity packed as `colour * 5 + (value - 1)`.
///
/// `Card::HIDDEN` marks a card whose identity the holder of a scrubbed state
/// cannot see (own hand, deck contents).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Card(u8);

impl Card {
    pub const HIDDEN: Card = Card(u8::MAX);

    #[inline]
    pub fn new(colour: Colour, value: u8) -> Card {
        debug_assert!((1..=5).contains(&value));
        Card(colour as u8 * 5 + value - 1)
    }

    #[inline]
    pub fn from_index(i: usize) -> Card {
        debug_assert!(i < NUM_IDENTITIES);
        Card(i as u8)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn colour(self) -> Colour {
        Colour::from_index(self.index() / 5)
    }

    /// Face value 1..=5.
    #[inline]
    pub fn value(self) -> u8 {
        self.0 % 5 + 1
    }

    #[inline]
    pub fn is_hidden(self) -> bool {
        self == Card::HIDDEN
    }

    /// Number of physical copies of this identity in the full deck.
    #[inline]
    pub fn copies(self) -> u8 {
        COPIES_PER_VALUE[(self.value() - 1) as usize]
    }

    /// Bit for this identity in a 25-bit identity mask.
    #[inline]
    pub fn bit(self) -> u32 {
        1 << self.0
    }

    pub fn all() -> impl Iterator<Item = Card> {
        (0..NUM_IDENTITIES).map(Card::from_index)
    }
}

impl fmt::Debug for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Card {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_hidden() {
            write!(f, "??")
        } else {
            write!(f, "{}{}", self.colour().letter(), self.value())
        }
    }
}

impl FromStr for Card {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut chars = s.chars();
        let bad = || EngineError::Parse(format!("bad card {s:?}"));
        let colour = chars.next().and_then(Colour::from_letter).ok_or_else(bad)?;
        let value = chars
            .next()
            .and_then(|c| c.to_digit(10))
            .filter(|v| (1..=5).contains(v))
            .ok_or_else(bad)?;
        if chars.next().is_some() {
            return Err(bad());
        }
        Ok(Card::new(colour, value as u8))
    }
}

/// Per-identity card counts.
pub type Census = [u8; NUM_IDENTITIES];

/// Counts of every identity in a fresh 50-card deck.
pub fn full_census() -> Census {
    let mut c = [0u8; NUM_IDENTITIES];
    for card in Card::all() {
        c[card.index()] = card.copies();
    }
    c
}

/// The 50 physical cards in canonical (unshuffled) order.
pub fn full_deck() -> Vec<Card> {
    Card::all()
        .flat_map(|c| std::iter::repeat_n(c, c.copies() as usize))
        .collect()
}
