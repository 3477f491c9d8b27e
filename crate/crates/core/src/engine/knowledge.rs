use crate::engine::card::{Card, Colour};

const ALL5: u8 = 0b1_1111;

/// What a player has been told about one of their own cards.
///
/// Colour and value constraints are bitmasks over the five colours and the five
/// face values; neither is ever empty for a card reachable through legal play.
/// `convention` is non-zero when the card was the single card touched by a
/// hint from the previous player; it holds the identities that were playable
/// at that moment, which the "playable now" convention reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CardKnowledge {
    colours: u8,
    values: u8,
    convention: u32,
}

impl Default for CardKnowledge {
    fn default() -> Self {
        CardKnowledge::unknown()
    }
}

impl CardKnowledge {
    pub const fn unknown() -> Self {
        CardKnowledge {
            colours: ALL5,
            values: ALL5,
            convention: 0,
        }
    }

    pub fn from_masks(colours: u8, values: u8) -> Self {
        assert!(colours & ALL5 != 0 && values & ALL5 != 0, "empty knowledge");
        CardKnowledge {
            colours: colours & ALL5,
            values: values & ALL5,
            convention: 0,
        }
    }

    /// Knowledge that pins the card to exactly one identity.
    pub fn exact(card: Card) -> Self {
        CardKnowledge::from_masks(1 << card.colour().index(), 1 << (card.value() - 1))
    }

    #[inline]
    pub fn colour_mask(&self) -> u8 {
        self.colours
    }

    #[inline]
    pub fn value_mask(&self) -> u8 {
        self.values
    }

    pub fn possible_colours(&self) -> impl Iterator<Item = Colour> + '_ {
        (0..5).filter(|i| self.colours & (1 << i) != 0).map(Colour::from_index)
    }

    pub fn possible_values(&self) -> impl Iterator<Item = u8> + '_ {
        (1..=5).filter(|v| self.values & (1 << (v - 1)) != 0)
    }

    #[inline]
    pub fn knows_colour(&self) -> bool {
        self.colours.count_ones() == 1
    }

    #[inline]
    pub fn knows_value(&self) -> bool {
        self.values.count_ones() == 1
    }

    #[inline]
    pub fn admits(&self, card: Card) -> bool {
        self.identity_mask() & card.bit() != 0
    }

    /// 25-bit mask of identities consistent with this knowledge.
    #[inline]
    pub fn identity_mask(&self) -> u32 {
        let mut mask = 0u32;
        let mut cols = self.colours;
        while cols != 0 {
            let c = cols.trailing_zeros();
            mask |= (self.values as u32) << (5 * c);
            cols &= cols - 1;
        }
        mask
    }

    #[inline]
    pub fn is_convention_tagged(&self) -> bool {
        self.convention != 0
    }

    /// Identities playable when the tagging hint was given; 0 if untagged.
    #[inline]
    pub fn convention_mask(&self) -> u32 {
        self.convention
    }

    pub fn set_convention_mask(&mut self, playable_then: u32) {
        self.convention = playable_then;
    }

    /// Apply a colour hint. `touched` says whether this card was pointed at.
    pub fn apply_colour_hint(&mut self, colour: Colour, touched: bool) {
        let bit = 1 << colour.index();
        if touched {
            self.colours = bit;
        } else if self.colours != bit {
            self.colours &= !bit;
        }
    }

    pub fn apply_value_hint(&mut self, value: u8, touched: bool) {
        let bit = 1 << (value - 1);
        if touched {
            self.values = bit;
        } else if self.values != bit {
            self.values &= !bit;
        }
    }

    /// Number of dimensions (colour, value) pinned to a single option.
    pub fn positive_info(&self) -> u8 {
        self.knows_colour() as u8 + self.knows_value() as u8
    }
}
