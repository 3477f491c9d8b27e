//! Card-identity probabilities from hint knowledge and the unseen census.
//!
//! A slot's distribution is uniform over the unseen physical cards whose
//! identity its knowledge admits. No inference is drawn from hints that were
//! not given.

use crate::engine::card::{Card, Census, COLOURS, COPIES_PER_VALUE, NUM_IDENTITIES};
use crate::engine::knowledge::CardKnowledge;
use crate::engine::view::View;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Predicate {
    Playable,
    Discardable,
    /// One more card of the colour must be played first.
    PlayablePlusOne,
}

/// Identity masks derived from the tableau and discard pile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableMasks {
    pub playable: u32,
    pub discardable: u32,
    pub plus_one: u32,
    /// Highest value still reachable per colour.
    pub reachable: [u8; 5],
}

impl TableMasks {
    pub fn new(tableau: &[u8; 5], discard: &Census) -> TableMasks {
        let mut playable = 0u32;
        let mut discardable = 0u32;
        let mut plus_one = 0u32;
        let mut reachable = [0u8; 5];
        for (ci, &top) in tableau.iter().enumerate() {
            let mut reach = top;
            for v in top + 1..=5 {
                if discard[Card::new(COLOURS[ci], v).index()] >= COPIES_PER_VALUE[(v - 1) as usize] {
                    break;
                }
                reach = v;
            }
            reachable[ci] = reach;
            for v in 1..=5u8 {
                let bit = Card::new(COLOURS[ci], v).bit();
                if v == top + 1 {
                    playable |= bit;
                }
                if v == top + 2 {
                    plus_one |= bit;
                }
                if v <= top || v > reach {
                    discardable |= bit;
                }
            }
        }
        TableMasks { playable, discardable, plus_one, reachable }
    }

    pub fn from_view(view: &View<'_>) -> TableMasks {
        TableMasks::new(view.tableau(), view.discard())
    }

    pub fn mask(&self, predicate: Predicate) -> u32 {
        match predicate {
            Predicate::Playable => self.playable,
            Predicate::Discardable => self.discardable,
            Predicate::PlayablePlusOne => self.plus_one,
        }
    }

    /// Points that can no longer be scored because of discards.
    pub fn unavailable_points(&self) -> u8 {
        self.reachable.iter().map(|&r| 5 - r).sum()
    }
}

/// Weighted identity distribution for one card.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Distribution {
    counts: Census,
    total: u32,
}

impl Distribution {
    pub fn new(unseen: &Census, knowledge: &CardKnowledge) -> Distribution {
        Distribution::masked(unseen, knowledge.identity_mask())
    }

    pub fn masked(unseen: &Census, mask: u32) -> Distribution {
        let mut counts = [0u8; NUM_IDENTITIES];
        let mut total = 0u32;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            counts[i] = unseen[i];
            total += unseen[i] as u32;
            m &= m - 1;
        }
        Distribution { counts, total }
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn count(&self, card: Card) -> u8 {
        self.counts[card.index()]
    }

    /// Identities with non-zero weight.
    pub fn support(&self) -> u32 {
        let mut s = 0u32;
        for (i, &n) in self.counts.iter().enumerate() {
            if n > 0 {
                s |= 1 << i;
            }
        }
        s
    }

    /// Probability the card lies in `mask`. Zero for an empty distribution.
    pub fn probability(&self, mask: u32) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let mut hit = 0u32;
        let mut m = mask & ((1 << NUM_IDENTITIES) - 1);
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            hit += self.counts[i] as u32;
            m &= m - 1;
        }
        hit as f64 / self.total as f64
    }

    /// Expectation of `f` over identities.
    pub fn expect(&self, mut f: impl FnMut(Card) -> f64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for (i, &n) in self.counts.iter().enumerate() {
            if n > 0 {
                acc += n as f64 * f(Card::from_index(i));
            }
        }
        acc / self.total as f64
    }

    /// Restrict to `mask`; `None` when nothing remains.
    pub fn restricted(&self, mask: u32) -> Option<Distribution> {
        let mut out = *self;
        out.total = 0;
        for i in 0..NUM_IDENTITIES {
            if mask & (1 << i) == 0 {
                out.counts[i] = 0;
            }
            out.total += out.counts[i] as u32;
        }
        (out.total > 0).then_some(out)
    }
}

/// Distribution of `player`'s card in `slot`, from what the viewer can see.
pub fn slot_distribution(view: &View<'_>, player: usize, slot: usize) -> Option<Distribution> {
    let knowledge = view.knowledge(player, slot)?;
    Some(Distribution::new(&view.unseen_by(player), &knowledge))
}

/// Probability that the viewer's own card in `slot` satisfies `predicate`,
/// without any convention overrides.
pub fn card_probability(view: &View<'_>, slot: usize, predicate: Predicate) -> f64 {
    let masks = TableMasks::from_view(view);
    slot_distribution(view, view.me(), slot)
        .map(|d| d.probability(masks.mask(predicate)))
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::card::Colour::*;
    use crate::engine::state::GameState;

    fn c(colour: crate::engine::Colour, v: u8) -> Card {
        Card::new(colour, v)
    }

    #[test]
    fn fully_identified_playable_card() {
        let hands: [&[Card]; 2] = [
            &[c(Red, 2), c(Blue, 1), c(Blue, 1), c(Green, 3), c(White, 4)],
            &[c(Yellow, 1), c(Yellow, 2), c(Yellow, 3), c(Yellow, 4), c(Green, 1)],
        ];
        let mut s = GameState::arranged(2, &hands, [1, 0, 0, 0, 0], &[]).unwrap();
        s.set_knowledge(0, 0, CardKnowledge::exact(c(Red, 2)));
        let v = s.view(0);
        assert_eq!(card_probability(&v, 0, Predicate::Playable), 1.0);
        assert_eq!(card_probability(&v, 0, Predicate::Discardable), 0.0);
    }

    #[test]
    fn exhausted_identity_is_discardable() {
        // Red 2 on the table; a known red 2 in hand is dead.
        let hands: [&[Card]; 2] = [
            &[c(Red, 2), c(Blue, 1), c(Blue, 1), c(Green, 3), c(White, 4)],
            &[c(Yellow, 1), c(Yellow, 2), c(Yellow, 3), c(Yellow, 4), c(Green, 1)],
        ];
        let mut s = GameState::arranged(2, &hands, [2, 0, 0, 0, 0], &[]).unwrap();
        s.set_knowledge(0, 0, CardKnowledge::exact(c(Red, 2)));
        let v = s.view(0);
        assert_eq!(card_probability(&v, 0, Predicate::Discardable), 1.0);
    }

    #[test]
    fn reachability_stops_at_exhausted_value() {
        let discard = [c(Green, 3), c(Green, 3)];
        let m = TableMasks::new(&[0, 0, 1, 0, 0], &{
            let mut d = [0u8; NUM_IDENTITIES];
            for x in discard {
                d[x.index()] += 1;
            }
            d
        });
        assert_eq!(m.reachable[Green.index()], 2);
        assert_eq!(m.unavailable_points(), 3);
        assert!(m.discardable & c(Green, 4).bit() != 0);
        assert!(m.discardable & c(Green, 2).bit() == 0);
        assert!(m.playable & c(Green, 2).bit() != 0);
        assert!(m.plus_one & c(Green, 3).bit() != 0);
    }
}
