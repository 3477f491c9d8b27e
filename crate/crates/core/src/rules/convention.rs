//! Slot beliefs with the "playable now" convention.
//!
//! A hint that touches exactly one card of the next player says "this card
//! can be played now". The engine tags such a card with the identities that
//! were playable when the hint was given. With the convention on, a tagged
//! card's distribution is restricted to those identities. If none of them is
//! still unseen, the hinter cannot have meant "play": when the knowledge
//! admits one of them, the card is read as discardable instead.

use crate::engine::{Action, Card, Distribution, TableMasks, View, MAX_HAND};

/// Whether agents play by the "playable now" convention.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Convention {
    pub playable_now: bool,
}

impl Convention {
    pub const OFF: Convention = Convention { playable_now: false };
    pub const ON: Convention = Convention { playable_now: true };
}

/// How the convention changed a slot's distribution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Override {
    None,
    /// Restricted to the identities playable when the hint was given.
    Hinted,
    Discardable,
}

/// Distribution of `player`'s card in `slot` as the viewer believes that
/// player sees it, with the convention applied when enabled.
pub fn slot_belief(
    view: &View<'_>,
    player: usize,
    slot: usize,
    convention: Convention,
    masks: &TableMasks,
) -> Option<(Distribution, Override)> {
    let k = view.knowledge(player, slot)?;
    let d = Distribution::new(&view.unseen_by(player), &k);
    if !convention.playable_now || !k.is_convention_tagged() {
        return Some((d, Override::None));
    }
    let hinted = k.convention_mask();
    if let Some(r) = d.restricted(hinted) {
        return Some((r, Override::Hinted));
    }
    if k.identity_mask() & hinted != 0 {
        if let Some(r) = d.restricted(masks.discardable) {
            return Some((r, Override::Discardable));
        }
    }
    Some((d, Override::None))
}

/// Per-slot probabilities for one player's hand.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HandBeliefs {
    pub occupied: u8,
    pub playable: [f64; MAX_HAND],
    pub discardable: [f64; MAX_HAND],
    pub plus_one: [f64; MAX_HAND],
}

impl HandBeliefs {
    pub fn compute(view: &View<'_>, player: usize, convention: Convention, masks: &TableMasks) -> Self {
        let mut out = HandBeliefs::default();
        for slot in 0..MAX_HAND {
            let Some((d, _)) = slot_belief(view, player, slot, convention, masks) else { continue };
            out.occupied |= 1 << slot;
            out.playable[slot] = d.probability(masks.playable);
            out.discardable[slot] = d.probability(masks.discardable);
            out.plus_one[slot] = d.probability(masks.plus_one);
        }
        out
    }

    pub fn slots(&self) -> impl Iterator<Item = usize> + '_ {
        (0..MAX_HAND).filter(|s| self.occupied & (1 << s) != 0)
    }

    /// Slot with the highest value of `probs`; ties go to the lowest slot.
    pub fn best(&self, probs: &[f64; MAX_HAND]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for s in self.slots() {
            if best.is_none_or(|(_, p)| probs[s] > p) {
                best = Some((s, probs[s]));
            }
        }
        best
    }

    pub fn max_of(&self, probs: &[f64; MAX_HAND]) -> f64 {
        self.best(probs).map_or(0.0, |(_, p)| p)
    }
}

/// A hint that would be false under the convention: it touches exactly one
/// card of the hinter's next player and that card is not playable now.
pub fn is_illegal_under_convention(view: &View<'_>, action: Action) -> bool {
    let Action::Hint { target, clue } = action else { return false };
    let target = target as usize;
    if target != view.seat_after(1) {
        return false;
    }
    let touched = view.touched_by(target, clue);
    if touched.count_ones() != 1 {
        return false;
    }
    let slot = touched.trailing_zeros() as usize;
    let card = view.card(target, slot).expect("touched slot holds a visible card");
    !is_playable(view, card)
}

pub fn is_playable(view: &View<'_>, card: Card) -> bool {
    view.tableau()[card.colour().index()] + 1 == card.value()
}

/// Drop hints that would be false under the convention.
pub fn filter_illegal_convention_hints<I>(view: &View<'_>, candidates: I) -> Vec<Action>
where
    I: IntoIterator<Item = Action>,
{
    candidates.into_iter().filter(|&a| !is_illegal_under_convention(view, a)).collect()
}
