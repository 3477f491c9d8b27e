//! Rule library, the "playable now" convention, and rule-based policies.
//!
//! Each [`Rule`] proposes at most one action for the player to move.
//! [`rule_actions`] collects the proposals of a rule set in rule order,
//! merging duplicates and remembering which rules proposed each action.

mod convention;
pub mod policies;

use arrayvec::ArrayVec;
use rand::seq::IndexedRandom;
use rand::Rng;

pub use convention::{
    filter_illegal_convention_hints, is_illegal_under_convention, is_playable, slot_belief, Convention,
    HandBeliefs, Override,
};

use crate::engine::{Action, Card, CardKnowledge, Clue, TableMasks, View, MAX_HINTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    TellMostInformation,
    TellAnyoneAboutUseful,
    TellDispensable,
    CompleteTellUseful,
    CompleteTellDispensable,
    CompleteTellUnplayable,
    PlayProbablySafe,
    PlayProbablySafeLate,
    DiscardProbablyUseless,
}

pub const ALL_RULES: [Rule; 9] = [
    Rule::TellMostInformation,
    Rule::TellAnyoneAboutUseful,
    Rule::TellDispensable,
    Rule::CompleteTellUseful,
    Rule::CompleteTellDispensable,
    Rule::CompleteTellUnplayable,
    Rule::PlayProbablySafe,
    Rule::PlayProbablySafeLate,
    Rule::DiscardProbablyUseless,
];

pub const PLAY_SAFE_THRESHOLD: f64 = 0.7;
pub const PLAY_LATE_THRESHOLD: f64 = 0.4;
pub const LATE_DECK: usize = 5;

impl Rule {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Rule::TellMostInformation => "TellMostInformation",
            Rule::TellAnyoneAboutUseful => "TellAnyoneAboutUseful",
            Rule::TellDispensable => "TellDispensable",
            Rule::CompleteTellUseful => "CompleteTellUseful",
            Rule::CompleteTellDispensable => "CompleteTellDispensable",
            Rule::CompleteTellUnplayable => "CompleteTellUnplayable",
            Rule::PlayProbablySafe => "PlayProbablySafe",
            Rule::PlayProbablySafeLate => "PlayProbablySafeLate",
            Rule::DiscardProbablyUseless => "DiscardProbablyUseless",
        }
    }

    pub fn evaluate(self, ctx: &RuleContext<'_>) -> Option<Action> {
        match self {
            Rule::TellMostInformation => ctx.tell_most_information(),
            Rule::TellAnyoneAboutUseful => ctx.tell_about(|card, _, b| ctx.card_playable(card) && b.playable < 1.0),
            Rule::TellDispensable => ctx.tell_about(|card, _, b| ctx.card_discardable(card) && b.discardable < 1.0),
            Rule::CompleteTellUseful => ctx.complete_tell(|card| ctx.card_playable(card)),
            Rule::CompleteTellDispensable => ctx.complete_tell(|card| ctx.card_discardable(card)),
            Rule::CompleteTellUnplayable => {
                ctx.complete_tell(|card| !ctx.card_playable(card) && !ctx.card_discardable(card))
            }
            Rule::PlayProbablySafe => ctx.play_probably_safe(PLAY_SAFE_THRESHOLD),
            Rule::PlayProbablySafeLate => {
                if ctx.view.deck_len() <= LATE_DECK {
                    ctx.play_probably_safe(PLAY_LATE_THRESHOLD)
                } else {
                    None
                }
            }
            Rule::DiscardProbablyUseless => {
                if ctx.view.hints() < MAX_HINTS {
                    ctx.discard_most_useless()
                } else {
                    None
                }
            }
        }
    }
}

/// Bitset of rules.
pub type RuleTags = u16;

/// Up to one action per rule, in rule order, each with the rules that chose it.
pub type RuleActions = ArrayVec<(Action, RuleTags), 9>;

/// What the holder of a card believes about it.
#[derive(Clone, Copy, Debug, Default)]
pub struct SlotBelief {
    pub playable: f64,
    pub discardable: f64,
}

/// Everything a rule needs, computed once per decision.
pub struct RuleContext<'a> {
    pub view: View<'a>,
    pub convention: Convention,
    pub masks: TableMasks,
    /// The acting player's beliefs about their own hand.
    pub own: HandBeliefs,
}

impl<'a> RuleContext<'a> {
    pub fn new(view: View<'a>, convention: Convention) -> Self {
        let masks = TableMasks::from_view(&view);
        let own = HandBeliefs::compute(&view, view.me(), convention, &masks);
        RuleContext { view, convention, masks, own }
    }

    pub fn card_playable(&self, card: Card) -> bool {
        self.masks.playable & card.bit() != 0
    }

    pub fn card_discardable(&self, card: Card) -> bool {
        self.masks.discardable & card.bit() != 0
    }

    fn holder_belief(&self, player: usize, slot: usize) -> SlotBelief {
        match slot_belief(&self.view, player, slot, self.convention, &self.masks) {
            Some((d, _)) => SlotBelief {
                playable: d.probability(self.masks.playable),
                discardable: d.probability(self.masks.discardable),
            },
            None => SlotBelief::default(),
        }
    }

    /// Other players, nearest first.
    fn targets(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.view.n_players()).map(|o| self.view.seat_after(o))
    }

    fn hint_allowed(&self, action: Action) -> bool {
        !self.convention.playable_now || !is_illegal_under_convention(&self.view, action)
    }

    fn hint(&self, target: usize, clue: Clue) -> Option<Action> {
        let a = Action::Hint { target: target as u8, clue };
        (self.view.hints() > 0 && self.view.touched_by(target, clue) != 0 && self.hint_allowed(a)).then_some(a)
    }

    /// Knowledge changes a hint would cause: one point per card whose colour
    /// or value options shrink.
    pub fn hint_information(&self, target: usize, clue: Clue) -> u32 {
        let mut info = 0;
        for (_, card, k) in self.view.visible_hand(target) {
            info += new_information(&k, clue, clue.matches(card)) as u32;
        }
        info
    }

    fn tell_most_information(&self) -> Option<Action> {
        if self.view.hints() == 0 {
            return None;
        }
        let mut best: Option<(u32, Action)> = None;
        for target in self.targets() {
            for clue in Clue::all() {
                let Some(a) = self.hint(target, clue) else { continue };
                let info = self.hint_information(target, clue);
                if info > 0 && best.is_none_or(|(b, _)| info > b) {
                    best = Some((info, a));
                }
            }
        }
        best.map(|(_, a)| a)
    }

    /// Hint the first card (nearest player, lowest slot) satisfying `want`,
    /// naming its colour if unknown, else its value.
    fn tell_about(&self, want: impl Fn(Card, CardKnowledge, SlotBelief) -> bool) -> Option<Action> {
        if self.view.hints() == 0 {
            return None;
        }
        for target in self.targets() {
            for (slot, card, k) in self.view.visible_hand(target) {
                if k.knows_colour() && k.knows_value() {
                    continue;
                }
                if !want(card, k, self.holder_belief(target, slot)) {
                    continue;
                }
                let mut clues = [Clue::Colour(card.colour()), Clue::Value(card.value())];
                let mut known = [k.knows_colour(), k.knows_value()];
                // Under the convention a clue touching only this card says
                // more, so try it first when the card is for the next player.
                if self.convention.playable_now
                    && target == self.view.seat_after(1)
                    && self.view.touched_by(target, clues[0]).count_ones() > 1
                    && self.view.touched_by(target, clues[1]).count_ones() == 1
                {
                    clues.swap(0, 1);
                    known.swap(0, 1);
                }
                for (clue, known) in clues.into_iter().zip(known) {
                    if known {
                        continue;
                    }
                    if let Some(a) = self.hint(target, clue) {
                        return Some(a);
                    }
                }
            }
        }
        None
    }

    /// Supply the one missing dimension of a half-known card.
    fn complete_tell(&self, want: impl Fn(Card) -> bool) -> Option<Action> {
        if self.view.hints() == 0 {
            return None;
        }
        for target in self.targets() {
            for (_, card, k) in self.view.visible_hand(target) {
                if k.knows_colour() == k.knows_value() || !want(card) {
                    continue;
                }
                let clue = if k.knows_colour() { Clue::Value(card.value()) } else { Clue::Colour(card.colour()) };
                if let Some(a) = self.hint(target, clue) {
                    return Some(a);
                }
            }
        }
        None
    }

    pub fn play_probably_safe(&self, threshold: f64) -> Option<Action> {
        let (slot, p) = self.own.best(&self.own.playable)?;
        (p >= threshold).then_some(Action::Play(slot as u8))
    }

    pub fn discard_most_useless(&self) -> Option<Action> {
        self.own.best(&self.own.discardable).map(|(s, _)| Action::Discard(s as u8))
    }
}

/// Whether a hint changes this card's knowledge.
pub fn new_information(k: &CardKnowledge, clue: Clue, touched: bool) -> bool {
    let (mask, bit) = match clue {
        Clue::Colour(c) => (k.colour_mask(), 1u8 << c.index()),
        Clue::Value(v) => (k.value_mask(), 1u8 << (v - 1)),
    };
    if touched {
        mask != bit
    } else {
        mask & bit != 0 && mask != bit
    }
}

/// Actions proposed by `rules`, de-duplicated, in rule order. Never empty for
/// the player to move: if no rule fires, the most discardable card is
/// discarded, and failing that a random legal action is taken.
pub fn rule_actions<R: Rng + ?Sized>(
    view: &View<'_>,
    rules: &[Rule],
    convention: Convention,
    rng: &mut R,
) -> RuleActions {
    let ctx = RuleContext::new(*view, convention);
    let mut out = RuleActions::new();
    for &rule in rules {
        let Some(a) = rule.evaluate(&ctx) else { continue };
        debug_assert!(view.is_legal(a), "{} proposed illegal {a}", rule.name());
        match out.iter_mut().find(|(b, _)| *b == a) {
            Some((_, tags)) => *tags |= 1 << rule.index(),
            None => out.push((a, 1 << rule.index())),
        }
    }
    if out.is_empty() {
        let fallback = ctx
            .discard_most_useless()
            .or_else(|| view.legal_actions().choose(rng).copied());
        if let Some(a) = fallback {
            out.push((a, 0));
        }
    }
    out
}

/// Rules in `tags`, in rule order.
pub fn tag_rules(tags: RuleTags) -> impl Iterator<Item = Rule> {
    ALL_RULES.into_iter().filter(move |r| tags & (1 << r.index()) != 0)
}

/// Play the most probably playable own card when at least `threshold` sure.
pub fn play_probably_safe(view: &View<'_>, threshold: f64, convention: Convention) -> Option<Action> {
    RuleContext::new(*view, convention).play_probably_safe(threshold)
}

/// Own-slot probabilities, with the convention applied when enabled.
pub fn own_beliefs(view: &View<'_>, convention: Convention) -> HandBeliefs {
    let masks = TableMasks::from_view(view);
    HandBeliefs::compute(view, view.me(), convention, &masks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Colour, GameState};
    use crate::rng::rng_from_seed;

    fn c(s: &str) -> Card {
        s.parse().unwrap()
    }

    fn state(hands: &[&str], tableau: [u8; 5]) -> GameState {
        let hands: Vec<Vec<Card>> = hands.iter().map(|h| h.split_whitespace().map(c).collect()).collect();
        let refs: Vec<&[Card]> = hands.iter().map(|h| h.as_slice()).collect();
        GameState::arranged(refs.len(), &refs, tableau, &[]).unwrap()
    }

    #[test]
    fn hint_ties_go_to_the_next_player() {
        // Players 1 and 3 hold the same shape of hand; the next player wins.
        let s = state(&["R1 R2 R3 R4", "B1 G2 W3 Y4", "R5 B5 G5 W5", "B1 G2 W3 Y4"], [0; 5]);
        let ctx = RuleContext::new(s.view(0), Convention::OFF);
        let Some(Action::Hint { target, .. }) = Rule::TellMostInformation.evaluate(&ctx) else { panic!() };
        assert_eq!(target, 1);
        let Some(Action::Hint { target, clue }) = Rule::TellAnyoneAboutUseful.evaluate(&ctx) else { panic!() };
        assert_eq!((target, clue), (1, Clue::Colour(Colour::Blue)));
    }

    #[test]
    fn most_information_counts_changed_cards() {
        let s = state(&["R1 R2 R3 R4 R5", "B1 B2 B3 G4 W4"], [0; 5]);
        let ctx = RuleContext::new(s.view(0), Convention::OFF);
        // Any clue changes all five unknown cards, so the first clue wins.
        assert_eq!(ctx.hint_information(1, Clue::Colour(Colour::Blue)), 5);
        assert_eq!(
            Rule::TellMostInformation.evaluate(&ctx),
            Some(Action::Hint { target: 1, clue: Clue::Colour(Colour::Blue) })
        );
        let (s, _) = s.apply(Action::Hint { target: 1, clue: Clue::Colour(Colour::Blue) }).unwrap();
        let mut s = s;
        s.set_current_player(0);
        let ctx = RuleContext::new(s.view(0), Convention::OFF);
        assert_eq!(ctx.hint_information(1, Clue::Colour(Colour::Blue)), 0);
        // "Green" tells G4 its colour and W4 it is not green.
        assert_eq!(ctx.hint_information(1, Clue::Colour(Colour::Green)), 2);
        // "4" pins both fours and rules 4 out for the three blues.
        assert_eq!(ctx.hint_information(1, Clue::Value(4)), 5);
    }

    #[test]
    fn hints_exhausted_leaves_only_play_and_discard_rules() {
        let mut s = GameState::new(4, 3).unwrap();
        s.set_hints(0);
        let acts = rule_actions(&s.view(0), &ALL_RULES, Convention::OFF, &mut rng_from_seed(0));
        assert!(!acts.is_empty());
        assert!(acts.iter().all(|(a, _)| !a.is_hint()));
    }

    #[test]
    fn duplicate_recommendations_merge_tags() {
        // R1 is playable and G1... partner 1's R1 is both "useful" and the hint
        // carrying most information.
        let s = state(&["B2 B3 B4 W2 W3", "R1 Y3 Y4 G3 G4"], [0; 5]);
        let acts = rule_actions(&s.view(0), &ALL_RULES, Convention::OFF, &mut rng_from_seed(0));
        assert!(acts.len() <= 9);
        let mut seen = std::collections::HashSet::new();
        for (a, _) in &acts {
            assert!(seen.insert(*a), "duplicate {a}");
        }
        let total_tags: u32 = acts.iter().map(|(_, t)| t.count_ones()).sum();
        assert!(total_tags as usize >= acts.len());
        let useful = Action::Hint { target: 1, clue: Clue::Colour(Colour::Red) };
        let entry = acts.iter().find(|(a, _)| *a == useful).expect("tell useful fires");
        assert!(entry.1 & (1 << Rule::TellAnyoneAboutUseful.index()) != 0);
    }

    #[test]
    fn play_threshold_and_ties() {
        let mut s = state(&["R1 B1 G3 W4 Y4", "B2 B3 B4 G4 W1"], [0; 5]);
        for slot in [1, 0] {
            let card = s.hand(0)[slot].unwrap().card;
            s.set_knowledge(0, slot, CardKnowledge::exact(card));
        }
        let v = s.view(0);
        assert_eq!(play_probably_safe(&v, 0.7, Convention::OFF), Some(Action::Play(0)));
        let s2 = state(&["R1 B1 G3 W4 Y4", "B2 B3 B4 G4 W1"], [0; 5]);
        // Unknown cards are rarely playable: nothing reaches 0.7.
        assert_eq!(play_probably_safe(&s2.view(0), 0.7, Convention::OFF), None);
    }
}
