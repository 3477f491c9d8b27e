//! Fixed heuristic policies used as teammates, rollout policies and
//! opponent models.
//!
//! Each policy is a cascade of simple rules; the first rule that fires
//! decides. If none fires, a random hint is given, else a random card is
//! discarded (even at the hint cap), so a policy never plays blind unless
//! its cascade says so.
//!
//! Cascades (probabilities are the actor's own, convention off):
//!
//! | policy   | cascade |
//! |----------|---------|
//! | random   | random legal action |
//! | cautious | play certain; tell useful; discard certain-useless; discard random |
//! | iggi     | play certain; tell useful; discard certain-useless; discard least-hinted |
//! | flawed   | play certain; play at 0.25; tell random; discard certain-useless; discard least-hinted; discard random |
//! | piers    | late hail mary; play certain; play at 0.6 with lives > 1; tell useful; tell dispensable with hints < 4; discard certain-useless; discard least-hinted; tell random; discard random |
//! | risky    | play at 0.6; tell useful; discard certain-useless; discard random |
//! | outer    | play certain; discard certain-useless; tell unknown; tell random; discard random |
//! | vdb      | play at 0.6 (certain on the last life); discard certain-useless; tell playable, clearest clue; tell most cards; discard most-likely-useless |
//!
//! Discard rules only fire below the hint cap.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{Convention, RuleContext};
use crate::engine::{Action, Clue, Distribution, EngineError, View, MAX_HINTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Baseline {
    Random,
    Cautious,
    Iggi,
    Flawed,
    Piers,
    Risky,
    Outer,
    VanDenBergh,
}

pub const BASELINES: [Baseline; 8] = [
    Baseline::Random,
    Baseline::Cautious,
    Baseline::Iggi,
    Baseline::Flawed,
    Baseline::Piers,
    Baseline::Risky,
    Baseline::Outer,
    Baseline::VanDenBergh,
];

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Random => "random",
            Baseline::Cautious => "cautious",
            Baseline::Iggi => "iggi",
            Baseline::Flawed => "flawed",
            Baseline::Piers => "piers",
            Baseline::Risky => "risky",
            Baseline::Outer => "outer",
            Baseline::VanDenBergh => "vdb",
        }
    }

    /// Choose a move for the player to move in `view`.
    pub fn act<R: Rng + ?Sized>(self, view: &View<'_>, rng: &mut R) -> Action {
        if self == Baseline::Random {
            return random_legal(view, rng);
        }
        let s = Steps { ctx: RuleContext::new(*view, Convention::OFF) };
        let picked = match self {
            Baseline::Random => unreachable!(),
            Baseline::Cautious => s
                .play_certain()
                .or_else(|| s.tell_useful())
                .or_else(|| s.discard_certain())
                .or_else(|| s.discard_random(rng)),
            Baseline::Iggi => s
                .play_certain()
                .or_else(|| s.tell_useful())
                .or_else(|| s.discard_certain())
                .or_else(|| s.discard_least_hinted()),
            Baseline::Flawed => s
                .play_certain()
                .or_else(|| s.play_at(0.25))
                .or_else(|| s.tell_random(rng))
                .or_else(|| s.discard_certain())
                .or_else(|| s.discard_least_hinted())
                .or_else(|| s.discard_random(rng)),
            Baseline::Piers => s
                .hail_mary()
                .or_else(|| s.play_certain())
                .or_else(|| if view.lives() > 1 { s.play_at(0.6) } else { None })
                .or_else(|| s.tell_useful())
                .or_else(|| if view.hints() < 4 { s.tell_dispensable() } else { None })
                .or_else(|| s.discard_certain())
                .or_else(|| s.discard_least_hinted())
                .or_else(|| s.tell_random(rng))
                .or_else(|| s.discard_random(rng)),
            Baseline::Risky => s
                .play_at(0.6)
                .or_else(|| s.tell_useful())
                .or_else(|| s.discard_certain())
                .or_else(|| s.discard_random(rng)),
            Baseline::Outer => s
                .play_certain()
                .or_else(|| s.discard_certain())
                .or_else(|| s.tell_unknown())
                .or_else(|| s.tell_random(rng))
                .or_else(|| s.discard_random(rng)),
            Baseline::VanDenBergh => (if view.lives() > 1 { s.play_at(0.6) } else { s.play_certain() })
                .or_else(|| s.discard_certain())
                .or_else(|| s.tell_playable_clearest())
                .or_else(|| s.tell_most_cards())
                .or_else(|| s.discard_likely()),
        };
        picked
            .or_else(|| s.tell_random(rng))
            .or_else(|| {
                let slots: Vec<usize> = view.occupied_slots(view.me()).collect();
                slots.choose(rng).map(|&s| Action::Discard(s as u8))
            })
            .unwrap_or_else(|| random_legal(view, rng))
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = EngineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BASELINES
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| EngineError::Parse(format!("unknown policy {s:?}")))
    }
}

/// The benchmark cascade as a free function.
pub fn van_den_bergh_policy<R: Rng + ?Sized>(view: &View<'_>, rng: &mut R) -> Action {
    Baseline::VanDenBergh.act(view, rng)
}

pub fn random_legal<R: Rng + ?Sized>(view: &View<'_>, rng: &mut R) -> Action {
    *view.legal_actions().choose(rng).expect("no legal action for the player to move")
}

struct Steps<'a> {
    ctx: RuleContext<'a>,
}

impl Steps<'_> {
    fn can_discard(&self) -> bool {
        self.ctx.view.hints() < MAX_HINTS
    }

    fn play_at(&self, threshold: f64) -> Option<Action> {
        self.ctx.play_probably_safe(threshold)
    }

    fn play_certain(&self) -> Option<Action> {
        self.play_at(1.0)
    }

    /// With the deck empty and lives to spare, play the likeliest card.
    fn hail_mary(&self) -> Option<Action> {
        if self.ctx.view.deck_len() == 0 && self.ctx.view.lives() > 1 {
            self.play_at(0.0)
        } else {
            None
        }
    }

    fn discard_certain(&self) -> Option<Action> {
        if !self.can_discard() {
            return None;
        }
        let own = &self.ctx.own;
        own.slots().find(|&s| own.discardable[s] >= 1.0).map(|s| Action::Discard(s as u8))
    }

    fn discard_likely(&self) -> Option<Action> {
        if !self.can_discard() {
            return None;
        }
        self.ctx.discard_most_useless()
    }

    /// Lowest slot among those with the fewest positive hints.
    fn discard_least_hinted(&self) -> Option<Action> {
        if !self.can_discard() {
            return None;
        }
        let v = &self.ctx.view;
        let me = v.me();
        v.occupied_slots(me)
            .min_by_key(|&s| v.knowledge(me, s).map_or(0, |k| k.positive_info()))
            .map(|s| Action::Discard(s as u8))
    }

    fn discard_random<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Action> {
        if !self.can_discard() {
            return None;
        }
        let slots: Vec<usize> = self.ctx.view.occupied_slots(self.ctx.view.me()).collect();
        slots.choose(rng).map(|&s| Action::Discard(s as u8))
    }

    fn tell_useful(&self) -> Option<Action> {
        super::Rule::TellAnyoneAboutUseful.evaluate(&self.ctx)
    }

    /// Hint the first playable card the holder is unsure of, nearest player
    /// and lowest slot first, with whichever clue leaves the holder most
    /// confident that it is playable.
    fn tell_playable_clearest(&self) -> Option<Action> {
        let v = &self.ctx.view;
        if v.hints() == 0 {
            return None;
        }
        let masks = &self.ctx.masks;
        for o in 1..v.n_players() {
            let target = v.seat_after(o);
            let unseen = v.unseen_by(target);
            for (_, card, k) in v.visible_hand(target) {
                if !self.ctx.card_playable(card) {
                    continue;
                }
                if Distribution::new(&unseen, &k).probability(masks.playable) >= 1.0 {
                    continue;
                }
                let mut best: Option<(f64, Action)> = None;
                for clue in [Clue::Colour(card.colour()), Clue::Value(card.value())] {
                    let mut after = k;
                    match clue {
                        Clue::Colour(c) => after.apply_colour_hint(c, true),
                        Clue::Value(x) => after.apply_value_hint(x, true),
                    }
                    if after == k {
                        continue;
                    }
                    let p = Distribution::new(&unseen, &after).probability(masks.playable);
                    if best.is_none_or(|(b, _)| p > b) {
                        best = Some((p, Action::Hint { target: target as u8, clue }));
                    }
                }
                if let Some((_, a)) = best {
                    return Some(a);
                }
            }
        }
        None
    }

    fn tell_dispensable(&self) -> Option<Action> {
        super::Rule::TellDispensable.evaluate(&self.ctx)
    }

    /// Hint something not yet known about the first card, nearest player
    /// first, that is not fully known.
    fn tell_unknown(&self) -> Option<Action> {
        let v = &self.ctx.view;
        if v.hints() == 0 {
            return None;
        }
        for o in 1..v.n_players() {
            let target = v.seat_after(o);
            for (_, card, k) in v.visible_hand(target) {
                let clue = if !k.knows_colour() {
                    Clue::Colour(card.colour())
                } else if !k.knows_value() {
                    Clue::Value(card.value())
                } else {
                    continue;
                };
                return Some(Action::Hint { target: target as u8, clue });
            }
        }
        None
    }

    fn tell_random<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Action> {
        let hints: Vec<Action> = self.ctx.view.legal_actions().into_iter().filter(|a| a.is_hint()).collect();
        hints.choose(rng).copied()
    }

    /// The hint touching the most cards; nearest player, then clue order.
    fn tell_most_cards(&self) -> Option<Action> {
        let v = &self.ctx.view;
        if v.hints() == 0 {
            return None;
        }
        let mut best: Option<(u32, Action)> = None;
        for o in 1..v.n_players() {
            let target = v.seat_after(o);
            for clue in Clue::all() {
                let n = v.touched_by(target, clue).count_ones();
                if n > 0 && best.is_none_or(|(b, _)| n > b) {
                    best = Some((n, Action::Hint { target: target as u8, clue }));
                }
            }
        }
        best.map(|(_, a)| a)
    }
}
