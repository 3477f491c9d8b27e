use rand::Rng;

use crate::engine::action::{Action, Clue};
use crate::engine::card::{full_census, Card, Census, COLOURS, NUM_IDENTITIES};
use crate::engine::knowledge::CardKnowledge;
use crate::engine::sample::{sample_assignment, shuffled_cards};
use crate::engine::state::{ActionList, GameState, MAX_HAND};
use crate::engine::EngineError;

/// A borrowed information-set lens on a state for one player.
///
/// Exposes everything `me` may see: public zones, other players' cards, and
/// the hint knowledge of every hand. Never exposes `me`'s own card identities
/// or the deck order. Rules, features and agents only ever see game states
/// through this type.
#[derive(Clone, Copy)]
pub struct View<'a> {
    state: &'a GameState,
    me: usize,
}

impl<'a> View<'a> {
    pub(crate) fn new(state: &'a GameState, me: usize) -> Self {
        debug_assert!(me < state.n_players());
        View { state, me }
    }

    pub fn me(&self) -> usize {
        self.me
    }

    pub fn n_players(&self) -> usize {
        self.state.n_players()
    }

    pub fn hand_size(&self) -> usize {
        self.state.hand_size()
    }

    pub fn hints(&self) -> u8 {
        self.state.hints()
    }

    pub fn lives(&self) -> u8 {
        self.state.lives()
    }

    pub fn deck_len(&self) -> usize {
        self.state.deck_len()
    }

    pub fn tableau(&self) -> &'a [u8; 5] {
        self.state.tableau()
    }

    pub fn discard(&self) -> &'a Census {
        self.state.discard()
    }

    pub fn score(&self) -> u8 {
        self.state.score()
    }

    pub fn current_player(&self) -> usize {
        self.state.current_player()
    }

    pub fn final_turns(&self) -> Option<u8> {
        self.state.final_turns()
    }

    pub fn turn(&self) -> u16 {
        self.state.turn()
    }

    pub fn is_terminal(&self) -> bool {
        self.state.is_terminal()
    }

    /// Seat `offset` places after `me` in turn order.
    pub fn seat_after(&self, offset: usize) -> usize {
        (self.me + offset) % self.n_players()
    }

    /// Card held by another player; `None` for own slots and vacant slots.
    #[inline]
    pub fn card(&self, player: usize, slot: usize) -> Option<Card> {
        if player == self.me {
            return None;
        }
        self.state.hand(player)[slot].map(|s| s.card)
    }

    #[inline]
    pub fn knowledge(&self, player: usize, slot: usize) -> Option<CardKnowledge> {
        self.state.hand(player)[slot].map(|s| s.knowledge)
    }

    pub fn occupied_slots(&self, player: usize) -> impl Iterator<Item = usize> + 'a {
        let hand = self.state.hand(player);
        (0..MAX_HAND).filter(move |&s| hand[s].is_some())
    }

    /// Cards visible in `player`'s hand as `(slot, card, knowledge)`; empty
    /// for `me`.
    pub fn visible_hand(&self, player: usize) -> impl Iterator<Item = (usize, Card, CardKnowledge)> + 'a {
        let hand = self.state.hand(player);
        let hidden = player == self.me;
        (0..MAX_HAND).filter_map(move |s| {
            if hidden {
                return None;
            }
            hand[s].map(|slot| (s, slot.card, slot.knowledge))
        })
    }

    /// Bitmask of `target`'s slots a hint with `clue` would touch.
    pub fn touched_by(&self, target: usize, clue: Clue) -> u8 {
        let mut mask = 0;
        for (s, card, _) in self.visible_hand(target) {
            if clue.matches(card) {
                mask |= 1 << s;
            }
        }
        mask
    }

    /// Legal actions when it is `me`'s turn, empty otherwise.
    pub fn legal_actions(&self) -> ActionList {
        let mut out = ActionList::new();
        if self.current_player() == self.me && !self.is_terminal() {
            self.state.push_legal_actions(&mut out);
        }
        out
    }

    pub fn is_legal(&self, action: Action) -> bool {
        self.current_player() == self.me && self.state.is_legal(action)
    }

    /// Cards `me` cannot see: the census minus discards, the tableau and the
    /// other players' hands. Own hand and deck together hold exactly these.
    pub fn unseen(&self) -> Census {
        let mut c = full_census();
        let discard = self.discard();
        for i in 0..NUM_IDENTITIES {
            c[i] -= discard[i];
        }
        for (ci, &top) in self.tableau().iter().enumerate() {
            for v in 1..=top {
                c[Card::new(COLOURS[ci], v).index()] -= 1;
            }
        }
        for p in 0..self.n_players() {
            if p == self.me {
                continue;
            }
            for slot in self.state.hand(p).iter().flatten() {
                let i = slot.card.index();
                c[i] = c[i].saturating_sub(1);
            }
        }
        c
    }

    /// What `player` cannot see, as far as `me` can tell: `me`'s own cards
    /// stay unknown, so for another player this is `me`'s unseen pool plus
    /// that player's hand.
    pub fn unseen_by(&self, player: usize) -> Census {
        let mut c = self.unseen();
        if player != self.me {
            for (_, card, _) in self.visible_hand(player) {
                c[card.index()] += 1;
            }
        }
        c
    }

    /// Sample a full state from `me`'s information set: own hand honouring
    /// hint knowledge, deck a uniform shuffle of the rest.
    pub fn determinize<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GameState, EngineError> {
        let mut pool = self.unseen();
        let mut masks = arrayvec::ArrayVec::<u32, MAX_HAND>::new();
        for s in self.occupied_slots(self.me) {
            masks.push(self.knowledge(self.me, s).expect("occupied").identity_mask());
        }
        let total: usize = pool.iter().map(|&n| n as usize).sum();
        if total != masks.len() + self.deck_len() {
            return Err(EngineError::Census("unseen pool does not match hand and deck".into()));
        }
        let hand = sample_assignment(&pool, &masks, rng).ok_or(EngineError::NoConsistentDeal(self.me))?;
        for c in &hand {
            pool[c.index()] -= 1;
        }
        let deck = shuffled_cards(&pool, rng);
        let mut state = self.state.clone();
        state.fill_hidden(self.me, &hand, deck);
        Ok(state)
    }

    /// The position after `me` gives `hint`, still seen by `me`. Hints reveal
    /// no hidden card, so this needs no determinization.
    pub fn after_hint(&self, hint: Action) -> Result<PlayerView, EngineError> {
        if !hint.is_hint() {
            return Err(EngineError::IllegalAction(hint));
        }
        let (next, _) = self.state.apply(hint)?;
        Ok(PlayerView::new(&next, self.me))
    }

    pub fn to_owned(&self) -> PlayerView {
        PlayerView::new(self.state, self.me)
    }
}

/// Owned projection of a state for one player: own card identities and the
/// deck contents are replaced by `Card::HIDDEN`.
///
/// Agents get only this. The scrubbed state inside is private:
///
/// ```compile_fail
/// let s = ris_core::GameState::new(4, 1).unwrap();
/// let pv = s.player_view(0);
/// let peek = pv.state.hand(0)[0];
/// ```
///
/// and even a determinization made from it has no way back to the real cards:
///
/// ```
/// use ris_core::rng::rng_from_seed;
/// let s = ris_core::GameState::new(4, 1).unwrap();
/// let mine: Vec<_> = s.hand(0).iter().flatten().map(|h| h.card).collect();
/// let pv = s.player_view(0);
/// let differs = (0..50).any(|k| {
///     let d = pv.determinize(&mut rng_from_seed(k)).unwrap();
///     d.hand(0).iter().flatten().map(|h| h.card).collect::<Vec<_>>() != mine
/// });
/// assert!(differs);
/// ```
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PlayerView {
    state: GameState,
    me: usize,
}

impl PlayerView {
    pub fn new(state: &GameState, me: usize) -> Self {
        let mut scrubbed = state.clone();
        scrubbed.scrub_for(me);
        PlayerView { state: scrubbed, me }
    }

    pub fn view(&self) -> View<'_> {
        View::new(&self.state, self.me)
    }

    pub fn me(&self) -> usize {
        self.me
    }

    pub fn determinize<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GameState, EngineError> {
        self.view().determinize(rng)
    }
}
