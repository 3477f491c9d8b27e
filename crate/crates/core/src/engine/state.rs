use std::fmt;

use arrayvec::ArrayVec;
use rand::{Rng, SeedableRng};

use crate::engine::action::{Action, Clue, Outcome};
use crate::engine::card::{full_census, Card, Census, COLOURS, DECK_SIZE, NUM_IDENTITIES};
use crate::engine::knowledge::CardKnowledge;
use crate::engine::sample::{sample_assignment, sample_one, shuffle, shuffled_cards};
use crate::engine::view::{PlayerView, View};
use crate::engine::EngineError;
use crate::rng::GameRng;

pub const MAX_PLAYERS: usize = 5;
pub const MAX_HAND: usize = 5;
pub const MAX_HINTS: u8 = 8;
pub const MAX_LIVES: u8 = 3;

/// Upper bound on legal actions in any state (5 players, 4 cards each).
pub type ActionList = ArrayVec<Action, 48>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Slot {
    pub card: Card,
    pub knowledge: CardKnowledge,
}

pub type Hand = [Option<Slot>; MAX_HAND];

/// Hand size for a player count: 5 cards with 2-3 players, 4 with 4-5.
pub fn hand_size_for(n_players: usize) -> usize {
    if n_players <= 3 {
        5
    } else {
        4
    }
}

/// Full referee state. Cheap to clone; every field is inline.
///
/// Slots keep their position when a card leaves: the replacement draw goes
/// into the same slot, and once the deck is empty the slot stays vacant.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GameState {
    n_players: u8,
    hand_size: u8,
    hands: [Hand; MAX_PLAYERS],
    /// Top of the deck is the last element.
    deck: ArrayVec<Card, DECK_SIZE>,
    discard: Census,
    tableau: [u8; 5],
    hints: u8,
    lives: u8,
    current: u8,
    final_turns: Option<u8>,
    turn: u16,
}

impl GameState {
    /// Shuffle and deal a fresh game from `seed`.
    pub fn new(n_players: usize, seed: u64) -> Result<GameState, EngineError> {
        let mut rng = GameRng::seed_from_u64(seed);
        GameState::deal(n_players, &mut rng)
    }

    pub fn deal<R: Rng + ?Sized>(n_players: usize, rng: &mut R) -> Result<GameState, EngineError> {
        if !(2..=MAX_PLAYERS).contains(&n_players) {
            return Err(EngineError::PlayerCount(n_players));
        }
        let deck = shuffled_cards(&full_census(), rng);
        let mut state = GameState::empty(n_players);
        state.deck = deck;
        for p in 0..n_players {
            for s in 0..state.hand_size as usize {
                let card = state.deck.pop().expect("deck holds 50 cards");
                state.hands[p][s] = Some(Slot { card, knowledge: CardKnowledge::unknown() });
            }
        }
        Ok(state)
    }

    fn empty(n_players: usize) -> GameState {
        GameState {
            n_players: n_players as u8,
            hand_size: hand_size_for(n_players) as u8,
            hands: [[None; MAX_HAND]; MAX_PLAYERS],
            deck: ArrayVec::new(),
            discard: [0; NUM_IDENTITIES],
            tableau: [0; 5],
            hints: MAX_HINTS,
            lives: MAX_LIVES,
            current: 0,
            final_turns: None,
            turn: 0,
        }
    }

    /// Build a specific position: the given hands, tableau and discard pile,
    /// with every remaining card of the census in the deck (canonical order,
    /// top of deck last). Hints, lives and knowledge can be adjusted with the
    /// setters afterwards.
    pub fn arranged(
        n_players: usize,
        hands: &[&[Card]],
        tableau: [u8; 5],
        discard: &[Card],
    ) -> Result<GameState, EngineError> {
        if !(2..=MAX_PLAYERS).contains(&n_players) || hands.len() != n_players {
            return Err(EngineError::PlayerCount(n_players));
        }
        let mut state = GameState::empty(n_players);
        let mut remaining = full_census();
        let mut take = |c: Card| -> Result<(), EngineError> {
            let n = &mut remaining[c.index()];
            if *n == 0 {
                return Err(EngineError::Census(format!("too many copies of {c}")));
            }
            *n -= 1;
            Ok(())
        };
        for (ci, &top) in tableau.iter().enumerate() {
            if top > 5 {
                return Err(EngineError::Census(format!("tableau value {top}")));
            }
            for v in 1..=top {
                take(Card::new(COLOURS[ci], v))?;
            }
        }
        state.tableau = tableau;
        for &c in discard {
            take(c)?;
            state.discard[c.index()] += 1;
        }
        for (p, hand) in hands.iter().enumerate() {
            if hand.len() > state.hand_size as usize {
                return Err(EngineError::Census(format!("player {p} holds too many cards")));
            }
            for (s, &card) in hand.iter().enumerate() {
                take(card)?;
                state.hands[p][s] = Some(Slot { card, knowledge: CardKnowledge::unknown() });
            }
        }
        for (i, &n) in remaining.iter().enumerate().rev() {
            for _ in 0..n {
                state.deck.push(Card::from_index(i));
            }
        }
        Ok(state)
    }

    pub fn n_players(&self) -> usize {
        self.n_players as usize
    }

    pub fn hand_size(&self) -> usize {
        self.hand_size as usize
    }

    pub fn current_player(&self) -> usize {
        self.current as usize
    }

    pub fn hints(&self) -> u8 {
        self.hints
    }

    pub fn lives(&self) -> u8 {
        self.lives
    }

    pub fn tableau(&self) -> &[u8; 5] {
        &self.tableau
    }

    pub fn discard(&self) -> &Census {
        &self.discard
    }

    pub fn deck(&self) -> &[Card] {
        &self.deck
    }

    pub fn deck_len(&self) -> usize {
        self.deck.len()
    }

    pub fn final_turns(&self) -> Option<u8> {
        self.final_turns
    }

    /// Moves made so far.
    pub fn turn(&self) -> u16 {
        self.turn
    }

    pub fn hand(&self, player: usize) -> &Hand {
        &self.hands[player]
    }

    pub fn set_hints(&mut self, hints: u8) {
        self.hints = hints.min(MAX_HINTS);
    }

    pub fn set_lives(&mut self, lives: u8) {
        self.lives = lives.min(MAX_LIVES);
    }

    pub fn set_current_player(&mut self, player: usize) {
        assert!(player < self.n_players());
        self.current = player as u8;
    }

    pub fn set_knowledge(&mut self, player: usize, slot: usize, knowledge: CardKnowledge) {
        let s = self.hands[player][slot].as_mut().expect("occupied slot");
        s.knowledge = knowledge;
    }

    /// Reorder the deck so that `top` are the next cards drawn (first element
    /// drawn first). Every listed card must already be in the deck.
    pub fn stack_deck(&mut self, top: &[Card]) -> Result<(), EngineError> {
        let mut rest: Vec<Card> = self.deck.to_vec();
        for c in top {
            let pos = rest
                .iter()
                .position(|d| d == c)
                .ok_or_else(|| EngineError::Census(format!("{c} not in deck")))?;
            rest.remove(pos);
        }
        self.deck.clear();
        self.deck.extend(rest);
        self.deck.extend(top.iter().rev().copied());
        Ok(())
    }

    pub fn score(&self) -> u8 {
        self.tableau.iter().sum()
    }

    pub fn is_terminal(&self) -> bool {
        self.lives == 0 || self.final_turns == Some(0) || self.score() == 25
    }

    pub fn view(&self, player: usize) -> View<'_> {
        View::new(self, player)
    }

    /// Owned, scrubbed projection of this state for `player`.
    pub fn player_view(&self, player: usize) -> PlayerView {
        PlayerView::new(self, player)
    }

    /// Multiset of every card in every zone, played cards counted once per
    /// tableau step.
    pub fn zone_census(&self) -> Census {
        let mut c = self.discard;
        for (ci, &top) in self.tableau.iter().enumerate() {
            for v in 1..=top {
                c[Card::new(COLOURS[ci], v).index()] += 1;
            }
        }
        for card in self.deck.iter() {
            c[card.index()] += 1;
        }
        for hand in &self.hands[..self.n_players()] {
            for slot in hand.iter().flatten() {
                c[slot.card.index()] += 1;
            }
        }
        c
    }

    /// Card conservation: every zone together equals the 50-card census.
    pub fn check_conservation(&self) -> Result<(), EngineError> {
        for hand in &self.hands[..self.n_players()] {
            for slot in hand.iter().flatten() {
                if slot.card.is_hidden() {
                    return Err(EngineError::Census("hidden card in a full state".into()));
                }
            }
        }
        if self.deck.iter().any(|c| c.is_hidden()) {
            return Err(EngineError::Census("hidden card in a full state".into()));
        }
        if self.zone_census() != full_census() {
            return Err(EngineError::Census("zones do not match the census".into()));
        }
        Ok(())
    }

    /// Legal actions for the player to move.
    pub fn legal_actions(&self) -> ActionList {
        let mut out = ActionList::new();
        self.push_legal_actions(&mut out);
        out
    }

    /// Legal actions for `player`, who must be the player to move.
    pub fn legal_actions_for(&self, player: usize) -> Result<ActionList, EngineError> {
        if self.is_terminal() {
            return Err(EngineError::Terminal);
        }
        if player != self.current_player() {
            return Err(EngineError::OutOfTurn { player, current: self.current_player() });
        }
        Ok(self.legal_actions())
    }

    pub(crate) fn push_legal_actions(&self, out: &mut ActionList) {
        let me = self.current_player();
        for (s, slot) in self.hands[me].iter().enumerate() {
            if slot.is_some() {
                out.push(Action::Play(s as u8));
                out.push(Action::Discard(s as u8));
            }
        }
        if self.hints == 0 {
            return;
        }
        let n = self.n_players();
        for off in 1..n {
            let target = (me + off) % n;
            let mut colours = 0u8;
            let mut values = 0u8;
            for slot in self.hands[target].iter().flatten() {
                colours |= 1 << slot.card.colour().index();
                values |= 1 << (slot.card.value() - 1);
            }
            for c in 0..5 {
                if colours & (1 << c) != 0 {
                    out.push(Action::Hint { target: target as u8, clue: Clue::Colour(COLOURS[c]) });
                }
            }
            for v in 0..5 {
                if values & (1 << v) != 0 {
                    out.push(Action::Hint { target: target as u8, clue: Clue::Value(v + 1) });
                }
            }
        }
    }

    pub fn is_legal(&self, action: Action) -> bool {
        if self.is_terminal() {
            return false;
        }
        let me = self.current_player();
        match action {
            Action::Play(s) | Action::Discard(s) => {
                (s as usize) < MAX_HAND && self.hands[me][s as usize].is_some()
            }
            Action::Hint { target, clue } => {
                let t = target as usize;
                self.hints > 0
                    && t < self.n_players()
                    && t != me
                    && self.hands[t].iter().flatten().any(|s| clue.matches(s.card))
            }
        }
    }

    /// Pure transition: validates `action` and returns the successor.
    pub fn apply(&self, action: Action) -> Result<(GameState, Outcome), EngineError> {
        if self.is_terminal() {
            return Err(EngineError::Terminal);
        }
        if !self.is_legal(action) {
            return Err(EngineError::IllegalAction(action));
        }
        let mut next = self.clone();
        let outcome = next.step(action);
        Ok((next, outcome))
    }

    /// In-place transition for a legal action.
    pub fn step(&mut self, action: Action) -> Outcome {
        let mut outcome = self.resolve(action);
        let drew = self.end_turn(action.slot());
        outcome.set_drew(drew);
        outcome
    }

    /// First half of a move: resolve the action's effect without drawing a
    /// replacement card or passing the turn. A played or discarded slot is
    /// left vacant until `end_turn`.
    pub fn resolve(&mut self, action: Action) -> Outcome {
        debug_assert!(self.is_legal(action), "illegal {action} in\n{self:?}");
        let me = self.current_player();
        match action {
            Action::Play(s) => {
                let slot = self.hands[me][s as usize].take().expect("occupied slot");
                let card = slot.card;
                let ci = card.colour().index();
                let success = self.tableau[ci] + 1 == card.value();
                if success {
                    self.tableau[ci] += 1;
                    if card.value() == 5 {
                        self.hints = (self.hints + 1).min(MAX_HINTS);
                    }
                } else {
                    self.lives -= 1;
                    self.discard[card.index()] += 1;
                }
                Outcome::Play { slot: s, card, success, drew: false }
            }
            Action::Discard(s) => {
                let slot = self.hands[me][s as usize].take().expect("occupied slot");
                self.discard[slot.card.index()] += 1;
                self.hints = (self.hints + 1).min(MAX_HINTS);
                Outcome::Discard { slot: s, card: slot.card, drew: false }
            }
            Action::Hint { target, clue } => {
                self.hints -= 1;
                let t = target as usize;
                let mut touched = 0u8;
                for (i, slot) in self.hands[t].iter().enumerate() {
                    if let Some(slot) = slot {
                        if clue.matches(slot.card) {
                            touched |= 1 << i;
                        }
                    }
                }
                let single_to_next =
                    touched.count_ones() == 1 && t == (me + 1) % self.n_players();
                let playable_now = if single_to_next { self.playable_mask() } else { 0 };
                for (i, slot) in self.hands[t].iter_mut().enumerate() {
                    let Some(slot) = slot else { continue };
                    let hit = touched & (1 << i) != 0;
                    match clue {
                        Clue::Colour(c) => slot.knowledge.apply_colour_hint(c, hit),
                        Clue::Value(v) => slot.knowledge.apply_value_hint(v, hit),
                    }
                    if hit && single_to_next {
                        slot.knowledge.set_convention_mask(playable_now);
                    }
                }
                Outcome::Hint { target, clue, touched }
            }
        }
    }

    /// Identities that would be played successfully right now.
    pub fn playable_mask(&self) -> u32 {
        let mut mask = 0u32;
        for (ci, &top) in self.tableau.iter().enumerate() {
            if top < 5 {
                mask |= Card::new(COLOURS[ci], top + 1).bit();
            }
        }
        mask
    }

    /// Second half of a move: draw into `draw_slot` (if the move emptied one
    /// and the deck is not empty), run the end-game countdown and pass the
    /// turn. Returns whether a card was drawn.
    pub fn end_turn(&mut self, draw_slot: Option<u8>) -> bool {
        let mut drew = false;
        let mut countdown_started = false;
        if let Some(s) = draw_slot {
            if let Some(card) = self.deck.pop() {
                let me = self.current_player();
                self.hands[me][s as usize] = Some(Slot { card, knowledge: CardKnowledge::unknown() });
                drew = true;
                if self.deck.is_empty() {
                    self.final_turns = Some(self.n_players);
                    countdown_started = true;
                }
            }
        }
        if !countdown_started {
            if let Some(t) = self.final_turns.as_mut() {
                *t = t.saturating_sub(1);
            }
        }
        self.current = (self.current + 1) % self.n_players;
        self.turn += 1;
        drew
    }

    /// Resample `perspective`'s hand (and the deck order) uniformly from
    /// their information set. Every other zone is untouched.
    pub fn determinize<R: Rng + ?Sized>(
        &self,
        perspective: usize,
        rng: &mut R,
    ) -> Result<GameState, EngineError> {
        let mut next = self.clone();
        next.redeterminize_hand(perspective, rng)?;
        Ok(next)
    }

    /// In-place version of [`GameState::determinize`]. Returns the hand that
    /// was replaced.
    pub fn redeterminize_hand<R: Rng + ?Sized>(
        &mut self,
        player: usize,
        rng: &mut R,
    ) -> Result<Hand, EngineError> {
        let saved = self.hands[player];
        let mut pool = [0u8; NUM_IDENTITIES];
        for c in self.deck.iter() {
            pool[c.index()] += 1;
        }
        let mut slots: ArrayVec<usize, MAX_HAND> = ArrayVec::new();
        let mut masks: ArrayVec<u32, MAX_HAND> = ArrayVec::new();
        for (s, slot) in saved.iter().enumerate() {
            if let Some(slot) = slot {
                pool[slot.card.index()] += 1;
                slots.push(s);
                masks.push(slot.knowledge.identity_mask());
            }
        }
        let assignment =
            sample_assignment(&pool, &masks, rng).ok_or(EngineError::NoConsistentDeal(player))?;
        for (&s, &card) in slots.iter().zip(assignment.iter()) {
            pool[card.index()] -= 1;
            let slot = self.hands[player][s].as_mut().expect("occupied slot");
            slot.card = card;
        }
        self.deck = shuffled_cards(&pool, rng);
        Ok(saved)
    }

    /// Put `saved` back as `player`'s hand after a re-determinized move.
    ///
    /// The cards currently in the hand return to the deck, and each saved card
    /// is taken back out of it. `skip_slot` is the slot the move just played
    /// or discarded; it stays vacant for the replacement draw. A saved card
    /// with no copy left in the deck is still placed, leaving an over-census
    /// identity for [`GameState::remove_incompatible_cards`] to clear. The
    /// deck is reshuffled afterwards.
    pub fn restore_hand<R: Rng + ?Sized>(
        &mut self,
        player: usize,
        saved: &Hand,
        skip_slot: Option<u8>,
        rng: &mut R,
    ) {
        for slot in self.hands[player].iter_mut() {
            if let Some(s) = slot.take() {
                self.deck.push(s.card);
            }
        }
        for (s, saved_slot) in saved.iter().enumerate() {
            if skip_slot == Some(s as u8) {
                continue;
            }
            let Some(saved_slot) = saved_slot else { continue };
            if let Some(pos) = self.deck.iter().position(|&c| c == saved_slot.card) {
                self.deck.swap_remove(pos);
            }
            self.hands[player][s] = Some(*saved_slot);
        }
        shuffle(&mut self.deck, rng);
    }

    /// Empty every slot of `player` whose card is no longer consistent with
    /// the rest of the table (all copies of its identity accounted for
    /// elsewhere). Vacated slots keep their knowledge and hold
    /// `Card::HIDDEN` until [`GameState::determinize_empty_slots`] fills them.
    /// Returns the number of slots emptied.
    pub fn remove_incompatible_cards(&mut self, player: usize) -> usize {
        let census = full_census();
        let mut elsewhere = self.discard;
        for (ci, &top) in self.tableau.iter().enumerate() {
            for v in 1..=top {
                elsewhere[Card::new(COLOURS[ci], v).index()] += 1;
            }
        }
        for c in self.deck.iter() {
            elsewhere[c.index()] += 1;
        }
        for (p, hand) in self.hands[..self.n_players()].iter().enumerate() {
            if p == player {
                continue;
            }
            for slot in hand.iter().flatten() {
                if !slot.card.is_hidden() {
                    elsewhere[slot.card.index()] += 1;
                }
            }
        }
        let mut removed = 0;
        for slot in self.hands[player].iter_mut().flatten() {
            if slot.card.is_hidden() {
                continue;
            }
            let i = slot.card.index();
            if elsewhere[i] >= census[i] {
                slot.card = Card::HIDDEN;
                removed += 1;
            } else {
                elsewhere[i] += 1;
            }
        }
        removed
    }

    /// Fill `player`'s vacated (`Card::HIDDEN`) slots from the deck, uniformly
    /// among cards consistent with each slot's knowledge. A slot whose
    /// knowledge admits no deck card takes any deck card instead; the number
    /// of such relaxed fills is returned.
    pub fn determinize_empty_slots<R: Rng + ?Sized>(&mut self, player: usize, rng: &mut R) -> usize {
        let mut slots: ArrayVec<usize, MAX_HAND> = ArrayVec::new();
        let mut masks: ArrayVec<u32, MAX_HAND> = ArrayVec::new();
        for (s, slot) in self.hands[player].iter().enumerate() {
            if let Some(slot) = slot {
                if slot.card.is_hidden() {
                    slots.push(s);
                    masks.push(slot.knowledge.identity_mask());
                }
            }
        }
        if slots.is_empty() {
            return 0;
        }
        let mut pool = [0u8; NUM_IDENTITIES];
        for c in self.deck.iter() {
            pool[c.index()] += 1;
        }
        let mut relaxed = 0;
        let cards: ArrayVec<Card, MAX_HAND> = match sample_assignment(&pool, &masks, rng) {
            Some(a) => a,
            None => {
                // Slot by slot, relaxing only the slots that cannot be honoured.
                let mut out = ArrayVec::new();
                for &mask in &masks {
                    let card = match sample_one(&pool, mask, rng) {
                        Some(c) => c,
                        None => {
                            relaxed += 1;
                            sample_one(&pool, (1 << NUM_IDENTITIES) - 1, rng)
                                .expect("deck holds a card for every vacated slot")
                        }
                    };
                    pool[card.index()] -= 1;
                    out.push(card);
                }
                for c in &out {
                    pool[c.index()] += 1;
                }
                out
            }
        };
        for (&s, &card) in slots.iter().zip(cards.iter()) {
            let pos = self.deck.iter().position(|&c| c == card).expect("card drawn from deck");
            self.deck.swap_remove(pos);
            self.hands[player][s].as_mut().expect("occupied slot").card = card;
        }
        // swap_remove disturbs order only by moving the last card; reshuffle
        // so the deck stays a uniform permutation.
        shuffle(&mut self.deck, rng);
        if relaxed > 0 {
            crate::engine::note_relaxed_fills(relaxed);
        }
        relaxed
    }

    /// Replace the deck contents and each player's own-card identities with
    /// `Card::HIDDEN` for `player`. Used to build scrubbed views.
    pub(crate) fn scrub_for(&mut self, player: usize) {
        for slot in self.hands[player].iter_mut().flatten() {
            slot.card = Card::HIDDEN;
        }
        for c in self.deck.iter_mut() {
            *c = Card::HIDDEN;
        }
    }

    /// Overwrite `player`'s own cards and the deck from a sampled assignment.
    pub(crate) fn fill_hidden(&mut self, player: usize, hand: &[Card], deck: ArrayVec<Card, DECK_SIZE>) {
        let mut it = hand.iter();
        for slot in self.hands[player].iter_mut().flatten() {
            slot.card = *it.next().expect("assignment covers every slot");
        }
        self.deck = deck;
    }
}

impl fmt::Debug for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "turn {} player {} hints {} lives {} deck {} score {} final {:?}",
            self.turn,
            self.current,
            self.hints,
            self.lives,
            self.deck.len(),
            self.score(),
            self.final_turns
        )?;
        write!(f, "tableau")?;
        for (ci, &v) in self.tableau.iter().enumerate() {
            write!(f, " {}{}", COLOURS[ci].letter(), v)?;
        }
        writeln!(f)?;
        for p in 0..self.n_players() {
            write!(f, "p{p}:")?;
            for slot in &self.hands[p] {
                match slot {
                    Some(s) => write!(f, " {}", s.card)?,
                    None => write!(f, " --")?,
                }
            }
            writeln!(f)?;
        }
        Ok(())
    }
}
