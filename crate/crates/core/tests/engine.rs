use std::collections::HashMap;

use rand::seq::IndexedRandom;
use ris_core::engine::*;
use ris_core::rng::rng_from_seed;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn c(s: &str) -> Card {
    s.parse().unwrap()
}

fn cards(s: &str) -> Vec<Card> {
    s.split_whitespace().map(c).collect()
}

fn arranged(hands: &[&str], tableau: [u8; 5], discard: &str) -> GameState {
    let owned: Vec<Vec<Card>> = hands.iter().map(|h| cards(h)).collect();
    let refs: Vec<&[Card]> = owned.iter().map(|h| h.as_slice()).collect();
    GameState::arranged(hands.len(), &refs, tableau, &cards(discard)).unwrap()
}

#[test]
fn deal_sizes() {
    let s = GameState::new(2, 11).unwrap();
    assert_eq!(s.deck_len(), 40);
    assert!((0..2).all(|p| s.hand(p).iter().flatten().count() == 5));
    let s = GameState::new(4, 11).unwrap();
    assert_eq!(s.deck_len(), 34);
    assert!((0..4).all(|p| s.hand(p).iter().flatten().count() == 4));
    assert_eq!(GameState::new(5, 99).unwrap(), GameState::new(5, 99).unwrap());
    assert_ne!(GameState::new(5, 99).unwrap(), GameState::new(5, 98).unwrap());
    assert_eq!(GameState::new(1, 0).unwrap_err(), EngineError::PlayerCount(1));
    assert_eq!(GameState::new(6, 0).unwrap_err(), EngineError::PlayerCount(6));
    assert_eq!((s.hints(), s.lives(), s.score()), (8, 3, 0));
}

#[test]
fn legal_action_counts() {
    let mut s = GameState::new(4, 5).unwrap();
    assert!(s.legal_actions().len() <= 32);
    s.set_hints(0);
    let acts = s.legal_actions();
    assert_eq!(acts.len(), 8);
    assert!(acts.iter().all(|a| !a.is_hint()));
    assert_eq!(
        s.legal_actions_for(1).unwrap_err(),
        EngineError::OutOfTurn { player: 1, current: 0 }
    );
}

#[test]
fn no_touch_hints_are_absent() {
    let s = arranged(&["R1 R2 B1 B2 G1", "B3 B4 G2 G3 W1"], [0; 5], "");
    let acts = s.legal_actions();
    let red = Action::Hint { target: 1, clue: Clue::Colour(Colour::Red) };
    let blue = Action::Hint { target: 1, clue: Clue::Colour(Colour::Blue) };
    assert!(!acts.contains(&red));
    assert!(acts.contains(&blue));
    assert!(!acts.contains(&Action::Hint { target: 1, clue: Clue::Value(5) }));
    assert_eq!(s.apply(red).unwrap_err(), EngineError::IllegalAction(red));
}

#[test]
fn play_in_and_out_of_sequence() {
    let s = arranged(&["R2 R3 B1 B2 G1", "B3 B4 G2 G3 W1"], [1, 0, 0, 0, 0], "");
    let (ok, outcome) = s.apply(Action::Play(0)).unwrap();
    assert_eq!(ok.tableau()[0], 2);
    assert_eq!(ok.lives(), 3);
    assert!(matches!(outcome, Outcome::Play { success: true, drew: true, .. }));

    let s = arranged(&["R3 R2 B1 B2 G1", "B3 B4 G2 G3 W1"], [0; 5], "");
    let (bad, _) = s.apply(Action::Play(0)).unwrap();
    assert_eq!(bad.tableau()[0], 0);
    assert_eq!(bad.lives(), 2);
    assert_eq!(bad.discard()[c("R3").index()], 1);
    // The input state is untouched.
    assert_eq!(s.lives(), 3);
}

#[test]
fn completing_a_five_respects_the_hint_cap() {
    let s = arranged(&["R5 B1 B1 B2 G1", "B3 B4 G2 G3 W1"], [4, 0, 0, 0, 0], "");
    assert_eq!(s.hints(), 8);
    let (next, _) = s.apply(Action::Play(0)).unwrap();
    assert_eq!(next.hints(), 8);
    let mut s = s;
    s.set_hints(5);
    let (next, _) = s.apply(Action::Play(0)).unwrap();
    assert_eq!(next.hints(), 6);
    // Discarding at eight hints is allowed and keeps the cap.
    let (next, _) = arranged(&["R5 B1 B1 B2 G1", "B3 B4 G2 G3 W1"], [0; 5], "")
        .apply(Action::Discard(1))
        .unwrap();
    assert_eq!(next.hints(), 8);
}

#[test]
fn score_examples() {
    let s = arranged(&["", ""], [0; 5], "");
    assert_eq!(s.score(), 0);
    let s = arranged(&["", ""], [5; 5], "");
    assert_eq!(s.score(), 25);
    assert!(s.is_terminal());
    let s = arranged(&["", ""], [3, 2, 4, 1, 2], "");
    assert_eq!(s.score(), 12);
}

#[test]
fn final_round_countdown() {
    // Deck holds a single card: after it is drawn every player gets one turn.
    let mut all: Vec<Card> = Card::all().flat_map(|k| std::iter::repeat_n(k, k.copies() as usize)).collect();
    let hand0: Vec<Card> = all.drain(..5).collect();
    let hand1: Vec<Card> = all.drain(..5).collect();
    let last = all.pop().unwrap();
    let s = GameState::arranged(2, &[&hand0, &hand1], [0; 5], &all).unwrap();
    assert_eq!(s.deck(), &[last]);
    let mut s = s;
    s.step(Action::Discard(0));
    assert_eq!(s.final_turns(), Some(2));
    assert!(!s.is_terminal());
    s.step(Action::Discard(0));
    assert_eq!(s.final_turns(), Some(1));
    s.step(Action::Discard(1));
    assert_eq!(s.final_turns(), Some(0));
    assert!(s.is_terminal());
}

#[test]
fn hint_updates_knowledge_and_convention_tag() {
    let mut s = arranged(&["R1 R2 B1 B2 G1", "B3 Y4 G2 G3 W1", "R3 R4 Y1 Y2 Y3"], [0; 5], "");
    let (next, outcome) = s.apply(Action::Hint { target: 1, clue: Clue::Colour(Colour::Blue) }).unwrap();
    assert_eq!(outcome, Outcome::Hint { target: 1, clue: Clue::Colour(Colour::Blue), touched: 0b00001 });
    let k0 = next.hand(1)[0].unwrap().knowledge;
    assert!(k0.knows_colour());
    assert!(k0.is_convention_tagged());
    assert_eq!(k0.convention_mask(), next.playable_mask());
    let k1 = next.hand(1)[1].unwrap().knowledge;
    assert!(!k1.admits(c("B4")) && k1.admits(c("Y4")));
    assert!(!k1.is_convention_tagged());
    assert_eq!(next.hints(), 7);

    // Single touch to a player who is not next: no tag.
    let (next, _) = s.apply(Action::Hint { target: 2, clue: Clue::Value(4) }).unwrap();
    assert!(!next.hand(2)[1].unwrap().knowledge.is_convention_tagged());

    // Two touched cards: no tag.
    s.set_current_player(2);
    let (next, _) = s.apply(Action::Hint { target: 0, clue: Clue::Colour(Colour::Red) }).unwrap();
    assert!(!next.hand(0)[0].unwrap().knowledge.is_convention_tagged());
}

/// Per-slot probability by walking the 50 physical cards one at a time.
fn enumerate_probability(view: &View<'_>, slot: usize, accept: impl Fn(Card) -> bool) -> f64 {
    let mut physical: Vec<Card> = Card::all().flat_map(|k| std::iter::repeat_n(k, k.copies() as usize)).collect();
    let mut remove = |card: Card| {
        let i = physical.iter().position(|&p| p == card).unwrap();
        physical.swap_remove(i);
    };
    for (ci, &top) in view.tableau().iter().enumerate() {
        for v in 1..=top {
            remove(Card::new(COLOURS[ci], v));
        }
    }
    for card in Card::all() {
        for _ in 0..view.discard()[card.index()] {
            remove(card);
        }
    }
    for p in 0..view.n_players() {
        for (_, card, _) in view.visible_hand(p) {
            remove(card);
        }
    }
    let k = view.knowledge(view.me(), slot).unwrap();
    let consistent: Vec<Card> = physical.into_iter().filter(|&p| k.admits(p)).collect();
    consistent.iter().filter(|&&p| accept(p)).count() as f64 / consistent.len() as f64
}

#[test]
fn card_probability_matches_enumeration() {
    let mut rng = rng_from_seed(42);
    let mut checked = 0;
    for game in 0..300 {
        let mut s = GameState::new(2 + game % 4, game as u64).unwrap();
        let steps = game % 40;
        for _ in 0..steps {
            if s.is_terminal() {
                break;
            }
            let a = *s.legal_actions().choose(&mut rng).unwrap();
            s.step(a);
        }
        if s.is_terminal() {
            continue;
        }
        let me = s.current_player();
        let view = s.view(me);
        let masks = TableMasks::from_view(&view);
        for slot in view.occupied_slots(me).collect::<Vec<_>>() {
            for (pred, mask) in [
                (Predicate::Playable, masks.playable),
                (Predicate::Discardable, masks.discardable),
                (Predicate::PlayablePlusOne, masks.plus_one),
            ] {
                let got = card_probability(&view, slot, pred);
                let want = enumerate_probability(&view, slot, |k| mask & k.bit() != 0);
                assert!((got - want).abs() < 1e-12, "{pred:?} slot {slot}: {got} vs {want}");
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn partial_knowledge_probability_by_hand() {
    // Told "red" on slot 0; R1 on the table, one R2 visible with the partner.
    let mut s = arranged(&["R3 B1 B1 B2 G1", "R2 Y4 G2 G3 W1"], [1, 0, 0, 0, 0], "");
    s.set_knowledge(0, 0, CardKnowledge::from_masks(0b00001, 0b11111));
    let v = s.view(0);
    // Unseen reds: R1 x2, R2 x1, R3 x2, R4 x2, R5 x1 = 8; playable R2 = 1.
    assert_eq!(card_probability(&v, 0, Predicate::Playable), 1.0 / 8.0);
    // Discardable: the two R1s.
    assert_eq!(card_probability(&v, 0, Predicate::Discardable), 2.0 / 8.0);
}

/// Reduced deck: only red and blue cards are unseen by player 0.
fn reduced_state() -> GameState {
    let partner = "G1 G2 W3 Y4 Y5";
    let mut discard = Vec::new();
    let mut pool: Vec<Card> = Card::all()
        .filter(|k| !matches!(k.colour(), Colour::Red | Colour::Blue))
        .flat_map(|k| std::iter::repeat_n(k, k.copies() as usize))
        .collect();
    for p in cards(partner) {
        let i = pool.iter().position(|&x| x == p).unwrap();
        pool.swap_remove(i);
    }
    discard.extend(pool);
    let own = cards("R1 R5 B2 B1 R3");
    let s = GameState::arranged(2, &[&own, &cards(partner)], [0; 5], &discard).unwrap();
    let mut s = s;
    s.set_knowledge(0, 0, CardKnowledge::from_masks(0b00001, 0b11111));
    s.set_knowledge(0, 1, CardKnowledge::from_masks(0b00011, 0b11110));
    s.set_knowledge(0, 3, CardKnowledge::from_masks(0b00011, 0b00001));
    s
}

/// Exact per-slot marginals of the joint hand distribution.
fn joint_marginals(view: &View<'_>) -> Vec<HashMap<Card, f64>> {
    let unseen = view.unseen();
    let masks: Vec<u32> = (0..5).map(|s| view.knowledge(0, s).unwrap().identity_mask()).collect();
    let mut marg = vec![HashMap::new(); 5];
    let mut total = 0.0;
    fn walk(
        rem: &mut Census,
        masks: &[u32],
        prefix: &mut Vec<Card>,
        w: f64,
        total: &mut f64,
        marg: &mut [HashMap<Card, f64>],
    ) {
        if prefix.len() == masks.len() {
            *total += w;
            for (s, &k) in prefix.iter().enumerate() {
                *marg[s].entry(k).or_insert(0.0) += w;
            }
            return;
        }
        let mask = masks[prefix.len()];
        for k in Card::all() {
            if mask & k.bit() == 0 || rem[k.index()] == 0 {
                continue;
            }
            let n = rem[k.index()] as f64;
            rem[k.index()] -= 1;
            prefix.push(k);
            walk(rem, masks, prefix, w * n, total, marg);
            prefix.pop();
            rem[k.index()] += 1;
        }
    }
    let mut rem = unseen;
    walk(&mut rem, &masks, &mut Vec::new(), 1.0, &mut total, &mut marg);
    for m in marg.iter_mut() {
        for v in m.values_mut() {
            *v /= total;
        }
    }
    marg
}

#[test]
fn determinize_is_uniform_on_reduced_deck() {
    let s = reduced_state();
    let view = s.view(0);
    let unseen = view.unseen();
    assert!(Card::all().all(|k| unseen[k.index()] == 0 || matches!(k.colour(), Colour::Red | Colour::Blue)));
    let exact = joint_marginals(&view);
    let mut rng = rng_from_seed(7);
    let n = 10_000;
    let mut counts = vec![HashMap::<Card, f64>::new(); 5];
    for _ in 0..n {
        let d = s.determinize(0, &mut rng).unwrap();
        d.check_conservation().unwrap();
        assert_eq!(d.player_view(0), s.player_view(0));
        for slot in 0..5 {
            *counts[slot].entry(d.hand(0)[slot].unwrap().card).or_insert(0.0) += 1.0;
        }
    }
    for slot in 0..5 {
        let mut stat = 0.0;
        let mut df = 0;
        for (k, &p) in &exact[slot] {
            let expected = p * n as f64;
            let observed = counts[slot].get(k).copied().unwrap_or(0.0);
            stat += (observed - expected).powi(2) / expected;
            df += 1;
        }
        assert!(counts[slot].keys().all(|k| exact[slot].contains_key(k)));
        if df > 1 {
            let p = 1.0 - ChiSquared::new((df - 1) as f64).unwrap().cdf(stat);
            assert!(p > 0.01, "slot {slot}: chi2 {stat} df {} p {p}", df - 1);
        }
    }
}

#[test]
fn fully_identified_slot_never_changes() {
    let mut s = GameState::new(3, 4).unwrap();
    let card = s.hand(0)[2].unwrap().card;
    s.set_knowledge(0, 2, CardKnowledge::exact(card));
    let mut rng = rng_from_seed(1);
    let mut differs = false;
    for _ in 0..500 {
        let d = s.determinize(0, &mut rng).unwrap();
        assert_eq!(d.hand(0)[2].unwrap().card, card);
        differs |= d.hand(0) != s.hand(0);
        for p in 1..3 {
            assert_eq!(d.hand(p), s.hand(p));
        }
    }
    assert!(differs);
}

#[test]
fn remove_incompatible_empties_exhausted_identity() {
    // Player 1 truly holds Y5 in slot 1. In the re-determinized branch the Y5
    // sat in slot 0 and was discarded.
    let truth = arranged(&["R1 R2 B1 B2 G1", "B3 Y5 G2 G3 W1"], [0; 5], "");
    let saved = *truth.hand(1);
    let mut rng = rng_from_seed(3);
    let mut s = arranged(&["R1 R2 B1 B2 G1", "Y5 B3 G2 G3 W1"], [0; 5], "");
    s.set_current_player(1);
    s.resolve(Action::Discard(0));
    s.restore_hand(1, &saved, Some(0), &mut rng);
    assert_eq!(s.remove_incompatible_cards(1), 1);
    assert!(s.hand(1)[1].unwrap().card.is_hidden());
    assert!(s.hand(1)[0].is_none());
    assert_eq!(s.determinize_empty_slots(1, &mut rng), 0);
    s.end_turn(Some(0));
    s.check_conservation().unwrap();
    assert_eq!(s.discard()[c("Y5").index()], 1);
}

#[test]
fn remove_incompatible_without_contradiction_is_exact() {
    let mut s = GameState::new(4, 21).unwrap();
    let before = s.clone();
    assert_eq!(s.remove_incompatible_cards(2), 0);
    assert_eq!(s, before);
}

/// Player 1's saved hand holds R5 and Y5 while the branch discarded both.
fn two_contradictions() -> GameState {
    let truth = arranged(&["R1 R2 B1 B2 G1", "R5 Y5 G2 G3 W1"], [0; 5], "");
    let mut saved = *truth.hand(1);
    saved[0].as_mut().unwrap().knowledge = CardKnowledge::from_masks(0b00001, 0b11111);
    let mut s = arranged(&["R1 R2 B1 B2 G1", "B3 B4 G2 G3 W1"], [0; 5], "R5 Y5");
    s.restore_hand(1, &saved, None, &mut rng_from_seed(0));
    s
}

fn census_excess(s: &GameState) -> usize {
    let z = s.zone_census();
    Card::all().map(|k| z[k.index()].saturating_sub(k.copies()) as usize).sum()
}

#[test]
fn remove_incompatible_two_contradictions() {
    let mut s = two_contradictions();
    assert_eq!(census_excess(&s), 2);
    assert_eq!(s.remove_incompatible_cards(1), 2);
    assert!(s.hand(1)[0].unwrap().card.is_hidden());
    assert!(s.hand(1)[1].unwrap().card.is_hidden());
    let mut rng = rng_from_seed(8);
    assert_eq!(s.determinize_empty_slots(1, &mut rng), 0);
    s.check_conservation().unwrap();
}

#[test]
fn determinize_empty_slots_examples() {
    let mut s = GameState::new(3, 2).unwrap();
    let before = s.clone();
    let mut rng = rng_from_seed(5);
    assert_eq!(s.determinize_empty_slots(1, &mut rng), 0);
    assert_eq!(s, before);

    // Slot 0 is known red, slot 1 is unconstrained.
    let mut seen = std::collections::HashSet::new();
    for _ in 0..300 {
        let mut t = two_contradictions();
        t.remove_incompatible_cards(1);
        t.determinize_empty_slots(1, &mut rng);
        assert_eq!(t.hand(1)[0].unwrap().card.colour(), Colour::Red);
        seen.insert(t.hand(1)[1].unwrap().card.colour());
        t.check_conservation().unwrap();
    }
    assert_eq!(seen.len(), 5);
}
