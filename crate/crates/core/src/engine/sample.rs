//! Uniform sampling of hidden hands from an unseen-card census.
//!
//! A hand assignment maps each constrained slot to a distinct physical card
//! from the pool. Sampling is uniform over physical-card tuples: each slot is
//! filled in turn from the cards still available to it, and the tuple is kept
//! with probability `prod(available_s) / prod(initial_s)`, which cancels the
//! sequential proposal bias. Tight pools that keep rejecting fall back to
//! weighted enumeration, so a consistent assignment is always found when one
//! exists.

use arrayvec::ArrayVec;
use rand::Rng;

use crate::engine::card::{Card, Census, NUM_IDENTITIES};

const MAX_ATTEMPTS: usize = 2_000;

pub type Assignment = ArrayVec<Card, 5>;

#[inline]
fn masked_total(pool: &Census, mask: u32) -> u32 {
    let mut total = 0u32;
    let mut m = mask;
    while m != 0 {
        let i = m.trailing_zeros() as usize;
        total += pool[i] as u32;
        m &= m - 1;
    }
    total
}

#[inline]
fn pick_masked<R: Rng + ?Sized>(pool: &Census, mask: u32, total: u32, rng: &mut R) -> usize {
    let mut r = rng.random_range(0..total);
    let mut m = mask;
    loop {
        let i = m.trailing_zeros() as usize;
        let c = pool[i] as u32;
        if r < c {
            return i;
        }
        r -= c;
        m &= m - 1;
    }
}

/// Draw one card uniformly (by physical copy) among identities in `mask`.
pub fn sample_one<R: Rng + ?Sized>(pool: &Census, mask: u32, rng: &mut R) -> Option<Card> {
    let total = masked_total(pool, mask);
    (total > 0).then(|| Card::from_index(pick_masked(pool, mask, total, rng)))
}

/// Sample distinct physical cards for every mask, uniformly over all
/// consistent joint assignments. Returns `None` when no assignment exists.
pub fn sample_assignment<R: Rng + ?Sized>(
    pool: &Census,
    masks: &[u32],
    rng: &mut R,
) -> Option<Assignment> {
    debug_assert!(masks.len() <= 5);
    let mut initial = [0u32; 5];
    for (s, &mask) in masks.iter().enumerate() {
        initial[s] = masked_total(pool, mask);
        if initial[s] == 0 {
            return None;
        }
    }
    'attempt: for _ in 0..MAX_ATTEMPTS {
        let mut rem = *pool;
        let mut out = Assignment::new();
        let mut ratio = 1.0f64;
        for (s, &mask) in masks.iter().enumerate() {
            let avail = masked_total(&rem, mask);
            if avail == 0 {
                continue 'attempt;
            }
            let i = pick_masked(&rem, mask, avail, rng);
            rem[i] -= 1;
            ratio *= avail as f64 / initial[s] as f64;
            out.push(Card::from_index(i));
        }
        if ratio >= 1.0 || rng.random::<f64>() < ratio {
            return Some(out);
        }
    }
    enumerate_and_sample(pool, masks, rng)
}

/// Exact fallback: enumerate identity tuples weighted by the number of
/// physical-card tuples realising them, then draw one.
fn enumerate_and_sample<R: Rng + ?Sized>(
    pool: &Census,
    masks: &[u32],
    rng: &mut R,
) -> Option<Assignment> {
    fn walk(
        rem: &mut Census,
        masks: &[u32],
        prefix: &mut Assignment,
        weight: f64,
        out: &mut Vec<(Assignment, f64)>,
    ) {
        let Some((&mask, rest)) = masks.split_first() else {
            out.push((prefix.clone(), weight));
            return;
        };
        for i in 0..NUM_IDENTITIES {
            if mask & (1 << i) == 0 || rem[i] == 0 {
                continue;
            }
            let w = rem[i] as f64;
            rem[i] -= 1;
            prefix.push(Card::from_index(i));
            walk(rem, rest, prefix, weight * w, out);
            prefix.pop();
            rem[i] += 1;
        }
    }
    let mut rem = *pool;
    let mut all = Vec::new();
    walk(&mut rem, masks, &mut Assignment::new(), 1.0, &mut all);
    let total: f64 = all.iter().map(|(_, w)| w).sum();
    if all.is_empty() || total <= 0.0 {
        return None;
    }
    let mut r = rng.random::<f64>() * total;
    for (a, w) in &all {
        if r < *w {
            return Some(a.clone());
        }
        r -= w;
    }
    all.pop().map(|(a, _)| a)
}

/// Expand a census into physical cards and shuffle them.
pub fn shuffled_cards<R: Rng + ?Sized>(pool: &Census, rng: &mut R) -> ArrayVec<Card, 50> {
    let mut cards = ArrayVec::<Card, 50>::new();
    for (i, &n) in pool.iter().enumerate() {
        for _ in 0..n {
            cards.push(Card::from_index(i));
        }
    }
    shuffle(&mut cards, rng);
    cards
}

/// Fisher-Yates, drawing indices from the caller's stream.
pub fn shuffle<T, R: Rng + ?Sized>(items: &mut [T], rng: &mut R) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}
