use std::collections::HashMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cards::{Card, Hand, Seat};
use crate::combinatorics::{binomial, multinomial};
use crate::rules::GameState;

use super::infoset::InfoSet;
use super::WorldsError;

/// Location of every card not yet played: the three hands and the skat.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Configuration {
    pub hands: [Hand; 3],
    pub skat: Hand,
}

impl Configuration {
    pub fn from_game(state: &GameState) -> Configuration {
        Configuration {
            hands: state.hands,
            skat: state.skat,
        }
    }

    /// Holder of `card`: 0..=2 for seats, 3 for the skat.
    pub fn location(&self, card: Card) -> Option<usize> {
        if self.skat.contains(card) {
            return Some(SKAT);
        }
        self.hands.iter().position(|h| h.contains(card))
    }

    fn holding(&self, loc: usize) -> Hand {
        if loc == SKAT {
            self.skat
        } else {
            self.hands[loc]
        }
    }
}

/// A configuration plus the skat as it was dealt.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct State {
    pub config: Configuration,
    pub dealt_skat: Hand,
}

impl State {
    pub fn from_game(state: &GameState) -> State {
        State {
            config: Configuration::from_game(state),
            dealt_skat: state.dealt_skat,
        }
    }
}

/// Location index of the skat in location masks.
pub const SKAT: usize = 3;

/// Exact index space of the configurations consistent with an information set.
///
/// Unseen cards are grouped by the set of locations they may occupy; a
/// configuration's index is a mixed-radix number over per-group splits and
/// per-location combination ranks, which makes counting, ranking and
/// unranking all exact.
#[derive(Clone, Debug)]
pub struct WorldSpace {
    info: InfoSet,
    fixed: Configuration,
    groups: Vec<Group>,
    caps: [u8; 4],
    /// Completions of groups `g..` for each reachable capacity vector.
    memo: HashMap<(u8, [u8; 4]), u64>,
    count: u64,
    multiplicity: u64,
}

#[derive(Clone, Debug)]
struct Group {
    mask: u8,
    cards: Vec<Card>,
}

impl WorldSpace {
    pub fn new(info: &InfoSet) -> WorldSpace {
        let unseen = info.unseen();
        let mut fixed = Configuration {
            hands: [Hand::EMPTY; 3],
            skat: info.known_skat.unwrap_or(Hand::EMPTY),
        };
        fixed.hands[info.viewer.index()] = info.own_hand;
        if let Some(s) = info.soloist {
            fixed.hands[s.index()] = fixed.hands[s.index()].union(info.exposed_in_hand());
        }
        let mut caps = [0u8; 4];
        for seat in Seat::ALL {
            let i = seat.index();
            caps[i] = info.hand_counts[i].saturating_sub(fixed.hands[i].len()) as u8;
        }
        caps[SKAT] = info.skat_count.saturating_sub(fixed.skat.len()) as u8;

        let mut by_mask: Vec<Group> = Vec::new();
        for card in unseen.iter() {
            let mut mask = 0u8;
            for seat in Seat::ALL {
                if caps[seat.index()] > 0 && info.may_hold(seat, card) {
                    mask |= 1 << seat.index();
                }
            }
            if caps[SKAT] > 0 {
                mask |= 1 << SKAT;
            }
            match by_mask.iter_mut().find(|g| g.mask == mask) {
                Some(g) => g.cards.push(card),
                None => by_mask.push(Group { mask, cards: vec![card] }),
            }
        }
        by_mask.sort_by_key(|g| g.mask);
        let mut space = WorldSpace {
            info: info.clone(),
            fixed,
            groups: by_mask,
            caps,
            memo: HashMap::new(),
            count: 0,
            multiplicity: info.state_multiplicity(),
        };
        let total_cards: usize = space.groups.iter().map(|g| g.cards.len()).sum();
        let total_caps: usize = caps.iter().map(|&c| c as usize).sum();
        space.count = if total_cards == total_caps {
            space.fill_memo(0, caps)
        } else {
            0
        };
        space
    }

    pub fn info(&self) -> &InfoSet {
        &self.info
    }

    pub fn count_configurations(&self) -> u64 {
        self.count
    }

    pub fn state_multiplicity(&self) -> u64 {
        self.multiplicity
    }

    pub fn count_states(&self) -> u64 {
        self.count * self.multiplicity
    }

    fn fill_memo(&mut self, g: usize, caps: [u8; 4]) -> u64 {
        if g == self.groups.len() {
            return u64::from(caps == [0; 4]);
        }
        if let Some(&v) = self.memo.get(&(g as u8, caps)) {
            return v;
        }
        let mut total = 0u64;
        for split in splits(self.groups[g].mask, self.groups[g].cards.len() as u8, caps) {
            let rest = self.fill_memo(g + 1, sub(caps, split));
            total += rest * split_ways(split);
        }
        self.memo.insert((g as u8, caps), total);
        total
    }

    fn completions(&self, g: usize, caps: [u8; 4]) -> u64 {
        if g == self.groups.len() {
            return u64::from(caps == [0; 4]);
        }
        self.memo.get(&(g as u8, caps)).copied().unwrap_or(0)
    }

    pub fn unrank(&self, mut idx: u64) -> Configuration {
        assert!(idx < self.count, "configuration index out of range");
        let mut config = self.fixed;
        let mut caps = self.caps;
        for (g, group) in self.groups.iter().enumerate() {
            for split in splits(group.mask, group.cards.len() as u8, caps) {
                let rest = self.completions(g + 1, sub(caps, split));
                let block = rest * split_ways(split);
                if idx >= block {
                    idx -= block;
                    continue;
                }
                let inner = idx / rest;
                idx %= rest;
                place_group(&group.cards, split, inner, &mut config);
                caps = sub(caps, split);
                break;
            }
        }
        config
    }

    /// Inverse of [`WorldSpace::unrank`]; `None` when `c` is not in the space.
    pub fn rank(&self, c: &Configuration) -> Option<u64> {
        if !self.consistent(c) {
            return None;
        }
        let mut idx = 0u64;
        let mut caps = self.caps;
        for (g, group) in self.groups.iter().enumerate() {
            let mut actual = [0u8; 4];
            for &card in &group.cards {
                actual[c.location(card)?] += 1;
            }
            for split in splits(group.mask, group.cards.len() as u8, caps) {
                let rest = self.completions(g + 1, sub(caps, split));
                if split == actual {
                    idx += rank_group(&group.cards, split, c) * rest;
                    break;
                }
                idx += rest * split_ways(split);
            }
            caps = sub(caps, actual);
        }
        Some(idx)
    }

    pub fn consistent(&self, c: &Configuration) -> bool {
        let info = &self.info;
        let mut all = c.skat;
        for h in c.hands {
            if !all.is_disjoint(h) {
                return false;
            }
            all = all.union(h);
        }
        if all != info.deck.cards.minus(info.all_played()) {
            return false;
        }
        for seat in Seat::ALL {
            let h = c.hands[seat.index()];
            if h.len() != info.hand_counts[seat.index()] || !self.fixed.hands[seat.index()].is_subset(h) {
                return false;
            }
            if seat != info.viewer && h.minus(self.fixed.hands[seat.index()]).iter().any(|x| !info.may_hold(seat, x)) {
                return false;
            }
        }
        c.hands[info.viewer.index()] == info.own_hand
            && c.skat.len() == info.skat_count
            && self.fixed.skat.is_subset(c.skat)
    }

    pub fn consistent_state(&self, s: &State) -> bool {
        self.consistent(&s.config) && self.states_for_configuration(&s.config).contains(s)
    }

    /// The soloist's twelve cards after a pickup, as implied by `c`.
    fn soloist_twelve(&self, c: &Configuration) -> Option<Hand> {
        let s = self.info.soloist?.index();
        Some(c.hands[s].union(self.info.played[s]).union(c.skat))
    }

    /// The one or C(hand + skat, skat) states that share configuration `c`.
    pub fn states_for_configuration(&self, c: &Configuration) -> Vec<State> {
        (0..self.multiplicity).map(|j| self.state_of(c, j)).collect()
    }

    fn state_of(&self, c: &Configuration, j: u64) -> State {
        let dealt_skat = if self.info.hidden_pickup() {
            let twelve = self.soloist_twelve(c).expect("pickup implies a soloist").cards();
            let picks = unrank_combination(twelve.len() as u64, self.info.deck.skat_size as u64, j);
            Hand::from_cards(picks.into_iter().map(|p| twelve[p]))
        } else if let Some(k) = self.info.known_dealt_skat {
            k
        } else {
            c.skat
        };
        State { config: *c, dealt_skat }
    }

    pub fn unrank_state(&self, idx: u64) -> State {
        let c = self.unrank(idx / self.multiplicity);
        self.state_of(&c, idx % self.multiplicity)
    }

    pub fn rank_state(&self, s: &State) -> Option<u64> {
        let ci = self.rank(&s.config)?;
        let j = (0..self.multiplicity).find(|&j| self.state_of(&s.config, j) == *s)?;
        Some(ci * self.multiplicity + j)
    }

    pub fn configurations(&self) -> impl Iterator<Item = Configuration> + '_ {
        (0..self.count).map(|i| self.unrank(i))
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.count_states()).map(|i| self.unrank_state(i))
    }

    /// Up to `k` distinct indices uniformly without replacement from `[0, n)`, ascending.
    fn sample_indices(n: u64, k: usize, seed: u64) -> Vec<u64> {
        if n <= k as u64 {
            return (0..n).collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<u64> = index::sample(&mut rng, n as usize, k).into_iter().map(|i| i as u64).collect();
        v.sort_unstable();
        v
    }

    /// The full enumeration when it has at most `k` elements, else `k` distinct uniform draws.
    pub fn sample_configurations(&self, k: usize, seed: u64) -> Result<Vec<Configuration>, WorldsError> {
        if self.count == 0 {
            return Err(WorldsError::Contradictory);
        }
        Ok(Self::sample_indices(self.count, k, seed).into_iter().map(|i| self.unrank(i)).collect())
    }

    pub fn sample_states(&self, k: usize, seed: u64) -> Result<Vec<State>, WorldsError> {
        if self.count == 0 {
            return Err(WorldsError::Contradictory);
        }
        let n = self.count_states();
        Ok(Self::sample_indices(n, k, seed).into_iter().map(|i| self.unrank_state(i)).collect())
    }

    /// Deal implied by a state: each seat's dealt hand plus the dealt skat.
    pub fn dealt(&self, s: &State) -> ([Hand; 3], Hand) {
        let info = &self.info;
        let mut hands = [0, 1, 2].map(|i| s.config.hands[i].union(info.played[i]));
        if info.picked_up {
            let sol = info.soloist.expect("pickup implies a soloist").index();
            hands[sol] = hands[sol].union(s.config.skat).minus(s.dealt_skat);
        }
        (hands, s.dealt_skat)
    }
}

fn sub(a: [u8; 4], b: [u8; 4]) -> [u8; 4] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

fn split_ways(split: [u8; 4]) -> u64 {
    multinomial(&split.map(u64::from))
}

/// All ways to spread `n` cards over the locations in `mask` within `caps`, lexicographic.
fn splits(mask: u8, n: u8, caps: [u8; 4]) -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    let mut cur = [0u8; 4];
    fn rec(l: usize, left: u8, mask: u8, caps: &[u8; 4], cur: &mut [u8; 4], out: &mut Vec<[u8; 4]>) {
        if l == 4 {
            if left == 0 {
                out.push(*cur);
            }
            return;
        }
        let max = if mask & (1 << l) != 0 { left.min(caps[l]) } else { 0 };
        for a in 0..=max {
            cur[l] = a;
            rec(l + 1, left - a, mask, caps, cur, out);
        }
        cur[l] = 0;
    }
    rec(0, n, mask, &caps, &mut cur, &mut out);
    out
}

/// Positions of the `idx`-th `k`-subset of `0..n` in the combinatorial number system.
fn unrank_combination(n: u64, k: u64, mut idx: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(k as usize);
    let mut hi = n;
    for i in (1..=k).rev() {
        let mut c = hi - 1;
        while binomial(c, i) > idx {
            c -= 1;
        }
        idx -= binomial(c, i);
        out.push(c as usize);
        hi = c;
    }
    out.reverse();
    out
}

fn rank_combination(positions: &[usize]) -> u64 {
    positions
        .iter()
        .enumerate()
        .map(|(i, &p)| binomial(p as u64, i as u64 + 1))
        .sum()
}

fn place_group(cards: &[Card], split: [u8; 4], mut inner: u64, config: &mut Configuration) {
    let mut remaining: Vec<Card> = cards.to_vec();
    for (loc, &a) in split.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let radix = binomial(remaining.len() as u64, u64::from(a));
        let r = inner % radix;
        inner /= radix;
        let picks = unrank_combination(remaining.len() as u64, u64::from(a), r);
        let chosen: Vec<Card> = picks.iter().map(|&p| remaining[p]).collect();
        for &c in &chosen {
            if loc == SKAT {
                config.skat.insert(c);
            } else {
                config.hands[loc].insert(c);
            }
        }
        remaining.retain(|c| !chosen.contains(c));
    }
}

fn rank_group(cards: &[Card], split: [u8; 4], c: &Configuration) -> u64 {
    let mut remaining: Vec<Card> = cards.to_vec();
    let mut inner = 0u64;
    let mut scale = 1u64;
    for (loc, &a) in split.iter().enumerate() {
        if a == 0 {
            continue;
        }
        let radix = binomial(remaining.len() as u64, u64::from(a));
        let held = c.holding(loc);
        let positions: Vec<usize> = (0..remaining.len()).filter(|&i| held.contains(remaining[i])).collect();
        inner += rank_combination(&positions) * scale;
        scale *= radix;
        remaining.retain(|x| !held.contains(*x));
    }
    inner
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_ranks_round_trip() {
        for idx in 0..binomial(12u64, 2) {
            let p = unrank_combination(12, 2, idx);
            assert!(p[0] < p[1]);
            assert_eq!(rank_combination(&p), idx);
        }
        for idx in 0..binomial(10u64, 4) {
            assert_eq!(rank_combination(&unrank_combination(10, 4, idx)), idx);
        }
    }

    #[test]
    fn splits_respect_mask_and_caps() {
        let s = splits(0b1011, 3, [2, 9, 1, 1]);
        assert!(s.iter().all(|x| x[2] == 0 && x[0] <= 2 && x[3] <= 1));
        assert!(s.iter().all(|x| x.iter().sum::<u8>() == 3));
        assert_eq!(s.len(), 6);
    }
}
