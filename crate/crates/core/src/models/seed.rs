//! Deterministic seed derivation for Monte Carlo substreams.
//!
//! Every sample draws from its own generator seeded by
//! `(master seed, canonical group key, sample index)`, so an estimate does not
//! depend on evaluation order or thread schedule.

use rand::SeedableRng;
use rand_pcg::Pcg64Mcg;

use super::GroupKey;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Order-sensitive combination of a running hash with one more word.
pub fn combine(acc: u64, word: u64) -> u64 {
    mix64(acc ^ mix64(word))
}

pub fn derive(master: u64, words: &[u64]) -> u64 {
    words.iter().fold(mix64(master), |acc, &w| combine(acc, w))
}

/// Seed shared by all samples of one group; `agents` must be sorted.
pub fn group_seed(master: u64, key: GroupKey, agents: &[usize]) -> u64 {
    let profession = key.profession.map_or(u64::MAX, u64::from);
    let head = derive(
        master,
        &[key.locality as u64, profession, agents.len() as u64],
    );
    agents.iter().fold(head, |acc, &a| combine(acc, a as u64))
}

pub fn sample_rng(group_seed: u64, sample: u32) -> Pcg64Mcg {
    Pcg64Mcg::seed_from_u64(combine(group_seed, u64::from(sample)))
}
