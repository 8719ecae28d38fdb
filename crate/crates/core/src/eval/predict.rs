use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Ranks teams by descending rating. Exact ties are ordered uniformly at
/// random using `rng`.
pub fn predict_ranks<R: Rng + ?Sized>(ratings: &[f64], rng: &mut R) -> Result<Vec<u32>> {
    if ratings.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 teams, got {}", ratings.len())));
    }
    if let Some(i) = ratings.iter().position(|r| !r.is_finite()) {
        return Err(Error::NonFiniteRating(i));
    }
    let mut order: Vec<usize> = (0..ratings.len()).collect();
    order.shuffle(rng);
    // Stable sort keeps the shuffled order within groups of equal ratings.
    order.sort_by(|&a, &b| ratings[b].total_cmp(&ratings[a]));
    let mut ranks = vec![0; ratings.len()];
    for (pos, &team) in order.iter().enumerate() {
        ranks[team] = pos as u32 + 1;
    }
    Ok(ranks)
}

/// Mixes a base seed with a match index and a source index into the seed of
/// one prediction's tie-break stream.
pub fn tie_break_seed(seed: u64, match_index: u64, source_index: u64) -> u64 {
    let mut z = seed
        ^ match_index.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ source_index.wrapping_mul(0xD1B5_4A32_D192_ED03);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
