use std::collections::{HashMap, HashSet};

use super::SequenceEngine;
use crate::error::{Error, Result};

/// Number of distinct Parikh vectors among the length-`n` factors of `word`.
pub fn abelian_complexity<T: Eq + std::hash::Hash + Copy>(word: &[T], n: usize) -> Result<usize> {
    if word.len() < n + 1 {
        return Err(Error::WindowTooSmall {
            n,
            prefix_len: word.len(),
        });
    }
    let mut letters: HashMap<T, usize> = HashMap::new();
    let coded: Vec<usize> = word
        .iter()
        .map(|c| {
            let next = letters.len();
            *letters.entry(*c).or_insert(next)
        })
        .collect();
    if letters.len() <= 2 {
        // Over two letters the Parikh vector is fixed by the count of letter 0.
        let mut seen = vec![false; n + 1];
        let mut zeros = coded[..n].iter().filter(|&&c| c == 0).count();
        seen[zeros] = true;
        for start in 1..=(coded.len() - n) {
            zeros -= (coded[start - 1] == 0) as usize;
            zeros += (coded[start + n - 1] == 0) as usize;
            seen[zeros] = true;
        }
        return Ok(seen.iter().filter(|&&b| b).count());
    }
    let mut counts = vec![0u32; letters.len()];
    for &c in &coded[..n] {
        counts[c] += 1;
    }
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    seen.insert(counts.clone());
    for start in 1..=(coded.len() - n) {
        counts[coded[start - 1]] -= 1;
        counts[coded[start + n - 1]] += 1;
        if !seen.contains(&counts) {
            seen.insert(counts.clone());
        }
    }
    Ok(seen.len())
}

/// Brute-force abelian complexity of the word produced by `word_engine`,
/// looking only at its first `prefix_len` letters.
pub fn abelian_oracle(word_engine: &SequenceEngine, n: usize, prefix_len: usize) -> Result<usize> {
    if prefix_len < n + 1 {
        return Err(Error::WindowTooSmall { n, prefix_len });
    }
    let word = word_engine.table(prefix_len)?.primary_values();
    abelian_complexity(&word, n)
}
