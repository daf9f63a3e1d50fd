//! Independent reference implementations shared by the test targets.
#![allow(dead_code)]

use std::collections::HashMap;

use bucketgen::corpus::{Corpus, CorpusKind, CorpusSet};
use rand::seq::SliceRandom;
use rand::Rng;

/// Minimum log10 guesses over every tiling of `name`, by enumeration.
///
/// A tiling splits the name into segments; each segment is either a corpus
/// token (cost: its best rank) or random (cost: 39^len), two random
/// segments may not touch, and the total is k! times the product of
/// segment costs. Single characters count as corpus tokens only when they
/// come from the symbol corpus.
pub fn brute_force_log10(name: &str, ranks: &HashMap<String, u32>, symbols: &HashMap<String, u32>) -> f64 {
    let n = name.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << (n - 1)) {
        let mut segments = Vec::new();
        let mut start = 0;
        for i in 1..n {
            if mask & (1 << (i - 1)) != 0 {
                segments.push(&name[start..i]);
                start = i;
            }
        }
        segments.push(&name[start..]);
        let ranks_of: Vec<Option<u32>> = segments
            .iter()
            .map(|s| {
                if s.len() == 1 {
                    symbols.get(*s).copied()
                } else {
                    ranks.get(*s).copied()
                }
            })
            .collect();
        let k = segments.len();
        for choice in 0u32..(1 << k) {
            // bit set: treat the segment as random
            let mut ok = true;
            let mut cost = (2..=k).map(|i| (i as f64).log10()).sum::<f64>();
            for (i, seg) in segments.iter().enumerate() {
                let random = choice & (1 << i) != 0;
                if random {
                    if i > 0 && choice & (1 << (i - 1)) != 0 {
                        ok = false;
                        break;
                    }
                    cost += seg.len() as f64 * 39f64.log10();
                } else {
                    match ranks_of[i] {
                        Some(r) => cost += (r as f64).log10(),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
            }
            if ok && cost < best {
                best = cost;
            }
        }
    }
    best
}

/// Random corpora over a tiny alphabet so that matches are common.
pub fn random_corpora(rng: &mut impl Rng, max_entries: usize) -> (CorpusSet, HashMap<String, u32>, HashMap<String, u32>) {
    let kinds = [CorpusKind::Dictionary, CorpusKind::TechTerm, CorpusKind::Password];
    let total = rng.gen_range(1..=max_entries);
    let mut lists: Vec<Vec<String>> = vec![Vec::new(); kinds.len()];
    for _ in 0..total {
        let len = rng.gen_range(2..=4);
        let tok: String = (0..len).map(|_| *b"abcde".choose(rng).unwrap() as char).collect();
        lists[rng.gen_range(0..kinds.len())].push(tok);
    }
    let mut ranks: HashMap<String, u32> = HashMap::new();
    let mut corpora = Vec::new();
    for (kind, list) in kinds.iter().zip(&lists) {
        let c = Corpus::from_tokens(*kind, list.iter().map(String::as_str));
        for (tok, rank) in c.iter() {
            let e = ranks.entry(tok.to_owned()).or_insert(rank);
            *e = (*e).min(rank);
        }
        corpora.push(c);
    }
    let symbols = Corpus::symbols();
    let sym: HashMap<String, u32> = symbols.iter().map(|(t, r)| (t.to_owned(), r)).collect();
    corpora.push(symbols);
    (CorpusSet::new(corpora), ranks, sym)
}

pub fn random_name(rng: &mut impl Rng, max_len: usize) -> String {
    let len = rng.gen_range(3..=max_len);
    (0..len).map(|_| *b"abcde01-".choose(rng).unwrap() as char).collect()
}
