use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use super::freq::FreqTable;
use crate::error::{Error, Result};
use crate::name::DELIMITERS;

/// Splits on `-`, `_` and `.`. Empty segments are kept, so joining the
/// tokens with the delimiters gives back the input.
pub fn tokenize_on_delimiters(name: &str) -> (Vec<String>, Vec<char>) {
    let mut tokens = Vec::new();
    let mut delimiters = Vec::new();
    let mut current = String::new();
    for c in name.chars() {
        if DELIMITERS.contains(&c) {
            tokens.push(std::mem::take(&mut current));
            delimiters.push(c);
        } else {
            current.push(c);
        }
    }
    tokens.push(current);
    (tokens, delimiters)
}

pub fn join_tokens(tokens: &[String], delimiters: &[char]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(delimiters[i - 1]);
        }
        out.push_str(t);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct TokenBigramModel {
    pub(crate) first: FreqTable<String>,
    pub(crate) transitions: HashMap<String, FreqTable<String>>,
    pub(crate) unigram: FreqTable<String>,
    pub(crate) token_counts: FreqTable<usize>,
    pub(crate) delimiters: FreqTable<char>,
}

impl TokenBigramModel {
    pub fn token_count_distribution(&self) -> &FreqTable<usize> {
        &self.token_counts
    }

    pub fn delimiter_distribution(&self) -> &FreqTable<char> {
        &self.delimiters
    }

    pub fn first_tokens(&self) -> &FreqTable<String> {
        &self.first
    }

    pub fn successors(&self, token: &str) -> Option<&FreqTable<String>> {
        self.transitions.get(token)
    }

    pub fn probability(&self, token: &str, next: &str) -> f64 {
        self.transitions
            .get(token)
            .map_or(0.0, |t| t.probability(&next.to_owned()))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let n = if self.delimiters.is_empty() {
            1
        } else {
            *self.token_counts.sample(rng)
        };
        let mut out = String::new();
        let mut prev = self.first.sample(rng);
        out.push_str(prev);
        for _ in 1..n {
            out.push(*self.delimiters.sample(rng));
            let table = self.transitions.get(prev).unwrap_or(&self.unigram);
            prev = table.sample(rng);
            out.push_str(prev);
        }
        out
    }
}

/// The first token is drawn from the marginal distribution of first tokens;
/// a token with no observed successor falls back to the unigram table.
pub fn train_token_bigram<S: AsRef<str>>(names: &[S]) -> Result<TokenBigramModel> {
    if names.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut first = BTreeMap::new();
    let mut pairs: HashMap<String, BTreeMap<String, u64>> = HashMap::new();
    let mut unigram = BTreeMap::new();
    let mut counts = BTreeMap::new();
    let mut delims = BTreeMap::new();
    for name in names {
        let (tokens, delimiters) = tokenize_on_delimiters(name.as_ref());
        *counts.entry(tokens.len()).or_insert(0) += 1;
        *first.entry(tokens[0].clone()).or_insert(0) += 1;
        for d in delimiters {
            *delims.entry(d).or_insert(0) += 1;
        }
        for t in &tokens {
            *unigram.entry(t.clone()).or_insert(0) += 1;
        }
        for w in tokens.windows(2) {
            *pairs
                .entry(w[0].clone())
                .or_default()
                .entry(w[1].clone())
                .or_insert(0) += 1;
        }
    }
    Ok(TokenBigramModel {
        first: FreqTable::from_counts(first),
        transitions: pairs
            .into_iter()
            .map(|(k, v)| (k, FreqTable::from_counts(v)))
            .collect(),
        unigram: FreqTable::from_counts(unigram),
        token_counts: FreqTable::from_counts(counts),
        delimiters: FreqTable::from_counts(delims),
    })
}
