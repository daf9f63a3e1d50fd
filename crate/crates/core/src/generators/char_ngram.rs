use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use super::freq::FreqTable;
use crate::error::{Error, Result};
use crate::name;

/// Start-of-name padding character. Never part of a legal name.
pub const START: char = '^';

pub const DEFAULT_ORDER: usize = 5;

/// Character Markov model of a fixed order with backoff.
///
/// Transitions are stored for every context length from `order - 1` down to
/// zero, so a context unseen at full length can fall back to its suffixes.
#[derive(Clone, Debug, PartialEq)]
pub struct CharNGramModel {
    pub(crate) order: usize,
    pub(crate) transitions: HashMap<String, FreqTable<char>>,
    pub(crate) lengths: FreqTable<usize>,
}

impl CharNGramModel {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn length_distribution(&self) -> &FreqTable<usize> {
        &self.lengths
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&str, &FreqTable<char>)> + '_ {
        self.transitions.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// P(next | context) as stored, without backoff.
    pub fn probability(&self, context: &str, next: char) -> f64 {
        self.transitions
            .get(context)
            .map_or(0.0, |t| t.probability(&next))
    }

    fn next_char<R: Rng + ?Sized>(&self, history: &[char], rng: &mut R) -> char {
        let window = &history[history.len() - (self.order - 1)..];
        let mut context: String = window.iter().collect();
        loop {
            if let Some(table) = self.transitions.get(&context) {
                return *table.sample(rng);
            }
            // The empty context holds every training character, so this ends.
            context.remove(0);
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let len = *self.lengths.sample(rng);
        let mut history = vec![START; self.order - 1];
        for _ in 0..len {
            let c = self.next_char(&history, rng);
            history.push(c);
        }
        history[self.order - 1..].iter().collect()
    }
}

/// Trains on every name. Lengths outside the legal range are clamped into
/// it for the length distribution.
pub fn train_char_ngram<S: AsRef<str>>(names: &[S], order: usize) -> Result<CharNGramModel> {
    if order < 2 {
        return Err(Error::Config(format!("n-gram order must be at least 2, got {order}")));
    }
    let mut counts: HashMap<String, BTreeMap<char, u64>> = HashMap::new();
    let mut lengths = BTreeMap::new();
    let mut seen_any = false;
    for name in names {
        let chars: Vec<char> = name.as_ref().chars().collect();
        if chars.is_empty() {
            continue;
        }
        seen_any = true;
        let len = chars.len().clamp(name::MIN_LEN, name::MAX_LEN);
        *lengths.entry(len).or_insert(0) += 1;

        let mut padded = vec![START; order - 1];
        padded.extend_from_slice(&chars);
        for i in order - 1..padded.len() {
            for ctx_len in 0..order {
                let context: String = padded[i - ctx_len..i].iter().collect();
                *counts
                    .entry(context)
                    .or_default()
                    .entry(padded[i])
                    .or_insert(0) += 1;
            }
        }
    }
    if !seen_any {
        return Err(Error::EmptyTrainingSet);
    }
    Ok(CharNGramModel {
        order,
        transitions: counts
            .into_iter()
            .map(|(k, v)| (k, FreqTable::from_counts(v)))
            .collect(),
        lengths: FreqTable::from_counts(lengths),
    })
}
