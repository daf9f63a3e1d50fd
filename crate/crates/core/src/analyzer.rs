//! Token decomposition and guessability.
//!
//! A name is tiled into corpus-matched tokens and the random gaps between
//! them. Among all such tilings, [`decompose`] returns one with the smallest
//! estimated guess count, where a tiling of `k` tokens costs
//!
//! ```text
//! k! * prod(cost(token))      cost(corpus) = rank, cost(random) = 39^len
//! ```
//!
//! Corpus matches need at least two characters, except symbol-corpus matches
//! which are single characters. Two random tokens are never adjacent: a random
//! token always spans the whole gap between matches.
//!
//! L33t-speak variants are not matched; such names fall out as random tokens.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusKind, CorpusSet, Match};
use crate::error::{Error, Result};
use crate::name;

/// Size of the provider-legal alphabet used for random-token cost.
pub const RANDOM_ALPHABET: usize = 39;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum TokenClass {
    Corpus { kind: CorpusKind, rank: u32 },
    Random,
}

impl TokenClass {
    pub fn is_random(&self) -> bool {
        matches!(self, TokenClass::Random)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    #[serde(flatten)]
    pub class: TokenClass,
    pub start: usize,
    pub end: usize,
}

impl Token {
    /// log10 of this token's contribution to the guess product.
    pub fn log10_cost(&self) -> f64 {
        match self.class {
            TokenClass::Corpus { rank, .. } => (rank as f64).log10(),
            TokenClass::Random => random_log10_cost(self.end - self.start),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TokenDecomposition {
    pub name: String,
    pub tokens: Vec<Token>,
    pub log10_guesses: f64,
    pub shannon_entropy_bits: f64,
}

impl TokenDecomposition {
    pub fn is_pure_random(&self) -> bool {
        self.tokens.len() == 1 && self.tokens[0].class.is_random()
    }
}

pub fn random_log10_cost(len: usize) -> f64 {
    len as f64 * (RANDOM_ALPHABET as f64).log10()
}

fn log10_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).log10()).sum()
}

/// Splits `name` into corpus and random tokens minimizing the estimated
/// number of guesses.
pub fn decompose(name: &str, corpora: &CorpusSet) -> Result<TokenDecomposition> {
    name::check(name)?;
    let (tokens, log10_guesses) = min_cost_tiling(name, corpora);
    Ok(TokenDecomposition {
        name: name.to_owned(),
        tokens,
        log10_guesses,
        shannon_entropy_bits: entropy_bits(name),
    })
}

#[derive(Clone, Copy)]
struct Cell {
    cost: f64,
    prev_pos: usize,
    prev_random: bool,
    matched: Option<Match>,
}

const EMPTY: Cell = Cell {
    cost: f64::INFINITY,
    prev_pos: 0,
    prev_random: false,
    matched: None,
};

/// Minimum-cost tiling of any lowercase ASCII string (no length check).
/// Returns the tokens and the log10 guess estimate.
pub(crate) fn min_cost_tiling(s: &str, corpora: &CorpusSet) -> (Vec<Token>, f64) {
    let n = s.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    debug_assert!(s.is_ascii());

    let max_len = corpora.max_token_len().max(1);
    let mut matches: Vec<Vec<(usize, Match)>> = vec![Vec::new(); n];
    let mut starts_match = vec![false; n + 1];
    for (i, slot) in matches.iter_mut().enumerate() {
        for j in i + 1..=n.min(i + max_len) {
            if let Some(m) = corpora.lookup_substring(&s[i..j]) {
                slot.push((j, m));
            }
        }
        starts_match[i] = !slot.is_empty();
    }
    // A random token may only end where a match starts or at the end.
    let random_ends: Vec<usize> = (1..=n).filter(|&j| j == n || starts_match[j]).collect();

    let step = |k: usize| (k as f64).log10();
    let random_char = (RANDOM_ALPHABET as f64).log10();
    // cells[pos][k][last_was_random]
    let idx = |pos: usize, k: usize, r: bool| (pos * (n + 1) + k) * 2 + r as usize;
    let mut cells = vec![EMPTY; (n + 1) * (n + 1) * 2];
    cells[idx(0, 0, false)].cost = 0.0;

    for pos in 0..n {
        for k in 0..=pos {
            for last_random in [false, true] {
                let cur = cells[idx(pos, k, last_random)];
                if !cur.cost.is_finite() {
                    continue;
                }
                let arity = step(k + 1);
                for &(j, m) in &matches[pos] {
                    let c = cur.cost + (m.rank as f64).log10() + arity;
                    let cell = &mut cells[idx(j, k + 1, false)];
                    if c < cell.cost {
                        *cell = Cell {
                            cost: c,
                            prev_pos: pos,
                            prev_random: last_random,
                            matched: Some(m),
                        };
                    }
                }
                if !last_random {
                    for &j in random_ends.iter().filter(|&&j| j > pos) {
                        let c = cur.cost + (j - pos) as f64 * random_char + arity;
                        let cell = &mut cells[idx(j, k + 1, true)];
                        if c < cell.cost {
                            *cell = Cell {
                                cost: c,
                                prev_pos: pos,
                                prev_random: false,
                                matched: None,
                            };
                        }
                    }
                }
            }
        }
    }

    let (mut k, mut last_random, best) = (1..=n)
        .flat_map(|k| [(k, false), (k, true)])
        .map(|(k, r)| (k, r, cells[idx(n, k, r)].cost))
        .fold((0, false, f64::INFINITY), |acc, cand| {
            if cand.2 < acc.2 {
                cand
            } else {
                acc
            }
        });

    let mut tokens = Vec::with_capacity(k);
    let mut pos = n;
    while pos > 0 {
        let cell = cells[idx(pos, k, last_random)];
        let class = match cell.matched {
            Some(m) => TokenClass::Corpus {
                kind: m.kind,
                rank: m.rank,
            },
            None => TokenClass::Random,
        };
        tokens.push(Token {
            text: s[cell.prev_pos..pos].to_owned(),
            class,
            start: cell.prev_pos,
            end: pos,
        });
        pos = cell.prev_pos;
        last_random = cell.prev_random;
        k -= 1;
    }
    tokens.reverse();
    (tokens, best)
}

/// log10 of the guess estimate: `k!` times the product of token costs.
pub fn estimate_guesses(decomposition: &TokenDecomposition) -> f64 {
    tokens_log10_guesses(&decomposition.tokens)
}

pub(crate) fn tokens_log10_guesses(tokens: &[Token]) -> f64 {
    log10_factorial(tokens.len()) + tokens.iter().map(Token::log10_cost).sum::<f64>()
}

/// Guess estimate in the reporting convention, where a random token of
/// length `L` counts as `10^L` guesses (a pure random name of length 18
/// reports as 18.0).
pub fn reporting_log10_guesses(decomposition: &TokenDecomposition) -> f64 {
    let tokens = &decomposition.tokens;
    log10_factorial(tokens.len())
        + tokens
            .iter()
            .map(|t| match t.class {
                TokenClass::Corpus { rank, .. } => (rank as f64).log10(),
                TokenClass::Random => (t.end - t.start) as f64,
            })
            .sum::<f64>()
}

/// Character-histogram entropy of `name` times its length, in bits.
pub fn shannon_entropy(name: &str) -> Result<f64> {
    if name.is_empty() {
        return Err(Error::EmptyInput("entropy of an empty name"));
    }
    Ok(entropy_bits(name))
}

fn entropy_bits(name: &str) -> f64 {
    let mut counts: HashMap<char, usize> = HashMap::new();
    let mut len = 0usize;
    for c in name.chars() {
        *counts.entry(c).or_default() += 1;
        len += 1;
    }
    let n = len as f64;
    let per_char: f64 = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum();
    // -0.0 for single-symbol names
    (per_char * n).max(0.0)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternElement {
    Rand,
    Corpus(CorpusKind),
    Anchor(String),
}

/// Ordered token classes of a decomposition, e.g. `(rand,corpus,rand)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NamingPattern {
    pub elements: Vec<PatternElement>,
}

impl NamingPattern {
    pub fn arity(&self) -> usize {
        self.elements.len()
    }

    /// `(rand,corpus,...)`, ignoring corpus kind and anchors' text.
    pub fn generic(&self) -> String {
        self.render(|e| match e {
            PatternElement::Rand => "rand".into(),
            _ => "corpus".into(),
        })
    }

    /// `(rand,dictionary,...)`.
    pub fn with_kinds(&self) -> String {
        self.render(|e| match e {
            PatternElement::Rand => "rand".into(),
            PatternElement::Corpus(k) => k.to_string(),
            PatternElement::Anchor(t) => format!("\"{t}\""),
        })
    }

    fn render(&self, f: impl Fn(&PatternElement) -> String) -> String {
        let parts: Vec<String> = self.elements.iter().map(f).collect();
        format!("({})", parts.join(","))
    }
}

impl fmt::Display for NamingPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(|e| match e {
            PatternElement::Rand => "rand".into(),
            PatternElement::Corpus(_) => "corpus".into(),
            PatternElement::Anchor(t) => format!("\"{t}\""),
        }))
    }
}

pub fn extract_pattern(decomposition: &TokenDecomposition) -> NamingPattern {
    NamingPattern {
        elements: decomposition
            .tokens
            .iter()
            .map(|t| match t.class {
                TokenClass::Random => PatternElement::Rand,
                TokenClass::Corpus { kind, .. } => PatternElement::Corpus(kind),
            })
            .collect(),
    }
}

/// Like [`extract_pattern`] but corpus tokens keep their text, giving rows
/// such as `(rand,"test")`.
pub fn extract_anchored_pattern(decomposition: &TokenDecomposition) -> NamingPattern {
    NamingPattern {
        elements: decomposition
            .tokens
            .iter()
            .map(|t| match t.class {
                TokenClass::Random => PatternElement::Rand,
                TokenClass::Corpus { .. } => PatternElement::Anchor(t.text.clone()),
            })
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternKey {
    /// `(rand,corpus)`
    #[default]
    Generic,
    /// `(rand,tech_term)`
    Kinds,
    /// `(rand,"test")`
    Anchored,
}

impl PatternKey {
    pub fn key(self, decomposition: &TokenDecomposition) -> String {
        match self {
            PatternKey::Generic => extract_pattern(decomposition).generic(),
            PatternKey::Kinds => extract_pattern(decomposition).with_kinds(),
            PatternKey::Anchored => extract_anchored_pattern(decomposition).to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CensusRow {
    pub pattern: String,
    pub count: usize,
    pub share: f64,
    /// Mean over names, in the reporting convention.
    pub mean_log10_guesses: f64,
}

/// Share of names per naming pattern, sorted by descending share (ties by
/// pattern text).
pub fn pattern_census<'a, I>(decompositions: I, key: PatternKey) -> Result<Vec<CensusRow>>
where
    I: IntoIterator<Item = &'a TokenDecomposition>,
{
    let mut tally: HashMap<String, (usize, f64)> = HashMap::new();
    let mut total = 0usize;
    for d in decompositions {
        let slot = tally.entry(key.key(d)).or_default();
        slot.0 += 1;
        slot.1 += reporting_log10_guesses(d);
        total += 1;
    }
    if total == 0 {
        return Err(Error::EmptyInput("pattern census needs at least one name"));
    }
    let mut rows: Vec<CensusRow> = tally
        .into_iter()
        .map(|(pattern, (count, sum))| CensusRow {
            pattern,
            count,
            share: count as f64 / total as f64,
            mean_log10_guesses: sum / count as f64,
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.pattern.cmp(&b.pattern)));
    Ok(rows)
}

/// One line of the decomposition record stream.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRecord {
    #[serde(flatten)]
    pub decomposition: TokenDecomposition,
    pub pattern: String,
    pub reporting_log10_guesses: f64,
}

impl From<TokenDecomposition> for DecompositionRecord {
    fn from(decomposition: TokenDecomposition) -> Self {
        DecompositionRecord {
            pattern: extract_pattern(&decomposition).generic(),
            reporting_log10_guesses: reporting_log10_guesses(&decomposition),
            decomposition,
        }
    }
}
