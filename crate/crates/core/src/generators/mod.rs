//! Statistical candidate-name generators.
//!
//! Four trainable models (character n-grams, token bigrams, character PCFG,
//! token PCFG) and two untrained baselines share the [`Sampler`] interface.
//! [`CandidateStream`] wraps any sampler with a seeded RNG, the legality
//! filter and a freshness check.

mod baselines;
mod char_ngram;
mod char_pcfg;
pub mod codec;
mod freq;
mod token_bigram;
mod token_pcfg;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use baselines::{Continella, UniformRandom};
pub use char_ngram::{train_char_ngram, CharNGramModel, DEFAULT_ORDER, START};
pub use char_pcfg::{char_pcfg_rule, parse_rule, render_rule, train_char_pcfg, CharClass, CharPcfgModel, RuleElem};
pub use freq::FreqTable;
pub use token_bigram::{join_tokens, tokenize_on_delimiters, train_token_bigram, TokenBigramModel};
pub use token_pcfg::{
    derive_template, parse_template, render_template, token_pcfg_template, train_token_pcfg,
    train_token_pcfg_cached, Derivation, DerivationCache, TemplateElem, TokenPcfgModel, TokenType,
};

use crate::corpus::{CorpusKind, CorpusSet};
use crate::error::{Error, Result};
use crate::name;

/// Draws before a candidate stream gives up on finding a fresh legal name.
pub const MAX_ATTEMPTS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    CharNgram,
    TokenBigram,
    CharPcfg,
    TokenPcfg,
    UniformRandom,
    Continella,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 6] = [
        GeneratorKind::CharNgram,
        GeneratorKind::TokenBigram,
        GeneratorKind::CharPcfg,
        GeneratorKind::TokenPcfg,
        GeneratorKind::UniformRandom,
        GeneratorKind::Continella,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::CharNgram => "char_ngram",
            GeneratorKind::TokenBigram => "token_bigram",
            GeneratorKind::CharPcfg => "char_pcfg",
            GeneratorKind::TokenPcfg => "token_pcfg",
            GeneratorKind::UniformRandom => "uniform_random",
            GeneratorKind::Continella => "continella",
        }
    }

    /// Whether the generator learns from training names.
    pub fn is_trained(self) -> bool {
        !matches!(self, GeneratorKind::UniformRandom | GeneratorKind::Continella)
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.replace('-', "_");
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown generator {s:?}")))
    }
}

/// Anything that can draw a raw (possibly illegal) candidate.
pub trait Sampler: Send + Sync {
    fn sample_name(&self, rng: &mut dyn RngCore) -> String;
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeneratorModel {
    CharNgram(CharNGramModel),
    TokenBigram(TokenBigramModel),
    CharPcfg(CharPcfgModel),
    TokenPcfg(TokenPcfgModel),
}

impl GeneratorModel {
    pub fn kind(&self) -> GeneratorKind {
        match self {
            GeneratorModel::CharNgram(_) => GeneratorKind::CharNgram,
            GeneratorModel::TokenBigram(_) => GeneratorKind::TokenBigram,
            GeneratorModel::CharPcfg(_) => GeneratorKind::CharPcfg,
            GeneratorModel::TokenPcfg(_) => GeneratorKind::TokenPcfg,
        }
    }

    pub(crate) fn kind_tag(&self) -> u8 {
        match self {
            GeneratorModel::CharNgram(_) => 1,
            GeneratorModel::TokenBigram(_) => 2,
            GeneratorModel::CharPcfg(_) => 3,
            GeneratorModel::TokenPcfg(_) => 4,
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        codec::encode(self)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        codec::decode(bytes)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub fn dump_text(&self) -> String {
        codec::dump_text(self)
    }
}

impl Sampler for GeneratorModel {
    fn sample_name(&self, rng: &mut dyn RngCore) -> String {
        match self {
            GeneratorModel::CharNgram(m) => m.sample(rng),
            GeneratorModel::TokenBigram(m) => m.sample(rng),
            GeneratorModel::CharPcfg(m) => m.sample(rng),
            GeneratorModel::TokenPcfg(m) => m.sample(rng),
        }
    }
}

impl Sampler for UniformRandom {
    fn sample_name(&self, rng: &mut dyn RngCore) -> String {
        self.sample(rng)
    }
}

impl Sampler for Continella {
    fn sample_name(&self, rng: &mut dyn RngCore) -> String {
        self.sample(rng)
    }
}

/// Trains one of the four learned models. `order` only affects the
/// character n-gram model.
pub fn train<S: AsRef<str>>(
    kind: GeneratorKind,
    names: &[S],
    corpora: &CorpusSet,
    order: usize,
) -> Result<GeneratorModel> {
    Ok(match kind {
        GeneratorKind::CharNgram => GeneratorModel::CharNgram(train_char_ngram(names, order)?),
        GeneratorKind::TokenBigram => GeneratorModel::TokenBigram(train_token_bigram(names)?),
        GeneratorKind::CharPcfg => GeneratorModel::CharPcfg(train_char_pcfg(names)?),
        GeneratorKind::TokenPcfg => GeneratorModel::TokenPcfg(train_token_pcfg(names, corpora)?),
        other => {
            return Err(Error::Config(format!("{other} is not a trainable generator")));
        }
    })
}

/// The Continella baseline over the dictionary corpus (or no words).
pub fn continella_from(corpora: &CorpusSet) -> Continella {
    let words = corpora
        .get(CorpusKind::Dictionary)
        .map(|c| c.entries().to_vec())
        .unwrap_or_default();
    Continella::new(words)
}

/// Seeded, legality-filtered candidate source over one sampler.
pub struct CandidateStream<'a> {
    sampler: &'a dyn Sampler,
    rng: ChaCha8Rng,
    seed: u64,
    emitted: u64,
}

impl<'a> CandidateStream<'a> {
    pub fn new(sampler: &'a dyn Sampler, seed: u64) -> Self {
        CandidateStream {
            sampler,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            emitted: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn emitted(&self) -> u64 {
        self.emitted
    }

    /// Next legal candidate that `accept` takes. Each draw counts as one
    /// attempt, whether rejected for legality or by `accept`.
    pub fn next_accepted(&mut self, mut accept: impl FnMut(&str) -> bool) -> Result<String> {
        for _ in 0..MAX_ATTEMPTS {
            let name = self.sampler.sample_name(&mut self.rng);
            if name::is_legal(&name) && accept(&name) {
                self.emitted += 1;
                return Ok(name);
            }
        }
        Err(Error::GeneratorStarvation {
            attempts: MAX_ATTEMPTS,
        })
    }

    pub fn next_legal(&mut self) -> Result<String> {
        self.next_accepted(|_| true)
    }
}

impl Iterator for CandidateStream<'_> {
    type Item = Result<String>;

    fn next(&mut self) -> Option<Self::Item> {
        Some(self.next_legal())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn names() -> Vec<&'static str> {
        vec!["test-bucket", "prod-assets", "img-cdn-01", "backup2020", "zq7x-logs"]
    }

    #[test]
    fn kinds_parse() {
        for k in GeneratorKind::ALL {
            assert_eq!(k.as_str().parse::<GeneratorKind>().unwrap(), k);
        }
        assert_eq!("token-pcfg".parse::<GeneratorKind>().unwrap(), GeneratorKind::TokenPcfg);
        assert!("lstm".parse::<GeneratorKind>().is_err());
    }

    #[test]
    fn codec_round_trips_every_kind() {
        let corpora = CorpusSet::bundled();
        for kind in &GeneratorKind::ALL[..4] {
            let m = train(*kind, &names(), &corpora, 5).unwrap();
            let bytes = m.to_bytes();
            assert_eq!(&bytes[..4], codec::MAGIC);
            let back = GeneratorModel::from_bytes(&bytes).unwrap();
            assert_eq!(back, m);
            assert_eq!(back.to_bytes(), bytes);
            assert!(m.dump_text().starts_with(&format!("kind {kind}")));
        }
    }

    #[test]
    fn codec_rejects_damage() {
        let m = train(GeneratorKind::CharPcfg, &names(), &CorpusSet::default(), 5).unwrap();
        let bytes = m.to_bytes();
        assert!(GeneratorModel::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(GeneratorModel::from_bytes(&extra).is_err());
        let mut magic = bytes.clone();
        magic[0] = b'X';
        assert!(GeneratorModel::from_bytes(&magic).is_err());
        let mut tag = bytes;
        tag[6] = 9;
        assert!(GeneratorModel::from_bytes(&tag).is_err());
    }

    #[test]
    fn stream_is_seeded_and_legal() {
        let m = train(GeneratorKind::CharNgram, &names(), &CorpusSet::default(), 3).unwrap();
        let a: Vec<String> = CandidateStream::new(&m, 11).take(50).map(|r| r.unwrap()).collect();
        let b: Vec<String> = CandidateStream::new(&m, 11).take(50).map(|r| r.unwrap()).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|n| name::is_legal(n)));
    }

    #[test]
    fn stream_starves_when_nothing_is_fresh() {
        let m = train(GeneratorKind::CharPcfg, &["abc1"], &CorpusSet::default(), 5).unwrap();
        let mut seen = HashSet::new();
        let mut s = CandidateStream::new(&m, 0);
        assert_eq!(s.next_accepted(|n| seen.insert(n.to_owned())).unwrap(), "abc1");
        let err = s.next_accepted(|n| seen.insert(n.to_owned())).unwrap_err();
        assert!(matches!(err, Error::GeneratorStarvation { attempts: 100 }));
        assert_eq!(s.emitted(), 1);
    }
}
