use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::freq::FreqTable;
use super::token_bigram::tokenize_on_delimiters;
use crate::analyzer::{min_cost_tiling, TokenClass};
use crate::corpus::{CorpusKind, CorpusSet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenType {
    Other,
    Number,
    DictionaryWord,
    FileExtension,
    TechTerm,
    Domain,
    Password,
    Name,
}

impl TokenType {
    pub const ALL: [TokenType; 8] = [
        TokenType::Other,
        TokenType::Number,
        TokenType::DictionaryWord,
        TokenType::FileExtension,
        TokenType::TechTerm,
        TokenType::Domain,
        TokenType::Password,
        TokenType::Name,
    ];

    pub fn label(self) -> &'static str {
        match self {
            TokenType::Other => "other",
            TokenType::Number => "number",
            TokenType::DictionaryWord => "dictionary word",
            TokenType::FileExtension => "file extension",
            TokenType::TechTerm => "tech term",
            TokenType::Domain => "domain",
            TokenType::Password => "password",
            TokenType::Name => "name",
        }
    }

    fn of_corpus(kind: CorpusKind) -> Self {
        match kind {
            CorpusKind::Dictionary => TokenType::DictionaryWord,
            CorpusKind::TechTerm => TokenType::TechTerm,
            CorpusKind::Domain => TokenType::Domain,
            CorpusKind::Password => TokenType::Password,
            CorpusKind::HumanName => TokenType::Name,
            CorpusKind::FileExtension => TokenType::FileExtension,
            // Only digits reach here: delimiters are split off beforehand.
            CorpusKind::Symbol => TokenType::Number,
        }
    }
}

impl fmt::Display for TokenType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.label())
    }
}

impl FromStr for TokenType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TokenType::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| Error::Codec(format!("unknown token type <{s}>")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateElem {
    Type(TokenType),
    Literal(char),
}

pub fn render_template(elems: &[TemplateElem]) -> String {
    let mut s = String::new();
    for e in elems {
        match e {
            TemplateElem::Type(t) => s.push_str(&t.to_string()),
            TemplateElem::Literal(c) => s.push(*c),
        }
    }
    s
}

pub fn parse_template(template: &str) -> Result<Vec<TemplateElem>> {
    let mut out = Vec::new();
    let mut rest = template;
    while let Some(c) = rest.chars().next() {
        if c == '<' {
            let close = rest
                .find('>')
                .ok_or_else(|| Error::Codec(format!("unclosed type in {template:?}")))?;
            out.push(TemplateElem::Type(rest[1..close].parse()?));
            rest = &rest[close + 1..];
        } else {
            out.push(TemplateElem::Literal(c));
            rest = &rest[c.len_utf8()..];
        }
    }
    Ok(out)
}

/// A name's template elements, each with the text it covers.
pub type Derivation = Vec<(TemplateElem, String)>;

/// Splits on delimiters, decomposes each segment against the corpora and
/// types the tokens. Digit-only tokens (adjacent ones merged) are numbers;
/// other unmatched text is `<other>`.
pub fn derive_template(name: &str, corpora: &CorpusSet) -> Derivation {
    let (segments, delimiters) = tokenize_on_delimiters(name);
    let mut out: Derivation = Vec::new();
    for (i, segment) in segments.iter().enumerate() {
        if i > 0 {
            let d = delimiters[i - 1];
            out.push((TemplateElem::Literal(d), d.to_string()));
        }
        if segment.is_empty() {
            continue;
        }
        let lowered = segment.to_ascii_lowercase();
        let (tokens, _) = min_cost_tiling(&lowered, corpora);
        let mut prev_number = false;
        for t in tokens {
            let ty = if t.text.bytes().all(|b| b.is_ascii_digit()) {
                TokenType::Number
            } else {
                match t.class {
                    TokenClass::Random => TokenType::Other,
                    TokenClass::Corpus { kind, .. } => TokenType::of_corpus(kind),
                }
            };
            let text = &segment[t.start..t.end];
            if ty == TokenType::Number && prev_number {
                out.last_mut().expect("previous number").1.push_str(text);
            } else {
                out.push((TemplateElem::Type(ty), text.to_owned()));
            }
            prev_number = ty == TokenType::Number;
        }
    }
    out
}

/// `"name1234-word-jpg-4-"` becomes
/// `"<other>-<dictionary word>-<file extension>-<number>-"` when "word" is a
/// dictionary word, "jpg" an extension and "name" is not in any corpus.
pub fn token_pcfg_template(name: &str, corpora: &CorpusSet) -> String {
    let elems: Vec<TemplateElem> = derive_template(name, corpora)
        .into_iter()
        .map(|(e, _)| e)
        .collect();
    render_template(&elems)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TokenPcfgModel {
    pub(crate) templates: FreqTable<String>,
    pub(crate) parsed: Vec<Vec<TemplateElem>>,
    pub(crate) tokens: HashMap<TokenType, FreqTable<String>>,
}

impl TokenPcfgModel {
    pub(crate) fn from_tables(
        templates: FreqTable<String>,
        tokens: HashMap<TokenType, FreqTable<String>>,
    ) -> Result<Self> {
        let parsed = templates
            .iter()
            .map(|(t, _)| parse_template(t))
            .collect::<Result<Vec<_>>>()?;
        for template in &parsed {
            for e in template {
                if let TemplateElem::Type(t) = e {
                    if tokens.get(t).map_or(true, FreqTable::is_empty) {
                        return Err(Error::Codec(format!("type {t} has no tokens")));
                    }
                }
            }
        }
        Ok(TokenPcfgModel {
            templates,
            parsed,
            tokens,
        })
    }

    pub fn templates(&self) -> &FreqTable<String> {
        &self.templates
    }

    pub fn token_table(&self, ty: TokenType) -> Option<&FreqTable<String>> {
        self.tokens.get(&ty)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let template = &self.parsed[self.templates.sample_index(rng)];
        let mut out = String::new();
        for e in template {
            match e {
                TemplateElem::Literal(c) => out.push(*c),
                TemplateElem::Type(t) => {
                    let table = self.tokens.get(t).expect("every stored type has tokens");
                    out.push_str(table.sample(rng));
                }
            }
        }
        out
    }
}

/// Memoized derivations so periodic full retrains skip re-decomposing names
/// already seen.
#[derive(Default)]
pub struct DerivationCache {
    map: HashMap<String, Derivation>,
}

impl DerivationCache {
    pub fn get(&mut self, name: &str, corpora: &CorpusSet) -> &Derivation {
        if !self.map.contains_key(name) {
            self.map
                .insert(name.to_owned(), derive_template(name, corpora));
        }
        &self.map[name]
    }
}

pub fn train_token_pcfg<S: AsRef<str>>(names: &[S], corpora: &CorpusSet) -> Result<TokenPcfgModel> {
    train_token_pcfg_cached(names, corpora, &mut DerivationCache::default())
}

pub fn train_token_pcfg_cached<S: AsRef<str>>(
    names: &[S],
    corpora: &CorpusSet,
    cache: &mut DerivationCache,
) -> Result<TokenPcfgModel> {
    if names.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut templates = BTreeMap::new();
    let mut tokens: HashMap<TokenType, BTreeMap<String, u64>> = HashMap::new();
    for name in names {
        let derivation = cache.get(name.as_ref(), corpora);
        let elems: Vec<TemplateElem> = derivation.iter().map(|(e, _)| *e).collect();
        *templates.entry(render_template(&elems)).or_insert(0) += 1;
        for (e, text) in derivation {
            if let TemplateElem::Type(t) = e {
                *tokens
                    .entry(*t)
                    .or_default()
                    .entry(text.clone())
                    .or_insert(0) += 1;
            }
        }
    }
    TokenPcfgModel::from_tables(
        FreqTable::from_counts(templates),
        tokens
            .into_iter()
            .map(|(k, v)| (k, FreqTable::from_counts(v)))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn corpora() -> CorpusSet {
        CorpusSet::new([
            Corpus::from_tokens(CorpusKind::Dictionary, ["word", "test", "data", "prod"]),
            Corpus::from_tokens(CorpusKind::FileExtension, ["jpg", "png"]),
            Corpus::symbols(),
        ])
    }

    #[test]
    fn template_examples() {
        let c = corpora();
        assert_eq!(
            token_pcfg_template("name1234-word-jpg-4-", &c),
            "<other>-<dictionary word>-<file extension>-<number>-"
        );
        assert_eq!(token_pcfg_template("test", &c), "<dictionary word>");
        assert_eq!(token_pcfg_template("q9z-prod", &c), "<other>-<dictionary word>");
        assert_eq!(token_pcfg_template("data2020", &c), "<dictionary word><number>");
    }

    #[test]
    fn template_parse_round_trip() {
        let t = "<other>-<dictionary word>.<number>_";
        assert_eq!(render_template(&parse_template(t).unwrap()), t);
        assert!(parse_template("<bogus>").is_err());
        assert!(parse_template("<other").is_err());
    }

    #[test]
    fn four_outcomes() {
        let c = corpora();
        let m = train_token_pcfg(&["test-data"], &c).unwrap();
        assert_eq!(m.templates().len(), 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            seen.insert(m.sample(&mut rng));
        }
        let expect: std::collections::BTreeSet<String> =
            ["test-test", "test-data", "data-test", "data-data"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        assert_eq!(seen, expect);
    }

    #[test]
    fn single_name_reproduced() {
        let c = corpora();
        let m = train_token_pcfg(&["zq7-word"], &c).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(m.sample(&mut rng), "zq7-word");
    }
}
