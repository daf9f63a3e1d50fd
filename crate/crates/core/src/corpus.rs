//! Ranked word corpora used for token matching and guess estimation.
//!
//! A corpus file holds one token per line, most frequent first. The token on
//! the first (non-blank, non-duplicate) line gets rank 1. A [`CorpusSet`]
//! aggregates at most one corpus per [`CorpusKind`] and answers "what is the
//! cheapest corpus match for this token" in a single hash lookup.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rank shared by every entry of the symbol corpus.
pub const SYMBOL_RANK: u32 = 20;

const SYMBOLS: [&str; 13] = [
    "-", "_", ".", "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    Dictionary,
    Domain,
    TechTerm,
    FileExtension,
    Password,
    HumanName,
    Symbol,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 7] = [
        CorpusKind::Dictionary,
        CorpusKind::Domain,
        CorpusKind::TechTerm,
        CorpusKind::FileExtension,
        CorpusKind::Password,
        CorpusKind::HumanName,
        CorpusKind::Symbol,
    ];

    /// Tie-break priority when two corpora hold the same token at the same
    /// rank. Lower wins.
    pub fn priority(self) -> u8 {
        match self {
            CorpusKind::Dictionary => 0,
            CorpusKind::TechTerm => 1,
            CorpusKind::Domain => 2,
            CorpusKind::Password => 3,
            CorpusKind::HumanName => 4,
            CorpusKind::FileExtension => 5,
            CorpusKind::Symbol => 6,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CorpusKind::Dictionary => "dictionary",
            CorpusKind::Domain => "domain",
            CorpusKind::TechTerm => "tech_term",
            CorpusKind::FileExtension => "file_extension",
            CorpusKind::Password => "password",
            CorpusKind::HumanName => "human_name",
            CorpusKind::Symbol => "symbol",
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CorpusKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorpusKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown corpus kind {s:?}")))
    }
}

/// A corpus match: which corpus, and the token's rank there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Match {
    pub kind: CorpusKind,
    pub rank: u32,
}

impl Match {
    fn beats(&self, other: &Match) -> bool {
        (self.rank, self.kind.priority()) < (other.rank, other.kind.priority())
    }
}

#[derive(Clone, Debug)]
pub struct Corpus {
    kind: CorpusKind,
    entries: Vec<String>,
    ranks: HashMap<String, u32>,
}

impl Corpus {
    /// Builds a corpus from tokens ordered most frequent first. Tokens are
    /// lowercased, blanks dropped, and later duplicates ignored.
    pub fn from_tokens<I, S>(kind: CorpusKind, tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut corpus = Corpus {
            kind,
            entries: Vec::new(),
            ranks: HashMap::new(),
        };
        for token in tokens {
            corpus.push(token.as_ref());
        }
        corpus
    }

    /// The fixed symbol corpus: `- _ .` and the ten digits, all at
    /// [`SYMBOL_RANK`].
    pub fn symbols() -> Self {
        let entries: Vec<String> = SYMBOLS.iter().map(|s| s.to_string()).collect();
        let ranks = entries.iter().map(|s| (s.clone(), SYMBOL_RANK)).collect();
        Corpus {
            kind: CorpusKind::Symbol,
            entries,
            ranks,
        }
    }

    /// Appends a token at the next rank. Returns false when the token is
    /// blank or already present.
    pub fn push(&mut self, token: &str) -> bool {
        let token = token.trim().to_lowercase();
        if token.is_empty() || self.ranks.contains_key(&token) {
            return false;
        }
        let rank = self.entries.len() as u32 + 1;
        self.ranks.insert(token.clone(), rank);
        self.entries.push(token);
        true
    }

    pub fn kind(&self) -> CorpusKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rank(&self, token: &str) -> Option<u32> {
        self.ranks.get(token).copied()
    }

    /// Entries in rank order.
    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u32)> + '_ {
        self.entries
            .iter()
            .map(move |e| (e.as_str(), self.ranks[e.as_str()]))
    }
}

/// Reads a one-token-per-line word list.
pub fn load_corpus(path: impl AsRef<Path>, kind: CorpusKind) -> Result<Corpus> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    for (idx, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = std::str::from_utf8(raw).map_err(|_| Error::NonUtf8Line {
            path: path.to_owned(),
            line: idx + 1,
        })?;
        lines.push(line.trim_end_matches('\r'));
    }
    let corpus = Corpus::from_tokens(kind, lines);
    if corpus.is_empty() {
        return Err(Error::EmptyFile(path.to_owned()));
    }
    Ok(corpus)
}

#[derive(Clone, Debug, Default)]
pub struct CorpusSet {
    corpora: BTreeMap<CorpusKind, Corpus>,
    best: HashMap<String, Match>,
    max_token_len: usize,
}

impl CorpusSet {
    pub fn new(corpora: impl IntoIterator<Item = Corpus>) -> Self {
        let mut set = CorpusSet::default();
        for corpus in corpora {
            set.corpora.insert(corpus.kind, corpus);
        }
        set.reindex();
        set
    }

    /// The word lists shipped with the crate plus the symbol corpus.
    pub fn bundled() -> Self {
        let list = |kind, text: &str| Corpus::from_tokens(kind, text.lines());
        CorpusSet::new([
            list(
                CorpusKind::Dictionary,
                include_str!("../data/dictionary.txt"),
            ),
            list(CorpusKind::TechTerm, include_str!("../data/tech_terms.txt")),
            list(CorpusKind::Domain, include_str!("../data/domains.txt")),
            list(CorpusKind::Password, include_str!("../data/passwords.txt")),
            list(
                CorpusKind::HumanName,
                include_str!("../data/human_names.txt"),
            ),
            list(
                CorpusKind::FileExtension,
                include_str!("../data/file_extensions.txt"),
            ),
            Corpus::symbols(),
        ])
    }

    /// Loads corpora listed in a TOML manifest mapping kind to path, e.g.
    /// `dictionary = "words.txt"`. Relative paths resolve against the
    /// manifest's directory. The symbol corpus is always included.
    pub fn from_manifest(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let table: BTreeMap<String, String> =
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut corpora = vec![Corpus::symbols()];
        for (key, file) in table {
            let kind: CorpusKind = key.parse()?;
            if kind == CorpusKind::Symbol {
                return Err(Error::Config("the symbol corpus is built in".into()));
            }
            corpora.push(load_corpus(base.join(file), kind)?);
        }
        Ok(CorpusSet::new(corpora))
    }

    fn reindex(&mut self) {
        self.best.clear();
        self.max_token_len = 0;
        for corpus in self.corpora.values() {
            for (token, rank) in corpus.iter() {
                let candidate = Match {
                    kind: corpus.kind,
                    rank,
                };
                self.max_token_len = self.max_token_len.max(token.len());
                match self.best.get_mut(token) {
                    Some(current) if !candidate.beats(current) => {}
                    Some(current) => *current = candidate,
                    None => {
                        self.best.insert(token.to_owned(), candidate);
                    }
                }
            }
        }
    }

    /// Adds one token to the end of the `kind` corpus, creating the corpus if
    /// needed. Returns false if the token was already there.
    pub fn add_entry(&mut self, kind: CorpusKind, token: &str) -> bool {
        let corpus = self
            .corpora
            .entry(kind)
            .or_insert_with(|| Corpus::from_tokens(kind, std::iter::empty::<&str>()));
        let added = corpus.push(token);
        if added {
            self.reindex();
        }
        added
    }

    pub fn get(&self, kind: CorpusKind) -> Option<&Corpus> {
        self.corpora.get(&kind)
    }

    pub fn corpora(&self) -> impl Iterator<Item = &Corpus> {
        self.corpora.values()
    }

    pub fn total_size(&self) -> usize {
        self.corpora.values().map(Corpus::len).sum()
    }

    pub fn max_token_len(&self) -> usize {
        self.max_token_len
    }

    /// Best (lowest-rank) match for `token` across every corpus, ignoring
    /// case.
    pub fn lookup(&self, token: &str) -> Option<Match> {
        if token.bytes().any(|b| b.is_ascii_uppercase()) {
            self.best.get(&token.to_ascii_lowercase()).copied()
        } else {
            self.best.get(token).copied()
        }
    }

    /// Lookup for an already-lowercase substring. Single characters only
    /// match the symbol corpus.
    pub(crate) fn lookup_substring(&self, token: &str) -> Option<Match> {
        if token.len() == 1 {
            let rank = self.corpora.get(&CorpusKind::Symbol)?.rank(token)?;
            return Some(Match {
                kind: CorpusKind::Symbol,
                rank,
            });
        }
        self.best.get(token).copied()
    }
}

#[cfg(test)]
mod tests {
    use std::io::Write;

    use super::*;

    fn file(contents: &[u8]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents).unwrap();
        f
    }

    #[test]
    fn ranks_follow_line_order() {
        let f = file(b"test\nprod\ndev\n");
        let c = load_corpus(f.path(), CorpusKind::TechTerm).unwrap();
        assert_eq!(c.rank("test"), Some(1));
        assert_eq!(c.rank("prod"), Some(2));
        assert_eq!(c.rank("dev"), Some(3));
        assert_eq!(c.len(), 3);
    }

    #[test]
    fn duplicates_keep_first_occurrence() {
        let f = file(b"test\na1\nb2\nc3\ntest\n");
        let c = load_corpus(f.path(), CorpusKind::Dictionary).unwrap();
        assert_eq!(c.rank("test"), Some(1));
        assert_eq!(c.len(), 4);
        let ranks: Vec<u32> = c.iter().map(|(_, r)| r).collect();
        assert_eq!(ranks, vec![1, 2, 3, 4]);
    }

    #[test]
    fn entries_are_lowercased() {
        let c = Corpus::from_tokens(CorpusKind::Dictionary, ["Test", "PROD", "", "  "]);
        assert_eq!(c.entries(), &["test".to_string(), "prod".to_string()]);
    }

    #[test]
    fn load_errors() {
        let empty = file(b"");
        assert!(matches!(
            load_corpus(empty.path(), CorpusKind::Dictionary),
            Err(Error::EmptyFile(_))
        ));
        let bad = file(b"ok\nfine\n\xff\xfe\n");
        match load_corpus(bad.path(), CorpusKind::Dictionary) {
            Err(Error::NonUtf8Line { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected NonUtf8Line, got {other:?}"),
        }
        assert!(matches!(
            load_corpus("/nonexistent/words.txt", CorpusKind::Dictionary),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn lookup_prefers_lowest_rank_then_kind_priority() {
        let dict = Corpus::from_tokens(CorpusKind::Dictionary, ["alpha", "beta", "test"]);
        let tech = Corpus::from_tokens(CorpusKind::TechTerm, ["test", "prod"]);
        let pw = Corpus::from_tokens(CorpusKind::Password, ["alpha", "prod"]);
        let set = CorpusSet::new([dict, tech, pw]);
        assert_eq!(
            set.lookup("test"),
            Some(Match {
                kind: CorpusKind::TechTerm,
                rank: 1
            })
        );
        // rank 1 in dictionary and password: dictionary wins.
        assert_eq!(set.lookup("alpha").unwrap().kind, CorpusKind::Dictionary);
        // rank 2 in both tech_term and password: tech_term wins.
        assert_eq!(
            set.lookup("prod"),
            Some(Match {
                kind: CorpusKind::TechTerm,
                rank: 2
            })
        );
        assert_eq!(set.lookup("zqxv7"), None);
        assert_eq!(set.lookup("TEST"), set.lookup("test"));
    }

    #[test]
    fn dictionary_rank_example() {
        let mut words: Vec<String> = (0..11).map(|i| format!("w{i}x")).collect();
        words.push("test".into());
        let set = CorpusSet::new([Corpus::from_tokens(CorpusKind::Dictionary, &words)]);
        assert_eq!(
            set.lookup("test"),
            Some(Match {
                kind: CorpusKind::Dictionary,
                rank: 12
            })
        );
    }

    #[test]
    fn symbols_are_rank_equal() {
        let s = Corpus::symbols();
        assert_eq!(s.len(), 13);
        assert!(s.iter().all(|(_, r)| r == SYMBOL_RANK));
    }

    #[test]
    fn bundled_corpora_load() {
        let set = CorpusSet::bundled();
        assert_eq!(set.get(CorpusKind::Dictionary).unwrap().len(), 10_000);
        assert!(set.lookup("prod").is_some());
        assert!(set.lookup("test").is_some());
        assert!(set.lookup("jpg").is_some());
        for c in set.corpora() {
            assert!(c.entries().iter().all(|e| !e.is_empty() && *e == e.to_lowercase()));
        }
    }

    #[test]
    fn manifest_loading() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("words.txt"), "alpha\nbeta\n").unwrap();
        std::fs::write(dir.path().join("tech.txt"), "prod\n").unwrap();
        let manifest = dir.path().join("corpora.toml");
        std::fs::write(
            &manifest,
            "dictionary = \"words.txt\"\ntech_term = \"tech.txt\"\n",
        )
        .unwrap();
        let set = CorpusSet::from_manifest(&manifest).unwrap();
        assert_eq!(set.lookup("beta").unwrap().rank, 2);
        assert_eq!(set.lookup("-").unwrap().kind, CorpusKind::Symbol);
        std::fs::write(&manifest, "verbs = \"words.txt\"\n").unwrap();
        assert!(CorpusSet::from_manifest(&manifest).is_err());
    }

    #[test]
    fn add_entry_appends_next_rank() {
        let mut set = CorpusSet::new([Corpus::from_tokens(CorpusKind::Dictionary, ["ab"])]);
        assert!(set.add_entry(CorpusKind::Dictionary, "cd"));
        assert!(!set.add_entry(CorpusKind::Dictionary, "ab"));
        assert_eq!(set.lookup("cd").unwrap().rank, 2);
        assert!(set.add_entry(CorpusKind::Domain, "x.com"));
        assert_eq!(set.lookup("x.com").unwrap().kind, CorpusKind::Domain);
    }
}
