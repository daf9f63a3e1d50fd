//! Synthetic ground-truth bucket namespace.
//!
//! A [`NamespaceSpec`] describes naming templates (slots filled from seeded
//! random strings, bundled corpora and literals), the provider and
//! public/private mix, per-provider ACL grant rates, content categories and
//! the share of buckets holding sensitive files. [`build_namespace`] turns a
//! spec and a seed into a sorted, immutable table that answers probes the
//! way a provider would.
//!
//! Every accepted name decomposes (under the corpora used to build it) into
//! exactly the class pattern its template declares, so a census of the
//! namespace recovers the template shares.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analyzer::{min_cost_tiling, TokenClass};
use crate::corpus::{CorpusKind, CorpusSet};
use crate::error::{Error, Result};
use crate::name::{self, ALPHABET};
use crate::security::{AclRecord, BucketContents, CategoryTable, FileMeta, Grant, Grantee};
use crate::validation::{ProbeBackend, ProbeResponse, ProbeState, Provider};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Slot {
    /// Random characters over the 39 legal characters. With `pool`, a fixed
    /// set of that many strings (alphanumeric at both ends, and not
    /// themselves split by the analyzer) is drawn up front and reused with
    /// Zipf weights; identical pooled slots share one pool. Without `pool`
    /// every name gets a fresh string.
    Rand {
        lengths: Vec<(usize, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pool: Option<usize>,
    },
    /// A token from one corpus, Zipf-weighted by rank over the top entries.
    /// `exponent` overrides the spec-wide Zipf exponent; 0 is uniform.
    Corpus {
        corpus: CorpusKind,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        top: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        exponent: Option<f64>,
    },
    Literal { text: String },
}

impl Slot {
    fn rand(lengths: &[(usize, f64)], pool: Option<usize>) -> Self {
        Slot::Rand {
            lengths: lengths.to_vec(),
            pool,
        }
    }

    fn corpus(corpus: CorpusKind, top: usize) -> Self {
        Slot::Corpus {
            corpus,
            top: Some(top),
            exponent: None,
        }
    }

    fn uniform(corpus: CorpusKind) -> Self {
        Slot::Corpus {
            corpus,
            top: None,
            exponent: Some(0.0),
        }
    }

    fn lit(text: &str) -> Self {
        Slot::Literal { text: text.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternTemplate {
    pub share: f64,
    pub slots: Vec<Slot>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProviderShare {
    pub provider: Provider,
    pub share: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryShare {
    /// A category from the bundled table, or `uncategorized`.
    pub category: String,
    pub share: f64,
}

pub const UNCATEGORIZED: &str = "uncategorized";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrantSpec {
    pub grantee: Grantee,
    pub permission: String,
    /// Probability of the grant on a public bucket with a readable ACL.
    pub public: f64,
    /// Same for private buckets.
    pub private: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AclSpec {
    /// Share of public buckets whose ACL can be read.
    pub readable_public: f64,
    pub readable_private: f64,
    /// At most seven grants.
    pub grants: Vec<GrantSpec>,
}

fn default_public_share() -> f64 {
    0.13
}
fn default_min_files() -> usize {
    50
}
fn default_max_files() -> usize {
    200
}
fn default_zipf() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NamespaceSpec {
    pub size: usize,
    #[serde(default = "default_public_share")]
    pub public_share: f64,
    /// Share of public buckets holding at least one sensitive file.
    #[serde(default)]
    pub sensitive_share: f64,
    /// Share of private Alibaba buckets serving a website (200, unlistable).
    #[serde(default)]
    pub alibaba_website_share: f64,
    #[serde(default = "default_zipf")]
    pub zipf_exponent: f64,
    #[serde(default = "default_min_files")]
    pub min_files: usize,
    #[serde(default = "default_max_files")]
    pub max_files: usize,
    pub providers: Vec<ProviderShare>,
    #[serde(default)]
    pub categories: Vec<CategoryShare>,
    #[serde(default)]
    pub acl: BTreeMap<Provider, AclSpec>,
    pub patterns: Vec<PatternTemplate>,
}

/// Lengths of pure random names: 24.1% length 18, 12.4% length 25, 7.2%
/// length 4, the rest spread evenly over 6..=16.
pub fn measured_random_lengths() -> Vec<(usize, f64)> {
    let mut v = vec![(18, 0.241), (25, 0.124), (4, 0.072)];
    let rest = 1.0 - 0.241 - 0.124 - 0.072;
    v.extend((6..=16).map(|l| (l, rest / 11.0)));
    v
}

fn even(range: std::ops::RangeInclusive<usize>) -> Vec<(usize, f64)> {
    let n = range.clone().count() as f64;
    range.map(|l| (l, 1.0 / n)).collect()
}

impl NamespaceSpec {
    /// Top-5 pattern shares of 28.5% (rand), 12% (rand,corpus), 9.8%
    /// (rand,corpus,rand), 6.5% (corpus,rand) and 3.3% (corpus,rand,corpus);
    /// the remaining 39.9% is spread over fourteen other patterns of 2.85%
    /// each. Provider, ACL and category mixes follow the published
    /// measurements.
    pub fn measured_mix(size: usize) -> Self {
        use CorpusKind::*;
        let short = || Slot::rand(&even(4..=6), Some(1500));
        let mid = || Slot::rand(&even(6..=10), Some(3000));
        let words = || Slot::uniform(Dictionary);
        let tech = |top| Slot::corpus(TechTerm, top);
        let dict = |top| Slot::corpus(Dictionary, top);
        let dash = || Slot::lit("-");
        let other = |slots: Vec<Slot>| PatternTemplate {
            share: 0.0285,
            slots,
        };
        let patterns = vec![
            PatternTemplate {
                share: 0.285,
                slots: vec![Slot::rand(&measured_random_lengths(), None)],
            },
            PatternTemplate {
                share: 0.12,
                slots: vec![mid(), tech(100)],
            },
            PatternTemplate {
                share: 0.098,
                slots: vec![short(), dict(500), short()],
            },
            PatternTemplate {
                share: 0.065,
                slots: vec![tech(100), mid()],
            },
            PatternTemplate {
                share: 0.033,
                slots: vec![tech(50), mid(), Slot::corpus(Domain, 50)],
            },
            other(vec![words(), words()]),
            other(vec![tech(200), dash(), words()]),
            other(vec![mid(), tech(100), dict(1000)]),
            other(vec![tech(100), dict(1000), mid()]),
            other(vec![tech(100), dash(), words(), dash(), tech(50)]),
            other(vec![Slot::corpus(HumanName, 1000), dash(), tech(100), dash(), dict(1000), mid()]),
            other(vec![mid(), tech(100), dash(), dict(1000)]),
            other(vec![mid(), tech(100), dash(), dict(1000), dash(), tech(50)]),
            other(vec![mid(), tech(100), dash(), dict(1000), mid()]),
            other(vec![tech(100), mid(), dict(1000), mid()]),
            other(vec![mid(), tech(100), mid(), tech(100)]),
            other(vec![tech(100), dash(), dict(2000), mid()]),
            other(vec![mid(), tech(100), dict(1000), mid()]),
            other(vec![tech(100), mid(), dict(500), dash(), tech(50)]),
        ];
        let grant = |grantee, permission: &str, public, private| GrantSpec {
            grantee,
            permission: permission.into(),
            public,
            private,
        };
        let acl = BTreeMap::from([
            (
                Provider::Aws,
                AclSpec {
                    readable_public: 0.2354,
                    readable_private: 0.0105,
                    grants: vec![
                        grant(Grantee::AllUsers, "READ", 1.0, 0.0),
                        grant(Grantee::AllUsers, "WRITE", 0.134, 0.0482),
                        grant(Grantee::AllUsers, "WRITE_ACP", 0.0842, 0.0541),
                    ],
                },
            ),
            (
                Provider::Gcp,
                AclSpec {
                    readable_public: 0.2137,
                    readable_private: 0.2568,
                    grants: vec![
                        grant(Grantee::AllUsers, "storage.objects.list", 1.0, 0.0),
                        grant(Grantee::AllUsers, "storage.objects.get", 0.7602, 0.0101),
                        grant(Grantee::AllUsers, "storage.objects.create", 0.0604, 0.0006),
                        grant(Grantee::AllUsers, "storage.objects.delete", 0.0535, 0.0),
                        grant(Grantee::AllUsers, "storage.buckets.setIamPolicy", 0.0346, 0.0),
                    ],
                },
            ),
            (
                Provider::Alibaba,
                AclSpec {
                    readable_public: 0.005,
                    readable_private: 0.0003,
                    grants: vec![
                        grant(Grantee::AllUsers, "public-read", 1.0, 0.0),
                        grant(Grantee::AllUsers, "public-read-write", 0.5691, 0.0),
                    ],
                },
            ),
        ]);
        let cat = |c: &str, share| CategoryShare {
            category: c.into(),
            share,
        };
        NamespaceSpec {
            size,
            public_share: 0.13,
            sensitive_share: 0.106,
            alibaba_website_share: 0.2,
            zipf_exponent: 1.0,
            min_files: 50,
            max_files: 200,
            providers: vec![
                ProviderShare {
                    provider: Provider::Aws,
                    share: 0.7,
                },
                ProviderShare {
                    provider: Provider::Gcp,
                    share: 0.25,
                },
                ProviderShare {
                    provider: Provider::Alibaba,
                    share: 0.05,
                },
            ],
            categories: vec![
                cat("webpage", 0.2),
                cat("wordpress", 0.02),
                cat("images", 0.15),
                cat("videos", 0.02),
                cat("audio", 0.01),
                cat("logs", 0.06),
                cat("documents", 0.05),
                cat("raw_data", 0.05),
                cat("source_code", 0.02),
                cat("users.txt", 0.01),
                cat(UNCATEGORIZED, 0.41),
            ],
            acl,
            patterns,
        }
    }

    /// A spec whose names all come from one template.
    pub fn single(size: usize, slots: Vec<Slot>) -> Self {
        NamespaceSpec {
            patterns: vec![PatternTemplate { share: 1.0, slots }],
            ..NamespaceSpec::measured_mix(size)
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let sums_to_one = |what: &str, shares: &mut dyn Iterator<Item = f64>| -> Result<()> {
            let mut total = 0.0;
            for s in shares {
                if !(0.0..=1.0).contains(&s) {
                    return Err(Error::Config(format!("{what} share {s} outside [0, 1]")));
                }
                total += s;
            }
            if (total - 1.0).abs() > 1e-6 {
                return Err(Error::Config(format!("{what} shares sum to {total}, not 1")));
            }
            Ok(())
        };
        if self.patterns.is_empty() {
            return bad("no patterns".into());
        }
        sums_to_one("pattern", &mut self.patterns.iter().map(|p| p.share))?;
        sums_to_one("provider", &mut self.providers.iter().map(|p| p.share))?;
        if !self.categories.is_empty() {
            sums_to_one("category", &mut self.categories.iter().map(|c| c.share))?;
        }
        for (what, p) in [
            ("public", self.public_share),
            ("sensitive", self.sensitive_share),
            ("alibaba website", self.alibaba_website_share),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{what} share {p} outside [0, 1]"));
            }
        }
        if self.min_files == 0 || self.min_files > self.max_files || self.max_files > u16::MAX as usize
        {
            return bad(format!("bad file count range {}..={}", self.min_files, self.max_files));
        }
        let table = CategoryTable::bundled();
        for c in &self.categories {
            if c.category != UNCATEGORIZED && !table.names().any(|n| n == c.category) {
                return bad(format!("unknown category {:?}", c.category));
            }
        }
        for (provider, acl) in &self.acl {
            if acl.grants.len() > 7 {
                return bad(format!("{provider}: at most 7 grants"));
            }
            let probs = [acl.readable_public, acl.readable_private]
                .into_iter()
                .chain(acl.grants.iter().flat_map(|g| [g.public, g.private]));
            for p in probs {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("{provider}: probability {p} outside [0, 1]"));
                }
            }
        }
        for (i, p) in self.patterns.iter().enumerate() {
            if p.slots.is_empty() {
                return bad(format!("pattern {i} has no slots"));
            }
            for slot in &p.slots {
                match slot {
                    Slot::Rand { lengths, pool } => {
                        if lengths.iter().any(|(l, _)| *l == 0 || *l > name::MAX_LEN) {
                            return bad(format!("pattern {i}: random length out of range"));
                        }
                        sums_to_one("random length", &mut lengths.iter().map(|(_, p)| *p))?;
                        if *pool == Some(0) {
                            return bad(format!("pattern {i}: empty pool"));
                        }
                    }
                    Slot::Corpus { top, exponent, .. } => {
                        if *top == Some(0) {
                            return bad(format!("pattern {i}: top must be positive"));
                        }
                        if exponent.is_some_and(|e| !(e >= 0.0)) {
                            return bad(format!("pattern {i}: negative Zipf exponent"));
                        }
                    }
                    Slot::Literal { text } => {
                        if text.is_empty() || !text.chars().all(name::is_legal_char) {
                            return bad(format!("pattern {i}: bad literal {text:?}"));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Cumulative weights for sampling an index.
struct Weighted {
    cumulative: Vec<f64>,
}

impl Weighted {
    fn new(weights: impl IntoIterator<Item = f64>) -> Self {
        let mut total = 0.0;
        let cumulative = weights
            .into_iter()
            .map(|w| {
                total += w;
                total
            })
            .collect();
        Weighted { cumulative }
    }

    fn zipf(n: usize, exponent: f64) -> Self {
        Weighted::new((1..=n).map(|r| (r as f64).powf(-exponent)))
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty weights");
        let r = rng.gen::<f64>() * total;
        self.cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1)
    }
}

fn random_string(rng: &mut impl Rng, len: usize) -> String {
    (0..len)
        .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
        .collect()
}

fn is_pure_random(s: &str, corpora: &CorpusSet) -> bool {
    let (tokens, _) = min_cost_tiling(s, corpora);
    tokens.len() == 1 && tokens[0].class.is_random()
}

fn classes(s: &str, corpora: &CorpusSet) -> Vec<bool> {
    min_cost_tiling(s, corpora)
        .0
        .iter()
        .map(|t| matches!(t.class, TokenClass::Random))
        .collect()
}

enum Filler {
    Fresh {
        lengths: Vec<usize>,
        weights: Weighted,
    },
    Pool {
        items: Vec<String>,
        weights: Weighted,
    },
    Literal(String),
}

impl Filler {
    fn fill(&self, rng: &mut impl Rng, out: &mut String) {
        match self {
            Filler::Fresh { lengths, weights } => {
                let len = lengths[weights.sample(rng)];
                out.push_str(&random_string(rng, len));
            }
            Filler::Pool { items, weights } => out.push_str(&items[weights.sample(rng)]),
            Filler::Literal(s) => out.push_str(s),
        }
    }

    /// Upper bound on distinct values.
    fn capacity(&self) -> f64 {
        match self {
            Filler::Fresh { lengths, .. } => lengths
                .iter()
                .map(|&l| (ALPHABET.len() as f64).powi(l as i32))
                .sum(),
            Filler::Pool { items, .. } => items.len() as f64,
            Filler::Literal(_) => 1.0,
        }
    }
}

fn build_filler(
    slot: &Slot,
    corpora: &CorpusSet,
    exponent: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(Filler, Vec<bool>)> {
    Ok(match slot {
        Slot::Rand { lengths, pool } => {
            let lens: Vec<usize> = lengths.iter().map(|(l, _)| *l).collect();
            let weights = Weighted::new(lengths.iter().map(|(_, p)| *p));
            let filler = match pool {
                None => Filler::Fresh {
                    lengths: lens,
                    weights,
                },
                Some(n) => {
                    let mut seen = HashSet::new();
                    let mut items = Vec::with_capacity(*n);
                    let mut attempts = 0usize;
                    while items.len() < *n {
                        attempts += 1;
                        if attempts > n * 100 + 1000 {
                            return Err(Error::Capacity(format!(
                                "could not draw {n} distinct random pool strings"
                            )));
                        }
                        let len = lens[weights.sample(rng)];
                        let s = random_string(rng, len);
                        let edges_alnum = s.starts_with(|c: char| c.is_ascii_alphanumeric())
                            && s.ends_with(|c: char| c.is_ascii_alphanumeric());
                        if edges_alnum && is_pure_random(&s, corpora) && seen.insert(s.clone()) {
                            items.push(s);
                        }
                    }
                    Filler::Pool {
                        weights: Weighted::zipf(items.len(), exponent),
                        items,
                    }
                }
            };
            (filler, vec![true])
        }
        Slot::Corpus {
            corpus,
            top,
            exponent: slot_exponent,
        } => {
            let c = corpora
                .get(*corpus)
                .filter(|c| !c.is_empty())
                .ok_or_else(|| Error::Config(format!("no {corpus} corpus loaded")))?;
            let n = top.unwrap_or(c.len()).min(c.len());
            let items = c.entries()[..n].to_vec();
            (
                Filler::Pool {
                    weights: Weighted::zipf(n, slot_exponent.unwrap_or(exponent)),
                    items,
                },
                vec![false],
            )
        }
        Slot::Literal { text } => (Filler::Literal(text.clone()), classes(text, corpora)),
    })
}

/// Largest-remainder apportionment of `total` over `shares`.
fn apportion(total: usize, shares: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = shares.iter().map(|s| s * total as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut rest = total.saturating_sub(counts.iter().sum());
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle().take(rest.min(shares.len() * 2)) {
        if rest == 0 {
            break;
        }
        counts[i] += 1;
        rest -= 1;
    }
    counts
}

/// Bit set in [`Entry::acl`] when the ACL is readable.
const ACL_READABLE: u8 = 0x80;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub name: String,
    pub provider: Provider,
    /// `Private` or `Public`.
    pub state: ProbeState,
    /// Alibaba website mode: answers 200 without a listing.
    pub website: bool,
    acl: u8,
    /// Index into the bundled category table.
    category: Option<u8>,
    pub sensitive: bool,
    pub file_count: u16,
}

impl Entry {
    pub fn acl_readable(&self) -> bool {
        self.acl & ACL_READABLE != 0
    }
}

pub struct SyntheticNamespace {
    spec: NamespaceSpec,
    seed: u64,
    entries: Vec<Entry>,
    categories: CategoryTable,
}

pub fn build_namespace(
    spec: &NamespaceSpec,
    seed: u64,
    corpora: &CorpusSet,
) -> Result<SyntheticNamespace> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = apportion(
        spec.size,
        &spec.patterns.iter().map(|p| p.share).collect::<Vec<_>>(),
    );
    let mut seen: HashSet<String> = HashSet::with_capacity(spec.size);
    let mut names: Vec<String> = Vec::with_capacity(spec.size);
    let mut built: HashMap<String, (Rc<Filler>, Vec<bool>)> = HashMap::new();

    for (template, &count) in spec.patterns.iter().zip(&counts) {
        if count == 0 {
            continue;
        }
        let mut fillers: Vec<Rc<Filler>> = Vec::new();
        let mut expected = Vec::new();
        for slot in &template.slots {
            let key = serde_json::to_string(slot).expect("slot serializes");
            let (f, c) = match built.get(&key) {
                Some(hit) => hit.clone(),
                None => {
                    let (f, c) = build_filler(slot, corpora, spec.zipf_exponent, &mut rng)?;
                    let entry = (Rc::new(f), c);
                    built.insert(key, entry.clone());
                    entry
                }
            };
            fillers.push(f);
            expected.extend(c);
        }
        let capacity: f64 = fillers.iter().map(|f| f.capacity()).product();
        if (count as f64) > capacity {
            return Err(Error::Capacity(format!(
                "{count} names requested from a template with at most {capacity} distinct names"
            )));
        }
        let budget = count.saturating_mul(200).max(10_000);
        let mut attempts = 0usize;
        let mut accepted = 0usize;
        let mut buf = String::new();
        while accepted < count {
            attempts += 1;
            if attempts > budget {
                return Err(Error::Capacity(format!(
                    "only {accepted} of {count} distinct names found for a template"
                )));
            }
            buf.clear();
            for f in &fillers {
                f.fill(&mut rng, &mut buf);
            }
            if !name::is_legal(&buf) || seen.contains(buf.as_str()) {
                continue;
            }
            if classes(&buf, corpora) != expected {
                continue;
            }
            seen.insert(buf.clone());
            names.push(buf.clone());
            accepted += 1;
        }
    }
    drop(seen);

    let categories = CategoryTable::bundled();
    let provider_w = Weighted::new(spec.providers.iter().map(|p| p.share));
    let category_w = Weighted::new(spec.categories.iter().map(|c| c.share));
    let category_idx: Vec<Option<u8>> = spec
        .categories
        .iter()
        .map(|c| {
            categories
                .names()
                .position(|n| n == c.category)
                .map(|i| i as u8)
        })
        .collect();

    let mut entries: Vec<Entry> = names
        .into_iter()
        .map(|name| {
            let provider = spec.providers[provider_w.sample(&mut rng)].provider;
            let public = rng.gen_bool(spec.public_share);
            let website =
                !public && provider == Provider::Alibaba && rng.gen_bool(spec.alibaba_website_share);
            let mut acl = 0u8;
            if let Some(a) = spec.acl.get(&provider) {
                let readable = if public { a.readable_public } else { a.readable_private };
                if rng.gen_bool(readable) {
                    acl |= ACL_READABLE;
                    for (bit, g) in a.grants.iter().enumerate() {
                        let p = if public { g.public } else { g.private };
                        if rng.gen_bool(p) {
                            acl |= 1 << bit;
                        }
                    }
                }
            }
            let category = if spec.categories.is_empty() {
                None
            } else {
                category_idx[category_w.sample(&mut rng)]
            };
            let only_file = category
                .and_then(|i| categories.categories().get(i as usize))
                .is_some_and(|c| c.only_file.is_some());
            let file_count = if only_file {
                1
            } else {
                rng.gen_range(spec.min_files..=spec.max_files) as u16
            };
            let sensitive = public && !only_file && rng.gen_bool(spec.sensitive_share);
            Entry {
                name,
                provider,
                state: if public {
                    ProbeState::Public
                } else {
                    ProbeState::Private
                },
                website,
                acl,
                category,
                sensitive,
                file_count,
            }
        })
        .collect();
    entries.sort_unstable_by(|a, b| a.name.cmp(&b.name));

    Ok(SyntheticNamespace {
        spec: spec.clone(),
        seed,
        entries,
        categories,
    })
}

/// FNV-1a, used to derive per-bucket seeds that do not depend on build
/// order or platform.
fn fnv1a(seed: u64, s: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ seed;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

const SENSITIVE_FILES: [&str; 6] = [
    "backup/db-2019.sql.gz",
    "keys/server.p12",
    "old/site.bak",
    "config/.env",
    "deploy/id_rsa",
    "exports/customers.sql",
];

const NEUTRAL_DIRS: [&str; 4] = ["misc", "tmp", "share", "files"];

pub const MAGIC: &[u8; 4] = b"BKNS";
pub const VERSION: u16 = 1;

impl SyntheticNamespace {
    pub fn spec(&self) -> &NamespaceSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&Entry> {
        self.entries
            .binary_search_by(|e| e.name.as_str().cmp(name))
            .ok()
            .map(|i| &self.entries[i])
    }

    /// Status code and listability a provider would return.
    pub fn oracle_probe(&self, name: &str, provider: Provider) -> (u16, bool) {
        match self.get(name) {
            Some(e) if e.provider == provider => match e.state {
                ProbeState::Public => (200, true),
                _ if e.website => (200, false),
                _ => (403, false),
            },
            _ => (404, false),
        }
    }

    pub fn category_of(&self, entry: &Entry) -> Option<&str> {
        entry
            .category
            .and_then(|i| self.categories.categories().get(i as usize))
            .map(|c| c.name.as_str())
    }

    pub fn acl_of(&self, entry: &Entry) -> Option<AclRecord> {
        if !entry.acl_readable() {
            return None;
        }
        let mut grants = vec![Grant::new(Grantee::Specific, owner_token(entry.provider))];
        if let Some(spec) = self.spec.acl.get(&entry.provider) {
            for (bit, g) in spec.grants.iter().enumerate() {
                if entry.acl & (1 << bit) != 0 {
                    grants.push(Grant::new(g.grantee, g.permission.clone()));
                }
            }
        }
        Some(AclRecord::new(entry.provider, grants))
    }

    /// File listing of a bucket, derived from the namespace seed and name.
    pub fn files_of(&self, entry: &Entry) -> Vec<FileMeta> {
        let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(self.seed, &entry.name));
        let category = entry
            .category
            .and_then(|i| self.categories.categories().get(i as usize));
        if let Some(c) = category.filter(|c| c.only_file.is_some()) {
            return vec![file(&mut rng, c.only_file.clone().unwrap())];
        }
        let keywords: Vec<&str> = match category {
            Some(c) => c
                .keywords
                .iter()
                .filter(|k| {
                    self.categories
                        .categories()
                        .iter()
                        .filter(|o| o.name != c.name)
                        .all(|o| !o.keywords.contains(k))
                })
                .map(String::as_str)
                .collect(),
            None => Vec::new(),
        };
        let mut files: Vec<FileMeta> = (0..entry.file_count as usize)
            .map(|i| {
                let key = if keywords.is_empty() {
                    let dir = NEUTRAL_DIRS[rng.gen_range(0..NEUTRAL_DIRS.len())];
                    format!("{dir}/item{i:04}.dat")
                } else {
                    let kw = keywords[rng.gen_range(0..keywords.len())];
                    format!("{kw}/obj{i:04}")
                };
                file(&mut rng, key)
            })
            .collect();
        if entry.sensitive {
            let key = SENSITIVE_FILES[rng.gen_range(0..SENSITIVE_FILES.len())];
            files.push(file(&mut rng, key.to_owned()));
        }
        files
    }

    pub fn contents(&self, name: &str, provider: Provider) -> BucketContents {
        match self.get(name).filter(|e| e.provider == provider) {
            Some(e) => BucketContents {
                acl: self.acl_of(e),
                files: if e.state == ProbeState::Public {
                    self.files_of(e)
                } else {
                    Vec::new()
                },
            },
            None => BucketContents::default(),
        }
    }

    /// A seeded sample of about `fraction` of all names, in name order.
    pub fn sample_names(&self, fraction: f64, seed: u64) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.entries
            .iter()
            .filter(|_| rng.gen_bool(fraction.clamp(0.0, 1.0)))
            .map(|e| e.name.clone())
            .collect()
    }

    /// Tab-separated listing of the first `n` entries.
    pub fn dump_sample(&self, n: usize) -> String {
        let mut out = String::from("name\tprovider\tstate\twebsite\tcategory\tfiles\tsensitive\tacl\n");
        for e in self.entries.iter().take(n) {
            let acl = match self.acl_of(e) {
                Some(a) => a
                    .grants
                    .iter()
                    .map(|g| format!("{:?}:{}", g.grantee, g.permission))
                    .collect::<Vec<_>>()
                    .join(","),
                None => "-".into(),
            };
            out.push_str(&format!(
                "{}\t{}\t{:?}\t{}\t{}\t{}\t{}\t{}\n",
                e.name,
                e.provider,
                e.state,
                e.website,
                self.category_of(e).unwrap_or(UNCATEGORIZED),
                e.file_count,
                e.sensitive,
                acl
            ));
        }
        out
    }

    /// Versioned binary form:
    ///
    /// ```text
    /// "BKNS" u16 version, u64 seed, u32 len + spec TOML, u32 entry count,
    /// then per entry: u32 len + name, u8 provider, u8 public, u8 website,
    /// u8 acl bits, u8 category (255 = none), u8 sensitive, u16 file count
    /// ```
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.entries.len() * 24);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        let spec = self.spec.to_toml();
        out.extend_from_slice(&(spec.len() as u32).to_le_bytes());
        out.extend_from_slice(spec.as_bytes());
        out.extend_from_slice(&(self.entries.len() as u32).to_le_bytes());
        for e in &self.entries {
            out.extend_from_slice(&(e.name.len() as u32).to_le_bytes());
            out.extend_from_slice(e.name.as_bytes());
            out.push(Provider::ALL.iter().position(|p| *p == e.provider).unwrap() as u8);
            out.push((e.state == ProbeState::Public) as u8);
            out.push(e.website as u8);
            out.push(e.acl);
            out.push(e.category.unwrap_or(u8::MAX));
            out.push(e.sensitive as u8);
            out.extend_from_slice(&e.file_count.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let end = pos + n;
            if end > bytes.len() {
                return Err(Error::Codec(format!("namespace truncated at byte {pos}")));
            }
            let s = &bytes[pos..end];
            pos = end;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(Error::Codec("bad namespace magic".into()));
        }
        let version = u16::from_le_bytes(take(2)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Codec(format!("unsupported namespace version {version}")));
        }
        let seed = u64::from_le_bytes(take(8)?.try_into().unwrap());
        let n = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let spec_text = std::str::from_utf8(take(n)?)
            .map_err(|_| Error::Codec("spec is not UTF-8".into()))?
            .to_owned();
        let spec = NamespaceSpec::from_toml(&spec_text)?;
        let count = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
        let categories = CategoryTable::bundled();
        let mut entries = Vec::with_capacity(count.min(1 << 24));
        for _ in 0..count {
            let n = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            let name = std::str::from_utf8(take(n)?)
                .map_err(|_| Error::Codec("name is not UTF-8".into()))?
                .to_owned();
            let f = take(6)?;
            let provider = *Provider::ALL
                .get(f[0] as usize)
                .ok_or_else(|| Error::Codec(format!("bad provider {}", f[0])))?;
            let category = match f[4] {
                u8::MAX => None,
                i if (i as usize) < categories.categories().len() => Some(i),
                i => return Err(Error::Codec(format!("bad category {i}"))),
            };
            let file_count = u16::from_le_bytes(take(2)?.try_into().unwrap());
            entries.push(Entry {
                name,
                provider,
                state: if f[1] == 1 {
                    ProbeState::Public
                } else {
                    ProbeState::Private
                },
                website: f[2] == 1,
                acl: f[3],
                category,
                sensitive: f[5] == 1,
                file_count,
            });
        }
        if pos != bytes.len() {
            return Err(Error::Codec("trailing bytes after namespace".into()));
        }
        if entries.windows(2).any(|w| w[0].name >= w[1].name) {
            return Err(Error::Codec("namespace entries not sorted and unique".into()));
        }
        Ok(SyntheticNamespace {
            spec,
            seed,
            entries,
            categories,
        })
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
}

fn owner_token(provider: Provider) -> &'static str {
    match provider {
        Provider::Aws => "FULL_CONTROL",
        Provider::Gcp => "roles/storage.admin",
        Provider::Alibaba => "private",
    }
}

fn file(rng: &mut impl Rng, key: String) -> FileMeta {
    FileMeta {
        etag: format!("{:032x}", rng.gen::<u128>()),
        size: rng.gen_range(1..10_000_000),
        last_modified: format!(
            "20{:02}-{:02}-{:02}T00:00:00.000Z",
            rng.gen_range(12..21),
            rng.gen_range(1..13),
            rng.gen_range(1..29)
        ),
        key,
    }
}

impl ProbeBackend for SyntheticNamespace {
    fn probe(&self, name: &str, provider: Provider) -> Result<ProbeResponse> {
        let (status, listable) = self.oracle_probe(name, provider);
        Ok(ProbeResponse { status, listable })
    }

    fn inspect(&self, name: &str, provider: Provider) -> Result<BucketContents> {
        Ok(self.contents(name, provider))
    }
}
