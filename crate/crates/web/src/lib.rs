//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Each export takes plain strings and returns JSON text; the functions
//! without the `js_` prefix are the same operations for native callers and
//! tests.

use std::cell::OnceCell;
use std::collections::HashSet;

use bucketgen::analyzer::{decompose, extract_pattern, reporting_log10_guesses, TokenClass};
use bucketgen::corpus::CorpusSet;
use bucketgen::generators::{train, CandidateStream, GeneratorKind, DEFAULT_ORDER};
use bucketgen::security::{categorize_bucket, detect_sensitive, CategoryTable, FileMeta, PatternSet};
use serde::Serialize;
use wasm_bindgen::prelude::*;

thread_local! {
    static CORPORA: OnceCell<CorpusSet> = const { OnceCell::new() };
}

fn with_corpora<T>(f: impl FnOnce(&CorpusSet) -> T) -> T {
    CORPORA.with(|c| f(c.get_or_init(CorpusSet::bundled)))
}

#[derive(Serialize)]
pub struct TokenView {
    pub text: String,
    /// Corpus kind, or "random".
    pub class: String,
    pub rank: Option<u32>,
}

#[derive(Serialize)]
pub struct NameView {
    pub name: String,
    pub tokens: Vec<TokenView>,
    pub pattern: String,
    pub kinds: String,
    pub log10_guesses: f64,
    pub reporting_log10_guesses: f64,
    pub entropy_bits: f64,
}

pub fn analyze(name: &str) -> Result<NameView, String> {
    let d = with_corpora(|c| decompose(name.trim(), c)).map_err(|e| e.to_string())?;
    let pattern = extract_pattern(&d);
    Ok(NameView {
        name: d.name.clone(),
        tokens: d
            .tokens
            .iter()
            .map(|t| match t.class {
                TokenClass::Random => TokenView { text: t.text.clone(), class: "random".into(), rank: None },
                TokenClass::Corpus { kind, rank } => TokenView {
                    text: t.text.clone(),
                    class: kind.to_string(),
                    rank: Some(rank),
                },
            })
            .collect(),
        pattern: pattern.generic(),
        kinds: pattern.with_kinds(),
        log10_guesses: d.log10_guesses,
        reporting_log10_guesses: reporting_log10_guesses(&d),
        entropy_bits: d.shannon_entropy_bits,
    })
}

/// Trains `kind` on the names in `training` (one per line) and draws
/// `count` distinct candidates not in the training list.
pub fn generate(kind: &str, training: &str, count: usize, seed: u64) -> Result<Vec<String>, String> {
    let kind: GeneratorKind = kind.parse().map_err(|e: bucketgen::Error| e.to_string())?;
    let names: Vec<&str> = training.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let model = with_corpora(|c| train(kind, &names, c, DEFAULT_ORDER)).map_err(|e| e.to_string())?;
    let mut seen: HashSet<String> = names.iter().map(|n| n.to_string()).collect();
    let mut stream = CandidateStream::new(&model, seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        match stream.next_accepted(|n| seen.insert(n.to_owned())) {
            Ok(n) => out.push(n),
            // Small models run out of new names; return what there is.
            Err(_) => break,
        }
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct ListingView {
    pub files: usize,
    pub category: Option<String>,
    pub sensitive: Vec<(String, String)>,
}

/// Category and sensitive-file matches for a listing given one key per line.
pub fn inspect_listing(listing: &str) -> ListingView {
    let files: Vec<FileMeta> = listing
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(FileMeta::named)
        .collect();
    ListingView {
        files: files.len(),
        category: categorize_bucket(&files, &CategoryTable::bundled()),
        sensitive: detect_sensitive(&files, &PatternSet::bundled())
            .into_iter()
            .map(|m| (m.key, m.pattern_id))
            .collect(),
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("views serialize")
}

#[wasm_bindgen(js_name = analyzeName)]
pub fn js_analyze(name: &str) -> Result<String, JsError> {
    analyze(name).map(|v| json(&v)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = generateNames)]
pub fn js_generate(kind: &str, training: &str, count: usize, seed: u32) -> Result<String, JsError> {
    generate(kind, training, count, seed as u64).map(|v| json(&v)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = inspectListing)]
pub fn js_inspect(listing: &str) -> String {
    json(&inspect_listing(listing))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analyze_splits_known_words() {
        let v = analyze("backup-2020").unwrap();
        assert_eq!(v.tokens.iter().map(|t| t.text.as_str()).collect::<String>(), "backup-2020");
        assert_eq!(v.tokens[0].class, "tech_term");
        assert_eq!(v.tokens[0].rank, Some(10));
        assert!(analyze("UPPER").is_err());
    }

    #[test]
    fn generate_is_seeded_and_fresh() {
        let training = "photos-2019\nphotos-2020\nbackup-prod\nbackup-dev\nlogs-prod\n";
        let a = generate("token_pcfg", training, 5, 1).unwrap();
        assert_eq!(a, generate("token_pcfg", training, 5, 1).unwrap());
        assert!(a.iter().all(|n| !training.lines().any(|t| t == n)));
        assert!(generate("nope", training, 5, 1).is_err());
        assert!(generate("uniform_random", training, 5, 1).is_err());
    }

    #[test]
    fn listing_categories_and_secrets() {
        let v = inspect_listing("users.txt\n");
        assert_eq!(v.category.as_deref(), Some("users.txt"));
        let v = inspect_listing("img/a.jpg\nimg/b.png\nbackup/db.sql\n");
        assert_eq!(v.files, 3);
        assert!(v.category.is_none());
        assert!(!v.sensitive.is_empty());
    }
}
