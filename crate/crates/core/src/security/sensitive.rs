use std::path::Path;

use globset::{GlobBuilder, GlobMatcher};
use regex::{Regex, RegexBuilder};
use serde::{Deserialize, Serialize};

use super::FileMeta;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
enum Matcher {
    /// Matched against the last path segment.
    Glob(GlobMatcher),
    /// Matched against the whole key.
    Regex(Regex),
}

#[derive(Clone, Debug)]
pub struct SensitiveRule {
    pub id: String,
    pub pattern: String,
    pub class: String,
    matcher: Matcher,
}

impl SensitiveRule {
    pub fn new(id: &str, pattern: &str, class: &str) -> Result<Self> {
        let err = |reason: String| Error::Pattern {
            id: id.to_owned(),
            reason,
        };
        if id.is_empty() || pattern.is_empty() {
            return Err(err("empty id or pattern".into()));
        }
        let matcher = if pattern.starts_with('^') {
            Matcher::Regex(
                RegexBuilder::new(pattern)
                    .case_insensitive(true)
                    .build()
                    .map_err(|e| err(e.to_string()))?,
            )
        } else {
            Matcher::Glob(
                GlobBuilder::new(pattern)
                    .case_insensitive(true)
                    .literal_separator(true)
                    .build()
                    .map_err(|e| err(e.to_string()))?
                    .compile_matcher(),
            )
        };
        Ok(SensitiveRule {
            id: id.to_owned(),
            pattern: pattern.to_owned(),
            class: class.to_owned(),
            matcher,
        })
    }

    pub fn matches(&self, key: &str) -> bool {
        match &self.matcher {
            Matcher::Glob(g) => g.is_match(key.rsplit('/').next().unwrap_or(key)),
            Matcher::Regex(r) => r.is_match(key),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SensitiveMatch {
    pub key: String,
    pub pattern_id: String,
}

#[derive(Clone, Debug)]
pub struct PatternSet {
    rules: Vec<SensitiveRule>,
}

impl PatternSet {
    pub fn bundled() -> Self {
        Self::parse(include_str!("../../data/sensitive_patterns.tsv"))
            .expect("bundled patterns parse")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// One rule per line: `id<TAB>pattern<TAB>class`. Lines starting with
    /// `#` and blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules: Vec<SensitiveRule> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::Pattern {
                    id: format!("line {}", i + 1),
                    reason: format!("expected 3 tab-separated columns, got {}", cols.len()),
                });
            }
            if rules.iter().any(|r| r.id == cols[0]) {
                return Err(Error::Pattern {
                    id: cols[0].to_owned(),
                    reason: "duplicate id".into(),
                });
            }
            rules.push(SensitiveRule::new(cols[0], cols[1], cols[2])?);
        }
        Ok(PatternSet { rules })
    }

    pub fn rules(&self) -> &[SensitiveRule] {
        &self.rules
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn class_of(&self, id: &str) -> Option<&str> {
        self.rules
            .iter()
            .find(|r| r.id == id)
            .map(|r| r.class.as_str())
    }
}

/// Every (file, rule) match, sorted by key then rule id.
pub fn detect_sensitive(files: &[FileMeta], patterns: &PatternSet) -> Vec<SensitiveMatch> {
    let mut out = Vec::new();
    for f in files {
        for r in &patterns.rules {
            if r.matches(&f.key) {
                out.push(SensitiveMatch {
                    key: f.key.clone(),
                    pattern_id: r.id.clone(),
                });
            }
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn files(keys: &[&str]) -> Vec<FileMeta> {
        keys.iter().map(|k| FileMeta::named(*k)).collect()
    }

    #[test]
    fn bundled_set_has_sixty_rules() {
        let p = PatternSet::bundled();
        assert_eq!(p.len(), 60);
    }

    #[test]
    fn examples() {
        let p = PatternSet::bundled();
        let m = detect_sensitive(&files(&["prod-db.sql.gz"]), &p);
        assert!(m.iter().any(|m| p.class_of(&m.pattern_id) == Some("database_dump")));
        let m = detect_sensitive(&files(&["certs/server.p12"]), &p);
        assert!(m.iter().any(|m| p.class_of(&m.pattern_id) == Some("private_key")));
        assert!(detect_sensitive(&files(&["logo.png"]), &p).is_empty());
    }

    #[test]
    fn case_insensitive_and_anchored() {
        let p = PatternSet::bundled();
        assert!(!detect_sensitive(&files(&["SERVER.PFX"]), &p).is_empty());
        assert!(!detect_sensitive(&files(&["home/.aws/credentials"]), &p).is_empty());
        assert!(detect_sensitive(&files(&["home/aws/credentials-notes"]), &p).is_empty());
    }

    #[test]
    fn malformed_patterns_rejected() {
        assert!(PatternSet::parse("bad\t[abc\tx\n").is_err());
        assert!(PatternSet::parse("bad\t^(abc\tx\n").is_err());
        assert!(PatternSet::parse("only-two\t*.x\n").is_err());
        assert!(PatternSet::parse("a\t*.x\tc\na\t*.y\tc\n").is_err());
    }
}
