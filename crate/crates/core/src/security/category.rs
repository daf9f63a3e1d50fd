use std::path::Path;

use super::FileMeta;
use crate::error::{Error, Result};

/// Fraction of files (in percent) that must match a category's keywords.
pub const THRESHOLD_PERCENT: usize = 98;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Category {
    pub name: String,
    pub keywords: Vec<String>,
    /// The bucket must hold exactly this one file.
    pub only_file: Option<String>,
}

#[derive(Clone, Debug)]
pub struct CategoryTable {
    categories: Vec<Category>,
}

fn terms(key: &str) -> Vec<String> {
    let key = key.to_lowercase();
    let mut out: Vec<String> = key
        .split('/')
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect();
    if let Some(base) = key.rsplit('/').next() {
        out.extend(base.split('.').filter(|s| !s.is_empty()).map(str::to_owned));
    }
    out
}

fn basename(key: &str) -> &str {
    key.rsplit('/').next().unwrap_or(key)
}

impl CategoryTable {
    pub fn bundled() -> Self {
        Self::parse(include_str!("../../data/categories.tsv")).expect("bundled categories parse")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// `name<TAB>kw,kw,...` per line in tie-break order. A keyword field of
    /// `@only:<file>` means the bucket holds exactly that file.
    pub fn parse(text: &str) -> Result<Self> {
        let mut categories = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, rest) = line
                .split_once('\t')
                .ok_or_else(|| Error::Config(format!("category line {}: missing tab", i + 1)))?;
            let rest = rest.trim();
            let category = if let Some(file) = rest.strip_prefix("@only:") {
                Category {
                    name: name.to_owned(),
                    keywords: Vec::new(),
                    only_file: Some(file.to_lowercase()),
                }
            } else {
                Category {
                    name: name.to_owned(),
                    keywords: rest
                        .split(',')
                        .map(|k| k.trim().to_lowercase())
                        .filter(|k| !k.is_empty())
                        .collect(),
                    only_file: None,
                }
            };
            categories.push(category);
        }
        Ok(CategoryTable { categories })
    }

    pub fn categories(&self) -> &[Category] {
        &self.categories
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.categories.iter().map(|c| c.name.as_str())
    }
}

/// The category most of whose files match its keywords, requiring at least
/// 98% of files to match. Ties go to the earlier category in the table.
pub fn categorize_bucket(files: &[FileMeta], table: &CategoryTable) -> Option<String> {
    if files.is_empty() {
        return None;
    }
    let file_terms: Vec<Vec<String>> = files.iter().map(|f| terms(&f.key)).collect();
    let total = files.len();
    let mut best: Option<(usize, &Category)> = None;
    for c in &table.categories {
        let matched = match &c.only_file {
            Some(only) => {
                if total == 1 && basename(&files[0].key).to_lowercase() == *only {
                    1
                } else {
                    0
                }
            }
            None => file_terms
                .iter()
                .filter(|ts| ts.iter().any(|t| c.keywords.contains(t)))
                .count(),
        };
        if matched * 100 < THRESHOLD_PERCENT * total {
            continue;
        }
        if best.map_or(true, |(m, _)| matched > m) {
            best = Some((matched, c));
        }
    }
    best.map(|(_, c)| c.name.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn files(keys: impl IntoIterator<Item = String>) -> Vec<FileMeta> {
        keys.into_iter().map(FileMeta::named).collect()
    }

    #[test]
    fn images() {
        let t = CategoryTable::bundled();
        let f = files((0..100).map(|i| format!("img/{i}.{}", if i % 2 == 0 { "jpg" } else { "png" })));
        assert_eq!(categorize_bucket(&f, &t).as_deref(), Some("images"));
    }

    #[test]
    fn mixed_below_threshold() {
        let t = CategoryTable::bundled();
        let f = files((0..100).map(|i| format!("{i}.{}", if i < 50 { "jpg" } else { "mp4" })));
        assert_eq!(categorize_bucket(&f, &t), None);
    }

    #[test]
    fn wordpress_at_99() {
        let t = CategoryTable::bundled();
        let mut keys: Vec<String> = (0..99).map(|i| format!("wp-content/uploads/x{i}")).collect();
        keys.push("readme".into());
        assert_eq!(categorize_bucket(&files(keys), &t).as_deref(), Some("wordpress"));
    }

    #[test]
    fn users_txt_only() {
        let t = CategoryTable::bundled();
        assert_eq!(
            categorize_bucket(&files(["users.txt".to_string()]), &t).as_deref(),
            Some("users.txt")
        );
        assert_eq!(
            categorize_bucket(&files(["users.txt".to_string(), "a.txt".to_string()]), &t),
            None
        );
    }

    #[test]
    fn segment_semantics_not_substring() {
        let t = CategoryTable::bundled();
        // "jpgs" contains "jpg" but is not a segment, component or extension.
        let f = files((0..10).map(|i| format!("jpgs/file{i}")));
        assert_eq!(categorize_bucket(&f, &t), None);
        let f = files((0..10).map(|i| format!("Logs/x{i}")));
        assert_eq!(categorize_bucket(&f, &t).as_deref(), Some("logs"));
    }

    #[test]
    fn ties_go_to_table_order() {
        let t = CategoryTable::parse("first\tx\nsecond\tx\n").unwrap();
        let f = files(["a.x".to_string()]);
        assert_eq!(categorize_bucket(&f, &t).as_deref(), Some("first"));
    }
}
