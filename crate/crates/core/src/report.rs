//! CSV summaries of decomposition records, security profiles and run
//! metrics. Every report is a pure function of its input records.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::analyzer::{pattern_census, CensusRow, DecompositionRecord, PatternKey};
use crate::error::{Error, Result};
use crate::pipeline::IterationMetrics;
use crate::security::BucketSecurityProfile;
use crate::validation::ProbeState;

pub use crate::namespace::UNCATEGORIZED;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportKind {
    Patterns,
    Guessability,
    Security,
    Hitrate,
}

impl std::str::FromStr for ReportKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "patterns" => ReportKind::Patterns,
            "guessability" => ReportKind::Guessability,
            "security" => ReportKind::Security,
            "hitrate" => ReportKind::Hitrate,
            _ => return Err(Error::Config(format!("unknown report kind {s:?}"))),
        })
    }
}

/// Pattern census of the records, truncated to the `top` most common
/// patterns when given.
pub fn report_patterns(records: &[DecompositionRecord], top: Option<usize>) -> Result<Vec<CensusRow>> {
    let mut rows = pattern_census(records.iter().map(|r| &r.decomposition), PatternKey::Generic)?;
    if let Some(k) = top {
        rows.truncate(k);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdfPoint {
    pub log10_guesses: f64,
    pub cumulative_fraction: f64,
}

/// Empirical CDF of reported guessability, one point per distinct value.
pub fn report_guessability(records: &[DecompositionRecord]) -> Result<Vec<CdfPoint>> {
    if records.is_empty() {
        return Err(Error::EmptyInput("guessability report needs at least one record"));
    }
    let mut values: Vec<f64> = records.iter().map(|r| r.reporting_log10_guesses).collect();
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mut out: Vec<CdfPoint> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let frac = (i + 1) as f64 / n;
        match out.last_mut() {
            Some(p) if p.log10_guesses == *v => p.cumulative_fraction = frac,
            _ => out.push(CdfPoint {
                log10_guesses: *v,
                cumulative_fraction: frac,
            }),
        }
    }
    Ok(out)
}

/// Median of a non-empty sample.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[mid]
    } else {
        (v[mid - 1] + v[mid]) / 2.0
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecurityRow {
    /// `flag` or `category`.
    pub section: String,
    pub provider: String,
    /// `public` or `private`.
    pub population: String,
    pub item: String,
    pub count: usize,
    pub total: usize,
    pub share: f64,
}

/// Per provider and population: how many buckets carry each flag, and (for
/// public buckets) how they split across content categories. Flags with no
/// bucket are left out.
pub fn report_security(profiles: &[BucketSecurityProfile]) -> Result<Vec<SecurityRow>> {
    if profiles.is_empty() {
        return Err(Error::EmptyInput("security report needs at least one profile"));
    }
    type Key = (String, String);
    let mut totals: BTreeMap<Key, usize> = BTreeMap::new();
    let mut flags: BTreeMap<(Key, String), usize> = BTreeMap::new();
    let mut categories: BTreeMap<(Key, String), usize> = BTreeMap::new();
    for p in profiles {
        let population = match p.state {
            ProbeState::Public => "public",
            ProbeState::Private => "private",
            _ => continue,
        };
        let key = (p.provider.as_str().to_owned(), population.to_owned());
        *totals.entry(key.clone()).or_default() += 1;
        for f in &p.flags {
            *flags.entry((key.clone(), f.as_str().to_owned())).or_default() += 1;
        }
        if p.state == ProbeState::Public {
            let c = p.category.clone().unwrap_or_else(|| UNCATEGORIZED.to_owned());
            *categories.entry((key, c)).or_default() += 1;
        }
    }
    let rows = |section: &str, table: BTreeMap<(Key, String), usize>| {
        let totals = &totals;
        let section = section.to_owned();
        table.into_iter().map(move |((key, item), count)| {
            let total = totals[&key];
            SecurityRow {
                section: section.clone(),
                provider: key.0,
                population: key.1,
                item,
                count,
                total,
                share: count as f64 / total as f64,
            }
        })
    };
    let mut out: Vec<SecurityRow> = rows("flag", flags).collect();
    out.extend(rows("category", categories));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitRateRow {
    pub iteration: usize,
    pub issued: usize,
    pub valid: usize,
    pub hit_rate: f64,
    pub cumulative_issued: usize,
    pub cumulative_valid: usize,
    pub cumulative_hit_rate: f64,
    pub generation_secs: f64,
    pub training_secs: f64,
}

/// Hit rate per iteration plus the running totals, for hit-rate and
/// time-versus-found curves.
pub fn report_hitrate(metrics: &[IterationMetrics]) -> Result<Vec<HitRateRow>> {
    if metrics.is_empty() {
        return Err(Error::EmptyInput("hit-rate report needs at least one iteration"));
    }
    Ok(metrics
        .iter()
        .map(|m| HitRateRow {
            iteration: m.iteration,
            issued: m.issued,
            valid: m.valid,
            hit_rate: m.hit_rate,
            cumulative_issued: m.cumulative_issued,
            cumulative_valid: m.cumulative_valid,
            cumulative_hit_rate: if m.cumulative_issued == 0 {
                0.0
            } else {
                m.cumulative_valid as f64 / m.cumulative_issued as f64
            },
            generation_secs: m.generation_secs,
            training_secs: m.training_secs,
        })
        .collect())
}

/// Writes rows as CSV with a header line.
pub fn write_csv<T: Serialize>(rows: &[T], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Config(format!("csv: {e}")))?;
    }
    w.flush()
        .map_err(|e| Error::io(std::path::Path::new("<csv>"), e))
}

/// Reads `input` (JSON lines of the kind's record type) and writes the
/// report as CSV.
pub fn report_file(
    kind: ReportKind,
    input: impl AsRef<std::path::Path>,
    top: Option<usize>,
    out: impl Write,
) -> Result<()> {
    use crate::records::read_records;
    match kind {
        ReportKind::Patterns => write_csv(&report_patterns(&read_records(input)?, top)?, out),
        ReportKind::Guessability => write_csv(&report_guessability(&read_records(input)?)?, out),
        ReportKind::Security => write_csv(&report_security(&read_records(input)?)?, out),
        ReportKind::Hitrate => write_csv(&report_hitrate(&read_records(input)?)?, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::decompose;
    use crate::corpus::{Corpus, CorpusKind, CorpusSet};
    use crate::security::{Flag, SensitiveMatch};
    use crate::validation::Provider;

    fn corpora() -> CorpusSet {
        CorpusSet::new([
            Corpus::from_tokens(CorpusKind::Dictionary, ["data", "test", "prod"]),
            Corpus::symbols(),
        ])
    }

    fn recs(names: &[&str]) -> Vec<DecompositionRecord> {
        let c = corpora();
        names
            .iter()
            .map(|n| decompose(n, &c).unwrap().into())
            .collect()
    }

    #[test]
    fn single_record_full_share() {
        let rows = report_patterns(&recs(&["testdata"]), None).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].share, 1.0);
        assert!(report_patterns(&[], None).is_err());
    }

    #[test]
    fn hand_counted_census() {
        let names = [
            "xkqzv", "qqwjz", "zzkvx", "testxkq", "prodzvq", "datatest", "testprod",
            "xqzvtest", "qzzkdata", "wkxq",
        ];
        let rows = report_patterns(&recs(&names), None).unwrap();
        let got: Vec<(&str, usize)> = rows.iter().map(|r| (r.pattern.as_str(), r.count)).collect();
        assert_eq!(
            got,
            [("(rand)", 4), ("(corpus,corpus)", 2), ("(corpus,rand)", 2), ("(rand,corpus)", 2)]
        );
        let top = report_patterns(&recs(&names), Some(2)).unwrap();
        assert_eq!(top.len(), 2);
        let total: f64 = rows.iter().map(|r| r.share).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn cdf_shapes() {
        let same = report_guessability(&recs(&["xkqzv", "xkqzv", "qqwjz"])).unwrap();
        assert_eq!(same.len(), 1);
        assert_eq!(same[0].cumulative_fraction, 1.0);
        let two = report_guessability(&recs(&["xkq", "xkqzvw"])).unwrap();
        let fr: Vec<f64> = two.iter().map(|p| p.cumulative_fraction).collect();
        assert_eq!(fr, [0.5, 1.0]);
        assert!(two[0].log10_guesses < two[1].log10_guesses);
        assert!(report_guessability(&[]).is_err());
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[1.0, 2.0]), Some(1.5));
    }

    fn profile(provider: Provider, state: ProbeState, flags: &[Flag], cat: Option<&str>) -> BucketSecurityProfile {
        BucketSecurityProfile {
            name: "b".into(),
            provider,
            state,
            acl_readable: true,
            public_actions: Default::default(),
            flags: flags.iter().copied().collect(),
            sensitive_matches: Vec::<SensitiveMatch>::new(),
            category: cat.map(str::to_owned),
            file_count: 0,
        }
    }

    #[test]
    fn security_counts() {
        let clean = vec![profile(Provider::Aws, ProbeState::Public, &[], None)];
        let rows = report_security(&clean).unwrap();
        assert!(rows.iter().all(|r| r.section != "flag"));

        let set = vec![
            profile(Provider::Aws, ProbeState::Public, &[Flag::PublicWrite, Flag::PublicDelete], Some("images")),
            profile(Provider::Aws, ProbeState::Public, &[], None),
            profile(Provider::Aws, ProbeState::Private, &[Flag::PublicWrite], None),
            profile(Provider::Gcp, ProbeState::Public, &[Flag::PublicAclChange], Some("images")),
        ];
        let rows = report_security(&set).unwrap();
        let find = |section: &str, prov: &str, pop: &str, item: &str| {
            rows.iter()
                .find(|r| r.section == section && r.provider == prov && r.population == pop && r.item == item)
                .map(|r| (r.count, r.total))
        };
        assert_eq!(find("flag", "aws", "public", "public_write"), Some((1, 2)));
        assert_eq!(find("flag", "aws", "public", "public_delete"), Some((1, 2)));
        assert_eq!(find("flag", "aws", "private", "public_write"), Some((1, 1)));
        assert_eq!(find("flag", "gcp", "public", "public_acl_change"), Some((1, 1)));
        assert_eq!(find("category", "aws", "public", "images"), Some((1, 2)));
        assert_eq!(find("category", "aws", "public", UNCATEGORIZED), Some((1, 2)));
        assert_eq!(rows.iter().filter(|r| r.section == "flag").count(), 4);
        let aws_cats: f64 = rows
            .iter()
            .filter(|r| r.section == "category" && r.provider == "aws")
            .map(|r| r.share)
            .sum();
        assert!((aws_cats - 1.0).abs() < 1e-9);
    }

    #[test]
    fn csv_is_byte_stable() {
        let rows = report_patterns(&recs(&["xkqzv", "testxkq", "datatest"]), None).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&rows, &mut a).unwrap();
        write_csv(&rows, &mut b).unwrap();
        assert_eq!(a, b);
        let text = String::from_utf8(a).unwrap();
        assert!(text.starts_with("pattern,count,share,mean_log10_guesses\n"));
    }
}
