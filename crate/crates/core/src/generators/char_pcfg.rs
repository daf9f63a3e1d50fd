use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rand::Rng;

use super::freq::FreqTable;
use crate::error::{Error, Result};

/// Terminal class: a run of letters (`C`) or digits (`N`) of a given length.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CharClass {
    Letters(usize),
    Digits(usize),
}

impl fmt::Display for CharClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharClass::Letters(n) => write!(f, "C{n}"),
            CharClass::Digits(n) => write!(f, "N{n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleElem {
    Class(CharClass),
    Literal(char),
}

fn class_of(c: char) -> Option<bool> {
    if c.is_ascii_alphabetic() {
        Some(true)
    } else if c.is_ascii_digit() {
        Some(false)
    } else {
        None
    }
}

/// Splits a name into rule elements paired with the text they cover.
fn segments(name: &str) -> Vec<(RuleElem, &str)> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = name.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match class_of(c) {
            None => {
                out.push((RuleElem::Literal(c), &name[pos..pos + c.len_utf8()]));
                i += 1;
            }
            Some(letters) => {
                let start = pos;
                let mut j = i;
                while j < chars.len() && class_of(chars[j].1) == Some(letters) {
                    j += 1;
                }
                let end = chars.get(j).map_or(name.len(), |(p, _)| *p);
                let n = j - i;
                let class = if letters {
                    CharClass::Letters(n)
                } else {
                    CharClass::Digits(n)
                };
                out.push((RuleElem::Class(class), &name[start..end]));
                i = j;
            }
        }
    }
    out
}

pub fn render_rule(elems: &[RuleElem]) -> String {
    let mut s = String::new();
    for e in elems {
        match e {
            RuleElem::Class(c) => s.push_str(&c.to_string()),
            RuleElem::Literal(c) => s.push(*c),
        }
    }
    s
}

/// `"name1234-word-4-"` becomes `"C4N4-C4-N1-"`.
pub fn char_pcfg_rule(name: &str) -> String {
    let elems: Vec<RuleElem> = segments(name).into_iter().map(|(e, _)| e).collect();
    render_rule(&elems)
}

/// Parses a rule string back into elements.
pub fn parse_rule(rule: &str) -> Result<Vec<RuleElem>> {
    let bad = |reason: &str| Error::Codec(format!("rule {rule:?}: {reason}"));
    let mut out = Vec::new();
    let mut chars = rule.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            'C' | 'N' => {
                let mut digits = String::new();
                while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                    digits.push(*d);
                    chars.next();
                }
                let n: usize = digits.parse().map_err(|_| bad("class without length"))?;
                if n == 0 {
                    return Err(bad("zero-length class"));
                }
                out.push(RuleElem::Class(if c == 'C' {
                    CharClass::Letters(n)
                } else {
                    CharClass::Digits(n)
                }));
            }
            c if c.is_ascii_alphanumeric() => return Err(bad("stray alphanumeric")),
            c => out.push(RuleElem::Literal(c)),
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CharPcfgModel {
    pub(crate) rules: FreqTable<String>,
    pub(crate) parsed: Vec<Vec<RuleElem>>,
    pub(crate) terminals: HashMap<CharClass, FreqTable<String>>,
}

impl CharPcfgModel {
    pub(crate) fn from_tables(
        rules: FreqTable<String>,
        terminals: HashMap<CharClass, FreqTable<String>>,
    ) -> Result<Self> {
        let parsed = rules
            .iter()
            .map(|(r, _)| parse_rule(r))
            .collect::<Result<Vec<_>>>()?;
        for rule in &parsed {
            for e in rule {
                if let RuleElem::Class(c) = e {
                    if terminals.get(c).map_or(true, FreqTable::is_empty) {
                        return Err(Error::Codec(format!("class {c} has no terminals")));
                    }
                }
            }
        }
        Ok(CharPcfgModel {
            rules,
            parsed,
            terminals,
        })
    }

    pub fn rules(&self) -> &FreqTable<String> {
        &self.rules
    }

    pub fn terminals(&self, class: CharClass) -> Option<&FreqTable<String>> {
        self.terminals.get(&class)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let rule = &self.parsed[self.rules.sample_index(rng)];
        let mut out = String::new();
        for e in rule {
            match e {
                RuleElem::Literal(c) => out.push(*c),
                RuleElem::Class(c) => {
                    let table = self
                        .terminals
                        .get(c)
                        .expect("every stored rule class has terminals");
                    out.push_str(table.sample(rng));
                }
            }
        }
        out
    }
}

pub fn train_char_pcfg<S: AsRef<str>>(names: &[S]) -> Result<CharPcfgModel> {
    if names.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let mut rules = BTreeMap::new();
    let mut terminals: HashMap<CharClass, BTreeMap<String, u64>> = HashMap::new();
    for name in names {
        let segs = segments(name.as_ref());
        let elems: Vec<RuleElem> = segs.iter().map(|(e, _)| *e).collect();
        *rules.entry(render_rule(&elems)).or_insert(0) += 1;
        for (e, text) in segs {
            if let RuleElem::Class(c) = e {
                *terminals
                    .entry(c)
                    .or_default()
                    .entry(text.to_owned())
                    .or_insert(0) += 1;
            }
        }
    }
    CharPcfgModel::from_tables(
        FreqTable::from_counts(rules),
        terminals
            .into_iter()
            .map(|(k, v)| (k, FreqTable::from_counts(v)))
            .collect(),
    )
}
