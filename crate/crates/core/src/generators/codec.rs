//! Binary model container and text dump.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic    "BKTM"
//! version  u16 = 1
//! kind     u8   1 char n-gram, 2 token bigram, 3 char PCFG, 4 token PCFG
//! payload  kind-specific, built from:
//!   str    u32 byte length, UTF-8 bytes
//!   table  u32 item count, then (item, u64 count) in ascending item order
//! ```
//!
//! Char n-gram: `u32 order`, length table (`u32` items), `u32` context
//! count, then per context `str` and a table of `u32` code points.
//! Token bigram: first-token, unigram (`str` tables), token-count (`u32`),
//! delimiter (code point) tables, then `u32` count of (`str`, `str` table).
//! Char PCFG: rule table, `u32` count of (`u8` 'C'/'N', `u32` length,
//! `str` table). Token PCFG: template table, `u32` count of (`u8` type
//! index, `str` table).

use std::collections::HashMap;
use std::fmt::Write as _;

use super::char_ngram::CharNGramModel;
use super::char_pcfg::{CharClass, CharPcfgModel};
use super::freq::FreqTable;
use super::token_bigram::TokenBigramModel;
use super::token_pcfg::{TokenPcfgModel, TokenType};
use super::GeneratorModel;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"BKTM";
pub const VERSION: u16 = 1;

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: usize) {
        let v = u32::try_from(v).expect("field fits in u32");
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
    fn table<T>(&mut self, t: &FreqTable<T>, mut item: impl FnMut(&mut Self, &T)) {
        self.u32(t.len());
        for (x, c) in t.iter() {
            item(self, x);
            self.u64(c);
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Codec(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()?;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::Codec("string is not UTF-8".into()))
    }
    fn char(&mut self) -> Result<char> {
        let v = self.u32()? as u32;
        char::from_u32(v).ok_or_else(|| Error::Codec(format!("bad code point {v}")))
    }
    fn table<T: Ord + Clone>(
        &mut self,
        mut item: impl FnMut(&mut Self) -> Result<T>,
    ) -> Result<FreqTable<T>> {
        let n = self.u32()?;
        let mut items: Vec<(T, u64)> = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let x = item(self)?;
            let c = self.u64()?;
            if c == 0 {
                return Err(Error::Codec("zero count in table".into()));
            }
            if items.last().is_some_and(|(prev, _)| *prev >= x) {
                return Err(Error::Codec("table items out of order".into()));
            }
            items.push((x, c));
        }
        Ok(FreqTable::from_sorted(items))
    }
}

fn sorted<K: Ord, V>(map: &HashMap<K, V>) -> Vec<(&K, &V)> {
    let mut v: Vec<_> = map.iter().collect();
    v.sort_by(|a, b| a.0.cmp(b.0));
    v
}

fn char_item(w: &mut Writer, c: &char) {
    w.u32(*c as usize)
}

fn class_code(c: &CharClass) -> (u8, usize) {
    match c {
        CharClass::Letters(n) => (b'C', *n),
        CharClass::Digits(n) => (b'N', *n),
    }
}

fn type_index(t: TokenType) -> u8 {
    TokenType::ALL.iter().position(|x| *x == t).unwrap() as u8
}

pub fn encode(model: &GeneratorModel) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(MAGIC);
    w.0.extend_from_slice(&VERSION.to_le_bytes());
    w.u8(model.kind_tag());
    match model {
        GeneratorModel::CharNgram(m) => {
            w.u32(m.order);
            w.table(&m.lengths, |w, l| w.u32(*l));
            w.u32(m.transitions.len());
            for (ctx, t) in sorted(&m.transitions) {
                w.str(ctx);
                w.table(t, char_item);
            }
        }
        GeneratorModel::TokenBigram(m) => {
            w.table(&m.first, |w, s| w.str(s));
            w.table(&m.unigram, |w, s| w.str(s));
            w.table(&m.token_counts, |w, n| w.u32(*n));
            w.table(&m.delimiters, char_item);
            w.u32(m.transitions.len());
            for (tok, t) in sorted(&m.transitions) {
                w.str(tok);
                w.table(t, |w, s| w.str(s));
            }
        }
        GeneratorModel::CharPcfg(m) => {
            w.table(&m.rules, |w, s| w.str(s));
            w.u32(m.terminals.len());
            for (class, t) in sorted(&m.terminals) {
                let (code, n) = class_code(class);
                w.u8(code);
                w.u32(n);
                w.table(t, |w, s| w.str(s));
            }
        }
        GeneratorModel::TokenPcfg(m) => {
            w.table(&m.templates, |w, s| w.str(s));
            w.u32(m.tokens.len());
            for (ty, t) in sorted(&m.tokens) {
                w.u8(type_index(*ty));
                w.table(t, |w, s| w.str(s));
            }
        }
    }
    w.0
}

pub fn decode(bytes: &[u8]) -> Result<GeneratorModel> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Codec("bad magic".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::Codec(format!("unsupported version {version}")));
    }
    let model = match r.u8()? {
        1 => {
            let order = r.u32()?;
            if order < 2 {
                return Err(Error::Codec(format!("order {order}")));
            }
            let lengths = r.table(|r| r.u32())?;
            let n = r.u32()?;
            let mut transitions = HashMap::new();
            for _ in 0..n {
                let ctx = r.str()?;
                let t = r.table(|r| r.char())?;
                transitions.insert(ctx, t);
            }
            if lengths.is_empty() || !transitions.contains_key("") {
                return Err(Error::Codec("n-gram model without base tables".into()));
            }
            GeneratorModel::CharNgram(CharNGramModel {
                order,
                transitions,
                lengths,
            })
        }
        2 => {
            let first = r.table(|r| r.str())?;
            let unigram = r.table(|r| r.str())?;
            let token_counts = r.table(|r| r.u32())?;
            let delimiters = r.table(|r| r.char())?;
            let n = r.u32()?;
            let mut transitions = HashMap::new();
            for _ in 0..n {
                let tok = r.str()?;
                transitions.insert(tok, r.table(|r| r.str())?);
            }
            if first.is_empty() || unigram.is_empty() || token_counts.is_empty() {
                return Err(Error::Codec("bigram model without base tables".into()));
            }
            GeneratorModel::TokenBigram(TokenBigramModel {
                first,
                transitions,
                unigram,
                token_counts,
                delimiters,
            })
        }
        3 => {
            let rules = r.table(|r| r.str())?;
            let n = r.u32()?;
            let mut terminals = HashMap::new();
            for _ in 0..n {
                let code = r.u8()?;
                let len = r.u32()?;
                let class = match code {
                    b'C' => CharClass::Letters(len),
                    b'N' => CharClass::Digits(len),
                    _ => return Err(Error::Codec(format!("bad class code {code}"))),
                };
                terminals.insert(class, r.table(|r| r.str())?);
            }
            if rules.is_empty() {
                return Err(Error::Codec("no rules".into()));
            }
            GeneratorModel::CharPcfg(CharPcfgModel::from_tables(rules, terminals)?)
        }
        4 => {
            let templates = r.table(|r| r.str())?;
            let n = r.u32()?;
            let mut tokens = HashMap::new();
            for _ in 0..n {
                let i = r.u8()? as usize;
                let ty = *TokenType::ALL
                    .get(i)
                    .ok_or_else(|| Error::Codec(format!("bad token type {i}")))?;
                tokens.insert(ty, r.table(|r| r.str())?);
            }
            if templates.is_empty() {
                return Err(Error::Codec("no templates".into()));
            }
            GeneratorModel::TokenPcfg(TokenPcfgModel::from_tables(templates, tokens)?)
        }
        tag => return Err(Error::Codec(format!("unknown kind tag {tag}"))),
    };
    if r.pos != bytes.len() {
        return Err(Error::Codec(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok(model)
}

fn dump_table<T>(out: &mut String, title: &str, t: &FreqTable<T>, show: impl Fn(&T) -> String) {
    let _ = writeln!(out, "[{title}] total={}", t.total());
    for (x, c) in t.iter() {
        let _ = writeln!(out, "{}\t{c}", show(x));
    }
}

/// Human-readable listing of every frequency table in the model.
pub fn dump_text(model: &GeneratorModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind {}", model.kind());
    let quoted = |s: &String| format!("{s:?}");
    let ch = |c: &char| format!("{c:?}");
    match model {
        GeneratorModel::CharNgram(m) => {
            let _ = writeln!(out, "order {}", m.order);
            dump_table(&mut out, "lengths", &m.lengths, |l| l.to_string());
            for (ctx, t) in sorted(&m.transitions) {
                dump_table(&mut out, &format!("context {ctx:?}"), t, ch);
            }
        }
        GeneratorModel::TokenBigram(m) => {
            dump_table(&mut out, "token counts", &m.token_counts, |l| l.to_string());
            dump_table(&mut out, "delimiters", &m.delimiters, ch);
            dump_table(&mut out, "first tokens", &m.first, quoted);
            dump_table(&mut out, "tokens", &m.unigram, quoted);
            for (tok, t) in sorted(&m.transitions) {
                dump_table(&mut out, &format!("after {tok:?}"), t, quoted);
            }
        }
        GeneratorModel::CharPcfg(m) => {
            dump_table(&mut out, "rules", &m.rules, quoted);
            for (class, t) in sorted(&m.terminals) {
                dump_table(&mut out, &format!("terminals {class}"), t, quoted);
            }
        }
        GeneratorModel::TokenPcfg(m) => {
            dump_table(&mut out, "templates", &m.templates, quoted);
            for (ty, t) in sorted(&m.tokens) {
                dump_table(&mut out, &format!("tokens {ty}"), t, quoted);
            }
        }
    }
    out
}
