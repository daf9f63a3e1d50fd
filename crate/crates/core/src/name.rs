//! Provider-legal bucket names.
//!
//! All three providers accept names of 3 to 64 characters drawn from lowercase
//! letters, digits and the three delimiters `-`, `_` and `.`.

use crate::error::{Error, Result};

pub const MIN_LEN: usize = 3;
pub const MAX_LEN: usize = 64;

/// The 39 legal characters, letters first.
pub const ALPHABET: &[u8; 39] = b"abcdefghijklmnopqrstuvwxyz0123456789-_.";

pub const DELIMITERS: [char; 3] = ['-', '_', '.'];

pub fn is_legal_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || DELIMITERS.contains(&c)
}

pub fn is_legal(name: &str) -> bool {
    (MIN_LEN..=MAX_LEN).contains(&name.len()) && name.chars().all(is_legal_char)
}

pub fn check(name: &str) -> Result<()> {
    if !(MIN_LEN..=MAX_LEN).contains(&name.len()) {
        return Err(Error::InvalidName {
            name: name.to_owned(),
            reason: "length must be between 3 and 64",
        });
    }
    if !name.chars().all(is_legal_char) {
        return Err(Error::InvalidName {
            name: name.to_owned(),
            reason: "only a-z, 0-9, '-', '_' and '.' are allowed",
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legality() {
        assert!(is_legal("abc"));
        assert!(is_legal("name1234-word-4-"));
        assert!(!is_legal("ab"));
        assert!(!is_legal(&"a".repeat(65)));
        assert!(is_legal(&"a".repeat(64)));
        assert!(!is_legal("Abc"));
        assert!(!is_legal("a b"));
        assert_eq!(ALPHABET.len(), 39);
    }
}
