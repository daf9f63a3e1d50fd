//! Control generators used for comparison runs.

use rand::Rng;

use crate::name::{self, ALPHABET};

/// Uniformly random names: length uniform in `[min_len, max_len]`, each
/// character uniform over the 39 legal characters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniformRandom {
    pub min_len: usize,
    pub max_len: usize,
}

impl Default for UniformRandom {
    fn default() -> Self {
        UniformRandom {
            min_len: name::MIN_LEN,
            max_len: name::MAX_LEN,
        }
    }
}

impl UniformRandom {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let len = rng.gen_range(self.min_len..=self.max_len);
        (0..len)
            .map(|_| ALPHABET[rng.gen_range(0..ALPHABET.len())] as char)
            .collect()
    }
}

const ALNUM: &[u8; 36] = b"abcdefghijklmnopqrstuvwxyz0123456789";

/// Prior-work scanner: a random 3-4 character alphanumeric seed, then
/// repeatedly remove a random character, append a corpus word, or stop,
/// each with probability 1/3.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Continella {
    words: Vec<String>,
}

impl Continella {
    pub fn new(words: Vec<String>) -> Self {
        Continella { words }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let len = rng.gen_range(3..=4);
        let mut s: Vec<u8> = (0..len)
            .map(|_| ALNUM[rng.gen_range(0..ALNUM.len())])
            .collect();
        loop {
            match rng.gen_range(0..3) {
                0 if !s.is_empty() => {
                    let i = rng.gen_range(0..s.len());
                    s.remove(i);
                }
                0 => {}
                1 if !self.words.is_empty() => {
                    let w = &self.words[rng.gen_range(0..self.words.len())];
                    s.extend_from_slice(w.as_bytes());
                }
                1 => {}
                _ => break,
            }
        }
        String::from_utf8(s).expect("ascii")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_lengths_in_range() {
        let g = UniformRandom {
            min_len: 4,
            max_len: 4,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let s = g.sample(&mut rng);
            assert_eq!(s.len(), 4);
            assert!(name::is_legal(&s));
        }
    }

    #[test]
    fn continella_mostly_short() {
        let g = Continella::new(vec!["cloud".into()]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let n = 10_000;
        let short = (0..n)
            .map(|_| g.sample(&mut rng))
            .filter(|s| s.len() <= 4)
            .count();
        // stop first (1/3) keeps the seed length; removals only shorten
        assert!(short as f64 / n as f64 > 0.4);
    }
}
