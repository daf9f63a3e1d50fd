use std::collections::BTreeMap;

use rand::Rng;

/// Observed counts over a finite set of items, sampled proportionally.
///
/// Items are kept in sorted order so iteration, sampling and encoding are
/// independent of insertion order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreqTable<T> {
    items: Vec<(T, u64)>,
    cumulative: Vec<u64>,
}

impl<T> Default for FreqTable<T> {
    fn default() -> Self {
        FreqTable {
            items: Vec::new(),
            cumulative: Vec::new(),
        }
    }
}

impl<T: Ord + Clone> FreqTable<T> {
    pub fn from_counts(counts: BTreeMap<T, u64>) -> Self {
        Self::from_sorted(counts.into_iter().filter(|(_, c)| *c > 0).collect())
    }

    pub fn from_items<I: IntoIterator<Item = T>>(items: I) -> Self {
        let mut counts = BTreeMap::new();
        for item in items {
            *counts.entry(item).or_insert(0) += 1;
        }
        Self::from_counts(counts)
    }

    pub(crate) fn from_sorted(items: Vec<(T, u64)>) -> Self {
        let mut total = 0;
        let cumulative = items
            .iter()
            .map(|(_, c)| {
                total += c;
                total
            })
            .collect();
        FreqTable { items, cumulative }
    }

    pub fn count(&self, item: &T) -> u64 {
        self.index_of(item).map_or(0, |i| self.items[i].1)
    }

    pub fn index_of(&self, item: &T) -> Option<usize> {
        self.items.binary_search_by(|(x, _)| x.cmp(item)).ok()
    }

    pub fn probability(&self, item: &T) -> f64 {
        match self.total() {
            0 => 0.0,
            t => self.count(item) as f64 / t as f64,
        }
    }
}

impl<T> FreqTable<T> {
    pub fn total(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&T, u64)> + '_ {
        self.items.iter().map(|(t, c)| (t, *c))
    }

    pub fn item(&self, index: usize) -> &T {
        &self.items[index].0
    }

    /// Index of an item drawn with probability proportional to its count.
    /// Panics on an empty table.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let r = rng.gen_range(0..self.total());
        self.cumulative.partition_point(|&c| c <= r)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &T {
        &self.items[self.sample_index(rng)].0
    }
}
