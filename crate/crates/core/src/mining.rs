//! Frequent contiguous fragment mining.
//!
//! Each fragment is a sequence of single-item itemsets with consecutive
//! indices, so sequential pattern mining collapses to finding substrings that
//! occur in at least `delta` entries. Patterns grow one item to the right by
//! joining position lists, SPADE style; only maximal patterns are kept.

use std::collections::{BTreeMap, BTreeSet};

/// Sequences with unique ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceDB<T> {
    entries: Vec<(usize, Vec<T>)>,
}

impl<T> SequenceDB<T> {
    /// Entries get ids `0..n` in the given order.
    pub fn new(sequences: impl IntoIterator<Item = Vec<T>>) -> Self {
        SequenceDB {
            entries: sequences.into_iter().enumerate().collect(),
        }
    }

    pub fn entries(&self) -> &[(usize, Vec<T>)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Does `pattern` occur as a contiguous run in `seq`?
pub fn contains_run<T: PartialEq>(seq: &[T], pattern: &[T]) -> bool {
    pattern.is_empty() || seq.windows(pattern.len()).any(|w| w == pattern)
}

/// Number of entries containing `pattern` contiguously (at most once each).
pub fn support<T: PartialEq>(db: &SequenceDB<T>, pattern: &[T]) -> usize {
    db.entries.iter().filter(|(_, s)| contains_run(s, pattern)).count()
}

/// Maximal patterns with support at least `delta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequentFragmentSet<T> {
    /// Longest first, then lexicographic.
    pub patterns: Vec<Vec<T>>,
    pub delta: usize,
}

impl<T> FrequentFragmentSet<T> {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }
}

/// Occurrence of a pattern: entry index and start position.
type Occ = (u32, u32);

fn distinct_entries(occs: &[Occ]) -> usize {
    // Occurrences are kept sorted by entry.
    let mut n = 0;
    let mut last = None;
    for &(e, _) in occs {
        if last != Some(e) {
            n += 1;
            last = Some(e);
        }
    }
    n
}

struct Miner<'a, T> {
    seqs: Vec<&'a [T]>,
    delta: usize,
    out: Vec<Vec<T>>,
}

impl<'a, T: Ord + Clone> Miner<'a, T> {
    /// Groups occurrences of a length-`len` pattern by the item that follows.
    fn right_extensions(&self, occs: &[Occ], len: usize) -> BTreeMap<&'a T, Vec<Occ>> {
        let mut ext: BTreeMap<&'a T, Vec<Occ>> = BTreeMap::new();
        for &(e, s) in occs {
            let seq: &'a [T] = self.seqs[e as usize];
            if let Some(x) = seq.get(s as usize + len) {
                ext.entry(x).or_default().push((e, s));
            }
        }
        ext
    }

    fn has_frequent_left_extension(&self, occs: &[Occ]) -> bool {
        let mut ext: BTreeMap<&T, BTreeSet<u32>> = BTreeMap::new();
        for &(e, s) in occs {
            if s > 0 {
                ext.entry(&self.seqs[e as usize][s as usize - 1]).or_default().insert(e);
            }
        }
        ext.values().any(|es| es.len() >= self.delta)
    }

    fn grow(&mut self, pattern: &mut Vec<T>, occs: &[Occ]) {
        let ext = self.right_extensions(occs, pattern.len());
        let mut extended = false;
        for (x, next) in ext {
            if distinct_entries(&next) >= self.delta {
                extended = true;
                pattern.push(x.clone());
                self.grow(pattern, &next);
                pattern.pop();
            }
        }
        if !extended && !self.has_frequent_left_extension(occs) {
            self.out.push(pattern.clone());
        }
    }
}

/// All maximal contiguous patterns occurring in at least `delta` entries.
///
/// A frequent pattern is maximal iff neither a one-item extension on the left
/// nor on the right is frequent; by anti-monotonicity that is the same as not
/// being contained in any longer frequent pattern.
pub fn mine_frequent<T: Ord + Clone>(db: &SequenceDB<T>, delta: usize) -> FrequentFragmentSet<T> {
    let delta = delta.max(1);
    let mut miner = Miner {
        seqs: db.entries.iter().map(|(_, s)| s.as_slice()).collect(),
        delta,
        out: Vec::new(),
    };
    let mut first: BTreeMap<&T, Vec<Occ>> = BTreeMap::new();
    for (e, s) in miner.seqs.iter().enumerate() {
        for (i, x) in s.iter().enumerate() {
            first.entry(x).or_default().push((e as u32, i as u32));
        }
    }
    for (x, occs) in first {
        if distinct_entries(&occs) >= delta {
            miner.grow(&mut vec![x.clone()], &occs);
        }
    }
    let mut patterns = miner.out;
    patterns.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    FrequentFragmentSet { patterns, delta }
}
