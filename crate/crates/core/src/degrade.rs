//! Seeded removal of schema atoms to produce incomplete models.
//!
//! All eligible atom occurrences are enumerated in schema order, shuffled once
//! with the seed, and a prefix of the shuffled list is removed. Two calls with
//! the same seed therefore remove nested sets: lower completeness removes a
//! superset of what higher completeness removes.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{DomainModel, ListKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegradeScope {
    pub pre: bool,
    pub add: bool,
    pub del: bool,
}

impl Default for DegradeScope {
    fn default() -> Self {
        DegradeScope {
            pre: true,
            add: true,
            del: true,
        }
    }
}

impl DegradeScope {
    fn allows(&self, kind: ListKind) -> bool {
        match kind {
            ListKind::Pre => self.pre,
            ListKind::Add => self.add,
            ListKind::Del => self.del,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegradeSpec {
    /// Fraction of eligible atoms kept, in `[0, 1]`.
    pub completeness: f64,
    pub seed: u64,
    pub scope: DegradeScope,
}

impl DegradeSpec {
    pub fn new(completeness: f64, seed: u64) -> Self {
        DegradeSpec {
            completeness: completeness.clamp(0.0, 1.0),
            seed,
            scope: DegradeScope::default(),
        }
    }
}

/// Address of one atom occurrence: schema index, list, position in list.
type Slot = (usize, ListKind, usize);

fn eligible_slots(model: &DomainModel, scope: DegradeScope) -> Vec<Slot> {
    let mut slots = Vec::new();
    for (si, s) in model.schemas().iter().enumerate() {
        for kind in [ListKind::Pre, ListKind::Add, ListKind::Del] {
            if scope.allows(kind) {
                slots.extend((0..s.list(kind).len()).map(|i| (si, kind, i)));
            }
        }
    }
    slots
}

/// Number of atoms removed from `total` eligible ones at `completeness`.
pub fn removal_count(total: usize, completeness: f64) -> usize {
    let c = completeness.clamp(0.0, 1.0);
    // Tolerate representation error such as 0.4 * 25 = 10.000000000000002.
    let raw = (1.0 - c) * total as f64 - 1e-9;
    (raw.ceil().max(0.0) as usize).min(total)
}

/// Returns a copy of `model` with `ceil((1 - completeness) * N)` eligible
/// atoms removed, tagged with `spec.completeness`.
pub fn degrade(model: &DomainModel, spec: &DegradeSpec) -> DomainModel {
    let mut slots = eligible_slots(model, spec.scope);
    let n_remove = removal_count(slots.len(), spec.completeness);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    slots.shuffle(&mut rng);
    let mut doomed: Vec<Slot> = slots[..n_remove].to_vec();
    // Remove from the back of each list so earlier positions stay valid.
    doomed.sort_by(|a, b| b.cmp(a));
    let mut out = model.clone();
    let schemas = out.schemas_mut();
    for (si, kind, i) in doomed {
        schemas[si].list_mut(kind).remove(i);
    }
    out.completeness = spec.completeness;
    out
}
