//! Enumeration budgets and the run context threaded through every operation.
//!
//! Universe bounds make the object side of every fibre finite, but some
//! quantifications (all tuples of parallel morphisms, all reflexive pairs)
//! still blow up combinatorially on module backends. Each such sweep runs
//! exhaustively up to a budget and otherwise falls back to a deterministic
//! sample, recording the coverage in the report. Samples are index-based and
//! seeded from stable data only, so two runs of the same input agree.

use std::collections::BTreeSet;
use std::sync::Mutex;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Budgets {
    /// Max hom-set size swept exactly by opcartesianness checks in a fibre.
    pub sweep_limit: u64,
    /// Max filtered hom-set size swept exactly in module-level checks.
    pub module_sweep_limit: u64,
    /// Max hom-set size compared element-wise by category equality checks.
    pub equality_hom_limit: u64,
    /// Max tuple count enumerated exactly by law/naturality sweeps.
    pub tuple_limit: u64,
    /// Sample size used when a sweep exceeds its budget.
    pub sample_size: u64,
    /// Max morphism count when materializing a lazy category to tables.
    pub materialize_limit: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            sweep_limit: 1 << 26,
            module_sweep_limit: 1 << 21,
            equality_hom_limit: 1 << 21,
            tuple_limit: 200_000,
            sample_size: 20_000,
            materialize_limit: 50_000,
        }
    }
}

/// Records which public operations a pipeline run exercised.
#[derive(Debug, Default)]
pub struct OpLog {
    ops: Mutex<BTreeSet<String>>,
}

impl OpLog {
    pub fn log(&self, op: &str) {
        self.ops.lock().unwrap().insert(op.to_string());
    }

    pub fn snapshot(&self) -> BTreeSet<String> {
        self.ops.lock().unwrap().clone()
    }
}

/// Context shared by engine operations: budgets plus the op log.
#[derive(Debug, Default)]
pub struct RunCtx {
    pub budgets: Budgets,
    pub oplog: OpLog,
}

impl RunCtx {
    pub fn with_budgets(budgets: Budgets) -> Self {
        RunCtx {
            budgets,
            oplog: OpLog::default(),
        }
    }

    pub fn log(&self, op: &str) {
        self.oplog.log(op);
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Stable 64-bit hash of a label, for seeding per-check samples.
pub fn stable_seed(label: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Indices to visit when a sweep over `total` items exceeds `limit`:
/// `None` means sweep everything; `Some(v)` is a sorted, deduplicated sample
/// of at most `sample_size` indices, always including the first and last.
pub fn sample_indices(total: u64, limit: u64, sample_size: u64, seed_label: &str) -> Option<Vec<u64>> {
    if total <= limit {
        return None;
    }
    let n = sample_size.min(total).max(2);
    let mut out = BTreeSet::new();
    out.insert(0);
    out.insert(total - 1);
    let mut state = stable_seed(seed_label);
    while (out.len() as u64) < n {
        out.insert(splitmix64(&mut state) % total);
    }
    Some(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_is_deterministic_and_bounded() {
        let a = sample_indices(1_000_000, 10, 100, "check:x").unwrap();
        let b = sample_indices(1_000_000, 10, 100, "check:x").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a[0], 0);
        assert_eq!(*a.last().unwrap(), 999_999);
        assert!(sample_indices(50, 100, 10, "y").is_none());
    }

    #[test]
    fn different_labels_differ() {
        let a = sample_indices(1_000_000, 10, 50, "p").unwrap();
        let b = sample_indices(1_000_000, 10, 50, "q").unwrap();
        assert_ne!(a, b);
    }
}
