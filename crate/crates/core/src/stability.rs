//! Empirical stability under object removal.
//!
//! The delta values bound how many objects must be removed before an
//! itemset loses a property: an itemset with delta value `δ` stays closed
//! (respectively a key, a passkey) in every subcontext missing fewer than
//! `δ` objects. [`verify_removal_bound`] checks that bound exhaustively or
//! by sampling; [`survival_curve`] measures survival rates under random
//! subsampling, grouped by delta buckets.
//!
//! All sampling uses a self-contained xorshift64* generator so that any
//! report is reproducible from its seed alone, independently of platform
//! or library versions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bitset::{AttributeSet, ObjectSet};
use crate::concepts::ConceptGraph;
use crate::context::FormalContext;
use crate::delta::DeltaAnnotation;
use crate::error::{Error, Result};
use crate::levels::ClosureStructure;

/// xorshift64* with the standard shift triple (12, 25, 27) and output
/// multiplier `0x2545F4914F6CDD1D`. A zero seed is remapped to
/// `0x9E3779B97F4A7C15` (the 64-bit golden ratio) since the all-zero state
/// is a fixed point.
#[derive(Debug, Clone)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        XorShift64Star {
            state: if seed == 0 { 0x9E37_79B9_7F4A_7C15 } else { seed },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state ^= self.state >> 12;
        self.state ^= self.state << 25;
        self.state ^= self.state >> 27;
        self.state.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform value in `0..n` by the multiply-shift reduction
    /// `(x * n) >> 64`.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// `k` distinct indices out of `0..n` by partial Fisher-Yates.
    pub fn sample_distinct(&mut self, k: usize, n: usize) -> Vec<usize> {
        debug_assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.next_below((n - i) as u64) as usize;
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// Derivation inside the subcontext that keeps only `keep`, expressed in
/// the original object indexing.
fn derive_objects_in(ctx: &FormalContext, keep: &ObjectSet, x: &AttributeSet) -> ObjectSet {
    let mut extent = ctx.derive_objects(x);
    extent.intersect_with(keep);
    extent
}

fn closure_in(ctx: &FormalContext, keep: &ObjectSet, x: &AttributeSet) -> AttributeSet {
    ctx.derive_attributes(&derive_objects_in(ctx, keep, x))
}

fn is_key_in(ctx: &FormalContext, keep: &ObjectSet, x: &AttributeSet) -> bool {
    let ext = derive_objects_in(ctx, keep, x);
    for m in x.iter() {
        let mut y = x.clone();
        y.remove(m);
        if derive_objects_in(ctx, keep, &y) == ext {
            return false;
        }
    }
    true
}

/// Whether `x` is a minimum-size generator of its closure in the kept
/// subcontext. `None` when the generator search ran past `budget`
/// candidate itemsets.
fn is_passkey_in(
    ctx: &FormalContext,
    keep: &ObjectSet,
    x: &AttributeSet,
    budget: &mut usize,
) -> Option<bool> {
    if !is_key_in(ctx, keep, x) {
        return Some(false);
    }
    let ext = derive_objects_in(ctx, keep, x);
    let closure = ctx.derive_attributes(&ext);
    let pool: Vec<usize> = closure.iter().collect();
    let size = x.count();
    // a smaller generator would contain a smaller key of the same class,
    // so scanning all smaller subsets of the closure is sufficient
    let mut smaller_found = false;
    let exhausted = !for_each_combination(pool.len(), size, &mut |pick: &[usize]| {
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let y = AttributeSet::from_indices(
            ctx.n_attributes(),
            pick.iter().map(|&i| pool[i]),
        );
        if derive_objects_in(ctx, keep, &y) == ext {
            smaller_found = true;
            return false;
        }
        true
    });
    if smaller_found {
        return Some(false);
    }
    if exhausted {
        return None;
    }
    Some(true)
}

/// Calls `f` for every combination of `0..n` of size strictly below
/// `max_size` (sizes 0, 1, ..., max_size-1), smallest sizes first. Stops
/// early when `f` returns false; returns whether the enumeration ran to
/// completion.
fn for_each_combination(n: usize, max_size: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    for k in 0..max_size {
        if k > n {
            break;
        }
        let mut ix: Vec<usize> = (0..k).collect();
        loop {
            if !f(&ix) {
                return false;
            }
            // next lexicographic combination
            let mut i = k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if ix[i] != i + n - k {
                    break;
                }
            }
            if k == 0 || ix[i] == i + n - k {
                break;
            }
            ix[i] += 1;
            for j in i + 1..k {
                ix[j] = ix[j - 1] + 1;
            }
        }
    }
    true
}

/// Property whose removal bound is being verified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalProperty {
    Closed,
    Key,
    Passkey,
}

/// How to search for a violating removal.
#[derive(Debug, Clone, Copy)]
pub enum VerifyMode {
    /// Try every removal of fewer than `delta` objects.
    Exhaustive,
    /// Sample removals of exactly `delta - 1` objects.
    Random { seed: u64, trials: u64 },
}

#[derive(Debug, Clone, Copy)]
pub struct StabilityConfig {
    /// Cap on `C(n_objects, delta - 1)` in exhaustive mode.
    pub exhaustive_budget: u128,
    /// Candidate itemsets inspected per passkey minimality search.
    pub passkey_search_budget: usize,
}

impl Default for StabilityConfig {
    fn default() -> Self {
        StabilityConfig {
            exhaustive_budget: 2_000_000,
            passkey_search_budget: 2_000_000,
        }
    }
}

/// Outcome of one removal-bound verification.
#[derive(Debug, Clone, Serialize)]
pub struct StabilityEntry {
    pub itemset: String,
    pub property: RemovalProperty,
    pub claimed_delta: u32,
    pub exhaustive: bool,
    /// True when no removal of fewer than `claimed_delta` objects broke the
    /// property. A false value with `min_removal_found` set would disprove
    /// the bound (and means an engine bug, not a theorem failure).
    pub verified: bool,
    pub min_removal_found: Option<usize>,
    pub removals_checked: u64,
    pub trials: u64,
    pub seed: Option<u64>,
}

fn property_holds_in(
    ctx: &FormalContext,
    keep: &ObjectSet,
    x: &AttributeSet,
    property: RemovalProperty,
    config: &StabilityConfig,
) -> Result<bool> {
    match property {
        RemovalProperty::Closed => Ok(closure_in(ctx, keep, x) == *x),
        RemovalProperty::Key => Ok(is_key_in(ctx, keep, x)),
        RemovalProperty::Passkey => {
            let mut budget = config.passkey_search_budget;
            is_passkey_in(ctx, keep, x, &mut budget).ok_or(Error::BudgetExceeded {
                size: x.count(),
                combinations: config.passkey_search_budget as u128,
                budget: config.passkey_search_budget as u128,
            })
        }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Verifies that removing fewer than `delta` objects never breaks the
/// property of `x`. Exhaustive mode enumerates every removal of size
/// `1..delta`; random mode samples removals of size `delta - 1`.
pub fn verify_removal_bound(
    ctx: &FormalContext,
    x: &AttributeSet,
    property: RemovalProperty,
    delta: u32,
    mode: VerifyMode,
    config: &StabilityConfig,
) -> Result<StabilityEntry> {
    let n = ctx.n_objects();
    let all = ObjectSet::full(n);
    let base_holds = property_holds_in(ctx, &all, x, property, config)?;
    let mut entry = StabilityEntry {
        itemset: ctx.format_itemset(x),
        property,
        claimed_delta: delta,
        exhaustive: matches!(mode, VerifyMode::Exhaustive),
        verified: base_holds,
        min_removal_found: None,
        removals_checked: 0,
        trials: 0,
        seed: None,
    };
    if !base_holds || delta <= 1 {
        // delta <= 1 is vacuous: no nonempty removal below size 1 exists
        return Ok(entry);
    }

    match mode {
        VerifyMode::Exhaustive => {
            let worst = binomial(n as u128, (delta - 1) as u128);
            if worst > config.exhaustive_budget {
                return Err(Error::BudgetExceeded {
                    size: (delta - 1) as usize,
                    combinations: worst,
                    budget: config.exhaustive_budget,
                });
            }
            let mut broken: Option<usize> = None;
            let mut checked: u64 = 0;
            let mut failure: Option<Error> = None;
            for size in 1..delta as usize {
                if size > n || broken.is_some() {
                    break;
                }
                for_each_combination(n, size + 1, &mut |removal: &[usize]| {
                    if removal.len() != size {
                        return true; // only the top size of this pass
                    }
                    checked += 1;
                    let mut keep = all.clone();
                    for &g in removal {
                        keep.remove(g);
                    }
                    match property_holds_in(ctx, &keep, x, property, config) {
                        Ok(true) => true,
                        Ok(false) => {
                            broken = Some(size);
                            false
                        }
                        Err(e) => {
                            failure = Some(e);
                            false
                        }
                    }
                });
            }
            if let Some(e) = failure {
                return Err(e);
            }
            entry.removals_checked = checked;
            entry.min_removal_found = broken;
            entry.verified = broken.is_none();
        }
        VerifyMode::Random { seed, trials } => {
            entry.seed = Some(seed);
            entry.trials = trials;
            let size = (delta - 1) as usize;
            if size > n {
                return Ok(entry);
            }
            let mut rng = XorShift64Star::new(seed);
            let mut broken = None;
            for _ in 0..trials {
                let removal = rng.sample_distinct(size, n);
                entry.removals_checked += 1;
                let mut keep = all.clone();
                for &g in &removal {
                    keep.remove(g);
                }
                if !property_holds_in(ctx, &keep, x, property, config)? {
                    broken = Some(size);
                    break;
                }
            }
            entry.min_removal_found = broken;
            entry.verified = broken.is_none();
        }
    }
    Ok(entry)
}

#[derive(Debug, Clone, Copy)]
pub struct SurvivalConfig {
    pub seed: u64,
    pub trials: u32,
    pub passkey_search_budget: usize,
}

impl Default for SurvivalConfig {
    fn default() -> Self {
        SurvivalConfig {
            seed: 1,
            trials: 20,
            passkey_search_budget: 200_000,
        }
    }
}

/// Aggregated survival counts for one keep fraction and one delta bucket.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SurvivalRow {
    pub keep_fraction: f64,
    /// `delta_cls` or `delta_pk`.
    pub group_by: &'static str,
    pub group_value: u32,
    pub concepts: usize,
    pub trials: u32,
    pub closed_tested: u64,
    pub closed_survived: u64,
    pub passkey_tested: u64,
    pub passkey_survived: u64,
    pub passkey_skipped: u64,
}

impl SurvivalRow {
    pub fn closed_rate(&self) -> f64 {
        if self.closed_tested == 0 {
            1.0
        } else {
            self.closed_survived as f64 / self.closed_tested as f64
        }
    }

    pub fn passkey_rate(&self) -> f64 {
        if self.passkey_tested == 0 {
            1.0
        } else {
            self.passkey_survived as f64 / self.passkey_tested as f64
        }
    }
}

/// For each keep fraction, samples `trials` subcontexts and counts, per
/// delta bucket, how often each concept's intent stays closed and how often
/// its first stored passkey stays a passkey. Deterministic for a fixed
/// seed: sub-seeds are drawn from one master xorshift64* stream in
/// (fraction, trial) order.
pub fn survival_curve(
    ctx: &FormalContext,
    graph: &ConceptGraph,
    structure: &ClosureStructure,
    annotation: &DeltaAnnotation,
    keep_fractions: &[f64],
    config: &SurvivalConfig,
) -> Vec<SurvivalRow> {
    assert!(
        keep_fractions.iter().all(|f| *f > 0.0 && *f <= 1.0),
        "keep fractions must lie in (0, 1]"
    );
    let n = ctx.n_objects();
    let mut master = XorShift64Star::new(config.seed);
    let mut acc: BTreeMap<(usize, &'static str, u32), SurvivalRow> = BTreeMap::new();

    let mut group_sizes: BTreeMap<(&'static str, u32), usize> = BTreeMap::new();
    for c in 0..graph.len() as u32 {
        *group_sizes
            .entry(("delta_cls", annotation.delta_cls(c)))
            .or_insert(0) += 1;
        *group_sizes
            .entry(("delta_pk", annotation.delta_pk(c)))
            .or_insert(0) += 1;
    }

    for (fi, &fraction) in keep_fractions.iter().enumerate() {
        for ((kind, value), &count) in &group_sizes {
            acc.insert(
                (fi, kind, *value),
                SurvivalRow {
                    keep_fraction: fraction,
                    group_by: kind,
                    group_value: *value,
                    concepts: count,
                    trials: config.trials,
                    closed_tested: 0,
                    closed_survived: 0,
                    passkey_tested: 0,
                    passkey_survived: 0,
                    passkey_skipped: 0,
                },
            );
        }
        for _trial in 0..config.trials {
            let sub_seed = master.next_u64();
            let mut rng = XorShift64Star::new(sub_seed);
            let keep_count = ((fraction * n as f64).round() as usize).clamp(0, n);
            let keep = ObjectSet::from_indices(
                n,
                rng.sample_distinct(keep_count, n),
            );
            for c in 0..graph.len() as u32 {
                let intent = &graph.concept(c).intent;
                let closed = closure_in(ctx, &keep, intent) == *intent;
                let passkey = structure.passkeys_of(c).first().map(|pk| {
                    let mut budget = config.passkey_search_budget;
                    is_passkey_in(ctx, &keep, pk, &mut budget)
                });
                for key in [
                    (fi, "delta_cls", annotation.delta_cls(c)),
                    (fi, "delta_pk", annotation.delta_pk(c)),
                ] {
                    let row = acc.get_mut(&key).expect("group preallocated");
                    row.closed_tested += 1;
                    row.closed_survived += closed as u64;
                    match passkey {
                        Some(Some(true)) => {
                            row.passkey_tested += 1;
                            row.passkey_survived += 1;
                        }
                        Some(Some(false)) => row.passkey_tested += 1,
                        Some(None) => row.passkey_skipped += 1,
                        None => {}
                    }
                }
            }
        }
    }
    acc.into_values().collect()
}
