//! Exhaustive reference implementations over the full powerset.
//!
//! Everything here works from the definitions alone — support drops are
//! re-derived per itemset and the delta closure is computed by repeated
//! single-attribute additions, never through the concept graph — so these
//! routines can serve as an independent oracle for the main engine. They
//! refuse inputs beyond [`OracleLimits`]; within the limits itemsets fit in
//! a `u32` mask and extents in a `u64` mask.

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use crate::bitset::AttributeSet;
use crate::context::FormalContext;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OracleLimits {
    pub max_attributes: usize,
    pub max_objects: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_attributes: 14,
            max_objects: 16,
        }
    }
}

/// Powerset tables for one small context.
pub struct Oracle {
    n_attributes: usize,
    n_objects: usize,
    /// extent mask of every itemset mask
    extents: Vec<u64>,
    /// row mask of every object
    rows: Vec<u32>,
    attribute_names: Vec<String>,
}

/// One delta-equivalence class of itemsets: the class representative (its
/// maximum) plus every member mask.
#[derive(Debug, Clone)]
pub struct BruteClass {
    pub representative: u32,
    pub members: Vec<u32>,
}

/// Minimal and minimum-size members of one class.
#[derive(Debug, Clone)]
pub struct BruteKeys {
    pub representative: u32,
    pub minimal: Vec<u32>,
    pub minimum: Vec<u32>,
}

impl Oracle {
    pub fn new(ctx: &FormalContext) -> Result<Self> {
        Self::with_limits(ctx, OracleLimits::default())
    }

    pub fn with_limits(ctx: &FormalContext, limits: OracleLimits) -> Result<Self> {
        if ctx.n_attributes() > limits.max_attributes || ctx.n_objects() > limits.max_objects {
            return Err(Error::OracleLimit {
                detail: format!(
                    "{} objects x {} attributes exceeds {} x {}",
                    ctx.n_objects(),
                    ctx.n_attributes(),
                    limits.max_objects,
                    limits.max_attributes
                ),
            });
        }
        let n_attributes = ctx.n_attributes();
        let n_objects = ctx.n_objects();
        let full_extent: u64 = if n_objects == 64 {
            !0
        } else {
            (1u64 << n_objects) - 1
        };
        let mut col_masks = vec![0u64; n_attributes];
        let mut rows = vec![0u32; n_objects];
        for (g, row) in rows.iter_mut().enumerate() {
            for m in ctx.row(g).iter() {
                col_masks[m] |= 1 << g;
                *row |= 1 << m;
            }
        }
        // extent of every itemset, by peeling the lowest attribute
        let mut extents = vec![0u64; 1usize << n_attributes];
        extents[0] = full_extent;
        for mask in 1u32..(1u32 << n_attributes) {
            let low = mask.trailing_zeros() as usize;
            extents[mask as usize] =
                extents[(mask & (mask - 1)) as usize] & col_masks[low];
        }
        Ok(Oracle {
            n_attributes,
            n_objects,
            extents,
            rows,
            attribute_names: ctx.attribute_names().to_vec(),
        })
    }

    #[inline]
    pub fn n_attributes(&self) -> usize {
        self.n_attributes
    }

    #[inline]
    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    #[inline]
    pub fn support(&self, mask: u32) -> u32 {
        self.extents[mask as usize].count_ones()
    }

    #[inline]
    fn full_mask(&self) -> u32 {
        if self.n_attributes == 32 {
            !0
        } else {
            (1u32 << self.n_attributes) - 1
        }
    }

    /// Standard closure of a mask: attributes common to its extent. An empty
    /// extent closes to the full attribute set.
    pub fn closure(&self, mask: u32) -> u32 {
        let mut intent = self.full_mask();
        let mut ext = self.extents[mask as usize];
        while ext != 0 {
            let g = ext.trailing_zeros() as usize;
            intent &= self.rows[g];
            ext &= ext - 1;
        }
        intent
    }

    /// Delta closure by definition: repeatedly add any attribute whose
    /// support drop is below `d` until none is left.
    pub fn phi(&self, mask: u32, d: u32) -> u32 {
        let mut b = mask;
        'grow: loop {
            let sup = self.support(b);
            for m in 0..self.n_attributes {
                let bit = 1u32 << m;
                if b & bit == 0 && sup - self.support(b | bit) < d {
                    b |= bit;
                    continue 'grow;
                }
            }
            return b;
        }
    }

    /// Whether `mask` is delta-closed at `d`: every missing attribute costs
    /// at least `d` objects. Vacuously true for the full itemset.
    pub fn is_delta_closed(&self, mask: u32, d: u32) -> bool {
        let sup = self.support(mask);
        (0..self.n_attributes).all(|m| {
            let bit = 1u32 << m;
            mask & bit != 0 || sup - self.support(mask | bit) >= d
        })
    }

    /// All closed itemsets `{B'' : B subset of M}` as sorted masks.
    pub fn brute_closed(&self) -> Vec<u32> {
        let mut seen = vec![false; 1usize << self.n_attributes];
        let mut out = Vec::new();
        for mask in 0..(1u32 << self.n_attributes) {
            let c = self.closure(mask);
            if !seen[c as usize] {
                seen[c as usize] = true;
                out.push(c);
            }
        }
        out.sort_unstable();
        out
    }

    /// Partition of the whole powerset by delta closure at `d`. Classes are
    /// sorted by representative mask, members ascending.
    pub fn brute_equiv(&self, d: u32) -> Vec<BruteClass> {
        let mut by_rep: HashMap<u32, Vec<u32>> = HashMap::new();
        for mask in 0..(1u32 << self.n_attributes) {
            by_rep.entry(self.phi(mask, d)).or_default().push(mask);
        }
        let mut classes: Vec<BruteClass> = by_rep
            .into_iter()
            .map(|(representative, members)| BruteClass {
                representative,
                members,
            })
            .collect();
        classes.sort_unstable_by_key(|c| c.representative);
        classes
    }

    /// Minimal (subset-wise) and minimum-size members of every class at `d`.
    pub fn brute_keys(&self, d: u32) -> Vec<BruteKeys> {
        self.brute_equiv(d)
            .into_iter()
            .map(|class| {
                let minimal: Vec<u32> = class
                    .members
                    .iter()
                    .copied()
                    .filter(|&x| {
                        class
                            .members
                            .iter()
                            .all(|&y| y == x || (y & x) != y)
                    })
                    .collect();
                let min_size = minimal.iter().map(|m| m.count_ones()).min().unwrap_or(0);
                let minimum = minimal
                    .iter()
                    .copied()
                    .filter(|m| m.count_ones() == min_size)
                    .collect();
                BruteKeys {
                    representative: class.representative,
                    minimal,
                    minimum,
                }
            })
            .collect()
    }

    /// Whether `mask` is a delta-key at `d`: minimal within its class.
    pub fn is_delta_key(&self, mask: u32, d: u32) -> bool {
        let rep = self.phi(mask, d);
        let mut sub = mask;
        loop {
            sub = sub.wrapping_sub(1) & mask;
            if sub == mask {
                return true; // wrapped: every proper subset checked
            }
            if self.phi(sub, d) == rep {
                return false;
            }
        }
    }

    /// Whether `mask` is a delta-passkey at `d`: a key of minimum size in
    /// its class.
    pub fn is_delta_passkey(&self, mask: u32, d: u32) -> bool {
        if !self.is_delta_key(mask, d) {
            return false;
        }
        let rep = self.phi(mask, d);
        let size = mask.count_ones();
        (0..(1u32 << self.n_attributes))
            .all(|y| y.count_ones() >= size || self.phi(y, d) != rep)
    }

    /// `(delta, delta_key, delta_pk)` of an itemset by scanning every
    /// threshold from 1 to `n_objects`; 0 means the property never holds.
    pub fn brute_delta_values(&self, x: &AttributeSet) -> (u32, u32, u32) {
        let mask = mask_of(x);
        let mut delta_cls = 0;
        let mut delta_key = 0;
        let mut delta_pk = 0;
        for d in 1..=self.n_objects as u32 {
            if self.is_delta_closed(mask, d) {
                delta_cls = delta_cls.max(d);
            }
            if self.is_delta_key(mask, d) {
                delta_key = delta_key.max(d);
            }
            if self.is_delta_passkey(mask, d) {
                delta_pk = delta_pk.max(d);
            }
        }
        (delta_cls, delta_key, delta_pk)
    }

    /// Level of every closed itemset at d = 1: the minimum generator size of
    /// its class, keyed by closed mask.
    pub fn brute_levels(&self) -> HashMap<u32, u32> {
        self.brute_keys(1)
            .into_iter()
            .map(|k| {
                let level = k.minimum.first().map_or(0, |m| m.count_ones());
                (k.representative, level)
            })
            .collect()
    }

    pub fn mask_to_set(&self, mask: u32) -> AttributeSet {
        AttributeSet::from_indices(
            self.n_attributes,
            (0..self.n_attributes).filter(|m| mask & (1 << m) != 0),
        )
    }

    fn mask_names(&self, mask: u32) -> String {
        let mut out = String::new();
        for m in 0..self.n_attributes {
            if mask & (1 << m) != 0 {
                if !out.is_empty() {
                    out.push(';');
                }
                out.push_str(&self.attribute_names[m]);
            }
        }
        out
    }

    /// Dumps the oracle tables (closed sets, levels, keys, partitions for
    /// every threshold, delta values per closed set) as JSON, for use as a
    /// frozen fixture.
    pub fn emit_fixtures(&self, path: &Path) -> Result<()> {
        use serde_json::{json, Map, Value};

        let closed = self.brute_closed();
        let levels = self.brute_levels();
        let mut per_closed = Vec::new();
        for &c in &closed {
            let (dc, dk, dpk) = self.brute_delta_values(&self.mask_to_set(c));
            per_closed.push(json!({
                "intent": self.mask_names(c),
                "support": self.support(c),
                "level": levels[&c],
                "delta_cls": dc,
                "delta_key": dk,
                "delta_pk": dpk,
            }));
        }
        let mut partitions = Map::new();
        for d in 1..=self.n_objects as u32 {
            let classes: Vec<Value> = self
                .brute_equiv(d)
                .iter()
                .map(|cl| {
                    json!({
                        "representative": self.mask_names(cl.representative),
                        "closed_members": closed
                            .iter()
                            .filter(|&&c| self.phi(c, d) == cl.representative)
                            .map(|&c| self.mask_names(c))
                            .collect::<Vec<_>>(),
                    })
                })
                .collect();
            partitions.insert(d.to_string(), Value::Array(classes));
        }
        let doc = json!({
            "n_objects": self.n_objects,
            "n_attributes": self.n_attributes,
            "closed_count": closed.len(),
            "closed": per_closed,
            "partitions": partitions,
        });
        let mut file = std::fs::File::create(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let text = serde_json::to_string_pretty(&doc).expect("fixture serialization");
        file.write_all(text.as_bytes()).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Mask view of an [`AttributeSet`] that fits the oracle limits.
pub fn mask_of(set: &AttributeSet) -> u32 {
    debug_assert!(set.dimension() <= 32);
    let mut mask = 0u32;
    for m in set.iter() {
        mask |= 1 << m;
    }
    mask
}
