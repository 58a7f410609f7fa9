//! The level structure: minimum generator (passkey) sizes per concept.
//!
//! Keys are mined breadth-first by size. Every proper subset of a key is a
//! key, so size-k candidates are joins of sibling size-(k-1) keys sharing a
//! prefix, and a candidate is a key exactly when each of its maximal proper
//! subsets is a key with a different closure. The first size at which a
//! concept acquires a key fixes its level and its passkeys; later keys for
//! that concept are kept only as join material.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::bitset::AttributeSet;
use crate::concepts::ConceptGraph;
use crate::context::FormalContext;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LevelConfig {
    /// Stop after this level, leaving deeper concepts unleveled.
    pub max_level: Option<usize>,
    /// Passkeys stored per concept; the exact count is kept regardless.
    pub passkey_cap: usize,
    /// Abort once this many candidates have been tested.
    pub candidate_cap: usize,
    /// Worker threads for candidate testing; results are applied in
    /// candidate order, so output does not depend on this.
    pub workers: usize,
}

impl Default for LevelConfig {
    fn default() -> Self {
        LevelConfig {
            max_level: None,
            passkey_cap: 64,
            candidate_cap: 50_000_000,
            workers: 1,
        }
    }
}

/// Per-concept levels and passkeys.
#[derive(Debug)]
pub struct ClosureStructure {
    level: Vec<Option<u32>>,
    passkeys: Vec<Vec<AttributeSet>>,
    passkey_counts: Vec<u64>,
    leveled: usize,
}

impl ClosureStructure {
    #[inline]
    pub fn len(&self) -> usize {
        self.level.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.level.is_empty()
    }

    /// Level of a concept; `None` when the search was truncated below it.
    #[inline]
    pub fn level_of(&self, id: u32) -> Option<u32> {
        self.level[id as usize]
    }

    /// Stored passkeys (canonical order, truncated at the configured cap).
    pub fn passkeys_of(&self, id: u32) -> &[AttributeSet] {
        &self.passkeys[id as usize]
    }

    /// Exact passkey count, independent of the storage cap.
    #[inline]
    pub fn passkey_count(&self, id: u32) -> u64 {
        self.passkey_counts[id as usize]
    }

    #[inline]
    pub fn all_leveled(&self) -> bool {
        self.leveled == self.level.len()
    }

    pub fn unleveled_count(&self) -> usize {
        self.level.len() - self.leveled
    }

    /// Histogram of leveled concepts, ascending by level.
    pub fn level_counts(&self) -> Vec<(u32, usize)> {
        let mut counts: Vec<(u32, usize)> = Vec::new();
        let mut levels: Vec<u32> = self.level.iter().flatten().copied().collect();
        levels.sort_unstable();
        for l in levels {
            match counts.last_mut() {
                Some((lv, n)) if *lv == l => *n += 1,
                _ => counts.push((l, 1)),
            }
        }
        counts
    }
}

/// The closure index: the maximum level. Refuses truncated structures.
pub fn closure_index(structure: &ClosureStructure) -> Result<u32> {
    if !structure.all_leveled() {
        return Err(Error::Unleveled {
            max_level: structure
                .level
                .iter()
                .flatten()
                .copied()
                .max()
                .unwrap_or(0) as usize,
            unleveled: structure.unleveled_count(),
        });
    }
    Ok(structure
        .level
        .iter()
        .flatten()
        .copied()
        .max()
        .unwrap_or(0))
}

/// One histogram row: level, concept count, share of all concepts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelShare {
    pub level: u32,
    pub count: usize,
    pub ratio: f64,
}

/// Level histogram with ratios; requires a fully leveled structure.
pub fn level_histogram(structure: &ClosureStructure) -> Result<Vec<LevelShare>> {
    if !structure.all_leveled() {
        return Err(Error::Unleveled {
            max_level: 0,
            unleveled: structure.unleveled_count(),
        });
    }
    let total = structure.len() as f64;
    Ok(structure
        .level_counts()
        .into_iter()
        .map(|(level, count)| LevelShare {
            level,
            count,
            ratio: count as f64 / total,
        })
        .collect())
}

struct Key {
    indices: Vec<u16>,
    concept: u32,
}

/// Mines levels and passkeys for every concept of the graph.
pub fn enumerate_levels(
    ctx: &FormalContext,
    graph: &ConceptGraph,
    config: &LevelConfig,
) -> Result<ClosureStructure> {
    let n = graph.len();
    let n_attributes = ctx.n_attributes();
    let mut structure = ClosureStructure {
        level: vec![None; n],
        passkeys: vec![Vec::new(); n],
        passkey_counts: vec![0; n],
        leveled: 0,
    };

    let mut extent_index: HashMap<&[u64], u32> = HashMap::with_capacity(n);
    for (i, c) in graph.concepts().iter().enumerate() {
        extent_index.insert(c.extent.words(), i as u32);
    }

    // level 0: the empty itemset generates the top concept
    let top = graph.top_id();
    structure.level[top as usize] = Some(0);
    structure.passkeys[top as usize].push(AttributeSet::new(n_attributes));
    structure.passkey_counts[top as usize] = 1;
    structure.leveled = 1;

    let mut frontier: Vec<Key> = vec![Key {
        indices: Vec::new(),
        concept: top,
    }];
    let mut key_concepts: HashMap<AttributeSet, u32> = HashMap::new();
    let mut tested: usize = 0;
    let words = ctx.n_objects().div_ceil(64);

    let pool = (config.workers != 1).then(|| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .expect("thread pool")
    });

    for k in 1..=n_attributes {
        if structure.leveled == n {
            break;
        }
        if let Some(max) = config.max_level {
            if k > max {
                break;
            }
        }
        if frontier.is_empty() {
            debug_assert!(structure.leveled == n, "frontier drained early");
            break;
        }

        // candidate index lists, in lexicographic order
        let mut candidates: Vec<(Vec<u16>, u32, u32)> = Vec::new(); // (indices, parent_a, parent_b)
        if k == 1 {
            for m in 0..n_attributes {
                candidates.push((vec![m as u16], frontier[0].concept, frontier[0].concept));
            }
        } else {
            frontier.sort_by(|a, b| a.indices.cmp(&b.indices));
            let mut group_start = 0;
            while group_start < frontier.len() {
                let prefix = &frontier[group_start].indices[..k - 2];
                let mut group_end = group_start + 1;
                while group_end < frontier.len()
                    && frontier[group_end].indices[..k - 2] == *prefix
                {
                    group_end += 1;
                }
                for i in group_start..group_end {
                    for j in i + 1..group_end {
                        let mut indices = frontier[i].indices.clone();
                        indices.push(*frontier[j].indices.last().unwrap());
                        candidates.push((indices, frontier[i].concept, frontier[j].concept));
                    }
                }
                group_start = group_end;
            }
        }

        tested += candidates.len();
        if tested > config.candidate_cap {
            return Err(Error::CandidateCapExceeded {
                level: k,
                tested,
                cap: config.candidate_cap,
            });
        }

        let key_lookup = &key_concepts;
        let extent_lookup = &extent_index;
        let test = |cand: &(Vec<u16>, u32, u32)| -> Option<Key> {
            let (indices, parent_a, parent_b) = cand;
            // every maximal proper subset must be a key with a different
            // closure; the two join parents are already known to be keys
            let mut subset_concepts: Vec<u32> = Vec::with_capacity(k);
            subset_concepts.push(*parent_a);
            subset_concepts.push(*parent_b);
            if k >= 3 {
                // the join parents cover the two subsets missing the last
                // elements; the rest drop one prefix element each
                let full = AttributeSet::from_indices(
                    n_attributes,
                    indices.iter().map(|&m| m as usize),
                );
                for &dropped in &indices[..k - 2] {
                    let mut sub = full.clone();
                    sub.remove(dropped as usize);
                    match key_lookup.get(&sub) {
                        Some(&c) => subset_concepts.push(c),
                        None => return None,
                    }
                }
            }
            // closure of the candidate, via its extent
            let mut extent = vec![!0u64; words];
            mask_tail(&mut extent, ctx.n_objects());
            for &m in indices.iter() {
                for (w, cw) in extent.iter_mut().zip(ctx.col(m as usize).words()) {
                    *w &= cw;
                }
            }
            let concept = *extent_lookup
                .get(&extent[..])
                .expect("closure of candidate is an enumerated concept");
            if subset_concepts.contains(&concept) {
                return None;
            }
            Some(Key {
                indices: indices.clone(),
                concept,
            })
        };

        let results: Vec<Option<Key>> = match &pool {
            Some(pool) => pool.install(|| candidates.par_iter().map(test).collect()),
            None => candidates.iter().map(test).collect(),
        };

        let mut next_frontier: Vec<Key> = Vec::new();
        let mut next_keys: HashMap<AttributeSet, u32> = HashMap::new();
        for key in results.into_iter().flatten() {
            let c = key.concept as usize;
            match structure.level[c] {
                None => {
                    structure.level[c] = Some(k as u32);
                    structure.leveled += 1;
                    structure.passkey_counts[c] = 1;
                    structure.passkeys[c].push(set_of(&key.indices, n_attributes));
                }
                Some(l) if l == k as u32 => {
                    structure.passkey_counts[c] += 1;
                    if structure.passkeys[c].len() < config.passkey_cap {
                        structure.passkeys[c].push(set_of(&key.indices, n_attributes));
                    }
                }
                Some(_) => {}
            }
            next_keys.insert(set_of(&key.indices, n_attributes), key.concept);
            next_frontier.push(key);
        }
        frontier = next_frontier;
        key_concepts = next_keys;
    }

    Ok(structure)
}

fn set_of(indices: &[u16], n_attributes: usize) -> AttributeSet {
    AttributeSet::from_indices(n_attributes, indices.iter().map(|&m| m as usize))
}

fn mask_tail(words: &mut [u64], nbits: usize) {
    let rem = nbits % 64;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
    if nbits == 0 {
        for w in words.iter_mut() {
            *w = 0;
        }
    }
}
