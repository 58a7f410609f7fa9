//! Closed itemset enumeration and the covering graph.
//!
//! Enumeration is a canonicity-tested depth-first search over attribute
//! extensions: a branch survives only when the closure it produces adds no
//! attribute below the branching point, so every closed itemset is reached
//! exactly once. The covering graph is then rebuilt from extents: each
//! concept's candidate children are the closures of its single-attribute
//! extensions, and the covers are the candidates with minimal intents.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::bitset::{AttributeSet, ObjectSet};
use crate::context::FormalContext;
use crate::error::{Error, Result};

/// A formal concept: a closed itemset with its extent.
#[derive(Clone, Debug)]
pub struct Concept {
    pub intent: AttributeSet,
    pub extent: ObjectSet,
    pub support: u32,
}

/// Enumeration settings.
#[derive(Debug, Clone, Copy)]
pub struct MinerConfig {
    /// Abort if more than this many concepts are produced.
    pub concept_cap: usize,
    /// Worker threads; 1 = sequential, 0 = one per core. Output is
    /// identical for every worker count.
    pub workers: usize,
}

impl Default for MinerConfig {
    fn default() -> Self {
        MinerConfig {
            concept_cap: 100_000_000,
            workers: 1,
        }
    }
}

/// All concepts plus covering edges, ref pointers and per-concept delta.
///
/// Concepts are indexed in canonical order: support descending, ties by the
/// lexicographic order of the intent index sequence. Index 0 is therefore
/// the top concept, and `bottom` the concept whose intent is the full
/// attribute set.
pub struct ConceptGraph {
    concepts: Vec<Concept>,
    lower_neighbors: Vec<Vec<u32>>,
    ref_of: Vec<Option<u32>>,
    delta_cls: Vec<u32>,
    intent_index: HashMap<AttributeSet, u32>,
    n_objects: usize,
    n_attributes: usize,
    bottom: u32,
}

pub fn canonical_concept_cmp(a: &Concept, b: &Concept) -> std::cmp::Ordering {
    b.support
        .cmp(&a.support)
        .then_with(|| a.intent.cmp_canonical(&b.intent))
}

struct Dfs<'a> {
    ctx: &'a FormalContext,
    out: Vec<Concept>,
    cap: usize,
}

/// True when `a` and `b` agree on every attribute index below `m`.
#[inline]
fn prefix_equal(a: &AttributeSet, b: &AttributeSet, m: usize) -> bool {
    let (aw, bw) = (a.words(), b.words());
    let full = m / 64;
    if aw[..full] != bw[..full] {
        return false;
    }
    let rem = m % 64;
    rem == 0 || (aw[full] ^ bw[full]) & ((1u64 << rem) - 1) == 0
}

impl Dfs<'_> {
    fn descend(&mut self, intent: AttributeSet, extent: ObjectSet, start: usize) -> Result<()> {
        if self.out.len() >= self.cap {
            return Err(Error::ConceptCapExceeded { cap: self.cap });
        }
        let support = extent.count() as u32;
        self.out.push(Concept {
            intent: intent.clone(),
            extent: extent.clone(),
            support,
        });
        for m in start..self.ctx.n_attributes() {
            if intent.contains(m) {
                continue;
            }
            let mut new_extent = extent.clone();
            new_extent.intersect_with(self.ctx.col(m));
            let new_intent = self.ctx.derive_attributes(&new_extent);
            if prefix_equal(&new_intent, &intent, m) {
                self.descend(new_intent, new_extent, m + 1)?;
            }
        }
        Ok(())
    }
}

/// Enumerates every closed itemset of the context, top and bottom included,
/// sorted canonically. Deterministic for any worker count.
pub fn enumerate_closed(ctx: &FormalContext, config: &MinerConfig) -> Result<Vec<Concept>> {
    let top_extent = ObjectSet::full(ctx.n_objects());
    let top_intent = ctx.derive_attributes(&top_extent);

    let mut concepts = if config.workers == 1 {
        let mut dfs = Dfs {
            ctx,
            out: Vec::new(),
            cap: config.concept_cap,
        };
        dfs.descend(top_intent, top_extent, 0)?;
        dfs.out
    } else {
        // Split at the root: each surviving first-level branch runs its own
        // sequential search; branch order is preserved on concatenation.
        let mut seeds = Vec::new();
        for m in 0..ctx.n_attributes() {
            if top_intent.contains(m) {
                continue;
            }
            let mut extent = top_extent.clone();
            extent.intersect_with(ctx.col(m));
            let intent = ctx.derive_attributes(&extent);
            if prefix_equal(&intent, &top_intent, m) {
                seeds.push((m, intent, extent));
            }
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .expect("thread pool");
        let branch_results: Vec<Result<Vec<Concept>>> = pool.install(|| {
            seeds
                .into_par_iter()
                .map(|(m, intent, extent)| {
                    let mut dfs = Dfs {
                        ctx,
                        out: Vec::new(),
                        cap: config.concept_cap,
                    };
                    dfs.descend(intent, extent, m + 1)?;
                    Ok(dfs.out)
                })
                .collect()
        });
        let mut out = Vec::new();
        out.push(Concept {
            intent: top_intent,
            support: top_extent.count() as u32,
            extent: top_extent,
        });
        for branch in branch_results {
            out.extend(branch?);
        }
        if out.len() > config.concept_cap {
            return Err(Error::ConceptCapExceeded {
                cap: config.concept_cap,
            });
        }
        out
    };

    concepts.sort_by(canonical_concept_cmp);
    Ok(concepts)
}

#[inline]
fn and_into(dst: &mut [u64], a: &[u64], b: &[u64]) {
    for ((d, x), y) in dst.iter_mut().zip(a).zip(b) {
        *d = x & y;
    }
}

/// Builds the covering graph over a complete closed family.
///
/// For each concept the candidate children are looked up by extent; a
/// missing closure means the family is incomplete and is reported as an
/// integrity error.
pub fn build_graph(ctx: &FormalContext, mut concepts: Vec<Concept>) -> Result<ConceptGraph> {
    concepts.sort_by(canonical_concept_cmp);
    let n = concepts.len();
    let n_objects = ctx.n_objects();
    let n_attributes = ctx.n_attributes();

    let mut extent_index: HashMap<&[u64], u32> = HashMap::with_capacity(n);
    for (i, c) in concepts.iter().enumerate() {
        if extent_index.insert(c.extent.words(), i as u32).is_some() {
            return Err(Error::IncompleteConcepts {
                detail: "duplicate concept extent".into(),
            });
        }
    }

    let words = n_objects.div_ceil(64);
    let mut scratch = vec![0u64; words];
    let mut lower_neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut ref_of: Vec<Option<u32>> = vec![None; n];
    let mut delta_cls: Vec<u32> = vec![0; n];
    let mut bottom: Option<u32> = None;
    let mut child_ids: Vec<u32> = Vec::new();

    for c in 0..n {
        child_ids.clear();
        let intent = &concepts[c].intent;
        for m in 0..n_attributes {
            if intent.contains(m) {
                continue;
            }
            and_into(&mut scratch, concepts[c].extent.words(), ctx.col(m).words());
            match extent_index.get(&scratch[..]) {
                Some(&id) => child_ids.push(id),
                None => {
                    return Err(Error::IncompleteConcepts {
                        detail: format!(
                            "closure of concept {c} extended by attribute {m} is missing"
                        ),
                    })
                }
            }
        }
        child_ids.sort_unstable();
        child_ids.dedup();

        if child_ids.is_empty() {
            // the bottom concept: its intent is the full attribute set, the
            // delta condition is vacuous
            bottom = Some(c as u32);
            delta_cls[c] = n_objects as u32;
            continue;
        }

        // covers: candidates with no other candidate strictly between;
        // intent containment is checked only against higher-support
        // candidates, which is where proper superextents live
        let covers: Vec<u32> = child_ids
            .iter()
            .copied()
            .filter(|&i| {
                !child_ids.iter().copied().any(|j| {
                    j != i
                        && concepts[j as usize].support > concepts[i as usize].support
                        && concepts[j as usize]
                            .intent
                            .is_proper_subset(&concepts[i as usize].intent)
                })
            })
            .collect();

        // ascending id = support descending with the canonical tie-break, so
        // the first cover is the ref target
        let ref_id = covers[0];
        ref_of[c] = Some(ref_id);
        delta_cls[c] = concepts[c].support - concepts[ref_id as usize].support;
        lower_neighbors[c] = covers;
    }

    let bottom = bottom.ok_or_else(|| Error::IncompleteConcepts {
        detail: "no bottom concept (full intent) present".into(),
    })?;

    drop(extent_index);
    let mut intent_index = HashMap::with_capacity(n);
    for (i, c) in concepts.iter().enumerate() {
        intent_index.insert(c.intent.clone(), i as u32);
    }

    Ok(ConceptGraph {
        concepts,
        lower_neighbors,
        ref_of,
        delta_cls,
        intent_index,
        n_objects,
        n_attributes,
        bottom,
    })
}

impl ConceptGraph {
    #[inline]
    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    #[inline]
    pub fn concept(&self, id: u32) -> &Concept {
        &self.concepts[id as usize]
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    #[inline]
    pub fn support(&self, id: u32) -> u32 {
        self.concepts[id as usize].support
    }

    pub fn lower_neighbors(&self, id: u32) -> &[u32] {
        &self.lower_neighbors[id as usize]
    }

    /// The lower neighbor of maximum extent, if any.
    #[inline]
    pub fn ref_of(&self, id: u32) -> Option<u32> {
        self.ref_of[id as usize]
    }

    #[inline]
    pub fn delta_cls(&self, id: u32) -> u32 {
        self.delta_cls[id as usize]
    }

    /// Top concept (extent = all objects); it sorts first.
    #[inline]
    pub fn top_id(&self) -> u32 {
        0
    }

    /// Bottom concept (intent = all attributes).
    #[inline]
    pub fn bottom_id(&self) -> u32 {
        self.bottom
    }

    #[inline]
    pub fn n_objects(&self) -> usize {
        self.n_objects
    }

    #[inline]
    pub fn n_attributes(&self) -> usize {
        self.n_attributes
    }

    pub fn concept_of_intent(&self, intent: &AttributeSet) -> Option<u32> {
        self.intent_index.get(intent).copied()
    }

    /// Number of concepts with nonempty extent. Closed itemset counts in
    /// the mining literature are usually reported this way (an itemset no
    /// object supports is not counted), while the lattice always carries
    /// the bottom concept.
    pub fn supported_count(&self) -> usize {
        self.concepts.iter().filter(|c| c.support > 0).count()
    }

    /// First ancestor of `id` along ref pointers that is `d`-closed.
    pub fn delta_class_of(&self, id: u32, d: u32) -> u32 {
        debug_assert!(d >= 1);
        let mut cur = id;
        while self.delta_cls[cur as usize] < d {
            match self.ref_of[cur as usize] {
                Some(next) => cur = next,
                None => break,
            }
        }
        cur
    }
}

/// The delta closure of an arbitrary itemset: close it, then follow ref
/// pointers while the current concept's delta is below `d`. The result is
/// `d`-closed and independent of the walk order.
pub fn delta_closure(
    graph: &ConceptGraph,
    ctx: &FormalContext,
    x: &AttributeSet,
    d: u32,
) -> AttributeSet {
    assert!(d >= 1, "delta threshold must be at least 1");
    let closed = ctx.closure1(x);
    let id = graph
        .concept_of_intent(&closed)
        .expect("closure of any itemset is an enumerated concept");
    graph.concept(graph.delta_class_of(id, d)).intent.clone()
}

/// The delta measure of an itemset: 0 when it is not closed, the concept
/// delta otherwise. The full itemset reports `n_objects`.
pub fn delta_of_itemset(graph: &ConceptGraph, ctx: &FormalContext, x: &AttributeSet) -> u32 {
    if ctx.closure1(x) != *x {
        return 0;
    }
    let id = graph
        .concept_of_intent(x)
        .expect("closed itemset is an enumerated concept");
    graph.delta_cls(id)
}
