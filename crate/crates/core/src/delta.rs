//! Delta-equivalence machinery over the concept graph.
//!
//! A concept stops being its own class representative at threshold
//! `delta_cls + 1`; from there its class is whatever its ref pointer chain
//! reaches. Partitions for a single threshold are computed by iterated
//! pointer jumping. The per-concept passkey delta sweeps every threshold
//! once, carrying the jump state forward since classes only merge as the
//! threshold grows: a concept keeps its passkey delta growing exactly while
//! its level ties the minimum level of its current class.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::bitset::AttributeSet;
use crate::concepts::{
    build_graph, delta_closure, enumerate_closed, ConceptGraph, MinerConfig,
};
use crate::context::FormalContext;
use crate::error::{Error, Result};
use crate::levels::{enumerate_levels, ClosureStructure, LevelConfig};

/// Per-concept delta values.
pub struct DeltaAnnotation {
    delta_cls: Vec<u32>,
    delta_pk: Vec<u32>,
    /// Smallest threshold at which the concept stops being its own class
    /// representative; `None` for the bottom, which never merges.
    merge_threshold: Vec<Option<u32>>,
}

impl DeltaAnnotation {
    #[inline]
    pub fn delta_cls(&self, id: u32) -> u32 {
        self.delta_cls[id as usize]
    }

    #[inline]
    pub fn delta_pk(&self, id: u32) -> u32 {
        self.delta_pk[id as usize]
    }

    #[inline]
    pub fn merge_threshold(&self, id: u32) -> Option<u32> {
        self.merge_threshold[id as usize]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.delta_cls.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.delta_cls.is_empty()
    }

    /// Representative of the concept's class at threshold `d`.
    pub fn class_of(&self, graph: &ConceptGraph, id: u32, d: u32) -> u32 {
        graph.delta_class_of(id, d)
    }
}

/// One class of a [`DeltaPartition`]: the representative is the class
/// maximum (a `d`-closed concept), members are ascending concept ids.
#[derive(Debug, Clone)]
pub struct DeltaClass {
    pub representative: u32,
    pub members: Vec<u32>,
    /// Minimum member level; present when the partition was computed with a
    /// level structure at hand.
    pub level: Option<u32>,
}

/// Partition of all concepts into delta classes at one threshold.
#[derive(Debug, Clone)]
pub struct DeltaPartition {
    pub d: u32,
    pub classes: Vec<DeltaClass>,
}

impl DeltaPartition {
    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Representative of the class containing `id`.
    pub fn representative_of(&self, id: u32) -> u32 {
        self.classes
            .iter()
            .find(|c| c.members.binary_search(&id).is_ok())
            .map(|c| c.representative)
            .expect("classes partition the concept set")
    }
}

/// Computes the delta partition at threshold `d` by pointer jumping:
/// every pointer is repeatedly replaced by its target's pointer until no
/// pointer moves. Levels are filled when `structure` is given.
pub fn compute_partition(
    graph: &ConceptGraph,
    d: u32,
    structure: Option<&ClosureStructure>,
) -> DeltaPartition {
    assert!(d >= 1, "delta threshold must be at least 1");
    let n = graph.len();
    let deltas: Vec<u32> = (0..n).map(|i| graph.delta_cls(i as u32)).collect();
    let refs: Vec<u32> = (0..n)
        .map(|i| graph.ref_of(i as u32).unwrap_or(i as u32))
        .collect();
    let mut ptr: Vec<u32> = (0..n as u32).collect();
    loop {
        let mut updated = false;
        for c in 0..n {
            let k = ptr[c] as usize;
            if deltas[k] < d && refs[k] != k as u32 {
                ptr[c] = ptr[refs[k] as usize];
                updated = true;
            }
        }
        if !updated {
            break;
        }
    }

    let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for c in 0..n as u32 {
        groups.entry(ptr[c as usize]).or_default().push(c);
    }
    let classes = groups
        .into_iter()
        .map(|(representative, members)| {
            let level = structure.map(|s| {
                members
                    .iter()
                    .filter_map(|&m| s.level_of(m))
                    .min()
                    .unwrap_or(0)
            });
            DeltaClass {
                representative,
                members,
                level,
            }
        })
        .collect();
    DeltaPartition { d, classes }
}

/// Sweeps every threshold from 2 to `n_objects`, maintaining the class
/// pointer of every concept, and records for each concept the largest
/// threshold at which its level still ties the minimum level of its class.
/// Requires a fully leveled structure.
pub fn compute_pk_deltas(
    graph: &ConceptGraph,
    structure: &ClosureStructure,
) -> Result<DeltaAnnotation> {
    let n = graph.len();
    if !structure.all_leveled() {
        return Err(Error::Unleveled {
            max_level: 0,
            unleveled: structure.unleveled_count(),
        });
    }
    let n_objects = graph.n_objects() as u32;
    let deltas: Vec<u32> = (0..n).map(|i| graph.delta_cls(i as u32)).collect();
    let refs: Vec<u32> = (0..n)
        .map(|i| graph.ref_of(i as u32).unwrap_or(i as u32))
        .collect();
    let levels: Vec<u32> = (0..n)
        .map(|i| structure.level_of(i as u32).expect("leveled"))
        .collect();

    let mut cls: Vec<u32> = (0..n as u32).collect();
    let mut delta_pk = vec![1u32; n];
    // per-representative minimum level, invalidated by threshold stamp
    let mut stamp = vec![1u32; n];
    let mut min_level = vec![0u32; n];

    for d in 2..=n_objects {
        // carry the pointers forward; classes only merge as d grows
        loop {
            let mut updated = false;
            for c in 0..n {
                let k = cls[c] as usize;
                if deltas[k] < d && refs[k] != k as u32 {
                    cls[c] = cls[refs[k] as usize];
                    updated = true;
                }
            }
            if !updated {
                break;
            }
        }
        for c in 0..n {
            let r = cls[c] as usize;
            if stamp[r] != d {
                stamp[r] = d;
                min_level[r] = levels[c];
            } else if levels[c] < min_level[r] {
                min_level[r] = levels[c];
            }
        }
        for c in 0..n {
            if levels[c] == min_level[cls[c] as usize] {
                delta_pk[c] = d;
            }
        }
    }

    let merge_threshold = (0..n)
        .map(|i| {
            if graph.ref_of(i as u32).is_none() {
                None
            } else {
                Some(deltas[i] + 1)
            }
        })
        .collect();
    Ok(DeltaAnnotation {
        delta_cls: deltas,
        delta_pk,
        merge_threshold,
    })
}

/// Whether `x` is a delta-key at `d`: no maximal proper subset shares its
/// delta closure. The empty itemset is a key at every threshold.
pub fn is_delta_key(
    ctx: &FormalContext,
    graph: &ConceptGraph,
    x: &AttributeSet,
    d: u32,
) -> bool {
    let target = delta_closure(graph, ctx, x, d);
    for m in x.iter() {
        let mut y = x.clone();
        y.remove(m);
        if delta_closure(graph, ctx, &y, d) == target {
            return false;
        }
    }
    true
}

/// Largest `d` at which `x` is a delta-key, or 0 when it is not even a
/// 1-key. The key property is downward closed in `d`, so this is a binary
/// search.
pub fn delta_key_value(ctx: &FormalContext, graph: &ConceptGraph, x: &AttributeSet) -> u32 {
    let n_objects = graph.n_objects() as u32;
    if n_objects == 0 || !is_delta_key(ctx, graph, x, 1) {
        return 0;
    }
    let (mut lo, mut hi) = (1u32, n_objects);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if is_delta_key(ctx, graph, x, mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// The delta-free test: every maximal proper subset supports at least `d`
/// more objects than `x`. Necessary but not sufficient for the key
/// property.
pub fn is_delta_free(ctx: &FormalContext, x: &AttributeSet, d: u32) -> bool {
    let sup = ctx.derive_objects(x).count();
    for m in x.iter() {
        let mut y = x.clone();
        y.remove(m);
        if ctx.derive_objects(&y).count() - sup < d as usize {
            return false;
        }
    }
    true
}

/// How distribution bin edges are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinRule {
    /// Quantile cuts of the observed passkey-delta multiset.
    Quantile,
    /// Equal-width cuts of `[1, n_objects]`.
    FixedWidth,
}

#[derive(Debug, Clone)]
pub struct LevelRow {
    pub level: u32,
    pub count: usize,
    /// Share of all concepts sitting at this level.
    pub level_ratio: f64,
    /// Share of this level's concepts per bin; sums to 1.
    pub bin_ratios: Vec<f64>,
}

/// Passkey-delta distribution per level: the data behind the stacked-bar
/// report.
#[derive(Debug, Clone)]
pub struct LevelDistribution {
    /// Half-open value intervals `(lo, hi]`, covering `[1, n_objects]`.
    pub bins: Vec<(u32, u32)>,
    pub rows: Vec<LevelRow>,
}

pub fn level_distribution(
    annotation: &DeltaAnnotation,
    structure: &ClosureStructure,
    n_bins: usize,
    rule: BinRule,
) -> Result<LevelDistribution> {
    assert!(n_bins >= 1, "need at least one bin");
    assert_eq!(annotation.len(), structure.len(), "mismatched structures");
    if !structure.all_leveled() {
        return Err(Error::Unleveled {
            max_level: 0,
            unleveled: structure.unleveled_count(),
        });
    }
    let n = annotation.len();
    let n_objects_cap = annotation
        .delta_pk
        .iter()
        .copied()
        .max()
        .unwrap_or(1);

    let mut edges: Vec<u32> = match rule {
        BinRule::Quantile => {
            let mut vals: Vec<u32> = annotation.delta_pk.clone();
            vals.sort_unstable();
            (1..=n_bins)
                .map(|i| vals[(i * n).div_ceil(n_bins) - 1])
                .collect()
        }
        BinRule::FixedWidth => (1..=n_bins)
            .map(|i| ((i * n_objects_cap as usize).div_ceil(n_bins)) as u32)
            .collect(),
    };
    edges.dedup();
    if let Some(last) = edges.last_mut() {
        if *last < n_objects_cap {
            *last = n_objects_cap;
        }
    }
    edges.dedup();
    let mut bins = Vec::with_capacity(edges.len());
    let mut lo = 0u32;
    for &hi in &edges {
        bins.push((lo, hi));
        lo = hi;
    }

    let bin_of = |v: u32| -> usize {
        bins.iter()
            .position(|&(lo, hi)| v > lo && v <= hi)
            .expect("bins cover every observed value")
    };

    let mut per_level: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut level_totals: BTreeMap<u32, usize> = BTreeMap::new();
    for c in 0..n as u32 {
        let level = structure.level_of(c).expect("leveled");
        let row = per_level
            .entry(level)
            .or_insert_with(|| vec![0; bins.len()]);
        row[bin_of(annotation.delta_pk(c))] += 1;
        *level_totals.entry(level).or_insert(0) += 1;
    }

    let rows = per_level
        .into_iter()
        .map(|(level, counts)| {
            let count = level_totals[&level];
            LevelRow {
                level,
                count,
                level_ratio: count as f64 / n as f64,
                bin_ratios: counts
                    .iter()
                    .map(|&c| c as f64 / count as f64)
                    .collect(),
            }
        })
        .collect();

    Ok(LevelDistribution { bins, rows })
}

/// Wall-clock of each pipeline stage, in milliseconds.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimings {
    pub enumerate_ms: u64,
    pub graph_ms: u64,
    pub levels_ms: u64,
    pub delta_ms: u64,
}

pub struct Annotated {
    pub graph: ConceptGraph,
    pub structure: ClosureStructure,
    pub annotation: DeltaAnnotation,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AnnotateConfig {
    pub miner: MinerConfig,
    pub levels: LevelConfig,
}

/// Full pipeline: enumerate, build the graph, level, and annotate.
pub fn annotate_all(ctx: &FormalContext, config: &AnnotateConfig) -> Result<Annotated> {
    let t0 = Instant::now();
    let concepts = enumerate_closed(ctx, &config.miner)?;
    let enumerate_ms = t0.elapsed().as_millis() as u64;

    let t1 = Instant::now();
    let graph = build_graph(ctx, concepts)?;
    let graph_ms = t1.elapsed().as_millis() as u64;

    let t2 = Instant::now();
    let structure = enumerate_levels(ctx, &graph, &config.levels)?;
    let levels_ms = t2.elapsed().as_millis() as u64;

    let t3 = Instant::now();
    let annotation = compute_pk_deltas(&graph, &structure)?;
    let delta_ms = t3.elapsed().as_millis() as u64;

    Ok(Annotated {
        graph,
        structure,
        annotation,
        timings: StageTimings {
            enumerate_ms,
            graph_ms,
            levels_ms,
            delta_ms,
        },
    })
}
