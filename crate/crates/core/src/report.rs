//! Result persistence and the stacked-bar distribution figure.
//!
//! Every writer here is deterministic: fixed float formatting, canonical
//! orderings, no timestamps. Re-running an export over identical inputs
//! reproduces identical bytes, which the manifest pins down with content
//! hashes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::concepts::ConceptGraph;
use crate::context::FormalContext;
use crate::delta::{DeltaAnnotation, LevelDistribution};
use crate::error::{Error, Result};
use crate::levels::ClosureStructure;
use crate::stability::{StabilityEntry, SurvivalRow};

/// Cool-to-warm scale for delta bins, low to high.
const PALETTE: [&str; 10] = [
    "#313695", "#4575b4", "#74add1", "#abd9e9", "#e0f3f8", "#fee090", "#fdae61", "#f46d43",
    "#d73027", "#a50026",
];

const BAR_HEIGHT: usize = 22;
const BAR_GAP: usize = 6;
const LEFT_MARGIN: usize = 150;
const BAR_WIDTH: usize = 640;
const LEGEND_HEIGHT: usize = 26;

fn csv_escape(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// One horizontal stacked bar per level: the left label carries the level
/// share, segment widths are proportional to the per-bin ratios. Byte
/// output is fixed for fixed input.
pub fn render_distribution_svg(dist: &LevelDistribution) -> String {
    let rows = dist.rows.len();
    let height = LEGEND_HEIGHT + rows * (BAR_HEIGHT + BAR_GAP) + 10;
    let width = LEFT_MARGIN + BAR_WIDTH + 20;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(
        svg,
        "<rect x=\"0\" y=\"0\" width=\"{width}\" height=\"{height}\" fill=\"#ffffff\"/>"
    );
    // legend: one swatch per bin with its (lo, hi] interval
    let mut lx = LEFT_MARGIN;
    for (i, (lo, hi)) in dist.bins.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(
            svg,
            "<rect x=\"{lx}\" y=\"6\" width=\"12\" height=\"12\" fill=\"{color}\"/>"
        );
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"16\" font-family=\"monospace\" font-size=\"11\">({lo},{hi}]</text>",
            lx + 16
        );
        lx += 16 + 9 * (format!("({lo},{hi}]").len()) / 2 + 14;
    }
    for (i, row) in dist.rows.iter().enumerate() {
        let y = LEGEND_HEIGHT + i * (BAR_HEIGHT + BAR_GAP);
        let label = format!("{:.2}% ({})", row.level_ratio * 100.0, row.level);
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"12\">{label}</text>",
            LEFT_MARGIN - 8,
            y + BAR_HEIGHT / 2 + 4
        );
        let mut x = LEFT_MARGIN as f64;
        for (j, ratio) in row.bin_ratios.iter().enumerate() {
            let w = ratio * BAR_WIDTH as f64;
            if w <= 0.0 {
                continue;
            }
            let color = PALETTE[j % PALETTE.len()];
            let _ = writeln!(
                svg,
                "<rect x=\"{x:.2}\" y=\"{y}\" width=\"{w:.2}\" height=\"{BAR_HEIGHT}\" fill=\"{color}\"/>"
            );
            x += w;
        }
    }
    svg.push_str("</svg>\n");
    svg
}

/// `intent,support,delta_cls,level`; one row per concept in canonical
/// order. The level column is empty when the structure is absent or
/// truncated.
pub fn concepts_csv(
    ctx: &FormalContext,
    graph: &ConceptGraph,
    structure: Option<&ClosureStructure>,
) -> String {
    let mut out = String::from("intent,support,delta_cls,level\n");
    for id in 0..graph.len() as u32 {
        let c = graph.concept(id);
        let level = structure
            .and_then(|s| s.level_of(id))
            .map(|l| l.to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{}",
            csv_escape(&ctx.format_itemset(&c.intent)),
            c.support,
            graph.delta_cls(id),
            level
        );
    }
    out
}

/// `concept_id,intent,support,level,passkey_count,sample_passkey`.
pub fn levels_csv(
    ctx: &FormalContext,
    graph: &ConceptGraph,
    structure: &ClosureStructure,
) -> String {
    let mut out = String::from("concept_id,intent,support,level,passkey_count,sample_passkey\n");
    for id in 0..graph.len() as u32 {
        let c = graph.concept(id);
        let level = structure
            .level_of(id)
            .map(|l| l.to_string())
            .unwrap_or_default();
        let sample = structure
            .passkeys_of(id)
            .first()
            .map(|p| ctx.format_itemset(p))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            id,
            csv_escape(&ctx.format_itemset(&c.intent)),
            c.support,
            level,
            structure.passkey_count(id),
            csv_escape(&sample)
        );
    }
    out
}

#[derive(Serialize)]
struct DeltaJsonConcept {
    id: u32,
    intent: String,
    support: u32,
    level: Option<u32>,
    delta_cls: u32,
    delta_pk: u32,
    /// `null` for the bottom concept, which never merges.
    merge_threshold: Option<u32>,
}

/// Per-concept delta annotation as pretty JSON.
pub fn delta_json(
    ctx: &FormalContext,
    graph: &ConceptGraph,
    structure: &ClosureStructure,
    annotation: &DeltaAnnotation,
) -> String {
    let concepts: Vec<DeltaJsonConcept> = (0..graph.len() as u32)
        .map(|id| DeltaJsonConcept {
            id,
            intent: ctx.format_itemset(&graph.concept(id).intent),
            support: graph.concept(id).support,
            level: structure.level_of(id),
            delta_cls: annotation.delta_cls(id),
            delta_pk: annotation.delta_pk(id),
            merge_threshold: annotation.merge_threshold(id),
        })
        .collect();
    let doc = serde_json::json!({ "concepts": concepts });
    let mut text = serde_json::to_string_pretty(&doc).expect("delta json");
    text.push('\n');
    text
}

/// `level,level_ratio,bin_1..bin_k` with nine-decimal ratios.
pub fn distribution_csv(dist: &LevelDistribution) -> String {
    let mut out = String::from("level,level_ratio");
    for i in 1..=dist.bins.len() {
        let _ = write!(out, ",bin_{i}");
    }
    out.push('\n');
    for row in &dist.rows {
        let _ = write!(out, "{},{:.9}", row.level, row.level_ratio);
        for r in &row.bin_ratios {
            let _ = write!(out, ",{r:.9}");
        }
        out.push('\n');
    }
    out
}

/// One survival row per (fraction, delta bucket).
pub fn survival_csv(rows: &[SurvivalRow]) -> String {
    let mut out = String::from(
        "keep_fraction,group_by,group_value,concepts,trials,closed_tested,closed_survived,closed_rate,passkey_tested,passkey_survived,passkey_skipped,passkey_rate\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:.4},{},{},{},{},{},{},{:.6},{},{},{},{:.6}",
            r.keep_fraction,
            r.group_by,
            r.group_value,
            r.concepts,
            r.trials,
            r.closed_tested,
            r.closed_survived,
            r.closed_rate(),
            r.passkey_tested,
            r.passkey_survived,
            r.passkey_skipped,
            r.passkey_rate()
        );
    }
    out
}

/// Stability entries and survival rows bundled as pretty JSON.
pub fn stability_json(entries: &[StabilityEntry], survival: &[SurvivalRow]) -> String {
    let doc = serde_json::json!({
        "removal_bounds": entries,
        "survival": survival,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("stability json");
    text.push('\n');
    text
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestFile {
    pub name: String,
    pub rows: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub files: Vec<ManifestFile>,
    /// Bin edges of the distribution, `(lo, hi]` pairs.
    pub bins: Vec<(u32, u32)>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    hex
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, content).map_err(|source| Error::Io { path, source })
}

/// Writes `concepts.csv`, `levels.csv`, `delta.json`, `distribution.csv`,
/// `distribution.svg` and `manifest.json` into `dir`, returning the
/// manifest. Identical inputs reproduce identical bytes and hashes.
pub fn export_results(
    ctx: &FormalContext,
    graph: &ConceptGraph,
    structure: &ClosureStructure,
    annotation: &DeltaAnnotation,
    dist: &LevelDistribution,
    dir: &Path,
) -> Result<Manifest> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let files = [
        ("concepts.csv", concepts_csv(ctx, graph, Some(structure)), graph.len()),
        ("levels.csv", levels_csv(ctx, graph, structure), graph.len()),
        (
            "delta.json",
            delta_json(ctx, graph, structure, annotation),
            graph.len(),
        ),
        ("distribution.csv", distribution_csv(dist), dist.rows.len()),
        (
            "distribution.svg",
            render_distribution_svg(dist),
            dist.rows.len(),
        ),
    ];
    let mut manifest = Manifest {
        files: Vec::new(),
        bins: dist.bins.clone(),
    };
    for (name, content, rows) in &files {
        write_file(dir, name, content)?;
        manifest.files.push(ManifestFile {
            name: (*name).to_string(),
            rows: *rows,
            sha256: sha256_hex(content.as_bytes()),
        });
    }
    let mut manifest_text =
        serde_json::to_string_pretty(&manifest).expect("manifest json");
    manifest_text.push('\n');
    write_file(dir, "manifest.json", &manifest_text)?;
    Ok(manifest)
}
