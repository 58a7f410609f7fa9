//! Binary contexts: loading, validation, and the two derivation operators.
//!
//! A context is a rectangular 0/1 incidence between objects (rows) and
//! attributes (columns), stored both row-wise and column-wise as bit
//! vectors so that either derivation direction is a straight run of word
//! intersections. A context is immutable once built and freely shareable
//! across threads.

use crate::bitset::{AttributeSet, ObjectSet};
use crate::error::{Error, Result};

/// How CSV cells encode incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsvMode {
    /// Cells are `0` / `1`.
    Binary,
    /// Cells are blank / `x` (also accepts `X` and `×`).
    Mark,
}

/// A binary dataset with object rows and attribute columns.
#[derive(Debug, Clone)]
pub struct FormalContext {
    object_names: Vec<String>,
    attribute_names: Vec<String>,
    rows: Vec<AttributeSet>,
    cols: Vec<ObjectSet>,
}

impl FormalContext {
    /// Builds a context from per-object attribute sets. Column bitsets are
    /// derived from the rows, so both encodings agree by construction.
    pub fn from_rows(
        object_names: Vec<String>,
        attribute_names: Vec<String>,
        rows: Vec<AttributeSet>,
    ) -> Self {
        assert_eq!(object_names.len(), rows.len());
        let n_attributes = attribute_names.len();
        let n_objects = rows.len();
        let mut cols = vec![ObjectSet::new(n_objects); n_attributes];
        for (g, row) in rows.iter().enumerate() {
            assert_eq!(row.dimension(), n_attributes);
            for m in row.iter() {
                cols[m].insert(g);
            }
        }
        FormalContext {
            object_names,
            attribute_names,
            rows,
            cols,
        }
    }

    /// Parses FIMI-style transaction data: one object per line, each line a
    /// whitespace-separated list of non-negative attribute ids. Blank lines
    /// are skipped; the attribute universe is `max id + 1`.
    pub fn parse_fimi(text: &str) -> Result<Self> {
        Self::parse_fimi_with_universe(text, 0)
    }

    /// Like [`parse_fimi`](Self::parse_fimi) but with a declared minimum
    /// attribute universe, for datasets whose trailing columns are empty.
    pub fn parse_fimi_with_universe(text: &str, min_attributes: usize) -> Result<Self> {
        let mut parsed: Vec<Vec<usize>> = Vec::new();
        let mut max_id: Option<usize> = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let mut ids = Vec::new();
            for tok in line.split_whitespace() {
                let id: usize = tok.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    msg: format!("invalid attribute id {tok:?}"),
                })?;
                max_id = Some(max_id.map_or(id, |m: usize| m.max(id)));
                ids.push(id);
            }
            parsed.push(ids);
        }
        let n_attributes = max_id.map_or(0, |m| m + 1).max(min_attributes);
        let rows: Vec<AttributeSet> = parsed
            .iter()
            .map(|ids| AttributeSet::from_indices(n_attributes, ids.iter().copied()))
            .collect();
        let object_names = (1..=rows.len()).map(|i| format!("g{i}")).collect();
        let attribute_names = (0..n_attributes).map(|m| m.to_string()).collect();
        Ok(Self::from_rows(object_names, attribute_names, rows))
    }

    /// Parses a rectangular CSV incidence table. With `has_header`, the first
    /// row names the attributes; otherwise they are `m0..m{k-1}`.
    pub fn parse_csv(text: &str, has_header: bool, mode: CsvMode) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .peekable();

        let mut attribute_names: Option<Vec<String>> = None;
        if has_header {
            if let Some((_, header)) = lines.next() {
                attribute_names =
                    Some(header.split(',').map(|c| c.trim().to_string()).collect());
            }
        }

        let mut rows: Vec<AttributeSet> = Vec::new();
        let mut width: Option<usize> = attribute_names.as_ref().map(|h| h.len());
        let mut parsed: Vec<Vec<bool>> = Vec::new();
        for (lineno, line) in lines {
            let cells: Vec<&str> = line.split(',').collect();
            match width {
                None => width = Some(cells.len()),
                Some(w) if w != cells.len() => {
                    return Err(Error::Csv {
                        row: lineno + 1,
                        col: cells.len(),
                        msg: format!("ragged row: expected {w} cells, found {}", cells.len()),
                    })
                }
                _ => {}
            }
            let mut row = Vec::with_capacity(cells.len());
            for (c, cell) in cells.iter().enumerate() {
                let cell = cell.trim();
                let bit = match mode {
                    CsvMode::Binary => match cell {
                        "0" => false,
                        "1" => true,
                        other => {
                            return Err(Error::Csv {
                                row: lineno + 1,
                                col: c + 1,
                                msg: format!("non-binary cell {other:?}"),
                            })
                        }
                    },
                    CsvMode::Mark => match cell {
                        "" => false,
                        "x" | "X" | "×" => true,
                        other => {
                            return Err(Error::Csv {
                                row: lineno + 1,
                                col: c + 1,
                                msg: format!("expected blank or x, found {other:?}"),
                            })
                        }
                    },
                };
                row.push(bit);
            }
            parsed.push(row);
        }

        let n_attributes = width.unwrap_or(0);
        for marks in &parsed {
            rows.push(AttributeSet::from_indices(
                n_attributes,
                marks
                    .iter()
                    .enumerate()
                    .filter_map(|(m, &b)| b.then_some(m)),
            ));
        }
        let attribute_names = attribute_names
            .unwrap_or_else(|| (0..n_attributes).map(|m| format!("m{m}")).collect());
        let object_names = (1..=rows.len()).map(|i| format!("g{i}")).collect();
        Ok(Self::from_rows(object_names, attribute_names, rows))
    }

    #[inline]
    pub fn n_objects(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn n_attributes(&self) -> usize {
        self.cols.len()
    }

    #[inline]
    pub fn row(&self, g: usize) -> &AttributeSet {
        &self.rows[g]
    }

    #[inline]
    pub fn col(&self, m: usize) -> &ObjectSet {
        &self.cols[m]
    }

    pub fn object_names(&self) -> &[String] {
        &self.object_names
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    /// The prime operator on itemsets: objects having every attribute of `b`.
    /// The empty itemset derives to all objects.
    pub fn derive_objects(&self, b: &AttributeSet) -> ObjectSet {
        assert_eq!(b.dimension(), self.n_attributes(), "itemset dimension");
        let mut extent = ObjectSet::full(self.n_objects());
        for m in b.iter() {
            extent.intersect_with(&self.cols[m]);
        }
        extent
    }

    /// The prime operator on object sets: attributes common to every object
    /// of `a`. The empty object set derives to all attributes.
    pub fn derive_attributes(&self, a: &ObjectSet) -> AttributeSet {
        assert_eq!(a.dimension(), self.n_objects(), "object set dimension");
        let mut intent = AttributeSet::full(self.n_attributes());
        for g in a.iter() {
            intent.intersect_with(&self.rows[g]);
        }
        intent
    }

    /// Standard closure `B''`.
    pub fn closure1(&self, b: &AttributeSet) -> AttributeSet {
        self.derive_attributes(&self.derive_objects(b))
    }

    /// Restriction to the given objects; the attribute universe and the row
    /// order are preserved.
    pub fn sample_objects(&self, keep: &ObjectSet) -> FormalContext {
        assert_eq!(keep.dimension(), self.n_objects(), "keep set dimension");
        let mut rows = Vec::with_capacity(keep.count());
        let mut object_names = Vec::with_capacity(keep.count());
        for g in keep.iter() {
            rows.push(self.rows[g].clone());
            object_names.push(self.object_names[g].clone());
        }
        Self::from_rows(object_names, self.attribute_names.clone(), rows)
    }

    /// Attribute names of an itemset joined with `;`, for reports.
    pub fn format_itemset(&self, b: &AttributeSet) -> String {
        let mut out = String::new();
        for (k, m) in b.iter().enumerate() {
            if k > 0 {
                out.push(';');
            }
            out.push_str(&self.attribute_names[m]);
        }
        out
    }
}
