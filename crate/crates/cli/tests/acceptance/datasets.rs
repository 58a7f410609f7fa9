//! Benchmark dataset builders.
//!
//! `nursery` and `car_eval` are full factorial designs: every combination
//! of the attribute domains occurs exactly once, so the one-hot context is
//! reconstructible exactly (up to column order, which no count depends on).
//! `krk` rebuilds the king-rook-king endgame table with the classic
//! canonicalization; the reconstruction reproduces the published closed
//! itemset count exactly.

use delta_closure::{AttributeSet, FormalContext};

/// One-hot context over the full cartesian product of the given domains.
pub fn full_factorial(domains: &[usize]) -> FormalContext {
    let n_attributes: usize = domains.iter().sum();
    let mut offsets = Vec::with_capacity(domains.len());
    let mut acc = 0;
    for &d in domains {
        offsets.push(acc);
        acc += d;
    }
    let total: usize = domains.iter().product();
    let mut rows = Vec::with_capacity(total);
    let mut values = vec![0usize; domains.len()];
    loop {
        rows.push(AttributeSet::from_indices(
            n_attributes,
            values.iter().zip(&offsets).map(|(&v, &o)| o + v),
        ));
        // odometer increment
        let mut i = domains.len();
        loop {
            if i == 0 {
                let object_names = (1..=rows.len()).map(|g| format!("g{g}")).collect();
                let attribute_names = (0..n_attributes).map(|m| format!("m{m}")).collect();
                return FormalContext::from_rows(object_names, attribute_names, rows);
            }
            i -= 1;
            values[i] += 1;
            if values[i] < domains[i] {
                break;
            }
            values[i] = 0;
        }
    }
}

/// The nursery admission dataset: 8 categorical attributes with domains
/// 3, 5, 4, 4, 3, 2, 3, 3 (12960 objects, 27 one-hot attributes).
pub fn nursery() -> FormalContext {
    full_factorial(&[3, 5, 4, 4, 3, 2, 3, 3])
}

/// The car evaluation dataset: 6 attributes with domains 4, 4, 4, 3, 3, 3
/// (1728 objects, 21 one-hot attributes).
pub fn car_eval() -> FormalContext {
    full_factorial(&[4, 4, 4, 3, 3, 3])
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct Square {
    file: u8,
    rank: u8,
}

impl Square {
    fn adjacent(self, other: Square) -> bool {
        let df = (self.file as i8 - other.file as i8).abs();
        let dr = (self.rank as i8 - other.rank as i8).abs();
        df <= 1 && dr <= 1
    }

    fn below_diagonal(self) -> bool {
        self.rank <= self.file
    }

    fn on_diagonal(self) -> bool {
        self.rank == self.file
    }
}

/// King-rook-king endgame positions, black to move: the white king on the
/// ten triangle squares a1, b1, c1, d1, b2, c2, d2, c3, d3, d4; rook and
/// black king anywhere distinct with the kings not adjacent. When the
/// white king lies on the a1-h8 diagonal, the position is reflected across
/// that diagonal so the black king sits on or below it, with the rook
/// breaking the tie when the black king is on the diagonal too. 28056
/// positions, one-hot over white king file (a-d), white king rank (1-4),
/// rook file, rook rank, black king file, black king rank: 40 attributes.
pub fn krk() -> FormalContext {
    let mut triangle = Vec::new();
    for file in 0u8..4 {
        for rank in 0..=file {
            triangle.push(Square { file, rank });
        }
    }
    let all: Vec<Square> = (0u8..8)
        .flat_map(|file| (0u8..8).map(move |rank| Square { file, rank }))
        .collect();

    let mut rows = Vec::new();
    for &wk in &triangle {
        for &wr in &all {
            if wr == wk {
                continue;
            }
            for &bk in &all {
                if bk == wk || bk == wr || bk.adjacent(wk) {
                    continue;
                }
                if wk.on_diagonal() {
                    let canonical = if bk.on_diagonal() {
                        wr.below_diagonal()
                    } else {
                        bk.below_diagonal()
                    };
                    if !canonical {
                        continue;
                    }
                }
                rows.push((wk, wr, bk));
            }
        }
    }

    // columns: wk file (4), wk rank (4), wr file (8), wr rank (8),
    // bk file (8), bk rank (8)
    let n_attributes = 4 + 4 + 8 + 8 + 8 + 8;
    let sets = rows
        .iter()
        .map(|&(wk, wr, bk)| {
            AttributeSet::from_indices(
                n_attributes,
                [
                    wk.file as usize,
                    4 + wk.rank as usize,
                    8 + wr.file as usize,
                    16 + wr.rank as usize,
                    24 + bk.file as usize,
                    32 + bk.rank as usize,
                ],
            )
        })
        .collect::<Vec<_>>();
    let object_names = (1..=sets.len()).map(|g| format!("g{g}")).collect();
    let attribute_names = (0..n_attributes).map(|m| format!("m{m}")).collect();
    FormalContext::from_rows(object_names, attribute_names, sets)
}
