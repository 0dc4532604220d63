//! Brute-force oracles for the test suites.
//!
//! Everything here recomputes results by enumeration or numeric
//! differentiation, independently of the algorithms under test: the decoder
//! oracle enumerates every labeling instead of running dynamic programming,
//! the subset oracle scores every subset instead of selecting greedily, the
//! gradient oracle uses central finite differences, and the CSV recount
//! walks the raw bytes with its own minimal RFC 4180 state machine.

use std::collections::{BTreeMap, BTreeSet};

use phonotype::contrast::Instance;
use phonotype::induction::{score_inventory, InductionParams};
use phonotype::num::Real;
use phonotype::stream::{DecodeParams, FeatureStream, SegmentLattice};
use phonotype::typology::Inventory;
use phonotype::typology::TypologyDatabase;
use phonotype::Result;
use unicode_normalization::UnicodeNormalization;

/// Best labeling found by exhaustive enumeration: `(total score, per-frame
/// candidate indices)`. Labelings are drawn from each frame's arcs and must
/// satisfy `min_duration` for every run, including the first and last.
/// Returns `None` when no labeling is feasible.
pub fn decode_exhaustive<F: Real>(
    lattice: &SegmentLattice<F>,
    params: &DecodeParams<F>,
) -> Option<(F, Vec<usize>)> {
    let n_frames = lattice.len();
    if n_frames == 0 {
        return None;
    }
    let frames: Vec<Vec<(usize, F)>> = lattice
        .frames()
        .iter()
        .map(|arcs| {
            let mut row: Vec<(usize, F)> = arcs.iter().map(|a| (a.candidate, a.score)).collect();
            row.sort_by_key(|&(candidate, _)| candidate);
            row
        })
        .collect();
    if frames.iter().any(|row| row.is_empty()) {
        return None;
    }

    struct Search<'a, F> {
        frames: &'a [Vec<(usize, F)>],
        min_duration: usize,
        switch_penalty: F,
        best: Option<(F, Vec<usize>)>,
        labels: Vec<usize>,
    }

    impl<F: Real> Search<'_, F> {
        fn run(&mut self, t: usize, score: F, current: usize, run_length: usize) {
            if t == self.frames.len() {
                if run_length < self.min_duration {
                    return;
                }
                if self.best.as_ref().is_none_or(|(b, _)| score > *b) {
                    self.best = Some((score, self.labels.clone()));
                }
                return;
            }
            for &(candidate, arc_score) in &self.frames[t] {
                let (next_score, next_run) = if candidate == current {
                    (score + arc_score, run_length + 1)
                } else {
                    if run_length < self.min_duration {
                        continue;
                    }
                    (score + arc_score - self.switch_penalty, 1)
                };
                self.labels.push(candidate);
                self.run(t + 1, next_score, candidate, next_run);
                self.labels.pop();
            }
        }
    }

    let mut search = Search {
        frames: &frames,
        min_duration: params.min_duration,
        switch_penalty: params.switch_penalty,
        best: None,
        labels: Vec::with_capacity(n_frames),
    };
    // Seed the recursion: the first frame starts a run of length 1.
    for &(candidate, arc_score) in &frames[0] {
        search.labels.push(candidate);
        search.run(1, arc_score, candidate, 1);
        search.labels.pop();
    }
    search.best
}

/// Best non-empty subset of the pool by penalized score, found by scoring
/// every subset: `(penalized score, glyphs)`. Ties prefer smaller subsets,
/// then lexicographic glyph order, so the result is deterministic.
pub fn best_subset_exhaustive<F: Real>(
    db: &TypologyDatabase,
    streams: &[FeatureStream<F>],
    pool: &BTreeSet<String>,
    params: &InductionParams<F>,
) -> Result<(F, BTreeSet<String>)> {
    assert!(
        pool.len() <= 16,
        "exhaustive subset search is for small pools"
    );
    let glyphs: Vec<&String> = pool.iter().collect();
    let mut best: Option<(F, BTreeSet<String>)> = None;
    for mask in 1u32..(1 << glyphs.len()) {
        let subset: BTreeSet<String> = glyphs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, g)| (*g).clone())
            .collect();
        let inventory = Inventory::synthetic("subset", subset.iter().cloned());
        let score = score_inventory(db, streams, &inventory, params)?.penalized;
        let better = match &best {
            None => true,
            Some((best_score, best_subset)) => {
                score > *best_score
                    || (score == *best_score
                        && (subset.len() < best_subset.len()
                            || (subset.len() == best_subset.len() && subset < *best_subset)))
            }
        };
        if better {
            best = Some((score, subset));
        }
    }
    Ok(best.expect("pool is non-empty"))
}

/// Central finite differences of the logistic loss at `(weights, bias)`.
pub fn finite_difference_gradient<F: Real>(
    data: &[Instance<F>],
    weights: &[F],
    bias: F,
    l2: F,
    h: F,
) -> (Vec<F>, F) {
    let loss = |w: &[F], b: F| phonotype::contrast::logistic_loss(data, w, b, l2);
    let two_h = h + h;
    let grad_w = (0..weights.len())
        .map(|j| {
            let mut plus = weights.to_vec();
            let mut minus = weights.to_vec();
            plus[j] = plus[j] + h;
            minus[j] = minus[j] - h;
            (loss(&plus, bias) - loss(&minus, bias)) / two_h
        })
        .collect();
    let grad_b = (loss(weights, bias + h) - loss(weights, bias - h)) / two_h;
    (grad_w, grad_b)
}

/// Line-level recount of a PHOIBLE-style CSV, independent of the parser
/// under test: a minimal RFC 4180 reader plus distinct-value counting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvRecount {
    pub data_rows: usize,
    pub distinct_inventory_ids: usize,
    pub distinct_language_names: usize,
    /// Distinct NFD-normalized values of the glyph column.
    pub distinct_glyphs: usize,
    /// inventory id -> distinct glyph count.
    pub rows_per_inventory: BTreeMap<String, usize>,
    /// glyph -> number of distinct inventories containing it.
    pub attestation: BTreeMap<String, usize>,
}

/// Split one CSV record off the front of `text`. Returns the fields and the
/// remainder. Handles quoted fields, embedded delimiters, quotes, newlines.
fn read_record(text: &str, delimiter: char) -> Option<(Vec<String>, &str)> {
    if text.is_empty() {
        return None;
    }
    let mut fields = Vec::new();
    let mut field = String::new();
    let mut chars = text.char_indices().peekable();
    let mut in_quotes = false;
    loop {
        match chars.next() {
            None => {
                fields.push(field);
                return Some((fields, ""));
            }
            Some((i, c)) => {
                if in_quotes {
                    if c == '"' {
                        if let Some(&(_, '"')) = chars.peek() {
                            chars.next();
                            field.push('"');
                        } else {
                            in_quotes = false;
                        }
                    } else {
                        field.push(c);
                    }
                } else if c == '"' && field.is_empty() {
                    in_quotes = true;
                } else if c == delimiter {
                    fields.push(std::mem::take(&mut field));
                } else if c == '\n' {
                    fields.push(field);
                    return Some((fields, &text[i + 1..]));
                } else if c == '\r' {
                    // Swallow; the following \n terminates the record.
                } else {
                    field.push(c);
                }
            }
        }
    }
}

pub fn recount_csv(text: &str, delimiter: char) -> CsvRecount {
    let mut rest = text;
    let (header, after_header) =
        read_record(rest, delimiter).expect("csv has a header");
    rest = after_header;
    let position = |name: &str| {
        header
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').trim() == name)
            .unwrap_or_else(|| panic!("column {name} present"))
    };
    let idx_id = position("InventoryID");
    let idx_language = position("LanguageName");
    let idx_glyph = position("Phoneme");

    let mut data_rows = 0usize;
    let mut ids: BTreeSet<String> = BTreeSet::new();
    let mut languages: BTreeSet<String> = BTreeSet::new();
    let mut glyphs: BTreeSet<String> = BTreeSet::new();
    let mut per_inventory: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    while let Some((fields, remainder)) = read_record(rest, delimiter) {
        rest = remainder;
        if fields.len() == 1 && fields[0].is_empty() {
            continue;
        }
        data_rows += 1;
        let id = fields[idx_id].trim().to_string();
        let glyph: String = fields[idx_glyph].trim().nfd().collect();
        ids.insert(id.clone());
        languages.insert(fields[idx_language].trim().to_lowercase());
        glyphs.insert(glyph.clone());
        per_inventory.entry(id).or_default().insert(glyph);
    }
    let mut attestation: BTreeMap<String, usize> = BTreeMap::new();
    for set in per_inventory.values() {
        for glyph in set {
            *attestation.entry(glyph.clone()).or_insert(0) += 1;
        }
    }
    CsvRecount {
        data_rows,
        distinct_inventory_ids: ids.len(),
        distinct_language_names: languages.len(),
        distinct_glyphs: glyphs.len(),
        rows_per_inventory: per_inventory
            .into_iter()
            .map(|(id, set)| (id, set.len()))
            .collect(),
        attestation,
    }
}
