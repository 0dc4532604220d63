//! Cross-linguistic inventory database: parsing, indexing, and queries.
//!
//! A [`TypologyDatabase`] is built once from a PHOIBLE-style delimited file
//! and is immutable afterwards, so lookups are safe to share across threads.
//! Segments are keyed by canonically normalized glyph (NFD) and carry ternary
//! distinctive-feature vectors aligned to one [`FeatureSystem`] per database.

mod parse;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::num::Real;

pub use parse::{parse_phoible, ColumnMap, ConflictMode, ContourPolicy, ParseOptions};

/// Canonical glyph normalization (NFD) applied on ingest and on every lookup.
pub fn normalize_glyph(raw: &str) -> String {
    raw.trim().nfd().collect()
}

/// One ternary distinctive-feature value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ternary {
    Plus,
    Minus,
    Unspecified,
}

impl Ternary {
    pub fn symbol(self) -> &'static str {
        match self {
            Ternary::Plus => "+",
            Ternary::Minus => "-",
            Ternary::Unspecified => "0",
        }
    }

    pub fn from_symbol(sym: &str) -> Option<Self> {
        match sym {
            "+" => Some(Ternary::Plus),
            "-" => Some(Ternary::Minus),
            "0" => Some(Ternary::Unspecified),
            _ => None,
        }
    }

    pub fn is_specified(self) -> bool {
        self != Ternary::Unspecified
    }
}

impl fmt::Display for Ternary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// A feature value together with the original database token, which is kept
/// verbatim so contour tokens such as `+,-` survive re-serialization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TernaryValue {
    pub value: Ternary,
    pub raw_token: String,
}

impl TernaryValue {
    pub fn new(value: Ternary) -> Self {
        TernaryValue {
            value,
            raw_token: value.symbol().to_string(),
        }
    }

    /// Whether the original token was a contour (e.g. `+,-`).
    pub fn is_contour(&self) -> bool {
        self.raw_token.contains(',')
    }
}

impl From<Ternary> for TernaryValue {
    fn from(value: Ternary) -> Self {
        TernaryValue::new(value)
    }
}

/// The ordered set of feature names a database is defined over.
#[derive(Debug, Clone)]
pub struct FeatureSystem {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

impl FeatureSystem {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Config("feature system has no features".into()));
        }
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::Config("empty feature name".into()));
            }
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate feature name `{name}`")));
            }
        }
        Ok(FeatureSystem { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }
}

impl PartialEq for FeatureSystem {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}
impl Eq for FeatureSystem {}

/// A segment's feature bundle, aligned to the owning [`FeatureSystem`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<TernaryValue>,
}

impl FeatureVector {
    pub fn new(values: Vec<TernaryValue>) -> Self {
        FeatureVector { values }
    }

    pub fn from_ternary(values: &[Ternary]) -> Self {
        FeatureVector {
            values: values.iter().copied().map(TernaryValue::new).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, idx: usize) -> Ternary {
        self.values[idx].value
    }

    /// Effective values as `+`/`-`/`0` symbols, for error messages.
    pub fn symbols(&self) -> String {
        self.values
            .iter()
            .map(|v| v.value.symbol())
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Broad segment class from the database's SegmentClass column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SegmentClass {
    Consonant,
    Vowel,
    Tone,
    Unknown,
}

impl SegmentClass {
    pub fn parse(token: &str) -> Self {
        match token.trim().to_ascii_lowercase().as_str() {
            "consonant" => SegmentClass::Consonant,
            "vowel" => SegmentClass::Vowel,
            "tone" => SegmentClass::Tone,
            _ => SegmentClass::Unknown,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SegmentClass::Consonant => "consonant",
            SegmentClass::Vowel => "vowel",
            SegmentClass::Tone => "tone",
            SegmentClass::Unknown => "unknown",
        }
    }
}

/// A phoneme/segment: normalized glyph, class, and feature bundle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub glyph: String,
    pub class: SegmentClass,
    pub features: FeatureVector,
}

/// Inventory identifier as it appears in the database (e.g. `1675`).
///
/// Ordering is numeric-aware so `380 < 1675` even though the ids are strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InventoryId(pub String);

impl InventoryId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for InventoryId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for InventoryId {
    fn from(s: &str) -> Self {
        InventoryId(s.to_string())
    }
}

impl Ord for InventoryId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.0.parse::<u64>(), other.0.parse::<u64>()) {
            (Ok(a), Ok(b)) => a.cmp(&b).then_with(|| self.0.cmp(&other.0)),
            (Ok(_), Err(_)) => Ordering::Less,
            (Err(_), Ok(_)) => Ordering::Greater,
            (Err(_), Err(_)) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for InventoryId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One source's phoneme inventory for one language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inventory {
    pub id: InventoryId,
    pub language_name: String,
    pub iso639_3: String,
    pub glottocode: String,
    pub source: String,
    pub family: String,
    /// Normalized glyphs, unique and sorted.
    pub glyphs: BTreeSet<String>,
    /// Per-inventory feature vectors that differ from the database-global
    /// segment table (populated only in `ConflictMode::PerInventory`).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<String, FeatureVector>,
}

impl Inventory {
    /// A minimal inventory for programmatic use (induction output, tests).
    pub fn synthetic(id: &str, glyphs: impl IntoIterator<Item = String>) -> Self {
        Inventory {
            id: InventoryId(id.to_string()),
            language_name: String::new(),
            iso639_3: String::new(),
            glottocode: String::new(),
            source: String::new(),
            family: String::new(),
            glyphs: glyphs.into_iter().collect(),
            overrides: BTreeMap::new(),
        }
    }

    /// Human-facing label, `SOURCE ID` when a source is recorded (`GM 1675`).
    pub fn label(&self) -> String {
        if self.source.is_empty() {
            self.id.0.clone()
        } else {
            format!("{} {}", self.source.to_uppercase(), self.id)
        }
    }

    pub fn len(&self) -> usize {
        self.glyphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.glyphs.is_empty()
    }

    pub fn contains(&self, glyph: &str) -> bool {
        self.glyphs.contains(glyph)
    }

    /// Family used for realization grouping: the recorded family when
    /// present, otherwise the language name stands in for it.
    pub fn family_or_language(&self) -> &str {
        if self.family.is_empty() {
            &self.language_name
        } else {
            &self.family
        }
    }
}

/// Ingest statistics reported alongside a parsed database.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseSummary {
    pub rows: usize,
    pub inventories: usize,
    pub languages: usize,
    pub segments: usize,
    pub features: usize,
    pub contour_tokens: usize,
    pub duplicate_rows: usize,
    pub per_inventory_conflicts: usize,
}

/// Immutable, indexed view of a parsed inventory database.
#[derive(Debug, Clone)]
pub struct TypologyDatabase {
    feature_system: FeatureSystem,
    segments: BTreeMap<String, Segment>,
    inventories: BTreeMap<InventoryId, Inventory>,
    by_language: BTreeMap<String, Vec<InventoryId>>,
    by_code: BTreeMap<String, Vec<InventoryId>>,
    attestation: BTreeMap<String, usize>,
    summary: ParseSummary,
}

impl TypologyDatabase {
    pub(crate) fn assemble(
        feature_system: FeatureSystem,
        segments: BTreeMap<String, Segment>,
        inventories: BTreeMap<InventoryId, Inventory>,
        mut summary: ParseSummary,
    ) -> Self {
        let mut by_language: BTreeMap<String, Vec<InventoryId>> = BTreeMap::new();
        let mut by_code: BTreeMap<String, Vec<InventoryId>> = BTreeMap::new();
        let mut attestation: BTreeMap<String, usize> = BTreeMap::new();
        for (id, inv) in &inventories {
            by_language
                .entry(inv.language_name.to_lowercase())
                .or_default()
                .push(id.clone());
            if !inv.iso639_3.is_empty() {
                by_code
                    .entry(inv.iso639_3.to_lowercase())
                    .or_default()
                    .push(id.clone());
            }
            for glyph in &inv.glyphs {
                *attestation.entry(glyph.clone()).or_insert(0) += 1;
            }
        }
        summary.inventories = inventories.len();
        summary.languages = by_language.len();
        summary.segments = segments.len();
        summary.features = feature_system.len();
        TypologyDatabase {
            feature_system,
            segments,
            inventories,
            by_language,
            by_code,
            attestation,
            summary,
        }
    }

    pub fn feature_system(&self) -> &FeatureSystem {
        &self.feature_system
    }

    pub fn segments(&self) -> &BTreeMap<String, Segment> {
        &self.segments
    }

    pub fn inventories(&self) -> &BTreeMap<InventoryId, Inventory> {
        &self.inventories
    }

    pub fn summary(&self) -> &ParseSummary {
        &self.summary
    }

    pub fn attestation_counts(&self) -> &BTreeMap<String, usize> {
        &self.attestation
    }

    /// Number of inventories containing `glyph` (normalized before lookup).
    pub fn attestation(&self, glyph: &str) -> usize {
        self.attestation
            .get(&normalize_glyph(glyph))
            .copied()
            .unwrap_or(0)
    }

    /// Look up a segment by glyph; the glyph is normalized first.
    pub fn segment(&self, glyph: &str) -> Result<&Segment> {
        let key = normalize_glyph(glyph);
        self.segments
            .get(&key)
            .ok_or(Error::UnknownGlyph(key))
    }

    /// The database-global feature vector for a glyph.
    pub fn feature_vector(&self, glyph: &str) -> Result<&FeatureVector> {
        self.segment(glyph).map(|s| &s.features)
    }

    /// The feature vector of `glyph` as seen by `inventory`, honoring
    /// per-inventory overrides.
    pub fn vector_in<'a>(&'a self, inventory: &'a Inventory, glyph: &str) -> Result<&'a FeatureVector> {
        let key = normalize_glyph(glyph);
        if let Some(v) = inventory.overrides.get(&key) {
            return Ok(v);
        }
        self.feature_vector(&key)
    }

    /// Inventory segments with per-inventory overrides applied.
    pub fn resolved_segments(&self, inventory: &Inventory) -> Result<Vec<Segment>> {
        inventory
            .glyphs
            .iter()
            .map(|g| {
                let mut seg = self.segment(g)?.clone();
                if let Some(v) = inventory.overrides.get(g) {
                    seg.features = v.clone();
                }
                Ok(seg)
            })
            .collect()
    }

    /// All segments whose vector matches every constraint exactly
    /// (unspecified matches only unspecified), sorted by glyph.
    pub fn segments_matching(&self, constraints: &[(String, Ternary)]) -> Result<Vec<&Segment>> {
        let resolved: Vec<(usize, Ternary)> = constraints
            .iter()
            .map(|(name, value)| {
                self.feature_system
                    .position(name)
                    .map(|idx| (idx, *value))
                    .ok_or_else(|| Error::UnknownFeature(name.clone()))
            })
            .collect::<Result<_>>()?;
        Ok(self
            .segments
            .values()
            .filter(|seg| resolved.iter().all(|&(idx, v)| seg.features.value(idx) == v))
            .collect())
    }

    /// All inventories whose language name or ISO 639-3 code matches the
    /// query (case-insensitive exact), ordered by inventory id.
    pub fn inventories_for_language(&self, query: &str) -> Vec<&Inventory> {
        let key = query.trim().to_lowercase();
        let mut ids: Vec<&InventoryId> = Vec::new();
        if let Some(by_name) = self.by_language.get(&key) {
            ids.extend(by_name);
        }
        if let Some(by_code) = self.by_code.get(&key) {
            for id in by_code {
                if !ids.contains(&id) {
                    ids.push(id);
                }
            }
        }
        ids.sort();
        ids.iter().map(|id| &self.inventories[id]).collect()
    }

    /// Look up one inventory by raw id (`1675`) or label (`GM 1675`,
    /// source part case-insensitive).
    pub fn inventory(&self, query: &str) -> Result<&Inventory> {
        let q = query.trim();
        if let Some(inv) = self.inventories.get(&InventoryId(q.to_string())) {
            return Ok(inv);
        }
        if let Some((source, id)) = q.rsplit_once(' ') {
            if let Some(inv) = self.inventories.get(&InventoryId(id.to_string())) {
                if inv.source.eq_ignore_ascii_case(source.trim()) {
                    return Ok(inv);
                }
            }
        }
        Err(Error::UnknownInventory(q.to_string()))
    }

    /// Distinct language names, sorted.
    pub fn languages(&self) -> Vec<&str> {
        let names: BTreeSet<&str> = self
            .inventories
            .values()
            .map(|inv| inv.language_name.as_str())
            .collect();
        names.into_iter().collect()
    }

    /// A pseudo-inventory holding the union of all of a language's
    /// inventories, usable as a similarity anchor.
    pub fn language_union_inventory(&self, language: &str) -> Result<Inventory> {
        let invs = self.inventories_for_language(language);
        if invs.is_empty() {
            return Err(Error::UnknownLanguage(language.to_string()));
        }
        let mut union = Inventory::synthetic(
            &format!("union:{language}"),
            invs.iter().flat_map(|inv| inv.glyphs.iter().cloned()),
        );
        union.language_name = invs[0].language_name.clone();
        union.iso639_3 = invs[0].iso639_3.clone();
        union.family = invs[0].family.clone();
        Ok(union)
    }

    /// Canonical delimited re-serialization; parsing it back with the same
    /// options yields an equal database.
    pub fn to_canonical_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new().from_writer(Vec::new());
        let with_family = self.inventories.values().any(|inv| !inv.family.is_empty());
        let mut header = vec![
            "InventoryID".to_string(),
            "LanguageName".to_string(),
            "ISO6393".to_string(),
            "Glottocode".to_string(),
            "Source".to_string(),
        ];
        if with_family {
            header.push("Family".to_string());
        }
        header.push("Phoneme".to_string());
        header.push("SegmentClass".to_string());
        header.extend(self.feature_system.names().iter().cloned());
        writer.write_record(&header).expect("write to vec");
        for inv in self.inventories.values() {
            for glyph in &inv.glyphs {
                let seg = &self.segments[glyph];
                let features = inv.overrides.get(glyph).unwrap_or(&seg.features);
                let mut record = vec![
                    inv.id.0.clone(),
                    inv.language_name.clone(),
                    inv.iso639_3.clone(),
                    inv.glottocode.clone(),
                    inv.source.clone(),
                ];
                if with_family {
                    record.push(inv.family.clone());
                }
                record.push(glyph.clone());
                record.push(seg.class.as_str().to_string());
                record.extend(features.values.iter().map(|v| v.raw_token.clone()));
                writer.write_record(&record).expect("write to vec");
            }
        }
        String::from_utf8(writer.into_inner().expect("flush csv")).expect("canonical csv is utf-8")
    }

    /// Structural equality on content (summary row counts excluded, since a
    /// deduplicated re-parse legitimately sees fewer raw rows).
    pub fn content_eq(&self, other: &TypologyDatabase) -> bool {
        self.feature_system == other.feature_system
            && self.segments == other.segments
            && self.inventories == other.inventories
            && self.attestation == other.attestation
    }

    /// Serialize to the versioned snapshot format for fast reload.
    pub fn to_snapshot_json(&self) -> String {
        let snapshot = Snapshot {
            snapshot_version: SNAPSHOT_VERSION.to_string(),
            feature_names: self.feature_system.names.clone(),
            segments: self.segments.values().cloned().collect(),
            inventories: self.inventories.values().cloned().collect(),
            summary: self.summary.clone(),
        };
        serde_json::to_string_pretty(&snapshot).expect("snapshot serializes")
    }

    /// Load a snapshot written by [`TypologyDatabase::to_snapshot_json`].
    /// Derived indexes are rebuilt and invariants revalidated; a snapshot
    /// from a different tool version is rejected.
    pub fn from_snapshot_json(text: &str) -> Result<Self> {
        let snapshot: Snapshot = serde_json::from_str(text)?;
        if snapshot.snapshot_version != SNAPSHOT_VERSION {
            return Err(Error::SnapshotVersion {
                found: snapshot.snapshot_version,
                expected: SNAPSHOT_VERSION.to_string(),
            });
        }
        let feature_system = FeatureSystem::new(snapshot.feature_names)?;
        let mut segments = BTreeMap::new();
        for segment in snapshot.segments {
            if segment.features.len() != feature_system.len() {
                return Err(Error::DimensionMismatch {
                    left: segment.features.len(),
                    right: feature_system.len(),
                });
            }
            segments.insert(segment.glyph.clone(), segment);
        }
        let mut inventories = BTreeMap::new();
        for inventory in snapshot.inventories {
            for glyph in &inventory.glyphs {
                if !segments.contains_key(glyph) {
                    return Err(Error::UnknownGlyph(glyph.clone()));
                }
            }
            if inventory.is_empty() {
                return Err(Error::EmptyInventory(inventory.id.to_string()));
            }
            inventories.insert(inventory.id.clone(), inventory);
        }
        if inventories.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(TypologyDatabase::assemble(
            feature_system,
            segments,
            inventories,
            snapshot.summary,
        ))
    }
}

/// Bumped whenever the snapshot layout changes; older snapshots are
/// rejected and must be re-imported.
pub const SNAPSHOT_VERSION: &str = "1";

#[derive(Serialize, Deserialize)]
struct Snapshot {
    snapshot_version: String,
    feature_names: Vec<String>,
    segments: Vec<Segment>,
    inventories: Vec<Inventory>,
    summary: ParseSummary,
}

/// How unspecified values participate in feature distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistancePolicy {
    /// Disagreements counted only where both vectors are specified.
    SpecifiedOnly,
    /// (specified, unspecified) pairs count as half a disagreement;
    /// the denominator is the number of features specified in at least one.
    PenalizeMismatchToUnspecified,
}

/// Normalized feature disagreement between two vectors, in `[0, 1]`.
pub fn feature_distance<F: Real>(
    a: &FeatureVector,
    b: &FeatureVector,
    policy: DistancePolicy,
) -> Result<F> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    // Disagreements counted in half-units so everything stays integral.
    let mut half_units = 0usize;
    let mut denominator = 0usize;
    for (va, vb) in a.values.iter().zip(&b.values) {
        let (sa, sb) = (va.value.is_specified(), vb.value.is_specified());
        match policy {
            DistancePolicy::SpecifiedOnly => {
                if sa && sb {
                    denominator += 1;
                    if va.value != vb.value {
                        half_units += 2;
                    }
                }
            }
            DistancePolicy::PenalizeMismatchToUnspecified => {
                if sa || sb {
                    denominator += 1;
                    if sa && sb {
                        if va.value != vb.value {
                            half_units += 2;
                        }
                    } else {
                        half_units += 1;
                    }
                }
            }
        }
    }
    if denominator == 0 {
        return Ok(F::zero());
    }
    Ok(F::from_usize_lossy(half_units) / F::from_usize_lossy(2 * denominator))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(symbols: &[&str]) -> FeatureVector {
        FeatureVector::new(
            symbols
                .iter()
                .map(|s| TernaryValue {
                    value: Ternary::from_symbol(s).unwrap(),
                    raw_token: (*s).to_string(),
                })
                .collect(),
        )
    }

    #[test]
    fn normalization_is_idempotent() {
        for raw in ["a", "t̪", "ʈ", "ɖʱ", "õ", "k͡p"] {
            let once = normalize_glyph(raw);
            assert_eq!(once, normalize_glyph(&once));
        }
    }

    #[test]
    fn inventory_id_orders_numerically() {
        let mut ids: Vec<InventoryId> = ["1675", "380", "176"]
            .iter()
            .map(|s| InventoryId(s.to_string()))
            .collect();
        ids.sort();
        let sorted: Vec<&str> = ids.iter().map(|i| i.as_str()).collect();
        assert_eq!(sorted, vec!["176", "380", "1675"]);
    }

    #[test]
    fn distance_specified_only_hand_count() {
        // a = (+,+,0), b = (+,-,0): 1 disagreement over 2 co-specified.
        let a = fv(&["+", "+", "0"]);
        let b = fv(&["+", "-", "0"]);
        let d: f64 = feature_distance(&a, &b, DistancePolicy::SpecifiedOnly).unwrap();
        assert_eq!(d, 0.5);
    }

    #[test]
    fn distance_zero_when_no_cospecified() {
        let a = fv(&["+", "0"]);
        let b = fv(&["0", "-"]);
        let d: f64 = feature_distance(&a, &b, DistancePolicy::SpecifiedOnly).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn distance_penalize_unspecified() {
        // (+,0) vs (0,-): two half-disagreements over two features specified
        // in at least one vector.
        let a = fv(&["+", "0"]);
        let b = fv(&["0", "-"]);
        let d: f64 =
            feature_distance(&a, &b, DistancePolicy::PenalizeMismatchToUnspecified).unwrap();
        assert_eq!(d, 0.5);
    }

    #[test]
    fn distance_dimension_mismatch() {
        let a = fv(&["+"]);
        let b = fv(&["+", "-"]);
        let err = feature_distance::<f64>(&a, &b, DistancePolicy::SpecifiedOnly).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { left: 1, right: 2 }));
    }

    #[test]
    fn inventory_label() {
        let mut inv = Inventory::synthetic("1675", vec!["p".to_string()]);
        inv.source = "gm".to_string();
        assert_eq!(inv.label(), "GM 1675");
    }
}
