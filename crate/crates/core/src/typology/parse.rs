//! Delimited-text ingestion for PHOIBLE-style long-format releases.

use std::collections::BTreeMap;
use std::io::Read;

use crate::error::{Error, Result};

use super::{
    normalize_glyph, FeatureSystem, FeatureVector, Inventory, InventoryId, ParseSummary, Segment,
    SegmentClass, Ternary, TernaryValue, TypologyDatabase,
};

/// How contour tokens such as `+,-` map onto the ternary alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContourPolicy {
    /// Use the first component; the raw token is preserved either way.
    #[default]
    FirstComponent,
    /// Treat the whole token as unspecified.
    Unspecified,
}

/// What to do when one glyph carries different feature vectors in
/// different inventories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConflictMode {
    /// Fail the parse, reporting both vectors.
    #[default]
    Error,
    /// Keep the vector from the lowest-numbered inventory in the global
    /// segment table and scope the others to their inventories.
    PerInventory,
}

/// Maps logical roles to column names. Defaults match the public PHOIBLE
/// long-format release.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    pub inventory_id: String,
    pub language_name: String,
    pub iso639_3: String,
    pub glottocode: String,
    pub source: String,
    pub glyph: String,
    pub segment_class: String,
    /// Optional family column; used only when present in the header.
    pub family: String,
    /// Columns carried by the release that are neither metadata nor
    /// features (ingested as opaque text, i.e. skipped).
    pub ignore: Vec<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            inventory_id: "InventoryID".into(),
            language_name: "LanguageName".into(),
            iso639_3: "ISO6393".into(),
            glottocode: "Glottocode".into(),
            source: "Source".into(),
            glyph: "Phoneme".into(),
            segment_class: "SegmentClass".into(),
            family: "Family".into(),
            ignore: vec![
                "SpecificDialect".into(),
                "GlyphID".into(),
                "Allophones".into(),
                "Marginal".into(),
            ],
        }
    }
}

impl ColumnMap {
    /// Parse a `key=value` config (one pair per line, `#` comments).
    ///
    /// Keys: `inventory_id`, `language_name`, `iso639_3`, `glottocode`,
    /// `source`, `glyph`, `segment_class`, `family`, `ignore` (comma list).
    pub fn from_key_value(text: &str) -> Result<Self> {
        let mut map = ColumnMap::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key=value", lineno + 1))
            })?;
            let value = value.trim().to_string();
            match key.trim() {
                "inventory_id" => map.inventory_id = value,
                "language_name" => map.language_name = value,
                "iso639_3" => map.iso639_3 = value,
                "glottocode" => map.glottocode = value,
                "source" => map.source = value,
                "glyph" => map.glyph = value,
                "segment_class" => map.segment_class = value,
                "family" => map.family = value,
                "ignore" => {
                    map.ignore = value
                        .split(',')
                        .map(|s| s.trim().to_string())
                        .filter(|s| !s.is_empty())
                        .collect()
                }
                other => {
                    return Err(Error::Config(format!(
                        "line {}: unknown column-map key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(map)
    }
}

/// All knobs for [`parse_phoible`].
#[derive(Debug, Clone, Default)]
pub struct ParseOptions {
    pub delimiter: Option<u8>,
    pub column_map: ColumnMap,
    pub contour_policy: ContourPolicy,
    pub conflict_mode: ConflictMode,
}

fn parse_token(
    token: &str,
    feature: &str,
    row: usize,
    policy: ContourPolicy,
    contour_count: &mut usize,
) -> Result<TernaryValue> {
    let trimmed = token.trim();
    if let Some(value) = Ternary::from_symbol(trimmed) {
        return Ok(TernaryValue {
            value,
            raw_token: trimmed.to_string(),
        });
    }
    if trimmed.contains(',') {
        let components: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if !components.is_empty() && components.iter().all(|c| Ternary::from_symbol(c).is_some()) {
            *contour_count += 1;
            let value = match policy {
                ContourPolicy::FirstComponent => Ternary::from_symbol(components[0]).unwrap(),
                ContourPolicy::Unspecified => Ternary::Unspecified,
            };
            return Ok(TernaryValue {
                value,
                raw_token: trimmed.to_string(),
            });
        }
    }
    Err(Error::InvalidFeatureToken {
        token: trimmed.to_string(),
        feature: feature.to_string(),
        row,
    })
}

struct PendingInventory {
    inventory: Inventory,
    rows: BTreeMap<String, (SegmentClass, FeatureVector)>,
}

/// Parse a PHOIBLE-style delimited byte stream into a [`TypologyDatabase`].
pub fn parse_phoible<R: Read>(reader: R, options: &ParseOptions) -> Result<TypologyDatabase> {
    let map = &options.column_map;
    let mut csv_reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter.unwrap_or(b','))
        .flexible(false)
        .from_reader(reader);

    let headers: Vec<String> = csv_reader
        .headers()
        .map_err(|_| Error::EmptyInput)?
        .iter()
        .map(|h| h.trim_start_matches('\u{feff}').trim().to_string())
        .collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyInput);
    }

    let find = |name: &str| headers.iter().position(|h| h == name);
    let mandatory = |name: &str| find(name).ok_or_else(|| Error::MissingColumn(name.to_string()));

    let idx_id = mandatory(&map.inventory_id)?;
    let idx_lang = mandatory(&map.language_name)?;
    let idx_glyph = mandatory(&map.glyph)?;
    let idx_class = mandatory(&map.segment_class)?;
    let idx_iso = find(&map.iso639_3);
    let idx_glotto = find(&map.glottocode);
    let idx_source = find(&map.source);
    let idx_family = find(&map.family);

    let mut mapped: Vec<usize> = vec![idx_id, idx_lang, idx_glyph, idx_class];
    mapped.extend([idx_iso, idx_glotto, idx_source, idx_family].into_iter().flatten());
    let feature_columns: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(i, name)| !mapped.contains(i) && !map.ignore.contains(name))
        .map(|(i, name)| (i, name.clone()))
        .collect();
    let feature_system =
        FeatureSystem::new(feature_columns.iter().map(|(_, n)| n.clone()).collect()).map_err(
            |_| Error::MissingColumn("<at least one feature column>".to_string()),
        )?;

    let mut pending: BTreeMap<InventoryId, PendingInventory> = BTreeMap::new();
    let mut summary = ParseSummary::default();

    let mut record = csv::StringRecord::new();
    let mut row_number = 0usize;
    while csv_reader.read_record(&mut record)? {
        row_number += 1;
        summary.rows += 1;
        let field = |idx: usize| record.get(idx).unwrap_or("").trim();

        let id = InventoryId(field(idx_id).to_string());
        let glyph = normalize_glyph(field(idx_glyph));
        if glyph.is_empty() {
            return Err(Error::InvalidFeatureToken {
                token: String::new(),
                feature: map.glyph.clone(),
                row: row_number,
            });
        }
        let class = SegmentClass::parse(field(idx_class));
        let mut values = Vec::with_capacity(feature_columns.len());
        for (idx, name) in &feature_columns {
            values.push(parse_token(
                field(*idx),
                name,
                row_number,
                options.contour_policy,
                &mut summary.contour_tokens,
            )?);
        }
        let vector = FeatureVector::new(values);

        let entry = pending.entry(id.clone()).or_insert_with(|| PendingInventory {
            inventory: Inventory {
                id: id.clone(),
                language_name: field(idx_lang).to_string(),
                iso639_3: idx_iso.map(field).unwrap_or("").to_string(),
                glottocode: idx_glotto.map(field).unwrap_or("").to_string(),
                source: idx_source.map(field).unwrap_or("").to_string(),
                family: idx_family.map(field).unwrap_or("").to_string(),
                glyphs: Default::default(),
                overrides: Default::default(),
            },
            rows: BTreeMap::new(),
        });
        match entry.rows.get(&glyph) {
            None => {
                entry.rows.insert(glyph, (class, vector));
            }
            Some((prev_class, prev_vector)) => {
                if *prev_class == class && *prev_vector == vector {
                    summary.duplicate_rows += 1;
                } else {
                    return Err(Error::GlyphConflict {
                        glyph,
                        first_inventory: id.0.clone(),
                        first: prev_vector.symbols(),
                        second_inventory: id.0,
                        second: vector.symbols(),
                    });
                }
            }
        }
    }
    if summary.rows == 0 {
        return Err(Error::EmptyInput);
    }

    // Finalize: the global vector for a glyph comes from the lowest-numbered
    // inventory containing it, so results do not depend on file row order.
    let mut segments: BTreeMap<String, Segment> = BTreeMap::new();
    let mut owner: BTreeMap<String, InventoryId> = BTreeMap::new();
    let mut inventories: BTreeMap<InventoryId, Inventory> = BTreeMap::new();
    for (id, mut entry) in pending {
        for (glyph, (class, vector)) in entry.rows {
            entry.inventory.glyphs.insert(glyph.clone());
            match segments.get(&glyph) {
                None => {
                    segments.insert(
                        glyph.clone(),
                        Segment {
                            glyph: glyph.clone(),
                            class,
                            features: vector,
                        },
                    );
                    owner.insert(glyph, id.clone());
                }
                Some(existing) => {
                    if existing.class != class || existing.features != vector {
                        match options.conflict_mode {
                            ConflictMode::Error => {
                                return Err(Error::GlyphConflict {
                                    glyph: glyph.clone(),
                                    first_inventory: owner[&glyph].0.clone(),
                                    first: existing.features.symbols(),
                                    second_inventory: id.0.clone(),
                                    second: vector.symbols(),
                                });
                            }
                            ConflictMode::PerInventory => {
                                summary.per_inventory_conflicts += 1;
                                entry.inventory.overrides.insert(glyph, vector);
                            }
                        }
                    }
                }
            }
        }
        inventories.insert(id, entry.inventory);
    }

    Ok(TypologyDatabase::assemble(
        feature_system,
        segments,
        inventories,
        summary,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TINY: &str = "\
InventoryID,LanguageName,ISO6393,Glottocode,Source,Phoneme,SegmentClass,voice,sonorant,nasal
1,Alpha,aaa,alph1234,spa,p,consonant,-,-,-
1,Alpha,aaa,alph1234,spa,b,consonant,+,-,-
1,Alpha,aaa,alph1234,spa,m,consonant,+,+,+
2,Beta,bbb,beta1234,upsid,p,consonant,-,-,-
2,Beta,bbb,beta1234,upsid,a,vowel,+,+,-
2,Beta,bbb,beta1234,upsid,m,consonant,+,+,+
";

    fn parse(text: &str, options: &ParseOptions) -> Result<TypologyDatabase> {
        parse_phoible(text.as_bytes(), options)
    }

    #[test]
    fn parses_tiny_fixture() {
        let db = parse(TINY, &ParseOptions::default()).unwrap();
        assert_eq!(db.summary().rows, 6);
        assert_eq!(db.summary().inventories, 2);
        assert_eq!(db.summary().languages, 2);
        assert_eq!(db.summary().segments, 4);
        assert_eq!(db.feature_system().names(), ["voice", "sonorant", "nasal"]);
        // Shared glyphs with identical vectors collapse into one segment.
        assert_eq!(db.attestation("p"), 2);
        assert_eq!(db.attestation("a"), 1);
    }

    #[test]
    fn single_row_all_unspecified() {
        let text = "InventoryID,LanguageName,ISO6393,Glottocode,Source,Phoneme,SegmentClass,f1,f2\n\
                    9,Solo,sss,solo1234,gm,a,vowel,0,0\n";
        let db = parse(text, &ParseOptions::default()).unwrap();
        assert_eq!(db.inventories().len(), 1);
        assert_eq!(db.segments().len(), 1);
        let seg = db.segment("a").unwrap();
        assert!(seg.features.values.iter().all(|v| v.value == Ternary::Unspecified));
    }

    #[test]
    fn missing_mandatory_column_is_fatal() {
        let text = "InventoryID,LanguageName,ISO6393,Glottocode,Source,SegmentClass,f1\n\
                    1,Alpha,aaa,x,spa,consonant,+\n";
        let err = parse(text, &ParseOptions::default()).unwrap_err();
        match err {
            Error::MissingColumn(name) => assert_eq!(name, "Phoneme"),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn empty_file_is_fatal() {
        assert!(matches!(
            parse("", &ParseOptions::default()),
            Err(Error::EmptyInput)
        ));
        let header_only = "InventoryID,LanguageName,Phoneme,SegmentClass,f1\n";
        assert!(matches!(
            parse(header_only, &ParseOptions::default()),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn conflicting_vectors_error_lists_both() {
        let text = "InventoryID,LanguageName,ISO6393,Glottocode,Source,Phoneme,SegmentClass,voice\n\
                    1,Alpha,aaa,x,spa,p,consonant,-\n\
                    2,Beta,bbb,y,gm,p,consonant,+\n";
        let err = parse(text, &ParseOptions::default()).unwrap_err();
        match err {
            Error::GlyphConflict { glyph, first, second, .. } => {
                assert_eq!(glyph, "p");
                assert_eq!(first, "-");
                assert_eq!(second, "+");
            }
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn per_inventory_mode_scopes_conflicts() {
        let text = "InventoryID,LanguageName,ISO6393,Glottocode,Source,Phoneme,SegmentClass,voice\n\
                    2,Beta,bbb,y,gm,p,consonant,+\n\
                    1,Alpha,aaa,x,spa,p,consonant,-\n";
        let options = ParseOptions {
            conflict_mode: ConflictMode::PerInventory,
            ..ParseOptions::default()
        };
        let db = parse(text, &options).unwrap();
        // Global vector comes from inventory 1 (lowest id), not file order.
        assert_eq!(db.feature_vector("p").unwrap().symbols(), "-");
        let inv2 = db.inventory("2").unwrap();
        assert_eq!(db.vector_in(inv2, "p").unwrap().symbols(), "+");
        assert_eq!(db.summary().per_inventory_conflicts, 1);
    }

    #[test]
    fn duplicate_rows_deduplicated_with_count() {
        let text = "InventoryID,LanguageName,ISO6393,Glottocode,Source,Phoneme,SegmentClass,voice\n\
                    1,Alpha,aaa,x,spa,p,consonant,-\n\
                    1,Alpha,aaa,x,spa,p,consonant,-\n";
        let db = parse(text, &ParseOptions::default()).unwrap();
        assert_eq!(db.summary().duplicate_rows, 1);
        assert_eq!(db.inventory("1").unwrap().len(), 1);
    }

    #[test]
    fn contour_tokens_follow_policy() {
        let text = "InventoryID,LanguageName,ISO6393,Glottocode,Source,Phoneme,SegmentClass,nasal\n\
                    1,Alpha,aaa,x,spa,ᵐb,consonant,\"+,-\"\n";
        let db = parse(text, &ParseOptions::default()).unwrap();
        let v = &db.feature_vector("ᵐb").unwrap().values[0];
        assert_eq!(v.value, Ternary::Plus);
        assert_eq!(v.raw_token, "+,-");
        assert_eq!(db.summary().contour_tokens, 1);

        let options = ParseOptions {
            contour_policy: ContourPolicy::Unspecified,
            ..ParseOptions::default()
        };
        let db = parse(text, &options).unwrap();
        assert_eq!(
            db.feature_vector("ᵐb").unwrap().values[0].value,
            Ternary::Unspecified
        );
    }

    #[test]
    fn invalid_token_is_an_error() {
        let text = "InventoryID,LanguageName,ISO6393,Glottocode,Source,Phoneme,SegmentClass,voice\n\
                    1,Alpha,aaa,x,spa,p,consonant,maybe\n";
        let err = parse(text, &ParseOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidFeatureToken { .. }));
    }

    #[test]
    fn column_map_file_overrides_names() {
        let cfg = "# custom layout\nglyph = Seg\nlanguage_name = Lang\ninventory_id = Inv\nsegment_class = Class\nignore = Notes\n";
        let map = ColumnMap::from_key_value(cfg).unwrap();
        let text = "Inv,Lang,Seg,Class,Notes,height\n1,Gamma,e,vowel,borrowed,+\n";
        let options = ParseOptions {
            column_map: map,
            ..ParseOptions::default()
        };
        let db = parse(text, &options).unwrap();
        assert_eq!(db.feature_system().names(), ["height"]);
        assert_eq!(db.segment("e").unwrap().class, SegmentClass::Vowel);
    }

    #[test]
    fn canonical_roundtrip_tiny() {
        let db = parse(TINY, &ParseOptions::default()).unwrap();
        let canonical = db.to_canonical_csv();
        let reparsed = parse(&canonical, &ParseOptions::default()).unwrap();
        assert!(db.content_eq(&reparsed));
    }

    #[test]
    fn inventories_for_language_matches_name_and_code() {
        let db = parse(TINY, &ParseOptions::default()).unwrap();
        assert_eq!(db.inventories_for_language("alpha").len(), 1);
        assert_eq!(db.inventories_for_language("AAA").len(), 1);
        assert!(db.inventories_for_language("Qqq").is_empty());
    }

    #[test]
    fn segments_matching_filters_exactly() {
        let db = parse(TINY, &ParseOptions::default()).unwrap();
        let hits = db
            .segments_matching(&[
                ("voice".to_string(), Ternary::Plus),
                ("sonorant".to_string(), Ternary::Minus),
            ])
            .unwrap();
        let glyphs: Vec<&str> = hits.iter().map(|s| s.glyph.as_str()).collect();
        assert_eq!(glyphs, vec!["b"]);

        let all = db.segments_matching(&[]).unwrap();
        assert_eq!(all.len(), 4);

        assert!(matches!(
            db.segments_matching(&[("spread".to_string(), Ternary::Plus)]),
            Err(Error::UnknownFeature(_))
        ));
    }
}
