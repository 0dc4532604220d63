//! Cross-lingual consistency of feature contrasts.
//!
//! A contrast is one ternary feature restricted to a scope of segments
//! (front vs back among vowels, say). Segments become labeled instances
//! either symbolically (their other feature values) or through a seeded
//! synthetic realization model that stands in for speech, with controllable
//! per-family shifts so both cross-lingually shared and family-dependent
//! realizations can be simulated.

mod classifier;
mod eval;

use std::collections::{BTreeMap, BTreeSet};

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::rng::keyed_rng;
use crate::typology::{FeatureVector, Segment, SegmentClass, Ternary, TypologyDatabase};

pub use classifier::{accuracy, logistic_gradient, logistic_loss, train_classifier, Classifier, Hyper, TrainingMeta};
pub use eval::{evaluate_heldout, leave_one_language_out, ConsistencyReport, LanguageOutcome};

/// Instance representation mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Inputs are feature encodings read off the database.
    Symbolic,
    /// Inputs are synthetic realization embeddings.
    Synthetic,
}

/// A binary contrast: one target feature within a segment scope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastSpec {
    pub target_feature: String,
    /// Constraints restricting eligible segments (exact ternary match).
    pub scope: Vec<(String, Ternary)>,
    /// Grounded mode adds all features except the target to the input.
    pub grounded: bool,
    /// Extra feature columns for ungrounded symbolic inputs (on top of the
    /// segment-class indicators). Default empty.
    #[serde(default)]
    pub context_subset: Vec<String>,
}

impl ContrastSpec {
    pub fn new(target_feature: &str, scope: Vec<(String, Ternary)>, grounded: bool) -> Result<Self> {
        let spec = ContrastSpec {
            target_feature: target_feature.to_string(),
            scope,
            grounded,
            context_subset: Vec::new(),
        };
        spec.check_target_not_in_scope()?;
        Ok(spec)
    }

    fn check_target_not_in_scope(&self) -> Result<()> {
        if self.scope.iter().any(|(name, _)| name == &self.target_feature) {
            return Err(Error::TargetInScope(self.target_feature.clone()));
        }
        Ok(())
    }

    /// Validate the contrast against a database's feature system.
    pub fn validate(&self, db: &TypologyDatabase) -> Result<()> {
        self.check_target_not_in_scope()?;
        let system = db.feature_system();
        for name in std::iter::once(&self.target_feature)
            .chain(self.scope.iter().map(|(n, _)| n))
            .chain(self.context_subset.iter())
        {
            if system.position(name).is_none() {
                return Err(Error::UnknownFeature(name.clone()));
            }
        }
        Ok(())
    }

    fn scope_description(&self) -> String {
        if self.scope.is_empty() {
            return "<unconstrained>".to_string();
        }
        self.scope
            .iter()
            .map(|(name, value)| format!("{name}={value}"))
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Per-family realization shift: the listed features' contributions are
/// sign-flipped and a fixed family offset of the given scale is added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyShift<F> {
    #[serde(default)]
    pub flip_features: BTreeSet<String>,
    pub offset_scale: F,
}

/// Parameters of the synthetic realization model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationParams<F> {
    /// Embedding dimensionality.
    pub dim: usize,
    pub noise_sigma: F,
    #[serde(default = "BTreeMap::new")]
    pub family_shift: BTreeMap<String, FamilyShift<F>>,
    pub seed: u64,
}

impl<F: Real> RealizationParams<F> {
    pub fn new(dim: usize, noise_sigma: F, seed: u64) -> Self {
        RealizationParams {
            dim,
            noise_sigma,
            family_shift: BTreeMap::new(),
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::InvalidParams("realization dim must be >= 1".into()));
        }
        if !(self.noise_sigma >= F::zero()) {
            return Err(Error::InvalidParams("noise_sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// One labeled instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance<F> {
    pub input: Vec<F>,
    /// `true` iff the target feature is plus on the source segment.
    pub label: bool,
    pub language: String,
    pub glyph: String,
}

fn encode_value<F: Real>(value: Ternary) -> F {
    match value {
        Ternary::Plus => F::one(),
        Ternary::Minus => -F::one(),
        Ternary::Unspecified => F::zero(),
    }
}

/// `{+1, -1, 0}` encoding of a feature vector, excluding one position.
fn encode_excluding<F: Real>(vector: &FeatureVector, exclude: usize) -> Vec<F> {
    vector
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != exclude)
        .map(|(_, v)| encode_value(v.value))
        .collect()
}

fn class_indicators<F: Real>(class: SegmentClass) -> [F; 3] {
    let mut out = [F::zero(); 3];
    match class {
        SegmentClass::Consonant => out[0] = F::one(),
        SegmentClass::Vowel => out[1] = F::one(),
        SegmentClass::Tone => out[2] = F::one(),
        SegmentClass::Unknown => {}
    }
    out
}

/// The fixed random projection used by the realization model, row-major
/// `dim x n_features`, scaled by `1/sqrt(n_features)`.
pub fn projection_matrix<F: Real>(params: &RealizationParams<F>, n_features: usize) -> Vec<Vec<F>> {
    let mut rng = keyed_rng(params.seed, "projection", &[]);
    let normal = Normal::new(0.0f64, 1.0).expect("unit normal");
    let scale = 1.0 / (n_features as f64).sqrt();
    (0..params.dim)
        .map(|_| {
            (0..n_features)
                .map(|_| F::from_f64_lossy(normal.sample(&mut rng) * scale))
                .collect()
        })
        .collect()
}

/// Reusable realization state: the projection is sampled once.
struct Realizer<F> {
    params: RealizationParams<F>,
    projection: Vec<Vec<F>>,
}

impl<F: Real> Realizer<F> {
    fn new(params: &RealizationParams<F>, n_features: usize) -> Self {
        Realizer {
            params: params.clone(),
            projection: projection_matrix(params, n_features),
        }
    }

    fn family_offset(&self, family: &str, scale: F) -> Vec<F> {
        let mut rng = keyed_rng(self.params.seed, "family-offset", &[family.as_bytes()]);
        let normal = Normal::new(0.0f64, 1.0).expect("unit normal");
        (0..self.params.dim)
            .map(|_| F::from_f64_lossy(normal.sample(&mut rng)) * scale)
            .collect()
    }
}

/// Deterministic synthetic realization of a segment.
///
/// `base = P . encode(features)` with the family's listed features
/// sign-flipped, plus the family offset, plus Gaussian noise from the
/// stream keyed by `(seed, glyph, family, draw_index)`.
pub fn synth_realization<F: Real>(
    segment: &Segment,
    family: &str,
    feature_names: &[String],
    params: &RealizationParams<F>,
    draw_index: u64,
) -> Result<Vec<F>> {
    params.validate()?;
    let realizer = Realizer::new(params, segment.features.len());
    Ok(embed_named(&realizer, segment, family, feature_names, draw_index))
}

fn embed_named<F: Real>(
    realizer: &Realizer<F>,
    segment: &Segment,
    family: &str,
    feature_names: &[String],
    draw_index: u64,
) -> Vec<F> {
    let params = &realizer.params;
    let mut encoded: Vec<F> = (0..segment.features.len())
        .map(|i| encode_value(segment.features.value(i)))
        .collect();
    let shift = params.family_shift.get(family);
    if let Some(shift) = shift {
        for (i, name) in feature_names.iter().enumerate() {
            if shift.flip_features.contains(name) {
                encoded[i] = -encoded[i];
            }
        }
    }
    let mut embedding: Vec<F> = realizer
        .projection
        .iter()
        .map(|row| {
            row.iter()
                .zip(&encoded)
                .map(|(&w, &e)| w * e)
                .fold(F::zero(), |acc, x| acc + x)
        })
        .collect();
    if let Some(shift) = shift {
        let offset = realizer.family_offset(family, shift.offset_scale);
        for (e, o) in embedding.iter_mut().zip(offset) {
            *e = *e + o;
        }
    }
    if params.noise_sigma > F::zero() {
        let mut rng = keyed_rng(
            params.seed,
            "noise",
            &[
                segment.glyph.as_bytes(),
                family.as_bytes(),
                &draw_index.to_le_bytes(),
            ],
        );
        let normal = Normal::new(0.0f64, params.noise_sigma.as_f64()).expect("valid sigma");
        for e in embedding.iter_mut() {
            *e = *e + F::from_f64_lossy(normal.sample(&mut rng));
        }
    }
    embedding
}

/// Build labeled instances for a contrast over the given languages.
///
/// One instance per eligible segment occurrence (each inventory of each
/// language) per repeat. Segments whose target value is unspecified are
/// excluded by construction.
pub fn build_contrast_dataset<F: Real>(
    db: &TypologyDatabase,
    contrast: &ContrastSpec,
    languages: &[String],
    mode: Mode,
    realization: Option<&RealizationParams<F>>,
    repeats: usize,
) -> Result<Vec<Instance<F>>> {
    contrast.validate(db)?;
    if repeats == 0 {
        return Err(Error::InvalidParams("repeats must be >= 1".into()));
    }
    let realization = match mode {
        Mode::Synthetic => {
            let params = realization.ok_or(Error::MissingRealization)?;
            params.validate()?;
            Some(params)
        }
        Mode::Symbolic => None,
    };
    let system = db.feature_system();
    let target_idx = system
        .position(&contrast.target_feature)
        .expect("validated above");
    let scope: Vec<(usize, Ternary)> = contrast
        .scope
        .iter()
        .map(|(name, value)| (system.position(name).expect("validated above"), *value))
        .collect();
    let context: Vec<usize> = contrast
        .context_subset
        .iter()
        .map(|name| system.position(name).expect("validated above"))
        .collect();

    let realizer = realization.map(|params| Realizer::new(params, system.len()));

    let mut seen = BTreeSet::new();
    let mut instances = Vec::new();
    for language in languages {
        if !seen.insert(language.to_lowercase()) {
            continue;
        }
        let inventories = db.inventories_for_language(language);
        if inventories.is_empty() {
            return Err(Error::UnknownLanguage(language.clone()));
        }
        for (inventory_ordinal, inventory) in inventories.iter().enumerate() {
            for glyph in &inventory.glyphs {
                let segment = db.segment(glyph)?;
                let vector = db.vector_in(inventory, glyph)?;
                if !scope.iter().all(|&(idx, v)| vector.value(idx) == v) {
                    continue;
                }
                let target = vector.value(target_idx);
                if !target.is_specified() {
                    continue;
                }
                let label = target == Ternary::Plus;
                // Effective segment as this inventory sees it.
                let mut effective = segment.clone();
                if effective.features != *vector {
                    effective.features = vector.clone();
                }
                for repeat in 0..repeats {
                    let input: Vec<F> = match mode {
                        Mode::Symbolic => {
                            if contrast.grounded {
                                encode_excluding(&effective.features, target_idx)
                            } else {
                                let mut input: Vec<F> =
                                    class_indicators(effective.class).to_vec();
                                input.extend(
                                    context
                                        .iter()
                                        .map(|&idx| encode_value::<F>(effective.features.value(idx))),
                                );
                                input
                            }
                        }
                        Mode::Synthetic => {
                            let draw_index =
                                (inventory_ordinal * repeats + repeat) as u64;
                            let mut input = embed_named(
                                realizer.as_ref().expect("synthetic mode"),
                                &effective,
                                inventory.family_or_language(),
                                system.names(),
                                draw_index,
                            );
                            if contrast.grounded {
                                input.extend(encode_excluding::<F>(
                                    &effective.features,
                                    target_idx,
                                ));
                            }
                            input
                        }
                    };
                    instances.push(Instance {
                        input,
                        label,
                        language: inventory.language_name.clone(),
                        glyph: glyph.clone(),
                    });
                }
            }
        }
    }
    if instances.is_empty() {
        return Err(Error::EmptyDataset(contrast.scope_description()));
    }
    Ok(instances)
}
