//! Held-out-language evaluation of contrast predictability.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::typology::TypologyDatabase;

use super::{
    accuracy, build_contrast_dataset, train_classifier, ContrastSpec, Hyper, Mode,
    RealizationParams,
};

/// Per-held-out-language outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageOutcome {
    pub n_pos: usize,
    pub n_neg: usize,
    pub accuracy: f64,
}

/// Predictability of one contrast on held-out languages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// Keyed by held-out language.
    pub per_language: BTreeMap<String, LanguageOutcome>,
    /// Unweighted mean of the per-language accuracies.
    pub macro_accuracy: f64,
    pub mode: Mode,
    pub grounded: bool,
}

/// Train on `train_languages`, evaluate per language in `test_languages`.
#[allow(clippy::too_many_arguments)]
pub fn evaluate_heldout<F: Real>(
    db: &TypologyDatabase,
    contrast: &ContrastSpec,
    train_languages: &[String],
    test_languages: &[String],
    mode: Mode,
    realization: Option<&RealizationParams<F>>,
    hyper: &Hyper<F>,
    repeats: usize,
) -> Result<ConsistencyReport> {
    let train_keys: BTreeSet<String> =
        train_languages.iter().map(|l| l.to_lowercase()).collect();
    let overlap: Vec<&String> = test_languages
        .iter()
        .filter(|l| train_keys.contains(&l.to_lowercase()))
        .collect();
    if !overlap.is_empty() {
        let listed = overlap
            .iter()
            .map(|s| s.as_str())
            .collect::<Vec<_>>()
            .join(", ");
        return Err(Error::OverlappingLanguages(listed));
    }
    if train_languages.is_empty() || test_languages.is_empty() {
        return Err(Error::InvalidParams(
            "train and test language sets must be non-empty".into(),
        ));
    }

    let train = build_contrast_dataset(db, contrast, train_languages, mode, realization, repeats)?;
    let classifier = train_classifier(&train, hyper)?;

    let mut per_language = BTreeMap::new();
    for language in test_languages {
        let test = build_contrast_dataset(
            db,
            contrast,
            std::slice::from_ref(language),
            mode,
            realization,
            repeats,
        )?;
        let n_pos = test.iter().filter(|i| i.label).count();
        let outcome = LanguageOutcome {
            n_pos,
            n_neg: test.len() - n_pos,
            accuracy: accuracy(&classifier, &test),
        };
        // Key by the database's casing of the language name.
        per_language.insert(test[0].language.clone(), outcome);
    }
    let macro_accuracy = per_language.values().map(|o| o.accuracy).sum::<f64>()
        / per_language.len() as f64;
    Ok(ConsistencyReport {
        per_language,
        macro_accuracy,
        mode,
        grounded: contrast.grounded,
    })
}

/// One fold per language: train on the rest, test on the held-out one.
/// Folds are independent and evaluated in parallel.
#[allow(clippy::too_many_arguments)]
pub fn leave_one_language_out<F: Real>(
    db: &TypologyDatabase,
    contrast: &ContrastSpec,
    languages: &[String],
    mode: Mode,
    realization: Option<&RealizationParams<F>>,
    hyper: &Hyper<F>,
    repeats: usize,
) -> Result<Vec<ConsistencyReport>> {
    let mut seen = BTreeSet::new();
    let distinct: Vec<String> = languages
        .iter()
        .filter(|l| seen.insert(l.to_lowercase()))
        .cloned()
        .collect();
    if distinct.len() < 2 {
        return Err(Error::TooFewLanguages(distinct.len()));
    }
    (0..distinct.len())
        .into_par_iter()
        .map(|fold| {
            let held_out = vec![distinct[fold].clone()];
            let rest: Vec<String> = distinct
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != fold)
                .map(|(_, l)| l.clone())
                .collect();
            evaluate_heldout(db, contrast, &rest, &held_out, mode, realization, hyper, repeats)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typology::{parse_phoible, ParseOptions, Ternary};

    /// Three languages whose vowels encode round as a deterministic function
    /// of back (round = +  iff  back = +).
    fn dependent_db() -> TypologyDatabase {
        let mut text = String::from(
            "InventoryID,LanguageName,ISO6393,Glottocode,Source,Phoneme,SegmentClass,syllabic,back,high,round\n",
        );
        for (id, lang) in [(1, "Alpha"), (2, "Beta"), (3, "Gamma")] {
            text.push_str(&format!("{id},{lang},,,src,i,vowel,+,-,+,-\n"));
            text.push_str(&format!("{id},{lang},,,src,e,vowel,+,-,-,-\n"));
            text.push_str(&format!("{id},{lang},,,src,u,vowel,+,+,+,+\n"));
            text.push_str(&format!("{id},{lang},,,src,o,vowel,+,+,-,+\n"));
        }
        parse_phoible(text.as_bytes(), &ParseOptions::default()).unwrap()
    }

    fn langs(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn overlapping_sets_are_a_usage_error() {
        let db = dependent_db();
        let contrast = ContrastSpec::new("round", vec![], true).unwrap();
        let err = evaluate_heldout::<f64>(
            &db,
            &contrast,
            &langs(&["Alpha", "Beta"]),
            &langs(&["beta"]),
            Mode::Symbolic,
            None,
            &Hyper::default(),
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::OverlappingLanguages(_)));
        assert!(err.is_usage());
    }

    #[test]
    fn lolo_fold_count_and_held_out_identity() {
        let db = dependent_db();
        let contrast = ContrastSpec::new("round", vec![], true).unwrap();
        let reports = leave_one_language_out::<f64>(
            &db,
            &contrast,
            &langs(&["Alpha", "Beta", "Gamma"]),
            Mode::Symbolic,
            None,
            &Hyper::default(),
            1,
        )
        .unwrap();
        assert_eq!(reports.len(), 3);
        let held: Vec<&String> = reports
            .iter()
            .map(|r| r.per_language.keys().next().unwrap())
            .collect();
        assert_eq!(held, ["Alpha", "Beta", "Gamma"]);
        for report in &reports {
            assert_eq!(report.per_language.len(), 1);
        }
    }

    #[test]
    fn deterministic_target_gives_perfect_folds() {
        // round is a function of back, which grounded symbolic inputs carry.
        let db = dependent_db();
        let contrast = ContrastSpec::new("round", vec![("syllabic".into(), Ternary::Plus)], true)
            .unwrap();
        let reports = leave_one_language_out::<f64>(
            &db,
            &contrast,
            &langs(&["Alpha", "Beta", "Gamma"]),
            Mode::Symbolic,
            None,
            &Hyper::default(),
            1,
        )
        .unwrap();
        for report in reports {
            assert_eq!(report.macro_accuracy, 1.0);
        }
    }

    #[test]
    fn one_language_is_too_few() {
        let db = dependent_db();
        let contrast = ContrastSpec::new("round", vec![], true).unwrap();
        let err = leave_one_language_out::<f64>(
            &db,
            &contrast,
            &langs(&["Alpha", "alpha"]),
            Mode::Symbolic,
            None,
            &Hyper::default(),
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::TooFewLanguages(1)));
    }

    #[test]
    fn identical_runs_produce_identical_reports() {
        let db = dependent_db();
        let contrast = ContrastSpec::new("round", vec![], false).unwrap();
        let realization = RealizationParams::<f64>::new(12, 0.2, 77);
        let run = || {
            leave_one_language_out(
                &db,
                &contrast,
                &langs(&["Alpha", "Beta", "Gamma"]),
                Mode::Synthetic,
                Some(&realization),
                &Hyper::default(),
                3,
            )
            .unwrap()
        };
        assert_eq!(run(), run());
    }
}
