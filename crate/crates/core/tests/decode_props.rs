//! Decoder properties: dynamic programming against exhaustive enumeration,
//! score monotonicity, tie determinism, and structural alignment checks.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use rand::prelude::*;
use rand::rngs::StdRng;

use phonotype::stream::{
    build_lattice, constrained_decode, decode_best_path, generate_stream, Alignment, DecodeParams,
    SegmentLattice, StreamGenParams,
};
use phonotype::typology::{
    parse_phoible, FeatureVector, ParseOptions, Segment, SegmentClass, Ternary, TypologyDatabase,
};
use phonotype::Error;
use phonotype_oracles::decode_exhaustive;

fn sample_db() -> TypologyDatabase {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/phoible-sample.csv");
    let text = fs::read_to_string(path).unwrap();
    parse_phoible(text.as_bytes(), &ParseOptions::default()).unwrap()
}

fn dummy_segment(index: usize) -> Segment {
    Segment {
        glyph: format!("s{index:02}"),
        class: SegmentClass::Consonant,
        features: FeatureVector::from_ternary(&[Ternary::Unspecified]),
    }
}

fn random_lattice(rng: &mut StdRng, n_frames: usize, n_candidates: usize) -> SegmentLattice<f64> {
    let candidates: Vec<Segment> = (0..n_candidates).map(dummy_segment).collect();
    let frames: Vec<Vec<(usize, f64)>> = (0..n_frames)
        .map(|_| {
            (0..n_candidates)
                .map(|c| (c, rng.random_range(-5.0..0.0)))
                .collect()
        })
        .collect();
    SegmentLattice::from_parts(candidates, frames).unwrap()
}

fn labels_of(alignment: &Alignment<f64>, lattice: &SegmentLattice<f64>) -> Vec<usize> {
    alignment
        .labels()
        .iter()
        .map(|glyph| {
            lattice
                .candidates()
                .iter()
                .position(|c| c.glyph == *glyph)
                .unwrap()
        })
        .collect()
}

#[test]
fn dp_equals_exhaustive_enumeration() {
    let mut rng = StdRng::seed_from_u64(20_260_808);
    for trial in 0..300 {
        let n_frames = rng.random_range(1..=6);
        let n_candidates = rng.random_range(1..=8);
        let lattice = random_lattice(&mut rng, n_frames, n_candidates);
        let params = DecodeParams {
            switch_penalty: if trial % 3 == 0 {
                0.0
            } else {
                rng.random_range(0.0..2.0)
            },
            min_duration: rng.random_range(1..=3.min(n_frames)),
            ..DecodeParams::default()
        };
        let oracle = decode_exhaustive(&lattice, &params);
        match decode_best_path(&lattice, &params) {
            Ok(alignment) => {
                let (oracle_score, oracle_labels) = oracle.expect("oracle agrees on feasibility");
                assert!(
                    (alignment.total_log_score - oracle_score).abs() <= 1e-9,
                    "trial {trial}: dp {} vs oracle {oracle_score}",
                    alignment.total_log_score
                );
                assert_eq!(
                    labels_of(&alignment, &lattice),
                    oracle_labels,
                    "trial {trial}: labelings differ"
                );
                alignment.validate_against(&lattice, &params, 1e-9).unwrap();
            }
            Err(Error::InfeasibleLattice) | Err(Error::MinDurationTooLong { .. }) => {
                assert!(oracle.is_none(), "trial {trial}: oracle found a path");
            }
            Err(other) => panic!("trial {trial}: unexpected error {other}"),
        }
    }
}

#[test]
fn adding_a_candidate_never_lowers_the_best_score() {
    let mut rng = StdRng::seed_from_u64(7_031);
    for _ in 0..200 {
        let n_frames = rng.random_range(1..=8);
        let n_candidates = rng.random_range(1..=6);
        let candidates: Vec<Segment> = (0..=n_candidates).map(dummy_segment).collect();
        let scores: Vec<Vec<f64>> = (0..n_frames)
            .map(|_| (0..=n_candidates).map(|_| rng.random_range(-5.0..0.0)).collect())
            .collect();
        let arcs_without: Vec<Vec<(usize, f64)>> = scores
            .iter()
            .map(|row| (0..n_candidates).map(|c| (c, row[c])).collect())
            .collect();
        let arcs_with: Vec<Vec<(usize, f64)>> = scores
            .iter()
            .map(|row| (0..=n_candidates).map(|c| (c, row[c])).collect())
            .collect();
        let params = DecodeParams {
            switch_penalty: rng.random_range(0.0..1.0),
            ..DecodeParams::default()
        };
        let smaller = decode_best_path(
            &SegmentLattice::from_parts(candidates[..n_candidates].to_vec(), arcs_without)
                .unwrap(),
            &params,
        )
        .unwrap();
        let larger = decode_best_path(
            &SegmentLattice::from_parts(candidates, arcs_with).unwrap(),
            &params,
        )
        .unwrap();
        assert!(larger.total_log_score >= smaller.total_log_score - 1e-12);
    }
}

#[test]
fn candidate_insertion_order_never_changes_the_alignment() {
    let db = sample_db();
    let inventory = db.inventory("GM 1675").unwrap();
    let params = StreamGenParams::<f64>::new(40, 0.3, 17);
    let (stream, _) = generate_stream(&db, inventory, &params).unwrap();
    let mut candidates = db.resolved_segments(inventory).unwrap();
    let decode_params = DecodeParams {
        switch_penalty: 0.4,
        ..DecodeParams::default()
    };
    let reference = decode_best_path(
        &build_lattice(&stream, db.feature_system(), &candidates, &decode_params).unwrap(),
        &decode_params,
    )
    .unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..5 {
        candidates.shuffle(&mut rng);
        let shuffled = decode_best_path(
            &build_lattice(&stream, db.feature_system(), &candidates, &decode_params).unwrap(),
            &decode_params,
        )
        .unwrap();
        assert_eq!(reference, shuffled);
    }
}

#[test]
fn top_k_pruning_matches_brute_force_per_frame() {
    let db = sample_db();
    let inventory = db.inventory("418").unwrap(); // Malay
    let gen = StreamGenParams::<f64>::new(12, 0.4, 5);
    let (stream, _) = generate_stream(&db, inventory, &gen).unwrap();
    let candidates = db.resolved_segments(inventory).unwrap();

    let unpruned_params = DecodeParams::default();
    let unpruned =
        build_lattice(&stream, db.feature_system(), &candidates, &unpruned_params).unwrap();
    let pruned_params = DecodeParams {
        top_k: 2,
        ..DecodeParams::default()
    };
    let pruned = build_lattice(&stream, db.feature_system(), &candidates, &pruned_params).unwrap();
    for (full, kept) in unpruned.frames().iter().zip(pruned.frames()) {
        assert_eq!(kept.len(), 2);
        // Brute-force top-2 of the full frame, same tie rule.
        let mut sorted = full.clone();
        sorted.sort_by(|a, b| {
            b.score
                .partial_cmp(&a.score)
                .unwrap()
                .then(a.candidate.cmp(&b.candidate))
        });
        assert_eq!(&sorted[..2], kept.as_slice());
    }
}

#[test]
fn constrained_decode_stays_inside_the_inventory() {
    let db = sample_db();
    for id in ["176", "380", "1675", "424"] {
        let inventory = db.inventory(id).unwrap();
        let gen = StreamGenParams::<f64>::new(30, 0.5, 23);
        let (stream, _) = generate_stream(&db, inventory, &gen).unwrap();
        let params = DecodeParams::default();
        let alignment = constrained_decode(&stream, &db, inventory, &params).unwrap();
        let used: BTreeSet<&str> = alignment.runs.iter().map(|r| r.glyph.as_str()).collect();
        for glyph in used {
            assert!(inventory.contains(glyph), "{glyph} not in inventory {id}");
        }
        assert_eq!(alignment.n_frames(), 30);
        let candidates = db.resolved_segments(inventory).unwrap();
        let lattice = build_lattice(&stream, db.feature_system(), &candidates, &params).unwrap();
        alignment.validate_against(&lattice, &params, 1e-9).unwrap();
    }
}

#[test]
fn singleton_inventory_spans_all_frames() {
    let db = sample_db();
    let gm = db.inventory("1675").unwrap();
    let gen = StreamGenParams::<f64>::new(24, 0.4, 31);
    let (stream, _) = generate_stream(&db, gm, &gen).unwrap();
    let singleton = phonotype::typology::Inventory::synthetic(
        "one",
        std::iter::once("s".to_string()),
    );
    let alignment =
        constrained_decode(&stream, &db, &singleton, &DecodeParams::default()).unwrap();
    assert_eq!(alignment.runs.len(), 1);
    assert_eq!(alignment.runs[0].glyph, "s");
    assert_eq!(alignment.runs[0].start_frame, 0);
    assert_eq!(alignment.runs[0].end_frame, 23);
}

#[test]
fn superset_inventory_never_scores_lower() {
    let db = sample_db();
    let gm = db.inventory("1675").unwrap();
    let upsid = db.inventory("380").unwrap();
    // UPSID 380 is a strict subset of GM 1675 in the sample data.
    assert!(upsid.glyphs.is_subset(&gm.glyphs));
    for seed in 0..20 {
        let gen = StreamGenParams::<f64>::new(25, 0.6, 1000 + seed);
        let (stream, _) = generate_stream(&db, upsid, &gen).unwrap();
        let sub = constrained_decode(&stream, &db, upsid, &DecodeParams::default()).unwrap();
        let sup = constrained_decode(&stream, &db, gm, &DecodeParams::default()).unwrap();
        assert!(sup.total_log_score >= sub.total_log_score - 1e-12);
    }
}

#[test]
fn every_generated_truth_validates_against_its_lattice() {
    let db = sample_db();
    let inventory = db.inventory("425").unwrap(); // Fijian, has contour segments
    let gen = StreamGenParams::<f64>::new(50, 0.2, 9);
    let (stream, truth) = generate_stream(&db, inventory, &gen).unwrap();
    let candidates = db.resolved_segments(inventory).unwrap();
    let params = DecodeParams::default();
    let lattice = build_lattice(&stream, db.feature_system(), &candidates, &params).unwrap();
    truth.validate_against(&lattice, &params, 1e-9).unwrap();
}
