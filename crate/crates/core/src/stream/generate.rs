//! Synthetic posterior streams with known ground truth.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::rng::keyed_rng;
use crate::typology::{Inventory, Ternary, TypologyDatabase};

use super::{
    Alignment, AlignmentRun, DecodeParams, FeatureFrame, FeatureStream, build_lattice,
};

/// Parameters for [`generate_stream`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamGenParams<F> {
    pub n_frames: usize,
    /// Mean segment run length in frames (geometric, minimum 1).
    pub mean_run_length: f64,
    /// Emitted posterior mean for plus-specified features.
    pub mu_plus: F,
    /// Emitted posterior mean for minus-specified features.
    pub mu_minus: F,
    pub noise_sigma: F,
    pub seed: u64,
    pub frame_period: F,
}

impl<F: Real> StreamGenParams<F> {
    pub fn new(n_frames: usize, noise_sigma: F, seed: u64) -> Self {
        StreamGenParams {
            n_frames,
            mean_run_length: 8.0,
            mu_plus: F::from_f64_lossy(0.9),
            mu_minus: F::from_f64_lossy(0.1),
            noise_sigma,
            seed,
            frame_period: F::from_f64_lossy(0.01),
        }
    }

    fn validate(&self) -> Result<()> {
        let in_unit = |x: F| x > F::zero() && x < F::one();
        if !in_unit(self.mu_plus) || !in_unit(self.mu_minus) {
            return Err(Error::InvalidParams("mu_plus, mu_minus must be in (0, 1)".into()));
        }
        if !(self.mean_run_length >= 1.0) {
            return Err(Error::InvalidParams("mean_run_length must be >= 1".into()));
        }
        if !(self.noise_sigma >= F::zero()) {
            return Err(Error::InvalidParams("noise_sigma must be >= 0".into()));
        }
        Ok(())
    }
}

/// Sample a segment run sequence from the inventory and emit noisy
/// posteriors for it. Returns the stream and the true alignment. Fully
/// deterministic in `(inventory, params)`.
pub fn generate_stream<F: Real>(
    db: &TypologyDatabase,
    inventory: &Inventory,
    params: &StreamGenParams<F>,
) -> Result<(FeatureStream<F>, Alignment<F>)> {
    params.validate()?;
    let segments = db.resolved_segments(inventory)?;
    if segments.is_empty() {
        return Err(Error::EmptyInventory(inventory.id.to_string()));
    }
    let feature_names: Vec<String> = db.feature_system().names().to_vec();

    if params.n_frames == 0 {
        let stream = FeatureStream::new(feature_names, Vec::new(), params.frame_period)?;
        return Ok((
            stream,
            Alignment {
                runs: Vec::new(),
                total_log_score: F::zero(),
            },
        ));
    }

    let mut rng = keyed_rng(params.seed, "stream-gen", &[inventory.id.as_str().as_bytes()]);
    let continue_prob = 1.0 - 1.0 / params.mean_run_length;

    // Sample the true segment sequence: geometric run lengths, adjacent runs
    // over distinct segments whenever the inventory allows it.
    let mut label_of_frame: Vec<usize> = Vec::with_capacity(params.n_frames);
    let mut previous: Option<usize> = None;
    while label_of_frame.len() < params.n_frames {
        let segment = loop {
            let pick = rng.random_range(0..segments.len());
            if segments.len() == 1 || previous != Some(pick) {
                break pick;
            }
        };
        previous = Some(segment);
        let mut run_length = 1usize;
        while run_length < params.n_frames && rng.random::<f64>() < continue_prob {
            run_length += 1;
        }
        for _ in 0..run_length {
            if label_of_frame.len() == params.n_frames {
                break;
            }
            label_of_frame.push(segment);
        }
    }

    let noise = if params.noise_sigma > F::zero() {
        Some(Normal::new(0.0f64, params.noise_sigma.as_f64()).expect("valid sigma"))
    } else {
        None
    };
    let mut frames = Vec::with_capacity(params.n_frames);
    for &segment_idx in &label_of_frame {
        let segment = &segments[segment_idx];
        let posteriors: Vec<F> = (0..feature_names.len())
            .map(|feature| {
                let mean = match segment.features.value(feature) {
                    Ternary::Plus => params.mu_plus,
                    Ternary::Minus => params.mu_minus,
                    Ternary::Unspecified => F::from_f64_lossy(0.5),
                };
                let sampled = match &noise {
                    Some(normal) => mean + F::from_f64_lossy(normal.sample(&mut rng)),
                    None => mean,
                };
                sampled.max(F::zero()).min(F::one())
            })
            .collect();
        frames.push(FeatureFrame { posteriors });
    }
    let stream = FeatureStream::new(feature_names, frames, params.frame_period)?;

    let mut runs: Vec<AlignmentRun> = Vec::new();
    for (t, &segment_idx) in label_of_frame.iter().enumerate() {
        let glyph = &segments[segment_idx].glyph;
        match runs.last_mut() {
            Some(run) if run.glyph == *glyph => run.end_frame = t,
            _ => runs.push(AlignmentRun {
                glyph: glyph.clone(),
                start_frame: t,
                end_frame: t,
            }),
        }
    }

    // Truth score: frame scores of the true labeling under the default
    // clamp, with no switch penalty applied.
    let score_params = DecodeParams::<F>::default();
    let lattice = build_lattice(&stream, db.feature_system(), &segments, &score_params)?;
    let mut total = F::zero();
    for (t, &segment_idx) in label_of_frame.iter().enumerate() {
        let glyph = &segments[segment_idx].glyph;
        let arc_score = lattice.frames()[t]
            .iter()
            .find(|arc| &lattice.candidates()[arc.candidate].glyph == glyph)
            .map(|arc| arc.score)
            .expect("unpruned lattice holds every candidate");
        total = total + arc_score;
    }

    Ok((
        stream,
        Alignment {
            runs,
            total_log_score: total,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::constrained_decode;
    use crate::typology::{parse_phoible, ParseOptions};

    fn tiny_db() -> TypologyDatabase {
        let text = "\
InventoryID,LanguageName,ISO6393,Glottocode,Source,Phoneme,SegmentClass,voice,nasal,syllabic
1,Alpha,aaa,x,spa,p,consonant,-,-,-
1,Alpha,aaa,x,spa,m,consonant,+,+,-
1,Alpha,aaa,x,spa,a,vowel,+,-,+
";
        parse_phoible(text.as_bytes(), &ParseOptions::default()).unwrap()
    }

    #[test]
    fn same_seed_same_stream() {
        let db = tiny_db();
        let inv = db.inventory("1").unwrap();
        let params = StreamGenParams::<f64>::new(40, 0.2, 99);
        let (s1, a1) = generate_stream(&db, inv, &params).unwrap();
        let (s2, a2) = generate_stream(&db, inv, &params).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(a1, a2);
    }

    #[test]
    fn zero_frames_gives_empty_stream_and_alignment() {
        let db = tiny_db();
        let inv = db.inventory("1").unwrap();
        let params = StreamGenParams::<f64>::new(0, 0.1, 1);
        let (stream, truth) = generate_stream(&db, inv, &params).unwrap();
        assert!(stream.is_empty());
        assert!(truth.runs.is_empty());
        assert_eq!(truth.total_log_score, 0.0);
    }

    #[test]
    fn noiseless_extreme_means_decode_back_to_truth() {
        let db = tiny_db();
        let inv = db.inventory("1").unwrap();
        let params = StreamGenParams {
            mu_plus: 1.0 - 1e-4,
            mu_minus: 1e-4,
            ..StreamGenParams::<f64>::new(60, 0.0, 5)
        };
        let (stream, truth) = generate_stream(&db, inv, &params).unwrap();
        let decoded = constrained_decode(&stream, &db, inv, &DecodeParams::default()).unwrap();
        assert_eq!(decoded.runs, truth.runs);
    }

    #[test]
    fn truth_runs_tile_and_alternate() {
        let db = tiny_db();
        let inv = db.inventory("1").unwrap();
        let params = StreamGenParams::<f64>::new(200, 0.3, 42);
        let (_, truth) = generate_stream(&db, inv, &params).unwrap();
        assert_eq!(truth.n_frames(), 200);
        let mut expected_start = 0;
        for (i, run) in truth.runs.iter().enumerate() {
            assert_eq!(run.start_frame, expected_start);
            if i > 0 {
                assert_ne!(truth.runs[i - 1].glyph, run.glyph);
            }
            expected_start = run.end_frame + 1;
        }
        assert_eq!(expected_start, 200);
    }
}
