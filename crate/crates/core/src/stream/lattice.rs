//! Per-frame segment scoring and exact best-path decoding.
//!
//! Scores combine per-feature posteriors by the mean log rule: a segment's
//! frame score is the mean over its specified features (that the stream
//! carries) of `log p` for plus and `log (1 - p)` for minus. The mean, not
//! the sum, keeps segments with different specification counts comparable.
//! Decoding is exact dynamic programming over (frame, arc, run-length)
//! states with a per-switch penalty and a minimum run duration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::typology::{FeatureSystem, Inventory, Segment, TypologyDatabase};

use super::{FeatureFrame, FeatureStream};

/// Decoding knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecodeParams<F> {
    /// Log-score cost charged per segment change.
    pub switch_penalty: F,
    /// Per-frame arc budget; each frame keeps only its top-scoring arcs.
    pub top_k: usize,
    /// Minimum length, in frames, of every decoded run.
    pub min_duration: usize,
    /// Posteriors are clamped to `[eps, 1 - eps]` at scoring time.
    pub clamp_epsilon: F,
}

impl<F: Real> Default for DecodeParams<F> {
    fn default() -> Self {
        DecodeParams {
            switch_penalty: F::zero(),
            top_k: usize::MAX,
            min_duration: 1,
            clamp_epsilon: F::from_f64_lossy(1e-6),
        }
    }
}

impl<F: Real> DecodeParams<F> {
    fn validate(&self) -> Result<()> {
        if !(self.switch_penalty >= F::zero()) {
            return Err(Error::InvalidParams("switch_penalty must be >= 0".into()));
        }
        if self.top_k == 0 {
            return Err(Error::InvalidParams("top_k must be >= 1".into()));
        }
        if self.min_duration == 0 {
            return Err(Error::InvalidParams("min_duration must be >= 1".into()));
        }
        let half = F::from_f64_lossy(0.5);
        if !(self.clamp_epsilon > F::zero() && self.clamp_epsilon < half) {
            return Err(Error::InvalidParams(
                "clamp_epsilon must be in (0, 0.5)".into(),
            ));
        }
        Ok(())
    }
}

/// One scored segment hypothesis at one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeArc<F> {
    /// Index into the lattice's candidate list.
    pub candidate: usize,
    pub score: F,
}

/// Pruned per-frame segment hypotheses over a candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentLattice<F> {
    candidates: Vec<Segment>,
    /// Per frame, arcs sorted by descending score (ties by glyph order).
    frames: Vec<Vec<LatticeArc<F>>>,
    /// Glyphs that scored without any overlapping specified feature.
    degenerate: Vec<String>,
}

impl<F: Real> SegmentLattice<F> {
    /// Assemble a lattice from explicit arcs (used by tests and tools).
    ///
    /// Candidates are put in glyph order and arcs remapped accordingly, so
    /// the caller's insertion order never influences decoding.
    pub fn from_parts(
        candidates: Vec<Segment>,
        frame_arcs: Vec<Vec<(usize, F)>>,
    ) -> Result<Self> {
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| candidates[a].glyph.cmp(&candidates[b].glyph));
        let remap: Vec<usize> = {
            let mut remap = vec![0usize; candidates.len()];
            for (new_idx, &old_idx) in order.iter().enumerate() {
                remap[old_idx] = new_idx;
            }
            remap
        };
        let mut sorted_candidates: Vec<Segment> = Vec::with_capacity(candidates.len());
        for &old_idx in &order {
            sorted_candidates.push(candidates[old_idx].clone());
        }
        let mut frames = Vec::with_capacity(frame_arcs.len());
        for arcs in frame_arcs {
            let mut row: Vec<LatticeArc<F>> = arcs
                .into_iter()
                .map(|(old_idx, score)| {
                    if old_idx >= sorted_candidates.len() {
                        return Err(Error::InvalidParams(format!(
                            "arc candidate index {old_idx} out of range"
                        )));
                    }
                    if !score.is_finite() {
                        return Err(Error::InvalidParams("arc score must be finite".into()));
                    }
                    Ok(LatticeArc {
                        candidate: remap[old_idx],
                        score,
                    })
                })
                .collect::<Result<_>>()?;
            sort_arcs(&mut row);
            frames.push(row);
        }
        Ok(SegmentLattice {
            candidates: sorted_candidates,
            frames,
            degenerate: Vec::new(),
        })
    }

    pub fn candidates(&self) -> &[Segment] {
        &self.candidates
    }

    pub fn frames(&self) -> &[Vec<LatticeArc<F>>] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Glyphs whose specified features never overlap the stream's features.
    pub fn degenerate_glyphs(&self) -> &[String] {
        &self.degenerate
    }

    fn arc_score(&self, frame: usize, candidate: usize) -> Option<F> {
        self.frames[frame]
            .iter()
            .find(|arc| arc.candidate == candidate)
            .map(|arc| arc.score)
    }
}

fn sort_arcs<F: Real>(arcs: &mut [LatticeArc<F>]) {
    arcs.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .expect("finite arc scores")
            .then(a.candidate.cmp(&b.candidate))
    });
}

/// A decoded segment sequence: runs tile the frame range without gaps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRun {
    pub glyph: String,
    pub start_frame: usize,
    /// Inclusive.
    pub end_frame: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alignment<F> {
    pub runs: Vec<AlignmentRun>,
    pub total_log_score: F,
}

impl<F: Real> Alignment<F> {
    pub fn n_frames(&self) -> usize {
        self.runs.last().map(|r| r.end_frame + 1).unwrap_or(0)
    }

    /// Per-frame glyph labels.
    pub fn labels(&self) -> Vec<&str> {
        let mut labels = Vec::with_capacity(self.n_frames());
        for run in &self.runs {
            for _ in run.start_frame..=run.end_frame {
                labels.push(run.glyph.as_str());
            }
        }
        labels
    }

    /// Check the structural invariants and score consistency against the
    /// lattice this alignment was decoded from.
    pub fn validate_against(
        &self,
        lattice: &SegmentLattice<F>,
        params: &DecodeParams<F>,
        tolerance: F,
    ) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        let mut expected_start = 0usize;
        for (i, run) in self.runs.iter().enumerate() {
            if run.start_frame != expected_start || run.end_frame < run.start_frame {
                return fail(format!("run {i} does not tile the frame range"));
            }
            if run.end_frame + 1 - run.start_frame < params.min_duration {
                return fail(format!("run {i} shorter than min_duration"));
            }
            if i > 0 && self.runs[i - 1].glyph == run.glyph {
                return fail(format!("runs {} and {i} share a segment", i - 1));
            }
            expected_start = run.end_frame + 1;
        }
        if expected_start != lattice.len() {
            return fail("runs do not cover all frames".into());
        }
        let mut recomputed = F::zero();
        for run in &self.runs {
            let candidate = lattice
                .candidates
                .iter()
                .position(|c| c.glyph == run.glyph)
                .ok_or_else(|| Error::UnknownGlyph(run.glyph.clone()))?;
            for frame in run.start_frame..=run.end_frame {
                recomputed = recomputed
                    + lattice
                        .arc_score(frame, candidate)
                        .ok_or(Error::FrameWithoutArcs(frame))?;
            }
        }
        let switches = F::from_usize_lossy(self.runs.len().saturating_sub(1));
        recomputed = recomputed - params.switch_penalty * switches;
        if (recomputed - self.total_log_score).abs() > tolerance {
            return fail(format!(
                "total {} differs from recomputed {recomputed}",
                self.total_log_score
            ));
        }
        Ok(())
    }
}

/// Mean log posterior agreement between one frame and one segment.
///
/// Returns the score and a degeneracy flag that is set when the segment
/// specifies none of the stream's features (score 0 in that case).
pub fn segment_frame_score<F: Real>(
    frame: &FeatureFrame<F>,
    segment: &Segment,
    feature_names: &[String],
    system: &FeatureSystem,
    params: &DecodeParams<F>,
) -> Result<(F, bool)> {
    params.validate()?;
    let plan = candidate_plan(segment, feature_names, system)?;
    Ok(score_with_plan(frame, &plan, params.clamp_epsilon))
}

/// Stream column and polarity for each feature specified on a candidate.
fn candidate_plan(
    segment: &Segment,
    feature_names: &[String],
    system: &FeatureSystem,
) -> Result<Vec<(usize, bool)>> {
    let mut plan = Vec::new();
    for (column, name) in feature_names.iter().enumerate() {
        let idx = system
            .position(name)
            .ok_or_else(|| Error::UnknownFeature(name.clone()))?;
        match segment.features.value(idx) {
            crate::typology::Ternary::Plus => plan.push((column, true)),
            crate::typology::Ternary::Minus => plan.push((column, false)),
            crate::typology::Ternary::Unspecified => {}
        }
    }
    Ok(plan)
}

fn score_with_plan<F: Real>(frame: &FeatureFrame<F>, plan: &[(usize, bool)], eps: F) -> (F, bool) {
    if plan.is_empty() {
        return (F::zero(), true);
    }
    let hi = F::one() - eps;
    let mut sum = F::zero();
    for &(column, is_plus) in plan {
        let p = frame.posteriors[column].max(eps).min(hi);
        let term = if is_plus { p.ln() } else { (F::one() - p).ln() };
        sum = sum + term;
    }
    (sum / F::from_usize_lossy(plan.len()), false)
}

/// Score every candidate at every frame and keep the per-frame top `k`.
pub fn build_lattice<F: Real>(
    stream: &FeatureStream<F>,
    system: &FeatureSystem,
    candidates: &[Segment],
    params: &DecodeParams<F>,
) -> Result<SegmentLattice<F>> {
    params.validate()?;
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let mut sorted: Vec<Segment> = candidates.to_vec();
    sorted.sort_by(|a, b| a.glyph.cmp(&b.glyph));
    sorted.dedup_by(|a, b| a.glyph == b.glyph);

    let plans: Vec<Vec<(usize, bool)>> = sorted
        .iter()
        .map(|seg| candidate_plan(seg, stream.feature_names(), system))
        .collect::<Result<_>>()?;
    let degenerate: Vec<String> = sorted
        .iter()
        .zip(&plans)
        .filter(|(_, plan)| plan.is_empty())
        .map(|(seg, _)| seg.glyph.clone())
        .collect();

    let mut frames = Vec::with_capacity(stream.len());
    for frame in stream.frames() {
        let mut arcs: Vec<LatticeArc<F>> = plans
            .iter()
            .enumerate()
            .map(|(candidate, plan)| LatticeArc {
                candidate,
                score: score_with_plan(frame, plan, params.clamp_epsilon).0,
            })
            .collect();
        sort_arcs(&mut arcs);
        arcs.truncate(params.top_k);
        frames.push(arcs);
    }
    Ok(SegmentLattice {
        candidates: sorted,
        frames,
        degenerate,
    })
}

/// Exact argmax labeling of the lattice under the switch penalty and
/// minimum-duration constraint. Ties resolve toward glyph order.
pub fn decode_best_path<F: Real>(
    lattice: &SegmentLattice<F>,
    params: &DecodeParams<F>,
) -> Result<Alignment<F>> {
    params.validate()?;
    let n_frames = lattice.len();
    if n_frames == 0 {
        return Err(Error::EmptyStream);
    }
    for (t, arcs) in lattice.frames.iter().enumerate() {
        if arcs.is_empty() {
            return Err(Error::FrameWithoutArcs(t));
        }
    }
    let d = params.min_duration;
    if d > n_frames {
        return Err(Error::MinDurationTooLong {
            min_duration: d,
            frames: n_frames,
        });
    }

    // With no switch penalty and no duration constraint the optimum is the
    // per-frame argmax (smallest candidate on ties), same as the full DP.
    if params.switch_penalty == F::zero() && d == 1 {
        let mut total = F::zero();
        let mut runs: Vec<AlignmentRun> = Vec::new();
        for (t, arcs) in lattice.frames.iter().enumerate() {
            let mut best = &arcs[0];
            for arc in &arcs[1..] {
                if arc.score > best.score
                    || (arc.score == best.score && arc.candidate < best.candidate)
                {
                    best = arc;
                }
            }
            total = total + best.score;
            let glyph = &lattice.candidates[best.candidate].glyph;
            match runs.last_mut() {
                Some(run) if run.glyph == *glyph => run.end_frame = t,
                _ => runs.push(AlignmentRun {
                    glyph: glyph.clone(),
                    start_frame: t,
                    end_frame: t,
                }),
            }
        }
        return Ok(Alignment {
            runs,
            total_log_score: total,
        });
    }

    // Arcs iterated in candidate order so equal scores resolve toward the
    // glyph-smallest segment.
    let by_candidate: Vec<Vec<&LatticeArc<F>>> = lattice
        .frames
        .iter()
        .map(|arcs| {
            let mut row: Vec<&LatticeArc<F>> = arcs.iter().collect();
            row.sort_by_key(|arc| arc.candidate);
            row
        })
        .collect();

    let neg_inf = F::neg_infinity();
    // State: (arc position, run length capped at d). `score[a][tau - 1]`.
    let mut score: Vec<Vec<F>> = by_candidate[0]
        .iter()
        .map(|arc| {
            let mut row = vec![neg_inf; d];
            row[0] = arc.score;
            row
        })
        .collect();
    // parent[t][a][tau - 1] = (prev arc position, prev tau - 1)
    let mut parents: Vec<Vec<Vec<(u32, u32)>>> = Vec::with_capacity(n_frames);
    parents.push(Vec::new());

    for t in 1..n_frames {
        let prev_arcs = &by_candidate[t - 1];
        let arcs = &by_candidate[t];
        let mut next: Vec<Vec<F>> = vec![vec![neg_inf; d]; arcs.len()];
        let mut parent: Vec<Vec<(u32, u32)>> = vec![vec![(0, 0); d]; arcs.len()];
        for (a_pos, prev_arc) in prev_arcs.iter().enumerate() {
            for (tau, &base) in score[a_pos].iter().enumerate() {
                if base == neg_inf {
                    continue;
                }
                for (b_pos, arc) in arcs.iter().enumerate() {
                    if arc.candidate == prev_arc.candidate {
                        let new_tau = (tau + 1).min(d - 1);
                        let value = base + arc.score;
                        if value > next[b_pos][new_tau] {
                            next[b_pos][new_tau] = value;
                            parent[b_pos][new_tau] = (a_pos as u32, tau as u32);
                        }
                    } else if tau == d - 1 {
                        let value = base + arc.score - params.switch_penalty;
                        if value > next[b_pos][0] {
                            next[b_pos][0] = value;
                            parent[b_pos][0] = (a_pos as u32, tau as u32);
                        }
                    }
                }
            }
        }
        score = next;
        parents.push(parent);
    }

    // The final run must also satisfy min_duration: only tau == d survives.
    let mut best: Option<(usize, F)> = None;
    for (a_pos, _) in by_candidate[n_frames - 1].iter().enumerate() {
        let value = score[a_pos][d - 1];
        if value == neg_inf {
            continue;
        }
        if best.is_none_or(|(_, b)| value > b) {
            best = Some((a_pos, value));
        }
    }
    let (mut a_pos, total) = best.ok_or(Error::InfeasibleLattice)?;
    let mut tau = d - 1;
    let mut labels: Vec<usize> = vec![0; n_frames];
    for t in (0..n_frames).rev() {
        labels[t] = by_candidate[t][a_pos].candidate;
        if t > 0 {
            let (pa, ptau) = parents[t][a_pos][tau];
            a_pos = pa as usize;
            tau = ptau as usize;
        }
    }

    let mut runs: Vec<AlignmentRun> = Vec::new();
    for (t, &candidate) in labels.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if lattice.candidates[candidate].glyph == run.glyph => {
                run.end_frame = t;
            }
            _ => runs.push(AlignmentRun {
                glyph: lattice.candidates[candidate].glyph.clone(),
                start_frame: t,
                end_frame: t,
            }),
        }
    }
    Ok(Alignment {
        runs,
        total_log_score: total,
    })
}

/// Build a lattice over exactly the inventory's segments and decode it.
/// Every output segment belongs to the inventory by construction.
pub fn constrained_decode<F: Real>(
    stream: &FeatureStream<F>,
    db: &TypologyDatabase,
    inventory: &Inventory,
    params: &DecodeParams<F>,
) -> Result<Alignment<F>> {
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    let candidates = db.resolved_segments(inventory)?;
    if candidates.is_empty() {
        return Err(Error::EmptyInventory(inventory.id.to_string()));
    }
    let lattice = build_lattice(stream, db.feature_system(), &candidates, params)?;
    decode_best_path(&lattice, params)
}
