//! Articulatory-feature posterior streams and their file format.
//!
//! A stream is a frame-synchronous time series of per-feature posteriors
//! (probability that the feature is plus). Streams arrive from TSV files or
//! from the synthetic generator in [`generate`]; decoding happens in
//! [`lattice`].

mod generate;
mod lattice;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

pub use generate::{generate_stream, StreamGenParams};
pub use lattice::{
    build_lattice, constrained_decode, decode_best_path, segment_frame_score, Alignment,
    AlignmentRun, DecodeParams, LatticeArc, SegmentLattice,
};

/// Posteriors for one frame, aligned to the stream's feature names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureFrame<F> {
    pub posteriors: Vec<F>,
}

/// A time-indexed stream of per-feature posteriors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureStream<F> {
    feature_names: Vec<String>,
    frames: Vec<FeatureFrame<F>>,
    frame_period: F,
}

impl<F: Real> FeatureStream<F> {
    /// Stored posteriors may be exact 0 or 1; clamping happens at scoring
    /// time only.
    pub fn new(
        feature_names: Vec<String>,
        frames: Vec<FeatureFrame<F>>,
        frame_period: F,
    ) -> Result<Self> {
        if feature_names.is_empty() {
            return Err(Error::InvalidParams("stream has no features".into()));
        }
        if !(frame_period > F::zero()) {
            return Err(Error::InvalidParams("frame_period must be > 0".into()));
        }
        for (t, frame) in frames.iter().enumerate() {
            if frame.posteriors.len() != feature_names.len() {
                return Err(Error::MalformedStream(format!(
                    "frame {t} has {} posteriors, expected {}",
                    frame.posteriors.len(),
                    feature_names.len()
                )));
            }
            if frame
                .posteriors
                .iter()
                .any(|p| !(*p >= F::zero() && *p <= F::one()))
            {
                return Err(Error::MalformedStream(format!(
                    "frame {t} has a posterior outside [0, 1]"
                )));
            }
        }
        Ok(FeatureStream {
            feature_names,
            frames,
            frame_period,
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn frames(&self) -> &[FeatureFrame<F>] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn frame_period(&self) -> F {
        self.frame_period
    }

    /// Write as TSV: header `time<TAB>feat...`, one row per frame, times on
    /// the frame grid. [`FeatureStream::read_tsv`] is the exact inverse.
    pub fn write_tsv<W: Write>(&self, mut writer: W) -> Result<()> {
        write!(writer, "time")?;
        for name in &self.feature_names {
            write!(writer, "\t{name}")?;
        }
        writeln!(writer)?;
        for (t, frame) in self.frames.iter().enumerate() {
            write!(writer, "{}", F::from_usize_lossy(t) * self.frame_period)?;
            for p in &frame.posteriors {
                write!(writer, "\t{p}")?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }

    /// Read the TSV format produced by [`FeatureStream::write_tsv`].
    ///
    /// The frame period is recovered from the second row's time stamp;
    /// `default_period` covers streams with fewer than two frames.
    pub fn read_tsv<R: BufRead>(reader: R, default_period: F) -> Result<Self> {
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::MalformedStream("missing header".into()))??;
        let mut columns = header.split('\t');
        match columns.next() {
            Some("time") => {}
            _ => {
                return Err(Error::MalformedStream(
                    "header must start with `time`".into(),
                ))
            }
        }
        let feature_names: Vec<String> = columns.map(str::to_string).collect();
        if feature_names.is_empty() {
            return Err(Error::MalformedStream("header has no features".into()));
        }

        let mut frames = Vec::new();
        let mut times: Vec<F> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let time_field = fields.next().unwrap_or("");
            let time = time_field.parse::<f64>().map_err(|_| {
                Error::MalformedStream(format!("row {}: bad time `{time_field}`", lineno + 1))
            })?;
            times.push(F::from_f64_lossy(time));
            let posteriors: Vec<F> = fields
                .map(|field| {
                    field.parse::<f64>().map(F::from_f64_lossy).map_err(|_| {
                        Error::MalformedStream(format!(
                            "row {}: bad posterior `{field}`",
                            lineno + 1
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            if posteriors.len() != feature_names.len() {
                return Err(Error::MalformedStream(format!(
                    "row {}: {} values, expected {}",
                    lineno + 1,
                    posteriors.len(),
                    feature_names.len()
                )));
            }
            frames.push(FeatureFrame { posteriors });
        }
        let frame_period = if times.len() >= 2 { times[1] } else { default_period };
        FeatureStream::new(feature_names, frames, frame_period)
    }
}
