//! Domain partitioning by largest-gap search.
//!
//! Sorted samples are scanned for unusually wide spacings ("tails in the
//! middle"). Candidates are examined from the widest down; a candidate is
//! cut only if both resulting sides keep enough samples and the gap clearly
//! dominates the typical spacing of its segment. Accepted cuts are marked
//! with the sentinel -1 in the gap array, rejected candidates with 0 so
//! they are never reselected; the scan ends when no positive unmarked gap
//! remains, or when no segment is still large enough to split, so it
//! finishes in at most one round per gap.

use crate::basis::Domain;
use crate::config::SolverConfig;
use crate::error::{Error, Result};

/// Spacings `t(i) = x(i+1) - x(i)` over sorted samples; `partition` marks
/// entries in a working copy with the sentinels described above.
#[derive(Debug, Clone, PartialEq)]
pub struct GapArray {
    pub t: Vec<f64>,
}

/// Consecutive spacings of a sorted sample slice (needs two samples).
pub fn gaps(samples: &[f64]) -> Result<GapArray> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            got: samples.len(),
            min: 2,
        });
    }
    if let Some(idx) = samples.windows(2).position(|w| !(w[0] <= w[1])) {
        return Err(Error::UnsortedSamples { index: idx + 1 });
    }
    Ok(GapArray {
        t: samples.windows(2).map(|w| w[1] - w[0]).collect(),
    })
}

/// One contiguous run of samples between accepted cuts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionPiece {
    pub domain: Domain,
    /// Index of the first sample in the piece (inclusive).
    pub first: usize,
    /// Index of the last sample in the piece (inclusive).
    pub last: usize,
}

impl PartitionPiece {
    pub fn sample_count(&self) -> usize {
        self.last - self.first + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainPartition {
    /// Pieces in left-to-right order; together they cover every sample.
    pub pieces: Vec<PartitionPiece>,
    /// Accepted gap indices in acceptance order.
    pub cut_indices: Vec<usize>,
    /// Removed intervals `(x(i0), x(i0+1))`, aligned with `cut_indices`.
    pub removed_gaps: Vec<(f64, f64)>,
}

/// Split sorted samples at dominant interior gaps. A single-piece result is
/// valid; identical inputs always produce identical partitions.
pub fn partition(samples: &[f64], config: &SolverConfig) -> Result<DomainPartition> {
    config.validate()?;
    let mut t = gaps(samples)?.t;
    let m = samples.len();
    let min_piece = config.resolved_min_piece(m);
    let dominance = config.min_gap_dominance;

    // Acceptance order of cut gap indices.
    let mut accepted: Vec<usize> = Vec::new();
    loop {
        // Largest unmarked gap; ties break toward the smallest index.
        let mut candidate: Option<usize> = None;
        for (i, &g) in t.iter().enumerate() {
            if g > 0.0 && candidate.is_none_or(|c| g > t[c]) {
                candidate = Some(i);
            }
        }
        let Some(i0) = candidate else { break };

        // Segment of samples currently containing gap i0.
        let seg_first = accepted
            .iter()
            .filter(|&&c| c < i0)
            .map(|&c| c + 1)
            .max()
            .unwrap_or(0);
        let seg_last = accepted
            .iter()
            .filter(|&&c| c > i0)
            .copied()
            .min()
            .unwrap_or(m - 1);

        let left_count = i0 - seg_first + 1;
        let right_count = seg_last - i0;
        let size_ok = left_count >= min_piece && right_count >= min_piece;

        // Both sides must have positive width to form usable piece domains.
        let width_ok = samples[i0] > samples[seg_first] && samples[seg_last] > samples[i0 + 1];

        // The candidate must dwarf the mean spacing of the rest of its
        // segment, otherwise ordinary sampling noise would keep splitting
        // connected modes.
        let other_gaps = (seg_last - seg_first).saturating_sub(1);
        let segment_width = samples[seg_last] - samples[seg_first];
        let dominant =
            other_gaps == 0 || t[i0] * other_gaps as f64 >= dominance * (segment_width - t[i0]);

        if size_ok && width_ok && dominant {
            t[i0] = -1.0;
            accepted.push(i0);
        } else {
            t[i0] = 0.0;
        }

        // Stop early once no segment is large enough to split again.
        let mut bounds: Vec<usize> = accepted.clone();
        bounds.sort_unstable();
        let mut prev = 0usize;
        let mut any_splittable = false;
        for &last in bounds.iter().chain(std::iter::once(&(m - 1))) {
            if last + 1 - prev >= 2 * min_piece {
                any_splittable = true;
            }
            prev = last + 1;
        }
        if !any_splittable {
            break;
        }
    }

    let mut sorted_cuts = accepted.clone();
    sorted_cuts.sort_unstable();
    let mut pieces = Vec::with_capacity(sorted_cuts.len() + 1);
    let mut first = 0usize;
    for &c in &sorted_cuts {
        pieces.push(PartitionPiece {
            domain: Domain::new(samples[first], samples[c])?,
            first,
            last: c,
        });
        first = c + 1;
    }
    pieces.push(PartitionPiece {
        domain: Domain::new(samples[first], samples[m - 1])?,
        first,
        last: m - 1,
    });

    let removed_gaps = accepted
        .iter()
        .map(|&c| (samples[c], samples[c + 1]))
        .collect();
    Ok(DomainPartition {
        pieces,
        cut_indices: accepted,
        removed_gaps,
    })
}
