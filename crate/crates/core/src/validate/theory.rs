//! Truth-side view of position clusters in simulated data.
//!
//! For a genome position `i` whose right context `G[i+1..=i+k]` is unique
//! on both strands, the position's cluster is the GSA range of suffixes
//! starting with that context. Knowing where every simulated read came
//! from, each row of the range can be attributed to the locus or not, and
//! the two sufficient conditions for a correct call can be checked
//! directly.

use std::collections::HashSet;
use std::ops::Range;

use crate::clustering::{verify_unimodal, Cluster};
use crate::error::{Error, Result};
use crate::index::IndexTriplet;
use crate::sequences::ReadCollection;
use crate::simulate::{ContextOracle, ReadOrigin, Strand};

/// Row-level facts about the cluster of one genome position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionCluster {
    pub pos: usize,
    pub k: usize,
    pub range: Range<usize>,
    /// Forward-oriented read copies of `G[pos]` in the range.
    pub copies: u32,
    /// End-marker rows of forward reads starting at `pos + 1`.
    pub locus_ends: u32,
    /// Rows not attributable to the locus.
    pub foreign: u32,
    /// Every row comes from the locus.
    pub condition1: bool,
    /// No two rows share both the offset and the letter of their leftmost
    /// error inside the suffix.
    pub condition2: bool,
    /// The LCP values over the range rise then fall.
    pub unimodal: bool,
}

/// Attributes rows of an augmented single-sample collection (given reads,
/// then their reverse complements) to simulated origins.
pub struct TruthClusters<'a> {
    idx: &'a IndexTriplet,
    aug: &'a ReadCollection,
    origins: &'a [ReadOrigin],
    read_len: usize,
    forward_errors: Vec<Vec<u32>>,
}

impl<'a> TruthClusters<'a> {
    pub fn new(
        idx: &'a IndexTriplet,
        aug: &'a ReadCollection,
        origins: &'a [ReadOrigin],
        read_len: usize,
    ) -> Result<Self> {
        if aug.len() != 2 * origins.len() {
            return Err(Error::domain(format!(
                "collection of {} reads does not augment {} origins",
                aug.len(),
                origins.len()
            )));
        }
        let forward_errors = origins.iter().map(|o| o.forward_errors(read_len)).collect();
        Ok(TruthClusters {
            idx,
            aug,
            origins,
            read_len,
            forward_errors,
        })
    }

    /// Origin index of a rank when that copy reads along the forward strand.
    fn forward_origin(&self, rank: usize) -> Option<usize> {
        let m = self.origins.len();
        let (q, given) = if rank < m { (rank, true) } else { (rank - m, false) };
        let fwd = (self.origins[q].strand == Strand::Forward) == given;
        fwd.then_some(q)
    }

    pub fn analyze(&self, genome: &[u8], pos: usize, k: usize) -> Result<PositionCluster> {
        if pos + k >= genome.len() {
            return Err(Error::OutOfRange { index: pos + k, len: genome.len() });
        }
        let range = self.idx.pattern_range(self.aug, &genome[pos + 1..=pos + k]);
        let mut copies = 0;
        let mut locus_ends = 0;
        let mut foreign = 0;
        let mut seen = HashSet::new();
        let mut condition2 = true;
        for row in range.clone() {
            let s = self.idx.gsa()[row];
            let off = s.offset as usize;
            let Some(q) = self.forward_origin(s.read as usize) else {
                foreign += 1;
                continue;
            };
            let start = self.origins[q].genome_pos;
            if off == 0 && start == pos + 1 {
                locus_ends += 1;
            } else if off >= 1 && start + off == pos + 1 {
                copies += 1;
            } else {
                foreign += 1;
                continue;
            }
            let errs = &self.forward_errors[q];
            if let Some(&e) = errs.iter().find(|&&e| e as usize >= off) {
                let letter = self.aug.reads()[s.read as usize].bases[e as usize];
                if !seen.insert((e as usize - off, letter)) {
                    condition2 = false;
                }
            }
        }
        let unimodal = range.len() < 2 || {
            let (a, b) = (range.start as u64, range.end as u64 - 1);
            verify_unimodal(self.idx.lcp(), &Cluster::over(self.idx.lcp(), a, b))
        };
        Ok(PositionCluster {
            pos,
            k,
            range,
            copies,
            locus_ends,
            foreign,
            condition1: foreign == 0,
            condition2,
            unimodal,
        })
    }

    pub fn read_len(&self) -> usize {
        self.read_len
    }
}

/// Evenly spaced positions `margin, margin + step, …` below `n - margin`.
pub fn spaced_positions(n: usize, step: usize, margin: usize) -> Vec<usize> {
    if n <= 2 * margin || step == 0 {
        return Vec::new();
    }
    (margin..n - margin).step_by(step).collect()
}

/// Analyzes every position whose both-strand context is unique, returning
/// the analyses together with the number of ambiguous positions skipped.
pub fn analyze_positions(
    truth: &TruthClusters<'_>,
    genome: &[u8],
    oracle: &ContextOracle,
    positions: &[usize],
) -> Result<(Vec<PositionCluster>, usize)> {
    let mut out = Vec::with_capacity(positions.len());
    let mut ambiguous = 0;
    for &p in positions {
        let info = oracle.query(p, truth.read_len())?;
        if info.ambiguous {
            ambiguous += 1;
            continue;
        }
        out.push(truth.analyze(genome, p, info.k)?);
    }
    Ok((out, ambiguous))
}
