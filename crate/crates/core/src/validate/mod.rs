//! Scoring of KisSNP2-style calls against planted SNPs.
//!
//! Every truth SNP contributes two grid points, one per genome strand. A
//! point's coordinates are the ranks of its right context and of its
//! reversed left context among all points, both taken from the reference
//! (sample 1) genome. A call candidate `(L', s', R')` queries the rectangle
//! of points whose contexts are prefixed by `R'` and reversed `L'`.

pub mod theory;

use std::fmt;
use std::io::Write;
use std::ops::Range;

use crate::error::Result;
use crate::sequences::{complement, reverse_complement};
use crate::simulate::{nonisolated_flags, Strand, Variant};
use crate::snpcall::CallPair;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPoint {
    /// Index into [`TruthGrid::variants`].
    pub snp: u32,
    pub strand: Strand,
    /// Reference and alternative letters as read on `strand`.
    pub from: u8,
    pub to: u8,
    pub right: Vec<u8>,
    pub left_rev: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct TruthGrid {
    variants: Vec<Variant>,
    nonisolated: Vec<bool>,
    /// Truth SNPs whose windows leave the genome.
    skipped: Vec<u32>,
    points: Vec<GridPoint>,
    by_right: Vec<u32>,
    by_left: Vec<u32>,
    left_rank: Vec<u32>,
    left_len: usize,
    right_len: usize,
}

/// Rank range of entries of `order` whose key starts with `prefix`.
fn prefix_range<'a>(order: &[u32], key: impl Fn(u32) -> &'a [u8], prefix: &[u8]) -> Range<usize> {
    let lo = order.partition_point(|&p| key(p) < prefix);
    let hi = order.partition_point(|&p| {
        let k = key(p);
        k < prefix || k.starts_with(prefix)
    });
    lo..hi
}

impl TruthGrid {
    /// `left` is the window length including the allele, as in the caller;
    /// the left context proper has `left - 1` bases.
    pub fn build(variants: &[Variant], genome: &[u8], left: usize, right: usize) -> Result<Self> {
        let mut variants = variants.to_vec();
        variants.sort_by_key(|v| v.pos);
        let nonisolated = nonisolated_flags(&variants);
        let l = left.saturating_sub(1);
        let reach = l.max(right);
        let mut points = Vec::with_capacity(2 * variants.len());
        let mut skipped = Vec::new();
        for (id, v) in variants.iter().enumerate() {
            let id = id as u32;
            if v.pos < reach || v.pos + reach >= genome.len() {
                log::warn!("truth SNP at {} skipped: context leaves the genome", v.pos);
                skipped.push(id);
                continue;
            }
            let mut fwd_left = genome[v.pos - l..v.pos].to_vec();
            fwd_left.reverse();
            points.push(GridPoint {
                snp: id,
                strand: Strand::Forward,
                from: v.reference,
                to: v.alt,
                right: genome[v.pos + 1..v.pos + 1 + right].to_vec(),
                left_rev: fwd_left,
            });
            let mut rc_left = reverse_complement(&genome[v.pos + 1..v.pos + 1 + l])?;
            rc_left.reverse();
            points.push(GridPoint {
                snp: id,
                strand: Strand::Reverse,
                from: complement(v.reference).expect("validated base"),
                to: complement(v.alt).expect("validated base"),
                right: reverse_complement(&genome[v.pos - right..v.pos])?,
                left_rev: rc_left,
            });
        }
        let mut by_right: Vec<u32> = (0..points.len() as u32).collect();
        by_right.sort_by(|&a, &b| points[a as usize].right.cmp(&points[b as usize].right).then(a.cmp(&b)));
        let mut by_left: Vec<u32> = (0..points.len() as u32).collect();
        by_left.sort_by(|&a, &b| points[a as usize].left_rev.cmp(&points[b as usize].left_rev).then(a.cmp(&b)));
        let mut left_rank = vec![0u32; points.len()];
        for (rank, &p) in by_left.iter().enumerate() {
            left_rank[p as usize] = rank as u32;
        }
        Ok(TruthGrid {
            variants,
            nonisolated,
            skipped,
            points,
            by_right,
            by_left,
            left_rank,
            left_len: l,
            right_len: right,
        })
    }

    pub fn variants(&self) -> &[Variant] {
        &self.variants
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn skipped(&self) -> usize {
        self.skipped.len()
    }

    /// Point ids (ascending) whose right context starts with `right` and
    /// whose reversed left context starts with `left_rev`. Query strings
    /// longer than the stored contexts are truncated.
    pub fn query(&self, right: &[u8], left_rev: &[u8]) -> Vec<u32> {
        let right = &right[..right.len().min(self.right_len)];
        let left_rev = &left_rev[..left_rev.len().min(self.left_len)];
        let pts = &self.points;
        let xs = prefix_range(&self.by_right, |p| pts[p as usize].right.as_slice(), right);
        let ys = prefix_range(&self.by_left, |p| pts[p as usize].left_rev.as_slice(), left_rev);
        let ys = ys.start as u32..ys.end as u32;
        let mut hits: Vec<u32> = self.by_right[xs]
            .iter()
            .copied()
            .filter(|&p| ys.contains(&self.left_rank[p as usize]))
            .collect();
        hits.sort_unstable();
        hits
    }

    /// Reference scan equivalent to [`TruthGrid::query`].
    pub fn query_brute_force(&self, right: &[u8], left_rev: &[u8]) -> Vec<u32> {
        let right = &right[..right.len().min(self.right_len)];
        let left_rev = &left_rev[..left_rev.len().min(self.left_len)];
        (0..self.points.len() as u32)
            .filter(|&p| {
                let pt = &self.points[p as usize];
                pt.right.starts_with(right) && pt.left_rev.starts_with(left_rev)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matcher {
    Grid,
    BruteForce,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    /// Truth SNPs matched by at least one candidate, strands merged.
    pub tp: u64,
    /// Candidates matching no truth SNP.
    pub fp: u64,
    pub fn_: u64,
    pub candidates: u64,
    pub calls: u64,
    pub found_forward: u64,
    pub found_reverse: u64,
    pub nonisolated_found: u64,
    pub nonisolated_total: u64,
    pub skipped: u64,
}

impl ValidationReport {
    pub fn sensitivity(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn write_tsv<W: Write>(&self, mut out: W, header: &str) -> std::io::Result<()> {
        for line in header.lines() {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "TP\tFP\tFN\tSEN\tPREC\tnon_isolated_found\tnon_isolated_total\tcalls\tcandidates\tskipped")?;
        writeln!(
            out,
            "{}\t{}\t{}\t{:.4}\t{:.4}\t{}\t{}\t{}\t{}\t{}",
            self.tp,
            self.fp,
            self.fn_,
            self.sensitivity(),
            self.precision(),
            self.nonisolated_found,
            self.nonisolated_total,
            self.calls,
            self.candidates,
            self.skipped
        )
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:>8} {:>8} {:>8} {:>8} {:>8}  non-isolated", "TP", "FP", "FN", "SEN", "PREC")?;
        writeln!(
            f,
            "{:>8} {:>8} {:>8} {:>7.2}% {:>7.2}%  {}/{}",
            self.tp,
            self.fp,
            self.fn_,
            100.0 * self.sensitivity(),
            100.0 * self.precision(),
            self.nonisolated_found,
            self.nonisolated_total
        )?;
        write!(
            f,
            "calls {}, candidates {}, found on F {}, on RC {}, truth SNPs skipped {}",
            self.calls, self.candidates, self.found_forward, self.found_reverse, self.skipped
        )
    }
}

/// One SNP candidate cut out of a call pair at a differing column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate<'a> {
    pub left: [&'a [u8]; 2],
    pub allele: [u8; 2],
    pub right: [&'a [u8]; 2],
}

/// Every column where the two sequences differ, over their common length.
pub fn candidates(pair: &CallPair) -> Vec<Candidate<'_>> {
    let (a, b) = (&pair.first, &pair.second);
    (0..a.len().min(b.len()))
        .filter(|&c| a[c] != b[c])
        .map(|c| Candidate {
            left: [&a[..c], &b[..c]],
            allele: [a[c], b[c]],
            right: [&a[c + 1..], &b[c + 1..]],
        })
        .collect()
}

/// Truth SNP ids (with strand) matched by a candidate: either sample's
/// contexts, either direction of the substitution.
pub fn match_candidate(grid: &TruthGrid, cand: &Candidate<'_>, matcher: Matcher) -> Vec<(u32, Strand)> {
    let mut found = Vec::new();
    for side in 0..2 {
        let left_rev: Vec<u8> = cand.left[side].iter().rev().copied().collect();
        let hits = match matcher {
            Matcher::Grid => grid.query(cand.right[side], &left_rev),
            Matcher::BruteForce => grid.query_brute_force(cand.right[side], &left_rev),
        };
        for p in hits {
            let pt = &grid.points[p as usize];
            let (x, y) = (cand.allele[0], cand.allele[1]);
            if (pt.from, pt.to) == (x, y) || (pt.from, pt.to) == (y, x) {
                found.push((pt.snp, pt.strand));
            }
        }
    }
    found.sort_by_key(|&(s, st)| (s, st == Strand::Reverse));
    found.dedup();
    found
}

pub fn score_calls(grid: &TruthGrid, calls: &[CallPair]) -> ValidationReport {
    score_calls_with(grid, calls, Matcher::Grid)
}

pub fn score_calls_with(grid: &TruthGrid, calls: &[CallPair], matcher: Matcher) -> ValidationReport {
    let n = grid.variants.len();
    let mut fwd = vec![false; n];
    let mut rev = vec![false; n];
    let mut report = ValidationReport {
        calls: calls.len() as u64,
        skipped: grid.skipped.len() as u64,
        ..Default::default()
    };
    for pair in calls {
        for cand in candidates(pair) {
            report.candidates += 1;
            let hits = match_candidate(grid, &cand, matcher);
            if hits.is_empty() {
                report.fp += 1;
            }
            for (snp, strand) in hits {
                match strand {
                    Strand::Forward => fwd[snp as usize] = true,
                    Strand::Reverse => rev[snp as usize] = true,
                }
            }
        }
    }
    let mut skipped = vec![false; n];
    for &s in &grid.skipped {
        skipped[s as usize] = true;
    }
    for i in (0..n).filter(|&i| !skipped[i]) {
        let found = fwd[i] || rev[i];
        if found {
            report.tp += 1;
        } else {
            report.fn_ += 1;
        }
        report.found_forward += u64::from(fwd[i]);
        report.found_reverse += u64::from(rev[i]);
        if grid.nonisolated[i] {
            report.nonisolated_total += 1;
            report.nonisolated_found += u64::from(found);
        }
    }
    report
}

#[cfg(test)]
mod tests;
