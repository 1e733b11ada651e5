//! LF/FL mapping over the eBWT and inversion back to reads.

use super::{IndexTriplet, END_MARKER};
use crate::error::{Error, Result};
use crate::sequences::{base_code, ReadCollection, Sample, ALPHABET};

const SAMPLE_RATE: usize = 64;

/// Rank/select support for LF and FL steps. The first `m` rows of the index
/// are the end-marker-only suffixes `$_0 … $_{m-1}`, followed by the `A`, `C`,
/// `G` and `T` blocks.
pub struct Navigator<'a> {
    idx: &'a IndexTriplet,
    /// First row of each base block.
    first_row: [usize; 4],
    /// Occurrences of each base in `ebwt[..k * SAMPLE_RATE]`.
    checkpoints: Vec<[u32; 4]>,
    /// eBWT row holding `$_r`, i.e. the row of suffix `(r, 0)`.
    end_rows: Vec<u32>,
}

impl<'a> Navigator<'a> {
    pub fn new(idx: &'a IndexTriplet) -> Result<Self> {
        let mut counts = [0u32; 4];
        let mut checkpoints = Vec::with_capacity(idx.len() / SAMPLE_RATE + 1);
        let mut end_rows = vec![u32::MAX; idx.read_count()];
        for (i, &sym) in idx.ebwt().iter().enumerate() {
            if i % SAMPLE_RATE == 0 {
                checkpoints.push(counts);
            }
            if sym == END_MARKER {
                let r = idx.gsa()[i].read as usize;
                if end_rows[r] != u32::MAX {
                    return Err(Error::integrity(format!("end-marker of read {r} appears twice")));
                }
                end_rows[r] = i as u32;
            } else {
                let c = base_code(sym)
                    .ok_or_else(|| Error::integrity(format!("invalid eBWT symbol at {i}")))?;
                counts[c as usize] += 1;
            }
        }
        checkpoints.push(counts);
        if let Some(r) = end_rows.iter().position(|&p| p == u32::MAX) {
            return Err(Error::integrity(format!("end-marker of read {r} missing")));
        }
        let mut first_row = [0usize; 4];
        let mut acc = idx.read_count();
        for c in 0..4 {
            first_row[c] = acc;
            acc += counts[c] as usize;
        }
        Ok(Navigator {
            idx,
            first_row,
            checkpoints,
            end_rows,
        })
    }

    fn check(&self, i: usize) -> Result<()> {
        if i >= self.idx.len() {
            Err(Error::OutOfRange {
                index: i,
                len: self.idx.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Occurrences of base code `c` in `ebwt[..i]`.
    fn rank(&self, c: usize, i: usize) -> usize {
        let block = i / SAMPLE_RATE;
        let mut n = self.checkpoints[block][c] as usize;
        let sym = ALPHABET[c];
        n += self.idx.ebwt()[block * SAMPLE_RATE..i]
            .iter()
            .filter(|&&b| b == sym)
            .count();
        n
    }

    /// Row of the `k`-th (0-based) occurrence of base code `c` in the eBWT.
    fn select(&self, c: usize, k: usize) -> Option<usize> {
        let block = self
            .checkpoints
            .partition_point(|cp| cp[c] as usize <= k)
            .checked_sub(1)?;
        let mut seen = self.checkpoints[block][c] as usize;
        let sym = ALPHABET[c];
        let start = block * SAMPLE_RATE;
        for (off, &b) in self.idx.ebwt()[start..].iter().enumerate() {
            if b == sym {
                if seen == k {
                    return Some(start + off);
                }
                seen += 1;
            }
        }
        None
    }

    /// Row of the suffix starting one symbol earlier in the same read; the
    /// first suffix of a read wraps to its end-marker-only suffix.
    pub fn lf(&self, i: usize) -> Result<usize> {
        self.check(i)?;
        let sym = self.idx.ebwt()[i];
        if sym == END_MARKER {
            return Ok(self.idx.gsa()[i].read as usize);
        }
        let c = base_code(sym).expect("validated on construction") as usize;
        Ok(self.first_row[c] + self.rank(c, i))
    }

    /// Inverse of [`Navigator::lf`].
    pub fn fl(&self, i: usize) -> Result<usize> {
        self.check(i)?;
        let m = self.idx.read_count();
        if i < m {
            return Ok(self.end_rows[i] as usize);
        }
        let c = (0..4).rev().find(|&c| self.first_row[c] <= i).expect("i >= m");
        self.select(c, i - self.first_row[c])
            .ok_or_else(|| Error::integrity(format!("row {i} has no eBWT counterpart")))
    }
}

/// Reconstructs every read by walking LF from its end-marker-only suffix.
/// Reads come back in end-marker rank order, all labelled sample 1 since the
/// index does not record sample membership.
pub fn invert_ebwt(idx: &IndexTriplet) -> Result<ReadCollection> {
    let nav = Navigator::new(idx)?;
    let n = idx.len();
    let mut visited = vec![false; n];
    let mut steps = 0usize;
    let mut reads = Vec::with_capacity(idx.read_count());
    for r in 0..idx.read_count() {
        let mut row = r;
        let mut rev = Vec::new();
        loop {
            if visited[row] {
                return Err(Error::integrity(format!("row {row} reached twice")));
            }
            visited[row] = true;
            steps += 1;
            let sym = idx.ebwt()[row];
            if sym == END_MARKER {
                let owner = idx.gsa()[row].read as usize;
                if owner != r {
                    return Err(Error::integrity(format!(
                        "walk from read {r} ended at end-marker of read {owner}"
                    )));
                }
                break;
            }
            rev.push(sym);
            row = nav.lf(row)?;
        }
        if rev.is_empty() {
            return Err(Error::integrity(format!("read {r} decodes to an empty string")));
        }
        rev.reverse();
        reads.push(rev);
    }
    if steps != n {
        return Err(Error::integrity(format!("inversion visited {steps} of {n} rows")));
    }
    ReadCollection::from_sequences(reads, Sample::First)
}
