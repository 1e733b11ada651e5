//! Generalized suffix array, eBWT and LCP array of a read collection.
//!
//! Suffixes are ordered under `$_0 < $_1 < … < $_{m-1} < A < C < G < T`,
//! where `$_r` is the virtual end-marker of read `r`. All positions and
//! offsets in this module are 0-based: `SuffixRef { read, offset }` denotes
//! `reads[read][offset..] + $_read`, and `offset == len(read)` is the
//! end-marker-only suffix. The arrays are co-indexed over `0..P'` with
//! `P' = P + m`.

mod io;
mod naive;
mod navigate;
pub(crate) mod sais;

use std::cmp::Ordering;
use std::ops::Range;

pub use io::{
    open_readers, read_index, write_index, ArrayHeader, ArrayReader, EbwtReader, GsaReader,
    IndexPaths, LcpReader, Record, StreamStats, EBWT_MAGIC, FORMAT_VERSION, GSA_MAGIC, LCP_MAGIC,
};
pub use naive::build_index_naive;
pub use navigate::{invert_ebwt, Navigator};

use crate::error::{Error, Result};
use crate::sequences::{base_code, ReadCollection};

/// eBWT byte used for end-markers; the rank is carried by the GSA entry.
pub const END_MARKER: u8 = b'$';

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SuffixRef {
    pub read: u32,
    pub offset: u32,
}

impl SuffixRef {
    pub fn new(read: u32, offset: u32) -> Self {
        SuffixRef { read, offset }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EbwtSymbol {
    Base(u8),
    End(u32),
}

#[derive(Debug, Clone, Copy)]
pub struct IndexOptions {
    /// Upper bound on `P'`; larger collections fail with a capacity error.
    pub max_symbols: u64,
}

impl Default for IndexOptions {
    fn default() -> Self {
        IndexOptions {
            max_symbols: u32::MAX as u64 - 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexTriplet {
    gsa: Vec<SuffixRef>,
    ebwt: Vec<u8>,
    lcp: Vec<u32>,
    read_count: usize,
}

impl IndexTriplet {
    /// Assembles a triplet from raw arrays, checking the cheap structural
    /// invariants (equal lengths, one end-marker per read, lcp[0] = 0).
    pub fn from_parts(
        gsa: Vec<SuffixRef>,
        ebwt: Vec<u8>,
        lcp: Vec<u32>,
        read_count: usize,
    ) -> Result<Self> {
        if gsa.len() != ebwt.len() || gsa.len() != lcp.len() {
            return Err(Error::integrity(format!(
                "array lengths differ: gsa {}, ebwt {}, lcp {}",
                gsa.len(),
                ebwt.len(),
                lcp.len()
            )));
        }
        if lcp.first().is_some_and(|&v| v != 0) {
            return Err(Error::integrity("lcp[0] must be 0"));
        }
        let mut ends = 0;
        for (i, (&sym, s)) in ebwt.iter().zip(&gsa).enumerate() {
            if sym == END_MARKER {
                ends += 1;
                if s.offset != 0 {
                    return Err(Error::integrity(format!(
                        "end-marker at {i} precedes a suffix at offset {}",
                        s.offset
                    )));
                }
            } else if base_code(sym).is_none() {
                return Err(Error::integrity(format!("invalid eBWT symbol at {i}")));
            }
            if s.read as usize >= read_count {
                return Err(Error::integrity(format!("gsa[{i}] names read {}", s.read)));
            }
        }
        if ends != read_count {
            return Err(Error::integrity(format!(
                "{ends} end-markers for {read_count} reads"
            )));
        }
        Ok(IndexTriplet {
            gsa,
            ebwt,
            lcp,
            read_count,
        })
    }

    pub fn len(&self) -> usize {
        self.gsa.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gsa.is_empty()
    }

    pub fn read_count(&self) -> usize {
        self.read_count
    }

    pub fn gsa(&self) -> &[SuffixRef] {
        &self.gsa
    }

    pub fn ebwt(&self) -> &[u8] {
        &self.ebwt
    }

    pub fn lcp(&self) -> &[u32] {
        &self.lcp
    }

    pub fn symbol(&self, i: usize) -> EbwtSymbol {
        match self.ebwt[i] {
            END_MARKER => EbwtSymbol::End(self.gsa[i].read),
            b => EbwtSymbol::Base(b),
        }
    }

    /// GSA range of suffixes having `pattern` as a prefix.
    pub fn pattern_range(&self, reads: &ReadCollection, pattern: &[u8]) -> Range<usize> {
        let cmp = |s: &SuffixRef| -> Ordering {
            let seq = &reads.reads()[s.read as usize].bases[s.offset as usize..];
            for (k, &p) in pattern.iter().enumerate() {
                match seq.get(k) {
                    // End-marker sorts before every base.
                    None => return Ordering::Less,
                    Some(&c) if c != p => return c.cmp(&p),
                    _ => {}
                }
            }
            Ordering::Equal
        };
        let lo = self.gsa.partition_point(|s| cmp(s) == Ordering::Less);
        let hi = self.gsa.partition_point(|s| cmp(s) != Ordering::Greater);
        lo..hi
    }
}

/// Builds the triplet by SA-IS over the concatenation
/// `R_0 $_0 R_1 $_1 … R_{m-1} $_{m-1} #`, where every end-marker is a
/// distinct symbol and `#` is a terminator below all of them.
pub fn build_index(c: &ReadCollection) -> Result<IndexTriplet> {
    build_index_with(c, &IndexOptions::default())
}

pub fn build_index_with(c: &ReadCollection, opts: &IndexOptions) -> Result<IndexTriplet> {
    if c.is_empty() {
        return Err(Error::domain("cannot index an empty collection"));
    }
    let m = c.len();
    let symbols = (c.total_length() + m) as u64;
    let limit = opts.max_symbols.min(u32::MAX as u64 - 2);
    if symbols > limit {
        return Err(Error::Capacity { symbols, limit });
    }

    let base_sym = |b: u8| m as u32 + 1 + base_code(b).expect("validated read") as u32;
    let mut text = Vec::with_capacity(symbols as usize + 1);
    let mut starts = Vec::with_capacity(m + 1);
    for (r, seq) in c.sequences().enumerate() {
        starts.push(text.len() as u32);
        text.extend(seq.iter().map(|&b| base_sym(b)));
        text.push(r as u32 + 1);
    }
    starts.push(text.len() as u32);
    text.push(0);

    let sa = sais::suffix_array(&text, m + 5);
    let lcp_full = sais::lcp_kasai(&text, &sa);

    let n = symbols as usize;
    let mut gsa = Vec::with_capacity(n);
    let mut ebwt = Vec::with_capacity(n);
    for &q in &sa[1..] {
        let read = starts.partition_point(|&s| s <= q) - 1;
        let offset = q - starts[read];
        gsa.push(SuffixRef::new(read as u32, offset));
        ebwt.push(if offset == 0 {
            END_MARKER
        } else {
            c.reads()[read].bases[offset as usize - 1]
        });
    }
    drop(sa);
    let mut lcp = lcp_full;
    lcp.remove(0);
    lcp[0] = 0;

    Ok(IndexTriplet {
        gsa,
        ebwt,
        lcp,
        read_count: m,
    })
}
