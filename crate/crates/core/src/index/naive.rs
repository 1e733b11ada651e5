//! Reference construction by explicit suffix materialization. Quadratic; for
//! tests and small inputs only.

use super::{IndexTriplet, SuffixRef, END_MARKER};
use crate::error::{Error, Result};
use crate::sequences::ReadCollection;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Sym {
    // Variant order gives `$_i < $_j < A < C < G < T` (bases are ASCII).
    End(usize),
    Base(u8),
}

pub fn build_index_naive(c: &ReadCollection) -> Result<IndexTriplet> {
    if c.is_empty() {
        return Err(Error::domain("cannot index an empty collection"));
    }
    let mut suffixes: Vec<(Vec<Sym>, SuffixRef)> = Vec::new();
    for (r, seq) in c.sequences().enumerate() {
        for j in 0..=seq.len() {
            let mut s: Vec<Sym> = seq[j..].iter().map(|&b| Sym::Base(b)).collect();
            s.push(Sym::End(r));
            suffixes.push((s, SuffixRef::new(r as u32, j as u32)));
        }
    }
    suffixes.sort_by(|a, b| a.0.cmp(&b.0));

    let mut gsa = Vec::with_capacity(suffixes.len());
    let mut ebwt = Vec::with_capacity(suffixes.len());
    let mut lcp = Vec::with_capacity(suffixes.len());
    for (i, (s, at)) in suffixes.iter().enumerate() {
        gsa.push(*at);
        ebwt.push(if at.offset == 0 {
            END_MARKER
        } else {
            c.reads()[at.read as usize].bases[at.offset as usize - 1]
        });
        let h = if i == 0 {
            0
        } else {
            let prev = &suffixes[i - 1].0;
            prev.iter().zip(s).take_while(|(a, b)| a == b).count()
        };
        lcp.push(h as u32);
    }
    IndexTriplet::from_parts(gsa, ebwt, lcp, c.len())
}
