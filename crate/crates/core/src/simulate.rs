//! Desk-scale ground truth: random genomes, planted SNPs, uniform-error reads
//! and exact context-length oracles.
//!
//! All genome coordinates are 0-based. A read window starts at `genome_pos`
//! and covers `genome_pos..genome_pos + r` of the forward strand; reverse
//! reads are the reverse complement of that window.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::index::sais;
use crate::sequences::{base_code, complement, reverse_complement, ReadCollection, Sample, ALPHABET};

/// Two variants closer than this many bases make both non-isolated.
pub const NONISOLATED_WINDOW: usize = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strand {
    Forward,
    Reverse,
}

impl Strand {
    pub fn symbol(self) -> char {
        match self {
            Strand::Forward => '+',
            Strand::Reverse => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadOrigin {
    pub genome_pos: usize,
    pub strand: Strand,
    pub sample: Sample,
    /// Offsets of substituted bases within the emitted read, ascending.
    pub errors: Vec<u32>,
}

impl ReadOrigin {
    /// Error offsets in forward-strand orientation (the orientation of the
    /// read copy that reads left to right along the genome).
    pub fn forward_errors(&self, read_len: usize) -> Vec<u32> {
        match self.strand {
            Strand::Forward => self.errors.clone(),
            Strand::Reverse => {
                let mut e: Vec<u32> = self.errors.iter().map(|&o| (read_len - 1) as u32 - o).collect();
                e.reverse();
                e
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variant {
    pub pos: usize,
    pub reference: u8,
    pub alt: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GroundTruth {
    pub genome: Vec<u8>,
    pub variants: Vec<Variant>,
    pub origins: Vec<ReadOrigin>,
}

impl GroundTruth {
    pub fn is_nonisolated(&self, idx: usize) -> bool {
        nonisolated_flags(&self.variants)[idx]
    }
}

/// For each variant (sorted by position), whether another lies within
/// [`NONISOLATED_WINDOW`] bases.
pub fn nonisolated_flags(variants: &[Variant]) -> Vec<bool> {
    (0..variants.len())
        .map(|i| {
            let near = |j: usize| variants[i].pos.abs_diff(variants[j].pos) <= NONISOLATED_WINDOW;
            (i > 0 && near(i - 1)) || (i + 1 < variants.len() && near(i + 1))
        })
        .collect()
}

pub fn random_genome(n: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| ALPHABET[rng.random_range(0..4)]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadParams {
    pub reads: usize,
    pub read_len: usize,
    pub epsilon: f64,
    pub seed: u64,
}

impl ReadParams {
    /// Read count giving mean coverage `coverage` on a genome of length `n`.
    pub fn reads_for_coverage(coverage: f64, n: usize, read_len: usize) -> usize {
        (coverage * n as f64 / read_len as f64).round() as usize
    }
}

/// Samples `params.reads` windows uniformly from `g` (uniform strand) with
/// i.i.d. substitutions at rate `epsilon`.
pub fn simulate_reads(
    g: &[u8],
    params: &ReadParams,
    sample: Sample,
) -> Result<(ReadCollection, Vec<ReadOrigin>)> {
    let r = params.read_len;
    if r == 0 || r > g.len() {
        return Err(Error::domain(format!(
            "read length {r} must be in 1..={}",
            g.len()
        )));
    }
    if !(0.0..1.0).contains(&params.epsilon) {
        return Err(Error::domain("epsilon must lie in [0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut seqs = Vec::with_capacity(params.reads);
    let mut origins = Vec::with_capacity(params.reads);
    for _ in 0..params.reads {
        let genome_pos = rng.random_range(0..=g.len() - r);
        let strand = if rng.random_bool(0.5) {
            Strand::Forward
        } else {
            Strand::Reverse
        };
        let window = &g[genome_pos..genome_pos + r];
        let mut read = match strand {
            Strand::Forward => window.to_vec(),
            Strand::Reverse => reverse_complement(window)?,
        };
        let mut errors = Vec::new();
        if params.epsilon > 0.0 {
            for (o, b) in read.iter_mut().enumerate() {
                if rng.random_bool(params.epsilon) {
                    let others: Vec<u8> = ALPHABET.iter().copied().filter(|&c| c != *b).collect();
                    *b = *others.choose(&mut rng).unwrap();
                    errors.push(o as u32);
                }
            }
        }
        seqs.push(read);
        origins.push(ReadOrigin {
            genome_pos,
            strand,
            sample,
            errors,
        });
    }
    Ok((ReadCollection::from_sequences(seqs, sample)?, origins))
}

#[derive(Debug, Clone, PartialEq)]
pub enum MutationPlan {
    /// Explicit `(position, alt)` substitutions.
    Explicit(Vec<(usize, u8)>),
    Random {
        /// Expected variants per base.
        density: f64,
        /// Minimum distance between independent variant groups.
        min_spacing: usize,
        /// Fraction of groups planted as a close pair.
        nonisolated_fraction: f64,
        /// No variant closer than this to either genome end.
        margin: usize,
    },
}

impl MutationPlan {
    pub fn random(density: f64) -> Self {
        MutationPlan::Random {
            density,
            min_spacing: 2 * NONISOLATED_WINDOW + 2,
            nonisolated_fraction: 0.0,
            margin: 0,
        }
    }
}

/// Applies substitutions to a copy of `g`; returns the mutated genome and the
/// variants sorted by position.
pub fn mutate_genome(g: &[u8], plan: &MutationPlan, seed: u64) -> Result<(Vec<u8>, Vec<Variant>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edits: Vec<(usize, u8)> = match plan {
        MutationPlan::Explicit(list) => list.clone(),
        MutationPlan::Random {
            density,
            min_spacing,
            nonisolated_fraction,
            margin,
        } => plan_random(g, *density, *min_spacing, *nonisolated_fraction, *margin, &mut rng)?,
    };
    let mut out = g.to_vec();
    let mut seen = BTreeSet::new();
    let mut variants = Vec::with_capacity(edits.len());
    for (pos, alt) in edits {
        if pos >= g.len() {
            return Err(Error::OutOfRange { index: pos, len: g.len() });
        }
        if base_code(alt).is_none() {
            return Err(Error::InvalidBase { symbol: alt as char, offset: pos });
        }
        if g[pos] == alt {
            return Err(Error::domain(format!("variant at {pos} does not change the base")));
        }
        if !seen.insert(pos) {
            return Err(Error::domain(format!("overlapping variants at position {pos}")));
        }
        out[pos] = alt;
        variants.push(Variant {
            pos,
            reference: g[pos],
            alt,
        });
    }
    variants.sort_by_key(|v| v.pos);
    Ok((out, variants))
}

fn plan_random(
    g: &[u8],
    density: f64,
    min_spacing: usize,
    nonisolated_fraction: f64,
    margin: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(usize, u8)>> {
    if !(0.0..=1.0).contains(&density) || !(0.0..=1.0).contains(&nonisolated_fraction) {
        return Err(Error::domain("density and non-isolated fraction must lie in [0, 1]"));
    }
    let n = g.len();
    if 2 * margin + NONISOLATED_WINDOW >= n {
        return Err(Error::domain("genome too short for the requested margin"));
    }
    let target = (density * n as f64).round() as usize;
    let (lo, hi) = (margin, n - margin - NONISOLATED_WINDOW);
    // Each group occupies [start, end]; groups are kept min_spacing apart.
    let mut groups: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut planted = Vec::new();
    let mut attempts = 0;
    while planted.len() < target && attempts < 100 * target.max(1) {
        attempts += 1;
        let start = rng.random_range(lo..hi);
        let pair = planted.len() + 1 < target && rng.random_bool(nonisolated_fraction);
        let end = if pair {
            start + rng.random_range(1..=NONISOLATED_WINDOW - 1)
        } else {
            start
        };
        let clash = groups
            .range((start.saturating_sub(min_spacing + NONISOLATED_WINDOW), 0)..=(end + min_spacing, usize::MAX))
            .any(|&(s, e)| s < end + min_spacing && e + min_spacing > start);
        if clash {
            continue;
        }
        groups.insert((start, end));
        for pos in if pair { vec![start, end] } else { vec![start] } {
            let alts: Vec<u8> = ALPHABET.iter().copied().filter(|&c| c != g[pos]).collect();
            planted.push((pos, *alts.choose(rng).unwrap()));
        }
    }
    if planted.len() < target {
        log::warn!("planted {} of {target} variants: genome too crowded", planted.len());
    }
    Ok(planted)
}

/// Result of the shortest-unique-context search for one position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextInfo {
    pub k: usize,
    pub ambiguous: bool,
    /// Number of occurrences of the context when ambiguous, else 1.
    pub multiplicity: usize,
}

fn count_occurrences(texts: &[&[u8]], pat: &[u8]) -> usize {
    texts
        .iter()
        .map(|t| t.windows(pat.len()).filter(|w| *w == pat).count())
        .sum()
}

fn context_brute(texts: &[&[u8]], g: &[u8], i: usize, r: usize) -> Result<ContextInfo> {
    if i + 1 >= g.len() {
        return Err(Error::OutOfRange { index: i, len: g.len() - 1 });
    }
    if r < 2 {
        return Err(Error::domain("read length must be at least 2"));
    }
    let avail = g.len() - i - 1;
    for k in 1..r.min(avail + 1) {
        if count_occurrences(texts, &g[i + 1..i + 1 + k]) == 1 {
            return Ok(ContextInfo {
                k,
                ambiguous: false,
                multiplicity: 1,
            });
        }
    }
    let k = r - 1;
    let pat = &g[i + 1..i + 1 + k.min(avail)];
    Ok(ContextInfo {
        k,
        ambiguous: true,
        multiplicity: count_occurrences(texts, pat),
    })
}

/// Smallest `k < r` such that `G[i+1..=i+k]` occurs once in `g`, by direct
/// occurrence counting. When no such `k` exists the context is ambiguous,
/// `k = r-1` and the multiplicity counts occurrences of the longest
/// available context.
pub fn context_oracle(g: &[u8], i: usize, r: usize) -> Result<ContextInfo> {
    context_brute(&[g], g, i, r)
}

/// As [`context_oracle`], counting occurrences on both strands of `g`.
pub fn context_oracle_both_strands(g: &[u8], i: usize, r: usize) -> Result<ContextInfo> {
    let rc = reverse_complement(g)?;
    context_brute(&[g, &rc], g, i, r)
}

/// Suffix-array backed context oracle for whole genomes.
pub struct ContextOracle {
    n: usize,
    rank: Vec<u32>,
    sa: Vec<u32>,
    lcp: Vec<u32>,
}

impl ContextOracle {
    /// Indexes `g`, and also `rc(g)` when `both_strands` is set.
    pub fn new(g: &[u8], both_strands: bool) -> Result<Self> {
        let mut text: Vec<u32> = Vec::with_capacity(2 * g.len() + 2);
        let code = |b: u8| -> Result<u32> {
            base_code(b)
                .map(|c| c as u32 + 2)
                .ok_or(Error::InvalidBase { symbol: b as char, offset: 0 })
        };
        for &b in g {
            text.push(code(b)?);
        }
        if both_strands {
            // A unique separator keeps matches from spanning the strands.
            text.push(1);
            for &b in g.iter().rev() {
                text.push(code(complement(b).unwrap())?);
            }
        }
        text.push(0);
        let sa = sais::suffix_array(&text, 6);
        let lcp = sais::lcp_kasai(&text, &sa);
        let mut rank = vec![0u32; text.len()];
        for (q, &p) in sa.iter().enumerate() {
            rank[p as usize] = q as u32;
        }
        Ok(ContextOracle {
            n: g.len(),
            rank,
            sa,
            lcp,
        })
    }

    pub fn query(&self, i: usize, r: usize) -> Result<ContextInfo> {
        if i + 1 >= self.n {
            return Err(Error::OutOfRange { index: i, len: self.n - 1 });
        }
        if r < 2 {
            return Err(Error::domain("read length must be at least 2"));
        }
        let start = i + 1;
        let avail = self.n - start;
        let q = self.rank[start] as usize;
        let next = self.lcp.get(q + 1).copied().unwrap_or(0);
        let unique = self.lcp[q].max(next) as usize + 1;
        if unique < r && unique <= avail {
            return Ok(ContextInfo {
                k: unique,
                ambiguous: false,
                multiplicity: 1,
            });
        }
        let need = (r - 1).min(avail) as u32;
        let mut lo = q;
        while lo > 0 && self.lcp[lo] >= need {
            lo -= 1;
        }
        let mut hi = q;
        while hi + 1 < self.lcp.len() && self.lcp[hi + 1] >= need {
            hi += 1;
        }
        Ok(ContextInfo {
            k: r - 1,
            ambiguous: true,
            multiplicity: hi - lo + 1,
        })
    }

    pub fn suffix_array(&self) -> &[u32] {
        &self.sa
    }
}

pub fn write_truth_tsv<W: Write>(mut out: W, variants: &[Variant]) -> std::io::Result<()> {
    writeln!(out, "position\tref\talt")?;
    for v in variants {
        writeln!(out, "{}\t{}\t{}", v.pos, v.reference as char, v.alt as char)?;
    }
    Ok(())
}

/// Parses `position ref alt` lines (0-based positions, header optional,
/// `#` comments ignored).
pub fn read_truth_tsv(path: &Path) -> Result<Vec<Variant>> {
    let file = std::fs::File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput(path.to_path_buf()),
        _ => Error::io(format!("opening {}", path.display()), e),
    })?;
    let mut variants = Vec::new();
    for (n, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (n == 0 && line.starts_with("position")) {
            continue;
        }
        let bad = |msg: &str| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            msg: msg.to_string(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() < 3 {
            return Err(bad("expected position, ref and alt"));
        }
        let pos = f[0].parse().map_err(|_| bad("position is not an integer"))?;
        let base = |s: &str| -> Result<u8> {
            match s.as_bytes() {
                [b] if base_code(b.to_ascii_uppercase()).is_some() => Ok(b.to_ascii_uppercase()),
                _ => Err(bad("allele must be one of A, C, G, T")),
            }
        };
        variants.push(Variant {
            pos,
            reference: base(f[1])?,
            alt: base(f[2])?,
        });
    }
    variants.sort_by_key(|v| v.pos);
    Ok(variants)
}

pub fn write_origins_tsv<W: Write>(mut out: W, origins: &[ReadOrigin]) -> std::io::Result<()> {
    writeln!(out, "read\tsample\tposition\tstrand\terrors")?;
    for (q, o) in origins.iter().enumerate() {
        let mut errs = String::new();
        for (j, e) in o.errors.iter().enumerate() {
            if j > 0 {
                errs.push(',');
            }
            write!(errs, "{e}").unwrap();
        }
        if errs.is_empty() {
            errs.push('.');
        }
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{errs}",
            q,
            o.sample.label(),
            o.genome_pos,
            o.strand.symbol()
        )?;
    }
    Ok(())
}
