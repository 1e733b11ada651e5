//! SNP calling between two samples from positional clusters.
//!
//! Pass 1 streams the clusters together with the GSA, eBWT and LCP arrays
//! (each read once, front to back). Clusters passing the Poisson length test
//! whose per-sample plurality letters differ become candidates; the read
//! coordinates of their rows go to a [`CoordBuffer`]. Pass 2 streams the read
//! set once in rank order, cuts the left and right snippets around every
//! buffered coordinate, and assembles contexts per candidate.
//!
//! Row coordinates follow the index: the eBWT letter of row `(read, offset)`
//! is `read[offset-1]`, the allele column, and the suffix starting at
//! `offset` is the right context.

pub mod buffer;
pub mod output;

use std::path::Path;

use rayon::prelude::*;

use crate::clustering::{Cluster, ClusterReader};
use crate::error::{Error, Result};
use crate::index::{open_readers, EbwtReader, GsaReader, IndexPaths, IndexTriplet, LcpReader, StreamStats, SuffixRef};
use crate::sequences::{base_code, FastaReader, ReadCollection, Sample, ALPHABET};
use crate::stats::{cluster_length_band, Band, PoissonModel};

pub use buffer::{BufferStats, Coord, CoordBuffer};
pub use output::{read_calls, write_calls, CallPair};

pub const DEFAULT_LEFT: usize = 20;
pub const DEFAULT_RIGHT: usize = 30;
pub const DEFAULT_MIN_PER_SAMPLE: u32 = 4;
pub const DEFAULT_MAX_VARIANTS: usize = 3;
pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_MIN_CONSENSUS: f64 = 0.6;
pub const DEFAULT_BUFFER_CAP: usize = 1 << 22;

/// One index row as seen by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Row {
    pub suffix: SuffixRef,
    pub symbol: u8,
    pub lcp: u32,
}

fn sample_of(read: u32, boundary: u32) -> Sample {
    if read < boundary {
        Sample::First
    } else {
        Sample::Second
    }
}

/// Rows `[c.start, c.end]` of an in-memory index.
pub fn cluster_rows(idx: &IndexTriplet, c: &Cluster) -> Vec<Row> {
    (c.start as usize..=c.end as usize)
        .map(|i| Row {
            suffix: idx.gsa()[i],
            symbol: idx.ebwt()[i],
            lcp: idx.lcp()[i],
        })
        .collect()
}

/// Per-sample letter counts of a cluster, in `A C G T` order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClusterProfile {
    pub counts: [[u32; 4]; 2],
    pub end_markers: u32,
}

impl ClusterProfile {
    pub fn from_rows(rows: &[Row], sample_boundary: u32) -> Self {
        let mut p = ClusterProfile::default();
        for row in rows {
            match base_code(row.symbol) {
                Some(b) => p.counts[sample_of(row.suffix.read, sample_boundary).index()][b as usize] += 1,
                None => p.end_markers += 1,
            }
        }
        p
    }

    pub fn sample_size(&self, s: Sample) -> u32 {
        self.counts[s.index()].iter().sum()
    }

    /// Letters of both samples, end-markers excluded.
    pub fn size(&self) -> u32 {
        self.sample_size(Sample::First) + self.sample_size(Sample::Second)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RejectReason {
    TooSmall,
    LeftTail,
    RightTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterVerdict {
    Accept,
    Reject(RejectReason),
}

/// Length test of one cluster against the two-tailed Poisson band of `model`
/// (multiplicity 1) plus the per-sample minimum.
pub fn filter_cluster(p: &ClusterProfile, model: &PoissonModel, alpha: f64, min_len: u32) -> Result<FilterVerdict> {
    if model.multiplicity != 1 {
        return Err(Error::domain("the length filter expects multiplicity 1"));
    }
    Ok(filter_with_band(p, cluster_length_band(model, alpha)?, min_len))
}

pub fn filter_with_band(p: &ClusterProfile, band: Band, min_len: u32) -> FilterVerdict {
    if p.sample_size(Sample::First) < min_len || p.sample_size(Sample::Second) < min_len {
        return FilterVerdict::Reject(RejectReason::TooSmall);
    }
    let size = u64::from(p.size());
    if size < band.lo {
        FilterVerdict::Reject(RejectReason::LeftTail)
    } else if size > band.hi {
        FilterVerdict::Reject(RejectReason::RightTail)
    } else {
        FilterVerdict::Accept
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AlleleCall {
    pub base: u8,
    pub count: u32,
    /// Another letter reached the same count.
    pub tied: bool,
}

/// Most frequent letter; ties go to the first letter in `A C G T` order.
pub fn plurality(counts: &[u32; 4]) -> Option<AlleleCall> {
    let best = *counts.iter().max()?;
    if best == 0 {
        return None;
    }
    let at = counts.iter().position(|&c| c == best).unwrap();
    Some(AlleleCall {
        base: ALPHABET[at],
        count: best,
        tied: counts.iter().filter(|&&c| c == best).count() > 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alleles {
    pub first: AlleleCall,
    pub second: AlleleCall,
}

impl Alleles {
    pub fn low_confidence(&self) -> bool {
        self.first.tied || self.second.tied
    }
}

/// Plurality letters of both samples when they differ.
pub fn extract_alleles(p: &ClusterProfile) -> Option<Alleles> {
    let first = plurality(&p.counts[0])?;
    let second = plurality(&p.counts[1])?;
    (first.base != second.base).then_some(Alleles { first, second })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeakRead {
    pub coord: SuffixRef,
    /// Row index within the cluster.
    pub slot: usize,
    /// LCP with the previous row of the same sample; 0 for a lone row.
    pub clean_len: u32,
}

/// Rightmost LCP maximum among the rows of `sample`, where the LCP between
/// two same-sample rows is the minimum over the rows between them.
pub fn sample_peak(rows: &[Row], sample_boundary: u32, sample: Sample) -> Option<PeakRead> {
    let mut first = None;
    let mut best: Option<PeakRead> = None;
    let mut running: Option<u32> = None;
    for (slot, row) in rows.iter().enumerate() {
        if let Some(m) = running.as_mut() {
            *m = (*m).min(row.lcp);
        }
        if sample_of(row.suffix.read, sample_boundary) != sample {
            continue;
        }
        let here = |clean_len| PeakRead {
            coord: row.suffix,
            slot,
            clean_len,
        };
        match running {
            // The first row has no in-cluster predecessor; it is the peak
            // only when the sample has no other row.
            None => first = Some(here(0)),
            Some(m) => {
                if best.is_none_or(|b| m >= b.clean_len) {
                    best = Some(here(m));
                }
            }
        }
        running = Some(u32::MAX);
    }
    best.or(first)
}

pub fn peak_read(idx: &IndexTriplet, c: &Cluster, sample_boundary: u32, sample: Sample) -> Result<PeakRead> {
    sample_peak(&cluster_rows(idx, c), sample_boundary, sample)
        .ok_or_else(|| Error::domain(format!("{} has no rows in the cluster", sample.label())))
}

/// Column-wise plurality over right-aligned `prefixes`, `len` columns wide.
/// `None` when a column is uncovered or its plurality share is below
/// `min_frac`.
pub fn consensus_left(prefixes: &[&[u8]], len: usize, min_frac: f64) -> Option<Vec<u8>> {
    let mut out = Vec::with_capacity(len);
    for back in (1..=len).rev() {
        let mut counts = [0u32; 4];
        for p in prefixes {
            if p.len() >= back {
                if let Some(b) = base_code(p[p.len() - back]) {
                    counts[b as usize] += 1;
                }
            }
        }
        let total: u32 = counts.iter().sum();
        let win = plurality(&counts)?;
        if f64::from(win.count) < min_frac * f64::from(total) {
            return None;
        }
        out.push(win.base);
    }
    Some(out)
}

/// The L-window ending at the allele column for read coordinates of one
/// sample: the consensus of the `l-1` bases before the allele, followed by
/// the plurality allele. Coordinates at offset 0 carry no prefix.
pub fn assemble_left_context(reads: &ReadCollection, coords: &[SuffixRef], l: usize, min_frac: f64) -> Option<Vec<u8>> {
    if l == 0 {
        return None;
    }
    let mut prefixes = Vec::new();
    let mut alleles = [0u32; 4];
    for c in coords.iter().filter(|c| c.offset > 0) {
        let seq = &reads.get(c.read as usize)?.bases;
        let at = c.offset as usize - 1;
        prefixes.push(&seq[at.saturating_sub(l - 1)..at]);
        alleles[base_code(seq[at])? as usize] += 1;
    }
    let mut window = consensus_left(&prefixes, l - 1, min_frac)?;
    window.push(plurality(&alleles)?.base);
    Some(window)
}

/// Right context: the peak snippet up to its clean length, then per-column
/// plurality (peak letter first among ties), stopping at the first column
/// no snippet covers.
pub fn right_context(snippets: &[&[u8]], peak: usize, clean_len: usize, len: usize) -> Vec<u8> {
    let template = snippets[peak];
    let mut out = Vec::with_capacity(len);
    for j in 0..len {
        if j < clean_len && j < template.len() {
            out.push(template[j]);
            continue;
        }
        let mut counts = [0u32; 4];
        for s in snippets {
            if let Some(b) = s.get(j).and_then(|&b| base_code(b)) {
                counts[b as usize] += 1;
            }
        }
        let Some(win) = plurality(&counts) else { break };
        let pick = match template.get(j).and_then(|&b| base_code(b)) {
            Some(t) if counts[t as usize] == win.count => template[j],
            _ => win.base,
        };
        out.push(pick);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallParams {
    /// Window ending with the allele (`-L`).
    pub left: usize,
    /// Right context length (`-R`).
    pub right: usize,
    pub min_per_sample: u32,
    /// Variants per call, main SNP included (`-v`).
    pub max_variants: usize,
    pub alpha: f64,
    pub min_consensus: f64,
    /// Cluster-size model; `reads` counts both samples before augmentation.
    pub model: PoissonModel,
    /// Rank of the first sample-2 read in the indexed collection.
    pub sample_boundary: u32,
    pub buffer_cap: usize,
    pub threads: usize,
}

impl CallParams {
    pub fn new(model: PoissonModel, sample_boundary: u32) -> Self {
        CallParams {
            left: DEFAULT_LEFT,
            right: DEFAULT_RIGHT,
            min_per_sample: DEFAULT_MIN_PER_SAMPLE,
            max_variants: DEFAULT_MAX_VARIANTS,
            alpha: DEFAULT_ALPHA,
            min_consensus: DEFAULT_MIN_CONSENSUS,
            model,
            sample_boundary,
            buffer_cap: DEFAULT_BUFFER_CAP,
            threads: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.left == 0 || self.right == 0 {
            return Err(Error::domain("context windows must be positive"));
        }
        if self.max_variants == 0 {
            return Err(Error::domain("max variants must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.min_consensus) {
            return Err(Error::domain("consensus fraction must lie in [0, 1]"));
        }
        if self.threads == 0 {
            return Err(Error::domain("thread count must be positive"));
        }
        self.model.validate()?;
        cluster_length_band(&self.model, self.alpha).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleCall {
    /// `L-1` bases preceding the allele.
    pub left: Vec<u8>,
    pub allele: u8,
    pub right: Vec<u8>,
    /// Letters of this sample in the cluster.
    pub support: u32,
    pub peak: SuffixRef,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnpCall {
    pub id: u64,
    pub cluster: Cluster,
    pub samples: [SampleCall; 2],
    /// Further 0-based columns where the left windows differ.
    pub extra_columns: Vec<usize>,
    pub low_confidence: bool,
}

impl SnpCall {
    pub fn snp_column(&self) -> usize {
        self.samples[0].left.len()
    }

    /// L-window including the allele.
    pub fn left_window(&self, s: Sample) -> Vec<u8> {
        let c = &self.samples[s.index()];
        let mut w = c.left.clone();
        w.push(c.allele);
        w
    }

    pub fn sequence(&self, s: Sample) -> Vec<u8> {
        let mut seq = self.left_window(s);
        seq.extend_from_slice(&self.samples[s.index()].right);
        seq
    }
}

/// Counters proving the pass structure and bounding buffer memory.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallStats {
    pub gsa: StreamStats,
    pub ebwt: StreamStats,
    pub lcp: StreamStats,
    pub clusters_in_file: Option<u64>,
    pub clusters_read: u64,
    pub too_small: u64,
    pub left_tail: u64,
    pub right_tail: u64,
    pub no_variant: u64,
    pub candidates: u64,
    pub candidate_rows: u64,
    pub no_consensus: u64,
    pub too_many_variants: u64,
    pub calls: u64,
    pub buffer: BufferStats,
    /// Bases held in snippets after pass 2.
    pub snippet_bases: u64,
    pub read_records: u64,
    pub reads_passes: u32,
}

/// Sequential access to index rows.
pub trait RowSource {
    fn total_rows(&self) -> u64;
    fn next_row(&mut self) -> Result<Option<Row>>;
    /// Consumption of the GSA, eBWT and LCP streams.
    fn stream_stats(&self) -> [StreamStats; 3];
}

pub struct MemoryRows<'a> {
    idx: &'a IndexTriplet,
    pos: usize,
}

impl<'a> MemoryRows<'a> {
    pub fn new(idx: &'a IndexTriplet) -> Self {
        MemoryRows { idx, pos: 0 }
    }
}

impl RowSource for MemoryRows<'_> {
    fn total_rows(&self) -> u64 {
        self.idx.len() as u64
    }

    fn next_row(&mut self) -> Result<Option<Row>> {
        if self.pos == self.idx.len() {
            return Ok(None);
        }
        let i = self.pos;
        self.pos += 1;
        Ok(Some(Row {
            suffix: self.idx.gsa()[i],
            symbol: self.idx.ebwt()[i],
            lcp: self.idx.lcp()[i],
        }))
    }

    fn stream_stats(&self) -> [StreamStats; 3] {
        let s = StreamStats {
            len: self.idx.len() as u64,
            items_read: self.pos as u64,
        };
        [s; 3]
    }
}

pub struct FileRows {
    gsa: GsaReader,
    ebwt: EbwtReader,
    lcp: LcpReader,
}

impl FileRows {
    pub fn open(paths: &IndexPaths) -> Result<Self> {
        let (gsa, ebwt, lcp) = open_readers(paths)?;
        Ok(FileRows { gsa, ebwt, lcp })
    }

    pub fn read_count(&self) -> u64 {
        self.gsa.header().reads
    }
}

impl RowSource for FileRows {
    fn total_rows(&self) -> u64 {
        self.gsa.header().len
    }

    fn next_row(&mut self) -> Result<Option<Row>> {
        match (self.gsa.next_item()?, self.ebwt.next_item()?, self.lcp.next_item()?) {
            (Some(suffix), Some(symbol), Some(lcp)) => Ok(Some(Row { suffix, symbol, lcp })),
            (None, None, None) => Ok(None),
            _ => Err(Error::integrity("index arrays end at different rows")),
        }
    }

    fn stream_stats(&self) -> [StreamStats; 3] {
        [self.gsa.stats(), self.ebwt.stats(), self.lcp.stats()]
    }
}

struct Candidate {
    cluster: Cluster,
    alleles: Alleles,
    peaks: [PeakRead; 2],
    /// Sample and offset per row.
    slots: Vec<(Sample, u32)>,
    supports: [u32; 2],
}

#[derive(Default, Clone)]
struct Snippets {
    left: Vec<Vec<u8>>,
    right: Vec<Vec<u8>>,
}

enum Outcome {
    Call(SnpCall),
    NoConsensus,
    TooManyVariants,
}

fn assemble(cand: &Candidate, snips: &Snippets, params: &CallParams) -> Outcome {
    let mut samples = Vec::with_capacity(2);
    for (s, allele) in [(Sample::First, cand.alleles.first), (Sample::Second, cand.alleles.second)] {
        let rows: Vec<usize> = (0..cand.slots.len()).filter(|&i| cand.slots[i].0 == s).collect();
        let prefixes: Vec<&[u8]> = rows
            .iter()
            .filter(|&&i| cand.slots[i].1 > 0)
            .map(|&i| snips.left[i].as_slice())
            .collect();
        let Some(left) = consensus_left(&prefixes, params.left - 1, params.min_consensus) else {
            return Outcome::NoConsensus;
        };
        let peak = &cand.peaks[s.index()];
        let rights: Vec<&[u8]> = rows.iter().map(|&i| snips.right[i].as_slice()).collect();
        let peak_at = rows.iter().position(|&i| i == peak.slot).expect("peak row belongs to its sample");
        let right = right_context(&rights, peak_at, peak.clean_len as usize, params.right);
        samples.push(SampleCall {
            left,
            allele: allele.base,
            right,
            support: cand.supports[s.index()],
            peak: peak.coord,
        });
    }
    let extra: Vec<usize> = (0..params.left - 1)
        .rev()
        .filter(|&j| samples[0].left[j] != samples[1].left[j])
        .collect();
    if extra.len() + 1 > params.max_variants {
        return Outcome::TooManyVariants;
    }
    let mut extra_columns = extra;
    extra_columns.sort_unstable();
    let second = samples.pop().unwrap();
    let first = samples.pop().unwrap();
    Outcome::Call(SnpCall {
        id: 0,
        cluster: cand.cluster,
        samples: [first, second],
        extra_columns,
        low_confidence: cand.alleles.low_confidence(),
    })
}

/// Runs both passes. `reads` must yield the indexed collection in rank
/// order; `read_count` is the number of reads the index was built from.
pub fn run_calls<R, C, Q>(
    rows: &mut R,
    clusters: C,
    reads: Q,
    read_count: u64,
    params: &CallParams,
) -> Result<(Vec<SnpCall>, CallStats)>
where
    R: RowSource,
    C: IntoIterator<Item = Result<Cluster>>,
    Q: IntoIterator<Item = Result<Vec<u8>>>,
{
    params.validate()?;
    let band = cluster_length_band(&params.model, params.alpha)?;
    let mut stats = CallStats::default();
    let mut buffer = CoordBuffer::new(params.buffer_cap);
    let mut candidates: Vec<Candidate> = Vec::new();
    let total = rows.total_rows();
    let truncated = || Error::integrity("index ended inside a cluster");

    let mut pos = 0u64;
    for c in clusters {
        let c = c?;
        stats.clusters_read += 1;
        if c.start < pos || c.end < c.start || c.end >= total {
            return Err(Error::integrity(format!(
                "cluster [{}, {}] is out of order or beyond the index ({total} rows)",
                c.start, c.end
            )));
        }
        while pos < c.start {
            rows.next_row()?.ok_or_else(truncated)?;
            pos += 1;
        }
        let mut crow = Vec::with_capacity(c.size() as usize);
        while pos <= c.end {
            crow.push(rows.next_row()?.ok_or_else(truncated)?);
            pos += 1;
        }
        let profile = ClusterProfile::from_rows(&crow, params.sample_boundary);
        match filter_with_band(&profile, band, params.min_per_sample) {
            FilterVerdict::Reject(RejectReason::TooSmall) => {
                stats.too_small += 1;
                continue;
            }
            FilterVerdict::Reject(RejectReason::LeftTail) => {
                stats.left_tail += 1;
                continue;
            }
            FilterVerdict::Reject(RejectReason::RightTail) => {
                stats.right_tail += 1;
                continue;
            }
            FilterVerdict::Accept => {}
        }
        let Some(alleles) = extract_alleles(&profile) else {
            stats.no_variant += 1;
            continue;
        };
        let peak = |s| sample_peak(&crow, params.sample_boundary, s).expect("sample has letters");
        let cand_id = u32::try_from(candidates.len()).map_err(|_| Error::domain("too many candidates"))?;
        let mut slots = Vec::with_capacity(crow.len());
        for (slot, row) in crow.iter().enumerate() {
            buffer.push(Coord {
                read: row.suffix.read,
                offset: row.suffix.offset,
                candidate: cand_id,
                slot: slot as u32,
            })?;
            slots.push((sample_of(row.suffix.read, params.sample_boundary), row.suffix.offset));
        }
        stats.candidate_rows += crow.len() as u64;
        candidates.push(Candidate {
            cluster: c,
            alleles,
            peaks: [peak(Sample::First), peak(Sample::Second)],
            slots,
            supports: [profile.sample_size(Sample::First), profile.sample_size(Sample::Second)],
        });
    }
    while rows.next_row()?.is_some() {}
    [stats.gsa, stats.ebwt, stats.lcp] = rows.stream_stats();
    stats.candidates = candidates.len() as u64;
    stats.buffer = buffer.stats();

    // Pass 2: one scan of the reads in rank order.
    let mut snippets: Vec<Snippets> = candidates
        .iter()
        .map(|c| Snippets {
            left: vec![Vec::new(); c.slots.len()],
            right: vec![Vec::new(); c.slots.len()],
        })
        .collect();
    let mut sorted = buffer.into_sorted();
    let mut next = sorted.next_coord()?;
    let mut rank = 0u64;
    stats.reads_passes = 1;
    for seq in reads {
        let seq = seq?;
        while let Some(c) = next.filter(|c| u64::from(c.read) == rank) {
            let off = c.offset as usize;
            if off > seq.len() {
                return Err(Error::integrity(format!(
                    "read {rank} has {} bases but the index refers to offset {off}",
                    seq.len()
                )));
            }
            let s = &mut snippets[c.candidate as usize];
            if off > 0 {
                let at = off - 1;
                s.left[c.slot as usize] = seq[at.saturating_sub(params.left - 1)..at].to_vec();
            }
            s.right[c.slot as usize] = seq[off..seq.len().min(off + params.right)].to_vec();
            stats.snippet_bases +=
                (s.left[c.slot as usize].len() + s.right[c.slot as usize].len()) as u64;
            next = sorted.next_coord()?;
        }
        rank += 1;
    }
    stats.read_records = rank;
    if let Some(c) = next {
        return Err(Error::integrity(format!(
            "index refers to read {} but the read set holds {rank}",
            c.read
        )));
    }
    if rank != read_count {
        return Err(Error::integrity(format!(
            "read set holds {rank} reads, the index was built from {read_count}"
        )));
    }

    let work = || -> Vec<Outcome> {
        candidates
            .par_iter()
            .zip(snippets.par_iter())
            .map(|(c, s)| assemble(c, s, params))
            .collect()
    };
    let outcomes = if params.threads == 1 {
        candidates
            .iter()
            .zip(&snippets)
            .map(|(c, s)| assemble(c, s, params))
            .collect()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(params.threads)
            .build()
            .map_err(|e| Error::domain(format!("cannot start thread pool: {e}")))?
            .install(work)
    };

    let mut calls = Vec::new();
    for o in outcomes {
        match o {
            Outcome::Call(mut call) => {
                call.id = calls.len() as u64 + 1;
                calls.push(call);
            }
            Outcome::NoConsensus => stats.no_consensus += 1,
            Outcome::TooManyVariants => stats.too_many_variants += 1,
        }
    }
    stats.calls = calls.len() as u64;
    Ok((calls, stats))
}

/// In-memory entry point: `reads` is the indexed collection.
pub fn call_snps(
    idx: &IndexTriplet,
    reads: &ReadCollection,
    clusters: &[Cluster],
    params: &CallParams,
) -> Result<(Vec<SnpCall>, CallStats)> {
    let mut rows = MemoryRows::new(idx);
    run_calls(
        &mut rows,
        clusters.iter().map(|&c| Ok(c)),
        reads.sequences().map(|s| Ok(s.to_vec())),
        idx.read_count() as u64,
        params,
    )
}

/// File entry point: index arrays, cluster file and the FASTA of the indexed
/// collection in rank order.
pub fn call_snps_files(
    index: &IndexPaths,
    clusters: &Path,
    reads: &Path,
    params: &CallParams,
) -> Result<(Vec<SnpCall>, CallStats)> {
    let mut rows = FileRows::open(index)?;
    let read_count = rows.read_count();
    let mut cluster_reader = ClusterReader::open(clusters)?;
    let in_file = cluster_reader.record_count();
    let reads = FastaReader::open(reads)?.map(|r| r.map(|rec| rec.seq));
    let (calls, mut stats) = run_calls(&mut rows, cluster_reader.by_ref(), reads, read_count, params)?;
    stats.clusters_in_file = Some(in_file);
    debug_assert_eq!(cluster_reader.items_read(), in_file);
    Ok((calls, stats))
}
