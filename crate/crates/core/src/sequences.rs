//! DNA reads, reverse complementation and FASTA ingestion.
//!
//! Reads are stored as uppercase ASCII over `{A,C,G,T}`. A [`ReadCollection`]
//! keeps its reads in the global order that defines end-marker ranks: all
//! sample-1 reads come before all sample-2 reads, and after
//! [`augment_with_rc`] each sample block is followed by the reverse
//! complements of that block.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const ALPHABET: [u8; 4] = *b"ACGT";

/// Rank of a nucleotide in `A < C < G < T`.
#[inline]
pub fn base_code(b: u8) -> Option<u8> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

#[inline]
pub fn complement(b: u8) -> Option<u8> {
    match b {
        b'A' => Some(b'T'),
        b'C' => Some(b'G'),
        b'G' => Some(b'C'),
        b'T' => Some(b'A'),
        _ => None,
    }
}

/// Reverse complement of a DNA string. Fails on any symbol outside `{A,C,G,T}`.
pub fn reverse_complement(seq: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(seq.len());
    for (i, &b) in seq.iter().enumerate().rev() {
        out.push(complement(b).ok_or(Error::InvalidBase {
            symbol: b as char,
            offset: i,
        })?);
    }
    Ok(out)
}

fn check_bases(seq: &[u8]) -> Result<()> {
    match seq.iter().position(|&b| base_code(b).is_none()) {
        Some(offset) => Err(Error::InvalidBase {
            symbol: seq[offset] as char,
            offset,
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sample {
    First,
    Second,
}

impl Sample {
    pub fn index(self) -> usize {
        match self {
            Sample::First => 0,
            Sample::Second => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Sample::First => "sample1",
            Sample::Second => "sample2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrandOrigin {
    Given,
    ReverseComplementAdded,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Read {
    /// Rank within the owning collection; also the rank of its end-marker.
    pub id: usize,
    pub name: String,
    pub bases: Vec<u8>,
    pub sample: Sample,
    pub strand: StrandOrigin,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReadCollection {
    reads: Vec<Read>,
    total_length: usize,
    sample_boundary: usize,
}

impl ReadCollection {
    /// Builds a collection, renumbering reads by position. Sample-1 reads must
    /// precede sample-2 reads and every read must be a nonempty ACGT string.
    pub fn from_reads(mut reads: Vec<Read>) -> Result<Self> {
        let mut total_length = 0;
        let mut sample_boundary = None;
        for (i, read) in reads.iter_mut().enumerate() {
            if read.bases.is_empty() {
                return Err(Error::domain(format!("read {i} is empty")));
            }
            check_bases(&read.bases)?;
            read.id = i;
            total_length += read.bases.len();
            match (read.sample, sample_boundary) {
                (Sample::First, Some(_)) => {
                    return Err(Error::domain("sample-1 reads must precede sample-2 reads"))
                }
                (Sample::Second, None) => sample_boundary = Some(i),
                _ => {}
            }
        }
        let sample_boundary = sample_boundary.unwrap_or(reads.len());
        Ok(ReadCollection {
            reads,
            total_length,
            sample_boundary,
        })
    }

    /// Single-sample collection from raw sequences, named by rank.
    pub fn from_sequences<I, S>(seqs: I, sample: Sample) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<Vec<u8>>,
    {
        let reads = seqs
            .into_iter()
            .enumerate()
            .map(|(i, s)| Read {
                id: i,
                name: format!("r{}", i + 1),
                bases: s.into(),
                sample,
                strand: StrandOrigin::Given,
            })
            .collect();
        Self::from_reads(reads)
    }

    /// Concatenates two single-sample collections, relabelling the second as
    /// sample 2.
    pub fn two_samples(first: ReadCollection, second: ReadCollection) -> Result<Self> {
        let mut reads = first.reads;
        for r in &mut reads {
            r.sample = Sample::First;
        }
        reads.extend(second.reads.into_iter().map(|mut r| {
            r.sample = Sample::Second;
            r
        }));
        Self::from_reads(reads)
    }

    pub fn reads(&self) -> &[Read] {
        &self.reads
    }

    pub fn len(&self) -> usize {
        self.reads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reads.is_empty()
    }

    /// Sum of read lengths, end-markers excluded.
    pub fn total_length(&self) -> usize {
        self.total_length
    }

    /// Rank of the first sample-2 read (equals `len()` when there is none).
    pub fn sample_boundary(&self) -> usize {
        self.sample_boundary
    }

    pub fn sample_len(&self, sample: Sample) -> usize {
        match sample {
            Sample::First => self.sample_boundary,
            Sample::Second => self.reads.len() - self.sample_boundary,
        }
    }

    pub fn get(&self, rank: usize) -> Option<&Read> {
        self.reads.get(rank)
    }

    pub fn sample_of(&self, rank: usize) -> Sample {
        if rank < self.sample_boundary {
            Sample::First
        } else {
            Sample::Second
        }
    }

    pub fn mean_read_length(&self) -> f64 {
        if self.reads.is_empty() {
            0.0
        } else {
            self.total_length as f64 / self.reads.len() as f64
        }
    }

    pub fn sequences(&self) -> impl Iterator<Item = &[u8]> {
        self.reads.iter().map(|r| r.bases.as_slice())
    }
}

/// Doubles a collection with the reverse complement of every read. Within
/// each sample the given reads keep their order and are followed by their
/// reverse complements in the same order.
pub fn augment_with_rc(c: &ReadCollection) -> ReadCollection {
    let mut reads = Vec::with_capacity(2 * c.len());
    for block in [&c.reads[..c.sample_boundary], &c.reads[c.sample_boundary..]] {
        reads.extend(block.iter().cloned());
        reads.extend(block.iter().map(|r| Read {
            id: 0,
            name: format!("{}/rc", r.name),
            bases: reverse_complement(&r.bases).expect("collection holds only ACGT"),
            sample: r.sample,
            strand: match r.strand {
                StrandOrigin::Given => StrandOrigin::ReverseComplementAdded,
                StrandOrigin::ReverseComplementAdded => StrandOrigin::Given,
            },
        }));
    }
    ReadCollection::from_reads(reads).expect("augmentation preserves validity")
}

/// One FASTA record as it appears in the file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FastaRecord {
    pub header: String,
    pub seq: Vec<u8>,
    /// 1-based line number of the header.
    pub line: usize,
}

/// Streaming FASTA parser. Multi-line sequences and CRLF line endings are
/// accepted; sequence letters are uppercased.
pub struct FastaReader<R> {
    inner: R,
    path: std::path::PathBuf,
    line_no: usize,
    pending: Option<(String, usize)>,
    buf: String,
    done: bool,
}

impl FastaReader<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingInput(path.to_path_buf())
            } else {
                Error::io(format!("opening {}", path.display()), e)
            }
        })?;
        Ok(Self::new(BufReader::new(file), path))
    }
}

impl<R: BufRead> FastaReader<R> {
    pub fn new(inner: R, path: &Path) -> Self {
        FastaReader {
            inner,
            path: path.to_path_buf(),
            line_no: 0,
            pending: None,
            buf: String::new(),
            done: false,
        }
    }

    fn parse_err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.clone(),
            line,
            msg: msg.into(),
        }
    }

    fn next_record(&mut self) -> Result<Option<FastaRecord>> {
        let mut seq = Vec::new();
        loop {
            self.buf.clear();
            let n = self
                .inner
                .read_line(&mut self.buf)
                .map_err(|e| Error::io(format!("reading {}", self.path.display()), e))?;
            if n == 0 {
                self.done = true;
                return Ok(self.pending.take().map(|(header, line)| FastaRecord {
                    header,
                    seq,
                    line,
                }));
            }
            self.line_no += 1;
            let text = self.buf.trim_end_matches(['\n', '\r']);
            if let Some(h) = text.strip_prefix('>') {
                let next = (h.trim().to_string(), self.line_no);
                if let Some((header, line)) = self.pending.replace(next) {
                    return Ok(Some(FastaRecord { header, seq, line }));
                }
                continue;
            }
            let text = text.trim();
            if text.is_empty() {
                continue;
            }
            if self.pending.is_none() {
                return Err(self.parse_err(self.line_no, "sequence data before first header"));
            }
            for ch in text.bytes() {
                if !ch.is_ascii_alphabetic() && ch != b'-' && ch != b'*' {
                    return Err(self.parse_err(
                        self.line_no,
                        format!("unexpected character {:?} in sequence", ch as char),
                    ));
                }
                seq.push(ch.to_ascii_uppercase());
            }
        }
    }
}

impl<R: BufRead> Iterator for FastaReader<R> {
    type Item = Result<FastaRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        self.next_record().transpose()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadedReads {
    pub collection: ReadCollection,
    /// Records dropped for containing symbols outside `{A,C,G,T}` or no bases.
    pub skipped: usize,
}

/// Loads a FASTA file as a single-sample collection. Records with non-ACGT
/// symbols (e.g. `N`) are dropped and counted.
pub fn load_fasta(path: &Path, sample: Sample) -> Result<LoadedReads> {
    read_fasta_records(FastaReader::open(path)?, sample)
}

pub fn read_fasta_records<I>(records: I, sample: Sample) -> Result<LoadedReads>
where
    I: IntoIterator<Item = Result<FastaRecord>>,
{
    let mut reads = Vec::new();
    let mut skipped = 0;
    for rec in records {
        let rec = rec?;
        if rec.seq.is_empty() || check_bases(&rec.seq).is_err() {
            skipped += 1;
            continue;
        }
        reads.push(Read {
            id: reads.len(),
            name: rec.header,
            bases: rec.seq,
            sample,
            strand: StrandOrigin::Given,
        });
    }
    if skipped > 0 {
        log::warn!("dropped {skipped} reads containing symbols outside ACGT");
    }
    Ok(LoadedReads {
        collection: ReadCollection::from_reads(reads)?,
        skipped,
    })
}

/// Writes one record per read, sequence on a single line.
pub fn write_fasta<W: Write>(mut out: W, reads: &ReadCollection) -> std::io::Result<()> {
    for r in reads.reads() {
        write_record(&mut out, &r.name, &r.bases)?;
    }
    Ok(())
}

pub fn write_record<W: Write>(out: &mut W, header: &str, seq: &[u8]) -> std::io::Result<()> {
    out.write_all(b">")?;
    out.write_all(header.as_bytes())?;
    out.write_all(b"\n")?;
    out.write_all(seq)?;
    out.write_all(b"\n")
}
