//! Positional clusters from the LCP array.
//!
//! A cluster seed is a maximal run `[s, e]` of LCP indices with
//! `lcp ≥ lcp_min`; it covers the suffix range `[s-1, e]`. Seeds are split at
//! interior strict local minima: an index `i` where `lcp[i] < lcp[i-1]` and
//! the plateau `lcp[i..=j]` of equal values is followed, still inside the
//! run, by `lcp[j+1] > lcp[i]`. The split puts suffix `i-1` last in the left
//! cluster and suffix `i` first in the right one. A descending plateau at the
//! end of a unimodal profile is not a minimum and is never split.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const DEFAULT_LCP_MIN: u32 = 16;
pub const DEFAULT_MIN_SIZE: u64 = 4;

/// A suffix range `[start, end]` (inclusive) of the index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cluster {
    pub start: u64,
    pub end: u64,
    /// Rightmost position of the LCP maximum in `(start, end]`; equals
    /// `start` for single-suffix ranges.
    pub peak: u64,
    pub max_lcp: u32,
}

impl Cluster {
    pub fn size(&self) -> u64 {
        self.end - self.start + 1
    }

    /// Builds a cluster over `[start, end]`, locating its peak in `lcp`.
    pub fn over(lcp: &[u32], start: u64, end: u64) -> Self {
        let (mut peak, mut max_lcp) = (start, 0);
        for i in start + 1..=end {
            let v = lcp[i as usize];
            if v >= max_lcp {
                peak = i;
                max_lcp = v;
            }
        }
        Cluster {
            start,
            end,
            peak,
            max_lcp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClusterParams {
    pub lcp_min: u32,
    /// Minimum number of suffixes in an emitted cluster.
    pub min_size: u64,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            lcp_min: DEFAULT_LCP_MIN,
            min_size: DEFAULT_MIN_SIZE,
        }
    }
}

/// Streaming cluster detector over LCP values given in index order.
pub struct ClusterScanner<I> {
    lcp: I,
    params: ClusterParams,
    pos: u64,
    run: Vec<u32>,
    run_start: u64,
    pending: std::collections::VecDeque<Cluster>,
    exhausted: bool,
}

impl<I: Iterator<Item = u32>> ClusterScanner<I> {
    pub fn new(lcp: I, params: ClusterParams) -> Self {
        ClusterScanner {
            lcp,
            params: ClusterParams {
                lcp_min: params.lcp_min.max(1),
                ..params
            },
            pos: 0,
            run: Vec::new(),
            run_start: 0,
            pending: Default::default(),
            exhausted: false,
        }
    }

    /// Splits the buffered run and queues its clusters.
    fn flush_run(&mut self) {
        if self.run.is_empty() {
            return;
        }
        let v = &self.run;
        let s = self.run_start;
        let mut cuts = Vec::new();
        let mut i = 1;
        while i < v.len() {
            if v[i] < v[i - 1] {
                let mut j = i;
                while j + 1 < v.len() && v[j + 1] == v[i] {
                    j += 1;
                }
                if j + 1 < v.len() && v[j + 1] > v[i] {
                    cuts.push(i);
                }
                i = j + 1;
            } else {
                i += 1;
            }
        }
        // Run index t is LCP index s + t, linking suffixes s+t-1 and s+t. A cut
        // at t drops that link.
        let mut left = 0usize;
        let mut bounds = Vec::with_capacity(cuts.len() + 1);
        for &c in &cuts {
            bounds.push((left, c - 1));
            left = c;
        }
        bounds.push((left, v.len() - 1));
        for (lo, hi) in bounds {
            let (start, first_interior) = if lo == 0 {
                (s - 1, 0)
            } else {
                (s + lo as u64, lo + 1)
            };
            let end = s + hi as u64;
            let (mut peak, mut max_lcp) = (start, 0);
            for t in first_interior..=hi {
                if v[t] >= max_lcp {
                    peak = s + t as u64;
                    max_lcp = v[t];
                }
            }
            let c = Cluster {
                start,
                end,
                peak,
                max_lcp,
            };
            if c.size() >= self.params.min_size {
                self.pending.push_back(c);
            }
        }
        self.run.clear();
    }
}

impl<I: Iterator<Item = u32>> Iterator for ClusterScanner<I> {
    type Item = Cluster;

    fn next(&mut self) -> Option<Cluster> {
        loop {
            if let Some(c) = self.pending.pop_front() {
                return Some(c);
            }
            if self.exhausted {
                return None;
            }
            match self.lcp.next() {
                Some(v) => {
                    // lcp[0] is 0 by definition; treat it as a boundary.
                    if v >= self.params.lcp_min && self.pos > 0 {
                        if self.run.is_empty() {
                            self.run_start = self.pos;
                        }
                        self.run.push(v);
                    } else {
                        self.flush_run();
                    }
                    self.pos += 1;
                }
                None => {
                    self.flush_run();
                    self.exhausted = true;
                }
            }
        }
    }
}

pub fn find_clusters(lcp: &[u32], params: ClusterParams) -> Vec<Cluster> {
    ClusterScanner::new(lcp.iter().copied(), params).collect()
}

/// True iff `lcp[start+1..=peak]` is non-decreasing and
/// `lcp[peak+1..=end]` is non-increasing.
pub fn verify_unimodal(lcp: &[u32], c: &Cluster) -> bool {
    let (a, p, b) = (c.start as usize, c.peak as usize, c.end as usize);
    if b <= a {
        return true;
    }
    if p < a || p > b {
        return false;
    }
    let rising = &lcp[a + 1..=p.max(a)];
    let falling = &lcp[p + 1..=b];
    rising.windows(2).all(|w| w[0] <= w[1]) && falling.windows(2).all(|w| w[0] >= w[1])
}

/// Whether some peak makes `values` non-decreasing then non-increasing.
pub fn is_unimodal(values: &[u32]) -> bool {
    let mut i = 1;
    while i < values.len() && values[i - 1] <= values[i] {
        i += 1;
    }
    while i < values.len() && values[i - 1] >= values[i] {
        i += 1;
    }
    i >= values.len()
}

pub const CLUSTER_MAGIC: [u8; 8] = *b"EBWTPCLU";
pub const CLUSTER_VERSION: u32 = 1;
const HEADER_LEN: u64 = 24;
const RECORD_LEN: u64 = 32;
const UNFINISHED: u64 = u64::MAX;

/// Writes `magic | version u32 | reserved u32 | count u64` followed by
/// `start | end | peak | max_lcp` records, all `u64` little-endian. The count
/// is patched in by [`ClusterWriter::finish`].
pub struct ClusterWriter {
    out: BufWriter<File>,
    path: PathBuf,
    count: u64,
}

impl ClusterWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let ctx = || format!("writing {}", path.display());
        let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
        let mut out = BufWriter::new(file);
        let mut header = Vec::with_capacity(HEADER_LEN as usize);
        header.extend_from_slice(&CLUSTER_MAGIC);
        header.extend_from_slice(&CLUSTER_VERSION.to_le_bytes());
        header.extend_from_slice(&0u32.to_le_bytes());
        header.extend_from_slice(&UNFINISHED.to_le_bytes());
        out.write_all(&header).map_err(|e| Error::io(ctx(), e))?;
        Ok(ClusterWriter {
            out,
            path: path.to_path_buf(),
            count: 0,
        })
    }

    pub fn push(&mut self, c: &Cluster) -> Result<()> {
        let mut rec = [0u8; RECORD_LEN as usize];
        for (k, v) in [c.start, c.end, c.peak, u64::from(c.max_lcp)].into_iter().enumerate() {
            rec[8 * k..8 * k + 8].copy_from_slice(&v.to_le_bytes());
        }
        self.out
            .write_all(&rec)
            .map_err(|e| Error::io(format!("writing {}", self.path.display()), e))?;
        self.count += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<u64> {
        let ctx = format!("writing {}", self.path.display());
        let count = self.count;
        (|| -> std::io::Result<()> {
            self.out.flush()?;
            let file = self.out.get_mut();
            file.seek(SeekFrom::Start(16))?;
            file.write_all(&count.to_le_bytes())?;
            file.flush()
        })()
        .map_err(|e| Error::io(ctx, e))?;
        Ok(count)
    }
}

pub fn write_clusters<'a>(path: &Path, clusters: impl IntoIterator<Item = &'a Cluster>) -> Result<u64> {
    let mut w = ClusterWriter::create(path)?;
    for c in clusters {
        w.push(c)?;
    }
    w.finish()
}

/// Sequential reader; yields records in file order.
pub struct ClusterReader {
    inner: BufReader<File>,
    path: PathBuf,
    count: u64,
    read: u64,
}

impl ClusterReader {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingInput(path.to_path_buf())
            } else {
                Error::io(format!("opening {}", path.display()), e)
            }
        })?;
        let file_len = file
            .metadata()
            .map_err(|e| Error::io(format!("opening {}", path.display()), e))?
            .len();
        let mut inner = BufReader::new(file);
        let mut header = [0u8; HEADER_LEN as usize];
        let bad = |msg: &str| Error::integrity(format!("{}: {msg}", path.display()));
        inner.read_exact(&mut header).map_err(|_| bad("truncated header"))?;
        if header[..8] != CLUSTER_MAGIC {
            return Err(bad("bad magic"));
        }
        if u32::from_le_bytes(header[8..12].try_into().unwrap()) != CLUSTER_VERSION {
            return Err(bad("unsupported version"));
        }
        let count = u64::from_le_bytes(header[16..24].try_into().unwrap());
        if count == UNFINISHED {
            return Err(bad("file was not finalized"));
        }
        let expected = count
            .checked_mul(RECORD_LEN)
            .and_then(|b| b.checked_add(HEADER_LEN));
        if expected != Some(file_len) {
            return Err(bad(&format!(
                "header announces {count} records but file holds {file_len} bytes"
            )));
        }
        Ok(ClusterReader {
            inner,
            path: path.to_path_buf(),
            count,
            read: 0,
        })
    }

    pub fn record_count(&self) -> u64 {
        self.count
    }

    pub fn items_read(&self) -> u64 {
        self.read
    }

    pub fn next_cluster(&mut self) -> Result<Option<Cluster>> {
        if self.read == self.count {
            return Ok(None);
        }
        let mut rec = [0u8; RECORD_LEN as usize];
        self.inner.read_exact(&mut rec).map_err(|_| {
            Error::integrity(format!("{}: truncated record {}", self.path.display(), self.read))
        })?;
        self.read += 1;
        let f = |k: usize| u64::from_le_bytes(rec[8 * k..8 * k + 8].try_into().unwrap());
        let c = Cluster {
            start: f(0),
            end: f(1),
            peak: f(2),
            max_lcp: u32::try_from(f(3))
                .map_err(|_| Error::integrity("LCP value out of range"))?,
        };
        if c.end < c.start || c.peak < c.start || c.peak > c.end {
            return Err(Error::integrity(format!(
                "{}: malformed record {}",
                self.path.display(),
                self.read - 1
            )));
        }
        Ok(Some(c))
    }
}

impl Iterator for ClusterReader {
    type Item = Result<Cluster>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_cluster().transpose()
    }
}

pub fn read_clusters(path: &Path) -> Result<Vec<Cluster>> {
    ClusterReader::open(path)?.collect()
}
