//! Candidate read coordinates collected in pass 1, replayed sorted by read
//! rank in pass 2. Beyond `cap` entries, sorted runs go to anonymous temp
//! files and are merged on replay.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Seek, SeekFrom, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coord {
    pub read: u32,
    pub offset: u32,
    pub candidate: u32,
    /// Row index within the candidate's cluster.
    pub slot: u32,
}

const COORD_LEN: usize = 16;

impl Coord {
    fn encode(&self) -> [u8; COORD_LEN] {
        let mut b = [0u8; COORD_LEN];
        for (k, v) in [self.read, self.offset, self.candidate, self.slot].into_iter().enumerate() {
            b[4 * k..4 * k + 4].copy_from_slice(&v.to_le_bytes());
        }
        b
    }

    fn decode(b: &[u8; COORD_LEN]) -> Self {
        let f = |k: usize| u32::from_le_bytes(b[4 * k..4 * k + 4].try_into().unwrap());
        Coord {
            read: f(0),
            offset: f(1),
            candidate: f(2),
            slot: f(3),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BufferStats {
    pub pushed: u64,
    pub spilled: u64,
    pub runs: u64,
    pub peak_in_memory: u64,
}

pub struct CoordBuffer {
    cap: usize,
    mem: Vec<Coord>,
    runs: Vec<(File, u64)>,
    stats: BufferStats,
}

impl CoordBuffer {
    /// `cap` is the in-memory limit in coordinates; at least one is kept.
    pub fn new(cap: usize) -> Self {
        CoordBuffer {
            cap: cap.max(1),
            mem: Vec::new(),
            runs: Vec::new(),
            stats: BufferStats::default(),
        }
    }

    pub fn push(&mut self, c: Coord) -> Result<()> {
        self.mem.push(c);
        self.stats.pushed += 1;
        self.stats.peak_in_memory = self.stats.peak_in_memory.max(self.mem.len() as u64);
        if self.mem.len() >= self.cap {
            self.spill()?;
        }
        Ok(())
    }

    fn spill(&mut self) -> Result<()> {
        self.mem.sort_unstable();
        let ctx = "writing coordinate spill file";
        let file = tempfile::tempfile().map_err(|e| Error::io(ctx, e))?;
        let mut out = BufWriter::new(file);
        for c in &self.mem {
            out.write_all(&c.encode()).map_err(|e| Error::io(ctx, e))?;
        }
        let mut file = out.into_inner().map_err(|e| Error::io(ctx, e.into_error()))?;
        file.seek(SeekFrom::Start(0)).map_err(|e| Error::io(ctx, e))?;
        self.runs.push((file, self.mem.len() as u64));
        self.stats.spilled += self.mem.len() as u64;
        self.stats.runs += 1;
        self.mem.clear();
        Ok(())
    }

    pub fn stats(&self) -> BufferStats {
        self.stats
    }

    /// All coordinates in ascending order.
    pub fn into_sorted(mut self) -> SortedCoords {
        self.mem.sort_unstable();
        let mut sources: Vec<Source> = self
            .runs
            .into_iter()
            .map(|(f, n)| Source::Run(BufReader::new(f), n))
            .collect();
        sources.push(Source::Mem(self.mem.into_iter()));
        SortedCoords {
            sources,
            heap: BinaryHeap::new(),
            primed: false,
        }
    }
}

enum Source {
    Run(BufReader<File>, u64),
    Mem(std::vec::IntoIter<Coord>),
}

impl Source {
    fn next(&mut self) -> Result<Option<Coord>> {
        match self {
            Source::Mem(it) => Ok(it.next()),
            Source::Run(_, 0) => Ok(None),
            Source::Run(r, left) => {
                let mut b = [0u8; COORD_LEN];
                r.read_exact(&mut b)
                    .map_err(|e| Error::io("reading coordinate spill file", e))?;
                *left -= 1;
                Ok(Some(Coord::decode(&b)))
            }
        }
    }
}

pub struct SortedCoords {
    sources: Vec<Source>,
    heap: BinaryHeap<Reverse<(Coord, usize)>>,
    primed: bool,
}

impl SortedCoords {
    pub fn next_coord(&mut self) -> Result<Option<Coord>> {
        if !self.primed {
            for i in 0..self.sources.len() {
                if let Some(c) = self.sources[i].next()? {
                    self.heap.push(Reverse((c, i)));
                }
            }
            self.primed = true;
        }
        let Some(Reverse((c, i))) = self.heap.pop() else {
            return Ok(None);
        };
        if let Some(n) = self.sources[i].next()? {
            self.heap.push(Reverse((n, i)));
        }
        Ok(Some(c))
    }
}
