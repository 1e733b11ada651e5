//! On-disk layout of the triplet: three files sharing a 32-byte header
//! `magic[8] | version u32 | reserved u32 | length u64 | reads u64`, all
//! little-endian. Records: GSA `read u64 | offset u64`, eBWT one byte
//! (`A C G T $`), LCP `u32`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use super::{IndexTriplet, SuffixRef};
use crate::error::{Error, Result};

pub const GSA_MAGIC: [u8; 8] = *b"EBWTPGSA";
pub const EBWT_MAGIC: [u8; 8] = *b"EBWTPBWT";
pub const LCP_MAGIC: [u8; 8] = *b"EBWTPLCP";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexPaths {
    pub gsa: PathBuf,
    pub ebwt: PathBuf,
    pub lcp: PathBuf,
}

impl IndexPaths {
    pub fn from_prefix(prefix: &Path) -> Self {
        let with = |ext: &str| {
            let mut p = prefix.as_os_str().to_owned();
            p.push(ext);
            PathBuf::from(p)
        };
        IndexPaths {
            gsa: with(".gsa"),
            ebwt: with(".ebwt"),
            lcp: with(".lcp"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayHeader {
    pub magic: [u8; 8],
    pub version: u32,
    pub len: u64,
    pub reads: u64,
}

impl ArrayHeader {
    fn encode(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..8].copy_from_slice(&self.magic);
        out[8..12].copy_from_slice(&self.version.to_le_bytes());
        out[16..24].copy_from_slice(&self.len.to_le_bytes());
        out[24..32].copy_from_slice(&self.reads.to_le_bytes());
        out
    }

    fn decode(buf: &[u8; HEADER_LEN]) -> Self {
        let u64_at = |o: usize| u64::from_le_bytes(buf[o..o + 8].try_into().unwrap());
        ArrayHeader {
            magic: buf[..8].try_into().unwrap(),
            version: u32::from_le_bytes(buf[8..12].try_into().unwrap()),
            len: u64_at(16),
            reads: u64_at(24),
        }
    }
}

pub trait Record: Sized {
    const MAGIC: [u8; 8];
    const WIDTH: usize;
    fn encode(&self, out: &mut Vec<u8>);
    fn decode(buf: &[u8]) -> Self;
}

impl Record for SuffixRef {
    const MAGIC: [u8; 8] = GSA_MAGIC;
    const WIDTH: usize = 16;

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.read as u64).to_le_bytes());
        out.extend_from_slice(&(self.offset as u64).to_le_bytes());
    }

    fn decode(buf: &[u8]) -> Self {
        let read = u64::from_le_bytes(buf[..8].try_into().unwrap());
        let offset = u64::from_le_bytes(buf[8..16].try_into().unwrap());
        SuffixRef::new(read as u32, offset as u32)
    }
}

impl Record for u8 {
    const MAGIC: [u8; 8] = EBWT_MAGIC;
    const WIDTH: usize = 1;

    fn encode(&self, out: &mut Vec<u8>) {
        out.push(*self);
    }

    fn decode(buf: &[u8]) -> Self {
        buf[0]
    }
}

impl Record for u32 {
    const MAGIC: [u8; 8] = LCP_MAGIC;
    const WIDTH: usize = 4;

    fn encode(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.to_le_bytes());
    }

    fn decode(buf: &[u8]) -> Self {
        u32::from_le_bytes(buf[..4].try_into().unwrap())
    }
}

fn write_array<T: Record>(path: &Path, items: &[T], reads: u64) -> Result<()> {
    let ctx = || format!("writing {}", path.display());
    let file = File::create(path).map_err(|e| Error::io(ctx(), e))?;
    let mut out = BufWriter::new(file);
    let header = ArrayHeader {
        magic: T::MAGIC,
        version: FORMAT_VERSION,
        len: items.len() as u64,
        reads,
    };
    out.write_all(&header.encode()).map_err(|e| Error::io(ctx(), e))?;
    let mut buf = Vec::with_capacity(T::WIDTH * 4096);
    for chunk in items.chunks(4096) {
        buf.clear();
        for item in chunk {
            item.encode(&mut buf);
        }
        out.write_all(&buf).map_err(|e| Error::io(ctx(), e))?;
    }
    out.flush().map_err(|e| Error::io(ctx(), e))
}

pub fn write_index(paths: &IndexPaths, idx: &IndexTriplet) -> Result<()> {
    let m = idx.read_count() as u64;
    write_array(&paths.gsa, idx.gsa(), m)?;
    write_array(&paths.ebwt, idx.ebwt(), m)?;
    write_array(&paths.lcp, idx.lcp(), m)
}

/// Consumption counters of one streamed array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StreamStats {
    pub len: u64,
    pub items_read: u64,
}

/// Sequential reader over one array file. Never seeks: each record is
/// decoded at most once per reader.
pub struct ArrayReader<T> {
    inner: BufReader<File>,
    path: PathBuf,
    header: ArrayHeader,
    read: u64,
    buf: Vec<u8>,
    _t: PhantomData<T>,
}

pub type GsaReader = ArrayReader<SuffixRef>;
pub type EbwtReader = ArrayReader<u8>;
pub type LcpReader = ArrayReader<u32>;

impl<T: Record> ArrayReader<T> {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingInput(path.to_path_buf())
            } else {
                Error::io(format!("opening {}", path.display()), e)
            }
        })?;
        let mut inner = BufReader::with_capacity(1 << 16, file);
        let mut hdr = [0u8; HEADER_LEN];
        inner.read_exact(&mut hdr).map_err(|_| {
            Error::integrity(format!("{}: truncated header", path.display()))
        })?;
        let header = ArrayHeader::decode(&hdr);
        if header.magic != T::MAGIC {
            return Err(Error::integrity(format!("{}: bad magic", path.display())));
        }
        if header.version != FORMAT_VERSION {
            return Err(Error::integrity(format!(
                "{}: unsupported version {}",
                path.display(),
                header.version
            )));
        }
        Ok(ArrayReader {
            inner,
            path: path.to_path_buf(),
            header,
            read: 0,
            buf: vec![0u8; T::WIDTH],
            _t: PhantomData,
        })
    }

    pub fn header(&self) -> &ArrayHeader {
        &self.header
    }

    pub fn stats(&self) -> StreamStats {
        StreamStats {
            len: self.header.len,
            items_read: self.read,
        }
    }

    /// Next record, or `None` after the last one.
    pub fn next_item(&mut self) -> Result<Option<T>> {
        if self.read == self.header.len {
            return Ok(None);
        }
        self.inner.read_exact(&mut self.buf).map_err(|_| {
            Error::integrity(format!(
                "{}: truncated after {} of {} records",
                self.path.display(),
                self.read,
                self.header.len
            ))
        })?;
        self.read += 1;
        Ok(Some(T::decode(&self.buf)))
    }

    pub fn read_all(mut self) -> Result<Vec<T>> {
        let mut out = Vec::with_capacity(self.header.len as usize);
        while let Some(x) = self.next_item()? {
            out.push(x);
        }
        Ok(out)
    }
}

impl<T: Record> Iterator for ArrayReader<T> {
    type Item = Result<T>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_item().transpose()
    }
}

/// Opens the three arrays and checks that their headers agree.
pub fn open_readers(paths: &IndexPaths) -> Result<(GsaReader, EbwtReader, LcpReader)> {
    let gsa = GsaReader::open(&paths.gsa)?;
    let ebwt = EbwtReader::open(&paths.ebwt)?;
    let lcp = LcpReader::open(&paths.lcp)?;
    let (g, e, l) = (gsa.header(), ebwt.header(), lcp.header());
    if g.len != e.len || g.len != l.len || g.reads != e.reads || g.reads != l.reads {
        return Err(Error::integrity(format!(
            "inconsistent array sizes: gsa {}/{}, ebwt {}/{}, lcp {}/{}",
            g.len, g.reads, e.len, e.reads, l.len, l.reads
        )));
    }
    Ok((gsa, ebwt, lcp))
}

pub fn read_index(paths: &IndexPaths) -> Result<IndexTriplet> {
    let (gsa, ebwt, lcp) = open_readers(paths)?;
    let reads = gsa.header().reads as usize;
    IndexTriplet::from_parts(gsa.read_all()?, ebwt.read_all()?, lcp.read_all()?, reads)
}
