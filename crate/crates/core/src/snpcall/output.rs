//! KisSNP2-style FASTA: two records per call, sample 1 first.
//!
//! ```text
//! >SNP_<id>|sample1|<b1>/<b2>|support=<n1>|snp_pos=<p>|nonisolated=<list>[|low_confidence]
//! <L-window ending with b1><right context>
//! >SNP_<id>|sample2|<b1>/<b2>|support=<n2>|snp_pos=<p>|nonisolated=<list>[|low_confidence]
//! <L-window ending with b2><right context>
//! ```
//!
//! `snp_pos` is the 1-based column of the allele; `nonisolated` lists the
//! 1-based columns of further differences in the left window, or `.`. The
//! reader accepts any header of the form `>name|...` as long as records come
//! in pairs sharing their first field.

use std::io::Write;
use std::path::Path;

use super::SnpCall;
use crate::error::{Error, Result};
use crate::sequences::{write_record, FastaReader, Sample};

pub fn call_header(call: &SnpCall, sample: Sample) -> String {
    let s = &call.samples[sample.index()];
    let extra = if call.extra_columns.is_empty() {
        ".".to_string()
    } else {
        call.extra_columns
            .iter()
            .map(|c| (c + 1).to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut h = format!(
        "SNP_{}|{}|{}/{}|support={}|snp_pos={}|nonisolated={}",
        call.id,
        sample.label(),
        call.samples[0].allele as char,
        call.samples[1].allele as char,
        s.support,
        call.snp_column() + 1,
        extra
    );
    if call.low_confidence {
        h.push_str("|low_confidence");
    }
    h
}

pub fn write_calls<W: Write>(mut out: W, calls: &[SnpCall]) -> std::io::Result<()> {
    for call in calls {
        for sample in [Sample::First, Sample::Second] {
            write_record(&mut out, &call_header(call, sample), &call.sequence(sample))?;
        }
    }
    out.flush()
}

/// One record pair read back from a call file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallPair {
    pub name: String,
    pub first: Vec<u8>,
    pub second: Vec<u8>,
    /// 1-based line of the first header.
    pub line: usize,
}

pub fn read_calls(path: &Path) -> Result<Vec<CallPair>> {
    let mut records = FastaReader::open(path)?;
    let mut pairs = Vec::new();
    let bad = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    while let Some(a) = records.next() {
        let a = a?;
        let Some(b) = records.next() else {
            return Err(bad(a.line, format!("record '{}' has no partner", a.header)));
        };
        let b = b?;
        let name = |h: &str| h.split('|').next().unwrap_or("").to_string();
        if name(&a.header) != name(&b.header) {
            return Err(bad(
                b.line,
                format!("record '{}' does not pair with '{}'", b.header, a.header),
            ));
        }
        if a.seq.is_empty() || b.seq.is_empty() {
            return Err(bad(a.line, format!("empty sequence in pair '{}'", name(&a.header))));
        }
        pairs.push(CallPair {
            name: name(&a.header),
            first: a.seq,
            second: b.seq,
            line: a.line,
        });
    }
    Ok(pairs)
}
