//! JSONL persistence for verification records: one record per line,
//! append-only, resumable by `(conjecture, params)`.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::Path;

use crate::conjectures::{ConjectureError, ConjectureId, InstanceParams, VerificationRecord};

type Result<T> = std::result::Result<T, ConjectureError>;

/// What an existing record file holds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecordSet {
    pub records: Vec<VerificationRecord>,
    /// Byte length of the complete, parseable prefix.
    pub valid_len: u64,
    /// Whether the file ended in a partial line (an interrupted write).
    pub truncated: bool,
}

impl RecordSet {
    /// Parameters already recorded for one problem.
    pub fn done(&self, id: ConjectureId) -> HashSet<InstanceParams> {
        self.records.iter().filter(|r| r.conjecture == id).map(|r| r.params.clone()).collect()
    }
}

/// Parses record lines. A final line without its newline that does not
/// parse is an interrupted write and is dropped; any other bad line is an
/// error, since silently skipping it would re-run or lose data.
pub fn parse_records(text: &str) -> Result<RecordSet> {
    let mut out = RecordSet::default();
    let mut offset = 0usize;
    for (number, line) in text.split_inclusive('\n').enumerate() {
        let complete = line.ends_with('\n');
        let body = line.trim_end_matches(['\n', '\r']);
        if body.trim().is_empty() {
            offset += line.len();
            out.valid_len = offset as u64;
            continue;
        }
        match serde_json::from_str::<VerificationRecord>(body) {
            Ok(r) => {
                out.records.push(r);
                offset += line.len();
                out.valid_len = offset as u64;
            }
            Err(_) if !complete => out.truncated = true,
            Err(e) => {
                return Err(ConjectureError::Usage(format!("record line {}: {e}", number + 1)));
            }
        }
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<RecordSet> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    parse_records(&text)
}

/// Appends records, one complete line per write, flushed after each so an
/// interruption loses at most the line being written.
pub struct RecordWriter {
    out: BufWriter<File>,
}

impl RecordWriter {
    /// Starts a fresh file, replacing any existing one.
    pub fn create(path: &Path) -> Result<Self> {
        Ok(RecordWriter { out: BufWriter::new(File::create(path)?) })
    }

    /// Opens a file for resuming: reads what is there, cuts off a partial
    /// final line, and positions for appending. A missing file is an empty
    /// record set.
    pub fn resume(path: &Path) -> Result<(RecordSet, Self)> {
        let existing = match path.exists() {
            true => read_records(path)?,
            false => RecordSet::default(),
        };
        let mut file = OpenOptions::new().create(true).truncate(false).read(true).write(true).open(path)?;
        let len = file.metadata()?.len();
        let mut end = existing.valid_len;
        if end < len && !existing.truncated {
            // complete final record lacking its newline
            end = len;
        }
        file.set_len(end)?;
        file.seek(SeekFrom::End(0))?;
        if end > 0 && end != existing.valid_len {
            file.write_all(b"\n")?;
        }
        Ok((existing, RecordWriter { out: BufWriter::new(file) }))
    }

    pub fn append(&mut self, record: &VerificationRecord) -> Result<()> {
        let mut line = serde_json::to_string(record).map_err(std::io::Error::other)?;
        line.push('\n');
        self.out.write_all(line.as_bytes())?;
        self.out.flush()?;
        Ok(())
    }
}
