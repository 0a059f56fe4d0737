//! Labeled corpus file I/O.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::arabic::{DiacriticClass, LabeledSequence};

use super::CorpusError;

/// Where a labeled record came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Gold,
    Pseudo,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Provenance::Gold => "gold",
            Provenance::Pseudo => "pseudo",
        }
    }
}

/// A labeled sequence with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    pub seq: LabeledSequence,
    pub provenance: Provenance,
}

/// Serialize one record: skeleton, tab, space-separated class ids, and a
/// provenance field when not gold.
pub fn record_line(rec: &LabeledRecord) -> String {
    let ids: Vec<String> = rec.seq.labels().iter().map(|l| l.id().to_string()).collect();
    match rec.provenance {
        Provenance::Gold => format!("{}\t{}", rec.seq.skeleton(), ids.join(" ")),
        Provenance::Pseudo => {
            format!("{}\t{}\t{}", rec.seq.skeleton(), ids.join(" "), rec.provenance.as_str())
        }
    }
}

/// Parse one record line.
pub fn parse_record(line: &str, lineno: usize) -> Result<LabeledRecord, CorpusError> {
    let bad = |msg: String| CorpusError::BadRecord { line: lineno, msg };
    let mut fields = line.split('\t');
    let skeleton = fields.next().ok_or_else(|| bad("missing skeleton".into()))?;
    let ids = fields.next().ok_or_else(|| bad("missing label ids".into()))?;
    let provenance = match fields.next() {
        None | Some("gold") => Provenance::Gold,
        Some("pseudo") => Provenance::Pseudo,
        Some(other) => return Err(bad(format!("unknown provenance {other:?}"))),
    };
    if fields.next().is_some() {
        return Err(bad("too many fields".into()));
    }
    let mut labels = Vec::new();
    if !ids.is_empty() {
        for tok in ids.split(' ') {
            let id: usize = tok.parse().map_err(|e| bad(format!("bad class id {tok:?}: {e}")))?;
            labels.push(
                DiacriticClass::from_id(id).ok_or_else(|| bad(format!("class id {id} out of range")))?,
            );
        }
    }
    let seq = LabeledSequence::new(skeleton.chars().collect(), labels).map_err(bad)?;
    Ok(LabeledRecord { seq, provenance })
}

/// Write records one per line.
pub fn write_labeled_file<'a>(
    path: &Path,
    records: impl IntoIterator<Item = &'a LabeledRecord>,
) -> Result<(), CorpusError> {
    let mut w = BufWriter::new(File::create(path)?);
    for rec in records {
        writeln!(w, "{}", record_line(rec))?;
    }
    w.flush()?;
    Ok(())
}

/// Read a whole labeled corpus file.
pub fn read_labeled_file(path: &Path) -> Result<Vec<LabeledRecord>, CorpusError> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        out.push(parse_record(&line, i + 1)?);
    }
    Ok(out)
}
