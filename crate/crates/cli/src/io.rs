//! CSV tables: word lists, cylinder weights, label-sequence distributions.

use std::collections::BTreeMap;
use std::path::Path;

use subeq_core::mixing::{Coupling, Label, LabelDistribution};
use subeq_core::thermo::CylinderWeights;
use subeq_core::Word;

use crate::error::CliError;
use crate::report::format_f64;

/// A named CSV table held in memory until the run is persisted.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub file: String,
    pub contents: String,
}

fn render(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(Vec::new());
    if !header.is_empty() {
        w.write_record(header).expect("in-memory write");
    }
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

/// One word per row, symbols comma-separated.
pub fn words_table(file: &str, words: &[Word]) -> Table {
    let rows = words.iter().map(|w| w.iter().map(|s| s.to_string()).collect());
    Table { file: file.into(), contents: render(&[], rows) }
}

pub fn weights_table(file: &str, weights: &CylinderWeights) -> Table {
    let rows = weights.iter().map(|(w, v)| vec![w.to_string(), format_f64(v)]);
    Table { file: file.into(), contents: render(&["word", "weight"], rows) }
}

pub fn sequence_string(seq: &[Label]) -> String {
    seq.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn coupling_table(file: &str, c: &Coupling) -> Table {
    let rows = c
        .entries
        .iter()
        .map(|&(i, j, m)| vec![sequence_string(&c.left[i]), sequence_string(&c.right[j]), format_f64(m)]);
    Table { file: file.into(), contents: render(&["left", "right", "mass"], rows) }
}

/// Labels separated by spaces, or a run of single digits.
fn parse_sequence(s: &str) -> Result<Vec<Label>, String> {
    let s = s.trim();
    let parts: Vec<&str> = if s.contains(' ') { s.split_whitespace().collect() } else { s.split("").filter(|t| !t.is_empty()).collect() };
    parts.iter().map(|t| t.parse::<Label>().map_err(|_| format!("bad label {t:?} in {s:?}"))).collect()
}

/// Reads `sequence,mass` rows (header optional) into a distribution of length `n`.
pub fn read_distribution(path: &Path, n: usize) -> Result<LabelDistribution, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut masses: BTreeMap<Vec<Label>, f64> = BTreeMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(e.to_string()))?;
        if record.len() != 2 {
            return Err(CliError::Config(format!("{}:{}: expected sequence,mass", path.display(), line + 1)));
        }
        if line == 0 && record[1].parse::<f64>().is_err() {
            continue;
        }
        let seq = parse_sequence(&record[0]).map_err(CliError::Config)?;
        let mass: f64 = record[1].parse().map_err(|_| CliError::Config(format!("bad mass {:?}", &record[1])))?;
        *masses.entry(seq).or_insert(0.0) += mass;
    }
    LabelDistribution::new(n, masses).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn write_table(dir: &Path, table: &Table) -> Result<(), CliError> {
    let path = dir.join(&table.file);
    std::fs::write(&path, &table.contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
