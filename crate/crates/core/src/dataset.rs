//! CSV datasets: a header row, then one sample per row with the label in
//! the first column and `T` feature columns after it. Features are symbols
//! (discrete mode) or decimal numbers (real mode).

use std::fmt;
use std::io::Read;

use crate::naive_bayes::LabeledSequence;
use crate::numeric::{LabelSpace, ObservationAlphabet};
use crate::train::LabeledVector;

/// A dataset problem, tied to a 1-based line of the input when one applies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetError {
    pub line: Option<u64>,
    pub message: String,
}

impl DatasetError {
    fn at(line: u64, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            message: message.into(),
        }
    }

    fn general(message: impl Into<String>) -> Self {
        Self {
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for DatasetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DatasetError {
                line: Some(l),
                message,
            } => write!(f, "line {l}: {message}"),
            DatasetError {
                line: None,
                message,
            } => f.write_str(message),
        }
    }
}

impl std::error::Error for DatasetError {}

type Result<T> = std::result::Result<T, DatasetError>;

/// `(line, fields)` of one data row.
type Row = (u64, Vec<String>);

struct Table {
    header: Vec<String>,
    rows: Vec<Row>,
}

fn read_table<R: Read>(reader: R) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut header = None;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            DatasetError::at(line, format!("unreadable CSV record: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let fields: Vec<String> = record.iter().map(str::to_owned).collect();
        if fields.iter().all(String::is_empty) {
            continue;
        }
        if header.is_none() {
            header = Some(fields);
        } else {
            rows.push((line, fields));
        }
    }
    let header = header.ok_or_else(|| DatasetError::general("empty dataset"))?;
    if rows.is_empty() {
        return Err(DatasetError::general("empty dataset"));
    }
    let width = header.len();
    for (line, fields) in &rows {
        if fields.len() != width {
            return Err(DatasetError::at(
                *line,
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
    }
    Ok(Table { header, rows })
}

fn resolve_labels(
    table: &Table,
    declared: Option<&LabelSpace>,
) -> Result<(LabelSpace, Vec<usize>)> {
    if let Some(labels) = declared {
        let idx = table
            .rows
            .iter()
            .map(|(line, f)| {
                labels
                    .index_of(&f[0])
                    .ok_or_else(|| DatasetError::at(*line, format!("unknown label '{}'", f[0])))
            })
            .collect::<Result<Vec<_>>>()?;
        return Ok((labels.clone(), idx));
    }
    let mut names: Vec<String> = Vec::new();
    let mut idx = Vec::with_capacity(table.rows.len());
    for (line, f) in &table.rows {
        if f[0].is_empty() {
            return Err(DatasetError::at(*line, "missing label"));
        }
        let k = match names.iter().position(|n| *n == f[0]) {
            Some(k) => k,
            None => {
                names.push(f[0].clone());
                names.len() - 1
            }
        };
        idx.push(k);
    }
    let labels = LabelSpace::new(names).map_err(|e| {
        DatasetError::general(format!("{e}; declare the full label set explicitly"))
    })?;
    Ok((labels, idx))
}

fn feature_count(table: &Table) -> Result<usize> {
    match table.header.len() {
        0 | 1 => Err(DatasetError::at(
            1,
            "header needs a label column and at least one feature column",
        )),
        w => Ok(w - 1),
    }
}

/// Labelled symbol sequences with labels and per-column alphabets in order
/// of first appearance.
#[derive(Debug, Clone)]
pub struct DiscreteDataset {
    pub feature_names: Vec<String>,
    pub labels: LabelSpace,
    pub alphabets: Vec<ObservationAlphabet>,
    pub samples: Vec<LabeledSequence>,
}

pub fn read_discrete<R: Read>(reader: R, declared: Option<&LabelSpace>) -> Result<DiscreteDataset> {
    let table = read_table(reader)?;
    let t_len = feature_count(&table)?;
    let (labels, label_idx) = resolve_labels(&table, declared)?;
    let mut symbols: Vec<Vec<String>> = vec![Vec::new(); t_len];
    let mut samples = Vec::with_capacity(table.rows.len());
    for ((line, fields), label) in table.rows.iter().zip(label_idx) {
        let mut seq = Vec::with_capacity(t_len);
        for (t, value) in fields[1..].iter().enumerate() {
            if value.is_empty() {
                return Err(DatasetError::at(
                    *line,
                    format!("empty symbol in column {}", t + 2),
                ));
            }
            let k = match symbols[t].iter().position(|s| s == value) {
                Some(k) => k,
                None => {
                    symbols[t].push(value.clone());
                    symbols[t].len() - 1
                }
            };
            seq.push(k);
        }
        samples.push(LabeledSequence::new(label, seq));
    }
    let alphabets = symbols
        .into_iter()
        .map(|s| ObservationAlphabet::new(s).map_err(|e| DatasetError::general(e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteDataset {
        feature_names: table.header[1..].to_vec(),
        labels,
        alphabets,
        samples,
    })
}

#[derive(Debug, Clone)]
pub struct RealDataset {
    pub feature_names: Vec<String>,
    pub labels: LabelSpace,
    pub samples: Vec<LabeledVector>,
}

fn parse_real(line: u64, column: usize, value: &str) -> Result<f64> {
    let v: f64 = value.parse().map_err(|_| {
        DatasetError::at(line, format!("column {column}: '{value}' is not a number"))
    })?;
    if !v.is_finite() {
        return Err(DatasetError::at(
            line,
            format!("column {column}: '{value}' is not finite"),
        ));
    }
    Ok(v)
}

pub fn read_real<R: Read>(reader: R, declared: Option<&LabelSpace>) -> Result<RealDataset> {
    let table = read_table(reader)?;
    feature_count(&table)?;
    let (labels, label_idx) = resolve_labels(&table, declared)?;
    let samples = table
        .rows
        .iter()
        .zip(label_idx)
        .map(|((line, fields), label)| {
            let features = fields[1..]
                .iter()
                .enumerate()
                .map(|(t, v)| parse_real(*line, t + 2, v))
                .collect::<Result<Vec<_>>>()?;
            Ok(LabeledVector::new(label, features))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RealDataset {
        feature_names: table.header[1..].to_vec(),
        labels,
        samples,
    })
}

/// Feature columns of an observation file: either exactly `t_len` columns,
/// or a leading label column followed by `t_len` features (the label is
/// ignored).
fn observation_rows<R: Read>(reader: R, t_len: usize) -> Result<(usize, Vec<Row>)> {
    let table = read_table(reader)?;
    let skip = match table.header.len() {
        w if w == t_len => 0,
        w if w == t_len + 1 => 1,
        w => {
            return Err(DatasetError::at(
                1,
                format!("model expects {t_len} feature columns, header has {w}"),
            ))
        }
    };
    Ok((skip, table.rows))
}

pub fn read_discrete_observations<R: Read>(
    reader: R,
    alphabets: &[ObservationAlphabet],
) -> Result<Vec<Vec<usize>>> {
    let (skip, rows) = observation_rows(reader, alphabets.len())?;
    rows.iter()
        .map(|(line, fields)| {
            fields[skip..]
                .iter()
                .zip(alphabets)
                .enumerate()
                .map(|(t, (v, a))| {
                    a.index_of(v).ok_or_else(|| {
                        DatasetError::at(
                            *line,
                            format!("unknown symbol '{v}' in column {}", t + 1 + skip),
                        )
                    })
                })
                .collect()
        })
        .collect()
}

pub fn read_real_observations<R: Read>(reader: R, t_len: usize) -> Result<Vec<Vec<f64>>> {
    let (skip, rows) = observation_rows(reader, t_len)?;
    rows.iter()
        .map(|(line, fields)| {
            fields[skip..]
                .iter()
                .enumerate()
                .map(|(t, v)| parse_real(*line, t + 1 + skip, v))
                .collect()
        })
        .collect()
}

/// Symbols of one sequence, separated by commas or whitespace.
pub fn parse_symbol_sequence(text: &str, alphabet: &ObservationAlphabet) -> Result<Vec<usize>> {
    let seq = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(t, s)| {
            alphabet.index_of(s).ok_or_else(|| {
                DatasetError::general(format!("unknown symbol '{s}' at position {}", t + 1))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if seq.is_empty() {
        return Err(DatasetError::general("empty observation sequence"));
    }
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_first_appearance_order() {
        let csv = "label,f1,f2\nb,x,p\na,y,p\nb,x,q\n";
        let d = read_discrete(csv.as_bytes(), None).unwrap();
        assert_eq!(d.labels.names(), &["b", "a"]);
        assert_eq!(d.alphabets[0].symbols(), &["x", "y"]);
        assert_eq!(d.alphabets[1].symbols(), &["p", "q"]);
        assert_eq!(d.samples[2], LabeledSequence::new(0, vec![0, 1]));
        assert_eq!(d.feature_names, vec!["f1", "f2"]);
    }

    #[test]
    fn declared_labels_fix_order() {
        let labels = LabelSpace::new(["a", "b", "c"]).unwrap();
        let d = read_real("y,x\nb,1.5\nb,2\n".as_bytes(), Some(&labels)).unwrap();
        assert_eq!(d.labels.len(), 3);
        assert_eq!(d.samples[0], LabeledVector::new(1, vec![1.5]));
        let e = read_real("y,x\nd,1.5\n".as_bytes(), Some(&labels)).unwrap_err();
        assert_eq!(e.line, Some(2));
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(
            read_real("".as_bytes(), None).unwrap_err().to_string(),
            "empty dataset"
        );
        assert_eq!(
            read_real("y,x\n".as_bytes(), None).unwrap_err().to_string(),
            "empty dataset"
        );
        let e = read_real("y,x\na,1\nb,2,3\n".as_bytes(), None).unwrap_err();
        assert_eq!(e.to_string(), "line 3: expected 2 fields, found 3");
        let e = read_real("y,x\na,1\nb,zz\n".as_bytes(), None).unwrap_err();
        assert_eq!(e.line, Some(3));
        let e = read_real("y,x\na,inf\nb,1\n".as_bytes(), None).unwrap_err();
        assert_eq!(e.line, Some(2));
        // a single inferred label is not a label space
        assert!(read_real("y,x\na,1\na,2\n".as_bytes(), None).is_err());
    }

    #[test]
    fn observation_files_with_or_without_label() {
        let alphabets = vec![ObservationAlphabet::new(["x", "y"]).unwrap()];
        let with = read_discrete_observations("label,f\nq,y\n".as_bytes(), &alphabets).unwrap();
        let without = read_discrete_observations("f\ny\nx\n".as_bytes(), &alphabets).unwrap();
        assert_eq!(with, vec![vec![1]]);
        assert_eq!(without, vec![vec![1], vec![0]]);
        let e = read_discrete_observations("f\nz\n".as_bytes(), &alphabets).unwrap_err();
        assert!(e.to_string().contains("unknown symbol 'z'"));
        assert!(read_real_observations("a,b,c\n1,2,3\n".as_bytes(), 1).is_err());
    }

    #[test]
    fn symbol_sequences() {
        let a = ObservationAlphabet::new(["x", "y"]).unwrap();
        assert_eq!(
            parse_symbol_sequence("x, y y\nx", &a).unwrap(),
            vec![0, 1, 1, 0]
        );
        assert!(parse_symbol_sequence("x,z", &a).is_err());
        assert!(parse_symbol_sequence("  ", &a).is_err());
    }
}
