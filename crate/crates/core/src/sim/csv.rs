//! Dataset interchange format: header `f1,…,fp,label`, one observation per
//! row, values in shortest round-trip decimal. The label column is optional
//! on input.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::SimulatedDataset;
use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// Observations plus the label column, when the file has one.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub data: DataMatrix,
    pub labels: Option<Vec<u8>>,
}

pub fn write_dataset<W: Write>(dataset: &SimulatedDataset, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    let p = dataset.data.ncols();
    let header: Vec<String> = (1..=p).map(|j| format!("f{j}")).chain(["label".to_string()]).collect();
    writeln!(out, "{}", header.join(","))?;
    let mut line = String::new();
    for (row, label) in dataset.data.rows().zip(&dataset.labels) {
        line.clear();
        for v in row {
            // Display for f64 is the shortest string that round-trips.
            line.push_str(&v.to_string());
            line.push(',');
        }
        line.push_str(&label.to_string());
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_dataset_path(dataset: &SimulatedDataset, path: &Path) -> Result<()> {
    write_dataset(dataset, File::create(path)?)
}

pub fn read_dataset<R: Read>(input: R) -> Result<LabeledData> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let headers = reader.headers().map_err(|e| csv_error(e, 1))?.clone();
    if headers.is_empty() {
        return Err(Error::format_at(1, "missing header row"));
    }
    let has_label = headers.iter().next_back() == Some("label");
    let p = headers.len() - usize::from(has_label);
    if p == 0 {
        return Err(Error::format_at(1, "no feature columns"));
    }

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut n = 0;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| csv_error(e, line))?;
        if record.len() != headers.len() {
            return Err(Error::format_at(
                line,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        for (j, field) in record.iter().take(p).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::format_at(line, format!("column {} is not a number: {field:?}", j + 1)))?;
            if !v.is_finite() {
                return Err(Error::format_at(line, format!("column {} is not finite", j + 1)));
            }
            values.push(v);
        }
        if has_label {
            labels.push(parse_label(&record[p], line)?);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::format("dataset has no observations"));
    }
    Ok(LabeledData { data: DataMatrix::new(n, p, values)?, labels: has_label.then_some(labels) })
}

pub fn read_dataset_path(path: &Path) -> Result<LabeledData> {
    read_dataset(File::open(path)?)
}

pub(crate) fn parse_label(field: &str, line: usize) -> Result<u8> {
    match field.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(Error::format_at(line, format!("label must be 0 or 1, found {other:?}"))),
    }
}

fn csv_error(err: csv::Error, line: usize) -> Error {
    match err.kind() {
        csv::ErrorKind::Io(_) => match err.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            _ => unreachable!(),
        },
        _ => {
            let line = err.position().map(|p| p.line() as usize).unwrap_or(line);
            Error::format_at(line, err.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{sample_dataset, ContaminationConfig};
    use proptest::prelude::*;

    #[test]
    fn writes_header_and_labels() {
        let cfg = ContaminationConfig { n: 3, p: 2, epsilon: 0.0, eta: 0.0, gamma: 1.0, rho: 0.0, seed: 1 };
        let ds = sample_dataset(&cfg).unwrap();
        let mut buf = Vec::new();
        write_dataset(&ds, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "f1,f2,label");
        assert_eq!(lines.len(), 4);
        assert!(lines[1..].iter().all(|l| l.ends_with(",0")));
    }

    #[test]
    fn reads_without_label_column() {
        let parsed = read_dataset("a,b\n1,2\n3,4.5\n".as_bytes()).unwrap();
        assert_eq!(parsed.labels, None);
        assert_eq!(parsed.data.row(1), &[3.0, 4.5]);
    }

    #[test]
    fn reports_line_numbers() {
        let err = read_dataset("f1,label\n1,0\nx,1\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = read_dataset("f1,label\n1,0\n2,3\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        let err = read_dataset("f1,f2\n1,2\n3\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(read_dataset("f1,f2\n".as_bytes()).is_err());
        assert!(read_dataset("f1\nNaN\n".as_bytes()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), n in 1usize..20, p in 1usize..6) {
            let cfg = ContaminationConfig { n, p, epsilon: 0.2, eta: 3.0, gamma: 2.0, rho: 0.3, seed };
            let ds = sample_dataset(&cfg).unwrap();
            let mut buf = Vec::new();
            write_dataset(&ds, &mut buf).unwrap();
            let back = read_dataset(buf.as_slice()).unwrap();
            prop_assert_eq!(back.data, ds.data);
            prop_assert_eq!(back.labels, Some(ds.labels));
        }
    }
}
