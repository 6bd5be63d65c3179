//! Paired two-modality datasets and their CSV form.
//!
//! Header layout: `id,label,src_<name>…,bin_<name>…`. Source (`x`) columns
//! come first, binary (`y`) columns after. Values are written with Rust's
//! shortest round-trip float formatting, so write→load is exact.

use std::collections::HashSet;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::Matrix;

pub const SRC_PREFIX: &str = "src_";
pub const BIN_PREFIX: &str = "bin_";

#[derive(Clone, Debug, PartialEq)]
pub struct BimodalDataset {
    pub ids: Vec<String>,
    /// Source-code features, `n × dim_x`.
    pub x: Matrix,
    /// Binary features, `n × dim_y`.
    pub y: Matrix,
    pub labels: Vec<u8>,
    /// Column names without the `src_` prefix.
    pub x_names: Vec<String>,
    /// Column names without the `bin_` prefix.
    pub y_names: Vec<String>,
}

impl BimodalDataset {
    /// Builds a dataset with generated column names `0..dim`.
    pub fn new(ids: Vec<String>, x: Matrix, y: Matrix, labels: Vec<u8>) -> Result<Self> {
        let x_names = (0..x.cols()).map(|i| i.to_string()).collect();
        let y_names = (0..y.cols()).map(|i| i.to_string()).collect();
        let ds = BimodalDataset {
            ids,
            x,
            y,
            labels,
            x_names,
            y_names,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.labels.len();
        if self.ids.len() != n || self.x.rows() != n || self.y.rows() != n {
            return Err(Error::Shape(format!(
                "dataset rows disagree: {} ids, {} x rows, {} y rows, {} labels",
                self.ids.len(),
                self.x.rows(),
                self.y.rows(),
                n
            )));
        }
        if self.x_names.len() != self.x.cols() || self.y_names.len() != self.y.cols() {
            return Err(Error::Shape("column names do not match feature dimensions".into()));
        }
        if let Some(l) = self.labels.iter().find(|&&l| l > 1) {
            return Err(Error::Argument(format!("label {l} is not binary")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim_x(&self) -> usize {
        self.x.cols()
    }

    pub fn dim_y(&self) -> usize {
        self.y.cols()
    }

    /// `[count of label 0, count of label 1]`.
    pub fn label_counts(&self) -> [usize; 2] {
        let ones = self.labels.iter().filter(|&&l| l == 1).count();
        [self.labels.len() - ones, ones]
    }

    pub fn subset(&self, indices: &[usize]) -> BimodalDataset {
        BimodalDataset {
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            x: self.x.select_rows(indices),
            y: self.y.select_rows(indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            x_names: self.x_names.clone(),
            y_names: self.y_names.clone(),
        }
    }

    pub fn labels_at(&self, indices: &[usize]) -> Vec<u8> {
        indices.iter().map(|&i| self.labels[i]).collect()
    }
}

fn csv_err(path: &Path, line: u64, msg: impl Into<String>) -> Error {
    Error::Csv {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

pub fn load_csv(path: &Path) -> Result<BimodalDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, path)
}

/// Parses dataset CSV from any reader; `path` is used only in error messages.
pub fn read_csv<R: std::io::Read>(reader: R, path: &Path) -> Result<BimodalDataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header = rdr
        .headers()
        .map_err(|e| csv_err(path, 1, e.to_string()))?
        .clone();
    let fields: Vec<&str> = header.iter().collect();
    if fields.len() < 2 || fields[0] != "id" || fields[1] != "label" {
        return Err(csv_err(path, 1, "header must start with `id,label`"));
    }
    let mut seen = HashSet::new();
    let mut x_names = Vec::new();
    let mut y_names = Vec::new();
    for f in &fields {
        if !seen.insert(*f) {
            return Err(csv_err(path, 1, format!("duplicate header field `{f}`")));
        }
    }
    for f in &fields[2..] {
        if let Some(name) = f.strip_prefix(SRC_PREFIX) {
            if !y_names.is_empty() {
                return Err(csv_err(path, 1, format!("`{f}` appears after a bin_ column")));
            }
            x_names.push(name.to_string());
        } else if let Some(name) = f.strip_prefix(BIN_PREFIX) {
            y_names.push(name.to_string());
        } else {
            return Err(csv_err(path, 1, format!("header field `{f}` lacks a src_ or bin_ prefix")));
        }
    }
    let (dx, dy) = (x_names.len(), y_names.len());
    let mut ids = Vec::new();
    let mut labels = Vec::new();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != fields.len() {
            return Err(csv_err(
                path,
                line,
                format!("expected {} fields, found {}", fields.len(), rec.len()),
            ));
        }
        ids.push(rec[0].to_string());
        labels.push(match rec[1].trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(csv_err(path, line, format!("label `{other}` is not 0 or 1"))),
        });
        for (j, cell) in rec.iter().enumerate().skip(2) {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| csv_err(path, line, format!("non-numeric value `{cell}` in `{}`", fields[j])))?;
            if !v.is_finite() {
                return Err(csv_err(path, line, format!("non-finite value `{cell}` in `{}`", fields[j])));
            }
            if j < 2 + dx {
                xs.push(v);
            } else {
                ys.push(v);
            }
        }
    }
    let n = labels.len();
    let ds = BimodalDataset {
        ids,
        x: Matrix::from_vec(n, dx, xs)?,
        y: Matrix::from_vec(n, dy, ys)?,
        labels,
        x_names,
        y_names,
    };
    Ok(ds)
}

pub fn write_csv(ds: &BimodalDataset, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(ds, file).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_csv_to<W: std::io::Write>(ds: &BimodalDataset, writer: W) -> Result<()> {
    let fmt = |e: csv::Error| Error::Format(e.to_string());
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "label".to_string()];
    header.extend(ds.x_names.iter().map(|n| format!("{SRC_PREFIX}{n}")));
    header.extend(ds.y_names.iter().map(|n| format!("{BIN_PREFIX}{n}")));
    w.write_record(&header).map_err(fmt)?;
    for r in 0..ds.len() {
        let mut rec = Vec::with_capacity(header.len());
        rec.push(ds.ids[r].clone());
        rec.push(ds.labels[r].to_string());
        rec.extend(ds.x.row(r).iter().map(|v| v.to_string()));
        rec.extend(ds.y.row(r).iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(fmt)?;
    }
    w.flush().map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::testing::random_matrix;

    fn parse(text: &str) -> Result<BimodalDataset> {
        read_csv(text.as_bytes(), Path::new("t.csv"))
    }

    #[test]
    fn shape_from_prefixes() {
        let ds = parse("id,label,src_a,src_b,src_c,bin_p,bin_q\nf1,0,1,2,3,4,5\nf2,1,6,7,8,9,1e-3\n").unwrap();
        assert_eq!((ds.len(), ds.dim_x(), ds.dim_y()), (2, 3, 2));
        assert_eq!(ds.y.get(1, 1), 1e-3);
        assert_eq!(ds.x_names, ["a", "b", "c"]);
    }

    #[test]
    fn bad_label_reports_line() {
        let err = parse("id,label,src_a,bin_b\nf1,0,1,2\nf2,2,1,2\n").unwrap_err();
        match err {
            Error::Csv { line, msg, .. } => {
                assert_eq!(line, 3);
                assert!(msg.contains("label"));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        let cases = [
            ("id,label,src_a,src_a\nf,0,1,2\n", 1),
            ("label,id,src_a\n0,f,1\n", 1),
            ("id,label,src_a,bin_b\nf,0,x,2\n", 2),
            ("id,label,src_a,bin_b\nf,0,1,2\ng,1,1\n", 3),
            ("id,label,bin_b,src_a\nf,0,1,2\n", 1),
            ("id,label,feat\nf,0,1\n", 1),
        ];
        for (text, want) in cases {
            match parse(text) {
                Err(Error::Csv { line, .. }) => assert_eq!(line, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn write_then_load_is_exact() {
        let x = random_matrix(20, 4, 1).map(|v| v * 1e3);
        let y = random_matrix(20, 3, 2).map(|v| v * 1e-7);
        let labels = (0..20).map(|i| (i % 3 == 0) as u8).collect();
        let ids = (0..20).map(|i| format!("fn,{i}")).collect();
        let ds = BimodalDataset::new(ids, x, y, labels).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&ds, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, ds);
        assert!(back.x.max_abs_diff(&ds.x) <= 1e-12);
    }
}
