//! Tabular datasets with numeric and dictionary-encoded categorical features.
//!
//! A [`Dataset`] is an immutable, cheaply clonable view: column storage is
//! shared behind an `Arc` and the view carries the list of base rows it
//! exposes. Subsets and bootstrap resamples only allocate a new index list.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::rng::rng_from_seed;

/// Column kinds accepted in a schema sidecar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    ResponseNumeric,
    ResponseBinary,
}

impl ColumnKind {
    pub fn is_response(self) -> bool {
        matches!(self, ColumnKind::ResponseNumeric | ColumnKind::ResponseBinary)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
            ColumnKind::ResponseNumeric => "response-numeric",
            ColumnKind::ResponseBinary => "response-binary",
        }
    }
}

impl std::str::FromStr for ColumnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "numeric" => Ok(ColumnKind::Numeric),
            "categorical" => Ok(ColumnKind::Categorical),
            "response-numeric" => Ok(ColumnKind::ResponseNumeric),
            "response-binary" => Ok(ColumnKind::ResponseBinary),
            other => Err(Error::Schema(format!("unknown column kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// Ordered column declarations with exactly one response column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schema {
    columns: Vec<ColumnSpec>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>) -> Result<Self> {
        let responses = columns.iter().filter(|c| c.kind.is_response()).count();
        if responses != 1 {
            return Err(Error::Schema(format!(
                "expected exactly one response column, found {responses}"
            )));
        }
        let mut seen = BTreeSet::new();
        for c in &columns {
            if c.name.is_empty() {
                return Err(Error::Schema("empty column name".into()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::Schema(format!("duplicate column name '{}'", c.name)));
            }
        }
        Ok(Schema { columns })
    }

    /// Parses the sidecar format: one `name:kind` pair per line. Blank lines
    /// and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut columns = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (name, kind) = line.rsplit_once(':').ok_or_else(|| {
                Error::Schema(format!("line {}: expected 'name:kind'", lineno + 1))
            })?;
            columns.push(ColumnSpec {
                name: name.trim().to_string(),
                kind: kind.parse()?,
            });
        }
        Schema::new(columns)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Schema::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        self.columns
            .iter()
            .map(|c| format!("{}:{}\n", c.name, c.kind.as_str()))
            .collect()
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn response(&self) -> &ColumnSpec {
        self.columns.iter().find(|c| c.kind.is_response()).unwrap()
    }

    pub fn features(&self) -> impl Iterator<Item = &ColumnSpec> {
        self.columns.iter().filter(|c| !c.kind.is_response())
    }

    pub fn task(&self) -> Task {
        match self.response().kind {
            ColumnKind::ResponseBinary => Task::Binary,
            _ => Task::Regression,
        }
    }

    /// Hex SHA-256 over feature names and kinds in order.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for c in &self.columns {
            h.update(c.name.as_bytes());
            h.update([0u8]);
            h.update(c.kind.as_str().as_bytes());
            h.update([b'\n']);
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Regression,
    Binary,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Task::Regression => f.write_str("regression"),
            Task::Binary => f.write_str("binary"),
        }
    }
}

/// One feature column in base-row order.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureColumn {
    Numeric {
        name: String,
        values: Vec<f64>,
    },
    Categorical {
        name: String,
        codes: Vec<u32>,
        labels: Vec<String>,
    },
}

impl FeatureColumn {
    pub fn numeric(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Ingest {
                row: i,
                column: name,
                message: "non-finite value".into(),
            });
        }
        Ok(FeatureColumn::Numeric { name, values })
    }

    pub fn categorical(name: impl Into<String>, codes: Vec<u32>, labels: Vec<String>) -> Result<Self> {
        let name = name.into();
        let distinct: BTreeSet<&String> = labels.iter().collect();
        if distinct.len() != labels.len() {
            return Err(Error::Schema(format!("column '{name}': duplicate category labels")));
        }
        if let Some(i) = codes.iter().position(|&c| c as usize >= labels.len()) {
            return Err(Error::Ingest {
                row: i,
                column: name,
                message: format!("category code {} out of range", codes[i]),
            });
        }
        Ok(FeatureColumn::Categorical { name, codes, labels })
    }

    pub fn name(&self) -> &str {
        match self {
            FeatureColumn::Numeric { name, .. } | FeatureColumn::Categorical { name, .. } => name,
        }
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            FeatureColumn::Numeric { .. } => ColumnKind::Numeric,
            FeatureColumn::Categorical { .. } => ColumnKind::Categorical,
        }
    }

    /// K_j for categorical columns.
    pub fn n_categories(&self) -> Option<usize> {
        match self {
            FeatureColumn::Numeric { .. } => None,
            FeatureColumn::Categorical { labels, .. } => Some(labels.len()),
        }
    }

    fn len(&self) -> usize {
        match self {
            FeatureColumn::Numeric { values, .. } => values.len(),
            FeatureColumn::Categorical { codes, .. } => codes.len(),
        }
    }
}

/// Borrowed single-feature data handed to split and LOO routines.
#[derive(Debug, Clone, Copy)]
pub enum Column<'a> {
    Numeric(&'a [f64]),
    Categorical { codes: &'a [u32], n_categories: usize },
}

impl Column<'_> {
    pub fn len(&self) -> usize {
        match self {
            Column::Numeric(x) => x.len(),
            Column::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Owned single-feature data gathered for a set of rows.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical { codes: Vec<u32>, n_categories: usize },
}

impl ColumnData {
    pub fn as_column(&self) -> Column<'_> {
        match self {
            ColumnData::Numeric(x) => Column::Numeric(x),
            ColumnData::Categorical { codes, n_categories } => Column::Categorical {
                codes,
                n_categories: *n_categories,
            },
        }
    }
}

/// A feature value for a single row, used at prediction time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FeatureValue {
    Numeric(f64),
    /// A category code in the model's dictionary; `None` for a label the
    /// model never saw.
    Category(Option<u32>),
}

/// The response column: values are reals, binary labels are coded 0/1.
#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub name: String,
    pub values: Vec<f64>,
    pub task: Task,
    /// Text labels for codes 0 and 1 of a binary response.
    pub labels: Option<[String; 2]>,
}

impl Response {
    pub fn regression(name: impl Into<String>, values: Vec<f64>) -> Self {
        Response {
            name: name.into(),
            values,
            task: Task::Regression,
            labels: None,
        }
    }

    pub fn binary(name: impl Into<String>, values: Vec<f64>) -> Self {
        Response {
            name: name.into(),
            values,
            task: Task::Binary,
            labels: Some(["0".to_string(), "1".to_string()]),
        }
    }
}

#[derive(Debug)]
struct Features {
    columns: Vec<FeatureColumn>,
    schema: Schema,
    base_len: usize,
}

/// Immutable columnar dataset view.
#[derive(Debug, Clone)]
pub struct Dataset {
    features: Arc<Features>,
    response: Arc<Response>,
    rows: Arc<Vec<usize>>,
}

impl Dataset {
    pub fn new(columns: Vec<FeatureColumn>, response: Response) -> Result<Self> {
        let n = response.values.len();
        for c in &columns {
            if c.len() != n {
                return Err(Error::Schema(format!(
                    "column '{}' has {} rows, response has {n}",
                    c.name(),
                    c.len()
                )));
            }
        }
        if let Some(i) = response.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Ingest {
                row: i,
                column: response.name.clone(),
                message: "non-finite response".into(),
            });
        }
        if response.task == Task::Binary {
            if let Some(i) = response.values.iter().position(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::Ingest {
                    row: i,
                    column: response.name.clone(),
                    message: "binary response must be 0 or 1".into(),
                });
            }
        }
        let mut specs: Vec<ColumnSpec> = columns
            .iter()
            .map(|c| ColumnSpec {
                name: c.name().to_string(),
                kind: c.kind(),
            })
            .collect();
        specs.push(ColumnSpec {
            name: response.name.clone(),
            kind: match response.task {
                Task::Regression => ColumnKind::ResponseNumeric,
                Task::Binary => ColumnKind::ResponseBinary,
            },
        });
        let schema = Schema::new(specs)?;
        Ok(Dataset {
            features: Arc::new(Features {
                columns,
                schema,
                base_len: n,
            }),
            response: Arc::new(response),
            rows: Arc::new((0..n).collect()),
        })
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.columns.len()
    }

    pub fn task(&self) -> Task {
        self.response.task
    }

    pub fn schema(&self) -> &Schema {
        &self.features.schema
    }

    pub fn feature(&self, j: usize) -> &FeatureColumn {
        &self.features.columns[j]
    }

    pub fn features(&self) -> &[FeatureColumn] {
        &self.features.columns
    }

    pub fn response_name(&self) -> &str {
        &self.response.name
    }

    pub fn response_labels(&self) -> Option<&[String; 2]> {
        self.response.labels.as_ref()
    }

    /// Base-storage row indices exposed by this view.
    pub fn base_rows(&self) -> &[usize] {
        &self.rows
    }

    #[inline]
    pub fn y(&self, i: usize) -> f64 {
        self.response.values[self.rows[i]]
    }

    pub fn responses(&self) -> Vec<f64> {
        self.rows.iter().map(|&r| self.response.values[r]).collect()
    }

    #[inline]
    pub fn numeric_value(&self, j: usize, i: usize) -> Option<f64> {
        match &self.features.columns[j] {
            FeatureColumn::Numeric { values, .. } => Some(values[self.rows[i]]),
            FeatureColumn::Categorical { .. } => None,
        }
    }

    #[inline]
    pub fn category_code(&self, j: usize, i: usize) -> Option<u32> {
        match &self.features.columns[j] {
            FeatureColumn::Categorical { codes, .. } => Some(codes[self.rows[i]]),
            FeatureColumn::Numeric { .. } => None,
        }
    }

    /// Feature `j` restricted to the view rows `idx` (view-relative).
    pub fn gather(&self, j: usize, idx: &[usize]) -> ColumnData {
        match &self.features.columns[j] {
            FeatureColumn::Numeric { values, .. } => {
                ColumnData::Numeric(idx.iter().map(|&i| values[self.rows[i]]).collect())
            }
            FeatureColumn::Categorical { codes, labels, .. } => ColumnData::Categorical {
                codes: idx.iter().map(|&i| codes[self.rows[i]]).collect(),
                n_categories: labels.len(),
            },
        }
    }

    /// Feature `j` over every view row.
    pub fn column(&self, j: usize) -> ColumnData {
        match &self.features.columns[j] {
            FeatureColumn::Numeric { values, .. } => {
                ColumnData::Numeric(self.rows.iter().map(|&r| values[r]).collect())
            }
            FeatureColumn::Categorical { codes, labels, .. } => ColumnData::Categorical {
                codes: self.rows.iter().map(|&r| codes[r]).collect(),
                n_categories: labels.len(),
            },
        }
    }

    pub fn gather_responses(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&i| self.y(i)).collect()
    }

    /// Row `i` in the dataset's own category dictionaries.
    pub fn row(&self, i: usize) -> Vec<FeatureValue> {
        let r = self.rows[i];
        self.features
            .columns
            .iter()
            .map(|c| match c {
                FeatureColumn::Numeric { values, .. } => FeatureValue::Numeric(values[r]),
                FeatureColumn::Categorical { codes, .. } => FeatureValue::Category(Some(codes[r])),
            })
            .collect()
    }

    /// View over the given view-relative rows. Indices must be distinct.
    pub fn subset(&self, idx: &[usize]) -> Result<Dataset> {
        let n = self.n();
        let mut seen = vec![false; n];
        for &i in idx {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, len: n });
            }
            if std::mem::replace(&mut seen[i], true) {
                return invalid(format!("duplicate row index {i} in subset"));
            }
        }
        Ok(self.select_rows(idx))
    }

    /// Like [`subset`](Self::subset) but repeated indices are allowed
    /// (bootstrap samples).
    pub fn resample(&self, idx: &[usize]) -> Result<Dataset> {
        let n = self.n();
        if let Some(&i) = idx.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
        Ok(self.select_rows(idx))
    }

    pub(crate) fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: Arc::clone(&self.features),
            response: Arc::clone(&self.response),
            rows: Arc::new(idx.iter().map(|&i| self.rows[i]).collect()),
        }
    }

    /// Same rows and features with a replacement response (one value per
    /// view row). Used for boosting residuals.
    pub fn with_response(&self, values: &[f64], task: Task) -> Result<Dataset> {
        if values.len() != self.n() {
            return invalid(format!(
                "response has {} values for {} rows",
                values.len(),
                self.n()
            ));
        }
        let mut base = vec![0.0; self.features.base_len];
        for (&r, &v) in self.rows.iter().zip(values) {
            base[r] = v;
        }
        let response = Response {
            name: self.response.name.clone(),
            values: base,
            task,
            labels: if task == Task::Binary {
                self.response.labels.clone()
            } else {
                None
            },
        };
        Ok(Dataset {
            features: Arc::clone(&self.features),
            response: Arc::new(response),
            rows: Arc::clone(&self.rows),
        })
    }

    /// Encodes a feature column of this dataset into another dictionary.
    /// Returns, per code of this dataset, the code in `target` (or `None`).
    pub fn category_mapping(&self, j: usize, target: &[String]) -> Option<Vec<Option<u32>>> {
        match &self.features.columns[j] {
            FeatureColumn::Categorical { labels, .. } => {
                let lookup: HashMap<&str, u32> = target
                    .iter()
                    .enumerate()
                    .map(|(c, l)| (l.as_str(), c as u32))
                    .collect();
                Some(labels.iter().map(|l| lookup.get(l.as_str()).copied()).collect())
            }
            FeatureColumn::Numeric { .. } => None,
        }
    }
}

/// Missing-value handling at ingestion. Only row dropping is supported.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MissingPolicy {
    #[default]
    DropRow,
}

fn is_missing(tok: &str) -> bool {
    let t = tok.trim();
    t.is_empty() || t == "NA"
}

/// Loads a CSV file whose header matches the schema's column names.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema, policy: MissingPolicy) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_csv(file, schema, policy)
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema, _policy: MissingPolicy) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let declared: BTreeSet<&str> = schema.columns().iter().map(|c| c.name.as_str()).collect();
    let present: BTreeSet<&str> = header.iter().map(String::as_str).collect();
    if declared != present || header.len() != schema.columns().len() {
        return Err(Error::Schema(format!(
            "header [{}] does not match schema columns [{}]",
            header.join(","),
            schema
                .columns()
                .iter()
                .map(|c| c.name.as_str())
                .collect::<Vec<_>>()
                .join(",")
        )));
    }
    // position in the CSV record of each schema column
    let position: Vec<usize> = schema
        .columns()
        .iter()
        .map(|c| header.iter().position(|h| *h == c.name).unwrap())
        .collect();

    let mut kept: Vec<(usize, csv::StringRecord)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        if rec.len() != header.len() {
            return Err(Error::Ingest {
                row: line,
                column: String::new(),
                message: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        if position.iter().any(|&p| is_missing(&rec[p])) {
            continue;
        }
        kept.push((line, rec));
    }
    if kept.is_empty() {
        return Err(Error::EmptyData);
    }

    let mut columns = Vec::new();
    let mut response = None;
    for (spec, &p) in schema.columns().iter().zip(&position) {
        match spec.kind {
            ColumnKind::Numeric | ColumnKind::ResponseNumeric => {
                let mut values = Vec::with_capacity(kept.len());
                for (line, rec) in &kept {
                    let tok = rec[p].trim();
                    let v: f64 = tok.parse().map_err(|_| Error::Ingest {
                        row: *line,
                        column: spec.name.clone(),
                        message: format!("cannot parse '{tok}' as a number"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Ingest {
                            row: *line,
                            column: spec.name.clone(),
                            message: format!("non-finite value '{tok}'"),
                        });
                    }
                    values.push(v);
                }
                if spec.kind == ColumnKind::Numeric {
                    columns.push(FeatureColumn::Numeric {
                        name: spec.name.clone(),
                        values,
                    });
                } else {
                    response = Some(Response::regression(spec.name.clone(), values));
                }
            }
            ColumnKind::Categorical => {
                let mut dict: HashMap<String, u32> = HashMap::new();
                let mut labels = Vec::new();
                let mut codes = Vec::with_capacity(kept.len());
                for (_, rec) in &kept {
                    let tok = rec[p].trim();
                    let code = *dict.entry(tok.to_string()).or_insert_with(|| {
                        labels.push(tok.to_string());
                        (labels.len() - 1) as u32
                    });
                    codes.push(code);
                }
                columns.push(FeatureColumn::Categorical {
                    name: spec.name.clone(),
                    codes,
                    labels,
                });
            }
            ColumnKind::ResponseBinary => {
                let distinct: BTreeSet<&str> = kept.iter().map(|(_, r)| r[p].trim()).collect();
                if distinct.len() > 2 {
                    return Err(Error::Ingest {
                        row: 0,
                        column: spec.name.clone(),
                        message: format!("binary response has {} distinct labels", distinct.len()),
                    });
                }
                let sorted: Vec<&str> = distinct.into_iter().collect();
                let labels = match sorted.as_slice() {
                    [a, b] => [a.to_string(), b.to_string()],
                    [a] => [a.to_string(), String::new()],
                    _ => unreachable!(),
                };
                let values = kept
                    .iter()
                    .map(|(_, r)| if r[p].trim() == sorted[0] { 0.0 } else { 1.0 })
                    .collect();
                response = Some(Response {
                    name: spec.name.clone(),
                    values,
                    task: Task::Binary,
                    labels: Some(labels),
                });
            }
        }
    }
    Dataset::new(columns, response.expect("schema has a response"))
}

/// Writes the view back to CSV with category and class labels restored.
/// Columns follow feature order with the response last.
pub fn write_csv<W: Write>(d: &Dataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = d.features().iter().map(|c| c.name()).collect();
    header.push(d.response_name());
    w.write_record(&header)?;
    for i in 0..d.n() {
        let r = d.base_rows()[i];
        let mut rec: Vec<String> = d
            .features()
            .iter()
            .map(|c| match c {
                FeatureColumn::Numeric { values, .. } => values[r].to_string(),
                FeatureColumn::Categorical { codes, labels, .. } => labels[codes[r] as usize].clone(),
            })
            .collect();
        let y = d.y(i);
        rec.push(match d.response_labels() {
            Some(labels) if d.task() == Task::Binary => labels[y as usize].clone(),
            _ => y.to_string(),
        });
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Fold index per row for k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub folds: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

impl FoldAssignment {
    /// Each row in its own fold (leave-one-out).
    pub fn singletons(n: usize) -> Self {
        FoldAssignment {
            folds: (0..n).collect(),
            k: n,
            seed: 0,
        }
    }

    pub fn test_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] == fold).collect()
    }

    pub fn train_rows(&self, fold: usize) -> Vec<usize> {
        (0..self.folds.len()).filter(|&i| self.folds[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.folds {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Deterministic shuffled assignment of `n` rows into `k` folds of sizes
/// ⌊n/k⌋ or ⌈n/k⌉.
pub fn kfold_partition(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return invalid(format!("fold count must be at least 2, got {k}"));
    }
    if k > n {
        return invalid(format!("fold count {k} exceeds row count {n}"));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng_from_seed(seed));
    let mut folds = vec![0; n];
    for (pos, &row) in perm.iter().enumerate() {
        folds[row] = pos % k;
    }
    Ok(FoldAssignment { folds, k, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &str = "age:numeric\ncity:categorical\ny:response-binary\n";

    fn load(text: &str) -> Result<Dataset> {
        read_csv(text.as_bytes(), &Schema::parse(SCHEMA).unwrap(), MissingPolicy::DropRow)
    }

    #[test]
    fn loads_mixed_columns() {
        let d = load("age,city,y\n30,paris,yes\n41,rome,no\n25,paris,yes\n").unwrap();
        assert_eq!(d.n(), 3);
        assert_eq!(d.feature(1).n_categories(), Some(2));
        assert_eq!(d.responses(), vec![1.0, 0.0, 1.0]);
        match d.feature(1) {
            FeatureColumn::Categorical { codes, labels, .. } => {
                assert_eq!(labels, &["paris", "rome"]);
                assert_eq!(codes, &[0, 1, 0]);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn drops_rows_with_missing_cells() {
        let d = load("age,city,y\n30,paris,yes\n,rome,no\n25,NA,yes\n40,oslo,no\n").unwrap();
        assert_eq!(d.n(), 2);
        // dictionary built from retained rows only
        assert_eq!(d.feature(1).n_categories(), Some(2));
    }

    #[test]
    fn rejects_bad_numeric_token() {
        let err = load("age,city,y\nabc,paris,yes\n").unwrap_err();
        assert!(matches!(err, Error::Ingest { row: 2, .. }), "{err}");
        assert!(load("age,city,y\ninf,paris,yes\n").is_err());
    }

    #[test]
    fn header_mismatch_and_empty() {
        assert!(matches!(load("age,town,y\n1,a,b\n"), Err(Error::Schema(_))));
        assert!(matches!(load("age,city,y\n,a,b\n"), Err(Error::EmptyData)));
    }

    #[test]
    fn schema_validation() {
        assert!(Schema::parse("a:numeric\nb:numeric\n").is_err());
        assert!(Schema::parse("a:numeric\na:response-numeric\n").is_err());
        assert!(Schema::parse("a:float\ny:response-numeric\n").is_err());
        let s = Schema::parse("# comment\na:numeric\n\ny:response-numeric\n").unwrap();
        assert_eq!(Schema::parse(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn csv_round_trip() {
        let text = "age,city,y\n30.5,paris,yes\n41,rome,no\n25,paris,yes\n";
        let d = load(text).unwrap();
        let mut out = Vec::new();
        write_csv(&d, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn subset_contracts() {
        let d = load("age,city,y\n30,paris,yes\n41,rome,no\n25,paris,yes\n").unwrap();
        let all = d.subset(&[0, 1, 2]).unwrap();
        assert_eq!(all.responses(), d.responses());
        assert_eq!(d.subset(&[]).unwrap().n(), 0);
        let no_rome = d.subset(&[0, 2]).unwrap();
        assert_eq!(no_rome.feature(1).n_categories(), Some(2));
        assert!(matches!(d.subset(&[3]), Err(Error::IndexOutOfRange { .. })));
        assert!(d.subset(&[0, 0]).is_err());
        assert_eq!(d.resample(&[0, 0]).unwrap().n(), 2);
    }

    #[test]
    fn kfold_examples() {
        let f = kfold_partition(10, 10, 3).unwrap();
        assert_eq!(f.fold_sizes(), vec![1; 10]);
        let f = kfold_partition(10, 3, 3).unwrap();
        let mut sizes = f.fold_sizes();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![3, 3, 4]);
        assert_eq!(f, kfold_partition(10, 3, 3).unwrap());
        assert!(kfold_partition(3, 4, 0).is_err());
        assert!(kfold_partition(3, 1, 0).is_err());
    }
}
