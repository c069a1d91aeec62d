//! In-memory data model and file ingestion.
//!
//! A [`Dataset`] is a set of attribute columns plus one nominal class column,
//! all of the same length. Columns are stored column-major because every
//! ranker reads whole attributes at a time.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Integer-coded column. Every code is `< cardinality`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteColumn {
    codes: Vec<u32>,
    cardinality: u32,
}

impl DiscreteColumn {
    pub fn new(codes: Vec<u32>, cardinality: u32) -> Result<Self> {
        if cardinality == 0 {
            return Err(Error::invalid("discrete column cardinality must be at least 1"));
        }
        if let Some((row, &c)) = codes.iter().enumerate().find(|(_, &c)| c >= cardinality) {
            return Err(Error::invalid(format!(
                "code {c} at row {row} is out of range for cardinality {cardinality}"
            )));
        }
        Ok(Self { codes, cardinality })
    }

    /// Codes the column with the smallest cardinality that fits.
    pub fn from_codes(codes: Vec<u32>) -> Self {
        let cardinality = codes.iter().max().map_or(1, |&m| m + 1);
        Self { codes, cardinality }
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn cardinality(&self) -> u32 {
        self.cardinality
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    /// Occurrences of each code, indexed by code.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.cardinality as usize];
        for &c in &self.codes {
            counts[c as usize] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericColumn {
    values: Vec<f64>,
    missing: Option<Vec<bool>>,
}

impl NumericColumn {
    /// Builds a fully observed column. Rejects non-finite values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(row) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite numeric value at row {row}")));
        }
        Ok(Self {
            values,
            missing: None,
        })
    }

    /// Builds a column from optional values, imputing the mean of the
    /// observed ones. With nothing observed the fill value is 0.
    pub fn with_missing(raw: Vec<Option<f64>>) -> Result<Self> {
        let observed: Vec<f64> = raw.iter().flatten().copied().collect();
        if let Some(v) = observed.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite numeric value {v}")));
        }
        if observed.len() == raw.len() {
            return Ok(Self {
                values: observed,
                missing: None,
            });
        }
        let fill = if observed.is_empty() {
            0.0
        } else {
            observed.iter().sum::<f64>() / observed.len() as f64
        };
        let missing: Vec<bool> = raw.iter().map(Option::is_none).collect();
        let values = raw.into_iter().map(|v| v.unwrap_or(fill)).collect();
        Ok(Self {
            values,
            missing: Some(missing),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Rows whose value was imputed, if any were.
    pub fn missing(&self) -> Option<&[bool]> {
        self.missing.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NominalColumn {
    column: DiscreteColumn,
    labels: Vec<String>,
    missing_code: Option<u32>,
}

impl NominalColumn {
    pub fn new(column: DiscreteColumn, labels: Vec<String>) -> Result<Self> {
        if labels.len() != column.cardinality() as usize {
            return Err(Error::invalid(format!(
                "{} labels for a column of cardinality {}",
                labels.len(),
                column.cardinality()
            )));
        }
        Ok(Self {
            column,
            labels,
            missing_code: None,
        })
    }

    /// Nominal column with generated labels `0..cardinality`.
    pub fn unlabeled(column: DiscreteColumn) -> Self {
        let labels = (0..column.cardinality()).map(|c| c.to_string()).collect();
        Self {
            column,
            labels,
            missing_code: None,
        }
    }

    pub fn column(&self) -> &DiscreteColumn {
        &self.column
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Code reserved for missing values, when the source had any.
    pub fn missing_code(&self) -> Option<u32> {
        self.missing_code
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeColumn {
    Numeric(NumericColumn),
    Nominal(NominalColumn),
}

impl AttributeColumn {
    pub fn len(&self) -> usize {
        match self {
            AttributeColumn::Numeric(c) => c.len(),
            AttributeColumn::Nominal(c) => c.column.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, AttributeColumn::Numeric(_))
    }

    pub fn as_numeric(&self) -> Option<&NumericColumn> {
        match self {
            AttributeColumn::Numeric(c) => Some(c),
            AttributeColumn::Nominal(_) => None,
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteColumn> {
        match self {
            AttributeColumn::Numeric(_) => None,
            AttributeColumn::Nominal(c) => Some(&c.column),
        }
    }

    /// Text form of one cell, as written to CSV/ARFF.
    fn cell(&self, row: usize, missing_token: &str) -> String {
        match self {
            AttributeColumn::Numeric(c) => {
                if c.missing.as_ref().is_some_and(|m| m[row]) {
                    missing_token.to_string()
                } else {
                    format!("{}", c.values[row])
                }
            }
            AttributeColumn::Nominal(c) => {
                let code = c.column.codes[row];
                if c.missing_code == Some(code) {
                    missing_token.to_string()
                } else {
                    c.labels[code as usize].clone()
                }
            }
        }
    }
}

/// Which column holds the class labels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ClassSpec {
    #[default]
    Last,
    Name(String),
    /// Zero-based column position.
    Index(usize),
}

impl ClassSpec {
    /// Names win over positions, so a column literally called "3" is found by name.
    fn resolve(&self, names: &[String]) -> Option<usize> {
        match self {
            ClassSpec::Last => names.len().checked_sub(1),
            ClassSpec::Name(n) => names
                .iter()
                .position(|x| x == n)
                .or_else(|| n.parse::<usize>().ok().filter(|&i| i < names.len())),
            ClassSpec::Index(i) => (*i < names.len()).then_some(*i),
        }
    }
}

impl std::str::FromStr for ClassSpec {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s.is_empty() || s.eq_ignore_ascii_case("last") {
            ClassSpec::Last
        } else {
            ClassSpec::Name(s.to_string())
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    attribute_names: Vec<String>,
    columns: Vec<AttributeColumn>,
    class_name: String,
    class_labels: Vec<String>,
    class_column: DiscreteColumn,
}

impl Dataset {
    /// Validates and assembles a dataset. Attribute names must be unique, all
    /// columns as long as the class column, and every class code in use.
    pub fn new(
        name: impl Into<String>,
        attributes: Vec<(String, AttributeColumn)>,
        class_name: impl Into<String>,
        class_column: DiscreteColumn,
        class_labels: Vec<String>,
    ) -> Result<Self> {
        let w = class_column.len();
        if w == 0 {
            return Err(Error::invalid("dataset has no instances"));
        }
        if class_labels.len() != class_column.cardinality() as usize {
            return Err(Error::invalid(format!(
                "{} class labels for {} class codes",
                class_labels.len(),
                class_column.cardinality()
            )));
        }
        if let Some(code) = class_column.counts().iter().position(|&c| c == 0) {
            return Err(Error::invalid(format!(
                "class '{}' has no instances",
                class_labels[code]
            )));
        }
        let mut seen = HashSet::new();
        let mut attribute_names = Vec::with_capacity(attributes.len());
        let mut columns = Vec::with_capacity(attributes.len());
        for (name, col) in attributes {
            if col.len() != w {
                return Err(Error::invalid(format!(
                    "attribute '{name}' has {} values, expected {w}",
                    col.len()
                )));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::invalid(format!("duplicate attribute name '{name}'")));
            }
            attribute_names.push(name);
            columns.push(col);
        }
        Ok(Self {
            name: name.into(),
            attribute_names,
            columns,
            class_name: class_name.into(),
            class_labels,
            class_column,
        })
    }

    /// Convenience constructor: numeric columns named `a0, a1, ...` and a
    /// class column labelled by its codes.
    pub fn from_numeric(name: &str, columns: Vec<Vec<f64>>, classes: Vec<u32>) -> Result<Self> {
        let attrs = columns
            .into_iter()
            .enumerate()
            .map(|(i, v)| Ok((format!("a{i}"), AttributeColumn::Numeric(NumericColumn::new(v)?))))
            .collect::<Result<Vec<_>>>()?;
        let class = DiscreteColumn::from_codes(classes);
        let labels = (0..class.cardinality()).map(|c| format!("c{c}")).collect();
        Self::new(name, attrs, "class", class, labels)
    }

    /// Convenience constructor for already discrete data.
    pub fn from_discrete(name: &str, columns: Vec<Vec<u32>>, classes: Vec<u32>) -> Result<Self> {
        let attrs = columns
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let col = NominalColumn::unlabeled(DiscreteColumn::from_codes(v));
                (format!("a{i}"), AttributeColumn::Nominal(col))
            })
            .collect();
        let class = DiscreteColumn::from_codes(classes);
        let labels = (0..class.cardinality()).map(|c| format!("c{c}")).collect();
        Self::new(name, attrs, "class", class, labels)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_instances(&self) -> usize {
        self.class_column.len()
    }

    pub fn n_attributes(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_column.cardinality() as usize
    }

    pub fn attribute_names(&self) -> &[String] {
        &self.attribute_names
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attribute_names.iter().position(|n| n == name)
    }

    pub fn columns(&self) -> &[AttributeColumn] {
        &self.columns
    }

    pub fn column(&self, i: usize) -> &AttributeColumn {
        &self.columns[i]
    }

    pub fn class_name(&self) -> &str {
        &self.class_name
    }

    pub fn class_labels(&self) -> &[String] {
        &self.class_labels
    }

    pub fn class_column(&self) -> &DiscreteColumn {
        &self.class_column
    }

    pub fn classes(&self) -> &[u32] {
        self.class_column.codes()
    }

    /// True when every attribute is nominal.
    pub fn is_discrete(&self) -> bool {
        self.columns.iter().all(|c| !c.is_numeric())
    }

    /// Discrete view of every attribute; `None` if any column is numeric.
    pub fn discrete_columns(&self) -> Option<Vec<&DiscreteColumn>> {
        self.columns.iter().map(AttributeColumn::as_discrete).collect()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Replaces the attribute columns, keeping names, class and instance order.
    pub(crate) fn with_columns(&self, columns: Vec<AttributeColumn>) -> Self {
        debug_assert_eq!(columns.len(), self.columns.len());
        Self {
            name: self.name.clone(),
            attribute_names: self.attribute_names.clone(),
            columns,
            class_name: self.class_name.clone(),
            class_labels: self.class_labels.clone(),
            class_column: self.class_column.clone(),
        }
    }
}

/// Keeps the listed attributes, in the given order, plus the class.
pub fn project(ds: &Dataset, attrs: &[usize]) -> Result<Dataset> {
    let n = ds.n_attributes();
    let mut seen = vec![false; n];
    for &a in attrs {
        if a >= n {
            return Err(Error::invalid(format!(
                "attribute id {a} out of range (dataset has {n} attributes)"
            )));
        }
        if std::mem::replace(&mut seen[a], true) {
            return Err(Error::invalid(format!("attribute id {a} listed twice")));
        }
    }
    Ok(Dataset {
        name: ds.name.clone(),
        attribute_names: attrs.iter().map(|&a| ds.attribute_names[a].clone()).collect(),
        columns: attrs.iter().map(|&a| ds.columns[a].clone()).collect(),
        class_name: ds.class_name.clone(),
        class_labels: ds.class_labels.clone(),
        class_column: ds.class_column.clone(),
    })
}

/// `(label, count)` per class, in class-code order.
pub fn class_distribution(ds: &Dataset) -> Vec<(String, usize)> {
    ds.class_labels
        .iter()
        .cloned()
        .zip(ds.class_column.counts().into_iter().map(|c| c as usize))
        .collect()
}

fn dataset_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string())
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a comma-separated file with one header row.
///
/// Columns whose every non-missing cell parses as a finite real become
/// numeric; anything else is nominal, coded in order of first appearance.
/// The class column is always nominal.
pub fn load_csv(path: impl AsRef<Path>, class: &ClassSpec, missing_token: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = open(path)?;
    read_csv(file, &dataset_name(path), &path.display().to_string(), class, missing_token)
}

/// [`load_csv`] over any reader; `source` names the input in error messages.
pub fn read_csv<R: std::io::Read>(
    reader: R,
    name: &str,
    source: &str,
    class: &ClassSpec,
    missing_token: &str,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let csv_err = |e: csv::Error| {
        let line = e.position().map(|p| p.line() as usize);
        Error::parse(source, line, None, e.to_string())
    };
    let header: Vec<String> = rdr
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(Error::parse(source, Some(1), None, "missing header row"));
    }
    let class_idx = class.resolve(&header).ok_or_else(|| {
        Error::parse(source, Some(1), None, format!("class column {class:?} not found in header"))
    })?;

    let mut records = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(Error::parse(
                source,
                Some(line),
                None,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        records.push((line, rec));
    }
    if records.is_empty() {
        return Err(Error::parse(source, None, None, "no data rows"));
    }

    let is_missing = |s: &str| s.is_empty() || s == missing_token;
    let mut attrs = Vec::with_capacity(header.len() - 1);
    let mut class_col = None;
    for (j, col_name) in header.iter().enumerate() {
        let cells = || records.iter().map(move |(l, r)| (*l, r[j].trim()));
        if j == class_idx {
            let mut coder = FirstAppearance::default();
            let mut codes = Vec::with_capacity(records.len());
            for (line, s) in cells() {
                if is_missing(s) {
                    return Err(Error::parse(
                        source,
                        Some(line),
                        Some(col_name.clone()),
                        "missing class value",
                    ));
                }
                codes.push(coder.code(s));
            }
            class_col = Some((codes, coder.labels));
            continue;
        }
        let numeric: Option<Vec<Option<f64>>> = cells()
            .map(|(_, s)| {
                if is_missing(s) {
                    Some(None)
                } else {
                    s.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some)
                }
            })
            .collect();
        let column = match numeric {
            Some(vals) if vals.iter().any(Option::is_some) => {
                AttributeColumn::Numeric(NumericColumn::with_missing(vals)?)
            }
            _ => {
                let mut coder = FirstAppearance::default();
                let raw: Vec<Option<u32>> = cells()
                    .map(|(_, s)| (!is_missing(s)).then(|| coder.code(s)))
                    .collect();
                AttributeColumn::Nominal(nominal_with_missing(raw, coder.labels, missing_token))
            }
        };
        attrs.push((col_name.clone(), column));
    }
    let (codes, labels) = class_col.expect("class column resolved above");
    let class_col = DiscreteColumn::new(codes, labels.len() as u32)?;
    Dataset::new(name, attrs, header[class_idx].clone(), class_col, labels)
        .map_err(|e| Error::parse(source, None, None, e.to_string()))
}

#[derive(Default)]
struct FirstAppearance {
    index: HashMap<String, u32>,
    labels: Vec<String>,
}

impl FirstAppearance {
    fn code(&mut self, s: &str) -> u32 {
        if let Some(&c) = self.index.get(s) {
            return c;
        }
        let c = self.labels.len() as u32;
        self.index.insert(s.to_string(), c);
        self.labels.push(s.to_string());
        c
    }
}

/// Missing cells get a dedicated code after all observed labels.
fn nominal_with_missing(raw: Vec<Option<u32>>, mut labels: Vec<String>, token: &str) -> NominalColumn {
    let missing_code = raw.iter().any(Option::is_none).then(|| {
        labels.push(token.to_string());
        labels.len() as u32 - 1
    });
    let codes = raw
        .into_iter()
        .map(|c| c.or(missing_code).expect("missing code allocated"))
        .collect();
    let cardinality = labels.len().max(1) as u32;
    if labels.is_empty() {
        labels.push(token.to_string());
    }
    NominalColumn {
        column: DiscreteColumn { codes, cardinality },
        labels,
        missing_code,
    }
}

/// Writes the dataset as CSV with the class as the last column.
pub fn write_csv<W: Write>(ds: &Dataset, out: W, missing_token: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| Error::invalid(format!("csv write failed: {e}"));
    let mut header: Vec<&str> = ds.attribute_names.iter().map(String::as_str).collect();
    header.push(&ds.class_name);
    w.write_record(&header).map_err(to_err)?;
    let mut row = Vec::with_capacity(header.len());
    for p in 0..ds.n_instances() {
        row.clear();
        row.extend(ds.columns.iter().map(|c| c.cell(p, missing_token)));
        row.push(ds.class_labels[ds.class_column.codes[p] as usize].clone());
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv write failed: {e}")))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// ARFF

enum ArffType {
    Numeric,
    Nominal(Vec<String>),
}

/// Loads the numeric/nominal subset of dense ARFF. The class is the last
/// attribute unless `class` says otherwise, and must be nominal.
pub fn load_arff(path: impl AsRef<Path>, class: &ClassSpec) -> Result<Dataset> {
    let path = path.as_ref();
    let file = open(path)?;
    read_arff(BufReader::new(file), &path.display().to_string(), class)
}

pub fn read_arff<R: BufRead>(reader: R, source: &str, class: &ClassSpec) -> Result<Dataset> {
    let perr = |line: usize, msg: String| Error::parse(source, Some(line), None, msg);
    let mut relation = None;
    let mut decls: Vec<(String, ArffType)> = Vec::new();
    let mut in_data = false;
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| perr(lineno, e.to_string()))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if in_data {
            if t.starts_with('{') {
                return Err(perr(lineno, "sparse ARFF rows are not supported".into()));
            }
            let fields = split_arff_fields(t).map_err(|m| perr(lineno, m))?;
            if fields.len() != decls.len() {
                return Err(perr(
                    lineno,
                    format!("expected {} values, found {}", decls.len(), fields.len()),
                ));
            }
            rows.push((lineno, fields));
            continue;
        }
        let lower = t.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            let rest = t["@relation".len()..].trim();
            let (name, _) = take_token(rest).map_err(|m| perr(lineno, m))?;
            relation = Some(name);
        } else if lower.starts_with("@attribute") {
            let rest = t["@attribute".len()..].trim();
            let (name, rest) = take_token(rest).map_err(|m| perr(lineno, m))?;
            let ty = rest.trim();
            let ty_lower = ty.to_ascii_lowercase();
            let parsed = if ty.starts_with('{') {
                let inner = ty
                    .strip_prefix('{')
                    .and_then(|s| s.strip_suffix('}'))
                    .ok_or_else(|| perr(lineno, format!("unterminated nominal list for '{name}'")))?;
                let values = split_arff_fields(inner).map_err(|m| perr(lineno, m))?;
                ArffType::Nominal(values)
            } else if matches!(ty_lower.as_str(), "numeric" | "real" | "integer") {
                ArffType::Numeric
            } else {
                return Err(perr(lineno, format!("unsupported attribute type '{ty}' for '{name}'")));
            };
            decls.push((name, parsed));
        } else if lower.starts_with("@data") {
            if decls.is_empty() {
                return Err(perr(lineno, "@data before any @attribute".into()));
            }
            in_data = true;
        } else {
            return Err(perr(lineno, format!("unexpected header line '{t}'")));
        }
    }
    if !in_data {
        return Err(Error::parse(source, None, None, "no @data section"));
    }
    if rows.is_empty() {
        return Err(Error::parse(source, None, None, "no data rows"));
    }
    let names: Vec<String> = decls.iter().map(|(n, _)| n.clone()).collect();
    let class_idx = class
        .resolve(&names)
        .ok_or_else(|| Error::parse(source, None, None, format!("class attribute {class:?} not declared")))?;

    let mut attrs = Vec::with_capacity(decls.len() - 1);
    let mut class_col = None;
    for (j, (name, ty)) in decls.iter().enumerate() {
        let col_err = |line: usize, msg: String| Error::parse(source, Some(line), Some(name.clone()), msg);
        match ty {
            ArffType::Numeric => {
                if j == class_idx {
                    return Err(Error::parse(
                        source,
                        None,
                        Some(name.clone()),
                        "class attribute must be nominal",
                    ));
                }
                let vals = rows
                    .iter()
                    .map(|(line, f)| {
                        let s = f[j].as_str();
                        if s == "?" {
                            Ok(None)
                        } else {
                            s.parse::<f64>()
                                .ok()
                                .filter(|v| v.is_finite())
                                .map(Some)
                                .ok_or_else(|| col_err(*line, format!("'{s}' is not a number")))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                attrs.push((name.clone(), AttributeColumn::Numeric(NumericColumn::with_missing(vals)?)));
            }
            ArffType::Nominal(values) => {
                let index: HashMap<&str, u32> =
                    values.iter().enumerate().map(|(i, v)| (v.as_str(), i as u32)).collect();
                let raw = rows
                    .iter()
                    .map(|(line, f)| {
                        let s = f[j].as_str();
                        if s == "?" {
                            Ok(None)
                        } else {
                            index
                                .get(s)
                                .copied()
                                .map(Some)
                                .ok_or_else(|| col_err(*line, format!("undeclared nominal value '{s}'")))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                if j == class_idx {
                    if let Some(pos) = raw.iter().position(Option::is_none) {
                        return Err(col_err(rows[pos].0, "missing class value".into()));
                    }
                    class_col = Some((raw.into_iter().flatten().collect::<Vec<_>>(), values.clone()));
                } else {
                    attrs.push((
                        name.clone(),
                        AttributeColumn::Nominal(nominal_with_missing(raw, values.clone(), "?")),
                    ));
                }
            }
        }
    }
    let (codes, declared) = class_col.expect("class attribute resolved above");
    // Declared class values that never occur are dropped; the rest keep declared order.
    let mut used = vec![false; declared.len()];
    for &c in &codes {
        used[c as usize] = true;
    }
    let mut remap = vec![0u32; declared.len()];
    let mut labels = Vec::new();
    for (i, label) in declared.into_iter().enumerate() {
        if used[i] {
            remap[i] = labels.len() as u32;
            labels.push(label);
        }
    }
    let codes = codes.into_iter().map(|c| remap[c as usize]).collect();
    let class_col = DiscreteColumn::new(codes, labels.len() as u32)?;
    Dataset::new(
        relation.unwrap_or_else(|| "relation".to_string()),
        attrs,
        names[class_idx].clone(),
        class_col,
        labels,
    )
    .map_err(|e| Error::parse(source, None, None, e.to_string()))
}

/// Splits off one possibly quoted token.
fn take_token(s: &str) -> std::result::Result<(String, &str), String> {
    let s = s.trim_start();
    match s.chars().next() {
        Some(q @ ('\'' | '"')) => {
            let body = &s[1..];
            let end = body.find(q).ok_or_else(|| format!("unterminated quote in '{s}'"))?;
            Ok((body[..end].to_string(), &body[end + 1..]))
        }
        Some(_) => {
            let end = s.find(char::is_whitespace).unwrap_or(s.len());
            Ok((s[..end].to_string(), &s[end..]))
        }
        None => Err("expected a name".to_string()),
    }
}

/// Comma-separated values with optional single or double quotes.
fn split_arff_fields(s: &str) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quote: Option<char> = None;
    let mut was_quoted = false;
    let mut chars = s.chars();
    while let Some(ch) = chars.next() {
        match quote {
            Some(q) if ch == q => quote = None,
            Some(_) if ch == '\\' => {
                if let Some(next) = chars.next() {
                    cur.push(next);
                }
            }
            Some(_) => cur.push(ch),
            None => match ch {
                '\'' | '"' if cur.trim().is_empty() => {
                    cur.clear();
                    quote = Some(ch);
                    was_quoted = true;
                }
                ',' => {
                    out.push(finish_field(&cur, was_quoted));
                    cur.clear();
                    was_quoted = false;
                }
                _ => cur.push(ch),
            },
        }
    }
    if quote.is_some() {
        return Err("unterminated quote".to_string());
    }
    out.push(finish_field(&cur, was_quoted));
    Ok(out)
}

fn finish_field(s: &str, quoted: bool) -> String {
    if quoted {
        s.to_string()
    } else {
        s.trim().to_string()
    }
}

fn arff_quote(s: &str) -> String {
    if s.is_empty() || s.contains(|c: char| c.is_whitespace() || ",{}'\"%".contains(c)) || s == "?" {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    } else {
        s.to_string()
    }
}

/// Writes dense ARFF with the class as the last attribute.
pub fn write_arff<W: Write>(ds: &Dataset, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| Error::invalid(format!("arff write failed: {e}"));
    writeln!(out, "@relation {}", arff_quote(&ds.name)).map_err(io)?;
    writeln!(out).map_err(io)?;
    for (name, col) in ds.attribute_names.iter().zip(&ds.columns) {
        match col {
            AttributeColumn::Numeric(_) => writeln!(out, "@attribute {} numeric", arff_quote(name)),
            AttributeColumn::Nominal(c) => {
                let values: Vec<String> = c
                    .labels
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| c.missing_code != Some(*i as u32))
                    .map(|(_, l)| arff_quote(l))
                    .collect();
                writeln!(out, "@attribute {} {{{}}}", arff_quote(name), values.join(","))
            }
        }
        .map_err(io)?;
    }
    let classes: Vec<String> = ds.class_labels.iter().map(|l| arff_quote(l)).collect();
    writeln!(out, "@attribute {} {{{}}}", arff_quote(&ds.class_name), classes.join(",")).map_err(io)?;
    writeln!(out, "\n@data").map_err(io)?;
    for p in 0..ds.n_instances() {
        let mut fields: Vec<String> = ds
            .columns
            .iter()
            .map(|c| match c {
                AttributeColumn::Numeric(_) => c.cell(p, "?"),
                AttributeColumn::Nominal(n) if n.missing_code == Some(n.column.codes[p]) => "?".to_string(),
                AttributeColumn::Nominal(_) => arff_quote(&c.cell(p, "?")),
            })
            .collect();
        fields.push(arff_quote(&ds.class_labels[ds.class_column.codes[p] as usize]));
        writeln!(out, "{}", fields.join(",")).map_err(io)?;
    }
    Ok(())
}
