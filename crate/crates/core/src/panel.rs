//! Long-format panels of returns and characteristics.
//!
//! Units and periods are opaque labels. Labels that parse as integers sort
//! numerically and come before all other labels, which sort as strings; this
//! keeps `1, 2, 10` and ISO dates in their natural order.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PanelError {
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("non-numeric or non-finite value in column `{column}` at row {row}")]
    NonNumericCell { row: usize, column: String },
    #[error("duplicate observation for unit `{unit}` in period `{period}`")]
    DuplicateObservation { unit: String, period: String },
    #[error("unknown period `{0}`")]
    UnknownPeriod(String),
    #[error("period `{0}` has no observations")]
    EmptyPeriod(String),
    #[error("characteristic index {index} out of range (M = {m})")]
    InvalidColumn { index: usize, m: usize },
    #[error("record for unit `{unit}` has {got} characteristics, expected {expected}")]
    RaggedRecord { unit: String, got: usize, expected: usize },
    #[error("panel has no observations")]
    Empty,
    #[error("panel needs at least one characteristic")]
    NoCharacteristics,
    #[error("csv error: {0}")]
    Csv(String),
}

/// Column names of the long-format CSV.
///
/// When `z` is `None` every column other than `unit`, `time` and `y` is a
/// characteristic, in header order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schema {
    pub unit: String,
    pub time: String,
    pub y: String,
    pub z: Option<Vec<String>>,
}

impl Default for Schema {
    fn default() -> Self {
        Self { unit: "unit".into(), time: "time".into(), y: "y".into(), z: None }
    }
}

/// One observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub unit: String,
    pub period: String,
    pub y: f64,
    pub z: Vec<f64>,
}

/// Observations available in one period, ordered by unit label.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossSection {
    pub period: String,
    /// Indices into [`Panel::units`].
    pub units: Vec<usize>,
    pub y: Vec<f64>,
    /// `N_t x M`.
    pub z: DMatrix<f64>,
}

impl CrossSection {
    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// An immutable, possibly unbalanced panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    units: Vec<String>,
    sections: Vec<CrossSection>,
    char_names: Vec<String>,
    ranked: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum LabelKey<'a> {
    Int(i64),
    Text(&'a str),
}

fn label_key(s: &str) -> LabelKey<'_> {
    s.trim().parse::<i64>().map_or(LabelKey::Text(s), LabelKey::Int)
}

/// Total order on labels used for both units and periods.
pub fn cmp_labels(a: &str, b: &str) -> Ordering {
    label_key(a).cmp(&label_key(b)).then_with(|| a.cmp(b))
}

impl Panel {
    /// Builds a panel from records; characteristic names default to `z1..zM`.
    pub fn from_records(records: Vec<Record>) -> Result<Self, PanelError> {
        let m = records.first().map(|r| r.z.len()).ok_or(PanelError::Empty)?;
        let names = (1..=m).map(|j| format!("z{j}")).collect();
        Self::from_records_named(records, names)
    }

    pub fn from_records_named(records: Vec<Record>, char_names: Vec<String>) -> Result<Self, PanelError> {
        if records.is_empty() {
            return Err(PanelError::Empty);
        }
        let m = char_names.len();
        if m == 0 {
            return Err(PanelError::NoCharacteristics);
        }
        for r in &records {
            if r.z.len() != m {
                return Err(PanelError::RaggedRecord { unit: r.unit.clone(), got: r.z.len(), expected: m });
            }
        }

        let mut unit_labels: Vec<&str> = records.iter().map(|r| r.unit.as_str()).collect();
        unit_labels.sort_by(|a, b| cmp_labels(a, b));
        unit_labels.dedup();
        let unit_index: HashMap<&str, usize> = unit_labels.iter().enumerate().map(|(i, u)| (*u, i)).collect();

        // period label -> (unit index -> record index)
        let mut by_period: HashMap<&str, BTreeMap<usize, usize>> = HashMap::new();
        for (k, r) in records.iter().enumerate() {
            let u = unit_index[r.unit.as_str()];
            if by_period.entry(r.period.as_str()).or_default().insert(u, k).is_some() {
                return Err(PanelError::DuplicateObservation { unit: r.unit.clone(), period: r.period.clone() });
            }
        }
        let mut periods: Vec<&str> = by_period.keys().copied().collect();
        periods.sort_by(|a, b| cmp_labels(a, b));

        let sections = periods
            .iter()
            .map(|p| {
                let rows = &by_period[p];
                let n = rows.len();
                let mut z = DMatrix::zeros(n, m);
                let mut y = Vec::with_capacity(n);
                let mut units = Vec::with_capacity(n);
                for (row, (&u, &k)) in rows.iter().enumerate() {
                    units.push(u);
                    y.push(records[k].y);
                    for (j, v) in records[k].z.iter().enumerate() {
                        z[(row, j)] = *v;
                    }
                }
                CrossSection { period: (*p).to_string(), units, y, z }
            })
            .collect();

        let units = unit_labels.into_iter().map(str::to_string).collect();
        Ok(Self { units, sections, char_names, ranked: vec![false; m] })
    }

    /// Builds a balanced panel from an `N x T` outcome matrix and one `N x T`
    /// matrix per characteristic. Units are labelled `0..N`, periods `1..=T`.
    pub fn from_balanced(y: &DMatrix<f64>, z: &[DMatrix<f64>]) -> Result<Self, PanelError> {
        let (n, t) = y.shape();
        let m = z.len();
        if m == 0 {
            return Err(PanelError::NoCharacteristics);
        }
        if n == 0 || t == 0 {
            return Err(PanelError::Empty);
        }
        let units: Vec<String> = (0..n).map(|i| i.to_string()).collect();
        let sections = (0..t)
            .map(|s| {
                let mut zs = DMatrix::zeros(n, m);
                for (j, zj) in z.iter().enumerate() {
                    zs.column_mut(j).copy_from(&zj.column(s));
                }
                CrossSection {
                    period: (s + 1).to_string(),
                    units: (0..n).collect(),
                    y: y.column(s).iter().copied().collect(),
                    z: zs,
                }
            })
            .collect();
        let panel = Self {
            units,
            sections,
            char_names: (1..=m).map(|j| format!("z{j}")).collect(),
            ranked: vec![false; m],
        };
        panel.validate_finite()?;
        Ok(panel)
    }

    fn validate_finite(&self) -> Result<(), PanelError> {
        for cs in &self.sections {
            for (row, (&y, &u)) in cs.y.iter().zip(&cs.units).enumerate() {
                if !y.is_finite() {
                    return Err(PanelError::NonNumericCell { row: u, column: "y".into() });
                }
                for j in 0..self.n_chars() {
                    if !cs.z[(row, j)].is_finite() {
                        return Err(PanelError::NonNumericCell { row: u, column: self.char_names[j].clone() });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn units(&self) -> &[String] {
        &self.units
    }

    pub fn n_units(&self) -> usize {
        self.units.len()
    }

    pub fn periods(&self) -> impl Iterator<Item = &str> {
        self.sections.iter().map(|cs| cs.period.as_str())
    }

    pub fn n_periods(&self) -> usize {
        self.sections.len()
    }

    pub fn n_chars(&self) -> usize {
        self.char_names.len()
    }

    pub fn char_names(&self) -> &[String] {
        &self.char_names
    }

    /// Whether characteristic `j` has been rank-transformed into `[-0.5, 0.5]`.
    pub fn is_ranked(&self, j: usize) -> bool {
        self.ranked[j]
    }

    pub fn cross_sections(&self) -> &[CrossSection] {
        &self.sections
    }

    pub fn n_obs(&self) -> usize {
        self.sections.iter().map(CrossSection::len).sum()
    }

    /// `min_t N_t`.
    pub fn min_period_size(&self) -> usize {
        self.sections.iter().map(CrossSection::len).min().unwrap_or(0)
    }

    /// `max_t N_t`.
    pub fn max_period_size(&self) -> usize {
        self.sections.iter().map(CrossSection::len).max().unwrap_or(0)
    }

    pub fn is_balanced(&self) -> bool {
        self.sections.iter().all(|cs| cs.len() == self.units.len())
    }

    /// Per-characteristic `(min, max)` over all observations.
    pub fn char_range(&self, j: usize) -> (f64, f64) {
        self.sections
            .iter()
            .flat_map(|cs| cs.z.column(j).iter().copied().collect::<Vec<_>>())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Observations of period `period`, units in label order.
    pub fn slice_period(&self, period: &str) -> Result<&CrossSection, PanelError> {
        self.sections
            .iter()
            .find(|cs| cs.period == period)
            .ok_or_else(|| PanelError::UnknownPeriod(period.to_string()))
    }

    /// Flattens back to records in (period, unit) order.
    pub fn records(&self) -> Vec<Record> {
        self.sections
            .iter()
            .flat_map(|cs| {
                (0..cs.len()).map(move |row| Record {
                    unit: self.units[cs.units[row]].clone(),
                    period: cs.period.clone(),
                    y: cs.y[row],
                    z: cs.z.row(row).iter().copied().collect(),
                })
            })
            .collect()
    }
}

/// Replaces each selected characteristic by its within-period relative rank
/// `(rank - 1) / (n - 1) - 0.5`, averaging ranks over ties. A period with a
/// single observation maps to 0.
///
/// `columns` holds zero-based characteristic indices.
pub fn rank_transform(panel: &Panel, columns: &[usize]) -> Result<Panel, PanelError> {
    let m = panel.n_chars();
    if let Some(&index) = columns.iter().find(|&&j| j >= m) {
        return Err(PanelError::InvalidColumn { index, m });
    }
    let mut out = panel.clone();
    for cs in &mut out.sections {
        if cs.is_empty() {
            return Err(PanelError::EmptyPeriod(cs.period.clone()));
        }
        for &j in columns {
            let ranked = relative_ranks(&cs.z.column(j).iter().copied().collect::<Vec<_>>());
            cs.z.column_mut(j).iter_mut().zip(ranked).for_each(|(z, r)| *z = r);
        }
    }
    for &j in columns {
        out.ranked[j] = true;
    }
    Ok(out)
}

/// `(rank - 1)/(n - 1) - 0.5` with average ranks for ties.
///
/// Evaluated as `(2(rank - 1) - (n - 1)) / (2(n - 1))` with an integer
/// numerator, so the output is exactly antisymmetric about zero.
pub fn relative_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n <= 1 {
        return vec![0.0; n];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let denom = 2.0 * (n - 1) as f64;
    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && values[order[end + 1]] == values[order[start]] {
            end += 1;
        }
        // zero-based positions start..=end share rank (start + end)/2 + 1
        let numer = (start + end) as i64 - (n - 1) as i64;
        let v = numer as f64 / denom;
        for &k in &order[start..=end] {
            out[k] = v;
        }
        start = end + 1;
    }
    out
}

fn parse_cell(record: &csv::StringRecord, idx: usize, row: usize, column: &str) -> Result<f64, PanelError> {
    record
        .get(idx)
        .and_then(|s| s.trim().parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .ok_or_else(|| PanelError::NonNumericCell { row, column: column.to_string() })
}

/// Reads a long-format CSV with a header row.
///
/// Row numbers in errors count data rows from 1.
pub fn load_panel(path: impl AsRef<Path>, schema: &Schema) -> Result<Panel, PanelError> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| PanelError::Csv(format!("{}: {e}", path.as_ref().display())))?;
    read_panel(file, schema)
}

pub fn read_panel<R: std::io::Read>(reader: R, schema: &Schema) -> Result<Panel, PanelError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| PanelError::Csv(e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| PanelError::MissingColumn(name.to_string()))
    };
    let unit_idx = find(&schema.unit)?;
    let time_idx = find(&schema.time)?;
    let y_idx = find(&schema.y)?;
    let z_names: Vec<String> = match &schema.z {
        Some(names) => names.clone(),
        None => headers
            .iter()
            .enumerate()
            .filter(|(i, _)| ![unit_idx, time_idx, y_idx].contains(i))
            .map(|(_, h)| h.to_string())
            .collect(),
    };
    let z_idx = z_names.iter().map(|n| find(n)).collect::<Result<Vec<_>, _>>()?;
    if z_idx.is_empty() {
        return Err(PanelError::NoCharacteristics);
    }

    let mut records = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = rec.map_err(|e| PanelError::Csv(e.to_string()))?;
        let unit = rec.get(unit_idx).unwrap_or("").to_string();
        let period = rec.get(time_idx).unwrap_or("").to_string();
        let y = parse_cell(&rec, y_idx, row, &schema.y)?;
        let z = z_idx
            .iter()
            .zip(&z_names)
            .map(|(&i, name)| parse_cell(&rec, i, row, name))
            .collect::<Result<Vec<_>, _>>()?;
        records.push(Record { unit, period, y, z });
    }
    Panel::from_records_named(records, z_names)
}

/// Writes the panel as long-format CSV using the schema's column names.
/// Values use the shortest round-trip representation.
pub fn write_panel<W: std::io::Write>(panel: &Panel, schema: &Schema, writer: W) -> Result<(), PanelError> {
    let mut wtr = csv::Writer::from_writer(writer);
    let z_names = schema.z.clone().unwrap_or_else(|| panel.char_names.clone());
    if z_names.len() != panel.n_chars() {
        return Err(PanelError::InvalidColumn { index: z_names.len(), m: panel.n_chars() });
    }
    let mut header = vec![schema.unit.clone(), schema.time.clone(), schema.y.clone()];
    header.extend(z_names);
    wtr.write_record(&header).map_err(|e| PanelError::Csv(e.to_string()))?;
    for r in panel.records() {
        let mut row = vec![r.unit, r.period, r.y.to_string()];
        row.extend(r.z.iter().map(f64::to_string));
        wtr.write_record(&row).map_err(|e| PanelError::Csv(e.to_string()))?;
    }
    wtr.flush().map_err(|e| PanelError::Csv(e.to_string()))
}

pub fn save_panel(panel: &Panel, schema: &Schema, path: impl AsRef<Path>) -> Result<(), PanelError> {
    let file = std::fs::File::create(path.as_ref()).map_err(|e| PanelError::Csv(format!("{}: {e}", path.as_ref().display())))?;
    write_panel(panel, schema, std::io::BufWriter::new(file))
}
