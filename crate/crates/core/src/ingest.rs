//! Loading, cleaning and transforming numeric tables.
//!
//! Everything here is a pure function over immutable inputs. A [`DataTable`]
//! is column-major: regressions, standardization and return computation all
//! walk one column at a time.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cells treated as missing rather than as text.
const MISSING_TOKENS: &[&str] = &["", "na", "n/a", "nan", "null"];

/// Sample variance at or below this is considered constant.
pub const CONSTANT_VARIANCE: f64 = 1e-12;

/// A named dense matrix of finite reals, `m` rows by `d` columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataTable {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl DataTable {
    /// Builds a table from named columns, validating shape, names and finiteness.
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::InvalidInput(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::InvalidInput("table has no columns".into()));
        }
        let m = columns[0].len();
        if m == 0 {
            return Err(Error::InvalidInput("table has no rows".into()));
        }
        let mut seen = HashSet::new();
        for (name, col) in names.iter().zip(&columns) {
            if name.is_empty() {
                return Err(Error::InvalidInput("empty column name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidInput(format!(
                    "duplicate column name `{name}`"
                )));
            }
            if col.len() != m {
                return Err(Error::InvalidInput(format!(
                    "column `{name}` has {} rows, expected {m}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite value in column `{name}` at row {row}"
                )));
            }
        }
        Ok(Self { names, columns })
    }

    /// Builds a table from row-major data.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let d = names.len();
        let mut columns = vec![Vec::with_capacity(rows.len()); d];
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} values, expected {d}",
                    row.len()
                )));
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        Self::new(names, columns)
    }

    pub fn nrows(&self) -> usize {
        self.columns[0].len()
    }

    pub fn ncols(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    /// Row-major copy of the values.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.nrows()).map(|i| self.row(i)).collect()
    }

    /// Sub-table with the named columns, in the order given.
    pub fn select(&self, names: &[String]) -> Result<Self> {
        let mut cols = Vec::with_capacity(names.len());
        for name in names {
            let j = self
                .index_of(name)
                .ok_or_else(|| Error::InvalidInput(format!("unknown column `{name}`")))?;
            cols.push(self.columns[j].clone());
        }
        Self::new(names.to_vec(), cols)
    }

    /// Sub-table with the columns at `indices`.
    pub fn select_indices(&self, indices: &[usize]) -> Result<Self> {
        let names = indices.iter().map(|&j| self.names[j].clone()).collect();
        let cols = indices.iter().map(|&j| self.columns[j].clone()).collect();
        Self::new(names, cols)
    }

    /// Same table with rows reordered by `order`.
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let cols = self
            .columns
            .iter()
            .map(|c| order.iter().map(|&i| c[i]).collect())
            .collect();
        Self::new(self.names.clone(), cols)
    }

    /// Fails unless the table is large enough to build a network on.
    pub fn require_network_shape(&self) -> Result<()> {
        if self.nrows() < 2 || self.ncols() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 rows and 2 columns, got {}x{}",
                self.nrows(),
                self.ncols()
            )));
        }
        Ok(())
    }

    /// Writes the table as comma-separated text with a header row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io_err = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(&self.names).map_err(io_err)?;
        for i in 0..self.nrows() {
            w.write_record(self.columns.iter().map(|c| c[i].to_string()))
                .map_err(io_err)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// A table together with what the loader discarded on the way.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadedTable {
    pub table: DataTable,
    /// Columns dropped because some non-empty cell did not parse as a number.
    pub non_numeric_columns: Vec<String>,
    /// Rows dropped because a retained column had a missing value.
    pub rows_dropped: usize,
    pub warnings: Vec<String>,
}

/// Raw text cells with their header, before numeric filtering.
#[derive(Debug, Clone)]
pub struct RawCsv {
    pub names: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// Parses delimiter-separated text into header and string cells.
pub fn read_raw_csv(bytes: &[u8], header: bool) -> Result<RawCsv> {
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(Error::Load("empty input".into()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Load(e.to_string()))?;
        records.push(rec.iter().map(str::to_owned).collect::<Vec<_>>());
    }
    if records.is_empty() {
        return Err(Error::Load("empty input".into()));
    }
    let width = records[0].len();
    let names = if header {
        let raw = records.remove(0);
        make_unique(
            raw.into_iter()
                .enumerate()
                .map(|(j, n)| {
                    if n.is_empty() {
                        format!("V{}", j + 1)
                    } else {
                        n
                    }
                })
                .collect(),
        )
    } else {
        (1..=width).map(|j| format!("V{j}")).collect()
    };
    Ok(RawCsv {
        names,
        rows: records,
    })
}

fn make_unique(names: Vec<String>) -> Vec<String> {
    let mut seen: HashSet<String> = HashSet::new();
    names
        .into_iter()
        .map(|name| {
            let mut candidate = name.clone();
            let mut k = 1;
            while seen.contains(&candidate) {
                candidate = format!("{name}.{k}");
                k += 1;
            }
            seen.insert(candidate.clone());
            candidate
        })
        .collect()
}

fn parse_cell(cell: &str) -> Cell {
    if MISSING_TOKENS.contains(&cell.to_ascii_lowercase().as_str()) {
        return Cell::Missing;
    }
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Cell::Value(v),
        // "inf" and friends parse but cannot be stored
        Ok(_) => Cell::Missing,
        Err(_) => Cell::Text,
    }
}

#[derive(Clone, Copy)]
enum Cell {
    Value(f64),
    Missing,
    Text,
}

/// Loads a numeric table from CSV bytes.
///
/// A column is kept iff every non-missing cell parses as a finite real and at
/// least one cell does. Rows with a missing value in any kept column are
/// dropped.
pub fn load_csv(bytes: &[u8], header: bool) -> Result<LoadedTable> {
    let raw = read_raw_csv(bytes, header)?;
    numeric_table(&raw, &[])
}

/// Builds the numeric table from raw cells, excluding the named columns.
pub fn numeric_table(raw: &RawCsv, exclude: &[&str]) -> Result<LoadedTable> {
    let d = raw.names.len();
    let parsed: Vec<Vec<Cell>> = raw
        .rows
        .iter()
        .map(|r| r.iter().map(|c| parse_cell(c)).collect())
        .collect();

    let mut keep = Vec::new();
    let mut non_numeric = Vec::new();
    let mut warnings = Vec::new();
    for j in 0..d {
        if exclude.contains(&raw.names[j].as_str()) {
            continue;
        }
        let mut any_value = false;
        let mut any_text = false;
        for row in &parsed {
            match row[j] {
                Cell::Value(_) => any_value = true,
                Cell::Text => any_text = true,
                Cell::Missing => {}
            }
        }
        if any_value && !any_text {
            keep.push(j);
        } else {
            warnings.push(format!("dropped non-numeric column `{}`", raw.names[j]));
            non_numeric.push(raw.names[j].clone());
        }
    }
    if keep.is_empty() {
        return Err(Error::Load("no numeric columns".into()));
    }

    let mut columns = vec![Vec::with_capacity(parsed.len()); keep.len()];
    let mut rows_dropped = 0;
    for row in &parsed {
        let values: Option<Vec<f64>> = keep
            .iter()
            .map(|&j| match row[j] {
                Cell::Value(v) => Some(v),
                _ => None,
            })
            .collect();
        match values {
            Some(vals) => {
                for (col, v) in columns.iter_mut().zip(vals) {
                    col.push(v);
                }
            }
            None => rows_dropped += 1,
        }
    }
    if rows_dropped > 0 {
        warnings.push(format!("dropped {rows_dropped} row(s) with missing values"));
    }
    if columns[0].len() < 2 {
        return Err(Error::Load(format!(
            "{} row(s) left after cleaning, need at least 2",
            columns[0].len()
        )));
    }
    let names = keep.iter().map(|&j| raw.names[j].clone()).collect();
    let table = DataTable::new(names, columns).map_err(|e| Error::Load(e.to_string()))?;
    Ok(LoadedTable {
        table,
        non_numeric_columns: non_numeric,
        rows_dropped,
        warnings,
    })
}

fn sample_variance(col: &[f64]) -> f64 {
    let m = col.len() as f64;
    if col.len() < 2 {
        return 0.0;
    }
    let mean = col.iter().sum::<f64>() / m;
    col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)
}

/// Removes columns whose sample variance is at most [`CONSTANT_VARIANCE`].
pub fn drop_constant_columns(t: &DataTable) -> Result<(DataTable, Vec<String>)> {
    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for (j, col) in t.columns.iter().enumerate() {
        if sample_variance(col) > CONSTANT_VARIANCE {
            keep.push(j);
        } else {
            dropped.push(t.names[j].clone());
        }
    }
    if keep.is_empty() {
        return Err(Error::ConstantColumns(dropped));
    }
    Ok((t.select_indices(&keep)?, dropped))
}

/// Per-column location and scale used by [`standardize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationRecord {
    pub names: Vec<String>,
    pub means: Vec<f64>,
    /// Population standard deviations (divisor `m`).
    pub std_devs: Vec<f64>,
}

impl StandardizationRecord {
    /// Maps a standardized table back to the original scale.
    pub fn inverse(&self, t: &DataTable) -> Result<DataTable> {
        if t.names != self.names {
            return Err(Error::InvalidInput(
                "table columns do not match the standardization record".into(),
            ));
        }
        let cols = t
            .columns
            .iter()
            .zip(self.means.iter().zip(&self.std_devs))
            .map(|(c, (&mu, &sd))| c.iter().map(|v| v * sd + mu).collect())
            .collect();
        DataTable::new(t.names.clone(), cols)
    }
}

/// Mean and population standard deviation of a column.
pub fn mean_and_pop_sd(col: &[f64]) -> (f64, f64) {
    let m = col.len() as f64;
    let mean = col.iter().sum::<f64>() / m;
    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m;
    (mean, var.sqrt())
}

/// Centers every column to mean 0 and scales it to population sd 1.
pub fn standardize(t: &DataTable) -> Result<(DataTable, StandardizationRecord)> {
    let constant: Vec<String> = t
        .columns
        .iter()
        .zip(&t.names)
        .filter(|(c, _)| sample_variance(c) <= CONSTANT_VARIANCE)
        .map(|(_, n)| n.clone())
        .collect();
    if !constant.is_empty() {
        return Err(Error::ConstantColumns(constant));
    }
    let mut means = Vec::with_capacity(t.ncols());
    let mut sds = Vec::with_capacity(t.ncols());
    let mut cols = Vec::with_capacity(t.ncols());
    for col in &t.columns {
        let (mean, sd) = mean_and_pop_sd(col);
        let centered: Vec<f64> = col.iter().map(|v| v - mean).collect();
        let mut scaled: Vec<f64> = centered.iter().map(|v| v / sd).collect();
        // one correction pass absorbs the rounding left by the first
        let (mean2, sd2) = mean_and_pop_sd(&scaled);
        for v in &mut scaled {
            *v = (*v - mean2) / sd2;
        }
        means.push(mean);
        sds.push(sd);
        cols.push(scaled);
    }
    let record = StandardizationRecord {
        names: t.names.clone(),
        means,
        std_devs: sds,
    };
    Ok((DataTable::new(t.names.clone(), cols)?, record))
}

/// Which price divides the day-over-day change.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnDenominator {
    /// `(v_t - v_{t-1}) / v_t`
    #[default]
    Current,
    /// `(v_t - v_{t-1}) / v_{t-1}`
    Previous,
}

/// Converts chronologically ordered price columns into return columns plus
/// `lags` lagged copies of each, named `SYM_RTN` and `SYM_RTN_LG<L>`.
///
/// The first `1 + lags` rows are consumed, so every output cell is defined.
pub fn compute_returns(
    prices: &DataTable,
    lags: usize,
    denominator: ReturnDenominator,
) -> Result<DataTable> {
    let m = prices.nrows();
    if m < lags + 2 {
        return Err(Error::InvalidInput(format!(
            "{m} rows is too few for {lags} lag(s); need at least {}",
            lags + 2
        )));
    }
    for (name, col) in prices.names.iter().zip(&prices.columns) {
        if let Some(row) = col.iter().position(|&v| v <= 0.0) {
            return Err(Error::NonPositivePrice {
                column: name.clone(),
                row,
                value: col[row],
            });
        }
    }
    let start = 1 + lags;
    let mut names = Vec::with_capacity(prices.ncols() * (1 + lags));
    let mut cols = Vec::with_capacity(names.capacity());
    for (name, col) in prices.names.iter().zip(&prices.columns) {
        // returns[t] is defined for t >= 1
        let returns: Vec<f64> = (0..m)
            .map(|t| {
                if t == 0 {
                    return 0.0;
                }
                let (now, before) = (col[t], col[t - 1]);
                match denominator {
                    ReturnDenominator::Current => (now - before) / now,
                    ReturnDenominator::Previous => (now - before) / before,
                }
            })
            .collect();
        names.push(format!("{name}_RTN"));
        cols.push(returns[start..].to_vec());
        for lag in 1..=lags {
            names.push(format!("{name}_RTN_LG{lag}"));
            cols.push(returns[start - lag..m - lag].to_vec());
        }
    }
    DataTable::new(names, cols)
}
