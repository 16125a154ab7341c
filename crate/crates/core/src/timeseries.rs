//! Multi-attribute hourly time series organized as daily periods.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const EL_DEMAND: &str = "el_demand";
pub const HEAT_DEMAND: &str = "heat_demand";
pub const T_AMBIENT: &str = "t_ambient";
pub const SOLAR_CF: &str = "solar_cf";
pub const EL_PRICE: &str = "el_price";

/// Column order of the standard CSV layout.
pub const STANDARD_ATTRIBUTES: [&str; 5] = [EL_DEMAND, HEAT_DEMAND, T_AMBIENT, SOLAR_CF, EL_PRICE];

pub fn default_unit(name: &str) -> &'static str {
    match name {
        EL_DEMAND | HEAT_DEMAND => "kWh/h",
        T_AMBIENT => "degC",
        SOLAR_CF => "kW/kWp",
        EL_PRICE => "EUR/kWh",
        _ => "",
    }
}

#[derive(Debug, Error)]
pub enum TimeSeriesError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("non-numeric cell at data row {row}, column `{col}`")]
    NonNumericCell { row: usize, col: String },
    #[error("NaN value at data row {row}, column `{col}`")]
    NaNValue { row: usize, col: String },
    #[error("{rows} rows is not a whole number of {hours_per_day}-hour days")]
    RaggedLength { rows: usize, hours_per_day: usize },
    #[error("attribute `{name}` has {len} values, expected {expected}")]
    LengthMismatch { name: String, len: usize, expected: usize },
    #[error("attribute `{0}` appears more than once")]
    DuplicateAttribute(String),
    #[error("unknown attribute `{0}`")]
    UnknownAttribute(String),
    #[error("attribute `{attribute}` value {value} out of range at day {day}, hour {hour}")]
    OutOfRange { attribute: String, day: usize, hour: usize, value: f64 },
    #[error("dataset needs at least one day and one hour per day")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeProfile {
    pub name: String,
    pub unit: String,
    pub values: Vec<f64>,
}

impl AttributeProfile {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Self {
        let name = name.into();
        let unit = default_unit(&name).to_string();
        Self { name, unit, values }
    }
}

/// One period (day) of every attribute: `values[attribute][hour]`.
///
/// `day_index` is `None` for periods that are not a day of the source data,
/// such as cluster centroids or virtual extreme days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Period {
    pub day_index: Option<usize>,
    pub values: Vec<Vec<f64>>,
}

impl Period {
    pub fn hours(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    /// Attribute-major flattening used as the clustering feature vector.
    pub fn flatten(&self) -> Vec<f64> {
        self.values.iter().flatten().copied().collect()
    }

    pub fn from_flat(day_index: Option<usize>, flat: &[f64], hours: usize) -> Self {
        Self {
            day_index,
            values: flat.chunks(hours).map(<[f64]>::to_vec).collect(),
        }
    }
}

/// Full-horizon input: every attribute holds `n_days * hours_per_day`
/// chronological hourly values. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    attributes: Vec<AttributeProfile>,
    n_days: usize,
    hours_per_day: usize,
}

impl Dataset {
    pub fn new(attributes: Vec<AttributeProfile>, hours_per_day: usize) -> Result<Self, TimeSeriesError> {
        if hours_per_day == 0 || attributes.is_empty() {
            return Err(TimeSeriesError::Empty);
        }
        let len = attributes[0].values.len();
        if len == 0 {
            return Err(TimeSeriesError::Empty);
        }
        if len % hours_per_day != 0 {
            return Err(TimeSeriesError::RaggedLength {
                rows: len,
                hours_per_day,
            });
        }
        let mut seen = HashSet::new();
        for a in &attributes {
            if !seen.insert(a.name.as_str()) {
                return Err(TimeSeriesError::DuplicateAttribute(a.name.clone()));
            }
            if a.values.len() != len {
                return Err(TimeSeriesError::LengthMismatch {
                    name: a.name.clone(),
                    len: a.values.len(),
                    expected: len,
                });
            }
            if let Some(k) = a.values.iter().position(|v| v.is_nan()) {
                return Err(TimeSeriesError::NaNValue {
                    row: k,
                    col: a.name.clone(),
                });
            }
        }
        Ok(Self {
            attributes,
            n_days: len / hours_per_day,
            hours_per_day,
        })
    }

    /// Build from periods that all share the attribute layout of `names`.
    pub fn from_periods(names: &[String], periods: &[Period]) -> Result<Self, TimeSeriesError> {
        let hours = periods.first().map_or(0, Period::hours);
        let attributes = names
            .iter()
            .enumerate()
            .map(|(a, name)| {
                let values = periods.iter().flat_map(|p| p.values[a].iter().copied()).collect();
                AttributeProfile::new(name.clone(), values)
            })
            .collect();
        Self::new(attributes, hours)
    }

    /// Physical range checks: demands nonnegative, capacity factors in [0, 1].
    pub fn validate_ranges(&self) -> Result<(), TimeSeriesError> {
        for a in &self.attributes {
            let ok: fn(f64) -> bool = match a.name.as_str() {
                EL_DEMAND | HEAT_DEMAND => |v| v >= 0.0,
                SOLAR_CF => |v| (0.0..=1.0).contains(&v),
                _ => continue,
            };
            if let Some(k) = a.values.iter().position(|&v| !ok(v)) {
                return Err(TimeSeriesError::OutOfRange {
                    attribute: a.name.clone(),
                    day: k / self.hours_per_day,
                    hour: k % self.hours_per_day,
                    value: a.values[k],
                });
            }
        }
        Ok(())
    }

    pub fn n_days(&self) -> usize {
        self.n_days
    }

    pub fn hours_per_day(&self) -> usize {
        self.hours_per_day
    }

    pub fn n_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn attributes(&self) -> &[AttributeProfile] {
        &self.attributes
    }

    pub fn attribute_names(&self) -> Vec<String> {
        self.attributes.iter().map(|a| a.name.clone()).collect()
    }

    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeProfile> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, TimeSeriesError> {
        self.attribute_index(name)
            .ok_or_else(|| TimeSeriesError::UnknownAttribute(name.to_string()))
    }

    /// Hourly values of one attribute on one day.
    pub fn day_row(&self, attribute: usize, day: usize) -> &[f64] {
        let h = self.hours_per_day;
        &self.attributes[attribute].values[day * h..(day + 1) * h]
    }

    pub fn day(&self, i: usize) -> Period {
        assert!(i < self.n_days, "day {i} out of range");
        Period {
            day_index: Some(i),
            values: (0..self.attributes.len()).map(|a| self.day_row(a, i).to_vec()).collect(),
        }
    }

    pub fn periods(&self) -> Vec<Period> {
        (0..self.n_days).map(|i| self.day(i)).collect()
    }

    /// Per-attribute mean over the whole horizon.
    pub fn means(&self) -> Vec<f64> {
        self.attributes
            .iter()
            .map(|a| a.values.iter().sum::<f64>() / a.values.len() as f64)
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), TimeSeriesError> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(self.attributes.iter().map(|a| a.name.as_str()))?;
        let rows = self.n_days * self.hours_per_day;
        for k in 0..rows {
            w.write_record(self.attributes.iter().map(|a| a.values[k].to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Expected CSV columns and day length.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSchema {
    pub attributes: Vec<String>,
    pub hours_per_day: usize,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            attributes: STANDARD_ATTRIBUTES.iter().map(|s| s.to_string()).collect(),
            hours_per_day: 24,
        }
    }
}

/// Read one row per hour, chronological. Columns outside the schema are
/// ignored; the dataset keeps the schema's attribute order.
pub fn load_csv(path: &Path, schema: &CsvSchema) -> Result<Dataset, TimeSeriesError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let columns: Vec<usize> = schema
        .attributes
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| TimeSeriesError::MissingColumn(name.clone()))
        })
        .collect::<Result<_, _>>()?;
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); columns.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        for (a, &c) in columns.iter().enumerate() {
            let cell = record.get(c).unwrap_or("");
            let v: f64 = cell.parse().map_err(|_| TimeSeriesError::NonNumericCell {
                row,
                col: schema.attributes[a].clone(),
            })?;
            if v.is_nan() {
                return Err(TimeSeriesError::NaNValue {
                    row,
                    col: schema.attributes[a].clone(),
                });
            }
            values[a].push(v);
        }
    }
    let rows = values.first().map_or(0, Vec::len);
    if rows == 0 {
        return Err(TimeSeriesError::Empty);
    }
    if rows % schema.hours_per_day != 0 {
        return Err(TimeSeriesError::RaggedLength {
            rows,
            hours_per_day: schema.hours_per_day,
        });
    }
    let attributes = schema
        .attributes
        .iter()
        .zip(values)
        .map(|(name, v)| AttributeProfile::new(name.clone(), v))
        .collect();
    let data = Dataset::new(attributes, schema.hours_per_day)?;
    data.validate_ranges()?;
    Ok(data)
}

/// Mean and standard deviation (population convention) of one attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeScale {
    pub name: String,
    pub mu: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub scales: Vec<AttributeScale>,
}

impl NormalizationParams {
    pub fn get(&self, name: &str) -> Option<&AttributeScale> {
        self.scales.iter().find(|s| s.name == name)
    }
}

/// Z-normalize every attribute with one mean and standard deviation over the
/// whole series. Constant attributes map to all zeros and keep `sigma = 0`.
pub fn z_normalize(data: &Dataset) -> (Dataset, NormalizationParams) {
    let mut scales = Vec::with_capacity(data.attributes.len());
    let attributes = data
        .attributes
        .iter()
        .map(|a| {
            let n = a.values.len() as f64;
            let mu = a.values.iter().sum::<f64>() / n;
            let var = a.values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
            let sigma = var.sqrt();
            scales.push(AttributeScale {
                name: a.name.clone(),
                mu,
                sigma,
            });
            let values = if sigma > 0.0 {
                a.values.iter().map(|v| (v - mu) / sigma).collect()
            } else {
                vec![0.0; a.values.len()]
            };
            AttributeProfile {
                name: a.name.clone(),
                unit: "z".to_string(),
                values,
            }
        })
        .collect();
    let normalized = Dataset {
        attributes,
        n_days: data.n_days,
        hours_per_day: data.hours_per_day,
    };
    (normalized, NormalizationParams { scales })
}

/// Inverse of [`z_normalize`]: `x = z * sigma + mu`.
pub fn denormalize(data: &Dataset, params: &NormalizationParams) -> Result<Dataset, TimeSeriesError> {
    let attributes = data
        .attributes
        .iter()
        .map(|a| {
            let s = params
                .get(&a.name)
                .ok_or_else(|| TimeSeriesError::UnknownAttribute(a.name.clone()))?;
            Ok(AttributeProfile::new(
                a.name.clone(),
                a.values.iter().map(|z| z * s.sigma + s.mu).collect(),
            ))
        })
        .collect::<Result<_, TimeSeriesError>>()?;
    Ok(Dataset {
        attributes,
        n_days: data.n_days,
        hours_per_day: data.hours_per_day,
    })
}

/// Denormalize a single period laid out in `names` order.
pub fn denormalize_period(
    period: &Period,
    names: &[String],
    params: &NormalizationParams,
) -> Result<Period, TimeSeriesError> {
    let values = period
        .values
        .iter()
        .zip(names)
        .map(|(row, name)| {
            let s = params
                .get(name)
                .ok_or_else(|| TimeSeriesError::UnknownAttribute(name.clone()))?;
            Ok(row.iter().map(|z| z * s.sigma + s.mu).collect())
        })
        .collect::<Result<_, TimeSeriesError>>()?;
    Ok(Period {
        day_index: period.day_index,
        values,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Largest or smallest single hourly value.
    Absolute,
    /// Largest or smallest daily sum.
    Integral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Max,
    Min,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Absolute => "absolute",
            Statistic::Integral => "integral",
        })
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Max => "max",
            Direction::Min => "min",
        })
    }
}

/// Day holding the extreme of an attribute. Ties go to the lowest day.
pub fn attribute_extremum(
    data: &Dataset,
    attribute: &str,
    statistic: Statistic,
    direction: Direction,
) -> Result<usize, TimeSeriesError> {
    let a = data.require(attribute)?;
    let score = |day: usize| -> f64 {
        let row = data.day_row(a, day);
        match (statistic, direction) {
            (Statistic::Absolute, Direction::Max) => row.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            (Statistic::Absolute, Direction::Min) => row.iter().copied().fold(f64::INFINITY, f64::min),
            (Statistic::Integral, _) => row.iter().sum(),
        }
    };
    let mut best = 0;
    let mut best_score = score(0);
    for day in 1..data.n_days {
        let s = score(day);
        let better = match direction {
            Direction::Max => s > best_score,
            Direction::Min => s < best_score,
        };
        if better {
            best = day;
            best_score = s;
        }
    }
    Ok(best)
}
