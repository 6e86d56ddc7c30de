//! Loading incomplete quantitative datasets, partitioning objects by class
//! and turning quantitative values into fuzzy values.
//!
//! Two CSV layouts are accepted. Both start with a header row naming the
//! attributes and the class column (the last column unless another one is
//! named).
//!
//! * raw: every attribute cell is a decimal number, or `*` / empty when the
//!   value is unknown;
//! * pre-fuzzified: every attribute cell is a fuzzy set written as
//!   `region:degree` pairs joined by `+` (for example `N:0.1+H:0.75`), or
//!   `*` / empty. A cell may end in `@value` to carry the quantitative value
//!   the degrees came from (`N:0.1+H:0.75@155`); imputation needs these
//!   values from the objects it uses as donors.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::membership::{FuzzyValue, MembershipFunctionSet};

#[derive(Debug, Clone, PartialEq)]
pub struct RawObject {
    /// 1-based row index.
    pub id: usize,
    pub values: Vec<Option<f64>>,
    pub class_label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDataset {
    pub attributes: Vec<String>,
    pub class_name: String,
    pub objects: Vec<RawObject>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FuzzyCell {
    Missing,
    Known {
        /// Quantitative source value, when known.
        value: Option<f64>,
        fuzzy: FuzzyValue,
    },
}

impl FuzzyCell {
    pub fn is_missing(&self) -> bool {
        matches!(self, FuzzyCell::Missing)
    }

    pub fn degree(&self, region: &str) -> f64 {
        match self {
            FuzzyCell::Missing => 0.0,
            FuzzyCell::Known { fuzzy, .. } => fuzzy.degree(region),
        }
    }

    pub fn value(&self) -> Option<f64> {
        match self {
            FuzzyCell::Missing => None,
            FuzzyCell::Known { value, .. } => *value,
        }
    }

    pub fn fuzzy(&self) -> Option<&FuzzyValue> {
        match self {
            FuzzyCell::Missing => None,
            FuzzyCell::Known { fuzzy, .. } => Some(fuzzy),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyObject {
    pub id: usize,
    pub cells: Vec<FuzzyCell>,
    pub class_label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    /// Region labels in canonical order.
    pub regions: Vec<String>,
}

impl Attribute {
    pub fn region_index(&self, label: &str) -> Option<usize> {
        self.regions.iter().position(|r| r == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyDataset {
    pub attributes: Vec<Attribute>,
    pub class_name: String,
    pub objects: Vec<FuzzyObject>,
}

impl FuzzyDataset {
    pub fn attribute_names(&self) -> Vec<String> {
        self.attributes.iter().map(|a| a.name.clone()).collect()
    }

    /// Looks up an object by its 1-based id.
    pub fn object(&self, id: usize) -> Option<&FuzzyObject> {
        self.objects.get(id.checked_sub(1)?).filter(|o| o.id == id)
    }

    pub fn object_mut(&mut self, id: usize) -> Option<&mut FuzzyObject> {
        self.objects
            .get_mut(id.checked_sub(1)?)
            .filter(|o| o.id == id)
    }

    /// `(object id, attribute index)` of every missing cell, in row order.
    pub fn missing_cells(&self) -> Vec<(usize, usize)> {
        self.objects
            .iter()
            .flat_map(|o| {
                o.cells
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.is_missing())
                    .map(move |(j, _)| (o.id, j))
            })
            .collect()
    }

    pub fn partitions(&self) -> Vec<ClassPartition> {
        partition_by_class(self.objects.iter().map(|o| (o.id, o.class_label.as_str())))
    }

    /// Writes the dataset back out. Uses the raw layout when every known cell
    /// carries its quantitative value, the pre-fuzzified layout otherwise.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let raw = self
            .objects
            .iter()
            .flat_map(|o| o.cells.iter())
            .all(|c| c.is_missing() || c.value().is_some());
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<&str> = self.attributes.iter().map(|a| a.name.as_str()).collect();
        header.push(&self.class_name);
        w.write_record(&header).map_err(csv_write_error)?;
        for obj in &self.objects {
            let mut row: Vec<String> = obj
                .cells
                .iter()
                .map(|cell| match cell {
                    FuzzyCell::Missing => "*".to_string(),
                    FuzzyCell::Known { value: Some(v), .. } if raw => v.to_string(),
                    FuzzyCell::Known { value, fuzzy } => {
                        let terms: Vec<String> =
                            fuzzy.iter().map(|(r, d)| format!("{r}:{d}")).collect();
                        match value {
                            Some(v) => format!("{}@{v}", terms.join("+")),
                            None => terms.join("+"),
                        }
                    }
                })
                .collect();
            row.push(obj.class_label.clone());
            w.write_record(&row).map_err(csv_write_error)?;
        }
        w.flush().map_err(|e| Error::io("<output>", e))?;
        Ok(())
    }
}

fn csv_write_error(e: csv::Error) -> Error {
    Error::io("<output>", std::io::Error::other(e.to_string()))
}

/// Objects sharing a class label (one decision class).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassPartition {
    pub class_label: String,
    pub members: BTreeSet<usize>,
}

impl ClassPartition {
    pub fn contains(&self, id: usize) -> bool {
        self.members.contains(&id)
    }
}

/// Groups object ids by class label. Partitions are returned in order of
/// first appearance of their label.
pub fn partition_by_class<'a, I>(objects: I) -> Vec<ClassPartition>
where
    I: IntoIterator<Item = (usize, &'a str)>,
{
    let mut parts: Vec<ClassPartition> = Vec::new();
    for (id, label) in objects {
        match parts.iter_mut().find(|p| p.class_label == label) {
            Some(p) => {
                p.members.insert(id);
            }
            None => parts.push(ClassPartition {
                class_label: label.to_string(),
                members: BTreeSet::from([id]),
            }),
        }
    }
    parts
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Name of the class column; the last column when `None`.
    pub class_column: Option<String>,
}

struct Table {
    attributes: Vec<String>,
    class_name: String,
    /// Per data row: attribute cells and the class label.
    rows: Vec<(Vec<String>, String)>,
}

fn read_table<R: Read>(input: R, options: &LoadOptions) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers().map_err(|e| parse_error(e, &[]))?.clone();
    let header: Vec<String> = headers
        .iter()
        .enumerate()
        .map(|(i, h)| {
            if i == 0 {
                h.trim_start_matches('\u{feff}')
            } else {
                h
            }
            .to_string()
        })
        .collect();
    if header.len() < 2 || header.iter().all(String::is_empty) {
        return Err(Error::Schema(
            "header must name at least one attribute and the class column".into(),
        ));
    }
    let class_idx = match &options.class_column {
        Some(name) => header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("class column `{name}` not found in header")))?,
        None => header.len() - 1,
    };
    let attributes: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != class_idx)
        .map(|(_, h)| h.clone())
        .collect();
    let mut seen = BTreeSet::new();
    for a in &header {
        if a.is_empty() {
            return Err(Error::Schema("empty column name in header".into()));
        }
        if !seen.insert(a) {
            return Err(Error::Schema(format!("duplicate column `{a}` in header")));
        }
    }

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| parse_error(e, &header))?;
        let class = record.get(class_idx).unwrap_or("").to_string();
        if class.is_empty() || class == "*" {
            return Err(Error::MissingClassLabel { row });
        }
        let cells = record
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != class_idx)
            .map(|(_, v)| v.to_string())
            .collect();
        rows.push((cells, class));
    }
    Ok(Table {
        attributes,
        class_name: header[class_idx].clone(),
        rows,
    })
}

fn parse_error(e: csv::Error, header: &[String]) -> Error {
    let row = e.position().map(|p| p.record() as usize).unwrap_or(0);
    match e.kind() {
        csv::ErrorKind::UnequalLengths {
            expected_len, len, ..
        } => Error::Parse {
            row,
            column: "*".into(),
            message: format!(
                "expected {expected_len} fields, got {len} (header: {})",
                header.join(",")
            ),
        },
        csv::ErrorKind::Io(_) => Error::io("<input>", std::io::Error::other(e.to_string())),
        _ => Error::Parse {
            row,
            column: "*".into(),
            message: e.to_string(),
        },
    }
}

fn is_missing_marker(cell: &str) -> bool {
    cell.is_empty() || cell == "*"
}

fn parse_number(cell: &str, row: usize, column: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            row,
            column: column.to_string(),
            message: format!("`{cell}` is not a decimal number"),
        }),
    }
}

/// Reads a raw quantitative dataset. Ids are assigned in row order from 1.
pub fn load_dataset<R: Read>(input: R, options: &LoadOptions) -> Result<RawDataset> {
    let table = read_table(input, options)?;
    let mut objects = Vec::with_capacity(table.rows.len());
    for (i, (cells, class_label)) in table.rows.into_iter().enumerate() {
        let row = i + 1;
        let values = cells
            .iter()
            .zip(&table.attributes)
            .map(|(cell, column)| {
                if is_missing_marker(cell) {
                    Ok(None)
                } else {
                    parse_number(cell, row, column).map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        objects.push(RawObject {
            id: row,
            values,
            class_label,
        });
    }
    Ok(RawDataset {
        attributes: table.attributes,
        class_name: table.class_name,
        objects,
    })
}

pub fn load_dataset_path(path: impl AsRef<Path>, options: &LoadOptions) -> Result<RawDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    load_dataset(file, options)
}

fn parse_fuzzy_cell(cell: &str, row: usize, column: &str) -> Result<FuzzyCell> {
    if is_missing_marker(cell) {
        return Ok(FuzzyCell::Missing);
    }
    let err = |message: String| Error::Parse {
        row,
        column: column.to_string(),
        message,
    };
    let (terms_text, value) = match cell.split_once('@') {
        Some((t, v)) => (t, Some(parse_number(v.trim(), row, column)?)),
        None => (cell, None),
    };
    let mut terms = Vec::new();
    for term in terms_text.split('+').map(str::trim) {
        let (region, degree) = term
            .split_once(':')
            .ok_or_else(|| err(format!("`{term}` is not of the form region:degree")))?;
        let region = region.trim();
        if region.is_empty() {
            return Err(err(format!("empty region name in `{term}`")));
        }
        let degree = parse_number(degree.trim(), row, column)?;
        if degree == 0.0 {
            continue;
        }
        terms.push((region.to_string(), degree));
    }
    if terms.is_empty() {
        return Err(err(format!("`{cell}` has no region with positive degree")));
    }
    let fuzzy = FuzzyValue::from_terms(terms).map_err(|e| err(e.to_string()))?;
    Ok(FuzzyCell::Known { value, fuzzy })
}

/// Reads a pre-fuzzified dataset. When `mfs` is given, region order follows
/// it and unknown region labels are rejected; otherwise regions are ordered
/// by first appearance.
pub fn load_prefuzzified<R: Read>(
    input: R,
    options: &LoadOptions,
    mfs: Option<&MembershipFunctionSet>,
) -> Result<FuzzyDataset> {
    let table = read_table(input, options)?;
    let mut attributes: Vec<Attribute> = table
        .attributes
        .iter()
        .map(|name| Attribute {
            name: name.clone(),
            regions: mfs.map(|m| m.regions(name)).unwrap_or_default(),
        })
        .collect();
    let mut objects = Vec::with_capacity(table.rows.len());
    for (i, (cells, class_label)) in table.rows.into_iter().enumerate() {
        let row = i + 1;
        let mut parsed = Vec::with_capacity(cells.len());
        for (cell, attribute) in cells.iter().zip(attributes.iter_mut()) {
            let fuzzy_cell = parse_fuzzy_cell(cell, row, &attribute.name)?;
            if let Some(fuzzy) = fuzzy_cell.fuzzy() {
                for region in fuzzy.regions() {
                    if attribute.region_index(region).is_none() {
                        if mfs.is_some() {
                            return Err(Error::Parse {
                                row,
                                column: attribute.name.clone(),
                                message: format!("region `{region}` has no membership function"),
                            });
                        }
                        attribute.regions.push(region.to_string());
                    }
                }
            }
            parsed.push(fuzzy_cell);
        }
        objects.push(FuzzyObject {
            id: row,
            cells: parsed,
            class_label,
        });
    }
    Ok(FuzzyDataset {
        attributes,
        class_name: table.class_name,
        objects,
    })
}

pub fn load_prefuzzified_path(
    path: impl AsRef<Path>,
    options: &LoadOptions,
    mfs: Option<&MembershipFunctionSet>,
) -> Result<FuzzyDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    load_prefuzzified(file, options, mfs)
}

/// Replaces every known quantitative value by its fuzzy set; missing values
/// stay missing.
pub fn fuzzify_dataset(raw: &RawDataset, mfs: &MembershipFunctionSet) -> Result<FuzzyDataset> {
    let attributes: Vec<Attribute> = raw
        .attributes
        .iter()
        .map(|name| Attribute {
            name: name.clone(),
            regions: mfs.regions(name),
        })
        .collect();
    let objects = raw
        .objects
        .iter()
        .map(|obj| {
            let cells = obj
                .values
                .iter()
                .zip(&raw.attributes)
                .map(|(value, name)| match value {
                    None => Ok(FuzzyCell::Missing),
                    Some(v) => {
                        let fuzzy = mfs.fuzzify(name, *v).map_err(|e| match e {
                            Error::AllZeroMembership {
                                attribute, value, ..
                            } => Error::AllZeroMembership {
                                attribute,
                                value,
                                object: Some(obj.id),
                            },
                            other => other,
                        })?;
                        Ok(FuzzyCell::Known {
                            value: Some(*v),
                            fuzzy,
                        })
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(FuzzyObject {
                id: obj.id,
                cells,
                class_label: obj.class_label.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FuzzyDataset {
        attributes,
        class_name: raw.class_name.clone(),
        objects,
    })
}

impl RawDataset {
    pub fn partitions(&self) -> Vec<ClassPartition> {
        partition_by_class(self.objects.iter().map(|o| (o.id, o.class_label.as_str())))
    }
}
