//! Piecewise-linear membership functions and the conversion of quantitative
//! values into fuzzy sets of linguistic terms.
//!
//! A membership function is a list of `(x, degree)` knots. Between two knots
//! the degree is linearly interpolated; outside the knot range the boundary
//! degree is held constant, so a function whose first knot has degree 0 is 0
//! to the left of it, and a "shoulder" function whose last knot has degree 1
//! stays at 1 to the right. Triangular and trapezoidal shapes are special
//! cases.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipFunction {
    region: String,
    points: Vec<(f64, f64)>,
}

impl MembershipFunction {
    pub fn new(region: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        let region = region.into();
        if let Some(reason) = point_list_problem(&points) {
            return Err(Error::InvalidMembershipFunction { region, reason });
        }
        Ok(Self { region, points })
    }

    /// Builds a function without checking the knot list. Used by the config
    /// parser so that `validate_mf_set` can report every problem at once.
    pub(crate) fn new_unchecked(region: String, points: Vec<(f64, f64)>) -> Self {
        Self { region, points }
    }

    pub fn region(&self) -> &str {
        &self.region
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Degree of `x` in this region, always within `[0, 1]`.
    pub fn evaluate(&self, x: f64) -> f64 {
        evaluate_membership(self, x)
    }
}

fn point_list_problem(points: &[(f64, f64)]) -> Option<String> {
    if points.len() < 2 {
        return Some(format!("needs at least 2 points, got {}", points.len()));
    }
    for &(x, y) in points {
        if !x.is_finite() || !y.is_finite() {
            return Some(format!("non-finite point ({x}, {y})"));
        }
        if !(0.0..=1.0).contains(&y) {
            return Some(format!("degree {y} at x={x} is outside [0, 1]"));
        }
    }
    for w in points.windows(2) {
        if w[1].0 <= w[0].0 {
            return Some(format!(
                "x values must be strictly increasing ({} then {})",
                w[0].0, w[1].0
            ));
        }
    }
    None
}

pub fn evaluate_membership(mf: &MembershipFunction, x: f64) -> f64 {
    let pts = &mf.points;
    let (Some(&(x_first, y_first)), Some(&(x_last, y_last))) = (pts.first(), pts.last()) else {
        return 0.0;
    };
    if x.is_nan() {
        return 0.0;
    }
    let degree = if x <= x_first {
        y_first
    } else if x >= x_last {
        y_last
    } else {
        pts.windows(2)
            .find(|w| x >= w[0].0 && x < w[1].0)
            .map(|w| {
                let (xa, ya) = w[0];
                let (xb, yb) = w[1];
                if x == xa {
                    ya
                } else {
                    ya + (yb - ya) * (x - xa) / (xb - xa)
                }
            })
            .unwrap_or(0.0)
    };
    degree.clamp(0.0, 1.0)
}

/// A fuzzy set over the regions of one attribute. Only regions with a
/// positive degree are stored; insertion order is preserved.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FuzzyValue {
    terms: Vec<(String, f64)>,
}

impl FuzzyValue {
    pub fn from_terms<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut value = FuzzyValue::default();
        for (label, degree) in terms {
            let label = label.into();
            if !(degree > 0.0 && degree <= 1.0) {
                return Err(Error::InvalidFuzzyValue(format!(
                    "degree {degree} for region {label} is outside (0, 1]"
                )));
            }
            if value.terms.iter().any(|(l, _)| *l == label) {
                return Err(Error::InvalidFuzzyValue(format!(
                    "region {label} listed twice"
                )));
            }
            value.terms.push((label, degree));
        }
        Ok(value)
    }

    /// Degree of membership in `region`; 0 when the region is absent.
    pub fn degree(&self, region: &str) -> f64 {
        self.terms
            .iter()
            .find(|(l, _)| l == region)
            .map_or(0.0, |&(_, d)| d)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.terms.iter().map(|(l, d)| (l.as_str(), *d))
    }

    pub fn regions(&self) -> impl Iterator<Item = &str> + '_ {
        self.terms.iter().map(|(l, _)| l.as_str())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

impl fmt::Display for FuzzyValue {
    /// Renders as `degree/region` terms, e.g. `0.10/N+0.75/H`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (label, degree)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            write!(f, "{degree:.2}/{label}")?;
        }
        Ok(())
    }
}

/// Converts `value` into a fuzzy set over `attribute_mfs`. Fails when the
/// value falls into a gap not covered by any region.
pub fn fuzzify(
    attribute: &str,
    value: f64,
    attribute_mfs: &[MembershipFunction],
) -> Result<FuzzyValue> {
    let mut out = FuzzyValue::default();
    for mf in attribute_mfs {
        let degree = mf.evaluate(value);
        if degree > 0.0 {
            out.terms.push((mf.region.clone(), degree));
        }
    }
    if out.is_empty() {
        return Err(Error::AllZeroMembership {
            attribute: attribute.to_string(),
            value,
            object: None,
        });
    }
    Ok(out)
}

/// Membership functions for every attribute, in definition order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MembershipFunctionSet {
    attributes: Vec<(String, Vec<MembershipFunction>)>,
}

impl MembershipFunctionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, attribute: impl Into<String>, mf: MembershipFunction) {
        let attribute = attribute.into();
        match self.attributes.iter_mut().find(|(a, _)| *a == attribute) {
            Some((_, mfs)) => mfs.push(mf),
            None => self.attributes.push((attribute, vec![mf])),
        }
    }

    pub fn get(&self, attribute: &str) -> Option<&[MembershipFunction]> {
        self.attributes
            .iter()
            .find(|(a, _)| a == attribute)
            .map(|(_, mfs)| mfs.as_slice())
    }

    pub fn attributes(&self) -> impl Iterator<Item = &str> + '_ {
        self.attributes.iter().map(|(a, _)| a.as_str())
    }

    /// Region labels of `attribute` in definition order.
    pub fn regions(&self, attribute: &str) -> Vec<String> {
        self.get(attribute)
            .map(|mfs| mfs.iter().map(|mf| mf.region.clone()).collect())
            .unwrap_or_default()
    }

    pub fn fuzzify(&self, attribute: &str, value: f64) -> Result<FuzzyValue> {
        let mfs = self
            .get(attribute)
            .ok_or_else(|| Error::MissingMembership(attribute.to_string()))?;
        fuzzify(attribute, value, mfs)
    }

    /// Parses the line-based config format
    /// `attribute,region,x1:y1;x2:y2;...`. Lines starting with `#` and blank
    /// lines are skipped. Knot lists are not checked here; see
    /// [`validate_mf_set`].
    pub fn parse(text: &str) -> Result<Self> {
        let mut set = Self::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.strip_suffix('\r').unwrap_or(raw_line);
            let line = if idx == 0 {
                line.strip_prefix('\u{feff}').unwrap_or(line)
            } else {
                line
            };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::Config {
                    line: line_no,
                    message: format!("expected 3 comma-separated fields, got {}", fields.len()),
                });
            }
            if fields[0].is_empty() || fields[1].is_empty() {
                return Err(Error::Config {
                    line: line_no,
                    message: "attribute and region must be non-empty".into(),
                });
            }
            let mut points = Vec::new();
            for pair in fields[2]
                .split(';')
                .map(str::trim)
                .filter(|p| !p.is_empty())
            {
                let (x, y) = pair.split_once(':').ok_or_else(|| Error::Config {
                    line: line_no,
                    message: format!("point `{pair}` is not of the form x:y"),
                })?;
                let parse = |s: &str| {
                    s.trim().parse::<f64>().map_err(|_| Error::Config {
                        line: line_no,
                        message: format!("`{s}` is not a decimal number"),
                    })
                };
                points.push((parse(x)?, parse(y)?));
            }
            set.insert(
                fields[0],
                MembershipFunction::new_unchecked(fields[1].to_string(), points),
            );
        }
        Ok(set)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::parse(&text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MfIssue {
    MissingAttribute(String),
    DuplicateRegion {
        attribute: String,
        region: String,
    },
    MalformedPoints {
        attribute: String,
        region: String,
        reason: String,
    },
}

impl fmt::Display for MfIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MfIssue::MissingAttribute(a) => write!(f, "no membership functions for attribute {a}"),
            MfIssue::DuplicateRegion { attribute, region } => {
                write!(
                    f,
                    "region {region} defined more than once for attribute {attribute}"
                )
            }
            MfIssue::MalformedPoints {
                attribute,
                region,
                reason,
            } => write!(f, "{attribute}/{region}: {reason}"),
        }
    }
}

/// Checks `mfs` against the attributes that need fuzzification. An empty
/// report means the set is usable.
pub fn validate_mf_set(mfs: &MembershipFunctionSet, attributes: &[String]) -> Vec<MfIssue> {
    let mut report = Vec::new();
    for attribute in attributes {
        if mfs.get(attribute).is_none_or(<[_]>::is_empty) {
            report.push(MfIssue::MissingAttribute(attribute.clone()));
        }
    }
    for (attribute, functions) in &mfs.attributes {
        let mut seen = BTreeSet::new();
        for mf in functions {
            if !seen.insert(mf.region.as_str()) {
                report.push(MfIssue::DuplicateRegion {
                    attribute: attribute.clone(),
                    region: mf.region.clone(),
                });
            }
            if let Some(reason) = point_list_problem(&mf.points) {
                report.push(MfIssue::MalformedPoints {
                    attribute: attribute.clone(),
                    region: mf.region.clone(),
                    reason,
                });
            }
        }
    }
    report
}
