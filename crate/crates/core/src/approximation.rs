//! Fuzzy incomplete lower/upper approximations and the interleaved
//! estimation of missing values.
//!
//! The imputation pipeline first walks the lower approximations of every
//! attribute subset (by size, then lexicographically) and every decision
//! class. An object of class `X` that is an uncertain member of exactly one
//! lower-approximation class gets its unknown values estimated from that
//! class's certain members. A second walk over the upper approximations
//! handles the remaining objects, restricting donors to `X` and choosing
//! between several candidate classes by plausibility. After every accepted
//! estimate all classes and approximations are rebuilt from scratch.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::dataset::{ClassPartition, FuzzyCell, FuzzyDataset};
use crate::error::{Error, Result};
use crate::membership::MembershipFunctionSet;
use crate::partitions::{
    all_subsets, build_classes, IncompleteEquivalenceClass, RegionCombination, SubsetClasses,
};
use crate::TOLERANCE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproximationKind {
    Lower,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Approximation {
    pub kind: ApproximationKind,
    pub class_label: String,
    pub subset: Vec<usize>,
    pub entries: Vec<IncompleteEquivalenceClass>,
}

impl Approximation {
    pub fn contains(&self, combination: &RegionCombination) -> bool {
        self.entries.iter().any(|e| &e.combination == combination)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Classes whose certain part lies inside `partition`.
pub fn lower_approximation(family: &SubsetClasses, partition: &ClassPartition) -> Approximation {
    let entries = family
        .classes
        .iter()
        .filter(|c| c.has_certain() && c.certain_members().all(|m| partition.contains(m.id)))
        .cloned()
        .collect();
    Approximation {
        kind: ApproximationKind::Lower,
        class_label: partition.class_label.clone(),
        subset: family.subset.clone(),
        entries,
    }
}

/// Classes whose certain part meets `partition` without lying inside it.
pub fn upper_approximation(family: &SubsetClasses, partition: &ClassPartition) -> Approximation {
    let entries = family
        .classes
        .iter()
        .filter(|c| {
            let mut inside = false;
            let mut outside = false;
            for m in c.certain_members() {
                if partition.contains(m.id) {
                    inside = true;
                } else {
                    outside = true;
                }
            }
            inside && outside
        })
        .cloned()
        .collect();
    Approximation {
        kind: ApproximationKind::Upper,
        class_label: partition.class_label.clone(),
        subset: family.subset.clone(),
        entries,
    }
}

fn weighted_estimate(
    ds: &FuzzyDataset,
    object: usize,
    attribute: usize,
    class: &IncompleteEquivalenceClass,
    donor_filter: impl Fn(usize) -> bool,
) -> Result<f64> {
    let attr = &ds.attributes[attribute];
    let no_donor = || Error::NoCertainDonor {
        object,
        attribute: attr.name.clone(),
    };
    let region = class
        .combination
        .region_of(attribute)
        .map(|r| attr.regions[r].as_str())
        .ok_or_else(no_donor)?;
    let mut weighted = 0.0;
    let mut weights = 0.0;
    for donor in class.certain_members().filter(|m| donor_filter(m.id)) {
        let cell = &ds.object(donor.id).expect("class members exist").cells[attribute];
        let degree = cell.degree(region);
        if degree <= 0.0 {
            continue;
        }
        let value = cell.value().ok_or_else(|| Error::DonorValueUnknown {
            object,
            donor: donor.id,
            attribute: attr.name.clone(),
        })?;
        weighted += value * degree;
        weights += degree;
    }
    if weights > 0.0 {
        Ok(weighted / weights)
    } else {
        Err(no_donor())
    }
}

/// Membership-weighted mean of the certain members' values of `attribute`,
/// weighted by their degree in the class's region for that attribute.
pub fn estimate_value_lower(
    ds: &FuzzyDataset,
    object: usize,
    attribute: usize,
    class: &IncompleteEquivalenceClass,
) -> Result<f64> {
    weighted_estimate(ds, object, attribute, class, |_| true)
}

/// As [`estimate_value_lower`], with donors restricted to `partition`.
pub fn estimate_value_upper(
    ds: &FuzzyDataset,
    object: usize,
    attribute: usize,
    class: &IncompleteEquivalenceClass,
    partition: &ClassPartition,
) -> Result<f64> {
    weighted_estimate(ds, object, attribute, class, |id| partition.contains(id))
}

/// Share of the certain part's membership mass that belongs to `partition`.
pub fn plausibility_of_class(
    class: &IncompleteEquivalenceClass,
    partition: &ClassPartition,
) -> f64 {
    let (inside, total) = class.certain_members().fold((0.0, 0.0), |(i, t), m| {
        if partition.contains(m.id) {
            (i + m.degree, t + m.degree)
        } else {
            (i, t + m.degree)
        }
    });
    if total > 0.0 {
        inside / total
    } else {
        0.0
    }
}

/// Picks the candidate with the highest plausibility; ties go to the class
/// with more certain members, then to the smallest combination.
pub fn resolve_uncertain<'a>(
    candidates: &[&'a IncompleteEquivalenceClass],
    partition: &ClassPartition,
) -> Option<&'a IncompleteEquivalenceClass> {
    let mut best: Option<(&IncompleteEquivalenceClass, f64, usize)> = None;
    for &class in candidates {
        let p = plausibility_of_class(class, partition);
        let n = class.certain_members().count();
        let better = match best {
            None => true,
            Some((b, bp, bn)) => {
                if p > bp + TOLERANCE {
                    true
                } else if p < bp - TOLERANCE {
                    false
                } else if n != bn {
                    n > bn
                } else {
                    class.combination < b.combination
                }
            }
        };
        if better {
            best = Some((class, p, n));
        }
    }
    best.map(|(c, _, _)| c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    LowerPass,
    UpperPass,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::LowerPass => "lower",
            Phase::UpperPass => "upper",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImputationRecord {
    pub object: usize,
    pub attribute: usize,
    pub value: f64,
    pub source: RegionCombination,
    pub phase: Phase,
    /// Donor values that contributed, for auditing.
    pub donor_range: (f64, f64),
}

impl ImputationRecord {
    /// `obj,attribute,value,phase,combination`.
    pub fn log_line(&self, ds: &FuzzyDataset) -> String {
        format!(
            "{},{},{},{},{}",
            self.object,
            ds.attributes[self.attribute].name,
            self.value,
            self.phase,
            self.source.display(ds)
        )
    }
}

/// Classes and approximations for every attribute subset and decision
/// class, all derived from one dataset snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproximationState {
    pub families: Vec<SubsetClasses>,
    /// `lower[s][p]` is the lower approximation of partition `p` over
    /// `families[s]`.
    pub lower: Vec<Vec<Approximation>>,
    pub upper: Vec<Vec<Approximation>>,
}

impl ApproximationState {
    pub fn build(ds: &FuzzyDataset, partitions: &[ClassPartition]) -> Self {
        let families: Vec<SubsetClasses> = all_subsets(ds.attributes.len())
            .iter()
            .map(|b| build_classes(ds, b))
            .collect();
        let lower: Vec<Vec<_>> = families
            .iter()
            .map(|f| {
                partitions
                    .iter()
                    .map(|p| lower_approximation(f, p))
                    .collect()
            })
            .collect();
        let upper: Vec<Vec<_>> = families
            .iter()
            .map(|f| {
                partitions
                    .iter()
                    .map(|p| upper_approximation(f, p))
                    .collect()
            })
            .collect();
        let state = Self {
            families,
            lower,
            upper,
        };
        debug_assert!(state.lower_upper_disjoint());
        state
    }

    pub fn lower_upper_disjoint(&self) -> bool {
        self.lower.iter().zip(&self.upper).all(|(lows, ups)| {
            lows.iter()
                .zip(ups)
                .all(|(lo, up)| lo.entries.iter().all(|e| !up.contains(&e.combination)))
        })
    }
}

#[derive(Debug)]
pub struct ImputationOutcome {
    pub dataset: FuzzyDataset,
    pub records: Vec<ImputationRecord>,
    /// `(object id, attribute index)` still unknown at the fixpoint.
    pub unresolved: Vec<(usize, usize)>,
    /// Estimates that could not be made (no donor, donor without value).
    pub failures: Vec<Error>,
    pub passes: usize,
    pub state: ApproximationState,
}

impl ImputationOutcome {
    pub fn unresolved_error(&self) -> Option<Error> {
        (!self.unresolved.is_empty()).then(|| {
            Error::UnresolvedUncertainty(
                self.unresolved
                    .iter()
                    .map(|&(o, a)| (o, self.dataset.attributes[a].name.clone()))
                    .collect(),
            )
        })
    }
}

struct Pipeline<'a> {
    data: FuzzyDataset,
    partitions: &'a [ClassPartition],
    mfs: &'a MembershipFunctionSet,
    state: ApproximationState,
    records: Vec<ImputationRecord>,
    failures: Vec<Error>,
    /// `(object, subset index, combination)` whose estimate failed this pass.
    blocked: HashSet<(usize, usize, RegionCombination)>,
}

impl Pipeline<'_> {
    /// Estimates every unknown value of `object` within `class`'s attributes
    /// and applies them. Returns whether anything changed.
    fn impute(
        &mut self,
        object: usize,
        subset_idx: usize,
        class: &IncompleteEquivalenceClass,
        restrict_to: Option<&ClassPartition>,
        phase: Phase,
    ) -> Result<bool> {
        let missing: Vec<usize> = class
            .combination
            .attributes()
            .into_iter()
            .filter(|&a| self.data.object(object).expect("member exists").cells[a].is_missing())
            .collect();
        let mut estimates = Vec::new();
        for &attribute in &missing {
            let estimate = match restrict_to {
                None => estimate_value_lower(&self.data, object, attribute, class),
                Some(p) => estimate_value_upper(&self.data, object, attribute, class, p),
            };
            match estimate {
                Ok(v) => estimates.push((attribute, v)),
                Err(e @ (Error::NoCertainDonor { .. } | Error::DonorValueUnknown { .. })) => {
                    self.failures.push(e)
                }
                Err(e) => return Err(e),
            }
        }
        if estimates.is_empty() {
            self.blocked
                .insert((object, subset_idx, class.combination.clone()));
            return Ok(false);
        }
        for (attribute, value) in estimates {
            let name = &self.data.attributes[attribute].name;
            let fuzzy = self.mfs.fuzzify(name, value).map_err(|e| match e {
                Error::AllZeroMembership {
                    attribute, value, ..
                } => Error::AllZeroMembership {
                    attribute,
                    value,
                    object: Some(object),
                },
                other => other,
            })?;
            let donors = class
                .certain_members()
                .filter(|m| restrict_to.is_none_or(|p| p.contains(m.id)))
                .filter_map(|m| self.data.object(m.id)?.cells[attribute].value());
            let donor_range = donors.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            self.records.push(ImputationRecord {
                object,
                attribute,
                value,
                source: class.combination.clone(),
                phase,
                donor_range,
            });
            self.data.object_mut(object).expect("member exists").cells[attribute] =
                FuzzyCell::Known {
                    value: Some(value),
                    fuzzy,
                };
        }
        // backtrack: every structure is rebuilt from the updated data
        self.state = ApproximationState::build(&self.data, self.partitions);
        Ok(true)
    }

    fn is_blocked(&self, object: usize, s: usize, class: &IncompleteEquivalenceClass) -> bool {
        self.blocked
            .contains(&(object, s, class.combination.clone()))
    }

    /// Uncertain members of `approx` entries that belong to `partition`, in
    /// ascending id order.
    fn uncertain_in(approxes: &[&Approximation], partition: &ClassPartition) -> BTreeSet<usize> {
        approxes
            .iter()
            .flat_map(|a| a.entries.iter())
            .flat_map(|e| e.uncertain_members().map(|m| m.id))
            .filter(|&id| partition.contains(id))
            .collect()
    }

    fn next_lower_candidate(
        &self,
        s: usize,
        p: usize,
    ) -> Option<(usize, IncompleteEquivalenceClass)> {
        let approx = &self.state.lower[s][p];
        let partition = &self.partitions[p];
        for id in Self::uncertain_in(&[approx], partition) {
            let holding: Vec<_> = approx
                .entries
                .iter()
                .filter(|e| e.is_uncertain_member(id))
                .collect();
            if let [only] = holding.as_slice() {
                if !self.is_blocked(id, s, only) {
                    return Some((id, (*only).clone()));
                }
            }
        }
        None
    }

    fn holding<'b>(
        &self,
        a: &'b Approximation,
        id: usize,
        s: usize,
    ) -> Vec<&'b IncompleteEquivalenceClass> {
        a.entries
            .iter()
            .filter(|e| e.is_uncertain_member(id) && !self.is_blocked(id, s, e))
            .collect()
    }

    fn next_upper_candidate(
        &self,
        s: usize,
        p: usize,
    ) -> Option<(usize, IncompleteEquivalenceClass)> {
        let upper = &self.state.upper[s][p];
        let lower = &self.state.lower[s][p];
        let partition = &self.partitions[p];
        for id in Self::uncertain_in(&[upper, lower], partition) {
            let mut candidates = self.holding(upper, id, s);
            if candidates.is_empty() {
                // several lower-approximation classes: left to this pass
                candidates = self.holding(lower, id, s);
                if candidates.len() < 2 {
                    continue;
                }
            }
            if let Some(chosen) = resolve_uncertain(&candidates, partition) {
                return Some((id, chosen.clone()));
            }
        }
        None
    }

    fn lower_pass(&mut self) -> Result<bool> {
        let mut progressed = false;
        for s in 0..self.state.families.len() {
            for p in 0..self.partitions.len() {
                while let Some((id, class)) = self.next_lower_candidate(s, p) {
                    progressed |= self.impute(id, s, &class, None, Phase::LowerPass)?;
                }
            }
        }
        Ok(progressed)
    }

    fn upper_pass(&mut self) -> Result<bool> {
        let mut progressed = false;
        for s in 0..self.state.families.len() {
            for p in 0..self.partitions.len() {
                while let Some((id, class)) = self.next_upper_candidate(s, p) {
                    let partition = &self.partitions[p];
                    progressed |= self.impute(id, s, &class, Some(partition), Phase::UpperPass)?;
                }
            }
        }
        Ok(progressed)
    }
}

/// Estimates missing values while building the approximations. Stops when
/// no value is unknown or a full pass makes no progress; values that remain
/// unknown are listed in [`ImputationOutcome::unresolved`].
pub fn run_imputation_pipeline(
    ds: &FuzzyDataset,
    partitions: &[ClassPartition],
    mfs: &MembershipFunctionSet,
) -> Result<ImputationOutcome> {
    let mut pipeline = Pipeline {
        data: ds.clone(),
        partitions,
        mfs,
        state: ApproximationState::build(ds, partitions),
        records: Vec::new(),
        failures: Vec::new(),
        blocked: HashSet::new(),
    };
    let mut passes = 0;
    while !pipeline.data.missing_cells().is_empty() {
        passes += 1;
        pipeline.blocked.clear();
        let lower = pipeline.lower_pass()?;
        let upper = pipeline.upper_pass()?;
        if !(lower || upper) {
            break;
        }
    }
    let unresolved = pipeline.data.missing_cells();
    Ok(ImputationOutcome {
        dataset: pipeline.data,
        records: pipeline.records,
        unresolved,
        failures: pipeline.failures,
        passes,
        state: pipeline.state,
    })
}
