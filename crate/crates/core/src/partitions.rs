//! Fuzzy incomplete equivalence classes.
//!
//! For a single attribute, an object with a positive degree in region `R` is
//! a certain member of the class `A = R`; an object whose value is unknown is
//! an uncertain member of every class of the attribute. Classes over an
//! attribute subset are intersections of single-attribute classes, with each
//! member's degree the minimum of its component degrees.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::dataset::{FuzzyCell, FuzzyDataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    Certain,
    Uncertain,
}

impl Tag {
    pub fn symbol(self) -> char {
        match self {
            Tag::Certain => 'c',
            Tag::Uncertain => 'u',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaggedMember {
    pub id: usize,
    pub tag: Tag,
    /// Membership of the object in the class. Uncertain members carry 1.0
    /// for every component they are unknown in.
    pub degree: f64,
}

/// One region per attribute, kept sorted by attribute index. Ordering is
/// lexicographic over `(attribute index, region index)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegionCombination(Vec<(usize, usize)>);

impl RegionCombination {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Self {
        pairs.sort_unstable();
        debug_assert!(
            pairs.windows(2).all(|w| w[0].0 != w[1].0),
            "attributes must be distinct"
        );
        Self(pairs)
    }

    pub fn single(attribute: usize, region: usize) -> Self {
        Self(vec![(attribute, region)])
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn attributes(&self) -> Vec<usize> {
        self.0.iter().map(|&(a, _)| a).collect()
    }

    pub fn region_of(&self, attribute: usize) -> Option<usize> {
        self.0
            .iter()
            .find(|&&(a, _)| a == attribute)
            .map(|&(_, r)| r)
    }

    fn union(&self, other: &Self) -> Self {
        let mut pairs = self.0.clone();
        pairs.extend_from_slice(&other.0);
        Self::new(pairs)
    }

    /// `(attribute name, region label)` pairs.
    pub fn named(&self, ds: &FuzzyDataset) -> Vec<(String, String)> {
        self.0
            .iter()
            .map(|&(a, r)| {
                let attr = &ds.attributes[a];
                (attr.name.clone(), attr.regions[r].clone())
            })
            .collect()
    }

    /// Machine form, e.g. `SP=N&DP=H`.
    pub fn display(&self, ds: &FuzzyDataset) -> String {
        self.named(ds)
            .iter()
            .map(|(a, r)| format!("{a}={r}"))
            .collect::<Vec<_>>()
            .join("&")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncompleteEquivalenceClass {
    pub combination: RegionCombination,
    members: Vec<TaggedMember>,
    mu: Option<f64>,
}

impl IncompleteEquivalenceClass {
    pub fn new(combination: RegionCombination, mut members: Vec<TaggedMember>) -> Self {
        members.sort_by_key(|m| m.id);
        let mu = members
            .iter()
            .filter(|m| m.tag == Tag::Certain)
            .map(|m| m.degree)
            .reduce(f64::min);
        Self {
            combination,
            members,
            mu,
        }
    }

    pub fn members(&self) -> &[TaggedMember] {
        &self.members
    }

    /// Minimum degree over certain members; `None` when the class has no
    /// certain part.
    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    pub fn has_certain(&self) -> bool {
        self.mu.is_some()
    }

    pub fn member(&self, id: usize) -> Option<&TaggedMember> {
        self.members
            .binary_search_by_key(&id, |m| m.id)
            .ok()
            .map(|i| &self.members[i])
    }

    pub fn certain_members(&self) -> impl Iterator<Item = &TaggedMember> + '_ {
        self.members.iter().filter(|m| m.tag == Tag::Certain)
    }

    pub fn uncertain_members(&self) -> impl Iterator<Item = &TaggedMember> + '_ {
        self.members.iter().filter(|m| m.tag == Tag::Uncertain)
    }

    /// The certain part `B_k^c` as a set of ids.
    pub fn certain_ids(&self) -> BTreeSet<usize> {
        self.certain_members().map(|m| m.id).collect()
    }

    pub fn is_uncertain_member(&self, id: usize) -> bool {
        self.member(id).is_some_and(|m| m.tag == Tag::Uncertain)
    }

    /// Debug line: `B={SP,DP} R={N,H} mu=0.200000 members=[3:c:0.400000,...]`.
    pub fn dump_line(&self, ds: &FuzzyDataset) -> String {
        let named = self.combination.named(ds);
        let attrs: Vec<&str> = named.iter().map(|(a, _)| a.as_str()).collect();
        let regions: Vec<&str> = named.iter().map(|(_, r)| r.as_str()).collect();
        let mut line = format!("B={{{}}} R={{{}}} mu=", attrs.join(","), regions.join(","));
        match self.mu {
            Some(mu) => write!(line, "{mu:.6}").unwrap(),
            None => line.push('-'),
        }
        line.push_str(" members=[");
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                line.push(',');
            }
            write!(line, "{}:{}:{:.6}", m.id, m.tag.symbol(), m.degree).unwrap();
        }
        line.push(']');
        line
    }
}

/// The classes `U/B` for one attribute subset, sorted by combination.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetClasses {
    pub subset: Vec<usize>,
    pub classes: Vec<IncompleteEquivalenceClass>,
}

/// Elementary sets of one attribute: one class per region that has any
/// member.
pub fn elementary_sets(ds: &FuzzyDataset, attribute: usize) -> Vec<IncompleteEquivalenceClass> {
    let attr = &ds.attributes[attribute];
    attr.regions
        .iter()
        .enumerate()
        .filter_map(|(k, region)| {
            let members: Vec<TaggedMember> = ds
                .objects
                .iter()
                .filter_map(|obj| match &obj.cells[attribute] {
                    FuzzyCell::Missing => Some(TaggedMember {
                        id: obj.id,
                        tag: Tag::Uncertain,
                        degree: 1.0,
                    }),
                    FuzzyCell::Known { fuzzy, .. } => {
                        let degree = fuzzy.degree(region);
                        (degree > 0.0).then_some(TaggedMember {
                            id: obj.id,
                            tag: Tag::Certain,
                            degree,
                        })
                    }
                })
                .collect();
            (!members.is_empty()).then(|| {
                IncompleteEquivalenceClass::new(RegionCombination::single(attribute, k), members)
            })
        })
        .collect()
}

fn intersect(
    a: &IncompleteEquivalenceClass,
    b: &IncompleteEquivalenceClass,
) -> Option<IncompleteEquivalenceClass> {
    let mut members = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.members.len() && j < b.members.len() {
        let (ma, mb) = (&a.members[i], &b.members[j]);
        match ma.id.cmp(&mb.id) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let tag = if ma.tag == Tag::Certain && mb.tag == Tag::Certain {
                    Tag::Certain
                } else {
                    Tag::Uncertain
                };
                members.push(TaggedMember {
                    id: ma.id,
                    tag,
                    degree: ma.degree.min(mb.degree),
                });
                i += 1;
                j += 1;
            }
        }
    }
    (!members.is_empty())
        .then(|| IncompleteEquivalenceClass::new(a.combination.union(&b.combination), members))
}

/// Combines the elementary sets of several attributes into the classes of
/// their union. Empty intersections are dropped.
pub fn combine(components: &[Vec<IncompleteEquivalenceClass>]) -> Vec<IncompleteEquivalenceClass> {
    let Some((first, rest)) = components.split_first() else {
        return Vec::new();
    };
    let mut acc = first.clone();
    for next in rest {
        acc = acc
            .iter()
            .flat_map(|a| next.iter().filter_map(move |b| intersect(a, b)))
            .collect();
    }
    acc.sort_by(|x, y| x.combination.cmp(&y.combination));
    acc
}

/// All `q`-element subsets of `0..m` in lexicographic order.
pub fn enumerate_subsets(m: usize, q: usize) -> Vec<Vec<usize>> {
    if q == 0 || q > m {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..q).collect();
    loop {
        out.push(current.clone());
        // rightmost index that can still move right
        let Some(i) = (0..q).rev().find(|&i| current[i] < m - q + i) else {
            break;
        };
        current[i] += 1;
        for k in i + 1..q {
            current[k] = current[k - 1] + 1;
        }
    }
    out
}

pub fn build_classes(ds: &FuzzyDataset, subset: &[usize]) -> SubsetClasses {
    let components: Vec<_> = subset.iter().map(|&a| elementary_sets(ds, a)).collect();
    SubsetClasses {
        subset: subset.to_vec(),
        classes: combine(&components),
    }
}

/// Every non-empty attribute subset, ordered by size and then
/// lexicographically.
pub fn all_subsets(m: usize) -> Vec<Vec<usize>> {
    (1..=m).flat_map(|q| enumerate_subsets(m, q)).collect()
}
