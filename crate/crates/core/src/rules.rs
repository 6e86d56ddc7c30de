//! Beta-approximations, rule derivation, pruning and classification.

use std::collections::BTreeSet;
use std::fmt;
use std::io::Read;

use crate::dataset::{ClassPartition, FuzzyDataset, FuzzyObject};
use crate::error::{Error, Result};
use crate::partitions::{all_subsets, build_classes, IncompleteEquivalenceClass, SubsetClasses};
use crate::TOLERANCE;

/// Admissible misclassification, `0 <= beta < 0.5`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Beta(f64);

impl Beta {
    pub fn new(value: f64) -> Result<Self> {
        if (0.0..0.5).contains(&value) {
            Ok(Self(value))
        } else {
            Err(Error::InvalidBeta(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleKind {
    Certain,
    Possible,
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Certain => "certain",
            RuleKind::Possible => "possible",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuzzyRule {
    pub kind: RuleKind,
    /// `(attribute, region)` pairs in dataset attribute order.
    pub conditions: Vec<(String, String)>,
    pub consequent: String,
    pub plausibility: f64,
    pub effectiveness: f64,
}

impl FuzzyRule {
    pub fn conditions_key(&self) -> String {
        self.conditions
            .iter()
            .map(|(a, r)| format!("{a}={r}"))
            .collect::<Vec<_>>()
            .join("&")
    }

    /// `IF SP = H AND DP = N THEN BP = H [certain] plausibility=1.00 effectiveness=0.16`
    pub fn to_text(&self, class_name: &str) -> String {
        let conds: Vec<String> = self
            .conditions
            .iter()
            .map(|(a, r)| format!("{a} = {r}"))
            .collect();
        format!(
            "IF {} THEN {} = {} [{}] plausibility={:.2} effectiveness={:.2}",
            conds.join(" AND "),
            class_name,
            self.consequent,
            self.kind,
            self.plausibility,
            self.effectiveness
        )
    }

    /// `kind,conditions,consequent,plausibility,effectiveness`
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.6}",
            self.kind,
            self.conditions_key(),
            self.consequent,
            self.plausibility,
            self.effectiveness
        )
    }
}

/// Relative degree of misclassification of `class` with respect to
/// `partition`, weighted by member degrees. Only certain members count.
pub fn misclassification(
    class: &IncompleteEquivalenceClass,
    partition: &ClassPartition,
) -> Result<f64> {
    let (inside, total) = class.certain_members().fold((0.0, 0.0), |(i, t), m| {
        if partition.contains(m.id) {
            (i + m.degree, t + m.degree)
        } else {
            (i, t + m.degree)
        }
    });
    if total > 0.0 {
        Ok(1.0 - inside / total)
    } else {
        Err(Error::EmptyClass(format!(
            "{:?}",
            class.combination.pairs()
        )))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaEntry<'a> {
    pub class: &'a IncompleteEquivalenceClass,
    pub misclassification: f64,
    pub mu: f64,
}

fn scored<'a>(
    family: &'a SubsetClasses,
    partition: &'a ClassPartition,
) -> impl Iterator<Item = BetaEntry<'a>> + 'a {
    family.classes.iter().filter_map(move |class| {
        let c = misclassification(class, partition).ok()?;
        Some(BetaEntry {
            class,
            misclassification: c,
            mu: class.mu()?,
        })
    })
}

/// Classes with misclassification at most beta.
pub fn beta_lower<'a>(
    family: &'a SubsetClasses,
    partition: &'a ClassPartition,
    beta: Beta,
) -> Vec<BetaEntry<'a>> {
    scored(family, partition)
        .filter(|e| e.misclassification <= beta.0 + TOLERANCE)
        .collect()
}

/// Classes with misclassification in `(beta, 1 - beta]` that share at least
/// one certain member with the decision class. The second condition only
/// matters at `beta = 0`, where it drops disjoint classes (`c = 1`).
pub fn beta_upper<'a>(
    family: &'a SubsetClasses,
    partition: &'a ClassPartition,
    beta: Beta,
) -> Vec<BetaEntry<'a>> {
    scored(family, partition)
        .filter(|e| {
            e.misclassification > beta.0 + TOLERANCE
                && e.misclassification <= 1.0 - beta.0 + TOLERANCE
                && e.class.certain_members().any(|m| partition.contains(m.id))
        })
        .collect()
}

/// One certain rule per beta-lower entry, one possible rule per beta-upper
/// entry.
pub fn derive_rules(
    ds: &FuzzyDataset,
    lower: &[BetaEntry<'_>],
    upper: &[BetaEntry<'_>],
    partition: &ClassPartition,
) -> Vec<FuzzyRule> {
    let rule = |kind, e: &BetaEntry<'_>| FuzzyRule {
        kind,
        conditions: e.class.combination.named(ds),
        consequent: partition.class_label.clone(),
        plausibility: 1.0 - e.misclassification,
        effectiveness: e.mu,
    };
    lower
        .iter()
        .map(|e| rule(RuleKind::Certain, e))
        .chain(upper.iter().map(|e| rule(RuleKind::Possible, e)))
        .collect()
}

/// Same consequent and a strictly larger condition set.
pub fn is_more_specific(r1: &FuzzyRule, r2: &FuzzyRule) -> bool {
    if r1.consequent != r2.consequent {
        return false;
    }
    let a: BTreeSet<_> = r1.conditions.iter().collect();
    let b: BTreeSet<_> = r2.conditions.iter().collect();
    a.len() > b.len() && b.is_subset(&a)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PruneOptions {
    /// Also remove possible rules that specialise a certain rule with
    /// greater-or-equal measures. Off by default: the reference rule lists
    /// keep such possible rules.
    pub possible_against_certain: bool,
}

/// Removes certain rules that specialise another certain rule with
/// effectiveness at least as high, and possible rules that specialise
/// another possible rule (optionally also a certain rule) with plausibility
/// and effectiveness at least as high. Order is preserved.
pub fn prune(rules: &[FuzzyRule]) -> Vec<FuzzyRule> {
    prune_with(rules, PruneOptions::default())
}

pub fn prune_with(rules: &[FuzzyRule], options: PruneOptions) -> Vec<FuzzyRule> {
    rules
        .iter()
        .filter(|r| !rules.iter().any(|other| removes(other, r, options)))
        .cloned()
        .collect()
}

/// Whether `general` causes `specific` to be pruned.
fn removes(general: &FuzzyRule, specific: &FuzzyRule, options: PruneOptions) -> bool {
    if !is_more_specific(specific, general) {
        return false;
    }
    let eff = specific.effectiveness <= general.effectiveness + TOLERANCE;
    let plaus = specific.plausibility <= general.plausibility + TOLERANCE;
    match (specific.kind, general.kind) {
        (RuleKind::Certain, RuleKind::Certain) => eff,
        (RuleKind::Possible, RuleKind::Possible) => eff && plaus,
        (RuleKind::Possible, RuleKind::Certain) => options.possible_against_certain && eff && plaus,
        (RuleKind::Certain, RuleKind::Possible) => false,
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleSet {
    pub certain: Vec<FuzzyRule>,
    pub possible: Vec<FuzzyRule>,
}

impl RuleSet {
    pub fn from_rules(rules: Vec<FuzzyRule>) -> Self {
        let (certain, possible) = rules.into_iter().partition(|r| r.kind == RuleKind::Certain);
        Self { certain, possible }
    }

    pub fn iter(&self) -> impl Iterator<Item = &FuzzyRule> + '_ {
        self.certain.iter().chain(&self.possible)
    }

    pub fn len(&self) -> usize {
        self.certain.len() + self.possible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_text(&self, class_name: &str) -> String {
        let mut out = String::new();
        for r in self.iter() {
            out.push_str(&r.to_text(class_name));
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,conditions,consequent,plausibility,effectiveness\n");
        for r in self.iter() {
            out.push_str(&r.to_csv_line());
            out.push('\n');
        }
        out
    }

    /// Reads the CSV form written by [`RuleSet::to_csv`].
    pub fn parse_csv<R: Read>(input: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut rules = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let line = i + 2;
            let err = |message: String| Error::RuleParse { line, message };
            let record = record.map_err(|e| err(e.to_string()))?;
            if record.len() != 5 {
                return Err(err(format!("expected 5 fields, got {}", record.len())));
            }
            let kind = match &record[0] {
                "certain" => RuleKind::Certain,
                "possible" => RuleKind::Possible,
                other => return Err(err(format!("unknown rule kind `{other}`"))),
            };
            let conditions = record[1]
                .split('&')
                .map(|c| {
                    let (a, r) = c
                        .split_once('=')
                        .ok_or_else(|| err(format!("condition `{c}` is not attribute=region")))?;
                    if a.is_empty() || r.is_empty() {
                        return Err(err(format!("condition `{c}` is not attribute=region")));
                    }
                    Ok((a.to_string(), r.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            let number = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| (0.0..=1.0).contains(v))
                    .ok_or_else(|| err(format!("`{s}` is not a number in [0, 1]")))
            };
            rules.push(FuzzyRule {
                kind,
                conditions,
                consequent: record[2].to_string(),
                plausibility: number(&record[3])?,
                effectiveness: number(&record[4])?,
            });
        }
        Ok(Self::from_rules(rules))
    }
}

/// Every beta-certain and beta-possible rule before pruning, ordered by
/// decision class, attribute subset and region combination.
pub fn derive_all_rules(
    ds: &FuzzyDataset,
    partitions: &[ClassPartition],
    beta: Beta,
) -> Vec<FuzzyRule> {
    let families: Vec<SubsetClasses> = all_subsets(ds.attributes.len())
        .iter()
        .map(|b| build_classes(ds, b))
        .collect();
    let mut rules = Vec::new();
    for partition in partitions {
        for family in &families {
            let lower = beta_lower(family, partition, beta);
            let upper = beta_upper(family, partition, beta);
            rules.extend(derive_rules(ds, &lower, &upper, partition));
        }
    }
    rules
}

/// Derives and prunes the rule set of an (imputed) dataset.
pub fn mine_rules(ds: &FuzzyDataset, partitions: &[ClassPartition], beta: Beta) -> RuleSet {
    RuleSet::from_rules(prune(&derive_all_rules(ds, partitions, beta)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub class_label: String,
    pub score: f64,
    pub rule: FuzzyRule,
}

fn match_degree(object: &FuzzyObject, attributes: &[String], rule: &FuzzyRule) -> f64 {
    rule.conditions
        .iter()
        .map(|(a, r)| {
            attributes
                .iter()
                .position(|n| n == a)
                .map_or(0.0, |j| object.cells[j].degree(r))
        })
        .fold(1.0, f64::min)
}

/// Scores each rule as `match degree x plausibility`, where the match degree
/// is the minimum of the object's degrees in the rule's condition regions.
/// Certain rules are consulted first; possible rules only when no certain
/// rule matches. Ties prefer higher effectiveness, then earlier rules.
/// Returns `None` when no rule matches at all.
pub fn classify(
    object: &FuzzyObject,
    attributes: &[String],
    rules: &RuleSet,
) -> Option<Prediction> {
    [&rules.certain, &rules.possible]
        .into_iter()
        .find_map(|group| {
            let mut best: Option<(&FuzzyRule, f64)> = None;
            for rule in group.iter() {
                let m = match_degree(object, attributes, rule);
                if m <= 0.0 {
                    continue;
                }
                let score = m * rule.plausibility;
                let better = match best {
                    None => true,
                    Some((b, bs)) => {
                        score > bs + TOLERANCE
                            || (score >= bs - TOLERANCE
                                && rule.effectiveness > b.effectiveness + TOLERANCE)
                    }
                };
                if better {
                    best = Some((rule, score));
                }
            }
            best.map(|(rule, score)| Prediction {
                class_label: rule.consequent.clone(),
                score,
                rule: rule.clone(),
            })
        })
}
