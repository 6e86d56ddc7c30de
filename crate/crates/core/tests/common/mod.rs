//! Shared generators, brute-force oracles and property checks.
#![allow(dead_code)]

use std::collections::BTreeSet;

use fuzzy_vprs::approximation::{run_imputation_pipeline, ApproximationState};
use fuzzy_vprs::dataset::{
    fuzzify_dataset, load_dataset, load_prefuzzified, FuzzyDataset, LoadOptions,
};
use fuzzy_vprs::membership::MembershipFunctionSet;
use fuzzy_vprs::partitions::{all_subsets, build_classes};
use fuzzy_vprs::rules::{
    beta_lower, beta_upper, derive_all_rules, misclassification, prune, Beta, FuzzyRule, RuleKind,
};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const EPS: f64 = 1e-9;
pub const BETAS: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.4];

pub fn fixture(name: &str) -> String {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn fixture_path(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

/// A complete fuzzy table: `degrees[object][attribute][region]`.
#[derive(Debug, Clone)]
pub struct FuzzyTable {
    pub regions: Vec<usize>,
    pub degrees: Vec<Vec<Vec<f64>>>,
    pub labels: Vec<usize>,
}

impl FuzzyTable {
    pub fn random(seed: u64) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let n_obj = rng.gen_range(1..=6);
        let n_attr = rng.gen_range(1..=3);
        let n_class = rng.gen_range(1..=3);
        let regions: Vec<usize> = (0..n_attr).map(|_| rng.gen_range(1..=3)).collect();
        let degrees = (0..n_obj)
            .map(|_| {
                regions
                    .iter()
                    .map(|&k| {
                        let mut cell: Vec<f64> = (0..k)
                            .map(|_| {
                                if rng.gen_bool(0.5) {
                                    0.0
                                } else {
                                    rng.gen_range(1..=10) as f64 / 10.0
                                }
                            })
                            .collect();
                        if cell.iter().all(|&d| d == 0.0) {
                            cell[rng.gen_range(0..k)] = rng.gen_range(1..=10) as f64 / 10.0;
                        }
                        cell
                    })
                    .collect()
            })
            .collect();
        let labels = (0..n_obj).map(|_| rng.gen_range(0..n_class)).collect();
        Self {
            regions,
            degrees,
            labels,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out: Vec<String> = (0..self.regions.len()).map(|j| format!("A{j}")).collect();
        out.push("C".into());
        let mut text = out.join(",") + "\n";
        for (obj, label) in self.degrees.iter().zip(&self.labels) {
            let mut row: Vec<String> = obj
                .iter()
                .map(|cell| {
                    cell.iter()
                        .enumerate()
                        .filter(|(_, &d)| d > 0.0)
                        .map(|(r, d)| format!("R{r}:{d}"))
                        .collect::<Vec<_>>()
                        .join("+")
                })
                .collect();
            row.push(format!("K{label}"));
            text.push_str(&row.join(","));
            text.push('\n');
        }
        text
    }

    pub fn dataset(&self) -> FuzzyDataset {
        load_prefuzzified(self.to_csv().as_bytes(), &LoadOptions::default(), None)
            .expect("generated table loads")
    }

    fn class_labels(&self) -> BTreeSet<usize> {
        self.labels.iter().copied().collect()
    }
}

/// `kind|class|combination` with misclassification and mu.
pub type Entry = (String, f64, f64);

fn cartesian(ranges: &[usize]) -> Vec<Vec<usize>> {
    ranges.iter().fold(vec![vec![]], |acc, &k| {
        acc.into_iter()
            .flat_map(|prefix| {
                (0..k).map(move |r| {
                    let mut next = prefix.clone();
                    next.push(r);
                    next
                })
            })
            .collect()
    })
}

fn subsets(m: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << m))
        .map(|mask| (0..m).filter(|j| mask & (1 << j) != 0).collect())
        .collect()
}

/// Enumerates every region combination of every attribute subset and
/// classifies it directly from the degree matrix.
pub fn oracle_entries(table: &FuzzyTable, beta: f64) -> Vec<Entry> {
    let mut out = Vec::new();
    for subset in subsets(table.regions.len()) {
        let ranges: Vec<usize> = subset.iter().map(|&j| table.regions[j]).collect();
        for combo in cartesian(&ranges) {
            let members: Vec<(usize, f64)> = table
                .degrees
                .iter()
                .enumerate()
                .filter_map(|(i, obj)| {
                    let d = subset
                        .iter()
                        .zip(&combo)
                        .map(|(&j, &r)| obj[j][r])
                        .fold(1.0, f64::min);
                    (d > 0.0).then_some((i, d))
                })
                .collect();
            if members.is_empty() {
                continue;
            }
            let mu = members.iter().map(|m| m.1).fold(1.0, f64::min);
            let total: f64 = members.iter().map(|m| m.1).sum();
            let name = subset
                .iter()
                .zip(&combo)
                .map(|(j, r)| format!("A{j}=R{r}"))
                .collect::<Vec<_>>()
                .join("&");
            for label in table.class_labels() {
                let inside: f64 = members
                    .iter()
                    .filter(|m| table.labels[m.0] == label)
                    .map(|m| m.1)
                    .sum();
                let c = 1.0 - inside / total;
                let kind = if c <= beta + EPS {
                    "lower"
                } else if c <= 1.0 - beta + EPS && inside > 0.0 {
                    "upper"
                } else {
                    continue;
                };
                out.push((format!("{kind}|K{label}|{name}"), c, mu));
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

pub fn library_entries(ds: &FuzzyDataset, beta: f64) -> Vec<Entry> {
    let beta = Beta::new(beta).expect("valid beta");
    let mut out = Vec::new();
    for subset in all_subsets(ds.attributes.len()) {
        let family = build_classes(ds, &subset);
        for partition in ds.partitions() {
            for (kind, entries) in [
                ("lower", beta_lower(&family, &partition, beta)),
                ("upper", beta_upper(&family, &partition, beta)),
            ] {
                for e in entries {
                    out.push((
                        format!(
                            "{kind}|{}|{}",
                            partition.class_label,
                            e.class.combination.display(ds)
                        ),
                        e.misclassification,
                        e.mu,
                    ));
                }
            }
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

pub fn check_oracle(table: &FuzzyTable, beta: f64) -> Result<(), String> {
    let expected = oracle_entries(table, beta);
    let actual = library_entries(&table.dataset(), beta);
    let keys = |v: &[Entry]| v.iter().map(|e| e.0.clone()).collect::<Vec<_>>();
    if keys(&expected) != keys(&actual) {
        return Err(format!(
            "beta {beta}: oracle {:?} library {:?}",
            keys(&expected),
            keys(&actual)
        ));
    }
    for (e, a) in expected.iter().zip(&actual) {
        if (e.1 - a.1).abs() > EPS || (e.2 - a.2).abs() > EPS {
            return Err(format!(
                "{}: oracle c={} mu={}, library c={} mu={}",
                e.0, e.1, e.2, a.1, a.2
            ));
        }
    }
    Ok(())
}

/// On complete data every class's plausibilities over all decision classes
/// sum to one.
pub fn check_plausibility_sum(table: &FuzzyTable) -> Result<(), String> {
    let ds = table.dataset();
    let partitions = ds.partitions();
    for subset in all_subsets(ds.attributes.len()) {
        for class in build_classes(&ds, &subset).classes {
            let sum: f64 = partitions
                .iter()
                .map(|p| 1.0 - misclassification(&class, p).expect("complete data"))
                .sum();
            if (sum - 1.0).abs() > EPS {
                return Err(format!("{}: sum {sum}", class.combination.display(&ds)));
            }
        }
    }
    Ok(())
}

pub fn check_disjoint(table: &FuzzyTable, beta: f64) -> Result<(), String> {
    let ds = table.dataset();
    let beta = Beta::new(beta).map_err(|e| e.to_string())?;
    for subset in all_subsets(ds.attributes.len()) {
        let family = build_classes(&ds, &subset);
        for p in ds.partitions() {
            let lower: BTreeSet<_> = beta_lower(&family, &p, beta)
                .iter()
                .map(|e| e.class.combination.clone())
                .collect();
            let upper: Vec<_> = beta_upper(&family, &p, beta)
                .iter()
                .map(|e| e.class.combination.clone())
                .collect();
            let upper_set: BTreeSet<_> = upper.iter().cloned().collect();
            if upper_set.len() != upper.len() || !lower.is_disjoint(&upper_set) {
                return Err(format!(
                    "overlap for class {} subset {subset:?}",
                    p.class_label
                ));
            }
        }
    }
    Ok(())
}

pub fn check_monotone(table: &FuzzyTable) -> Result<(), String> {
    let ds = table.dataset();
    for subset in all_subsets(ds.attributes.len()) {
        let family = build_classes(&ds, &subset);
        for p in ds.partitions() {
            let lowers: Vec<BTreeSet<_>> = BETAS
                .iter()
                .map(|&b| {
                    beta_lower(&family, &p, Beta::new(b).unwrap())
                        .iter()
                        .map(|e| e.class.combination.clone())
                        .collect()
                })
                .collect();
            for w in lowers.windows(2) {
                if !w[0].is_subset(&w[1]) {
                    return Err(format!("beta-lower shrank for class {}", p.class_label));
                }
            }
        }
    }
    Ok(())
}

/// At beta = 0 certain rules come exactly from classes whose members all
/// belong to the decision class, possible rules from classes that meet it
/// without being contained.
pub fn check_beta_zero(table: &FuzzyTable) -> Result<(), String> {
    let ds = table.dataset();
    let rules = derive_all_rules(&ds, &ds.partitions(), Beta::new(0.0).unwrap());
    let actual: BTreeSet<String> = rules
        .iter()
        .map(|r| format!("{}|{}|{}", r.kind, r.consequent, r.conditions_key()))
        .collect();
    let mut expected = BTreeSet::new();
    for subset in subsets(table.regions.len()) {
        let ranges: Vec<usize> = subset.iter().map(|&j| table.regions[j]).collect();
        for combo in cartesian(&ranges) {
            let members: BTreeSet<usize> = (0..table.degrees.len())
                .filter(|&i| {
                    subset
                        .iter()
                        .zip(&combo)
                        .all(|(&j, &r)| table.degrees[i][j][r] > 0.0)
                })
                .collect();
            if members.is_empty() {
                continue;
            }
            let name = subset
                .iter()
                .zip(&combo)
                .map(|(j, r)| format!("A{j}=R{r}"))
                .collect::<Vec<_>>()
                .join("&");
            for label in table.class_labels() {
                let inside = members
                    .iter()
                    .filter(|&&i| table.labels[i] == label)
                    .count();
                if inside == members.len() {
                    expected.insert(format!("certain|K{label}|{name}"));
                } else if inside > 0 {
                    expected.insert(format!("possible|K{label}|{name}"));
                }
            }
        }
    }
    if actual == expected {
        Ok(())
    } else {
        Err(format!("expected {expected:?}, got {actual:?}"))
    }
}

/// Raw quantitative table with missing cells plus a covering membership
/// config (every value in [0, 100] has a positive degree somewhere).
#[derive(Debug, Clone)]
pub struct RawTable {
    pub regions: Vec<usize>,
    pub values: Vec<Vec<Option<u32>>>,
    pub labels: Vec<usize>,
}

impl RawTable {
    pub fn random(seed: u64) -> Self {
        let mut rng = StdRng::seed_from_u64(seed);
        let n_obj = rng.gen_range(2..=6);
        let n_attr = rng.gen_range(1..=3);
        let n_class = rng.gen_range(1..=3);
        let regions = (0..n_attr).map(|_| rng.gen_range(1..=3)).collect();
        let values = (0..n_obj)
            .map(|_| {
                (0..n_attr)
                    .map(|_| (!rng.gen_bool(0.25)).then(|| rng.gen_range(0..=100)))
                    .collect()
            })
            .collect();
        let labels = (0..n_obj).map(|_| rng.gen_range(0..n_class)).collect();
        Self {
            regions,
            values,
            labels,
        }
    }

    pub fn to_csv(&self) -> String {
        let mut header: Vec<String> = (0..self.regions.len()).map(|j| format!("A{j}")).collect();
        header.push("C".into());
        let mut text = header.join(",") + "\n";
        for (row, label) in self.values.iter().zip(&self.labels) {
            let mut cells: Vec<String> = row
                .iter()
                .map(|v| v.map_or("*".to_string(), |v| v.to_string()))
                .collect();
            cells.push(format!("K{label}"));
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        text
    }

    pub fn mf_text(&self) -> String {
        let mut text = String::new();
        for (j, &k) in self.regions.iter().enumerate() {
            let lines: &[&str] = match k {
                1 => &["R0,0:1;100:1"],
                2 => &["R0,0:1;100:0", "R1,0:0;100:1"],
                _ => &["R0,0:1;50:0", "R1,0:0;50:1;100:0", "R2,50:0;100:1"],
            };
            for line in lines {
                text.push_str(&format!("A{j},{line}\n"));
            }
        }
        text
    }

    pub fn load(&self) -> (FuzzyDataset, MembershipFunctionSet) {
        let mfs = MembershipFunctionSet::parse(&self.mf_text()).expect("generated config parses");
        let raw = load_dataset(self.to_csv().as_bytes(), &LoadOptions::default()).expect("loads");
        (fuzzify_dataset(&raw, &mfs).expect("covering config"), mfs)
    }

    fn hull(&self, attribute: usize) -> Option<(f64, f64)> {
        let known: Vec<f64> = self
            .values
            .iter()
            .filter_map(|row| row[attribute].map(f64::from))
            .collect();
        (!known.is_empty()).then(|| {
            known
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                })
        })
    }
}

/// Every estimate lies inside the hull of its donors and of the attribute's
/// known values; the pass count is bounded; unresolved cells are reported.
pub fn check_imputation_hull(table: &RawTable) -> Result<(), String> {
    let (ds, mfs) = table.load();
    let missing = ds.missing_cells().len();
    let outcome =
        run_imputation_pipeline(&ds, &ds.partitions(), &mfs).map_err(|e| e.to_string())?;
    for r in &outcome.records {
        let (lo, hi) = table
            .hull(r.attribute)
            .ok_or_else(|| format!("estimate for attribute with no known value: {r:?}"))?;
        if r.value < lo - EPS || r.value > hi + EPS {
            return Err(format!("{r:?} outside value hull [{lo}, {hi}]"));
        }
        if r.value < r.donor_range.0 - EPS || r.value > r.donor_range.1 + EPS {
            return Err(format!("{r:?} outside donor range"));
        }
        let cell = &outcome.dataset.object(r.object).unwrap().cells[r.attribute];
        if cell.value() != Some(r.value) {
            return Err(format!("{r:?} not applied"));
        }
    }
    if outcome.passes > missing + 1 {
        return Err(format!(
            "{} passes for {missing} missing values",
            outcome.passes
        ));
    }
    if outcome.records.len() + outcome.unresolved.len() != missing {
        return Err("estimates and unresolved cells do not account for every missing value".into());
    }
    if outcome.unresolved != outcome.dataset.missing_cells() {
        return Err("unresolved list disagrees with the dataset".into());
    }
    Ok(())
}

/// The final approximation state equals one computed from scratch.
pub fn check_backtracking(table: &RawTable) -> Result<(), String> {
    let (ds, mfs) = table.load();
    let partitions = ds.partitions();
    let outcome = run_imputation_pipeline(&ds, &partitions, &mfs).map_err(|e| e.to_string())?;
    let fresh = ApproximationState::build(&outcome.dataset, &partitions);
    if outcome.state != fresh {
        return Err("incrementally maintained state differs from full recompute".into());
    }
    if !fresh.lower_upper_disjoint() {
        return Err("lower and upper approximations overlap".into());
    }
    Ok(())
}

pub fn random_rules(seed: u64) -> Vec<FuzzyRule> {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = rng.gen_range(1..=12);
    (0..n)
        .map(|_| {
            let mask = rng.gen_range(1..8u32);
            let conditions = (0..3)
                .filter(|j| mask & (1 << j) != 0)
                .map(|j| (format!("A{j}"), format!("R{}", rng.gen_range(0..2))))
                .collect();
            FuzzyRule {
                kind: if rng.gen_bool(0.5) {
                    RuleKind::Certain
                } else {
                    RuleKind::Possible
                },
                conditions,
                consequent: format!("K{}", rng.gen_range(0..2)),
                plausibility: rng.gen_range(0..=10) as f64 / 10.0,
                effectiveness: rng.gen_range(0..=10) as f64 / 10.0,
            }
        })
        .collect()
}

fn oracle_dominates(g: &FuzzyRule, s: &FuzzyRule) -> bool {
    let gc: BTreeSet<_> = g.conditions.iter().collect();
    let sc: BTreeSet<_> = s.conditions.iter().collect();
    let more_specific = g.consequent == s.consequent && gc.len() < sc.len() && gc.is_subset(&sc);
    more_specific
        && g.kind == s.kind
        && s.effectiveness <= g.effectiveness
        && (s.kind == RuleKind::Certain || s.plausibility <= g.plausibility)
}

/// Pruning matches a direct reading of the removal conditions and is
/// idempotent.
pub fn check_prune(rules: &[FuzzyRule]) -> Result<(), String> {
    let pruned = prune(rules);
    let expected: Vec<FuzzyRule> = rules
        .iter()
        .filter(|s| !rules.iter().any(|g| oracle_dominates(g, s)))
        .cloned()
        .collect();
    if pruned != expected {
        return Err(format!("pruned {pruned:?}, expected {expected:?}"));
    }
    if prune(&pruned) != pruned {
        return Err("pruning is not a fixpoint".into());
    }
    Ok(())
}
