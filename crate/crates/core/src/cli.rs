//! Command-line front end: `mine`, `classify` and `validate`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::approximation::run_imputation_pipeline;
use crate::dataset::{
    fuzzify_dataset, load_dataset_path, load_prefuzzified_path, FuzzyDataset, LoadOptions,
};
use crate::error::{Error, Result};
use crate::membership::{validate_mf_set, MembershipFunctionSet};
use crate::partitions::{all_subsets, build_classes};
use crate::rules::{classify, mine_rules, Beta, RuleSet};

#[derive(Debug, Parser)]
#[command(
    name = "fuzzy-vprs",
    version,
    about = "Mine fuzzy rules from incomplete quantitative data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Impute missing values and mine beta-certain and beta-possible rules.
    Mine(MineArgs),
    /// Apply a rules CSV to a dataset.
    Classify(ClassifyArgs),
    /// Check a membership config and/or dataset.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Dataset CSV.
    #[arg(long)]
    pub data: PathBuf,
    /// Membership function config.
    #[arg(long)]
    pub mf: Option<PathBuf>,
    /// Cells hold fuzzy sets (`N:0.4+H:0.6`, optional `@value`) instead of numbers.
    #[arg(long)]
    pub prefuzzified: bool,
    /// Class column name; defaults to the last column.
    #[arg(long)]
    pub class_column: Option<String>,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Admissible misclassification, in [0, 0.5).
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub beta: f64,
    /// Human-readable rules; stdout when omitted.
    #[arg(long)]
    pub rules_out: Option<PathBuf>,
    #[arg(long)]
    pub rules_csv_out: Option<PathBuf>,
    /// Completed dataset.
    #[arg(long)]
    pub imputed_out: Option<PathBuf>,
    /// One line per estimate: `obj,attribute,value,phase,combination`.
    #[arg(long)]
    pub imputation_log: Option<PathBuf>,
    /// Equivalence classes of the completed dataset, one per line.
    #[arg(long)]
    pub dump_classes: Option<PathBuf>,
    /// Fail with exit code 4 if any value stays unknown.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Rules CSV written by `mine --rules-csv-out`.
    #[arg(long)]
    pub rules: PathBuf,
    /// Predictions CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub mf: Option<PathBuf>,
    #[arg(long)]
    pub prefuzzified: bool,
    #[arg(long)]
    pub class_column: Option<String>,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. }
        | Error::Config { .. }
        | Error::Usage(_)
        | Error::InvalidBeta(_)
        | Error::InvalidMembershipFunction { .. }
        | Error::MissingMembership(_) => 1,
        Error::Parse { .. }
        | Error::Schema(_)
        | Error::MissingClassLabel { .. }
        | Error::InvalidFuzzyValue(_)
        | Error::RuleParse { .. } => 2,
        Error::AllZeroMembership { .. }
        | Error::NoCertainDonor { .. }
        | Error::DonorValueUnknown { .. }
        | Error::EmptyClass(_) => 3,
        Error::UnresolvedUncertainty(_) => 4,
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "error: {}", first.trim_start_matches("error: "));
            return 1;
        }
    };
    let result = match cli.command {
        Command::Mine(a) => cmd_mine(&a, stdout, stderr),
        Command::Classify(a) => cmd_classify(&a, stdout),
        Command::Validate(a) => cmd_validate(&a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let line = e.to_string().replace(['\n', '\r'], " ");
            let _ = writeln!(stderr, "error: {line}");
            exit_code(&e)
        }
    }
}

fn load_mfs(path: Option<&Path>) -> Result<Option<MembershipFunctionSet>> {
    path.map(MembershipFunctionSet::from_path).transpose()
}

fn load_input(input: &InputArgs, mfs: Option<&MembershipFunctionSet>) -> Result<FuzzyDataset> {
    let options = LoadOptions {
        class_column: input.class_column.clone(),
    };
    if input.prefuzzified {
        load_prefuzzified_path(&input.data, &options, mfs)
    } else {
        let mfs = mfs.ok_or_else(|| Error::Usage("--mf is required for raw datasets".into()))?;
        let raw = load_dataset_path(&input.data, &options)?;
        fuzzify_dataset(&raw, mfs)
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

fn emit(path: Option<&Path>, stdout: &mut dyn Write, contents: &[u8]) -> Result<()> {
    match path {
        Some(p) => write_file(p, contents),
        None => stdout
            .write_all(contents)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn cmd_mine(args: &MineArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let beta = Beta::new(args.beta)?;
    let mfs = load_mfs(args.input.mf.as_deref())?;
    let ds = load_input(&args.input, mfs.as_ref())?;
    if mfs.is_none() && !ds.missing_cells().is_empty() {
        return Err(Error::Usage(
            "--mf is required to impute missing values in a pre-fuzzified dataset".into(),
        ));
    }
    let partitions = ds.partitions();
    let mfs = mfs.unwrap_or_default();
    let outcome = run_imputation_pipeline(&ds, &partitions, &mfs)?;
    if let Some(err) = outcome.unresolved_error() {
        if args.strict {
            return Err(err);
        }
        let _ = writeln!(stderr, "warning: {err}");
    }

    if let Some(path) = &args.imputation_log {
        let mut log = String::new();
        for record in &outcome.records {
            log.push_str(&record.log_line(&outcome.dataset));
            log.push('\n');
        }
        write_file(path, log.as_bytes())?;
    }
    if let Some(path) = &args.imputed_out {
        let mut buf = Vec::new();
        outcome.dataset.write_csv(&mut buf)?;
        write_file(path, &buf)?;
    }
    if let Some(path) = &args.dump_classes {
        let mut dump = String::new();
        for subset in all_subsets(outcome.dataset.attributes.len()) {
            for class in build_classes(&outcome.dataset, &subset).classes {
                dump.push_str(&class.dump_line(&outcome.dataset));
                dump.push('\n');
            }
        }
        write_file(path, dump.as_bytes())?;
    }

    let rules = mine_rules(&outcome.dataset, &partitions, beta);
    if let Some(path) = &args.rules_csv_out {
        write_file(path, rules.to_csv().as_bytes())?;
    }
    emit(
        args.rules_out.as_deref(),
        stdout,
        rules.to_text(&outcome.dataset.class_name).as_bytes(),
    )
}

pub fn cmd_classify(args: &ClassifyArgs, stdout: &mut dyn Write) -> Result<()> {
    let file =
        fs::File::open(&args.rules).map_err(|e| Error::io(args.rules.display().to_string(), e))?;
    let rules = RuleSet::parse_csv(file)?;
    if rules.is_empty() {
        return Err(Error::Usage(format!(
            "rules file {} contains no rules",
            args.rules.display()
        )));
    }
    let mfs = load_mfs(args.input.mf.as_deref())?;
    let ds = load_input(&args.input, mfs.as_ref())?;
    let names = ds.attribute_names();
    for rule in rules.iter() {
        if let Some((attribute, _)) = rule.conditions.iter().find(|(a, _)| !names.contains(a)) {
            return Err(Error::Schema(format!(
                "rule attribute {attribute} is not in the dataset"
            )));
        }
    }
    let mut out = String::from("object_id,predicted_class,score\n");
    for object in &ds.objects {
        match classify(object, &names, &rules) {
            Some(p) => out.push_str(&format!("{},{},{:.6}\n", object.id, p.class_label, p.score)),
            None => out.push_str(&format!("{},?,{:.6}\n", object.id, 0.0)),
        }
    }
    emit(args.out.as_deref(), stdout, out.as_bytes())
}

pub fn cmd_validate(args: &ValidateArgs, stdout: &mut dyn Write) -> Result<()> {
    if args.data.is_none() && args.mf.is_none() {
        return Err(Error::Usage("validate needs --data, --mf or both".into()));
    }
    let mfs = load_mfs(args.mf.as_deref())?;
    let mut report = Vec::new();
    if let Some(data) = &args.data {
        let input = InputArgs {
            data: data.clone(),
            mf: args.mf.clone(),
            prefuzzified: args.prefuzzified,
            class_column: args.class_column.clone(),
        };
        if let Some(m) = &mfs {
            let attributes = if args.prefuzzified {
                load_prefuzzified_path(
                    data,
                    &LoadOptions {
                        class_column: input.class_column.clone(),
                    },
                    None,
                )?
                .attribute_names()
            } else {
                load_dataset_path(
                    data,
                    &LoadOptions {
                        class_column: input.class_column.clone(),
                    },
                )?
                .attributes
            };
            let issues = validate_mf_set(m, &attributes);
            if !issues.is_empty() {
                let text: Vec<String> = issues.iter().map(ToString::to_string).collect();
                return Err(Error::Usage(format!(
                    "membership config: {}",
                    text.join("; ")
                )));
            }
        }
        let ds = load_input(&input, mfs.as_ref())?;
        let missing = ds.missing_cells().len();
        if missing > 0 && mfs.is_none() {
            return Err(Error::Usage(
                "--mf is required to impute missing values in a pre-fuzzified dataset".into(),
            ));
        }
        report.push(format!(
            "dataset: {} objects, {} attributes, {} classes, {} missing values",
            ds.objects.len(),
            ds.attributes.len(),
            ds.partitions().len(),
            missing
        ));
    } else if let Some(m) = &mfs {
        let issues = validate_mf_set(m, &[]);
        if !issues.is_empty() {
            let text: Vec<String> = issues.iter().map(ToString::to_string).collect();
            return Err(Error::Usage(format!(
                "membership config: {}",
                text.join("; ")
            )));
        }
    }
    if let Some(m) = &mfs {
        report.push(format!(
            "membership config: {} attributes",
            m.attributes().count()
        ));
    }
    let mut text = String::from("ok\n");
    for line in report {
        text.push_str(&line);
        text.push('\n');
    }
    emit(None, stdout, text.as_bytes())
}
