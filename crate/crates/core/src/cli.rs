//! Command-line front end. Each subcommand reads flags merged over an
//! optional JSON config file (flags win), writes its artifacts plus a
//! `manifest.json` into `--out`, and maps errors to distinct exit codes.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::features::{build_dataset, CombinationMethod, DatasetOptions, Task, DEFAULT_HOP_LIMIT};
use crate::graph::{NetworkKind, Snapshot};
use crate::importance::{compare_rankings, ranks_table, weights_table, DEFAULT_TOP_K};
use crate::ingest::{
    build_snapshots, parse_attributes, parse_events, parse_nominations, read_snapshot, read_snapshots,
    snapshot_file_name, write_snapshots, AttributeSchema, BuildOptions, SchemaFile,
};
use crate::ml::{ModelKind, Objective, DEFAULT_NEGATIVE_RATIO};
use crate::pipeline::{
    experiment_data, fit_experiment, ExperimentConfig, FittedExperiment, RunManifest, MANIFEST_FILE,
};
use crate::preference::{average_preference_matrix, compute_preferences, trend_marks, DEFAULT_TREND_EPSILON};
use crate::survival::{best_threshold, parse_grid, report_csv, sweep_threshold, DEFAULT_STRONG_THRESHOLD};
use crate::synthgen::{generate, GenConfig, Preset};

pub const EXIT_USAGE: i32 = 2;

/// Exit status for a library error category.
pub fn exit_code(error: &Error) -> i32 {
    match error.kind() {
        "io" => 3,
        "parse" => 4,
        "schema" => 5,
        "lookup" => 6,
        "data" => 7,
        "model" => 8,
        _ => 9,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "prefnet",
    version,
    about = "Preference-based link formation and dissolution analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic network with planted homophily.
    Synth(SynthArgs),
    /// Assemble per-semester snapshots from raw CSV files.
    Ingest(IngestArgs),
    /// Per-node attribute-value preferences for one snapshot.
    Prefs(PrefsArgs),
    /// Average preference matrices per semester with trend marks.
    Matrix(MatrixArgs),
    /// Labeled train and test datasets for one task.
    Dataset(DatasetArgs),
    /// Fit classifiers and select one on validation.
    Train(ExperimentArgs),
    /// Score fitted (or freshly trained) classifiers on the test split.
    Evaluate(EvaluateArgs),
    /// Attribute importance tables across tasks and networks.
    Importance(ImportanceArgs),
    /// Survival of strong and weak ties.
    Survival(SurvivalArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Ingest(_) => "ingest",
            Command::Prefs(_) => "prefs",
            Command::Matrix(_) => "matrix",
            Command::Dataset(_) => "dataset",
            Command::Train(_) => "train",
            Command::Evaluate(_) => "evaluate",
            Command::Importance(_) => "importance",
            Command::Survival(_) => "survival",
        }
    }
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthArgs {
    /// Generator configuration JSON, laid over the preset.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Starting configuration: default, formation, importance, dissolution or survival.
    #[arg(long)]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub semesters: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Directory holding schema.json, events.csv, nominations.csv and attributes.csv.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long)]
    pub nominations: Option<PathBuf>,
    #[arg(long)]
    pub attributes: Option<PathBuf>,
    /// Cognitive edges need nominations in both directions.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub mutual: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct PrefsArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// One snapshot JSON file.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub network: Option<NetworkKind>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct MatrixArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Directory of snapshot_<k>.json files.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub network: Option<NetworkKind>,
    #[arg(long)]
    pub attribute: Option<String>,
    /// Smallest change marked as an increase or decrease.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub task: Option<Task>,
    #[arg(long)]
    pub method: Option<CombinationMethod>,
    #[arg(long)]
    pub network: Option<NetworkKind>,
    /// Semester whose outcomes the test split predicts.
    #[arg(long)]
    pub semester: Option<u32>,
    /// Largest hop distance of a formation candidate.
    #[arg(long)]
    pub hops: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub task: Option<Task>,
    #[arg(long)]
    pub method: Option<CombinationMethod>,
    #[arg(long)]
    pub network: Option<NetworkKind>,
    #[arg(long)]
    pub semester: Option<u32>,
    /// regression, svm, knn, forest, bayes, a comma list, or all.
    #[arg(long)]
    pub classifier: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub validation_fraction: Option<f64>,
    /// Negatives kept per positive when fitting; 0 keeps every row.
    #[arg(long)]
    pub negative_ratio: Option<f64>,
    /// recall_weighted or balanced; defaults by task.
    #[arg(long)]
    pub objective: Option<Objective>,
    /// Let regression and SVM try degree-2 features.
    #[arg(long)]
    pub polynomial: Option<bool>,
    #[arg(long)]
    pub hops: Option<u32>,
    /// Train classifier kinds concurrently.
    #[arg(long)]
    pub threads: Option<bool>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct EvaluateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub experiment: ExperimentArgs,
    /// model.json written by `train`; classifiers are trained afresh without it.
    #[arg(long)]
    pub models: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct ImportanceArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub semester: Option<u32>,
    #[arg(long)]
    pub method: Option<CombinationMethod>,
    /// formation, dissolution or all.
    #[arg(long)]
    pub task: Option<String>,
    /// behavioral, cognitive or all.
    #[arg(long)]
    pub network: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Size of the top set compared across cells.
    #[arg(long)]
    pub top: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(default)]
pub struct SurvivalArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub network: Option<NetworkKind>,
    /// Strong-tie threshold on the fraction of agreeing attributes.
    #[arg(long)]
    pub ts: Option<f64>,
    /// Threshold grid `start:end:step`; replaces `--ts`.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// exit status. Errors are reported on stderr as one JSON object.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return 0;
            }
            let report = json!({
                "error": "usage",
                "message": e.kind().to_string(),
                "detail": e.render().to_string(),
                "exit_code": EXIT_USAGE,
            });
            eprintln!("{report}");
            return EXIT_USAGE;
        }
    };
    match execute(cli.command) {
        Ok(outputs) => {
            for path in outputs {
                println!("{}", path.display());
            }
            0
        }
        Err(e) => {
            let code = exit_code(&e);
            let mut report = json!({
                "error": e.kind(),
                "message": e.to_string(),
                "exit_code": code,
            });
            if let Error::Io { path, .. } = &e {
                report["path"] = json!(path.display().to_string());
            }
            eprintln!("{report}");
            code
        }
    }
}

/// Runs one subcommand and returns the written paths.
pub fn execute(command: Command) -> Result<Vec<PathBuf>> {
    let name = command.name();
    match command {
        Command::Synth(a) => synth(name, a),
        Command::Ingest(a) => {
            let file = a.config.clone();
            ingest(name, merge(a, file.as_deref())?)
        }
        Command::Prefs(a) => {
            let file = a.config.clone();
            prefs(name, merge(a, file.as_deref())?)
        }
        Command::Matrix(a) => {
            let file = a.config.clone();
            matrix(name, merge(a, file.as_deref())?)
        }
        Command::Dataset(a) => {
            let file = a.config.clone();
            dataset(name, merge(a, file.as_deref())?)
        }
        Command::Train(a) => {
            let file = a.config.clone();
            train(name, merge(a, file.as_deref())?)
        }
        Command::Evaluate(a) => {
            let file = a.experiment.config.clone();
            evaluate(name, merge(a, file.as_deref())?)
        }
        Command::Importance(a) => {
            let file = a.config.clone();
            importance(name, merge(a, file.as_deref())?)
        }
        Command::Survival(a) => {
            let file = a.config.clone();
            survival(name, merge(a, file.as_deref())?)
        }
    }
}

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::parse(
            path.display().to_string(),
            format!("line {}, column {}", e.line(), e.column()),
            e.to_string(),
        )
    })
}

/// Lays the non-null flag values over the config file object.
fn merge<T: Serialize + DeserializeOwned + Default>(flags: T, file: Option<&Path>) -> Result<T> {
    let Some(path) = file else { return Ok(flags) };
    let Value::Object(mut base) = read_json(path)? else {
        return Err(Error::parse(
            path.display().to_string(),
            "top level",
            "config must be a JSON object",
        ));
    };
    let Value::Object(known) = serde_json::to_value(T::default())? else {
        unreachable!("argument structs serialize to objects")
    };
    if let Some(key) = base.keys().find(|k| !known.contains_key(*k)) {
        return Err(Error::parse(
            path.display().to_string(),
            format!("field `{key}`"),
            "unknown option",
        ));
    }
    let Value::Object(overlay) = serde_json::to_value(&flags)? else {
        unreachable!("argument structs serialize to objects")
    };
    for (k, v) in overlay {
        if !v.is_null() {
            base.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(base))
        .map_err(|e| Error::parse(path.display().to_string(), "top level", e.to_string()))
}

fn required<T: Clone>(value: &Option<T>, flag: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::InvalidArgument(format!("--{flag} is required")))
}

fn out_dir(out: &Option<PathBuf>) -> Result<PathBuf> {
    let dir = required(out, "out")?;
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

struct Outputs {
    dir: PathBuf,
    manifest: RunManifest,
    written: Vec<PathBuf>,
}

impl Outputs {
    fn new(dir: PathBuf, subcommand: &str, config: &impl Serialize, seed: Option<u64>) -> Result<Self> {
        Ok(Outputs {
            dir,
            manifest: RunManifest::new(subcommand, serde_json::to_value(config)?, seed),
            written: Vec::new(),
        })
    }

    fn input(&mut self, path: &Path) -> Result<()> {
        self.manifest.add_input(path)
    }

    fn inputs_dir(&mut self, dir: &Path, snapshots: &[Snapshot]) -> Result<()> {
        for s in snapshots {
            self.input(&dir.join(snapshot_file_name(s.semester())))?;
        }
        Ok(())
    }

    fn text(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.record(path);
        Ok(())
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        self.text(name, &(serde_json::to_string_pretty(value)? + "\n"))
    }

    fn record(&mut self, path: PathBuf) {
        let name = path.strip_prefix(&self.dir).unwrap_or(&path).display().to_string();
        self.manifest.outputs.push(name);
        self.written.push(path);
    }

    fn finish(mut self) -> Result<Vec<PathBuf>> {
        self.manifest.write(&self.dir)?;
        self.written.push(self.dir.join(MANIFEST_FILE));
        Ok(self.written)
    }
}

fn load_schema(path: &Option<PathBuf>) -> Result<(PathBuf, AttributeSchema)> {
    let path = required(path, "schema")?;
    let schema = SchemaFile::read(&path)?.schema;
    Ok((path, schema))
}

fn load_snapshots(dir: &Option<PathBuf>) -> Result<(PathBuf, Vec<Snapshot>)> {
    let dir = required(dir, "snapshots")?;
    let snapshots = read_snapshots(&dir)?;
    if snapshots.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no snapshot files in {}",
            dir.display()
        )));
    }
    Ok((dir, snapshots))
}

fn synth(name: &str, a: SynthArgs) -> Result<Vec<PathBuf>> {
    let preset = a.preset.unwrap_or(Preset::Default);
    let mut config = serde_json::to_value(preset.config(a.seed.unwrap_or(GenConfig::default().seed)))?;
    if let Some(path) = &a.config {
        let Value::Object(file) = read_json(path)? else {
            return Err(Error::parse(
                path.display().to_string(),
                "top level",
                "config must be a JSON object",
            ));
        };
        let Value::Object(base) = &mut config else {
            unreachable!("generator config is an object")
        };
        for (k, v) in file {
            if !base.contains_key(&k) {
                return Err(Error::parse(
                    path.display().to_string(),
                    format!("field `{k}`"),
                    "unknown option",
                ));
            }
            base.insert(k, v);
        }
    }
    let mut config: GenConfig =
        serde_json::from_value(config).map_err(|e| Error::InvalidArgument(format!("generator config: {e}")))?;
    if let Some(seed) = a.seed {
        config.seed = seed;
    }
    if let Some(n) = a.nodes {
        config.nodes = n;
    }
    if let Some(s) = a.semesters {
        config.semesters = s;
    }
    let dir = out_dir(&a.out)?;
    let generated = generate(&config)?;
    let mut out = Outputs::new(dir.clone(), name, &config, Some(config.seed))?;
    if let Some(path) = &a.config {
        out.input(path)?;
    }
    for path in generated.write(&dir)? {
        out.record(path);
    }
    out.finish()
}

fn ingest(name: &str, a: IngestArgs) -> Result<Vec<PathBuf>> {
    let from_data = |given: &Option<PathBuf>, file: &str, flag: &str| match (given, &a.data) {
        (Some(p), _) => Ok(p.clone()),
        (None, Some(d)) => Ok(d.join(file)),
        (None, None) => Err(Error::InvalidArgument(format!("--{flag} or --data is required"))),
    };
    let schema_path = from_data(&a.schema, "schema.json", "schema")?;
    let events_path = from_data(&a.events, "events.csv", "events")?;
    let nominations_path = from_data(&a.nominations, "nominations.csv", "nominations")?;
    let attributes_path = from_data(&a.attributes, "attributes.csv", "attributes")?;

    let file = SchemaFile::read(&schema_path)?;
    let events = parse_events(&events_path, &file.calendar)?;
    let nominations = parse_nominations(&nominations_path)?;
    let attributes = parse_attributes(&attributes_path, &file.schema)?;
    let set = build_snapshots(
        &events.events,
        &nominations.nominations,
        &attributes,
        &file.calendar,
        &file.schema,
        BuildOptions {
            mutual_nominations: a.mutual.unwrap_or(false),
        },
    )?;

    let dir = out_dir(&a.out)?;
    let mut out = Outputs::new(dir.clone(), name, &a, None)?;
    for p in [&schema_path, &events_path, &nominations_path, &attributes_path] {
        out.input(p)?;
    }
    for path in write_snapshots(&dir, &set.snapshots)? {
        out.record(path);
    }
    out.json(
        "warnings.json",
        &json!({
            "events_outside_window": events.outside_window,
            "event_self_loops": events.self_loops,
            "self_nominations": nominations.self_nominations,
            "unknown_nodes": set.warnings.unknown_nodes,
            "dropped_events": set.warnings.dropped_events,
            "dropped_nominations": set.warnings.dropped_nominations,
        }),
    )?;
    out.finish()
}

fn prefs(name: &str, a: PrefsArgs) -> Result<Vec<PathBuf>> {
    let (schema_path, schema) = load_schema(&a.schema)?;
    let snapshot_path = required(&a.snapshot, "snapshot")?;
    let snapshot = read_snapshot(&snapshot_path)?;
    let network = required(&a.network, "network")?;
    let table = compute_preferences(&snapshot, network, &schema)?;

    let mut out = Outputs::new(out_dir(&a.out)?, name, &a, None)?;
    out.input(&schema_path)?;
    out.input(&snapshot_path)?;
    out.json(
        "preferences.json",
        &json!({
            "semester": table.semester,
            "network": table.network,
            "preferences": table.to_nested(),
        }),
    )?;
    out.finish()
}

fn matrix(name: &str, a: MatrixArgs) -> Result<Vec<PathBuf>> {
    let (schema_path, schema) = load_schema(&a.schema)?;
    let (snap_dir, snapshots) = load_snapshots(&a.snapshots)?;
    let network = required(&a.network, "network")?;
    let attribute = required(&a.attribute, "attribute")?;
    let epsilon = a.epsilon.unwrap_or(DEFAULT_TREND_EPSILON);
    let matrices = snapshots
        .iter()
        .map(|s| average_preference_matrix(&compute_preferences(s, network, &schema)?, s, &schema, &attribute))
        .collect::<Result<Vec<_>>>()?;
    let marks = if matrices.len() >= 2 {
        trend_marks(&matrices, epsilon)?
    } else {
        Vec::new()
    };

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["semester", "own_value", "other_value", "holders", "preference", "ratio"])?;
    for m in &matrices {
        for row in &m.rows {
            for (j, other) in m.values.iter().enumerate() {
                w.write_record([
                    m.semester.to_string(),
                    row.value.clone(),
                    other.clone(),
                    row.holders.to_string(),
                    row.preference[j].to_string(),
                    row.ratio[j].map(|r| r.to_string()).unwrap_or_default(),
                ])?;
            }
        }
    }
    let matrix_csv = csv_text(w)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "from_semester",
        "to_semester",
        "own_value",
        "other_value",
        "delta",
        "trend",
    ])?;
    for m in &marks {
        w.write_record([
            m.from_semester.to_string(),
            m.to_semester.to_string(),
            m.own_value.clone(),
            m.other_value.clone(),
            m.delta.to_string(),
            serde_json::to_value(m.trend)?.as_str().unwrap_or_default().to_string(),
        ])?;
    }
    let trends_csv = csv_text(w)?;

    let mut out = Outputs::new(out_dir(&a.out)?, name, &a, None)?;
    out.input(&schema_path)?;
    out.inputs_dir(&snap_dir, &snapshots)?;
    out.json("matrix.json", &json!({ "matrices": matrices, "trends": marks }))?;
    out.text("matrix.csv", &matrix_csv)?;
    out.text("trends.csv", &trends_csv)?;
    out.finish()
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn dataset(name: &str, a: DatasetArgs) -> Result<Vec<PathBuf>> {
    let (schema_path, schema) = load_schema(&a.schema)?;
    let (snap_dir, snapshots) = load_snapshots(&a.snapshots)?;
    let data = build_dataset(
        required(&a.task, "task")?,
        a.method.unwrap_or(CombinationMethod::EqualPreference),
        &snapshots,
        required(&a.semester, "semester")?,
        required(&a.network, "network")?,
        &schema,
        DatasetOptions {
            hop_limit: a.hops.unwrap_or(DEFAULT_HOP_LIMIT),
        },
    )?;
    let mut out = Outputs::new(out_dir(&a.out)?, name, &a, None)?;
    out.input(&schema_path)?;
    out.inputs_dir(&snap_dir, &snapshots)?;
    out.text("train.csv", &data.train.to_csv()?)?;
    out.text("test.csv", &data.test.to_csv()?)?;
    out.finish()
}

/// `all`, one kind, or a comma list of kinds.
pub fn parse_classifiers(spec: &str) -> Result<Vec<ModelKind>> {
    if spec.trim() == "all" {
        return Ok(ModelKind::ALL.to_vec());
    }
    let mut kinds = Vec::new();
    for part in spec.split(',') {
        let kind: ModelKind = part.trim().parse()?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    Ok(kinds)
}

impl ExperimentArgs {
    pub fn experiment_config(&self) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::new(
            required(&self.task, "task")?,
            required(&self.network, "network")?,
            required(&self.semester, "semester")?,
        );
        if let Some(m) = self.method {
            c.method = m;
        }
        c.classifiers = parse_classifiers(self.classifier.as_deref().unwrap_or("all"))?;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(f) = self.validation_fraction {
            c.validation_fraction = f;
        }
        c.negative_ratio = match self.negative_ratio {
            Some(0.0) => None,
            Some(r) => Some(r),
            None => Some(DEFAULT_NEGATIVE_RATIO),
        };
        c.objective = self.objective;
        if let Some(p) = self.polynomial {
            c.polynomial = p;
        }
        if let Some(h) = self.hops {
            c.hop_limit = h;
        }
        if let Some(t) = self.threads {
            c.threads = t;
        }
        Ok(c)
    }
}

fn train(name: &str, a: ExperimentArgs) -> Result<Vec<PathBuf>> {
    let (schema_path, schema) = load_schema(&a.schema)?;
    let (snap_dir, snapshots) = load_snapshots(&a.snapshots)?;
    let config = a.experiment_config()?;
    let data = experiment_data(&snapshots, &schema, &config)?;
    let fitted = fit_experiment(&data.train, &config)?;

    let mut out = Outputs::new(out_dir(&a.out)?, name, &a, Some(config.seed))?;
    out.input(&schema_path)?;
    out.inputs_dir(&snap_dir, &snapshots)?;
    out.json("model.json", &fitted)?;
    for r in &fitted.validation {
        out.json(&format!("validation_{}.json", r.model), r)?;
        out.text(&format!("roc_validation_{}.csv", r.model), &r.roc_csv())?;
    }
    out.finish()
}

fn evaluate(name: &str, a: EvaluateArgs) -> Result<Vec<PathBuf>> {
    let e = &a.experiment;
    let (schema_path, schema) = load_schema(&e.schema)?;
    let (snap_dir, snapshots) = load_snapshots(&e.snapshots)?;
    let (fitted, test) = match &a.models {
        Some(path) => {
            let fitted: FittedExperiment = serde_json::from_value(read_json(path)?)
                .map_err(|err| Error::parse(path.display().to_string(), "top level", err.to_string()))?;
            let data = experiment_data(&snapshots, &schema, &fitted.config)?;
            (fitted, data.test)
        }
        None => {
            let config = e.experiment_config()?;
            let data = experiment_data(&snapshots, &schema, &config)?;
            (fit_experiment(&data.train, &config)?, data.test)
        }
    };
    let report = fitted.evaluate(&test)?;

    let mut out = Outputs::new(out_dir(&e.out)?, name, &a, Some(fitted.config.seed))?;
    out.input(&schema_path)?;
    out.inputs_dir(&snap_dir, &snapshots)?;
    if let Some(path) = &a.models {
        out.input(path)?;
    }
    out.json("report.json", &report)?;
    for r in &report.test_reports {
        out.json(&format!("evaluation_{}.json", r.model), r)?;
        out.text(&format!("roc_{}.csv", r.model), &r.roc_csv())?;
    }
    out.finish()
}

fn choices<T: Copy + std::str::FromStr<Err = Error>>(spec: Option<&str>, all: &[T]) -> Result<Vec<T>> {
    match spec.unwrap_or("all") {
        "all" => Ok(all.to_vec()),
        one => Ok(vec![one.parse()?]),
    }
}

fn importance(name: &str, a: ImportanceArgs) -> Result<Vec<PathBuf>> {
    let (schema_path, schema) = load_schema(&a.schema)?;
    let (snap_dir, snapshots) = load_snapshots(&a.snapshots)?;
    let semester = required(&a.semester, "semester")?;
    let mut reports = Vec::new();
    for task in choices(a.task.as_deref(), &Task::ALL)? {
        for network in choices(a.network.as_deref(), &NetworkKind::ALL)? {
            let mut config = ExperimentConfig::new(task, network, semester);
            config.classifiers = vec![ModelKind::LinearRegression];
            config.polynomial = false;
            config.seed = a.seed.unwrap_or(0);
            if let Some(m) = a.method {
                config.method = m;
            }
            let data = experiment_data(&snapshots, &schema, &config)?;
            let fitted = fit_experiment(&data.train, &config)?;
            reports.push(
                fitted
                    .importance
                    .ok_or_else(|| Error::Model(format!("{task} {network}: regression coefficients are all zero")))?,
            );
        }
    }
    let top = a.top.unwrap_or(DEFAULT_TOP_K).min(reports[0].features.len());
    let comparison = compare_rankings(&reports, top)?;

    let mut out = Outputs::new(out_dir(&a.out)?, name, &a, Some(a.seed.unwrap_or(0)))?;
    out.input(&schema_path)?;
    out.inputs_dir(&snap_dir, &snapshots)?;
    out.text("importance_weights.csv", &weights_table(&reports)?)?;
    out.text("importance_ranks.csv", &ranks_table(&reports)?)?;
    out.json(
        "importance.json",
        &json!({ "reports": reports, "comparison": comparison }),
    )?;
    out.finish()
}

fn survival(name: &str, a: SurvivalArgs) -> Result<Vec<PathBuf>> {
    let (schema_path, schema) = load_schema(&a.schema)?;
    let (snap_dir, snapshots) = load_snapshots(&a.snapshots)?;
    let network = a.network.unwrap_or(NetworkKind::Behavioral);
    let grid = match &a.sweep {
        Some(spec) => parse_grid(spec)?,
        None => vec![a.ts.unwrap_or(DEFAULT_STRONG_THRESHOLD)],
    };
    let reports = sweep_threshold(&snapshots, network, &schema, &grid)?;

    let mut out = Outputs::new(out_dir(&a.out)?, name, &a, None)?;
    out.input(&schema_path)?;
    out.inputs_dir(&snap_dir, &snapshots)?;
    out.text("survival.csv", &report_csv(&reports)?)?;
    let mut summary = Map::new();
    summary.insert("best_threshold".into(), json!(best_threshold(&reports)));
    summary.insert("reports".into(), serde_json::to_value(&reports)?);
    out.json("survival.json", &Value::Object(summary))?;
    out.finish()
}
