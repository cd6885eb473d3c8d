//! End-to-end experiments over a snapshot sequence, plus run manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{
    build_dataset, CombinationMethod, DatasetOptions, LabeledDataset, NeighborScale, Task, TaskData,
};
use crate::graph::{NetworkKind, Snapshot};
use crate::importance::{attribute_weights, ImportanceReport};
use crate::ingest::AttributeSchema;
use crate::ml::{
    self, evaluate, prepare, select_model_by, train_all, EvaluationReport, Model, ModelKind, Objective, Samples,
    SplitSpec, TrainOptions, DEFAULT_NEGATIVE_RATIO,
};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Model selection objective used when none is configured. Formation is
/// heavily imbalanced and rewards recall; dissolution is roughly balanced.
pub fn default_objective(task: Task) -> Objective {
    match task {
        Task::Formation => Objective::RecallWeighted,
        Task::Dissolution => Objective::Balanced,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub method: CombinationMethod,
    pub network: NetworkKind,
    /// Semester whose outcomes are predicted on the test split.
    pub semester: u32,
    pub classifiers: Vec<ModelKind>,
    pub seed: u64,
    pub validation_fraction: f64,
    /// `None` disables negative downsampling.
    pub negative_ratio: Option<f64>,
    /// Defaults to [`default_objective`] of the task.
    pub objective: Option<Objective>,
    pub polynomial: bool,
    pub hop_limit: u32,
    /// Train classifier kinds on separate threads.
    pub threads: bool,
}

impl ExperimentConfig {
    pub fn new(task: Task, network: NetworkKind, semester: u32) -> Self {
        ExperimentConfig {
            task,
            method: CombinationMethod::EqualPreference,
            network,
            semester,
            classifiers: ModelKind::ALL.to_vec(),
            seed: 0,
            validation_fraction: 0.2,
            negative_ratio: Some(DEFAULT_NEGATIVE_RATIO),
            objective: None,
            polynomial: true,
            hop_limit: DatasetOptions::default().hop_limit,
            threads: true,
        }
    }

    pub fn objective(&self) -> Objective {
        self.objective.unwrap_or_else(|| default_objective(self.task))
    }

    fn train_options(&self) -> TrainOptions {
        TrainOptions {
            objective: self.objective(),
            polynomial: self.polynomial,
            seed: self.seed,
        }
    }

    fn split(&self) -> SplitSpec {
        SplitSpec {
            validation_fraction: self.validation_fraction,
            seed: self.seed,
        }
    }
}

/// Feature matrices for the train and test datasets, with the common-neighbor
/// count scaled by training bounds.
pub fn design_matrices(data: &TaskData) -> (Samples, Samples) {
    let scale = NeighborScale::fit(&data.train);
    (scale.samples(&data.train), scale.samples(&data.test))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub feature_semester: u32,
    pub label_semester: u32,
    pub rows: usize,
    pub positives: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub task: Task,
    pub network: NetworkKind,
    pub method: CombinationMethod,
    pub semester: u32,
    pub objective: Objective,
    pub seed: u64,
    pub train: SplitSummary,
    pub test: SplitSummary,
    /// Rows actually used for fitting after the split and downsampling.
    pub fit_rows: usize,
    pub fit_positives: usize,
    pub validation: Vec<EvaluationReport>,
    pub test_reports: Vec<EvaluationReport>,
    /// Chosen on the validation reports.
    pub selected: ModelKind,
    /// Degree-1 regression on the same fitting rows.
    pub importance: Option<ImportanceReport>,
}

impl ExperimentReport {
    pub fn selected_test(&self) -> &EvaluationReport {
        self.test_reports
            .iter()
            .find(|r| r.model == self.selected)
            .expect("selected kind was trained")
    }

    pub fn test_report(&self, kind: ModelKind) -> Option<&EvaluationReport> {
        self.test_reports.iter().find(|r| r.model == kind)
    }
}

/// Classifiers fitted for one task, ready to score a test dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FittedExperiment {
    pub config: ExperimentConfig,
    /// Common-neighbor bounds of the training dataset.
    pub scale: NeighborScale,
    pub train: SplitSummary,
    pub fit_rows: usize,
    pub fit_positives: usize,
    pub models: Vec<Model>,
    pub validation: Vec<EvaluationReport>,
    pub selected: ModelKind,
    pub importance: Option<ImportanceReport>,
}

impl FittedExperiment {
    pub fn model(&self, kind: ModelKind) -> Option<&Model> {
        self.models.iter().find(|m| m.kind() == kind)
    }

    /// Scores every model on `test` and assembles the full report.
    pub fn evaluate(&self, test: &LabeledDataset) -> Result<ExperimentReport> {
        let c = &self.config;
        if (test.task, test.network, test.method) != (c.task, c.network, c.method) {
            return Err(Error::InvalidArgument(format!(
                "test dataset is {} {} {}, models were fitted for {} {} {}",
                test.task, test.network, test.method, c.task, c.network, c.method
            )));
        }
        let test_x = self.scale.samples(test);
        let test_reports = self
            .models
            .iter()
            .map(|m| evaluate(m, &test_x))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentReport {
            task: c.task,
            network: c.network,
            method: c.method,
            semester: c.semester,
            objective: c.objective(),
            seed: c.seed,
            train: self.train.clone(),
            test: summary(test),
            fit_rows: self.fit_rows,
            fit_positives: self.fit_positives,
            validation: self.validation.clone(),
            test_reports,
            selected: self.selected,
            importance: self.importance.clone(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Experiment {
    pub report: ExperimentReport,
    pub models: Vec<Model>,
}

fn summary(d: &LabeledDataset) -> SplitSummary {
    SplitSummary {
        feature_semester: d.feature_semester,
        label_semester: d.label_semester,
        rows: d.len(),
        positives: d.positives(),
    }
}

/// Train and test datasets for `config`.
pub fn experiment_data(
    snapshots: &[Snapshot],
    schema: &AttributeSchema,
    config: &ExperimentConfig,
) -> Result<TaskData> {
    build_dataset(
        config.task,
        config.method,
        snapshots,
        config.semester,
        config.network,
        schema,
        DatasetOptions {
            hop_limit: config.hop_limit,
        },
    )
}

/// Trains every configured classifier on `train` and selects one on
/// validation. Importance comes from a separate degree-1 regression fitted on
/// the same rows.
pub fn fit_experiment(train: &LabeledDataset, config: &ExperimentConfig) -> Result<FittedExperiment> {
    if config.classifiers.is_empty() {
        return Err(Error::InvalidArgument("no classifiers selected".into()));
    }
    let scale = NeighborScale::fit(train);
    let prepared = prepare(&scale.samples(train), config.split(), config.negative_ratio)?;
    let options = config.train_options();
    let trained = train_all(&prepared, &config.classifiers, &options, config.threads)?;
    let validation: Vec<EvaluationReport> = trained.iter().map(|t| t.validation.clone()).collect();
    let selected = select_model_by(&validation, config.objective())?;
    let linear = ml::train(
        ModelKind::LinearRegression,
        &prepared.train,
        &prepared.validation,
        &TrainOptions {
            polynomial: false,
            ..options
        },
    )?;
    let importance = attribute_weights(&linear, config.task, config.network).ok();
    Ok(FittedExperiment {
        config: config.clone(),
        scale,
        train: summary(train),
        fit_rows: prepared.train.len(),
        fit_positives: prepared.train.positives(),
        models: trained.into_iter().map(|t| t.model).collect(),
        validation,
        selected,
        importance,
    })
}

/// Builds the datasets, trains every configured classifier, selects one on
/// validation and evaluates all of them on the test split.
pub fn run_experiment(
    snapshots: &[Snapshot],
    schema: &AttributeSchema,
    config: &ExperimentConfig,
) -> Result<Experiment> {
    let data = experiment_data(snapshots, schema, config)?;
    let fitted = fit_experiment(&data.train, config)?;
    let report = fitted.evaluate(&data.test)?;
    Ok(Experiment {
        report,
        models: fitted.models,
    })
}

/// Records what produced an output directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: Option<u64>,
    /// SHA-256 of the effective configuration as JSON.
    pub config_sha256: String,
    pub config: serde_json::Value,
    /// Input path to SHA-256 of its contents.
    pub inputs: BTreeMap<String, String>,
    /// Output file names relative to the directory holding the manifest.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            seed,
            config_sha256: sha256_hex(config.to_string().as_bytes()),
            config,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_input(&mut self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        self.inputs.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    /// Writes `manifest.json` into `dir`, replacing any earlier manifest.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let path = dir.as_ref().join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self)? + "\n";
        fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn objectives_by_task() {
        assert_eq!(default_objective(Task::Formation), Objective::RecallWeighted);
        assert_eq!(default_objective(Task::Dissolution), Objective::Balanced);
    }
}
