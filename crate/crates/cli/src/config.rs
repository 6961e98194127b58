use std::path::Path;

use hinfraud::classify::{ClassifierKind, ClassifierSpec, ForestParams, LogisticParams};
use hinfraud::collective::LoopConfig;
use hinfraud::eval::{DEFAULT_ALPHA, DEFAULT_SAMPLE_SIZE};
use hinfraud::features::FeatureOptions;
use hinfraud::hin::LabelMode;
use hinfraud::{Error, Result};
use serde::{Deserialize, Serialize};

/// Settings shared by the modelling subcommands, read from `--config`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub max_iterations: usize,
    pub early_stop_fraction: f64,
    pub threshold: f64,
    pub class_weighting: bool,
    pub self_exclusion: bool,
    pub label_mode: LabelMode,
    /// Number of chronological train/test windows.
    pub windows: usize,
    pub sample_size: usize,
    pub alpha: f64,
    pub classifier: ClassifierKind,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_iterations: 10,
            early_stop_fraction: 0.001,
            threshold: 0.5,
            class_weighting: false,
            self_exclusion: true,
            label_mode: LabelMode::Hard,
            windows: 7,
            sample_size: DEFAULT_SAMPLE_SIZE,
            alpha: DEFAULT_ALPHA,
            classifier: ClassifierKind::RandomForest(ForestParams::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ClassifierChoice {
    RandomForest,
    LogisticRegression,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))
    }

    /// Replaces the classifier kind unless the config already names it.
    pub fn choose_classifier(&mut self, choice: Option<ClassifierChoice>) {
        match (choice, &self.classifier) {
            (None, _)
            | (Some(ClassifierChoice::RandomForest), ClassifierKind::RandomForest(_))
            | (Some(ClassifierChoice::LogisticRegression), ClassifierKind::LogisticRegression(_)) => {}
            (Some(ClassifierChoice::RandomForest), _) => {
                self.classifier = ClassifierKind::RandomForest(ForestParams::default())
            }
            (Some(ClassifierChoice::LogisticRegression), _) => {
                self.classifier = ClassifierKind::LogisticRegression(LogisticParams::default())
            }
        }
    }

    pub fn classifier_spec(&self, seed: u64) -> ClassifierSpec {
        ClassifierSpec { kind: self.classifier, threshold: self.threshold, seed, class_weighting: self.class_weighting }
    }

    pub fn loop_config(&self, seed: u64) -> LoopConfig {
        LoopConfig {
            max_iterations: self.max_iterations,
            early_stop_fraction: self.early_stop_fraction,
            classifier: self.classifier_spec(seed),
            features: FeatureOptions { self_exclusion: self.self_exclusion, label_mode: self.label_mode },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.windows == 0 {
            return Err(Error::ConfigInvalid("windows must be at least 1".into()));
        }
        if self.sample_size == 0 {
            return Err(Error::ConfigInvalid("sample_size must be at least 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::ConfigInvalid(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        self.loop_config(0).validate()
    }
}
