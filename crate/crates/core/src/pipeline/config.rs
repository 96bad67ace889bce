//! Training configuration and its `key = value` text form.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::encoder::EncoderConfig;
use crate::error::{Error, Result};
use crate::labeler::WindowConfig;
use crate::neuralcore::AdaDeltaConfig;
use crate::ranker::LossWeights;

/// How the corpus is divided into train, validation and test documents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitSpec {
    /// Leading documents (in id order) go to train, then validation, then
    /// test. Counts must add up to the corpus size.
    Counts {
        train: usize,
        validation: usize,
        test: usize,
    },
    /// Explicit id lists; together they must name every document once.
    Ids {
        train: Vec<String>,
        validation: Vec<String>,
        test: Vec<String>,
    },
    /// Everything is training data.
    AllTrain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub optimizer: AdaDeltaConfig,
    /// Global gradient-norm cap; `None` disables clipping.
    pub clip_norm: Option<f64>,
    pub window: WindowConfig,
    pub encoder: EncoderConfig,
    pub loss: LossWeights,
    pub seed: u64,
    pub split: SplitSpec,
    pub min_count: usize,
    pub embeddings: Option<PathBuf>,
    /// Selector used for validation and deck generation.
    pub method: String,
    /// Word budget as a fraction of the document length.
    pub fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 50,
            optimizer: AdaDeltaConfig::default(),
            clip_norm: None,
            window: WindowConfig::default(),
            encoder: EncoderConfig::default(),
            loss: LossWeights::default(),
            seed: 0,
            split: SplitSpec::AllTrain,
            min_count: 1,
            embeddings: None,
            method: "exact".into(),
            fraction: 0.2,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be at least 1".into()));
        }
        if let Some(c) = self.clip_norm {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::InvalidConfig("clip_norm must be positive".into()));
            }
        }
        if self.min_count == 0 {
            return Err(Error::InvalidConfig("min_count must be at least 1".into()));
        }
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::InvalidConfig(format!("fraction {} outside (0, 1]", self.fraction)));
        }
        self.optimizer.validate()?;
        self.window.validate()?;
        self.encoder.validate()?;
        self.loss.validate()?;
        crate::selector::SelectorRegistry::default().get(&self.method)?;
        Ok(())
    }

    /// Parses `key = value` lines over the defaults. Blank lines and `#`
    /// comments are ignored; unknown keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        let mut ids: [Option<Vec<String>>; 3] = [None, None, None];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::InvalidConfig(format!("line {}: `{key}` {what}", lineno + 1));
            macro_rules! num {
                () => {
                    value.parse().map_err(|_| bad("is not a valid number"))?
                };
            }
            match key {
                "epochs" => cfg.epochs = num!(),
                "seed" => cfg.seed = num!(),
                "optimizer.learning_rate" => cfg.optimizer.learning_rate = num!(),
                "optimizer.rho" => cfg.optimizer.rho = num!(),
                "optimizer.epsilon" => cfg.optimizer.epsilon = num!(),
                "optimizer.clip_norm" => {
                    cfg.clip_norm = if value == "none" { None } else { Some(num!()) };
                }
                "window.w" => cfg.window.w = num!(),
                "window.max_per_window" => {
                    cfg.window.max_per_window = if value == "none" { None } else { Some(num!()) };
                }
                "encoder.d" => cfg.encoder.d = num!(),
                "encoder.k" => cfg.encoder.k = num!(),
                "encoder.max_tokens" => cfg.encoder.max_tokens = num!(),
                "encoder.max_sentences" => cfg.encoder.max_sentences = num!(),
                "encoder.mode" => cfg.encoder.mode = value.to_string(),
                "loss.positive_weight" => cfg.loss.positive_weight = num!(),
                "loss.negative_weight" => cfg.loss.negative_weight = num!(),
                "vocab.min_count" => cfg.min_count = num!(),
                "embeddings.path" => cfg.embeddings = Some(PathBuf::from(value)),
                "selection.method" => cfg.method = value.to_string(),
                "selection.fraction" => cfg.fraction = num!(),
                "split.counts" => {
                    let parts: Vec<usize> = value
                        .split(',')
                        .map(|p| p.trim().parse().map_err(|_| bad("needs three integers")))
                        .collect::<Result<_>>()?;
                    let [train, validation, test] = parts[..] else {
                        return Err(bad("needs three integers"));
                    };
                    cfg.split = SplitSpec::Counts {
                        train,
                        validation,
                        test,
                    };
                }
                "split.train" | "split.validation" | "split.test" => {
                    let slot = match key {
                        "split.train" => 0,
                        "split.validation" => 1,
                        _ => 2,
                    };
                    ids[slot] = Some(
                        value
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(String::from)
                            .collect(),
                    );
                }
                _ => return Err(bad("is not a recognized key")),
            }
        }
        if ids.iter().any(Option::is_some) {
            if matches!(cfg.split, SplitSpec::Counts { .. }) {
                return Err(Error::InvalidConfig("split.counts and split id lists are exclusive".into()));
            }
            let [train, validation, test] = ids.map(Option::unwrap_or_default);
            cfg.split = SplitSpec::Ids {
                train,
                validation,
                test,
            };
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<std::path::Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
