use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corefhead::HeadConfig;
use crate::error::{Error, Result};
use crate::optim::RegularizerSpec;
use crate::rgat::{FinalAggregator, InnerAggregator, RgatConfig};

/// Everything that controls a training run. `d_bert` is not here: it is
/// read from the embedding table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub d: usize,
    pub m: usize,
    pub n: usize,
    /// Neighbors drawn per node and relation.
    pub sample_size: usize,
    pub aggregator: FinalAggregator,
    pub inner: InnerAggregator,
    pub per_relation_attention: bool,
    /// L2 coefficient on the RGAT weights.
    pub lambda: f64,
    /// Peak learning rate.
    pub lr: f64,
    /// Fraction of all steps spent warming up.
    pub warmup: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub dropout: f64,
    pub hidden: usize,
    pub bn_momentum: f64,
    pub seed: u64,
    pub folds: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            d: 256,
            m: 10,
            n: 20,
            sample_size: 4,
            aggregator: FinalAggregator::Concat,
            inner: InnerAggregator::Sum,
            per_relation_attention: false,
            lambda: 1e-4,
            lr: 1e-3,
            warmup: 0.1,
            epochs: 30,
            batch_size: 32,
            dropout: 0.5,
            hidden: 512,
            bn_momentum: 0.9,
            seed: 42,
            folds: 5,
        }
    }
}

impl TrainConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: TrainConfig = serde_json::from_str(&std::fs::read_to_string(path)?)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be at least 2, got {}", self.folds)));
        }
        if self.batch_size < 2 {
            return Err(Error::Config("batch_size must be at least 2 for batch norm".into()));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("lr must be positive, got {}", self.lr)));
        }
        if !(0.0..=1.0).contains(&self.warmup) {
            return Err(Error::Config(format!("warmup must be in [0, 1], got {}", self.warmup)));
        }
        self.regularizer().validate()?;
        // d_bert is irrelevant to these checks
        self.rgat(1).validate()?;
        self.head().validate()
    }

    pub fn rgat(&self, d_bert: usize) -> RgatConfig {
        RgatConfig {
            d_bert,
            d: self.d,
            m: self.m,
            n: self.n,
            sample_size: self.sample_size,
            inner: self.inner,
            aggregator: self.aggregator,
            per_relation_attention: self.per_relation_attention,
        }
    }

    pub fn head(&self) -> HeadConfig {
        HeadConfig {
            hidden: self.hidden,
            dropout: self.dropout,
            bn_momentum: self.bn_momentum,
            ..HeadConfig::default()
        }
    }

    pub fn regularizer(&self) -> RegularizerSpec {
        RegularizerSpec::rgat_only(self.lambda)
    }
}
