use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numcore::Tensor2;
use crate::rng::{derive_seed, hash_str, seeded};

/// How the three relation vectors of a node are merged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FinalAggregator {
    Sum,
    Mean,
    Concat,
}

impl FinalAggregator {
    pub fn output_dim(self, d: usize) -> usize {
        match self {
            FinalAggregator::Concat => 3 * d,
            FinalAggregator::Sum | FinalAggregator::Mean => d,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FinalAggregator::Sum => "Sum",
            FinalAggregator::Mean => "Mean",
            FinalAggregator::Concat => "Concat",
        }
    }
}

/// How sampled neighbor base vectors are pooled before projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerAggregator {
    Sum,
    Mean,
    #[serde(rename = "maxpool")]
    MaxPool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RgatConfig {
    pub d_bert: usize,
    pub d: usize,
    /// Edge embedding width.
    pub m: usize,
    /// Attention hidden width.
    pub n: usize,
    /// Neighbors drawn per node and relation.
    pub sample_size: usize,
    pub inner: InnerAggregator,
    pub aggregator: FinalAggregator,
    /// Separate attention projections per relation instead of one shared pair.
    pub per_relation_attention: bool,
}

impl Default for RgatConfig {
    fn default() -> Self {
        RgatConfig {
            d_bert: 1024,
            d: 256,
            m: 10,
            n: 20,
            sample_size: 4,
            inner: InnerAggregator::Sum,
            aggregator: FinalAggregator::Concat,
            per_relation_attention: false,
        }
    }
}

impl RgatConfig {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("d_bert", self.d_bert),
            ("d", self.d),
            ("m", self.m),
            ("n", self.n),
            ("sample_size", self.sample_size),
        ];
        for (name, v) in dims {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Width of the syntactic part of a node vector.
    pub fn final_dim(&self) -> usize {
        self.aggregator.output_dim(self.d)
    }

    /// Width of a blended node vector: syntactic part plus the compact
    /// shortcut projection.
    pub fn blend_dim(&self) -> usize {
        self.final_dim() + self.d
    }
}

/// RGAT weights over any element type: tensors for stored parameters, tape
/// variables during a forward pass. `build` and `named` agree on order.
#[derive(Clone, Debug, PartialEq)]
pub struct RgatWeights<T> {
    /// d × d_bert.
    pub compress: T,
    /// Per relation, m × d.
    pub neighbor_proj: [T; 3],
    /// Per relation, d × m.
    pub value_proj: [T; 3],
    /// n × m; one shared entry or one per relation.
    pub attn_proj: Vec<T>,
    /// 1 × n; parallel to `attn_proj`.
    pub attn_vec: Vec<T>,
    /// d × d_bert, no bias.
    pub shortcut: T,
}

pub type RgatParams = RgatWeights<Tensor2>;

impl<T> RgatWeights<T> {
    /// Builds weights in canonical order; `make` receives each tensor's name
    /// and expected shape.
    pub fn build(config: &RgatConfig, mut make: impl FnMut(&str, (usize, usize)) -> Result<T>) -> Result<Self> {
        let RgatConfig { d_bert, d, m, n, .. } = *config;
        let heads = if config.per_relation_attention { 3 } else { 1 };
        let compress = make("rgat.compress", (d, d_bert))?;
        let neighbor_proj = [0, 1, 2].map(|r| make(&format!("rgat.neighbor_proj.{r}"), (m, d)));
        let neighbor_proj = transpose_results(neighbor_proj)?;
        let value_proj = [0, 1, 2].map(|r| make(&format!("rgat.value_proj.{r}"), (d, m)));
        let value_proj = transpose_results(value_proj)?;
        let mut attn_proj = Vec::with_capacity(heads);
        let mut attn_vec = Vec::with_capacity(heads);
        for h in 0..heads {
            let suffix = if heads == 1 { String::new() } else { format!(".{h}") };
            attn_proj.push(make(&format!("rgat.attn_proj{suffix}"), (n, m))?);
            attn_vec.push(make(&format!("rgat.attn_vec{suffix}"), (1, n))?);
        }
        let shortcut = make("rgat.shortcut", (d, d_bert))?;
        Ok(RgatWeights {
            compress,
            neighbor_proj,
            value_proj,
            attn_proj,
            attn_vec,
            shortcut,
        })
    }

    /// Index into `attn_proj`/`attn_vec` for relation `r`.
    pub fn attn_slot(&self, r: usize) -> usize {
        if self.attn_proj.len() == 1 {
            0
        } else {
            r
        }
    }

    pub fn named(&self) -> Vec<(String, &T)> {
        let heads = self.attn_proj.len();
        let suffix = |h: usize| if heads == 1 { String::new() } else { format!(".{h}") };
        let mut out = vec![("rgat.compress".to_string(), &self.compress)];
        for (r, t) in self.neighbor_proj.iter().enumerate() {
            out.push((format!("rgat.neighbor_proj.{r}"), t));
        }
        for (r, t) in self.value_proj.iter().enumerate() {
            out.push((format!("rgat.value_proj.{r}"), t));
        }
        for h in 0..heads {
            out.push((format!("rgat.attn_proj{}", suffix(h)), &self.attn_proj[h]));
            out.push((format!("rgat.attn_vec{}", suffix(h)), &self.attn_vec[h]));
        }
        out.push(("rgat.shortcut".to_string(), &self.shortcut));
        out
    }

    pub fn named_mut(&mut self) -> Vec<(String, &mut T)> {
        let heads = self.attn_proj.len();
        let suffix = |h: usize| if heads == 1 { String::new() } else { format!(".{h}") };
        let mut out = vec![("rgat.compress".to_string(), &mut self.compress)];
        for (r, t) in self.neighbor_proj.iter_mut().enumerate() {
            out.push((format!("rgat.neighbor_proj.{r}"), t));
        }
        for (r, t) in self.value_proj.iter_mut().enumerate() {
            out.push((format!("rgat.value_proj.{r}"), t));
        }
        for (h, (p, v)) in self.attn_proj.iter_mut().zip(self.attn_vec.iter_mut()).enumerate() {
            out.push((format!("rgat.attn_proj{}", suffix(h)), p));
            out.push((format!("rgat.attn_vec{}", suffix(h)), v));
        }
        out.push(("rgat.shortcut".to_string(), &mut self.shortcut));
        out
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> RgatWeights<U> {
        RgatWeights {
            compress: f(&self.compress),
            neighbor_proj: [0, 1, 2].map(|r| f(&self.neighbor_proj[r])),
            value_proj: [0, 1, 2].map(|r| f(&self.value_proj[r])),
            attn_proj: self.attn_proj.iter().map(&mut f).collect(),
            attn_vec: self.attn_vec.iter().map(&mut f).collect(),
            shortcut: f(&self.shortcut),
        }
    }
}

fn transpose_results<T>(xs: [Result<T>; 3]) -> Result<[T; 3]> {
    let [a, b, c] = xs;
    Ok([a?, b?, c?])
}

impl RgatParams {
    /// Glorot-uniform initialization; each tensor draws from its own stream
    /// derived from `seed` and its name.
    pub fn init(config: &RgatConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        RgatWeights::build(config, |name, (r, c)| {
            let mut rng = seeded(derive_seed(seed, &[hash_str(name)]));
            Ok(Tensor2::glorot(r, c, &mut rng))
        })
    }

    /// Rebuilds parameters from named tensors, checking every shape.
    pub fn from_named(config: &RgatConfig, mut get: impl FnMut(&str) -> Option<Tensor2>) -> Result<Self> {
        RgatWeights::build(config, |name, shape| {
            let t = get(name).ok_or_else(|| Error::Format(format!("missing tensor {name}")))?;
            if t.shape() != shape {
                return Err(Error::dim("load", format!("{name} {}", t.shape_str()), format!("{}x{}", shape.0, shape.1)));
            }
            Ok(t)
        })
    }

    pub fn validate(&self) -> Result<()> {
        for (name, t) in self.named() {
            if !t.is_finite() {
                return Err(Error::NonFinite(format!("parameter {name}")));
            }
        }
        Ok(())
    }
}
