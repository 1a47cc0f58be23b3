//! Declarative architecture descriptions and shape propagation.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ops::pool::pooled_shape;

/// Clip tensor shape `(C, T, H, W)`: RGB, 96 frames, 320×180.
pub const DEFAULT_INPUT: [usize; 4] = [3, 96, 180, 320];
pub const V1_CHANNELS: [usize; 6] = [16, 32, 64, 128, 256, 256];
pub const V2_CHANNELS: [usize; 5] = [16, 32, 64, 128, 256];
pub const DEFAULT_HIDDEN_FC: usize = 500;
pub const DEFAULT_NUM_CLASSES: usize = 21;
/// Number of leading V1 blocks that pool only spatially.
pub const V1_SPATIAL_ONLY_POOLS: usize = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Arch {
    V1,
    V2,
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Arch::V1 => "v1",
            Arch::V2 => "v2",
        })
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "v1" => Ok(Arch::V1),
            "v2" => Ok(Arch::V2),
            other => Err(Error::config(format!("unknown architecture {other:?} (expected v1 or v2)"))),
        }
    }
}

/// One conv → pool (→ attention) stage. Triples are ordered `(t, h, w)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Block {
    pub kernel: [usize; 3],
    pub channels: usize,
    pub pool: [usize; 3],
    pub attention: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerSpec {
    Conv { kernel: [usize; 3], channels_out: usize },
    Pool { window: [usize; 3] },
    Attention,
    Flatten,
    Linear { channels_out: usize },
}

impl fmt::Display for LayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LayerSpec::Conv { kernel: [t, h, w], channels_out } => write!(f, "conv {t}x{h}x{w} -> {channels_out}"),
            LayerSpec::Pool { window: [t, h, w] } => write!(f, "maxpool {t}x{h}x{w}"),
            LayerSpec::Attention => f.write_str("attention"),
            LayerSpec::Flatten => f.write_str("flatten"),
            LayerSpec::Linear { channels_out } => write!(f, "linear -> {channels_out}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerShape {
    pub index: usize,
    pub layer: LayerSpec,
    /// Per-sample output shape (no batch axis).
    pub output: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSpec {
    pub arch: Arch,
    pub input_shape: [usize; 4],
    pub blocks: Vec<Block>,
    pub hidden_fc: usize,
    pub num_classes: usize,
}

impl NetworkSpec {
    /// V1: 3×3×3 convs everywhere; the first `spatial_only_pools` blocks pool
    /// (1,2,2), the rest (2,2,2); all but the last two blocks carry attention.
    pub fn v1_with(
        input_shape: [usize; 4],
        channel_plan: &[usize],
        num_classes: usize,
        spatial_only_pools: usize,
    ) -> Result<Self> {
        let n = channel_plan.len();
        let blocks = channel_plan
            .iter()
            .enumerate()
            .map(|(i, &channels)| Block {
                kernel: [3, 3, 3],
                channels,
                pool: if i < spatial_only_pools { [1, 2, 2] } else { [2, 2, 2] },
                attention: i + 2 < n,
            })
            .collect();
        let spec = Self {
            arch: Arch::V1,
            input_shape,
            blocks,
            hidden_fc: DEFAULT_HIDDEN_FC,
            num_classes,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn v1(input_shape: [usize; 4], channel_plan: &[usize], num_classes: usize) -> Result<Self> {
        Self::v1_with(input_shape, channel_plan, num_classes, V1_SPATIAL_ONLY_POOLS)
    }

    /// V2: every block is conv+pool+attention. The first two use a 7×5×3
    /// (w×h×t) kernel and 4×3×2 pooling, the rest 3×3×3 and 2×2×2.
    pub fn v2(input_shape: [usize; 4], channel_plan: &[usize], num_classes: usize) -> Result<Self> {
        let blocks = channel_plan
            .iter()
            .enumerate()
            .map(|(i, &channels)| {
                let wide = i < 2;
                Block {
                    kernel: if wide { [3, 5, 7] } else { [3, 3, 3] },
                    channels,
                    pool: if wide { [2, 3, 4] } else { [2, 2, 2] },
                    attention: true,
                }
            })
            .collect();
        let spec = Self {
            arch: Arch::V2,
            input_shape,
            blocks,
            hidden_fc: DEFAULT_HIDDEN_FC,
            num_classes,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn default_for(arch: Arch) -> Self {
        match arch {
            Arch::V1 => Self::v1(DEFAULT_INPUT, &V1_CHANNELS, DEFAULT_NUM_CLASSES),
            Arch::V2 => Self::v2(DEFAULT_INPUT, &V2_CHANNELS, DEFAULT_NUM_CLASSES),
        }
        .expect("default architectures are valid")
    }

    pub fn with_hidden_fc(mut self, hidden_fc: usize) -> Result<Self> {
        self.hidden_fc = hidden_fc;
        self.validate()?;
        Ok(self)
    }

    pub fn clip_len(&self) -> usize {
        self.input_shape[1]
    }

    pub fn attention_blocks(&self) -> usize {
        self.blocks.iter().filter(|b| b.attention).count()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::config(format!("num_classes must be at least 2, got {}", self.num_classes)));
        }
        if self.hidden_fc == 0 {
            return Err(Error::config("hidden_fc must be positive"));
        }
        if self.input_shape.contains(&0) {
            return Err(Error::config(format!("input shape {:?} has a zero extent", self.input_shape)));
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if b.kernel.iter().any(|k| k % 2 == 0) {
                return Err(Error::config(format!("block {i}: kernel {:?} must be odd", b.kernel)));
            }
            if b.pool.contains(&0) {
                return Err(Error::config(format!("block {i}: pool window {:?} must be ≥ 1", b.pool)));
            }
            if b.channels == 0 {
                return Err(Error::config(format!("block {i}: zero output channels")));
            }
        }
        self.infer_shapes().map(|_| ())
    }

    /// Expanded layer list: per block conv, pool, optional attention; then
    /// flatten, hidden linear, output linear. A rectifier follows every conv
    /// and the hidden linear layer.
    pub fn layers(&self) -> Vec<LayerSpec> {
        let mut layers = Vec::new();
        for b in &self.blocks {
            layers.push(LayerSpec::Conv {
                kernel: b.kernel,
                channels_out: b.channels,
            });
            layers.push(LayerSpec::Pool { window: b.pool });
            if b.attention {
                layers.push(LayerSpec::Attention);
            }
        }
        layers.push(LayerSpec::Flatten);
        layers.push(LayerSpec::Linear {
            channels_out: self.hidden_fc,
        });
        layers.push(LayerSpec::Linear {
            channels_out: self.num_classes,
        });
        layers
    }

    pub fn infer_shapes(&self) -> Result<Vec<LayerShape>> {
        let [c, t, h, w] = self.input_shape;
        let mut shape = vec![c, t, h, w];
        let mut out = Vec::new();
        for (index, layer) in self.layers().into_iter().enumerate() {
            shape = match layer {
                LayerSpec::Conv { channels_out, .. } => vec![channels_out, shape[1], shape[2], shape[3]],
                LayerSpec::Pool { window } => {
                    let [pt, ph, pw] = pooled_shape([shape[1], shape[2], shape[3]], window).map_err(|_| {
                        Error::config(format!(
                            "layer {index} ({layer}): window does not fit feature map {shape:?}"
                        ))
                    })?;
                    if pt == 0 || ph == 0 || pw == 0 {
                        return Err(Error::config(format!("layer {index} ({layer}) produces an empty feature map")));
                    }
                    vec![shape[0], pt, ph, pw]
                }
                LayerSpec::Attention => shape,
                LayerSpec::Flatten => vec![shape.iter().product()],
                LayerSpec::Linear { channels_out } => vec![channels_out],
            };
            out.push(LayerShape {
                index,
                layer,
                output: shape.clone(),
            });
        }
        Ok(out)
    }

    /// Feature map `(C, T, H, W)` entering the flatten layer.
    pub fn feature_shape(&self) -> Result<Vec<usize>> {
        let shapes = self.infer_shapes()?;
        let flatten = shapes
            .iter()
            .position(|s| s.layer == LayerSpec::Flatten)
            .expect("flatten is always present");
        Ok(if flatten == 0 {
            self.input_shape.to_vec()
        } else {
            shapes[flatten - 1].output.clone()
        })
    }

    /// Parameter shapes in storage order.
    pub fn param_shapes(&self) -> Result<Vec<Vec<usize>>> {
        let mut shapes = Vec::new();
        let mut channels = self.input_shape[0];
        for b in &self.blocks {
            let [kt, kh, kw] = b.kernel;
            shapes.push(vec![b.channels, channels, kt, kh, kw]);
            shapes.push(vec![b.channels]);
            if b.attention {
                shapes.push(vec![1, b.channels, 1, 1, 1]);
                shapes.push(vec![1]);
            }
            channels = b.channels;
        }
        let features: usize = self.feature_shape()?.iter().product();
        shapes.push(vec![self.hidden_fc, features]);
        shapes.push(vec![self.hidden_fc]);
        shapes.push(vec![self.num_classes, self.hidden_fc]);
        shapes.push(vec![self.num_classes]);
        Ok(shapes)
    }

    /// `key=value` lines; parsed back by [`NetworkSpec::from_text`].
    pub fn to_text(&self) -> String {
        let [c, t, h, w] = self.input_shape;
        let blocks: Vec<String> = self
            .blocks
            .iter()
            .map(|b| {
                format!(
                    "{}/{}/{}/{}",
                    triple(b.kernel),
                    b.channels,
                    triple(b.pool),
                    if b.attention { "att" } else { "noatt" }
                )
            })
            .collect();
        format!(
            "arch={}\ninput={c},{t},{h},{w}\nblocks={}\nhidden_fc={}\nnum_classes={}\n",
            self.arch,
            blocks.join(";"),
            self.hidden_fc,
            self.num_classes
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut arch = None;
        let mut input = None;
        let mut blocks = None;
        let mut hidden_fc = None;
        let mut num_classes = None;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::config(format!("spec line {line:?} is not key=value")))?;
            match key {
                "arch" => arch = Some(value.parse::<Arch>()?),
                "input" => {
                    let v = parse_list(value, ',')?;
                    let arr: [usize; 4] = v
                        .try_into()
                        .map_err(|_| Error::config(format!("input {value:?} must have 4 entries")))?;
                    input = Some(arr);
                }
                "blocks" => {
                    let parsed = value
                        .split(';')
                        .filter(|s| !s.is_empty())
                        .map(parse_block)
                        .collect::<Result<Vec<_>>>()?;
                    blocks = Some(parsed);
                }
                "hidden_fc" => hidden_fc = Some(parse_usize(value)?),
                "num_classes" => num_classes = Some(parse_usize(value)?),
                // Extra keys (seed, provenance) belong to the caller.
                _ => {}
            }
        }
        let missing = |k: &str| Error::config(format!("spec is missing {k:?}"));
        let spec = Self {
            arch: arch.ok_or_else(|| missing("arch"))?,
            input_shape: input.ok_or_else(|| missing("input"))?,
            blocks: blocks.ok_or_else(|| missing("blocks"))?,
            hidden_fc: hidden_fc.ok_or_else(|| missing("hidden_fc"))?,
            num_classes: num_classes.ok_or_else(|| missing("num_classes"))?,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn triple([a, b, c]: [usize; 3]) -> String {
    format!("{a}x{b}x{c}")
}

fn parse_usize(s: &str) -> Result<usize> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(format!("{s:?} is not a non-negative integer")))
}

fn parse_list(s: &str, sep: char) -> Result<Vec<usize>> {
    s.split(sep).map(parse_usize).collect()
}

fn parse_triple(s: &str) -> Result<[usize; 3]> {
    parse_list(s, 'x')?
        .try_into()
        .map_err(|_| Error::config(format!("{s:?} is not a TxHxW triple")))
}

fn parse_block(s: &str) -> Result<Block> {
    let parts: Vec<&str> = s.split('/').collect();
    let [kernel, channels, pool, att] = parts[..] else {
        return Err(Error::config(format!("block {s:?} must be kernel/channels/pool/att")));
    };
    Ok(Block {
        kernel: parse_triple(kernel)?,
        channels: parse_usize(channels)?,
        pool: parse_triple(pool)?,
        attention: match att {
            "att" => true,
            "noatt" => false,
            other => return Err(Error::config(format!("block attention flag {other:?}"))),
        },
    })
}
