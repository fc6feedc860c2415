use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{EmbeddingSpec, HNeRVConfig};
use super::params::{ParamMap, VarMap};
use super::schedule::{channel_schedule, kernel_schedule, ChannelSchedule};
use crate::error::{Error, Result};
use crate::tensor::{Conv2dParams, Real, Tape, Tensor, Var};

const ENCODER_DW_KERNEL: usize = 7;
const ENCODER_EXPANSION: usize = 4;
const LAYER_NORM_EPS: f64 = 1e-6;

/// One convolution layer: weight `[c_out, c_in/groups, k, k]` plus bias `[c_out]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConvSpec {
    pub name: String,
    pub c_in: usize,
    pub c_out: usize,
    pub kernel: usize,
    pub stride: usize,
    pub padding: usize,
    pub groups: usize,
}

impl ConvSpec {
    fn new(name: impl Into<String>, c_in: usize, c_out: usize, kernel: usize) -> Self {
        ConvSpec {
            name: name.into(),
            c_in,
            c_out,
            kernel,
            stride: 1,
            padding: kernel.saturating_sub(1) / 2,
            groups: 1,
        }
    }

    pub fn weight_name(&self) -> String {
        format!("{}.weight", self.name)
    }

    pub fn bias_name(&self) -> String {
        format!("{}.bias", self.name)
    }

    pub fn weight_shape(&self) -> [usize; 4] {
        [self.c_out, self.c_in / self.groups, self.kernel, self.kernel]
    }

    pub fn fan_in(&self) -> usize {
        self.c_in / self.groups * self.kernel * self.kernel
    }

    pub fn param_count(&self) -> usize {
        self.weight_shape().iter().product::<usize>() + self.c_out
    }

    pub fn conv_params(&self) -> Conv2dParams {
        Conv2dParams::new(self.stride, self.padding).with_groups(self.groups)
    }

    fn init(&self, params: &mut ParamMap, rng: &mut ChaCha8Rng) {
        let bound = 1.0 / (self.fan_in() as f32).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        let w = Tensor::from_fn(self.weight_shape().to_vec(), |_| dist.sample(rng));
        params.insert(self.weight_name(), w);
        params.insert(self.bias_name(), Tensor::zeros(vec![self.c_out]));
    }

    fn apply<T: Real>(&self, tape: &mut Tape<T>, vars: &VarMap, x: Var) -> Result<Var> {
        let w = vars.get(&self.weight_name())?;
        let b = vars.get(&self.bias_name())?;
        tape.conv2d(x, w, Some(b), self.conv_params())
    }
}

/// One decoder stage: K×K conv to `c_out·s²` channels, pixel shuffle by `s`, GELU.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockSpec {
    /// 1-based stage number.
    pub stage_index: usize,
    pub c_in: usize,
    pub c_out: usize,
    pub kernel_size: usize,
    pub upscale: usize,
    /// Spatial size after this stage.
    pub output_size: (usize, usize),
    pub conv: ConvSpec,
}

impl BlockSpec {
    pub fn param_count(&self) -> usize {
        let k2 = self.kernel_size * self.kernel_size;
        let s2 = self.upscale * self.upscale;
        k2 * self.c_in * self.c_out * s2 + self.c_out * s2
    }
}

/// Decoder layout: 1×1 stem, one block per stage, 3×3 head to RGB.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderSpec {
    pub embedding: EmbeddingSpec,
    pub kernels: Vec<usize>,
    pub channels: ChannelSchedule,
    pub stem: ConvSpec,
    pub blocks: Vec<BlockSpec>,
    pub head: ConvSpec,
}

impl DecoderSpec {
    pub fn new(config: &HNeRVConfig) -> Result<Self> {
        config.validate()?;
        let n = config.num_stages();
        let kernels = kernel_schedule(n, config.k_min, config.k_max)?;
        let channels = channel_schedule(config.c2, config.r, config.ch_min, n);
        let embedding = config.embedding_spec();
        let stem = ConvSpec::new("dec.stem", config.d, config.c2, 1);
        let mut size = (embedding.height, embedding.width);
        let mut blocks = Vec::with_capacity(n);
        let mut c_in = config.c2;
        for (j, (&s, &k)) in config.strides.iter().zip(&kernels).enumerate() {
            let c_out = channels.stage_output(j);
            size = (size.0 * s, size.1 * s);
            blocks.push(BlockSpec {
                stage_index: j + 1,
                c_in,
                c_out,
                kernel_size: k,
                upscale: s,
                output_size: size,
                conv: ConvSpec::new(format!("dec.block{}", j + 1), c_in, c_out * s * s, k),
            });
            c_in = c_out;
        }
        if size != (config.frame_height, config.frame_width) {
            return Err(Error::config(format!(
                "decoder stage {n} produces {}x{}, expected {}x{}",
                size.0, size.1, config.frame_height, config.frame_width
            )));
        }
        let head = ConvSpec::new("dec.head", channels.head_input, 3, 3);
        Ok(DecoderSpec { embedding, kernels, channels, stem, blocks, head })
    }

    pub fn param_count(&self) -> usize {
        self.stem.param_count()
            + self.blocks.iter().map(BlockSpec::param_count).sum::<usize>()
            + self.head.param_count()
    }

    /// Parameter counts of the stem, each block, then the head.
    pub fn per_block_counts(&self) -> Vec<(String, usize)> {
        let mut out = vec![("stem".to_string(), self.stem.param_count())];
        out.extend(
            self.blocks
                .iter()
                .map(|b| (format!("block{}", b.stage_index), b.param_count())),
        );
        out.push(("head".to_string(), self.head.param_count()));
        out
    }

    fn layers(&self) -> impl Iterator<Item = &ConvSpec> {
        std::iter::once(&self.stem)
            .chain(self.blocks.iter().map(|b| &b.conv))
            .chain(std::iter::once(&self.head))
    }

    pub fn init(&self, seed: u64) -> ParamMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamMap::new();
        for layer in self.layers() {
            layer.init(&mut params, &mut rng);
        }
        params
    }

    /// Maps embeddings `[B, d, h, w]` to unclamped frames `[B, 3, H, W]`.
    pub fn forward<T: Real>(&self, tape: &mut Tape<T>, vars: &VarMap, embedding: Var) -> Result<Var> {
        let mut x = self.stem.apply(tape, vars, embedding)?;
        for b in &self.blocks {
            x = b.conv.apply(tape, vars, x)?;
            x = tape.pixel_shuffle(x, b.upscale)?;
            x = tape.gelu(x)?;
        }
        self.head.apply(tape, vars, x)
    }
}

/// One encoder stage: patchify conv then a ConvNeXt block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncoderStage {
    pub stride: usize,
    pub down: ConvSpec,
    pub dw: ConvSpec,
    pub norm: String,
    pub pw1: ConvSpec,
    pub pw2: ConvSpec,
    /// Spatial size after this stage.
    pub output_size: (usize, usize),
}

/// Encoder layout: stages in reversed stride order, then a 1×1 conv to `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct EncoderSpec {
    pub width: usize,
    pub stages: Vec<EncoderStage>,
    pub out: ConvSpec,
}

impl EncoderSpec {
    pub fn new(config: &HNeRVConfig) -> Result<Self> {
        config.validate()?;
        let c1 = config.c1;
        let mut size = (config.frame_height, config.frame_width);
        let mut c_prev = 3;
        let mut stages = Vec::new();
        for (i, &s) in config.strides.iter().rev().enumerate() {
            if size.0 % s != 0 || size.1 % s != 0 {
                return Err(Error::config(format!(
                    "encoder stage {}: {}x{} is not divisible by stride {s}",
                    i + 1,
                    size.0,
                    size.1
                )));
            }
            size = (size.0 / s, size.1 / s);
            let p = format!("enc.stage{}", i + 1);
            let mut down = ConvSpec::new(format!("{p}.down"), c_prev, c1, s);
            down.stride = s;
            down.padding = 0;
            let mut dw = ConvSpec::new(format!("{p}.dw"), c1, c1, ENCODER_DW_KERNEL);
            dw.groups = c1;
            stages.push(EncoderStage {
                stride: s,
                down,
                dw,
                norm: format!("{p}.norm"),
                pw1: ConvSpec::new(format!("{p}.pw1"), c1, ENCODER_EXPANSION * c1, 1),
                pw2: ConvSpec::new(format!("{p}.pw2"), ENCODER_EXPANSION * c1, c1, 1),
                output_size: size,
            });
            c_prev = c1;
        }
        let out = ConvSpec::new("enc.out", c1, config.d, 1);
        Ok(EncoderSpec { width: c1, stages, out })
    }

    pub fn param_count(&self) -> usize {
        self.stages
            .iter()
            .map(|s| {
                s.down.param_count()
                    + s.dw.param_count()
                    + 2 * self.width
                    + s.pw1.param_count()
                    + s.pw2.param_count()
            })
            .sum::<usize>()
            + self.out.param_count()
    }

    pub fn init(&self, seed: u64) -> ParamMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamMap::new();
        for s in &self.stages {
            s.down.init(&mut params, &mut rng);
            s.dw.init(&mut params, &mut rng);
            params.insert(format!("{}.weight", s.norm), Tensor::full(vec![self.width], 1.0));
            params.insert(format!("{}.bias", s.norm), Tensor::zeros(vec![self.width]));
            s.pw1.init(&mut params, &mut rng);
            s.pw2.init(&mut params, &mut rng);
        }
        self.out.init(&mut params, &mut rng);
        params
    }

    /// Maps frames `[B, 3, H, W]` to embeddings `[B, d, h, w]`.
    pub fn forward<T: Real>(&self, tape: &mut Tape<T>, vars: &VarMap, frames: Var) -> Result<Var> {
        let mut x = frames;
        for s in &self.stages {
            x = s.down.apply(tape, vars, x)?;
            let mut y = s.dw.apply(tape, vars, x)?;
            let gamma = vars.get(&format!("{}.weight", s.norm))?;
            let beta = vars.get(&format!("{}.bias", s.norm))?;
            y = tape.layer_norm(y, 1, gamma, beta, LAYER_NORM_EPS)?;
            y = s.pw1.apply(tape, vars, y)?;
            y = tape.gelu(y)?;
            y = s.pw2.apply(tape, vars, y)?;
            x = tape.add(x, y)?;
        }
        self.out.apply(tape, vars, x)
    }
}
