use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::bitstream::{Bitstream, ContainerKind, Layout, TensorPayload, TensorRecord};
use super::prune::{prune_global, PruneSpec};
use super::quant::{check_bits, dequantize, quantize};
use crate::arch::{ParamMap, VideoRepresentation};
use crate::error::{Error, Result};
use crate::media::bpp;
use crate::tensor::Tensor;
use crate::trainer::{finetune, FrameSource, OptimizerConfig, TrainLog, TrainPlan};

pub const EMBEDDINGS: &str = "embeddings";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompressOptions {
    pub prune: PruneSpec,
    pub model_bits: u8,
    pub embedding_bits: u8,
    /// Huffman-code tensors where it is smaller than fixed width.
    pub entropy: bool,
    /// Fine-tune learning rate as a fraction of the base rate.
    pub finetune_lr_scale: f64,
    pub workers: usize,
}

impl Default for CompressOptions {
    fn default() -> Self {
        CompressOptions {
            prune: PruneSpec::default(),
            model_bits: 8,
            embedding_bits: 8,
            entropy: true,
            finetune_lr_scale: 0.1,
            workers: 1,
        }
    }
}

impl CompressOptions {
    /// Plain 8-bit fixed-width quantization with no pruning.
    pub fn quant_only(bits: u8) -> Self {
        CompressOptions {
            prune: PruneSpec { sparsity: 0.0, finetune_epochs: 0 },
            model_bits: bits,
            embedding_bits: bits,
            entropy: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_bits(self.model_bits)?;
        check_bits(self.embedding_bits)?;
        if !(0.0..1.0).contains(&self.prune.sparsity) {
            return Err(Error::usage(format!("sparsity must be in [0, 1), got {}", self.prune.sparsity)));
        }
        if !(self.finetune_lr_scale > 0.0 && self.finetune_lr_scale.is_finite()) {
            return Err(Error::usage("fine-tune learning-rate scale must be positive"));
        }
        if self.workers == 0 {
            return Err(Error::usage("workers must be at least 1"));
        }
        Ok(())
    }
}

/// Training context for post-pruning fine-tuning.
pub struct Finetune<'a> {
    pub source: &'a dyn FrameSource,
    /// Base optimizer settings; epochs and learning rate are overridden.
    pub opt: OptimizerConfig,
    pub plan: TrainPlan,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorSize {
    pub name: String,
    pub shape: Vec<usize>,
    pub mode: &'static str,
    pub bits: Option<u8>,
    pub payload_bits: u64,
    pub record_bytes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeReport {
    pub tensors: Vec<TensorSize>,
    pub header_bytes: usize,
    pub checksum_bytes: usize,
    pub total_bytes: usize,
    pub bpp: f64,
}

impl SizeReport {
    pub fn new(bitstream: &Bitstream) -> Self {
        let Layout { header_bytes, record_bytes, checksum_bytes } = bitstream.layout();
        let total_bytes = header_bytes + record_bytes.iter().sum::<usize>() + checksum_bytes;
        let c = &bitstream.config;
        let tensors = bitstream
            .tensors
            .iter()
            .zip(record_bytes)
            .map(|(t, record_bytes)| TensorSize {
                name: t.name.clone(),
                shape: t.shape.clone(),
                mode: t.mode_name(),
                bits: t.quant_spec().map(|s| s.bits),
                payload_bits: t.payload_bits(),
                record_bytes,
            })
            .collect();
        SizeReport {
            tensors,
            header_bytes,
            checksum_bytes,
            total_bytes,
            bpp: bpp(8 * total_bytes as u64, bitstream.num_frames, c.frame_height, c.frame_width),
        }
    }

    pub fn total_bits(&self) -> u64 {
        8 * self.total_bytes as u64
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<28} {:>18} {:>8} {:>4} {:>12} {:>12}", "tensor", "shape", "mode", "bits", "payload_bits", "record_bytes");
        for t in &self.tensors {
            let bits = t.bits.map_or("-".to_string(), |b| b.to_string());
            let shape = t.shape.iter().map(ToString::to_string).collect::<Vec<_>>().join("x");
            let _ = writeln!(
                s,
                "{:<28} {:>18} {:>8} {:>4} {:>12} {:>12}",
                t.name, shape, t.mode, bits, t.payload_bits, t.record_bytes
            );
        }
        let _ = writeln!(s, "header_bytes={} checksum_bytes={}", self.header_bytes, self.checksum_bytes);
        let _ = writeln!(s, "total_bytes={} total_bits={} bpp={:.6}", self.total_bytes, self.total_bits(), self.bpp);
        s
    }
}

#[derive(Clone, Debug)]
pub struct Compressed {
    pub bitstream: Bitstream,
    pub bytes: Vec<u8>,
    /// Dequantized representation, built without going through the container.
    pub quantized: VideoRepresentation,
    pub pruned: usize,
    pub finetune: Option<TrainLog>,
    pub report: SizeReport,
}

struct Job<'a> {
    name: &'a str,
    tensor: &'a Tensor,
    bits: u8,
    include_zero: bool,
}

fn encode_tensors(jobs: &[Job], entropy: bool, workers: usize) -> Result<Vec<(TensorRecord, Vec<f32>)>> {
    let run = || {
        jobs.par_iter()
            .map(|j| {
                let (codes, spec) = quantize(j.tensor.data(), j.bits, j.include_zero)?;
                let record = TensorRecord::from_codes(j.name.to_string(), j.tensor.shape().to_vec(), &codes, spec, entropy)?;
                Ok((record, dequantize(&codes, &spec)))
            })
            .collect::<Result<Vec<_>>>()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::usage(format!("cannot start worker pool: {e}")))?;
    pool.install(run)
}

/// Prune, fine-tune, quantize and entropy-code `rep`.
///
/// Fine-tuning runs only when `finetune` is given, the sparsity is
/// positive and `prune.finetune_epochs > 0`.
pub fn compress(rep: &VideoRepresentation, options: &CompressOptions, finetune_ctx: Option<Finetune>) -> Result<Compressed> {
    options.validate()?;
    rep.validate()?;
    let sparsity = options.prune.sparsity;
    let (mut work, masks) = prune_global(rep, sparsity)?;
    let pruned = masks.pruned();
    let mut log = None;
    if sparsity > 0.0 && options.prune.finetune_epochs > 0 {
        if let Some(ctx) = finetune_ctx {
            let opt = OptimizerConfig {
                learning_rate: ctx.opt.learning_rate * options.finetune_lr_scale,
                epochs: options.prune.finetune_epochs,
                warmup_fraction: 0.0,
                ..ctx.opt
            };
            log = Some(finetune(&mut work, ctx.source, &masks, &opt, &ctx.plan, ctx.seed)?);
        }
    }

    let mut jobs = vec![Job { name: EMBEDDINGS, tensor: &work.embeddings, bits: options.embedding_bits, include_zero: false }];
    jobs.extend(work.decoder.iter().map(|(name, tensor)| Job {
        name,
        tensor,
        bits: options.model_bits,
        include_zero: sparsity > 0.0,
    }));
    let encoded = encode_tensors(&jobs, options.entropy, options.workers)?;

    let mut quantized = VideoRepresentation {
        config: work.config.clone(),
        encoder: None,
        decoder: ParamMap::new(),
        embeddings: work.embeddings.clone(),
        frame_ids: work.frame_ids.clone(),
        num_frames: work.num_frames,
    };
    let mut tensors = Vec::with_capacity(encoded.len());
    for (record, values) in encoded {
        let t = Tensor::new(record.shape.clone(), values)?;
        if record.name == EMBEDDINGS {
            quantized.embeddings = t;
        } else {
            quantized.decoder.insert(record.name.clone(), t);
        }
        tensors.push(record);
    }
    let bitstream = Bitstream {
        kind: ContainerKind::Compressed,
        config: work.config.clone(),
        num_frames: work.num_frames,
        frame_ids: work.frame_ids.clone(),
        tensors,
    };
    let bytes = bitstream.to_bytes();
    let report = SizeReport::new(&bitstream);
    Ok(Compressed { bitstream, bytes, quantized, pruned, finetune: log, report })
}

/// Rebuilds a representation from a compressed or checkpoint container.
pub fn representation_from(bitstream: &Bitstream) -> Result<VideoRepresentation> {
    let mut decoder = ParamMap::new();
    let mut encoder = ParamMap::new();
    let mut embeddings = None;
    for record in &bitstream.tensors {
        let t = Tensor::new(record.shape.clone(), record.values()?)?;
        let name = record.name.clone();
        let previous = if name == EMBEDDINGS {
            embeddings.replace(t).map(|_| ())
        } else if name.starts_with("dec.") {
            decoder.insert(name.clone(), t).map(|_| ())
        } else if name.starts_with("enc.") {
            if bitstream.kind == ContainerKind::Compressed {
                return Err(Error::format("compressed container carries encoder weights"));
            }
            encoder.insert(name.clone(), t).map(|_| ())
        } else {
            return Err(Error::format(format!("unknown tensor {name:?}")));
        };
        if previous.is_some() {
            return Err(Error::format(format!("tensor {name:?} appears twice")));
        }
    }
    let rep = VideoRepresentation {
        config: bitstream.config.clone(),
        encoder: (!encoder.is_empty()).then_some(encoder),
        decoder,
        embeddings: embeddings.ok_or_else(|| Error::format("container has no embeddings"))?,
        frame_ids: bitstream.frame_ids.clone(),
        num_frames: bitstream.num_frames,
    };
    rep.validate()?;
    Ok(rep)
}

pub fn decompress(bytes: &[u8]) -> Result<VideoRepresentation> {
    representation_from(&Bitstream::from_bytes(bytes)?)
}

/// Float container holding embeddings, decoder and, if present, encoder.
pub fn checkpoint_bitstream(rep: &VideoRepresentation) -> Result<Bitstream> {
    rep.validate()?;
    let float = |name: &str, t: &Tensor| TensorRecord {
        name: name.to_string(),
        shape: t.shape().to_vec(),
        payload: TensorPayload::Float32(t.data().to_vec()),
    };
    let mut tensors = vec![float(EMBEDDINGS, &rep.embeddings)];
    tensors.extend(rep.decoder.iter().map(|(n, t)| float(n, t)));
    if let Some(enc) = &rep.encoder {
        tensors.extend(enc.iter().map(|(n, t)| float(n, t)));
    }
    Ok(Bitstream {
        kind: ContainerKind::Checkpoint,
        config: rep.config.clone(),
        num_frames: rep.num_frames,
        frame_ids: rep.frame_ids.clone(),
        tensors,
    })
}

pub fn save_checkpoint(rep: &VideoRepresentation, path: &Path) -> Result<()> {
    std::fs::write(path, checkpoint_bitstream(rep)?.to_bytes())?;
    Ok(())
}

/// Reads either container kind.
pub fn load_representation(path: &Path) -> Result<VideoRepresentation> {
    decompress(&std::fs::read(path)?)
}

pub fn read_bitstream(path: &Path) -> Result<Bitstream> {
    Bitstream::from_bytes(&std::fs::read(path)?)
}
