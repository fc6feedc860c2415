use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::optim::{adam_step, AdamState, OptimizerConfig};
use crate::arch::{DecoderSpec, EncoderSpec, HNeRVConfig, ParamMap, ParamMasks, VideoRepresentation};
use crate::error::{Error, Result};
use crate::media::{psnr_from_mse, FrameBuffer, FrameSequence, MetricReport};
use crate::runtime::{encoder_forward, mask_frame, FrameDecoder};
use crate::tensor::{MaskTensor, Tape, Tensor};

/// Random-access frame provider for training and evaluation.
pub trait FrameSource: Sync {
    fn num_frames(&self) -> usize;
    /// `(height, width)`.
    fn frame_size(&self) -> (usize, usize);
    fn frame(&self, t: usize) -> Result<FrameBuffer>;
}

impl FrameSource for FrameSequence {
    fn num_frames(&self) -> usize {
        self.len()
    }

    fn frame_size(&self) -> (usize, usize) {
        (self.height(), self.width())
    }

    fn frame(&self, t: usize) -> Result<FrameBuffer> {
        FrameSequence::frame(self, t).cloned()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainMode {
    Full,
    /// Train on odd frame indices only; even frames are held out.
    HoldoutEvenFrames,
    /// Masked loss; masked pixels are also blanked in the encoder input.
    Inpainting,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    L2,
    L1,
}

/// Inpainting masks: 1 marks a distorted pixel.
#[derive(Clone, Debug, PartialEq)]
pub enum MaskSource {
    Shared(MaskTensor),
    PerFrame(Vec<MaskTensor>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainPlan {
    pub mode: TrainMode,
    pub masks: Option<MaskSource>,
    pub loss: LossKind,
}

impl Default for TrainPlan {
    fn default() -> Self {
        TrainPlan { mode: TrainMode::Full, masks: None, loss: LossKind::L2 }
    }
}

impl TrainPlan {
    pub fn holdout() -> Self {
        TrainPlan { mode: TrainMode::HoldoutEvenFrames, ..Default::default() }
    }

    pub fn inpainting(masks: MaskSource) -> Self {
        TrainPlan { mode: TrainMode::Inpainting, masks: Some(masks), loss: LossKind::L2 }
    }

    pub fn training_frames(&self, num_frames: usize) -> Vec<usize> {
        match self.mode {
            TrainMode::HoldoutEvenFrames => (1..num_frames).step_by(2).collect(),
            _ => (0..num_frames).collect(),
        }
    }

    pub fn mask_for(&self, t: usize) -> Option<&MaskTensor> {
        if self.mode != TrainMode::Inpainting {
            return None;
        }
        match self.masks.as_ref()? {
            MaskSource::Shared(m) => Some(m),
            MaskSource::PerFrame(v) => v.get(t),
        }
    }

    pub fn validate(&self, num_frames: usize, height: usize, width: usize) -> Result<()> {
        if self.mode != TrainMode::Inpainting {
            return Ok(());
        }
        if self.loss != LossKind::L2 {
            return Err(Error::config("inpainting mode uses the masked L2 loss"));
        }
        let masks: Vec<&MaskTensor> = match &self.masks {
            None => return Err(Error::config("inpainting mode needs masks")),
            Some(MaskSource::Shared(m)) => vec![m],
            Some(MaskSource::PerFrame(v)) => {
                if v.len() != num_frames {
                    return Err(Error::config(format!("{} masks for {num_frames} frames", v.len())));
                }
                v.iter().collect()
            }
        };
        if masks.iter().any(|m| m.bits().len() != height * width) {
            return Err(Error::config(format!("inpainting masks must be {height}x{width}")));
        }
        Ok(())
    }
}

/// One line of the training log.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub lr: f64,
    pub loss: f64,
    /// PSNR of the training predictions seen during the epoch.
    pub psnr: f64,
    /// Inpainting only: prediction gradients were exactly zero under the mask.
    pub mask_grad_zero: Option<bool>,
}

impl EpochRecord {
    pub fn to_line(&self) -> String {
        let mut s = format!(
            "epoch={} lr={:.6e} loss={:.8} psnr={:.6}",
            self.epoch, self.lr, self.loss, self.psnr
        );
        if let Some(z) = self.mask_grad_zero {
            let _ = write!(s, " mask_grad_zero={z}");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
    /// Mean PSNR of the final representation over its stored frames.
    pub final_psnr: f64,
    pub final_ms_ssim: f64,
}

impl TrainLog {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for r in &self.epochs {
            s.push_str(&r.to_line());
            s.push('\n');
        }
        let _ = writeln!(s, "final psnr={:.6} ms_ssim={:.6}", self.final_psnr, self.final_ms_ssim);
        s
    }
}

#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub representation: VideoRepresentation,
    pub log: TrainLog,
    pub report: MetricReport,
}

fn derive_seed(seed: u64, tag: u64) -> u64 {
    seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

struct Batch {
    input: Tensor,
    target: Tensor,
    mask: Option<MaskTensor>,
}

fn concat(frames: &[FrameBuffer]) -> Result<Tensor> {
    let (h, w) = (frames[0].height(), frames[0].width());
    let mut data = Vec::with_capacity(frames.len() * 3 * h * w);
    for f in frames {
        data.extend_from_slice(f.data());
    }
    Tensor::new(vec![frames.len(), 3, h, w], data)
}

fn load_batch(source: &dyn FrameSource, ids: &[usize], plan: &TrainPlan) -> Result<Batch> {
    let mut targets = Vec::with_capacity(ids.len());
    let mut inputs = Vec::with_capacity(ids.len());
    let mut bits = Vec::new();
    for &t in ids {
        let f = source.frame(t)?;
        match plan.mask_for(t) {
            Some(m) => {
                inputs.push(mask_frame(&f, m)?);
                bits.extend_from_slice(m.bits());
            }
            None => inputs.push(f.clone()),
        }
        targets.push(f);
    }
    let (h, w) = (targets[0].height(), targets[0].width());
    let mask = if plan.mode == TrainMode::Inpainting {
        Some(MaskTensor::new(vec![ids.len(), 1, h, w], bits)?)
    } else {
        None
    };
    Ok(Batch { input: concat(&inputs)?, target: concat(&targets)?, mask })
}

struct Model {
    enc_spec: EncoderSpec,
    dec_spec: DecoderSpec,
    encoder: ParamMap,
    decoder: ParamMap,
}

fn batch_mse(pred: &Tensor, target: &Tensor, mask: Option<&MaskTensor>) -> (f64, usize) {
    let plane: usize = pred.shape()[2..].iter().product();
    let mut sum = 0.0f64;
    let mut n = 0usize;
    for (i, (&p, &t)) in pred.data().iter().zip(target.data()).enumerate() {
        if let Some(m) = mask {
            let sample = i / (3 * plane);
            if m.bits()[sample * plane + i % plane] == 1 {
                continue;
            }
        }
        let d = p as f64 - t as f64;
        sum += d * d;
        n += 1;
    }
    (sum, n)
}

#[allow(clippy::too_many_arguments)]
fn run_epochs(
    model: &mut Model,
    source: &dyn FrameSource,
    train_ids: &[usize],
    opt: &OptimizerConfig,
    plan: &TrainPlan,
    seed: u64,
    prune: Option<&ParamMasks>,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<Vec<EpochRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 3));
    let mut enc_state = AdamState::new(&model.encoder);
    let mut dec_state = AdamState::new(&model.decoder);
    let mut records = Vec::with_capacity(opt.epochs);
    let mut order = train_ids.to_vec();
    for epoch in 0..opt.epochs {
        let lr = opt.lr_at(epoch);
        order.shuffle(&mut rng);
        let (mut loss_sum, mut sq_sum, mut sq_n) = (0.0f64, 0.0f64, 0usize);
        let mut mask_grad_zero = None;
        for (b, ids) in order.chunks(opt.batch_size).enumerate() {
            let batch = load_batch(source, ids, plan)?;
            let mut tape = Tape::new();
            let enc_vars = model.encoder.bind(&mut tape, true);
            let dec_vars = model.decoder.bind(&mut tape, true);
            let x = tape.constant(batch.input);
            let target = tape.constant(batch.target);
            let emb = model.enc_spec.forward(&mut tape, &enc_vars, x)?;
            let pred = model.dec_spec.forward(&mut tape, &dec_vars, emb)?;
            let loss = match (&batch.mask, plan.loss) {
                (Some(m), _) => tape.masked_mse_loss(pred, target, m)?,
                (None, LossKind::L2) => tape.mse_loss(pred, target)?,
                (None, LossKind::L1) => tape.l1_loss(pred, target)?,
            };
            let loss_value = tape.value(loss).data()[0] as f64;
            if !loss_value.is_finite() {
                return Err(Error::NonFinite { epoch: epoch + 1, batch: b + 1, lr });
            }
            tape.backward(loss)?;
            if b == 0 {
                if let Some(m) = &batch.mask {
                    let plane = m.bits().len() / ids.len();
                    let zero = tape.grad(pred).map_or(true, |g| {
                        g.iter().enumerate().all(|(i, &v)| {
                            let sample = i / (3 * plane);
                            m.bits()[sample * plane + i % plane] == 0 || v == 0.0
                        })
                    });
                    mask_grad_zero = Some(zero);
                }
            }
            let (s, n) = batch_mse(tape.value(pred), tape.value(target), batch.mask.as_ref());
            sq_sum += s;
            sq_n += n;
            loss_sum += loss_value * ids.len() as f64;
            let enc_grads = enc_vars.grads(&tape);
            let mut dec_grads = dec_vars.grads(&tape);
            drop(tape);
            if let Some(masks) = prune {
                masks.apply(&mut dec_grads)?;
            }
            adam_step(&mut model.encoder, &enc_grads, &mut enc_state, lr, opt)?;
            adam_step(&mut model.decoder, &dec_grads, &mut dec_state, lr, opt)?;
            if let Some(masks) = prune {
                masks.apply(&mut model.decoder)?;
            }
        }
        let record = EpochRecord {
            epoch: epoch + 1,
            lr,
            loss: loss_sum / order.len() as f64,
            psnr: if sq_n == 0 { f64::NAN } else { psnr_from_mse(sq_sum / sq_n as f64) },
            mask_grad_zero,
        };
        observer(&record);
        records.push(record);
    }
    Ok(records)
}

/// One encoder pass over `ids`, giving `[S, d, h, w]` embeddings.
fn materialize(model: &Model, source: &dyn FrameSource, ids: &[usize], plan: &TrainPlan, batch_size: usize) -> Result<Tensor> {
    let mut data = Vec::new();
    let mut shape = Vec::new();
    for chunk in ids.chunks(batch_size.max(1)) {
        let batch = load_batch(source, chunk, plan)?;
        let e = encoder_forward(&model.enc_spec, &model.encoder, batch.input)?;
        shape = e.shape()[1..].to_vec();
        data.extend(e.into_data());
    }
    let mut full = vec![ids.len()];
    full.extend(shape);
    Tensor::new(full, data)
}

/// Decodes every stored frame of `rep` and compares with `source`.
pub fn evaluate_regression(rep: &VideoRepresentation, source: &dyn FrameSource) -> Result<MetricReport> {
    if source.num_frames() != rep.num_frames {
        return Err(Error::usage(format!(
            "video has {} frames, representation has {}",
            source.num_frames(),
            rep.num_frames
        )));
    }
    let decoder = FrameDecoder::new(rep)?;
    let mut reference = Vec::with_capacity(rep.frame_ids.len());
    let mut decoded = Vec::with_capacity(rep.frame_ids.len());
    for &t in &rep.frame_ids {
        reference.push(source.frame(t)?);
        decoded.push(decoder.decode_frame(t)?);
    }
    MetricReport::evaluate(&rep.frame_ids, &reference, &decoded)
}

fn check_source(source: &dyn FrameSource, config: &HNeRVConfig) -> Result<()> {
    if source.num_frames() == 0 {
        return Err(Error::usage("video has no frames"));
    }
    if source.frame_size() != (config.frame_height, config.frame_width) {
        let (h, w) = source.frame_size();
        return Err(Error::config(format!(
            "video is {h}x{w}, configuration expects {}x{}",
            config.frame_height, config.frame_width
        )));
    }
    Ok(())
}

/// Fits encoder and decoder jointly, then stores one embedding per training frame.
pub fn fit(
    source: &dyn FrameSource,
    config: &HNeRVConfig,
    opt: &OptimizerConfig,
    plan: &TrainPlan,
    seed: u64,
) -> Result<FitOutcome> {
    fit_with_observer(source, config, opt, plan, seed, &mut |_| {})
}

pub fn fit_with_observer(
    source: &dyn FrameSource,
    config: &HNeRVConfig,
    opt: &OptimizerConfig,
    plan: &TrainPlan,
    seed: u64,
    observer: &mut dyn FnMut(&EpochRecord),
) -> Result<FitOutcome> {
    config.validate()?;
    opt.validate()?;
    check_source(source, config)?;
    let num_frames = source.num_frames();
    plan.validate(num_frames, config.frame_height, config.frame_width)?;
    let train_ids = plan.training_frames(num_frames);
    if train_ids.is_empty() {
        return Err(Error::usage("no frames to train on"));
    }
    let enc_spec = EncoderSpec::new(config)?;
    let dec_spec = DecoderSpec::new(config)?;
    let mut model = Model {
        encoder: enc_spec.init(derive_seed(seed, 2)),
        decoder: dec_spec.init(derive_seed(seed, 1)),
        enc_spec,
        dec_spec,
    };
    let epochs = run_epochs(&mut model, source, &train_ids, opt, plan, seed, None, observer)?;
    let embeddings = materialize(&model, source, &train_ids, plan, opt.batch_size)?;
    let representation = VideoRepresentation {
        config: config.clone(),
        encoder: Some(model.encoder),
        decoder: model.decoder,
        embeddings,
        frame_ids: train_ids,
        num_frames,
    };
    let report = evaluate_regression(&representation, source)?;
    Ok(FitOutcome {
        log: TrainLog { epochs, final_psnr: report.mean_psnr, final_ms_ssim: report.mean_ms_ssim },
        representation,
        report,
    })
}

/// Continues training with pruned weights pinned at zero, then refreshes
/// the stored embeddings. Needs the encoder.
pub fn finetune(
    rep: &mut VideoRepresentation,
    source: &dyn FrameSource,
    masks: &ParamMasks,
    opt: &OptimizerConfig,
    plan: &TrainPlan,
    seed: u64,
) -> Result<TrainLog> {
    opt.validate()?;
    check_source(source, &rep.config)?;
    if source.num_frames() != rep.num_frames {
        return Err(Error::usage("fine-tuning video differs in frame count"));
    }
    plan.validate(rep.num_frames, rep.config.frame_height, rep.config.frame_width)?;
    let encoder = rep
        .encoder
        .take()
        .ok_or_else(|| Error::Capability("fine-tuning needs the encoder".into()))?;
    let mut model = Model {
        enc_spec: rep.encoder_spec()?,
        dec_spec: rep.decoder_spec()?,
        encoder,
        decoder: rep.decoder.clone(),
    };
    masks.apply(&mut model.decoder)?;
    let ids = rep.frame_ids.clone();
    let result = run_epochs(&mut model, source, &ids, opt, plan, derive_seed(seed, 4), Some(masks), &mut |_| {});
    let epochs = match result {
        Ok(e) => e,
        Err(e) => {
            rep.encoder = Some(model.encoder);
            return Err(e);
        }
    };
    rep.embeddings = materialize(&model, source, &ids, plan, opt.batch_size)?;
    rep.decoder = model.decoder;
    rep.encoder = Some(model.encoder);
    let report = evaluate_regression(rep, source)?;
    Ok(TrainLog { epochs, final_psnr: report.mean_psnr, final_ms_ssim: report.mean_ms_ssim })
}
