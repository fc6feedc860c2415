//! Command-line front end of the `hnerv` binary.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::arch::{solve_width, HNeRVConfig, VideoRepresentation, PRESETS};
use crate::compression::{
    compress, load_representation, read_bitstream, save_checkpoint, CompressOptions, ContainerKind, Finetune,
    PruneSpec, SizeReport,
};
use crate::error::{Error, Result};
use crate::media::{
    bpp, generate_synthetic, list_png_frames, masked_psnr, parse_box_list, ppp, psnr, read_mask_png, read_sequence,
    write_png_dir, write_png_frames, write_raw, box_mask, FrameBuffer, FrameSequence, MetricReport,
    SourceDescriptor, SynthKind,
};
use crate::runtime::{compose_inpainting, decode_parallel, encode_frame, interpolate_embedding, mask_frame, DecodeRequest, FrameDecoder};
use crate::tensor::MaskTensor;
use crate::trainer::{evaluate_regression, fit_with_observer, LossKind, MaskSource, OptimizerConfig, TrainPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Exit code for an error: 1 usage, 2 data or format, 3 numeric failure.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Config(_) => EXIT_USAGE,
        Error::NonFinite { .. } => EXIT_NUMERIC,
        _ => EXIT_DATA,
    }
}

#[derive(Parser, Debug)]
#[command(name = "hnerv", version, about = "Hybrid neural video representation codec")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a representation to a video and write a float checkpoint.
    Train(TrainArgs),
    /// Prune, fine-tune, quantize and entropy-code a checkpoint.
    Compress(CompressArgs),
    /// Decode frames from a checkpoint or compressed file.
    Decode(DecodeArgs),
    /// Compare decoded frames against a reference video.
    Eval(EvalArgs),
    /// Reconstruct held-out frames by embedding interpolation and encoder pass.
    Interpolate(InterpolateArgs),
    /// Fit with a masked loss and fill the masked regions.
    Inpaint(InpaintArgs),
    /// Dump a container header and size accounting.
    Info(InfoArgs),
    /// Generate a synthetic test video.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone)]
struct ModelArgs {
    /// Architecture preset.
    #[arg(long, default_value = "desk", value_parser = clap::builder::PossibleValuesParser::new(PRESETS))]
    preset: String,
    /// Configuration file in key=value form; replaces the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    height: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    /// Decoder strides, comma separated, e.g. 5,4,4,2,2.
    #[arg(long, value_delimiter = ',')]
    strides: Option<Vec<usize>>,
    /// Embedding channels.
    #[arg(long)]
    d: Option<usize>,
    /// Encoder width.
    #[arg(long)]
    c1: Option<usize>,
    /// Decoder input width.
    #[arg(long)]
    c2: Option<usize>,
    /// Channel reduction factor.
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    ch_min: Option<usize>,
    #[arg(long)]
    k_min: Option<usize>,
    #[arg(long)]
    k_max: Option<usize>,
    /// Target total size (embedding values + decoder parameters).
    #[arg(long)]
    target_params: Option<u64>,
    /// Solve c2 from the target size for this video's frame count.
    #[arg(long)]
    solve_width: bool,
}

impl ModelArgs {
    fn build(&self, num_frames: usize) -> Result<HNeRVConfig> {
        let mut c = match &self.config {
            Some(path) => HNeRVConfig::from_text(&std::fs::read_to_string(path)?)?,
            None => HNeRVConfig::preset(&self.preset)?,
        };
        macro_rules! set {
            ($($field:ident => $target:ident),*) => {
                $(if let Some(v) = self.$field.clone() { c.$target = v; })*
            };
        }
        set!(height => frame_height, width => frame_width, strides => strides, d => d, c1 => c1, c2 => c2,
             r => r, ch_min => ch_min, k_min => k_min, k_max => k_max);
        if self.target_params.is_some() {
            c.target_params = self.target_params;
        }
        if self.solve_width {
            if self.c2.is_some() {
                return Err(Error::usage("--c2 and --solve-width are mutually exclusive"));
            }
            c.c2 = solve_width(&c, num_frames)?.c2;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args, Debug, Clone)]
struct OptArgs {
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0.9)]
    beta1: f64,
    #[arg(long, default_value_t = 0.999)]
    beta2: f64,
    #[arg(long, default_value_t = 1e-8)]
    eps: f64,
    #[arg(long, default_value_t = 0.0)]
    weight_decay: f64,
    #[arg(long, default_value_t = 300)]
    epochs: usize,
    #[arg(long, default_value_t = 2)]
    batch_size: usize,
    /// Fraction of epochs with linear warmup.
    #[arg(long, default_value_t = 0.0)]
    warmup: f64,
}

impl OptArgs {
    fn build(&self) -> Result<OptimizerConfig> {
        let o = OptimizerConfig {
            learning_rate: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            weight_decay: self.weight_decay,
            epochs: self.epochs,
            batch_size: self.batch_size,
            warmup_fraction: self.warmup,
        };
        o.validate()?;
        Ok(o)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Loss {
    L2,
    L1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FrameFormat {
    Png,
    Raw,
}

#[derive(Args, Debug)]
struct TrainArgs {
    /// Video: directory of frame_*.png or raw RGB8 stream with `.hdr`.
    #[arg(long)]
    input: PathBuf,
    /// Output checkpoint path.
    #[arg(long)]
    out: PathBuf,
    /// Also write the training log here.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Train on odd frames only; even frames are held out.
    #[arg(long)]
    holdout: bool,
    #[arg(long, value_enum, default_value_t = Loss::L2)]
    loss: Loss,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    opt: OptArgs,
}

#[derive(Args, Debug)]
struct CompressArgs {
    /// Float checkpoint from `train`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Source video for fine-tuning after pruning; fine-tuning is skipped without it.
    #[arg(long)]
    video: Option<PathBuf>,
    /// Fraction of decoder parameters pruned.
    #[arg(long, default_value_t = 0.10)]
    sparsity: f64,
    #[arg(long, default_value_t = 30)]
    finetune_epochs: usize,
    /// Fine-tune learning rate as a fraction of --lr.
    #[arg(long, default_value_t = 0.1)]
    finetune_lr_scale: f64,
    /// Quantization bits for decoder weights.
    #[arg(long, default_value_t = 8)]
    bits: u8,
    /// Quantization bits for embeddings.
    #[arg(long, default_value_t = 8)]
    embed_bits: u8,
    /// Store fixed-width codes only.
    #[arg(long)]
    no_entropy: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[command(flatten)]
    opt: OptArgs,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output directory (png) or file (raw).
    #[arg(long)]
    out: PathBuf,
    /// Frame indices, comma separated; all stored frames by default.
    #[arg(long, value_delimiter = ',')]
    frames: Option<Vec<usize>>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = FrameFormat::Png)]
    format: FrameFormat,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    input: PathBuf,
    /// Reference video.
    #[arg(long)]
    video: PathBuf,
    /// Also write the machine-readable records here.
    #[arg(long)]
    records: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InterpolateArgs {
    /// Checkpoint trained with --holdout.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    video: PathBuf,
    /// Write reconstructions to `<out>/interp` and `<out>/encoder`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InpaintArgs {
    /// Distortion-free video; masks are applied to it.
    #[arg(long)]
    input: PathBuf,
    /// Directory for composed frames.
    #[arg(long)]
    out: PathBuf,
    /// Box list file, `x y w h` per line, shared by all frames.
    #[arg(long, conflicts_with = "masks")]
    boxes: Option<PathBuf>,
    /// Directory of per-frame binary masks named frame_*.png.
    #[arg(long)]
    masks: Option<PathBuf>,
    /// Also save the fitted checkpoint.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    opt: OptArgs,
}

#[derive(Args, Debug)]
struct InfoArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, value_parser = parse_kind, default_value = "bouncing_shapes")]
    kind: SynthKind,
    #[arg(long, default_value_t = 16)]
    frames: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 128)]
    width: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory (png) or file (raw).
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FrameFormat::Png)]
    format: FrameFormat,
}

fn parse_kind(s: &str) -> std::result::Result<SynthKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Runs the CLI with `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run`], writing reports to `out` and diagnostics to `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Train(a) => train(a, out),
        Command::Compress(a) => compress_cmd(a, out),
        Command::Decode(a) => decode(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Interpolate(a) => interpolate(a, out),
        Command::Inpaint(a) => inpaint(a, out),
        Command::Info(a) => info(a, out),
        Command::Synth(a) => synth(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn train(a: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let video = read_sequence(&a.input)?;
    let config = a.model.build(video.len())?;
    let opt = a.opt.build()?;
    let mut plan = if a.holdout { TrainPlan::holdout() } else { TrainPlan::default() };
    plan.loss = match a.loss {
        Loss::L2 => LossKind::L2,
        Loss::L1 => LossKind::L1,
    };
    let mut io_error = None;
    let outcome = fit_with_observer(&video, &config, &opt, &plan, a.seed, &mut |r| {
        if io_error.is_none() {
            io_error = writeln!(out, "{}", r.to_line()).err();
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    save_checkpoint(&outcome.representation, &a.out)?;
    if let Some(path) = &a.log {
        std::fs::write(path, outcome.log.to_text())?;
    }
    let last = outcome.log.to_text();
    emit(out, last.lines().last().map(|l| format!("{l}\n")).as_deref().unwrap_or(""))?;
    emit(out, &format!("checkpoint={} total_size={}\n", a.out.display(), outcome.representation.total_size()))
}

fn finetune_plan(rep: &VideoRepresentation) -> TrainPlan {
    if rep.frame_ids == TrainPlan::holdout().training_frames(rep.num_frames) && rep.frame_ids.len() < rep.num_frames {
        TrainPlan::holdout()
    } else {
        TrainPlan::default()
    }
}

fn compress_cmd(a: CompressArgs, out: &mut dyn Write) -> Result<()> {
    let rep = load_representation(&a.input)?;
    let options = CompressOptions {
        prune: PruneSpec { sparsity: a.sparsity, finetune_epochs: a.finetune_epochs },
        model_bits: a.bits,
        embedding_bits: a.embed_bits,
        entropy: !a.no_entropy,
        finetune_lr_scale: a.finetune_lr_scale,
        workers: a.workers,
    };
    let opt = a.opt.build()?;
    let video = a.video.as_deref().map(read_sequence).transpose()?;
    let ctx = video.as_ref().map(|v| Finetune { source: v, opt: opt.clone(), plan: finetune_plan(&rep), seed: a.seed });
    if ctx.is_none() && a.sparsity > 0.0 && a.finetune_epochs > 0 {
        emit(out, "note: no --video given, fine-tuning skipped\n")?;
    }
    let c = compress(&rep, &options, ctx)?;
    std::fs::write(&a.out, &c.bytes)?;
    emit(out, &c.report.to_text())?;
    let mut line = format!("compress pruned={} bytes={} bpp={:.6}", c.pruned, c.bytes.len(), c.report.bpp);
    if let Some(log) = &c.finetune {
        let _ = write!(line, " finetune_psnr={:.6}", log.final_psnr);
    }
    if let Some(v) = &video {
        let _ = write!(line, " psnr={:.6}", evaluate_regression(&c.quantized, v)?.mean_psnr);
    }
    emit(out, &format!("{line}\n"))
}

fn decode(a: DecodeArgs, out: &mut dyn Write) -> Result<()> {
    let rep = load_representation(&a.input)?;
    let frames = a.frames.unwrap_or_else(|| rep.frame_ids.clone());
    let decoded = decode_parallel(&rep, &DecodeRequest { frames, workers: a.workers })?;
    let (ids, buffers): (Vec<usize>, Vec<FrameBuffer>) = decoded.frames.into_iter().unzip();
    match a.format {
        FrameFormat::Png => {
            write_png_frames(&buffers, &ids, &a.out)?;
        }
        FrameFormat::Raw => write_raw(&FrameSequence::new(buffers, SourceDescriptor::Memory)?, &a.out)?,
    }
    emit(out, &format!("{}\n", decoded.report.to_line()))
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let bitstream = read_bitstream(&a.input)?;
    let rep = crate::compression::representation_from(&bitstream)?;
    let video = read_sequence(&a.video)?;
    let mut report = evaluate_regression(&rep, &video)?;
    let (h, w) = (rep.config.frame_height, rep.config.frame_width);
    if bitstream.kind == ContainerKind::Compressed {
        let bytes = std::fs::metadata(&a.input)?.len();
        report.bpp = Some(bpp(8 * bytes, rep.num_frames, h, w));
    }
    report.ppp = Some(ppp(rep.total_size(), rep.num_frames, h, w));
    let records = report.to_records();
    if let Some(path) = &a.records {
        std::fs::write(path, &records)?;
    }
    emit(out, &report.to_table())?;
    emit(out, &records)
}

fn interpolate(a: InterpolateArgs, out: &mut dyn Write) -> Result<()> {
    let rep = load_representation(&a.input)?;
    let video = read_sequence(&a.video)?;
    if video.len() != rep.num_frames {
        return Err(Error::usage(format!("video has {} frames, representation has {}", video.len(), rep.num_frames)));
    }
    let held: Vec<usize> = (0..rep.num_frames).filter(|&t| rep.stored_row(t).is_none()).collect();
    if held.is_empty() {
        return Err(Error::usage("representation has no held-out frames; train with --holdout"));
    }
    let decoder = FrameDecoder::new(&rep)?;
    let (mut interp_frames, mut enc_frames, mut reference) = (Vec::new(), Vec::new(), Vec::new());
    for &t in &held {
        let truth = video.frame(t)?.clone();
        interp_frames.push(decoder.decode_embedding(&interpolate_embedding(&rep, t)?)?);
        if rep.encoder.is_some() {
            enc_frames.push(decoder.decode_embedding(&encode_frame(&rep, &truth)?)?);
        }
        reference.push(truth);
    }
    let interp = MetricReport::evaluate(&held, &reference, &interp_frames)?;
    let enc = if enc_frames.is_empty() { None } else { Some(MetricReport::evaluate(&held, &reference, &enc_frames)?) };
    let mut s = format!("{:>6}  {:>12}  {:>12}\n", "frame", "interp(dB)", "encoder(dB)");
    for (i, t) in held.iter().enumerate() {
        let e = enc.as_ref().map_or("-".to_string(), |r| format!("{:.3}", r.psnr[i]));
        let _ = writeln!(s, "{t:>6}  {:>12.3}  {e:>12}", interp.psnr[i]);
    }
    let _ = write!(s, "interpolate heldout={} interp_psnr={:.6} interp_ms_ssim={:.6}", held.len(), interp.mean_psnr, interp.mean_ms_ssim);
    if let Some(r) = &enc {
        let _ = write!(s, " encoder_psnr={:.6} encoder_ms_ssim={:.6}", r.mean_psnr, r.mean_ms_ssim);
    }
    s.push('\n');
    if let Some(dir) = &a.out {
        write_png_frames(&interp_frames, &held, &dir.join("interp"))?;
        if !enc_frames.is_empty() {
            write_png_frames(&enc_frames, &held, &dir.join("encoder"))?;
        }
    }
    emit(out, &s)
}

fn load_masks(a: &InpaintArgs, video: &FrameSequence) -> Result<MaskSource> {
    let (h, w) = (video.height(), video.width());
    match (&a.boxes, &a.masks) {
        (Some(path), None) => {
            let boxes = parse_box_list(&std::fs::read_to_string(path)?)?;
            Ok(MaskSource::Shared(box_mask(h, w, &boxes)))
        }
        (None, Some(dir)) => {
            let files = list_png_frames(dir)?;
            if files.len() != video.len() || files.iter().enumerate().any(|(i, (t, _))| *t != i) {
                return Err(Error::usage(format!("{} needs frame_*.png masks for frames 0..{}", dir.display(), video.len())));
            }
            let masks = files.iter().map(|(_, p)| read_mask_png(p, h, w)).collect::<Result<Vec<_>>>()?;
            Ok(MaskSource::PerFrame(masks))
        }
        _ => Err(Error::usage("inpaint needs --boxes or --masks")),
    }
}

fn inpaint(a: InpaintArgs, out: &mut dyn Write) -> Result<()> {
    let video = read_sequence(&a.input)?;
    let config = a.model.build(video.len())?;
    let opt = a.opt.build()?;
    let masks = load_masks(&a, &video)?;
    let plan = TrainPlan::inpainting(masks);
    let mut io_error = None;
    let outcome = fit_with_observer(&video, &config, &opt, &plan, a.seed, &mut |r| {
        if io_error.is_none() {
            io_error = writeln!(out, "{}", r.to_line()).err();
        }
    })?;
    if let Some(e) = io_error {
        return Err(e.into());
    }
    let rep = &outcome.representation;
    if let Some(path) = &a.checkpoint {
        save_checkpoint(rep, path)?;
    }
    let decoder = FrameDecoder::new(rep)?;
    let mut composed = Vec::with_capacity(video.len());
    let (mut input_sum, mut output_sum) = (0.0, 0.0);
    let mut s = String::new();
    for t in 0..video.len() {
        let mask: &MaskTensor = plan.mask_for(t).expect("inpainting plan has masks");
        let truth = video.frame(t)?;
        let masked = mask_frame(truth, mask)?;
        let filled = compose_inpainting(&masked, mask, &decoder.decode_frame(t)?)?;
        let (pi, po) = (masked_psnr(&masked, truth, mask)?, masked_psnr(&filled, truth, mask)?);
        let _ = writeln!(s, "inpaint frame={t} input_psnr={pi:.6} output_psnr={po:.6} full_psnr={:.6}", psnr(&filled, truth)?);
        input_sum += pi;
        output_sum += po;
        composed.push(filled);
    }
    write_png_dir(&FrameSequence::new(composed, SourceDescriptor::Memory)?, &a.out)?;
    let n = video.len() as f64;
    let _ = writeln!(s, "inpaint summary input_masked_psnr={:.6} output_masked_psnr={:.6}", input_sum / n, output_sum / n);
    emit(out, &s)
}

fn info(a: InfoArgs, out: &mut dyn Write) -> Result<()> {
    let bitstream = read_bitstream(&a.input)?;
    let file_bytes = std::fs::metadata(&a.input)?.len() as usize;
    let report = SizeReport::new(&bitstream);
    let c = &bitstream.config;
    let kind = match bitstream.kind {
        ContainerKind::Compressed => "compressed",
        ContainerKind::Checkpoint => "checkpoint",
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        "container kind={kind} version={} frames={} stored={} tensors={} file_bytes={file_bytes}",
        crate::compression::VERSION,
        bitstream.num_frames,
        bitstream.frame_ids.len(),
        bitstream.tensors.len()
    );
    s.push_str("config:\n");
    for line in c.to_text().lines() {
        let _ = writeln!(s, "  {line}");
    }
    s.push_str(&report.to_text());
    let record_sum: usize = report.tensors.iter().map(|t| t.record_bytes).sum();
    let _ = writeln!(s, "accounting header+records+checksum={} file={}", report.header_bytes + record_sum + report.checksum_bytes, file_bytes);
    let spec = crate::arch::DecoderSpec::new(c)?;
    let total = spec.param_count() as f64;
    s.push_str("decoder blocks:\n");
    for (name, n) in spec.per_block_counts() {
        let _ = writeln!(s, "  block name={name} params={n} share={:.6}", n as f64 / total);
    }
    let _ = writeln!(s, "decoder params={} total_size={}", spec.param_count(), spec.param_count() + bitstream.tensors.iter().filter(|t| t.name == crate::compression::EMBEDDINGS).map(|t| t.len()).sum::<usize>());
    emit(out, &s)
}

fn synth(a: SynthArgs, out: &mut dyn Write) -> Result<()> {
    let seq = generate_synthetic(a.kind, a.frames, a.height, a.width, a.seed)?;
    match a.format {
        FrameFormat::Png => {
            write_png_dir(&seq, &a.out)?;
        }
        FrameFormat::Raw => write_raw(&seq, &a.out)?,
    }
    emit(out, &format!("synth kind={} frames={} height={} width={} seed={} out={}\n", a.kind, a.frames, a.height, a.width, a.seed, a.out.display()))
}
