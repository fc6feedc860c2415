//! Random-access and parallel frame decoding.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rayon::prelude::*;

use crate::arch::{DecoderSpec, EncoderSpec, ParamMap, VideoRepresentation};
use crate::error::{Error, Result};
use crate::media::FrameBuffer;
use crate::tensor::{MaskTensor, Tape, Tensor};

/// Decodes frames of one representation and counts decoder forward passes.
pub struct FrameDecoder<'a> {
    rep: &'a VideoRepresentation,
    spec: DecoderSpec,
    forward_passes: AtomicUsize,
}

/// Frames to decode and the number of worker threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeRequest {
    pub frames: Vec<usize>,
    pub workers: usize,
}

impl DecodeRequest {
    pub fn all(num_frames: usize, workers: usize) -> Self {
        DecodeRequest { frames: (0..num_frames).collect(), workers }
    }

    pub fn validate(&self, num_frames: usize) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::usage("worker count must be positive"));
        }
        let mut seen = HashSet::new();
        for &t in &self.frames {
            if t >= num_frames {
                return Err(Error::usage(format!("frame {t} out of range for {num_frames} frames")));
            }
            if !seen.insert(t) {
                return Err(Error::usage(format!("frame {t} requested twice")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingReport {
    pub frames: usize,
    pub workers: usize,
    pub wall_seconds: f64,
    pub forward_passes: usize,
}

impl TimingReport {
    pub fn frames_per_second(&self) -> f64 {
        if self.wall_seconds > 0.0 {
            self.frames as f64 / self.wall_seconds
        } else {
            f64::INFINITY
        }
    }

    pub fn to_line(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "decode frames={} workers={} wall_seconds={:.6} fps={:.3} forward_passes={}",
            self.frames,
            self.workers,
            self.wall_seconds,
            self.frames_per_second(),
            self.forward_passes
        );
        s
    }
}

/// Decoded frames in request order plus timing.
#[derive(Clone, Debug)]
pub struct DecodeOutput {
    pub frames: Vec<(usize, FrameBuffer)>,
    pub report: TimingReport,
}

/// Runs the decoder on `[B, d, h, w]` embeddings and returns unclamped frames.
pub fn decoder_forward(spec: &DecoderSpec, decoder: &ParamMap, embeddings: Tensor) -> Result<Tensor> {
    let mut tape = Tape::new();
    let vars = decoder.bind(&mut tape, false);
    let e = tape.constant(embeddings);
    let out = spec.forward(&mut tape, &vars, e)?;
    Ok(tape.value(out).clone())
}

impl<'a> FrameDecoder<'a> {
    pub fn new(rep: &'a VideoRepresentation) -> Result<Self> {
        Ok(FrameDecoder { rep, spec: rep.decoder_spec()?, forward_passes: AtomicUsize::new(0) })
    }

    pub fn forward_passes(&self) -> usize {
        self.forward_passes.load(Ordering::Relaxed)
    }

    /// Decodes one `[1, d, h, w]` embedding to a clamped frame.
    pub fn decode_embedding(&self, embedding: &Tensor) -> Result<FrameBuffer> {
        let e = self.rep.config.embedding_spec();
        if embedding.shape() != [1, e.channels, e.height, e.width] {
            return Err(Error::dim(
                "decode",
                format!("embedding shape {:?} does not match [1, {}, {}, {}]", embedding.shape(), e.channels, e.height, e.width),
            ));
        }
        self.forward_passes.fetch_add(1, Ordering::Relaxed);
        let out = decoder_forward(&self.spec, &self.rep.decoder, embedding.clone())?;
        FrameBuffer::from_tensor(&out)
    }

    pub fn decode_frame(&self, t: usize) -> Result<FrameBuffer> {
        self.decode_embedding(&self.rep.embedding(t)?)
    }

    pub fn decode_parallel(&self, request: &DecodeRequest) -> Result<DecodeOutput> {
        request.validate(self.rep.num_frames)?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(request.workers)
            .build()
            .map_err(|e| Error::usage(format!("cannot start {} workers: {e}", request.workers)))?;
        let before = self.forward_passes();
        let start = Instant::now();
        let frames = pool.install(|| {
            request
                .frames
                .par_iter()
                .map(|&t| self.decode_frame(t).map(|f| (t, f)))
                .collect::<Result<Vec<_>>>()
        })?;
        let wall_seconds = start.elapsed().as_secs_f64();
        Ok(DecodeOutput {
            report: TimingReport {
                frames: frames.len(),
                workers: request.workers,
                wall_seconds,
                forward_passes: self.forward_passes() - before,
            },
            frames,
        })
    }
}

pub fn decode_frame(rep: &VideoRepresentation, t: usize) -> Result<FrameBuffer> {
    FrameDecoder::new(rep)?.decode_frame(t)
}

pub fn decode_parallel(rep: &VideoRepresentation, request: &DecodeRequest) -> Result<DecodeOutput> {
    FrameDecoder::new(rep)?.decode_parallel(request)
}

/// Midpoint of the stored neighbours `t - 1` and `t + 1`; a single stored
/// neighbour is copied.
pub fn interpolate_embedding(rep: &VideoRepresentation, t: usize) -> Result<Tensor> {
    if t >= rep.num_frames {
        return Err(Error::usage(format!("frame {t} out of range for {} frames", rep.num_frames)));
    }
    let prev = t.checked_sub(1).filter(|&p| rep.stored_row(p).is_some());
    let next = Some(t + 1).filter(|&n| n < rep.num_frames && rep.stored_row(n).is_some());
    match (prev, next) {
        (Some(p), Some(n)) => {
            let a = rep.embedding(p)?;
            let b = rep.embedding(n)?;
            let data = a.data().iter().zip(b.data()).map(|(&x, &y)| 0.5 * (x + y)).collect();
            Tensor::new(a.shape().to_vec(), data)
        }
        (Some(p), None) => rep.embedding(p),
        (None, Some(n)) => rep.embedding(n),
        (None, None) => Err(Error::usage(format!("frame {t} has no stored neighbour to interpolate from"))),
    }
}

/// Encoder forward on `[B, 3, H, W]` frames.
pub fn encoder_forward(spec: &EncoderSpec, encoder: &ParamMap, frames: Tensor) -> Result<Tensor> {
    let mut tape = Tape::new();
    let vars = encoder.bind(&mut tape, false);
    let x = tape.constant(frames);
    let out = spec.forward(&mut tape, &vars, x)?;
    Ok(tape.value(out).clone())
}

/// Embedding of an arbitrary frame through the retained encoder, `[1, d, h, w]`.
pub fn encode_frame(rep: &VideoRepresentation, frame: &FrameBuffer) -> Result<Tensor> {
    let encoder = rep
        .encoder
        .as_ref()
        .ok_or_else(|| Error::Capability("representation carries no encoder".into()))?;
    if (frame.height(), frame.width()) != (rep.config.frame_height, rep.config.frame_width) {
        return Err(Error::dim(
            "encode",
            format!(
                "frame is {}x{}, model expects {}x{}",
                frame.height(),
                frame.width(),
                rep.config.frame_height,
                rep.config.frame_width
            ),
        ));
    }
    encoder_forward(&rep.encoder_spec()?, encoder, frame.to_tensor())
}

fn mask_plane<'m>(mask: &'m MaskTensor, frame: &FrameBuffer) -> Result<&'m [u8]> {
    let plane = frame.height() * frame.width();
    if mask.bits().len() != plane {
        return Err(Error::dim("mask", "mask does not match the frame size"));
    }
    Ok(mask.bits())
}

/// `(1 - M) * original + M * decoded` with a single-plane mask.
pub fn compose_inpainting(original: &FrameBuffer, mask: &MaskTensor, decoded: &FrameBuffer) -> Result<FrameBuffer> {
    if (original.height(), original.width()) != (decoded.height(), decoded.width()) {
        return Err(Error::dim("compose", "original and decoded frames differ in size"));
    }
    let bits = mask_plane(mask, original)?;
    let plane = bits.len();
    let data = (0..3 * plane)
        .map(|i| if bits[i % plane] == 1 { decoded.data()[i] } else { original.data()[i] })
        .collect();
    FrameBuffer::new(original.height(), original.width(), data)
}

/// Copy of `frame` with masked pixels set to 0.
pub fn mask_frame(frame: &FrameBuffer, mask: &MaskTensor) -> Result<FrameBuffer> {
    let bits = mask_plane(mask, frame)?;
    let plane = bits.len();
    let data = frame
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| if bits[i % plane] == 1 { 0.0 } else { v })
        .collect();
    FrameBuffer::new(frame.height(), frame.width(), data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arch::HNeRVConfig;

    fn tiny_rep(stored: Vec<usize>, num_frames: usize) -> VideoRepresentation {
        let mut config = HNeRVConfig::preset("desk").unwrap();
        config.frame_height = 32;
        config.frame_width = 32;
        config.strides = vec![2, 2, 2];
        config.c2 = 8;
        let e = config.embedding_spec();
        let n = stored.len();
        let embeddings = Tensor::from_fn(vec![n, e.channels, e.height, e.width], |i| (i / e.values_per_frame()) as f32 * 0.1);
        VideoRepresentation {
            decoder: DecoderSpec::new(&config).unwrap().init(1),
            encoder: None,
            config,
            embeddings,
            frame_ids: stored,
            num_frames,
        }
    }

    #[test]
    fn interpolation_rules() {
        let rep = tiny_rep(vec![0, 2, 4], 6);
        let mid = interpolate_embedding(&rep, 1).unwrap();
        let (a, b) = (rep.embedding(0).unwrap(), rep.embedding(2).unwrap());
        for ((m, x), y) in mid.data().iter().zip(a.data()).zip(b.data()) {
            assert_eq!(*m, 0.5 * (x + y));
        }
        assert_eq!(interpolate_embedding(&rep, 5).unwrap(), rep.embedding(4).unwrap());
        let sparse = tiny_rep(vec![0], 4);
        assert!(matches!(interpolate_embedding(&sparse, 3), Err(Error::Usage(_))));
        assert!(interpolate_embedding(&rep, 6).is_err());
    }

    #[test]
    fn encoder_absent_is_capability_error() {
        let rep = tiny_rep(vec![0], 1);
        let f = FrameBuffer::filled(32, 32, [0.5; 3]).unwrap();
        assert!(matches!(encode_frame(&rep, &f), Err(Error::Capability(_))));
    }

    #[test]
    fn request_validation() {
        assert!(DecodeRequest { frames: vec![0, 0], workers: 1 }.validate(2).is_err());
        assert!(DecodeRequest { frames: vec![2], workers: 1 }.validate(2).is_err());
        assert!(DecodeRequest { frames: vec![1], workers: 0 }.validate(2).is_err());
    }

    #[test]
    fn compose_extremes() {
        let o = FrameBuffer::filled(4, 4, [0.2, 0.4, 0.6]).unwrap();
        let d = FrameBuffer::filled(4, 4, [0.9, 0.8, 0.7]).unwrap();
        assert_eq!(compose_inpainting(&o, &MaskTensor::zeros(vec![1, 1, 4, 4]), &d).unwrap(), o);
        assert_eq!(compose_inpainting(&o, &MaskTensor::ones(vec![1, 1, 4, 4]), &d).unwrap(), d);
        let m = mask_frame(&o, &MaskTensor::ones(vec![1, 1, 4, 4])).unwrap();
        assert!(m.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn decoding_is_pure_and_counted() {
        let rep = tiny_rep(vec![0, 1, 2, 3], 4);
        let dec = FrameDecoder::new(&rep).unwrap();
        let a = dec.decode_frame(2).unwrap();
        dec.decode_frame(0).unwrap();
        assert_eq!(dec.decode_frame(2).unwrap(), a);
        assert_eq!(dec.forward_passes(), 3);
        let out = dec.decode_parallel(&DecodeRequest { frames: vec![3, 1], workers: 2 }).unwrap();
        assert_eq!(out.report.forward_passes, 2);
        assert_eq!(out.frames[0].0, 3);
        assert_eq!(out.frames[0].1, dec.decode_frame(3).unwrap());
    }
}
