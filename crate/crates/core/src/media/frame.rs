use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Planar RGB frame with values in `[0, 1]`, stored channel-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameBuffer {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

/// Rounds to the nearest multiple of 1/255.
pub fn quantize_8bit(v: f32) -> f32 {
    to_u8(v) as f32 / 255.0
}

pub(crate) fn to_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

impl FrameBuffer {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::dim("frame", "height and width must be positive"));
        }
        if data.len() != 3 * height * width {
            return Err(Error::dim(
                "frame",
                format!("expected {} values for 3x{height}x{width}, got {}", 3 * height * width, data.len()),
            ));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::format(format!("frame value {v} outside [0, 1]")));
        }
        Ok(FrameBuffer { height, width, data })
    }

    pub fn filled(height: usize, width: usize, rgb: [f32; 3]) -> Result<Self> {
        let plane = height * width;
        Self::new(height, width, (0..3 * plane).map(|i| rgb[i / plane]).collect())
    }

    /// From a `[3, H, W]` or `[1, 3, H, W]` tensor, clamping to `[0, 1]`.
    pub fn from_tensor(t: &Tensor) -> Result<Self> {
        let s = t.shape();
        let (h, w) = match s {
            [3, h, w] | [1, 3, h, w] => (*h, *w),
            _ => return Err(Error::dim("frame", format!("tensor shape {s:?} is not an RGB frame"))),
        };
        if !t.all_finite() {
            return Err(Error::format("frame tensor contains non-finite values"));
        }
        Self::new(h, w, t.data().iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    /// As a `[1, 3, H, W]` tensor.
    pub fn to_tensor(&self) -> Tensor {
        Tensor::new(vec![1, 3, self.height, self.width], self.data.clone())
            .expect("frame geometry is consistent")
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    /// Interleaved 8-bit RGB.
    pub fn to_rgb8(&self) -> Vec<u8> {
        let n = self.height * self.width;
        let mut out = Vec::with_capacity(3 * n);
        for i in 0..n {
            for c in 0..3 {
                out.push(to_u8(self.data[c * n + i]));
            }
        }
        out
    }

    pub fn from_rgb8(height: usize, width: usize, rgb: &[u8]) -> Result<Self> {
        let n = height * width;
        if rgb.len() != 3 * n {
            return Err(Error::format(format!(
                "expected {} bytes of interleaved RGB, got {}",
                3 * n,
                rgb.len()
            )));
        }
        let mut data = vec![0.0; 3 * n];
        for i in 0..n {
            for c in 0..3 {
                data[c * n + i] = rgb[3 * i + c] as f32 / 255.0;
            }
        }
        Self::new(height, width, data)
    }

    pub fn center_crop(&self, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 || height > self.height || width > self.width {
            return Err(Error::usage(format!(
                "cannot crop {}x{} to {height}x{width}",
                self.height, self.width
            )));
        }
        let y0 = (self.height - height) / 2;
        let x0 = (self.width - width) / 2;
        let mut data = Vec::with_capacity(3 * height * width);
        for c in 0..3 {
            for y in 0..height {
                let row = (c * self.height + y0 + y) * self.width + x0;
                data.extend_from_slice(&self.data[row..row + width]);
            }
        }
        Self::new(height, width, data)
    }
}

/// Where a sequence came from.
#[derive(Clone, Debug, PartialEq)]
pub enum SourceDescriptor {
    Memory,
    Synthetic { kind: String, seed: u64 },
    ImageDirectory(PathBuf),
    RawStream(PathBuf),
}

/// Frames of one video, all of the same size.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSequence {
    height: usize,
    width: usize,
    frames: Vec<FrameBuffer>,
    pub source: SourceDescriptor,
}

impl FrameSequence {
    pub fn new(frames: Vec<FrameBuffer>, source: SourceDescriptor) -> Result<Self> {
        let first = frames
            .first()
            .ok_or_else(|| Error::usage("a frame sequence needs at least one frame"))?;
        let (height, width) = (first.height, first.width);
        if let Some((t, f)) = frames
            .iter()
            .enumerate()
            .find(|(_, f)| (f.height, f.width) != (height, width))
        {
            return Err(Error::dim(
                "sequence",
                format!("frame {t} is {}x{}, expected {height}x{width}", f.height, f.width),
            ));
        }
        Ok(FrameSequence { height, width, frames, source })
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn frames(&self) -> &[FrameBuffer] {
        &self.frames
    }

    pub fn frame(&self, t: usize) -> Result<&FrameBuffer> {
        self.frames
            .get(t)
            .ok_or_else(|| Error::usage(format!("frame {t} out of range for {} frames", self.len())))
    }

    pub fn pixels(&self) -> usize {
        self.len() * self.height * self.width
    }

    pub fn center_crop(&self, height: usize, width: usize) -> Result<Self> {
        let frames = self
            .frames
            .iter()
            .map(|f| f.center_crop(height, width))
            .collect::<Result<_>>()?;
        Self::new(frames, self.source.clone())
    }
}
