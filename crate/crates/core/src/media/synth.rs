use std::f32::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::frame::{quantize_8bit, FrameBuffer, FrameSequence, SourceDescriptor};
use crate::error::{Error, Result};

/// Synthetic video content.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthKind {
    /// A static textured scene.
    Constant,
    /// A smooth colour pattern drifting slowly across the frame.
    MovingGradient,
    /// Solid shapes moving fast over a gradient background.
    BouncingShapes,
}

impl SynthKind {
    pub const ALL: [SynthKind; 3] = [SynthKind::Constant, SynthKind::MovingGradient, SynthKind::BouncingShapes];

    pub fn name(self) -> &'static str {
        match self {
            SynthKind::Constant => "constant",
            SynthKind::MovingGradient => "moving_gradient",
            SynthKind::BouncingShapes => "bouncing_shapes",
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SynthKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::usage(format!("unknown synthetic kind {s:?}")))
    }
}

struct Shape {
    round: bool,
    half: [f32; 2],
    pos: [f32; 2],
    vel: [f32; 2],
    color: [f32; 3],
}

fn background(rng: &mut ChaCha8Rng) -> impl Fn(usize, f32, f32) -> f32 {
    let phase: [f32; 3] = [rng.gen::<f32>() * 2.0 * PI, rng.gen::<f32>() * 2.0 * PI, rng.gen::<f32>() * 2.0 * PI];
    let fx: f32 = rng.gen_range(0.6..1.4);
    let fy: f32 = rng.gen_range(0.6..1.4);
    move |c, u, v| 0.5 + 0.35 * (2.0 * PI * (fx * u + fy * v * (1.0 + 0.3 * c as f32)) + phase[c]).sin()
}

/// Deterministic synthetic frames on the 8-bit grid.
pub fn generate_synthetic(kind: SynthKind, frames: usize, height: usize, width: usize, seed: u64) -> Result<FrameSequence> {
    if frames == 0 || height == 0 || width == 0 {
        return Err(Error::usage("synthetic video needs positive T, H and W"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bg = background(&mut rng);
    let (hf, wf) = (height as f32, width as f32);
    let mut shapes: Vec<Shape> = Vec::new();
    if kind == SynthKind::BouncingShapes {
        for i in 0..3 {
            let half = [rng.gen_range(0.08..0.16) * hf, rng.gen_range(0.05..0.1) * wf];
            let speed = rng.gen_range(0.05..0.09) * hf;
            let angle: f32 = rng.gen::<f32>() * 2.0 * PI;
            shapes.push(Shape {
                round: i % 2 == 0,
                half,
                pos: [rng.gen_range(half[0]..hf - half[0]), rng.gen_range(half[1]..wf - half[1])],
                vel: [speed * angle.sin(), 2.0 * speed * angle.cos()],
                color: [rng.gen(), rng.gen(), rng.gen()],
            });
        }
    }
    let drift: f32 = rng.gen_range(0.015..0.025);
    let mut out = Vec::with_capacity(frames);
    for t in 0..frames {
        let shift = match kind {
            SynthKind::MovingGradient => drift * t as f32,
            _ => 0.0,
        };
        let mut data = vec![0.0f32; 3 * height * width];
        for c in 0..3 {
            for y in 0..height {
                for x in 0..width {
                    let u = x as f32 / wf - shift;
                    let v = y as f32 / hf;
                    let mut val = bg(c, u, v);
                    for s in &shapes {
                        let dy = (y as f32 + 0.5 - s.pos[0]) / s.half[0];
                        let dx = (x as f32 + 0.5 - s.pos[1]) / s.half[1];
                        let inside = if s.round {
                            dx * dx + dy * dy <= 1.0
                        } else {
                            dx.abs() <= 1.0 && dy.abs() <= 1.0
                        };
                        if inside {
                            val = s.color[c];
                        }
                    }
                    data[(c * height + y) * width + x] = quantize_8bit(val);
                }
            }
        }
        out.push(FrameBuffer::new(height, width, data)?);
        for s in &mut shapes {
            for a in 0..2 {
                let limit = if a == 0 { hf } else { wf };
                s.pos[a] += s.vel[a];
                if s.pos[a] < s.half[a] {
                    s.pos[a] = 2.0 * s.half[a] - s.pos[a];
                    s.vel[a] = -s.vel[a];
                } else if s.pos[a] > limit - s.half[a] {
                    s.pos[a] = 2.0 * (limit - s.half[a]) - s.pos[a];
                    s.vel[a] = -s.vel[a];
                }
            }
        }
    }
    FrameSequence::new(out, SourceDescriptor::Synthetic { kind: kind.name().to_string(), seed })
}

/// Mean MSE between consecutive frames.
pub fn mean_interframe_mse(seq: &FrameSequence) -> Result<f64> {
    if seq.len() < 2 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for pair in seq.frames().windows(2) {
        total += super::metrics::mse(&pair[0], &pair[1])?;
    }
    Ok(total / (seq.len() - 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_frames_identical() {
        let s = generate_synthetic(SynthKind::Constant, 4, 16, 32, 3).unwrap();
        assert!(s.frames().windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn seeded() {
        for k in SynthKind::ALL {
            let a = generate_synthetic(k, 3, 16, 32, 9).unwrap();
            assert_eq!(a, generate_synthetic(k, 3, 16, 32, 9).unwrap());
            assert_ne!(a, generate_synthetic(k, 3, 16, 32, 10).unwrap());
        }
    }

    #[test]
    fn dynamics_ordering() {
        for seed in 0..4 {
            let g = generate_synthetic(SynthKind::MovingGradient, 16, 64, 128, seed).unwrap();
            let b = generate_synthetic(SynthKind::BouncingShapes, 16, 64, 128, seed).unwrap();
            assert!(mean_interframe_mse(&b).unwrap() > mean_interframe_mse(&g).unwrap());
        }
    }

    #[test]
    fn values_on_8bit_grid() {
        let s = generate_synthetic(SynthKind::BouncingShapes, 2, 16, 32, 1).unwrap();
        for f in s.frames() {
            assert!(f.data().iter().all(|&v| quantize_8bit(v) == v));
        }
    }

    #[test]
    fn kind_names_parse() {
        for k in SynthKind::ALL {
            assert_eq!(k.name().parse::<SynthKind>().unwrap(), k);
        }
        assert!("noise".parse::<SynthKind>().is_err());
    }
}
