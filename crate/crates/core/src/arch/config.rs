use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Architecture hyperparameters of one representation.
///
/// Strides are listed in decoder order: stage 1 upsamples by `strides[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HNeRVConfig {
    pub frame_height: usize,
    pub frame_width: usize,
    pub strides: Vec<usize>,
    /// Embedding channels.
    pub d: usize,
    /// Encoder width.
    pub c1: usize,
    /// Decoder input width.
    pub c2: usize,
    /// Channel reduction factor between decoder stages.
    pub r: f64,
    pub ch_min: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub target_params: Option<u64>,
}

/// Per-frame embedding geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbeddingSpec {
    pub channels: usize,
    pub height: usize,
    pub width: usize,
}

impl EmbeddingSpec {
    pub fn values_per_frame(&self) -> usize {
        self.channels * self.height * self.width
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.channels, self.height, self.width]
    }
}

/// Named architecture rows (frame geometry, size budget in stored scalars).
pub const PRESETS: &[&str] = &[
    "bunny-0.35m",
    "bunny-0.75m",
    "bunny-1.5m",
    "bunny-3m",
    "uvg480-3m",
    "uvg960-3m",
    "desk",
];

impl HNeRVConfig {
    /// Full-resolution reference architecture rows, plus `desk`, a
    /// small 64×128 configuration that trains in about a minute on one core.
    pub fn preset(name: &str) -> Result<Self> {
        let row = |h, w, strides: &[usize], c2, target| HNeRVConfig {
            frame_height: h,
            frame_width: w,
            strides: strides.to_vec(),
            d: 16,
            c1: 64,
            c2,
            r: 1.2,
            ch_min: 12,
            k_min: 1,
            k_max: 5,
            target_params: Some(target),
        };
        Ok(match name {
            "bunny-0.35m" => row(640, 1280, &[5, 4, 4, 2, 2], 32, 350_000),
            "bunny-0.75m" => row(640, 1280, &[5, 4, 4, 2, 2], 48, 750_000),
            "bunny-1.5m" => row(640, 1280, &[5, 4, 4, 2, 2], 68, 1_500_000),
            "bunny-3m" => row(640, 1280, &[5, 4, 4, 2, 2], 97, 3_000_000),
            "uvg480-3m" => row(480, 960, &[5, 4, 3, 2, 2], 110, 3_000_000),
            "uvg960-3m" => row(960, 1920, &[5, 4, 4, 3, 2], 92, 3_000_000),
            "desk" => HNeRVConfig {
                frame_height: 64,
                frame_width: 128,
                strides: vec![2, 2, 2, 2],
                d: 8,
                c1: 16,
                c2: 24,
                r: 1.2,
                ch_min: 8,
                k_min: 1,
                k_max: 5,
                target_params: Some(60_000),
            },
            other => {
                return Err(Error::config(format!(
                    "unknown preset {other:?}; known: {}",
                    PRESETS.join(", ")
                )))
            }
        })
    }

    pub fn num_stages(&self) -> usize {
        self.strides.len()
    }

    pub fn stride_product(&self) -> usize {
        self.strides.iter().product()
    }

    pub fn embedding_spec(&self) -> EmbeddingSpec {
        let p = self.stride_product().max(1);
        EmbeddingSpec {
            channels: self.d,
            height: self.frame_height / p,
            width: self.frame_width / p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.strides.is_empty() || self.strides.contains(&0) {
            return Err(Error::config(format!(
                "strides must be a non-empty list of positive integers, got {:?}",
                self.strides
            )));
        }
        if self.frame_height == 0 || self.frame_width == 0 {
            return Err(Error::config("frame size must be positive"));
        }
        let p = self.stride_product();
        if self.frame_height % p != 0 || self.frame_width % p != 0 {
            return Err(Error::config(format!(
                "frame {}x{} is not divisible by the stride product {p}",
                self.frame_height, self.frame_width
            )));
        }
        for (name, k) in [("k_min", self.k_min), ("k_max", self.k_max)] {
            if k % 2 == 0 {
                return Err(Error::config(format!("{name} = {k} must be odd")));
            }
        }
        if self.k_min > self.k_max {
            return Err(Error::config(format!(
                "k_min {} exceeds k_max {}",
                self.k_min, self.k_max
            )));
        }
        if !(self.r.is_finite() && self.r >= 1.0) {
            return Err(Error::config(format!("reduction r = {} must be >= 1", self.r)));
        }
        for (name, v) in [("ch_min", self.ch_min), ("d", self.d), ("c1", self.c1), ("c2", self.c2)] {
            if v == 0 {
                return Err(Error::config(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Key-value text form, one `key=value` per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let strides: Vec<String> = self.strides.iter().map(usize::to_string).collect();
        let _ = writeln!(s, "height={}", self.frame_height);
        let _ = writeln!(s, "width={}", self.frame_width);
        let _ = writeln!(s, "strides={}", strides.join(","));
        let _ = writeln!(s, "d={}", self.d);
        let _ = writeln!(s, "c1={}", self.c1);
        let _ = writeln!(s, "c2={}", self.c2);
        let _ = writeln!(s, "r={}", self.r);
        let _ = writeln!(s, "ch_min={}", self.ch_min);
        let _ = writeln!(s, "k_min={}", self.k_min);
        let _ = writeln!(s, "k_max={}", self.k_max);
        match self.target_params {
            Some(t) => {
                let _ = writeln!(s, "target_params={t}");
            }
            None => {
                let _ = writeln!(s, "target_params=none");
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut fields: std::collections::HashMap<&str, &str> = Default::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::format(format!("config line {}: expected key=value", n + 1)))?;
            let k = k.trim();
            if fields.insert(k, v.trim()).is_some() {
                return Err(Error::format(format!("config key {k:?} repeated")));
            }
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| Error::format(format!("config key {k:?} missing")))
        };
        let int = |k: &str| -> Result<usize> {
            get(k)?
                .parse()
                .map_err(|_| Error::format(format!("config key {k:?} is not an integer")))
        };
        const KNOWN: [&str; 11] = [
            "height",
            "width",
            "strides",
            "d",
            "c1",
            "c2",
            "r",
            "ch_min",
            "k_min",
            "k_max",
            "target_params",
        ];
        if let Some(k) = fields.keys().find(|k| !KNOWN.contains(k)) {
            return Err(Error::format(format!("unknown config key {k:?}")));
        }
        let strides = get("strides")?
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::format("config key \"strides\" must be a comma list of integers"))?;
        let target_params = match fields.get("target_params").copied() {
            None | Some("none") => None,
            Some(v) => Some(
                v.parse()
                    .map_err(|_| Error::format("config key \"target_params\" is not an integer"))?,
            ),
        };
        Ok(HNeRVConfig {
            frame_height: int("height")?,
            frame_width: int("width")?,
            strides,
            d: int("d")?,
            c1: int("c1")?,
            c2: int("c2")?,
            r: get("r")?
                .parse()
                .map_err(|_| Error::format("config key \"r\" is not a number"))?,
            ch_min: int("ch_min")?,
            k_min: int("k_min")?,
            k_max: int("k_max")?,
            target_params,
        })
    }
}
