use crate::error::{Error, Result};

/// Min-max quantizer of one tensor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantSpec {
    pub bits: u8,
    pub mu_min: f64,
    pub mu_max: f64,
}

impl QuantSpec {
    /// `(mu_max - mu_min) / (2^b - 1)`; zero for a constant tensor.
    pub fn scale(&self) -> f64 {
        (self.mu_max - self.mu_min) / self.max_code() as f64
    }

    pub fn max_code(&self) -> u32 {
        (1u32 << self.bits) - 1
    }

    pub fn levels(&self) -> usize {
        1usize << self.bits
    }
}

pub fn check_bits(bits: u8) -> Result<()> {
    if !(1..=16).contains(&bits) {
        return Err(Error::usage(format!("quantization bits must be in 1..=16, got {bits}")));
    }
    Ok(())
}

/// Codes `round((x - mu_min) / scale)` with ties rounded up.
///
/// With `include_zero` the range is widened to contain 0.
pub fn quantize(values: &[f32], bits: u8, include_zero: bool) -> Result<(Vec<u32>, QuantSpec)> {
    check_bits(bits)?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::usage("cannot quantize non-finite values"));
    }
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v as f64), hi.max(v as f64)));
    if values.is_empty() {
        lo = 0.0;
        hi = 0.0;
    }
    if include_zero {
        lo = lo.min(0.0);
        hi = hi.max(0.0);
    }
    let spec = QuantSpec { bits, mu_min: lo, mu_max: hi };
    let scale = spec.scale();
    let codes = if scale == 0.0 {
        vec![0; values.len()]
    } else {
        values
            .iter()
            .map(|&v| (((v as f64 - lo) / scale + 0.5).floor() as u32).min(spec.max_code()))
            .collect()
    };
    Ok((codes, spec))
}

/// `mu_min + code * scale` in double precision.
pub fn dequantize_f64(codes: &[u32], spec: &QuantSpec) -> Vec<f64> {
    let scale = spec.scale();
    codes.iter().map(|&c| spec.mu_min + c as f64 * scale).collect()
}

pub fn dequantize(codes: &[u32], spec: &QuantSpec) -> Vec<f32> {
    dequantize_f64(codes, spec).into_iter().map(|v| v as f32).collect()
}
