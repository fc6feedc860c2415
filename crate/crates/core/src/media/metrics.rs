use std::fmt::Write as _;

use super::frame::FrameBuffer;
use crate::error::{Error, Result};
use crate::tensor::MaskTensor;

/// Reported PSNR for identical frames.
pub const PSNR_CAP: f64 = 100.0;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;
pub const MS_SSIM_WEIGHTS: [f64; 5] = [0.0448, 0.2856, 0.3001, 0.2363, 0.1333];

fn same_shape(a: &FrameBuffer, b: &FrameBuffer) -> Result<()> {
    if (a.height(), a.width()) != (b.height(), b.width()) {
        return Err(Error::dim(
            "metric",
            format!(
                "frames differ in size: {}x{} vs {}x{}",
                a.height(),
                a.width(),
                b.height(),
                b.width()
            ),
        ));
    }
    Ok(())
}

pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse <= 0.0 {
        PSNR_CAP
    } else {
        (10.0 * (1.0 / mse).log10()).min(PSNR_CAP)
    }
}

pub fn mse(a: &FrameBuffer, b: &FrameBuffer) -> Result<f64> {
    same_shape(a, b)?;
    let sum: f64 = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    Ok(sum / a.data().len() as f64)
}

/// PSNR in dB for the `[0, 1]` range, capped at [`PSNR_CAP`].
pub fn psnr(a: &FrameBuffer, b: &FrameBuffer) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

/// PSNR over the pixels where `mask` is 1; `mask` is `[1, 1, H, W]` or `[H, W]`.
pub fn masked_psnr(a: &FrameBuffer, b: &FrameBuffer, mask: &MaskTensor) -> Result<f64> {
    same_shape(a, b)?;
    let plane = a.height() * a.width();
    if mask.bits().len() != plane {
        return Err(Error::dim("masked_psnr", "mask does not match the frame size"));
    }
    let (mut sum, mut count) = (0.0f64, 0usize);
    for c in 0..3 {
        for (i, _) in mask.bits().iter().enumerate().filter(|(_, &m)| m == 1) {
            let d = a.plane(c)[i] as f64 - b.plane(c)[i] as f64;
            sum += d * d;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::usage("mask selects no pixels"));
    }
    Ok(psnr_from_mse(sum / count as f64))
}

/// Multi-scale SSIM and the number of scales used.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MsSsim {
    pub value: f64,
    pub scales: usize,
}

/// Scales usable for a frame: the largest `s <= 5` such that the
/// `s`-th level (after `s - 1` 2×2 downsamplings) still fits one window.
pub fn ms_ssim_scales(height: usize, width: usize) -> usize {
    let (mut h, mut w, mut s) = (height, width, 0);
    while s < MS_SSIM_WEIGHTS.len() && h.min(w) >= SSIM_WINDOW {
        s += 1;
        h /= 2;
        w /= 2;
    }
    s
}

pub(crate) fn gaussian_window() -> [f64; SSIM_WINDOW] {
    let mut g = [0.0; SSIM_WINDOW];
    let c = (SSIM_WINDOW / 2) as f64;
    for (i, v) in g.iter_mut().enumerate() {
        let x = i as f64 - c;
        *v = (-x * x / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp();
    }
    let s: f64 = g.iter().sum();
    g.iter_mut().for_each(|v| *v /= s);
    g
}

/// Valid-mode separable Gaussian filtering of an `h × w` plane.
fn filter(img: &[f64], h: usize, w: usize, g: &[f64; SSIM_WINDOW]) -> (Vec<f64>, usize, usize) {
    let k = SSIM_WINDOW;
    let (ho, wo) = (h - k + 1, w - k + 1);
    let mut rows = vec![0.0; h * wo];
    for y in 0..h {
        for x in 0..wo {
            rows[y * wo + x] = (0..k).map(|i| g[i] * img[y * w + x + i]).sum();
        }
    }
    let mut out = vec![0.0; ho * wo];
    for y in 0..ho {
        for x in 0..wo {
            out[y * wo + x] = (0..k).map(|i| g[i] * rows[(y + i) * wo + x]).sum();
        }
    }
    (out, ho, wo)
}

/// Mean SSIM and mean contrast-structure term of one plane pair.
fn ssim_cs(a: &[f64], b: &[f64], h: usize, w: usize, g: &[f64; SSIM_WINDOW]) -> (f64, f64) {
    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let prod = |f: &dyn Fn(f64, f64) -> f64| -> Vec<f64> { a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect() };
    let (mu_a, ho, wo) = filter(a, h, w, g);
    let (mu_b, _, _) = filter(b, h, w, g);
    let (aa, _, _) = filter(&prod(&|x, _| x * x), h, w, g);
    let (bb, _, _) = filter(&prod(&|_, y| y * y), h, w, g);
    let (ab, _, _) = filter(&prod(&|x, y| x * y), h, w, g);
    let n = (ho * wo) as f64;
    let (mut ssim, mut cs) = (0.0, 0.0);
    for i in 0..ho * wo {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let va = aa[i] - ma * ma;
        let vb = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        let cs_i = (2.0 * cov + c2) / (va + vb + c2);
        let l_i = (2.0 * ma * mb + c1) / (ma * ma + mb * mb + c1);
        cs += cs_i;
        ssim += l_i * cs_i;
    }
    (ssim / n, cs / n)
}

fn downsample(img: &[f64], h: usize, w: usize) -> (Vec<f64>, usize, usize) {
    let (ho, wo) = (h / 2, w / 2);
    let mut out = vec![0.0; ho * wo];
    for y in 0..ho {
        for x in 0..wo {
            let i = 2 * y * w + 2 * x;
            out[y * wo + x] = 0.25 * (img[i] + img[i + 1] + img[i + w] + img[i + w + 1]);
        }
    }
    (out, ho, wo)
}

/// Multi-scale SSIM with an 11×11 Gaussian window (σ = 1.5), averaged over
/// the three channels. Frames below 176 pixels on the short side use fewer
/// scales with the leading weights renormalized.
pub fn ms_ssim(a: &FrameBuffer, b: &FrameBuffer) -> Result<MsSsim> {
    same_shape(a, b)?;
    let scales = ms_ssim_scales(a.height(), a.width());
    if scales == 0 {
        return Err(Error::usage(format!(
            "ms_ssim needs frames of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {}x{}",
            a.height(),
            a.width()
        )));
    }
    let weights = &MS_SSIM_WEIGHTS[..scales];
    let wsum: f64 = weights.iter().sum();
    let g = gaussian_window();
    let mut total = 0.0;
    for c in 0..3 {
        let mut pa: Vec<f64> = a.plane(c).iter().map(|&v| v as f64).collect();
        let mut pb: Vec<f64> = b.plane(c).iter().map(|&v| v as f64).collect();
        let (mut h, mut w) = (a.height(), a.width());
        let mut score = 1.0;
        for (s, &wt) in weights.iter().enumerate() {
            let (ssim, cs) = ssim_cs(&pa, &pb, h, w, &g);
            let term = if s + 1 == scales { ssim } else { cs };
            score *= term.max(0.0).powf(wt / wsum);
            if s + 1 < scales {
                let (na, nh, nw) = downsample(&pa, h, w);
                pb = downsample(&pb, h, w).0;
                pa = na;
                h = nh;
                w = nw;
            }
        }
        total += score;
    }
    Ok(MsSsim { value: total / 3.0, scales })
}

/// Bits per pixel; zero when there are no pixels or no bits.
pub fn bpp(bits: u64, frames: usize, height: usize, width: usize) -> f64 {
    let pixels = frames * height * width;
    if pixels == 0 {
        0.0
    } else {
        bits as f64 / pixels as f64
    }
}

/// Stored scalars per pixel.
pub fn ppp(total_size: usize, frames: usize, height: usize, width: usize) -> f64 {
    let pixels = frames * height * width;
    if pixels == 0 {
        0.0
    } else {
        total_size as f64 / pixels as f64
    }
}

/// Per-frame quality of a reconstruction plus size figures.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub frame_ids: Vec<usize>,
    pub psnr: Vec<f64>,
    pub ms_ssim: Vec<f64>,
    pub ms_ssim_scales: usize,
    pub mean_psnr: f64,
    pub mean_ms_ssim: f64,
    pub bpp: Option<f64>,
    pub ppp: Option<f64>,
}

impl MetricReport {
    pub fn evaluate(frame_ids: &[usize], reference: &[FrameBuffer], decoded: &[FrameBuffer]) -> Result<Self> {
        if reference.len() != decoded.len() || reference.len() != frame_ids.len() || reference.is_empty() {
            return Err(Error::usage("metric report needs equal, non-empty frame lists"));
        }
        let mut psnr_v = Vec::with_capacity(reference.len());
        let mut ssim_v = Vec::with_capacity(reference.len());
        let mut scales = 0;
        for (r, d) in reference.iter().zip(decoded) {
            psnr_v.push(psnr(r, d)?);
            let m = ms_ssim(r, d)?;
            scales = m.scales;
            ssim_v.push(m.value);
        }
        let n = psnr_v.len() as f64;
        Ok(MetricReport {
            frame_ids: frame_ids.to_vec(),
            mean_psnr: psnr_v.iter().sum::<f64>() / n,
            mean_ms_ssim: ssim_v.iter().sum::<f64>() / n,
            psnr: psnr_v,
            ms_ssim: ssim_v,
            ms_ssim_scales: scales,
            bpp: None,
            ppp: None,
        })
    }

    /// `key=value` records, one summary line then one line per frame.
    pub fn to_records(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "summary frames={} psnr={:.6} ms_ssim={:.6} ms_ssim_scales={}",
            self.psnr.len(),
            self.mean_psnr,
            self.mean_ms_ssim,
            self.ms_ssim_scales
        );
        if let Some(b) = self.bpp {
            let _ = write!(s, " bpp={b:.6}");
        }
        if let Some(p) = self.ppp {
            let _ = write!(s, " ppp={p:.6}");
        }
        s.push('\n');
        for ((t, p), m) in self.frame_ids.iter().zip(&self.psnr).zip(&self.ms_ssim) {
            let _ = writeln!(s, "frame index={t} psnr={p:.6} ms_ssim={m:.6}");
        }
        s
    }

    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:>6}  {:>9}  {:>8}", "frame", "PSNR(dB)", "MS-SSIM");
        for ((t, p), m) in self.frame_ids.iter().zip(&self.psnr).zip(&self.ms_ssim) {
            let _ = writeln!(s, "{t:>6}  {p:>9.3}  {m:>8.5}");
        }
        let _ = writeln!(s, "{:>6}  {:>9.3}  {:>8.5}", "mean", self.mean_psnr, self.mean_ms_ssim);
        let _ = writeln!(s, "MS-SSIM scales: {}", self.ms_ssim_scales);
        if let Some(b) = self.bpp {
            let _ = writeln!(s, "bpp: {b:.5}");
        }
        if let Some(p) = self.ppp {
            let _ = writeln!(s, "ppp: {p:.6}");
        }
        s
    }
}
