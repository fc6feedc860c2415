//! Grouped 2-D cross-correlation via im2col + GEMM.

use rayon::prelude::*;

use super::Real;
use crate::error::{Error, Result};

/// Stride, zero padding and channel grouping of a convolution.
///
/// `groups == c_in == c_out` gives a depthwise convolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Conv2dParams {
    pub stride: usize,
    pub padding: usize,
    pub groups: usize,
}

impl Default for Conv2dParams {
    fn default() -> Self {
        Conv2dParams {
            stride: 1,
            padding: 0,
            groups: 1,
        }
    }
}

impl Conv2dParams {
    pub fn new(stride: usize, padding: usize) -> Self {
        Conv2dParams {
            stride,
            padding,
            groups: 1,
        }
    }

    /// Stride-1 convolution that preserves spatial size for an odd kernel.
    pub fn same(kernel: usize) -> Self {
        Conv2dParams::new(1, (kernel - 1) / 2)
    }

    pub fn with_groups(mut self, groups: usize) -> Self {
        self.groups = groups;
        self
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct ConvGeom {
    pub n: usize,
    pub c_in: usize,
    pub h: usize,
    pub w: usize,
    pub c_out: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
    pub groups: usize,
    pub ho: usize,
    pub wo: usize,
}

impl ConvGeom {
    pub fn new(
        input: &[usize],
        weight: &[usize],
        bias: Option<&[usize]>,
        p: Conv2dParams,
    ) -> Result<Self> {
        if input.len() != 4 {
            return Err(Error::dim("conv2d", format!("input must be [N,C,H,W], got {input:?}")));
        }
        if weight.len() != 4 || weight[2] != weight[3] {
            return Err(Error::dim(
                "conv2d",
                format!("weight must be [C_out,C_in/groups,K,K], got {weight:?}"),
            ));
        }
        if p.stride == 0 || p.groups == 0 {
            return Err(Error::config("conv2d stride and groups must be positive"));
        }
        let (n, c_in, h, w) = (input[0], input[1], input[2], input[3]);
        let (c_out, k) = (weight[0], weight[2]);
        if c_in % p.groups != 0 || c_out % p.groups != 0 {
            return Err(Error::dim(
                "conv2d",
                format!("groups {} must divide C_in {c_in} and C_out {c_out}", p.groups),
            ));
        }
        if weight[1] != c_in / p.groups {
            return Err(Error::dim(
                "conv2d",
                format!(
                    "axis 1: weight has {} input channels, input gives {} per group",
                    weight[1],
                    c_in / p.groups
                ),
            ));
        }
        if let Some(b) = bias {
            if b != [c_out] {
                return Err(Error::dim("conv2d", format!("bias {b:?} vs C_out {c_out}")));
            }
        }
        let span = |len: usize, axis: &str| -> Result<usize> {
            let padded = len + 2 * p.padding;
            if padded < k {
                return Err(Error::dim(
                    "conv2d",
                    format!("{axis}: kernel {k} exceeds padded extent {padded}"),
                ));
            }
            if (padded - k) % p.stride != 0 {
                return Err(Error::config(format!(
                    "conv2d {axis}: ({len} + 2*{} - {k}) is not divisible by stride {}",
                    p.padding, p.stride
                )));
            }
            Ok((padded - k) / p.stride + 1)
        };
        let ho = span(h, "height")?;
        let wo = span(w, "width")?;
        Ok(ConvGeom {
            n,
            c_in,
            h,
            w,
            c_out,
            k,
            stride: p.stride,
            pad: p.padding,
            groups: p.groups,
            ho,
            wo,
        })
    }

    pub fn out_shape(&self) -> [usize; 4] {
        [self.n, self.c_out, self.ho, self.wo]
    }

    fn cg_in(&self) -> usize {
        self.c_in / self.groups
    }

    fn cg_out(&self) -> usize {
        self.c_out / self.groups
    }

    fn col_rows(&self) -> usize {
        self.cg_in() * self.k * self.k
    }

    fn hw_out(&self) -> usize {
        self.ho * self.wo
    }

    fn is_pointwise(&self) -> bool {
        self.k == 1 && self.stride == 1 && self.pad == 0
    }
}

/// Unfolds the channels of group `g` of one sample into `[cg_in*K*K, Ho*Wo]`.
fn im2col<T: Real>(g: &ConvGeom, x: &[T], group: usize, col: &mut [T]) {
    let (k, s) = (g.k, g.stride);
    let hw_out = g.hw_out();
    let plane = g.h * g.w;
    for ci in 0..g.cg_in() {
        let src = &x[(group * g.cg_in() + ci) * plane..][..plane];
        for ky in 0..k {
            for kx in 0..k {
                let row = (ci * k + ky) * k + kx;
                let dst = &mut col[row * hw_out..][..hw_out];
                let (lo, hi) = valid_range(g.wo, s, kx, g.pad, g.w);
                for oy in 0..g.ho {
                    let line = &mut dst[oy * g.wo..][..g.wo];
                    let Some(iy) = source_index(oy, s, ky, g.pad, g.h) else {
                        line.fill(T::zero());
                        continue;
                    };
                    let src_row = &src[iy * g.w..][..g.w];
                    line[..lo].fill(T::zero());
                    line[hi..].fill(T::zero());
                    if lo < hi {
                        let ix0 = lo * s + kx - g.pad;
                        if s == 1 {
                            line[lo..hi].copy_from_slice(&src_row[ix0..ix0 + hi - lo]);
                        } else {
                            for (j, v) in line[lo..hi].iter_mut().enumerate() {
                                *v = src_row[ix0 + j * s];
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Input row/column for output position `o` and kernel tap `t`, if inside.
fn source_index(o: usize, s: usize, t: usize, pad: usize, len: usize) -> Option<usize> {
    (o * s + t).checked_sub(pad).filter(|&i| i < len)
}

/// Output positions `lo..hi` whose tap `t` lands inside `0..len`.
fn valid_range(n_out: usize, s: usize, t: usize, pad: usize, len: usize) -> (usize, usize) {
    let lo = pad.saturating_sub(t).div_ceil(s).min(n_out);
    let hi = if len + pad > t {
        ((len + pad - t - 1) / s + 1).min(n_out)
    } else {
        0
    };
    (lo, hi.max(lo))
}

/// Adjoint of [`im2col`]: scatters-adds columns back into the sample gradient.
fn col2im<T: Real>(g: &ConvGeom, col: &[T], group: usize, dx: &mut [T]) {
    let (k, s) = (g.k, g.stride);
    let hw_out = g.hw_out();
    let plane = g.h * g.w;
    for ci in 0..g.cg_in() {
        let dst = &mut dx[(group * g.cg_in() + ci) * plane..][..plane];
        for ky in 0..k {
            for kx in 0..k {
                let row = (ci * k + ky) * k + kx;
                let src = &col[row * hw_out..][..hw_out];
                let (lo, hi) = valid_range(g.wo, s, kx, g.pad, g.w);
                if lo >= hi {
                    continue;
                }
                let ix0 = lo * s + kx - g.pad;
                for oy in 0..g.ho {
                    let Some(iy) = source_index(oy, s, ky, g.pad, g.h) else { continue };
                    let dst_row = &mut dst[iy * g.w..][..g.w];
                    let line = &src[oy * g.wo + lo..oy * g.wo + hi];
                    if s == 1 {
                        for (d, &v) in dst_row[ix0..ix0 + line.len()].iter_mut().zip(line) {
                            *d += v;
                        }
                    } else {
                        for (j, &v) in line.iter().enumerate() {
                            dst_row[ix0 + j * s] += v;
                        }
                    }
                }
            }
        }
    }
}

pub(crate) fn forward<T: Real>(g: &ConvGeom, x: &[T], weight: &[T], bias: Option<&[T]>) -> Vec<T> {
    let hw_out = g.hw_out();
    let sample_in = g.c_in * g.h * g.w;
    let sample_out = g.c_out * hw_out;
    let rows = g.col_rows();
    let (cg_in, cg_out) = (g.cg_in(), g.cg_out());
    let mut out = vec![T::zero(); g.n * sample_out];
    out.par_chunks_mut(sample_out)
        .enumerate()
        .for_each(|(n, out_n)| {
            let x_n = &x[n * sample_in..][..sample_in];
            let mut col = if g.is_pointwise() {
                Vec::new()
            } else {
                vec![T::zero(); rows * hw_out]
            };
            for grp in 0..g.groups {
                let w_g = &weight[grp * cg_out * rows..][..cg_out * rows];
                let b_mat: &[T] = if g.is_pointwise() {
                    &x_n[grp * cg_in * hw_out..][..cg_in * hw_out]
                } else {
                    im2col(g, x_n, grp, &mut col);
                    &col
                };
                let c = &mut out_n[grp * cg_out * hw_out..][..cg_out * hw_out];
                T::gemm(
                    cg_out,
                    rows,
                    hw_out,
                    T::one(),
                    w_g,
                    (rows as isize, 1),
                    b_mat,
                    (hw_out as isize, 1),
                    T::zero(),
                    c,
                    (hw_out as isize, 1),
                );
            }
            if let Some(b) = bias {
                for (o, plane) in out_n.chunks_mut(hw_out).enumerate() {
                    let bo = b[o];
                    plane.iter_mut().for_each(|v| *v += bo);
                }
            }
        });
    out
}

pub(crate) struct ConvGrads<T> {
    pub input: Option<Vec<T>>,
    pub weight: Option<Vec<T>>,
    pub bias: Option<Vec<T>>,
}

pub(crate) fn backward<T: Real>(
    g: &ConvGeom,
    x: &[T],
    weight: &[T],
    dy: &[T],
    need_input: bool,
    need_weight: bool,
    need_bias: bool,
) -> ConvGrads<T> {
    let hw_out = g.hw_out();
    let sample_in = g.c_in * g.h * g.w;
    let sample_out = g.c_out * hw_out;
    let rows = g.col_rows();
    let (cg_in, cg_out) = (g.cg_in(), g.cg_out());
    let w_len = weight.len();

    let bias = need_bias.then(|| {
        let mut db = vec![T::zero(); g.c_out];
        for dy_n in dy.chunks(sample_out) {
            for (o, plane) in dy_n.chunks(hw_out).enumerate() {
                db[o] += plane.iter().copied().sum::<T>();
            }
        }
        db
    });

    if !need_input && !need_weight {
        return ConvGrads {
            input: None,
            weight: None,
            bias,
        };
    }

    let mut dx = if need_input {
        vec![T::zero(); g.n * sample_in]
    } else {
        Vec::new()
    };
    // Per-sample weight gradients, summed in sample order afterwards.
    let per_sample: Vec<Vec<T>> = {
        let work = |n: usize, dx_n: Option<&mut [T]>| -> Vec<T> {
            let x_n = &x[n * sample_in..][..sample_in];
            let dy_n = &dy[n * sample_out..][..sample_out];
            let mut dw = if need_weight {
                vec![T::zero(); w_len]
            } else {
                Vec::new()
            };
            let mut col = if g.is_pointwise() {
                Vec::new()
            } else {
                vec![T::zero(); rows * hw_out]
            };
            let mut dx_n = dx_n;
            for grp in 0..g.groups {
                let dy_g = &dy_n[grp * cg_out * hw_out..][..cg_out * hw_out];
                let w_g = &weight[grp * cg_out * rows..][..cg_out * rows];
                if need_weight {
                    let b_mat: &[T] = if g.is_pointwise() {
                        &x_n[grp * cg_in * hw_out..][..cg_in * hw_out]
                    } else {
                        im2col(g, x_n, grp, &mut col);
                        &col
                    };
                    let dw_g = &mut dw[grp * cg_out * rows..][..cg_out * rows];
                    // dW_g = dY_g · colᵀ
                    T::gemm(
                        cg_out,
                        hw_out,
                        rows,
                        T::one(),
                        dy_g,
                        (hw_out as isize, 1),
                        b_mat,
                        (1, hw_out as isize),
                        T::zero(),
                        dw_g,
                        (rows as isize, 1),
                    );
                }
                if let Some(dx_n) = dx_n.as_deref_mut() {
                    // dcol = W_gᵀ · dY_g
                    if g.is_pointwise() {
                        let dst = &mut dx_n[grp * cg_in * hw_out..][..cg_in * hw_out];
                        T::gemm(
                            rows,
                            cg_out,
                            hw_out,
                            T::one(),
                            w_g,
                            (1, rows as isize),
                            dy_g,
                            (hw_out as isize, 1),
                            T::zero(),
                            dst,
                            (hw_out as isize, 1),
                        );
                    } else {
                        T::gemm(
                            rows,
                            cg_out,
                            hw_out,
                            T::one(),
                            w_g,
                            (1, rows as isize),
                            dy_g,
                            (hw_out as isize, 1),
                            T::zero(),
                            &mut col,
                            (hw_out as isize, 1),
                        );
                        col2im(g, &col, grp, dx_n);
                    }
                }
            }
            dw
        };
        if need_input {
            dx.par_chunks_mut(sample_in)
                .enumerate()
                .map(|(n, dx_n)| work(n, Some(dx_n)))
                .collect()
        } else {
            (0..g.n).into_par_iter().map(|n| work(n, None)).collect()
        }
    };

    let weight_grad = need_weight.then(|| {
        let mut dw = vec![T::zero(); w_len];
        for part in &per_sample {
            for (a, &b) in dw.iter_mut().zip(part) {
                *a += b;
            }
        }
        dw
    });

    ConvGrads {
        input: need_input.then_some(dx),
        weight: weight_grad,
        bias,
    }
}
