//! Forward and backward kernels for the non-convolution ops.

use super::Real;

/// `out[n, c, s*h + a, s*w + b] = in[n, c*s*s + a*s + b, h, w]`
pub(crate) fn pixel_shuffle<T: Real>(x: &[T], shape: [usize; 4], s: usize) -> Vec<T> {
    let [n, c_in, h, w] = shape;
    let c = c_in / (s * s);
    let (oh, ow) = (h * s, w * s);
    let mut out = vec![T::zero(); x.len()];
    for ni in 0..n {
        for ci in 0..c {
            for a in 0..s {
                for b in 0..s {
                    let src_c = ci * s * s + a * s + b;
                    let src = &x[((ni * c_in + src_c) * h) * w..][..h * w];
                    let dst = &mut out[((ni * c + ci) * oh) * ow..][..oh * ow];
                    for hi in 0..h {
                        let row = &mut dst[(s * hi + a) * ow..][..ow];
                        for wi in 0..w {
                            row[s * wi + b] = src[hi * w + wi];
                        }
                    }
                }
            }
        }
    }
    out
}

/// Gradient of [`pixel_shuffle`]: the inverse rearrangement of `dy`.
pub(crate) fn pixel_unshuffle<T: Real>(dy: &[T], in_shape: [usize; 4], s: usize) -> Vec<T> {
    let [n, c_in, h, w] = in_shape;
    let c = c_in / (s * s);
    let (oh, ow) = (h * s, w * s);
    let mut dx = vec![T::zero(); dy.len()];
    for ni in 0..n {
        for ci in 0..c {
            for a in 0..s {
                for b in 0..s {
                    let dst_c = ci * s * s + a * s + b;
                    let dst = &mut dx[((ni * c_in + dst_c) * h) * w..][..h * w];
                    let src = &dy[((ni * c + ci) * oh) * ow..][..oh * ow];
                    for hi in 0..h {
                        let row = &src[(s * hi + a) * ow..][..ow];
                        for wi in 0..w {
                            dst[hi * w + wi] = row[s * wi + b];
                        }
                    }
                }
            }
        }
    }
    dx
}

#[inline]
fn normal_cdf<T: Real>(x: T) -> T {
    T::c(0.5) * (T::one() + (x * T::c(std::f64::consts::FRAC_1_SQRT_2)).erf())
}

#[inline]
pub(crate) fn gelu_scalar<T: Real>(x: T) -> T {
    x * normal_cdf(x)
}

#[inline]
pub(crate) fn gelu_grad_scalar<T: Real>(x: T) -> T {
    // d/dx [x Φ(x)] = Φ(x) + x φ(x)
    let pdf = (-(x * x) * T::c(0.5)).exp() * T::c(0.398_942_280_401_432_7);
    normal_cdf(x) + x * pdf
}

/// Axis decomposition `[outer, n, inner]` used by layer norm.
#[derive(Clone, Copy, Debug)]
pub(crate) struct AxisView {
    pub outer: usize,
    pub n: usize,
    pub inner: usize,
}

impl AxisView {
    pub fn new(shape: &[usize], axis: usize) -> Self {
        AxisView {
            outer: shape[..axis].iter().product(),
            n: shape[axis],
            inner: shape[axis + 1..].iter().product(),
        }
    }

    #[inline]
    fn at(&self, o: usize, i: usize, j: usize) -> usize {
        (o * self.n + i) * self.inner + j
    }
}

pub(crate) struct NormStats<T> {
    pub mean: Vec<T>,
    pub rstd: Vec<T>,
}

pub(crate) fn layer_norm<T: Real>(
    x: &[T],
    v: AxisView,
    gamma: &[T],
    beta: &[T],
    eps: T,
) -> (Vec<T>, NormStats<T>) {
    let mut out = vec![T::zero(); x.len()];
    let lanes = v.outer * v.inner;
    let mut mean = vec![T::zero(); lanes];
    let mut rstd = vec![T::zero(); lanes];
    let nf = T::from_usize(v.n).unwrap();
    for o in 0..v.outer {
        for j in 0..v.inner {
            let mut m = T::zero();
            for i in 0..v.n {
                m += x[v.at(o, i, j)];
            }
            m /= nf;
            let mut var = T::zero();
            for i in 0..v.n {
                let d = x[v.at(o, i, j)] - m;
                var += d * d;
            }
            var /= nf;
            let r = T::one() / (var + eps).sqrt();
            for i in 0..v.n {
                let idx = v.at(o, i, j);
                out[idx] = (x[idx] - m) * r * gamma[i] + beta[i];
            }
            mean[o * v.inner + j] = m;
            rstd[o * v.inner + j] = r;
        }
    }
    (out, NormStats { mean, rstd })
}

pub(crate) struct NormGrads<T> {
    pub input: Vec<T>,
    pub gamma: Vec<T>,
    pub beta: Vec<T>,
}

pub(crate) fn layer_norm_backward<T: Real>(
    x: &[T],
    dy: &[T],
    v: AxisView,
    gamma: &[T],
    stats: &NormStats<T>,
) -> NormGrads<T> {
    let mut dx = vec![T::zero(); x.len()];
    let mut dgamma = vec![T::zero(); v.n];
    let mut dbeta = vec![T::zero(); v.n];
    let nf = T::from_usize(v.n).unwrap();
    for o in 0..v.outer {
        for j in 0..v.inner {
            let lane = o * v.inner + j;
            let (m, r) = (stats.mean[lane], stats.rstd[lane]);
            let mut sum_g = T::zero();
            let mut sum_gx = T::zero();
            for i in 0..v.n {
                let idx = v.at(o, i, j);
                let xhat = (x[idx] - m) * r;
                let g = dy[idx] * gamma[i];
                dgamma[i] += dy[idx] * xhat;
                dbeta[i] += dy[idx];
                sum_g += g;
                sum_gx += g * xhat;
            }
            let (mean_g, mean_gx) = (sum_g / nf, sum_gx / nf);
            for i in 0..v.n {
                let idx = v.at(o, i, j);
                let xhat = (x[idx] - m) * r;
                dx[idx] = r * (dy[idx] * gamma[i] - mean_g - xhat * mean_gx);
            }
        }
    }
    NormGrads {
        input: dx,
        gamma: dgamma,
        beta: dbeta,
    }
}
