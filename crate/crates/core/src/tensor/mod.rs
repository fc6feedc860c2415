//! Dense tensors and a tape-based reverse-mode autodiff engine.
//!
//! The op set is exactly what the encoder, decoder and losses need:
//! grouped 2-D convolution, pixel shuffle, GELU, layer normalization,
//! elementwise add/sub/mul, reductions, and the L2 / masked-L2 / L1 losses.
//!
//! The element type is a compile-time choice through [`Real`]: models train
//! in `f32`, and gradient checks run the same code in `f64`.

mod conv;
mod gradcheck;
mod ops;
mod tape;

pub use conv::Conv2dParams;
pub use gradcheck::{grad_check, grad_check_with, GradCheckReport};
pub use tape::{Tape, Var};

use std::fmt;

use crate::error::{Error, Result};

/// Floating point element type of a tensor.
pub trait Real:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::NumAssign
    + std::iter::Sum
    + Default
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// `c = alpha * a·b + beta * c` for row/column-strided matrices.
    #[allow(clippy::too_many_arguments)]
    fn gemm(
        m: usize,
        k: usize,
        n: usize,
        alpha: Self,
        a: &[Self],
        a_strides: (isize, isize),
        b: &[Self],
        b_strides: (isize, isize),
        beta: Self,
        c: &mut [Self],
        c_strides: (isize, isize),
    );

    fn erf(self) -> Self;

    #[inline]
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("constant representable")
    }
}

fn check_gemm_bounds<T>(rows: usize, cols: usize, s: (isize, isize), buf: &[T]) {
    if rows == 0 || cols == 0 {
        return;
    }
    let last = (rows - 1) as isize * s.0 + (cols - 1) as isize * s.1;
    assert!(s.0 >= 0 && s.1 >= 0 && (last as usize) < buf.len(), "gemm operand out of bounds");
}

macro_rules! impl_real {
    ($t:ty, $gemm:path, $erf:path) => {
        impl Real for $t {
            fn gemm(
                m: usize,
                k: usize,
                n: usize,
                alpha: Self,
                a: &[Self],
                a_strides: (isize, isize),
                b: &[Self],
                b_strides: (isize, isize),
                beta: Self,
                c: &mut [Self],
                c_strides: (isize, isize),
            ) {
                check_gemm_bounds(m, k, a_strides, a);
                check_gemm_bounds(k, n, b_strides, b);
                check_gemm_bounds(m, n, c_strides, c);
                // SAFETY: every operand was bounds-checked against its strides above.
                unsafe {
                    $gemm(
                        m,
                        k,
                        n,
                        alpha,
                        a.as_ptr(),
                        a_strides.0,
                        a_strides.1,
                        b.as_ptr(),
                        b_strides.0,
                        b_strides.1,
                        beta,
                        c.as_mut_ptr(),
                        c_strides.0,
                        c_strides.1,
                    )
                }
            }

            #[inline]
            fn erf(self) -> Self {
                $erf(self)
            }
        }
    };
}

impl_real!(f32, matrixmultiply::sgemm, libm::erff);
impl_real!(f64, matrixmultiply::dgemm, libm::erf);

/// A dense row-major n-dimensional array.
#[derive(Clone, PartialEq)]
pub struct Tensor<T: Real = f32> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> fmt::Debug for Tensor<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor")
            .field("shape", &self.shape)
            .field("len", &self.data.len())
            .finish()
    }
}

impl<T: Real> Tensor<T> {
    pub fn new(shape: impl Into<Vec<usize>>, data: Vec<T>) -> Result<Self> {
        let shape = shape.into();
        if shape.contains(&0) {
            return Err(Error::dim("tensor", format!("zero-sized axis in {shape:?}")));
        }
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::dim(
                "tensor",
                format!("shape {shape:?} holds {n} elements, got {}", data.len()),
            ));
        }
        Ok(Tensor { shape, data })
    }

    pub fn zeros(shape: impl Into<Vec<usize>>) -> Self {
        Self::full(shape, T::zero())
    }

    pub fn full(shape: impl Into<Vec<usize>>, value: T) -> Self {
        let shape = shape.into();
        let n = shape.iter().product();
        Tensor {
            shape,
            data: vec![value; n],
        }
    }

    pub fn scalar(value: T) -> Self {
        Tensor {
            shape: vec![1],
            data: vec![value],
        }
    }

    pub fn from_fn(shape: impl Into<Vec<usize>>, mut f: impl FnMut(usize) -> T) -> Self {
        let shape = shape.into();
        let n = shape.iter().product();
        Tensor {
            shape,
            data: (0..n).map(&mut f).collect(),
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    pub fn reshape(self, shape: impl Into<Vec<usize>>) -> Result<Self> {
        Tensor::new(shape, self.data)
    }

    /// Scalar value of a one-element tensor.
    pub fn item(&self) -> Option<T> {
        (self.data.len() == 1).then(|| self.data[0])
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Tensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Converts the element type (e.g. an `f32` model to `f64` for checking).
    pub fn cast<U: Real>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .map(|x| U::from_f64(x.to_f64().unwrap_or(f64::NAN)).unwrap_or(U::nan()))
                .collect(),
        }
    }

    /// Stacks equally shaped tensors along a new leading axis.
    pub fn stack(items: &[&Tensor<T>]) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::usage("stack of zero tensors"))?;
        let mut data = Vec::with_capacity(first.len() * items.len());
        for t in items {
            if t.shape != first.shape {
                return Err(Error::dim(
                    "stack",
                    format!("{:?} vs {:?}", t.shape, first.shape),
                ));
            }
            data.extend_from_slice(&t.data);
        }
        let mut shape = vec![items.len()];
        shape.extend_from_slice(&first.shape);
        Tensor::new(shape, data)
    }

    /// Slice `index` of the leading axis, as a tensor of the remaining axes.
    pub fn index_outer(&self, index: usize) -> Result<Self> {
        let outer = *self
            .shape
            .first()
            .ok_or_else(|| Error::usage("index_outer on a 0-d tensor"))?;
        if index >= outer {
            return Err(Error::usage(format!("index {index} out of range 0..{outer}")));
        }
        let inner: usize = self.shape[1..].iter().product();
        let shape = if self.shape.len() == 1 {
            vec![1]
        } else {
            self.shape[1..].to_vec()
        };
        Tensor::new(shape, self.data[index * inner..(index + 1) * inner].to_vec())
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Binary mask over a frame batch: 1 marks a distorted (excluded) element.
///
/// Shape is either the full `[N, C, H, W]` of the batch or `[N, 1, H, W]`,
/// in which case it applies to every channel.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskTensor {
    shape: Vec<usize>,
    bits: Vec<u8>,
}

impl MaskTensor {
    pub fn new(shape: impl Into<Vec<usize>>, bits: Vec<u8>) -> Result<Self> {
        let shape = shape.into();
        let n: usize = shape.iter().product();
        if n != bits.len() || n == 0 {
            return Err(Error::dim(
                "mask",
                format!("shape {shape:?} vs {} values", bits.len()),
            ));
        }
        if let Some(bad) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::usage(format!("mask value {bad} is not 0 or 1")));
        }
        Ok(MaskTensor { shape, bits })
    }

    pub fn zeros(shape: impl Into<Vec<usize>>) -> Self {
        let shape = shape.into();
        let n = shape.iter().product();
        MaskTensor {
            shape,
            bits: vec![0; n],
        }
    }

    pub fn ones(shape: impl Into<Vec<usize>>) -> Self {
        let shape = shape.into();
        let n = shape.iter().product();
        MaskTensor {
            shape,
            bits: vec![1; n],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Stacks per-frame masks (`[C, H, W]`) into a batch mask.
    pub fn stack(items: &[&MaskTensor]) -> Result<Self> {
        let first = items
            .first()
            .ok_or_else(|| Error::usage("stack of zero masks"))?;
        let mut bits = Vec::with_capacity(first.bits.len() * items.len());
        for m in items {
            if m.shape != first.shape {
                return Err(Error::dim("mask stack", format!("{:?} vs {:?}", m.shape, first.shape)));
            }
            bits.extend_from_slice(&m.bits);
        }
        let mut shape = vec![items.len()];
        shape.extend_from_slice(&first.shape);
        MaskTensor::new(shape, bits)
    }

    /// Expands the mask to per-element flags for a tensor of `shape`.
    pub(crate) fn broadcast_to(&self, shape: &[usize]) -> Result<Vec<u8>> {
        if self.shape == shape {
            return Ok(self.bits.clone());
        }
        let channel_broadcast = self.shape.len() == shape.len()
            && shape.len() >= 2
            && self.shape[1] == 1
            && self.shape[0] == shape[0]
            && self.shape[2..] == shape[2..];
        if !channel_broadcast {
            return Err(Error::dim(
                "mask",
                format!("mask {:?} does not broadcast to {shape:?}", self.shape),
            ));
        }
        let (n, c) = (shape[0], shape[1]);
        let plane: usize = shape[2..].iter().product();
        let mut out = Vec::with_capacity(n * c * plane);
        for i in 0..n {
            let src = &self.bits[i * plane..(i + 1) * plane];
            for _ in 0..c {
                out.extend_from_slice(src);
            }
        }
        Ok(out)
    }
}
