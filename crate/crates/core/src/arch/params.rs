use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::tensor::{Real, Tape, Tensor, Var};

/// Ordered map from parameter name to tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamMap<T: Real = f32> {
    tensors: IndexMap<String, Tensor<T>>,
}

impl<T: Real> Default for ParamMap<T> {
    fn default() -> Self {
        Self { tensors: IndexMap::new() }
    }
}

impl<T: Real> ParamMap<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor<T>) -> Option<Tensor<T>> {
        self.tensors.insert(name.into(), value)
    }

    pub fn get(&self, name: &str) -> Result<&Tensor<T>> {
        self.tensors
            .get(name)
            .ok_or_else(|| Error::format(format!("parameter {name:?} missing")))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor<T>> {
        self.tensors
            .get_mut(name)
            .ok_or_else(|| Error::format(format!("parameter {name:?} missing")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.tensors.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor<T>)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor<T>)> {
        self.tensors.iter_mut().map(|(k, v)| (k.as_str(), v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.tensors.keys().map(String::as_str)
    }

    /// Total scalar count over all tensors.
    pub fn numel(&self) -> usize {
        self.tensors.values().map(Tensor::len).sum()
    }

    pub fn cast<U: Real>(&self) -> ParamMap<U> {
        ParamMap {
            tensors: self.tensors.iter().map(|(k, v)| (k.clone(), v.cast())).collect(),
        }
    }

    /// Places every tensor on the tape, as trainable leaves or constants.
    pub fn bind(&self, tape: &mut Tape<T>, trainable: bool) -> VarMap {
        let vars = self
            .tensors
            .iter()
            .map(|(k, v)| {
                let var = if trainable {
                    tape.param(v.clone())
                } else {
                    tape.constant(v.clone())
                };
                (k.clone(), var)
            })
            .collect();
        VarMap { vars }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors.values().all(Tensor::all_finite)
    }
}

/// Tape handles of a bound [`ParamMap`].
#[derive(Clone, Debug, Default)]
pub struct VarMap {
    vars: IndexMap<String, Var>,
}

impl VarMap {
    pub fn get(&self, name: &str) -> Result<Var> {
        self.vars
            .get(name)
            .copied()
            .ok_or_else(|| Error::format(format!("parameter {name:?} missing")))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Var)> {
        self.vars.iter().map(|(k, &v)| (k.as_str(), v))
    }

    /// Gradients of every bound parameter, in map order.
    pub fn grads<T: Real>(&self, tape: &Tape<T>) -> ParamMap<T> {
        let mut out = ParamMap::new();
        for (name, &v) in &self.vars {
            let g = tape
                .grad_tensor(v)
                .unwrap_or_else(|| Tensor::zeros(tape.value(v).shape().to_vec()));
            out.insert(name.clone(), g);
        }
        out
    }
}

/// Per-tensor keep masks: `false` marks a parameter pinned at zero.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParamMasks {
    keep: IndexMap<String, Vec<bool>>,
}

impl ParamMasks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, keep: Vec<bool>) {
        self.keep.insert(name.into(), keep);
    }

    pub fn get(&self, name: &str) -> Option<&[bool]> {
        self.keep.get(name).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[bool])> {
        self.keep.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Number of masked-out (pruned) entries.
    pub fn pruned(&self) -> usize {
        self.keep.values().flatten().filter(|&&k| !k).count()
    }

    /// Zeroes every masked-out entry of the matching tensors.
    pub fn apply<T: Real>(&self, params: &mut ParamMap<T>) -> Result<()> {
        for (name, keep) in &self.keep {
            let t = params.get_mut(name)?;
            if t.len() != keep.len() {
                return Err(Error::dim("mask", format!("mask for {name:?} has wrong length")));
            }
            for (v, &k) in t.data_mut().iter_mut().zip(keep) {
                if !k {
                    *v = T::zero();
                }
            }
        }
        Ok(())
    }
}
