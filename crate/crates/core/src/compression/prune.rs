use crate::arch::{ParamMap, ParamMasks, VideoRepresentation};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PruneSpec {
    /// Fraction of decoder parameters set to zero, in `[0, 1)`.
    pub sparsity: f64,
    pub finetune_epochs: usize,
}

impl Default for PruneSpec {
    fn default() -> Self {
        PruneSpec { sparsity: 0.10, finetune_epochs: 30 }
    }
}

fn check_sparsity(q: f64) -> Result<()> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::usage(format!("sparsity must be in [0, 1), got {q}")));
    }
    Ok(())
}

/// Zeroes the `floor(q * N)` smallest-magnitude entries across all tensors.
/// Ties are broken by position in map order.
pub fn prune_params(params: &mut ParamMap, q: f64) -> Result<ParamMasks> {
    check_sparsity(q)?;
    let total = params.numel();
    let k = (q * total as f64).floor() as usize;
    if params.iter().any(|(_, t)| !t.all_finite()) {
        return Err(Error::usage("cannot prune non-finite parameters"));
    }
    let mut entries: Vec<(f32, usize)> = params
        .iter()
        .flat_map(|(_, t)| t.data().iter().map(|v| v.abs()))
        .enumerate()
        .map(|(i, a)| (a, i))
        .collect();
    entries.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut keep = vec![true; total];
    for &(_, i) in &entries[..k] {
        keep[i] = false;
    }
    let mut masks = ParamMasks::new();
    let mut offset = 0;
    let names: Vec<String> = params.names().map(str::to_string).collect();
    for name in names {
        let n = params.get(&name)?.len();
        masks.insert(name, keep[offset..offset + n].to_vec());
        offset += n;
    }
    masks.apply(params)?;
    Ok(masks)
}

/// Prunes decoder parameters of `rep`; embeddings and encoder are untouched.
pub fn prune_global(rep: &VideoRepresentation, q: f64) -> Result<(VideoRepresentation, ParamMasks)> {
    let mut out = rep.clone();
    let masks = prune_params(&mut out.decoder, q)?;
    Ok((out, masks))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn map(values: &[&[f32]]) -> ParamMap {
        let mut p = ParamMap::new();
        for (i, v) in values.iter().enumerate() {
            p.insert(format!("t{i}"), Tensor::new(vec![v.len()], v.to_vec()).unwrap());
        }
        p
    }

    #[test]
    fn example() {
        let mut p = map(&[&[0.1, -0.2, 0.3, -0.4]]);
        prune_params(&mut p, 0.25).unwrap();
        assert_eq!(p, map(&[&[0.0, -0.2, 0.3, -0.4]]));
    }

    #[test]
    fn zero_sparsity_is_identity() {
        let mut p = map(&[&[0.1, -0.2], &[0.0]]);
        let masks = prune_params(&mut p, 0.0).unwrap();
        assert_eq!(p, map(&[&[0.1, -0.2], &[0.0]]));
        assert_eq!(masks.pruned(), 0);
    }

    #[test]
    fn global_across_tensors_with_stable_ties() {
        let mut p = map(&[&[0.5, 0.1], &[-0.1, 0.9, 0.1]]);
        let masks = prune_params(&mut p, 0.4).unwrap();
        assert_eq!(masks.pruned(), 2);
        assert_eq!(p, map(&[&[0.5, 0.0], &[0.0, 0.9, 0.1]]));
    }

    #[test]
    fn rejects_bad_sparsity() {
        let mut p = map(&[&[1.0]]);
        assert!(prune_params(&mut p, 1.0).is_err());
        assert!(prune_params(&mut p, -0.1).is_err());
    }
}
