use super::config::HNeRVConfig;
use super::model::DecoderSpec;
use crate::error::{Error, Result};

/// Stored scalar count: embeddings for every frame plus decoder parameters.
pub fn total_size(config: &HNeRVConfig, num_frames: usize) -> Result<usize> {
    let decoder = DecoderSpec::new(config)?;
    Ok(num_frames * config.embedding_spec().values_per_frame() + decoder.param_count())
}

#[derive(Clone, Debug, PartialEq)]
pub struct WidthSolution {
    pub c2: usize,
    pub total_size: usize,
    pub decoder_params: usize,
    pub embedding_values: usize,
    pub target: u64,
    /// `(target - total_size) / target`.
    pub relative_gap: f64,
}

fn size_at(config: &HNeRVConfig, c2: usize, num_frames: usize) -> Result<usize> {
    let mut c = config.clone();
    c.c2 = c2;
    total_size(&c, num_frames)
}

/// Largest `c2` whose total size fits `config.target_params`.
pub fn solve_width(config: &HNeRVConfig, num_frames: usize) -> Result<WidthSolution> {
    let target = config
        .target_params
        .ok_or_else(|| Error::config("solve_width needs target_params"))?;
    let fits = |c2: usize| -> Result<bool> { Ok(size_at(config, c2, num_frames)? as u64 <= target) };
    let lo_c2 = 1;
    if !fits(lo_c2)? {
        return Err(Error::config(format!(
            "target {target} is infeasible; minimum achievable size is {}",
            size_at(config, lo_c2, num_frames)?
        )));
    }
    let mut lo = lo_c2;
    let mut hi = 2;
    while fits(hi)? {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if fits(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut solved = config.clone();
    solved.c2 = lo;
    let decoder_params = DecoderSpec::new(&solved)?.param_count();
    let embedding_values = num_frames * solved.embedding_spec().values_per_frame();
    let total = decoder_params + embedding_values;
    Ok(WidthSolution {
        c2: lo,
        total_size: total,
        decoder_params,
        embedding_values,
        target,
        relative_gap: (target as f64 - total as f64) / target as f64,
    })
}

/// Kernel bounds and reduction factor of one rebalancing variant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RebalanceVariant {
    pub k_min: usize,
    pub k_max: usize,
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RebalanceRow {
    pub variant: RebalanceVariant,
    pub c2: usize,
    pub kernels: Vec<usize>,
    pub total_size: usize,
    pub decoder_params: usize,
    /// (block name, count, share of decoder params) for stem, blocks, head.
    pub blocks: Vec<(String, usize, f64)>,
    pub psnr: Option<f64>,
    pub ms_ssim: Option<f64>,
}

impl RebalanceRow {
    /// Parameter ratio between the last and the first decoder stage.
    pub fn last_to_first_ratio(&self) -> f64 {
        let stages: Vec<usize> = self
            .blocks
            .iter()
            .filter(|(n, _, _)| n.starts_with("block"))
            .map(|(_, c, _)| *c)
            .collect();
        *stages.last().unwrap_or(&0) as f64 / *stages.first().unwrap_or(&1) as f64
    }

    pub fn stage_share(&self, stage_index: usize) -> f64 {
        let name = format!("block{stage_index}");
        self.blocks
            .iter()
            .find(|(n, _, _)| *n == name)
            .map_or(0.0, |b| b.2)
    }
}

/// Width-solves every variant against `base.target_params` and reports
/// per-block parameter shares. Quality columns are filled in after training.
pub fn rebalance_report(
    base: &HNeRVConfig,
    variants: &[RebalanceVariant],
    num_frames: usize,
) -> Result<Vec<RebalanceRow>> {
    variants
        .iter()
        .map(|&v| {
            let mut c = base.clone();
            c.k_min = v.k_min;
            c.k_max = v.k_max;
            c.r = v.r;
            let sol = solve_width(&c, num_frames)?;
            c.c2 = sol.c2;
            let dec = DecoderSpec::new(&c)?;
            let total = dec.param_count() as f64;
            Ok(RebalanceRow {
                variant: v,
                c2: sol.c2,
                kernels: dec.kernels.clone(),
                total_size: sol.total_size,
                decoder_params: sol.decoder_params,
                blocks: dec
                    .per_block_counts()
                    .into_iter()
                    .map(|(n, k)| (n, k, k as f64 / total))
                    .collect(),
                psnr: None,
                ms_ssim: None,
            })
        })
        .collect()
}
