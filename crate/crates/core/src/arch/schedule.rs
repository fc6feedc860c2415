//! Kernel-size and channel-width schedules of the decoder stages.

use crate::error::{Error, Result};

/// Kernel size per stage: `k_min`, then `min(k_min + 2, k_max)`, then
/// `k_max` for every later stage. With two or more stages the last stage
/// always gets `k_max`.
pub fn kernel_schedule(num_stages: usize, k_min: usize, k_max: usize) -> Result<Vec<usize>> {
    if k_min % 2 == 0 || k_max % 2 == 0 {
        return Err(Error::config(format!(
            "kernel bounds must be odd, got ({k_min}, {k_max})"
        )));
    }
    if k_min > k_max {
        return Err(Error::config(format!("k_min {k_min} exceeds k_max {k_max}")));
    }
    if num_stages == 0 {
        return Err(Error::config("decoder needs at least one stage"));
    }
    Ok((0..num_stages)
        .map(|j| match j {
            0 => k_min,
            _ if j + 1 == num_stages => k_max,
            1 => (k_min + 2).min(k_max),
            _ => k_max,
        })
        .collect())
}

/// Channel widths of the decoder stages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelSchedule {
    /// Input width of stage `j` (0-based) is `max(round(c2 / r^j), ch_min)`.
    pub stage_inputs: Vec<usize>,
    /// Input width of the 3×3 output head.
    pub head_input: usize,
}

impl ChannelSchedule {
    /// Output width of stage `j`: the next stage's input, or the head's.
    pub fn stage_output(&self, j: usize) -> usize {
        self.stage_inputs
            .get(j + 1)
            .copied()
            .unwrap_or(self.head_input)
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

pub fn channel_schedule(c2: usize, r: f64, ch_min: usize, num_stages: usize) -> ChannelSchedule {
    let width = |j: usize| round_half_up(c2 as f64 / r.powf(j as f64)).max(ch_min);
    ChannelSchedule {
        stage_inputs: (0..num_stages).map(width).collect(),
        head_input: width(num_stages),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_schedule(5, 1, 5).unwrap(), vec![1, 3, 5, 5, 5]);
        assert_eq!(kernel_schedule(5, 3, 3).unwrap(), vec![3, 3, 3, 3, 3]);
        assert_eq!(kernel_schedule(2, 1, 7).unwrap(), vec![1, 7]);
        assert_eq!(kernel_schedule(1, 1, 5).unwrap(), vec![1]);
        assert_eq!(kernel_schedule(3, 1, 7).unwrap(), vec![1, 3, 7]);
        assert!(matches!(kernel_schedule(5, 2, 5), Err(Error::Config(_))));
        assert!(kernel_schedule(5, 1, 4).is_err());
    }

    #[test]
    fn channel_examples() {
        // 68 / 1.2^j = 68, 56.67, 47.22, 39.35, 32.79, 27.33
        let s = channel_schedule(68, 1.2, 12, 5);
        assert_eq!(s.stage_inputs, vec![68, 57, 47, 39, 33]);
        assert_eq!(s.head_input, 27);

        let s = channel_schedule(64, 1.0, 12, 5);
        assert_eq!(s.stage_inputs, vec![64; 5]);
        assert_eq!(s.head_input, 64);

        let s = channel_schedule(16, 2.0, 12, 5);
        assert_eq!(s.stage_inputs, vec![16, 12, 12, 12, 12]);
        assert_eq!(s.head_input, 12);
    }

    #[test]
    fn round_half_up_on_ties() {
        assert_eq!(round_half_up(2.5), 3);
        assert_eq!(round_half_up(3.5), 4);
        assert_eq!(round_half_up(2.49), 2);
    }
}
