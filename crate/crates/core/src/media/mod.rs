//! Frames, video I/O, synthetic content and quality metrics.

mod frame;
mod io;
mod metrics;
mod synth;

pub use frame::{quantize_8bit, FrameBuffer, FrameSequence, SourceDescriptor};
pub use io::{
    box_mask, frame_file_name, list_png_frames, parse_box_list, raw_header_path, read_mask_png, read_png,
    read_png_dir, read_raw, read_sequence, write_mask_png, write_png, write_png_dir, write_png_frames, write_raw,
    BoxRegion,
};
pub use metrics::{
    bpp, masked_psnr, ms_ssim, ms_ssim_scales, mse, ppp, psnr, psnr_from_mse, MetricReport, MsSsim,
    MS_SSIM_WEIGHTS, PSNR_CAP,
};
pub use synth::{generate_synthetic, mean_interframe_mse, SynthKind};
