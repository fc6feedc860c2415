use std::fs;
use std::path::{Path, PathBuf};

use super::frame::{FrameBuffer, FrameSequence, SourceDescriptor};
use crate::error::{Error, Result};
use crate::tensor::MaskTensor;

pub fn frame_file_name(t: usize) -> String {
    format!("frame_{t:06}.png")
}

pub fn write_png(frame: &FrameBuffer, path: &Path) -> Result<()> {
    let img = image::RgbImage::from_raw(frame.width() as u32, frame.height() as u32, frame.to_rgb8())
        .ok_or_else(|| Error::format("frame buffer size mismatch"))?;
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

pub fn read_png(path: &Path) -> Result<FrameBuffer> {
    let img = image::open(path)?.to_rgb8();
    FrameBuffer::from_rgb8(img.height() as usize, img.width() as usize, img.as_raw())
}

/// Writes frame `i` of `frames` as `frame_{ids[i]:06}.png`.
pub fn write_png_frames(frames: &[FrameBuffer], ids: &[usize], dir: &Path) -> Result<Vec<PathBuf>> {
    if frames.len() != ids.len() {
        return Err(Error::usage("frame and index lists differ in length"));
    }
    fs::create_dir_all(dir)?;
    frames
        .iter()
        .zip(ids)
        .map(|(f, &t)| {
            let p = dir.join(frame_file_name(t));
            write_png(f, &p)?;
            Ok(p)
        })
        .collect()
}

pub fn write_png_dir(seq: &FrameSequence, dir: &Path) -> Result<Vec<PathBuf>> {
    let ids: Vec<usize> = (0..seq.len()).collect();
    write_png_frames(seq.frames(), &ids, dir)
}

/// Numbered `frame_*.png` files in `dir`, sorted by number.
pub fn list_png_frames(dir: &Path) -> Result<Vec<(usize, PathBuf)>> {
    let mut found = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else { continue };
        if let Some(num) = name.strip_prefix("frame_").and_then(|r| r.strip_suffix(".png")) {
            if let Ok(n) = num.parse::<usize>() {
                found.push((n, path));
            }
        }
    }
    found.sort();
    Ok(found)
}

pub fn read_png_dir(dir: &Path) -> Result<FrameSequence> {
    let files = list_png_frames(dir)?;
    if files.is_empty() {
        return Err(Error::format(format!("no frame_*.png files in {}", dir.display())));
    }
    let frames = files.iter().map(|(_, p)| read_png(p)).collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames, SourceDescriptor::ImageDirectory(dir.to_path_buf()))
}

/// Sidecar header path of a raw stream: `<path>.hdr`.
pub fn raw_header_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".hdr");
    PathBuf::from(s)
}

/// Writes planar RGB8 frames back to back plus a text header.
pub fn write_raw(seq: &FrameSequence, path: &Path) -> Result<()> {
    let mut bytes = Vec::with_capacity(3 * seq.pixels());
    for f in seq.frames() {
        bytes.extend(f.data().iter().map(|&v| super::frame::to_u8(v)));
    }
    fs::write(path, bytes)?;
    let header = format!(
        "format=rgb8_planar\nframes={}\nheight={}\nwidth={}\n",
        seq.len(),
        seq.height(),
        seq.width()
    );
    fs::write(raw_header_path(path), header)?;
    Ok(())
}

pub fn read_raw(path: &Path) -> Result<FrameSequence> {
    let header = fs::read_to_string(raw_header_path(path))?;
    let mut dims = [None; 3];
    for line in header.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::format(format!("raw header line {line:?} is not key=value")))?;
        let slot = match k.trim() {
            "frames" => 0,
            "height" => 1,
            "width" => 2,
            "format" if v.trim() == "rgb8_planar" => continue,
            _ => return Err(Error::format(format!("unsupported raw header entry {line:?}"))),
        };
        dims[slot] = Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::format(format!("raw header value {v:?} is not an integer")))?,
        );
    }
    let [Some(t), Some(h), Some(w)] = dims else {
        return Err(Error::format("raw header needs frames, height and width"));
    };
    let bytes = fs::read(path)?;
    let per = 3 * h * w;
    if per == 0 || t == 0 || bytes.len() != t * per {
        return Err(Error::format(format!(
            "raw stream has {} bytes, expected {} for {t} frames of {h}x{w}",
            bytes.len(),
            t * per
        )));
    }
    let frames = bytes
        .chunks_exact(per)
        .map(|c| FrameBuffer::new(h, w, c.iter().map(|&b| b as f32 / 255.0).collect()))
        .collect::<Result<Vec<_>>>()?;
    FrameSequence::new(frames, SourceDescriptor::RawStream(path.to_path_buf()))
}

/// Loads a directory of PNG frames or a raw stream with its sidecar header.
pub fn read_sequence(path: &Path) -> Result<FrameSequence> {
    if path.is_dir() {
        read_png_dir(path)
    } else {
        read_raw(path)
    }
}

/// Axis-aligned rectangle in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoxRegion {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// `[1, 1, H, W]` mask with ones inside any box (clipped to the frame).
pub fn box_mask(height: usize, width: usize, boxes: &[BoxRegion]) -> MaskTensor {
    let mut bits = vec![0u8; height * width];
    for b in boxes {
        for y in b.y..(b.y + b.h).min(height) {
            for x in b.x..(b.x + b.w).min(width) {
                bits[y * width + x] = 1;
            }
        }
    }
    MaskTensor::new(vec![1, 1, height, width], bits).expect("mask bits are binary")
}

/// Parses `x y w h` per line (commas also accepted, `#` starts a comment).
pub fn parse_box_list(text: &str) -> Result<Vec<BoxRegion>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let nums = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(str::parse::<usize>)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::format(format!("box list line {}: expected integers", n + 1)))?;
        let [x, y, w, h] = nums[..] else {
            return Err(Error::format(format!("box list line {}: expected x y w h", n + 1)));
        };
        out.push(BoxRegion { x, y, w, h });
    }
    Ok(out)
}

/// Binary mask from a PNG: any non-zero pixel marks the region.
pub fn read_mask_png(path: &Path, height: usize, width: usize) -> Result<MaskTensor> {
    let img = image::open(path)?.to_luma8();
    if (img.height() as usize, img.width() as usize) != (height, width) {
        return Err(Error::format(format!(
            "mask {} is {}x{}, expected {height}x{width}",
            path.display(),
            img.height(),
            img.width()
        )));
    }
    let bits = img.as_raw().iter().map(|&v| u8::from(v > 0)).collect();
    MaskTensor::new(vec![1, 1, height, width], bits)
}

pub fn write_mask_png(mask: &MaskTensor, path: &Path) -> Result<()> {
    let s = mask.shape();
    let (h, w) = (s[s.len() - 2], s[s.len() - 1]);
    let img = image::GrayImage::from_raw(w as u32, h as u32, mask.bits()[..h * w].iter().map(|&b| b * 255).collect())
        .ok_or_else(|| Error::format("mask size mismatch"))?;
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}
