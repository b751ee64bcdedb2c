//! Raster helpers: resize, crop, and frame/heatmap files on disk.
//!
//! Frames are `[3, H, W]` tensors with values in [0, 1]; directories hold
//! numbered PNG or PPM images index-matched to `frame_index`.

use std::path::{Path, PathBuf};

use gaze_tensor::{Element, Tensor};
use image::ImageReader;

use crate::error::{Error, Result};

/// Bilinear resize of a `[C, H, W]` tensor.
pub fn bilinear_resize<T: Element>(src: &Tensor<T>, oh: usize, ow: usize) -> Tensor<T> {
    let (c, h, w) = (src.shape()[0], src.shape()[1], src.shape()[2]);
    if h == oh && w == ow {
        return src.clone();
    }
    let mut out = Tensor::zeros(&[c, oh, ow]);
    let sy = h as f64 / oh as f64;
    let sx = w as f64 / ow as f64;
    for ci in 0..c {
        for oy in 0..oh {
            let fy = ((oy as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
            let y0 = fy.floor() as usize;
            let y1 = (y0 + 1).min(h - 1);
            let wy = T::from_f64(fy - y0 as f64);
            for ox in 0..ow {
                let fx = ((ox as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
                let x0 = fx.floor() as usize;
                let x1 = (x0 + 1).min(w - 1);
                let wx = T::from_f64(fx - x0 as f64);
                let v00 = src.get(&[ci, y0, x0]);
                let v01 = src.get(&[ci, y0, x1]);
                let v10 = src.get(&[ci, y1, x0]);
                let v11 = src.get(&[ci, y1, x1]);
                let top = v00 + (v01 - v00) * wx;
                let bot = v10 + (v11 - v10) * wx;
                out.set(&[ci, oy, ox], top + (bot - top) * wy);
            }
        }
    }
    out
}

/// Cut the normalized box out of a `[C, H, W]` frame and resize to
/// `out_size` square. Degenerate boxes are expanded to one pixel.
pub fn crop_resize<T: Element>(src: &Tensor<T>, bbox: [f64; 4], out_size: usize) -> Tensor<T> {
    let (c, h, w) = (src.shape()[0], src.shape()[1], src.shape()[2]);
    let x0 = ((bbox[0] * w as f64).round() as usize).min(w - 1);
    let y0 = ((bbox[1] * h as f64).round() as usize).min(h - 1);
    let x1 = ((bbox[2] * w as f64).round() as usize).clamp(x0 + 1, w);
    let y1 = ((bbox[3] * h as f64).round() as usize).clamp(y0 + 1, h);
    let (cw, ch) = (x1 - x0, y1 - y0);
    let mut crop = Tensor::zeros(&[c, ch, cw]);
    for ci in 0..c {
        for y in 0..ch {
            for x in 0..cw {
                crop.set(&[ci, y, x], src.get(&[ci, y0 + y, x0 + x]));
            }
        }
    }
    bilinear_resize(&crop, out_size, out_size)
}

fn frame_file(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("frame_{index:06}.png"))
}

/// Load `dir/frame_<index>.png` (or `.ppm`) as a `[3, H, W]` tensor in [0, 1].
pub fn load_frame(dir: &Path, index: usize) -> Result<Tensor<f32>> {
    let png = frame_file(dir, index);
    let path = if png.exists() {
        png
    } else {
        let ppm = dir.join(format!("frame_{index:06}.ppm"));
        if !ppm.exists() {
            return Err(Error::Data(format!(
                "no frame {index} under {}",
                dir.display()
            )));
        }
        ppm
    };
    load_image(&path)
}

pub fn load_image(path: &Path) -> Result<Tensor<f32>> {
    let img = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::Image {
            path: path.to_path_buf(),
            source: e,
        })?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut out = Tensor::zeros(&[3, h, w]);
    for (x, y, p) in img.enumerate_pixels() {
        for c in 0..3 {
            out.set(&[c, y as usize, x as usize], f32::from(p.0[c]) / 255.0);
        }
    }
    Ok(out)
}

/// Write a `[3, H, W]` tensor (values clamped to [0, 1]) as a PNG frame.
pub fn save_frame(frame: &Tensor<f32>, dir: &Path, index: usize) -> Result<()> {
    save_image(frame, &frame_file(dir, index))
}

pub fn save_image(frame: &Tensor<f32>, path: &Path) -> Result<()> {
    let (h, w) = (frame.shape()[1], frame.shape()[2]);
    let mut img = image::RgbImage::new(w as u32, h as u32);
    for y in 0..h {
        for x in 0..w {
            let px = |c: usize| (frame.get(&[c, y, x]).clamp(0.0, 1.0) * 255.0).round() as u8;
            img.put_pixel(x as u32, y as u32, image::Rgb([px(0), px(1), px(2)]));
        }
    }
    img.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        source: e,
    })
}

/// Write a `[H, W]` (or `[1, H, W]`/`[1, 1, H, W]`) map as 8-bit grayscale.
pub fn save_gray(map: &Tensor<f32>, path: &Path) -> Result<()> {
    let dims = map.shape();
    let (h, w) = (dims[dims.len() - 2], dims[dims.len() - 1]);
    if map.numel() != h * w {
        return Err(Error::Data(format!(
            "expected a single-channel map, got shape {dims:?}"
        )));
    }
    let mut img = image::GrayImage::new(w as u32, h as u32);
    for y in 0..h {
        for x in 0..w {
            let v = (map.data()[y * w + x].clamp(0.0, 1.0) * 255.0).round() as u8;
            img.put_pixel(x as u32, y as u32, image::Luma([v]));
        }
    }
    img.save(path).map_err(|e| Error::Image {
        path: path.to_path_buf(),
        source: e,
    })
}
