//! Decoded pixel grids and the color-space and averaging primitives the
//! descriptors are built on.

use std::ops::Range;

use image::ImageFormat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ColorSpace {
    Rgb,
    Gray,
    Hsv,
    YCbCr,
}

impl ColorSpace {
    pub fn channels(self) -> usize {
        match self {
            ColorSpace::Gray => 1,
            _ => 3,
        }
    }

    fn accepts(self, channel: usize, v: f64) -> bool {
        if !v.is_finite() {
            return false;
        }
        match (self, channel) {
            (ColorSpace::Hsv, 0) => (0.0..360.0).contains(&v),
            (ColorSpace::Hsv, _) => (0.0..=1.0).contains(&v),
            _ => (0.0..=255.0).contains(&v),
        }
    }
}

/// Interleaved per-pixel samples, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    space: ColorSpace,
    samples: Vec<f64>,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, space: ColorSpace, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        let channels = space.channels();
        let expected = width * height * channels;
        if samples.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: samples.len(),
            });
        }
        if let Some(i) = samples
            .iter()
            .enumerate()
            .position(|(i, &v)| !space.accepts(i % channels, v))
        {
            return Err(Error::InvalidArgument(format!(
                "sample {i} = {} is out of range for {space:?}",
                samples[i]
            )));
        }
        Ok(Self {
            width,
            height,
            space,
            samples,
        })
    }

    /// Builds an RGB image from 8-bit interleaved samples.
    pub fn from_rgb8(width: usize, height: usize, rgb: &[u8]) -> Result<Self> {
        Self::new(
            width,
            height,
            ColorSpace::Rgb,
            rgb.iter().map(|&b| f64::from(b)).collect(),
        )
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn space(&self) -> ColorSpace {
        self.space
    }

    pub fn channels(&self) -> usize {
        self.space.channels()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn pixel(&self, x: usize, y: usize) -> &[f64] {
        let c = self.channels();
        let start = (y * self.width + x) * c;
        &self.samples[start..start + c]
    }

    pub fn pixels(&self) -> impl Iterator<Item = &[f64]> {
        self.samples.chunks_exact(self.channels())
    }
}

/// Decodes a PNG or JPEG file into an RGB image. Alpha is dropped.
pub fn decode_image(bytes: &[u8]) -> Result<RasterImage> {
    let format = image::guess_format(bytes).map_err(|e| Error::Decode(e.to_string()))?;
    if !matches!(format, ImageFormat::Png | ImageFormat::Jpeg) {
        return Err(Error::Decode(format!("unsupported format {format:?}")));
    }
    let decoded = image::load_from_memory_with_format(bytes, format)
        .map_err(|e| Error::Decode(e.to_string()))?
        .to_rgb8();
    let (w, h) = decoded.dimensions();
    RasterImage::from_rgb8(w as usize, h as usize, decoded.as_raw())
}

pub fn decode_file(path: &std::path::Path) -> Result<RasterImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    decode_image(&bytes).map_err(|e| match e {
        Error::Decode(msg) => Error::Decode(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn rgb_to_gray(r: f64, g: f64, b: f64) -> f64 {
    (0.299 * r + 0.587 * g + 0.114 * b).clamp(0.0, 255.0)
}

/// Full-range BT.601.
pub fn rgb_to_ycbcr(r: f64, g: f64, b: f64) -> [f64; 3] {
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    let cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    let cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    [y.clamp(0.0, 255.0), cb.clamp(0.0, 255.0), cr.clamp(0.0, 255.0)]
}

/// Hexcone HSV with H in degrees [0, 360) and S, V in [0, 1].
pub fn rgb_to_hsv(r: f64, g: f64, b: f64) -> [f64; 3] {
    let (r, g, b) = (r / 255.0, g / 255.0, b / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    let mut h = if delta == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / delta)
    } else if max == g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    if h < 0.0 {
        h += 360.0;
    }
    if h >= 360.0 {
        h -= 360.0;
    }
    [h, s.clamp(0.0, 1.0), max.clamp(0.0, 1.0)]
}

pub fn convert_space(img: &RasterImage, target: ColorSpace) -> Result<RasterImage> {
    if img.space != ColorSpace::Rgb || target == ColorSpace::Rgb {
        return Err(Error::UnsupportedConversion {
            from: img.space,
            to: target,
        });
    }
    let mut samples = Vec::with_capacity(img.width * img.height * target.channels());
    for px in img.pixels() {
        let (r, g, b) = (px[0], px[1], px[2]);
        match target {
            ColorSpace::Gray => samples.push(rgb_to_gray(r, g, b)),
            ColorSpace::Hsv => samples.extend(rgb_to_hsv(r, g, b)),
            ColorSpace::YCbCr => samples.extend(rgb_to_ycbcr(r, g, b)),
            ColorSpace::Rgb => unreachable!(),
        }
    }
    Ok(RasterImage {
        width: img.width,
        height: img.height,
        space: target,
        samples,
    })
}

/// Span of cell `index` when `extent` pixels are split into `cells` parts
/// with floor boundaries.
pub fn cell_span(index: usize, cells: usize, extent: usize) -> Range<usize> {
    (index * extent / cells)..((index + 1) * extent / cells)
}

/// Per-cell channel means, stored row-major as `[row][col][channel]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMeans {
    pub rows: usize,
    pub cols: usize,
    pub channels: usize,
    pub values: Vec<f64>,
}

impl GridMeans {
    pub fn get(&self, row: usize, col: usize, channel: usize) -> f64 {
        self.values[(row * self.cols + col) * self.channels + channel]
    }

    /// One `rows x cols` plane for a single channel, row-major.
    pub fn channel_plane(&self, channel: usize) -> Vec<f64> {
        self.values
            .iter()
            .skip(channel)
            .step_by(self.channels)
            .copied()
            .collect()
    }
}

pub fn grid_average(img: &RasterImage, rows: usize, cols: usize) -> Result<GridMeans> {
    if rows == 0 || cols == 0 || rows > img.height || cols > img.width {
        return Err(Error::GridTooFine {
            rows,
            cols,
            height: img.height,
            width: img.width,
        });
    }
    let channels = img.channels();
    let mut values = Vec::with_capacity(rows * cols * channels);
    for r in 0..rows {
        let ys = cell_span(r, rows, img.height);
        for c in 0..cols {
            let xs = cell_span(c, cols, img.width);
            let mut sums = vec![0.0; channels];
            for y in ys.clone() {
                for x in xs.clone() {
                    for (s, v) in sums.iter_mut().zip(img.pixel(x, y)) {
                        *s += v;
                    }
                }
            }
            let n = (ys.len() * xs.len()) as f64;
            values.extend(sums.into_iter().map(|s| s / n));
        }
    }
    Ok(GridMeans {
        rows,
        cols,
        channels,
        values,
    })
}
