use serde::{Deserialize, Serialize};

use super::{DescriptorKind, FeatureVector};
use crate::error::{Error, Result};
use crate::raster::{cell_span, convert_space, ColorSpace, RasterImage};

const SQRT2: f64 = std::f64::consts::SQRT_2;

// Sub-block weights in row-major order: top-left, top-right, bottom-left, bottom-right.
const FILTER_VERT: [f64; 4] = [1.0, -1.0, 1.0, -1.0];
const FILTER_HORZ: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
const FILTER_DIAG45: [f64; 4] = [SQRT2, 0.0, 0.0, -SQRT2];
const FILTER_DIAG135: [f64; 4] = [0.0, SQRT2, -SQRT2, 0.0];
const FILTER_NONDIR: [f64; 4] = [2.0, -2.0, -2.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeClass {
    Vert,
    Horz,
    Diag45,
    Diag135,
    NonDir,
    None,
}

impl EdgeClass {
    /// Histogram bin within a sub-image, `None` for blocks without an edge.
    pub fn bin(self) -> Option<usize> {
        match self {
            EdgeClass::Vert => Some(0),
            EdgeClass::Horz => Some(1),
            EdgeClass::Diag45 => Some(2),
            EdgeClass::Diag135 => Some(3),
            EdgeClass::NonDir => Some(4),
            EdgeClass::None => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EhdParams {
    pub subimage_rows: usize,
    pub subimage_cols: usize,
    pub target_blocks: usize,
    pub edge_threshold: f64,
}

impl Default for EhdParams {
    fn default() -> Self {
        Self {
            subimage_rows: 4,
            subimage_cols: 4,
            target_blocks: 1024,
            edge_threshold: 11.0,
        }
    }
}

/// Classifies one block from the mean gray values of its four sub-blocks.
/// Ties go to the earlier class in declaration order.
pub fn block_edge_class(a: [f64; 4], threshold: f64) -> EdgeClass {
    let strength = |f: &[f64; 4]| a.iter().zip(f).map(|(x, w)| x * w).sum::<f64>().abs();
    let candidates = [
        (EdgeClass::Vert, strength(&FILTER_VERT)),
        (EdgeClass::Horz, strength(&FILTER_HORZ)),
        (EdgeClass::Diag45, strength(&FILTER_DIAG45)),
        (EdgeClass::Diag135, strength(&FILTER_DIAG135)),
        (EdgeClass::NonDir, strength(&FILTER_NONDIR)),
    ];
    let (mut best, mut best_s) = candidates[0];
    for &(class, s) in &candidates[1..] {
        if s > best_s {
            best = class;
            best_s = s;
        }
    }
    if best_s >= threshold {
        best
    } else {
        EdgeClass::None
    }
}

/// Largest even block side `b >= 2` with `(W/b)(H/b) >= target`.
pub fn ehd_block_size(width: usize, height: usize, target: usize) -> usize {
    let area = width * height;
    let mut b = 2;
    while area >= target * (b + 2) * (b + 2) {
        b += 2;
    }
    b
}

pub fn extract_ehd(img: &RasterImage, params: &EhdParams) -> Result<FeatureVector> {
    let (w, h) = (img.width(), img.height());
    if w < 8 || h < 8 {
        return Err(Error::ImageTooSmall {
            width: w,
            height: h,
            reason: "edge histogram needs at least 8x8 pixels",
        });
    }
    if params.subimage_rows * params.subimage_cols * 5 != DescriptorKind::Ehd.dim() {
        return Err(Error::InvalidArgument(format!(
            "edge histogram needs a sub-image grid of 16 cells, got {}x{}",
            params.subimage_rows, params.subimage_cols
        )));
    }
    let gray;
    let gray = match img.space() {
        ColorSpace::Gray => img,
        _ => {
            gray = convert_space(img, ColorSpace::Gray)?;
            &gray
        }
    };
    let b = ehd_block_size(w, h, params.target_blocks.max(1));
    let half = b / 2;
    let sub_mean = |x0: usize, y0: usize| {
        let mut s = 0.0;
        for y in y0..y0 + half {
            for x in x0..x0 + half {
                s += gray.pixel(x, y)[0];
            }
        }
        s / (half * half) as f64
    };

    let mut values = Vec::with_capacity(DescriptorKind::Ehd.dim());
    for sr in 0..params.subimage_rows {
        let ys = cell_span(sr, params.subimage_rows, h);
        for sc in 0..params.subimage_cols {
            let xs = cell_span(sc, params.subimage_cols, w);
            let (bx, by) = (xs.len() / b, ys.len() / b);
            if bx == 0 || by == 0 {
                return Err(Error::ImageTooSmall {
                    width: w,
                    height: h,
                    reason: "a sub-image cannot hold one edge block",
                });
            }
            let mut counts = [0usize; 5];
            for j in 0..by {
                let y0 = ys.start + j * b;
                for i in 0..bx {
                    let x0 = xs.start + i * b;
                    let a = [
                        sub_mean(x0, y0),
                        sub_mean(x0 + half, y0),
                        sub_mean(x0, y0 + half),
                        sub_mean(x0 + half, y0 + half),
                    ];
                    if let Some(bin) = block_edge_class(a, params.edge_threshold).bin() {
                        counts[bin] += 1;
                    }
                }
            }
            let total = (bx * by) as f64;
            values.extend(counts.iter().map(|&c| c as f64 / total));
        }
    }
    FeatureVector::new(DescriptorKind::Ehd, values)
}
