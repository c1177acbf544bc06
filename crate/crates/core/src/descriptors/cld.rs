use std::f64::consts::PI;
use std::sync::OnceLock;

use super::{DescriptorKind, FeatureVector};
use crate::error::{Error, Result};
use crate::raster::{convert_space, grid_average, ColorSpace, RasterImage};

/// JPEG zigzag order: `ZIGZAG[i]` is the row-major index of the i-th scanned
/// coefficient.
pub const ZIGZAG: [usize; 64] = [
    0, 1, 8, 16, 9, 2, 3, 10, 17, 24, 32, 25, 18, 11, 4, 5, 12, 19, 26, 33, 40, 48, 41, 34, 27,
    20, 13, 6, 7, 14, 21, 28, 35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51, 58,
    59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63,
];

/// `basis[u][m] = c(u) cos((2m+1) u pi / 16)`
fn basis() -> &'static [[f64; 8]; 8] {
    static BASIS: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    BASIS.get_or_init(|| {
        let mut b = [[0.0; 8]; 8];
        for (u, row) in b.iter_mut().enumerate() {
            let c = if u == 0 { (1.0f64 / 8.0).sqrt() } else { (2.0f64 / 8.0).sqrt() };
            for (m, v) in row.iter_mut().enumerate() {
                *v = c * ((2 * m + 1) as f64 * u as f64 * PI / 16.0).cos();
            }
        }
        b
    })
}

/// Orthonormal 8x8 type-II DCT, applied separably on a row-major block.
pub fn dct_2d(block: &[f64; 64]) -> [f64; 64] {
    let c = basis();
    let mut rows = [0.0; 64];
    for m in 0..8 {
        for v in 0..8 {
            rows[m * 8 + v] = (0..8).map(|n| c[v][n] * block[m * 8 + n]).sum();
        }
    }
    let mut out = [0.0; 64];
    for u in 0..8 {
        for v in 0..8 {
            out[u * 8 + v] = (0..8).map(|m| c[u][m] * rows[m * 8 + v]).sum();
        }
    }
    out
}

/// Inverse of [`dct_2d`] (type-III with the same scaling).
pub fn idct_2d(coeffs: &[f64; 64]) -> [f64; 64] {
    let c = basis();
    let mut cols = [0.0; 64];
    for m in 0..8 {
        for v in 0..8 {
            cols[m * 8 + v] = (0..8).map(|u| c[u][m] * coeffs[u * 8 + v]).sum();
        }
    }
    let mut out = [0.0; 64];
    for m in 0..8 {
        for n in 0..8 {
            out[m * 8 + n] = (0..8).map(|v| c[v][n] * cols[m * 8 + v]).sum();
        }
    }
    out
}

/// 192 values: zigzag-scanned DCT coefficients of the 8x8 Y, Cb and Cr
/// cell means, concatenated in that order.
pub fn extract_cld_raw(img: &RasterImage) -> Result<FeatureVector> {
    if img.width() < 8 || img.height() < 8 {
        return Err(Error::ImageTooSmall {
            width: img.width(),
            height: img.height(),
            reason: "color layout needs at least 8x8 pixels",
        });
    }
    let ycc;
    let ycc = match img.space() {
        ColorSpace::YCbCr => img,
        _ => {
            ycc = convert_space(img, ColorSpace::YCbCr)?;
            &ycc
        }
    };
    let grid = grid_average(ycc, 8, 8)?;
    let mut values = Vec::with_capacity(DescriptorKind::CldRaw.dim());
    for channel in 0..3 {
        let mut plane = [0.0; 64];
        plane.copy_from_slice(&grid.channel_plane(channel));
        let coeffs = dct_2d(&plane);
        values.extend(ZIGZAG.iter().map(|&i| coeffs[i]));
    }
    FeatureVector::new(DescriptorKind::CldRaw, values)
}
