use super::{DescriptorKind, FeatureVector};
use crate::error::{Error, Result};
use crate::raster::{convert_space, ColorSpace, RasterImage};

const H_LEVELS: usize = 16;
const S_LEVELS: usize = 4;
const V_LEVELS: usize = 4;

fn quantize(v: f64, range: f64, levels: usize) -> usize {
    ((v / range * levels as f64) as usize).min(levels - 1)
}

/// Histogram bin for an HSV sample under the fixed 16x4x4 quantization.
pub fn scd_bin(h: f64, s: f64, v: f64) -> usize {
    quantize(h, 360.0, H_LEVELS) * (S_LEVELS * V_LEVELS)
        + quantize(s, 1.0, S_LEVELS) * V_LEVELS
        + quantize(v, 1.0, V_LEVELS)
}

/// Unit-sum 256-bin HSV histogram.
pub fn scd_histogram(img: &RasterImage) -> Result<Vec<f64>> {
    let hsv;
    let hsv = match img.space() {
        ColorSpace::Hsv => img,
        _ => {
            hsv = convert_space(img, ColorSpace::Hsv)?;
            &hsv
        }
    };
    let mut counts = vec![0u64; H_LEVELS * S_LEVELS * V_LEVELS];
    for px in hsv.pixels() {
        counts[scd_bin(px[0], px[1], px[2])] += 1;
    }
    let total = (hsv.width() * hsv.height()) as f64;
    Ok(counts.into_iter().map(|c| c as f64 / total).collect())
}

pub fn extract_scd(img: &RasterImage) -> Result<FeatureVector> {
    let hist = scd_histogram(img)?;
    FeatureVector::new(DescriptorKind::Scd, haar_1d(&hist)?)
}

/// Unnormalized Haar transform: each pass maps pairs to (sum, difference)
/// and recurses on the sums. Output is the final lowpass followed by the
/// difference bands from coarsest to finest.
pub fn haar_1d(v: &[f64]) -> Result<Vec<f64>> {
    let n = v.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::LengthNotPowerOfTwo(n));
    }
    let mut out = v.to_vec();
    let mut scratch = vec![0.0; n];
    let mut len = n;
    while len > 1 {
        let half = len / 2;
        for i in 0..half {
            let (a, b) = (out[2 * i], out[2 * i + 1]);
            scratch[i] = a + b;
            scratch[half + i] = a - b;
        }
        out[..len].copy_from_slice(&scratch[..len]);
        len = half;
    }
    Ok(out)
}

pub fn haar_1d_inverse(c: &[f64]) -> Result<Vec<f64>> {
    let n = c.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::LengthNotPowerOfTwo(n));
    }
    let mut out = c.to_vec();
    let mut scratch = vec![0.0; n];
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        for i in 0..half {
            let (s, d) = (out[i], out[half + i]);
            scratch[2 * i] = (s + d) / 2.0;
            scratch[2 * i + 1] = (s - d) / 2.0;
        }
        out[..len].copy_from_slice(&scratch[..len]);
        len *= 2;
    }
    Ok(out)
}
