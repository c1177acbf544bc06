#![allow(dead_code)]

use std::path::Path;

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CLASSES: [&str; 3] = ["columns", "diagonals", "rows"];

/// Writes `per_class` 64x64 PNGs for each of three texture classes. Every
/// image is a noisy background with striped patches of random color; the
/// classes differ only in how often the stripes take their preferred
/// orientation.
pub fn write_corpus(root: &Path, per_class: usize, seed: u64) {
    for (c, name) in CLASSES.iter().enumerate() {
        let dir = root.join(name);
        std::fs::create_dir_all(&dir).unwrap();
        for i in 0..per_class {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003) + (c * 100_000 + i) as u64);
            texture(c, &mut rng).save(dir.join(format!("img{i:03}.png"))).unwrap();
        }
    }
}

fn preferred_angle(class: usize, rng: &mut ChaCha8Rng) -> f64 {
    match class {
        0 => 0.0,
        1 => {
            if rng.gen_bool(0.5) {
                45.0
            } else {
                135.0
            }
        }
        _ => 90.0,
    }
}

pub fn texture(class: usize, rng: &mut ChaCha8Rng) -> RgbImage {
    const SIZE: u32 = 64;
    let base: [f64; 3] = [rng.gen_range(40.0..200.0), rng.gen_range(40.0..200.0), rng.gen_range(40.0..200.0)];
    let tilt: (f64, f64) = (rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8));
    let mut px: Vec<[f64; 3]> = (0..SIZE * SIZE)
        .map(|i| {
            let (x, y) = ((i % SIZE) as f64, (i / SIZE) as f64);
            let shade = tilt.0 * (x - 32.0) + tilt.1 * (y - 32.0);
            base.map(|b| b + shade)
        })
        .collect();

    for _ in 0..8 {
        let angle = if rng.gen_bool(0.45) {
            preferred_angle(class, rng) + rng.gen_range(-10.0..10.0)
        } else {
            rng.gen_range(0.0..180.0)
        };
        let (s, co) = (angle.to_radians().sin(), angle.to_radians().cos());
        let period = rng.gen_range(3.0..8.0);
        let amplitude = rng.gen_range(20.0..90.0);
        let tint: [f64; 3] = [rng.gen_range(0.3..1.0), rng.gen_range(0.3..1.0), rng.gen_range(0.3..1.0)];
        let (w, h) = (rng.gen_range(12..29), rng.gen_range(12..29));
        let (x0, y0) = (rng.gen_range(0..SIZE - w), rng.gen_range(0..SIZE - h));
        for y in y0..y0 + h {
            for x in x0..x0 + w {
                let t = (x as f64 * co + y as f64 * s) / period;
                let v = amplitude * (std::f64::consts::TAU * t).sin();
                let p = &mut px[(y * SIZE + x) as usize];
                for ch in 0..3 {
                    p[ch] += v * tint[ch];
                }
            }
        }
    }

    RgbImage::from_fn(SIZE, SIZE, |x, y| {
        let p = px[(y * SIZE + x) as usize];
        Rgb(p.map(|v| (v + rng.gen_range(-12.0..12.0)).round().clamp(0.0, 255.0) as u8))
    })
}

fn entropy(labels: &[usize], classes: usize) -> f64 {
    let mut counts = vec![0usize; classes];
    for &l in labels {
        counts[l] += 1;
    }
    let n = labels.len() as f64;
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// Exhaustive root split: every feature, every midpoint between distinct
/// adjacent values, gain ratio computed from the label lists of both sides.
/// Candidates need a gain above 1e-12; ties within 1e-12 of the maximum go
/// to the lowest feature, then the lowest threshold.
pub fn brute_root_split(x: &[Vec<f64>], y: &[usize], classes: usize) -> Option<(usize, f64)> {
    let n = y.len() as f64;
    let parent = entropy(y, classes);
    let mut candidates: Vec<(usize, f64, f64)> = Vec::new();
    for f in 0..x[0].len() {
        let mut values: Vec<f64> = x.iter().map(|r| r[f]).collect();
        values.sort_by(f64::total_cmp);
        values.dedup();
        for pair in values.windows(2) {
            let mut t = (pair[0] + pair[1]) / 2.0;
            if t <= pair[0] {
                t = pair[1];
            }
            let below: Vec<usize> = (0..y.len()).filter(|&i| x[i][f] < t).map(|i| y[i]).collect();
            let above: Vec<usize> = (0..y.len()).filter(|&i| x[i][f] >= t).map(|i| y[i]).collect();
            let (pb, pa) = (below.len() as f64 / n, above.len() as f64 / n);
            let gain = parent - pb * entropy(&below, classes) - pa * entropy(&above, classes);
            let split_info = -pb * pb.log2() - pa * pa.log2();
            if gain > 1e-12 {
                candidates.push((f, t, gain / split_info));
            }
        }
    }
    let best = candidates.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    candidates.iter().find(|c| c.2 >= best - 1e-12).map(|c| (c.0, c.1))
}

/// Cyclic Jacobi eigen-decomposition of a symmetric 3x3 matrix. Returns
/// eigenvalues and the matching eigenvectors as columns.
pub fn jacobi_eigen(mut a: [[f64; 3]; 3]) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..100 {
        let off: f64 = a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2);
        if off < 1e-30 {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            if a[p][q].abs() < 1e-300 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for row in a.iter_mut() {
                let (akp, akq) = (row[p], row[q]);
                row[p] = c * akp - s * akq;
                row[q] = s * akp + c * akq;
            }
            let (rp, rq) = (a[p], a[q]);
            a[p] = std::array::from_fn(|k| c * rp[k] - s * rq[k]);
            a[q] = std::array::from_fn(|k| s * rp[k] + c * rq[k]);
            for row in v.iter_mut() {
                let (vp, vq) = (row[p], row[q]);
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    ([a[0][0], a[1][1], a[2][2]], v)
}

/// Sample covariance (divisor n - 1) of 3-dimensional rows.
pub fn covariance3(rows: &[Vec<f64>]) -> [[f64; 3]; 3] {
    let n = rows.len() as f64;
    let mut mean = [0.0; 3];
    for r in rows {
        for j in 0..3 {
            mean[j] += r[j] / n;
        }
    }
    let mut c = [[0.0; 3]; 3];
    for r in rows {
        for i in 0..3 {
            for j in 0..3 {
                c[i][j] += (r[i] - mean[i]) * (r[j] - mean[j]) / (n - 1.0);
            }
        }
    }
    c
}
