//! Ground-truth heatmap synthesis: a Gaussian placed around the target
//! pixel, peak exactly 1 at the pixel containing the gaze point.

use gaze_tensor::{Element, Tensor};

/// Pixel coordinates of a normalized point on an `hm`-sided grid.
pub fn gaze_pixel(gaze: (f64, f64), hm: usize) -> (usize, usize) {
    let cx = ((gaze.0 * hm as f64).floor() as usize).min(hm - 1);
    let cy = ((gaze.1 * hm as f64).floor() as usize).min(hm - 1);
    (cx, cy)
}

/// `grid[r][c] = exp(-((c-cx)^2 + (r-cy)^2) / (2 sigma^2))` with `(cx, cy)`
/// the gaze pixel.
pub fn gt_heatmap<T: Element>(gaze: (f64, f64), hm: usize, sigma: f64) -> Tensor<T> {
    let (cx, cy) = gaze_pixel(gaze, hm);
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut grid = Tensor::zeros(&[hm, hm]);
    for r in 0..hm {
        let dy = r as f64 - cy as f64;
        for c in 0..hm {
            let dx = c as f64 - cx as f64;
            grid.set(&[r, c], T::from_f64((-(dx * dx + dy * dy) * inv).exp()));
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_is_one_at_gaze_pixel() {
        let g: Tensor<f64> = gt_heatmap((0.5, 0.5), 64, 3.0);
        assert_eq!(g.get(&[32, 32]), 1.0);
        assert_eq!(g.argmax(), 32 * 64 + 32);
    }

    #[test]
    fn value_at_sigma_distance() {
        let sigma = 3.0;
        let g: Tensor<f64> = gt_heatmap((0.5, 0.5), 64, sigma);
        let v = g.get(&[32, 32 + sigma as usize]);
        assert!((v - (-0.5f64).exp()).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn sum_matches_separable_sum_oracle() {
        let (hm, sigma) = (64usize, 3.0f64);
        let g: Tensor<f64> = gt_heatmap((0.5, 0.5), hm, sigma);
        // the 2-D Gaussian sum factors into a product of two 1-D sums
        let (cx, cy) = gaze_pixel((0.5, 0.5), hm);
        let one_d = |center: usize| -> f64 {
            (0..hm)
                .map(|i| {
                    let d = i as f64 - center as f64;
                    (-d * d / (2.0 * sigma * sigma)).exp()
                })
                .sum()
        };
        let expected = one_d(cx) * one_d(cy);
        assert!((g.sum_f64() - expected).abs() < 1e-9);
    }

    #[test]
    fn flip_equivariance_on_pixel_grid() {
        let hm = 32;
        for (px, py) in [(0usize, 0usize), (5, 9), (31, 0), (16, 16), (30, 31)] {
            let gaze = ((px as f64 + 0.5) / hm as f64, (py as f64 + 0.5) / hm as f64);
            let flipped = (1.0 - gaze.0, gaze.1);
            let a: Tensor<f64> = gt_heatmap(gaze, hm, 2.5);
            let b: Tensor<f64> = gt_heatmap(flipped, hm, 2.5);
            for r in 0..hm {
                for c in 0..hm {
                    assert_eq!(
                        a.get(&[r, c]),
                        b.get(&[r, hm - 1 - c]),
                        "mirror mismatch at ({r},{c}) for pixel ({px},{py})"
                    );
                }
            }
        }
    }

    #[test]
    fn values_decay_monotonically_along_axes() {
        let g: Tensor<f64> = gt_heatmap((0.25, 0.75), 64, 3.0);
        let (cx, cy) = gaze_pixel((0.25, 0.75), 64);
        for c in cx..63 {
            assert!(g.get(&[cy, c + 1]) < g.get(&[cy, c]));
        }
        for c in 1..=cx {
            assert!(g.get(&[cy, c - 1]) < g.get(&[cy, c]));
        }
        for r in cy..63 {
            assert!(g.get(&[r + 1, cx]) < g.get(&[r, cx]));
        }
    }
}
