//! Pooling kernels.

use crate::tensor::Element;

/// Max pooling over `[B, C, H, W]`. Returns the pooled values and, per
/// output cell, the flat input index of its maximum (first in row-major
/// order on ties) for routing gradients.
pub fn max_pool<T: Element>(
    x: &[T],
    (batch, ch, h, w): (usize, usize, usize, usize),
    k: usize,
    stride: usize,
    (oh, ow): (usize, usize),
) -> (Vec<T>, Vec<usize>) {
    let mut out = Vec::with_capacity(batch * ch * oh * ow);
    let mut arg = Vec::with_capacity(out.capacity());
    for b in 0..batch {
        for c in 0..ch {
            let plane_base = ((b * ch + c) * h) * w;
            for oy in 0..oh {
                for ox in 0..ow {
                    let y0 = oy * stride;
                    let x0 = ox * stride;
                    let mut best = x[plane_base + y0 * w + x0];
                    let mut best_at = plane_base + y0 * w + x0;
                    for ky in 0..k {
                        let row = plane_base + (y0 + ky) * w;
                        for kx in 0..k {
                            let i = row + x0 + kx;
                            if x[i] > best {
                                best = x[i];
                                best_at = i;
                            }
                        }
                    }
                    out.push(best);
                    arg.push(best_at);
                }
            }
        }
    }
    (out, arg)
}

/// Average pooling over `[B, C, H, W]`.
pub fn avg_pool<T: Element>(
    x: &[T],
    (batch, ch, h, w): (usize, usize, usize, usize),
    k: usize,
    stride: usize,
    (oh, ow): (usize, usize),
) -> Vec<T> {
    let inv = T::from_f64(1.0 / (k * k) as f64);
    let mut out = Vec::with_capacity(batch * ch * oh * ow);
    for b in 0..batch {
        for c in 0..ch {
            let plane_base = ((b * ch + c) * h) * w;
            for oy in 0..oh {
                for ox in 0..ow {
                    let y0 = oy * stride;
                    let x0 = ox * stride;
                    let mut acc = T::ZERO;
                    for ky in 0..k {
                        let row = plane_base + (y0 + ky) * w;
                        for kx in 0..k {
                            acc += x[row + x0 + kx];
                        }
                    }
                    out.push(acc * inv);
                }
            }
        }
    }
    out
}

/// Spread `grad_out` uniformly back over each pooling window.
pub fn avg_pool_backward<T: Element>(
    grad_out: &[T],
    (batch, ch, h, w): (usize, usize, usize, usize),
    k: usize,
    stride: usize,
    (oh, ow): (usize, usize),
    grad_in: &mut [T],
) {
    let inv = T::from_f64(1.0 / (k * k) as f64);
    let mut gi = 0;
    for b in 0..batch {
        for c in 0..ch {
            let plane_base = ((b * ch + c) * h) * w;
            for oy in 0..oh {
                for ox in 0..ow {
                    let g = grad_out[gi] * inv;
                    gi += 1;
                    let y0 = oy * stride;
                    let x0 = ox * stride;
                    for ky in 0..k {
                        let row = plane_base + (y0 + ky) * w;
                        for kx in 0..k {
                            grad_in[row + x0 + kx] += g;
                        }
                    }
                }
            }
        }
    }
}
