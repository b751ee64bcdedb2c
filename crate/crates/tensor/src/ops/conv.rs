//! Convolution kernels (cross-correlation convention).
//!
//! Three primitives cover both convolution directions and their gradients:
//! `gather` (conv2d forward, conv_transpose2d input gradient), `scatter`
//! (conv_transpose2d forward, conv2d input gradient), and `weight_grad`.
//! The adjointness identity <conv(x,w), y> = <x, conv_t(y,w)> follows from
//! gather and scatter sharing one index relation: src_pos = dst_pos*stride
//! + k - pad.
//!
//! All three lower onto patch matrices (im2col/col2im) and tight
//! accumulation loops over contiguous rows.

use crate::error::{Result, TensorError};
use crate::tensor::Element;

/// Output spatial extent of a stride/pad gather along one axis.
pub fn conv_out_extent(input: usize, k: usize, stride: usize, pad: usize) -> Result<usize> {
    if stride == 0 {
        return Err(TensorError::InvalidArgument("stride must be >= 1".into()));
    }
    let padded = input + 2 * pad;
    if k > padded {
        return Err(TensorError::ShapeMismatch(format!(
            "kernel extent {k} exceeds padded input extent {padded}"
        )));
    }
    Ok((padded - k) / stride + 1)
}

/// Output spatial extent of a transposed convolution along one axis.
pub fn conv_transpose_out_extent(input: usize, k: usize, stride: usize, pad: usize) -> Result<usize> {
    if stride == 0 {
        return Err(TensorError::InvalidArgument("stride must be >= 1".into()));
    }
    let grown = (input - 1) * stride + k;
    if grown < 2 * pad {
        return Err(TensorError::ShapeMismatch(format!(
            "padding {pad} larger than transposed output extent {grown}"
        )));
    }
    Ok(grown - 2 * pad)
}

/// Range of positions `o` with `o*stride + k - pad` inside `[0, src_extent)`.
#[inline]
fn valid_range(dst_extent: usize, src_extent: usize, k: usize, stride: usize, pad: usize) -> (usize, usize) {
    let lo = if k >= pad {
        0
    } else {
        (pad - k).div_ceil(stride)
    };
    let hi = if src_extent + pad > k {
        ((src_extent - 1 + pad - k) / stride + 1).min(dst_extent)
    } else {
        0
    };
    (lo.min(hi), hi)
}

/// Patch matrix of one image: rows indexed by (channel, ky, kx), columns by
/// output position (oy, ox); entry = img[c, oy*s+ky-p, ox*s+kx-p], zero when
/// out of range. `cols` must hold `c*kh*kw * oh*ow` zeroed values.
fn im2col<T: Element>(
    img: &[T],
    (ch, h, w): (usize, usize, usize),
    (kh, kw): (usize, usize),
    (oh, ow): (usize, usize),
    stride: usize,
    pad: usize,
    cols: &mut [T],
) {
    let n = oh * ow;
    for c in 0..ch {
        let plane = &img[c * h * w..(c + 1) * h * w];
        for ky in 0..kh {
            let (oy_lo, oy_hi) = valid_range(oh, h, ky, stride, pad);
            for kx in 0..kw {
                let row = &mut cols[((c * kh + ky) * kw + kx) * n..((c * kh + ky) * kw + kx + 1) * n];
                let (ox_lo, ox_hi) = valid_range(ow, w, kx, stride, pad);
                for oy in oy_lo..oy_hi {
                    let iy = oy * stride + ky - pad;
                    let src_row = &plane[iy * w..(iy + 1) * w];
                    let dst = &mut row[oy * ow + ox_lo..oy * ow + ox_hi];
                    if stride == 1 {
                        let off = ox_lo + kx - pad;
                        dst.copy_from_slice(&src_row[off..off + (ox_hi - ox_lo)]);
                    } else {
                        for (i, d) in dst.iter_mut().enumerate() {
                            *d = src_row[(ox_lo + i) * stride + kx - pad];
                        }
                    }
                }
            }
        }
    }
}

/// Inverse of `im2col`: scatter-add patch rows back into an image.
fn col2im<T: Element>(
    cols: &[T],
    (ch, h, w): (usize, usize, usize),
    (kh, kw): (usize, usize),
    (oh, ow): (usize, usize),
    stride: usize,
    pad: usize,
    img: &mut [T],
) {
    let n = oh * ow;
    for c in 0..ch {
        let plane = &mut img[c * h * w..(c + 1) * h * w];
        for ky in 0..kh {
            let (oy_lo, oy_hi) = valid_range(oh, h, ky, stride, pad);
            for kx in 0..kw {
                let row = &cols[((c * kh + ky) * kw + kx) * n..((c * kh + ky) * kw + kx + 1) * n];
                let (ox_lo, ox_hi) = valid_range(ow, w, kx, stride, pad);
                for oy in oy_lo..oy_hi {
                    let iy = oy * stride + ky - pad;
                    let dst_row = &mut plane[iy * w..(iy + 1) * w];
                    let src = &row[oy * ow + ox_lo..oy * ow + ox_hi];
                    if stride == 1 {
                        let off = ox_lo + kx - pad;
                        for (d, &s) in dst_row[off..off + src.len()].iter_mut().zip(src) {
                            *d += s;
                        }
                    } else {
                        for (i, &s) in src.iter().enumerate() {
                            dst_row[(ox_lo + i) * stride + kx - pad] += s;
                        }
                    }
                }
            }
        }
    }
}

/// out[m, :] += sum_k a[m, k] * b[k, :]  (a is [m, kk], b is [kk, n])
fn gemm_nn<T: Element>(a: &[T], b: &[T], m: usize, kk: usize, n: usize, out: &mut [T]) {
    for i in 0..m {
        let out_row = &mut out[i * n..(i + 1) * n];
        for k in 0..kk {
            let av = a[i * kk + k];
            let b_row = &b[k * n..(k + 1) * n];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += av * bv;
            }
        }
    }
}

/// out[k, :] += sum_c a[c, k] * b[c, :]  (a is [cc, kk] used transposed)
fn gemm_tn<T: Element>(a: &[T], b: &[T], cc: usize, kk: usize, n: usize, out: &mut [T]) {
    for c in 0..cc {
        let a_row = &a[c * kk..(c + 1) * kk];
        let b_row = &b[c * n..(c + 1) * n];
        for (k, &av) in a_row.iter().enumerate() {
            let out_row = &mut out[k * n..(k + 1) * n];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += av * bv;
            }
        }
    }
}

/// out[i, j] += dot(a[i, :], b[j, :])  (a is [m, n], b is [kk, n])
fn gemm_nt<T: Element>(a: &[T], b: &[T], m: usize, kk: usize, n: usize, out: &mut [T]) {
    for i in 0..m {
        let a_row = &a[i * n..(i + 1) * n];
        for j in 0..kk {
            let b_row = &b[j * n..(j + 1) * n];
            let mut acc = T::ZERO;
            for (&av, &bv) in a_row.iter().zip(b_row) {
                acc += av * bv;
            }
            out[i * kk + j] += acc;
        }
    }
}

/// dst[b, cd, oy, ox] += sum_{cs, ky, kx} w[cd, cs, ky, kx] * src[b, cs, oy*s+ky-p, ox*s+kx-p]
///
/// Weight layout is `[Cd, Cs, kh, kw]`.
pub fn gather<T: Element>(
    src: &[T],
    (batch, cs, sh, sw): (usize, usize, usize, usize),
    w: &[T],
    (kh, kw): (usize, usize),
    dst: &mut [T],
    (cd, dh, dw): (usize, usize, usize),
    stride: usize,
    pad: usize,
) {
    let n = dh * dw;
    let ckk = cs * kh * kw;
    let mut cols = vec![T::ZERO; ckk * n];
    for b in 0..batch {
        cols.fill(T::ZERO);
        im2col(
            &src[b * cs * sh * sw..(b + 1) * cs * sh * sw],
            (cs, sh, sw),
            (kh, kw),
            (dh, dw),
            stride,
            pad,
            &mut cols,
        );
        gemm_nn(w, &cols, cd, ckk, n, &mut dst[b * cd * n..(b + 1) * cd * n]);
    }
}

/// dst[b, cd, iy*s+ky-p, ix*s+kx-p] += sum w[cs, cd, ky, kx] * src[b, cs, iy, ix]
///
/// Weight layout is `[Cs, Cd, kh, kw]`: source channels first, as in a
/// transposed convolution.
pub fn scatter<T: Element>(
    src: &[T],
    (batch, cs, sh, sw): (usize, usize, usize, usize),
    w: &[T],
    (kh, kw): (usize, usize),
    dst: &mut [T],
    (cd, dh, dw): (usize, usize, usize),
    stride: usize,
    pad: usize,
) {
    let n = sh * sw;
    let ckk = cd * kh * kw;
    let mut cols = vec![T::ZERO; ckk * n];
    for b in 0..batch {
        cols.fill(T::ZERO);
        gemm_tn(
            w,
            &src[b * cs * n..(b + 1) * cs * n],
            cs,
            ckk,
            n,
            &mut cols,
        );
        col2im(
            &cols,
            (cd, dh, dw),
            (kh, kw),
            (sh, sw),
            stride,
            pad,
            &mut dst[b * cd * dh * dw..(b + 1) * cd * dh * dw],
        );
    }
}

/// gw[ca, cb, ky, kx] += sum_{b, ya, xa} a[b, ca, ya, xa] * bb[b, cb, ya*s+ky-p, xa*s+kx-p]
///
/// For conv2d weight gradients call with `a = grad_out, bb = input`; for
/// conv_transpose2d call with `a = input, bb = grad_out`.
pub fn weight_grad<T: Element>(
    a: &[T],
    (batch, ca, ah, aw): (usize, usize, usize, usize),
    bb: &[T],
    (cb, bh, bw): (usize, usize, usize),
    gw: &mut [T],
    (kh, kw): (usize, usize),
    stride: usize,
    pad: usize,
) {
    let n = ah * aw;
    let ckk = cb * kh * kw;
    let mut cols = vec![T::ZERO; ckk * n];
    for b in 0..batch {
        cols.fill(T::ZERO);
        im2col(
            &bb[b * cb * bh * bw..(b + 1) * cb * bh * bw],
            (cb, bh, bw),
            (kh, kw),
            (ah, aw),
            stride,
            pad,
            &mut cols,
        );
        gemm_nt(&a[b * ca * n..(b + 1) * ca * n], &cols, ca, ckk, n, gw);
    }
}
