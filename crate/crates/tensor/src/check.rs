//! Central-difference gradient checking and the randomized op suite.
//!
//! Checks run in double precision. Inputs for kinked ops (relu, clip,
//! pooling, min/max reductions) are sampled away from kinks and ties so the
//! finite-difference probe stays on one side of the subgradient.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TensorError};
use crate::graph::{Graph, Var};
use crate::tensor::Tensor;

/// Compare the analytic gradient of a scalar-valued tensor function against
/// central differences `(f(x+eps) - f(x-eps)) / (2 eps)` elementwise.
///
/// Returns the max relative error (denominator floored at 1e-3); errors with
/// `GradCheckFailed` when it exceeds `tol`.
pub fn grad_check<F>(f: F, x: &Tensor<f64>, eps: f64, tol: f64) -> Result<f64>
where
    F: Fn(&mut Graph<f64>, Var) -> Result<Var>,
{
    let mut g = Graph::new();
    let vx = g.param(x.clone());
    let loss = f(&mut g, vx)?;
    g.backward(loss)?;
    let analytic = g
        .grad(vx)
        .ok_or_else(|| TensorError::InvalidArgument("function ignores its input".into()))?;

    let eval = |t: &Tensor<f64>| -> Result<f64> {
        let mut g = Graph::new();
        let v = g.leaf(t.clone());
        let out = f(&mut g, v)?;
        g.value(out).item()
    };

    let mut max_rel = 0.0f64;
    let mut probe = x.clone();
    for i in 0..x.numel() {
        let orig = probe.data()[i];
        probe.data_mut()[i] = orig + eps;
        let up = eval(&probe)?;
        probe.data_mut()[i] = orig - eps;
        let down = eval(&probe)?;
        probe.data_mut()[i] = orig;

        let numeric = (up - down) / (2.0 * eps);
        let a = analytic.data()[i];
        if !numeric.is_finite() || !a.is_finite() {
            return Err(TensorError::NonFinite("gradient check".into()));
        }
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-3);
        max_rel = max_rel.max(rel);
    }
    if max_rel > tol {
        return Err(TensorError::GradCheckFailed {
            max_rel_err: max_rel,
            tol,
        });
    }
    Ok(max_rel)
}

/// Outcome of checking one op argument over many random cases.
#[derive(Debug, Clone)]
pub struct OpGradReport {
    pub op: String,
    pub cases: usize,
    pub max_rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

const EPS: f64 = 1e-5;
const TOL: f64 = 1e-4;

/// Run every differentiable op through `grad_check` on `cases` random
/// shapes/seeds each. One report per (op, argument) pair.
pub fn run_op_suite(seed: u64, cases: usize) -> Vec<OpGradReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::new();

    macro_rules! entry {
        ($name:expr, $case:expr) => {{
            let mut worst = 0.0f64;
            let mut pass = true;
            for _ in 0..cases {
                #[allow(clippy::redundant_closure_call)]
                match ($case)(&mut rng) {
                    Ok(err) => worst = worst.max(err),
                    Err(TensorError::GradCheckFailed { max_rel_err, .. }) => {
                        worst = worst.max(max_rel_err);
                        pass = false;
                    }
                    Err(e) => panic!("suite case for {} failed to run: {e}", $name),
                }
            }
            reports.push(OpGradReport {
                op: $name.to_string(),
                cases,
                max_rel_err: worst,
                tol: TOL,
                pass,
            });
        }};
    }

    // smooth values in [-1, 1]
    fn smooth(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor<f64> {
        Tensor::rand_uniform(shape, -1.0, 1.0, rng)
    }

    // distinct values: any window of them has a unique max/min, gaps >> eps
    fn distinct(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor<f64> {
        let n: usize = shape.iter().product();
        let mut order: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.gen_range(0..=i);
            order.swap(i, j);
        }
        let data = order
            .into_iter()
            .map(|k| k as f64 * 0.05 + rng.gen_range(0.0..0.02) - 1.0)
            .collect();
        Tensor::new(shape.to_vec(), data).unwrap()
    }

    // values bounded away from the kink at `floor`
    fn off_kink(rng: &mut ChaCha8Rng, shape: &[usize], floor: f64) -> Tensor<f64> {
        let mut t: Tensor<f64> = Tensor::rand_uniform(shape, -1.0, 1.0, rng);
        for v in t.data_mut() {
            if (*v - floor).abs() < 5e-3 {
                *v += if *v >= floor { 1e-2 } else { -1e-2 };
            }
        }
        t
    }

    fn scalarize(
        g: &mut Graph<f64>,
        y: Var,
        projection: &Tensor<f64>,
    ) -> Result<Var> {
        let r = g.leaf(projection.clone());
        let p = g.mul(y, r)?;
        Ok(g.sum(p))
    }

    // Runs `build` once to learn the output shape, fixes a random projection,
    // then grad-checks the scalarized function.
    fn check<B>(rng: &mut ChaCha8Rng, x: &Tensor<f64>, build: B) -> Result<f64>
    where
        B: Fn(&mut Graph<f64>, Var) -> Result<Var>,
    {
        let mut probe = Graph::new();
        let v = probe.leaf(x.clone());
        let out = build(&mut probe, v)?;
        let projection = Tensor::rand_uniform(probe.value(out).shape(), -1.0, 1.0, rng);
        grad_check(
            |g, v| {
                let y = build(g, v)?;
                scalarize(g, y, &projection)
            },
            x,
            EPS,
            TOL,
        )
    }

    // ---- conv2d ----
    entry!("conv2d/input", |rng: &mut ChaCha8Rng| {
        let (cin, cout, k, stride, pad) = conv_dims(rng);
        let h = rng.gen_range(k.max(3)..=6);
        let w = rng.gen_range(k.max(3)..=6);
        let x = smooth(rng, &[1, cin, h, w]);
        let wt = smooth(rng, &[cout, cin, k, k]);
        let b = smooth(rng, &[cout]);
        check(rng, &x, move |g, v| {
            let wt = g.leaf(wt.clone());
            let b = g.leaf(b.clone());
            g.conv2d(v, wt, b, stride, pad)
        })
    });
    entry!("conv2d/weight", |rng: &mut ChaCha8Rng| {
        let (cin, cout, k, stride, pad) = conv_dims(rng);
        let h = rng.gen_range(k.max(3)..=6);
        let w = rng.gen_range(k.max(3)..=6);
        let x = smooth(rng, &[2, cin, h, w]);
        let wt = smooth(rng, &[cout, cin, k, k]);
        let b = smooth(rng, &[cout]);
        check(rng, &wt, move |g, v| {
            let x = g.leaf(x.clone());
            let b = g.leaf(b.clone());
            g.conv2d(x, v, b, stride, pad)
        })
    });
    entry!("conv2d/bias", |rng: &mut ChaCha8Rng| {
        let (cin, cout, k, stride, pad) = conv_dims(rng);
        let x = smooth(rng, &[1, cin, 5, 5]);
        let wt = smooth(rng, &[cout, cin, k, k]);
        let b = smooth(rng, &[cout]);
        check(rng, &b, move |g, v| {
            let x = g.leaf(x.clone());
            let wt = g.leaf(wt.clone());
            g.conv2d(x, wt, v, stride, pad)
        })
    });

    // ---- conv_transpose2d ----
    entry!("conv_transpose2d/input", |rng: &mut ChaCha8Rng| {
        let (cin, cout, k, stride, pad) = conv_dims(rng);
        let pad = pad.min((k - 1) / 2);
        let x = smooth(rng, &[1, cin, 4, 4]);
        let wt = smooth(rng, &[cin, cout, k, k]);
        let b = smooth(rng, &[cout]);
        check(rng, &x, move |g, v| {
            let wt = g.leaf(wt.clone());
            let b = g.leaf(b.clone());
            g.conv_transpose2d(v, wt, b, stride, pad)
        })
    });
    entry!("conv_transpose2d/weight", |rng: &mut ChaCha8Rng| {
        let (cin, cout, k, stride, pad) = conv_dims(rng);
        let pad = pad.min((k - 1) / 2);
        let x = smooth(rng, &[2, cin, 3, 3]);
        let wt = smooth(rng, &[cin, cout, k, k]);
        let b = smooth(rng, &[cout]);
        check(rng, &wt, move |g, v| {
            let x = g.leaf(x.clone());
            let b = g.leaf(b.clone());
            g.conv_transpose2d(x, v, b, stride, pad)
        })
    });
    entry!("conv_transpose2d/bias", |rng: &mut ChaCha8Rng| {
        let (cin, cout, k, stride, pad) = conv_dims(rng);
        let pad = pad.min((k - 1) / 2);
        let x = smooth(rng, &[1, cin, 3, 3]);
        let wt = smooth(rng, &[cin, cout, k, k]);
        let b = smooth(rng, &[cout]);
        check(rng, &b, move |g, v| {
            let x = g.leaf(x.clone());
            let wt = g.leaf(wt.clone());
            g.conv_transpose2d(x, wt, v, stride, pad)
        })
    });

    // ---- pooling ----
    entry!("max_pool2d", |rng: &mut ChaCha8Rng| {
        let k = rng.gen_range(2..=3);
        let stride = rng.gen_range(1..=k);
        let h = rng.gen_range(k..=7);
        let w = rng.gen_range(k..=7);
        let x = distinct(rng, &[1, 2, h, w]);
        check(rng, &x, move |g, v| g.max_pool2d(v, k, stride))
    });
    entry!("avg_pool2d", |rng: &mut ChaCha8Rng| {
        let k = rng.gen_range(2..=3);
        let stride = rng.gen_range(1..=k);
        let h = rng.gen_range(k..=7);
        let w = rng.gen_range(k..=7);
        let x = smooth(rng, &[1, 2, h, w]);
        check(rng, &x, move |g, v| g.avg_pool2d(v, k, stride))
    });

    // ---- linear ----
    entry!("linear/input", |rng: &mut ChaCha8Rng| {
        let (b, n, m) = (rng.gen_range(1..=3), rng.gen_range(1..=6), rng.gen_range(1..=5));
        let x = smooth(rng, &[b, n]);
        let w = smooth(rng, &[m, n]);
        let bias = smooth(rng, &[m]);
        check(rng, &x, move |g, v| {
            let w = g.leaf(w.clone());
            let bias = g.leaf(bias.clone());
            g.linear(v, w, bias)
        })
    });
    entry!("linear/weight", |rng: &mut ChaCha8Rng| {
        let (b, n, m) = (rng.gen_range(1..=3), rng.gen_range(1..=6), rng.gen_range(1..=5));
        let x = smooth(rng, &[b, n]);
        let w = smooth(rng, &[m, n]);
        let bias = smooth(rng, &[m]);
        check(rng, &w, move |g, v| {
            let x = g.leaf(x.clone());
            let bias = g.leaf(bias.clone());
            g.linear(x, v, bias)
        })
    });
    entry!("linear/bias", |rng: &mut ChaCha8Rng| {
        let (b, n, m) = (rng.gen_range(1..=3), rng.gen_range(1..=6), rng.gen_range(1..=5));
        let x = smooth(rng, &[b, n]);
        let w = smooth(rng, &[m, n]);
        let bias = smooth(rng, &[m]);
        check(rng, &bias, move |g, v| {
            let x = g.leaf(x.clone());
            let w = g.leaf(w.clone());
            g.linear(x, w, v)
        })
    });

    // ---- pointwise ----
    entry!("relu", |rng: &mut ChaCha8Rng| {
        let x = off_kink(rng, &[2, 5], 0.0);
        check(rng, &x, |g, v| Ok(g.relu(v)))
    });
    entry!("sigmoid", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[3, 4]);
        check(rng, &x, |g, v| Ok(g.sigmoid(v)))
    });
    entry!("tanh", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[3, 4]);
        check(rng, &x, |g, v| Ok(g.tanh(v)))
    });
    entry!("add", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[2, 3, 2, 2]);
        let other = smooth(rng, &[2, 3, 2, 2]);
        check(rng, &x, move |g, v| {
            let o = g.leaf(other.clone());
            g.add(v, o)
        })
    });
    entry!("mul", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[2, 3, 2, 2]);
        let other = smooth(rng, &[2, 3, 2, 2]);
        check(rng, &x, move |g, v| {
            let o = g.leaf(other.clone());
            g.mul(v, o)
        })
    });
    entry!("mul_scalar", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[4, 3]);
        let factor = rng.gen_range(-2.0..2.0);
        check(rng, &x, move |g, v| Ok(g.mul_scalar(v, factor)))
    });
    entry!("sub_scalar", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[4, 3]);
        let offset = rng.gen_range(-2.0..2.0);
        check(rng, &x, move |g, v| Ok(g.sub_scalar(v, offset)))
    });
    entry!("clip_min", |rng: &mut ChaCha8Rng| {
        let floor = rng.gen_range(-0.5..0.5);
        let x = off_kink(rng, &[3, 4], floor);
        check(rng, &x, move |g, v| Ok(g.clip_min(v, floor)))
    });

    // ---- shape ----
    entry!("concat_channels", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[2, 2, 3, 3]);
        let other = smooth(rng, &[2, 3, 3, 3]);
        check(rng, &x, move |g, v| {
            let o = g.leaf(other.clone());
            g.concat_channels(v, o)
        })
    });
    entry!("slice_channels", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[2, 4, 2, 2]);
        check(rng, &x, |g, v| g.slice_channels(v, 1, 3))
    });
    entry!("flatten", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[2, 2, 3, 3]);
        check(rng, &x, |g, v| g.flatten(v))
    });
    entry!("softmax", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[2, 6]);
        check(rng, &x, |g, v| g.softmax(v, 1))
    });

    // ---- reductions / broadcasts ----
    entry!("sum", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[3, 4]);
        check(rng, &x, |g, v| Ok(g.sum(v)))
    });
    entry!("reduce_min", |rng: &mut ChaCha8Rng| {
        let x = distinct(rng, &[1, 1, 4, 4]);
        check(rng, &x, |g, v| Ok(g.reduce_min(v)))
    });
    entry!("reduce_max", |rng: &mut ChaCha8Rng| {
        let x = distinct(rng, &[1, 1, 4, 4]);
        check(rng, &x, |g, v| Ok(g.reduce_max(v)))
    });
    entry!("sub_broadcast/lhs", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[3, 3]);
        let s = smooth(rng, &[1]);
        check(rng, &x, move |g, v| {
            let s = g.leaf(s.clone());
            g.sub_broadcast(v, s)
        })
    });
    entry!("sub_broadcast/scalar", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[3, 3]);
        let s = smooth(rng, &[1]);
        check(rng, &s, move |g, v| {
            let x = g.leaf(x.clone());
            g.sub_broadcast(x, v)
        })
    });
    entry!("div_broadcast/lhs", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[3, 3]);
        let s = far_from_zero(rng);
        check(rng, &x, move |g, v| {
            let s = g.leaf(s.clone());
            g.div_broadcast(v, s)
        })
    });
    entry!("div_broadcast/scalar", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[3, 3]);
        let s = far_from_zero(rng);
        check(rng, &s, move |g, v| {
            let x = g.leaf(x.clone());
            g.div_broadcast(x, v)
        })
    });
    entry!("tile_spatial", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[2, 3]);
        let h = rng.gen_range(2..=4);
        let w = rng.gen_range(2..=4);
        check(rng, &x, move |g, v| g.tile_spatial(v, h, w))
    });
    entry!("mul_channel_broadcast/features", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[2, 3, 3, 3]);
        let m = smooth(rng, &[2, 1, 3, 3]);
        check(rng, &x, move |g, v| {
            let m = g.leaf(m.clone());
            g.mul_channel_broadcast(v, m)
        })
    });
    entry!("mul_channel_broadcast/map", |rng: &mut ChaCha8Rng| {
        let x = smooth(rng, &[2, 3, 3, 3]);
        let m = smooth(rng, &[2, 1, 3, 3]);
        check(rng, &m, move |g, v| {
            let x = g.leaf(x.clone());
            g.mul_channel_broadcast(x, v)
        })
    });

    // ---- losses ----
    entry!("mse_loss/pred", |rng: &mut ChaCha8Rng| {
        let p = smooth(rng, &[2, 5]);
        let t = smooth(rng, &[2, 5]);
        grad_check(
            move |g, v| {
                let t = g.leaf(t.clone());
                g.mse_loss(v, t)
            },
            &p,
            EPS,
            TOL,
        )
    });
    entry!("mse_loss/target", |rng: &mut ChaCha8Rng| {
        let p = smooth(rng, &[2, 5]);
        let t = smooth(rng, &[2, 5]);
        grad_check(
            move |g, v| {
                let p = g.leaf(p.clone());
                g.mse_loss(p, v)
            },
            &t,
            EPS,
            TOL,
        )
    });
    entry!("bce_with_logit/logit", |rng: &mut ChaCha8Rng| {
        let z = Tensor::rand_uniform(&[6], -3.0, 3.0, rng);
        let y_data: Vec<f64> = (0..6).map(|_| f64::from(rng.gen_range(0..=1))).collect();
        let y = Tensor::new(vec![6], y_data).unwrap();
        grad_check(
            move |g, v| {
                let y = g.leaf(y.clone());
                g.bce_with_logit_loss(v, y)
            },
            &z,
            EPS,
            TOL,
        )
    });

    reports
}

fn conv_dims(rng: &mut ChaCha8Rng) -> (usize, usize, usize, usize, usize) {
    let cin = rng.gen_range(1..=3);
    let cout = rng.gen_range(1..=3);
    let k = rng.gen_range(1..=3);
    let stride = rng.gen_range(1..=2);
    let pad = rng.gen_range(0..=1);
    (cin, cout, k, stride, pad)
}

fn far_from_zero(rng: &mut ChaCha8Rng) -> Tensor<f64> {
    let mag = rng.gen_range(0.5..1.5);
    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    Tensor::scalar(mag * sign)
}
