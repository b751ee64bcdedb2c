//! Property tests for the simplex and round-trip invariants.

use gaze_tensor::{io, Graph, Tensor};
use proptest::prelude::*;

proptest! {
    /// softmax output sums to 1 and is permutation-equivariant
    #[test]
    fn softmax_simplex_and_permutation(
        vals in proptest::collection::vec(-20.0f64..20.0, 2..49),
        seed in 0u64..1000,
    ) {
        let n = vals.len();
        let mut g = Graph::<f64>::new();
        let x = g.leaf(Tensor::new(vec![n], vals.clone()).unwrap());
        let y = g.softmax(x, 0).unwrap();
        let out = g.value(y).data().to_vec();

        let total: f64 = out.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12, "sum {total}");
        prop_assert!(out.iter().all(|&v| v >= 0.0));

        // rotate by a pseudo-random offset; output must rotate identically
        let shift = (seed as usize) % n;
        let mut rotated = vals.clone();
        rotated.rotate_left(shift);
        let xr = g.leaf(Tensor::new(vec![n], rotated).unwrap());
        let yr = g.softmax(xr, 0).unwrap();
        let out_r = g.value(yr).data().to_vec();
        for i in 0..n {
            prop_assert!((out_r[i] - out[(i + shift) % n]).abs() < 1e-12);
        }
    }

    /// concat along the channel axis then split recovers both inputs bitwise
    #[test]
    fn concat_split_round_trip(
        a_vals in proptest::collection::vec(-1e3f32..1e3, 8..=8),
        b_vals in proptest::collection::vec(-1e3f32..1e3, 12..=12),
    ) {
        let a = Tensor::new(vec![2, 2, 1, 2], a_vals).unwrap();
        let b = Tensor::new(vec![2, 3, 1, 2], b_vals).unwrap();
        let mut g = Graph::<f32>::new();
        let va = g.leaf(a.clone());
        let vb = g.leaf(b.clone());
        let cat = g.concat_channels(va, vb).unwrap();
        let back_a = g.slice_channels(cat, 0, 2).unwrap();
        let back_b = g.slice_channels(cat, 2, 5).unwrap();
        prop_assert_eq!(g.value(back_a), &a);
        prop_assert_eq!(g.value(back_b), &b);
    }

    /// tensor bytes round-trip losslessly for f32
    #[test]
    fn serialization_round_trip(
        vals in proptest::collection::vec(-1e6f32..1e6, 1..32),
    ) {
        let t = Tensor::new(vec![vals.len()], vals).unwrap();
        let mut buf = Vec::new();
        io::write_tensor(&t, &mut buf).unwrap();
        let back = io::read_tensor(&mut &buf[..]).unwrap();
        prop_assert_eq!(back, t);
    }
}
