//! Independent oracles for the evaluation metrics: exhaustive pairwise
//! probability for AUC, a quadratic rank scan for AP, and a direct argmax
//! scan for the distance metric. Scores are drawn from a coarse grid so tie
//! handling is genuinely exercised.

use gaze_core::data::gt_heatmap;
use gaze_core::eval::{auc_heatmap, l2_distance, out_of_frame_ap};
use gaze_tensor::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// P(score_pos > score_neg) + 1/2 P(equal), by exhaustive pairing.
fn pairwise_auc_oracle(scores: &[f32], labels: &[bool]) -> Option<f64> {
    let pos: Vec<f32> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &y)| y)
        .map(|(&s, _)| s)
        .collect();
    let neg: Vec<f32> = scores
        .iter()
        .zip(labels)
        .filter(|(_, &y)| !y)
        .map(|(&s, _)| s)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut acc = 0.0f64;
    for &p in &pos {
        for &n in &neg {
            if p > n {
                acc += 1.0;
            } else if p == n {
                acc += 0.5;
            }
        }
    }
    Some(acc / (pos.len() as f64 * neg.len() as f64))
}

#[test]
fn auc_matches_exhaustive_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..200 {
        let hm = 10;
        let n_frames = rng.gen_range(1..=3);
        let mut preds = Vec::new();
        let mut gts = Vec::new();
        for _ in 0..n_frames {
            // quantized scores produce plenty of ties
            let levels = rng.gen_range(2..=12);
            let data: Vec<f32> = (0..hm * hm)
                .map(|_| rng.gen_range(0..levels) as f32 / levels as f32)
                .collect();
            preds.push(Tensor::new(vec![hm, hm], data).unwrap());
            gts.push((rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)));
        }
        let refs: Vec<&Tensor<f32>> = preds.iter().collect();
        let got = auc_heatmap(&refs, &gts, 2.0, 0.5);

        // oracle pools the same labeling
        let mut scores = Vec::new();
        let mut labels = Vec::new();
        for (pred, &gaze) in preds.iter().zip(&gts) {
            let mask: Tensor<f64> = gt_heatmap(gaze, hm, 2.0);
            for (s, m) in pred.data().iter().zip(mask.data()) {
                scores.push(*s);
                labels.push(*m >= 0.5);
            }
        }
        let expected = pairwise_auc_oracle(&scores, &labels);
        match (got, expected) {
            (Some(a), Some(e)) => {
                assert!((a - e).abs() < 1e-9, "case {case}: {a} vs {e}")
            }
            (a, e) => assert_eq!(a, e, "case {case}: definedness differs"),
        }
    }
}

#[test]
fn auc_is_invariant_under_strictly_increasing_transforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..30 {
        let hm = 12;
        let data: Vec<f32> = (0..hm * hm).map(|_| rng.gen_range(0..32) as f32 / 32.0).collect();
        let pred = Tensor::new(vec![hm, hm], data.clone()).unwrap();
        // affine with power-of-two scale: exact and order preserving
        let transformed =
            Tensor::new(vec![hm, hm], data.iter().map(|v| 4.0 * v + 0.5).collect()).unwrap();
        let gaze = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        let a = auc_heatmap(&[&pred], &[gaze], 2.0, 0.5);
        let b = auc_heatmap(&[&transformed], &[gaze], 2.0, 0.5);
        assert_eq!(a, b);
    }
}

/// Quadratic scan: precision at each rank recomputed from scratch.
fn ap_rank_scan_oracle(scores: &[f64], labels: &[bool]) -> Option<f64> {
    let pos = labels.iter().filter(|&&y| y).count();
    if pos == 0 || pos == labels.len() {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut ap = 0.0;
    for k in 1..=order.len() {
        if labels[order[k - 1]] {
            let tp = order[..k].iter().filter(|&&i| labels[i]).count();
            ap += tp as f64 / k as f64;
        }
    }
    Some(ap / pos as f64)
}

#[test]
fn ap_matches_rank_scan_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for case in 0..500 {
        let n = rng.gen_range(2..=40);
        let levels = rng.gen_range(2..=10);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..levels) as f64 / levels as f64).collect();
        let labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        let got = out_of_frame_ap(&scores, &labels);
        let expected = ap_rank_scan_oracle(&scores, &labels);
        match (got, expected) {
            (Some(a), Some(e)) => assert!((a - e).abs() < 1e-12, "case {case}: {a} vs {e}"),
            (a, e) => assert_eq!(a, e, "case {case}"),
        }
    }
}

#[test]
fn ap_is_invariant_under_strictly_increasing_transforms() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..50 {
        let n = rng.gen_range(3..=20);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..16) as f64 / 16.0).collect();
        let labels: Vec<bool> = (0..n).map(|i| i % 3 == 0).collect();
        let transformed: Vec<f64> = scores.iter().map(|v| 2.0 * v + 1.0).collect();
        assert_eq!(
            out_of_frame_ap(&scores, &labels),
            out_of_frame_ap(&transformed, &labels)
        );
    }
}

#[test]
fn l2_matches_argmax_scan_oracle_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    for _ in 0..300 {
        let hm = rng.gen_range(4..=32);
        // include ties so the first-in-row-major rule is exercised
        let levels = rng.gen_range(2..=6);
        let data: Vec<f32> = (0..hm * hm)
            .map(|_| rng.gen_range(0..levels) as f32 / levels as f32)
            .collect();
        let pred = Tensor::new(vec![hm, hm], data.clone()).unwrap();
        let gaze = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));

        // independent scan
        let mut best = 0usize;
        for (i, &v) in data.iter().enumerate() {
            if v > data[best] {
                best = i;
            }
        }
        let (row, col) = (best / hm, best % hm);
        let px = (col as f64 + 0.5) / hm as f64;
        let py = (row as f64 + 0.5) / hm as f64;
        let expected = ((px - gaze.0).powi(2) + (py - gaze.1).powi(2)).sqrt();

        assert_eq!(l2_distance(&pred, gaze), expected);
    }
}

#[test]
fn l2_is_invariant_under_positive_rescaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..50 {
        let hm = 16;
        let data: Vec<f32> = (0..hm * hm).map(|_| rng.gen_range(0.0..1.0)).collect();
        let pred = Tensor::new(vec![hm, hm], data.clone()).unwrap();
        let scaled = Tensor::new(vec![hm, hm], data.iter().map(|v| v * 8.0).collect()).unwrap();
        let gaze = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
        assert_eq!(l2_distance(&pred, gaze), l2_distance(&scaled, gaze));
    }
}
