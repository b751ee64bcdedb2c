//! Brute-force oracles for the social-gaze procedures: exhaustive pattern
//! enumeration for shift events and optimal bipartite matching for the
//! precision/recall pairing.

use gaze_core::social::{event_prf, infer_shift_events, GazeLabel, ShiftEvent};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every (i, j) pair with label[i] = toy, label[j] = eyes, only elsewhere
/// strictly between, and a gap within the limit. Such pairs are exactly the
/// maximal toy+ (elsewhere)* eyes+ patterns.
fn enumerate_events_oracle(labels: &[GazeLabel], fps: f64, max_gap_ms: f64) -> Vec<ShiftEvent> {
    let frame_ms = 1000.0 / fps;
    let mut events = Vec::new();
    for i in 0..labels.len() {
        if labels[i] != GazeLabel::Toy {
            continue;
        }
        for j in i + 1..labels.len() {
            match labels[j] {
                GazeLabel::Elsewhere => continue,
                GazeLabel::Eyes => {
                    if (j - i - 1) as f64 * frame_ms <= max_gap_ms {
                        events.push(ShiftEvent { start_frame: i, end_frame: j });
                    }
                    break;
                }
                GazeLabel::Toy => break,
            }
        }
    }
    // drop pairs whose eyes frame continues an existing eyes run
    events.retain(|e| e.end_frame == 0 || labels[e.end_frame - 1] != GazeLabel::Eyes);
    events
}

#[test]
fn shift_events_match_enumeration_oracle_on_random_streams() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    let fpss = [25.0, 30.0, 60.0];
    for case in 0..10_000 {
        let n = rng.gen_range(1..=48);
        let labels: Vec<GazeLabel> = (0..n)
            .map(|_| match rng.gen_range(0..3) {
                0 => GazeLabel::Toy,
                1 => GazeLabel::Eyes,
                _ => GazeLabel::Elsewhere,
            })
            .collect();
        let fps = fpss[case % fpss.len()];
        let got = infer_shift_events(&labels, fps, 700.0).unwrap().events;
        let expected = enumerate_events_oracle(&labels, fps, 700.0);
        assert_eq!(got, expected, "case {case} labels {labels:?} fps {fps}");
    }
}

#[test]
fn shift_events_hit_exact_boundaries_in_random_streams() {
    // streams built around the exact 700 ms gap at each rate
    for (fps, max_ok) in [(25.0, 17usize), (30.0, 21), (60.0, 42)] {
        for gap in [max_ok.saturating_sub(1), max_ok, max_ok + 1] {
            let mut labels = vec![GazeLabel::Toy; 2];
            labels.extend(vec![GazeLabel::Elsewhere; gap]);
            labels.push(GazeLabel::Eyes);
            let got = infer_shift_events(&labels, fps, 700.0).unwrap().events;
            let expected = enumerate_events_oracle(&labels, fps, 700.0);
            assert_eq!(got, expected);
            assert_eq!(got.len(), usize::from(gap <= max_ok), "fps {fps} gap {gap}");
        }
    }
}

/// Maximum bipartite matching via augmenting paths.
fn optimal_matching(pred: &[ShiftEvent], gt: &[ShiftEvent], iou: f64) -> usize {
    let overlap = |a: ShiftEvent, b: ShiftEvent| -> f64 {
        let lo = a.start_frame.max(b.start_frame);
        let hi = a.end_frame.min(b.end_frame);
        if hi < lo {
            return 0.0;
        }
        let inter = (hi - lo + 1) as f64;
        let union =
            (a.end_frame - a.start_frame + 1 + b.end_frame - b.start_frame + 1) as f64 - inter;
        inter / union
    };
    let adj: Vec<Vec<usize>> = pred
        .iter()
        .map(|&p| {
            gt.iter()
                .enumerate()
                .filter(|(_, &g)| overlap(p, g) >= iou)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    let mut match_of_gt: Vec<Option<usize>> = vec![None; gt.len()];

    fn try_assign(
        p: usize,
        adj: &[Vec<usize>],
        match_of_gt: &mut [Option<usize>],
        visited: &mut [bool],
    ) -> bool {
        for &g in &adj[p] {
            if visited[g] {
                continue;
            }
            visited[g] = true;
            if match_of_gt[g].is_none()
                || try_assign(match_of_gt[g].unwrap(), adj, match_of_gt, visited)
            {
                match_of_gt[g] = Some(p);
                return true;
            }
        }
        false
    }

    let mut matched = 0;
    for p in 0..pred.len() {
        let mut visited = vec![false; gt.len()];
        if try_assign(p, &adj, &mut match_of_gt, &mut visited) {
            matched += 1;
        }
    }
    matched
}

fn random_events(rng: &mut ChaCha8Rng, horizon: usize) -> Vec<ShiftEvent> {
    let n = rng.gen_range(0..=6);
    let mut events: Vec<ShiftEvent> = (0..n)
        .map(|_| {
            let start = rng.gen_range(0..horizon);
            let len = rng.gen_range(1..=6);
            ShiftEvent { start_frame: start, end_frame: (start + len).min(horizon) }
        })
        .collect();
    events.sort_by_key(|e| e.start_frame);
    events
}

#[test]
fn greedy_matching_stays_within_one_of_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for case in 0..1000 {
        let pred = random_events(&mut rng, 60);
        let gt = random_events(&mut rng, 60);
        let prf = event_prf(&pred, &gt, 0.1);
        let best = optimal_matching(&pred, &gt, 0.1);
        assert!(
            best.saturating_sub(prf.matched) <= 1,
            "case {case}: greedy {} vs optimal {best}",
            prf.matched
        );
        assert!(prf.matched <= best, "greedy cannot beat optimal");
    }
}
