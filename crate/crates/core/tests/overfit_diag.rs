//! Diagnostic: can the model overfit a handful of frames at all, and where
//! do the gradients go? Run manually with --ignored --nocapture.

use gaze_core::data::{gaze_pixel, ClipData, Normalization};
use gaze_core::eval::{evaluate_dataset, EvalSettings};
use gaze_core::model::{GazeModel, ModelConfig};
use gaze_core::synth::{generate_clip, random_spec, Difficulty};
use gaze_core::train::{train_stage, Stage, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn one_clip(seed: u64, size: usize) -> Vec<ClipData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        if let Ok(spec) = random_spec(&mut rng, Difficulty::Easy, size, "c0".into(), true) {
            if let Ok((frames, track)) = generate_clip(&spec) {
                return vec![ClipData {
                    clip_id: "c0".into(),
                    dir: std::path::PathBuf::new(),
                    frames: frames.into_iter().map(Some).collect(),
                    tracks: vec![track],
                }];
            }
        }
    }
}

#[test]
#[ignore]
fn overfit_one_clip() {
    let size = 64;
    let dataset = one_clip(99, size);
    let cfg = ModelConfig::default();
    let mut model = GazeModel::new(cfg, 7).unwrap();

    for (round, steps) in [(0, 50), (1, 150), (2, 300)] {
        let tc = TrainConfig {
            stage: Stage::Spatial,
            lr: 1e-3,
            batch: 4,
            steps,
            seed: round,
            augment: false,
            ..TrainConfig::default()
        };
        let t = std::time::Instant::now();
        let log = train_stage(&mut model, &dataset, &tc, None).unwrap().log;
        let (report, detail) = evaluate_dataset(&model, &dataset, &EvalSettings::default()).unwrap();
        println!(
            "round {round}: {} steps {:.0}s loss {:.4}->{:.4} | train auc {:?} l2 {:?} ap {:?}",
            steps,
            t.elapsed().as_secs_f64(),
            log[..5.min(log.len())].iter().map(|s| s.loss).sum::<f64>() / 5.0,
            log[log.len().saturating_sub(5)..].iter().map(|s| s.loss).sum::<f64>() / 5.0,
            report.auc,
            report.l2_mean,
            report.out_of_frame_ap,
        );
        let _ = &detail;
    }

    // where does the prediction peak vs the target?
    let clip = &dataset[0];
    let track = &clip.tracks[0];
    let ann = &track.frames[0];
    let frame = gaze_core::data::preprocess(
        clip.frame(0).unwrap(),
        size,
        &Normalization::default(),
    );
    let mut state = model.zero_state();
    let pred = model.forward_frame(&frame, ann.bbox, &mut state).unwrap();
    let flat = pred.raw_map.argmax();
    let hm = pred.raw_map.shape()[0];
    let (px, py) = (flat % hm, flat / hm);
    let g = ann.gaze.unwrap();
    let (gx, gy) = gaze_pixel((g[0], g[1]), hm);
    println!(
        "pred argmax ({px},{py}) vs gt pixel ({gx},{gy}); alpha {:.3}; raw min/max {:.3}/{:.3}",
        pred.alpha,
        pred.raw_map.min_value(),
        pred.raw_map.max_value()
    );
}

#[test]
#[ignore]
fn gradient_magnitudes_by_module() {
    use gaze_core::train::{composite_loss_vars, LossWeights};
    use gaze_tensor::Graph;

    let size = 64;
    let dataset = one_clip(99, size);
    let model = GazeModel::new(ModelConfig::default(), 7).unwrap();
    let clip = &dataset[0];
    let ann = &clip.tracks[0].frames[0];
    let frame = gaze_core::data::preprocess(
        clip.frame(0).unwrap(),
        size,
        &Normalization::default(),
    );

    let mut g = Graph::<f32>::new();
    let bound = model.bind_params(&mut g, model.params(), &|_| false);
    let mut state = model.state_to_vars(&mut g, &model.zero_state());
    let out = model
        .forward_frame_vars(&mut g, &bound, &frame, ann.bbox, &mut state)
        .unwrap();
    let (loss, lh, lf) =
        composite_loss_vars(&mut g, &out, ann, 64, 3.0, &LossWeights::default()).unwrap();
    println!("loss value {:.4} (l_h {lh:.5}, l_f {lf:.5})", g.value(loss).item().unwrap());
    g.backward(loss).unwrap();

    let mut by_module: std::collections::BTreeMap<String, (f64, usize)> = Default::default();
    for (i, (name, _)) in model.params().iter().enumerate() {
        let module = name.split('.').next().unwrap().to_string();
        if let Some(grad) = g.grad(bound.var(i)) {
            let rms: f64 = grad.data().iter().map(|&v| f64::from(v) * f64::from(v)).sum::<f64>();
            let e = by_module.entry(module).or_default();
            e.0 += rms;
            e.1 += grad.numel();
        }
    }
    for (module, (ss, n)) in by_module {
        println!("{module:<16} rms grad {:.3e} over {n} values", (ss / n as f64).sqrt());
    }
}
