//! Manual experiment harness for tuning the two-stage schedule; run with
//! `cargo test -p gaze-core --test learning_experiment -- --ignored --nocapture`.

use gaze_core::data::{ClipData, Normalization};
use gaze_core::eval::{evaluate_dataset, EvalSettings};
use gaze_core::model::{GazeModel, ModelConfig};
use gaze_core::synth::{generate_clip, random_spec, Difficulty};
use gaze_core::train::{train_stage, Stage, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn memory_dataset(n_clips: usize, seed: u64, size: usize) -> (Vec<ClipData>, Vec<ClipData>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_train = (n_clips as f64 * 0.8).round() as usize;
    let mut all = Vec::new();
    let mut i = 0;
    while all.len() < n_clips {
        let inframe = i % 3 != 2;
        if let Ok(spec) = random_spec(&mut rng, Difficulty::Easy, size, format!("c{i:04}"), inframe)
        {
            if let Ok((frames, track)) = generate_clip(&spec) {
                all.push(ClipData {
                    clip_id: track.clip_id().to_string(),
                    dir: std::path::PathBuf::new(),
                    frames: frames.into_iter().map(Some).collect(),
                    tracks: vec![track],
                });
            }
        }
        i += 1;
    }
    let test = all.split_off(n_train);
    (all, test)
}

#[test]
#[ignore]
fn tune_two_stage_schedule() {
    let t0 = std::time::Instant::now();
    let (train, test) = memory_dataset(200, 4242, 64);
    println!("dataset built in {:.1}s", t0.elapsed().as_secs_f64());

    let cfg = ModelConfig {
        normalization: Normalization::default(),
        ..ModelConfig::default()
    };
    let mut model = GazeModel::new(cfg, 7).unwrap();
    println!("params: {}", model.params().total_values());

    let spatial = TrainConfig {
        stage: Stage::Spatial,
        lr: 1e-3,
        batch: 4,
        steps: std::env::var("SPATIAL_STEPS").ok().and_then(|v| v.parse().ok()).unwrap_or(800),
        seed: 11,
        augment: std::env::var("NO_AUG").is_err(),
        ..TrainConfig::default()
    };
    let t1 = std::time::Instant::now();
    let log = train_stage(&mut model, &train, &spatial, None).unwrap().log;
    println!(
        "spatial {} steps in {:.1}s: loss {:.4} -> {:.4}",
        spatial.steps,
        t1.elapsed().as_secs_f64(),
        log[..10].iter().map(|s| s.loss).sum::<f64>() / 10.0,
        log[log.len() - 10..].iter().map(|s| s.loss).sum::<f64>() / 10.0,
    );

    let (train_report, _) = evaluate_dataset(&model, &train[..20], &EvalSettings::default()).unwrap();
    println!("train subset after spatial: {train_report:?}");
    let (report, _) = evaluate_dataset(&model, &test, &EvalSettings::default()).unwrap();
    println!("after spatial: {report:?}");

    let temporal = TrainConfig {
        stage: Stage::Temporal,
        lr: 2.5e-4,
        batch: 2,
        seq_len: 8,
        steps: 250,
        seed: 12,
        ..TrainConfig::default()
    };
    let t2 = std::time::Instant::now();
    let log = train_stage(&mut model, &train, &temporal, None).unwrap().log;
    println!(
        "temporal {} steps in {:.1}s: loss {:.4} -> {:.4}",
        temporal.steps,
        t2.elapsed().as_secs_f64(),
        log[..10].iter().map(|s| s.loss).sum::<f64>() / 10.0,
        log[log.len() - 10..].iter().map(|s| s.loss).sum::<f64>() / 10.0,
    );

    let (report, _) = evaluate_dataset(&model, &test, &EvalSettings::default()).unwrap();
    println!("after temporal: {report:?}");
    println!("total {:.1}s", t0.elapsed().as_secs_f64());
}
