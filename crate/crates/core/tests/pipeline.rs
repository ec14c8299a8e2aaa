use std::sync::Arc;

use avtseg_core::metrics::{confusion, counting_metrics};
use avtseg_core::phantom::{generate, PhantomSpec};
use avtseg_core::pipeline::{run, PipelineConfig, PipelineError};
use avtseg_core::predictor::PredictorSpec;
use avtseg_core::volume::{clamp_patch_at, Grid, SourceTag, Volume, VolumeKind};
use avtseg_core::Executor;

fn phantom_spec(seed: u64, noise_sd: f64) -> PhantomSpec {
    PhantomSpec {
        dims: [64, 64, 64],
        seed,
        trunk_radius: 5.0,
        branch_count: 3,
        noise_sd,
        ..PhantomSpec::default()
    }
}

fn small_config(coarse: PredictorSpec, fine: PredictorSpec) -> PipelineConfig {
    PipelineConfig {
        coarse_patch: [48; 3],
        coarse_stride: [32; 3],
        fine_patch: [24; 3],
        coarse_predictor: coarse,
        fine_predictor: fine,
        source_tag: SourceTag::D,
        ..PipelineConfig::default()
    }
}

fn dsc(pred: &Volume, truth: &Volume) -> f64 {
    counting_metrics(&confusion(pred, truth).unwrap()).dsc
}

#[test]
fn noiseless_oracle_reproduces_ground_truth() {
    let p = generate(&phantom_spec(1, 20.0)).unwrap();
    let oracle = PredictorSpec::oracle(Arc::new(p.mask.clone()), 0.0, 0).unwrap();
    let result = run(&p.hu, &small_config(oracle.clone(), oracle), &Executor::new(4)).unwrap();
    assert_eq!(result.final_mask, p.mask);
    assert_eq!(result.coarse_mask, p.mask);
}

#[test]
fn window_band_covering_the_lumen_is_exact() {
    let p = generate(&phantom_spec(2, 0.0)).unwrap();
    let window = PredictorSpec::window(200.0, 400.0, 0.0).unwrap();
    let result = run(&p.hu, &small_config(window.clone(), window), &Executor::new(2)).unwrap();
    assert_eq!(dsc(&result.final_mask, &p.mask), 1.0);
}

#[test]
fn pointwise_predictor_leaves_coarse_mask_unchanged() {
    for seed in 0..3 {
        let p = generate(&phantom_spec(seed, 20.0)).unwrap();
        let window = PredictorSpec::window(158.0, 2000.0, 0.0).unwrap();
        let result = run(&p.hu, &small_config(window.clone(), window), &Executor::new(3)).unwrap();
        assert_eq!(result.final_mask, result.coarse_mask);
    }
}

#[test]
fn final_probability_differs_only_inside_fine_footprints() {
    let p = generate(&phantom_spec(4, 20.0)).unwrap();
    let coarse = PredictorSpec::window(158.0, 2000.0, 60.0).unwrap();
    let fine = PredictorSpec::oracle(Arc::new(p.mask.clone()), 0.3, 9).unwrap();
    let cfg = small_config(coarse, fine);
    let result = run(&p.hu, &cfg, &Executor::new(2)).unwrap();
    let grid = *p.hu.grid();
    let footprints: Vec<_> = result
        .centers
        .points
        .iter()
        .map(|&c| clamp_patch_at(c, cfg.fine_patch, grid.dims).unwrap())
        .collect();
    let mut changed = 0;
    for i in 0..grid.len() {
        let inside = footprints.iter().any(|f| f.contains(grid.coord(i)));
        if result.final_prob.data()[i] != result.coarse_prob.data()[i] {
            assert!(inside);
            changed += 1;
        }
        if !inside {
            assert_eq!(result.final_prob.data()[i], result.coarse_prob.data()[i]);
        }
    }
    assert!(changed > 0);
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let p = generate(&phantom_spec(5, 20.0)).unwrap();
    let coarse = PredictorSpec::window(150.0, 600.0, 37.0).unwrap();
    let fine = PredictorSpec::oracle(Arc::new(p.mask.clone()), 0.25, 3).unwrap();
    let cfg = small_config(coarse, fine);
    let reference = run(&p.hu, &cfg, &Executor::sequential()).unwrap();
    for workers in [2, 3, 8] {
        let other = run(&p.hu, &cfg, &Executor::new(workers)).unwrap();
        assert_eq!(other.final_prob, reference.final_prob);
        assert_eq!(other.final_mask, reference.final_mask);
        assert_eq!(other.centers, reference.centers);
    }
}

#[test]
fn k_style_scan_is_harmonized_before_prediction() {
    let spec = PhantomSpec {
        source_style: SourceTag::K,
        ..phantom_spec(6, 0.0)
    };
    let p = generate(&spec).unwrap();
    let window = PredictorSpec::window(158.0, 2000.0, 0.0).unwrap();
    let mut cfg = small_config(window.clone(), window);
    cfg.source_tag = SourceTag::K;
    assert_eq!(run(&p.hu, &cfg, &Executor::sequential()).unwrap().final_mask, p.mask);
    // without the shift the whole raw volume sits inside the band
    cfg.source_tag = SourceTag::D;
    assert_eq!(run(&p.hu, &cfg, &Executor::sequential()).unwrap().final_mask.count_nonzero(), p.hu.len());
}

#[test]
fn volumes_smaller_than_patches_are_handled() {
    let grid = Grid::with_dims([20, 18, 10]).unwrap();
    let hu = Volume::from_fn(grid, VolumeKind::Hu, |[x, y, _]| if (x as i64 - 10).pow(2) + (y as i64 - 9).pow(2) <= 9 { 300.0 } else { 0.0 }).unwrap();
    let result = run(&hu, &PipelineConfig::default(), &Executor::sequential()).unwrap();
    assert_eq!(result.tiles, 1);
    assert_eq!(result.final_mask.count_nonzero(), hu.data().iter().filter(|&&v| v == 300.0).count());
}

#[test]
fn min_component_size_removes_specks() {
    let grid = Grid::with_dims([32, 32, 32]).unwrap();
    let hu = Volume::from_fn(grid, VolumeKind::Hu, |[x, y, z]| {
        let tube = (x as i64 - 16).pow(2) + (y as i64 - 16).pow(2) <= 9;
        let speck = x == 2 && y == 2 && z == 2;
        if tube || speck { 300.0 } else { 0.0 }
    })
    .unwrap();
    let cfg = PipelineConfig {
        min_component_size: 10,
        coarse_patch: [32; 3],
        coarse_stride: [32; 3],
        fine_patch: [16; 3],
        ..PipelineConfig::default()
    };
    let result = run(&hu, &cfg, &Executor::sequential()).unwrap();
    assert_eq!(result.final_components, 1);
    assert_eq!(result.final_mask.get([2, 2, 2]), 0.0);
    assert_eq!(result.coarse_mask.get([2, 2, 2]), 1.0);
}

#[test]
fn prob_file_dims_are_checked() {
    let p = generate(&phantom_spec(7, 0.0)).unwrap();
    let wrong = Volume::filled(Grid::with_dims([8, 8, 8]).unwrap(), VolumeKind::Probability, 0.5).unwrap();
    let cfg = small_config(PredictorSpec::prob_file(Arc::new(wrong)).unwrap(), PredictorSpec::window(1.0, 2.0, 0.0).unwrap());
    assert!(matches!(run(&p.hu, &cfg, &Executor::sequential()), Err(PipelineError::Engine(_))));
}
