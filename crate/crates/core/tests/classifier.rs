mod common;

use common::random_feature_set;
use csi_gait::classifier::{compute_gamma, rbf, train, SvmParams, TrainedClassifier};
use csi_gait::numerics::{sym_eig, Matrix, SeededRng};

#[test]
fn rbf_kernel_matrices_are_psd() {
    for seed in 0..20 {
        let (x, _) = random_feature_set(seed, 20, 24);
        let g = compute_gamma(&x).unwrap();
        let k = Matrix::from_fn(20, 20, |i, j| rbf(&x[i], &x[j], g));
        assert_eq!(k.asymmetry(), 0.0);
        let min = *sym_eig(&k).unwrap().values.last().unwrap();
        assert!(min >= -1e-8, "seed {seed}: {min}");
    }
}

#[test]
fn gamma_is_inverse_of_dimension_times_pooled_variance() {
    let x = vec![vec![1.0, 2.0], vec![3.0, 6.0]];
    // entries 1,2,3,6: mean 3, sample variance (4+1+0+9)/3
    let g: f64 = compute_gamma(&x).unwrap();
    assert!((g - 1.0 / (2.0 * 14.0 / 3.0)).abs() < 1e-15);
    let doubled: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|v| 2.0 * v).collect()).collect();
    assert!((compute_gamma(&doubled).unwrap() - g / 4.0).abs() < 1e-15);
}

#[test]
fn xor_is_separable() {
    let x = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]];
    let y = [0, 0, 1, 1];
    let model = train(&x, &y, &SvmParams { c: 100.0, ..Default::default() }).unwrap();
    for (f, &l) in x.iter().zip(&y) {
        assert_eq!(model.predict(f).unwrap().label, l);
    }
}

fn predictions(model: &TrainedClassifier<f64>, x: &[Vec<f64>]) -> Vec<u32> {
    x.iter().map(|f| model.predict(f).unwrap().label).collect()
}

#[test]
fn joint_feature_scaling_leaves_predictions_unchanged() {
    let (x, y) = random_feature_set(3, 60, 24);
    let (train_x, test_x) = x.split_at(40);
    let base = predictions(&train(train_x, &y[..40], &SvmParams::default()).unwrap(), test_x);
    for c in [0.01, 3.0, 250.0] {
        let s = |v: &[Vec<f64>]| -> Vec<Vec<f64>> { v.iter().map(|r| r.iter().map(|a| c * a).collect()).collect() };
        let model = train(&s(train_x), &y[..40], &SvmParams::default()).unwrap();
        assert_eq!(predictions(&model, &s(test_x)), base, "scale {c}");
    }
}

#[test]
fn training_order_does_not_matter() {
    let (x, y) = random_feature_set(4, 45, 24);
    let base = predictions(&train(&x, &y, &SvmParams::default()).unwrap(), &x);
    let mut idx: Vec<usize> = (0..x.len()).collect();
    SeededRng::new(9).shuffle(&mut idx);
    let xs: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].clone()).collect();
    let ys: Vec<u32> = idx.iter().map(|&i| y[i]).collect();
    assert_eq!(predictions(&train(&xs, &ys, &SvmParams::default()).unwrap(), &x), base);
}

#[test]
fn votes_cover_every_pair() {
    let (x, y) = random_feature_set(5, 40, 24);
    let model = train(&x, &y, &SvmParams::default()).unwrap();
    let c = model.labels.len();
    for f in &x {
        let p = model.predict(f).unwrap();
        assert_eq!(p.votes.values().sum::<usize>(), c * (c - 1) / 2);
    }
    assert!(model.predict(&x[0][..23]).is_err());
}

#[test]
fn saved_model_predicts_identically() {
    let (x, y) = random_feature_set(6, 30, 24);
    let model = train(&x, &y, &SvmParams::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.txt");
    model.save(&path).unwrap();
    let back = TrainedClassifier::<f64>::load(&path).unwrap();
    assert_eq!(back, model);
    assert_eq!(predictions(&back, &x), predictions(&model, &x));
}
