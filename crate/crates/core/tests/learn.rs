use proptest::prelude::*;
use rand::Rng;
use ris_core::learn::*;
use ris_core::rng::rng_from_seed;

fn random_batch(seed: u64, n: usize, inputs: usize, outputs: usize, onehot: bool) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = rng_from_seed(seed);
    (0..n)
        .map(|_| {
            let x: Vec<f64> = (0..inputs).map(|_| rng.random_range(-1.5..1.5)).collect();
            let mut y: Vec<f64> = (0..outputs).map(|_| rng.random_range(0.0..1.0)).collect();
            if onehot {
                let k = rng.random_range(0..outputs);
                y = (0..outputs).map(|i| (i == k) as u8 as f64).collect();
            }
            (x, y)
        })
        .collect()
}

/// Central differences on the full objective, compared per parameter.
fn check_gradient(mut m: Mlp<f64>, batch: &[(Vec<f64>, Vec<f64>)], loss: Loss, l1: f64) {
    // Keep hidden pre-activations and L1 terms away from their kinks.
    let n = m.params().len();
    let mut grad = vec![0.0; n];
    m.loss_and_grad(batch, loss, l1, &mut grad).unwrap();
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let orig = m.params()[i];
        m.params_mut()[i] = orig + h;
        let mut scratch = vec![0.0; n];
        let up = m.loss_and_grad(batch, loss, l1, &mut scratch).unwrap();
        m.params_mut()[i] = orig - h;
        let down = m.loss_and_grad(batch, loss, l1, &mut scratch).unwrap();
        m.params_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * h);
        let denom = numeric.abs().max(grad[i].abs()).max(1e-7);
        worst = worst.max((numeric - grad[i]).abs() / denom);
    }
    assert!(worst < 1e-4, "{loss:?}: worst relative error {worst}");
}

fn away_from_kinks(seed: u64, inputs: usize, outputs: usize, out_act: Activation) -> Mlp<f64> {
    let mut m = Mlp::<f64>::init(inputs, 6, outputs, Activation::Relu, out_act, seed);
    // Positive biases keep rectified units active for these inputs; no weight
    // sits exactly at zero.
    let p = m.params_mut();
    for (i, w) in p.iter_mut().enumerate() {
        if w.abs() < 0.05 {
            *w = if i % 2 == 0 { 0.1 } else { -0.1 };
        }
    }
    m.set_output_bias(0.6);
    m
}

#[test]
fn analytic_gradients_match_finite_differences() {
    for seed in 0..5 {
        let batch = random_batch(seed, 5, 4, 1, false);
        check_gradient(away_from_kinks(seed, 4, 1, Activation::RectifiedTanh), &batch, Loss::SquaredError, 1e-5);
        check_gradient(away_from_kinks(seed, 4, 1, Activation::Identity), &batch, Loss::SquaredError, 0.0);
        let batch = random_batch(seed + 10, 5, 4, 9, true);
        check_gradient(away_from_kinks(seed, 4, 9, Activation::RectifiedTanh), &batch, Loss::Cosine, 1e-5);
        let batch = random_batch(seed + 20, 5, 4, 10, true);
        check_gradient(away_from_kinks(seed, 4, 10, Activation::Softmax), &batch, Loss::CrossEntropy, 1e-5);
        check_gradient(away_from_kinks(seed, 4, 10, Activation::Softmax), &batch, Loss::SquaredError, 0.0);
    }
}

fn separable() -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = rng_from_seed(42);
    (0..16)
        .map(|_| {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y = if x[0] + 0.5 * x[1] - 0.25 * x[2] > 0.0 { 0.8 } else { 0.2 };
            (x, vec![y])
        })
        .collect()
}

#[test]
fn overfits_a_small_separable_set() {
    let data = separable();
    let mut m = Mlp::<f64>::init(3, 30, 1, Activation::Relu, Activation::RectifiedTanh, 1);
    m.set_output_bias(0.5);
    let cfg = TrainConfig { epochs: 5000, learning_rate: 1e-3, l1: 0.0, ..TrainConfig::default() };
    let curve = train(&mut m, &data, &cfg).unwrap();
    assert!(*curve.last().unwrap() < 1e-3, "final loss {}", curve.last().unwrap());
    // Full-batch training on this set decreases the loss every epoch.
    let mut m2 = Mlp::<f64>::init(3, 30, 1, Activation::Relu, Activation::RectifiedTanh, 1);
    m2.set_output_bias(0.5);
    let cfg2 = TrainConfig { epochs: 300, batch_size: 16, ..TrainConfig::default() };
    let curve = train(&mut m2, &data, &cfg2).unwrap();
    assert!(curve.windows(2).all(|w| w[1] <= w[0]), "{curve:?}");
}

#[test]
fn l1_shrinks_weights() {
    let data = separable();
    let run = |l1| {
        let mut m = Mlp::<f64>::init(3, 30, 1, Activation::Relu, Activation::RectifiedTanh, 1);
        m.set_output_bias(0.5);
        let cfg = TrainConfig { epochs: 2000, learning_rate: 1e-3, l1, ..TrainConfig::default() };
        train(&mut m, &data, &cfg).unwrap();
        m.l1_norm()
    };
    assert!(run(1e-5) < run(0.0));
}

#[test]
fn training_is_deterministic_and_f32_works() {
    let data = separable();
    let go = || {
        let mut m = Mlp::<f64>::init(3, 8, 1, Activation::Relu, Activation::RectifiedTanh, 7);
        train(&mut m, &data, &TrainConfig { epochs: 20, seed: 3, ..TrainConfig::default() }).unwrap();
        m
    };
    let (a, b) = (go(), go());
    assert_eq!(a.params().iter().map(|x| x.to_bits()).collect::<Vec<_>>(), b.params().iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    let data32: Vec<(Vec<f32>, Vec<f32>)> =
        data.iter().map(|(x, y)| (x.iter().map(|&v| v as f32).collect(), y.iter().map(|&v| v as f32).collect())).collect();
    let mut m = ris_core::Mlp32::init(3, 30, 1, Activation::Relu, Activation::RectifiedTanh, 1);
    m.set_output_bias(0.5);
    let curve = train(&mut m, &data32, &TrainConfig { epochs: 500, learning_rate: 1e-3, ..TrainConfig::default() }).unwrap();
    assert!(curve.last().unwrap() < &curve[0]);
}

#[test]
fn empty_data_and_nan_are_errors() {
    let mut m = Mlp::<f64>::init(2, 3, 1, Activation::Relu, Activation::Identity, 1);
    let empty: Vec<(Vec<f64>, Vec<f64>)> = vec![];
    assert!(train(&mut m, &empty, &TrainConfig::default()).is_err());
    let bad = vec![(vec![f64::NAN, 1.0], vec![0.5])];
    assert!(train(&mut m, &bad, &TrainConfig::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rectified_tanh_output_stays_in_unit_interval(seed in any::<u64>(), x in proptest::collection::vec(-1e6f64..1e6, 38)) {
        let m = Mlp::<f64>::init(38, 30, 1, Activation::Relu, Activation::RectifiedTanh, seed);
        let y = m.forward(&x).unwrap()[0];
        prop_assert!((0.0..1.0).contains(&y));
    }
}
