mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rsrn::neuro::{Activation, Mlp};

#[test]
fn backward_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..40 {
        let net = random_small_net(&mut rng);
        let x = random_vec(&mut rng, net.input_dim());
        let up = random_vec(&mut rng, net.output_dim());
        let dot = |out: &[f64]| out.iter().zip(&up).map(|(a, b)| a * b).sum::<f64>();

        let (grads, dx) = net.backward(&x, &up).unwrap();
        let fd_p = fd_params(&net, 1e-5, |n| dot(&naive_forward(n, &x)));
        let fd_x = fd_input(&x, 1e-5, |xx| dot(&naive_forward(&net, xx)));
        let err = max_rel_err(&grads.values, &fd_p).max(max_rel_err(&dx, &fd_x));
        assert!(err < 1e-4, "trial {trial}: sizes {:?} error {err}", net.layer_sizes());
    }
}

#[test]
fn forward_matches_reference_and_is_pure() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let net = random_small_net(&mut rng);
        let x = random_vec(&mut rng, net.input_dim());
        let a = net.forward(&x).unwrap();
        let b = net.forward(&x).unwrap();
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        for (u, v) in a.iter().zip(naive_forward(&net, &x)) {
            assert!((u - v).abs() < 1e-12);
        }
    }
}

#[test]
fn tanh_actor_outputs_stay_open_interval() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let net = Mlp::new(&[14, 64, 64, 2], Activation::Relu, Activation::Tanh, &mut rng).unwrap();
    for _ in 0..200 {
        let x: Vec<f64> = (0..14).map(|_| rand::Rng::gen_range(&mut rng, -3.0..3.0)).collect();
        for a in net.forward(&x).unwrap() {
            assert!(a > -1.0 && a < 1.0);
        }
    }
}
