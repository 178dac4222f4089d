#![allow(dead_code)]

use rand::Rng;
use rsrn::neuro::{Activation, Mlp};

/// Straight-line forward pass with explicit loops, independent of the
/// library's batched matrix code.
pub fn naive_forward(net: &Mlp, x: &[f64]) -> Vec<f64> {
    let sizes = net.layer_sizes();
    let mut h = x.to_vec();
    for l in 0..net.n_layers() {
        let (n_in, n_out) = (sizes[l], sizes[l + 1]);
        let w = net.weights(l);
        let b = net.biases(l);
        let act = if l + 1 == net.n_layers() { net.output_activation() } else { net.hidden_activation() };
        let mut next = vec![0.0; n_out];
        for o in 0..n_out {
            let mut z = b[o];
            for i in 0..n_in {
                z += w[o * n_in + i] * h[i];
            }
            next[o] = match act {
                Activation::Identity => z,
                Activation::Relu => {
                    if z > 0.0 {
                        z
                    } else {
                        0.0
                    }
                }
                Activation::Tanh => z.tanh(),
            };
        }
        h = next;
    }
    h
}

/// Central finite differences of `f` with respect to every parameter.
pub fn fd_params(net: &Mlp, h: f64, f: impl Fn(&Mlp) -> f64) -> Vec<f64> {
    let mut probe = net.clone();
    (0..net.params().len())
        .map(|k| {
            let orig = probe.params()[k];
            probe.params_mut()[k] = orig + h;
            let up = f(&probe);
            probe.params_mut()[k] = orig - h;
            let down = f(&probe);
            probe.params_mut()[k] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn fd_input(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|k| {
            let orig = probe[k];
            probe[k] = orig + h;
            let up = f(&probe);
            probe[k] = orig - h;
            let down = f(&probe);
            probe[k] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Relative error with an absolute floor so that coordinates whose true
/// gradient is ~0 are judged on absolute error instead.
pub fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6)
}

pub fn max_rel_err(a: &[f64], n: &[f64]) -> f64 {
    assert_eq!(a.len(), n.len());
    a.iter().zip(n).map(|(&x, &y)| rel_err(x, y)).fold(0.0, f64::max)
}

/// A random net with at most 3 layers and 8 units per layer.
pub fn random_small_net<R: Rng>(rng: &mut R) -> Mlp {
    let n_layers = rng.gen_range(1..=3);
    let sizes: Vec<usize> = (0..=n_layers).map(|_| rng.gen_range(1..=8)).collect();
    let hidden = if rng.gen_bool(0.5) { Activation::Relu } else { Activation::Tanh };
    let output = if rng.gen_bool(0.5) { Activation::Identity } else { Activation::Tanh };
    let mut net = Mlp::new(&sizes, hidden, output, rng).unwrap();
    for p in net.params_mut() {
        *p += rng.gen_range(-0.1..0.1);
    }
    net
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
