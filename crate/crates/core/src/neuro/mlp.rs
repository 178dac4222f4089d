use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Relu => "relu",
            Activation::Tanh => "tanh",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "identity" => Some(Activation::Identity),
            "relu" => Some(Activation::Relu),
            "tanh" => Some(Activation::Tanh),
            _ => None,
        }
    }

    fn apply(self, xs: &mut [f64]) {
        match self {
            Activation::Identity => {}
            Activation::Relu => xs.iter_mut().for_each(|x| *x = x.max(0.0)),
            Activation::Tanh => xs.iter_mut().for_each(|x| *x = x.tanh()),
        }
    }

    /// Multiplies `grad` by the derivative, expressed through the activation
    /// output. Relu uses the subgradient 0 at the kink.
    fn backprop(self, out: &[f64], grad: &mut [f64]) {
        match self {
            Activation::Identity => {}
            Activation::Relu => grad.iter_mut().zip(out).for_each(|(g, &y)| {
                if y <= 0.0 {
                    *g = 0.0;
                }
            }),
            Activation::Tanh => grad.iter_mut().zip(out).for_each(|(g, &y)| *g *= 1.0 - y * y),
        }
    }
}

/// Dense feed-forward network. All parameters live in one flat buffer; layer
/// `l` stores its `out × in` row-major weight matrix followed by its biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layer_sizes: Vec<usize>,
    hidden: Activation,
    output: Activation,
    params: Vec<f64>,
}

/// Gradient of a scalar with respect to every parameter of an [`Mlp`], in the
/// same flat layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub values: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            values: vec![0.0; net.params.len()],
        }
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    /// Rescales so the global L2 norm is at most `max_norm`.
    pub fn clip_norm(&mut self, max_norm: f64) {
        let n = self.norm();
        if n > max_norm {
            let s = max_norm / n;
            self.values.iter_mut().for_each(|g| *g *= s);
        }
    }
}

/// Layer outputs retained by [`Mlp::forward_batch`] for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    batch: usize,
    input: Vec<f64>,
    // post-activation output of every layer
    outputs: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.outputs.last().expect("at least one layer")
    }

    pub fn batch(&self) -> usize {
        self.batch
    }
}

impl Mlp {
    /// Fan-based uniform initialisation, zero biases.
    pub fn new<R: Rng + ?Sized>(layer_sizes: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes, hidden, output)?;
        for l in 0..net.n_layers() {
            let (fan_in, fan_out) = (layer_sizes[l], layer_sizes[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let (w, _) = net.layer_range(l);
            for p in &mut net.params[w] {
                *p = rng.gen_range(-limit..=limit);
            }
        }
        Ok(net)
    }

    pub fn zeros(layer_sizes: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::Shape("need at least an input and an output size".into()));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::Shape(format!("layer sizes must be positive: {layer_sizes:?}")));
        }
        let n = layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            hidden,
            output,
            params: vec![0.0; n],
        })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn n_layers(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn activation(&self, l: usize) -> Activation {
        if l + 1 == self.n_layers() {
            self.output
        } else {
            self.hidden
        }
    }

    /// Ranges of layer `l`'s weights and biases in the flat buffer.
    pub fn layer_range(&self, l: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let offset: usize = self.layer_sizes[..=l].windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        let (i, o) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
        (offset..offset + i * o, offset + i * o..offset + i * o + o)
    }

    pub fn weights(&self, l: usize) -> &[f64] {
        &self.params[self.layer_range(l).0]
    }

    pub fn biases(&self, l: usize) -> &[f64] {
        &self.params[self.layer_range(l).1]
    }

    pub fn weights_mut(&mut self, l: usize) -> &mut [f64] {
        let r = self.layer_range(l).0;
        &mut self.params[r]
    }

    pub fn biases_mut(&mut self, l: usize) -> &mut [f64] {
        let r = self.layer_range(l).1;
        &mut self.params[r]
    }

    pub fn same_shape(&self, other: &Mlp) -> bool {
        self.layer_sizes == other.layer_sizes
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward_batch(input, 1)?.outputs.pop().unwrap())
    }

    /// Evaluates `batch` row-major input rows at once.
    pub fn forward_batch(&self, input: &[f64], batch: usize) -> Result<ForwardCache> {
        if input.len() != batch * self.input_dim() {
            return Err(Error::LengthMismatch {
                context: "network input",
                left: input.len(),
                right: batch * self.input_dim(),
            });
        }
        if input.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("network input"));
        }
        let mut outputs: Vec<Vec<f64>> = Vec::with_capacity(self.n_layers());
        for l in 0..self.n_layers() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            let x = if l == 0 { input } else { &outputs[l - 1] };
            let b = self.biases(l);
            let mut z: Vec<f64> = Vec::with_capacity(batch * n_out);
            for _ in 0..batch {
                z.extend_from_slice(b);
            }
            // z += x · Wᵀ
            gemm(batch, n_in, n_out, x, (n_in, 1), self.weights(l), (1, n_in), &mut z, 1.0);
            self.activation(l).apply(&mut z);
            outputs.push(z);
        }
        Ok(ForwardCache {
            batch,
            input: input.to_vec(),
            outputs,
        })
    }

    /// Reverse pass for a single input: gradients of `upstream · output` with
    /// respect to the parameters and the input.
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        let cache = self.forward_batch(input, 1)?;
        let mut grads = Gradients::zeros_like(self);
        let dx = self.backward_batch(&cache, upstream, Some(&mut grads), true)?;
        Ok((grads, dx.unwrap()))
    }

    /// Accumulates into `grads` (when given) the gradient of
    /// `Σ_rows upstream · output` and optionally returns the per-row input
    /// gradient.
    pub fn backward_batch(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
        mut grads: Option<&mut Gradients>,
        want_input_grad: bool,
    ) -> Result<Option<Vec<f64>>> {
        let batch = cache.batch;
        if upstream.len() != batch * self.output_dim() {
            return Err(Error::LengthMismatch {
                context: "upstream gradient",
                left: upstream.len(),
                right: batch * self.output_dim(),
            });
        }
        if grads.as_ref().is_some_and(|g| g.values.len() != self.params.len()) {
            return Err(Error::Shape("gradient buffer does not match network".into()));
        }
        let mut delta = upstream.to_vec();
        for l in (0..self.n_layers()).rev() {
            let (n_in, n_out) = (self.layer_sizes[l], self.layer_sizes[l + 1]);
            self.activation(l).backprop(&cache.outputs[l], &mut delta);
            let x: &[f64] = if l == 0 { &cache.input } else { &cache.outputs[l - 1] };
            if let Some(grads) = grads.as_deref_mut() {
                let (wr, br) = self.layer_range(l);
                // dW += δᵀ · x
                gemm(n_out, batch, n_in, &delta, (1, n_out), x, (n_in, 1), &mut grads.values[wr], 1.0);
                let db = &mut grads.values[br];
                for row in delta.chunks_exact(n_out) {
                    db.iter_mut().zip(row).for_each(|(d, r)| *d += r);
                }
            }
            if l > 0 || want_input_grad {
                let mut dx = vec![0.0; batch * n_in];
                gemm(batch, n_out, n_in, &delta, (n_out, 1), self.weights(l), (n_in, 1), &mut dx, 0.0);
                delta = dx;
            }
        }
        Ok(want_input_grad.then_some(delta))
    }
}

/// `c = a·b + beta·c` with `a: m×k`, `b: k×n`, `c: m×n` row-major. Strides
/// are `(row, col)` pairs so transposed operands need no copy.
#[allow(clippy::too_many_arguments)]
fn gemm(m: usize, k: usize, n: usize, a: &[f64], sa: (usize, usize), b: &[f64], sb: (usize, usize), c: &mut [f64], beta: f64) {
    assert!(m == 0 || k == 0 || (m - 1) * sa.0 + (k - 1) * sa.1 < a.len());
    assert!(k == 0 || n == 0 || (k - 1) * sb.0 + (n - 1) * sb.1 < b.len());
    assert!(c.len() >= m * n);
    // SAFETY: the asserts above bound every index dgemm touches.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            sa.0 as isize,
            sa.1 as isize,
            b.as_ptr(),
            sb.0 as isize,
            sb.1 as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
