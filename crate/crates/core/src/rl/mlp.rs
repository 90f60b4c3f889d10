use rand::Rng;

use super::RlError;

/// Output nonlinearity of the last layer. Hidden layers are always ReLU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Tanh,
}

impl Activation {
    pub fn code(self) -> u32 {
        match self {
            Activation::Identity => 0,
            Activation::Tanh => 1,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Tanh),
            _ => None,
        }
    }
}

/// Fully connected feed-forward network with ReLU hidden layers.
///
/// All weights and biases live in one flat vector, layer by layer: the
/// `out x in` weight matrix in row-major order followed by the bias vector.
/// Gradients, optimizer moments and checkpoints share this layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    dims: Vec<usize>,
    output: Activation,
    params: Vec<f64>,
}

/// Intermediate values of one forward pass, needed by [`Mlp::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    /// `acts[0]` is the input, `acts[l + 1]` the activated output of layer `l`.
    acts: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("cache holds at least the input")
    }

    pub fn input(&self) -> &[f64] {
        &self.acts[0]
    }
}

fn param_count(dims: &[usize]) -> usize {
    dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    pub fn zeros(dims: &[usize], output: Activation) -> Self {
        assert!(dims.len() >= 2, "a network needs input and output sizes");
        Self {
            dims: dims.to_vec(),
            output,
            params: vec![0.0; param_count(dims)],
        }
    }

    /// Uniform initialization in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for
    /// weights and biases of every layer.
    pub fn random<R: Rng + ?Sized>(dims: &[usize], output: Activation, rng: &mut R) -> Self {
        let mut net = Self::zeros(dims, output);
        let mut offset = 0;
        for w in dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = 1.0 / (fan_in as f64).sqrt();
            for p in &mut net.params[offset..offset + fan_in * fan_out + fan_out] {
                *p = rng.random_range(-bound..=bound);
            }
            offset += fan_in * fan_out + fan_out;
        }
        net
    }

    pub fn from_params(
        dims: &[usize],
        output: Activation,
        params: Vec<f64>,
    ) -> Result<Self, RlError> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(RlError::Checkpoint(format!(
                "invalid layer dimensions {dims:?}"
            )));
        }
        let expected = param_count(dims);
        if params.len() != expected {
            return Err(RlError::DimensionMismatch {
                expected,
                got: params.len(),
            });
        }
        Ok(Self {
            dims: dims.to_vec(),
            output,
            params,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn input_dim(&self) -> usize {
        self.dims[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.dims.last().unwrap()
    }

    pub fn num_layers(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, RlError> {
        Ok(self.forward_cached(input)?.acts.pop().unwrap())
    }

    pub fn forward_cached(&self, input: &[f64]) -> Result<ForwardCache, RlError> {
        if input.len() != self.input_dim() {
            return Err(RlError::DimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let mut acts = Vec::with_capacity(self.dims.len());
        acts.push(input.to_vec());
        let last = self.num_layers() - 1;
        let mut offset = 0;
        for (l, w) in self.dims.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let weights = &self.params[offset..offset + n_in * n_out];
            let bias = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let x = &acts[l];
            let mut y = Vec::with_capacity(n_out);
            for (row, b) in weights.chunks_exact(n_in).zip(bias) {
                let z = b + row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>();
                y.push(if l == last {
                    match self.output {
                        Activation::Identity => z,
                        Activation::Tanh => z.tanh(),
                    }
                } else {
                    z.max(0.0)
                });
            }
            acts.push(y);
            offset += n_in * n_out + n_out;
        }
        Ok(ForwardCache { acts })
    }

    /// Backpropagates `upstream` (gradient of some scalar w.r.t. the network
    /// output) and adds the parameter gradient into `grads`. Returns the
    /// gradient with respect to the input.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
        grads: &mut [f64],
    ) -> Result<Vec<f64>, RlError> {
        if upstream.len() != self.output_dim() {
            return Err(RlError::DimensionMismatch {
                expected: self.output_dim(),
                got: upstream.len(),
            });
        }
        if grads.len() != self.params.len() {
            return Err(RlError::DimensionMismatch {
                expected: self.params.len(),
                got: grads.len(),
            });
        }
        let last = self.num_layers() - 1;
        let out = cache.output();
        // gradient w.r.t. pre-activation of the current layer
        let mut delta: Vec<f64> = match self.output {
            Activation::Identity => upstream.to_vec(),
            Activation::Tanh => upstream
                .iter()
                .zip(out)
                .map(|(g, y)| g * (1.0 - y * y))
                .collect(),
        };
        let mut offset = self.params.len();
        for l in (0..=last).rev() {
            let (n_in, n_out) = (self.dims[l], self.dims[l + 1]);
            offset -= n_in * n_out + n_out;
            let x = &cache.acts[l];
            let (gw, gb) = grads[offset..offset + n_in * n_out + n_out].split_at_mut(n_in * n_out);
            for (j, d) in delta.iter().enumerate() {
                gb[j] += d;
                if *d != 0.0 {
                    for (g, xi) in gw[j * n_in..(j + 1) * n_in].iter_mut().zip(x) {
                        *g += d * xi;
                    }
                }
            }
            let weights = &self.params[offset..offset + n_in * n_out];
            let mut dx = vec![0.0; n_in];
            for (j, d) in delta.iter().enumerate() {
                if *d != 0.0 {
                    for (acc, w) in dx.iter_mut().zip(&weights[j * n_in..(j + 1) * n_in]) {
                        *acc += d * w;
                    }
                }
            }
            if l > 0 {
                // ReLU on the layer below; its activated output is x.
                for (d, xi) in dx.iter_mut().zip(x) {
                    if *xi <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            delta = dx;
        }
        Ok(delta)
    }

    /// Parameter and input gradients of `upstream · output`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        upstream: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>), RlError> {
        let mut grads = vec![0.0; self.params.len()];
        let input_grad = self.backward_accumulate(cache, upstream, &mut grads)?;
        Ok((grads, input_grad))
    }
}

/// Polyak averaging `target <- tau * online + (1 - tau) * target`.
pub fn soft_update(target: &mut Mlp, online: &Mlp, tau: f64) {
    assert_eq!(
        target.dims, online.dims,
        "soft update between different shapes"
    );
    for (t, o) in target.params.iter_mut().zip(&online.params) {
        *t = tau * o + (1.0 - tau) * *t;
    }
}
