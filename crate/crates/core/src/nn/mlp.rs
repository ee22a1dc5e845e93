use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_len, Error, Result};

static NEXT_STAMP: AtomicU64 = AtomicU64::new(1);

fn fresh_stamp() -> u64 {
    NEXT_STAMP.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation output `y`.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            Activation::Tanh => 0,
            Activation::Identity => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Tanh),
            1 => Some(Activation::Identity),
            _ => None,
        }
    }
}

/// One affine layer; `weights` is `out_dim x in_dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Dense {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
        }
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weights.iter().chain(&self.biases)
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weights.iter_mut().chain(self.biases.iter_mut())
    }
}

/// Parameter-shaped gradient (or moment) storage.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Dense>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self {
            layers: net.layers.iter().map(|l| Dense::zeros(l.in_dim, l.out_dim)).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(Dense::values)
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers.iter_mut().flat_map(Dense::values_mut)
    }

    pub fn scale(&mut self, s: f64) {
        self.iter_mut().for_each(|g| *g *= s);
    }

    pub fn norm(&self) -> f64 {
        self.iter().map(|g| g * g).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.iter().all(|g| g.is_finite())
    }

    pub fn shape_matches(&self, net: &Mlp) -> bool {
        self.layers.len() == net.layers.len()
            && self
                .layers
                .iter()
                .zip(&net.layers)
                .all(|(g, l)| g.in_dim == l.in_dim && g.out_dim == l.out_dim)
    }
}

/// Per-layer inputs and outputs of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    stamp: u64,
    /// `inputs[l]` is the input of layer `l`.
    inputs: Vec<Vec<f64>>,
    output: Vec<f64>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        &self.output
    }
}

/// Feed-forward network: hidden layers share one activation, the last
/// layer has its own.
#[derive(Debug)]
pub struct Mlp {
    layers: Vec<Dense>,
    hidden: Activation,
    output: Activation,
    stamp: u64,
}

impl Clone for Mlp {
    fn clone(&self) -> Self {
        Self {
            layers: self.layers.clone(),
            hidden: self.hidden,
            output: self.output,
            stamp: fresh_stamp(),
        }
    }
}

impl PartialEq for Mlp {
    fn eq(&self, other: &Self) -> bool {
        self.layers == other.layers && self.hidden == other.hidden && self.output == other.output
    }
}

fn check_dims(layer_dims: &[usize]) -> Result<()> {
    if layer_dims.len() < 2 || layer_dims.contains(&0) {
        return Err(Error::InvalidDimension(format!(
            "network needs at least two positive layer sizes, got {layer_dims:?}"
        )));
    }
    Ok(())
}

impl Mlp {
    /// All parameters zero.
    pub fn zeros(layer_dims: &[usize], hidden: Activation, output: Activation) -> Result<Self> {
        check_dims(layer_dims)?;
        Ok(Self {
            layers: layer_dims.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
            hidden,
            output,
            stamp: fresh_stamp(),
        })
    }

    /// Weights and biases uniform in `(-1/sqrt(fan_in), 1/sqrt(fan_in))`.
    pub fn new<R: Rng + ?Sized>(layer_dims: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(layer_dims, hidden, output)?;
        for layer in &mut net.layers {
            let bound = 1.0 / (layer.in_dim as f64).sqrt();
            for p in layer.values_mut() {
                *p = rng.random_range(-bound..bound);
            }
        }
        Ok(net)
    }

    pub(crate) fn from_layers(layers: Vec<Dense>, hidden: Activation, output: Activation) -> Self {
        Self {
            layers,
            hidden,
            output,
            stamp: fresh_stamp(),
        }
    }

    /// Multiplies the last layer's parameters by `factor`.
    pub fn scale_output_layer(&mut self, factor: f64) {
        if let Some(last) = self.layers.last_mut() {
            last.values_mut().for_each(|p| *p *= factor);
        }
        self.stamp = fresh_stamp();
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.layers[0].in_dim];
        dims.extend(self.layers.iter().map(|l| l.out_dim));
        dims
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim
    }

    pub fn hidden_activation(&self) -> Activation {
        self.hidden
    }

    pub fn output_activation(&self) -> Activation {
        self.output
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    /// Mutable parameter access; invalidates outstanding caches.
    pub fn layers_mut(&mut self) -> &mut [Dense] {
        self.stamp = fresh_stamp();
        &mut self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    pub fn params(&self) -> impl Iterator<Item = &f64> {
        self.layers.iter().flat_map(Dense::values)
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.stamp = fresh_stamp();
        self.layers.iter_mut().flat_map(Dense::values_mut)
    }

    pub fn all_finite(&self) -> bool {
        self.params().all(|p| p.is_finite())
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.layers.len() {
            self.output
        } else {
            self.hidden
        }
    }

    fn layer_forward(&self, l: usize, x: &[f64]) -> Vec<f64> {
        let layer = &self.layers[l];
        let act = self.activation(l);
        layer
            .weights
            .chunks_exact(layer.in_dim)
            .zip(&layer.biases)
            .map(|(row, b)| act.apply(row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + b))
            .collect()
    }

    /// Forward pass without keeping intermediates.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>> {
        ensure_len("network input", self.input_dim(), x.len())?;
        let mut h = self.layer_forward(0, x);
        for l in 1..self.layers.len() {
            h = self.layer_forward(l, &h);
        }
        Ok(h)
    }

    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        ensure_len("network input", self.input_dim(), x.len())?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut h = x.to_vec();
        for l in 0..self.layers.len() {
            let next = self.layer_forward(l, &h);
            inputs.push(h);
            h = next;
        }
        let cache = ForwardCache {
            stamp: self.stamp,
            inputs,
            output: h.clone(),
        };
        Ok((h, cache))
    }

    /// Gradients of `upstream . output` with respect to every parameter and
    /// to the input.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<(Gradients, Vec<f64>)> {
        let mut grads = Gradients::zeros_like(self);
        let input_grad = self.backward_accumulate(cache, upstream, &mut grads)?;
        Ok((grads, input_grad))
    }

    /// Like [`Mlp::backward`] but adds the parameter gradients into `grads`.
    pub fn backward_accumulate(&self, cache: &ForwardCache, upstream: &[f64], grads: &mut Gradients) -> Result<Vec<f64>> {
        if cache.stamp != self.stamp || cache.inputs.len() != self.layers.len() {
            return Err(Error::StaleCache);
        }
        ensure_len("upstream gradient", self.output_dim(), upstream.len())?;
        if !grads.shape_matches(self) {
            return Err(Error::ArchitectureMismatch("gradient buffer shape".into()));
        }
        let last = self.layers.len() - 1;
        let mut delta: Vec<f64> = upstream
            .iter()
            .zip(&cache.output)
            .map(|(g, y)| g * self.output.derivative_from_output(*y))
            .collect();
        for l in (0..=last).rev() {
            let layer = &self.layers[l];
            let input = &cache.inputs[l];
            let g = &mut grads.layers[l];
            for (o, d) in delta.iter().enumerate() {
                g.biases[o] += d;
                let row = &mut g.weights[o * layer.in_dim..(o + 1) * layer.in_dim];
                for (gw, xi) in row.iter_mut().zip(input) {
                    *gw += d * xi;
                }
            }
            let mut back = vec![0.0; layer.in_dim];
            for (row, d) in layer.weights.chunks_exact(layer.in_dim).zip(&delta) {
                for (b, w) in back.iter_mut().zip(row) {
                    *b += w * d;
                }
            }
            if l > 0 {
                // inputs[l] holds the hidden activations produced by layer l-1.
                for (b, y) in back.iter_mut().zip(input) {
                    *b *= self.hidden.derivative_from_output(*y);
                }
            }
            delta = back;
        }
        Ok(delta)
    }

    pub fn same_architecture(&self, other: &Mlp) -> bool {
        self.layer_dims() == other.layer_dims() && self.hidden == other.hidden && self.output == other.output
    }
}

/// `target <- eta * source + (1 - eta) * target`, parameter-wise.
pub fn soft_update(target: &mut Mlp, source: &Mlp, eta: f64) -> Result<()> {
    if !target.same_architecture(source) {
        return Err(Error::ArchitectureMismatch(format!(
            "soft update from {:?} into {:?}",
            source.layer_dims(),
            target.layer_dims()
        )));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("soft-update rate must lie in [0, 1], got {eta}")));
    }
    for (t, s) in target.params_mut().zip(source.params()) {
        *t = eta * s + (1.0 - eta) * *t;
    }
    Ok(())
}
