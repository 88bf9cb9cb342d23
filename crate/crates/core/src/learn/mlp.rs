//! Feed-forward emitter: hidden layers of linear + ReLU with dropout, then
//! a linear read-out of the concatenated slot scores.

use ndarray::{Array2, ArrayView2, Axis};

use super::{dropout_mask, Real, Rng64};
use crate::error::{invalid, Result};

/// `y = x·w + b` with `w` of shape (in, out) and `b` of shape (1, out).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<F = f64> {
    pub w: Array2<F>,
    pub b: Array2<F>,
}

impl<F: Real> Dense<F> {
    pub fn zeros(input: usize, output: usize) -> Dense<F> {
        Dense {
            w: Array2::zeros((input, output)),
            b: Array2::zeros((1, output)),
        }
    }

    pub fn forward(&self, x: &ArrayView2<F>) -> Array2<F> {
        x.dot(&self.w) + &self.b
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&self, x: &ArrayView2<F>, dy: &ArrayView2<F>, grad: &mut Dense<F>) -> Array2<F> {
        ndarray::linalg::general_mat_mul(F::one(), &x.t(), dy, F::one(), &mut grad.w);
        grad.b += &dy.sum_axis(Axis(0)).insert_axis(Axis(0));
        dy.dot(&self.w.t())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<F = f64> {
    pub layers: Vec<Dense<F>>,
    pub keep_prob: f64,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct MlpCache<F> {
    /// Input of each layer (after ReLU and dropout for hidden layers).
    inputs: Vec<Array2<F>>,
    /// Pre-activation of each hidden layer.
    pre: Vec<Array2<F>>,
    masks: Vec<Option<Array2<F>>>,
}

impl<F: Real> Mlp<F> {
    /// Zero-initialised network with the given layer widths, input first.
    pub fn new(sizes: &[usize], keep_prob: f64) -> Result<Mlp<F>> {
        if sizes.len() < 2 || sizes.contains(&0) {
            return invalid(format!("MLP needs at least two positive layer sizes, got {sizes:?}"));
        }
        if !(keep_prob > 0.0 && keep_prob <= 1.0) {
            return invalid(format!("keep probability must be in (0, 1], got {keep_prob}"));
        }
        Ok(Mlp {
            layers: sizes.windows(2).map(|w| Dense::zeros(w[0], w[1])).collect(),
            keep_prob,
        })
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![self.layers[0].w.nrows()];
        out.extend(self.layers.iter().map(|l| l.w.ncols()));
        out
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].w.nrows()
    }

    pub fn forward(&self, x: ArrayView2<F>, rng: Option<&mut Rng64>) -> Result<Array2<F>> {
        Ok(self.forward_cached(x, rng)?.0)
    }

    /// Scores for each row of `x`. Dropout is applied to hidden activations
    /// only when `rng` is given.
    pub fn forward_cached(&self, x: ArrayView2<F>, mut rng: Option<&mut Rng64>) -> Result<(Array2<F>, MlpCache<F>)> {
        if x.ncols() != self.input_dim() {
            return invalid(format!(
                "MLP input has {} columns, expected {}",
                x.ncols(),
                self.input_dim()
            ));
        }
        let mut cache = MlpCache {
            inputs: Vec::with_capacity(self.layers.len()),
            pre: Vec::new(),
            masks: Vec::new(),
        };
        let mut a = x.to_owned();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let z = layer.forward(&a.view());
            cache.inputs.push(a);
            if i == last {
                return Ok((z, cache));
            }
            let mut h = z.mapv(|v| v.max(F::zero()));
            let mask = rng.as_deref_mut().map(|r| dropout_mask(h.dim(), self.keep_prob, r));
            if let Some(m) = &mask {
                h *= m;
            }
            cache.pre.push(z);
            cache.masks.push(mask);
            a = h;
        }
        unreachable!("the last layer returns")
    }

    pub fn backward(&self, cache: &MlpCache<F>, d_scores: ArrayView2<F>, grad: &mut Mlp<F>) {
        let last = self.layers.len() - 1;
        let mut d = self.layers[last].backward(&cache.inputs[last].view(), &d_scores, &mut grad.layers[last]);
        for i in (0..last).rev() {
            if let Some(m) = &cache.masks[i] {
                d *= m;
            }
            d.zip_mut_with(&cache.pre[i], |g, &z| {
                if z <= F::zero() {
                    *g = F::zero();
                }
            });
            d = self.layers[i].backward(&cache.inputs[i].view(), &d.view(), &mut grad.layers[i]);
        }
    }

    pub fn tensors(&self) -> Vec<(String, &Array2<F>)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(i, l)| [(format!("mlp.{i}.w"), &l.w), (format!("mlp.{i}.b"), &l.b)])
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<F>> {
        self.layers.iter_mut().flat_map(|l| [&mut l.w, &mut l.b]).collect()
    }
}
