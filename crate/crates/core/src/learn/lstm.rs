//! Recurrent emitter: a shared linear input projection feeding one LSTM
//! stack per label slot; each slot reads its scores from the final step.

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2, Axis};

use super::mlp::Dense;
use super::{dropout_mask, Real, Rng64};
use crate::error::{invalid, Result};

/// Gate blocks are laid out as `[input, forget, candidate, output]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmLayer<F = f64> {
    /// (in, 4H)
    pub w: Array2<F>,
    /// (H, 4H)
    pub u: Array2<F>,
    /// (1, 4H)
    pub b: Array2<F>,
}

impl<F: Real> LstmLayer<F> {
    fn zeros(input: usize, hidden: usize) -> LstmLayer<F> {
        LstmLayer {
            w: Array2::zeros((input, 4 * hidden)),
            u: Array2::zeros((hidden, 4 * hidden)),
            b: Array2::zeros((1, 4 * hidden)),
        }
    }

    fn hidden(&self) -> usize {
        self.u.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotStack<F = f64> {
    pub layers: Vec<LstmLayer<F>>,
    pub out: Dense<F>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lstm<F = f64> {
    pub proj: Dense<F>,
    pub stacks: Vec<SlotStack<F>>,
    pub keep_prob: f64,
    pub steps: usize,
}

/// Per-layer activations, time-major: row `t·n + i` is step `t` of sample `i`.
#[derive(Debug, Clone)]
struct LayerCache<F> {
    input: Array2<F>,
    gates: Array2<F>,
    c: Array2<F>,
    tanh_c: Array2<F>,
    h: Array2<F>,
    mask: Option<Array2<F>>,
    /// `h` after dropout; what the next layer sees.
    out: Array2<F>,
}

#[derive(Debug, Clone)]
pub struct LstmCache<F> {
    n: usize,
    x: Array2<F>,
    stacks: Vec<Vec<LayerCache<F>>>,
}

impl<F: Real> Lstm<F> {
    /// Zero-initialised model. `outputs` are the per-slot score sizes.
    pub fn new(
        input: usize,
        projection: usize,
        hidden: usize,
        layers: usize,
        outputs: &[usize],
        steps: usize,
        keep_prob: f64,
    ) -> Result<Lstm<F>> {
        if input == 0 || projection == 0 || hidden == 0 || layers == 0 || steps == 0 {
            return invalid("LSTM dimensions must be positive");
        }
        if !(keep_prob > 0.0 && keep_prob <= 1.0) {
            return invalid(format!("keep probability must be in (0, 1], got {keep_prob}"));
        }
        let stacks = outputs
            .iter()
            .map(|&k| SlotStack {
                layers: (0..layers)
                    .map(|j| LstmLayer::zeros(if j == 0 { projection } else { hidden }, hidden))
                    .collect(),
                out: Dense::zeros(hidden, k),
            })
            .collect();
        Ok(Lstm {
            proj: Dense::zeros(input, projection),
            stacks,
            keep_prob,
            steps,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.proj.w.nrows()
    }

    pub fn projection_dim(&self) -> usize {
        self.proj.w.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.stacks[0].layers[0].hidden()
    }

    pub fn layer_count(&self) -> usize {
        self.stacks[0].layers.len()
    }

    pub fn output_sizes(&self) -> Vec<usize> {
        self.stacks.iter().map(|s| s.out.w.ncols()).collect()
    }

    pub fn forward(&self, xs: &[ArrayView2<F>], rng: Option<&mut Rng64>) -> Result<Array2<F>> {
        Ok(self.forward_cached(xs, rng)?.0)
    }

    /// Concatenated slot scores, one row per sequence. Dropout on cell
    /// outputs applies only when `rng` is given.
    pub fn forward_cached(
        &self,
        xs: &[ArrayView2<F>],
        mut rng: Option<&mut Rng64>,
    ) -> Result<(Array2<F>, LstmCache<F>)> {
        let n = xs.len();
        let t_len = self.steps;
        let d = self.input_dim();
        for x in xs {
            if x.nrows() != t_len || x.ncols() != d {
                return invalid(format!(
                    "LSTM input is {}x{}, expected {t_len}x{d}",
                    x.nrows(),
                    x.ncols()
                ));
            }
        }
        let mut x = Array2::zeros((t_len * n, d));
        for (i, xi) in xs.iter().enumerate() {
            for t in 0..t_len {
                x.row_mut(t * n + i).assign(&xi.row(t));
            }
        }
        let projected = self.proj.forward(&x.view());
        let total: usize = self.output_sizes().iter().sum();
        let mut scores = Array2::zeros((n, total));
        let mut stacks = Vec::with_capacity(self.stacks.len());
        let mut col = 0;
        for stack in &self.stacks {
            let mut caches: Vec<LayerCache<F>> = Vec::with_capacity(stack.layers.len());
            for layer in &stack.layers {
                let input = caches.last().map_or_else(|| projected.clone(), |c| c.out.clone());
                caches.push(self.layer_forward(layer, input, n, rng.as_deref_mut()));
            }
            let top = &caches.last().expect("at least one layer").out;
            let last = top.slice(s![(t_len - 1) * n.., ..]);
            let k = stack.out.w.ncols();
            scores.slice_mut(s![.., col..col + k]).assign(&stack.out.forward(&last));
            col += k;
            stacks.push(caches);
        }
        Ok((scores, LstmCache { n, x, stacks }))
    }

    fn layer_forward(
        &self,
        layer: &LstmLayer<F>,
        input: Array2<F>,
        n: usize,
        rng: Option<&mut Rng64>,
    ) -> LayerCache<F> {
        let h_dim = layer.hidden();
        let rows = input.nrows();
        let mut gates = input.dot(&layer.w) + &layer.b;
        let mut c = Array2::zeros((rows, h_dim));
        let mut tanh_c = Array2::zeros((rows, h_dim));
        let mut h = Array2::zeros((rows, h_dim));
        let mut h_prev = Array2::<F>::zeros((n, h_dim));
        let mut c_prev = Array2::<F>::zeros((n, h_dim));
        for t in 0..self.steps {
            let r = t * n..(t + 1) * n;
            let mut g = gates.slice_mut(s![r.clone(), ..]);
            general_mat_mul(F::one(), &h_prev, &layer.u, F::one(), &mut g);
            for i in 0..n {
                let row = g.row_mut(i).into_slice().expect("standard layout");
                let (ig, rest) = row.split_at_mut(h_dim);
                let (fg, rest) = rest.split_at_mut(h_dim);
                let (gg, og) = rest.split_at_mut(h_dim);
                let cp = c_prev.row(i);
                let cp = cp.as_slice().expect("standard layout");
                let cr = c.row_mut(t * n + i).into_slice().expect("standard layout");
                let tr = tanh_c.row_mut(t * n + i).into_slice().expect("standard layout");
                let hr = h.row_mut(t * n + i).into_slice().expect("standard layout");
                for j in 0..h_dim {
                    let (i_, f_, g_, o_) = (ig[j].sigmoid(), fg[j].sigmoid(), gg[j].tanh_act(), og[j].sigmoid());
                    let cv = f_ * cp[j] + i_ * g_;
                    let tv = cv.tanh_act();
                    ig[j] = i_;
                    fg[j] = f_;
                    gg[j] = g_;
                    og[j] = o_;
                    cr[j] = cv;
                    tr[j] = tv;
                    hr[j] = o_ * tv;
                }
            }
            h_prev.assign(&h.slice(s![r.clone(), ..]));
            c_prev.assign(&c.slice(s![r, ..]));
        }
        let mask = rng.map(|r| dropout_mask((rows, h_dim), self.keep_prob, r));
        let out = match &mask {
            Some(m) => &h * m,
            None => h.clone(),
        };
        LayerCache {
            input,
            gates,
            c,
            tanh_c,
            h,
            mask,
            out,
        }
    }

    /// Backpropagation through time. Accumulates into `grad`.
    pub fn backward(&self, cache: &LstmCache<F>, d_scores: ArrayView2<F>, grad: &mut Lstm<F>) {
        let n = cache.n;
        let t_len = self.steps;
        let mut d_projected = Array2::<F>::zeros((t_len * n, self.projection_dim()));
        let mut col = 0;
        for (k, stack) in self.stacks.iter().enumerate() {
            let caches = &cache.stacks[k];
            let g_stack = &mut grad.stacks[k];
            let width = stack.out.w.ncols();
            let top = &caches.last().expect("at least one layer").out;
            let last = top.slice(s![(t_len - 1) * n.., ..]);
            let d_last = stack
                .out
                .backward(&last, &d_scores.slice(s![.., col..col + width]), &mut g_stack.out);
            col += width;
            let mut d_out = Array2::zeros(top.dim());
            d_out.slice_mut(s![(t_len - 1) * n.., ..]).assign(&d_last);
            for j in (0..stack.layers.len()).rev() {
                d_out = self.layer_backward(&stack.layers[j], &caches[j], d_out, n, &mut g_stack.layers[j]);
            }
            d_projected += &d_out;
        }
        self.proj.backward(&cache.x.view(), &d_projected.view(), &mut grad.proj);
    }

    /// Returns the gradient with respect to the layer input.
    fn layer_backward(
        &self,
        layer: &LstmLayer<F>,
        cache: &LayerCache<F>,
        mut d_out: Array2<F>,
        n: usize,
        grad: &mut LstmLayer<F>,
    ) -> Array2<F> {
        let h_dim = layer.hidden();
        if let Some(m) = &cache.mask {
            d_out *= m;
        }
        let mut d_gates = Array2::<F>::zeros(cache.gates.dim());
        let mut dh_next = Array2::<F>::zeros((n, h_dim));
        let mut dc_next = Array2::<F>::zeros((n, h_dim));
        for t in (0..self.steps).rev() {
            for i in 0..n {
                let row = t * n + i;
                let gates = cache.gates.row(row);
                let gates = gates.as_slice().expect("standard layout");
                let tanh_c = cache.tanh_c.row(row);
                let d_o = d_out.row(row);
                let mut dhn = dh_next.row_mut(i);
                let mut dcn = dc_next.row_mut(i);
                let mut dg = d_gates.row_mut(row);
                let dg = dg.as_slice_mut().expect("standard layout");
                for j in 0..h_dim {
                    let (ig, fg, gg, og) = (gates[j], gates[h_dim + j], gates[2 * h_dim + j], gates[3 * h_dim + j]);
                    let c_prev = if t > 0 { cache.c[[row - n, j]] } else { F::zero() };
                    let dh = d_o[j] + dhn[j];
                    let tc = tanh_c[j];
                    let one = F::one();
                    let dc = dh * og * (one - tc * tc) + dcn[j];
                    dg[j] = dc * gg * ig * (one - ig);
                    dg[h_dim + j] = dc * c_prev * fg * (one - fg);
                    dg[2 * h_dim + j] = dc * ig * (one - gg * gg);
                    dg[3 * h_dim + j] = dh * tc * og * (one - og);
                    dcn[j] = dc * fg;
                    dhn[j] = F::zero();
                }
            }
            if t > 0 {
                let dg_t = d_gates.slice(s![t * n..(t + 1) * n, ..]);
                general_mat_mul(F::one(), &dg_t, &layer.u.t(), F::zero(), &mut dh_next);
            }
        }
        let rows = cache.h.nrows();
        if self.steps > 1 {
            let h_prev = cache.h.slice(s![..rows - n, ..]);
            let dg_next = d_gates.slice(s![n.., ..]);
            general_mat_mul(F::one(), &h_prev.t(), &dg_next, F::one(), &mut grad.u);
        }
        general_mat_mul(F::one(), &cache.input.t(), &d_gates, F::one(), &mut grad.w);
        grad.b += &d_gates.sum_axis(Axis(0)).insert_axis(Axis(0));
        d_gates.dot(&layer.w.t())
    }

    pub fn tensors(&self) -> Vec<(String, &Array2<F>)> {
        let mut out = vec![
            ("proj.w".to_string(), &self.proj.w),
            ("proj.b".to_string(), &self.proj.b),
        ];
        for (k, st) in self.stacks.iter().enumerate() {
            for (j, l) in st.layers.iter().enumerate() {
                out.push((format!("slot{k}.lstm{j}.w"), &l.w));
                out.push((format!("slot{k}.lstm{j}.u"), &l.u));
                out.push((format!("slot{k}.lstm{j}.b"), &l.b));
            }
            out.push((format!("slot{k}.out.w"), &st.out.w));
            out.push((format!("slot{k}.out.b"), &st.out.b));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Array2<F>> {
        let mut out = vec![&mut self.proj.w, &mut self.proj.b];
        for st in &mut self.stacks {
            for l in &mut st.layers {
                out.push(&mut l.w);
                out.push(&mut l.u);
                out.push(&mut l.b);
            }
            out.push(&mut st.out.w);
            out.push(&mut st.out.b);
        }
        out
    }
}
