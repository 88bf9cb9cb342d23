//! Event classifiers: an MLP or LSTM emitter scored jointly by a tree CRF,
//! with training, evaluation, cross-validation and gradient checking.

pub mod checkpoint;
pub mod crf;
mod eval;
pub mod gradcheck;
mod hyper;
pub mod lstm;
pub mod mlp;
mod model;
mod train;
mod xval;

use std::fmt::{Debug, Display};
use std::ops::{AddAssign, MulAssign, SubAssign};

use ndarray::{Array2, LinalgScalar, ScalarOperand};
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use checkpoint::Checkpoint;
pub use crf::{CrfMask, Marginals, TreeCrf};
pub use eval::{evaluate, score_predictions, Metrics};
pub use gradcheck::{gradcheck, GradcheckConfig, GradcheckReport};
pub use hyper::{HpGrid, Hyperparameters};
pub use model::{Classifier, Emitter, Example, ModelKind};
pub use train::{global_norm, train, train_model, EpochRecord, TrainReport};
pub use xval::{
    assign_folds, cross_validate, cross_validate_with, job_seed, Dataset, JobDone, KindReport, XvalConfig, XvalReport,
};

/// Floating-point type of model parameters. Training runs in `f32`;
/// gradient checks and exactness tests use `f64`.
pub trait Real:
    Float + LinalgScalar + ScalarOperand + AddAssign + SubAssign + MulAssign + Debug + Display + Send + Sync + 'static
{
    fn of(x: f64) -> Self;
    fn as_f64(self) -> f64;

    fn sigmoid(self) -> Self {
        Self::one() / (Self::one() + (-self).exp())
    }

    fn tanh_act(self) -> Self {
        self.tanh()
    }
}

impl Real for f32 {
    fn of(x: f64) -> Self {
        x as f32
    }
    fn as_f64(self) -> f64 {
        self as f64
    }

    fn sigmoid(self) -> Self {
        1.0 / (1.0 + exp_f32(-self))
    }

    fn tanh_act(self) -> Self {
        1.0 - 2.0 / (exp_f32(2.0 * self) + 1.0)
    }
}

impl Real for f64 {
    fn of(x: f64) -> Self {
        x
    }
    fn as_f64(self) -> f64 {
        self
    }
}

/// Branch-free `exp` for activations, accurate to a few ulp over the
/// clamped range. Unlike libm it vectorises inside the LSTM cell loop.
#[inline(always)]
fn exp_f32(x: f32) -> f32 {
    const LOG2E: f32 = std::f32::consts::LOG2_E;
    const LN2_HI: f32 = 0.693_359_4;
    const LN2_LO: f32 = -2.121_944_4e-4;
    const ROUND: f32 = 12_582_912.0;
    let x = x.clamp(-87.0, 88.0);
    let k = (x * LOG2E + ROUND) - ROUND;
    let r = x - k * LN2_HI - k * LN2_LO;
    let p = 1.0
        + r * (1.0
            + r * (0.5
                + r * (0.166_666_67 + r * (0.041_666_55 + r * (0.008_333_45 + r * (0.001_393_79 + r * 0.000_198_4))))));
    p * f32::from_bits(((k as i32 + 127) as u32) << 23)
}

/// Random source used for initialisation, shuffling and dropout.
pub type Rng64 = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn rng_for(seed: u64, stream: u64) -> Rng64 {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Inverted-dropout mask: entries are 0 or 1/keep.
pub(crate) fn dropout_mask<F: Real>(shape: (usize, usize), keep: f64, rng: &mut Rng64) -> Array2<F> {
    if keep >= 1.0 {
        return Array2::ones(shape);
    }
    let scale = F::of(1.0 / keep);
    Array2::from_shape_simple_fn(shape, || if rng.gen::<f64>() < keep { scale } else { F::zero() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_activations_match_libm() {
        let mut worst = 0f32;
        for i in -20000..=20000 {
            let x = i as f32 * 0.005;
            worst = worst.max((Real::sigmoid(x) - 1.0 / (1.0 + (-x).exp())).abs());
            worst = worst.max((x.tanh_act() - x.tanh()).abs());
            if (-87.0..=88.0).contains(&x) {
                let rel = (exp_f32(x) - x.exp()).abs() / x.exp();
                assert!(rel < 1e-6, "exp({x}): {rel:e}");
            }
        }
        assert!(worst < 1e-6, "{worst:e}");
        assert!(Real::sigmoid(-200f32) < 1e-37);
        assert_eq!(200f32.tanh_act(), 1.0);
        assert_eq!((-200f32).tanh_act(), -1.0);
    }
}
