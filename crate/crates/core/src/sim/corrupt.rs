use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::scenario::check_noise;
use crate::error::Result;
use crate::geometry::Point3;
use crate::pipeline::Session;

/// Adds Gaussian jitter to every coordinate and clears tracked flags at
/// random. The first and last frame of every point stay tracked so gaps can
/// always be interpolated.
pub fn corrupt(session: &Session, sigma: f64, dropout: f64, seed: u64) -> Result<Session> {
    check_noise(sigma, dropout)?;
    let mut out = session.clone();
    if sigma == 0.0 && dropout == 0.0 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma checked above");
    let last = out.frames.len().saturating_sub(1);
    for (fi, frame) in out.frames.iter_mut().enumerate() {
        for (p, tracked) in frame.points.iter_mut().zip(frame.tracked.iter_mut()) {
            if sigma > 0.0 {
                *p += Point3::new(
                    normal.sample(&mut rng),
                    normal.sample(&mut rng),
                    normal.sample(&mut rng),
                );
            }
            if dropout > 0.0 && fi != 0 && fi != last && rng.gen_bool(dropout) {
                *tracked = false;
            }
        }
    }
    Ok(out)
}
