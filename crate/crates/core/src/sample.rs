//! Deterministic sampling of admissible points `(x, y)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::cartan::fundamental_tensor;
use crate::metric::MetricSpec;
use crate::tensor::TangentPoint;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("sample count must be at least 1")]
    EmptySample,
    #[error("box half-width must be positive, got {0}")]
    BadBox(f64),
    #[error("no admissible point found after {attempts} attempts")]
    Exhausted { attempts: usize },
}

/// `x` uniform in `[−half_width, half_width]ⁿ`; `y` uniform on the unit
/// sphere, scaled by a uniform factor in `[0.5, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampler {
    pub seed: u64,
    pub count: usize,
    pub half_width: f64,
}

impl Sampler {
    pub const DEFAULT_HALF_WIDTH: f64 = 0.5;
    const ATTEMPTS_PER_POINT: usize = 1000;

    pub fn new(seed: u64, count: usize) -> Self {
        Sampler {
            seed,
            count,
            half_width: Self::DEFAULT_HALF_WIDTH,
        }
    }

    pub fn with_half_width(mut self, half_width: f64) -> Self {
        self.half_width = half_width;
        self
    }

    /// Draws `count` points, rejecting those where `F` is undefined or `g` is
    /// not positive definite.
    pub fn sample(&self, spec: &MetricSpec) -> Result<Vec<TangentPoint<f64>>, SampleError> {
        if self.count == 0 {
            return Err(SampleError::EmptySample);
        }
        if !(self.half_width > 0.0) {
            return Err(SampleError::BadBox(self.half_width));
        }
        let n = spec.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let limit = self.count * Self::ATTEMPTS_PER_POINT;
        let mut out = Vec::with_capacity(self.count);
        let mut attempts = 0;
        while out.len() < self.count {
            if attempts == limit {
                return Err(SampleError::Exhausted { attempts });
            }
            attempts += 1;
            let x: Vec<f64> = (0..n)
                .map(|_| rng.random_range(-self.half_width..=self.half_width))
                .collect();
            let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let scale = rng.random_range(0.5..=2.0);
            if norm < 1e-12 {
                continue;
            }
            let y = dir.iter().map(|v| v / norm * scale).collect();
            let Ok(p) = TangentPoint::new(x, y) else { continue };
            if spec.eval_at(&p).is_ok() && fundamental_tensor(spec, &p).is_ok() {
                out.push(p);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::BuiltinFamily;

    #[test]
    fn same_seed_same_points() {
        let spec = MetricSpec::family(BuiltinFamily::Euclidean, 3).unwrap();
        let a = Sampler::new(3, 5).sample(&spec).unwrap();
        let b = Sampler::new(3, 5).sample(&spec).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert!(p.x.iter().all(|v| v.abs() <= 0.5));
            let r = p.y.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((0.5..=2.0).contains(&r));
        }
    }

    #[test]
    fn zero_count_rejected() {
        let spec = MetricSpec::family(BuiltinFamily::Euclidean, 3).unwrap();
        assert_eq!(Sampler::new(1, 0).sample(&spec), Err(SampleError::EmptySample));
    }
}
