//! Synthetic test fields for sweeps and benchmarks.

use std::f64::consts::TAU;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forest::GridShape;
use crate::registry::Registry;

/// Produces a deterministic row-major field for a grid.
pub trait FieldGenerator: Send + Sync {
    fn name(&self) -> &'static str;
    fn generate(&self, shape: &GridShape, seed: u64) -> Vec<f64>;
}

/// Low-frequency sine waves around 100, amplitude at most 20. Always positive.
#[derive(Debug, Clone, Copy, Default)]
pub struct Smooth;

/// `1000 * z + smooth(rest)`, with `z` the last array axis.
#[derive(Debug, Clone, Copy, Default)]
pub struct Layered;

/// Independent uniform samples in `(0, 1]`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Noise;

struct Wave {
    freq: [f64; 3],
    phase: f64,
    amp: f64,
}

fn waves(rng: &mut ChaCha8Rng) -> Vec<Wave> {
    (0..3)
        .map(|_| Wave {
            freq: [
                rng.gen_range(0.2..1.5),
                rng.gen_range(0.2..1.5),
                rng.gen_range(0.2..1.5),
            ],
            phase: rng.gen_range(0.0..TAU),
            amp: rng.gen_range(2.0..6.6),
        })
        .collect()
}

/// Smooth function of normalized coordinates; axes listed in `axes` take part.
fn smooth_at(waves: &[Wave], shape: &GridShape, index: usize, axes: usize) -> f64 {
    let ext = shape.extents();
    let mut rem = index;
    let mut u = [0.0f64; 3];
    for a in (0..ext.len()).rev() {
        u[a] = (rem % ext[a]) as f64 / ext[a].max(2) as f64;
        rem /= ext[a];
    }
    let mut v = 100.0;
    for w in waves {
        let arg: f64 = (0..axes).map(|a| w.freq[a] * u[a]).sum::<f64>() * TAU + w.phase;
        v += w.amp * arg.sin();
    }
    v
}

impl FieldGenerator for Smooth {
    fn name(&self) -> &'static str {
        "smooth"
    }

    fn generate(&self, shape: &GridShape, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let waves = waves(&mut rng);
        let d = shape.extents().len();
        (0..shape.len()).map(|i| smooth_at(&waves, shape, i, d)).collect()
    }
}

impl FieldGenerator for Layered {
    fn name(&self) -> &'static str {
        "layered"
    }

    fn generate(&self, shape: &GridShape, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let waves = waves(&mut rng);
        let ext = shape.extents();
        let d = ext.len();
        let last = ext[d - 1];
        (0..shape.len())
            .map(|i| 1000.0 * (i % last) as f64 + smooth_at(&waves, shape, i, d - 1))
            .collect()
    }
}

impl FieldGenerator for Noise {
    fn name(&self) -> &'static str {
        "noise"
    }

    fn generate(&self, shape: &GridShape, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..shape.len()).map(|_| 1.0 - rng.gen::<f64>()).collect()
    }
}

pub fn generators() -> Registry<dyn FieldGenerator> {
    let mut r: Registry<dyn FieldGenerator> = Registry::new("generator");
    r.register("smooth", Arc::new(Smooth));
    r.register("layered", Arc::new(Layered));
    r.register("noise", Arc::new(Noise));
    r
}
