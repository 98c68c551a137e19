//! Independent reference implementations used to check the library.
#![allow(dead_code)]

use amrc::synth::generators;
use amrc::{GridShape, MortonIndex, ValueKind};
use rand::Rng;

/// Bit-by-bit interleave: bit `i` of axis `k` lands at bit `dim * i + k`.
pub fn interleave(coords: &[u32], level: u8) -> u64 {
    let dim = coords.len();
    let mut code = 0u64;
    for i in 0..level as usize {
        for (k, &c) in coords.iter().enumerate() {
            code |= (((c >> i) & 1) as u64) << (dim * i + k);
        }
    }
    code
}

pub fn deinterleave(code: u64, level: u8, dim: usize) -> Vec<u32> {
    let mut coords = vec![0u32; dim];
    for i in 0..level as usize {
        for (k, c) in coords.iter_mut().enumerate() {
            *c |= (((code >> (dim * i + k)) & 1) as u32) << i;
        }
    }
    coords
}

/// Row-major indices of the grid cells covered by `leaf`. Morton axis `k` is
/// array axis `dim - 1 - k`.
pub fn leaf_cells(leaf: MortonIndex, shape: &GridShape) -> Vec<usize> {
    let ext = shape.extents();
    let dim = ext.len();
    let l0 = shape.initial_level();
    let size = 1usize << (l0 - leaf.level);
    let lo: Vec<usize> = deinterleave(leaf.code, leaf.level, dim)
        .iter()
        .map(|&c| c as usize * size)
        .collect();
    let mut out = Vec::new();
    let total = size.pow(dim as u32);
    for off in 0..total {
        let mut rem = off;
        let mut linear = 0usize;
        let mut inside = true;
        let mut morton = vec![0usize; dim];
        for m in morton.iter_mut() {
            *m = rem % size;
            rem /= size;
        }
        for (a, &e) in ext.iter().enumerate() {
            let k = dim - 1 - a;
            let c = lo[k] + morton[k];
            if c >= e {
                inside = false;
                break;
            }
            linear = linear * e + c;
        }
        if inside {
            out.push(linear);
        }
    }
    out
}

pub fn max_abs_error(original: &[f64], decoded: &[f64]) -> f64 {
    assert_eq!(original.len(), decoded.len());
    original
        .iter()
        .zip(decoded)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

pub fn max_rel_error(original: &[f64], decoded: &[f64]) -> f64 {
    assert_eq!(original.len(), decoded.len());
    original
        .iter()
        .zip(decoded)
        .map(|(a, b)| {
            if a == b {
                0.0
            } else {
                (a - b).abs() / a.abs()
            }
        })
        .fold(0.0, f64::max)
}

pub fn random_shape(rng: &mut impl Rng, max2: usize, max3: usize) -> GridShape {
    if rng.gen_bool(0.5) {
        GridShape::new(&[rng.gen_range(1..=max2), rng.gen_range(1..=max2)]).unwrap()
    } else {
        GridShape::new(&[
            rng.gen_range(1..=max3),
            rng.gen_range(1..=max3),
            rng.gen_range(1..=max3),
        ])
        .unwrap()
    }
}

/// Piecewise-constant blocks of random size with optional small jitter.
pub fn plateaus(rng: &mut impl Rng, shape: &GridShape) -> Vec<f64> {
    let ext = shape.extents();
    let block = 1usize << rng.gen_range(0..4);
    let jitter = if rng.gen_bool(0.5) { rng.gen_range(0.0..0.5) } else { 0.0 };
    let levels: Vec<f64> = (0..64).map(|_| rng.gen_range(1.0..50.0)).collect();
    (0..shape.len())
        .map(|i| {
            let mut rem = i;
            let mut h = 0usize;
            for &e in ext.iter().rev() {
                h = h.wrapping_mul(31).wrapping_add((rem % e) / block);
                rem /= e;
            }
            levels[h % 64] + jitter * rng.gen::<f64>()
        })
        .collect()
}

/// A positive field from one of the synthetic families, tagged with its name.
pub fn random_field(rng: &mut impl Rng, shape: &GridShape) -> (&'static str, Vec<f64>) {
    let seed = rng.gen();
    match rng.gen_range(0..4) {
        0 => ("smooth", generators().get("smooth").unwrap().generate(shape, seed)),
        1 => ("layered", generators().get("layered").unwrap().generate(shape, seed)),
        2 => ("noise", generators().get("noise").unwrap().generate(shape, seed)),
        _ => ("plateaus", plateaus(rng, shape)),
    }
}

pub fn quantized(values: &[f64], kind: ValueKind) -> Vec<f64> {
    values.iter().map(|&v| kind.quantize(v)).collect()
}

pub fn range_of(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}
