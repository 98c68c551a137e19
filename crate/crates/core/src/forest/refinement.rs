//! Level-wise refinement bit-fields.
//!
//! Level `ℓ` holds one bit per element alive at level `ℓ`, in SFC order:
//! `1` if the element is refined, `0` if it is a leaf. Levels run from the root
//! to one above the deepest leaf. Bits are packed LSB-first and every level is
//! padded with zero bits to a byte boundary.

use std::fmt;

use super::{ForestMesh, GridShape};
use crate::error::{Error, Result};
use crate::sfc::{Dim, MortonIndex};

/// Unpacked refinement bits, one entry per level.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RefinementLevels(pub Vec<Vec<bool>>);

impl RefinementLevels {
    pub fn levels(&self) -> &[Vec<bool>] {
        &self.0
    }

    pub fn bit_count(&self) -> usize {
        self.0.iter().map(Vec::len).sum()
    }

    /// Packed size in bytes.
    pub fn byte_len(&self) -> usize {
        self.0.iter().map(|l| l.len().div_ceil(8)).sum()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.byte_len());
        for level in &self.0 {
            for chunk in level.chunks(8) {
                let byte = chunk
                    .iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << i));
                out.push(byte);
            }
        }
        out
    }

    /// Unpacks a level-wise bit-field. The element count of each level follows from
    /// the refined count of the level above.
    pub fn from_bytes(bytes: &[u8], dim: Dim) -> Result<Self> {
        let mut levels = Vec::new();
        let mut pos = 0usize;
        let mut count = 1usize;
        while pos < bytes.len() {
            let need = count.div_ceil(8);
            if bytes.len() - pos < need {
                return Err(Error::CorruptStream(format!(
                    "level {} needs {need} bytes but only {} remain",
                    levels.len(),
                    bytes.len() - pos
                )));
            }
            let chunk = &bytes[pos..pos + need];
            let bits: Vec<bool> = (0..count).map(|i| chunk[i / 8] >> (i % 8) & 1 == 1).collect();
            let tail = count % 8;
            if tail != 0 && chunk[need - 1] >> tail != 0 {
                return Err(Error::CorruptStream(format!(
                    "non-zero padding bits in level {}",
                    levels.len()
                )));
            }
            let refined = bits.iter().filter(|b| **b).count();
            if refined == 0 {
                return Err(Error::CorruptStream(format!(
                    "level {} refines nothing but is followed by {} byte(s)",
                    levels.len(),
                    bytes.len() - pos - need
                )));
            }
            levels.push(bits);
            pos += need;
            count = refined
                .checked_mul(dim.family_size())
                .ok_or_else(|| Error::CorruptStream("element count overflow".into()))?;
        }
        Ok(RefinementLevels(levels))
    }
}

impl fmt::Display for RefinementLevels {
    /// Levels as `0`/`1` runs separated by `|`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, level) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for &b in level {
                f.write_str(if b { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

impl ForestMesh {
    pub fn refinement_levels(&self) -> RefinementLevels {
        let dim = self.dim();
        let mut levels = Vec::new();
        // elements alive at the current level with the leaf range they cover
        let mut current = vec![(MortonIndex::ROOT, 0..self.leaves.len())];
        let mut level = 0u8;
        loop {
            let bits: Vec<bool> = current
                .iter()
                .map(|(_, r)| !(r.len() == 1 && self.leaves[r.start].level == level))
                .collect();
            if !bits.iter().any(|b| *b) {
                break;
            }
            let mut next = Vec::with_capacity(bits.iter().filter(|b| **b).count() * dim.family_size());
            for ((elem, range), &refined) in current.iter().zip(&bits) {
                if !refined {
                    continue;
                }
                let mut start = range.start;
                for child in elem.children(dim) {
                    let mut end = start;
                    while end < range.end && self.leaves[end].ancestor(level + 1, dim) == child {
                        end += 1;
                    }
                    next.push((child, start..end));
                    start = end;
                }
            }
            levels.push(bits);
            current = next;
            level += 1;
        }
        RefinementLevels(levels)
    }

    pub fn serialize_refinement(&self) -> Vec<u8> {
        self.refinement_levels().to_bytes()
    }

    pub fn deserialize_refinement(bytes: &[u8], shape: &GridShape) -> Result<ForestMesh> {
        let levels = RefinementLevels::from_bytes(bytes, shape.dim())?;
        ForestMesh::from_refinement_levels(&levels, shape)
    }

    /// Replays refinement bits on the root element.
    pub fn from_refinement_levels(levels: &RefinementLevels, shape: &GridShape) -> Result<ForestMesh> {
        let dim = shape.dim();
        let finest = shape.initial_level() as usize;
        if levels.0.len() > finest {
            return Err(Error::CorruptStream(format!(
                "{} refinement levels exceed the initial level {finest}",
                levels.0.len()
            )));
        }
        let mut expected = 1usize;
        for (l, bits) in levels.0.iter().enumerate() {
            if bits.len() != expected {
                return Err(Error::CorruptStream(format!(
                    "level {l} has {} bits, expected {expected}",
                    bits.len()
                )));
            }
            expected = bits.iter().filter(|b| **b).count() * dim.family_size();
        }
        let mut cursors = vec![0usize; levels.0.len()];
        let mut leaves = Vec::new();
        let mut stack = vec![MortonIndex::ROOT];
        while let Some(elem) = stack.pop() {
            let l = elem.level as usize;
            let refined = l < levels.0.len() && {
                let bit = levels.0[l][cursors[l]];
                cursors[l] += 1;
                bit
            };
            if refined {
                for i in (0..dim.family_size()).rev() {
                    stack.push(elem.child(i, dim));
                }
            } else {
                leaves.push(elem);
            }
        }
        ForestMesh::from_leaves(shape, leaves)
    }
}
