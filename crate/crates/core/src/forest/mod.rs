//! Single-tree adaptive mesh embedding a data grid.
//!
//! The root element spans `[0, 2^ℓ0)` per axis where `ℓ0` is the grid's
//! [initial level](GridShape::initial_level). Elements that lie completely
//! outside the grid are *dummy* elements: they carry no data and are never
//! refined further than the grid forces.

mod refinement;
mod shape;

pub use refinement::RefinementLevels;
pub use shape::GridShape;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::sfc::{Dim, MortonIndex};

/// Marker stored for dummy leaves in leaf-aligned value arrays.
pub const MISSING_VALUE: f64 = f64::NAN;

/// Leaf set of one refinement tree in ascending SFC order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestMesh {
    shape: GridShape,
    initial_level: u8,
    leaves: Vec<MortonIndex>,
    dummy: Vec<bool>,
}

impl ForestMesh {
    /// Builds the initial mesh: one leaf per grid point at `ℓ0`, the rest covered by
    /// dummy leaves that are as coarse as possible.
    pub fn initial(shape: &GridShape) -> Self {
        let dim = shape.dim();
        let finest = shape.initial_level();
        let mut leaves = Vec::with_capacity(shape.len());
        let mut dummy = Vec::with_capacity(shape.len());
        let mut stack = vec![MortonIndex::ROOT];
        while let Some(elem) = stack.pop() {
            let (lo, _) = elem.cell_box(finest, dim);
            if shape.box_outside(&lo) {
                leaves.push(elem);
                dummy.push(true);
            } else if elem.level == finest {
                leaves.push(elem);
                dummy.push(false);
            } else {
                // reversed so that the lowest code is popped first
                for i in (0..dim.family_size()).rev() {
                    stack.push(elem.child(i, dim));
                }
            }
        }
        ForestMesh {
            shape: shape.clone(),
            initial_level: finest,
            leaves,
            dummy,
        }
    }

    /// Builds a mesh from an explicit leaf list, validating order and coverage.
    pub fn from_leaves(shape: &GridShape, leaves: Vec<MortonIndex>) -> Result<Self> {
        let dim = shape.dim();
        let finest = shape.initial_level();
        if leaves.is_empty() {
            return Err(Error::Logic("a mesh needs at least one leaf".into()));
        }
        let mut expected_key = 0u128;
        for leaf in &leaves {
            if leaf.level > finest {
                return Err(Error::Logic(format!(
                    "leaf at level {} is deeper than the initial level {finest}",
                    leaf.level
                )));
            }
            MortonIndex::new(leaf.code, leaf.level, dim)?;
            let start = (leaf.code as u128) << (dim.get() * (finest - leaf.level) as usize);
            if start != expected_key {
                return Err(Error::Logic(format!(
                    "leaves are not an ordered partition at {leaf:?}"
                )));
            }
            expected_key = start + cell_count(dim, finest - leaf.level);
        }
        if expected_key != cell_count(dim, finest) {
            return Err(Error::Logic("leaves do not cover the root element".into()));
        }
        let dummy = leaves
            .iter()
            .map(|l| shape.box_outside(&l.cell_box(finest, dim).0))
            .collect();
        Ok(ForestMesh {
            shape: shape.clone(),
            initial_level: finest,
            leaves,
            dummy,
        })
    }

    pub fn shape(&self) -> &GridShape {
        &self.shape
    }

    pub fn dim(&self) -> Dim {
        self.shape.dim()
    }

    pub fn initial_level(&self) -> u8 {
        self.initial_level
    }

    pub fn leaves(&self) -> &[MortonIndex] {
        &self.leaves
    }

    pub fn dummy_flags(&self) -> &[bool] {
        &self.dummy
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    pub fn is_dummy(&self, leaf: usize) -> bool {
        self.dummy[leaf]
    }

    pub fn data_leaf_count(&self) -> usize {
        self.dummy.iter().filter(|d| !**d).count()
    }

    pub fn dummy_leaf_count(&self) -> usize {
        self.len() - self.data_leaf_count()
    }

    pub fn max_level(&self) -> u8 {
        self.leaves.iter().map(|l| l.level).max().unwrap_or(0)
    }

    /// Leaf count per refinement level.
    pub fn level_histogram(&self) -> BTreeMap<u8, usize> {
        let mut hist = BTreeMap::new();
        for leaf in &self.leaves {
            *hist.entry(leaf.level).or_insert(0) += 1;
        }
        hist
    }

    /// Sum of leaf measures in finest-level cells; equals `2^(dim·ℓ0)` for a valid mesh.
    pub fn measure(&self) -> u128 {
        let dim = self.dim();
        self.leaves
            .iter()
            .map(|l| cell_count(dim, self.initial_level - l.level))
            .sum()
    }

    /// Moves grid values (row-major) onto the leaves. Dummy leaves receive [`MISSING_VALUE`].
    ///
    /// Every non-dummy leaf must sit at the initial level.
    pub fn map_data(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.shape.len() {
            return Err(Error::Shape(format!(
                "expected {} values for extents {:?}, got {}",
                self.shape.len(),
                self.shape.extents(),
                values.len()
            )));
        }
        let dim = self.dim();
        self.leaves
            .iter()
            .zip(&self.dummy)
            .map(|(leaf, &dummy)| {
                if dummy {
                    return Ok(MISSING_VALUE);
                }
                if leaf.level != self.initial_level {
                    return Err(Error::Logic(format!(
                        "data leaf {leaf:?} is not at the initial level"
                    )));
                }
                let cell = leaf.decode(dim);
                let at = self
                    .shape
                    .linear_index(&cell)
                    .expect("non-dummy finest leaf lies inside the grid");
                Ok(values[at])
            })
            .collect()
    }

    /// Start positions of every complete family of same-level sibling leaves.
    pub fn families(&self) -> Vec<usize> {
        let dim = self.dim();
        let n = dim.family_size();
        let mut out = Vec::new();
        let mut i = 0;
        while i + n <= self.leaves.len() {
            let first = self.leaves[i];
            if first.level >= 1 && first.sibling_rank(dim) == 0 && self.is_family_at(i) {
                out.push(i);
                i += n;
            } else {
                i += 1;
            }
        }
        out
    }

    fn is_family_at(&self, start: usize) -> bool {
        let dim = self.dim();
        let n = dim.family_size();
        if start + n > self.leaves.len() {
            return false;
        }
        let first = self.leaves[start];
        if first.level == 0 || first.sibling_rank(dim) != 0 {
            return false;
        }
        self.leaves[start..start + n]
            .iter()
            .enumerate()
            .all(|(k, l)| l.level == first.level && l.code == first.code + k as u64)
    }

    /// Replaces each family starting at one of `starts` by its parent leaf.
    ///
    /// `starts` must be ascending leaf positions as returned by [`ForestMesh::families`].
    pub fn coarsen_families(&self, starts: &[usize]) -> Result<ForestMesh> {
        let dim = self.dim();
        let n = dim.family_size();
        let mut leaves = Vec::with_capacity(self.leaves.len());
        let mut dummy = Vec::with_capacity(self.leaves.len());
        let mut cursor = 0;
        for &start in starts {
            if start < cursor || !self.is_family_at(start) {
                return Err(Error::Logic(format!(
                    "leaf position {start} does not start a complete family"
                )));
            }
            leaves.extend_from_slice(&self.leaves[cursor..start]);
            dummy.extend_from_slice(&self.dummy[cursor..start]);
            let parent = self.leaves[start].parent(dim)?;
            leaves.push(parent);
            dummy.push(self.dummy[start..start + n].iter().all(|d| *d));
            cursor = start + n;
        }
        leaves.extend_from_slice(&self.leaves[cursor..]);
        dummy.extend_from_slice(&self.dummy[cursor..]);
        Ok(ForestMesh {
            shape: self.shape.clone(),
            initial_level: self.initial_level,
            leaves,
            dummy,
        })
    }

    /// Coarsens the families whose parents are listed in `parents`.
    pub fn coarsen_marked(&self, parents: &[MortonIndex]) -> Result<ForestMesh> {
        let dim = self.dim();
        let mut starts = Vec::with_capacity(parents.len());
        for parent in parents {
            let first = parent.child(0, dim);
            let pos = self
                .leaves
                .binary_search_by(|l| l.cmp_sfc(first, dim))
                .map_err(|_| {
                    Error::Logic(format!("family of {parent:?} is not present as leaves"))
                })?;
            starts.push(pos);
        }
        starts.sort_unstable();
        starts.dedup();
        self.coarsen_families(&starts)
    }

    /// Constant interpolation back onto the grid.
    ///
    /// `values` is aligned with the leaves; entries of dummy leaves are ignored.
    pub fn expand_to_uniform(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.leaves.len() {
            return Err(Error::Shape(format!(
                "expected {} leaf values, got {}",
                self.leaves.len(),
                values.len()
            )));
        }
        let mut out = vec![0.0; self.shape.len()];
        let dim = self.dim();
        for ((leaf, &dummy), &v) in self.leaves.iter().zip(&self.dummy).zip(values) {
            if dummy {
                continue;
            }
            let (lo, size) = leaf.cell_box(self.initial_level, dim);
            self.shape.for_each_cell_in_box(&lo, size, |i| out[i] = v);
        }
        Ok(out)
    }

    /// Spreads non-dummy payload values over the leaf list, filling dummies with [`MISSING_VALUE`].
    pub fn scatter_payload(&self, payload: &[f64]) -> Result<Vec<f64>> {
        let expected = self.data_leaf_count();
        if payload.len() != expected {
            return Err(Error::Shape(format!(
                "payload holds {} values but the mesh has {expected} data leaves",
                payload.len()
            )));
        }
        let mut it = payload.iter();
        Ok(self
            .dummy
            .iter()
            .map(|&d| if d { MISSING_VALUE } else { *it.next().unwrap() })
            .collect())
    }

    /// Inverse of [`ForestMesh::scatter_payload`].
    pub fn gather_payload(&self, values: &[f64]) -> Vec<f64> {
        values
            .iter()
            .zip(&self.dummy)
            .filter(|(_, d)| !**d)
            .map(|(v, _)| *v)
            .collect()
    }
}

fn cell_count(dim: Dim, depth: u8) -> u128 {
    1u128 << (dim.get() * depth as usize)
}
