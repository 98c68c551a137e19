use crate::error::{Error, Result};
use crate::sfc::{Coords, Dim};

/// Extents of a row-major grid, slowest axis first (the last axis varies fastest).
///
/// Mesh coordinates run the other way round: Morton axis 0 is the last array axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridShape {
    dim: Dim,
    extents: Vec<usize>,
}

impl GridShape {
    pub fn new(extents: &[usize]) -> Result<Self> {
        let dim = Dim::new(extents.len()).map_err(|e| Error::InvalidShape(e.to_string()))?;
        if let Some(axis) = extents.iter().position(|&e| e == 0) {
            return Err(Error::InvalidShape(format!("axis {axis} has extent 0")));
        }
        let shape = GridShape {
            dim,
            extents: extents.to_vec(),
        };
        let needed = shape.level_for_extent();
        if needed > dim.max_level() as u32 {
            return Err(Error::InvalidShape(format!(
                "extents {extents:?} need refinement level {needed}, above the {dim} limit of {}",
                dim.max_level()
            )));
        }
        Ok(shape)
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn level_for_extent(&self) -> u32 {
        let max = *self.extents.iter().max().unwrap_or(&1);
        max.next_power_of_two().trailing_zeros()
    }

    /// Depth at which every grid point owns one element: `ceil(log2(max extent))`.
    pub fn initial_level(&self) -> u8 {
        self.level_for_extent() as u8
    }

    /// Extent along Morton axis `axis`.
    #[inline]
    pub fn mesh_extent(&self, axis: usize) -> usize {
        self.extents[self.dim.get() - 1 - axis]
    }

    /// Row-major position of a cell given in mesh coordinates, or `None` outside the grid.
    #[inline]
    pub fn linear_index(&self, cell: &Coords) -> Option<usize> {
        let d = self.dim.get();
        let mut idx = 0usize;
        for a in 0..d {
            let c = cell[d - 1 - a] as usize;
            if c >= self.extents[a] {
                return None;
            }
            idx = idx * self.extents[a] + c;
        }
        Some(idx)
    }

    /// Mesh coordinates of a row-major position.
    pub fn cell_of(&self, mut linear: usize) -> Coords {
        let d = self.dim.get();
        let mut cell = [0u32; 3];
        for a in (0..d).rev() {
            cell[d - 1 - a] = (linear % self.extents[a]) as u32;
            linear /= self.extents[a];
        }
        cell
    }

    /// True when a box with lower corner `lo` holds no grid point.
    #[inline]
    pub fn box_outside(&self, lo: &Coords) -> bool {
        (0..self.dim.get()).any(|k| lo[k] as usize >= self.mesh_extent(k))
    }

    /// Visits every in-grid cell of the box `[lo, lo + size)` with its row-major position.
    pub fn for_each_cell_in_box(&self, lo: &Coords, size: u32, mut f: impl FnMut(usize)) {
        let d = self.dim.get();
        let mut hi = [0u32; 3];
        for k in 0..d {
            hi[k] = (lo[k] as u64 + size as u64).min(self.mesh_extent(k) as u64) as u32;
            if hi[k] <= lo[k] {
                return;
            }
        }
        let (z0, z1) = if d == 3 { (lo[2], hi[2]) } else { (0, 1) };
        for z in z0..z1 {
            for y in lo[1]..hi[1] {
                let row = self
                    .linear_index(&[lo[0], y, z])
                    .expect("clipped box lies inside the grid");
                for x in 0..(hi[0] - lo[0]) as usize {
                    f(row + x);
                }
            }
        }
    }
}
