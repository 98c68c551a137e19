//! Morton (Z-order) index arithmetic.
//!
//! Coordinates are interleaved with axis 0 in the least significant position:
//! bit `i` of axis `k` lands at code bit `dim * i + k`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Spatial dimension of a mesh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn new(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(Error::Config(format!("dimension must be 2 or 3, got {other}"))),
        }
    }

    #[inline]
    pub const fn get(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Number of members in a family (4 in 2D, 8 in 3D).
    #[inline]
    pub const fn family_size(self) -> usize {
        1 << self.get()
    }

    /// Deepest level whose codes still fit into 64 bits.
    #[inline]
    pub const fn max_level(self) -> u8 {
        match self {
            Dim::Two => 31,
            Dim::Three => 20,
        }
    }
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}D", self.get())
    }
}

/// Per-axis cell coordinates; unused trailing axes are zero in 2D.
pub type Coords = [u32; 3];

/// Linearized element identity: interleaved coordinate code plus refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MortonIndex {
    pub code: u64,
    pub level: u8,
}

impl MortonIndex {
    pub const ROOT: MortonIndex = MortonIndex { code: 0, level: 0 };

    /// Validated constructor.
    pub fn new(code: u64, level: u8, dim: Dim) -> Result<Self> {
        if level > dim.max_level() {
            return Err(Error::Range(format!(
                "level {level} exceeds the {dim} maximum of {}",
                dim.max_level()
            )));
        }
        let bits = dim.get() as u32 * level as u32;
        if bits < 64 && code >> bits != 0 {
            return Err(Error::Range(format!(
                "code {code} does not fit level {level} in {dim}"
            )));
        }
        Ok(MortonIndex { code, level })
    }

    /// Interleaves `coords` at `level`.
    pub fn encode(coords: &[u32], level: u8, dim: Dim) -> Result<Self> {
        let d = dim.get();
        if coords.len() != d {
            return Err(Error::Range(format!(
                "expected {d} coordinates, got {}",
                coords.len()
            )));
        }
        if level > dim.max_level() {
            return Err(Error::Range(format!(
                "level {level} exceeds the {dim} maximum of {}",
                dim.max_level()
            )));
        }
        let mut code = 0u64;
        for (axis, &c) in coords.iter().enumerate() {
            if level < 32 && (c as u64) >> level != 0 {
                return Err(Error::Range(format!(
                    "coordinate {c} on axis {axis} is out of range for level {level}"
                )));
            }
            code |= spread(c, d) << axis;
        }
        Ok(MortonIndex { code, level })
    }

    /// Inverse of [`MortonIndex::encode`].
    pub fn decode(self, dim: Dim) -> Coords {
        let d = dim.get();
        let mut out = [0u32; 3];
        for (axis, slot) in out.iter_mut().enumerate().take(d) {
            *slot = compact(self.code >> axis, d);
        }
        out
    }

    pub fn is_root(self) -> bool {
        self.level == 0
    }

    pub fn parent(self, dim: Dim) -> Result<Self> {
        if self.level == 0 {
            return Err(Error::Domain("the root element has no parent".into()));
        }
        Ok(MortonIndex {
            code: self.code >> dim.get(),
            level: self.level - 1,
        })
    }

    /// Ancestor at `level` (which must not be deeper than `self`).
    pub fn ancestor(self, level: u8, dim: Dim) -> Self {
        debug_assert!(level <= self.level);
        MortonIndex {
            code: self.code >> (dim.get() as u32 * (self.level - level) as u32),
            level,
        }
    }

    pub fn child(self, which: usize, dim: Dim) -> Self {
        debug_assert!(which < dim.family_size());
        MortonIndex {
            code: (self.code << dim.get()) | which as u64,
            level: self.level + 1,
        }
    }

    pub fn children(self, dim: Dim) -> impl Iterator<Item = MortonIndex> {
        (0..dim.family_size()).map(move |i| self.child(i, dim))
    }

    /// Position of this element within its family.
    pub fn sibling_rank(self, dim: Dim) -> usize {
        (self.code & (dim.family_size() as u64 - 1)) as usize
    }

    /// All members of this element's family in ascending code order.
    pub fn family(self, dim: Dim) -> Result<Vec<MortonIndex>> {
        let checked = MortonIndex::new(self.code, self.level, dim)?;
        Ok(checked.parent(dim)?.children(dim).collect())
    }

    /// Lower corner and edge length of the covered cell box at `finest` level.
    pub fn cell_box(self, finest: u8, dim: Dim) -> (Coords, u32) {
        debug_assert!(self.level <= finest);
        let shift = finest - self.level;
        let mut lo = self.decode(dim);
        for c in lo.iter_mut().take(dim.get()) {
            *c <<= shift;
        }
        (lo, 1u32 << shift)
    }

    /// Code left-aligned to the deepest supported level, usable as a global SFC key.
    #[inline]
    pub fn sfc_key(self, dim: Dim) -> u64 {
        self.code << (dim.get() as u32 * (dim.max_level() - self.level) as u32)
    }

    /// Depth-first SFC order; ancestors sort before their descendants.
    pub fn cmp_sfc(self, other: Self, dim: Dim) -> Ordering {
        self.sfc_key(dim)
            .cmp(&other.sfc_key(dim))
            .then(self.level.cmp(&other.level))
    }
}

fn spread(value: u32, stride: usize) -> u64 {
    let mut out = 0u64;
    let mut v = value as u64;
    let mut bit = 0;
    while v != 0 {
        out |= (v & 1) << (bit * stride);
        v >>= 1;
        bit += 1;
    }
    out
}

fn compact(code: u64, stride: usize) -> u32 {
    let mut out = 0u32;
    let mut c = code;
    let mut bit = 0;
    while c != 0 && bit < 32 {
        out |= ((c & 1) as u32) << bit;
        c >>= stride;
        bit += 1;
    }
    out
}
