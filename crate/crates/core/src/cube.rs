//! Integer-indexed dyadic cubes `Q_{k,l} = prod [2^-k l_i, 2^-k (l_i + 1)]`.
//!
//! All geometry is integer arithmetic on `(k, l)`; floating-point corners are
//! only produced on request.

use serde::{Deserialize, Serialize};

use crate::spectral::{GridSpec, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    k: i32,
    l: [i64; 2],
    dim: u8,
}

impl DyadicCube {
    pub fn new(dim: usize, k: i32, l: [i64; 2]) -> Self {
        debug_assert!(dim == 1 || dim == 2);
        let mut l = l;
        if dim == 1 {
            l[1] = 0;
        }
        Self {
            k,
            l,
            dim: dim as u8,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn scale(&self) -> i32 {
        self.k
    }

    pub fn index(&self) -> [i64; 2] {
        self.l
    }

    /// Side length `2^-k`.
    pub fn side(&self) -> f64 {
        2f64.powi(-self.k)
    }

    pub fn volume(&self) -> f64 {
        2f64.powi(-self.k * self.dim as i32)
    }

    /// Lower-left corner `x_Q = 2^-k l`.
    pub fn corner(&self) -> Point {
        let s = self.side();
        let mut p = [0.0; 2];
        for (axis, slot) in p.iter_mut().enumerate().take(self.dim()) {
            *slot = self.l[axis] as f64 * s;
        }
        p
    }

    /// The unique cube of scale `nu <= k` containing `self`.
    pub fn ancestor(&self, nu: i32) -> Option<DyadicCube> {
        if nu > self.k {
            return None;
        }
        let shift = (self.k - nu) as u32;
        if shift >= 63 {
            return None;
        }
        let mut l = self.l;
        for v in l.iter_mut().take(self.dim()) {
            // arithmetic shift is floor division for negative indices
            *v >>= shift;
        }
        Some(DyadicCube {
            k: nu,
            l,
            dim: self.dim,
        })
    }

    pub fn parent(&self) -> DyadicCube {
        self.ancestor(self.k - 1).expect("parent scale is coarser")
    }

    /// `self ⊆ other`.
    pub fn is_within(&self, other: &DyadicCube) -> bool {
        self.dim == other.dim && self.ancestor(other.k).is_some_and(|a| a == *other)
    }

    pub fn contains(&self, other: &DyadicCube) -> bool {
        other.is_within(self)
    }

    pub fn children(&self) -> Vec<DyadicCube> {
        self.descendants(self.k + 1)
    }

    /// All cubes of scale `k` contained in `self`; empty when `k` is coarser.
    pub fn descendants(&self, k: i32) -> Vec<DyadicCube> {
        if k < self.k {
            return Vec::new();
        }
        let per_axis = 1i64 << (k - self.k);
        let base = [self.l[0] * per_axis, self.l[1] * per_axis];
        match self.dim {
            1 => (0..per_axis)
                .map(|i| DyadicCube::new(1, k, [base[0] + i, 0]))
                .collect(),
            _ => (0..per_axis)
                .flat_map(|i| {
                    (0..per_axis).map(move |j| DyadicCube::new(2, k, [base[0] + i, base[1] + j]))
                })
                .collect(),
        }
    }

    /// Concentric dilate by an odd integer factor (`9` for `P*`, `81` for `P**`).
    pub fn dilate(&self, factor: i64) -> DilatedCube {
        assert!(factor > 0 && factor % 2 == 1, "dilation factor must be odd");
        let pad = (factor - 1) / 2;
        let mut lower = self.l;
        for v in lower.iter_mut().take(self.dim()) {
            *v -= pad;
        }
        DilatedCube {
            k: self.k,
            lower,
            side_units: factor,
            dim: self.dim,
        }
    }

    /// Whether the cube lies in the torus `[-2^j, 2^j)^d` without wrapping.
    pub fn inside_torus(&self, log2_half_width: i32) -> bool {
        let e = log2_half_width + self.k;
        if e < 0 || e > 62 {
            return e > 62;
        }
        let bound = 1i64 << e;
        (0..self.dim()).all(|axis| self.l[axis] >= -bound && self.l[axis] < bound)
    }

    /// Contiguous block of grid cells covered by the cube:
    /// `(start index per axis, cells per side)`.
    pub fn cell_block(&self, grid: &GridSpec) -> Option<([usize; 2], usize)> {
        let b = grid.log2_spacing()?;
        let j = grid.log2_half_width()?;
        if -self.k - b < 0 || !self.inside_torus(j) {
            return None;
        }
        let per_side = 1usize << (-self.k - b);
        let mut start = [0usize; 2];
        for axis in 0..self.dim() {
            start[axis] = (self.l[axis] * per_side as i64 + (grid.n() / 2) as i64) as usize;
        }
        Some((start, per_side))
    }

    /// Flat sample indices of the cells in the cube.
    pub fn cell_indices(&self, grid: &GridSpec) -> Option<Vec<usize>> {
        let (start, side) = self.cell_block(grid)?;
        Some(match self.dim {
            1 => (start[0]..start[0] + side).collect(),
            _ => (start[0]..start[0] + side)
                .flat_map(|r| (start[1]..start[1] + side).map(move |c| grid.flat_index([r, c])))
                .collect(),
        })
    }
}

/// All cubes of scale `k` contained in `parent`.
pub fn cubes_in(k: i32, parent: &DyadicCube) -> Vec<DyadicCube> {
    parent.descendants(k)
}

/// All cubes of scale `k` inside the torus `[-2^j, 2^j)^d`.
pub fn torus_cubes(dim: usize, k: i32, log2_half_width: i32) -> Vec<DyadicCube> {
    let e = log2_half_width + k;
    if e < 0 {
        return Vec::new();
    }
    let bound = 1i64 << e;
    match dim {
        1 => (-bound..bound)
            .map(|i| DyadicCube::new(1, k, [i, 0]))
            .collect(),
        _ => (-bound..bound)
            .flat_map(|i| (-bound..bound).map(move |j| DyadicCube::new(2, k, [i, j])))
            .collect(),
    }
}

/// Non-dyadic cube `prod [2^-k lower_i, 2^-k (lower_i + side_units)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DilatedCube {
    k: i32,
    lower: [i64; 2],
    side_units: i64,
    dim: u8,
}

impl DilatedCube {
    pub fn side(&self) -> f64 {
        self.side_units as f64 * 2f64.powi(-self.k)
    }

    pub fn contains_cube(&self, q: &DyadicCube) -> bool {
        if q.dim != self.dim {
            return false;
        }
        // compare at the finer of the two scales
        let k = self.k.max(q.k);
        let (su, sq) = ((k - self.k) as u32, (k - q.k) as u32);
        (0..self.dim as usize).all(|axis| {
            let lo = self.lower[axis] << su;
            let hi = (self.lower[axis] + self.side_units) << su;
            let qlo = q.l[axis] << sq;
            let qhi = (q.l[axis] + 1) << sq;
            lo <= qlo && qhi <= hi
        })
    }

    pub fn contains(&self, other: &DilatedCube) -> bool {
        if other.dim != self.dim {
            return false;
        }
        let k = self.k.max(other.k);
        let (su, so) = ((k - self.k) as u32, (k - other.k) as u32);
        (0..self.dim as usize).all(|axis| {
            (self.lower[axis] << su) <= (other.lower[axis] << so)
                && ((other.lower[axis] + other.side_units) << so)
                    <= ((self.lower[axis] + self.side_units) << su)
        })
    }
}

impl From<DyadicCube> for DilatedCube {
    fn from(q: DyadicCube) -> Self {
        q.dilate(1)
    }
}
