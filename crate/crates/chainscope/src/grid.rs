//! Uniform box grid covering the d-torus.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Axis-aligned cover of the torus by `n^d` cubes of side `1/n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxGrid {
    dimension: usize,
    resolution: u32,
}

/// Flat index of a grid box, row-major over the axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BoxId(pub u64);

impl BoxGrid {
    pub fn new(dimension: usize, resolution: u32) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        if resolution < 2 {
            return Err(Error::InvalidParameter("resolution must be >= 2".into()));
        }
        let count = (resolution as u128).checked_pow(dimension as u32);
        match count {
            Some(c) if c <= u64::MAX as u128 => Ok(Self {
                dimension,
                resolution,
            }),
            _ => Err(Error::InvalidParameter(
                "box count n^d does not fit in u64".into(),
            )),
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn resolution(&self) -> u32 {
        self.resolution
    }

    pub fn box_count(&self) -> u64 {
        (self.resolution as u64).pow(self.dimension as u32)
    }

    /// Side length of each box.
    pub fn side(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    /// Box diameter in the sup metric equals the side length.
    pub fn diameter_sup(&self) -> f64 {
        self.side()
    }

    pub fn box_id(&self, index: &[u32]) -> Result<BoxId> {
        if index.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: index.len(),
            });
        }
        let mut flat: u64 = 0;
        for &i in index {
            if i >= self.resolution {
                return Err(Error::InvalidParameter(format!(
                    "box index {i} out of range [0, {})",
                    self.resolution
                )));
            }
            flat = flat * self.resolution as u64 + i as u64;
        }
        Ok(BoxId(flat))
    }

    pub fn coords(&self, id: BoxId) -> Vec<u32> {
        let mut flat = id.0;
        let mut out = vec![0u32; self.dimension];
        for slot in out.iter_mut().rev() {
            *slot = (flat % self.resolution as u64) as u32;
            flat /= self.resolution as u64;
        }
        out
    }

    /// Lower corner of the box in `[0,1)^d`.
    pub fn lower_corner(&self, id: BoxId) -> Vec<f64> {
        self.coords(id)
            .iter()
            .map(|&i| i as f64 * self.side())
            .collect()
    }

    /// Center of the box.
    pub fn center(&self, id: BoxId) -> Vec<f64> {
        self.coords(id)
            .iter()
            .map(|&i| (i as f64 + 0.5) * self.side())
            .collect()
    }

    /// The box containing a torus point (coordinates in `[0,1)`).
    pub fn locate(&self, point: &[f64]) -> Result<BoxId> {
        if point.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: point.len(),
            });
        }
        let n = self.resolution as f64;
        let idx: Vec<u32> = point
            .iter()
            .map(|&x| {
                let i = (x * n).floor() as i64;
                i.clamp(0, self.resolution as i64 - 1) as u32
            })
            .collect();
        self.box_id(&idx)
    }
}
