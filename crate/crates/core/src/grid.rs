//! Uniform lattices on `T^d` used to evaluate "for all x" statements.
//!
//! A grid is evidence, not proof: reports built on it say either
//! "violation found" or "no violation on grid".

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::{FactorKind, TorusMapSystem, TorusPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per axis for circle maps and rotations.
    pub circle: usize,
    /// Points per axis for toral automorphism factors.
    pub toral: usize,
    /// Points appended after the lattice, in the given order.
    #[serde(default)]
    pub extra: Vec<Vec<f64>>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            circle: 256,
            toral: 64,
            extra: Vec::new(),
        }
    }
}

impl GridSpec {
    pub fn uniform(circle: usize, toral: usize) -> Self {
        GridSpec {
            circle,
            toral,
            extra: Vec::new(),
        }
    }
}

/// Lattice points indexed in lexicographic order (first coordinate slowest),
/// followed by any extra points.
#[derive(Debug, Clone)]
pub struct Grid {
    axes: Vec<usize>,
    lattice_len: usize,
    extra: Vec<TorusPoint>,
}

impl Grid {
    pub fn new(system: &TorusMapSystem, spec: &GridSpec) -> Result<Self> {
        let mut axes = Vec::with_capacity(system.dim());
        for f in system.factors() {
            let n = match f.kind {
                FactorKind::Toral(_) => spec.toral,
                _ => spec.circle,
            };
            axes.extend(std::iter::repeat_n(n, f.kind.dim()));
        }
        if axes.contains(&0) && spec.extra.is_empty() {
            return Err(Error::param("grid", "grid is empty"));
        }
        let lattice_len = if axes.contains(&0) {
            0
        } else {
            axes.iter().try_fold(1usize, |acc, &n| acc.checked_mul(n)).ok_or_else(|| {
                Error::Resolution("grid point count overflows".into())
            })?
        };
        let mut extra = Vec::with_capacity(spec.extra.len());
        for p in &spec.extra {
            if p.len() != system.dim() {
                return Err(Error::Dimension(format!(
                    "extra grid point has {} coordinates, system has {}",
                    p.len(),
                    system.dim()
                )));
            }
            extra.push(TorusPoint::new(p.clone()));
        }
        Ok(Grid {
            axes,
            lattice_len,
            extra,
        })
    }

    pub fn len(&self) -> usize {
        self.lattice_len + self.extra.len()
    }

    /// Number of lattice points, excluding extras.
    pub fn lattice_len(&self) -> usize {
        self.lattice_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn point_into(&self, index: usize, out: &mut [f64]) {
        if index >= self.lattice_len {
            out.copy_from_slice(self.extra[index - self.lattice_len].coords());
            return;
        }
        let mut rem = index;
        for k in (0..self.axes.len()).rev() {
            let n = self.axes[k];
            out[k] = (rem % n) as f64 / n as f64;
            rem /= n;
        }
    }

    pub fn point(&self, index: usize) -> TorusPoint {
        let mut c = vec![0.0; self.dim()];
        self.point_into(index, &mut c);
        TorusPoint::new(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicographic_order_and_extras() {
        let sys = TorusMapSystem::golden_example();
        let spec = GridSpec {
            circle: 4,
            toral: 2,
            extra: vec![vec![0.5, 0.1, 0.2]],
        };
        let g = Grid::new(&sys, &spec).unwrap();
        assert_eq!(g.len(), 4 * 2 * 2 + 1);
        assert_eq!(g.point(0).coords(), &[0.0, 0.0, 0.0]);
        assert_eq!(g.point(1).coords(), &[0.0, 0.0, 0.5]);
        assert_eq!(g.point(4).coords(), &[0.25, 0.0, 0.0]);
        assert_eq!(g.point(16).coords(), &[0.5, 0.1, 0.2]);
        let pts: Vec<_> = (0..16).map(|i| g.point(i).coords().to_vec()).collect();
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_grid_rejected() {
        let sys = TorusMapSystem::cat_map();
        assert!(Grid::new(&sys, &GridSpec::uniform(8, 0)).is_err());
    }
}
