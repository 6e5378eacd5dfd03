//! Grid sweeps that skip redundant orbits.
//!
//! Toral automorphisms and rotations have constant derivatives, so for a
//! splitting with constant frames the whole cocycle along the orbit of `x`
//! depends only on the circle-map coordinates of `x`. Grid points that agree
//! there form one class and need one walk. The class representative is the
//! lexicographically smallest member, and representatives increase with the
//! class index, so "first grid point" and "first class" coincide.

use crate::error::Result;
use crate::grid::{Grid, GridSpec};
use crate::splittings::SplittingSpec;
use crate::systems::{FactorKind, TorusMapSystem, TorusPoint};

#[derive(Debug, Clone)]
pub(crate) struct Sweep {
    grid: Grid,
    dependent: Vec<bool>,
    lattice_classes: usize,
}

impl Sweep {
    pub(crate) fn new(system: &TorusMapSystem, splitting: &SplittingSpec, spec: &GridSpec) -> Result<Self> {
        Self::build(system, spec, splitting.is_constant())
    }

    /// Sweep that visits every grid point.
    #[cfg(test)]
    pub(crate) fn exhaustive(system: &TorusMapSystem, spec: &GridSpec) -> Result<Self> {
        Self::build(system, spec, false)
    }

    fn build(system: &TorusMapSystem, spec: &GridSpec, reduce: bool) -> Result<Self> {
        let grid = Grid::new(system, spec)?;
        let mut dependent = Vec::with_capacity(system.dim());
        for f in system.factors() {
            let varies = !reduce || matches!(f.kind, FactorKind::Circle(_));
            dependent.extend(std::iter::repeat_n(varies, f.kind.dim()));
        }
        let lattice_classes = if grid.lattice_len() == 0 {
            0
        } else {
            grid.axes()
                .iter()
                .zip(&dependent)
                .filter(|(_, &d)| d)
                .map(|(&n, _)| n)
                .product()
        };
        Ok(Sweep {
            grid,
            dependent,
            lattice_classes,
        })
    }

    pub(crate) fn classes(&self) -> usize {
        self.lattice_classes + (self.grid.len() - self.grid.lattice_len())
    }

    pub(crate) fn grid_points(&self) -> usize {
        self.grid.len()
    }

    pub(crate) fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Grid index of the smallest member of `class`.
    pub(crate) fn representative(&self, class: usize) -> usize {
        if class >= self.lattice_classes {
            return self.grid.lattice_len() + (class - self.lattice_classes);
        }
        let axes = self.grid.axes();
        let mut digits = vec![0usize; axes.len()];
        let mut rem = class;
        for k in (0..axes.len()).rev() {
            if self.dependent[k] {
                digits[k] = rem % axes[k];
                rem /= axes[k];
            }
        }
        digits.iter().zip(axes).fold(0, |acc, (&d, &n)| acc * n + d)
    }

    pub(crate) fn point_into(&self, class: usize, out: &mut [f64]) {
        self.grid.point_into(self.representative(class), out);
    }

    pub(crate) fn point(&self, class: usize) -> TorusPoint {
        self.grid.point(self.representative(class))
    }
}
