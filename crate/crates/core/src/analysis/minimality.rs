use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::systems::{Minimality, TorusMapSystem, TorusPoint};

/// Largest box partition the probe will allocate.
pub const MAX_BOXES: u128 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEvidence {
    /// Visited boxes over total boxes.
    pub fraction: f64,
    pub visited: usize,
    pub boxes: usize,
    pub orbit_length: usize,
    pub resolution: usize,
    pub axes: Vec<usize>,
    /// The declared flag; the probe never decides minimality itself.
    pub declared: Minimality,
}

/// Fraction of the `resolution^d` boxes hit by `x, f(x), …, f^{n−1}(x)`.
pub fn minimality_probe(
    system: &TorusMapSystem,
    x: &TorusPoint,
    n: usize,
    resolution: usize,
) -> Result<DensityEvidence> {
    let axes: Vec<usize> = (0..system.dim()).collect();
    marginal_density(system, x, n, resolution, &axes)
}

/// Same count for the projection of the orbit onto the listed coordinates.
pub fn marginal_density(
    system: &TorusMapSystem,
    x: &TorusPoint,
    n: usize,
    resolution: usize,
    axes: &[usize],
) -> Result<DensityEvidence> {
    if x.dim() != system.dim() {
        return Err(Error::Dimension(format!(
            "point has {} coordinates, system has {}",
            x.dim(),
            system.dim()
        )));
    }
    if axes.is_empty() || axes.iter().any(|&a| a >= system.dim()) {
        return Err(Error::Dimension(format!("invalid axes {axes:?}")));
    }
    if resolution == 0 {
        return Err(Error::Resolution("resolution must be positive".into()));
    }
    let boxes = (resolution as u128).checked_pow(axes.len() as u32).filter(|&b| b <= MAX_BOXES).ok_or_else(|| {
        Error::Resolution(format!(
            "{resolution}^{} boxes exceeds the limit of {MAX_BOXES}",
            axes.len()
        ))
    })? as usize;
    let mut seen = vec![0u64; boxes.div_ceil(64)];
    let mut visited = 0;
    let mut p = x.coords().to_vec();
    let mut next = vec![0.0; p.len()];
    for _ in 0..n {
        let idx = axes.iter().fold(0usize, |acc, &a| {
            let b = ((p[a] * resolution as f64) as usize).min(resolution - 1);
            acc * resolution + b
        });
        let (word, bit) = (idx / 64, 1u64 << (idx % 64));
        if seen[word] & bit == 0 {
            seen[word] |= bit;
            visited += 1;
        }
        system.eval_into(&p, &mut next);
        std::mem::swap(&mut p, &mut next);
    }
    Ok(DensityEvidence {
        fraction: visited as f64 / boxes as f64,
        visited,
        boxes,
        orbit_length: n,
        resolution,
        axes: axes.to_vec(),
        declared: system.declared_minimality(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_rotation_fills_every_box() {
        let sys = TorusMapSystem::rotation(vec![(5f64.sqrt() - 1.0) / 2.0], Minimality::KnownMinimal).unwrap();
        let r = minimality_probe(&sys, &TorusPoint::new(vec![0.0]), 100_000, 1000).unwrap();
        assert_eq!(r.visited, 1000);
        assert_eq!(r.fraction, 1.0);
        assert_eq!(r.declared, Minimality::KnownMinimal);
    }

    #[test]
    fn rational_rotation_hits_four_boxes() {
        let sys = TorusMapSystem::rotation(vec![0.25], Minimality::KnownNonMinimal).unwrap();
        let r = minimality_probe(&sys, &TorusPoint::new(vec![0.0]), 4, 1000).unwrap();
        assert_eq!(r.fraction, 4.0 / 1000.0);
        let r = minimality_probe(&sys, &TorusPoint::new(vec![0.0]), 1000, 1000).unwrap();
        assert_eq!(r.visited, 4);
    }

    #[test]
    fn golden_example_marginal_stays_thin() {
        let sys = TorusMapSystem::golden_example();
        let r = marginal_density(&sys, &TorusPoint::new(vec![0.25, 0.1, 0.2]), 10_000, 1000, &[0]).unwrap();
        assert!(r.fraction < 0.05, "{r:?}");
    }

    #[test]
    fn box_guard() {
        let sys = TorusMapSystem::golden_example();
        let e = minimality_probe(&sys, &TorusPoint::new(vec![0.0; 3]), 10, 1000).unwrap_err();
        assert!(matches!(e, Error::Resolution(_)));
    }
}
