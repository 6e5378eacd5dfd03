//! Candidate splittings `TM = E ⊕ F` and checks of their invariance.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};
use crate::linalg::{check_orthonormal, orthonormalize, singular_values, Mat};
use crate::systems::{FactorKind, TorusMapSystem, TorusPoint};

/// Principal-angle tolerance (radians) for an "invariant" verdict.
pub const INVARIANCE_TOL: f64 = 1e-8;

/// Minimum angle between `E` and `F` for the sum to count as direct.
pub const TRANSVERSALITY_TOL: f64 = 1e-6;

pub type FrameFn = dyn Fn(&[f64]) -> Mat + Send + Sync;

/// Orthonormal frame assigned to each point of the torus.
#[derive(Clone)]
pub enum FrameField {
    Constant(Mat),
    Fiberwise { rank: usize, frame: Arc<FrameFn> },
}

impl fmt::Debug for FrameField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FrameField::Constant(m) => f.debug_tuple("Constant").field(m).finish(),
            FrameField::Fiberwise { rank, .. } => {
                f.debug_struct("Fiberwise").field("rank", rank).finish_non_exhaustive()
            }
        }
    }
}

impl FrameField {
    pub fn rank(&self) -> usize {
        match self {
            FrameField::Constant(m) => m.cols(),
            FrameField::Fiberwise { rank, .. } => *rank,
        }
    }

    pub fn at(&self, x: &[f64]) -> Mat {
        match self {
            FrameField::Constant(m) => m.clone(),
            FrameField::Fiberwise { frame, .. } => frame(x),
        }
    }

    pub fn as_constant(&self) -> Option<&Mat> {
        match self {
            FrameField::Constant(m) => Some(m),
            FrameField::Fiberwise { .. } => None,
        }
    }
}

/// One piece of a splitting declaration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Selector {
    /// Every axis of a factor.
    Factor(String),
    /// Listed local axes of a factor.
    Axes(String, Vec<usize>),
    /// Stable eigendirection of a hyperbolic 2×2 toral factor.
    Stable(String),
    /// Unstable eigendirection of a hyperbolic 2×2 toral factor.
    Unstable(String),
    /// Explicit constant vectors in ambient coordinates.
    Span(Vec<Vec<f64>>),
}

#[derive(Debug, Clone)]
pub struct SplittingSpec {
    pub label: String,
    pub basis_e: FrameField,
    pub basis_f: FrameField,
    dim: usize,
}

impl SplittingSpec {
    /// Splitting with constant frames. Frames must be orthonormal and the
    /// sum must be direct and nontrivial.
    pub fn constant(label: impl Into<String>, e: Mat, f: Mat) -> Result<Self> {
        if e.rows() != f.rows() {
            return Err(Error::Dimension("E and F frames live in different dimensions".into()));
        }
        let d = e.rows();
        if e.cols() == 0 || f.cols() == 0 {
            return Err(Error::Dimension("splitting is trivial: dim E · dim F = 0".into()));
        }
        if e.cols() + f.cols() != d {
            return Err(Error::Dimension(format!(
                "dim E + dim F = {} + {} but the torus has dimension {d}",
                e.cols(),
                f.cols()
            )));
        }
        check_orthonormal(&e)?;
        check_orthonormal(&f)?;
        let angle = min_angle_between(&e, &f);
        if angle < TRANSVERSALITY_TOL {
            return Err(Error::InvalidBasis(format!(
                "E and F are not transverse (smallest angle {angle:e})"
            )));
        }
        Ok(SplittingSpec {
            label: label.into(),
            basis_e: FrameField::Constant(e),
            basis_f: FrameField::Constant(f),
            dim: d,
        })
    }

    /// Splitting with point-dependent frames supplied by the caller. Only the
    /// ranks are checked here; use [`continuity_evidence`] and
    /// [`check_invariance`] for the rest.
    pub fn fiberwise(
        label: impl Into<String>,
        dim: usize,
        rank_e: usize,
        frame_e: Arc<FrameFn>,
        frame_f: Arc<FrameFn>,
    ) -> Result<Self> {
        if rank_e == 0 || rank_e >= dim {
            return Err(Error::Dimension("splitting is trivial: dim E · dim F = 0".into()));
        }
        Ok(SplittingSpec {
            label: label.into(),
            basis_e: FrameField::Fiberwise {
                rank: rank_e,
                frame: frame_e,
            },
            basis_f: FrameField::Fiberwise {
                rank: dim - rank_e,
                frame: frame_f,
            },
            dim,
        })
    }

    /// Builds constant frames from selectors over the factors of `system`.
    pub fn from_selectors(
        label: impl Into<String>,
        system: &TorusMapSystem,
        e: &[Selector],
        f: &[Selector],
    ) -> Result<Self> {
        let e = selector_frame(system, e)?;
        let f = selector_frame(system, f)?;
        Self::constant(label, e, f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dim_e(&self) -> usize {
        self.basis_e.rank()
    }

    pub fn dim_f(&self) -> usize {
        self.basis_f.rank()
    }

    pub fn is_constant(&self) -> bool {
        self.basis_e.as_constant().is_some() && self.basis_f.as_constant().is_some()
    }
}

fn factor_of<'a>(system: &'a TorusMapSystem, name: &str) -> Result<&'a crate::systems::Factor> {
    if let Some(i) = system.factor_index(name) {
        return Ok(&system.factors()[i]);
    }
    // Fall back to a kind name when it is unambiguous.
    let mut hits = system.factors().iter().filter(|f| f.kind.kind_name() == name);
    match (hits.next(), hits.next()) {
        (Some(f), None) => Ok(f),
        (Some(_), Some(_)) => Err(Error::Dimension(format!(
            "`{name}` matches several factors; use a label"
        ))),
        _ => Err(Error::Dimension(format!("no factor named `{name}`"))),
    }
}

fn selector_vectors(system: &TorusMapSystem, sel: &Selector) -> Result<Vec<Vec<f64>>> {
    let d = system.dim();
    let unit = |i: usize| {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        v
    };
    match sel {
        Selector::Factor(name) => {
            let f = factor_of(system, name)?;
            Ok((0..f.kind.dim()).map(|i| unit(f.offset + i)).collect())
        }
        Selector::Axes(name, axes) => {
            let f = factor_of(system, name)?;
            axes.iter()
                .map(|&a| {
                    if a >= f.kind.dim() {
                        Err(Error::Dimension(format!(
                            "factor `{}` has no axis {a}",
                            f.label
                        )))
                    } else {
                        Ok(unit(f.offset + a))
                    }
                })
                .collect()
        }
        Selector::Stable(name) | Selector::Unstable(name) => {
            let f = factor_of(system, name)?;
            let FactorKind::Toral(t) = &f.kind else {
                return Err(Error::Dimension(format!(
                    "`{}` is not a toral automorphism",
                    f.label
                )));
            };
            let e = t.eigen_data().ok_or_else(|| {
                Error::Dimension(format!(
                    "`{}` has no stable/unstable eigendata (needs a hyperbolic 2×2 matrix)",
                    f.label
                ))
            })?;
            let w = if matches!(sel, Selector::Stable(_)) {
                e.stable_vector
            } else {
                e.unstable_vector
            };
            let mut v = vec![0.0; d];
            v[f.offset] = w[0];
            v[f.offset + 1] = w[1];
            Ok(vec![v])
        }
        Selector::Span(vs) => {
            for v in vs {
                if v.len() != d {
                    return Err(Error::Dimension(format!(
                        "span vector has {} entries, torus has dimension {d}",
                        v.len()
                    )));
                }
            }
            Ok(vs.clone())
        }
    }
}

fn selector_frame(system: &TorusMapSystem, sels: &[Selector]) -> Result<Mat> {
    let mut cols = Vec::new();
    for s in sels {
        cols.extend(selector_vectors(system, s)?);
    }
    if cols.is_empty() {
        return Err(Error::Dimension("empty subbundle".into()));
    }
    orthonormalize(&Mat::from_cols(&cols))
        .ok_or_else(|| Error::InvalidBasis("selected vectors are linearly dependent".into()))
}

/// Principal angles between equal-rank orthonormal frames, ascending.
///
/// Small angles come from the sines (singular values of `V − U·UᵀV`) and
/// large ones from the cosines (singular values of `UᵀV`), which keeps both
/// ends accurate.
pub fn principal_angles(u: &Mat, v: &Mat) -> Result<Vec<f64>> {
    if u.rows() != v.rows() || u.cols() != v.cols() {
        return Err(Error::Dimension(format!(
            "frames have shapes {}x{} and {}x{}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    let r = u.cols();
    let utv = u.tr_mul(v);
    // cosines descending ⇒ angles ascending
    let cosines = singular_values(&utv);
    let residual = v.sub(&u.mul(&utv));
    let mut sines = singular_values(&residual);
    sines.reverse();
    Ok((0..r)
        .map(|i| {
            let c = cosines[i].clamp(0.0, 1.0);
            let s = sines[i].clamp(0.0, 1.0);
            if c * c >= 0.5 {
                s.asin()
            } else {
                c.acos()
            }
            .clamp(0.0, FRAC_PI_2)
        })
        .collect())
}

/// Smallest angle between two subspaces of possibly different rank.
pub fn min_angle_between(u: &Mat, v: &Mat) -> f64 {
    let (small, big) = if u.cols() <= v.cols() { (u, v) } else { (v, u) };
    let cos_max = singular_values(&big.tr_mul(small))[0].clamp(0.0, 1.0);
    if cos_max * cos_max >= 0.5 {
        let residual = small.sub(&big.mul(&big.tr_mul(small)));
        let sines = singular_values(&residual);
        sines.last().copied().unwrap_or(0.0).clamp(0.0, 1.0).asin()
    } else {
        cos_max.acos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub max_principal_angle_defect: f64,
    pub worst_point: TorusPoint,
    pub worst_bundle: Bundle,
    pub invariant: bool,
    /// Grid points whose defect was computed; see the sweep reduction.
    pub points_evaluated: usize,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bundle {
    E,
    F,
}

fn pushed_defect(field: &FrameField, x: &[f64], fx: &[f64], jac: &Mat) -> Result<f64> {
    let b = field.at(x);
    let pushed = jac.mul(&b);
    let q = orthonormalize(&pushed).ok_or_else(|| {
        Error::Numeric(format!("pushed frame degenerate at {x:?}"))
    })?;
    let target = field.at(fx);
    let angles = principal_angles(&q, &target)?;
    Ok(angles.last().copied().unwrap_or(0.0))
}

/// Largest principal angle between `Df(x)·E(x)` and `E(f(x))` (and the same
/// for `F`) over the grid.
pub fn check_invariance(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    grid: &GridSpec,
) -> Result<InvarianceReport> {
    if splitting.dim() != system.dim() {
        return Err(Error::Dimension("splitting and system dimensions differ".into()));
    }
    // constant frames: the defect only depends on the Jacobian
    let g = crate::sweep::Sweep::new(system, splitting, grid)?;
    let d = system.dim();
    let eval = |i: usize| -> Result<(f64, Bundle)> {
        let mut x = vec![0.0; d];
        let mut fx = vec![0.0; d];
        let mut jac = Mat::zeros(d, d);
        g.point_into(i, &mut x);
        system.eval_into(&x, &mut fx);
        system.jacobian_into(&x, &mut jac);
        let de = pushed_defect(&splitting.basis_e, &x, &fx, &jac)?;
        let df = pushed_defect(&splitting.basis_f, &x, &fx, &jac)?;
        Ok(if df > de { (df, Bundle::F) } else { (de, Bundle::E) })
    };
    let (idx, defect, bundle) = crate::par::try_argmax(g.classes(), eval)?;
    Ok(InvarianceReport {
        max_principal_angle_defect: defect,
        worst_point: g.point(idx),
        worst_bundle: bundle,
        invariant: defect <= INVARIANCE_TOL,
        points_evaluated: g.classes(),
        grid: grid.clone(),
    })
}

/// How continuity of the splitting is supported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ContinuityEvidence {
    /// Constant frames: continuous by construction.
    Structural,
    /// Largest observed `angle(E(x), E(y)) / |x − y|` between grid
    /// neighbours. Evidence only.
    SampledLipschitz { estimate: f64 },
}

pub fn continuity_evidence(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    grid: &GridSpec,
) -> Result<ContinuityEvidence> {
    if splitting.is_constant() {
        return Ok(ContinuityEvidence::Structural);
    }
    let g = Grid::new(system, grid)?;
    let d = system.dim();
    let mut worst: f64 = 0.0;
    let mut x = vec![0.0; d];
    for i in 0..g.len() {
        g.point_into(i, &mut x);
        for k in 0..d {
            let h = 1.0 / g.axes()[k].max(1) as f64;
            let mut y = x.clone();
            y[k] = crate::systems::wrap(y[k] + h);
            for field in [&splitting.basis_e, &splitting.basis_f] {
                let a = principal_angles(&field.at(&x), &field.at(&y))?;
                worst = worst.max(a.last().copied().unwrap_or(0.0) / h);
            }
        }
    }
    Ok(ContinuityEvidence::SampledLipschitz { estimate: worst })
}

/// The three splittings of `g × cat` discussed for the golden example,
/// in order: `E₁⊕E₂ | E₃`, `E₂ | E₁⊕E₃`, `E₁ | E₂⊕E₃`.
pub fn golden_example_splittings(system: &TorusMapSystem) -> Result<Vec<SplittingSpec>> {
    use Selector::*;
    let g = || Factor("g".into());
    Ok(vec![
        SplittingSpec::from_selectors("E1+E2 | E3", system, &[g(), Stable("h".into())], &[Unstable("h".into())])?,
        SplittingSpec::from_selectors("E2 | E1+E3", system, &[Stable("h".into())], &[g(), Unstable("h".into())])?,
        SplittingSpec::from_selectors("E1 | E2+E3", system, &[g()], &[Stable("h".into()), Unstable("h".into())])?,
    ])
}

/// Stable/unstable splitting of a single hyperbolic toral factor.
pub fn stable_unstable(system: &TorusMapSystem, factor: &str) -> Result<SplittingSpec> {
    SplittingSpec::from_selectors(
        "stable | unstable",
        system,
        &[Selector::Stable(factor.into())],
        &[Selector::Unstable(factor.into())],
    )
}

/// First `k` coordinate axes against the rest.
pub fn coordinate_split(system: &TorusMapSystem, k: usize) -> Result<SplittingSpec> {
    let d = system.dim();
    let id = Mat::identity(d);
    let e = Mat::from_cols(&(0..k).map(|j| id.col(j)).collect::<Vec<_>>());
    let f = Mat::from_cols(&(k..d).map(|j| id.col(j)).collect::<Vec<_>>());
    SplittingSpec::constant(format!("axes 0..{k} | axes {k}..{d}"), e, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::Minimality;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6, PI};

    #[test]
    fn principal_angle_examples() {
        let u = Mat::from_cols(&[vec![1.0, 0.0]]);
        assert_eq!(principal_angles(&u, &u).unwrap(), vec![0.0]);
        let v = Mat::from_cols(&[vec![0.0, 1.0]]);
        assert_relative_eq!(principal_angles(&u, &v).unwrap()[0], FRAC_PI_2, epsilon = 1e-15);
        let w = Mat::from_cols(&[vec![FRAC_PI_6.cos(), FRAC_PI_6.sin()]]);
        assert_relative_eq!(principal_angles(&u, &w).unwrap()[0], PI / 6.0, epsilon = 1e-12);
        let two = Mat::identity(2);
        assert!(matches!(principal_angles(&u, &two), Err(Error::Dimension(_))));
    }

    #[test]
    fn tiny_angles_are_resolved() {
        let t: f64 = 1e-11;
        let u = Mat::from_cols(&[vec![1.0, 0.0, 0.0]]);
        let v = Mat::from_cols(&[vec![t.cos(), t.sin(), 0.0]]);
        assert_relative_eq!(principal_angles(&u, &v).unwrap()[0], t, max_relative = 1e-6);
    }

    #[test]
    fn trivial_and_degenerate_splittings_rejected() {
        let sys = TorusMapSystem::golden_example();
        let id = Mat::identity(3);
        assert!(SplittingSpec::constant("bad", id.clone(), Mat::zeros(3, 0)).is_err());
        let e = Mat::from_cols(&[vec![1.0, 0.0, 0.0]]);
        let f = Mat::from_cols(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]);
        assert!(SplittingSpec::constant("overlap", e, f).is_err());
        let err = SplittingSpec::from_selectors(
            "x",
            &sys,
            &[Selector::Stable("g".into())],
            &[Selector::Factor("h".into())],
        );
        assert!(err.is_err());
    }

    #[test]
    fn golden_splittings_are_invariant() {
        let sys = TorusMapSystem::golden_example();
        for s in golden_example_splittings(&sys).unwrap() {
            let r = check_invariance(&sys, &s, &GridSpec::uniform(16, 8)).unwrap();
            assert!(r.max_principal_angle_defect <= 1e-9, "{}: {r:?}", s.label);
            assert!(r.invariant);
            assert_eq!(
                continuity_evidence(&sys, &s, &GridSpec::uniform(4, 4)).unwrap(),
                ContinuityEvidence::Structural
            );
        }
    }

    #[test]
    fn rotation_coordinate_split_has_zero_defect() {
        let sys = TorusMapSystem::rotation(vec![0.3, 0.7], Minimality::Unknown).unwrap();
        let s = coordinate_split(&sys, 1).unwrap();
        let r = check_invariance(&sys, &s, &GridSpec::uniform(16, 8)).unwrap();
        assert_eq!(r.max_principal_angle_defect, 0.0);
    }

    #[test]
    fn slanted_plane_is_not_invariant() {
        let sys = TorusMapSystem::golden_example();
        let r2 = std::f64::consts::FRAC_1_SQRT_2;
        let s = SplittingSpec::from_selectors(
            "slanted",
            &sys,
            &[Selector::Span(vec![vec![1.0, 0.0, 0.0], vec![0.0, r2, r2]])],
            &[Selector::Span(vec![vec![0.0, r2, -r2]])],
        )
        .unwrap();
        let r = check_invariance(&sys, &s, &GridSpec::uniform(8, 4)).unwrap();
        // E: span{e1, (0,1,1)} maps to span{e1, (0,3,2)}, defect acos(5/√26).
        // F: (0,1,−1) maps to (0,1,0), defect π/4, which dominates.
        assert!((5.0 / 26f64.sqrt()).acos() < FRAC_PI_4);
        assert_relative_eq!(r.max_principal_angle_defect, FRAC_PI_4, epsilon = 1e-12);
        assert_eq!(r.worst_bundle, Bundle::F);
        assert!(!r.invariant);
    }

    #[test]
    fn fiberwise_frames_get_lipschitz_estimate() {
        let sys = TorusMapSystem::rotation(vec![0.1, 0.2], Minimality::Unknown).unwrap();
        let rot = |x: &[f64]| {
            let t = 2.0 * PI * x[0];
            (t.cos(), t.sin())
        };
        let s = SplittingSpec::fiberwise(
            "turning",
            2,
            1,
            Arc::new(move |x: &[f64]| {
                let (c, s) = rot(x);
                Mat::from_cols(&[vec![c, s]])
            }),
            Arc::new(move |x: &[f64]| {
                let (c, s) = rot(x);
                Mat::from_cols(&[vec![-s, c]])
            }),
        )
        .unwrap();
        match continuity_evidence(&sys, &s, &GridSpec::uniform(64, 8)).unwrap() {
            ContinuityEvidence::SampledLipschitz { estimate } => {
                // angle changes by 2π·h per step h
                assert_relative_eq!(estimate, 2.0 * PI, max_relative = 1e-6);
            }
            other => panic!("{other:?}"),
        }
    }
}
