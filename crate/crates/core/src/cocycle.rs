//! Overflow-safe derivative cocycles restricted to subbundles.
//!
//! Along an orbit `x_0, x_1, …` the restriction `Df^n|_E(x_0)` is tracked in
//! the orthonormal frames of `E`: each step contributes the r×r matrix
//! `B_E(x_{k+1})ᵀ · Df(x_k) · B_E(x_k)`. For an invariant splitting this is
//! exactly the restricted map written in frame coordinates, and projecting
//! onto the target frame every step keeps a contracting bundle from being
//! swamped by rounding errors along an expanding one.
//!
//! Norms use the forward product; co-norms use the product of the inverse
//! step matrices, because `m(A) = 1/‖A⁻¹‖` and largest singular values are
//! well conditioned where smallest ones are not.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridSpec};
use crate::linalg::{
    check_orthonormal, invert, largest_singular_value, smallest_singular_value, Mat,
};
use crate::splittings::{FrameField, SplittingSpec};
use crate::systems::{TorusMapSystem, TorusPoint};

/// Matrix stored as `2^exp2 · body` with the largest column norm of `body`
/// kept in `[1, 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    body: Mat,
    exp2: i64,
}

impl ScaledMatrix {
    pub fn identity(r: usize) -> Self {
        ScaledMatrix {
            body: Mat::identity(r),
            exp2: 0,
        }
    }

    pub fn from_mat(m: Mat) -> Result<Self> {
        let mut s = ScaledMatrix { body: m, exp2: 0 };
        s.renormalize()?;
        Ok(s)
    }

    pub fn body(&self) -> &Mat {
        &self.body
    }

    /// Natural-log scale factor: the represented matrix is `exp(log_scale) · body`.
    pub fn log_scale(&self) -> f64 {
        self.exp2 as f64 * std::f64::consts::LN_2
    }

    /// `self ← step · self`.
    pub fn left_mul(&mut self, step: &Mat, tmp: &mut Mat) -> Result<()> {
        step.mul_into(&self.body, tmp);
        std::mem::swap(&mut self.body, tmp);
        self.renormalize()
    }

    /// `self ← self · step`.
    pub fn right_mul(&mut self, step: &Mat, tmp: &mut Mat) -> Result<()> {
        self.body.mul_into(step, tmp);
        std::mem::swap(&mut self.body, tmp);
        self.renormalize()
    }

    fn renormalize(&mut self) -> Result<()> {
        let mut sq: f64 = 0.0;
        for j in 0..self.body.cols() {
            sq = sq.max(self.body.col_norm_sq(j));
        }
        if !(sq.is_finite() && sq > 0.0) {
            return Err(Error::Numeric(format!("cocycle body degenerate (max column norm² = {sq:e})")));
        }
        let e = exponent_of(sq);
        let k = e.div_euclid(2);
        if k != 0 {
            self.body.scale_in_place(pow2(-k));
            self.exp2 += k;
        }
        Ok(())
    }

    pub fn log_norm(&self) -> f64 {
        self.log_scale() + largest_singular_value(&self.body).ln()
    }

    pub fn log_conorm(&self) -> f64 {
        self.log_scale() + smallest_singular_value(&self.body).ln()
    }
}

/// Binary exponent `e` with `v = m · 2^e`, `m ∈ [1, 2)`.
#[inline]
fn exponent_of(v: f64) -> i64 {
    let bits = (v.to_bits() >> 52) & 0x7ff;
    if bits == 0 {
        v.log2().floor() as i64
    } else {
        bits as i64 - 1023
    }
}

#[inline]
fn pow2(k: i64) -> f64 {
    if (-1022..=1023).contains(&k) {
        f64::from_bits(((k + 1023) as u64) << 52)
    } else {
        2f64.powi(k as i32)
    }
}

/// Which of the four restricted quantities a walk maintains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Needs {
    pub norm_e: bool,
    pub conorm_e: bool,
    pub norm_f: bool,
    pub conorm_f: bool,
}

impl Needs {
    /// What `a_n` uses: `‖·|_E‖` and `m(·|_F)`.
    pub const RATIO: Needs = Needs {
        norm_e: true,
        conorm_e: false,
        norm_f: false,
        conorm_f: true,
    };
    /// What `b_k` uses: `m(·|_E)` and `‖·|_F‖`.
    pub const INVERSE_RATIO: Needs = Needs {
        norm_e: false,
        conorm_e: true,
        norm_f: true,
        conorm_f: false,
    };
    pub const ALL: Needs = Needs {
        norm_e: true,
        conorm_e: true,
        norm_f: true,
        conorm_f: true,
    };
}

struct BundleTrack<'a> {
    field: &'a FrameField,
    frame: Mat,
    frame_next: Mat,
    pushed: Mat,
    step: Mat,
    tmp: Mat,
    fwd: Option<ScaledMatrix>,
    inv: Option<ScaledMatrix>,
}

impl<'a> BundleTrack<'a> {
    fn new(field: &'a FrameField, x: &[f64], d: usize, norm: bool, conorm: bool) -> Self {
        let r = field.rank();
        BundleTrack {
            field,
            frame: field.at(x),
            frame_next: Mat::zeros(d, r),
            pushed: Mat::zeros(d, r),
            step: Mat::zeros(r, r),
            tmp: Mat::zeros(r, r),
            fwd: norm.then(|| ScaledMatrix::identity(r)),
            inv: conorm.then(|| ScaledMatrix::identity(r)),
        }
    }

    fn active(&self) -> bool {
        self.fwd.is_some() || self.inv.is_some()
    }

    fn advance(&mut self, jac: &Mat, next: &[f64], n: usize) -> Result<()> {
        jac.mul_into(&self.frame, &mut self.pushed);
        let constant = self.field.as_constant().is_some();
        if constant {
            self.frame.tr_mul_into(&self.pushed, &mut self.step);
        } else {
            self.frame_next = self.field.at(next);
            self.frame_next.tr_mul_into(&self.pushed, &mut self.step);
        }
        let at = |e: Error| Error::NumericAtStep {
            step: n,
            message: e.to_string(),
        };
        if let Some(fwd) = self.fwd.as_mut() {
            fwd.left_mul(&self.step, &mut self.tmp).map_err(at)?;
        }
        if let Some(inv) = self.inv.as_mut() {
            let step_inv = invert(&self.step).ok_or_else(|| Error::NumericAtStep {
                step: n,
                message: "restricted step matrix is singular".into(),
            })?;
            inv.right_mul(&step_inv, &mut self.tmp).map_err(at)?;
        }
        if !constant {
            std::mem::swap(&mut self.frame, &mut self.frame_next);
        }
        Ok(())
    }

    fn log_norm(&self) -> f64 {
        self.fwd.as_ref().map_or(f64::NAN, ScaledMatrix::log_norm)
    }

    fn log_conorm(&self) -> f64 {
        self.inv.as_ref().map_or(f64::NAN, |m| -m.log_norm())
    }
}

/// Step-by-step walk of the restricted cocycle along the orbit of `x`.
pub struct CocycleWalker<'a> {
    system: &'a TorusMapSystem,
    x: Vec<f64>,
    next: Vec<f64>,
    jac: Mat,
    n: usize,
    e: BundleTrack<'a>,
    f: BundleTrack<'a>,
}

impl<'a> CocycleWalker<'a> {
    pub fn new(
        system: &'a TorusMapSystem,
        splitting: &'a SplittingSpec,
        x: &[f64],
        needs: Needs,
    ) -> Result<Self> {
        let d = system.dim();
        if splitting.dim() != d || x.len() != d {
            return Err(Error::Dimension(format!(
                "system has dimension {d}, splitting {}, point {}",
                splitting.dim(),
                x.len()
            )));
        }
        Ok(CocycleWalker {
            system,
            x: x.to_vec(),
            next: vec![0.0; d],
            jac: Mat::zeros(d, d),
            n: 0,
            e: BundleTrack::new(&splitting.basis_e, x, d, needs.norm_e, needs.conorm_e),
            f: BundleTrack::new(&splitting.basis_f, x, d, needs.norm_f, needs.conorm_f),
        })
    }

    #[inline]
    pub fn step(&mut self) -> Result<()> {
        self.system.jacobian_into(&self.x, &mut self.jac);
        self.system.eval_into(&self.x, &mut self.next);
        if self.e.active() {
            self.e.advance(&self.jac, &self.next, self.n)?;
        }
        if self.f.active() {
            self.f.advance(&self.jac, &self.next, self.n)?;
        }
        std::mem::swap(&mut self.x, &mut self.next);
        self.n += 1;
        Ok(())
    }

    pub fn advance(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }

    /// Number of steps taken so far.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Current orbit point `f^n(x)`.
    pub fn point(&self) -> &[f64] {
        &self.x
    }

    pub fn log_norm_e(&self) -> f64 {
        self.e.log_norm()
    }

    pub fn log_conorm_e(&self) -> f64 {
        self.e.log_conorm()
    }

    pub fn log_norm_f(&self) -> f64 {
        self.f.log_norm()
    }

    pub fn log_conorm_f(&self) -> f64 {
        self.f.log_conorm()
    }

    /// `a_n(x) = ln ‖Df^n|_E‖ − ln m(Df^n|_F)`.
    #[inline]
    pub fn a(&self) -> f64 {
        self.e.log_norm() - self.f.log_conorm()
    }

    /// `b_n(x) = ln ‖(Df^n|_E)⁻¹‖ − ln m((Df^n|_F)⁻¹) = −ln m(Df^n|_E) + ln ‖Df^n|_F‖`.
    pub fn b(&self) -> f64 {
        -self.e.log_conorm() + self.f.log_norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestrictedNormPair {
    pub log_norm_e: f64,
    pub log_conorm_f: f64,
    pub n: usize,
    pub x: TorusPoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubadditiveSequenceSample {
    /// `a_1(x), …, a_{n_max}(x)`.
    pub a_values: Vec<f64>,
    /// `b_1(x), …, b_{n_max}(x)`.
    pub b_values: Vec<f64>,
    pub x: TorusPoint,
}

fn check_square_finite(a: &Mat, basis: &Mat) -> Result<()> {
    if !a.is_finite() {
        return Err(Error::Numeric("non-finite matrix entry".into()));
    }
    if a.cols() != basis.rows() {
        return Err(Error::Dimension(format!(
            "matrix has {} columns, basis has {} rows",
            a.cols(),
            basis.rows()
        )));
    }
    check_orthonormal(basis)
}

/// `‖A|_V‖` for `V` the span of an orthonormal basis: the largest singular
/// value of `A·basis`.
pub fn restricted_norm(a: &Mat, basis: &Mat) -> Result<f64> {
    check_square_finite(a, basis)?;
    Ok(largest_singular_value(&a.mul(basis)))
}

/// `m(A|_V)`: the smallest singular value of `A·basis`.
pub fn restricted_conorm(a: &Mat, basis: &Mat) -> Result<f64> {
    check_square_finite(a, basis)?;
    let s = smallest_singular_value(&a.mul(basis));
    if s < 1e-300 {
        return Err(Error::SingularRestriction(s));
    }
    Ok(s)
}

pub fn cocycle_restricted(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    x: &TorusPoint,
    n: usize,
) -> Result<RestrictedNormPair> {
    let mut w = CocycleWalker::new(system, splitting, x.coords(), Needs::RATIO)?;
    w.advance(n)?;
    Ok(RestrictedNormPair {
        log_norm_e: w.log_norm_e(),
        log_conorm_f: w.log_conorm_f(),
        n,
        x: x.clone(),
    })
}

pub fn a_n(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    x: &TorusPoint,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "a_n needs n ≥ 1"));
    }
    let p = cocycle_restricted(system, splitting, x, n)?;
    Ok(p.log_norm_e - p.log_conorm_f)
}

pub fn b_k(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    x: &TorusPoint,
    k: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::param("k", "b_k needs k ≥ 1"));
    }
    let mut w = CocycleWalker::new(system, splitting, x.coords(), Needs::INVERSE_RATIO)?;
    w.advance(k)?;
    Ok(w.b())
}

/// `a_1 … a_{n_max}` and `b_1 … b_{n_max}` from one walk.
pub fn subadditive_sample(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    x: &TorusPoint,
    n_max: usize,
) -> Result<SubadditiveSequenceSample> {
    let mut w = CocycleWalker::new(system, splitting, x.coords(), Needs::ALL)?;
    let mut a_values = Vec::with_capacity(n_max);
    let mut b_values = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        w.step()?;
        a_values.push(w.a());
        b_values.push(w.b());
    }
    Ok(SubadditiveSequenceSample {
        a_values,
        b_values,
        x: x.clone(),
    })
}

/// `a_1(x), …, a_{n_max}(x)` from one walk.
pub fn a_trace(
    system: &TorusMapSystem,
    splitting: &SplittingSpec,
    x: &TorusPoint,
    n_max: usize,
) -> Result<Vec<f64>> {
    let mut w = CocycleWalker::new(system, splitting, x.coords(), Needs::RATIO)?;
    let mut out = Vec::with_capacity(n_max);
    for _ in 0..n_max {
        w.step()?;
        out.push(w.a());
    }
    Ok(out)
}

/// Grid estimate of `C = sup_x max(‖Df(x)‖, ‖Df(x)⁻¹‖)`. A lower bound for
/// the true supremum; see [`TorusMapSystem::derivative_sup`] for the closed
/// form.
pub fn sandwich_constant(system: &TorusMapSystem, grid: &GridSpec) -> Result<f64> {
    let g = Grid::new(system, grid)?;
    let values = crate::par::map_collect(g.len(), |i| {
        let p = g.point(i);
        let j = system.jacobian(&p);
        let ji = system.jacobian_inverse(&p);
        largest_singular_value(&j).max(largest_singular_value(&ji))
    });
    let c = values.into_iter().fold(f64::NEG_INFINITY, f64::max);
    if !c.is_finite() {
        return Err(Error::Numeric("non-finite derivative norm on grid".into()));
    }
    Ok(c)
}
