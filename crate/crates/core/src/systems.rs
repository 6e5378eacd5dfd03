//! Torus maps with exact Jacobians: the circle map `g`, toral automorphisms,
//! rotations, and their products.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::linalg::{invert, largest_singular_value, Mat};

/// Reduces a coordinate into `[0, 1)`. An exact `1.0` maps to `0.0`.
#[inline]
pub fn wrap(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint(Vec<f64>);

impl TorusPoint {
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        let mut c: Vec<f64> = coords.into();
        c.iter_mut().for_each(|v| *v = wrap(*v));
        TorusPoint(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<&[f64]> for TorusPoint {
    fn from(c: &[f64]) -> Self {
        TorusPoint::new(c.to_vec())
    }
}

/// `(3 − √5)/2`, the contracting eigenvalue of the cat map.
pub fn golden_contraction() -> f64 {
    (3.0 - 5f64.sqrt()) / 2.0
}

/// `(3 + √5)/2`, the expanding eigenvalue of the cat map.
pub fn golden_expansion() -> f64 {
    (3.0 + 5f64.sqrt()) / 2.0
}

pub const DEFAULT_TABLE_RESOLUTION: usize = 1 << 16;

const BUMP_EXPONENT_RANGE: (f64, f64) = (0.5, 64.0);
const BUMP_INTEGRAL_TOL: f64 = 1e-12;

/// `∫₀¹ sin^{2p}(πt) dt = Γ(p + ½) / (√π Γ(p + 1))`.
fn sine_power_mean(p: f64) -> f64 {
    (ln_gamma(p + 0.5) - ln_gamma(p + 1.0) - 0.5 * PI.ln()).exp()
}

/// Increasing circle diffeomorphism fixing 0 and 1/2 with
/// `g'(x) = alpha + (beta − alpha)·sin^{2p}(πx)`.
///
/// `g` itself is tabulated on `[0, 1/2]` by cumulative Simpson sums and
/// evaluated with cubic Hermite interpolation using the exact derivative at
/// the nodes; the right half is the mirror image `g(x) = 1 − g(1 − x)`.
/// The table is rescaled so that `g(1/2) = 1/2` exactly, which keeps the
/// repelling fixed point exact in floating point.
///
/// The profile is `C^⌊2p⌋` at the integer points (C^∞ when `2p` is an even
/// integer).
#[derive(Debug, Clone)]
pub struct CircleMapG {
    alpha: f64,
    beta: f64,
    p: f64,
    resolution: usize,
    half_table: Vec<f64>,
}

impl CircleMapG {
    /// The circle map with `g'(0) = (3−√5)/2` and `g'(1/2) = (3+√5)/2`.
    pub fn golden() -> Self {
        Self::build(golden_contraction(), golden_expansion(), DEFAULT_TABLE_RESOLUTION)
            .expect("golden constants are feasible")
    }

    pub fn build(alpha: f64, beta: f64, table_resolution: usize) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::InfeasibleProfile("non-finite derivative bounds".into()));
        }
        if !(alpha > 0.0 && alpha < 1.0 && beta > 1.0) {
            return Err(Error::InfeasibleProfile(format!(
                "need 0 < alpha < 1 < beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        if table_resolution < 4 || !table_resolution.is_multiple_of(2) {
            return Err(Error::InfeasibleProfile(format!(
                "table resolution must be even and at least 4, got {table_resolution}"
            )));
        }
        let target = (1.0 - alpha) / (beta - alpha);
        if !(target > 0.0 && target < 1.0) {
            return Err(Error::InfeasibleProfile(format!(
                "target mean {target} outside (0, 1)"
            )));
        }
        let p = solve_bump_exponent(target)?;

        let mut g = CircleMapG {
            alpha,
            beta,
            p,
            resolution: table_resolution,
            half_table: Vec::new(),
        };
        let half = table_resolution / 2;
        let h = 1.0 / table_resolution as f64;
        let mut table = Vec::with_capacity(half + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for i in 0..half {
            let x0 = i as f64 * h;
            let x1 = (i + 1) as f64 * h;
            acc += h / 6.0 * (g.derivative(x0) + 4.0 * g.derivative(0.5 * (x0 + x1)) + g.derivative(x1));
            table.push(acc);
        }
        let scale = 0.5 / acc;
        table.iter_mut().for_each(|v| *v *= scale);
        table[half] = 0.5;
        g.half_table = table;
        Ok(g)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn bump_exponent(&self) -> f64 {
        self.p
    }

    pub fn table_resolution(&self) -> usize {
        self.resolution
    }

    /// Node values of `g` on `[0, 1/2]` at spacing `1/resolution`.
    pub fn half_table(&self) -> &[f64] {
        &self.half_table
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        let s = (PI * x).sin().abs();
        self.alpha + (self.beta - self.alpha) * s.powf(2.0 * self.p)
    }

    #[inline]
    fn half_eval(&self, x: f64) -> f64 {
        let m = self.resolution as f64;
        let u = x * m;
        let last = self.half_table.len() - 2;
        let i = (u.floor() as usize).min(last);
        let t = u - i as f64;
        if t == 0.0 {
            return self.half_table[i];
        }
        let h = 1.0 / m;
        let (y0, y1) = (self.half_table[i], self.half_table[i + 1]);
        let d0 = self.derivative(i as f64 * h) * h;
        let d1 = self.derivative((i + 1) as f64 * h) * h;
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * d1
    }

    /// `g(x)` for `x ∈ [0, 1)`, result reduced mod 1.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let y = if x <= 0.5 {
            self.half_eval(x)
        } else {
            1.0 - self.half_eval(1.0 - x)
        };
        wrap(y)
    }

    /// `g` on `[0, 1]` without the final reduction (so `g(1) = 1`).
    pub fn eval_unwrapped(&self, x: f64) -> f64 {
        if x <= 0.5 {
            self.half_eval(x)
        } else {
            1.0 - self.half_eval(1.0 - x)
        }
    }
}

fn solve_bump_exponent(target: f64) -> Result<f64> {
    let (mut lo, mut hi) = BUMP_EXPONENT_RANGE;
    let (f_lo, f_hi) = (sine_power_mean(lo), sine_power_mean(hi));
    // the mean is decreasing in p
    if target > f_lo || target < f_hi {
        return Err(Error::InfeasibleProfile(format!(
            "target mean {target} outside the reachable range [{f_hi:.6}, {f_lo:.6}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f = sine_power_mean(mid);
        if (f - target).abs() <= BUMP_INTEGRAL_TOL {
            return Ok(mid);
        }
        if f > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Stable/unstable data of a hyperbolic 2×2 automorphism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub unstable_value: f64,
    pub stable_value: f64,
    pub unstable_vector: [f64; 2],
    pub stable_vector: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct ToralAutomorphism {
    dim: usize,
    matrix: Vec<i64>,
    jac: Mat,
    jac_inv: Mat,
    eigen: Option<EigenData>,
}

impl ToralAutomorphism {
    /// The cat map `(y, z) ↦ (2y + z, y + z)`.
    pub fn cat() -> Self {
        Self::new(vec![vec![2, 1], vec![1, 1]]).expect("cat map is unimodular")
    }

    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Dimension("toral matrix must be square and nonempty".into()));
        }
        let matrix: Vec<i64> = rows.iter().flatten().copied().collect();
        let det = integer_det(&matrix, dim);
        if det.abs() != 1 {
            return Err(Error::param(
                "toral.matrix",
                format!("determinant must be ±1, got {det}"),
            ));
        }
        let jac = Mat::from_rows(
            &rows
                .iter()
                .map(|r| r.iter().map(|&v| v as f64).collect())
                .collect::<Vec<_>>(),
        );
        let jac_inv = invert(&jac).ok_or_else(|| Error::Numeric("toral matrix not invertible".into()))?;
        // Integer inverse; round away the Gauss–Jordan noise.
        let jac_inv = Mat::from_rows(
            &(0..dim)
                .map(|i| (0..dim).map(|j| jac_inv[(i, j)].round()).collect())
                .collect::<Vec<_>>(),
        );
        let eigen = if dim == 2 { hyperbolic_eigen(&matrix) } else { None };
        Ok(ToralAutomorphism {
            dim,
            matrix,
            jac,
            jac_inv,
            eigen,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> Vec<Vec<i64>> {
        self.matrix.chunks(self.dim).map(<[i64]>::to_vec).collect()
    }

    pub fn eigen_data(&self) -> Option<&EigenData> {
        self.eigen.as_ref()
    }

    pub fn jacobian(&self) -> &Mat {
        &self.jac
    }

    pub fn jacobian_inverse(&self) -> &Mat {
        &self.jac_inv
    }

    #[inline]
    fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dim;
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += self.matrix[i * d + j] as f64 * x[j];
            }
            out[i] = wrap(acc);
        }
    }
}

fn integer_det(m: &[i64], n: usize) -> i128 {
    // Bareiss fraction-free elimination.
    let mut a: Vec<i128> = m.iter().map(|&v| v as i128).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n.saturating_sub(1) {
        if a[k * n + k] == 0 {
            let Some(swap) = (k + 1..n).find(|&i| a[i * n + k] != 0) else {
                return 0;
            };
            for j in 0..n {
                a.swap(k * n + j, swap * n + j);
            }
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
            }
        }
        prev = a[k * n + k];
    }
    sign * a[n * n - 1]
}

fn hyperbolic_eigen(m: &[i64]) -> Option<EigenData> {
    let (a, b, c, d) = (m[0] as f64, m[1] as f64, m[2] as f64, m[3] as f64);
    let tr = a + d;
    let det = a * d - b * c;
    let disc = tr * tr - 4.0 * det;
    if disc <= 0.0 {
        return None;
    }
    let root = disc.sqrt();
    let (l1, l2) = ((tr + root) / 2.0, (tr - root) / 2.0);
    let (unstable, stable) = if l1.abs() >= l2.abs() { (l1, l2) } else { (l2, l1) };
    if !(unstable.abs() > 1.0 && stable.abs() < 1.0) {
        return None;
    }
    let vec_for = |l: f64| {
        // Two candidate null vectors of (M − l I); keep the better conditioned one.
        let v1 = [b, l - a];
        let v2 = [l - d, c];
        let v = if v1[0].hypot(v1[1]) >= v2[0].hypot(v2[1]) { v1 } else { v2 };
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    };
    Some(EigenData {
        unstable_value: unstable,
        stable_value: stable,
        unstable_vector: vec_for(unstable),
        stable_vector: vec_for(stable),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Minimality {
    KnownMinimal,
    KnownNonMinimal,
    #[default]
    Unknown,
}

/// Product of circle rotations `x_i ↦ x_i + a_i`. The minimality flag is
/// declared, never inferred from the floating-point frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationSystem {
    pub frequencies: Vec<f64>,
    pub minimality: Minimality,
}

impl RotationSystem {
    pub fn new(frequencies: Vec<f64>, minimality: Minimality) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::Dimension("rotation needs at least one frequency".into()));
        }
        if frequencies.iter().any(|f| !f.is_finite()) {
            return Err(Error::param("rotation.frequencies", "non-finite frequency"));
        }
        Ok(RotationSystem {
            frequencies,
            minimality,
        })
    }
}

#[derive(Debug, Clone)]
pub enum FactorKind {
    Circle(CircleMapG),
    Toral(ToralAutomorphism),
    Rotation(RotationSystem),
}

impl FactorKind {
    pub fn dim(&self) -> usize {
        match self {
            FactorKind::Circle(_) => 1,
            FactorKind::Toral(t) => t.dim(),
            FactorKind::Rotation(r) => r.frequencies.len(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FactorKind::Circle(_) => "circle",
            FactorKind::Toral(_) => "toral",
            FactorKind::Rotation(_) => "rotation",
        }
    }

    /// Closed-form `sup_x max(‖Df(x)‖, ‖Df(x)⁻¹‖)` for this factor.
    pub fn derivative_sup(&self) -> f64 {
        match self {
            FactorKind::Circle(g) => g.beta().max(1.0 / g.alpha()),
            FactorKind::Toral(t) => largest_singular_value(t.jacobian())
                .max(largest_singular_value(t.jacobian_inverse())),
            FactorKind::Rotation(_) => 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Factor {
    pub label: String,
    pub kind: FactorKind,
    pub offset: usize,
}

/// A product map on `T^d`; a single factor is a product of length one.
#[derive(Debug, Clone)]
pub struct TorusMapSystem {
    factors: Vec<Factor>,
    dim: usize,
}

impl TorusMapSystem {
    pub fn product(factors: Vec<(String, FactorKind)>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Dimension("product needs at least one factor".into()));
        }
        let mut offset = 0;
        let mut out = Vec::with_capacity(factors.len());
        for (label, kind) in factors {
            if out.iter().any(|f: &Factor| f.label == label) {
                return Err(Error::Dimension(format!("duplicate factor label `{label}`")));
            }
            let d = kind.dim();
            out.push(Factor {
                label,
                kind,
                offset,
            });
            offset += d;
        }
        Ok(TorusMapSystem {
            factors: out,
            dim: offset,
        })
    }

    pub fn single(label: &str, kind: FactorKind) -> Self {
        Self::product(vec![(label.to_string(), kind)]).expect("single factor")
    }

    /// `g × cat` on `T³`.
    pub fn golden_example() -> Self {
        Self::product(vec![
            ("g".into(), FactorKind::Circle(CircleMapG::golden())),
            ("h".into(), FactorKind::Toral(ToralAutomorphism::cat())),
        ])
        .expect("valid product")
    }

    /// `g × cat` with the peak derivative of `g` moved to `beta`.
    pub fn modified_example(beta: f64) -> Result<Self> {
        Self::product(vec![
            (
                "g".into(),
                FactorKind::Circle(CircleMapG::build(golden_contraction(), beta, DEFAULT_TABLE_RESOLUTION)?),
            ),
            ("h".into(), FactorKind::Toral(ToralAutomorphism::cat())),
        ])
    }

    pub fn cat_map() -> Self {
        Self::single("h", FactorKind::Toral(ToralAutomorphism::cat()))
    }

    pub fn rotation(frequencies: Vec<f64>, minimality: Minimality) -> Result<Self> {
        Ok(Self::single(
            "r",
            FactorKind::Rotation(RotationSystem::new(frequencies, minimality)?),
        ))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor_index(&self, label: &str) -> Option<usize> {
        self.factors.iter().position(|f| f.label == label)
    }

    /// Closed-form `C = sup_x max(‖Df(x)‖, ‖Df⁻¹(x)‖)` over the whole torus.
    pub fn derivative_sup(&self) -> f64 {
        self.factors
            .iter()
            .map(|f| f.kind.derivative_sup())
            .fold(1.0, f64::max)
    }

    /// Declared minimality; only rotations carry a declaration.
    pub fn declared_minimality(&self) -> Minimality {
        match self.factors.as_slice() {
            [f] => match &f.kind {
                FactorKind::Rotation(r) => r.minimality,
                _ => Minimality::Unknown,
            },
            _ => Minimality::Unknown,
        }
    }

    #[inline]
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dim);
        for f in &self.factors {
            let o = f.offset;
            match &f.kind {
                FactorKind::Circle(g) => out[o] = g.eval(x[o]),
                FactorKind::Toral(t) => t.eval_into(&x[o..o + t.dim()], &mut out[o..o + t.dim()]),
                FactorKind::Rotation(r) => {
                    for (i, a) in r.frequencies.iter().enumerate() {
                        out[o + i] = wrap(x[o + i] + a);
                    }
                }
            }
        }
    }

    pub fn eval(&self, x: &TorusPoint) -> TorusPoint {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x.coords(), &mut out);
        TorusPoint(out)
    }

    /// Writes the block-diagonal Jacobian at `x` into `out` (d×d).
    #[inline]
    pub fn jacobian_into(&self, x: &[f64], out: &mut Mat) {
        out.fill(0.0);
        for f in &self.factors {
            let o = f.offset;
            match &f.kind {
                FactorKind::Circle(g) => out[(o, o)] = g.derivative(x[o]),
                FactorKind::Toral(t) => out.set_block(o, t.jacobian()),
                FactorKind::Rotation(r) => {
                    for i in 0..r.frequencies.len() {
                        out[(o + i, o + i)] = 1.0;
                    }
                }
            }
        }
    }

    pub fn jacobian(&self, x: &TorusPoint) -> Mat {
        let mut m = Mat::zeros(self.dim, self.dim);
        self.jacobian_into(x.coords(), &mut m);
        m
    }

    /// `Df(x)⁻¹`, assembled blockwise from exact factor inverses.
    pub fn jacobian_inverse(&self, x: &TorusPoint) -> Mat {
        let mut m = Mat::zeros(self.dim, self.dim);
        for f in &self.factors {
            let o = f.offset;
            match &f.kind {
                FactorKind::Circle(g) => m[(o, o)] = 1.0 / g.derivative(x.coords()[o]),
                FactorKind::Toral(t) => m.set_block(o, t.jacobian_inverse()),
                FactorKind::Rotation(r) => {
                    for i in 0..r.frequencies.len() {
                        m[(o + i, o + i)] = 1.0;
                    }
                }
            }
        }
        m
    }

    /// Streams `x, f(x), …, f^n(x)`.
    pub fn orbit(&self, x: &TorusPoint, n: usize) -> Orbit<'_> {
        Orbit {
            system: self,
            current: Some(x.clone()),
            remaining: n,
        }
    }

    /// Chain-rule oracle `ln |(f^n)'|` for a one-dimensional factor:
    /// `Σ_{i<n} ln |φ'((f^i x)_factor)|`.
    pub fn closed_form_log_derivative(
        &self,
        factor_index: usize,
        x: &TorusPoint,
        n: usize,
    ) -> Result<f64> {
        let f = self
            .factors
            .get(factor_index)
            .ok_or_else(|| Error::Dimension(format!("no factor {factor_index}")))?;
        if f.kind.dim() != 1 {
            return Err(Error::Dimension(format!(
                "factor `{}` is {}-dimensional",
                f.label,
                f.kind.dim()
            )));
        }
        let o = f.offset;
        Ok(match &f.kind {
            FactorKind::Circle(g) => {
                let mut s = x.coords()[o];
                let mut acc = 0.0;
                for _ in 0..n {
                    acc += g.derivative(s).ln();
                    s = g.eval(s);
                }
                acc
            }
            FactorKind::Rotation(_) => 0.0,
            FactorKind::Toral(t) => n as f64 * (t.jacobian()[(0, 0)].abs()).ln(),
        })
    }
}

pub struct Orbit<'a> {
    system: &'a TorusMapSystem,
    current: Option<TorusPoint>,
    remaining: usize,
}

impl Iterator for Orbit<'_> {
    type Item = TorusPoint;

    fn next(&mut self) -> Option<TorusPoint> {
        let cur = self.current.take()?;
        if self.remaining > 0 {
            self.remaining -= 1;
            self.current = Some(self.system.eval(&cur));
        }
        Some(cur)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn golden_constants_multiply_to_one() {
        assert_relative_eq!(golden_contraction() * golden_expansion(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn bump_exponent_between_wallis_brackets() {
        // ∫ sin⁶ = 5/16 and ∫ sin⁸ = 35/128 bracket the target (5 − √5)/10.
        let g = CircleMapG::golden();
        let target = (5.0 - 5f64.sqrt()) / 10.0;
        assert!(35.0 / 128.0 < target && target < 5.0 / 16.0);
        assert!(g.bump_exponent() > 3.0 && g.bump_exponent() < 4.0);
        assert_relative_eq!(sine_power_mean(3.0), 5.0 / 16.0, epsilon = 1e-13);
        assert_relative_eq!(sine_power_mean(4.0), 35.0 / 128.0, epsilon = 1e-13);
    }

    #[test]
    fn circle_g_fixed_points_and_derivatives() {
        let g = CircleMapG::golden();
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(0.5), 0.5);
        assert_relative_eq!(g.eval_unwrapped(1.0), 1.0, epsilon = 1e-12);
        assert_eq!(g.derivative(0.0), golden_contraction());
        assert_relative_eq!(g.derivative(0.5), golden_expansion(), epsilon = 1e-15);
    }

    #[test]
    fn circle_g_rejects_degenerate_bounds() {
        assert!(matches!(
            CircleMapG::build(1.0, 1.0, 1024),
            Err(Error::InfeasibleProfile(_))
        ));
        assert!(matches!(
            CircleMapG::build(0.5, 0.9, 1024),
            Err(Error::InfeasibleProfile(_))
        ));
    }

    #[test]
    fn table_is_strictly_increasing_and_exact_at_nodes() {
        let g = CircleMapG::build(golden_contraction(), golden_expansion(), 1 << 10).unwrap();
        let t = g.half_table();
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        for (i, v) in t.iter().enumerate() {
            let x = i as f64 / 1024.0;
            assert_eq!(g.eval_unwrapped(x), *v);
        }
    }

    #[test]
    fn sign_conditions_on_each_half() {
        let g = CircleMapG::golden();
        let n = 20_000;
        let mut min_left = f64::INFINITY;
        let mut min_right = f64::INFINITY;
        for i in 1..n {
            let x = i as f64 / n as f64;
            if x < 0.5 {
                min_left = min_left.min(x - g.eval(x));
            } else if x > 0.5 {
                min_right = min_right.min(g.eval(x) - x);
            }
        }
        assert!(min_left > 0.0, "{min_left}");
        assert!(min_right > 0.0, "{min_right}");
    }

    #[test]
    fn eval_examples() {
        let cat = TorusMapSystem::cat_map();
        assert_eq!(cat.eval(&TorusPoint::new(vec![0.0, 0.0])).coords(), &[0.0, 0.0]);
        let rot = TorusMapSystem::rotation(vec![0.25], Minimality::KnownNonMinimal).unwrap();
        assert_relative_eq!(rot.eval(&TorusPoint::new(vec![0.9])).coords()[0], 0.15, epsilon = 1e-15);
    }

    #[test]
    fn cat_eigendata_is_consistent() {
        let cat = ToralAutomorphism::cat();
        let e = cat.eigen_data().unwrap();
        assert_eq!(e.unstable_value, golden_expansion());
        assert_eq!(e.stable_value, golden_contraction());
        assert!((e.unstable_value.ln() + e.stable_value.ln()).abs() < 1e-12);
        let m = cat.jacobian();
        for (l, v) in [(e.unstable_value, e.unstable_vector), (e.stable_value, e.stable_vector)] {
            for i in 0..2 {
                let mv = m[(i, 0)] * v[0] + m[(i, 1)] * v[1];
                assert!((mv - l * v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn toral_rejects_non_unimodular() {
        assert!(ToralAutomorphism::new(vec![vec![2, 0], vec![0, 1]]).is_err());
        let t = ToralAutomorphism::new(vec![vec![1, 1, 0], vec![0, 1, 1], vec![1, 0, 1]]);
        // det = 2
        assert!(t.is_err());
        let t = ToralAutomorphism::new(vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 0]]).unwrap();
        assert!(t.eigen_data().is_none());
    }

    #[test]
    fn example_jacobians() {
        let f = TorusMapSystem::golden_example();
        let j0 = f.jacobian(&TorusPoint::new(vec![0.0, 0.3, 0.7]));
        let expect = [
            [golden_contraction(), 0.0, 0.0],
            [0.0, 2.0, 1.0],
            [0.0, 1.0, 1.0],
        ];
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(j0[(i, j)], expect[i][j], epsilon = 1e-15);
            }
        }
        let jh = f.jacobian(&TorusPoint::new(vec![0.5, 0.3, 0.7]));
        assert_relative_eq!(jh[(0, 0)], golden_expansion(), epsilon = 1e-15);
    }

    #[test]
    fn jacobian_inverse_is_inverse() {
        let f = TorusMapSystem::golden_example();
        for x in [[0.1, 0.2, 0.3], [0.77, 0.5, 0.01], [0.5, 0.0, 0.0]] {
            let p = TorusPoint::new(x.to_vec());
            let prod = f.jacobian_inverse(&p).mul(&f.jacobian(&p));
            for i in 0..3 {
                for j in 0..3 {
                    let t = if i == j { 1.0 } else { 0.0 };
                    assert!((prod[(i, j)] - t).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn inverse_jacobians_cancel_over_periodic_cycle() {
        let f = TorusMapSystem::rotation(vec![0.25, 0.5], Minimality::KnownNonMinimal).unwrap();
        let pts: Vec<_> = f.orbit(&TorusPoint::new(vec![0.1, 0.3]), 4).collect();
        assert_relative_eq!(pts[4].coords()[0], pts[0].coords()[0], epsilon = 1e-15);
        let mut acc = Mat::identity(2);
        for k in 0..4 {
            acc = f.jacobian_inverse(&pts[k + 1]).mul(&f.jacobian(&pts[k])).mul(&acc);
        }
        assert!(acc.sub(&Mat::identity(2)).max_abs() < 1e-9);
    }

    #[test]
    fn orbit_examples() {
        let rot = TorusMapSystem::rotation(vec![0.25], Minimality::KnownNonMinimal).unwrap();
        let xs: Vec<f64> = rot
            .orbit(&TorusPoint::new(vec![0.0]), 4)
            .map(|p| p.coords()[0])
            .collect();
        assert_eq!(xs, vec![0.0, 0.25, 0.5, 0.75, 0.0]);

        let g = TorusMapSystem::single("g", FactorKind::Circle(CircleMapG::golden()));
        let xs: Vec<f64> = g
            .orbit(&TorusPoint::new(vec![0.25]), 60)
            .map(|p| p.coords()[0])
            .collect();
        assert!(xs.windows(2).all(|w| w[1] < w[0]));
        assert!(xs[60] < 1e-10);

        let cat = TorusMapSystem::cat_map();
        assert!(cat
            .orbit(&TorusPoint::new(vec![0.0, 0.0]), 10)
            .all(|p| p.coords() == [0.0, 0.0]));
    }

    #[test]
    fn closed_form_log_derivative_at_fixed_points() {
        let f = TorusMapSystem::golden_example();
        let at0 = f
            .closed_form_log_derivative(0, &TorusPoint::new(vec![0.0, 0.4, 0.1]), 7)
            .unwrap();
        assert_relative_eq!(at0, 7.0 * golden_contraction().ln(), epsilon = 1e-12);
        let at_half = f
            .closed_form_log_derivative(0, &TorusPoint::new(vec![0.5, 0.4, 0.1]), 7)
            .unwrap();
        assert_relative_eq!(at_half, 7.0 * golden_expansion().ln(), epsilon = 1e-12);
        assert!(f
            .closed_form_log_derivative(1, &TorusPoint::new(vec![0.5, 0.4, 0.1]), 7)
            .is_err());
        let rot = TorusMapSystem::rotation(vec![0.3], Minimality::Unknown).unwrap();
        assert_eq!(
            rot.closed_form_log_derivative(0, &TorusPoint::new(vec![0.2]), 9).unwrap(),
            0.0
        );
    }

    #[test]
    fn derivative_sup_closed_form() {
        assert_relative_eq!(TorusMapSystem::cat_map().derivative_sup(), golden_expansion(), epsilon = 1e-14);
        assert_relative_eq!(
            TorusMapSystem::golden_example().derivative_sup(),
            golden_expansion(),
            epsilon = 1e-14
        );
        let rot = TorusMapSystem::rotation(vec![0.3, 0.1], Minimality::Unknown).unwrap();
        assert_eq!(rot.derivative_sup(), 1.0);
    }
}
