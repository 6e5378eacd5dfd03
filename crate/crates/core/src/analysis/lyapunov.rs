use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::systems::TorusMapSystem;

/// Lyapunov exponents along the orbit of `x`, ascending.
///
/// A full orthonormal frame is pushed by `Df` and re-orthonormalized with
/// Gram–Schmidt every step; the exponents are the averaged log stretches.
/// The first `min(n/10, 1000)` steps only align the frame and are left out
/// of the average, which removes the `O(1/n)` bias of the initial frame.
pub fn lyapunov_spectrum(system: &TorusMapSystem, x: &[f64], n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::param("n", "needs n ≥ 1"));
    }
    let d = system.dim();
    if x.len() != d {
        return Err(Error::Dimension(format!("point has {} coordinates, system has {d}", x.len())));
    }
    let mut p = x.to_vec();
    let mut next = vec![0.0; d];
    let mut jac = Mat::zeros(d, d);
    let mut q = Mat::identity(d);
    let mut m = Mat::zeros(d, d);
    let mut sums = vec![0.0; d];
    let burn_in = (n / 10).min(1000);
    for step in 0..n {
        system.jacobian_into(&p, &mut jac);
        jac.mul_into(&q, &mut m);
        for j in 0..d {
            // two passes of modified Gram–Schmidt against earlier columns
            for _ in 0..2 {
                for i in 0..j {
                    let dot: f64 = (0..d).map(|r| m[(r, i)] * m[(r, j)]).sum();
                    for r in 0..d {
                        m[(r, j)] -= dot * m[(r, i)];
                    }
                }
            }
            let norm = m.col_norm_sq(j).sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::NumericAtStep {
                    step,
                    message: format!("frame column {j} collapsed (norm {norm:e})"),
                });
            }
            for r in 0..d {
                m[(r, j)] /= norm;
            }
            if step >= burn_in {
                sums[j] += norm.ln();
            }
        }
        std::mem::swap(&mut q, &mut m);
        system.eval_into(&p, &mut next);
        std::mem::swap(&mut p, &mut next);
    }
    let mut out: Vec<f64> = sums.iter().map(|s| s / (n - burn_in) as f64).collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}
