//! Bounded Levenberg–Marquardt for problems with a handful of parameters.

#[derive(Debug, Clone)]
pub(crate) struct LmResult {
    pub x: Vec<f64>,
    /// Half the sum of squared residuals.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `(JᵀJ)⁻¹` at the solution, row-major; `None` when singular.
    pub covariance: Option<Vec<f64>>,
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn jacobian<F>(f: &F, x: &[f64], r0: &[f64], lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut cols = Vec::with_capacity(x.len());
    for k in 0..x.len() {
        let h = 1e-7 * x[k].abs().max(1e-3);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let col = if xp[k] <= upper[k] && xm[k] >= lower[k] {
            let (rp, rm) = (f(&xp), f(&xm));
            rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        } else if xp[k] <= upper[k] {
            let rp = f(&xp);
            rp.iter().zip(r0).map(|(a, b)| (a - b) / h).collect()
        } else {
            let rm = f(&xm);
            r0.iter().zip(&rm).map(|(a, b)| (a - b) / h).collect()
        };
        cols.push(col);
    }
    cols
}

/// Solves `a x = b` in place by Gaussian elimination with partial pivoting.
pub(crate) fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

fn invert(a: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut out = vec![0.0; n * n];
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let col = solve(a.to_vec(), e)?;
        for i in 0..n {
            out[i * n + k] = col[i];
        }
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

/// Minimizes `½‖f(x)‖²` subject to `lower ≤ x ≤ upper` (steps are projected
/// onto the box).
pub(crate) fn levenberg_marquardt<F>(
    f: F,
    x0: &[f64],
    lower: &[f64],
    upper: &[f64],
    max_iter: usize,
) -> LmResult
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = x0.len();
    let clamp = |x: &mut [f64]| {
        for k in 0..n {
            x[k] = x[k].clamp(lower[k], upper[k]);
        }
    };
    let mut x = x0.to_vec();
    clamp(&mut x);
    let mut r = f(&x);
    let mut cost = cost_of(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        if cost < 1e-32 {
            converged = true;
            break;
        }
        let j = jacobian(&f, &x, &r, lower, upper);
        let mut jtj = vec![vec![0.0; n]; n];
        let mut jtr = vec![0.0; n];
        for a in 0..n {
            for b in 0..n {
                jtj[a][b] = j[a].iter().zip(&j[b]).map(|(u, v)| u * v).sum();
            }
            jtr[a] = j[a].iter().zip(&r).map(|(u, v)| u * v).sum();
        }
        let grad = jtr.iter().map(|g| g.abs()).fold(0.0, f64::max);
        if grad < 1e-30 {
            converged = true;
            break;
        }
        let mut improved = false;
        for _ in 0..40 {
            let mut damped = jtj.clone();
            for k in 0..n {
                damped[k][k] += lambda * jtj[k][k].max(1e-12);
            }
            let Some(step) = solve(damped, jtr.iter().map(|g| -g).collect()) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial: Vec<f64> = x.iter().zip(&step).map(|(a, d)| a + d).collect();
            clamp(&mut trial);
            let rt = f(&trial);
            let ct = cost_of(&rt);
            if ct.is_finite() && ct < cost {
                let moved = x
                    .iter()
                    .zip(&trial)
                    .map(|(a, b)| (a - b).abs() / a.abs().max(1e-12))
                    .fold(0.0, f64::max);
                let rel = (cost - ct) / cost.max(1e-300);
                x = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-15);
                improved = true;
                if rel < 1e-15 || moved < 1e-15 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                break;
            }
        }
        if !improved {
            // No descent direction left: a (possibly bound-constrained)
            // minimum.
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }

    let j = jacobian(&f, &x, &r, lower, upper);
    let jtj: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| j[a].iter().zip(&j[b]).map(|(u, v)| u * v).sum())
                .collect()
        })
        .collect();
    LmResult {
        x,
        cost,
        iterations,
        converged,
        covariance: invert(&jtj),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_linear_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(a, vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        assert!(solve(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 1.0]).is_none());
    }

    #[test]
    fn fits_rosenbrock_as_least_squares() {
        let f = |x: &[f64]| vec![10.0 * (x[1] - x[0] * x[0]), 1.0 - x[0]];
        let r = levenberg_marquardt(f, &[-1.2, 1.0], &[-5.0, -5.0], &[5.0, 5.0], 500);
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-8 && (r.x[1] - 1.0).abs() < 1e-8, "{:?}", r.x);
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| vec![x[0] - 3.0];
        let r = levenberg_marquardt(f, &[0.0], &[-1.0], &[1.0], 100);
        assert_eq!(r.x[0], 1.0);
    }
}
