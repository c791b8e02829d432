//! Nelder–Mead downhill simplex.
//!
//! Used by the Lorentzian profile fit and by the design optimizer. The
//! optional projection is applied to every trial point, which is how the
//! optimizer keeps the search inside its box.

/// Standard coefficients: reflection, expansion, contraction, shrink.
const ALPHA: f64 = 1.0;
const GAMMA: f64 = 2.0;
const RHO: f64 = 0.5;
const SIGMA: f64 = 0.5;

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions {
    /// Hard limit on objective evaluations, including the initial simplex.
    pub max_evals: usize,
    /// Stop once every vertex is within this distance (max-norm) of the best.
    pub x_tol: f64,
    /// ... and the objective spread is below this.
    pub f_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_evals: 2000,
            x_tol: 1e-10,
            f_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `initial` (n + 1 vertices of dimension n).
/// NaN objective values are treated as +∞.
pub fn minimize<F, P>(mut f: F, initial: Vec<Vec<f64>>, opts: SimplexOptions, project: P) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
    P: Fn(&mut [f64]),
{
    let n = initial.len().saturating_sub(1);
    assert!(n >= 1 && initial.iter().all(|v| v.len() == n), "simplex needs n + 1 vertices of dimension n");

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut verts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    for mut v in initial {
        if evals >= opts.max_evals {
            break;
        }
        project(&mut v);
        let fv = eval(&v, &mut evals);
        verts.push((v, fv));
    }
    if verts.len() < n + 1 {
        let best = verts
            .into_iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one evaluation");
        return SimplexResult {
            x: best.0,
            fx: best.1,
            evals,
            converged: false,
        };
    }

    let mut converged = false;
    while evals < opts.max_evals {
        verts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best_x, best_f) = (&verts[0].0, verts[0].1);
        let worst_f = verts[n].1;
        let spread = verts
            .iter()
            .skip(1)
            .flat_map(|(v, _)| v.iter().zip(best_x).map(|(a, b)| (a - b).abs()))
            .fold(0.0_f64, f64::max);
        if spread <= opts.x_tol && (worst_f - best_f).abs() <= opts.f_tol.max(f64::EPSILON * best_f.abs()) {
            converged = true;
            break;
        }
        if spread <= opts.x_tol * 1e-3 {
            // Degenerate simplex; further steps cannot move.
            converged = true;
            break;
        }

        let mut centroid = vec![0.0; n];
        for (v, _) in &verts[..n] {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }
        let along = |from: &[f64], coef: f64| -> Vec<f64> {
            let mut p: Vec<f64> = centroid
                .iter()
                .zip(from)
                .map(|(c, x)| c + coef * (x - c))
                .collect();
            project(&mut p);
            p
        };

        let worst = verts[n].0.clone();
        let xr = along(&worst, -ALPHA);
        let fr = eval(&xr, &mut evals);

        if fr < verts[0].1 {
            if evals >= opts.max_evals {
                verts[n] = (xr, fr);
                break;
            }
            let xe = along(&xr, GAMMA);
            let fe = eval(&xe, &mut evals);
            verts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < verts[n - 1].1 {
            verts[n] = (xr, fr);
            continue;
        }
        if evals >= opts.max_evals {
            break;
        }
        let (xc, fc, accept) = if fr < verts[n].1 {
            let xc = along(&xr, RHO);
            let fc = eval(&xc, &mut evals);
            let ok = fc <= fr;
            (xc, fc, ok)
        } else {
            let xc = along(&worst, RHO);
            let fc = eval(&xc, &mut evals);
            let ok = fc < verts[n].1;
            (xc, fc, ok)
        };
        if accept {
            verts[n] = (xc, fc);
            continue;
        }
        // Shrink toward the best vertex.
        let best = verts[0].0.clone();
        for vert in verts.iter_mut().skip(1) {
            if evals >= opts.max_evals {
                break;
            }
            let mut p: Vec<f64> = best
                .iter()
                .zip(&vert.0)
                .map(|(b, x)| b + SIGMA * (x - b))
                .collect();
            project(&mut p);
            let fp = eval(&p, &mut evals);
            *vert = (p, fp);
        }
    }

    let (x, fx) = verts
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty simplex");
    SimplexResult {
        x,
        fx,
        evals,
        converged,
    }
}

/// Axis-aligned initial simplex around `x0` with per-axis steps.
pub fn axis_simplex(x0: &[f64], steps: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![x0.to_vec()];
    for (i, s) in steps.iter().enumerate() {
        let mut v = x0.to_vec();
        v[i] += s;
        out.push(v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = minimize(
            f,
            axis_simplex(&[-1.2, 1.0], &[0.5, 0.5]),
            SimplexOptions { max_evals: 5000, ..Default::default() },
            |_| {},
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn respects_budget() {
        let mut calls = 0;
        let r = minimize(
            |x: &[f64]| {
                calls += 1;
                x[0] * x[0] + x[1] * x[1]
            },
            axis_simplex(&[3.0, 3.0], &[1.0, 1.0]),
            SimplexOptions { max_evals: 17, ..Default::default() },
            |_| {},
        );
        assert_eq!(r.evals, calls);
        assert!(calls <= 17);
    }

    #[test]
    fn projection_keeps_points_in_box() {
        let r = minimize(
            |x: &[f64]| {
                assert!(x.iter().all(|v| (0.0..=1.0).contains(v)));
                (x[0] - 2.0).powi(2) + (x[1] + 1.0).powi(2)
            },
            axis_simplex(&[0.5, 0.5], &[0.2, 0.2]),
            SimplexOptions::default(),
            |x| x.iter_mut().for_each(|v| *v = v.clamp(0.0, 1.0)),
        );
        assert!((r.x[0] - 1.0).abs() < 1e-8 && r.x[1].abs() < 1e-8);
    }

    #[test]
    fn nan_is_treated_as_worst() {
        let r = minimize(
            |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.3).powi(2) },
            axis_simplex(&[1.0], &[0.5]),
            SimplexOptions::default(),
            |_| {},
        );
        assert!((r.x[0] - 0.3).abs() < 1e-6);
    }
}
