//! Derivative-free local search and the unitary chart it runs on.
//!
//! A basis on a `d`-dimensional block is parameterized as `exp(A) B0`, where
//! `B0` is the start basis and `A` is anti-Hermitian with zero diagonal
//! (diagonal phases do not change the projectors). The `d(d-1)/2` complex
//! upper-triangle entries of `A` give `d(d-1)` real coordinates.

use crate::qstate::eigh;
use crate::{CMatrix, C64};

/// Settings for one Nelder-Mead run.
#[derive(Debug, Clone, Copy)]
pub struct SimplexSettings {
    /// Initial simplex edge along each coordinate.
    pub step: f64,
    /// Converged when `f_max - f_min <= ftol` over the simplex.
    pub ftol: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Number of real chart coordinates for a `d`-dimensional block.
pub fn chart_dim(d: usize) -> usize {
    d * (d - 1)
}

/// `exp(A)` for the anti-Hermitian `A` encoded by `x` (`x.len() == d(d-1)`).
pub fn unitary_from_params(d: usize, x: &[f64]) -> CMatrix {
    debug_assert_eq!(x.len(), chart_dim(d));
    if x.iter().all(|&v| v == 0.0) {
        return CMatrix::identity(d, d);
    }
    if d == 2 {
        return su2_exp(x[0], x[1]);
    }
    // exp(A) = exp(iH) with H = -iA Hermitian.
    let mut h = CMatrix::zeros(d, d);
    let mut k = 0;
    for i in 0..d {
        for j in i + 1..d {
            let a = C64::new(x[k], x[k + 1]);
            k += 2;
            h[(i, j)] = a * C64::new(0.0, -1.0);
            h[(j, i)] = h[(i, j)].conj();
        }
    }
    let (vals, vecs) = eigh(&h);
    let mut out = CMatrix::zeros(d, d);
    for (m, &lam) in vals.iter().enumerate() {
        let phase = C64::from_polar(1.0, lam);
        let col = vecs.column(m);
        for c in 0..d {
            let w = col[c].conj() * phase;
            for r in 0..d {
                out[(r, c)] += col[r] * w;
            }
        }
    }
    out
}

/// Closed form of `exp([[0, a], [-a*, 0]])` with `a = re + i im`.
fn su2_exp(re: f64, im: f64) -> CMatrix {
    let theta = (re * re + im * im).sqrt();
    let (s, c) = theta.sin_cos();
    let a = C64::new(re, im) * (s / theta);
    CMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), a, -a.conj(), C64::new(c, 0.0)])
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Adaptive Nelder-Mead (dimension-dependent coefficients), restarted from
/// the incumbent until a restart no longer improves by more than `ftol`.
///
/// Never returns a value worse than `f(x0)`.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    x0: &[f64],
    settings: &SimplexSettings,
) -> SimplexOutcome {
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut eval = |x: &[f64], evaluations: &mut usize| {
        *evaluations += 1;
        sanitize(f(x))
    };
    if n == 0 {
        let value = eval(x0, &mut evaluations);
        return SimplexOutcome {
            x: Vec::new(),
            value,
            evaluations,
            iterations: 0,
            converged: true,
        };
    }

    let nf = n as f64;
    let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

    let mut best_x = x0.to_vec();
    let mut best_f = eval(x0, &mut evaluations);
    let mut iterations = 0usize;
    let mut converged;

    loop {
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        simplex.push((best_x.clone(), best_f));
        for i in 0..n {
            let mut x = best_x.clone();
            x[i] += settings.step;
            let fx = eval(&x, &mut evaluations);
            simplex.push((x, fx));
        }
        let start_f = best_f;
        let mut run_converged = false;
        while iterations < settings.max_iterations {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if simplex[n].1 - simplex[0].1 <= settings.ftol {
                run_converged = true;
                break;
            }
            iterations += 1;
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, v) in centroid.iter_mut().zip(x) {
                    *c += v / nf;
                }
            }
            let along = |t: f64, worst: &[f64]| -> Vec<f64> {
                centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect()
            };
            let worst = simplex[n].0.clone();
            let xr = along(alpha, &worst);
            let fr = eval(&xr, &mut evaluations);
            if fr < simplex[0].1 {
                let xe = along(beta, &worst);
                let fe = eval(&xe, &mut evaluations);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, fc) = if fr < simplex[n].1 {
                let xc = along(gamma, &worst);
                let fc = eval(&xc, &mut evaluations);
                (xc, fc)
            } else {
                let xc = along(-gamma, &worst);
                let fc = eval(&xc, &mut evaluations);
                (xc, fc)
            };
            if fc < simplex[n].1.min(fr) {
                simplex[n] = (xc, fc);
                continue;
            }
            let x_best = simplex[0].0.clone();
            for entry in simplex.iter_mut().skip(1) {
                let xs: Vec<f64> = x_best
                    .iter()
                    .zip(&entry.0)
                    .map(|(b, x)| b + delta * (x - b))
                    .collect();
                let fs = eval(&xs, &mut evaluations);
                *entry = (xs, fs);
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best_f {
            best_f = simplex[0].1;
            best_x = simplex[0].0.clone();
        }
        converged = run_converged;
        if !run_converged || start_f - best_f <= settings.ftol {
            break;
        }
    }

    SimplexOutcome {
        x: best_x,
        value: best_f,
        evaluations,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn settings() -> SimplexSettings {
        SimplexSettings {
            step: 0.1,
            ftol: 1e-12,
            max_iterations: 5000,
        }
    }

    #[test]
    fn minimizes_quadratic_bowl() {
        let out = nelder_mead(
            |x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2) + 0.5 * x[2].powi(2),
            &[0.0, 0.0, 0.0],
            &settings(),
        );
        assert!(out.converged);
        assert!(out.value < 1e-10);
        assert_abs_diff_eq!(out.x[0], 1.0, epsilon = 1e-4);
        assert_abs_diff_eq!(out.x[1], -0.5, epsilon = 1e-4);
    }

    #[test]
    fn minimizes_rosenbrock() {
        let rosen = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let out = nelder_mead(rosen, &[-1.2, 1.0], &settings());
        assert!(out.value < 1e-8, "{}", out.value);
    }

    #[test]
    fn never_worse_than_start_and_handles_nan() {
        let out = nelder_mead(
            |x| if x[0] > 0.0 { f64::NAN } else { x[0] * x[0] },
            &[0.0, 0.0],
            &settings(),
        );
        assert_eq!(out.value, 0.0);
        let zero = nelder_mead(|_| 3.0, &[], &settings());
        assert_eq!(zero.value, 3.0);
        assert_eq!(zero.evaluations, 1);
    }

    #[test]
    fn respects_iteration_budget() {
        let out = nelder_mead(
            |x| x.iter().map(|v| v.sin() + 1.0).sum(),
            &[0.3; 6],
            &SimplexSettings {
                step: 0.1,
                ftol: 0.0,
                max_iterations: 7,
            },
        );
        assert!(!out.converged);
        assert!(out.iterations <= 7);
    }

    #[test]
    fn chart_produces_unitaries() {
        for d in 2..=5 {
            let x: Vec<f64> = (0..chart_dim(d)).map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.21).collect();
            let u = unitary_from_params(d, &x);
            assert!((u.adjoint() * &u - CMatrix::identity(d, d)).norm() < 1e-13);
        }
        assert_eq!(unitary_from_params(3, &[0.0; 6]), CMatrix::identity(3, 3));
    }

    #[test]
    fn su2_closed_form_matches_spectral_exponential() {
        let (re, im) = (0.37, -1.1);
        let closed = su2_exp(re, im);
        let a = C64::new(re, im);
        let h = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), a * C64::new(0.0, -1.0), (a * C64::new(0.0, -1.0)).conj(), C64::new(0.0, 0.0)]);
        let (vals, vecs) = eigh(&h);
        let spectral = (0..2).fold(CMatrix::zeros(2, 2), |acc, m| {
            let v = vecs.column(m);
            acc + v * v.adjoint() * C64::from_polar(1.0, vals[m])
        });
        assert!((closed - spectral).norm() < 1e-14);
    }
}
