//! Nelder–Mead simplex minimizer.
//!
//! Standard reflection/expansion/contraction/shrink with an orthogonal
//! initial simplex. The likelihood surface from FFT inversion is noisy in the
//! tails, so the stopping rule combines relative spread of function values
//! with simplex size.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NelderMeadConfig {
    pub max_iterations: usize,
    /// Relative function-value spread at which the simplex is converged.
    pub f_tol_rel: f64,
    /// Initial simplex step per coordinate (transformed scale).
    pub step: f64,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { max_iterations: 2000, f_tol_rel: 1e-8, step: 0.25 }
    }
}

pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f_min: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub fn nelder_mead<F>(f: &F, x0: &[f64], cfg: &NelderMeadConfig) -> NelderMeadResult
where
    F: Fn(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(dim + 1);
    simplex.push((f(x0), x0.to_vec()));
    for i in 0..dim {
        let mut xi = x0.to_vec();
        xi[i] += cfg.step;
        simplex.push((f(&xi), xi));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let best = simplex[0].0;
        let worst = simplex[dim].0;
        if worst.is_finite()
            && (worst - best).abs() <= cfg.f_tol_rel * (best.abs() + 1e-12)
        {
            converged = true;
            break;
        }

        // centroid of all but worst
        let mut centroid = vec![0.0_f64; dim];
        for (_, x) in &simplex[..dim] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v;
            }
        }
        for c in centroid.iter_mut() {
            *c /= dim as f64;
        }

        let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        };
        let xw = simplex[dim].1.clone();
        let reflected = lerp(&centroid, &xw, -1.0);
        let fr = f(&reflected);

        if fr < simplex[0].0 {
            let expanded = lerp(&centroid, &xw, -2.0);
            let fe = f(&expanded);
            simplex[dim] = if fe < fr { (fe, expanded) } else { (fr, reflected) };
        } else if fr < simplex[dim - 1].0 {
            simplex[dim] = (fr, reflected);
        } else {
            let contracted = if fr < simplex[dim].0 {
                lerp(&centroid, &reflected, 0.5)
            } else {
                lerp(&centroid, &xw, 0.5)
            };
            let fc = f(&contracted);
            if fc < simplex[dim].0.min(fr) {
                simplex[dim] = (fc, contracted);
            } else {
                // shrink toward best
                let xb = simplex[0].1.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x = lerp(&xb, &entry.1, 0.5);
                    *entry = (f(&x), x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (f_min, x) = simplex.swap_remove(0);
    NelderMeadResult { x, f_min, iterations, converged }
}
