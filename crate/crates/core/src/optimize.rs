//! Derivative-free Nelder–Mead simplex minimization.

#[derive(Debug, Clone)]
pub struct NelderMeadOptions {
    pub max_evaluations: usize,
    /// Convergence requires f_max − f_min ≤ f_rel_tol·|f_min| over the simplex
    /// and every vertex within x_tol of the best one (max norm).
    pub f_rel_tol: f64,
    pub x_tol: f64,
    pub initial_step: f64,
    /// Number of times to rebuild the simplex around the best point after
    /// convergence, guarding against premature collapse.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        NelderMeadOptions { max_evaluations: 2000, f_rel_tol: 1e-9, x_tol: 1e-6, initial_step: 0.5, restarts: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Minimizes `f` starting from `x0`. Non-finite objective values are treated
/// as +∞, which lets callers encode infeasible regions.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NelderMeadOptions) -> Minimum {
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let n = x0.len();
    let mut evaluations = 0;
    if n == 0 {
        let v = eval(x0, &mut evaluations);
        return Minimum { x: Vec::new(), f: v, evaluations, converged: true };
    }

    let f0 = eval(x0, &mut evaluations);
    let (mut best_x, mut best_f, mut converged) = simplex_run(&mut eval, x0, f0, opts, &mut evaluations);
    for _ in 0..opts.restarts {
        if !converged {
            break;
        }
        let (x, fx, conv) = simplex_run(&mut eval, &best_x.clone(), best_f, opts, &mut evaluations);
        converged = conv;
        if fx < best_f {
            best_x = x;
            best_f = fx;
        } else {
            break;
        }
    }
    Minimum { x: best_x, f: best_f, evaluations, converged }
}

fn simplex_run<E: FnMut(&[f64], &mut usize) -> f64>(
    eval: &mut E,
    start: &[f64],
    f_start: f64,
    opts: &NelderMeadOptions,
    evaluations: &mut usize,
) -> (Vec<f64>, f64, bool) {
    let n = start.len();
    // Dimension-adaptive coefficients (Gao & Han) behave better beyond 2-D.
    let nf = n as f64;
    let (alpha, gamma, rho, shrink) = if n > 2 {
        (1.0, 1.0 + 2.0 / nf, 0.75 - 1.0 / (2.0 * nf), 1.0 - 1.0 / nf)
    } else {
        (1.0, 2.0, 0.5, 0.5)
    };
    let mut pts: Vec<Vec<f64>> = vec![start.to_vec()];
    let mut vals = vec![f_start];
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += opts.initial_step;
        vals.push(eval(&p, evaluations));
        pts.push(p);
    }
    let mut order: Vec<usize> = (0..=n).collect();
    loop {
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let best = order[0];
        let worst = order[n];
        let second = order[n - 1];
        let spread_f = vals[worst] - vals[best];
        let spread_x = pts
            .iter()
            .flat_map(|p| p.iter().zip(&pts[best]).map(|(a, b)| (a - b).abs()))
            .fold(0.0_f64, f64::max);
        let f_ok = vals[worst].is_finite() && spread_f <= opts.f_rel_tol * (vals[best].abs() + 1e-300);
        if f_ok && spread_x <= opts.x_tol {
            return (pts[best].clone(), vals[best], true);
        }
        if *evaluations >= opts.max_evaluations {
            return (pts[best].clone(), vals[best], false);
        }

        let mut centroid = vec![0.0; n];
        for &i in &order[..n] {
            for (c, v) in centroid.iter_mut().zip(&pts[i]) {
                *c += v / nf;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid.iter().zip(&pts[worst]).map(|(c, w)| c + t * (c - w)).collect()
        };
        let xr = along(alpha);
        let fr = eval(&xr, evaluations);
        if fr < vals[best] {
            let xe = along(alpha * gamma);
            let fe = eval(&xe, evaluations);
            if fe < fr {
                pts[worst] = xe;
                vals[worst] = fe;
            } else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if fr < vals[second] {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[worst] {
            let xc = along(alpha * rho);
            let fc = eval(&xc, evaluations);
            (xc, fc)
        } else {
            let xc = along(-rho);
            let fc = eval(&xc, evaluations);
            (xc, fc)
        };
        if fc < vals[worst].min(fr) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        let anchor = pts[best].clone();
        for &i in &order[1..] {
            for (p, a) in pts[i].iter_mut().zip(&anchor) {
                *p = a + shrink * (*p - a);
            }
            vals[i] = eval(&pts[i], evaluations);
        }
    }
}

/// Golden-section search for a minimum of a unimodal function on [a, b].
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> f64 {
    golden_section_by(|x, y| f(x) < f(y), a, b, tol)
}

/// Golden-section search driven by a comparison `less(x, y)` meaning
/// f(x) < f(y). Supplying the comparison directly lets callers evaluate
/// f(x) − f(y) without the cancellation that limits value-based searches to
/// about √ε relative accuracy.
pub fn golden_section_by<L: FnMut(f64, f64) -> bool>(mut less: L, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    while (b - a).abs() > tol * (c.abs() + d.abs()).max(1e-300) {
        if less(c, d) {
            b = d;
            d = c;
            c = b - inv_phi * (b - a);
        } else {
            a = c;
            c = d;
            d = a + inv_phi * (b - a);
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let opts = NelderMeadOptions { max_evaluations: 5000, f_rel_tol: 1e-14, x_tol: 1e-9, ..Default::default() };
        let m = nelder_mead(f, &[-1.2, 1.0], &opts);
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m.x);
    }

    #[test]
    fn quadratic_in_five_dimensions() {
        let f = |x: &[f64]| x.iter().enumerate().map(|(i, v)| (i as f64 + 1.0) * (v - 0.1 * i as f64).powi(2)).sum();
        let opts = NelderMeadOptions { max_evaluations: 20000, f_rel_tol: 1e-12, x_tol: 1e-8, ..Default::default() };
        let m = nelder_mead(f, &[1.0; 5], &opts);
        for (i, v) in m.x.iter().enumerate() {
            assert!((v - 0.1 * i as f64).abs() < 1e-4);
        }
    }

    #[test]
    fn infeasible_region_is_avoided() {
        let f = |x: &[f64]| if x[0] < 0.0 { f64::NAN } else { (x[0] - 0.3).powi(2) };
        let m = nelder_mead(f, &[1.0], &NelderMeadOptions::default());
        assert!((m.x[0] - 0.3).abs() < 1e-5);
    }

    #[test]
    fn evaluation_budget_is_respected() {
        let opts = NelderMeadOptions { max_evaluations: 30, ..Default::default() };
        let m = nelder_mead(|x: &[f64]| x[0].sin() + x[1].powi(2), &[0.0, 3.0], &opts);
        assert!(!m.converged);
        assert!(m.evaluations <= 30 + 3);
    }

    #[test]
    fn golden_section_quadratic() {
        let x = golden_section(|x| (x - 1.234).powi(2), 0.0, 5.0, 1e-12);
        assert!((x - 1.234).abs() < 1e-9);
    }
}
