//! Nelder–Mead simplex minimization with the standard coefficients
//! (reflection 1, expansion 2, contraction 1/2, shrink 1/2).

#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    /// Both the simplex diameter and the spread of vertex values fell below
    /// the tolerance.
    pub converged: bool,
    /// `(iteration, best value)` after every iteration.
    pub trace: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// Offset of the initial simplex vertices along each axis.
    pub step: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

/// Minimizes `f` from `x0`. Non-finite values count as `+inf`, so an
/// infeasible region simply repels the simplex.
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], options: Options) -> Minimum {
    let n = x0.len();
    let mut eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += options.step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < options.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if is_converged(&simplex, options.tolerance) {
            converged = true;
            break;
        }
        iterations += 1;

        let worst = simplex[n].clone();
        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };

        let reflected = along(1.0);
        let fr = eval(&reflected);
        if fr < simplex[0].1 {
            let expanded = along(2.0);
            let fe = eval(&expanded);
            simplex[n] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < worst.1 {
                let x = along(0.5);
                let v = eval(&x);
                (x, v)
            } else {
                let x = along(-0.5);
                let v = eval(&x);
                (x, v)
            };
            if fc < fr.min(worst.1) {
                simplex[n] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, v)| b + 0.5 * (v - b)).collect();
                    let v = eval(&x);
                    *vertex = (x, v);
                }
            }
        }
        let best = simplex.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
        trace.push((iterations, best));
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    if !converged {
        converged = is_converged(&simplex, options.tolerance);
    }
    let (x, value) = simplex.swap_remove(0);
    Minimum { x, value, iterations, converged, trace }
}

fn is_converged(sorted: &[(Vec<f64>, f64)], tolerance: f64) -> bool {
    let best = &sorted[0];
    let diameter = sorted[1..]
        .iter()
        .map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    let spread = sorted[sorted.len() - 1].1 - best.1;
    best.1.is_finite() && diameter <= tolerance && spread <= tolerance
}
