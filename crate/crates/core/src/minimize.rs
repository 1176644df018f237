//! Nelder-Mead simplex search, used to polish grid minima.

#[derive(Debug, Clone)]
pub(crate) struct SimplexResult<const N: usize> {
    pub x: [f64; N],
    pub f: f64,
    #[allow(dead_code)]
    pub iterations: usize,
    pub converged: bool,
}

/// Convergence tolerance on one coordinate.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Tol {
    Relative(f64),
    Absolute(f64),
}

impl Tol {
    fn allows(self, best: f64, other: f64) -> bool {
        let d = (other - best).abs();
        match self {
            Tol::Relative(r) => d <= r * best.abs(),
            Tol::Absolute(a) => d <= a,
        }
    }
}

/// Minimize `f` from `start`, with initial steps `step` along each axis.
///
/// Stops when every vertex lies within `tol` of the best vertex in every
/// coordinate.
pub(crate) fn nelder_mead<const N: usize>(
    mut f: impl FnMut(&[f64; N]) -> f64,
    start: [f64; N],
    step: [f64; N],
    tol: [Tol; N],
    max_iter: usize,
) -> SimplexResult<N> {
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<([f64; N], f64)> = Vec::with_capacity(N + 1);
    simplex.push((start, f(&start)));
    for i in 0..N {
        let mut x = start;
        x[i] += step[i];
        simplex.push((x, f(&x)));
    }

    let order = |s: &mut Vec<([f64; N], f64)>| {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        order(&mut simplex);
        let best = simplex[0].0;
        let spread_ok = simplex.iter().skip(1).all(|(x, _)| {
            (0..N).all(|k| tol[k].allows(best[k], x[k]))
        });
        if spread_ok {
            converged = true;
            break;
        }
        iterations += 1;

        let mut centroid = [0.0; N];
        for (x, _) in &simplex[..N] {
            for k in 0..N {
                centroid[k] += x[k] / N as f64;
            }
        }
        let worst = simplex[N];
        let along = |t: f64| {
            let mut x = [0.0; N];
            for k in 0..N {
                x[k] = centroid[k] + t * (worst.0[k] - centroid[k]);
            }
            x
        };

        let xr = along(-alpha);
        let fr = f(&xr);
        if fr < simplex[0].1 {
            let xe = along(-alpha * gamma);
            let fe = f(&xe);
            simplex[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[N - 1].1 {
            simplex[N] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let x = along(-alpha * rho);
            (x, f(&x))
        } else {
            let x = along(rho);
            (x, f(&x))
        };
        if fc < worst.1.min(fr) {
            simplex[N] = (xc, fc);
            continue;
        }
        let x0 = simplex[0].0;
        for (x, fx) in simplex.iter_mut().skip(1) {
            for k in 0..N {
                x[k] = x0[k] + sigma * (x[k] - x0[k]);
            }
            *fx = f(x);
        }
    }
    order(&mut simplex);
    SimplexResult { x: simplex[0].0, f: simplex[0].1, iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let r = nelder_mead(
            |x: &[f64; 2]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            [-1.2, 1.0],
            [0.1, 0.1],
            [Tol::Relative(1e-9); 2],
            10_000,
        );
        assert!(r.converged);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] - 1.0).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn quadratic_bowl_offset() {
        let r = nelder_mead(|x: &[f64; 2]| (x[0] - 3.0).powi(2) + 4.0 * (x[1] + 0.5).powi(2), [0.0, 0.0], [1.0, 1.0], [Tol::Absolute(1e-10); 2], 5000);
        assert!((r.x[0] - 3.0).abs() < 1e-8 && (r.x[1] + 0.5).abs() < 1e-8);
        assert!(r.f < 1e-15);
    }
}
