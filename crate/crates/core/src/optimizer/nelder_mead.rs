//! Box-constrained Nelder–Mead minimization. Trial points are projected
//! onto the box before evaluation.

use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options {
    pub ftol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn project(x: &mut [f64], lo: &[f64], hi: &[f64]) {
    for ((v, &l), &h) in x.iter_mut().zip(lo).zip(hi) {
        *v = v.clamp(l, h);
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b − a)
    a.iter().zip(b).map(|(&a, &b)| a + t * (b - a)).collect()
}

/// Minimizes `f` from `start` with initial edge lengths `steps`. A step
/// that would leave the box is taken in the opposite direction.
pub(crate) fn minimize(
    mut f: impl FnMut(&[f64]) -> Result<f64>,
    start: &[f64],
    steps: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: Options,
) -> Result<Minimum> {
    let n = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut x0 = start.to_vec();
    project(&mut x0, lo, hi);
    let f0 = f(&x0)?;
    simplex.push((x0.clone(), f0));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] = if x0[i] + steps[i] <= hi[i] { x0[i] + steps[i] } else { x0[i] - steps[i] };
        project(&mut x, lo, hi);
        let fx = f(&x)?;
        simplex.push((x, fx));
    }

    let eval = |x: Vec<f64>, f: &mut dyn FnMut(&[f64]) -> Result<f64>| -> Result<(Vec<f64>, f64)> {
        let mut x = x;
        project(&mut x, lo, hi);
        let v = f(&x)?;
        Ok((x, v))
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        // Stable sort keeps the tie order deterministic.
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[n].1 - simplex[0].1 <= opts.ftol {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflected = eval(affine(&centroid, &worst.0, -1.0), &mut f)?;
        if reflected.1 < simplex[0].1 {
            let expanded = eval(affine(&centroid, &worst.0, -2.0), &mut f)?;
            simplex[n] = if expanded.1 < reflected.1 { expanded } else { reflected };
            continue;
        }
        if reflected.1 < simplex[n - 1].1 {
            simplex[n] = reflected;
            continue;
        }
        let contracted = if reflected.1 < worst.1 {
            eval(affine(&centroid, &reflected.0, 0.5), &mut f)?
        } else {
            eval(affine(&centroid, &worst.0, 0.5), &mut f)?
        };
        if contracted.1 < worst.1.min(reflected.1) {
            simplex[n] = contracted;
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            *vertex = eval(affine(&best, &vertex.0, 0.5), &mut f)?;
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, fx) = simplex.swap_remove(0);
    Ok(Minimum {
        x,
        f: fx,
        iterations,
        converged,
    })
}
