use alloc::vec;
use alloc::vec::Vec;

/// Stopping rules for [`nelder_mead`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexOptions {
    pub max_evals: usize,
    /// Edge length of the initial simplex along each coordinate.
    pub initial_step: f64,
    /// Converged once the spread of simplex costs is below `f_tol` and every
    /// vertex lies within `x_tol` of the best one.
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self {
            max_evals: 4000,
            initial_step: 0.1,
            f_tol: 1e-10,
            x_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub cost: f64,
    pub evals: usize,
    pub converged: bool,
}

/// Derivative-free Nelder–Mead minimization with the standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2). Non-finite
/// costs are treated as +∞.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], opts: &SimplexOptions) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    if n == 0 {
        let c = eval(x0, &mut evals);
        return SimplexResult {
            x: Vec::new(),
            cost: c,
            evals,
            converged: true,
        };
    }

    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    pts.push(x0.to_vec());
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += opts.initial_step;
        pts.push(p);
    }
    let mut costs: Vec<f64> = pts.iter().map(|p| eval(p, &mut evals)).collect();
    let mut converged = false;
    let mut centroid = vec![0.0; n];
    let mut trial = vec![0.0; n];
    let mut trial2 = vec![0.0; n];

    while evals < opts.max_evals {
        // Order vertices by cost; ties keep earlier vertices first.
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
        pts = idx.iter().map(|&i| pts[i].clone()).collect();
        costs = idx.iter().map(|&i| costs[i]).collect();

        let spread = costs[n] - costs[0];
        let size = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && size <= opts.x_tol {
            converged = true;
            break;
        }

        centroid.iter_mut().for_each(|c| *c = 0.0);
        for p in &pts[..n] {
            for (c, v) in centroid.iter_mut().zip(p) {
                *c += v / n as f64;
            }
        }
        let worst = pts[n].clone();
        for i in 0..n {
            trial[i] = centroid[i] + (centroid[i] - worst[i]);
        }
        let fr = eval(&trial, &mut evals);
        if fr < costs[0] {
            for i in 0..n {
                trial2[i] = centroid[i] + 2.0 * (centroid[i] - worst[i]);
            }
            let fe = eval(&trial2, &mut evals);
            if fe < fr {
                pts[n].copy_from_slice(&trial2);
                costs[n] = fe;
            } else {
                pts[n].copy_from_slice(&trial);
                costs[n] = fr;
            }
            continue;
        }
        if fr < costs[n - 1] {
            pts[n].copy_from_slice(&trial);
            costs[n] = fr;
            continue;
        }
        // Contraction, outside when the reflection improved on the worst.
        let outside = fr < costs[n];
        for i in 0..n {
            trial2[i] = if outside {
                centroid[i] + 0.5 * (trial[i] - centroid[i])
            } else {
                centroid[i] + 0.5 * (worst[i] - centroid[i])
            };
        }
        let fc = eval(&trial2, &mut evals);
        if fc < fr.min(costs[n]) {
            pts[n].copy_from_slice(&trial2);
            costs[n] = fc;
            continue;
        }
        let best = pts[0].clone();
        for j in 1..=n {
            for i in 0..n {
                pts[j][i] = best[i] + 0.5 * (pts[j][i] - best[i]);
            }
            costs[j] = eval(&pts[j], &mut evals);
        }
    }

    let (bi, _) = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    SimplexResult {
        x: pts[bi].clone(),
        cost: costs[bi],
        evals,
        converged,
    }
}
