//! Nelder–Mead downhill simplex over unbounded real parameters.

pub(crate) struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// Best value seen after each evaluation.
    pub history: Vec<f64>,
}

struct Tracked<F> {
    f: F,
    evals: usize,
    best_x: Vec<f64>,
    best: f64,
    history: Vec<f64>,
}

impl<F: FnMut(&[f64]) -> f64> Tracked<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        let v = (self.f)(x);
        self.evals += 1;
        if v < self.best {
            self.best = v;
            self.best_x = x.to_vec();
        }
        self.history.push(self.best);
        v
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `x0` with an axis-aligned initial simplex of edge
/// `step`. Stops after `max_evals` evaluations or once the simplex values
/// span less than `tol`. Returns the best point ever evaluated.
pub(crate) fn minimize<F>(f: F, x0: &[f64], step: f64, max_evals: usize, tol: f64) -> SimplexOutcome
where
    F: FnMut(&[f64]) -> f64,
{
    let dim = x0.len();
    let mut t = Tracked {
        f,
        evals: 0,
        best_x: x0.to_vec(),
        best: f64::INFINITY,
        history: Vec::new(),
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
    let v0 = t.eval(x0);
    simplex.push((x0.to_vec(), v0));
    for i in 0..dim {
        if t.evals >= max_evals {
            break;
        }
        let mut x = x0.to_vec();
        x[i] += step;
        let v = t.eval(&x);
        simplex.push((x, v));
    }

    while simplex.len() == dim + 1 && t.evals < max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[dim].1 - simplex[0].1 < tol {
            break;
        }
        let centroid: Vec<f64> = (0..dim)
            .map(|j| simplex[..dim].iter().map(|p| p.0[j]).sum::<f64>() / dim as f64)
            .collect();
        let worst = simplex[dim].clone();
        let along = |coef: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&worst.0)
                .map(|(c, w)| c + coef * (c - w))
                .collect()
        };

        let xr = along(REFLECT);
        let fr = t.eval(&xr);
        if fr < simplex[0].1 {
            if t.evals >= max_evals {
                simplex[dim] = (xr, fr);
                break;
            }
            let xe = along(EXPAND);
            let fe = t.eval(&xe);
            simplex[dim] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[dim - 1].1 {
            simplex[dim] = (xr, fr);
            continue;
        }
        if t.evals >= max_evals {
            break;
        }
        let (xc, fc) = if fr < worst.1 {
            let xc = along(CONTRACT);
            let fc = t.eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-CONTRACT);
            let fc = t.eval(&xc);
            (xc, fc)
        };
        if fc < fr.min(worst.1) {
            simplex[dim] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for p in simplex.iter_mut().skip(1) {
            if t.evals >= max_evals {
                break;
            }
            for (xj, bj) in p.0.iter_mut().zip(&best) {
                *xj = bj + SHRINK * (*xj - bj);
            }
            p.1 = t.eval(&p.0);
        }
    }

    SimplexOutcome {
        x: t.best_x,
        value: t.best,
        evals: t.evals,
        history: t.history,
    }
}
