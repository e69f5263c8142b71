//! Derivative-free local search over real coordinates.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

/// One evaluation: the search minimises `score`; `value` and `residual` are
/// carried along for the trace.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Eval {
    pub score: f64,
    pub value: f64,
    pub residual: f64,
}

impl Eval {
    pub fn rejected() -> Self {
        Self {
            score: f64::INFINITY,
            value: f64::NAN,
            residual: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SearchParams {
    pub sweeps: usize,
    pub initial_step: f64,
    pub min_step: f64,
    pub tolerance: f64,
}

pub(crate) struct SearchOutcome {
    pub x: Vec<f64>,
    pub best: Eval,
    pub evaluations: u64,
    /// `(sweep, eval)` after every sweep that improved the score.
    pub improvements: Vec<(usize, Eval)>,
}

const MAX_STEP: f64 = 4.0;

/// Coordinate search with per-coordinate step sizes plus one random-direction
/// probe per sweep. A successful step doubles its size, a failed pair of
/// probes halves it. Stops after `sweeps` sweeps or once every step is below
/// `min_step`.
pub(crate) fn compass_search<R: Rng>(
    f: &mut dyn FnMut(&[f64]) -> Eval,
    x0: Vec<f64>,
    params: &SearchParams,
    rng: &mut R,
) -> SearchOutcome {
    let n = x0.len();
    let mut x = x0;
    let mut best = f(&x);
    let mut evaluations = 1u64;
    let mut improvements = Vec::new();
    if n == 0 {
        return SearchOutcome { x, best, evaluations, improvements };
    }
    let mut steps = vec![params.initial_step; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut trial = x.clone();

    for sweep in 0..params.sweeps {
        let before = best.score;
        order.shuffle(rng);
        for &i in &order {
            let s = steps[i];
            let mut moved = false;
            for sign in [1.0, -1.0] {
                trial[i] = x[i] + sign * s;
                let e = f(&trial);
                evaluations += 1;
                if e.score < best.score - params.tolerance {
                    x[i] = trial[i];
                    best = e;
                    moved = true;
                    break;
                }
            }
            trial[i] = x[i];
            steps[i] = if moved { (2.0 * s).min(MAX_STEP) } else { 0.5 * s };
        }

        let scale = steps.iter().sum::<f64>() / n as f64;
        let mut dir: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        dir.iter_mut().for_each(|d| *d *= scale / norm * (n as f64).sqrt());
        for sign in [1.0, -1.0] {
            for k in 0..n {
                trial[k] = x[k] + sign * dir[k];
            }
            let e = f(&trial);
            evaluations += 1;
            if e.score < best.score - params.tolerance {
                x.copy_from_slice(&trial);
                best = e;
                break;
            }
        }
        trial.copy_from_slice(&x);

        if best.score < before {
            improvements.push((sweep, best));
        }
        if steps.iter().all(|&s| s < params.min_step) {
            break;
        }
    }
    SearchOutcome { x, best, evaluations, improvements }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn params() -> SearchParams {
        SearchParams {
            sweeps: 500,
            initial_step: 0.5,
            min_step: 1e-9,
            tolerance: 0.0,
        }
    }

    #[test]
    fn minimises_a_shifted_quadratic() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let target = [0.3, -1.2, 2.5, 0.0];
        let mut f = |x: &[f64]| {
            let s: f64 = x.iter().zip(&target).map(|(a, b)| (a - b).powi(2)).sum();
            Eval { score: s, value: -s, residual: 0.0 }
        };
        let out = compass_search(&mut f, vec![0.0; 4], &params(), &mut rng);
        assert!(out.best.score < 1e-12, "{}", out.best.score);
        for (a, b) in out.x.iter().zip(&target) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(!out.improvements.is_empty());
    }

    #[test]
    fn handles_coupled_coordinates() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut f = |x: &[f64]| {
            let s = (x[0] + x[1] - 1.0).powi(2) + 0.01 * (x[0] - x[1]).powi(2);
            Eval { score: s, value: 0.0, residual: 0.0 }
        };
        let out = compass_search(&mut f, vec![3.0, -2.0], &params(), &mut rng);
        assert!(out.best.score < 1e-10);
    }

    #[test]
    fn is_deterministic_for_a_seed() {
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let mut f = |x: &[f64]| {
                let s = x.iter().map(|v| v.sin().powi(2) + 0.1 * v * v).sum::<f64>();
                Eval { score: s, value: 0.0, residual: 0.0 }
            };
            compass_search(&mut f, vec![1.0, 2.0, -0.5], &params(), &mut rng).x
        };
        assert_eq!(run(), run());
    }
}
