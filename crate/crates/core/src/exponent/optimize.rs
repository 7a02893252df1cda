//! One-dimensional maximization: uniform grid, zoom rounds, golden section.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INV_PHI: f64 = 0.618_033_988_749_894_8;
const GOLDEN_MAX_ITERS: usize = 200;

/// Maximizes `f` over `[lo, hi]`.
///
/// Each round evaluates a uniform grid of `steps` points (endpoints
/// included) and shrinks the bracket to the neighbours of the best point.
/// A golden-section search on the final bracket runs until its width falls
/// below `xtol`. Ties keep the smallest argument. Returns `(argmax, max)`.
pub(crate) fn maximize<F>(mut f: F, lo: f64, hi: f64, steps: usize, rounds: usize, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(lo <= hi);
    if hi - lo <= xtol {
        let x = lo;
        return (x, f(x));
    }
    let steps = steps.max(3);
    let (mut a, mut b) = (lo, hi);
    let mut best = (lo, f64::NEG_INFINITY);
    for _ in 0..rounds.max(1) {
        let h = (b - a) / (steps - 1) as f64;
        let mut idx = 0;
        let mut round_best = f64::NEG_INFINITY;
        for i in 0..steps {
            let x = if i + 1 == steps { b } else { a + h * i as f64 };
            let v = f(x);
            if v > round_best {
                round_best = v;
                idx = i;
            }
        }
        let x = if idx + 1 == steps { b } else { a + h * idx as f64 };
        if round_best > best.1 {
            best = (x, round_best);
        }
        let na = if idx == 0 { a } else { a + h * (idx - 1) as f64 };
        let nb = if idx + 1 >= steps - 1 { b } else { a + h * (idx + 1) as f64 };
        a = na;
        b = nb;
        if b - a <= xtol {
            break;
        }
    }
    let g = golden_max(&mut f, a, b, xtol);
    if g.1 > best.1 {
        g
    } else {
        best
    }
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub(crate) fn golden_max<F>(f: &mut F, mut a: f64, mut b: f64, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iters = 0;
    while b - a > xtol && iters < GOLDEN_MAX_ITERS {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iters += 1;
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    let mut w: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= s);
    w
}

/// Multi-start projected gradient ascent of `value` over the simplex.
///
/// The gradient is a central difference along each coordinate. Starts are
/// the supplied seeds followed by deterministic pseudorandom points, up to
/// `starts` in total.
pub(crate) fn simplex_ascent<F>(mut value: F, n: usize, seeds: &[Vec<f64>], starts: usize) -> (Vec<f64>, f64)
where
    F: FnMut(&[f64]) -> f64,
{
    const MAX_ITERS: usize = 60;
    const FD_STEP: f64 = 1e-5;
    const MIN_STEP: f64 = 1e-10;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_5171);
    let mut points: Vec<Vec<f64>> = seeds.iter().take(starts).cloned().collect();
    while points.len() < starts.max(1) {
        let w: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
        let s: f64 = w.iter().sum();
        points.push(w.into_iter().map(|x| x / s).collect());
    }

    let mut best = (points[0].clone(), f64::NEG_INFINITY);
    for start in points {
        let mut p = start;
        let mut fp = value(&p);
        let mut step = 0.5;
        for _ in 0..MAX_ITERS {
            let grad: Vec<f64> = (0..n)
                .map(|i| {
                    let up = (p[i] + FD_STEP).min(1.0);
                    let down = (p[i] - FD_STEP).max(0.0);
                    let mut q = p.clone();
                    q[i] = up;
                    let fu = value(&q);
                    q[i] = down;
                    let fd = value(&q);
                    (fu - fd) / (up - down)
                })
                .collect();
            let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if !(norm > 0.0) {
                break;
            }
            let mut improved = false;
            while step > MIN_STEP {
                let cand: Vec<f64> = p.iter().zip(&grad).map(|(x, g)| x + step * g / norm).collect();
                let cand = project_simplex(&cand);
                let fc = value(&cand);
                if fc > fp {
                    p = cand;
                    fp = fc;
                    improved = true;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if fp > best.1 {
            best = (p, fp);
        }
    }
    best
}
