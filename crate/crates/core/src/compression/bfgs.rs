//! Dense BFGS with a strong-Wolfe line search.

#[derive(Clone, Copy, Debug)]
pub struct BfgsOptions {
    /// Stop when `‖∇f‖_∞` falls below this.
    pub gtol: f64,
    pub max_iter: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            gtol: 1e-7,
            max_iter: 500,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BfgsResult {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_inf: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn step(x: &[f64], d: &[f64], a: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(x, d)| x + a * d).collect()
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

/// Returns `(alpha, f, g)` satisfying the strong Wolfe conditions, or `None`.
fn line_search<F>(fg: &F, x: &[f64], f0: f64, g0: &[f64], d: &[f64]) -> Option<(f64, f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let dphi0 = dot(g0, d);
    if dphi0 >= 0.0 {
        return None;
    }
    let mut a_prev = 0.0;
    let mut f_prev = f0;
    let mut dphi_prev = dphi0;
    let mut a = 1.0;
    for i in 0..30 {
        let (fa, ga) = fg(&step(x, d, a));
        if !fa.is_finite() {
            a = 0.5 * (a_prev + a);
            continue;
        }
        let dphi = dot(&ga, d);
        if fa > f0 + C1 * a * dphi0 || (i > 0 && fa >= f_prev) {
            return zoom(fg, x, d, f0, dphi0, (a_prev, f_prev, dphi_prev), (a, fa, dphi));
        }
        if dphi.abs() <= -C2 * dphi0 {
            return Some((a, fa, ga));
        }
        if dphi >= 0.0 {
            return zoom(fg, x, d, f0, dphi0, (a, fa, dphi), (a_prev, f_prev, dphi_prev));
        }
        a_prev = a;
        f_prev = fa;
        dphi_prev = dphi;
        a *= 2.0;
    }
    None
}

/// Bracket `lo`/`hi` are `(alpha, phi, phi')`.
fn zoom<F>(
    fg: &F,
    x: &[f64],
    d: &[f64],
    f0: f64,
    dphi0: f64,
    mut lo: (f64, f64, f64),
    mut hi: (f64, f64, f64),
) -> Option<(f64, f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for _ in 0..40 {
        // cubic interpolation, bisection when it lands too close to the ends
        let (a0, f0_, d0) = lo;
        let (a1, f1, d1) = hi;
        let d1_ = d0 + d1 - 3.0 * (f0_ - f1) / (a0 - a1);
        let disc = d1_ * d1_ - d0 * d1;
        let mut a = if disc >= 0.0 {
            let d2 = disc.sqrt().copysign(a1 - a0);
            a1 - (a1 - a0) * (d1 + d2 - d1_) / (d1 - d0 + 2.0 * d2)
        } else {
            f64::NAN
        };
        let (lo_a, hi_a) = (a0.min(a1), a0.max(a1));
        let margin = 0.1 * (hi_a - lo_a);
        if !a.is_finite() || a < lo_a + margin || a > hi_a - margin {
            a = 0.5 * (a0 + a1);
        }
        let (fa, ga) = fg(&step(x, d, a));
        let dphi = dot(&ga, d);
        if fa < f0 && best.as_ref().map_or(true, |b| fa < b.1) {
            best = Some((a, fa, ga.clone()));
        }
        if fa > f0 + C1 * a * dphi0 || fa >= lo.1 {
            hi = (a, fa, dphi);
        } else {
            if dphi.abs() <= -C2 * dphi0 {
                return Some((a, fa, ga));
            }
            if dphi * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = (a, fa, dphi);
        }
        if (hi.0 - lo.0).abs() < 1e-14 * lo.0.abs().max(1.0) {
            break;
        }
    }
    // Accept any sufficient decrease found rather than stalling.
    best.filter(|b| b.1 <= f0 + C1 * b.0 * dphi0)
}

/// Minimizes `f` given a closure returning value and gradient.
pub fn minimize<F>(fg: F, x0: Vec<f64>, opts: BfgsOptions) -> BfgsResult
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let m = x0.len();
    let mut x = x0;
    let (mut f, mut g) = fg(&x);
    if m == 0 || !f.is_finite() {
        return BfgsResult {
            grad_inf: inf_norm(&g),
            x,
            f,
            iterations: 0,
            converged: m == 0,
        };
    }
    // inverse Hessian approximation, row-major
    let mut h = vec![0.0; m * m];
    for i in 0..m {
        h[i * m + i] = 1.0;
    }
    let mut scaled = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        if inf_norm(&g) < opts.gtol {
            break;
        }
        let mut d: Vec<f64> = (0..m).map(|i| -dot(&h[i * m..(i + 1) * m], &g)).collect();
        if dot(&d, &g) >= 0.0 {
            // lost positive definiteness; restart from steepest descent
            h.iter_mut().for_each(|v| *v = 0.0);
            for i in 0..m {
                h[i * m + i] = 1.0;
            }
            d = g.iter().map(|v| -v).collect();
        }
        let Some((a, fa, ga)) = line_search(&fg, &x, f, &g, &d) else {
            break;
        };
        iterations += 1;
        let s: Vec<f64> = d.iter().map(|v| a * v).collect();
        let y: Vec<f64> = ga.iter().zip(&g).map(|(a, b)| a - b).collect();
        x = step(&x, &s, 1.0);
        f = fa;
        g = ga;
        let sy = dot(&s, &y);
        if sy <= 1e-300 {
            continue;
        }
        if !scaled {
            let gamma = sy / dot(&y, &y);
            h.iter_mut().for_each(|v| *v *= gamma);
            scaled = true;
        }
        let rho = 1.0 / sy;
        let hy: Vec<f64> = (0..m).map(|i| dot(&h[i * m..(i + 1) * m], &y)).collect();
        let yhy = dot(&y, &hy);
        for i in 0..m {
            for j in 0..m {
                h[i * m + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
            }
        }
    }
    let grad_inf = inf_norm(&g);
    BfgsResult {
        converged: grad_inf < opts.gtol,
        x,
        f,
        grad_inf,
        iterations,
    }
}
