//! Reference computations that share no code with `conrelax`: brute-force
//! projections, a classical RK4 integrator and closed-form PDE solutions.
//! Everything is plain `f64`.

pub mod planar;

/// Nearest point of a closed convex plane set `{y : inside(y)}` to `x`,
/// using nothing but the membership test.
///
/// The boundary is sampled along rays from `interior` (a point of the
/// interior), each crossing located by bisection out to `reach`; the best of
/// `rays` directions is then refined by golden-section search in the angle.
/// Points at `reach` stand in for rays that never leave the set.
pub fn grid_search_projection_2d(
    inside: impl Fn(&[f64]) -> bool,
    interior: [f64; 2],
    x: &[f64],
    reach: f64,
    rays: usize,
) -> [f64; 2] {
    if inside(x) {
        return [x[0], x[1]];
    }
    let boundary = |theta: f64| -> [f64; 2] {
        let dir = [theta.cos(), theta.sin()];
        let at = |s: f64| [interior[0] + s * dir[0], interior[1] + s * dir[1]];
        if inside(&at(reach)) {
            return at(reach);
        }
        let (mut lo, mut hi) = (0.0, reach);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if inside(&at(mid)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        at(lo)
    };
    let gap = |theta: f64| {
        let p = boundary(theta);
        (p[0] - x[0]).hypot(p[1] - x[1])
    };
    let step = std::f64::consts::TAU / rays as f64;
    let best = (0..rays)
        .map(|i| i as f64 * step)
        .min_by(|a, b| gap(*a).total_cmp(&gap(*b)))
        .expect("at least one ray");
    let (mut a, mut b) = (best - step, best + step);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if gap(c) < gap(d) {
            b = d;
        } else {
            a = c;
        }
    }
    boundary(0.5 * (a + b))
}

/// Classical fourth-order Runge-Kutta for `y' = f(t, y)` over `[0, t_end]`.
pub fn rk4(f: impl Fn(f64, &[f64]) -> Vec<f64>, y0: &[f64], t_end: f64, steps: usize) -> Vec<f64> {
    let h = t_end / steps as f64;
    let axpy = |y: &[f64], a: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(y, k)| y + a * k).collect() };
    let mut y = y0.to_vec();
    let mut t = 0.0;
    for _ in 0..steps {
        let k1 = f(t, &y);
        let k2 = f(t + h / 2.0, &axpy(&y, h / 2.0, &k1));
        let k3 = f(t + h / 2.0, &axpy(&y, h / 2.0, &k2));
        let k4 = f(t + h, &axpy(&y, h, &k3));
        for i in 0..y.len() {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
    }
    y
}

/// Solution of `vₜ − c wₓ = 0`, `wₜ − c vₓ = 0` on the line.
///
/// `v + w` travels left and `v − w` travels right at speed `c`.
pub fn wave_exact(v0: impl Fn(f64) -> f64, w0: impl Fn(f64) -> f64, c: f64, t: f64, x: f64) -> [f64; 2] {
    let left = v0(x + c * t) + w0(x + c * t);
    let right = v0(x - c * t) - w0(x - c * t);
    [(left + right) / 2.0, (left - right) / 2.0]
}

/// `uₜ = η uₓₓ` from `u₀ = A·exp(−x²/(2σ²))`.
pub fn gaussian_heat(amplitude: f64, sigma: f64, eta: f64, t: f64, x: f64) -> f64 {
    let s2 = sigma * sigma + 2.0 * eta * t;
    amplitude * sigma / s2.sqrt() * (-x * x / (2.0 * s2)).exp()
}

/// `C^∞` bump `exp(1 − 1/(1 − (x/r)²))` on `|x| < r`, zero elsewhere.
pub fn smooth_bump(x: f64, r: f64) -> f64 {
    let s = x / r;
    if s.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn observed_order(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_search_finds_disc_projection() {
        let p = grid_search_projection_2d(|y| y[0] * y[0] + y[1] * y[1] <= 1.0, [0.0, 0.0], &[3.0, 4.0], 100.0, 720);
        assert!((p[0] - 0.6).abs() < 1e-6 && (p[1] - 0.8).abs() < 1e-6);
        let q = grid_search_projection_2d(|y| y[1] <= 1.0, [0.0, 0.0], &[2.0, 3.0], 1e3, 720);
        assert!((q[0] - 2.0).abs() < 1e-6 && (q[1] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rk4_exponential() {
        let y = rk4(|_, y| vec![-y[0]], &[1.0], 1.0, 100);
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn wave_exact_initial_and_energy() {
        let v0 = |x: f64| (-x * x).exp();
        let w0 = |x: f64| 0.5 * (-(x - 1.0) * (x - 1.0)).exp();
        let [v, w] = wave_exact(v0, w0, 2.0, 0.0, 0.3);
        assert!((v - v0(0.3)).abs() < 1e-15 && (w - w0(0.3)).abs() < 1e-15);
    }

    #[test]
    fn heat_mass_conserved() {
        let mass = |t: f64| -> f64 { (-4000..4000).map(|i| gaussian_heat(1.0, 0.2, 0.1, t, i as f64 * 1e-3) * 1e-3).sum() };
        assert!((mass(0.0) - mass(1.0)).abs() < 1e-9);
    }

    #[test]
    fn order_of_exact_power_law() {
        let hs = [0.1, 0.05, 0.025];
        let errs: Vec<f64> = hs.iter().map(|h: &f64| 3.0 * h.powi(2)).collect();
        assert!((observed_order(&hs, &errs) - 2.0).abs() < 1e-12);
    }
}
