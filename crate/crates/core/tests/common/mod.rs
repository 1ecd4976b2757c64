//! Reference computations that share no code with the crate under test.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre over `panels` equal pieces of [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(20);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        total += x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| wi * f(mid + 0.5 * h * xi))
            .sum::<f64>()
            * 0.5
            * h;
    }
    total
}

/// Composite Gauss–Legendre on panels that shrink geometrically toward both
/// endpoints, for integrands with algebraic endpoint singularities.
pub fn integrate_graded<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mut total = 0.0;
    for k in 0..60 {
        let (near, far) = (half * 0.5f64.powi(k + 1), half * 0.5f64.powi(k));
        total += integrate(&f, a + near, a + far, 4);
        total += integrate(&f, b - far, b - near, 4);
    }
    total
}

/// `ln Γ(x)` for `x > 0`: shift up past 15, then the Stirling series.
pub fn ln_gamma(mut x: f64) -> f64 {
    let mut shift = 0.0;
    while x < 15.0 {
        shift -= x.ln();
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    shift + (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + series
}

pub fn beta_pdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    ((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b))
        .exp()
}

/// `E[(X - v)^+]` for `X ~ Beta(a, b)` by quadrature (a, b > 0).
pub fn beta_ei_oracle(a: f64, b: f64, v: f64) -> f64 {
    let lo = v.clamp(0.0, 1.0);
    integrate_graded(|x| (x - v) * beta_pdf(a, b, x), lo, 1.0)
}

/// `I_x(a, b)` by quadrature of the density (a, b > 0).
pub fn reg_inc_beta_oracle(a: f64, b: f64, x: f64) -> f64 {
    integrate_graded(|t| beta_pdf(a, b, t), 0.0, x)
}

/// Standard normal CDF by quadrature of the density from -12.
pub fn normal_cdf_oracle(z: f64) -> f64 {
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    if z < -12.0 {
        return 0.0;
    }
    integrate(pdf, -12.0, z, 400)
}

/// Sample mean and standard error.
pub fn mean_se(xs: impl IntoIterator<Item = f64>) -> (f64, f64, usize) {
    let (mut n, mut s, mut s2) = (0usize, 0.0, 0.0);
    for x in xs {
        n += 1;
        s += x;
        s2 += x * x;
    }
    let m = s / n as f64;
    let var = ((s2 - n as f64 * m * m) / (n as f64 - 1.0)).max(0.0);
    (m, (var / n as f64).sqrt(), n)
}
