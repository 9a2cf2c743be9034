//! Quadrature rules, local interpolation and small least-squares fits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => {
            let h = (b - a) / (n - 1) as f64;
            let mut v: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
            v[n - 1] = b;
            v
        }
    }
}

/// Composite trapezoid weights for arbitrary increasing nodes.
pub fn trapezoid_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = nodes[i + 1] - nodes[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// Gauss–Legendre nodes and weights on `[a, b]`, nodes increasing.
pub fn gauss_legendre(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = (b - a) / 2.0;
    let mid = (b + a) / 2.0;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        dp = if d.is_finite() { d } else { dp };
        let weight = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = mid - half * z;
        x[n - 1 - i] = mid + half * z;
        w[i] = half * weight;
        w[n - 1 - i] = half * weight;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Start of the window of `width` consecutive nodes best centred on `x`.
pub fn window_start(nodes: &[f64], x: f64, width: usize) -> usize {
    let n = nodes.len();
    if n <= width {
        return 0;
    }
    let upper = nodes.partition_point(|&t| t <= x); // first node > x
    let start = upper.saturating_sub(width / 2);
    start.min(n - width)
}

/// Value and first derivative at `x` of the local Lagrange interpolant of
/// degree `min(3, n-1)` through the nodes nearest to `x`.
pub fn cubic_local(nodes: &[f64], values: &[Complex64], x: f64) -> (Complex64, Complex64) {
    debug_assert_eq!(nodes.len(), values.len());
    let width = nodes.len().min(4);
    let s = window_start(nodes, x, width);
    lagrange(&nodes[s..s + width], &values[s..s + width], x)
}

/// Value and derivative of the Lagrange polynomial through `(xs, ys)` at `x`.
pub fn lagrange(xs: &[f64], ys: &[Complex64], x: f64) -> (Complex64, Complex64) {
    let width = xs.len();
    let mut value = Complex64::new(0.0, 0.0);
    let mut deriv = Complex64::new(0.0, 0.0);
    for j in 0..width {
        let mut lj = 1.0;
        for m in 0..width {
            if m != j {
                lj *= (x - xs[m]) / (xs[j] - xs[m]);
            }
        }
        let mut dlj = 0.0;
        for k in 0..width {
            if k == j {
                continue;
            }
            let mut term = 1.0 / (xs[j] - xs[k]);
            for m in 0..width {
                if m != j && m != k {
                    term *= (x - xs[m]) / (xs[j] - xs[m]);
                }
            }
            dlj += term;
        }
        value += ys[j] * lj;
        deriv += ys[j] * dlj;
    }
    (value, deriv)
}

pub fn cubic_local_real(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let v: Vec<Complex64> = values.iter().map(|&y| Complex64::new(y, 0.0)).collect();
    cubic_local(nodes, &v, x).0.re
}

// Gauss–Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod quadrature on a finite interval.
pub fn integrate_adaptive(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    let mut stack = vec![(a, b, 0u32)];
    let mut total = 0.0;
    let mut evaluations = 0usize;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (val, err) = gk15(&mut f, lo, hi);
        evaluations += 15;
        let local_tol = abs_tol * (hi - lo) / (b - a);
        if err <= local_tol.max(1e-300) || depth >= 50 {
            total += val;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, depth + 1));
            stack.push((mid, hi, depth + 1));
        }
        if evaluations > 5_000_000 {
            return Err(Error::ExtrapolationFailed(
                "adaptive quadrature did not converge".into(),
            ));
        }
    }
    Ok(total)
}

/// Adaptive quadrature over the whole real line via `x = t / (1 - t²)`.
pub fn integrate_real_line(mut f: impl FnMut(f64) -> f64, abs_tol: f64) -> Result<f64> {
    integrate_adaptive(
        |t| {
            let d = 1.0 - t * t;
            let x = t / d;
            let jac = (1.0 + t * t) / (d * d);
            let v = f(x) * jac;
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        -1.0,
        1.0,
        abs_tol,
    )
}

/// Least-squares polynomial fit; returns coefficients (constant first) and
/// the RMS residual.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<(Vec<f64>, f64)> {
    if xs.len() != ys.len() || xs.len() < degree + 1 {
        return Err(Error::ExtrapolationFailed(format!(
            "need at least {} points for a degree-{degree} fit, got {}",
            degree + 1,
            xs.len()
        )));
    }
    let m = xs.len();
    let a = DMatrix::from_fn(m, degree + 1, |i, j| xs[i].powi(j as i32));
    let y = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let coeffs = svd
        .solve(&y, 1e-14)
        .map_err(|e| Error::ExtrapolationFailed(format!("least-squares solve failed: {e}")))?;
    let resid = &a * &coeffs - &y;
    let rms = (resid.norm_squared() / m as f64).sqrt();
    if !rms.is_finite() || coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::ExtrapolationFailed("non-finite fit".into()));
    }
    Ok((coeffs.iter().copied().collect(), rms))
}

/// Slope of `log y` against `log x` by least squares.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::ExtrapolationFailed("log-log fit needs positive finite data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (c, _) = polyfit(&lx, &ly, 1)?;
    Ok(c[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(-1.0, 2.0, 5);
        // degree 9 is exact for 5 nodes
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        let exact = (2f64.powi(10) - 1.0) / 10.0;
        assert!((integral - exact).abs() < 1e-11);
        assert!(x.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics() {
        let nodes = linspace(0.0, 1.0, 9);
        let f = |x: f64| 2.0 * x.powi(3) - x + 0.5;
        let vals: Vec<Complex64> = nodes.iter().map(|&x| Complex64::new(f(x), -f(x))).collect();
        for x in [0.0, 0.13, 0.5, 0.77, 1.0] {
            let (v, d) = cubic_local(&nodes, &vals, x);
            assert!((v.re - f(x)).abs() < 1e-13);
            assert!((v.im + f(x)).abs() < 1e-13);
            assert!((d.re - (6.0 * x * x - 1.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn adaptive_quadrature_handles_peaks() {
        let g = 1e-3;
        let v = integrate_real_line(|x| g / (x * x + g * g), 1e-12).unwrap();
        assert!((v - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn polyfit_recovers_quadratic() {
        let xs = [0.1, 0.2, 0.3, 0.4, 0.5];
        let ys: Vec<f64> = xs.iter().map(|x| 1.5 - 2.0 * x + 0.25 * x * x).collect();
        let (c, rms) = polyfit(&xs, &ys, 2).unwrap();
        assert!((c[0] - 1.5).abs() < 1e-12 && (c[1] + 2.0).abs() < 1e-11 && (c[2] - 0.25).abs() < 1e-10);
        assert!(rms < 1e-13);
    }
}
