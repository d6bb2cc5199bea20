//! Gauss–Legendre rules and deterministic summation.

use num_complex::Complex64;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes descending.
///
/// Newton iteration on `P_n` from the Tricomi initial guess. Exact for
/// polynomials of degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "at least one node required");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_and_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = x;
        weights[i] = w;
        nodes[n - 1 - i] = -x;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p_n, p_nm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p_n - p_nm1) / (x * x - 1.0);
    (p_n, d)
}

/// Pairwise summation in a fixed tree order.
///
/// The result depends only on the order of `values`, never on how they
/// were produced.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().fold(Complex64::new(0.0, 0.0), |a, &b| a + b);
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Real-valued counterpart of [`pairwise_sum`].
pub fn pairwise_sum_real(values: &[f64]) -> f64 {
    const LEAF: usize = 8;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum_real(&values[..mid]) + pairwise_sum_real(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_rule() {
        let (x, w) = gauss_legendre(2);
        assert_relative_eq!(x[0], 1.0 / 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(x[1], -1.0 / 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(w[0], 1.0, max_relative = 1e-15);
        assert_relative_eq!(w[1], 1.0, max_relative = 1e-15);
    }

    #[test]
    fn integrates_monomials_exactly() {
        for n in 1..40 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn nodes_are_interior_and_descending() {
        let (x, _) = gauss_legendre(65);
        assert!(x.windows(2).all(|p| p[0] > p[1]));
        assert!(x.iter().all(|v| v.abs() < 1.0));
    }

    #[test]
    fn pairwise_sum_matches_naive_on_exact_data() {
        let v: Vec<Complex64> = (0..1000).map(|i| Complex64::new(i as f64, -(i as f64))).collect();
        let s = pairwise_sum(&v);
        assert_eq!(s, Complex64::new(499_500.0, -499_500.0));
        assert_eq!(pairwise_sum(&[]), Complex64::new(0.0, 0.0));
    }
}
