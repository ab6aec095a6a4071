//! Gauss-Legendre rules.

use crate::scalar::Real;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[a, b]`.
pub fn gauss_legendre<T: Real>(n: usize, a: T, b: T) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let one = T::one();
    let two = T::from_f64_lossy(2.0);
    let half_len = (b - a) / two;
    let mid = (a + b) / two;
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::from_usize_lossy(n);
    let pi = T::from_f64_lossy(std::f64::consts::PI);
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let mut x = (pi * (T::from_usize_lossy(i) + T::from_f64_lossy(0.75)) / (nf + T::from_f64_lossy(0.5))).cos();
        let mut dp = one;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::from_f64_lossy(4.0) {
                let (_, d) = legendre(n, x);
                dp = d;
                break;
            }
        }
        let w = two / ((one - x * x) * dp * dp);
        nodes[i] = mid - half_len * x;
        nodes[n - 1 - i] = mid + half_len * x;
        weights[i] = w * half_len;
        weights[n - 1 - i] = w * half_len;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre<T: Real>(n: usize, x: T) -> (T, T) {
    let one = T::one();
    let mut p0 = one;
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((kf + kf - one) * x * p1 - (kf - one) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (one, T::zero());
    }
    let nf = T::from_usize_lossy(n);
    (p1, nf * (x * p1 - p0) / (x * x - one))
}
