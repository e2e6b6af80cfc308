//! Finite-difference weights and one-dimensional quadrature rules.

/// Fornberg's recursion: weights for derivatives `0..=m` at `x0` using nodes
/// `xs`. Returns `w[d][j]`, the weight of node `j` in the `d`-th derivative.
pub fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Weights of a stencil given as integer offsets on a uniform grid of spacing `h`.
pub fn offset_weights(offsets: &[i64], h: f64, order: usize) -> Vec<f64> {
    let xs: Vec<f64> = offsets.iter().map(|&o| o as f64 * h).collect();
    fornberg(0.0, &xs, order)[order].clone()
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Interpolatory quadrature weights for `∫_{x_0}^{x_last} f` on sorted nodes:
/// each sub-interval integrates the degree-`deg` Lagrange interpolant built on
/// the `deg+1` nodes closest to it.
pub fn interpolatory_weights(xs: &[f64], deg: usize) -> Vec<f64> {
    let n = xs.len();
    assert!(n > deg, "need more nodes than the interpolation degree");
    let (gx, gw) = gauss_legendre(deg / 2 + 2);
    let mut w = vec![0.0; n];
    for seg in 0..n - 1 {
        let half = deg.div_ceil(2);
        let lo = seg.saturating_sub(half.saturating_sub(1)).min(n - 1 - deg);
        let nodes = &xs[lo..=lo + deg];
        let (a, b) = (xs[seg], xs[seg + 1]);
        let mid = 0.5 * (a + b);
        let rad = 0.5 * (b - a);
        for (&t, &gwt) in gx.iter().zip(&gw) {
            let x = mid + rad * t;
            for (p, &xp) in nodes.iter().enumerate() {
                let mut l = 1.0;
                for (q, &xq) in nodes.iter().enumerate() {
                    if q != p {
                        l *= (x - xq) / (xp - xq);
                    }
                }
                w[lo + p] += gwt * rad * l;
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_second_derivative_weights() {
        let w = offset_weights(&[-2, -1, 0, 1, 2], 1.0, 2);
        let expect = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn one_sided_third_order_first_derivative() {
        let w = offset_weights(&[0, 1, 2, 3], 1.0, 1);
        let expect = [-11.0 / 6.0, 3.0, -1.5, 1.0 / 3.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn interpolatory_rule_is_exact_for_quartics() {
        let xs: Vec<f64> = std::iter::once(0.0).chain((0..9).map(|i| (i as f64 + 0.5) * 0.1)).collect();
        let w = interpolatory_weights(&xs, 4);
        let b = *xs.last().unwrap();
        let s: f64 = xs.iter().zip(&w).map(|(x, wi)| wi * x.powi(4)).sum();
        assert!((s - b.powi(5) / 5.0).abs() < 1e-14);
    }
}
