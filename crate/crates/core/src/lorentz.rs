//! Minkowski bilinear form and orthochronous frames in any dimension
//! (`x[0]` is the time component).

use nalgebra::DMatrix;

/// `a0 b0 - sum_i ai bi`.
#[inline]
pub fn minkowski_dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = a[0] * b[0];
    for (x, y) in a[1..].iter().zip(&b[1..]) {
        s -= x * y;
    }
    s
}

/// Pure boost taking `e0` to the unit future-directed vector `u`
/// (`minkowski_dot(u, u) = 1`, `u[0] > 0`).
pub fn boost(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let g = u[0];
    let mut b = DMatrix::identity(n, n);
    b[(0, 0)] = g;
    for i in 1..n {
        b[(0, i)] = u[i];
        b[(i, 0)] = u[i];
        for j in 1..n {
            b[(i, j)] += u[i] * u[j] / (1.0 + g);
        }
    }
    b
}

/// Lorentz frame whose first column is the unit timelike vector `u`.
/// Past-directed `u` gets the negated boost of `-u`.
pub fn frame_for(u: &[f64]) -> DMatrix<f64> {
    if u[0] >= 0.0 {
        boost(u)
    } else {
        let neg: Vec<f64> = u.iter().map(|x| -x).collect();
        -boost(&neg)
    }
}

/// Normalize a timelike vector to unit Minkowski length. Returns the
/// unit vector and the Minkowski length, or `None` if not timelike.
pub fn unit_timelike(w: &[f64]) -> Option<(Vec<f64>, f64)> {
    let n2 = minkowski_dot(w, w);
    if n2 > 0.0 {
        let s = n2.sqrt();
        Some((w.iter().map(|x| x / s).collect(), s))
    } else {
        None
    }
}

/// `eta F^T eta`, the inverse of a Lorentz frame.
pub fn inverse_frame(f: &DMatrix<f64>) -> DMatrix<f64> {
    let n = f.nrows();
    let mut inv = f.transpose();
    for i in 0..n {
        for j in 0..n {
            if (i == 0) != (j == 0) {
                inv[(i, j)] = -inv[(i, j)];
            }
        }
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eta(n: usize) -> DMatrix<f64> {
        let mut e = DMatrix::identity(n, n);
        for i in 1..n {
            e[(i, i)] = -1.0;
        }
        e
    }

    #[test]
    fn boost_preserves_metric_and_maps_time_axis() {
        let (u, _) = unit_timelike(&[2.0, 0.3, -0.7, 1.1]).unwrap();
        let b = boost(&u);
        let e = eta(4);
        let lhs = b.transpose() * &e * &b;
        assert!((lhs - &e).abs().max() < 1e-12);
        for i in 0..4 {
            assert!((b[(i, 0)] - u[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn past_directed_frame() {
        let (u, _) = unit_timelike(&[-1.5, 0.2, 0.1, 0.0]).unwrap();
        let f = frame_for(&u);
        for i in 0..4 {
            assert!((f[(i, 0)] - u[i]).abs() < 1e-15);
        }
        let prod = inverse_frame(&f) * &f;
        assert!((prod - DMatrix::<f64>::identity(4, 4)).abs().max() < 1e-12);
    }

    #[test]
    fn null_and_spacelike_have_no_unit() {
        assert!(unit_timelike(&[1.0, 1.0, 0.0]).is_none());
        assert!(unit_timelike(&[0.0, 1.0, 0.0]).is_none());
    }
}
