//! Halton low-discrepancy sequence, used wherever sampling must be
//! reproducible without a seed (solver starts, witness search).

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
    97, 101, 103, 107, 109, 113, 127, 131,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Point `index` of the `dim`-dimensional Halton sequence in `[0, 1)^dim`.
/// Dimensions beyond the prime table wrap around with a scrambled index.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|k| {
            let base = PRIMES[k % PRIMES.len()] as u64;
            let idx = index + (k / PRIMES.len()) as u64 * 7919;
            radical_inverse(idx, base)
        })
        .collect()
}

/// Same point mapped to `[-1, 1)^dim`.
pub fn halton_centered(index: u64, dim: usize) -> Vec<f64> {
    halton(index, dim).into_iter().map(|x| 2.0 * x - 1.0).collect()
}

/// Deterministic direction on the unit sphere `S^{dim-1}`.
pub fn halton_direction(index: u64, dim: usize) -> Vec<f64> {
    let mut i = index;
    loop {
        let v = halton_centered(i + 1, dim);
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
        i += 10_007;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points() {
        assert_eq!(halton(1, 2), vec![0.5, 1.0 / 3.0]);
        assert_eq!(halton(2, 2), vec![0.25, 2.0 / 3.0]);
        assert_eq!(halton(0, 3), vec![0.0; 3]);
    }

    #[test]
    fn directions_are_unit() {
        for i in 0..50 {
            let d = halton_direction(i, 3);
            let n: f64 = d.iter().map(|x| x * x).sum();
            assert!((n - 1.0).abs() < 1e-12);
        }
    }
}
