//! Reference eigensolver for symmetric 3×3 matrices (cyclic Jacobi).
//!
//! Used by the verification suite and tests as an independent route for
//! checking the closed-form eigenvalue expressions elsewhere in the crate.
//! None of the solver paths call into this module.

/// Eigenvalues of a symmetric 3×3 matrix, ascending. The strict lower
/// triangle of `m` is ignored.
pub fn eigenvalues(m: [[f64; 3]; 3]) -> [f64; 3] {
    let mut a = m;
    // Symmetrize from the upper triangle.
    a[1][0] = a[0][1];
    a[2][0] = a[0][2];
    a[2][1] = a[1][2];

    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, &v| acc.max(v.abs()))
        .max(1e-300);

    for _sweep in 0..64 {
        let off = (a[0][1].powi(2) + a[0][2].powi(2) + a[1][2].powi(2)).sqrt();
        if off <= 1e-16 * scale {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq.abs() <= 1e-300 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            // Apply the rotation on both sides.
            let mut rotated = a;
            for k in 0..3 {
                rotated[p][k] = c * a[p][k] - s * a[q][k];
                rotated[q][k] = s * a[p][k] + c * a[q][k];
            }
            let b = rotated;
            for k in 0..3 {
                rotated[k][p] = c * b[k][p] - s * b[k][q];
                rotated[k][q] = s * b[k][p] + c * b[k][q];
            }
            a = rotated;
        }
    }

    let mut eigs = [a[0][0], a[1][1], a[2][2]];
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}

/// Spectral (operator) norm: largest absolute eigenvalue.
pub fn opnorm(m: [[f64; 3]; 3]) -> f64 {
    let e = eigenvalues(m);
    e[0].abs().max(e[2].abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_matrix_returns_sorted_diagonal() {
        let e = eigenvalues([[3.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 2.0]]);
        assert_eq!(e, [-1.0, 2.0, 3.0]);
    }

    #[test]
    fn known_two_by_two_block() {
        // [[1,2,0],[2,1,0],[0,0,1]] has eigenvalues {-1, 1, 3}.
        let e = eigenvalues([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!((e[0] + 1.0).abs() < 1e-14);
        assert!((e[1] - 1.0).abs() < 1e-14);
        assert!((e[2] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn trace_and_frobenius_are_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let a = rng.gen_range(-5.0..5.0);
            let d = rng.gen_range(-5.0..5.0);
            let f = rng.gen_range(-5.0..5.0);
            let b = rng.gen_range(-5.0..5.0);
            let c = rng.gen_range(-5.0..5.0);
            let e_ = rng.gen_range(-5.0..5.0);
            let m = [[a, b, c], [b, d, e_], [c, e_, f]];
            let eigs = eigenvalues(m);
            let trace = a + d + f;
            let frob = (a * a + d * d + f * f + 2.0 * (b * b + c * c + e_ * e_)).sqrt();
            let esum: f64 = eigs.iter().sum();
            let efrob = eigs.iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((esum - trace).abs() < 1e-12 * frob.max(1.0));
            assert!((efrob - frob).abs() < 1e-12 * frob.max(1.0));
        }
    }
}
