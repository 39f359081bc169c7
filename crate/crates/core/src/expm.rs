//! Matrix exponential by scaling-and-squaring with Pade approximants.
//!
//! Follows Higham (2005), "The Scaling and Squaring Method for the Matrix
//! Exponential Revisited": pick the smallest Pade order in {3, 5, 7, 9, 13}
//! whose accuracy bound covers the 1-norm, otherwise scale down by a power
//! of two, apply Pade(13), and square back up.

use nalgebra::DMatrix;

const THETA_3: f64 = 1.495_585_217_958_292e-2;
const THETA_5: f64 = 2.539_398_330_063_23e-1;
const THETA_7: f64 = 9.504_178_996_162_932e-1;
const THETA_9: f64 = 2.097_847_961_257_068e0;
const THETA_13: f64 = 5.371_920_351_148_152e0;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves (V - U) X = (V + U).
fn pade_solve(u: DMatrix<f64>, v: DMatrix<f64>) -> DMatrix<f64> {
    let rhs = &v + &u;
    let lhs = v - u;
    lhs.lu()
        .solve(&rhs)
        .expect("Pade denominator of the matrix exponential is singular")
}

fn pade_low_order(a: &DMatrix<f64>, b: &[f64]) -> DMatrix<f64> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    // Even/odd polynomial split: U = A * sum b_{2k+1} A^{2k}, V = sum b_{2k} A^{2k}.
    let mut even = &id * b[0];
    let mut odd = &id * b[1];
    let mut power = id;
    for k in 1..=(b.len() - 1) / 2 {
        power = &power * &a2;
        even += &power * b[2 * k];
        if 2 * k + 1 < b.len() {
            odd += &power * b[2 * k + 1];
        }
    }
    pade_solve(a * odd, even)
}

fn pade_13(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let b = &B13;
    let u = a * (&a6 * (&a6 * b[13] + &a4 * b[11] + &a2 * b[9])
        + &a6 * b[7]
        + &a4 * b[5]
        + &a2 * b[3]
        + &id * b[1]);
    let v = &a6 * (&a6 * b[12] + &a4 * b[10] + &a2 * b[8])
        + &a6 * b[6]
        + &a4 * b[4]
        + &a2 * b[2]
        + &id * b[0];
    pade_solve(u, v)
}

/// exp(A) for a square real matrix.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    if norm <= THETA_3 {
        return pade_low_order(a, &B3);
    }
    if norm <= THETA_5 {
        return pade_low_order(a, &B5);
    }
    if norm <= THETA_7 {
        return pade_low_order(a, &B7);
    }
    if norm <= THETA_9 {
        return pade_low_order(a, &B9);
    }
    if norm <= THETA_13 {
        return pade_13(a);
    }
    let s = ((norm / THETA_13).log2().ceil()).max(0.0) as u32;
    let scaled = a / 2f64.powi(s as i32);
    let mut result = pade_13(&scaled);
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_of_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(4, 4);
        assert_eq!(expm(&z), DMatrix::identity(4, 4));
    }

    #[test]
    fn exp_of_diagonal() {
        let a = DMatrix::from_diagonal(&nalgebra::dvector![1.0, -2.0, 0.5]);
        let e = expm(&a);
        for (i, v) in [1.0f64, -2.0, 0.5].iter().enumerate() {
            assert_relative_eq!(e[(i, i)], v.exp(), max_relative = 1e-14);
        }
    }

    #[test]
    fn exp_of_rotation_generator() {
        // exp(t [[0, 1], [-1, 0]]) is a rotation by t.
        for t in [0.1, 1.0, std::f64::consts::FRAC_PI_2, 20.0] {
            let g = DMatrix::from_row_slice(2, 2, &[0.0, t, -t, 0.0]);
            let e = expm(&g);
            assert_relative_eq!(e[(0, 0)], t.cos(), epsilon = 1e-12);
            assert_relative_eq!(e[(0, 1)], t.sin(), epsilon = 1e-12);
            assert_relative_eq!(e[(1, 0)], -t.sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn exp_of_nilpotent_truncates() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.0, 0.0]);
        let e = expm(&a);
        assert_relative_eq!(e[(0, 1)], 3.0, epsilon = 1e-14);
        assert_relative_eq!(e[(0, 0)], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn additivity_on_commuting_arguments() {
        let a = DMatrix::from_row_slice(2, 2, &[0.3, 1.2, -0.7, 0.1]);
        let whole = expm(&(&a * 2.0));
        let half = expm(&a);
        assert_relative_eq!(whole, &half * &half, epsilon = 1e-12);
    }

    #[test]
    fn large_norm_uses_squaring() {
        let t = 50.0;
        let g = DMatrix::from_row_slice(2, 2, &[0.0, t, -t, 0.0]);
        let e = expm(&g);
        assert_relative_eq!(e[(0, 0)], t.cos(), epsilon = 1e-10);
    }
}
