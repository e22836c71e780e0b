//! Dense complex helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{LzsError, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest |a_ij - conj(a_ji)|.
pub fn hermiticity_defect(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..=i {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(a: &CMat) -> CMat {
    (a + a.adjoint()) * c(0.5)
}

pub fn max_abs(a: &CMat) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

/// ‖U†U − 1‖ in max-element norm.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - CMat::identity(n, n)))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// Real input (all imaginary parts exactly zero) goes through the real solver.
pub fn eigh(h: &CMat) -> (Vec<f64>, CMat) {
    let n = h.nrows();
    let real = h.iter().all(|z| z.im == 0.0);
    let (vals, vecs) = if real {
        let hr = h.map(|z| z.re);
        let e = SymmetricEigen::new(hr);
        (e.eigenvalues.as_slice().to_vec(), e.eigenvectors.map(c))
    } else {
        let e = SymmetricEigen::new(hermitize(h));
        (e.eigenvalues.as_slice().to_vec(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let sorted_vecs = CMat::from_fn(n, n, |r, col| vecs[(r, order[col])]);
    (sorted_vals, sorted_vecs)
}

/// Rotate each column so its largest-magnitude entry is real positive.
/// Ties within 1e-12 resolve to the lowest index.
pub fn fix_phases(v: &mut CMat) {
    for mut col in v.column_iter_mut() {
        let mut best = 0;
        let mut best_abs = -1.0;
        for (i, z) in col.iter().enumerate() {
            let a = z.norm();
            if a > best_abs + 1e-12 {
                best = i;
                best_abs = a;
            }
        }
        if best_abs > 0.0 {
            let phase = col[best].conj() / best_abs;
            col.iter_mut().for_each(|z| *z *= phase);
        }
    }
}

/// exp(−i·h·t) for Hermitian h.
pub fn expm_herm(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let n = h.nrows();
    let mut scaled = vecs.clone();
    for (j, e) in vals.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, -e * t);
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    scaled * vecs.adjoint()
}

/// Eigenvalues and unit right eigenvectors of a general square matrix,
/// via complex Schur form and back substitution.
pub fn eig(a: &CMat) -> Result<(Vec<Complex64>, CMat)> {
    let n = a.nrows();
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    let schur = Schur::try_new(a.clone(), 1e-15, 10_000)
        .ok_or_else(|| LzsError::Eigensolver("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();
    let vals: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut y = CMat::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = c(1.0);
        for j in (0..k).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for l in j + 1..=k {
                s += t[(j, l)] * y[(l, k)];
            }
            let mut d = t[(j, j)] - vals[k];
            if d.norm() < 1e-14 * scale {
                d = c(1e-14 * scale);
            }
            y[(j, k)] = -s / d;
        }
    }
    let mut v = q * y;
    for mut col in v.column_iter_mut() {
        let nrm = col.norm();
        col /= c(nrm);
    }
    Ok((vals, v))
}

/// Frobenius norm.
pub fn fro(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorts_and_orthonormal() {
        let h = CMat::from_row_slice(
            3,
            3,
            &[c(2.0), I, c(0.0), -I, c(1.0), c(0.5), c(0.0), c(0.5), c(3.0)],
        );
        let (vals, vecs) = eigh(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        assert!(unitarity_defect(&vecs) < 1e-12);
        let resid = &h * &vecs - &vecs * CMat::from_diagonal(&CVec::from_iterator(3, vals.iter().map(|&e| c(e))));
        assert!(max_abs(&resid) < 1e-12);
    }

    #[test]
    fn expm_is_unitary_and_matches_series() {
        let h = CMat::from_row_slice(2, 2, &[c(0.3), c(0.1), c(0.1), c(-0.2)]);
        let u = expm_herm(&h, 0.7);
        assert!(unitarity_defect(&u) < 1e-14);
        let x = &h * Complex64::new(0.0, -0.7);
        let mut term = CMat::identity(2, 2);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &x / c(k as f64);
            sum += &term;
        }
        assert!(max_abs(&(u - sum)) < 1e-14);
    }

    #[test]
    fn eig_general_residual() {
        let a = CMat::from_fn(5, 5, |i, j| Complex64::new((i * 7 + j * 3) as f64 % 5.0 - 2.0, (i as f64 - j as f64) * 0.3));
        let (vals, v) = eig(&a).unwrap();
        for k in 0..5 {
            let r = &a * v.column(k) - v.column(k) * vals[k];
            assert!(r.norm() < 1e-10, "residual {}", r.norm());
        }
    }

    #[test]
    fn phase_fix_makes_largest_real_positive() {
        let mut v = CMat::from_row_slice(2, 1, &[Complex64::new(0.0, 0.6), Complex64::new(0.0, -0.8)]);
        fix_phases(&mut v);
        assert!((v[(1, 0)] - c(0.8)).norm() < 1e-15);
    }
}
