//! Dense linear-algebra kernels: symmetric eigendecomposition, time
//! demeaning, the factor rotation matrix and ordinary least squares.

use std::cell::Cell;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::error::ErrorKind;
use crate::qreg::numerical_rank;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("non-finite entry in matrix")]
    NonFinite,
    #[error("matrix is not square ({0} x {1})")]
    NotSquare(usize, usize),
    #[error("Gram matrix is numerically singular")]
    SingularGram,
    #[error("least-squares design is rank deficient (rank {rank} < {p})")]
    RankDeficient { rank: usize, p: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl SpectralError {
    pub(crate) fn kind(&self) -> ErrorKind {
        match self {
            SpectralError::NonFinite | SpectralError::DimensionMismatch(_) | SpectralError::NotSquare(..) => ErrorKind::Data,
            SpectralError::SingularGram | SpectralError::RankDeficient { .. } => ErrorKind::Numerical,
        }
    }
}

thread_local! {
    static SYM_EIG_CALLS: Cell<u64> = const { Cell::new(0) };
}

/// Number of [`sym_eig`] calls made so far on the current thread.
pub fn sym_eig_calls() -> u64 {
    SYM_EIG_CALLS.with(Cell::get)
}

/// Eigenvalues in descending order with matching orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// The input is symmetrized as `(S + S') / 2`. Eigenvalues are sorted in
/// descending order (stable, so exact ties keep their Jacobi order) and each
/// eigenvector is sign-fixed so that its entry of largest magnitude is
/// positive, the lowest index winning ties in magnitude.
pub fn sym_eig(s: &DMatrix<f64>) -> Result<EigenPairs, SpectralError> {
    SYM_EIG_CALLS.with(|c| c.set(c.get() + 1));
    let (n, m) = s.shape();
    if n != m {
        return Err(SpectralError::NotSquare(n, m));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    let mut a = (s + s.transpose()) * 0.5;
    let mut v = DMatrix::<f64>::identity(n, n);

    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let g = 100.0 * apq.abs();
                if (a[(p, p)].abs() + g == a[(p, p)].abs() && a[(q, q)].abs() + g == a[(q, q)].abs()) || apq.abs() < 1e-18 * scale {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| a[(i, i)]));
    let mut vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    for mut col in vectors.column_iter_mut() {
        let mut arg = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[arg].abs() {
                arg = i;
            }
        }
        if col[arg] < 0.0 {
            col.neg_mut();
        }
    }
    Ok(EigenPairs { values, vectors })
}

/// Right-multiplies by `M_T = I - 1 1' / T`, i.e. removes each row's mean.
pub fn demean_time(y: &DMatrix<f64>) -> DMatrix<f64> {
    let t = y.ncols();
    let mut out = y.clone();
    if t == 0 {
        return out;
    }
    for mut row in out.row_iter_mut() {
        let mean = row.sum() / t as f64;
        row.add_scalar_mut(-mean);
    }
    out
}

/// Row means of `Y`, i.e. `Y 1 / T`.
pub fn time_mean(y: &DMatrix<f64>) -> DVector<f64> {
    let t = y.ncols().max(1) as f64;
    DVector::from_iterator(y.nrows(), y.row_iter().map(|r| r.sum() / t))
}

/// `H = (F' M_T F_hat)(F_hat' M_T F_hat)^{-1}`.
pub fn rotation_h(f_true: &DMatrix<f64>, f_hat: &DMatrix<f64>) -> Result<DMatrix<f64>, SpectralError> {
    if f_true.nrows() != f_hat.nrows() {
        return Err(SpectralError::DimensionMismatch(format!("F has {} rows, F_hat has {}", f_true.nrows(), f_hat.nrows())));
    }
    // demean columns over time
    let ft = demean_time(&f_true.transpose());
    let fh = demean_time(&f_hat.transpose());
    let cross = &ft * fh.transpose();
    let gram = &fh * fh.transpose();
    let inv = invert_gram(&gram)?;
    Ok(cross * inv)
}

/// Inverse of a symmetric positive semi-definite Gram matrix, failing when
/// it is numerically singular.
pub fn invert_gram(g: &DMatrix<f64>) -> Result<DMatrix<f64>, SpectralError> {
    if g.iter().any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    if g.nrows() == 0 || numerical_rank(g) < g.nrows() {
        return Err(SpectralError::SingularGram);
    }
    g.clone().try_inverse().ok_or(SpectralError::SingularGram)
}

/// Least-squares coefficients of `y` on `X` (with a leading constant when
/// `intercept` is set; its coefficient comes first).
pub fn ols(x: &DMatrix<f64>, y: &DVector<f64>, intercept: bool) -> Result<DVector<f64>, SpectralError> {
    let y = DMatrix::from_column_slice(y.len(), 1, y.as_slice());
    Ok(ols_multi(x, &y, intercept)?.column(0).into_owned())
}

/// Least squares with several response columns sharing one design. Returns
/// a `p x m` coefficient matrix.
pub fn ols_multi(x: &DMatrix<f64>, y: &DMatrix<f64>, intercept: bool) -> Result<DMatrix<f64>, SpectralError> {
    if x.nrows() != y.nrows() {
        return Err(SpectralError::DimensionMismatch(format!("X has {} rows, y has {}", x.nrows(), y.nrows())));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite);
    }
    let design = if intercept { x.clone().insert_column(0, 1.0) } else { x.clone() };
    let p = design.ncols();
    let rank = if design.nrows() >= p { numerical_rank(&design) } else { design.nrows() };
    if p == 0 || rank < p {
        return Err(SpectralError::RankDeficient { rank, p });
    }
    let qr = design.qr();
    let qty = qr.q().transpose() * y;
    qr.r().solve_upper_triangular(&qty).ok_or(SpectralError::RankDeficient { rank: p - 1, p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn random_sym(n: usize, seed: u64) -> DMatrix<f64> {
        let mut s = Stream::new(seed);
        let a = DMatrix::from_fn(n, n, |_, _| s.normal());
        &a + a.transpose()
    }

    #[test]
    fn diagonal() {
        let e = sym_eig(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 3.0]))).unwrap();
        assert_eq!(e.values.as_slice(), &[3.0, 1.0]);
        assert_eq!(e.vectors, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn classic_two_by_two() {
        let e = sym_eig(&DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0])).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let expect = DMatrix::from_row_slice(2, 2, &[r, r, r, -r]);
        assert!((e.vectors - expect).abs().max() < 1e-14);
    }

    #[test]
    fn residual_and_orthonormality() {
        for seed in 0..20 {
            let s = random_sym(6, seed);
            let e = sym_eig(&s).unwrap();
            let norm = s.norm();
            for k in 0..6 {
                let v = e.vectors.column(k);
                assert!((&s * v - v * e.values[k]).norm() <= 1e-10 * norm);
            }
            let vtv = e.vectors.transpose() * &e.vectors;
            assert!((vtv - DMatrix::identity(6, 6)).abs().max() <= 1e-12);
            assert!((e.values.sum() - s.trace()).abs() <= 1e-10 * (1.0 + s.trace().abs()));
            assert!(e.values.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn sign_convention() {
        let e = sym_eig(&random_sym(8, 42)).unwrap();
        for col in e.vectors.column_iter() {
            let (arg, _) = col.iter().enumerate().fold((0, 0.0f64), |(ai, am), (i, x)| if x.abs() > am { (i, x.abs()) } else { (ai, am) });
            assert!(col[arg] > 0.0);
        }
    }

    #[test]
    fn counts_calls() {
        let before = sym_eig_calls();
        sym_eig(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(sym_eig_calls(), before + 1);
    }

    #[test]
    fn non_finite() {
        assert_eq!(sym_eig(&DMatrix::from_element(2, 2, f64::NAN)).unwrap_err(), SpectralError::NonFinite);
    }

    #[test]
    fn demean() {
        assert_eq!(demean_time(&DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 3.0])), DMatrix::from_row_slice(1, 3, &[-1.0, 0.0, 1.0]));
        assert_eq!(demean_time(&DMatrix::from_element(2, 4, 3.5)), DMatrix::zeros(2, 4));
        let mut s = Stream::new(3);
        let y = DMatrix::from_fn(4, 9, |_, _| s.normal());
        let d = demean_time(&y);
        for row in d.row_iter() {
            assert!(row.sum().abs() <= 1e-12 * y.norm());
        }
        let dd = demean_time(&d);
        assert!((dd - &d).abs().max() <= 1e-15);
    }

    #[test]
    fn rotation() {
        let mut s = Stream::new(4);
        let f = DMatrix::from_fn(30, 3, |_, _| s.normal());
        let h = rotation_h(&f, &f).unwrap();
        assert!((h - DMatrix::identity(3, 3)).abs().max() < 1e-12);
        let h = rotation_h(&f, &(&f * 2.0)).unwrap();
        assert!((h - DMatrix::identity(3, 3) * 0.5).abs().max() < 1e-12);
        let r1 = DMatrix::from_fn(3, 3, |_, _| s.normal());
        let r2 = DMatrix::from_fn(3, 3, |_, _| s.normal());
        let h = rotation_h(&f, &(&f * &r1)).unwrap();
        let expect = r1.clone().try_inverse().unwrap().transpose();
        assert!((h - expect).abs().max() < 1e-10);
        let h = rotation_h(&f, &(&f * &r1 * &r2)).unwrap();
        // ((R1 R2)')^{-1} = (R1^{-1})' (R2^{-1})'
        let expect = r1.try_inverse().unwrap().transpose() * r2.try_inverse().unwrap().transpose();
        let scale = expect.abs().max();
        assert!((h - &expect).abs().max() < 1e-10 * scale.max(1.0));
        let flat = DMatrix::from_element(30, 1, 1.0);
        assert_eq!(rotation_h(&f.columns(0, 1).into_owned(), &flat).unwrap_err(), SpectralError::SingularGram);
    }

    #[test]
    fn least_squares() {
        let x = DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 2.0, 3.0]);
        let y = DVector::from_iterator(4, x.iter().map(|v| 2.0 + 3.0 * v));
        let b = ols(&x, &y, true).unwrap();
        assert!((b[0] - 2.0).abs() < 1e-12 && (b[1] - 3.0).abs() < 1e-12);

        let x = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let y = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(ols(&x, &y, false).unwrap()[0], 0.0);

        let mut s = Stream::new(5);
        let x = DMatrix::from_fn(40, 4, |_, _| s.normal());
        let y = DVector::from_fn(40, |_, _| s.normal());
        let b = ols(&x, &y, false).unwrap();
        let resid = &y - &x * &b;
        assert!((x.transpose() * resid).amax() < 1e-10);

        let dup = DMatrix::from_fn(10, 2, |i, _| i as f64);
        assert!(matches!(ols(&dup, &DVector::zeros(10), true), Err(SpectralError::RankDeficient { .. })));
    }
}
