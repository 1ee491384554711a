//! Complex and composite-real linear-algebra kernels.
//!
//! Widely linear processing of one-dimensionally modulated signals works in
//! the composite-real domain: a complex precoder column in `C^M` becomes a
//! real vector in `R^{2M}` and the effective channel acts on it through a
//! widened real matrix. The two maps used throughout the crate are
//!
//! * `t1_stack`:  `U -> [Re{U}; Im{U}]`        (M x K  -> 2M x K)
//! * `t2_widen`:  `H -> [Re{H}, -Im{H}]`       (K x M  -> K x 2M)
//!
//! which satisfy `t2_widen(H) * t1_stack(U) = Re{H U}` entrywise. A third
//! map, `composite_row`, uses `+Im` and carries the real inner product
//! `Re{h_k h_j^H} = hbar_k hbar_j^T` used by the orthogonality arguments.

use nalgebra::{Cholesky, DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, WlbcError};

/// Complex matrix with dynamically sized dimensions.
pub type CMat = DMatrix<Complex64>;
/// Real matrix with dynamically sized dimensions.
pub type RMat = DMatrix<f64>;
/// Real column vector.
pub type RVec = DVector<f64>;

/// `U (M x K) -> [Re{U}; Im{U}] (2M x K)`.
pub fn t1_stack(u: &CMat) -> RMat {
    let (m, k) = u.shape();
    RMat::from_fn(2 * m, k, |i, j| {
        if i < m {
            u[(i, j)].re
        } else {
            u[(i - m, j)].im
        }
    })
}

/// Inverse of [`t1_stack`]; reconstructs the complex matrix exactly.
pub fn t1_unstack(ubar: &RMat) -> CMat {
    let (two_m, k) = ubar.shape();
    assert!(two_m % 2 == 0, "stacked matrix must have even row count");
    let m = two_m / 2;
    CMat::from_fn(m, k, |i, j| Complex64::new(ubar[(i, j)], ubar[(i + m, j)]))
}

/// `H (K x M) -> [Re{H}, -Im{H}] (K x 2M)`.
pub fn t2_widen(h: &CMat) -> RMat {
    let (k, m) = h.shape();
    RMat::from_fn(k, 2 * m, |i, j| {
        if j < m {
            h[(i, j)].re
        } else {
            -h[(i, j - m)].im
        }
    })
}

/// `h (1 x M) -> [Re{h}, +Im{h}] (1 x 2M)`, the row isomorphism with
/// `composite_row(h_k) . composite_row(h_j)^T = Re{h_k h_j^H}`.
pub fn composite_row(h: &CMat) -> RMat {
    assert_eq!(h.nrows(), 1, "composite_row expects a row vector");
    let m = h.ncols();
    RMat::from_fn(1, 2 * m, |_, j| {
        if j < m {
            h[(0, j)].re
        } else {
            h[(0, j - m)].im
        }
    })
}

const SPD_SYMMETRY_TOL: f64 = 1e-10;

/// Solves `A X = B` for symmetric positive definite `A` via Cholesky.
pub fn spd_solve(a: &RMat, b: &RMat) -> Result<RMat> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(WlbcError::DimensionMismatch(format!(
            "spd_solve: A is {}x{}, B has {} rows",
            n,
            a.ncols(),
            b.nrows()
        )));
    }
    let scale = a.amax().max(1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            if (a[(i, j)] - a[(j, i)]).abs() > SPD_SYMMETRY_TOL * scale {
                return Err(WlbcError::NotPositiveDefinite("matrix is not symmetric"));
            }
        }
    }
    let chol = Cholesky::new(a.clone())
        .ok_or(WlbcError::NotPositiveDefinite("Cholesky pivot <= 0"))?;
    Ok(chol.solve(b))
}

/// Solves `A X = B` for Hermitian positive definite complex `A`.
pub fn hpd_solve(a: &CMat, b: &CMat) -> Result<CMat> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(WlbcError::DimensionMismatch(format!(
            "hpd_solve: A is {}x{}, B has {} rows",
            n,
            a.ncols(),
            b.nrows()
        )));
    }
    let chol = Cholesky::new(a.clone())
        .ok_or(WlbcError::NotPositiveDefinite("Cholesky pivot <= 0"))?;
    Ok(chol.solve(b))
}

/// Unit-norm maximizer of the generalized Rayleigh quotient
/// `(a v)^2 / (v^T Q v)` for a rank-one numerator `a^T a` and SPD `Q`.
///
/// The rank-one structure gives the maximizer in closed form, `v ~ Q^{-1} a^T`;
/// the returned vector is normalized and signed so that `a . v >= 0`.
pub fn rank1_gev_max(a: &RMat, q: &RMat) -> Result<RVec> {
    assert_eq!(a.nrows(), 1, "rank1_gev_max expects a row vector");
    if a.iter().all(|&x| x == 0.0) {
        return Err(WlbcError::ZeroVector("rank1_gev_max"));
    }
    let at = RMat::from_fn(a.ncols(), 1, |i, _| a[(0, i)]);
    let x = spd_solve(q, &at)?;
    let mut v = RVec::from_column_slice(x.as_slice());
    let norm = v.norm();
    if norm == 0.0 {
        return Err(WlbcError::ZeroVector("rank1_gev_max solution"));
    }
    v /= norm;
    let dot: f64 = (0..v.len()).map(|i| a[(0, i)] * v[i]).sum();
    if dot < 0.0 {
        v = -v;
    }
    Ok(v)
}

/// Nodes and weights of n-point Gauss-Hermite quadrature for
/// `integral f(t) exp(-t^2) dt ~ sum w_i f(t_i)`, via Golub-Welsch on the
/// symmetric Jacobi matrix of the Hermite recurrence.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jac = RMat::zeros(n, n);
    for i in 1..n {
        let b = (i as f64 / 2.0).sqrt();
        jac[(i - 1, i)] = b;
        jac[(i, i - 1)] = b;
    }
    let eig = jac.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (node, std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
