//! Dense factorizations used across the crate: Cholesky, a cyclic Jacobi
//! symmetric eigensolver, and the PSD square-root factor `L` with `LᵀL = M`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative tolerance for treating a slightly negative eigenvalue as zero.
pub const PSD_REL_TOL: f64 = 1e-8;

pub fn max_abs<T: Real>(m: ArrayView2<T>) -> T {
    m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

pub(crate) fn psd_tolerance<T: Real>(m: ArrayView2<T>) -> T {
    T::of(PSD_REL_TOL) * max_abs(m)
}

pub fn check_finite<T: Real>(m: ArrayView2<T>) -> Result<()> {
    for ((row, col), v) in m.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(())
}

pub(crate) fn check_finite_vec<T: Real>(v: ArrayView1<T>) -> Result<()> {
    for (row, x) in v.iter().enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite { row, col: 0 });
        }
    }
    Ok(())
}

pub fn check_square<T>(m: ArrayView2<T>, what: &str) -> Result<usize> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {r}x{c}"
        )));
    }
    Ok(r)
}

/// Verifies symmetry up to `1e-10 · max|entry|`.
pub fn check_symmetric<T: Real>(m: ArrayView2<T>) -> Result<()> {
    let p = check_square(m, "matrix")?;
    let tol = T::of(1e-10) * max_abs(m);
    for i in 0..p {
        for j in (i + 1)..p {
            if (m[[i, j]] - m[[j, i]]).abs() > tol {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Lower-triangular `C` with `C Cᵀ = a`, or `None` when a pivot is not positive.
pub fn cholesky<T: Real>(a: ArrayView2<T>) -> Option<Array2<T>> {
    let p = a.nrows();
    let mut l = Array2::<T>::zeros((p, p));
    for j in 0..p {
        let mut d = a[[j, j]];
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[[j, j]] = djj;
        for i in (j + 1)..p {
            let mut s = a[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / djj;
        }
    }
    Some(l)
}

/// Solves `C Cᵀ x = b` given the lower Cholesky factor `C`.
pub fn cholesky_solve<T: Real>(c: ArrayView2<T>, b: ArrayView1<T>) -> Array1<T> {
    let p = c.nrows();
    let mut z = b.to_owned();
    for i in 0..p {
        let mut s = z[i];
        for k in 0..i {
            s -= c[[i, k]] * z[k];
        }
        z[i] = s / c[[i, i]];
    }
    for i in (0..p).rev() {
        let mut s = z[i];
        for k in (i + 1)..p {
            s -= c[[k, i]] * z[k];
        }
        z[i] = s / c[[i, i]];
    }
    z
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse<T: Real>(a: ArrayView2<T>) -> Result<Array2<T>> {
    let p = check_square(a, "matrix")?;
    let c = cholesky(a).ok_or_else(|| Error::NotPsd {
        min_eigenvalue: min_eigenvalue(a).map(|v| v.as_f64()).unwrap_or(f64::NAN),
    })?;
    let mut inv = Array2::<T>::zeros((p, p));
    let mut e = Array1::<T>::zeros(p);
    for j in 0..p {
        e.fill(T::zero());
        e[j] = T::one();
        let col = cholesky_solve(c.view(), e.view());
        inv.column_mut(j).assign(&col);
    }
    // symmetrize the rounding
    for i in 0..p {
        for j in (i + 1)..p {
            let v = (inv[[i, j]] + inv[[j, i]]) * T::of(0.5);
            inv[[i, j]] = v;
            inv[[j, i]] = v;
        }
    }
    Ok(inv)
}

/// `log det a` for symmetric positive definite `a`.
pub fn log_det_spd<T: Real>(a: ArrayView2<T>) -> Option<T> {
    let c = cholesky(a)?;
    Some(c.diag().iter().map(|d| d.ln()).sum::<T>() * T::of(2.0))
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching orthonormal
/// eigenvectors as columns.
pub fn symmetric_eigen<T: Real>(a: ArrayView2<T>) -> Result<(Array1<T>, Array2<T>)> {
    let p = check_square(a, "matrix")?;
    let mut m = a.to_owned();
    let mut v = Array2::<T>::eye(p);
    let eps = T::epsilon();
    let scale: T = m.iter().map(|x| *x * *x).sum::<T>().sqrt();
    if scale == T::zero() {
        return Ok((Array1::zeros(p), v));
    }
    let max_sweeps = 100;
    let mut done = false;
    for _ in 0..max_sweeps {
        let mut off = T::zero();
        for i in 0..p {
            for j in (i + 1)..p {
                off += m[[i, j]] * m[[i, j]];
            }
        }
        if off.sqrt() <= eps * scale * T::of(1e-2) {
            done = true;
            break;
        }
        for ip in 0..p {
            for iq in (ip + 1)..p {
                let apq = m[[ip, iq]];
                if apq == T::zero() {
                    continue;
                }
                let app = m[[ip, ip]];
                let aqq = m[[iq, iq]];
                let theta = (aqq - app) / (T::of(2.0) * apq);
                let t = if theta.is_infinite() {
                    T::zero()
                } else {
                    let sgn = if theta >= T::zero() {
                        T::one()
                    } else {
                        -T::one()
                    };
                    sgn / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                m[[ip, ip]] = app - t * apq;
                m[[iq, iq]] = aqq + t * apq;
                m[[ip, iq]] = T::zero();
                m[[iq, ip]] = T::zero();
                for r in 0..p {
                    if r == ip || r == iq {
                        continue;
                    }
                    let arp = m[[r, ip]];
                    let arq = m[[r, iq]];
                    let nrp = c * arp - s * arq;
                    let nrq = s * arp + c * arq;
                    m[[r, ip]] = nrp;
                    m[[ip, r]] = nrp;
                    m[[r, iq]] = nrq;
                    m[[iq, r]] = nrq;
                }
                for r in 0..p {
                    let vrp = v[[r, ip]];
                    let vrq = v[[r, iq]];
                    v[[r, ip]] = c * vrp - s * vrq;
                    v[[r, iq]] = s * vrp + c * vrq;
                }
            }
        }
    }
    if !done {
        return Err(Error::NotConverged {
            what: "Jacobi eigensolver",
            iterations: max_sweeps,
        });
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| m[[i, i]].partial_cmp(&m[[j, j]]).unwrap());
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vectors = Array2::<T>::zeros((p, p));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok((values, vectors))
}

pub fn min_eigenvalue<T: Real>(a: ArrayView2<T>) -> Result<T> {
    let (vals, _) = symmetric_eigen(a)?;
    Ok(vals.iter().copied().fold(T::infinity(), T::min))
}

/// Fails with `NotPsd` when the smallest eigenvalue is below `-1e-8 · max|entry|`.
pub fn check_psd<T: Real>(a: ArrayView2<T>) -> Result<()> {
    check_symmetric(a)?;
    let min = min_eigenvalue(a)?;
    if min < -psd_tolerance(a) {
        return Err(Error::NotPsd {
            min_eigenvalue: min.as_f64(),
        });
    }
    Ok(())
}

/// Square-root factor `L` with `LᵀL = m`.
///
/// Uses Cholesky (`L = Cᵀ`) when `m` is numerically positive definite and
/// otherwise `L = Λ^{1/2} Vᵀ` from the eigendecomposition, with eigenvalues
/// inside the PSD tolerance clipped to zero.
pub fn chol_or_eigh_factor<T: Real>(m: ArrayView2<T>) -> Result<Array2<T>> {
    check_finite(m)?;
    check_symmetric(m)?;
    if let Some(c) = cholesky(m) {
        return Ok(c.reversed_axes());
    }
    let (vals, vecs) = symmetric_eigen(m)?;
    let tol = psd_tolerance(m);
    let p = vals.len();
    let mut l = Array2::<T>::zeros((p, p));
    for k in 0..p {
        let lam = vals[k];
        if lam < -tol {
            return Err(Error::NotPsd {
                min_eigenvalue: lam.as_f64(),
            });
        }
        let root = lam.max(T::zero()).sqrt();
        if root == T::zero() {
            continue;
        }
        for j in 0..p {
            l[[k, j]] = root * vecs[[j, k]];
        }
    }
    Ok(l)
}
