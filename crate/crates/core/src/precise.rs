//! Double-double route to `W` and `log 𝚫` for badly conditioned moment data.
//!
//! At low temperature the Gram form spans many orders of magnitude and `𝚫` carries
//! reciprocal eigenvalue pairs `λ, 1/λ`. Forming `G^{-1/2} D G^{-1/2}` in double precision
//! then buries the small eigenvalues under rounding of the large ones. Here the Gram form
//! is factored by Cholesky in double-double, `𝚫` is diagonalized by cyclic Jacobi, and the
//! logarithm and the kernel matrices are returned in `𝚫`'s own eigenbasis. The same
//! whitening gives `W`, whose kernel eigenvalue would otherwise sit at the rounding level
//! of its largest entries.

use nalgebra::{DMatrix, DVector};
use num_complex::{Complex, Complex64};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::linalg::{c, hermitian_part, CMat, RMat};
use crate::moments::{clip_dust, RawMoments};
use crate::sdp::LogDelta;

type Dd = TwoFloat;
type Cdd = Complex<Dd>;
type DdMat = DMatrix<Cdd>;

fn dd(x: f64) -> Dd {
    TwoFloat::from(x)
}

/// `a / b` through a Newton-corrected reciprocal; twofloat's own double-double quotient
/// drops the low word.
fn div(a: Dd, b: Dd) -> Dd {
    let r0 = 1.0 / b.hi();
    let e = dd(1.0) - b * r0;
    a * (dd(r0) + e * r0)
}

fn czero() -> Cdd {
    Complex::new(dd(0.0), dd(0.0))
}

fn lift(m: &CMat) -> DdMat {
    DdMat::from_fn(m.nrows(), m.ncols(), |i, j| Complex::new(dd(m[(i, j)].re), dd(m[(i, j)].im)))
}

fn lower(m: &DdMat) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(f64::from(m[(i, j)].re), f64::from(m[(i, j)].im)))
}

fn norm_sqr(z: Cdd) -> Dd {
    z.re * z.re + z.im * z.im
}

fn adjoint(m: &DdMat) -> DdMat {
    DdMat::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
}

/// Lower-triangular `L` with `L L† = G`, or `None` if a pivot is not positive.
fn cholesky(g: &DdMat) -> Option<DdMat> {
    let n = g.nrows();
    let mut l = DdMat::from_element(n, n, czero());
    for j in 0..n {
        let mut d = g[(j, j)].re;
        for k in 0..j {
            d -= norm_sqr(l[(j, k)]);
        }
        if !(f64::from(d) > 0.0) {
            return None;
        }
        let djj = d.sqrt();
        l[(j, j)] = Complex::new(djj, dd(0.0));
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = Complex::new(div(s.re, djj), div(s.im, djj));
        }
    }
    Some(l)
}

/// `L^{-1} B` by forward substitution.
fn forward_solve(l: &DdMat, b: &DdMat) -> DdMat {
    let n = l.nrows();
    let mut x = b.clone();
    for col in 0..b.ncols() {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s = s - l[(i, k)] * x[(k, col)];
            }
            let d = l[(i, i)].re;
            x[(i, col)] = Complex::new(div(s.re, d), div(s.im, d));
        }
    }
    x
}

/// `L^{-1} M L^{-†}`.
fn whiten(l: &DdMat, m: &DdMat) -> DdMat {
    adjoint(&forward_solve(l, &adjoint(&forward_solve(l, m))))
}

/// Cyclic Jacobi diagonalization of a Hermitian matrix: ascending eigenvalues and the
/// unitary whose columns are the eigenvectors.
fn jacobi_eigen(a: &DdMat) -> (Vec<Dd>, DdMat) {
    let n = a.nrows();
    let mut a = a.clone();
    for i in 0..n {
        a[(i, i)].im = dd(0.0);
    }
    let mut u = DdMat::from_fn(n, n, |i, j| if i == j { Complex::new(dd(1.0), dd(0.0)) } else { czero() });
    let tiny = 1e-31;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r2 = norm_sqr(apq);
                let scale = (a[(p, p)].re * a[(q, q)].re).abs();
                if f64::from(r2) <= tiny * tiny * f64::from(scale) || f64::from(r2) == 0.0 {
                    continue;
                }
                rotated = true;
                let r = r2.sqrt();
                // phase e^{-iφ} that makes the pivot real, then a real Jacobi rotation
                let ph = Complex::new(div(apq.re, r), -div(apq.im, r));
                let tau = div(a[(q, q)].re - a[(p, p)].re, dd(2.0) * r);
                let sign = if f64::from(tau) >= 0.0 { dd(1.0) } else { dd(-1.0) };
                let t = div(sign, tau.abs() + (dd(1.0) + tau * tau).sqrt());
                let cs = div(dd(1.0), (dd(1.0) + t * t).sqrt());
                let sn = t * cs;
                let jpp = Complex::new(cs, dd(0.0));
                let jpq = Complex::new(sn, dd(0.0));
                let jqp = Complex::new(-sn * ph.re, -sn * ph.im);
                let jqq = Complex::new(cs * ph.re, cs * ph.im);
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * jpp + y * jqp;
                    a[(k, q)] = x * jpq + y * jqq;
                }
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = jpp.conj() * x + jqp.conj() * y;
                    a[(q, k)] = jpq.conj() * x + jqq.conj() * y;
                }
                a[(p, q)] = czero();
                a[(q, p)] = czero();
                a[(p, p)].im = dd(0.0);
                a[(q, q)].im = dd(0.0);
                for k in 0..n {
                    let (x, y) = (u[(k, p)], u[(k, q)]);
                    u[(k, p)] = x * jpp + y * jqp;
                    u[(k, q)] = x * jpq + y * jqq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| f64::from(a[(i, i)].re).total_cmp(&f64::from(a[(j, j)].re)));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = DdMat::from_fn(n, n, |i, k| u[(i, order[k])]);
    (values, vectors)
}

/// `W` and the ascending eigendecomposition of its real part, computed in double-double.
///
/// Cholesky whitening differs from `G^{-1/2}` by a unitary, which leaves every trace
/// `tr(A_α† A_β)` unchanged.
pub fn precise_w(raw: &RawMoments) -> Result<(CMat, Vec<f64>, RMat)> {
    let l = cholesky(&lift(&raw.gram)).ok_or_else(|| Error::GramDegenerate { eigenvalues: vec![] })?;
    let anti: Vec<DdMat> = raw.commutators.iter().map(|k| whiten(&l, &lift(&(k - k.adjoint())))).collect();
    let s = anti.len();
    let mut w = DdMat::from_element(s, s, czero());
    for a in 0..s {
        for b in a..s {
            let mut v = czero();
            for (x, y) in anti[a].iter().zip(anti[b].iter()) {
                v = v + x.conj() * y;
            }
            w[(a, b)] = v;
            w[(b, a)] = v.conj();
        }
    }
    let re = DdMat::from_fn(s, s, |i, j| Complex::new((w[(i, j)].re + w[(j, i)].re) * 0.5, dd(0.0)));
    let (values, vectors) = jacobi_eigen(&re);
    let values = values.iter().map(|&v| clip_dust(f64::from(v))).collect();
    let vectors = RMat::from_fn(s, s, |i, k| f64::from(vectors[(i, k)].re));
    Ok((lower(&w), values, vectors))
}

/// Condition number of the Gram form above which [`precise_log_delta`] should be used.
pub const GRAM_CONDITION_LIMIT: f64 = 1e4;

/// `log 𝚫` and the symmetrized kernel matrices, both in the eigenbasis of `𝚫`.
///
/// `kernel_coeffs` holds one row of real coefficients per kernel vector in the raw
/// Hamiltonian-term basis. Eigenvalues of `𝚫` at or below `eig_floor` raise
/// [`Error::DeltaNotPositive`], or are dropped when `project` is set.
pub fn precise_log_delta(
    raw: &RawMoments,
    kernel_coeffs: &RMat,
    eig_floor: f64,
    project: bool,
) -> Result<(LogDelta, Vec<CMat>)> {
    let l = cholesky(&lift(&raw.gram)).ok_or_else(|| Error::GramDegenerate { eigenvalues: vec![] })?;
    let delta = whiten(&l, &lift(&raw.delta));
    let delta = DdMat::from_fn(delta.nrows(), delta.ncols(), |i, j| {
        let (x, y) = (delta[(i, j)], delta[(j, i)].conj());
        Complex::new((x.re + y.re) * 0.5, (x.im + y.im) * 0.5)
    });
    let (values, vectors) = jacobi_eigen(&delta);
    let f64_values: Vec<f64> = values.iter().map(|&v| f64::from(v)).collect();
    let bad: Vec<f64> = f64_values.iter().copied().filter(|&v| v <= eig_floor).collect();
    if !bad.is_empty() && !project {
        return Err(Error::DeltaNotPositive { eigenvalues: bad });
    }
    let keep: Vec<usize> = (0..values.len()).filter(|&k| f64_values[k] > eig_floor).collect();
    let r = raw.r();
    let basis = DdMat::from_fn(r, keep.len(), |i, k| vectors[(i, keep[k])]);
    let basis_adj = adjoint(&basis);
    let l0 = CMat::from_diagonal(&DVector::from_iterator(keep.len(), keep.iter().map(|&k| c(f64::from(values[k]).ln()))));

    let s = raw.s();
    let h_tilde = (0..kernel_coeffs.nrows())
        .map(|a| {
            let mut k = CMat::zeros(r, r);
            for b in 0..s {
                let w = kernel_coeffs[(a, b)];
                if w != 0.0 {
                    k += raw.commutators[b].scale(w);
                }
            }
            let m = whiten(&l, &lift(&hermitian_part(&k)));
            hermitian_part(&lower(&(&basis_adj * m * &basis)))
        })
        .collect();
    let log_delta = LogDelta { l0, basis: None, eigenvalues: f64_values, reduced_dim: keep.len() };
    Ok((log_delta, h_tilde))
}
