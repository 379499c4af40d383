//! Moment functionals and the brute-force orthogonality oracle.
//!
//! A functional is stored through its moments `u_m = <u, x^m>`. Moments are
//! reconstructed from the recurrence: `x^m` is expanded in the `P` basis by
//! repeated multiplication by `x`, and `u_m` is the `P_0` coefficient times
//! `u_0` (every `P_j`, `j >= 1`, is annihilated by `u`).

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::recurrence::RecurrencePair;
use crate::scalar::Scalar;
use nalgebra::DMatrix;

/// Moments `u_0..u_M` of a linear functional on polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentFunctional<T = f64> {
    moments: Vec<T>,
}

impl<T: Scalar> MomentFunctional<T> {
    pub fn new(moments: Vec<T>) -> Result<Self> {
        match moments.first() {
            None => Err(Error::Range("need at least u_0".into())),
            Some(u0) if u0.is_zero() => Err(Error::Domain("u_0 must be nonzero".into())),
            Some(_) => Ok(Self { moments }),
        }
    }

    pub fn moments(&self) -> &[T] {
        &self.moments
    }

    /// Highest moment index available.
    pub fn max_order(&self) -> usize {
        self.moments.len() - 1
    }

    pub fn u0(&self) -> &T {
        &self.moments[0]
    }

    /// `<u, p> = sum_i p_i u_i`
    pub fn apply(&self, p: &Poly<T>) -> Result<T> {
        if !p.is_zero() && p.degree() > self.max_order() {
            return Err(Error::Range(format!(
                "degree {} polynomial needs u_{}, have up to u_{}",
                p.degree(),
                p.degree(),
                self.max_order()
            )));
        }
        Ok(p.coeffs()
            .iter()
            .zip(&self.moments)
            .fold(T::zero(), |acc, (c, u)| acc + c.clone() * u.clone()))
    }

    /// `<u, p q>`
    pub fn inner(&self, p: &Poly<T>, q: &Poly<T>) -> Result<T> {
        self.apply(&(p * q))
    }

    /// Same functional with every moment multiplied by `s`.
    pub fn scaled(&self, s: &T) -> Self {
        Self {
            moments: self.moments.iter().map(|u| u.clone() * s.clone()).collect(),
        }
    }
}

/// Moments `u_0..u_{max_order}` of the functional with `u_0 = 1` orthogonalizing `rec`.
///
/// Needs `max_order <= 2 N`.
pub fn moments_from_recurrence<T: Scalar>(
    rec: &RecurrencePair,
    max_order: usize,
) -> Result<MomentFunctional<T>> {
    if max_order > 2 * rec.horizon() {
        return Err(Error::Range(format!(
            "u_{max_order} needs horizon {}, have {}",
            max_order.div_ceil(2),
            rec.horizon()
        )));
    }
    let beta: Vec<T> = rec.betas().iter().map(|&b| T::from_f64(b)).collect();
    let gamma: Vec<T> = rec.gammas().iter().map(|&g| T::from_f64(g)).collect();
    // coefficients of x^m in P_0, P_1, ...; only indices that can still reach
    // P_0 by u_{max_order} are kept
    let mut c = vec![T::one()];
    let mut moments = Vec::with_capacity(max_order + 1);
    moments.push(T::one());
    for m in 0..max_order {
        let keep = (m + 1).min(max_order - m - 1);
        let next: Vec<T> = (0..=keep)
            .map(|j| {
                let mut v = T::zero();
                if j >= 1 && j - 1 < c.len() {
                    v = v + c[j - 1].clone();
                }
                if j < c.len() {
                    v = v + beta[j].clone() * c[j].clone();
                }
                if j + 1 < c.len() {
                    v = v + gamma[j].clone() * c[j + 1].clone();
                }
                v
            })
            .collect();
        moments.push(next[0].clone());
        c = next;
    }
    MomentFunctional::new(moments)
}

/// The functional with `v_0 = 1` and `<v, p_n> = 0` for every `n >= 1`.
///
/// `polys[n]` must be monic of degree `n`. If the sequence is orthogonal with
/// respect to any quasi-definite functional, that functional is a multiple of
/// this one, so testing the Gram matrix against it decides orthogonality.
pub fn dual_functional<T: Scalar>(polys: &[Poly<T>]) -> Result<MomentFunctional<T>> {
    let mut v = vec![T::one()];
    for (n, p) in polys.iter().enumerate().skip(1) {
        if p.degree() != n || !p.is_monic() {
            return Err(Error::Domain(format!(
                "entry {n} is not monic of degree {n}"
            )));
        }
        let s = (0..n).fold(T::zero(), |acc, i| acc + p.coeff(i) * v[i].clone());
        v.push(-s);
    }
    MomentFunctional::new(v)
}

/// One leading principal Hankel minor.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMinor {
    pub order: usize,
    pub det: f64,
    /// Product of row 2-norms (Hadamard bound on |det|).
    pub scale: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiDefiniteReport {
    pub minors: Vec<HankelMinor>,
    /// First order whose minor is numerically zero.
    pub first_failure: Option<usize>,
}

impl QuasiDefiniteReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

/// Checks `det H_m != 0` for the `m x m` Hankel sections, `1 <= m <= n`.
///
/// A minor counts as zero when `|det| <= tol * prod_i ||row_i||`.
pub fn is_quasi_definite(f: &MomentFunctional, n: usize, tol: f64) -> Result<QuasiDefiniteReport> {
    if n == 0 || 2 * n - 2 > f.max_order() {
        return Err(Error::Range(format!(
            "H_{n} needs u_{}, have up to u_{}",
            2 * n.max(1) - 2,
            f.max_order()
        )));
    }
    let u = f.moments();
    let mut minors = Vec::with_capacity(n);
    let mut first_failure = None;
    for m in 1..=n {
        let h = DMatrix::from_fn(m, m, |i, j| u[i + j]);
        let det = h.clone().determinant();
        let scale: f64 = h.row_iter().map(|r| r.norm()).product();
        let ratio = det.abs() / scale;
        if first_failure.is_none() && (ratio.is_nan() || ratio <= tol) {
            first_failure = Some(m);
        }
        minors.push(HankelMinor {
            order: m,
            det,
            scale,
            ratio,
        });
    }
    Ok(QuasiDefiniteReport {
        minors,
        first_failure,
    })
}

/// Result of a Gram-matrix orthogonality test.
#[derive(Debug, Clone, PartialEq)]
pub struct GramReport {
    pub size: usize,
    /// `max |G_ij| / sqrt(|G_ii G_jj|)` over `i != j`.
    pub max_ratio: f64,
    pub worst_pair: Option<(usize, usize)>,
    /// Pairs whose ratio exceeds the tolerance.
    pub failures: Vec<(usize, usize, f64)>,
    /// Indices with `G_ii = 0`.
    pub zero_diagonal: Vec<usize>,
    pub diagonal: Vec<f64>,
    pub tol: f64,
}

impl GramReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.zero_diagonal.is_empty()
    }
}

/// Gram matrix `G_ij = <f, p_i p_j>` of `polys` (degrees `0, 1, ..., n`).
///
/// Passes iff every off-diagonal `|G_ij| <= tol sqrt(|G_ii G_jj|)` and no
/// diagonal entry vanishes.
pub fn gram_orthogonality_check<T: Scalar>(
    f: &MomentFunctional<T>,
    polys: &[Poly<T>],
    tol: f64,
) -> Result<GramReport> {
    for (i, p) in polys.iter().enumerate() {
        if p.is_zero() || p.degree() != i {
            return Err(Error::Domain(format!("entry {i} must have degree {i}")));
        }
    }
    let n = polys.len();
    if n > 0 && 2 * (n - 1) > f.max_order() {
        return Err(Error::Range(format!(
            "Gram matrix of size {n} needs u_{}, have up to u_{}",
            2 * (n - 1),
            f.max_order()
        )));
    }
    let u = f.moments();
    // h[i][a] = <f, x^a p_i>
    let h: Vec<Vec<T>> = polys
        .iter()
        .map(|p| {
            (0..n)
                .map(|a| {
                    p.coeffs()
                        .iter()
                        .enumerate()
                        .fold(T::zero(), |acc, (b, c)| acc + c.clone() * u[a + b].clone())
                })
                .collect()
        })
        .collect();
    let g = |i: usize, j: usize| -> T {
        polys[j]
            .coeffs()
            .iter()
            .zip(&h[i])
            .fold(T::zero(), |acc, (c, w)| acc + c.clone() * w.clone())
    };
    let diag: Vec<T> = (0..n).map(|i| g(i, i)).collect();
    let zero_diagonal: Vec<usize> = diag
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_zero() || d.to_f64().abs() < f64::MIN_POSITIVE)
        .map(|(i, _)| i)
        .collect();
    let mut report = GramReport {
        size: n,
        max_ratio: 0.0,
        worst_pair: None,
        failures: Vec::new(),
        zero_diagonal,
        diagonal: diag.iter().map(|d| d.to_f64()).collect(),
        tol,
    };
    for i in 0..n {
        for j in (i + 1)..n {
            if report.zero_diagonal.contains(&i) || report.zero_diagonal.contains(&j) {
                continue;
            }
            let gij = g(i, j);
            // ratio^2 formed in T so exact scalars never round before the comparison
            let r2 = (gij.clone() * gij) / (diag[i].clone() * diag[j].clone()).abs();
            let ratio = r2.to_f64().sqrt();
            if ratio > report.max_ratio {
                report.max_ratio = ratio;
                report.worst_pair = Some((i, j));
            }
            if ratio.is_nan() || ratio > tol {
                report.failures.push((i, j, ratio));
            }
        }
    }
    Ok(report)
}
