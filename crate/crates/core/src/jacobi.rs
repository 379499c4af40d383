//! Truncated Jacobi matrices of `P` and `Q`, the change of basis `Q = M P`,
//! the perturbation `L`, and the polynomial `h_k` with `u = h_k v`.
//!
//! Truncated products agree with the infinite operators only away from the
//! bottom edge, so every identity is compared on the interior rows
//! `0..=m-k-2`.

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, multiset_distance, polynomial_roots};
use crate::lincomb::{q_poly, tilde_recurrence, CombCoeffs, ConditionReport};
use crate::moments::{moments_from_recurrence, MomentFunctional};
use crate::poly::Poly;
use crate::recurrence::RecurrencePair;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Default tolerance for the `h_k` least-squares residual.
pub const DEFAULT_HK_TOL: f64 = 1e-9;

/// Monic Jacobi truncation: diagonal `beta`, subdiagonal `gamma`, superdiagonal ones.
#[derive(Debug, Clone, PartialEq)]
pub struct TriDiag {
    diag: Vec<f64>,
    sub: Vec<f64>,
}

impl TriDiag {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    /// `sub[i]` sits at row `i + 1`, column `i`.
    pub fn sub(&self) -> &[f64] {
        &self.sub
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                self.diag[i]
            } else if j == i + 1 {
                1.0
            } else if i == j + 1 {
                self.sub[j]
            } else {
                0.0
            }
        })
    }

    /// The symmetric (orthonormal) form with off-diagonals `sqrt(gamma)`.
    pub fn symmetrized(&self) -> Result<DMatrix<f64>> {
        if let Some(g) = self.sub.iter().find(|g| **g <= 0.0) {
            return Err(Error::Domain(format!("gamma = {g} is not positive")));
        }
        let m = self.dim();
        Ok(DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                self.diag[i]
            } else if j == i + 1 {
                self.sub[i].sqrt()
            } else if i == j + 1 {
                self.sub[j].sqrt()
            } else {
                0.0
            }
        }))
    }
}

/// `(J_P)_m`; its characteristic polynomial is `P_m`.
pub fn jacobi_truncation(rec: &RecurrencePair, m: usize) -> Result<TriDiag> {
    if m == 0 || m > rec.horizon() + 1 {
        return Err(Error::Range(format!(
            "truncation size {m} must lie in 1..={}",
            rec.horizon() + 1
        )));
    }
    Ok(TriDiag {
        diag: rec.betas()[..m].to_vec(),
        sub: rec.gammas()[..m - 1].to_vec(),
    })
}

/// Unit lower-triangular matrix with `k` subdiagonal bands.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    bandwidth: usize,
    /// `rows[n][i]` is the entry at column `n - i`, `i = 0..=min(n, k)`.
    rows: Vec<Vec<f64>>,
}

impl BandMatrix {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if c > r || r - c > self.bandwidth {
            return 0.0;
        }
        self.rows[r][r - c]
    }

    /// Row `r` from column 0 to the diagonal.
    pub fn row(&self, r: usize) -> Vec<f64> {
        (0..=r).map(|c| self.get(r, c)).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |r, c| self.get(r, c))
    }
}

/// `M` with `(Q_0, ..., Q_{m-1})^T = M (P_0, ..., P_{m-1})^T`.
pub fn change_basis_matrix(
    comb: &CombCoeffs,
    report: &ConditionReport,
    m: usize,
) -> Result<BandMatrix> {
    require_passing(comb, report)?;
    let k = comb.k();
    let rows = (0..m)
        .map(|n| {
            if n <= k {
                report.lower_expansions[n].iter().rev().copied().collect()
            } else {
                (0..=k).map(|j| comb.a(j)).collect()
            }
        })
        .collect();
    Ok(BandMatrix { bandwidth: k, rows })
}

/// `L_m`: zero except the last row, which holds `a_j` in column `m - j`.
///
/// With this placement `x P = ((J_P)_m - L_m) P + Q_m e_m`, so the
/// eigenvalues of `(J_P)_m - L_m` are the zeros of `Q_m`.
pub fn perturbation_l(comb: &CombCoeffs, m: usize) -> Result<DMatrix<f64>> {
    let k = comb.k();
    if m < k + 1 {
        return Err(Error::Range(format!("need m >= k+1 = {}, got {m}", k + 1)));
    }
    let mut l = DMatrix::zeros(m, m);
    for j in 1..=k {
        l[(m - 1, m - j)] = comb.a(j);
    }
    Ok(l)
}

/// Zeros of `Q_m` by two independent routes.
#[derive(Debug, Clone, PartialEq)]
pub struct QZeros {
    /// Eigenvalues of `(J_P)_m - L_m`.
    pub eigenvalues: Vec<Complex64>,
    /// Roots of the explicit coefficients of `Q_m`.
    pub roots: Vec<Complex64>,
    /// Largest matched distance between the two sets.
    pub distance: f64,
}

impl QZeros {
    /// Largest imaginary part among the eigenvalues.
    pub fn max_imag(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.im.abs())
            .fold(0.0, f64::max)
    }
}

/// Zeros of `Q_m`, `m >= k+1`; only the defining combination is used, so no report is needed.
pub fn zeros_q(rec: &RecurrencePair, comb: &CombCoeffs, m: usize) -> Result<QZeros> {
    let a = jacobi_truncation(rec, m)?.to_dense() - perturbation_l(comb, m)?;
    let eigenvalues = eigenvalues(&a)?;
    let roots = polynomial_roots(&q_poly(rec, comb, None, m)?)?;
    let distance = multiset_distance(&eigenvalues, &roots);
    Ok(QZeros {
        eigenvalues,
        roots,
        distance,
    })
}

/// `D[n] = u0 gamma_1 ... gamma_n`, the squared norms of `P_0..P_{m-1}`.
pub fn norm_diagonal(rec: &RecurrencePair, m: usize, u0: f64) -> Result<Vec<f64>> {
    if m > rec.horizon() + 1 {
        return Err(Error::Range(format!("need m <= {}", rec.horizon() + 1)));
    }
    let mut d = Vec::with_capacity(m);
    let mut acc = u0;
    for n in 0..m {
        if n > 0 {
            acc *= rec.gamma(n);
        }
        d.push(acc);
    }
    Ok(d)
}

/// Residual of a truncated matrix identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    /// Largest absolute entry of the difference on the compared region.
    pub residual: f64,
    /// Largest absolute entry of the compared matrices (at least 1).
    pub scale: f64,
    pub tol: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(residual: f64, scale: f64, tol: f64) -> Self {
        let scale = scale.max(1.0);
        Self {
            residual,
            scale,
            tol,
            passed: residual <= tol * scale,
        }
    }

    pub fn relative(&self) -> f64 {
        self.residual / self.scale
    }
}

fn max_abs_rows(a: &DMatrix<f64>, rows: usize) -> f64 {
    (0..rows.min(a.nrows()))
        .flat_map(|r| a.row(r).iter().copied().collect::<Vec<_>>())
        .fold(0.0, |acc, v| acc.max(v.abs()))
}

fn interior_rows(m: usize, k: usize) -> Result<usize> {
    if m < k + 3 {
        return Err(Error::Range(format!("need m >= k+3 = {}, got {m}", k + 3)));
    }
    Ok(m - k - 1)
}

fn require_passing(comb: &CombCoeffs, report: &ConditionReport) -> Result<()> {
    if &report.comb != comb {
        return Err(Error::State(
            "report was computed for different coefficients".into(),
        ));
    }
    if !report.verdict {
        return Err(Error::State(
            "combination did not pass the orthogonality conditions".into(),
        ));
    }
    Ok(())
}

/// `M J_P - J_Q M` on rows `0..=m-k-2` for given truncations.
pub fn intertwining_residual(
    jp: &TriDiag,
    jq: &TriDiag,
    mm: &BandMatrix,
    tol: f64,
) -> Result<IdentityCheck> {
    let m = mm.dim();
    if jp.dim() != m || jq.dim() != m {
        return Err(Error::Domain("matrix sizes differ".into()));
    }
    let rows = interior_rows(m, mm.bandwidth())?;
    let md = mm.to_dense();
    let lhs = &md * jp.to_dense();
    let rhs = jq.to_dense() * &md;
    let diff = &lhs - &rhs;
    Ok(IdentityCheck::new(
        max_abs_rows(&diff, rows),
        max_abs_rows(&lhs, rows).max(max_abs_rows(&rhs, rows)),
        tol,
    ))
}

/// Checks `M J_P = J_Q M` on the interior rows of the size-`m` truncation.
pub fn verify_intertwining(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    report: &ConditionReport,
    m: usize,
    tol: f64,
) -> Result<IdentityCheck> {
    let tilde = tilde_recurrence(rec, comb, report)?;
    let mm = change_basis_matrix(comb, report, m)?;
    intertwining_residual(
        &jacobi_truncation(rec, m)?,
        &jacobi_truncation(&tilde, m)?,
        &mm,
        tol,
    )
}

/// `(J_Q)_m = M ((J_P)_m - L_m) M^{-1}`, which holds on the whole truncation,
/// together with the trace comparison of both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityCheck {
    pub matrix: IdentityCheck,
    pub trace_difference: f64,
}

pub fn verify_similarity(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    report: &ConditionReport,
    m: usize,
    tol: f64,
) -> Result<SimilarityCheck> {
    let tilde = tilde_recurrence(rec, comb, report)?;
    let md = change_basis_matrix(comb, report, m)?.to_dense();
    let inv = md
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("change of basis is singular".into()))?;
    let perturbed = jacobi_truncation(rec, m)?.to_dense() - perturbation_l(comb, m)?;
    let conj = &md * &perturbed * inv;
    let jq = jacobi_truncation(&tilde, m)?.to_dense();
    let diff = &conj - &jq;
    let scale = conj.amax().max(jq.amax());
    Ok(SimilarityCheck {
        matrix: IdentityCheck::new(diff.amax(), scale, tol),
        trace_difference: (perturbed.trace() - conj.trace()).abs(),
    })
}

/// `h(J)` for a Jacobi truncation: powers are formed at size `m + k` and cut
/// back to `m`, so every entry equals the operator entry.
fn poly_of_jacobi(
    rec: &RecurrencePair,
    h: &Poly,
    m: usize,
    symmetric: bool,
) -> Result<DMatrix<f64>> {
    let k = h.degree();
    let big = jacobi_truncation(rec, m + k)?;
    let j = if symmetric {
        big.symmetrized()?
    } else {
        big.to_dense()
    };
    let mut power = DMatrix::identity(m + k, m + k);
    let mut out = DMatrix::zeros(m + k, m + k);
    for i in 0..=k {
        if i > 0 {
            power = &power * &j;
        }
        out += &power * h.coeff(i);
    }
    Ok(out.view((0, 0), (m, m)).into_owned())
}

/// `h_k` from the least-squares fit of `sum_i c_i J_P^i = D_P M^T D_Q^{-1} M`.
#[derive(Debug, Clone, PartialEq)]
pub struct HkSolution {
    /// `c_0..c_k`.
    pub coeffs: Poly,
    /// Euclidean norm of the fit residual relative to the right-hand side.
    pub residual: f64,
    /// `s` in `u = s h_k v` under `u_0 = v_0 = 1`; equals 1 for a consistent fit.
    pub scale: f64,
    pub equations: usize,
}

/// Solves for `h_k` at truncation `m >= 3k+3`.
///
/// Fails with an inconsistency error when the relative residual exceeds `tol`.
pub fn solve_hk(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    report: &ConditionReport,
    m: usize,
    tol: f64,
) -> Result<HkSolution> {
    require_passing(comb, report)?;
    let k = comb.k();
    if m < 3 * k + 3 {
        return Err(Error::Range(format!(
            "need m >= 3k+3 = {}, got {m}",
            3 * k + 3
        )));
    }
    if m + k > rec.horizon() + 1 || m > report.horizon + 1 {
        return Err(Error::Range(format!(
            "m + k = {} exceeds the available recurrence",
            m + k
        )));
    }
    let tilde = tilde_recurrence(rec, comb, report)?;
    let dp = norm_diagonal(rec, m, 1.0)?;
    let dq = norm_diagonal(&tilde, m, 1.0)?;
    let md = change_basis_matrix(comb, report, m)?.to_dense();
    let dq_inv_m = DMatrix::from_fn(m, m, |r, c| md[(r, c)] / dq[r]);
    let rhs_matrix = DMatrix::from_fn(m, m, |r, c| dp[r] * md.column(r).dot(&dq_inv_m.column(c)));

    let powers: Vec<DMatrix<f64>> = (0..=k)
        .map(|i| poly_of_jacobi(rec, &Poly::monomial(i), m, false))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, usize)> = (0..=m - k - 2)
        .flat_map(|r| (r.saturating_sub(k)..=(r + k).min(m - 1)).map(move |c| (r, c)))
        .collect();
    let a = DMatrix::from_fn(cells.len(), k + 1, |e, i| powers[i][cells[e]]);
    let b = DVector::from_fn(cells.len(), |e, _| rhs_matrix[cells[e]]);

    // column scaling, then normal equations
    let norms: Vec<f64> = (0..=k)
        .map(|i| a.column(i).norm().max(f64::MIN_POSITIVE))
        .collect();
    let scaled = DMatrix::from_fn(a.nrows(), k + 1, |e, i| a[(e, i)] / norms[i]);
    let normal = scaled.transpose() * &scaled;
    let y = normal
        .cholesky()
        .ok_or_else(|| Error::Numeric("normal equations are not positive definite".into()))?
        .solve(&(scaled.transpose() * &b));
    let c: Vec<f64> = (0..=k).map(|i| y[i] / norms[i]).collect();
    let residual = (&a * DVector::from_vec(c.clone()) - &b).norm() / b.norm().max(1.0);
    if residual.is_nan() || residual > tol {
        return Err(Error::Inconsistency(format!(
            "h_k fit residual {residual:e} exceeds {tol:e}; u = h_k v does not hold"
        )));
    }
    let coeffs = Poly::new(c);
    if coeffs.degree() != k {
        return Err(Error::Degeneracy("h_k lost its leading coefficient".into()));
    }
    let v = moments_from_recurrence::<f64>(&tilde, k)?;
    let scale = 1.0 / v.apply(&coeffs)?;
    Ok(HkSolution {
        coeffs,
        residual,
        scale,
        equations: cells.len(),
    })
}

/// Result of [`verify_functional_relation`].
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalRelation {
    pub passed: bool,
    /// `s = u_0 / <v, h>`.
    pub scale: f64,
    pub max_residual: f64,
    /// Highest moment order compared.
    pub max_order: usize,
}

/// Checks `u_m = s <v, h x^m>` for every available `m`.
///
/// The residual at order `m` is relative to the larger of `|u_m|` and the
/// magnitude of the terms summed into `<v, h x^m>`.
pub fn verify_functional_relation(
    u: &MomentFunctional,
    v: &MomentFunctional,
    h: &Poly,
    tol: f64,
) -> Result<FunctionalRelation> {
    let d = h.degree();
    if v.max_order() < d {
        return Err(Error::Range(format!("need v moments up to {d}")));
    }
    let max_order = u.max_order().min(v.max_order() - d);
    let vm = v.moments();
    let shifted = |m: usize| -> (f64, f64) {
        h.coeffs()
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(s, mag), (i, c)| {
                (s + c * vm[m + i], mag + (c * vm[m + i]).abs())
            })
    };
    let scale = u.moments()[0] / shifted(0).0;
    if !scale.is_finite() {
        return Err(Error::Degeneracy("<v, h> vanishes".into()));
    }
    let mut max_residual = 0.0f64;
    for m in 0..=max_order {
        let (w, mag) = shifted(m);
        let um = u.moments()[m];
        let denom = um.abs().max((scale * mag).abs());
        if denom > 0.0 {
            max_residual = max_residual.max((um - scale * w).abs() / denom);
        }
    }
    Ok(FunctionalRelation {
        passed: max_residual <= tol,
        scale,
        max_residual,
        max_order,
    })
}

/// Checks `h_k(J_P~) = M~^T M~` with `M~ = D_Q^{-1/2} M D_P^{1/2}` on the
/// interior block `0..=m-k-2` (positive-definite families only).
pub fn orthonormal_identity_check(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    report: &ConditionReport,
    h: &Poly,
    m: usize,
    tol: f64,
) -> Result<IdentityCheck> {
    require_passing(comb, report)?;
    let k = comb.k();
    let rows = interior_rows(m, k)?;
    let tilde = tilde_recurrence(rec, comb, report)?;
    let gammas = rec.gammas().iter().take(m + k - 1);
    let tilde_gammas = tilde.gammas().iter().take(m - 1);
    if let Some(g) = gammas.chain(tilde_gammas).find(|g| **g <= 0.0) {
        return Err(Error::Domain(format!(
            "gamma = {g} is not positive; the identity needs orthonormal families"
        )));
    }
    let dp = norm_diagonal(rec, m, 1.0)?;
    let dq = norm_diagonal(&tilde, m, 1.0)?;
    let md = change_basis_matrix(comb, report, m)?.to_dense();
    let mt = DMatrix::from_fn(m, m, |r, c| md[(r, c)] * (dp[c] / dq[r]).sqrt());
    let gram = mt.transpose() * &mt;
    let hj = poly_of_jacobi(rec, h, m, true)?;
    let block = |a: &DMatrix<f64>| a.view((0, 0), (rows, rows)).into_owned();
    let (gram, hj) = (block(&gram), block(&hj));
    Ok(IdentityCheck::new(
        (&gram - &hj).amax(),
        gram.amax().max(hj.amax()),
        tol,
    ))
}

/// Agreement of the three expressions for `h_k(J_Q)`:
/// powers of `J_Q`, `M D_P M^T D_Q^{-1}`, and `M h_k(J_P) M^{-1}`.
pub fn hk_route_agreement(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    report: &ConditionReport,
    h: &Poly,
    m: usize,
    tol: f64,
) -> Result<IdentityCheck> {
    require_passing(comb, report)?;
    let rows = interior_rows(m, comb.k())?;
    let tilde = tilde_recurrence(rec, comb, report)?;
    let dp = norm_diagonal(rec, m, 1.0)?;
    let dq = norm_diagonal(&tilde, m, 1.0)?;
    let md = change_basis_matrix(comb, report, m)?.to_dense();
    let inv = md
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("change of basis is singular".into()))?;
    let from_powers = poly_of_jacobi(&tilde, h, m, false)?;
    let mdp = DMatrix::from_fn(m, m, |r, c| md[(r, c)] * dp[c]);
    let from_norms = DMatrix::from_fn(m, m, |r, c| mdp.row(r).dot(&md.row(c)) / dq[c]);
    let conjugated = &md * poly_of_jacobi(rec, h, m, false)? * inv;
    let residual = max_abs_rows(&(&from_powers - &from_norms), rows)
        .max(max_abs_rows(&(&from_powers - &conjugated), rows));
    Ok(IdentityCheck::new(
        residual,
        max_abs_rows(&from_powers, rows),
        tol,
    ))
}
