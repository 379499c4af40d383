//! The combination `Q_n = P_n + a_1 P_{n-1} + ... + a_k P_{n-k}` (`n >= k+1`)
//! and the conditions under which `{Q_n}` is again a monic orthogonal family.
//!
//! For `n >= k+2` the three-term relation of `Q_n` reduces to
//!
//! ```text
//! gamma_n + a_1 (beta_{n-1} - beta_n) = gamma_{n-k}
//! a_{j-1} (gamma_{n-k} - gamma_{n-j+1}) = a_j (beta_{n-j} - beta_n),   2 <= j <= k
//! ```
//!
//! At `n = k+1` the relation defines `Q_k = P_k + sum_j a_j^(k) P_{k-j}` with
//!
//! ```text
//! a_j^(k) G = a_j gamma_{k-j+1} + a_{j+1} (beta_{k-j} - beta_{k+1}),  1 <= j < k
//! a_k^(k) G = a_k gamma_1,       G = gamma_{k+1} + a_1 (beta_k - beta_{k+1}) != 0
//! ```
//!
//! and `Q_{k-1}, ..., Q_0` follow by downward Favard steps, each of which
//! must produce a nonzero `gamma~`.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::recurrence::{expand_in_basis, monic_basis, RecurrencePair, GAMMA_FLOOR};
use crate::scalar::Scalar;

/// Default tolerance for the condition residuals.
pub const DEFAULT_CONDITION_TOL: f64 = 1e-10;
/// Relative floor below which a downward Favard `gamma~` counts as zero.
pub const FAVARD_TOL: f64 = 1e-12;

/// The constants `a_1..a_k` of the combination, `a_k != 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombCoeffs {
    a: Vec<f64>,
}

impl CombCoeffs {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        match a.last() {
            None => Err(Error::Domain("need k >= 1 coefficients".into())),
            Some(&0.0) => Err(Error::Domain("a_k must be nonzero".into())),
            _ if a.iter().any(|x| !x.is_finite()) => {
                Err(Error::Domain("coefficients must be finite".into()))
            }
            _ => Ok(Self { a }),
        }
    }

    pub fn k(&self) -> usize {
        self.a.len()
    }

    /// `a_j` for `1 <= j <= k`; zero for `j > k`, and `a_0 = 1`.
    pub fn a(&self, j: usize) -> f64 {
        match j {
            0 => 1.0,
            _ => self.a.get(j - 1).copied().unwrap_or(0.0),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.a
    }
}

/// Output of one downward Favard step.
#[derive(Debug, Clone, PartialEq)]
pub struct FavardTriple<T = f64> {
    pub beta: T,
    pub gamma: T,
    pub q_prev: Poly<T>,
}

/// Recovers `(beta~_m, gamma~_m, Q_{m-1})` from `x Q_m = Q_{m+1} + beta~_m Q_m + gamma~_m Q_{m-1}`.
pub fn downward_favard(q_next: &Poly, q_cur: &Poly) -> Result<FavardTriple> {
    downward_favard_in(q_next, q_cur, FAVARD_TOL)
}

/// [`downward_favard`] over any scalar; `gamma~` is zero when
/// `|gamma~| <= tol * max(1, max |coeff of x Q_m|)` (use `tol = 0` for exact arithmetic).
pub fn downward_favard_in<T: Scalar>(
    q_next: &Poly<T>,
    q_cur: &Poly<T>,
    tol: f64,
) -> Result<FavardTriple<T>> {
    let m = q_cur.degree();
    if m == 0 || q_cur.is_zero() || !q_cur.is_monic() {
        return Err(Error::Domain(
            "current polynomial must be monic of degree >= 1".into(),
        ));
    }
    if q_next.degree() != m + 1 || !q_next.is_monic() {
        return Err(Error::Domain(format!(
            "next polynomial must be monic of degree {}",
            m + 1
        )));
    }
    let shifted = q_cur.mul_x();
    let rest = &shifted - q_next;
    let beta = rest.coeff(m);
    let rest = rest.add_scaled(q_cur, &-beta.clone());
    let gamma = rest.coeff(m - 1);
    let scale = shifted.max_abs_coeff().max(1.0);
    if gamma.is_zero() || (tol > 0.0 && gamma.to_f64().abs() <= tol * scale) {
        return Err(Error::Degeneracy(format!(
            "gamma~_{m} = {:e} vanishes; no three-term relation at degree {m}",
            gamma.to_f64()
        )));
    }
    // divide through, pinning the leading coefficient: gamma * (1/gamma) may round off one
    let inv = T::one() / gamma.clone();
    let mut coeffs: Vec<T> = rest.coeffs()[..m]
        .iter()
        .map(|c| c.clone() * inv.clone())
        .collect();
    coeffs[m - 1] = T::one();
    let q_prev = Poly::new(coeffs);
    Ok(FavardTriple {
        beta,
        gamma,
        q_prev,
    })
}

/// Condition (i) at degree `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct FavardStep {
    pub m: usize,
    pub beta: f64,
    pub gamma: f64,
    pub passed: bool,
}

/// Both residual families of the `n >= k+2` conditions at one `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CondIiRow {
    pub n: usize,
    /// `gamma_n + a_1 (beta_{n-1} - beta_n) - gamma_{n-k}`
    pub gamma_residual: f64,
    /// `a_{j-1} (gamma_{n-k} - gamma_{n-j+1}) - a_j (beta_{n-j} - beta_n)` for `j = 2..=k`.
    pub beta_residuals: Vec<f64>,
    /// Largest magnitude entering the equations (at least 1).
    pub scale: f64,
    pub passed: bool,
}

/// Everything [`check_conditions`] found out about one combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub comb: CombCoeffs,
    /// Largest `n` checked.
    pub horizon: usize,
    pub tol: f64,
    /// `G = gamma_{k+1} + a_1 (beta_k - beta_{k+1})`, which is `gamma~_{k+1}`.
    pub pivot: f64,
    /// `a_1^(k)..a_k^(k)`, the `P`-expansion of `Q_k`.
    pub fourier: Vec<f64>,
    /// Residuals of the `n = k+1` equations evaluated with the `Q_k` that a
    /// downward Favard step from `Q_{k+2}, Q_{k+1}` produces.
    pub cond_iii: Vec<f64>,
    pub cond_i: Vec<FavardStep>,
    pub cond_ii: Vec<CondIiRow>,
    /// `n` in `k+1..=N` with `gamma~_n = 0`.
    pub vanishing_tilde_gamma: Vec<usize>,
    /// `Q_0..Q_k` when the completion succeeded.
    pub completion: Vec<Poly>,
    /// `P`-basis coefficients of `Q_0..Q_k`; row `n` has `n + 1` entries.
    pub lower_expansions: Vec<Vec<f64>>,
    pub failures: Vec<String>,
    pub verdict: bool,
}

impl ConditionReport {
    pub fn k(&self) -> usize {
        self.comb.k()
    }

    /// Largest `|residual| / scale` over the `n >= k+2` equations.
    pub fn max_cond_ii_residual(&self) -> f64 {
        self.cond_ii
            .iter()
            .flat_map(|r| {
                std::iter::once(r.gamma_residual)
                    .chain(r.beta_residuals.iter().copied())
                    .map(move |x| x.abs() / r.scale)
            })
            .fold(0.0, f64::max)
    }

    fn require_passing(&self, comb: &CombCoeffs) -> Result<()> {
        if &self.comb != comb {
            return Err(Error::State(
                "report was computed for different coefficients".into(),
            ));
        }
        if !self.verdict {
            return Err(Error::State(format!(
                "combination is not orthogonal: {}",
                self.failures.join("; ")
            )));
        }
        Ok(())
    }
}

fn max_abs(values: &[f64]) -> f64 {
    values.iter().map(|v| v.abs()).fold(1.0, f64::max)
}

/// `Q_n` from the defining combination, `n >= k+1`, over any scalar.
fn combination<T: Scalar>(basis: &[Poly<T>], comb: &CombCoeffs, n: usize) -> Poly<T> {
    (1..=comb.k()).fold(basis[n].clone(), |acc, j| {
        acc.add_scaled(&basis[n - j], &T::from_f64(comb.a(j)))
    })
}

/// Evaluates every orthogonality condition for `comb` over `k+2 <= n <= n_max`.
pub fn check_conditions(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    n_max: usize,
    tol: f64,
) -> Result<ConditionReport> {
    let k = comb.k();
    if n_max < k + 2 || n_max > rec.horizon() {
        return Err(Error::Range(format!(
            "need k+2 = {} <= N = {n_max} <= horizon {}",
            k + 2,
            rec.horizon()
        )));
    }
    let a = |j: usize| comb.a(j);
    let b = |n: usize| rec.beta(n);
    let g = |n: usize| rec.gamma(n);
    let mut failures = Vec::new();

    let cond_ii: Vec<CondIiRow> = (k + 2..=n_max)
        .map(|n| {
            let gamma_residual = g(n) + a(1) * (b(n - 1) - b(n)) - g(n - k);
            let beta_residuals: Vec<f64> = (2..=k)
                .map(|j| a(j - 1) * (g(n - k) - g(n - j + 1)) - a(j) * (b(n - j) - b(n)))
                .collect();
            let mut mags: Vec<f64> = vec![g(n), g(n - k), b(n), b(n - 1)];
            mags.extend((2..=k).flat_map(|j| [g(n - j + 1), b(n - j)]));
            let scale = max_abs(&mags) * max_abs(comb.as_slice());
            let passed = gamma_residual.abs() <= tol * scale
                && beta_residuals.iter().all(|r| r.abs() <= tol * scale);
            CondIiRow {
                n,
                gamma_residual,
                beta_residuals,
                scale,
                passed,
            }
        })
        .collect();
    if let Some(row) = cond_ii.iter().find(|r| !r.passed) {
        failures.push(format!("condition at n = {} fails", row.n));
    }

    let pivot = g(k + 1) + a(1) * (b(k) - b(k + 1));
    let pivot_ok = pivot.abs() > tol * max_abs(&[g(k + 1), b(k), b(k + 1)]);
    if !pivot_ok {
        failures.push(format!("gamma~_{} = {pivot:e} vanishes", k + 1));
    }

    let vanishing_tilde_gamma: Vec<usize> = (k + 1..=n_max)
        .filter(|&n| {
            let gt = g(n) + a(1) * (b(n - 1) - b(n));
            gt.abs() <= GAMMA_FLOOR.max(tol * max_abs(&[g(n), b(n), b(n - 1)]))
        })
        .collect();
    if let Some(n) = vanishing_tilde_gamma.iter().find(|&&n| n > k + 1) {
        failures.push(format!("gamma~_{n} vanishes"));
    }

    let basis = monic_basis::<f64>(rec, k + 2)?;
    let mut fourier = Vec::new();
    let mut cond_iii = Vec::new();
    let mut cond_i = Vec::new();
    let mut completion = Vec::new();

    if pivot_ok {
        // (iii) solved for the Fourier coefficients of Q_k
        let rhs = |j: usize| {
            if j < k {
                a(j) * g(k - j + 1) + a(j + 1) * (b(k - j) - b(k + 1))
            } else {
                a(k) * g(1)
            }
        };
        fourier = (1..=k).map(|j| rhs(j) / pivot).collect();

        // independent route: Q_k from a Favard step on Q_{k+2}, Q_{k+1}
        let q_top = combination(&basis, comb, k + 2);
        let q_k1 = combination(&basis, comb, k + 1);
        if let Ok(step) = downward_favard(&q_top, &q_k1) {
            let expansion = expand_in_basis(rec, &step.q_prev)?;
            cond_iii = (1..=k)
                .map(|j| {
                    let lhs = rhs(j);
                    let r = lhs - expansion[k - j] * pivot;
                    r / lhs.abs().max(pivot.abs()).max(1.0)
                })
                .collect();
            if cond_iii.iter().any(|r| r.abs() > tol) {
                failures.push("Fourier coefficients of Q_k disagree between routes".into());
            }
        }

        let q_k = (1..=k).fold(basis[k].clone(), |acc, j| {
            acc.add_scaled(&basis[k - j], &fourier[j - 1])
        });
        let mut upper = q_k1;
        let mut cur = q_k;
        let mut lower = vec![cur.clone()];
        for m in (1..=k).rev() {
            match downward_favard(&upper, &cur) {
                Ok(step) => {
                    cond_i.push(FavardStep {
                        m,
                        beta: step.beta,
                        gamma: step.gamma,
                        passed: true,
                    });
                    upper = cur;
                    cur = step.q_prev;
                    lower.push(cur.clone());
                }
                Err(_) => {
                    cond_i.push(FavardStep {
                        m,
                        beta: f64::NAN,
                        gamma: 0.0,
                        passed: false,
                    });
                    failures.push(format!("no three-term relation at degree {m}"));
                    break;
                }
            }
        }
        cond_i.reverse();
        if lower.len() == k + 1 {
            lower.reverse();
            completion = lower;
        }
    }
    let mut lower_expansions = Vec::with_capacity(completion.len());
    for (n, q) in completion.iter().enumerate() {
        let mut e = expand_in_basis(rec, q)?;
        e.resize(n + 1, 0.0);
        lower_expansions.push(e);
    }

    let verdict = failures.is_empty();
    Ok(ConditionReport {
        comb: comb.clone(),
        horizon: n_max,
        tol,
        pivot,
        fourier,
        cond_iii,
        cond_i,
        cond_ii,
        vanishing_tilde_gamma,
        completion,
        lower_expansions,
        failures,
        verdict,
    })
}

/// `Q_n`: the defining combination for `n >= k+1`, the completion from a
/// passing report for `n <= k`.
pub fn q_poly(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    report: Option<&ConditionReport>,
    n: usize,
) -> Result<Poly> {
    if n > comb.k() {
        let basis = monic_basis::<f64>(rec, n)?;
        return Ok(combination(&basis, comb, n));
    }
    let report = report.ok_or_else(|| {
        Error::State(format!(
            "Q_{n} is only determined by a passing condition report"
        ))
    })?;
    report.require_passing(comb)?;
    Ok(report.completion[n].clone())
}

/// `Q_0..Q_{n_max}`.
pub fn q_sequence(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    report: &ConditionReport,
    n_max: usize,
) -> Result<Vec<Poly>> {
    report.require_passing(comb)?;
    let basis = monic_basis::<f64>(rec, n_max)?;
    let k = comb.k();
    Ok((0..=n_max)
        .map(|n| {
            if n <= k {
                report.completion[n].clone()
            } else {
                combination(&basis, comb, n)
            }
        })
        .collect())
}

/// Recurrence coefficients of `{Q_n}` up to the report's horizon.
///
/// `beta~_n = beta_n`, `gamma~_n = gamma_n + a_1 (beta_{n-1} - beta_n)` for
/// `n >= k+1`; lower entries come from the downward Favard completion.
pub fn tilde_recurrence(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    report: &ConditionReport,
) -> Result<RecurrencePair> {
    report.require_passing(comb)?;
    let k = comb.k();
    let n_max = report.horizon;
    let mut beta = vec![-report.completion[1].coeff(0)];
    let mut gamma = Vec::with_capacity(n_max);
    for step in &report.cond_i {
        beta.push(step.beta);
        gamma.push(step.gamma);
    }
    for n in k + 1..=n_max {
        beta.push(rec.beta(n));
        gamma.push(rec.gamma(n) + comb.a(1) * (rec.beta(n - 1) - rec.beta(n)));
    }
    RecurrencePair::new(beta, gamma)
}
