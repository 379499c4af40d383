//! Interpolatory quadrature on a node set and its degree of precision.
//!
//! For nodes `c_1..c_n` with node polynomial `q` the Christoffel numbers are
//! `lambda_k = <u, q(x) / ((x - c_k) q'(c_k))>`. Gauss rules use the zeros of
//! `P_n`; when the nodes are the zeros of `Q_n = P_n + a_1 P_{n-1} + ... + a_k P_{n-k}`
//! the rule is exact through degree `2n - 1 - k` and no further.

use crate::error::{Error, Result};
use crate::jacobi::zeros_q;
use crate::linalg::symmetric_tridiagonal_eigen;
use crate::lincomb::CombCoeffs;
use crate::moments::MomentFunctional;
use crate::poly::Poly;
use crate::recurrence::{eval_p_with_derivative, RecurrencePair};

/// Default exactness tolerance, relative with floor 1.
pub const DEFAULT_QUAD_TOL: f64 = 1e-9;
/// Relative gap below which two nodes count as coincident.
const NODE_GAP: f64 = 1e-10;
/// Imaginary part above which a zero counts as complex.
const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Certified degree of precision, when computed.
    pub degree_of_precision: Option<usize>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `sum_k lambda_k c_k^m`
    pub fn integrate_monomial(&self, m: i32) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * c.powi(m))
            .sum()
    }
}

fn check_distinct(nodes: &[f64]) -> Result<()> {
    let mut sorted = nodes.to_vec();
    sorted.sort_by(f64::total_cmp);
    for pair in sorted.windows(2) {
        if (pair[1] - pair[0]).abs() <= NODE_GAP * pair[0].abs().max(pair[1].abs()).max(1.0) {
            return Err(Error::Domain(format!("node {} is repeated", pair[0])));
        }
    }
    Ok(())
}

/// `lambda_k = <f, q / ((x - c_k) q'(c_k))>` with `q = prod (x - c_j)`.
pub fn christoffel_numbers(f: &MomentFunctional, nodes: &[f64]) -> Result<Vec<f64>> {
    if nodes.is_empty() {
        return Err(Error::Domain("need at least one node".into()));
    }
    check_distinct(nodes)?;
    if f.max_order() + 1 < nodes.len() {
        return Err(Error::Range(format!(
            "{} nodes need moments up to u_{}",
            nodes.len(),
            nodes.len() - 1
        )));
    }
    let q = Poly::from_roots(nodes);
    nodes
        .iter()
        .enumerate()
        .map(|(k, &ck)| {
            let dq: f64 = nodes
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &cj)| ck - cj)
                .product();
            if dq == 0.0 || !dq.is_finite() {
                return Err(Error::Conditioning(format!("q'({ck}) = {dq:e}")));
            }
            let (quotient, _) = q.div_linear(&ck);
            Ok(f.apply(&quotient)? / dq)
        })
        .collect()
}

/// Gauss rule with `n` nodes; needs `gamma_1..gamma_n > 0`.
pub fn gauss_rule(rec: &RecurrencePair, f: &MomentFunctional, n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > rec.horizon() {
        return Err(Error::Range(format!("need 1 <= n <= {}", rec.horizon())));
    }
    if let Some(i) = (1..=n).find(|&i| rec.gamma(i) <= 0.0) {
        return Err(Error::Domain(format!(
            "gamma_{i} = {} is not positive",
            rec.gamma(i)
        )));
    }
    let off: Vec<f64> = (1..n).map(|i| rec.gamma(i).sqrt()).collect();
    let (nodes, _) = symmetric_tridiagonal_eigen(&rec.betas()[..n], &off)?;
    let weights = christoffel_numbers(f, &nodes)?;
    let mut rule = QuadratureRule {
        nodes,
        weights,
        degree_of_precision: None,
    };
    let top = (2 * n + 2).min(f.max_order());
    rule.degree_of_precision = degree_of_precision(f, &rule, top, DEFAULT_QUAD_TOL)?.degree;
    Ok(rule)
}

/// Outcome of [`degree_of_precision`].
#[derive(Debug, Clone, PartialEq)]
pub struct Precision {
    /// Largest `d` with every degree `0..=d` exact; `None` if degree 0 already fails.
    pub degree: Option<usize>,
    /// `true` when every degree up to the limit was exact, so `degree` is only a lower bound.
    pub saturated: bool,
    /// `false` when `degree` lies outside `n-1 <= d <= 2n-1`.
    pub in_bracket: bool,
    /// `|sum lambda c^m - u_m| / (1 + |u_m|)` for `m = 0..=max_degree`.
    pub errors: Vec<f64>,
}

/// Largest `d <= max_degree` with `|sum lambda_k c_k^m - u_m| <= tol (1 + |u_m|)` for all `m <= d`.
pub fn degree_of_precision(
    f: &MomentFunctional,
    rule: &QuadratureRule,
    max_degree: usize,
    tol: f64,
) -> Result<Precision> {
    if max_degree > f.max_order() {
        return Err(Error::Range(format!(
            "degree {max_degree} needs u_{max_degree}, have up to u_{}",
            f.max_order()
        )));
    }
    let errors: Vec<f64> = (0..=max_degree)
        .map(|m| {
            let um = f.moments()[m];
            (rule.integrate_monomial(m as i32) - um).abs() / (1.0 + um.abs())
        })
        .collect();
    let exact = errors.iter().take_while(|e| **e <= tol).count();
    let degree = exact.checked_sub(1);
    let n = rule.len();
    let in_bracket = degree.is_some_and(|d| d + 1 >= n && d < 2 * n);
    Ok(Precision {
        degree,
        saturated: exact == errors.len(),
        in_bracket,
        errors,
    })
}

/// Outcome of [`shohat_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct ShohatReport {
    pub rule: QuadratureRule,
    pub precision: Precision,
    /// `2n - 1 - k`
    pub expected: usize,
    pub passed: bool,
}

/// `Q_n(x)` and `Q_n'(x)` from the recurrence, without monomial coefficients.
fn eval_q(rec: &RecurrencePair, comb: &CombCoeffs, n: usize, x: f64) -> Result<(f64, f64)> {
    (0..=comb.k()).try_fold((0.0, 0.0), |(v, d), j| {
        let (p, dp) = eval_p_with_derivative(rec, n - j, x)?;
        Ok((v + comb.a(j) * p, d + comb.a(j) * dp))
    })
}

/// Builds the rule on the zeros of `Q_n` and checks `d = 2n - 1 - k`.
///
/// Fails as inapplicable when `Q_n` has complex or repeated zeros.
pub fn shohat_check(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    f: &MomentFunctional,
    n: usize,
    tol: f64,
) -> Result<ShohatReport> {
    let k = comb.k();
    let zeros = zeros_q(rec, comb, n)?;
    if let Some(z) = zeros
        .eigenvalues
        .iter()
        .find(|z| z.im.abs() > IMAG_TOL * z.norm().max(1.0))
    {
        return Err(Error::Inapplicable(format!(
            "Q_{n} has the complex zero {z}"
        )));
    }
    let mut nodes: Vec<f64> = zeros.eigenvalues.iter().map(|z| z.re).collect();
    // two Newton steps on the recurrence form of Q_n
    for x in &mut nodes {
        for _ in 0..2 {
            let (v, d) = eval_q(rec, comb, n, *x)?;
            let step = v / d;
            if step.is_finite() {
                *x -= step;
            }
        }
    }
    nodes.sort_by(f64::total_cmp);
    if check_distinct(&nodes).is_err() {
        return Err(Error::Inapplicable(format!("Q_{n} has a repeated zero")));
    }
    let weights = christoffel_numbers(f, &nodes)?;
    let mut rule = QuadratureRule {
        nodes,
        weights,
        degree_of_precision: None,
    };
    let max_degree = (2 * n + 2).min(f.max_order());
    let precision = degree_of_precision(f, &rule, max_degree, tol)?;
    rule.degree_of_precision = precision.degree;
    let expected = 2 * n - 1 - k;
    let passed = precision.degree == Some(expected) && !precision.saturated;
    Ok(ShohatReport {
        rule,
        precision,
        expected,
        passed,
    })
}
