//! Brute-force orthogonality test for a combination, independent of the
//! condition checks.
//!
//! The sequence is rebuilt in exact arithmetic without consulting the
//! conditions: `Q_n` for `n > k` straight from the combination, `Q_k..Q_0` by
//! downward Favard steps. The only functional that can make it orthogonal is
//! the dual one (`v_0 = 1`, `<v, Q_n> = 0` for `n >= 1`), so the Gram matrix
//! against it decides the question.

use crate::error::{Error, Result};
use crate::lincomb::{downward_favard_in, CombCoeffs};
use crate::moments::{
    dual_functional, gram_orthogonality_check, moments_from_recurrence, GramReport,
};
use crate::poly::Poly;
use crate::recurrence::{monic_basis, RecurrencePair};
use crate::scalar::Exact;

/// Outcome of [`orthogonality_oracle`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    /// Highest degree in the Gram matrix.
    pub degree: usize,
    /// Degree `m` at which a downward step found `gamma~_m = 0`.
    pub broken_at: Option<usize>,
    pub gram: Option<GramReport>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.broken_at.is_none() && self.gram.as_ref().is_some_and(GramReport::passed)
    }
}

/// `Q_0..Q_{top}` in exact arithmetic, or the degree where the completion breaks.
pub fn exact_q_sequence(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    top: usize,
) -> Result<std::result::Result<Vec<Poly<Exact>>, usize>> {
    let k = comb.k();
    if top < k + 2 || top > rec.horizon() + 1 {
        return Err(Error::Range(format!(
            "need k+2 = {} <= top = {top} <= horizon + 1 = {}",
            k + 2,
            rec.horizon() + 1
        )));
    }
    let basis = monic_basis::<Exact>(rec, top)?;
    let a: Vec<Exact> = (1..=k)
        .map(|j| Exact::from_float(comb.a(j)).expect("finite"))
        .collect();
    let mut q: Vec<Poly<Exact>> = (k + 1..=top)
        .map(|n| {
            a.iter().enumerate().fold(basis[n].clone(), |acc, (i, aj)| {
                acc.add_scaled(&basis[n - i - 1], aj)
            })
        })
        .collect();
    // q holds Q_{k+1}..; prepend the downward completion
    let mut lower = Vec::with_capacity(k + 1);
    let (mut upper, mut cur) = (q[1].clone(), q[0].clone());
    for m in (1..=k + 1).rev() {
        match downward_favard_in(&upper, &cur, 0.0) {
            Ok(step) => {
                upper = cur;
                cur = step.q_prev.clone();
                lower.push(step.q_prev);
            }
            Err(_) => return Ok(Err(m)),
        }
    }
    lower.reverse();
    lower.append(&mut q);
    Ok(Ok(lower))
}

/// Gram test of `Q_0..Q_degree` against the dual functional, exactly.
///
/// Needs `2 degree <= N + 1`.
pub fn orthogonality_oracle(
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    degree: usize,
    tol: f64,
) -> Result<OracleReport> {
    match exact_q_sequence(rec, comb, 2 * degree)? {
        Err(m) => Ok(OracleReport {
            degree,
            broken_at: Some(m),
            gram: None,
        }),
        Ok(q) => {
            let v = dual_functional(&q)?;
            let gram = gram_orthogonality_check(&v, &q[..=degree], tol)?;
            Ok(OracleReport {
                degree,
                broken_at: None,
                gram: Some(gram),
            })
        }
    }
}

/// Gram test of the exact `Q_0..Q_degree` against the moments generated by a
/// recurrence claimed for them.
pub fn gram_against_recurrence(
    claimed: &RecurrencePair,
    rec: &RecurrencePair,
    comb: &CombCoeffs,
    degree: usize,
    tol: f64,
) -> Result<Option<GramReport>> {
    let Ok(q) = exact_q_sequence(rec, comb, degree.max(comb.k() + 2))? else {
        return Ok(None);
    };
    let u = moments_from_recurrence::<Exact>(claimed, 2 * degree)?;
    gram_orthogonality_check(&u, &q[..=degree], tol).map(Some)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lincomb::{check_conditions, tilde_recurrence, DEFAULT_CONDITION_TOL};
    use crate::recurrence::{chebyshev_family, ChebyshevKind};

    fn comb(a: &[f64]) -> CombCoeffs {
        CombCoeffs::new(a.to_vec()).unwrap()
    }

    #[test]
    fn chebyshev_combinations_are_orthogonal() {
        for kind in ChebyshevKind::ALL {
            let rec = chebyshev_family(kind, 30).unwrap();
            for a in [&[0.3][..], &[0.0, -0.125], &[0.5, 0.0625]] {
                let report = orthogonality_oracle(&rec, &comb(a), 12, 1e-9).unwrap();
                assert!(report.passed(), "{kind:?} {a:?}: {report:?}");
                let gram = report.gram.unwrap();
                assert_eq!(gram.max_ratio, 0.0, "exact arithmetic leaves no residue");
            }
        }
    }

    #[test]
    fn legendre_k2_is_not() {
        let legendre = RecurrencePair::new(
            vec![0.0; 31],
            (1..=30)
                .map(|n| (n * n) as f64 / (4 * n * n - 1) as f64)
                .collect(),
        )
        .unwrap();
        let report = orthogonality_oracle(&legendre, &comb(&[0.0, -0.125]), 12, 1e-9).unwrap();
        assert!(!report.passed());
    }

    #[test]
    fn exact_sequence_matches_the_completion() {
        let t = chebyshev_family(ChebyshevKind::First, 12).unwrap();
        let q = exact_q_sequence(&t, &comb(&[0.0, -0.125]), 6)
            .unwrap()
            .unwrap();
        let want: Poly<Exact> = Poly::new(vec![-0.75, 0.0, 1.0]).cast();
        assert_eq!(q[2], want);
        assert_eq!(q.len(), 7);
    }

    #[test]
    fn tilde_recurrence_generates_the_right_functional() {
        let t = chebyshev_family(ChebyshevKind::Fourth, 30).unwrap();
        let c = comb(&[0.2, 0.04]);
        let report = check_conditions(&t, &c, 30, DEFAULT_CONDITION_TOL).unwrap();
        let tilde = tilde_recurrence(&t, &c, &report).unwrap();
        let gram = gram_against_recurrence(&tilde, &t, &c, 12, 1e-9)
            .unwrap()
            .unwrap();
        assert!(gram.passed(), "{gram:?}");
    }
}
