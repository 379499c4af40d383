//! Shared fixtures for the benchmarks.

use opoly_core::lincomb::{check_conditions, CombCoeffs, ConditionReport};
use opoly_core::recurrence::{chebyshev_family, ChebyshevKind, RecurrencePair};

pub struct Fixture {
    pub rec: RecurrencePair,
    pub comb: CombCoeffs,
    pub report: ConditionReport,
}

/// Chebyshev-T with `Q_n = P_n - P_{n-2} / 8`, checked up to `horizon`.
pub fn chebyshev_t_k2(horizon: usize) -> Fixture {
    let rec = chebyshev_family(ChebyshevKind::First, horizon).expect("horizon >= 2");
    let comb = CombCoeffs::new(vec![0.0, -0.125]).expect("a_2 nonzero");
    let report = check_conditions(&rec, &comb, horizon, 1e-10).expect("horizon >= 4");
    Fixture { rec, comb, report }
}
