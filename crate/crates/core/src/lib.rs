//! Fixed-length, constant-coefficient combinations of monic orthogonal polynomials
//!
//! ```text
//! Q_n = P_n + a_1 P_{n-1} + ... + a_k P_{n-k},   n > k,  a_k != 0
//! ```
//!
//! The crate decides when `{Q_n}` is again orthogonal, produces its
//! recurrence, relates the Jacobi matrices of both families, computes the
//! polynomial `h_k` with `u = h_k v`, and checks the quadrature consequences.
//!
//! ```
//! use opoly_core::lincomb::{check_conditions, tilde_recurrence, CombCoeffs};
//! use opoly_core::recurrence::{chebyshev_family, ChebyshevKind};
//!
//! let rec = chebyshev_family(ChebyshevKind::First, 30)?;
//! let comb = CombCoeffs::new(vec![0.0, -0.125])?;
//! let report = check_conditions(&rec, &comb, 30, 1e-10)?;
//! assert!(report.verdict);
//! let tilde = tilde_recurrence(&rec, &comb, &report)?;
//! assert!((tilde.gamma(2) - 0.125).abs() < 1e-15);
//! # Ok::<(), opoly_core::Error>(())
//! ```

pub mod error;
pub mod jacobi;
pub mod k2;
pub mod linalg;
pub mod lincomb;
pub mod moments;
pub mod oracle;
pub mod poly;
pub mod quadrature;
pub mod recurrence;
pub mod scalar;

pub use error::{Error, Result};
pub use jacobi::{
    change_basis_matrix, jacobi_truncation, norm_diagonal, orthonormal_identity_check,
    perturbation_l, solve_hk, verify_functional_relation, verify_intertwining, zeros_q, BandMatrix,
    HkSolution, TriDiag,
};
pub use k2::{
    characteristic_root, imaginary_residue, k2_family, CharacteristicRoot, K2Case, K2CaseTag,
    K2Params,
};
pub use lincomb::{
    check_conditions, downward_favard, q_poly, q_sequence, tilde_recurrence, CombCoeffs,
    ConditionReport,
};
pub use moments::{
    gram_orthogonality_check, is_quasi_definite, moments_from_recurrence, GramReport,
    MomentFunctional,
};
pub use poly::Poly;
pub use quadrature::{
    christoffel_numbers, degree_of_precision, gauss_rule, shohat_check, QuadratureRule,
};
pub use recurrence::{
    chebyshev_family, eval_p, hermite_family, k1_family, laguerre_family, legendre_family, poly_p,
    ChebyshevKind, RecurrencePair,
};
pub use scalar::{Exact, Scalar};
