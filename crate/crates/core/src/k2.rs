//! Families for which `Q_n = P_n + a1 P_{n-1} + a2 P_{n-2}` is again orthogonal.
//!
//! For `n >= 4` orthogonality forces
//!
//! ```text
//! gamma_n - gamma_{n-2} = a1 (beta_n - beta_{n-1})
//! a1 (gamma_{n-2} - gamma_{n-1}) = a2 (beta_{n-2} - beta_n)
//! ```
//!
//! so both coefficient sequences solve the third-order difference equation
//! `y_n + c y_{n-1} - c y_{n-2} - y_{n-3} = 0` with `c = 1 - a1^2/a2`, whose
//! characteristic polynomial is `(t - 1)(t^2 + (2 - a1^2/a2) t + 1)`. The
//! quadratic factor is `a2 (1 + t)^2 = a1^2 t`; its root decides which of
//! four closed forms applies from `n = 2` on.

use crate::error::{Error, Result};
use crate::recurrence::{RecurrencePair, GAMMA_FLOOR};
use num_complex::Complex64;
use std::f64::consts::PI;

/// `|a1^2 - 4 a2|` at or below this is the repeated-root case.
pub const DISCRIMINANT_TOL: f64 = 1e-12;
const CONSTRAINT_TOL: f64 = 1e-12;
const IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum K2CaseTag {
    A1Zero,
    EqualRoots,
    RealRoots,
    ComplexRoots,
}

/// Root structure of the characteristic equation for given `(a1, a2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CharacteristicRoot {
    /// `a1 = 0`: period-two solutions.
    Periodic,
    /// `a1^2 = 4 a2`: `t = 1` is a triple root.
    Triple,
    /// `a1^2 > 4 a2`: the root inside (-1, 1).
    Real(f64),
    /// `a1^2 < 4 a2`: `e^{i theta}` with `theta` in (0, pi).
    UnitCircle { theta: f64 },
}

impl CharacteristicRoot {
    pub fn tag(&self) -> K2CaseTag {
        match self {
            Self::Periodic => K2CaseTag::A1Zero,
            Self::Triple => K2CaseTag::EqualRoots,
            Self::Real(_) => K2CaseTag::RealRoots,
            Self::UnitCircle { .. } => K2CaseTag::ComplexRoots,
        }
    }

    /// The root as a complex number (`-1` for the periodic case, `1` for the triple root).
    pub fn lambda(&self) -> Complex64 {
        match *self {
            Self::Periodic => Complex64::new(-1.0, 0.0),
            Self::Triple => Complex64::new(1.0, 0.0),
            Self::Real(l) => Complex64::new(l, 0.0),
            Self::UnitCircle { theta } => Complex64::from_polar(1.0, theta),
        }
    }
}

/// Classifies `(a1, a2)`; `a2` must be nonzero.
pub fn characteristic_root(a1: f64, a2: f64) -> Result<CharacteristicRoot> {
    if a2 == 0.0 || !a2.is_finite() || !a1.is_finite() {
        return Err(Error::Domain(format!(
            "need finite a1 and nonzero a2, got ({a1}, {a2})"
        )));
    }
    if a1 == 0.0 {
        return Ok(CharacteristicRoot::Periodic);
    }
    let disc = a1 * a1 - 4.0 * a2;
    if disc.abs() <= DISCRIMINANT_TOL {
        return Ok(CharacteristicRoot::Triple);
    }
    // t^2 + s t + 1 = 0
    let s = 2.0 - a1 * a1 / a2;
    if disc > 0.0 {
        // |s| > 2: real roots with product 1; take the large one stably, invert it.
        let big = (-s - s.signum() * (s * s - 4.0).sqrt()) / 2.0;
        Ok(CharacteristicRoot::Real(1.0 / big))
    } else {
        let theta = (-s / 2.0).clamp(-1.0, 1.0).acos();
        debug_assert!(theta > 0.0 && theta < PI);
        Ok(CharacteristicRoot::UnitCircle { theta })
    }
}

/// Closed-form parameters for the n >= 2 part of the family, one variant per case.
#[derive(Debug, Clone, PartialEq)]
pub enum K2Case {
    /// `beta_n`, `gamma_n` alternate between their n = 2 and n = 3 values.
    A1Zero {
        beta_even: f64,
        beta_odd: f64,
        gamma_even: f64,
        gamma_odd: f64,
    },
    /// `beta_n = a + b n + c n^2`, `gamma_n = d + e n + f n^2`.
    EqualRoots {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        e: f64,
        f: f64,
    },
    /// `beta_n = a + b t^n + c t^-n`, `gamma_n = d + e t^n + f t^-n`.
    RealRoots {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        e: f64,
        f: f64,
    },
    /// `beta_n = a + 2 Re(b e^{i n theta})`, `gamma_n = d + 2 Re(e e^{i n theta})`.
    ComplexRoots {
        a: f64,
        b: Complex64,
        d: f64,
        e: Complex64,
    },
}

impl K2Case {
    pub fn tag(&self) -> K2CaseTag {
        match self {
            Self::A1Zero { .. } => K2CaseTag::A1Zero,
            Self::EqualRoots { .. } => K2CaseTag::EqualRoots,
            Self::RealRoots { .. } => K2CaseTag::RealRoots,
            Self::ComplexRoots { .. } => K2CaseTag::ComplexRoots,
        }
    }

    /// Repeated-root parameters with `c` and `e` solved from `a1 c = 2 f`, `a1 b = 2 e - 2 f`.
    pub fn equal_roots(a1: f64, a: f64, b: f64, d: f64, f: f64) -> Self {
        Self::EqualRoots {
            a,
            b,
            c: 2.0 * f / a1,
            d,
            e: (a1 * b + 2.0 * f) / 2.0,
            f,
        }
    }

    /// Real-root parameters with `c`, `e` solved from `a1 c = (1+t) f`, `a1 t b = (1+t) e`.
    pub fn real_roots(a1: f64, a2: f64, a: f64, b: f64, d: f64, f: f64) -> Result<Self> {
        let CharacteristicRoot::Real(t) = characteristic_root(a1, a2)? else {
            return Err(Error::Constraint(
                "a1^2 > 4 a2 required for real roots".into(),
            ));
        };
        Ok(Self::RealRoots {
            a,
            b,
            c: (1.0 + t) * f / a1,
            d,
            e: a1 * t * b / (1.0 + t),
            f,
        })
    }

    /// Complex-root parameters with `e` solved from `a1 t b = (1+t) e`.
    pub fn complex_roots(a1: f64, a2: f64, a: f64, b: Complex64, d: f64) -> Result<Self> {
        let root = characteristic_root(a1, a2)?;
        if root.tag() != K2CaseTag::ComplexRoots {
            return Err(Error::Constraint(
                "a1^2 < 4 a2 required for complex roots".into(),
            ));
        }
        let t = root.lambda();
        Ok(Self::ComplexRoots {
            a,
            b,
            d,
            e: b * t * a1 / (t + 1.0),
        })
    }
}

/// Parameters of a k = 2 family: closed form for n >= 2 plus the free seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct K2Params {
    pub case: K2Case,
    pub beta0: f64,
    pub beta1: f64,
    pub gamma1: f64,
}

fn check_relation(name: &str, lhs: Complex64, rhs: Complex64) -> Result<()> {
    let scale = lhs.norm().max(rhs.norm()).max(1.0);
    if (lhs - rhs).norm() > CONSTRAINT_TOL * scale {
        return Err(Error::Constraint(format!(
            "{name}: {lhs} != {rhs} (residual {:e})",
            (lhs - rhs).norm()
        )));
    }
    Ok(())
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Checks the case relations of `params.case` against `(a1, a2)`.
pub fn validate_params(a1: f64, a2: f64, params: &K2Params) -> Result<CharacteristicRoot> {
    let root = characteristic_root(a1, a2)?;
    if root.tag() != params.case.tag() {
        return Err(Error::Constraint(format!(
            "case {:?} does not match (a1, a2) = ({a1}, {a2}), which is {:?}",
            params.case.tag(),
            root.tag()
        )));
    }
    if params.gamma1.abs() <= GAMMA_FLOOR || !params.gamma1.is_finite() {
        return Err(Error::Constraint("gamma_1 must be nonzero".into()));
    }
    let t = root.lambda();
    match params.case {
        K2Case::A1Zero { .. } => {}
        K2Case::EqualRoots { b, c, e, f, .. } => {
            check_relation("a1 C = 2F", re(a1 * c), re(2.0 * f))?;
            check_relation("a1 B = 2E - 2F", re(a1 * b), re(2.0 * e - 2.0 * f))?;
        }
        K2Case::RealRoots { b, c, e, f, .. } => {
            check_relation("a1 C = (1 + t) F", re(a1 * c), (t + 1.0) * f)?;
            check_relation("a1 t B = (1 + t) E", t * a1 * b, (t + 1.0) * e)?;
        }
        K2Case::ComplexRoots { b, e, .. } => {
            check_relation("a1 t B = (1 + t) E", t * b * a1, (t + 1.0) * e)?;
        }
    }
    Ok(root)
}

/// Recurrence of a k = 2 family up to `horizon`.
///
/// The closed form fixes `beta_n, gamma_n` for `n >= 2`; `beta_0, beta_1,
/// gamma_1` are the seeds. The seeds are not constrained by the closed form,
/// so whether the combination is orthogonal still has to be confirmed with
/// [`crate::lincomb::check_conditions`].
pub fn k2_family(a1: f64, a2: f64, params: &K2Params, horizon: usize) -> Result<RecurrencePair> {
    if horizon < 2 {
        return Err(Error::Range(format!("horizon must be >= 2, got {horizon}")));
    }
    let root = validate_params(a1, a2, params)?;
    let mut beta = vec![params.beta0, params.beta1];
    let mut gamma = vec![params.gamma1];
    for n in 2..=horizon {
        let nf = n as f64;
        let (b, g) = match params.case {
            K2Case::A1Zero {
                beta_even,
                beta_odd,
                gamma_even,
                gamma_odd,
            } => {
                if n % 2 == 0 {
                    (beta_even, gamma_even)
                } else {
                    (beta_odd, gamma_odd)
                }
            }
            K2Case::EqualRoots { a, b, c, d, e, f } => {
                (a + b * nf + c * nf * nf, d + e * nf + f * nf * nf)
            }
            K2Case::RealRoots { a, b, c, d, e, f } => {
                let CharacteristicRoot::Real(t) = root else {
                    unreachable!()
                };
                let up = t.powi(n as i32);
                let down = t.powi(-(n as i32));
                (a + b * up + c * down, d + e * up + f * down)
            }
            K2Case::ComplexRoots { a, b, d, e } => {
                let CharacteristicRoot::UnitCircle { theta } = root else {
                    unreachable!()
                };
                let (bn, gn) = complex_terms(a, b, d, e, theta, n);
                let residue = bn.im.abs().max(gn.im.abs());
                if residue > IMAG_TOL * (1.0 + bn.re.abs().max(gn.re.abs())) {
                    return Err(Error::Numeric(format!(
                        "imaginary residue {residue:e} at n = {n}"
                    )));
                }
                (bn.re, gn.re)
            }
        };
        if !g.is_finite() || !b.is_finite() {
            return Err(Error::Numeric(format!("coefficients overflow at n = {n}")));
        }
        if g.abs() <= GAMMA_FLOOR {
            return Err(Error::Degeneracy(format!(
                "gamma_{n} = {g:e} vanishes; family is not quasi-definite at horizon {horizon}"
            )));
        }
        beta.push(b);
        gamma.push(g);
    }
    RecurrencePair::new(beta, gamma)
}

fn complex_terms(
    a: f64,
    b: Complex64,
    d: f64,
    e: Complex64,
    theta: f64,
    n: usize,
) -> (Complex64, Complex64) {
    let z = Complex64::from_polar(1.0, n as f64 * theta);
    (
        re(a) + b * z + b.conj() * z.conj(),
        re(d) + e * z + e.conj() * z.conj(),
    )
}

/// Largest imaginary part left in `beta_n`, `gamma_n` for `2 <= n <= horizon`
/// before the generator discards it. Zero outside the complex-root case.
pub fn imaginary_residue(a1: f64, a2: f64, params: &K2Params, horizon: usize) -> Result<f64> {
    let root = validate_params(a1, a2, params)?;
    let (&K2Case::ComplexRoots { a, b, d, e }, CharacteristicRoot::UnitCircle { theta }) =
        (&params.case, root)
    else {
        return Ok(0.0);
    };
    Ok((2..=horizon)
        .map(|n| {
            let (bn, gn) = complex_terms(a, b, d, e, theta, n);
            bn.im.abs().max(gn.im.abs())
        })
        .fold(0.0, f64::max))
}

/// Relative residuals of `y_n + c y_{n-1} - c y_{n-2} - y_{n-3}` for `from <= n < y.len()`.
pub fn difference_equation_residuals(a1: f64, a2: f64, y: &[f64], from: usize) -> Vec<f64> {
    let c = 1.0 - a1 * a1 / a2;
    (from.max(3)..y.len())
        .map(|n| {
            let terms = [y[n], c * y[n - 1], -c * y[n - 2], -y[n - 3]];
            let scale = terms
                .iter()
                .map(|t| t.abs())
                .fold(f64::MIN_POSITIVE, f64::max);
            terms.iter().sum::<f64>().abs() / scale
        })
        .collect()
}

/// Worst relative difference-equation residual of `(beta, gamma)` over `5 <= n <= N`.
pub fn family_difference_residuals(a1: f64, a2: f64, rec: &RecurrencePair) -> (f64, f64) {
    let worst = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
    // index the gammas by n; slot 0 is never read from n = 5 on
    let gamma: Vec<f64> = std::iter::once(0.0)
        .chain(rec.gammas().iter().copied())
        .collect();
    (
        worst(difference_equation_residuals(a1, a2, rec.betas(), 5)),
        worst(difference_equation_residuals(a1, a2, &gamma, 5)),
    )
}

/// `a1^2 t - a2 (1 + t)^2` at the characteristic root.
pub fn characteristic_residual(a1: f64, a2: f64, root: &CharacteristicRoot) -> f64 {
    let t = root.lambda();
    (t * a1 * a1 - (t + 1.0).powi(2) * a2).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn seeds(case: K2Case) -> K2Params {
        K2Params {
            case,
            beta0: 0.0,
            beta1: 0.0,
            gamma1: 0.5,
        }
    }

    #[test]
    fn periodic_case_reproduces_chebyshev_t() {
        let p = seeds(K2Case::A1Zero {
            beta_even: 0.0,
            beta_odd: 0.0,
            gamma_even: 0.25,
            gamma_odd: 0.25,
        });
        let rec = k2_family(0.0, -0.125, &p, 12).unwrap();
        assert_eq!(rec.gamma(1), 0.5);
        for n in 4..=12 {
            assert_eq!(rec.gamma(n), rec.gamma(n - 2));
            assert_eq!(rec.beta(n), rec.beta(n - 2));
        }
    }

    #[test]
    fn constants_solve_equal_roots_case() {
        let case = K2Case::EqualRoots {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.25,
            e: 0.0,
            f: 0.0,
        };
        let rec = k2_family(2.0, 1.0, &seeds(case), 10).unwrap();
        assert!(rec.betas().iter().all(|&b| b == 0.0));
        assert!(rec.gammas()[1..].iter().all(|&g| g == 0.25));
    }

    #[test]
    fn real_root_for_a1_one_a2_fifth() {
        let root = characteristic_root(1.0, 0.2).unwrap();
        let CharacteristicRoot::Real(t) = root else {
            panic!("{root:?}")
        };
        assert_relative_eq!(t, (3.0 - 5f64.sqrt()) / 2.0, epsilon = 1e-15);
        assert!(characteristic_residual(1.0, 0.2, &root) < 1e-12);
    }

    #[test]
    fn negative_a2_gives_negative_root() {
        let CharacteristicRoot::Real(t) = characteristic_root(0.5, -0.1).unwrap() else {
            panic!()
        };
        assert!(t > -1.0 && t < 0.0);
    }

    #[test]
    fn complex_root_on_unit_circle() {
        let root = characteristic_root(1.0, 1.0).unwrap();
        let CharacteristicRoot::UnitCircle { theta } = root else {
            panic!()
        };
        assert_relative_eq!(theta, 2.0 * PI / 3.0, epsilon = 1e-14);
        assert!(characteristic_residual(1.0, 1.0, &root) < 1e-12);
    }

    #[test]
    fn near_zero_discriminant_is_equal_roots() {
        let a2 = 0.25 + 1e-14;
        assert_eq!(
            characteristic_root(1.0, a2).unwrap(),
            CharacteristicRoot::Triple
        );
    }

    #[test]
    fn mismatched_tag_is_rejected() {
        let case = K2Case::EqualRoots {
            a: 0.0,
            b: 0.0,
            c: 0.0,
            d: 0.25,
            e: 0.0,
            f: 0.0,
        };
        let err = k2_family(1.0, 0.2, &seeds(case), 10).unwrap_err();
        assert!(matches!(err, Error::Constraint(_)));
    }

    #[test]
    fn violated_relation_is_rejected() {
        let case = K2Case::EqualRoots {
            a: 0.0,
            b: 0.1,
            c: 0.0,
            d: 0.25,
            e: 0.0,
            f: 0.0,
        };
        let err = k2_family(2.0, 1.0, &seeds(case), 10).unwrap_err();
        assert!(matches!(err, Error::Constraint(_)));
    }

    #[test]
    fn vanishing_gamma_is_degenerate() {
        // gamma_n = 0.25 - 0.05 n hits zero at n = 5
        let case = K2Case::equal_roots(2.0, 0.0, -0.05, 0.25, 0.0);
        let err = k2_family(2.0, 1.0, &seeds(case), 10).unwrap_err();
        assert!(matches!(err, Error::Degeneracy(_)), "{err:?}");
    }

    #[test]
    fn complex_case_emits_real_coefficients() {
        let case = K2Case::complex_roots(1.0, 1.0, 0.1, Complex64::new(0.02, 0.01), 0.25).unwrap();
        let rec = k2_family(1.0, 1.0, &seeds(case), 40).unwrap();
        let (rb, rg) = family_difference_residuals(1.0, 1.0, &rec);
        assert!(rb < 1e-10 && rg < 1e-10, "{rb:e} {rg:e}");
    }

    #[test]
    fn complex_case_is_real() {
        let case = K2Case::complex_roots(1.0, 1.0, 0.0, Complex64::new(0.02, 0.01), 0.25).unwrap();
        let residue = imaginary_residue(1.0, 1.0, &seeds(case), 50).unwrap();
        assert!(residue < 1e-12);
        let flat = K2Case::equal_roots(2.0, 0.0, 0.01, 0.25, 0.001);
        assert_eq!(imaginary_residue(2.0, 1.0, &seeds(flat), 50).unwrap(), 0.0);
    }
}
