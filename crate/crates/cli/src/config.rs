//! Job configuration files.
//!
//! A config is a JSON document naming one recurrence family, one combination
//! and a horizon. Every real number may be written as a JSON number, a
//! decimal string (`"0.1"`) or a fraction string (`"-1/8"`).

use crate::error::CliError;
use num_complex::Complex64;
use opoly_core::k2::{k2_family, K2Case, K2Params};
use opoly_core::recurrence::{
    chebyshev_family, hermite_family, k1_family, laguerre_family, legendre_family, ChebyshevKind,
};
use opoly_core::{CombCoeffs, RecurrencePair};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::path::Path;

pub const DEFAULT_MAX_HORIZON: usize = 64;
pub const DEFAULT_GRAM_DEGREE: usize = 12;

/// A real number read from a JSON number or string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Real {
    pub fn get(self) -> f64 {
        self.0
    }
}

/// Parses `"0.125"`, `"1e-3"` or `"-1/8"`.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((num, den)) => {
            let num: f64 = num
                .trim()
                .parse()
                .map_err(|_| format!("bad numerator in {text:?}"))?;
            let den: f64 = den
                .trim()
                .parse()
                .map_err(|_| format!("bad denominator in {text:?}"))?;
            num / den
        }
        None => text
            .parse()
            .map_err(|_| format!("{text:?} is not a number"))?,
    };
    if !value.is_finite() {
        return Err(format!("{text:?} is not finite"));
    }
    Ok(value)
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Number(x) => Ok(Real(x)),
            Raw::Text(s) => parse_real(&s).map(Real).map_err(D::Error::custom),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_f64(self.0)
    }
}

fn reals(values: &[Real]) -> Vec<f64> {
    values.iter().map(|r| r.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    /// `kind` 1..=4 for T, U, V, W.
    Chebyshev {
        kind: u8,
    },
    Legendre {},
    Hermite {},
    Laguerre {
        alpha: Real,
    },
    /// `beta_0..beta_N` and `gamma_1..gamma_N`; longer arrays are cut at the horizon.
    Explicit {
        beta: Vec<Real>,
        gamma: Vec<Real>,
    },
    /// k = 2 family in closed form.
    K2(K2Spec),
    /// k = 1 family generated from its gammas.
    K1(K1Spec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct K2Spec {
    pub case: K2CaseSpec,
    pub beta0: Real,
    pub beta1: Real,
    pub gamma1: Real,
}

/// A complex number as `[re, im]`.
pub type ComplexSpec = [Real; 2];

fn complex(c: &ComplexSpec) -> Complex64 {
    Complex64::new(c[0].0, c[1].0)
}

/// Closed-form coefficients for `n >= 2`; `c` and `e` are solved from the
/// case relations when omitted and checked against them when given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum K2CaseSpec {
    A1Zero {
        beta_even: Real,
        beta_odd: Real,
        gamma_even: Real,
        gamma_odd: Real,
    },
    EqualRoots {
        a: Real,
        b: Real,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<Real>,
        d: Real,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        e: Option<Real>,
        f: Real,
    },
    RealRoots {
        a: Real,
        b: Real,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<Real>,
        d: Real,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        e: Option<Real>,
        f: Real,
    },
    ComplexRoots {
        a: Real,
        b: ComplexSpec,
        d: Real,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        e: Option<ComplexSpec>,
    },
}

/// `gamma` lists `gamma_1, gamma_2, ...`; the last entry repeats up to the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct K1Spec {
    pub gamma: Vec<Real>,
    pub beta0: Real,
    pub beta1: Real,
    pub beta2: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombinationSpec {
    pub k: usize,
    /// `a_1..a_k`
    pub a: Vec<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub conditions: f64,
    pub gram: f64,
    pub zeros: f64,
    /// Moment check of `u = h_k v`.
    pub hk: f64,
    /// Least-squares residual of the `h_k` fit.
    pub hk_fit: f64,
    pub quad: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            conditions: 1e-10,
            gram: 1e-9,
            zeros: 1e-8,
            hk: 1e-8,
            hk_fit: 1e-9,
            quad: 1e-9,
        }
    }
}

fn default_max_horizon() -> usize {
    DEFAULT_MAX_HORIZON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub family: FamilySpec,
    pub combination: CombinationSpec,
    pub horizon: usize,
    /// Raise to allow horizons beyond 64.
    #[serde(default = "default_max_horizon")]
    pub max_horizon: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Degree used by `zeros` and `quad`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Highest degree in the brute-force Gram test (default 12, capped by the horizon).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gram_degree: Option<usize>,
}

/// A validated config with its family and combination built.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: JobConfig,
    pub rec: RecurrencePair,
    pub comb: CombCoeffs,
    /// Parameters of a generated k = 2 family.
    pub k2: Option<K2Params>,
}

impl JobConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn gram_degree(&self) -> usize {
        self.gram_degree
            .unwrap_or(DEFAULT_GRAM_DEGREE)
            .min(self.horizon.div_ceil(2))
    }

    fn combination(&self) -> Result<CombCoeffs, CliError> {
        let spec = &self.combination;
        if spec.k == 0 {
            return Err(CliError::Config("combination.k must be at least 1".into()));
        }
        if spec.a.len() != spec.k {
            return Err(CliError::Config(format!(
                "combination.a must list a_1..a_{} ({} values given)",
                spec.k,
                spec.a.len()
            )));
        }
        CombCoeffs::new(reals(&spec.a)).map_err(|e| CliError::Config(e.to_string()))
    }

    fn k2_params(&self, comb: &CombCoeffs) -> Result<Option<K2Params>, CliError> {
        let FamilySpec::K2(spec) = &self.family else {
            return Ok(None);
        };
        if comb.k() != 2 {
            return Err(CliError::Config("k2 families need k = 2".into()));
        }
        Ok(Some(K2Params {
            case: k2_case(&spec.case, comb.a(1), comb.a(2))?,
            beta0: spec.beta0.0,
            beta1: spec.beta1.0,
            gamma1: spec.gamma1.0,
        }))
    }

    fn family(&self, comb: &CombCoeffs, k2: Option<&K2Params>) -> Result<RecurrencePair, CliError> {
        let n = self.horizon;
        let built = match &self.family {
            FamilySpec::Chebyshev { kind } => {
                ChebyshevKind::from_index(*kind).and_then(|kind| chebyshev_family(kind, n))
            }
            FamilySpec::Legendre {} => legendre_family(n),
            FamilySpec::Hermite {} => hermite_family(n),
            FamilySpec::Laguerre { alpha } => laguerre_family(alpha.0, n),
            FamilySpec::Explicit { beta, gamma } => {
                if beta.len() < n + 1 || gamma.len() < n {
                    return Err(CliError::Config(format!(
                        "horizon {n} needs beta_0..beta_{n} and gamma_1..gamma_{n}"
                    )));
                }
                RecurrencePair::new(reals(&beta[..=n]), reals(&gamma[..n]))
            }
            FamilySpec::K2(_) => {
                let params = k2.expect("k2 parameters are built first");
                k2_family(comb.a(1), comb.a(2), params, n)
            }
            FamilySpec::K1(spec) => {
                if comb.k() != 1 {
                    return Err(CliError::Config("k1 families need k = 1".into()));
                }
                let mut gamma = reals(&spec.gamma);
                let Some(&last) = gamma.last() else {
                    return Err(CliError::Config("k1.gamma must not be empty".into()));
                };
                gamma.resize(n.max(gamma.len()), last);
                k1_family(
                    &gamma,
                    spec.beta0.0,
                    spec.beta1.0,
                    spec.beta2.0,
                    comb.a(1),
                    n,
                )
            }
        };
        built.map_err(CliError::from_build)
    }

    /// Checks the invariants and builds the family and combination.
    pub fn build(self) -> Result<Job, CliError> {
        let comb = self.combination()?;
        let k = comb.k();
        if self.horizon < k + 3 {
            return Err(CliError::Config(format!(
                "horizon {} is below k + 3 = {}",
                self.horizon,
                k + 3
            )));
        }
        if self.horizon > self.max_horizon {
            return Err(CliError::Config(format!(
                "horizon {} exceeds max_horizon {}",
                self.horizon, self.max_horizon
            )));
        }
        let k2 = self.k2_params(&comb)?;
        let rec = self.family(&comb, k2.as_ref())?;
        Ok(Job {
            config: self,
            rec,
            comb,
            k2,
        })
    }
}

fn k2_case(spec: &K2CaseSpec, a1: f64, a2: f64) -> Result<K2Case, CliError> {
    let case = match *spec {
        K2CaseSpec::A1Zero {
            beta_even,
            beta_odd,
            gamma_even,
            gamma_odd,
        } => K2Case::A1Zero {
            beta_even: beta_even.0,
            beta_odd: beta_odd.0,
            gamma_even: gamma_even.0,
            gamma_odd: gamma_odd.0,
        },
        K2CaseSpec::EqualRoots { a, b, c, d, e, f } => {
            let derived = K2Case::equal_roots(a1, a.0, b.0, d.0, f.0);
            override_ce(derived, c, e)
        }
        K2CaseSpec::RealRoots { a, b, c, d, e, f } => {
            let derived =
                K2Case::real_roots(a1, a2, a.0, b.0, d.0, f.0).map_err(CliError::from_build)?;
            override_ce(derived, c, e)
        }
        K2CaseSpec::ComplexRoots { a, ref b, d, ref e } => {
            let derived = K2Case::complex_roots(a1, a2, a.0, complex(b), d.0)
                .map_err(CliError::from_build)?;
            match (derived, e) {
                (K2Case::ComplexRoots { a, b, d, .. }, Some(e)) => K2Case::ComplexRoots {
                    a,
                    b,
                    d,
                    e: complex(e),
                },
                (derived, _) => derived,
            }
        }
    };
    Ok(case)
}

/// Replaces derived `c`/`e` by explicitly given values, which the generator then validates.
fn override_ce(case: K2Case, c_in: Option<Real>, e_in: Option<Real>) -> K2Case {
    let pick = |given: Option<Real>, derived: f64| given.map_or(derived, Real::get);
    match case {
        K2Case::EqualRoots { a, b, c, d, e, f } => K2Case::EqualRoots {
            a,
            b,
            c: pick(c_in, c),
            d,
            e: pick(e_in, e),
            f,
        },
        K2Case::RealRoots { a, b, c, d, e, f } => K2Case::RealRoots {
            a,
            b,
            c: pick(c_in, c),
            d,
            e: pick(e_in, e),
            f,
        },
        other => other,
    }
}
