//! Monic orthogonal polynomial families given by their three-term recurrence
//!
//! ```text
//! x P_n = P_{n+1} + beta_n P_n + gamma_n P_{n-1},   P_0 = 1,  P_1 = x - beta_0
//! ```
//!
//! Coefficients are stored to an explicit horizon `N`: `beta_0..beta_N` and
//! `gamma_1..gamma_N`. That is enough to build `P_0..P_{N+1}`.

use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::scalar::Scalar;

/// Smallest |gamma_n| accepted as nonzero.
pub const GAMMA_FLOOR: f64 = 1e-14;

/// Recurrence coefficients of a monic orthogonal family, finite horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrencePair {
    beta: Vec<f64>,
    // gamma[i] holds gamma_{i+1}
    gamma: Vec<f64>,
}

impl RecurrencePair {
    /// `beta` holds `beta_0..beta_N`, `gamma` holds `gamma_1..gamma_N`.
    pub fn new(beta: Vec<f64>, gamma: Vec<f64>) -> Result<Self> {
        if gamma.is_empty() {
            return Err(Error::Range("horizon must be at least 1".into()));
        }
        if beta.len() != gamma.len() + 1 {
            return Err(Error::Range(format!(
                "need beta_0..beta_N and gamma_1..gamma_N, got {} betas and {} gammas",
                beta.len(),
                gamma.len()
            )));
        }
        if let Some(i) = beta.iter().position(|b| !b.is_finite()) {
            return Err(Error::Domain(format!("beta_{i} is not finite")));
        }
        if let Some(i) = gamma.iter().position(|g| !g.is_finite()) {
            return Err(Error::Domain(format!("gamma_{} is not finite", i + 1)));
        }
        if let Some(i) = gamma.iter().position(|g| g.abs() <= GAMMA_FLOOR) {
            return Err(Error::Degeneracy(format!(
                "gamma_{} = {:e} vanishes; family is not quasi-definite",
                i + 1,
                gamma[i]
            )));
        }
        Ok(Self { beta, gamma })
    }

    /// Largest index `N` with both `beta_N` and `gamma_N` stored.
    pub fn horizon(&self) -> usize {
        self.gamma.len()
    }

    /// `beta_n`, panicking past the horizon.
    pub fn beta(&self, n: usize) -> f64 {
        self.beta[n]
    }

    /// `gamma_n` for `1 <= n <= N`, panicking otherwise.
    pub fn gamma(&self, n: usize) -> f64 {
        assert!(n >= 1, "gamma_0 is not defined");
        self.gamma[n - 1]
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    /// `gamma_1..gamma_N`.
    pub fn gammas(&self) -> &[f64] {
        &self.gamma
    }

    /// Same family cut to a smaller horizon.
    pub fn truncated(&self, horizon: usize) -> Result<Self> {
        self.require(horizon, "truncation")?;
        Self::new(
            self.beta[..=horizon].to_vec(),
            self.gamma[..horizon].to_vec(),
        )
    }

    /// Family of `P_n(x - shift)`: every `beta_n` moves by `shift`.
    pub fn translated(&self, shift: f64) -> Self {
        Self {
            beta: self.beta.iter().map(|b| b + shift).collect(),
            gamma: self.gamma.clone(),
        }
    }

    /// All `gamma_n > 0` (positive-definite functional).
    pub fn is_positive(&self) -> bool {
        self.gamma.iter().all(|&g| g > 0.0)
    }

    fn require(&self, n: usize, what: &str) -> Result<()> {
        if n > self.horizon() {
            Err(Error::Range(format!(
                "{what} needs index {n}, horizon is {}",
                self.horizon()
            )))
        } else {
            Ok(())
        }
    }

    fn require_degree(&self, n: usize) -> Result<()> {
        if n > self.horizon() + 1 {
            Err(Error::Range(format!(
                "P_{n} needs horizon {}, have {}",
                n - 1,
                self.horizon()
            )))
        } else {
            Ok(())
        }
    }
}

/// `P_n(x)` by forward recurrence, `0 <= n <= N + 1`.
pub fn eval_p(rec: &RecurrencePair, n: usize, x: f64) -> Result<f64> {
    eval_p_with_derivative(rec, n, x).map(|(p, _)| p)
}

/// `(P_n(x), P_n'(x))`, differentiating the recurrence alongside.
pub fn eval_p_with_derivative(rec: &RecurrencePair, n: usize, x: f64) -> Result<(f64, f64)> {
    rec.require_degree(n)?;
    let (mut prev, mut cur) = (0.0, 1.0);
    let (mut dprev, mut dcur) = (0.0, 0.0);
    for i in 0..n {
        let g = if i == 0 { 0.0 } else { rec.gamma(i) };
        let next = (x - rec.beta(i)) * cur - g * prev;
        let dnext = cur + (x - rec.beta(i)) * dcur - g * dprev;
        (prev, cur) = (cur, next);
        (dprev, dcur) = (dcur, dnext);
    }
    Ok((cur, dcur))
}

/// Monomial coefficients of `P_n`.
pub fn poly_p(rec: &RecurrencePair, n: usize) -> Result<Poly> {
    let mut basis = monic_basis::<f64>(rec, n)?;
    Ok(basis.pop().expect("basis holds P_0..P_n"))
}

/// `P_0..P_n` over any scalar field.
pub fn monic_basis<T: Scalar>(rec: &RecurrencePair, n: usize) -> Result<Vec<Poly<T>>> {
    rec.require_degree(n)?;
    let mut out: Vec<Poly<T>> = Vec::with_capacity(n + 1);
    out.push(Poly::one());
    for i in 0..n {
        let cur = &out[i];
        let mut next = cur.mul_x().add_scaled(cur, &-T::from_f64(rec.beta(i)));
        if i > 0 {
            next = next.add_scaled(&out[i - 1], &-T::from_f64(rec.gamma(i)));
        }
        out.push(next);
    }
    Ok(out)
}

/// Coefficients `c` with `p = sum_j c[j] P_j` (degree of `p` within `N + 1`).
pub fn expand_in_basis(rec: &RecurrencePair, p: &Poly) -> Result<Vec<f64>> {
    let d = p.degree();
    let basis = monic_basis::<f64>(rec, d)?;
    let mut rest = p.clone();
    let mut out = vec![0.0; d + 1];
    for j in (0..=d).rev() {
        let c = rest.coeff(j);
        out[j] = c;
        rest = rest.add_scaled(&basis[j], &-c);
    }
    Ok(out)
}

/// The four Chebyshev kinds, orthogonal on [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChebyshevKind {
    /// weight (1 - x^2)^{-1/2}
    First,
    /// weight (1 - x^2)^{1/2}
    Second,
    /// weight ((1 + x)/(1 - x))^{1/2}; `beta_0 = +1/2`
    Third,
    /// weight ((1 - x)/(1 + x))^{1/2}; `beta_0 = -1/2`
    Fourth,
}

impl ChebyshevKind {
    pub const ALL: [ChebyshevKind; 4] = [Self::First, Self::Second, Self::Third, Self::Fourth];

    pub fn from_index(kind: u8) -> Result<Self> {
        match kind {
            1 => Ok(Self::First),
            2 => Ok(Self::Second),
            3 => Ok(Self::Third),
            4 => Ok(Self::Fourth),
            _ => Err(Error::Domain(format!(
                "Chebyshev kind must be 1..=4, got {kind}"
            ))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::First => 1,
            Self::Second => 2,
            Self::Third => 3,
            Self::Fourth => 4,
        }
    }
}

/// Monic Chebyshev recurrence of the given kind up to `horizon`.
pub fn chebyshev_family(kind: ChebyshevKind, horizon: usize) -> Result<RecurrencePair> {
    if horizon < 2 {
        return Err(Error::Range(format!("horizon must be >= 2, got {horizon}")));
    }
    let mut beta = vec![0.0; horizon + 1];
    let mut gamma = vec![0.25; horizon];
    match kind {
        ChebyshevKind::First => gamma[0] = 0.5,
        ChebyshevKind::Second => {}
        ChebyshevKind::Third => beta[0] = 0.5,
        ChebyshevKind::Fourth => beta[0] = -0.5,
    }
    RecurrencePair::new(beta, gamma)
}

/// Monic Legendre recurrence: `beta_n = 0`, `gamma_n = n^2 / (4n^2 - 1)`.
pub fn legendre_family(horizon: usize) -> Result<RecurrencePair> {
    let gamma = (1..=horizon)
        .map(|n| {
            let n = n as f64;
            n * n / (4.0 * n * n - 1.0)
        })
        .collect();
    RecurrencePair::new(vec![0.0; horizon + 1], gamma)
}

/// Monic Hermite recurrence (weight `e^{-x^2}`): `beta_n = 0`, `gamma_n = n/2`.
pub fn hermite_family(horizon: usize) -> Result<RecurrencePair> {
    RecurrencePair::new(
        vec![0.0; horizon + 1],
        (1..=horizon).map(|n| n as f64 / 2.0).collect(),
    )
}

/// Monic Laguerre recurrence with parameter `alpha > -1`:
/// `beta_n = 2n + alpha + 1`, `gamma_n = n (n + alpha)`.
pub fn laguerre_family(alpha: f64, horizon: usize) -> Result<RecurrencePair> {
    if !alpha.is_finite() || alpha <= -1.0 {
        return Err(Error::Domain(format!("alpha must exceed -1, got {alpha}")));
    }
    RecurrencePair::new(
        (0..=horizon)
            .map(|n| 2.0 * n as f64 + alpha + 1.0)
            .collect(),
        (1..=horizon)
            .map(|n| n as f64 * (n as f64 + alpha))
            .collect(),
    )
}

/// General family for which `P_n + a1 P_{n-1}` stays orthogonal.
///
/// `gammas` holds `gamma_1..gamma_N` (at least `horizon` entries). For
/// `n >= 3` the betas follow `gamma_n - gamma_2 = a1 (beta_n - beta_2)`.
pub fn k1_family(
    gammas: &[f64],
    beta0: f64,
    beta1: f64,
    beta2: f64,
    a1: f64,
    horizon: usize,
) -> Result<RecurrencePair> {
    if a1 == 0.0 || !a1.is_finite() {
        return Err(Error::Domain(format!(
            "a1 must be finite and nonzero, got {a1}"
        )));
    }
    if horizon < 2 {
        return Err(Error::Range(format!("horizon must be >= 2, got {horizon}")));
    }
    if gammas.len() < horizon {
        return Err(Error::Range(format!(
            "need gamma_1..gamma_{horizon}, got {} values",
            gammas.len()
        )));
    }
    let gamma = gammas[..horizon].to_vec();
    let g2 = gamma[1];
    let pivot = g2 + a1 * (beta1 - beta2);
    if pivot.abs() <= GAMMA_FLOOR * g2.abs().max(1.0) {
        return Err(Error::Degeneracy(format!(
            "gamma_2 + a1 (beta_1 - beta_2) = {pivot:e} must be nonzero"
        )));
    }
    let mut beta = Vec::with_capacity(horizon + 1);
    beta.extend([beta0, beta1, beta2]);
    beta.extend((3..=horizon).map(|n| beta2 + (gamma[n - 1] - g2) / a1));
    RecurrencePair::new(beta, gamma)
}
