//! One function per subcommand. Each returns a JSON result plus an optional
//! table; verdicts come straight from the library.

use crate::config::Job;
use crate::error::CliError;
use num_complex::Complex64;
use opoly_core::jacobi::{
    hk_route_agreement, orthonormal_identity_check, solve_hk, verify_functional_relation,
    verify_intertwining, zeros_q, IdentityCheck,
};
use opoly_core::k2::{
    characteristic_residual, characteristic_root, family_difference_residuals, imaginary_residue,
};
use opoly_core::lincomb::{check_conditions, tilde_recurrence, ConditionReport};
use opoly_core::moments::moments_from_recurrence;
use opoly_core::oracle::orthogonality_oracle;
use opoly_core::quadrature::{gauss_rule, shohat_check, QuadratureRule};
use opoly_core::{Error, RecurrencePair};
use serde_json::{json, Value};

/// Tolerance for the difference-equation residuals of generated k = 2 families.
const DIFFERENCE_TOL: f64 = 1e-10;
/// Moments compared when verifying `u = h_k v`.
const RELATION_MOMENTS: usize = 20;
const GRID_POINTS: usize = 100;
const INTERTWINING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Tilde,
    Zeros,
    Hk,
    Quad,
    Gen,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Check => "check",
            Self::Tilde => "tilde",
            Self::Zeros => "zeros",
            Self::Hk => "hk",
            Self::Quad => "quad",
            Self::Gen => "gen",
        }
    }
}

/// A rectangular table for CSV output.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

fn cell(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}

/// Result of one subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub result: Value,
    pub table: Table,
}

fn complex_list(values: &[Complex64]) -> Value {
    Value::Array(values.iter().map(|z| json!([z.re, z.im])).collect())
}

fn identity(check: &IdentityCheck) -> Value {
    json!({"residual": check.residual, "scale": check.scale, "tol": check.tol, "passed": check.passed})
}

fn conditions(job: &Job) -> Result<ConditionReport, CliError> {
    let tol = job.config.tolerances.conditions;
    Ok(check_conditions(
        &job.rec,
        &job.comb,
        job.rec.horizon(),
        tol,
    )?)
}

fn condition_summary(report: &ConditionReport) -> Value {
    let rows: Vec<Value> = report
        .cond_ii
        .iter()
        .map(|r| {
            json!({
                "n": r.n,
                "gamma_residual": r.gamma_residual,
                "beta_residuals": r.beta_residuals,
                "scale": r.scale,
                "passed": r.passed,
            })
        })
        .collect();
    let steps: Vec<Value> = report
        .cond_i
        .iter()
        .map(
            |s| json!({"m": s.m, "beta_tilde": s.beta, "gamma_tilde": s.gamma, "passed": s.passed}),
        )
        .collect();
    json!({
        "verdict": report.verdict,
        "horizon": report.horizon,
        "tol": report.tol,
        "pivot": report.pivot,
        "fourier": report.fourier,
        "cond_iii_residuals": report.cond_iii,
        "favard_steps": steps,
        "relations": rows,
        "max_relation_residual": report.max_cond_ii_residual(),
        "vanishing_gamma_tilde": report.vanishing_tilde_gamma,
        "failures": report.failures,
    })
}

pub fn check(job: &Job) -> Result<Outcome, CliError> {
    let report = conditions(job)?;
    let degree = job.config.gram_degree();
    let oracle = orthogonality_oracle(&job.rec, &job.comb, degree, job.config.tolerances.gram)?;
    let intertwining = if report.verdict {
        let m = 20.min(job.rec.horizon() + 1);
        Some(identity(&verify_intertwining(
            &job.rec,
            &job.comb,
            &report,
            m,
            INTERTWINING_TOL,
        )?))
    } else {
        None
    };
    let gram = oracle.gram.as_ref().map(|g| {
        json!({
            "size": g.size,
            "max_ratio": g.max_ratio,
            "worst_pair": g.worst_pair,
            "failures": g.failures.len(),
            "zero_diagonal": g.zero_diagonal,
        })
    });
    let result = json!({
        "conditions": condition_summary(&report),
        "oracle": {
            "degree": degree,
            "tol": job.config.tolerances.gram,
            "passed": oracle.passed(),
            "broken_at": oracle.broken_at,
            "gram": gram,
        },
        "agreement": report.verdict == oracle.passed(),
        "intertwining": intertwining,
    });
    let mut table = Table::new(&["n", "gamma_residual", "max_beta_residual", "passed"]);
    for r in &report.cond_ii {
        let worst = r.beta_residuals.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        table.push(vec![
            r.n.to_string(),
            cell(r.gamma_residual),
            cell(worst),
            r.passed.to_string(),
        ]);
    }
    Ok(Outcome {
        passed: report.verdict,
        result,
        table,
    })
}

fn failed_report(report: &ConditionReport) -> Outcome {
    Outcome {
        passed: false,
        result: json!({"conditions": condition_summary(report)}),
        table: Table::default(),
    }
}

pub fn tilde(job: &Job) -> Result<Outcome, CliError> {
    let report = conditions(job)?;
    if !report.verdict {
        return Ok(failed_report(&report));
    }
    let tilde = tilde_recurrence(&job.rec, &job.comb, &report)?;
    let mut table = Table::new(&["n", "beta", "gamma", "beta_tilde", "gamma_tilde"]);
    let mut rows = Vec::new();
    for n in 0..=tilde.horizon() {
        let (g, gt) = if n == 0 {
            (f64::NAN, f64::NAN)
        } else {
            (job.rec.gamma(n), tilde.gamma(n))
        };
        table.push(vec![
            n.to_string(),
            cell(job.rec.beta(n)),
            cell(g),
            cell(tilde.beta(n)),
            cell(gt),
        ]);
        rows.push(json!({
            "n": n,
            "beta": job.rec.beta(n),
            "gamma": (n > 0).then_some(g),
            "beta_tilde": tilde.beta(n),
            "gamma_tilde": (n > 0).then_some(gt),
        }));
    }
    let lower: Vec<Vec<f64>> = report
        .completion
        .iter()
        .map(|q| q.coeffs().to_vec())
        .collect();
    let result = json!({
        "verdict": true,
        "lower_polynomials": lower,
        "fourier": report.fourier,
        "recurrence": rows,
    });
    Ok(Outcome {
        passed: true,
        result,
        table,
    })
}

fn order(job: &Job, default: usize) -> usize {
    job.config.n.unwrap_or(default)
}

pub fn zeros(job: &Job) -> Result<Outcome, CliError> {
    let k = job.comb.k();
    let n = order(job, 12.min(job.rec.horizon()).max(k + 1));
    if n < k + 1 || n > job.rec.horizon() + 1 {
        return Err(CliError::Config(format!(
            "n = {n} must lie in {}..={}",
            k + 1,
            job.rec.horizon() + 1
        )));
    }
    let z = zeros_q(&job.rec, &job.comb, n)?;
    let tol = job.config.tolerances.zeros;
    let passed = z.distance <= tol;
    let mut table = Table::new(&["index", "eigen_re", "eigen_im", "root_re", "root_im"]);
    for (i, (e, r)) in z.eigenvalues.iter().zip(&z.roots).enumerate() {
        table.push(vec![
            i.to_string(),
            cell(e.re),
            cell(e.im),
            cell(r.re),
            cell(r.im),
        ]);
    }
    let result = json!({
        "n": n,
        "eigenvalues": complex_list(&z.eigenvalues),
        "roots": complex_list(&z.roots),
        "distance": z.distance,
        "max_imag": z.max_imag(),
        "tol": tol,
    });
    Ok(Outcome {
        passed,
        result,
        table,
    })
}

pub fn hk(job: &Job) -> Result<Outcome, CliError> {
    let report = conditions(job)?;
    if !report.verdict {
        return Ok(failed_report(&report));
    }
    let (rec, comb) = (&job.rec, &job.comb);
    let k = comb.k();
    let m = rec.horizon() + 1 - k;
    if m < 3 * k + 3 {
        return Err(CliError::Config(format!(
            "hk needs horizon >= 4k + 2 = {}",
            4 * k + 2
        )));
    }
    let tols = &job.config.tolerances;
    let sol = match solve_hk(rec, comb, &report, m, tols.hk_fit) {
        Ok(sol) => sol,
        Err(Error::Inconsistency(msg)) => {
            return Ok(Outcome {
                passed: false,
                result: json!({"truncation": m, "fit_error": msg}),
                table: Table::default(),
            });
        }
        Err(e) => return Err(e.into()),
    };
    let tilde = tilde_recurrence(rec, comb, &report)?;
    let orders = RELATION_MOMENTS.min(2 * rec.horizon() - k);
    let u = moments_from_recurrence::<f64>(rec, orders)?;
    let v = moments_from_recurrence::<f64>(&tilde, orders + k)?;
    let relation = verify_functional_relation(&u, &v, &sol.coeffs, tols.hk)?;
    let routes = hk_route_agreement(rec, comb, &report, &sol.coeffs, m, tols.hk_fit)?;
    let orthonormal =
        match orthonormal_identity_check(rec, comb, &report, &sol.coeffs, m, tols.hk_fit) {
            Ok(check) => Some(check),
            Err(Error::Domain(_)) => None,
            Err(e) => return Err(e.into()),
        };
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| {
            let x = -0.99 + 1.98 * i as f64 / (GRID_POINTS - 1) as f64;
            sol.coeffs.eval(&x)
        })
        .collect();
    let grid_min = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let passed = relation.passed && routes.passed && orthonormal.is_none_or(|c| c.passed);
    let mut table = Table::new(&["power", "coefficient"]);
    for (i, c) in sol.coeffs.coeffs().iter().enumerate() {
        table.push(vec![i.to_string(), cell(*c)]);
    }
    let result = json!({
        "truncation": m,
        "coefficients": sol.coeffs.coeffs(),
        "fit_residual": sol.residual,
        "equations": sol.equations,
        "scale": sol.scale,
        "functional_relation": {
            "passed": relation.passed,
            "scale": relation.scale,
            "max_residual": relation.max_residual,
            "max_order": relation.max_order,
            "tol": tols.hk,
        },
        "route_agreement": identity(&routes),
        "orthonormal_identity": orthonormal.as_ref().map(identity),
        "grid_min_on_open_interval": grid_min,
        "positive_on_grid": grid_min > 0.0,
    });
    Ok(Outcome {
        passed,
        result,
        table,
    })
}

fn rule_json(rule: &QuadratureRule) -> Value {
    json!({
        "nodes": rule.nodes,
        "weights": rule.weights,
        "degree_of_precision": rule.degree_of_precision,
    })
}

pub fn quad(job: &Job) -> Result<Outcome, CliError> {
    let (rec, comb) = (&job.rec, &job.comb);
    let n = order(job, 6.min(rec.horizon() - 1).max(comb.k() + 1));
    if n < comb.k() + 1 || n + 1 > rec.horizon() {
        return Err(CliError::Config(format!(
            "n = {n} must lie in {}..={}",
            comb.k() + 1,
            rec.horizon() - 1
        )));
    }
    let tol = job.config.tolerances.quad;
    let f = moments_from_recurrence::<f64>(rec, 2 * n + 2)?;
    let mut table = Table::new(&["rule", "index", "node", "weight"]);
    let gauss = if (1..=n).all(|i| rec.gamma(i) > 0.0) {
        let rule = gauss_rule(rec, &f, n)?;
        for (i, (c, w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
            table.push(vec!["gauss".into(), i.to_string(), cell(*c), cell(*w)]);
        }
        Some(rule)
    } else {
        None
    };
    let gauss_ok = gauss
        .as_ref()
        .is_none_or(|r| r.degree_of_precision == Some(2 * n - 1));
    let (shohat, shohat_ok) = match shohat_check(rec, comb, &f, n, tol) {
        Ok(s) => {
            for (i, (c, w)) in s.rule.nodes.iter().zip(&s.rule.weights).enumerate() {
                table.push(vec!["q_zeros".into(), i.to_string(), cell(*c), cell(*w)]);
            }
            let value = json!({
                "rule": rule_json(&s.rule),
                "expected": s.expected,
                "saturated": s.precision.saturated,
                "in_bracket": s.precision.in_bracket,
                "errors": s.precision.errors,
                "passed": s.passed,
            });
            (value, s.passed)
        }
        Err(Error::Inapplicable(msg)) => (json!({"inapplicable": msg, "passed": false}), false),
        Err(e) => return Err(e.into()),
    };
    let result = json!({
        "n": n,
        "tol": tol,
        "gauss": gauss.as_ref().map(rule_json),
        "shohat": shohat,
    });
    Ok(Outcome {
        passed: gauss_ok && shohat_ok,
        result,
        table,
    })
}

fn recurrence_table(rec: &RecurrencePair) -> (Value, Table) {
    let mut table = Table::new(&["n", "beta", "gamma"]);
    for n in 0..=rec.horizon() {
        let g = if n == 0 { f64::NAN } else { rec.gamma(n) };
        table.push(vec![n.to_string(), cell(rec.beta(n)), cell(g)]);
    }
    (json!({"beta": rec.betas(), "gamma": rec.gammas()}), table)
}

pub fn gen(job: &Job) -> Result<Outcome, CliError> {
    let report = conditions(job)?;
    let (family, table) = recurrence_table(&job.rec);
    let mut passed = report.verdict;
    let mut extra = Value::Null;
    if let Some(params) = &job.k2 {
        let (a1, a2) = (job.comb.a(1), job.comb.a(2));
        let (beta_res, gamma_res) = family_difference_residuals(a1, a2, &job.rec);
        let root = characteristic_root(a1, a2)?;
        let lambda = root.lambda();
        let residue = imaginary_residue(a1, a2, params, job.rec.horizon())?;
        passed &= beta_res <= DIFFERENCE_TOL && gamma_res <= DIFFERENCE_TOL;
        extra = json!({
            "case": format!("{:?}", root.tag()),
            "lambda": [lambda.re, lambda.im],
            "characteristic_residual": characteristic_residual(a1, a2, &root),
            "beta_difference_residual": beta_res,
            "gamma_difference_residual": gamma_res,
            "difference_tol": DIFFERENCE_TOL,
            "imaginary_residue": residue,
        });
    }
    let result = json!({
        "family": family,
        "verdict": report.verdict,
        "failures": report.failures,
        "k2": extra,
    });
    Ok(Outcome {
        passed,
        result,
        table,
    })
}

pub fn run(command: Command, job: &Job) -> Result<Outcome, CliError> {
    match command {
        Command::Check => check(job),
        Command::Tilde => tilde(job),
        Command::Zeros => zeros(job),
        Command::Hk => hk(job),
        Command::Quad => quad(job),
        Command::Gen => gen(job),
    }
}
