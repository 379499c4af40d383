//! Acceptance suite over the bundled config corpus. Prints one PASS/FAIL line
//! per criterion and exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::Instant;

use opoly_cli::{Job, JobConfig};
use opoly_core::jacobi::{
    orthonormal_identity_check, solve_hk, verify_functional_relation, verify_intertwining, zeros_q,
};
use opoly_core::k2::{
    characteristic_residual, characteristic_root, family_difference_residuals, imaginary_residue,
};
use opoly_core::lincomb::{check_conditions, q_poly, tilde_recurrence, ConditionReport};
use opoly_core::moments::moments_from_recurrence;
use opoly_core::oracle::{exact_q_sequence, orthogonality_oracle};
use opoly_core::poly::Poly;
use opoly_core::quadrature::{gauss_rule, shohat_check};
use opoly_core::recurrence::{chebyshev_family, poly_p, ChebyshevKind};
use opoly_core::{CharacteristicRoot, Error, K2CaseTag, RecurrencePair, Scalar};

const GRAM_TOL: f64 = 1e-9;
const CONDITION_TOL: f64 = 1e-10;

fn config_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

struct Entry {
    name: String,
    path: PathBuf,
    job: Job,
}

fn corpus() -> Vec<Entry> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(config_dir())
        .expect("config directory")
        .map(|e| e.expect("dir entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .filter_map(|path| {
            let name = path.file_stem()?.to_string_lossy().into_owned();
            // configs that must be rejected are exercised by the CLI tests
            let job = JobConfig::load(&path).ok()?.build().ok()?;
            Some(Entry { name, path, job })
        })
        .collect()
}

fn report(job: &Job) -> ConditionReport {
    check_conditions(&job.rec, &job.comb, job.rec.horizon(), CONDITION_TOL).expect("conditions run")
}

fn coeff_gap(p: &Poly, q: &Poly) -> f64 {
    (p - q).max_abs_coeff()
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome {
            passed: true,
            detail: summary,
        }
    } else {
        Outcome {
            passed: false,
            detail: format!("{summary}; {}", failures.join("; ")),
        }
    }
}

/// Condition verdict against the exact Gram oracle on Q_0..Q_12.
fn conditions_match_oracle(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let (mut chebyshev, mut broken) = (0, 0);
    for e in corpus {
        let verdict = report(&e.job).verdict;
        let oracle = match orthogonality_oracle(&e.job.rec, &e.job.comb, 12, GRAM_TOL) {
            Ok(o) => o.passed(),
            Err(err) => {
                failures.push(format!("{}: oracle error {err}", e.name));
                continue;
            }
        };
        if verdict != oracle {
            failures.push(format!("{}: conditions {verdict}, oracle {oracle}", e.name));
        }
        if e.name.starts_with("chebyshev_") {
            chebyshev += 1;
        }
        if e.name.starts_with("broken_") {
            broken += 1;
            if verdict || oracle {
                failures.push(format!("{}: broken config accepted", e.name));
            }
        }
    }
    if chebyshev < 12 {
        failures.push(format!("only {chebyshev} Chebyshev configs"));
    }
    if broken < 3 {
        failures.push(format!("only {broken} broken configs"));
    }
    outcome(
        failures,
        format!(
            "{} configs, {chebyshev} Chebyshev, {broken} broken",
            corpus.len()
        ),
    )
}

/// Closed-form tilde coefficients and the three-term relation of the completion.
fn tilde_formulas(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let (mut formula_worst, mut relation_worst, mut count) = (0.0f64, 0.0f64, 0);
    for e in corpus {
        let (rec, comb) = (&e.job.rec, &e.job.comb);
        let r = report(&e.job);
        if !r.verdict {
            continue;
        }
        count += 1;
        let tilde = tilde_recurrence(rec, comb, &r).expect("tilde");
        let k = comb.k();
        let top = 20.min(rec.horizon());
        for n in k + 1..=top {
            let gamma = rec.gamma(n) + comb.a(1) * (rec.beta(n - 1) - rec.beta(n));
            let scale = rec.gamma(n).abs().max(1.0);
            let gap = ((tilde.beta(n) - rec.beta(n)).abs() / rec.beta(n).abs().max(1.0))
                .max((tilde.gamma(n) - gamma).abs() / scale);
            formula_worst = formula_worst.max(gap);
            if gap > 1e-12 {
                failures.push(format!(
                    "{}: tilde formula off by {gap:e} at n = {n}",
                    e.name
                ));
            }
        }
        // x Q_m = Q_{m+1} + beta~_m Q_m + gamma~_m Q_{m-1}, for the completed part and one beyond
        let q: Vec<Poly> = (0..=k + 2)
            .map(|n| q_poly(rec, comb, Some(&r), n).expect("Q_n"))
            .collect();
        for m in 0..=k + 1 {
            let mut rhs = q[m + 1].add_scaled(&q[m], &tilde.beta(m));
            if m > 0 {
                rhs = rhs.add_scaled(&q[m - 1], &tilde.gamma(m));
            }
            let lhs = q[m].mul_x();
            let gap = coeff_gap(&lhs, &rhs) / lhs.max_abs_coeff().max(1.0);
            relation_worst = relation_worst.max(gap);
            if gap > 1e-9 {
                failures.push(format!("{}: relation at m = {m} off by {gap:e}", e.name));
            }
        }
    }
    outcome(
        failures,
        format!("{count} passing configs, formula gap {formula_worst:.1e}, relation gap {relation_worst:.1e}"),
    )
}

/// M J_P = J_Q M at m = 20, and eig((J_P)_m - L_m) against the roots of Q_m.
fn jacobi_identities(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let (mut inter_worst, mut zeros_worst, mut count) = (0.0f64, 0.0f64, 0);
    for e in corpus {
        let (rec, comb) = (&e.job.rec, &e.job.comb);
        let r = report(&e.job);
        if !r.verdict {
            continue;
        }
        count += 1;
        match verify_intertwining(rec, comb, &r, 20, 1e-12) {
            Ok(c) => {
                inter_worst = inter_worst.max(c.residual);
                if !c.passed {
                    failures.push(format!(
                        "{}: intertwining residual {:e}",
                        e.name, c.residual
                    ));
                }
            }
            Err(err) => failures.push(format!("{}: intertwining error {err}", e.name)),
        }
        for m in [4, 8, 12] {
            match zeros_q(rec, comb, m) {
                Ok(z) => {
                    zeros_worst = zeros_worst.max(z.distance);
                    if z.distance >= 1e-8 {
                        failures.push(format!(
                            "{}: zeros of Q_{m} off by {:e}",
                            e.name, z.distance
                        ));
                    }
                }
                Err(err) => failures.push(format!("{}: zeros of Q_{m}: {err}", e.name)),
            }
        }
    }
    outcome(
        failures,
        format!("{count} passing configs, intertwining {inter_worst:.1e}, zeros distance {zeros_worst:.1e}"),
    )
}

fn positive_definite(tilde: &RecurrencePair) -> bool {
    (1..=tilde.horizon()).all(|n| tilde.gamma(n) > 0.0)
}

/// h_k on Chebyshev inputs whose combined family is positive definite.
fn hk_pipeline(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let (mut count, mut skipped) = (0, Vec::new());
    let (mut fit_worst, mut rel_worst, mut orth_worst, mut grid_min) =
        (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for e in corpus.iter().filter(|e| e.name.starts_with("chebyshev_")) {
        let (rec, comb) = (&e.job.rec, &e.job.comb);
        let r = report(&e.job);
        if !r.verdict {
            failures.push(format!("{}: conditions fail", e.name));
            continue;
        }
        let tilde = tilde_recurrence(rec, comb, &r).expect("tilde");
        if !positive_definite(&tilde) {
            skipped.push(e.name.clone());
            continue;
        }
        count += 1;
        let k = comb.k();
        let m = rec.horizon() + 1 - k;
        let sol = match solve_hk(rec, comb, &r, m, 1e-9) {
            Ok(sol) => sol,
            Err(err) => {
                failures.push(format!("{}: solve_hk {err}", e.name));
                continue;
            }
        };
        fit_worst = fit_worst.max(sol.residual);
        let u = moments_from_recurrence::<f64>(rec, 20).expect("u moments");
        let v = moments_from_recurrence::<f64>(&tilde, 20 + k).expect("v moments");
        match verify_functional_relation(&u, &v, &sol.coeffs, 1e-8) {
            Ok(rel) => {
                rel_worst = rel_worst.max(rel.max_residual);
                if !rel.passed || rel.max_order < 20 {
                    failures.push(format!(
                        "{}: u = h v residual {:e}",
                        e.name, rel.max_residual
                    ));
                }
            }
            Err(err) => failures.push(format!("{}: relation {err}", e.name)),
        }
        for i in 0..100 {
            let x = -0.99 + 1.98 * i as f64 / 99.0;
            let h = sol.coeffs.eval(&x);
            grid_min = grid_min.min(h);
            if h <= 0.0 {
                failures.push(format!("{}: h_k({x}) = {h:e}", e.name));
                break;
            }
        }
        match orthonormal_identity_check(rec, comb, &r, &sol.coeffs, m, 1e-9) {
            Ok(c) => {
                orth_worst = orth_worst.max(c.residual);
                if !c.passed {
                    failures.push(format!("{}: orthonormal identity {:e}", e.name, c.residual));
                }
            }
            Err(err) => failures.push(format!("{}: orthonormal identity {err}", e.name)),
        }
    }
    if count == 0 {
        failures.push("no positive-definite Chebyshev config".into());
    }
    outcome(
        failures,
        format!(
            "{count} configs (indefinite, not applicable: {}), fit {fit_worst:.1e}, relation {rel_worst:.1e}, \
             orthonormal {orth_worst:.1e}, grid min {grid_min:.3}",
            skipped.join(", ")
        ),
    )
}

/// d = 2n-1-k on the zeros of Q_n, and the Gauss baseline.
fn shohat_law(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let mut applied = 0;
    for k in [1, 2] {
        for n in [5, 6, 8] {
            let mut hits = 0;
            let entries = corpus.iter().filter(|e| {
                (e.name.starts_with("chebyshev_t_") || e.name.starts_with("chebyshev_u_"))
                    && e.job.comb.k() == k
            });
            for e in entries {
                let rec = &e.job.rec;
                let f = moments_from_recurrence::<f64>(rec, 2 * n + 2).expect("moments");
                match shohat_check(rec, &e.job.comb, &f, n, 1e-9) {
                    Ok(s) => {
                        hits += 1;
                        if !s.passed {
                            failures.push(format!(
                                "{} n = {n}: d = {:?}, expected {}",
                                e.name, s.precision.degree, s.expected
                            ));
                        }
                    }
                    Err(Error::Inapplicable(_)) => {}
                    Err(err) => failures.push(format!("{} n = {n}: {err}", e.name)),
                }
            }
            if hits == 0 {
                failures.push(format!(
                    "no instance with real simple zeros at k = {k}, n = {n}"
                ));
            }
            applied += hits;
        }
    }
    for kind in [ChebyshevKind::First, ChebyshevKind::Second] {
        let rec = chebyshev_family(kind, 30).expect("family");
        for n in 1..=10 {
            let f = moments_from_recurrence::<f64>(&rec, 2 * n + 2).expect("moments");
            match gauss_rule(&rec, &f, n) {
                Ok(rule) => {
                    if rule.degree_of_precision != Some(2 * n - 1)
                        || rule.weights.iter().any(|w| *w <= 0.0)
                    {
                        failures.push(format!(
                            "Gauss {kind:?} n = {n}: d = {:?}, min weight {:e}",
                            rule.degree_of_precision,
                            rule.weights.iter().copied().fold(f64::INFINITY, f64::min)
                        ));
                    }
                }
                Err(err) => failures.push(format!("Gauss {kind:?} n = {n}: {err}")),
            }
        }
    }
    outcome(
        failures,
        format!("{applied} Shohat instances, Gauss n = 1..10 on T and U"),
    )
}

/// Generated k = 2 families in every case of the classification.
fn generator_round_trip(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let mut seen = Vec::new();
    for e in corpus.iter().filter(|e| e.job.k2.is_some()) {
        let (rec, comb) = (&e.job.rec, &e.job.comb);
        let params = e.job.k2.as_ref().expect("k2 params");
        let (a1, a2) = (comb.a(1), comb.a(2));
        seen.push(params.case.tag());
        if rec.horizon() != 50 {
            failures.push(format!(
                "{}: horizon {} instead of 50",
                e.name,
                rec.horizon()
            ));
        }
        let r = report(&e.job);
        if !r.verdict {
            failures.push(format!("{}: conditions fail: {:?}", e.name, r.failures));
        }
        let (b, g) = family_difference_residuals(a1, a2, rec);
        if b > 1e-10 || g > 1e-10 {
            failures.push(format!("{}: difference residuals {b:e}, {g:e}", e.name));
        }
        let root = characteristic_root(a1, a2).expect("root");
        if let CharacteristicRoot::Real(_) = root {
            let res = characteristic_residual(a1, a2, &root);
            if res > 1e-12 {
                failures.push(format!("{}: lambda residual {res:e}", e.name));
            }
        }
        if params.case.tag() == K2CaseTag::ComplexRoots {
            let res = imaginary_residue(a1, a2, params, rec.horizon()).expect("residue");
            if res >= 1e-12 {
                failures.push(format!("{}: imaginary residue {res:e}", e.name));
            }
        }
    }
    for tag in [
        K2CaseTag::A1Zero,
        K2CaseTag::EqualRoots,
        K2CaseTag::RealRoots,
        K2CaseTag::ComplexRoots,
    ] {
        if !seen.contains(&tag) {
            failures.push(format!("no generated family for {tag:?}"));
        }
    }
    outcome(failures, format!("{} generated families", seen.len()))
}

/// k = 1: Q_1 against P_1 + a_1 P_0, and the constant-coefficient family.
fn k1_remark(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut count = 0;
    for e in corpus.iter().filter(|e| e.job.comb.k() == 1) {
        let (rec, comb) = (&e.job.rec, &e.job.comb);
        let r = report(&e.job);
        if !r.verdict {
            continue;
        }
        count += 1;
        let q1 = q_poly(rec, comb, Some(&r), 1).expect("Q_1");
        let naive = poly_p(rec, 1)
            .expect("P_1")
            .add_scaled(&Poly::one(), &comb.a(1));
        let gap = coeff_gap(&q1, &naive);
        worst = worst.max(gap);
        if gap >= 1e-12 {
            // the exact rational route gives the same Q_1, so the float path is not at fault
            let exact = match exact_q_sequence(rec, comb, comb.k() + 2) {
                Ok(Ok(q)) => q[1].coeff(0).to_f64(),
                _ => f64::NAN,
            };
            failures.push(format!(
                "{}: Q_1 = x + {:.6} (exact x + {exact:.6}), P_1 + a_1 P_0 = x + {:.6}",
                e.name,
                q1.coeff(0),
                naive.coeff(0)
            ));
        }
    }
    let mut constant = String::from("constant family missing");
    match corpus.iter().find(|e| e.name == "k1_constant") {
        Some(e) => {
            let r = report(&e.job);
            if !r.verdict {
                failures.push("k1_constant: conditions fail".into());
            } else {
                let tilde = tilde_recurrence(&e.job.rec, &e.job.comb, &r).expect("tilde");
                let (b2, g2) = (tilde.beta(2), tilde.gamma(2));
                let drift = (2..=tilde.horizon())
                    .map(|n| (tilde.beta(n) - b2).abs().max((tilde.gamma(n) - g2).abs()))
                    .fold(0.0, f64::max);
                constant = format!("constant family tilde drift {drift:.1e}");
                if drift > 1e-12 {
                    failures.push(format!(
                        "k1_constant: tilde recurrence drifts by {drift:e} from n = 2"
                    ));
                }
            }
        }
        None => failures.push("k1_constant config missing".into()),
    }
    outcome(
        failures,
        format!(
            "{count} passing k = 1 configs, worst |Q_1 - (P_1 + a_1 P_0)| {worst:.3e}, {constant}"
        ),
    )
}

fn run_binary(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_opoly"))
        .args(args)
        .output()
        .expect("binary runs");
    out.stdout
}

/// Byte-identical reports across two runs.
fn determinism(corpus: &[Entry]) -> Outcome {
    let mut failures = Vec::new();
    let mut runs = 0;
    let picks = [
        "chebyshev_t_k2_even",
        "k2_complex_roots",
        "broken_u_k1_beta5",
        "k1_constant",
    ];
    for e in corpus.iter().filter(|e| picks.contains(&e.name.as_str())) {
        let path = e.path.to_string_lossy().into_owned();
        for command in ["check", "tilde", "zeros", "hk", "quad", "gen"] {
            for format in ["json", "csv"] {
                let args = [command, "--config", path.as_str(), "--format", format];
                let first = run_binary(&args);
                let second = run_binary(&args);
                runs += 1;
                if first.is_empty() || first != second {
                    failures.push(format!("{} {command} {format}: outputs differ", e.name));
                }
            }
        }
    }
    if runs == 0 {
        failures.push("no configs exercised".into());
    }
    outcome(
        failures,
        format!("{runs} command/config/format triples run twice"),
    )
}

fn main() -> ExitCode {
    let corpus = corpus();
    type Check = fn(&[Entry]) -> Outcome;
    let criteria: [(&str, Check); 8] = [
        (
            "conditions agree with the Gram oracle",
            conditions_match_oracle,
        ),
        ("tilde recurrence formulas and completion", tilde_formulas),
        ("Jacobi intertwining and Q zeros", jacobi_identities),
        ("h_k pipeline on Chebyshev inputs", hk_pipeline),
        (
            "quadrature degree on Q zeros and Gauss baseline",
            shohat_law,
        ),
        ("generated k = 2 families", generator_round_trip),
        ("k = 1 lower polynomial and constant family", k1_remark),
        ("deterministic reports", determinism),
    ];
    let mut all = true;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check(&corpus);
        let secs = start.elapsed().as_secs_f64();
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {}: {tag} {title} ({secs:.2}s): {}",
            i + 1,
            o.detail
        );
        all &= o.passed;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
