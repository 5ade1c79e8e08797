//! One function per subcommand. Each returns its CSV artifacts and a JSON
//! verdict without touching the filesystem; [`crate::output`] writes them.

use laurent_core::bounds::{cover_constant_b, prop6_bound_checks, write_certificates_csv};
use laurent_core::coefficients::coefficients_dft;
use laurent_core::geometry::rational_cover;
use laurent_core::seminorms::{lemma5_from_samples, write_reports_csv, DerivativeSamples, Resolution, SeminormKind};
use laurent_core::series::{net_cauchy_check, permuted_convergence_check, tail_seminorm_sum};
use laurent_core::Error;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, InvalidConfig, Resolved};

/// Largest sampled discrepancy accepted between two summation orders.
pub const REASSOCIATION_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Subcommand {
    Coeffs,
    Seminorms,
    Tails,
    BoundCheck,
    NetCauchy,
    Permute,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Subcommand::Coeffs,
        Subcommand::Seminorms,
        Subcommand::Tails,
        Subcommand::BoundCheck,
        Subcommand::NetCauchy,
        Subcommand::Permute,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Coeffs => "coeffs",
            Subcommand::Seminorms => "seminorms",
            Subcommand::Tails => "tails",
            Subcommand::BoundCheck => "bound-check",
            Subcommand::NetCauchy => "net-cauchy",
            Subcommand::Permute => "permute",
        }
    }
}

/// A file produced by an experiment, relative to the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    pub name: String,
    pub passed: bool,
    pub verdict: Value,
    pub artifacts: Vec<Artifact>,
}

/// Why an experiment produced no verdict.
#[derive(Debug)]
pub enum RunError {
    Config(InvalidConfig),
    Compute(Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::Compute(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for RunError {}

impl From<InvalidConfig> for RunError {
    fn from(e: InvalidConfig) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(msg) | Error::Configuration(msg) => RunError::Config(InvalidConfig(msg)),
            other => RunError::Compute(other),
        }
    }
}

fn csv_artifact(name: impl Into<String>, write: impl FnOnce(&mut Vec<u8>) -> laurent_core::Result<()>) -> Result<Artifact, RunError> {
    let mut bytes = Vec::new();
    write(&mut bytes)?;
    Ok(Artifact {
        name: name.into(),
        bytes,
    })
}

fn output(name: &str, passed: bool, mut verdict: Value, artifacts: Vec<Artifact>) -> ExperimentOutput {
    if let Value::Object(map) = &mut verdict {
        map.insert("experiment".into(), json!(name));
        map.insert("passed".into(), json!(passed));
    }
    ExperimentOutput {
        name: name.to_string(),
        passed,
        verdict,
        artifacts,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("verdict serializes")
}

pub fn run(sub: Subcommand, cfg: &ExperimentConfig) -> Result<ExperimentOutput, RunError> {
    cfg.validate()?;
    let r = cfg.resolved()?;
    match sub {
        Subcommand::Coeffs => coeffs(cfg, &r),
        Subcommand::Seminorms => seminorms(cfg, &r),
        Subcommand::Tails => tails(cfg, &r),
        Subcommand::BoundCheck => bound_check(cfg, &r),
        Subcommand::NetCauchy => net_cauchy(cfg, &r),
        Subcommand::Permute => permute(cfg, &r),
    }
}

fn coeffs(cfg: &ExperimentConfig, r: &Resolved) -> Result<ExperimentOutput, RunError> {
    let table = coefficients_dft(&r.f, &r.torus, r.grid, cfg.box_n)?;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut max_oracle_error: f64 = 0.0;
    for (a, c) in table.iter_sigma() {
        let err = (c - r.f.oracle_coeff(&a)).norm();
        max_oracle_error = max_oracle_error.max(err);
        worst_excess = worst_excess.max(err - table.tolerance(&a));
    }
    let passed = worst_excess <= 0.0;
    let verdict = json!({
        "table": to_value(&table.metadata()),
        "max_oracle_error": max_oracle_error,
        "oracle_within_tolerance": passed,
    });
    let artifacts = vec![
        csv_artifact("coeffs.csv", |b| table.write_csv(b))?,
        csv_artifact("coeffs.meta.json", |b| table.write_sidecar(b))?,
    ];
    Ok(output("coeffs", passed, verdict, artifacts))
}

fn seminorms(cfg: &ExperimentConfig, r: &Resolved) -> Result<ExperimentOutput, RunError> {
    let res = Resolution::new(cfg.radial, cfg.angular);
    let n = r.f.dim();
    let max_k = *cfg.orders.iter().max().expect("orders nonempty");
    let samples = DerivativeSamples::of_function(&r.f, &r.region, n as u32 * max_k, res)?;
    let mut reports = Vec::new();
    let mut lemma5 = Vec::new();
    let mut monotone = true;
    for &k in &cfg.orders {
        let ck = samples.report(SeminormKind::Ck, k)?;
        let bx = samples.report(SeminormKind::Box, k)?;
        if k > 0 {
            monotone &= samples.report(SeminormKind::Ck, k - 1)?.value <= ck.value;
            monotone &= samples.report(SeminormKind::Box, k - 1)?.value <= bx.value;
        }
        reports.push(ck);
        reports.push(bx);
        lemma5.push(lemma5_from_samples(&samples, n, k)?);
    }
    let passed = monotone && lemma5.iter().all(|o| o.lhs_ok && o.rhs_ok);
    let verdict = json!({ "lemma5": to_value(&lemma5), "monotone_in_k": monotone });
    let artifacts = vec![csv_artifact("seminorms.csv", |b| write_reports_csv(&reports, b))?];
    Ok(output("seminorms", passed, verdict, artifacts))
}

fn tails(cfg: &ExperimentConfig, r: &Resolved) -> Result<ExperimentOutput, RunError> {
    let table = coefficients_dft(&r.f, &r.torus, r.grid, cfg.box_n)?;
    let eps = cfg.epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let mut artifacts = Vec::new();
    let mut per_k = Vec::new();
    let mut passed = true;
    for &k in &cfg.orders {
        let p = tail_seminorm_sum(&table, &r.region, k, 0, Some(&r.f))?;
        let beyond = p.beyond_box.clone().expect("oracle supplied");
        let ok = p.tails_nonincreasing() && p.sandwich.passed() && beyond.converged && beyond.sum < eps;
        passed &= ok;
        per_k.push(json!({
            "k": k,
            "final_tail": beyond.sum,
            "final_tail_converged": beyond.converged,
            "tails_nonincreasing": p.tails_nonincreasing(),
            "sandwich": to_value(&p.sandwich),
            "epsilon": eps,
            "passed": ok,
        }));
        artifacts.push(csv_artifact(format!("tails_k{k}.csv"), |b| p.write_csv(b))?);
    }
    Ok(output("tails", passed, json!({ "orders": per_k }), artifacts))
}

fn bound_check(cfg: &ExperimentConfig, r: &Resolved) -> Result<ExperimentOutput, RunError> {
    let table = coefficients_dft(&r.f, &r.torus, r.grid, cfg.box_n)?;
    let res = Resolution::new(cfg.radial, cfg.angular);
    let certs = prop6_bound_checks(&r.f, &table, &r.region, &cfg.orders, res)?;
    let corrected_violations = certs.iter().filter(|c| !c.corrected_ok).count();
    let literal: Vec<_> = certs.iter().filter(|c| !c.paper_ok).collect();
    let outside = literal.iter().filter(|c| !(c.min_alpha() < 0 && c.k >= 1)).count();
    let b = cfg
        .domain
        .as_ref()
        .map(|d| rational_cover(d, cfg.cover_depth).map(|c| cover_constant_b(&c)))
        .transpose()?;
    let verdict = json!({
        "certificates": certs.len(),
        "corrected_violations": corrected_violations,
        "literal_violations": literal.len(),
        "literal_violations_outside_negative_index": outside,
        "radius_factor": r.region.radius_factor(),
        "cover_b": b,
    });
    let artifacts = vec![csv_artifact("bound_check.csv", |w| write_certificates_csv(&certs, w))?];
    Ok(output("bound-check", corrected_violations == 0, verdict, artifacts))
}

fn net_cauchy(cfg: &ExperimentConfig, r: &Resolved) -> Result<ExperimentOutput, RunError> {
    let table = coefficients_dft(&r.f, &r.torus, r.grid, cfg.box_n)?;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    let mut passed = true;
    for &k in &cfg.orders {
        for &eps in &cfg.epsilons {
            match net_cauchy_check(&table, &r.region, k, eps, cfg.seed, Some(&r.f)) {
                Ok(v) => {
                    passed &= v.passed();
                    rows.push(vec![
                        k.to_string(),
                        eps.to_string(),
                        v.n0.to_string(),
                        v.n0_shell.to_string(),
                        v.tail_at_n0.to_string(),
                        v.max_bound.to_string(),
                        v.violations.to_string(),
                        v.seed.to_string(),
                    ]);
                    verdicts.push(to_value(&v));
                }
                Err(Error::BoxTooSmall { box_n, beyond, needed }) => {
                    passed = false;
                    verdicts.push(json!({
                        "k": k,
                        "epsilon": eps,
                        "box_too_small": { "box": box_n, "beyond": beyond, "needed": needed },
                    }));
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    let csv = csv_artifact("net_cauchy.csv", |b| {
        let mut wr = csv::Writer::from_writer(b);
        wr.write_record(["k", "epsilon", "n0", "n0_shell", "tail_at_n0", "max_bound", "violations", "seed"])?;
        for row in &rows {
            wr.write_record(row)?;
        }
        wr.flush()?;
        Ok(())
    })?;
    Ok(output("net-cauchy", passed, json!({ "checks": verdicts }), vec![csv]))
}

fn permute(cfg: &ExperimentConfig, r: &Resolved) -> Result<ExperimentOutput, RunError> {
    let table = coefficients_dft(&r.f, &r.torus, r.grid, cfg.box_n)?;
    let res = Resolution::new(cfg.radial, cfg.angular);
    let eps = cfg.epsilons[0];
    let mut artifacts = Vec::new();
    let mut verdicts = Vec::new();
    let mut passed = true;
    for &k in &cfg.orders {
        let v = permuted_convergence_check(&table, &r.region, k, cfg.trials, cfg.seed, eps, res)?;
        passed &= v.passed(REASSOCIATION_TOL);
        artifacts.push(csv_artifact(format!("permute_k{k}.csv"), |b| v.write_csv(b))?);
        verdicts.push(json!({
            "k": k,
            "epsilon": eps,
            "n0": v.n0,
            "tail_at_n0": v.tail_at_n0,
            "identity_discrepancy": v.identity_discrepancy,
            "max_discrepancy": v.max_discrepancy,
            "violations": v.violations,
            "trials": v.trials.len(),
            "seed": v.seed,
        }));
    }
    Ok(output("permute", passed, json!({ "orders": verdicts }), artifacts))
}

/// Runs every subcommand on `cfg`, at most `workers` at a time, and adds a
/// `summary.csv` with one row per experiment. Outputs keep subcommand order.
pub fn report(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<ExperimentOutput>, RunError> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("thread pool");
    let outputs: Vec<ExperimentOutput> = pool.install(|| {
        Subcommand::ALL
            .par_iter()
            .map(|&s| run(s, cfg))
            .collect::<Result<Vec<_>, RunError>>()
    })?;
    let mut summary = String::from("experiment,passed\n");
    for o in &outputs {
        summary.push_str(&format!("{},{}\n", o.name, o.passed));
    }
    let passed = outputs.iter().all(|o| o.passed);
    let verdict = json!({
        "experiments": outputs.iter().map(|o| json!({"name": o.name, "passed": o.passed})).collect::<Vec<_>>(),
    });
    let mut all = outputs;
    all.push(output(
        "report",
        passed,
        verdict,
        vec![Artifact {
            name: "summary.csv".into(),
            bytes: summary.into_bytes(),
        }],
    ));
    Ok(all)
}
