use std::path::{Path, PathBuf};

use liesynth::algebra::{close_by_brackets, BasisCatalog, SimilarityClosure};
use liesynth::io::{
    read_schedule_csv, write_comparison_csv, write_error_csv, write_schedule_csv, CatalogReport,
};
use liesynth::timefix::ReplacementRecord;
use liesynth::{
    compare_methods, rewrite_schedule, synthesize_exact_over, CombinedPlan, ExactOptions,
    IteratedSynthesis, PulseSchedule, TimefixOptions, TrotterPlan,
};
use serde::Serialize;

use crate::config::{CatalogKind, Job, JobConfig, Method, Target};
use crate::output::{to_json, Outputs};
use crate::{CliError, Common};

const DEFAULT_OUT: &str = "liesynth-out";
const ERROR_GOAL_CAP: u64 = 1_000_000_000;

fn load(common: &Common) -> Result<Job, CliError> {
    let file = match &common.config {
        Some(p) => JobConfig::load(p)?,
        None => JobConfig::default(),
    };
    let fixture = common.fixture.clone().or_else(|| file.fixture.clone());
    let mut cfg = match fixture {
        Some(name) => file.over(JobConfig::fixture(&name)?),
        None => file,
    };
    if common.config.is_none() && common.fixture.is_none() {
        return Err(CliError::config("give --config or --fixture"));
    }
    if common.out.is_some() {
        cfg.output_dir = common.out.clone();
    }
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    Job::from_config(cfg)
}

fn out_dir(job: &Job) -> PathBuf {
    job.output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn similarity_catalog(job: &Job) -> Result<BasisCatalog, CliError> {
    let mut closure =
        SimilarityClosure::from_catalog(job.seeded_catalog()?, job.similarity_options());
    while closure.step()? {}
    Ok(closure.into_catalog())
}

pub fn close(common: &Common) -> Result<(), CliError> {
    let job = load(common)?;
    let catalog = match job.closure {
        CatalogKind::Brackets => close_by_brackets(&job.generators)?,
        CatalogKind::Similarity => similarity_catalog(&job)?,
    };
    let report = to_json(&CatalogReport::of(&catalog));
    if job.output_dir.is_none() {
        print!("{}", String::from_utf8_lossy(&report));
        return Ok(());
    }
    let mut out = Outputs::default();
    out.add("catalog.json", report);
    out.commit(&out_dir(&job))?;
    Ok(())
}

#[derive(Serialize)]
struct SynthReport {
    method: &'static str,
    #[serde(rename = "n_or_M")]
    n_or_m: u64,
    repeats: u64,
    steps_per_period: usize,
    factor_count: u64,
    error_before_timefix: f64,
    eps_timefix: Option<f64>,
    certified_bound: f64,
    error_after_timefix: f64,
    unitarity_defect: f64,
}

fn combined_plan(job: &Job, target: &Target) -> Result<CombinedPlan, CliError> {
    let grown = CombinedPlan::for_target_from(
        &target.log,
        job.seeded_catalog()?,
        &job.similarity_options(),
    )?;
    Ok(CombinedPlan::new(
        grown.catalog().clone(),
        job.ordering.clone(),
    )?)
}

/// Runs `step(n)` for `n = 1, 2, 4, …` until the error reaches `goal`.
fn until_goal(
    goal: f64,
    mut step: impl FnMut(u64) -> liesynth::Result<IteratedSynthesis>,
) -> Result<IteratedSynthesis, CliError> {
    let mut n = 1u64;
    loop {
        let run = step(n)?;
        log::info!("n = {n}: error {:.3e}", run.error);
        if run.error <= goal {
            return Ok(run);
        }
        if n >= ERROR_GOAL_CAP {
            return Err(CliError {
                code: 4,
                message: format!(
                    "error goal {goal:e} not reached by n = {n} (error {:.3e})",
                    run.error
                ),
            });
        }
        n = (2 * n).min(ERROR_GOAL_CAP);
    }
}

fn iterated(
    job: &Job,
    n_override: Option<u64>,
    mut step: impl FnMut(u64) -> liesynth::Result<IteratedSynthesis>,
) -> Result<IteratedSynthesis, CliError> {
    match (n_override.or(job.n), job.error_goal) {
        (Some(n), _) => Ok(step(n)?),
        (None, Some(goal)) => until_goal(goal, step),
        (None, None) => Err(CliError::config(
            "iterative methods need `n` or `error_goal`",
        )),
    }
}

pub fn synth(common: &Common, method: Option<&str>, n: Option<u64>) -> Result<(), CliError> {
    let mut job = load(common)?;
    if let Some(m) = method {
        job.method = serde_json::from_value(serde_json::Value::String(m.to_owned()))
            .expect("checked by clap");
    }
    if n == Some(0) {
        return Err(CliError::config("`n` must be at least 1"));
    }
    let target = job.target()?;

    let (schedule, n_or_m, error_before) = match job.method {
        Method::Exact => {
            let options = ExactOptions {
                similarity: job.similarity_options(),
                ordering: job.ordering.clone(),
                ..Default::default()
            };
            let sol = synthesize_exact_over(&target.matrix, &similarity_catalog(&job)?, &options)?;
            (sol.schedule, sol.m, sol.residual)
        }
        Method::Trotter => {
            let plan = TrotterPlan::new(&target.log, &job.generators)?;
            let run = iterated(&job, n, |n| plan.run(n))?;
            (run.schedule, run.n, run.error)
        }
        Method::Combined => {
            let plan = combined_plan(&job, &target)?;
            let run = iterated(&job, n, |n| plan.run(&target.log, n))?;
            (run.schedule, run.n, run.error)
        }
    };

    let (fixed, bound, replacements) = apply_timefix(&schedule, &job, job.eps_timefix)?;
    let achieved = fixed.evaluate(&job.generators)?;
    let report = SynthReport {
        method: job.method.name(),
        n_or_m,
        repeats: fixed.repeats,
        steps_per_period: fixed.steps.len(),
        factor_count: fixed.factor_count(),
        error_before_timefix: error_before,
        eps_timefix: job.eps_timefix,
        certified_bound: bound,
        error_after_timefix: achieved.distance(&target.matrix),
        unitarity_defect: achieved.unitarity_defect(),
    };

    let mut out = Outputs::default();
    out.add("schedule.csv", schedule_bytes(&fixed)?);
    out.add("report.json", to_json(&report));
    if let Some(r) = replacements {
        out.add("replacements.json", to_json(&r));
    }
    out.commit(&out_dir(&job))?;
    Ok(())
}

fn schedule_bytes(s: &PulseSchedule) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_schedule_csv(s, &mut buf)?;
    Ok(buf)
}

fn apply_timefix(
    schedule: &PulseSchedule,
    job: &Job,
    eps: Option<f64>,
) -> Result<(PulseSchedule, f64, Option<Vec<ReplacementRecord>>), CliError> {
    match eps {
        Some(eps) => {
            let outcome =
                rewrite_schedule(schedule, &job.generators, eps, &TimefixOptions::default())?;
            Ok((outcome.schedule, outcome.bound, Some(outcome.replacements)))
        }
        None => Ok((schedule.clone(), 0.0, None)),
    }
}

fn override_method(job: &mut Job, method: Option<&str>) {
    if let Some(m) = method {
        job.method = serde_json::from_value(serde_json::Value::String(m.to_owned()))
            .expect("checked by clap");
    }
}

pub fn errcurve(
    common: &Common,
    method: Option<&str>,
    ns: Option<Vec<u64>>,
) -> Result<(), CliError> {
    let mut job = load(common)?;
    override_method(&mut job, method);
    let ns = checked_ns(ns, &job)?;
    let target = job.target()?;
    let rows = match job.method {
        Method::Trotter => TrotterPlan::new(&target.log, &job.generators)?.error_curve(&ns)?,
        Method::Combined => combined_plan(&job, &target)?
            .error_curve(&target.log, &ns)?
            .into_iter()
            .map(|(n, error)| liesynth::ErrorRow {
                n,
                error,
                error_trace: error,
            })
            .collect(),
        Method::Exact => {
            return Err(CliError::config(
                "errcurve needs method trotter or combined",
            ))
        }
    };
    let mut buf = Vec::new();
    write_error_csv(&rows, &mut buf)?;
    let mut out = Outputs::default();
    out.add("errors.csv", buf);
    out.commit(&out_dir(&job))?;
    Ok(())
}

fn checked_ns(ns: Option<Vec<u64>>, job: &Job) -> Result<Vec<u64>, CliError> {
    let ns = ns.unwrap_or_else(|| job.ns.clone());
    if ns.is_empty() || ns.contains(&0) {
        return Err(CliError::config(
            "iteration counts must be nonempty and at least 1",
        ));
    }
    Ok(ns)
}

pub fn compare(common: &Common, ns: Option<Vec<u64>>) -> Result<(), CliError> {
    let job = load(common)?;
    let ns = checked_ns(ns, &job)?;
    let target = job.target()?;
    let trotter = TrotterPlan::new(&target.log, &job.generators)?;
    let combined = combined_plan(&job, &target)?;
    let rows = compare_methods(&target.log, &ns, &trotter, &combined)?;
    let mut buf = Vec::new();
    write_comparison_csv(&rows, &mut buf)?;
    let mut out = Outputs::default();
    out.add("compare.csv", buf);
    out.commit(&out_dir(&job))?;
    Ok(())
}

fn read_schedule(path: &Path, repeats: Option<u64>, job: &Job) -> Result<PulseSchedule, CliError> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::config(format!("cannot open schedule {}: {e}", path.display())))?;
    let schedule = read_schedule_csv(file)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    if let Some(s) = schedule
        .steps
        .iter()
        .find(|s| s.gen >= job.generators.len())
    {
        return Err(CliError::config(format!(
            "schedule uses generator {} but only {} are configured",
            s.gen,
            job.generators.len()
        )));
    }
    let repeats = match repeats {
        Some(0) => return Err(CliError::config("--repeats must be at least 1")),
        Some(r) => r,
        None => sibling_repeats(path)?.unwrap_or(1),
    };
    Ok(schedule.with_repeats(repeats))
}

/// `repeats` from a report.json next to the schedule, if there is one.
fn sibling_repeats(schedule: &Path) -> Result<Option<u64>, CliError> {
    let report = schedule.with_file_name("report.json");
    let Ok(text) = std::fs::read_to_string(&report) else {
        return Ok(None);
    };
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("malformed {}: {e}", report.display())))?;
    Ok(value.get("repeats").and_then(|r| r.as_u64()))
}

#[derive(Serialize)]
struct FixReport {
    repeats: u64,
    eps_timefix: f64,
    certified_bound: f64,
    replacements: Vec<ReplacementRecord>,
}

pub fn fix_times(
    common: &Common,
    schedule: &Path,
    repeats: Option<u64>,
    eps: Option<f64>,
) -> Result<(), CliError> {
    let job = load(common)?;
    let eps = eps
        .or(job.eps_timefix)
        .ok_or_else(|| CliError::config("fix-times needs --eps or `eps_timefix`"))?;
    if !(eps > 0.0) {
        return Err(CliError::config("eps must be positive"));
    }
    let input = read_schedule(schedule, repeats, &job)?;
    let outcome = rewrite_schedule(&input, &job.generators, eps, &TimefixOptions::default())?;
    let mut out = Outputs::default();
    out.add("schedule.csv", schedule_bytes(&outcome.schedule)?);
    out.add(
        "timefix.json",
        to_json(&FixReport {
            repeats: outcome.schedule.repeats,
            eps_timefix: eps,
            certified_bound: outcome.bound,
            replacements: outcome.replacements,
        }),
    );
    out.commit(&out_dir(&job))?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    repeats: u64,
    steps_per_period: usize,
    factor_count: u64,
    distance: f64,
    unitarity_defect: f64,
}

pub fn verify(common: &Common, schedule: &Path, repeats: Option<u64>) -> Result<(), CliError> {
    let job = load(common)?;
    let schedule = read_schedule(schedule, repeats, &job)?;
    let target = job.target()?;
    let achieved = schedule.evaluate(&job.generators)?;
    let report = to_json(&VerifyReport {
        repeats: schedule.repeats,
        steps_per_period: schedule.steps.len(),
        factor_count: schedule.factor_count(),
        distance: achieved.distance(&target.matrix),
        unitarity_defect: achieved.unitarity_defect(),
    });
    print!("{}", String::from_utf8_lossy(&report));
    if common.out.is_some() {
        let mut out = Outputs::default();
        out.add("verify.json", report);
        out.commit(&out_dir(&job))?;
    }
    Ok(())
}
