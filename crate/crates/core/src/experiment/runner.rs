use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Map, Value};

use super::config::{ExperimentConfig, Format, MeasureKind, Subcommand};
use super::manifest::manifest;
use crate::brw::{run_summary, BrwConfig, GenerationSummary};
use crate::coalescent::{simulate_lambda_coalescent, CoalescentTrajectory, LambdaMeasure, RateTable};
use crate::distributions::PdParams;
use crate::error::{Error, Result};
use crate::estimators::{
    estimate_cn, estimate_speed, merger_statistics, pd_diagnostics, simulate_pd_genealogies,
    weight_tail_curve, CnMode, EstimatorReport, MergerStatistics, ScalingConstants,
};
use crate::io::{fmt_f64, write_csv};
use crate::rng::{seed_stream, McContext};

const DEFAULT_TAIL_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Results of one experiment before anything is written.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// CSV tables; the first goes to the output path, the others to
    /// siblings named `<stem>.<suffix>.csv`.
    pub tables: Vec<(Option<&'static str>, Vec<u8>)>,
    /// Body of the JSON report.
    pub json: Value,
    /// Headline numbers for the one-line summary.
    pub summary: Map<String, Value>,
}

/// Exit code, the one-line JSON summary and the files written.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub summary: Value,
    pub files: Vec<PathBuf>,
}

/// Validates and runs `config`, writes its output files and reports the
/// outcome. Files written before a failure are removed.
pub fn run_experiment(config: &ExperimentConfig, threads: Option<usize>) -> RunOutcome {
    let start = Instant::now();
    let mut written = Vec::new();
    let result = execute(config, threads).and_then(|out| {
        if let Some(path) = &config.output {
            write_outputs(config, path, &out, &mut written)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => RunOutcome {
            exit_code: 0,
            summary: json!({
                "status": "ok",
                "subcommand": config.subcommand.name(),
                "seed": config.seed_or_default(),
                "outputs": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
                "elapsed_seconds": start.elapsed().as_secs_f64(),
                "result": Value::Object(out.summary),
            }),
            files: written,
        },
        Err(e) => {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            RunOutcome {
                exit_code: e.exit_code(),
                summary: json!({
                    "status": "error",
                    "subcommand": config.subcommand.name(),
                    "kind": e.kind(),
                    "message": e.to_string(),
                    "exit_code": e.exit_code(),
                }),
                files: Vec::new(),
            }
        }
    }
}

fn write_outputs(
    config: &ExperimentConfig,
    path: &Path,
    out: &ExperimentOutput,
    written: &mut Vec<PathBuf>,
) -> Result<()> {
    match config.format_or_default() {
        Format::Json => {
            let mut resolved = config.clone();
            resolved.seed = Some(config.seed_or_default());
            resolved.output = None;
            let doc = json!({
                "MANIFEST": manifest(config.subcommand),
                "config": serde_json::to_value(&resolved)?,
                "results": out.json,
            });
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            written.push(path.to_path_buf());
            fs::write(path, text)?;
        }
        Format::Csv => {
            for (suffix, bytes) in &out.tables {
                let target = match suffix {
                    None => path.to_path_buf(),
                    Some(s) => sibling(path, s),
                };
                written.push(target.clone());
                fs::write(&target, bytes)?;
            }
        }
    }
    Ok(())
}

/// `dir/stem.suffix.csv` next to `path`.
pub(crate) fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

/// Runs `config` without touching the file system.
pub fn execute(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    config.validate_keys()?;
    let mc = McContext::new(config.seed_or_default()).with_threads(threads);
    match config.subcommand {
        Subcommand::Simulate => simulate(config, &mc),
        Subcommand::Speed => speed(config, &mc),
        Subcommand::Cn => cn(config, &mc),
        Subcommand::Coalescent => coalescent(config, &mc),
        Subcommand::Rates => rates(config),
        Subcommand::PdDiagnostics => diagnostics(config, &mc),
        Subcommand::Tails => tails(config, &mc),
        Subcommand::Constants => constants(config),
    }
}

fn need<T: Copy>(v: Option<T>, key: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing '{key}'")))
}

fn brw_config(c: &ExperimentConfig) -> Result<BrwConfig> {
    let mut b = BrwConfig::new(need(c.n, "n")?, need(c.beta, "beta")?)?;
    if let Some(e) = c.engine {
        b = b.with_engine(e)?;
    }
    if let Some(v) = c.variant {
        b = b.with_variant(v);
    }
    if let Some(s) = c.sticks {
        b = b.with_n_sticks(s);
    }
    if let Some(eps) = c.truncation_epsilon {
        b = b.with_truncation_epsilon(eps);
    }
    b.validate()?;
    Ok(b)
}

fn pd_params(c: &ExperimentConfig) -> Result<PdParams> {
    PdParams::new(need(c.alpha, "alpha")?, c.theta.unwrap_or(0.0))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn report_summary(r: &EstimatorReport) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("name".into(), json!(r.name));
    m.insert("estimate".into(), json!(r.estimate));
    m.insert("std_error".into(), json!(r.std_error));
    m.insert("ci95".into(), json!([r.ci95.0, r.ci95.1]));
    m.insert("reference".into(), json!(r.reference));
    m.insert("n_samples".into(), json!(r.n_samples));
    m
}

fn reports_output(reports: Vec<EstimatorReport>) -> Result<ExperimentOutput> {
    let table = csv_bytes(|b| EstimatorReport::write_csv(&reports, b))?;
    let mut summary = Map::new();
    if let [single] = reports.as_slice() {
        summary = report_summary(single);
    } else {
        summary.insert("n_reports".into(), json!(reports.len()));
    }
    Ok(ExperimentOutput { tables: vec![(None, table)], json: json!({ "reports": reports }), summary })
}

fn simulate(c: &ExperimentConfig, mc: &McContext) -> Result<ExperimentOutput> {
    let config = brw_config(c)?;
    let horizon = need(c.horizon, "horizon")?;
    let mut rng = seed_stream(mc.seed, 0);
    let run = run_summary(&config, horizon, None, true, &mut rng)?;
    let genealogy = run.genealogy.as_ref().ok_or_else(|| Error::Internal("genealogy not recorded".into()))?;
    let generations = csv_bytes(|b| GenerationSummary::write_csv(&run.summaries, b))?;
    let parents = csv_bytes(|b| genealogy.write_csv(b))?;
    let mean_increment = run.increments.iter().sum::<f64>() / run.increments.len() as f64;
    let mut summary = Map::new();
    summary.insert("generations".into(), json!(horizon));
    summary.insert("final_x_eq".into(), json!(run.final_state.x_eq));
    summary.insert("mean_increment".into(), json!(mean_increment));
    let one_based: Vec<Vec<u64>> =
        genealogy.parents.iter().map(|g| g.iter().map(|p| *p as u64 + 1).collect()).collect();
    Ok(ExperimentOutput {
        tables: vec![(None, generations), (Some("genealogy"), parents)],
        json: json!({
            "brw_config": config,
            "generations": run.summaries,
            "increments": run.increments,
            "parents": one_based,
        }),
        summary,
    })
}

fn speed(c: &ExperimentConfig, mc: &McContext) -> Result<ExperimentOutput> {
    let config = brw_config(c)?;
    let r = estimate_speed(&config, need(c.steps, "steps")?, need(c.replicates, "replicates")?, mc)?;
    reports_output(vec![r])
}

fn cn(c: &ExperimentConfig, mc: &McContext) -> Result<ExperimentOutput> {
    let mode = c.mode.unwrap_or(CnMode::SemiAnalytic);
    let r = estimate_cn(pd_params(c)?, need(c.n, "n")?, need(c.replicates, "replicates")?, mode, mc)?;
    reports_output(vec![r])
}

fn diagnostics(c: &ExperimentConfig, mc: &McContext) -> Result<ExperimentOutput> {
    let reports = pd_diagnostics(
        pd_params(c)?,
        need(c.sticks, "sticks")?,
        need(c.replicates, "replicates")?,
        c.gamma.unwrap_or(1.0),
        mc,
    )?;
    reports_output(reports)
}

fn tails(c: &ExperimentConfig, mc: &McContext) -> Result<ExperimentOutput> {
    let grid = c.x.clone().unwrap_or_else(|| DEFAULT_TAIL_GRID.to_vec());
    let reports = weight_tail_curve(pd_params(c)?, need(c.n, "n")?, &grid, need(c.replicates, "replicates")?, mc)?;
    reports_output(reports)
}

fn constants(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let s = ScalingConstants::new(pd_params(c)?)?;
    let mut rows = vec![
        ("alpha", s.alpha),
        ("theta", s.theta),
        ("lambda", s.lambda),
        ("c_alpha_theta", s.c_alpha_theta),
    ];
    let mut body = serde_json::to_value(s)?;
    if let Some(n) = c.n {
        if n < 2 {
            return Err(Error::Parameter("L_N needs n >= 2".into()));
        }
        let l_n = s.l_n(n as f64);
        rows.push(("n", n as f64));
        rows.push(("l_n", l_n));
        body["n"] = json!(n);
        body["l_n"] = json!(l_n);
        if let Some(r) = s.cn_reference(n as f64) {
            rows.push(("cn_reference", r));
            body["cn_reference"] = json!(r);
        }
    }
    let table = csv_bytes(|b| {
        write_csv(b, &["quantity", "value"], rows.iter().map(|(k, v)| vec![k.to_string(), fmt_f64(*v)]))
    })?;
    let summary = body.as_object().cloned().unwrap_or_default();
    Ok(ExperimentOutput { tables: vec![(None, table)], json: body, summary })
}

fn lambda_measure(c: &ExperimentConfig, kind: MeasureKind) -> Result<LambdaMeasure> {
    match kind {
        MeasureKind::Beta => LambdaMeasure::beta(need(c.lambda, "lambda")?),
        MeasureKind::Kingman => {
            if c.lambda.is_some() {
                return Err(Error::Config("'lambda' is only accepted with measure 'beta'".into()));
            }
            Ok(LambdaMeasure::Kingman)
        }
        MeasureKind::Pd => Err(Error::Config("measure 'pd' has no rate table".into())),
    }
}

fn rates(c: &ExperimentConfig) -> Result<ExperimentOutput> {
    let measure = lambda_measure(c, need(c.measure, "measure")?)?;
    let table = RateTable::new(&measure, need(c.bmax, "bmax")?)?;
    let bytes = csv_bytes(|b| table.write_csv(b))?;
    let rows: Vec<Value> = (2..=table.b_max)
        .flat_map(|b| (2..=b).map(move |k| (b, k)))
        .map(|(b, k)| json!({ "b": b, "k": k, "rate": table.get(b, k) }))
        .collect();
    let mut summary = Map::new();
    summary.insert("bmax".into(), json!(table.b_max));
    summary.insert("recursion_error".into(), json!(table.recursion_error()));
    Ok(ExperimentOutput {
        tables: vec![(None, bytes)],
        json: json!({ "rates": rows, "recursion_error": table.recursion_error() }),
        summary,
    })
}

fn coalescent(c: &ExperimentConfig, mc: &McContext) -> Result<ExperimentOutput> {
    let kind = need(c.measure, "measure")?;
    let lineages = need(c.lineages, "lineages")?;
    let replicates = need(c.replicates, "replicates")?;
    let pd_keys = [("n", c.n.is_some()), ("alpha", c.alpha.is_some()), ("theta", c.theta.is_some()), ("horizon", c.horizon.is_some())];
    let (trajectories, reference, time_scale) = match kind {
        MeasureKind::Pd => {
            if c.lambda.is_some() {
                return Err(Error::Config("'lambda' is not accepted with measure 'pd'".into()));
            }
            let params = pd_params(c)?;
            let n = need(c.n, "n")?;
            let horizon = need(c.horizon, "horizon")?;
            let scaling = ScalingConstants::new(params)?;
            let reference = if params.theta < params.alpha {
                LambdaMeasure::beta(scaling.lambda)?
            } else {
                LambdaMeasure::Kingman
            };
            let c_n = estimate_cn(params, n, replicates, CnMode::SemiAnalytic, &mc.stage(1))?;
            let raw = simulate_pd_genealogies(params, n, lineages, horizon, false, replicates, &mc.stage(2))?;
            let scaled = raw.into_iter().map(|t| rescale(t, c_n.estimate)).collect();
            (scaled, reference, Some(c_n))
        }
        _ => {
            if let Some((key, _)) = pd_keys.iter().find(|(_, set)| *set) {
                return Err(Error::Config(format!("'{key}' is only accepted with measure 'pd'")));
            }
            let measure = lambda_measure(c, kind)?;
            if lineages < 2 {
                return Err(Error::Parameter("coalescent needs lineages >= 2".into()));
            }
            let trajs = mc.try_map_replicates(replicates, |_, rng| simulate_lambda_coalescent(lineages, &measure, rng))?;
            (trajs, measure, None)
        }
    };
    let stats = merger_statistics(&trajectories, lineages, &reference)?;
    let traj_table = csv_bytes(|b| write_trajectories(&trajectories, b))?;
    let merger_table = csv_bytes(|b| write_mergers(&stats, b))?;
    let mut summary = Map::new();
    summary.insert("n_mergers".into(), json!(stats.n_mergers()));
    summary.insert("no_merger".into(), json!(stats.no_merger));
    summary.insert("chi_square".into(), json!(stats.chi_square));
    summary.insert("degrees_of_freedom".into(), json!(stats.degrees_of_freedom));
    if lineages >= 3 {
        summary.insert("fraction_size_ge_3".into(), json!(stats.fraction_at_least(3).estimate));
    }
    if let Some(r) = &time_scale {
        summary.insert("c_n".into(), json!(r.estimate));
    }
    let traj_json: Vec<Value> = trajectories
        .iter()
        .map(|t| json!({ "times": t.times, "partitions": t.states.iter().map(|s| s.to_string()).collect::<Vec<_>>() }))
        .collect();
    Ok(ExperimentOutput {
        tables: vec![(None, traj_table), (Some("mergers"), merger_table)],
        json: json!({
            "reference": format!("{reference:?}"),
            "c_n": time_scale,
            "merger_statistics": stats,
            "trajectories": traj_json,
        }),
        summary,
    })
}

/// Generation counts times `c_n`.
fn rescale(t: CoalescentTrajectory, c_n: f64) -> CoalescentTrajectory {
    CoalescentTrajectory { times: t.times.iter().map(|x| x * c_n).collect(), states: t.states }
}

fn write_trajectories(trajs: &[CoalescentTrajectory], w: &mut Vec<u8>) -> Result<()> {
    let rows = trajs.iter().enumerate().flat_map(|(i, t)| {
        t.times
            .iter()
            .zip(&t.states)
            .map(move |(time, s)| vec![i.to_string(), fmt_f64(*time), s.n_blocks().to_string(), s.to_string()])
    });
    write_csv(w, &["replicate", "time", "n_blocks", "partition"], rows)
}

fn write_mergers(stats: &MergerStatistics, w: &mut Vec<u8>) -> Result<()> {
    let rows = (0..stats.counts.len()).map(|i| {
        vec![
            (i + 2).to_string(),
            stats.counts[i].to_string(),
            fmt_f64(stats.empirical[i]),
            fmt_f64(stats.reference[i]),
        ]
    });
    write_csv(w, &["size", "count", "empirical", "reference"], rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brw::Beta;

    fn rates_config() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(Subcommand::Rates);
        c.measure = Some(MeasureKind::Beta);
        c.lambda = Some(1.0);
        c.bmax = Some(10);
        c
    }

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("/a/out.csv"), "genealogy"), PathBuf::from("/a/out.genealogy.csv"));
        assert_eq!(sibling(Path::new("out"), "mergers"), PathBuf::from("out.mergers.csv"));
    }

    #[test]
    fn rates_table_contains_half() {
        let out = execute(&rates_config(), Some(1)).unwrap();
        let text = String::from_utf8(out.tables[0].1.clone()).unwrap();
        assert!(text.starts_with("b,k,rate\n"));
        let row = text.lines().find(|l| l.starts_with("3,2,")).unwrap();
        let v: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!((v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn exit_codes() {
        let mut bad = rates_config();
        bad.alpha = Some(0.5);
        assert_eq!(run_experiment(&bad, Some(1)).exit_code, 2);
        let mut bad = rates_config();
        bad.lambda = Some(3.0);
        assert_eq!(run_experiment(&bad, Some(1)).exit_code, 2);
        let mut ok = ExperimentConfig::new(Subcommand::Speed);
        ok.n = Some(3);
        ok.beta = Some(Beta::Infinite);
        ok.steps = Some(100);
        ok.replicates = Some(2);
        let outcome = run_experiment(&ok, Some(1));
        assert_eq!(outcome.exit_code, 0, "{}", outcome.summary);
        assert_eq!(outcome.summary["status"], "ok");
    }

    #[test]
    fn resource_errors_exit_3_and_leave_no_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = ExperimentConfig::new(Subcommand::Speed);
        c.n = Some(20);
        c.beta = Some(Beta::Finite(1.01));
        c.steps = Some(100);
        c.replicates = Some(1);
        c.output = Some(dir.path().join("speed.json"));
        let outcome = run_experiment(&c, Some(1));
        if outcome.exit_code != 0 {
            assert_eq!(outcome.exit_code, 3, "{}", outcome.summary);
            assert!(!dir.path().join("speed.json").exists());
        }
    }

    #[test]
    fn coalescent_measure_keys_checked() {
        let mut c = ExperimentConfig::new(Subcommand::Coalescent);
        c.measure = Some(MeasureKind::Kingman);
        c.lineages = Some(3);
        c.replicates = Some(10);
        assert!(execute(&c, Some(1)).is_ok());
        c.alpha = Some(0.5);
        assert!(execute(&c, Some(1)).is_err());
        c.measure = Some(MeasureKind::Pd);
        c.n = Some(50);
        c.horizon = Some(10_000);
        let out = execute(&c, Some(1)).unwrap();
        assert!(out.summary["c_n"].as_f64().unwrap() > 0.0);
    }
}
