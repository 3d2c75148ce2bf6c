use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sharpe_qubo::calibration::{
    calibrate as run_calibration, collect_statistics, write_report_csv, write_statistics_csv, CalibrationError,
    CalibrationReport, LambdaGrid, SharpeSummary,
};
use sharpe_qubo::formulations::{sharpe_ratio, FormulationKind, FormulationSpec, PortfolioSolution, QuboModel};
use sharpe_qubo::market_data::{
    annualized_stats, clean_panel, filter_positive_mu, load_prices, log_returns, normality_score, qq_points,
    simple_returns, synthetic_panel, write_prices, AssetStats, NormalityScore, ReturnKind, ReturnPanel, SynthConfig,
};
use sharpe_qubo::solvers::{classical_max_sharpe, solve as run_solver, SolverConfig, SolverKind};

use crate::error::CliError;
use crate::files::{create, csv_err, csv_writer, out_dir, read_json, write_json};
use crate::{
    BuildArgs, CalibrateArgs, FormulationArgs, Outcome, PrepareArgs, ReportArgs, SolveArgs, SolverArgs, SynthArgs,
};

pub fn synth(a: &SynthArgs) -> Result<Outcome, CliError> {
    let cfg = SynthConfig { assets: a.assets, days: a.days, seed: a.seed, ..SynthConfig::default() };
    let panel = synthetic_panel::<f64>(&cfg)?;
    write_prices(&panel, create(&a.out)?)?;
    println!("wrote {} assets x {} days to {}", panel.n_assets(), panel.n_dates(), a.out.display());
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct NormalityReport {
    chosen: ReturnKind,
    selection: &'static str,
    rows: usize,
    simple: Option<NormalityScore<f64>>,
    log: Option<NormalityScore<f64>>,
    dropped_missing: Vec<String>,
    dropped_nonpositive: Vec<String>,
}

#[derive(Serialize)]
struct QqRow<'a> {
    kind: ReturnKind,
    asset: &'a str,
    theoretical: f64,
    sample: f64,
}

fn missing_from(all: &[String], kept: &[String]) -> Vec<String> {
    all.iter().filter(|a| !kept.contains(a)).cloned().collect()
}

pub fn prepare(a: &PrepareArgs) -> Result<Outcome, CliError> {
    let panel = load_prices::<f64>(&a.prices)?;
    let cleaned = clean_panel(&panel, a.max_missing)?;
    let simple = simple_returns(&cleaned)?;
    let log = log_returns(&cleaned)?;
    let simple_score = normality_score(&simple).ok();
    let log_score = normality_score(&log).ok();

    let (chosen, selection) = match a.returns {
        Some(k) => (k, "fixed"),
        None => match (&simple_score, &log_score) {
            (Some(s), Some(l)) => (if l.pooled < s.pooled { ReturnKind::Log } else { ReturnKind::Simple }, "jarque-bera"),
            _ => return Err(CliError::Usage("too few rows to compare return kinds; pass --returns".into())),
        },
    };
    let returns = match chosen {
        ReturnKind::Simple => &simple,
        ReturnKind::Log => &log,
    };
    let all = annualized_stats(returns, a.frequency)?;
    let stats = if a.keep_nonpositive { all.clone() } else { filter_positive_mu(&all)? };

    let dir = out_dir(&a.out)?;
    write_json(&dir.join("stats.json"), &stats)?;
    write_json(
        &dir.join("normality.json"),
        &NormalityReport {
            chosen,
            selection,
            rows: cleaned.n_dates(),
            simple: simple_score,
            log: log_score,
            dropped_missing: missing_from(panel.assets(), cleaned.assets()),
            dropped_nonpositive: missing_from(&all.assets, &stats.assets),
        },
    )?;
    write_qq(&dir.join("qq.csv"), &[&simple, &log], a.qq_points)?;
    println!(
        "{} of {} assets kept, {} returns, {} rows",
        stats.n_assets(),
        panel.n_assets(),
        chosen,
        cleaned.n_dates()
    );
    Ok(Outcome::Done)
}

fn write_qq(path: &Path, panels: &[&ReturnPanel<f64>], points: usize) -> Result<(), CliError> {
    let mut w = csv_writer(path)?;
    for p in panels {
        for (j, asset) in p.assets.iter().enumerate() {
            for (theoretical, sample) in qq_points(&p.column(j), points) {
                w.serialize(QqRow { kind: p.kind, asset, theoretical, sample }).map_err(csv_err(path))?;
            }
        }
    }
    w.flush().map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn read_stats(path: &Path) -> Result<AssetStats<f64>, CliError> {
    let stats: AssetStats<f64> = read_json(path)?;
    stats.validate()?;
    Ok(stats)
}

fn spec_from(f: &FormulationArgs) -> FormulationSpec {
    FormulationSpec { kind: f.kind, bits: f.bits, step: f.step }
}

pub fn build(a: &BuildArgs) -> Result<Outcome, CliError> {
    let stats = read_stats(&a.stats)?;
    let model = spec_from(&a.formulation).build(&stats, a.lambda0, a.lambda1)?;
    if let Some(out) = &a.out {
        write_json(out, &model)?;
    }
    println!(
        "variables {} bits_per_asset {} nnz {} density {:.6}",
        model.n_variables(),
        model.discretization.bits_per_asset(),
        model.matrix.nnz(),
        model.matrix.density()
    );
    Ok(Outcome::Done)
}

fn solver_config(a: &SolverArgs) -> Result<SolverConfig, CliError> {
    let mut cfg = match &a.config {
        Some(p) => read_json(p)?,
        None => SolverConfig::default(),
    };
    if let Some(s) = a.solver {
        cfg.solver = s;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Contents of `solution.json`.
#[derive(Serialize, Deserialize)]
pub struct SolutionFile {
    pub kind: FormulationKind,
    pub solver: SolverKind,
    pub seed: u64,
    pub assets: Vec<String>,
    pub lambda0: f64,
    pub lambda1: f64,
    pub n_variables: usize,
    pub tolerance: f64,
    #[serde(flatten)]
    pub solution: PortfolioSolution<f64>,
    pub samples: usize,
    pub wall_time_ms: f64,
}

pub fn solve(a: &SolveArgs) -> Result<Outcome, CliError> {
    let model: QuboModel<f64> = read_json(&a.model)?;
    let cfg = solver_config(&a.solver)?;
    let start = Instant::now();
    let result = run_solver(&model.matrix, &cfg)?;
    let solution = model.decode(&result.best_bits)?;
    let feasible = solution.feasible;
    let file = SolutionFile {
        kind: model.kind,
        solver: cfg.solver,
        seed: cfg.seed,
        assets: model.stats.assets.clone(),
        lambda0: model.lambda0,
        lambda1: model.lambda1,
        n_variables: model.n_variables(),
        tolerance: model.default_tolerance(),
        samples: result.samples.len(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        solution,
    };
    write_json(&a.out, &file)?;
    println!(
        "energy {} feasible {} residual {:e} sharpe {}",
        result.best_energy,
        feasible,
        file.solution.residual,
        file.solution.sharpe.map_or("-".to_string(), |s| format!("{s:.6}"))
    );
    Ok(if feasible { Outcome::Done } else { Outcome::Infeasible })
}

fn write_calibration(dir: &Path, report: &CalibrationReport) -> Result<(), CliError> {
    write_json(&dir.join("calibration.json"), report)?;
    let path = dir.join("calibration.csv");
    write_report_csv(report, create(&path)?)?;
    for r in &report.records {
        println!(
            "lambda0 {} lambda1 {} feasible {}/{} best_sharpe {}",
            r.lambda0,
            r.lambda1,
            r.feasible_count,
            r.total_runs,
            r.best_sharpe.map_or("-".to_string(), |s| format!("{s:.6}"))
        );
    }
    Ok(())
}

pub fn calibrate(a: &CalibrateArgs) -> Result<Outcome, CliError> {
    let stats = read_stats(&a.stats)?;
    let grid: LambdaGrid = read_json(&a.grid)?;
    let spec = spec_from(&a.formulation);
    let cfg = solver_config(&a.solver)?;
    let dir = out_dir(&a.out)?;
    let report = match run_calibration(&spec, &stats, &grid, &cfg, cfg.seed) {
        Ok(r) => r,
        Err(CalibrationError::NoFeasible(report)) => {
            write_calibration(&dir, &report)?;
            eprintln!("no feasible configuration in the grid");
            return Ok(Outcome::Infeasible);
        }
        Err(e) => return Err(e.into()),
    };
    write_calibration(&dir, &report)?;
    let chosen = report.chosen.expect("calibrate returns a chosen pair");
    println!("chosen lambda0 {} lambda1 {}", chosen.lambda0, chosen.lambda1);

    if a.model_out.is_none() && a.collect.is_none() {
        return Ok(Outcome::Done);
    }
    let model = spec.build(&stats, chosen.lambda0, chosen.lambda1)?;
    if let Some(path) = &a.model_out {
        write_json(path, &model)?;
    }
    if let Some(n) = a.collect {
        let rs = collect_statistics(&model, &cfg, n, a.max_attempts, cfg.seed)?;
        write_json(&dir.join("statistics.json"), &rs)?;
        let path = dir.join("statistics.csv");
        write_statistics_csv(&rs, create(&path)?)?;
        println!("collected {}/{} feasible in {} attempts", rs.solutions.len(), rs.requested, rs.attempts);
        if rs.shortfall {
            return Ok(Outcome::Infeasible);
        }
    }
    Ok(Outcome::Done)
}

#[derive(Serialize)]
struct GroupRow {
    kind: FormulationKind,
    solver: SolverKind,
    n: usize,
    feasible: usize,
    sharpe_min: Option<f64>,
    sharpe_max: Option<f64>,
    sharpe_mean: Option<f64>,
    sharpe_median: Option<f64>,
    assets_min: Option<usize>,
    assets_max: Option<usize>,
    assets_mean: Option<f64>,
    baseline_sharpe: f64,
}

#[derive(Serialize)]
struct Baseline {
    assets: Vec<String>,
    weights: Vec<f64>,
    sharpe: f64,
}

#[derive(Serialize)]
struct Summary {
    baseline: Baseline,
    groups: Vec<GroupRow>,
}

pub fn report(a: &ReportArgs) -> Result<Outcome, CliError> {
    if a.solutions.is_empty() {
        return Err(CliError::Usage("no solution files given".into()));
    }
    let stats = read_stats(&a.stats)?;
    let weights = classical_max_sharpe(&stats, a.max_iters, 1e-12)?;
    let baseline_sharpe = sharpe_ratio(&weights, &stats)?;

    let mut groups: Vec<((FormulationKind, SolverKind), Vec<SolutionFile>)> = Vec::new();
    for path in &a.solutions {
        let s: SolutionFile = read_json(path)?;
        if s.assets != stats.assets {
            return Err(CliError::Usage(format!(
                "{}: asset universe differs from {}",
                path.display(),
                a.stats.display()
            )));
        }
        let key = (s.kind, s.solver);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(s),
            None => groups.push((key, vec![s])),
        }
    }

    let rows: Vec<GroupRow> = groups
        .iter()
        .map(|((kind, solver), files)| {
            let feasible: Vec<&SolutionFile> = files.iter().filter(|f| f.solution.feasible).collect();
            let sharpes: Vec<f64> = feasible.iter().filter_map(|f| f.solution.sharpe).collect();
            let counts: Vec<usize> = feasible.iter().map(|f| f.solution.asset_count()).collect();
            let sr = SharpeSummary::from_values(&sharpes);
            GroupRow {
                kind: *kind,
                solver: *solver,
                n: files.len(),
                feasible: feasible.len(),
                sharpe_min: sr.map(|s| s.min),
                sharpe_max: sr.map(|s| s.max),
                sharpe_mean: sr.map(|s| s.mean),
                sharpe_median: sr.map(|s| s.median),
                assets_min: counts.iter().min().copied(),
                assets_max: counts.iter().max().copied(),
                assets_mean: (!counts.is_empty()).then(|| counts.iter().sum::<usize>() as f64 / counts.len() as f64),
                baseline_sharpe,
            }
        })
        .collect();

    let dir = out_dir(&a.out)?;
    let path = dir.join("summary.csv");
    let mut w = csv_writer(&path)?;
    for r in &rows {
        w.serialize(r).map_err(csv_err(&path))?;
        println!(
            "{} {} n {} feasible {} best_sharpe {} baseline {:.6}",
            r.kind,
            r.solver,
            r.n,
            r.feasible,
            r.sharpe_max.map_or("-".to_string(), |s| format!("{s:.6}")),
            r.baseline_sharpe
        );
    }
    w.flush().map_err(|source| CliError::Io { path: path.clone(), source })?;
    let summary = Summary { baseline: Baseline { assets: stats.assets.clone(), weights, sharpe: baseline_sharpe }, groups: rows };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(Outcome::Done)
}
