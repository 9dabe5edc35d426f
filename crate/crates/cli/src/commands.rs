use std::fs;

use serde::Serialize;
use serde_json::{json, Map, Value};

use witnessforge::cv::gauss::{bisect_sign_change, ppt_threshold, reference_threshold};
use witnessforge::cv::{
    bs_squeezing, cv_witness, expect_witness_gauss, gauss_noisy_twb, gauss_separability_threshold,
    phase_noisy_twb, twb_state, FockTruncation,
};
use witnessforge::finite::{
    classify, maximally_entangled, schmidt_operator, DepolarizedFamily, NORMALIZATION_TOL,
};
use witnessforge::linalg::ComplexMatrix;
use witnessforge::report::{gauss_report, phase_report, witness_report, EstimateReport};
use witnessforge::tomography::{mc_estimate_witness, HomodyneSampler};
use witnessforge::witness::evaluate_witness;

use crate::args::{Cli, Command, Format, Grid, PsiArgs};
use crate::output::{
    envelope_json, write_output, write_summary, CliError, CliResult, RunConfig, Table,
};

const CROSSING_TOL: f64 = 1e-10;
const DEFAULT_SEED: u64 = 0;

pub fn run(cli: &Cli) -> CliResult<()> {
    if cli.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    let mut params = Map::new();
    let mut seed = cli.seed;
    let outcome = match &cli.command {
        Command::FiniteWitness { psi, p } => {
            let psi = resolve_psi(psi, &mut params)?;
            params.insert("p".into(), json!(p));
            Outcome::Single(to_value(&witness_report(&DepolarizedFamily::new(
                psi, *p,
            )?)?))
        }
        Command::FiniteScan { psi, p_range } => {
            let psi = resolve_psi(psi, &mut params)?;
            params.insert("p_range".into(), json!(p_range.to_string()));
            finite_scan(psi, p_range)?
        }
        Command::CvPhase { x, gammat } => {
            let trunc = resolve_trunc(cli, *x, &mut params)?;
            params.insert("x".into(), json!(x));
            params.insert("gammat".into(), json!(gammat));
            Outcome::Single(to_value(&phase_report(*x, *gammat, &trunc)?))
        }
        Command::CvGauss {
            x,
            kappa,
            scan_kappa,
        } => {
            let trunc = resolve_trunc(cli, *x, &mut params)?;
            params.insert("x".into(), json!(x));
            match (kappa, scan_kappa) {
                (Some(k), _) => {
                    params.insert("kappa".into(), json!(k));
                    Outcome::Single(to_value(&gauss_report(*x, *k, &trunc)?))
                }
                (None, Some(grid)) => {
                    params.insert("scan_kappa".into(), json!(grid.to_string()));
                    gauss_kappa_scan(*x, grid, &trunc)?
                }
                (None, None) => {
                    return Err(CliError::Usage(
                        "cv-gauss needs --kappa or --scan-kappa".into(),
                    ))
                }
            }
        }
        Command::GaussScan { x_range } => {
            params.insert("x_range".into(), json!(x_range.to_string()));
            params.insert("tol".into(), json!(cli.tol));
            gauss_x_scan(x_range, cli.tol)?
        }
        Command::TomoEstimate {
            x,
            gammat,
            kappa,
            samples,
        } => {
            let trunc = resolve_trunc(cli, *x, &mut params)?;
            let resolved = cli.seed.unwrap_or(DEFAULT_SEED);
            seed = Some(resolved);
            params.insert("x".into(), json!(x));
            params.insert("gammat".into(), json!(gammat));
            params.insert("kappa".into(), json!(kappa));
            params.insert("samples".into(), json!(samples));
            params.insert("workers".into(), json!(cli.workers));
            tomo_estimate(*x, *gammat, *kappa, *samples, resolved, cli.workers, &trunc)?
        }
        Command::BsSqueeze {
            x,
            kappa,
            scan_kappa,
        } => {
            let trunc = resolve_trunc(cli, *x, &mut params)?;
            params.insert("x".into(), json!(x));
            match (kappa, scan_kappa) {
                (Some(k), _) => {
                    params.insert("kappa".into(), json!(k));
                    Outcome::Single(to_value(&bs_squeezing(*x, *k, &trunc)?))
                }
                (None, Some(grid)) => {
                    params.insert("scan_kappa".into(), json!(grid.to_string()));
                    bs_scan(*x, grid, &trunc)?
                }
                (None, None) => {
                    return Err(CliError::Usage(
                        "bs-squeeze needs --kappa or --scan-kappa".into(),
                    ))
                }
            }
        }
    };

    let config = RunConfig {
        command: cli.command.name(),
        params,
        seed,
        output_path: cli.out.as_ref().map(|p| p.display().to_string()),
        format: cli.format.name(),
    };
    let out = cli.out.as_deref();
    match (outcome, cli.format) {
        (Outcome::Single(report), Format::Json) => {
            write_output(out, &envelope_json(&config, &report))
        }
        (Outcome::Single(_), Format::Csv) => Err(CliError::Usage(format!(
            "{} has no CSV form; use a scan or --format json",
            config.command
        ))),
        (Outcome::Table { table, summary }, Format::Json) => write_output(
            out,
            &envelope_json(&config, &json!({ "table": table, "summary": summary })),
        ),
        (Outcome::Table { table, summary }, Format::Csv) => {
            write_output(out, &table.to_csv())?;
            write_summary(out, &envelope_json(&config, &summary))
        }
        (Outcome::Sampled { report, .. }, Format::Json) => {
            write_output(out, &envelope_json(&config, &report))
        }
        (Outcome::Sampled { report, csv }, Format::Csv) => {
            write_output(out, &csv)?;
            write_summary(out, &envelope_json(&config, &report))
        }
    }
}

enum Outcome {
    Single(Value),
    /// Row data plus a summary; CSV output writes them separately.
    Table {
        table: Table,
        summary: Value,
    },
    /// Estimate report plus the raw batch, which only CSV output writes.
    Sampled {
        report: Value,
        csv: String,
    },
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values are serializable")
}

fn resolve_psi(args: &PsiArgs, params: &mut Map<String, Value>) -> CliResult<ComplexMatrix> {
    let sources = args.max_entangled as usize
        + args.schmidt.is_some() as usize
        + args.psi_file.is_some() as usize;
    if sources != 1 {
        return Err(CliError::Usage(
            "give exactly one of --max-entangled, --schmidt, --psi-file".into(),
        ));
    }
    let psi = if args.max_entangled {
        let d = args
            .dim
            .ok_or_else(|| CliError::Usage("--max-entangled needs --dim".into()))?;
        params.insert("psi_source".into(), json!("max-entangled"));
        maximally_entangled(d)
    } else if let Some(coeffs) = &args.schmidt {
        let d = args.dim.unwrap_or(coeffs.len());
        let norm2: f64 = coeffs.iter().map(|s| s * s).sum();
        let mut coeffs = coeffs.clone();
        if norm2 > 0.0 && (norm2 - 1.0).abs() > NORMALIZATION_TOL {
            eprintln!("warning: Schmidt coefficients have Σs² = {norm2}; normalizing");
            coeffs.iter_mut().for_each(|s| *s /= norm2.sqrt());
        }
        params.insert("psi_source".into(), json!("schmidt"));
        params.insert("schmidt".into(), json!(coeffs));
        schmidt_operator(&coeffs, d)?
    } else {
        let path = args.psi_file.as_ref().expect("one source is present");
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        let m: ComplexMatrix = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: not a matrix JSON: {e}", path.display())))?;
        if let Some(d) = args.dim {
            if m.rows() != d {
                return Err(CliError::Usage(format!(
                    "--dim {d} does not match {}x{} Ψ",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        params.insert("psi_source".into(), json!("file"));
        params.insert("psi_file".into(), json!(path.display().to_string()));
        m
    };
    params.insert("dim".into(), json!(psi.rows()));
    params.insert("psi".into(), to_value(&psi));
    Ok(psi)
}

fn resolve_trunc(cli: &Cli, x: f64, params: &mut Map<String, Value>) -> CliResult<FockTruncation> {
    let trunc = match cli.trunc {
        Some(n) => FockTruncation::with_n_max(x, n, cli.tol)?,
        None => FockTruncation::for_twb(x, cli.tol)?,
    };
    params.insert("n_max".into(), json!(trunc.n_max));
    params.insert("tol".into(), json!(cli.tol));
    Ok(trunc)
}

/// Bisected zero crossings between adjacent grid points whose values differ
/// in sign.
fn crossings(
    points: &[f64],
    values: &[f64],
    f: impl Fn(f64) -> witnessforge::Result<f64>,
) -> CliResult<Vec<f64>> {
    let mut out = Vec::new();
    for i in 1..points.len() {
        let (a, b) = (values[i - 1], values[i]);
        if (a < 0.0) != (b < 0.0) {
            if a == 0.0 {
                out.push(points[i - 1]);
                continue;
            }
            let sign = if a < 0.0 { 1.0 } else { -1.0 };
            out.push(bisect_sign_change(
                |t| Ok(sign * f(t)?),
                points[i - 1],
                points[i],
                CROSSING_TOL,
            )?);
        }
    }
    Ok(out)
}

fn finite_scan(psi: ComplexMatrix, grid: &Grid) -> CliResult<Outcome> {
    let family = DepolarizedFamily::new(psi, 0.0)?;
    let w = family.witness()?;
    let value = |p: f64| -> witnessforge::Result<f64> {
        evaluate_witness(&w, &family.with_p(p)?.density()?)
    };
    let points = grid.points();
    let mut table = Table::new(&["p", "trace_wr", "lambda_min", "entangled"]);
    let mut values = Vec::with_capacity(points.len());
    for &p in &points {
        let fam = family.with_p(p)?;
        let v = value(p)?;
        values.push(v);
        table.push(vec![
            json!(p),
            json!(v),
            json!(fam.analytic_min_eig()),
            json!(classify(v).0),
        ]);
    }
    let summary = json!({
        "thresholds": crossings(&points, &values, value)?,
        "analytic_threshold": family.detection_threshold()?,
    });
    Ok(Outcome::Table { table, summary })
}

fn gauss_kappa_scan(x: f64, grid: &Grid, trunc: &FockTruncation) -> CliResult<Outcome> {
    let value = |k: f64| expect_witness_gauss(x, k, trunc);
    let points = grid.points();
    let mut table = Table::new(&["kappa", "expectation", "entangled"]);
    let mut values = Vec::with_capacity(points.len());
    for &k in &points {
        let v = value(k)?;
        values.push(v);
        table.push(vec![json!(k), json!(v), json!(classify(v).0)]);
    }
    let summary = json!({
        "thresholds": crossings(&points, &values, value)?,
        "ppt_threshold": ppt_threshold(x),
        "reference_threshold": reference_threshold(x),
    });
    Ok(Outcome::Table { table, summary })
}

fn gauss_x_scan(grid: &Grid, tol: f64) -> CliResult<Outcome> {
    let mut table = Table::new(&["x", "kappa_numeric", "kappa_ppt", "kappa_reference"]);
    let (mut dev_ppt, mut dev_ref) = (0.0f64, 0.0f64);
    for x in grid.points() {
        let th = gauss_separability_threshold(x, tol)?;
        dev_ppt = dev_ppt.max((th.kappa_numeric - th.kappa_ppt).abs());
        dev_ref = dev_ref.max((th.kappa_numeric - th.kappa_reference).abs());
        table.push(vec![
            json!(x),
            json!(th.kappa_numeric),
            json!(th.kappa_ppt),
            json!(th.kappa_reference),
        ]);
    }
    let summary = json!({ "max_dev_from_ppt": dev_ppt, "max_dev_from_reference": dev_ref });
    Ok(Outcome::Table { table, summary })
}

fn bs_scan(x: f64, grid: &Grid, trunc: &FockTruncation) -> CliResult<Outcome> {
    let points = grid.points();
    let mut table = Table::new(&[
        "kappa",
        "variance",
        "squeezing_witness",
        "witness_value",
        "consistent",
    ]);
    let (mut sq, mut wv) = (Vec::new(), Vec::new());
    for &k in &points {
        let r = bs_squeezing(x, k, trunc)?;
        let consistent = (r.squeezing_witness < 0.0) == (r.witness_value < 0.0);
        sq.push(r.squeezing_witness);
        wv.push(r.witness_value);
        table.push(vec![
            json!(k),
            json!(r.variance),
            json!(r.squeezing_witness),
            json!(r.witness_value),
            json!(consistent),
        ]);
    }
    let all_consistent = sq.iter().zip(&wv).all(|(a, b)| (*a < 0.0) == (*b < 0.0));
    let summary = json!({
        "squeezing_thresholds": crossings(&points, &sq, |k| Ok(bs_squeezing(x, k, trunc)?.squeezing_witness))?,
        "witness_thresholds": crossings(&points, &wv, |k| expect_witness_gauss(x, k, trunc))?,
        "all_consistent": all_consistent,
    });
    Ok(Outcome::Table { table, summary })
}

fn tomo_estimate(
    x: f64,
    gammat: Option<f64>,
    kappa: Option<f64>,
    samples: usize,
    seed: u64,
    workers: usize,
    trunc: &FockTruncation,
) -> CliResult<Outcome> {
    let (rho, descriptor) = match (gammat, kappa) {
        (Some(g), _) => (
            phase_noisy_twb(x, g, trunc)?,
            format!("phase-noisy twin beam x={x} gammat={g}"),
        ),
        (None, Some(k)) => (
            gauss_noisy_twb(x, k, trunc)?,
            format!("gauss-noisy twin beam x={x} kappa={k}"),
        ),
        (None, None) => (twb_state(x, trunc)?, format!("twin beam x={x}")),
    };
    let witness_trunc = FockTruncation {
        n_max: rho.dim_a() - 1,
        ..*trunc
    };
    let direct = evaluate_witness(&cv_witness(&witness_trunc)?, &rho)?;
    let batch = HomodyneSampler::new(&rho, descriptor)?.sample(samples, seed, workers)?;
    let report = EstimateReport::new(&mc_estimate_witness(&batch)?, seed, direct);
    let mut csv = Vec::new();
    batch.write_csv(&mut csv).expect("writing to memory");
    Ok(Outcome::Sampled {
        report: to_value(&report),
        csv: String::from_utf8(csv).expect("CSV is ASCII"),
    })
}
