use std::path::PathBuf;

use clap::Args;
use multimatrix::checks::CheckOutcome;
use multimatrix::estimation::{fit, Beta2Data, FitConfig};
use serde_json::json;

use super::Outcome;
use crate::dataset::DatasetFile;
use crate::error::{CliError, CliResult};
use crate::report::{to_json, Report};

const GRADIENT_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Dataset of F blocks.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub init_a0: Option<f64>,
    #[arg(long)]
    pub init_a: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Central-difference gradient norm of the log-likelihood in
/// `(ln a0, ln(a - (m-1)/2))`, where the optimizer works.
fn gradient_norm(data: &Beta2Data, a0: f64, a: f64) -> f64 {
    let bound = (data.m() as f64 - 1.0) / 2.0;
    let theta = [a0.ln(), (a - bound).ln()];
    let nll = |t0: f64, t1: f64| data.nll(t0.exp(), bound + t1.exp()).unwrap_or(f64::NAN);
    let h = 1e-5;
    let g0 = (nll(theta[0] + h, theta[1]) - nll(theta[0] - h, theta[1])) / (2.0 * h);
    let g1 = (nll(theta[0], theta[1] + h) - nll(theta[0], theta[1] - h)) / (2.0 * h);
    g0.hypot(g1)
}

pub fn run(args: &FitArgs) -> CliResult<Outcome> {
    let data = DatasetFile::load(&args.data)?;
    if data.replicates.is_empty() {
        return Err(CliError::invalid("the dataset has no replicates"));
    }
    let structure = data.structure()?;
    let replicates = data.f_replicates(&structure)?;
    let m = structure.cols();
    let defaults = FitConfig::default_for(m);
    let config = FitConfig {
        init_a0: args.init_a0.unwrap_or(defaults.init_a0),
        init_a: args.init_a.unwrap_or(defaults.init_a),
        tolerance: args.tol.unwrap_or(defaults.tolerance),
        restarts: args.restarts.unwrap_or(defaults.restarts),
        max_iterations: args.max_iterations.unwrap_or(defaults.max_iterations),
    };
    let beta2 = Beta2Data::new(&replicates, m)?;
    let report = fit(&beta2, &config).map_err(|e| match e {
        multimatrix::Error::Domain(msg) => CliError::invalid(format!("invalid fit configuration: {msg}")),
        other => other.into(),
    })?;
    let gradient = gradient_norm(&beta2, report.a0_hat, report.a_hat);
    let mut out = Report::new(
        "fit",
        json!({ "data": args.data, "config": config }),
        json!({
            "replicates": beta2.replicates(),
            "k": beta2.k(),
            "m": m,
            "fit": report,
        }),
    );
    out.checks.push(CheckOutcome {
        name: "gradient_norm".into(),
        pass: gradient <= GRADIENT_TOLERANCE,
        value: gradient,
        tolerance: GRADIENT_TOLERANCE,
    });
    Ok(Outcome::ok(to_json(&out)?))
}
