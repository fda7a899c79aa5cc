use std::path::PathBuf;

use clap::{Args, ValueEnum};
use multimatrix::checks::{self, quadrature_tractable, CheckConfig, CheckLevel};
use serde::Serialize;
use serde_json::json;

use super::{parse_family, KernelArgs, Outcome, StructureArgs};
use crate::error::{CliError, CliResult};
use crate::report::{to_json, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Fast,
    Full,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub family: String,
    #[command(flatten)]
    pub structure: StructureArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    #[arg(long, value_enum, default_value_t = Level::Fast)]
    pub level: Level,
    /// Monte Carlo sample size at the full level.
    #[arg(long, default_value_t = 20_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &CheckArgs) -> CliResult<Outcome> {
    let (family, _) = parse_family(&args.family)?;
    let structure = args.structure.build()?;
    let kernel = args.kernel.build(structure.dim())?;
    family.roles(structure.k()).map_err(|e| CliError::invalid(e.to_string()))?;
    let level = match args.level {
        Level::Fast => CheckLevel::Fast,
        Level::Full => CheckLevel::Full,
    };
    if level == CheckLevel::Fast && !quadrature_tractable(&structure) {
        return Err(CliError::invalid(
            "quadrature checks need m = 1, k <= 2 and at most 2 rows per non-anchor block; \
             use --level full for the Monte Carlo checks",
        ));
    }
    if level == CheckLevel::Full && args.draws < 10 {
        return Err(CliError::invalid("--draws must be at least 10"));
    }
    let config = CheckConfig { family, structure, kernel, level, draws: args.draws, seed: args.seed };
    let outcomes = checks::run(&config)?;
    let failed = outcomes.iter().filter(|c| !c.pass).count();
    let mut report = Report::new(
        "check",
        json!({
            "family": args.family,
            "structure": args.structure,
            "kernel": args.kernel,
            "level": args.level,
            "draws": args.draws,
        }),
        json!({ "family": family.name(), "total": outcomes.len(), "failed": failed }),
    );
    report.checks = outcomes;
    report.seed = Some(args.seed);
    Ok(Outcome { text: to_json(&report)?, exit_code: if failed == 0 { 0 } else { 1 } })
}
