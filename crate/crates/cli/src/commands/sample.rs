use std::path::PathBuf;

use clap::Args;
use multimatrix::sampling::sample_family;
use multimatrix::RngStream;
use serde_json::json;

use super::{parse_family, KernelArgs, Outcome, StructureArgs};
use crate::dataset::DatasetFile;
use crate::error::{CliError, CliResult};
use crate::report::{to_json, VERSION};

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub family: String,
    #[command(flatten)]
    pub structure: StructureArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Number of independent replicates.
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &SampleArgs) -> CliResult<Outcome> {
    let (family, _) = parse_family(&args.family)?;
    let structure = args.structure.build()?;
    let kernel = args.kernel.build(structure.dim())?;
    if args.count == 0 {
        return Err(CliError::invalid("--count must be positive"));
    }
    family.roles(structure.k()).map_err(|e| CliError::invalid(e.to_string()))?;
    let set = sample_family(family, &structure, &kernel, args.count, &mut RngStream::new(args.seed))?;
    let meta = json!({
        "family": family.name(),
        "kernel": kernel.family(),
        "count": args.count,
        "seed": args.seed,
        "version": VERSION,
    });
    Ok(Outcome::ok(to_json(&DatasetFile::from_draws(&set.structure, &set.roles, &set.draws, meta))?))
}
