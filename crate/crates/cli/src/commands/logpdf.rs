use std::path::PathBuf;

use clap::Args;
use multimatrix::FormKind;
use serde_json::json;

use super::{parse_family, Outcome};
use crate::dataset::{read_json, DatasetFile};
use crate::error::{CliError, CliResult};
use crate::params::ParamsFile;
use crate::report::{to_json, Report};

#[derive(Debug, Args)]
pub struct LogpdfArgs {
    #[arg(long)]
    pub family: String,
    /// Dataset file.
    #[arg(long)]
    pub data: PathBuf,
    /// Parameter file; integer shapes and the Normal kernel when omitted.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(args: &LogpdfArgs) -> CliResult<Outcome> {
    let (family, implied) = parse_family(&args.family)?;
    let data = DatasetFile::load(&args.data)?;
    let params: ParamsFile = match &args.params {
        Some(path) => read_json(path)?,
        None => ParamsFile::default(),
    };
    let structure = data.structure()?;
    let expected = family.roles(structure.k()).map_err(|e| CliError::invalid(e.to_string()))?;
    if data.roles()? != expected {
        return Err(CliError::invalid(format!(
            "{family} needs anchor {:?} with roles {:?}",
            expected.anchor, expected.blocks
        )));
    }
    let form = params.form(family, implied, &structure)?;
    if form.kind() == FormKind::Joint && data.anchors.is_none() {
        return Err(CliError::invalid("joint densities need per-replicate anchors in the dataset"));
    }
    let samples = data.samples(&structure)?;
    let values = samples
        .iter()
        .enumerate()
        .map(|(r, s)| family.log_density(s, &structure, &form).map_err(|e| CliError::from(e).at_replicate(r)))
        .collect::<CliResult<Vec<f64>>>()?;
    let sum: f64 = values.iter().sum();
    let report = Report::new(
        "logpdf",
        json!({ "family": args.family, "data": args.data, "params": args.params }),
        json!({ "family": args.family, "form": form.kind(), "values": values, "sum": sum }),
    );
    Ok(Outcome::ok(to_json(&report)?))
}
