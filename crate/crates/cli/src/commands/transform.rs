use std::path::{Path, PathBuf};

use clap::{Args, Subcommand};
use multimatrix::transforms::{compress, expand};
use multimatrix::{derive, RealMatrix};
use serde::Deserialize;
use serde_json::json;

use super::{parse_family, Outcome};
use crate::dataset::{read_json, DatasetFile, Rows, StructureSpec};
use crate::error::{CliError, CliResult};
use crate::report::{to_json, Report, VERSION};

#[derive(Debug, Subcommand)]
pub enum TransformCommand {
    /// Maps a matrix `Y` onto the unit Frobenius ball.
    Compress(MatrixArgs),
    /// Inverse of `compress`; the input must lie inside the unit ball.
    Expand(MatrixArgs),
    /// Turns raw draws `(X_0, ..., X_k)` into a family's dataset.
    Derive(DeriveArgs),
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    /// JSON file holding one matrix as nested row arrays.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false, id = "source")]
pub struct DeriveSource {
    /// JSON file `{"structure": .., "draws": [[X_0, .., X_k], ..]}`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// JSON manifest `{"structure": .., "draws": [["x0.csv", ..], ..]}`
    /// naming one CSV file per matrix, relative to the manifest.
    #[arg(long)]
    pub from_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DeriveArgs {
    #[arg(long)]
    pub family: String,
    #[command(flatten)]
    pub source: DeriveSource,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDraws<T> {
    structure: StructureSpec,
    draws: Vec<Vec<T>>,
}

fn matrix(rows: &Rows) -> CliResult<RealMatrix> {
    RealMatrix::from_rows(rows).map_err(|e| CliError::invalid(e.to_string()))
}

fn read_csv(path: &Path) -> CliResult<Rows> {
    let invalid = |e: csv::Error| CliError::invalid(format!("{}: {e}", path.display()));
    let mut reader =
        csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path).map_err(invalid)?;
    reader
        .records()
        .map(|record| {
            record
                .map_err(invalid)?
                .iter()
                .map(|field| {
                    field.parse::<f64>().map_err(|e| CliError::invalid(format!("{}: {field:?}: {e}", path.display())))
                })
                .collect()
        })
        .collect()
}

pub fn run(command: &TransformCommand) -> CliResult<Outcome> {
    match command {
        TransformCommand::Compress(args) | TransformCommand::Expand(args) => {
            let compressing = matches!(command, TransformCommand::Compress(_));
            let y = matrix(&read_json::<Rows>(&args.input)?)?;
            let (x, log_jacobian) = if compressing { compress(&y) } else { expand(&y)? };
            let name = if compressing { "transform compress" } else { "transform expand" };
            let report = Report::new(
                name,
                json!({ "input": args.input }),
                json!({ "matrix": x.to_rows(), "log_jacobian": log_jacobian }),
            );
            Ok(Outcome::ok(to_json(&report)?))
        }
        TransformCommand::Derive(args) => derive_dataset(args),
    }
}

fn derive_dataset(args: &DeriveArgs) -> CliResult<Outcome> {
    let (family, _) = parse_family(&args.family)?;
    let (spec, draws, source) = match (&args.source.input, &args.source.from_csv) {
        (Some(path), _) => {
            let raw: RawDraws<Rows> = read_json(path)?;
            (raw.structure, raw.draws, path)
        }
        (None, Some(manifest)) => {
            let raw: RawDraws<PathBuf> = read_json(manifest)?;
            let dir = manifest.parent().unwrap_or(Path::new("."));
            let draws = raw
                .draws
                .iter()
                .map(|files| files.iter().map(|f| read_csv(&dir.join(f))).collect::<CliResult<Vec<_>>>())
                .collect::<CliResult<Vec<_>>>()?;
            (raw.structure, draws, manifest)
        }
        (None, None) => unreachable!("clap requires one source"),
    };
    let structure = spec.build()?;
    let roles = family.roles(structure.k()).map_err(|e| CliError::invalid(e.to_string()))?;
    let samples = draws
        .iter()
        .enumerate()
        .map(|(r, blocks)| {
            let x = blocks.iter().map(matrix).collect::<CliResult<Vec<_>>>().map_err(|e| e.at_replicate(r))?;
            derive(&x, &structure, &roles).map_err(|e| CliError::from(e).at_replicate(r))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let meta = json!({ "family": family.name(), "source": source, "version": VERSION });
    Ok(Outcome::ok(to_json(&DatasetFile::from_draws(&structure, &roles, &samples, meta))?))
}
