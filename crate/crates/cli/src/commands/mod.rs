pub mod check;
pub mod fit;
pub mod logpdf;
pub mod sample;
pub mod transform;

use clap::{Args, ValueEnum};
use multimatrix::{BlockStructure, Family, FormKind, KernelFamily, KernelSpec};
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// What a command produced: the document to write and the exit code.
pub struct Outcome {
    pub text: String,
    pub exit_code: i32,
}

impl Outcome {
    pub fn ok(text: String) -> Self {
        Self { text, exit_code: 0 }
    }
}

/// Resolves a family name, including the `tri-`/`bi-` prefixed names that
/// also fix the form.
pub fn parse_family(name: &str) -> CliResult<(Family, Option<FormKind>)> {
    let (base, form) = match name.strip_prefix("tri-") {
        Some(rest) => (rest, Some(FormKind::Joint)),
        None => match name.strip_prefix("bi-") {
            Some(rest) => (rest, Some(FormKind::Marginal)),
            None => (name, None),
        },
    };
    let family = Family::ALL
        .iter()
        .copied()
        .find(|f| f.name() == base)
        .filter(|f| form.is_none() || matches!(f, Family::P7P2 | Family::B2B1));
    family.map(|f| (f, form)).ok_or_else(|| {
        let names: Vec<&str> = Family::ALL.iter().map(|f| f.name()).collect();
        CliError::invalid(format!(
            "unknown family {name:?}; expected one of {}, tri-p7-p2, bi-p7-p2, tri-b2-b1, bi-b2-b1",
            names.join(", ")
        ))
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StructureArgs {
    /// Row counts `n_0,n_1,...,n_k`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub rows: Vec<usize>,
    /// Column count `m`.
    #[arg(long)]
    pub cols: usize,
}

impl StructureArgs {
    pub fn build(&self) -> CliResult<BlockStructure> {
        BlockStructure::new(self.rows.clone(), self.cols).map_err(|e| CliError::invalid(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelName {
    Normal,
    Pearson7,
    StudentT,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    #[arg(long, value_enum, default_value_t = KernelName::Normal)]
    pub kernel: KernelName,
    /// Pearson VII shape.
    #[arg(long)]
    pub q: Option<f64>,
    /// Pearson VII scale.
    #[arg(long)]
    pub r: Option<f64>,
    /// Student t degrees of freedom.
    #[arg(long)]
    pub nu: Option<f64>,
}

impl KernelArgs {
    pub fn build(&self, dim: usize) -> CliResult<KernelSpec> {
        let invalid = |e: multimatrix::Error| CliError::invalid(e.to_string());
        match (self.kernel, self.q, self.r, self.nu) {
            (KernelName::Normal, None, None, None) => Ok(KernelSpec::normal(dim)),
            (KernelName::Pearson7, Some(q), Some(r), None) => {
                KernelSpec::new(KernelFamily::PearsonVII { q, r }, dim).map_err(invalid)
            }
            (KernelName::StudentT, None, None, Some(nu)) => KernelSpec::student_t(dim, nu).map_err(invalid),
            (KernelName::Normal, ..) => Err(CliError::invalid("the normal kernel takes no --q, --r or --nu")),
            (KernelName::Pearson7, ..) => Err(CliError::invalid("--kernel pearson7 needs --q and --r (and no --nu)")),
            (KernelName::StudentT, ..) => Err(CliError::invalid("--kernel student-t needs --nu (and no --q or --r)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_names() {
        assert_eq!(parse_family("tri-p7-p2").unwrap(), (Family::P7P2, Some(FormKind::Joint)));
        assert_eq!(parse_family("bi-b2-b1").unwrap(), (Family::B2B1, Some(FormKind::Marginal)));
        assert_eq!(parse_family("inv-b2-b1").unwrap(), (Family::InvB2B1, None));
        assert_eq!(parse_family("gamma-wishart").unwrap(), (Family::GammaWishart, None));
        assert!(parse_family("tri-beta2").is_err());
        assert!(parse_family("mb2").is_err());
    }

    #[test]
    fn kernel_flags() {
        let args = |kernel, q, r, nu| KernelArgs { kernel, q, r, nu };
        assert!(args(KernelName::Pearson7, Some(3.0), None, None).build(2).is_err());
        assert!(args(KernelName::Normal, Some(3.0), None, None).build(2).is_err());
        assert!(args(KernelName::Pearson7, Some(3.0), Some(1.0), None).build(2).is_ok());
        assert!(args(KernelName::StudentT, None, None, Some(4.0)).build(2).is_ok());
    }
}
