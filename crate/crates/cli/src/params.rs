//! The parameter file of `logpdf`.

use multimatrix::{
    BlockStructure, Family, Form, FormKind, KernelFamily, KernelSpec, LocationScale, RealMatrix, ShapeParams, SpdMatrix,
};
use serde::{Deserialize, Serialize};

use crate::dataset::Rows;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Shape {
    Common(f64),
    PerBlock(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationScaleSpec {
    pub mu: Rows,
    pub sigma: Rows,
    pub theta: Rows,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(default)]
    pub form: Option<FormKind>,
    #[serde(default)]
    pub a0: Option<f64>,
    #[serde(default)]
    pub a: Option<Shape>,
    #[serde(default)]
    pub kernel: Option<KernelFamily>,
    #[serde(default)]
    pub location_scale: Option<Vec<LocationScaleSpec>>,
}

fn shape_params(p: &ParamsFile, structure: &BlockStructure) -> CliResult<ShapeParams> {
    let integer = ShapeParams::from_structure(structure);
    let a0 = p.a0.unwrap_or(integer.a0());
    let a = match &p.a {
        None => integer.a().to_vec(),
        Some(Shape::Common(a)) => vec![*a; structure.k()],
        Some(Shape::PerBlock(a)) if a.len() == structure.k() => a.clone(),
        Some(Shape::PerBlock(a)) => {
            return Err(CliError::invalid(format!("{} shapes given for k = {}", a.len(), structure.k())))
        }
    };
    ShapeParams::new(a0, a, structure.cols()).map_err(|e| CliError::invalid(e.to_string()))
}

fn location_scale(spec: &LocationScaleSpec) -> CliResult<LocationScale> {
    let invalid = |e: multimatrix::Error| CliError::invalid(format!("location_scale: {e}"));
    let mu = RealMatrix::from_rows(&spec.mu).map_err(invalid)?;
    let sigma = SpdMatrix::from_rows(&spec.sigma).map_err(invalid)?;
    let theta = SpdMatrix::from_rows(&spec.theta).map_err(invalid)?;
    LocationScale::new(mu, sigma, theta, spec.r).map_err(invalid)
}

impl ParamsFile {
    /// Resolves the density to evaluate. `implied` is the form fixed by the
    /// family name (`tri-*` joint, `bi-*` marginal).
    pub fn form(&self, family: Family, implied: Option<FormKind>, structure: &BlockStructure) -> CliResult<Form> {
        if let (Some(a), Some(b)) = (implied, self.form) {
            if a != b {
                return Err(CliError::invalid(format!("family name fixes the {a:?} form but params ask for {b:?}")));
            }
        }
        let shapes_given = self.a0.is_some() || self.a.is_some();
        let kind = implied.or(self.form).unwrap_or(
            if !family.supports(FormKind::Marginal) || (self.kernel.is_some() && !shapes_given) {
                FormKind::Joint
            } else {
                FormKind::Marginal
            },
        );
        if !family.supports(kind) {
            return Err(CliError::invalid(format!("{family} has no {kind:?} form")));
        }
        match kind {
            FormKind::Joint => {
                if shapes_given || self.location_scale.is_some() {
                    return Err(CliError::invalid("joint forms take a kernel, not shapes or location_scale"));
                }
                let family = self.kernel.unwrap_or(KernelFamily::Normal);
                let kernel = KernelSpec::new(family, structure.dim()).map_err(|e| CliError::invalid(e.to_string()))?;
                Ok(Form::Joint(kernel))
            }
            FormKind::Marginal => {
                if self.kernel.is_some() {
                    return Err(CliError::invalid("marginal forms do not depend on the kernel"));
                }
                let params = shape_params(self, structure)?;
                if family != Family::LocatedP7 {
                    if self.location_scale.is_some() {
                        return Err(CliError::invalid("location_scale applies to located-p7 only"));
                    }
                    return Ok(Form::Marginal(params));
                }
                let scales = match &self.location_scale {
                    Some(specs) => specs.iter().map(location_scale).collect::<CliResult<Vec<_>>>()?,
                    None => (1..=structure.k())
                        .map(|i| LocationScale::standard(structure.rows(i), structure.cols()))
                        .collect(),
                };
                Ok(Form::Located { params, scales })
            }
        }
    }
}
