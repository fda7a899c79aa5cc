//! The JSON dataset format: one entry per replicate, each a list of the `k`
//! non-anchor blocks as nested row arrays.

use std::path::Path;

use multimatrix::{Anchor, BlockRole, BlockStructure, DerivedBlock, DerivedSample, RealMatrix, Roles, SpdMatrix};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    /// `n_0, n_1, ..., n_k`.
    pub block_rows: Vec<usize>,
    pub cols: usize,
}

impl StructureSpec {
    pub fn build(&self) -> CliResult<BlockStructure> {
        BlockStructure::new(self.block_rows.clone(), self.cols).map_err(|e| CliError::invalid(e.to_string()))
    }
}

impl From<&BlockStructure> for StructureSpec {
    fn from(s: &BlockStructure) -> Self {
        Self { block_rows: s.block_rows().to_vec(), cols: s.cols() }
    }
}

/// The anchor statistic of one replicate: `W_0` for the Gram anchor, a
/// scalar otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AnchorValue {
    Scalar(f64),
    Matrix(Rows),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetFile {
    pub structure: StructureSpec,
    #[serde(default = "default_anchor")]
    pub anchor: Anchor,
    pub roles: Vec<BlockRole>,
    /// Needed only by joint densities.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchors: Option<Vec<AnchorValue>>,
    pub replicates: Vec<Vec<Rows>>,
    #[serde(default = "empty_object")]
    pub meta: Value,
}

fn default_anchor() -> Anchor {
    Anchor::SqNorm
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))
}

fn real(rows: &Rows) -> CliResult<RealMatrix> {
    RealMatrix::from_rows(rows).map_err(|e| match e {
        multimatrix::Error::Shape(_) => CliError::invalid(e.to_string()),
        other => other.into(),
    })
}

fn spd(rows: &Rows) -> CliResult<SpdMatrix> {
    Ok(SpdMatrix::new(real(rows)?)?)
}

fn check_shape(structure: &BlockStructure, block: usize, rows: usize, cols: usize, square: bool) -> CliResult<()> {
    let (n, m) = (structure.rows(block), structure.cols());
    let (want_rows, want_cols) = if square { (m, m) } else { (n, m) };
    if (rows, cols) != (want_rows, want_cols) {
        return Err(CliError::invalid(format!("block {block} is {rows}x{cols}, expected {want_rows}x{want_cols}")));
    }
    Ok(())
}

fn block(structure: &BlockStructure, index: usize, role: BlockRole, rows: &Rows) -> CliResult<DerivedBlock> {
    let square = !matches!(role, BlockRole::X | BlockRole::T | BlockRole::R | BlockRole::V);
    if role == BlockRole::V {
        let x = real(rows)?;
        if (x.rows(), x.cols()) != (1, 1) {
            return Err(CliError::invalid(format!("block {index} holds V and must be [[v]]")));
        }
        return Ok(DerivedBlock::V(x.get(0, 0)));
    }
    let x = real(rows)?;
    check_shape(structure, index, x.rows(), x.cols(), square)?;
    Ok(match role {
        BlockRole::X => DerivedBlock::X(x),
        BlockRole::T => DerivedBlock::T(x),
        BlockRole::R => DerivedBlock::R(x),
        BlockRole::F => DerivedBlock::F(spd(rows)?),
        BlockRole::B => DerivedBlock::B(spd(rows)?),
        BlockRole::W => DerivedBlock::W(spd(rows)?),
        BlockRole::A => DerivedBlock::A(spd(rows)?),
        BlockRole::U => DerivedBlock::U(spd(rows)?),
        BlockRole::V => unreachable!("handled above"),
    })
}

impl DatasetFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        read_json(path)
    }

    pub fn structure(&self) -> CliResult<BlockStructure> {
        self.structure.build()
    }

    pub fn roles(&self) -> CliResult<Roles> {
        Roles::new(self.anchor, self.roles.clone()).map_err(|e| CliError::invalid(e.to_string()))
    }

    /// Every replicate as a derived sample. Without stored anchors the
    /// scalar is set to one, which marginal densities ignore.
    pub fn samples(&self, structure: &BlockStructure) -> CliResult<Vec<DerivedSample>> {
        if self.roles.len() != structure.k() {
            return Err(CliError::invalid(format!(
                "{} roles given for k = {} blocks",
                self.roles.len(),
                structure.k()
            )));
        }
        if let Some(anchors) = &self.anchors {
            if anchors.len() != self.replicates.len() {
                return Err(CliError::invalid(format!(
                    "{} anchors for {} replicates",
                    anchors.len(),
                    self.replicates.len()
                )));
            }
        }
        self.replicates
            .iter()
            .enumerate()
            .map(|(r, rep)| self.sample(structure, r, rep).map_err(|e| e.at_replicate(r)))
            .collect()
    }

    fn sample(&self, structure: &BlockStructure, r: usize, rep: &[Rows]) -> CliResult<DerivedSample> {
        if rep.len() != structure.k() {
            return Err(CliError::invalid(format!(
                "replicate {r} has {} blocks, expected {}",
                rep.len(),
                structure.k()
            )));
        }
        let blocks = self
            .roles
            .iter()
            .zip(rep)
            .enumerate()
            .map(|(i, (&role, rows))| block(structure, i + 1, role, rows))
            .collect::<CliResult<Vec<_>>>()?;
        let (v, gram0) = match (self.anchors.as_ref().map(|a| &a[r]), self.anchor) {
            (None, _) => (1.0, None),
            (Some(AnchorValue::Matrix(rows)), Anchor::Gram) => {
                let x = real(rows)?;
                check_shape(structure, 0, x.rows(), x.cols(), true)?;
                let w = spd(rows)?;
                (w.trace(), Some(w))
            }
            (Some(AnchorValue::Scalar(_)), Anchor::Gram) => {
                return Err(CliError::invalid("the Gram anchor is stored as the matrix W_0"))
            }
            (Some(AnchorValue::Matrix(_)), _) => return Err(CliError::invalid("this anchor is stored as a scalar")),
            (Some(AnchorValue::Scalar(v)), _) => (*v, None),
        };
        Ok(DerivedSample { anchor: self.anchor, v, gram0, blocks })
    }

    /// The replicates as SPD matrices, for data laid out as `F` blocks.
    pub fn f_replicates(&self, structure: &BlockStructure) -> CliResult<Vec<Vec<SpdMatrix>>> {
        if self.anchor != Anchor::SqNorm || self.roles.iter().any(|&r| r != BlockRole::F) {
            return Err(CliError::invalid("fitting needs a dataset of F blocks with the sq_norm anchor"));
        }
        let samples = self.samples(structure)?;
        Ok(samples
            .into_iter()
            .map(|s| s.blocks.iter().map(|b| b.spd().expect("F blocks are SPD").clone()).collect())
            .collect())
    }

    pub fn from_draws(structure: &BlockStructure, roles: &Roles, draws: &[DerivedSample], meta: Value) -> Self {
        let anchors = draws
            .iter()
            .map(|d| match &d.gram0 {
                Some(w) => AnchorValue::Matrix(w.to_rows()),
                None => AnchorValue::Scalar(d.v),
            })
            .collect();
        let replicates = draws.iter().map(|d| d.blocks.iter().map(block_rows).collect()).collect();
        Self {
            structure: StructureSpec::from(structure),
            anchor: roles.anchor,
            roles: roles.blocks.clone(),
            anchors: Some(anchors),
            replicates,
            meta,
        }
    }
}

fn block_rows(b: &DerivedBlock) -> Rows {
    match b {
        DerivedBlock::V(v) => vec![vec![*v]],
        other => other
            .matrix()
            .map(RealMatrix::to_rows)
            .or_else(|| other.spd().map(SpdMatrix::to_rows))
            .expect("every non-scalar block is a matrix"),
    }
}
