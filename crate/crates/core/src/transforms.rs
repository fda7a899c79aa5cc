//! Change-of-variable maps between the unit Frobenius ball and the whole
//! space, and the statistics derived from one spherical draw
//! `X = (X_0', X_1', ..., X_k')'`.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{domain, Error, Result};
use crate::matcore::{BlockStructure, RealMatrix, SpdMatrix};

/// `X = (1 + tr Y'Y)^{-1/2} Y`, mapping all of `R^{n x m}` into the open
/// unit ball. Returns `X` and `ln |dX/dY| = -(nm/2 + 1) ln(1 + tr Y'Y)`.
pub fn compress(y: &RealMatrix) -> (RealMatrix, f64) {
    let s = y.frobenius_sq();
    let nm = (y.rows() * y.cols()) as f64;
    let x = y.scaled((1.0 + s).sqrt().recip());
    (x, -(nm / 2.0 + 1.0) * s.ln_1p())
}

/// Inverse of [`compress`]: `Y = (1 - tr X'X)^{-1/2} X` for `||X||² < 1`.
/// Returns `Y` and `ln |dY/dX| = -(nm/2 + 1) ln(1 - tr X'X)`.
pub fn expand(x: &RealMatrix) -> Result<(RealMatrix, f64)> {
    let s = x.frobenius_sq();
    if !(s < 1.0) {
        return domain(format!("expand requires ||X||² < 1, got {s}"));
    }
    let nm = (x.rows() * x.cols()) as f64;
    let y = x.scaled((1.0 - s).sqrt().recip());
    Ok((y, -(nm / 2.0 + 1.0) * (-s).ln_1p()))
}

/// What a block `X_i`, `i >= 1`, is turned into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockRole {
    /// `X_i` itself.
    X,
    /// `V_i = ||X_i||²`.
    V,
    /// `T_i = V^{-1/2} X_i`.
    T,
    /// `R_i = (V + ||X_i||²)^{-1/2} X_i`.
    R,
    /// `F_i = T_i' T_i`.
    F,
    /// `B_i = R_i' R_i`.
    B,
    /// `W_i = X_i' X_i`.
    W,
    /// `A = F^{-1}`.
    A,
    /// `U = B^{-1}`.
    U,
}

impl fmt::Display for BlockRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// What the anchor block `X_0` is turned into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// `V = ||X_0||²`.
    SqNorm,
    /// `V_0 = V + ||X_2||²` for the three-block (T|F, R|B) layout.
    Combined,
    /// `W_0 = X_0' X_0`, with `v = tr W_0`.
    Gram,
    /// `w = 1 / V_0` for the three-block (A, U) layout.
    InverseCombined,
}

/// Anchor treatment plus one role per non-anchor block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Roles {
    pub anchor: Anchor,
    pub blocks: Vec<BlockRole>,
}

impl Roles {
    pub fn new(anchor: Anchor, blocks: Vec<BlockRole>) -> Result<Self> {
        use BlockRole::*;
        let invalid = |msg: String| Err(Error::InvalidRoles(msg));
        match anchor {
            Anchor::Combined => {
                if !(blocks.len() == 2 && matches!(blocks[0], T | F) && matches!(blocks[1], R | B)) {
                    return invalid(format!("combined anchor needs roles (T|F, R|B), got {blocks:?}"));
                }
            }
            Anchor::InverseCombined => {
                if blocks != [A, U] {
                    return invalid(format!("inverse anchor needs roles (A, U), got {blocks:?}"));
                }
            }
            Anchor::SqNorm | Anchor::Gram => {
                if let Some(r) = blocks.iter().find(|r| matches!(r, A | U)) {
                    return invalid(format!("role {r} is only available with the inverse anchor"));
                }
            }
        }
        Ok(Self { anchor, blocks })
    }

    pub fn uniform(anchor: Anchor, role: BlockRole, k: usize) -> Result<Self> {
        Self::new(anchor, vec![role; k])
    }
}

/// One transformed block.
#[derive(Debug, Clone, PartialEq)]
pub enum DerivedBlock {
    X(RealMatrix),
    V(f64),
    T(RealMatrix),
    R(RealMatrix),
    F(SpdMatrix),
    B(SpdMatrix),
    W(SpdMatrix),
    A(SpdMatrix),
    U(SpdMatrix),
}

impl DerivedBlock {
    pub fn role(&self) -> BlockRole {
        match self {
            Self::X(_) => BlockRole::X,
            Self::V(_) => BlockRole::V,
            Self::T(_) => BlockRole::T,
            Self::R(_) => BlockRole::R,
            Self::F(_) => BlockRole::F,
            Self::B(_) => BlockRole::B,
            Self::W(_) => BlockRole::W,
            Self::A(_) => BlockRole::A,
            Self::U(_) => BlockRole::U,
        }
    }

    /// Rectangular payload of the X, T and R roles.
    pub fn matrix(&self) -> Option<&RealMatrix> {
        match self {
            Self::X(m) | Self::T(m) | Self::R(m) => Some(m),
            _ => None,
        }
    }

    /// SPD payload of the Gram-type roles.
    pub fn spd(&self) -> Option<&SpdMatrix> {
        match self {
            Self::F(w) | Self::B(w) | Self::W(w) | Self::A(w) | Self::U(w) => Some(w),
            _ => None,
        }
    }

    pub fn scalar(&self) -> Option<f64> {
        match self {
            Self::V(v) => Some(*v),
            _ => None,
        }
    }
}

/// The statistics computed from one draw.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedSample {
    pub anchor: Anchor,
    /// `V`, `V_0`, `tr W_0` or `1 / V_0` depending on the anchor.
    pub v: f64,
    /// `W_0`, present for the Gram anchor only.
    pub gram0: Option<SpdMatrix>,
    pub blocks: Vec<DerivedBlock>,
}

impl DerivedSample {
    pub fn roles(&self) -> Roles {
        Roles { anchor: self.anchor, blocks: self.blocks.iter().map(DerivedBlock::role).collect() }
    }
}

/// Computes the derived statistics of one draw `(X_0, ..., X_k)`.
pub fn derive(blocks: &[RealMatrix], structure: &BlockStructure, roles: &Roles) -> Result<DerivedSample> {
    if blocks.len() != structure.k() + 1 {
        return Err(Error::Shape(format!("expected {} blocks, got {}", structure.k() + 1, blocks.len())));
    }
    if roles.blocks.len() != structure.k() {
        return Err(Error::InvalidRoles(format!("expected {} roles, got {}", structure.k(), roles.blocks.len())));
    }
    for (i, x) in blocks.iter().enumerate() {
        structure.check_block(i, x)?;
    }
    let v = blocks[0].frobenius_sq();
    if !(v > 0.0) {
        return Err(Error::DegenerateBlock("anchor block X_0 is zero".into()));
    }
    let gram = |i: usize, w: RealMatrix| {
        w.gram().map_err(|_| Error::DegenerateBlock(format!("Gram matrix of block {i} is singular")))
    };
    let spd = |i: usize, w: Result<SpdMatrix>| {
        w.map_err(|_| Error::DegenerateBlock(format!("block {i} is not positive definite")))
    };

    let mut derived = Vec::with_capacity(roles.blocks.len());
    for (idx, (role, x)) in roles.blocks.iter().zip(&blocks[1..]).enumerate() {
        let i = idx + 1;
        let t = || x.scaled(v.sqrt().recip());
        let r = || x.scaled((v + x.frobenius_sq()).sqrt().recip());
        let block = match role {
            BlockRole::X => DerivedBlock::X(x.clone()),
            BlockRole::V => DerivedBlock::V(x.frobenius_sq()),
            BlockRole::T => DerivedBlock::T(t()),
            BlockRole::R => DerivedBlock::R(r()),
            BlockRole::F => DerivedBlock::F(gram(i, t())?),
            BlockRole::B => DerivedBlock::B(gram(i, r())?),
            BlockRole::W => DerivedBlock::W(gram(i, x.clone())?),
            BlockRole::A => DerivedBlock::A(spd(i, gram(i, t())?.inverse())?),
            BlockRole::U => DerivedBlock::U(spd(i, gram(i, r())?.inverse())?),
        };
        derived.push(block);
    }

    let (scalar, gram0) = match roles.anchor {
        Anchor::SqNorm => (v, None),
        Anchor::Gram => (v, Some(gram(0, blocks[0].clone())?)),
        Anchor::Combined => (v + blocks[2].frobenius_sq(), None),
        Anchor::InverseCombined => ((v + blocks[2].frobenius_sq()).recip(), None),
    };
    Ok(DerivedSample { anchor: roles.anchor, v: scalar, gram0, blocks: derived })
}
