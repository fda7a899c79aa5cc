use serde::{Deserialize, Serialize};
use std::fmt;

use super::{
    log_beta1_joint, log_beta1_marginal, log_beta2_joint, log_beta2_marginal, log_bi_b2_b1, log_bi_p7_p2,
    log_gamma_elliptical, log_gamma_wishart, log_gg, log_inv_b2_b1_joint, log_inv_b2_b1_marginal, log_located_p7,
    log_pearson2_joint, log_pearson2_marginal, log_pearson7_joint, log_pearson7_marginal, log_tri_b2_b1, log_tri_p7_p2,
    log_wishart, LocationScale, ShapeParams,
};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::matcore::{BlockStructure, RealMatrix, SpdMatrix};
use crate::transforms::{Anchor, BlockRole, DerivedBlock, DerivedSample, Roles};

/// A family of derived statistics, identified by the layout of its sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// `(V_0, ..., V_k)` squared norms.
    Gg,
    /// `(V, X_1, ..., X_k)`.
    GammaElliptical,
    /// `(V, T_1, ..., T_k)`.
    Pearson7,
    /// `(V, R_1, ..., R_k)`.
    Pearson2,
    /// `(V, F_1, ..., F_k)`.
    Beta2,
    /// `(V, B_1, ..., B_k)`.
    Beta1,
    /// `(W_0, W_1, ..., W_k)`.
    Wishart,
    /// `(V, W_1, ..., W_k)`.
    GammaWishart,
    /// `(V_0, T, R)`.
    P7P2,
    /// `(V_0, F, B)`.
    B2B1,
    /// `(1/V_0, F^{-1}, B^{-1})`.
    InvB2B1,
    /// Location-scale Pearson VII over `S_i`.
    LocatedP7,
}

/// Whether the scalar `v` takes part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    Marginal,
    Joint,
}

/// Parameters selecting one density within a family.
#[derive(Debug, Clone, PartialEq)]
pub enum Form {
    Marginal(ShapeParams),
    Joint(KernelSpec),
    Located { params: ShapeParams, scales: Vec<LocationScale> },
}

impl Form {
    pub fn kind(&self) -> FormKind {
        match self {
            Self::Joint(_) => FormKind::Joint,
            Self::Marginal(_) | Self::Located { .. } => FormKind::Marginal,
        }
    }
}

impl Family {
    pub const ALL: [Family; 12] = [
        Family::Gg,
        Family::GammaElliptical,
        Family::Pearson7,
        Family::Pearson2,
        Family::Beta2,
        Family::Beta1,
        Family::Wishart,
        Family::GammaWishart,
        Family::P7P2,
        Family::B2B1,
        Family::InvB2B1,
        Family::LocatedP7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gg => "gg",
            Self::GammaElliptical => "gamma-elliptical",
            Self::Pearson7 => "pearson7",
            Self::Pearson2 => "pearson2",
            Self::Beta2 => "beta2",
            Self::Beta1 => "beta1",
            Self::Wishart => "wishart",
            Self::GammaWishart => "gamma-wishart",
            Self::P7P2 => "p7-p2",
            Self::B2B1 => "b2-b1",
            Self::InvB2B1 => "inv-b2-b1",
            Self::LocatedP7 => "located-p7",
        }
    }

    /// Whether this family has a density of the given kind.
    pub fn supports(self, kind: FormKind) -> bool {
        match kind {
            FormKind::Joint => self != Self::LocatedP7,
            FormKind::Marginal => matches!(
                self,
                Self::Pearson7
                    | Self::Pearson2
                    | Self::Beta2
                    | Self::Beta1
                    | Self::P7P2
                    | Self::B2B1
                    | Self::InvB2B1
                    | Self::LocatedP7
            ),
        }
    }

    /// Number of non-anchor blocks, when fixed by the layout.
    pub fn fixed_k(self) -> Option<usize> {
        matches!(self, Self::P7P2 | Self::B2B1 | Self::InvB2B1).then_some(2)
    }

    /// The roles that produce this family's sample from a draw with `k`
    /// non-anchor blocks.
    pub fn roles(self, k: usize) -> Result<Roles> {
        use BlockRole::*;
        let uniform = |anchor, role| Roles::uniform(anchor, role, k);
        if let Some(fixed) = self.fixed_k() {
            if k != fixed {
                return Err(Error::InvalidRoles(format!("{} needs k = {fixed}, got k = {k}", self.name())));
            }
        }
        match self {
            Self::Gg => uniform(Anchor::SqNorm, V),
            Self::GammaElliptical => uniform(Anchor::SqNorm, X),
            Self::Pearson7 | Self::LocatedP7 => uniform(Anchor::SqNorm, T),
            Self::Pearson2 => uniform(Anchor::SqNorm, R),
            Self::Beta2 => uniform(Anchor::SqNorm, F),
            Self::Beta1 => uniform(Anchor::SqNorm, B),
            Self::Wishart => uniform(Anchor::Gram, W),
            Self::GammaWishart => uniform(Anchor::SqNorm, W),
            Self::P7P2 => Roles::new(Anchor::Combined, vec![T, R]),
            Self::B2B1 => Roles::new(Anchor::Combined, vec![F, B]),
            Self::InvB2B1 => Roles::new(Anchor::InverseCombined, vec![A, U]),
        }
    }

    /// Log density of one derived sample.
    pub fn log_density(self, sample: &DerivedSample, structure: &BlockStructure, form: &Form) -> Result<f64> {
        let expected = self.roles(structure.k())?;
        if sample.roles() != expected {
            return Err(Error::InvalidRoles(format!(
                "{} expects {:?} with roles {:?}, sample has {:?} with {:?}",
                self.name(),
                expected.anchor,
                expected.blocks,
                sample.anchor,
                sample.roles().blocks
            )));
        }
        if !self.supports(form.kind()) || (self == Self::LocatedP7) != matches!(form, Form::Located { .. }) {
            return Err(Error::Domain(format!("{} has no {:?} form of this type", self.name(), form.kind())));
        }
        let v = sample.v;
        let blocks = &sample.blocks;
        match (self, form) {
            (Self::Gg, Form::Joint(kernel)) => {
                let mut vs = vec![v];
                vs.extend(blocks.iter().filter_map(DerivedBlock::scalar));
                log_gg(&vs, structure, kernel)
            }
            (Self::GammaElliptical, Form::Joint(kernel)) => log_gamma_elliptical(v, &rect(blocks), structure, kernel),
            (Self::Pearson7, Form::Joint(kernel)) => log_pearson7_joint(v, &rect(blocks), structure, kernel),
            (Self::Pearson7, Form::Marginal(p)) => log_pearson7_marginal(&rect(blocks), structure, p),
            (Self::Pearson2, Form::Joint(kernel)) => log_pearson2_joint(v, &rect(blocks), structure, kernel),
            (Self::Pearson2, Form::Marginal(p)) => log_pearson2_marginal(&rect(blocks), structure, p),
            (Self::Beta2, Form::Joint(kernel)) => log_beta2_joint(v, &spd(blocks), structure, kernel),
            (Self::Beta2, Form::Marginal(p)) => log_beta2_marginal(&spd(blocks), structure, p),
            (Self::Beta1, Form::Joint(kernel)) => log_beta1_joint(v, &spd(blocks), structure, kernel),
            (Self::Beta1, Form::Marginal(p)) => log_beta1_marginal(&spd(blocks), structure, p),
            (Self::Wishart, Form::Joint(kernel)) => {
                let gram0 = sample
                    .gram0
                    .clone()
                    .ok_or_else(|| Error::InvalidRoles("Gram anchor sample is missing W_0".into()))?;
                let mut w = vec![gram0];
                w.extend(spd(blocks));
                log_wishart(&w, structure, kernel)
            }
            (Self::GammaWishart, Form::Joint(kernel)) => log_gamma_wishart(v, &spd(blocks), structure, kernel),
            (Self::P7P2, Form::Joint(kernel)) => {
                let r = rect(blocks);
                log_tri_p7_p2(v, &r[0], &r[1], structure, kernel)
            }
            (Self::P7P2, Form::Marginal(p)) => {
                let r = rect(blocks);
                log_bi_p7_p2(&r[0], &r[1], structure, p)
            }
            (Self::B2B1, Form::Joint(kernel)) => {
                let s = spd(blocks);
                log_tri_b2_b1(v, &s[0], &s[1], structure, kernel)
            }
            (Self::B2B1, Form::Marginal(p)) => {
                let s = spd(blocks);
                log_bi_b2_b1(&s[0], &s[1], structure, p)
            }
            (Self::InvB2B1, Form::Joint(kernel)) => {
                let s = spd(blocks);
                log_inv_b2_b1_joint(v, &s[0], &s[1], structure, kernel)
            }
            (Self::InvB2B1, Form::Marginal(p)) => {
                let s = spd(blocks);
                log_inv_b2_b1_marginal(&s[0], &s[1], structure, p)
            }
            (Self::LocatedP7, Form::Located { params, scales }) => {
                log_located_p7(&rect(blocks), structure, params, scales)
            }
            _ => unreachable!("form support is checked above"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn rect(blocks: &[DerivedBlock]) -> Vec<RealMatrix> {
    blocks.iter().filter_map(DerivedBlock::matrix).cloned().collect()
}

fn spd(blocks: &[DerivedBlock]) -> Vec<SpdMatrix> {
    blocks.iter().filter_map(DerivedBlock::spd).cloned().collect()
}
