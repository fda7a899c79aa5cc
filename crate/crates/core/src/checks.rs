//! Numerical self-checks of the densities: normalization by quadrature,
//! integrating the joint forms over the scalar, closed-form special cases and
//! Monte Carlo goodness of fit of the samplers.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::densities::{Family, Form, FormKind, LocationScale, ShapeParams};
use crate::diagnostics::{beta_log_pdf, beta_prime_log_pdf, ks_test, TabulatedCdf};
use crate::error::{domain, Error, Result};
use crate::kernels::{KernelFamily, KernelSpec};
use crate::matcore::{BlockStructure, RealMatrix, SpdMatrix};
use crate::quadrature::{Domain, Quadrature};
use crate::rng::RngStream;
use crate::sampling::sample_family;
use crate::special::{ln_gamma_unchecked, ln_multigamma_unchecked};
use crate::transforms::{Anchor, BlockRole, DerivedBlock, DerivedSample};

pub const NORMALIZATION_TOLERANCE: f64 = 1e-3;
pub const CONSISTENCY_TOLERANCE: f64 = 1e-5;
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-12;
/// The independent-block products sum many terms of larger magnitude.
pub const PRODUCT_FORM_TOLERANCE: f64 = 1e-10;
/// Family-wise significance level of each Monte Carlo suite.
pub const KS_LEVEL: f64 = 0.01;

/// One named check. `value` is compared against `tolerance` as documented by
/// the function that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), pass: value <= tolerance, value, tolerance }
    }

    fn above(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), pass: value > tolerance, value, tolerance }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckLevel {
    /// Deterministic checks: quadrature and closed forms.
    Fast,
    /// Adds Monte Carlo goodness-of-fit tests of the sampler.
    Full,
}

/// Whether the normalization quadrature is available: `m = 1`, `k <= 2` and
/// at most two rows in every non-anchor block.
pub fn quadrature_tractable(structure: &BlockStructure) -> bool {
    structure.cols() == 1 && structure.k() <= 2 && structure.block_rows()[1..].iter().all(|&n| n <= 2)
}

/// A fixed non-standard location and scale for every block, used when
/// checking the located form.
pub fn reference_scales(structure: &BlockStructure) -> Vec<LocationScale> {
    let m = structure.cols();
    structure.block_rows()[1..]
        .iter()
        .map(|&n| {
            let mu = RealMatrix::from_row_major(n, m, &vec![0.5; n * m]).expect("shape is consistent");
            let sigma = SpdMatrix::diagonal(&vec![2.0; n]).expect("positive diagonal");
            let theta = SpdMatrix::diagonal(&vec![0.75; m]).expect("positive diagonal");
            LocationScale::new(mu, sigma, theta, 1.5).expect("scales are valid")
        })
        .collect()
}

/// The marginal form checked for `family`: integer shapes from the
/// structure, with [`reference_scales`] for the located form.
pub fn reference_marginal(family: Family, structure: &BlockStructure) -> Form {
    let params = ShapeParams::from_structure(structure);
    if family == Family::LocatedP7 {
        Form::Located { params, scales: reference_scales(structure) }
    } else {
        Form::Marginal(params)
    }
}

/// How one coordinate group of the integration maps onto a sample slot.
#[derive(Debug, Clone, Copy)]
enum Slot {
    /// A scalar on `domain`: the anchor, a `V` block or an order one Gram block.
    Scalar(Domain),
    /// A rectangular block of dimension `d > 1` whose density depends on it
    /// only through its squared norm `s`, integrated over `s` with the
    /// sphere area factor. `centered` blocks are measured from their
    /// location `mu` instead of the origin.
    Radial { rows: usize, cols: usize, ball: bool, centered: bool },
    /// A rectangular block integrated entry by entry.
    Entries { rows: usize, cols: usize, ball: bool },
}

impl Slot {
    fn coordinates(self) -> usize {
        match self {
            Slot::Scalar(_) | Slot::Radial { .. } => 1,
            Slot::Entries { rows, cols, .. } => rows * cols,
        }
    }

    fn domain(self) -> Domain {
        match self {
            Slot::Scalar(d) => d,
            Slot::Radial { ball, .. } => {
                if ball {
                    Domain::Interval(0.0, 1.0)
                } else {
                    Domain::HalfLine(0.0)
                }
            }
            Slot::Entries { ball, .. } => {
                if ball {
                    Domain::Interval(-1.0, 1.0)
                } else {
                    Domain::RealLine
                }
            }
        }
    }
}

fn rect_slot(rows: usize, cols: usize, ball: bool, radial: bool, centered: bool) -> Slot {
    if radial && rows * cols > 1 {
        Slot::Radial { rows, cols, ball, centered }
    } else {
        Slot::Entries { rows, cols, ball }
    }
}

/// Whether the located density of every block depends on `S_i` only
/// through `||S_i - mu_i||²`, which holds when both scales are multiples of
/// the identity.
fn isotropic(scales: &[LocationScale]) -> bool {
    let scalar = |w: &SpdMatrix| {
        let n = w.order();
        (0..n).all(|i| (0..n).all(|j| w.get(i, j) == if i == j { w.get(0, 0) } else { 0.0 }))
    };
    scales.iter().all(|ls| scalar(&ls.sigma) && scalar(&ls.theta))
}

fn layout(
    family: Family,
    structure: &BlockStructure,
    kind: FormKind,
    scales: Option<&[LocationScale]>,
) -> Result<(Vec<BlockRole>, Vec<Slot>)> {
    let roles = family.roles(structure.k())?;
    let m = structure.cols();
    let mut slots = Vec::new();
    if kind == FormKind::Joint {
        if roles.anchor == Anchor::Gram && m != 1 {
            return domain("the Gram anchor is integrable here only for m = 1");
        }
        slots.push(Slot::Scalar(Domain::HalfLine(0.0)));
    }
    let centered = family == Family::LocatedP7;
    let radial = !centered || scales.is_some_and(isotropic);
    for (i, role) in roles.blocks.iter().enumerate() {
        let n = structure.rows(i + 1);
        let gram = |d: Domain| {
            if m == 1 {
                Ok(Slot::Scalar(d))
            } else {
                domain("Gram blocks are integrable here only for m = 1")
            }
        };
        slots.push(match role {
            BlockRole::V => Slot::Scalar(Domain::HalfLine(0.0)),
            BlockRole::X | BlockRole::T => rect_slot(n, m, false, radial, centered),
            BlockRole::R => rect_slot(n, m, true, radial, false),
            BlockRole::F | BlockRole::W | BlockRole::A => gram(Domain::HalfLine(0.0))?,
            BlockRole::B => gram(Domain::Interval(0.0, 1.0))?,
            BlockRole::U => gram(Domain::HalfLine(1.0))?,
        });
    }
    Ok((roles.blocks, slots))
}

/// Builds the sample at `coords` and the log volume factor of the radial
/// coordinates. `scales` supplies the centers of centered radial slots.
fn build(
    anchor: Anchor,
    roles: &[BlockRole],
    slots: &[Slot],
    joint: bool,
    scales: Option<&[LocationScale]>,
    coords: &[f64],
) -> Result<(DerivedSample, f64)> {
    let mut c = coords.iter().copied();
    let mut next = || c.next().expect("one coordinate per slot entry");
    let mut log_weight = 0.0;
    let mut slots = slots.iter();
    let (v, gram0) = if joint {
        slots.next();
        let v = next();
        let gram0 = (anchor == Anchor::Gram).then(|| SpdMatrix::diagonal(&[v])).transpose()?;
        (v, gram0)
    } else {
        (1.0, None)
    };
    let mut blocks = Vec::with_capacity(roles.len());
    for (i, (role, slot)) in roles.iter().zip(slots).enumerate() {
        let block = match *slot {
            Slot::Scalar(_) => {
                let x = next();
                match role {
                    BlockRole::V => DerivedBlock::V(x),
                    _ => {
                        let w = SpdMatrix::diagonal(&[x])?;
                        match role {
                            BlockRole::F => DerivedBlock::F(w),
                            BlockRole::B => DerivedBlock::B(w),
                            BlockRole::W => DerivedBlock::W(w),
                            BlockRole::A => DerivedBlock::A(w),
                            BlockRole::U => DerivedBlock::U(w),
                            _ => unreachable!("scalar slots hold V or Gram blocks"),
                        }
                    }
                }
            }
            Slot::Radial { rows, cols, centered, .. } => {
                let s = next();
                let d = (rows * cols) as f64;
                log_weight += d / 2.0 * PI.ln() - ln_gamma_unchecked(d / 2.0) + (d / 2.0 - 1.0) * s.ln();
                let mut entries = match scales {
                    Some(scales) if centered => scales[i].mu.to_row_major(),
                    _ => vec![0.0; rows * cols],
                };
                entries[0] += s.sqrt();
                rect_block(*role, RealMatrix::from_row_major(rows, cols, &entries)?)
            }
            Slot::Entries { rows, cols, .. } => {
                let entries: Vec<f64> = (0..rows * cols).map(|_| next()).collect();
                rect_block(*role, RealMatrix::from_row_major(rows, cols, &entries)?)
            }
        };
        blocks.push(block);
    }
    Ok((DerivedSample { anchor, v, gram0, blocks }, log_weight))
}

fn rect_block(role: BlockRole, x: RealMatrix) -> DerivedBlock {
    match role {
        BlockRole::X => DerivedBlock::X(x),
        BlockRole::T => DerivedBlock::T(x),
        BlockRole::R => DerivedBlock::R(x),
        _ => unreachable!("rectangular slots hold X, T or R blocks"),
    }
}

/// `u -> (x, dx/du)`.
type Substitution = fn(f64) -> (f64, f64);

/// A change of variable `x = g(u)` that smooths the integrable power
/// singularities at the ends of a coordinate's domain.
fn smoothing(domain: Domain) -> (Domain, Substitution) {
    match domain {
        // x = u², dx = 2u du
        Domain::HalfLine(0.0) => (Domain::HalfLine(0.0), |u| (u * u, 2.0 * u)),
        // x = 1 + u²
        Domain::HalfLine(_) => (Domain::HalfLine(0.0), |u| (1.0 + u * u, 2.0 * u)),
        // x = sin²θ, dx = sin 2θ dθ
        Domain::Interval(0.0, 1.0) => {
            (Domain::Interval(0.0, std::f64::consts::FRAC_PI_2), |t| (t.sin().powi(2), (2.0 * t).sin()))
        }
        // x = sin θ
        Domain::Interval(_, _) => {
            (Domain::Interval(-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2), |t| (t.sin(), t.cos()))
        }
        Domain::RealLine => (Domain::RealLine, |u| (u, 1.0)),
    }
}

/// Total mass of the density selected by `form` over the support of
/// `family`, or `None` when it needs more than two integration coordinates.
///
/// Points where the density cannot be evaluated (rounding onto the boundary
/// of the support) contribute zero.
pub fn total_mass(family: Family, structure: &BlockStructure, form: &Form) -> Result<Option<f64>> {
    let joint = form.kind() == FormKind::Joint;
    let scales = match form {
        Form::Located { scales, .. } => Some(&scales[..]),
        _ => None,
    };
    let (roles, slots) = layout(family, structure, form.kind(), scales)?;
    let anchor = family.roles(structure.k())?.anchor;
    let maps: Vec<_> = slots.iter().flat_map(|s| (0..s.coordinates()).map(move |_| smoothing(s.domain()))).collect();
    let density = |u: &[f64]| -> f64 {
        let mut x = [0.0; 2];
        let mut jac = 1.0;
        for (i, (_, g)) in maps.iter().enumerate() {
            let (xi, gi) = g(u[i]);
            x[i] = xi;
            jac *= gi;
        }
        if jac == 0.0 {
            return 0.0;
        }
        build(anchor, &roles, &slots, joint, scales, &x[..u.len()])
            .and_then(|(sample, lw)| Ok(family.log_density(&sample, structure, form)? + lw))
            .map_or(0.0, |lp| lp.exp() * jac.abs())
    };
    let rule = Quadrature { rel_tol: 1e-9, abs_tol: 1e-13, max_intervals: 2000 };
    let estimate = match maps[..] {
        [(d, _)] => rule.estimate_on(|x| density(&[x]), d),
        [(outer, _), (inner, _)] => {
            let outer_rule = Quadrature { rel_tol: 1e-7, abs_tol: 1e-11, max_intervals: 400 };
            let inner_rule = Quadrature { rel_tol: 1e-8, abs_tol: 1e-12, max_intervals: 200 };
            outer_rule.estimate_2d(&inner_rule, |x, y| density(&[x, y]), outer, |_| inner)
        }
        _ => return Ok(None),
    };
    Ok(Some(estimate.value))
}

/// Normalization of every form of `family` that [`total_mass`] can
/// integrate. `value` is the total mass, passing within
/// [`NORMALIZATION_TOLERANCE`] of one.
pub fn normalization(family: Family, structure: &BlockStructure, kernel: &KernelSpec) -> Result<Vec<CheckOutcome>> {
    let mut forms = Vec::new();
    if family.supports(FormKind::Marginal) {
        forms.push(("normalization/marginal", reference_marginal(family, structure)));
    }
    if family.supports(FormKind::Joint) {
        forms.push(("normalization/joint", Form::Joint(kernel.clone())));
    }
    let mut out = Vec::new();
    for (name, form) in forms {
        if let Some(mass) = total_mass(family, structure, &form)? {
            let mut check = CheckOutcome::at_most(name, (mass - 1.0).abs(), NORMALIZATION_TOLERANCE);
            check.value = mass;
            out.push(check);
        }
    }
    Ok(out)
}

/// `ln ∫_0^∞ p(v, x) dv - ln p(x)` at one point `x` of a family with both a
/// joint and a marginal form.
pub fn joint_marginal_gap(
    family: Family,
    structure: &BlockStructure,
    kernel: &KernelSpec,
    point: &DerivedSample,
) -> Result<f64> {
    if !(family.supports(FormKind::Joint) && family.supports(FormKind::Marginal)) || family == Family::LocatedP7 {
        return domain(format!("{family} does not have both a joint and a marginal form"));
    }
    let marginal = family.log_density(point, structure, &reference_marginal(family, structure))?;
    let joint = Form::Joint(kernel.clone());
    let mut at = point.clone();
    let mut failure = None;
    let rule = Quadrature { rel_tol: 1e-11, abs_tol: 1e-15, max_intervals: 4000 };
    let estimate = rule.estimate_to_infinity(
        |v| {
            at.v = v;
            match family.log_density(&at, structure, &joint) {
                Ok(lp) => (lp - marginal).exp(),
                Err(Error::Domain(_)) if !(v > 0.0 && v.is_finite()) => 0.0,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        0.0,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(estimate.value.ln())
}

/// Largest `|joint_marginal_gap|` over `points` support points drawn with
/// `seed`, passing within [`CONSISTENCY_TOLERANCE`].
pub fn joint_marginal_consistency(
    family: Family,
    structure: &BlockStructure,
    kernel: &KernelSpec,
    points: usize,
    seed: u64,
) -> Result<CheckOutcome> {
    let draws = sample_family(family, structure, kernel, points, &mut RngStream::new(seed))?;
    let mut worst = 0.0_f64;
    for point in &draws.draws {
        let gap = joint_marginal_gap(family, structure, kernel, point)?.abs();
        worst = if gap.is_nan() { f64::NAN } else { worst.max(gap) };
    }
    Ok(CheckOutcome::at_most("joint_marginal", worst, CONSISTENCY_TOLERANCE))
}

fn grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    (0..points).map(move |i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
}

fn max_gap(pairs: impl Iterator<Item = Result<(f64, f64)>>) -> Result<f64> {
    let mut worst = 0.0_f64;
    for pair in pairs {
        let (a, b) = pair?;
        let gap = (a - b).abs();
        worst = if gap.is_nan() { f64::NAN } else { worst.max(gap) };
    }
    Ok(worst)
}

fn scalar_sample(role: BlockRole, x: f64) -> Result<DerivedSample> {
    let block = match role {
        BlockRole::T => DerivedBlock::T(RealMatrix::scalar(x)?),
        BlockRole::R => DerivedBlock::R(RealMatrix::scalar(x)?),
        BlockRole::F => DerivedBlock::F(SpdMatrix::diagonal(&[x])?),
        BlockRole::B => DerivedBlock::B(SpdMatrix::diagonal(&[x])?),
        _ => unreachable!("closed forms cover T, R, F and B blocks"),
    };
    Ok(DerivedSample { anchor: Anchor::SqNorm, v: 1.0, gram0: None, blocks: vec![block] })
}

fn ln_chi_square(x: f64, dof: f64) -> f64 {
    let h = dof / 2.0;
    (h - 1.0) * x.ln() - x / 2.0 - h * 2.0_f64.ln() - ln_gamma_unchecked(h)
}

/// Standard Wishart `W_m(n, I)`.
fn ln_wishart(w: &SpdMatrix, n: usize) -> f64 {
    let (n, m) = (n as f64, w.order());
    let mf = m as f64;
    (n - mf - 1.0) / 2.0 * w.log_det()
        - w.trace() / 2.0
        - n * mf / 2.0 * 2.0_f64.ln()
        - ln_multigamma_unchecked(m, n / 2.0)
}

/// Independent-block log density under the Normal kernel.
fn normal_product(family: Family, structure: &BlockStructure, sample: &DerivedSample) -> f64 {
    let m = structure.cols();
    let dof = |i: usize| (structure.rows(i) * m) as f64;
    let blocks = sample.blocks.iter().enumerate().map(|(j, b)| (j + 1, b));
    match family {
        Family::Gg => {
            ln_chi_square(sample.v, dof(0))
                + blocks.map(|(i, b)| ln_chi_square(b.scalar().expect("V block"), dof(i))).sum::<f64>()
        }
        Family::GammaElliptical => {
            ln_chi_square(sample.v, dof(0))
                + blocks
                    .map(|(i, b)| {
                        let x = b.matrix().expect("X block");
                        -dof(i) / 2.0 * (2.0 * PI).ln() - x.frobenius_sq() / 2.0
                    })
                    .sum::<f64>()
        }
        Family::Wishart => {
            ln_wishart(sample.gram0.as_ref().expect("Gram anchor"), structure.rows(0))
                + blocks.map(|(i, b)| ln_wishart(b.spd().expect("W block"), structure.rows(i))).sum::<f64>()
        }
        Family::GammaWishart => {
            ln_chi_square(sample.v, dof(0))
                + blocks.map(|(i, b)| ln_wishart(b.spd().expect("W block"), structure.rows(i))).sum::<f64>()
        }
        _ => unreachable!("normal products cover the joint-only families"),
    }
}

/// Largest deviation from a classical law where one applies:
/// scaled Student t (Cauchy for `n_0 = 1`), the symmetric beta law of `R`,
/// Beta and beta-prime for `k = 1, m = 1`, and products of independent
/// chi-square, Gaussian and Wishart laws for the joint-only families under
/// the Normal kernel. `None` when no closed form applies.
pub fn closed_form(
    family: Family,
    structure: &BlockStructure,
    kernel: &KernelSpec,
    seed: u64,
) -> Result<Option<CheckOutcome>> {
    let m = structure.cols();
    let scalar = structure.k() == 1 && m == 1;
    let n0 = structure.rows(0) as f64;
    let h0 = n0 / 2.0;
    let form = reference_marginal(family, structure);
    let eval = |role, x: f64| -> Result<f64> { family.log_density(&scalar_sample(role, x)?, structure, &form) };
    let (name, gap) = match family {
        Family::Pearson7 if scalar && structure.rows(1) == 1 => {
            let c = ln_gamma_unchecked(h0 + 0.5) - ln_gamma_unchecked(h0) - 0.5 * PI.ln();
            let gap = max_gap(
                grid(-10.0, 10.0, 101).map(|t| Ok((eval(BlockRole::T, t)?, c - (h0 + 0.5) * t.mul_add(t, 1.0).ln()))),
            )?;
            ("closed_form/student_t", gap)
        }
        Family::Pearson2 if scalar && structure.rows(1) == 1 => {
            let c = ln_gamma_unchecked(h0 + 0.5) - ln_gamma_unchecked(h0) - 0.5 * PI.ln();
            let interior = grid(-1.0, 1.0, 103).skip(1).take(101);
            let gap = max_gap(interior.map(|r| Ok((eval(BlockRole::R, r)?, c + (h0 - 1.0) * (-r * r).ln_1p()))))?;
            ("closed_form/symmetric_beta", gap)
        }
        Family::Beta2 if scalar => {
            let a = structure.rows(1) as f64 / 2.0;
            let gap =
                max_gap(grid(0.2, 20.0, 100).map(|f| Ok((eval(BlockRole::F, f)?, beta_prime_log_pdf(f, a, h0)))))?;
            ("closed_form/beta_prime", gap)
        }
        Family::Beta1 if scalar => {
            let a = structure.rows(1) as f64 / 2.0;
            let interior = grid(0.0, 1.0, 102).skip(1).take(100);
            let gap = max_gap(interior.map(|b| Ok((eval(BlockRole::B, b)?, beta_log_pdf(b, a, h0)))))?;
            ("closed_form/beta", gap)
        }
        Family::Gg | Family::GammaElliptical | Family::Wishart | Family::GammaWishart
            if kernel.family() == KernelFamily::Normal =>
        {
            let wishart = matches!(family, Family::Wishart | Family::GammaWishart);
            let start = if family == Family::Wishart { 0 } else { 1 };
            if wishart && structure.block_rows()[start..].iter().any(|&n| n < m) {
                return Ok(None);
            }
            let draws = sample_family(family, structure, kernel, 50, &mut RngStream::new(seed))?;
            let joint = Form::Joint(kernel.clone());
            let gap = max_gap(
                draws
                    .draws
                    .iter()
                    .map(|d| Ok((family.log_density(d, structure, &joint)?, normal_product(family, structure, d)))),
            )?;
            ("closed_form/independent_normal", gap)
        }
        _ => return Ok(None),
    };
    let tolerance =
        if name == "closed_form/independent_normal" { PRODUCT_FORM_TOLERANCE } else { CLOSED_FORM_TOLERANCE };
    Ok(Some(CheckOutcome::at_most(name, gap, tolerance)))
}

/// `(||X_0||², ..., ||X_k||²)` recovered from a derived sample.
pub fn squared_norms(family: Family, sample: &DerivedSample) -> Result<Vec<f64>> {
    let v = sample.v;
    let trace = |b: &DerivedBlock| b.spd().map(SpdMatrix::trace).unwrap_or(f64::NAN);
    let norm = |b: &DerivedBlock| b.matrix().map(RealMatrix::frobenius_sq).unwrap_or(f64::NAN);
    let inv_trace = |b: &DerivedBlock| -> Result<f64> {
        b.spd().ok_or_else(|| Error::InvalidRoles("expected a Gram-type block".into()))?.inverse().map(|w| w.trace())
    };
    let mut out = Vec::with_capacity(sample.blocks.len() + 1);
    match family {
        Family::P7P2 | Family::B2B1 | Family::InvB2B1 => {
            let (v0, t, r) = match family {
                Family::P7P2 => (v, norm(&sample.blocks[0]), norm(&sample.blocks[1])),
                Family::B2B1 => (v, trace(&sample.blocks[0]), trace(&sample.blocks[1])),
                _ => (1.0 / v, inv_trace(&sample.blocks[0])?, inv_trace(&sample.blocks[1])?),
            };
            let x2 = r * v0;
            let x0 = v0 - x2;
            out.extend([x0, x0 * t, x2]);
        }
        _ => {
            out.push(v);
            for b in &sample.blocks {
                out.push(match family {
                    Family::Gg => b.scalar().unwrap_or(f64::NAN),
                    Family::GammaElliptical => norm(b),
                    Family::Pearson7 | Family::LocatedP7 => v * norm(b),
                    Family::Pearson2 => {
                        let s = norm(b);
                        v * s / (1.0 - s)
                    }
                    Family::Beta2 => v * trace(b),
                    Family::Beta1 => {
                        let s = trace(b);
                        v * s / (1.0 - s)
                    }
                    Family::Wishart | Family::GammaWishart => trace(b),
                    _ => unreachable!("mixed families handled above"),
                });
            }
        }
    }
    Ok(out)
}

fn beta_cdf(a: f64, b: f64) -> TabulatedCdf<impl Fn(f64) -> f64> {
    TabulatedCdf::new(move |x| beta_log_pdf(x, a, b).exp(), Domain::Interval(0.0, 1.0), 2000)
}

/// Monte Carlo suite on `draws` samples. The squared norms of the
/// underlying spherical draw are recovered from each sample; their total
/// must follow the radial law of the kernel and the share of block `i` must
/// be Beta(`n_i m / 2`, `(N - n_i) m / 2`) whatever the kernel. For `k = 1`
/// scalar blocks the block itself is also tested against the CDF of the
/// marginal density. Each `value` is a KS p-value, passing above a
/// Bonferroni-adjusted [`KS_LEVEL`].
pub fn monte_carlo(
    family: Family,
    structure: &BlockStructure,
    kernel: &KernelSpec,
    draws: usize,
    seed: u64,
) -> Result<Vec<CheckOutcome>> {
    let set = sample_family(family, structure, kernel, draws, &mut RngStream::new(seed))?;
    let norms = set.draws.iter().map(|d| squared_norms(family, d)).collect::<Result<Vec<_>>>()?;
    let m = structure.cols() as f64;
    let total_dim = structure.dim() as f64;
    let k = structure.k();

    let scalar_block = k == 1 && family.supports(FormKind::Marginal) && {
        let (_, slots) = layout(family, structure, FormKind::Marginal, None).unwrap_or_default();
        matches!(slots[..], [Slot::Scalar(_)] | [Slot::Entries { rows: 1, cols: 1, .. }])
    };
    let tests = k + 2 + usize::from(scalar_block);
    let level = KS_LEVEL / tests as f64;
    let mut out = Vec::with_capacity(tests);

    let mut radius: Vec<f64> = norms.iter().map(|n| n.iter().sum()).collect();
    let p = match kernel.family() {
        KernelFamily::Normal => {
            let h = total_dim / 2.0;
            let cdf = TabulatedCdf::new(
                move |x: f64| if x > 0.0 { ((h - 1.0) * x.ln() - x / 2.0).exp() } else { 0.0 },
                Domain::HalfLine(0.0),
                2000,
            );
            ks_test(&mut radius, |x| cdf.cdf(x)).p_value
        }
        KernelFamily::PearsonVII { q, r } => {
            let cdf = beta_cdf(total_dim / 2.0, q - total_dim / 2.0);
            ks_test(&mut radius, |x| cdf.cdf(x / (x + r))).p_value
        }
    };
    out.push(CheckOutcome::above("mc/radius", p, level));

    for i in 0..=k {
        let a = structure.rows(i) as f64 * m / 2.0;
        let cdf = beta_cdf(a, total_dim / 2.0 - a);
        let mut share: Vec<f64> = norms.iter().map(|n| n[i] / n.iter().sum::<f64>()).collect();
        out.push(CheckOutcome::above(format!("mc/share_{i}"), ks_test(&mut share, |x| cdf.cdf(x)).p_value, level));
    }

    if scalar_block {
        let (roles, slots) = layout(family, structure, FormKind::Marginal, None)?;
        let form = reference_marginal(family, structure);
        let anchor = set.roles.anchor;
        let density = |x: f64| {
            build(anchor, &roles, &slots, false, None, &[x])
                .and_then(|(s, _)| family.log_density(&s, structure, &form))
                .map_or(0.0, f64::exp)
        };
        let cdf = TabulatedCdf::new(density, slots[0].domain(), 4000);
        let location = match &form {
            Form::Located { scales, .. } => Some(&scales[0]),
            _ => None,
        };
        let mut values: Vec<f64> = set
            .draws
            .iter()
            .map(|d| {
                let b = &d.blocks[0];
                let x = b.matrix().map(|x| x.get(0, 0)).or_else(|| b.spd().map(|w| w.get(0, 0))).unwrap_or(f64::NAN);
                match location {
                    // S = μ + √(r σ θ) T for scalar blocks
                    Some(ls) => ls.mu.get(0, 0) + (ls.r * ls.sigma.get(0, 0) * ls.theta.get(0, 0)).sqrt() * x,
                    None => x,
                }
            })
            .collect();
        out.push(CheckOutcome::above("mc/density", ks_test(&mut values, |x| cdf.cdf(x)).p_value, level));
    }
    Ok(out)
}

/// What [`run`] checks.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub family: Family,
    pub structure: BlockStructure,
    pub kernel: KernelSpec,
    pub level: CheckLevel,
    /// Monte Carlo sample size at the full level.
    pub draws: usize,
    pub seed: u64,
}

/// Runs the suite for one configuration. The fast level needs
/// [`quadrature_tractable`]; the full level runs the normalization only when
/// it is available.
pub fn run(config: &CheckConfig) -> Result<Vec<CheckOutcome>> {
    let CheckConfig { family, ref structure, ref kernel, level, draws, seed } = *config;
    let tractable = quadrature_tractable(structure);
    if level == CheckLevel::Fast && !tractable {
        return domain(format!(
            "quadrature checks need m = 1, k <= 2 and n_i <= 2 (got m = {}, k = {}); use the full level for Monte Carlo checks",
            structure.cols(),
            structure.k()
        ));
    }
    family.roles(structure.k())?;
    let mut out = Vec::new();
    if tractable {
        out.extend(normalization(family, structure, kernel)?);
    }
    if family.supports(FormKind::Joint) && family.supports(FormKind::Marginal) && family != Family::LocatedP7 {
        out.push(joint_marginal_consistency(family, structure, kernel, 10, seed)?);
    }
    out.extend(closed_form(family, structure, kernel, seed)?);
    if level == CheckLevel::Full {
        out.extend(monte_carlo(family, structure, kernel, draws, seed)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn structure(rows: &[usize], m: usize) -> BlockStructure {
        BlockStructure::new(rows.to_vec(), m).unwrap()
    }

    #[test]
    fn arcsine_law_has_unit_mass() {
        let s = structure(&[1, 1], 1);
        let checks = normalization(Family::Pearson2, &s, &KernelSpec::normal(2)).unwrap();
        assert_eq!(checks.len(), 2);
        for c in &checks {
            assert!(c.pass, "{c:?}");
        }
    }

    #[test]
    fn radial_coordinates_cover_two_row_blocks() {
        let s = structure(&[2, 2], 1);
        let mass = total_mass(Family::Pearson7, &s, &reference_marginal(Family::Pearson7, &s)).unwrap().unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn located_blocks_integrate_about_their_center() {
        let s = structure(&[1, 1, 2], 1);
        let mass = total_mass(Family::LocatedP7, &s, &reference_marginal(Family::LocatedP7, &s)).unwrap().unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn too_many_coordinates_are_skipped() {
        let s = structure(&[1, 1, 1], 1);
        assert_eq!(total_mass(Family::Pearson7, &s, &Form::Joint(KernelSpec::normal(3))).unwrap(), None);
    }

    #[test]
    fn beta2_joint_integrates_to_marginal() {
        let s = structure(&[1, 1], 1);
        let c = joint_marginal_consistency(Family::Beta2, &s, &KernelSpec::normal(2), 10, 3).unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn consistency_holds_off_normality() {
        let s = structure(&[2, 2, 2], 2);
        let k = KernelSpec::student_t(s.dim(), 5.0).unwrap();
        let c = joint_marginal_consistency(Family::P7P2, &s, &k, 10, 4).unwrap();
        assert!(c.pass, "{c:?}");
    }

    #[test]
    fn squared_norms_match_the_draw() {
        let s = structure(&[2, 2, 3], 2);
        let k = KernelSpec::normal(s.dim());
        let mut rng = RngStream::new(5);
        let x = crate::sampling::sample_spherical(&s, &k, &mut rng).unwrap();
        let expected: Vec<f64> = x.iter().map(RealMatrix::frobenius_sq).collect();
        for family in Family::ALL {
            let roles = family.roles(2).unwrap();
            let d = crate::transforms::derive(&x, &s, &roles).unwrap();
            let got = squared_norms(family, &d).unwrap();
            for (g, e) in got.iter().zip(&expected) {
                assert!((g - e).abs() < 1e-10 * e.max(1.0), "{family}: {got:?} vs {expected:?}");
            }
        }
    }

    #[test]
    fn fast_level_rejects_matrix_blocks() {
        let s = structure(&[2, 2], 2);
        let config = CheckConfig {
            family: Family::Beta2,
            structure: s.clone(),
            kernel: KernelSpec::normal(s.dim()),
            level: CheckLevel::Fast,
            draws: 100,
            seed: 0,
        };
        assert!(matches!(run(&config), Err(Error::Domain(_))));
        let full = run(&CheckConfig { level: CheckLevel::Full, draws: 2_000, ..config }).unwrap();
        assert!(full.iter().all(|c| c.pass), "{full:?}");
        assert!(full.iter().all(|c| !c.name.starts_with("normalization")));
    }

    #[test]
    fn monte_carlo_suite_passes_for_a_heavy_kernel() {
        let s = structure(&[3, 1], 1);
        let k = KernelSpec::pearson7(s.dim(), 3.0, 2.0).unwrap();
        let checks = monte_carlo(Family::Pearson7, &s, &k, 5_000, 6).unwrap();
        assert_eq!(checks.len(), 4);
        assert!(checks.iter().all(|c| c.pass), "{checks:?}");
    }
}
