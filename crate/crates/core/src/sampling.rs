//! Seeded draws from matrix variate spherical laws and the derived
//! statistics of each family.
//!
//! A draw is a uniform direction on the unit sphere of `R^{Nm}` (normalized
//! Gaussian vector) scaled by a radius from the kernel's radial law. Blocks
//! within one draw are dependent; separate draws are independent replicates.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::densities::Family;
use crate::error::{shape, Error, Result};
use crate::kernels::KernelSpec;
use crate::matcore::{BlockStructure, RealMatrix};
use crate::transforms::{derive, DerivedSample, Roles};

/// Independent draws of one set of derived statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub structure: BlockStructure,
    pub kernel: KernelSpec,
    pub roles: Roles,
    pub draws: Vec<DerivedSample>,
}

/// One spherical draw `(X_0, ..., X_k)`, blocks filled row by row.
pub fn sample_spherical<R: Rng + ?Sized>(
    structure: &BlockStructure,
    kernel: &KernelSpec,
    rng: &mut R,
) -> Result<Vec<RealMatrix>> {
    if kernel.dim() != structure.dim() {
        return shape(format!(
            "kernel is bound to dimension {} but the structure has N m = {}",
            kernel.dim(),
            structure.dim()
        ));
    }
    let m = structure.cols();
    let z: Vec<f64> = (0..structure.dim()).map(|_| rng.sample(StandardNormal)).collect();
    let norm = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    let radius = kernel.sample_radius_sq(rng).sqrt();
    let scale = if norm > 0.0 { radius / norm } else { 0.0 };

    let mut blocks = Vec::with_capacity(structure.k() + 1);
    let mut offset = 0;
    for &n in structure.block_rows() {
        let entries: Vec<f64> = z[offset..offset + n * m].iter().map(|x| x * scale).collect();
        blocks.push(RealMatrix::from_row_major(n, m, &entries)?);
        offset += n * m;
    }
    Ok(blocks)
}

/// One draw passed through [`derive`], redrawn once if it lands on a
/// probability-zero degenerate point.
fn sample_derived<R: Rng + ?Sized>(
    structure: &BlockStructure,
    kernel: &KernelSpec,
    roles: &Roles,
    rng: &mut R,
) -> Result<DerivedSample> {
    let x = sample_spherical(structure, kernel, rng)?;
    match derive(&x, structure, roles) {
        Err(Error::DegenerateBlock(_)) => derive(&sample_spherical(structure, kernel, rng)?, structure, roles),
        other => other,
    }
}

/// `count` independent draws of the statistics named by `roles`.
pub fn sample_roles<R: Rng + ?Sized>(
    structure: &BlockStructure,
    kernel: &KernelSpec,
    roles: &Roles,
    count: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    let draws = (0..count).map(|_| sample_derived(structure, kernel, roles, rng)).collect::<Result<Vec<_>>>()?;
    Ok(SampleSet { structure: structure.clone(), kernel: kernel.clone(), roles: roles.clone(), draws })
}

/// `count` independent draws laid out for `family`.
pub fn sample_family<R: Rng + ?Sized>(
    family: Family,
    structure: &BlockStructure,
    kernel: &KernelSpec,
    count: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    sample_roles(structure, kernel, &family.roles(structure.k())?, count, rng)
}

/// A single draw whose `k` dependent blocks form one trajectory.
pub fn sample_dependent_trajectory<R: Rng + ?Sized>(
    structure: &BlockStructure,
    kernel: &KernelSpec,
    roles: &Roles,
    rng: &mut R,
) -> Result<SampleSet> {
    if structure.k() == 0 {
        return Err(Error::Domain("a trajectory needs at least one block besides X_0".into()));
    }
    sample_roles(structure, kernel, roles, 1, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{correlation, ks_test};
    use crate::rng::RngStream;
    use crate::transforms::{Anchor, BlockRole};
    use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

    fn entries(structure: &BlockStructure, kernel: &KernelSpec, draws: usize, seed: u64) -> Vec<f64> {
        let mut rng = RngStream::new(seed);
        (0..draws)
            .flat_map(|_| sample_spherical(structure, kernel, &mut rng).unwrap())
            .flat_map(|b| b.to_row_major())
            .collect()
    }

    fn scalars(set: &SampleSet, pick: impl Fn(&DerivedSample) -> f64) -> Vec<f64> {
        set.draws.iter().map(pick).collect()
    }

    #[test]
    fn normal_kernel_entries_are_standard_normal() {
        let s = BlockStructure::new(vec![2, 3], 2).unwrap();
        let x = entries(&s, &KernelSpec::normal(10), 10_000, 1);
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn direction_is_centred_for_heavy_tails() {
        let s = BlockStructure::new(vec![1, 1], 1).unwrap();
        let k = KernelSpec::pearson7(2, 1.5, 1.0).unwrap();
        let mut rng = RngStream::new(2);
        let mut sum = [0.0; 2];
        let n = 100_000;
        for _ in 0..n {
            let x = sample_spherical(&s, &k, &mut rng).unwrap();
            let (a, b) = (x[0].get(0, 0), x[1].get(0, 0));
            let r = (a * a + b * b).sqrt();
            sum[0] += a / r;
            sum[1] += b / r;
        }
        assert!(sum.iter().all(|s| (s / n as f64).abs() < 0.01));
    }

    #[test]
    fn pearson_kernel_has_heavier_tails() {
        let s = BlockStructure::new(vec![2, 1], 1).unwrap();
        let q99 = |k: &KernelSpec| {
            let mut x: Vec<f64> = entries(&s, k, 30_000, 3).into_iter().map(f64::abs).collect();
            x.sort_by(f64::total_cmp);
            x[x.len() * 99 / 100]
        };
        let heavy = KernelSpec::pearson7(3, 2.0, 1.0).unwrap();
        assert!(q99(&heavy) > q99(&KernelSpec::normal(3)));
    }

    #[test]
    fn gg_squared_norm_is_chi_square() {
        let s = BlockStructure::new(vec![4], 1).unwrap();
        let set = sample_family(Family::Gg, &s, &KernelSpec::normal(4), 20_000, &mut RngStream::new(4)).unwrap();
        let chi = ChiSquared::new(4.0).unwrap();
        let mut v = scalars(&set, |d| d.v);
        assert!(ks_test(&mut v, |x| chi.cdf(x)).p_value > 0.01);
    }

    #[test]
    fn pearson7_block_is_scaled_student_t() {
        let s = BlockStructure::new(vec![3, 1], 1).unwrap();
        let set = sample_family(Family::Pearson7, &s, &KernelSpec::normal(4), 20_000, &mut RngStream::new(5)).unwrap();
        let t3 = StudentsT::new(0.0, 1.0, 3.0).unwrap();
        let mut t = scalars(&set, |d| d.blocks[0].matrix().unwrap().get(0, 0) * 3.0_f64.sqrt());
        assert!(ks_test(&mut t, |x| t3.cdf(x)).p_value > 0.01);
    }

    #[test]
    fn beta2_block_is_beta_prime() {
        let s = BlockStructure::new(vec![2, 2], 1).unwrap();
        let set = sample_family(Family::Beta2, &s, &KernelSpec::normal(4), 20_000, &mut RngStream::new(6)).unwrap();
        let mut f = scalars(&set, |d| d.blocks[0].spd().unwrap().get(0, 0));
        assert!(ks_test(&mut f, |x| x / (1.0 + x)).p_value > 0.01);
    }

    #[test]
    fn draws_are_reproducible() {
        let s = BlockStructure::new(vec![3, 2, 2], 2).unwrap();
        let k = KernelSpec::student_t(14, 5.0).unwrap();
        let a = sample_family(Family::B2B1, &s, &k, 50, &mut RngStream::new(7)).unwrap();
        let b = sample_family(Family::B2B1, &s, &k, 50, &mut RngStream::new(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn draws_stay_in_support() {
        let s = BlockStructure::new(vec![1, 2, 3], 1).unwrap();
        let k = KernelSpec::normal(6);
        let mut rng = RngStream::new(8);
        let roles = Roles::new(Anchor::SqNorm, vec![BlockRole::R, BlockRole::B]).unwrap();
        for d in sample_roles(&s, &k, &roles, 2_000, &mut rng).unwrap().draws {
            assert!(d.blocks[0].matrix().unwrap().frobenius_sq() < 1.0);
            assert!(d.blocks[1].spd().unwrap().trace() < 1.0);
        }
    }

    #[test]
    fn trajectory_shape() {
        let s = BlockStructure::new(std::iter::once(21).chain(std::iter::repeat(21).take(56)).collect(), 3).unwrap();
        let k = KernelSpec::normal(s.dim());
        let roles = Family::Beta2.roles(56).unwrap();
        let set = sample_dependent_trajectory(&s, &k, &roles, &mut RngStream::new(9)).unwrap();
        assert_eq!(set.draws.len(), 1);
        assert_eq!(set.draws[0].blocks.len(), 56);
        assert!(set.draws[0].blocks.iter().all(|b| b.spd().unwrap().order() == 3));
    }

    #[test]
    fn block_dependence_appears_only_off_normality() {
        // raw Gram traces share nothing but the radius, so they decorrelate
        // exactly when the kernel is Normal
        let s = BlockStructure::new(vec![2, 2, 2], 1).unwrap();
        let roles = Roles::uniform(Anchor::SqNorm, BlockRole::W, 2).unwrap();
        let corr = |k: &KernelSpec, seed| {
            let set = sample_roles(&s, k, &roles, 10_000, &mut RngStream::new(seed)).unwrap();
            let tr = |i: usize| -> Vec<f64> { set.draws.iter().map(|d| d.blocks[i].spd().unwrap().trace()).collect() };
            correlation(&tr(0), &tr(1))
        };
        assert!(corr(&KernelSpec::normal(6), 10).abs() < 0.04);
        assert!(corr(&KernelSpec::student_t(6, 10.0).unwrap(), 11) > 0.1);
    }

    #[test]
    fn kernel_dimension_must_match() {
        let s = BlockStructure::new(vec![2, 2], 1).unwrap();
        assert!(sample_spherical(&s, &KernelSpec::normal(3), &mut RngStream::new(0)).is_err());
        assert!(matches!(
            sample_dependent_trajectory(
                &BlockStructure::new(vec![2], 1).unwrap(),
                &KernelSpec::normal(2),
                &Roles::new(Anchor::SqNorm, vec![]).unwrap(),
                &mut RngStream::new(0)
            ),
            Err(Error::Domain(_))
        ));
    }
}
