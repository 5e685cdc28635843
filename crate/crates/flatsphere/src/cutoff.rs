//! The smooth spectral cutoff and the Bochner-Riesz type kernels it induces.
//!
//! A kernel of degree cutoff L sums zonal kernels of all degrees l <= L with
//! weights beta(l/L)^p, where beta is 1 on [0, 1-eps], 0 above 1, and glued
//! smoothly in between. The indicator cutoff (the eps = 0 limit) recovers the
//! reproducing kernel of E_L through the same code path.

use crate::error::{Error, Result};
use crate::harmonic::{degree_dimension, surface_area, ZonalKernelTable};

/// The cutoff shape applied to the degree ratio l/L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutoffProfile {
    /// Sharp truncation at the cutoff degree; yields the reproducing kernel.
    Indicator,
    /// C-infinity nonincreasing glue on (1-epsilon, 1), exponentially flat at
    /// both junctions.
    Smooth { epsilon: f64 },
}

impl CutoffProfile {
    pub fn smooth(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::domain(format!("cutoff epsilon must lie in (0, 1], got {epsilon}")));
        }
        Ok(CutoffProfile::Smooth { epsilon })
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            CutoffProfile::Indicator => 0.0,
            CutoffProfile::Smooth { epsilon } => *epsilon,
        }
    }

    /// The cutoff value at x >= 0.
    pub fn value(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::domain(format!("cutoff argument must be >= 0, got {x}")));
        }
        Ok(match self {
            CutoffProfile::Indicator => {
                if x <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            CutoffProfile::Smooth { epsilon } => beta_unchecked(*epsilon, x),
        })
    }
}

/// The smooth cutoff beta_eps: 1 on [0, 1-eps], 0 on [1, inf), glued on
/// (1-eps, 1) by f((1-x)/eps) with f(t) = g(t)/(g(t) + g(1-t)), g(t) = e^{-1/t}.
/// The glue satisfies f(t) + f(1-t) = 1, so beta is symmetric about the
/// transition midpoint.
pub fn beta(epsilon: f64, x: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::domain(format!("cutoff epsilon must lie in (0, 1], got {epsilon}")));
    }
    if x < 0.0 {
        return Err(Error::domain(format!("cutoff argument must be >= 0, got {x}")));
    }
    Ok(beta_unchecked(epsilon, x))
}

fn beta_unchecked(epsilon: f64, x: f64) -> f64 {
    if x <= 1.0 - epsilon {
        1.0
    } else if x >= 1.0 {
        0.0
    } else {
        flat_glue((1.0 - x) / epsilon)
    }
}

fn flat_glue(t: f64) -> f64 {
    let g = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let a = g(t);
    let b = g(1.0 - t);
    a / (a + b)
}

/// Parameters of a Bochner-Riesz type kernel on S^m: degree cutoff L,
/// cutoff profile, and the power p applied to the cutoff weights.
/// p = 1 gives the kernel itself; p = 2 gives the kernel whose values are
/// the unnormalized Gram inner products.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    m: u32,
    degree_cutoff: u32,
    cutoff: CutoffProfile,
    power: u8,
}

impl KernelSpec {
    /// Kernel with the smooth cutoff at the given epsilon, power 1.
    pub fn new(m: u32, degree_cutoff: u32, epsilon: f64) -> Result<Self> {
        Ok(KernelSpec {
            m: check_m(m)?,
            degree_cutoff,
            cutoff: CutoffProfile::smooth(epsilon)?,
            power: 1,
        })
    }

    /// The sharp-cutoff (reproducing kernel) case, power 1.
    pub fn reproducing(m: u32, degree_cutoff: u32) -> Result<Self> {
        Ok(KernelSpec {
            m: check_m(m)?,
            degree_cutoff,
            cutoff: CutoffProfile::Indicator,
            power: 1,
        })
    }

    /// Same kernel family with the cutoff weights raised to `power`.
    pub fn with_power(&self, power: u8) -> Result<Self> {
        if !(power == 1 || power == 2) {
            return Err(Error::domain(format!("kernel power must be 1 or 2, got {power}")));
        }
        Ok(KernelSpec { power, ..*self })
    }

    pub fn sphere_dim(&self) -> u32 {
        self.m
    }

    pub fn degree_cutoff(&self) -> u32 {
        self.degree_cutoff
    }

    pub fn cutoff(&self) -> CutoffProfile {
        self.cutoff
    }

    pub fn epsilon(&self) -> f64 {
        self.cutoff.epsilon()
    }

    pub fn power(&self) -> u8 {
        self.power
    }

    /// The weight beta(l/L)^p applied to degree l.
    pub fn coefficient(&self, l: u32) -> Result<f64> {
        if l > self.degree_cutoff {
            return Ok(0.0);
        }
        let ratio = if self.degree_cutoff == 0 {
            0.0
        } else {
            l as f64 / self.degree_cutoff as f64
        };
        let b = self.cutoff.value(ratio)?;
        Ok(if self.power == 1 { b } else { b * b })
    }

    /// Zonal table realizing this kernel; evaluation costs O(L) per pair.
    pub fn table(&self) -> Result<ZonalKernelTable> {
        let coeff = (0..=self.degree_cutoff)
            .map(|l| self.coefficient(l))
            .collect::<Result<Vec<_>>>()?;
        ZonalKernelTable::new(self.m, coeff)
    }
}

fn check_m(m: u32) -> Result<u32> {
    if m < 2 {
        return Err(Error::domain(format!("sphere dimension m must be >= 2, got {m}")));
    }
    Ok(m)
}

/// The kernel value at inner product t: sum over l <= L of
/// beta(l/L)^p Z_l(t).
pub fn br_kernel(spec: &KernelSpec, t: f64) -> Result<f64> {
    spec.table()?.eval(t)
}

/// Squared L² norm of the power-1 kernel with one argument fixed:
/// sum over l of beta(l/L)^2 dim H_l / omega_m, independent of the base
/// point by zonal invariance.
pub fn kernel_norm_sq(spec: &KernelSpec) -> Result<f64> {
    let omega = surface_area(spec.m);
    let mut acc = 0.0;
    for l in 0..=spec.degree_cutoff {
        let b = spec.with_power(1)?.coefficient(l)?;
        acc += b * b * degree_dimension(spec.m, l)? as f64 / omega;
    }
    Ok(acc)
}

/// The normalized kernel b(z, w) = B(z, w) / ||B(., w)||_2 at a pair of unit
/// vectors.
pub fn normalized_kernel(spec: &KernelSpec, z: &[f64], w: &[f64]) -> Result<f64> {
    let t = crate::points::unit_dot(z, w)?;
    Ok(br_kernel(&spec.with_power(1)?, t)? / kernel_norm_sq(spec)?.sqrt())
}

/// The comparison envelope L^m / (1 + L d)^N for the kernel decay estimate;
/// valid exponents are N > m.
pub fn decay_envelope(m: u32, degree_cutoff: u32, exponent: f64, distance: f64) -> f64 {
    let big_l = degree_cutoff as f64;
    big_l.powi(m as i32) / (1.0 + big_l * distance).powf(exponent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    #[test]
    fn beta_plateau_and_tail() {
        assert_eq!(beta(0.2, 0.5).unwrap(), 1.0);
        assert_eq!(beta(0.2, 0.8).unwrap(), 1.0);
        assert_eq!(beta(0.2, 1.3).unwrap(), 0.0);
        assert_eq!(beta(0.2, 1.0).unwrap(), 0.0);
        // midpoint symmetry of the glue
        assert_relative_eq!(beta(0.2, 0.9).unwrap(), 0.5, max_relative = 1e-14);
        assert!(beta(0.0, 0.5).is_err());
        assert!(beta(1.5, 0.5).is_err());
        assert!(beta(0.2, -0.1).is_err());
    }

    #[test]
    fn beta_monotone_on_grid() {
        let eps = 0.37;
        let mut last = f64::INFINITY;
        for i in 0..10_000 {
            let x = 1.5 * i as f64 / 9_999.0;
            let v = beta(eps, x).unwrap();
            assert!(v <= last + 1e-15, "beta not nonincreasing at x = {x}");
            assert!((0.0..=1.0).contains(&v));
            last = v;
        }
    }

    proptest! {
        #[test]
        fn glue_symmetry(eps in 0.01f64..1.0, s01 in 1e-6f64..1.0) {
            let s = s01 * eps;
            let lhs = beta(eps, 1.0 - eps + s).unwrap();
            let rhs = beta(eps, 1.0 - s).unwrap();
            prop_assert!((lhs + rhs - 1.0).abs() < 1e-12);
        }

        #[test]
        fn diagonal_positive(l in 0u32..40, eps in 0.01f64..=1.0, power in 1u8..=2) {
            let spec = KernelSpec::new(2, l, eps).unwrap().with_power(power).unwrap();
            prop_assert!(br_kernel(&spec, 1.0).unwrap() > 0.0);
        }
    }

    #[test]
    fn reproducing_diagonal_telescopes() {
        for big_l in [0u32, 1, 3, 10] {
            let spec = KernelSpec::reproducing(2, big_l).unwrap();
            let expect = ((big_l + 1) * (big_l + 1)) as f64 / (4.0 * PI);
            assert_relative_eq!(br_kernel(&spec, 1.0).unwrap(), expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn degree_zero_kernel_is_constant() {
        let spec = KernelSpec::new(2, 0, 0.2).unwrap();
        for &t in &[-1.0, -0.2, 0.7, 1.0] {
            assert_relative_eq!(br_kernel(&spec, t).unwrap(), 1.0 / (4.0 * PI), max_relative = 1e-15);
        }
        assert_relative_eq!(kernel_norm_sq(&spec).unwrap(), 1.0 / (4.0 * PI), max_relative = 1e-15);
    }

    #[test]
    fn norm_sq_indicator_closed_form() {
        let spec = KernelSpec::reproducing(2, 3).unwrap();
        assert_relative_eq!(kernel_norm_sq(&spec).unwrap(), 16.0 / (4.0 * PI), max_relative = 1e-14);
    }

    #[test]
    fn norm_sq_growth_like_l_squared() {
        // value / L^2 bounded above and below across the sweep
        let mut ratios = Vec::new();
        for big_l in (8..=40u32).step_by(4) {
            let spec = KernelSpec::new(2, big_l, 0.2).unwrap();
            ratios.push(kernel_norm_sq(&spec).unwrap() / (big_l as f64 * big_l as f64));
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(lo > 0.0);
        assert!(hi / lo < 1.5, "norm_sq / L^2 drifts: {ratios:?}");
    }

    #[test]
    fn norm_sq_uses_power_one_weights() {
        // the p = 2 spec must yield the same normalizer as its p = 1 parent
        let spec = KernelSpec::new(2, 9, 0.3).unwrap();
        let spec2 = spec.with_power(2).unwrap();
        assert_eq!(kernel_norm_sq(&spec).unwrap(), kernel_norm_sq(&spec2).unwrap());
    }

    #[test]
    fn gram_diagonal_identity() {
        // the p = 2 kernel at the diagonal equals the squared kernel norm
        for &eps in &[0.1, 0.2, 0.5] {
            let spec = KernelSpec::new(2, 12, eps).unwrap();
            let diag = br_kernel(&spec.with_power(2).unwrap(), 1.0).unwrap();
            assert_relative_eq!(diag, kernel_norm_sq(&spec).unwrap(), max_relative = 1e-12);
        }
    }

    #[test]
    fn normalized_kernel_symmetry_and_diagonal() {
        let z = [0.6, 0.0, 0.8];
        let w = [-0.48, 0.6, 0.64];
        let spec = KernelSpec::new(2, 8, 0.2).unwrap();
        let zw = normalized_kernel(&spec, &z, &w).unwrap();
        let wz = normalized_kernel(&spec, &w, &z).unwrap();
        assert_eq!(zw, wz);

        // with the indicator cutoff the diagonal equals the kernel norm exactly
        let sharp = KernelSpec::reproducing(2, 8).unwrap();
        assert_relative_eq!(
            normalized_kernel(&sharp, &z, &z).unwrap(),
            kernel_norm_sq(&sharp).unwrap().sqrt(),
            max_relative = 1e-12
        );
        // smooth cutoff: diagonal b(z,z) * ||B|| = B(1) as an identity
        let b = normalized_kernel(&spec, &z, &z).unwrap();
        assert_relative_eq!(
            b * kernel_norm_sq(&spec).unwrap().sqrt(),
            br_kernel(&spec, 1.0).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn envelope_values() {
        assert_relative_eq!(decay_envelope(2, 20, 3.0, 0.0), 400.0, max_relative = 1e-15);
        assert_relative_eq!(decay_envelope(2, 1, 3.0, 1.0), 1.0 / 8.0, max_relative = 1e-15);
    }
}
