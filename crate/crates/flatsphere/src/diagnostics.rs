//! Independent oracles: exact product quadrature on S², a brute-force kernel
//! summed over the explicit basis, separated-node kernel-tail sums, and
//! randomized sampling-constant estimates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cutoff::CutoffProfile;
use crate::error::{Error, Result};
use crate::harmonic::{eval_basis_upto, real_basis_eval, surface_area, HarmonicSpace};
use crate::points::{geodesic_distance, PointSet};

/// Degree cap for the brute-force oracle paths.
pub const ORACLE_DEGREE_CAP: u32 = 12;

/// A positive quadrature rule on S² exact for spherical polynomials up to
/// `exactness_degree`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    nodes: Vec<[f64; 3]>,
    weights: Vec<f64>,
    exactness_degree: u32,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness_degree(&self) -> u32 {
        self.exactness_degree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Σ w_q · f(x_q).
    pub fn integrate<F>(&self, mut f: F) -> Result<f64>
    where
        F: FnMut(&[f64]) -> Result<f64>,
    {
        let mut acc = 0.0;
        for (node, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(node)?;
        }
        Ok(acc)
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration.
fn gauss_legendre(q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(q, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 1..q {
        let next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p;
        p = next;
    }
    let dp = q as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// Product rule on S² exact through degree 2L+2: Gauss–Legendre in the polar
/// cosine crossed with equispaced azimuths.
pub fn gauss_sphere_rule(degree_cutoff: u32) -> Result<QuadratureRule> {
    let exactness = 2 * degree_cutoff + 2;
    let n_polar = (exactness as usize + 1).div_ceil(2);
    let n_azim = 2 * n_polar + 1;
    let (polar, polar_w) = gauss_legendre(n_polar);
    let azim_w = 2.0 * std::f64::consts::PI / n_azim as f64;
    let mut nodes = Vec::with_capacity(n_polar * n_azim);
    let mut weights = Vec::with_capacity(n_polar * n_azim);
    for (z, wz) in polar.iter().zip(&polar_w) {
        let r = (1.0 - z * z).max(0.0).sqrt();
        for b in 0..n_azim {
            let phi = 2.0 * std::f64::consts::PI * b as f64 / n_azim as f64;
            nodes.push([r * phi.cos(), r * phi.sin(), *z]);
            weights.push(wz * azim_w);
        }
    }
    Ok(QuadratureRule { nodes, weights, exactness_degree: exactness })
}

/// The kernel summed term by term over the explicit real basis — an
/// implementation path with no zonal-recurrence code in common with the
/// closed-form kernel evaluator.
pub fn brute_force_kernel(
    m: u32,
    degree_cutoff: u32,
    cutoff: &CutoffProfile,
    power: u8,
    z: &[f64],
    w: &[f64],
) -> Result<f64> {
    if m != 2 {
        return Err(Error::UnsupportedDimension { required: 2, got: m });
    }
    if degree_cutoff > ORACLE_DEGREE_CAP {
        return Err(Error::ResourceLimit(format!(
            "brute-force kernel capped at degree {ORACLE_DEGREE_CAP}, got {degree_cutoff}"
        )));
    }
    if !(power == 1 || power == 2) {
        return Err(Error::domain(format!("kernel power must be 1 or 2, got {power}")));
    }
    let mut acc = 0.0;
    for l in 0..=degree_cutoff {
        let ratio = if degree_cutoff == 0 { 0.0 } else { l as f64 / degree_cutoff as f64 };
        let c = cutoff.value(ratio)?.powi(power as i32);
        if c == 0.0 {
            continue;
        }
        let yz = real_basis_eval(m, l, z)?;
        let yw = real_basis_eval(m, l, w)?;
        let pair: f64 = yz.iter().zip(&yw).map(|(a, b)| a * b).sum();
        acc += c * pair;
    }
    Ok(acc)
}

/// max over probes z of Σ_j (1 + L·d(z, z_j))^{−N}: bounded uniformly in L
/// for separated nodes whenever N exceeds the sphere dimension.
pub fn propbound_sum(
    points: &PointSet,
    degree_cutoff: u32,
    exponent: f64,
    probes: &[[f64; 3]],
) -> Result<f64> {
    if points.sphere_dim() != 2 {
        return Err(Error::UnsupportedDimension { required: 2, got: points.sphere_dim() });
    }
    if !(exponent > points.sphere_dim() as f64) {
        return Err(Error::domain(format!(
            "tail exponent must exceed the sphere dimension, got {exponent}"
        )));
    }
    let big_l = degree_cutoff as f64;
    let mut worst = 0.0f64;
    for z in probes {
        let mut sum = 0.0;
        for node in points.points() {
            let d = geodesic_distance(z, node)?;
            sum += (1.0 + big_l * d).powf(-exponent);
        }
        worst = worst.max(sum);
    }
    Ok(worst)
}

/// ω_m/k_L · Σ_j φ(z_j)² / ‖φ‖²₂ for one test function, the norm computed by
/// the quadrature rule. Scaled so a constant function on a single node gives
/// exactly 1.
pub fn sampling_ratio<F>(
    points: &PointSet,
    space: &HarmonicSpace,
    mut phi: F,
    rule: &QuadratureRule,
) -> Result<f64>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let k = space.dimension()? as f64;
    let norm_sq = rule.integrate(|x| Ok(phi(x)?.powi(2)))?;
    if !(norm_sq > 0.0) {
        return Err(Error::domain("test function has zero norm"));
    }
    let mut sample = 0.0;
    for node in points.points() {
        sample += phi(node)?.powi(2);
    }
    Ok(surface_area(space.sphere_dim()) * sample / (k * norm_sq))
}

/// Randomized sampling-constant estimate: the maximum of `sampling_ratio`
/// over `trials` random members of the space, drawn with Gaussian
/// coefficients from the given seed.
pub fn plancherel_polya(
    points: &PointSet,
    space: &HarmonicSpace,
    trials: u32,
    rule: &QuadratureRule,
    seed: u64,
) -> Result<f64> {
    if space.sphere_dim() != 2 || points.sphere_dim() != 2 {
        return Err(Error::UnsupportedDimension { required: 2, got: space.sphere_dim().max(points.sphere_dim()) });
    }
    if rule.exactness_degree() < 2 * space.degree_cutoff() {
        return Err(Error::domain(format!(
            "rule exact to degree {} cannot integrate squares from degree {}",
            rule.exactness_degree(),
            space.degree_cutoff()
        )));
    }
    let degree = space.degree_cutoff();
    let k = space.dimension()?;
    // basis values at the sample nodes and at the quadrature nodes, once
    let at_nodes: Vec<Vec<f64>> = points
        .points()
        .iter()
        .map(|p| eval_basis_upto(degree, p))
        .collect::<Result<_>>()?;
    let at_rule: Vec<Vec<f64>> = rule
        .nodes()
        .iter()
        .map(|p| eval_basis_upto(degree, p))
        .collect::<Result<_>>()?;
    let omega = surface_area(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let coeff: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let sample: f64 = at_nodes
            .iter()
            .map(|row| row.iter().zip(&coeff).map(|(y, c)| y * c).sum::<f64>().powi(2))
            .sum();
        let norm_sq: f64 = at_rule
            .iter()
            .zip(rule.weights())
            .map(|(row, w)| w * row.iter().zip(&coeff).map(|(y, c)| y * c).sum::<f64>().powi(2))
            .sum();
        worst = worst.max(omega * sample / (k as f64 * norm_sq));
    }
    Ok(worst)
}
