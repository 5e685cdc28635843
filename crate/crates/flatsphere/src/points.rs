//! Node selection on the sphere: candidate meshes, approximate Fekete sets by
//! greedy pivoted orthogonalization, separation measurement, and the degree
//! shrinking rule that turns Fekete nodes into interpolating families.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, UnitSphere};

use crate::error::{Error, Result};
use crate::harmonic::{eval_basis_upto, space_dimension, DOMAIN_SLACK};

/// Hard cap on candidate mesh sizes.
pub const MAX_MESH_POINTS: usize = 2_000_000;

/// Points generated per squared inverse resolution. Calibrated so that the
/// measured mesh norm of the spiral layout stays below the requested
/// resolution with margin.
const MESH_DENSITY: f64 = 8.0;

/// Validate unit vectors and return their inner product clamped to [-1, 1].
pub fn unit_dot(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "vectors of length {} and {}",
            u.len(),
            v.len()
        )));
    }
    for p in [u, v] {
        let norm_sq: f64 = p.iter().map(|x| x * x).sum();
        if (norm_sq.sqrt() - 1.0).abs() > DOMAIN_SLACK {
            return Err(Error::domain(format!(
                "vector is not on the unit sphere (|p| = {})",
                norm_sq.sqrt()
            )));
        }
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok(dot.clamp(-1.0, 1.0))
}

/// Geodesic distance on S^m: the arccos of the clamped inner product.
pub fn geodesic_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    Ok(unit_dot(u, v)?.acos())
}

/// A deterministic near-equal-area candidate mesh on S².
#[derive(Debug, Clone)]
pub struct CandidateMesh {
    points: Vec<[f64; 3]>,
    resolution: f64,
    seed: Option<u64>,
}

impl CandidateMesh {
    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Monte-Carlo upper estimate of the mesh norm: the maximum over sampled
    /// probe directions of the distance to the nearest mesh point.
    pub fn estimate_mesh_norm(&self, probes: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..probes {
            let z: [f64; 3] = UnitSphere.sample(&mut rng);
            let best = self
                .points
                .iter()
                .map(|p| p[0] * z[0] + p[1] * z[1] + p[2] * z[2])
                .fold(-1.0f64, f64::max);
            worst = worst.max(best.clamp(-1.0, 1.0).acos());
        }
        worst
    }
}

/// Generate the spiral candidate mesh at the given target resolution.
/// The same arguments always produce bit-identical output; the optional seed
/// applies a random global rotation to break axis alignment.
pub fn candidate_mesh(m: u32, resolution: f64, seed: Option<u64>) -> Result<CandidateMesh> {
    if m != 2 {
        return Err(Error::UnsupportedDimension { required: 2, got: m });
    }
    if !(resolution > 0.0) {
        return Err(Error::domain(format!("mesh resolution must be > 0, got {resolution}")));
    }
    let count = ((MESH_DENSITY / (resolution * resolution)).ceil() as usize).max(6);
    if count > MAX_MESH_POINTS {
        return Err(Error::ResourceLimit(format!(
            "mesh of {count} points exceeds the cap of {MAX_MESH_POINTS}; increase the resolution"
        )));
    }
    let rotation = seed.map(random_rotation);
    let golden_angle = std::f64::consts::PI * (3.0 - 5.0f64.sqrt());
    let mut points = Vec::with_capacity(count);
    for k in 0..count {
        let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let phi = golden_angle * k as f64;
        let mut p = [r * phi.cos(), r * phi.sin(), z];
        if let Some(rot) = &rotation {
            p = apply_rotation(rot, &p);
        }
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        points.push([p[0] / norm, p[1] / norm, p[2] / norm]);
    }
    Ok(CandidateMesh { points, resolution, seed })
}

fn random_rotation(seed: u64) -> [[f64; 3]; 3] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // uniform rotation from a random unit quaternion
    let q: Vec<f64> = (0..4).map(|_| StandardNormal.sample(&mut rng)).collect();
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (w, x, y, z) = (q[0] / n, q[1] / n, q[2] / n, q[3] / n);
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
        [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
        [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

fn apply_rotation(rot: &[[f64; 3]; 3], p: &[f64; 3]) -> [f64; 3] {
    [
        rot[0][0] * p[0] + rot[0][1] * p[1] + rot[0][2] * p[2],
        rot[1][0] * p[0] + rot[1][1] * p[1] + rot[1][2] * p[2],
        rot[2][0] * p[0] + rot[2][1] * p[1] + rot[2][2] * p[2],
    ]
}

/// A finite node set on S^m with the Fekete degree used to select it and the
/// cached minimum pairwise geodesic distance.
#[derive(Debug, Clone)]
pub struct PointSet {
    m: u32,
    degree: u32,
    points: Vec<Vec<f64>>,
    separation: f64,
}

impl PointSet {
    /// Wrap an explicit node list, validating unit norms.
    pub fn new(m: u32, degree: u32, points: Vec<Vec<f64>>) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain(format!("sphere dimension m must be >= 2, got {m}")));
        }
        for p in &points {
            if p.len() != m as usize + 1 {
                return Err(Error::DimensionMismatch(format!(
                    "point of length {} on S^{m}",
                    p.len()
                )));
            }
            let norm: f64 = p.iter().map(|x| x * x).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > DOMAIN_SLACK {
                return Err(Error::domain(format!("point is not on the unit sphere (|p| = {norm})")));
            }
        }
        let separation = min_pairwise_distance(&points);
        Ok(PointSet { m, degree, points, separation })
    }

    pub fn sphere_dim(&self) -> u32 {
        self.m
    }

    /// The Fekete selection degree of this node set.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j]
    }

    /// Minimum pairwise geodesic distance; infinite for fewer than two nodes.
    pub fn separation(&self) -> f64 {
        self.separation
    }

    /// separation * (degree + 1), the scale-free separation constant.
    pub fn normalized_separation(&self) -> f64 {
        self.separation * (self.degree as f64 + 1.0)
    }
}

fn min_pairwise_distance(points: &[Vec<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            let dot: f64 = points[i].iter().zip(&points[j]).map(|(a, b)| a * b).sum();
            best = best.min(dot.clamp(-1.0, 1.0).acos());
        }
    }
    best
}

/// Minimum over pairs of the geodesic distance.
pub fn separation(points: &PointSet) -> f64 {
    points.separation()
}

/// Greedy approximate Fekete selection: evaluate the orthonormal basis of
/// E_degree on the mesh and pick space_dimension(m, degree) columns by
/// pivoted orthogonal-triangular factorization (largest residual column norm
/// first, lowest index on exact ties).
pub fn approximate_fekete(m: u32, degree: u32, mesh: &CandidateMesh) -> Result<PointSet> {
    if m != 2 {
        return Err(Error::UnsupportedDimension { required: 2, got: m });
    }
    let k = space_dimension(m, degree)?;
    let n = mesh.len();
    if n < k {
        return Err(Error::domain(format!(
            "mesh of {n} points cannot support degree {degree} (need at least {k})"
        )));
    }
    if degree >= 1 && mesh.resolution() > 1.0 / (2.0 * degree as f64) + 1e-12 {
        return Err(Error::domain(format!(
            "mesh resolution {} too coarse for degree {degree} (need <= {})",
            mesh.resolution(),
            1.0 / (2.0 * degree as f64)
        )));
    }

    // Vandermonde of basis values, one column per candidate, column-major.
    let mut data = vec![0.0f64; k * n];
    for (q, p) in mesh.points().iter().enumerate() {
        let vals = eval_basis_upto(degree, p)?;
        data[q * k..(q + 1) * k].copy_from_slice(&vals);
    }

    let mut norms_sq: Vec<f64> = (0..n)
        .map(|q| data[q * k..(q + 1) * k].iter().map(|x| x * x).sum())
        .collect();
    let mut index: Vec<usize> = (0..n).collect();
    let scale = norms_sq.iter().cloned().fold(0.0f64, f64::max);
    let tol_sq = scale * 1e-24;

    for step in 0..k {
        // pivot: largest residual norm among columns step..n, first on ties
        let mut best = step;
        for q in (step + 1)..n {
            if norms_sq[q] > norms_sq[best] {
                best = q;
            }
        }
        if norms_sq[best] <= tol_sq {
            return Err(Error::RankDeficient { found: step, needed: k });
        }
        if best != step {
            for r in 0..k {
                data.swap(step * k + r, best * k + r);
            }
            norms_sq.swap(step, best);
            index.swap(step, best);
        }

        // normalize the pivot column and project it out of the remainder
        let inv_norm = 1.0 / norms_sq[step].sqrt();
        let (head, tail) = data.split_at_mut((step + 1) * k);
        let v = &mut head[step * k..];
        for x in v.iter_mut() {
            *x *= inv_norm;
        }
        for (offset, col) in tail.chunks_exact_mut(k).enumerate() {
            let q = step + 1 + offset;
            let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            for (x, &vi) in col.iter_mut().zip(v.iter()) {
                *x -= dot * vi;
            }
            norms_sq[q] = (norms_sq[q] - dot * dot).max(0.0);
        }
    }

    let selected: Vec<Vec<f64>> = index[..k].iter().map(|&q| mesh.points()[q].to_vec()).collect();
    PointSet::new(m, degree, selected)
}

/// The Fekete selection degree floor((1 - 2 eps) L) whose nodes serve the
/// kernels of top degree L.
pub fn shrink_degree(degree_cutoff: u32, epsilon: f64) -> Result<u32> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::domain(format!(
            "shrink epsilon must lie in (0, 1/2), got {epsilon}"
        )));
    }
    if degree_cutoff < 1 {
        return Err(Error::domain("degree cutoff must be >= 1"));
    }
    let shrunk = ((1.0 - 2.0 * epsilon) * degree_cutoff as f64).floor();
    if shrunk < 0.0 {
        return Err(Error::domain("shrunk degree is negative"));
    }
    Ok(shrunk as u32)
}

/// The internal epsilon for which the asymptotic node-count fraction
/// (1 - 2 eps)^m meets the requested fraction of dim E_L.
pub fn target_fraction_to_epsilon(m: u32, fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::domain(format!("target fraction must lie in (0, 1), got {fraction}")));
    }
    Ok((1.0 - fraction.powf(1.0 / m as f64)) / 2.0)
}

/// Lebesgue-style interpolation diagnostic: the maximum over probe points of
/// the l¹ norm of the interpolation weights V^{-T} basis(z).
pub fn lebesgue_estimate(points: &PointSet, probes: &CandidateMesh) -> Result<f64> {
    let k = space_dimension(points.sphere_dim(), points.degree())?;
    if points.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "interpolation needs exactly {k} nodes, got {}",
            points.len()
        )));
    }
    let mut v = DMatrix::zeros(k, k);
    for (j, p) in points.points().iter().enumerate() {
        let col = eval_basis_upto(points.degree(), p)?;
        v.column_mut(j).copy_from_slice(&col);
    }
    let lu = v.transpose().lu();
    let mut worst = 0.0f64;
    for p in probes.points() {
        let rhs = nalgebra::DVector::from_vec(eval_basis_upto(points.degree(), p)?);
        let weights = lu
            .solve(&rhs)
            .ok_or_else(|| Error::domain("singular Fekete Vandermonde"))?;
        worst = worst.max(weights.iter().map(|w| w.abs()).sum());
    }
    Ok(worst)
}
