//! The Gram matrix of normalized kernels at the nodes: assembly in closed
//! zonal form, Riesz certification through extreme eigenvalues, the symmetric
//! inverse square root, and off-diagonal decay measurement.

use std::sync::OnceLock;

use nalgebra::linalg::SymmetricEigen;
use nalgebra::{DMatrix, Dyn};

use crate::cutoff::{kernel_norm_sq, KernelSpec};
use crate::error::{Error, Result};
use crate::points::{geodesic_distance, PointSet};

/// Default positive-definiteness tolerance, relative to λ_max.
pub const PD_TOLERANCE_FACTOR: f64 = 1e-8;

/// Entries below this are treated as rounding noise by the decay fit.
const DECAY_FLOOR: f64 = 1e-14;

/// Symmetric positive (when certified) matrix of inner products of the
/// normalized kernels attached to a node set.
#[derive(Debug, Clone)]
pub struct Gramian {
    entries: DMatrix<f64>,
    points: PointSet,
    spec: KernelSpec,
    spectrum: OnceLock<(f64, f64)>,
}

impl Gramian {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    /// The power-1 kernel spec whose normalized kernels generate the entries.
    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.nrows() == 0
    }

    /// (λ_min, λ_max): the Riesz-sequence constants of the node system.
    pub fn extreme_eigenvalues(&self) -> Result<(f64, f64)> {
        if let Some(&s) = self.spectrum.get() {
            return Ok(s);
        }
        let eigen = symmetric_eigen(self.entries.clone())?;
        let lo = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eigen.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(*self.spectrum.get_or_init(|| (lo, hi)))
    }

    /// Positive-definiteness threshold scaled to the spectrum.
    pub fn default_tolerance(&self) -> Result<f64> {
        Ok(self.extreme_eigenvalues()?.1 * PD_TOLERANCE_FACTOR)
    }

    /// Symmetric inverse square root U·diag(1/√λ)·Uᵀ. Fails when λ_min does
    /// not clear the tolerance: the node set is not a Riesz sequence at this
    /// kernel, and the caller should regenerate nodes or increase ε.
    pub fn inv_sqrt(&self, tolerance: f64) -> Result<DMatrix<f64>> {
        let eigen = symmetric_eigen(self.entries.clone())?;
        let lo = eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eigen.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        self.spectrum.get_or_init(|| (lo, hi));
        if !(lo > tolerance) {
            return Err(Error::NotPositiveDefinite { lambda_min: lo, tolerance });
        }
        let mut scaled = eigen.eigenvectors.clone();
        for (mut col, lambda) in scaled.column_iter_mut().zip(eigen.eigenvalues.iter()) {
            col *= 1.0 / lambda.sqrt();
        }
        let raw = scaled * eigen.eigenvectors.transpose();
        // symmetrize away the last rounding asymmetry
        Ok(0.5 * (&raw + raw.transpose()))
    }
}

fn symmetric_eigen(matrix: DMatrix<f64>) -> Result<SymmetricEigen<f64, Dyn>> {
    SymmetricEigen::try_new(matrix, f64::EPSILON, 100_000).ok_or(Error::EigensolverFailure)
}

/// Assemble Δ_ij = br_kernel(p=2)(z_i·z_j) / kernel_norm_sq(spec): the inner
/// product of the normalized kernels at nodes i and j, exact up to rounding.
pub fn build_gram(points: &PointSet, spec: &KernelSpec) -> Result<Gramian> {
    if spec.sphere_dim() != points.sphere_dim() {
        return Err(Error::DimensionMismatch(format!(
            "kernel on S^{} with points on S^{}",
            spec.sphere_dim(),
            points.sphere_dim()
        )));
    }
    if spec.degree_cutoff() < points.degree() {
        return Err(Error::domain(format!(
            "kernel degree cutoff {} below node selection degree {}",
            spec.degree_cutoff(),
            points.degree()
        )));
    }
    let table = spec.with_power(2)?.table()?;
    let norm_sq = kernel_norm_sq(spec)?;
    let n = points.len();
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        entries[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let dot: f64 = points
                .point(i)
                .iter()
                .zip(points.point(j))
                .map(|(a, b)| a * b)
                .sum();
            let value = table.eval(dot.clamp(-1.0, 1.0))? / norm_sq;
            entries[(i, j)] = value;
            entries[(j, i)] = value;
        }
    }
    Ok(Gramian {
        entries,
        points: points.clone(),
        spec: spec.with_power(1)?,
        spectrum: OnceLock::new(),
    })
}

/// max over rows of the sum of absolute entries — the ℓ∞→ℓ∞ operator norm.
pub fn linf_row_norm(matrix: &DMatrix<f64>) -> f64 {
    (0..matrix.nrows())
        .map(|i| matrix.row(i).iter().map(|x| x.abs()).sum())
        .fold(0.0f64, f64::max)
}

/// Least-squares fit of log|entry| against log(1 + L·d) on the off-diagonal:
/// the model |entry| ≤ constant/(1 + L·d(z_i,z_j))^exponent.
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Fitted decay power N.
    pub exponent: f64,
    /// Fitted prefactor C.
    pub constant: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
    /// Off-diagonal entries that entered the fit.
    pub pairs: usize,
}

pub fn offdiag_decay_fit(matrix: &DMatrix<f64>, points: &PointSet, degree_cutoff: u32) -> Result<DecayFit> {
    let n = points.len();
    if matrix.nrows() != n || matrix.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} matrix indexed by {} points",
            matrix.nrows(),
            matrix.ncols(),
            n
        )));
    }
    if n < 8 {
        return Err(Error::InsufficientData { needed: 8, got: n });
    }
    let big_l = degree_cutoff as f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let entry = matrix[(i, j)].abs();
            if entry <= DECAY_FLOOR {
                continue;
            }
            let d = geodesic_distance(points.point(i), points.point(j))?;
            xs.push((1.0 + big_l * d).ln());
            ys.push(entry.ln());
        }
    }
    if xs.len() < 8 {
        return Err(Error::InsufficientData { needed: 8, got: xs.len() });
    }
    let count = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x) * (x - mean_x)).sum();
    if sxx < 1e-20 {
        // all usable pairs at one distance: a slope is meaningless
        return Err(Error::InsufficientData { needed: 2, got: 1 });
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(DecayFit {
        exponent: -slope,
        constant: intercept.exp(),
        residual: (ss_res / count).sqrt(),
        pairs: xs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::br_kernel;
    use crate::points::{approximate_fekete, candidate_mesh};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tetrahedron() -> PointSet {
        let s = 1.0 / 3.0f64.sqrt();
        PointSet::new(
            2,
            1,
            vec![
                vec![s, s, s],
                vec![s, -s, -s],
                vec![-s, s, -s],
                vec![-s, -s, s],
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_point_gram_is_identity() {
        let points = PointSet::new(2, 0, vec![vec![0.0, 0.0, 1.0]]).unwrap();
        let spec = KernelSpec::new(2, 4, 0.2).unwrap();
        let g = build_gram(&points, &spec).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.entries()[(0, 0)], 1.0);
    }

    #[test]
    fn antipodal_constant_kernel_gram_is_all_ones() {
        let points = PointSet::new(2, 0, vec![vec![0.0, 0.0, 1.0], vec![0.0, 0.0, -1.0]]).unwrap();
        let spec = KernelSpec::reproducing(2, 0).unwrap();
        let g = build_gram(&points, &spec).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_relative_eq!(g.entries()[(i, j)], 1.0, max_relative = 1e-14);
            }
        }
        let (lo, hi) = g.extreme_eigenvalues().unwrap();
        assert!(lo.abs() < 1e-12);
        assert_relative_eq!(hi, 2.0, max_relative = 1e-12);
        assert!(matches!(
            g.inv_sqrt(g.default_tolerance().unwrap()),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn reproducing_kernel_tetrahedron_gram_is_near_identity() {
        // B_1 vanishes exactly at t = -1/3, so the exact tetrahedron
        // diagonalizes the degree-1 reproducing kernel.
        let g = build_gram(&tetrahedron(), &KernelSpec::reproducing(2, 1).unwrap()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(g.entries()[(i, j)], expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn gram_matches_direct_kernel_quotient() {
        let mesh = candidate_mesh(2, 0.1, None).unwrap();
        let points = approximate_fekete(2, 3, &mesh).unwrap();
        let spec = KernelSpec::new(2, 6, 0.25).unwrap();
        let g = build_gram(&points, &spec).unwrap();
        let p2 = spec.with_power(2).unwrap();
        let norm = kernel_norm_sq(&spec).unwrap();
        for i in 0..points.len() {
            for j in 0..points.len() {
                let dot: f64 = points.point(i).iter().zip(points.point(j)).map(|(a, b)| a * b).sum();
                let direct = if i == j { 1.0 } else { br_kernel(&p2, dot.clamp(-1.0, 1.0)).unwrap() / norm };
                assert_relative_eq!(g.entries()[(i, j)], direct, epsilon = 1e-15);
            }
        }
        // symmetry is exact by construction
        assert_eq!(g.entries(), &g.entries().transpose());
    }

    #[test]
    fn gram_input_validation() {
        let points = tetrahedron();
        let wrong_m = KernelSpec::new(3, 4, 0.2).unwrap();
        assert!(matches!(build_gram(&points, &wrong_m), Err(Error::DimensionMismatch(_))));
        let low_l = KernelSpec::new(2, 0, 0.2);
        assert!(low_l.is_ok());
        assert!(build_gram(&points, &low_l.unwrap()).is_err());
    }

    #[test]
    fn identity_spectrum_and_inv_sqrt() {
        let points = PointSet::new(2, 0, vec![vec![0.0, 0.0, 1.0]]).unwrap();
        let spec = KernelSpec::new(2, 2, 0.2).unwrap();
        let g = build_gram(&points, &spec).unwrap();
        let (lo, hi) = g.extreme_eigenvalues().unwrap();
        assert_relative_eq!(lo, 1.0, max_relative = 1e-14);
        assert_relative_eq!(hi, 1.0, max_relative = 1e-14);
        let b = g.inv_sqrt(1e-8).unwrap();
        assert_relative_eq!(b[(0, 0)], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn inv_sqrt_of_diagonal() {
        let g = Gramian {
            entries: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 1.0])),
            points: PointSet::new(2, 0, vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]).unwrap(),
            spec: KernelSpec::new(2, 0, 0.2).unwrap(),
            spectrum: OnceLock::new(),
        };
        let b = g.inv_sqrt(1e-8).unwrap();
        assert_relative_eq!(b[(0, 0)], 0.5, max_relative = 1e-14);
        assert_relative_eq!(b[(1, 1)], 1.0, max_relative = 1e-14);
        assert!(b[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn inv_sqrt_residual_on_random_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 50;
        let m = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let a = &m * m.transpose() + DMatrix::identity(n, n) * 0.1;
        let g = Gramian {
            entries: a.clone(),
            points: PointSet::new(2, 0, vec![vec![0.0, 0.0, 1.0]]).unwrap(),
            spec: KernelSpec::new(2, 0, 0.2).unwrap(),
            spectrum: OnceLock::new(),
        };
        let b = g.inv_sqrt(1e-10).unwrap();
        let residual = (&b * &a * &b - DMatrix::identity(n, n))
            .iter()
            .map(|x| x.abs())
            .fold(0.0f64, f64::max);
        assert!(residual <= 1e-10, "B·A·B − I residual {residual}");
        let asym = (&b - b.transpose()).iter().map(|x| x.abs()).fold(0.0f64, f64::max);
        assert!(asym <= 1e-12);
    }

    #[test]
    fn spectral_sandwich_on_random_vectors() {
        let mesh = candidate_mesh(2, 0.1, None).unwrap();
        let points = approximate_fekete(2, 4, &mesh).unwrap();
        let spec = KernelSpec::new(2, 8, 0.2).unwrap();
        let g = build_gram(&points, &spec).unwrap();
        let (lo, hi) = g.extreme_eigenvalues().unwrap();
        assert!(lo > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a = nalgebra::DVector::from_fn(points.len(), |_, _| rng.random::<f64>() - 0.5);
            let quad = (a.transpose() * g.entries() * &a)[(0, 0)];
            let norm_sq = a.norm_squared();
            assert!(lo * norm_sq <= quad + 1e-12);
            assert!(quad <= hi * norm_sq + 1e-12);
        }
    }

    #[test]
    fn linf_row_norm_examples() {
        assert_eq!(linf_row_norm(&DMatrix::identity(5, 5)), 1.0);
        assert_eq!(linf_row_norm(&DMatrix::from_element(7, 7, 1.0)), 7.0);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -2.0, 0.5, 0.25]);
        assert_eq!(linf_row_norm(&m), 3.0);
    }

    #[test]
    fn decay_fit_recovers_synthetic_exponent() {
        let mesh = candidate_mesh(2, 0.2, None).unwrap();
        let points = approximate_fekete(2, 2, &mesh).unwrap();
        let n = points.len();
        let big_l = 10u32;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
            for j in 0..n {
                if i != j {
                    let d = geodesic_distance(points.point(i), points.point(j)).unwrap();
                    m[(i, j)] = (1.0 + big_l as f64 * d).powi(-3);
                }
            }
        }
        let fit = offdiag_decay_fit(&m, &points, big_l).unwrap();
        assert_relative_eq!(fit.exponent, 3.0, max_relative = 1e-6);
        assert_relative_eq!(fit.constant, 1.0, max_relative = 1e-6);
        assert!(fit.residual < 1e-10);
        assert_eq!(fit.pairs, n * (n - 1) / 2);
    }

    #[test]
    fn decay_fit_insufficient_data() {
        let points = tetrahedron();
        let m = DMatrix::identity(4, 4);
        assert!(matches!(
            offdiag_decay_fit(&m, &points, 1),
            Err(Error::InsufficientData { .. })
        ));
    }
}
