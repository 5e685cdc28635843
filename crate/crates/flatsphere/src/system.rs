//! The flat orthonormal system: mix the Gramian-orthonormalized node kernels
//! through a discrete-Fourier unitary so every resulting function is
//! uniformly bounded, then evaluate and probe sup norms.

use nalgebra::DMatrix;
use num_complex::Complex;

use crate::cutoff::{kernel_norm_sq, KernelSpec};
use crate::error::{Error, Result};
use crate::gramian::build_gram;
use crate::harmonic::{ZonalKernelTable, DOMAIN_SLACK};
use crate::points::{candidate_mesh, CandidateMesh, PointSet};

/// Default tolerance for the closed-form orthonormality check at build time.
pub const DEFAULT_BUILD_TOLERANCE: f64 = 1e-8;

/// Cap on n × mesh-size for materialized batch evaluation.
const BATCH_CAP: usize = 10_000_000;

/// Probes per block in the streaming scan.
const PROBE_BLOCK: usize = 512;

/// The unitary (1/√n)·F with F_ij = ζ^{(i+1)(j+1)}, ζ = exp(2πi/n).
pub fn dft_unitary(n: usize) -> DMatrix<Complex<f64>> {
    let scale = 1.0 / (n as f64).sqrt();
    let roots: Vec<Complex<f64>> = (0..n)
        .map(|t| {
            let angle = 2.0 * std::f64::consts::PI * t as f64 / n as f64;
            Complex::new(angle.cos(), angle.sin()) * scale
        })
        .collect();
    DMatrix::from_fn(n, n, |i, j| roots[((i + 1) * (j + 1)) % n])
}

/// An orthonormal family s_i(z) = Σ_j A_ij · b(z, z_j) of kernel mixtures,
/// with A = (1/√n)·F·Δ^{−1/2}.
#[derive(Debug, Clone)]
pub struct FlatSystem {
    points: PointSet,
    spec: KernelSpec,
    coefficients: DMatrix<Complex<f64>>,
    norm_sq: f64,
    table: ZonalKernelTable,
    a_re: DMatrix<f64>,
    a_im: DMatrix<f64>,
}

/// Result of one streaming probe pass: per-function sup-norm lower bounds and
/// the ℓ∞→L∞ kernel column bound, with the probing metadata.
#[derive(Debug, Clone)]
pub struct ProbeSummary {
    pub sup_norms: Vec<f64>,
    pub kernel_l1_max: f64,
    pub probe_count: usize,
    pub resolution: f64,
}

/// Orthonormalize the node kernels and apply the Fourier mixing; the
/// closed-form orthonormality A·Δ·A* = I is verified before returning.
pub fn build_system(points: &PointSet, spec: &KernelSpec, tolerance: f64) -> Result<FlatSystem> {
    if !(tolerance > 0.0) {
        return Err(Error::domain(format!("verification tolerance must be > 0, got {tolerance}")));
    }
    let gram = build_gram(points, spec)?;
    let inv_root = gram.inv_sqrt(gram.default_tolerance()?)?;
    let n = points.len();
    let b_complex = inv_root.map(|x| Complex::new(x, 0.0));
    let coefficients = dft_unitary(n) * b_complex;
    let system = FlatSystem::from_parts(points.clone(), *spec, coefficients)?;
    let residual = orthonormality_residual_against(&system, gram.entries());
    if residual > tolerance {
        return Err(Error::VerificationFailure { residual, tolerance });
    }
    Ok(system)
}

fn orthonormality_residual_against(system: &FlatSystem, gram_entries: &DMatrix<f64>) -> f64 {
    let a = &system.coefficients;
    let delta = gram_entries.map(|x| Complex::new(x, 0.0));
    let product = a * delta * a.adjoint();
    let n = a.nrows();
    let identity = DMatrix::<Complex<f64>>::identity(n, n);
    (product - identity).iter().map(|c| c.norm()).fold(0.0f64, f64::max)
}

impl FlatSystem {
    /// Assemble from explicit parts (e.g. a deserialized file) without the
    /// build-time verification; use `orthonormality_residual` to re-certify.
    pub fn from_parts(
        points: PointSet,
        spec: KernelSpec,
        coefficients: DMatrix<Complex<f64>>,
    ) -> Result<Self> {
        if spec.power() != 1 {
            return Err(Error::domain("flat systems mix the power-1 kernel"));
        }
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
        let n = points.len();
        if coefficients.nrows() != n || coefficients.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} coefficient matrix for {n} nodes",
                coefficients.nrows(),
                coefficients.ncols()
            )));
        }
        let norm_sq = kernel_norm_sq(&spec)?;
        let table = spec.table()?;
        let a_re = coefficients.map(|c| c.re);
        let a_im = coefficients.map(|c| c.im);
        Ok(FlatSystem { points, spec, coefficients, norm_sq, table, a_re, a_im })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn coefficients(&self) -> &DMatrix<Complex<f64>> {
        &self.coefficients
    }

    pub fn norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// Number of functions (equals the number of nodes).
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// ‖A·Δ·A* − I‖_max, recomputing the Gramian from the stored parts.
    pub fn orthonormality_residual(&self) -> Result<f64> {
        let gram = build_gram(&self.points, &self.spec)?;
        Ok(orthonormality_residual_against(self, gram.entries()))
    }

    /// Normalized-kernel values b(z, z_j)/√norm_sq against every node.
    fn kernel_column(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.points.sphere_dim() as usize + 1 {
            return Err(Error::DimensionMismatch(format!(
                "point of length {} on S^{}",
                z.len(),
                self.points.sphere_dim()
            )));
        }
        let norm: f64 = z.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > DOMAIN_SLACK {
            return Err(Error::domain(format!("point is not on the unit sphere (|p| = {norm})")));
        }
        let scale = 1.0 / self.norm_sq.sqrt();
        let mut column = Vec::with_capacity(self.len());
        for node in self.points.points() {
            let dot: f64 = z.iter().zip(node).map(|(a, b)| a * b).sum();
            column.push(self.table.eval(dot.clamp(-1.0, 1.0))? * scale);
        }
        Ok(column)
    }

    /// s_i(z), summed in ascending node order.
    pub fn evaluate(&self, i: usize, z: &[f64]) -> Result<Complex<f64>> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.len() });
        }
        let column = self.kernel_column(z)?;
        Ok(self.row_dot(i, &column))
    }

    fn row_dot(&self, i: usize, column: &[f64]) -> Complex<f64> {
        let mut acc = Complex::new(0.0, 0.0);
        for (j, &k) in column.iter().enumerate() {
            acc += self.coefficients[(i, j)] * k;
        }
        acc
    }

    /// Values of every function at every mesh point; row i, column q equals
    /// `evaluate(i, mesh point q)` bit for bit (identical summation order).
    pub fn evaluate_batch(&self, mesh: &CandidateMesh) -> Result<DMatrix<Complex<f64>>> {
        let n = self.len();
        if n.saturating_mul(mesh.len()) > BATCH_CAP {
            return Err(Error::ResourceLimit(format!(
                "batch of {n} functions × {} probes exceeds {BATCH_CAP} values",
                mesh.len()
            )));
        }
        let mut out = DMatrix::from_element(n, mesh.len(), Complex::new(0.0, 0.0));
        for (q, p) in mesh.points().iter().enumerate() {
            let column = self.kernel_column(p)?;
            for i in 0..n {
                out[(i, q)] = self.row_dot(i, &column);
            }
        }
        Ok(out)
    }

    fn probe_mesh(&self, probe_resolution: f64) -> Result<CandidateMesh> {
        let big_l = self.spec.degree_cutoff();
        let required = if big_l == 0 { f64::INFINITY } else { 1.0 / (4.0 * big_l as f64) };
        if probe_resolution > required {
            return Err(Error::ResolutionTooCoarse { given: probe_resolution, required });
        }
        candidate_mesh(self.points.sphere_dim(), probe_resolution, None)
    }

    /// Lower bound for ‖s_i‖_∞ by dense probing at the given resolution.
    pub fn sup_norm(&self, i: usize, probe_resolution: f64) -> Result<f64> {
        if i >= self.len() {
            return Err(Error::IndexOutOfRange { index: i, len: self.len() });
        }
        let mesh = self.probe_mesh(probe_resolution)?;
        let mut best = 0.0f64;
        for p in mesh.points() {
            let column = self.kernel_column(p)?;
            best = best.max(self.row_dot(i, &column).norm());
        }
        Ok(best)
    }

    /// One streaming pass over the probe mesh: blocks of kernel columns are
    /// multiplied against the coefficient matrix, accumulating every
    /// function's sup norm and the kernel ℓ¹ column bound together.
    pub fn probe_scan(&self, probe_resolution: f64) -> Result<ProbeSummary> {
        let mesh = self.probe_mesh(probe_resolution)?;
        let n = self.len();
        let mut sup_sq = vec![0.0f64; n];
        let mut kernel_l1_max = 0.0f64;
        let points = mesh.points();
        let mut start = 0;
        while start < points.len() {
            let block = &points[start..(start + PROBE_BLOCK).min(points.len())];
            let mut kernels = DMatrix::zeros(n, block.len());
            for (b, p) in block.iter().enumerate() {
                let column = self.kernel_column(p)?;
                kernel_l1_max = kernel_l1_max.max(column.iter().map(|k| k.abs()).sum());
                kernels.column_mut(b).copy_from_slice(&column);
            }
            let re = &self.a_re * &kernels;
            let im = &self.a_im * &kernels;
            for b in 0..block.len() {
                for i in 0..n {
                    let mag_sq = re[(i, b)] * re[(i, b)] + im[(i, b)] * im[(i, b)];
                    if mag_sq > sup_sq[i] {
                        sup_sq[i] = mag_sq;
                    }
                }
            }
            start += block.len();
        }
        Ok(ProbeSummary {
            sup_norms: sup_sq.into_iter().map(f64::sqrt).collect(),
            kernel_l1_max,
            probe_count: points.len(),
            resolution: probe_resolution,
        })
    }

    /// Per-function sup-norm lower bounds from one probe pass.
    pub fn sup_norms(&self, probe_resolution: f64) -> Result<Vec<f64>> {
        Ok(self.probe_scan(probe_resolution)?.sup_norms)
    }

    /// max over probes of Σ_j |b(z, z_j)|/√norm_sq — the ℓ∞→L∞ bound of the
    /// kernel synthesis map.
    pub fn linf_to_linf_bound(&self, probe_resolution: f64) -> Result<f64> {
        Ok(self.probe_scan(probe_resolution)?.kernel_l1_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::points::{approximate_fekete, shrink_degree};
    use approx::assert_relative_eq;

    fn sweep_system(big_l: u32, epsilon: f64) -> FlatSystem {
        let degree = shrink_degree(big_l, epsilon).unwrap();
        let mesh = candidate_mesh(2, 1.0 / (4.0 * degree.max(1) as f64), None).unwrap();
        let points = approximate_fekete(2, degree, &mesh).unwrap();
        let spec = KernelSpec::new(2, big_l, epsilon).unwrap();
        build_system(&points, &spec, DEFAULT_BUILD_TOLERANCE).unwrap()
    }

    #[test]
    fn dft_rows_are_orthonormal() {
        for n in [1usize, 2, 5, 16, 169] {
            let f = dft_unitary(n);
            let residual = (&f * f.adjoint() - DMatrix::<Complex<f64>>::identity(n, n))
                .iter()
                .map(|c| c.norm())
                .fold(0.0f64, f64::max);
            assert!(residual <= 1e-12, "n={n} residual {residual}");
        }
    }

    #[test]
    fn single_constant_function() {
        let points = PointSet::new(2, 0, vec![vec![0.0, 0.0, 1.0]]).unwrap();
        let spec = KernelSpec::reproducing(2, 0).unwrap();
        let system = build_system(&points, &spec, 1e-12).unwrap();
        assert_eq!(system.len(), 1);
        assert_relative_eq!(system.coefficients()[(0, 0)].re, 1.0, max_relative = 1e-14);
        assert!(system.coefficients()[(0, 0)].im.abs() < 1e-15);

        // s₁ = b(·, z₁)/√norm is the constant of modulus 1/√ω_m
        let omega = crate::harmonic::surface_area(2);
        let at_node = system.evaluate(0, &[0.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(at_node.re, system.norm_sq().sqrt(), max_relative = 1e-14);
        let sup = system.sup_norm(0, 0.5).unwrap();
        assert_relative_eq!(sup, 1.0 / omega.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(
            system.linf_to_linf_bound(0.5).unwrap(),
            1.0 / omega.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn single_kernel_sup_grows_with_degree() {
        let points = PointSet::new(2, 0, vec![vec![0.0, 0.0, 1.0]]).unwrap();
        let sup_at = |big_l: u32| {
            let spec = KernelSpec::new(2, big_l, 0.2).unwrap();
            let system = build_system(&points, &spec, 1e-10).unwrap();
            system.sup_norm(0, 1.0 / (4.0 * big_l as f64)).unwrap()
        };
        let (s8, s16) = (sup_at(8), sup_at(16));
        assert!(s16 > 1.5 * s8, "sup {s8} -> {s16} should grow with the cutoff");
        // the node itself is probed only approximately; the diagonal value
        // bounds the measurement from above
        let spec = KernelSpec::new(2, 8, 0.2).unwrap();
        let system = build_system(&points, &spec, 1e-10).unwrap();
        let diag = system.evaluate(0, &[0.0, 0.0, 1.0]).unwrap().norm();
        assert!(s8 <= diag + 1e-12 && s8 > 0.8 * diag);
    }

    #[test]
    fn orthonormality_residual_small_at_mid_scale() {
        let system = sweep_system(8, 0.2);
        assert_eq!(system.len(), 25);
        let residual = system.orthonormality_residual().unwrap();
        assert!(residual <= 1e-10, "residual {residual}");
    }

    #[test]
    fn evaluate_is_linear_in_coefficients() {
        let system = sweep_system(8, 0.2);
        let doubled = FlatSystem::from_parts(
            system.points().clone(),
            *system.spec(),
            system.coefficients().map(|c| c * 2.0),
        )
        .unwrap();
        let z = [0.6, 0.0, 0.8];
        let base = system.evaluate(3, &z).unwrap();
        let scaled = doubled.evaluate(3, &z).unwrap();
        assert_eq!(scaled, base * 2.0);
    }

    #[test]
    fn node_evaluations_match_coefficient_kernel_product() {
        let system = sweep_system(8, 0.2);
        let n = system.len();
        let mut kernel_gram = DMatrix::zeros(n, n);
        for j in 0..n {
            let column = system.kernel_column(system.points().point(j)).unwrap();
            kernel_gram.column_mut(j).copy_from_slice(&column);
        }
        let product = system.coefficients() * kernel_gram.map(|x| Complex::new(x, 0.0));
        for i in 0..n {
            for j in 0..n {
                let direct = system.evaluate(i, system.points().point(j)).unwrap();
                assert!((direct - product[(i, j)]).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn batch_matches_pointwise_bitwise() {
        let system = sweep_system(8, 0.2);
        let mesh = candidate_mesh(2, 0.4, None).unwrap();
        let batch = system.evaluate_batch(&mesh).unwrap();
        for (q, p) in mesh.points().iter().enumerate() {
            for i in [0usize, 7, 24] {
                assert_eq!(batch[(i, q)], system.evaluate(i, p).unwrap());
            }
        }
    }

    #[test]
    fn scan_agrees_with_single_row_probing() {
        let system = sweep_system(8, 0.2);
        let scan = system.probe_scan(1.0 / 32.0).unwrap();
        assert_eq!(scan.sup_norms.len(), 25);
        assert!(scan.probe_count > 0);
        for i in [0usize, 11, 24] {
            let single = system.sup_norm(i, 1.0 / 32.0).unwrap();
            assert_relative_eq!(scan.sup_norms[i], single, max_relative = 1e-12);
        }
        assert!(scan.kernel_l1_max > 0.0);
    }

    #[test]
    fn input_validation() {
        let system = sweep_system(8, 0.2);
        assert!(matches!(
            system.evaluate(25, &[0.0, 0.0, 1.0]),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(system.evaluate(0, &[0.0, 0.1, 1.0]).is_err());
        assert!(matches!(
            system.sup_norm(0, 0.5),
            Err(Error::ResolutionTooCoarse { .. })
        ));
        assert!(build_system(system.points(), system.spec(), 0.0).is_err());
        let p2 = system.spec().with_power(2).unwrap();
        assert!(FlatSystem::from_parts(
            system.points().clone(),
            p2,
            system.coefficients().clone()
        )
        .is_err());
    }

    #[test]
    fn tampered_coefficients_fail_verification() {
        let system = sweep_system(8, 0.2);
        let mut coeffs = system.coefficients().clone();
        coeffs[(0, 0)] += Complex::new(0.05, 0.0);
        let tampered =
            FlatSystem::from_parts(system.points().clone(), *system.spec(), coeffs).unwrap();
        let residual = tampered.orthonormality_residual().unwrap();
        assert!(residual > 1e-3, "tampering must surface in the residual, got {residual}");
    }
}
