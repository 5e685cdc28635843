//! Independent-oracle checks: every closed-form path in the library is
//! reproduced here by a second route that shares no evaluation code with it
//! (finite differences, symbolic constraint ranks, explicit basis sums,
//! exact quadrature).

use flatsphere::cutoff::KernelSpec;
use flatsphere::diagnostics::gauss_sphere_rule;
use flatsphere::gramian::build_gram;
use flatsphere::harmonic::{degree_dimension, eigenvalue, eval_basis_upto, zonal_kernel};
use flatsphere::points::{approximate_fekete, candidate_mesh, shrink_degree};
use flatsphere::system::build_system;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    rand_distr::UnitSphere.sample(rng)
}

/// The addition theorem ties the two kernel routes together: the explicit
/// orthonormal basis summed over one degree must equal the zonal Gegenbauer
/// form at the pairwise inner product.
#[test]
fn addition_theorem_bridges_basis_and_zonal_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..30 {
        let z = random_unit(&mut rng);
        let w = random_unit(&mut rng);
        let t = (z[0] * w[0] + z[1] * w[1] + z[2] * w[2]).clamp(-1.0, 1.0);
        let yz = eval_basis_upto(6, &z).unwrap();
        let yw = eval_basis_upto(6, &w).unwrap();
        for l in 0..=6u32 {
            let lo = (l * l) as usize;
            let hi = ((l + 1) * (l + 1)) as usize;
            let basis_sum: f64 = yz[lo..hi].iter().zip(&yw[lo..hi]).map(|(a, b)| a * b).sum();
            let zonal = zonal_kernel(2, l, t).unwrap();
            assert!(
                (basis_sum - zonal).abs() <= 1e-10,
                "degree {l}: basis sum {basis_sum} vs zonal {zonal}"
            );
        }
    }
}

/// Laplace–Beltrami eigenvalues by finite differences: extend a harmonic
/// polynomial zero-homogeneously and apply the flat Laplacian on the sphere,
/// where it coincides with the spherical one.
#[test]
fn eigenvalues_match_finite_difference_laplacian() {
    let h = 1e-3;

    // S²: H(x,y,z) = xyz is harmonic of degree 3
    let g3 = |p: [f64; 3]| {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        (p[0] / n) * (p[1] / n) * (p[2] / n)
    };
    let p = {
        let v = [0.3f64, -0.5, 0.7];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let mut lap = 0.0;
    for i in 0..3 {
        let mut up = p;
        let mut dn = p;
        up[i] += h;
        dn[i] -= h;
        lap += (g3(up) + g3(dn) - 2.0 * g3(p)) / (h * h);
    }
    let lambda = -lap / g3(p);
    assert_eq!(eigenvalue(2, 3), 12);
    assert!(
        (lambda - 12.0).abs() < 12.0 * 1e-4,
        "finite-difference eigenvalue {lambda} on S^2"
    );

    // S³: H(x) = x₀x₁ is harmonic of degree 2
    let g2 = |p: [f64; 4]| {
        let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]).sqrt();
        (p[0] / n) * (p[1] / n)
    };
    let q = {
        let v = [0.3f64, -0.5, 0.7, 0.4];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]).sqrt();
        [v[0] / n, v[1] / n, v[2] / n, v[3] / n]
    };
    let mut lap = 0.0;
    for i in 0..4 {
        let mut up = q;
        let mut dn = q;
        up[i] += h;
        dn[i] -= h;
        lap += (g2(up) + g2(dn) - 2.0 * g2(q)) / (h * h);
    }
    let lambda = -lap / g2(q);
    assert_eq!(eigenvalue(3, 2), 8);
    assert!(
        (lambda - 8.0).abs() < 8.0 * 1e-4,
        "finite-difference eigenvalue {lambda} on S^3"
    );
}

fn monomials(vars: usize, degree: u32) -> Vec<Vec<u32>> {
    if vars == 1 {
        return vec![vec![degree]];
    }
    let mut out = Vec::new();
    for first in 0..=degree {
        for mut rest in monomials(vars - 1, degree - first) {
            let mut exps = vec![first];
            exps.append(&mut rest);
            out.push(exps);
        }
    }
    out
}

/// dim H_l as the corank of the Laplacian acting on homogeneous polynomials:
/// count degree-l monomials, subtract the rank of the map Δ into degree l−2.
fn harmonic_dimension_by_rank(vars: usize, degree: u32) -> usize {
    let cols = monomials(vars, degree);
    if degree < 2 {
        return cols.len();
    }
    let rows = monomials(vars, degree - 2);
    let row_index: std::collections::HashMap<Vec<u32>, usize> =
        rows.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let mut matrix = DMatrix::<f64>::zeros(rows.len(), cols.len());
    for (j, alpha) in cols.iter().enumerate() {
        for i in 0..vars {
            if alpha[i] >= 2 {
                let mut image = alpha.clone();
                image[i] -= 2;
                let coeff = (alpha[i] * (alpha[i] - 1)) as f64;
                matrix[(row_index[&image], j)] += coeff;
            }
        }
    }
    let svd = matrix.svd(false, false);
    let max_sv = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|s| **s > 1e-10 * max_sv.max(1.0))
        .count();
    cols.len() - rank
}

#[test]
fn harmonic_dimensions_match_laplacian_corank() {
    for (m, l) in [(2u32, 0u32), (2, 1), (2, 3), (2, 5), (3, 2), (3, 4), (4, 3)] {
        let by_rank = harmonic_dimension_by_rank(m as usize + 1, l);
        let closed = degree_dimension(m, l).unwrap();
        assert_eq!(by_rank, closed, "dim H_{l} on S^{m}");
    }
}

/// Gram entries are inner products of normalized kernels; reproduce them by
/// exact quadrature of kernel products, the kernels themselves summed over
/// the explicit basis.
#[test]
fn gram_matches_quadrature_inner_products() {
    let big_l = 8u32;
    let epsilon = 0.2;
    let degree = shrink_degree(big_l, epsilon).unwrap();
    let mesh = candidate_mesh(2, 1.0 / (4.0 * degree as f64), None).unwrap();
    let points = approximate_fekete(2, degree, &mesh).unwrap();
    let spec = KernelSpec::new(2, big_l, epsilon).unwrap();
    let gram = build_gram(&points, &spec).unwrap();

    let rule = gauss_sphere_rule(big_l).unwrap();
    let cutoff = spec.cutoff();
    // kernel values b(x_q, z_i) through the basis-sum route only
    let mut kernel_at_rule = DMatrix::<f64>::zeros(rule.len(), points.len());
    for (q, x) in rule.nodes().iter().enumerate() {
        for (i, z) in points.points().iter().enumerate() {
            kernel_at_rule[(q, i)] = flatsphere::diagnostics::brute_force_kernel(
                2, big_l, &cutoff, 1, x, z,
            )
            .unwrap();
        }
    }
    let norm_sq = flatsphere::cutoff::kernel_norm_sq(&spec).unwrap();
    for i in 0..points.len() {
        for j in 0..points.len() {
            let mut inner = 0.0;
            for q in 0..rule.len() {
                inner += rule.weights()[q] * kernel_at_rule[(q, i)] * kernel_at_rule[(q, j)];
            }
            let oracle = inner / norm_sq;
            let built = gram.entries()[(i, j)];
            assert!(
                (oracle - built).abs() <= 1e-8,
                "entry ({i},{j}): quadrature {oracle} vs closed form {built}"
            );
        }
    }
}

/// Every flat function lies in the polynomial space of its kernel: expanding
/// against the basis by exact quadrature, coefficients beyond the cutoff
/// vanish and the retained mass is exactly one.
#[test]
fn flat_functions_live_inside_the_cutoff_space() {
    let big_l = 8u32;
    let degree = shrink_degree(big_l, 0.2).unwrap();
    let mesh = candidate_mesh(2, 1.0 / (4.0 * degree as f64), None).unwrap();
    let points = approximate_fekete(2, degree, &mesh).unwrap();
    let spec = KernelSpec::new(2, big_l, 0.2).unwrap();
    let system = build_system(&points, &spec, 1e-8).unwrap();

    let probe_degree = big_l + 2;
    let rule = gauss_sphere_rule(big_l).unwrap();
    assert!(rule.exactness_degree() >= big_l + probe_degree);
    let basis: Vec<Vec<f64>> = rule
        .nodes()
        .iter()
        .map(|x| eval_basis_upto(probe_degree, x).unwrap())
        .collect();
    let k_inside = ((big_l + 1) * (big_l + 1)) as usize;
    let k_total = ((probe_degree + 1) * (probe_degree + 1)) as usize;

    for i in [0usize, system.len() / 2, system.len() - 1] {
        let values: Vec<num_complex::Complex<f64>> = rule
            .nodes()
            .iter()
            .map(|x| system.evaluate(i, x).unwrap())
            .collect();
        let mut inside_mass = 0.0;
        #[allow(clippy::needless_range_loop)] // `a` switches roles below the cutoff
        for a in 0..k_total {
            let mut coeff = num_complex::Complex::new(0.0, 0.0);
            for q in 0..rule.len() {
                coeff += rule.weights()[q] * values[q] * basis[q][a];
            }
            if a < k_inside {
                inside_mass += coeff.norm_sqr();
            } else {
                assert!(
                    coeff.norm() <= 1e-8,
                    "function {i} leaks {} into basis index {a}",
                    coeff.norm()
                );
            }
        }
        assert!(
            (inside_mass - 1.0).abs() <= 1e-8,
            "function {i} has in-space mass {inside_mass}"
        );
    }
}
