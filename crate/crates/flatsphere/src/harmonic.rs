//! Spherical-harmonic arithmetic on S^m.
//!
//! Provides Laplace-Beltrami eigenvalues, dimensions of the harmonic spaces
//! H_l and their sums E_L, zonal kernels through the addition theorem
//! (Gegenbauer / Legendre polynomials), and an explicit L²-orthonormal real
//! basis on S² for Vandermonde assembly and brute-force oracles.
//!
//! Spaces are indexed by polynomial degree L (frequency), never by eigenvalue
//! threshold, so `space_dimension(m, L)` grows like L^m.

use crate::error::{Error, Result};

/// Slack for unit-norm and |t| <= 1 domain checks, to absorb rounding in
/// dot products of unit vectors.
pub(crate) const DOMAIN_SLACK: f64 = 1e-12;

/// Parameters of the spherical polynomial space E_L on S^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarmonicSpace {
    m: u32,
    degree_cutoff: u32,
}

impl HarmonicSpace {
    /// A space of spherical polynomials of degree at most `degree_cutoff` on S^m.
    pub fn new(m: u32, degree_cutoff: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain(format!("sphere dimension m must be >= 2, got {m}")));
        }
        Ok(HarmonicSpace { m, degree_cutoff })
    }

    pub fn sphere_dim(&self) -> u32 {
        self.m
    }

    pub fn degree_cutoff(&self) -> u32 {
        self.degree_cutoff
    }

    /// dim E_L = sum of dim H_l for l <= L.
    pub fn dimension(&self) -> Result<usize> {
        space_dimension(self.m, self.degree_cutoff)
    }

    /// Laplace-Beltrami eigenvalue of H_l members.
    pub fn eigenvalue(&self, l: u32) -> u64 {
        eigenvalue(self.m, l)
    }
}

/// Eigenvalue l(l + m - 1) of the degree-l harmonics on S^m.
pub fn eigenvalue(m: u32, l: u32) -> u64 {
    let l = l as u64;
    l * (l + m as u64 - 1)
}

fn binomial_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc.checked_mul((n - k + i) as u128)?;
        acc /= i as u128;
    }
    Some(acc)
}

/// Dimension of the space H_l of degree-l spherical harmonics on S^m,
/// (2l + m - 1)(l + m - 2)! / (l! (m-1)!).
pub fn degree_dimension(m: u32, l: u32) -> Result<usize> {
    if m < 2 {
        return Err(Error::domain(format!("sphere dimension m must be >= 2, got {m}")));
    }
    let (m, l) = (m as u64, l as u64);
    // dim H_l = C(l+m, l) - C(l+m-2, l-2), the harmonic slice of the
    // homogeneous polynomials in m+1 variables.
    let whole = binomial_u128(l + m, l).ok_or_else(|| Error::Overflow("degree dimension".into()))?;
    let lower = if l >= 2 {
        binomial_u128(l + m - 2, l - 2).ok_or_else(|| Error::Overflow("degree dimension".into()))?
    } else {
        0
    };
    usize::try_from(whole - lower).map_err(|_| Error::Overflow("degree dimension".into()))
}

/// Dimension k_L of E_L: the sum of dim H_l over l <= L. Equals (L+1)^2 on S².
pub fn space_dimension(m: u32, degree_cutoff: u32) -> Result<usize> {
    let mut total: usize = 0;
    for l in 0..=degree_cutoff {
        total = total
            .checked_add(degree_dimension(m, l)?)
            .ok_or_else(|| Error::Overflow("space dimension".into()))?;
    }
    Ok(total)
}

/// Surface area of S^m: 2 pi^{(m+1)/2} / Gamma((m+1)/2).
pub fn surface_area(m: u32) -> f64 {
    2.0 * std::f64::consts::PI.powf((m as f64 + 1.0) / 2.0) / gamma_half(m + 1)
}

/// Gamma(n/2) for positive integer n.
fn gamma_half(n: u32) -> f64 {
    let mut acc = if n.is_multiple_of(2) { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < n as f64 / 2.0 - 0.25 {
        acc *= x;
        x += 1.0;
    }
    acc
}

fn check_t(t: f64) -> Result<f64> {
    if !(t.abs() <= 1.0 + DOMAIN_SLACK) {
        return Err(Error::domain(format!("inner product {t} outside [-1, 1]")));
    }
    Ok(t.clamp(-1.0, 1.0))
}

/// Gegenbauer polynomial C_l^alpha(t) by the forward three-term recurrence.
///
/// alpha = 0 is taken in the Chebyshev limit, returning T_l(t).
pub fn gegenbauer(alpha: f64, l: u32, t: f64) -> Result<f64> {
    if alpha < 0.0 {
        return Err(Error::domain(format!("gegenbauer index alpha must be >= 0, got {alpha}")));
    }
    let t = check_t(t)?;
    if l == 0 {
        return Ok(1.0);
    }
    let mut prev = 1.0;
    let mut curr = if alpha == 0.0 { t } else { 2.0 * alpha * t };
    for k in 2..=l {
        let k = k as f64;
        let next = if alpha == 0.0 {
            2.0 * t * curr - prev
        } else {
            (2.0 * t * (k + alpha - 1.0) * curr - (k + 2.0 * alpha - 2.0) * prev) / k
        };
        prev = curr;
        curr = next;
    }
    Ok(curr)
}

/// C_l^alpha(1) = product_{j=1..l} (j + 2 alpha - 1)/j, the normalizer of the
/// zonal kernels; equals 1 in the Chebyshev limit alpha = 0.
pub fn gegenbauer_at_one(alpha: f64, l: u32) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    let mut acc = 1.0;
    for j in 1..=l {
        let j = j as f64;
        acc *= (j + 2.0 * alpha - 1.0) / j;
    }
    acc
}

/// Zonal kernel of H_l on S^m evaluated at the inner product t:
/// Z_l(t) = (dim H_l / omega_m) C_l^{(m-1)/2}(t) / C_l^{(m-1)/2}(1).
///
/// By the addition theorem, Z_l(z.w) equals the sum of phi(z) phi(w) over any
/// orthonormal basis phi of H_l, so Z_l(1) = dim H_l / omega_m.
pub fn zonal_kernel(m: u32, l: u32, t: f64) -> Result<f64> {
    let t = check_t(t)?;
    let alpha = (m as f64 - 1.0) / 2.0;
    let dim = degree_dimension(m, l)? as f64;
    Ok(dim / surface_area(m) * gegenbauer(alpha, l, t)? / gegenbauer_at_one(alpha, l))
}

/// Zonal expansion sum_l c_l Z_l(., .) with nonnegative degree weights c_l,
/// flattened to a single stable recurrence pass per evaluation.
#[derive(Debug, Clone)]
pub struct ZonalKernelTable {
    m: u32,
    coefficients: Vec<f64>,
    surface_area: f64,
    /// c_l * dim H_l / (omega_m * C_l(1)), the weights applied to raw
    /// Gegenbauer values.
    weights: Vec<f64>,
}

impl ZonalKernelTable {
    /// Build the table from per-degree weights `coefficients[l] = c_l`.
    pub fn new(m: u32, coefficients: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::domain(format!("sphere dimension m must be >= 2, got {m}")));
        }
        if coefficients.iter().any(|&c| !(c >= 0.0)) {
            return Err(Error::domain("zonal coefficients must be nonnegative"));
        }
        let omega = surface_area(m);
        let alpha = (m as f64 - 1.0) / 2.0;
        let weights = coefficients
            .iter()
            .enumerate()
            .map(|(l, &c)| {
                Ok(c * degree_dimension(m, l as u32)? as f64 / (omega * gegenbauer_at_one(alpha, l as u32)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ZonalKernelTable { m, coefficients, surface_area: omega, weights })
    }

    pub fn sphere_dim(&self) -> u32 {
        self.m
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn surface_area(&self) -> f64 {
        self.surface_area
    }

    /// Polynomial degree of the kernel: the largest l with c_l != 0.
    pub fn degree(&self) -> Option<u32> {
        self.coefficients
            .iter()
            .rposition(|&c| c != 0.0)
            .map(|l| l as u32)
    }

    /// Kernel value at the diagonal, sum_l c_l dim H_l / omega_m.
    pub fn diagonal(&self) -> f64 {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(l, &c)| c * degree_dimension(self.m, l as u32).unwrap_or(0) as f64)
            .sum::<f64>()
            / self.surface_area
    }

    /// Evaluate the kernel at inner product t, one recurrence pass over degrees.
    pub fn eval(&self, t: f64) -> Result<f64> {
        let t = check_t(t)?;
        Ok(self.eval_clamped(t))
    }

    /// Evaluation without the domain check, for hot loops over dot products
    /// of vectors already known to be unit.
    pub(crate) fn eval_clamped(&self, t: f64) -> f64 {
        let t = t.clamp(-1.0, 1.0);
        let alpha = (self.m as f64 - 1.0) / 2.0;
        let mut acc = 0.0;
        let mut prev = 1.0; // C_0
        let mut curr = 2.0 * alpha * t; // C_1
        for (l, &w) in self.weights.iter().enumerate() {
            let value = match l {
                0 => 1.0,
                1 => curr,
                _ => {
                    let k = l as f64;
                    let next = (2.0 * t * (k + alpha - 1.0) * curr - (k + 2.0 * alpha - 2.0) * prev) / k;
                    prev = curr;
                    curr = next;
                    next
                }
            };
            acc += w * value;
        }
        acc
    }
}

/// Values of the dim H_l functions of an L²-orthonormal real basis of H_l
/// at a unit vector of S². Ordered by azimuthal index -l..l: sine terms,
/// zonal term, cosine terms.
pub fn real_basis_eval(m: u32, l: u32, point: &[f64]) -> Result<Vec<f64>> {
    if m != 2 {
        return Err(Error::UnsupportedDimension { required: 2, got: m });
    }
    let all = eval_basis_upto(l, point)?;
    let lo = (l as usize) * (l as usize);
    Ok(all[lo..].to_vec())
}

/// Values of the full orthonormal basis of E_L on S² at a unit vector,
/// ordered by degree l = 0..=L, azimuthal index -l..l within each degree.
/// Length (L+1)^2.
pub fn eval_basis_upto(degree_cutoff: u32, point: &[f64]) -> Result<Vec<f64>> {
    if point.len() != 3 {
        return Err(Error::domain(format!("expected a 3-vector, got length {}", point.len())));
    }
    let norm = (point[0] * point[0] + point[1] * point[1] + point[2] * point[2]).sqrt();
    if (norm - 1.0).abs() > DOMAIN_SLACK {
        return Err(Error::domain(format!("point is not on the unit sphere (|p| = {norm})")));
    }
    let lmax = degree_cutoff as usize;
    let cos_t = point[2].clamp(-1.0, 1.0);
    let sin_t = point[0].hypot(point[1]);
    let phi = point[1].atan2(point[0]);

    // q[l][m] = fully normalized associated Legendre, so that
    // Y_{l,0} = q[l][0] and Y_{l,+-m} = sqrt(2) q[l][m] (cos|sin)(m phi).
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut q = vec![0.0f64; (lmax + 1) * (lmax + 2) / 2];
    q[0] = 0.25 / std::f64::consts::PI;
    q[0] = q[0].sqrt();
    for m in 1..=lmax {
        q[idx(m, m)] = sin_t * ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * q[idx(m - 1, m - 1)];
    }
    for m in 0..lmax {
        q[idx(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * cos_t * q[idx(m, m)];
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let mf = m as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            q[idx(l, m)] = a * (cos_t * q[idx(l - 1, m)] - b * q[idx(l - 2, m)]);
        }
    }

    let sqrt2 = std::f64::consts::SQRT_2;
    let mut out = vec![0.0f64; (lmax + 1) * (lmax + 1)];
    for l in 0..=lmax {
        let base = l * l + l;
        out[base] = q[idx(l, 0)];
        for m in 1..=l {
            let (s, c) = (mf64(m) * phi).sin_cos();
            out[base - m] = sqrt2 * q[idx(l, m)] * s;
            out[base + m] = sqrt2 * q[idx(l, m)] * c;
        }
    }
    Ok(out)
}

fn mf64(m: usize) -> f64 {
    m as f64
}
