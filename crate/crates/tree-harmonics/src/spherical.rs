//! Spherical functions on `F_r`, the spherical transform of radial
//! functions, and Plancherel inversion.
//!
//! The spectral variable is an angle: real `theta` in `[0, pi]` for the
//! tempered spectrum, plus two imaginary segments attached at the
//! endpoints for the full radial Fourier-Stieltjes spectrum. The
//! eigenvalue of the sphere-1 averaging operator at a parameter is
//! `gamma = (sqrt(2r-1)/r) cos(theta_c)` with `theta_c` the complex angle
//! encoded by the variant; `gamma` is real on the whole parameter set.
//!
//! For `r = 2` the Plancherel density has the closed form
//! `6 / (pi (4 + cot^2 theta))`; for general rank all integration goes
//! through a Gauss rule built from the three-term recurrence
//! (Golub-Welsch on the Jacobi matrix of the orthonormalized spherical
//! sequence). Both paths must agree for `r = 2` and are tested against
//! each other.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::radial::RadialFunction;
use crate::words::sphere_size_f64;

/// Half-length of the imaginary segments: `ln(2r-1)/2`.
pub fn segment_max(rank: u32) -> f64 {
    ((2 * rank - 1) as f64).ln() / 2.0
}

/// A point of the spectral parameter set `J_1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ParamKind {
    /// `theta` in `[0, pi]`.
    Real(f64),
    /// `theta = i zeta`, `zeta` in `[0, ln(2r-1)/2]`.
    LowerSegment(f64),
    /// `theta = pi + i zeta`, `zeta` in `[0, ln(2r-1)/2]`.
    UpperSegment(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalParameter {
    rank: u32,
    kind: ParamKind,
}

impl SphericalParameter {
    pub fn new(rank: u32, kind: ParamKind) -> Result<Self> {
        if rank < 2 {
            return Err(Error::RankOutOfRange(rank));
        }
        let zmax = segment_max(rank);
        let tol = 1e-12;
        let ok = match kind {
            ParamKind::Real(theta) => (-tol..=std::f64::consts::PI + tol).contains(&theta),
            ParamKind::LowerSegment(zeta) | ParamKind::UpperSegment(zeta) => {
                (-tol..=zmax + tol).contains(&zeta)
            }
        };
        if !ok {
            return Err(Error::ParameterOutOfRange(format!("{kind:?}")));
        }
        Ok(SphericalParameter { rank, kind })
    }

    pub fn real(rank: u32, theta: f64) -> Result<Self> {
        SphericalParameter::new(rank, ParamKind::Real(theta))
    }

    pub fn lower(rank: u32, zeta: f64) -> Result<Self> {
        SphericalParameter::new(rank, ParamKind::LowerSegment(zeta))
    }

    pub fn upper(rank: u32, zeta: f64) -> Result<Self> {
        SphericalParameter::new(rank, ParamKind::UpperSegment(zeta))
    }

    /// The unit of the dual hypergroup: the parameter whose spherical
    /// sequence is constant 1 (trivial character).
    pub fn trivial_character(rank: u32) -> Self {
        SphericalParameter {
            rank,
            kind: ParamKind::LowerSegment(segment_max(rank)),
        }
    }

    /// The sign character (`p_n = (-1)^n`).
    pub fn sign_character(rank: u32) -> Self {
        SphericalParameter {
            rank,
            kind: ParamKind::UpperSegment(segment_max(rank)),
        }
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn kind(&self) -> ParamKind {
        self.kind
    }

    /// The complex angle encoded by the variant.
    pub fn theta_complex(&self) -> Complex64 {
        match self.kind {
            ParamKind::Real(theta) => Complex64::new(theta, 0.0),
            ParamKind::LowerSegment(zeta) => Complex64::new(0.0, zeta),
            ParamKind::UpperSegment(zeta) => Complex64::new(std::f64::consts::PI, zeta),
        }
    }

    /// Imaginary part of the angle (0 on the real spectrum).
    pub fn imag(&self) -> f64 {
        match self.kind {
            ParamKind::Real(_) => 0.0,
            ParamKind::LowerSegment(zeta) | ParamKind::UpperSegment(zeta) => zeta,
        }
    }

    /// Eigenvalue of the sphere-1 averaging operator:
    /// `gamma = (sqrt(2r-1)/r) cos(theta_c)`, real for every parameter in
    /// `J_1`. The lower-segment endpoint gives `gamma = 1`.
    pub fn gamma(&self) -> f64 {
        let r = self.rank as f64;
        let scale = (2.0 * r - 1.0).sqrt() / r;
        match self.kind {
            ParamKind::Real(theta) => scale * theta.cos(),
            ParamKind::LowerSegment(zeta) => scale * zeta.cosh(),
            ParamKind::UpperSegment(zeta) => -scale * zeta.cosh(),
        }
    }
}

/// Spherical sequence `p_0, p_1, ...` at a parameter: `p_0 = 1`,
/// `p_1 = gamma`, `p_{n+1} = (2r gamma p_n - p_{n-1}) / (2r-1)`.
#[derive(Clone, Debug)]
pub struct SphericalSequence {
    pub param: SphericalParameter,
    pub values: Vec<f64>,
}

/// Evaluate `p_0..=p_nmax` from the eigenvalue `gamma`.
///
/// Internally a rescaled recurrence for `u_n = p_n (2r-1)^{n/2}` is used;
/// for real parameters `u_n` stays polynomially bounded, which keeps the
/// sequence accurate far beyond the point where `p_n` itself underflows
/// toward zero.
pub fn spherical_values_gamma(rank: u32, gamma: f64, nmax: usize) -> Vec<f64> {
    let r = rank as f64;
    let q = 2.0 * r - 1.0;
    let sq = q.sqrt();
    let c = 2.0 * r * gamma / sq;
    let mut out = Vec::with_capacity(nmax + 1);
    let mut u_prev = 1.0; // u_0
    let mut u = gamma * sq; // u_1
    out.push(1.0);
    if nmax == 0 {
        return out;
    }
    out.push(u / sq);
    let half_ln_q = q.ln() / 2.0;
    for n in 1..nmax {
        let u_next = c * u - u_prev;
        u_prev = u;
        u = u_next;
        out.push(u * (-(n as f64 + 1.0) * half_ln_q).exp());
    }
    out
}

pub fn spherical_values(param: &SphericalParameter, nmax: usize) -> SphericalSequence {
    SphericalSequence {
        param: *param,
        values: spherical_values_gamma(param.rank(), param.gamma(), nmax),
    }
}

/// Largest absolute residual of the three-term recurrence over a computed
/// sequence, relative to the local scale.
pub fn recurrence_residual(rank: u32, gamma: f64, values: &[f64]) -> f64 {
    let r = rank as f64;
    let q = 2.0 * r - 1.0;
    let mut worst = 0.0f64;
    for n in 1..values.len().saturating_sub(1) {
        let predicted = (2.0 * r * gamma * values[n] - values[n - 1]) / q;
        let scale = values[n - 1]
            .abs()
            .max(values[n].abs())
            .max(values[n + 1].abs())
            .max(1e-300);
        worst = worst.max((values[n + 1] - predicted).abs() / scale);
    }
    worst
}

/// Spherical transform of a radial function at a list of parameters:
/// `xhat(theta) = sum_n x(n) |B_n| p_n(theta)`.
pub fn transform(x: &RadialFunction, params: &[SphericalParameter]) -> Vec<Complex64> {
    let nmax = x.max_level();
    params
        .iter()
        .map(|param| {
            let p = spherical_values_gamma(x.rank(), param.gamma(), nmax);
            (0..=nmax)
                .map(|n| x.value(n) * sphere_size_f64(x.rank(), n) * p[n])
                .sum()
        })
        .collect()
}

/// Transform at a single real angle.
pub fn transform_at(x: &RadialFunction, theta: f64) -> Complex64 {
    let nmax = x.max_level();
    let r = x.rank() as f64;
    let gamma = (2.0 * r - 1.0).sqrt() / r * theta.cos();
    let p = spherical_values_gamma(x.rank(), gamma, nmax);
    (0..=nmax)
        .map(|n| x.value(n) * sphere_size_f64(x.rank(), n) * p[n])
        .sum()
}

///// Closed-form Plancherel density for `r = 2`: `6 / (pi (4 + cot^2 theta))`,
/// evaluated as `6 sin^2(theta) / (pi (4 - 3 cos^2 theta))` which extends
/// continuously by 0 to the endpoints.
pub fn plancherel_density_r2(theta: f64) -> f64 {
    let s = theta.sin();
    let c = theta.cos();
    6.0 * s * s / (std::f64::consts::PI * (4.0 - 3.0 * c * c))
}

/// Gauss quadrature rule for the Plancherel measure of rank `r`.
///
/// Nodes are angles in `(0, pi)` in increasing order; weights are positive
/// and sum to 1. Built by Golub-Welsch: the spherical sequence, after
/// normalization by `sqrt(|B_n|)`, is orthonormal in the eigenvalue
/// variable `gamma`, with Jacobi coefficients `a_0 = 1/sqrt(2r)` and
/// `a_n = sqrt(2r-1)/(2r)` off the (zero) diagonal.
#[derive(Clone, Debug)]
pub struct GaussRule {
    rank: u32,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Stability cap for the Jacobi eigenproblem size.
pub const MAX_QUADRATURE_SIZE: usize = 4096;

/// Build the `k`-point Gauss rule for the Plancherel (orthogonality)
/// measure of the spherical sequence, via Golub-Welsch on the Jacobi
/// matrix of the orthonormalized recurrence.
///
/// # Examples
///
/// A transform-inversion round trip through the rule:
///
/// ```
/// use num_complex::Complex64;
/// use tree_harmonics::radial::RadialFunction;
/// use tree_harmonics::spherical::{gauss_rule, invert, transform, SphericalParameter};
///
/// let x = RadialFunction::from_real(2, &[1.0, -0.5, 0.25]);
/// let rule = gauss_rule(2, 16).unwrap();
/// let params: Vec<_> = rule
///     .nodes()
///     .iter()
///     .map(|&t| SphericalParameter::real(2, t).unwrap())
///     .collect();
/// let samples = transform(&x, &params);
/// let back = invert(&samples, &rule, 2).unwrap();
/// for (a, b) in x.values().iter().zip(back.values()) {
///     assert!((a - b).norm() <= 1e-12);
/// }
/// ```
pub fn gauss_rule(rank: u32, k: usize) -> Result<GaussRule> {
    if rank < 2 {
        return Err(Error::RankOutOfRange(rank));
    }
    if k == 0 {
        return Err(Error::QuadratureSize(k, "need at least one node"));
    }
    if k > MAX_QUADRATURE_SIZE {
        return Err(Error::QuadratureSize(k, "exceeds stability cap"));
    }
    let r = rank as f64;
    let q = 2.0 * r - 1.0;
    let mut jacobi = DMatrix::<f64>::zeros(k, k);
    for i in 0..k.saturating_sub(1) {
        let a = if i == 0 {
            1.0 / (2.0 * r).sqrt()
        } else {
            q.sqrt() / (2.0 * r)
        };
        jacobi[(i, i + 1)] = a;
        jacobi[(i + 1, i)] = a;
    }
    let eigen = SymmetricEigen::new(jacobi);
    let scale = q.sqrt() / r;
    let mut pairs: Vec<(f64, f64)> = (0..k)
        .map(|j| {
            let gamma = eigen.eigenvalues[j];
            let theta = (gamma / scale).clamp(-1.0, 1.0).acos();
            let w = eigen.eigenvectors[(0, j)].powi(2);
            (theta, w)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(GaussRule {
        rank,
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

impl GaussRule {
    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `integral of f dm` approximated by the rule.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }

    pub fn integrate_complex(&self, mut f: impl FnMut(f64) -> Complex64) -> Complex64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| f(t) * w)
            .sum()
    }

    /// Table `P[n][k] = p_n(theta_k)` for `n <= nmax`.
    pub fn spherical_table(&self, nmax: usize) -> Vec<Vec<f64>> {
        let r = self.rank as f64;
        let scale = (2.0 * r - 1.0).sqrt() / r;
        let mut table = vec![vec![0.0; self.len()]; nmax + 1];
        for (k, &theta) in self.nodes.iter().enumerate() {
            let p = spherical_values_gamma(self.rank, scale * theta.cos(), nmax);
            for (n, row) in table.iter_mut().enumerate() {
                row[k] = p[n];
            }
        }
        table
    }
}

/// Plancherel inversion from transform samples at the rule's nodes:
/// `x(n) = sum_k w_k p_n(theta_k) xhat(theta_k)`.
///
/// Exact (to rounding) whenever the radial support is below the rule size,
/// since the integrand then has polynomial degree `< 2K` in `gamma`.
pub fn invert(samples: &[Complex64], rule: &GaussRule, nmax: usize) -> Result<RadialFunction> {
    if samples.len() != rule.len() {
        return Err(Error::Precondition(format!(
            "got {} samples for a {}-node rule",
            samples.len(),
            rule.len()
        )));
    }
    if rule.len() <= nmax {
        return Err(Error::QuadratureSize(
            rule.len(),
            "rule size must exceed the target support",
        ));
    }
    let table = rule.spherical_table(nmax);
    let values = (0..=nmax)
        .map(|n| {
            rule.weights()
                .iter()
                .zip(samples)
                .zip(&table[n])
                .map(|((&w, &s), &p)| s * (w * p))
                .sum()
        })
        .collect();
    Ok(RadialFunction::new(rule.rank(), values))
}

/// Invert a transform given as a callable, sampling it at the rule nodes.
pub fn invert_fn(
    xhat: impl Fn(f64) -> Complex64,
    rule: &GaussRule,
    nmax: usize,
) -> Result<RadialFunction> {
    let samples: Vec<Complex64> = rule.nodes().iter().map(|&t| xhat(t)).collect();
    invert(&samples, rule, nmax)
}

/// Residual of the Parseval identity
/// `sum_n |B_n| x(n) conj(y(n)) = integral xhat conj(yhat) dm`.
pub fn parseval_check(x: &RadialFunction, y: &RadialFunction, rule: &GaussRule) -> Result<f64> {
    if x.rank() != y.rank() {
        return Err(Error::RankMismatch(x.rank(), y.rank()));
    }
    let nmax = x.max_level().max(y.max_level());
    let direct: Complex64 = (0..=nmax)
        .map(|n| x.value(n) * y.value(n).conj() * sphere_size_f64(x.rank(), n))
        .sum();
    let table = rule.spherical_table(nmax);
    let spectral: Complex64 = (0..rule.len())
        .map(|k| {
            let xhat: Complex64 = (0..=nmax)
                .map(|n| x.value(n) * sphere_size_f64(x.rank(), n) * table[n][k])
                .sum();
            let yhat: Complex64 = (0..=nmax)
                .map(|n| y.value(n) * sphere_size_f64(y.rank(), n) * table[n][k])
                .sum();
            xhat * yhat.conj() * rule.weights()[k]
        })
        .sum();
    Ok((direct - spectral).norm())
}
