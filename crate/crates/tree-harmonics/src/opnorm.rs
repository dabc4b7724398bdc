//! Operator-side numerics on truncated trees: the left regular
//! representation as a sparse operator between balls, largest-singular-value
//! estimation, the spectral sup-norm of radial symbols, coefficient
//! functions and their sphere-wise bounds, and free-set experiments.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::radial::{RadialFunction, TreeFunction};
use crate::spherical::transform_at;
use crate::words::{ball_size, ordinal_in_ball, BallIndex, Word};

/// Sparse realization of `rho(x)` mapping `l^2(ball N)` into
/// `l^2(ball N + L)`, `L` the maximal support length of `x`:
/// `(rho(x) v)(h) = sum_g x(g) v(g^{-1} h)`.
///
/// Stored column-major: for each domain ordinal the list of (codomain
/// ordinal, coefficient) pairs, so both the forward and the adjoint
/// matrix-vector product are single passes with a fixed reduction order.
///
/// # Examples
///
/// ```
/// use tree_harmonics::opnorm::{estimate_opnorm, gelfand_norm, TreeOperator};
/// use tree_harmonics::radial::RadialFunction;
/// use tree_harmonics::words::DEFAULT_BALL_CAP;
///
/// // The sphere-1 indicator for r = 2: spectral norm 2 sqrt(3), and the
/// // truncated operator norm approaches it from below.
/// let x = RadialFunction::from_real(2, &[0.0, 1.0]);
/// let spectral = gelfand_norm(&x, 512, 60);
/// assert!((spectral - 2.0 * 3.0f64.sqrt()).abs() <= 1e-9);
///
/// let op = TreeOperator::build_radial(&x, 6, DEFAULT_BALL_CAP).unwrap();
/// let truncated = estimate_opnorm(&op, 60, 0);
/// assert!(truncated <= spectral + 1e-9);
/// assert!(truncated >= 0.9 * spectral);
/// ```
pub struct TreeOperator {
    rank: u32,
    domain: BallIndex,
    codomain_radius: u32,
    codomain_len: usize,
    columns: Vec<Vec<(u32, Complex64)>>,
}

impl TreeOperator {
    /// Build `rho(x)` truncated to the ball of radius `radius`.
    pub fn build(x: &TreeFunction, radius: u32, cap: usize) -> Result<Self> {
        let rank = x.rank();
        let domain = BallIndex::enumerate(rank, radius, cap)?;
        let support: Vec<(Word, Complex64)> = x
            .support()
            .map(|(w, &v)| (w.clone(), v))
            .collect();
        let max_len = support.iter().map(|(w, _)| w.len()).max().unwrap_or(0);
        let codomain_radius = radius + max_len as u32;
        let codomain_len = ball_size(rank, codomain_radius)?;
        let codomain_len = usize::try_from(codomain_len)
            .map_err(|_| Error::Overflow("codomain ball size"))?;
        let columns = domain
            .words()
            .iter()
            .map(|u| {
                support
                    .iter()
                    .map(|(g, v)| {
                        let h = g.multiply(u);
                        (ordinal_in_ball(rank, &h) as u32, *v)
                    })
                    .collect()
            })
            .collect();
        Ok(TreeOperator {
            rank,
            domain,
            codomain_radius,
            codomain_len,
            columns,
        })
    }

    /// Build from a radial symbol by embedding its support spheres.
    pub fn build_radial(x: &RadialFunction, radius: u32, cap: usize) -> Result<Self> {
        let support_ball = BallIndex::enumerate(x.rank(), x.max_level() as u32, cap)?;
        let tree = x.embed_radial(&support_ball)?;
        TreeOperator::build(&tree, radius, cap)
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn domain(&self) -> &BallIndex {
        &self.domain
    }

    pub fn domain_len(&self) -> usize {
        self.domain.len()
    }

    pub fn codomain_len(&self) -> usize {
        self.codomain_len
    }

    pub fn codomain_radius(&self) -> u32 {
        self.codomain_radius
    }

    /// `y = A v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.domain.len());
        let mut y = vec![Complex64::ZERO; self.codomain_len];
        for (col, entries) in self.columns.iter().enumerate() {
            let value = v[col];
            if value == Complex64::ZERO {
                continue;
            }
            for &(row, coeff) in entries {
                y[row as usize] += coeff * value;
            }
        }
        y
    }

    /// `v = A* y`.
    pub fn apply_adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(y.len(), self.codomain_len);
        self.columns
            .iter()
            .map(|entries| {
                entries
                    .iter()
                    .map(|&(row, coeff)| coeff.conj() * y[row as usize])
                    .sum()
            })
            .collect()
    }

    /// Dense matrix restricted to the domain ball (rows and columns both
    /// indexed by the domain); used for the self-adjointness check.
    pub fn dense_on_domain(&self) -> Vec<Vec<Complex64>> {
        let n = self.domain.len();
        let mut m = vec![vec![Complex64::ZERO; n]; n];
        for (col, entries) in self.columns.iter().enumerate() {
            for &(row, coeff) in entries {
                if (row as usize) < n {
                    m[row as usize][col] += coeff;
                }
            }
        }
        m
    }
}

/// Estimate `||A||` as the square root of the largest eigenvalue of the
/// Gram operator `A* A`, via a seeded Krylov (Lanczos) iteration.
///
/// The iterate sequence of largest Ritz values is a nondecreasing
/// sequence of Rayleigh quotients of `A* A`, so the estimate converges to
/// the truncated norm from below and is deterministic given the seed.
pub fn estimate_opnorm(op: &TreeOperator, iters: usize, seed: u64) -> f64 {
    assert!(iters >= 1);
    let n = op.domain_len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    normalize(&mut v);

    // Standard three-term Lanczos on A*A; the tridiagonal's top eigenvalue
    // is read off after each step and kept as a running maximum.
    let mut alphas: Vec<f64> = Vec::with_capacity(iters);
    let mut betas: Vec<f64> = Vec::with_capacity(iters);
    let mut v_prev: Option<Vec<Complex64>> = None;
    let mut best = 0.0f64;
    for _ in 0..iters {
        let mut w = op.apply_adjoint(&op.apply(&v));
        let alpha = inner(&w, &v).re;
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= vi * alpha;
        }
        if let Some(prev) = &v_prev {
            let beta_prev = *betas.last().unwrap_or(&0.0);
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= pi * beta_prev;
            }
        }
        alphas.push(alpha);
        best = best.max(top_ritz(&alphas, &betas));
        let beta = norm(&w);
        if beta < 1e-13 * alpha.abs().max(1.0) {
            break;
        }
        for wi in w.iter_mut() {
            *wi /= beta;
        }
        betas.push(beta);
        v_prev = Some(std::mem::replace(&mut v, w));
    }
    best.max(0.0).sqrt()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(a: &mut [Complex64]) {
    let n = norm(a);
    for x in a.iter_mut() {
        *x /= n;
    }
}

/// Largest eigenvalue of the symmetric tridiagonal (alphas, betas) by
/// bisection on the Sturm sequence.
fn top_ritz(alphas: &[f64], betas: &[f64]) -> f64 {
    let k = alphas.len();
    let radius = alphas
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let left = if i > 0 { betas[i - 1].abs() } else { 0.0 };
            let right = betas.get(i).map(|b| b.abs()).unwrap_or(0.0);
            a.abs() + left + right
        })
        .fold(0.0, f64::max);
    let count_below = |x: f64| {
        // Number of eigenvalues below x (Sturm count).
        let mut count = 0usize;
        let mut d = 1.0f64;
        for i in 0..k {
            let b2 = if i > 0 { betas[i - 1] * betas[i - 1] } else { 0.0 };
            d = alphas[i] - x - if i > 0 { b2 / d } else { 0.0 };
            if d == 0.0 {
                d = -1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    };
    let (mut lo, mut hi) = (-radius - 1.0, radius + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) == k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-14 * radius.max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Sup of `|xhat|` over the tempered spectrum, via a coarse grid refined
/// by golden-section search around the best grid point.
pub fn gelfand_norm(x: &RadialFunction, grid: usize, refine_iters: usize) -> f64 {
    assert!(grid >= 2);
    let pi = std::f64::consts::PI;
    let objective = |t: f64| transform_at(x, t).norm();
    let mut best_t = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=grid {
        let t = pi * i as f64 / grid as f64;
        let v = objective(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    // Golden-section refinement on the bracketing interval.
    let step = pi / grid as f64;
    let (mut a, mut b) = (
        (best_t - step).max(0.0),
        (best_t + step).min(pi),
    );
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    for _ in 0..refine_iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    best.max(fc).max(fd)
}

/// Coefficient function `y(t) = <rho(t) xi, eta>` of the left regular
/// representation, for vectors supported on a common ball, truncated to
/// `|t| <= nmax`.
pub fn coefficient_function(
    xi: &[Complex64],
    eta: &[Complex64],
    ball: &BallIndex,
    nmax: usize,
) -> TreeFunction {
    assert_eq!(xi.len(), ball.len());
    assert_eq!(eta.len(), ball.len());
    let mut y = TreeFunction::new(ball.rank());
    // y(t) = sum_u xi(u) conj(eta(t u)): iterate support pairs, one term
    // per (u, h = t u).
    for (ui, xv) in xi.iter().enumerate() {
        if *xv == Complex64::ZERO {
            continue;
        }
        let u_inv = ball.word(ui).inverse();
        for (hi, ev) in eta.iter().enumerate() {
            if *ev == Complex64::ZERO {
                continue;
            }
            let t = ball.word(hi).multiply(&u_inv);
            if t.len() <= nmax {
                y.add(t, xv * ev.conj());
            }
        }
    }
    y
}

/// Report of the sphere-wise coefficient bound
/// `sum_{|t|=n} |y(t)|^2 <= (n+1)^2 ||xi||^2 ||eta||^2`.
#[derive(Clone, Debug)]
pub struct HaagerupReport {
    pub profile: Vec<f64>,
    pub bounds: Vec<f64>,
    /// Smallest `bound - profile` over the checked spheres.
    pub worst_margin: f64,
    pub violation: bool,
}

pub fn haagerup_check(
    xi: &[Complex64],
    eta: &[Complex64],
    ball: &BallIndex,
    nmax: usize,
) -> HaagerupReport {
    let y = coefficient_function(xi, eta, ball, nmax);
    let mut profile = y.sphere_l2_profile();
    profile.resize(nmax + 1, 0.0);
    let scale = xi.iter().map(|v| v.norm_sqr()).sum::<f64>()
        * eta.iter().map(|v| v.norm_sqr()).sum::<f64>();
    let bounds: Vec<f64> = (0..=nmax)
        .map(|n| ((n + 1) * (n + 1)) as f64 * scale)
        .collect();
    let mut worst_margin = f64::INFINITY;
    let mut violation = false;
    for n in 0..=nmax {
        let margin = bounds[n] - profile[n];
        worst_margin = worst_margin.min(margin);
        if margin < -1e-9 * bounds[n].max(1.0) {
            violation = true;
        }
    }
    HaagerupReport {
        profile,
        bounds,
        worst_margin,
        violation,
    }
}

/// Outcome of a truncated-norm experiment for `sum_t c_t rho(t)` over a
/// finite word set.
#[derive(Clone, Debug)]
pub struct LeinertReport {
    pub set_size: usize,
    pub radius: u32,
    pub estimated_norm: f64,
    pub coefficient_norm: f64,
    /// `estimated_norm / coefficient_norm`; stays bounded for free sets,
    /// grows along commuting families.
    pub ratio: f64,
    /// Randomized freeness verdict, when requested.
    pub free_checked: Option<bool>,
}

/// Randomized freeness oracle: evaluates reduced nontrivial formal words
/// over the set (up to the given syllable length) in the group and checks
/// they avoid the identity.
pub fn is_probably_free(words: &[Word], max_syllables: usize, seed: u64) -> bool {
    if words.iter().any(Word::is_empty) {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = words.len();
    for _ in 0..400 {
        let syllables = rng.gen_range(1..=max_syllables.max(1));
        let mut product = Word::identity();
        let mut prev: Option<(usize, i32)> = None;
        let mut exponent_sum = 0i32;
        for _ in 0..syllables {
            let index = rng.gen_range(0..k);
            let mut exp: i32 = *[-2, -1, 1, 2].choose(&mut rng).unwrap();
            // Reduced formal word: consecutive syllables use distinct
            // letters (merging same-letter syllables could cancel).
            if let Some((pi, _)) = prev {
                if pi == index && k > 1 {
                    continue;
                }
                if pi == index {
                    exp = if exponent_sum > 0 { 1 } else { -1 };
                }
            }
            let base = if exp > 0 {
                words[index].clone()
            } else {
                words[index].inverse()
            };
            for _ in 0..exp.unsigned_abs() {
                product = product.multiply(&base);
            }
            prev = Some((index, exp));
            exponent_sum += exp;
        }
        if prev.is_some() && product.is_empty() && exponent_sum != 0 {
            return false;
        }
    }
    true
}

/// Truncated operator-norm ratio for `sum_{t in E} c_t rho(t)`.
pub fn leinert_experiment(
    rank: u32,
    words: &[Word],
    coefficients: &[Complex64],
    radius: u32,
    iters: usize,
    seed: u64,
    cap: usize,
    check_free: bool,
) -> Result<LeinertReport> {
    if words.len() != coefficients.len() {
        return Err(Error::Precondition(
            "word and coefficient counts differ".into(),
        ));
    }
    let mut x = TreeFunction::new(rank);
    for (w, &c) in words.iter().zip(coefficients) {
        x.add(w.clone(), c);
    }
    let op = TreeOperator::build(&x, radius, cap)?;
    let estimated_norm = estimate_opnorm(&op, iters, seed);
    let coefficient_norm = coefficients
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let free_checked = check_free.then(|| is_probably_free(words, 4, seed ^ 0x5eed));
    Ok(LeinertReport {
        set_size: words.len(),
        radius,
        estimated_norm,
        coefficient_norm,
        ratio: estimated_norm / coefficient_norm,
        free_checked,
    })
}

/// Partial sums of `sum_n |B_n| |p_n(theta)|^{2+eps}` together with the
/// last level at which the increments were still not decaying.
#[derive(Clone, Debug)]
pub struct TailSummabilityReport {
    pub partial_sums: Vec<f64>,
    /// Largest `n` with increment ratio >= 1 (None when decay sets in
    /// immediately).
    pub last_nondecreasing: Option<usize>,
}

pub fn l2eps_tail(rank: u32, theta: f64, eps: f64, nmax: usize) -> Result<TailSummabilityReport> {
    if eps <= 0.0 {
        return Err(Error::Precondition("need eps > 0".into()));
    }
    let param = crate::spherical::SphericalParameter::real(rank, theta)?;
    let p = crate::spherical::spherical_values_gamma(rank, param.gamma(), nmax);
    let mut partial_sums = Vec::with_capacity(nmax + 1);
    let mut acc = 0.0f64;
    let mut prev_term: Option<f64> = None;
    let mut last_nondecreasing = None;
    for (n, &pn) in p.iter().enumerate() {
        let term = crate::words::sphere_size_f64(rank, n) * pn.abs().powf(2.0 + eps);
        if let Some(prev) = prev_term {
            // Ignore terms that are negligible against the running sum
            // (exact zeros of p_n perturbed by rounding).
            if prev > 1e-15 * acc.max(1e-300) && term >= prev {
                last_nondecreasing = Some(n);
            }
        }
        prev_term = Some(term);
        acc += term;
        partial_sums.push(acc);
    }
    Ok(TailSummabilityReport {
        partial_sums,
        last_nondecreasing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::DEFAULT_BALL_CAP;
    use approx::assert_relative_eq;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_symbol_gives_identity_operator() {
        let x = TreeFunction::delta(2, Word::identity());
        let op = TreeOperator::build(&x, 3, DEFAULT_BALL_CAP).unwrap();
        assert_eq!(op.codomain_radius(), 3);
        let n = op.domain_len();
        let mut v = vec![Complex64::ZERO; n];
        v[7] = c(2.5);
        let y = op.apply(&v);
        assert_eq!(y.len(), n);
        assert_eq!(y[7], c(2.5));
        assert_eq!(y.iter().filter(|z| **z != Complex64::ZERO).count(), 1);
        assert_relative_eq!(estimate_opnorm(&op, 10, 0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn translation_symbol_is_partial_isometry() {
        let g = Word::reduce(2, &[1]).unwrap();
        let x = TreeFunction::delta(2, g.clone());
        let op = TreeOperator::build(&x, 3, DEFAULT_BALL_CAP).unwrap();
        // rho(g) delta_e = delta_g.
        let mut v = vec![Complex64::ZERO; op.domain_len()];
        v[0] = c(1.0);
        let y = op.apply(&v);
        let gi = ordinal_in_ball(2, &g) as usize;
        assert_eq!(y[gi], c(1.0));
        let nrm = estimate_opnorm(&op, 30, 1);
        assert!(nrm <= 1.0 + 1e-10);
        assert!(nrm > 0.999);
    }

    #[test]
    fn build_rho_applied_to_delta_recovers_symbol() {
        let mut x = TreeFunction::new(2);
        x.set(Word::reduce(2, &[1, 2]).unwrap(), c(0.5));
        x.set(Word::reduce(2, &[-2]).unwrap(), Complex64::new(0.0, 1.0));
        let op = TreeOperator::build(&x, 2, DEFAULT_BALL_CAP).unwrap();
        let mut v = vec![Complex64::ZERO; op.domain_len()];
        v[0] = c(1.0);
        let y = op.apply(&v);
        for (w, &value) in x.support() {
            assert_eq!(y[ordinal_in_ball(2, w) as usize], value);
        }
    }

    // Brute-force convolution oracle over word pairs.
    #[test]
    fn matvec_matches_bruteforce_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let ball3 = BallIndex::enumerate(2, 3, DEFAULT_BALL_CAP).unwrap();
        let ball2 = BallIndex::enumerate(2, 2, DEFAULT_BALL_CAP).unwrap();
        let mut x = TreeFunction::new(2);
        for w in ball2.words() {
            if rng.gen::<f64>() < 0.5 {
                x.set(
                    w.clone(),
                    Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                );
            }
        }
        let op = TreeOperator::build(&x, 3, DEFAULT_BALL_CAP).unwrap();
        let v: Vec<Complex64> = (0..op.domain_len())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let fast = op.apply(&v);
        let codomain = BallIndex::enumerate(2, op.codomain_radius(), DEFAULT_BALL_CAP).unwrap();
        for (hi, h) in codomain.words().iter().enumerate() {
            let mut direct = Complex64::ZERO;
            for (g, &xg) in x.support() {
                let u = g.inverse().multiply(h);
                if let Some(ui) = ball3.index_of(&u) {
                    direct += xg * v[ui];
                }
            }
            assert!((fast[hi] - direct).norm() <= 1e-12, "h = {h}");
        }
    }

    #[test]
    fn radial_symbol_is_self_adjoint_on_domain() {
        let x = RadialFunction::from_real(2, &[0.3, -1.0, 0.25]);
        let op = TreeOperator::build_radial(&x, 3, DEFAULT_BALL_CAP).unwrap();
        let m = op.dense_on_domain();
        let n = m.len();
        for i in 0..n {
            for j in 0..n {
                assert_eq!(m[i][j], m[j][i].conj(), "({i}, {j})");
            }
        }
    }

    #[test]
    fn gelfand_norm_examples() {
        let d = RadialFunction::delta_level0(2);
        assert_relative_eq!(gelfand_norm(&d, 64, 40), 1.0, epsilon = 1e-12);
        let x = RadialFunction::from_real(2, &[0.0, 1.0]);
        assert_relative_eq!(gelfand_norm(&x, 512, 60), 2.0 * SQRT3, epsilon = 1e-9);
    }

    #[test]
    fn truncated_norm_below_gelfand_and_monotone() {
        let x = RadialFunction::from_real(2, &[0.0, 1.0]);
        let bound = gelfand_norm(&x, 512, 60);
        let mut prev = 0.0;
        for radius in [2u32, 4, 6] {
            let op = TreeOperator::build_radial(&x, radius, DEFAULT_BALL_CAP).unwrap();
            let est = estimate_opnorm(&op, 60, 0);
            assert!(est <= bound * (1.0 + 1e-9), "radius {radius}");
            assert!(est >= prev - 1e-9, "radius {radius}");
            prev = est;
        }
        assert!(prev > 0.9 * bound);
    }

    #[test]
    fn coefficient_function_examples() {
        let ball = BallIndex::enumerate(2, 2, DEFAULT_BALL_CAP).unwrap();
        let mut xi = vec![Complex64::ZERO; ball.len()];
        xi[0] = c(1.0);
        let y = coefficient_function(&xi, &xi, &ball, 4);
        assert_eq!(y.support_len(), 1);
        assert_eq!(y.value(&Word::identity()), c(1.0));

        let g = Word::reduce(2, &[-2, 1]).unwrap();
        let mut eta = vec![Complex64::ZERO; ball.len()];
        eta[ball.index_of(&g).unwrap()] = c(1.0);
        let y = coefficient_function(&xi, &eta, &ball, 4);
        assert_eq!(y.support_len(), 1);
        assert_eq!(y.value(&g), c(1.0));
    }

    #[test]
    fn coefficient_at_identity_is_inner_product() {
        let ball = BallIndex::enumerate(2, 2, DEFAULT_BALL_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xi: Vec<Complex64> = (0..ball.len())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let eta: Vec<Complex64> = (0..ball.len())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let y = coefficient_function(&xi, &eta, &ball, 4);
        let ip: Complex64 = xi.iter().zip(&eta).map(|(a, b)| a * b.conj()).sum();
        assert!((y.value(&Word::identity()) - ip).norm() <= 1e-12);
    }

    #[test]
    fn haagerup_small_cases() {
        let ball = BallIndex::enumerate(2, 3, DEFAULT_BALL_CAP).unwrap();
        let mut xi = vec![Complex64::ZERO; ball.len()];
        xi[0] = c(1.0);
        let report = haagerup_check(&xi, &xi, &ball, 6);
        assert!(!report.violation);
        assert_eq!(report.profile[0], 1.0);

        // y = delta_t with |t| = n: 1 <= (n+1)^2.
        let t = Word::reduce(2, &[1, 2, 1]).unwrap();
        let mut eta = vec![Complex64::ZERO; ball.len()];
        eta[ball.index_of(&t).unwrap()] = c(1.0);
        let report = haagerup_check(&xi, &eta, &ball, 6);
        assert!(!report.violation);
        assert_eq!(report.profile[3], 1.0);
        assert_eq!(report.bounds[3], 16.0);
    }

    #[test]
    fn haagerup_randomized_sparse_trials() {
        for rank in [2u32, 3] {
            let ball = BallIndex::enumerate(rank, 5, DEFAULT_BALL_CAP).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(100 + rank as u64);
            for _ in 0..50 {
                let mut xi = vec![Complex64::ZERO; ball.len()];
                let mut eta = vec![Complex64::ZERO; ball.len()];
                for _ in 0..30 {
                    xi[rng.gen_range(0..ball.len())] =
                        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                    eta[rng.gen_range(0..ball.len())] =
                        Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
                }
                let report = haagerup_check(&xi, &eta, &ball, 8);
                assert!(!report.violation);
            }
        }
    }

    #[test]
    fn freeness_oracle() {
        let a = Word::reduce(2, &[1]).unwrap();
        let b = Word::reduce(2, &[2]).unwrap();
        assert!(is_probably_free(&[a.clone(), b.clone()], 4, 0));
        // {ab, ab^2, ab^3} is free.
        let free_family: Vec<Word> = (1..=3)
            .map(|k| {
                let mut raw = vec![1i8];
                raw.extend(std::iter::repeat(2i8).take(k));
                Word::reduce(2, &raw).unwrap()
            })
            .collect();
        assert!(is_probably_free(&free_family, 4, 0));
        // {a, a^2} is not free.
        let aa = a.multiply(&a);
        assert!(!is_probably_free(&[a.clone(), aa], 4, 0));
    }

    #[test]
    fn leinert_singletons() {
        let report = leinert_experiment(
            2,
            &[Word::identity()],
            &[c(1.0)],
            4,
            40,
            0,
            DEFAULT_BALL_CAP,
            false,
        )
        .unwrap();
        assert_relative_eq!(report.ratio, 1.0, epsilon = 1e-10);

        let report = leinert_experiment(
            2,
            &[Word::reduce(2, &[1]).unwrap()],
            &[c(1.0)],
            4,
            40,
            0,
            DEFAULT_BALL_CAP,
            true,
        )
        .unwrap();
        assert!(report.ratio <= 1.0 + 1e-10);
        assert_eq!(report.free_checked, Some(true));
    }

    #[test]
    fn leinert_free_vs_abelian_growth() {
        // Free family {a b^k}: ratio stays bounded by a small constant.
        // Commuting family {a^k}: the normalized norm grows with k.
        let mut free_ratios = Vec::new();
        let mut abelian_ratios = Vec::new();
        for k in [2usize, 4, 6] {
            let free: Vec<Word> = (1..=k)
                .map(|j| {
                    let mut raw = vec![1i8];
                    raw.extend(std::iter::repeat(2i8).take(j));
                    Word::reduce(2, &raw).unwrap()
                })
                .collect();
            let coefs = vec![c(1.0); k];
            let report =
                leinert_experiment(2, &free, &coefs, 8, 80, 0, DEFAULT_BALL_CAP, true).unwrap();
            assert_eq!(report.free_checked, Some(true));
            free_ratios.push(report.ratio);

            let powers: Vec<Word> = (1..=k)
                .map(|j| Word::reduce(2, &vec![1i8; j]).unwrap())
                .collect();
            let report =
                leinert_experiment(2, &powers, &coefs, 10, 80, 0, DEFAULT_BALL_CAP, false).unwrap();
            abelian_ratios.push(report.ratio);
        }
        // Free ratios bounded (well under 2 * sqrt of max), abelian grows.
        assert!(free_ratios.iter().all(|&r| r <= 2.5));
        assert!(abelian_ratios[2] > abelian_ratios[0]);
        assert!(abelian_ratios[2] > free_ratios[2]);
    }

    #[test]
    fn l2eps_tail_reports() {
        // theta = pi/2: odd spherical values vanish, even terms decay.
        let report = l2eps_tail(2, std::f64::consts::FRAC_PI_2, 1.0, 80).unwrap();
        assert!(report.partial_sums.windows(2).all(|p| p[1] >= p[0]));
        assert!(report.last_nondecreasing.unwrap_or(0) < 40);

        // theta = 0 matches the Xi^3 tail behaviour (exponent 3 overall).
        let report = l2eps_tail(2, 0.0, 1.0, 60).unwrap();
        let xi_sums = crate::radial::xi_l3_tail(2, 60);
        for (a, b) in report.partial_sums.iter().zip(&xi_sums) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
        assert!(l2eps_tail(2, 0.5, 0.0, 10).is_err());
    }
}
