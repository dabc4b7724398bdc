//! Function spaces on the truncated tree: finitely supported tree
//! functions, level-indexed radial functions, the radialization averaging
//! map, weighted norms, and the `l^3` tail sums of the extremal radial
//! function.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::words::{sphere_size_f64, BallIndex, Word};

/// Finitely supported complex function on `F_r`, keyed by reduced words.
///
/// Iteration order is shortlex, so all reductions over the support are
/// deterministic.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeFunction {
    rank: u32,
    values: BTreeMap<Word, Complex64>,
}

/// Complex sequence `x(0), x(1), ...` representing the radial function
/// `t -> x(|t|)`. Stored level-indexed; the tree is never materialized
/// unless [`TreeFunction::embed_radial`] is called.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialFunction {
    rank: u32,
    values: Vec<Complex64>,
}

impl TreeFunction {
    pub fn new(rank: u32) -> Self {
        TreeFunction {
            rank,
            values: BTreeMap::new(),
        }
    }

    /// Point mass at `w`.
    pub fn delta(rank: u32, w: Word) -> Self {
        let mut f = TreeFunction::new(rank);
        f.set(w, Complex64::new(1.0, 0.0));
        f
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn set(&mut self, w: Word, value: Complex64) {
        if value == Complex64::ZERO {
            self.values.remove(&w);
        } else {
            self.values.insert(w, value);
        }
    }

    pub fn add(&mut self, w: Word, value: Complex64) {
        let entry = self.values.entry(w).or_insert(Complex64::ZERO);
        *entry += value;
    }

    pub fn value(&self, w: &Word) -> Complex64 {
        self.values.get(w).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn support(&self) -> impl Iterator<Item = (&Word, &Complex64)> {
        self.values.iter()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    /// Largest word length in the support (0 for the zero function).
    pub fn max_length(&self) -> usize {
        self.values.keys().map(Word::len).max().unwrap_or(0)
    }

    /// Sphere-wise averaging: `f#(n)` is the mean of `f` over `B_n`.
    ///
    /// This is the conditional expectation onto radial functions; it is
    /// idempotent and contracts every sphere-wise `l^2` norm.
    ///
    /// # Examples
    ///
    /// ```
    /// use num_complex::Complex64;
    /// use tree_harmonics::radial::TreeFunction;
    /// use tree_harmonics::words::Word;
    ///
    /// // A point mass at a generator averages to 1/4 on sphere 1 (r = 2).
    /// let f = TreeFunction::delta(2, Word::parse(2, "a+").unwrap());
    /// let x = f.radialize();
    /// assert_eq!(x.value(0), Complex64::ZERO);
    /// assert_eq!(x.value(1), Complex64::new(0.25, 0.0));
    /// ```
    pub fn radialize(&self) -> RadialFunction {
        let nmax = self.max_length();
        let mut sums = vec![Complex64::ZERO; nmax + 1];
        for (w, v) in &self.values {
            sums[w.len()] += v;
        }
        let values = sums
            .into_iter()
            .enumerate()
            .map(|(n, s)| s / sphere_size_f64(self.rank, n))
            .collect();
        RadialFunction {
            rank: self.rank,
            values,
        }
    }

    /// Pointwise product of two tree functions.
    pub fn pointwise(&self, other: &TreeFunction) -> Result<TreeFunction> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        let mut out = TreeFunction::new(self.rank);
        for (w, v) in &self.values {
            let u = other.value(w);
            if u != Complex64::ZERO {
                out.set(w.clone(), v * u);
            }
        }
        Ok(out)
    }

    /// Pointwise product with a radial function, evaluated as `x(|t|) f(t)`
    /// on the support of `f` without embedding `x`.
    pub fn pointwise_radial(&self, x: &RadialFunction) -> Result<TreeFunction> {
        if self.rank != x.rank {
            return Err(Error::RankMismatch(self.rank, x.rank));
        }
        let mut out = TreeFunction::new(self.rank);
        for (w, v) in &self.values {
            let c = x.value(w.len());
            if c != Complex64::ZERO {
                out.set(w.clone(), v * c);
            }
        }
        Ok(out)
    }

    /// `n -> sum over |t| = n of |f(t)|^2`.
    pub fn sphere_l2_profile(&self) -> Vec<f64> {
        let mut profile = vec![0.0; self.max_length() + 1];
        for (w, v) in &self.values {
            profile[w.len()] += v.norm_sqr();
        }
        profile
    }

    /// Weighted `l^p` norm over the tree.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "lp_norm requires p >= 1");
        self.values
            .values()
            .map(|v| v.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

impl RadialFunction {
    pub fn new(rank: u32, values: Vec<Complex64>) -> Self {
        RadialFunction { rank, values }
    }

    /// Radial function from real level values.
    pub fn from_real(rank: u32, values: &[f64]) -> Self {
        RadialFunction {
            rank,
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    /// `delta` at level 0 (the group identity).
    pub fn delta_level0(rank: u32) -> Self {
        RadialFunction::from_real(rank, &[1.0])
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    pub fn value(&self, n: usize) -> Complex64 {
        self.values.get(n).copied().unwrap_or(Complex64::ZERO)
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Largest level with a nonzero value.
    pub fn max_level(&self) -> usize {
        self.values
            .iter()
            .rposition(|v| *v != Complex64::ZERO)
            .unwrap_or(0)
    }

    /// Materialize on the tree: value `x(|t|)` at every word of the ball.
    pub fn embed_radial(&self, ball: &BallIndex) -> Result<TreeFunction> {
        if self.rank != ball.rank() {
            return Err(Error::RankMismatch(self.rank, ball.rank()));
        }
        if self.max_level() > ball.radius() as usize {
            return Err(Error::Precondition(format!(
                "radial support {} exceeds ball radius {}",
                self.max_level(),
                ball.radius()
            )));
        }
        let mut f = TreeFunction::new(self.rank);
        for n in 0..=self.max_level().min(ball.radius() as usize) {
            let v = self.value(n);
            if v == Complex64::ZERO {
                continue;
            }
            for w in ball.sphere(n) {
                f.set(w.clone(), v);
            }
        }
        Ok(f)
    }

    /// Level-wise product; the radial case of pointwise multiplication.
    pub fn pointwise(&self, other: &RadialFunction) -> Result<RadialFunction> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch(self.rank, other.rank));
        }
        let len = self.values.len().min(other.values.len());
        let values = (0..len).map(|n| self.values[n] * other.values[n]).collect();
        Ok(RadialFunction {
            rank: self.rank,
            values,
        })
    }

    /// Weighted `l^p` norm: level `n` carries weight `|B_n|`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "lp_norm requires p >= 1");
        self.values
            .iter()
            .enumerate()
            .map(|(n, v)| sphere_size_f64(self.rank, n) * v.norm().powf(p))
            .sum::<f64>()
            .powf(1.0 / p)
    }
}

/// The extremal radial function `Xi(n) = (1 + n (r-1)/r) (2r-1)^(-n/2)`.
///
/// This equals the spherical function at the bottom of the principal
/// series; every radial coefficient function of norm one is dominated by
/// it pointwise.
pub fn xi(rank: u32, n: usize) -> f64 {
    let r = rank as f64;
    let q = 2.0 * r - 1.0;
    (1.0 + n as f64 * (r - 1.0) / r) * q.powf(-(n as f64) / 2.0)
}

/// Partial sums of `sum_n |B_n| Xi(n)^3` up to `nmax`.
///
/// The increments decay geometrically with ratio `(2r-1)^(-1/2)`, which is
/// the numerical content of the cube-summability of `Xi`.
pub fn xi_l3_tail(rank: u32, nmax: usize) -> Vec<f64> {
    let mut sums = Vec::with_capacity(nmax + 1);
    let mut acc = 0.0;
    for n in 0..=nmax {
        acc += sphere_size_f64(rank, n) * xi(rank, n).powi(3);
        sums.push(acc);
    }
    sums
}

/// Report of the sphere-wise tail inequality
/// `sum_{|t|=n} |x(t) y(t)|^2 <= sum_{|t|=n} Xi(t)^3`.
#[derive(Clone, Debug)]
pub struct TailReport {
    /// Does `|x(t)| <= Xi(|t|)` hold on the support of `x`?
    pub pre_x_ok: bool,
    /// Does the sphere profile of `y` stay below `sum_{B_n} Xi`?
    pub pre_y_ok: bool,
    /// Per-sphere slack `sum Xi^3 - sum |x y|^2` (negative = violation).
    pub margins: Vec<f64>,
    /// True when the preconditions held and some sphere still violated
    /// the inequality.
    pub violation: bool,
}

/// Check the sphere-wise tail estimate for a pair of tree functions.
///
/// Precondition failures are reported in the flags, not treated as a
/// failure of the inequality itself.
pub fn tail_estimate_check(x: &TreeFunction, y: &TreeFunction) -> Result<TailReport> {
    if x.rank() != y.rank() {
        return Err(Error::RankMismatch(x.rank(), y.rank()));
    }
    let rank = x.rank();
    let tol = 1e-12;
    let pre_x_ok = x
        .support()
        .all(|(w, v)| v.norm() <= xi(rank, w.len()) + tol);
    let profile_y = y.sphere_l2_profile();
    let pre_y_ok = profile_y.iter().enumerate().all(|(n, &p)| {
        let bound = sphere_size_f64(rank, n) * xi(rank, n);
        // Relative slack: the bound is a sum over the sphere, so exact
        // saturation carries rounding proportional to its size.
        p <= bound * (1.0 + 1e-9) + tol
    });

    let product = x.pointwise(y)?;
    let profile = product.sphere_l2_profile();
    let nmax = profile.len().max(1);
    let mut margins = Vec::with_capacity(nmax);
    let mut violation = false;
    for n in 0..nmax {
        let lhs = profile.get(n).copied().unwrap_or(0.0);
        let bound = sphere_size_f64(rank, n) * xi(rank, n).powi(3);
        let margin = bound - lhs;
        if pre_x_ok && pre_y_ok && margin < -tol * bound.max(1.0) {
            violation = true;
        }
        margins.push(margin);
    }
    Ok(TailReport {
        pre_x_ok,
        pre_y_ok,
        margins,
        violation,
    })
}
