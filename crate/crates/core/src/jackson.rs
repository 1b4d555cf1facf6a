//! Jackson integration on `[-1, 1]` and the inner product of angular functions.
//!
//! On `(0, 1)` the measure is the discrete sum over the grid `x_k = q^k`,
//! `sum_k f(x_{2k+1}) (x_{2k} - x_{2k+2})`, which gives `1/[n+1]` for `x^n`.
//! The negative half-line contributes `(-1)^n` times the same amount. For
//! `q > 1` the grid leaves the interval and the closed form `(1 + (-1)^n)/[n+1]`
//! is taken as the definition. Since it is symmetric under `q -> 1/q`, any
//! polynomial integral at `q > 1` equals the grid sum with base `1/q`.

use serde::Serialize;

use crate::angular::{g_minus, g_plus, harmonic, AngularFunction, HarmonicLabel};
use crate::error::{Error, Result};
use crate::poly;
use crate::qcore::QParam;
use crate::real::Real;

/// Largest `min(q, 1/q)^2` for which closed-form inner products go through the grid.
const GRID_RATIO: f64 = 0.7;
/// Safety cap on the adaptive grid sum.
const MAX_GRID_POINTS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum MeasureMode {
    ClosedForm,
    Series { depth: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct QMeasure<T> {
    p: QParam<T>,
    mode: MeasureMode,
}

impl<T: Real> QMeasure<T> {
    pub fn closed_form(p: QParam<T>) -> Self {
        QMeasure { p, mode: MeasureMode::ClosedForm }
    }

    /// Truncated grid sum; needs `0 < q < 1` and a positive depth.
    pub fn series(p: QParam<T>, depth: usize) -> Result<Self> {
        if *p.q() >= T::one() {
            return Err(Error::SeriesNeedsQBelowOne(p.q().to_f64()));
        }
        if depth == 0 {
            return Err(Error::ZeroSeriesDepth);
        }
        Ok(QMeasure { p, mode: MeasureMode::Series { depth } })
    }

    pub fn param(&self) -> &QParam<T> {
        &self.p
    }

    pub fn mode(&self) -> MeasureMode {
        self.mode
    }

    /// `int_{-1}^{1} x^n d[x]`.
    pub fn integrate_monomial(&self, n: usize) -> T {
        if n % 2 == 1 {
            return T::zero();
        }
        T::from_i64(2) * self.half_line(n)
    }

    /// Linear extension of [`Self::integrate_monomial`].
    pub fn integrate_polynomial(&self, coeffs: &[T]) -> T {
        coeffs
            .iter()
            .enumerate()
            .filter(|(k, c)| k % 2 == 0 && !c.is_zero())
            .fold(T::zero(), |acc, (k, c)| acc + c.clone() * self.integrate_monomial(k))
    }

    /// `<f, g>`: zero for different windings, otherwise `2 pi` times the
    /// Jackson integral of `P_f K_m P_g`, where `K_m` is the polynomial value of
    /// `W_m^+ W_m`.
    ///
    /// Expanding `K_m` into monomials cancels badly once `q` is far from 1, so
    /// in that regime (and always in series mode) the integrand is evaluated
    /// point by point on the grid, where every kernel factor is `1 - q^{4j}`
    /// for some integer `j`.
    pub fn inner_product(&self, f: &AngularFunction<T>, g: &AngularFunction<T>) -> T {
        if f.winding() != g.winding() || f.is_zero() || g.is_zero() {
            return T::zero();
        }
        let m = f.winding();
        let value = match self.mode {
            MeasureMode::Series { depth } => self.grid_sum(m, f.coeffs(), g.coeffs(), Some(depth)),
            MeasureMode::ClosedForm if self.grid_base_ratio() <= GRID_RATIO => {
                self.grid_sum(m, f.coeffs(), g.coeffs(), None)
            }
            MeasureMode::ClosedForm => {
                let integrand = poly::mul(&poly::mul(f.coeffs(), &winding_kernel(&self.p, m)), g.coeffs());
                self.integrate_polynomial(&integrand)
            }
        };
        T::from_i64(2) * T::pi() * value
    }

    /// `min(q, 1/q)^2`, the geometric decay of the grid weights.
    fn grid_base_ratio(&self) -> f64 {
        let q = self.p.q().to_f64();
        q.min(1.0 / q).powi(2)
    }

    /// `int P_f K_m P_g` over `[-1, 1]` on the grid `x_k = b^k` with
    /// `b = min(q, 1/q)`. The polynomial integral is the same for `q` and `1/q`,
    /// so the grid is always taken inside the interval. Without a depth the
    /// sum runs until the tail drops below round-off.
    fn grid_sum(&self, m: i64, a: &[T], b: &[T], depth: Option<usize>) -> T {
        let p = &self.p;
        // x_k = q^{dir k}
        let dir: i64 = if *p.q() < T::one() { 1 } else { -1 };
        let two = p.qnum(2);
        let (pref, sign_s): (T, i64) = if m >= 0 {
            ((-T::one() / p.q().clone()).powi(m), -1)
        } else {
            ((-p.q().clone()).powi(-m), 1)
        };
        let one_minus = T::one() - p.pow(2 * dir);
        let eps = T::epsilon();
        let limit = depth.unwrap_or(MAX_GRID_POINTS);
        let mut sum = T::zero();
        let mut quiet = 0;
        for k in 0..limit {
            let k = k as i64;
            let x = p.pow(dir * (2 * k + 1));
            let weight = p.pow(dir * 2 * k) * one_minus.clone();
            // factor j of the kernel is -(1 - q^{s_j} x^2)/[2]
            let mut kern = pref.clone();
            for j in 0..m.abs() {
                let s = sign_s * (2 + 4 * j);
                kern = kern * -(T::one() - p.pow(s + dir * (4 * k + 2))) / two.clone();
            }
            let even = poly::eval(a, &x) * poly::eval(b, &x) + poly::eval(a, &-x.clone()) * poly::eval(b, &-x);
            let term = weight * kern * even;
            sum = sum + term.clone();
            if depth.is_none() {
                let tail = term.abs() / (T::one() - T::from_f64(self.grid_base_ratio()));
                if k > m.abs() && tail <= eps.clone() * sum.abs() {
                    quiet += 1;
                    if quiet >= 3 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
        }
        sum
    }

    fn half_line(&self, n: usize) -> T {
        let p = &self.p;
        match self.mode {
            MeasureMode::ClosedForm => T::one() / p.qnum(n as i64 + 1),
            MeasureMode::Series { depth } => {
                // x_{2k+1}^n (x_{2k} - x_{2k+2}) = (1 - q^2) q^{n(2k+1) + 2k}
                let step = p.pow(2 * n as i64 + 2);
                let mut term = (T::one() - p.pow(2)) * p.pow(n as i64);
                let mut sum = T::zero();
                for _ in 0..depth {
                    sum = sum + term.clone();
                    term = term * step.clone();
                }
                sum
            }
        }
    }
}

/// `W_m^+ W_m` reduced to a polynomial in `x0`, using `x~1^+ = -x~-1/q` and
/// `x~-1^+ = -q x~1`.
pub fn winding_kernel<T: Real>(p: &QParam<T>, m: i64) -> Vec<T> {
    let mut k = vec![T::one()];
    if m >= 0 {
        let gm = g_minus(p);
        for j in 0..m {
            k = poly::mul(&k, &poly::dilate(&gm, &p.pow(-2 * j)));
        }
        poly::scale(&k, &(-T::one() / p.q().clone()).powi(m))
    } else {
        let gp = g_plus(p);
        for i in 0..-m {
            k = poly::mul(&k, &poly::dilate(&gp, &p.pow(2 * i)));
        }
        poly::scale(&k, &(-p.q().clone()).powi(-m))
    }
}

/// Gram matrix of all `Y_lm` with `l <= lmax`, rows and columns in
/// [`HarmonicLabel::all_up_to`] order.
pub fn gram_matrix<T: Real>(mu: &QMeasure<T>, lmax: u32) -> Result<Vec<Vec<T>>> {
    let ys = HarmonicLabel::all_up_to(lmax)
        .map(|label| harmonic(mu.param(), label))
        .collect::<Result<Vec<_>>>()?;
    Ok(ys.iter().map(|a| ys.iter().map(|b| mu.inner_product(a, b)).collect()).collect())
}

/// Largest entry of `G - I` for the Gram matrix above.
pub fn gram_deviation<T: Real>(mu: &QMeasure<T>, lmax: u32) -> Result<T> {
    let g = gram_matrix(mu, lmax)?;
    let mut worst = T::zero();
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let want = if i == j { T::one() } else { T::zero() };
            worst = worst.max((v.clone() - want).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow<T> {
    pub depth: usize,
    pub partial_sum: T,
    pub error: T,
}

/// Partial sums of the half-line grid sum for `x^n` against `1/[n+1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable<T> {
    pub n: usize,
    pub exact: T,
    pub rows: Vec<ConvergenceRow<T>>,
    /// Smallest depth whose error is at most `tolerance`, if reached within `max_depth`.
    pub depth_for_tolerance: Option<usize>,
    pub tolerance: f64,
}

pub fn series_convergence_probe<T: Real>(
    p: &QParam<T>,
    n: usize,
    depths: &[usize],
    tolerance: f64,
    max_depth: usize,
) -> Result<ConvergenceTable<T>> {
    if *p.q() >= T::one() {
        return Err(Error::SeriesNeedsQBelowOne(p.q().to_f64()));
    }
    let exact = T::one() / p.qnum(n as i64 + 1);
    let step = p.pow(2 * n as i64 + 2);
    let first = (T::one() - p.pow(2)) * p.pow(n as i64);
    let mut rows = Vec::new();
    let mut wanted: Vec<usize> = depths.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let limit = max_depth.max(wanted.last().copied().unwrap_or(0));
    let mut sum = T::zero();
    let mut term = first;
    let mut needed = None;
    let mut next = wanted.iter().peekable();
    for depth in 1..=limit {
        sum = sum + term.clone();
        term = term * step.clone();
        let error = (exact.clone() - sum.clone()).abs();
        if needed.is_none() && error.to_f64() <= tolerance {
            needed = Some(depth);
        }
        if next.peek() == Some(&&depth) {
            next.next();
            rows.push(ConvergenceRow { depth, partial_sum: sum.clone(), error: error.clone() });
        }
        if needed.is_some() && next.peek().is_none() {
            break;
        }
    }
    Ok(ConvergenceTable { n, exact, rows, depth_for_tolerance: needed, tolerance })
}
