//! Angular functions of fixed winding and the operators acting on them.
//!
//! A function is stored as a winding number `m` and a polynomial `P(x0)`. It
//! stands for `e^{i m phi} W_m P(x0)` with `W_m = x~1^m` for `m >= 0` and
//! `W_m = x~-1^{|m|}` for `m < 0`. The square roots hidden in `x~+-1` never
//! need evaluating: every operator below maps such a word to another word of
//! the same shape, using
//!
//! * `x~1 h(x0) = h(q^2 x0) x~1` and `x~-1 h(x0) = h(q^-2 x0) x~-1`,
//! * `x~1 x~-1 = -(1 - q^2 x0^2)/[2]` and `x~-1 x~1 = -(1 - q^-2 x0^2)/[2]`.
//!
//! All coefficients are real: for real positive `q` none of the operators
//! introduce an imaginary unit once the phase `e^{i m phi}` is factored out.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly;
use crate::qcore::QParam;
use crate::real::Real;

/// Spherical component index of a q-vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Component {
    Plus,
    Zero,
    Minus,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::Plus, Component::Zero, Component::Minus];

    pub fn index(self) -> i64 {
        match self {
            Component::Plus => 1,
            Component::Zero => 0,
            Component::Minus => -1,
        }
    }

    pub fn from_index(k: i64) -> Option<Self> {
        match k {
            1 => Some(Component::Plus),
            0 => Some(Component::Zero),
            -1 => Some(Component::Minus),
            _ => None,
        }
    }

    /// Component `k + shift`, if it exists.
    pub fn shifted(self, shift: i64) -> Option<Self> {
        Self::from_index(self.index() + shift)
    }
}

/// A `(l, m)` label with `|m| <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HarmonicLabel {
    pub l: u32,
    pub m: i64,
}

impl HarmonicLabel {
    pub fn new(l: u32, m: i64) -> Result<Self> {
        if m.abs() > l as i64 {
            return Err(Error::InvalidLabel { l: l as i64, m, reason: "|m| must not exceed l" });
        }
        Ok(HarmonicLabel { l, m })
    }

    /// `(l - m) mod 2`.
    pub fn parity(&self) -> i64 {
        (self.l as i64 - self.m).rem_euclid(2)
    }

    /// All labels with `l <= lmax`, ordered by `l` then `m`.
    pub fn all_up_to(lmax: u32) -> impl Iterator<Item = HarmonicLabel> {
        (0..=lmax).flat_map(|l| (-(l as i64)..=l as i64).map(move |m| HarmonicLabel { l, m }))
    }
}

/// `e^{i m phi} W_m P(x0)` with real polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngularFunction<T> {
    winding: i64,
    coeffs: Vec<T>,
}

impl<T: Real> AngularFunction<T> {
    pub fn new(winding: i64, coeffs: Vec<T>) -> Self {
        AngularFunction { winding, coeffs: poly::trim(coeffs) }
    }

    pub fn zero(winding: i64) -> Self {
        AngularFunction { winding, coeffs: Vec::new() }
    }

    pub fn constant(value: T) -> Self {
        Self::new(0, vec![value])
    }

    pub fn winding(&self) -> i64 {
        self.winding
    }

    /// Coefficients of `x0^k`, lowest degree first, with no trailing zeros.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(self.winding, poly::scale(&self.coeffs, s))
    }

    pub fn add(&self, other: &Self) -> Self {
        let winding = self.common_winding(other);
        Self::new(winding, poly::add(&self.coeffs, &other.coeffs))
    }

    pub fn sub(&self, other: &Self) -> Self {
        let winding = self.common_winding(other);
        Self::new(winding, poly::sub(&self.coeffs, &other.coeffs))
    }

    /// Largest coefficient of `self - other` in the `(m, k)` monomial basis.
    pub fn distance(&self, other: &Self) -> T {
        if self.winding == other.winding || self.is_zero() || other.is_zero() {
            poly::max_abs_diff(&self.coeffs, &other.coeffs)
        } else {
            self.max_coeff().max(other.max_coeff())
        }
    }

    pub fn max_coeff(&self) -> T {
        crate::real::max_abs(&self.coeffs)
    }

    /// Value of the polynomial part at `x0`.
    pub fn eval_polynomial(&self, x0: &T) -> T {
        poly::eval(&self.coeffs, x0)
    }

    fn common_winding(&self, other: &Self) -> i64 {
        if self.is_zero() {
            other.winding
        } else if other.is_zero() || self.winding == other.winding {
            self.winding
        } else {
            panic!("cannot combine windings {} and {}", self.winding, other.winding)
        }
    }
}

/// `x~1 x~-1 = -(1 - q^2 x0^2)/[2]` as a polynomial.
pub fn g_plus<T: Real>(p: &QParam<T>) -> Vec<T> {
    let two = p.qnum(2);
    vec![-T::one() / two.clone(), T::zero(), p.pow(2) / two]
}

/// `x~-1 x~1 = -(1 - q^-2 x0^2)/[2]` as a polynomial.
pub fn g_minus<T: Real>(p: &QParam<T>) -> Vec<T> {
    let two = p.qnum(2);
    vec![-T::one() / two.clone(), T::zero(), p.pow(-2) / two]
}

/// `(1/x0)(1 - q^{-2N0})/(1 - q^{-2})`: sends `x0^k` to `q^{1-k}[k] x0^{k-1}`.
pub fn d_minus<T: Real>(p: &QParam<T>, a: &[T]) -> Vec<T> {
    let out = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.clone() * p.pow(1 - k as i64) * p.qnum(k as i64))
        .collect();
    poly::trim(out)
}

/// `(1/x0)(1 - q^{2N0})/(1 - q^2)`: sends `x0^k` to `q^{k-1}[k] x0^{k-1}`.
pub fn d_plus<T: Real>(p: &QParam<T>, a: &[T]) -> Vec<T> {
    let out = a
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.clone() * p.pow(k as i64 - 1) * p.qnum(k as i64))
        .collect();
    poly::trim(out)
}

/// Left multiplication by the unit-sphere component `x_k`.
pub fn mul_position<T: Real>(p: &QParam<T>, k: Component, f: &AngularFunction<T>) -> AngularFunction<T> {
    let m = f.winding;
    let a = &f.coeffs;
    match k {
        Component::Zero => AngularFunction::new(m, poly::scale(&poly::shift_up(a), &p.pow(-2 * m))),
        Component::Plus if m >= 0 => AngularFunction::new(m + 1, a.clone()),
        Component::Plus => {
            let j = -m;
            let g = poly::dilate(&g_plus(p), &p.pow(2 * (j - 1)));
            AngularFunction::new(m + 1, poly::mul(&g, a))
        }
        Component::Minus if m <= 0 => AngularFunction::new(m - 1, a.clone()),
        Component::Minus => {
            let g = poly::dilate(&g_minus(p), &p.pow(-2 * (m - 1)));
            AngularFunction::new(m - 1, poly::mul(&g, a))
        }
    }
}

/// Right multiplication `f x_k`.
pub fn mul_position_right<T: Real>(p: &QParam<T>, k: Component, f: &AngularFunction<T>) -> AngularFunction<T> {
    let m = f.winding;
    let a = &f.coeffs;
    match k {
        Component::Zero => AngularFunction::new(m, poly::shift_up(a)),
        Component::Plus => {
            let moved = poly::dilate(a, &p.pow(-2));
            let body = if m >= 0 { moved } else { poly::mul(&g_minus(p), &moved) };
            AngularFunction::new(m + 1, body)
        }
        Component::Minus => {
            let moved = poly::dilate(a, &p.pow(2));
            let body = if m <= 0 { moved } else { poly::mul(&g_plus(p), &moved) };
            AngularFunction::new(m - 1, body)
        }
    }
}

pub fn apply_l0<T: Real>(f: &AngularFunction<T>) -> AngularFunction<T> {
    f.scale(&T::from_i64(f.winding))
}

/// `q^{s L0}` on a function of fixed winding.
pub fn apply_q_power_l0<T: Real>(p: &QParam<T>, s: i64, f: &AngularFunction<T>) -> AngularFunction<T> {
    f.scale(&p.pow(s * f.winding))
}

pub fn apply_lplus<T: Real>(p: &QParam<T>, f: &AngularFunction<T>) -> AngularFunction<T> {
    let m = f.winding;
    let a = &f.coeffs;
    let pref = p.qnum(2).sqrt() * p.pow(m);
    if m >= 0 {
        return AngularFunction::new(m + 1, poly::scale(&d_minus(p, a), &pref));
    }
    let j = -m;
    // the stripped factor x~-1^j does not commute with the q-difference, which
    // leaves the extra x0 term below
    let tail: Vec<T> = a
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let k = k as i64;
            c.clone() * p.pow(2 * j - k - 1) * p.qnum(2 * j + k)
        })
        .collect();
    let g = poly::sub(&d_minus(p, a), &poly::shift_up(&tail));
    let g = poly::scale(&g, &(-T::one() / p.qnum(2)));
    AngularFunction::new(m + 1, poly::scale(&g, &pref))
}

pub fn apply_lminus<T: Real>(p: &QParam<T>, f: &AngularFunction<T>) -> AngularFunction<T> {
    let m = f.winding;
    let a = &f.coeffs;
    let pref = p.qnum(2).sqrt() * p.pow(m);
    if m <= 0 {
        return AngularFunction::new(m - 1, poly::scale(&d_plus(p, a), &pref));
    }
    let tail: Vec<T> = a
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let k = k as i64;
            c.clone() * p.pow(k + 1 - 2 * m) * p.qnum(2 * m + k)
        })
        .collect();
    let g = poly::sub(&d_plus(p, a), &poly::shift_up(&tail));
    let g = poly::scale(&g, &(-T::one() / p.qnum(2)));
    AngularFunction::new(m - 1, poly::scale(&g, &pref))
}

/// Components of the vector built from the generators:
/// `Lambda_{+-1} = -+ q^{-L0} L_{+-} / sqrt([2])` and
/// `Lambda_0 = (q L+ L- - q^-1 L- L+)/[2]`.
pub fn apply_lambda<T: Real>(p: &QParam<T>, k: Component, f: &AngularFunction<T>) -> AngularFunction<T> {
    let inv_root = T::one() / p.qnum(2).sqrt();
    match k {
        Component::Plus => apply_q_power_l0(p, -1, &apply_lplus(p, f)).scale(&-inv_root),
        Component::Minus => apply_q_power_l0(p, -1, &apply_lminus(p, f)).scale(&inv_root),
        Component::Zero => {
            let a = apply_lplus(p, &apply_lminus(p, f)).scale(p.q());
            let b = apply_lminus(p, &apply_lplus(p, f)).scale(&(T::one() / p.q().clone()));
            a.sub(&b).scale(&(T::one() / p.qnum(2)))
        }
    }
}

/// The invariant `c = q^{-2 L0} + lambda Lambda_0`.
pub fn apply_c<T: Real>(p: &QParam<T>, f: &AngularFunction<T>) -> AngularFunction<T> {
    apply_q_power_l0(p, -2, f).add(&apply_lambda(p, Component::Zero, f).scale(p.lambda()))
}

/// The Casimir `L- L+ + [L0][L0+1]`.
pub fn apply_casimir<T: Real>(p: &QParam<T>, f: &AngularFunction<T>) -> AngularFunction<T> {
    let m = f.winding;
    apply_lminus(p, &apply_lplus(p, f)).add(&f.scale(&(p.qnum(m) * p.qnum(m + 1))))
}

fn nonnegative_label(label: HarmonicLabel) -> Result<()> {
    if label.m < 0 || label.m > label.l as i64 {
        return Err(Error::InvalidLabel { l: label.l as i64, m: label.m, reason: "requires 0 <= m <= l" });
    }
    Ok(())
}

/// The unnormalized eigenfunction `Phi_lm`, `0 <= m <= l`, from the two-step
/// coefficient recursion.
pub fn build_phi<T: Real>(p: &QParam<T>, label: HarmonicLabel) -> Result<AngularFunction<T>> {
    nonnegative_label(label)?;
    let (l, m) = (label.l as i64, label.m);
    let top = (l - m) as usize;
    let mut a = vec![T::zero(); top + 1];
    let start = label.parity() as usize;
    // the odd series starts at q^-m x0 rather than x0
    a[start] = if start == 0 { T::one() } else { p.pow(-m) };
    let mut k = start;
    while k + 2 <= top {
        let ki = k as i64;
        let ratio = p.qnum(l - m - ki) * p.qnum(l + m + ki + 1) / (p.qnum(ki + 1) * p.qnum(ki + 2));
        a[k + 2] = -p.pow(-2 * m) * ratio * a[k].clone();
        k += 2;
    }
    Ok(AngularFunction::new(m, a))
}

/// Argument of the base-`q^2` hypergeometric form of `Phi_lm`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HypergeometricArgument {
    /// `q^{-2m} x0^2`, the square of the variable `q^-m x0` of the power series.
    Squared,
    /// `q^{-m} x0^2`.
    Printed,
}

/// `Phi_lm` summed as a terminating `2F1` in base `q^2`.
pub fn hypergeom_phi<T: Real>(
    p: &QParam<T>,
    label: HarmonicLabel,
    argument: HypergeometricArgument,
) -> Result<AngularFunction<T>> {
    nonnegative_label(label)?;
    let (l, m) = (label.l as i64, label.m);
    let odd = label.parity() == 1;
    // parameters a, b, c are carried as twice their value
    let (a2, b2, c2) = if odd { (l + m + 2, m - l + 1, 3) } else { (l + m + 1, m - l, 1) };
    let z = match argument {
        HypergeometricArgument::Squared => p.pow(-2 * m),
        HypergeometricArgument::Printed => p.pow(-m),
    };
    let offset = usize::from(odd);
    let prefactor = if odd { p.pow(-m) } else { T::one() };
    let mut coeffs = vec![T::zero(); (l - m) as usize + 1];
    let mut term = prefactor;
    let mut n = 0i64;
    loop {
        coeffs[2 * n as usize + offset] = term.clone();
        let upper = p.qnum_sq_half(b2 + 2 * n);
        if upper.is_zero() {
            break;
        }
        let ratio = p.qnum_sq_half(a2 + 2 * n) * upper / (p.qnum_sq_half(c2 + 2 * n) * p.qnum_sq_half(2 * n + 2));
        term = term * ratio * z.clone();
        n += 1;
    }
    Ok(AngularFunction::new(m, coeffs))
}

/// Scalar relating `Y_lm` to `Phi_lm` for `0 <= m <= l`: sign, `sqrt([2l+1]/4 pi)`,
/// the square root of the double-factorial ratio and `[2]^{m/2}`.
pub fn normalization_constant<T: Real>(p: &QParam<T>, label: HarmonicLabel) -> Result<T> {
    nonnegative_label(label)?;
    let (l, m) = (label.l as i64, label.m);
    let df = |n: i64| p.q_double_factorial(n);
    let (sign, ratio) = if label.parity() == 0 {
        let r = df(l - m - 1)? / df(l - m)? * df(l + m - 1)? / df(l + m)?;
        ((l - m) / 2, r)
    } else {
        let r = df(l - m)? / df(l - m - 1)? * df(l + m)? / df(l + m - 1)?;
        ((l - m - 1) / 2, r)
    };
    let phase = if sign % 2 == 0 { T::one() } else { -T::one() };
    let four_pi = T::from_i64(4) * T::pi();
    let two_pow = p.qnum(2).powf(&(T::from_i64(m) / T::from_i64(2)));
    Ok(phase * (p.qnum(2 * l + 1) / four_pi).sqrt() * ratio.sqrt() * two_pow)
}

/// Normalized `Y_lm` for `0 <= m <= l`.
pub fn normalize_y<T: Real>(p: &QParam<T>, label: HarmonicLabel) -> Result<AngularFunction<T>> {
    let phi = build_phi(p, label)?;
    Ok(phi.scale(&normalization_constant(p, label)?))
}

/// `Y_lm` for `-l <= m < 0` by repeated lowering from `Y_l0`:
/// `Y_{l,m} = L- Y_{l,m+1} / sqrt([l+m+1][l-m])`.
pub fn build_negative_m<T: Real>(p: &QParam<T>, label: HarmonicLabel) -> Result<AngularFunction<T>> {
    let l = label.l as i64;
    if label.m >= 0 || label.m < -l {
        return Err(Error::InvalidLabel { l, m: label.m, reason: "requires -l <= m < 0" });
    }
    let mut y = normalize_y(p, HarmonicLabel { l: label.l, m: 0 })?;
    for m in (label.m + 1..=0).rev() {
        // y currently carries winding m
        let norm = (p.qnum(l + m) * p.qnum(l - m + 1)).sqrt();
        y = apply_lminus(p, &y).scale(&(T::one() / norm));
    }
    Ok(y)
}

/// Normalized `Y_lm` for any valid label.
pub fn harmonic<T: Real>(p: &QParam<T>, label: HarmonicLabel) -> Result<AngularFunction<T>> {
    if label.m >= 0 {
        normalize_y(p, label)
    } else {
        build_negative_m(p, label)
    }
}

/// Largest coefficient difference between the polynomial of `Y_{l,-|m|}` at `q`
/// and that of `Y_{l,|m|}` at `1/q`.
pub fn negative_m_mirror_residual<T: Real>(p: &QParam<T>, label: HarmonicLabel) -> Result<T> {
    let abs = HarmonicLabel { l: label.l, m: label.m.abs() };
    let neg = harmonic(p, HarmonicLabel { l: label.l, m: -abs.m })?;
    let mirror = normalize_y(&p.inverse(), abs)?;
    Ok(poly::max_abs_diff(neg.coeffs(), mirror.coeffs()))
}

/// Outcome of the raising relation `x~1 D- Phi_lm = factor * Phi_{l,m+1}`,
/// where `factor` is `-[l-m][l+m+1]` for even `l-m` and `1` for odd.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderCheck<T> {
    pub label: HarmonicLabel,
    /// Residual of the relation with `factor` as stated.
    pub printed_residual: T,
    /// Residual after multiplying the right-hand side by `q^-m`.
    pub corrected_residual: T,
}

impl<T: Real> LadderCheck<T> {
    pub fn holds_as_printed(&self, tol: f64) -> bool {
        self.printed_residual.to_f64() <= tol
    }

    pub fn holds_corrected(&self, tol: f64) -> bool {
        self.corrected_residual.to_f64() <= tol
    }
}

pub fn ladder_identity_check<T: Real>(p: &QParam<T>, label: HarmonicLabel) -> Result<LadderCheck<T>> {
    let (l, m) = (label.l as i64, label.m);
    if m < 0 || m >= l {
        return Err(Error::InvalidLabel { l, m, reason: "requires 0 <= m < l" });
    }
    let phi = build_phi(p, label)?;
    let lhs = AngularFunction::new(m + 1, d_minus(p, phi.coeffs()));
    let next = build_phi(p, HarmonicLabel { l: label.l, m: m + 1 })?;
    let factor = if label.parity() == 0 { -(p.qnum(l - m) * p.qnum(l + m + 1)) } else { T::one() };
    let printed = next.scale(&factor);
    let corrected = printed.scale(&p.pow(-m));
    Ok(LadderCheck {
        label,
        printed_residual: lhs.distance(&printed),
        corrected_residual: lhs.distance(&corrected),
    })
}
