//! Operators as block-sparse matrices on the truncated basis `{|l, m> : l <= lmax}`
//! and the identity verifier built on them.
//!
//! A block `(l', l)` is a dense `(2l'+1) x (2l+1)` array with row index
//! `m' + l'` and column index `m + l`. Every operator here moves `l` by at most
//! one, so a product of two of them is exact on blocks with both labels at most
//! `lmax - 2`; that is the interior on which identities are checked.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::angular::Component;
use crate::error::{Error, Result};
use crate::qcore::QParam;
use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
struct Block<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Block<T> {
    fn zeros(lp: u32, l: u32) -> Self {
        let (rows, cols) = (2 * lp as usize + 1, 2 * l as usize + 1);
        Block { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    fn at_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

/// Block-sparse operator keyed by `(l', l)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T> {
    lmax: u32,
    blocks: BTreeMap<(u32, u32), Block<T>>,
}

/// One stored entry `<l' m'| A |l m>`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Entry<T> {
    pub lp: u32,
    pub mp: i64,
    pub l: u32,
    pub m: i64,
    pub value: T,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn zeros(lmax: u32) -> Self {
        OperatorMatrix { lmax, blocks: BTreeMap::new() }
    }

    /// Diagonal operator with entry `f(l, m)`.
    pub fn diagonal(lmax: u32, f: impl Fn(u32, i64) -> T) -> Self {
        let mut out = Self::zeros(lmax);
        for l in 0..=lmax {
            for m in -(l as i64)..=l as i64 {
                out.set(l, m, l, m, f(l, m));
            }
        }
        out
    }

    pub fn identity(lmax: u32) -> Self {
        Self::diagonal(lmax, |_, _| T::one())
    }

    pub fn lmax(&self) -> u32 {
        self.lmax
    }

    fn in_range(&self, l: u32, m: i64) -> bool {
        l <= self.lmax && m.abs() <= l as i64
    }

    pub fn get(&self, lp: u32, mp: i64, l: u32, m: i64) -> T {
        if !self.in_range(lp, mp) || !self.in_range(l, m) {
            return T::zero();
        }
        self.blocks
            .get(&(lp, l))
            .map(|b| b.at((mp + lp as i64) as usize, (m + l as i64) as usize).clone())
            .unwrap_or_else(T::zero)
    }

    /// Sets an entry; entries outside the truncated basis are dropped.
    pub fn set(&mut self, lp: u32, mp: i64, l: u32, m: i64, value: T) {
        if !self.in_range(lp, mp) || !self.in_range(l, m) {
            return;
        }
        let block = self.blocks.entry((lp, l)).or_insert_with(|| Block::zeros(lp, l));
        *block.at_mut((mp + lp as i64) as usize, (m + l as i64) as usize) = value;
    }

    /// Nonzero entries in block order.
    pub fn entries(&self) -> Vec<Entry<T>> {
        let mut out = Vec::new();
        for (&(lp, l), b) in &self.blocks {
            for r in 0..b.rows {
                for c in 0..b.cols {
                    let v = b.at(r, c);
                    if !v.is_zero() {
                        out.push(Entry { lp, mp: r as i64 - lp as i64, l, m: c as i64 - l as i64, value: v.clone() });
                    }
                }
            }
        }
        out
    }

    /// The common `m' - m` of all nonzero entries, or `None` when mixed or empty.
    pub fn delta_m(&self) -> Option<i64> {
        let mut shifts = self.entries().into_iter().map(|e| e.mp - e.m);
        let first = shifts.next()?;
        shifts.all(|d| d == first).then_some(first)
    }

    /// Largest `|l' - l|` among stored blocks holding a nonzero entry.
    pub fn l_bandwidth(&self) -> u32 {
        self.blocks
            .iter()
            .filter(|(_, b)| b.data.iter().any(|v| !v.is_zero()))
            .map(|(&(lp, l), _)| lp.abs_diff(l))
            .max()
            .unwrap_or(0)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!(self.lmax, other.lmax, "operators built at different truncations");
        let mut out = Self::zeros(self.lmax);
        let keys: std::collections::BTreeSet<_> = self.blocks.keys().chain(other.blocks.keys()).copied().collect();
        for (lp, l) in keys {
            let mut block = Block::zeros(lp, l);
            for i in 0..block.data.len() {
                let a = self.blocks.get(&(lp, l)).map(|b| b.data[i].clone()).unwrap_or_else(T::zero);
                let b = other.blocks.get(&(lp, l)).map(|b| b.data[i].clone()).unwrap_or_else(T::zero);
                block.data[i] = f(a, b);
            }
            out.blocks.insert((lp, l), block);
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: &T) -> Self {
        let mut out = self.clone();
        for b in out.blocks.values_mut() {
            for v in &mut b.data {
                *v = v.clone() * s.clone();
            }
        }
        out
    }

    /// Matrix product within the truncated basis.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.lmax, other.lmax, "operators built at different truncations");
        let mut out = Self::zeros(self.lmax);
        for (&(la, lb), a) in &self.blocks {
            for (&(_, lc), b) in other.blocks.range((lb, 0)..=(lb, u32::MAX)) {
                let target = out.blocks.entry((la, lc)).or_insert_with(|| Block::zeros(la, lc));
                for r in 0..a.rows {
                    for k in 0..a.cols {
                        let x = a.at(r, k);
                        if x.is_zero() {
                            continue;
                        }
                        for c in 0..b.cols {
                            let y = b.at(k, c);
                            if !y.is_zero() {
                                let cell = target.at_mut(r, c);
                                *cell = cell.clone() + x.clone() * y.clone();
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Transpose, which is the adjoint since all entries are real.
    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.lmax);
        for (&(lp, l), b) in &self.blocks {
            let mut t = Block::zeros(l, lp);
            for r in 0..b.rows {
                for c in 0..b.cols {
                    *t.at_mut(c, r) = b.at(r, c).clone();
                }
            }
            out.blocks.insert((l, lp), t);
        }
        out
    }

    /// Largest `|entry|` over blocks with both labels at most `limit`.
    pub fn max_abs_within(&self, limit: u32) -> T {
        self.blocks
            .iter()
            .filter(|(&(lp, l), _)| lp <= limit && l <= limit)
            .flat_map(|(_, b)| b.data.iter())
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Add `delta` to one entry.
    pub fn perturb(&mut self, lp: u32, mp: i64, l: u32, m: i64, delta: T) {
        let v = self.get(lp, mp, l, m) + delta;
        self.set(lp, mp, l, m, v);
    }
}

/// Three spherical components of a q-vector operator.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorTriple<T> {
    pub plus: OperatorMatrix<T>,
    pub zero: OperatorMatrix<T>,
    pub minus: OperatorMatrix<T>,
}

impl<T: Real> VectorTriple<T> {
    pub fn get(&self, k: Component) -> &OperatorMatrix<T> {
        match k {
            Component::Plus => &self.plus,
            Component::Zero => &self.zero,
            Component::Minus => &self.minus,
        }
    }

    pub fn get_mut(&mut self, k: Component) -> &mut OperatorMatrix<T> {
        match k {
            Component::Plus => &mut self.plus,
            Component::Zero => &mut self.zero,
            Component::Minus => &mut self.minus,
        }
    }

    fn map(&self, f: impl Fn(&OperatorMatrix<T>) -> OperatorMatrix<T>) -> Self {
        VectorTriple { plus: f(&self.plus), zero: f(&self.zero), minus: f(&self.minus) }
    }

    fn lmax(&self) -> u32 {
        self.zero.lmax()
    }
}

/// `L0`, `L+`, `L-`.
#[derive(Debug, Clone, PartialEq)]
pub struct Generators<T> {
    pub l0: OperatorMatrix<T>,
    pub lplus: OperatorMatrix<T>,
    pub lminus: OperatorMatrix<T>,
}

/// Generators with the positive real convention
/// `<l, m+-1| L+- |l, m> = sqrt([l -+ m][l +- m + 1])`.
pub fn build_generators<T: Real>(p: &QParam<T>, lmax: u32) -> Generators<T> {
    let l0 = OperatorMatrix::diagonal(lmax, |_, m| T::from_i64(m));
    let mut lplus = OperatorMatrix::zeros(lmax);
    let mut lminus = OperatorMatrix::zeros(lmax);
    for l in 0..=lmax {
        let li = l as i64;
        for m in -li..=li {
            if m < li {
                lplus.set(l, m + 1, l, m, (p.qnum(li - m) * p.qnum(li + m + 1)).sqrt());
            }
            if m > -li {
                lminus.set(l, m - 1, l, m, (p.qnum(li + m) * p.qnum(li - m + 1)).sqrt());
            }
        }
    }
    Generators { l0, lplus, lminus }
}

/// `q^{s L0}`.
pub fn q_power_l0<T: Real>(p: &QParam<T>, s: i64, lmax: u32) -> OperatorMatrix<T> {
    OperatorMatrix::diagonal(lmax, |_, m| p.pow(s * m))
}

/// `Lambda_{+-1} = -+ q^{-L0} L+- / sqrt([2])`, `Lambda_0 = (q L+ L- - q^-1 L- L+)/[2]`.
pub fn build_lambda<T: Real>(p: &QParam<T>, g: &Generators<T>) -> VectorTriple<T> {
    let lmax = g.l0.lmax();
    let inv_root = T::one() / p.qnum(2).sqrt();
    let shift = q_power_l0(p, -1, lmax);
    let inv_two = T::one() / p.qnum(2);
    let zero = g
        .lplus
        .mul(&g.lminus)
        .scale(p.q())
        .sub(&g.lminus.mul(&g.lplus).scale(&(T::one() / p.q().clone())))
        .scale(&inv_two);
    VectorTriple {
        plus: shift.mul(&g.lplus).scale(&-inv_root.clone()),
        zero,
        minus: shift.mul(&g.lminus).scale(&inv_root),
    }
}

/// The invariant `c = q^{-2 L0} + lambda Lambda_0` in operator form.
pub fn build_c<T: Real>(p: &QParam<T>, lambda: &VectorTriple<T>) -> OperatorMatrix<T> {
    q_power_l0(p, -2, lambda.lmax()).add(&lambda.zero.scale(p.lambda()))
}

/// Which coefficient table fills the position operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionTable {
    /// Coefficients confirmed by Jackson integration and hermiticity.
    Verified,
    /// The table as commonly printed: `-` on the lower `x0` term and
    /// `q^{l-m}` on the upper `x-1` term.
    Printed,
}

/// `<l+1, m+k| x_k |l, m>` and `<l-1, m+k| x_k |l, m>`.
pub fn position_coefficients<T: Real>(p: &QParam<T>, table: PositionTable, k: Component, l: i64, m: i64) -> (T, T) {
    let n = |i: i64| p.qnum(i);
    let root = |num: T, den: T| if num.is_zero() { T::zero() } else { (num / den).sqrt() };
    let up_den = n(2 * l + 1) * n(2 * l + 3);
    let down_den = n(2 * l + 1) * n(2 * l - 1);
    match k {
        Component::Plus => (
            p.pow(l - m) * root(n(l + m + 1) * n(l + m + 2), n(2) * up_den),
            -(p.pow(-l - m - 1) * root(n(l - m) * n(l - m - 1), n(2) * down_den)),
        ),
        Component::Zero => {
            let lower = p.pow(-m) * root(n(l - m) * n(l + m), down_den);
            let lower = match table {
                PositionTable::Verified => lower,
                PositionTable::Printed => -lower,
            };
            (p.pow(-m) * root(n(l - m + 1) * n(l + m + 1), up_den), lower)
        }
        Component::Minus => {
            let upper_power = match table {
                PositionTable::Verified => -l - m,
                PositionTable::Printed => l - m,
            };
            (
                p.pow(upper_power) * root(n(l - m + 1) * n(l - m + 2), n(2) * up_den),
                -(p.pow(l - m + 1) * root(n(l + m) * n(l + m - 1), n(2) * down_den)),
            )
        }
    }
}

/// Unit-sphere position operators. The `(lmax + 1, lmax)` blocks fall
/// outside the basis and are dropped.
pub fn build_position<T: Real>(p: &QParam<T>, lmax: u32, table: PositionTable) -> VectorTriple<T> {
    let mut out = VectorTriple {
        plus: OperatorMatrix::zeros(lmax),
        zero: OperatorMatrix::zeros(lmax),
        minus: OperatorMatrix::zeros(lmax),
    };
    for k in Component::ALL {
        let x = out.get_mut(k);
        for l in 0..=lmax {
            let li = l as i64;
            for m in -li..=li {
                let mp = m + k.index();
                let (up, down) = position_coefficients(p, table, k, li, m);
                x.set(l + 1, mp, l, m, up);
                if l > 0 {
                    x.set(l - 1, mp, l, m, down);
                }
            }
        }
    }
    out
}

/// The two ways of building the transverse derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PartialMethod {
    /// Cross product of `x` with `Lambda` plus `x c`.
    Composed,
    /// Position blocks scaled by `[2l+2]/[2]` (up) and `-[2l]/[2]` (down).
    MatrixElements,
}

pub fn build_partial<T: Real>(
    p: &QParam<T>,
    x: &VectorTriple<T>,
    lambda: &VectorTriple<T>,
    c: &OperatorMatrix<T>,
    method: PartialMethod,
) -> VectorTriple<T> {
    match method {
        PartialMethod::Composed => {
            let q = p.q().clone();
            let qi = T::one() / q.clone();
            let plus = x
                .plus
                .mul(&lambda.zero)
                .scale(&qi)
                .sub(&x.zero.mul(&lambda.plus).scale(&q))
                .add(&x.plus.mul(c));
            let zero = x
                .plus
                .mul(&lambda.minus)
                .sub(&x.zero.mul(&lambda.zero).scale(p.lambda()))
                .sub(&x.minus.mul(&lambda.plus))
                .add(&x.zero.mul(c));
            let minus = x
                .zero
                .mul(&lambda.minus)
                .scale(&qi)
                .sub(&x.minus.mul(&lambda.zero).scale(&q))
                .add(&x.minus.mul(c));
            VectorTriple { plus, zero, minus }
        }
        PartialMethod::MatrixElements => x.map(|xk| {
            let mut out = OperatorMatrix::zeros(xk.lmax());
            for e in xk.entries() {
                let l = e.l as i64;
                let factor = if e.lp > e.l {
                    p.qnum(2 * l + 2) / p.qnum(2)
                } else if e.lp < e.l {
                    -(p.qnum(2 * l) / p.qnum(2))
                } else {
                    T::zero()
                };
                out.set(e.lp, e.mp, e.l, e.m, e.value * factor);
            }
            out
        }),
    }
}

/// `-(1/q) u1 v-1 + u0 v0 - q u-1 v1`.
pub fn scalar_product<T: Real>(p: &QParam<T>, u: &VectorTriple<T>, v: &VectorTriple<T>) -> Result<OperatorMatrix<T>> {
    if u.lmax() != v.lmax() {
        return Err(Error::TruncationMismatch(u.lmax() as usize, v.lmax() as usize));
    }
    let q = p.q().clone();
    Ok(u
        .plus
        .mul(&v.minus)
        .scale(&(-T::one() / q.clone()))
        .add(&u.zero.mul(&v.zero))
        .sub(&u.minus.mul(&v.plus).scale(&q)))
}

/// Largest violation of the q-vector conditions
/// `[L0, v_k] = k v_k` and `(L+- v_k - q^k v_k L+-) q^{L0} = sqrt([2]) v_{k+-1}`.
pub fn vector_condition_residual<T: Real>(
    p: &QParam<T>,
    g: &Generators<T>,
    v: &VectorTriple<T>,
    limit: u32,
) -> T {
    let lmax = v.lmax();
    let root = p.qnum(2).sqrt();
    let qpow = q_power_l0(p, 1, lmax);
    let mut worst = T::zero();
    for k in Component::ALL {
        let vk = v.get(k);
        let kv = k.index();
        let r0 = g.l0.commutator(vk).sub(&vk.scale(&T::from_i64(kv)));
        worst = worst.max(r0.max_abs_within(limit));
        for (shift, ladder) in [(1, &g.lplus), (-1, &g.lminus)] {
            let lhs = ladder.mul(vk).sub(&vk.mul(ladder).scale(&p.pow(kv))).mul(&qpow);
            let rhs = match k.shifted(shift) {
                Some(next) => v.get(next).scale(&root),
                None => OperatorMatrix::zeros(lmax),
            };
            worst = worst.max(lhs.sub(&rhs).max_abs_within(limit));
        }
    }
    worst
}

/// All operators at one `(q, lmax)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet<T> {
    pub p: QParam<T>,
    pub generators: Generators<T>,
    pub lambda: VectorTriple<T>,
    pub c: OperatorMatrix<T>,
    pub x: VectorTriple<T>,
    pub partial: VectorTriple<T>,
    pub partial_elements: VectorTriple<T>,
}

impl<T: Real> OperatorSet<T> {
    pub fn build(p: &QParam<T>, lmax: u32, table: PositionTable) -> Self {
        let generators = build_generators(p, lmax);
        let lambda = build_lambda(p, &generators);
        let c = build_c(p, &lambda);
        let x = build_position(p, lmax, table);
        Self::assemble(p, generators, lambda, c, x)
    }

    /// Rebuild the derived operators after `x` has been modified.
    pub fn with_position(self, x: VectorTriple<T>) -> Self {
        Self::assemble(&self.p, self.generators, self.lambda, self.c, x)
    }

    fn assemble(
        p: &QParam<T>,
        generators: Generators<T>,
        lambda: VectorTriple<T>,
        c: OperatorMatrix<T>,
        x: VectorTriple<T>,
    ) -> Self {
        let partial = build_partial(p, &x, &lambda, &c, PartialMethod::Composed);
        let partial_elements = build_partial(p, &x, &lambda, &c, PartialMethod::MatrixElements);
        OperatorSet { p: p.clone(), generators, lambda, c, x, partial, partial_elements }
    }

    pub fn lmax(&self) -> u32 {
        self.c.lmax()
    }
}

/// Residual of one identity over the interior blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResidual {
    pub name: &'static str,
    pub relation: &'static str,
    /// `None` when the identity does not apply at this `q`.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityResidual {
    pub fn new(name: &'static str, relation: &'static str, residual: Option<f64>, tolerance: f64) -> Self {
        let passed = residual.is_none_or(|r| r <= tolerance);
        IdentityResidual { name, relation, residual, tolerance, passed }
    }
}

/// One candidate closed form for the diagonal of `d . d`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateResidual {
    pub name: &'static str,
    pub formula: &'static str,
    pub residual: f64,
    pub matches: bool,
}

/// How the diagonal of `d . d` compares with the candidate closed forms.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartialSquareFinding {
    pub candidates: Vec<CandidateResidual>,
    /// Name of the unique matching candidate, if exactly one matches.
    pub resolved: Option<&'static str>,
    /// Largest off-diagonal entry of `d . d` on the interior.
    pub off_diagonal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgebraReport {
    pub q: f64,
    pub lmax: u32,
    /// Identities are checked on blocks with both labels at most this value.
    pub interior: u32,
    pub tolerance: f64,
    pub identities: Vec<IdentityResidual>,
    pub partial_square: PartialSquareFinding,
    /// Largest change of any interior residual when rebuilt at `lmax + 2`.
    pub truncation_drift: Option<f64>,
}

impl AlgebraReport {
    pub fn all_passed(&self) -> bool {
        self.identities.iter().all(|i| i.passed) && self.partial_square.resolved.is_some()
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityResidual> {
        self.identities.iter().filter(|i| !i.passed)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.identities.iter().find(|i| i.name == name).and_then(|i| i.residual)
    }
}

/// Margin between `lmax` and the largest interior label.
pub const INTERIOR_MARGIN: u32 = 2;

/// Smallest truncation the verifier accepts.
pub const MIN_VERIFY_LMAX: u32 = 3;

type Check<'a> = Box<dyn Fn() -> IdentityResidual + Send + Sync + 'a>;

/// Check every operator identity on the interior blocks, then rebuild at
/// `lmax + 2` to confirm the interior residuals do not move.
pub fn verify_algebra<T: Real>(p: &QParam<T>, lmax: u32, tolerance: f64) -> Result<AlgebraReport> {
    if lmax < MIN_VERIFY_LMAX {
        return Err(Error::TruncationTooSmall { lmax: lmax as usize, min: MIN_VERIFY_LMAX as usize });
    }
    let ops = OperatorSet::build(p, lmax, PositionTable::Verified);
    let mut report = verify_operator_set(&ops, tolerance, lmax - INTERIOR_MARGIN);
    let wider = OperatorSet::build(p, lmax + INTERIOR_MARGIN, PositionTable::Verified);
    let again = verify_operator_set(&wider, tolerance, lmax - INTERIOR_MARGIN);
    let drift = report
        .identities
        .iter()
        .zip(&again.identities)
        .filter_map(|(a, b)| Some((a.residual? - b.residual?).abs()))
        .fold(0.0f64, f64::max);
    report.truncation_drift = Some(drift);
    Ok(report)
}

/// Run the identity catalogue on a prebuilt operator set, checking blocks
/// with labels up to `interior`.
pub fn verify_operator_set<T: Real>(ops: &OperatorSet<T>, tolerance: f64, interior: u32) -> AlgebraReport {
    let p = &ops.p;
    let lmax = ops.lmax();
    let g = &ops.generators;
    let (x, d, lam, c) = (&ops.x, &ops.partial, &ops.lambda, &ops.c);
    let res = |m: &OperatorMatrix<T>| Some(m.max_abs_within(interior).to_f64());
    let eigen = |f: &dyn Fn(u32) -> T| OperatorMatrix::diagonal(lmax, |l, _| f(l));
    let qi = T::one() / p.q().clone();

    let checks: Vec<Check<'_>> = vec![
        Box::new(|| {
            let r = g.l0.commutator(&g.lplus).sub(&g.lplus);
            IdentityResidual::new("generators.l0_lplus", "[L0, L+] = L+", res(&r), tolerance)
        }),
        Box::new(|| {
            let r = g.l0.commutator(&g.lminus).add(&g.lminus);
            IdentityResidual::new("generators.l0_lminus", "[L0, L-] = -L-", res(&r), tolerance)
        }),
        Box::new(|| {
            let two_l0 = OperatorMatrix::diagonal(lmax, |_, m| p.qnum(2 * m));
            let r = g.lplus.commutator(&g.lminus).sub(&two_l0);
            IdentityResidual::new("generators.lplus_lminus", "[L+, L-] = [2 L0]", res(&r), tolerance)
        }),
        Box::new(|| {
            let shift = OperatorMatrix::diagonal(lmax, |_, m| p.qnum(m) * p.qnum(m + 1));
            let r = g.lminus.mul(&g.lplus).add(&shift).sub(&eigen(&|l| p.invariants(l).casimir));
            IdentityResidual::new("casimir.eigenvalue", "L- L+ + [L0][L0+1] = [l][l+1]", res(&r), tolerance)
        }),
        Box::new(|| {
            let r = scalar_product(p, lam, lam).expect("same truncation");
            let r = r.sub(&eigen(&|l| p.invariants(l).casimir_prime));
            IdentityResidual::new("lambda.square", "Lambda . Lambda = [2l][2l+2]/[2]^2", res(&r), tolerance)
        }),
        Box::new(|| {
            let r = c.sub(&eigen(&|l| p.invariants(l).c));
            IdentityResidual::new(
                "c.eigenvalue",
                "q^{-2 L0} + lambda Lambda_0 = (q^{2l+1} + q^{-2l-1})/[2]",
                res(&r),
                tolerance,
            )
        }),
        Box::new(|| {
            let r = Some(vector_condition_residual(p, g, lam, interior).to_f64());
            IdentityResidual::new("vector.lambda", "Lambda is a q-vector", r, tolerance)
        }),
        Box::new(|| {
            let r = Some(vector_condition_residual(p, g, x, interior).to_f64());
            IdentityResidual::new("vector.position", "x is a q-vector", r, tolerance)
        }),
        Box::new(|| {
            let r = Some(vector_condition_residual(p, g, d, interior).to_f64());
            IdentityResidual::new("vector.partial", "d is a q-vector", r, tolerance)
        }),
        Box::new(|| {
            let r0 = x.zero.mul(&x.plus).sub(&x.plus.mul(&x.zero).scale(&p.pow(-2)));
            let r1 = x.zero.mul(&x.minus).sub(&x.minus.mul(&x.zero).scale(&p.pow(2)));
            let r = max2(res(&r0), res(&r1));
            IdentityResidual::new("position.commute_zero", "x0 x+-1 = q^{-+2} x+-1 x0", r, tolerance)
        }),
        Box::new(|| {
            let r = x.plus.commutator(&x.minus).sub(&x.zero.mul(&x.zero).scale(p.lambda()));
            IdentityResidual::new("position.commute_plus_minus", "x1 x-1 = x-1 x1 + lambda x0^2", res(&r), tolerance)
        }),
        Box::new(|| {
            let r = scalar_product(p, x, x).expect("same truncation").sub(&OperatorMatrix::identity(lmax));
            IdentityResidual::new("position.unit_length", "x . x = 1", res(&r), tolerance)
        }),
        Box::new(|| {
            let a = x.plus.transpose().add(&x.minus.scale(&qi));
            let b = x.zero.transpose().sub(&x.zero);
            IdentityResidual::new("position.hermiticity", "x1^+ = -x-1/q, x0^+ = x0", max2(res(&a), res(&b)), tolerance)
        }),
        Box::new(|| {
            let e = &ops.partial_elements;
            let r = Component::ALL
                .iter()
                .map(|&k| res(&d.get(k).sub(e.get(k))))
                .fold(Some(0.0), max2);
            IdentityResidual::new("partial.dual_construction", "composed d = d from x matrix elements", r, tolerance)
        }),
        Box::new(|| {
            // d_k^+ = -(-1/q)^k d_-k
            let r = Component::ALL
                .iter()
                .map(|&k| {
                    let minus_k = Component::from_index(-k.index()).expect("valid component");
                    let factor = -((-qi.clone()).powi(k.index()));
                    res(&d.get(k).transpose().sub(&d.get(minus_k).scale(&factor)))
                })
                .fold(Some(0.0), max2);
            IdentityResidual::new("partial.hermiticity", "d_k^+ = -(-1/q)^k d_-k", r, tolerance)
        }),
        Box::new(|| {
            let r = if p.is_classical() {
                None
            } else {
                let inv = T::one() / (p.lambda().clone() * p.lambda().clone());
                Component::ALL
                    .iter()
                    .map(|&k| res(&c.commutator(x.get(k)).scale(&inv).sub(d.get(k))))
                    .fold(Some(0.0), max2)
            };
            IdentityResidual::new("partial.from_c_commutator", "d = lambda^-2 [c, x]", r, tolerance)
        }),
        Box::new(|| {
            let a = scalar_product(p, x, d).expect("same truncation").sub(c);
            let b = scalar_product(p, d, x).expect("same truncation").add(c);
            IdentityResidual::new("partial.contraction", "x . d = -d . x = c", max2(res(&a), res(&b)), tolerance)
        }),
        Box::new(|| {
            let a = d.zero.mul(&d.plus).sub(&d.plus.mul(&d.zero).scale(&p.pow(-2)));
            let b = d.zero.mul(&d.minus).sub(&d.minus.mul(&d.zero).scale(&p.pow(2)));
            IdentityResidual::new("partial.commute_zero", "d0 d+-1 = q^{-+2} d+-1 d0", max2(res(&a), res(&b)), tolerance)
        }),
        Box::new(|| {
            let r = d.plus.commutator(&d.minus).sub(&d.zero.mul(&d.zero).scale(p.lambda()));
            IdentityResidual::new("partial.commute_plus_minus", "d1 d-1 = d-1 d1 + lambda d0^2", res(&r), tolerance)
        }),
        Box::new(|| {
            let r = Component::ALL
                .iter()
                .map(|&k| {
                    let e = ops.partial_elements.get(k);
                    let diag = e
                        .entries()
                        .into_iter()
                        .filter(|en| en.lp == en.l && en.l <= interior)
                        .fold(0.0f64, |acc, en| acc.max(en.value.to_f64().abs()));
                    let composed = d
                        .get(k)
                        .entries()
                        .into_iter()
                        .filter(|en| en.lp == en.l && en.l <= interior)
                        .fold(0.0f64, |acc, en| acc.max(en.value.to_f64().abs()));
                    Some(diag.max(composed))
                })
                .fold(Some(0.0), max2);
            IdentityResidual::new("partial.no_diagonal_blocks", "<l m'| d_k |l m> = 0", r, tolerance)
        }),
        Box::new(|| {
            let band = d.plus.l_bandwidth().max(d.zero.l_bandwidth()).max(d.minus.l_bandwidth());
            let r = Some(band.saturating_sub(1) as f64);
            IdentityResidual::new("partial.selection_rule", "d_k connects l to l +- 1 only", r, tolerance)
        }),
    ];

    let identities: Vec<IdentityResidual> = checks.par_iter().map(|check| check()).collect();
    let partial_square = partial_square_finding(p, d, interior, tolerance);
    AlgebraReport {
        q: p.q().to_f64(),
        lmax,
        interior,
        tolerance,
        identities,
        partial_square,
        truncation_drift: None,
    }
}

fn max2(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Compare the diagonal of `d . d` with three closed forms.
pub fn partial_square_finding<T: Real>(
    p: &QParam<T>,
    d: &VectorTriple<T>,
    interior: u32,
    tolerance: f64,
) -> PartialSquareFinding {
    let dd = scalar_product(p, d, d).expect("same truncation");
    let two = p.qnum(2);
    let two_sq = two.clone() * two;
    type Form<T> = Box<dyn Fn(u32) -> T>;
    let forms: Vec<(&'static str, &'static str, Form<T>)> = vec![
        (
            "odd_middle_factor",
            "-[2l][2l+1]/[2]^2 - c_l^2",
            Box::new({
                let two_sq = two_sq.clone();
                let p = p.clone();
                move |l| {
                    let c = p.invariants(l).c;
                    -(p.qnum(2 * l as i64) * p.qnum(2 * l as i64 + 1) / two_sq.clone()) - c.clone() * c
                }
            }),
        ),
        (
            "radial_operator_form",
            "-([2l][2l+2]/[2]^2 + c_l^2 - c_l)",
            Box::new({
                let p = p.clone();
                move |l| {
                    let inv = p.invariants(l);
                    -(inv.casimir_prime + inv.c.clone() * inv.c.clone() - inv.c)
                }
            }),
        ),
        (
            "second_invariant_form",
            "-[2l][2l+2]/[2]^2 - c_l^2",
            Box::new({
                let p = p.clone();
                move |l| {
                    let inv = p.invariants(l);
                    -inv.casimir_prime - inv.c.clone() * inv.c
                }
            }),
        ),
    ];
    let mut off_diagonal = 0.0f64;
    let mut diag: Vec<(u32, T)> = Vec::new();
    for e in dd.entries() {
        if e.lp > interior || e.l > interior {
            continue;
        }
        if e.lp == e.l && e.mp == e.m {
            diag.push((e.l, e.value));
        } else {
            off_diagonal = off_diagonal.max(e.value.to_f64().abs());
        }
    }
    // any diagonal entries missing from the sparse listing are zero
    for l in 0..=interior {
        for m in -(l as i64)..=l as i64 {
            if dd.get(l, m, l, m).is_zero() {
                diag.push((l, T::zero()));
            }
        }
    }
    let candidates: Vec<CandidateResidual> = forms
        .into_iter()
        .map(|(name, formula, f)| {
            let residual = diag.iter().fold(0.0f64, |acc, (l, v)| acc.max((v.clone() - f(*l)).abs().to_f64()));
            CandidateResidual { name, formula, residual, matches: residual <= tolerance }
        })
        .collect();
    let matching: Vec<_> = candidates.iter().filter(|c| c.matches).collect();
    let resolved = (matching.len() == 1).then(|| matching[0].name);
    PartialSquareFinding { candidates, resolved, off_diagonal }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::HighPrecision;

    fn qp(q: f64) -> QParam<f64> {
        QParam::from_f64(q).unwrap()
    }

    #[test]
    fn block_storage() {
        let mut a = OperatorMatrix::<f64>::zeros(2);
        a.set(1, 0, 2, 1, 3.0);
        a.set(3, 0, 2, 0, 9.0);
        assert_eq!(a.get(1, 0, 2, 1), 3.0);
        assert_eq!(a.get(3, 0, 2, 0), 0.0);
        assert_eq!(a.delta_m(), Some(-1));
        assert_eq!(a.transpose().get(2, 1, 1, 0), 3.0);
        assert_eq!(a.l_bandwidth(), 1);
        let id = OperatorMatrix::identity(2);
        assert_eq!(id.mul(&a), a);
        assert_eq!(OperatorMatrix::<f64>::identity(1).delta_m(), Some(0));
    }

    #[test]
    fn classical_spin_one() {
        let g = build_generators(&qp(1.0), 1);
        let r2 = 2f64.sqrt();
        assert_eq!(g.lplus.get(1, 1, 1, 0), r2);
        assert_eq!(g.lplus.get(1, 0, 1, -1), r2);
        assert_eq!(g.lminus.get(1, -1, 1, 0), r2);
        assert_eq!(g.l0.get(1, -1, 1, -1), -1.0);
    }

    #[test]
    fn generator_relations_hold_exactly() {
        let p = qp(1.7);
        let g = build_generators(&p, 6);
        let two_l0 = OperatorMatrix::diagonal(6, |_, m| p.qnum(2 * m));
        let r = g.lplus.commutator(&g.lminus).sub(&two_l0);
        assert!(r.max_abs_within(6) < 1e-12);
    }

    #[test]
    fn classical_lambda_is_angular_momentum() {
        let p = qp(1.0);
        let g = build_generators(&p, 3);
        let lam = build_lambda(&p, &g);
        let r2 = 2f64.sqrt();
        assert!(lam.zero.sub(&g.l0).max_abs_within(3) < 1e-14);
        assert!(lam.plus.add(&g.lplus.scale(&(1.0 / r2))).max_abs_within(3) < 1e-14);
        assert!(lam.minus.sub(&g.lminus.scale(&(1.0 / r2))).max_abs_within(3) < 1e-14);
    }

    #[test]
    fn lambda_square_matches_second_invariant() {
        for q in [0.6, 1.3, 2.0] {
            let p = qp(q);
            let lam = build_lambda(&p, &build_generators(&p, 8));
            let sq = scalar_product(&p, &lam, &lam).unwrap();
            for l in 0..=8u32 {
                for m in -(l as i64)..=l as i64 {
                    let want = p.invariants(l).casimir_prime;
                    assert!((sq.get(l, m, l, m) - want).abs() < 1e-9 * want.max(1.0));
                }
            }
        }
    }

    #[test]
    fn invariants_symmetric_under_inverse_q() {
        let (p, pi) = (qp(1.6), qp(1.0 / 1.6));
        let c = build_c(&p, &build_lambda(&p, &build_generators(&p, 5)));
        let ci = build_c(&pi, &build_lambda(&pi, &build_generators(&pi, 5)));
        for l in 0..=5u32 {
            for m in -(l as i64)..=l as i64 {
                assert!((c.get(l, m, l, m) - ci.get(l, m, l, m)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn classical_position_elements() {
        let x = build_position(&qp(1.0), 3, PositionTable::Verified);
        // cos(theta) Y_00 = Y_10 / sqrt 3
        assert!((x.zero.get(1, 0, 0, 0) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((x.zero.get(0, 0, 1, 0) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(x.zero.get(2, 0, 2, 0).abs() < 1e-15);
        assert_eq!(x.plus.delta_m(), Some(1));
        assert_eq!(x.minus.delta_m(), Some(-1));
    }

    #[test]
    fn printed_table_breaks_hermiticity() {
        let p = qp(1.4);
        let printed = build_position(&p, 5, PositionTable::Printed);
        let r = printed.zero.transpose().sub(&printed.zero).max_abs_within(3);
        assert!(r > 1e-2);
        let good = build_position(&p, 5, PositionTable::Verified);
        assert!(good.zero.transpose().sub(&good.zero).max_abs_within(3) < 1e-14);
    }

    #[test]
    fn rejects_small_truncation() {
        assert_eq!(
            verify_algebra(&qp(1.2), 2, 1e-10).unwrap_err(),
            Error::TruncationTooSmall { lmax: 2, min: 3 }
        );
    }

    #[test]
    fn report_at_q_08() {
        let report = verify_algebra(&qp(0.8), 6, 1e-10).unwrap();
        let failing: Vec<_> = report.failures().map(|f| f.name).collect();
        assert_eq!(failing, vec!["partial.commute_zero", "partial.commute_plus_minus"]);
        assert_eq!(report.partial_square.resolved, Some("second_invariant_form"));
        assert!(report.truncation_drift.unwrap() < 1e-12);
    }

    #[test]
    fn classical_report() {
        let report = verify_algebra(&qp(1.0), 5, 1e-12).unwrap();
        for id in &report.identities {
            if !id.name.starts_with("partial.commute") {
                assert!(id.passed, "{} {:?}", id.name, id.residual);
            }
        }
        assert_eq!(report.residual("partial.from_c_commutator"), None);
        assert_eq!(report.partial_square.resolved, Some("second_invariant_form"));
        // classical transverse gradient: -l(l+1) - 1
        let ops = OperatorSet::build(&qp(1.0), 5, PositionTable::Verified);
        let dd = scalar_product(&ops.p, &ops.partial, &ops.partial).unwrap();
        for l in 0..=3u32 {
            assert!((dd.get(l, 0, l, 0) + (l * (l + 1)) as f64 + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn high_precision_residuals() {
        let p = QParam::<HighPrecision>::from_decimal("1.3").unwrap();
        let report = verify_algebra(&p, 4, 1e-25).unwrap();
        for id in &report.identities {
            if !id.name.starts_with("partial.commute") {
                assert!(id.passed, "{} {:?}", id.name, id.residual);
            }
        }
        assert_eq!(report.partial_square.resolved, Some("second_invariant_form"));
    }
}
