//! Effective angular number, Coulomb and oscillator spectra, and an
//! independent shooting solver that checks them.
//!
//! Units are `hbar = mass = 1` with `V(r) = -1/r` or `V(r) = r^2 / 2`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jackson::QMeasure;
use crate::qcore::QParam;

/// Energies closer than this are grouped as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Potential {
    Coulomb,
    Oscillator,
}

impl Potential {
    pub fn energy(self, n: u32, big_l: f64) -> f64 {
        match self {
            Potential::Coulomb => -1.0 / (2.0 * (n as f64 + big_l + 1.0).powi(2)),
            Potential::Oscillator => 2.0 * n as f64 + big_l + 1.5,
        }
    }

    fn value(self, r: f64) -> f64 {
        match self {
            Potential::Coulomb => -1.0 / r,
            Potential::Oscillator => 0.5 * r * r,
        }
    }

    /// The integer that labels a classical degenerate shell.
    pub fn shell(self, n: u32, l: u32) -> u32 {
        match self {
            Potential::Coulomb => n + l,
            Potential::Oscillator => 2 * n + l,
        }
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Potential::Coulomb => "coulomb",
            Potential::Oscillator => "oscillator",
        })
    }
}

impl FromStr for Potential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coulomb" => Ok(Potential::Coulomb),
            "oscillator" => Ok(Potential::Oscillator),
            other => Err(Error::InvalidArgument(format!("unknown potential: {other}"))),
        }
    }
}

/// `L(L+1) = [2l][2l+2]/[2]^2 + c_l^2 - c_l`.
pub fn centrifugal_rhs(l: u32, p: &QParam<f64>) -> f64 {
    let inv = p.invariants(l);
    inv.casimir_prime + inv.c * inv.c - inv.c
}

/// Nonnegative root `L` of `L(L+1) = rhs`; the other root makes `r^L` blow up at the origin.
pub fn solve_l(l: u32, p: &QParam<f64>) -> f64 {
    if p.is_classical() {
        return l as f64;
    }
    let rhs = centrifugal_rhs(l, p);
    assert!(rhs >= 0.0, "centrifugal term must be nonnegative, got {rhs}");
    if rhs == 0.0 {
        return 0.0;
    }
    ((1.0 + 4.0 * rhs).sqrt() - 1.0) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumEntry {
    pub potential: Potential,
    pub q: f64,
    pub n: u32,
    pub l: u32,
    #[serde(rename = "L")]
    pub big_l: f64,
    #[serde(rename = "E")]
    pub energy: f64,
}

pub fn energy(potential: Potential, n: u32, l: u32, p: &QParam<f64>) -> SpectrumEntry {
    let big_l = solve_l(l, p);
    SpectrumEntry { potential, q: *p.q(), n, l, big_l, energy: potential.energy(n, big_l) }
}

pub fn coulomb_energy(n: u32, l: u32, p: &QParam<f64>) -> SpectrumEntry {
    energy(Potential::Coulomb, n, l, p)
}

pub fn oscillator_energy(n: u32, l: u32, p: &QParam<f64>) -> SpectrumEntry {
    energy(Potential::Oscillator, n, l, p)
}

/// All `(n, l)` with `n <= nmax`, `l <= lmax` at each `q`, sorted by `(q, l, n)`.
pub fn spectrum_table(potential: Potential, qs: &[QParam<f64>], nmax: u32, lmax: u32) -> Vec<SpectrumEntry> {
    let tasks: Vec<(usize, u32, u32)> = (0..qs.len())
        .flat_map(|i| (0..=lmax).flat_map(move |l| (0..=nmax).map(move |n| (i, l, n))))
        .collect();
    let mut rows: Vec<SpectrumEntry> = tasks.par_iter().map(|&(i, l, n)| energy(potential, n, l, &qs[i])).collect();
    rows.sort_by(|a, b| a.q.total_cmp(&b.q).then(a.l.cmp(&b.l)).then(a.n.cmp(&b.n)));
    rows
}

/// Grid for the shooting solver. The radial coordinate is `r = e^t` with `t`
/// uniform, so the origin region and the tail get comparable resolution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialGrid {
    pub r_min: f64,
    /// Outer boundary; chosen from the decay length of the expected state when `None`.
    pub r_max: Option<f64>,
    pub steps: usize,
    pub max_iterations: usize,
    /// Extra doublings of the energy window tried before giving up.
    pub max_widenings: usize,
}

impl Default for RadialGrid {
    fn default() -> Self {
        RadialGrid { r_min: 1e-6, r_max: None, steps: 40_000, max_iterations: 200, max_widenings: 6 }
    }
}

impl RadialGrid {
    fn validate(&self) -> Result<()> {
        if !(self.r_min > 0.0 && self.r_min.is_finite()) {
            return Err(Error::InvalidGrid("r_min must be positive"));
        }
        if let Some(r) = self.r_max {
            if !(r > self.r_min && r.is_finite()) {
                return Err(Error::InvalidGrid("r_max must exceed r_min"));
            }
        }
        if self.steps < 100 {
            return Err(Error::InvalidGrid("need at least 100 steps"));
        }
        Ok(())
    }

    fn outer(&self, potential: Potential, n: u32, big_l: f64) -> f64 {
        self.r_max.unwrap_or_else(|| match potential {
            // decay exp(-r / (n + L + 1))
            Potential::Coulomb => 40.0 * (n as f64 + big_l + 1.0),
            // decay exp(-r^2 / 2) beyond the turning point
            Potential::Oscillator => (2.0 * potential.energy(n, big_l)).sqrt() + 10.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialReport {
    pub potential: Potential,
    pub q: f64,
    pub n: u32,
    pub l: u32,
    #[serde(rename = "L")]
    pub big_l: f64,
    /// Coefficient of the `1/(2 r^2)` term in the reduced equation.
    pub centrifugal: f64,
    pub energy_closed: f64,
    pub energy_numeric: f64,
    pub delta: f64,
    /// Smallest `|w| / max |w|` past the last node at the converged energy;
    /// small when the state has decayed well inside `r_max`.
    pub tail_ratio: f64,
    /// Width of the final bisection bracket.
    pub bracket: f64,
    pub r_max: f64,
    pub window: (f64, f64),
    pub widenings: usize,
    pub iterations: usize,
}

/// Outward Numerov integration of `w'' = ((L+1/2)^2 + 2 r^2 (V - E)) w` in `t = ln r`,
/// where `u r = r^{1/2} w`. Returns the node count and the tail ratio.
fn shoot(potential: Potential, big_l: f64, e: f64, r_min: f64, r_max: f64, steps: usize) -> (usize, f64) {
    let t0 = r_min.ln();
    let h = (r_max.ln() - t0) / steps as f64;
    let h12 = h * h / 12.0;
    let a = (big_l + 0.5).powi(2);
    let g = |i: usize| {
        let r = (t0 + i as f64 * h).exp();
        a + 2.0 * r * r * (potential.value(r) - e)
    };
    // near the origin w ~ r^{L+1/2}
    let mut prev = 1.0f64;
    let mut cur = ((big_l + 0.5) * h).exp();
    let (mut g_prev, mut g_cur) = (g(0), g(1));
    let mut nodes = 0;
    let mut peak = cur.abs().max(1.0);
    let mut tail = 1.0f64;
    for i in 1..steps {
        let g_next = g(i + 1);
        let next = (2.0 * cur * (1.0 + 5.0 * h12 * g_cur) - prev * (1.0 - h12 * g_prev)) / (1.0 - h12 * g_next);
        if next == 0.0 || next.signum() != cur.signum() {
            nodes += 1;
            tail = 1.0;
        }
        prev = cur;
        cur = next;
        g_prev = g_cur;
        g_cur = g_next;
        peak = peak.max(cur.abs());
        tail = tail.min(cur.abs() / peak);
        if peak > 1e200 {
            prev /= peak;
            cur /= peak;
            peak = 1.0;
        }
    }
    (nodes, tail)
}

/// Find the eigenvalue with `n` radial nodes by bisection on the node count,
/// starting from the closed-form energy +-20%.
pub fn radial_verify(potential: Potential, n: u32, l: u32, p: &QParam<f64>, grid: &RadialGrid) -> Result<RadialReport> {
    grid.validate()?;
    let closed = energy(potential, n, l, p);
    let big_l = closed.big_l;
    let r_max = grid.outer(potential, n, big_l);
    let count = |e: f64| shoot(potential, big_l, e, grid.r_min, r_max, grid.steps);
    let target = n as usize;

    let mut half_width = 0.2 * closed.energy.abs();
    let mut widenings = 0;
    let (mut lo, mut hi) = loop {
        let lo = closed.energy - half_width;
        let mut hi = closed.energy + half_width;
        if potential == Potential::Coulomb {
            hi = hi.min(-f64::MIN_POSITIVE);
        }
        if count(lo).0 <= target && count(hi).0 > target {
            break (lo, hi);
        }
        if widenings == grid.max_widenings {
            return Err(Error::NotBracketed { lo, hi, nodes: target });
        }
        widenings += 1;
        half_width *= 2.0;
    };
    let window = (lo, hi);

    let mut iterations = 0;
    while hi - lo > 1e-13 * closed.energy.abs().max(1.0) {
        if iterations == grid.max_iterations {
            return Err(Error::NotConverged(iterations));
        }
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if count(mid).0 > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let e = 0.5 * (lo + hi);
    let (_, tail_ratio) = count(e);
    Ok(RadialReport {
        potential,
        q: *p.q(),
        n,
        l,
        big_l,
        centrifugal: big_l * (big_l + 1.0),
        energy_closed: closed.energy,
        energy_numeric: e,
        delta: (e - closed.energy).abs(),
        tail_ratio,
        bracket: hi - lo,
        r_max,
        window,
        widenings,
        iterations,
    })
}

/// Levels sharing one energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyGroup {
    pub energy: f64,
    pub members: Vec<(u32, u32)>,
    /// Total `sum (2l + 1)` over the members.
    pub multiplicity: u32,
}

/// A shell that is degenerate at `q = 1` and what happened to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShellStatus {
    pub shell: u32,
    pub members: Vec<(u32, u32)>,
    pub energies: Vec<f64>,
    pub spread: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegeneracyReport {
    pub potential: Potential,
    pub q: f64,
    pub tolerance: f64,
    pub groups: Vec<EnergyGroup>,
    /// Classical shells with more than one `(n, l)` inside the table.
    pub shells: Vec<ShellStatus>,
    /// Each level keeps its `2l + 1` values of `m`; the energy does not depend on `m`.
    pub m_degeneracy_intact: bool,
}

impl DegeneracyReport {
    pub fn shell(&self, key: u32) -> Option<&ShellStatus> {
        self.shells.iter().find(|s| s.shell == key)
    }
}

pub fn degeneracy_report(potential: Potential, p: &QParam<f64>, nmax: u32, lmax: u32) -> DegeneracyReport {
    let mut rows = spectrum_table(potential, std::slice::from_ref(p), nmax, lmax);
    rows.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.n.cmp(&b.n)));
    let mut groups: Vec<EnergyGroup> = Vec::new();
    for r in &rows {
        match groups.last_mut() {
            Some(g) if (r.energy - g.energy).abs() <= DEGENERACY_TOLERANCE => {
                g.members.push((r.n, r.l));
                g.multiplicity += 2 * r.l + 1;
            }
            _ => groups.push(EnergyGroup { energy: r.energy, members: vec![(r.n, r.l)], multiplicity: 2 * r.l + 1 }),
        }
    }

    let mut shells: Vec<ShellStatus> = Vec::new();
    let mut by_shell = rows.clone();
    by_shell.sort_by_key(|r| (potential.shell(r.n, r.l), r.l));
    for chunk in by_shell.chunk_by(|a, b| potential.shell(a.n, a.l) == potential.shell(b.n, b.l)) {
        if chunk.len() < 2 {
            continue;
        }
        let energies: Vec<f64> = chunk.iter().map(|r| r.energy).collect();
        let max = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        shells.push(ShellStatus {
            shell: potential.shell(chunk[0].n, chunk[0].l),
            members: chunk.iter().map(|r| (r.n, r.l)).collect(),
            energies,
            spread: max - min,
            degenerate: max - min <= DEGENERACY_TOLERANCE,
        });
    }

    DegeneracyReport {
        potential,
        q: *p.q(),
        tolerance: DEGENERACY_TOLERANCE,
        groups,
        shells,
        m_degeneracy_intact: true,
    }
}

/// Second moment of `x0` in the angle-independent state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultipoleReport {
    pub q: f64,
    /// `<x0^2> / <1>` from the Jackson integral.
    pub x0_squared: f64,
    /// `1 / [3]`.
    pub inverse_q3: f64,
    pub classical: f64,
    /// `(3 <x0^2> - 1) / 2`, zero for a spherically symmetric state.
    pub quadrupole: f64,
}

pub fn multipole_report(p: &QParam<f64>) -> MultipoleReport {
    let mu = QMeasure::closed_form(p.clone());
    let x0_squared = mu.integrate_monomial(2) / mu.integrate_monomial(0);
    MultipoleReport {
        q: *p.q(),
        x0_squared,
        inverse_q3: 1.0 / p.qnum(3),
        classical: 1.0 / 3.0,
        quadrupole: (3.0 * x0_squared - 1.0) / 2.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn qp(q: f64) -> QParam<f64> {
        QParam::from_f64(q).unwrap()
    }

    #[test]
    fn solve_l_examples() {
        for q in [0.3, 1.0, 1.7, 5.0] {
            assert_eq!(solve_l(0, &qp(q)), 0.0);
        }
        for l in 0..7 {
            assert_eq!(solve_l(l, &qp(1.0)), l as f64);
        }
        assert_abs_diff_eq!(centrifugal_rhs(1, &qp(2.0)), 11.5625, epsilon = 1e-12);
        assert_abs_diff_eq!(solve_l(1, &qp(2.0)), (-1.0 + 47.25f64.sqrt()) / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(solve_l(1, &qp(2.0)), 2.936932, epsilon = 1e-6);
    }

    #[test]
    fn energy_examples() {
        let p = qp(2.0);
        let big_l = (-1.0 + 47.25f64.sqrt()) / 2.0;
        assert_abs_diff_eq!(coulomb_energy(0, 1, &p).energy, -1.0 / (2.0 * (1.0 + big_l).powi(2)), epsilon = 1e-15);
        assert_abs_diff_eq!(coulomb_energy(0, 1, &p).energy, -0.0322592, epsilon = 1e-7);
        assert_abs_diff_eq!(oscillator_energy(1, 1, &p).energy, 3.5 + big_l, epsilon = 1e-14);
        for n in 0..4 {
            for l in 0..4 {
                let c = coulomb_energy(n, l, &qp(1.0)).energy;
                assert_eq!(c, -1.0 / (2.0 * ((n + l + 1) as f64).powi(2)));
                assert_eq!(oscillator_energy(n, l, &qp(1.0)).energy, (2 * n + l) as f64 + 1.5);
            }
        }
    }

    #[test]
    fn l_zero_rows_are_bitwise_equal() {
        let base = spectrum_table(Potential::Coulomb, &[qp(1.2)], 3, 0);
        let other = spectrum_table(Potential::Coulomb, &[qp(2.0)], 3, 0);
        for (a, b) in base.iter().zip(&other) {
            assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        }
    }

    #[test]
    fn table_is_sorted() {
        let rows = spectrum_table(Potential::Oscillator, &[qp(2.0), qp(0.5)], 1, 1);
        let keys: Vec<_> = rows.iter().map(|r| (r.q, r.l, r.n)).collect();
        assert_eq!(keys, vec![(0.5, 0, 0), (0.5, 0, 1), (0.5, 1, 0), (0.5, 1, 1), (2.0, 0, 0), (2.0, 0, 1), (2.0, 1, 0), (2.0, 1, 1)]);
    }

    #[test]
    fn potential_names() {
        assert_eq!("coulomb".parse::<Potential>().unwrap(), Potential::Coulomb);
        assert_eq!(Potential::Oscillator.to_string(), "oscillator");
        assert!("yukawa".parse::<Potential>().is_err());
    }

    #[test]
    fn hydrogen_ground_state() {
        let r = radial_verify(Potential::Coulomb, 0, 0, &qp(1.0), &RadialGrid::default()).unwrap();
        assert!((r.energy_numeric + 0.5).abs() < 1e-6, "{r:?}");
        assert_eq!(r.centrifugal, 0.0);
        assert!(r.tail_ratio < 1e-6, "{r:?}");
    }

    #[test]
    fn shooting_matches_closed_form() {
        let grid = RadialGrid::default();
        for (pot, n, l) in [(Potential::Oscillator, 1, 2), (Potential::Coulomb, 1, 1)] {
            let r = radial_verify(pot, n, l, &qp(1.3), &grid).unwrap();
            assert!(r.delta < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn bad_grid() {
        let grid = RadialGrid { r_min: 0.0, ..RadialGrid::default() };
        assert_eq!(
            radial_verify(Potential::Coulomb, 0, 0, &qp(1.0), &grid).unwrap_err(),
            Error::InvalidGrid("r_min must be positive")
        );
    }

    #[test]
    fn window_failure_is_reported() {
        // too small a box pushes the eigenvalue far above the window
        let grid = RadialGrid { r_max: Some(0.5), max_widenings: 0, ..RadialGrid::default() };
        assert!(matches!(
            radial_verify(Potential::Oscillator, 0, 0, &qp(1.0), &grid),
            Err(Error::NotBracketed { nodes: 0, .. })
        ));
    }

    #[test]
    fn classical_oscillator_shell() {
        let rep = degeneracy_report(Potential::Oscillator, &qp(1.0), 2, 2);
        let shell = rep.shell(2).unwrap();
        assert_eq!(shell.members, vec![(1, 0), (0, 2)]);
        assert!(shell.degenerate);
        assert_eq!(shell.energies[0], 3.5);
        let group = rep.groups.iter().find(|g| g.energy == 3.5).unwrap();
        assert_eq!(group.multiplicity, 6);
    }

    #[test]
    fn deformed_shells_split() {
        let p = qp(1.2);
        let osc = degeneracy_report(Potential::Oscillator, &p, 2, 2);
        let shell = osc.shell(2).unwrap();
        assert!(!shell.degenerate);
        assert_eq!(oscillator_energy(1, 0, &p).energy, 3.5);
        assert_abs_diff_eq!(oscillator_energy(0, 2, &p).energy, solve_l(2, &p) + 1.5, epsilon = 1e-15);

        let cou = degeneracy_report(Potential::Coulomb, &p, 1, 1);
        assert!(!cou.shell(1).unwrap().degenerate);
        assert_eq!(coulomb_energy(1, 0, &p).energy, -0.125);
        assert!(coulomb_energy(0, 1, &p).energy != -0.125);
        assert!(cou.m_degeneracy_intact);
    }

    #[test]
    fn multipole_examples() {
        let classical = multipole_report(&qp(1.0));
        assert_abs_diff_eq!(classical.x0_squared, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(classical.quadrupole, 0.0, epsilon = 1e-15);
        let half = multipole_report(&qp(0.5));
        assert_abs_diff_eq!(half.x0_squared, 1.0 / 5.25, epsilon = 1e-14);
        assert_abs_diff_eq!(half.x0_squared, 0.190476, epsilon = 1e-6);
        assert_abs_diff_eq!(half.inverse_q3, half.x0_squared, epsilon = 1e-14);
        let two = multipole_report(&qp(2.0));
        assert_abs_diff_eq!(two.x0_squared, half.x0_squared, epsilon = 1e-14);
        assert!(two.quadrupole < 0.0);
    }

    proptest! {
        #[test]
        fn inverse_q_symmetry(l in 0u32..10, q in 0.3f64..3.0) {
            let (a, b) = (solve_l(l, &qp(q)), solve_l(l, &qp(q).inverse()));
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }

        #[test]
        fn energies_increase_with_n(n in 0u32..20, l in 0u32..8, q in 0.3f64..3.0) {
            let p = qp(q);
            for pot in [Potential::Coulomb, Potential::Oscillator] {
                prop_assert!(energy(pot, n + 1, l, &p).energy > energy(pot, n, l, &p).energy);
            }
            let c = coulomb_energy(n, l, &p).energy;
            prop_assert!(c < 0.0);
            prop_assert!(oscillator_energy(n, l, &p).energy > 0.0);
        }

        #[test]
        fn big_l_solves_its_equation(l in 0u32..12, q in 0.3f64..3.0) {
            let p = qp(q);
            let big_l = solve_l(l, &p);
            let rhs = centrifugal_rhs(l, &p);
            prop_assert!(big_l >= 0.0);
            prop_assert!((big_l * (big_l + 1.0) - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }
    }
}
