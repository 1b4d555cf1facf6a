//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criteria listed in `EXPECTED_FAILURES` cannot be met because the relation
//! they ask for is false; they still print FAIL. The binary exits nonzero if any
//! other criterion fails or if an expected failure starts passing.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use qsphere::angular::{self, Component, HarmonicLabel, HypergeometricArgument};
use qsphere::irrep::{self, OperatorSet, PositionTable};
use qsphere::jackson::gram_deviation;
use qsphere::spectra::{self, Potential, RadialGrid};
use qsphere::verify::{run_catalogue, CatalogueConfig};
use qsphere::{HighPrecision, QMeasure, QParam, Real};

const CLASSICAL_TOL: f64 = 1e-12;
const ALGEBRA_TOL: f64 = 1e-10;
const ALGEBRA_BUDGET: Duration = Duration::from_secs(10);
const HYPERGEOMETRIC_TOL: f64 = 1e-12;
const GRAM_TOL: f64 = 1e-9;
const MATRIX_ELEMENT_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-10;
const SHOOTING_TOL: f64 = 1e-6;
const SHOOTING_BUDGET: Duration = Duration::from_secs(2);
const SYMMETRY_TOL: f64 = 1e-12;

const SWEEP: [f64; 3] = [0.5, 0.9, 1.5];

/// Criterion 2 includes the quadratic relations among the components of `d`,
/// which fail at every q, including q = 1.
const EXPECTED_FAILURES: [usize; 1] = [2];

fn qp(q: f64) -> QParam<f64> {
    QParam::from_f64(q).unwrap()
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome { passed, detail: detail.into() }
    }
}

fn classical_limit() -> Outcome {
    let p = QParam::<f64>::classical();
    let mut worst = 0.0f64;
    for l in 0..=6u32 {
        let v = (l * (l + 1)) as f64;
        let inv = p.invariants(l);
        worst = worst.max((inv.casimir - v).abs()).max((inv.casimir_prime - v).abs()).max((inv.c - 1.0).abs());
        worst = worst.max((spectra::solve_l(l, &p) - l as f64).abs());
        for n in 0..=6u32 {
            let coulomb = -1.0 / (2.0 * ((n + l + 1) as f64).powi(2));
            let osc = (2 * n + l) as f64 + 1.5;
            worst = worst.max((spectra::coulomb_energy(n, l, &p).energy - coulomb).abs());
            worst = worst.max((spectra::oscillator_energy(n, l, &p).energy - osc).abs());
        }
    }
    Outcome::new(worst <= CLASSICAL_TOL, format!("max deviation {worst:.3e}"))
}

fn algebra_suite() -> Outcome {
    let mut failures = Vec::new();
    let mut slowest = Duration::ZERO;
    let mut worst_passing = 0.0f64;
    for q in SWEEP {
        let start = Instant::now();
        let report = irrep::verify_algebra(&qp(q), 6, ALGEBRA_TOL).unwrap();
        slowest = slowest.max(start.elapsed());
        for id in &report.identities {
            match (id.passed, id.residual) {
                (false, Some(r)) => failures.push(format!("q={q} {} ({r:.3e})", id.name)),
                (true, Some(r)) => worst_passing = worst_passing.max(r),
                _ => {}
            }
        }
    }
    let in_budget = slowest <= ALGEBRA_BUDGET;
    let detail = if failures.is_empty() {
        format!("max residual {worst_passing:.3e}, slowest {slowest:.2?}")
    } else {
        format!(
            "{} identities fail: {}; all others <= {worst_passing:.3e}; slowest {slowest:.2?}",
            failures.len(),
            failures.join(", ")
        )
    };
    Outcome::new(failures.is_empty() && in_budget, detail)
}

/// Coefficients reach 1e7 at q = 0.5, where one ulp is far above 1e-12, so the
/// double run compares each coefficient relative to its own size and the
/// high precision run checks the absolute bound.
fn harmonics_equivalence() -> Outcome {
    let mut worst_rel = 0.0f64;
    let mut worst_abs = 0.0f64;
    for q in SWEEP {
        let p = qp(q);
        let hp = QParam::<HighPrecision>::from_f64(q).unwrap();
        for label in HarmonicLabel::all_up_to(6).filter(|l| l.m >= 0) {
            let a = angular::build_phi(&p, label).unwrap();
            let b = angular::hypergeom_phi(&p, label, HypergeometricArgument::Squared).unwrap();
            for k in 0..a.coeffs().len().max(b.coeffs().len()) {
                let (x, y) = (a.coeff(k), b.coeff(k));
                let scale = x.abs().max(y.abs());
                if scale > 0.0 {
                    worst_rel = worst_rel.max((x - y).abs() / scale);
                }
            }
            let a = angular::build_phi(&hp, label).unwrap();
            let b = angular::hypergeom_phi(&hp, label, HypergeometricArgument::Squared).unwrap();
            worst_abs = worst_abs.max(a.distance(&b).to_f64());
        }
    }
    Outcome::new(
        worst_rel < HYPERGEOMETRIC_TOL && worst_abs < HYPERGEOMETRIC_TOL,
        format!("double: max relative difference {worst_rel:.3e}; high precision: max absolute {worst_abs:.3e}"),
    )
}

fn orthonormality() -> Outcome {
    let mut worst = 0.0f64;
    for q in SWEEP {
        worst = worst.max(gram_deviation(&QMeasure::closed_form(qp(q)), 4).unwrap());
    }
    Outcome::new(worst < GRAM_TOL, format!("max |G - I| {worst:.3e}"))
}

fn matrix_elements() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for q in SWEEP {
        let p = qp(q);
        let mu = QMeasure::closed_form(p.clone());
        for label in HarmonicLabel::all_up_to(3) {
            let y = angular::harmonic(&p, label).unwrap();
            for k in Component::ALL {
                let image = angular::mul_position(&p, k, &y);
                let mp = label.m + k.index();
                let (up, down) = irrep::position_coefficients(&p, PositionTable::Verified, k, label.l as i64, label.m);
                for (lp, want) in [(label.l + 1, up), (label.l.wrapping_sub(1), down)] {
                    let Ok(target) = HarmonicLabel::new(lp, mp) else { continue };
                    if lp > 4 {
                        continue;
                    }
                    let got = mu.inner_product(&angular::harmonic(&p, target).unwrap(), &image);
                    worst = worst.max((got - want).abs());
                    count += 1;
                }
            }
        }
    }
    Outcome::new(worst < MATRIX_ELEMENT_TOL, format!("{count} elements, max difference {worst:.3e}"))
}

fn dual_construction() -> Outcome {
    let mut worst = 0.0f64;
    let mut resolutions = Vec::new();
    let mut recorded = true;
    for q in SWEEP {
        let p = qp(q);
        let ops = OperatorSet::build(&p, 6, PositionTable::Verified);
        for k in Component::ALL {
            worst = worst.max(ops.partial.get(k).sub(ops.partial_elements.get(k)).max_abs_within(4));
        }
        let finding = irrep::partial_square_finding(&p, &ops.partial, 4, DUAL_TOL);
        resolutions.push(finding.resolved);
        let report = run_catalogue(&p, &CatalogueConfig { lmax: 6, tolerance: DUAL_TOL, fault: None }).unwrap();
        recorded &= finding.resolved.is_some_and(|name| report.findings.iter().any(|f| f.name == name && f.holds));
    }
    let unique = resolutions.iter().all(|r| r.is_some() && *r == resolutions[0]);
    Outcome::new(
        worst < DUAL_TOL && unique && recorded,
        format!(
            "max difference {worst:.3e}; d.d diagonal matches {} at every q",
            resolutions[0].unwrap_or("no unique candidate")
        ),
    )
}

fn spectrum_verification() -> Outcome {
    let grid = RadialGrid::default();
    let mut worst = 0.0f64;
    let mut slowest = Duration::ZERO;
    for q in [1.0, 1.3] {
        for pot in [Potential::Coulomb, Potential::Oscillator] {
            for n in 0..=1 {
                for l in 0..=2 {
                    let start = Instant::now();
                    let r = spectra::radial_verify(pot, n, l, &qp(q), &grid).unwrap();
                    slowest = slowest.max(start.elapsed());
                    worst = worst.max(r.delta);
                }
            }
        }
    }
    Outcome::new(
        worst < SHOOTING_TOL && slowest <= SHOOTING_BUDGET,
        format!("max |dE| {worst:.3e}, slowest solve {slowest:.2?}"),
    )
}

fn deformation_claims() -> Outcome {
    let qs: Vec<_> = [0.5, 0.8, 1.2, 2.0].into_iter().map(qp).collect();
    let mut bitwise = true;
    for pot in [Potential::Coulomb, Potential::Oscillator] {
        let rows: Vec<Vec<u64>> = qs
            .iter()
            .map(|p| {
                spectra::spectrum_table(pot, std::slice::from_ref(p), 5, 0)
                    .iter()
                    .map(|r| r.energy.to_bits())
                    .collect()
            })
            .collect();
        bitwise &= rows.windows(2).all(|w| w[0] == w[1]);
    }
    let classical = qp(1.0);
    let deformed = qp(1.2);
    let osc_shell = |p| spectra::degeneracy_report(Potential::Oscillator, p, 2, 2).shell(2).unwrap().degenerate;
    let cou_shell = |p| spectra::degeneracy_report(Potential::Coulomb, p, 1, 1).shell(1).unwrap().degenerate;
    let degeneracy = osc_shell(&classical) && cou_shell(&classical) && !osc_shell(&deformed) && !cou_shell(&deformed);
    let m1 = spectra::multipole_report(&classical);
    let mh = spectra::multipole_report(&qp(0.5));
    let moments = (m1.x0_squared - 1.0 / 3.0).abs() < 1e-14
        && (mh.x0_squared - mh.inverse_q3).abs() < 1e-14
        && (mh.x0_squared - 0.190476).abs() < 1e-6;
    Outcome::new(
        bitwise && degeneracy && moments,
        format!(
            "l=0 bitwise equal: {bitwise}; shells degenerate at q=1 and split at q=1.2: {degeneracy}; \
             <x0^2> = {:.6} at q=0.5",
            mh.x0_squared
        ),
    )
}

fn inverse_q_symmetry() -> Outcome {
    let mut worst = 0.0f64;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(1.0);
    for q in [0.3, 0.5, 0.8, 0.9, 1.2, 1.5, 2.0, 3.0] {
        let (p, pi) = (qp(q), qp(1.0 / q));
        for l in 0..=8u32 {
            let (a, b) = (p.invariants(l), pi.invariants(l));
            worst = worst.max(rel(a.casimir, b.casimir)).max(rel(a.casimir_prime, b.casimir_prime)).max(rel(a.c, b.c));
            for n in 0..=4u32 {
                for pot in [Potential::Coulomb, Potential::Oscillator] {
                    let (ea, eb) = (spectra::energy(pot, n, l, &p), spectra::energy(pot, n, l, &pi));
                    worst = worst.max(rel(ea.big_l, eb.big_l)).max(rel(ea.energy, eb.energy));
                }
            }
        }
        let (mu, mui) = (QMeasure::closed_form(p), QMeasure::closed_form(pi));
        for n in 0..=12 {
            worst = worst.max(rel(mu.integrate_monomial(n), mui.integrate_monomial(n)));
        }
    }
    Outcome::new(worst <= SYMMETRY_TOL, format!("max relative difference {worst:.3e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("classical limit", classical_limit),
        ("algebra identities", algebra_suite),
        ("harmonics equivalence", harmonics_equivalence),
        ("orthonormality", orthonormality),
        ("position matrix elements", matrix_elements),
        ("dual construction of d", dual_construction),
        ("spectrum verification", spectrum_verification),
        ("deformation claims", deformation_claims),
        ("q -> 1/q symmetry", inverse_q_symmetry),
    ];
    let mut failed = Vec::new();
    let mut unexpected = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let number = i + 1;
        let outcome = check();
        let expected_failure = EXPECTED_FAILURES.contains(&number);
        let tag = if outcome.passed { "PASS" } else { "FAIL" };
        let note = if expected_failure && !outcome.passed { " [expected failure]" } else { "" };
        println!("{tag} criterion {number} ({name}): {}{note}", outcome.detail);
        if !outcome.passed {
            failed.push(number);
        }
        if outcome.passed == expected_failure {
            unexpected.push(number);
        }
    }
    println!(
        "acceptance: {} of {} criteria passed; failed {:?}; expected failures {:?}",
        criteria.len() - failed.len(),
        criteria.len(),
        failed,
        EXPECTED_FAILURES
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("acceptance: outcome differs from expectation for criteria {unexpected:?}");
        ExitCode::FAILURE
    }
}
