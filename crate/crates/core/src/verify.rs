//! The full identity catalogue: operator algebra on the truncated basis plus
//! checks on the harmonics themselves and their Jackson inner products.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::angular::{
    self, AngularFunction, Component, HarmonicLabel, HypergeometricArgument,
};
use crate::error::Result;
use crate::irrep::{self, AlgebraReport, IdentityResidual, OperatorSet, PositionTable, VectorTriple};
use crate::jackson::{gram_deviation, QMeasure};
use crate::qcore::QParam;
use crate::real::Real;

/// Largest `l` used by the Jackson cross-checks of the position operator.
pub const MATRIX_ELEMENT_LMAX: u32 = 3;
/// Largest `l` in the orthonormality check.
pub const GRAM_LMAX: u32 = 4;

/// Adds `delta` to `<l+1, m+1| x1 |l, m>` before anything is checked.
/// Used to make sure a wrong table entry is caught.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositionFault {
    pub l: u32,
    pub m: i64,
    pub delta: f64,
}

impl Default for PositionFault {
    fn default() -> Self {
        PositionFault { l: 1, m: 0, delta: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogueConfig {
    pub lmax: u32,
    pub tolerance: f64,
    pub fault: Option<PositionFault>,
}

/// A printed form that was checked against the verified one. Findings do not
/// affect the pass/fail outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub name: &'static str,
    pub relation: &'static str,
    pub residual: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub q: f64,
    pub lmax: u32,
    pub tolerance: f64,
    pub fault_injected: bool,
    pub algebra: AlgebraReport,
    pub functions: Vec<IdentityResidual>,
    pub findings: Vec<Finding>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.algebra.all_passed() && self.functions.iter().all(|c| c.passed)
    }

    /// Every identity, operator-level first.
    pub fn identities(&self) -> impl Iterator<Item = &IdentityResidual> {
        self.algebra.identities.iter().chain(&self.functions)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out: Vec<_> = self.identities().filter(|i| !i.passed).map(|i| i.name).collect();
        if self.algebra.partial_square.resolved.is_none() {
            out.push("partial.square_resolution");
        }
        out
    }
}

/// Coefficient distance scaled by the size of the larger function.
fn relative_distance<T: Real>(a: &AngularFunction<T>, b: &AngularFunction<T>) -> T {
    let scale = a.max_coeff().max(b.max_coeff()).max(T::one());
    a.distance(b) / scale
}

fn harmonics<T: Real>(p: &QParam<T>, lmax: u32) -> Result<BTreeMap<(u32, i64), AngularFunction<T>>> {
    let labels: Vec<HarmonicLabel> = HarmonicLabel::all_up_to(lmax).collect();
    labels
        .par_iter()
        .map(|&lab| angular::harmonic(p, lab).map(|y| ((lab.l, lab.m), y)))
        .collect()
}

fn apply_fault<T: Real>(x: &mut VectorTriple<T>, fault: PositionFault) {
    x.plus.perturb(fault.l + 1, fault.m + 1, fault.l, fault.m, T::from_f64(fault.delta));
}

type Check<'a> = Box<dyn Fn() -> Result<IdentityResidual> + Send + Sync + 'a>;

/// Run everything at one `q`.
pub fn run_catalogue<T: Real>(p: &QParam<T>, config: &CatalogueConfig) -> Result<VerifyReport> {
    let lmax = config.lmax;
    let tol = config.tolerance;
    if lmax < irrep::MIN_VERIFY_LMAX {
        return Err(crate::error::Error::TruncationTooSmall {
            lmax: lmax as usize,
            min: irrep::MIN_VERIFY_LMAX as usize,
        });
    }
    let interior = lmax - irrep::INTERIOR_MARGIN;

    let algebra = match config.fault {
        None => irrep::verify_algebra(p, lmax, tol)?,
        Some(fault) => {
            let clean = OperatorSet::build(p, lmax, PositionTable::Verified);
            let mut x = clean.x.clone();
            apply_fault(&mut x, fault);
            irrep::verify_operator_set(&clean.with_position(x), tol, interior)
        }
    };

    let mut x = irrep::build_position(p, lmax, PositionTable::Verified);
    if let Some(fault) = config.fault {
        apply_fault(&mut x, fault);
    }
    let printed = irrep::build_position(p, lmax, PositionTable::Printed);
    let ys = harmonics(p, lmax)?;
    let y = |l: u32, m: i64| &ys[&(l, m)];
    let mu = QMeasure::closed_form(p.clone());
    let elements_lmax = MATRIX_ELEMENT_LMAX.min(lmax - 1);

    // Jackson value minus table value for each nonzero position element
    let element_residual = |table: &VectorTriple<T>| -> f64 {
        let mut worst = 0.0f64;
        for l in 0..=elements_lmax {
            let li = l as i64;
            for m in -li..=li {
                for k in Component::ALL {
                    let mp = m + k.index();
                    let image = angular::mul_position(p, k, y(l, m));
                    for lp in [l.wrapping_sub(1), l + 1] {
                        if lp > lmax || mp.abs() > lp as i64 {
                            continue;
                        }
                        let jackson = mu.inner_product(y(lp, mp), &image);
                        let entry = table.get(k).get(lp, mp, l, m);
                        worst = worst.max((jackson - entry).abs().to_f64());
                    }
                }
            }
        }
        worst
    };

    let checks: Vec<Check<'_>> = vec![
        Box::new(|| {
            let mut worst = T::zero();
            for lab in HarmonicLabel::all_up_to(lmax).filter(|l| l.m >= 0) {
                let a = angular::build_phi(p, lab)?;
                let b = angular::hypergeom_phi(p, lab, HypergeometricArgument::Squared)?;
                worst = worst.max(relative_distance(&a, &b));
            }
            Ok(IdentityResidual::new(
                "harmonics.hypergeometric",
                "recursive Phi_lm = terminating 2F1 in q^2 with argument q^{-2m} x0^2",
                Some(worst.to_f64()),
                tol,
            ))
        }),
        Box::new(|| {
            let mut worst = T::zero();
            for lab in HarmonicLabel::all_up_to(lmax).filter(|l| l.m >= 0 && (l.m as u32) < l.l) {
                let check = angular::ladder_identity_check(p, lab)?;
                let scale = angular::build_phi(p, lab)?.max_coeff().max(T::one());
                worst = worst.max(check.corrected_residual / scale);
            }
            Ok(IdentityResidual::new(
                "harmonics.raising",
                "x~1 D- Phi_lm = q^{-m} factor Phi_{l,m+1}",
                Some(worst.to_f64()),
                tol,
            ))
        }),
        Box::new(|| {
            let mut worst = T::zero();
            for lab in HarmonicLabel::all_up_to(lmax) {
                let inv = p.invariants(lab.l);
                let f = y(lab.l, lab.m);
                let cas = angular::apply_casimir(p, f);
                let c = angular::apply_c(p, f);
                worst = worst
                    .max(relative_distance(&cas, &f.scale(&inv.casimir)))
                    .max(relative_distance(&c, &f.scale(&inv.c)));
            }
            Ok(IdentityResidual::new(
                "harmonics.eigenvalues",
                "Casimir Y_lm = [l][l+1] Y_lm, c Y_lm = c_l Y_lm",
                Some(worst.to_f64()),
                tol,
            ))
        }),
        Box::new(|| {
            let mut worst = T::zero();
            for lab in HarmonicLabel::all_up_to(lmax).filter(|l| l.m < 0) {
                worst = worst.max(angular::negative_m_mirror_residual(p, lab)?);
            }
            Ok(IdentityResidual::new(
                "harmonics.negative_m_mirror",
                "Y_{l,-m}(q) has the polynomial of Y_{l,m}(1/q)",
                Some(worst.to_f64()),
                tol,
            ))
        }),
        Box::new(|| {
            let dev = gram_deviation(&mu, GRAM_LMAX.min(lmax))?;
            Ok(IdentityResidual::new(
                "jackson.orthonormality",
                "<Y_l'm', Y_lm> = delta_l'l delta_m'm",
                Some(dev.to_f64()),
                tol,
            ))
        }),
        Box::new(|| {
            Ok(IdentityResidual::new(
                "position.matrix_elements",
                "<Y_l'm', x_k Y_lm> from Jackson integration = position table",
                Some(element_residual(&x)),
                tol,
            ))
        }),
        Box::new(|| {
            let mut worst = T::zero();
            for l in 0..lmax {
                let li = l as i64;
                for m in -li..=li {
                    for k in Component::ALL {
                        let mp = m + k.index();
                        let image = angular::mul_position(p, k, y(l, m));
                        let mut expansion = AngularFunction::zero(mp);
                        for lp in [l.wrapping_sub(1), l + 1] {
                            if lp <= lmax && mp.abs() <= lp as i64 {
                                let coeff = x.get(k).get(lp, mp, l, m);
                                expansion = expansion.add(&y(lp, mp).scale(&coeff));
                            }
                        }
                        worst = worst.max(relative_distance(&image, &expansion));
                    }
                }
            }
            Ok(IdentityResidual::new(
                "position.product_expansion",
                "x_k Y_lm = a Y_{l+1,m+k} + b Y_{l-1,m+k}",
                Some(worst.to_f64()),
                tol,
            ))
        }),
        Box::new(|| {
            let two_inv = T::one() / p.qnum(2);
            let mut worst = T::zero();
            for lab in HarmonicLabel::all_up_to(lmax) {
                let f = y(lab.l, lab.m);
                let xx = |a: Component, b: Component| angular::mul_position(p, a, &angular::mul_position(p, b, f));
                let (plus, zero, minus) = (Component::Plus, Component::Zero, Component::Minus);
                let r1 = relative_distance(&xx(zero, plus), &xx(plus, zero).scale(&p.pow(-2)));
                let r2 = relative_distance(&xx(zero, minus), &xx(minus, zero).scale(&p.pow(2)));
                let r3 = relative_distance(
                    &xx(plus, minus),
                    &xx(minus, plus).add(&xx(zero, zero).scale(p.lambda())),
                );
                // x1 x-1 = -(1 - q^2 x0^2)/[2] as multiplication operators
                let target = f.sub(&xx(zero, zero).scale(&p.pow(2))).scale(&-two_inv.clone());
                let r4 = relative_distance(&xx(plus, minus), &target);
                for r in [r1, r2, r3, r4] {
                    worst = worst.max(r);
                }
            }
            Ok(IdentityResidual::new(
                "position.noncommutativity",
                "x0 x+-1 = q^{-+2} x+-1 x0, x1 x-1 - x-1 x1 = lambda x0^2, x1 x-1 = -(1 - q^2 x0^2)/[2]",
                Some(worst.to_f64()),
                tol,
            ))
        }),
    ];
    let functions: Vec<IdentityResidual> = checks.par_iter().map(|c| c()).collect::<Result<_>>()?;

    let mut findings = Vec::new();
    let printed_elements = element_residual(&printed);
    findings.push(Finding {
        name: "position.printed_table",
        relation: "lower x0 entry with a minus sign, upper x-1 entry with q^{l-m}",
        residual: printed_elements,
        holds: printed_elements <= tol,
    });
    let mut arg = T::zero();
    let mut ladder = T::zero();
    for lab in HarmonicLabel::all_up_to(lmax).filter(|l| l.m >= 0) {
        let a = angular::build_phi(p, lab)?;
        let b = angular::hypergeom_phi(p, lab, HypergeometricArgument::Printed)?;
        arg = arg.max(relative_distance(&a, &b));
        if (lab.m as u32) < lab.l {
            let check = angular::ladder_identity_check(p, lab)?;
            ladder = ladder.max(check.printed_residual / a.max_coeff().max(T::one()));
        }
    }
    findings.push(Finding {
        name: "harmonics.printed_argument",
        relation: "2F1 argument q^{-m} x0^2",
        residual: arg.to_f64(),
        holds: arg.to_f64() <= tol,
    });
    findings.push(Finding {
        name: "harmonics.printed_raising",
        relation: "x~1 D- Phi_lm = factor Phi_{l,m+1} without q^{-m}",
        residual: ladder.to_f64(),
        holds: ladder.to_f64() <= tol,
    });
    for cand in &algebra.partial_square.candidates {
        findings.push(Finding {
            name: cand.name,
            relation: cand.formula,
            residual: cand.residual,
            holds: cand.matches,
        });
    }

    Ok(VerifyReport {
        q: p.q().to_f64(),
        lmax,
        tolerance: tol,
        fault_injected: config.fault.is_some(),
        algebra,
        functions,
        findings,
    })
}
