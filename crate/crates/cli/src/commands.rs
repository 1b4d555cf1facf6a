use rayon::prelude::*;

use qsphere::angular::{self, HarmonicLabel, HypergeometricArgument};
use qsphere::irrep::IdentityResidual;
use qsphere::spectra::{self, RadialGrid};
use qsphere::verify::{self, CatalogueConfig, PositionFault, VerifyReport};
use qsphere::{HighPrecision, Potential, QMeasure, QParam, Real};

use crate::output::{render, Cell, Meta, Table};
use crate::{Common, Failure, HarmonicsArgs, IntegrateArgs, PrecisionArg, QValue, SpectrumArgs, VerifyArgs};

/// Tolerance on `|E_shooting - E|` when `spectrum --oracle` is given without `--tol`.
const SHOOTING_TOLERANCE: f64 = 1e-6;
/// Series depth used by `integrate` for `q < 1` when none is given.
const DEFAULT_SERIES_DEPTH: usize = 200;

pub struct Rendered {
    pub bytes: Vec<u8>,
    pub verdict: Result<(), Failure>,
}

fn meta(command: &'static str, common: &Common, tolerance: Option<f64>, precision: &'static str) -> Meta {
    Meta { command, q: common.sorted_q().iter().map(|q| q.value).collect(), tolerance, precision }
}

fn params<T: Real>(qs: &[QValue]) -> Result<Vec<QParam<T>>, Failure> {
    qs.iter().map(|q| QParam::from_decimal(&q.text).map_err(Failure::from)).collect()
}

pub fn spectrum(a: &SpectrumArgs) -> Result<Rendered, Failure> {
    let potential: Potential = a.potential.into();
    let qs = params::<f64>(&a.common.sorted_q())?;
    let rows = spectra::spectrum_table(potential, &qs, a.nmax, a.lmax);

    let mut columns = vec!["potential", "q", "n", "l", "L", "E"];
    let tolerance = a.oracle.then(|| a.common.tol.unwrap_or(SHOOTING_TOLERANCE));
    let mut shooting = Vec::new();
    if a.oracle {
        columns.extend(["E_shooting", "delta", "passed"]);
        let grid = RadialGrid::default();
        shooting = rows
            .par_iter()
            .map(|r| {
                let p = QParam::from_f64(r.q)?;
                spectra::radial_verify(potential, r.n, r.l, &p, &grid)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| Failure::Verification(format!("shooting solver failed: {e}")))?;
    }

    let mut table = Table::new(columns);
    let mut failed = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            potential.to_string().into(),
            r.q.into(),
            r.n.into(),
            r.l.into(),
            r.big_l.into(),
            r.energy.into(),
        ];
        if let (Some(s), Some(tol)) = (shooting.get(i), tolerance) {
            let ok = s.delta <= tol;
            if !ok {
                failed.push(format!("q={} n={} l={}: |dE| = {:e}", r.q, r.n, r.l, s.delta));
            }
            row.extend([s.energy_numeric.into(), s.delta.into(), ok.into()]);
        }
        table.push(row);
    }
    let bytes = render(a.common.format, &meta("spectrum", &a.common, tolerance, "double"), &table);
    let verdict = if failed.is_empty() { Ok(()) } else { Err(Failure::Verification(failed.join("\n"))) };
    Ok(Rendered { bytes, verdict })
}

fn harmonic_rows<T: Real>(qs: &[QValue], lmax: u32, oracle: bool, table: &mut Table) -> Result<(), Failure> {
    let source = if oracle { "hypergeometric" } else { "recursion" };
    for (qv, p) in qs.iter().zip(params::<T>(qs)?) {
        for label in HarmonicLabel::all_up_to(lmax) {
            let (phi, norm, y) = if label.m >= 0 {
                let phi = if oracle {
                    angular::hypergeom_phi(&p, label, HypergeometricArgument::Squared)?
                } else {
                    angular::build_phi(&p, label)?
                };
                let norm = angular::normalization_constant(&p, label)?;
                let y = phi.scale(&norm);
                (Some(phi), Some(norm), y)
            } else {
                (None, None, angular::harmonic(&p, label)?)
            };
            for (k, yk) in y.coeffs().iter().enumerate() {
                if yk.is_zero() {
                    continue;
                }
                table.push(vec![
                    qv.value.into(),
                    label.l.into(),
                    label.m.into(),
                    k.into(),
                    phi.as_ref().map(|f| f.coeff(k).to_f64()).into(),
                    yk.to_f64().into(),
                    norm.as_ref().map(Real::to_f64).into(),
                    source.into(),
                ]);
            }
        }
    }
    Ok(())
}

pub fn harmonics(a: &HarmonicsArgs) -> Result<Rendered, Failure> {
    let qs = a.common.sorted_q();
    let mut table = Table::new(vec!["q", "l", "m", "k", "phi", "y", "normalization", "source"]);
    match a.common.precision {
        PrecisionArg::Double => harmonic_rows::<f64>(&qs, a.lmax, a.oracle, &mut table)?,
        PrecisionArg::High => harmonic_rows::<HighPrecision>(&qs, a.lmax, a.oracle, &mut table)?,
    }
    let bytes = render(a.common.format, &meta("harmonics", &a.common, None, a.common.precision.name()), &table);
    Ok(Rendered { bytes, verdict: Ok(()) })
}

fn catalogue<T: Real>(qs: &[QValue], config: &CatalogueConfig) -> Result<Vec<VerifyReport>, Failure> {
    let ps = params::<T>(qs)?;
    let reports: Vec<VerifyReport> =
        ps.par_iter().map(|p| verify::run_catalogue(p, config)).collect::<Result<_, _>>()?;
    Ok(reports)
}

fn status(id: &IdentityResidual) -> &'static str {
    match (id.residual, id.passed) {
        (None, _) => "skipped",
        (Some(_), true) => "pass",
        (Some(_), false) => "fail",
    }
}

pub fn verify(a: &VerifyArgs) -> Result<Rendered, Failure> {
    let tolerance = a.common.tol.unwrap_or_else(|| a.common.precision.default_tolerance());
    let config = CatalogueConfig {
        lmax: a.lmax,
        tolerance,
        fault: a.inject_fault.then(PositionFault::default),
    };
    let qs = a.common.sorted_q();
    let reports = match a.common.precision {
        PrecisionArg::Double => catalogue::<f64>(&qs, &config)?,
        PrecisionArg::High => catalogue::<HighPrecision>(&qs, &config)?,
    };

    let mut table = Table::new(vec!["q", "group", "name", "relation", "residual", "tolerance", "status"]);
    let mut failed = Vec::new();
    for (qv, report) in qs.iter().zip(&reports) {
        let q: Cell = qv.value.into();
        let mut push = |group: &str, name: &str, relation: &str, residual: Option<f64>, tol: Option<f64>, st: &str| {
            table.push(vec![
                q.clone(),
                group.into(),
                name.into(),
                relation.into(),
                residual.into(),
                tol.into(),
                st.into(),
            ]);
        };
        for id in &report.algebra.identities {
            push("operator", id.name, id.relation, id.residual, Some(id.tolerance), status(id));
        }
        let sq = &report.algebra.partial_square;
        let resolved = sq.resolved.and_then(|name| sq.candidates.iter().find(|c| c.name == name));
        push(
            "operator",
            "partial.square_resolution",
            resolved.map_or("no unique candidate", |c| c.formula),
            resolved.map(|c| c.residual),
            Some(tolerance),
            if resolved.is_some() { "pass" } else { "fail" },
        );
        if let Some(drift) = report.algebra.truncation_drift {
            let st = if drift <= tolerance { "pass" } else { "fail" };
            push("operator", "truncation.drift", "interior residuals at lmax vs lmax + 2", Some(drift), Some(tolerance), st);
        }
        for id in &report.functions {
            push("function", id.name, id.relation, id.residual, Some(id.tolerance), status(id));
        }
        for f in &report.findings {
            push("finding", f.name, f.relation, Some(f.residual), None, if f.holds { "holds" } else { "differs" });
        }
        let mut names = report.failures();
        if report.algebra.truncation_drift.is_some_and(|d| d > tolerance) {
            names.push("truncation.drift");
        }
        if !names.is_empty() {
            failed.push(format!("q={}: failed {}", qv.text, names.join(", ")));
        }
    }
    let bytes = render(
        a.common.format,
        &meta("verify", &a.common, Some(tolerance), a.common.precision.name()),
        &table,
    );
    let verdict = if failed.is_empty() { Ok(()) } else { Err(Failure::Verification(failed.join("\n"))) };
    Ok(Rendered { bytes, verdict })
}

fn integral_rows<T: Real>(qs: &[QValue], degree: u32, depth: Option<usize>, table: &mut Table) -> Result<(), Failure> {
    for (qv, p) in qs.iter().zip(params::<T>(qs)?) {
        let closed = QMeasure::closed_form(p.clone()).integrate_monomial(degree as usize);
        table.push(vec![qv.value.into(), degree.into(), "closed_form".into(), Cell::Null, closed.to_f64().into()]);
        if qv.value < 1.0 {
            let depth = depth.unwrap_or(DEFAULT_SERIES_DEPTH);
            let series = QMeasure::series(p, depth)?.integrate_monomial(degree as usize);
            table.push(vec![qv.value.into(), degree.into(), "series".into(), depth.into(), series.to_f64().into()]);
        }
    }
    Ok(())
}

pub fn integrate(a: &IntegrateArgs) -> Result<Rendered, Failure> {
    let qs = a.common.sorted_q();
    if a.series_depth.is_some() {
        if let Some(q) = qs.iter().find(|q| q.value >= 1.0) {
            return Err(Failure::Usage(format!("series mode requires q < 1, got q = {}", q.text)));
        }
    }
    if a.series_depth == Some(0) {
        return Err(Failure::Usage("series depth must be positive".into()));
    }
    let mut table = Table::new(vec!["q", "degree", "mode", "depth", "value"]);
    match a.common.precision {
        PrecisionArg::Double => integral_rows::<f64>(&qs, a.degree, a.series_depth, &mut table)?,
        PrecisionArg::High => integral_rows::<HighPrecision>(&qs, a.degree, a.series_depth, &mut table)?,
    }
    let bytes = render(a.common.format, &meta("integrate", &a.common, None, a.common.precision.name()), &table);
    Ok(Rendered { bytes, verdict: Ok(()) })
}
