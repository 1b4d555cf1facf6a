use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use qsphere::angular::{self, HarmonicLabel};
use qsphere::irrep::{self, PositionTable};
use qsphere::spectra::{self, RadialGrid};
use qsphere::verify::{run_catalogue, CatalogueConfig};
use qsphere::{HighPrecision, Potential, QMeasure, QParam};

fn harmonics(c: &mut Criterion) {
    let p = QParam::<f64>::from_f64(0.8).unwrap();
    let mut g = c.benchmark_group("harmonics");
    for lmax in [4u32, 8, 16] {
        g.bench_with_input(BenchmarkId::from_parameter(lmax), &lmax, |b, &lmax| {
            b.iter(|| {
                for label in HarmonicLabel::all_up_to(lmax) {
                    black_box(angular::harmonic(&p, label).unwrap());
                }
            })
        });
    }
    g.finish();
}

fn gram(c: &mut Criterion) {
    let mu = QMeasure::closed_form(QParam::<f64>::from_f64(0.8).unwrap());
    c.bench_function("gram/lmax=4", |b| b.iter(|| qsphere::jackson::gram_deviation(&mu, 4).unwrap()));
}

fn operators(c: &mut Criterion) {
    let p = QParam::<f64>::from_f64(1.3).unwrap();
    let mut g = c.benchmark_group("operator_set");
    for lmax in [6u32, 12, 24] {
        g.bench_with_input(BenchmarkId::from_parameter(lmax), &lmax, |b, &lmax| {
            b.iter(|| irrep::OperatorSet::build(&p, lmax, PositionTable::Verified))
        });
    }
    g.finish();
}

fn catalogue(c: &mut Criterion) {
    let mut g = c.benchmark_group("catalogue");
    g.sample_size(10);
    let pd = QParam::<f64>::from_f64(0.9).unwrap();
    let cfg = CatalogueConfig { lmax: 6, tolerance: 1e-10, fault: None };
    g.bench_function("double", |b| b.iter(|| run_catalogue(&pd, &cfg).unwrap()));
    let ph = QParam::<HighPrecision>::from_decimal("0.9").unwrap();
    let cfg = CatalogueConfig { lmax: 4, tolerance: 1e-30, fault: None };
    g.bench_function("high/lmax=4", |b| b.iter(|| run_catalogue(&ph, &cfg).unwrap()));
    g.finish();
}

fn shooting(c: &mut Criterion) {
    let p = QParam::<f64>::from_f64(2.0).unwrap();
    let grid = RadialGrid::default();
    let mut g = c.benchmark_group("shooting");
    g.sample_size(10);
    for potential in [Potential::Coulomb, Potential::Oscillator] {
        g.bench_function(potential.to_string(), |b| b.iter(|| spectra::radial_verify(potential, 1, 1, &p, &grid).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, harmonics, gram, operators, catalogue, shooting);
criterion_main!(benches);
