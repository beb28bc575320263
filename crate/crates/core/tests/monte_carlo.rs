use sminlab::experiments::{
    compressible_kernel_probe, compressible_probe_with_matrix, run_trials, tail_table_and_fit, ExperimentConfig,
};
use sminlab::geometry::CompressParams;
use sminlab::lcd::{Alpha, LcdQuery};
use sminlab::linalg::DenseMatrix;
use sminlab::smallball::{empirical_concentration, random_unit_vector, smallball_compare, CompareOptions};
use sminlab::EntryDistribution;

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len();
    0.5 * (v[(k - 1) / 2] + v[k / 2])
}

#[test]
fn heavy_tails_keep_the_smallest_singular_value_scale() {
    let cfg = ExperimentConfig::new(
        vec![EntryDistribution::gaussian(), EntryDistribution::pareto_symmetric(2.5).unwrap()],
        vec![200],
        200,
        vec![0.1],
    );
    let records = run_trials(&cfg).unwrap();
    assert!(records.iter().all(|r| r.bound_holds()));
    let scaled = |dist: &str| {
        median(records.iter().filter(|r| r.dist == dist).map(|r| r.s_n * (r.n as f64).sqrt()).collect())
    };
    let (g, p) = (scaled("gaussian"), scaled("pareto:2.5"));
    assert!(p / g < 3.0 && g / p < 3.0, "gaussian {g}, pareto {p}");
}

#[test]
fn tail_fit_on_small_sweep() {
    let mut cfg = ExperimentConfig::new(
        vec![EntryDistribution::rademacher(), EntryDistribution::student_t(3.0).unwrap()],
        vec![10, 20],
        40,
        vec![0.1, 0.2, 0.3],
    );
    cfg.workers = 2;
    let records = run_trials(&cfg).unwrap();
    let report = tail_table_and_fit(&records, &cfg.eps_grid).unwrap();
    assert_eq!(report.cells.len(), 12);
    assert!(report.c_hat <= 10.0);
    for c in &report.cells {
        assert!((0.0..=1.0).contains(&c.p_hat));
        assert!(c.wilson_low <= c.p_hat && c.p_hat <= c.wilson_high);
        assert!(c.p_hat <= report.c_hat * c.envelope_unit + 1e-15);
    }
}

#[test]
fn compressible_vectors_avoid_the_kernel() {
    let p = CompressParams::new(0.1, 0.1).unwrap();
    let gaussian = EntryDistribution::gaussian();
    let pareto = EntryDistribution::pareto_symmetric(2.5).unwrap();
    for seed in 0..20 {
        let g = compressible_kernel_probe(&gaussian, 100, 10_000, &p, seed).unwrap();
        assert!(g.minimum >= 0.05, "seed {seed}: {}", g.minimum);
        let h = compressible_kernel_probe(&pareto, 100, 10_000, &p, seed).unwrap();
        assert!(h.minimum > 0.0, "seed {seed}");
    }
    let zero = compressible_probe_with_matrix(&DenseMatrix::zeros(98, 100), 1000, &p, 0).unwrap();
    assert_eq!(zero.minimum, 0.0);
}

#[test]
fn generic_direction_matches_normal_mass() {
    let x = random_unit_vector(100, 17);
    let m = 1_000_000;
    let l = empirical_concentration(&x, &EntryDistribution::gaussian(), &[0.01], m, 3).unwrap()[0];
    // 2 Phi(0.01) - 1
    assert!((l - 0.007_978_712).abs() < 0.001, "{l}");
}

#[test]
fn bound_with_fitted_constant_covers_structured_and_generic_vectors() {
    let q = LcdQuery::new(Alpha::Auto, 0.1, 20.0).unwrap();
    let eps = [0.01, 0.05, 0.1];
    let flat = vec![0.1; 100];
    let generic = random_unit_vector(100, 4);
    for x in [&flat, &generic] {
        let t = smallball_compare(x, &EntryDistribution::rademacher(), &eps, &q, &CompareOptions::new(50_000, 8))
            .unwrap();
        assert!(t.rows.iter().all(|r| r.bound_clamped <= 1.0 && r.bound_raw >= r.bound_clamped));
        assert!((t.u - 0.5).abs() < 0.02);
    }
}
