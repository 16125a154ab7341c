use repday::extremes::ModificationMode;
use repday::lp::BundledSimplex;
use repday::pipeline::{
    compare_cluster_counts, run_aggregated, run_reference, sweep_grid_limits, GridScale, GridSpec, Method, RunConfig,
};
use repday::resys::{DesignVariables, GridLimit, TechnologyParams};
use repday::synthgen::{generate, SynthConfig};
use repday::timeseries::{AttributeProfile, Dataset, STANDARD_ATTRIBUTES};

/// 30 days with the planted cold spell.
fn desk() -> Dataset {
    generate(&SynthConfig {
        n_days: 30,
        ..SynthConfig::default()
    })
    .unwrap()
}

fn config(method: Method, fraction: f64) -> RunConfig {
    RunConfig {
        k: 4,
        n_init: 50,
        method,
        grid: GridSpec::Fraction(fraction),
        ..RunConfig::default()
    }
}

#[test]
fn zero_demand_reference_is_free() {
    let vals = [0.0, 0.0, 5.0, 0.3, 0.3];
    let attrs = STANDARD_ATTRIBUTES
        .iter()
        .zip(vals)
        .map(|(n, v)| AttributeProfile::new(*n, vec![v; 48]))
        .collect();
    let data = Dataset::new(attrs, 24).unwrap();
    let r = run_reference(&data, &TechnologyParams::default(), GridLimit::unlimited(), &BundledSimplex::default()).unwrap();
    assert_eq!(r.objective, 0.0);
    assert_eq!(r.design, DesignVariables::default());
    assert!(r.costs.is_none());
}

#[test]
fn converged_runs_are_feasible_and_no_cheaper_than_reference() {
    let data = desk();
    let backend = BundledSimplex::default();
    let scale = GridScale::compute(&data, &TechnologyParams::default(), &backend).unwrap();
    for method in [Method::Feasibility, Method::Slack] {
        for fraction in [0.5, 0.0] {
            let r = run_aggregated(&data, &config(method, fraction), Some(&scale), &backend).unwrap();
            assert!(r.feasible_full_year, "{method:?} {fraction}");
            assert!(r.max_slack <= 1e-6);
            let f_op = r.f_operations.unwrap();
            assert!(f_op >= r.f_ref.unwrap() * (1.0 - 1e-9));
            assert!(r.accuracy.unwrap() <= 1.0 + 1e-9);
        }
    }
    let none = run_aggregated(&data, &config(Method::None, 0.5), Some(&scale), &backend).unwrap();
    assert!(!none.feasible_full_year);
    assert!(none.f_operations.is_none());
    assert!(none.f_clustered <= none.f_ref.unwrap());
}

#[test]
fn sweep_table_and_zero_grid_row() {
    let data = desk();
    let base = RunConfig {
        compare_reference: false,
        ..config(Method::Feasibility, 1.0)
    };
    let sweep = sweep_grid_limits(&data, &base, &[1.2, 0.5, 0.0], &BundledSimplex::default()).unwrap();
    assert!(sweep.all_ok());
    let csv = sweep.to_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "fraction,total_cost,capex_share,opex_share,X,feasible,status");
    assert_eq!(lines.len(), 4);
    let zero = sweep.rows[2].report.as_ref().unwrap();
    let costs = zero.costs.unwrap();
    assert_eq!(costs.opex_share, 0.0);
    assert_eq!(costs.capex_share, 1.0);
    assert!(lines[3].starts_with("0,"));
    assert!(sweep.cost_monotone());
}

#[test]
fn reports_are_deterministic() {
    let data = desk();
    let cfg = RunConfig {
        modification: ModificationMode::Append,
        ..config(Method::Slack, 0.5)
    };
    let a = run_aggregated(&data, &cfg, None, &BundledSimplex::default()).unwrap();
    let b = run_aggregated(&data, &cfg, None, &BundledSimplex::default()).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert_eq!(a.design_csv(), b.design_csv());
}

#[test]
fn cluster_count_comparison_underestimates_without_extremes() {
    let data = desk();
    let base = config(Method::Feasibility, 0.0);
    let cmp = compare_cluster_counts(&data, &base, &[3, 5], &BundledSimplex::default()).unwrap();
    assert_eq!(cmp.entries.len(), 2);
    for e in &cmp.entries {
        assert!(e.without_extremes.f_clustered <= cmp.f_ref * (1.0 + 1e-9));
        assert!(e.with_extremes.feasible_full_year);
        assert!(e.with_extremes.accuracy.is_some());
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let data = desk();
    let backend = BundledSimplex::default();
    let bad_k = RunConfig { k: 31, ..config(Method::None, 1.0) };
    assert!(run_aggregated(&data, &bad_k, None, &backend).is_err());
    let bad_grid = config(Method::None, -1.0);
    assert!(run_aggregated(&data, &bad_grid, None, &backend).is_err());
    assert!(sweep_grid_limits(&data, &config(Method::None, 1.0), &[], &backend).is_err());
}
