use std::time::Instant;

use relevance::config::ConfigDocument;
use relevance::sim::{run_cell, run_operating_characteristics_with_threads};

const COHERENCE_MIN: f64 = 0.99;

fn coin_scenario(effects: &[f64], n: u64, replicates: u64, procedures: &str) -> String {
    format!(
        r#"spec_version = 1
seed = 424242

[parameter_space]
lo = -0.5
hi = 0.5

[actions]
a0 = "fair"
a1 = "biased"

[loss]
kind = "builtin_coin_demo"

[scenario]
name = "coin coherence"
family = "binomial"
true_effect_grid = {effects:?}
sample_size_grid = [{n}]
replicates = {replicates}
procedures = [{procedures}]
"#
    )
}

#[test]
fn decisions_are_coherent_with_the_loss_at_large_n() {
    // Interior points of Θ1 = [−0.5, −0.106) ∪ (0.106, 0.5] and Θ0 = [−0.106, 0.106].
    let relevant = [-0.3, -0.2, 0.2, 0.3];
    let negligible = [-0.05, 0.0, 0.05];
    let effects: Vec<f64> = relevant.iter().chain(&negligible).copied().collect();
    let text = coin_scenario(
        &effects,
        10_000,
        500,
        r#"{ procedure = "hypothesis_ratio", loss_ratio = 1.0 }, { procedure = "expected_loss" }"#,
    );
    let scenario = ConfigDocument::from_toml_str(&text).unwrap().scenario(None).unwrap();
    let start = Instant::now();
    let table = run_operating_characteristics_with_threads(&scenario, 4).unwrap();
    println!("coherence sweep took {:.2?}", start.elapsed());
    for procedure in ["hypothesis_ratio", "expected_loss"] {
        for &b in &relevant {
            let rate = table.frequency(b, 10_000, procedure, "a1").unwrap_or(0.0);
            assert!(rate >= COHERENCE_MIN, "{procedure} at b={b}: a1 rate {rate}");
        }
        for &b in &negligible {
            let rate = table.frequency(b, 10_000, procedure, "a0").unwrap_or(0.0);
            assert!(rate >= COHERENCE_MIN, "{procedure} at b={b}: a0 rate {rate}");
        }
    }
}

#[test]
fn tost_with_partition_bounds_declares_negligible_effects_equivalent() {
    let text = r#"spec_version = 1
seed = 77

[parameter_space]
lo = -1.0
hi = 1.0

[actions]
a0 = "no recommendation"
a1 = "recommend"

[loss]
kind = "piecewise_linear"
params_a0 = { kinks = [{ at = 0.0, weight = 1.0 }] }
params_a1 = { intercept = 0.02 }

[prior]
mean = 0.0
sd = 0.1

[scenario]
name = "tost"
family = "normal"
sigma = 0.2
true_effect_grid = [0.0, 0.01]
sample_size_grid = [100, 22000]
replicates = 400
procedures = [{ procedure = "tost", alpha = 0.05 }]
"#;
    let scenario = ConfigDocument::from_toml_str(text).unwrap().scenario(None).unwrap();
    let table = run_operating_characteristics_with_threads(&scenario, 2).unwrap();
    for b in [0.0, 0.01] {
        let small = table.frequency(b, 100, "tost", "equivalent").unwrap_or(0.0);
        let large = table.frequency(b, 22000, "tost", "equivalent").unwrap_or(0.0);
        assert!(large >= 0.95, "b={b}: equivalent rate {large} at n=22000");
        assert!(large > small, "b={b}: rate should grow with n ({small} → {large})");
    }
}

#[test]
fn isolated_cells_match_the_sweep() {
    let text = coin_scenario(
        &[-0.2, 0.0, 0.1],
        50,
        64,
        r#"{ procedure = "nhst" }, { procedure = "rope" }, { procedure = "bayes_factor" }"#,
    );
    let scenario = ConfigDocument::from_toml_str(&text).unwrap().scenario(None).unwrap();
    let table = run_operating_characteristics_with_threads(&scenario, 3).unwrap();
    let cell = run_cell(&scenario, 0.1, 50).unwrap();
    let swept: Vec<_> = table.rows.iter().filter(|r| r.true_effect == 0.1).cloned().collect();
    assert_eq!(cell, swept);
}
