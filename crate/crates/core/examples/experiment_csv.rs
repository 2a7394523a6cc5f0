// A small config-driven experiment with every CSV output.
//
//     cargo run --release --example experiment_csv

use agemeasure::harness::{format_tables, run_experiment, write_all, ExperimentConfig, RunOptions};

const CONFIG: &str = r#"
name = "small_constant"
horizon = 1.0
replicates = 20
k_values = [100, 1000]
base_seed = 5

[model]
family = "constant"
h = 0.2
b = 0.4

[initial_ages]
law = "uniform"
lo = 0.0
hi = 1.0

[confidence]
ci_strip_samples = 5
"#;

fn main() -> anyhow::Result<()> {
    let config = ExperimentConfig::from_toml(CONFIG)?;
    let result = run_experiment(
        &config,
        &RunOptions {
            jobs: Some(2),
            ..RunOptions::default()
        },
    )?;
    print!("{}", format_tables(&result));

    let root = std::env::temp_dir().join("agemeasure-example");
    for path in write_all(&result, &root)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
