// Runs the four checked-in experiments and prints their summary tables.
//
// ```text
// cargo run --release --example monte_carlo_tables [replicates]
// ```

use std::time::Instant;

use agemeasure::harness::{builtin_configs, format_tables, run_experiment, RunOptions};

fn main() -> anyhow::Result<()> {
    let replicates: Option<usize> = std::env::args().nth(1).map(|s| s.parse()).transpose()?;
    for mut config in builtin_configs()? {
        if let Some(r) = replicates {
            config.replicates = r;
        }
        let start = Instant::now();
        let result = run_experiment(&config, &RunOptions::default())?;
        println!("{}", format_tables(&result));
        println!("({:.1} s)\n", start.elapsed().as_secs_f64());
    }
    Ok(())
}
