// Estimating constant death and birth rates from one path.
//
//     cargo run --release --example constant_rates

use agemeasure::estimators::{estimate, estimate_constant};
use agemeasure::harness::{sample_initial_ages, InitialAgeLaw};
use agemeasure::{simulate, RateModel};

fn main() -> anyhow::Result<()> {
    let truth = RateModel::Constant { h: 0.2, b: 0.4 };
    let k = 10_000;
    let ages = sample_initial_ages(&InitialAgeLaw::Uniform { lo: 0.0, hi: 1.0 }, k, 1);
    let log = simulate(&truth, &ages, k, 1.0, 1)?;

    let (h, b) = estimate_constant(&log)?;
    println!("h = {h:.5} (truth 0.2), b = {b:.5} (truth 0.4)");

    let report = estimate(&log, &truth)?;
    println!("{report:#?}");
    Ok(())
}
