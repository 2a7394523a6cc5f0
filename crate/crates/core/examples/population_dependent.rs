// Rates proportional to the mass of age windows:
// h = λ (1_{J2}, Ā) and b = η (1_{J1}, Ā).
//
//     cargo run --release --example population_dependent

use agemeasure::estimators::estimate_popdep;
use agemeasure::harness::{sample_initial_ages, InitialAgeLaw};
use agemeasure::{simulate, IntervalUnion, RateModel};

fn main() -> anyhow::Result<()> {
    let j1: IntervalUnion = "[0.5,1.5]".parse()?;
    let j2: IntervalUnion = "[0,0.5) ∪ (1.5,2]".parse()?;
    let truth = RateModel::PopulationLinear {
        lambda: 0.04,
        j2: j2.clone(),
        eta: 0.08,
        j1: j1.clone(),
    };
    let k = 10_000;
    let law = InitialAgeLaw::Uniform { lo: 0.0, hi: 1.0 };
    for seed in 0..5 {
        let log = simulate(&truth, &sample_initial_ages(&law, k, seed), k, 1.0, seed)?;
        let (lambda, eta) = estimate_popdep(&log, &j1, &j2)?;
        println!("seed {seed}: λ = {lambda:.5}, η = {eta:.5}");
    }
    println!("truth:  λ = 0.04000, η = 0.08000");
    Ok(())
}
