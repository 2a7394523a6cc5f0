// Age cells scaled by a window mass: h = α_i (1_J, Ā) and b = γ_i (1_J, Ā) on B_i.
//
//     cargo run --release --example pop_age

use agemeasure::estimators::estimate_popage;
use agemeasure::harness::{sample_initial_ages, InitialAgeLaw};
use agemeasure::popcore::PopAgeCell;
use agemeasure::{simulate, Interval, IntervalUnion, RateModel};

fn main() -> anyhow::Result<()> {
    let j: IntervalUnion = "[0.5,1.5]".parse()?;
    let cells: [Interval; 2] = ["[0,1)".parse()?, "[1,2]".parse()?];
    let truth = RateModel::PopAgePiecewise {
        j: j.clone(),
        cells: vec![
            PopAgeCell {
                interval: cells[0],
                alpha: 0.02,
                gamma: 0.03,
            },
            PopAgeCell {
                interval: cells[1],
                alpha: 0.06,
                gamma: 0.09,
            },
        ],
    };
    let k = 10_000;
    let ages = sample_initial_ages(&InitialAgeLaw::Uniform { lo: 0.0, hi: 1.0 }, k, 4);
    let log = simulate(&truth, &ages, k, 1.0, 4)?;
    let (alpha, gamma) = estimate_popage(&log, &j, &cells)?;
    println!("α = {alpha:.5?} (truth [0.02, 0.06])");
    println!("γ = {gamma:.5?} (truth [0.03, 0.09])");
    Ok(())
}
