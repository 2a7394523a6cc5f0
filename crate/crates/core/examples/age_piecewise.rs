// Age-piecewise rates on two cells, estimated from two linear systems.
//
//     cargo run --release --example age_piecewise

use agemeasure::estimators::{Design, Equations};
use agemeasure::harness::{sample_initial_ages, InitialAgeLaw};
use agemeasure::popcore::AgeCell;
use agemeasure::{simulate, RateModel};

fn main() -> anyhow::Result<()> {
    let truth = RateModel::AgePiecewise {
        cells: vec![
            AgeCell {
                interval: "[0,1)".parse()?,
                h: 0.2,
                b: 0.1,
            },
            AgeCell {
                interval: "[1,2]".parse()?,
                h: 0.4,
                b: 0.5,
            },
        ],
    };
    let k = 10_000;
    let ages = sample_initial_ages(&InitialAgeLaw::Uniform { lo: 0.0, hi: 1.0 }, k, 3);
    let log = simulate(&truth, &ages, k, 1.0, 3)?;

    let eq = Equations::assemble(&log, &Design::of(&truth)?)?;
    println!("death system: {:?}", eq.death.matrix);
    println!("          rhs {:?}", eq.death.rhs);
    println!("    condition {:.1}", eq.death.condition_estimate);
    let sol = eq.solve()?;
    println!("h = {:?} (truth [0.2, 0.4])", sol.death);
    println!("b = {:?} (truth [0.1, 0.5])", sol.birth);
    Ok(())
}
