// Direct and plug-in confidence intervals for constant and
// population-linear rates.
//
//     cargo run --release --example confidence_intervals

use agemeasure::confidence::{ci_constant, ci_popdep, Mode};
use agemeasure::harness::{sample_initial_ages, InitialAgeLaw};
use agemeasure::{simulate, IntervalUnion, RateModel};

fn main() -> anyhow::Result<()> {
    let k = 1000;
    let law = InitialAgeLaw::Uniform { lo: 0.0, hi: 1.0 };
    let log = simulate(
        &RateModel::Constant { h: 0.2, b: 0.4 },
        &sample_initial_ages(&law, k, 8),
        k,
        1.0,
        8,
    )?;
    for mode in Mode::ALL {
        let (h, b) = ci_constant(&log, 0.05, mode)?;
        println!(
            "{mode:>6}: h in [{:.4}, {:.4}], b in [{:.4}, {:.4}]",
            h.lower, h.upper, b.lower, b.upper
        );
    }

    let j1: IntervalUnion = "[0.5,1.5]".parse()?;
    let j2: IntervalUnion = "[0,0.5) ∪ (1.5,2]".parse()?;
    let model = RateModel::PopulationLinear {
        lambda: 0.04,
        j2: j2.clone(),
        eta: 0.08,
        j1: j1.clone(),
    };
    let log = simulate(&model, &sample_initial_ages(&law, k, 9), k, 1.0, 9)?;
    for mode in Mode::ALL {
        let (l, e) = ci_popdep(&log, &j1, &j2, 0.05, mode)?;
        println!(
            "{mode:>6}: λ in [{:.4}, {:.4}], η in [{:.4}, {:.4}]",
            l.lower, l.upper, e.lower, e.upper
        );
    }
    Ok(())
}
