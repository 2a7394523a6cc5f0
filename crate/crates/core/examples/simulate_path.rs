// Exact simulation of one path under age-piecewise rates.
//
//     cargo run --example simulate_path

use agemeasure::popcore::AgeCell;
use agemeasure::sim::{next_epoch, EventKind};
use agemeasure::{simulate, RateModel};

fn main() -> anyhow::Result<()> {
    let model = RateModel::AgePiecewise {
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
    let ages: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
    println!(
        "first structural epoch after 0: {:.4}",
        next_epoch(&ages, &model, 0.0, 1.0)
    );

    let log = simulate(&model, &ages, 500, 1.0, 42)?;
    let births = log.events.iter().filter(|e| e.kind == EventKind::Birth).count();
    println!("{} events: {births} births, {} deaths", log.events.len(), log.deaths());
    println!("population {} -> {}", log.initial_count(), log.final_count());

    let end = log.replay(1.0)?;
    let mean_age = end.ages().iter().sum::<f64>() / end.len() as f64;
    println!("mean age at T: {mean_age:.4}");

    let again = simulate(&model, &ages, 500, 1.0, 42)?;
    assert_eq!(again, log, "same seed, same path");
    Ok(())
}
