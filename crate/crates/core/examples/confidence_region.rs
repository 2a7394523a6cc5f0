// Grid confidence regions for two age cells, written as CSV.
//
//     cargo run --release --example confidence_region

use agemeasure::confidence::{region_agedep, Grid, Mode};
use agemeasure::harness::{sample_initial_ages, InitialAgeLaw};
use agemeasure::popcore::AgeCell;
use agemeasure::{simulate, Interval, RateModel};

fn main() -> anyhow::Result<()> {
    let cells: [Interval; 2] = ["[0,1)".parse()?, "[1,2]".parse()?];
    let truth = RateModel::AgePiecewise {
        cells: vec![
            AgeCell {
                interval: cells[0],
                h: 0.2,
                b: 0.1,
            },
            AgeCell {
                interval: cells[1],
                h: 0.4,
                b: 0.5,
            },
        ],
    };
    let k = 10_000;
    let ages = sample_initial_ages(&InitialAgeLaw::Uniform { lo: 0.0, hi: 1.0 }, k, 5);
    let log = simulate(&truth, &ages, k, 1.0, 5)?;

    let dir = std::env::temp_dir().join("agemeasure-example");
    std::fs::create_dir_all(&dir)?;
    for mode in Mode::ALL {
        let (h, b) = region_agedep(&log, &cells, 0.05, mode, &Grid::with_resolution(100))?;
        println!(
            "{mode:>6}: {} of {} cells feasible, truth inside: {}",
            h.feasible_count(),
            h.mask.len(),
            h.contains([0.2, 0.4])
        );
        let path = dir.join(format!("region_{mode}_h.csv"));
        h.write_csv_file(&path)?;
        b.write_csv_file(dir.join(format!("region_{mode}_b.csv")))?;
        println!("        wrote {}", path.display());
    }
    Ok(())
}
