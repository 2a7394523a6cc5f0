// Exact time integrals of pairings along a path.
//
//     cargo run --example path_functionals

use agemeasure::pathfn::{endpoint_pair, int_pair, int_product, segment};
use agemeasure::sim::{Event, EventKind};
use agemeasure::{EventLog, Interval, IntervalUnion, TestFn};

fn main() -> anyhow::Result<()> {
    // two individuals aged 0.2 and 0.9; the older one dies at t = 0.3
    let log = EventLog {
        initial_ages: vec![0.2, 0.9],
        carrying_capacity: 2,
        horizon: 1.0,
        events: vec![Event {
            time: 0.3,
            kind: EventKind::Death,
            subject: 1,
            parent_age: None,
        }],
        seed: 0,
        model: None,
    };
    let cell: Interval = "[0,1)".parse()?;
    let path = segment(&log, &[cell])?;
    println!("breakpoints: {:?}", path.breakpoints());

    let young = IntervalUnion::from(cell);
    let x_in_cell = TestFn::age().restrict(&young);
    println!("∫ (1, Ā) ds        = {:.6}", int_pair(&path, &TestFn::one(), 0)?);
    println!("∫ (x, Ā) ds        = {:.6}", int_pair(&path, &TestFn::age(), 0)?);
    println!("∫ s (x 1_B, Ā) ds  = {:.6}", int_pair(&path, &x_in_cell, 1)?);
    println!(
        "∫ (1_B, Ā)(x, Ā) ds = {:.6}",
        int_product(&path, &young, &TestFn::age(), 0)?
    );
    println!("(x, Ā_T)           = {:.6}", endpoint_pair(&log, &TestFn::age(), 1.0)?);
    Ok(())
}
