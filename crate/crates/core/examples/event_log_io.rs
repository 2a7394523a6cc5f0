// Writing and reading event logs; every decimal round-trips exactly.
//
//     cargo run --example event_log_io

use agemeasure::{simulate, EventLog, RateModel};

fn main() -> anyhow::Result<()> {
    let model = RateModel::Constant { h: 0.5, b: 0.3 };
    let log = simulate(&model, &[0.1, 0.4, 0.7, 0.9], 4, 2.0, 7)?;

    let text = log.to_text();
    print!("{text}");

    // the file keeps time, kind and subject; the diagnostic parent age is not written
    let back = EventLog::from_text(&text)?;
    let key = |l: &EventLog| l.events.iter().map(|e| (e.time, e.kind, e.subject)).collect::<Vec<_>>();
    assert_eq!(key(&back), key(&log));
    assert_eq!(back.initial_ages, log.initial_ages);
    assert_eq!(back.to_text(), text);

    let dir = std::env::temp_dir().join("agemeasure-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("path.log");
    log.write_to(&path)?;
    let from_disk = EventLog::read_from(&path)?;
    println!("read {} events back from {}", from_disk.events.len(), path.display());

    let corrupt = "K=1\nT=1\nSEED=0\nINIT=0.5\n0.5 D 0\n0.6 D 0\n";
    println!("corrupt log: {}", EventLog::from_text(corrupt).unwrap_err());
    Ok(())
}
