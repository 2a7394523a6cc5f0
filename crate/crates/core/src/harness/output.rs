//! CSV emission. Every file has a header row; reals use 17 significant
//! digits and undefined values are empty fields.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};

use super::ExperimentResult;
use crate::error::Result;
use crate::sim::fmt17;

fn opt(x: Option<f64>) -> String {
    x.map(fmt17).unwrap_or_default()
}

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

/// One row per replicate: identification, status, then every estimate.
pub fn write_replicates<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let names = result.config.parameter_names();
    let mut header = vec![
        "K",
        "replicate",
        "seed",
        "status",
        "extinct",
        "extinction_time",
        "events",
    ];
    header.extend(names.iter().map(String::as_str));
    header.extend([
        "death_condition",
        "birth_condition",
        "ill_conditioned_warning",
        "negative",
        "error",
    ]);
    let mut w = writer(out, &header)?;
    for block in &result.blocks {
        for r in &block.replicates {
            let mut row = vec![
                block.k.to_string(),
                r.replicate.to_string(),
                r.seed.to_string(),
                if r.ok().is_some() { "ok" } else { "failed" }.to_string(),
                (r.extinct() as u8).to_string(),
                opt(r.extinction_time),
                r.events.to_string(),
            ];
            match &r.estimate {
                Ok(e) => {
                    row.extend(e.estimates.iter().map(|&x| fmt17(x)));
                    row.extend([
                        fmt17(e.death_condition),
                        fmt17(e.birth_condition),
                        (e.ill_conditioned_warning as u8).to_string(),
                        (e.negative as u8).to_string(),
                        String::new(),
                    ]);
                }
                Err(msg) => {
                    row.extend(std::iter::repeat_n(String::new(), names.len() + 4));
                    row.push(msg.clone());
                }
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let mut w = writer(
        out,
        &[
            "subset",
            "parameter",
            "K",
            "truth",
            "n",
            "failed",
            "mean",
            "variance",
            "mse",
            "bias",
        ],
    )?;
    for s in &result.summaries {
        w.write_record([
            s.subset.label().to_string(),
            s.parameter.clone(),
            s.k.to_string(),
            fmt17(s.truth),
            s.n.to_string(),
            s.failed.to_string(),
            opt(s.mean),
            opt(s.variance),
            opt(s.mse),
            opt(s.bias),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_coverage<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let mut w = writer(out, &["parameter", "K", "mode", "alpha", "covered", "n", "rate"])?;
    for c in &result.coverage {
        w.write_record([
            c.parameter.clone(),
            c.k.to_string(),
            c.mode.label().to_string(),
            fmt17(c.alpha),
            c.covered.to_string(),
            c.n.to_string(),
            fmt17(c.rate()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureKind {
    /// `parameter,K,replicate,estimate`
    Boxplot,
    /// `parameter,K,mode,alpha,sample,lower,upper,truth`
    CiStrip,
    /// One file per region: `<p1>,<p2>,feasible`
    Region,
}

fn write_boxplot<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let names = result.config.parameter_names();
    let mut w = writer(out, &["parameter", "K", "replicate", "estimate"])?;
    for (i, name) in names.iter().enumerate() {
        for block in &result.blocks {
            for r in &block.replicates {
                if let Some(e) = r.ok() {
                    w.write_record([
                        name.clone(),
                        block.k.to_string(),
                        r.replicate.to_string(),
                        fmt17(e.estimates[i]),
                    ])?;
                }
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn write_ci_strip<W: Write>(result: &ExperimentResult, out: W) -> Result<()> {
    let names = result.config.parameter_names();
    let truth = result.config.truth();
    let samples = result.config.confidence.as_ref().map_or(0, |c| c.ci_strip_samples);
    let mut w = writer(
        out,
        &["parameter", "K", "mode", "alpha", "sample", "lower", "upper", "truth"],
    )?;
    for block in &result.blocks {
        for r in block.replicates.iter().take(samples) {
            for ci in &r.intervals {
                let t = names.iter().position(|n| *n == ci.parameter).map(|i| truth[i]);
                w.write_record([
                    ci.parameter.clone(),
                    block.k.to_string(),
                    ci.mode.label().to_string(),
                    fmt17(ci.alpha),
                    r.replicate.to_string(),
                    fmt17(ci.lower),
                    fmt17(ci.upper),
                    opt(t),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes the data behind one figure type into `dir`; returns the files written.
pub fn emit_figure_data(result: &ExperimentResult, kind: FigureKind, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    match kind {
        FigureKind::Boxplot => {
            let path = dir.join("boxplot.csv");
            write_boxplot(result, File::create(&path)?)?;
            Ok(vec![path])
        }
        FigureKind::CiStrip => {
            let path = dir.join("ci_strip.csv");
            write_ci_strip(result, File::create(&path)?)?;
            Ok(vec![path])
        }
        FigureKind::Region => {
            let mut paths = Vec::new();
            for block in &result.blocks {
                for r in &block.replicates {
                    for region in &r.regions {
                        let path = dir.join(format!(
                            "region_K{}_r{}_{}_{}_{}.csv",
                            block.k, r.replicate, region.mode, region.names[0], region.names[1]
                        ));
                        region.write_csv_file(&path)?;
                        paths.push(path);
                    }
                }
            }
            Ok(paths)
        }
    }
}

/// Writes every output under `root/<name>/`.
pub fn write_all(result: &ExperimentResult, root: &Path) -> Result<Vec<PathBuf>> {
    let dir = root.join(&result.config.name);
    fs::create_dir_all(&dir)?;
    let mut paths = Vec::new();
    let replicates = dir.join("replicates.csv");
    write_replicates(result, File::create(&replicates)?)?;
    paths.push(replicates);
    let summary = dir.join("summary.csv");
    write_summary(result, File::create(&summary)?)?;
    paths.push(summary);
    for kind in [FigureKind::Boxplot, FigureKind::CiStrip, FigureKind::Region] {
        paths.extend(emit_figure_data(result, kind, &dir)?);
    }
    let coverage = dir.join("coverage.csv");
    write_coverage(result, File::create(&coverage)?)?;
    paths.push(coverage);
    Ok(paths)
}

type Getter = fn(&super::SummaryStats) -> Option<f64>;

/// Plain-text tables: one block per parameter, one column per `K`.
pub fn format_tables(result: &ExperimentResult) -> String {
    let ks: Vec<u32> = result.blocks.iter().map(|b| b.k).collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} (R = {}, base seed {})",
        result.config.name, result.config.replicates, result.base_seed
    );
    for (name, truth) in result.config.parameter_names().iter().zip(result.config.truth()) {
        let _ = writeln!(s, "\n{name} (truth {truth})");
        let _ = write!(s, "{:<16}", "");
        for k in &ks {
            let _ = write!(s, "{:>14}", format!("K={k}"));
        }
        let _ = writeln!(s);
        let rows: [(&str, Getter, bool); 4] = [
            ("Sample Mean", |x| x.mean, false),
            ("Sample Variance", |x| x.variance, true),
            ("MSE", |x| x.mse, true),
            ("Bias", |x| x.bias, false),
        ];
        for (label, get, sci) in rows {
            let _ = write!(s, "{label:<16}");
            for &k in &ks {
                let cell = match result.summary(name, k).and_then(get) {
                    Some(v) if sci => format!("{v:.3e}"),
                    Some(v) => format!("{v:.5}"),
                    None => "-".into(),
                };
                let _ = write!(s, "{cell:>14}");
            }
            let _ = writeln!(s);
        }
        let _ = write!(s, "{:<16}", "failed");
        for &k in &ks {
            let failed = result.summary(name, k).map_or(0, |x| x.failed);
            let _ = write!(s, "{failed:>14}");
        }
        let _ = writeln!(s);
    }
    s
}
