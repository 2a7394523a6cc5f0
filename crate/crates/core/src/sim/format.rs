//! Line-oriented event-log files.
//!
//! ```text
//! K=<int>
//! T=<decimal>
//! SEED=<int>
//! INIT=<comma-separated decimals>
//! <time> <B|D> <subject-id>
//! ...
//! ```
//!
//! Decimals carry 17 significant digits so every `f64` round-trips exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::log::{Event, EventKind, EventLog};
use crate::error::{Error, Result};

/// Positional decimal with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(char::is_ascii_digit).collect();
    let point = exp + 1;
    let mut out = String::with_capacity(digits.len() + 8);
    if neg {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', point as usize - digits.len()));
    } else {
        let (int, frac) = digits.split_at(point as usize);
        out.push_str(int);
        out.push('.');
        out.push_str(frac);
    }
    out
}

impl EventLog {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "K={}", self.carrying_capacity);
        let _ = writeln!(s, "T={}", fmt17(self.horizon));
        let _ = writeln!(s, "SEED={}", self.seed);
        let init: Vec<String> = self.initial_ages.iter().map(|&a| fmt17(a)).collect();
        let _ = writeln!(s, "INIT={}", init.join(","));
        for e in &self.events {
            let _ = writeln!(s, "{} {} {}", fmt17(e.time), e.kind.code(), e.subject);
        }
        s
    }

    /// Parses and validates a log. The rate model is not part of the file.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let mut header = |key: &str| -> Result<String> {
            let (i, line) = lines.next().ok_or_else(|| Error::LogParse {
                line: 0,
                msg: format!("missing {key} header"),
            })?;
            line.trim()
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix('='))
                .map(str::to_owned)
                .ok_or_else(|| Error::LogParse {
                    line: i + 1,
                    msg: format!("expected {key}=..."),
                })
        };
        let num = |line: usize, s: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::LogParse {
                line,
                msg: format!("bad decimal {s:?}"),
            })
        };
        let carrying_capacity = header("K")?.parse().map_err(|_| Error::LogParse {
            line: 1,
            msg: "bad K".into(),
        })?;
        let horizon = num(2, &header("T")?)?;
        let seed = header("SEED")?.parse().map_err(|_| Error::LogParse {
            line: 3,
            msg: "bad SEED".into(),
        })?;
        let init = header("INIT")?;
        let initial_ages = if init.trim().is_empty() {
            Vec::new()
        } else {
            init.split(',').map(|a| num(4, a)).collect::<Result<Vec<_>>>()?
        };

        let mut events = Vec::new();
        for (i, line) in lines {
            let bad = |msg: &str| Error::LogParse {
                line: i + 1,
                msg: msg.into(),
            };
            let mut parts = line.split_whitespace();
            let time = num(i + 1, parts.next().ok_or_else(|| bad("missing time"))?)?;
            let kind = match parts.next() {
                Some("B") => EventKind::Birth,
                Some("D") => EventKind::Death,
                _ => return Err(bad("expected B or D")),
            };
            let subject = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad("bad subject id"))?;
            if parts.next().is_some() {
                return Err(bad("trailing fields"));
            }
            events.push(Event {
                time,
                kind,
                subject,
                parent_age: None,
            });
        }
        let log = EventLog {
            initial_ages,
            carrying_capacity,
            horizon,
            events,
            seed,
            model: None,
        };
        log.validate()?;
        Ok(log)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&fs::read_to_string(path)?)
    }
}
