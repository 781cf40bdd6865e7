//! Line-oriented audit session.
//!
//! Each input line is one command. With `--manual-clock` a line may start
//! with `@<ms>` to set the session time; otherwise the wall clock since the
//! session started is used and scans advance while waiting for input.
//! `quit` or end of input ends the session.

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::sync::mpsc::{self, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use gridpilot_core::harness::render::render;
use gridpilot_core::harness::Driver;
use gridpilot_core::{ActivityEvent, SessionConfig, Workbook};

const TICK: Duration = Duration::from_millis(50);

fn print_events(out: &mut impl Write, events: &[ActivityEvent]) -> io::Result<()> {
    for e in events {
        writeln!(out, "{e}")?;
    }
    Ok(())
}

/// Split an optional `@<ms>` prefix off a line.
fn split_time(line: &str) -> (Option<u64>, &str) {
    let line = line.trim();
    if let Some(rest) = line.strip_prefix('@') {
        let (num, text) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
        if let Ok(t) = num.parse() {
            return (Some(t), text.trim());
        }
    }
    (None, line)
}

pub fn run(
    workbook: Workbook,
    config: SessionConfig,
    log_path: Option<&Path>,
    manual_clock: bool,
    show_grid: bool,
) -> Result<()> {
    let mut driver = Driver::new(workbook, "audit".into(), config);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    print_events(&mut out, driver.log().events())?;
    if show_grid {
        write!(out, "{}", render(driver.session()))?;
    }
    out.flush()?;

    let (tx, rx) = mpsc::channel::<String>();
    thread::spawn(move || {
        for line in io::stdin().lock().lines().map_while(Result::ok) {
            if tx.send(line).is_err() {
                break;
            }
        }
    });

    let start = Instant::now();
    let mut manual_t = 0u64;
    loop {
        let line = if manual_clock {
            match rx.recv() {
                Ok(l) => l,
                Err(_) => break,
            }
        } else {
            match rx.recv_timeout(TICK) {
                Ok(l) => l,
                Err(RecvTimeoutError::Timeout) => {
                    let events = driver.tick(start.elapsed().as_millis() as u64);
                    if !events.is_empty() {
                        print_events(&mut out, &events)?;
                        if show_grid {
                            write!(out, "{}", render(driver.session()))?;
                        }
                        out.flush()?;
                    }
                    continue;
                }
                Err(RecvTimeoutError::Disconnected) => break,
            }
        };
        let (at, text) = split_time(&line);
        if text.is_empty() {
            continue;
        }
        if matches!(text, "quit" | "exit") {
            break;
        }
        let t = if manual_clock {
            if let Some(at) = at {
                manual_t = at;
            }
            manual_t
        } else {
            start.elapsed().as_millis() as u64
        };
        let outcome = driver.command(text, t);
        print_events(&mut out, &outcome.events)?;
        if let Some(err) = &outcome.error {
            writeln!(out, "error {}: {}", err.code, err.message)?;
        }
        if show_grid {
            write!(out, "{}", render(driver.session()))?;
        }
        out.flush()?;
    }

    if manual_clock {
        driver.tick(manual_t);
    } else {
        driver.tick(start.elapsed().as_millis() as u64);
    }
    if let Some(path) = log_path {
        fs::write(path, driver.log().to_jsonl()).with_context(|| format!("writing {}", path.display()))?;
        writeln!(out, "log written to {}", path.display())?;
    }
    Ok(())
}
