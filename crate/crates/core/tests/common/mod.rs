#![allow(dead_code)]

use gridpilot_core::harness::Driver;
use gridpilot_core::workbook::format_a1;
use gridpilot_core::{ColorName, CommandSet, Direction, SessionConfig, Workbook};
use rand::seq::SliceRandom;
use rand::Rng;

pub const RETAIL: &[u8] = include_bytes!("../../fixtures/retail.json");
pub const DEPARTMENTS: &[u8] = include_bytes!("../../fixtures/departments.json");

pub fn retail() -> Workbook {
    Workbook::load(RETAIL).unwrap()
}

pub fn departments() -> Workbook {
    Workbook::load(DEPARTMENTS).unwrap()
}

fn pick<'a, R: Rng>(rng: &mut R, items: &'a [&'a str]) -> &'a str {
    items.choose(rng).unwrap()
}

pub fn random_command<R: Rng>(rng: &mut R, set: CommandSet) -> String {
    let dir = Direction::ALL.choose(rng).unwrap().to_string();
    let color = ColorName::PALETTE.choose(rng).unwrap().to_string();
    if rng.gen_ratio(1, 25) {
        return pick(rng, &["jump magenta", "", "scan sideways", "go to cell", "hello"]).to_string();
    }
    match set {
        CommandSet::IVoice => match rng.gen_range(0..12) {
            0..=2 => format!("jump {color}"),
            3 | 4 => "jump back".into(),
            5 => format!("jump {dir}"),
            6 => format!("scan {dir}"),
            7 => pick(rng, &["stop", "stop scanning"]).into(),
            8 => pick(rng, &["show colours", "hide colors"]).into(),
            9 => pick(rng, &["speed up", "slow down"]).into(),
            10 => "mark error".into(),
            _ => "unmark error".into(),
        },
        CommandSet::Baseline => match rng.gen_range(0..9) {
            0..=2 => format!("go to cell {}", format_a1(rng.gen_range(1..12), rng.gen_range(1..40))),
            3 | 4 => format!("move {dir} {}", rng.gen_range(1..6)),
            5 => pick(rng, &["next worksheet", "previous worksheet"]).into(),
            6 => format!("press control {dir}"),
            7 => "mark error".into(),
            _ => "unmark error".into(),
        },
    }
}

/// A session of `commands` random commands at random, non-decreasing times.
pub fn random_session<R: Rng>(
    rng: &mut R,
    workbook: &Workbook,
    set: CommandSet,
    commands: usize,
) -> Driver {
    let config = SessionConfig {
        technology: set,
        dwell_ms: rng.gen_range(1..=8) * 250,
        smart_scan: rng.gen_bool(0.5),
        ..SessionConfig::default()
    };
    let mut driver = Driver::new(workbook.clone(), format!("rand-{}", rng.gen::<u32>()), config);
    let mut t = 0u64;
    for _ in 0..commands {
        t += match rng.gen_range(0..10) {
            0 => 0,
            1..=6 => rng.gen_range(1..2500),
            _ => rng.gen_range(2500..9000),
        };
        if rng.gen_ratio(1, 5) {
            driver.tick(t);
            t += rng.gen_range(0..400);
        }
        let text = random_command(rng, set);
        driver.command(&text, t);
    }
    driver.tick(t + rng.gen_range(0..5000));
    driver
}
