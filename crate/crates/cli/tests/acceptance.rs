//! Acceptance run: one line per criterion, full mode, with wall-clock limits.
//! Criterion 10 compares two `validate --quick` reports from the binary byte for byte.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use fracpearson::validation::{run_criterion, Mode, CRITERIA};

const SEED: u64 = 20240607;

fn limit(id: u32) -> Option<Duration> {
    let secs = match id {
        1 => 5,
        2 => 30,
        3 | 4 | 9 => 300,
        5..=8 => 600,
        _ => return None,
    };
    Some(Duration::from_secs(secs))
}

fn validate_quick() -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_fracpearson"))
        .args(["validate", "--quick", "--seed", &SEED.to_string()])
        .output()
        .map_err(|e| e.to_string())?;
    match out.status.code() {
        Some(0) => Ok(out.stdout),
        c => Err(format!(
            "exit {c:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        )),
    }
}

fn main() -> ExitCode {
    let mut all = true;
    for &(id, name) in &CRITERIA {
        let start = Instant::now();
        let line = if id == 10 {
            let (a, b) = (validate_quick(), validate_quick());
            let elapsed = start.elapsed().as_secs_f64();
            let (pass, detail) = match (a, b) {
                (Ok(a), Ok(b)) if a == b => (true, format!("{} identical bytes", a.len())),
                (Ok(a), Ok(b)) => (
                    false,
                    format!("reports differ ({} vs {} bytes)", a.len(), b.len()),
                ),
                (Err(e), _) | (_, Err(e)) => (false, e),
            };
            all &= pass;
            format!(
                "{} criterion {id:>2} {name}: {detail}; {elapsed:.1} s",
                if pass { "PASS" } else { "FAIL" }
            )
        } else {
            let r = run_criterion(id, Mode::Full, SEED).expect("known criterion");
            let elapsed = start.elapsed();
            let lim = limit(id).expect("limit");
            let in_time = elapsed < lim;
            let pass = r.pass && in_time;
            all &= pass;
            let failed: Vec<String> = r
                .checks
                .iter()
                .filter(|c| !c.pass)
                .map(|c| {
                    format!(
                        "{} = {:.3e} (needs {} {:.1e})",
                        c.name,
                        c.measured,
                        c.relation.symbol(),
                        c.threshold
                    )
                })
                .collect();
            let mut detail = format!(
                "{}/{} checks",
                r.checks.iter().filter(|c| c.pass).count(),
                r.checks.len()
            );
            if !failed.is_empty() {
                detail.push_str(&format!(" [{}]", failed.join("; ")));
            }
            format!(
                "{} criterion {id:>2} {name}: {detail}; {:.1} s (limit {} s{})",
                if pass { "PASS" } else { "FAIL" },
                elapsed.as_secs_f64(),
                lim.as_secs(),
                if in_time { "" } else { ", exceeded" }
            )
        };
        println!("{line}");
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
