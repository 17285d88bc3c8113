//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::process::ExitCode;

use tmnoise::acceptance::{self, AcceptanceOptions, AcceptanceReport};

/// The report survives parse-emit-parse unchanged.
fn report_round_trips(report: &AcceptanceReport) -> bool {
    let text = report.to_json();
    match AcceptanceReport::from_json(&text) {
        Ok(back) => back == *report && back.to_json() == text,
        Err(_) => false,
    }
}

/// At zero tolerance every selected criterion fails and is named.
fn zero_tolerance_fails_by_name() -> bool {
    let report = acceptance::run(&AcceptanceOptions {
        tolerance_scale: 0.0,
        only: vec![1, 4, 6],
        ..AcceptanceOptions::default()
    });
    !report.passed
        && report.criteria.len() == 3
        && report.criteria.iter().all(|c| !c.passed && !c.detail.is_empty())
        && report.lines()[0].contains("calibration-arithmetic")
        && report.lines()[0].contains("FAIL")
}

fn main() -> ExitCode {
    let report = acceptance::run(&AcceptanceOptions::default());
    for line in report.lines() {
        println!("{line}");
    }
    let mut ok = report.passed && report.criteria.len() == acceptance::criteria().len();
    for (name, passed) in [
        ("report round-trip", report_round_trips(&report)),
        ("zero tolerance fails by name", zero_tolerance_fails_by_name()),
    ] {
        println!("check {name:<30} {}", if passed { "PASS" } else { "FAIL" });
        ok &= passed;
    }
    println!("acceptance: {}", if ok { "PASS" } else { "FAIL" });
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
