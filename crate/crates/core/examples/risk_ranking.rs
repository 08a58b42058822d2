//! Rank relays by average risk and break the critical ones down by type.

use relay_risk::config::AssessmentConfig;
use relay_risk::report::{rank_critical, run_assessment};

fn main() -> relay_risk::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/cases/case30.m").into());
    let report = run_assessment(&path, &AssessmentConfig::default())?;
    let ranking = rank_critical(&report);

    println!("{:>5} {:<24}{:>8}{:>8}{:>8}", "bus", "relay", "R_C", "R_R", "R_E");
    for r in ranking.entries.iter().take(20) {
        println!(
            "{:>5} {:<24}{:>8.4}{:>8.4}{:>8.4}{}",
            r.substation,
            r.relay_type.to_string(),
            r.r_connectivity,
            r.r_random,
            r.r_equal,
            if r.is_critical() { "  critical" } else { "" }
        );
    }
    for share in ranking.breakdown.iter().filter(|s| s.count > 0) {
        println!("{:<24}{:>3} ({:.0}%)", share.relay_type, share.count, share.percent);
    }
    Ok(())
}
