//! Spread of the risk index across probability schemes, per case.

use relay_risk::config::AssessmentConfig;
use relay_risk::report::run_assessment;

fn main() -> relay_risk::Result<()> {
    let cfg = AssessmentConfig { workers: 0, ..AssessmentConfig::default() };
    for name in ["case30", "case39", "case57", "case118"] {
        let report = run_assessment(format!("{}/cases/{name}.m", env!("CARGO_MANIFEST_DIR")), &cfg)?;
        let h = &report.histogram;
        print!("{name:<8}");
        for b in &h.buckets {
            print!("  ({}, {}] {:5.1}%", b.bin_start, b.bin_end, 100.0 * b.fraction);
        }
        println!();
        let bars: String = h
            .bins
            .iter()
            .map(|b| match (b.fraction * 40.0) as usize {
                0 => ' ',
                1..=2 => '.',
                3..=6 => ':',
                _ => '#',
            })
            .collect();
        println!("        |{bars}|  0 .. {:.1}", h.bins.last().map_or(0.0, |b| b.bin_end));
    }
    Ok(())
}
