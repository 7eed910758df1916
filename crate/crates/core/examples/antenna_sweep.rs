//! Mean downlink rate against the number of base-station antennas for
//! reuse 1 and reuse 3, both precoders.
//!
//! cargo run --release --example antenna_sweep -- [drops] [blocks]

use pcsim::harness::{run_sweep, SimConfig, SweepSpec, SweepVar};
use pcsim::pilots::PilotScheme;

fn main() -> pcsim::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let cfg = SimConfig {
        schemes: vec![PilotScheme::REUSE1, PilotScheme::REUSE3],
        drops: args.next().unwrap_or(20),
        blocks: args.next().unwrap_or(100),
        ..SimConfig::default()
    };
    let spec = SweepSpec::new(SweepVar::Antennas, vec![16.0, 32.0, 64.0, 128.0, 256.0])?;
    let table = run_sweep(&cfg, &spec)?;
    println!("{:>5} {:>8} {:>4} {:>10} {:>10} {:>8}", "M", "scheme", "pre", "rate", "closed", "ci95");
    for r in &table.rows {
        println!(
            "{:>5} {:>8} {:>4} {:>10.4} {:>10.4} {:>8.4}",
            r.value, r.scheme, r.precoder, r.mean_rate, r.mean_rate_closed_form, r.ci95
        );
    }
    Ok(())
}
