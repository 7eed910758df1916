//! Mean downlink rate against the pilot reuse factor on the 7-cell layout.
//! Larger factors cut contamination but spend more of the coherence block
//! on training.
//!
//! cargo run --release --example reuse_sweep -- [drops] [blocks]

use pcsim::harness::{run_sweep, SimConfig, SweepSpec, SweepVar};

fn main() -> pcsim::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let cfg = SimConfig {
        drops: args.next().unwrap_or(20),
        blocks: args.next().unwrap_or(100),
        ..SimConfig::default()
    };
    let spec = SweepSpec::new(SweepVar::Reuse, (1..=7).map(f64::from).collect())?;
    let table = run_sweep(&cfg, &spec)?;
    println!("{:>5} {:>4} {:>7} {:>10} {:>10} {:>8}", "reuse", "pre", "prelog", "rate", "closed", "ci95");
    for r in &table.rows {
        let prelog = 1.0 - r.value * cfg.users_per_cell as f64 / cfg.coherence_symbols as f64;
        println!(
            "{:>5} {:>4} {:>7.3} {:>10.4} {:>10.4} {:>8.4}",
            r.value, r.precoder, prelog, r.mean_rate, r.mean_rate_closed_form, r.ci95
        );
    }
    Ok(())
}
