//! One drop of a 3-cell network: per-user SINR for MRT and ZF, measured over
//! coherence blocks and from the closed-form expressions, with the
//! interference split into its parts.

use pcsim::harness::{run_trial, Measure, SimConfig};
use pcsim::pilots::PilotScheme;

fn main() -> pcsim::Result<()> {
    let cfg = SimConfig {
        cells: 3,
        users_per_cell: 4,
        antennas: 64,
        schemes: vec![PilotScheme::REUSE1],
        blocks: 2000,
        measure: Measure::All,
        ..SimConfig::default()
    };
    let trial = run_trial(&cfg, 0)?;
    let scheme = &trial.schemes[0];
    for p in &scheme.precoders {
        println!("{} (mean rate {:.3} bit/s/Hz)", p.precoder, p.empirical_rate.mean());
        println!(
            "  user   sinr dB  closed dB   desired     bf-var   coherent  noncoh"
        );
        for ((&(j, k), e), c) in trial.users.iter().zip(&p.empirical).zip(&p.closed_form) {
            println!(
                "  ({j},{k}) {:>9.2} {:>9.2} {:>9.3} {:>9.4} {:>9.4} {:>9.4}",
                e.sinr_db(),
                c.sinr_db(),
                e.desired,
                e.bf_uncertainty,
                e.coherent_pc,
                e.noncoherent
            );
        }
    }
    Ok(())
}
