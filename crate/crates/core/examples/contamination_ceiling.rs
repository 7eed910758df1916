//! SINR against array size for a user whose pilot is reused by one equally
//! strong neighbour. Both precoders saturate at the contamination limit.

use pcsim::harness::{run_trial_with_gains, SimConfig};
use pcsim::linear_to_db;
use pcsim::metrics::asymptotic_sinr;
use pcsim::pilots::PilotScheme;
use pcsim::scenario::{build_layout, LsfTensor};

fn main() -> pcsim::Result<()> {
    let psi = LsfTensor::from_fn(3, 1, |l, j, _| match (l, j) {
        (a, b) if a == b => 1.0,
        (0, 1) | (1, 0) => 1.0,
        _ => 1e-4,
    })?;
    let base = SimConfig {
        cells: 3,
        users_per_cell: 1,
        pilot_snr: 100.0,
        dl_power: 10.0,
        schemes: vec![PilotScheme::REUSE1],
        drops: 1,
        blocks: 500,
        ..SimConfig::default()
    };
    let layout = build_layout(3, &base.pathloss)?;
    println!("{:>6} {:>9} {:>9} {:>9} {:>9}", "M", "mrt", "mrt cf", "zf", "zf cf");
    let mut limit = 0.0;
    for m in [4, 16, 64, 256, 1024] {
        let cfg = SimConfig { antennas: m, ..base.clone() };
        let trial = run_trial_with_gains(&cfg, &layout, psi.clone(), 0)?;
        let s = &trial.schemes[0];
        limit = linear_to_db(asymptotic_sinr(&s.variance, &s.plan, (0, 0)));
        let cols: Vec<String> = s
            .precoders
            .iter()
            .flat_map(|p| [p.empirical[0].sinr_db(), p.closed_form[0].sinr_db()])
            .map(|db| format!("{db:>9.3}"))
            .collect();
        println!("{m:>6} {}", cols.join(" "));
    }
    println!("limit  {limit:>9.3} dB");
    Ok(())
}
