//! Splits users into center and edge groups, builds the grouped pilot plan
//! and compares edge-user rates with full pilot reuse.

use pcsim::harness::{run_trial, SimConfig};
use pcsim::pilots::PilotScheme;
use pcsim::precoding::Precoder;

fn main() -> pcsim::Result<()> {
    let cfg = SimConfig {
        schemes: vec![PilotScheme::REUSE1, PilotScheme::Grouping],
        tau: std::env::args().nth(1).map_or(1.0, |t| t.parse().expect("tau")),
        blocks: 400,
        ..SimConfig::default()
    };
    let trial = run_trial(&cfg, 0)?;
    let reuse = trial.scheme(PilotScheme::REUSE1).expect("reuse1 configured");
    let grouped = trial.scheme(PilotScheme::Grouping).expect("grouping configured");
    let grouping = grouped.plan.grouping().expect("grouped plan records its grouping");

    println!("tau = {}", cfg.tau);
    for i in 0..cfg.cells {
        println!(
            "cell {i}: threshold {:.3e}, center {:?}, edge {:?}",
            grouping.tau * grouping.mu[i],
            grouping.center[i],
            grouping.edge[i]
        );
    }
    println!(
        "pilots: reuse1 {} (prelog {:.3}), grouping {} (prelog {:.3})",
        reuse.plan.num_pilots(),
        reuse.overhead.prelog,
        grouped.plan.num_pilots(),
        grouped.overhead.prelog
    );

    for kind in [Precoder::Mrt, Precoder::Zf] {
        let (a, b) = (reuse.precoder(kind).unwrap(), grouped.precoder(kind).unwrap());
        println!("\n{kind}: user  group   sinr dB reuse1/grouping   rate reuse1/grouping");
        for (i, &(j, k)) in trial.users.iter().enumerate() {
            println!(
                "     ({j},{k}) {:>6} {:>9.2} {:>9.2} {:>10.3} {:>9.3}",
                if grouping.is_edge(j, k) { "edge" } else { "center" },
                a.empirical[i].sinr_db(),
                b.empirical[i].sinr_db(),
                a.empirical_rate.rates[i],
                b.empirical_rate.rates[i]
            );
        }
    }
    Ok(())
}
