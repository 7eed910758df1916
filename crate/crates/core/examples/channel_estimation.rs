//! Training and MMSE estimation for one user that shares its pilot with a
//! user of a neighbouring cell. Compares the measured estimation error with
//! the analytic one as the pilot power grows; the error stops falling once
//! the contaminating user dominates.

use pcsim::channel::{draw_small_scale, synthesize_channel, uplink_training};
use pcsim::estimation::{estimate_channels, estimate_variance, estimation_nmse};
use pcsim::pilots::PilotPlan;
use pcsim::scenario::LsfTensor;
use pcsim::seed::{stream_rng, Stream};
use pcsim::{db_to_linear, C64};

fn main() -> pcsim::Result<()> {
    // Cell 1's user reaches base station 0 at half the strength of cell 0's own user.
    let psi = LsfTensor::from_fn(2, 1, |l, j, _| if l == j { 1.0 } else { 0.5 })?;
    let plan = PilotPlan::reuse_one(2, 1);
    let (antennas, blocks) = (32, 2000);

    println!("{:>9} {:>10} {:>10} {:>12}", "pilot dB", "nmse", "analytic", "parallelism");
    for pilot_db in [-10.0, 0.0, 10.0, 20.0, 30.0] {
        let pilot_snr = db_to_linear(pilot_db);
        let mut rng = stream_rng(3, Stream::SmallScale, &[pilot_db as u64]);
        let mut report = None;
        let mut alignment = 0.0;
        for _ in 0..blocks {
            let h = synthesize_channel(draw_small_scale(antennas, 2, 1, &mut rng)?, &psi)?;
            let obs = uplink_training(&h, &plan, pilot_snr, &mut rng)?;
            let est = estimate_channels(&obs, &psi, &plan)?;
            let r = estimation_nmse(&est, &h)?;
            match &mut report {
                None => report = Some(r),
                Some(acc) => acc.merge(&r),
            }
            let (a, b) = (est.vector(0, 0, 0), est.vector(0, 1, 0));
            let dot: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
            alignment += dot.norm() / (na * nb).sqrt() / blocks as f64;
        }
        let analytic = estimate_variance(&psi, &plan, pilot_snr)?.nmse(&psi, 0, 0, 0);
        println!(
            "{pilot_db:>9.0} {:>10.4} {analytic:>10.4} {alignment:>12.6}",
            report.expect("at least one block").nmse(0, 0, 0)
        );
    }
    Ok(())
}
