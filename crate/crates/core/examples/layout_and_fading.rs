//! Builds the 7-cell layout, drops users and prints the large-scale gain
//! each base station sees from the users of the center cell.

use pcsim::pilots::channel_quality;
use pcsim::scenario::{build_layout, compute_large_scale_fading, drop_users, PathlossParams};
use pcsim::seed::{stream_rng, Stream};
use pcsim::linear_to_db;

fn main() -> pcsim::Result<()> {
    let params = PathlossParams::default();
    let layout = build_layout(7, &params)?;
    println!("site spacing {:.1} m, edge gain {:.1} dB", layout.site_spacing(), linear_to_db(params.edge_gain()));
    for (i, c) in layout.centers.iter().enumerate() {
        println!("cell {i}: ({:8.1}, {:8.1})", c.x, c.y);
    }

    let mut rng = stream_rng(1, Stream::Geometry, &[0]);
    let users = 6;
    let drop = drop_users(&layout, users, &params, &mut rng)?;
    let psi = compute_large_scale_fading(&layout, &drop, &params, &mut rng)?;
    let quality = channel_quality(&psi);

    println!("\ngain in dB from center-cell users (rows) to every base station (columns)");
    for k in 0..users {
        let p = drop.position(0, k);
        let r = layout.centers[0].distance(p);
        let row: Vec<String> = (0..7).map(|l| format!("{:6.1}", linear_to_db(psi.get(l, 0, k)))).collect();
        println!("user {k} r={r:5.0} m  quality {:6.1} dB | {}", linear_to_db(quality.get(0, k)), row.join(" "));
    }
    Ok(())
}
