use pcsim::channel::{draw_small_scale, synthesize_channel, uplink_training};
use pcsim::estimation::{estimate_channels, estimate_variance, ChannelEstimates};
use pcsim::metrics::{closed_form_sinr, rate};
use pcsim::pilots::{
    assign_pilots, channel_quality, group_users, pilot_overhead, PilotScheme, QualityVector,
};
use pcsim::precoding::{mrt_precoder, zf_precoder, Precoder, PowerPolicy};
use pcsim::scenario::{
    build_layout, compute_large_scale_fading, drop_users, CellLayout, LsfTensor, PathlossParams,
    Point, UserDrop,
};
use pcsim::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn network(cells: usize, k_users: usize, seed: u64) -> (CellLayout, LsfTensor) {
    let params = PathlossParams::default();
    let layout = build_layout(cells, &params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drop = drop_users(&layout, k_users, &params, &mut rng).unwrap();
    let psi = compute_large_scale_fading(&layout, &drop, &params, &mut rng).unwrap();
    (layout, psi)
}

fn cells() -> impl Strategy<Value = usize> {
    prop_oneof![Just(1usize), Just(3), Just(7)]
}

fn schemes(cells: usize) -> Vec<PilotScheme> {
    let mut s = vec![PilotScheme::Grouping];
    s.extend((1..=cells).map(PilotScheme::Reuse));
    s
}

fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grouping_partitions_and_is_monotone_in_tau(
        k_users in 1usize..12,
        ell in prop::collection::vec(1e-6f64..1e3, 3 * 12),
        mut taus in prop::collection::vec(0.0f64..3.0, 2..8),
    ) {
        let q = QualityVector::new(k_users, ell[..3 * k_users].to_vec()).unwrap();
        taus.sort_by(f64::total_cmp);
        let groupings: Vec<_> = taus.iter().map(|&t| group_users(&q, t).unwrap()).collect();
        for g in &groupings {
            for i in 0..3 {
                let mut all: Vec<usize> = g.center[i].iter().chain(&g.edge[i]).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..k_users).collect::<Vec<_>>());
                prop_assert_eq!(g.center_count(i) + g.edge_count(i), k_users);
            }
        }
        for w in groupings.windows(2) {
            for i in 0..3 {
                for &k in &w[1].center[i] {
                    prop_assert!(w[0].center[i].contains(&k));
                }
            }
        }
    }

    #[test]
    fn pilot_plans_are_collision_free(
        cells in cells(),
        k_users in 1usize..10,
        tau in 0.0f64..2.0,
        seed in any::<u64>(),
    ) {
        let (layout, psi) = network(cells, k_users, seed);
        let grouping = group_users(&channel_quality(&psi), tau).unwrap();
        for scheme in schemes(cells) {
            let plan = assign_pilots(&grouping, scheme, &layout).unwrap();
            for j in 0..cells {
                let mut used: Vec<usize> = (0..k_users).map(|k| plan.pilot(j, k)).collect();
                used.sort_unstable();
                used.dedup();
                prop_assert_eq!(used.len(), k_users);
            }
            prop_assert_eq!(plan.num_pilots(), plan.pilots_in_use());
            if scheme == PilotScheme::Grouping {
                for j in 0..cells {
                    for &k in &grouping.edge[j] {
                        prop_assert_eq!(plan.copilot_cells(j, k), vec![j]);
                    }
                }
                let bank = (0..cells).map(|i| grouping.center_count(i)).max().unwrap();
                let edges: usize = (0..cells).map(|i| grouping.edge_count(i)).sum();
                prop_assert_eq!(plan.num_pilots(), bank + edges);
            }
            if let Ok(o) = pilot_overhead(&plan, 200) {
                prop_assert!(o.prelog > 0.0 && o.prelog < 1.0);
            }
        }
    }

    #[test]
    fn estimate_variance_never_exceeds_gain(
        cells in cells(),
        k_users in 1usize..8,
        pilot_snr in 1e-3f64..1e4,
        seed in any::<u64>(),
    ) {
        let (layout, psi) = network(cells, k_users, seed);
        let grouping = group_users(&channel_quality(&psi), 1.0).unwrap();
        for scheme in schemes(cells) {
            let plan = assign_pilots(&grouping, scheme, &layout).unwrap();
            let v = estimate_variance(&psi, &plan, pilot_snr).unwrap();
            for l in 0..cells {
                for j in 0..cells {
                    for k in 0..k_users {
                        let (g, p) = (v.gamma(l, j, k), psi.get(l, j, k));
                        prop_assert!(g > 0.0 && g < p, "gamma {} psi {}", g, p);
                    }
                }
            }
        }
    }

    #[test]
    fn gains_are_translation_invariant(
        dx in -1e4f64..1e4,
        dy in -1e4f64..1e4,
        seed in any::<u64>(),
    ) {
        let params = PathlossParams::default();
        let layout = build_layout(7, &params).unwrap();
        let drop = drop_users(&layout, 4, &params, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let shift = |p: Point| Point::new(p.x + dx, p.y + dy);
        let moved_layout = CellLayout {
            centers: layout.centers.iter().copied().map(shift).collect(),
            cell_radius: layout.cell_radius,
        };
        let moved_drop = UserDrop {
            users_per_cell: drop.users_per_cell,
            positions: drop.positions.iter().copied().map(shift).collect(),
        };
        let a = compute_large_scale_fading(&layout, &drop, &params, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = compute_large_scale_fading(&moved_layout, &moved_drop, &params, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!(x.is_finite() && *x > 0.0);
            prop_assert!((x - y).abs() <= 1e-9 * x);
        }
    }

    #[test]
    fn mean_gain_strictly_decreases_with_distance(
        r in 35.0f64..2000.0,
        step in 1e-3f64..500.0,
        alpha in 2.0f64..5.0,
    ) {
        let params = PathlossParams { pathloss_exponent: alpha, ..PathlossParams::default() };
        prop_assert!(params.mean_gain(r + step) < params.mean_gain(r));
    }

    #[test]
    fn precoders_are_unit_norm_and_zf_nulls(
        k_users in 1usize..8,
        extra in 1usize..40,
        seed in any::<u64>(),
    ) {
        let m = k_users + extra;
        let (_, psi) = network(3, k_users, seed);
        let plan = pcsim::pilots::PilotPlan::reuse_one(3, k_users);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let h = synthesize_channel(draw_small_scale(m, 3, k_users, &mut rng).unwrap(), &psi).unwrap();
        let est = estimate_channels(&uplink_training(&h, &plan, 1.0, &mut rng).unwrap(), &psi, &plan).unwrap();
        for l in 0..3 {
            let zf = zf_precoder(&est, l).unwrap();
            let mrt = mrt_precoder(&est, l).unwrap();
            for k in 0..k_users {
                prop_assert!((norm(zf.vector(k)) - 1.0).abs() <= 1e-12);
                prop_assert!((norm(mrt.vector(k)) - 1.0).abs() <= 1e-12);
                for i in (0..k_users).filter(|&i| i != k) {
                    let e = est.vector(l, l, i);
                    prop_assert!(inner(e, zf.vector(k)).norm() <= 1e-10 * norm(e));
                }
            }
        }
    }

    #[test]
    fn precoders_follow_estimate_phase(
        phase in 0.0f64..std::f64::consts::TAU,
        seed in any::<u64>(),
    ) {
        let (k_users, m) = (3, 12);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut data = vec![C64::default(); k_users * m];
        pcsim::channel::fill_complex_gaussian(&mut data, &mut rng);
        let rot = C64::from_polar(1.0, phase);
        let rotated: Vec<C64> = data.iter().map(|z| z * rot).collect();
        let a = ChannelEstimates::from_vec(1, k_users, m, data.clone()).unwrap();
        let b = ChannelEstimates::from_vec(1, k_users, m, rotated).unwrap();
        let mut probe = vec![C64::default(); m];
        pcsim::channel::fill_complex_gaussian(&mut probe, &mut rng);
        for kind in [Precoder::Mrt, Precoder::Zf] {
            let pa = pcsim::precoding::precode(kind, &a, 0).unwrap();
            let pb = pcsim::precoding::precode(kind, &b, 0).unwrap();
            for k in 0..k_users {
                for (x, y) in pa.vector(k).iter().zip(pb.vector(k)) {
                    prop_assert!((x * rot - y).norm() <= 1e-12);
                }
                let ga = inner(&probe, pa.vector(k)).norm_sqr();
                let gb = inner(&probe, pb.vector(k)).norm_sqr();
                prop_assert!((ga - gb).abs() <= 1e-10 * ga.max(1e-300));
            }
        }
    }

    #[test]
    fn rate_increases_with_sinr_and_prelog(
        sinr in 0.0f64..1e4,
        d_sinr in 1e-6f64..10.0,
        prelog in 0.01f64..0.98,
        d_prelog in 1e-4f64..0.01,
    ) {
        prop_assert!(rate(sinr + d_sinr, prelog) > rate(sinr, prelog));
        prop_assert!(rate(sinr, prelog + d_prelog) > rate(sinr, prelog) || sinr == 0.0);
    }

    #[test]
    fn orthogonal_pilots_never_lower_edge_sinr(
        cells in prop_oneof![Just(3usize), Just(7)],
        k_users in 2usize..8,
        log2_m in 4u32..10,
        seed in any::<u64>(),
    ) {
        let m = (1usize << log2_m).max(k_users + 1);
        let (layout, psi) = network(cells, k_users, seed);
        let grouping = group_users(&channel_quality(&psi), 1.0).unwrap();
        let reuse = assign_pilots(&grouping, PilotScheme::REUSE1, &layout).unwrap();
        let grouped = assign_pilots(&grouping, PilotScheme::Grouping, &layout).unwrap();
        let policy = PowerPolicy::new(1.0, k_users);
        let vr = estimate_variance(&psi, &reuse, 1.0).unwrap();
        let vg = estimate_variance(&psi, &grouped, 1.0).unwrap();
        for j in 0..cells {
            for &k in &grouping.edge[j] {
                for kind in [Precoder::Mrt, Precoder::Zf] {
                    let a = closed_form_sinr(kind, &vr, &psi, m, &reuse, &policy, (j, k)).unwrap();
                    let b = closed_form_sinr(kind, &vg, &psi, m, &grouped, &policy, (j, k)).unwrap();
                    prop_assert!(b.sinr >= a.sinr * (1.0 - 1e-12), "{kind} ({j},{k}): {} < {}", b.sinr, a.sinr);
                }
            }
        }
    }
}
