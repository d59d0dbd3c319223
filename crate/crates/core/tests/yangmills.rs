mod common;

use eqloc::exact::q;
use eqloc::lie::{build_root_system, Normalization, RootKind};
use eqloc::par::Parallelism;
use eqloc::yangmills::*;

fn su2() -> eqloc::RootSystem {
    build_root_system(RootKind::A1, Normalization::Su2).unwrap()
}

#[test]
fn migdal_matches_direct_sum() {
    let spec = PartitionSpec::new(su2(), 1, q(1), 50.0).unwrap();
    let z = migdal_partition(&spec).unwrap();
    let direct: f64 = (1..=100).map(|n| (-(n * n) as f64 / 8.0).exp()).sum();
    assert!((z.lattice_sum - direct).abs() < 1e-14 * direct);
    assert!(z.tail_bound < 1e-12);
    let v = su2().vol_group().to_f64();
    assert!((z.value - v * v * direct).abs() < 1e-14);
}

#[test]
fn sawtooth_gap() {
    let r = sawtooth_identity(50, q(1)).unwrap();
    println!("{r:?}");
    assert!(r.gap.abs() <= 1e-6 * r.rhs.abs());
}

#[test]
fn zeta_values() {
    let w = witten_volume(&su2(), 2, 1e6, WittenConstant::Volume, Parallelism::Threads(4)).unwrap();
    println!("{w:?}");
    let pi = std::f64::consts::PI;
    assert!((w.lattice_sum - pi * pi / 6.0).abs() < 1e-5);
    let w3 = witten_volume(&su2(), 3, 1e4, WittenConstant::Volume, Parallelism::Sequential).unwrap();
    assert!((w3.lattice_sum - pi.powi(4) / 90.0).abs() < 1e-9);
}

#[test]
fn a2_stabilizes() {
    let a2 = build_root_system(RootKind::A2, Normalization::Basic).unwrap();
    let lo = witten_volume(&a2, 2, 1e3, WittenConstant::Volume, Parallelism::Threads(4)).unwrap();
    let hi = witten_volume(&a2, 2, 1e4, WittenConstant::Volume, Parallelism::Threads(4)).unwrap();
    println!("{lo:?} {hi:?}");
    assert!(((lo.lattice_sum - hi.lattice_sum) / hi.lattice_sum).abs() < 5e-9);
    assert!(hi.lattice_sum - lo.lattice_sum <= lo.lattice_tail);
}

#[test]
fn hn_types_match_brute_force() {
    for r in 1..=3u32 {
        for d in -3..=3i64 {
            for bound in 0..=4i64 {
                let mut got = hn_types(r, d, &q(bound)).unwrap();
                for t in &got {
                    assert_eq!((t.rank(), t.degree()), (r, d));
                    assert!(t.slopes().windows(2).all(|w| w[0] > w[1]));
                }
                // returned in decreasing order of the slope vector
                assert!(got.windows(2).all(|w| w[0].slope_vector() > w[1].slope_vector()));
                got.sort();
                assert_eq!(got, common::hn_brute(r, d, bound), "r={r} d={d} bound={bound}");
            }
        }
    }
}
