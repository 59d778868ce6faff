//! Worked examples for families, verification, PPT states and protocols.

use num_complex::Complex64;
use tile_upb::exec::Execution;
use tile_upb::families::{extend_columns, five_tile, prop2, prop3, Family, FamilySpec};
use tile_upb::linalg::{root_of_unity, ONE, ZERO};
use tile_upb::locc::{build_theorem3_protocol, candidates_for, verify_protocol};
use tile_upb::ppt::ppt_report;
use tile_upb::rect::{enumerate_special_rectangles, is_u_tile};
use tile_upb::state::{build_upb, ProductState, StateLabel};
use tile_upb::verify::{check_upb, complement_in, relative_residual, SeesawConfig, UpbCheckConfig};

fn light() -> UpbCheckConfig {
    UpbCheckConfig {
        seesaw: SeesawConfig {
            restarts: 32,
            ..SeesawConfig::default()
        },
        ..UpbCheckConfig::default()
    }
}

#[test]
fn ring_family_sizes() {
    let r = check_upb(&build_upb(&prop2(5, 6).unwrap(), true).unwrap(), &light()).unwrap();
    assert!(r.pass);
    assert_eq!(r.size, 22);
    assert_eq!(prop2(4, 4).unwrap().tile_count(), 5);
    assert_eq!(build_upb(&prop2(4, 4).unwrap(), true).unwrap().len(), 12);
    assert_eq!(prop2(5, 5).unwrap().tile_count(), 9);
    assert_eq!(build_upb(&prop2(5, 5).unwrap(), true).unwrap().len(), 17);
    let r = check_upb(&build_upb(&prop2(3, 3).unwrap(), true).unwrap(), &light()).unwrap();
    assert!(r.pass);
    assert_eq!(r.size, 5);
}

#[test]
fn t_tile_and_five_tile_examples() {
    let ts = prop3(6, 9).unwrap();
    assert!(is_u_tile(&ts).unwrap().is_u_tile);
    let r = check_upb(&build_upb(&ts, true).unwrap(), &light()).unwrap();
    assert!(r.pass);
    assert_eq!(r.size, 28);

    let r = check_upb(&build_upb(&five_tile(4, 7).unwrap(), true).unwrap(), &light()).unwrap();
    assert!(r.pass);
    assert_eq!(r.size, 24);

    let rects = enumerate_special_rectangles(&five_tile(3, 3).unwrap()).unwrap();
    assert_eq!(rects.len(), 1);
    assert_eq!(rects[0].tile_ids, vec![1, 2, 3, 4, 5]);

    let wide = extend_columns(&prop3(4, 6).unwrap(), 7).unwrap();
    assert_eq!((wide.m(), wide.n()), (4, 7));
    assert!(is_u_tile(&wide).unwrap().is_u_tile);
}

#[test]
fn check_upb_tracks_u_tile_on_families() {
    let mut specs = vec![
        FamilySpec {
            family: Family::Example1,
            m: 4,
            n: 4,
            t: 0,
        },
        FamilySpec {
            family: Family::Fig2,
            m: 4,
            n: 4,
            t: 0,
        },
    ];
    for m in 3..=7 {
        for n in m..=7 {
            specs.push(FamilySpec {
                family: Family::Prop2,
                m,
                n,
                t: 0,
            });
            specs.push(FamilySpec {
                family: Family::FiveTile,
                m,
                n,
                t: 0,
            });
        }
    }
    for m in 4..=7 {
        for t in 5..=2 * m {
            specs.push(FamilySpec {
                family: Family::Prop3,
                m,
                n: m,
                t,
            });
        }
    }
    for spec in specs {
        let ts = spec.generate().unwrap();
        let upb = build_upb(&ts, false).unwrap();
        let r = check_upb(&upb, &light()).unwrap();
        assert_eq!(r.pass, is_u_tile(&ts).unwrap().is_u_tile, "{spec:?}");
        assert_eq!(r.size, ts.m() * ts.n() - ts.tile_count() + 1);
    }
}

#[test]
fn ppt_ranks() {
    assert_eq!(
        ppt_report(&build_upb(&prop2(3, 3).unwrap(), true).unwrap())
            .unwrap()
            .rank,
        4
    );
    assert_eq!(
        ppt_report(&build_upb(&prop3(4, 8).unwrap(), true).unwrap())
            .unwrap()
            .rank,
        7
    );
}

#[test]
fn six_by_seven_protocol() {
    let upb = build_upb(&prop2(6, 7).unwrap(), true).unwrap();
    assert_eq!(upb.len(), 34);
    let p = build_theorem3_protocol(6, 7).unwrap();
    let r = verify_protocol(&p, &candidates_for(&upb, 3), Execution::Parallel).unwrap();
    assert!(r.pass);
    assert!((r.min_success_probability - 1.0).abs() < 1e-9);
}

#[test]
fn protocol_json_round_trip() {
    let p = build_theorem3_protocol(6, 6).unwrap();
    let text = serde_json::to_string(&p).unwrap();
    let back: tile_upb::locc::Protocol = serde_json::from_str(&text).unwrap();
    assert_eq!(back, p);
}

fn fourier(dim: usize, support: std::ops::RangeInclusive<usize>, order: usize, i: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; dim];
    for j in support {
        v[j] = root_of_unity(order, i * j);
    }
    v
}

fn ket(dim: usize, k: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; dim];
    v[k] = ONE;
    v
}

/// The explicit list of 4⊗n states spans, tile by tile, the same space as
/// the generated tile bases without their all-ones member.
#[test]
fn four_row_listing_matches_tile_spans() {
    for n in 4..=8 {
        let upb = build_upb(&prop2(4, n).unwrap(), true).unwrap();
        let p = |a: Vec<Complex64>, b: Vec<Complex64>| ProductState::new(a, b).unwrap();
        let mut listed: Vec<(usize, ProductState)> = Vec::new();
        for i in 1..=n - 2 {
            listed.push((1, p(ket(4, 0), fourier(n, 0..=n - 2, n - 1, i))));
            listed.push((3, p(ket(4, 3), fourier(n, 1..=n - 1, n - 1, i))));
        }
        for i in 1..=2 {
            listed.push((2, p(fourier(4, 0..=2, 3, i), ket(n, n - 1))));
            listed.push((4, p(fourier(4, 1..=3, 3, i), ket(n, 0))));
        }
        let (plus, minus) = {
            let mut a = ket(4, 1);
            a[2] = ONE;
            let mut b = ket(4, 1);
            b[2] = -ONE;
            (a, b)
        };
        for i in 1..=n - 3 {
            listed.push((5, p(plus.clone(), fourier(n, 1..=n - 2, n - 2, i))));
        }
        for i in 0..=n - 3 {
            listed.push((5, p(minus.clone(), fourier(n, 1..=n - 2, n - 2, i))));
        }
        assert_eq!(listed.len() + 1, 4 * n - 4);
        for id in 1..=5 {
            let ours: Vec<_> = upb
                .labels
                .iter()
                .zip(&upb.states)
                .filter(|(l, _)| matches!(l, StateLabel::Tile { id: t, .. } if *t == id))
                .map(|(_, s)| s.normalized().to_state())
                .collect();
            let theirs: Vec<_> = listed
                .iter()
                .filter(|(t, _)| *t == id)
                .map(|(_, s)| s.to_state())
                .collect();
            assert_eq!(ours.len(), theirs.len(), "tile {id}, n={n}");
            // Equal dimension plus containment gives equal spans. The
            // orthonormal completion of `ours` spans its orthogonal
            // complement; each listed state must be orthogonal to it.
            let outside = complement_in(4, n, &ours).unwrap();
            for s in &theirs {
                assert!(relative_residual(&outside, s) > 1.0 - 1e-12, "tile {id}, n={n}");
            }
        }
    }
}
