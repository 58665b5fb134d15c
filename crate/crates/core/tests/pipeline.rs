use num_traits::One;
use proptest::prelude::*;

use tautsys_core::exact::{enumerate_lattice_points, integer_kernel_basis, rat};
use tautsys_core::json::to_canonical_string;
use tautsys_core::periods::{chart_period_series, ci_period_series, toric_period_series};
use tautsys_core::systems::{build_ci_system, build_extended_gkz, build_flag_system, build_gkz, SystemJson};
use tautsys_core::verify::{annihilation_report, symbol_vanishing_report};
use tautsys_core::weyl::SeriesJson;
use tautsys_core::{Int, IntMatrix, LaurentPoly, Rat, SignPattern, SparseSeries, TautSystem, ToricData, Variety};

fn passes(sys: &TautSystem, s: &SparseSeries) {
    let r = annihilation_report(sys, s).unwrap();
    assert!(r.passed, "{:?}", r.summary());
}

#[test]
fn toric_gkz_kills_toric_period() {
    let t = ToricData::projective(3).unwrap();
    let sys = build_gkz(&t, &[rat(-1), rat(0), rat(0)], 3).unwrap();
    passes(&sys, &toric_period_series(&t, 6).unwrap());
}

#[test]
fn hexagon_toric_period() {
    // hexagon plus its centre
    let a = IntMatrix::from_rows(&[
        vec![1, 1, 1, 1, 1, 1, 1],
        vec![1, 1, 0, -1, -1, 0, 0],
        vec![0, 1, 1, 0, -1, -1, 0],
    ]);
    let t = ToricData::with_centroid(a).unwrap();
    let s = toric_period_series(&t, 4).unwrap();
    let sys = build_gkz(&t, &[rat(-1), rat(0), rat(0)], 3).unwrap();
    passes(&sys, &s);
    // Σ_{l_0 = -k} c_l = (-1)^k CT(P^k) with P the sum of the boundary monomials
    let p = LaurentPoly::from_terms(
        2,
        [(vec![1, 0], rat(1)), (vec![1, 1], rat(1)), (vec![0, 1], rat(1)), (vec![-1, 0], rat(1)), (vec![-1, -1], rat(1)), (vec![0, -1], rat(1))],
    );
    for k in 0..=4i64 {
        let total: Rat = s.coeffs.iter().filter(|(e, _)| e.get(0) == -k - 1).map(|(_, c)| c.clone()).sum();
        let sign = if k % 2 == 0 { rat(1) } else { rat(-1) };
        assert_eq!(total, sign * p.power(k as u32).constant_term());
    }
}

#[test]
fn flag_system_kills_chart_period() {
    let x = Variety::flag(vec![1, 2], 3).unwrap();
    let sys = build_flag_system(&x, 3).unwrap();
    passes(&sys, &chart_period_series(&x, 3).unwrap());
}

#[test]
fn complete_intersection_in_p5() {
    let x = Variety::Grassmannian { d: 1, n: 6 };
    let sys = build_ci_system(&x, &[vec![2], vec![4]], &[Rat::one(), Rat::one()], 5).unwrap();
    let s = ci_period_series(&x, &[vec![2], vec![4]], 2).unwrap();
    assert_eq!(sys.distinguished, s.distinguished);
    passes(&sys, &s);
    assert!(symbol_vanishing_report(&sys, 2, 9).unwrap().passed);
}

#[test]
fn json_round_trip_is_byte_stable() {
    let sys = build_extended_gkz(3, 3).unwrap();
    let text = to_canonical_string(&sys.to_json()).unwrap();
    let back = TautSystem::from_json(&serde_json::from_str::<SystemJson>(&text).unwrap()).unwrap();
    assert_eq!(back, sys);
    assert_eq!(to_canonical_string(&back.to_json()).unwrap(), text);

    let s = toric_period_series(&ToricData::projective(3).unwrap(), 5).unwrap();
    let text = to_canonical_string(&s).unwrap();
    let back = SparseSeries::from_json(&serde_json::from_str::<SeriesJson>(&text).unwrap()).unwrap();
    assert_eq!(back, s);
}

proptest! {
    #[test]
    fn enumerated_points_recheck(
        rows in prop::collection::vec(prop::collection::vec(-2i64..3, 5), 1..3),
        cap in 0usize..5,
    ) {
        let mut a = vec![vec![1i64; 5]];
        a.extend(rows);
        let m = IntMatrix::from_rows(&a);
        let basis = integer_kernel_basis(&m);
        let pattern = SignPattern::single(0);
        if let Ok(points) = enumerate_lattice_points(&basis, &pattern, cap) {
            for p in &points {
                let v: Vec<Int> = p.iter().map(|&x| Int::from(x)).collect();
                prop_assert!(basis.contains(&v));
                prop_assert!(pattern.admits(p));
                prop_assert!(pattern.grading(p) <= cap as i64);
                prop_assert_eq!(m.mul_vec(&v).iter().filter(|x| **x != Int::from(0)).count(), 0);
            }
            let mut sorted = points.clone();
            sorted.sort_by_key(|p| (pattern.grading(p), p.clone()));
            prop_assert_eq!(sorted, points);
        }
    }

    #[test]
    fn period_series_is_homogeneous(n in 2usize..4, t in 0usize..5) {
        let s = toric_period_series(&ToricData::projective(n).unwrap(), t).unwrap();
        prop_assert!(s.euler_homogeneous());
        prop_assert_eq!(s.leading(), rat(1));
    }
}
