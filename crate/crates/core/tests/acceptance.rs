//! End-to-end acceptance checks, one PASS/FAIL line each.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_traits::{One, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use tautsys_core::exact::{factorial, rat};
use tautsys_core::json::to_canonical_string;
use tautsys_core::periods::{chart_period_series, g24_interpretation_report, toric_period_series};
use tautsys_core::systems::{build_ci_system, build_extended_gkz, build_flag_system, build_gkz};
use tautsys_core::topology::{
    chi_y_genus_ci, euler_char_ci, euler_char_cy, eval_poly, is_palindromic, pn_chi_y_oracle, pn_euler_oracle,
};
use tautsys_core::varieties::{degree_grassmannian, poincare_polynomial, weyl_dim};
use tautsys_core::verify::{
    annihilation_report, lie_closure_report, period_sheaf_rank_pn, rank_bound_grassmannian,
};
use tautsys_core::volform::volform_report;
use tautsys_core::{DiffOp, ExpVec, Int, Rat, SparseSeries, TautSystem, ToricData, Variety};

type Outcome = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn annihilates(sys: &TautSystem, s: &SparseSeries) -> Outcome {
    let r = annihilation_report(sys, s).map_err(err)?;
    let summary = r.summary().join("; ");
    ensure(r.passed, summary.clone())?;
    let checked: usize = r.generators.iter().map(|g| g.checked).sum();
    Ok(format!("{summary}; {checked} coefficients checked"))
}

fn p(n: usize) -> Variety {
    Variety::Grassmannian { d: 1, n: n + 1 }
}

fn c1() -> Outcome {
    let sys = build_extended_gkz(3, 3).map_err(err)?;
    let s = toric_period_series(&ToricData::projective(3).map_err(err)?, 8).map_err(err)?;
    ensure(sys.n == 10, "expected 10 variables")?;
    annihilates(&sys, &s)
}

fn c2() -> Outcome {
    let sys = build_extended_gkz(5, 5).map_err(err)?;
    let s = toric_period_series(&ToricData::projective(5).map_err(err)?, 4).map_err(err)?;
    annihilates(&sys, &s)
}

fn c3() -> Outcome {
    let x = Variety::Grassmannian { d: 2, n: 4 };
    let sys = build_flag_system(&x, 1).map_err(err)?;
    ensure(sys.n == 126, "expected 126 variables")?;
    ensure(!sys.binomial.is_empty() && sys.linear.len() == 21 && sys.g_ops.len() == 15 && sys.euler.len() == 1, "generator groups")?;
    let s = chart_period_series(&x, 3).map_err(err)?;
    annihilates(&sys, &s)
}

fn c4() -> Outcome {
    let mut sizes = vec![];
    for n in 2..=4 {
        let t = toric_period_series(&ToricData::projective(n).map_err(err)?, 6).map_err(err)?;
        let c = chart_period_series(&Variety::Grassmannian { d: 1, n }, 6).map_err(err)?;
        ensure(t == c, format!("P^{} series differ", n - 1))?;
        sizes.push(format!("P^{}: {} terms", n - 1, t.len()));
    }
    Ok(sizes.join(", "))
}

fn c5() -> Outcome {
    let report = g24_interpretation_report(3).map_err(err)?;
    let matches: Vec<String> = report.iter().filter(|(_, m)| m.is_none()).map(|(i, _)| i.to_string()).collect();
    ensure(matches.len() == 1, format!("{} readings match: {matches:?}", matches.len()))?;
    Ok(format!("unique reading: {}", matches[0]))
}

fn c6() -> Outcome {
    let mut notes = vec![];
    for (d, n) in [(1, 2), (1, 3), (2, 4)] {
        let r = volform_report(d, n).map_err(err)?;
        ensure(r.global_sign.is_some(), format!("G({d},{n}): forms differ beyond a sign"))?;
        ensure(r.sl_failures.is_empty(), format!("G({d},{n}): L_x Ω != 0 for {:?}", r.sl_failures))?;
        ensure(r.horizontal_failures.is_empty(), format!("G({d},{n}): ι_u Ω != 0 for {:?}", r.horizontal_failures))?;
        let n_str = n.to_string();
        ensure(
            r.diagonal_eigenvalues.iter().all(|e| e.as_deref() == Some(n_str.as_str())),
            format!("G({d},{n}): L_(u_ii) eigenvalues {:?}", r.diagonal_eigenvalues),
        )?;
        ensure(
            r.identity_eigenvalue == Some((d * n).to_string()),
            format!("G({d},{n}): identity eigenvalue {:?}", r.identity_eigenvalue),
        )?;
        notes.push(format!(
            "G({d},{n}) sign {:+} u_ii {} identity {}",
            r.global_sign.unwrap_or(0),
            n,
            r.identity_eigenvalue.unwrap_or_default()
        ));
    }
    Ok(notes.join(", "))
}

fn c7() -> Outcome {
    ensure(degree_grassmannian(2, 4) == Int::from(2), "deg G(2,4)")?;
    ensure(degree_grassmannian(2, 5) == Int::from(5), "deg G(2,5)")?;
    ensure(rank_bound_grassmannian(2, 4) == Int::from(512), "rank bound G(2,4)")?;
    ensure(period_sheaf_rank_pn(4).map_err(err)?.rank == Int::from(204), "period rank P^4")?;
    for n in 2..=12 {
        let r = period_sheaf_rank_pn(n).map_err(err)?;
        ensure(r.strict && r.weak, format!("inequality chain fails at n = {n}"))?;
    }
    Ok("2, 5, 512, 204; chain holds for n <= 12".into())
}

fn c8() -> Outcome {
    let cubic = euler_char_cy(&p(2)).map_err(err)?;
    ensure(cubic.is_zero(), format!("cubic χ = {cubic}"))?;
    let quintic = euler_char_cy(&p(4)).map_err(err)?;
    let oracle = pn_euler_oracle(4, &[5]).map_err(err)?;
    ensure(quintic == Int::from(-200) && oracle == quintic, format!("quintic χ = {quintic}, oracle {oracle}"))?;
    let g24 = euler_char_cy(&Variety::Grassmannian { d: 2, n: 4 }).map_err(err)?;
    let ci = euler_char_ci(&p(5), &[2, 4]).map_err(err)?;
    ensure(g24 == ci, format!("G(2,4) χ = {g24}, (2,4) in P^5 χ = {ci}"))?;
    let cases = [
        (p(2), vec![3]),
        (p(4), vec![5]),
        (Variety::Grassmannian { d: 2, n: 4 }, vec![4]),
        (p(5), vec![2, 4]),
    ];
    for (x, deg) in &cases {
        let chi_y = chi_y_genus_ci(x, deg).map_err(err)?;
        let chi = euler_char_ci(x, deg).map_err(err)?;
        ensure(eval_poly(&chi_y, -1) == chi, format!("{}: χ_(-1) != χ", x.descriptor()))?;
        ensure(is_palindromic(&chi_y), format!("{}: χ_y not palindromic", x.descriptor()))?;
    }
    let q = chi_y_genus_ci(&p(4), &[5]).map_err(err)?;
    ensure(q == pn_chi_y_oracle(4, &[5]).map_err(err)?, "quintic χ_y differs from oracle")?;
    Ok(format!("cubic 0, quintic -200, G(2,4) = CI(2,4) = {g24}, quintic χ_y {q:?}"))
}

fn c9() -> Outcome {
    let g24: Vec<i64> = poincare_polynomial(&Variety::Grassmannian { d: 2, n: 4 })
        .map_err(err)?
        .iter()
        .map(|c| i64::try_from(c).expect("small"))
        .collect();
    ensure(g24 == vec![1, 0, 1, 0, 2, 0, 1, 0, 1], format!("P(G(2,4)) = {g24:?}"))?;
    let mut flags = 0;
    for n in 2..=6usize {
        for mask in 1u32..(1 << (n - 1)) {
            let steps: Vec<usize> = (1..n).filter(|k| mask & (1 << (k - 1)) != 0).collect();
            let x = Variety::flag(steps.clone(), n).map_err(err)?;
            let total: Int = poincare_polynomial(&x).map_err(err)?.iter().sum();
            let mut cosets = factorial(n as u64);
            let mut prev = 0;
            for &s in steps.iter().chain(std::iter::once(&n)) {
                cosets /= factorial((s - prev) as u64);
                prev = s;
            }
            ensure(total == cosets, format!("F({steps:?};{n}): P(1) = {total}, cosets {cosets}"))?;
            flags += 1;
        }
    }
    let g = Variety::Grassmannian { d: 2, n: 4 };
    let sys = build_flag_system(&g, 1).map_err(err)?;
    ensure(Int::from(sys.n - sys.linear.len()) == weyl_dim(&[0, 4, 0], 4), "G(2,4) degree 4")?;
    let f = Variety::flag(vec![1, 2], 3).map_err(err)?;
    let sys = build_flag_system(&f, 1).map_err(err)?;
    ensure(Int::from(sys.n - sys.linear.len()) == weyl_dim(&[2, 2], 3), "F(1,2;3) degree (2,2)")?;
    Ok(format!("{flags} flag types checked; 126 - 21 = 105, {} - {} = 27", sys.n, sys.linear.len()))
}

fn small_op(n: usize) -> impl Strategy<Value = DiffOp> {
    prop::collection::vec((-3i64..4, prop::collection::vec(0i64..3, n), prop::collection::vec(0i64..3, n)), 0..4)
        .prop_map(move |ts| {
            DiffOp::from_terms(n, ts.into_iter().map(|(c, a, d)| (rat(c), ExpVec::from_dense(&a), ExpVec::from_dense(&d))))
        })
}

fn small_series() -> impl Strategy<Value = SparseSeries> {
    prop::collection::vec((-4i64..0, 0i64..3, 0i64..3, -5i64..6), 0..8).prop_map(|ts| {
        let mut s = SparseSeries::new(3, vec![0], 4);
        for (a0, a1, a2, c) in ts {
            if a1 + a2 <= 4 {
                s.insert(ExpVec::from_dense(&[a0, a1, a2]), rat(c));
            }
        }
        s
    })
}

fn artifacts() -> std::result::Result<Vec<String>, String> {
    let x = Variety::Grassmannian { d: 2, n: 4 };
    let sys = build_flag_system(&x, 1).map_err(err)?;
    let s = chart_period_series(&x, 2).map_err(err)?;
    let report = annihilation_report(&sys, &s).map_err(err)?;
    let t = toric_period_series(&ToricData::projective(3).map_err(err)?, 6).map_err(err)?;
    let closure = lie_closure_report(&sys);
    Ok(vec![
        to_canonical_string(&sys.to_json()).map_err(err)?,
        to_canonical_string(&s).map_err(err)?,
        to_canonical_string(&report).map_err(err)?,
        to_canonical_string(&t).map_err(err)?,
        to_canonical_string(&closure).map_err(err)?,
    ])
}

fn c10() -> Outcome {
    let mut systems = vec![
        ("P2 extended", build_extended_gkz(3, 3).map_err(err)?),
        ("P4 extended", build_extended_gkz(5, 5).map_err(err)?),
        ("G(2,4)", build_flag_system(&Variety::Grassmannian { d: 2, n: 4 }, 1).map_err(err)?),
        ("F(1,2;3)", build_flag_system(&Variety::flag(vec![1, 2], 3).map_err(err)?, 1).map_err(err)?),
        ("P5 (2,4)", build_ci_system(&p(5), &[vec![2], vec![4]], &[Rat::one(), Rat::one()], 1).map_err(err)?),
    ];
    let t = ToricData::projective(3).map_err(err)?;
    systems.push(("P2 GKZ", build_gkz(&t, &[rat(-1), rat(0), rat(0)], 3).map_err(err)?));
    for (name, sys) in &systems {
        let r = lie_closure_report(sys);
        ensure(r.passed, format!("{name}: Lie closure fails on {:?}", r.failures.first()))?;
    }

    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner
        .run(&(small_op(2), small_op(2), small_op(2)), |(p, q, r)| {
            prop_assert_eq!(p.compose(&q).compose(&r), p.compose(&q.compose(&r)));
            Ok(())
        })
        .map_err(|e| format!("associativity: {e}"))?;
    runner
        .run(&(small_op(3), small_op(3), small_series()), |(p, q, s)| {
            let pq = p.compose(&q).apply(&s).expect("apply");
            let nested = p.apply(&q.apply(&s).expect("apply")).expect("apply");
            let t = pq.order.min(nested.order);
            prop_assert_eq!(pq.truncate(t).coeffs, nested.truncate(t).coeffs);
            Ok(())
        })
        .map_err(|e| format!("apply/compose: {e}"))?;

    let mut outputs = vec![];
    for threads in [1, 2, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().map_err(err)?;
        outputs.push(pool.install(artifacts)?);
    }
    outputs.push(artifacts()?);
    ensure(outputs.windows(2).all(|w| w[0] == w[1]), "outputs differ across thread counts or reruns")?;
    Ok(format!("{} systems closed, 2 x 1000 operator cases, outputs stable over 1/2/8 threads", systems.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("P2 extended GKZ annihilation, T = 8", c1),
        ("P4 quintic annihilation, T = 4", c2),
        ("G(2,4) end-to-end, T = 3", c3),
        ("toric and chart periods agree, n <= 4, T = 6", c4),
        ("G(2,4) closed-form reading", c5),
        ("volume form", c6),
        ("rank numbers", c7),
        ("topology cross-checks", c8),
        ("combinatorial identities", c9),
        ("algebraic audits", c10),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let k = i + 1;
        if !only.is_empty() && !only.contains(&k) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {k:>2} PASS  {name} [{secs:.1}s]: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {k:>2} FAIL  {name} [{secs:.1}s]: {detail}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
