//! Exact annihilation checks of series by systems, Lie-closure audits of the
//! `Z_x` operators, principal-symbol checks, and holonomic rank arithmetic.

use std::collections::BTreeMap;

use num_traits::{One, Pow, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{rref, Int, Rat, RatMatrix};
use crate::json::{int_as_string, rat_to_string};
use crate::polyalg::ExpVec;
use crate::systems::{bracket, SparseMatrix, TautSystem};
use crate::varieties::{degree_grassmannian, Variety};
use crate::weyl::{DiffOp, SeriesIndex, SparseSeries};

/// Outcome for one generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneratorCheck {
    pub group: String,
    pub label: String,
    pub safe_order: i64,
    pub checked: usize,
    /// First nonzero coefficient by grading, then exponent order.
    pub failing_exponent: Option<ExpVec>,
    pub residual: Option<String>,
}

impl GeneratorCheck {
    pub fn passed(&self) -> bool {
        self.failing_exponent.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AnnihilationReport {
    pub order: i64,
    pub passed: bool,
    pub generators: Vec<GeneratorCheck>,
}

impl AnnihilationReport {
    /// One line per generator group: `group: passed/total`, plus the first
    /// failure when there is one.
    pub fn summary(&self) -> Vec<String> {
        let mut groups: Vec<(&str, usize, usize, Option<&GeneratorCheck>)> = Vec::new();
        for g in &self.generators {
            let slot = match groups.iter().position(|(name, ..)| *name == g.group) {
                Some(i) => i,
                None => {
                    groups.push((&g.group, 0, 0, None));
                    groups.len() - 1
                }
            };
            let entry = &mut groups[slot];
            entry.2 += 1;
            if g.passed() {
                entry.1 += 1;
            } else if entry.3.is_none() {
                entry.3 = Some(g);
            }
        }
        groups
            .into_iter()
            .map(|(name, ok, total, fail)| match fail {
                None => format!("{name}: {ok}/{total} pass"),
                Some(g) => format!(
                    "{name}: {ok}/{total} pass; first failure {} at {} residual {}",
                    g.label,
                    serde_json::to_string(g.failing_exponent.as_ref().expect("failure")).expect("json"),
                    g.residual.as_deref().unwrap_or("?")
                ),
            })
            .collect()
    }
}

/// Applies every generator to `s` and requires all coefficients up to the
/// generator's safe order to vanish.
pub fn annihilation_report(sys: &TautSystem, s: &SparseSeries) -> Result<AnnihilationReport> {
    if sys.n != s.n {
        return Err(Error::DimensionMismatch(format!("system has {} variables, series {}", sys.n, s.n)));
    }
    if sys.distinguished != s.distinguished {
        return Err(Error::DimensionMismatch("distinguished indices differ".into()));
    }
    let idx = SeriesIndex::new(s);
    let gens = sys.generators();
    let generators = gens
        .par_iter()
        .map(|(group, label, op)| {
            let (out, checked) = op.apply_counted(&idx)?;
            let first = out.coeffs.iter().min_by_key(|(e, _)| (out.grading(e), *e));
            Ok(GeneratorCheck {
                group: group.to_string(),
                label: label.clone(),
                safe_order: op.safe_order(s.order, &s.distinguished),
                checked,
                failing_exponent: first.map(|(e, _)| e.clone()),
                residual: first.map(|(_, c)| rat_to_string(c)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = generators.iter().all(GeneratorCheck::passed);
    Ok(AnnihilationReport { order: s.order, passed, generators })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LieClosureReport {
    pub pairs_checked: usize,
    pub passed: bool,
    /// Label pairs whose commutator is not `Z` of the bracket.
    pub failures: Vec<(String, String)>,
}

/// Checks `[Z_x, Z_y] = Z_{[x,y]}` for all pairs of `g_ops`, expanding the
/// bracket in the span of the `g_ops` matrices.
pub fn lie_closure_report(sys: &TautSystem) -> LieClosureReport {
    let ops = &sys.g_ops;
    let pairs: Vec<(usize, usize)> = (0..ops.len()).flat_map(|i| (i + 1..ops.len()).map(move |j| (i, j))).collect();
    let matrices: Vec<&SparseMatrix> = ops.iter().map(|g| &g.matrix).collect();
    let failures: Vec<(String, String)> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let lhs = ops[i].op.commutator(&ops[j].op);
            let ok = match express(&bracket(&ops[i].matrix, &ops[j].matrix), &matrices) {
                Some(coeffs) => {
                    let mut rhs = DiffOp::zero(sys.n);
                    for (c, g) in coeffs.iter().zip(ops) {
                        if !c.is_zero() {
                            rhs = rhs.add(&g.op.scale(c));
                        }
                    }
                    rhs == lhs
                }
                None => false,
            };
            (!ok).then(|| (ops[i].label.clone(), ops[j].label.clone()))
        })
        .collect();
    LieClosureReport { pairs_checked: pairs.len(), passed: failures.is_empty(), failures }
}

/// Coefficients of `target` in the span of `basis`, if it lies there.
fn express(target: &SparseMatrix, basis: &[&SparseMatrix]) -> Option<Vec<Rat>> {
    if target.is_empty() {
        return Some(vec![Rat::zero(); basis.len()]);
    }
    let mut positions: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for m in basis.iter().copied().chain(std::iter::once(target)) {
        for (i, j, _) in m {
            let k = positions.len();
            positions.entry((*i, *j)).or_insert(k);
        }
    }
    let cols = basis.len() + 1;
    let mut rows = vec![vec![Rat::zero(); cols]; positions.len()];
    for (c, m) in basis.iter().enumerate() {
        for (i, j, v) in m.iter() {
            rows[positions[&(*i, *j)]][c] = v.clone();
        }
    }
    for (i, j, v) in target {
        rows[positions[&(*i, *j)]][cols - 1] = v.clone();
    }
    let (r, pivots) = rref(&RatMatrix::from_rows(cols, rows));
    if pivots.contains(&(cols - 1)) {
        return None;
    }
    let mut x = vec![Rat::zero(); basis.len()];
    for (row, &p) in pivots.iter().enumerate() {
        x[p] = r.get(row, cols - 1).clone();
    }
    Some(x)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymbolReport {
    pub points: usize,
    pub checked: usize,
    pub passed: bool,
    pub failures: Vec<String>,
}

/// Evaluates the principal symbols of the binomial and linear generators at
/// random points `(a, ζ)` with `ζ` on the cone over the embedded variety
/// (one scale per block) and `a` arbitrary.
pub fn symbol_vanishing_report(sys: &TautSystem, points: usize, seed: u64) -> Result<SymbolReport> {
    let zetas = cone_points(sys, points, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let ops: Vec<(String, &DiffOp)> = sys
        .generators()
        .into_iter()
        .filter(|(g, ..)| *g == "binomial" || *g == "linear")
        .map(|(_, label, op)| (label, op))
        .collect();
    let mut failures = Vec::new();
    for zeta in &zetas {
        let mut point: Vec<Rat> = (0..sys.n).map(|_| Rat::from_integer(rng.gen_range(-10i64..=10).into())).collect();
        point.extend(zeta.iter().cloned());
        for (label, op) in &ops {
            if !symbol_at(op, &point).is_zero() && !failures.contains(label) {
                failures.push(label.clone());
            }
        }
    }
    Ok(SymbolReport { points: zetas.len(), checked: ops.len(), passed: failures.is_empty(), failures })
}

/// Principal symbol at `(a, ζ)` given as one vector of length `2N`.
fn symbol_at(op: &DiffOp, point: &[Rat]) -> Rat {
    let top = op.order();
    let n = op.nvars();
    let mut total = Rat::zero();
    for (c, a, d) in op.terms() {
        if d.total() != top {
            continue;
        }
        let mut v = c.clone();
        for (i, e) in a.iter() {
            v *= num_traits::pow(point[i].clone(), e as usize);
        }
        for (i, e) in d.iter() {
            v *= num_traits::pow(point[n + i].clone(), e as usize);
        }
        total += v;
    }
    total
}

fn cone_points(sys: &TautSystem, count: usize, seed: u64) -> Result<Vec<Vec<Rat>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut scale = |k: usize| -> Vec<Rat> {
        (0..k)
            .map(|_| {
                let mut v = 0i64;
                while v == 0 {
                    v = rng.gen_range(-5..=5);
                }
                Rat::from_integer(v.into())
            })
            .collect()
    };
    match &sys.variety {
        Variety::Toric(_) => {
            let basis = sys.variety.monomial_basis(&[1])?;
            let m = sys.variety.sample_points(&basis, count, seed)?;
            Ok((0..count)
                .map(|r| {
                    let l = scale(1).remove(0);
                    m.row(r).iter().map(|x| x * &l).collect()
                })
                .collect())
        }
        x => {
            let bases = x.ci_bases(&sys.multidegrees)?;
            let values = x.sample_plucker_values(count, seed)?;
            Ok(values
                .iter()
                .map(|vals| {
                    let ls = scale(bases.len());
                    bases
                        .iter()
                        .zip(&ls)
                        .flat_map(|(b, l)| (0..b.len()).map(move |i| b.evaluate(i, vals) * l))
                        .collect()
                })
                .collect())
        }
    }
}

/// `n^{d(n-d)} · deg G(d,n)`.
pub fn rank_bound_grassmannian(d: usize, n: usize) -> Int {
    assert!(0 < d && d < n, "need 0 < d < n");
    Int::from(n).pow((d * (n - d)) as u32) * degree_grassmannian(d, n)
}

/// Period-sheaf rank of the anticanonical hypersurface in `P^n` together
/// with the two comparison bounds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodRankRecord {
    pub n: usize,
    #[serde(serialize_with = "int_as_string")]
    pub rank: Int,
    /// `n^n + 1`
    #[serde(serialize_with = "int_as_string")]
    pub lower: Int,
    /// `(n+1)^n`
    #[serde(serialize_with = "int_as_string")]
    pub upper: Int,
    pub strict: bool,
    pub weak: bool,
}

/// `n/(n+1) · (n^n - (-1)^n)` with `rank < n^n + 1 <= (n+1)^n` recorded.
pub fn period_sheaf_rank_pn(n: usize) -> Result<PeriodRankRecord> {
    if n < 2 {
        return Err(Error::InvalidDescriptor(format!("period sheaf rank needs n >= 2, got {n}")));
    }
    let big = Int::from(n);
    let nn = big.clone().pow(n as u32);
    let alt = if n % 2 == 0 { Int::one() } else { -Int::one() };
    let num = &big * (&nn - alt);
    let den = Int::from(n + 1);
    if !(&num % &den).is_zero() {
        return Err(Error::Arithmetic(format!("{num} not divisible by {den}")));
    }
    let rank = num / den;
    let lower = &nn + Int::one();
    let upper = Int::from(n + 1).pow(n as u32);
    let strict = rank < lower && rank.is_positive();
    let weak = lower <= upper;
    Ok(PeriodRankRecord { n, rank, lower, upper, strict, weak })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::periods::{chart_period_series, toric_period_series};
    use crate::systems::{build_extended_gkz, build_flag_system, GOperator};
    use crate::varieties::ToricData;

    fn p2() -> (TautSystem, SparseSeries) {
        let sys = build_extended_gkz(3, 3).unwrap();
        let s = toric_period_series(&ToricData::projective(3).unwrap(), 6).unwrap();
        (sys, s)
    }

    #[test]
    fn p2_cubic_passes() {
        let (sys, s) = p2();
        let r = annihilation_report(&sys, &s).unwrap();
        assert!(r.passed, "{:?}", r.summary());
        assert!(r.generators.iter().all(|g| g.checked > 0 || g.safe_order < 0));
        assert_eq!(r.summary().len(), 3);
    }

    #[test]
    fn perturbed_beta_fails_at_leading() {
        let (mut sys, s) = p2();
        sys.euler = vec![DiffOp::euler(sys.n, 0..sys.n, rat(2))];
        let r = annihilation_report(&sys, &s).unwrap();
        assert!(!r.passed);
        let e = r.generators.iter().find(|g| g.group == "euler").unwrap();
        assert_eq!(e.failing_exponent, Some(ExpVec::from_pairs([(0, -1)])));
        assert_eq!(e.residual.as_deref(), Some("1"));
        assert!(r.generators.iter().filter(|g| g.group != "euler").all(GeneratorCheck::passed));
    }

    #[test]
    fn mismatched_counts() {
        let (sys, _) = p2();
        let s = SparseSeries::new(3, vec![0], 2);
        assert!(matches!(annihilation_report(&sys, &s), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn g24_passes_low_order() {
        let x = Variety::Grassmannian { d: 2, n: 4 };
        let sys = build_flag_system(&x, 7).unwrap();
        let s = chart_period_series(&x, 2).unwrap();
        let r = annihilation_report(&sys, &s).unwrap();
        assert!(r.passed, "{:?}", r.summary());
    }

    fn p1_sl2() -> TautSystem {
        let mut sys = build_extended_gkz(2, 2).unwrap();
        sys.binomial.clear();
        sys
    }

    #[test]
    fn lie_closure_sl2() {
        let sys = p1_sl2();
        assert_eq!(sys.g_ops.len(), 3);
        let r = lie_closure_report(&sys);
        assert!(r.passed);
        assert_eq!(r.pairs_checked, 3);
    }

    #[test]
    fn lie_closure_sign_flip() {
        let mut sys = p1_sl2();
        let g = sys.g_ops.iter_mut().find(|g| g.label == "E21").unwrap();
        g.op = g.op.scale(&rat(-1));
        let r = lie_closure_report(&sys);
        assert!(!r.passed);
        assert!(r.failures.contains(&("E12".to_string(), "E21".to_string())));
    }

    #[test]
    fn lie_closure_diagonal_only() {
        let mut sys = build_extended_gkz(3, 3).unwrap();
        sys.g_ops.retain(|g: &GOperator| g.label.starts_with('H'));
        assert!(lie_closure_report(&sys).passed);
        let t = crate::systems::build_gkz(&ToricData::projective(3).unwrap(), &[rat(-1), rat(0), rat(0)], 3).unwrap();
        assert!(lie_closure_report(&t).passed);
    }

    #[test]
    fn symbols_vanish() {
        let (sys, _) = p2();
        let r = symbol_vanishing_report(&sys, 10, 1).unwrap();
        assert!(r.passed && r.points == 10 && r.checked == sys.binomial.len());
        let x = Variety::Grassmannian { d: 2, n: 4 };
        let sys = build_flag_system(&x, 7).unwrap();
        let r = symbol_vanishing_report(&sys, 3, 2).unwrap();
        assert!(r.passed);
        assert_eq!(sys.linear.len(), 21);
        assert_eq!(r.checked, sys.binomial.len() + 21);
    }

    #[test]
    fn symbol_failure_detected() {
        let (mut sys, _) = p2();
        sys.linear.push(DiffOp::d(sys.n, 1));
        let r = symbol_vanishing_report(&sys, 3, 1).unwrap();
        assert_eq!(r.failures, vec!["L0".to_string()]);
    }

    #[test]
    fn rank_bounds() {
        assert_eq!(rank_bound_grassmannian(2, 4), Int::from(512));
        assert_eq!(rank_bound_grassmannian(1, 2), Int::from(2));
        for n in 2..8usize {
            assert_eq!(rank_bound_grassmannian(1, n), Int::from(n).pow((n - 1) as u32));
            assert_eq!(rank_bound_grassmannian(1, n), rank_bound_grassmannian(n - 1, n));
        }
        assert_eq!(rank_bound_grassmannian(2, 5), rank_bound_grassmannian(3, 5));
    }

    #[test]
    fn period_ranks() {
        assert_eq!(period_sheaf_rank_pn(2).unwrap().rank, Int::from(2));
        assert_eq!(period_sheaf_rank_pn(4).unwrap().rank, Int::from(204));
        for n in 2..=12 {
            let r = period_sheaf_rank_pn(n).unwrap();
            assert!(r.strict && r.weak);
        }
        for n in 2..8 {
            assert!(period_sheaf_rank_pn(n).unwrap().rank < rank_bound_grassmannian(1, n + 1));
        }
        assert!(period_sheaf_rank_pn(1).is_err());
    }
}
