//! Normal-ordered Weyl-algebra operators in the variables `a_0..a_{N-1}` and
//! truncated series they act on.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{binomial, falling_factorial, Int, Rat};
use crate::json::{parse_rat, rat_to_string, NumDen};
use crate::polyalg::{ExpVec, LaurentPoly};

/// `Σ c · a^α ∂^δ` with all `a`'s to the left. Terms are keyed by `(α, δ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOp {
    n: usize,
    terms: BTreeMap<(ExpVec, ExpVec), Rat>,
}

impl DiffOp {
    pub fn zero(n: usize) -> Self {
        DiffOp { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        let mut op = DiffOp::zero(n);
        op.add_term(c, ExpVec::zero(), ExpVec::zero());
        op
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Rat::one())
    }

    /// Multiplication by `a_i`.
    pub fn a(n: usize, i: usize) -> Self {
        let mut op = DiffOp::zero(n);
        op.add_term(Rat::one(), ExpVec::unit(i), ExpVec::zero());
        op
    }

    /// `∂/∂a_i`.
    pub fn d(n: usize, i: usize) -> Self {
        let mut op = DiffOp::zero(n);
        op.add_term(Rat::one(), ExpVec::zero(), ExpVec::unit(i));
        op
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (Rat, ExpVec, ExpVec)>) -> Self {
        let mut op = DiffOp::zero(n);
        for (c, a, d) in terms {
            op.add_term(c, a, d);
        }
        op
    }

    /// `∂^u - ∂^v`.
    pub fn binomial(n: usize, u: ExpVec, v: ExpVec) -> Self {
        DiffOp::from_terms(n, [(Rat::one(), ExpVec::zero(), u), (-Rat::one(), ExpVec::zero(), v)])
    }

    /// `Σ a_i ∂_i + β` over the listed indices.
    pub fn euler(n: usize, indices: impl IntoIterator<Item = usize>, beta: Rat) -> Self {
        let mut op = DiffOp::constant(n, beta);
        for i in indices {
            op.add_term(Rat::one(), ExpVec::unit(i), ExpVec::unit(i));
        }
        op
    }

    pub fn add_term(&mut self, c: Rat, a: ExpVec, d: ExpVec) {
        assert!(a.iter().all(|(i, e)| i < self.n && e > 0), "a-exponents must be nonnegative and in range");
        assert!(d.iter().all(|(i, e)| i < self.n && e > 0), "d-exponents must be nonnegative and in range");
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry((a, d)) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    /// Terms as `(c, α, δ)`.
    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &ExpVec, &ExpVec)> {
        self.terms.iter().map(|((a, d), c)| (c, a, d))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, a: &ExpVec, d: &ExpVec) -> Rat {
        self.terms.get(&(a.clone(), d.clone())).cloned().unwrap_or_else(Rat::zero)
    }

    /// Highest total degree in `∂`.
    pub fn order(&self) -> i64 {
        self.terms.keys().map(|(_, d)| d.total()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &DiffOp) -> DiffOp {
        assert_eq!(self.n, other.n, "variable count mismatch");
        let mut out = self.clone();
        for ((a, d), c) in &other.terms {
            out.add_term(c.clone(), a.clone(), d.clone());
        }
        out
    }

    pub fn sub(&self, other: &DiffOp) -> DiffOp {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> DiffOp {
        if c.is_zero() {
            return DiffOp::zero(self.n);
        }
        DiffOp { n: self.n, terms: self.terms.iter().map(|(k, x)| (k.clone(), x * c)).collect() }
    }

    /// Normal-ordered product `self ∘ other`, using
    /// `∂^β a^γ = Σ_k Π_i C(β_i,k_i) γ_i!/(γ_i-k_i)! a^{γ-k} ∂^{β-k}`.
    pub fn compose(&self, other: &DiffOp) -> DiffOp {
        assert_eq!(self.n, other.n, "variable count mismatch");
        let mut out = DiffOp::zero(self.n);
        for ((a1, d1), c1) in &self.terms {
            for ((a2, d2), c2) in &other.terms {
                // Indices where both ∂ (left) and a (right) occur.
                let shared: Vec<(usize, i64, i64)> = d1
                    .iter()
                    .filter_map(|(i, b)| {
                        let g = a2.get(i);
                        (g > 0).then_some((i, b, g))
                    })
                    .collect();
                let bounds: Vec<i64> = shared.iter().map(|&(_, b, g)| b.min(g)).collect();
                for ks in box_points(&bounds) {
                    let mut coeff = c1 * c2;
                    for (&(_, b, g), &k) in shared.iter().zip(&ks) {
                        coeff *= Rat::from_integer(binomial(b, k) * falling_factorial(g, k as u64));
                    }
                    let kvec = ExpVec::from_pairs(shared.iter().zip(&ks).map(|(&(i, _, _), &k)| (i, k)));
                    out.add_term(coeff, a1.add(&a2.sub(&kvec)), d1.sub(&kvec).add(d2));
                }
            }
        }
        out
    }

    /// `[self, other] = self∘other - other∘self`.
    pub fn commutator(&self, other: &DiffOp) -> DiffOp {
        self.compose(other).sub(&other.compose(self))
    }

    /// Grading up to which `apply` on a series of order `t` is exact, where the
    /// grading ignores the `distinguished` indices.
    pub fn safe_order(&self, t: i64, distinguished: &[usize]) -> i64 {
        let shift = self
            .terms
            .keys()
            .map(|(a, d)| d.grading(distinguished) - a.grading(distinguished))
            .max()
            .unwrap_or(0);
        t - shift
    }

    /// Top-order part with `∂_i` replaced by `ζ_i`, as a polynomial in
    /// `(a_0..a_{N-1}, ζ_0..ζ_{N-1})`.
    pub fn principal_symbol(&self) -> LaurentPoly {
        let top = self.order();
        let mut p = LaurentPoly::zero(2 * self.n);
        for ((a, d), c) in &self.terms {
            if d.total() != top {
                continue;
            }
            let mut e = vec![0i64; 2 * self.n];
            for (i, x) in a.iter() {
                e[i] = x;
            }
            for (i, x) in d.iter() {
                e[self.n + i] = x;
            }
            p.add_term(e, c.clone());
        }
        p
    }

    /// Apply to a truncated series; see [`SeriesIndex`] for repeated use.
    pub fn apply(&self, s: &SparseSeries) -> Result<SparseSeries> {
        self.apply_indexed(&SeriesIndex::new(s))
    }

    /// Term-by-term action `∂^δ a^m = m(m-1)…(m-δ+1) a^{m-δ}`, which also holds
    /// for negative exponents at distinguished indices. The result is
    /// truncated at [`DiffOp::safe_order`].
    pub fn apply_indexed(&self, idx: &SeriesIndex<'_>) -> Result<SparseSeries> {
        self.apply_counted(idx).map(|(s, _)| s)
    }

    /// As [`DiffOp::apply_indexed`], also returning the number of exponents
    /// within the safe order that received a contribution.
    pub fn apply_counted(&self, idx: &SeriesIndex<'_>) -> Result<(SparseSeries, usize)> {
        let s = idx.series;
        if s.n != self.n {
            return Err(Error::DimensionMismatch(format!("operator has {} variables, series {}", self.n, s.n)));
        }
        let dist = &s.distinguished;
        let order = self.safe_order(s.order, dist);
        let mut out: BTreeMap<ExpVec, Rat> = BTreeMap::new();
        for ((a, d), c) in &self.terms {
            let rare = d
                .iter()
                .filter(|(i, _)| !dist.contains(i))
                .map(|(i, _)| i)
                .min_by_key(|i| idx.by_var.get(i).map_or(0, Vec::len));
            let candidates: Box<dyn Iterator<Item = &(ExpVec, Rat)>> = match rare {
                Some(i) => match idx.by_var.get(&i) {
                    Some(v) => Box::new(v.iter().map(|&k| &idx.entries[k])),
                    None => Box::new(std::iter::empty()),
                },
                None => Box::new(idx.entries.iter()),
            };
            for (m, x) in candidates {
                let mut f = Int::one();
                for (i, k) in d.iter() {
                    f *= falling_factorial(m.get(i), k as u64);
                    if f.is_zero() {
                        break;
                    }
                }
                if f.is_zero() {
                    continue;
                }
                let e = m.sub(d).add(a);
                if e.grading(dist) > order {
                    continue;
                }
                if let Some((i, _)) = e.iter().find(|&(i, v)| v < 0 && !dist.contains(&i)) {
                    return Err(Error::NegativeExponent(i));
                }
                *out.entry(e).or_insert_with(Rat::zero) += c * x * Rat::from_integer(f);
            }
        }
        let touched = out.len();
        out.retain(|_, v| !v.is_zero());
        Ok((SparseSeries { n: s.n, distinguished: dist.clone(), order, coeffs: out }, touched))
    }

    pub fn to_json(&self) -> DiffOpJson {
        DiffOpJson {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|((a, d), c)| OpTermJson { c: rat_to_string(c), a: a.clone(), d: d.clone() })
                .collect(),
        }
    }

    pub fn from_json(j: &DiffOpJson) -> Result<Self> {
        let mut op = DiffOp::zero(j.n);
        for t in &j.terms {
            let in_range = |e: &ExpVec| e.iter().all(|(i, x)| i < j.n && x > 0);
            if !in_range(&t.a) || !in_range(&t.d) {
                return Err(Error::DimensionMismatch("operator exponent out of range".into()));
            }
            op.add_term(parse_rat(&t.c)?, t.a.clone(), t.d.clone());
        }
        Ok(op)
    }
}

/// All integer vectors `k` with `0 <= k_i <= bounds_i`.
fn box_points(bounds: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::with_capacity(bounds.len())];
    for &b in bounds {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=b).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpTermJson {
    pub c: String,
    pub a: ExpVec,
    pub d: ExpVec,
}

/// `{"N": n, "terms": [{"c": "p/q", "a": [[i, e], ..], "d": [[i, e], ..]}]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffOpJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub terms: Vec<OpTermJson>,
}

impl Serialize for DiffOp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiffOp {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        DiffOp::from_json(&DiffOpJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Truncated series `Σ c_e a^e`. Exponents are nonnegative away from the
/// distinguished indices and the grading (sum of the other entries) is at
/// most `order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseSeries {
    pub n: usize,
    pub distinguished: Vec<usize>,
    pub order: i64,
    pub coeffs: BTreeMap<ExpVec, Rat>,
}

impl SparseSeries {
    pub fn new(n: usize, distinguished: Vec<usize>, order: i64) -> Self {
        SparseSeries { n, distinguished, order, coeffs: BTreeMap::new() }
    }

    pub fn insert(&mut self, e: ExpVec, c: Rat) {
        if !c.is_zero() {
            self.coeffs.insert(e, c);
        }
    }

    pub fn get(&self, e: &ExpVec) -> Rat {
        self.coeffs.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn grading(&self, e: &ExpVec) -> i64 {
        e.grading(&self.distinguished)
    }

    /// Drop everything above grading `order`.
    pub fn truncate(&self, order: i64) -> SparseSeries {
        SparseSeries {
            n: self.n,
            distinguished: self.distinguished.clone(),
            order: order.min(self.order),
            coeffs: self.coeffs.iter().filter(|(e, _)| self.grading(e) <= order).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            n: self.n,
            v0: self.distinguished.first().copied().unwrap_or(0),
            distinguished: self.distinguished.clone(),
            t: self.order,
            coeffs: self
                .coeffs
                .iter()
                .map(|(e, c)| {
                    let nd = NumDen::from_rat(c);
                    SeriesTermJson { exp: e.clone(), num: nd.num, den: nd.den }
                })
                .collect(),
        }
    }

    pub fn from_json(j: &SeriesJson) -> Result<Self> {
        let mut s = SparseSeries::new(j.n, j.distinguished.clone(), j.t);
        if s.distinguished.is_empty() {
            s.distinguished = vec![j.v0];
        }
        for t in &j.coeffs {
            if t.exp.max_index().is_some_and(|i| i >= j.n) {
                return Err(Error::DimensionMismatch("series exponent out of range".into()));
            }
            s.insert(t.exp.clone(), NumDen { num: t.num.clone(), den: t.den.clone() }.to_rat()?);
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesTermJson {
    pub exp: ExpVec,
    pub num: String,
    pub den: String,
}

/// `{"N", "v0", "distinguished", "T", "coeffs": [{"exp", "num", "den"}]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub v0: usize,
    #[serde(default)]
    pub distinguished: Vec<usize>,
    #[serde(rename = "T")]
    pub t: i64,
    pub coeffs: Vec<SeriesTermJson>,
}

impl Serialize for SparseSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SparseSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        SparseSeries::from_json(&SeriesJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Series entries grouped by the variables they contain with positive
/// exponent, so an operator term with `∂_i` only visits entries divisible by
/// `a_i`.
pub struct SeriesIndex<'a> {
    series: &'a SparseSeries,
    entries: Vec<(ExpVec, Rat)>,
    by_var: HashMap<usize, Vec<usize>>,
}

impl<'a> SeriesIndex<'a> {
    pub fn new(series: &'a SparseSeries) -> Self {
        let entries: Vec<(ExpVec, Rat)> = series.coeffs.iter().map(|(e, c)| (e.clone(), c.clone())).collect();
        let mut by_var: HashMap<usize, Vec<usize>> = HashMap::new();
        for (k, (e, _)) in entries.iter().enumerate() {
            for (i, x) in e.iter() {
                if x > 0 {
                    by_var.entry(i).or_default().push(k);
                }
            }
        }
        SeriesIndex { series, entries, by_var }
    }

    pub fn series(&self) -> &SparseSeries {
        self.series
    }
}
