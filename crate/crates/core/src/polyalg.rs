//! Sparse multivariate Laurent polynomials with rational coefficients.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Int, Rat};
use crate::json::NumDen;

/// Sparse integer exponent vector: `(index, exponent)` pairs sorted by index,
/// never storing a zero exponent.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpVec(Vec<(u32, i64)>);

impl ExpVec {
    pub fn zero() -> Self {
        ExpVec(Vec::new())
    }

    pub fn unit(i: usize) -> Self {
        ExpVec(vec![(i as u32, 1)])
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut m: BTreeMap<u32, i64> = BTreeMap::new();
        for (i, e) in pairs {
            *m.entry(i as u32).or_insert(0) += e;
        }
        ExpVec(m.into_iter().filter(|(_, e)| *e != 0).collect())
    }

    pub fn from_dense(v: &[i64]) -> Self {
        ExpVec(v.iter().enumerate().filter(|(_, e)| **e != 0).map(|(i, e)| (i as u32, *e)).collect())
    }

    pub fn to_dense(&self, n: usize) -> Vec<i64> {
        let mut v = vec![0; n];
        for &(i, e) in &self.0 {
            v[i as usize] = e;
        }
        v
    }

    pub fn get(&self, i: usize) -> i64 {
        match self.0.binary_search_by_key(&(i as u32), |p| p.0) {
            Ok(k) => self.0[k].1,
            Err(_) => 0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, i64)> + '_ {
        self.0.iter().map(|&(i, e)| (i as usize, e))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().map(|p| p.0 as usize)
    }

    pub fn total(&self) -> i64 {
        self.0.iter().map(|p| p.1).sum()
    }

    /// Sum of the entries whose index is not listed in `excluded`.
    pub fn grading(&self, excluded: &[usize]) -> i64 {
        self.iter().filter(|(i, _)| !excluded.contains(i)).map(|(_, e)| e).sum()
    }

    pub fn add(&self, other: &ExpVec) -> ExpVec {
        self.combine(other, 1)
    }

    pub fn sub(&self, other: &ExpVec) -> ExpVec {
        self.combine(other, -1)
    }

    fn combine(&self, other: &ExpVec, sign: i64) -> ExpVec {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let a = self.0.get(i);
            let b = other.0.get(j);
            match (a, b) {
                (Some(&(ia, ea)), Some(&(ib, eb))) if ia == ib => {
                    let e = ea + sign * eb;
                    if e != 0 {
                        out.push((ia, e));
                    }
                    i += 1;
                    j += 1;
                }
                (Some(&(ia, ea)), Some(&(ib, _))) if ia < ib => {
                    out.push((ia, ea));
                    i += 1;
                }
                (Some(&(ia, ea)), None) => {
                    out.push((ia, ea));
                    i += 1;
                }
                (_, Some(&(ib, eb))) => {
                    out.push((ib, sign * eb));
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        ExpVec(out)
    }
}

impl Serialize for ExpVec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExpVec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<(u32, i64)> = Vec::deserialize(d)?;
        Ok(ExpVec::from_pairs(pairs.into_iter().map(|(i, e)| (i as usize, e))))
    }
}

/// Laurent polynomial in `nvars` variables. Exponent vectors are dense and the
/// term map is ordered, so iteration and serialization are deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaurentPoly {
    nvars: usize,
    terms: BTreeMap<Vec<i64>, Rat>,
}

impl LaurentPoly {
    pub fn zero(nvars: usize) -> Self {
        LaurentPoly { nvars, terms: BTreeMap::new() }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rat::one())
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        Self::monomial(nvars, vec![0; nvars], c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::monomial(nvars, e, Rat::one())
    }

    pub fn monomial(nvars: usize, exp: Vec<i64>, c: Rat) -> Self {
        assert_eq!(exp.len(), nvars, "exponent length must equal variable count");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exp, c);
        }
        LaurentPoly { nvars, terms }
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<i64>, Rat)>) -> Self {
        let mut p = LaurentPoly::zero(nvars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &Rat)> {
        self.terms.iter()
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

    pub fn add_term(&mut self, exp: Vec<i64>, c: Rat) {
        assert_eq!(exp.len(), self.nvars, "exponent length must equal variable count");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exp) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn coefficient(&self, exp: &[i64]) -> Rat {
        self.terms.get(exp).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coefficient(&vec![0; self.nvars])
    }

    /// `Some((c, exp))` when the polynomial is a single nonzero term.
    pub fn as_monomial(&self) -> Option<(&Rat, &Vec<i64>)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(e, c)| (c, e))
        } else {
            None
        }
    }

    pub fn scale(&self, c: &Rat) -> LaurentPoly {
        if c.is_zero() {
            return LaurentPoly::zero(self.nvars);
        }
        LaurentPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, x)| (e.clone(), x * c)).collect() }
    }

    pub fn multiply(&self, other: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = LaurentPoly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<i64> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// `k`-th power by repeated squaring.
    pub fn power(&self, k: u32) -> LaurentPoly {
        let mut result = LaurentPoly::one(self.nvars);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.multiply(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.multiply(&base);
            }
        }
        result
    }

    pub fn partial_derivative(&self, i: usize) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[i] != 0 {
                let mut f = e.clone();
                f[i] -= 1;
                out.add_term(f, c * Rat::from_integer(Int::from(e[i])));
            }
        }
        out
    }

    /// Value at a point with nonzero coordinates wherever a negative exponent
    /// occurs.
    pub fn evaluate(&self, point: &[Rat]) -> Rat {
        assert_eq!(point.len(), self.nvars);
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter().zip(point).fold(c.clone(), |acc, (&k, x)| {
                    if k >= 0 {
                        acc * num_traits::pow(x.clone(), k as usize)
                    } else {
                        acc / num_traits::pow(x.clone(), (-k) as usize)
                    }
                })
            })
            .sum()
    }

    /// Total degree of the highest-degree term, `None` for zero.
    pub fn max_total_degree(&self) -> Option<i64> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn to_json(&self) -> LaurentPolyJson {
        LaurentPolyJson {
            vars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let nd = NumDen::from_rat(c);
                    TermJson { exp: e.clone(), num: nd.num, den: nd.den }
                })
                .collect(),
        }
    }

    pub fn from_json(j: &LaurentPolyJson) -> Result<Self> {
        let mut p = LaurentPoly::zero(j.vars);
        for t in &j.terms {
            if t.exp.len() != j.vars {
                return Err(Error::DimensionMismatch("term exponent length".into()));
            }
            p.add_term(t.exp.clone(), NumDen { num: t.num.clone(), den: t.den.clone() }.to_rat()?);
        }
        Ok(p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub exp: Vec<i64>,
    pub num: String,
    pub den: String,
}

/// `{"vars": n, "terms": [{"exp": [..], "num": "..", "den": ".."}]}`
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaurentPolyJson {
    pub vars: usize,
    pub terms: Vec<TermJson>,
}

impl Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = LaurentPolyJson::deserialize(d)?;
        LaurentPoly::from_json(&j).map_err(serde::de::Error::custom)
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, other: &LaurentPoly) -> LaurentPoly {
        assert_eq!(self.nvars, other.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, other: &LaurentPoly) -> LaurentPoly {
        self + &(-other)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { nvars: self.nvars, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, other: &LaurentPoly) -> LaurentPoly {
        self.multiply(other)
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{}", crate::json::rat_to_string(c))?;
            for (i, &x) in e.iter().enumerate() {
                if x != 0 {
                    write!(f, "*z{}^{}", i + 1, x)?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use proptest::prelude::*;

    fn z(i: usize) -> LaurentPoly {
        LaurentPoly::var(4, i)
    }

    fn p34() -> LaurentPoly {
        &(&z(0) * &z(3)) - &(&z(1) * &z(2))
    }

    #[test]
    fn difference_of_squares() {
        let plus = &(&z(0) * &z(3)) + &(&z(1) * &z(2));
        let prod = p34().multiply(&plus);
        let expect = LaurentPoly::from_terms(4, [(vec![2, 0, 0, 2], rat(1)), (vec![0, 2, 2, 0], rat(-1))]);
        assert_eq!(prod, expect);
        assert_eq!(p34().multiply(&LaurentPoly::one(4)), p34());
    }

    #[test]
    fn square_by_hand() {
        let expect = LaurentPoly::from_terms(
            4,
            [(vec![2, 0, 0, 2], rat(1)), (vec![1, 1, 1, 1], rat(-2)), (vec![0, 2, 2, 0], rat(1))],
        );
        assert_eq!(p34().power(2), expect);
    }

    #[test]
    fn powers_and_constant_terms() {
        let t = LaurentPoly::from_terms(1, [(vec![1], rat(1)), (vec![-1], rat(1))]);
        assert_eq!(t.power(0), LaurentPoly::one(1));
        assert_eq!(t.power(1), t);
        let sq = t.power(2);
        assert_eq!(sq, LaurentPoly::from_terms(1, [(vec![2], rat(1)), (vec![0], rat(2)), (vec![-2], rat(1))]));
        assert_eq!(sq.constant_term(), rat(2));

        let inv = LaurentPoly::monomial(4, vec![-1, -1, -1, -1], rat(1));
        assert_eq!(p34().power(2).multiply(&inv).constant_term(), rat(-2));
        assert_eq!(p34().constant_term(), rat(0));
    }

    #[test]
    fn derivative_and_evaluation() {
        let p = p34().power(2);
        let d = p.partial_derivative(0);
        let pt = [rat(2), rat(3), rat(5), rat(7)];
        // d/dz1 (z1 z4 - z2 z3)^2 = 2 z4 (z1 z4 - z2 z3)
        assert_eq!(d.evaluate(&pt), rat(2 * 7 * (14 - 15)));
    }

    fn small_poly() -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((prop::collection::vec(-2i64..3, 2), -3i64..4), 0..5)
            .prop_map(|ts| LaurentPoly::from_terms(2, ts.into_iter().map(|(e, c)| (e, rat(c)))))
    }

    proptest! {
        #[test]
        fn multiply_commutes_and_associates(a in small_poly(), b in small_poly(), c in small_poly()) {
            prop_assert_eq!(a.multiply(&b), b.multiply(&a));
            prop_assert_eq!(a.multiply(&b).multiply(&c), a.multiply(&b.multiply(&c)));
        }

        #[test]
        fn constant_term_convolution(
            pos in prop::collection::vec((1i64..3, 0i64..3, -3i64..4), 0..4),
            neg in prop::collection::vec((1i64..3, 0i64..3, -3i64..4), 0..4),
        ) {
            // p has positive-degree terms only, q negative-degree terms only.
            let p = LaurentPoly::from_terms(2, pos.iter().map(|&(a, b, c)| (vec![a, b], rat(c))));
            let q = LaurentPoly::from_terms(2, neg.iter().map(|&(a, b, c)| (vec![-a, -b], rat(c))));
            let mut brute = rat(0);
            for (e, c) in p.terms() {
                let m: Vec<i64> = e.iter().map(|x| -x).collect();
                brute += c * q.coefficient(&m);
            }
            prop_assert_eq!(p.multiply(&q).constant_term(), brute);
        }

        #[test]
        fn json_round_trip(a in small_poly()) {
            let s = serde_json::to_string(&a).unwrap();
            let b: LaurentPoly = serde_json::from_str(&s).unwrap();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn expvec_arithmetic() {
        let a = ExpVec::from_dense(&[1, 0, -2]);
        let b = ExpVec::from_dense(&[-1, 3, 0]);
        assert_eq!(a.add(&b), ExpVec::from_dense(&[0, 3, -2]));
        assert_eq!(a.sub(&a), ExpVec::zero());
        assert_eq!(a.get(2), -2);
        assert_eq!(a.grading(&[0]), -2);
    }
}
