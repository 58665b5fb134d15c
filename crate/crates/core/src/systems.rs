//! Generators of tautological systems: binomial (Veronese and box)
//! operators, linear operators from the ideal, `sl_n` operators `Z_x` and
//! Euler operators.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{rat, rational_nullspace, rref, same_row_space, IntMatrix, Rat, RatMatrix};
use crate::json::{parse_rat, rat_to_string};
use crate::polyalg::ExpVec;
use crate::varieties::{exponent_vectors, plucker_indices, plucker_relations, MonomialBasis, ToricData, Variety};
use crate::weyl::DiffOp;

/// Sparse `n × n` matrix as `(row, col, value)` triples, 0-based, sorted.
pub type SparseMatrix = Vec<(usize, usize, Rat)>;

/// A first-order operator attached to a Lie-algebra element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GOperator {
    pub label: String,
    pub matrix: SparseMatrix,
    pub op: DiffOp,
}

/// Generators of a tautological system in the variables `a_0..a_{N-1}`,
/// split into blocks (one per line-bundle factor) starting at
/// `distinguished`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TautSystem {
    pub variety: Variety,
    pub multidegrees: Vec<Vec<usize>>,
    pub betas: Vec<Rat>,
    pub n: usize,
    pub distinguished: Vec<usize>,
    pub variables: Vec<String>,
    pub binomial: Vec<DiffOp>,
    pub linear: Vec<DiffOp>,
    pub g_ops: Vec<GOperator>,
    pub euler: Vec<DiffOp>,
}

impl TautSystem {
    /// `(group, label, operator)` for every generator, in a fixed order.
    pub fn generators(&self) -> Vec<(&'static str, String, &DiffOp)> {
        let mut out = Vec::new();
        out.extend(self.binomial.iter().enumerate().map(|(i, op)| ("binomial", format!("B{i}"), op)));
        out.extend(self.linear.iter().enumerate().map(|(i, op)| ("linear", format!("L{i}"), op)));
        out.extend(self.g_ops.iter().map(|g| ("g_ops", g.label.clone(), &g.op)));
        out.extend(self.euler.iter().enumerate().map(|(i, op)| ("euler", format!("E{i}"), op)));
        out
    }

    pub fn generator_count(&self) -> usize {
        self.binomial.len() + self.linear.len() + self.g_ops.len() + self.euler.len()
    }

    /// Block index of variable `i`.
    pub fn block_of(&self, i: usize) -> usize {
        self.distinguished.iter().rposition(|&s| s <= i).unwrap_or(0)
    }

    pub fn to_json(&self) -> SystemJson {
        SystemJson {
            variety: VarietyJson::from_variety(&self.variety),
            multidegrees: self.multidegrees.clone(),
            betas: self.betas.iter().map(rat_to_string).collect(),
            n: self.n,
            distinguished: self.distinguished.clone(),
            variables: self.variables.clone(),
            binomial: self.binomial.clone(),
            linear: self.linear.clone(),
            g_ops: self
                .g_ops
                .iter()
                .map(|g| GOpJson {
                    label: g.label.clone(),
                    matrix: g.matrix.iter().map(|(i, j, c)| (*i, *j, rat_to_string(c))).collect(),
                    op: g.op.clone(),
                })
                .collect(),
            euler: self.euler.clone(),
        }
    }

    pub fn from_json(j: &SystemJson) -> Result<Self> {
        let sys = TautSystem {
            variety: j.variety.to_variety()?,
            multidegrees: j.multidegrees.clone(),
            betas: j.betas.iter().map(|s| parse_rat(s)).collect::<Result<_>>()?,
            n: j.n,
            distinguished: j.distinguished.clone(),
            variables: j.variables.clone(),
            binomial: j.binomial.clone(),
            linear: j.linear.clone(),
            g_ops: j
                .g_ops
                .iter()
                .map(|g| {
                    Ok(GOperator {
                        label: g.label.clone(),
                        matrix: g
                            .matrix
                            .iter()
                            .map(|(a, b, c)| Ok((*a, *b, parse_rat(c)?)))
                            .collect::<Result<_>>()?,
                        op: g.op.clone(),
                    })
                })
                .collect::<Result<_>>()?,
            euler: j.euler.clone(),
        };
        let all = sys.binomial.iter().chain(&sys.linear).chain(sys.g_ops.iter().map(|g| &g.op)).chain(&sys.euler);
        for op in all {
            if op.nvars() != sys.n {
                return Err(Error::DimensionMismatch("generator variable count differs from N".into()));
            }
        }
        Ok(sys)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarietyJson {
    pub descriptor: String,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<i64>>>,
}

impl VarietyJson {
    pub fn from_variety(v: &Variety) -> Self {
        let a = match v {
            Variety::Toric(t) => Some(
                (0..t.a.rows())
                    .map(|i| t.a.row(i).iter().map(|x| i64::try_from(x).expect("small")).collect())
                    .collect(),
            ),
            _ => None,
        };
        VarietyJson { descriptor: v.descriptor(), a }
    }

    pub fn to_variety(&self) -> Result<Variety> {
        match &self.a {
            Some(a) => Ok(Variety::Toric(ToricData::new(IntMatrix::from_rows(a), 0)?)),
            None => Variety::parse(&self.descriptor),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GOpJson {
    pub label: String,
    pub matrix: Vec<(usize, usize, String)>,
    pub op: DiffOp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemJson {
    pub variety: VarietyJson,
    pub multidegrees: Vec<Vec<usize>>,
    pub betas: Vec<String>,
    #[serde(rename = "N")]
    pub n: usize,
    pub distinguished: Vec<usize>,
    pub variables: Vec<String>,
    pub binomial: Vec<DiffOp>,
    pub linear: Vec<DiffOp>,
    pub g_ops: Vec<GOpJson>,
    pub euler: Vec<DiffOp>,
}

impl Serialize for TautSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TautSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        TautSystem::from_json(&SystemJson::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Basis of `sl_n`: `E_ab` for `a != b`, then `H_a = E_aa - E_{a+1,a+1}`.
/// Labels are 1-based (`E12`, `H1`).
pub fn sl_basis(n: usize) -> Vec<(String, SparseMatrix)> {
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b {
                out.push((format!("E{}{}", a + 1, b + 1), vec![(a, b, Rat::one())]));
            }
        }
    }
    for a in 0..n - 1 {
        out.push((format!("H{}", a + 1), vec![(a, a, Rat::one()), (a + 1, a + 1, -Rat::one())]));
    }
    out
}

/// `[x, y]` of sparse matrices.
pub fn bracket(x: &SparseMatrix, y: &SparseMatrix) -> SparseMatrix {
    let mut m: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    for (i, k, a) in x {
        for (k2, j, b) in y {
            if k == k2 {
                *m.entry((*i, *j)).or_insert_with(Rat::zero) += a * b;
            }
        }
    }
    for (i, k, a) in y {
        for (k2, j, b) in x {
            if k == k2 {
                *m.entry((*i, *j)).or_insert_with(Rat::zero) -= a * b;
            }
        }
    }
    m.into_iter().filter(|(_, c)| !c.is_zero()).map(|((i, j), c)| (i, j, c)).collect()
}

/// Action of `E_ab` (0-based) on one Plücker coordinate: the index with `b`
/// replaced by `a` and the sign `(-1)^{#I strictly between a and b}`.
fn elementary_on_index(a: usize, b: usize, idx: &[usize]) -> Option<(Vec<usize>, i64)> {
    let (a1, b1) = (a + 1, b + 1);
    if !idx.contains(&b1) {
        return None;
    }
    if a == b {
        return Some((idx.to_vec(), 1));
    }
    if idx.contains(&a1) {
        return None;
    }
    let (lo, hi) = (a1.min(b1), a1.max(b1));
    let between = idx.iter().filter(|&&i| lo < i && i < hi).count();
    let mut out: Vec<usize> = idx.iter().map(|&i| if i == b1 { a1 } else { i }).collect();
    out.sort_unstable();
    Some((out, if between % 2 == 0 { 1 } else { -1 }))
}

/// Matrix of a `gl_n` element acting by derivations on the monomials of
/// `basis`: entry `(u, v)` is the coefficient of monomial `u` in `x · p^v`.
pub fn rho(x: &SparseMatrix, basis: &MonomialBasis) -> SparseMatrix {
    let pos: HashMap<&ExpVec, usize> = basis.monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let coord_pos: HashMap<(usize, Vec<usize>), usize> =
        basis.coords.iter().enumerate().map(|(k, (c, idx))| ((*c, idx.0.clone()), k)).collect();
    let mut m: BTreeMap<(usize, usize), Rat> = BTreeMap::new();
    for (v, mono) in basis.monomials.iter().enumerate() {
        for (k, e) in mono.iter() {
            let (comp, idx) = &basis.coords[k];
            for (a, b, c) in x {
                let Some((image, sign)) = elementary_on_index(*a, *b, &idx.0) else { continue };
                let k2 = coord_pos[&(*comp, image)];
                let target = mono.sub(&ExpVec::unit(k)).add(&ExpVec::unit(k2));
                let u = pos[&target];
                *m.entry((u, v)).or_insert_with(Rat::zero) += c * rat(e * sign);
            }
        }
    }
    m.into_iter().filter(|(_, c)| !c.is_zero()).map(|((i, j), c)| (i, j, c)).collect()
}

/// `Z_x = -Σ_{u,v} ρ(x)_{uv} a_v ∂_u`, summed over blocks with `offsets`.
/// With this sign `x ↦ Z_x` is a Lie algebra homomorphism.
pub fn g_operator(x: &SparseMatrix, bases: &[MonomialBasis], offsets: &[usize], n: usize) -> DiffOp {
    let mut op = DiffOp::zero(n);
    for (basis, &off) in bases.iter().zip(offsets) {
        for (u, v, c) in rho(x, basis) {
            op.add_term(-c, ExpVec::unit(off + v), ExpVec::unit(off + u));
        }
    }
    op
}

fn g_operators(ambient: usize, bases: &[MonomialBasis], offsets: &[usize], n: usize) -> Vec<GOperator> {
    sl_basis(ambient)
        .into_par_iter()
        .map(|(label, matrix)| {
            let op = g_operator(&matrix, bases, offsets, n);
            GOperator { label, matrix, op }
        })
        .collect()
}

/// `∂_u∂_v - ∂_w∂_t` for every coincidence `u + v = w + t` within and across
/// blocks (the block pair of both sides must agree).
pub fn quadratic_binomials(bases: &[MonomialBasis], offsets: &[usize], n: usize) -> Vec<DiffOp> {
    let mut classes: BTreeMap<(usize, usize, ExpVec), Vec<(usize, usize)>> = BTreeMap::new();
    for (bi, b) in bases.iter().enumerate() {
        for (bj, c) in bases.iter().enumerate().skip(bi) {
            for (i, u) in b.monomials.iter().enumerate() {
                let start = if bi == bj { i } else { 0 };
                for (j, v) in c.monomials.iter().enumerate().skip(start) {
                    classes.entry((bi, bj, u.add(v))).or_default().push((offsets[bi] + i, offsets[bj] + j));
                }
            }
        }
    }
    let mut out = Vec::new();
    for pairs in classes.values() {
        for (k, &(u, v)) in pairs.iter().enumerate() {
            for &(w, t) in &pairs[k + 1..] {
                let lhs = ExpVec::unit(u).add(&ExpVec::unit(v));
                let rhs = ExpVec::unit(w).add(&ExpVec::unit(t));
                out.push(DiffOp::binomial(n, lhs, rhs));
            }
        }
    }
    out
}

/// Box operators `∂^{l+} - ∂^{l-}` for the lattice of `A` with
/// `|l+| <= cap`, torus operators `Σ_j A_ij a_j ∂_j - β_i` for rows `i >= 1`
/// (as `g_ops`) and the Euler operator from row 0.
pub fn build_gkz(t: &ToricData, beta: &[Rat], cap: usize) -> Result<TautSystem> {
    let a = &t.a;
    if beta.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!("beta has {} entries, A has {} rows", beta.len(), a.rows())));
    }
    let n = a.cols();
    let col = |j: usize| -> Vec<i64> { a.column(j).iter().map(|x| i64::try_from(x).expect("small")).collect() };
    let cols: Vec<Vec<i64>> = (0..n).map(col).collect();
    let mut classes: BTreeMap<Vec<i64>, Vec<ExpVec>> = BTreeMap::new();
    for k in 1..=cap {
        for m in exponent_vectors(n, k) {
            let mut key = vec![0i64; a.rows()];
            for (j, &e) in m.iter().enumerate() {
                for (x, y) in key.iter_mut().zip(&cols[j]) {
                    *x += e * y;
                }
            }
            classes.entry(key).or_default().push(ExpVec::from_dense(&m));
        }
    }
    let mut binomial = Vec::new();
    for members in classes.values() {
        for (i, u) in members.iter().enumerate() {
            for w in &members[i + 1..] {
                if u.iter().any(|(k, _)| w.get(k) != 0) {
                    continue;
                }
                binomial.push(DiffOp::binomial(n, u.clone(), w.clone()));
            }
        }
    }
    let torus = |i: usize| {
        let mut op = DiffOp::constant(n, -beta[i].clone());
        for (j, c) in cols.iter().enumerate() {
            op.add_term(rat(c[i]), ExpVec::unit(j), ExpVec::unit(j));
        }
        op
    };
    let g_ops = (1..a.rows())
        .map(|i| GOperator { label: format!("T{i}"), matrix: vec![(i - 1, i - 1, Rat::one())], op: torus(i) })
        .collect();
    Ok(TautSystem {
        variety: Variety::Toric(t.clone()),
        multidegrees: vec![vec![1]],
        betas: beta.to_vec(),
        n,
        distinguished: vec![0],
        variables: (0..n).map(|j| format!("a{j}")).collect(),
        binomial,
        linear: vec![],
        g_ops,
        euler: vec![torus(0)],
    })
}

/// `P^{n-1}` with its degree-`n` Veronese embedding: all quadratic
/// coincidences, `Z_x` for `sl_n` and the Euler operator with `β = 1`.
pub fn build_extended_gkz(n: usize, degree: usize) -> Result<TautSystem> {
    if n < 2 || degree != n {
        return Err(Error::DegreeMismatch(format!("extended GKZ needs degree n = {n}, got {degree}")));
    }
    let x = Variety::Grassmannian { d: 1, n };
    let basis = x.monomial_basis(&[degree])?;
    let nv = basis.len();
    let bases = [basis];
    Ok(TautSystem {
        variety: x,
        multidegrees: vec![vec![degree]],
        betas: vec![Rat::one()],
        n: nv,
        distinguished: vec![0],
        variables: (0..nv).map(|i| bases[0].label(i)).collect(),
        binomial: quadratic_binomials(&bases, &[0], nv),
        linear: vec![],
        g_ops: g_operators(n, &bases, &[0], nv),
        euler: vec![DiffOp::euler(nv, 0..nv, Rat::one())],
    })
}

/// Rows of the RREF of the space of linear forms on `basis` that vanish on
/// `x`, by nullspace of an evaluation matrix with `|basis| + 20` points and a
/// stability check with 10 more.
pub fn linear_relations_by_evaluation(x: &Variety, basis: &MonomialBasis, seed: u64) -> Result<RatMatrix> {
    let m = x.sample_points(basis, basis.len() + 20, seed)?;
    let k1 = rational_nullspace(&m);
    let extra = x.sample_points(basis, 10, seed.wrapping_add(0x9e37_79b9))?;
    let k2 = rational_nullspace(&m.vstack(&extra));
    if k1.rows() != k2.rows() {
        return Err(Error::RankUnstable { before: k1.rows(), after: k2.rows() });
    }
    Ok(k2)
}

/// Same space from the Plücker relations times all complementary monomials.
pub fn linear_relations_symbolic(d: usize, n: usize, basis: &MonomialBasis) -> Result<RatMatrix> {
    let deg = basis.degrees[0];
    let k = plucker_indices(d, n).len();
    let pos: HashMap<&ExpVec, usize> = basis.monomials.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let rels = plucker_relations(d, n);
    if deg < 2 || rels.is_empty() {
        return Ok(RatMatrix::zeros(0, basis.len()));
    }
    let mut rows = Vec::new();
    for comp in exponent_vectors(k, deg - 2) {
        let c = ExpVec::from_dense(&comp);
        for r in &rels {
            let mut row = vec![Rat::zero(); basis.len()];
            for (e, coef) in r.terms() {
                let m = ExpVec::from_dense(e).add(&c);
                row[pos[&m]] += coef;
            }
            rows.push(row);
        }
    }
    let (r, _) = rref(&RatMatrix::from_rows(basis.len(), rows));
    Ok(r)
}

/// First-order operators `Σ c_u ∂_u` for a basis of the linear forms
/// vanishing on the embedded variety. For Grassmannians both backends run and
/// must agree.
pub fn linear_ideal_operators(x: &Variety, basis: &MonomialBasis, seed: u64) -> Result<Vec<DiffOp>> {
    if matches!(x, Variety::Toric(_)) {
        return Err(Error::Unsupported("linear ideal operators need a Grassmannian or flag variety".into()));
    }
    let eval = linear_relations_by_evaluation(x, basis, seed)?;
    if let Variety::Grassmannian { d, n } = x {
        let sym = linear_relations_symbolic(*d, *n, basis)?;
        if !same_row_space(&sym, &eval) {
            return Err(Error::BackendDisagreement { symbolic: sym.rows(), evaluation: eval.rows() });
        }
    }
    Ok(relation_ops(&eval, 0, basis.len()))
}

fn relation_ops(m: &RatMatrix, offset: usize, n: usize) -> Vec<DiffOp> {
    (0..m.rows())
        .map(|r| {
            DiffOp::from_terms(
                n,
                m.row(r).iter().enumerate().map(|(u, c)| (c.clone(), ExpVec::zero(), ExpVec::unit(offset + u))),
            )
        })
        .collect()
}

/// Hypersurface system for an anticanonical section of a Grassmannian or
/// flag variety.
pub fn build_flag_system(x: &Variety, seed: u64) -> Result<TautSystem> {
    let degrees = x.anticanonical_degrees()?;
    build_ci_system(x, &[degrees], &[Rat::one()], seed)
}

/// Complete-intersection system: variables are the disjoint union of the
/// factor bases, one Euler operator per factor, `Z_x` summed over factors.
pub fn build_ci_system(x: &Variety, multidegrees: &[Vec<usize>], betas: &[Rat], seed: u64) -> Result<TautSystem> {
    if betas.len() != multidegrees.len() {
        return Err(Error::DimensionMismatch("one beta per factor".into()));
    }
    let ambient = x.ambient().ok_or_else(|| Error::Unsupported("toric variety; use build_gkz".into()))?;
    let bases = x.ci_bases(multidegrees)?;
    let mut offsets = vec![];
    let mut n = 0;
    for b in &bases {
        offsets.push(n);
        n += b.len();
    }
    let mut linear = Vec::new();
    for (b, &off) in bases.iter().zip(&offsets) {
        let eval = linear_relations_by_evaluation(x, b, seed)?;
        if let Variety::Grassmannian { d, n: nn } = x {
            let sym = linear_relations_symbolic(*d, *nn, b)?;
            if !same_row_space(&sym, &eval) {
                return Err(Error::BackendDisagreement { symbolic: sym.rows(), evaluation: eval.rows() });
            }
        }
        linear.extend(relation_ops(&eval, off, n));
    }
    let euler = bases
        .iter()
        .zip(&offsets)
        .zip(betas)
        .map(|((b, &off), beta)| DiffOp::euler(n, off..off + b.len(), beta.clone()))
        .collect();
    let mut variables = Vec::with_capacity(n);
    for (f, b) in bases.iter().enumerate() {
        for i in 0..b.len() {
            variables.push(if bases.len() == 1 { b.label(i) } else { format!("{}:{}", f + 1, b.label(i)) });
        }
    }
    Ok(TautSystem {
        variety: x.clone(),
        multidegrees: multidegrees.to_vec(),
        betas: betas.to_vec(),
        n,
        distinguished: offsets.clone(),
        variables,
        binomial: quadratic_binomials(&bases, &offsets, n),
        linear,
        g_ops: g_operators(ambient, &bases, &offsets, n),
        euler,
    })
}
