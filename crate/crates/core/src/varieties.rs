//! Variety descriptors and their combinatorics: Plücker coordinates and
//! relations, monomial bases, big-cell charts, dimension formulas and point
//! sampling.

use std::fmt;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{factorial, Int, IntMatrix, Rat, RatMatrix};
use crate::polyalg::{ExpVec, LaurentPoly};

/// Strictly increasing 1-based column indices of a maximal minor.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PluckerIndex(pub Vec<usize>);

impl PluckerIndex {
    pub fn new(mut idx: Vec<usize>) -> Self {
        idx.sort_unstable();
        PluckerIndex(idx)
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for PluckerIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p")?;
        for i in &self.0 {
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

/// All `d`-subsets of `1..=n` in lexicographic order.
pub fn plucker_indices(d: usize, n: usize) -> Vec<PluckerIndex> {
    fn rec(start: usize, n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<PluckerIndex>) {
        if left == 0 {
            out.push(PluckerIndex(cur.clone()));
            return;
        }
        for i in start..=n {
            if n - i + 1 < left {
                break;
            }
            cur.push(i);
            rec(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, d, &mut Vec::new(), &mut out);
    out
}

/// Sign of the permutation sorting `v`, or 0 if `v` has a repeated entry.
pub fn sort_sign(v: &[usize]) -> i64 {
    let mut sign = 1;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] == v[j] {
                return 0;
            }
            if v[i] > v[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Quadratic exchange relations of `G(d,n)` as polynomials in the `C(n,d)`
/// Plücker variables (ordered as [`plucker_indices`]). Each is normalized to
/// a positive leading coefficient and duplicates are removed.
pub fn plucker_relations(d: usize, n: usize) -> Vec<LaurentPoly> {
    let idx = plucker_indices(d, n);
    let pos = |v: &[usize]| idx.iter().position(|p| p.0 == v).expect("valid index");
    let nv = idx.len();
    let mut out: Vec<LaurentPoly> = Vec::new();
    let small = if d >= 1 { plucker_indices(d - 1, n) } else { vec![] };
    let large = plucker_indices(d + 1, n);
    for i in &small {
        for j in &large {
            let mut rel = LaurentPoly::zero(nv);
            for (k, &jk) in j.0.iter().enumerate() {
                let mut left = i.0.clone();
                left.push(jk);
                let s = sort_sign(&left);
                if s == 0 {
                    continue;
                }
                let right: Vec<usize> = j.0.iter().copied().filter(|&x| x != jk).collect();
                let mut sl = left.clone();
                sl.sort_unstable();
                let sign = if k % 2 == 0 { s } else { -s };
                let mut e = vec![0i64; nv];
                e[pos(&sl)] += 1;
                e[pos(&right)] += 1;
                rel.add_term(e, Rat::from_integer(sign.into()));
            }
            if rel.is_zero() {
                continue;
            }
            let lead = rel.terms().last().map(|(_, c)| c.clone()).expect("nonzero");
            if lead < Rat::zero() {
                rel = -&rel;
            }
            if !out.contains(&rel) {
                out.push(rel);
            }
        }
    }
    out
}

/// Toric data: the A-matrix with first row all ones and the distinguished
/// column moved to index 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ToricData {
    pub a: IntMatrix,
}

impl ToricData {
    /// Validates the first row and moves column `v0` to the front.
    pub fn new(a: IntMatrix, v0: usize) -> Result<Self> {
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::InvalidDescriptor("empty A-matrix".into()));
        }
        if a.row(0).iter().any(|x| !x.is_one()) {
            return Err(Error::InvalidDescriptor("first row of A must be all ones".into()));
        }
        if v0 >= a.cols() {
            return Err(Error::InvalidDescriptor("v0 out of range".into()));
        }
        let mut perm: Vec<usize> = vec![v0];
        perm.extend((0..a.cols()).filter(|&j| j != v0));
        Ok(ToricData { a: a.permute_columns(&perm) })
    }

    /// Default distinguished column: the one equal to the centroid of all
    /// columns.
    pub fn with_centroid(a: IntMatrix) -> Result<Self> {
        let c = a.cols() as i64;
        let sums: Vec<Int> = (0..a.rows()).map(|i| a.row(i).iter().sum()).collect();
        let v0 = (0..a.cols()).find(|&j| (0..a.rows()).all(|i| a.get(i, j) * Int::from(c) == sums[i]));
        match v0 {
            Some(v0) => ToricData::new(a, v0),
            None => Err(Error::InvalidDescriptor("no column equals the centroid; give v0 explicitly".into())),
        }
    }

    /// The anticanonical toric data of `P^{n-1}`: columns follow the degree
    /// `n` monomial basis of `G(1,n)`, shifted by the all-ones vector and
    /// projected away from the last coordinate.
    pub fn projective(n: usize) -> Result<Self> {
        let basis = Variety::Grassmannian { d: 1, n }.monomial_basis(&[n])?;
        let cols: Vec<Vec<i64>> = basis
            .monomials
            .iter()
            .map(|m| {
                let mut col = vec![1];
                col.extend((0..n - 1).map(|i| m.get(i) - 1));
                col
            })
            .collect();
        let rows: Vec<Vec<i64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
        ToricData::new(IntMatrix::from_rows(&rows), 0)
    }

    pub fn ncols(&self) -> usize {
        self.a.cols()
    }
}

#[derive(Deserialize)]
struct ToricFile {
    #[serde(rename = "A")]
    a: Vec<Vec<i64>>,
    v0: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Variety {
    Toric(ToricData),
    Grassmannian { d: usize, n: usize },
    Flag { steps: Vec<usize>, n: usize },
}

/// Monomials of a fixed multidegree in the Plücker coordinates of each
/// component, or the columns of a toric A-matrix. Index 0 is distinguished.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialBasis {
    /// Coordinates as `(component, index)`; empty for toric bases.
    pub coords: Vec<(usize, PluckerIndex)>,
    pub degrees: Vec<usize>,
    /// Exponent vectors over `coords` (toric: A-matrix columns).
    pub monomials: Vec<ExpVec>,
    /// Whether index 0 restricts to a single monomial equal to the product of
    /// all chart coordinates.
    pub chart_distinguished: bool,
}

impl MonomialBasis {
    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn label(&self, i: usize) -> String {
        if self.coords.is_empty() {
            return format!("a{i}");
        }
        let mut s = String::new();
        for (k, e) in self.monomials[i].iter() {
            if !s.is_empty() {
                s.push('*');
            }
            s.push_str(&self.coords[k].1.to_string());
            if e > 1 {
                s.push_str(&format!("^{e}"));
            }
        }
        s
    }

    pub fn position(&self, m: &ExpVec) -> Option<usize> {
        self.monomials.iter().position(|x| x == m)
    }

    /// Value of monomial `i` given coordinate values.
    pub fn evaluate(&self, i: usize, coord_values: &[Rat]) -> Rat {
        self.monomials[i].iter().fold(Rat::one(), |acc, (k, e)| {
            if e >= 0 {
                acc * num_traits::pow(coord_values[k].clone(), e as usize)
            } else {
                acc / num_traits::pow(coord_values[k].clone(), (-e) as usize)
            }
        })
    }
}

/// Laurent expansions of every Plücker coordinate on the big cell.
#[derive(Clone, Debug)]
pub struct Chart {
    pub nvars: usize,
    /// Aligned with [`Variety::coordinates`].
    pub coords: Vec<LaurentPoly>,
}

impl Chart {
    /// Expansion of a monomial in the coordinates.
    pub fn expand(&self, m: &ExpVec) -> LaurentPoly {
        let mut p = LaurentPoly::one(self.nvars);
        for (k, e) in m.iter() {
            p = p.multiply(&self.coords[k].power(e as u32));
        }
        p
    }

    /// `Some((c, exp))` when the monomial restricts to a single chart term.
    pub fn single_term(&self, m: &ExpVec) -> Option<(Rat, Vec<i64>)> {
        let mut c = Rat::one();
        let mut exp = vec![0i64; self.nvars];
        for (k, e) in m.iter() {
            let (ck, ek) = self.coords[k].as_monomial()?;
            c *= num_traits::pow(ck.clone(), e as usize);
            for (x, y) in exp.iter_mut().zip(ek) {
                *x += e * y;
            }
        }
        Some((c, exp))
    }
}

impl Variety {
    /// Parses `p:N`, `g:D,N`, `f:D1,D2,..;N` or `toric:@file.json`.
    pub fn parse(desc: &str) -> Result<Self> {
        let bad = || Error::InvalidDescriptor(desc.to_string());
        let (tag, body) = desc.split_once(':').ok_or_else(bad)?;
        let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
        let v = match tag.trim() {
            "p" => {
                let n = num(body)?;
                Variety::Grassmannian { d: 1, n: n + 1 }
            }
            "g" => {
                let (d, n) = body.split_once(',').ok_or_else(bad)?;
                Variety::Grassmannian { d: num(d)?, n: num(n)? }
            }
            "f" => {
                let (steps, n) = body.split_once(';').ok_or_else(bad)?;
                let steps = steps.split(',').map(num).collect::<Result<Vec<_>>>()?;
                Variety::flag(steps, num(n)?)?
            }
            "toric" => {
                let path = body.strip_prefix('@').ok_or_else(bad)?;
                let text = std::fs::read_to_string(path)?;
                Variety::toric_from_json(&text)?
            }
            _ => return Err(bad()),
        };
        v.validate().map_err(|_| bad())?;
        Ok(v)
    }

    pub fn toric_from_json(text: &str) -> Result<Self> {
        let f: ToricFile = serde_json::from_str(text)?;
        let width = f.a.first().map_or(0, Vec::len);
        if f.a.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidDescriptor("ragged A-matrix".into()));
        }
        let a = IntMatrix::from_rows(&f.a);
        let data = match f.v0 {
            Some(v0) => ToricData::new(a, v0)?,
            None => ToricData::with_centroid(a)?,
        };
        Ok(Variety::Toric(data))
    }

    /// A flag variety; a single step gives a Grassmannian.
    pub fn flag(steps: Vec<usize>, n: usize) -> Result<Self> {
        let v = if steps.len() == 1 {
            Variety::Grassmannian { d: steps[0], n }
        } else {
            Variety::Flag { steps, n }
        };
        v.validate()?;
        Ok(v)
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Variety::Toric(_) => true,
            Variety::Grassmannian { d, n } => 0 < *d && d < n,
            Variety::Flag { steps, n } => {
                !steps.is_empty()
                    && steps[0] > 0
                    && steps.windows(2).all(|w| w[0] < w[1])
                    && steps.last().is_some_and(|l| l < n)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDescriptor(self.descriptor()))
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Variety::Toric(t) => format!("toric:{}x{}", t.a.rows(), t.a.cols()),
            Variety::Grassmannian { d: 1, n } => format!("p:{}", n - 1),
            Variety::Grassmannian { d, n } => format!("g:{d},{n}"),
            Variety::Flag { steps, n } => {
                let s: Vec<String> = steps.iter().map(|x| x.to_string()).collect();
                format!("f:{};{n}", s.join(","))
            }
        }
    }

    /// Steps `d_1 < … < d_r` (empty for toric varieties).
    pub fn steps(&self) -> Vec<usize> {
        match self {
            Variety::Toric(_) => vec![],
            Variety::Grassmannian { d, .. } => vec![*d],
            Variety::Flag { steps, .. } => steps.clone(),
        }
    }

    /// `n` of the acting `SL_n`; `None` for toric varieties.
    pub fn ambient(&self) -> Option<usize> {
        match self {
            Variety::Toric(_) => None,
            Variety::Grassmannian { n, .. } | Variety::Flag { n, .. } => Some(*n),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Variety::Toric(t) => t.a.rows() - 1,
            _ => {
                let n = self.ambient().expect("homogeneous");
                let mut blocks = vec![];
                let mut prev = 0;
                for s in self.steps() {
                    blocks.push(s - prev);
                    prev = s;
                }
                blocks.push(n - prev);
                let mut dim = 0;
                for i in 0..blocks.len() {
                    for j in i + 1..blocks.len() {
                        dim += blocks[i] * blocks[j];
                    }
                }
                dim
            }
        }
    }

    /// `(d_{i+1} - d_{i-1})` with `d_0 = 0` and `d_{r+1} = n`.
    pub fn anticanonical_degrees(&self) -> Result<Vec<usize>> {
        let n = self.ambient().ok_or_else(|| Error::Unsupported("toric variety".into()))?;
        let mut d = vec![0];
        d.extend(self.steps());
        d.push(n);
        Ok((1..d.len() - 1).map(|i| d[i + 1] - d[i - 1]).collect())
    }

    /// Plücker coordinates of every component as `(component, index)`.
    pub fn coordinates(&self) -> Vec<(usize, PluckerIndex)> {
        match self.ambient() {
            None => vec![],
            Some(n) => self
                .steps()
                .iter()
                .enumerate()
                .flat_map(|(c, &d)| plucker_indices(d, n).into_iter().map(move |i| (c, i)))
                .collect(),
        }
    }

    /// Torus weight in `Z^n` of a monomial in [`Variety::coordinates`].
    pub fn torus_weight(&self, coords: &[(usize, PluckerIndex)], m: &ExpVec) -> Vec<i64> {
        let n = self.ambient().unwrap_or(0);
        let mut w = vec![0i64; n];
        for (k, e) in m.iter() {
            for &i in &coords[k].1 .0 {
                w[i - 1] += e;
            }
        }
        w
    }

    /// Big-cell chart. Grassmannian: the matrix `[I | Z]`, with chart
    /// variables the single-swap coordinates `p_{I0 - r + s}` ordered by `s`
    /// and then lexicographically. Flags: `[U | Z]` with `U` block upper
    /// unitriangular, chart variables the free entries in row-major order.
    pub fn chart(&self) -> Result<Chart> {
        let n = self.ambient().ok_or_else(|| Error::Unsupported("toric variety has no Plücker chart".into()))?;
        let steps = self.steps();
        let rows = *steps.last().expect("at least one step");
        let mut positions: Vec<(usize, usize, i64)> = Vec::new();
        match self {
            Variety::Grassmannian { d, .. } => {
                for s in *d..n {
                    for r in (0..*d).rev() {
                        let sign = if (d - 1 - r) % 2 == 0 { 1 } else { -1 };
                        positions.push((r, s, sign));
                    }
                }
            }
            _ => {
                let block_of = |i: usize| steps.iter().position(|&s| i < s).unwrap_or(steps.len());
                for r in 0..rows {
                    for c in 0..n {
                        if c >= rows || block_of(c) > block_of(r) {
                            positions.push((r, c, 1));
                        }
                    }
                }
            }
        }
        let nvars = positions.len();
        let mut m: Vec<Vec<LaurentPoly>> = (0..rows)
            .map(|r| {
                (0..n)
                    .map(|c| if r == c { LaurentPoly::one(nvars) } else { LaurentPoly::zero(nvars) })
                    .collect()
            })
            .collect();
        for (k, &(r, c, sign)) in positions.iter().enumerate() {
            m[r][c] = LaurentPoly::var(nvars, k).scale(&Rat::from_integer(sign.into()));
        }
        let coords = self
            .coordinates()
            .iter()
            .map(|(comp, idx)| {
                let d = steps[*comp];
                let sub: Vec<Vec<LaurentPoly>> =
                    (0..d).map(|r| idx.0.iter().map(|&c| m[r][c - 1].clone()).collect()).collect();
                poly_det(&sub)
            })
            .collect();
        Ok(Chart { nvars, coords })
    }

    /// Monomial basis of the given multidegree (one entry per step) in
    /// graded-lex descending order, with the distinguished monomial moved to
    /// index 0 when one exists.
    pub fn monomial_basis(&self, degrees: &[usize]) -> Result<MonomialBasis> {
        if let Variety::Toric(t) = self {
            let monomials = (0..t.a.cols())
                .map(|j| ExpVec::from_dense(&t.a.column(j).iter().map(|x| i64::try_from(x).expect("small")).collect::<Vec<_>>()))
                .collect();
            return Ok(MonomialBasis { coords: vec![], degrees: vec![1], monomials, chart_distinguished: true });
        }
        let mut basis = self.plain_basis(degrees)?;
        let chart = self.chart()?;
        let target = vec![1i64; chart.nvars];
        if let Some(k) = basis.monomials.iter().position(|m| {
            chart.single_term(m).is_some_and(|(_, e)| e == target)
        }) {
            let v0 = basis.monomials.remove(k);
            basis.monomials.insert(0, v0);
            basis.chart_distinguished = true;
        }
        Ok(basis)
    }

    /// Bases for a complete intersection: one per factor, with distinguished
    /// monomials whose chart restrictions are disjoint single terms covering
    /// every chart variable exactly once.
    pub fn ci_bases(&self, multidegrees: &[Vec<usize>]) -> Result<Vec<MonomialBasis>> {
        let canonical = self.anticanonical_degrees()?;
        for md in multidegrees {
            if md.len() != canonical.len() || md.iter().any(|&x| x == 0) {
                return Err(Error::DegreeMismatch(format!("{md:?}")));
            }
        }
        let sums: Vec<usize> =
            (0..canonical.len()).map(|k| multidegrees.iter().map(|md| md[k]).sum()).collect();
        if sums != canonical {
            return Err(Error::DegreeMismatch(format!("degrees sum to {sums:?}, expected {canonical:?}")));
        }
        if multidegrees.len() == 1 {
            return Ok(vec![self.monomial_basis(&multidegrees[0])?]);
        }
        let mut bases: Vec<MonomialBasis> =
            multidegrees.iter().map(|md| self.plain_basis(md)).collect::<Result<_>>()?;
        let chart = self.chart()?;
        let candidates: Vec<Vec<(usize, Vec<i64>)>> = bases
            .iter()
            .map(|b| {
                b.monomials
                    .iter()
                    .enumerate()
                    .filter_map(|(k, m)| {
                        let (_, e) = chart.single_term(m)?;
                        e.iter().all(|&x| x == 0 || x == 1).then_some((k, e))
                    })
                    .collect()
            })
            .collect();
        fn search(
            f: usize,
            cands: &[Vec<(usize, Vec<i64>)>],
            used: &mut Vec<i64>,
            pick: &mut Vec<usize>,
        ) -> bool {
            if f == cands.len() {
                return used.iter().all(|&x| x == 1);
            }
            for (k, e) in &cands[f] {
                if e.iter().zip(used.iter()).any(|(a, b)| a + b > 1) {
                    continue;
                }
                for (u, x) in used.iter_mut().zip(e) {
                    *u += x;
                }
                pick.push(*k);
                if search(f + 1, cands, used, pick) {
                    return true;
                }
                pick.pop();
                for (u, x) in used.iter_mut().zip(e) {
                    *u -= x;
                }
            }
            false
        }
        let mut pick = Vec::new();
        if search(0, &candidates, &mut vec![0; chart.nvars], &mut pick) {
            for (b, k) in bases.iter_mut().zip(pick) {
                let v0 = b.monomials.remove(k);
                b.monomials.insert(0, v0);
                b.chart_distinguished = true;
            }
        }
        Ok(bases)
    }

    fn plain_basis(&self, degrees: &[usize]) -> Result<MonomialBasis> {
        let n = self.ambient().ok_or_else(|| Error::Unsupported("toric variety".into()))?;
        let steps = self.steps();
        if degrees.len() != steps.len() {
            return Err(Error::DegreeMismatch(format!("need {} degrees, got {}", steps.len(), degrees.len())));
        }
        if degrees.iter().any(|&x| x == 0) {
            return Err(Error::DegreeMismatch("degrees must be positive".into()));
        }
        let coords = self.coordinates();
        let mut offset = 0;
        let mut per_comp: Vec<Vec<Vec<(usize, i64)>>> = Vec::new();
        for (&d, &deg) in steps.iter().zip(degrees) {
            let k = plucker_indices(d, n).len();
            let exps = exponent_vectors(k, deg);
            per_comp.push(
                exps.into_iter()
                    .map(|e| e.into_iter().enumerate().map(|(i, x)| (offset + i, x)).collect())
                    .collect(),
            );
            offset += k;
        }
        let mut monomials: Vec<Vec<(usize, i64)>> = vec![vec![]];
        for comp in &per_comp {
            monomials = monomials
                .into_iter()
                .flat_map(|prefix| {
                    comp.iter().map(move |e| {
                        let mut v = prefix.clone();
                        v.extend(e.iter().copied());
                        v
                    })
                })
                .collect();
        }
        Ok(MonomialBasis {
            coords,
            degrees: degrees.to_vec(),
            monomials: monomials.into_iter().map(ExpVec::from_pairs).collect(),
            chart_distinguished: false,
        })
    }

    /// Plücker values at random points: per point, one value per entry of
    /// [`Variety::coordinates`]. Entries are integers in `[-10, 10]`.
    pub fn sample_plucker_values(&self, count: usize, seed: u64) -> Result<Vec<Vec<Rat>>> {
        const BOUND: i64 = 10;
        const RETRIES: usize = 100;
        let n = self.ambient().ok_or_else(|| Error::Unsupported("toric variety".into()))?;
        let steps = self.steps();
        let coords = self.coordinates();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            let mut found = None;
            for _ in 0..RETRIES {
                let rows = if steps.len() == 1 { steps[0] } else { n };
                let m: Vec<Vec<i64>> =
                    (0..rows).map(|_| (0..n).map(|_| rng.gen_range(-BOUND..=BOUND)).collect()).collect();
                let values: Vec<Rat> = coords
                    .iter()
                    .map(|(c, idx)| {
                        let sub: Vec<Vec<i64>> =
                            (0..steps[*c]).map(|r| idx.0.iter().map(|&j| m[r][j - 1]).collect()).collect();
                        Rat::from_integer(IntMatrix::from_rows(&sub).determinant())
                    })
                    .collect();
                let full_rank = if steps.len() == 1 {
                    values.iter().any(|v| !v.is_zero())
                } else {
                    !IntMatrix::from_rows(&m).determinant().is_zero()
                };
                if full_rank {
                    found = Some(values);
                    break;
                }
            }
            out.push(found.ok_or(Error::SamplingFailed(RETRIES))?);
        }
        Ok(out)
    }

    /// Rows are random points, columns the monomials of `basis` evaluated
    /// there. Deterministic in `seed`.
    pub fn sample_points(&self, basis: &MonomialBasis, count: usize, seed: u64) -> Result<RatMatrix> {
        if count == 0 {
            return Err(Error::DimensionMismatch("need at least one point".into()));
        }
        let rows: Vec<Vec<Rat>> = match self {
            Variety::Toric(t) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|_| {
                        let x: Vec<Rat> = (1..t.a.rows())
                            .map(|_| {
                                let mut v = 0;
                                while v == 0 {
                                    v = rng.gen_range(-10i64..=10);
                                }
                                Rat::from_integer(v.into())
                            })
                            .collect();
                        (0..t.a.cols())
                            .map(|j| {
                                (1..t.a.rows()).fold(Rat::one(), |acc, i| {
                                    let e = i64::try_from(t.a.get(i, j)).expect("small");
                                    if e >= 0 {
                                        acc * num_traits::pow(x[i - 1].clone(), e as usize)
                                    } else {
                                        acc / num_traits::pow(x[i - 1].clone(), (-e) as usize)
                                    }
                                })
                            })
                            .collect()
                    })
                    .collect()
            }
            _ => self
                .sample_plucker_values(count, seed)?
                .iter()
                .map(|vals| (0..basis.len()).map(|i| basis.evaluate(i, vals)).collect())
                .collect(),
        };
        Ok(RatMatrix::from_rows(basis.len(), rows))
    }
}

/// All length-`k` nonnegative vectors with sum `deg`, lexicographically
/// descending.
pub fn exponent_vectors(k: usize, deg: usize) -> Vec<Vec<i64>> {
    fn rec(k: usize, left: usize, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        if cur.len() + 1 == k {
            cur.push(left as i64);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in (0..=left).rev() {
            cur.push(x as i64);
            rec(k, left - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k > 0 {
        rec(k, deg, &mut Vec::new(), &mut out);
    }
    out
}

/// Determinant by cofactor expansion along the first row.
pub fn poly_det(m: &[Vec<LaurentPoly>]) -> LaurentPoly {
    let d = m.len();
    let nv = m[0][0].nvars();
    if d == 1 {
        return m[0][0].clone();
    }
    let mut out = LaurentPoly::zero(nv);
    for j in 0..d {
        if m[0][j].is_zero() {
            continue;
        }
        let minor: Vec<Vec<LaurentPoly>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = m[0][j].multiply(&poly_det(&minor));
        out = if j % 2 == 0 { &out + &term } else { &out - &term };
    }
    out
}

/// Dimension of the irreducible `sl_n` representation with highest weight
/// `Σ λ_k ω_k` (`λ` has `n - 1` entries).
pub fn weyl_dim(lambda: &[u64], n: usize) -> Int {
    assert_eq!(lambda.len() + 1, n, "weight needs n-1 coordinates");
    let mut num = Int::one();
    let mut den = Int::one();
    for i in 0..n {
        for j in i + 1..n {
            let s: u64 = (i..j).map(|k| lambda[k] + 1).sum();
            num *= Int::from(s);
            den *= Int::from((j - i) as u64);
        }
    }
    num / den
}

/// `(d(n-d))! Π_{i<d} i!/(n-d+i)!`.
pub fn degree_grassmannian(d: usize, n: usize) -> Int {
    assert!(0 < d && d < n);
    let mut num = factorial((d * (n - d)) as u64);
    let mut den = Int::one();
    for i in 0..d {
        num *= factorial(i as u64);
        den *= factorial((n - d + i) as u64);
    }
    num / den
}

/// Largest `n` accepted by [`poincare_polynomial`].
pub const POINCARE_MAX_N: usize = 10;

/// Coefficients (index = power of `t`) of the Poincaré polynomial, from the
/// inversion counts of the minimal coset representatives, enumerated as
/// words with `d_{i+1} - d_i` copies of letter `i`.
pub fn poincare_polynomial(x: &Variety) -> Result<Vec<Int>> {
    let n = x.ambient().ok_or_else(|| Error::Unsupported("toric variety".into()))?;
    if n > POINCARE_MAX_N {
        return Err(Error::SizeCap(format!("n = {n} exceeds {POINCARE_MAX_N}")));
    }
    let mut counts = vec![];
    let mut prev = 0;
    for s in x.steps() {
        counts.push(s - prev);
        prev = s;
    }
    counts.push(n - prev);
    let mut coeffs = vec![Int::zero(); 2 * x.dim() + 1];
    let mut word = Vec::with_capacity(n);
    fn rec(counts: &mut [usize], word: &mut Vec<usize>, n: usize, inv: usize, coeffs: &mut [Int]) {
        if word.len() == n {
            coeffs[2 * inv] += 1;
            return;
        }
        for letter in 0..counts.len() {
            if counts[letter] == 0 {
                continue;
            }
            let added = word.iter().filter(|&&w| w > letter).count();
            counts[letter] -= 1;
            word.push(letter);
            rec(counts, word, n, inv + added, coeffs);
            word.pop();
            counts[letter] += 1;
        }
    }
    rec(&mut counts, &mut word, n, 0, &mut coeffs);
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{binomial, rank, rat, rational_nullspace};

    fn g(d: usize, n: usize) -> Variety {
        Variety::Grassmannian { d, n }
    }

    #[test]
    fn indices() {
        assert_eq!(plucker_indices(2, 4).len(), 6);
        assert_eq!(plucker_indices(1, 3), vec![PluckerIndex(vec![1]), PluckerIndex(vec![2]), PluckerIndex(vec![3])]);
        assert_eq!(plucker_indices(3, 6).len(), 20);
        assert_eq!(plucker_indices(2, 4)[1].to_string(), "p13");
    }

    #[test]
    fn relations_g24() {
        let rels = plucker_relations(2, 4);
        assert_eq!(rels.len(), 1);
        // p12 p34 - p13 p24 + p14 p23 over (p12, p13, p14, p23, p24, p34)
        let expect = LaurentPoly::from_terms(
            6,
            [(vec![1, 0, 0, 0, 0, 1], rat(1)), (vec![0, 1, 0, 0, 1, 0], rat(-1)), (vec![0, 0, 1, 1, 0, 0], rat(1))],
        );
        assert!(rels[0] == expect || rels[0] == -&expect);
        assert!(plucker_relations(1, 5).is_empty());
    }

    fn relation_rank(d: usize, n: usize) -> usize {
        let rels = plucker_relations(d, n);
        let basis = g(d, n).monomial_basis(&[2]).unwrap();
        let rows: Vec<Vec<Rat>> = rels
            .iter()
            .map(|r| {
                basis
                    .monomials
                    .iter()
                    .map(|m| r.coefficient(&m.to_dense(basis.coords.len())))
                    .collect()
            })
            .collect();
        rank(&RatMatrix::from_rows(basis.len(), rows))
    }

    #[test]
    fn relations_vanish_on_samples() {
        for (d, n) in [(2, 4), (2, 5), (3, 6)] {
            let pts = g(d, n).sample_plucker_values(5, 7).unwrap();
            for rel in plucker_relations(d, n) {
                for p in &pts {
                    assert_eq!(rel.evaluate(p), rat(0));
                }
            }
        }
    }

    #[test]
    fn relation_span_matches_evaluation_kernel() {
        for (d, n) in [(2, 4), (2, 5)] {
            let x = g(d, n);
            let basis = x.monomial_basis(&[2]).unwrap();
            let m = x.sample_points(&basis, basis.len() + 20, 3).unwrap();
            let kernel = rational_nullspace(&m).rows();
            assert_eq!(kernel, relation_rank(d, n));
            let sym2 = basis.len() as u64;
            let mut lambda = vec![0u64; n - 1];
            lambda[d - 1] = 2;
            assert_eq!(Int::from(sym2 - kernel as u64), weyl_dim(&lambda, n));
        }
        assert_eq!(relation_rank(2, 5), 5);
    }

    #[test]
    fn degrees_and_dims() {
        assert_eq!(g(3, 7).anticanonical_degrees().unwrap(), vec![7]);
        assert_eq!(Variety::flag(vec![1, 2], 3).unwrap().anticanonical_degrees().unwrap(), vec![2, 2]);
        assert_eq!(Variety::flag(vec![1, 3], 4).unwrap().anticanonical_degrees().unwrap(), vec![3, 3]);
        assert_eq!(g(2, 4).dim(), 4);
        assert_eq!(Variety::flag(vec![1, 2], 3).unwrap().dim(), 3);
    }

    #[test]
    fn basis_sizes_and_v0() {
        let b = g(2, 4).monomial_basis(&[4]).unwrap();
        assert_eq!(b.len(), 126);
        assert!(b.chart_distinguished);
        assert_eq!(b.label(0), "p13*p14*p23*p24");
        for (d, n, k) in [(2, 5, 3), (1, 4, 4), (3, 6, 2)] {
            let c = plucker_indices(d, n).len() as i64;
            let b = g(d, n).monomial_basis(&[k]).unwrap();
            assert_eq!(Int::from(b.len()), binomial(c + k as i64 - 1, k as i64));
        }
        assert!(!g(2, 5).monomial_basis(&[5]).unwrap().chart_distinguished);
        let p2 = ToricData::projective(3).unwrap();
        assert_eq!(p2.ncols(), 10);
        assert_eq!(p2.a.column(0), vec![Int::from(1), Int::from(0), Int::from(0)]);
    }

    #[test]
    fn g24_chart_matches_plucker_formula() {
        let chart = g(2, 4).chart().unwrap();
        // p34 = z1 z4 - z2 z3
        let p34 = &chart.coords[5];
        let expect = LaurentPoly::from_terms(4, [(vec![1, 0, 0, 1], rat(1)), (vec![0, 1, 1, 0], rat(-1))]);
        assert_eq!(p34, &expect);
        assert_eq!(chart.coords[0], LaurentPoly::one(4));
        assert_eq!(chart.coords[1], LaurentPoly::var(4, 0));
        assert_eq!(chart.coords[3], LaurentPoly::var(4, 1));
        assert_eq!(chart.coords[2], LaurentPoly::var(4, 2));
        assert_eq!(chart.coords[4], LaurentPoly::var(4, 3));
    }

    #[test]
    fn flag_chart_and_v0() {
        let f = Variety::flag(vec![1, 2], 3).unwrap();
        let chart = f.chart().unwrap();
        assert_eq!(chart.nvars, 3);
        let b = f.monomial_basis(&[2, 2]).unwrap();
        assert_eq!(b.len(), 36);
        assert!(b.chart_distinguished);
    }

    #[test]
    fn ci_bases_p5() {
        let x = g(1, 6);
        let bs = x.ci_bases(&[vec![2], vec![4]]).unwrap();
        assert_eq!(bs[0].len(), 21);
        assert_eq!(bs[1].len(), 126);
        assert!(bs.iter().all(|b| b.chart_distinguished));
        assert_eq!(bs[0].label(0), "p1*p2");
        assert!(matches!(x.ci_bases(&[vec![2], vec![3]]), Err(Error::DegreeMismatch(_))));
    }

    #[test]
    fn identity_sample() {
        let m = [vec![1, 0, 2, 3], vec![0, 1, 5, 7]];
        let sub = |i: usize, j: usize| IntMatrix::from_rows(&[vec![m[0][i], m[0][j]], vec![m[1][i], m[1][j]]]).determinant();
        assert_eq!(sub(0, 1), Int::from(1));
        assert_eq!(sub(0, 2), Int::from(5));
        assert_eq!(sub(1, 2), Int::from(-2));
        assert_eq!(sub(2, 3), Int::from(14 - 15));
    }

    #[test]
    fn samples_are_seeded_and_multiplicative() {
        let x = g(2, 4);
        let b1 = x.monomial_basis(&[1]).unwrap();
        let b2 = x.monomial_basis(&[2]).unwrap();
        let m1 = x.sample_points(&b1, 4, 11).unwrap();
        let m2 = x.sample_points(&b2, 4, 11).unwrap();
        assert_eq!(m2, x.sample_points(&b2, 4, 11).unwrap());
        for (k, mono) in b2.monomials.iter().enumerate() {
            for r in 0..4 {
                let prod = mono.iter().fold(rat(1), |acc, (i, e)| {
                    acc * num_traits::pow(m1.get(r, b1.position(&ExpVec::unit(i)).unwrap()).clone(), e as usize)
                });
                assert_eq!(m2.get(r, k), &prod);
            }
        }
    }

    #[test]
    fn weyl_dimensions() {
        assert_eq!(weyl_dim(&[1, 0, 0], 4), Int::from(4));
        assert_eq!(weyl_dim(&[3, 0], 3), Int::from(10));
        assert_eq!(weyl_dim(&[0, 4, 0], 4), Int::from(105));
        assert_eq!(weyl_dim(&[2, 2], 3), Int::from(27));
    }

    #[test]
    fn grassmannian_degrees() {
        assert_eq!(degree_grassmannian(1, 7), Int::from(1));
        assert_eq!(degree_grassmannian(2, 4), Int::from(2));
        assert_eq!(degree_grassmannian(2, 5), Int::from(5));
        for n in 2..9 {
            for d in 1..n {
                assert_eq!(degree_grassmannian(d, n), degree_grassmannian(n - d, n));
            }
        }
    }

    #[test]
    fn poincare() {
        let p = |v: Vec<i64>| v.into_iter().map(Int::from).collect::<Vec<_>>();
        assert_eq!(poincare_polynomial(&g(2, 4)).unwrap(), p(vec![1, 0, 1, 0, 2, 0, 1, 0, 1]));
        assert_eq!(poincare_polynomial(&g(1, 3)).unwrap(), p(vec![1, 0, 1, 0, 1]));
        assert_eq!(
            poincare_polynomial(&Variety::flag(vec![1, 2], 3).unwrap()).unwrap(),
            p(vec![1, 0, 2, 0, 2, 0, 1])
        );
        assert!(poincare_polynomial(&g(2, 11)).is_err());
    }

    #[test]
    fn descriptors() {
        assert_eq!(Variety::parse("p:4").unwrap(), g(1, 5));
        assert_eq!(Variety::parse("g:2,4").unwrap(), g(2, 4));
        assert_eq!(Variety::parse("f:1,2;3").unwrap(), Variety::Flag { steps: vec![1, 2], n: 3 });
        assert_eq!(Variety::parse("f:2;5").unwrap(), g(2, 5));
        for bad in ["q:3", "g:4,4", "f:2,1;4", "g:2", "p:x"] {
            assert!(Variety::parse(bad).is_err(), "{bad}");
        }
        assert_eq!(g(1, 5).descriptor(), "p:4");
        let t = Variety::toric_from_json(r#"{"A": [[1,1,1],[0,1,2]]}"#).unwrap();
        match t {
            Variety::Toric(d) => assert_eq!(d.a.column(0), vec![Int::from(1), Int::from(1)]),
            _ => unreachable!(),
        }
        assert!(Variety::toric_from_json(r#"{"A": [[1,1],[0,1]]}"#).is_err());
    }
}
