//! Polynomial differential forms on the Stiefel chart `z_{rs}`
//! (`1 <= r <= d`, `1 <= s <= n`), interior products, exterior derivative and
//! Lie derivatives, and the invariant volume form of `G(d,n)` by iterated
//! contraction and by its Plücker expansion.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::Rat;
use crate::polyalg::LaurentPoly;
use crate::systems::{sl_basis, SparseMatrix};
use crate::varieties::{plucker_indices, poly_det, sort_sign};

/// Largest `d·n` accepted by the volume-form constructions.
pub const VOLFORM_MAX_DN: usize = 12;

/// A `k`-form `Σ f_I dz_I` in `m` coordinates; `I` strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyForm {
    m: usize,
    k: usize,
    terms: BTreeMap<Vec<usize>, LaurentPoly>,
}

impl PolyForm {
    pub fn zero(m: usize, k: usize) -> Self {
        PolyForm { m, k, terms: BTreeMap::new() }
    }

    /// `dz_0 ∧ … ∧ dz_{m-1}`.
    pub fn top(m: usize) -> Self {
        let mut f = PolyForm::zero(m, m);
        f.add_term((0..m).collect(), LaurentPoly::one(m));
        f
    }

    pub fn nvars(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.k
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

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &LaurentPoly)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, idx: &[usize]) -> LaurentPoly {
        self.terms.get(idx).cloned().unwrap_or_else(|| LaurentPoly::zero(self.m))
    }

    /// Adds `f dz_{i_1} ∧ … ∧ dz_{i_k}` for any order of the indices.
    pub fn add_term(&mut self, idx: Vec<usize>, f: LaurentPoly) {
        assert_eq!(idx.len(), self.k, "form degree");
        let s = sort_sign(&idx);
        if s == 0 || f.is_zero() {
            return;
        }
        let mut sorted = idx;
        sorted.sort_unstable();
        let f = if s < 0 { -&f } else { f };
        match self.terms.entry(sorted) {
            Entry::Vacant(slot) => {
                slot.insert(f);
            }
            Entry::Occupied(mut slot) => {
                let sum = slot.get() + &f;
                if sum.is_zero() {
                    slot.remove();
                } else {
                    slot.insert(sum);
                }
            }
        }
    }

    pub fn add(&self, other: &PolyForm) -> PolyForm {
        assert_eq!((self.m, self.k), (other.m, other.k), "form shapes");
        let mut out = self.clone();
        for (i, f) in &other.terms {
            out.add_term(i.clone(), f.clone());
        }
        out
    }

    pub fn sub(&self, other: &PolyForm) -> PolyForm {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn scale(&self, c: &Rat) -> PolyForm {
        if c.is_zero() {
            return PolyForm::zero(self.m, self.k);
        }
        PolyForm { m: self.m, k: self.k, terms: self.terms.iter().map(|(i, f)| (i.clone(), f.scale(c))).collect() }
    }

    /// `Σ_I Σ_i ∂_i f_I dz_i ∧ dz_I`.
    pub fn exterior_derivative(&self) -> PolyForm {
        let mut out = PolyForm::zero(self.m, self.k + 1);
        for (idx, f) in &self.terms {
            for i in 0..self.m {
                let df = f.partial_derivative(i);
                if df.is_zero() {
                    continue;
                }
                let mut j = vec![i];
                j.extend(idx);
                out.add_term(j, df);
            }
        }
        out
    }

    /// `λ` with `self = λ·base`, if one exists.
    pub fn ratio_to(&self, base: &PolyForm) -> Option<Rat> {
        if self.is_zero() {
            return Some(Rat::zero());
        }
        let (idx, f) = base.terms.iter().next()?;
        let g = self.coefficient(idx);
        let (e, c) = f.terms().next()?;
        let lambda = g.coefficient(e) / c;
        (base.scale(&lambda) == *self).then_some(lambda)
    }
}

/// `Σ_i v_i ∂/∂z_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VectorField {
    pub m: usize,
    pub components: BTreeMap<usize, LaurentPoly>,
}

impl VectorField {
    pub fn new(m: usize, components: impl IntoIterator<Item = (usize, LaurentPoly)>) -> Self {
        let mut v = VectorField { m, components: BTreeMap::new() };
        for (i, f) in components {
            let slot = v.components.entry(i).or_insert_with(|| LaurentPoly::zero(m));
            *slot = &*slot + &f;
        }
        v.components.retain(|_, f| !f.is_zero());
        v
    }

    /// `∂/∂z_i`.
    pub fn coordinate(m: usize, i: usize) -> Self {
        VectorField::new(m, [(i, LaurentPoly::one(m))])
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        VectorField::new(self.m, self.components.clone().into_iter().chain(other.components.clone()))
    }
}

/// Interior product with Koszul signs.
pub fn contract(form: &PolyForm, v: &VectorField) -> Result<PolyForm> {
    if form.k == 0 {
        return Err(Error::DimensionMismatch("cannot contract a 0-form".into()));
    }
    let mut out = PolyForm::zero(form.m, form.k - 1);
    for (idx, f) in &form.terms {
        for (p, &i) in idx.iter().enumerate() {
            let Some(vi) = v.components.get(&i) else { continue };
            let mut rest = idx.clone();
            rest.remove(p);
            let term = f.multiply(vi);
            out.add_term(rest, if p % 2 == 0 { term } else { -&term });
        }
    }
    Ok(out)
}

/// `L_v = d ∘ ι_v + ι_v ∘ d`.
pub fn lie_derivative(form: &PolyForm, v: &VectorField) -> PolyForm {
    let second = contract(&form.exterior_derivative(), v).expect("positive degree");
    if form.k == 0 {
        return second;
    }
    contract(form, v).expect("positive degree").exterior_derivative().add(&second)
}

fn check_size(d: usize, n: usize) -> Result<()> {
    if d == 0 || d >= n {
        return Err(Error::InvalidDescriptor(format!("need 0 < d < n, got d={d}, n={n}")));
    }
    if d * n > VOLFORM_MAX_DN {
        return Err(Error::SizeCap(format!("d·n = {} exceeds {VOLFORM_MAX_DN}", d * n)));
    }
    Ok(())
}

/// Index of `z_{rs}` (0-based `r`, `s`).
pub fn stiefel_index(n: usize, r: usize, s: usize) -> usize {
    r * n + s
}

/// `u_{ij} = Σ_l z_{il} ∂/∂z_{jl}` (0-based `i`, `j`).
pub fn u_field(d: usize, n: usize, i: usize, j: usize) -> VectorField {
    let m = d * n;
    VectorField::new(m, (0..n).map(|l| (stiefel_index(n, j, l), LaurentPoly::var(m, stiefel_index(n, i, l)))))
}

/// Right action of `x ∈ gl_n`: `Σ_{r,l,s} z_{rl} x_{ls} ∂/∂z_{rs}`.
pub fn right_field(d: usize, n: usize, x: &SparseMatrix) -> VectorField {
    let m = d * n;
    VectorField::new(
        m,
        (0..d).flat_map(|r| {
            x.iter().map(move |(l, s, c)| {
                (stiefel_index(n, r, *s), LaurentPoly::var(m, stiefel_index(n, r, *l)).scale(c))
            })
        }),
    )
}

/// `ι_{u_d}⋯ι_{u_1} ω` with `ι_{u_j} = ι_{u_{dj}}⋯ι_{u_{1j}}`, so `u_{11}`
/// is applied first.
pub fn contracted_volume_form(d: usize, n: usize) -> Result<PolyForm> {
    check_size(d, n)?;
    let mut form = PolyForm::top(d * n);
    for j in 0..d {
        for i in 0..d {
            form = contract(&form, &u_field(d, n, i, j))?;
        }
    }
    Ok(form)
}

/// `Σ_{σ_1..σ_d} Π_r (-1)^{σ_r} p_{σ_r(I_0)} · Π_{r, s>d} dz_{r σ_r(s)}`
/// over coset representatives, i.e. `d`-subsets `I_r` with complements
/// `J_r` and `(-1)^{σ_r}` the sign of the shuffle `(I_r, J_r)`.
pub fn closed_form_volume(d: usize, n: usize) -> Result<PolyForm> {
    check_size(d, n)?;
    let m = d * n;
    let subsets = plucker_indices(d, n);
    let cosets: Vec<(i64, LaurentPoly, Vec<usize>)> = subsets
        .iter()
        .map(|i| {
            let comp: Vec<usize> = (1..=n).filter(|s| !i.contains(*s)).collect();
            let mut shuffle = i.0.clone();
            shuffle.extend(&comp);
            let minor: Vec<Vec<LaurentPoly>> = (0..d)
                .map(|r| i.0.iter().map(|&s| LaurentPoly::var(m, stiefel_index(n, r, s - 1))).collect())
                .collect();
            (sort_sign(&shuffle), poly_det(&minor), comp)
        })
        .collect();
    let mut out = PolyForm::zero(m, d * (n - d));
    let mut choice = vec![0usize; d];
    loop {
        let mut coeff = LaurentPoly::one(m);
        let mut sign = 1;
        let mut idx = Vec::with_capacity(d * (n - d));
        for (r, &c) in choice.iter().enumerate() {
            let (s, p, comp) = &cosets[c];
            sign *= s;
            coeff = coeff.multiply(p);
            idx.extend(comp.iter().map(|&l| stiefel_index(n, r, l - 1)));
        }
        out.add_term(idx, coeff.scale(&Rat::from_integer(sign.into())));
        let mut r = 0;
        loop {
            if r == d {
                return Ok(out);
            }
            choice[r] += 1;
            if choice[r] < cosets.len() {
                break;
            }
            choice[r] = 0;
            r += 1;
        }
    }
}

/// `±1` when `a = ±b` and both are nonzero.
pub fn global_sign(a: &PolyForm, b: &PolyForm) -> Option<i64> {
    if a.is_zero() || b.is_zero() {
        return None;
    }
    if a == b {
        Some(1)
    } else if *a == b.scale(&-Rat::one()) {
        Some(-1)
    } else {
        None
    }
}

/// Exact invariance data of the volume form of `G(d,n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VolformReport {
    pub d: usize,
    pub n: usize,
    pub degree: usize,
    pub terms: usize,
    /// Sign `s` with contracted = `s` · closed form.
    pub global_sign: Option<i64>,
    /// `sl_n` basis labels whose right-action field does not annihilate Ω.
    pub sl_failures: Vec<String>,
    /// `(i, j)` (1-based) with `ι_{u_ij} Ω != 0`.
    pub horizontal_failures: Vec<(usize, usize)>,
    /// Eigenvalue of `L_{u_ii}` on Ω for each `i`.
    pub diagonal_eigenvalues: Vec<Option<String>>,
    /// Eigenvalue of `L_{Σ u_ii}` on Ω.
    pub identity_eigenvalue: Option<String>,
    pub passed: bool,
}

pub fn volform_report(d: usize, n: usize) -> Result<VolformReport> {
    let omega = contracted_volume_form(d, n)?;
    let closed = closed_form_volume(d, n)?;
    let global_sign = global_sign(&omega, &closed);
    let sl_failures: Vec<String> = sl_basis(n)
        .into_iter()
        .filter(|(_, x)| !lie_derivative(&omega, &right_field(d, n, x)).is_zero())
        .map(|(label, _)| label)
        .collect();
    let mut horizontal_failures = vec![];
    for i in 0..d {
        for j in 0..d {
            if !contract(&omega, &u_field(d, n, i, j))?.is_zero() {
                horizontal_failures.push((i + 1, j + 1));
            }
        }
    }
    let diag: Vec<Option<Rat>> = (0..d).map(|i| lie_derivative(&omega, &u_field(d, n, i, i)).ratio_to(&omega)).collect();
    let identity = (1..d).fold(u_field(d, n, 0, 0), |acc, i| acc.add(&u_field(d, n, i, i)));
    let identity_eigenvalue = lie_derivative(&omega, &identity).ratio_to(&omega);
    let nrat = Rat::from_integer(n.into());
    let dn = Rat::from_integer((d * n).into());
    let passed = global_sign.is_some()
        && sl_failures.is_empty()
        && horizontal_failures.is_empty()
        && diag.iter().all(|e| e.as_ref() == Some(&nrat))
        && identity_eigenvalue.as_ref() == Some(&dn);
    let show = |e: &Option<Rat>| e.as_ref().map(crate::json::rat_to_string);
    Ok(VolformReport {
        d,
        n,
        degree: omega.degree(),
        terms: omega.len(),
        global_sign,
        sl_failures,
        horizontal_failures,
        diagonal_eigenvalues: diag.iter().map(show).collect(),
        identity_eigenvalue: show(&identity_eigenvalue),
        passed,
    })
}
