//! Period series along the torus cycle: lattice sums for toric varieties,
//! constant terms on the big cell for Grassmannians, flags and complete
//! intersections, and the closed form for `G(2,4)` under each candidate
//! reading.

use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{binomial, enumerate_lattice_points, factorial, integer_kernel_basis, IntMatrix, Rat, SignPattern};
use crate::polyalg::{ExpVec, LaurentPoly};
use crate::varieties::{MonomialBasis, ToricData, Variety};
use crate::weyl::SparseSeries;

fn sign(k: i64) -> Rat {
    if k.rem_euclid(2) == 0 {
        Rat::one()
    } else {
        -Rat::one()
    }
}

fn factorials_of(l: &[i64], skip: &[usize]) -> Rat {
    l.iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .fold(Rat::one(), |acc, (_, &x)| acc * Rat::from_integer(factorial(x as u64)))
}

/// Stored exponent: `l` with `1` subtracted at every distinguished index.
fn shifted(l: &[i64], distinguished: &[usize]) -> ExpVec {
    let mut v = l.to_vec();
    for &d in distinguished {
        v[d] -= 1;
    }
    ExpVec::from_dense(&v)
}

/// `a_0^{-1} Σ_l (-1)^{l_0} (-l_0)!/Π_{i≠0} l_i! a^l` over the lattice of `A`.
pub fn toric_period_series(t: &ToricData, order: usize) -> Result<SparseSeries> {
    let lattice = integer_kernel_basis(&t.a);
    let points = enumerate_lattice_points(&lattice, &SignPattern::single(0), order)?;
    let n = t.ncols();
    let coeffs: Vec<(ExpVec, Rat)> = points
        .par_iter()
        .map(|l| {
            let c = sign(l[0]) * Rat::from_integer(factorial((-l[0]) as u64)) / factorials_of(l, &[0]);
            (shifted(l, &[0]), c)
        })
        .collect();
    let mut s = SparseSeries::new(n, vec![0], order as i64);
    for (e, c) in coeffs {
        s.insert(e, c);
    }
    Ok(s)
}

/// Hypersurface period on the big cell for the anticanonical degree.
pub fn chart_period_series(x: &Variety, order: usize) -> Result<SparseSeries> {
    let degrees = x.anticanonical_degrees()?;
    ci_period_series(x, &[degrees], order)
}

/// Shared data for constant-term evaluation of chart periods.
pub struct ChartPeriod {
    pub bases: Vec<MonomialBasis>,
    pub offsets: Vec<usize>,
    pub n: usize,
    /// Chart expansion of every variable.
    expansions: Vec<LaurentPoly>,
    /// `c_i z^{e_i}` for the distinguished monomial of each block.
    denominators: Vec<(Rat, Vec<i64>)>,
    weights: IntMatrix,
}

impl ChartPeriod {
    pub fn new(x: &Variety, multidegrees: &[Vec<usize>]) -> Result<Self> {
        let bases = x.ci_bases(multidegrees)?;
        if bases.iter().any(|b| !b.chart_distinguished) {
            return Err(Error::InvalidDistinguishedMonomial);
        }
        let chart = x.chart()?;
        let mut offsets = vec![];
        let mut n = 0;
        for b in &bases {
            offsets.push(n);
            n += b.len();
        }
        let mut expansions = Vec::with_capacity(n);
        let mut denominators = Vec::new();
        for b in &bases {
            denominators.push(chart.single_term(&b.monomials[0]).ok_or(Error::InvalidDistinguishedMonomial)?);
            expansions.extend(b.monomials.iter().map(|m| chart.expand(m)));
        }
        // Rows: torus weights (summed over components), then block indicators.
        let ambient = x.ambient().expect("homogeneous variety");
        let mut rows = vec![vec![0i64; n]; ambient + bases.len()];
        for (bi, (b, &off)) in bases.iter().zip(&offsets).enumerate() {
            for (j, m) in b.monomials.iter().enumerate() {
                for (r, w) in x.torus_weight(&b.coords, m).into_iter().enumerate() {
                    rows[r][off + j] = w;
                }
                rows[ambient + bi][off + j] = 1;
            }
        }
        Ok(ChartPeriod { bases, offsets, n, expansions, denominators, weights: IntMatrix::from_rows(&rows) })
    }

    /// Lattice points with nonpositive entries at the block starts and
    /// grading at most `order`.
    pub fn lattice_points(&self, order: usize) -> Result<Vec<Vec<i64>>> {
        let lattice = integer_kernel_basis(&self.weights);
        enumerate_lattice_points(&lattice, &SignPattern { nonpositive: self.offsets.clone() }, order)
    }

    /// `Π_i (-1)^{m_i} m_i!/Π l_j! · CT(Π P_j^{l_j} / Π C_i^{m_i})` with
    /// `m_i = -l_{start_i}`.
    pub fn coefficient(&self, l: &[i64]) -> Rat {
        let nv = self.expansions[0].nvars();
        let mut prefactor = Rat::one();
        let mut target = vec![0i64; nv];
        for ((&off, (c, e)), _) in self.offsets.iter().zip(&self.denominators).zip(&self.bases) {
            let m = -l[off];
            prefactor *= sign(m) * Rat::from_integer(factorial(m as u64)) / num_traits::pow(c.clone(), m as usize);
            for (t, x) in target.iter_mut().zip(e) {
                *t += m * x;
            }
        }
        prefactor /= factorials_of(l, &self.offsets);
        let mut prod = LaurentPoly::one(nv);
        for (j, &lj) in l.iter().enumerate() {
            if lj > 0 && !self.offsets.contains(&j) {
                prod = prod.multiply(&self.expansions[j].power(lj as u32));
            }
        }
        prefactor * prod.coefficient(&target)
    }

    pub fn series(&self, order: usize) -> Result<SparseSeries> {
        let points = self.lattice_points(order)?;
        let coeffs: Vec<(ExpVec, Rat)> =
            points.par_iter().map(|l| (shifted(l, &self.offsets), self.coefficient(l))).collect();
        let mut s = SparseSeries::new(self.n, self.offsets.clone(), order as i64);
        for (e, c) in coeffs {
            s.insert(e, c);
        }
        Ok(s)
    }
}

/// Period of a complete intersection (one factor per multidegree) by
/// constant terms on the big cell.
pub fn ci_period_series(x: &Variety, multidegrees: &[Vec<usize>], order: usize) -> Result<SparseSeries> {
    if matches!(x, Variety::Toric(_)) {
        return Err(Error::Unsupported("use toric_period_series".into()));
    }
    ChartPeriod::new(x, multidegrees)?.series(order)
}

/// What the symbol `n` in the binomial factor of the `G(2,4)` closed form
/// stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinomialReading {
    /// The summation index `-l_0`.
    SummationIndex,
    /// The ambient dimension `4`.
    AmbientDimension,
    /// The exponent `n_1` of `p13`.
    ExponentOfP13,
}

/// Sign applied to the closed form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SignReading {
    /// No sign.
    AsPrinted,
    /// `(-1)^{l_0}`, as in the toric formula.
    EulerSign,
    /// `(-1)^{n_2}`.
    ChartSign,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct G24Interpretation {
    pub binomial: BinomialReading,
    pub sign: SignReading,
}

impl fmt::Display for G24Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = match self.binomial {
            BinomialReading::SummationIndex => "n = -l0",
            BinomialReading::AmbientDimension => "n = 4",
            BinomialReading::ExponentOfP13 => "n = n1",
        };
        let s = match self.sign {
            SignReading::AsPrinted => "no sign",
            SignReading::EulerSign => "sign (-1)^l0",
            SignReading::ChartSign => "sign (-1)^n2",
        };
        write!(f, "{b}, {s}")
    }
}

/// All nine candidate readings.
pub fn g24_interpretations() -> Vec<G24Interpretation> {
    let mut out = vec![];
    for binomial in [BinomialReading::SummationIndex, BinomialReading::AmbientDimension, BinomialReading::ExponentOfP13] {
        for sign in [SignReading::AsPrinted, SignReading::EulerSign, SignReading::ChartSign] {
            out.push(G24Interpretation { binomial, sign });
        }
    }
    out
}

/// `(-l_0)!/Π_{i≠0} l_i! · C(n_5, n_5 + n_2 - n)` times the chosen sign, for
/// `l` indexed by the degree-4 basis of `G(2,4)`. `n_1`, `n_2`, `n_5` are the
/// exponents of `p13`, `p23`, `p34` in `Π_{i≠0} p^{l_i v_i}`.
pub fn closed_form_g24_coeff(basis: &MonomialBasis, l: &[i64], interp: G24Interpretation) -> Rat {
    let coord = |name: &str| basis.coords.iter().position(|(_, idx)| idx.to_string() == name).expect("G(2,4) basis");
    let (c13, c23, c34) = (coord("p13"), coord("p23"), coord("p34"));
    let mut total = ExpVec::zero();
    for (i, &li) in l.iter().enumerate().skip(1) {
        if li != 0 {
            total = total.add(&ExpVec::from_pairs(basis.monomials[i].iter().map(|(k, e)| (k, e * li))));
        }
    }
    let (n1, n2, n5) = (total.get(c13), total.get(c23), total.get(c34));
    let m = -l[0];
    let n = match interp.binomial {
        BinomialReading::SummationIndex => m,
        BinomialReading::AmbientDimension => 4,
        BinomialReading::ExponentOfP13 => n1,
    };
    let s = match interp.sign {
        SignReading::AsPrinted => Rat::one(),
        SignReading::EulerSign => sign(l[0]),
        SignReading::ChartSign => sign(n2),
    };
    let multinomial = Rat::from_integer(factorial(m as u64)) / factorials_of(l, &[0]);
    s * multinomial * Rat::from_integer(binomial(n5, n5 + n2 - n))
}

/// For each reading, whether it reproduces the chart coefficient on every
/// lattice point up to `order`, and the first mismatching point otherwise.
pub fn g24_interpretation_report(order: usize) -> Result<Vec<(G24Interpretation, Option<Vec<i64>>)>> {
    let x = Variety::Grassmannian { d: 2, n: 4 };
    let cp = ChartPeriod::new(&x, &[vec![4]])?;
    let points = cp.lattice_points(order)?;
    let truth: Vec<Rat> = points.par_iter().map(|l| cp.coefficient(l)).collect();
    let basis = &cp.bases[0];
    Ok(g24_interpretations()
        .into_iter()
        .map(|interp| {
            let miss = points
                .iter()
                .zip(&truth)
                .find(|(l, c)| closed_form_g24_coeff(basis, l, interp) != **c)
                .map(|(l, _)| l.clone());
            (interp, miss)
        })
        .collect())
}

/// Exponent vector as stored in a series, for a lattice vector.
pub fn stored_exponent(l: &[i64], distinguished: &[usize]) -> ExpVec {
    shifted(l, distinguished)
}

impl SparseSeries {
    /// Leading coefficient (of `a_0^{-1}` per block).
    pub fn leading(&self) -> Rat {
        let e = ExpVec::from_pairs(self.distinguished.iter().map(|&d| (d, -1)));
        self.get(&e)
    }

    /// True if every stored exponent sums to `-1` on each block.
    pub fn euler_homogeneous(&self) -> bool {
        let starts = &self.distinguished;
        self.coeffs.keys().all(|e| {
            (0..starts.len()).all(|b| {
                let end = starts.get(b + 1).copied().unwrap_or(self.n);
                e.iter().filter(|(i, _)| *i >= starts[b] && *i < end).map(|(_, x)| x).sum::<i64>() == -1
            })
        })
    }
}

/// Zero test helper used by tests and reports.
pub fn is_zero_series(s: &SparseSeries) -> bool {
    s.coeffs.values().all(Zero::is_zero)
}
