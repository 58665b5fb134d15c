//! Exact integer and rational linear algebra.
//!
//! Integer kernels are computed with unimodular row operations followed by a
//! Hermite normal form of the kernel rows, so every returned basis is a true
//! lattice basis of `{v in Z^n : Mv = 0}`. Rational kernels use reduced row
//! echelon form.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Int = BigInt;
pub type Rat = BigRational;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(Int::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn factorial(n: u64) -> Int {
    (1..=n).fold(Int::one(), |acc, k| acc * Int::from(k))
}

/// Binomial coefficient with the convention C(n, k) = 0 for k < 0 or k > n.
pub fn binomial(n: i64, k: i64) -> Int {
    if n < 0 || k < 0 || k > n {
        return Int::zero();
    }
    let k = k.min(n - k);
    let mut acc = Int::one();
    for i in 0..k {
        acc = acc * Int::from(n - i) / Int::from(i + 1);
    }
    acc
}

/// Falling factorial m (m-1) ... (m-k+1); valid for negative m.
pub fn falling_factorial(m: i64, k: u64) -> Int {
    (0..k as i64).fold(Int::one(), |acc, i| acc * Int::from(m - i))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![Int::zero(); rows * cols] }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = IntMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            for (j, v) in r.iter().enumerate() {
                m.data[i * cols + j] = Int::from(*v);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Int::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Int {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Int) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Int] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Int> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn mul_vec(&self, v: &[Int]) -> Vec<Int> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn to_rat(&self) -> RatMatrix {
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| Rat::from_integer(x.clone())).collect(),
        }
    }

    /// Permutes columns: column `k` of the result is column `perm[k]` of `self`.
    pub fn permute_columns(&self, perm: &[usize]) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows, perm.len());
        for i in 0..self.rows {
            for (k, &j) in perm.iter().enumerate() {
                m.set(i, k, self.get(i, j).clone());
            }
        }
        m
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn determinant(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        if n == 0 {
            return Int::one();
        }
        let mut a: Vec<Vec<Int>> = (0..n).map(|i| self.row(i).to_vec()).collect();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<Rat>>) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        let n = rows.len();
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r);
        }
        RatMatrix { rows: n, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Rat::one();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    /// Stacks the rows of `other` below `self`.
    pub fn vstack(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        RatMatrix { rows: self.rows + other.rows, cols: self.cols, data }
    }
}

/// Reduced row echelon form. Returns the nonzero rows and the pivot columns.
pub fn rref(m: &RatMatrix) -> (RatMatrix, Vec<usize>) {
    let mut a = m.row_vecs();
    let cols = m.cols();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&pivot_row) {
                if !y.is_zero() {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (RatMatrix::from_rows(cols, a), pivots)
}

pub fn rank(m: &RatMatrix) -> usize {
    m.cols() - rational_nullspace(m).rows()
}

/// Basis of `{v : Mv = 0}` over the rationals, one basis vector per row, in
/// reduced row echelon form.
///
/// The kernel is first computed modulo word-size primes and lifted by
/// rational reconstruction. A lifted basis is accepted only after `Mv = 0`
/// holds exactly for every vector; since the kernel modulo a prime is never
/// smaller than the rational kernel, an accepted basis spans it.
pub fn rational_nullspace(m: &RatMatrix) -> RatMatrix {
    nullspace_multimodular(m).unwrap_or_else(|| nullspace_direct(m))
}

/// Plain rational elimination.
pub fn nullspace_direct(m: &RatMatrix) -> RatMatrix {
    let (r, pivots) = rref(m);
    let cols = m.cols();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    let basis: Vec<Vec<Rat>> = free
        .iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); cols];
            v[f] = Rat::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -r.get(i, f).clone();
            }
            v
        })
        .collect();
    rref(&RatMatrix::from_rows(cols, basis)).0
}

const MAX_PRIMES: usize = 64;

fn nullspace_multimodular(m: &RatMatrix) -> Option<RatMatrix> {
    let cols = m.cols();
    // Integer rows with the same kernel.
    let int_rows: Vec<Vec<Int>> = m
        .row_vecs()
        .iter()
        .filter(|r| r.iter().any(|x| !x.is_zero()))
        .map(|r| {
            let l = r.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
            r.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect()
        })
        .collect();
    if int_rows.is_empty() {
        return Some(RatMatrix::identity(cols));
    }
    let mut best: Option<(Vec<usize>, Vec<Vec<Int>>, Int)> = None;
    let mut prime = 1u64 << 62;
    for _ in 0..MAX_PRIMES {
        prime = prev_prime(prime);
        let (pivots, reduced) = rref_mod(&int_rows, cols, prime);
        let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
        // Entry (f, i): coordinate `pivots[i]` of the kernel vector for free column f.
        let residues: Vec<Vec<u64>> =
            free.iter().map(|&f| (0..pivots.len()).map(|i| (prime - reduced[i][f]) % prime).collect()).collect();
        let accept = match &best {
            None => true,
            Some((bp, _, _)) => {
                if pivots.len() > bp.len() || (pivots.len() == bp.len() && pivots < *bp) {
                    best = None;
                    true
                } else {
                    pivots == *bp
                }
            }
        };
        if !accept {
            continue;
        }
        let p = Int::from(prime);
        best = Some(match best.take() {
            None => (pivots.clone(), residues.iter().map(|r| r.iter().map(|&x| Int::from(x)).collect()).collect(), p),
            Some((bp, acc, modulus)) => {
                let inv = mod_inverse(&(&modulus % &p), &p);
                let combined = acc
                    .iter()
                    .zip(&residues)
                    .map(|(ra, rb)| {
                        ra.iter()
                            .zip(rb)
                            .map(|(a, &b)| {
                                let t = ((Int::from(b) - a) * &inv).mod_floor(&p);
                                a + &modulus * t
                            })
                            .collect()
                    })
                    .collect();
                (bp, combined, &modulus * &p)
            }
        });
        let (bp, acc, modulus) = best.as_ref().expect("set above");
        let free: Vec<usize> = (0..cols).filter(|c| !bp.contains(c)).collect();
        let mut vectors = Vec::with_capacity(free.len());
        let mut ok = true;
        'outer: for (k, &f) in free.iter().enumerate() {
            let mut v = vec![Rat::zero(); cols];
            v[f] = Rat::one();
            for (i, &pc) in bp.iter().enumerate() {
                match rational_reconstruction(&acc[k][i], modulus) {
                    Some(x) => v[pc] = x,
                    None => {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            vectors.push(v);
        }
        if ok && vectors.iter().all(|v| annihilates(&int_rows, v)) {
            return Some(rref(&RatMatrix::from_rows(cols, vectors)).0);
        }
    }
    None
}

fn annihilates(rows: &[Vec<Int>], v: &[Rat]) -> bool {
    let l = v.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
    let w: Vec<Int> = v.iter().map(|x| (x * Rat::from_integer(l.clone())).to_integer()).collect();
    rows.iter().all(|r| r.iter().zip(&w).filter(|(_, y)| !y.is_zero()).map(|(x, y)| x * y).sum::<Int>().is_zero())
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn prev_prime(n: u64) -> u64 {
    let mut k = n - 1;
    while !is_prime_u64(k) {
        k -= 1;
    }
    k
}

/// Reduced row echelon form modulo `p`: pivot columns and the first
/// `pivots.len()` reduced rows.
fn rref_mod(rows: &[Vec<Int>], cols: usize, p: u64) -> (Vec<usize>, Vec<Vec<u64>>) {
    let pi = Int::from(p);
    let mut a: Vec<Vec<u64>> = rows
        .iter()
        .map(|r| r.iter().map(|x| x.mod_floor(&pi).to_u64().expect("reduced")).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == a.len() {
            break;
        }
        let Some(k) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, k);
        let inv = pow_mod(a[r][c], p - 2, p);
        for x in a[r].iter_mut() {
            *x = mul_mod(*x, inv, p);
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c] == 0 {
                continue;
            }
            let f = row[c];
            for (x, &y) in row.iter_mut().zip(&pivot_row) {
                if y != 0 {
                    *x = (*x + p - mul_mod(f, y, p)) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    (pivots, a)
}

fn mod_inverse(a: &Int, m: &Int) -> Int {
    let e = a.extended_gcd(m);
    e.x.mod_floor(m)
}

/// `r/s` with `r ≡ s·a (mod m)` and `|r|, s <= sqrt(m/2)`, if one exists.
fn rational_reconstruction(a: &Int, m: &Int) -> Option<Rat> {
    let bound = (m / Int::from(2)).sqrt();
    let (mut r0, mut r1) = (m.clone(), a.mod_floor(m));
    let (mut s0, mut s1) = (Int::zero(), Int::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let s2 = &s0 - &q * &s1;
        r0 = std::mem::replace(&mut r1, r2);
        s0 = std::mem::replace(&mut s1, s2);
    }
    if s1.is_zero() || s1.abs() > bound {
        return None;
    }
    Some(Rat::new(r1, s1))
}

/// True when the row spaces of `a` and `b` coincide.
pub fn same_row_space(a: &RatMatrix, b: &RatMatrix) -> bool {
    rref(a).0 == rref(b).0
}

/// Row-style Hermite normal form of the lattice spanned by `rows`: echelon,
/// positive pivots, entries above each pivot reduced into `[0, pivot)`. Zero
/// rows are dropped.
pub fn hermite_normal_form(rows: &[Vec<Int>]) -> Vec<Vec<Int>> {
    let Some(width) = rows.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut a: Vec<Vec<Int>> = rows.to_vec();
    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..width {
        if r == a.len() {
            break;
        }
        loop {
            // Smallest nonzero entry in this column becomes the pivot candidate.
            let best = (r..a.len())
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
            let Some(best) = best else { break };
            a.swap(r, best);
            let mut done = true;
            for i in r + 1..a.len() {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                let pivot = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pivot) {
                    *x -= &q * y;
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -x.clone();
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    a.truncate(r);
    for (i, &c) in pivot_cols.iter().enumerate() {
        let pivot = a[i].clone();
        for row in a.iter_mut().take(i) {
            let q = row[c].div_floor(&pivot[c]);
            if !q.is_zero() {
                for (x, y) in row.iter_mut().zip(&pivot) {
                    *x -= &q * y;
                }
            }
        }
    }
    a
}

/// A lattice given by a basis of integer vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBasis {
    pub dim: usize,
    pub vectors: Vec<Vec<Int>>,
}

impl LatticeBasis {
    pub fn new(dim: usize, vectors: Vec<Vec<Int>>) -> Self {
        for v in &vectors {
            assert_eq!(v.len(), dim, "basis vector has wrong length");
        }
        LatticeBasis { dim, vectors }
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    /// Membership in the integer span of the basis.
    pub fn contains(&self, v: &[Int]) -> bool {
        contains_hnf(&hermite_normal_form(&self.vectors), v)
    }
}

fn contains_hnf(hnf: &[Vec<Int>], v: &[Int]) -> bool {
    let mut w = v.to_vec();
    for row in hnf {
        let c = row.iter().position(|x| !x.is_zero()).expect("hnf rows are nonzero");
        if w[..c].iter().any(|x| !x.is_zero()) {
            return false;
        }
        let (q, rem) = w[c].div_rem(&row[c]);
        if !rem.is_zero() {
            return false;
        }
        for (x, y) in w.iter_mut().zip(row) {
            *x -= &q * y;
        }
    }
    w.iter().all(Zero::is_zero)
}

/// Lattice basis of `{v in Z^cols : Mv = 0}`.
pub fn integer_kernel_basis(m: &IntMatrix) -> LatticeBasis {
    let (r, c) = (m.rows(), m.cols());
    // Each row is (column j of M | e_j); unimodular row operations on the
    // first r entries keep the second block a basis of Z^c.
    let mut w: Vec<Vec<Int>> = (0..c)
        .map(|j| {
            let mut row = m.column(j);
            row.extend((0..c).map(|k| if k == j { Int::one() } else { Int::zero() }));
            row
        })
        .collect();
    let mut p = 0;
    for k in 0..r {
        if p == c {
            break;
        }
        loop {
            let best = (p..c)
                .filter(|&i| !w[i][k].is_zero())
                .min_by(|&i, &j| w[i][k].abs().cmp(&w[j][k].abs()));
            let Some(best) = best else { break };
            w.swap(p, best);
            let mut done = true;
            for i in p + 1..c {
                if w[i][k].is_zero() {
                    continue;
                }
                let q = w[i][k].div_floor(&w[p][k]);
                let pivot = w[p].clone();
                for (x, y) in w[i].iter_mut().zip(&pivot) {
                    *x -= &q * y;
                }
                if !w[i][k].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if !w[p][k].is_zero() {
            p += 1;
        }
    }
    let kernel: Vec<Vec<Int>> = w[p..].iter().map(|row| row[r..].to_vec()).collect();
    LatticeBasis::new(c, hermite_normal_form(&kernel))
}

/// Sign constraints for lattice enumeration: the listed indices must be
/// nonpositive, every other index nonnegative. The grading of a vector is the
/// sum of its entries outside the listed indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignPattern {
    pub nonpositive: Vec<usize>,
}

impl SignPattern {
    pub fn single(index: usize) -> Self {
        SignPattern { nonpositive: vec![index] }
    }

    pub fn admits(&self, v: &[i64]) -> bool {
        v.iter().enumerate().all(|(i, &x)| {
            if self.nonpositive.contains(&i) {
                x <= 0
            } else {
                x >= 0
            }
        })
    }

    pub fn grading(&self, v: &[i64]) -> i64 {
        v.iter()
            .enumerate()
            .filter(|(i, _)| !self.nonpositive.contains(i))
            .map(|(_, x)| *x)
            .sum()
    }
}

/// All vectors of the lattice satisfying `pattern` with grading at most
/// `cap`, sorted by grading and then lexicographically.
///
/// The free coordinates are enumerated depth-first as multisets with running
/// constraint sums; the distinguished coordinates are then solved for. The
/// distinguished coordinates must be determined by the others, which fails
/// with [`Error::DegenerateSignPattern`] otherwise.
pub fn enumerate_lattice_points(
    basis: &LatticeBasis,
    pattern: &SignPattern,
    cap: usize,
) -> Result<Vec<Vec<i64>>> {
    let n = basis.dim;
    let dist = &pattern.nonpositive;
    if dist.iter().any(|&d| d >= n) {
        return Err(Error::DimensionMismatch("sign pattern index out of range".into()));
    }
    let hnf = hermite_normal_form(&basis.vectors);

    // Integer constraint rows C with C l = 0 exactly on the rational span.
    let bmat = RatMatrix::from_rows(
        n,
        basis.vectors.iter().map(|v| v.iter().map(|x| Rat::from_integer(x.clone())).collect()).collect(),
    );
    let constraints: Vec<Vec<i64>> = if basis.vectors.is_empty() {
        RatMatrix::identity(n).row_vecs().iter().map(|r| integer_row(r)).collect()
    } else {
        rational_nullspace(&bmat).row_vecs().iter().map(|r| integer_row(r)).collect()
    };
    let nc = constraints.len();

    // Solve C_D x = -s using |D| independent rows of C_D.
    let cd = RatMatrix::from_rows(
        dist.len(),
        constraints.iter().map(|row| dist.iter().map(|&d| rat(row[d])).collect()).collect(),
    );
    let (_, piv_rows) = rref(&cd.transpose());
    if piv_rows.len() < dist.len() {
        return Err(Error::DegenerateSignPattern);
    }
    let square = RatMatrix::from_rows(
        dist.len(),
        piv_rows.iter().map(|&r| cd.row(r).to_vec()).collect(),
    );
    let inverse = invert(&square).ok_or(Error::DegenerateSignPattern)?;
    // Integer form of the inverse: inverse = inv_num / inv_den.
    let inv_den = (0..inverse.rows())
        .flat_map(|i| (0..inverse.cols()).map(move |j| (i, j)))
        .fold(Int::one(), |acc, (i, j)| acc.lcm(inverse.get(i, j).denom()));
    let inv_num: Vec<Vec<i64>> = (0..inverse.rows())
        .map(|i| {
            (0..inverse.cols())
                .map(|j| {
                    (inverse.get(i, j) * Rat::from_integer(inv_den.clone()))
                        .to_integer()
                        .to_i64()
                        .expect("inverse entry fits i64")
                })
                .collect()
        })
        .collect();
    let inv_den = inv_den.to_i64().expect("inverse denominator fits i64");

    // A saturated lattice is cut out by the constraints alone.
    let saturated = {
        let cm = IntMatrix::from_rows(&constraints);
        hermite_normal_form(&integer_kernel_basis(&cm).vectors) == hnf
    };

    let free: Vec<usize> = (0..n).filter(|i| !dist.contains(i)).collect();
    let cols: Vec<Vec<i64>> = free.iter().map(|&i| constraints.iter().map(|r| r[i]).collect()).collect();

    let mut out = Vec::new();
    let mut counts = vec![0i64; free.len()];
    let mut sums = vec![0i64; nc];

    let mut check = |counts: &[i64], sums: &[i64], out: &mut Vec<Vec<i64>>| {
        let mut xs = Vec::with_capacity(inv_num.len());
        for row in &inv_num {
            let num: i64 = row.iter().zip(&piv_rows).map(|(a, &r)| -a * sums[r]).sum();
            if num % inv_den != 0 || num / inv_den > 0 {
                return;
            }
            xs.push(num / inv_den);
        }
        for (r, row) in constraints.iter().enumerate() {
            let total: i64 = sums[r] + dist.iter().zip(&xs).map(|(&d, x)| row[d] * x).sum::<i64>();
            if total != 0 {
                return;
            }
        }
        let mut l = vec![0i64; n];
        for (k, &i) in free.iter().enumerate() {
            l[i] = counts[k];
        }
        for (&d, x) in dist.iter().zip(&xs) {
            l[d] = *x;
        }
        if saturated || contains_hnf(&hnf, &l.iter().map(|&x| Int::from(x)).collect::<Vec<_>>()) {
            out.push(l);
        }
    };

    fn dfs(
        start: usize,
        remaining: usize,
        cols: &[Vec<i64>],
        counts: &mut Vec<i64>,
        sums: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
        check: &mut dyn FnMut(&[i64], &[i64], &mut Vec<Vec<i64>>),
    ) {
        if remaining == 0 {
            return;
        }
        for k in start..cols.len() {
            counts[k] += 1;
            for (s, c) in sums.iter_mut().zip(&cols[k]) {
                *s += c;
            }
            check(counts, sums, out);
            dfs(k, remaining - 1, cols, counts, sums, out, check);
            counts[k] -= 1;
            for (s, c) in sums.iter_mut().zip(&cols[k]) {
                *s -= c;
            }
        }
    }

    check(&counts, &sums, &mut out);
    dfs(0, cap, &cols, &mut counts, &mut sums, &mut out, &mut check);

    out.sort_by(|a, b| pattern.grading(a).cmp(&pattern.grading(b)).then_with(|| a.cmp(b)));
    Ok(out)
}

fn integer_row(r: &[Rat]) -> Vec<i64> {
    let lcm = r.iter().fold(Int::one(), |acc, x| acc.lcm(x.denom()));
    r.iter()
        .map(|x| (x * Rat::from_integer(lcm.clone())).to_integer().to_i64().expect("constraint entry fits i64"))
        .collect()
}

/// Inverse of a square rational matrix, or `None` when singular.
pub fn invert(m: &RatMatrix) -> Option<RatMatrix> {
    let n = m.rows();
    assert_eq!(n, m.cols());
    let mut aug = RatMatrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, m.get(i, j).clone());
        }
        aug.set(i, n + i, Rat::one());
    }
    let (r, pivots) = rref(&aug);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    let mut inv = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv.set(i, j, r.get(i, n + j).clone());
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn multimodular_nullspace_matches_direct(
            rows in prop::collection::vec(prop::collection::vec((-9i64..10, 1i64..4), 6), 1..7),
            dup in 0usize..3,
        ) {
            let mut rs: Vec<Vec<Rat>> = rows.iter().map(|r| r.iter().map(|&(a, b)| rat_frac(a, b)).collect()).collect();
            // Force some dependence.
            for k in 0..dup.min(rs.len()) {
                let combo: Vec<Rat> = rs[0].iter().zip(&rs[k]).map(|(x, y)| x * rat(3) - y).collect();
                rs.push(combo);
            }
            let m = RatMatrix::from_rows(6, rs);
            prop_assert_eq!(rational_nullspace(&m), nullspace_direct(&m));
        }
    }

    #[test]
    fn reconstruction_of_fractions() {
        let m = Int::from(1_000_000_007i64) * Int::from(998_244_353i64);
        let target = rat_frac(-355, 113);
        let a = (Int::from(-355) * mod_inverse(&Int::from(113), &m)).mod_floor(&m);
        assert_eq!(rational_reconstruction(&a, &m), Some(target));
        assert!(is_prime_u64(prev_prime(1 << 62)));
    }

    #[test]
    fn large_entry_nullspace() {
        // Kernel vector with entries far beyond a single prime.
        let big = Int::from(10).pow(40u32) + Int::from(7);
        let rows = vec![vec![Rat::from_integer(big.clone()), rat(-1), rat(0)], vec![rat(0), rat(0), rat(1)]];
        let m = RatMatrix::from_rows(3, rows);
        let k = rational_nullspace(&m);
        assert_eq!(k.rows(), 1);
        assert_eq!(k.get(0, 1), &Rat::from_integer(big));
    }

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| Int::from(x)).collect()
    }

    #[test]
    fn kernel_of_small_matrix() {
        let m = IntMatrix::from_rows(&[vec![1, 1, 1], vec![0, 1, 2]]);
        let k = integer_kernel_basis(&m);
        assert_eq!(k.vectors, vec![ints(&[1, -2, 1])]);
    }

    #[test]
    fn kernel_matches_brute_force_box() {
        // Every integer solution in a small box is in the span of the basis.
        let m = IntMatrix::from_rows(&[vec![1, 1, 1], vec![0, 1, 2]]);
        let k = integer_kernel_basis(&m);
        for a in -4..=4 {
            for b in -4..=4 {
                for c in -4..=4 {
                    let v = ints(&[a, b, c]);
                    let in_kernel = m.mul_vec(&v).iter().all(Zero::is_zero);
                    assert_eq!(in_kernel, k.contains(&v), "{a} {b} {c}");
                }
            }
        }
    }

    #[test]
    fn kernel_of_injective_map_is_empty() {
        assert!(integer_kernel_basis(&IntMatrix::identity(3)).vectors.is_empty());
    }

    #[test]
    fn kernel_saturation_with_non_unit_entries() {
        // 2x + 4y + 6z = 0 has kernel basis of index 1 in Z^3.
        let m = IntMatrix::from_rows(&[vec![2, 4, 6]]);
        let k = integer_kernel_basis(&m);
        assert_eq!(k.rank(), 2);
        assert!(k.contains(&ints(&[2, -1, 0])));
        assert!(k.contains(&ints(&[1, 1, -1])));
        assert!(!k.contains(&ints(&[1, 0, 0])));
    }

    #[test]
    fn nullspace_examples() {
        let m = RatMatrix::from_rows(2, vec![vec![rat(1), rat(1)]]);
        let ns = rational_nullspace(&m);
        assert_eq!(ns.rows(), 1);
        assert_eq!(ns.row(0), &[rat(1), rat(-1)]);
        assert_eq!(rational_nullspace(&RatMatrix::identity(2)).rows(), 0);
    }

    #[test]
    fn determinant_bareiss() {
        let m = IntMatrix::from_rows(&[vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 1]]);
        assert_eq!(m.determinant(), Int::from(2 * (3 - 2) + (1 - 3)));
        let z = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]);
        assert_eq!(z.determinant(), Int::from(-1));
    }

    #[test]
    fn enumerate_p1_quadric_lattice() {
        let basis = LatticeBasis::new(3, vec![ints(&[-2, 1, 1])]);
        let pts = enumerate_lattice_points(&basis, &SignPattern::single(0), 4).unwrap();
        assert_eq!(pts, vec![vec![0, 0, 0], vec![-2, 1, 1], vec![-4, 2, 2]]);
        let zero = enumerate_lattice_points(&basis, &SignPattern::single(0), 0).unwrap();
        assert_eq!(zero, vec![vec![0, 0, 0]]);
    }

    #[test]
    fn hnf_is_canonical() {
        let a = hermite_normal_form(&[ints(&[2, 4]), ints(&[1, 3])]);
        let b = hermite_normal_form(&[ints(&[1, 3]), ints(&[3, 7])]);
        assert_eq!(a, b);
        assert_eq!(a, vec![ints(&[1, 1]), ints(&[0, 2])]);
    }

    #[test]
    fn binomial_conventions() {
        assert_eq!(binomial(5, 2), Int::from(10));
        assert_eq!(binomial(2, 3), Int::zero());
        assert_eq!(binomial(2, -1), Int::zero());
        assert_eq!(falling_factorial(-1, 2), Int::from(2));
        assert_eq!(falling_factorial(2, 3), Int::zero());
    }
}
