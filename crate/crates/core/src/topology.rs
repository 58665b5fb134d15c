//! Chern-class integrals on Grassmannians by torus localization: Euler
//! characteristics and `χ_y`-genera of Calabi–Yau complete intersections,
//! with a direct expansion in `ℤ[H]/H^{n+1}` for projective spaces.
//!
//! At the fixed point `S` (a `d`-subset of `1..n`) the tangent weights are
//! `x_j - x_i` (`i ∈ S`, `j ∉ S`) and `c_1(O(1))` restricts to `-Σ_{i∈S} x_i`.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{binomial, factorial, Int, Rat};
use crate::varieties::{plucker_indices, Variety};

/// Largest ambient dimension for the Euler and `χ_y` routines.
pub const TOPOLOGY_MAX_DIM: usize = 8;

/// Seeds of the two generic specializations every integral is run with.
const SPECIALIZATION_SEEDS: [u64; 2] = [0x51ec_1a11, 0x2b0c_c0de];

/// Power series in `t` truncated after `t^D`, as coefficients `0..=D`.
pub type TruncSeries = Vec<Rat>;

fn series_mul(a: &[Rat], b: &[Rat]) -> TruncSeries {
    let n = a.len();
    let mut out = vec![Rat::zero(); n];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(n - i) {
            out[i + j] += x * y;
        }
    }
    out
}

fn series_inv(a: &[Rat]) -> TruncSeries {
    assert!(!a[0].is_zero(), "series not invertible");
    let n = a.len();
    let mut out = vec![Rat::zero(); n];
    out[0] = a[0].recip();
    for k in 1..n {
        let mut s = Rat::zero();
        for j in 1..=k {
            s += &a[j] * &out[k - j];
        }
        out[k] = -s * &out[0];
    }
    out
}

/// `e^{c t}`.
fn series_exp(c: &Rat, len: usize) -> TruncSeries {
    (0..len).map(|k| num_traits::pow(c.clone(), k) / Rat::from_integer(factorial(k as u64))).collect()
}

fn series_linear(c0: Rat, c1: Rat, len: usize) -> TruncSeries {
    let mut s = vec![Rat::zero(); len];
    s[0] = c0;
    if len > 1 {
        s[1] = c1;
    }
    s
}

/// `(1 - e^{-ct})/(ct)` as a series in `t`; equals `1` at `c = 0`.
fn todd_inverse(c: &Rat, len: usize) -> TruncSeries {
    (0..len)
        .map(|k| {
            let s = if k % 2 == 0 { Rat::one() } else { -Rat::one() };
            s * num_traits::pow(c.clone(), k) / Rat::from_integer(factorial(k as u64 + 1))
        })
        .collect()
}

/// `1 + y e^{-ct}`.
fn one_plus_y_exp(y: &Rat, c: &Rat, len: usize) -> TruncSeries {
    let mut s: TruncSeries = series_exp(&-c, len).into_iter().map(|v| v * y).collect();
    s[0] += Rat::one();
    s
}

/// Torus-fixed point of `G(d,n)` under a numeric specialization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedPoint {
    /// 1-based subset `S`.
    pub subset: Vec<usize>,
    /// `c_1(O(1))` at `S`.
    pub hyperplane: Rat,
    pub tangent: Vec<Rat>,
}

/// Distinct integers in `[-50, 50]` from `seed`.
pub fn specialization(n: usize, seed: u64) -> Vec<Rat> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<i64> = Vec::with_capacity(n);
    while out.len() < n {
        let v = rng.gen_range(-50..=50);
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out.into_iter().map(|v| Rat::from_integer(v.into())).collect()
}

pub fn fixed_points(d: usize, n: usize, x: &[Rat]) -> Result<Vec<FixedPoint>> {
    let points: Vec<FixedPoint> = plucker_indices(d, n)
        .into_iter()
        .map(|s| {
            let tangent: Vec<Rat> = s
                .0
                .iter()
                .flat_map(|&i| (1..=n).filter(|j| !s.contains(*j)).map(move |j| &x[j - 1] - &x[i - 1]))
                .collect();
            let hyperplane = -s.0.iter().map(|&i| x[i - 1].clone()).sum::<Rat>();
            FixedPoint { subset: s.0, hyperplane, tangent }
        })
        .collect();
    if points.iter().any(|p| p.tangent.iter().any(Zero::is_zero)) {
        return Err(Error::Arithmetic("zero tangent weight; choose another specialization".into()));
    }
    Ok(points)
}

/// `Σ_S [t^{dim}] F_S(t) / Π w_S` with `F_S` a truncated series built from the
/// fixed-point data, checked for equality across two specializations.
pub fn localize_integral<F>(d: usize, n: usize, integrand: F) -> Result<Rat>
where
    F: Fn(&FixedPoint, usize) -> TruncSeries + Sync,
{
    if d == 0 || d >= n {
        return Err(Error::InvalidDescriptor(format!("need 0 < d < n, got d={d}, n={n}")));
    }
    let dim = d * (n - d);
    let mut values = Vec::new();
    for seed in SPECIALIZATION_SEEDS {
        let points = fixed_points(d, n, &specialization(n, seed))?;
        let terms: Vec<Rat> = points
            .par_iter()
            .map(|p| {
                let s = integrand(p, dim + 1);
                let euler: Rat = p.tangent.iter().product();
                &s[dim] / euler
            })
            .collect();
        values.push(terms.into_iter().sum::<Rat>());
    }
    if values[0] != values[1] {
        return Err(Error::Arithmetic(format!("localization depends on specialization: {} vs {}", values[0], values[1])));
    }
    Ok(values.swap_remove(0))
}

fn grassmannian(x: &Variety) -> Result<(usize, usize)> {
    match x {
        Variety::Grassmannian { d, n } => {
            let dim = d * (n - d);
            if dim > TOPOLOGY_MAX_DIM {
                return Err(Error::SizeCap(format!("dimension {dim} exceeds {TOPOLOGY_MAX_DIM}")));
            }
            Ok((*d, *n))
        }
        _ => Err(Error::Unsupported("topology routines need a Grassmannian or projective space".into())),
    }
}

fn check_ci(n: usize, degrees: &[usize], dim: usize) -> Result<()> {
    if degrees.iter().sum::<usize>() != n || degrees.iter().any(|&k| k == 0) {
        return Err(Error::DegreeMismatch(format!("degrees {degrees:?} must be positive and sum to {n}")));
    }
    if degrees.len() >= dim {
        return Err(Error::DegreeMismatch("complete intersection would be empty or a point set".into()));
    }
    Ok(())
}

fn to_int(r: Rat) -> Result<Int> {
    if r.is_integer() {
        Ok(r.to_integer())
    } else {
        Err(Error::Arithmetic(format!("non-integral value {r}")))
    }
}

/// `∫_X c_1(O(1))^{dim X}`.
pub fn hyperplane_degree(d: usize, n: usize) -> Result<Rat> {
    localize_integral(d, n, |p, len| {
        let mut s = vec![Rat::zero(); len];
        s[len - 1] = num_traits::pow(p.hyperplane.clone(), len - 1);
        s
    })
}

/// `χ(Y) = ∫_X c(TX) Π_k c_1(N_k)/c(N_k)` for `Y` cut out by sections of
/// `O(k)` for `k` in `degrees` (summing to `n`).
pub fn euler_char_ci(x: &Variety, degrees: &[usize]) -> Result<Int> {
    let (d, n) = grassmannian(x)?;
    check_ci(n, degrees, d * (n - d))?;
    let v = localize_integral(d, n, |p, len| {
        let mut s = series_linear(Rat::one(), Rat::zero(), len);
        for w in &p.tangent {
            s = series_mul(&s, &series_linear(Rat::one(), w.clone(), len));
        }
        for &k in degrees {
            let lam = &p.hyperplane * Rat::from_integer(k.into());
            s = series_mul(&s, &series_linear(Rat::zero(), lam.clone(), len));
            s = series_mul(&s, &series_inv(&series_linear(Rat::one(), lam, len)));
        }
        s
    })?;
    to_int(v)
}

/// Euler characteristic of the anticanonical hypersurface.
pub fn euler_char_cy(x: &Variety) -> Result<Int> {
    let (_, n) = grassmannian(x)?;
    euler_char_ci(x, &[n])
}

/// Value of `χ_y` at a numeric `y != -1`.
fn chi_y_at(d: usize, n: usize, degrees: &[usize], y: &Rat) -> Result<Rat> {
    localize_integral(d, n, |p, len| {
        let mut s = series_linear(Rat::one(), Rat::zero(), len);
        for w in &p.tangent {
            s = series_mul(&s, &one_plus_y_exp(y, w, len));
            s = series_mul(&s, &series_inv(&todd_inverse(w, len)));
        }
        for &k in degrees {
            let lam = &p.hyperplane * Rat::from_integer(k.into());
            // (1 - e^{-λt}) / (1 + y e^{-λt})
            let mut num: TruncSeries = series_exp(&-&lam, len).into_iter().map(|v| -v).collect();
            num[0] += Rat::one();
            s = series_mul(&s, &num);
            s = series_mul(&s, &series_inv(&one_plus_y_exp(y, &lam, len)));
        }
        s
    })
}

/// Coefficients of the polynomial through `(i, values[i])`, `i = 0..`.
fn interpolate(values: &[Rat]) -> Vec<Rat> {
    let k = values.len();
    let mut coeffs = vec![Rat::zero(); k];
    for (i, v) in values.iter().enumerate() {
        // basis polynomial Π_{j≠i} (y - j)/(i - j)
        let mut basis = vec![Rat::one()];
        let mut den = Rat::one();
        for j in 0..k {
            if j == i {
                continue;
            }
            let mut next = vec![Rat::zero(); basis.len() + 1];
            for (e, c) in basis.iter().enumerate() {
                next[e + 1] += c;
                next[e] -= c * Rat::from_integer(j.into());
            }
            basis = next;
            den *= Rat::from_integer(Int::from(i) - Int::from(j));
        }
        for (e, c) in basis.iter().enumerate() {
            coeffs[e] += c * v / &den;
        }
    }
    coeffs
}

fn exact_poly(values: Vec<Rat>, dim_y: usize) -> Result<Vec<Int>> {
    let coeffs = interpolate(&values);
    if coeffs[dim_y + 1..].iter().any(|c| !c.is_zero()) {
        return Err(Error::Arithmetic("χ_y has degree above dim Y".into()));
    }
    coeffs.into_iter().take(dim_y + 1).map(to_int).collect()
}

/// `χ_y(Y)` as coefficients of `y^0..y^{dim Y}`, from the exact values at
/// `y = 0..=dim X` and interpolation.
pub fn chi_y_genus_ci(x: &Variety, degrees: &[usize]) -> Result<Vec<Int>> {
    let (d, n) = grassmannian(x)?;
    let dim = d * (n - d);
    check_ci(n, degrees, dim)?;
    let values = (0..=dim).map(|y| chi_y_at(d, n, degrees, &Rat::from_integer(y.into()))).collect::<Result<Vec<_>>>()?;
    exact_poly(values, dim - degrees.len())
}

pub fn chi_y_genus_cy(x: &Variety) -> Result<Vec<Int>> {
    let (_, n) = grassmannian(x)?;
    chi_y_genus_ci(x, &[n])
}

/// Value of an integer polynomial at `y`.
pub fn eval_poly(coeffs: &[Int], y: i64) -> Int {
    coeffs.iter().rev().fold(Int::zero(), |acc, c| acc * Int::from(y) + c)
}

/// `c_p = (-1)^{dim} c_{dim-p}` for all `p`.
pub fn is_palindromic(coeffs: &[Int]) -> bool {
    let dim = coeffs.len() - 1;
    (0..=dim).all(|p| if dim % 2 == 0 { coeffs[p] == coeffs[dim - p] } else { coeffs[p] == -&coeffs[dim - p] })
}

/// `(1+H)^{n+1} Π_k k H/(1 + k H)` in `ℤ[H]/H^{n+1}`, read at `H^n`, for a
/// complete intersection in `P^n`.
pub fn pn_euler_oracle(n: usize, degrees: &[usize]) -> Result<Int> {
    check_ci(n + 1, degrees, n)?;
    let len = n + 1;
    let mut s: Vec<Int> = (0..len).map(|k| binomial(n as i64 + 1, k as i64)).collect();
    for &k in degrees {
        let k = Int::from(k);
        // k H Σ_j (-k H)^j
        let factor: Vec<Int> =
            (0..len).map(|e| if e == 0 { Int::zero() } else { &k * num_traits::pow(-&k, e - 1) }).collect();
        let mut next = vec![Int::zero(); len];
        for (i, a) in s.iter().enumerate() {
            for (j, b) in factor.iter().enumerate().take(len - i) {
                next[i + j] += a * b;
            }
        }
        s = next;
    }
    Ok(s[n].clone())
}

/// `χ_y` of a complete intersection in `P^n` from the Euler sequence,
/// `Q(H)^{n+1}/(1+y) · Π_k (1 - e^{-kH})/(1 + y e^{-kH})` with
/// `Q(w) = w(1 + y e^{-w})/(1 - e^{-w})`, expanded in `ℚ[H]/H^{n+1}`.
pub fn pn_chi_y_oracle(n: usize, degrees: &[usize]) -> Result<Vec<Int>> {
    check_ci(n + 1, degrees, n)?;
    let len = n + 1;
    let values: Vec<Rat> = (0..=n)
        .map(|y| {
            let y = Rat::from_integer(y.into());
            let one = Rat::one();
            let q = series_mul(&one_plus_y_exp(&y, &one, len), &series_inv(&todd_inverse(&one, len)));
            let mut s = series_linear((&one + &y).recip(), Rat::zero(), len);
            for _ in 0..=n {
                s = series_mul(&s, &q);
            }
            for &k in degrees {
                let k = Rat::from_integer(k.into());
                let mut num: TruncSeries = series_exp(&-&k, len).into_iter().map(|v| -v).collect();
                num[0] += Rat::one();
                s = series_mul(&s, &num);
                s = series_mul(&s, &series_inv(&one_plus_y_exp(&y, &k, len)));
            }
            s[n].clone()
        })
        .collect();
    exact_poly(values, n - degrees.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::varieties::degree_grassmannian;

    fn p(n: usize) -> Variety {
        Variety::Grassmannian { d: 1, n: n + 1 }
    }

    fn ints(v: &[i64]) -> Vec<Int> {
        v.iter().map(|&x| Int::from(x)).collect()
    }

    #[test]
    fn series_helpers() {
        let e = series_exp(&rat(1), 4);
        let inv = series_inv(&e);
        assert_eq!(series_mul(&e, &inv), vec![rat(1), rat(0), rat(0), rat(0)]);
        assert_eq!(interpolate(&[rat(1), rat(3), rat(7)]), vec![rat(1), rat(1), rat(1)]);
    }

    #[test]
    fn degrees_by_localization() {
        for n in 2..=6 {
            assert_eq!(hyperplane_degree(1, n).unwrap(), rat(1));
        }
        for (d, n) in [(2, 4), (2, 5), (3, 6), (2, 6)] {
            assert_eq!(hyperplane_degree(d, n).unwrap(), Rat::from_integer(degree_grassmannian(d, n)));
        }
        assert_eq!(hyperplane_degree(2, 4).unwrap(), rat(2));
    }

    #[test]
    fn specializations_differ() {
        assert_ne!(specialization(5, SPECIALIZATION_SEEDS[0]), specialization(5, SPECIALIZATION_SEEDS[1]));
        for seed in 0..5 {
            let x = specialization(4, seed);
            let pts = fixed_points(2, 4, &x).unwrap();
            assert_eq!(pts.len(), 6);
            assert!(pts.iter().all(|p| p.tangent.len() == 4));
        }
    }

    #[test]
    fn euler_characteristics() {
        assert_eq!(euler_char_cy(&p(2)).unwrap(), Int::from(0));
        assert_eq!(euler_char_cy(&p(4)).unwrap(), Int::from(-200));
        assert_eq!(euler_char_cy(&p(3)).unwrap(), Int::from(24));
        assert_eq!(pn_euler_oracle(4, &[5]).unwrap(), Int::from(-200));
        assert_eq!(pn_euler_oracle(2, &[3]).unwrap(), Int::from(0));
        let g24 = euler_char_cy(&Variety::Grassmannian { d: 2, n: 4 }).unwrap();
        assert_eq!(g24, euler_char_ci(&p(5), &[2, 4]).unwrap());
        assert_eq!(g24, pn_euler_oracle(5, &[2, 4]).unwrap());
    }

    #[test]
    fn chi_y() {
        assert_eq!(chi_y_genus_cy(&p(4)).unwrap(), ints(&[0, 100, -100, 0]));
        assert_eq!(pn_chi_y_oracle(4, &[5]).unwrap(), ints(&[0, 100, -100, 0]));
        let cubic = chi_y_genus_cy(&p(2)).unwrap();
        assert_eq!(cubic, ints(&[0, 0]));
        let k3 = chi_y_genus_cy(&p(3)).unwrap();
        assert_eq!(k3, ints(&[2, -20, 2]));
        for (x, deg) in [(p(2), vec![3]), (p(3), vec![4]), (p(4), vec![5]), (p(5), vec![2, 4])] {
            let c = chi_y_genus_ci(&x, &deg).unwrap();
            assert!(is_palindromic(&c));
            assert_eq!(eval_poly(&c, -1), euler_char_ci(&x, &deg).unwrap());
        }
        let g = chi_y_genus_cy(&Variety::Grassmannian { d: 2, n: 4 }).unwrap();
        assert_eq!(g, chi_y_genus_ci(&p(5), &[2, 4]).unwrap());
    }

    #[test]
    fn errors() {
        assert!(matches!(euler_char_cy(&p(9)), Err(Error::SizeCap(_))));
        assert!(matches!(euler_char_ci(&p(4), &[2, 2]), Err(Error::DegreeMismatch(_))));
        assert!(matches!(
            euler_char_cy(&Variety::Flag { steps: vec![1, 2], n: 3 }),
            Err(Error::Unsupported(_))
        ));
    }
}
