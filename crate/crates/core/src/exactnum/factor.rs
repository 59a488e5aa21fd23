//! Integer and Gaussian-integer factorization.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactnum::gaussian::GaussianRational;
use crate::scalar::Rational;

const TRIAL_LIMIT: u32 = 1_000_000;

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        (2..=n).filter(|&k| sieve[k]).map(|k| k as u32).collect()
    })
}

fn is_probable_prime(n: &BigInt) -> bool {
    if *n < BigInt::from(2) {
        return false;
    }
    for &p in &small_primes()[..25] {
        let p = BigInt::from(p);
        if *n == p {
            return true;
        }
        if (n % &p).is_zero() {
            return false;
        }
    }
    let one = BigInt::one();
    let n1 = n - &one;
    let s = n1.trailing_zeros().unwrap_or(0);
    let d = &n1 >> s;
    // Deterministic for n < 3.3·10^24; far beyond the desk-scale inputs here.
    'witness: for &a in &[2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41] {
        let mut x = BigInt::from(a).modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Brent's variant of Pollard's rho; `n` odd composite.
fn pollard_rho(n: &BigInt) -> BigInt {
    let one = BigInt::one();
    let mut c = BigInt::one();
    loop {
        let f = |x: &BigInt| (x * x + &c) % n;
        let mut y = BigInt::from(2);
        let mut r: u64 = 1;
        let mut q = BigInt::one();
        let mut g = BigInt::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        let m = 64;
        while g == one {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g == one {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    q = (q * (&x - &y).abs()) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if g == *n {
            loop {
                ys = f(&ys);
                g = (&x - &ys).abs().gcd(n);
                if g > one {
                    break;
                }
            }
        }
        if g != *n {
            return g;
        }
        c += 1;
    }
}

fn factor_large(n: BigInt, out: &mut BTreeMap<BigInt, u32>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        *out.entry(n).or_insert(0) += 1;
        return;
    }
    let r = n.sqrt();
    if &r * &r == n {
        factor_large(r.clone(), out);
        factor_large(r, out);
        return;
    }
    let d = pollard_rho(&n);
    let other = &n / &d;
    factor_large(d, out);
    factor_large(other, out);
}

/// Prime factorization of a positive integer, primes ascending.
///
/// Trial division up to 10⁶, then Miller–Rabin and Pollard's rho.
pub fn factor_integer(n: &BigInt) -> Result<Vec<(BigInt, u32)>> {
    if !n.is_positive() {
        return Err(Error::Domain(format!("cannot factor non-positive integer {n}")));
    }
    let mut out = BTreeMap::new();
    let mut m = n.clone();
    if let Some(mut v) = m.to_u64() {
        for &p in small_primes() {
            let p = p as u64;
            if p * p > v {
                break;
            }
            while v % p == 0 {
                v /= p;
                *out.entry(BigInt::from(p)).or_insert(0) += 1;
            }
        }
        if v > 1 {
            if v < (TRIAL_LIMIT as u64) * (TRIAL_LIMIT as u64) {
                *out.entry(BigInt::from(v)).or_insert(0) += 1;
            } else {
                factor_large(BigInt::from(v), &mut out);
            }
        }
        return Ok(out.into_iter().collect());
    }
    for &p in small_primes() {
        let pb = BigInt::from(p);
        if &pb * &pb > m {
            break;
        }
        while (&m % p).is_zero() {
            m /= p;
            *out.entry(pb.clone()).or_insert(0) += 1;
        }
    }
    factor_large(m, &mut out);
    Ok(out.into_iter().collect())
}

/// Gaussian prime in canonical associate form: `re > 0`, `im ≥ 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussianPrime {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussianPrime {
    pub fn norm(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn to_gaussian(&self) -> GaussianRational {
        GaussianRational::new(
            Rational::from_integer(self.re.clone()),
            Rational::from_integer(self.im.clone()),
        )
    }
}

impl Ord for GaussianPrime {
    fn cmp(&self, other: &Self) -> Ordering {
        self.norm()
            .cmp(&other.norm())
            .then_with(|| self.re.cmp(&other.re))
            .then_with(|| self.im.cmp(&other.im))
    }
}

impl PartialOrd for GaussianPrime {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GaussianPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else {
            write!(f, "{}+{}*i", self.re, self.im)
        }
    }
}

impl Serialize for GaussianPrime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl fmt::Debug for GaussianPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

/// `z = i^unit_exp · Π π^e` over canonical Gaussian primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GaussianFactorization {
    /// Exponent of `i`, in `0..4`.
    pub unit_exp: u8,
    /// Distinct primes in ascending (norm, re, im) order, nonzero exponents.
    pub factors: Vec<(GaussianPrime, i64)>,
}

impl GaussianFactorization {
    /// Multiplies the factorization back out.
    pub fn remultiply(&self) -> GaussianRational {
        let mut acc = GaussianRational::i()
            .pow(i64::from(self.unit_exp))
            .expect("i is nonzero");
        for (p, e) in &self.factors {
            acc = &acc * &p.to_gaussian().pow(*e).expect("primes are nonzero");
        }
        acc
    }

    pub fn exponent_of(&self, p: &GaussianPrime) -> i64 {
        self.factors
            .iter()
            .find(|(q, _)| q == p)
            .map_or(0, |(_, e)| *e)
    }
}

type GInt = (BigInt, BigInt);

fn gmul(a: &GInt, b: &GInt) -> GInt {
    (&a.0 * &b.0 - &a.1 * &b.1, &a.0 * &b.1 + &a.1 * &b.0)
}

/// Exact quotient `a / b` when it is a Gaussian integer.
fn gdiv_exact(a: &GInt, b: &GInt) -> Option<GInt> {
    let n = &b.0 * &b.0 + &b.1 * &b.1;
    let num = gmul(a, &(b.0.clone(), -&b.1));
    if (&num.0 % &n).is_zero() && (&num.1 % &n).is_zero() {
        Some((num.0 / &n, num.1 / n))
    } else {
        None
    }
}

/// The canonical Gaussian primes dividing the rational prime `p`.
fn primes_over(p: &BigInt) -> Vec<GaussianPrime> {
    let two = BigInt::from(2);
    if *p == two {
        return vec![GaussianPrime {
            re: BigInt::one(),
            im: BigInt::one(),
        }];
    }
    if (p % 4u32) == BigInt::from(3) {
        return vec![GaussianPrime {
            re: p.clone(),
            im: BigInt::zero(),
        }];
    }
    // p ≡ 1 mod 4: find x² ≡ −1, then run Euclid (Hermite–Serret).
    let e = (p - 1u32) / 4u32;
    let pm1 = p - 1u32;
    let mut c = BigInt::from(2);
    let x = loop {
        let t = c.modpow(&e, p);
        if (&t * &t) % p == pm1 {
            break t;
        }
        c += 1;
    };
    let (mut r0, mut r1) = (p.clone(), x);
    while &r1 * &r1 > *p {
        let r2 = &r0 % &r1;
        r0 = r1;
        r1 = r2;
    }
    let a = r1;
    let b = (p - &a * &a).sqrt();
    debug_assert_eq!(&a * &a + &b * &b, *p);
    let mut v = vec![
        GaussianPrime {
            re: a.clone(),
            im: b.clone(),
        },
        GaussianPrime { re: b, im: a },
    ];
    v.sort();
    v
}

/// Factors a nonzero Gaussian integer; returns (unit exponent, factors).
fn factor_gaussian_integer(z: &GInt) -> Result<(u8, BTreeMap<GaussianPrime, i64>)> {
    let n = &z.0 * &z.0 + &z.1 * &z.1;
    let mut rest = z.clone();
    let mut out = BTreeMap::new();
    for (p, _) in factor_integer(&n)? {
        for pi in primes_over(&p) {
            let g = (pi.re.clone(), pi.im.clone());
            let mut e = 0i64;
            while let Some(q) = gdiv_exact(&rest, &g) {
                rest = q;
                e += 1;
            }
            if e != 0 {
                out.insert(pi, e);
            }
        }
    }
    let unit = match (rest.0.to_i64(), rest.1.to_i64()) {
        (Some(1), Some(0)) => 0,
        (Some(0), Some(1)) => 1,
        (Some(-1), Some(0)) => 2,
        (Some(0), Some(-1)) => 3,
        _ => {
            return Err(Error::Internal(format!(
                "Gaussian factorization left non-unit cofactor {}+{}i",
                rest.0, rest.1
            )))
        }
    };
    Ok((unit, out))
}

/// Exact factorization of a nonzero Gaussian rational over canonical primes.
///
/// Denominators contribute negative exponents.
pub fn factor_gaussian(z: &GaussianRational) -> Result<GaussianFactorization> {
    if num_traits::Zero::is_zero(z) {
        return Err(Error::Domain("cannot factor zero".into()));
    }
    let d = z.common_denominator();
    let a = (&z.re * Rational::from_integer(d.clone())).to_integer();
    let b = (&z.im * Rational::from_integer(d.clone())).to_integer();
    let (u_num, mut fac) = factor_gaussian_integer(&(a, b))?;
    let (u_den, den) = factor_gaussian_integer(&(d, BigInt::zero()))?;
    for (p, e) in den {
        *fac.entry(p).or_insert(0) -= e;
    }
    let factors = fac.into_iter().filter(|(_, e)| *e != 0).collect();
    Ok(GaussianFactorization {
        unit_exp: (u_num + 4 - u_den) % 4,
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn g(s: &str) -> GaussianRational {
        s.parse().unwrap()
    }

    fn fi(n: u64) -> Vec<(u64, u32)> {
        factor_integer(&BigInt::from(n))
            .unwrap()
            .into_iter()
            .map(|(p, e)| (p.to_u64().unwrap(), e))
            .collect()
    }

    #[test]
    fn integer_factorization() {
        assert_eq!(fi(1), vec![]);
        assert_eq!(fi(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(fi(1_000_003), vec![(1_000_003, 1)]);
        // Two primes above the trial-division limit.
        assert_eq!(
            fi(1_000_003 * 1_000_033),
            vec![(1_000_003, 1), (1_000_033, 1)]
        );
        assert_eq!(fi(1_000_003 * 1_000_003), vec![(1_000_003, 2)]);
        let big = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64) * 12;
        let f = factor_integer(&big).unwrap();
        assert_eq!(
            f,
            vec![
                (BigInt::from(2), 2),
                (BigInt::from(3), 1),
                (BigInt::from(998_244_353u64), 1),
                (BigInt::from(1_000_000_007u64), 1)
            ]
        );
    }

    #[test]
    fn minus_two() {
        let f = factor_gaussian(&g("-2")).unwrap();
        let one_plus_i = GaussianPrime {
            re: BigInt::one(),
            im: BigInt::one(),
        };
        assert_eq!(f.factors, vec![(one_plus_i, 2)]);
        // (1+i)² = 2i, so −2 = i·(1+i)².
        assert_eq!(f.unit_exp, 1);
        assert_eq!(f.remultiply(), g("-2"));
    }

    #[test]
    fn one_and_half() {
        let f = factor_gaussian(&g("1")).unwrap();
        assert_eq!(f.unit_exp, 0);
        assert!(f.factors.is_empty());
        let f = factor_gaussian(&g("1/2")).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert_eq!(f.factors[0].1, -2);
        assert_eq!(f.remultiply(), g("1/2"));
    }

    #[test]
    fn canonical_split_primes() {
        let f = factor_gaussian(&g("5")).unwrap();
        let primes: Vec<_> = f.factors.iter().map(|(p, _)| p.to_string()).collect();
        assert_eq!(primes, vec!["1+2*i", "2+1*i"]);
        assert_eq!(f.remultiply(), g("5"));
        let f = factor_gaussian(&g("3")).unwrap();
        assert_eq!(f.factors.len(), 1);
        assert_eq!(f.factors[0].0.to_string(), "3");
        assert!(factor_gaussian(&g("0")).is_err());
    }

    #[test]
    fn remultiplication_on_random_inputs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let mut part = || {
                Rational::new(
                    BigInt::from(rng.gen_range(-10_000i64..=10_000)),
                    BigInt::from(rng.gen_range(1i64..=10_000)),
                )
            };
            let z = GaussianRational::new(part(), part());
            if num_traits::Zero::is_zero(&z) {
                continue;
            }
            let f = factor_gaussian(&z).unwrap();
            assert_eq!(f.remultiply(), z);
            for (p, _) in &f.factors {
                assert!(p.re.is_positive() && !p.im.is_negative());
            }
        }
    }

    proptest! {
        #[test]
        fn factorization_is_multiplicative(a in -300i64..300, b in -300i64..300,
                                           c in -300i64..300, d in -300i64..300) {
            prop_assume!((a, b) != (0, 0) && (c, d) != (0, 0));
            let z = GaussianRational::from_integers(a, b);
            let w = GaussianRational::from_integers(c, d);
            let fz = factor_gaussian(&z).unwrap();
            let fw = factor_gaussian(&w).unwrap();
            let fzw = factor_gaussian(&(&z * &w)).unwrap();
            prop_assert_eq!(fzw.unit_exp, (fz.unit_exp + fw.unit_exp) % 4);
            for (p, e) in &fzw.factors {
                prop_assert_eq!(*e, fz.exponent_of(p) + fw.exponent_of(p));
            }
        }
    }
}
