//! Certified fixed-point interval arithmetic and the transcendental constants
//! needed for arguments and log-moduli.
//!
//! An [`Interval`] at precision `bits` is `[lo, hi]·2^-bits` with big-integer
//! endpoints; every operation rounds outward.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exactnum::gaussian::GaussianRational;
use crate::scalar::Rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    bits: u32,
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

impl Interval {
    pub fn zero(bits: u32) -> Self {
        Interval {
            lo: BigInt::zero(),
            hi: BigInt::zero(),
            bits,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn from_integer(v: &BigInt, bits: u32) -> Self {
        let x = v << bits;
        Interval {
            lo: x.clone(),
            hi: x,
            bits,
        }
    }

    pub fn from_rational(r: &Rational, bits: u32) -> Self {
        let n = r.numer() << bits;
        Interval {
            lo: floor_div(&n, r.denom()),
            hi: ceil_div(&n, r.denom()),
            bits,
        }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.bits, other.bits, "interval precision mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
            bits: self.bits,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check(other);
        Interval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
            bits: self.bits,
        }
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
            bits: self.bits,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let min = cands.iter().min().unwrap();
        let max = cands.iter().max().unwrap();
        let s = pow2(self.bits);
        Interval {
            lo: floor_div(min, &s),
            hi: ceil_div(max, &s),
            bits: self.bits,
        }
    }

    /// Quotient; `None` when the divisor may be zero.
    pub fn div(&self, other: &Self) -> Option<Self> {
        self.check(other);
        if other.contains_zero() {
            return None;
        }
        let mut lo: Option<BigInt> = None;
        let mut hi: Option<BigInt> = None;
        for a in [&self.lo, &self.hi] {
            for b in [&other.lo, &other.hi] {
                let n = a << self.bits;
                let f = floor_div(&n, b);
                let c = ceil_div(&n, b);
                lo = Some(match lo {
                    Some(x) if x <= f => x,
                    _ => f,
                });
                hi = Some(match hi {
                    Some(x) if x >= c => x,
                    _ => c,
                });
            }
        }
        Some(Interval {
            lo: lo.unwrap(),
            hi: hi.unwrap(),
            bits: self.bits,
        })
    }

    pub fn scale_integer(&self, k: &BigInt) -> Self {
        let a = &self.lo * k;
        let b = &self.hi * k;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Interval {
            lo,
            hi,
            bits: self.bits,
        }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    /// Certified sign, or `None` when the interval straddles zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn lo_rational(&self) -> Rational {
        Rational::new(self.lo.clone(), pow2(self.bits))
    }

    pub fn hi_rational(&self) -> Rational {
        Rational::new(self.hi.clone(), pow2(self.bits))
    }

    pub fn mid_rational(&self) -> Rational {
        Rational::new(&self.lo + &self.hi, pow2(self.bits + 1))
    }

    pub fn width_rational(&self) -> Rational {
        Rational::new(&self.hi - &self.lo, pow2(self.bits))
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo_rational().to_f64().unwrap_or(f64::NAN)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi_rational().to_f64().unwrap_or(f64::NAN)
    }

    /// Widens by `ulps` units in the last place on each side.
    fn widen(mut self, ulps: u64) -> Self {
        self.lo -= ulps;
        self.hi += ulps;
        self
    }

    /// Rounds outward to a lower precision.
    fn reduce_to(&self, bits: u32) -> Self {
        assert!(bits <= self.bits);
        let s = pow2(self.bits - bits);
        Interval {
            lo: floor_div(&self.lo, &s),
            hi: ceil_div(&self.hi, &s),
            bits,
        }
    }
}

/// Complex interval as a rectangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComplexInterval {
    pub re: Interval,
    pub im: Interval,
}

impl ComplexInterval {
    pub fn zero(bits: u32) -> Self {
        ComplexInterval {
            re: Interval::zero(bits),
            im: Interval::zero(bits),
        }
    }

    pub fn real(re: Interval) -> Self {
        let bits = re.bits();
        ComplexInterval {
            re,
            im: Interval::zero(bits),
        }
    }

    pub fn from_gaussian(z: &GaussianRational, bits: u32) -> Self {
        ComplexInterval {
            re: Interval::from_rational(&z.re, bits),
            im: Interval::from_rational(&z.im, bits),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        ComplexInterval {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ComplexInterval {
            re: self.re.sub(&o.re),
            im: self.im.sub(&o.im),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        ComplexInterval {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    /// True when the rectangle certainly excludes zero.
    pub fn excludes_zero(&self) -> bool {
        !self.re.contains_zero() || !self.im.contains_zero()
    }
}

const GUARD: u32 = 24;

/// `Σ_k s^k t^{2k+1}/(2k+1)` with `s = −1` (atan) or `s = +1` (atanh).
///
/// Requires `|t| ≤ 1/2` for atan and `|t| ≤ 1/3` for atanh, which bounds the
/// tail by two units in the last place.
fn odd_series(t: &Rational, alternating: bool, bits: u32) -> Interval {
    let w = bits + GUARD;
    let scale = pow2(w);
    let p = t.numer().clone();
    let q = t.denom().clone();
    let p2 = &p * &p;
    let q2 = &q * &q;
    let mut num = p.clone();
    let mut den = q.clone();
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    let mut terms: u64 = 0;
    loop {
        // Stop once |t|^{2k+1} < 2^-w.
        if (num.abs() * &scale) < den {
            break;
        }
        let term = (&num * &scale) / (&den * BigInt::from(2 * k + 1));
        if alternating && k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        terms += 1;
        num *= &p2;
        den *= &q2;
        k += 1;
    }
    Interval {
        lo: sum.clone(),
        hi: sum,
        bits: w,
    }
    .widen(terms + 3)
    .reduce_to(bits)
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum ConstKey {
    Pi,
    Ln(BigInt),
}

fn cached(key: ConstKey, bits: u32, f: impl FnOnce() -> Interval) -> Interval {
    static CACHE: OnceLock<Mutex<HashMap<(ConstKey, u32), Interval>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().unwrap().get(&(key.clone(), bits)) {
        return v.clone();
    }
    let v = f();
    cache.lock().unwrap().insert((key, bits), v.clone());
    v
}

/// Enclosure of π by Machin's formula.
pub fn pi(bits: u32) -> Interval {
    cached(ConstKey::Pi, bits, || {
        let w = bits + 8;
        let a = odd_series(&Rational::new(1.into(), 5.into()), true, w);
        let b = odd_series(&Rational::new(1.into(), 239.into()), true, w);
        a.scale_integer(&BigInt::from(16))
            .sub(&b.scale_integer(&BigInt::from(4)))
            .reduce_to(bits)
    })
}

/// Enclosure of `atan(r)` for rational `r`.
pub fn atan(r: &Rational, bits: u32) -> Interval {
    if r.is_zero() {
        return Interval::zero(bits);
    }
    if r.is_negative() {
        return atan(&-r, bits).neg();
    }
    let half = Rational::new(1.into(), 2.into());
    let two = Rational::from_integer(2.into());
    if *r <= half {
        odd_series(r, true, bits)
    } else if *r >= two {
        // π/2 − atan(1/r)
        let p = pi(bits + 1);
        let h = Interval {
            lo: p.lo.clone(),
            hi: p.hi.clone(),
            bits: bits + 2,
        };
        h.reduce_to(bits).sub(&odd_series(&r.recip(), true, bits))
    } else {
        // π/4 + atan((r−1)/(r+1)), the shifted argument lies in (−1/3, 1/3).
        let one = Rational::one();
        let s = (r - &one) / (r + &one);
        let p = pi(bits);
        let quarter = Interval {
            lo: p.lo.clone(),
            hi: p.hi.clone(),
            bits: bits + 2,
        };
        quarter.reduce_to(bits).add(&odd_series(&s, true, bits))
    }
}

/// Principal argument in (−π, π] of a nonzero Gaussian rational.
pub fn arg(z: &GaussianRational, bits: u32) -> Interval {
    assert!(!z.is_zero(), "argument of zero");
    let (a, b) = (&z.re, &z.im);
    if b.is_zero() {
        return if a.is_positive() {
            Interval::zero(bits)
        } else {
            pi(bits)
        };
    }
    let half_pi = || {
        let p = pi(bits);
        Interval {
            lo: p.lo,
            hi: p.hi,
            bits: bits + 1,
        }
        .reduce_to(bits)
    };
    if a.is_zero() {
        return if b.is_positive() {
            half_pi()
        } else {
            half_pi().neg()
        };
    }
    let t = atan(&(b / a), bits);
    if a.is_positive() {
        t
    } else if b.is_positive() {
        pi(bits).add(&t)
    } else {
        t.sub(&pi(bits))
    }
}

fn ln2(bits: u32) -> Interval {
    cached(ConstKey::Ln(BigInt::from(2)), bits, || {
        odd_series(&Rational::new(1.into(), 3.into()), false, bits + 2)
            .scale_integer(&BigInt::from(2))
            .reduce_to(bits)
    })
}

fn ln_positive_integer(n: &BigInt, bits: u32) -> Interval {
    assert!(n.is_positive());
    if n.is_one() {
        return Interval::zero(bits);
    }
    let k = n.bits() - 1;
    let base = pow2(k as u32);
    // n = 2^k·y with y ∈ [1, 2); ln y = 2·atanh((y−1)/(y+1)).
    let s = Rational::new(n - &base, n + &base);
    let w = bits + 2 + (64 - k.leading_zeros());
    let tail = odd_series(&s, false, w).scale_integer(&BigInt::from(2));
    ln2(w)
        .scale_integer(&BigInt::from(k))
        .add(&tail)
        .reduce_to(bits)
}

/// Enclosure of `ln p` for a positive integer (typically prime) `p`.
pub fn ln_prime(p: &BigInt, bits: u32) -> Interval {
    cached(ConstKey::Ln(p.clone()), bits, || ln_positive_integer(p, bits))
}

/// Enclosure of `ln r` for positive rational `r`.
pub fn ln_rational(r: &Rational, bits: u32) -> Interval {
    ln_positive_integer(r.numer(), bits).sub(&ln_positive_integer(r.denom(), bits))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    fn encloses(iv: &Interval, x: f64) -> bool {
        iv.lo_f64() <= x + 1e-15 && iv.hi_f64() >= x - 1e-15
    }

    #[test]
    fn constants() {
        for bits in [64, 128, 512] {
            let p = pi(bits);
            assert!(encloses(&p, std::f64::consts::PI));
            assert!(p.width_rational() < Rational::new(BigInt::one(), pow2(bits - 8)));
            assert!(encloses(&ln_prime(&BigInt::from(2), bits), std::f64::consts::LN_2));
            assert!(encloses(&ln_prime(&BigInt::from(97), bits), 97f64.ln()));
        }
        assert!(encloses(&ln_rational(&rat(1, 3), 64), (1.0f64 / 3.0).ln()));
    }

    #[test]
    fn arctangents_and_arguments() {
        for (n, d) in [(1, 7), (1, 2), (3, 4), (1, 1), (5, 3), (2, 1), (40, 1), (-9, 4)] {
            let r = rat(n, d);
            assert!(encloses(&atan(&r, 80), (n as f64 / d as f64).atan()), "{n}/{d}");
        }
        let cases = [(1, 0), (-1, 0), (0, 1), (0, -1), (3, 4), (-3, 4), (-3, -4), (3, -4)];
        for (a, b) in cases {
            let z = GaussianRational::from_integers(a, b);
            let want = (b as f64).atan2(a as f64);
            assert!(encloses(&arg(&z, 64), want), "{a},{b}");
        }
    }

    #[test]
    fn arithmetic_is_outward() {
        let a = Interval::from_rational(&rat(1, 3), 32);
        let b = Interval::from_rational(&rat(-2, 7), 32);
        let p = a.mul(&b);
        assert!(p.lo_rational() <= rat(-2, 21) && p.hi_rational() >= rat(-2, 21));
        let q = a.div(&b).unwrap();
        assert!(q.lo_rational() <= rat(-7, 6) && q.hi_rational() >= rat(-7, 6));
        assert!(a.sub(&a).contains_zero());
        assert_eq!(b.sign(), Some(Ordering::Less));
        assert!(a.div(&Interval::zero(32)).is_none());
    }
}
