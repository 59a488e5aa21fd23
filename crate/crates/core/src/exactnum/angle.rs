//! Certified rounding of sums of arguments.

use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use crate::exactnum::gaussian::GaussianRational;
use crate::exactnum::interval::{arg, pi, Interval};
use crate::scalar::Rational;

/// Interval precision schedule: start, doubling up to a cap.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PrecisionBudget {
    pub start_bits: u32,
    pub max_bits: u32,
}

impl Default for PrecisionBudget {
    fn default() -> Self {
        PrecisionBudget {
            start_bits: 64,
            max_bits: 1024,
        }
    }
}

impl PrecisionBudget {
    /// Budget capped at `max_bits` (never below 16 bits).
    pub fn capped(max_bits: u32) -> Self {
        let max_bits = max_bits.max(16);
        PrecisionBudget {
            start_bits: 64.min(max_bits),
            max_bits,
        }
    }

    /// The precision levels to try, in order.
    pub fn levels(&self) -> Vec<u32> {
        let mut out = Vec::new();
        let mut b = self.start_bits.max(16);
        while b < self.max_bits {
            out.push(b);
            b *= 2;
        }
        out.push(self.max_bits);
        out
    }
}

/// A value that could not be certified within the precision budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Indeterminate {
    pub reason: String,
    pub max_bits: u32,
}

/// The real number `(Σ c_j·Arg(z_j) + r·π) / 2π` with principal arguments.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ArgumentSum {
    pub terms: Vec<(BigInt, GaussianRational)>,
    pub pi_multiple: Rational,
}

impl ArgumentSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, coeff: impl Into<BigInt>, z: GaussianRational) {
        self.terms.push((coeff.into(), z));
    }

    /// Enclosure of the represented value at `bits`.
    pub fn evaluate(&self, bits: u32) -> Interval {
        let w = bits + 8;
        let mut num = Interval::from_rational(&self.pi_multiple, w).mul(&pi(w));
        for (c, z) in &self.terms {
            if c.is_zero() {
                continue;
            }
            num = num.add(&arg(z, w).scale_integer(c));
        }
        let two_pi = pi(w).scale_integer(&BigInt::from(2));
        num.div(&two_pi).expect("2π is positive")
    }
}

/// Rounds an [`ArgumentSum`] known to be an integer.
///
/// The result `K` satisfies `|value − K| < 1/4` certified by interval
/// evaluation; precision escalates through the budget before giving up.
pub fn certified_round_to_integer(
    x: &ArgumentSum,
    budget: &PrecisionBudget,
) -> Result<BigInt, Indeterminate> {
    let quarter = Rational::new(1.into(), 4.into());
    for bits in budget.levels() {
        let iv = x.evaluate(bits);
        let k = iv.mid_rational().round().to_integer();
        let kr = Rational::from_integer(k.clone());
        if iv.lo_rational() > &kr - &quarter && iv.hi_rational() < &kr + &quarter {
            return Ok(k);
        }
    }
    Err(Indeterminate {
        reason: "could not isolate an integer within the precision budget".into(),
        max_bits: budget.max_bits,
    })
}
