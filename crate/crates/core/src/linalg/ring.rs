use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact scalar. Over the integers and prime fields the denominator is always one.
pub type Scalar = BigRational;

pub fn int(n: i64) -> Scalar {
    BigRational::from_integer(BigInt::from(n))
}

pub fn from_big(n: BigInt) -> Scalar {
    BigRational::from_integer(n)
}

/// Coefficient ring of every matrix, module and complex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "tag", content = "p")]
pub enum Ring {
    Integers,
    Rationals,
    PrimeField(u64),
}

impl Ring {
    pub fn prime_field(p: u64) -> Result<Ring> {
        if is_prime(p) {
            Ok(Ring::PrimeField(p))
        } else {
            Err(Error::InvalidRing(format!("{p} is not prime")))
        }
    }

    /// Parses `ZZ`, `QQ` or `GF(p)` (also `Z`, `Q`, `Fp` forms).
    pub fn parse(s: &str) -> Result<Ring> {
        let t = s.trim();
        match t {
            "ZZ" | "Z" | "Integers" | "integers" => Ok(Ring::Integers),
            "QQ" | "Q" | "Rationals" | "rationals" => Ok(Ring::Rationals),
            _ => {
                let inner = t
                    .strip_prefix("GF(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| t.strip_prefix('F'));
                match inner.and_then(|p| p.parse::<u64>().ok()) {
                    Some(p) => Ring::prime_field(p),
                    None => Err(Error::InvalidRing(format!("unknown ring `{s}`"))),
                }
            }
        }
    }

    pub fn is_field(&self) -> bool {
        !matches!(self, Ring::Integers)
    }

    pub fn characteristic(&self) -> u64 {
        match self {
            Ring::PrimeField(p) => *p,
            _ => 0,
        }
    }

    /// Whether `x` is a canonical element of this ring.
    pub fn contains(&self, x: &Scalar) -> bool {
        match self {
            Ring::Integers => x.is_integer(),
            Ring::Rationals => true,
            Ring::PrimeField(p) => {
                x.is_integer() && !x.is_negative() && x.to_integer() < BigInt::from(*p)
            }
        }
    }

    /// Canonical representative. Rationals are reduced mod p over a prime field.
    pub fn normalize(&self, x: Scalar) -> Scalar {
        match self {
            Ring::PrimeField(p) => {
                let p = BigInt::from(*p);
                let num = x.numer().mod_floor(&p);
                let den = x.denom().mod_floor(&p);
                let inv = den.modpow(&(&p - BigInt::from(2)), &p);
                from_big((num * inv).mod_floor(&p))
            }
            _ => x,
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.normalize(a + b)
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.normalize(a - b)
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.normalize(a * b)
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        self.normalize(-a)
    }

    pub fn is_unit(&self, x: &Scalar) -> bool {
        match self {
            Ring::Integers => x.abs().is_one(),
            _ => !x.is_zero(),
        }
    }

    pub fn inverse(&self, x: &Scalar) -> Option<Scalar> {
        if !self.is_unit(x) {
            return None;
        }
        match self {
            Ring::Integers => Some(x.clone()),
            Ring::Rationals => Some(x.recip()),
            Ring::PrimeField(p) => {
                let p = BigInt::from(*p);
                let v = x.to_integer().mod_floor(&p);
                Some(from_big(v.modpow(&(&p - BigInt::from(2)), &p)))
            }
        }
    }

    /// Euclidean division `a = q*b + r` with `r` smaller than `b` (always zero over a field).
    pub fn div_rem(&self, a: &Scalar, b: &Scalar) -> (Scalar, Scalar) {
        match self {
            Ring::Integers => {
                let (q, r) = a.to_integer().div_mod_floor(&b.to_integer());
                (from_big(q), from_big(r))
            }
            _ => {
                let inv = self.inverse(b).expect("division by zero");
                (self.mul(a, &inv), Scalar::zero())
            }
        }
    }

    /// Size used for pivot selection: absolute value over the integers, 1 for nonzero field elements.
    pub fn norm(&self, x: &Scalar) -> BigInt {
        match self {
            Ring::Integers => x.to_integer().abs(),
            _ => {
                if x.is_zero() {
                    BigInt::zero()
                } else {
                    BigInt::one()
                }
            }
        }
    }

    /// Canonical associate: positive over the integers, one over a field.
    pub fn unit_normal_factor(&self, x: &Scalar) -> Scalar {
        match self {
            Ring::Integers => {
                if x.is_negative() {
                    int(-1)
                } else {
                    int(1)
                }
            }
            _ => self.inverse(x).unwrap_or_else(|| int(1)),
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Integers => write!(f, "ZZ"),
            Ring::Rationals => write!(f, "QQ"),
            Ring::PrimeField(p) => write!(f, "GF({p})"),
        }
    }
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Parses `"3"`, `"-2/5"` into an exact scalar.
pub fn parse_scalar(s: &str) -> Option<Scalar> {
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(BigRational::new(n, d))
    } else {
        t.parse::<BigInt>().ok().map(from_big)
    }
}

pub fn format_scalar(x: &Scalar) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
