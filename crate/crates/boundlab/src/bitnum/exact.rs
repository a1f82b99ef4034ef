use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::num::Num;
use super::BitnumError;

/// An arbitrary-precision rational or a signed infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExactRat {
    Fin(BigRational),
    PosInf,
    NegInf,
}

impl ExactRat {
    pub fn zero() -> ExactRat {
        ExactRat::Fin(BigRational::zero())
    }

    pub fn from_int(v: i64) -> ExactRat {
        ExactRat::Fin(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn ratio(n: i64, d: i64) -> ExactRat {
        ExactRat::Fin(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn inf(neg: bool) -> ExactRat {
        if neg {
            ExactRat::NegInf
        } else {
            ExactRat::PosInf
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExactRat::Fin(r) if r.is_zero())
    }

    pub fn is_inf(&self) -> bool {
        !matches!(self, ExactRat::Fin(_))
    }

    pub fn is_neg(&self) -> bool {
        match self {
            ExactRat::Fin(r) => r.is_negative(),
            ExactRat::NegInf => true,
            ExactRat::PosInf => false,
        }
    }

    pub fn neg(&self) -> ExactRat {
        match self {
            ExactRat::Fin(r) => ExactRat::Fin(-r),
            ExactRat::PosInf => ExactRat::NegInf,
            ExactRat::NegInf => ExactRat::PosInf,
        }
    }

    pub fn add(&self, o: &ExactRat) -> Result<ExactRat, BitnumError> {
        match (self, o) {
            (ExactRat::Fin(a), ExactRat::Fin(b)) => Ok(ExactRat::Fin(a + b)),
            (ExactRat::PosInf, ExactRat::NegInf) | (ExactRat::NegInf, ExactRat::PosInf) => {
                Err(BitnumError::IndeterminateForm("inf - inf"))
            }
            (ExactRat::Fin(_), inf) | (inf, _) => Ok(inf.clone()),
        }
    }

    pub fn mul(&self, o: &ExactRat) -> Result<ExactRat, BitnumError> {
        match (self, o) {
            (ExactRat::Fin(a), ExactRat::Fin(b)) => Ok(ExactRat::Fin(a * b)),
            _ if self.is_zero() || o.is_zero() => Err(BitnumError::IndeterminateForm("0 * inf")),
            _ => Ok(ExactRat::inf(self.is_neg() != o.is_neg())),
        }
    }

    pub fn div(&self, o: &ExactRat) -> Result<ExactRat, BitnumError> {
        match (self, o) {
            (ExactRat::Fin(_), ExactRat::Fin(_)) if o.is_zero() => {
                if self.is_zero() {
                    Err(BitnumError::IndeterminateForm("0 / 0"))
                } else {
                    Ok(ExactRat::inf(self.is_neg()))
                }
            }
            (ExactRat::Fin(a), ExactRat::Fin(b)) => Ok(ExactRat::Fin(a / b)),
            (ExactRat::Fin(_), _) => Ok(ExactRat::zero()),
            (_, ExactRat::Fin(_)) => Ok(ExactRat::inf(self.is_neg() != o.is_neg())),
            _ => Err(BitnumError::IndeterminateForm("inf / inf")),
        }
    }

    pub fn relu(&self) -> ExactRat {
        if self.is_neg() {
            ExactRat::zero()
        } else {
            self.clone()
        }
    }

    /// The value as a bounded scalar when it is a dyadic rational with a 64-bit mantissa.
    pub fn to_num(&self) -> Option<Num> {
        match self {
            ExactRat::Fin(r) => Num::from_rat(r),
            ExactRat::PosInf => Some(Num::PosInf),
            ExactRat::NegInf => Some(Num::NegInf),
        }
    }
}

impl From<&Num> for ExactRat {
    fn from(x: &Num) -> ExactRat {
        match x {
            Num::PosInf => ExactRat::PosInf,
            Num::NegInf => ExactRat::NegInf,
            _ => ExactRat::Fin(x.to_rat().expect("finite")),
        }
    }
}

impl From<Num> for ExactRat {
    fn from(x: Num) -> ExactRat {
        ExactRat::from(&x)
    }
}

impl PartialOrd for ExactRat {
    fn partial_cmp(&self, o: &ExactRat) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for ExactRat {
    fn cmp(&self, o: &ExactRat) -> Ordering {
        use ExactRat::*;
        match (self, o) {
            (Fin(a), Fin(b)) => a.cmp(b),
            (PosInf, PosInf) | (NegInf, NegInf) => Ordering::Equal,
            (NegInf, _) | (_, PosInf) => Ordering::Less,
            (PosInf, _) | (_, NegInf) => Ordering::Greater,
        }
    }
}

impl fmt::Display for ExactRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactRat::Fin(r) => write!(f, "{r}"),
            ExactRat::PosInf => f.write_str("+inf"),
            ExactRat::NegInf => f.write_str("-inf"),
        }
    }
}
