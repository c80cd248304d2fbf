//! Integer scalars for exact lattice arithmetic.
//!
//! Every matrix routine in [`crate::intlat`] is written against [`IntScalar`] and
//! uses checked arithmetic, so a fixed-width scalar reports
//! [`Error::Overflow`] instead of wrapping. `BigInt` never overflows.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{CheckedAdd, CheckedMul, CheckedSub, FromPrimitive, Signed, ToPrimitive};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub trait IntScalar:
    Clone
    + Debug
    + Display
    + Hash
    + Ord
    + Integer
    + Signed
    + CheckedAdd
    + CheckedSub
    + CheckedMul
    + FromPrimitive
    + ToPrimitive
    + FromStr
    + Send
    + Sync
    + 'static
{
    #[inline]
    fn add_c(&self, rhs: &Self) -> Result<Self> {
        self.checked_add(rhs).ok_or(Error::Overflow("add"))
    }

    #[inline]
    fn sub_c(&self, rhs: &Self) -> Result<Self> {
        self.checked_sub(rhs).ok_or(Error::Overflow("sub"))
    }

    #[inline]
    fn mul_c(&self, rhs: &Self) -> Result<Self> {
        self.checked_mul(rhs).ok_or(Error::Overflow("mul"))
    }

    #[inline]
    fn neg_c(&self) -> Result<Self> {
        Self::zero().sub_c(self)
    }

    #[inline]
    fn abs_c(&self) -> Result<Self> {
        if self.is_negative() {
            self.neg_c()
        } else {
            Ok(self.clone())
        }
    }

    fn from_i64_c(v: i64) -> Result<Self> {
        Self::from_i64(v).ok_or(Error::Overflow("conversion"))
    }

    /// Lossless conversion between scalar types.
    fn convert<U: IntScalar>(&self) -> Result<U> {
        if let Some(v) = self.to_i128() {
            if let Some(u) = U::from_i128(v) {
                return Ok(u);
            }
            return Err(Error::Overflow("conversion"));
        }
        // wider than i128: go through the decimal representation
        self.to_string()
            .parse::<U>()
            .map_err(|_| Error::Overflow("conversion"))
    }
}

impl<T> IntScalar for T where
    T: Clone
        + Debug
        + Display
        + Hash
        + Ord
        + Integer
        + Signed
        + CheckedAdd
        + CheckedSub
        + CheckedMul
        + FromPrimitive
        + ToPrimitive
        + FromStr
        + Send
        + Sync
        + 'static
{
}

/// A cardinality that may be infinite (a natural number or `INFINITE`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Extended<T> {
    Finite(T),
    Infinite,
}

impl<T> Extended<T> {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<&T> {
        match self {
            Extended::Finite(v) => Some(v),
            Extended::Infinite => None,
        }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Extended<U> {
        match self {
            Extended::Finite(v) => Extended::Finite(f(v)),
            Extended::Infinite => Extended::Infinite,
        }
    }
}

impl<T: Display> Display for Extended<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::Infinite => f.write_str("infinite"),
        }
    }
}

// JSON form: a plain number, or the string "infinite".
impl<T: Serialize> Serialize for Extended<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Extended::Finite(v) => v.serialize(serializer),
            Extended::Infinite => serializer.serialize_str("infinite"),
        }
    }
}

impl<'de, T: Deserialize<'de>> Deserialize<'de> for Extended<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr<T> {
            Finite(T),
            Word(String),
        }
        match Repr::<T>::deserialize(deserializer)? {
            Repr::Finite(v) => Ok(Extended::Finite(v)),
            Repr::Word(w) if w == "infinite" => Ok(Extended::Infinite),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "expected a number or \"infinite\", found {w:?}"
            ))),
        }
    }
}
