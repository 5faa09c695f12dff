//! Integers extended with tagged infinities.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum Ext {
    NegInf,
    Fin(i64),
    PosInf,
}

impl Ext {
    pub fn is_finite(self) -> bool {
        matches!(self, Ext::Fin(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Ext::Fin(v) => Some(v),
            _ => None,
        }
    }

    pub fn scale(self, sign: i64) -> Ext {
        if sign < 0 {
            -self
        } else {
            self
        }
    }
}

impl Default for Ext {
    fn default() -> Self {
        Ext::Fin(0)
    }
}

impl From<i64> for Ext {
    fn from(v: i64) -> Self {
        Ext::Fin(v)
    }
}

impl fmt::Display for Ext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ext::NegInf => write!(f, "-inf"),
            Ext::PosInf => write!(f, "inf"),
            Ext::Fin(v) => write!(f, "{v}"),
        }
    }
}

impl std::ops::Add for Ext {
    type Output = Ext;

    /// Mixing opposite infinities is a caller bug.
    fn add(self, other: Ext) -> Ext {
        match (self, other) {
            (Ext::Fin(a), Ext::Fin(b)) => Ext::Fin(a.checked_add(b).expect("extended integer overflow")),
            (Ext::NegInf, Ext::PosInf) | (Ext::PosInf, Ext::NegInf) => {
                panic!("undefined sum of opposite infinities")
            }
            (Ext::NegInf, _) | (_, Ext::NegInf) => Ext::NegInf,
            _ => Ext::PosInf,
        }
    }
}

impl std::ops::Neg for Ext {
    type Output = Ext;

    fn neg(self) -> Ext {
        match self {
            Ext::NegInf => Ext::PosInf,
            Ext::PosInf => Ext::NegInf,
            Ext::Fin(v) => Ext::Fin(-v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_puts_infinities_at_the_ends() {
        assert!(Ext::NegInf < Ext::Fin(i64::MIN));
        assert!(Ext::Fin(i64::MAX) < Ext::PosInf);
        assert_eq!(Ext::Fin(3) + Ext::Fin(-5), Ext::Fin(-2));
        assert_eq!(Ext::NegInf + Ext::Fin(7), Ext::NegInf);
        assert_eq!(-Ext::PosInf, Ext::NegInf);
    }
}
