//! Extended exact rationals.
//!
//! Two one-sided extensions of ℚ are used: costs live in `[0, +inf]`
//! ([`ExtRat`]) and potentials in `[-inf, +inf)` ([`PotVal`]). Multiplying
//! either infinity by exactly zero yields zero — the measure-theoretic
//! convention for integrals against mass that vanishes on the infinite set.

use num::BigRational;
use num::traits::{Signed, Zero};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Exact rational scalar used everywhere in this crate.
pub type Rat = BigRational;

/// Shorthand constructor for small rationals. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(p.into(), q.into())
}

/// A cost value: an exact nonnegative rational or `+inf` (forbidden arc).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtRat {
    Fin(Rat),
    PlusInf,
}

impl ExtRat {
    pub fn zero() -> Self {
        ExtRat::Fin(Rat::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtRat::Fin(_))
    }

    /// The finite value, if any.
    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            ExtRat::Fin(r) => Some(r),
            ExtRat::PlusInf => None,
        }
    }

    /// Addition; `+inf` absorbs.
    pub fn add(&self, other: &ExtRat) -> ExtRat {
        match (self, other) {
            (ExtRat::Fin(x), ExtRat::Fin(y)) => ExtRat::Fin(x + y),
            _ => ExtRat::PlusInf,
        }
    }

    /// Multiply by a nonnegative mass with the convention `0 · inf = 0`.
    ///
    /// Panics on negative mass: masses are plan entries, which are
    /// validated nonnegative at construction.
    pub fn mul_mass(&self, mass: &Rat) -> ExtRat {
        assert!(!mass.is_negative(), "mass must be nonnegative");
        if mass.is_zero() {
            return ExtRat::zero();
        }
        match self {
            ExtRat::Fin(r) => ExtRat::Fin(r * mass),
            ExtRat::PlusInf => ExtRat::PlusInf,
        }
    }
}

impl PartialOrd for ExtRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRat {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRat::Fin(x), ExtRat::Fin(y)) => x.cmp(y),
            (ExtRat::Fin(_), ExtRat::PlusInf) => Ordering::Less,
            (ExtRat::PlusInf, ExtRat::Fin(_)) => Ordering::Greater,
            (ExtRat::PlusInf, ExtRat::PlusInf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtRat {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRat::Fin(r) => write!(w, "{}", r),
            ExtRat::PlusInf => write!(w, "inf"),
        }
    }
}

impl FromStr for ExtRat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "inf" {
            return Ok(ExtRat::PlusInf);
        }
        parse_rat(s).map(ExtRat::Fin)
    }
}

/// A potential value: an exact rational or `-inf`.
///
/// `-inf` is legal only at points of zero marginal mass; the
/// [`crate::Potentials`] constructor enforces that. The same type carries the
/// value of the pairing integral, which can in principle be `-inf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PotVal {
    NegInf,
    Fin(Rat),
}

impl PotVal {
    pub fn is_finite(&self) -> bool {
        matches!(self, PotVal::Fin(_))
    }

    pub fn as_rat(&self) -> Option<&Rat> {
        match self {
            PotVal::Fin(r) => Some(r),
            PotVal::NegInf => None,
        }
    }

    /// Tensor-sum addition; `-inf` absorbs.
    pub fn add(&self, other: &PotVal) -> PotVal {
        match (self, other) {
            (PotVal::Fin(x), PotVal::Fin(y)) => PotVal::Fin(x + y),
            _ => PotVal::NegInf,
        }
    }

    /// Is this potential sum dominated by the given cost (`self ≤ c`)?
    ///
    /// `-inf` is below everything and every finite value is below `+inf`.
    pub fn le_cost(&self, c: &ExtRat) -> bool {
        match (self, c) {
            (PotVal::NegInf, _) => true,
            (_, ExtRat::PlusInf) => true,
            (PotVal::Fin(x), ExtRat::Fin(y)) => x <= y,
        }
    }
}

impl PartialOrd for PotVal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PotVal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (PotVal::Fin(x), PotVal::Fin(y)) => x.cmp(y),
            (PotVal::NegInf, PotVal::Fin(_)) => Ordering::Less,
            (PotVal::Fin(_), PotVal::NegInf) => Ordering::Greater,
            (PotVal::NegInf, PotVal::NegInf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for PotVal {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotVal::Fin(r) => write!(w, "{}", r),
            PotVal::NegInf => write!(w, "-inf"),
        }
    }
}

impl FromStr for PotVal {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "-inf" {
            return Ok(PotVal::NegInf);
        }
        parse_rat(s).map(PotVal::Fin)
    }
}

/// Parse a rational token: `p/q` or an integer, optionally signed.
pub fn parse_rat(s: &str) -> Result<Rat, String> {
    Rat::from_str(s).map_err(|e| format!("bad rational '{}': {}", s, e))
}

/// Parse a rational allowing decimal notation (`0.4` → `2/5`).
///
/// Used only for command-line arguments; file formats are strict.
pub fn parse_rat_flex(s: &str) -> Result<Rat, String> {
    if let Some(dot) = s.find('.') {
        let (int_part, frac_part) = (&s[..dot], &s[dot + 1..]);
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad decimal '{}'", s));
        }
        let negative = int_part.starts_with('-');
        let int_abs = int_part.trim_start_matches(['-', '+']);
        let int_val = if int_abs.is_empty() {
            Rat::zero()
        } else {
            parse_rat(int_abs)?
        };
        let num: Rat = parse_rat(frac_part)?;
        let den = num::BigInt::from(10u32).pow(frac_part.len() as u32);
        let mag = int_val + num / Rat::from_integer(den);
        Ok(if negative { -mag } else { mag })
    } else {
        parse_rat(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plus_inf_absorbs_addition() {
        let one = ExtRat::Fin(rat(1, 1));
        assert_eq!(one.add(&ExtRat::PlusInf), ExtRat::PlusInf);
        assert_eq!(ExtRat::PlusInf.add(&one), ExtRat::PlusInf);
        assert_eq!(one.add(&ExtRat::Fin(rat(1, 2))), ExtRat::Fin(rat(3, 2)));
    }

    #[test]
    fn zero_mass_kills_infinity() {
        assert_eq!(ExtRat::PlusInf.mul_mass(&rat(0, 1)), ExtRat::zero());
        assert_eq!(ExtRat::PlusInf.mul_mass(&rat(1, 3)), ExtRat::PlusInf);
        assert_eq!(
            ExtRat::Fin(rat(3, 2)).mul_mass(&rat(2, 3)),
            ExtRat::Fin(rat(1, 1))
        );
    }

    #[test]
    fn comparison_is_total_with_inf_on_top() {
        let vals = [ExtRat::Fin(rat(-1, 2)), ExtRat::Fin(rat(7, 3)), ExtRat::PlusInf];
        for w in vals.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert_eq!(ExtRat::PlusInf.cmp(&ExtRat::PlusInf), Ordering::Equal);
    }

    #[test]
    fn neg_inf_absorbs_tensor_sum_and_is_dominated() {
        let f = PotVal::NegInf;
        let g = PotVal::Fin(rat(5, 1));
        assert_eq!(f.add(&g), PotVal::NegInf);
        assert!(f.add(&g).le_cost(&ExtRat::zero()));
        assert!(PotVal::Fin(rat(1, 1)).le_cost(&ExtRat::PlusInf));
        assert!(!PotVal::Fin(rat(1, 1)).le_cost(&ExtRat::zero()));
    }

    #[test]
    fn tokens_round_trip() {
        for t in ["0", "1", "-3/7", "22/7", "inf"] {
            let v: ExtRat = t.parse().unwrap();
            assert_eq!(v.to_string(), t);
        }
        for t in ["0", "-1/2", "-inf"] {
            let v: PotVal = t.parse().unwrap();
            assert_eq!(v.to_string(), t);
        }
        assert!("1/0".parse::<ExtRat>().is_err());
        assert!("".parse::<ExtRat>().is_err());
    }

    #[test]
    fn decimals_parse_for_cli_arguments() {
        assert_eq!(parse_rat_flex("0.4").unwrap(), rat(2, 5));
        assert_eq!(parse_rat_flex("0.3").unwrap(), rat(3, 10));
        assert_eq!(parse_rat_flex("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(parse_rat_flex("2").unwrap(), rat(2, 1));
        assert_eq!(parse_rat_flex(".5").unwrap(), rat(1, 2));
        assert!(parse_rat_flex("1.").is_err());
    }
}
