//! Ordinals below `ω^ω` in Cantor normal form, natural sums, and the
//! syntactic depth measure.

use std::cmp::Ordering;
use std::fmt;

use crate::syntax::{Sub, Term, Type};

/// `⊞_e ω^e · c_e`, stored as `coeffs[e] = c_e` with no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Ordinal {
    coeffs: Vec<u64>,
}

impl Ordinal {
    pub fn zero() -> Ordinal {
        Ordinal::default()
    }

    pub fn finite(n: u64) -> Ordinal {
        Ordinal::from_coeffs(vec![n])
    }

    pub fn omega_pow(n: usize) -> Ordinal {
        let mut coeffs = vec![0; n + 1];
        coeffs[n] = 1;
        Ordinal { coeffs }
    }

    pub fn from_coeffs(mut coeffs: Vec<u64>) -> Ordinal {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Ordinal { coeffs }
    }

    /// Coefficients indexed by exponent.
    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn coeff(&self, e: usize) -> u64 {
        self.coeffs.get(e).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Some `n` when the ordinal is finite.
    pub fn as_finite(&self) -> Option<u64> {
        match self.coeffs.len() {
            0 => Some(0),
            1 => Some(self.coeffs[0]),
            _ => None,
        }
    }

    pub fn nat_sum(&self, other: &Ordinal) -> Ordinal {
        let len = self.coeffs.len().max(other.coeffs.len());
        Ordinal::from_coeffs((0..len).map(|e| self.coeff(e) + other.coeff(e)).collect())
    }
}

pub fn nat_sum(a: &Ordinal, b: &Ordinal) -> Ordinal {
    a.nat_sum(b)
}

pub fn omega_pow(n: usize) -> Ordinal {
    Ordinal::omega_pow(n)
}

pub fn ord_lt(a: &Ordinal, b: &Ordinal) -> bool {
    a < b
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Ordinal) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.iter().rev().cmp(other.coeffs.iter().rev()))
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Ordinal) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl std::iter::Sum for Ordinal {
    fn sum<I: Iterator<Item = Ordinal>>(iter: I) -> Ordinal {
        iter.fold(Ordinal::zero(), |acc, o| acc.nat_sum(&o))
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, &c)| c > 0)
            .map(|(e, &c)| match (e, c) {
                (0, c) => c.to_string(),
                (1, 1) => "ω".to_string(),
                (1, c) => format!("ω·{c}"),
                (e, 1) => format!("ω^{e}"),
                (e, c) => format!("ω^{e}·{c}"),
            })
            .collect();
        f.write_str(&parts.join(" ⊞ "))
    }
}

impl fmt::Debug for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub fn sd_term(t: &Term) -> Ordinal {
    match t {
        Term::Var(_) => Ordinal::zero(),
        Term::Coh(c) => Ordinal::omega_pow(c.ty.dim())
            .nat_sum(&sd_type(&c.ty))
            .nat_sum(&sd_sub(&c.sub)),
    }
}

pub fn sd_type(ty: &Type) -> Ordinal {
    match ty.as_arrow() {
        None => Ordinal::zero(),
        Some(a) => sd_term(&a.src).nat_sum(&sd_type(&a.base)).nat_sum(&sd_term(&a.tgt)),
    }
}

pub fn sd_sub(sub: &Sub) -> Ordinal {
    sub.terms().map(sd_term).sum()
}
