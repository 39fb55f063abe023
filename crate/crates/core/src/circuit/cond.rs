use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Boolean expression over classical bits, evaluated by the real-time
/// decoder to decide whether a feed-forward block fires.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CondExpr {
    Const(bool),
    Bit(usize),
    Not(Box<CondExpr>),
    Xor(Box<CondExpr>, Box<CondExpr>),
    And(Box<CondExpr>, Box<CondExpr>),
    Or(Box<CondExpr>, Box<CondExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CondError {
    #[error("classical bit c{0} read before any measurement wrote it")]
    UnwrittenBit(usize),
}

impl CondExpr {
    pub fn bit(b: usize) -> Self {
        CondExpr::Bit(b)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: CondExpr) -> Self {
        CondExpr::Not(Box::new(e))
    }

    pub fn xor(a: CondExpr, b: CondExpr) -> Self {
        CondExpr::Xor(Box::new(a), Box::new(b))
    }

    pub fn and(a: CondExpr, b: CondExpr) -> Self {
        CondExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: CondExpr, b: CondExpr) -> Self {
        CondExpr::Or(Box::new(a), Box::new(b))
    }

    /// Parity of a set of bits. An empty set is `Const(false)`.
    pub fn parity(bits: &[usize]) -> Self {
        let mut it = bits.iter();
        match it.next() {
            None => CondExpr::Const(false),
            Some(&first) => it.fold(CondExpr::Bit(first), |acc, &b| CondExpr::xor(acc, CondExpr::Bit(b))),
        }
    }

    /// Bits referenced anywhere in the expression.
    pub fn bits(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_bits(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_bits(&self, out: &mut Vec<usize>) {
        match self {
            CondExpr::Const(_) => {}
            CondExpr::Bit(b) => out.push(*b),
            CondExpr::Not(e) => e.collect_bits(out),
            CondExpr::Xor(a, b) | CondExpr::And(a, b) | CondExpr::Or(a, b) => {
                a.collect_bits(out);
                b.collect_bits(out);
            }
        }
    }

    /// Evaluates against a register where `written[i]` says whether bit `i`
    /// has been produced yet.
    pub fn eval_checked(&self, register: &[bool], written: &[bool]) -> Result<bool, CondError> {
        Ok(match self {
            CondExpr::Const(v) => *v,
            CondExpr::Bit(b) => {
                if !written.get(*b).copied().unwrap_or(false) {
                    return Err(CondError::UnwrittenBit(*b));
                }
                register[*b]
            }
            CondExpr::Not(e) => !e.eval_checked(register, written)?,
            CondExpr::Xor(a, b) => a.eval_checked(register, written)? ^ b.eval_checked(register, written)?,
            CondExpr::And(a, b) => a.eval_checked(register, written)? && b.eval_checked(register, written)?,
            CondExpr::Or(a, b) => a.eval_checked(register, written)? || b.eval_checked(register, written)?,
        })
    }

    /// Evaluates against a fully written register; bits beyond its length
    /// are reported as unwritten.
    pub fn eval(&self, register: &[bool]) -> Result<bool, CondError> {
        let written = vec![true; register.len()];
        self.eval_checked(register, &written)
    }

    /// Evaluation against a packed register (bit `i` of `reg` is cbit `i`).
    /// Callers guarantee the referenced bits were written.
    pub(crate) fn eval_packed(&self, reg: u64) -> bool {
        match self {
            CondExpr::Const(v) => *v,
            CondExpr::Bit(b) => (reg >> b) & 1 == 1,
            CondExpr::Not(e) => !e.eval_packed(reg),
            CondExpr::Xor(a, b) => a.eval_packed(reg) ^ b.eval_packed(reg),
            CondExpr::And(a, b) => a.eval_packed(reg) && b.eval_packed(reg),
            CondExpr::Or(a, b) => a.eval_packed(reg) || b.eval_packed(reg),
        }
    }

    fn is_binary(&self) -> bool {
        matches!(self, CondExpr::Xor(..) | CondExpr::And(..) | CondExpr::Or(..))
    }
}

// Binary children are always parenthesized so printing and parsing agree on
// tree shape regardless of associativity.
impl fmt::Display for CondExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |e: &CondExpr, f: &mut fmt::Formatter<'_>| {
            if e.is_binary() {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            CondExpr::Const(true) => write!(f, "1"),
            CondExpr::Const(false) => write!(f, "0"),
            CondExpr::Bit(b) => write!(f, "c{b}"),
            CondExpr::Not(e) => {
                write!(f, "!")?;
                child(e, f)
            }
            CondExpr::Xor(a, b) | CondExpr::And(a, b) | CondExpr::Or(a, b) => {
                let op = match self {
                    CondExpr::Xor(..) => '^',
                    CondExpr::And(..) => '&',
                    _ => '|',
                };
                child(a, f)?;
                write!(f, "{op}")?;
                child(b, f)
            }
        }
    }
}

/// Recursive-descent parser. Precedence, loosest first: `|`, `^`, `&`, `!`.
pub(crate) struct CondParser<'a> {
    chars: Vec<char>,
    pos: usize,
    src: &'a str,
}

impl<'a> CondParser<'a> {
    pub(crate) fn parse(src: &'a str) -> Result<CondExpr, String> {
        let mut p = CondParser { chars: src.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0, src };
        let e = p.or_expr()?;
        if p.pos != p.chars.len() {
            return Err(format!("trailing input in condition `{}`", p.src));
        }
        Ok(e)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn or_expr(&mut self) -> Result<CondExpr, String> {
        let mut lhs = self.xor_expr()?;
        while self.peek() == Some('|') {
            self.pos += 1;
            lhs = CondExpr::or(lhs, self.xor_expr()?);
        }
        Ok(lhs)
    }

    fn xor_expr(&mut self) -> Result<CondExpr, String> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some('^') {
            self.pos += 1;
            lhs = CondExpr::xor(lhs, self.and_expr()?);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<CondExpr, String> {
        let mut lhs = self.unary()?;
        while self.peek() == Some('&') {
            self.pos += 1;
            lhs = CondExpr::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<CondExpr, String> {
        match self.peek() {
            Some('!') => {
                self.pos += 1;
                Ok(CondExpr::not(self.unary()?))
            }
            Some('(') => {
                self.pos += 1;
                let e = self.or_expr()?;
                if self.peek() != Some(')') {
                    return Err(format!("unbalanced parentheses in `{}`", self.src));
                }
                self.pos += 1;
                Ok(e)
            }
            Some('0') => {
                self.pos += 1;
                Ok(CondExpr::Const(false))
            }
            Some('1') => {
                self.pos += 1;
                Ok(CondExpr::Const(true))
            }
            Some('c') => {
                self.pos += 1;
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                let digits: String = self.chars[start..self.pos].iter().collect();
                digits.parse().map(CondExpr::Bit).map_err(|_| format!("bad bit reference in `{}`", self.src))
            }
            _ => Err(format!("unexpected token in condition `{}`", self.src)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn xor_truth_values() {
        let e = CondExpr::xor(CondExpr::bit(0), CondExpr::bit(1));
        assert_eq!(e.eval(&[true, true]), Ok(false));
        assert_eq!(e.eval(&[true, false]), Ok(true));
        assert_eq!(CondExpr::Const(true).eval(&[]), Ok(true));
    }

    #[test]
    fn unwritten_bit_is_an_error() {
        let e = CondExpr::bit(2);
        assert_eq!(e.eval(&[true]), Err(CondError::UnwrittenBit(2)));
        assert_eq!(e.eval_checked(&[false, false, true], &[true, true, false]), Err(CondError::UnwrittenBit(2)));
    }

    #[test]
    fn parity_of_empty_set_is_false() {
        assert_eq!(CondExpr::parity(&[]), CondExpr::Const(false));
        assert_eq!(CondExpr::parity(&[0, 2]).eval(&[true, false, true]), Ok(false));
    }

    #[test]
    fn parses_with_precedence() {
        let e = CondParser::parse("c0^c1&!c2|1").unwrap();
        let want = CondExpr::or(
            CondExpr::xor(CondExpr::bit(0), CondExpr::and(CondExpr::bit(1), CondExpr::not(CondExpr::bit(2)))),
            CondExpr::Const(true),
        );
        assert_eq!(e, want);
        assert!(CondParser::parse("c0^").is_err());
        assert!(CondParser::parse("(c0").is_err());
    }

    fn arb_expr() -> impl Strategy<Value = CondExpr> {
        let leaf = prop_oneof![any::<bool>().prop_map(CondExpr::Const), (0usize..6).prop_map(CondExpr::Bit)];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(CondExpr::not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| CondExpr::xor(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| CondExpr::and(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| CondExpr::or(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(e in arb_expr()) {
            let text = e.to_string();
            prop_assert_eq!(CondParser::parse(&text).unwrap(), e);
        }

        #[test]
        fn packed_eval_matches_checked(e in arb_expr(), reg in 0u64..64) {
            let bits: Vec<bool> = (0..6).map(|i| (reg >> i) & 1 == 1).collect();
            prop_assert_eq!(e.eval(&bits).unwrap(), e.eval_packed(reg));
        }
    }
}
