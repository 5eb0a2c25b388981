//! The polynomial text format: `coeff * w1*w2*...` terms joined by `+`/`-`.
//!
//! Coefficients are `p/q`, decimals, or a parenthesised Gaussian rational
//! such as `(1/2 - 3/4 i)`. A bare `i` is the imaginary unit and `X^k`
//! repeats a letter.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use super::{AlgebraError, Polynomial, VariableSet, Word};
use crate::scalar::Scalar;

fn split_terms(s: &str) -> Vec<(bool, &str)> {
    let bytes = s.as_bytes();
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    let mut neg = false;
    for (k, &b) in bytes.iter().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 => {
                let so_far = s[start..k].trim();
                let exponent = k >= 2
                    && matches!(bytes[k - 1], b'e' | b'E')
                    && !so_far.is_empty()
                    && so_far.bytes().all(|c| c.is_ascii_digit() || matches!(c, b'.' | b'e' | b'E'));
                if exponent {
                    continue;
                }
                if !so_far.is_empty() || start > 0 {
                    out.push((neg, so_far));
                }
                neg = b == b'-';
                start = k + 1;
            }
            _ => {}
        }
    }
    let last = s[start..].trim();
    if !last.is_empty() || out.is_empty() || start > 0 {
        out.push((neg, last));
    }
    out
}

fn split_factors(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0usize;
    for (k, b) in s.bytes().enumerate() {
        match b {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'*' if depth == 0 => {
                out.push(s[start..k].trim());
                start = k + 1;
            }
            _ => {}
        }
    }
    out.push(s[start..].trim());
    out
}

fn parse_term(t: &str, vars: &VariableSet) -> Result<(Scalar, Word), AlgebraError> {
    let mut coeff = Scalar::one();
    let mut letters = Vec::new();
    for f in split_factors(t) {
        if f.is_empty() {
            return Err(AlgebraError::Parse(format!("empty factor in {t:?}")));
        }
        let first = f.as_bytes()[0];
        if first.is_ascii_digit() || first == b'.' || first == b'(' {
            let c = Scalar::parse(f).map_err(|e| AlgebraError::Parse(format!("{e}")))?;
            coeff = &coeff * &c;
        } else if f == "i" {
            coeff = &coeff * &Scalar::i();
        } else {
            let (label, pow) = match f.split_once('^') {
                Some((l, p)) => {
                    let p: usize = p.trim().parse().map_err(|_| AlgebraError::Parse(format!("bad exponent in {f:?}")))?;
                    (l.trim(), p)
                }
                None => (f, 1),
            };
            let id = vars.id_of(label).ok_or_else(|| AlgebraError::UnknownVariable(String::from(label)))?;
            letters.extend(core::iter::repeat_n(id, pow));
        }
    }
    Ok((coeff, Word::from_letters(letters)))
}

/// Parses a polynomial over the labels of `vars`. No reduction is applied.
pub fn parse_polynomial(s: &str, vars: &VariableSet) -> Result<Polynomial, AlgebraError> {
    if s.trim().is_empty() {
        return Err(AlgebraError::Parse(String::from("empty polynomial")));
    }
    let mut p = Polynomial::zero();
    for (neg, t) in split_terms(s) {
        if t.is_empty() {
            return Err(AlgebraError::Parse(format!("dangling sign in {s:?}")));
        }
        let (mut c, w) = parse_term(t, vars)?;
        if neg {
            c = -c;
        }
        p.add_term(w, c);
    }
    Ok(p)
}

/// Parses `A0*B1` (or `1`) into a word.
pub fn parse_word(s: &str, vars: &VariableSet) -> Result<Word, AlgebraError> {
    let t = s.trim();
    if t == "1" {
        return Ok(Word::one());
    }
    let mut letters = Vec::new();
    for f in split_factors(t) {
        let id = vars.id_of(f).ok_or_else(|| AlgebraError::UnknownVariable(String::from(f)))?;
        letters.push(id);
    }
    Ok(Word::from_letters(letters))
}

pub(super) fn format_polynomial(p: &Polynomial, vars: &VariableSet) -> String {
    if p.is_zero() {
        return String::from("0");
    }
    let mut s = String::new();
    for (k, (w, c)) in p.terms().enumerate() {
        let word = w.display(vars);
        if c.is_real() {
            let neg = c.re.is_negative();
            let mag = c.re.abs();
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if w.is_one() {
                s.push_str(&format!("{mag}"));
            } else if mag.is_one() {
                s.push_str(&word);
            } else {
                s.push_str(&format!("{mag} * {word}"));
            }
        } else {
            if k > 0 {
                s.push_str(" + ");
            }
            if w.is_one() {
                s.push_str(&format!("({c})"));
            } else {
                s.push_str(&format!("({c}) * {word}"));
            }
        }
    }
    let _ = Scalar::zero();
    s
}
