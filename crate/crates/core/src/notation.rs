//! Canonical text forms for classes.
//!
//! ```text
//! (d; m1,m2,...)          plane blowup
//! (d:e; m1,m2,...)@F1     blowup of F1
//! (a x b; m1,m2,...)@F0   blowup of F0
//! ```
//!
//! Parsing ignores whitespace, accepts `×` for `x`, `−` for `-`, and runs
//! written as `value^count` (`1^9`). Printing always emits the expanded
//! form, so `parse(print(c)) == c`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::picard::{PicardClass, RuledClass, Surface};

/// Upper limit on a single `value^count` run.
const MAX_RUN: usize = 1 << 20;

/// Either kind of class, as read from text.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AnyClass {
    Picard(PicardClass),
    Ruled(RuledClass),
}

impl AnyClass {
    pub fn as_picard(&self) -> Option<&PicardClass> {
        match self {
            AnyClass::Picard(p) => Some(p),
            AnyClass::Ruled(_) => None,
        }
    }

    pub fn as_ruled(&self) -> Option<&RuledClass> {
        match self {
            AnyClass::Ruled(r) => Some(r),
            AnyClass::Picard(_) => None,
        }
    }

    /// Self-intersection and anticanonical degree, in whichever lattice the
    /// class lives.
    pub fn invariants(&self) -> (BigInt, BigInt) {
        match self {
            AnyClass::Picard(p) => (p.self_intersection(), p.anticanonical_degree()),
            AnyClass::Ruled(r) => (r.self_intersection(), r.anticanonical_degree()),
        }
    }
}

impl From<PicardClass> for AnyClass {
    fn from(p: PicardClass) -> Self {
        AnyClass::Picard(p)
    }
}

impl From<RuledClass> for AnyClass {
    fn from(r: RuledClass) -> Self {
        AnyClass::Ruled(r)
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, mults: &[BigInt]) -> fmt::Result {
    for (i, m) in mults.iter().enumerate() {
        if i == 0 {
            write!(f, " {m}")?;
        } else {
            write!(f, ",{m}")?;
        }
    }
    Ok(())
}

impl fmt::Display for PicardClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.degree())?;
        write_list(f, self.mults())?;
        write!(f, ")")
    }
}

impl fmt::Display for RuledClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuledClass::F1 { d, e, mults } => {
                write!(f, "({d}:{e};")?;
                write_list(f, mults)?;
                write!(f, ")@F1")
            }
            RuledClass::F0 { a, b, mults } => {
                write!(f, "({a} x {b};")?;
                write_list(f, mults)?;
                write!(f, ")@F0")
            }
        }
    }
}

impl fmt::Display for AnyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyClass::Picard(p) => p.fmt(f),
            AnyClass::Ruled(r) => r.fmt(f),
        }
    }
}

struct Cursor<'a> {
    chars: Vec<(usize, char)>,
    at: usize,
    src: &'a str,
}

impl<'a> Cursor<'a> {
    fn new(src: &'a str) -> Self {
        let chars = src
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .collect();
        Self { chars, at: 0, src }
    }

    fn pos(&self) -> usize {
        self.chars.get(self.at).map_or(self.src.len(), |&(p, _)| p)
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.at += 1;
        }
        c
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, want: char) -> Result<()> {
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => self.err(format!("expected '{want}', found '{c}'")),
            None => self.err(format!("expected '{want}', found end of input")),
        }
    }

    fn eat(&mut self, want: char) -> bool {
        if self.peek() == Some(want) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<BigInt> {
        let mut s = String::new();
        match self.peek() {
            Some('-') | Some('\u{2212}') => {
                self.bump();
                s.push('-');
            }
            Some('+') => {
                self.bump();
            }
            _ => {}
        }
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            s.push(c);
            self.bump();
        }
        if s.is_empty() || s == "-" {
            return self.err("expected an integer");
        }
        Ok(s.parse().expect("digits"))
    }

    fn count(&mut self) -> Result<usize> {
        let start = self.pos();
        let n = self.int()?;
        usize::try_from(&n)
            .ok()
            .filter(|&n| n <= MAX_RUN)
            .ok_or(Error::Parse {
                pos: start,
                msg: format!("run length {n} out of range"),
            })
    }

    fn list(&mut self) -> Result<Vec<BigInt>> {
        let mut out = Vec::new();
        if self.peek() == Some(')') {
            return Ok(out);
        }
        loop {
            let value = self.int()?;
            if self.eat('^') {
                let n = self.count()?;
                out.extend(std::iter::repeat_n(value, n));
            } else {
                out.push(value);
            }
            if !self.eat(',') {
                return Ok(out);
            }
        }
    }

    fn suffix(&mut self) -> Result<Option<Surface>> {
        if !self.eat('@') {
            return Ok(None);
        }
        let mut tag = String::new();
        while let Some(c) = self.bump() {
            tag.push(c);
        }
        match tag.as_str() {
            "F0" | "f0" => Ok(Some(Surface::F0)),
            "F1" | "f1" => Ok(Some(Surface::F1)),
            _ => self.err(format!("unknown surface tag '@{tag}'")),
        }
    }
}

/// Parses any of the three canonical forms.
pub fn parse_class(src: &str) -> Result<AnyClass> {
    let mut cur = Cursor::new(src);
    cur.expect('(')?;
    let first = cur.int()?;
    let second = match cur.peek() {
        Some(':') => {
            cur.bump();
            Some((Surface::F1, cur.int()?))
        }
        Some('x') | Some('X') | Some('\u{d7}') => {
            cur.bump();
            Some((Surface::F0, cur.int()?))
        }
        _ => None,
    };
    let mults = if cur.eat(';') { cur.list()? } else { Vec::new() };
    cur.expect(')')?;
    let tag = cur.suffix()?;
    if let Some(c) = cur.peek() {
        return cur.err(format!("unexpected trailing '{c}'"));
    }
    match (second, tag) {
        (None, None) => Ok(AnyClass::Picard(PicardClass::new(first, mults))),
        (Some((Surface::F1, e)), Some(Surface::F1)) => {
            Ok(AnyClass::Ruled(RuledClass::f1(first, e, mults)))
        }
        (Some((Surface::F0, b)), Some(Surface::F0)) => {
            Ok(AnyClass::Ruled(RuledClass::f0(first, b, mults)))
        }
        (None, Some(s)) => Err(Error::Parse {
            pos: 0,
            msg: format!("a class tagged @{s:?} needs its 'd:e' or 'a x b' head"),
        }),
        (Some((s, _)), None) => Err(Error::Parse {
            pos: src.len(),
            msg: format!("missing surface tag @{s:?}"),
        }),
        (Some((s, _)), Some(t)) => Err(Error::Parse {
            pos: src.len(),
            msg: format!("head notation is for {s:?} but tag says {t:?}"),
        }),
    }
}

impl FromStr for AnyClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_class(s)
    }
}

impl FromStr for PicardClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match parse_class(s)? {
            AnyClass::Picard(p) => Ok(p),
            AnyClass::Ruled(_) => Err(Error::Parse {
                pos: 0,
                msg: "expected a plane class '(d; m...)'".into(),
            }),
        }
    }
}

impl FromStr for RuledClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match parse_class(s)? {
            AnyClass::Ruled(r) => Ok(r),
            AnyClass::Picard(_) => Err(Error::Parse {
                pos: 0,
                msg: "expected a class tagged @F0 or @F1".into(),
            }),
        }
    }
}

macro_rules! serde_via_string {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

serde_via_string!(PicardClass);
serde_via_string!(RuledClass);
serde_via_string!(AnyClass);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn prints_canonical_forms() {
        assert_eq!(PicardClass::from_ints(0, &[0, 0, -2]).to_string(), "(0; 0,0,-2)");
        assert_eq!(PicardClass::from_ints(1, &[]).to_string(), "(1;)");
        assert_eq!(
            RuledClass::f1_ints(13, 6, &[3, 3, 4]).to_string(),
            "(13:6; 3,3,4)@F1"
        );
        assert_eq!(RuledClass::f0_ints(2, 3, &[1]).to_string(), "(2 x 3; 1)@F0");
    }

    #[test]
    fn parses_power_runs_and_whitespace() {
        let c: PicardClass = " ( 3 ; 1 ^ 9 ) ".parse().unwrap();
        assert_eq!(c, PicardClass::uniform(3, 1, 9));
        let c: RuledClass = "(15:8; 4^10)@F1".parse().unwrap();
        assert_eq!(c, RuledClass::f1(15, 8, vec![4.into(); 10]));
        let c: RuledClass = "(2×3;1)@F0".parse().unwrap();
        assert_eq!(c, RuledClass::f0_ints(2, 3, &[1]));
        let c: PicardClass = "(0; 0,0,0,0,\u{2212}1)".parse().unwrap();
        assert_eq!(c, PicardClass::from_ints(0, &[0, 0, 0, 0, -1]));
        let c: PicardClass = "(4)".parse().unwrap();
        assert_eq!(c.r(), 0);
        let c: PicardClass = "(2; 1^0, 3)".parse().unwrap();
        assert_eq!(c, PicardClass::from_ints(2, &[3]));
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in [
            "",
            "3; 1",
            "(3; 1,)",
            "(3: 1; 1)",
            "(3; 1)@F1",
            "(3 x 1; 1)@F1",
            "(3; 1) junk",
            "(3; a)",
            "(3; 1^-2)",
            "(3:1; 1)@F2",
        ] {
            assert!(parse_class(bad).is_err(), "{bad:?} should not parse");
        }
    }

    fn any_class() -> impl Strategy<Value = AnyClass> {
        let mults = prop::collection::vec(-30i64..30, 0..12);
        prop_oneof![
            (-50i64..50, mults.clone())
                .prop_map(|(d, m)| AnyClass::Picard(PicardClass::from_ints(d, &m))),
            (-50i64..50, -50i64..50, mults.clone())
                .prop_map(|(d, e, m)| AnyClass::Ruled(RuledClass::f1_ints(d, e, &m))),
            (-50i64..50, -50i64..50, mults)
                .prop_map(|(a, b, m)| AnyClass::Ruled(RuledClass::f0_ints(a, b, &m))),
        ]
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(c in any_class()) {
            let text = c.to_string();
            prop_assert_eq!(parse_class(&text).unwrap(), c.clone());
            let json = serde_json::to_string(&c).unwrap();
            prop_assert_eq!(serde_json::from_str::<AnyClass>(&json).unwrap(), c);
        }
    }
}
