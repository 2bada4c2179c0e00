//! The `.wco` operator description format: a line grammar with `#`
//! comments.
//!
//! ```text
//! p = 2
//! weight {
//!   except 1..3 = 0
//!   tail from 4 : 1 + 1/n
//! }
//! map {
//!   except 1..5 = 1
//!   tail from 6 : identity
//! }
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use num_traits::{One, Zero};
use wco_core::rational::{self, Rational};
use wco_core::symbols::{MapTail, PowerSeq, SelfMap, Term, Weight};
use wco_core::{Nat, OperatorSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

type Parsed<T> = Result<T, ParseError>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpecFile {
    pub label: Option<String>,
    pub op: OperatorSpec,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Int(u64),
    Word(String),
    Sym(char),
    DotDot,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Int(n) => write!(f, "'{n}'"),
            Tok::Word(w) => write!(f, "'{w}'"),
            Tok::Sym(c) => write!(f, "'{c}'"),
            Tok::DotDot => f.write_str("'..'"),
        }
    }
}

/// Tokens of one line with their (1-based) columns.
struct Line {
    no: usize,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
    /// Free text of a `label = …` line, which is not tokenized.
    label: Option<String>,
}

impl Line {
    fn lex(no: usize, text: &str) -> Parsed<Line> {
        if let Some(rest) = text.trim_start().strip_prefix("label") {
            if let Some(value) = rest.trim_start().strip_prefix('=') {
                let value = value.split('#').next().unwrap_or("").trim().to_string();
                return Ok(Line { no, toks: vec![(1, Tok::Word("label".into()))], pos: 0, end_col: 1, label: Some(value) });
            }
        }
        let chars: Vec<char> = text.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c == '#' {
                break;
            } else if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let n = s.parse().map_err(|_| ParseError { line: no, col, message: format!("integer {s} is too large") })?;
                toks.push((col, Tok::Int(n)));
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                toks.push((col, Tok::Word(chars[start..i].iter().collect())));
            } else if c == '.' && chars.get(i + 1) == Some(&'.') {
                toks.push((col, Tok::DotDot));
                i += 2;
            } else if "=:{}+-*/^()".contains(c) {
                toks.push((col, Tok::Sym(c)));
                i += 1;
            } else {
                return Err(ParseError { line: no, col, message: format!("unexpected character '{c}'") });
            }
        }
        Ok(Line { no, toks, pos: 0, end_col: chars.len() + 1, label: None })
    }

    fn is_blank(&self) -> bool {
        self.toks.is_empty()
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(c, _)| *c)
    }

    fn err<T>(&self, message: impl Into<String>) -> Parsed<T> {
        Err(ParseError { line: self.no, col: self.col(), message: message.into() })
    }

    fn expected<T>(&self, what: &str) -> Parsed<T> {
        match self.peek() {
            Some(t) => self.err(format!("expected {what}, found {t}")),
            None => self.err(format!("expected {what}, found end of line")),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.toks.get(self.pos + k).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.peek().cloned();
        self.pos += 1;
        t
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sym(&mut self, c: char) -> Parsed<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.expected(&format!("'{c}'"))
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Word(x)) if x == w) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn word(&mut self, w: &str) -> Parsed<()> {
        if self.eat_word(w) {
            Ok(())
        } else {
            self.expected(&format!("'{w}'"))
        }
    }

    fn int(&mut self) -> Parsed<u64> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n;
                self.pos += 1;
                Ok(n)
            }
            _ => self.expected("an integer"),
        }
    }

    fn positive(&mut self) -> Parsed<u64> {
        let col = self.col();
        let n = self.int()?;
        if n == 0 {
            return Err(ParseError { line: self.no, col, message: "expected a positive integer, found 0".into() });
        }
        Ok(n)
    }

    /// `[-] a [/ b]`, where `/` followed by `n` is left alone.
    fn rational(&mut self) -> Parsed<Rational> {
        let neg = self.eat_sym('-');
        let num = self.int()?;
        let mut q = Rational::from_integer(num.into());
        if self.peek() == Some(&Tok::Sym('/')) && matches!(self.peek_at(1), Some(Tok::Int(_))) {
            self.pos += 1;
            let col = self.col();
            let den = self.int()?;
            if den == 0 {
                return Err(ParseError { line: self.no, col, message: "zero denominator".into() });
            }
            q /= Rational::from_integer(den.into());
        }
        Ok(if neg { -q } else { q })
    }

    fn finish(&self) -> Parsed<()> {
        if self.pos < self.toks.len() {
            return self.expected("end of line");
        }
        Ok(())
    }
}

/// `coeff [/ n [^ alpha]]`, alpha an integer or `(a/b)`.
fn term(line: &mut Line, negate: bool) -> Parsed<Term> {
    let coeff = line.rational()?;
    let coeff = if negate { -coeff } else { coeff };
    if !line.eat_sym('/') {
        return Ok(Term::constant(coeff));
    }
    line.word("n")?;
    let alpha = if line.eat_sym('^') {
        if line.eat_sym('(') {
            let a = line.rational()?;
            line.sym(')')?;
            a
        } else {
            line.rational()?
        }
    } else {
        Rational::one()
    };
    if alpha <= Rational::zero() {
        return line.err("exponents must be positive");
    }
    Ok(Term::new(coeff, alpha))
}

fn terms(line: &mut Line) -> Parsed<Vec<Term>> {
    let mut out = vec![term(line, false)?];
    loop {
        if line.eat_sym('+') {
            out.push(term(line, false)?);
        } else if line.eat_sym('-') {
            out.push(term(line, true)?);
        } else {
            return Ok(out);
        }
    }
}

fn map_tail(line: &mut Line) -> Parsed<MapTail> {
    if line.eat_word("identity") {
        return Ok(MapTail::Identity);
    }
    if line.eat_word("const") {
        return Ok(MapTail::Const(line.positive()?));
    }
    let a = if let Some(Tok::Int(a)) = line.peek() {
        let a = *a;
        line.bump();
        line.sym('*')?;
        a
    } else {
        1
    };
    if !line.eat_word("n") {
        return line.expected("'identity', 'const', 'n + b', 'a*n + b' or 'n^e'");
    }
    if a == 0 {
        return line.err("affine slope must be positive");
    }
    if a == 1 && line.eat_sym('^') {
        let col = line.col();
        let e = line.int()?;
        if e < 2 {
            return Err(ParseError { line: line.no, col, message: format!("power exponent {e} must be at least 2") });
        }
        let e = u32::try_from(e).map_err(|_| ParseError { line: line.no, col, message: "exponent too large".into() })?;
        return Ok(MapTail::Power(e));
    }
    let sign = if line.eat_sym('+') {
        1
    } else if line.eat_sym('-') {
        -1
    } else {
        return Ok(MapTail::Affine { a, b: 0 });
    };
    let col = line.col();
    let b = i64::try_from(line.int()?).map_err(|_| ParseError { line: line.no, col, message: "offset too large".into() })?;
    Ok(MapTail::Affine { a, b: sign * b })
}

/// `except n = v` or `except a..b = v`; returns the key range and the value's line.
fn except_keys(line: &mut Line) -> Parsed<(u64, u64)> {
    let lo = line.positive()?;
    let hi = if line.peek() == Some(&Tok::DotDot) {
        line.bump();
        let col = line.col();
        let hi = line.positive()?;
        if hi < lo {
            return Err(ParseError { line: line.no, col, message: format!("empty range {lo}..{hi}") });
        }
        hi
    } else {
        lo
    };
    line.sym('=')?;
    Ok((lo, hi))
}

#[derive(Default)]
struct Block<V> {
    overrides: BTreeMap<Nat, (V, usize, usize)>,
    tail: Option<(Nat, usize)>,
}

impl<V> Block<V> {
    fn insert(&mut self, line: &Line, col: usize, (lo, hi): (u64, u64), v: V) -> Parsed<()>
    where
        V: Clone,
    {
        if hi - lo > 1 << 20 {
            return Err(ParseError { line: line.no, col, message: "override range too long".into() });
        }
        for n in lo..=hi {
            if self.overrides.insert(n, (v.clone(), line.no, col)).is_some() {
                return Err(ParseError { line: line.no, col, message: format!("position {n} is given twice") });
            }
        }
        Ok(())
    }

    /// Every exception key must lie below the tail start.
    fn check_keys(&self) -> Parsed<()> {
        if let Some((start, _)) = self.tail {
            if let Some((&k, &(_, line, col))) = self.overrides.range(start..).next() {
                return Err(ParseError {
                    line,
                    col,
                    message: format!("exception at {k} is not below the tail start {start}"),
                });
            }
        }
        Ok(())
    }
}

pub fn parse_spec(text: &str) -> Parsed<SpecFile> {
    let mut label = None;
    let mut p: Option<Rational> = None;
    let mut weight: Option<Weight> = None;
    let mut map: Option<SelfMap> = None;
    let mut lines = text.lines().enumerate().map(|(i, t)| Line::lex(i + 1, t));
    let mut last_line = 1;

    while let Some(line) = lines.next() {
        let mut line = line?;
        last_line = line.no;
        if line.is_blank() {
            continue;
        }
        if let Some(l) = line.label.take() {
            label = Some(l);
            continue;
        }
        if line.eat_word("p") {
            if p.is_some() {
                return line.err("p is given twice");
            }
            line.sym('=')?;
            let col = line.col();
            let v = line.rational()?;
            line.finish()?;
            if v < Rational::one() {
                return Err(ParseError { line: line.no, col, message: format!("p = {v} must be at least 1") });
            }
            p = Some(v);
            continue;
        }
        let header = line.no;
        let is_weight = line.eat_word("weight");
        if !is_weight && !line.eat_word("map") {
            return line.expected("'p', 'label', 'weight' or 'map'");
        }
        if (is_weight && weight.is_some()) || (!is_weight && map.is_some()) {
            return line.err(format!("second '{}' block", if is_weight { "weight" } else { "map" }));
        }
        line.sym('{')?;
        line.finish()?;

        let mut wblock: Block<Rational> = Block::default();
        let mut mblock: Block<Nat> = Block::default();
        let mut wterms: Option<Vec<Term>> = None;
        let mut mtail: Option<MapTail> = None;
        let mut tail_line = (header, 1);
        let mut closed = false;
        for inner in lines.by_ref() {
            let mut line = inner?;
            last_line = line.no;
            if line.is_blank() {
                continue;
            }
            if line.eat_sym('}') {
                line.finish()?;
                closed = true;
                break;
            }
            let col = line.col();
            if line.eat_word("except") {
                let kcol = line.col();
                let keys = except_keys(&mut line)?;
                if is_weight {
                    let v = line.rational()?;
                    line.finish()?;
                    wblock.insert(&line, kcol, keys, v)?;
                } else {
                    let v = line.positive()?;
                    line.finish()?;
                    mblock.insert(&line, kcol, keys, v)?;
                }
            } else if line.eat_word("tail") {
                if wblock.tail.is_some() || mblock.tail.is_some() || wterms.is_some() {
                    return Err(ParseError { line: line.no, col, message: "second tail line".into() });
                }
                if is_weight && line.eat_word("zero") {
                    line.finish()?;
                    wterms = Some(Vec::new());
                    continue;
                }
                line.word("from")?;
                let start = line.positive()?;
                line.sym(':')?;
                tail_line = (line.no, line.col());
                if is_weight {
                    wterms = Some(terms(&mut line)?);
                    wblock.tail = Some((start, line.no));
                } else {
                    mtail = Some(map_tail(&mut line)?);
                    mblock.tail = Some((start, line.no));
                }
                line.finish()?;
            } else {
                return line.expected("'except', 'tail' or '}'");
            }
        }
        if !closed {
            return Err(ParseError { line: last_line, col: 1, message: "unterminated block: expected '}'".into() });
        }
        let semantic = |e: wco_core::Error| ParseError { line: tail_line.0, col: tail_line.1, message: e.to_string() };
        if is_weight {
            wblock.check_keys()?;
            let Some(t) = wterms else {
                return Err(ParseError { line: header, col: 1, message: "weight block needs a tail line".into() });
            };
            let overrides = wblock.overrides.into_iter().map(|(n, (v, _, _))| (n, v));
            weight = Some(PowerSeq::new(overrides, t).map_err(semantic)?);
        } else {
            mblock.check_keys()?;
            let Some(t) = mtail else {
                return Err(ParseError { line: header, col: 1, message: "map block needs a tail line".into() });
            };
            let overrides = mblock.overrides.into_iter().map(|(n, (v, _, _))| (n, v));
            map = Some(SelfMap::new(overrides, t).map_err(semantic)?);
        }
    }
    let missing = |what: &str| ParseError { line: last_line, col: 1, message: format!("missing {what}") };
    let p = p.ok_or_else(|| missing("'p = <rational>'"))?;
    let weight = weight.ok_or_else(|| missing("weight block"))?;
    let map = map.ok_or_else(|| missing("map block"))?;
    let op = OperatorSpec::new(weight, map, p)
        .map_err(|e| ParseError { line: 1, col: 1, message: e.to_string() })?;
    Ok(SpecFile { label, op })
}

/// Runs of consecutive keys with equal values, as `(lo, hi, value)`.
fn runs<V: PartialEq + Clone>(m: &BTreeMap<Nat, V>) -> Vec<(Nat, Nat, V)> {
    let mut out: Vec<(Nat, Nat, V)> = Vec::new();
    for (&k, v) in m {
        match out.last_mut() {
            Some((_, hi, w)) if *hi + 1 == k && w == v => *hi = k,
            _ => out.push((k, k, v.clone())),
        }
    }
    out
}

fn keys(lo: Nat, hi: Nat) -> String {
    if lo == hi {
        lo.to_string()
    } else {
        format!("{lo}..{hi}")
    }
}

/// Canonical text; parsing it gives back the same operator.
pub fn print_spec(spec: &SpecFile) -> String {
    let mut out = String::new();
    if let Some(l) = &spec.label {
        writeln!(out, "label = {l}").unwrap();
    }
    let op = &spec.op;
    writeln!(out, "p = {}", rational::format(&op.p)).unwrap();
    out.push_str("weight {\n");
    for (lo, hi, v) in runs(op.u.overrides()) {
        writeln!(out, "  except {} = {}", keys(lo, hi), rational::format(&v)).unwrap();
    }
    if op.u.has_zero_formula() {
        out.push_str("  tail zero\n");
    } else {
        writeln!(out, "  tail from {} : {}", op.u.tail_start(), op.u.formula_string()).unwrap();
    }
    out.push_str("}\nmap {\n");
    for (lo, hi, v) in runs(op.phi.overrides()) {
        writeln!(out, "  except {} = {v}", keys(lo, hi)).unwrap();
    }
    writeln!(out, "  tail from {} : {}", op.phi.tail_start(), op.phi.tail()).unwrap();
    out.push_str("}\n");
    out
}

/// `"<index>:<rational>, …"` as a finitely supported sequence.
pub fn parse_vector(text: &str) -> Result<PowerSeq, String> {
    let mut entries = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (i, v) = item.split_once(':').ok_or_else(|| format!("expected <index>:<rational>, found '{item}'"))?;
        let i: Nat = i.trim().parse().map_err(|_| format!("bad index '{}'", i.trim()))?;
        if i == 0 {
            return Err("indices start at 1".into());
        }
        let v = rational::parse(v.trim()).ok_or_else(|| format!("bad rational '{}'", v.trim()))?;
        entries.push((i, v));
    }
    PowerSeq::finite(entries).map_err(|e| e.to_string())
}

/// Coordinates of a finitely supported sequence, `"6:7/6, 7:8/7"`.
pub fn format_vector(f: &PowerSeq) -> String {
    let coords: Vec<String> =
        f.overrides().iter().filter(|(_, v)| !v.is_zero()).map(|(n, v)| format!("{n}:{}", rational::format(v))).collect();
    if f.has_zero_formula() {
        if coords.is_empty() {
            "0".into()
        } else {
            coords.join(", ")
        }
    } else {
        let mut s = coords.join(", ");
        if !s.is_empty() {
            s.push_str(", ");
        }
        write!(s, "n ≥ {}: {}", f.tail_start(), f.formula_string()).unwrap();
        s
    }
}
