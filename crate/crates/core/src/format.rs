//! Plain-text operator files.
//!
//! ```text
//! # contact structure
//! dim 3
//! unknowns eta1 eta2 eta3
//! eq z: d3(eta2) - d2(eta3) - x3*d1(eta3) + eta1
//! ```
//!
//! Optional `source_weights` / `target_weights` lines carry pairing weights. Expressions
//! are linear in the unknowns with rational-function coefficients in `x1..xn`; a head
//! `d<digits>` differentiates its argument (`d12 = d1 d2`).

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::algebra::{Rat, RatFunc};
use crate::error::{Error, Result};
use crate::operators::{DiffOp, MultiIndex, OpMatrix};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(Rat),
    Sym(char),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { line, column: col, message: msg.into() }
}

fn tokenize(src: &str, line: usize, col0: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = col0 + i;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            if i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                return Err(Error::NonRationalCoefficient {
                    line,
                    column: col,
                    message: format!("malformed number `{text}{}`", chars[i]),
                });
            }
            out.push(Token { tok: Tok::Num(decimal(&text, line, col)?), line, col });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line, col });
        } else if "+-*/^()".contains(c) {
            out.push(Token { tok: Tok::Sym(c), line, col });
            i += 1;
        } else {
            return Err(syntax(line, col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

fn decimal(text: &str, line: usize, col: usize) -> Result<Rat> {
    text.parse::<Rat>().map_err(|_| syntax(line, col, format!("malformed number `{text}`")))
}

#[derive(Clone, Debug)]
enum Value {
    Scalar(RatFunc),
    Vector(Vec<DiffOp>),
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    n: usize,
    unknowns: &'a BTreeMap<String, usize>,
    m: usize,
    line: usize,
    end_col: usize,
}

fn is_var(s: &str) -> Option<usize> {
    s.strip_prefix('x').filter(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit())).and_then(|r| r.parse().ok())
}

fn is_head(s: &str) -> Option<&str> {
    s.strip_prefix('d').filter(|r| !r.is_empty() && r.bytes().all(|b| b.is_ascii_digit()))
}

fn is_reserved(s: &str) -> bool {
    is_var(s).is_some() || is_head(s).is_some()
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map(|t| (t.line, t.col)).unwrap_or((self.line, self.end_col))
    }

    fn eat(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Sym(s), .. }) if *s == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        loop {
            let (line, col) = self.here();
            let sign = if self.eat('+') {
                1
            } else if self.eat('-') {
                -1
            } else {
                return Ok(acc);
            };
            let mut rhs = self.term()?;
            if sign < 0 {
                rhs = negate(rhs);
            }
            acc = add(acc, rhs, line, col)?;
        }
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.unary()?;
        loop {
            let (line, col) = self.here();
            if self.eat('*') {
                let rhs = self.unary()?;
                acc = mul(acc, rhs, line, col)?;
            } else if self.eat('/') {
                let rhs = self.unary()?;
                acc = div(acc, rhs, line, col)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Value> {
        if self.eat('-') {
            return Ok(negate(self.unary()?));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Value> {
        let base = self.atom()?;
        let (line, col) = self.here();
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        let e = match self.peek().cloned() {
            Some(Token { tok: Tok::Num(r), .. }) => {
                self.pos += 1;
                r
            }
            _ => return Err(syntax(line, col, "exponent must be an integer literal")),
        };
        if !e.is_integer() {
            return Err(Error::NonRationalCoefficient { line, column: col, message: format!("exponent {e}") });
        }
        let k: u32 = e.to_string().parse().map_err(|_| syntax(line, col, "exponent too large"))?;
        match base {
            Value::Scalar(f) => {
                let p = f.pow(k);
                if neg {
                    p.inv().map(Value::Scalar).map_err(|_| syntax(line, col, "division by zero"))
                } else {
                    Ok(Value::Scalar(p))
                }
            }
            Value::Vector(_) => Err(syntax(line, col, "powers of unknowns are not linear")),
        }
    }

    fn atom(&mut self) -> Result<Value> {
        let (line, col) = self.here();
        let Some(t) = self.peek().cloned() else {
            return Err(syntax(line, col, "unexpected end of expression"));
        };
        self.pos += 1;
        match t.tok {
            Tok::Num(r) => Ok(Value::Scalar(RatFunc::Const(r))),
            Tok::Sym('(') => {
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(syntax(line, col, "unclosed parenthesis"));
                }
                Ok(v)
            }
            Tok::Sym(c) => Err(syntax(line, col, format!("unexpected `{c}`"))),
            Tok::Ident(name) => {
                let call = matches!(self.peek(), Some(Token { tok: Tok::Sym('('), .. }));
                if let Some(digits) = is_head(&name).filter(|_| call) {
                    let mu = self.multi_index(digits, line, col)?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    if !self.eat(')') {
                        return Err(syntax(line, col + name.len(), "unclosed parenthesis"));
                    }
                    return match arg {
                        Value::Vector(v) => {
                            let d = DiffOp::dmu(mu);
                            Ok(Value::Vector(v.iter().map(|op| d.compose(op)).collect()))
                        }
                        Value::Scalar(_) => Err(syntax(line, col, "derivative heads apply to unknowns only")),
                    };
                }
                if call {
                    return Err(Error::NonRationalCoefficient {
                        line,
                        column: col,
                        message: format!("function `{name}`"),
                    });
                }
                if let Some(i) = is_var(&name) {
                    if i == 0 || i > self.n {
                        return Err(Error::UndeclaredSymbol { name, line, column: col });
                    }
                    return Ok(Value::Scalar(RatFunc::var(i - 1)));
                }
                match self.unknowns.get(&name) {
                    Some(&k) => {
                        let mut v = vec![DiffOp::zero(); self.m];
                        v[k] = DiffOp::one();
                        Ok(Value::Vector(v))
                    }
                    None => Err(Error::UndeclaredSymbol { name, line, column: col }),
                }
            }
        }
    }

    fn multi_index(&self, digits: &str, line: usize, col: usize) -> Result<MultiIndex> {
        let mut e = vec![0u8; self.n];
        for ch in digits.chars() {
            let i = ch.to_digit(10).unwrap_or(0) as usize;
            if i == 0 || i > self.n {
                return Err(Error::UndeclaredSymbol { name: format!("d{digits}"), line, column: col });
            }
            e[i - 1] += 1;
        }
        Ok(MultiIndex::from_slice(&e))
    }
}

fn negate(v: Value) -> Value {
    match v {
        Value::Scalar(f) => Value::Scalar(f.neg()),
        Value::Vector(v) => Value::Vector(v.iter().map(DiffOp::neg).collect()),
    }
}

fn add(a: Value, b: Value, line: usize, col: usize) -> Result<Value> {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(x.add(&y))),
        (Value::Vector(x), Value::Vector(y)) => Ok(Value::Vector(x.iter().zip(&y).map(|(p, q)| p.add(q)).collect())),
        (Value::Scalar(s), v) | (v, Value::Scalar(s)) if s.is_zero() => Ok(v),
        _ => Err(syntax(line, col, "term without an unknown in a linear equation")),
    }
}

fn mul(a: Value, b: Value, line: usize, col: usize) -> Result<Value> {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(x.mul(&y))),
        (Value::Scalar(s), Value::Vector(v)) | (Value::Vector(v), Value::Scalar(s)) => {
            Ok(Value::Vector(v.iter().map(|op| op.scale(&s)).collect()))
        }
        _ => Err(syntax(line, col, "product of unknowns is not linear")),
    }
}

fn div(a: Value, b: Value, line: usize, col: usize) -> Result<Value> {
    let Value::Scalar(d) = b else {
        return Err(syntax(line, col, "division by an unknown is not linear"));
    };
    let inv = d.inv().map_err(|_| syntax(line, col, "division by zero"))?;
    mul(a, Value::Scalar(inv), line, col)
}

fn parse_weights(words: &[&str], count: usize, line: usize) -> Result<Vec<Rat>> {
    if words.len() != count {
        return Err(syntax(line, 1, format!("expected {count} weights, found {}", words.len())));
    }
    let w = words
        .iter()
        .map(|w| w.parse::<Rat>().map_err(|_| syntax(line, 1, format!("malformed weight `{w}`"))))
        .collect::<Result<Vec<_>>>()?;
    if w.iter().any(Rat::is_zero) {
        return Err(syntax(line, 1, "weights must be nonzero"));
    }
    Ok(w)
}

fn check_label(name: &str, line: usize, col: usize) -> Result<()> {
    let ok = name.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_alphanumeric() || c == '_');
    if !ok {
        return Err(syntax(line, col, format!("invalid name `{name}`")));
    }
    if is_reserved(name) {
        return Err(syntax(line, col, format!("`{name}` is reserved for variables and derivatives")));
    }
    Ok(())
}

/// Parses an operator file into a labelled operator matrix.
pub fn parse_operator_file(text: &str) -> Result<OpMatrix> {
    let mut n: Option<usize> = None;
    let mut unknowns: Option<Vec<String>> = None;
    let mut sw_line: Option<(usize, Vec<String>)> = None;
    let mut tw_line: Option<(usize, Vec<String>)> = None;
    let mut eqs: Vec<(usize, usize, String, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim_start();
        if trimmed.trim().is_empty() {
            continue;
        }
        let indent = content.len() - trimmed.len();
        let (kw, rest) = trimmed.split_once(char::is_whitespace).unwrap_or((trimmed.trim_end(), ""));
        let words: Vec<&str> = rest.split_whitespace().collect();
        match kw {
            "dim" => {
                let v = words.first().and_then(|w| w.parse::<usize>().ok()).filter(|&v| (1..=9).contains(&v));
                match (v, words.len()) {
                    (Some(v), 1) => n = Some(v),
                    _ => return Err(syntax(line, indent + 1, "expected `dim <1..9>`")),
                }
            }
            "unknowns" => unknowns = Some(words.iter().map(|w| w.to_string()).collect()),
            "source_weights" => sw_line = Some((line, words.iter().map(|w| w.to_string()).collect())),
            "target_weights" => tw_line = Some((line, words.iter().map(|w| w.to_string()).collect())),
            "eq" => {
                let Some((name, expr)) = rest.split_once(':') else {
                    return Err(syntax(line, indent + 1, "expected `eq <name>: <expression>`"));
                };
                let expr_col = indent + kw.len() + 1 + name.len() + 2;
                eqs.push((line, expr_col, name.trim().to_string(), expr.to_string()));
            }
            other => return Err(syntax(line, indent + 1, format!("unknown header `{other}`"))),
        }
    }
    let n = n.ok_or_else(|| syntax(1, 1, "missing `dim` header"))?;
    let unknowns = unknowns.ok_or_else(|| syntax(1, 1, "missing `unknowns` header"))?;
    let mut index = BTreeMap::new();
    for (k, u) in unknowns.iter().enumerate() {
        check_label(u, 1, 1)?;
        if index.insert(u.clone(), k).is_some() {
            return Err(syntax(1, 1, format!("unknown `{u}` declared twice")));
        }
    }
    let m = unknowns.len();
    let mut rows = Vec::new();
    let mut names = Vec::new();
    for (line, col, name, expr) in eqs {
        check_label(&name, line, 4)?;
        if names.contains(&name) {
            return Err(syntax(line, 4, format!("equation `{name}` declared twice")));
        }
        let toks = tokenize(&expr, line, col)?;
        let end_col = col + expr.chars().count();
        let mut p = Parser { toks, pos: 0, n, unknowns: &index, m, line, end_col };
        let v = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(syntax(t.line, t.col, "unexpected token after expression"));
        }
        let row = match v {
            Value::Vector(v) => v,
            Value::Scalar(s) if s.is_zero() => vec![DiffOp::zero(); m],
            Value::Scalar(_) => return Err(syntax(line, col, "equation does not involve any unknown")),
        };
        rows.push(row);
        names.push(name);
    }
    let p = rows.len();
    let sw = sw_line.map(|(l, w)| parse_weights(&w.iter().map(String::as_str).collect::<Vec<_>>(), m, l)).transpose()?;
    let tw = tw_line.map(|(l, w)| parse_weights(&w.iter().map(String::as_str).collect::<Vec<_>>(), p, l)).transpose()?;
    Ok(OpMatrix::from_rows(n, m, rows).with_labels(unknowns, names)?.with_weights(sw, tw))
}

fn weights_line(key: &str, w: &[Rat]) -> String {
    let parts: Vec<String> = w.iter().map(Rat::to_string).collect();
    format!("{key} {}", parts.join(" "))
}

/// Prints an operator in the file format; [`parse_operator_file`] inverts it.
pub fn print_operator_file(a: &OpMatrix) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dim {}", a.n());
    let _ = writeln!(s, "unknowns {}", a.source_labels().join(" ").trim_end());
    if let Some(w) = a.source_weights() {
        let _ = writeln!(s, "{}", weights_line("source_weights", w));
    }
    if let Some(w) = a.target_weights() {
        let _ = writeln!(s, "{}", weights_line("target_weights", w));
    }
    for i in 0..a.nrows() {
        let _ = writeln!(s, "eq {}: {}", a.target_labels()[i], a.row_string(i));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gallery::{self, Metric};

    fn contact_text() -> &'static str {
        "dim 3\nunknowns eta1 eta2 eta3\neq z: d3(eta2) - d2(eta3) - x3*d1(eta3) + eta1\n"
    }

    #[test]
    fn contact_cc_parses() {
        let a = parse_operator_file(contact_text()).unwrap();
        assert!(a.entries_eq(&gallery::contact_cc()));
        assert_eq!(a.target_labels(), &["z".to_string()]);
    }

    #[test]
    fn maxwell_row() {
        let a = parse_operator_file("dim 3\nunknowns A B C\neq s11: d33(B) + d22(C)\n").unwrap();
        assert!(a.select_rows(&[0]).entries_eq(&gallery::maxwell().select_rows(&[0])));
    }

    #[test]
    fn unclosed_parenthesis() {
        let e = parse_operator_file("dim 2\nunknowns u\neq e: d1(u\n").unwrap_err();
        assert!(matches!(e, Error::Syntax { line: 3, .. }), "{e:?}");
    }

    #[test]
    fn error_kinds() {
        let hdr = "dim 2\nunknowns u v\n";
        let e = parse_operator_file(&format!("{hdr}eq e: d1(w)\n")).unwrap_err();
        assert!(matches!(e, Error::UndeclaredSymbol { ref name, line: 3, column: 10 } if name == "w"), "{e:?}");
        let e = parse_operator_file(&format!("{hdr}eq e: x3*u\n")).unwrap_err();
        assert!(matches!(e, Error::UndeclaredSymbol { .. }));
        let e = parse_operator_file(&format!("{hdr}eq e: sin(x1)*u\n")).unwrap_err();
        assert!(matches!(e, Error::NonRationalCoefficient { .. }));
        let e = parse_operator_file(&format!("{hdr}eq e: x1^(1/2)*u\n")).unwrap_err();
        assert!(matches!(e, Error::Syntax { .. }));
        let e = parse_operator_file(&format!("{hdr}eq e: x1^0.5*u\n")).unwrap_err();
        assert!(matches!(e, Error::NonRationalCoefficient { .. }));
        let e = parse_operator_file(&format!("{hdr}eq e: u*v\n")).unwrap_err();
        assert!(matches!(e, Error::Syntax { .. }));
        let e = parse_operator_file(&format!("{hdr}eq e: u + 1\n")).unwrap_err();
        assert!(matches!(e, Error::Syntax { .. }));
        let e = parse_operator_file(&format!("{hdr}eq e: d1(x1)\n")).unwrap_err();
        assert!(matches!(e, Error::Syntax { .. }));
    }

    #[test]
    fn coefficient_arithmetic() {
        let a = parse_operator_file("dim 2\nunknowns u\neq e: (x1 + 1/2)/x2^2*d12(u) - 0.25*u + 0\n").unwrap();
        let b = parse_operator_file(&print_operator_file(&a)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.row_string(0), "((x1 + 1/2)/x2^2)*d12(u) - (1/4)*u");
    }

    #[test]
    fn derivative_of_product_expands() {
        let a = parse_operator_file("dim 1\nunknowns u\neq e: d1(x1*u)\n").unwrap();
        assert_eq!(a.row_string(0), "x1*d1(u) + u");
    }

    #[test]
    fn gallery_round_trips() {
        let e = Metric::euclid(3);
        for name in gallery::GALLERY_NAMES {
            let a = gallery::by_name(name, 3, &e).or_else(|_| gallery::by_name(name, 4, &Metric::minkowski(4))).unwrap();
            let text = print_operator_file(&a);
            assert_eq!(parse_operator_file(&text).unwrap(), a, "{name}");
        }
    }
}
