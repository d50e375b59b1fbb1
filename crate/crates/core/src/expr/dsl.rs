//! Metric description language.
//!
//! ```text
//! program := stmt (';' stmt)* ';'?
//! stmt    := 'dim' '=' INT | 'g' '[' INT ']' '[' INT ']' '=' expr
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' INT | '^' '(' '-'? INT ')' | '^' '-' INT)?
//! atom    := NUMBER | VAR | FUNC '(' expr ')' | 'g' '[' INT ']' '[' INT ']' | '(' expr ')'
//! ```
//!
//! Variables are `x0 .. x{dim-1}`; functions are `sin cos exp log sqrt`.
//! `#` starts a comment running to the end of the line. Unset off-diagonal
//! entries are zero and one-sided assignments are mirrored.

use super::{Expr, Func};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<(Vec<Token>, (usize, usize))> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s.parse().map_err(|_| err(tl, tc, format!("malformed number '{s}'")))?;
            col += i - start;
            tokens.push(Token {
                tok: Tok::Num(v),
                line: tl,
                column: tc,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            tokens.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                column: tc,
            });
            continue;
        }
        if "+-*/^()[];=,".contains(c) {
            tokens.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                column: tc,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(err(tl, tc, format!("unexpected character '{c}'")));
    }
    Ok((tokens, (line, col)))
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    end: (usize, usize),
    vars: &'a [String],
    grid: Option<&'a [Option<Expr>]>,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.tokens
            .get(self.pos)
            .map(|t| (t.line, t.column))
            .unwrap_or(self.end)
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        let (l, c) = self.here();
        Err(err(l, c, message))
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            match self.peek() {
                None => self.fail(format!("expected '{c}' but input ended")),
                Some(t) => self.fail(format!("expected '{c}', found {t:?}")),
            }
        }
    }

    fn integer(&mut self) -> Result<i64> {
        match self.peek() {
            Some(Tok::Num(v)) if v.fract() == 0.0 => {
                let v = *v as i64;
                self.pos += 1;
                Ok(v)
            }
            _ => self.fail("expected an integer"),
        }
    }

    fn index_pair(&mut self) -> Result<(usize, usize)> {
        self.expect_sym('[')?;
        let at = self.here();
        let i = self.integer()?;
        self.expect_sym(']')?;
        self.expect_sym('[')?;
        let j = self.integer()?;
        self.expect_sym(']')?;
        if i < 0 || j < 0 || i as usize >= self.dim || j as usize >= self.dim {
            return Err(err(
                at.0,
                at.1,
                format!("index g[{i}][{j}] out of range for dim={}", self.dim),
            ));
        }
        Ok((i as usize, j as usize))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat_sym('+') {
                acc = &acc + &self.term()?;
            } else if self.eat_sym('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat_sym('*') {
                acc = &acc * &self.unary()?;
            } else if self.eat_sym('/') {
                acc = &acc / &self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym('-') {
            Ok(-&self.unary()?)
        } else if self.eat_sym('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if !self.eat_sym('^') {
            return Ok(base);
        }
        let k = if self.eat_sym('(') {
            let neg = self.eat_sym('-');
            let k = self.integer()?;
            self.expect_sym(')')?;
            if neg {
                -k
            } else {
                k
            }
        } else if self.eat_sym('-') {
            -self.integer()?
        } else {
            self.integer()?
        };
        if k.abs() > 64 {
            return self.fail("exponent magnitude above 64");
        }
        Ok(base.powi(k as i32))
    }

    fn atom(&mut self) -> Result<Expr> {
        let (line, column) = self.here();
        let tok = match self.peek() {
            None => return self.fail("unexpected end of input"),
            Some(t) => t.clone(),
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::constant(v))
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if let Some(func) = Func::from_name(&name) {
                    self.expect_sym('(')?;
                    let arg = self.expr()?;
                    self.expect_sym(')')?;
                    return Ok(Expr::call(func, &arg));
                }
                if let Some(k) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::var(k));
                }
                if name == "g" {
                    if let Some(grid) = self.grid {
                        let (i, j) = self.index_pair()?;
                        return match &grid[i * self.dim + j] {
                            Some(e) => Ok(e.clone()),
                            None if i != j => Ok(Expr::zero()),
                            None => Err(err(line, column, format!("g[{i}][{j}] used before assignment"))),
                        };
                    }
                }
                Err(err(line, column, format!("unknown identifier '{name}'")))
            }
            Tok::Sym(c) => self.fail(format!("unexpected '{c}'")),
        }
    }
}

/// Parses a standalone expression over the named variables.
pub fn parse_expr_vars(text: &str, vars: &[&str]) -> Result<Expr> {
    let (tokens, end) = lex(text)?;
    let names: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
    let mut p = Parser {
        tokens,
        pos: 0,
        end,
        vars: &names,
        grid: None,
        dim: 0,
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return p.fail("trailing input after expression");
    }
    Ok(e)
}

/// Parses an expression over `x0 .. x{nvars-1}`.
pub fn parse_expr(text: &str, nvars: usize) -> Result<Expr> {
    let names: Vec<String> = (0..nvars).map(|i| format!("x{i}")).collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    parse_expr_vars(text, &refs)
}

/// Symmetric grid of component expressions.
#[derive(Debug, Clone)]
pub struct MetricGrid {
    pub dim: usize,
    /// Row-major `dim × dim`, symmetric.
    pub components: Vec<Expr>,
}

impl MetricGrid {
    pub fn get(&self, i: usize, j: usize) -> &Expr {
        &self.components[i * self.dim + j]
    }

    /// Serializes back to DSL text.
    pub fn to_dsl(&self) -> String {
        let mut out = format!("dim={};\n", self.dim);
        for i in 0..self.dim {
            for j in i..self.dim {
                let e = self.get(i, j);
                if i != j && e.is_const(0.0) {
                    continue;
                }
                out.push_str(&format!("g[{i}][{j}]={e};\n"));
            }
        }
        out
    }
}

/// Parses a metric program into a symmetric component grid.
pub fn parse_metric_dsl(text: &str) -> Result<MetricGrid> {
    let (tokens, end) = lex(text)?;
    let mut dim: Option<usize> = None;
    let mut grid: Vec<Option<Expr>> = Vec::new();
    // remembers which orientation was written explicitly
    let mut explicit: Vec<bool> = Vec::new();
    let mut pos = 0;
    let mut names: Vec<String> = Vec::new();
    while pos < tokens.len() {
        let t = &tokens[pos];
        match &t.tok {
            Tok::Sym(';') => {
                pos += 1;
            }
            Tok::Ident(id) if id == "dim" => {
                if dim.is_some() {
                    return Err(err(t.line, t.column, "dim declared twice"));
                }
                let mut p = Parser {
                    tokens: tokens.clone(),
                    pos: pos + 1,
                    end,
                    vars: &[],
                    grid: None,
                    dim: 0,
                };
                p.expect_sym('=')?;
                let at = p.here();
                let n = p.integer()?;
                if !(crate::tensor::MIN_DIM as i64..=crate::tensor::MAX_DIM as i64).contains(&n) {
                    return Err(err(at.0, at.1, format!("dim={n} outside supported range 2..=6")));
                }
                let n = n as usize;
                dim = Some(n);
                grid = vec![None; n * n];
                explicit = vec![false; n * n];
                names = (0..n).map(|i| format!("x{i}")).collect();
                pos = p.pos;
                terminate(&tokens, &mut pos)?;
            }
            Tok::Ident(id) if id == "g" => {
                let Some(n) = dim else {
                    return Err(err(t.line, t.column, "dim must be declared before components"));
                };
                let (i, j, value, next) = {
                    let mut p = Parser {
                        tokens: tokens.clone(),
                        pos: pos + 1,
                        end,
                        vars: &names,
                        grid: Some(&grid),
                        dim: n,
                    };
                    let (i, j) = p.index_pair()?;
                    p.expect_sym('=')?;
                    let value = p.expr()?;
                    (i, j, value, p.pos)
                };
                let (line, column) = (t.line, t.column);
                pos = next;
                terminate(&tokens, &mut pos)?;
                if explicit[i * n + j] {
                    return Err(err(line, column, format!("g[{i}][{j}] assigned twice")));
                }
                if i != j && explicit[j * n + i] {
                    let other = grid[j * n + i].as_ref().unwrap();
                    if other.to_string() != value.to_string() {
                        return Err(err(
                            line,
                            column,
                            format!("non-symmetric grid: g[{i}][{j}] differs from g[{j}][{i}]"),
                        ));
                    }
                }
                explicit[i * n + j] = true;
                grid[i * n + j] = Some(value.clone());
                grid[j * n + i] = Some(value);
            }
            Tok::Ident(id) => {
                return Err(err(t.line, t.column, format!("unknown statement '{id}'")));
            }
            other => {
                return Err(err(
                    t.line,
                    t.column,
                    format!("unexpected {other:?} at statement start"),
                ));
            }
        }
    }
    let n = dim.ok_or_else(|| err(end.0, end.1, "missing dim declaration"))?;
    Ok(MetricGrid {
        dim: n,
        components: grid.into_iter().map(|e| e.unwrap_or_else(Expr::zero)).collect(),
    })
}

fn terminate(tokens: &[Token], pos: &mut usize) -> Result<()> {
    match tokens.get(*pos) {
        None => Ok(()),
        Some(t) if t.tok == Tok::Sym(';') => {
            *pos += 1;
            Ok(())
        }
        Some(t) => Err(err(t.line, t.column, format!("expected ';', found {:?}", t.tok))),
    }
}
