//! A small arithmetic expression language for configuration files.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Names are the variables `x, y, t, u, p` and the constants `pi, e`.
//! Functions: `sin cos tan exp ln sqrt abs sinh cosh tanh`.

use std::fmt;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Vars {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub u: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Var {
    X,
    Y,
    T,
    U,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
    Sinh,
    Cosh,
    Tanh,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            _ => return None,
        })
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Tan => v.tan(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Sqrt => v.sqrt(),
            Func::Abs => v.abs(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, v: &Vars) -> f64 {
        match self {
            Node::Num(c) => *c,
            Node::Var(Var::X) => v.x,
            Node::Var(Var::Y) => v.y,
            Node::Var(Var::T) => v.t,
            Node::Var(Var::U) => v.u,
            Node::Var(Var::P) => v.p,
            Node::Neg(a) => -a.eval(v),
            Node::Add(a, b) => a.eval(v) + b.eval(v),
            Node::Sub(a, b) => a.eval(v) - b.eval(v),
            Node::Mul(a, b) => a.eval(v) * b.eval(v),
            Node::Div(a, b) => a.eval(v) / b.eval(v),
            Node::Pow(a, b) => match b.as_ref() {
                Node::Num(n) if n.fract() == 0.0 && n.abs() <= 64.0 => a.eval(v).powi(*n as i32),
                _ => a.eval(v).powf(b.eval(v)),
            },
            Node::Call(f, a) => f.apply(a.eval(v)),
        }
    }

    fn uses(&self, var: Var) -> bool {
        match self {
            Node::Num(_) => false,
            Node::Var(w) => *w == var,
            Node::Neg(a) | Node::Call(_, a) => a.uses(var),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.uses(var) || b.uses(var)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at character {}", self.message, self.position + 1)
    }
}

impl std::error::Error for ParseError {}

/// A parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, ParseError> {
        let tokens = tokenize(source)?;
        let mut parser = Parser { tokens, pos: 0 };
        let root = parser.expr()?;
        if let Some((tok, at)) = parser.tokens.get(parser.pos) {
            return Err(ParseError { position: *at, message: format!("unexpected {tok}") });
        }
        Ok(Self { source: source.to_string(), root })
    }

    pub fn eval(&self, vars: &Vars) -> f64 {
        self.root.eval(vars)
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Whether the expression mentions the sweep parameter `p`.
    pub fn uses_parameter(&self) -> bool {
        self.root.uses(Var::P)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Name(String),
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Num(v) => write!(f, "number {v}"),
            Token::Name(n) => write!(f, "name `{n}`"),
            Token::Op(c) => write!(f, "`{c}`"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part, e.g. 1e-3
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
            let text: String = chars[start..i].iter().collect();
            let value = text
                .parse()
                .map_err(|_| ParseError { position: start, message: format!("malformed number `{text}`") })?;
            out.push((Token::Num(value), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Token::Name(chars[start..i].iter().collect()), start));
        } else if "+-*/^()".contains(c) {
            out.push((Token::Op(c), i));
            i += 1;
        } else {
            return Err(ParseError { position: i, message: format!("unexpected character `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
}

impl Parser {
    fn peek_op(&self) -> Option<char> {
        match self.tokens.get(self.pos) {
            Some((Token::Op(c), _)) => Some(*c),
            _ => None,
        }
    }

    fn end_position(&self) -> usize {
        self.tokens.last().map_or(0, |(_, at)| at + 1)
    }

    fn expect_op(&mut self, op: char) -> Result<(), ParseError> {
        match self.tokens.get(self.pos) {
            Some((Token::Op(c), _)) if *c == op => {
                self.pos += 1;
                Ok(())
            }
            Some((tok, at)) => Err(ParseError { position: *at, message: format!("expected `{op}`, found {tok}") }),
            None => Err(ParseError { position: self.end_position(), message: format!("expected `{op}`") }),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { Node::Add(lhs.into(), rhs.into()) } else { Node::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(op @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { Node::Mul(lhs.into(), rhs.into()) } else { Node::Div(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Node::Neg(self.unary()?.into()));
        }
        if self.peek_op() == Some('+') {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            // right associative: a^b^c = a^(b^c)
            let exponent = self.unary()?;
            return Ok(Node::Pow(base.into(), exponent.into()));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        let Some((tok, at)) = self.tokens.get(self.pos).cloned() else {
            return Err(ParseError { position: self.end_position(), message: "unexpected end of expression".into() });
        };
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::Op('(') => {
                let inner = self.expr()?;
                self.expect_op(')')?;
                Ok(inner)
            }
            Token::Name(name) => {
                if let Some(func) = Func::lookup(&name) {
                    self.expect_op('(')?;
                    let arg = self.expr()?;
                    self.expect_op(')')?;
                    return Ok(Node::Call(func, arg.into()));
                }
                Ok(match name.as_str() {
                    "x" => Node::Var(Var::X),
                    "y" => Node::Var(Var::Y),
                    "t" => Node::Var(Var::T),
                    "u" => Node::Var(Var::U),
                    "p" => Node::Var(Var::P),
                    "pi" => Node::Num(std::f64::consts::PI),
                    "e" => Node::Num(std::f64::consts::E),
                    _ => {
                        return Err(ParseError { position: at, message: format!("unknown name `{name}`") });
                    }
                })
            }
            other => Err(ParseError { position: at, message: format!("unexpected {other}") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, vars: Vars) -> f64 {
        Expr::parse(src).unwrap().eval(&vars)
    }

    #[test]
    fn precedence_and_associativity() {
        let v = Vars::default();
        assert_eq!(eval("1 + 2 * 3", v), 7.0);
        assert_eq!(eval("(1 + 2) * 3", v), 9.0);
        assert_eq!(eval("2 ^ 3 ^ 2", v), 512.0);
        assert_eq!(eval("-2 ^ 2", v), -4.0);
        assert_eq!(eval("8 / 4 / 2", v), 1.0);
        assert_eq!(eval("10 - 4 - 3", v), 3.0);
        assert_eq!(eval("2 ^ -1", v), 0.5);
    }

    #[test]
    fn variables_functions_and_constants() {
        let v = Vars { x: 0.25, y: 2.0, t: 0.5, u: 3.0, p: -1.0 };
        assert!((eval("sin(pi*x)", v) - (std::f64::consts::PI * 0.25).sin()).abs() < 1e-15);
        assert_eq!(eval("u + p*u^3", v), 3.0 - 27.0);
        assert_eq!(eval("exp(0) + ln(e) + sqrt(y*8) + abs(p)", v), 1.0 + 1.0 + 4.0 + 1.0);
        assert_eq!(eval("1.5e-3 * 2E2", v), 0.3);
        assert_eq!(eval("t*y", v), 1.0);
    }

    #[test]
    fn errors_point_at_the_problem() {
        let err = Expr::parse("1 + foo").unwrap_err();
        assert_eq!(err.position, 4);
        assert!(err.message.contains("foo"));
        assert!(Expr::parse("sin x").is_err());
        assert!(Expr::parse("(1 + 2").is_err());
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("2 $ 3").is_err());
        assert!(Expr::parse("").is_err());
        assert!(Expr::parse("1 2").is_err());
    }

    #[test]
    fn parameter_detection() {
        assert!(Expr::parse("u + p*u^3").unwrap().uses_parameter());
        assert!(!Expr::parse("u + pi*u^3").unwrap().uses_parameter());
    }
}
