//! Whitelisted expression grammar for potentials and weights.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' number)?
//! atom   := number | x | x1 | x2 | '(' expr ')' | '-' atom
//!         | exp '(' expr ')' | gauss '(' expr ')'
//! ```
//!
//! `gauss(t)` is `exp(-t²)`. `x` aliases `x1`.

use anyhow::{bail, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    X(usize),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Exp,
    Gauss,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == '.'
                        || bytes[i] == 'e'
                        || bytes[i] == 'E'
                        || ((bytes[i] == '+' || bytes[i] == '-')
                            && i > start
                            && (bytes[i - 1] == 'e' || bytes[i - 1] == 'E')))
                {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                out.push(Token::Num(text.parse()?));
            }
            'a'..='z' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric()) {
                    i += 1;
                }
                let word: String = bytes[start..i].iter().collect();
                match word.as_str() {
                    "x" | "x1" => out.push(Token::X(0)),
                    "x2" => out.push(Token::X(1)),
                    "exp" => out.push(Token::Exp),
                    "gauss" => out.push(Token::Gauss),
                    other => bail!("unknown identifier '{other}' in expression"),
                }
            }
            other => bail!("unexpected character '{other}' in expression"),
        }
    }
    Ok(out)
}

/// Parsed expression tree.
#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    X(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Exp(Box<Expr>),
    Gauss(Box<Expr>),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut node = self.term()?;
        while let Some(op) = self.peek() {
            match op {
                Token::Plus => {
                    self.next();
                    node = Expr::Add(Box::new(node), Box::new(self.term()?));
                }
                Token::Minus => {
                    self.next();
                    node = Expr::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => break,
            }
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut node = self.factor()?;
        while matches!(self.peek(), Some(Token::Star)) {
            self.next();
            node = Expr::Mul(Box::new(node), Box::new(self.factor()?));
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<Expr> {
        // unary minus binds looser than '^', so -x^2 means -(x^2)
        if matches!(self.peek(), Some(Token::Minus)) {
            self.next();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.next();
            let neg = if matches!(self.peek(), Some(Token::Minus)) {
                self.next();
                true
            } else {
                false
            };
            match self.next() {
                Some(Token::Num(e)) => {
                    let e = if neg { -e } else { e };
                    return Ok(Expr::Pow(Box::new(base), e));
                }
                other => bail!("exponent must be a number, got {other:?}"),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::X(k)) => Ok(Expr::X(k)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => bail!("missing closing parenthesis"),
                }
            }
            Some(Token::Exp) => Ok(Expr::Exp(Box::new(self.paren_arg()?))),
            Some(Token::Gauss) => Ok(Expr::Gauss(Box::new(self.paren_arg()?))),
            other => bail!("unexpected token {other:?}"),
        }
    }

    fn paren_arg(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::LParen) => {}
            _ => bail!("expected '(' after function name"),
        }
        let inner = self.expr()?;
        match self.next() {
            Some(Token::RParen) => Ok(inner),
            _ => bail!("missing closing parenthesis after function argument"),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            tokens: tokenize(src)?,
            pos: 0,
        };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            bail!("trailing tokens in expression '{src}'");
        }
        Ok(e)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X(k) => x.get(*k).copied().unwrap_or(0.0),
            Expr::Neg(e) => -e.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Pow(a, e) => a.eval(x).powf(*e),
            Expr::Exp(e) => e.eval(x).exp(),
            Expr::Gauss(e) => {
                let t = e.eval(x);
                (-t * t).exp()
            }
        }
    }
}
