//! Recursive-descent parser for the expression language.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | constant | variable | function '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so `-x^2` is
//! `-(x^2)` and `2^-1^2` is `2^(-(1^2))`.

use super::{BinOp, Func, Node};
use crate::error::ParseError;
use crate::expr::layout::VariableLayout;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
}

impl Lexer {
    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek_char(&self, at: usize) -> Option<char> {
        self.chars.get(at).copied()
    }

    fn next(&mut self) -> Result<(Tok, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        let Some(c) = self.peek_char(start) else {
            return Ok((Tok::End, start));
        };
        if c.is_ascii_digit() || (c == '.' && self.peek_char(start + 1).is_some_and(|d| d.is_ascii_digit())) {
            return self.number(start);
        }
        if c.is_ascii_alphabetic() {
            let mut end = start;
            while self.peek_char(end).is_some_and(|d| d.is_ascii_alphanumeric() || d == '_') {
                end += 1;
            }
            self.pos = end;
            let word: String = self.chars[start..end].iter().collect();
            return Ok((Tok::Ident(word), start));
        }
        if "+-*/^(),".contains(c) {
            self.pos += 1;
            return Ok((Tok::Sym(c), start));
        }
        Err(ParseError::Syntax { offset: start, message: format!("unexpected character {c:?}") })
    }

    fn number(&mut self, start: usize) -> Result<(Tok, usize), ParseError> {
        let digits = |lx: &Lexer, mut at: usize| {
            while lx.peek_char(at).is_some_and(|d| d.is_ascii_digit()) {
                at += 1;
            }
            at
        };
        let mut end = digits(self, start);
        if self.peek_char(end) == Some('.') {
            end = digits(self, end + 1);
        }
        if matches!(self.peek_char(end), Some('e' | 'E')) {
            let mut exp = end + 1;
            if matches!(self.peek_char(exp), Some('+' | '-')) {
                exp += 1;
            }
            if self.peek_char(exp).is_some_and(|d| d.is_ascii_digit()) {
                end = digits(self, exp);
            }
        }
        let text: String = self.chars[start..end].iter().collect();
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset: start,
            message: format!("malformed number {text:?}"),
        })?;
        self.pos = end;
        Ok((Tok::Num(value), start))
    }
}

pub(super) struct Parser<'a> {
    lexer: Lexer,
    tok: Tok,
    at: usize,
    layout: &'a VariableLayout,
}

impl<'a> Parser<'a> {
    pub(super) fn new(text: &str, layout: &'a VariableLayout) -> Result<Self, ParseError> {
        let mut lexer = Lexer { chars: text.chars().collect(), pos: 0 };
        let (tok, at) = lexer.next()?;
        Ok(Parser { lexer, tok, at, layout })
    }

    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, at) = self.lexer.next()?;
        self.tok = tok;
        self.at = at;
        Ok(())
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match &self.tok {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier {s:?}"),
            Tok::Sym(c) => format!("{c:?}"),
            Tok::End => "end of input".to_string(),
        };
        ParseError::Syntax { offset: self.at, message: format!("expected {wanted}, found {found}") }
    }

    pub(super) fn parse(mut self) -> Result<Node, ParseError> {
        if self.tok == Tok::End {
            return Err(ParseError::Syntax { offset: 0, message: "empty expression".into() });
        }
        let node = self.expr()?;
        if self.tok != Tok::End {
            return Err(self.unexpected("operator or end of input"));
        }
        Ok(node)
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump()?;
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.tok == Tok::Sym('-') {
            self.bump()?;
            let inner = self.unary()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if self.tok == Tok::Sym('^') {
            self.bump()?;
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Node::Const(v))
            }
            Tok::Sym('(') => {
                self.bump()?;
                let inner = self.expr()?;
                if self.tok != Tok::Sym(')') {
                    return Err(self.unexpected("')'"));
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                let at = self.at;
                self.bump()?;
                if let Some(func) = Func::from_name(&name) {
                    return self.call(func, name, at);
                }
                match name.as_str() {
                    "pi" => return Ok(Node::Const(std::f64::consts::PI)),
                    "e" => return Ok(Node::Const(std::f64::consts::E)),
                    _ => {}
                }
                match self.layout.index_of(&name) {
                    Some(k) => Ok(Node::Var(k)),
                    None => Err(ParseError::UnknownIdentifier { name, offset: at }),
                }
            }
            _ => Err(self.unexpected("operand")),
        }
    }

    fn call(&mut self, func: Func, name: String, at: usize) -> Result<Node, ParseError> {
        if self.tok != Tok::Sym('(') {
            return Err(self.unexpected(&format!("'(' after function {name}")));
        }
        self.bump()?;
        let mut args = Vec::new();
        if self.tok != Tok::Sym(')') {
            args.push(self.expr()?);
            while self.tok == Tok::Sym(',') {
                self.bump()?;
                args.push(self.expr()?);
            }
        }
        if self.tok != Tok::Sym(')') {
            return Err(self.unexpected("')' or ','"));
        }
        self.bump()?;
        if args.len() != 1 {
            return Err(ParseError::Arity { name, expected: 1, found: args.len(), offset: at });
        }
        Ok(Node::Call(func, Box::new(args.pop().unwrap())))
    }
}
