//! Recursive-descent parser.
//!
//! Grammar (lowest to highest binding):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := atom ('^' exponent)?
//! exponent:= ['+' | '-'] INTEGER | '(' ['+' | '-'] INTEGER ')'
//! atom    := NUMBER | 'pi' | VAR | FUNC '(' sum ')' | '(' sum ')'
//! ```
//!
//! Positions in errors are 0-based character offsets into the input.

use std::sync::Arc;

use super::{BinaryOp, Expression, Node, UnaryOp};
use crate::error::ExprError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Int(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn syntax(pos: usize, message: impl Into<String>) -> ExprError {
    ExprError::Syntax {
        pos,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                let mut j = i;
                let mut integral = true;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '.' {
                    integral = false;
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut m = j + 1;
                    if m < chars.len() && (chars[m] == '+' || chars[m] == '-') {
                        m += 1;
                    }
                    if m < chars.len() && chars[m].is_ascii_digit() {
                        integral = false;
                        while m < chars.len() && chars[m].is_ascii_digit() {
                            m += 1;
                        }
                        j = m;
                    }
                }
                let lexeme: String = chars[i..j].iter().collect();
                i = j - 1;
                if integral {
                    match lexeme.parse::<i64>() {
                        Ok(v) => Tok::Int(v),
                        Err(_) => Tok::Num(
                            lexeme
                                .parse()
                                .map_err(|_| syntax(start, format!("bad number '{lexeme}'")))?,
                        ),
                    }
                } else {
                    Tok::Num(
                        lexeme
                            .parse()
                            .map_err(|_| syntax(start, format!("bad number '{lexeme}'")))?,
                    )
                }
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let ident: String = chars[i..j].iter().collect();
                i = j - 1;
                Tok::Ident(ident)
            }
            other => return Err(syntax(start, format!("unexpected character '{other}'"))),
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

struct Parser<'v> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    vars: &'v [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), ExprError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(
                self.pos(),
                format!("expected {}, found {}", want.describe(), self.peek().describe()),
            ))
        }
    }

    fn sum(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Node::Unary(UnaryOp::Neg, Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exponent = self.exponent()?;
        if *self.peek() == Tok::Caret {
            return Err(syntax(self.pos(), "chained '^' is ambiguous; parenthesize the base"));
        }
        Ok(Node::Pow(Box::new(base), exponent))
    }

    fn exponent(&mut self) -> Result<i32, ExprError> {
        let parenthesized = *self.peek() == Tok::LParen;
        if parenthesized {
            self.bump();
        }
        let negative = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let pos = self.pos();
        let magnitude = match self.bump() {
            Tok::Int(v) => v,
            Tok::Num(_) => return Err(syntax(pos, "exponent must be an integer literal")),
            other => {
                return Err(syntax(
                    pos,
                    format!("expected integer exponent, found {}", other.describe()),
                ))
            }
        };
        let value = if negative { -magnitude } else { magnitude };
        let value = i32::try_from(value).map_err(|_| syntax(pos, "exponent out of range"))?;
        if parenthesized {
            self.expect(Tok::RParen)?;
        }
        Ok(value)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v) => Ok(Node::Const(v)),
            Tok::Int(v) => Ok(Node::Const(v as f64)),
            Tok::LParen => {
                let inner = self.sum()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let op = UnaryOp::from_function_name(&name)
                        .ok_or_else(|| syntax(pos, format!("unknown function '{name}'")))?;
                    self.bump();
                    let arg = self.sum()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Node::Unary(op, Box::new(arg)));
                }
                if let Some(slot) = self.vars.iter().position(|v| *v == name) {
                    Ok(Node::Var(slot))
                } else if name == "pi" {
                    Ok(Node::Const(std::f64::consts::PI))
                } else {
                    Err(ExprError::UndeclaredVariable { name, pos })
                }
            }
            other => Err(syntax(pos, format!("unexpected {}", other.describe()))),
        }
    }
}

/// Parse `text` against the declared variable list.
pub fn parse(text: &str, vars: Arc<[String]>) -> Result<Expression, ExprError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        vars: &vars,
    };
    let root = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.pos(), format!("unexpected {}", p.peek().describe())));
    }
    Ok(Expression::from_node(root, vars))
}
