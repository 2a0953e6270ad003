use super::ast::{CmpOp, Formula, Term, VarName};
use num::bigint::BigInt;
use num::Zero;

/// Syntax or well-formedness error with source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Sym(&'static str),
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.pos];
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            message: message.into(),
        }
    }

    fn tokens(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        while let Some(b) = self.peek() {
            let (line, col) = (self.line, self.col);
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.bump();
                }
                b'#' => {
                    // comment to end of line
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                b'0'..=b'9' => {
                    let mut digits = String::new();
                    while let Some(c) = self.peek() {
                        if c.is_ascii_digit() {
                            digits.push(self.bump() as char);
                        } else {
                            break;
                        }
                    }
                    let value: BigInt = digits.parse().expect("digit run parses");
                    out.push(Token {
                        tok: Tok::Int(value),
                        line,
                        col,
                    });
                }
                b'a'..=b'z' => {
                    let mut name = String::new();
                    name.push(self.bump() as char);
                    while let Some(c) = self.peek() {
                        if c.is_ascii_lowercase() || c.is_ascii_digit() || c == b'_' {
                            name.push(self.bump() as char);
                        } else {
                            break;
                        }
                    }
                    out.push(Token {
                        tok: Tok::Ident(name),
                        line,
                        col,
                    });
                }
                // Uppercase letters appear only as the quantifier symbols.
                b'E' | b'A' => {
                    let name = (self.bump() as char).to_string();
                    if let Some(c) = self.peek() {
                        if c.is_ascii_alphanumeric() || c == b'_' {
                            return Err(self.error("variables are lowercase"));
                        }
                    }
                    out.push(Token {
                        tok: Tok::Ident(name),
                        line,
                        col,
                    });
                }
                b'B'..=b'Z' => return Err(self.error("variables are lowercase")),
                b'<' => {
                    self.bump();
                    let sym = match self.peek() {
                        Some(b'-') if self.peek2() == Some(b'>') => {
                            self.bump();
                            self.bump();
                            "<->"
                        }
                        Some(b'=') => {
                            self.bump();
                            "<="
                        }
                        _ => "<",
                    };
                    out.push(Token {
                        tok: Tok::Sym(sym),
                        line,
                        col,
                    });
                }
                b'>' => {
                    self.bump();
                    let sym = if self.peek() == Some(b'=') {
                        self.bump();
                        ">="
                    } else {
                        ">"
                    };
                    out.push(Token {
                        tok: Tok::Sym(sym),
                        line,
                        col,
                    });
                }
                b'!' => {
                    self.bump();
                    let sym = if self.peek() == Some(b'=') {
                        self.bump();
                        "!="
                    } else {
                        "!"
                    };
                    out.push(Token {
                        tok: Tok::Sym(sym),
                        line,
                        col,
                    });
                }
                b'-' => {
                    self.bump();
                    let sym = if self.peek() == Some(b'>') {
                        self.bump();
                        "->"
                    } else {
                        "-"
                    };
                    out.push(Token {
                        tok: Tok::Sym(sym),
                        line,
                        col,
                    });
                }
                b'=' | b'+' | b'*' | b'%' | b'&' | b'|' | b'(' | b')' | b'.' => {
                    let sym = match self.bump() {
                        b'=' => "=",
                        b'+' => "+",
                        b'*' => "*",
                        b'%' => "%",
                        b'&' => "&",
                        b'|' => "|",
                        b'(' => "(",
                        b')' => ")",
                        b'.' => ".",
                        _ => unreachable!(),
                    };
                    out.push(Token {
                        tok: Tok::Sym(sym),
                        line,
                        col,
                    });
                }
                other => {
                    return Err(self.error(format!(
                        "unexpected character '{}'",
                        other as char
                    )))
                }
            }
        }
        Ok(out)
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    fresh: u32,
    /// Stack of (source name, internal name) scopes for alpha-renaming.
    scopes: Vec<(String, VarName)>,
}

impl Parser {
    fn here(&self) -> (usize, usize) {
        if let Some(t) = self.tokens.get(self.pos) {
            (t.line, t.col)
        } else if let Some(t) = self.tokens.last() {
            (t.line, t.col + 1)
        } else {
            (1, 1)
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        if let Some(Tok::Sym(s)) = self.peek() {
            if *s == sym {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    fn expect_sym(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat_sym(sym) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{sym}'")))
        }
    }

    fn resolve(&self, name: &str) -> VarName {
        for (src, internal) in self.scopes.iter().rev() {
            if src == name {
                return internal.clone();
            }
        }
        VarName::source(name)
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.implication()?;
        while self.eat_sym("<->") {
            let rhs = self.implication()?;
            acc = Formula::iff(acc, rhs);
        }
        Ok(acc)
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat_sym("->") {
            // right-associative
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while self.eat_sym("|") {
            let rhs = self.conjunction()?;
            acc = Formula::or(acc, rhs);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.eat_sym("&") {
            let rhs = self.unary()?;
            acc = Formula::and(acc, rhs);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat_sym("!") {
            return Ok(Formula::not(self.unary()?));
        }
        // Quantifier: "E v." / "A v.", with the dot scoping to the end of the
        // enclosing parenthesis (the body is a full formula).
        if let Some(Tok::Ident(name)) = self.peek() {
            if name == "E" || name == "A" {
                let existential = name == "E";
                self.pos += 1;
                let var_src = match self.peek() {
                    Some(Tok::Ident(v)) => v.clone(),
                    _ => return Err(self.error("expected variable after quantifier")),
                };
                if var_src == "E" || var_src == "A" {
                    return Err(self.error("'E' and 'A' are reserved quantifier symbols"));
                }
                self.pos += 1;
                self.expect_sym(".")?;
                self.fresh += 1;
                let internal = VarName {
                    base: var_src.clone(),
                    tag: self.fresh,
                };
                self.scopes.push((var_src, internal.clone()));
                let body = self.formula();
                self.scopes.pop();
                let body = body?;
                return Ok(if existential {
                    Formula::Exists(internal, Box::new(body))
                } else {
                    Formula::Forall(internal, Box::new(body))
                });
            }
        }
        if self.eat_sym("(") {
            let inner = self.formula()?;
            self.expect_sym(")")?;
            return Ok(inner);
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.term()?;
        if self.eat_sym("%") {
            let (mline, mcol) = self.here();
            let modulus = match self.peek() {
                Some(Tok::Int(m)) => m.clone(),
                _ => return Err(self.error("expected modulus after '%'")),
            };
            self.pos += 1;
            if modulus.is_zero() {
                return Err(ParseError {
                    line: mline,
                    col: mcol,
                    message: "modulus must be positive".into(),
                });
            }
            self.expect_sym("=")?;
            let residue = self.integer()?;
            return Ok(Formula::congruence(lhs, modulus, residue));
        }
        let op = match self.peek() {
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Sym("=")) => CmpOp::Eq,
            Some(Tok::Sym("!=")) => CmpOp::Ne,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            _ => return Err(self.error("expected comparison operator")),
        };
        self.pos += 1;
        let rhs = self.term()?;
        Ok(Formula::Cmp(lhs, op, rhs))
    }

    fn integer(&mut self) -> Result<BigInt, ParseError> {
        let negative = self.eat_sym("-");
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = v.clone();
                self.pos += 1;
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.error("expected integer")),
        }
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let mut acc = self.product()?;
        loop {
            if self.eat_sym("+") {
                let rhs = self.product()?;
                acc = Term::Add(Box::new(acc), Box::new(rhs));
            } else if self.eat_sym("-") {
                let rhs = self.product()?;
                acc = Term::Sub(Box::new(acc), Box::new(rhs));
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Term, ParseError> {
        if self.eat_sym("-") {
            return Ok(Term::Neg(Box::new(self.product()?)));
        }
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                if self.eat_sym("*") {
                    match self.peek().cloned() {
                        Some(Tok::Ident(name)) => {
                            self.pos += 1;
                            Ok(Term::Mul(v, self.resolve(&name)))
                        }
                        Some(Tok::Int(_)) => {
                            Err(self.error("scalar multiple requires a variable operand"))
                        }
                        _ => Err(self.error("expected variable after '*'")),
                    }
                } else {
                    Ok(Term::Const(v))
                }
            }
            Some(Tok::Ident(name)) => {
                if name == "E" || name == "A" {
                    return Err(self.error("'E' and 'A' are reserved quantifier symbols"));
                }
                self.pos += 1;
                if matches!(self.peek(), Some(Tok::Sym("*"))) {
                    // x*y or x*3: nonlinear term
                    return Err(self.error(format!(
                        "nonlinear term: '{name} * ...' (only integer * variable is allowed)"
                    )));
                }
                Ok(Term::Var(self.resolve(&name)))
            }
            _ => Err(self.error("expected term")),
        }
    }
}

/// Parses a formula. Bound variables are alpha-renamed to fresh internal
/// names; source names are kept for rendering.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = Lexer::new(text).tokens()?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        fresh: 0,
        scopes: Vec::new(),
    };
    let formula = parser.formula()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("trailing input after formula"));
    }
    Ok(formula)
}

impl Formula {
    /// Parses `text` per the crate's formula grammar.
    pub fn parse(text: &str) -> Result<Formula, ParseError> {
        parse(text)
    }
}
