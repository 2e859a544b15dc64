//! Hand-rolled lexer and recursive-descent parser for the program syntax.
//!
//! ```text
//! program := stmt
//! stmt    := "skip" | var ":=" var | var ":=" ident "(" var ("," var)* ")"
//!          | "assume" "(" cond ")" | stmt ";" stmt
//!          | "if" "(" cond ")" "then" "{" stmt "}" "else" "{" stmt "}"
//!          | "while" "(" cond ")" "{" stmt "}"
//! cond    := var "==" var | var "!=" var
//! ```
//!
//! `//` starts a comment; whitespace is insignificant; a trailing `;` before
//! `}` or end of input is tolerated.

use std::collections::HashMap;

use thiserror::Error;

use super::{Cond, Program, Stmt, StmtId, VarId};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {msg}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Assign, // :=
    EqEq,
    NeqEq,
    Semi,
    Comma,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Eof,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    col: u32,
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

    fn bump(&mut self) -> Option<u8> {
        let c = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_whitespace() => {
                    self.bump();
                }
                Some(b'/') if self.src.get(self.pos + 1) == Some(&b'/') => {
                    while let Some(c) = self.peek() {
                        if c == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => return,
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, u32, u32), ParseError> {
        self.skip_trivia();
        let (line, col) = (self.line, self.col);
        let err = |msg: String| ParseError { line, col, msg };
        let Some(c) = self.peek() else {
            return Ok((Tok::Eof, line, col));
        };
        let tok = match c {
            b';' => {
                self.bump();
                Tok::Semi
            }
            b',' => {
                self.bump();
                Tok::Comma
            }
            b'(' => {
                self.bump();
                Tok::LParen
            }
            b')' => {
                self.bump();
                Tok::RParen
            }
            b'{' => {
                self.bump();
                Tok::LBrace
            }
            b'}' => {
                self.bump();
                Tok::RBrace
            }
            b':' => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Tok::Assign
                } else {
                    return Err(err("expected `:=`".to_string()));
                }
            }
            b'=' => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Tok::EqEq
                } else {
                    return Err(err("expected `==`".to_string()));
                }
            }
            b'!' => {
                self.bump();
                if self.peek() == Some(b'=') {
                    self.bump();
                    Tok::NeqEq
                } else {
                    return Err(err("expected `!=`".to_string()));
                }
            }
            c if c.is_ascii_lowercase() => {
                let start = self.pos;
                while self
                    .peek()
                    .is_some_and(|c| c.is_ascii_alphanumeric() || c == b'_')
                {
                    self.bump();
                }
                let text = std::str::from_utf8(&self.src[start..self.pos])
                    .expect("ascii identifier")
                    .to_string();
                Tok::Ident(text)
            }
            c => return Err(err(format!("unexpected character `{}`", c as char))),
        };
        Ok((tok, line, col))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    line: u32,
    col: u32,
    program: Program,
    var_ids: HashMap<String, VarId>,
    fn_arity: HashMap<String, (usize, u32, u32)>,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (tok, line, col) = lexer.next()?;
        Ok(Parser {
            lexer,
            tok,
            line,
            col,
            program: Program::new(Vec::new()),
            var_ids: HashMap::new(),
            fn_arity: HashMap::new(),
        })
    }

    fn advance(&mut self) -> Result<(), ParseError> {
        let (tok, line, col) = self.lexer.next()?;
        self.tok = tok;
        self.line = line;
        self.col = col;
        Ok(())
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.tok == want {
            self.advance()
        } else {
            Err(self.error(format!("expected {what}, found {:?}", self.tok)))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, u32, u32), ParseError> {
        match self.tok.clone() {
            Tok::Ident(name) => {
                let (line, col) = (self.line, self.col);
                self.advance()?;
                Ok((name, line, col))
            }
            _ => Err(self.error(format!("expected {what}, found {:?}", self.tok))),
        }
    }

    fn var(&mut self, name: String) -> VarId {
        if let Some(&v) = self.var_ids.get(&name) {
            return v;
        }
        let v = self.program.vars.len();
        self.program.vars.push(name.clone());
        self.var_ids.insert(name, v);
        v
    }

    fn cond(&mut self) -> Result<Cond, ParseError> {
        let (l, ..) = self.ident("a variable")?;
        let eq = match self.tok {
            Tok::EqEq => true,
            Tok::NeqEq => false,
            _ => return Err(self.error("expected `==` or `!=`")),
        };
        self.advance()?;
        let (r, ..) = self.ident("a variable")?;
        Ok(Cond {
            lhs: self.var(l),
            rhs: self.var(r),
            eq,
        })
    }

    /// One statement, not counting `;` sequencing.
    fn simple_stmt(&mut self) -> Result<StmtId, ParseError> {
        let line = self.line;
        match self.tok.clone() {
            Tok::Ident(name) => match name.as_str() {
                "skip" => {
                    self.advance()?;
                    Ok(self.program.fresh_node(Stmt::Skip, Some(line)))
                }
                "assume" => {
                    self.advance()?;
                    self.expect(Tok::LParen, "`(`")?;
                    let c = self.cond()?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(self.program.fresh_node(Stmt::Assume(c), Some(line)))
                }
                "if" => {
                    self.advance()?;
                    self.expect(Tok::LParen, "`(`")?;
                    let c = self.cond()?;
                    self.expect(Tok::RParen, "`)`")?;
                    let (kw, ..) = self.ident("`then`")?;
                    if kw != "then" {
                        return Err(self.error("expected `then`"));
                    }
                    self.expect(Tok::LBrace, "`{`")?;
                    let t = self.stmt_seq()?;
                    self.expect(Tok::RBrace, "`}`")?;
                    let (kw, ..) = self.ident("`else`")?;
                    if kw != "else" {
                        return Err(self.error("expected `else`"));
                    }
                    self.expect(Tok::LBrace, "`{`")?;
                    let e = self.stmt_seq()?;
                    self.expect(Tok::RBrace, "`}`")?;
                    Ok(self.program.fresh_node(Stmt::If(c, t, e), Some(line)))
                }
                "while" => {
                    self.advance()?;
                    self.expect(Tok::LParen, "`(`")?;
                    let c = self.cond()?;
                    self.expect(Tok::RParen, "`)`")?;
                    self.expect(Tok::LBrace, "`{`")?;
                    let body = self.stmt_seq()?;
                    self.expect(Tok::RBrace, "`}`")?;
                    Ok(self.program.fresh_node(Stmt::While(c, body), Some(line)))
                }
                _ => {
                    // assignment: `x := y` or `x := f(args)`
                    self.advance()?;
                    self.expect(Tok::Assign, "`:=`")?;
                    let (rhs, rline, rcol) = self.ident("a variable or function")?;
                    if self.tok == Tok::LParen {
                        self.advance()?;
                        let mut args = Vec::new();
                        loop {
                            let (arg, ..) = self.ident("a variable")?;
                            args.push(self.var(arg));
                            match self.tok {
                                Tok::Comma => self.advance()?,
                                Tok::RParen => {
                                    self.advance()?;
                                    break;
                                }
                                _ => return Err(self.error("expected `,` or `)`")),
                            }
                        }
                        match self.fn_arity.get(&rhs) {
                            Some(&(arity, l0, c0)) if arity != args.len() => {
                                return Err(ParseError {
                                    line: rline,
                                    col: rcol,
                                    msg: format!(
                                        "function `{rhs}` used with {} arguments, but with {} at {l0}:{c0}",
                                        args.len(),
                                        arity
                                    ),
                                });
                            }
                            Some(_) => {}
                            None => {
                                self.fn_arity.insert(rhs.clone(), (args.len(), rline, rcol));
                                self.program.fns.push((rhs.clone(), args.len()));
                            }
                        }
                        let x = self.var(name);
                        Ok(self
                            .program
                            .fresh_node(Stmt::AssignFn(x, rhs, args), Some(line)))
                    } else {
                        let x = self.var(name);
                        let y = self.var(rhs);
                        Ok(self.program.fresh_node(Stmt::Assign(x, y), Some(line)))
                    }
                }
            },
            _ => Err(self.error(format!("expected a statement, found {:?}", self.tok))),
        }
    }

    /// `stmt (";" stmt)*` with a tolerated trailing `;`.
    fn stmt_seq(&mut self) -> Result<StmtId, ParseError> {
        let mut parts = vec![self.simple_stmt()?];
        while self.tok == Tok::Semi {
            self.advance()?;
            if matches!(self.tok, Tok::RBrace | Tok::Eof) {
                break;
            }
            parts.push(self.simple_stmt()?);
        }
        let mut out = parts.pop().expect("at least one statement");
        while let Some(prev) = parts.pop() {
            out = self.program.fresh_node(Stmt::Seq(prev, out), None);
        }
        Ok(out)
    }
}

/// Parses a program and closes its statement-form graph.
pub fn parse(src: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(src)?;
    let root = p.stmt_seq()?;
    if p.tok != Tok::Eof {
        return Err(p.error(format!("trailing input: {:?}", p.tok)));
    }
    let mut program = p.program;
    program.root = root;
    program.close();
    Ok(program)
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOCKSTEP: &str = "\
x := t;
y := t;
while (c != d) {
  x := n(x);
  y := n(y);
  c := n(c);
};
x := f(a, x);
y := f(b, y);
assume(a == b);
assume(x != y);
";

    #[test]
    fn two_variable_copies() {
        let p = parse("x := t; y := t").unwrap();
        assert_eq!(p.vars, vec!["x", "t", "y"]);
        let leaves = p.leaf_statements();
        assert_eq!(leaves.len(), 2);
        assert!(matches!(p.stmt(leaves[0]), Stmt::Assign(..)));
    }

    #[test]
    fn lockstep_program_shape() {
        let p = parse(LOCKSTEP).unwrap();
        assert_eq!(p.while_count(), 1);
        assert_eq!(p.leaf_statements().len(), 9);
        assert_eq!(p.vars, vec!["x", "t", "y", "c", "d", "a", "b"]);
        // all statement forms are closed and finite
        assert!(p.locations().len() > 10);
    }

    #[test]
    fn function_assignment_with_arity() {
        let p = parse("x := f(a, x)").unwrap();
        let leaves = p.leaf_statements();
        match p.stmt(leaves[0]) {
            Stmt::AssignFn(x, f, args) => {
                assert_eq!(p.var_name(*x), "x");
                assert_eq!(f, "f");
                assert_eq!(args.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_error_carries_position() {
        let err = parse("x := t;\ny | z").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.col >= 3);
    }

    #[test]
    fn inconsistent_arity_is_rejected() {
        let err = parse("x := f(a); y := f(a, b)").unwrap_err();
        assert!(err.msg.contains("arguments"), "{err}");
    }

    #[test]
    fn comments_and_whitespace() {
        let p = parse("// setup\nx := y; // copy\nskip").unwrap();
        assert_eq!(p.leaf_statements().len(), 1);
    }
}
