//! OpenQASM 2.0 reader and writer for the {h, x, cx, rz} subset.
//!
//! The reader accepts an optional `OPENQASM 2.0;` header, `include` lines,
//! exactly one `qreg`, any number of `creg` declarations (ignored), and the
//! four gate statements. `rz` angles may be decimal literals or products of
//! literals and `pi`, optionally divided by a literal (`pi/4`, `-3*pi/2`).
//! Anything else, including `measure`, is rejected with a position.
//!
//! The writer emits LF line endings and prints angles with 17 significant
//! digits so every `f64` survives a round trip bit for bit.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use crate::gate::Gate;

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedProgram {
    pub num_qubits: u32,
    pub gates: Vec<Gate>,
}

impl ParsedProgram {
    pub fn new(num_qubits: u32, gates: Vec<Gate>) -> Self {
        Self { num_qubits, gates }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported gate `{0}`")]
    UnsupportedGate(String),
    #[error("unsupported statement `{0}`")]
    UnsupportedStatement(String),
    #[error("qubit index {index} out of range for qreg of size {size}")]
    QubitOutOfRange { index: u64, size: u32 },
    #[error("gate operands must be distinct qubits")]
    RepeatedOperand,
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("more than one qreg declaration")]
    MultipleQreg,
    #[error("qreg must be declared before any gate")]
    MissingQreg,
    #[error("qreg size must be positive")]
    EmptyRegister,
    #[error("angle is not finite")]
    NonFiniteAngle,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    Str,
    Punct(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Number(s) => write!(f, "`{s}`"),
            Tok::Str => f.write_str("string literal"),
            Tok::Punct(c) => write!(f, "`{c}`"),
        }
    }
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let err = |msg: String| ParseError {
            line: start_line,
            column: start_col,
            kind: ParseErrorKind::Syntax(msg),
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '"' => {
                let mut j = i + 1;
                while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                    j += 1;
                }
                if chars.get(j) != Some(&'"') {
                    return Err(err("unterminated string".into()));
                }
                out.push(Spanned { tok: Tok::Str, line, column: col });
                col += j + 1 - i;
                i = j + 1;
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                out.push(Spanned { tok: Tok::Ident(word), line, column: col });
                col += j - i;
                i = j;
                continue;
            }
            c if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                    j += 1;
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let num: String = chars[i..j].iter().collect();
                out.push(Spanned { tok: Tok::Number(num), line, column: col });
                col += j - i;
                i = j;
                continue;
            }
            ';' | ',' | '[' | ']' | '(' | ')' | '*' | '/' | '-' | '+' | '>' | '{' | '}' | '=' => {
                out.push(Spanned { tok: Tok::Punct(c), line, column: col });
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
        i += 1;
        col += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    eof: (usize, usize),
}

impl Parser {
    fn peek(&self) -> Option<&Spanned> {
        self.toks.get(self.pos)
    }

    fn here(&self) -> (usize, usize) {
        self.peek().map_or(self.eof, |t| (t.line, t.column))
    }

    fn error_at(&self, at: (usize, usize), kind: ParseErrorKind) -> ParseError {
        ParseError { line: at.0, column: at.1, kind }
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.error_at(self.here(), ParseErrorKind::Syntax(msg.into()))
    }

    fn next(&mut self, what: &str) -> Result<Spanned, ParseError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => Err(self.syntax(format!("expected {what}, found end of input"))),
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), ParseError> {
        let at = self.here();
        let t = self.next(&format!("`{c}`"))?;
        if t.tok == Tok::Punct(c) {
            Ok(())
        } else {
            Err(self.error_at(at, ParseErrorKind::Syntax(format!("expected `{c}`, found {}", t.tok))))
        }
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.peek().is_some_and(|t| t.tok == Tok::Punct(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let at = self.here();
        match self.next("identifier")?.tok {
            Tok::Ident(s) => Ok(s),
            other => Err(self.error_at(at, ParseErrorKind::Syntax(format!("expected identifier, found {other}")))),
        }
    }

    fn integer(&mut self) -> Result<u64, ParseError> {
        let at = self.here();
        match self.next("integer")?.tok {
            Tok::Number(s) => s
                .parse::<u64>()
                .map_err(|_| self.error_at(at, ParseErrorKind::Syntax(format!("expected integer, found `{s}`")))),
            other => Err(self.error_at(at, ParseErrorKind::Syntax(format!("expected integer, found {other}")))),
        }
    }

    /// `name[index]`
    fn register_ref(&mut self) -> Result<(String, u64, (usize, usize)), ParseError> {
        let at = self.here();
        let name = self.ident()?;
        self.expect_punct('[')?;
        let index = self.integer()?;
        self.expect_punct(']')?;
        Ok((name, index, at))
    }

    fn factor(&mut self) -> Result<f64, ParseError> {
        let at = self.here();
        match self.next("angle")?.tok {
            Tok::Ident(s) if s == "pi" => Ok(PI),
            Tok::Number(s) => s
                .parse::<f64>()
                .map_err(|_| self.error_at(at, ParseErrorKind::Syntax(format!("malformed number `{s}`")))),
            other => Err(self.error_at(at, ParseErrorKind::Syntax(format!("expected number or `pi`, found {other}")))),
        }
    }

    /// `[sign] factor ('*' factor)* ['/' factor]`
    fn angle(&mut self) -> Result<f64, ParseError> {
        let at = self.here();
        let mut sign = 1.0;
        if self.eat_punct('-') {
            sign = -1.0;
        } else {
            self.eat_punct('+');
        }
        let mut value = self.factor()?;
        while self.eat_punct('*') {
            value *= self.factor()?;
        }
        if self.eat_punct('/') {
            value /= self.factor()?;
        }
        let value = sign * value;
        if !value.is_finite() {
            return Err(self.error_at(at, ParseErrorKind::NonFiniteAngle));
        }
        Ok(value)
    }
}

/// Parse an OpenQASM 2.0 program restricted to `h`, `x`, `cx` and `rz`.
pub fn parse_qasm(text: &str) -> Result<ParsedProgram, ParseError> {
    let toks = lex(text)?;
    let eof = {
        let lines = text.split('\n').count();
        let last = text.rsplit('\n').next().unwrap_or("");
        (lines, last.chars().count() + 1)
    };
    let mut p = Parser { toks, pos: 0, eof };
    let mut qreg: Option<(String, u32)> = None;
    let mut gates = Vec::new();

    while let Some(first) = p.peek().cloned() {
        let at = (first.line, first.column);
        let word = match first.tok {
            Tok::Ident(w) => w,
            other => return Err(p.error_at(at, ParseErrorKind::Syntax(format!("expected statement, found {other}")))),
        };
        p.pos += 1;
        match word.as_str() {
            "OPENQASM" => {
                let v_at = p.here();
                match p.next("version")?.tok {
                    Tok::Number(v) if v == "2.0" || v == "2" => {}
                    other => {
                        return Err(p.error_at(v_at, ParseErrorKind::Syntax(format!("unsupported version {other}"))))
                    }
                }
                p.expect_punct(';')?;
            }
            "include" => {
                let s_at = p.here();
                if p.next("file name")?.tok != Tok::Str {
                    return Err(p.error_at(s_at, ParseErrorKind::Syntax("expected file name string".into())));
                }
                p.expect_punct(';')?;
            }
            "qreg" => {
                if qreg.is_some() {
                    return Err(p.error_at(at, ParseErrorKind::MultipleQreg));
                }
                let name = p.ident()?;
                p.expect_punct('[')?;
                let size_at = p.here();
                let size = p.integer()?;
                p.expect_punct(']')?;
                p.expect_punct(';')?;
                if size == 0 {
                    return Err(p.error_at(size_at, ParseErrorKind::EmptyRegister));
                }
                let size = u32::try_from(size)
                    .map_err(|_| p.error_at(size_at, ParseErrorKind::Syntax("register too large".into())))?;
                qreg = Some((name, size));
            }
            "creg" => {
                p.ident()?;
                p.expect_punct('[')?;
                p.integer()?;
                p.expect_punct(']')?;
                p.expect_punct(';')?;
            }
            "h" | "x" | "cx" | "rz" => {
                let Some((reg, size)) = qreg.clone() else {
                    return Err(p.error_at(at, ParseErrorKind::MissingQreg));
                };
                let angle = if word == "rz" {
                    p.expect_punct('(')?;
                    let a = p.angle()?;
                    p.expect_punct(')')?;
                    Some(a)
                } else {
                    None
                };
                let arity = if word == "cx" { 2 } else { 1 };
                let mut operands = Vec::with_capacity(arity);
                for k in 0..arity {
                    if k > 0 {
                        p.expect_punct(',')?;
                    }
                    let (name, index, q_at) = p.register_ref()?;
                    if name != reg {
                        return Err(p.error_at(q_at, ParseErrorKind::UnknownRegister(name)));
                    }
                    if index >= u64::from(size) {
                        return Err(p.error_at(q_at, ParseErrorKind::QubitOutOfRange { index, size }));
                    }
                    operands.push(index as u32);
                }
                p.expect_punct(';')?;
                let gate = match word.as_str() {
                    "h" => Gate::H(operands[0]),
                    "x" => Gate::X(operands[0]),
                    "rz" => Gate::rz(operands[0], angle.unwrap_or_default()),
                    _ => {
                        if operands[0] == operands[1] {
                            return Err(p.error_at(at, ParseErrorKind::RepeatedOperand));
                        }
                        Gate::cnot(operands[0], operands[1])
                    }
                };
                gates.push(gate);
            }
            "measure" | "reset" | "barrier" | "if" | "gate" | "opaque" => {
                return Err(p.error_at(at, ParseErrorKind::UnsupportedStatement(word)));
            }
            _ => return Err(p.error_at(at, ParseErrorKind::UnsupportedGate(word))),
        }
    }

    let Some((_, num_qubits)) = qreg else {
        return Err(p.error_at(p.eof, ParseErrorKind::MissingQreg));
    };
    Ok(ParsedProgram { num_qubits, gates })
}

/// Format an angle as a plain decimal with 17 significant digits.
pub fn format_angle(angle: f64) -> String {
    if angle == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{angle:.16e}");
    let exp: i32 = sci.rsplit('e').next().and_then(|e| e.parse().ok()).unwrap_or(0);
    let decimals = (16 - exp).max(0) as usize;
    format!("{angle:.decimals$}")
}

fn write_gate(out: &mut String, gate: &Gate) {
    // Writing into a String cannot fail.
    let _ = match *gate {
        Gate::H(q) => writeln!(out, "h q[{q}];"),
        Gate::X(q) => writeln!(out, "x q[{q}];"),
        Gate::Cnot { control, target } => writeln!(out, "cx q[{control}],q[{target}];"),
        Gate::Rz { qubit, angle } => writeln!(out, "rz({}) q[{qubit}];", format_angle(angle)),
    };
}

pub fn serialize_qasm(program: &ParsedProgram) -> String {
    serialize_gates(program.num_qubits, &program.gates)
}

/// Serialize a gate list under a `q` register of the given width.
pub fn serialize_gates(num_qubits: u32, gates: &[Gate]) -> String {
    let mut out = String::with_capacity(48 + gates.len() * 16);
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    let _ = writeln!(out, "qreg q[{num_qubits}];");
    for g in gates {
        write_gate(&mut out, g);
    }
    out
}
