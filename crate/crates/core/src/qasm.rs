//! OpenQASM 2.0 subset: parser and emitter.
//!
//! Accepted: one `qreg`, any number of `creg`s, the gates `h x z t tdg s sdg
//! rz rx ry u u3 cx`, `measure`, `reset`, `barrier` and `if (creg==K)`
//! prefixes. Only `qelib1.inc` may be included. Single-qubit gates,
//! `measure`, `reset` and `barrier` broadcast over whole registers.

use std::fmt::Write as _;

use crate::ir::{Circuit, ClassicalRegister, Condition, Gate, GateKind};

pub const HEADER: &str = "OPENQASM 2.0;\ninclude \"qelib1.inc\";\n";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("unsupported gate `{0}`")]
    UnsupportedGate(String),
    #[error("unsupported statement `{0}`")]
    UnsupportedStatement(String),
    #[error("only qelib1.inc may be included, found \"{0}\"")]
    UnsupportedInclude(String),
    #[error("index {index} out of range for register `{register}` of size {size}")]
    IndexOutOfRange {
        register: String,
        index: usize,
        size: usize,
    },
    #[error("only one qreg is supported")]
    MultipleQregs,
    #[error("no qreg declared")]
    MissingQreg,
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("register `{0}` declared twice")]
    DuplicateRegister(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(u64),
    Real(f64),
    Str(String),
    Sym(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: [&str; 14] = [
    "->", "==", ";", ",", "[", "]", "(", ")", "{", "}", "+", "-", "*", "/",
];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let err = |msg: String| ParseError {
            line: tl,
            column: tc,
            kind: ParseErrorKind::Syntax(msg),
        };
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(word),
                line: tl,
                column: tc,
            });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = if real {
                Tok::Real(
                    lit.parse()
                        .map_err(|_| err(format!("bad number `{lit}`")))?,
                )
            } else {
                Tok::Int(
                    lit.parse()
                        .map_err(|_| err(format!("bad integer `{lit}`")))?,
                )
            };
            out.push(Token {
                tok,
                line: tl,
                column: tc,
            });
            continue;
        }
        if c == '"' {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && chars[j] != '"' && chars[j] != '\n' {
                j += 1;
            }
            if j >= chars.len() || chars[j] != '"' {
                return Err(err("unterminated string".into()));
            }
            let s: String = chars[start..j].iter().collect();
            col += j + 1 - i;
            i = j + 1;
            out.push(Token {
                tok: Tok::Str(s),
                line: tl,
                column: tc,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Token {
                    tok: Tok::Sym(sym),
                    line: tl,
                    column: tc,
                });
            }
            None => return Err(err(format!("unexpected character `{c}`"))),
        }
    }
    Ok(out)
}

/// A register reference: whole register or a single index.
struct Operand {
    register: String,
    index: Option<usize>,
    line: usize,
    column: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    eof: (usize, usize),
    qreg: Option<(String, usize)>,
    circuit: Circuit,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .map(|t| (t.line, t.column))
            .unwrap_or(self.eof)
    }

    fn fail<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        let (line, column) = self.here();
        Err(ParseError { line, column, kind })
    }

    fn fail_at<T>(line: usize, column: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { line, column, kind })
    }

    fn syntax<T>(&self, expected: &str) -> Result<T, ParseError> {
        let found = match self.peek() {
            Some(Tok::Ident(s)) => format!("`{s}`"),
            Some(Tok::Int(v)) => format!("`{v}`"),
            Some(Tok::Real(v)) => format!("`{v}`"),
            Some(Tok::Str(s)) => format!("\"{s}\""),
            Some(Tok::Sym(s)) => format!("`{s}`"),
            None => "end of input".to_string(),
        };
        self.fail(ParseErrorKind::Syntax(format!(
            "expected {expected}, found {found}"
        )))
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<(), ParseError> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.syntax(&format!("`{sym}`"))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.syntax("identifier"),
        }
    }

    fn int(&mut self) -> Result<u64, ParseError> {
        match self.peek() {
            Some(Tok::Int(v)) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            _ => self.syntax("integer"),
        }
    }

    fn program(mut self) -> Result<Circuit, ParseError> {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "OPENQASM") {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Real(v)) if *v == 2.0 => self.pos += 1,
                _ => return self.syntax("version 2.0"),
            }
            self.expect(";")?;
        }
        while self.peek().is_some() {
            self.statement()?;
        }
        if self.qreg.is_none() {
            return self.fail(ParseErrorKind::MissingQreg);
        }
        Ok(self.circuit)
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let (line, column) = self.here();
        let word = self.ident()?;
        match word.as_str() {
            "include" => {
                let file = match self.peek() {
                    Some(Tok::Str(s)) => s.clone(),
                    _ => return self.syntax("file name"),
                };
                if file != "qelib1.inc" {
                    return Self::fail_at(line, column, ParseErrorKind::UnsupportedInclude(file));
                }
                self.pos += 1;
                self.expect(";")
            }
            "qreg" | "creg" => {
                let name = self.ident()?;
                self.expect("[")?;
                let size = self.int()? as usize;
                self.expect("]")?;
                self.expect(";")?;
                let taken = self.qreg.as_ref().is_some_and(|(n, _)| *n == name)
                    || self.circuit.cregs.iter().any(|r| r.name == name);
                if taken {
                    return Self::fail_at(line, column, ParseErrorKind::DuplicateRegister(name));
                }
                if word == "qreg" {
                    if self.qreg.is_some() {
                        return Self::fail_at(line, column, ParseErrorKind::MultipleQregs);
                    }
                    self.circuit.qubit_count = size;
                    self.qreg = Some((name, size));
                } else {
                    self.circuit.cregs.push(ClassicalRegister { name, size });
                }
                Ok(())
            }
            "if" => {
                self.expect("(")?;
                let (rl, rc) = self.here();
                let reg = self.ident()?;
                self.expect("==")?;
                let value = self.int()?;
                self.expect(")")?;
                let creg = self
                    .circuit
                    .cregs
                    .iter()
                    .position(|r| r.name == reg)
                    .map_or_else(
                        || Self::fail_at(rl, rc, ParseErrorKind::UnknownRegister(reg.clone())),
                        Ok,
                    )?;
                let (gl, gc) = self.here();
                let inner = self.ident()?;
                if matches!(inner.as_str(), "measure" | "barrier" | "if") {
                    return Self::fail_at(
                        gl,
                        gc,
                        ParseErrorKind::Invalid(format!("`{inner}` cannot be conditioned")),
                    );
                }
                self.operation(&inner, gl, gc, Some(Condition { creg, value }))
            }
            "gate" | "opaque" => {
                Self::fail_at(line, column, ParseErrorKind::UnsupportedStatement(word))
            }
            _ => self.operation(&word, line, column, None),
        }
    }

    fn operation(
        &mut self,
        word: &str,
        line: usize,
        column: usize,
        condition: Option<Condition>,
    ) -> Result<(), ParseError> {
        let nparams = match word {
            "h" | "x" | "z" | "t" | "tdg" | "s" | "sdg" | "cx" | "CX" | "reset" | "measure"
            | "barrier" => 0,
            "rz" | "rx" | "ry" => 1,
            "u" | "u3" | "U" => 3,
            _ => {
                return Self::fail_at(
                    line,
                    column,
                    ParseErrorKind::UnsupportedGate(word.to_string()),
                )
            }
        };
        let mut params = Vec::new();
        if self.eat("(") {
            loop {
                params.push(self.expr()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect(")")?;
        }
        if params.len() != nparams {
            return Self::fail_at(
                line,
                column,
                ParseErrorKind::Invalid(format!(
                    "`{word}` takes {nparams} parameter(s), got {}",
                    params.len()
                )),
            );
        }
        let kind = match word {
            "h" => GateKind::H,
            "x" => GateKind::X,
            "z" => GateKind::Z,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "rz" => GateKind::Rz(params[0]),
            "rx" => GateKind::Rx(params[0]),
            "ry" => GateKind::Ry(params[0]),
            "u" | "u3" | "U" => GateKind::U(params[0], params[1], params[2]),
            "cx" | "CX" => GateKind::Cx,
            "reset" => GateKind::Reset,
            "measure" => GateKind::Measure,
            _ => GateKind::Barrier,
        };

        let mut operands = vec![self.operand()?];
        if kind == GateKind::Measure {
            self.expect("->")?;
            operands.push(self.operand()?);
        } else {
            while self.eat(",") {
                operands.push(self.operand()?);
            }
        }
        self.expect(";")?;

        match kind {
            GateKind::Measure => {
                let qs = self.qubits(&operands[0])?;
                let cs = self.clbits(&operands[1])?;
                if qs.len() != cs.len() {
                    return Self::fail_at(
                        line,
                        column,
                        ParseErrorKind::Invalid("measure operands differ in size".into()),
                    );
                }
                for (q, c) in qs.into_iter().zip(cs) {
                    self.circuit.push(Gate::measure(q, c));
                }
            }
            GateKind::Barrier => {
                let mut qs = Vec::new();
                for op in &operands {
                    qs.extend(self.qubits(op)?);
                }
                self.circuit.push(Gate::barrier(qs));
            }
            GateKind::Cx => {
                if operands.len() != 2 || operands.iter().any(|o| o.index.is_none()) {
                    return Self::fail_at(
                        line,
                        column,
                        ParseErrorKind::Invalid("cx needs two indexed qubit operands".into()),
                    );
                }
                let a = self.qubits(&operands[0])?[0];
                let b = self.qubits(&operands[1])?[0];
                if a == b {
                    return Self::fail_at(
                        line,
                        column,
                        ParseErrorKind::Invalid("cx operands must differ".into()),
                    );
                }
                let mut g = Gate::cx(a, b);
                g.condition = condition;
                self.circuit.push(g);
            }
            _ => {
                if operands.len() != 1 {
                    return Self::fail_at(
                        line,
                        column,
                        ParseErrorKind::Invalid(format!("`{word}` takes one qubit operand")),
                    );
                }
                for q in self.qubits(&operands[0])? {
                    let mut g = Gate::single(kind, q);
                    g.condition = condition;
                    self.circuit.push(g);
                }
            }
        }
        Ok(())
    }

    fn operand(&mut self) -> Result<Operand, ParseError> {
        let (line, column) = self.here();
        let register = self.ident()?;
        let index = if self.eat("[") {
            let i = self.int()? as usize;
            self.expect("]")?;
            Some(i)
        } else {
            None
        };
        Ok(Operand {
            register,
            index,
            line,
            column,
        })
    }

    fn qubits(&self, op: &Operand) -> Result<Vec<usize>, ParseError> {
        let Some((name, size)) = self.qreg.clone() else {
            return Self::fail_at(op.line, op.column, ParseErrorKind::MissingQreg);
        };
        if op.register != name {
            return Self::fail_at(
                op.line,
                op.column,
                ParseErrorKind::UnknownRegister(op.register.clone()),
            );
        }
        expand(op, &name, size, 0)
    }

    fn clbits(&self, op: &Operand) -> Result<Vec<usize>, ParseError> {
        let Some(reg) = self
            .circuit
            .cregs
            .iter()
            .position(|r| r.name == op.register)
        else {
            return Self::fail_at(
                op.line,
                op.column,
                ParseErrorKind::UnknownRegister(op.register.clone()),
            );
        };
        let size = self.circuit.cregs[reg].size;
        expand(op, &op.register, size, self.circuit.creg_offset(reg))
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut v = self.term()?;
        loop {
            if self.eat("+") {
                v += self.term()?;
            } else if self.eat("-") {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut v = self.unary()?;
        loop {
            if self.eat("*") {
                v *= self.unary()?;
            } else if self.eat("/") {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, ParseError> {
        if self.eat("-") {
            return Ok(-self.unary()?);
        }
        if self.eat("+") {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<f64, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(v as f64)
            }
            Some(Tok::Real(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == "pi" {
                    return Ok(std::f64::consts::PI);
                }
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => {
                        self.pos -= 1;
                        return self.syntax("number, `pi` or function");
                    }
                };
                self.expect("(")?;
                let v = self.expr()?;
                self.expect(")")?;
                Ok(f(v))
            }
            Some(Tok::Sym("(")) => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(")")?;
                Ok(v)
            }
            _ => self.syntax("expression"),
        }
    }
}

fn expand(op: &Operand, name: &str, size: usize, offset: usize) -> Result<Vec<usize>, ParseError> {
    match op.index {
        Some(i) if i >= size => Err(ParseError {
            line: op.line,
            column: op.column,
            kind: ParseErrorKind::IndexOutOfRange {
                register: name.to_string(),
                index: i,
                size,
            },
        }),
        Some(i) => Ok(vec![offset + i]),
        None => Ok((offset..offset + size).collect()),
    }
}

/// Parses OpenQASM 2.0 source into a circuit in textual gate order.
pub fn parse(text: &str) -> Result<Circuit, ParseError> {
    let toks = lex(text)?;
    let line_count = text.lines().count().max(1);
    let last_len = text.lines().last().map_or(0, |l| l.chars().count());
    Parser {
        toks,
        pos: 0,
        eof: (line_count, last_len + 1),
        qreg: None,
        circuit: Circuit::default(),
    }
    .program()
}

/// Renders a circuit as OpenQASM 2.0 with qubit register `q`.
pub fn emit(circuit: &Circuit) -> String {
    let mut out = String::from(HEADER);
    let _ = writeln!(out, "qreg q[{}];", circuit.qubit_count);
    for r in &circuit.cregs {
        let _ = writeln!(out, "creg {}[{}];", r.name, r.size);
    }
    for g in &circuit.gates {
        if let Some(c) = g.condition {
            let _ = write!(out, "if ({}=={}) ", circuit.cregs[c.creg].name, c.value);
        }
        match g.kind {
            GateKind::Measure => {
                let bit = g.clbit.expect("measure without classical bit");
                let (reg, idx) = circuit
                    .locate_clbit(bit)
                    .expect("classical bit out of range");
                let _ = writeln!(
                    out,
                    "measure q[{}] -> {}[{}];",
                    g.qubits[0], circuit.cregs[reg].name, idx
                );
            }
            kind => {
                out.push_str(kind.name());
                match kind {
                    GateKind::Rz(a) | GateKind::Rx(a) | GateKind::Ry(a) => {
                        let _ = write!(out, "({a:?})");
                    }
                    GateKind::U(a, b, c) => {
                        let _ = write!(out, "({a:?},{b:?},{c:?})");
                    }
                    _ => {}
                }
                let args: Vec<String> = g.qubits.iter().map(|q| format!("q[{q}]")).collect();
                let _ = writeln!(out, " {};", args.join(","));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL3: &str =
        "qreg q[3]; h q[1]; x q[0]; cx q[1],q[2]; cx q[0],q[2]; cx q[1],q[0]; t q[0];";

    #[test]
    fn empty_program() {
        let c = parse("qreg q[1];").unwrap();
        assert_eq!(c.qubit_count, 1);
        assert!(c.gates.is_empty());
        assert_eq!(emit(&c), format!("{HEADER}qreg q[1];\n"));
    }

    #[test]
    fn small3_circuit() {
        let c = parse(SMALL3).unwrap();
        assert_eq!(c.qubit_count, 3);
        assert_eq!(
            c.gates,
            vec![
                Gate::single(GateKind::H, 1),
                Gate::single(GateKind::X, 0),
                Gate::cx(1, 2),
                Gate::cx(0, 2),
                Gate::cx(1, 0),
                Gate::single(GateKind::T, 0),
            ]
        );
        assert_eq!(parse(&emit(&c)).unwrap(), c);
    }

    #[test]
    fn measure_then_conditioned_x() {
        let c = parse("qreg q[2]; creg c[1]; measure q[0] -> c[0]; if (c==1) x q[1];").unwrap();
        assert_eq!(
            c.gates,
            vec![
                Gate::measure(0, 0),
                Gate::single(GateKind::X, 1).with_condition(0, 1)
            ]
        );
        let text = emit(&c);
        assert!(text.contains("if (c==1) x q[1];"));
        assert!(text.contains("measure q[0] -> c[0];"));
    }

    #[test]
    fn parameters_and_broadcast() {
        let c =
            parse("qreg q[2]; rz(-pi/4) q[0]; u3(pi/2, 0, 2*pi) q[1]; h q; barrier q;").unwrap();
        assert_eq!(c.gates[0].kind, GateKind::Rz(-std::f64::consts::FRAC_PI_4));
        assert_eq!(
            c.gates[1].kind,
            GateKind::U(std::f64::consts::FRAC_PI_2, 0.0, 2.0 * std::f64::consts::PI)
        );
        assert_eq!(c.gates.len(), 5);
        assert_eq!(c.gates[4].qubits, vec![0, 1]);
        assert_eq!(parse(&emit(&c)).unwrap(), c);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("qreg q[2];\nfoo q[0];").unwrap_err();
        assert_eq!((e.line, e.column), (2, 1));
        assert_eq!(e.kind, ParseErrorKind::UnsupportedGate("foo".into()));

        let e = parse("qreg q[2];\nh q[5];").unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert!(matches!(
            e.kind,
            ParseErrorKind::IndexOutOfRange { index: 5, .. }
        ));

        let e = parse("qreg q[2];\nqreg r[2];").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::MultipleQregs);
        assert_eq!(e.line, 2);

        let e = parse("qreg q[2];\nh q[0]").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
        assert_eq!(e.line, 2);

        let e = parse("include \"other.inc\";\nqreg q[1];").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::UnsupportedInclude(_)));

        let e = parse("qreg q[2];\ngate foo a { h a; }").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::UnsupportedStatement(_)));

        let e = parse("qreg q[2]; cx q[0],q[0];").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Invalid(_)));

        let e = parse("qreg q[2]; creg c[1]; if (c==1) measure q[0] -> c[0];").unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Invalid(_)));
    }

    #[test]
    fn comments_and_header_accepted() {
        let c = parse(
            "OPENQASM 2.0;\n// hello\ninclude \"qelib1.inc\";\nqreg q[1]; // tail\nx q[0];\n",
        )
        .unwrap();
        assert_eq!(c.gates.len(), 1);
    }
}
