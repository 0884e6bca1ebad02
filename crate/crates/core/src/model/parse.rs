//! Text format for models.
//!
//! A model file is a block of declaration headers followed by one equation
//! per state and output:
//!
//! ```text
//! parameters: a, b
//! states: x1, x2
//! outputs: y
//! x1' = -a*x2        # state equation
//! x2' = a*x1 / (1 + b*x1)
//! y = x1
//! ```
//!
//! Expressions use + - * / ^ over declared names and integer literals;
//! `#` starts a comment. All errors carry a 1-based line and column.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::coeff::QField;
use crate::error::{Error, Result};
use crate::poly::QPoly;
use crate::ratfun::RatFun;
use crate::vartable::{VarKind, VarTable};

use super::Model;

#[derive(Clone, Debug, PartialEq)]
enum TokKind {
    Ident(String),
    Int(BigInt),
    Prime,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Colon,
    Equals,
}

#[derive(Clone, Debug)]
struct Tok {
    kind: TokKind,
    col: usize,
}

fn err_at(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, col, msg: msg.into() }
}

/// Tokenize one source line; `#` cuts the rest off.
fn tokenize_line(line_no: usize, text: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                toks.push(Tok { kind: TokKind::Ident(name), col });
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                let n: BigInt = digits.parse().expect("digit run parses");
                toks.push(Tok { kind: TokKind::Int(n), col });
            }
            _ => {
                let kind = match c {
                    '\'' => TokKind::Prime,
                    '+' => TokKind::Plus,
                    '-' => TokKind::Minus,
                    '*' => TokKind::Star,
                    '/' => TokKind::Slash,
                    '^' => TokKind::Caret,
                    '(' => TokKind::LParen,
                    ')' => TokKind::RParen,
                    ',' => TokKind::Comma,
                    ':' => TokKind::Colon,
                    '=' => TokKind::Equals,
                    other => {
                        return Err(err_at(line_no, col, format!("unexpected character '{other}'")))
                    }
                };
                toks.push(Tok { kind, col });
                i += 1;
            }
        }
    }
    Ok(toks)
}

/// Cursor over one line of tokens.
struct Cursor<'a> {
    toks: &'a [Tok],
    pos: usize,
    line: usize,
    /// Column just past the last token, for errors at end of line.
    end_col: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, toks: &'a [Tok], end_col: usize) -> Self {
        Cursor { toks, pos: 0, line, end_col }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<&Tok> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> usize {
        self.peek().map(|t| t.col).unwrap_or(self.end_col)
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        err_at(self.line, self.here(), msg)
    }

    fn expect(&mut self, kind: &TokKind, what: &str) -> Result<usize> {
        match self.peek() {
            Some(t) if t.kind == *kind => {
                let col = t.col;
                self.pos += 1;
                Ok(col)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, usize)> {
        match self.peek() {
            Some(Tok { kind: TokKind::Ident(name), col }) => {
                let out = (name.clone(), *col);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

/// Recursive-descent expression parser. Identifier resolution is a
/// callback so the same grammar serves model equations (where outputs are
/// banned on the right) and standalone expressions over a finished table.
struct ExprParser<'a> {
    cur: Cursor<'a>,
    resolve: &'a dyn Fn(&str, usize, usize) -> Result<QPoly>,
}

impl<'a> ExprParser<'a> {
    fn parse_sum(&mut self) -> Result<RatFun> {
        let mut acc = self.parse_product()?;
        loop {
            match self.cur.peek().map(|t| t.kind.clone()) {
                Some(TokKind::Plus) => {
                    self.cur.next();
                    acc = acc.add(&self.parse_product()?)?;
                }
                Some(TokKind::Minus) => {
                    self.cur.next();
                    acc = acc.sub(&self.parse_product()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_product(&mut self) -> Result<RatFun> {
        let mut acc = self.parse_unary()?;
        loop {
            match self.cur.peek().map(|t| (t.kind.clone(), t.col)) {
                Some((TokKind::Star, _)) => {
                    self.cur.next();
                    acc = acc.mul(&self.parse_unary()?)?;
                }
                Some((TokKind::Slash, col)) => {
                    self.cur.next();
                    let rhs = self.parse_unary()?;
                    acc = acc.div(&rhs).map_err(|_| {
                        err_at(self.cur.line, col, "division by the zero polynomial")
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_unary(&mut self) -> Result<RatFun> {
        if let Some(Tok { kind: TokKind::Minus, .. }) = self.cur.peek() {
            self.cur.next();
            return Ok(self.parse_unary()?.neg());
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<RatFun> {
        let base = self.parse_atom()?;
        if let Some(Tok { kind: TokKind::Caret, .. }) = self.cur.peek() {
            self.cur.next();
            match self.cur.peek().cloned() {
                Some(Tok { kind: TokKind::Int(n), col }) => {
                    self.cur.next();
                    let e = n
                        .to_u32()
                        .ok_or_else(|| err_at(self.cur.line, col, "exponent too large"))?;
                    return base.pow(e);
                }
                _ => return Err(self.cur.error("expected a nonnegative integer exponent")),
            }
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<RatFun> {
        match self.cur.peek().cloned() {
            Some(Tok { kind: TokKind::Int(n), .. }) => {
                self.cur.next();
                let c = QPoly::constant(QField, BigRational::from_integer(n));
                Ok(RatFun::from_poly(c))
            }
            Some(Tok { kind: TokKind::Ident(name), col }) => {
                self.cur.next();
                let p = (self.resolve)(&name, self.cur.line, col)?;
                Ok(RatFun::from_poly(p))
            }
            Some(Tok { kind: TokKind::LParen, .. }) => {
                self.cur.next();
                let inner = self.parse_sum()?;
                self.cur.expect(&TokKind::RParen, "')'")?;
                Ok(inner)
            }
            _ => Err(self.cur.error("expected an expression")),
        }
    }
}

const HEADER_KINDS: [(&str, VarKind); 4] = [
    ("parameters", VarKind::Parameter),
    ("states", VarKind::State),
    ("inputs", VarKind::Input),
    ("outputs", VarKind::Output),
];

/// A header line is an ident from the fixed set followed by a colon.
fn header_kind(toks: &[Tok]) -> Option<VarKind> {
    match (toks.first(), toks.get(1)) {
        (Some(Tok { kind: TokKind::Ident(name), .. }), Some(Tok { kind: TokKind::Colon, .. })) => {
            HEADER_KINDS.iter().find(|(h, _)| h == name).map(|(_, k)| *k)
        }
        _ => None,
    }
}

/// Parse a model from its source text.
pub fn parse_model(text: &str) -> Result<Model> {
    // Tokenize every nonempty line up front, keeping line numbers.
    let mut lines: Vec<(usize, Vec<Tok>, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let toks = tokenize_line(line_no, raw)?;
        if !toks.is_empty() {
            let end_col = raw.chars().count() + 1;
            lines.push((line_no, toks, end_col));
        }
    }

    // Declarations first, equations after; interleaving is an error.
    let mut decls: Vec<(VarKind, String, usize, usize)> = Vec::new();
    let mut eq_lines: Vec<&(usize, Vec<Tok>, usize)> = Vec::new();
    for entry in &lines {
        let (line_no, toks, end_col) = entry;
        if let Some(kind) = header_kind(toks) {
            if !eq_lines.is_empty() {
                return Err(err_at(*line_no, toks[0].col, "declarations must precede equations"));
            }
            let mut cur = Cursor::new(*line_no, toks, *end_col);
            cur.next();
            cur.next();
            loop {
                let (name, col) = cur.expect_ident("a variable name")?;
                decls.push((kind, name, *line_no, col));
                if cur.at_end() {
                    break;
                }
                cur.expect(&TokKind::Comma, "','")?;
            }
        } else {
            eq_lines.push(entry);
        }
    }
    if decls.is_empty() {
        return Err(err_at(1, 1, "expected a declaration header"));
    }
    if eq_lines.is_empty() {
        let last = lines.last().map(|(n, _, _)| *n).unwrap_or(1);
        return Err(err_at(last, 1, "expected at least one equation"));
    }

    let mut table = VarTable::new();
    let mut params = Vec::new();
    let mut states = Vec::new();
    let mut outputs = Vec::new();
    let mut inputs = Vec::new();
    let mut decl_pos: HashMap<usize, (usize, usize)> = HashMap::new();
    for (kind, name, line, col) in &decls {
        let idx = table
            .add(name, *kind)
            .map_err(|_| err_at(*line, *col, format!("variable {name} declared twice")))?;
        decl_pos.insert(idx, (*line, *col));
        match kind {
            VarKind::Parameter => params.push(idx),
            VarKind::State => states.push(idx),
            VarKind::Output => outputs.push(idx),
            VarKind::Input => inputs.push(idx),
        }
    }

    // Right-hand sides may mention parameters, states and inputs; outputs
    // only ever stand on the left.
    let resolve = |name: &str, line: usize, col: usize| -> Result<QPoly> {
        match table.lookup(name, 0) {
            Some(idx) if table.kind(idx) == VarKind::Output => {
                Err(err_at(line, col, format!("output {name} used on the right-hand side")))
            }
            Some(idx) => Ok(QPoly::var(QField, idx).with_table(&table)),
            None => Err(err_at(line, col, format!("undeclared identifier {name}"))),
        }
    };

    let mut rhs_by_var: HashMap<usize, RatFun> = HashMap::new();
    for (line_no, toks, end_col) in eq_lines {
        let mut cur = Cursor::new(*line_no, toks, *end_col);
        let (name, col) = cur.expect_ident("a state or output name")?;
        let primed = matches!(cur.peek(), Some(Tok { kind: TokKind::Prime, .. }));
        if primed {
            cur.next();
        }
        let idx = table
            .lookup(&name, 0)
            .ok_or_else(|| err_at(*line_no, col, format!("undeclared identifier {name}")))?;
        match (table.kind(idx), primed) {
            (VarKind::State, true) | (VarKind::Output, false) => {}
            (VarKind::State, false) => {
                return Err(err_at(*line_no, col, format!("state {name} needs a prime: {name}'")))
            }
            (VarKind::Output, true) => {
                return Err(err_at(*line_no, col, format!("output {name} cannot be primed")))
            }
            (k, _) => {
                let what = match k {
                    VarKind::Parameter => "a parameter",
                    VarKind::Input => "an input",
                    _ => unreachable!(),
                };
                return Err(err_at(
                    *line_no,
                    col,
                    format!("{name} is {what} and cannot have an equation"),
                ));
            }
        }
        if rhs_by_var.contains_key(&idx) {
            return Err(err_at(*line_no, col, format!("duplicate equation for {name}")));
        }
        cur.expect(&TokKind::Equals, "'='")?;
        let mut parser = ExprParser { cur, resolve: &resolve };
        let value = parser.parse_sum()?;
        if !parser.cur.at_end() {
            return Err(parser.cur.error("unexpected token after expression"));
        }
        rhs_by_var.insert(idx, value);
    }

    let mut rhs = Vec::new();
    for &x in &states {
        let (line, col) = decl_pos[&x];
        let f = rhs_by_var.remove(&x).ok_or_else(|| {
            err_at(line, col, format!("state {} has no equation", table.base_name(x)))
        })?;
        rhs.push(f);
    }
    let mut out = Vec::new();
    for &y in &outputs {
        let (line, col) = decl_pos[&y];
        let g = rhs_by_var.remove(&y).ok_or_else(|| {
            err_at(line, col, format!("output {} has no equation", table.base_name(y)))
        })?;
        out.push(g);
    }

    Model::assemble(table, params, states, outputs, inputs, rhs, out)
}

/// Parse a standalone expression over the order-0 variables of `table`.
/// Used for user-supplied functions of the parameters.
pub fn parse_expression(text: &str, table: &VarTable) -> Result<RatFun> {
    let toks = tokenize_line(1, text)?;
    let end_col = text.chars().count() + 1;
    let resolve = |name: &str, line: usize, col: usize| -> Result<QPoly> {
        match table.lookup(name, 0) {
            Some(idx) => Ok(QPoly::var(QField, idx).with_table(table)),
            None => Err(err_at(line, col, format!("undeclared identifier {name}"))),
        }
    };
    let cur = Cursor::new(1, &toks, end_col);
    let mut parser = ExprParser { cur, resolve: &resolve };
    let value = parser.parse_sum()?;
    if !parser.cur.at_end() {
        return Err(parser.cur.error("unexpected token after expression"));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_err(text: &str) -> (usize, usize, String) {
        match parse_model(text) {
            Err(Error::Parse { line, col, msg }) => (line, col, msg),
            other => panic!("expected a parse error, got {other:?}"),
        }
    }

    #[test]
    fn precedence_and_rationals() {
        let m = parse_model(
            "parameters: a, b\nstates: x\noutputs: y\nx' = -a*x^2 + 1/(b + 1)\ny = x\n",
        )
        .unwrap();
        // Common denominator b + 1; numerator of x' is -a x^2 (b+1) + 1.
        assert_eq!(m.q().display_q(m.table()), "1 + b");
        assert_eq!(m.f_num()[0].display_q(m.table()), "1 - a*x^2 - a*b*x^2");
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let m = parse_model("states: x\noutputs: y\nx' = -x^2\ny = x\n").unwrap();
        assert_eq!(m.rhs()[0].display(m.table()), "-x^2");
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let m = parse_model(
            "# a model\nstates: x\n\noutputs: y # observed\nx' = x  # growth\ny = x\n",
        )
        .unwrap();
        assert_eq!(m.states().len(), 1);
    }

    #[test]
    fn syntax_error_has_position() {
        let (line, col, msg) = parse_err("states: x\noutputs: y\nx' = x +\ny = x\n");
        assert_eq!((line, col), (3, 9));
        assert!(msg.contains("expected an expression"), "{msg}");
    }

    #[test]
    fn undeclared_identifier_rejected() {
        let (line, col, msg) = parse_err("states: x\noutputs: y\nx' = z\ny = x\n");
        assert_eq!((line, col), (3, 6));
        assert!(msg.contains("undeclared identifier z"), "{msg}");
    }

    #[test]
    fn state_without_equation_rejected() {
        let (line, _, msg) = parse_err("states: x, w\noutputs: y\nx' = x\ny = x\n");
        assert_eq!(line, 1);
        assert!(msg.contains("state w has no equation"), "{msg}");
    }

    #[test]
    fn duplicate_equation_rejected() {
        let (line, _, msg) = parse_err("states: x\noutputs: y\nx' = x\nx' = 2*x\ny = x\n");
        assert_eq!(line, 4);
        assert!(msg.contains("duplicate equation for x"), "{msg}");
    }

    #[test]
    fn zero_denominator_rejected() {
        let (line, col, msg) = parse_err("states: x\noutputs: y\nx' = x/(1 - 1)\ny = x\n");
        assert_eq!((line, col), (3, 7));
        assert!(msg.contains("division by the zero polynomial"), "{msg}");
    }

    #[test]
    fn outputs_cannot_appear_on_the_right() {
        let (_, _, msg) = parse_err("states: x\noutputs: y\nx' = y\ny = x\n");
        assert!(msg.contains("output y used on the right-hand side"), "{msg}");
    }

    #[test]
    fn duplicate_declaration_rejected() {
        let (line, col, msg) = parse_err("states: x, x\noutputs: y\nx' = x\ny = x\n");
        assert_eq!((line, col), (1, 12));
        assert!(msg.contains("declared twice"), "{msg}");
    }

    #[test]
    fn header_after_equation_rejected() {
        let (_, _, msg) = parse_err("states: x\nx' = x\noutputs: y\ny = x\n");
        assert!(msg.contains("declarations must precede equations"), "{msg}");
    }

    #[test]
    fn standalone_expressions_resolve_in_a_table() {
        let m = parse_model("parameters: a, b\nstates: x\noutputs: y\nx' = a*x\ny = b*x\n")
            .unwrap();
        let f = parse_expression("a^2/(a + b)", m.table()).unwrap();
        assert_eq!(f.display(m.table()), "a^2/(b + a)");
        assert!(parse_expression("a + c", m.table()).is_err());
    }

    #[test]
    fn division_folds_through_lcm() {
        let m = parse_model(
            "states: x1, x2\noutputs: y\nx1' = 1/x1 + 1/x2\nx2' = 1\ny = x1\n",
        )
        .unwrap();
        assert_eq!(m.q().display_q(m.table()), "x1*x2");
        assert_eq!(m.f_num()[0].display_q(m.table()), "x2 + x1");
    }
}
