//! Boolean formulas with quantifiers: AST, text parser, pretty-printer,
//! and evaluation under partial assignments with quantifier shadowing.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// Deepest allowed chain of nested quantifiers during evaluation.
pub const MAX_QUANTIFIER_DEPTH: usize = 64;

/// Deepest allowed syntactic nesting accepted by the parser.
const MAX_PARSE_DEPTH: usize = 512;

/// Words that can never be variable names.
pub const RESERVED_WORDS: [&str; 4] = ["forall", "exists", "true", "false"];

/// A propositional variable name: a letter or underscore followed by
/// letters, digits, or underscores. Reserved words are rejected so that
/// every name survives a print/parse round trip.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(String);

impl VarName {
    pub fn new(name: &str) -> Result<Self> {
        if !is_identifier(name) || RESERVED_WORDS.contains(&name) {
            return Err(Error::InvalidVarName(name.to_string()));
        }
        Ok(VarName(name.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Maps variables to Boolean values. Evaluation requires every free
/// variable of the formula to be present.
pub type Assignment = BTreeMap<VarName, bool>;

/// Formula AST. Quantifiers bind a single variable; blocks over ordered
/// variable sets desugar to chains.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Var(VarName),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Forall(VarName, Box<Formula>),
    Exists(VarName, Box<Formula>),
}

impl Formula {
    pub fn var(name: &str) -> Result<Self> {
        Ok(Formula::Var(VarName::new(name)?))
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn forall(v: VarName, f: Formula) -> Self {
        Formula::Forall(v, Box::new(f))
    }

    pub fn exists(v: VarName, f: Formula) -> Self {
        Formula::Exists(v, Box::new(f))
    }

    /// True iff no Forall/Exists node appears.
    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Const(_) | Formula::Var(_) => true,
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Forall(_, _) | Formula::Exists(_, _) => false,
        }
    }

    /// Variables with at least one occurrence outside the scope of a
    /// same-named quantifier. Identically named variables inside and
    /// outside a quantifier scope are unrelated.
    pub fn free_vars(&self) -> BTreeSet<VarName> {
        let mut free = BTreeSet::new();
        let mut bound: HashMap<VarName, usize> = HashMap::new();
        self.collect_free(&mut bound, &mut free);
        free
    }

    fn collect_free(&self, bound: &mut HashMap<VarName, usize>, free: &mut BTreeSet<VarName>) {
        match self {
            Formula::Const(_) => {}
            Formula::Var(v) => {
                if !bound.get(v).is_some_and(|n| *n > 0) {
                    free.insert(v.clone());
                }
            }
            Formula::Not(f) => f.collect_free(bound, free),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, free);
                b.collect_free(bound, free);
            }
            Formula::Forall(v, f) | Formula::Exists(v, f) => {
                *bound.entry(v.clone()).or_insert(0) += 1;
                f.collect_free(bound, free);
                *bound.get_mut(v).unwrap() -= 1;
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn node_count(&self) -> usize {
        match self {
            Formula::Const(_) | Formula::Var(_) => 1,
            Formula::Not(f) | Formula::Forall(_, f) | Formula::Exists(_, f) => 1 + f.node_count(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    /// Evaluates the formula under `assignment`. Quantified variables
    /// shadow any outer binding of the same name; no renaming happens.
    pub fn eval(&self, assignment: &Assignment) -> Result<bool> {
        let free = self.free_vars();
        for v in &free {
            if !assignment.contains_key(v) {
                return Err(Error::MissingVariable(v.clone()));
            }
        }
        let mut env = Env {
            assignment,
            overlay: HashMap::new(),
        };
        self.eval_env(&mut env, 0)
    }

    /// Evaluates a closed formula (truth of a QBF).
    pub fn eval_qbf(&self) -> Result<bool> {
        let free = self.free_vars();
        if !free.is_empty() {
            let names: Vec<&str> = free.iter().map(|v| v.as_str()).collect();
            return Err(Error::NotClosed(names.join(", ")));
        }
        self.eval(&Assignment::new())
    }

    fn eval_env(&self, env: &mut Env<'_>, quant_depth: usize) -> Result<bool> {
        match self {
            Formula::Const(b) => Ok(*b),
            Formula::Var(v) => match env.lookup(v) {
                Some(b) => Ok(b),
                None => Err(Error::MissingVariable(v.clone())),
            },
            Formula::Not(f) => Ok(!f.eval_env(env, quant_depth)?),
            Formula::And(a, b) => {
                Ok(a.eval_env(env, quant_depth)? && b.eval_env(env, quant_depth)?)
            }
            Formula::Or(a, b) => Ok(a.eval_env(env, quant_depth)? || b.eval_env(env, quant_depth)?),
            Formula::Forall(v, f) => {
                self.check_depth(quant_depth)?;
                let prev = env.overlay.insert(v.clone(), false);
                let mut result = f.eval_env(env, quant_depth + 1)?;
                if result {
                    env.overlay.insert(v.clone(), true);
                    result = f.eval_env(env, quant_depth + 1)?;
                }
                env.restore(v, prev);
                Ok(result)
            }
            Formula::Exists(v, f) => {
                self.check_depth(quant_depth)?;
                let prev = env.overlay.insert(v.clone(), false);
                let mut result = f.eval_env(env, quant_depth + 1)?;
                if !result {
                    env.overlay.insert(v.clone(), true);
                    result = f.eval_env(env, quant_depth + 1)?;
                }
                env.restore(v, prev);
                Ok(result)
            }
        }
    }

    fn check_depth(&self, depth: usize) -> Result<()> {
        if depth >= MAX_QUANTIFIER_DEPTH {
            return Err(Error::QuantifierDepthExceeded(MAX_QUANTIFIER_DEPTH));
        }
        Ok(())
    }
}

struct Env<'a> {
    assignment: &'a Assignment,
    overlay: HashMap<VarName, bool>,
}

impl Env<'_> {
    fn lookup(&self, v: &VarName) -> Option<bool> {
        self.overlay
            .get(v)
            .or_else(|| self.assignment.get(v))
            .copied()
    }

    fn restore(&mut self, v: &VarName, prev: Option<bool>) {
        match prev {
            Some(b) => {
                self.overlay.insert(v.clone(), b);
            }
            None => {
                self.overlay.remove(v);
            }
        }
    }
}

// Printing. Precedence: quantifier bodies extend maximally right, then
// `|` < `&` < `!`. Right operands of `&`/`|` at equal precedence are
// parenthesized so that parsing (left-associative) round-trips the tree.

const PREC_OR: u8 = 1;
const PREC_AND: u8 = 2;
const PREC_NOT: u8 = 3;

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl Formula {
    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        match self {
            Formula::Const(true) => f.write_str("true"),
            Formula::Const(false) => f.write_str("false"),
            Formula::Var(v) => write!(f, "{v}"),
            Formula::Not(inner) => {
                f.write_str("!")?;
                inner.fmt_prec(f, PREC_NOT)
            }
            Formula::And(a, b) => {
                let parens = min_prec > PREC_AND;
                if parens {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, PREC_AND)?;
                f.write_str(" & ")?;
                b.fmt_prec(f, PREC_AND + 1)?;
                if parens {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::Or(a, b) => {
                let parens = min_prec > PREC_OR;
                if parens {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, PREC_OR)?;
                f.write_str(" | ")?;
                b.fmt_prec(f, PREC_OR + 1)?;
                if parens {
                    f.write_str(")")?;
                }
                Ok(())
            }
            Formula::Forall(v, body) | Formula::Exists(v, body) => {
                let kw = if matches!(self, Formula::Forall(_, _)) {
                    "forall"
                } else {
                    "exists"
                };
                let parens = min_prec > 0;
                if parens {
                    f.write_str("(")?;
                }
                write!(f, "{kw} {v} . ")?;
                body.fmt_prec(f, 0)?;
                if parens {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

// Parsing.

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Ident(String),
    Forall,
    Exists,
    True,
    False,
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
    Dot,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) => write!(f, "`{s}`"),
            TokenKind::Forall => f.write_str("`forall`"),
            TokenKind::Exists => f.write_str("`exists`"),
            TokenKind::True => f.write_str("`true`"),
            TokenKind::False => f.write_str("`false`"),
            TokenKind::Bang => f.write_str("`!`"),
            TokenKind::Amp => f.write_str("`&`"),
            TokenKind::Pipe => f.write_str("`|`"),
            TokenKind::LParen => f.write_str("`(`"),
            TokenKind::RParen => f.write_str("`)`"),
            TokenKind::Dot => f.write_str("`.`"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    line: usize,
    col: usize,
}

fn lex(text: &str, start_line: usize, start_col: usize) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut line = start_line;
    let mut col = start_col;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '!' | '&' | '|' | '(' | ')' | '.' => {
                chars.next();
                col += 1;
                let kind = match c {
                    '!' => TokenKind::Bang,
                    '&' => TokenKind::Amp,
                    '|' => TokenKind::Pipe,
                    '(' => TokenKind::LParen,
                    ')' => TokenKind::RParen,
                    _ => TokenKind::Dot,
                };
                tokens.push(Token {
                    kind,
                    line: tline,
                    col: tcol,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        word.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let kind = match word.as_str() {
                    "forall" => TokenKind::Forall,
                    "exists" => TokenKind::Exists,
                    "true" => TokenKind::True,
                    "false" => TokenKind::False,
                    _ => TokenKind::Ident(word),
                };
                tokens.push(Token {
                    kind,
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(Error::Parse {
                    line: tline,
                    col: tcol,
                    msg: format!("unexpected character `{other}`"),
                });
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end_line: usize,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, msg: String) -> Error {
        match self.peek() {
            Some(t) => Error::Parse {
                line: t.line,
                col: t.col,
                msg,
            },
            None => Error::Parse {
                line: self.end_line,
                col: self.end_col,
                msg,
            },
        }
    }

    fn formula(&mut self, depth: usize) -> Result<Formula> {
        if depth >= MAX_PARSE_DEPTH {
            return Err(self.error_at("formula nested too deeply".to_string()));
        }
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokenKind::Forall) | Some(TokenKind::Exists) => {
                let quant = self.next().unwrap();
                let var = match self.next() {
                    Some(Token {
                        kind: TokenKind::Ident(name),
                        ..
                    }) => VarName::new(&name).expect("lexer produced a valid identifier"),
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        return Err(self.error_at("expected variable name after quantifier".into()));
                    }
                };
                match self.next() {
                    Some(Token {
                        kind: TokenKind::Dot,
                        ..
                    }) => {}
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        return Err(self.error_at("expected `.` after quantified variable".into()));
                    }
                }
                let body = self.formula(depth + 1)?;
                Ok(match quant.kind {
                    TokenKind::Forall => Formula::forall(var, body),
                    _ => Formula::exists(var, body),
                })
            }
            _ => self.or_expr(depth),
        }
    }

    fn or_expr(&mut self, depth: usize) -> Result<Formula> {
        let mut left = self.and_expr(depth)?;
        while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Pipe)) {
            self.next();
            let right = self.and_expr(depth)?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn and_expr(&mut self, depth: usize) -> Result<Formula> {
        let mut left = self.unary(depth)?;
        while matches!(self.peek().map(|t| &t.kind), Some(TokenKind::Amp)) {
            self.next();
            let right = self.unary(depth)?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self, depth: usize) -> Result<Formula> {
        if depth >= MAX_PARSE_DEPTH {
            return Err(self.error_at("formula nested too deeply".to_string()));
        }
        match self.peek().map(|t| t.kind.clone()) {
            Some(TokenKind::Bang) => {
                self.next();
                Ok(Formula::not(self.unary(depth + 1)?))
            }
            Some(TokenKind::LParen) => {
                self.next();
                let inner = self.formula(depth + 1)?;
                match self.next() {
                    Some(Token {
                        kind: TokenKind::RParen,
                        ..
                    }) => Ok(inner),
                    _ => {
                        self.pos = self.pos.saturating_sub(1);
                        Err(self.error_at("expected `)`".into()))
                    }
                }
            }
            Some(TokenKind::True) => {
                self.next();
                Ok(Formula::Const(true))
            }
            Some(TokenKind::False) => {
                self.next();
                Ok(Formula::Const(false))
            }
            Some(TokenKind::Ident(name)) => {
                self.next();
                Ok(Formula::Var(
                    VarName::new(&name).expect("lexer produced a valid identifier"),
                ))
            }
            Some(other) => Err(self.error_at(format!("expected a formula, found {other}"))),
            None => Err(self.error_at("expected a formula, found end of input".into())),
        }
    }
}

/// Parses the concrete syntax: `!` `&` `|` `forall x .` `exists x .`,
/// precedence `!` > `&` > `|`, quantifiers extending maximally right,
/// parentheses overriding. `#` starts a line comment.
pub fn parse_formula(text: &str) -> Result<Formula> {
    parse_formula_at(text, 1, 1)
}

/// Like [`parse_formula`] but reporting positions relative to
/// `(start_line, start_col)`, for formulas embedded in larger files.
pub fn parse_formula_at(text: &str, start_line: usize, start_col: usize) -> Result<Formula> {
    let tokens = lex(text, start_line, start_col)?;
    if tokens.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (end_line, end_col) = tokens
        .last()
        .map(|t| (t.line, t.col + 1))
        .unwrap_or((start_line, start_col));
    let mut parser = Parser {
        tokens,
        pos: 0,
        end_line,
        end_col,
    };
    let f = parser.formula(0)?;
    if let Some(extra) = parser.peek() {
        return Err(Error::Parse {
            line: extra.line,
            col: extra.col,
            msg: format!("unexpected {} after formula", extra.kind),
        });
    }
    Ok(f)
}
