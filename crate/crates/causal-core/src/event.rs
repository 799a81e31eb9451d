//! Events: boolean combinations of primitive events `Y = y`.
//!
//! The AST is the closure of primitives under `¬` and `∧` only. The concrete
//! grammar also accepts `|`, which the parser desugars as
//! `a | b  ≡  !(!a & !b)` so that truth evaluation stays a direct transcription
//! of the inductive definition.
//!
//! Grammar (whitespace insignificant, `!` binds tighter than `&` than `|`):
//!
//! ```text
//! event  := term ('|' term)*
//! term   := factor ('&' factor)*
//! factor := '!' factor | '(' event ')' | IDENT '=' VALUE
//! ```

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{Assignment, CausalModel, Value, VarId, VarKind};

/// An event bound to a model: primitives hold resolved variable and value
/// indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Prim(VarId, Value),
    Not(Box<Event>),
    And(Box<Event>, Box<Event>),
}

impl Event {
    pub fn prim(var: VarId, value: Value) -> Event {
        Event::Prim(var, value)
    }

    pub fn not(e: Event) -> Event {
        Event::Not(Box::new(e))
    }

    pub fn and(a: Event, b: Event) -> Event {
        Event::And(Box::new(a), Box::new(b))
    }

    /// `a | b` as `!(!a & !b)`.
    pub fn or(a: Event, b: Event) -> Event {
        Event::not(Event::and(Event::not(a), Event::not(b)))
    }

    /// The conjunction `X = x` of one primitive per binding.
    pub fn conjunction(x: &Assignment) -> Option<Event> {
        let mut acc: Option<Event> = None;
        for (var, val) in x.iter() {
            let prim = Event::prim(var, val);
            acc = Some(match acc {
                None => prim,
                Some(e) => Event::and(e, prim),
            });
        }
        acc
    }

    /// Variables mentioned in some primitive.
    pub fn vars(&self) -> BTreeSet<VarId> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<VarId>) {
        match self {
            Event::Prim(v, _) => {
                out.insert(*v);
            }
            Event::Not(e) => e.collect_vars(out),
            Event::And(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Truth under a total assignment of the event's variables.
    pub fn eval(&self, lookup: &impl Fn(VarId) -> Value) -> bool {
        match self {
            Event::Prim(var, val) => lookup(*var) == *val,
            Event::Not(e) => !e.eval(lookup),
            Event::And(a, b) => a.eval(lookup) && b.eval(lookup),
        }
    }

    /// If the event is a single positive primitive `Y = y`, returns it.
    pub fn as_primitive(&self) -> Option<(VarId, Value)> {
        match self {
            Event::Prim(v, val) => Some((*v, *val)),
            _ => None,
        }
    }

    /// Canonical concrete syntax; `parse_event(render(e))` reproduces `e`
    /// structurally.
    pub fn render(&self, m: &CausalModel) -> String {
        match self {
            Event::Prim(var, val) => {
                format!("{}={}", m.name(*var), m.domain(*var).symbol(*val))
            }
            Event::Not(e) => match **e {
                Event::And(_, _) => format!("!({})", e.render(m)),
                _ => format!("!{}", e.render(m)),
            },
            Event::And(a, b) => {
                let left = a.render(m);
                let right = match **b {
                    Event::And(_, _) => format!("({})", b.render(m)),
                    _ => b.render(m),
                };
                format!("{left} & {right}")
            }
        }
    }
}

/// Unbound boolean expression over `NAME = VALUE` atoms. Used both for
/// events (bound against endogenous variables) and for mechanism expressions
/// (bound against a parent list).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawExpr {
    Atom { name: String, value: String },
    Not(Box<RawExpr>),
    And(Box<RawExpr>, Box<RawExpr>),
}

impl RawExpr {
    fn or(a: RawExpr, b: RawExpr) -> RawExpr {
        RawExpr::Not(Box::new(RawExpr::And(
            Box::new(RawExpr::Not(Box::new(a))),
            Box::new(RawExpr::Not(Box::new(b))),
        )))
    }

    pub fn eval(&self, lookup: &impl Fn(&str, &str) -> Result<bool>) -> Result<bool> {
        match self {
            RawExpr::Atom { name, value } => lookup(name, value),
            RawExpr::Not(e) => Ok(!e.eval(lookup)?),
            RawExpr::And(a, b) => Ok(a.eval(lookup)? && b.eval(lookup)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Bang,
    Amp,
    Pipe,
    Eq,
    LParen,
    RParen,
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'!' => {
                out.push((i, Token::Bang));
                i += 1;
            }
            b'&' => {
                out.push((i, Token::Amp));
                i += 1;
            }
            b'|' => {
                out.push((i, Token::Pipe));
                i += 1;
            }
            b'=' => {
                out.push((i, Token::Eq));
                i += 1;
            }
            b'(' => {
                out.push((i, Token::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Token::RParen));
                i += 1;
            }
            _ if is_word_byte(b) => {
                let start = i;
                while i < bytes.len() && is_word_byte(bytes[i]) {
                    i += 1;
                }
                out.push((start, Token::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(Error::EventSyntax {
                    position: i,
                    message: format!("unexpected character `{}`", &text[i..i + 1]),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<()> {
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(Error::EventSyntax {
                position: self.here(),
                message: format!("expected {what}"),
            }),
        }
    }

    fn event(&mut self) -> Result<RawExpr> {
        let mut node = self.term()?;
        while self.peek() == Some(&Token::Pipe) {
            self.bump();
            let rhs = self.term()?;
            node = RawExpr::or(node, rhs);
        }
        Ok(node)
    }

    fn term(&mut self) -> Result<RawExpr> {
        let mut node = self.factor()?;
        while self.peek() == Some(&Token::Amp) {
            self.bump();
            let rhs = self.factor()?;
            node = RawExpr::And(Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn factor(&mut self) -> Result<RawExpr> {
        match self.bump() {
            Some(Token::Bang) => Ok(RawExpr::Not(Box::new(self.factor()?))),
            Some(Token::LParen) => {
                let inner = self.event()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.expect(Token::Eq, "`=` after variable name")?;
                match self.bump() {
                    Some(Token::Ident(value)) => Ok(RawExpr::Atom { name, value }),
                    _ => Err(Error::EventSyntax {
                        position: self.here(),
                        message: "expected a value after `=`".into(),
                    }),
                }
            }
            _ => Err(Error::EventSyntax {
                position: self.here(),
                message: "expected `!`, `(` or a primitive NAME=VALUE".into(),
            }),
        }
    }
}

/// Parses the concrete event grammar without binding names to a model.
pub fn parse_raw(text: &str) -> Result<RawExpr> {
    let tokens = lex(text)?;
    if tokens.is_empty() {
        return Err(Error::EventSyntax {
            position: 0,
            message: "empty event".into(),
        });
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let expr = p.event()?;
    if p.pos != p.tokens.len() {
        return Err(Error::EventSyntax {
            position: p.here(),
            message: "trailing input after event".into(),
        });
    }
    Ok(expr)
}

fn bind(expr: &RawExpr, m: &CausalModel) -> Result<Event> {
    match expr {
        RawExpr::Atom { name, value } => {
            let id = m.lookup(name)?;
            if m.kind(id) != VarKind::Endogenous {
                return Err(Error::EventOverExogenous(name.clone()));
            }
            let v = m.value_named(id, value)?;
            Ok(Event::Prim(id, v))
        }
        RawExpr::Not(e) => Ok(Event::not(bind(e, m)?)),
        RawExpr::And(a, b) => Ok(Event::and(bind(a, m)?, bind(b, m)?)),
    }
}

/// Parses an event and binds its primitives against `m`'s endogenous
/// variables.
pub fn parse_event(m: &CausalModel, text: &str) -> Result<Event> {
    bind(&parse_raw(text)?, m)
}

impl CausalModel {
    /// `(M, u) ⊨ φ`.
    pub fn holds(&self, u: &Assignment, phi: &Event) -> Result<bool> {
        self.holds_intervened(&Assignment::new(), u, phi)
    }

    /// `(M_x, u) ⊨ φ`, evaluated without materializing the submodel.
    pub fn holds_intervened(&self, x: &Assignment, u: &Assignment, phi: &Event) -> Result<bool> {
        let targets: Vec<VarId> = phi.vars().into_iter().collect();
        let vals = self.eval_intervened(x, u, &targets)?;
        Ok(phi.eval(&|v| vals.get(v).expect("event variable evaluated")))
    }
}
