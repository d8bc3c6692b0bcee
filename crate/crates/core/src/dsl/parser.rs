//! Recursive-descent parser producing an unsorted syntax tree; sorts and
//! symbol kinds are resolved afterwards by elaboration.

use super::lexer::{lex, Span, Tok};
use crate::logic::Rat;

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CmpKind {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Prec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binder {
    pub name: String,
    pub sort: String,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Ident(String),
    Num(Rat),
    App(String, Vec<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Cmp(CmpKind, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Iff(Box<Expr>, Box<Expr>),
    Quant(bool, Vec<Binder>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: Option<String>,
    pub sort: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Item {
    Sort {
        name: String,
        objects: Vec<String>,
    },
    Static {
        pred: bool,
        name: String,
        params: Vec<Param>,
        result: Option<String>,
        def: Option<Expr>,
    },
    Action {
        natural: bool,
        name: String,
        sorts: Vec<String>,
    },
    Fluent {
        kind: String,
        name: String,
        sorts: Vec<String>,
        result: Option<String>,
    },
    /// A single formula item (poss, ssa, init facts, constraints).
    Formula(Expr),
    InitSsa {
        head: Expr,
        cases: Vec<Case>,
    },
    Tca {
        head: Expr,
        context: Expr,
        law: Expr,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    pub pattern: Expr,
    pub guard: Option<Expr>,
    pub value: Expr,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Section {
    pub name: String,
    pub items: Vec<(Item, Span)>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub message: String,
    pub span: Span,
}

pub const SECTIONS: [&str; 10] = [
    "sorts",
    "statics",
    "actions",
    "fluents",
    "poss",
    "ssa",
    "init-ssa",
    "tca",
    "init",
    "constraints",
];

pub(crate) struct Parser {
    toks: Vec<(Tok, Span)>,
    pos: usize,
}

pub(crate) type PResult<T> = Result<T, ParseError>;

impl Parser {
    pub(crate) fn new(src: &str) -> PResult<Parser> {
        Ok(Parser {
            toks: tokens(src)?,
            pos: 0,
        })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    pub(crate) fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    pub(crate) fn span(&self) -> Span {
        self.toks[self.pos].1
    }

    pub(crate) fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseError {
            message: msg.into(),
            span: self.span(),
        })
    }

    pub(crate) fn expect(&mut self, t: Tok) -> PResult<()> {
        if *self.peek() == t {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected {t}, found {}", self.peek()))
        }
    }

    pub(crate) fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.next();
            true
        } else {
            false
        }
    }

    pub(crate) fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    pub(crate) fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {other}")),
        }
    }

    fn file(&mut self) -> PResult<Vec<Section>> {
        let mut out = Vec::new();
        while *self.peek() != Tok::Eof {
            let span = self.span();
            let mut name = self.ident()?;
            if name == "init"
                && *self.peek() == Tok::Minus
                && *self.peek_at(1) == Tok::Ident("ssa".into())
            {
                self.next();
                self.next();
                name = "init-ssa".into();
            }
            if !SECTIONS.contains(&name.as_str()) {
                return Err(ParseError {
                    message: format!("unknown section `{name}`"),
                    span,
                });
            }
            self.expect(Tok::LBrace)?;
            let mut items = Vec::new();
            while !self.eat(&Tok::RBrace) {
                if *self.peek() == Tok::Eof {
                    return self.err(format!("unterminated section `{name}`"));
                }
                let s = self.span();
                items.push((self.item(&name)?, s));
            }
            out.push(Section { name, items, span });
        }
        Ok(out)
    }

    fn sort_list(&mut self) -> PResult<Vec<String>> {
        let mut out = Vec::new();
        if self.eat(&Tok::LParen)
            && !self.eat(&Tok::RParen) {
                loop {
                    out.push(self.ident()?);
                    if self.eat(&Tok::RParen) {
                        break;
                    }
                    self.expect(Tok::Comma)?;
                }
            }
        Ok(out)
    }

    fn item(&mut self, section: &str) -> PResult<Item> {
        let item = match section {
            "sorts" => {
                let name = self.ident()?;
                let mut objects = Vec::new();
                if self.eat(&Tok::Eq) {
                    self.expect(Tok::LBrace)?;
                    if !self.eat(&Tok::RBrace) {
                        loop {
                            objects.push(self.ident()?);
                            if self.eat(&Tok::RBrace) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                }
                Item::Sort { name, objects }
            }
            "statics" => {
                let def = if self.is_kw("def") {
                    self.next();
                    true
                } else {
                    false
                };
                let pred = match self.ident()?.as_str() {
                    "pred" => true,
                    "fun" => false,
                    other => return self.err(format!("expected `pred` or `fun`, found `{other}`")),
                };
                let name = self.ident()?;
                let mut params = Vec::new();
                if self.eat(&Tok::LParen) && !self.eat(&Tok::RParen) {
                    loop {
                        let first = self.ident()?;
                        if self.eat(&Tok::Colon) {
                            params.push(Param {
                                name: Some(first),
                                sort: self.ident()?,
                            });
                        } else {
                            params.push(Param {
                                name: None,
                                sort: first,
                            });
                        }
                        if self.eat(&Tok::RParen) {
                            break;
                        }
                        self.expect(Tok::Comma)?;
                    }
                }
                let result = if !pred {
                    self.expect(Tok::Colon)?;
                    Some(self.ident()?)
                } else {
                    None
                };
                let body = if def {
                    self.expect(Tok::Assign)?;
                    Some(self.expr()?)
                } else {
                    None
                };
                Item::Static {
                    pred,
                    name,
                    params,
                    result,
                    def: body,
                }
            }
            "actions" => {
                let natural = if self.is_kw("natural") {
                    self.next();
                    true
                } else {
                    false
                };
                let name = self.ident()?;
                Item::Action {
                    natural,
                    name,
                    sorts: self.sort_list()?,
                }
            }
            "fluents" => {
                let kind = self.ident()?;
                if !["rel", "fun", "temporal"].contains(&kind.as_str()) {
                    return self.err(format!(
                        "expected `rel`, `fun` or `temporal`, found `{kind}`"
                    ));
                }
                let name = self.ident()?;
                let sorts = self.sort_list()?;
                let result = if kind == "fun" {
                    self.expect(Tok::Colon)?;
                    Some(self.ident()?)
                } else {
                    None
                };
                Item::Fluent {
                    kind,
                    name,
                    sorts,
                    result,
                }
            }
            "init-ssa" => {
                let head = self.expr()?;
                self.expect(Tok::LBrace)?;
                let mut cases = Vec::new();
                while !self.eat(&Tok::RBrace) {
                    let span = self.span();
                    let pattern = self.expr()?;
                    let guard = if self.is_kw("if") {
                        self.next();
                        Some(self.expr()?)
                    } else {
                        None
                    };
                    self.expect(Tok::FatArrow)?;
                    let value = self.expr()?;
                    self.expect(Tok::Semi)?;
                    cases.push(Case {
                        pattern,
                        guard,
                        value,
                        span,
                    });
                }
                self.eat(&Tok::Semi);
                return Ok(Item::InitSsa { head, cases });
            }
            "tca" => {
                let head = self.expr()?;
                if !self.is_kw("when") {
                    return self.err(format!("expected `when`, found {}", self.peek()));
                }
                self.next();
                let context = self.expr()?;
                if !self.is_kw("then") {
                    return self.err(format!("expected `then`, found {}", self.peek()));
                }
                self.next();
                let law = self.expr()?;
                Item::Tca { head, context, law }
            }
            _ => Item::Formula(self.expr()?),
        };
        self.expect(Tok::Semi)?;
        Ok(item)
    }

    pub(crate) fn expr(&mut self) -> PResult<Expr> {
        if self.is_kw("exists") || self.is_kw("forall") {
            return self.quant();
        }
        let span = self.span();
        let lhs = self.implies()?;
        if self.eat(&Tok::Iff) {
            let rhs = self.implies()?;
            return Ok(Expr {
                kind: ExprKind::Iff(Box::new(lhs), Box::new(rhs)),
                span,
            });
        }
        Ok(lhs)
    }

    fn quant(&mut self) -> PResult<Expr> {
        let span = self.span();
        let exists = self.ident()? == "exists";
        let mut binders = Vec::new();
        loop {
            let bspan = self.span();
            let name = self.ident()?;
            self.expect(Tok::Colon)?;
            let sort = self.ident()?;
            binders.push(Binder {
                name,
                sort,
                span: bspan,
            });
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Dot)?;
        let body = self.expr()?;
        Ok(Expr {
            kind: ExprKind::Quant(exists, binders, Box::new(body)),
            span,
        })
    }

    fn implies(&mut self) -> PResult<Expr> {
        let span = self.span();
        let lhs = self.or()?;
        if self.eat(&Tok::Implies) {
            let rhs = if self.is_kw("exists") || self.is_kw("forall") {
                self.quant()?
            } else {
                self.implies()?
            };
            return Ok(Expr {
                kind: ExprKind::Implies(Box::new(lhs), Box::new(rhs)),
                span,
            });
        }
        Ok(lhs)
    }

    fn or(&mut self) -> PResult<Expr> {
        let span = self.span();
        let mut parts = vec![self.and()?];
        while self.eat(&Tok::Pipe) {
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr {
                kind: ExprKind::Or(parts),
                span,
            }
        })
    }

    fn and(&mut self) -> PResult<Expr> {
        let span = self.span();
        let mut parts = vec![self.unary()?];
        while self.eat(&Tok::Amp) {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr {
                kind: ExprKind::And(parts),
                span,
            }
        })
    }

    fn unary(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat(&Tok::Bang) {
            let inner = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Not(Box::new(inner)),
                span,
            });
        }
        if self.is_kw("exists") || self.is_kw("forall") {
            return self.quant();
        }
        self.cmp()
    }

    fn cmp(&mut self) -> PResult<Expr> {
        let span = self.span();
        let lhs = self.arith()?;
        let op = match self.peek() {
            Tok::Eq => CmpKind::Eq,
            Tok::Ne => CmpKind::Ne,
            Tok::Lt => CmpKind::Lt,
            Tok::Le => CmpKind::Le,
            Tok::Gt => CmpKind::Gt,
            Tok::Ge => CmpKind::Ge,
            Tok::Prec => CmpKind::Prec,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.arith()?;
        Ok(Expr {
            kind: ExprKind::Cmp(op, Box::new(lhs), Box::new(rhs)),
            span,
        })
    }

    fn arith(&mut self) -> PResult<Expr> {
        let span = self.span();
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.product()?;
            lhs = Expr {
                kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn product(&mut self) -> PResult<Expr> {
        let span = self.span();
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.factor()?;
            lhs = Expr {
                kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn factor(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat(&Tok::Minus) {
            let inner = self.factor()?;
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        match self.next() {
            Tok::Num(r) => Ok(Expr {
                kind: ExprKind::Num(r),
                span,
            }),
            Tok::Ident(name) => {
                if self.eat(&Tok::LParen) {
                    let mut args = Vec::new();
                    if !self.eat(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if self.eat(&Tok::RParen) {
                                break;
                            }
                            self.expect(Tok::Comma)?;
                        }
                    }
                    Ok(Expr {
                        kind: ExprKind::App(name, args),
                        span,
                    })
                } else {
                    Ok(Expr {
                        kind: ExprKind::Ident(name),
                        span,
                    })
                }
            }
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            other => Err(ParseError {
                message: format!("unexpected {other}"),
                span,
            }),
        }
    }
}

fn tokens(src: &str) -> PResult<Vec<(Tok, Span)>> {
    lex(src).map_err(|e| ParseError {
        message: e.message,
        span: e.span,
    })
}

pub fn parse_sections(src: &str) -> PResult<Vec<Section>> {
    Parser::new(src)?.file()
}

/// Parses a standalone formula or term.
pub fn parse_expr(src: &str) -> PResult<Expr> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after expression", p.peek()));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        let e = parse_expr("a & b | !c -> d <-> e").unwrap();
        let ExprKind::Iff(lhs, _) = e.kind else {
            panic!()
        };
        let ExprKind::Implies(or, _) = lhs.kind else {
            panic!()
        };
        let ExprKind::Or(parts) = or.kind else {
            panic!()
        };
        assert!(matches!(parts[0].kind, ExprKind::And(_)));
        assert!(matches!(parts[1].kind, ExprKind::Not(_)));
    }

    #[test]
    fn quantifier_body_extends_right() {
        let e = parse_expr("exists x: real, r: lane. x < 1 & P(r)").unwrap();
        let ExprKind::Quant(true, bs, body) = e.kind else {
            panic!()
        };
        assert_eq!(bs.len(), 2);
        assert!(matches!(body.kind, ExprKind::And(_)));
    }

    #[test]
    fn sections_and_items() {
        let src = "sorts { lane = { a, b }; }\nactions { natural go(lane); }\ninit-ssa { f_init(x, do(a, s)) { go(x, t) => 0; } }";
        let secs = parse_sections(src).unwrap();
        assert_eq!(secs.len(), 3);
        assert_eq!(secs[2].name, "init-ssa");
        assert!(matches!(
            &secs[1].items[0].0,
            Item::Action { natural: true, .. }
        ));
    }

    #[test]
    fn syntax_error_location() {
        let err = parse_sections("sorts {\n  lane = { a b };\n}").unwrap_err();
        assert_eq!(err.span.line, 2);
    }
}
