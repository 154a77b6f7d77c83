//! Recursive-descent parser for formulas.
//!
//! Precedence from tightest: `!`, `&`, `|`, `->` (right associative). A
//! quantifier body extends as far right as possible.

use super::ast::{Formula, Term};
use super::LogicError;
use crate::plan::PlanPath;

pub fn parse_formula(text: &str) -> Result<Formula, LogicError> {
    let mut p = Parser { src: text, pos: 0 };
    let f = p.implication()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(f)
}

/// One formula per non-empty line; `#` starts a comment.
pub fn parse_formula_file(text: &str) -> Result<Vec<Formula>, LogicError> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        out.push(parse_formula(body).map_err(|e| match e {
            LogicError::Syntax { pos, message } => {
                LogicError::Syntax { pos, message: format!("line {}: {message}", lineno + 1) }
            }
            other => other,
        })?);
    }
    Ok(out)
}

pub fn parse_term(text: &str) -> Result<Term, LogicError> {
    let mut p = Parser { src: text, pos: 0 };
    let t = p.term()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(t)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, message: &str) -> LogicError {
        LogicError::Syntax { pos: self.pos, message: message.to_string() }
    }

    fn rest(&self) -> &str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), LogicError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(&format!("expected {tok:?}")))
        }
    }

    fn peek_ident(&mut self) -> Option<String> {
        self.skip_ws();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return None,
        }
        let end = chars.find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_')).map_or(rest.len(), |(i, _)| i);
        Some(rest[..end].to_string())
    }

    fn ident(&mut self) -> Result<String, LogicError> {
        let id = self.peek_ident().ok_or_else(|| self.err("expected identifier"))?;
        self.pos += id.len();
        Ok(id)
    }

    fn implication(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LogicError> {
        let mut f = self.conjunction()?;
        while self.eat("|") {
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, LogicError> {
        let mut f = self.unary()?;
        while self.eat("&") {
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, LogicError> {
        if self.eat("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.peek() == Some('(') {
            self.pos += 1;
            let f = self.implication()?;
            self.expect(")")?;
            return Ok(f);
        }
        match self.peek_ident().as_deref() {
            Some(q @ ("exists" | "forall")) => {
                let is_exists = q == "exists";
                self.pos += q.len();
                let v = self.ident()?;
                self.expect(".")?;
                let body = self.implication()?;
                Ok(if is_exists { Formula::exists(&v, body) } else { Formula::forall(&v, body) })
            }
            Some("P") if self.rest()[1..].trim_start().starts_with('[') => self.label(),
            _ => self.comparison(),
        }
    }

    fn label(&mut self) -> Result<Formula, LogicError> {
        self.expect("P")?;
        self.expect("[")?;
        let start = self.pos;
        let end = self.rest().find(']').ok_or_else(|| self.err("unterminated label path"))?;
        let text = &self.src[start..start + end];
        let path: PlanPath =
            text.parse().map_err(|_| LogicError::Syntax { pos: start, message: format!("bad label path {text:?}") })?;
        self.pos = start + end + 1;
        self.expect("(")?;
        let t = self.term()?;
        self.expect(")")?;
        Ok(Formula::label(path, t))
    }

    fn comparison(&mut self) -> Result<Formula, LogicError> {
        let lhs = self.term()?;
        if self.eat("<=") {
            return Ok(Formula::leq(lhs, self.term()?));
        }
        if self.eat("=") {
            return Ok(Formula::eq(lhs, self.term()?));
        }
        Err(self.err("expected \"=\" or \"<=\""))
    }

    fn term(&mut self) -> Result<Term, LogicError> {
        let at = self.pos;
        let id = self.ident().map_err(|_| self.err("expected term"))?;
        match id.as_str() {
            "eps" => Ok(Term::Eps),
            "pred" => {
                let k = if self.eat("^") { self.natural()? } else { 1 };
                self.expect("(")?;
                let t = self.term()?;
                self.expect(")")?;
                Ok(Term::pred_k(t, k))
            }
            "meet" => {
                self.expect("(")?;
                let a = self.term()?;
                self.expect(",")?;
                let b = self.term()?;
                self.expect(")")?;
                Ok(Term::meet(a, b))
            }
            "exists" | "forall" => {
                self.pos = at;
                Err(self.err("quantifier where a term was expected"))
            }
            _ => Ok(Term::Var(id)),
        }
    }

    fn natural(&mut self) -> Result<usize, LogicError> {
        self.skip_ws();
        let digits = self.rest().chars().take_while(char::is_ascii_digit).count();
        if digits == 0 {
            return Err(self.err("expected a natural number"));
        }
        let k = self.rest()[..digits].parse().map_err(|_| self.err("number too large"))?;
        self.pos += digits;
        Ok(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::ast::qrank;

    fn p(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn spec_examples() {
        assert_eq!(p("eps = eps"), Formula::eq(Term::Eps, Term::Eps));
        let f = p("exists x. pred(x) = eps & !(x = eps)");
        assert_eq!(qrank(&f), 1);
        assert_eq!(
            f,
            Formula::exists(
                "x",
                Formula::and(
                    Formula::eq(Term::pred(Term::var("x")), Term::Eps),
                    Formula::not(Formula::eq(Term::var("x"), Term::Eps))
                )
            )
        );
        assert_eq!(p("P[0.0](x)"), Formula::label(PlanPath::new(vec![0, 0]), Term::var("x")));
    }

    #[test]
    fn pred_sugar() {
        assert_eq!(p("pred^3(x) = y"), Formula::eq(Term::pred_k(Term::var("x"), 3), Term::var("y")));
        assert_eq!(p("pred^0(x) = y"), Formula::eq(Term::var("x"), Term::var("y")));
        assert_eq!(p("P[](eps)"), Formula::label(PlanPath::root(), Term::Eps));
    }

    #[test]
    fn precedence() {
        let x = || Formula::eq(Term::var("x"), Term::var("x"));
        assert_eq!(p("x = x | x = x & x = x"), Formula::or(x(), Formula::and(x(), x())));
        assert_eq!(p("x = x -> x = x -> x = x"), Formula::implies(x(), Formula::implies(x(), x())));
        assert_eq!(p("!x = x & x = x"), Formula::and(Formula::not(x()), x()));
        assert_eq!(p("(x = x -> x = x) -> x = x"), Formula::implies(Formula::implies(x(), x()), x()));
        // The quantifier body runs to the end.
        assert_eq!(p("exists x. x = x & x = x"), Formula::exists("x", Formula::and(x(), x())));
    }

    #[test]
    fn qrank_examples() {
        let atom = || Formula::eq(Term::var("x"), Term::var("y"));
        assert_eq!(qrank(&atom()), 0);
        assert_eq!(qrank(&Formula::exists("x", atom())), 1);
        let f = Formula::forall("x", Formula::and(Formula::exists("y", atom()), Formula::exists("z", atom())));
        assert_eq!(qrank(&f), 2);
        assert_eq!(qrank(&p("forall x. (exists y. x = y) & exists z. x = z")), 2);
    }

    #[test]
    fn errors_carry_positions() {
        match parse_formula("x = ") {
            Err(LogicError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(parse_formula("exists . x = x").is_err());
        assert!(parse_formula("x = x )").is_err());
        assert!(parse_formula("P[a](x)").is_err());
        assert!(parse_formula("x").is_err());
    }

    #[test]
    fn formula_file() {
        let fs = parse_formula_file("# header\nx = x\n\n  eps <= x # trailing\n").unwrap();
        assert_eq!(fs.len(), 2);
        match parse_formula_file("x = x\nx =") {
            Err(LogicError::Syntax { message, .. }) => assert!(message.starts_with("line 2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "exists x. pred(x) = eps & !(x = eps)",
            "forall x. (exists y. pred(y) = x) -> P[0.1](x) | meet(x, y) <= pred^2(z)",
            "!(!(x = y))",
            "(x = x -> x = x) -> x = x",
            "exists y. (exists z. y = z) & P[](y)",
        ] {
            let f = p(s);
            assert_eq!(p(&f.to_string()), f, "{s}");
        }
    }
}
