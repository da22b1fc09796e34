//! Symbolic scalar expressions over chart coordinates.
//!
//! Expressions are immutable trees shared through `Arc`. They can be printed
//! and parsed in a prefix notation such as `(mul (const 2) (coord r))`,
//! differentiated symbolically, evaluated to `f64`, or evaluated to a
//! second-order [`Jet`] by forward propagation.

use std::fmt;
use std::sync::Arc;

use crate::error::{GeomError, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Coord { index: usize, name: Arc<str> },
    Add(Vec<ScalarExpr>),
    Mul(Vec<ScalarExpr>),
    Sub(ScalarExpr, ScalarExpr),
    Div(ScalarExpr, ScalarExpr),
    Pow(ScalarExpr, ScalarExpr),
    Neg(ScalarExpr),
    Sqrt(ScalarExpr),
    Sin(ScalarExpr),
    Cos(ScalarExpr),
    Tan(ScalarExpr),
    Exp(ScalarExpr),
    Ln(ScalarExpr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarExpr(Arc<Node>);

impl ScalarExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    /// Wraps a node without simplification.
    pub fn raw(node: Node) -> Self {
        ScalarExpr(Arc::new(node))
    }

    pub fn cst(x: f64) -> Self {
        Self::raw(Node::Const(x))
    }

    pub fn coord(index: usize, name: &str) -> Self {
        Self::raw(Node::Coord { index, name: Arc::from(name) })
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn add(&self, o: &ScalarExpr) -> ScalarExpr {
        add(vec![self.clone(), o.clone()])
    }
    pub fn sub(&self, o: &ScalarExpr) -> ScalarExpr {
        sub(self.clone(), o.clone())
    }
    pub fn mul(&self, o: &ScalarExpr) -> ScalarExpr {
        mul(vec![self.clone(), o.clone()])
    }
    pub fn div(&self, o: &ScalarExpr) -> ScalarExpr {
        div(self.clone(), o.clone())
    }
    pub fn neg(&self) -> ScalarExpr {
        neg(self.clone())
    }
    pub fn powf(&self, p: f64) -> ScalarExpr {
        pow(self.clone(), ScalarExpr::cst(p))
    }
    pub fn sqrt(&self) -> ScalarExpr {
        unary(self.clone(), Node::Sqrt, f64::sqrt)
    }
    pub fn sin(&self) -> ScalarExpr {
        unary(self.clone(), Node::Sin, f64::sin)
    }
    pub fn cos(&self) -> ScalarExpr {
        unary(self.clone(), Node::Cos, f64::cos)
    }
    pub fn tan(&self) -> ScalarExpr {
        unary(self.clone(), Node::Tan, f64::tan)
    }
    pub fn exp(&self) -> ScalarExpr {
        unary(self.clone(), Node::Exp, f64::exp)
    }
    pub fn ln(&self) -> ScalarExpr {
        unary(self.clone(), Node::Ln, f64::ln)
    }
    pub fn scale(&self, c: f64) -> ScalarExpr {
        mul(vec![ScalarExpr::cst(c), self.clone()])
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coord_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        self.visit(&mut |n| {
            if let Node::Coord { index, .. } = n {
                best = Some(best.map_or(*index, |b| b.max(*index)));
            }
        });
        best
    }

    fn visit(&self, f: &mut impl FnMut(&Node)) {
        f(self.node());
        match self.node() {
            Node::Const(_) | Node::Coord { .. } => {}
            Node::Add(v) | Node::Mul(v) => v.iter().for_each(|c| c.visit(f)),
            Node::Sub(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Node::Neg(a) | Node::Sqrt(a) | Node::Sin(a) | Node::Cos(a) | Node::Tan(a) | Node::Exp(a) | Node::Ln(a) => {
                a.visit(f)
            }
        }
    }

    /// Numeric value at a coordinate point.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        let out = match self.node() {
            Node::Const(c) => *c,
            Node::Coord { index, name } => {
                *point.get(*index).ok_or_else(|| GeomError::UnknownSymbol(name.to_string()))?
            }
            Node::Add(v) => {
                let mut s = 0.0;
                for c in v {
                    s += c.evaluate(point)?;
                }
                s
            }
            Node::Mul(v) => {
                let mut s = 1.0;
                for c in v {
                    s *= c.evaluate(point)?;
                }
                s
            }
            Node::Sub(a, b) => a.evaluate(point)? - b.evaluate(point)?,
            Node::Div(a, b) => {
                let d = b.evaluate(point)?;
                if d == 0.0 {
                    return Err(GeomError::domain("div", "division by zero"));
                }
                a.evaluate(point)? / d
            }
            Node::Pow(a, b) => {
                let x = a.evaluate(point)?;
                let p = b.evaluate(point)?;
                check_pow(x, p, b.as_const().is_some())?;
                x.powf(p)
            }
            Node::Neg(a) => -a.evaluate(point)?,
            Node::Sqrt(a) => {
                let x = a.evaluate(point)?;
                if x < 0.0 {
                    return Err(GeomError::domain("sqrt", format!("negative argument {x}")));
                }
                x.sqrt()
            }
            Node::Sin(a) => a.evaluate(point)?.sin(),
            Node::Cos(a) => a.evaluate(point)?.cos(),
            Node::Tan(a) => a.evaluate(point)?.tan(),
            Node::Exp(a) => a.evaluate(point)?.exp(),
            Node::Ln(a) => {
                let x = a.evaluate(point)?;
                if x <= 0.0 {
                    return Err(GeomError::domain("ln", format!("non-positive argument {x}")));
                }
                x.ln()
            }
        };
        if !out.is_finite() {
            return Err(GeomError::domain(op_name(self.node()), "non-finite result"));
        }
        Ok(out)
    }

    /// Value together with first and second partial derivatives at `point`.
    pub fn jet(&self, point: &[f64], order: u8) -> Result<Jet> {
        let n = point.len();
        let out = match self.node() {
            Node::Const(c) => Jet::cst(*c),
            Node::Coord { index, name } => {
                if *index >= n {
                    return Err(GeomError::UnknownSymbol(name.to_string()));
                }
                Jet::var(n, *index, point[*index], order)
            }
            Node::Add(v) => {
                let mut s = Jet::cst(0.0);
                for c in v {
                    s += c.jet(point, order)?;
                }
                s
            }
            Node::Mul(v) => {
                let mut s = Jet::cst(1.0);
                for c in v {
                    s = s * c.jet(point, order)?;
                }
                s
            }
            Node::Sub(a, b) => a.jet(point, order)? - b.jet(point, order)?,
            Node::Div(a, b) => {
                let d = b.jet(point, order)?;
                if d.val() == 0.0 {
                    return Err(GeomError::domain("div", "division by zero"));
                }
                a.jet(point, order)? * d.recip()
            }
            Node::Pow(a, b) => {
                let x = a.jet(point, order)?;
                match b.as_const() {
                    Some(p) => {
                        check_pow(x.val(), p, true)?;
                        if x.val() == 0.0 && order > 0 && p < 2.0 && p != 1.0 && p != 0.0 {
                            return Err(GeomError::domain("pow", "derivative singular at zero base"));
                        }
                        x.powf(p)
                    }
                    None => {
                        if x.val() <= 0.0 {
                            return Err(GeomError::domain("pow", "non-positive base with variable exponent"));
                        }
                        (b.jet(point, order)? * x.ln()).exp()
                    }
                }
            }
            Node::Neg(a) => -a.jet(point, order)?,
            Node::Sqrt(a) => {
                let x = a.jet(point, order)?;
                if x.val() < 0.0 || (x.val() == 0.0 && x.order() > 0) {
                    return Err(GeomError::domain("sqrt", format!("argument {}", x.val())));
                }
                x.sqrt()
            }
            Node::Sin(a) => a.jet(point, order)?.sin(),
            Node::Cos(a) => a.jet(point, order)?.cos(),
            Node::Tan(a) => a.jet(point, order)?.tan(),
            Node::Exp(a) => a.jet(point, order)?.exp(),
            Node::Ln(a) => {
                let x = a.jet(point, order)?;
                if x.val() <= 0.0 {
                    return Err(GeomError::domain("ln", format!("non-positive argument {}", x.val())));
                }
                x.ln()
            }
        };
        if !out.is_finite() {
            return Err(GeomError::domain(op_name(self.node()), "non-finite result"));
        }
        Ok(out)
    }

    /// Symbolic partial derivative with respect to coordinate `index`.
    pub fn differentiate(&self, index: usize) -> ScalarExpr {
        let d = |e: &ScalarExpr| e.differentiate(index);
        match self.node() {
            Node::Const(_) => ScalarExpr::cst(0.0),
            Node::Coord { index: i, .. } => ScalarExpr::cst(if *i == index { 1.0 } else { 0.0 }),
            Node::Add(v) => add(v.iter().map(d).collect()),
            Node::Mul(v) => {
                let mut terms = Vec::with_capacity(v.len());
                for (k, f) in v.iter().enumerate() {
                    let df = d(f);
                    if df.is_zero() {
                        continue;
                    }
                    let mut factors: Vec<ScalarExpr> = v.clone();
                    factors[k] = df;
                    terms.push(mul(factors));
                }
                add(terms)
            }
            Node::Sub(a, b) => sub(d(a), d(b)),
            Node::Div(a, b) => {
                // (a' b - a b') / b^2
                let num = sub(mul(vec![d(a), b.clone()]), mul(vec![a.clone(), d(b)]));
                div(num, pow(b.clone(), ScalarExpr::cst(2.0)))
            }
            Node::Pow(a, b) => match b.as_const() {
                Some(p) => mul(vec![ScalarExpr::cst(p), pow(a.clone(), ScalarExpr::cst(p - 1.0)), d(a)]),
                None => {
                    // a^b (b' ln a + b a'/a)
                    let inner = add(vec![mul(vec![d(b), a.ln()]), mul(vec![b.clone(), div(d(a), a.clone())])]);
                    mul(vec![self.clone(), inner])
                }
            },
            Node::Neg(a) => neg(d(a)),
            Node::Sqrt(a) => div(d(a), mul(vec![ScalarExpr::cst(2.0), self.clone()])),
            Node::Sin(a) => mul(vec![a.cos(), d(a)]),
            Node::Cos(a) => neg(mul(vec![a.sin(), d(a)])),
            Node::Tan(a) => mul(vec![add(vec![ScalarExpr::cst(1.0), pow(self.clone(), ScalarExpr::cst(2.0))]), d(a)]),
            Node::Exp(a) => mul(vec![self.clone(), d(a)]),
            Node::Ln(a) => div(d(a), a.clone()),
        }
    }

    /// Parses prefix notation. Bare numbers are constants and bare identifiers
    /// are coordinates looked up in `symbols`.
    pub fn parse<S: AsRef<str>>(src: &str, symbols: &[S]) -> Result<ScalarExpr> {
        let tokens = tokenize(src);
        let mut pos = 0;
        let e = parse_expr(&tokens, &mut pos, symbols)?;
        if pos != tokens.len() {
            return Err(GeomError::Parse { pos, msg: "trailing tokens".into() });
        }
        Ok(e)
    }
}

fn check_pow(x: f64, p: f64, _const_exp: bool) -> Result<()> {
    if x < 0.0 && p.fract() != 0.0 {
        return Err(GeomError::domain("pow", format!("negative base {x} with non-integer exponent {p}")));
    }
    if x == 0.0 && p < 0.0 {
        return Err(GeomError::domain("pow", "zero base with negative exponent"));
    }
    Ok(())
}

fn op_name(n: &Node) -> &'static str {
    match n {
        Node::Const(_) => "const",
        Node::Coord { .. } => "coord",
        Node::Add(_) => "add",
        Node::Mul(_) => "mul",
        Node::Sub(..) => "sub",
        Node::Div(..) => "div",
        Node::Pow(..) => "pow",
        Node::Neg(_) => "neg",
        Node::Sqrt(_) => "sqrt",
        Node::Sin(_) => "sin",
        Node::Cos(_) => "cos",
        Node::Tan(_) => "tan",
        Node::Exp(_) => "exp",
        Node::Ln(_) => "ln",
    }
}

/// Sum with constant folding and removal of zeros.
pub fn add(terms: Vec<ScalarExpr>) -> ScalarExpr {
    let mut c = 0.0;
    let mut rest = Vec::with_capacity(terms.len());
    for t in terms {
        match t.node() {
            Node::Const(x) => c += x,
            Node::Add(inner) => {
                for u in inner {
                    match u.as_const() {
                        Some(x) => c += x,
                        None => rest.push(u.clone()),
                    }
                }
            }
            _ => rest.push(t),
        }
    }
    if c != 0.0 {
        rest.push(ScalarExpr::cst(c));
    }
    match rest.len() {
        0 => ScalarExpr::cst(0.0),
        1 => rest.pop().unwrap(),
        _ => ScalarExpr::raw(Node::Add(rest)),
    }
}

/// Product with constant folding; any zero factor collapses the product.
pub fn mul(factors: Vec<ScalarExpr>) -> ScalarExpr {
    let mut c = 1.0;
    let mut rest = Vec::with_capacity(factors.len());
    for f in factors {
        match f.node() {
            Node::Const(x) => c *= x,
            Node::Mul(inner) => {
                for u in inner {
                    match u.as_const() {
                        Some(x) => c *= x,
                        None => rest.push(u.clone()),
                    }
                }
            }
            _ => rest.push(f),
        }
    }
    if c == 0.0 {
        return ScalarExpr::cst(0.0);
    }
    if rest.is_empty() {
        return ScalarExpr::cst(c);
    }
    if c != 1.0 {
        rest.insert(0, ScalarExpr::cst(c));
    }
    if rest.len() == 1 {
        rest.pop().unwrap()
    } else {
        ScalarExpr::raw(Node::Mul(rest))
    }
}

pub fn sub(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        return ScalarExpr::cst(x - y);
    }
    ScalarExpr::raw(Node::Sub(a, b))
}

pub fn div(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    if a.is_zero() {
        return a;
    }
    if b.is_one() {
        return a;
    }
    if let (Some(x), Some(y)) = (a.as_const(), b.as_const()) {
        if y != 0.0 {
            return ScalarExpr::cst(x / y);
        }
    }
    ScalarExpr::raw(Node::Div(a, b))
}

pub fn pow(a: ScalarExpr, b: ScalarExpr) -> ScalarExpr {
    match b.as_const() {
        Some(0.0) => return ScalarExpr::cst(1.0),
        Some(1.0) => return a,
        _ => {}
    }
    if let (Some(x), Some(p)) = (a.as_const(), b.as_const()) {
        let v = x.powf(p);
        if v.is_finite() {
            return ScalarExpr::cst(v);
        }
    }
    ScalarExpr::raw(Node::Pow(a, b))
}

pub fn neg(a: ScalarExpr) -> ScalarExpr {
    match a.node() {
        Node::Const(x) => ScalarExpr::cst(-x),
        Node::Neg(inner) => inner.clone(),
        _ => ScalarExpr::raw(Node::Neg(a)),
    }
}

fn unary(a: ScalarExpr, wrap: fn(ScalarExpr) -> Node, f: fn(f64) -> f64) -> ScalarExpr {
    if let Some(x) = a.as_const() {
        let v = f(x);
        if v.is_finite() {
            return ScalarExpr::cst(v);
        }
    }
    ScalarExpr::raw(wrap(a))
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "(const {c:?})"),
            Node::Coord { name, .. } => write!(f, "(coord {name})"),
            Node::Add(v) | Node::Mul(v) => {
                write!(f, "({}", op_name(self.node()))?;
                for c in v {
                    write!(f, " {c}")?;
                }
                write!(f, ")")
            }
            Node::Sub(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                write!(f, "({} {a} {b})", op_name(self.node()))
            }
            Node::Neg(a) | Node::Sqrt(a) | Node::Sin(a) | Node::Cos(a) | Node::Tan(a) | Node::Exp(a) | Node::Ln(a) => {
                write!(f, "({} {a})", op_name(self.node()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

fn tokenize(src: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<Tok>| {
        if !cur.is_empty() {
            out.push(Tok::Atom(std::mem::take(cur)));
        }
    };
    for ch in src.chars() {
        match ch {
            '(' => {
                flush(&mut cur, &mut out);
                out.push(Tok::Open);
            }
            ')' => {
                flush(&mut cur, &mut out);
                out.push(Tok::Close);
            }
            c if c.is_whitespace() => flush(&mut cur, &mut out),
            c => cur.push(c),
        }
    }
    flush(&mut cur, &mut out);
    out
}

fn parse_number(s: &str) -> Option<f64> {
    match s {
        "pi" => Some(std::f64::consts::PI),
        _ => s.parse::<f64>().ok().filter(|x| x.is_finite()),
    }
}

fn parse_atom<S: AsRef<str>>(s: &str, pos: usize, symbols: &[S]) -> Result<ScalarExpr> {
    if let Some(x) = parse_number(s) {
        return Ok(ScalarExpr::cst(x));
    }
    if s.chars().next().is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '+' || c == '.') {
        return Err(GeomError::Parse { pos, msg: format!("malformed number `{s}`") });
    }
    lookup(s, symbols)
}

fn lookup<S: AsRef<str>>(name: &str, symbols: &[S]) -> Result<ScalarExpr> {
    symbols
        .iter()
        .position(|s| s.as_ref() == name)
        .map(|i| ScalarExpr::coord(i, name))
        .ok_or_else(|| GeomError::UnknownSymbol(name.to_string()))
}

fn parse_expr<S: AsRef<str>>(t: &[Tok], pos: &mut usize, symbols: &[S]) -> Result<ScalarExpr> {
    let start = *pos;
    match t.get(*pos) {
        None => Err(GeomError::Parse { pos: start, msg: "unexpected end of input".into() }),
        Some(Tok::Close) => Err(GeomError::Parse { pos: start, msg: "unexpected `)`".into() }),
        Some(Tok::Atom(a)) => {
            *pos += 1;
            parse_atom(a, start, symbols)
        }
        Some(Tok::Open) => {
            *pos += 1;
            let op = match t.get(*pos) {
                Some(Tok::Atom(a)) => a.clone(),
                _ => return Err(GeomError::Parse { pos: *pos, msg: "expected operator".into() }),
            };
            *pos += 1;
            let e = match op.as_str() {
                "const" => {
                    let a = atom(t, pos)?;
                    let x = parse_number(&a)
                        .ok_or_else(|| GeomError::Parse { pos: *pos - 1, msg: format!("bad constant `{a}`") })?;
                    ScalarExpr::cst(x)
                }
                "coord" => {
                    let a = atom(t, pos)?;
                    lookup(&a, symbols)?
                }
                _ => {
                    let mut args = Vec::new();
                    while !matches!(t.get(*pos), Some(Tok::Close) | None) {
                        args.push(parse_expr(t, pos, symbols)?);
                    }
                    build(&op, args, start)?
                }
            };
            match t.get(*pos) {
                Some(Tok::Close) => {
                    *pos += 1;
                    Ok(e)
                }
                _ => Err(GeomError::Parse { pos: *pos, msg: format!("expected `)` closing `{op}`") }),
            }
        }
    }
}

fn atom(t: &[Tok], pos: &mut usize) -> Result<String> {
    match t.get(*pos) {
        Some(Tok::Atom(a)) => {
            *pos += 1;
            Ok(a.clone())
        }
        _ => Err(GeomError::Parse { pos: *pos, msg: "expected atom".into() }),
    }
}

fn build(op: &str, mut args: Vec<ScalarExpr>, pos: usize) -> Result<ScalarExpr> {
    let arity = |n: usize, args: &Vec<ScalarExpr>| -> Result<()> {
        if args.len() == n {
            Ok(())
        } else {
            Err(GeomError::Parse { pos, msg: format!("`{op}` takes {n} argument(s), got {}", args.len()) })
        }
    };
    let raw = ScalarExpr::raw;
    Ok(match op {
        "add" | "mul" => {
            if args.is_empty() {
                return Err(GeomError::Parse { pos, msg: format!("`{op}` needs arguments") });
            }
            if op == "add" {
                raw(Node::Add(args))
            } else {
                raw(Node::Mul(args))
            }
        }
        "sub" | "div" | "pow" => {
            arity(2, &args)?;
            let b = args.pop().unwrap();
            let a = args.pop().unwrap();
            match op {
                "sub" => raw(Node::Sub(a, b)),
                "div" => raw(Node::Div(a, b)),
                _ => raw(Node::Pow(a, b)),
            }
        }
        "neg" | "sqrt" | "sin" | "cos" | "tan" | "exp" | "ln" => {
            arity(1, &args)?;
            let a = args.pop().unwrap();
            raw(match op {
                "neg" => Node::Neg(a),
                "sqrt" => Node::Sqrt(a),
                "sin" => Node::Sin(a),
                "cos" => Node::Cos(a),
                "tan" => Node::Tan(a),
                "exp" => Node::Exp(a),
                _ => Node::Ln(a),
            })
        }
        _ => return Err(GeomError::Parse { pos, msg: format!("unknown operator `{op}`") }),
    })
}
