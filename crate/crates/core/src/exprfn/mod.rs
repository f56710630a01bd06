//! Warping-profile expressions in the radial variable `t`.
//!
//! Profiles such as `sqrt((a+b*t)/t)` are parsed into a small expression
//! tree over `{+, -, *, /, ^, sqrt, exp, log}`. Trees can be evaluated
//! against a [`ParamBinding`], differentiated symbolically with respect to
//! `t`, and serialized back to a fully parenthesized canonical form.

mod diff;
mod eval;
mod parse;
pub mod quad;

use std::fmt;

pub use eval::{BoundExpr, DomainKind, EvalError, ParamBinding};
pub use parse::ParseError;
pub use quad::{integrate_adaptive, QuadError, Quadrature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sqrt,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

/// Expression tree node. Parameters are stored as indices into the owning
/// [`WarpExpr::params`] list.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Param(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    /// True when the subtree mentions `t`.
    pub fn depends_on_t(&self) -> bool {
        match self {
            Node::Const(_) | Node::Param(_) => false,
            Node::Var => true,
            Node::Neg(a) | Node::Call(_, a) => a.depends_on_t(),
            Node::Binary(_, a, b) => a.depends_on_t() || b.depends_on_t(),
        }
    }

    fn max_param(&self) -> Option<usize> {
        match self {
            Node::Param(i) => Some(*i),
            Node::Const(_) | Node::Var => None,
            Node::Neg(a) | Node::Call(_, a) => a.max_param(),
            Node::Binary(_, a, b) => match (a.max_param(), b.max_param()) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            },
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Node::Const(_) | Node::Var | Node::Param(_) => 1,
            Node::Neg(a) | Node::Call(_, a) => 1 + a.size(),
            Node::Binary(_, a, b) => 1 + a.size() + b.size(),
        }
    }

    // Constructors below fold constants and drop neutral elements. They never
    // fold to a non-finite constant.

    pub(crate) fn neg(a: Node) -> Node {
        match a {
            Node::Const(c) => Node::Const(-c),
            Node::Neg(inner) => *inner,
            other => Node::Neg(Box::new(other)),
        }
    }

    pub(crate) fn add(a: Node, b: Node) -> Node {
        match (&a, &b) {
            (Node::Const(x), _) if *x == 0.0 => b,
            (_, Node::Const(y)) if *y == 0.0 => a,
            (Node::Const(x), Node::Const(y)) => Node::Const(x + y),
            _ => Node::Binary(BinOp::Add, Box::new(a), Box::new(b)),
        }
    }

    pub(crate) fn sub(a: Node, b: Node) -> Node {
        match (&a, &b) {
            (_, Node::Const(y)) if *y == 0.0 => a,
            (Node::Const(x), _) if *x == 0.0 => Node::neg(b),
            (Node::Const(x), Node::Const(y)) => Node::Const(x - y),
            _ => Node::Binary(BinOp::Sub, Box::new(a), Box::new(b)),
        }
    }

    pub(crate) fn mul(a: Node, b: Node) -> Node {
        match (&a, &b) {
            (Node::Const(x), _) | (_, Node::Const(x)) if *x == 0.0 => Node::Const(0.0),
            (Node::Const(x), _) if *x == 1.0 => b,
            (_, Node::Const(y)) if *y == 1.0 => a,
            (Node::Const(x), Node::Const(y)) => Node::Const(x * y),
            _ => Node::Binary(BinOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    pub(crate) fn div(a: Node, b: Node) -> Node {
        match (&a, &b) {
            (_, Node::Const(y)) if *y == 1.0 => a,
            (Node::Const(x), Node::Const(y)) if *y != 0.0 => Node::Const(x / y),
            _ => Node::Binary(BinOp::Div, Box::new(a), Box::new(b)),
        }
    }

    pub(crate) fn pow(a: Node, b: Node) -> Node {
        match (&a, &b) {
            (_, Node::Const(y)) if *y == 1.0 => a,
            (_, Node::Const(y)) if *y == 0.0 => Node::Const(1.0),
            (Node::Const(x), Node::Const(y)) if x.powf(*y).is_finite() => Node::Const(x.powf(*y)),
            _ => Node::Binary(BinOp::Pow, Box::new(a), Box::new(b)),
        }
    }

    pub(crate) fn call(f: Func, a: Node) -> Node {
        Node::Call(f, Box::new(a))
    }

    fn write(&self, names: &[String], out: &mut String) {
        use std::fmt::Write;
        match self {
            Node::Const(c) => {
                if c.is_sign_negative() {
                    let _ = write!(out, "(-{})", -c);
                } else {
                    let _ = write!(out, "{}", c);
                }
            }
            Node::Var => out.push('t'),
            Node::Param(i) => out.push_str(&names[*i]),
            Node::Neg(a) => {
                out.push_str("(-");
                a.write(names, out);
                out.push(')');
            }
            Node::Binary(op, a, b) => {
                out.push('(');
                a.write(names, out);
                out.push(op.symbol());
                b.write(names, out);
                out.push(')');
            }
            Node::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.write(names, out);
                out.push(')');
            }
        }
    }
}

/// A parsed profile expression together with its ordered parameter names.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpExpr {
    root: Node,
    params: Vec<String>,
}

impl WarpExpr {
    /// Builds an expression from a tree. Every `Param(i)` must index into `params`.
    pub fn from_node(root: Node, params: Vec<String>) -> Result<WarpExpr, ParseError> {
        if let Some(i) = root.max_param() {
            if i >= params.len() {
                return Err(ParseError::UnknownIdentifier {
                    name: format!("#{i}"),
                    position: 0,
                });
            }
        }
        Ok(WarpExpr { root, params })
    }

    /// Parses `text` with the given parameter identifiers.
    pub fn parse<S: AsRef<str>>(text: &str, params: &[S]) -> Result<WarpExpr, ParseError> {
        let names: Vec<String> = params.iter().map(|s| s.as_ref().to_string()).collect();
        parse::parse(text, names)
    }

    /// Convenience constant expression with no parameters.
    pub fn constant(c: f64) -> WarpExpr {
        WarpExpr {
            root: Node::Const(c),
            params: Vec::new(),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    /// Fully parenthesized infix form. Re-parsing it yields the same tree.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        self.root.write(&self.params, &mut out);
        out
    }

    /// Exact derivative with respect to `t`.
    pub fn differentiate(&self) -> WarpExpr {
        WarpExpr {
            root: diff::derivative(&self.root),
            params: self.params.clone(),
        }
    }

    /// Product of two expressions over the union of their parameters.
    pub fn product(&self, other: &WarpExpr) -> WarpExpr {
        let mut params = self.params.clone();
        let remap: Vec<usize> = other
            .params
            .iter()
            .map(|p| match params.iter().position(|q| q == p) {
                Some(i) => i,
                None => {
                    params.push(p.clone());
                    params.len() - 1
                }
            })
            .collect();
        let rhs = reindex(&other.root, &remap);
        WarpExpr {
            root: Node::Binary(BinOp::Mul, Box::new(self.root.clone()), Box::new(rhs)),
            params,
        }
    }

    pub fn depends_on_t(&self) -> bool {
        self.root.depends_on_t()
    }
}

fn reindex(node: &Node, map: &[usize]) -> Node {
    match node {
        Node::Param(i) => Node::Param(map[*i]),
        Node::Const(_) | Node::Var => node.clone(),
        Node::Neg(a) => Node::Neg(Box::new(reindex(a, map))),
        Node::Call(f, a) => Node::Call(*f, Box::new(reindex(a, map))),
        Node::Binary(op, a, b) => {
            Node::Binary(*op, Box::new(reindex(a, map)), Box::new(reindex(b, map)))
        }
    }
}

impl fmt::Display for WarpExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}
