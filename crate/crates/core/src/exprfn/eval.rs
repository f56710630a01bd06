use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{BinOp, Func, Node, WarpExpr};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    SqrtOfNegative,
    LogOfNonPositive,
    DivisionByZero,
    PowerUndefined,
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error ({kind:?}) in `{subexpr}` at t = {t}")]
    Domain {
        kind: DomainKind,
        subexpr: String,
        t: f64,
    },
    #[error("evaluation point t = {0} is not a positive finite number")]
    InvalidPoint(f64),
    #[error("parameter `{0}` is not bound")]
    Unbound(String),
    #[error("parameter `{name}` bound to non-finite value {value}")]
    NonFiniteParam { name: String, value: f64 },
}

/// Parameter values keyed by identifier.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamBinding(pub BTreeMap<String, f64>);

impl ParamBinding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn names(&self) -> Vec<String> {
        self.0.keys().cloned().collect()
    }

    /// Binds every parameter of `expr`; extra entries are ignored.
    pub fn bind(&self, expr: &WarpExpr) -> Result<BoundExpr, EvalError> {
        let values = expr
            .params()
            .iter()
            .map(|name| match self.0.get(name) {
                None => Err(EvalError::Unbound(name.clone())),
                Some(v) if !v.is_finite() => Err(EvalError::NonFiniteParam {
                    name: name.clone(),
                    value: *v,
                }),
                Some(v) => Ok(*v),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BoundExpr {
            expr: Arc::new(expr.clone()),
            values: values.into(),
        })
    }
}

/// An expression with all parameters fixed. Cheap to clone.
#[derive(Debug, Clone)]
pub struct BoundExpr {
    expr: Arc<WarpExpr>,
    values: Arc<[f64]>,
}

impl BoundExpr {
    pub fn expr(&self) -> &WarpExpr {
        &self.expr
    }

    pub fn eval(&self, t: f64) -> Result<f64, EvalError> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(EvalError::InvalidPoint(t));
        }
        self.eval_unchecked(t)
    }

    /// Evaluates without the positivity precondition on `t`.
    pub fn eval_unchecked(&self, t: f64) -> Result<f64, EvalError> {
        eval_node(self.expr.root(), t, &self.values).map_err(|(kind, node)| EvalError::Domain {
            kind,
            subexpr: WarpExpr::from_node(node.clone(), self.expr.params().to_vec())
                .map(|e| e.canonical())
                .unwrap_or_default(),
            t,
        })
    }

    pub fn derivative(&self) -> BoundExpr {
        BoundExpr {
            expr: Arc::new(self.expr.differentiate()),
            values: self.values.clone(),
        }
    }

    pub fn canonical(&self) -> String {
        self.expr.canonical()
    }
}

fn eval_node<'a>(node: &'a Node, t: f64, p: &[f64]) -> Result<f64, (DomainKind, &'a Node)> {
    let v = match node {
        Node::Const(c) => *c,
        Node::Var => t,
        Node::Param(i) => p[*i],
        Node::Neg(a) => -eval_node(a, t, p)?,
        Node::Binary(op, a, b) => {
            let x = eval_node(a, t, p)?;
            let y = eval_node(b, t, p)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err((DomainKind::DivisionByZero, node));
                    }
                    x / y
                }
                BinOp::Pow => {
                    let r = pow(x, y);
                    if r.is_nan() {
                        return Err((DomainKind::PowerUndefined, node));
                    }
                    if x == 0.0 && y < 0.0 {
                        return Err((DomainKind::DivisionByZero, node));
                    }
                    r
                }
            }
        }
        Node::Call(f, a) => {
            let x = eval_node(a, t, p)?;
            match f {
                Func::Sqrt => {
                    if x < 0.0 {
                        return Err((DomainKind::SqrtOfNegative, node));
                    }
                    x.sqrt()
                }
                Func::Exp => x.exp(),
                Func::Log => {
                    if x <= 0.0 {
                        return Err((DomainKind::LogOfNonPositive, node));
                    }
                    x.ln()
                }
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err((DomainKind::NonFinite, node))
    }
}

#[inline]
fn pow(x: f64, y: f64) -> f64 {
    if y == 2.0 {
        x * x
    } else if y.fract() == 0.0 && y.abs() <= 64.0 {
        x.powi(y as i32)
    } else {
        x.powf(y)
    }
}
