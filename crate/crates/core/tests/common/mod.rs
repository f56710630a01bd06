#![allow(dead_code)]

use cfwp_core::exprfn::{BinOp, Func, Node, WarpExpr};
use cfwp_core::geometry::{preset, CfwpGeometry, GeometrySpec, PresetName, Window};
use cfwp_core::ParamBinding;
use rand::Rng;

pub const PARAMS: [&str; 2] = ["a", "b"];

fn constant<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..4) {
        0 => rng.gen_range(1..10) as f64,
        1 => rng.gen_range(-4.0..4.0),
        2 => 0.25 * rng.gen_range(1..16) as f64,
        _ => rng.gen_range(1e-3..1e3),
    }
}

/// Random expression tree over `t`, `a`, `b` with at most `depth` levels.
pub fn random_node<R: Rng>(rng: &mut R, depth: u32) -> Node {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..4) {
            0 | 1 => Node::Var,
            2 => Node::Param(rng.gen_range(0..PARAMS.len())),
            _ => Node::Const(constant(rng)),
        };
    }
    match rng.gen_range(0..9) {
        // The parser folds a negated literal into the literal itself.
        0 => match random_node(rng, depth - 1) {
            Node::Const(c) => Node::Const(-c),
            inner => Node::Neg(Box::new(inner)),
        },
        1..=5 => {
            let op =
                [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow][rng.gen_range(0..5)];
            Node::Binary(
                op,
                Box::new(random_node(rng, depth - 1)),
                Box::new(random_node(rng, depth - 1)),
            )
        }
        _ => {
            let f = [Func::Sqrt, Func::Exp, Func::Log][rng.gen_range(0..3)];
            Node::Call(f, Box::new(random_node(rng, depth - 1)))
        }
    }
}

pub fn random_expr<R: Rng>(rng: &mut R, depth: u32) -> WarpExpr {
    let params = PARAMS.iter().map(|s| s.to_string()).collect();
    WarpExpr::from_node(random_node(rng, depth), params).expect("parameters are in range")
}

pub fn bindings() -> ParamBinding {
    ParamBinding::new().with("a", 1.3).with("b", 0.7)
}

/// Fourth-order central difference with step `1e-5 max(1, t)`.
pub fn central_difference(f: impl Fn(f64) -> f64, t: f64) -> f64 {
    let h = 1e-5 * t.max(1.0);
    (8.0 * (f(t + h) - f(t - h)) - (f(t + 2.0 * h) - f(t - 2.0 * h))) / (12.0 * h)
}

pub fn euclidean(m: u32) -> CfwpGeometry {
    preset(
        PresetName::Euclidean,
        &ParamBinding::new(),
        m,
        Window::default(),
    )
    .unwrap()
}

pub fn iwai_katayama(a: f64, b: f64, c: f64, d: f64) -> CfwpGeometry {
    let p = ParamBinding::new()
        .with("a", a)
        .with("b", b)
        .with("c", c)
        .with("d", d);
    preset(PresetName::IwaiKatayama, &p, 1, Window::default()).unwrap()
}

pub fn warped(m: u32, alpha: &str, beta: &str) -> CfwpGeometry {
    GeometrySpec {
        m: Some(m),
        alpha: Some(alpha.into()),
        beta: Some(beta.into()),
        ..Default::default()
    }
    .build(Window::default())
    .unwrap()
}

pub fn sweep_lambdas() -> Vec<f64> {
    let base = [
        0.25,
        0.5f64.powf(1.5),
        0.5,
        1.0,
        std::f64::consts::SQRT_2,
        2.0,
        5.0,
    ];
    let mut out = vec![0.0];
    for v in base {
        out.push(v);
        out.push(-v);
    }
    out
}
