use super::{BinOp, Func, Node};

/// d/dt of `node`. Total on the grammar; only constant folding is applied.
pub(super) fn derivative(node: &Node) -> Node {
    match node {
        Node::Const(_) | Node::Param(_) => Node::Const(0.0),
        Node::Var => Node::Const(1.0),
        Node::Neg(a) => Node::neg(derivative(a)),
        Node::Binary(op, a, b) => {
            let (u, v) = (a.as_ref(), b.as_ref());
            match op {
                BinOp::Add => Node::add(derivative(u), derivative(v)),
                BinOp::Sub => Node::sub(derivative(u), derivative(v)),
                BinOp::Mul => Node::add(
                    Node::mul(derivative(u), v.clone()),
                    Node::mul(u.clone(), derivative(v)),
                ),
                BinOp::Div => {
                    if !v.depends_on_t() {
                        return Node::div(derivative(u), v.clone());
                    }
                    // (u'v - uv') / v^2
                    Node::div(
                        Node::sub(
                            Node::mul(derivative(u), v.clone()),
                            Node::mul(u.clone(), derivative(v)),
                        ),
                        Node::pow(v.clone(), Node::Const(2.0)),
                    )
                }
                BinOp::Pow => pow_rule(u, v),
            }
        }
        Node::Call(f, a) => {
            let inner = derivative(a);
            let outer = match f {
                // 1 / (2 sqrt(u))
                Func::Sqrt => {
                    Node::div(Node::Const(1.0), Node::mul(Node::Const(2.0), node.clone()))
                }
                Func::Exp => node.clone(),
                Func::Log => Node::div(Node::Const(1.0), a.as_ref().clone()),
            };
            Node::mul(outer, inner)
        }
    }
}

fn pow_rule(u: &Node, v: &Node) -> Node {
    let u_var = u.depends_on_t();
    let v_var = v.depends_on_t();
    match (u_var, v_var) {
        (false, false) => Node::Const(0.0),
        // v * u^(v-1) * u'
        (true, false) => Node::mul(
            Node::mul(
                v.clone(),
                Node::pow(u.clone(), Node::sub(v.clone(), Node::Const(1.0))),
            ),
            derivative(u),
        ),
        // u^v * log(u) * v'
        (false, true) => Node::mul(
            Node::mul(
                Node::pow(u.clone(), v.clone()),
                Node::call(Func::Log, u.clone()),
            ),
            derivative(v),
        ),
        // u^v * (v' log(u) + v u'/u)
        (true, true) => Node::mul(
            Node::pow(u.clone(), v.clone()),
            Node::add(
                Node::mul(derivative(v), Node::call(Func::Log, u.clone())),
                Node::div(Node::mul(v.clone(), derivative(u)), u.clone()),
            ),
        ),
    }
}
