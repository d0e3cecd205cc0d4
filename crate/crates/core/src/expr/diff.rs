//! Symbolic differentiation with literal 0/1 folding.

use super::{BinaryOp, Node, UnaryOp};

fn constant(n: &Node) -> Option<f64> {
    match n {
        Node::Const(c) => Some(*c),
        _ => None,
    }
}

pub(crate) fn add(a: Node, b: Node) -> Node {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Node::Const(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Node::Binary(BinaryOp::Add, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn sub(a: Node, b: Node) -> Node {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Node::Const(x - y),
        (Some(0.0), _) => neg(b),
        (_, Some(0.0)) => a,
        _ => Node::Binary(BinaryOp::Sub, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn mul(a: Node, b: Node) -> Node {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) => Node::Const(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => Node::Const(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        (Some(-1.0), _) => neg(b),
        (_, Some(-1.0)) => neg(a),
        _ => Node::Binary(BinaryOp::Mul, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn div(a: Node, b: Node) -> Node {
    match (constant(&a), constant(&b)) {
        (Some(0.0), _) => Node::Const(0.0),
        (_, Some(1.0)) => a,
        _ => Node::Binary(BinaryOp::Div, Box::new(a), Box::new(b)),
    }
}

pub(crate) fn neg(a: Node) -> Node {
    match a {
        Node::Const(c) => Node::Const(-c),
        Node::Unary(UnaryOp::Neg, inner) => *inner,
        other => Node::Unary(UnaryOp::Neg, Box::new(other)),
    }
}

fn pow(a: Node, n: i32) -> Node {
    match n {
        0 => Node::Const(1.0),
        1 => a,
        _ => Node::Pow(Box::new(a), n),
    }
}

fn unary(op: UnaryOp, a: Node) -> Node {
    Node::Unary(op, Box::new(a))
}

/// ∂node/∂(variable in `slot`).
pub(crate) fn derivative(node: &Node, slot: usize) -> Node {
    match node {
        Node::Const(_) => Node::Const(0.0),
        Node::Var(i) => Node::Const(if *i == slot { 1.0 } else { 0.0 }),
        Node::Unary(op, a) => {
            let da = derivative(a, slot);
            if constant(&da) == Some(0.0) {
                return Node::Const(0.0);
            }
            let a = (**a).clone();
            match op {
                UnaryOp::Neg => neg(da),
                UnaryOp::Sin => mul(unary(UnaryOp::Cos, a), da),
                UnaryOp::Cos => neg(mul(unary(UnaryOp::Sin, a), da)),
                UnaryOp::Exp => mul(unary(UnaryOp::Exp, a), da),
                UnaryOp::Ln => div(da, a),
                UnaryOp::Sqrt => div(da, mul(Node::Const(2.0), unary(UnaryOp::Sqrt, a))),
            }
        }
        Node::Binary(op, a, b) => {
            let da = derivative(a, slot);
            let db = derivative(b, slot);
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                BinaryOp::Add => add(da, db),
                BinaryOp::Sub => sub(da, db),
                BinaryOp::Mul => add(mul(da, b), mul(a, db)),
                BinaryOp::Div => {
                    if constant(&db) == Some(0.0) {
                        div(da, b)
                    } else {
                        div(sub(mul(da, b.clone()), mul(a, db)), pow(b, 2))
                    }
                }
            }
        }
        Node::Pow(a, n) => {
            let da = derivative(a, slot);
            if *n == 0 || constant(&da) == Some(0.0) {
                return Node::Const(0.0);
            }
            mul(mul(Node::Const(f64::from(*n)), pow((**a).clone(), n - 1)), da)
        }
    }
}
