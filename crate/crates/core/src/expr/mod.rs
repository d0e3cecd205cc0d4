//! Scalar formulas over named variables.
//!
//! An [`Expression`] is parsed once against a declared variable list and is
//! immutable afterwards. Variables are resolved to slots at parse time, so
//! evaluation takes a slice aligned with [`Expression::vars`]. Derivatives come
//! from forward-mode AD ([`Expression::eval_dual`]) or from
//! [`Expression::symbolic_diff`]; there is no finite-difference path.

mod diff;
mod dual;
mod parse;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

pub use dual::{DualValue, Scalar};
pub use parse::parse;

use crate::error::ExprError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl UnaryOp {
    fn function_name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Ln => Some("ln"),
            UnaryOp::Sqrt => Some("sqrt"),
        }
    }

    pub(crate) fn from_function_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "exp" => UnaryOp::Exp,
            "ln" => UnaryOp::Ln,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => " + ",
            BinaryOp::Sub => " - ",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Var(usize),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
}

/// What went wrong when a formula was evaluated outside its domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    LogOfNonPositive,
    SqrtOfNegative,
    DivisionByZero,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::LogOfNonPositive => "ln of non-positive value",
            DomainKind::SqrtOfNegative => "sqrt of negative value",
            DomainKind::DivisionByZero => "division by zero",
        })
    }
}

/// A parsed scalar formula.
#[derive(Clone, Debug)]
pub struct Expression {
    root: Node,
    vars: Arc<[String]>,
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root && self.vars == other.vars
    }
}

impl Expression {
    pub(crate) fn from_node(root: Node, vars: Arc<[String]>) -> Self {
        Self { root, vars }
    }

    /// A constant formula over `vars`.
    pub fn constant(vars: Arc<[String]>, value: f64) -> Self {
        Self::from_node(Node::Const(value), vars)
    }

    /// Declared variables; evaluation slices are aligned with this list.
    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn shared_vars(&self) -> Arc<[String]> {
        Arc::clone(&self.vars)
    }

    pub fn slot(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Whether the variable in `slot` occurs anywhere in the tree.
    pub fn uses_slot(&self, slot: usize) -> bool {
        fn walk(n: &Node, slot: usize) -> bool {
            match n {
                Node::Const(_) => false,
                Node::Var(i) => *i == slot,
                Node::Unary(_, a) | Node::Pow(a, _) => walk(a, slot),
                Node::Binary(_, a, b) => walk(a, slot) || walk(b, slot),
            }
        }
        walk(&self.root, slot)
    }

    pub fn uses_var(&self, name: &str) -> bool {
        self.slot(name).is_some_and(|s| self.uses_slot(s))
    }

    /// Number of variable leaves in the tree (with multiplicity).
    pub fn variable_leaf_count(&self) -> usize {
        fn walk(n: &Node) -> usize {
            match n {
                Node::Const(_) => 0,
                Node::Var(_) => 1,
                Node::Unary(_, a) | Node::Pow(a, _) => walk(a),
                Node::Binary(_, a, b) => walk(a) + walk(b),
            }
        }
        walk(&self.root)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.root, Node::Const(c) if c == 0.0)
    }

    /// Evaluate with `values[i]` bound to `vars()[i]`.
    pub fn eval(&self, values: &[f64]) -> Result<f64, ExprError> {
        self.eval_generic(values)
    }

    /// Evaluate against a name→value environment.
    pub fn eval_named(&self, env: &HashMap<String, f64>) -> Result<f64, ExprError> {
        let values = self.bind(env)?;
        self.eval(&values)
    }

    /// Value and directional derivative along `seed` (both aligned with `vars()`).
    pub fn eval_dual(&self, values: &[f64], seed: &[f64]) -> Result<DualValue, ExprError> {
        let duals: Vec<DualValue> = values.iter().zip(seed).map(|(&v, &d)| DualValue::new(v, d)).collect();
        self.eval_generic(&duals)
    }

    pub fn eval_dual_named(
        &self,
        env: &HashMap<String, f64>,
        seed: &HashMap<String, f64>,
    ) -> Result<DualValue, ExprError> {
        let values = self.bind(env)?;
        let dirs: Vec<f64> = self.vars.iter().map(|n| seed.get(n).copied().unwrap_or(0.0)).collect();
        self.eval_dual(&values, &dirs)
    }

    fn bind(&self, env: &HashMap<String, f64>) -> Result<Vec<f64>, ExprError> {
        let mut values = vec![0.0; self.vars.len()];
        for (slot, name) in self.vars.iter().enumerate() {
            match env.get(name) {
                Some(&v) => values[slot] = v,
                None if self.uses_slot(slot) => return Err(ExprError::UnboundVariable { name: name.clone() }),
                None => {}
            }
        }
        Ok(values)
    }

    pub fn eval_generic<S: Scalar>(&self, values: &[S]) -> Result<S, ExprError> {
        eval_node(&self.root, values).map_err(|(kind, node)| ExprError::Domain {
            kind,
            subexpr: self.display_node(node),
        })
    }

    /// ∂self/∂var as a new expression over the same variables.
    pub fn symbolic_diff(&self, var: &str) -> Expression {
        match self.slot(var) {
            Some(slot) => self.symbolic_diff_slot(slot),
            None => Expression::constant(self.shared_vars(), 0.0),
        }
    }

    pub fn symbolic_diff_slot(&self, slot: usize) -> Expression {
        Expression::from_node(diff::derivative(&self.root, slot), self.shared_vars())
    }

    fn display_node(&self, node: &Node) -> String {
        NodeDisplay { node, vars: &self.vars }.to_string()
    }

    fn same_vars(&self, other: &Expression) {
        assert!(
            Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars,
            "expressions over different variable lists"
        );
    }

    pub fn add(&self, other: &Expression) -> Expression {
        self.same_vars(other);
        Expression::from_node(diff::add(self.root.clone(), other.root.clone()), self.shared_vars())
    }

    pub fn mul(&self, other: &Expression) -> Expression {
        self.same_vars(other);
        Expression::from_node(diff::mul(self.root.clone(), other.root.clone()), self.shared_vars())
    }

    pub fn sub(&self, other: &Expression) -> Expression {
        self.same_vars(other);
        Expression::from_node(diff::sub(self.root.clone(), other.root.clone()), self.shared_vars())
    }

    pub fn neg(&self) -> Expression {
        Expression::from_node(diff::neg(self.root.clone()), self.shared_vars())
    }
}

type NodeResult<'a, S> = Result<S, (DomainKind, &'a Node)>;

fn eval_node<'a, S: Scalar>(node: &'a Node, values: &[S]) -> NodeResult<'a, S> {
    Ok(match node {
        Node::Const(c) => S::constant(*c),
        Node::Var(i) => values[*i],
        Node::Unary(op, a) => {
            let v = eval_node(a, values)?;
            match op {
                UnaryOp::Neg => -v,
                UnaryOp::Sin => v.sin(),
                UnaryOp::Cos => v.cos(),
                UnaryOp::Exp => v.exp(),
                UnaryOp::Ln => {
                    if v.value() <= 0.0 {
                        return Err((DomainKind::LogOfNonPositive, node));
                    }
                    v.ln()
                }
                UnaryOp::Sqrt => {
                    if v.value() < 0.0 {
                        return Err((DomainKind::SqrtOfNegative, node));
                    }
                    v.sqrt()
                }
            }
        }
        Node::Binary(op, a, b) => {
            let l = eval_node(a, values)?;
            let r = eval_node(b, values)?;
            match op {
                BinaryOp::Add => l + r,
                BinaryOp::Sub => l - r,
                BinaryOp::Mul => l * r,
                BinaryOp::Div => {
                    if r.value() == 0.0 {
                        return Err((DomainKind::DivisionByZero, node));
                    }
                    l / r
                }
            }
        }
        Node::Pow(a, n) => {
            let v = eval_node(a, values)?;
            if *n < 0 && v.value() == 0.0 {
                return Err((DomainKind::DivisionByZero, node));
            }
            v.powi(*n)
        }
    })
}

// Precedence levels used by the printer: larger binds tighter.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_ATOM: u8 = 5;

fn precedence(n: &Node) -> u8 {
    match n {
        Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => PREC_NEG,
        Node::Const(_) | Node::Var(_) => PREC_ATOM,
        Node::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Node::Unary(..) => PREC_ATOM,
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => PREC_ADD,
        Node::Binary(..) => PREC_MUL,
        Node::Pow(..) => 4,
    }
}

struct NodeDisplay<'a> {
    node: &'a Node,
    vars: &'a [String],
}

impl NodeDisplay<'_> {
    fn child(&self, f: &mut fmt::Formatter<'_>, node: &Node, min_prec: u8) -> fmt::Result {
        let inner = NodeDisplay { node, vars: self.vars };
        if precedence(node) < min_prec {
            write!(f, "({inner})")
        } else {
            write!(f, "{inner}")
        }
    }
}

impl fmt::Display for NodeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(i) => f.write_str(&self.vars[*i]),
            Node::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                self.child(f, a, PREC_NEG)
            }
            Node::Unary(op, a) => {
                let name = op.function_name().unwrap_or_default();
                write!(f, "{name}(")?;
                self.child(f, a, 0)?;
                f.write_str(")")
            }
            Node::Binary(op, a, b) => {
                let (left, right) = match op {
                    BinaryOp::Add => (PREC_ADD, PREC_ADD),
                    BinaryOp::Sub => (PREC_ADD, PREC_ADD + 1),
                    BinaryOp::Mul => (PREC_MUL, PREC_MUL),
                    BinaryOp::Div => (PREC_MUL, PREC_MUL + 1),
                };
                self.child(f, a, left)?;
                f.write_str(op.symbol())?;
                self.child(f, b, right)
            }
            Node::Pow(a, n) => {
                self.child(f, a, PREC_ATOM)?;
                write!(f, "^{n}")
            }
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        NodeDisplay {
            node: &self.root,
            vars: &self.vars,
        }
        .fmt(f)
    }
}

/// Shared variable list `[t, x1..xk, y1..ys]` used by every formula of a system.
pub fn system_vars(k: usize, s: usize) -> Arc<[String]> {
    std::iter::once("t".to_string())
        .chain((1..=k).map(|i| format!("x{i}")))
        .chain((1..=s).map(|j| format!("y{j}")))
        .collect()
}

pub fn var_list<I, S>(names: I) -> Arc<[String]>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    names.into_iter().map(Into::into).collect()
}
