use std::collections::BTreeMap;

use super::{Tensor, TensorError};

/// Index of a node inside an [`ExprGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub(crate) usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Gradients keyed by parameter (or tracked input) name.
pub type GradientMap = BTreeMap<String, Tensor>;

/// Primitive operations. Elementwise binary operations broadcast only over a
/// leading batch dimension: operand shapes must be equal, or one operand's
/// shape must equal the other's with its first axis removed.
#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Input { name: String },
    Param { name: String },
    Const,
    Add,
    Sub,
    Mul,
    /// 2-D matrix product `op(a) · op(b)` with optional transposes.
    MatMul { ta: bool, tb: bool },
    Neg,
    Scale(f64),
    AddScalar(f64),
    Square,
    Sqrt,
    Recip,
    /// Natural log of `max(x, floor)`.
    Log { floor: f64 },
    Tanh,
    Sigmoid,
    Relu,
    LeakyRelu(f64),
    /// Row-wise softmax over the last axis of a 2-D tensor.
    Softmax,
    Clip { lo: f64, hi: f64 },
    /// `1` where `x > 0`, else `0`. Carries no gradient.
    StepPositive,
    /// `1` where `x > 0`, else the slope. Carries no gradient.
    LeakySlope(f64),
    /// `1` where `lo <= x <= hi`, else `0`. Carries no gradient.
    InRange { lo: f64, hi: f64 },
    /// Sum of all elements to a scalar.
    Sum,
    Mean,
    /// Sum over the leading axis.
    SumBatch,
    /// Repeat along a new leading axis of the given extent.
    BroadcastBatch(usize),
    /// `(rows, k) -> (rows, 1)`.
    SumCols,
    /// `(rows, 1) -> (rows, k)`.
    ExpandCols(usize),
    /// Single-element tensor repeated to a shape.
    Expand(Vec<usize>),
    Reshape(Vec<usize>),
    SliceCols { start: usize, end: usize },
    /// Zero-pad columns: output has `width` columns with input placed at `start`.
    PadCols { width: usize, start: usize },
    ConcatCols,
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Input { .. } => "input",
            Op::Param { .. } => "param",
            Op::Const => "const",
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::MatMul { .. } => "matmul",
            Op::Neg => "neg",
            Op::Scale(_) => "scale",
            Op::AddScalar(_) => "add_scalar",
            Op::Square => "square",
            Op::Sqrt => "sqrt",
            Op::Recip => "recip",
            Op::Log { .. } => "log",
            Op::Tanh => "tanh",
            Op::Sigmoid => "sigmoid",
            Op::Relu => "relu",
            Op::LeakyRelu(_) => "leaky_relu",
            Op::Softmax => "softmax",
            Op::Clip { .. } => "clip",
            Op::StepPositive => "step_positive",
            Op::LeakySlope(_) => "leaky_slope",
            Op::InRange { .. } => "in_range",
            Op::Sum => "sum",
            Op::Mean => "mean",
            Op::SumBatch => "sum_batch",
            Op::BroadcastBatch(_) => "broadcast_batch",
            Op::SumCols => "sum_cols",
            Op::ExpandCols(_) => "expand_cols",
            Op::Expand(_) => "expand",
            Op::Reshape(_) => "reshape",
            Op::SliceCols { .. } => "slice_cols",
            Op::PadCols { .. } => "pad_cols",
            Op::ConcatCols => "concat_cols",
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Op::Input { .. } | Op::Param { .. } | Op::Const)
    }

    /// Masks are piecewise constant and contribute no gradient.
    pub(crate) fn is_mask(&self) -> bool {
        matches!(
            self,
            Op::StepPositive | Op::LeakySlope(_) | Op::InRange { .. }
        )
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub(crate) op: Op,
    pub(crate) args: Vec<NodeId>,
    pub(crate) value: Option<Tensor>,
    pub(crate) tracked: bool,
}

/// Topologically ordered expression graph with cached forward values.
///
/// Nodes are evaluated eagerly as they are added whenever all operands
/// already hold values. Graphs built over unbound inputs act as templates
/// and are filled in by [`ExprGraph::evaluate`].
#[derive(Debug, Clone, Default)]
pub struct ExprGraph {
    pub(crate) nodes: Vec<Node>,
    outputs: Vec<NodeId>,
}

type OpResult<T> = Result<T, TensorError>;

impl ExprGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn op(&self, id: NodeId) -> &Op {
        &self.nodes[id.0].op
    }

    pub fn args(&self, id: NodeId) -> &[NodeId] {
        &self.nodes[id.0].args
    }

    pub fn outputs(&self) -> &[NodeId] {
        &self.outputs
    }

    pub fn set_outputs(&mut self, outputs: Vec<NodeId>) {
        self.outputs = outputs;
    }

    pub fn value(&self, id: NodeId) -> OpResult<&Tensor> {
        self.nodes
            .get(id.0)
            .ok_or(TensorError::BadNode(id.0))?
            .value
            .as_ref()
            .ok_or(TensorError::NotEvaluated(id.0))
    }

    /// Removes every node added after the first `len` nodes.
    pub fn truncate(&mut self, len: usize) {
        self.nodes.truncate(len);
        self.outputs.retain(|o| o.0 < len);
    }

    // ── leaves ──────────────────────────────────────────────────────────

    /// Named input leaf. Tracked for gradients when the tensor has
    /// `requires_grad` set.
    pub fn input(&mut self, name: &str, value: Tensor) -> NodeId {
        let tracked = value.requires_grad();
        self.push_leaf(
            Op::Input {
                name: name.to_string(),
            },
            Some(value),
            tracked,
        )
    }

    /// Named input leaf without a value; bind it through `evaluate`.
    pub fn placeholder(&mut self, name: &str, requires_grad: bool) -> NodeId {
        self.push_leaf(
            Op::Input {
                name: name.to_string(),
            },
            None,
            requires_grad,
        )
    }

    /// Named trainable parameter; always tracked.
    pub fn param(&mut self, name: &str, value: Tensor) -> NodeId {
        self.push_leaf(
            Op::Param {
                name: name.to_string(),
            },
            Some(value),
            true,
        )
    }

    pub fn constant(&mut self, value: Tensor) -> NodeId {
        self.push_leaf(Op::Const, Some(value), false)
    }

    fn push_leaf(&mut self, op: Op, value: Option<Tensor>, tracked: bool) -> NodeId {
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            op,
            args: Vec::new(),
            value,
            tracked,
        });
        id
    }

    /// Appends an operation node, evaluating it immediately when possible.
    pub fn push(&mut self, op: Op, args: Vec<NodeId>) -> OpResult<NodeId> {
        if let Some(bad) = args.iter().find(|a| a.0 >= self.nodes.len()) {
            return Err(TensorError::BadNode(bad.0));
        }
        let idx = self.nodes.len();
        let value = if args.iter().all(|a| self.nodes[a.0].value.is_some()) {
            let operands: Vec<&Tensor> = args
                .iter()
                .map(|a| self.nodes[a.0].value.as_ref().expect("checked"))
                .collect();
            Some(compute(idx, &op, &operands)?)
        } else {
            None
        };
        self.nodes.push(Node {
            op,
            args,
            value,
            tracked: false,
        });
        Ok(NodeId(idx))
    }

    /// Rebinds named inputs (and, by name, parameters) and recomputes every
    /// node in order. Returns the value of the first declared output, or the
    /// last node when no outputs were declared.
    pub fn evaluate(&mut self, bindings: &[(&str, Tensor)]) -> OpResult<Tensor> {
        for (name, value) in bindings {
            let mut found = false;
            for node in &mut self.nodes {
                match &node.op {
                    Op::Input { name: n } | Op::Param { name: n } if n == name => {
                        node.value = Some(value.clone());
                        found = true;
                    }
                    _ => {}
                }
            }
            if !found {
                return Err(TensorError::Unbound((*name).to_string()));
            }
        }
        for idx in 0..self.nodes.len() {
            if self.nodes[idx].op.is_leaf() {
                if self.nodes[idx].value.is_none() {
                    let name = match &self.nodes[idx].op {
                        Op::Input { name } | Op::Param { name } => name.clone(),
                        _ => format!("#{idx}"),
                    };
                    return Err(TensorError::Unbound(name));
                }
                continue;
            }
            let value = {
                let node = &self.nodes[idx];
                let operands: Vec<&Tensor> = node
                    .args
                    .iter()
                    .map(|a| self.nodes[a.0].value.as_ref().expect("topological order"))
                    .collect();
                compute(idx, &node.op, &operands)?
            };
            self.nodes[idx].value = Some(value);
        }
        let out = self
            .outputs
            .first()
            .copied()
            .unwrap_or(NodeId(self.nodes.len().saturating_sub(1)));
        self.value(out).cloned()
    }

    // ── builders ────────────────────────────────────────────────────────

    pub fn add(&mut self, a: NodeId, b: NodeId) -> OpResult<NodeId> {
        self.push(Op::Add, vec![a, b])
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> OpResult<NodeId> {
        self.push(Op::Sub, vec![a, b])
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> OpResult<NodeId> {
        self.push(Op::Mul, vec![a, b])
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> OpResult<NodeId> {
        self.push(Op::MatMul { ta: false, tb: false }, vec![a, b])
    }

    pub fn neg(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::Neg, vec![a])
    }

    pub fn scale(&mut self, a: NodeId, c: f64) -> OpResult<NodeId> {
        self.push(Op::Scale(c), vec![a])
    }

    pub fn add_scalar(&mut self, a: NodeId, c: f64) -> OpResult<NodeId> {
        self.push(Op::AddScalar(c), vec![a])
    }

    pub fn square(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::Square, vec![a])
    }

    pub fn sqrt(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::Sqrt, vec![a])
    }

    pub fn recip(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::Recip, vec![a])
    }

    /// Guarded natural log, `ln(max(x, 1e-7))`.
    pub fn log(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::Log { floor: LOG_FLOOR }, vec![a])
    }

    pub fn tanh(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::Tanh, vec![a])
    }

    pub fn sigmoid(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::Sigmoid, vec![a])
    }

    pub fn relu(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::Relu, vec![a])
    }

    pub fn leaky_relu(&mut self, a: NodeId, slope: f64) -> OpResult<NodeId> {
        self.push(Op::LeakyRelu(slope), vec![a])
    }

    pub fn softmax(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::Softmax, vec![a])
    }

    pub fn clip(&mut self, a: NodeId, lo: f64, hi: f64) -> OpResult<NodeId> {
        self.push(Op::Clip { lo, hi }, vec![a])
    }

    pub fn sum(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::Sum, vec![a])
    }

    pub fn mean(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::Mean, vec![a])
    }

    pub fn sum_cols(&mut self, a: NodeId) -> OpResult<NodeId> {
        self.push(Op::SumCols, vec![a])
    }

    pub fn slice_cols(&mut self, a: NodeId, start: usize, end: usize) -> OpResult<NodeId> {
        self.push(Op::SliceCols { start, end }, vec![a])
    }

    pub fn concat_cols(&mut self, parts: &[NodeId]) -> OpResult<NodeId> {
        self.push(Op::ConcatCols, parts.to_vec())
    }
}

/// Lower bound applied to the argument of `log`.
pub const LOG_FLOOR: f64 = 1e-7;

fn mismatch(node: usize, op: &Op, detail: String) -> TensorError {
    TensorError::ShapeMismatch {
        node,
        op: op.name(),
        detail,
    }
}

fn map(t: &Tensor, f: impl Fn(f64) -> f64) -> Tensor {
    Tensor::from_parts(t.shape().to_vec(), t.data().iter().map(|&v| f(v)).collect())
}

fn broadcast_binary(
    node: usize,
    op: &Op,
    a: &Tensor,
    b: &Tensor,
    f: impl Fn(f64, f64) -> f64,
) -> OpResult<Tensor> {
    if a.shape() == b.shape() {
        let data = a.data().iter().zip(b.data()).map(|(&x, &y)| f(x, y)).collect();
        return Ok(Tensor::from_parts(a.shape().to_vec(), data));
    }
    if !a.shape().is_empty() && &a.shape()[1..] == b.shape() {
        let inner = b.numel();
        let data = a
            .data()
            .iter()
            .enumerate()
            .map(|(i, &x)| f(x, b.data()[i % inner]))
            .collect();
        return Ok(Tensor::from_parts(a.shape().to_vec(), data));
    }
    if !b.shape().is_empty() && &b.shape()[1..] == a.shape() {
        let inner = a.numel();
        let data = b
            .data()
            .iter()
            .enumerate()
            .map(|(i, &y)| f(a.data()[i % inner], y))
            .collect();
        return Ok(Tensor::from_parts(b.shape().to_vec(), data));
    }
    Err(mismatch(
        node,
        op,
        format!("{:?} vs {:?}", a.shape(), b.shape()),
    ))
}

fn require_2d(node: usize, op: &Op, t: &Tensor) -> OpResult<(usize, usize)> {
    if t.shape().len() != 2 {
        return Err(mismatch(node, op, format!("expected 2-D, got {:?}", t.shape())));
    }
    Ok((t.shape()[0], t.shape()[1]))
}

fn matmul(node: usize, op: &Op, a: &Tensor, b: &Tensor, ta: bool, tb: bool) -> OpResult<Tensor> {
    let (ar, ac) = require_2d(node, op, a)?;
    let (br, bc) = require_2d(node, op, b)?;
    let (m, k, rsa, csa) = if ta { (ac, ar, 1, ac) } else { (ar, ac, ac, 1) };
    let (k2, n, rsb, csb) = if tb { (bc, br, 1, bc) } else { (br, bc, bc, 1) };
    if k != k2 {
        return Err(mismatch(
            node,
            op,
            format!("inner dims {k} vs {k2} ({:?} x {:?})", a.shape(), b.shape()),
        ));
    }
    let mut out = vec![0.0; m * n];
    // SAFETY: strides describe in-bounds row-major views of `a`, `b` and `out`.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data().as_ptr(),
            rsa as isize,
            csa as isize,
            b.data().as_ptr(),
            rsb as isize,
            csb as isize,
            0.0,
            out.as_mut_ptr(),
            n as isize,
            1,
        );
    }
    Ok(Tensor::from_parts(vec![m, n], out))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub(crate) fn compute(node: usize, op: &Op, args: &[&Tensor]) -> OpResult<Tensor> {
    let out = match op {
        Op::Input { .. } | Op::Param { .. } | Op::Const => {
            unreachable!("leaves are never recomputed")
        }
        Op::Add => broadcast_binary(node, op, args[0], args[1], |x, y| x + y)?,
        Op::Sub => broadcast_binary(node, op, args[0], args[1], |x, y| x - y)?,
        Op::Mul => broadcast_binary(node, op, args[0], args[1], |x, y| x * y)?,
        Op::MatMul { ta, tb } => matmul(node, op, args[0], args[1], *ta, *tb)?,
        Op::Neg => map(args[0], |x| -x),
        Op::Scale(c) => map(args[0], |x| c * x),
        Op::AddScalar(c) => map(args[0], |x| x + c),
        Op::Square => map(args[0], |x| x * x),
        Op::Sqrt => map(args[0], f64::sqrt),
        Op::Recip => map(args[0], |x| 1.0 / x),
        Op::Log { floor } => map(args[0], |x| x.max(*floor).ln()),
        Op::Tanh => map(args[0], f64::tanh),
        Op::Sigmoid => map(args[0], sigmoid),
        Op::Relu => map(args[0], |x| if x > 0.0 { x } else { 0.0 }),
        Op::LeakyRelu(s) => map(args[0], |x| if x > 0.0 { x } else { s * x }),
        Op::Softmax => {
            let (r, c) = require_2d(node, op, args[0])?;
            let mut out = Vec::with_capacity(r * c);
            for i in 0..r {
                let row = args[0].row(i);
                let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = row.iter().map(|v| (v - m).exp()).collect();
                let s: f64 = e.iter().sum();
                out.extend(e.into_iter().map(|v| v / s));
            }
            Tensor::from_parts(vec![r, c], out)
        }
        Op::Clip { lo, hi } => map(args[0], |x| x.clamp(*lo, *hi)),
        Op::StepPositive => map(args[0], |x| if x > 0.0 { 1.0 } else { 0.0 }),
        Op::LeakySlope(s) => map(args[0], |x| if x > 0.0 { 1.0 } else { *s }),
        Op::InRange { lo, hi } => map(args[0], |x| {
            if x >= *lo && x <= *hi {
                1.0
            } else {
                0.0
            }
        }),
        Op::Sum => Tensor::scalar(args[0].data().iter().sum()),
        Op::Mean => Tensor::scalar(args[0].data().iter().sum::<f64>() / args[0].numel() as f64),
        Op::SumBatch => {
            let a = args[0];
            if a.shape().is_empty() {
                return Err(mismatch(node, op, "scalar has no batch axis".into()));
            }
            let inner_shape = a.shape()[1..].to_vec();
            let inner: usize = inner_shape.iter().product();
            let mut out = vec![0.0; inner];
            for chunk in a.data().chunks(inner) {
                for (o, v) in out.iter_mut().zip(chunk) {
                    *o += v;
                }
            }
            Tensor::from_parts(inner_shape, out)
        }
        Op::BroadcastBatch(n) => {
            let a = args[0];
            let mut shape = vec![*n];
            shape.extend_from_slice(a.shape());
            let mut out = Vec::with_capacity(n * a.numel());
            for _ in 0..*n {
                out.extend_from_slice(a.data());
            }
            Tensor::from_parts(shape, out)
        }
        Op::SumCols => {
            let (r, _) = require_2d(node, op, args[0])?;
            let out = (0..r).map(|i| args[0].row(i).iter().sum()).collect();
            Tensor::from_parts(vec![r, 1], out)
        }
        Op::ExpandCols(k) => {
            let (r, c) = require_2d(node, op, args[0])?;
            if c != 1 {
                return Err(mismatch(node, op, format!("expected (rows, 1), got {:?}", args[0].shape())));
            }
            let mut out = Vec::with_capacity(r * k);
            for &v in args[0].data() {
                out.extend(std::iter::repeat_n(v, *k));
            }
            Tensor::from_parts(vec![r, *k], out)
        }
        Op::Expand(shape) => {
            if args[0].numel() != 1 {
                return Err(mismatch(node, op, format!("expand needs one element, got {:?}", args[0].shape())));
            }
            Tensor::filled(shape, args[0].item())
        }
        Op::Reshape(shape) => {
            if shape.iter().product::<usize>() != args[0].numel() {
                return Err(mismatch(node, op, format!("{:?} -> {:?}", args[0].shape(), shape)));
            }
            args[0].clone().reshaped(shape.clone())
        }
        Op::SliceCols { start, end } => {
            let (r, c) = require_2d(node, op, args[0])?;
            if start >= end || *end > c {
                return Err(mismatch(node, op, format!("columns {start}..{end} of {c}")));
            }
            let mut out = Vec::with_capacity(r * (end - start));
            for i in 0..r {
                out.extend_from_slice(&args[0].row(i)[*start..*end]);
            }
            Tensor::from_parts(vec![r, end - start], out)
        }
        Op::PadCols { width, start } => {
            let (r, c) = require_2d(node, op, args[0])?;
            if start + c > *width {
                return Err(mismatch(node, op, format!("{c} columns at {start} exceed width {width}")));
            }
            let mut out = vec![0.0; r * width];
            for i in 0..r {
                out[i * width + start..i * width + start + c].copy_from_slice(args[0].row(i));
            }
            Tensor::from_parts(vec![r, *width], out)
        }
        Op::ConcatCols => {
            if args.is_empty() {
                return Err(mismatch(node, op, "nothing to concatenate".into()));
            }
            let r = require_2d(node, op, args[0])?.0;
            let mut width = 0;
            for a in args {
                let (ar, ac) = require_2d(node, op, a)?;
                if ar != r {
                    return Err(mismatch(node, op, format!("row counts {r} vs {ar}")));
                }
                width += ac;
            }
            let mut out = Vec::with_capacity(r * width);
            for i in 0..r {
                for a in args {
                    out.extend_from_slice(a.row(i));
                }
            }
            Tensor::from_parts(vec![r, width], out)
        }
    };
    if !out.all_finite() {
        return Err(TensorError::NonFinite {
            node,
            op: op.name(),
        });
    }
    Ok(out)
}
