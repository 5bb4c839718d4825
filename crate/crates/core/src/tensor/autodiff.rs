//! Reverse pass that emits gradient nodes into the same graph.

use super::graph::{ExprGraph, GradientMap, NodeId, Op};
use super::{Tensor, TensorError};

type Res<T> = Result<T, TensorError>;

impl ExprGraph {
    fn shape_of(&self, id: NodeId) -> Res<Vec<usize>> {
        Ok(self.value(id)?.shape().to_vec())
    }

    /// Sums `g` over the leading axis when `target` was broadcast.
    fn reduce_to(&mut self, g: NodeId, target: NodeId) -> Res<NodeId> {
        let gs = self.shape_of(g)?;
        let ts = self.shape_of(target)?;
        if gs == ts {
            Ok(g)
        } else {
            self.push(Op::SumBatch, vec![g])
        }
    }

    /// Builds nodes holding `∂output/∂w` for each `w` in `wrt`.
    ///
    /// The returned nodes are ordinary graph nodes: they can be combined
    /// further and differentiated again.
    pub fn grad(&mut self, output: NodeId, wrt: &[NodeId]) -> Res<Vec<NodeId>> {
        let out_shape = self.shape_of(output)?;
        if out_shape.iter().product::<usize>() != 1 {
            return Err(TensorError::NotScalar {
                node: output.0,
                shape: out_shape,
            });
        }
        let n = output.0 + 1;
        let mut needs = vec![false; n];
        for w in wrt {
            if w.0 < n {
                needs[w.0] = true;
            }
        }
        for i in 0..n {
            if needs[i] || self.nodes[i].op.is_mask() {
                continue;
            }
            needs[i] = self.nodes[i].args.iter().any(|a| needs[a.0]);
        }

        let mut adjoint: Vec<Option<NodeId>> = vec![None; n];
        adjoint[output.0] = Some(self.constant(Tensor::filled(&out_shape, 1.0)));

        for i in (0..n).rev() {
            let Some(g) = adjoint[i] else { continue };
            if !needs[i] || self.nodes[i].op.is_leaf() {
                continue;
            }
            let op = self.nodes[i].op.clone();
            let args = self.nodes[i].args.clone();
            let y = NodeId(i);
            let contributions = self.vjp(&op, &args, y, g)?;
            for (arg, contrib) in args.iter().zip(contributions) {
                let Some(c) = contrib else { continue };
                if !needs[arg.0] {
                    continue;
                }
                adjoint[arg.0] = Some(match adjoint[arg.0] {
                    Some(prev) => self.push(Op::Add, vec![prev, c])?,
                    None => c,
                });
            }
        }

        wrt.iter()
            .map(|w| match adjoint.get(w.0).copied().flatten() {
                Some(g) => Ok(g),
                None => {
                    let shape = self.shape_of(*w)?;
                    Ok(self.constant(Tensor::zeros(&shape)))
                }
            })
            .collect()
    }

    /// Vector-Jacobian products for one node; `None` where an operand gets
    /// no gradient.
    fn vjp(&mut self, op: &Op, args: &[NodeId], y: NodeId, g: NodeId) -> Res<Vec<Option<NodeId>>> {
        let a = args.first().copied();
        let out = match op {
            Op::Input { .. } | Op::Param { .. } | Op::Const => vec![],
            Op::StepPositive | Op::LeakySlope(_) | Op::InRange { .. } => vec![None],
            Op::Add => {
                let ga = self.reduce_to(g, args[0])?;
                let gb = self.reduce_to(g, args[1])?;
                vec![Some(ga), Some(gb)]
            }
            Op::Sub => {
                let ga = self.reduce_to(g, args[0])?;
                let ng = self.neg(g)?;
                let gb = self.reduce_to(ng, args[1])?;
                vec![Some(ga), Some(gb)]
            }
            Op::Mul => {
                let gb_full = self.mul(g, args[0])?;
                let ga_full = self.mul(g, args[1])?;
                let ga = self.reduce_to(ga_full, args[0])?;
                let gb = self.reduce_to(gb_full, args[1])?;
                vec![Some(ga), Some(gb)]
            }
            Op::MatMul { ta, tb } => {
                let (lhs, rhs) = (args[0], args[1]);
                let mm = |s: &mut Self, x, y, ta, tb| s.push(Op::MatMul { ta, tb }, vec![x, y]);
                let (ga, gb) = match (ta, tb) {
                    (false, false) => (mm(self, g, rhs, false, true)?, mm(self, lhs, g, true, false)?),
                    (false, true) => (mm(self, g, rhs, false, false)?, mm(self, g, lhs, true, false)?),
                    (true, false) => (mm(self, rhs, g, false, true)?, mm(self, lhs, g, false, false)?),
                    (true, true) => (mm(self, rhs, g, true, true)?, mm(self, g, lhs, true, true)?),
                };
                vec![Some(ga), Some(gb)]
            }
            Op::Neg => vec![Some(self.neg(g)?)],
            Op::Scale(c) => vec![Some(self.scale(g, *c)?)],
            Op::AddScalar(_) => vec![Some(g)],
            Op::Square => {
                let two_x = self.scale(a.expect("unary"), 2.0)?;
                vec![Some(self.mul(g, two_x)?)]
            }
            Op::Sqrt => {
                let r = self.recip(y)?;
                let half = self.scale(r, 0.5)?;
                vec![Some(self.mul(g, half)?)]
            }
            Op::Recip => {
                let y2 = self.square(y)?;
                let gy2 = self.mul(g, y2)?;
                vec![Some(self.neg(gy2)?)]
            }
            Op::Log { floor } => {
                let x = a.expect("unary");
                let mask = self.push(
                    Op::InRange {
                        lo: *floor,
                        hi: f64::INFINITY,
                    },
                    vec![x],
                )?;
                let clamped = self.clip(x, *floor, f64::INFINITY)?;
                let inv = self.recip(clamped)?;
                let d = self.mul(mask, inv)?;
                vec![Some(self.mul(g, d)?)]
            }
            Op::Tanh => {
                let y2 = self.square(y)?;
                let neg = self.neg(y2)?;
                let d = self.add_scalar(neg, 1.0)?;
                vec![Some(self.mul(g, d)?)]
            }
            Op::Sigmoid => {
                let ny = self.neg(y)?;
                let one_minus = self.add_scalar(ny, 1.0)?;
                let d = self.mul(y, one_minus)?;
                vec![Some(self.mul(g, d)?)]
            }
            Op::Relu => {
                let mask = self.push(Op::StepPositive, vec![a.expect("unary")])?;
                vec![Some(self.mul(g, mask)?)]
            }
            Op::LeakyRelu(s) => {
                let mask = self.push(Op::LeakySlope(*s), vec![a.expect("unary")])?;
                vec![Some(self.mul(g, mask)?)]
            }
            Op::Softmax => {
                let k = self.shape_of(y)?[1];
                let gy = self.mul(g, y)?;
                let s = self.sum_cols(gy)?;
                let e = self.push(Op::ExpandCols(k), vec![s])?;
                let diff = self.sub(g, e)?;
                vec![Some(self.mul(y, diff)?)]
            }
            Op::Clip { lo, hi } => {
                let mask = self.push(Op::InRange { lo: *lo, hi: *hi }, vec![a.expect("unary")])?;
                vec![Some(self.mul(g, mask)?)]
            }
            Op::Sum => {
                let shape = self.shape_of(a.expect("unary"))?;
                vec![Some(self.push(Op::Expand(shape), vec![g])?)]
            }
            Op::Mean => {
                let shape = self.shape_of(a.expect("unary"))?;
                let n = shape.iter().product::<usize>() as f64;
                let e = self.push(Op::Expand(shape), vec![g])?;
                vec![Some(self.scale(e, 1.0 / n)?)]
            }
            Op::SumBatch => {
                let b = self.shape_of(a.expect("unary"))?[0];
                vec![Some(self.push(Op::BroadcastBatch(b), vec![g])?)]
            }
            Op::BroadcastBatch(_) => vec![Some(self.push(Op::SumBatch, vec![g])?)],
            Op::SumCols => {
                let k = self.shape_of(a.expect("unary"))?[1];
                vec![Some(self.push(Op::ExpandCols(k), vec![g])?)]
            }
            Op::ExpandCols(_) => vec![Some(self.sum_cols(g)?)],
            Op::Expand(_) => {
                let shape = self.shape_of(a.expect("unary"))?;
                let s = self.sum(g)?;
                vec![Some(self.push(Op::Reshape(shape), vec![s])?)]
            }
            Op::Reshape(_) => {
                let shape = self.shape_of(a.expect("unary"))?;
                vec![Some(self.push(Op::Reshape(shape), vec![g])?)]
            }
            Op::SliceCols { start, .. } => {
                let width = self.shape_of(a.expect("unary"))?[1];
                vec![Some(self.push(Op::PadCols { width, start: *start }, vec![g])?)]
            }
            Op::PadCols { start, .. } => {
                let c = self.shape_of(a.expect("unary"))?[1];
                vec![Some(self.slice_cols(g, *start, start + c)?)]
            }
            Op::ConcatCols => {
                let mut off = 0;
                let mut parts = Vec::with_capacity(args.len());
                for arg in args {
                    let c = self.shape_of(*arg)?[1];
                    parts.push(Some(self.slice_cols(g, off, off + c)?));
                    off += c;
                }
                parts
            }
        };
        Ok(out)
    }

    /// Gradients of a scalar output with respect to every tracked leaf,
    /// keyed by leaf name. The graph is left as it was before the call.
    pub fn backward(&mut self, output: NodeId) -> Res<GradientMap> {
        self.value(output)?;
        let leaves: Vec<(String, NodeId)> = self
            .nodes
            .iter()
            .enumerate()
            .take(output.0 + 1)
            .filter(|(_, n)| n.tracked)
            .filter_map(|(i, n)| match &n.op {
                Op::Input { name } | Op::Param { name } => Some((name.clone(), NodeId(i))),
                _ => None,
            })
            .collect();
        let ids: Vec<NodeId> = leaves.iter().map(|(_, id)| *id).collect();
        let grads = self.backward_wrt(output, &ids)?;
        let mut map = GradientMap::new();
        for ((name, _), g) in leaves.into_iter().zip(grads) {
            match map.get_mut(&name) {
                Some(prev) => {
                    for (p, v) in prev.data_mut().iter_mut().zip(g.data()) {
                        *p += v;
                    }
                }
                None => {
                    map.insert(name, g);
                }
            }
        }
        Ok(map)
    }

    /// Gradient values of `output` with respect to `wrt`; the gradient
    /// nodes are discarded afterwards.
    pub fn backward_wrt(&mut self, output: NodeId, wrt: &[NodeId]) -> Res<Vec<Tensor>> {
        self.value(output)?;
        let mark = self.len();
        let result = self.grad(output, wrt).and_then(|ids| {
            ids.iter()
                .map(|id| self.value(*id).cloned())
                .collect::<Res<Vec<_>>>()
        });
        self.truncate(mark);
        result
    }

    /// `∂F/∂x` per batch row, for a network output `F` holding one scalar per
    /// row of `x`. The result stays in the graph and can be differentiated
    /// again.
    pub fn input_gradient(&mut self, output: NodeId, x: NodeId) -> Res<NodeId> {
        let shape = self.shape_of(output)?;
        let rows = self.shape_of(x)?.first().copied().unwrap_or(1);
        let per_row = match shape.as_slice() {
            [b] => *b == rows,
            [b, 1] => *b == rows,
            _ => false,
        };
        if !per_row {
            return Err(TensorError::NotRowScalar {
                node: output.0,
                shape,
            });
        }
        let total = self.sum(output)?;
        Ok(self.grad(total, &[x])?[0])
    }
}
