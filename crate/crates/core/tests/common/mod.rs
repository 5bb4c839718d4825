//! Oracles shared by the integration tests and the acceptance report.
#![allow(dead_code)]

use ganbench::gan::{gradient_penalty, Network};
use ganbench::nn::{Activation, Layer, MlpSpec};
use ganbench::rng::rng;
use ganbench::tensor::{ExprGraph, Tensor};
use rand::Rng as _;

pub const HIDDEN_ACTIVATIONS: [Activation; 4] =
    [Activation::Relu, Activation::LeakyRelu(0.2), Activation::Tanh, Activation::Sigmoid];
pub const OUTPUT_ACTIVATIONS: [Activation; 4] =
    [Activation::Linear, Activation::Tanh, Activation::Sigmoid, Activation::Softmax];

/// `|a - n| / max(|a|, |n|, floor)`; the floor keeps round-off on
/// near-zero entries from dominating.
pub fn rel_err(a: f64, n: f64, floor: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(floor)
}

pub fn random_tensor(r: &mut ganbench::rng::Rng, shape: &[usize], scale: f64) -> Tensor {
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| r.random_range(-scale..scale)).collect()).unwrap()
}

/// A random 1 to 3 hidden-layer MLP with widths at most 64.
pub fn random_spec(seed: u64) -> MlpSpec {
    let mut r = rng(seed);
    let depth = r.random_range(1..=3);
    let hidden = (0..depth)
        .map(|_| Layer::new(r.random_range(1..=64), HIDDEN_ACTIVATIONS[r.random_range(0..4)]))
        .collect();
    let out_act = OUTPUT_ACTIVATIONS[r.random_range(0..4)];
    let out_w = if out_act == Activation::Softmax { r.random_range(2..=5) } else { r.random_range(1..=4) };
    MlpSpec::new(r.random_range(1..=8), hidden, Layer::new(out_w, out_act), seed ^ 0x5eed)
}

/// Scalar probe `sum(out ⊙ w)` of the network on `x`.
fn probe(net: &Network, x: &Tensor, w: &Tensor) -> f64 {
    let out = net.predict(x).unwrap();
    out.data().iter().zip(w.data()).map(|(a, b)| a * b).sum()
}

pub struct GradCheck {
    pub max_rel: f64,
    pub checked: usize,
}

/// Reverse-mode parameter gradients of a random network against central
/// differences, on up to `per_net` coordinates.
pub fn mlp_gradient_check(seed: u64, per_net: usize) -> GradCheck {
    let spec = random_spec(seed);
    let mut net = Network::build(&spec, "net").unwrap();
    let mut r = rng(seed.wrapping_add(1));
    // Biases start at zero, which can park a piecewise-linear unit exactly
    // on its kink when its input is zero; check at a generic point instead.
    let jittered = net
        .params
        .tensors()
        .iter()
        .map(|t| {
            let noise = random_tensor(&mut r, t.shape(), 0.1);
            Tensor::new(t.shape().to_vec(), t.data().iter().zip(noise.data()).map(|(a, b)| a + b).collect()).unwrap()
        })
        .collect();
    net.params.replace_values(jittered).unwrap();
    let rows = 3;
    let x = random_tensor(&mut r, &[rows, spec.input_dim], 1.5);
    let w = random_tensor(&mut r, &[rows, spec.output_dim()], 1.0);

    let mut g = ExprGraph::new();
    let nodes = net.params.bind(&mut g);
    let xi = g.input("x", x.clone());
    let out = net.mlp.forward(&mut g, xi, &nodes).unwrap();
    let wc = g.constant(w.clone());
    let prod = g.mul(out, wc).unwrap();
    let loss = g.sum(prod).unwrap();
    let grads = g.backward(loss).unwrap();

    let names = net.params.names().to_vec();
    let total: usize = net.params.tensors().iter().map(Tensor::numel).sum();
    let mut coords: Vec<(usize, usize)> = Vec::new();
    for (t, tensor) in net.params.tensors().iter().enumerate() {
        for i in 0..tensor.numel() {
            coords.push((t, i));
        }
    }
    if total > per_net {
        let idx = rand::seq::index::sample(&mut r, total, per_net);
        coords = idx.iter().map(|k| coords[k]).collect();
    }
    let h = 1e-6;
    let mut max_rel = 0.0f64;
    for &(t, i) in &coords {
        let base = net.params.tensors().to_vec();
        let eval = |net: &mut Network, delta: f64| {
            let mut v = base.clone();
            v[t].data_mut()[i] += delta;
            net.params.replace_values(v).unwrap();
            probe(net, &x, &w)
        };
        let fd = (eval(&mut net, h) - eval(&mut net, -h)) / (2.0 * h);
        net.params.replace_values(base).unwrap();
        let an = grads[&names[t]].data()[i];
        max_rel = max_rel.max(rel_err(an, fd, 1e-3));
    }
    GradCheck {
        max_rel,
        checked: coords.len(),
    }
}

/// Parameter gradients of the penalty `mean((‖∇x F(x)‖ − 1)²)`, which
/// differentiates through an input gradient, against central differences
/// of the library's penalty value.
pub fn penalty_gradient_check(seed: u64) -> GradCheck {
    let mut r = rng(seed);
    let d = r.random_range(1..=4);
    let act = [Activation::Tanh, Activation::LeakyRelu(0.2), Activation::Sigmoid][r.random_range(0..3)];
    let spec = MlpSpec::new(
        d,
        vec![Layer::new(r.random_range(2..=16), act), Layer::new(r.random_range(2..=16), Activation::Tanh)],
        Layer::new(1, Activation::Linear),
        seed,
    );
    let mut net = Network::build(&spec, "critic").unwrap();
    let x = random_tensor(&mut r, &[4, d], 1.0);
    let rho = [0.5; 4];

    let mut g = ExprGraph::new();
    let nodes = net.params.bind(&mut g);
    let xi = g.input("x_hat", x.clone());
    let f = net.mlp.forward(&mut g, xi, &nodes).unwrap();
    let gx = g.input_gradient(f, xi).unwrap();
    let sq = g.square(gx).unwrap();
    let s = g.sum_cols(sq).unwrap();
    let s = g.add_scalar(s, 1e-12).unwrap();
    let norm = g.sqrt(s).unwrap();
    let dev = g.add_scalar(norm, -1.0).unwrap();
    let dev2 = g.square(dev).unwrap();
    let pen = g.mean(dev2).unwrap();
    let analytic_value = g.value(pen).unwrap().item();
    let grads = g.backward(pen).unwrap();
    let library_value = gradient_penalty(&net, &x, &x, 1.0, &rho).unwrap().item();
    assert!((analytic_value - library_value).abs() <= 1e-12 * library_value.abs().max(1.0));

    let names = net.params.names().to_vec();
    let base = net.params.tensors().to_vec();
    let h = 1e-6;
    let mut max_rel = 0.0f64;
    let mut checked = 0;
    for t in 0..base.len() {
        for i in 0..base[t].numel() {
            let mut eval = |delta: f64| {
                let mut v = base.clone();
                v[t].data_mut()[i] += delta;
                net.params.replace_values(v).unwrap();
                gradient_penalty(&net, &x, &x, 1.0, &rho).unwrap().item()
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            max_rel = max_rel.max(rel_err(grads[&names[t]].data()[i], fd, 1e-3));
            checked += 1;
        }
    }
    GradCheck { max_rel, checked }
}

/// Exact 1-D EMD between equal-size samples by trying every pairing.
pub fn brute_force_emd(x: &[f64], y: &[f64]) -> f64 {
    fn permute(k: usize, perm: &mut Vec<usize>, x: &[f64], y: &[f64], best: &mut f64) {
        if k == perm.len() {
            let c: f64 = perm.iter().enumerate().map(|(i, &j)| (x[i] - y[j]).abs()).sum();
            *best = best.min(c / x.len() as f64);
            return;
        }
        for i in k..perm.len() {
            perm.swap(k, i);
            permute(k + 1, perm, x, y, best);
            perm.swap(k, i);
        }
    }
    let mut best = f64::INFINITY;
    permute(0, &mut (0..x.len()).collect(), x, y, &mut best);
    best
}

/// A KDD99-shaped CSV body (41 features plus a label) whose `urgent` and
/// `num_outbound_cmds` columns are identically zero.
pub fn kdd99_text(rows: usize, seed: u64) -> String {
    use ganbench::datasets::KDD99_COLUMNS;
    let mut r = rng(seed);
    let mut out = String::new();
    for i in 0..rows {
        let fields: Vec<String> = KDD99_COLUMNS
            .iter()
            .map(|&(name, continuous)| match (name, continuous) {
                ("protocol_type", _) => ["tcp", "udp", "icmp"][i % 3].into(),
                ("service", _) => ["http", "smtp"][i % 2].into(),
                ("flag", _) => "SF".into(),
                (_, false) => (i % 2).to_string(),
                ("urgent" | "num_outbound_cmds", _) => "0".into(),
                ("count", _) => r.random_range(1..500).to_string(),
                _ => format!("{:.2}", r.random_range(0.0..1.0)),
            })
            .chain([["normal.", "smurf."][i % 2].to_string()])
            .collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn configs_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

/// `report.csv` without the wall-clock provenance line.
pub fn report_payload(dir: &std::path::Path) -> String {
    std::fs::read_to_string(dir.join("report.csv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("# wall_clock_s:"))
        .map(|l| format!("{l}\n"))
        .collect()
}
