//! Per-variant discriminator and generator objectives.
//!
//! Sign conventions (the value returned is what the named side moves in the
//! given direction):
//!
//! | variant            | discriminator                        | generator                         |
//! |--------------------|--------------------------------------|-----------------------------------|
//! | VANILLA, CGAN      | `E log D(x) + E log(1-D(G(z)))`, ascend | `E log(1-D(G(z)))`, descend     |
//! | ACGAN              | `L_S - L_C`, ascend                  | `L_S + L_C` (G terms), ascend     |
//! | WGAN               | `E F(x) - E F(G(z))`, ascend         | `-E F(G(z))`, descend             |
//! | WGAN_GP            | WGAN minus `λ·E(‖∇F(x̂)‖-1)²`, ascend | `-E F(G(z))`, descend             |
//! | INFOGAN            | as VANILLA, ascend                   | `E log(1-D(G)) - λ L_I`, descend  |
//! | LSGAN              | `½E(D(x)-1)² + ½E D(G(z))²`, descend | `½E(D(G(z))-1)²`, descend         |
//! | BIGAN              | `E log D(x,E(x)) + E log(1-D(G(z),z))`, ascend | same, descend (G and E) |
//!
//! ACGAN's fake-side class term is evaluated as `log Q(c | G(z, c))`.
//! Written literally the term conditions on `z`, which Q never sees.

use super::{GanError, GanVariant, ModelBundle, Network, TrainConfig};
use crate::nn::Direction;
use crate::tensor::{ExprGraph, NodeId, Tensor, TensorError};

/// Which network a block of bound parameters belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Generator,
    Discriminator,
    Encoder,
    Aux,
}

/// A batch of real rows with optional class labels.
#[derive(Debug, Clone, Copy)]
pub struct RealBatch<'a> {
    pub x: &'a Tensor,
    pub labels: Option<&'a [usize]>,
}

/// Generator inputs: latent noise plus labels (CGAN/ACGAN) or code
/// indices (InfoGAN, row-major `rows × factors`).
#[derive(Debug, Clone, Copy)]
pub struct FakeBatch<'a> {
    pub z: &'a Tensor,
    pub labels: Option<&'a [usize]>,
    pub codes: Option<&'a [usize]>,
}

/// Loss-shaping settings shared by both sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    pub lambda_gp: f64,
    pub lambda_info: f64,
    pub non_saturating: bool,
    pub acgan_swap_objectives: bool,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            lambda_gp: 10.0,
            lambda_info: 1.0,
            non_saturating: false,
            acgan_swap_objectives: false,
        }
    }
}

impl From<&TrainConfig> for LossConfig {
    fn from(c: &TrainConfig) -> Self {
        Self {
            lambda_gp: c.lambda_gp,
            lambda_info: c.lambda_info,
            non_saturating: c.non_saturating,
            acgan_swap_objectives: c.acgan_swap_objectives,
        }
    }
}

/// An objective built into a graph, ready for differentiation.
#[derive(Debug)]
pub struct Objective {
    pub graph: ExprGraph,
    pub value: NodeId,
    pub direction: Direction,
    pub trainable: Vec<(Role, Vec<NodeId>)>,
    /// Mean discriminator (or critic) output on the real rows.
    pub real_score: Option<NodeId>,
}

impl Objective {
    pub fn scalar(&self) -> f64 {
        self.graph.value(self.value).map(Tensor::item).unwrap_or(f64::NAN)
    }
}

fn term<T>(name: &'static str, r: Result<T, TensorError>) -> Result<T, GanError> {
    r.map_err(|source| GanError::Loss { term: name, source })
}

pub(crate) fn one_hot(labels: &[usize], k: usize) -> Result<Tensor, GanError> {
    let mut data = vec![0.0; labels.len() * k];
    for (i, &l) in labels.iter().enumerate() {
        if l >= k {
            return Err(GanError::Label { label: l, classes: k });
        }
        data[i * k + l] = 1.0;
    }
    Tensor::new(vec![labels.len(), k], data).map_err(GanError::from)
}

/// Concatenated one-hots of each code factor.
pub(crate) fn code_one_hot(codes: &[usize], factors: &[usize]) -> Result<Tensor, GanError> {
    let nf = factors.len();
    if nf == 0 || codes.len() % nf != 0 {
        return Err(GanError::Config(format!(
            "{} code entries do not split into {nf} factors",
            codes.len()
        )));
    }
    let rows = codes.len() / nf;
    let width: usize = factors.iter().sum();
    let mut data = vec![0.0; rows * width];
    for r in 0..rows {
        let mut off = 0;
        for (f, &k) in factors.iter().enumerate() {
            let c = codes[r * nf + f];
            if c >= k {
                return Err(GanError::Label { label: c, classes: k });
            }
            data[r * width + off + c] = 1.0;
            off += k;
        }
    }
    Tensor::new(vec![rows, width], data).map_err(GanError::from)
}

fn bind(g: &mut ExprGraph, net: &Network, trainable: bool) -> Vec<NodeId> {
    if trainable {
        net.params.bind(g)
    } else {
        net.params.bind_frozen(g)
    }
}

fn require_labels<'a>(v: GanVariant, labels: Option<&'a [usize]>, rows: usize) -> Result<&'a [usize], GanError> {
    let l = labels.ok_or(GanError::MissingLabels(v))?;
    if l.len() != rows {
        return Err(GanError::BatchMismatch { real: rows, fake: l.len() });
    }
    Ok(l)
}

/// Generator input: noise with the label or code one-hots appended.
pub(crate) fn generator_input(g: &mut ExprGraph, bundle: &ModelBundle, fake: &FakeBatch) -> Result<NodeId, GanError> {
    let v = bundle.variant();
    let rows = fake.z.rows();
    if fake.z.shape().len() != 2 || fake.z.cols() != bundle.latent() {
        return Err(GanError::Config(format!(
            "noise batch has shape {:?}, expected (rows, {})",
            fake.z.shape(),
            bundle.latent()
        )));
    }
    let z = g.input("z", fake.z.clone());
    match v {
        GanVariant::Cgan | GanVariant::Acgan => {
            let labels = require_labels(v, fake.labels, rows)?;
            let y = g.constant(one_hot(labels, bundle.spec.k_classes)?);
            Ok(g.concat_cols(&[z, y])?)
        }
        GanVariant::InfoGan => {
            let codes = fake.codes.ok_or(GanError::MissingLabels(v))?;
            let c = code_one_hot(codes, &bundle.spec.code_factors)?;
            if c.rows() != rows {
                return Err(GanError::BatchMismatch { real: rows, fake: c.rows() });
            }
            let c = g.constant(c);
            Ok(g.concat_cols(&[z, c])?)
        }
        _ => Ok(z),
    }
}

fn log_one_minus(g: &mut ExprGraph, d: NodeId) -> Result<NodeId, TensorError> {
    let n = g.neg(d)?;
    let om = g.add_scalar(n, 1.0)?;
    g.log(om)
}

fn mean_log(g: &mut ExprGraph, d: NodeId) -> Result<NodeId, TensorError> {
    let l = g.log(d)?;
    g.mean(l)
}

fn mean_log_one_minus(g: &mut ExprGraph, d: NodeId) -> Result<NodeId, TensorError> {
    let l = log_one_minus(g, d)?;
    g.mean(l)
}

/// Softmax probabilities of each code factor from Q's logits.
fn factor_probs(g: &mut ExprGraph, logits: NodeId, factors: &[usize]) -> Result<Vec<NodeId>, TensorError> {
    if factors.len() == 1 {
        return Ok(vec![g.softmax(logits)?]);
    }
    let mut off = 0;
    let mut out = Vec::with_capacity(factors.len());
    for &k in factors {
        let s = g.slice_cols(logits, off, off + k)?;
        out.push(g.softmax(s)?);
        off += k;
    }
    Ok(out)
}

/// Batch mean of `Σ_f log Q_f(c_f | x)`.
fn mean_code_log_likelihood(
    g: &mut ExprGraph,
    probs: &[NodeId],
    one_hots: &[Tensor],
) -> Result<NodeId, TensorError> {
    let mut total: Option<NodeId> = None;
    for (p, oh) in probs.iter().zip(one_hots) {
        let lp = g.log(*p)?;
        let mask = g.constant(oh.clone());
        let picked = g.mul(lp, mask)?;
        let per_row = g.sum_cols(picked)?;
        let m = g.mean(per_row)?;
        total = Some(match total {
            Some(t) => g.add(t, m)?,
            None => m,
        });
    }
    Ok(total.expect("at least one factor"))
}

fn split_code_one_hots(codes: &[usize], factors: &[usize]) -> Result<Vec<Tensor>, GanError> {
    let nf = factors.len();
    let rows = codes.len() / nf.max(1);
    factors
        .iter()
        .enumerate()
        .map(|(f, &k)| {
            let col: Vec<usize> = (0..rows).map(|r| codes[r * nf + f]).collect();
            one_hot(&col, k)
        })
        .collect()
}

/// Entropy of the uniform code prior, `Σ_f ln k_f`.
pub fn code_entropy(factors: &[usize]) -> f64 {
    factors.iter().map(|&k| (k as f64).ln()).sum()
}

/// Gradient-penalty node `λ · mean_rows (‖∇_x̂ F(x̂)‖₂ - 1)²` for an `x̂`
/// leaf already in the graph.
fn penalty_node(
    g: &mut ExprGraph,
    critic: &Network,
    critic_nodes: &[NodeId],
    x_hat: NodeId,
    lambda: f64,
) -> Result<NodeId, GanError> {
    let f = term("critic(x_hat)", critic.mlp.forward(g, x_hat, critic_nodes))?;
    let grad = term("grad critic(x_hat)", g.input_gradient(f, x_hat))?;
    let norm = term("gradient norm", (|| {
        let sq = g.square(grad)?;
        let s = g.sum_cols(sq)?;
        // A tiny offset keeps the norm differentiable when the gradient
        // vanishes exactly.
        let s = g.add_scalar(s, 1e-12)?;
        g.sqrt(s)
    })())
    .map_err(|e| match e {
        GanError::Loss { source: TensorError::NonFinite { .. }, .. } => GanError::NonFiniteGradientNorm,
        other => other,
    })?;
    let p = term("gradient penalty", (|| {
        let d = g.add_scalar(norm, -1.0)?;
        let d2 = g.square(d)?;
        let m = g.mean(d2)?;
        g.scale(m, lambda)
    })())?;
    Ok(p)
}

fn interpolate(x_real: &Tensor, x_fake: &Tensor, rho: &[f64]) -> Result<Tensor, GanError> {
    if x_real.shape() != x_fake.shape() {
        return Err(GanError::BatchMismatch {
            real: x_real.rows(),
            fake: x_fake.rows(),
        });
    }
    if rho.len() != x_real.rows() {
        return Err(GanError::Config(format!(
            "{} interpolation weights for {} rows",
            rho.len(),
            x_real.rows()
        )));
    }
    let c = x_real.cols();
    let data = x_real
        .data()
        .iter()
        .zip(x_fake.data())
        .enumerate()
        .map(|(i, (&r, &f))| {
            let p = rho[i / c];
            p * f + (1.0 - p) * r
        })
        .collect();
    Ok(Tensor::from_parts(x_real.shape().to_vec(), data))
}

/// WGAN-GP penalty `λ · mean_rows (‖∇_x̂ F(x̂)‖₂ - 1)²` with
/// `x̂ = ρ·x_fake + (1-ρ)·x_real`, one `ρ ∈ [0, 1]` per row.
pub fn gradient_penalty(
    critic: &Network,
    x_real: &Tensor,
    x_fake: &Tensor,
    lambda: f64,
    rho: &[f64],
) -> Result<Tensor, GanError> {
    let x_hat = interpolate(x_real, x_fake, rho)?;
    let mut g = ExprGraph::new();
    let nodes = critic.params.bind(&mut g);
    let xh = g.input("x_hat", x_hat);
    let p = penalty_node(&mut g, critic, &nodes, xh, lambda)?;
    Ok(g.value(p)?.clone())
}

/// `E[log Q(c|x)] + H(c)` for a single uniform categorical code.
/// `q_output` rows must be probability distributions over the `k` codes.
pub fn info_lower_bound(q_output: &Tensor, codes: &[usize]) -> Result<f64, GanError> {
    let k = q_output.cols();
    if q_output.rows() != codes.len() {
        return Err(GanError::BatchMismatch {
            real: q_output.rows(),
            fake: codes.len(),
        });
    }
    let mut acc = 0.0;
    for (i, &c) in codes.iter().enumerate() {
        let row = q_output.row(i);
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > 1e-6 || row.iter().any(|&p| p < 0.0) {
            return Err(GanError::NotADistribution { row: i, sum: total });
        }
        if c >= k {
            return Err(GanError::Label { label: c, classes: k });
        }
        acc += row[c].max(crate::tensor::LOG_FLOOR).ln();
    }
    Ok(acc / codes.len() as f64 + code_entropy(&[k]))
}

/// Builds the discriminator-side objective. `rho` supplies the per-row
/// interpolation weights for WGAN-GP.
pub fn discriminator_objective(
    bundle: &ModelBundle,
    real: &RealBatch,
    fake: &FakeBatch,
    cfg: &LossConfig,
    rho: Option<&[f64]>,
) -> Result<Objective, GanError> {
    let v = bundle.variant();
    let rows = real.x.rows();
    if fake.z.rows() != rows {
        return Err(GanError::BatchMismatch {
            real: rows,
            fake: fake.z.rows(),
        });
    }
    let mut g = ExprGraph::new();
    let d_nodes = bind(&mut g, &bundle.discriminator, true);
    let g_nodes = bind(&mut g, &bundle.generator, false);
    let gen_in = generator_input(&mut g, bundle, fake)?;
    let x_fake = term("G(z)", bundle.generator.mlp.forward(&mut g, gen_in, &g_nodes))?;
    let x_real = g.input("x", real.x.clone());
    let mut trainable = vec![(Role::Discriminator, d_nodes.clone())];

    let (d_real_in, d_fake_in) = match v {
        GanVariant::Cgan => {
            let yr = one_hot(require_labels(v, real.labels, rows)?, bundle.spec.k_classes)?;
            let yf = one_hot(require_labels(v, fake.labels, rows)?, bundle.spec.k_classes)?;
            let yr = g.constant(yr);
            let yf = g.constant(yf);
            (g.concat_cols(&[x_real, yr])?, g.concat_cols(&[x_fake, yf])?)
        }
        GanVariant::Bigan => {
            let enc = bundle.encoder.as_ref().ok_or(GanError::WrongVariant(v))?;
            let e_nodes = bind(&mut g, enc, false);
            let ex = term("E(x)", enc.mlp.forward(&mut g, x_real, &e_nodes))?;
            let z = g.input("z_pair", fake.z.clone());
            (g.concat_cols(&[x_real, ex])?, g.concat_cols(&[x_fake, z])?)
        }
        _ => (x_real, x_fake),
    };
    let d_real = term("D(x)", bundle.discriminator.mlp.forward(&mut g, d_real_in, &d_nodes))?;
    let d_fake = term("D(G(z))", bundle.discriminator.mlp.forward(&mut g, d_fake_in, &d_nodes))?;
    let real_score = Some(term("mean D(x)", g.mean(d_real))?);

    let value = match v {
        GanVariant::Vanilla | GanVariant::Cgan | GanVariant::InfoGan | GanVariant::Bigan => {
            let a = term("log D(x)", mean_log(&mut g, d_real))?;
            let b = term("log(1 - D(G(z)))", mean_log_one_minus(&mut g, d_fake))?;
            term("discriminator objective", g.add(a, b))?
        }
        GanVariant::Acgan => {
            let q = bundle.aux_head.as_ref().ok_or(GanError::WrongVariant(v))?;
            let q_nodes = bind(&mut g, q, true);
            trainable.push((Role::Aux, q_nodes.clone()));
            let ls = {
                let a = term("log D(x)", mean_log(&mut g, d_real))?;
                let b = term("log(1 - D(G(z)))", mean_log_one_minus(&mut g, d_fake))?;
                term("L_S", g.add(a, b))?
            };
            let yr = one_hot(require_labels(v, real.labels, rows)?, bundle.spec.k_classes)?;
            let yf = one_hot(require_labels(v, fake.labels, rows)?, bundle.spec.k_classes)?;
            let lc = {
                let qr = term("Q(x)", q.mlp.forward(&mut g, x_real, &q_nodes))?;
                let qf = term("Q(G(z))", q.mlp.forward(&mut g, x_fake, &q_nodes))?;
                let pr = term("Q(x)", factor_probs(&mut g, qr, &[bundle.spec.k_classes]))?;
                let pf = term("Q(G(z))", factor_probs(&mut g, qf, &[bundle.spec.k_classes]))?;
                let a = term("log Q(c|x)", mean_code_log_likelihood(&mut g, &pr, &[yr]))?;
                let b = term("log Q(c|G(z))", mean_code_log_likelihood(&mut g, &pf, &[yf]))?;
                term("L_C", g.add(a, b))?
            };
            if cfg.acgan_swap_objectives {
                term("L_S + L_C", g.add(ls, lc))?
            } else {
                term("L_S - L_C", g.sub(ls, lc))?
            }
        }
        GanVariant::Wgan | GanVariant::WganGp => {
            let a = term("mean F(x)", g.mean(d_real))?;
            let b = term("mean F(G(z))", g.mean(d_fake))?;
            let w = term("critic objective", g.sub(a, b))?;
            if v == GanVariant::WganGp {
                let rho = rho.ok_or_else(|| GanError::Config("WGAN_GP needs interpolation weights".into()))?;
                let xf = g.value(x_fake)?.clone();
                let x_hat = interpolate(real.x, &xf, rho)?;
                let xh = g.input("x_hat", x_hat);
                let p = penalty_node(&mut g, &bundle.discriminator, &d_nodes, xh, cfg.lambda_gp)?;
                term("critic objective", g.sub(w, p))?
            } else {
                w
            }
        }
        GanVariant::Lsgan => {
            let a = term("(D(x) - 1)^2", (|| {
                let t = g.add_scalar(d_real, -1.0)?;
                let s = g.square(t)?;
                let m = g.mean(s)?;
                g.scale(m, 0.5)
            })())?;
            let b = term("D(G(z))^2", (|| {
                let s = g.square(d_fake)?;
                let m = g.mean(s)?;
                g.scale(m, 0.5)
            })())?;
            term("least-squares objective", g.add(a, b))?
        }
    };
    Ok(Objective {
        graph: g,
        value,
        direction: v.discriminator_direction(),
        trainable,
        real_score,
    })
}

/// Builds the generator-side objective. BiGAN also needs the real batch,
/// since its encoder trains on the same objective.
pub fn generator_objective(
    bundle: &ModelBundle,
    fake: &FakeBatch,
    real: Option<&RealBatch>,
    cfg: &LossConfig,
) -> Result<Objective, GanError> {
    let v = bundle.variant();
    let mut g = ExprGraph::new();
    let g_nodes = bind(&mut g, &bundle.generator, true);
    let d_nodes = bind(&mut g, &bundle.discriminator, false);
    let gen_in = generator_input(&mut g, bundle, fake)?;
    let x_fake = term("G(z)", bundle.generator.mlp.forward(&mut g, gen_in, &g_nodes))?;
    let mut trainable = vec![(Role::Generator, g_nodes)];
    let rows = fake.z.rows();

    let d_fake_in = match v {
        GanVariant::Cgan => {
            let y = one_hot(require_labels(v, fake.labels, rows)?, bundle.spec.k_classes)?;
            let y = g.constant(y);
            g.concat_cols(&[x_fake, y])?
        }
        GanVariant::Bigan => {
            let z = g.input("z_pair", fake.z.clone());
            g.concat_cols(&[x_fake, z])?
        }
        _ => x_fake,
    };
    let d_fake = term("D(G(z))", bundle.discriminator.mlp.forward(&mut g, d_fake_in, &d_nodes))?;

    let saturating_or_not = |g: &mut ExprGraph| -> Result<NodeId, GanError> {
        if cfg.non_saturating {
            let l = term("log D(G(z))", mean_log(g, d_fake))?;
            Ok(g.neg(l)?)
        } else {
            term("log(1 - D(G(z)))", mean_log_one_minus(g, d_fake))
        }
    };

    let (value, direction) = match v {
        GanVariant::Vanilla | GanVariant::Cgan => (saturating_or_not(&mut g)?, Direction::Descend),
        GanVariant::InfoGan => {
            let base = saturating_or_not(&mut g)?;
            let q = bundle.aux_head.as_ref().ok_or(GanError::WrongVariant(v))?;
            let q_nodes = bind(&mut g, q, true);
            trainable.push((Role::Aux, q_nodes.clone()));
            let codes = fake.codes.ok_or(GanError::MissingLabels(v))?;
            let factors = &bundle.spec.code_factors;
            let one_hots = split_code_one_hots(codes, factors)?;
            let logits = term("Q(G(z,c))", q.mlp.forward(&mut g, x_fake, &q_nodes))?;
            let probs = term("Q(G(z,c))", factor_probs(&mut g, logits, factors))?;
            let ll = term("log Q(c|x)", mean_code_log_likelihood(&mut g, &probs, &one_hots))?;
            let li = term("L_I", g.add_scalar(ll, code_entropy(factors)))?;
            let weighted = term("lambda L_I", g.scale(li, cfg.lambda_info))?;
            (term("info objective", g.sub(base, weighted))?, Direction::Descend)
        }
        GanVariant::Acgan => {
            let q = bundle.aux_head.as_ref().ok_or(GanError::WrongVariant(v))?;
            let q_nodes = bind(&mut g, q, false);
            let ls = term("log(1 - D(G(z)))", mean_log_one_minus(&mut g, d_fake))?;
            let y = one_hot(require_labels(v, fake.labels, rows)?, bundle.spec.k_classes)?;
            let logits = term("Q(G(z))", q.mlp.forward(&mut g, x_fake, &q_nodes))?;
            let probs = term("Q(G(z))", factor_probs(&mut g, logits, &[bundle.spec.k_classes]))?;
            let lc = term("log Q(c|G(z))", mean_code_log_likelihood(&mut g, &probs, &[y]))?;
            let value = if cfg.acgan_swap_objectives {
                term("L_C - L_S", g.sub(lc, ls))?
            } else {
                term("L_S + L_C", g.add(ls, lc))?
            };
            (value, Direction::Ascend)
        }
        GanVariant::Wgan | GanVariant::WganGp => {
            let m = term("mean F(G(z))", g.mean(d_fake))?;
            (g.neg(m)?, Direction::Descend)
        }
        GanVariant::Lsgan => {
            let value = term("(D(G(z)) - 1)^2", (|| {
                let t = g.add_scalar(d_fake, -1.0)?;
                let s = g.square(t)?;
                let m = g.mean(s)?;
                g.scale(m, 0.5)
            })())?;
            (value, Direction::Descend)
        }
        GanVariant::Bigan => {
            let real = real.ok_or_else(|| GanError::Config("BIGAN generator step needs a real batch".into()))?;
            let enc = bundle.encoder.as_ref().ok_or(GanError::WrongVariant(v))?;
            let e_nodes = bind(&mut g, enc, true);
            trainable.push((Role::Encoder, e_nodes.clone()));
            let x_real = g.input("x", real.x.clone());
            let ex = term("E(x)", enc.mlp.forward(&mut g, x_real, &e_nodes))?;
            let pair = g.concat_cols(&[x_real, ex])?;
            let d_real = term("D(x, E(x))", bundle.discriminator.mlp.forward(&mut g, pair, &d_nodes))?;
            let a = term("log D(x, E(x))", mean_log(&mut g, d_real))?;
            let b = term("log(1 - D(G(z), z))", mean_log_one_minus(&mut g, d_fake))?;
            (term("bidirectional objective", g.add(a, b))?, Direction::Descend)
        }
    };
    Ok(Objective {
        graph: g,
        value,
        direction,
        trainable,
        real_score: None,
    })
}

/// Scalar value of the discriminator-side objective.
pub fn discriminator_loss(
    bundle: &ModelBundle,
    real: &RealBatch,
    fake: &FakeBatch,
    cfg: &LossConfig,
    rho: Option<&[f64]>,
) -> Result<Tensor, GanError> {
    let obj = discriminator_objective(bundle, real, fake, cfg, rho)?;
    Ok(obj.graph.value(obj.value)?.clone())
}

/// Scalar value of the generator-side objective.
pub fn generator_loss(
    bundle: &ModelBundle,
    fake: &FakeBatch,
    real: Option<&RealBatch>,
    cfg: &LossConfig,
) -> Result<Tensor, GanError> {
    let obj = generator_objective(bundle, fake, real, cfg)?;
    Ok(obj.graph.value(obj.value)?.clone())
}
