use rand::Rng as _;

use super::losses::generator_input;
use super::{FakeBatch, GanError, GanVariant, ModelBundle};
use crate::rng::{derive_seed, rng};
use crate::sample::SampleSet;
use crate::tensor::{ExprGraph, Tensor};

/// Labels (CGAN/ACGAN) or row-major code indices (InfoGAN) for generation.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Conditioning {
    #[default]
    None,
    Labels(Vec<usize>),
    Codes(Vec<usize>),
}

fn check_conditioning(bundle: &ModelBundle, rows: usize, cond: &Conditioning) -> Result<(), GanError> {
    let v = bundle.variant();
    match cond {
        Conditioning::None if v.is_conditioned() => Err(GanError::MissingLabels(v)),
        Conditioning::Labels(l) if v.is_conditioned() => {
            if l.len() != rows {
                return Err(GanError::BatchMismatch { real: rows, fake: l.len() });
            }
            Ok(())
        }
        Conditioning::Labels(_) => Err(GanError::WrongVariant(v)),
        Conditioning::Codes(c) if v == GanVariant::InfoGan => {
            let nf = bundle.spec.code_factors.len();
            if c.len() != rows * nf {
                return Err(GanError::BatchMismatch { real: rows * nf, fake: c.len() });
            }
            Ok(())
        }
        Conditioning::Codes(_) => Err(GanError::WrongVariant(v)),
        Conditioning::None => Ok(()),
    }
}

/// Uniform code draws for every factor of every row.
pub fn sample_codes(rng: &mut crate::rng::Rng, factors: &[usize], rows: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(rows * factors.len());
    for _ in 0..rows {
        for &k in factors {
            out.push(rng.random_range(0..k));
        }
    }
    out
}

/// `G(z)` for explicit noise rows, in normalized space.
pub fn generate_from_noise(bundle: &ModelBundle, z: &Tensor, cond: &Conditioning) -> Result<Tensor, GanError> {
    check_conditioning(bundle, z.rows(), cond)?;
    let drawn;
    let codes = match cond {
        Conditioning::Codes(c) => Some(c.as_slice()),
        _ if bundle.variant() == GanVariant::InfoGan => {
            drawn = sample_codes(&mut rng(derive_seed(0, "codes")), &bundle.spec.code_factors, z.rows());
            Some(drawn.as_slice())
        }
        _ => None,
    };
    let labels = match cond {
        Conditioning::Labels(l) => Some(l.as_slice()),
        _ => None,
    };
    let mut g = ExprGraph::new();
    let nodes = bundle.generator.params.bind_frozen(&mut g);
    let input = generator_input(&mut g, bundle, &FakeBatch { z, labels, codes })?;
    let out = bundle.generator.mlp.forward(&mut g, input, &nodes)?;
    Ok(g.value(out)?.clone())
}

/// `n` synthetic rows from fresh prior noise; a pure function of
/// `(bundle, n, seed, cond)`. InfoGAN codes are drawn uniformly when not
/// given.
pub fn generate(bundle: &ModelBundle, n: usize, seed: u64, cond: &Conditioning) -> Result<SampleSet, GanError> {
    check_conditioning(bundle, n, cond)?;
    if n == 0 {
        return Ok(SampleSet::empty(bundle.data_dim()));
    }
    let z = bundle.prior.sample_tensor(&mut rng(seed), n);
    let cond = match cond {
        Conditioning::None if bundle.variant() == GanVariant::InfoGan => Conditioning::Codes(sample_codes(
            &mut rng(derive_seed(seed, "codes")),
            &bundle.spec.code_factors,
            n,
        )),
        other => other.clone(),
    };
    let x = generate_from_noise(bundle, &z, &cond)?;
    let set = SampleSet::from_tensor(&x)?;
    Ok(match cond {
        Conditioning::Labels(l) => set.with_labels(l)?,
        _ => set,
    })
}

/// BiGAN encoder `E(x)`, shape `(rows, L)`.
pub fn encode(bundle: &ModelBundle, x: &Tensor) -> Result<Tensor, GanError> {
    let enc = bundle.encoder.as_ref().ok_or(GanError::WrongVariant(bundle.variant()))?;
    if x.cols() != bundle.data_dim() {
        return Err(GanError::DataWidth {
            expected: bundle.data_dim(),
            got: x.cols(),
        });
    }
    enc.predict(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gan::{build_model, ArchConfig, ModelSpec};
    use crate::nn::Activation;

    fn small(v: GanVariant) -> ModelBundle {
        let arch = ArchConfig::uniform(&[8], Activation::LeakyRelu(0.2));
        build_model(&ModelSpec::new(v, 7, 100, 3).with_classes(3).with_arch(arch)).unwrap()
    }

    #[test]
    fn empty_generation() {
        let s = generate(&small(GanVariant::Vanilla), 0, 1, &Conditioning::None).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.cols(), 7);
    }

    #[test]
    fn tanh_range_and_determinism() {
        let b = small(GanVariant::Wgan);
        let a = generate(&b, 50, 9, &Conditioning::None).unwrap();
        assert!(a.data().iter().all(|v| (-1.0..=1.0).contains(v)));
        assert_eq!(a, generate(&b, 50, 9, &Conditioning::None).unwrap());
    }

    #[test]
    fn conditioned_needs_labels() {
        let b = small(GanVariant::Cgan);
        assert!(matches!(
            generate(&b, 4, 0, &Conditioning::None),
            Err(GanError::MissingLabels(GanVariant::Cgan))
        ));
        let s = generate(&b, 3, 0, &Conditioning::Labels(vec![0, 1, 2])).unwrap();
        assert_eq!(s.labels(), Some(&[0, 1, 2][..]));
    }

    #[test]
    fn encode_shapes_and_rows() {
        let b = small(GanVariant::Bigan);
        let x = Tensor::new(vec![5, 7], (0..35).map(|i| i as f64 / 35.0).collect()).unwrap();
        let z = encode(&b, &x).unwrap();
        assert_eq!(z.shape(), &[5, 100]);
        assert_eq!(z, encode(&b, &x).unwrap());
        let one = Tensor::new(vec![1, 7], x.row(2).to_vec()).unwrap();
        assert_eq!(encode(&b, &one).unwrap().row(0), z.row(2));
        assert!(matches!(
            encode(&small(GanVariant::Vanilla), &x),
            Err(GanError::WrongVariant(_))
        ));
    }
}
