use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GanError;
use crate::nn::{Activation, Direction, OptimizerConfig, OptimizerKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GanVariant {
    Vanilla,
    Cgan,
    Acgan,
    Wgan,
    WganGp,
    InfoGan,
    Lsgan,
    Bigan,
}

impl GanVariant {
    pub const ALL: [GanVariant; 8] = [
        GanVariant::Vanilla,
        GanVariant::Cgan,
        GanVariant::Acgan,
        GanVariant::Wgan,
        GanVariant::WganGp,
        GanVariant::InfoGan,
        GanVariant::Lsgan,
        GanVariant::Bigan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GanVariant::Vanilla => "VANILLA",
            GanVariant::Cgan => "CGAN",
            GanVariant::Acgan => "ACGAN",
            GanVariant::Wgan => "WGAN",
            GanVariant::WganGp => "WGAN_GP",
            GanVariant::InfoGan => "INFOGAN",
            GanVariant::Lsgan => "LSGAN",
            GanVariant::Bigan => "BIGAN",
        }
    }

    /// Class labels feed the generator (and, for CGAN, the discriminator).
    pub fn is_conditioned(self) -> bool {
        matches!(self, GanVariant::Cgan | GanVariant::Acgan)
    }

    pub fn has_encoder(self) -> bool {
        self == GanVariant::Bigan
    }

    pub fn has_aux_head(self) -> bool {
        matches!(self, GanVariant::Acgan | GanVariant::InfoGan)
    }

    pub fn is_wasserstein(self) -> bool {
        matches!(self, GanVariant::Wgan | GanVariant::WganGp)
    }

    /// Output activation of D (or critic F).
    pub fn discriminator_output(self) -> Activation {
        match self {
            GanVariant::Wgan | GanVariant::WganGp | GanVariant::Lsgan => Activation::Linear,
            _ => Activation::Sigmoid,
        }
    }

    /// The direction in which the discriminator moves its objective.
    pub fn discriminator_direction(self) -> Direction {
        match self {
            GanVariant::Lsgan => Direction::Descend,
            _ => Direction::Ascend,
        }
    }

    pub fn supported_names() -> String {
        Self::ALL.iter().map(|v| v.name()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for GanVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GanVariant {
    type Err = GanError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        let key = if key == "GAN" { "VANILLA".to_string() } else { key };
        GanVariant::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| GanError::UnknownVariant {
                name: s.to_string(),
                supported: GanVariant::supported_names(),
            })
    }
}

/// Hyperparameters of the alternating training loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Outer iterations; each is `critic_steps` discriminator updates
    /// followed by one generator update.
    pub epochs: usize,
    pub critic_steps: usize,
    pub batch: usize,
    pub latent: usize,
    pub opt_g: OptimizerConfig,
    pub opt_d: OptimizerConfig,
    pub clip: f64,
    pub lambda_gp: f64,
    pub lambda_info: f64,
    pub seed: u64,
    /// Generator maximizes `log D(G(z))` instead of descending
    /// `log(1 - D(G(z)))`.
    pub non_saturating: bool,
    /// ACGAN: discriminator ascends `L_S + L_C` and the generator ascends
    /// `L_C - L_S`, instead of the default `L_S - L_C` / `L_S + L_C`.
    pub acgan_swap_objectives: bool,
    /// Compute an MMD² snapshot every this many epochs; 0 disables.
    pub snapshot_every: usize,
}

impl TrainConfig {
    /// Per-variant defaults: Adam at 2e-4 for the cross-entropy and
    /// least-squares models, RMSprop at 5e-5 with five critic steps for
    /// WGAN; latent 100, batch 64, 5000 epochs.
    pub fn for_variant(variant: GanVariant) -> Self {
        let adam = OptimizerConfig {
            kind: OptimizerKind::adam(),
            lr: 0.0002,
        };
        let mut cfg = Self {
            epochs: 5000,
            critic_steps: 1,
            batch: 64,
            latent: 100,
            opt_g: adam,
            opt_d: adam,
            clip: 0.01,
            lambda_gp: 10.0,
            lambda_info: 1.0,
            seed: 0,
            non_saturating: false,
            acgan_swap_objectives: false,
            snapshot_every: 0,
        };
        match variant {
            GanVariant::Wgan => {
                let rms = OptimizerConfig {
                    kind: OptimizerKind::rmsprop(),
                    lr: 0.00005,
                };
                cfg.opt_g = rms;
                cfg.opt_d = rms;
                cfg.critic_steps = 5;
            }
            GanVariant::WganGp => {
                let adam_gp = OptimizerConfig {
                    kind: OptimizerKind::Adam {
                        beta1: 0.5,
                        beta2: 0.9,
                        eps: 1e-8,
                    },
                    lr: 0.0001,
                };
                cfg.opt_g = adam_gp;
                cfg.opt_d = adam_gp;
                cfg.critic_steps = 5;
            }
            _ => {}
        }
        cfg
    }

    pub fn validate(&self) -> Result<(), GanError> {
        let bad = |what: &str| Err(GanError::Config(what.to_string()));
        if self.critic_steps == 0 {
            return bad("critic_steps must be at least 1");
        }
        if self.batch == 0 {
            return bad("batch must be positive");
        }
        if self.latent == 0 {
            return bad("latent must be positive");
        }
        if !(self.opt_g.lr > 0.0 && self.opt_d.lr > 0.0) {
            return bad("learning rates must be positive");
        }
        if !(self.clip > 0.0) {
            return bad("clip must be positive");
        }
        if self.lambda_gp < 0.0 || self.lambda_info < 0.0 {
            return bad("penalty weights must be non-negative");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_names() {
        assert_eq!("wgan-gp".parse::<GanVariant>().unwrap(), GanVariant::WganGp);
        assert_eq!("Vanilla".parse::<GanVariant>().unwrap(), GanVariant::Vanilla);
        for v in GanVariant::ALL {
            assert_eq!(v.name().parse::<GanVariant>().unwrap(), v);
        }
    }

    #[test]
    fn dcgan_rejected_with_supported_list() {
        let err = "DCGAN".parse::<GanVariant>().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("DCGAN"));
        for v in GanVariant::ALL {
            assert!(msg.contains(v.name()));
        }
    }

    #[test]
    fn table_defaults() {
        for v in [GanVariant::Vanilla, GanVariant::Cgan, GanVariant::Bigan, GanVariant::Lsgan] {
            let c = TrainConfig::for_variant(v);
            assert_eq!(c.opt_d.lr, 0.0002);
            assert!(matches!(c.opt_d.kind, OptimizerKind::Adam { beta1, .. } if beta1 == 0.5));
            assert_eq!((c.latent, c.batch, c.epochs), (100, 64, 5000));
        }
        let w = TrainConfig::for_variant(GanVariant::Wgan);
        assert_eq!(w.opt_d.lr, 0.00005);
        assert!(matches!(w.opt_d.kind, OptimizerKind::RmsProp { .. }));
        assert_eq!((w.critic_steps, w.clip), (5, 0.01));
        assert_eq!(TrainConfig::for_variant(GanVariant::WganGp).lambda_gp, 10.0);
        assert_eq!(TrainConfig::for_variant(GanVariant::InfoGan).lambda_info, 1.0);
    }

    #[test]
    fn zero_critic_steps_invalid() {
        let mut c = TrainConfig::for_variant(GanVariant::Vanilla);
        c.critic_steps = 0;
        assert!(c.validate().is_err());
    }
}
