//! Seeded synthetic cohorts standing in for a trained classifier and imputer.
//!
//! Logits are Gaussian around `±signal` for the two classes. Imputations are
//! centred on a blend of the acquired and available logits controlled by
//! `imp_fidelity`, with their own noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cohort::{Cohort, ScoreRecord};
use crate::error::{CamaError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n: usize,
    /// Imputation samples per record.
    pub k: usize,
    /// P(y = 1).
    pub prevalence: f64,
    /// Class separation of the pre-acquisition logits.
    pub signal_avail: f64,
    /// Class separation after acquisition.
    pub signal_acquired: f64,
    /// 0 centres imputations on `s_avail`, 1 on `s_acquired`.
    pub imp_fidelity: f64,
    pub noise_scale: f64,
    /// Scale of the per-imputation noise; `noise_scale` when unset.
    pub imp_noise_scale: Option<f64>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: 1000,
            k: 100,
            prevalence: 0.3,
            signal_avail: 0.5,
            signal_acquired: 1.5,
            imp_fidelity: 0.8,
            noise_scale: 1.0,
            imp_noise_scale: None,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CamaError::Precondition(msg));
        if self.n == 0 {
            return fail("cohort size must be positive".into());
        }
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return fail(format!("prevalence {} is not in (0, 1)", self.prevalence));
        }
        if !(self.signal_avail >= 0.0 && self.signal_avail.is_finite()) {
            return fail(format!("signal_avail {} must be finite and >= 0", self.signal_avail));
        }
        if !(self.signal_acquired >= self.signal_avail && self.signal_acquired.is_finite()) {
            return fail(format!(
                "signal_acquired {} must be finite and >= signal_avail {}",
                self.signal_acquired, self.signal_avail
            ));
        }
        if !(0.0..=1.0).contains(&self.imp_fidelity) {
            return fail(format!("imp_fidelity {} is not in [0, 1]", self.imp_fidelity));
        }
        if !(self.noise_scale > 0.0 && self.noise_scale.is_finite()) {
            return fail(format!("noise_scale {} must be finite and > 0", self.noise_scale));
        }
        if let Some(s) = self.imp_noise_scale {
            if !(s >= 0.0 && s.is_finite()) {
                return fail(format!("imp_noise_scale {s} must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

pub fn generate(config: &SynthConfig) -> Result<Cohort> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let imp_noise = config.imp_noise_scale.unwrap_or(config.noise_scale);
    let fid = config.imp_fidelity;

    let records = (0..config.n)
        .map(|i| {
            let label = u8::from(rng.random::<f64>() < config.prevalence);
            let sign = if label == 1 { 1.0 } else { -1.0 };
            let u: f64 = rng.sample(StandardNormal);
            let v: f64 = rng.sample(StandardNormal);
            let s_acquired = config.signal_acquired * sign + config.noise_scale * u;
            let s_avail = config.signal_avail * sign + config.noise_scale * v;
            let centre = fid * s_acquired + (1.0 - fid) * s_avail;
            let s_imp = (0..config.k)
                .map(|_| {
                    let w: f64 = rng.sample(StandardNormal);
                    centre + imp_noise * w
                })
                .collect();
            ScoreRecord {
                id: i as u64,
                label,
                s_avail,
                s_acquired,
                s_imp,
            }
        })
        .collect();
    Cohort::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::auroc;

    #[test]
    fn deterministic_in_seed() {
        let cfg = SynthConfig { n: 50, k: 3, seed: 7, ..Default::default() };
        assert_eq!(generate(&cfg).unwrap(), generate(&cfg).unwrap());
        let other = SynthConfig { seed: 8, ..cfg.clone() };
        assert_ne!(generate(&cfg).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn perfect_imputer_reproduces_acquired() {
        let cfg = SynthConfig {
            n: 200,
            k: 4,
            imp_fidelity: 1.0,
            imp_noise_scale: Some(0.0),
            ..Default::default()
        };
        let c = generate(&cfg).unwrap();
        for r in c.records() {
            assert!(r.s_imp.iter().all(|&s| s == r.s_acquired));
        }
    }

    #[test]
    fn zero_k_has_no_imputations() {
        let c = generate(&SynthConfig { n: 10, k: 0, ..Default::default() }).unwrap();
        assert_eq!(c.k(), 0);
    }

    #[test]
    fn null_signal_gives_chance_auroc() {
        let cfg = SynthConfig {
            n: 10_000,
            k: 0,
            signal_avail: 0.0,
            signal_acquired: 0.0,
            seed: 3,
            ..Default::default()
        };
        let c = generate(&cfg).unwrap();
        assert!((auroc(&c.pre_acquisition()).unwrap() - 0.5).abs() < 0.05);
        assert!((auroc(&c.post_acquisition()).unwrap() - 0.5).abs() < 0.05);
    }

    #[test]
    fn invalid_configs() {
        let base = SynthConfig::default();
        for bad in [
            SynthConfig { n: 0, ..base.clone() },
            SynthConfig { prevalence: 0.0, ..base.clone() },
            SynthConfig { prevalence: 1.0, ..base.clone() },
            SynthConfig { signal_avail: -1.0, ..base.clone() },
            SynthConfig { signal_acquired: 0.1, ..base.clone() },
            SynthConfig { imp_fidelity: 1.5, ..base.clone() },
            SynthConfig { noise_scale: 0.0, ..base.clone() },
            SynthConfig { imp_noise_scale: Some(-1.0), ..base.clone() },
        ] {
            assert!(matches!(generate(&bad), Err(CamaError::Precondition(_))), "{bad:?}");
        }
    }
}
