use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FaultModel {
    /// Per-unit loss probability on a transfer that goes ahead.
    pub packet_loss_rate: f64,
    /// Per-link, per-slot outage probability.
    pub link_failure_rate: f64,
    pub rng_seed: u64,
    /// Keep lost units at the sender instead of discarding them.
    pub retransmit_lost: bool,
}

impl Default for FaultModel {
    fn default() -> Self {
        Self {
            packet_loss_rate: 0.0,
            link_failure_rate: 0.0,
            rng_seed: 0,
            retransmit_lost: true,
        }
    }
}

impl FaultModel {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn is_fault_free(&self) -> bool {
        self.packet_loss_rate == 0.0 && self.link_failure_rate == 0.0
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, p) in [
            ("packet_loss_rate", self.packet_loss_rate),
            ("link_failure_rate", self.link_failure_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} {p} outside [0, 1]"));
            }
        }
        Ok(())
    }

    pub fn injector(&self) -> FaultInjector {
        FaultInjector {
            model: *self,
            rng: ChaCha8Rng::seed_from_u64(self.rng_seed),
        }
    }
}

/// Seeded fault source. Draws happen in action order, so a fixed seed and
/// action sequence reproduce the same fault trace.
#[derive(Debug, Clone)]
pub struct FaultInjector {
    model: FaultModel,
    rng: ChaCha8Rng,
}

impl FaultInjector {
    pub fn model(&self) -> &FaultModel {
        &self.model
    }

    pub fn link_fails(&mut self) -> bool {
        let p = self.model.link_failure_rate;
        p > 0.0 && (p >= 1.0 || self.rng.gen_bool(p))
    }

    pub fn lost_units(&mut self, units: u64) -> u64 {
        let p = self.model.packet_loss_rate;
        if p <= 0.0 || units == 0 {
            0
        } else if p >= 1.0 {
            units
        } else {
            Binomial::new(units, p)
                .expect("probability validated")
                .sample(&mut self.rng)
        }
    }
}
