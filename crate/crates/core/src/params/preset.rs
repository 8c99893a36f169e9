use super::{generate_prime_chain_split, CkksParams};
use crate::error::{Error, Result};

/// A named parameter set. `log_pq` is the target bit budget of the whole chain
/// where one is published for that configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub log_n: u32,
    pub l_max: usize,
    pub k: usize,
    pub dnum: usize,
    pub q_bits: u32,
    pub p_bits: u32,
    pub scale_bits: u32,
    pub log_pq: Option<u32>,
    pub batch_size: usize,
}

pub const PRESETS: &[Preset] = &[
    // Desk-scale set used by the test suites.
    Preset {
        name: "default",
        log_n: 13,
        l_max: 5,
        k: 2,
        dnum: 6,
        q_bits: 30,
        p_bits: 30,
        scale_bits: 40,
        log_pq: None,
        batch_size: 128,
    },
    Preset {
        name: "full",
        log_n: 16,
        l_max: 44,
        k: 1,
        dnum: 45,
        q_bits: 28,
        p_bits: 32,
        scale_bits: 40,
        log_pq: Some(1306),
        batch_size: 128,
    },
    Preset {
        name: "resnet20",
        log_n: 16,
        l_max: 29,
        k: 1,
        dnum: 30,
        q_bits: 27,
        p_bits: 30,
        scale_bits: 40,
        log_pq: Some(840),
        batch_size: 64,
    },
    Preset {
        name: "lr",
        log_n: 16,
        l_max: 38,
        k: 1,
        dnum: 39,
        q_bits: 27,
        p_bits: 32,
        scale_bits: 40,
        log_pq: Some(1092),
        batch_size: 64,
    },
    Preset {
        name: "lstm",
        log_n: 15,
        l_max: 25,
        k: 1,
        dnum: 26,
        q_bits: 27,
        p_bits: 32,
        scale_bits: 40,
        log_pq: Some(728),
        batch_size: 32,
    },
    Preset {
        name: "packed_boot",
        log_n: 16,
        l_max: 57,
        k: 1,
        dnum: 58,
        q_bits: 27,
        p_bits: 32,
        scale_bits: 40,
        log_pq: Some(1624),
        batch_size: 32,
    },
    Preset {
        name: "set_a",
        log_n: 12,
        l_max: 1,
        k: 2,
        dnum: 2,
        q_bits: 27,
        p_bits: 27,
        scale_bits: 25,
        log_pq: Some(108),
        batch_size: 128,
    },
    Preset {
        name: "set_b",
        log_n: 13,
        l_max: 2,
        k: 4,
        dnum: 1,
        q_bits: 31,
        p_bits: 31,
        scale_bits: 40,
        log_pq: Some(217),
        batch_size: 128,
    },
    Preset {
        name: "set_c",
        log_n: 14,
        l_max: 10,
        k: 8,
        dnum: 11,
        q_bits: 23,
        p_bits: 23,
        scale_bits: 40,
        log_pq: Some(437),
        batch_size: 128,
    },
];

impl Preset {
    pub fn by_name(name: &str) -> Result<&'static Preset> {
        PRESETS
            .iter()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::Parameter(format!("unknown preset {name:?}")))
    }

    pub fn n(&self) -> usize {
        1 << self.log_n
    }

    pub fn build(&self) -> Result<CkksParams> {
        let chain =
            generate_prime_chain_split(self.n(), self.l_max, self.k, self.q_bits, self.p_bits)?;
        CkksParams::new(self.dnum, self.scale_bits, chain)
    }
}
