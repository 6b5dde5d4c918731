use rand::Rng;

use super::MacConfig;
use crate::time::Micros;

/// Forwarder contention timer: `csa * T_max / NSA + U[0, T_max / NSA)`.
pub fn forwarder_timer<R: Rng + ?Sized>(csa: usize, cfg: &MacConfig, rng: &mut R) -> Micros {
    debug_assert!(csa < cfg.nsa);
    let slot = cfg.t_max.0 / cfg.nsa as f64;
    Micros(csa as f64 * slot + rng.gen::<f64>() * slot)
}

/// Time the source waits, from the start of DATA, for a CTF to end.
pub fn ts1_initial(cfg: &MacConfig) -> Micros {
    cfg.t_data + cfg.t_ctf + cfg.t_max
}

/// Time the source waits, from the end of the CTF, for the ACK to end.
pub fn ts1_updated(cfg: &MacConfig, coop: bool) -> Micros {
    if coop {
        cfg.t_sel + cfg.t_max + cfg.t_data + cfg.t_ack
    } else {
        cfg.t_sel + cfg.t_ack
    }
}

/// Time the forwarder waits, from the start of its CTF, before it decides.
pub fn tf1(cfg: &MacConfig, coop: bool) -> Micros {
    if coop {
        cfg.t_ctf + cfg.t_sel + cfg.t_max + cfg.t_data
    } else {
        cfg.t_ctf + cfg.t_sel
    }
}
