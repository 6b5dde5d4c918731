//! Link-level channel and error model.
//!
//! Symbols are never materialized. Each symbol sees an independent Rayleigh
//! fading power per link, and the coherent ML decision is realized as a
//! Bernoulli draw with the exact square M-QAM AWGN symbol error probability at
//! the instantaneous (combined) SNR. Maximum ratio combining adds SNRs.

use rand::Rng;

use crate::error::{Error, Result};

/// Square M-QAM constellation and its high-SNR error-rate constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QamParams {
    order: u32,
    /// `3 / (2 (M - 1))`: scales SNR inside the Q-function argument.
    pub decision_scale: f64,
    /// Weight of the source-relay link in the cooperative error rate.
    pub weight_sr: f64,
    /// Weight of the relay-forwarder link in the cooperative error rate.
    pub weight_rf: f64,
}

impl QamParams {
    pub fn new(order: u32) -> Result<Self> {
        let root = (order as f64).sqrt().round() as u32;
        if order < 4 || root * root != order {
            return Err(Error::InvalidConstellation(order));
        }
        let m = order as f64;
        let k = 1.0 - 1.0 / m.sqrt();
        let tail = k * k / std::f64::consts::PI;
        Ok(Self {
            order,
            decision_scale: 3.0 / (2.0 * (m - 1.0)),
            weight_sr: (m - 1.0) / (2.0 * m) + tail,
            weight_rf: 3.0 * (m - 1.0) / (8.0 * m) + tail,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> f64 {
        (self.order as f64).log2()
    }
}

/// Path-loss variance of one link, normalized to 1 at unit distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkStats {
    pub variance: f64,
}

impl LinkStats {
    pub fn new(variance: f64) -> Self {
        debug_assert!(variance > 0.0);
        Self { variance }
    }

    /// `d^-p`.
    pub fn from_distance(distance: f64, path_loss_exp: f64) -> Self {
        Self::new(distance.powf(-path_loss_exp))
    }
}

/// Variances of the three links of a cooperative hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoopLinks {
    pub source_forwarder: LinkStats,
    pub source_relay: LinkStats,
    pub relay_forwarder: LinkStats,
}

impl CoopLinks {
    pub fn unit() -> Self {
        let one = LinkStats::new(1.0);
        Self { source_forwarder: one, source_relay: one, relay_forwarder: one }
    }

    pub fn from_distances(d_sf: f64, d_sr: f64, d_rf: f64, path_loss_exp: f64) -> Self {
        Self {
            source_forwarder: LinkStats::from_distance(d_sf, path_loss_exp),
            source_relay: LinkStats::from_distance(d_sr, path_loss_exp),
            relay_forwarder: LinkStats::from_distance(d_rf, path_loss_exp),
        }
    }
}

/// How a relay decides, symbol by symbol, whether to forward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelayRule {
    /// Forward iff the relay's own decision for the symbol is correct.
    CorrectDecode,
    /// Forward iff the instantaneous source-relay SNR exceeds the threshold
    /// (linear).
    SnrThreshold(f64),
}

/// Transmit power, noise and path loss shared by all links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhyConfig {
    /// Total power `P` spent on one symbol; a cooperative symbol splits it
    /// evenly between the broadcast and relaying phases.
    pub total_power: f64,
    pub noise_power: f64,
    pub path_loss_exp: f64,
    pub relay_rule: RelayRule,
}

/// Symbol error rate at which the default relay threshold is placed.
pub const DEFAULT_THRESHOLD_SER: f64 = 1e-3;

impl PhyConfig {
    /// Configuration whose SNR `P / N0` at unit distance is `snr_db`.
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self {
            total_power: db_to_linear(snr_db),
            noise_power: 1.0,
            path_loss_exp: 2.0,
            relay_rule: RelayRule::CorrectDecode,
        }
    }

    pub fn with_relay_rule(mut self, rule: RelayRule) -> Self {
        self.relay_rule = rule;
        self
    }

    /// Per-phase power `P_x = P / 2`.
    pub fn per_phase_power(&self) -> f64 {
        self.total_power / 2.0
    }

    pub fn snr(&self) -> f64 {
        self.total_power / self.noise_power
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Exact symbol error probability of square M-QAM at SNR `snr` (per symbol)
/// over an AWGN channel.
pub fn awgn_ser(snr: f64, order: u32) -> f64 {
    let m = order as f64;
    let k = 1.0 - 1.0 / m.sqrt();
    let q = q_function((3.0 * snr.max(0.0) / (m - 1.0)).sqrt());
    (4.0 * k * q - 4.0 * k * k * q * q).clamp(0.0, 1.0)
}

/// Average square M-QAM symbol error probability over Rayleigh fading with
/// mean SNR `mean_snr`.
pub fn rayleigh_ser(mean_snr: f64, order: u32) -> f64 {
    let m = order as f64;
    let k = 1.0 - 1.0 / m.sqrt();
    let g = 1.5 * mean_snr / (m - 1.0);
    let mu = (g / (1.0 + g)).sqrt();
    let single = 0.5 * (1.0 - mu);
    let squared = if mu > 0.0 { 0.25 * (1.0 - 4.0 / std::f64::consts::PI * mu * (1.0 / mu).atan()) } else { 0.25 };
    (4.0 * k * single - 4.0 * k * k * squared).clamp(0.0, 1.0)
}

/// Probability that all `symbols` symbols of an uncoded packet are decoded
/// over independent Rayleigh symbol fades with mean SNR `mean_snr`.
pub fn packet_success_prob(mean_snr: f64, order: u32, symbols: usize) -> f64 {
    (1.0 - rayleigh_ser(mean_snr, order)).powi(symbols as i32)
}

/// SNR at which [`awgn_ser`] drops to `target`, by bisection.
pub fn snr_for_ser(target: f64, order: u32) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while awgn_ser(hi, order) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if awgn_ser(mid, order) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// The threshold relay rule with its default operating point.
pub fn default_threshold_rule(order: u32) -> RelayRule {
    RelayRule::SnrThreshold(snr_for_ser(DEFAULT_THRESHOLD_SER, order))
}

/// `|h|^2` for `h ~ CN(0, variance)`: exponential with the given mean.
///
/// Drawn by inversion so that every call consumes exactly one uniform; arms
/// simulated from the same seed then stay aligned symbol by symbol.
pub fn sample_fading_power<R: Rng + ?Sized>(variance: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    -variance * (1.0 - u).ln()
}

/// Bernoulli draw that always consumes exactly one uniform.
pub fn bernoulli<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.gen::<f64>() < p
}

/// Adaptive decode-and-forward indicator: forward iff the SNR strictly exceeds
/// the threshold.
pub fn relay_decodes(snr_sr: f64, threshold: f64) -> bool {
    snr_sr > threshold
}

/// Whether the relay forwards a symbol received at instantaneous SNR `snr_sr`.
/// Consumes one uniform under either rule.
pub fn relay_forwards<R: Rng + ?Sized>(rule: RelayRule, snr_sr: f64, order: u32, rng: &mut R) -> bool {
    let u: f64 = rng.gen();
    match rule {
        RelayRule::SnrThreshold(th) => relay_decodes(snr_sr, th),
        RelayRule::CorrectDecode => u >= awgn_ser(snr_sr, order),
    }
}

/// One symbol's transmission scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transmission {
    /// Source to forwarder with the full power `P`.
    Direct { source_forwarder: LinkStats },
    /// Two-phase decode-and-forward with `P / 2` per phase and MRC at the
    /// forwarder.
    Cooperative(CoopLinks),
}

/// Instantaneous SNR at the forwarder after combining, for one symbol.
pub fn sample_symbol_snr<R: Rng + ?Sized>(tx: Transmission, cfg: &PhyConfig, qam: &QamParams, rng: &mut R) -> f64 {
    match tx {
        Transmission::Direct { source_forwarder } => {
            cfg.total_power * sample_fading_power(source_forwarder.variance, rng) / cfg.noise_power
        }
        Transmission::Cooperative(links) => {
            let px = cfg.per_phase_power() / cfg.noise_power;
            let snr_sf = px * sample_fading_power(links.source_forwarder.variance, rng);
            let snr_sr = px * sample_fading_power(links.source_relay.variance, rng);
            let snr_rf = px * sample_fading_power(links.relay_forwarder.variance, rng);
            if relay_forwards(cfg.relay_rule, snr_sr, qam.order(), rng) {
                snr_sf + snr_rf
            } else {
                snr_sf
            }
        }
    }
}

/// Simulates one symbol; returns `true` on a symbol error at the forwarder.
pub fn simulate_symbol<R: Rng + ?Sized>(tx: Transmission, cfg: &PhyConfig, qam: &QamParams, rng: &mut R) -> bool {
    let snr = sample_symbol_snr(tx, cfg, qam, rng);
    bernoulli(awgn_ser(snr, qam.order()), rng)
}

/// High-SNR approximation of the cooperative symbol error rate at the
/// forwarder, `4 N0^2 / (b^2 Px^2 s_sf) (A^2 / s_sr + B / s_rf)`.
pub fn ser_closed_form(links: &CoopLinks, cfg: &PhyConfig, qam: &QamParams) -> f64 {
    let px = cfg.per_phase_power();
    let b = qam.decision_scale;
    let n0 = cfg.noise_power;
    4.0 * n0 * n0 / (b * b * px * px * links.source_forwarder.variance)
        * (qam.weight_sr * qam.weight_sr / links.source_relay.variance + qam.weight_rf / links.relay_forwarder.variance)
}

/// Coding gain of the cooperative link; the closed-form SER equals
/// `(gain * P / N0)^-2`.
pub fn coding_gain(links: &CoopLinks, qam: &QamParams) -> f64 {
    let b = qam.decision_scale;
    let m =
        qam.weight_sr * qam.weight_sr / links.source_relay.variance + qam.weight_rf / links.relay_forwarder.variance;
    (b * b * links.source_forwarder.variance / 16.0 / m).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qam_params_examples() {
        let q4 = QamParams::new(4).unwrap();
        assert_eq!(q4.decision_scale, 0.5);
        assert!((q4.weight_sr - 0.45458).abs() < 1e-5);
        assert!((q4.weight_rf - 0.36083).abs() < 1e-5);
        let q16 = QamParams::new(16).unwrap();
        assert!((q16.decision_scale - 0.1).abs() < 1e-15);
        assert!((q16.weight_sr - 0.64780).abs() < 1e-5);
        assert!((q16.weight_rf - 0.53061).abs() < 1e-5);
        assert_eq!(QamParams::new(3), Err(Error::InvalidConstellation(3)));
        assert_eq!(QamParams::new(128), Err(Error::InvalidConstellation(128)));
        assert_eq!(QamParams::new(1), Err(Error::InvalidConstellation(1)));
    }

    #[test]
    fn weights_ordered_and_bounded() {
        for m in [4, 16, 64, 256] {
            let q = QamParams::new(m).unwrap();
            assert!(q.weight_sr > q.weight_rf && q.weight_rf > 0.0, "M={m}");
            assert!(q.weight_sr < 1.0);
        }
    }

    #[test]
    fn awgn_ser_limits() {
        assert!((awgn_ser(0.0, 4) - 0.75).abs() < 1e-15);
        assert!(awgn_ser(1e4, 4) < 1e-300);
        let mut prev = 1.0;
        for i in 0..200 {
            let s = awgn_ser(i as f64 * 0.25, 16);
            assert!(s <= prev);
            prev = s;
        }
    }

    #[test]
    fn threshold_solves_target() {
        let th = snr_for_ser(1e-3, 4);
        assert!((awgn_ser(th, 4) - 1e-3).abs() < 1e-12);
        assert!(!relay_decodes(th, th));
        assert!(relay_decodes(2.0 * th, th));
        assert!(!relay_decodes(0.0, th));
    }

    #[test]
    fn fading_power_is_non_negative() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..10_000).all(|_| sample_fading_power(0.5, &mut rng) >= 0.0));
    }

    #[test]
    fn closed_form_examples() {
        let qam = QamParams::new(4).unwrap();
        let cfg = PhyConfig::from_snr_db(20.0);
        assert!((cfg.per_phase_power() - 50.0).abs() < 1e-9);
        let links = CoopLinks::unit();
        let ser = ser_closed_form(&links, &cfg, &qam);
        assert!((ser - 3.632e-3).abs() < 1e-6, "{ser}");

        let mut doubled = cfg;
        doubled.total_power *= 2.0;
        assert!((ser_closed_form(&links, &doubled, &qam) - ser / 4.0).abs() < 1e-15);

        let mut strong_sr = links;
        strong_sr.source_relay = LinkStats::new(1e12);
        let b = qam.decision_scale;
        let limit = 4.0 * qam.weight_rf / (b * b * 2500.0);
        assert!((ser_closed_form(&strong_sr, &cfg, &qam) - limit).abs() < 1e-12);
    }

    #[test]
    fn coding_gain_examples() {
        let qam = QamParams::new(4).unwrap();
        let links = CoopLinks::unit();
        let gain = coding_gain(&links, &qam);
        assert!((gain - 0.16594).abs() < 1e-5, "{gain}");
        let cfg = PhyConfig::from_snr_db(20.0);
        let via_gain = (gain * cfg.snr()).powi(-2);
        assert!((via_gain - ser_closed_form(&links, &cfg, &qam)).abs() < 1e-12);
        let c = 3.7;
        let scaled = CoopLinks {
            source_forwarder: LinkStats::new(c),
            source_relay: LinkStats::new(c),
            relay_forwarder: LinkStats::new(c),
        };
        // Uniform scaling of every variance scales the gain linearly.
        assert!((coding_gain(&scaled, &qam) - c * gain).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_ser_small_and_large_snr() {
        assert!((rayleigh_ser(0.0, 4) - 0.75).abs() < 1e-12);
        // High SNR: A / (b * snr).
        let q = QamParams::new(4).unwrap();
        let snr = 1e5;
        let approx = q.weight_sr / (q.decision_scale * snr);
        assert!((rayleigh_ser(snr, 4) / approx - 1.0).abs() < 1e-3);
    }
}
