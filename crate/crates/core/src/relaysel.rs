//! Location-based relay selection.
//!
//! A candidate's metric `A^2 d_SR^p + B d_RF^p` is the only term of the
//! cooperative error rate that depends on the relay, so the smallest metric is
//! the best relay. The metric is normalized against its minimum over the plane
//! and its maximum over the relaying area, then mapped to a contention timer.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{distance, farthest_point, optimal_relay_point, NodeId, Position, RelayArea};
use crate::phy::QamParams;
use crate::time::Micros;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelayCandidate {
    pub id: NodeId,
    pub position: Position,
    pub metric: f64,
    /// Metric mapped into `[0, 1]`.
    pub normalized: f64,
    pub timer: Micros,
}

pub fn relay_metric(
    source: Position,
    forwarder: Position,
    relay: Position,
    path_loss_exp: f64,
    qam: &QamParams,
) -> f64 {
    let a2 = qam.weight_sr * qam.weight_sr;
    a2 * distance(source, relay).powf(path_loss_exp) + qam.weight_rf * distance(relay, forwarder).powf(path_loss_exp)
}

/// Lowest metric wins; ties go to the lowest node id. `None` for an empty set.
pub fn select_best(candidates: &[RelayCandidate]) -> Option<NodeId> {
    candidates.iter().min_by(|a, b| a.metric.total_cmp(&b.metric).then(a.id.cmp(&b.id))).map(|c| c.id)
}

/// Result of [`normalize_metric`]; `clamped` is set when the input fell
/// outside `[f_star, f_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalized {
    pub value: f64,
    pub clamped: bool,
}

pub fn normalize_metric(metric: f64, f_star: f64, f_max: f64) -> Result<Normalized> {
    if !(f_max > f_star) {
        return Err(Error::InvalidParameter {
            name: "f_max",
            reason: format!("must exceed f_star ({f_max} <= {f_star})"),
        });
    }
    let raw = (metric - f_star) / (f_max - f_star);
    let value = raw.clamp(0.0, 1.0);
    Ok(Normalized { value, clamped: value != raw })
}

/// `T_max * normalized + U[0, 2 T_max / NSA)`.
pub fn relay_timer<R: Rng + ?Sized>(normalized: f64, t_max: Micros, nsa: usize, rng: &mut R) -> Micros {
    let jitter: f64 = rng.gen::<f64>() * 2.0 * t_max.0 / nsa as f64;
    Micros(t_max.0 * normalized + jitter)
}

/// Minimizer of the metric over the plane. Closed form for `p = 2`; for other
/// exponents the minimizer lies on segment SF (projection onto the segment
/// shrinks both distances), where the metric is convex for `p >= 1`, so a
/// golden-section search on the segment parameter finds it.
pub fn optimal_point(source: Position, forwarder: Position, path_loss_exp: f64, qam: &QamParams) -> Result<Position> {
    if path_loss_exp == 2.0 {
        return optimal_relay_point(source, forwarder, qam.weight_sr, qam.weight_rf);
    }
    let along = forwarder - source;
    let f = |t: f64| relay_metric(source, forwarder, source + along * t, path_loss_exp, qam);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    Ok(source + along * (0.5 * (lo + hi)))
}

/// Normalization constants for one source-forwarder pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricScale {
    pub x_star: Position,
    pub f_star: f64,
    pub x_max: Position,
    pub f_max: f64,
}

impl MetricScale {
    pub fn new(
        source: Position,
        forwarder: Position,
        r: f64,
        area: RelayArea,
        path_loss_exp: f64,
        qam: &QamParams,
    ) -> Result<Self> {
        let x_star = optimal_point(source, forwarder, path_loss_exp, qam)?;
        let metric = |x: Position| relay_metric(source, forwarder, x, path_loss_exp, qam);
        let x_max = farthest_point(source, forwarder, r, area, x_star, metric);
        Ok(Self { x_star, f_star: metric(x_star), x_max, f_max: metric(x_max) })
    }

    pub fn normalize(&self, metric: f64) -> Result<Normalized> {
        normalize_metric(metric, self.f_star, self.f_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ApexSide;
    use crate::phy::{ser_closed_form, CoopLinks, PhyConfig};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64) -> Position {
        Position::new(x, y)
    }

    fn qpsk() -> QamParams {
        QamParams::new(4).unwrap()
    }

    fn cand(id: usize, metric: f64) -> RelayCandidate {
        RelayCandidate { id: NodeId(id), position: p(0.0, 0.0), metric, normalized: 0.0, timer: Micros::ZERO }
    }

    #[test]
    fn metric_examples() {
        let q = qpsk();
        let (s, f) = (p(0.0, 0.0), p(1.0, 0.0));
        let mid = relay_metric(s, f, p(0.5, 0.0), 2.0, &q);
        assert!((mid - 0.14187).abs() < 1e-5, "{mid}");
        assert_eq!(relay_metric(s, f, p(0.3, 0.2), 2.0, &q), relay_metric(s, f, p(0.3, -0.2), 2.0, &q));
        let x_star = optimal_point(s, f, 2.0, &q).unwrap();
        let best = relay_metric(s, f, x_star, 2.0, &q);
        assert!((best - 0.13140).abs() < 1e-5, "{best}");
        assert!(best < mid);
    }

    #[test]
    fn select_best_examples() {
        assert_eq!(select_best(&[cand(0, 0.5), cand(1, 0.14), cand(2, 0.3)]), Some(NodeId(1)));
        assert_eq!(select_best(&[cand(7, 0.9)]), Some(NodeId(7)));
        assert_eq!(select_best(&[]), None);
        assert_eq!(select_best(&[cand(4, 0.2), cand(2, 0.2)]), Some(NodeId(2)));
    }

    #[test]
    fn normalize_examples() {
        let n = |m| normalize_metric(m, 0.2, 0.6).unwrap();
        assert_eq!(n(0.2).value, 0.0);
        assert_eq!(n(0.6).value, 1.0);
        assert!((n(0.4).value - 0.5).abs() < 1e-12);
        assert!(!n(0.4).clamped);
        let out = n(0.7);
        assert_eq!(out.value, 1.0);
        assert!(out.clamped);
        assert!(normalize_metric(0.3, 0.5, 0.5).is_err());
    }

    #[test]
    fn relay_timer_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t_max = Micros(500.0);
        for _ in 0..10_000 {
            let t0 = relay_timer(0.0, t_max, 8, &mut rng);
            assert!(t0.0 >= 0.0 && t0.0 < 125.0);
            let t1 = relay_timer(1.0, t_max, 8, &mut rng);
            assert!(t1.0 >= 500.0 && t1.0 < 625.0);
            let a = relay_timer(0.1, t_max, 8, &mut rng);
            let b = relay_timer(0.9, t_max, 8, &mut rng);
            assert!(a.0 < 175.0 && b.0 >= 450.0 && a < b);
        }
    }

    #[test]
    fn optimal_point_general_exponent() {
        let q = qpsk();
        let (s, f) = (p(0.0, 0.0), p(1.0, 0.0));
        // Closed form agrees with a grid search along SF.
        let along = f - s;
        let metric = |t: f64| relay_metric(s, f, s + along * t, 2.0, &q);
        let closed = optimal_point(s, f, 2.0, &q).unwrap();
        let t_best =
            (0..=100_000).map(|i| i as f64 / 100_000.0).min_by(|a, b| metric(*a).total_cmp(&metric(*b))).unwrap();
        assert!((closed.x - t_best).abs() < 1e-4);
        for pl in [1.5, 3.0, 4.0] {
            let x = optimal_point(s, f, pl, &q).unwrap();
            let fx = relay_metric(s, f, x, pl, &q);
            for k in 0..8 {
                let th = k as f64 * std::f64::consts::FRAC_PI_4;
                let y = x + p(th.cos(), th.sin()) * 1e-4;
                assert!(fx <= relay_metric(s, f, y, pl, &q) + 1e-15, "p={pl}");
            }
        }
    }

    #[test]
    fn x_star_is_stationary() {
        let q = qpsk();
        let (s, f) = (p(0.0, 0.0), p(1.0, 0.0));
        let x = optimal_point(s, f, 2.0, &q).unwrap();
        let fx = relay_metric(s, f, x, 2.0, &q);
        for k in 0..8 {
            let th = k as f64 * std::f64::consts::FRAC_PI_4;
            assert!(fx <= relay_metric(s, f, x + p(th.cos(), th.sin()) * 1e-4, 2.0, &q));
        }
    }

    #[test]
    fn lens_scale_uses_circle_intersection() {
        let q = qpsk();
        let scale = MetricScale::new(p(0.0, 0.0), p(1.0, 0.0), 1.0, RelayArea::Lens, 2.0, &q).unwrap();
        assert!((scale.x_max.x - 0.5).abs() < 1e-3 && (scale.x_max.y.abs() - 0.866).abs() < 1e-3);
        let a2 = q.weight_sr * q.weight_sr;
        assert!((scale.f_max - (a2 + q.weight_rf)).abs() < 1e-6);
        assert!(scale.normalize(scale.f_star).unwrap().value == 0.0);
    }

    #[test]
    fn reuleaux_farthest_point_dominates_interior() {
        let q = qpsk();
        let (s, f) = (p(0.0, 0.0), p(1.0, 0.0));
        let area = RelayArea::Reuleaux(ApexSide::Left);
        let scale = MetricScale::new(s, f, 1.0, area, 2.0, &q).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 10_000 {
            let x = p(rng.gen_range(-0.1..1.1), rng.gen_range(-0.1..1.0));
            if crate::geometry::in_relaying_area(s, f, x, 1.0, area) {
                assert!(relay_metric(s, f, x, 2.0, &q) <= scale.f_max + 1e-9);
                checked += 1;
            }
        }
    }

    proptest! {
        #[test]
        fn argmin_invariant_under_affine_maps(
            metrics in proptest::collection::vec(0.0f64..10.0, 1..12),
            scale in 0.01f64..100.0,
            shift in -50.0f64..50.0,
        ) {
            let base: Vec<_> = metrics.iter().enumerate().map(|(i, &m)| cand(i, m)).collect();
            let mapped: Vec<_> = metrics.iter().enumerate().map(|(i, &m)| cand(i, scale * m + shift)).collect();
            let a = select_best(&base).unwrap();
            let b = select_best(&mapped).unwrap();
            // Affine rounding can only merge near-ties, which resolve to a lower id.
            prop_assert!(b == a || (mapped[b.0].metric == mapped[a.0].metric && b < a));
        }

        #[test]
        fn separated_metrics_give_ordered_timers(
            ni in 0.0f64..0.7,
            gap in 0.0f64..0.3,
            seed in any::<u64>(),
        ) {
            let nsa = 8;
            let nj = (ni + 2.0 / nsa as f64 + gap).min(1.0);
            prop_assume!(ni + 2.0 / nsa as f64 <= nj);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t_max = Micros(500.0);
            let ti = relay_timer(ni, t_max, nsa, &mut rng);
            let tj = relay_timer(nj, t_max, nsa, &mut rng);
            prop_assert!(ti < tj);
        }

        #[test]
        fn closed_form_ser_increases_with_metric(
            x1 in 0.0f64..1.0, y1 in -0.5f64..0.5,
            x2 in 0.0f64..1.0, y2 in -0.5f64..0.5,
        ) {
            let q = qpsk();
            let (s, f) = (p(0.0, 0.0), p(1.0, 0.0));
            let (r1, r2) = (p(x1, y1), p(x2, y2));
            prop_assume!(distance(s, r1) > 1e-6 && distance(f, r1) > 1e-6);
            prop_assume!(distance(s, r2) > 1e-6 && distance(f, r2) > 1e-6);
            let m1 = relay_metric(s, f, r1, 2.0, &q);
            let m2 = relay_metric(s, f, r2, 2.0, &q);
            let cfg = PhyConfig::from_snr_db(20.0);
            let ser = |r: Position| ser_closed_form(
                &CoopLinks::from_distances(1.0, distance(s, r), distance(r, f), 2.0), &cfg, &q);
            prop_assume!((m1 - m2).abs() > 1e-9);
            prop_assert_eq!(m1 < m2, ser(r1) < ser(r2));
        }

        #[test]
        fn metric_never_below_optimum(x in -1.0f64..2.0, y in -1.0f64..1.0) {
            let q = qpsk();
            let (s, f) = (p(0.0, 0.0), p(1.0, 0.0));
            let x_star = optimal_point(s, f, 2.0, &q).unwrap();
            prop_assert!(relay_metric(s, f, p(x, y), 2.0, &q) >= relay_metric(s, f, x_star, 2.0, &q) - 1e-12);
        }
    }
}
