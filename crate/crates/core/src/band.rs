//! Crossing frequencies of the noise curves with the oscillator SQL and the
//! entanglement-feasibility verdict derived from them.

use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use crate::params::InterferometerConfig;
use crate::spectra::{CurveLabel, FrequencyGrid, SpectraError, SpectralCurve};

/// Minimum ratio between the sensing and force crossings.
pub const CRITICAL_RATIO: f64 = 2.0;

/// Relative bracket width at which bisection stops.
pub const CROSSING_RTOL: f64 = 1e-12;

/// Upper edge of the band searched by [`analyze`], Hz.
pub const SEARCH_F_MAX: f64 = 1e7;

pub const DEFAULT_POINTS_PER_DECADE: usize = 50;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BandError {
    #[error("no crossing between {a} and {b} in [{lo}, {hi}] Hz")]
    NoCrossing { a: CurveLabel, b: CurveLabel, lo: f64, hi: f64 },
    #[error("ambiguous bracket: {a} and {b} cross {count} times in [{lo}, {hi}] Hz")]
    AmbiguousBracket {
        a: CurveLabel,
        b: CurveLabel,
        lo: f64,
        hi: f64,
        count: usize,
    },
    #[error("curves {0} and {1} are sampled on different grids")]
    GridMismatch(CurveLabel, CurveLabel),
    #[error("invalid bracket [{0}, {1}]")]
    InvalidBracket(f64, f64),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

/// Frequency inside `bracket` where curve `a` equals curve `b`.
///
/// The sampled curves locate the sign change of A − B; the crossing is then
/// refined by bisection in log-frequency on the continuous models, so the
/// result does not depend on the grid density.
pub fn find_crossing(
    cfg: &InterferometerConfig,
    a: &SpectralCurve,
    b: &SpectralCurve,
    bracket: (f64, f64),
) -> Result<f64, BandError> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(BandError::InvalidBracket(lo, hi));
    }
    if a.frequencies != b.frequencies {
        return Err(BandError::GridMismatch(a.label, b.label));
    }
    let diff = |f: f64| -> Result<f64, SpectraError> { Ok(a.label.evaluate(cfg, f)? - b.label.evaluate(cfg, f)?) };

    let mut samples = vec![(lo, diff(lo)?)];
    samples.extend(
        a.frequencies
            .iter()
            .zip(a.values.iter().zip(&b.values))
            .filter(|(f, _)| **f > lo && **f < hi)
            .map(|(f, (va, vb))| (*f, va - vb)),
    );
    samples.push((hi, diff(hi)?));

    let signed: Vec<(f64, i8)> = samples.iter().map(|&(f, d)| (f, sign(d))).collect();
    let zeros: Vec<f64> = signed.iter().filter(|(_, s)| *s == 0).map(|(f, _)| *f).collect();
    if zeros.len() == signed.len() || zeros.len() > 1 {
        return Err(BandError::AmbiguousBracket {
            a: a.label,
            b: b.label,
            lo,
            hi,
            count: zeros.len(),
        });
    }

    let nonzero: Vec<(f64, i8)> = signed.iter().copied().filter(|(_, s)| *s != 0).collect();
    let changes: Vec<(f64, f64)> = nonzero
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| (w[0].0, w[1].0))
        .collect();

    match (changes.len(), zeros.first()) {
        (0, _) => Err(BandError::NoCrossing { a: a.label, b: b.label, lo, hi }),
        (1, Some(&f)) => Ok(f),
        (1, None) => bisect(&diff, changes[0]),
        (count, _) => Err(BandError::AmbiguousBracket {
            a: a.label,
            b: b.label,
            lo,
            hi,
            count,
        }),
    }
}

fn bisect<F>(diff: &F, (mut lo, mut hi): (f64, f64)) -> Result<f64, BandError>
where
    F: Fn(f64) -> Result<f64, SpectraError>,
{
    let lo_sign = sign(diff(lo)?);
    for _ in 0..200 {
        if (hi - lo) <= CROSSING_RTOL * lo {
            break;
        }
        let mid = (lo * hi).sqrt();
        match sign(diff(mid)?) {
            0 => return Ok(mid),
            s if s == lo_sign => lo = mid,
            _ => hi = mid,
        }
    }
    Ok((lo * hi).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandReport {
    /// Total classical force noise meets the oscillator SQL, Hz.
    pub f_force_cross: Option<f64>,
    pub f_sensing_cross: Option<f64>,
    pub f_backaction_cross: Option<f64>,
    pub f_shot_cross: Option<f64>,
    /// Total quantum noise touches the SQL (shot = back-action), Hz.
    pub f_sql_touch: Option<f64>,
    pub ratio: Option<f64>,
    #[serde(rename = "tau_F")]
    pub tau_f: Option<f64>,
    pub tau_q: Option<f64>,
    #[serde(rename = "tau_V_bounds")]
    pub tau_v_bounds: Option<(f64, f64)>,
    pub feasible: bool,
}

impl BandReport {
    pub fn tau_f_ms(&self) -> Option<f64> {
        self.tau_f.map(|t| t * 1e3)
    }

    pub fn tau_q_ms(&self) -> Option<f64> {
        self.tau_q.map(|t| t * 1e3)
    }
}

fn timescale(f: Option<f64>) -> Option<f64> {
    f.map(|f| 1.0 / (2.0 * PI * f))
}

/// Runs the crossing analysis on the default search grid.
pub fn analyze(cfg: &InterferometerConfig) -> Result<BandReport, BandError> {
    analyze_with_resolution(cfg, DEFAULT_POINTS_PER_DECADE)
}

/// Crossing analysis above the pendulum resonance, where every ratio of a
/// curve to the oscillator SQL is monotonic in frequency.
pub fn analyze_with_resolution(
    cfg: &InterferometerConfig,
    points_per_decade: usize,
) -> Result<BandReport, BandError> {
    let f0 = cfg.derive().pendulum_frequency_hz();
    let bracket = (f0, SEARCH_F_MAX.max(10.0 * f0));
    let grid = FrequencyGrid::logarithmic(bracket.0, bracket.1, points_per_decade)?;

    let sample = |label| SpectralCurve::sample(label, cfg, &grid);
    let sql = sample(CurveLabel::HarmonicSql)?;
    let crossing = |label: CurveLabel, against: &SpectralCurve| -> Option<f64> {
        let curve = sample(label).ok()?;
        find_crossing(cfg, &curve, against, bracket).ok()
    };

    let f_force_cross = crossing(CurveLabel::TotalForce, &sql);
    let f_sensing_cross = crossing(CurveLabel::Sensing, &sql);
    let f_backaction_cross = crossing(CurveLabel::Backaction, &sql);
    let f_shot_cross = crossing(CurveLabel::Shot, &sql);
    let f_sql_touch = SpectralCurve::sample(CurveLabel::Backaction, cfg, &grid)
        .ok()
        .and_then(|ba| crossing(CurveLabel::Shot, &ba));

    let ratio = f_sensing_cross.zip(f_force_cross).map(|(s, f)| s / f);
    let tau_f = timescale(f_force_cross);
    let tau_q = timescale(f_backaction_cross);
    let tau_v_bounds = tau_q.zip(tau_f);

    let all_defined = f_force_cross.is_some()
        && f_sensing_cross.is_some()
        && f_backaction_cross.is_some()
        && f_shot_cross.is_some()
        && f_sql_touch.is_some();
    let feasible = all_defined
        && matches!(ratio, Some(r) if r > CRITICAL_RATIO)
        && f_force_cross < f_sensing_cross
        && matches!(tau_v_bounds, Some((q, f)) if q < f);

    Ok(BandReport {
        f_force_cross,
        f_sensing_cross,
        f_backaction_cross,
        f_shot_cross,
        f_sql_touch,
        ratio,
        tau_f,
        tau_q,
        tau_v_bounds,
        feasible,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::CONSTANTS;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    /// Solves |D(Ω)| = threshold above resonance in closed form:
    /// (Ω² − Ω0²)² + Ω²Ω0²/Q² = threshold².
    fn closed_form_crossing(cfg: &InterferometerConfig, threshold: f64) -> f64 {
        let w0 = cfg.derive().pendulum_omega0;
        let w02 = w0 * w0;
        let k = w02 / (cfg.quality_q * cfg.quality_q);
        // u = Ω²: u² − (2Ω0² − k)u + Ω0⁴ − threshold² = 0
        let b = 2.0 * w02 - k;
        let c = w02 * w02 - threshold * threshold;
        let u = (b + (b * b - 4.0 * c).sqrt()) / 2.0;
        u.sqrt() / (2.0 * PI)
    }

    fn thresholds(cfg: &InterferometerConfig) -> (f64, f64, f64) {
        let d = cfg.derive();
        let m = d.reduced_mass_m;
        let thermal = 2.0 * d.pendulum_omega0 * CONSTANTS.k_b * cfg.temperature_t / (CONSTANTS.hbar * cfg.quality_q);
        let sensing = 2.0 * CONSTANTS.hbar / (m * cfg.sensing_noise_asd * cfg.sensing_noise_asd);
        let pg = cfg.circulating_power_p * cfg.signal_recycling_gain_g;
        let backaction = d.optical_omega * pg / (CONSTANTS.c * CONSTANTS.c * m);
        (thermal, sensing, backaction)
    }

    #[test]
    fn default_crossings_match_closed_forms() {
        let cfg = InterferometerConfig::default();
        let report = analyze(&cfg).unwrap();
        let (thermal, sensing, backaction) = thresholds(&cfg);

        let force = report.f_force_cross.unwrap();
        assert!(rel(force, closed_form_crossing(&cfg, thermal)) < 1e-9);
        assert!(rel(force, 87.099_234_226_732_28) < 1e-9);

        let sense = report.f_sensing_cross.unwrap();
        assert!(rel(sense, closed_form_crossing(&cfg, sensing)) < 1e-9);
        assert!(rel(sense, 2067.370_169_484_001) < 1e-9);

        let ba = report.f_backaction_cross.unwrap();
        assert!(rel(ba, closed_form_crossing(&cfg, backaction)) < 1e-9);
        assert!(rel(ba, 234.097_695_635_771_7) < 1e-9);

        assert!(rel(report.f_shot_cross.unwrap(), closed_form_crossing(&cfg, 4.0 * backaction)) < 1e-9);
        assert!(rel(report.f_sql_touch.unwrap(), closed_form_crossing(&cfg, 2.0 * backaction)) < 1e-9);
        assert!(rel(report.f_sql_touch.unwrap(), 331.062_885_118_946_2) < 1e-9);

        assert!(rel(report.ratio.unwrap(), 23.735_801_902_716_26) < 1e-8);
        assert!(rel(report.tau_f.unwrap(), 1.827_282_920_508_707e-3) < 1e-9);
        assert!(rel(report.tau_q.unwrap(), 6.798_654_837_658_956e-4) < 1e-9);
        assert_eq!(report.tau_v_bounds, Some((report.tau_q.unwrap(), report.tau_f.unwrap())));
        assert!(report.feasible);
    }

    #[test]
    fn find_crossing_on_a_small_bracket() {
        let cfg = InterferometerConfig::default();
        let grid = FrequencyGrid::logarithmic(10.0, 1000.0, 20).unwrap();
        let th = SpectralCurve::sample(CurveLabel::PendulumThermal, &cfg, &grid).unwrap();
        let sql = SpectralCurve::sample(CurveLabel::HarmonicSql, &cfg, &grid).unwrap();
        let f = find_crossing(&cfg, &th, &sql, (10.0, 1000.0)).unwrap();
        assert!(rel(f, 87.099_234_226_732_28) < 1e-9);

        let sense = SpectralCurve::sample(CurveLabel::Sensing, &cfg, &grid).unwrap();
        assert!(matches!(
            find_crossing(&cfg, &sense, &sql, (10.0, 1000.0)),
            Err(BandError::NoCrossing { .. })
        ));
    }

    #[test]
    fn identical_curves_are_ambiguous() {
        let cfg = InterferometerConfig::default();
        let grid = FrequencyGrid::logarithmic(10.0, 1000.0, 5).unwrap();
        let sql = SpectralCurve::sample(CurveLabel::HarmonicSql, &cfg, &grid).unwrap();
        assert!(matches!(
            find_crossing(&cfg, &sql, &sql, (10.0, 1000.0)),
            Err(BandError::AmbiguousBracket { .. })
        ));
    }

    #[test]
    fn two_crossings_around_resonance_are_ambiguous() {
        // Below resonance |D| falls towards Ω0²/Q, so the thermal curve
        // crosses the SQL once on each side of the peak when T is tiny.
        let cfg = InterferometerConfig { temperature_t: 2e-4, ..Default::default() };
        let grid = FrequencyGrid::logarithmic(0.1, 10.0, 200).unwrap();
        let th = SpectralCurve::sample(CurveLabel::PendulumThermal, &cfg, &grid).unwrap();
        let sql = SpectralCurve::sample(CurveLabel::HarmonicSql, &cfg, &grid).unwrap();
        assert!(matches!(
            find_crossing(&cfg, &th, &sql, (0.1, 10.0)),
            Err(BandError::AmbiguousBracket { count: 2, .. })
        ));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let cfg = InterferometerConfig::default();
        let a = SpectralCurve::sample(CurveLabel::Sensing, &cfg, &FrequencyGrid::logarithmic(1.0, 10.0, 5).unwrap()).unwrap();
        let b = SpectralCurve::sample(CurveLabel::HarmonicSql, &cfg, &FrequencyGrid::logarithmic(1.0, 10.0, 6).unwrap()).unwrap();
        assert!(matches!(find_crossing(&cfg, &a, &b, (1.0, 10.0)), Err(BandError::GridMismatch(..))));
    }

    #[test]
    fn missing_force_noise_is_infeasible() {
        let cfg = InterferometerConfig { temperature_t: 0.0, ..Default::default() };
        let report = analyze(&cfg).unwrap();
        assert_eq!(report.f_force_cross, None);
        assert_eq!(report.tau_f, None);
        assert_eq!(report.tau_v_bounds, None);
        assert!(!report.feasible);

        let dark = InterferometerConfig { circulating_power_p: 0.0, ..Default::default() };
        let report = analyze(&dark).unwrap();
        assert_eq!(report.f_backaction_cross, None);
        assert_eq!(report.f_shot_cross, None);
        assert!(report.f_force_cross.is_some());
        assert!(!report.feasible);
    }

    #[test]
    fn hotter_suspension_scales_force_crossing() {
        let base = analyze(&InterferometerConfig::default()).unwrap();
        let hot = analyze(&InterferometerConfig { temperature_t: 400.0, ..Default::default() }).unwrap();
        let scale = hot.f_force_cross.unwrap() / base.f_force_cross.unwrap();
        assert!((scale - 10.0).abs() < 1e-3, "{scale}");
        assert!(!hot.feasible, "ratio {:?}", hot.ratio);
    }

    #[test]
    fn classical_force_raises_force_crossing() {
        let base = analyze(&InterferometerConfig::default()).unwrap();
        let noisy = analyze(&InterferometerConfig { classical_force_noise_asd: 1e-14, ..Default::default() }).unwrap();
        assert!(noisy.f_force_cross.unwrap() > base.f_force_cross.unwrap());
    }

    #[test]
    fn resolution_does_not_move_crossings() {
        let cfg = InterferometerConfig::default();
        let fine = analyze_with_resolution(&cfg, 40).unwrap();
        let coarse = analyze_with_resolution(&cfg, 20).unwrap();
        for (a, b) in [
            (fine.f_force_cross, coarse.f_force_cross),
            (fine.f_sensing_cross, coarse.f_sensing_cross),
            (fine.f_backaction_cross, coarse.f_backaction_cross),
            (fine.f_shot_cross, coarse.f_shot_cross),
            (fine.f_sql_touch, coarse.f_sql_touch),
        ] {
            assert!(rel(a.unwrap(), b.unwrap()) < 1e-6);
        }
    }

    #[test]
    fn touch_is_geometric_mean_of_quantum_crossings() {
        let report = analyze(&InterferometerConfig::default()).unwrap();
        let gm = (report.f_shot_cross.unwrap() * report.f_backaction_cross.unwrap()).sqrt();
        assert!(rel(report.f_sql_touch.unwrap(), gm) < 1e-3);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn feasible_implies_generation_fits_in_decoherence_time(
            t in 0.01f64..300.0,
            p in 10.0f64..1e5,
            g in 1.0f64..5000.0,
            q in 1e4f64..1e9,
            asd in 1e-22f64..1e-19,
        ) {
            let cfg = InterferometerConfig {
                temperature_t: t,
                circulating_power_p: p,
                signal_recycling_gain_g: g,
                quality_q: q,
                sensing_noise_asd: asd,
                ..Default::default()
            };
            let report = analyze(&cfg).unwrap();
            if report.feasible {
                proptest::prop_assert!(report.tau_f.unwrap() > report.tau_q.unwrap());
                proptest::prop_assert!(report.ratio.unwrap() > CRITICAL_RATIO);
            }
        }
    }
}
