//! Closed-form synthetic CCT generator.
//!
//! A toy alloy system with known ground truth: critical temperatures are
//! linear in composition, start temperatures fall linearly in log cooling
//! rate from their equilibrium anchors, phase presence switches at
//! composition-dependent rate cutoffs, and fractions follow a piecewise
//! linear weighting. Because every quantity has a formula, recovery error
//! of a trained stack can be measured exactly. Every coefficient is a
//! parameter, so tests can rig regimes (clamped bainite, missing phases)
//! that the default alloy box never produces. The default trends are
//! qualitative caricatures (for instance chromium lowering the toy Ac3),
//! not metallurgy to be quoted.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{
    Austenitization, Composition, DataPoint, Dataset, Element, PhaseRecord, ValidationError,
};
use crate::stack::PhasePrediction;

/// Default log10 rate at which starts sit exactly on their critical
/// temperatures.
pub const EQUILIBRIUM_LOG_RATE: f64 = -4.0;

#[derive(Debug, Clone, Error)]
pub enum OracleError {
    #[error("invalid oracle parameters: {0}")]
    InvalidParams(String),
    #[error("invalid oracle input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Data(#[from] ValidationError),
}

/// An affine function of composition: `base + sum(slope * wt%)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositionLinear {
    pub base: f64,
    pub slopes: Vec<(Element, f64)>,
}

impl CompositionLinear {
    pub fn new(base: f64, slopes: Vec<(Element, f64)>) -> Self {
        CompositionLinear { base, slopes }
    }

    pub fn eval(&self, c: &Composition) -> f64 {
        self.base + self.slopes.iter().map(|&(e, s)| s * c.get(e)).sum::<f64>()
    }

    fn is_finite(&self) -> bool {
        self.base.is_finite() && self.slopes.iter().all(|(_, s)| s.is_finite())
    }
}

/// The complete coefficient set of the toy alloy system plus the sampling
/// box for dataset generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub seed: u64,
    /// Gaussian noise applied to recorded temperatures (not fractions).
    pub noise_sigma: f64,
    /// log10 rate at which the ferrite and pearlite starts equal Ac3 and
    /// Ac1; must lie at or below the sampled rate grid.
    pub equilibrium_log_rate: f64,
    pub ac1: CompositionLinear,
    pub ac3: CompositionLinear,
    /// Degrees lost per decade of cooling rate by each start.
    pub ferrite_rate_slope: f64,
    pub pearlite_rate_slope: f64,
    pub bainite_start: CompositionLinear,
    pub bainite_rate_slope: f64,
    /// Rate-independent martensite start.
    pub martensite_start: CompositionLinear,
    /// Start-to-finish widths at the equilibrium rate.
    pub range_ferrite: CompositionLinear,
    pub range_pearlite: CompositionLinear,
    pub range_bainite: CompositionLinear,
    /// Width shrinkage per decade of rate for F, P, B.
    pub range_rate_slopes: [f64; 3],
    /// Floor on every width.
    pub min_range: f64,
    /// log10 rate up to which ferrite forms.
    pub ferrite_cutoff: CompositionLinear,
    /// Pearlite forms up to `ferrite + this`.
    pub pearlite_cutoff_offset: f64,
    /// Bainite appears from `ferrite - this` ...
    pub bainite_low_offset: f64,
    /// Martensite appears from `pearlite + this` ...
    pub martensite_onset_offset: f64,
    /// ... and bainite persists until `martensite + this`, so the phase
    /// windows always cover the whole rate axis.
    pub bainite_high_offset: f64,
    /// Unnormalized fraction weight (base, gain) per phase; the gain
    /// multiplies the phase's distance from its presence cutoff.
    pub fraction_weights: [(f64, f64); 4],
    /// Sampled composition box: (element, low, high) in weight percent.
    pub sample_box: Vec<(Element, f64, f64)>,
    pub aust_temp_range: (f64, f64),
    pub aust_time_range: (f64, f64),
    /// Cooling-rate grid endpoints, log10 K/s.
    pub rate_range: (f64, f64),
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            seed: 0,
            noise_sigma: 5.0,
            equilibrium_log_rate: EQUILIBRIUM_LOG_RATE,
            ac1: CompositionLinear::new(
                720.0,
                vec![(Element::C, -15.0), (Element::Cr, -6.0), (Element::Mn, -6.0)],
            ),
            ac3: CompositionLinear::new(
                860.0,
                vec![(Element::C, -80.0), (Element::Cr, -10.0), (Element::Mn, -10.0)],
            ),
            ferrite_rate_slope: 12.0,
            pearlite_rate_slope: 9.0,
            bainite_start: CompositionLinear::new(
                600.0,
                vec![(Element::C, -50.0), (Element::Cr, -22.0), (Element::Mn, -15.0)],
            ),
            bainite_rate_slope: 6.0,
            martensite_start: CompositionLinear::new(
                420.0,
                vec![(Element::C, -150.0), (Element::Cr, -18.0), (Element::Mn, -10.0)],
            ),
            range_ferrite: CompositionLinear::new(55.0, vec![(Element::C, 8.0)]),
            range_pearlite: CompositionLinear::new(45.0, vec![(Element::Cr, 5.0)]),
            range_bainite: CompositionLinear::new(90.0, vec![(Element::C, 10.0)]),
            range_rate_slopes: [4.0, 3.0, 8.0],
            min_range: 5.0,
            ferrite_cutoff: CompositionLinear::new(
                1.2,
                vec![(Element::C, -0.35), (Element::Cr, -0.22), (Element::Mn, -0.18)],
            ),
            pearlite_cutoff_offset: 0.4,
            bainite_low_offset: 0.3,
            martensite_onset_offset: 0.5,
            bainite_high_offset: 0.7,
            fraction_weights: [(0.2, 1.0), (0.15, 0.5), (0.25, 0.7), (0.2, 0.9)],
            sample_box: vec![
                (Element::C, 0.05, 1.0),
                (Element::Mn, 0.1, 2.0),
                (Element::Si, 0.05, 1.5),
                (Element::Cr, 0.1, 4.5),
            ],
            aust_temp_range: (950.0, 1100.0),
            aust_time_range: (300.0, 3600.0),
            rate_range: (-3.0, 3.2),
        }
    }
}

/// Phase-presence cutoffs in log10 rate for one alloy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoffs {
    /// Ferrite forms at rates up to here.
    pub ferrite_hi: f64,
    /// Pearlite forms at rates up to here.
    pub pearlite_hi: f64,
    /// Bainite forms between these two.
    pub bainite_lo: f64,
    pub bainite_hi: f64,
    /// Martensite forms at rates from here on.
    pub martensite_lo: f64,
}

impl OracleParams {
    pub fn validate(&self) -> Result<(), OracleError> {
        let bad = |m: String| Err(OracleError::InvalidParams(m));
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma must be non-negative, got {}", self.noise_sigma));
        }
        let (rl, rh) = self.rate_range;
        if !(rl.is_finite() && rh.is_finite() && rl < rh) {
            return bad(format!("rate_range must be an increasing interval, got [{rl}, {rh}]"));
        }
        if !(self.equilibrium_log_rate.is_finite() && self.equilibrium_log_rate <= rl) {
            return bad(format!(
                "equilibrium_log_rate {} must lie at or below the rate grid start {rl}",
                self.equilibrium_log_rate
            ));
        }
        let (tl, th) = self.aust_temp_range;
        if !(tl.is_finite() && th.is_finite() && 0.0 < tl && tl < th) {
            return bad(format!("aust_temp_range must be positive and increasing, got [{tl}, {th}]"));
        }
        let (sl, sh) = self.aust_time_range;
        if !(sl.is_finite() && sh.is_finite() && 0.0 < sl && sl < sh) {
            return bad(format!("aust_time_range must be positive and increasing, got [{sl}, {sh}]"));
        }
        if self.sample_box.is_empty() {
            return bad("sample_box must name at least one element".into());
        }
        for &(e, lo, hi) in &self.sample_box {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                return bad(format!("sample_box for {e:?} must satisfy 0 <= low < high, got [{lo}, {hi}]"));
            }
        }
        if !(self.min_range.is_finite() && self.min_range > 0.0) {
            return bad(format!("min_range must be positive, got {}", self.min_range));
        }
        for (name, v) in [
            ("pearlite_cutoff_offset", self.pearlite_cutoff_offset),
            ("bainite_low_offset", self.bainite_low_offset),
            ("martensite_onset_offset", self.martensite_onset_offset),
            ("bainite_high_offset", self.bainite_high_offset),
        ] {
            // Positive offsets keep the presence windows ordered and
            // overlapping, which guarantees a phase at every rate.
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("ferrite_rate_slope", self.ferrite_rate_slope),
            ("pearlite_rate_slope", self.pearlite_rate_slope),
            ("bainite_rate_slope", self.bainite_rate_slope),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if self.range_rate_slopes.iter().any(|s| !s.is_finite()) {
            return bad("range_rate_slopes must be finite".into());
        }
        for (k, &(base, gain)) in self.fraction_weights.iter().enumerate() {
            if !(base.is_finite() && base > 0.0 && gain.is_finite() && gain >= 0.0) {
                return bad(format!(
                    "fraction_weights[{k}] must have a positive base and non-negative gain, got ({base}, {gain})"
                ));
            }
        }
        for (name, lin) in [
            ("ac1", &self.ac1),
            ("ac3", &self.ac3),
            ("bainite_start", &self.bainite_start),
            ("martensite_start", &self.martensite_start),
            ("range_ferrite", &self.range_ferrite),
            ("range_pearlite", &self.range_pearlite),
            ("range_bainite", &self.range_bainite),
            ("ferrite_cutoff", &self.ferrite_cutoff),
        ] {
            if !lin.is_finite() {
                return bad(format!("{name} coefficients must be finite"));
            }
        }
        Ok(())
    }

    pub fn ac1_of(&self, c: &Composition) -> f64 {
        self.ac1.eval(c)
    }

    pub fn ac3_of(&self, c: &Composition) -> f64 {
        self.ac3.eval(c)
    }

    /// Ferrite start: anchored at Ac3 for the equilibrium rate, then
    /// falling.
    pub fn fs_of(&self, c: &Composition, log_rate: f64) -> f64 {
        self.ac3_of(c) - self.ferrite_rate_slope * (log_rate - self.equilibrium_log_rate)
    }

    /// Pearlite start: anchored at Ac1 for the equilibrium rate.
    pub fn ps_of(&self, c: &Composition, log_rate: f64) -> f64 {
        self.ac1_of(c) - self.pearlite_rate_slope * (log_rate - self.equilibrium_log_rate)
    }

    pub fn bs_of(&self, c: &Composition, log_rate: f64) -> f64 {
        self.bainite_start.eval(c)
            - self.bainite_rate_slope * (log_rate - self.equilibrium_log_rate)
    }

    /// Martensite start; rate-independent.
    pub fn ms_of(&self, c: &Composition) -> f64 {
        self.martensite_start.eval(c)
    }

    pub fn range_f_of(&self, c: &Composition, log_rate: f64) -> f64 {
        (self.range_ferrite.eval(c)
            - self.range_rate_slopes[0] * (log_rate - self.equilibrium_log_rate))
            .max(self.min_range)
    }

    pub fn range_p_of(&self, c: &Composition, log_rate: f64) -> f64 {
        (self.range_pearlite.eval(c)
            - self.range_rate_slopes[1] * (log_rate - self.equilibrium_log_rate))
            .max(self.min_range)
    }

    /// Bainite width before the martensite floor is applied.
    pub fn range_b_raw_of(&self, c: &Composition, log_rate: f64) -> f64 {
        (self.range_bainite.eval(c)
            - self.range_rate_slopes[2] * (log_rate - self.equilibrium_log_rate))
            .max(self.min_range)
    }

    pub fn cutoffs_of(&self, c: &Composition) -> Cutoffs {
        let ferrite_hi = self.ferrite_cutoff.eval(c);
        let pearlite_hi = ferrite_hi + self.pearlite_cutoff_offset;
        let martensite_lo = pearlite_hi + self.martensite_onset_offset;
        Cutoffs {
            ferrite_hi,
            pearlite_hi,
            bainite_lo: ferrite_hi - self.bainite_low_offset,
            bainite_hi: martensite_lo + self.bainite_high_offset,
            martensite_lo,
        }
    }

    /// Above this log rate the alloy is fully martensitic.
    pub fn martensite_only_cutoff(&self, c: &Composition) -> f64 {
        self.cutoffs_of(c).bainite_hi
    }
}

/// Noise-free ground truth at one (alloy, treatment, rate) point, in the
/// same shape the trained stack predicts. Starts are capped just under
/// the austenitization temperature; `clamp_applied` reports the bainite
/// finish hitting the martensite-start floor. The override and stacked-
/// feature flags stay false: the oracle has no such mechanisms.
pub fn oracle_truth(
    params: &OracleParams,
    composition: &Composition,
    aust: &Austenitization,
    log_rate: f64,
) -> Result<PhasePrediction, OracleError> {
    params.validate()?;
    if !log_rate.is_finite() {
        return Err(OracleError::InvalidInput(format!("non-finite log rate {log_rate}")));
    }
    if !(aust.temperature.is_finite() && aust.temperature > 0.0) {
        return Err(OracleError::InvalidInput(format!(
            "austenitization temperature must be positive, got {}",
            aust.temperature
        )));
    }

    let c = composition;
    let r = log_rate;
    let cuts = params.cutoffs_of(c);
    let present = [
        r <= cuts.ferrite_hi,
        r <= cuts.pearlite_hi,
        r >= cuts.bainite_lo && r <= cuts.bainite_hi,
        r >= cuts.martensite_lo,
    ];

    // Nothing transforms above the hold temperature.
    let cap = aust.temperature - 1.0;
    let ms = params.ms_of(c).min(cap);
    let bs = params.bs_of(c, r).min(cap);
    let bf_raw = bs - params.range_b_raw_of(c, r);
    let clamp_applied = present[2] && bf_raw < ms;
    let bf = bf_raw.max(ms);
    let fs = params.fs_of(c, r).min(cap);
    let ps = params.ps_of(c, r).min(cap);

    let start = [
        present[0].then_some(fs),
        present[1].then_some(ps),
        present[2].then_some(bs),
        present[3].then_some(ms),
    ];
    let finish = [
        present[0].then(|| fs - params.range_f_of(c, r)),
        present[1].then(|| ps - params.range_p_of(c, r)),
        present[2].then_some(bf),
        None,
    ];

    let w = &params.fraction_weights;
    let weights = [
        if present[0] { w[0].0 + w[0].1 * (cuts.ferrite_hi - r).clamp(0.0, 3.0) } else { 0.0 },
        if present[1] { w[1].0 + w[1].1 * (cuts.pearlite_hi - r).clamp(0.0, 3.0) } else { 0.0 },
        if present[2] {
            w[2].0 + w[2].1 * (r - cuts.bainite_lo).min(cuts.bainite_hi - r).clamp(0.0, 1.0)
        } else {
            0.0
        },
        if present[3] { w[3].0 + w[3].1 * (r - cuts.martensite_lo).clamp(0.0, 2.5) } else { 0.0 },
    ];
    let total: f64 = weights.iter().sum();
    let fractions = [
        weights[0] / total,
        weights[1] / total,
        weights[2] / total,
        weights[3] / total,
    ];

    Ok(PhasePrediction {
        log_rate,
        present,
        start,
        finish,
        fractions,
        ac1: params.ac1_of(c),
        ac3: params.ac3_of(c),
        override_applied: false,
        clamp_applied,
        fs_feature_raw: false,
    })
}

/// Samples `n_alloys` compositions and lays an `n_rates`-point uniform
/// log-rate grid over each, recording the oracle truth with Gaussian
/// noise on temperatures. Fractions and presence stay exact. Noise on the
/// critical temperatures is drawn once per diagram, as one measurement
/// would. Fully deterministic in `params.seed`.
pub fn generate_synthetic_dataset(
    params: &OracleParams,
    n_alloys: usize,
    n_rates: usize,
) -> Result<Dataset, OracleError> {
    params.validate()?;
    if n_alloys == 0 || n_rates < 2 {
        return Err(OracleError::InvalidInput(format!(
            "need at least one alloy and two rates, got {n_alloys} and {n_rates}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let noise = Normal::new(0.0, params.noise_sigma.max(0.0)).expect("sigma is non-negative");
    let draw = |rng: &mut ChaCha8Rng| {
        if params.noise_sigma > 0.0 {
            noise.sample(rng)
        } else {
            0.0
        }
    };

    let (rate_lo, rate_hi) = params.rate_range;
    let mut points = Vec::with_capacity(n_alloys * n_rates);
    for alloy in 0..n_alloys {
        let mut comp = Composition::new();
        for &(e, lo, hi) in &params.sample_box {
            comp.set(e, rng.random_range(lo..hi));
        }
        let aust = Austenitization {
            temperature: rng.random_range(params.aust_temp_range.0..params.aust_temp_range.1),
            time: rng.random_range(params.aust_time_range.0..params.aust_time_range.1),
            time_imputed: false,
        };
        let ac1 = params.ac1_of(&comp) + draw(&mut rng);
        let mut ac3 = params.ac3_of(&comp) + draw(&mut rng);
        if ac3 < ac1 {
            ac3 = ac1 + 1.0;
        }
        let diagram_id = format!("synth-{alloy:04}");

        for i in 0..n_rates {
            let log_rate = rate_lo + (rate_hi - rate_lo) * i as f64 / (n_rates - 1) as f64;
            let truth = oracle_truth(params, &comp, &aust, log_rate)?;
            let mut phases = [PhaseRecord::absent(); 4];
            for k in 0..4 {
                if !truth.present[k] {
                    phases[k] = PhaseRecord { fraction: Some(0.0), ..PhaseRecord::absent() };
                    continue;
                }
                let start = truth.start[k].unwrap() + draw(&mut rng);
                let start = start.min(aust.temperature - 1.0);
                let range = if k < 3 {
                    let width = truth.start[k].unwrap() - truth.finish[k].unwrap();
                    Some((width + draw(&mut rng)).clamp(1.0, start - 1.0))
                } else {
                    None
                };
                phases[k] = PhaseRecord {
                    present: true,
                    start_temp: Some(start),
                    range_temp: range,
                    fraction: Some(truth.fractions[k]),
                };
            }
            points.push(DataPoint {
                diagram_id: diagram_id.clone(),
                composition: comp,
                aust,
                log_rate,
                phases,
                ac1: Some(ac1),
                ac3: Some(ac3),
                synthetic: false,
            });
        }
    }
    Ok(Dataset::new(points)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(c: f64, mn: f64, si: f64, cr: f64) -> Composition {
        Composition::from_pairs(&[
            (Element::C, c),
            (Element::Mn, mn),
            (Element::Si, si),
            (Element::Cr, cr),
        ])
    }

    fn sample_comps() -> Vec<Composition> {
        let mut out = Vec::new();
        for &c in &[0.05, 0.3, 0.6, 1.0] {
            for &cr in &[0.1, 1.5, 3.0, 4.5] {
                out.push(comp(c, 0.8, 0.4, cr));
            }
        }
        out
    }

    fn hold() -> Austenitization {
        Austenitization { temperature: 1000.0, time: 600.0, time_imputed: false }
    }

    fn truth(p: &OracleParams, c: &Composition, r: f64) -> PhasePrediction {
        oracle_truth(p, c, &hold(), r).unwrap()
    }

    #[test]
    fn cutoffs_are_ordered_over_the_box() {
        let p = OracleParams::default();
        for c in sample_comps() {
            let k = p.cutoffs_of(&c);
            assert!(k.bainite_lo < k.ferrite_hi);
            assert!(k.ferrite_hi < k.pearlite_hi);
            assert!(k.pearlite_hi < k.martensite_lo);
            assert!(k.martensite_lo < k.bainite_hi);
            assert!(k.bainite_lo > -3.0 && k.bainite_hi < 3.2, "cutoffs inside grid");
        }
    }

    #[test]
    fn at_least_one_phase_everywhere_and_fractions_on_simplex() {
        let p = OracleParams::default();
        for c in sample_comps() {
            for i in 0..=62 {
                let r = -3.1 + 0.1 * i as f64;
                let t = truth(&p, &c, r);
                assert!(t.present.iter().any(|&x| x), "no phase at rate {r}");
                let sum: f64 = t.fractions.iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
                assert!(t.fractions.iter().all(|&f| (0.0..=1.0).contains(&f)));
                for k in 0..4 {
                    assert_eq!(t.present[k], t.start[k].is_some());
                    if !t.present[k] {
                        assert_eq!(t.fractions[k], 0.0);
                    } else {
                        assert!(t.fractions[k] > 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn truth_satisfies_the_prediction_invariants() {
        let p = OracleParams::default();
        for c in sample_comps() {
            for i in 0..=31 {
                let r = -3.1 + 0.2 * i as f64;
                let t = truth(&p, &c, r);
                assert!(t.invariant_violations().is_empty(), "{:?}", t.invariant_violations());
            }
        }
    }

    #[test]
    fn above_the_martensite_only_cutoff_everything_is_martensite() {
        let p = OracleParams::default();
        for c in sample_comps() {
            let r = p.martensite_only_cutoff(&c) + 0.01;
            let t = truth(&p, &c, r);
            assert_eq!(t.present, [false, false, false, true]);
            assert_eq!(t.fractions, [0.0, 0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn equilibrium_rate_anchors_starts_to_critical_temps() {
        let p = OracleParams::default();
        for c in sample_comps() {
            assert!((p.fs_of(&c, p.equilibrium_log_rate) - p.ac3_of(&c)).abs() < 1e-12);
            assert!((p.ps_of(&c, p.equilibrium_log_rate) - p.ac1_of(&c)).abs() < 1e-12);
        }
    }

    #[test]
    fn starts_fall_with_rate_and_ac3_falls_with_chromium() {
        let p = OracleParams::default();
        let c = comp(0.4, 1.0, 0.3, 1.0);
        assert!(p.fs_of(&c, 1.0) < p.fs_of(&c, 0.0));
        assert!(p.ps_of(&c, 1.0) < p.ps_of(&c, 0.0));
        let more_cr = comp(0.4, 1.0, 0.3, 2.0);
        assert!(p.ac3_of(&more_cr) < p.ac3_of(&c));
        assert!(p.ac1_of(&more_cr) < p.ac1_of(&c));
    }

    #[test]
    fn truth_keeps_physical_orderings() {
        let p = OracleParams::default();
        for c in sample_comps() {
            for i in 0..=62 {
                let r = -3.1 + 0.1 * i as f64;
                let t = truth(&p, &c, r);
                assert!(t.ac1 < t.ac3);
                if let (Some(fs), Some(ps)) = (t.start[0], t.start[1]) {
                    assert!(ps < fs, "pearlite under ferrite start");
                }
                if let (Some(bs), Some(bf)) = (t.start[2], t.finish[2]) {
                    assert!(bf + 1e-9 >= p.ms_of(&c).min(hold().temperature - 1.0));
                    assert!(bf <= bs);
                }
                for k in 0..3 {
                    if let (Some(s), Some(f)) = (t.start[k], t.finish[k]) {
                        assert!(f <= s);
                    }
                }
            }
        }
    }

    #[test]
    fn a_wide_bainite_range_hits_the_martensite_floor() {
        let p = OracleParams {
            range_bainite: CompositionLinear::new(400.0, vec![]),
            ..OracleParams::default()
        };
        let c = comp(0.3, 0.8, 0.4, 1.0);
        let r = p.cutoffs_of(&c).bainite_lo + 0.1;
        let t = truth(&p, &c, r);
        assert!(t.present[2]);
        assert!(t.clamp_applied);
        assert_eq!(t.finish[2], Some(p.ms_of(&c)));
        assert!(t.invariant_violations().is_empty());
    }

    #[test]
    fn starts_are_capped_below_the_hold_temperature() {
        let p = OracleParams::default();
        let c = comp(0.05, 0.1, 0.1, 0.1);
        let low_hold = Austenitization { temperature: 700.0, time: 600.0, time_imputed: false };
        let t = oracle_truth(&p, &c, &low_hold, -2.9).unwrap();
        for k in 0..4 {
            if let Some(s) = t.start[k] {
                assert!(s <= 699.0);
            }
        }
    }

    #[test]
    fn invalid_params_and_inputs_are_rejected() {
        let ok = OracleParams::default();
        let cases = [
            OracleParams { noise_sigma: -1.0, ..ok.clone() },
            OracleParams { rate_range: (2.0, -2.0), ..ok.clone() },
            OracleParams { equilibrium_log_rate: 0.0, ..ok.clone() },
            OracleParams { sample_box: vec![], ..ok.clone() },
            OracleParams { min_range: 0.0, ..ok.clone() },
            OracleParams { pearlite_cutoff_offset: -0.4, ..ok.clone() },
            OracleParams { fraction_weights: [(0.0, 1.0); 4], ..ok.clone() },
            OracleParams { ac3: CompositionLinear::new(f64::NAN, vec![]), ..ok.clone() },
        ];
        let c = comp(0.3, 0.8, 0.4, 1.0);
        for bad in cases {
            assert!(matches!(
                oracle_truth(&bad, &c, &hold(), 0.0),
                Err(OracleError::InvalidParams(_))
            ));
            assert!(generate_synthetic_dataset(&bad, 2, 2).is_err());
        }
        assert!(matches!(
            oracle_truth(&ok, &c, &hold(), f64::NAN),
            Err(OracleError::InvalidInput(_))
        ));
        assert!(matches!(
            generate_synthetic_dataset(&ok, 0, 5),
            Err(OracleError::InvalidInput(_))
        ));
    }

    #[test]
    fn generation_is_deterministic_and_shaped() {
        let params = OracleParams::default();
        let a = generate_synthetic_dataset(&params, 7, 9).unwrap();
        let b = generate_synthetic_dataset(&params, 7, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 63);
        assert_eq!(a.diagram_ids().len(), 7);
        let c = generate_synthetic_dataset(&OracleParams { seed: 1, ..params }, 7, 9).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn zero_noise_reproduces_truth_exactly() {
        let params = OracleParams { noise_sigma: 0.0, ..Default::default() };
        let ds = generate_synthetic_dataset(&params, 4, 8).unwrap();
        for p in ds.points() {
            let t = oracle_truth(&params, &p.composition, &p.aust, p.log_rate).unwrap();
            assert_eq!(p.ac1, Some(t.ac1));
            assert_eq!(p.ac3, Some(t.ac3));
            for k in 0..4 {
                assert_eq!(p.phases[k].present, t.present[k]);
                if t.present[k] {
                    assert_eq!(p.phases[k].start_temp, t.start[k]);
                    assert_eq!(p.phases[k].fraction, Some(t.fractions[k]));
                }
            }
        }
    }

    #[test]
    fn noise_shifts_temperatures_but_not_fractions() {
        let params = OracleParams { noise_sigma: 5.0, ..Default::default() };
        let ds = generate_synthetic_dataset(&params, 5, 10).unwrap();
        let mut any_shift = false;
        for p in ds.points() {
            let t = oracle_truth(&params, &p.composition, &p.aust, p.log_rate).unwrap();
            for k in 0..4 {
                if let (Some(got), Some(want)) = (p.phases[k].start_temp, t.start[k]) {
                    if (got - want).abs() > 1e-9 {
                        any_shift = true;
                    }
                    assert!((got - want).abs() < 35.0, "noise far beyond 6 sigma");
                }
                if t.present[k] {
                    assert_eq!(p.phases[k].fraction, Some(t.fractions[k]));
                }
            }
        }
        assert!(any_shift);
    }

    #[test]
    fn generated_rows_pass_ingest_validation() {
        let ds = generate_synthetic_dataset(&OracleParams::default(), 6, 8).unwrap();
        for p in ds.points() {
            for k in 0..4 {
                if let Some(s) = p.phases[k].start_temp {
                    assert!(s < p.aust.temperature);
                    assert!(s > 0.0);
                }
            }
            let fsum: f64 = p.phases.iter().filter_map(|ph| ph.fraction).sum();
            assert!(fsum <= 1.0 + 1e-6);
        }
    }
}
