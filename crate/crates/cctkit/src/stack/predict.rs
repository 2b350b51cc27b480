//! Serving: single-point prediction and diagram synthesis.
//!
//! Prediction walks the wiring in dependency order and then applies the
//! consistency rules: the fraction override on bainite presence, the
//! bainite-finish floor at the martensite start, and (optionally) hard
//! clamps of the slow-rate starts to the critical temperatures. Stacked
//! features always use the raw upstream regressor outputs, matching how
//! the downstream models were trained.

use rayon::prelude::*;

use crate::data::{Austenitization, Composition, Phase, FEATURE_NAMES};

use super::{
    CCTDiagram, LocusKind, LocusPoint, ModelBundle, PhaseLocus, PhasePrediction, StackError,
    SubModelId,
};

/// Log10 cooling-rate span of the supported data envelope; diagram
/// synthesis uses it when the caller gives no explicit bounds.
pub const DEFAULT_RATE_BOUNDS: (f64, f64) = (
    crate::data::LOG_RATE_ENVELOPE.lo,
    crate::data::LOG_RATE_ENVELOPE.hi,
);

/// Physics-rule adherence of one trained bundle on one alloy: the gap
/// between the slow-rate starts and the critical temperatures, plus how
/// often the override and clamp rules fired across the rate grid.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ConsistencyReport {
    pub log_rate_anchor: f64,
    /// Raw ferrite-start output minus predicted Ac3 at the anchor rate.
    pub fs_minus_ac3: f64,
    /// Raw pearlite-start output minus predicted Ac1 at the anchor rate.
    pub ps_minus_ac1: f64,
    pub override_count: usize,
    pub clamp_count: usize,
    pub n_rates: usize,
}

fn base_features(composition: &Composition, aust: &Austenitization, log_rate: f64) -> Vec<f64> {
    let mut f = Vec::with_capacity(FEATURE_NAMES.len());
    for (_, v) in composition.iter() {
        f.push(v);
    }
    f.push(aust.temperature);
    f.push(aust.time);
    f.push(log_rate);
    f
}

fn model_out(bundle: &ModelBundle, id: SubModelId, feats: &[f64]) -> Result<f64, StackError> {
    Ok(bundle.model(id)?.predict_one(feats)?)
}

/// Raw ferrite and pearlite start regressor outputs for one base row,
/// before any presence masking or clamping.
fn raw_fs_ps(bundle: &ModelBundle, base: &[f64]) -> Result<(f64, f64), StackError> {
    let fs = model_out(bundle, SubModelId::StartF, base)?;
    let mut ps_feats = base.to_vec();
    ps_feats.push(fs);
    let ps = model_out(bundle, SubModelId::StartP, &ps_feats)?;
    Ok((fs, ps))
}

/// Predicts the transformation behaviour of one alloy at one cooling
/// rate.
pub fn predict_point(
    bundle: &ModelBundle,
    composition: &Composition,
    aust: &Austenitization,
    log_rate: f64,
) -> Result<PhasePrediction, StackError> {
    if !log_rate.is_finite() {
        return Err(StackError::BadRateGrid(format!("non-finite log rate {log_rate}")));
    }
    if !(aust.temperature.is_finite() && aust.temperature > 0.0) {
        return Err(StackError::BadRateGrid(format!(
            "austenitization temperature must be positive, got {}",
            aust.temperature
        )));
    }
    let base = base_features(composition, aust, log_rate);

    let mut present = [false; 4];
    for (k, id) in [
        SubModelId::PresenceF,
        SubModelId::PresenceP,
        SubModelId::PresenceB,
        SubModelId::PresenceM,
    ]
    .into_iter()
    .enumerate()
    {
        present[k] = model_out(bundle, id, &base)? > 0.5;
    }

    let ac1 = model_out(bundle, SubModelId::Ac1, &base)?;
    let ac3 = model_out(bundle, SubModelId::Ac3, &base)?;
    let fractions = bundle.fractions.predict_one(&base)?;

    // The ferrite start is always evaluated: the pearlite model consumes
    // it as a feature even when ferrite itself is classified absent.
    let (fs_raw, ps_raw) = raw_fs_ps(bundle, &base)?;
    let fs_feature_raw = !present[0];

    // Fraction override: a bainite call is retracted when ferrite plus
    // pearlite already claim (nearly) the whole microstructure.
    let mut override_applied = false;
    if present[2] && fractions[0] + fractions[1] >= bundle.config.override_threshold {
        present[2] = false;
        override_applied = true;
    }

    let ms_raw = model_out(bundle, SubModelId::StartM, &base)?;

    let mut start = [None; 4];
    let mut finish = [None; 4];
    let mut clamp_applied = false;

    if present[0] {
        let mut fs = fs_raw;
        if bundle.config.hard_consistency_clamp {
            fs = fs.min(ac3);
        }
        let mut feats = base.clone();
        feats.push(fs_raw);
        let range = model_out(bundle, SubModelId::RangeF, &feats)?.max(0.0);
        start[0] = Some(fs);
        finish[0] = Some(fs - range);
    }

    if present[1] {
        let mut ps = ps_raw;
        if bundle.config.hard_consistency_clamp {
            ps = ps.min(ac1);
        }
        let mut feats = base.clone();
        feats.push(ps_raw);
        let range = model_out(bundle, SubModelId::RangeP, &feats)?.max(0.0);
        start[1] = Some(ps);
        finish[1] = Some(ps - range);
    }

    if present[2] {
        let mut feats = base.clone();
        feats.push(fractions[0]);
        feats.push(fractions[1]);
        let bs_raw = model_out(bundle, SubModelId::StartB, &feats)?;
        let mut range_feats = base.clone();
        range_feats.push(bs_raw);
        let range = model_out(bundle, SubModelId::RangeB, &range_feats)?.max(0.0);
        // The bainite interval cannot reach below the martensite start;
        // a start below it collapses the interval to zero width.
        let mut bf = bs_raw - range;
        let mut bs = bs_raw;
        if bf < ms_raw {
            bf = ms_raw;
            clamp_applied = true;
        }
        if bs < ms_raw {
            bs = ms_raw;
            clamp_applied = true;
        }
        start[2] = Some(bs);
        finish[2] = Some(bf);
    }

    if present[3] {
        start[3] = Some(ms_raw);
    }

    Ok(PhasePrediction {
        log_rate,
        present,
        start,
        finish,
        fractions,
        ac1,
        ac3,
        override_applied,
        clamp_applied,
        fs_feature_raw,
    })
}

/// Synthesizes a CCT diagram on a log-uniform grid of `n_rates` cooling
/// rates spanning `bounds` (log10 K/s, inclusive).
pub fn generate_diagram(
    bundle: &ModelBundle,
    composition: &Composition,
    aust: &Austenitization,
    n_rates: usize,
    bounds: (f64, f64),
) -> Result<CCTDiagram, StackError> {
    if n_rates < 2 {
        return Err(StackError::BadRateGrid(format!("need at least 2 rates, got {n_rates}")));
    }
    let (lo, hi) = bounds;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(StackError::BadRateGrid(format!("bad rate bounds [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (n_rates - 1) as f64;
    let grid: Vec<f64> = (0..n_rates).map(|i| lo + step * i as f64).collect();

    let predictions: Vec<PhasePrediction> = grid
        .par_iter()
        .map(|&r| predict_point(bundle, composition, aust, r))
        .collect::<Result<_, _>>()?;

    let mut loci = Vec::new();
    for (k, &phase) in Phase::ALL.iter().enumerate() {
        for kind in [LocusKind::Start, LocusKind::Finish] {
            let mut segments: Vec<Vec<LocusPoint>> = Vec::new();
            let mut current: Vec<LocusPoint> = Vec::new();
            for p in &predictions {
                let temp = match kind {
                    LocusKind::Start => p.start[k],
                    LocusKind::Finish => p.finish[k],
                };
                // A temperature at or above the austenitization hold has
                // no crossing on the cooling curve; it splits the line
                // like an absence does.
                let temp = temp.filter(|&t| t < aust.temperature);
                match temp {
                    Some(t) => {
                        let rate = 10f64.powf(p.log_rate);
                        current.push(LocusPoint {
                            log_rate: p.log_rate,
                            time: (aust.temperature - t) / rate,
                            temperature: t,
                        });
                    }
                    None => {
                        if !current.is_empty() {
                            segments.push(std::mem::take(&mut current));
                        }
                    }
                }
            }
            if !current.is_empty() {
                segments.push(current);
            }
            if !segments.is_empty() {
                loci.push(PhaseLocus { phase, kind, segments });
            }
        }
    }

    Ok(CCTDiagram {
        composition: *composition,
        aust: *aust,
        predictions,
        loci,
    })
}

/// Probes one alloy for physics-rule adherence: the anchor-rate gaps
/// against the critical temperatures and the rule firing counts over a
/// rate grid.
pub fn consistency_diagnostic(
    bundle: &ModelBundle,
    composition: &Composition,
    aust: &Austenitization,
    n_rates: usize,
    bounds: (f64, f64),
) -> Result<ConsistencyReport, StackError> {
    if n_rates == 0 {
        return Err(StackError::BadRateGrid("need at least 1 rate".into()));
    }
    let anchor = bundle.config.log_rate_anchor;
    let base = base_features(composition, aust, anchor);
    let ac1 = model_out(bundle, SubModelId::Ac1, &base)?;
    let ac3 = model_out(bundle, SubModelId::Ac3, &base)?;
    let (fs_raw, ps_raw) = raw_fs_ps(bundle, &base)?;

    let (lo, hi) = bounds;
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(StackError::BadRateGrid(format!("bad rate bounds [{lo}, {hi}]")));
    }
    let mut override_count = 0;
    let mut clamp_count = 0;
    for i in 0..n_rates {
        let r = if n_rates == 1 { lo } else { lo + (hi - lo) * i as f64 / (n_rates - 1) as f64 };
        let p = predict_point(bundle, composition, aust, r)?;
        override_count += p.override_applied as usize;
        clamp_count += p.clamp_applied as usize;
    }

    Ok(ConsistencyReport {
        log_rate_anchor: anchor,
        fs_minus_ac3: fs_raw - ac3,
        ps_minus_ac1: ps_raw - ac1,
        override_count,
        clamp_count,
        n_rates,
    })
}
