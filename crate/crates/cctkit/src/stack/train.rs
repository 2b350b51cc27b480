//! Stack training.
//!
//! Builds the fourteen sub-models in dependency order. Physics rules are
//! applied to the training set first (equilibrium anchor rows, presence
//! interpolation inside observed gaps), then each learner sub-model is
//! selected over the candidate grid with diagram-grouped cross
//! validation. Downstream models consume upstream predictions through a
//! single global fold map, so a stacked feature for a row always comes
//! from a model that never saw that row's diagram.

use crate::data::{assign_diagram_folds, DataPoint, Dataset, Phase, StandardScaler};
use crate::learners::{
    fit, fit_with_cv, mix_seed, FittedModel, LearnError, LearnerSpec, ModelKind, Task,
};
use crate::matrix::Matrix;
use crate::nn::{fit_fraction_net, FractionConfig, FractionNet};

use super::{
    anchor_equilibrium, augment_presence, features_for, FractionSubModel, ModelBundle,
    StackConfig, StackError, SubModel, SubModelId, TrainDiagnostics, WiringManifest,
    BUNDLE_SCHEMA,
};

/// Trains the full stack on `train` and returns a validated bundle.
///
/// The input is expected to hold measured rows; synthetic rows produced
/// here stay internal to the run. Fails when the configuration is
/// inconsistent or when the data cannot support the mandatory fraction
/// network; individual learner sub-models degrade to flagged constants
/// instead of failing.
pub fn train_stack(train: &Dataset, config: &StackConfig) -> Result<ModelBundle, StackError> {
    validate_config(config)?;

    let mut diag = TrainDiagnostics::default();
    diag.rows_measured = train.points().iter().filter(|p| !p.synthetic).count();

    // Critical-temperature models come first: the equilibrium anchor rows
    // need their predictions.
    let pts0 = train.points();
    let ac1_rows = rows_where(pts0, |p| p.ac1.is_some());
    let ac1_y = column(pts0, &ac1_rows, |p| p.ac1.unwrap());
    let sub_ac1 = fit_submodel(
        SubModelId::Ac1,
        &feature_matrix(pts0, &ac1_rows, &[]),
        &ac1_y,
        None,
        &ids_for(pts0, &ac1_rows),
        config,
        &mut diag,
    )?;
    let ac3_rows = rows_where(pts0, |p| p.ac3.is_some());
    let ac3_y = column(pts0, &ac3_rows, |p| p.ac3.unwrap());
    let sub_ac3 = fit_submodel(
        SubModelId::Ac3,
        &feature_matrix(pts0, &ac3_rows, &[]),
        &ac3_y,
        None,
        &ids_for(pts0, &ac3_rows),
        config,
        &mut diag,
    )?;

    // Rule: one near-equilibrium row per diagram ties the slow-rate
    // ferrite and pearlite starts to the predicted critical temperatures.
    // Skipped when either critical model degraded to a constant, since
    // anchoring to a made-up temperature would poison the start models.
    let anchor_usable = !diag.forced_constant.contains(&SubModelId::Ac1)
        && !diag.forced_constant.contains(&SubModelId::Ac3);
    let anchored = if config.anchor_equilibrium && anchor_usable {
        anchor_equilibrium(train, &sub_ac1, &sub_ac3, config.log_rate_anchor)?
    } else {
        train.clone()
    };
    diag.rows_anchor = anchored.len() - train.len();

    // Rule: presence labels interpolated strictly inside gaps between
    // consecutive positive rates of the same diagram.
    let anchored_len = anchored.len();
    let augmented = if config.augment_presence && config.points_per_gap > 0 {
        augment_presence(&anchored, config.points_per_gap)?
    } else {
        anchored
    };
    diag.rows_augmented = augmented.len() - anchored_len;
    let pts = augmented.points();

    // One fold map for every stacked feature. When the dataset has fewer
    // diagrams than folds, out-of-fold models cannot exist; every stacked
    // request then falls back to the final model and is counted.
    let ids_all: Vec<&str> = pts.iter().map(|p| p.diagram_id.as_str()).collect();
    let row_fold: Vec<usize> =
        match assign_diagram_folds(&ids_all, config.folds, mix_seed(config.seed, 41)) {
            Ok(f) => f,
            Err(_) => vec![0; pts.len()],
        };
    let folds_of = |rows: &[usize]| -> Vec<usize> { rows.iter().map(|&i| row_fold[i]).collect() };

    // Phase-fraction network, trained only on rows whose reported
    // fractions form a complete simplex. An absent phase counts as zero;
    // a present phase with no fraction leaves the row incomplete.
    let mut frac_rows: Vec<usize> = Vec::new();
    let mut frac_targets: Vec<Vec<f64>> = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        if p.phases.iter().all(|r| r.fraction.is_none()) {
            continue;
        }
        let mut simplex = [0.0; 4];
        let mut complete = true;
        for (k, r) in p.phases.iter().enumerate() {
            match (r.present, r.fraction) {
                (_, Some(f)) => simplex[k] = f,
                (false, None) => {}
                (true, None) => complete = false,
            }
        }
        if complete && (simplex.iter().sum::<f64>() - 1.0).abs() <= 1e-6 {
            frac_rows.push(i);
            frac_targets.push(simplex.to_vec());
        } else {
            diag.fraction_rows_skipped += 1;
        }
    }
    diag.fraction_rows = frac_rows.len();
    if frac_rows.len() < 2 {
        return Err(StackError::NotEnoughRows {
            what: "complete-fraction".into(),
            found: frac_rows.len(),
            needed: 2,
        });
    }
    let fx = feature_matrix(pts, &frac_rows, &[]);
    let fy = Matrix::from_rows(&frac_targets);
    let f_scaler = StandardScaler::fit(&fx)?;
    let (net, log) = fit_fraction_net(&f_scaler.transform(&fx)?, &fy, &config.fraction_net)?;
    let fractions = FractionSubModel {
        features: features_for(SubModelId::Fractions),
        scaler: f_scaler,
        net,
        log,
    };
    let frac_col = FractionColumn::build(
        &fractions,
        &fx,
        &fy,
        &config.fraction_net,
        &folds_of(&frac_rows),
        config.folds,
    )?;

    // Presence classifiers. Synthetic rows assert presence of one phase
    // only, so they join a classifier's training set only as positives;
    // for every other phase they are dropped rather than read as absent.
    let mut sub_presence = Vec::with_capacity(4);
    for phase in Phase::ALL {
        let id = presence_id(phase);
        let rows = rows_where(pts, |p| !p.synthetic || p.phase(phase).present);
        let y = column(pts, &rows, |p| if p.phase(phase).present { 1.0 } else { 0.0 });
        let w = weights_for(pts, &rows, config.anchor_weight);
        let sm = fit_submodel(
            id,
            &feature_matrix(pts, &rows, &[]),
            &y,
            w.as_deref(),
            &ids_for(pts, &rows),
            config,
            &mut diag,
        )?;
        sub_presence.push(sm);
    }

    // Ferrite start. Anchor rows participate at `anchor_weight`.
    let sf_rows = start_rows(pts, Phase::Ferrite);
    let sf_y = column(pts, &sf_rows, |p| p.phase(Phase::Ferrite).start_temp.unwrap());
    let sf_x = feature_matrix(pts, &sf_rows, &[]);
    let sf_w = weights_for(pts, &sf_rows, config.anchor_weight);
    let sub_fs = fit_submodel(
        SubModelId::StartF,
        &sf_x,
        &sf_y,
        sf_w.as_deref(),
        &ids_for(pts, &sf_rows),
        config,
        &mut diag,
    )?;
    let fs_col = StackedColumn::build(&sub_fs, &sf_x, &sf_y, sf_w.as_deref(), &folds_of(&sf_rows), config.folds)?;

    // Pearlite start consumes the ferrite start prediction, measured
    // value first when the ablation switch asks for it.
    let sp_rows = start_rows(pts, Phase::Pearlite);
    let mut sp_fs = Vec::with_capacity(sp_rows.len());
    for &i in &sp_rows {
        sp_fs.push(fs_value(&pts[i], row_fold[i], &fs_col, config, &mut diag.oof_fallbacks)?);
    }
    let sp_x = feature_matrix(pts, &sp_rows, &[sp_fs]);
    let sp_y = column(pts, &sp_rows, |p| p.phase(Phase::Pearlite).start_temp.unwrap());
    let sp_w = weights_for(pts, &sp_rows, config.anchor_weight);
    let sub_ps = fit_submodel(
        SubModelId::StartP,
        &sp_x,
        &sp_y,
        sp_w.as_deref(),
        &ids_for(pts, &sp_rows),
        config,
        &mut diag,
    )?;
    let ps_col = StackedColumn::build(&sub_ps, &sp_x, &sp_y, sp_w.as_deref(), &folds_of(&sp_rows), config.folds)?;

    // Bainite start consumes the predicted ferrite and pearlite
    // fractions.
    let sb_rows = start_rows(pts, Phase::Bainite);
    let mut sb_ff = Vec::with_capacity(sb_rows.len());
    let mut sb_fp = Vec::with_capacity(sb_rows.len());
    for &i in &sb_rows {
        let (ff, fp) = frac_values(&pts[i], row_fold[i], &frac_col, config, &mut diag.oof_fallbacks)?;
        sb_ff.push(ff);
        sb_fp.push(fp);
    }
    let sb_x = feature_matrix(pts, &sb_rows, &[sb_ff, sb_fp]);
    let sb_y = column(pts, &sb_rows, |p| p.phase(Phase::Bainite).start_temp.unwrap());
    let sub_bs = fit_submodel(
        SubModelId::StartB,
        &sb_x,
        &sb_y,
        None,
        &ids_for(pts, &sb_rows),
        config,
        &mut diag,
    )?;
    let bs_col = StackedColumn::build(&sub_bs, &sb_x, &sb_y, None, &folds_of(&sb_rows), config.folds)?;

    // Martensite start, base features only.
    let sm_rows = start_rows(pts, Phase::Martensite);
    let sm_y = column(pts, &sm_rows, |p| p.phase(Phase::Martensite).start_temp.unwrap());
    let sub_ms = fit_submodel(
        SubModelId::StartM,
        &feature_matrix(pts, &sm_rows, &[]),
        &sm_y,
        None,
        &ids_for(pts, &sm_rows),
        config,
        &mut diag,
    )?;

    // Transformation ranges, each fed its own start prediction.
    let rf_rows = range_rows(pts, Phase::Ferrite);
    let mut rf_fs = Vec::with_capacity(rf_rows.len());
    for &i in &rf_rows {
        rf_fs.push(fs_value(&pts[i], row_fold[i], &fs_col, config, &mut diag.oof_fallbacks)?);
    }
    let rf_y = column(pts, &rf_rows, |p| p.phase(Phase::Ferrite).range_temp.unwrap());
    let sub_rf = fit_submodel(
        SubModelId::RangeF,
        &feature_matrix(pts, &rf_rows, &[rf_fs]),
        &rf_y,
        None,
        &ids_for(pts, &rf_rows),
        config,
        &mut diag,
    )?;

    let rp_rows = range_rows(pts, Phase::Pearlite);
    let mut rp_ps = Vec::with_capacity(rp_rows.len());
    for &i in &rp_rows {
        let p = &pts[i];
        let fold = row_fold[i];
        if config.stacking_from_measured {
            if let Some(v) = p.phase(Phase::Pearlite).start_temp {
                rp_ps.push(v);
                continue;
            }
        }
        let fs = fs_value(p, fold, &fs_col, config, &mut diag.oof_fallbacks)?;
        let mut row = p.features();
        row.push(fs);
        rp_ps.push(ps_col.predict(&row, fold, &mut diag.oof_fallbacks)?);
    }
    let rp_y = column(pts, &rp_rows, |p| p.phase(Phase::Pearlite).range_temp.unwrap());
    let sub_rp = fit_submodel(
        SubModelId::RangeP,
        &feature_matrix(pts, &rp_rows, &[rp_ps]),
        &rp_y,
        None,
        &ids_for(pts, &rp_rows),
        config,
        &mut diag,
    )?;

    let rb_rows = range_rows(pts, Phase::Bainite);
    let mut rb_bs = Vec::with_capacity(rb_rows.len());
    for &i in &rb_rows {
        let p = &pts[i];
        let fold = row_fold[i];
        if config.stacking_from_measured {
            if let Some(v) = p.phase(Phase::Bainite).start_temp {
                rb_bs.push(v);
                continue;
            }
        }
        let (ff, fp) = frac_values(p, fold, &frac_col, config, &mut diag.oof_fallbacks)?;
        let mut row = p.features();
        row.push(ff);
        row.push(fp);
        rb_bs.push(bs_col.predict(&row, fold, &mut diag.oof_fallbacks)?);
    }
    let rb_y = column(pts, &rb_rows, |p| p.phase(Phase::Bainite).range_temp.unwrap());
    let sub_rb = fit_submodel(
        SubModelId::RangeB,
        &feature_matrix(pts, &rb_rows, &[rb_bs]),
        &rb_y,
        None,
        &ids_for(pts, &rb_rows),
        config,
        &mut diag,
    )?;

    let mut models = vec![sub_ac1, sub_ac3];
    models.extend(sub_presence);
    models.extend([sub_fs, sub_ps, sub_bs, sub_ms, sub_rf, sub_rp, sub_rb]);

    let bundle = ModelBundle {
        schema: BUNDLE_SCHEMA,
        config: config.clone(),
        manifest: WiringManifest::standard(),
        models,
        fractions,
        diagnostics: diag,
        train_diagram_ids: train.diagram_ids().iter().map(|s| s.to_string()).collect(),
    };
    bundle.validate()?;
    Ok(bundle)
}

fn validate_config(config: &StackConfig) -> Result<(), StackError> {
    let bad = |msg: String| Err(StackError::BadConfig(msg));
    if config.folds < 2 {
        return bad(format!("folds must be at least 2, got {}", config.folds));
    }
    if config.min_rows < 2 {
        return bad(format!("min_rows must be at least 2, got {}", config.min_rows));
    }
    if !(config.anchor_weight.is_finite() && config.anchor_weight > 0.0) {
        return bad(format!("anchor_weight must be positive, got {}", config.anchor_weight));
    }
    if !(config.override_threshold.is_finite() && config.override_threshold > 0.0) {
        return bad(format!(
            "override_threshold must be positive, got {}",
            config.override_threshold
        ));
    }
    if !config.log_rate_anchor.is_finite() {
        return bad("log_rate_anchor must be finite".into());
    }
    if config.classify_grid.is_empty() || config.regress_grid.is_empty() {
        return bad("candidate grids must not be empty".into());
    }
    for s in &config.classify_grid {
        if s.task != Task::Classify {
            return bad(format!("classify grid holds a {:?} spec", s.task));
        }
    }
    for s in &config.regress_grid {
        if s.task != Task::Regress {
            return bad(format!("regress grid holds a {:?} spec", s.task));
        }
    }
    Ok(())
}

/// Seed stream index of one sub-model, stable across runs.
fn salt(id: SubModelId) -> u64 {
    SubModelId::ALL.iter().position(|&x| x == id).unwrap() as u64 + 1
}

fn presence_id(phase: Phase) -> SubModelId {
    match phase {
        Phase::Ferrite => SubModelId::PresenceF,
        Phase::Pearlite => SubModelId::PresenceP,
        Phase::Bainite => SubModelId::PresenceB,
        Phase::Martensite => SubModelId::PresenceM,
    }
}

fn rows_where(pts: &[DataPoint], pred: impl Fn(&DataPoint) -> bool) -> Vec<usize> {
    pts.iter().enumerate().filter(|(_, p)| pred(p)).map(|(i, _)| i).collect()
}

fn start_rows(pts: &[DataPoint], phase: Phase) -> Vec<usize> {
    rows_where(pts, |p| p.phase(phase).present && p.phase(phase).start_temp.is_some())
}

fn range_rows(pts: &[DataPoint], phase: Phase) -> Vec<usize> {
    rows_where(pts, |p| p.phase(phase).present && p.phase(phase).range_temp.is_some())
}

fn column(pts: &[DataPoint], rows: &[usize], get: impl Fn(&DataPoint) -> f64) -> Vec<f64> {
    rows.iter().map(|&i| get(&pts[i])).collect()
}

fn ids_for<'a>(pts: &'a [DataPoint], rows: &[usize]) -> Vec<&'a str> {
    rows.iter().map(|&i| pts[i].diagram_id.as_str()).collect()
}

fn feature_matrix(pts: &[DataPoint], rows: &[usize], extra: &[Vec<f64>]) -> Matrix {
    let built: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            let mut f = pts[i].features();
            for col in extra {
                f.push(col[j]);
            }
            f
        })
        .collect();
    Matrix::from_rows(&built)
}

/// Anchor rows are the only synthetic rows carrying a start temperature.
fn is_anchor(p: &DataPoint) -> bool {
    p.synthetic && p.phases.iter().any(|r| r.start_temp.is_some())
}

/// Per-row training weights, or None when they would be all ones.
fn weights_for(pts: &[DataPoint], rows: &[usize], anchor_weight: f64) -> Option<Vec<f64>> {
    if (anchor_weight - 1.0).abs() < 1e-12 || rows.iter().all(|&i| !is_anchor(&pts[i])) {
        return None;
    }
    Some(
        rows.iter()
            .map(|&i| if is_anchor(&pts[i]) { anchor_weight } else { 1.0 })
            .collect(),
    )
}

fn weighted_mean(y: &[f64], w: Option<&[f64]>) -> f64 {
    if y.is_empty() {
        return 0.0;
    }
    let plain = y.iter().sum::<f64>() / y.len() as f64;
    match w {
        None => plain,
        Some(w) => {
            let tw: f64 = w.iter().sum();
            if tw <= 0.0 {
                plain
            } else {
                y.iter().zip(w).map(|(v, wi)| v * wi).sum::<f64>() / tw
            }
        }
    }
}

/// Fits one learner sub-model: grid selection when the rows allow it,
/// a flagged constant otherwise.
fn fit_submodel(
    id: SubModelId,
    x: &Matrix,
    y: &[f64],
    w: Option<&[f64]>,
    ids: &[&str],
    config: &StackConfig,
    diag: &mut TrainDiagnostics,
) -> Result<SubModel, StackError> {
    let features = features_for(id);
    let task = id.task();
    let grid: Vec<LearnerSpec> = match task {
        Task::Classify => &config.classify_grid,
        Task::Regress => &config.regress_grid,
    }
    .iter()
    .map(|s| LearnerSpec { seed: mix_seed(config.seed, salt(id)), ..s.clone() })
    .collect();

    let too_few = x.rows() < config.min_rows.max(2)
        || (task == Task::Classify
            && y.iter().filter(|&&v| v > 0.5).count() < config.min_rows);
    if too_few {
        let value = match task {
            Task::Classify => 0.0,
            Task::Regress => weighted_mean(y, w),
        };
        diag.forced_constant.push(id);
        let scaler =
            StandardScaler::from_stats(vec![0.0; features.len()], vec![1.0; features.len()]);
        let n = features.len();
        return Ok(SubModel {
            id,
            features,
            scaler,
            model: FittedModel::constant(grid[0].clone(), value, n),
            cv: None,
        });
    }

    let scaler = StandardScaler::fit(x)?;
    let xs = scaler.transform(x)?;
    match fit_with_cv(&grid, &xs, y, w, ids, config.folds, mix_seed(config.seed, 64 + salt(id))) {
        Ok((model, report)) => {
            let cell = &report.cells[report.chosen];
            diag.chosen.push((id, cell.label.clone(), Some(cell.mean_error)));
            Ok(SubModel { id, features, scaler, model, cv: Some(report) })
        }
        Err(LearnError::TooFewDiagrams { .. }) => {
            // Not enough diagrams to select across; take the first
            // candidate as-is.
            let model = fit(&xs, y, w, &grid[0])?;
            diag.chosen.push((id, format!("{} (unselected)", grid[0].label()), None));
            Ok(SubModel { id, features, scaler, model, cv: None })
        }
        Err(e) => Err(e.into()),
    }
}

/// Measured-or-stacked ferrite start for one row.
fn fs_value(
    p: &DataPoint,
    fold: usize,
    fs_col: &StackedColumn,
    config: &StackConfig,
    fallbacks: &mut usize,
) -> Result<f64, StackError> {
    if config.stacking_from_measured {
        if let Some(v) = p.phase(Phase::Ferrite).start_temp {
            return Ok(v);
        }
    }
    fs_col.predict(&p.features(), fold, fallbacks)
}

/// Measured-or-stacked ferrite and pearlite fractions for one row.
fn frac_values(
    p: &DataPoint,
    fold: usize,
    frac_col: &FractionColumn,
    config: &StackConfig,
    fallbacks: &mut usize,
) -> Result<(f64, f64), StackError> {
    if config.stacking_from_measured {
        if let (Some(ff), Some(fp)) =
            (p.phase(Phase::Ferrite).fraction, p.phase(Phase::Pearlite).fraction)
        {
            return Ok((ff, fp));
        }
    }
    let f4 = frac_col.predict(&p.features(), fold, fallbacks)?;
    Ok((f4[0], f4[1]))
}

/// Serves an upstream learner's predictions during downstream training.
/// Rows are answered by the per-fold refit that excluded the row's
/// diagram; a missing fold model falls back to the final model and is
/// counted.
struct StackedColumn {
    scaler: StandardScaler,
    final_model: FittedModel,
    fold_models: Vec<Option<FittedModel>>,
    count_fallbacks: bool,
}

impl StackedColumn {
    fn build(
        sm: &SubModel,
        x: &Matrix,
        y: &[f64],
        w: Option<&[f64]>,
        row_folds: &[usize],
        folds: usize,
    ) -> Result<Self, StackError> {
        let mut fold_models: Vec<Option<FittedModel>> = vec![None; folds];
        // A constant final model refits to the same constant; skip the
        // per-fold work and serve it directly without counting.
        let constant = matches!(sm.model.kind, ModelKind::Constant { .. });
        if !constant {
            let xs = sm.scaler.transform(x)?;
            for (f, slot) in fold_models.iter_mut().enumerate() {
                let keep: Vec<usize> = (0..xs.rows()).filter(|&i| row_folds[i] != f).collect();
                if keep.len() < 2 {
                    continue;
                }
                let xf_rows: Vec<Vec<f64>> = keep.iter().map(|&i| xs.row(i).to_vec()).collect();
                let yf: Vec<f64> = keep.iter().map(|&i| y[i]).collect();
                let wf: Option<Vec<f64>> =
                    w.map(|w| keep.iter().map(|&i| w[i]).collect());
                if let Ok(m) = fit(&Matrix::from_rows(&xf_rows), &yf, wf.as_deref(), &sm.model.spec)
                {
                    *slot = Some(m);
                }
            }
        }
        Ok(StackedColumn {
            scaler: sm.scaler.clone(),
            final_model: sm.model.clone(),
            fold_models,
            count_fallbacks: !constant,
        })
    }

    fn predict(&self, raw: &[f64], fold: usize, fallbacks: &mut usize) -> Result<f64, StackError> {
        let scaled = self.scaler.transform_row(raw)?;
        let model = match self.fold_models.get(fold).and_then(|m| m.as_ref()) {
            Some(m) => m,
            None => {
                if self.count_fallbacks {
                    *fallbacks += 1;
                }
                &self.final_model
            }
        };
        Ok(model.predict_row(&scaled)?)
    }
}

/// Out-of-fold server for the fraction network.
struct FractionColumn {
    scaler: StandardScaler,
    final_net: FractionNet,
    fold_nets: Vec<Option<FractionNet>>,
}

impl FractionColumn {
    fn build(
        fm: &FractionSubModel,
        x: &Matrix,
        y: &Matrix,
        config: &FractionConfig,
        row_folds: &[usize],
        folds: usize,
    ) -> Result<Self, StackError> {
        let xs = fm.scaler.transform(x)?;
        let mut fold_nets: Vec<Option<FractionNet>> = vec![None; folds];
        for (f, slot) in fold_nets.iter_mut().enumerate() {
            let keep: Vec<usize> = (0..xs.rows()).filter(|&i| row_folds[i] != f).collect();
            if keep.len() < 2 {
                continue;
            }
            let xf_rows: Vec<Vec<f64>> = keep.iter().map(|&i| xs.row(i).to_vec()).collect();
            let yf_rows: Vec<Vec<f64>> = keep.iter().map(|&i| y.row(i).to_vec()).collect();
            let cfg = FractionConfig { seed: mix_seed(config.seed, f as u64 + 1), ..config.clone() };
            if let Ok((net, _)) =
                fit_fraction_net(&Matrix::from_rows(&xf_rows), &Matrix::from_rows(&yf_rows), &cfg)
            {
                *slot = Some(net);
            }
        }
        Ok(FractionColumn { scaler: fm.scaler.clone(), final_net: fm.net.clone(), fold_nets })
    }

    fn predict(
        &self,
        raw: &[f64],
        fold: usize,
        fallbacks: &mut usize,
    ) -> Result<[f64; 4], StackError> {
        let scaled = self.scaler.transform_row(raw)?;
        let net = match self.fold_nets.get(fold).and_then(|n| n.as_ref()) {
            Some(n) => n,
            None => {
                *fallbacks += 1;
                &self.final_net
            }
        };
        Ok(net.predict_fractions(&scaled)?)
    }
}
