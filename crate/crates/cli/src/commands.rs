use spinbattery_core::analysis::{
    detect_first_jump, power_curve, scaling_fit, thermal_diff_map, uniform_grid, Direction, ScalingFit,
};
use spinbattery_core::disorder::quenched_power;
use spinbattery_core::dynamics::evolve;
use spinbattery_core::model::{build_h0, normalize};
use spinbattery_core::observables::{ground_state_scan, middle_pair_entanglement, order_parameters};
use spinbattery_core::parallel::map_indexed;
use spinbattery_core::states::prepare;
use spinbattery_core::{
    battery_power, power_max, DisorderTarget, ModelParams, StatePrep, SymmetryBias,
};

use crate::config::{
    field_error, BiasChoice, DisorderSection, EvalPoint, GridSection, ModelSection, RunConfig, SweepParameter,
};
use crate::error::CliError;
use crate::output::{Cell, Table};

/// What a command produced: the table and the disorder seed it used, if any.
pub struct Outcome {
    pub table: Table,
    pub seed: Option<u64>,
}

impl From<Table> for Outcome {
    fn from(table: Table) -> Self {
        Self { table, seed: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    PowerSweep,
    DisorderSweep,
    ThermalMap,
    Entanglement,
    OrderParams,
    FidelityScan,
    ScalingFit,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::PowerSweep => "power-sweep",
            Kind::DisorderSweep => "disorder-sweep",
            Kind::ThermalMap => "thermal-map",
            Kind::Entanglement => "entanglement",
            Kind::OrderParams => "order-params",
            Kind::FidelityScan => "fidelity-scan",
            Kind::ScalingFit => "scaling-fit",
        }
    }

    fn allowed(self) -> &'static [SweepParameter] {
        use SweepParameter::*;
        match self {
            Kind::PowerSweep => &[J, Delta, Gamma, FieldH, Omega, Beta],
            Kind::DisorderSweep => &[J, Delta, Gamma, FieldH, Omega, Beta, Sigma, DisorderMean],
            Kind::Entanglement => &[J, Delta, Gamma, FieldH, Omega, Beta],
            Kind::OrderParams => &[J, Delta, Gamma, FieldH],
            Kind::ThermalMap | Kind::FidelityScan | Kind::ScalingFit => &[J],
        }
    }
}

pub fn run(kind: Kind, cfg: &RunConfig, workers: usize) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let sweep = cfg.sweep();
    if !kind.allowed().contains(&sweep.parameter) {
        return Err(field_error(
            "sweep.parameter",
            format!("{} cannot sweep {:?}", kind.name(), sweep.parameter),
        ));
    }
    let touches_xy = matches!(sweep.parameter, SweepParameter::J) || kind == Kind::ScalingFit;
    if touches_xy && cfg.model.xy_couplings.is_some() {
        return Err(field_error("model.xy_couplings", "cannot be combined with a sweep over j"));
    }
    if sweep.parameter == SweepParameter::Delta && cfg.model.zz_couplings.is_some() {
        return Err(field_error("model.zz_couplings", "cannot be combined with a sweep over delta"));
    }
    let values = uniform_grid(sweep.start, sweep.stop, sweep.step);
    match kind {
        Kind::PowerSweep => power_sweep(cfg, sweep.parameter, &values, workers).map(Into::into),
        Kind::DisorderSweep => disorder_sweep(cfg, sweep.parameter, &values, workers),
        Kind::ThermalMap => thermal_map(cfg, &values, workers).map(Into::into),
        Kind::Entanglement => entanglement(cfg, sweep.parameter, &values, workers).map(Into::into),
        Kind::OrderParams => order_params(cfg, sweep.parameter, &values, workers).map(Into::into),
        Kind::FidelityScan => fidelity(cfg, &values, workers).map(Into::into),
        Kind::ScalingFit => scaling(cfg, &values, workers).map(Into::into),
    }
}

/// Model and initial state at one sweep value.
fn point(cfg: &RunConfig, param: SweepParameter, value: f64) -> (ModelParams, StatePrep) {
    let mut model: ModelSection = cfg.model.clone();
    let mut state = cfg.state;
    match param {
        SweepParameter::J => model.j = value,
        SweepParameter::Delta => model.delta = value,
        SweepParameter::Gamma => model.gamma = value,
        SweepParameter::FieldH => model.field_h = value,
        SweepParameter::Omega => model.omega = value,
        SweepParameter::Beta => state = StatePrep::Thermal { beta: value },
        SweepParameter::Sigma | SweepParameter::DisorderMean => {}
    }
    (model.params(), state)
}

fn check_point(params: &ModelParams) -> Result<(), CliError> {
    params.validate().map_err(|e| field_error("sweep", format!("swept value is out of range ({e})")))
}

fn power_sweep(cfg: &RunConfig, param: SweepParameter, values: &[f64], workers: usize) -> Result<Table, CliError> {
    let results = map_indexed(workers, values.len(), |k| {
        let (params, state) = point(cfg, param, values[k]);
        check_point(&params)?;
        Ok::<_, CliError>(battery_power(&params, state, &cfg.optimizer)?)
    });
    let mut table = Table::new([param.column(), "p_max", "t_star", "work", "degenerate_ground"]);
    for (v, r) in values.iter().zip(results) {
        let r = r?;
        table.push(vec![
            (*v).into(),
            r.p_max.into(),
            r.t_star.into(),
            r.work_at_t_star.into(),
            r.degenerate_ground.into(),
        ]);
    }
    Ok(table)
}

fn disorder_sweep(
    cfg: &RunConfig,
    param: SweepParameter,
    values: &[f64],
    workers: usize,
) -> Result<Outcome, CliError> {
    let section: &DisorderSection = cfg
        .disorder
        .as_ref()
        .ok_or_else(|| field_error("disorder", "disorder-sweep needs a [disorder] section or --disorder-* flags"))?;
    let mut table = Table::new([
        param.column(),
        "mean_p_max",
        "std_error",
        "n_realizations",
        "n_failed",
        "converged_2dp",
        "p_max_ordered",
    ]);
    for &v in values {
        let (mut params, state) = point(cfg, param, v);
        let mut spec = section.spec();
        match (param, spec.target) {
            (SweepParameter::Sigma, _) => spec.sigma = v,
            (SweepParameter::DisorderMean, _)
            | (SweepParameter::J, DisorderTarget::Xy)
            | (SweepParameter::Delta, DisorderTarget::Zz) => spec.mean = v,
            _ => {}
        }
        spec.validate().map_err(|e| field_error("sweep", format!("swept value is out of range ({e})")))?;
        // the ordered reference has every targeted bond at the mean
        let bonds = params.n_bonds();
        match spec.target {
            DisorderTarget::Xy => params.xy_couplings = vec![spec.mean; bonds],
            DisorderTarget::Zz => params.zz_couplings = vec![spec.mean; bonds],
        }
        check_point(&params)?;
        let stats = quenched_power(&params, &spec, state, &cfg.optimizer, workers)?;
        let ordered = battery_power(&params, state, &cfg.optimizer)?;
        table.push(vec![
            v.into(),
            stats.mean_p_max.into(),
            stats.std_error.into(),
            stats.n_realizations.into(),
            stats.n_failed.into(),
            stats.converged_2dp.into(),
            ordered.p_max.into(),
        ]);
    }
    Ok(Outcome {
        table,
        seed: Some(section.seed),
    })
}

pub const DEFAULT_BETA_GRID: GridSection = GridSection {
    start: 0.5,
    stop: 10.0,
    step: 0.5,
};

fn thermal_map(cfg: &RunConfig, j_values: &[f64], workers: usize) -> Result<Table, CliError> {
    let g = cfg.thermal_map.unwrap_or(DEFAULT_BETA_GRID);
    let betas = uniform_grid(g.start, g.stop, g.step);
    let cells = thermal_diff_map(&cfg.model.params(), &betas, j_values, &cfg.optimizer, workers)?;
    let mut table = Table::new(["beta", "J_over_h", "p_t_diff"]);
    for c in cells {
        table.push(vec![c.beta_over_h.into(), c.j_over_h.into(), c.p_t_diff.into()]);
    }
    Ok(table)
}

fn entanglement(cfg: &RunConfig, param: SweepParameter, values: &[f64], workers: usize) -> Result<Table, CliError> {
    let at = cfg.observables.at;
    let results = map_indexed(workers, values.len(), |k| -> Result<_, CliError> {
        let (params, state) = point(cfg, param, values[k]);
        check_point(&params)?;
        let h = normalize(&build_h0(&params)?)?;
        let (psi0, _) = prepare(&h, state)?;
        let target = match at {
            EvalPoint::Initial => psi0,
            EvalPoint::TStar => {
                let r = power_max(&psi0, &h, &params, &cfg.optimizer)?;
                evolve(&psi0, &params, r.t_star)?
            }
        };
        Ok(middle_pair_entanglement(&target, params.n_sites)?)
    });
    let mut table = Table::new([param.column(), "negativity", "log_negativity"]);
    for (v, r) in values.iter().zip(results) {
        let e = r?;
        table.push(vec![(*v).into(), e.negativity.into(), e.log_negativity.into()]);
    }
    Ok(table)
}

fn bias_of(cfg: &RunConfig) -> Option<SymmetryBias> {
    let eps = cfg.observables.bias_eps;
    match cfg.observables.bias {
        BiasChoice::None => None,
        BiasChoice::Uniform => Some(SymmetryBias::uniform(eps)),
        BiasChoice::Staggered => Some(SymmetryBias::staggered(eps)),
    }
}

/// With no bias configured, `m_fm` is taken under a uniform bias and
/// `m_afm` under a staggered one, each selecting its own ordered state.
fn order_params(cfg: &RunConfig, param: SweepParameter, values: &[f64], workers: usize) -> Result<Table, CliError> {
    let eps = cfg.observables.bias_eps;
    let bias = bias_of(cfg);
    let results = map_indexed(workers, values.len(), |k| -> Result<_, CliError> {
        let (params, _) = point(cfg, param, values[k]);
        check_point(&params)?;
        Ok(match bias {
            Some(b) => {
                let op = order_parameters(&params, b)?;
                (op.m_fm, op.m_afm)
            }
            None => (
                order_parameters(&params, SymmetryBias::uniform(eps))?.m_fm,
                order_parameters(&params, SymmetryBias::staggered(eps))?.m_afm,
            ),
        })
    });
    let mut table = Table::new([param.column(), "m_fm", "m_afm"]);
    for (v, r) in values.iter().zip(results) {
        let (fm, afm) = r?;
        table.push(vec![(*v).into(), fm.into(), afm.into()]);
    }
    Ok(table)
}

fn fidelity(cfg: &RunConfig, j_values: &[f64], workers: usize) -> Result<Table, CliError> {
    let scan = ground_state_scan(
        &cfg.model.params(),
        j_values,
        cfg.observables.delta_j,
        bias_of(cfg),
        workers,
    )?;
    let mut table = Table::new(["J_over_h", "fidelity"]);
    for p in scan {
        table.push(vec![p.j.into(), p.fidelity.into()]);
    }
    Ok(table)
}

fn scaling(cfg: &RunConfig, j_values: &[f64], workers: usize) -> Result<Table, CliError> {
    let sc = &cfg.scaling;
    let mut curves = Vec::new();
    for &n in &sc.sizes {
        let mut model = cfg.model.clone();
        model.n_sites = n;
        model.zz_couplings = None;
        let params = model.params();
        params.validate().map_err(|e| field_error("scaling.sizes", e))?;
        let curve: Vec<(f64, f64)> = power_curve(&params, j_values, cfg.state, &cfg.optimizer, workers)?
            .into_iter()
            .map(|(j, r)| (j, r.p_max))
            .collect();
        curves.push((n, curve));
    }
    let mut table = Table::new(["transition", "N", "j_c", "prefactor", "exponent", "r_squared"]);
    for (direction, label, j_inf) in [
        (Direction::Descending, "FM-PM", -sc.j_c_infinity),
        (Direction::Ascending, "AFM-PM", sc.j_c_infinity),
    ] {
        let mut found = std::collections::BTreeMap::new();
        for (n, curve) in &curves {
            if let Some(j) = detect_first_jump(curve, direction, sc.jump_factor)? {
                found.insert(*n, j);
            }
        }
        let fit: Option<ScalingFit> = scaling_fit(&found, j_inf).ok();
        let fit_cells = |f: &Option<ScalingFit>| -> Vec<Cell> {
            match f {
                Some(f) => vec![f.prefactor.into(), f.exponent.into(), f.r_squared.into()],
                None => vec!["".into(), "".into(), "".into()],
            }
        };
        for (n, _) in &curves {
            let mut row: Vec<Cell> = vec![label.into(), (*n).into()];
            row.push(found.get(n).map_or(Cell::Text(String::new()), |j| (*j).into()));
            row.extend(fit_cells(&fit));
            table.push(row);
        }
    }
    Ok(table)
}
