//! Stored run configurations that regenerate each figure-style data set.

use std::path::{Path, PathBuf};

use spinbattery_core::analysis::{find_jmax, power_curve, uniform_grid};
use spinbattery_core::{DisorderTarget, StatePrep};

use crate::commands::{self, Kind};
use crate::config::{
    BiasChoice, DisorderSection, Format, GridSection, RunConfig, SweepParameter, SweepSection,
};
use crate::error::CliError;
use crate::output::{emit, encode, Header, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Recipe {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    #[value(name = "appendixA", alias = "appendix-a")]
    AppendixA,
}

impl Recipe {
    pub fn name(self) -> &'static str {
        match self {
            Recipe::Fig1 => "fig1",
            Recipe::Fig2 => "fig2",
            Recipe::Fig3 => "fig3",
            Recipe::Fig4 => "fig4",
            Recipe::Fig5 => "fig5",
            Recipe::Fig6 => "fig6",
            Recipe::Fig7 => "fig7",
            Recipe::Fig8 => "fig8",
            Recipe::AppendixA => "appendixA",
        }
    }
}

/// Knobs shared by every recipe.
#[derive(Clone, Debug)]
pub struct RecipeOptions {
    pub out_dir: PathBuf,
    pub format: Format,
    pub workers: usize,
    pub j_step: f64,
    pub realizations: usize,
    pub sigmas: Vec<f64>,
    pub seed: u64,
    pub grid_points: Option<usize>,
}

/// The four `(Δ, γ)` families used by the thermal and disorder recipes.
const FAMILIES: [(f64, f64); 4] = [(0.0, 0.0), (0.0, 0.4), (1.0, 0.0), (1.0, 0.4)];

struct Job {
    stem: String,
    kind: Kind,
    cfg: RunConfig,
}

fn base(opts: &RecipeOptions, n_sites: usize, gamma: f64, delta: f64) -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.model.n_sites = n_sites;
    cfg.model.gamma = gamma;
    cfg.model.delta = delta;
    cfg.sweep = Some(SweepSection {
        parameter: SweepParameter::J,
        start: -2.0,
        stop: 2.0,
        step: opts.j_step,
    });
    if let Some(g) = opts.grid_points {
        cfg.optimizer.grid_points = g;
    }
    cfg.output.format = opts.format;
    cfg
}

fn tag(x: f64) -> String {
    format!("{x}")
}

fn jobs(recipe: Recipe, opts: &RecipeOptions) -> Vec<Job> {
    let mut out = Vec::new();
    let mut push = |stem: String, kind: Kind, cfg: RunConfig| out.push(Job { stem, kind, cfg });
    match recipe {
        Recipe::Fig1 => {
            for gamma in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
                push(format!("fig1_gamma{}", tag(gamma)), Kind::PowerSweep, base(opts, 8, gamma, 0.0));
            }
        }
        Recipe::Fig2 => {}
        Recipe::Fig3 => {
            for n in [4, 6, 8, 10] {
                push(format!("fig3_N{n}"), Kind::PowerSweep, base(opts, n, 0.1, 0.0));
            }
            push("fig3_scaling".into(), Kind::ScalingFit, base(opts, 8, 0.1, 0.0));
        }
        Recipe::Fig4 => {
            for delta in [0.0, 0.5, 1.0] {
                for gamma in [0.0, 0.4, 0.8] {
                    push(
                        format!("fig4_delta{}_gamma{}", tag(delta), tag(gamma)),
                        Kind::Entanglement,
                        base(opts, 8, gamma, delta),
                    );
                }
            }
        }
        Recipe::Fig5 => {
            for delta in [-0.5, 0.5, 1.0] {
                for gamma in [0.0, 0.4, 0.8] {
                    push(
                        format!("fig5_delta{}_gamma{}", tag(delta), tag(gamma)),
                        Kind::PowerSweep,
                        base(opts, 8, gamma, delta),
                    );
                }
            }
        }
        Recipe::Fig6 => {
            for (delta, gamma) in FAMILIES {
                let mut cfg = base(opts, 4, gamma, delta);
                cfg.sweep.as_mut().unwrap().step = opts.j_step.max(0.05);
                cfg.thermal_map = Some(GridSection {
                    start: 0.1,
                    stop: 10.0,
                    step: 0.1,
                });
                push(format!("fig6_delta{}_gamma{}", tag(delta), tag(gamma)), Kind::ThermalMap, cfg);
            }
        }
        Recipe::Fig7 | Recipe::Fig8 => {
            let target = if recipe == Recipe::Fig7 {
                DisorderTarget::Xy
            } else {
                DisorderTarget::Zz
            };
            for (delta, gamma) in FAMILIES {
                for &sigma in &opts.sigmas {
                    let mut cfg = base(opts, 8, gamma, delta);
                    cfg.sweep.as_mut().unwrap().step = opts.j_step.max(0.1);
                    cfg.disorder = Some(DisorderSection {
                        target,
                        mean: if target == DisorderTarget::Zz { delta } else { 0.0 },
                        sigma,
                        realizations: opts.realizations,
                        seed: opts.seed,
                    });
                    push(
                        format!("{}_delta{}_gamma{}_sigma{}", recipe.name(), tag(delta), tag(gamma), tag(sigma)),
                        Kind::DisorderSweep,
                        cfg,
                    );
                }
            }
        }
        Recipe::AppendixA => {
            for gamma in [0.1, 0.8] {
                let mut order = base(opts, 10, gamma, 0.0);
                order.sweep.as_mut().unwrap().step = 0.005;
                push(format!("appendixA_gamma{}_order", tag(gamma)), Kind::OrderParams, order.clone());
                for (label, bias, start, stop) in [
                    ("fm", BiasChoice::Uniform, -2.0, 0.0),
                    ("afm", BiasChoice::Staggered, 0.0, 2.0),
                ] {
                    let mut cfg = order.clone();
                    cfg.observables.bias = bias;
                    let sweep = cfg.sweep.as_mut().unwrap();
                    sweep.start = start;
                    sweep.stop = stop;
                    push(format!("appendixA_gamma{}_fidelity_{label}", tag(gamma)), Kind::FidelityScan, cfg);
                }
            }
        }
    }
    out
}

fn file_name(stem: &str, format: Format) -> String {
    match format {
        Format::Csv => format!("{stem}.csv"),
        Format::Json => format!("{stem}.json"),
    }
}

/// Runs every job of the recipe and returns the files written.
pub fn run(recipe: Recipe, opts: &RecipeOptions) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    if recipe == Recipe::Fig2 {
        written.push(advantage_table(opts)?);
        return Ok(written);
    }
    for job in jobs(recipe, opts) {
        let outcome = commands::run(job.kind, &job.cfg, opts.workers)?;
        let path = opts.out_dir.join(file_name(&job.stem, opts.format));
        write_table(&outcome.table, job.kind.name(), outcome.seed, &job.cfg, &path, opts.format)?;
        written.push(path);
    }
    Ok(written)
}

fn write_table(
    table: &Table,
    command: &str,
    seed: Option<u64>,
    cfg: &RunConfig,
    path: &Path,
    format: Format,
) -> Result<(), CliError> {
    let header = Header {
        command,
        seed,
        config: cfg,
    };
    emit(&encode(table, &header, format)?, Some(path))
}

/// `J_max`, `P_adv` and relative gain over `γ ∈ [0, 1]` for N ∈ {4, 6, 8}.
fn advantage_table(opts: &RecipeOptions) -> Result<PathBuf, CliError> {
    let cfg = base(opts, 8, 0.0, 0.0);
    let sweep = cfg.sweep();
    let js = uniform_grid(sweep.start, sweep.stop, sweep.step);
    let mut table = Table::new(["gamma", "N", "j_max", "p_adv", "relative_gain"]);
    for gamma in uniform_grid(0.0, 1.0, 0.1) {
        for n in [4, 6, 8] {
            let mut model = cfg.model.clone();
            model.n_sites = n;
            model.gamma = gamma;
            let curve: Vec<(f64, f64)> = power_curve(&model.params(), &js, StatePrep::Ground, &cfg.optimizer, opts.workers)?
                .into_iter()
                .map(|(j, r)| (j, r.p_max))
                .collect();
            let adv = find_jmax(&curve, (sweep.start, sweep.stop))?;
            table.push(vec![
                gamma.into(),
                n.into(),
                adv.j_max_over_h.into(),
                adv.p_adv.into(),
                adv.relative_gain.into(),
            ]);
        }
    }
    let path = opts.out_dir.join(file_name("fig2_advantage", opts.format));
    write_table(&table, "recipe fig2", None, &cfg, &path, opts.format)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> RecipeOptions {
        RecipeOptions {
            out_dir: PathBuf::from("unused"),
            format: Format::Csv,
            workers: 1,
            j_step: 0.01,
            realizations: 5000,
            sigmas: vec![0.0, 0.5, 1.0],
            seed: 0,
            grid_points: None,
        }
    }

    #[test]
    fn every_recipe_config_validates() {
        for r in [
            Recipe::Fig1,
            Recipe::Fig3,
            Recipe::Fig4,
            Recipe::Fig5,
            Recipe::Fig6,
            Recipe::Fig7,
            Recipe::Fig8,
            Recipe::AppendixA,
        ] {
            let jobs = jobs(r, &opts());
            assert!(!jobs.is_empty(), "{r:?}");
            for j in jobs {
                j.cfg.validate().unwrap();
            }
        }
    }

    #[test]
    fn thermal_recipe_uses_four_site_families() {
        let jobs = jobs(Recipe::Fig6, &opts());
        assert_eq!(jobs.len(), 4);
        assert!(jobs.iter().all(|j| j.cfg.model.n_sites == 4 && j.kind == Kind::ThermalMap));
    }

    #[test]
    fn disorder_recipes_cover_every_sigma() {
        let jobs = jobs(Recipe::Fig8, &opts());
        assert_eq!(jobs.len(), 12);
        let d = jobs[0].cfg.disorder.as_ref().unwrap();
        assert_eq!(d.target, DisorderTarget::Zz);
        assert_eq!(d.realizations, 5000);
    }

    #[test]
    fn appendix_recipe_uses_ten_sites_and_a_fine_grid() {
        let jobs = jobs(Recipe::AppendixA, &opts());
        assert_eq!(jobs.len(), 6);
        for j in &jobs {
            assert_eq!(j.cfg.model.n_sites, 10);
            assert_eq!(j.cfg.observables.delta_j, 0.005);
        }
    }
}
