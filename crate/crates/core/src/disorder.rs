//! Quenched averages of the maximal power over Gaussian coupling disorder.

use serde::{Deserialize, Serialize};

use crate::dynamics::{battery_power, OptimizerConfig};
use crate::error::{Error, Result};
use crate::model::{sample_realization, DisorderSpec, ModelParams};
use crate::parallel::map_indexed;
use crate::states::StatePrep;

/// Second-decimal stability window: the running mean over the last 10% of
/// realizations must stay within this band.
pub const CONVERGENCE_BAND: f64 = 0.005;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderStats {
    pub mean_p_max: f64,
    pub std_error: f64,
    /// Realizations that entered the average.
    pub n_realizations: usize,
    /// Realizations excluded because their spectrum could not be normalized.
    pub n_failed: usize,
    pub master_seed: u64,
    pub converged_2dp: bool,
}

/// `P_max` of each realization in index order; `None` marks a realization
/// whose Hamiltonian had a degenerate (unnormalizable) spectrum.
pub fn realization_powers(
    base: &ModelParams,
    spec: &DisorderSpec,
    prep: StatePrep,
    opt: &OptimizerConfig,
    workers: usize,
) -> Result<Vec<Option<f64>>> {
    base.validate()?;
    spec.validate()?;
    opt.validate()?;
    let results = map_indexed(workers, spec.n_realizations, |k| {
        let params = sample_realization(base, spec, k);
        match battery_power(&params, prep, opt) {
            Ok(r) => Ok(Some(r.p_max)),
            Err(Error::DegenerateSpectrum { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    });
    results.into_iter().collect()
}

/// Monte Carlo estimate of the disorder-averaged `P_max`.
pub fn quenched_power(
    base: &ModelParams,
    spec: &DisorderSpec,
    prep: StatePrep,
    opt: &OptimizerConfig,
    workers: usize,
) -> Result<DisorderStats> {
    let values = realization_powers(base, spec, prep, opt, workers)?;
    summarize(&values, spec.master_seed)
}

/// Ordered reduction of per-realization values into [`DisorderStats`].
pub fn summarize(values: &[Option<f64>], master_seed: u64) -> Result<DisorderStats> {
    let total = values.len();
    let ok: Vec<f64> = values.iter().flatten().copied().collect();
    let failed = total - ok.len();
    // more than 1% failures
    if failed * 100 > total || ok.is_empty() {
        return Err(Error::TooManyFailedRealizations { failed, total });
    }
    let n = ok.len();
    let mean = ok.iter().sum::<f64>() / n as f64;
    let std_error = if n > 1 {
        let var = ok.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        var.sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    Ok(DisorderStats {
        mean_p_max: mean,
        std_error,
        n_realizations: n,
        n_failed: failed,
        master_seed,
        converged_2dp: running_mean_converged(&ok, CONVERGENCE_BAND),
    })
}

/// True when the running mean over the final 10% of samples varies by less
/// than `band`.
pub fn running_mean_converged(values: &[f64], band: f64) -> bool {
    let n = values.len();
    if n == 0 {
        return false;
    }
    let start = n - n.div_ceil(10);
    let mut sum = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, x) in values.iter().enumerate() {
        sum += x;
        if i + 1 > start {
            let m = sum / (i + 1) as f64;
            lo = lo.min(m);
            hi = hi.max(m);
        }
    }
    hi - lo < band
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DisorderTarget;

    fn opt() -> OptimizerConfig {
        OptimizerConfig::default().with_grid_points(400)
    }

    #[test]
    fn zero_sigma_reproduces_ordered_power() {
        let base = ModelParams::uniform(4, 0.2, 0.6, 0.0);
        let ordered = battery_power(&base, StatePrep::Ground, &opt()).unwrap().p_max;
        let spec = DisorderSpec::new(DisorderTarget::Xy, 0.6, 0.0).with_realizations(5).with_seed(3);
        let stats = quenched_power(&base, &spec, StatePrep::Ground, &opt(), 1).unwrap();
        assert_eq!(stats.mean_p_max, ordered);
        assert_eq!(stats.std_error, 0.0);
        assert_eq!(stats.n_realizations, 5);
        assert!(stats.converged_2dp);
    }

    #[test]
    fn same_seed_is_bitwise_reproducible_across_workers() {
        let base = ModelParams::uniform(4, 0.0, -0.5, 1.0);
        let spec = DisorderSpec::new(DisorderTarget::Zz, 1.0, 0.7).with_realizations(24).with_seed(99);
        let a = quenched_power(&base, &spec, StatePrep::Ground, &opt(), 1).unwrap();
        let b = quenched_power(&base, &spec, StatePrep::Ground, &opt(), 1).unwrap();
        let c = quenched_power(&base, &spec, StatePrep::Ground, &opt(), 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(a.std_error > 0.0);
    }

    #[test]
    fn std_error_is_sample_std_over_root_n() {
        let vals = [1.0, 2.0, 4.0, 7.0].map(Some);
        let s = summarize(&vals, 0).unwrap();
        let mean = 3.5;
        let var = [1.0f64, 2.0, 4.0, 7.0].iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 3.0;
        assert!((s.std_error - var.sqrt() / 2.0).abs() < 1e-12);
        assert_eq!(s.mean_p_max, mean);
    }

    #[test]
    fn failures_are_excluded_up_to_one_percent() {
        let mut vals: Vec<Option<f64>> = vec![Some(1.0); 200];
        vals[7] = None;
        vals[100] = None;
        let s = summarize(&vals, 0).unwrap();
        assert_eq!((s.n_realizations, s.n_failed), (198, 2));
        vals[150] = None;
        assert!(matches!(
            summarize(&vals, 0),
            Err(Error::TooManyFailedRealizations { failed: 3, total: 200 })
        ));
    }

    #[test]
    fn degenerate_realizations_are_counted_not_fatal() {
        // h = 0, J = 0: H0 is the zz chain; sigma = 0 with mean 0 makes
        // every realization the zero operator.
        let base = ModelParams::uniform(3, 0.0, 0.0, 0.0).with_field(0.0);
        let spec = DisorderSpec::new(DisorderTarget::Zz, 0.0, 0.0).with_realizations(4);
        let vals = realization_powers(&base, &spec, StatePrep::Ground, &opt(), 1).unwrap();
        assert!(vals.iter().all(Option::is_none));
        assert!(quenched_power(&base, &spec, StatePrep::Ground, &opt(), 1).is_err());
    }

    #[test]
    fn convergence_window() {
        assert!(running_mean_converged(&[0.5; 50], 0.005));
        let mut v = vec![0.0; 90];
        v.extend([10.0; 10]);
        assert!(!running_mean_converged(&v, 0.005));
        assert!(!running_mean_converged(&[], 0.005));
    }

    #[test]
    fn tiny_sigma_tracks_ordered_value() {
        let base = ModelParams::uniform(4, 0.0, -0.8, 1.0);
        let ordered = battery_power(&base, StatePrep::Ground, &opt()).unwrap().p_max;
        let spec = DisorderSpec::new(DisorderTarget::Xy, -0.8, 1e-4).with_realizations(200).with_seed(5);
        let s = quenched_power(&base, &spec, StatePrep::Ground, &opt(), 1).unwrap();
        assert!((s.mean_p_max - ordered).abs() <= 1e-2);
    }
}
