use serde::{Deserialize, Serialize};

use super::{branch_max_current, default_target_branch, solve_opf, OpfProblem};
use crate::network::{apply_demand_step, Conductor, DemandStep};
use crate::nlp::IpmStatus;
use crate::power_flow;
use crate::{Error, Result};

/// One timestep of a series run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: usize,
    pub timestamp: String,
    /// Largest phase current on the monitored branch without the converter, A.
    pub max_current_unmitigated: Option<f64>,
    /// Same with the optimized converter currents, A.
    pub max_current_mitigated: Option<f64>,
    pub objective_value: Option<f64>,
    /// Summed `|ripple|` over converters, W.
    pub ripple_w: Option<f64>,
    /// Largest neutral-leg current over converters, A.
    pub neutral_current_a: Option<f64>,
    pub status: Option<IpmStatus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesResult {
    pub steps: Vec<StepRecord>,
    /// Descending unmitigated maximum phase currents, A.
    pub duration_unmitigated: Vec<f64>,
    /// Descending mitigated maximum phase currents, A.
    pub duration_mitigated: Vec<f64>,
}

impl SeriesResult {
    pub fn failed_steps(&self) -> usize {
        self.steps.iter().filter(|s| s.error.is_some()).count()
    }

    /// Reduction of the series peak phase current, A.
    pub fn peak_reduction(&self) -> Option<f64> {
        Some(self.duration_unmitigated.first()? - self.duration_mitigated.first()?)
    }
}

/// Sorted copy in descending order.
pub fn duration_curve(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn run_step(template: &OpfProblem, branch: &str, index: usize, step: &DemandStep) -> StepRecord {
    let mut rec = StepRecord {
        index,
        timestamp: step.timestamp.clone(),
        max_current_unmitigated: None,
        max_current_mitigated: None,
        objective_value: None,
        ripple_w: None,
        neutral_current_a: None,
        status: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let net = apply_demand_step(&template.network, step)?;
        let pf = power_flow::solve(&net, &power_flow::zero_setpoints(&net))?;
        rec.max_current_unmitigated =
            Some(branch_max_current(&pf.state, branch, &Conductor::PHASES));
        let problem = OpfProblem {
            network: net,
            ..template.clone()
        };
        let sol = solve_opf(&problem, Some(&pf.state))?;
        rec.max_current_mitigated =
            Some(branch_max_current(&sol.state, branch, &Conductor::PHASES));
        rec.objective_value = Some(sol.objective_value);
        rec.ripple_w = Some(sol.ripple_per_vsc.values().sum());
        rec.neutral_current_a = Some(
            sol.neutral_current_per_vsc
                .values()
                .copied()
                .fold(0.0, f64::max),
        );
        rec.status = Some(sol.solver_stats.status);
        if sol.solver_stats.status != IpmStatus::LocalOptimum {
            rec.error = Some(format!("solver stopped with {:?}", sol.solver_stats.status));
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.error = Some(e.to_string());
    }
    rec
}

/// Solves every demand step independently on a pool of `workers` threads.
/// Records come back in timestep order regardless of scheduling; failed
/// steps carry an error message and are left out of the duration curves.
pub fn run_timeseries(
    template: &OpfProblem,
    demand: &[DemandStep],
    workers: usize,
) -> Result<SeriesResult> {
    use rayon::prelude::*;

    if workers == 0 {
        return Err(Error::invalid("workers", "must be at least 1"));
    }
    template.network.ensure_valid()?;
    let branch = template
        .objective
        .target_branch
        .clone()
        .or_else(|| default_target_branch(&template.network))
        .ok_or_else(|| Error::invalid("target_branch", "network has no branch at a source"))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    let steps: Vec<StepRecord> = pool.install(|| {
        demand
            .par_iter()
            .enumerate()
            .map(|(i, s)| run_step(template, &branch, i, s))
            .collect()
    });
    let ok: Vec<&StepRecord> = steps.iter().filter(|s| s.error.is_none()).collect();
    let un: Vec<f64> = ok
        .iter()
        .filter_map(|s| s.max_current_unmitigated)
        .collect();
    let mi: Vec<f64> = ok.iter().filter_map(|s| s.max_current_mitigated).collect();
    Ok(SeriesResult {
        duration_unmitigated: duration_curve(&un),
        duration_mitigated: duration_curve(&mi),
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn duration_curve_sorts_descending() {
        assert_eq!(duration_curve(&[1.0, 3.0, 2.0]), vec![3.0, 2.0, 1.0]);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let p = presets::case("case1d").unwrap();
        let demand: Vec<_> = presets::demand_48().into_iter().step_by(8).collect();
        let one = run_timeseries(&p, &demand, 1).unwrap();
        let four = run_timeseries(&p, &demand, 4).unwrap();
        assert_eq!(one, four);
        assert_eq!(one.failed_steps(), 0);
        assert!(one.steps.iter().enumerate().all(|(i, s)| s.index == i));
    }

    #[test]
    fn zero_workers_is_rejected() {
        let p = presets::case("case1a").unwrap();
        assert!(run_timeseries(&p, &presets::demand_48(), 0).is_err());
    }
}
