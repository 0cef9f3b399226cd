//! Run reports and their CSV projection.
//!
//! Memory is accounted logically: retained embedding vectors times d times 8
//! bytes of binary64, which is what the space bounds count. One CSV row is
//! emitted per (instance, estimator, seed, query step, coordinate).

use crate::vector::Vector;

pub const CSV_HEADER: &str =
    "instance_id,estimator,step,coord,exact,estimate,rel_error,stored_vectors,stored_bytes,wall_ms,seed";

/// Aggregate outcome of one estimator run at one query step.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub instance_id: String,
    pub estimator: String,
    pub step: usize,
    pub per_coordinate_error: Vec<f64>,
    pub max_rel_error: f64,
    pub stored_vector_count: usize,
    pub stored_bytes: usize,
    pub wall_time_ms: u128,
    pub seed: u64,
    pub exact: Vector,
    pub estimate: Vector,
}

impl RunReport {
    /// Compares an estimate against the exact oracle. `max_rel_error` ranges
    /// over coordinates whose exact magnitude reaches `mean_lower_bound`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_comparison(
        instance_id: &str,
        estimator: &str,
        step: usize,
        exact: Vector,
        estimate: Vector,
        mean_lower_bound: f64,
        stored_vector_count: usize,
        dim: usize,
        wall_time_ms: u128,
        seed: u64,
    ) -> Self {
        let per_coordinate_error: Vec<f64> = exact
            .as_slice()
            .iter()
            .zip(estimate.as_slice())
            .map(|(x, e)| (e - x).abs())
            .collect();
        let max_rel_error = exact
            .as_slice()
            .iter()
            .zip(estimate.as_slice())
            .filter(|(x, _)| x.abs() >= mean_lower_bound)
            .map(|(x, e)| (e - x).abs() / x.abs())
            .fold(0.0f64, f64::max);
        RunReport {
            instance_id: instance_id.to_string(),
            estimator: estimator.to_string(),
            step,
            per_coordinate_error,
            max_rel_error,
            stored_vector_count,
            stored_bytes: stored_vector_count * dim * 8,
            wall_time_ms,
            seed,
            exact,
            estimate,
        }
    }

    /// One CSV row per coordinate.
    pub fn csv_rows(&self) -> Vec<String> {
        (0..self.exact.dim())
            .map(|j| {
                let exact = self.exact[j];
                let estimate = self.estimate[j];
                let rel = if exact != 0.0 {
                    format!("{}", (estimate - exact).abs() / exact.abs())
                } else {
                    "nan".to_string()
                };
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    self.instance_id,
                    self.estimator,
                    self.step,
                    j,
                    exact,
                    estimate,
                    rel,
                    self.stored_vector_count,
                    self.stored_bytes,
                    self.wall_time_ms,
                    self.seed
                )
            })
            .collect()
    }
}
