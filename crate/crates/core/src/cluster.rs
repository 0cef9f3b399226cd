//! Greedy covering of unit-ball point sets and the covering-number bound it
//! is measured against.

use crate::error::{Error, Result};
use crate::jl::ceil_snapped;
use crate::vector::Vector;

/// A greedy covering: every point lies within `radius` of its center, so
/// points sharing a cluster are within 2 * radius of each other.
#[derive(Clone, Debug)]
pub struct ClusterAssignment {
    pub centers: Vec<Vector>,
    pub membership: Vec<usize>,
    pub radius: f64,
}

impl ClusterAssignment {
    pub fn cluster_count(&self) -> usize {
        self.centers.len()
    }
}

/// Sequential greedy covering: each point joins the first existing center
/// within `radius`, otherwise it becomes a new center. Points must lie in
/// the unit ball (1e-9 slack).
pub fn greedy_cluster(points: &[Vector], radius: f64) -> Result<ClusterAssignment> {
    if points.is_empty() {
        return Err(Error::EmptyInput("cluster points"));
    }
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    for (i, p) in points.iter().enumerate() {
        let ns = p.norm_sq();
        if ns > 1.0 + 1e-9 {
            return Err(Error::NormBound { index: i, norm_sq: ns });
        }
    }
    let mut centers: Vec<Vector> = Vec::new();
    let mut membership = Vec::with_capacity(points.len());
    let r_sq = radius * radius;
    for p in points {
        let found = centers.iter().position(|c| {
            let diff = p.sub(c).expect("equal dims");
            diff.norm_sq() <= r_sq
        });
        match found {
            Some(idx) => membership.push(idx),
            None => {
                centers.push(p.clone());
                membership.push(centers.len() - 1);
            }
        }
    }
    Ok(ClusterAssignment { centers, membership, radius })
}

/// Covering-number bound for the unit ball: ceil((3/radius)^d), valid for
/// radius in (0, 1).
pub fn covering_bound(d: u32, radius: f64) -> Result<u64> {
    if !(radius > 0.0 && radius < 1.0) {
        return Err(Error::InvalidParameter(format!("radius must lie in (0,1), got {radius}")));
    }
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    Ok(ceil_snapped((3.0 / radius).powi(d as i32)))
}

/// The raw (3/radius)^d formula value without the domain restriction, for
/// reporting greedy counts against targets like ceil(e^d) at radius 3/e.
pub fn covering_formula(d: u32, radius: f64) -> Result<f64> {
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    Ok((3.0 / radius).powi(d as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randkit;

    #[test]
    fn identical_points_one_cluster() {
        let p = Vector::new(vec![0.5, 0.1]).unwrap();
        let pts = vec![p.clone(), p.clone(), p];
        let a = greedy_cluster(&pts, 0.3).unwrap();
        assert_eq!(a.cluster_count(), 1);
        assert_eq!(a.membership, vec![0, 0, 0]);
    }

    #[test]
    fn antipodal_points_two_clusters() {
        let a = Vector::new(vec![1.0, 0.0]).unwrap();
        let b = Vector::new(vec![-1.0, 0.0]).unwrap();
        let out = greedy_cluster(&[a, b], 0.5).unwrap();
        assert_eq!(out.cluster_count(), 2);
    }

    #[test]
    fn radius_two_covers_the_ball() {
        let mut rng = randkit::chacha(1);
        let pts: Vec<Vector> =
            (0..200).map(|_| randkit::sample_unit_ball(4, &mut rng).unwrap()).collect();
        let out = greedy_cluster(&pts, 2.0).unwrap();
        assert_eq!(out.cluster_count(), 1);
    }

    #[test]
    fn every_point_within_radius_of_center() {
        let mut rng = randkit::chacha(2);
        let pts: Vec<Vector> =
            (0..300).map(|_| randkit::sample_unit_ball(3, &mut rng).unwrap()).collect();
        let out = greedy_cluster(&pts, 0.4).unwrap();
        for (p, &m) in pts.iter().zip(&out.membership) {
            let dist = p.sub(&out.centers[m]).unwrap().norm();
            assert!(dist <= 0.4 + 1e-12);
        }
    }

    #[test]
    fn norm_violation_rejected() {
        let big = Vector::new(vec![1.5, 0.0]).unwrap();
        assert!(greedy_cluster(&[big], 0.5).is_err());
    }

    #[test]
    fn covering_bound_values() {
        assert_eq!(covering_bound(1, 0.75).unwrap(), 4);
        assert_eq!(covering_bound(2, 0.3).unwrap(), 100);
        assert!(covering_bound(2, 1.2).is_err());
        assert!(covering_bound(2, 0.0).is_err());
    }

    #[test]
    fn cluster_count_for_e_cubed_demo() {
        // 1000 unit-ball points in R^3 at radius 3/e stay under ceil(e^3) = 21.
        let radius = 3.0 / std::f64::consts::E;
        let target = ceil_snapped(std::f64::consts::E.powi(3)) as usize;
        assert_eq!(target, 21);
        let mut rng = randkit::chacha(3);
        let pts: Vec<Vector> =
            (0..1000).map(|_| randkit::sample_unit_ball(3, &mut rng).unwrap()).collect();
        let out = greedy_cluster(&pts, radius).unwrap();
        assert!(out.cluster_count() <= target, "count {}", out.cluster_count());
    }

    #[test]
    fn greedy_count_within_safety_factor_of_formula() {
        // Slack factors cover greedy-vs-optimal looseness: a (6/radius)^d
        // envelope and the covering bound with 4^d slack.
        let mut rng = randkit::chacha(4);
        for d in 1..=5u32 {
            let radius = 0.8;
            let pts: Vec<Vector> = (0..400)
                .map(|_| randkit::sample_unit_ball(d as usize, &mut rng).unwrap())
                .collect();
            let out = greedy_cluster(&pts, radius).unwrap();
            let count = out.cluster_count() as f64;
            let safety = (6.0 / radius).powi(d as i32);
            assert!(count <= safety, "d {d}: count {count} vs {safety}");
            let slacked = covering_bound(d, radius).unwrap() as f64 * 4.0f64.powi(d as i32);
            assert!(count <= slacked, "d {d}: count {count} vs {slacked}");
        }
    }
}
