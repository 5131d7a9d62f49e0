//! Deployment geometry and distance-dependent path loss.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::NetworkConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    /// Indexed by global BS index (`operator * bs_per_operator + n`).
    pub bs_positions: Vec<Point>,
    /// Center of each BS's user cluster, same indexing as `bs_positions`.
    pub cluster_centers: Vec<Point>,
    /// `user_positions[bs][k]`.
    pub user_positions: Vec<Vec<Point>>,
    pub irs_positions: Vec<Point>,
}

/// Linear power gain `C0 (d / d0)^(-alpha)`.
pub fn path_loss_linear(distance_m: f64, alpha: f64, config: &NetworkConfig) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::Domain(format!(
            "path loss needs a positive finite distance, got {distance_m}"
        )));
    }
    let ratio = distance_m / config.pathloss_ref_dist_m;
    Ok(config.pathloss_ref_linear() * ratio.powf(-alpha))
}

fn uniform_in_annulus<R: Rng + ?Sized>(rng: &mut R, inner: f64, outer: f64) -> Point {
    // Inverse-CDF in r^2 gives a uniform area density.
    let u: f64 = rng.random();
    let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
    Point::polar(r, TAU * rng.random::<f64>())
}

/// Places BSs, users and IRSs.
///
/// BSs are spread evenly over a ring with operators interleaved, so the `n`-th
/// BS of operator `s` sits at angular slot `n * S + s`. Each BS's users form a
/// cluster pushed radially outward from it. IRSs are uniform over the union of
/// the annuli around all cluster centers (rejection on overlap multiplicity).
pub fn generate_topology<R: Rng + ?Sized>(config: &NetworkConfig, rng: &mut R) -> Result<Topology> {
    config.validate()?;
    let g = &config.geometry;
    let num_bs = config.num_bs();
    let slots = num_bs as f64;

    let mut bs_positions = vec![Point::new(0.0, 0.0); num_bs];
    let mut cluster_centers = vec![Point::new(0.0, 0.0); num_bs];
    for s in 0..config.num_operators {
        for n in 0..config.bs_per_operator {
            let slot = (n * config.num_operators + s) as f64;
            let angle = TAU * slot / slots;
            let b = config.bs_index(s, n);
            bs_positions[b] = Point::polar(g.bs_ring_radius_m, angle);
            cluster_centers[b] = Point::polar(g.bs_ring_radius_m + g.cluster_offset_m, angle);
        }
    }

    let user_positions = cluster_centers
        .iter()
        .map(|&c| {
            (0..config.users_per_bs)
                .map(|_| c + uniform_in_annulus(rng, 0.0, g.user_disk_radius_m))
                .collect()
        })
        .collect();

    let mut irs_positions = Vec::with_capacity(config.num_irs);
    while irs_positions.len() < config.num_irs {
        let center = cluster_centers[rng.random_range(0..num_bs)];
        let p = center + uniform_in_annulus(rng, g.irs_inner_radius_m, g.irs_outer_radius_m);
        let multiplicity = cluster_centers
            .iter()
            .filter(|c| {
                let d = c.distance(&p);
                d >= g.irs_inner_radius_m && d <= g.irs_outer_radius_m
            })
            .count()
            .max(1);
        if multiplicity == 1 || rng.random::<f64>() * (multiplicity as f64) < 1.0 {
            irs_positions.push(p);
        }
    }

    Ok(Topology {
        bs_positions,
        cluster_centers,
        user_positions,
        irs_positions,
    })
}
