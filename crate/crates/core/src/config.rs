//! Scenario parameters shared by every stage of the simulator.
//!
//! Powers are stored in the units they are usually quoted in (dBm for noise,
//! dBW for transmit power, dB for the reference attenuation) and converted to
//! watts / linear gain on access. Every computation downstream works in watts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest IRS count supported; tunable sets are stored as 64-bit masks.
pub const MAX_IRS: usize = 64;

/// Placement radii for the synthetic deployment, all in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryParams {
    /// BSs sit on a circle of this radius around the origin.
    pub bs_ring_radius_m: f64,
    /// Distance from a BS, radially outward, to the center of its user cluster.
    pub cluster_offset_m: f64,
    /// Users are uniform in a disk of this radius around the cluster center.
    pub user_disk_radius_m: f64,
    /// Inner radius of the annulus around a cluster center where IRSs may land.
    pub irs_inner_radius_m: f64,
    /// Outer radius of the same annulus.
    pub irs_outer_radius_m: f64,
    /// Link distances below this are clamped before path loss is applied.
    pub min_link_distance_m: f64,
}

impl Default for GeometryParams {
    fn default() -> Self {
        Self {
            bs_ring_radius_m: 100.0,
            cluster_offset_m: 50.0,
            user_disk_radius_m: 20.0,
            irs_inner_radius_m: 5.0,
            irs_outer_radius_m: 30.0,
            min_link_distance_m: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub num_operators: usize,
    pub bs_per_operator: usize,
    pub users_per_bs: usize,
    pub num_irs: usize,
    pub elements_per_irs: usize,
    pub tx_antennas: usize,
    pub noise_power_dbm: f64,
    pub tx_power_dbw: f64,
    pub pathloss_ref_db: f64,
    pub pathloss_ref_dist_m: f64,
    pub alpha_bs_irs: f64,
    pub alpha_irs_user: f64,
    pub alpha_bs_user: f64,
    #[serde(default)]
    pub geometry: GeometryParams,
    #[serde(default)]
    pub seed: u64,
}

impl NetworkConfig {
    /// Small deployment that keeps exhaustive search to 2^4 allocations.
    pub fn desk() -> Self {
        Self {
            num_operators: 2,
            bs_per_operator: 2,
            users_per_bs: 2,
            num_irs: 4,
            elements_per_irs: 16,
            tx_antennas: 4,
            ..Self::paper()
        }
    }

    /// Full-scale deployment: 3 operators, 2 BSs each with 8 antennas and 3 users,
    /// 6 IRSs of 64 elements, -70 dBm noise, -5 dBW budget, C0 = -30 dB at 1 m,
    /// exponents 2.5 / 2.8 / 3.5.
    pub fn paper() -> Self {
        Self {
            num_operators: 3,
            bs_per_operator: 2,
            users_per_bs: 3,
            num_irs: 6,
            elements_per_irs: 64,
            tx_antennas: 8,
            noise_power_dbm: -70.0,
            tx_power_dbw: -5.0,
            pathloss_ref_db: -30.0,
            pathloss_ref_dist_m: 1.0,
            alpha_bs_irs: 2.5,
            alpha_irs_user: 2.8,
            alpha_bs_user: 3.5,
            geometry: GeometryParams::default(),
            seed: 0,
        }
    }

    pub fn num_bs(&self) -> usize {
        self.num_operators * self.bs_per_operator
    }

    /// Global BS index of the `n`-th BS of operator `s`.
    pub fn bs_index(&self, operator: usize, n: usize) -> usize {
        operator * self.bs_per_operator + n
    }

    pub fn operator_of_bs(&self, bs: usize) -> usize {
        bs / self.bs_per_operator
    }

    pub fn noise_power_w(&self) -> f64 {
        dbm_to_watts(self.noise_power_dbm)
    }

    pub fn tx_power_w(&self) -> f64 {
        dbw_to_watts(self.tx_power_dbw)
    }

    pub fn pathloss_ref_linear(&self) -> f64 {
        db_to_linear(self.pathloss_ref_db)
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_operators", self.num_operators),
            ("bs_per_operator", self.bs_per_operator),
            ("users_per_bs", self.users_per_bs),
            ("num_irs", self.num_irs),
            ("elements_per_irs", self.elements_per_irs),
            ("tx_antennas", self.tx_antennas),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be at least 1")));
            }
        }
        if self.users_per_bs > self.tx_antennas {
            return Err(Error::InvalidConfig(format!(
                "users_per_bs ({}) exceeds tx_antennas ({}); zero-forcing is infeasible",
                self.users_per_bs, self.tx_antennas
            )));
        }
        if self.num_irs > MAX_IRS {
            return Err(Error::InvalidConfig(format!(
                "num_irs ({}) exceeds the supported maximum of {MAX_IRS}",
                self.num_irs
            )));
        }
        let finite = [
            ("noise_power_dbm", self.noise_power_dbm),
            ("tx_power_dbw", self.tx_power_dbw),
            ("pathloss_ref_db", self.pathloss_ref_db),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite")));
            }
        }
        let positive = [
            ("pathloss_ref_dist_m", self.pathloss_ref_dist_m),
            ("alpha_bs_irs", self.alpha_bs_irs),
            ("alpha_irs_user", self.alpha_irs_user),
            ("alpha_bs_user", self.alpha_bs_user),
            ("geometry.bs_ring_radius_m", self.geometry.bs_ring_radius_m),
            ("geometry.cluster_offset_m", self.geometry.cluster_offset_m),
            ("geometry.min_link_distance_m", self.geometry.min_link_distance_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be finite and > 0")));
            }
        }
        let g = &self.geometry;
        if !(g.user_disk_radius_m >= 0.0 && g.user_disk_radius_m < g.cluster_offset_m) {
            return Err(Error::InvalidConfig(
                "geometry.user_disk_radius_m must lie in [0, cluster_offset_m)".into(),
            ));
        }
        if !(g.irs_inner_radius_m >= 0.0 && g.irs_inner_radius_m <= g.irs_outer_radius_m) {
            return Err(Error::InvalidConfig(
                "geometry requires 0 <= irs_inner_radius_m <= irs_outer_radius_m".into(),
            ));
        }
        if g.irs_outer_radius_m >= g.bs_ring_radius_m + g.cluster_offset_m {
            return Err(Error::InvalidConfig(
                "geometry.irs_outer_radius_m must be smaller than the cluster ring radius".into(),
            ));
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbw_to_watts(dbw: f64) -> f64 {
    db_to_linear(dbw)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}
