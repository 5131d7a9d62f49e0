//! Quasi-static flat Rayleigh fading channels.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::NetworkConfig;
use crate::error::{Error, Result};
use crate::topology::{path_loss_linear, Topology};

/// One realization of every BS→IRS, IRS→user and BS→user channel.
///
/// BSs are addressed by their global index (see [`NetworkConfig::bs_index`]).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    num_irs: usize,
    num_bs: usize,
    users_per_bs: usize,
    elements: usize,
    tx_antennas: usize,
    /// `g[l * num_bs + b]`, M x Nt.
    g: Vec<DMatrix<Complex64>>,
    /// `h_r[(l * num_bs + b) * K + k]`, length M.
    h_r: Vec<DVector<Complex64>>,
    /// `h_d[b * K + k]`, length Nt.
    h_d: Vec<DVector<Complex64>>,
}

impl ChannelSet {
    /// Assembles a channel set from explicit matrices, checking every dimension.
    pub fn from_parts(
        num_irs: usize,
        num_bs: usize,
        users_per_bs: usize,
        g: Vec<DMatrix<Complex64>>,
        h_r: Vec<DVector<Complex64>>,
        h_d: Vec<DVector<Complex64>>,
    ) -> Result<Self> {
        let first = g
            .first()
            .ok_or_else(|| Error::Dimension("at least one BS-IRS channel is required".into()))?;
        let (elements, tx_antennas) = first.shape();
        if g.len() != num_irs * num_bs {
            return Err(Error::Dimension(format!(
                "expected {} BS-IRS matrices, got {}",
                num_irs * num_bs,
                g.len()
            )));
        }
        if h_r.len() != num_irs * num_bs * users_per_bs {
            return Err(Error::Dimension(format!(
                "expected {} IRS-user vectors, got {}",
                num_irs * num_bs * users_per_bs,
                h_r.len()
            )));
        }
        if h_d.len() != num_bs * users_per_bs {
            return Err(Error::Dimension(format!(
                "expected {} direct vectors, got {}",
                num_bs * users_per_bs,
                h_d.len()
            )));
        }
        if g.iter().any(|m| m.shape() != (elements, tx_antennas)) {
            return Err(Error::Dimension("BS-IRS matrices differ in shape".into()));
        }
        if h_r.iter().any(|v| v.len() != elements) {
            return Err(Error::Dimension("IRS-user vector length != elements".into()));
        }
        if h_d.iter().any(|v| v.len() != tx_antennas) {
            return Err(Error::Dimension("direct vector length != tx antennas".into()));
        }
        let finite = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        if !(g.iter().all(|m| m.iter().all(finite))
            && h_r.iter().all(|v| v.iter().all(finite))
            && h_d.iter().all(|v| v.iter().all(finite)))
        {
            return Err(Error::Domain("channel entries must be finite".into()));
        }
        Ok(Self {
            num_irs,
            num_bs,
            users_per_bs,
            elements,
            tx_antennas,
            g,
            h_r,
            h_d,
        })
    }

    pub fn num_irs(&self) -> usize {
        self.num_irs
    }

    pub fn num_bs(&self) -> usize {
        self.num_bs
    }

    pub fn users_per_bs(&self) -> usize {
        self.users_per_bs
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn tx_antennas(&self) -> usize {
        self.tx_antennas
    }

    pub fn g(&self, irs: usize, bs: usize) -> &DMatrix<Complex64> {
        &self.g[irs * self.num_bs + bs]
    }

    pub fn h_r(&self, irs: usize, bs: usize, user: usize) -> &DVector<Complex64> {
        &self.h_r[(irs * self.num_bs + bs) * self.users_per_bs + user]
    }

    pub fn h_d(&self, bs: usize, user: usize) -> &DVector<Complex64> {
        &self.h_d[bs * self.users_per_bs + user]
    }

    /// Checks that this realization was drawn for `config`.
    pub fn check_matches(&self, config: &NetworkConfig) -> Result<()> {
        let expected = (
            config.num_irs,
            config.num_bs(),
            config.users_per_bs,
            config.elements_per_irs,
            config.tx_antennas,
        );
        let actual = (
            self.num_irs,
            self.num_bs,
            self.users_per_bs,
            self.elements,
            self.tx_antennas,
        );
        if expected != actual {
            return Err(Error::Dimension(format!(
                "channel set (L, BSs, K, M, Nt) = {actual:?} does not match config {expected:?}"
            )));
        }
        Ok(())
    }
}

/// Circularly-symmetric complex Gaussian sample with the given total variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let scale = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}

/// Path-loss gains for the three link types, with distances clamped at
/// `geometry.min_link_distance_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    /// `bs_irs[l * num_bs + b]`
    pub bs_irs: Vec<f64>,
    /// `irs_user[(l * num_bs + b) * K + k]`
    pub irs_user: Vec<f64>,
    /// `bs_user[b * K + k]`
    pub bs_user: Vec<f64>,
}

pub fn link_gains(config: &NetworkConfig, topology: &Topology) -> Result<LinkGains> {
    check_topology(config, topology)?;
    let floor = config.geometry.min_link_distance_m;
    let pl = |d: f64, alpha: f64| path_loss_linear(d.max(floor), alpha, config);
    let num_bs = config.num_bs();
    let mut bs_irs = Vec::with_capacity(config.num_irs * num_bs);
    let mut irs_user = Vec::with_capacity(config.num_irs * num_bs * config.users_per_bs);
    for irs in &topology.irs_positions {
        for b in 0..num_bs {
            bs_irs.push(pl(topology.bs_positions[b].distance(irs), config.alpha_bs_irs)?);
            for u in &topology.user_positions[b] {
                irs_user.push(pl(irs.distance(u), config.alpha_irs_user)?);
            }
        }
    }
    let mut bs_user = Vec::with_capacity(num_bs * config.users_per_bs);
    for b in 0..num_bs {
        for u in &topology.user_positions[b] {
            bs_user.push(pl(topology.bs_positions[b].distance(u), config.alpha_bs_user)?);
        }
    }
    Ok(LinkGains {
        bs_irs,
        irs_user,
        bs_user,
    })
}

fn check_topology(config: &NetworkConfig, topology: &Topology) -> Result<()> {
    let ok = topology.bs_positions.len() == config.num_bs()
        && topology.user_positions.len() == config.num_bs()
        && topology.user_positions.iter().all(|u| u.len() == config.users_per_bs)
        && topology.irs_positions.len() == config.num_irs;
    if ok {
        Ok(())
    } else {
        Err(Error::Dimension("topology does not match the configuration".into()))
    }
}

/// Draws one channel realization; each entry is CN(0, path loss of its link).
pub fn generate_channels<R: Rng + ?Sized>(
    config: &NetworkConfig,
    topology: &Topology,
    rng: &mut R,
) -> Result<ChannelSet> {
    config.validate()?;
    let gains = link_gains(config, topology)?;
    let (m, nt) = (config.elements_per_irs, config.tx_antennas);

    let g = gains
        .bs_irs
        .iter()
        .map(|&var| DMatrix::from_fn(m, nt, |_, _| complex_gaussian(rng, var)))
        .collect();
    let h_r = gains
        .irs_user
        .iter()
        .map(|&var| DVector::from_fn(m, |_, _| complex_gaussian(rng, var)))
        .collect();
    let h_d = gains
        .bs_user
        .iter()
        .map(|&var| DVector::from_fn(nt, |_, _| complex_gaussian(rng, var)))
        .collect();

    ChannelSet::from_parts(config.num_irs, config.num_bs(), config.users_per_bs, g, h_r, h_d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use crate::topology::generate_topology;

    fn realize(config: &NetworkConfig, seed: u64) -> (Topology, ChannelSet) {
        let t = generate_topology(config, &mut stream(seed, Stream::Topology)).unwrap();
        let ch = generate_channels(config, &t, &mut stream(seed, Stream::Fading)).unwrap();
        (t, ch)
    }

    #[test]
    fn deterministic_and_dimensioned() {
        let c = NetworkConfig::desk();
        let (_, a) = realize(&c, 3);
        let (_, b) = realize(&c, 3);
        assert_eq!(a, b);
        a.check_matches(&c).unwrap();
        assert_eq!(a.g(3, 3).shape(), (16, 4));
        assert_eq!(a.h_r(0, 2, 1).len(), 16);
        assert_eq!(a.h_d(3, 1).len(), 4);
        let (_, other) = realize(&c, 4);
        assert_ne!(a, other);
    }

    #[test]
    fn from_parts_rejects_bad_shapes() {
        let g = vec![DMatrix::zeros(2, 1)];
        let h_r = vec![DVector::zeros(3)];
        let h_d = vec![DVector::zeros(1)];
        assert!(matches!(
            ChannelSet::from_parts(1, 1, 1, g, h_r, h_d),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn direct_entry_power_matches_path_loss() {
        let c = NetworkConfig::desk();
        let t = generate_topology(&c, &mut stream(5, Stream::Topology)).unwrap();
        let d = t.bs_positions[0].distance(&t.user_positions[0][0]);
        let expected = path_loss_linear(d, 3.5, &c).unwrap();
        let n = 10_000;
        let mean: f64 = (0..n)
            .map(|i| {
                let ch = generate_channels(&c, &t, &mut stream(i, Stream::Fading)).unwrap();
                ch.h_d(0, 0)[0].norm_sqr()
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean - expected).abs() / expected < 0.05, "{mean} vs {expected}");
    }

    #[test]
    fn distinct_links_are_uncorrelated() {
        let mut rng = stream(11, Stream::Fading);
        let n = 10_000;
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let a = complex_gaussian(&mut rng, 1.0);
            let b = complex_gaussian(&mut rng, 1.0);
            acc += a * b.conj();
        }
        // |E[a b*]| ~ 1/sqrt(n) under independence
        assert!((acc / n as f64).norm() < 4.0 / (n as f64).sqrt());
    }
}
