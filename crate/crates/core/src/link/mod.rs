//! Physical-layer model: combined channels, SINR, rate gains and valuations.
//!
//! Operators occupy disjoint bands, so operator `s` only sees its own BSs and
//! users. An IRS it holds reflects with the phases `s` designed; every other IRS
//! reflects `s`'s signals with the identity. The gain of a tunable set is
//! measured against the scenario where no IRS is tunable, each scenario with
//! beamformers designed for its own combined channels.

pub mod beamforming;
pub mod phases;

use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelSet;
use crate::config::NetworkConfig;
use crate::error::{Error, Result};

pub use beamforming::{design_beamformer_zf, Beamformer};
pub use phases::{align_to_direct, anchor_user, design_phases_local, PhaseShiftVector};

/// Set of IRS indices held by one operator, as a bit mask.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TunableSet(pub u64);

impl TunableSet {
    pub const EMPTY: TunableSet = TunableSet(0);

    pub fn single(irs: usize) -> Self {
        TunableSet(1 << irs)
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        TunableSet(indices.into_iter().fold(0, |m, l| m | (1 << l)))
    }

    /// Every IRS index below `num_irs`.
    pub fn all(num_irs: usize) -> Self {
        if num_irs >= 64 {
            TunableSet(u64::MAX)
        } else {
            TunableSet((1u64 << num_irs) - 1)
        }
    }

    pub fn contains(&self, irs: usize) -> bool {
        self.0 >> irs & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..64).filter(move |&l| self.contains(l))
    }

    /// Every subset, the empty set included, in ascending mask order.
    pub fn subsets(&self) -> impl Iterator<Item = TunableSet> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(TunableSet(cur))
        })
    }
}

/// `h` such that the user receives `h^H w`: the conjugate of
/// `sum_{l in I} h_r^H Theta_l G + sum_{l not in I} h_r^H G + h_d^H`.
///
/// `phases[l]` is used for tunable IRSs; the rest reflect with the identity.
pub fn combined_channel(
    channels: &ChannelSet,
    phases: &[PhaseShiftVector],
    tunable: TunableSet,
    bs: usize,
    user: usize,
) -> Result<DVector<Complex64>> {
    if phases.len() != channels.num_irs() {
        return Err(Error::Dimension(format!(
            "expected {} phase vectors, got {}",
            channels.num_irs(),
            phases.len()
        )));
    }
    if bs >= channels.num_bs() || user >= channels.users_per_bs() {
        return Err(Error::Dimension(format!("(bs, user) = ({bs}, {user}) out of range")));
    }
    if let Some(l) = tunable.indices().find(|&l| l >= channels.num_irs()) {
        return Err(Error::Dimension(format!("tunable IRS {l} out of range")));
    }
    if let Some(p) = phases.iter().find(|p| p.len() != channels.elements()) {
        return Err(Error::Dimension(format!(
            "phase vector has {} elements, IRSs have {}",
            p.len(),
            channels.elements()
        )));
    }
    let identity = PhaseShiftVector::identity(channels.elements());
    let effective: Vec<&DVector<Complex64>> = (0..channels.num_irs())
        .map(|l| {
            if tunable.contains(l) {
                phases[l].theta()
            } else {
                identity.theta()
            }
        })
        .collect();
    Ok(combine(channels, &effective, bs, user))
}

/// `effective[l]` is the reflection vector actually applied by IRS `l`.
fn combine(
    channels: &ChannelSet,
    effective: &[&DVector<Complex64>],
    bs: usize,
    user: usize,
) -> DVector<Complex64> {
    // Row form r = h^H, accumulated as r^T = sum_l G_l^T (conj(h_r) .* theta) + conj(h_d).
    let mut row = channels.h_d(bs, user).map(|z| z.conj());
    for (l, theta) in effective.iter().enumerate() {
        let coeff = channels
            .h_r(l, bs, user)
            .zip_map(theta, |h, t| h.conj() * t);
        row += channels.g(l, bs).transpose() * coeff;
    }
    row.map(|z| z.conj())
}

/// `|h^H w_k|^2 / (sum_{j != k} |h^H w_j|^2 + noise)`.
pub fn sinr_of(h: &DVector<Complex64>, beamformer: &Beamformer, user: usize, noise_w: f64) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (j, w) in beamformer.w.column_iter().enumerate() {
        let p = h.dotc(&w).norm_sqr();
        if j == user {
            signal = p;
        } else {
            interference += p;
        }
    }
    signal / (interference + noise_w)
}

/// SINR of `user` served by `bs` under `tunable`, given the BS's precoder.
pub fn sinr(
    channels: &ChannelSet,
    phases: &[PhaseShiftVector],
    tunable: TunableSet,
    beamformer: &Beamformer,
    bs: usize,
    user: usize,
    noise_w: f64,
) -> Result<f64> {
    if beamformer.w.ncols() != channels.users_per_bs()
        || beamformer.w.nrows() != channels.tx_antennas()
    {
        return Err(Error::Dimension("beamformer shape does not match the channels".into()));
    }
    let h = combined_channel(channels, phases, tunable, bs, user)?;
    Ok(sinr_of(&h, beamformer, user, noise_w))
}

/// Per-user link quality of one operator in one scenario. Rates are in nats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatePoint {
    /// Ordered by (BS of the operator, user).
    pub sinr: Vec<f64>,
    pub rate: Vec<f64>,
    pub sum_rate: f64,
    /// Any of the operator's precoders needed the regularized fallback.
    pub regularized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhaseDesign {
    /// Coherent alignment on the anchor user.
    #[default]
    Aligned,
    /// Tunable IRSs keep the identity reflection.
    Identity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkOptions {
    pub phase_design: PhaseDesign,
    /// The local design may leave any held IRS at the identity reflection, and
    /// keeps whichever subset of designed IRSs scores best. With this off, every
    /// held IRS uses its designed phases and gains may be negative.
    pub identity_fallback: bool,
}

impl Default for LinkOptions {
    fn default() -> Self {
        Self {
            phase_design: PhaseDesign::Aligned,
            identity_fallback: true,
        }
    }
}

/// Evaluates rate gains on one channel realization.
///
/// Designed phases for every (operator, IRS) pair and the no-IRS baseline rates
/// are computed once at construction. The evaluator is `Sync`; valuations of
/// distinct pairs may be computed from several threads.
#[derive(Debug)]
pub struct LinkEvaluator<'a> {
    config: &'a NetworkConfig,
    channels: &'a ChannelSet,
    options: LinkOptions,
    noise_w: f64,
    power_w: f64,
    /// `designed[s * L + l]`
    designed: Vec<PhaseShiftVector>,
    identity: PhaseShiftVector,
    baseline: Vec<RatePoint>,
    valuation_calls: AtomicUsize,
    scenario_evaluations: AtomicUsize,
}

impl<'a> LinkEvaluator<'a> {
    pub fn new(config: &'a NetworkConfig, channels: &'a ChannelSet, options: LinkOptions) -> Result<Self> {
        config.validate()?;
        channels.check_matches(config)?;
        let (s_count, l_count, m) = (config.num_operators, config.num_irs, config.elements_per_irs);
        let mut designed = Vec::with_capacity(s_count * l_count);
        for s in 0..s_count {
            for l in 0..l_count {
                designed.push(match options.phase_design {
                    PhaseDesign::Aligned => design_phases_local(channels, config, s, l),
                    PhaseDesign::Identity => PhaseShiftVector::tunable_identity(m),
                });
            }
        }
        let mut ev = Self {
            config,
            channels,
            options,
            noise_w: config.noise_power_w(),
            power_w: config.tx_power_w(),
            designed,
            identity: PhaseShiftVector::identity(m),
            baseline: Vec::new(),
            valuation_calls: AtomicUsize::new(0),
            scenario_evaluations: AtomicUsize::new(0),
        };
        ev.baseline = (0..s_count)
            .map(|s| ev.operator_rates(s, TunableSet::EMPTY))
            .collect::<Result<_>>()?;
        ev.scenario_evaluations.store(0, Ordering::Relaxed);
        Ok(ev)
    }

    pub fn config(&self) -> &NetworkConfig {
        self.config
    }

    pub fn channels(&self) -> &ChannelSet {
        self.channels
    }

    pub fn options(&self) -> LinkOptions {
        self.options
    }

    /// Phases operator `s` applies to IRS `l` when holding it.
    pub fn designed_phases(&self, operator: usize, irs: usize) -> &PhaseShiftVector {
        &self.designed[operator * self.config.num_irs + irs]
    }

    /// Reflection vectors operator `s` experiences under `tunable`.
    pub fn phases_for(&self, operator: usize, tunable: TunableSet) -> Vec<PhaseShiftVector> {
        (0..self.config.num_irs)
            .map(|l| {
                if tunable.contains(l) {
                    self.designed_phases(operator, l).clone()
                } else {
                    self.identity.clone()
                }
            })
            .collect()
    }

    fn check_operator(&self, operator: usize, tunable: TunableSet) -> Result<()> {
        if operator >= self.config.num_operators {
            return Err(Error::Dimension(format!("operator {operator} out of range")));
        }
        if (tunable.0 & !TunableSet::all(self.config.num_irs).0) != 0 {
            return Err(Error::Dimension(format!("tunable set {:#b} out of range", tunable.0)));
        }
        Ok(())
    }

    /// Combined channels, ZF precoders and SINRs for all of `operator`'s users
    /// when it tunes exactly the IRSs in `tunable` with its designed phases.
    pub fn operator_rates(&self, operator: usize, tunable: TunableSet) -> Result<RatePoint> {
        self.check_operator(operator, tunable)?;
        self.scenario_evaluations.fetch_add(1, Ordering::Relaxed);
        let effective: Vec<&DVector<Complex64>> = (0..self.config.num_irs)
            .map(|l| {
                if tunable.contains(l) {
                    self.designed_phases(operator, l).theta()
                } else {
                    self.identity.theta()
                }
            })
            .collect();
        let k_count = self.config.users_per_bs;
        let mut point = RatePoint {
            sinr: Vec::with_capacity(self.config.bs_per_operator * k_count),
            rate: Vec::with_capacity(self.config.bs_per_operator * k_count),
            sum_rate: 0.0,
            regularized: false,
        };
        for n in 0..self.config.bs_per_operator {
            let bs = self.config.bs_index(operator, n);
            let hs: Vec<_> = (0..k_count)
                .map(|k| combine(self.channels, &effective, bs, k))
                .collect();
            let bf = design_beamformer_zf(&hs, self.power_w)?;
            point.regularized |= bf.regularized;
            for (k, h) in hs.iter().enumerate() {
                let g = sinr_of(h, &bf, k, self.noise_w);
                let r = g.ln_1p();
                point.sinr.push(g);
                point.rate.push(r);
                point.sum_rate += r;
            }
        }
        Ok(point)
    }

    /// Rate gain of tuning every IRS in `tunable` with its designed phases,
    /// with no identity fallback.
    pub fn designed_gain(&self, operator: usize, tunable: TunableSet) -> Result<f64> {
        let point = self.operator_rates(operator, tunable)?;
        let base = &self.baseline[operator];
        Ok(point
            .rate
            .iter()
            .zip(&base.rate)
            .map(|(with, without)| with - without)
            .sum())
    }

    /// Sum-rate gain of `operator` holding `tunable`, in nats.
    ///
    /// With `identity_fallback` this is the best designed gain over all subsets
    /// of `tunable`, costing `2^|tunable|` scenario evaluations.
    pub fn sum_rate_gain(&self, operator: usize, tunable: TunableSet) -> Result<f64> {
        self.check_operator(operator, tunable)?;
        if tunable.is_empty() {
            return Ok(0.0);
        }
        if !self.options.identity_fallback {
            return self.designed_gain(operator, tunable);
        }
        let mut best = 0.0f64;
        for subset in tunable.subsets() {
            if subset.is_empty() {
                continue;
            }
            best = best.max(self.designed_gain(operator, subset)?);
        }
        Ok(best)
    }

    /// Sum-rate gain of each operator's tunable set, for every subset mask of
    /// all `L` IRSs: `table[mask]`. Equal, entry by entry, to
    /// [`sum_rate_gain`](Self::sum_rate_gain).
    pub fn gain_table(&self, operator: usize) -> Result<Vec<f64>> {
        let l = self.config.num_irs;
        let size = 1usize << l;
        let mut table = Vec::with_capacity(size);
        table.push(0.0);
        for mask in 1..size {
            table.push(self.designed_gain(operator, TunableSet(mask as u64))?);
        }
        if self.options.identity_fallback {
            table[0] = table[0].max(0.0);
            // subset maximum, one IRS dimension at a time
            for bit in 0..l {
                for mask in 0..size {
                    if mask >> bit & 1 == 1 {
                        let without = table[mask ^ (1 << bit)];
                        if without > table[mask] {
                            table[mask] = without;
                        }
                    }
                }
            }
        }
        Ok(table)
    }

    /// Value of IRS `irs` to `operator`: its gain when it is the only tunable IRS.
    pub fn valuation(&self, operator: usize, irs: usize) -> Result<f64> {
        if irs >= self.config.num_irs {
            return Err(Error::Dimension(format!("IRS {irs} out of range")));
        }
        self.valuation_calls.fetch_add(1, Ordering::Relaxed);
        self.sum_rate_gain(operator, TunableSet::single(irs))
    }

    pub fn valuation_calls(&self) -> usize {
        self.valuation_calls.load(Ordering::Relaxed)
    }

    /// Number of single-scenario rate computations since construction.
    pub fn scenario_evaluations(&self) -> usize {
        self.scenario_evaluations.load(Ordering::Relaxed)
    }

    /// Per-operator gains for the given tunable sets (one per operator).
    pub fn operator_gains(&self, sets: &[TunableSet]) -> Result<Vec<f64>> {
        if sets.len() != self.config.num_operators {
            return Err(Error::Dimension(format!(
                "expected {} tunable sets, got {}",
                self.config.num_operators,
                sets.len()
            )));
        }
        let mut seen = 0u64;
        for set in sets {
            if seen & set.0 != 0 {
                return Err(Error::Dimension("tunable sets of operators overlap".into()));
            }
            seen |= set.0;
        }
        sets.iter()
            .enumerate()
            .map(|(s, &set)| self.sum_rate_gain(s, set))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::generate_channels;
    use crate::rng::{stream, Stream};
    use crate::topology::generate_topology;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn realize(config: &NetworkConfig, seed: u64) -> ChannelSet {
        let t = generate_topology(config, &mut stream(seed, Stream::Topology)).unwrap();
        generate_channels(config, &t, &mut stream(seed, Stream::Fading)).unwrap()
    }

    #[test]
    fn subsets_enumerate_all() {
        let s = TunableSet::from_indices([0, 2, 5]);
        let subs: Vec<u64> = s.subsets().map(|t| t.0).collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|&m| m & !s.0 == 0));
        assert_eq!(TunableSet::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn empty_set_matches_identity_everywhere() {
        let cfg = NetworkConfig::desk();
        let ch = realize(&cfg, 1);
        let ev = LinkEvaluator::new(&cfg, &ch, LinkOptions::default()).unwrap();
        let designed = ev.phases_for(0, TunableSet::all(4));
        let identity = vec![PhaseShiftVector::identity(16); 4];
        let none = combined_channel(&ch, &designed, TunableSet::EMPTY, 0, 1).unwrap();
        let all_identity = combined_channel(&ch, &identity, TunableSet::all(4), 0, 1).unwrap();
        assert_eq!(none, all_identity);
    }

    #[test]
    fn scalar_combined_channel_by_hand() {
        let (hr, g, hd) = (c(0.3, -1.1), c(2.0, 0.5), c(-0.4, 0.9));
        let phi = 0.7;
        let ch = ChannelSet::from_parts(
            1,
            1,
            1,
            vec![DMatrix::from_element(1, 1, g)],
            vec![DVector::from_element(1, hr)],
            vec![DVector::from_element(1, hd)],
        )
        .unwrap();
        let phases = vec![PhaseShiftVector::from_angles(&[phi])];
        let h = combined_channel(&ch, &phases, TunableSet::single(0), 0, 0).unwrap();
        // h^H = conj(hr) e^{j phi} g + conj(hd)
        let row = hr.conj() * Complex64::from_polar(1.0, phi) * g + hd.conj();
        assert!((h[0].conj() - row).norm() < 1e-15);
    }

    #[test]
    fn combined_channel_checks_dimensions() {
        let cfg = NetworkConfig::desk();
        let ch = realize(&cfg, 2);
        let short = vec![PhaseShiftVector::identity(16); 3];
        assert!(combined_channel(&ch, &short, TunableSet::EMPTY, 0, 0).is_err());
        let wrong_m = vec![PhaseShiftVector::identity(8); 4];
        assert!(combined_channel(&ch, &wrong_m, TunableSet::EMPTY, 0, 0).is_err());
        let ok = vec![PhaseShiftVector::identity(16); 4];
        assert!(combined_channel(&ch, &ok, TunableSet::EMPTY, 9, 0).is_err());
    }

    #[test]
    fn single_user_sinr_has_no_interference() {
        let ch = ChannelSet::from_parts(
            1,
            1,
            1,
            vec![DMatrix::from_element(1, 1, c(0.0, 0.0))],
            vec![DVector::from_element(1, c(0.0, 0.0))],
            vec![DVector::from_element(1, c(1.0, 0.0))],
        )
        .unwrap();
        let phases = vec![PhaseShiftVector::identity(1)];
        let p = 0.25;
        let bf = design_beamformer_zf(&[DVector::from_element(1, c(1.0, 0.0))], p).unwrap();
        let noise = 1e-3;
        let g = sinr(&ch, &phases, TunableSet::EMPTY, &bf, 0, 0, noise).unwrap();
        assert!((g - p / noise).abs() < 1e-12 * (p / noise));
    }

    #[test]
    fn zf_keeps_interference_negligible() {
        let cfg = NetworkConfig::desk();
        let ch = realize(&cfg, 6);
        let ev = LinkEvaluator::new(&cfg, &ch, LinkOptions::default()).unwrap();
        let phases = ev.phases_for(1, TunableSet::from_indices([1, 3]));
        let bs = cfg.bs_index(1, 0);
        let hs: Vec<_> = (0..2)
            .map(|k| combined_channel(&ch, &phases, TunableSet::from_indices([1, 3]), bs, k).unwrap())
            .collect();
        let bf = design_beamformer_zf(&hs, cfg.tx_power_w()).unwrap();
        for k in 0..2 {
            let signal = hs[k].dotc(&bf.column(k)).norm_sqr();
            let leak = hs[k].dotc(&bf.column(1 - k)).norm_sqr();
            assert!(leak < 1e-9 * signal);
        }
    }

    #[test]
    fn empty_and_identity_give_exactly_zero() {
        let cfg = NetworkConfig::desk();
        let ch = realize(&cfg, 8);
        let ev = LinkEvaluator::new(&cfg, &ch, LinkOptions::default()).unwrap();
        assert_eq!(ev.sum_rate_gain(0, TunableSet::EMPTY).unwrap(), 0.0);
        assert_eq!(ev.designed_gain(1, TunableSet::EMPTY).unwrap(), 0.0);
        let forced = LinkEvaluator::new(
            &cfg,
            &ch,
            LinkOptions {
                phase_design: PhaseDesign::Identity,
                identity_fallback: false,
            },
        )
        .unwrap();
        for mask in 0..16 {
            assert_eq!(forced.sum_rate_gain(0, TunableSet(mask)).unwrap(), 0.0);
            assert_eq!(forced.sum_rate_gain(1, TunableSet(mask)).unwrap(), 0.0);
        }
    }

    #[test]
    fn valuation_is_single_irs_gain_and_pure() {
        let cfg = NetworkConfig::desk();
        let ch = realize(&cfg, 10);
        let ev = LinkEvaluator::new(&cfg, &ch, LinkOptions::default()).unwrap();
        for s in 0..2 {
            for l in 0..4 {
                let v = ev.valuation(s, l).unwrap();
                assert_eq!(v, ev.valuation(s, l).unwrap());
                assert_eq!(v, ev.sum_rate_gain(s, TunableSet::single(l)).unwrap());
            }
        }
        assert_eq!(ev.valuation_calls(), 16);
    }

    #[test]
    fn zero_reflection_path_has_zero_value() {
        let mut cfg = NetworkConfig::desk();
        cfg.num_operators = 1;
        cfg.num_irs = 1;
        let ch = realize(&cfg, 12);
        let zero_hr = (0..cfg.num_bs() * cfg.users_per_bs)
            .map(|_| DVector::zeros(cfg.elements_per_irs))
            .collect();
        let g = (0..cfg.num_bs()).map(|b| ch.g(0, b).clone()).collect();
        let hd = (0..cfg.num_bs())
            .flat_map(|b| (0..cfg.users_per_bs).map(move |k| (b, k)))
            .map(|(b, k)| ch.h_d(b, k).clone())
            .collect();
        let ch = ChannelSet::from_parts(1, cfg.num_bs(), cfg.users_per_bs, g, zero_hr, hd).unwrap();
        for fallback in [true, false] {
            let opts = LinkOptions {
                identity_fallback: fallback,
                ..Default::default()
            };
            let ev = LinkEvaluator::new(&cfg, &ch, opts).unwrap();
            assert_eq!(ev.valuation(0, 0).unwrap(), 0.0);
        }
    }

    #[test]
    fn gain_table_agrees_with_direct_evaluation() {
        let cfg = NetworkConfig::desk();
        let ch = realize(&cfg, 14);
        for fallback in [true, false] {
            let opts = LinkOptions {
                identity_fallback: fallback,
                ..Default::default()
            };
            let ev = LinkEvaluator::new(&cfg, &ch, opts).unwrap();
            for s in 0..2 {
                let table = ev.gain_table(s).unwrap();
                for (mask, &v) in table.iter().enumerate() {
                    assert_eq!(v, ev.sum_rate_gain(s, TunableSet(mask as u64)).unwrap());
                }
            }
        }
    }

    #[test]
    fn fallback_gain_is_monotone_and_non_negative() {
        let cfg = NetworkConfig::desk();
        for seed in 0..10 {
            let ch = realize(&cfg, seed);
            let ev = LinkEvaluator::new(&cfg, &ch, LinkOptions::default()).unwrap();
            let table = ev.gain_table(0).unwrap();
            for mask in 0..16usize {
                assert!(table[mask] >= 0.0);
                for bit in 0..4 {
                    assert!(table[mask | 1 << bit] >= table[mask]);
                }
            }
        }
    }

    #[test]
    fn operator_gains_rejects_overlap() {
        let cfg = NetworkConfig::desk();
        let ch = realize(&cfg, 3);
        let ev = LinkEvaluator::new(&cfg, &ch, LinkOptions::default()).unwrap();
        assert!(ev
            .operator_gains(&[TunableSet::single(1), TunableSet::from_indices([1, 2])])
            .is_err());
        assert!(ev.operator_gains(&[TunableSet::single(1)]).is_err());
    }
}
