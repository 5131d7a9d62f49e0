//! Acceptance checks for the allocation library and experiment harness.
//!
//! Runs with a custom harness so that every criterion prints exactly one
//! `PASS`/`FAIL` line, whatever the outcome of the others. The process exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use irs_auction_core::auction::{
    run_simultaneous_multiround, run_successive_advance, Allocation, AuctionOptions, ValuationTable,
};
use irs_auction_core::baselines::exhaustive_search;
use irs_auction_core::harness::experiment::{run_experiment, write_rows_csv, ResultRow};
use irs_auction_core::harness::spec::{ExperimentSpec, Method, Preset};
use irs_auction_core::harness::summary::mean_and_stderr;
use irs_auction_core::link::beamforming::design_beamformer_zf;
use irs_auction_core::rng::{stream, trial_seed, Stream};
use irs_auction_core::{
    generate_channels, generate_topology, ChannelSet, LinkEvaluator, LinkOptions, NetworkConfig,
    Scenario, TunableSet,
};

type C64 = Complex64;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn gains_of(rows: &[ResultRow], method: Method, value: f64) -> Vec<&ResultRow> {
    let name = method.as_str();
    let mut out: Vec<&ResultRow> = rows
        .iter()
        .filter(|r| r.method == name && r.sweep_value == value)
        .collect();
    out.sort_by_key(|r| r.trial);
    out
}

fn mean_se(rows: &[&ResultRow]) -> (f64, f64) {
    let xs: Vec<f64> = rows.iter().map(|r| r.total_gain).collect();
    mean_and_stderr(&xs)
}

fn cn<R: Rng>(rng: &mut R, variance: f64) -> C64 {
    // Box-Muller keeps the reference sampler independent of the library's.
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    let r = (-variance * u1.ln()).sqrt();
    let phi = std::f64::consts::TAU * u2;
    C64::new(r * phi.cos(), r * phi.sin())
}

fn random_table<R: Rng>(rng: &mut R) -> ValuationTable {
    let s = rng.random_range(1..=4usize);
    let l = rng.random_range(1..=8usize);
    let coarse = rng.random_bool(0.3);
    let rows = (0..l)
        .map(|_| {
            (0..s)
                .map(|_| {
                    let v: f64 = rng.random_range(-2.0..10.0);
                    if coarse {
                        (v * 2.0).round() / 2.0
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    ValuationTable::new(l, s, rows).expect("valid table")
}

// 1 + 2: desk ordering and exhaustive dominance share one 200-trial run.
fn desk_rows() -> (Vec<ResultRow>, f64) {
    let spec = ExperimentSpec::preset(Preset::Desk);
    let t0 = Instant::now();
    let rows = run_experiment(&spec).expect("desk experiment runs");
    (rows, t0.elapsed().as_secs_f64())
}

fn criterion_desk_ordering(rows: &[ResultRow], secs: f64) -> Verdict {
    let succ = gains_of(rows, Method::Successive, 16.0);
    let simu = gains_of(rows, Method::Simultaneous, 16.0);
    let exh = gains_of(rows, Method::Exhaustive, 16.0);
    let rnd = gains_of(rows, Method::Random, 16.0);
    let (ms, ss) = mean_se(&succ);
    let (mm, sm) = mean_se(&simu);
    let (mr, sr) = mean_se(&rnd);
    let (me, _) = mean_se(&exh);
    let sep_s = ms - mr >= 3.0 * (ss * ss + sr * sr).sqrt();
    let sep_m = mm - mr >= 3.0 * (sm * sm + sr * sr).sqrt();
    let dominated = succ
        .iter()
        .zip(&simu)
        .zip(&exh)
        .all(|((a, b), e)| a.total_gain <= e.total_gain && b.total_gain <= e.total_gain);
    let n = succ.len() == 200 && rnd.len() == 200 && exh.len() == 200;
    Verdict::new(
        n && sep_s && sep_m && dominated && secs < 600.0,
        format!(
            "successive {ms:.4}±{ss:.4}, simultaneous {mm:.4}±{sm:.4}, random {mr:.4}±{sr:.4}, \
             exhaustive {me:.4}; per-trial dominance {dominated}; {secs:.1} s"
        ),
    )
}

fn criterion_upper_bound(rows: &[ResultRow]) -> Verdict {
    let exh = gains_of(rows, Method::Exhaustive, 16.0);
    let mut violations = 0;
    let mut compared = 0;
    for method in [Method::Successive, Method::Simultaneous, Method::Random] {
        for (r, e) in gains_of(rows, method, 16.0).iter().zip(&exh) {
            assert_eq!(r.trial, e.trial);
            compared += 1;
            if r.total_gain > e.total_gain {
                violations += 1;
            }
        }
    }
    Verdict::new(
        violations == 0 && compared == 600,
        format!("{violations} violations in {compared} per-trial comparisons"),
    )
}

fn criterion_feasibility() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfea5);
    let opts = AuctionOptions::default();
    let mut failures = Vec::new();
    for i in 0..10_000 {
        let table = random_table(&mut rng);
        for (name, out) in [
            ("successive", run_successive_advance(&table, &opts)),
            ("simultaneous", run_simultaneous_multiround(&table, &opts)),
        ] {
            let out = out.expect("auction runs");
            let matrix = out.allocation.matrix();
            // One row per IRS, one column per operator.
            let one_winner = matrix.len() == table.num_irs()
                && matrix.iter().all(|row| row.iter().map(|&x| x as usize).sum::<usize>() <= 1);
            let ok = one_winner
                && out.converged()
                && out.rounds() <= out.trace.round_cap
                && out.trace.prices_non_decreasing();
            if !ok {
                failures.push(format!("{name}#{i}"));
            }
        }
    }
    Verdict::new(
        failures.is_empty(),
        format!(
            "20000 auctions on 10000 random tables, {} infeasible/non-converged{}",
            failures.len(),
            failures.first().map(|f| format!(" (first {f})")).unwrap_or_default()
        ),
    )
}

fn criterion_complexity() -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    for (s, l) in [(1usize, 3usize), (2, 4), (3, 3), (2, 6)] {
        for trial in 0..5u64 {
            let config = NetworkConfig {
                num_operators: s,
                num_irs: l,
                elements_per_irs: 8,
                seed: trial_seed(7, trial),
                ..NetworkConfig::desk()
            };
            let scenario = Scenario::generate(&config).expect("scenario");
            let ev = scenario.evaluator(LinkOptions::default()).expect("evaluator");
            let table = ValuationTable::from_evaluator(&ev).expect("valuations");
            let calls_after_table = ev.valuation_calls();
            let opts = AuctionOptions::default();
            let a = run_successive_advance(&table, &opts).expect("auction");
            let b = run_simultaneous_multiround(&table, &opts).expect("auction");
            // Auctions only read the table: the oracle counter must not move.
            let calls_after_auctions = ev.valuation_calls();
            let exh = exhaustive_search(&ev, 100_000).expect("enumeration");
            let want_enum = (s as u128).pow(l as u32);
            checked += 1;
            if calls_after_table != l * s
                || calls_after_auctions != l * s
                || a.trace.oracle_calls != l * s
                || b.trace.oracle_calls != l * s
                || exh.evaluations != want_enum
            {
                bad.push(format!(
                    "S={s} L={l}: oracle {calls_after_table}/{calls_after_auctions}, enum {}",
                    exh.evaluations
                ));
            }
        }
    }
    Verdict::new(
        bad.is_empty(),
        format!("{checked} scenarios; oracle calls = L*S and enumerations = S^L; {bad:?}"),
    )
}

fn scalar_instance(m: usize) -> NetworkConfig {
    NetworkConfig {
        num_operators: 1,
        bs_per_operator: 1,
        users_per_bs: 1,
        num_irs: 1,
        elements_per_irs: m,
        tx_antennas: 1,
        ..NetworkConfig::desk()
    }
}

fn criterion_link_oracles() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0c1e);

    // ZF nulling and power.
    let mut worst_leak: f64 = 0.0;
    let mut worst_power: f64 = 0.0;
    for _ in 0..1000 {
        let k = rng.random_range(1..=4usize);
        let nt = rng.random_range(k..=8usize);
        let power = 10f64.powf(rng.random_range(-3.0..1.0));
        let scale = 10f64.powf(rng.random_range(-6.0..0.0));
        let hs: Vec<DVector<C64>> = (0..k)
            .map(|_| DVector::from_fn(nt, |_, _| cn(&mut rng, scale)))
            .collect();
        let bf = design_beamformer_zf(&hs, power).expect("zf");
        for (j, h) in hs.iter().enumerate() {
            for i in 0..k {
                if i == j {
                    continue;
                }
                let w = bf.column(i);
                let leak = h.dotc(&w).norm() / (h.norm() * w.norm());
                worst_leak = worst_leak.max(leak);
            }
        }
        let p: f64 = bf.w.iter().map(|z| z.norm_sqr()).sum();
        worst_power = worst_power.max((p - power).abs() / power);
    }

    // Exact zero with no tunable IRS, across random deployments.
    let mut nonzero_empty = 0;
    for trial in 0..50u64 {
        let config = NetworkConfig { seed: trial_seed(11, trial), ..NetworkConfig::desk() };
        let scenario = Scenario::generate(&config).expect("scenario");
        for fallback in [true, false] {
            let ev = scenario
                .evaluator(LinkOptions { identity_fallback: fallback, ..LinkOptions::default() })
                .expect("evaluator");
            for s in 0..config.num_operators {
                if ev.sum_rate_gain(s, TunableSet::EMPTY).unwrap() != 0.0 {
                    nonzero_empty += 1;
                }
            }
        }
    }

    // Single-antenna, single-user oracle: co-phasing every path is optimal.
    let mut worst_scalar: f64 = 0.0;
    for i in 0..100 {
        let m = 1 + i % 2;
        let config = scalar_instance(m);
        let p = 10f64.powf(config.tx_power_dbw / 10.0);
        let noise = 10f64.powf(config.noise_power_dbm / 10.0) * 1e-3;
        let g: DMatrix<C64> = DMatrix::from_fn(m, 1, |_, _| cn(&mut rng, 1e-5));
        let hr: DVector<C64> = DVector::from_fn(m, |_, _| cn(&mut rng, 1e-4));
        let hd: DVector<C64> = DVector::from_fn(1, |_, _| cn(&mut rng, 1e-9));
        let aligned: f64 = (0..m).map(|j| hr[j].norm() * g[(j, 0)].norm()).sum::<f64>() + hd[0].norm();
        let unaligned = ((0..m).map(|j| hr[j].conj() * g[(j, 0)]).sum::<C64>() + hd[0].conj()).norm();
        let oracle = (1.0 + p * aligned * aligned / noise).ln() - (1.0 + p * unaligned * unaligned / noise).ln();

        let channels =
            ChannelSet::from_parts(1, 1, 1, vec![g], vec![hr], vec![hd]).expect("channel parts");
        let ev = LinkEvaluator::new(&config, &channels, LinkOptions::default()).expect("evaluator");
        let got = ev.valuation(0, 0).expect("valuation");
        worst_scalar = worst_scalar.max((got - oracle).abs() / oracle.abs().max(1.0));
    }

    Verdict::new(
        worst_leak < 1e-9 && worst_power < 1e-9 && nonzero_empty == 0 && worst_scalar < 1e-10,
        format!(
            "ZF leakage {worst_leak:.1e}, power error {worst_power:.1e} (1000 draws); \
             {nonzero_empty} non-zero empty-set gains; scalar oracle error {worst_scalar:.1e} (100 draws)"
        ),
    )
}

fn criterion_channel_statistics() -> Verdict {
    let config = NetworkConfig { seed: 99, ..NetworkConfig::desk() };
    let topo = generate_topology(&config, &mut stream(99, Stream::Topology)).expect("topology");
    let c0 = 10f64.powf(config.pathloss_ref_db / 10.0);
    let eta = |d: f64, alpha: f64| c0 * (d.max(1.0) / config.pathloss_ref_dist_m).powf(-alpha);
    let user = topo.user_positions[0][0];
    let want = [
        ("BS-IRS", eta(topo.bs_positions[0].distance(&topo.irs_positions[0]), config.alpha_bs_irs)),
        ("IRS-user", eta(topo.irs_positions[0].distance(&user), config.alpha_irs_user)),
        ("BS-user", eta(topo.bs_positions[0].distance(&user), config.alpha_bs_user)),
    ];
    let n = 10_000;
    let mut sums = [0.0f64; 3];
    for i in 0..n {
        let seed = trial_seed(1234, i as u64);
        let ch = generate_channels(&config, &topo, &mut stream(seed, Stream::Fading)).expect("channels");
        sums[0] += ch.g(0, 0)[(3, 1)].norm_sqr();
        sums[1] += ch.h_r(0, 0, 0)[5].norm_sqr();
        sums[2] += ch.h_d(0, 0)[2].norm_sqr();
    }
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (k, (name, eta)) in want.iter().enumerate() {
        let rel = (sums[k] / n as f64 - eta).abs() / eta;
        worst = worst.max(rel);
        parts.push(format!("{name} {:.2}%", rel * 100.0));
    }
    Verdict::new(worst <= 0.05, format!("empirical power vs path loss over {n} draws: {}", parts.join(", ")))
}

fn criterion_monotone_in_m() -> Verdict {
    let mut spec = ExperimentSpec::preset(Preset::Desk);
    spec.sweep.values = vec![8.0, 16.0, 32.0];
    spec.methods = vec![Method::Successive, Method::Simultaneous];
    let rows = run_experiment(&spec).expect("sweep runs");
    let mut ok = true;
    let mut parts = Vec::new();
    for method in [Method::Successive, Method::Simultaneous] {
        let stats: Vec<(f64, f64)> = spec
            .sweep
            .values
            .iter()
            .map(|&m| mean_se(&gains_of(&rows, method, m)))
            .collect();
        for w in stats.windows(2) {
            let (prev, prev_se) = w[0];
            let (next, next_se) = w[1];
            ok &= next >= prev - prev_se.max(next_se);
        }
        parts.push(format!(
            "{}: {}",
            method.as_str(),
            stats.iter().map(|(m, s)| format!("{m:.4}±{s:.4}")).collect::<Vec<_>>().join(" -> ")
        ));
    }
    Verdict::new(ok, format!("M = 8, 16, 32: {}", parts.join("; ")))
}

fn criterion_scale_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5ca1e);
    let opts = AuctionOptions::default();
    let mut changed = 0;
    for _ in 0..1000 {
        let table = random_table(&mut rng);
        let scaled = table.scaled(7.3);
        let same = |a: &Allocation, b: &Allocation| a.owners() == b.owners();
        let a1 = run_successive_advance(&table, &opts).unwrap().allocation;
        let b1 = run_successive_advance(&scaled, &opts).unwrap().allocation;
        let a2 = run_simultaneous_multiround(&table, &opts).unwrap().allocation;
        let b2 = run_simultaneous_multiround(&scaled, &opts).unwrap().allocation;
        changed += usize::from(!same(&a1, &b1)) + usize::from(!same(&a2, &b2));
    }
    Verdict::new(changed == 0, format!("{changed} of 2000 allocations changed under x7.3 scaling"))
}

fn criterion_golden() -> Verdict {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data");
    let spec = ExperimentSpec::load(&data.join("golden_spec.toml"), &[]).expect("pinned spec");
    let rows = run_experiment(&spec).expect("pinned experiment");
    let mut buf = Vec::new();
    write_rows_csv(&rows, &mut buf).expect("csv");
    let fresh = String::from_utf8(buf).expect("utf8");
    let golden = std::fs::read_to_string(data.join("golden.csv")).expect("golden csv");

    // Everything except the wall-clock column must match byte for byte.
    let strip = |line: &str| line.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap_or_default();
    let a: Vec<String> = fresh.lines().map(strip).collect();
    let b: Vec<String> = golden.lines().map(strip).collect();
    let mismatches = a.iter().zip(&b).filter(|(x, y)| x != y).count() + a.len().abs_diff(b.len());
    Verdict::new(
        mismatches == 0,
        format!("{} rows regenerated, {mismatches} differ from the committed CSV", a.len().saturating_sub(1)),
    )
}

fn main() {
    let _ = env_logger::builder().is_test(true).try_init();
    let (desk, secs) = desk_rows();
    let results: Vec<(&str, Verdict)> = vec![
        ("1 desk ordering", criterion_desk_ordering(&desk, secs)),
        ("2 exhaustive upper bound", criterion_upper_bound(&desk)),
        ("3 auction feasibility", criterion_feasibility()),
        ("4 complexity accounting", criterion_complexity()),
        ("5 link-layer oracles", criterion_link_oracles()),
        ("6 channel statistics", criterion_channel_statistics()),
        ("7 monotone in elements", criterion_monotone_in_m()),
        ("8 valuation scale invariance", criterion_scale_invariance()),
        ("9 golden determinism", criterion_golden()),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("acceptance criterion {name}: {tag} — {}", v.detail);
        failed += usize::from(!v.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
