//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Runs without the libtest harness so the
//! lines are always visible.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};

use vfollow::ais::{extract_events, fit_lognormal, tracks_from_points, ExtractOptions};
use vfollow::env::{
    lognormal_mode, lognormal_pdf, reward_comfort, ArParams, ArProcess, EnvConfig, Observation,
    RiverEnv,
};
use vfollow::rl::{
    checkpoint, train, Activation, DdpgAgent, DdpgConfig, Mlp, TrainingReport, Transition,
};
use vfollow::validation::{run_scenario, LeaderSpec, RiverSpec, Scenario, ScenarioKind};
use vfollow::vessel::{self, VesselParams, VesselState};

// Pinned tolerances.
const GRAD_NETS: usize = 20;
const GRAD_REL_TOL: f64 = 1e-5;
const GRAD_STEP: f64 = 1e-6;
// Composed actor-through-critic gradients are often ~1e-8; central
// differences carry ~1e-11 of round-off there, so the relative error is
// taken against at least this scale.
const COMPOSED_GRAD_FLOOR: f64 = 1e-5;
const GRAD_BUDGET: Duration = Duration::from_secs(10);
const AR_STEPS: usize = 100_000;
const AR_CHAINS: usize = 100;
const AR_REL_TOL: f64 = 0.05;
const AR_BUDGET: Duration = Duration::from_secs(5);
const REWARD_GRID_STEP: f64 = 0.01;
const REWARD_AT_EXP_MU: f64 = 1.683e-3;
const REWARD_VALUE_TOL: f64 = 1e-6;
const COMFORT_PAIRS: usize = 1000;
const FIT_DRAWS: usize = 10_000;
const FIT_TOL: f64 = 0.03;
const CORPUS_VESSELS: usize = 10;
const CORPUS_POINTS: usize = 400;
const INTEGRATION_STEPS: usize = 10_000;
const INTEGRATION_REL_TOL: f64 = 1e-12;
const DETERMINISM_EPISODES: usize = 15;
const CHECKPOINT_PROBES: usize = 100;
const TRAIN_EPISODES: usize = 500;
const TRAIN_SEED: u64 = 1;
const EVAL_RUNS: u64 = 20;
const MIN_STEADY_GAP: f64 = 100.0;
const MAX_STEADY_COMFORT_RMS: f64 = 0.05;
const STEADY_PROBE_BAND: f64 = 0.2;
const TOTAL_BUDGET: Duration = Duration::from_secs(15 * 60);

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Outcome {
    let outcome = Outcome { name, pass, detail };
    println!(
        "[{}] {}: {}",
        if outcome.pass { "PASS" } else { "FAIL" },
        outcome.name,
        outcome.detail
    );
    outcome
}

fn rel_err(a: f64, b: f64) -> f64 {
    rel_err_floor(a, b, 1e-8)
}

fn rel_err_floor(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Worst relative error of analytic parameter and input gradients against
/// central differences, for one network with scalar output.
fn network_gradient_error(net: &Mlp, input: &[f64]) -> f64 {
    let cache = net.forward_cached(input).unwrap();
    let (grads, input_grad) = net.backward(&cache, &[1.0]).unwrap();
    let mut worst: f64 = 0.0;
    let mut probe = net.clone();
    for i in 0..net.params().len() {
        let p0 = probe.params()[i];
        probe.params_mut()[i] = p0 + GRAD_STEP;
        let up = probe.forward(input).unwrap()[0];
        probe.params_mut()[i] = p0 - GRAD_STEP;
        let down = probe.forward(input).unwrap()[0];
        probe.params_mut()[i] = p0;
        worst = worst.max(rel_err(grads[i], (up - down) / (2.0 * GRAD_STEP)));
    }
    let mut x = input.to_vec();
    for i in 0..x.len() {
        let x0 = x[i];
        x[i] = x0 + GRAD_STEP;
        let up = net.forward(&x).unwrap()[0];
        x[i] = x0 - GRAD_STEP;
        let down = net.forward(&x).unwrap()[0];
        x[i] = x0;
        worst = worst.max(rel_err(input_grad[i], (up - down) / (2.0 * GRAD_STEP)));
    }
    worst
}

fn random_state(rng: &mut ChaCha8Rng) -> [f64; 7] {
    std::array::from_fn(|_| rng.random_range(-1.0..1.0))
}

/// Actor gradient of `-mean Q(s, mu(s))` through the critic, checked on
/// the whole batch.
fn actor_gradient_error(agent: &DdpgAgent, batch: &[Transition]) -> f64 {
    let (grads, _) = agent.actor_gradient(batch).unwrap();
    let objective = |a: &DdpgAgent| -> f64 {
        -batch
            .iter()
            .map(|t| {
                let y = a.actor.forward(&t.state).unwrap()[0];
                let mut x = t.state.to_vec();
                x.push(0.5 * (y + 1.0));
                a.critic.forward(&x).unwrap()[0]
            })
            .sum::<f64>()
            / batch.len() as f64
    };
    let mut probe = agent.clone();
    let mut worst: f64 = 0.0;
    for i in 0..grads.len() {
        let p0 = probe.actor.params()[i];
        probe.actor.params_mut()[i] = p0 + GRAD_STEP;
        let up = objective(&probe);
        probe.actor.params_mut()[i] = p0 - GRAD_STEP;
        let down = objective(&probe);
        probe.actor.params_mut()[i] = p0;
        worst = worst.max(rel_err_floor(
            grads[i],
            (up - down) / (2.0 * GRAD_STEP),
            COMPOSED_GRAD_FLOOR,
        ));
    }
    worst
}

fn gradient_suite() -> Outcome {
    let start = Instant::now();
    let config = DdpgConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst, mut worst_composed): (f64, f64) = (0.0, 0.0);
    for _ in 0..GRAD_NETS {
        let actor = Mlp::random(&config.actor_dims(), Activation::Tanh, &mut rng);
        let critic = Mlp::random(&config.critic_dims(), Activation::Identity, &mut rng);
        let s = random_state(&mut rng);
        worst = worst.max(network_gradient_error(&actor, &s));
        let mut sa = s.to_vec();
        sa.push(rng.random_range(0.0..1.0));
        worst = worst.max(network_gradient_error(&critic, &sa));

        let agent = DdpgAgent::from_networks(config.clone(), actor, critic, 0);
        let batch: Vec<Transition> = (0..4)
            .map(|_| Transition {
                state: random_state(&mut rng),
                action: 0.5,
                reward: 0.0,
                next_state: random_state(&mut rng),
                done: false,
            })
            .collect();
        worst_composed = worst_composed.max(actor_gradient_error(&agent, &batch));
    }
    let elapsed = start.elapsed();
    check(
        "gradient suite",
        worst < GRAD_REL_TOL && worst_composed < GRAD_REL_TOL && elapsed < GRAD_BUDGET,
        format!(
            "{GRAD_NETS} actors + {GRAD_NETS} critics: max rel err {worst:.2e}; actor through critic: {worst_composed:.2e} (scale floor {COMPOSED_GRAD_FLOOR:e}); tol {GRAD_REL_TOL:e}; {:.2} s (< {} s)",
            elapsed.as_secs_f64(),
            GRAD_BUDGET.as_secs()
        ),
    )
}

fn ar_stationarity() -> Outcome {
    let start = Instant::now();
    let config = EnvConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut worst: f64 = 0.0;
    let mut notes = Vec::new();
    for (name, params) in [
        ("leader", config.leader_speed),
        ("depth", config.depth),
        ("cross_section", config.cross_section),
        ("stream", config.stream),
    ] {
        let (mean, var) = pooled_moments(params, &mut rng);
        let (m0, v0) = (params.stationary_mean(), params.stationary_variance());
        // A zero-mean process is judged against its stationary spread.
        let mean_err = (mean - m0).abs() / m0.abs().max(v0.sqrt());
        let var_err = (var - v0).abs() / v0;
        worst = worst.max(mean_err).max(var_err);
        notes.push(format!(
            "{name} mean {mean:.4} ({m0:.4}) var {var:.4} ({v0:.4})"
        ));
    }
    let elapsed = start.elapsed();
    check(
        "AR(1) stationarity",
        worst < AR_REL_TOL && elapsed < AR_BUDGET,
        format!(
            "{AR_CHAINS} chains x {AR_STEPS} steps each, worst rel dev {worst:.4} (< {AR_REL_TOL}); {}; {:.2} s",
            notes.join("; "),
            elapsed.as_secs_f64()
        ),
    )
}

/// Chain-averaged sample mean and variance; each chain starts with a draw
/// from the stationary law.
fn pooled_moments(params: ArParams, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let (m0, v0) = (params.stationary_mean(), params.stationary_variance());
    let (mut mean_sum, mut var_sum) = (0.0, 0.0);
    for _ in 0..AR_CHAINS {
        let z: f64 = rng.sample(StandardNormal);
        let mut p = ArProcess::new(params, m0 + v0.sqrt() * z);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..AR_STEPS {
            let x = p.step(rng.sample(StandardNormal));
            s += x;
            s2 += x * x;
        }
        let n = AR_STEPS as f64;
        let m = s / n;
        mean_sum += m;
        var_sum += s2 / n - m * m;
    }
    (mean_sum / AR_CHAINS as f64, var_sum / AR_CHAINS as f64)
}

fn reward_shape() -> Outcome {
    let config = EnvConfig::default();
    let (mu, sigma) = (config.mu_t, config.sigma_t);
    let steps = (2000.0 / REWARD_GRID_STEP) as usize;
    let (mut best_t, mut best_f) = (0.0, f64::NEG_INFINITY);
    for i in 1..=steps {
        let t = i as f64 * REWARD_GRID_STEP;
        let f = lognormal_pdf(t, mu, sigma);
        if f > best_f {
            best_t = t;
            best_f = f;
        }
    }
    let mode = (mu - sigma * sigma).exp();
    let argmax_ok = (best_t - mode).abs() <= REWARD_GRID_STEP
        && (lognormal_mode(mu, sigma) - mode).abs() < 1e-12;
    let f_exp_mu = lognormal_pdf(mu.exp(), mu, sigma);
    let value_ok = (f_exp_mu - REWARD_AT_EXP_MU).abs() < REWARD_VALUE_TOL;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p_max = VesselParams::default().max_power;
    let exact = (0..COMFORT_PAIRS)
        .filter(|_| {
            let (now, prev) = (rng.random_range(0.0..p_max), rng.random_range(0.0..p_max));
            let expected = -((now - prev) / p_max).powi(2);
            reward_comfort(now, prev, p_max) == expected
        })
        .count();
    check(
        "reward shape",
        argmax_ok && value_ok && exact == COMFORT_PAIRS,
        format!(
            "grid argmax {best_t:.2} s vs exp(mu - sigma^2) = {mode:.4} s (step {REWARD_GRID_STEP}); f(e^mu) = {f_exp_mu:.6e} vs {REWARD_AT_EXP_MU:e} (tol {REWARD_VALUE_TOL:e}); comfort exact on {exact}/{COMFORT_PAIRS} pairs"
        ),
    )
}

fn lognormal_recovery() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(541);
    let dist = LogNormal::new(5.41, 1.06).unwrap();
    let samples: Vec<f64> = (0..FIT_DRAWS).map(|_| dist.sample(&mut rng)).collect();
    let fit = fit_lognormal(&samples).unwrap();
    let fit_ok = (fit.mu - 5.41).abs() <= FIT_TOL && (fit.sigma - 1.06).abs() <= FIT_TOL;

    let points = common::random_corpus(CORPUS_VESSELS, CORPUS_POINTS, 10);
    let opts = ExtractOptions::default();
    let expected = common::brute_force_events(&points, &opts);
    let got = extract_events(&tracks_from_points(points).unwrap(), &opts);
    let mismatches = common::event_mismatches(&got, &expected);
    check(
        "lognormal recovery",
        fit_ok && mismatches == 0 && !expected.is_empty(),
        format!(
            "fit of {FIT_DRAWS} draws: mu {:.4}, sigma {:.4} (tol {FIT_TOL}); {CORPUS_VESSELS}-vessel corpus: {} events, {} vs brute-force {}, {mismatches} mismatches",
            fit.mu,
            fit.sigma,
            got.len(),
            got.len(),
            expected.len()
        ),
    )
}

fn integration_exactness() -> Outcome {
    // Dyadic inputs: every intermediate value is exact.
    let (v0, a, dt) = (4.0, 0.125, 0.5);
    let mut s = VesselState {
        position: 0.0,
        speed: v0,
        power: 0.0,
    };
    for _ in 0..INTEGRATION_STEPS {
        s = vessel::step(&s, a, dt);
    }
    let t = INTEGRATION_STEPS as f64 * dt;
    let closed = v0 * t + 0.5 * a * t * t;
    let dyadic_exact = s.position == closed && s.speed == v0 + a * t;

    let (v0, a, dt) = (3.7, 0.013, 1.0);
    let mut s = VesselState {
        position: 0.0,
        speed: v0,
        power: 0.0,
    };
    let mut worst: f64 = 0.0;
    for n in 1..=INTEGRATION_STEPS {
        s = vessel::step(&s, a, dt);
        let t = n as f64 * dt;
        worst = worst.max(rel_err(s.position, v0 * t + 0.5 * a * t * t));
    }
    check(
        "integration exactness",
        dyadic_exact && worst < INTEGRATION_REL_TOL,
        format!(
            "{INTEGRATION_STEPS} steps: dyadic case bit-exact = {dyadic_exact}; general case max rel err {worst:.2e} (< {INTEGRATION_REL_TOL:e})"
        ),
    )
}

fn short_training_csv(seed: u64) -> Vec<u8> {
    let mut env = RiverEnv::new(EnvConfig::default(), VesselParams::default());
    let mut agent = DdpgAgent::new(DdpgConfig::default(), seed);
    let report = train(&mut agent, &mut env, DETERMINISM_EPISODES, seed, |_, _| {
        Ok(())
    })
    .unwrap();
    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    buf
}

fn determinism(agent: &DdpgAgent) -> Outcome {
    let a = short_training_csv(42);
    let b = short_training_csv(42);
    let csv_identical = a == b;

    let mut buf = Vec::new();
    checkpoint::save(agent, &mut buf).unwrap();
    let loaded = checkpoint::load(&buf[..], agent.config.clone(), 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    let identical = (0..CHECKPOINT_PROBES)
        .filter(|_| {
            let obs = Observation::from_array(random_state(&mut rng));
            agent.policy(&obs).to_bits() == loaded.policy(&obs).to_bits()
        })
        .count();
    check(
        "determinism",
        csv_identical && identical == CHECKPOINT_PROBES,
        format!(
            "two {DETERMINISM_EPISODES}-episode runs, seed 42: metrics CSV byte-identical = {csv_identical} ({} bytes); checkpoint round trip bit-exact on {identical}/{CHECKPOINT_PROBES} observations",
            a.len()
        ),
    )
}

fn training_efficacy(report: &TrainingReport, agent: &DdpgAgent, train_time: Duration) -> Outcome {
    let n = report.episodes.len();
    let first = report.mean_reward(0..50);
    let last = report.mean_reward(n - 50..n);
    let config = EnvConfig::default();
    let params = VesselParams::default();
    let (mut collisions, mut min_gap, mut worst_rms) = (0, f64::INFINITY, 0.0f64);
    for seed in 0..EVAL_RUNS {
        let scenario = Scenario::sinusoidal(&config, seed);
        let m = run_scenario(agent, &scenario, &config, &params)
            .unwrap()
            .metrics;
        collisions += m.collision as usize;
        min_gap = min_gap.min(m.min_gap_steady);
        worst_rms = worst_rms.max(m.comfort_rms_steady);
    }
    check(
        "training efficacy",
        last > first && collisions == 0 && min_gap > MIN_STEADY_GAP && worst_rms < MAX_STEADY_COMFORT_RMS,
        format!(
            "{n} episodes in {:.0} s; (a) mean reward last 50 {last:.4} vs first 50 {first:.4}; (b) {collisions} collisions in {EVAL_RUNS} sinusoidal runs; (c) min steady gap {min_gap:.1} m (> {MIN_STEADY_GAP}); (d) max steady RMS dP/Pmax {worst_rms:.4} (< {MAX_STEADY_COMFORT_RMS})",
            train_time.as_secs_f64()
        ),
    )
}

fn string_stability(agent: &DdpgAgent) -> Outcome {
    let config = EnvConfig::default();
    let params = VesselParams::default();
    let result = run_scenario(agent, &Scenario::platoon(5, TRAIN_SEED), &config, &params).unwrap();
    let m = result.metrics;
    let ratio = m.string_stability_ratio.unwrap_or(f64::NAN);
    check(
        "string stability",
        ratio < 1.0 && !m.collision,
        format!(
            "5 followers on the jump schedule: ratio {ratio:.4} (< 1), collision {}, min gap {:.1} m",
            m.collision, m.min_gap
        ),
    )
}

/// Leader at constant speed, follower at the reward mode with matched speed:
/// the gap must stay within the band around its initial value.
fn steady_state_probe(agent: &DdpgAgent) -> Outcome {
    let config = EnvConfig::default();
    let params = VesselParams::default();
    let v = 4.0;
    let initial_gap = lognormal_mode(config.mu_t, config.sigma_t) * v;
    let scenario = Scenario {
        name: "steady".into(),
        kind: ScenarioKind::Sinusoidal,
        duration: 500,
        followers: 1,
        leader: LeaderSpec::SpeedFunction {
            base_rel_speed: v,
            swing: 0.0,
            start: 0.0,
            period: 1.0,
        },
        river: RiverSpec::Constant {
            depth_below_keel: config.depth.stationary_mean(),
            cross_section: config.cross_section.stationary_mean(),
            stream_speed: 0.0,
        },
        initial_gap,
        start_position: 0.0,
        follower_speed: None,
        cold_start: false,
        transient: 0,
        seed: 0,
    };
    let result = run_scenario(agent, &scenario, &config, &params).unwrap();
    let gaps = result.traces[1].iter().map(|r| r.gap);
    let (lo, hi) = gaps.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
        (lo.min(g), hi.max(g))
    });
    let band = STEADY_PROBE_BAND * initial_gap;
    check(
        "steady-state probe",
        lo >= initial_gap - band && hi <= initial_gap + band,
        format!("initial gap {initial_gap:.1} m, range [{lo:.1}, {hi:.1}] m over 500 steps (band +/-{:.0}%)", STEADY_PROBE_BAND * 100.0),
    )
}

fn main() {
    let start = Instant::now();
    let mut outcomes = vec![
        gradient_suite(),
        ar_stationarity(),
        reward_shape(),
        lognormal_recovery(),
        integration_exactness(),
    ];

    let train_start = Instant::now();
    let mut env = RiverEnv::new(EnvConfig::default(), VesselParams::default());
    let mut agent = DdpgAgent::new(DdpgConfig::default(), TRAIN_SEED);
    let report = train(&mut agent, &mut env, TRAIN_EPISODES, TRAIN_SEED, |_, _| {
        Ok(())
    })
    .unwrap();
    let train_time = train_start.elapsed();

    outcomes.push(determinism(&agent));
    outcomes.push(training_efficacy(&report, &agent, train_time));
    outcomes.push(string_stability(&agent));
    outcomes.push(steady_state_probe(&agent));

    let elapsed = start.elapsed();
    outcomes.push(check(
        "runtime",
        elapsed < TOTAL_BUDGET,
        format!(
            "suite finished in {:.0} s (< {} s)",
            elapsed.as_secs_f64(),
            TOTAL_BUDGET.as_secs()
        ),
    ));
    let failed: Vec<&str> = outcomes
        .iter()
        .filter(|o| !o.pass)
        .map(|o| o.name)
        .collect();
    println!(
        "acceptance: {}/{} passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
