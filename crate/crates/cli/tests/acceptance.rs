//! Acceptance suite (plain binary, no libtest harness). Prints one PASS/FAIL
//! line per criterion and exits non-zero if any criterion fails or overruns
//! its time budget.
//!
//! Run with `cargo test -p cscr-sense-cli --test acceptance`.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use cscr_sense::combiner::{self, CombinerParams};
use cscr_sense::config::Config;
use cscr_sense::cscr::{self, CscrStream, Numerator};
use cscr_sense::gass::{self, GaParams, GassGenome};
use cscr_sense::grid::SubcarrierGrid;
use cscr_sense::mobius::{self, MobiusParams, NoiseRegime};
use cscr_sense::rate::{self, RateParams};
use cscr_sense::sim::{self, CfoModel, ChannelScenario, ImpairmentConfig, ImpulseModel};
use cscr_sense::{dsp, eval, ssnr};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn config_file(name: &str) -> Config {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
    Config::from_toml(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn worked_pair_amplitudes() -> Outcome {
    let grid = SubcarrierGrid::ht_ltf();
    let amp = |m2: usize| {
        mobius::dynamic_amplitude_low_noise(1.0, 0.1, 1.0, 0.1, 4.0, grid.wavelength(0), grid.wavelength(m2))
            .map_err(|e| e.to_string())
    };
    // One-based pairs (1, 2) and (1, 114).
    let near = amp(1)?;
    let far = amp(113)?;
    let rel = |got: f64, want: f64| (got - want).abs() / want;
    check(
        rel(near, 0.00265) < 0.02 && rel(far, 0.2017) < 0.02 && far / near >= 70.0,
        format!("near {near:.5}, far {far:.4}, ratio {:.1}", far / near),
    )
}

fn acf_peak_arithmetic() -> Outcome {
    let x: Vec<f64> = (0..1000)
        .map(|k| {
            let d = (k % 210) as f64 - 105.0;
            (-d * d / 50.0).exp()
        })
        .collect();
    let e = rate::estimate_rate(&x, 50.0, &RateParams::default()).map_err(|e| e.to_string())?;
    let f = e.f_bpm.unwrap_or(f64::NAN);
    check(
        (e.peak_index_1, e.peak_index_2) == (1, Some(211)) && (f - 14.29).abs() <= 0.01,
        format!("peaks ({}, {:?}), {f:.4} bpm", e.peak_index_1, e.peak_index_2),
    )
}

fn short_scenario() -> ChannelScenario {
    ChannelScenario { sample_rate_hz: 50.0, duration_s: 10.0, ..Default::default() }
}

fn phase_offsets_cancel() -> Outcome {
    let grid = SubcarrierGrid::combined();
    let clean = sim::generate_ideal_csi(&short_scenario(), &grid).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cfg = ImpairmentConfig {
            sfo_slope: rng.random_range(-0.05..0.05),
            cfo: CfoModel::RandomWalk { step_std: rng.random_range(0.01..0.5), bound: PI },
            seed,
            ..Default::default()
        };
        let dirty = sim::apply_impairments(&clean, &cfg).map_err(|e| e.to_string())?;
        let m1 = rng.random_range(0..grid.len());
        let m2 = (m1 + rng.random_range(1..grid.len())) % grid.len();
        let a = cscr::cscr(&clean, m1, m2).map_err(|e| e.to_string())?;
        let b = cscr::cscr(&dirty, m1, m2).map_err(|e| e.to_string())?;
        let diff: Vec<f64> =
            dsp::unwrap(&b.phase()).iter().zip(dsp::unwrap(&a.phase())).map(|(x, y)| x - y).collect();
        worst = worst.max(dsp::variance(&diff).sqrt());
    }
    check(worst < 1e-9, format!("worst std {worst:.2e} rad over 100 seeds"))
}

fn amplitude_impulses_cancel() -> Outcome {
    let grid = SubcarrierGrid::combined();
    let clean = sim::generate_ideal_csi(&short_scenario(), &grid).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let cfg = ImpairmentConfig {
            impulse: ImpulseModel { rate_hz: rng.random_range(0.1..3.0), level_sigma: 0.5, correlation: 1.0 },
            seed,
            ..Default::default()
        };
        let dirty = sim::apply_impairments(&clean, &cfg).map_err(|e| e.to_string())?;
        let m1 = rng.random_range(0..grid.len());
        let m2 = (m1 + rng.random_range(1..grid.len())) % grid.len();
        let a = cscr::cscr(&clean, m1, m2).map_err(|e| e.to_string())?.amplitude();
        let b = cscr::cscr(&dirty, m1, m2).map_err(|e| e.to_string())?.amplitude();
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((y / x - 1.0).abs());
        }
    }
    check(worst <= 1e-12, format!("worst |ratio - 1| {worst:.2e} over 100 seeds"))
}

fn mobius_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let c = |rng: &mut ChaCha8Rng| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let mut worst: f64 = 0.0;
    let mut draws = 0;
    while draws < 10_000 {
        let params = MobiusParams { a: c(&mut rng), b: c(&mut rng), c: c(&mut rng), d: c(&mut rng) };
        let z = vec![Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))];
        // Keep clear of the pole and of near-degenerate maps.
        let denom = params.c * z[0] + params.d;
        if denom.norm() < 1e-3 || params.c.norm() < 1e-3 || params.d.norm() < 1e-3 {
            continue;
        }
        draws += 1;
        let dec = mobius::mobius_decompose(params, &z, NoiseRegime::LowNoise).map_err(|e| e.to_string())?;
        let direct = params.evaluate(z[0]);
        let rebuilt = dec.reconstruct()[0];
        worst = worst.max((rebuilt - direct).norm() / direct.norm());
    }
    check(worst < 1e-12, format!("worst relative error {worst:.2e} over 10^4 draws"))
}

fn blind_spot_sweep() -> Outcome {
    let r = eval::blind_spot_sweep(&config_file("blindspot.toml")).map_err(|e| e.to_string())?;
    let failed = |f: fn(&eval::PositionResult) -> bool| -> Vec<usize> {
        r.positions.iter().filter(|p| !f(p)).map(|p| p.index).collect()
    };
    let amp_fail = failed(|p| p.amplitude);
    let phase_fail = failed(|p| p.phase);
    let disjoint = amp_fail.iter().all(|i| !phase_fail.contains(i));
    check(
        r.positions.len() == 32
            && r.detectability_full == 100.0
            && r.detectability_amplitude < 100.0
            && !phase_fail.is_empty()
            && disjoint,
        format!(
            "full {}%, amplitude {}% (fails {amp_fail:?}), phase {}% (fails {phase_fail:?})",
            r.detectability_full, r.detectability_amplitude, r.detectability_phase
        ),
    )
}

fn gass_guarantees() -> Outcome {
    let cfg = config_file("impaired.toml");
    let grid = cfg.grid.build();
    let mut ok = true;
    let mut detail = Vec::new();
    for seed in 0..3u64 {
        let scenario = ChannelScenario { duration_s: 10.0, ..cfg.scenario.clone() };
        let trace = sim::simulate(&scenario, &grid, &ImpairmentConfig { seed, ..cfg.impairments.clone() })
            .map_err(|e| e.to_string())?;
        let window = cscr::average_phase_blocks(&trace, 12).map_err(|e| e.to_string())?;
        let window = sim::CsiTrace { sample_rate_hz: 10.0, ..window };
        let sol = gass::optimize(&window, &GaParams { seed, ..cfg.pipeline.gass.clone() }, &[])
            .map_err(|e| e.to_string())?;
        let monotone = sol.history.windows(2).all(|p| p[1] >= p[0]);
        let beats_seed = sol.fitness.value >= sol.best_seed_fitness;
        ok &= monotone && beats_seed;
        detail.push(format!("{:.2}>={:.2}", sol.fitness.value, sol.best_seed_fitness));
    }

    // Two-subcarrier grid: the only feasible shapes are m1 -> m2 and m2 -> m1.
    let toy = SubcarrierGrid::toy(2).map_err(|e| e.to_string())?;
    let scenario = ChannelScenario { sample_rate_hz: 10.0, duration_s: 20.0, ..Default::default() };
    let w = sim::simulate(&scenario, &toy, &ImpairmentConfig { gaussian_noise_std: 0.01, seed: 6, ..Default::default() })
        .map_err(|e| e.to_string())?;
    let exhaustive = [(0, 1), (1, 0)]
        .iter()
        .map(|&(m1, md)| gass::fitness(&GassGenome::single_pair(m1, md, 1), &w).map(|f| f.value))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?
        .into_iter()
        .fold(0.0, f64::max);
    let params = GaParams { numerators: 1, population: 8, generations: 10, ..Default::default() };
    let sol = gass::optimize(&w, &params, &[]).map_err(|e| e.to_string())?;
    let toy_ok = (sol.fitness.value - exhaustive).abs() <= 1e-9 * exhaustive;
    detail.push(format!("toy {:.4} vs exhaustive {exhaustive:.4}", sol.fitness.value));
    check(ok && toy_ok, detail.join(", "))
}

fn combination_gain() -> Outcome {
    let fs = 10.0;
    let clean: Vec<Complex64> = (0..300)
        .map(|k| Complex64::from_polar(0.2, 0.8 * (2.0 * PI * 0.25 * k as f64 / fs).sin()) + 1.0)
        .collect();
    let noise = Normal::new(0.0, 0.08).unwrap();
    let mut gains = Vec::new();
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + seed);
        let streams: Vec<CscrStream> = (0..10)
            .map(|i| {
                let rot = Complex64::from_polar(0.5 + 0.1 * i as f64, rng.random_range(0.0..2.0 * PI));
                let values = clean
                    .iter()
                    .map(|v| (v + Complex64::new(noise.sample(&mut rng), noise.sample(&mut rng))) * rot)
                    .collect();
                CscrStream { numerator: Numerator::Single(0), denominator: i + 1, values, sample_rate_hz: fs, interpolated: 0 }
            })
            .collect();
        let singles: Vec<f64> = streams
            .iter()
            .map(|s| ssnr::ssnr_complex(&s.values, fs).map(|e| e.db()))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let (c, _) = combiner::combine(&streams, &CombinerParams::default()).map_err(|e| e.to_string())?;
        let combined = ssnr::ssnr_complex(&c.combined, fs).map_err(|e| e.to_string())?.db();
        gains.push(combined - dsp::median(&singles));
    }
    let mean = dsp::mean(&gains);
    check(mean >= 6.0, format!("mean gain {mean:.2} dB over 20 seeds"))
}

fn end_to_end() -> Outcome {
    let clean_cfg = Config::default();
    let (out, tally) = eval::evaluate_run(&clean_cfg.scenario, &clean_cfg.impairments, &clean_cfg, false)
        .map_err(|e| e.to_string())?;
    let worst = out
        .estimates
        .iter()
        .map(|e| e.error_bpm().unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let clean_ok = tally.windows >= 45 && worst <= 0.5;

    let cfg = config_file("impaired.toml");
    let (_, t) = eval::evaluate_run(&cfg.scenario, &cfg.impairments, &cfg, false).map_err(|e| e.to_string())?;
    let rate = 100.0 * t.full as f64 / t.windows.max(1) as f64;
    check(
        clean_ok && t.windows >= 50 && rate >= 90.0,
        format!(
            "noise-free {} windows, worst error {worst:.3} bpm; impaired {}/{} windows detected ({rate:.1}%)",
            tally.windows, t.full, t.windows
        ),
    )
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg_path = dir.path().join("small.toml");
    std::fs::write(
        &cfg_path,
        "[scenario]\nduration_s = 20.0\nsample_rate_hz = 50.0\n\n\
         [impairments]\ngaussian_noise_std = 0.02\nsfo_slope = 0.01\ncfo = { kind = \"random_walk\", step_std = 0.05, bound = 3.0 }\n\n\
         [pipeline]\nstride_frames = 3\n\n[pipeline.gass]\npopulation = 24\ngenerations = 15\n\n\
         [sweep]\npositions = 2\nduration_s = 12.0\nnoise_levels = [0.0, 0.05]\nseeds = 2\n",
    )
    .map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_cscr-sense");
    let cfg = cfg_path.to_str().unwrap();
    let trace = dir.path().join("sim0/trace.csv");
    let trace = trace.to_str().unwrap();
    let commands: Vec<(&str, Vec<&str>)> = vec![
        ("simulate", vec![]),
        ("run", vec![]),
        ("run", vec!["--input", trace, "--waveforms"]),
        ("sweep-blindspot", vec![]),
        ("sweep-snr", vec![]),
        ("gass-audit", vec![]),
    ];
    let mut compared = 0;
    for (i, (sub, extra)) in commands.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(if i == 0 { format!("sim{rep}") } else { format!("c{i}_{rep}") });
            let status = Command::new(bin)
                .arg(sub)
                .args(["--config", cfg, "--seed", "42", "--out", out.to_str().unwrap()])
                .args(extra)
                .output()
                .map_err(|e| e.to_string())?;
            if !status.status.success() {
                return Err(format!("{sub} exited with {}", status.status));
            }
            let mut files: Vec<_> = std::fs::read_dir(&out)
                .map_err(|e| e.to_string())?
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            let contents: Vec<(String, Vec<u8>)> = files
                .iter()
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
                .collect();
            outputs.push((contents, status.stdout));
        }
        if outputs[0] != outputs[1] {
            return Err(format!("{sub} {extra:?} differs between runs"));
        }
        compared += outputs[0].0.len();
    }
    Ok(format!("{} invocations, {compared} output files identical", commands.len()))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("worked pair dynamic amplitudes", Duration::from_secs(1), worked_pair_amplitudes),
        ("ACF peak index arithmetic", Duration::from_secs(1), acf_peak_arithmetic),
        ("ratio phase offsets cancel", Duration::from_secs(10), phase_offsets_cancel),
        ("ratio amplitude impulses cancel", Duration::from_secs(10), amplitude_impulses_cancel),
        ("fractional-linear decomposition identity", Duration::from_secs(5), mobius_identity),
        ("blind-spot sweep complementarity", Duration::from_secs(300), blind_spot_sweep),
        ("GASS guarantees", Duration::from_secs(120), gass_guarantees),
        ("combination gain", Duration::from_secs(60), combination_gain),
        ("end-to-end accuracy", Duration::from_secs(300), end_to_end),
        ("CLI determinism", Duration::from_secs(120), cli_determinism),
    ];
    let total = criteria.len();
    let mut failures = Vec::new();
    for (i, (name, budget, run)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(d) if elapsed <= budget => (true, d),
            Ok(d) => (false, format!("{d}; over budget {budget:?}")),
            Err(d) => (false, d),
        };
        println!(
            "criterion {:>2} {}: {name} [{:.2}s] {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
        if !pass {
            failures.push(i + 1);
        }
    }
    if failures.is_empty() {
        println!("acceptance: all {total} criteria passed");
    } else {
        println!("acceptance: failed criteria {failures:?}");
        std::process::exit(1);
    }
}
