//! End-to-end acceptance suite. Each test covers one gate criterion at its
//! stated tolerance and runtime budget, and prints one pass line (visible
//! with `cargo test --test acceptance -- --nocapture`).

mod common;

use std::time::Instant;

use common::{camera_photo, natural_image, random_image};
use lhe_core::dof::{self, BoundsField};
use lhe_core::harness::{self, SimilarityAxis, SweepMethod};
use lhe_core::mse;
use lhe_core::opt::{self, InitStrategy, OptimizerConfig, StepPolicy};
use lhe_core::pgm;
use lhe_core::ssim::{self, SsimConfig, SsimKernel};
use lhe_core::stark::{self, StarkConfig};
use lhe_core::{GrayImage, WindowSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(criterion: &str, started: Instant, budget_secs: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        elapsed < budget_secs,
        "{criterion}: took {elapsed:.2}s, budget {budget_secs}s"
    );
    println!("{criterion}: PASS ({elapsed:.2}s)");
}

#[test]
fn criterion_1_worked_rank_and_dof_examples() {
    let started = Instant::now();
    let win = WindowSpec::new(1).unwrap();

    let n1 = GrayImage::new(3, 3, 256, vec![10, 12, 25, 25, 36, 47, 47, 65, 77]).unwrap();
    let r = dof::rank_range(&n1, win, 1, 1).unwrap();
    assert_eq!((r.min_rank(), r.max_rank()), (5, 5));

    let n2 = GrayImage::new(3, 3, 256, vec![10, 12, 25, 25, 25, 47, 56, 65, 25]).unwrap();
    let r = dof::rank_range(&n2, win, 1, 1).unwrap();
    assert_eq!((r.min_rank(), r.max_rank()), (3, 6));

    let constant = GrayImage::constant(3, 3, 256, 99).unwrap();
    let r = dof::rank_range(&constant, win, 1, 1).unwrap();
    assert_eq!((r.min_rank(), r.max_rank()), (1, 9));

    let b = dof::dof_bounds(&constant, win);
    assert_eq!((b.lower_at(1, 1), b.upper_at(1, 1)), (0, 255));

    let b = dof::dof_bounds(&n2, win);
    assert_eq!((b.lower_at(1, 1), b.upper_at(1, 1)), (56, 170));

    let b = dof::dof_bounds(&n1, win);
    assert_eq!((b.lower_at(1, 1), b.upper_at(1, 1)), (113, 142));

    report("criterion 1 (rank ranges and DoF of the worked windows)", started, 1.0);
}

#[test]
fn criterion_2_mse_optimality_oracle() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let win = WindowSpec::new(1).unwrap();

    for trial in 0..50 {
        let img = GrayImage::from_fn(4, 4, 8, |_, _| rng.gen_range(0..8) as u16).unwrap();
        let bounds = dof::dof_bounds(&img, win);
        let best = mse::min_mse_solution(&img, &bounds);
        let worst = mse::max_mse_solution(&img, &bounds);

        // Independent exhaustive search per pixel (MSE separates); max ties
        // resolved toward the larger level, the documented rule.
        for (i, &v) in img.pixels().iter().enumerate() {
            let (lo, hi) = (bounds.lower()[i], bounds.upper()[i]);
            let err = |y: u16| {
                let d = i64::from(y) - i64::from(v);
                d * d
            };
            let arg_min = (lo..=hi).min_by_key(|&y| (err(y), y)).unwrap();
            let arg_max = (lo..=hi).max_by_key(|&y| (err(y), y)).unwrap();
            assert_eq!(best.pixels()[i], arg_min, "trial {trial} pixel {i}");
            assert_eq!(worst.pixels()[i], arg_max, "trial {trial} pixel {i}");
        }

        let lo_err = mse::mse(&img, &best).unwrap();
        let hi_err = mse::mse(&img, &worst).unwrap();
        for _ in 0..20 {
            let pixels = (0..16)
                .map(|i| rng.gen_range(bounds.lower()[i]..=bounds.upper()[i]))
                .collect();
            let solution = GrayImage::new(4, 4, 8, pixels).unwrap();
            let e = mse::mse(&img, &solution).unwrap();
            assert!(lo_err <= e && e <= hi_err, "trial {trial}");
        }
    }

    report("criterion 2 (exhaustive MSE optimality, 50 images x 20 solutions)", started, 5.0);
}

/// Independent SSIM: explicit 2-D kernel, double loop per window.
fn naive_ssim_map(x: &GrayImage, y: &GrayImage, cfg: &SsimConfig) -> Vec<f64> {
    let grid: Vec<Vec<f64>> = match cfg.kernel {
        SsimKernel::Box { w } => {
            let side = 2 * w + 1;
            vec![vec![1.0 / (side * side) as f64; side]; side]
        }
        SsimKernel::Gaussian => {
            let sigma = 1.5_f64;
            let mut grid = vec![vec![0.0; 11]; 11];
            let mut total = 0.0;
            for (mi, i) in (-5i32..=5).enumerate() {
                for (nj, j) in (-5i32..=5).enumerate() {
                    let v = (-f64::from(i * i + j * j) / (2.0 * sigma * sigma)).exp();
                    grid[mi][nj] = v;
                    total += v;
                }
            }
            for row in &mut grid {
                for v in row.iter_mut() {
                    *v /= total;
                }
            }
            grid
        }
    };
    let k = grid.len();
    let mut out = Vec::new();
    for m in 0..=(x.height() - k) {
        for n in 0..=(x.width() - k) {
            let (mut mux, mut muy, mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for i in 0..k {
                for j in 0..k {
                    let kv = grid[i][j];
                    let xv = f64::from(x.get(m + i, n + j));
                    let yv = f64::from(y.get(m + i, n + j));
                    mux += kv * xv;
                    muy += kv * yv;
                    xx += kv * xv * xv;
                    yy += kv * yv * yv;
                    xy += kv * xv * yv;
                }
            }
            let (sx2, sy2, sxy) = (xx - mux * mux, yy - muy * muy, xy - mux * muy);
            out.push(
                ((2.0 * mux * muy + cfg.c1) * (2.0 * sxy + cfg.c2))
                    / ((mux * mux + muy * muy + cfg.c1) * (sx2 + sy2 + cfg.c2)),
            );
        }
    }
    out
}

#[test]
fn criterion_3_ssim_oracles() {
    let started = Instant::now();

    // Map equivalence on 20 random pairs, both kernels.
    for seed in 0..20 {
        let x = random_image(16, 16, 256, 3000 + seed);
        let y = random_image(16, 16, 256, 4000 + seed);
        for cfg in [SsimConfig::box_kernel(2, 256), SsimConfig::gaussian(256)] {
            let fast = ssim::ssim_map(&x, &y, &cfg).unwrap();
            let slow = naive_ssim_map(&x, &y, &cfg);
            assert_eq!(fast.values().len(), slow.len());
            for (a, b) in fast.values().iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "seed {seed}: {a} vs {b}");
            }
        }
    }

    // Gradient against central finite differences, h = 1e-3, both kernels.
    // The index is O(1) in f64, so the difference quotient resolves about
    // 1e-13; the relative-error denominator is floored where both sides sit
    // below that noise blown up by the tolerance.
    for seed in 0..10 {
        let x = random_image(12, 12, 256, 5000 + seed);
        let y = random_image(12, 12, 256, 6000 + seed);
        let xr = x.to_real();
        for cfg in [SsimConfig::box_kernel(2, 256), SsimConfig::gaussian(256)] {
            let analytic = ssim::ssim_gradient(&x, &y, &cfg).unwrap();
            let mut yr = y.to_real();
            let h = 1e-3;
            for i in 0..yr.values().len() {
                let orig = yr.values()[i];
                yr.values_mut()[i] = orig + h;
                let up = ssim::ssim_real(&xr, &yr, &cfg).unwrap();
                yr.values_mut()[i] = orig - h;
                let down = ssim::ssim_real(&xr, &yr, &cfg).unwrap();
                yr.values_mut()[i] = orig;
                let fd = (up - down) / (2.0 * h);
                let a = analytic.values()[i];
                let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1e-7);
                assert!(rel < 1e-5, "seed {seed} pixel {i}: rel {rel}");
            }
        }
    }

    report("criterion 3 (SSIM map and gradient oracles, both kernels)", started, 30.0);
}

#[test]
fn criterion_4_optimizer_contract_at_128() {
    let started = Instant::now();
    let img = camera_photo();
    let win = WindowSpec::new(2).unwrap();
    let bounds = dof::dof_bounds(&img, win);
    let scfg = SsimConfig::box_kernel(2, 256);
    let engine = lhe_core::SsimEngine::new(&img, &scfg).unwrap();

    let init_mid = opt::init_solution(InitStrategy::Midpoint, &img, &bounds);
    let init_mse = opt::init_solution(InitStrategy::MinMse, &img, &bounds);
    let s_mid = engine.ssim_of(&init_mid).unwrap();
    let s_mse = engine.ssim_of(&init_mse).unwrap();
    let s_lhe = engine.ssim_of(&dof::basic_lhe(&img, win)).unwrap();

    let mut finals = Vec::new();
    for init in [InitStrategy::Midpoint, InitStrategy::MinMse] {
        let ocfg = OptimizerConfig {
            init,
            step: StepPolicy::ScalarSearch,
            max_iters: 100,
            ..OptimizerConfig::default()
        };
        let (out, trace) = opt::maximize_ssim(&img, &bounds, &ocfg, &scfg).unwrap();
        assert!(bounds.contains(&out), "feasible output");
        for pair in trace.records.windows(2) {
            assert!(pair[1].ssim >= pair[0].ssim, "non-decreasing trace");
        }
        let final_ssim = trace.final_ssim();
        assert!(final_ssim >= s_mid, "final {final_ssim} vs midpoint init {s_mid}");
        assert!(final_ssim >= s_mse, "final {final_ssim} vs min-MSE init {s_mse}");
        assert!(final_ssim >= s_lhe, "final {final_ssim} vs raw LHE {s_lhe}");
        finals.push(final_ssim);
    }
    assert!(
        (finals[0] - finals[1]).abs() < 0.01,
        "initializations disagree: {} vs {}",
        finals[0],
        finals[1]
    );

    report("criterion 4 (optimizer contract on 128x128, 5x5 window)", started, 60.0);
}

#[test]
fn criterion_5_stark_reductions_at_128() {
    let started = Instant::now();
    let img = camera_photo();
    let win = WindowSpec::new(2).unwrap();

    let identity = stark::stark_baseline(&img, &StarkConfig::new(1.0, win).unwrap());
    for (a, b) in identity.pixels().iter().zip(img.pixels()) {
        assert!(
            (i32::from(*a) - i32::from(*b)).abs() <= 1,
            "alpha=1 strays from the input"
        );
    }

    let lhe_like = stark::stark_baseline(&img, &StarkConfig::new(0.0, win).unwrap());
    let lhe = dof::basic_lhe(&img, win);
    for (a, b) in lhe_like.pixels().iter().zip(lhe.pixels()) {
        assert!(
            (i32::from(*a) - i32::from(*b)).abs() <= 1,
            "alpha=0 strays from basic LHE"
        );
    }

    report("criterion 5 (SPL reductions at alpha 0 and 1, 128x128)", started, 10.0);
}

#[test]
fn criterion_6_trade_off_sweep_reproduction() {
    let started = Instant::now();
    let img = camera_photo();
    let alphas: Vec<f64> = (0..=10).map(|i| f64::from(i) / 10.0).collect();
    let ocfg = OptimizerConfig {
        init: InitStrategy::MinMse,
        step: StepPolicy::ScalarSearch,
        ..OptimizerConfig::default()
    };

    // Every violated clause is collected so a failure names all offenders.
    let mut violations: Vec<String> = Vec::new();
    let mut mean_gaps = Vec::new();
    for w in [2usize, 8] {
        let win = WindowSpec::new(w).unwrap();
        let scfg = SsimConfig::box_kernel(w, 256);
        let records = harness::sweep(&img, &alphas, win, &ocfg, &scfg).unwrap();
        assert_eq!(records.len(), 3 * alphas.len());

        let mut gap_sum = 0.0;
        for &alpha in &alphas {
            let find = |method: SweepMethod| {
                records
                    .iter()
                    .find(|r| r.method == method && r.alpha == alpha)
                    .unwrap()
            };
            let base = find(SweepMethod::Stark);
            let mse_opt = find(SweepMethod::StarkMseOpt);
            let ssim_opt = find(SweepMethod::StarkSsimOpt);

            if mse_opt.psnr_db < base.psnr_db {
                violations.push(format!(
                    "w {w} alpha {alpha}: PSNR {} < baseline {}",
                    mse_opt.psnr_db, base.psnr_db
                ));
            }
            if ssim_opt.ssim < base.ssim {
                violations.push(format!(
                    "w {w} alpha {alpha}: SSIM {} < baseline {}",
                    ssim_opt.ssim, base.ssim
                ));
            }
            for row in [mse_opt, ssim_opt] {
                let deviation = (row.local_energy - base.local_energy).abs();
                if deviation > 0.05 * base.local_energy {
                    violations.push(format!(
                        "w {w} alpha {alpha} {}: local energy {:.0} deviates {:.1}% from baseline {:.0} (tolerance 5%)",
                        row.method.name(),
                        row.local_energy,
                        100.0 * deviation / base.local_energy,
                        base.local_energy
                    ));
                }
            }
            gap_sum += ssim_opt.ssim - base.ssim;
        }
        mean_gaps.push(gap_sum / alphas.len() as f64);
    }
    if mean_gaps[1] >= mean_gaps[0] {
        violations.push(format!(
            "17x17 window did not shrink the mean SSIM gap: {} vs {}",
            mean_gaps[1], mean_gaps[0]
        ));
    }
    assert!(
        violations.is_empty(),
        "{} clause(s) violated:\n  {}",
        violations.len(),
        violations.join("\n  ")
    );

    report("criterion 6 (trade-off dominance and window-size effect)", started, 600.0);
}

#[test]
fn criterion_7_solution_space_size() {
    let started = Instant::now();

    let constant = GrayImage::constant(3, 3, 256, 42).unwrap();
    let bounds = dof::dof_bounds(&constant, WindowSpec::new(1).unwrap());
    assert_eq!(dof::solution_space_log2(&bounds), 72.0);

    let fixed = BoundsField::new(4, 2, 256, vec![9; 8], vec![9; 8]).unwrap();
    assert_eq!(dof::solution_space_log2(&fixed), 0.0);

    report("criterion 7 (solution-space size in log2)", started, 1.0);
}

#[test]
fn criterion_8_deterministic_outputs() {
    let started = Instant::now();
    let img = natural_image(96, 96, 11);
    let win = WindowSpec::new(2).unwrap();
    let alphas = [0.0, 0.5, 1.0];
    let ocfg = OptimizerConfig::default();
    let scfg = SsimConfig::box_kernel(2, 256);

    // No internal threading exists, so thread counts cannot influence the
    // result; two independent end-to-end runs must agree byte for byte.
    let run = || {
        let lhe = dof::basic_lhe(&img, win);
        let raster = pgm::encode_pgm(&lhe);
        let (enhanced, _) = opt::maximize_ssim(&img, &dof::dof_bounds(&img, win), &ocfg, &scfg)
            .unwrap();
        let enhanced_raster = pgm::encode_pgm(&enhanced);
        let records = harness::sweep(&img, &alphas, win, &ocfg, &scfg).unwrap();
        let csv = harness::csv_string(&records);
        let svg = harness::svg_string(&records, SimilarityAxis::Psnr).unwrap();
        (raster, enhanced_raster, csv, svg)
    };
    let first = run();
    let second = run();
    assert_eq!(first.0, second.0, "LHE raster");
    assert_eq!(first.1, second.1, "optimized raster");
    assert_eq!(first.2, second.2, "CSV");
    assert_eq!(first.3, second.3, "SVG");

    report("criterion 8 (byte-identical reruns)", started, 600.0);
}
