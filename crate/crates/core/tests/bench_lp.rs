// Diagnostics: pivot counts and per-round timing at 5-5-10.
use bqpmc::instance::Instance;
use bqpmc::rng::SplitMix64;
use bqpmc::separators;
use bqpmc::simplex;

#[test]
fn bench_rounds() {
    let inst = Instance::complete(&[5; 5], 10);
    let mut rng = SplitMix64::new(1);
    let obj: Vec<f64> = (0..inst.n_vars()).map(|_| rng.uniform(-10.0, 10.0)).collect();
    let mut lp = simplex::mccormick_relaxation(&inst, &obj);
    let mut seen = std::collections::HashSet::new();
    for round in 0..12 {
        let t = std::time::Instant::now();
        let sol = simplex::solve(&lp).unwrap();
        let t_lp = t.elapsed().as_secs_f64();
        assert_eq!(sol.status, simplex::LpStatus::Optimal);
        let point = simplex::solution_point(&inst, &sol);
        let t = std::time::Instant::now();
        let batch = separators::separate_cycle_copy(&inst, &point, true, true, 1e-6).unwrap();
        let t_sep = t.elapsed().as_secs_f64();
        let mut added = 0;
        for cut in batch.cuts {
            if seen.insert(cut.canonical_key(&inst)) {
                lp.add_constraint(&inst, &cut);
                added += 1;
            }
        }
        eprintln!(
            "round {}: lp value {:.4} pivots {} rows {} lp_time {:.2}s sep_time {:.3}s max_viol {:.6} added {}",
            round, sol.value, sol.iterations, lp.rows.len(), t_lp, t_sep,
            separators::separate_cycle_copy(&inst, &point, true, true, 1e-6).unwrap().max_violation(),
            added
        );
        if added == 0 {
            break;
        }
    }
}

#[test]
fn bench_base_lp() {
    let inst = Instance::complete(&[5; 5], 10);
    let mut rng = SplitMix64::new(1);
    let obj: Vec<f64> = (0..inst.n_vars()).map(|_| rng.uniform(-10.0, 10.0)).collect();
    let lp = simplex::mccormick_relaxation(&inst, &obj);
    let t = std::time::Instant::now();
    let sol = simplex::solve(&lp).unwrap();
    eprintln!(
        "base: status {:?} value {:.4} pivots {} in {:.2}s",
        sol.status, sol.value, sol.iterations, t.elapsed().as_secs_f64()
    );
}

#[test]
fn bench_5_5_20_one_seed() {
    let inst = Instance::complete(&[5; 5], 20);
    let mut rng = SplitMix64::new(1);
    let obj: Vec<f64> = (0..inst.n_vars()).map(|_| rng.uniform(-10.0, 10.0)).collect();
    let t = std::time::Instant::now();
    let report = separators::cutting_loop(
        &inst,
        &obj,
        &[separators::CutClass::Cc],
        &separators::LoopConfig::default(),
    )
    .unwrap();
    eprintln!(
        "5-5-20 cc: gap {:.4}% rounds {} cuts {} in {:.1}s",
        report.gap_percent,
        report.rounds.len(),
        report.cuts.len(),
        t.elapsed().as_secs_f64()
    );
}

#[test]
fn bench_5_5_20_rounds() {
    let inst = Instance::complete(&[5; 5], 20);
    let mut rng = SplitMix64::new(1);
    let obj: Vec<f64> = (0..inst.n_vars()).map(|_| rng.uniform(-10.0, 10.0)).collect();
    let lp = simplex::mccormick_relaxation(&inst, &obj);
    let opts = simplex::SolveOptions::default();
    let t0 = std::time::Instant::now();
    let (mut inc, status) = simplex::IncrementalLp::new(&lp, &opts).unwrap().unwrap();
    eprintln!(
        "base solve: {:?} {} pivots {:.1}s",
        status,
        inc.iterations(),
        t0.elapsed().as_secs_f64()
    );
    let mut seen = std::collections::HashSet::new();
    for round in 0..12 {
        let point = bqpmc::instance::Point { values: inc.point() };
        let t = std::time::Instant::now();
        let batch = separators::separate_cycle_copy(&inst, &point, true, true, 1e-6).unwrap();
        let t_sep = t.elapsed().as_secs_f64();
        let mut rows = Vec::new();
        for cut in batch.cuts {
            if seen.insert(cut.canonical_key(&inst)) {
                let norm = cut.normalized_le(&inst);
                let terms: Vec<(usize, f64)> = norm
                    .terms
                    .iter()
                    .map(|&(v, c)| (inst.var_index(v), c))
                    .collect();
                rows.push((terms, norm.rhs));
            }
        }
        if rows.is_empty() {
            eprintln!("round {}: done, value {:.4}", round, inc.value());
            break;
        }
        let before = inc.iterations();
        let t = std::time::Instant::now();
        let outcome = inc.add_cuts_and_reoptimize(&rows, &opts);
        let t_reopt = t.elapsed().as_secs_f64();
        eprintln!(
            "round {}: added {} sep {:.2}s reopt {:.1}s pivots {} outcome {}",
            round,
            rows.len(),
            t_sep,
            t_reopt,
            inc.iterations() - before,
            match outcome {
                simplex::IncrementalOutcome::Optimal => "optimal",
                simplex::IncrementalOutcome::Stalled => "STALLED",
                _ => "other",
            }
        );
    }
}

#[test]
fn diag_lp_gaps() {
    let inst = Instance::complete(&[5; 5], 10);
    let mut over_ip = 0.0;
    let mut over_lp = 0.0;
    for seed in 1..11u64 {
        let mut rng = SplitMix64::new(seed);
        let obj: Vec<f64> = (0..inst.n_vars()).map(|_| rng.uniform(-10.0, 10.0)).collect();
        let lp = simplex::mccormick_relaxation(&inst, &obj);
        let sol = simplex::solve(&lp).unwrap();
        assert_eq!(sol.status, simplex::LpStatus::Optimal, "seed {}", seed);
        let (ip, _) = bqpmc::oracle::integer_optimum(&inst, &obj);
        let g_ip = 100.0 * (sol.value - ip) / ip.abs();
        let g_lp = 100.0 * (sol.value - ip) / sol.value.abs();
        eprintln!(
            "seed {}: lp {:.4} ip {:.4} gap/ip {:.2}% gap/lp {:.2}%",
            seed, sol.value, ip, g_ip, g_lp
        );
        over_ip += g_ip;
        over_lp += g_lp;
    }
    eprintln!("avg gap/ip {:.2}% avg gap/lp {:.2}%", over_ip / 10.0, over_lp / 10.0);
}

#[test]
fn diag_rlt_c_gaps() {
    let inst = Instance::complete(&[5; 5], 10);
    let mut sums = [[0.0f64; 2]; 2]; // [rlt, c][/ip, /lp]
    for seed in 1..11u64 {
        let mut rng = SplitMix64::new(seed);
        let obj: Vec<f64> = (0..inst.n_vars()).map(|_| rng.uniform(-10.0, 10.0)).collect();
        for (k, classes) in [
            vec![separators::CutClass::Rlt],
            vec![separators::CutClass::C],
        ]
        .iter()
        .enumerate()
        {
            let report = separators::cutting_loop(
                &inst,
                &obj,
                classes,
                &separators::LoopConfig::default(),
            )
            .unwrap();
            sums[k][0] += 100.0 * (report.lp_value - report.ip_value) / report.ip_value.abs();
            sums[k][1] += 100.0 * (report.lp_value - report.ip_value) / report.lp_value.abs();
        }
    }
    eprintln!(
        "RLT: /ip {:.2}% /lp {:.2}%   (reference 8.02)",
        sums[0][0] / 10.0,
        sums[0][1] / 10.0
    );
    eprintln!(
        "C:   /ip {:.2}% /lp {:.2}%   (reference 3.63)",
        sums[1][0] / 10.0,
        sums[1][1] / 10.0
    );
}
