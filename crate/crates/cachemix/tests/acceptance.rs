//! Acceptance suite: one test per top-level criterion, each printing a
//! single PASS/FAIL line (visible with `--nocapture`, and always on
//! failure).

use cachemix::che::{solve_tc, Catalog};
use cachemix::hierarchy::{evaluate_two_layer, savings_table, LayerPolicy};
use cachemix::lfu::{hit_homogeneous, hit_mix_at_size};
use cachemix::oracle::{brute_force_lru_hit, exact_lru_hit};
use cachemix::scenario::{builtin_mix, savings_rows};
use cachemix::sim::{run_single_cache, run_tandem, Warmup};
use cachemix::traffic::{harmonic_sum, harmonic_sum_with_head, PopularityLaw};

fn verdict(name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {name}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {name} failed: {detail}");
}

#[test]
fn criterion_01_savings_table_reproduction() {
    let rows = savings_table(&savings_rows().unwrap(), 1e12, 100e12).unwrap();
    // (layer1, total) percent, row order: year x vod_alpha x {shared, vod-only}
    let expected = [
        (17.0, 50.0),
        (23.0, 58.0),
        (24.0, 50.0),
        (23.0, 58.0),
        (27.0, 59.0),
        (37.0, 61.0),
        (36.0, 59.0),
        (37.0, 61.0),
    ];
    let mut detail = String::new();
    let mut pass = true;
    for (row, (l1, total)) in rows.iter().zip(expected) {
        let got = (row.layer1_reduction * 100.0, row.total_reduction * 100.0);
        let ok = (got.0 - l1).abs() <= 1.0 && (got.1 - total).abs() <= 1.0;
        pass &= ok;
        if !ok {
            detail.push_str(&format!(
                "[{}: got ({:.1},{:.1}) want ({l1},{total})] ",
                row.label, got.0, got.1
            ));
        }
    }
    verdict("1 (savings table, 16 values, +-1pp)", pass, detail.trim());
}

#[test]
fn criterion_02_che_vs_simulation_zipf() {
    let law = PopularityLaw::zipf(0.8, 10_000).unwrap();
    let catalog = Catalog::homogeneous(&law).unwrap();
    let warmup = 2_000_000u64;
    let mut worst: (f64, u64, u64) = (0.0, 0, 0);
    for c in [10u64, 100, 1000, 5000] {
        let sol = solve_tc(&catalog, c as f64).unwrap();
        let report =
            run_single_cache(&law, c, warmup + 10_000_000, Warmup::Fixed(warmup), 101).unwrap();
        for rank in [1u64, 10, 100, 1000] {
            let sim = report.rank_hit_rate(rank).unwrap();
            let che = sol.object_hit_rate(0, rank).unwrap();
            let diff = (sim - che).abs();
            if diff > worst.0 {
                worst = (diff, c, rank);
            }
        }
    }
    verdict(
        "2 (Zipf sim vs Che, <=0.02)",
        worst.0 <= 0.02,
        &format!("worst |sim-che| {:.4} at C={} rank={}", worst.0, worst.1, worst.2),
    );
}

#[test]
fn criterion_03_che_vs_simulation_geometric() {
    let law = PopularityLaw::geometric(0.5, 16).unwrap();
    let catalog = Catalog::homogeneous(&law).unwrap();
    let mut worst: (f64, u64, u64) = (0.0, 0, 0);
    for c in 1..=15u64 {
        let sol = solve_tc(&catalog, c as f64).unwrap();
        let report =
            run_single_cache(&law, c, 4_000_000, Warmup::Fixed(1_000_000), 103).unwrap();
        for rank in [1u64, 2, 4, 8] {
            let sim = report.rank_hit_rate(rank).unwrap();
            let che = sol.object_hit_rate(0, rank).unwrap();
            let diff = (sim - che).abs();
            if diff > worst.0 {
                worst = (diff, c, rank);
            }
        }
    }
    verdict(
        "3 (geometric sim vs Che, <=0.02)",
        worst.0 <= 0.02,
        &format!("worst |sim-che| {:.4} at C={} rank={}", worst.0, worst.1, worst.2),
    );
}

#[test]
fn criterion_04_exact_oracle_agreement() {
    let q = [0.48, 0.24, 0.16, 0.12];
    let exact = exact_lru_hit(&q, 2).unwrap();
    let brute = brute_force_lru_hit(&q, 2).unwrap();
    let oracle_diff = exact
        .per_object_hits
        .iter()
        .zip(&brute.per_object_hits)
        .map(|(a, b)| (a - b).abs())
        .fold((exact.overall_hit - brute.overall_hit).abs(), f64::max);

    let law = PopularityLaw::explicit(q.to_vec()).unwrap();
    let report = run_single_cache(&law, 2, 2_100_000, Warmup::Fixed(100_000), 104).unwrap();
    let sigma = report.overall_stderr();
    let sim_diff = (report.overall_hit() - exact.overall_hit).abs();

    let catalog = Catalog::homogeneous(&law).unwrap();
    let che = solve_tc(&catalog, 2.0).unwrap().overall_byte_hit();
    let che_diff = (che - exact.overall_hit).abs();

    let pass = oracle_diff <= 1e-12 && sim_diff <= 3.0 * sigma && che_diff <= 0.02;
    verdict(
        "4 (oracle: product form 1e-12, sim 3 sigma, Che 0.02)",
        pass,
        &format!(
            "product-vs-brute {oracle_diff:.2e}, sim diff {sim_diff:.5} (3s={:.5}), che diff {che_diff:.4}",
            3.0 * sigma
        ),
    );
}

#[test]
fn criterion_05_uniform_exactness() {
    let law = PopularityLaw::uniform(1000).unwrap();
    let catalog = Catalog::homogeneous(&law).unwrap();
    let che = solve_tc(&catalog, 100.0).unwrap().overall_byte_hit();
    let report = run_single_cache(&law, 100, 4_000_000, Warmup::Fixed(2_000_000), 105).unwrap();
    let sim = report.overall_hit();
    let pass = (che - 0.1).abs() <= 1e-9 && (sim - 0.1).abs() <= 0.005;
    verdict(
        "5 (uniform: Che exact 0.1, sim +-0.005)",
        pass,
        &format!("che {che:.10}, sim {sim:.4}"),
    );
}

#[test]
fn criterion_06_lfu_dominates_lru() {
    let grid = |lo: f64, hi: f64| -> Vec<f64> {
        let step = (hi / lo).ln() / 19.0;
        (0..20).map(|k| lo * (step * k as f64).exp()).collect()
    };
    let mut worst = f64::NEG_INFINITY;
    for alpha in [0.8, 1.2] {
        let law = PopularityLaw::zipf(alpha, 10_000).unwrap();
        let catalog = Catalog::homogeneous(&law).unwrap();
        for c in grid(1.0, 10_000.0) {
            let lfu = hit_homogeneous(&law, c as u64);
            let lru = solve_tc(&catalog, c.max(1.0)).unwrap().overall_byte_hit();
            worst = worst.max(lru - lfu);
        }
    }
    let mix = builtin_mix(2011, 0.8).unwrap();
    let catalog = Catalog::from_mix(&mix);
    for c in grid(1e9, 1e15) {
        let lfu = hit_mix_at_size(&mix, c);
        let lru = solve_tc(&catalog, c).unwrap().overall_byte_hit();
        worst = worst.max(lru - lfu);
    }
    verdict(
        "6 (LFU >= LRU on 20-point grids)",
        worst <= 1e-9,
        &format!("max LRU-LFU excess {worst:.2e}"),
    );
}

#[test]
fn criterion_07_chunk_invariance() {
    let mix = builtin_mix(2011, 0.8).unwrap();
    let chunked = mix.chunk_view(10e3).unwrap();
    let (whole, parts) = (Catalog::from_mix(&mix), Catalog::from_mix(&chunked));
    let mut worst = 0.0f64;
    for c in [1e9, 1e12, 100e12] {
        let a = solve_tc(&whole, c).unwrap().overall_byte_hit();
        let b = solve_tc(&parts, c).unwrap().overall_byte_hit();
        worst = worst.max((a - b).abs() / a);
    }
    verdict(
        "7 (10KB chunk view, rel 1e-6)",
        worst <= 1e-6,
        &format!("max relative diff {worst:.2e}"),
    );
}

#[test]
fn criterion_08_hierarchy_contour() {
    let catalog = Catalog::homogeneous(&PopularityLaw::zipf(0.8, 10_000).unwrap()).unwrap();
    let hit = |c1: f64, c2: f64| {
        evaluate_two_layer(&catalog, c1, c2, &LayerPolicy::Shared)
            .unwrap()
            .total_reduction
    };
    let mut pass = true;
    let mut detail = String::new();
    for c in [100.0, 1000.0] {
        let whole = hit(c, 0.0);
        let split = hit(c / 2.0, c / 2.0);
        if whole < split {
            pass = false;
            detail.push_str(&format!("[C={c}: {whole:.4} < {split:.4}] "));
        }
    }
    let grid = [50.0, 100.0, 250.0, 500.0, 1000.0];
    let mut worst = 0.0f64;
    for &a in &grid {
        for &b in &grid {
            worst = worst.max((hit(a, b) - hit(b, a)).abs());
        }
    }
    pass &= worst < 0.02;
    verdict(
        "8 (contour: consolidation and <2pp symmetry)",
        pass,
        &format!("{detail}max asymmetry {:.2}pp", worst * 100.0),
    );
}

#[test]
fn criterion_09_tandem_validation() {
    let law = PopularityLaw::zipf(0.8, 10_000).unwrap();
    let catalog = Catalog::homogeneous(&law).unwrap();
    let analytic = evaluate_two_layer(&catalog, 100.0, 1000.0, &LayerPolicy::Shared)
        .unwrap()
        .total_reduction;
    let report = run_tandem(&law, 16, 100, 1000, 12_000_000, Warmup::Fixed(2_000_000), 109)
        .unwrap();
    let sim = report.overall_hit();
    let diff = (sim - analytic).abs();
    verdict(
        "9 (tandem m=16 within 0.03 of analytic)",
        diff <= 0.03,
        &format!("sim {sim:.4} vs analytic {analytic:.4} (diff {diff:.4})"),
    );
}

#[test]
fn criterion_10_large_population_summation() {
    let mut worst = 0.0f64;
    for alpha in [0.8, 1.2] {
        for n in [1_000_000u64, 100_000_000] {
            let exact: f64 = {
                // chunked exact summation, independent of the production path
                let mut sum = 0.0;
                let mut comp = 0.0;
                for k in 1..=n {
                    let term = (k as f64).powf(-alpha);
                    let y = term - comp;
                    let t = sum + y;
                    comp = (t - sum) - y;
                    sum = t;
                }
                sum
            };
            let tail = harmonic_sum_with_head(alpha, n, 10_000);
            worst = worst.max((tail - exact).abs() / exact);
        }
    }
    let norm = {
        let mix = builtin_mix(2011, 0.8).unwrap();
        (mix.byte_request_rate() - 1.0).abs()
    };
    let pass = worst <= 1e-9 && norm <= 1e-6;
    verdict(
        "10 (Euler-Maclaurin rel 1e-9; normalization 1e-6)",
        pass,
        &format!("worst tail error {worst:.2e}, normalization residual {norm:.2e}"),
    );
    let _ = harmonic_sum(0.8, 100_000_000_000); // must not panic at paper scale
}
