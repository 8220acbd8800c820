use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use cachemix::hierarchy::{contour_grid, evaluate_two_layer, savings_table, LayerPolicy};
use cachemix::scenario::{load_scenario, parse_size, savings_rows, Scenario, Workload};
use cachemix::sim::{run_single_cache, run_tandem, Warmup};
use cachemix::{brute_force_lru_hit, exact_lru_hit, hit_homogeneous, hit_mix_at_size, solve_tc};

/// Cache hit rates and bandwidth savings for mixed content workloads:
/// LFU analytics, the Che approximation for LRU, LRU simulation, and an
/// exact small-instance oracle.
#[derive(Parser)]
#[command(name = "cachemix", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in scenario name (mix2011, mix2015) or a TOML file path.
    #[arg(long, default_value = "mix2011")]
    scenario: String,
    /// Zipf exponent of the VoD type in built-in scenarios.
    #[arg(long, default_value_t = 0.8)]
    vod_alpha: f64,
}

impl ScenarioArgs {
    fn load(&self) -> anyhow::Result<Scenario> {
        Ok(load_scenario(&self.scenario, self.vod_alpha)?)
    }
}

#[derive(Args)]
struct GridArgs {
    /// Smallest cache size (bytes for mixes, objects otherwise; accepts
    /// KB/MB/GB/TB/PB suffixes, decimal).
    #[arg(long, default_value = "1GB")]
    grid_min: String,
    /// Largest cache size.
    #[arg(long, default_value = "1PB")]
    grid_max: String,
    /// Number of log-spaced grid points.
    #[arg(long, default_value_t = 30)]
    grid_points: usize,
}

impl GridArgs {
    fn build(&self) -> anyhow::Result<Vec<f64>> {
        let lo = parse_size(&self.grid_min)?;
        let hi = parse_size(&self.grid_max)?;
        if !(lo > 0.0) || hi < lo || self.grid_points < 1 {
            bail!("grid needs 0 < min <= max and at least one point");
        }
        if self.grid_points == 1 {
            return Ok(vec![lo]);
        }
        let step = (hi / lo).ln() / (self.grid_points - 1) as f64;
        Ok((0..self.grid_points)
            .map(|k| lo * (step * k as f64).exp())
            .collect())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum PolicyArg {
    Shared,
    VodOnly,
}

impl From<PolicyArg> for LayerPolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Shared => LayerPolicy::Shared,
            PolicyArg::VodOnly => LayerPolicy::Dedicated(vec!["vod".into()]),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Ideal-LFU hit-rate curve over a log-spaced cache-size grid.
    LfuCurve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Output CSV path.
        #[arg(long, default_value = "lfu_curve.csv")]
        out: PathBuf,
    },
    /// LRU hit-rate curve (Che approximation) over a log-spaced grid.
    LruCurve {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "lru_curve.csv")]
        out: PathBuf,
    },
    /// Per-type hit rates of one LRU cache at size --c1.
    PerTypeHits {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Cache size (bytes; unit suffixes accepted).
        #[arg(long, default_value = "1TB")]
        c1: String,
        #[arg(long, default_value = "per_type_hits.csv")]
        out: PathBuf,
    },
    /// Fraction of the cache each type occupies at size --c1.
    CacheShares {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "1TB")]
        c1: String,
        #[arg(long, default_value = "cache_shares.csv")]
        out: PathBuf,
    },
    /// Simulate one LRU cache under a single-law scenario.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Cache capacity in objects.
        #[arg(long, default_value_t = 100)]
        c1: u64,
        /// Total requests, including warmup.
        #[arg(long, default_value_t = 10_000_000)]
        requests: u64,
        /// Fixed warmup request count (omitted: adaptive).
        #[arg(long)]
        warmup: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "simulate.csv")]
        out: PathBuf,
    },
    /// Simulate m edge LRU caches behind one shared core cache.
    TandemSim {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Number of layer-1 caches.
        #[arg(long, default_value_t = 16)]
        m: u64,
        /// Objects per layer-1 cache.
        #[arg(long, default_value_t = 100)]
        c1: u64,
        /// Objects in the layer-2 cache.
        #[arg(long, default_value_t = 1000)]
        c2: u64,
        #[arg(long, default_value_t = 10_000_000)]
        requests: u64,
        #[arg(long)]
        warmup: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "tandem_sim.csv")]
        out: PathBuf,
    },
    /// Two-layer overall hit rate over a (c1, c2) grid, shared policy.
    HierarchyGrid {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "hierarchy_grid.csv")]
        out: PathBuf,
    },
    /// Bandwidth-savings table over both built-in mixes, VoD exponents
    /// 0.8 and 1.2, shared and VoD-dedicated layer-1 policies.
    SavingsTable {
        #[arg(long, default_value = "1TB")]
        c1: String,
        #[arg(long, default_value = "100TB")]
        c2: String,
        #[arg(long, default_value = "savings_table.csv")]
        out: PathBuf,
    },
    /// Two-layer evaluation of one scenario at (--c1, --c2).
    Hierarchy {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value = "1TB")]
        c1: String,
        #[arg(long, default_value = "100TB")]
        c2: String,
        #[arg(long, value_enum, default_value_t = PolicyArg::Shared)]
        policy: PolicyArg,
        #[arg(long, default_value = "hierarchy.csv")]
        out: PathBuf,
    },
    /// Exact LRU oracle vs the independent brute-force stationary solve.
    OracleCheck {
        /// Comma-separated object request probabilities (must sum to 1).
        #[arg(long, default_value = "0.48,0.24,0.16,0.12")]
        weights: String,
        /// Cache capacity in objects.
        #[arg(long, default_value_t = 2)]
        c1: usize,
        #[arg(long, default_value = "oracle_check.csv")]
        out: PathBuf,
    },
}

fn writer(path: &PathBuf) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

fn curve_sizes(scenario: &Scenario, grid: &GridArgs) -> anyhow::Result<Vec<f64>> {
    let sizes = grid.build()?;
    if let Workload::Homogeneous(law) = &scenario.workload {
        // object units: clamp the default byte-flavored grid to the catalog
        let n = law.population() as f64;
        let mut sizes: Vec<f64> = sizes.into_iter().filter(|&c| c <= n).collect();
        if sizes.is_empty() {
            sizes.push(n);
        }
        return Ok(sizes);
    }
    Ok(sizes)
}

fn run() -> anyhow::Result<String> {
    match Cli::parse().command {
        Command::LfuCurve {
            scenario,
            grid,
            out,
        } => {
            let sc = scenario.load()?;
            let sizes = curve_sizes(&sc, &grid)?;
            let mut w = writer(&out)?;
            writeln!(w, "cache_size,hit_rate")?;
            for &c in &sizes {
                let hit = match &sc.workload {
                    Workload::Mix(mix) => hit_mix_at_size(mix, c),
                    Workload::Homogeneous(law) => hit_homogeneous(law, c as u64),
                };
                writeln!(w, "{c},{hit}")?;
            }
            Ok(format!(
                "lfu-curve [{}]: {} points -> {}",
                sc.label,
                sizes.len(),
                out.display()
            ))
        }
        Command::LruCurve {
            scenario,
            grid,
            out,
        } => {
            let sc = scenario.load()?;
            let sizes = curve_sizes(&sc, &grid)?;
            let catalog = sc.catalog()?;
            let mut w = writer(&out)?;
            writeln!(w, "cache_size,hit_rate,t_c")?;
            for &c in &sizes {
                let sol = solve_tc(&catalog, c)?;
                writeln!(w, "{c},{},{}", sol.overall_byte_hit(), sol.t_c)?;
            }
            Ok(format!(
                "lru-curve [{}]: {} points -> {}",
                sc.label,
                sizes.len(),
                out.display()
            ))
        }
        Command::PerTypeHits { scenario, c1, out } => {
            let sc = scenario.load()?;
            let c = parse_size(&c1)?;
            let catalog = sc.catalog()?;
            let sol = solve_tc(&catalog, c)?;
            let mut w = writer(&out)?;
            writeln!(w, "type,hit_rate")?;
            for (i, name) in catalog.type_names().iter().enumerate() {
                writeln!(w, "{name},{}", sol.per_type_hit(i)?)?;
            }
            Ok(format!(
                "per-type-hits [{}] at C={c}: overall {:.4} -> {}",
                sc.label,
                sol.overall_byte_hit(),
                out.display()
            ))
        }
        Command::CacheShares { scenario, c1, out } => {
            let sc = scenario.load()?;
            let c = parse_size(&c1)?;
            let catalog = sc.catalog()?;
            let sol = solve_tc(&catalog, c)?;
            let shares = sol.cache_shares();
            let mut w = writer(&out)?;
            writeln!(w, "type,cache_share")?;
            for (name, share) in catalog.type_names().iter().zip(&shares) {
                writeln!(w, "{name},{share}")?;
            }
            Ok(format!(
                "cache-shares [{}] at C={c} -> {}",
                sc.label,
                out.display()
            ))
        }
        Command::Simulate {
            scenario,
            c1,
            requests,
            warmup,
            seed,
            out,
        } => {
            let sc = scenario.load()?;
            let law = sc.law()?;
            let warmup = warmup.map_or(Warmup::Adaptive, Warmup::Fixed);
            let report = run_single_cache(law, c1, requests, warmup, seed)?;
            let mut w = writer(&out)?;
            report.write_csv(&mut w)?;
            Ok(format!(
                "simulate [{}] C={c1} seed={seed}: hit {:.4} over {} measured requests -> {}",
                sc.label,
                report.overall_hit(),
                report.total_requests(),
                out.display()
            ))
        }
        Command::TandemSim {
            scenario,
            m,
            c1,
            c2,
            requests,
            warmup,
            seed,
            out,
        } => {
            let sc = scenario.load()?;
            let law = sc.law()?;
            let warmup = warmup.map_or(Warmup::Adaptive, Warmup::Fixed);
            let report = run_tandem(law, m, c1, c2, requests, warmup, seed)?;
            let mut w = writer(&out)?;
            writeln!(w, "layer,requests,hits,hit_rate")?;
            for (layer, r) in [("layer1", &report.layer1), ("layer2", &report.layer2)] {
                writeln!(
                    w,
                    "{layer},{},{},{}",
                    r.total_requests(),
                    r.total_hits(),
                    r.overall_hit()
                )?;
            }
            writeln!(
                w,
                "overall,{},{},{}",
                report.layer1.total_requests(),
                report.layer1.total_hits() + report.layer2.total_hits(),
                report.overall_hit()
            )?;
            Ok(format!(
                "tandem-sim [{}] m={m} c1={c1} c2={c2} seed={seed}: overall hit {:.4} -> {}",
                sc.label,
                report.overall_hit(),
                out.display()
            ))
        }
        Command::HierarchyGrid {
            scenario,
            grid,
            out,
        } => {
            let sc = scenario.load()?;
            let sizes = curve_sizes(&sc, &grid)?;
            let catalog = sc.catalog()?;
            let rows = contour_grid(&catalog, &sizes, &sizes)?;
            let mut w = writer(&out)?;
            writeln!(w, "c1,c2,hit_rate")?;
            for (i, &c1) in sizes.iter().enumerate() {
                for (j, &c2) in sizes.iter().enumerate() {
                    writeln!(w, "{c1},{c2},{}", rows[i][j])?;
                }
            }
            Ok(format!(
                "hierarchy-grid [{}]: {}x{} points -> {}",
                sc.label,
                sizes.len(),
                sizes.len(),
                out.display()
            ))
        }
        Command::SavingsTable { c1, c2, out } => {
            let c1 = parse_size(&c1)?;
            let c2 = parse_size(&c2)?;
            let rows = savings_table(&savings_rows()?, c1, c2)?;
            let mut w = writer(&out)?;
            writeln!(
                w,
                "label,layer1_percent,total_percent,layer1_reduction,total_reduction"
            )?;
            for r in &rows {
                writeln!(
                    w,
                    "{},{},{},{},{}",
                    r.label,
                    r.layer1_percent(),
                    r.total_percent(),
                    r.layer1_reduction,
                    r.total_reduction
                )?;
            }
            Ok(format!(
                "savings-table at C1={c1} C2={c2}: {} rows -> {}",
                rows.len(),
                out.display()
            ))
        }
        Command::Hierarchy {
            scenario,
            c1,
            c2,
            policy,
            out,
        } => {
            let sc = scenario.load()?;
            let c1 = parse_size(&c1)?;
            let c2 = parse_size(&c2)?;
            let catalog = sc.catalog()?;
            let r = evaluate_two_layer(&catalog, c1, c2, &policy.into())?;
            let mut w = writer(&out)?;
            writeln!(w, "type,layer1_hit,layer2_hit,combined_hit")?;
            for t in &r.per_type {
                writeln!(w, "{},{},{},{}", t.name, t.layer1, t.layer2, t.combined)?;
            }
            writeln!(
                w,
                "overall,{},,{}",
                r.layer1_reduction, r.total_reduction
            )?;
            Ok(format!(
                "hierarchy [{}] C1={c1} C2={c2}: layer1 {:.4}, total {:.4} -> {}",
                sc.label,
                r.layer1_reduction,
                r.total_reduction,
                out.display()
            ))
        }
        Command::OracleCheck { weights, c1, out } => {
            let q: Vec<f64> = weights
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .context("weights must be comma-separated numbers")?;
            let exact = exact_lru_hit(&q, c1)?;
            let brute = brute_force_lru_hit(&q, c1)?;
            let mut w = writer(&out)?;
            writeln!(w, "object,probability,exact_hit,brute_force_hit,abs_diff")?;
            let mut max_diff = 0.0f64;
            for (i, (&e, &b)) in exact
                .per_object_hits
                .iter()
                .zip(&brute.per_object_hits)
                .enumerate()
            {
                let diff = (e - b).abs();
                max_diff = max_diff.max(diff);
                writeln!(w, "{},{},{e},{b},{diff}", i + 1, q[i])?;
            }
            Ok(format!(
                "oracle-check N={} C={c1}: overall {:.6} (brute force {:.6}, max per-object diff {:.2e}) -> {}",
                q.len(),
                exact.overall_hit,
                brute.overall_hit,
                max_diff,
                out.display()
            ))
        }
    }
}

fn main() {
    match run() {
        Ok(summary) => println!("{summary}"),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}
