//! Command-line front end: instance generation, cutting-plane loops, facet
//! verification, hull certification and pooling export.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use bqpmc::hull::{self, RatPoint};
use bqpmc::instance::{Instance, Point};
use bqpmc::io as model_io;
use bqpmc::oracle;
use bqpmc::pooling;
use bqpmc::rng::SplitMix64;
use bqpmc::separators::{self, CutClass, LoopConfig};
use bqpmc::simplex;

#[derive(Parser)]
#[command(name = "bqpmc", about = "Cutting planes and verification for the multiple-choice bipartite quadric polytope", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a complete bipartite instance file.
    Gen {
        /// Subset sizes: "5x5" (five subsets of five) or "1,2,3".
        #[arg(long)]
        subsets: String,
        /// Number of Y nodes.
        #[arg(long)]
        y: usize,
        /// Seed recorded for reproducibility (generation is deterministic).
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the cutting-plane loop over seeded random objectives.
    Loop {
        #[arg(long)]
        instance: PathBuf,
        /// Objective spec: "uniform:<lo>:<hi>" sampled per seed, or a path
        /// to a file with one coefficient per line.
        #[arg(long, default_value = "uniform:-10:10")]
        objective: String,
        /// Comma-separated classes from {rlt,c,cc,a1,a1s,a1c,a2,a2s,a2c},
        /// or "all", or "none" for the pure relaxation.
        #[arg(long, default_value = "all")]
        classes: String,
        /// Comma-separated seed list or "a..b" range.
        #[arg(long, default_value = "1..11")]
        seeds: String,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 50)]
        rounds: usize,
        /// Solve the relaxations in exact rational arithmetic.
        #[arg(long)]
        exact: bool,
        /// CSV output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify validity or facet rank of a constraint pool against the
    /// vertex oracle.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        /// Constraint pool file; when omitted the RLT rows are checked.
        #[arg(long)]
        cuts: Option<PathBuf>,
        /// "valid" or "facet".
        #[arg(long, default_value = "facet")]
        mode: String,
    },
    /// Certify membership of a point in the basic+RLT polytope.
    Hull {
        #[arg(long)]
        instance: PathBuf,
        /// Point file (one value per line, canonical variable order); a
        /// random polytope point is sampled when omitted.
        #[arg(long)]
        point: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Certificate output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a pooling formulation and export it in LP format.
    Pool {
        #[arg(long)]
        instance: PathBuf,
        /// "q" or "qcuts".
        #[arg(long, default_value = "qcuts")]
        formulation: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::FAILURE
        }
    }
}

fn emit(out: Option<PathBuf>, text: String) -> Result<(), String> {
    match out {
        Some(path) => fs::write(&path, text).map_err(|e| format!("{}: {}", path.display(), e)),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>, String> {
    if let Some((count, size)) = spec.split_once('x') {
        let count: usize = count.parse().map_err(|_| "bad subset count")?;
        let size: usize = size.parse().map_err(|_| "bad subset size")?;
        if count == 0 || size == 0 {
            return Err("sizes must be positive".into());
        }
        Ok(vec![size; count])
    } else {
        let sizes: Result<Vec<usize>, _> = spec.split(',').map(|t| t.trim().parse()).collect();
        let sizes = sizes.map_err(|_| "bad size list")?;
        if sizes.is_empty() || sizes.contains(&0) {
            return Err("sizes must be positive".into());
        }
        Ok(sizes)
    }
}

fn parse_seeds(spec: &str) -> Result<Vec<u64>, String> {
    if let Some((a, b)) = spec.split_once("..") {
        let a: u64 = a.parse().map_err(|_| "bad seed range")?;
        let b: u64 = b.parse().map_err(|_| "bad seed range")?;
        Ok((a..b).collect())
    } else {
        spec.split(',')
            .map(|t| t.trim().parse().map_err(|_| "bad seed".to_string()))
            .collect()
    }
}

fn parse_classes(spec: &str) -> Result<Vec<CutClass>, String> {
    match spec {
        "all" => Ok(CutClass::all()),
        "none" | "lp" => Ok(vec![]),
        _ => spec
            .split(',')
            .map(|t| {
                CutClass::parse(t.trim()).ok_or_else(|| format!("unknown class `{}`", t))
            })
            .collect(),
    }
}

fn load_instance(path: &PathBuf) -> Result<Instance, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    model_io::parse_instance(&text).map_err(|e| e.to_string())
}

fn objective_for(spec: &str, seed: u64, n: usize) -> Result<Vec<f64>, String> {
    if let Some(rest) = spec.strip_prefix("uniform:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let (lo, hi) = match parts.as_slice() {
            [lo, hi] => (lo.parse(), hi.parse()),
            _ => return Err("objective spec: uniform:<lo>:<hi>".into()),
        };
        let lo: f64 = lo.map_err(|_| "bad lo")?;
        let hi: f64 = hi.map_err(|_| "bad hi")?;
        let mut rng = SplitMix64::new(seed);
        Ok((0..n).map(|_| rng.uniform(lo, hi)).collect())
    } else {
        let text = fs::read_to_string(spec).map_err(|e| format!("{}: {}", spec, e))?;
        let vals: Result<Vec<f64>, _> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| l.trim().parse())
            .collect();
        let vals = vals.map_err(|_| "bad objective file")?;
        if vals.len() != n {
            return Err(format!("objective has {} values, instance needs {}", vals.len(), n));
        }
        Ok(vals)
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Gen {
            subsets,
            y,
            seed: _,
            out,
        } => {
            let sizes = parse_sizes(&subsets)?;
            if y == 0 {
                return Err("y must be positive".into());
            }
            let inst = Instance::complete(&sizes, y);
            emit(out, model_io::write_instance(&inst))
        }
        Command::Loop {
            instance,
            objective,
            classes,
            seeds,
            tol,
            rounds,
            exact,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let classes_parsed = parse_classes(&classes)?;
            let seeds = parse_seeds(&seeds)?;
            let config = LoopConfig {
                tol,
                round_limit: rounds,
                ..Default::default()
            };
            let mut runs = Vec::new();
            for &seed in &seeds {
                let obj = objective_for(&objective, seed, inst.n_vars())?;
                if classes_parsed.is_empty() {
                    // Pure relaxation row.
                    let lp = simplex::mccormick_relaxation(&inst, &obj);
                    let value = if exact {
                        let sol = simplex::solve_exact(&lp).map_err(|e| e.to_string())?;
                        simplex::Scalar::to_f64(&sol.value)
                    } else {
                        simplex::solve(&lp).map_err(|e| e.to_string())?.value
                    };
                    let (ip, _) = oracle::integer_optimum(&inst, &obj);
                    let report = separators::LoopReport {
                        rounds: vec![],
                        lp_value: value,
                        ip_value: ip,
                        gap_percent: separators::gap_percent(value, ip),
                        total_cuts: vec![],
                        hit_round_limit: false,
                        cuts: vec![],
                    };
                    runs.push((seed, classes.clone(), report));
                } else {
                    let report = separators::cutting_loop(&inst, &obj, &classes_parsed, &config)
                        .map_err(|e| e.to_string())?;
                    runs.push((seed, classes.clone(), report));
                }
            }
            let name = instance
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".into());
            let mut csv = separators::report_csv(&name, &runs);
            let avg: f64 =
                runs.iter().map(|(_, _, r)| r.gap_percent).sum::<f64>() / runs.len() as f64;
            csv.push_str(&format!("{},avg,{},,,,,,{:.4}\n", name, classes, avg));
            emit(out, csv)
        }
        Command::Verify {
            instance,
            cuts,
            mode,
        } => {
            let inst = load_instance(&instance)?;
            let pool = match cuts {
                Some(path) => {
                    let text =
                        fs::read_to_string(&path).map_err(|e| format!("{}: {}", path.display(), e))?;
                    model_io::parse_constraints(&inst, &text).map_err(|e| e.to_string())?
                }
                None => bqpmc::families::rlt_inequalities(&inst),
            };
            let mut all_ok = true;
            for c in &pool {
                match mode.as_str() {
                    "valid" => {
                        let v = oracle::is_valid(&inst, c);
                        println!("{}: {}", c.tag, if v.valid { "valid" } else { "INVALID" });
                        all_ok &= v.valid;
                    }
                    "facet" => {
                        let rank = oracle::facet_rank(&inst, c, oracle::DEFAULT_VERTEX_CAP)
                            .map_err(|e| e.to_string())?;
                        let dim = inst.n_vars() as isize;
                        println!(
                            "{}: rank {} of {} ({})",
                            c.tag,
                            rank,
                            dim - 1,
                            if rank == dim - 1 { "facet" } else { "not a facet" }
                        );
                    }
                    other => return Err(format!("unknown mode `{}`", other)),
                }
            }
            if mode == "valid" && !all_ok {
                return Err("invalid constraints found".into());
            }
            Ok(())
        }
        Command::Hull {
            instance,
            point,
            seed,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let h = match point {
                Some(path) => {
                    let text =
                        fs::read_to_string(&path).map_err(|e| format!("{}: {}", path.display(), e))?;
                    let vals: Result<Vec<f64>, _> = text
                        .lines()
                        .filter(|l| !l.trim().is_empty())
                        .map(|l| l.trim().parse())
                        .collect();
                    RatPoint::from_f64(&vals.map_err(|_| "bad point file")?)
                }
                None => {
                    // Random convex combination of vertices.
                    let mut rng = SplitMix64::new(seed);
                    let k = 1 + rng.below(5);
                    let weights: Vec<i64> = (0..k).map(|_| 1 + rng.below(5) as i64).collect();
                    let total: i64 = weights.iter().sum();
                    let mut values =
                        vec![num_rational::BigRational::from_integer(0.into()); inst.n_vars()];
                    for &w in &weights {
                        let v = oracle::sample_vertex(&inst, &mut rng);
                        let lambda = num_rational::BigRational::new(w.into(), total.into());
                        for (idx, &coord) in v.values.iter().enumerate() {
                            if coord != 0.0 {
                                values[idx] += &lambda;
                            }
                        }
                    }
                    RatPoint { values }
                }
            };
            match hull::certify_membership(&inst, &h) {
                Ok(cert) => {
                    hull::verify_certificate(&inst, &h, &cert)
                        .map_err(|e| format!("certificate failed verification: {:?}", e))?;
                    emit(out, hull::write_certificate(&inst, &cert))?;
                    println!("verified");
                    Ok(())
                }
                Err(hull::HullError::ViolatedRow(tag)) => {
                    Err(format!("point outside the polytope: violates {}", tag))
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Pool {
            instance,
            formulation,
            out,
        } => {
            let text = fs::read_to_string(&instance)
                .map_err(|e| format!("{}: {}", instance.display(), e))?;
            let pi = pooling::parse_pooling_instance(&text).map_err(|e| e.to_string())?;
            let model = match formulation.as_str() {
                "q" => pooling::build_q(&pi),
                "qcuts" => pooling::build_qcuts(&pi),
                other => return Err(format!("unknown formulation `{}`", other)),
            }
            .map_err(|e| e.to_string())?;
            emit(out, pooling::export_lp(&model))
        }
    }
}

// Keep the sampled hull point reproducible across platforms.
#[allow(unused)]
fn sample_point(inst: &Instance, rng: &mut SplitMix64) -> Point {
    let mut p = Point::zeros(inst);
    for v in p.values.iter_mut() {
        *v = rng.next_f64();
    }
    p
}
