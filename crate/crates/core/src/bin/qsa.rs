use std::fs;
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use qsa::adversary::{
    bell_budget, bin_mass_histogram, chained_qpe_attack, classical_eve_cost, haar_state,
    honest_classical_cost, memory_cutoffs, min_k_for_entropy, quantum_eve_cost,
    state_guess_success, survival_budget, CostModelParams, YEAR_SECONDS,
};
use qsa::compile::{
    compile_asymmetric, compile_blockwise, compile_multiparty, compile_symmetric,
    compile_symmetric_schedule, derive_plant_seed, plant_state, seed_to_plant_circuit,
    ChallengeBundle, CompilerConfig,
};
use qsa::extract::{
    evaluate_schedule, noise_sweep, sweep_csv, EvalConfig, Family, Regime, SweepConfig,
};
use qsa::protocol::{prover_session, verifier_session, ProverConfig, VerifierConfig};
use qsa::qsim::NoiseModel;
use qsa::rng::SeedStream;

#[derive(Parser)]
#[command(
    name = "qsa",
    about = "Spectral challenge-response authentication: compile challenges, \
             extract eigenphase features, run attacks and cost models, and \
             drive the verifier/prover protocol."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Symmetric,
    Asymmetric,
    Multiparty,
    Blockwise,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    M,
    C,
    Q,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::M => Regime::M,
            RegimeArg::C => Regime::C,
            RegimeArg::Q => Regime::Q,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AttackKind {
    Chained,
    Guess,
    Binmass,
}

#[derive(Clone, Copy, ValueEnum)]
enum CostKind {
    QuantumEve,
    ClassicalEve,
    Memory,
    Bell,
    Survival,
}

#[derive(Subcommand)]
enum Command {
    /// Compile challenge instances and write bundle/witness files.
    Compile {
        #[arg(value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long, default_value_t = 6)]
        layers: usize,
        #[arg(long, default_value_t = 3000)]
        steps: usize,
        #[arg(long, default_value_t = 2)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        plant_depth: usize,
        /// Number of challenge instances (symmetric only).
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Block size for the blockwise family.
        #[arg(long, default_value_t = 4)]
        blocksize: usize,
        /// Party count for the multiparty family.
        #[arg(long, default_value_t = 2)]
        parties: usize,
        /// Master provisioning secret as hex (32+ bytes); derived from
        /// --seed when omitted.
        #[arg(long)]
        s0: Option<String>,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
    },
    /// Evaluate a bundle directory against plants derived from S0.
    Eval {
        #[arg(long)]
        bundles: PathBuf,
        #[arg(long)]
        s0: String,
        #[arg(long, value_enum, default_value_t = RegimeArg::Q)]
        regime: RegimeArg,
        /// Shot count; omit for exact-probability mode.
        #[arg(long)]
        shots: Option<u32>,
        #[arg(long, default_value_t = 0.0)]
        p2: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        plant_depth: usize,
    },
    /// Run an attack family and print its report.
    Attack {
        #[arg(value_enum)]
        which: AttackKind,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        m: u8,
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// For guess: search the minimum k for this min-entropy.
        #[arg(long)]
        target_bits: Option<f64>,
        /// Optional CSV output: (i, overlap) for chained, (F, p_U) for
        /// guess, (bin, mass) for binmass.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Noise sweep: LDQPE bucket accuracy vs two-qubit error rate.
    Sweep {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        m: u8,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 4000)]
        shots: u32,
        /// Comma-separated p2 values.
        #[arg(long, default_value = "1e-4,1e-3,5e-3,1e-2,2e-2")]
        p2_grid: String,
        #[arg(long, value_enum, default_value_t = FamilyArg::Symmetric)]
        family: FamilyArg,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long, default_value_t = 4000)]
        steps: usize,
        #[arg(long, default_value_t = 2)]
        restarts: usize,
        #[arg(long, default_value_t = 4)]
        plant_depth: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the calibration cost models.
    Cost {
        #[arg(value_enum)]
        which: CostKind,
        #[arg(long, default_value_t = 27)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        m: u32,
        /// RAM in bytes for the memory cutoffs.
        #[arg(long, default_value_t = 9.2e15)]
        ram_bytes: f64,
        #[arg(long, default_value_t = 110)]
        ns: u64,
        #[arg(long, default_value_t = 36)]
        k: u64,
        #[arg(long, default_value_t = 555)]
        n2q: u64,
        #[arg(long, default_value_t = 0.95)]
        target: f64,
        /// Emit a (n, seconds) CSV table over n..=n-to instead of one value
        /// (quantum-eve and classical-eve only).
        #[arg(long)]
        n_to: Option<u32>,
    },
    /// Generate a master provisioning secret S0 (32 bytes, hex).
    Keygen {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Listen as the verifier and run sessions over TCP.
    Serve {
        #[arg(long, default_value = "127.0.0.1:7877")]
        addr: String,
        #[arg(long)]
        s0: String,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 4)]
        m: u8,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        plant_depth: usize,
        #[arg(long, default_value_t = 6)]
        layers: usize,
        #[arg(long, default_value_t = 3000)]
        steps: usize,
        #[arg(long, default_value_t = 2)]
        restarts: usize,
        #[arg(long, default_value_t = 0.25)]
        delta: f64,
        #[arg(long)]
        seed: Option<u64>,
        /// Stop after this many sessions (0 = run forever).
        #[arg(long, default_value_t = 0)]
        max_sessions: usize,
    },
    /// Connect to a verifier as the prover.
    Connect {
        #[arg(long, default_value = "127.0.0.1:7877")]
        addr: String,
        #[arg(long)]
        s0: String,
        #[arg(long, value_enum, default_value_t = RegimeArg::Q)]
        regime: RegimeArg,
        #[arg(long)]
        shots: Option<u32>,
        #[arg(long, default_value_t = 0.0)]
        p2: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_s0(hex_str: &str) -> Result<Vec<u8>, String> {
    let bytes = hex::decode(hex_str.trim()).map_err(|e| format!("bad S0 hex: {e}"))?;
    if bytes.len() < 32 {
        return Err(format!("S0 must be at least 32 bytes, got {}", bytes.len()));
    }
    Ok(bytes)
}

fn s0_from_seed(seed: u64) -> Vec<u8> {
    let mut rng = SeedStream::from_u64(seed, "s0");
    let mut s0 = vec![0u8; 32];
    rng.fill_bytes(&mut s0);
    s0
}

fn eval_config(shots: Option<u32>, p2: f64) -> EvalConfig {
    match shots {
        Some(s) => EvalConfig::sampled(s, NoiseModel::depolarizing(p2)),
        None => EvalConfig::exact(),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Compile {
            family,
            n,
            m,
            delta,
            layers,
            steps,
            restarts,
            seed,
            plant_depth,
            k,
            blocksize,
            parties,
            s0,
            out_dir,
        } => {
            let s0 = match s0 {
                Some(h) => parse_s0(&h)?,
                None => s0_from_seed(seed),
            };
            let config = CompilerConfig {
                delta_target: delta,
                layers,
                steps,
                restarts,
                seed,
                ..CompilerConfig::default()
            };
            fs::create_dir_all(&out_dir)?;
            match family {
                FamilyArg::Symmetric => {
                    let schedule =
                        compile_symmetric_schedule(&s0, 0, k, m, plant_depth, n, &config)?;
                    for (i, (ch, bundle)) in schedule
                        .challenges
                        .iter()
                        .zip(&schedule.bundles)
                        .enumerate()
                    {
                        let bpath = out_dir.join(format!("bundle_{i:03}.json"));
                        let wpath = out_dir.join(format!("witness_{i:03}.json"));
                        fs::write(&bpath, serde_json::to_vec_pretty(bundle)?)?;
                        fs::write(&wpath, serde_json::to_vec_pretty(&ch.witness)?)?;
                        println!(
                            "challenge {i}: digest={} delta_hat={:.4}{}",
                            bundle.meta.digest,
                            ch.witness.delta_hat,
                            if ch.met_target() { "" } else { " (below target)" }
                        );
                    }
                }
                FamilyArg::Asymmetric => {
                    let sigma = derive_plant_seed(&s0, 0)?;
                    let prep = seed_to_plant_circuit(&sigma, n, plant_depth);
                    let ch = compile_asymmetric(&prep, &config)?;
                    let bundle = ChallengeBundle::new(ch.public.clone(), m, 0);
                    fs::write(
                        out_dir.join("bundle_000.json"),
                        serde_json::to_vec_pretty(&bundle)?,
                    )?;
                    fs::write(
                        out_dir.join("witness_000.json"),
                        serde_json::to_vec_pretty(&ch.witness)?,
                    )?;
                    println!(
                        "asymmetric challenge: digest={} delta_l={:.4} delta_r={:.4}",
                        bundle.meta.digest, ch.witness.delta_l, ch.witness.delta_r
                    );
                }
                FamilyArg::Multiparty => {
                    let mut rng = SeedStream::from_u64(seed, "multiparty-labels");
                    let mut plants = Vec::new();
                    let mut used = std::collections::HashSet::new();
                    for p in 0..parties {
                        let sigma = derive_plant_seed(&s0, p as u32)?;
                        let prep = seed_to_plant_circuit(&sigma, n, plant_depth);
                        let label: Vec<u8> = loop {
                            let cand: Vec<u8> =
                                (0..n).map(|_| rng.gen_range(2) as u8).collect();
                            if used.insert(cand.clone()) {
                                break cand;
                            }
                        };
                        plants.push((prep, label));
                    }
                    let ch = compile_multiparty(&plants, &config)?;
                    let bundle = ChallengeBundle::new(ch.public.clone(), m, 0);
                    fs::write(
                        out_dir.join("bundle_000.json"),
                        serde_json::to_vec_pretty(&bundle)?,
                    )?;
                    fs::write(
                        out_dir.join("witness_000.json"),
                        serde_json::to_vec_pretty(&serde_json::json!({
                            "V_params": ch.v_params,
                            "betas": ch.betas,
                            "labels": ch.labels,
                            "delta_hats": ch.delta_hats,
                        }))?,
                    )?;
                    println!(
                        "multiparty challenge: digest={} per-party deltas={:?}",
                        bundle.meta.digest, ch.delta_hats
                    );
                }
                FamilyArg::Blockwise => {
                    // product-structured plant: independent sub-seeds per block
                    let mut prep = qsa::qsim::Circuit::new(n);
                    for (blk, start) in (0..n).step_by(blocksize).enumerate() {
                        let sigma = derive_plant_seed(&s0, blk as u32)?;
                        let sub = seed_to_plant_circuit(&sigma, blocksize, plant_depth);
                        for g in &sub.gates {
                            let mut shifted = g.clone();
                            for t in &mut shifted.targets {
                                *t += start;
                            }
                            prep.push(shifted);
                        }
                    }
                    let ch = compile_blockwise(&prep, blocksize, &config)?;
                    let bundle = ChallengeBundle::new(ch.public.clone(), m, 0);
                    fs::write(
                        out_dir.join("bundle_000.json"),
                        serde_json::to_vec_pretty(&bundle)?,
                    )?;
                    println!(
                        "blockwise challenge: digest={} block_overlaps={:?} global={:.4} moment_loss={:.4}",
                        bundle.meta.digest, ch.block_overlaps, ch.global_overlap, ch.moment_loss
                    );
                }
            }
        }
        Command::Eval {
            bundles,
            s0,
            regime,
            shots,
            p2,
            seed,
            plant_depth,
        } => {
            let s0 = parse_s0(&s0)?;
            let mut paths: Vec<PathBuf> = if bundles.is_dir() {
                fs::read_dir(&bundles)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| {
                        p.file_name()
                            .and_then(|f| f.to_str())
                            .map(|f| f.starts_with("bundle_") && f.ends_with(".json"))
                            .unwrap_or(false)
                    })
                    .collect()
            } else {
                vec![bundles.clone()]
            };
            paths.sort();
            let mut publics = Vec::new();
            let mut plants = Vec::new();
            let mut m = 0u8;
            for p in &paths {
                let bundle: ChallengeBundle = serde_json::from_slice(&fs::read(p)?)?;
                if !bundle.verify_digest() {
                    return Err(format!("digest mismatch in {}", p.display()).into());
                }
                m = bundle.meta.m as u8;
                let sigma = derive_plant_seed(&s0, bundle.meta.index)?;
                plants.push(plant_state(&seed_to_plant_circuit(
                    &sigma,
                    bundle.meta.n,
                    plant_depth,
                )));
                publics.push(bundle.public);
            }
            let mut rng = SeedStream::from_u64(seed, "eval");
            let theta = evaluate_schedule(
                &publics,
                &plants,
                regime.into(),
                m,
                &eval_config(shots, p2),
                &mut rng,
            )?;
            println!("{}", serde_json::to_string_pretty(&theta)?);
            println!("packed_hex={}", hex::encode(theta.packed_bits()));
        }
        Command::Attack {
            which,
            n,
            m,
            k,
            trials,
            seed,
            target_bits,
            csv,
        } => match which {
            AttackKind::Chained => {
                let s0 = s0_from_seed(seed);
                let config = CompilerConfig {
                    layers: n,
                    seed,
                    ..CompilerConfig::default()
                };
                let schedule = compile_symmetric_schedule(
                    &s0, 0, k as usize, m as usize, 3, n, &config,
                )?;
                let mut rng = SeedStream::from_u64(seed, "attack-chained");
                let report = chained_qpe_attack(&schedule.challenges, m, trials, &mut rng)?;
                println!("{}", serde_json::to_string_pretty(&report)?);
                if let Some(path) = csv {
                    let overlaps = report.diagnostics["successive_signal_overlaps"]
                        .as_array()
                        .unwrap()
                        .clone();
                    let mut out = String::from("i,overlap\n");
                    for (i, v) in overlaps.iter().enumerate() {
                        out.push_str(&format!("{},{}\n", i, v.as_f64().unwrap()));
                    }
                    fs::write(path, out)?;
                }
            }
            AttackKind::Guess => {
                let mut rng = SeedStream::from_u64(seed, "attack-guess");
                let report = match target_bits {
                    Some(bits) => min_k_for_entropy(n, m, bits, trials as usize, &mut rng)?,
                    None => state_guess_success(n, m, k, trials as usize, &mut rng)?,
                };
                println!(
                    "{}",
                    serde_json::to_string_pretty(&serde_json::json!({
                        "n": report.n, "m": report.m, "k": report.k,
                        "log2_p_succ": report.log2_p_succ,
                        "min_entropy_bits": report.min_entropy_bits,
                    }))?
                );
                if let Some(path) = csv {
                    let mut out = String::from("F,p_U\n");
                    for (f, p) in report.f_grid.iter().zip(&report.p_u) {
                        out.push_str(&format!("{f},{p}\n"));
                    }
                    fs::write(path, out)?;
                }
            }
            AttackKind::Binmass => {
                let s0 = s0_from_seed(seed);
                let sigma = derive_plant_seed(&s0, 0)?;
                let prep = seed_to_plant_circuit(&sigma, n, 3);
                let config = CompilerConfig {
                    layers: n,
                    seed,
                    ..CompilerConfig::default()
                };
                let ch = compile_symmetric(&prep, &config)?;
                let u = qsa::qsim::circuit_to_matrix(&ch.public)?;
                let psi = plant_state(&prep);
                let honest = bin_mass_histogram(&u, &psi, 64)?;
                let mut rng = SeedStream::from_u64(seed, "binmass-eve");
                let eve = bin_mass_histogram(&u, &haar_state(n, &mut rng), 64)?;
                let mut out = String::from("bin,planted_mass,baseline_mass\n");
                for (b, (h, e)) in honest.iter().zip(&eve).enumerate() {
                    out.push_str(&format!("{b},{h},{e}\n"));
                }
                match csv {
                    Some(path) => fs::write(path, out)?,
                    None => print!("{out}"),
                }
            }
        },
        Command::Sweep {
            n,
            m,
            reps,
            shots,
            p2_grid,
            family,
            delta,
            layers,
            steps,
            restarts,
            plant_depth,
            seed,
            out,
        } => {
            let grid: Vec<f64> = p2_grid
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<_, _>>()?;
            let fam = match family {
                FamilyArg::Symmetric => Family::Symmetric,
                FamilyArg::Asymmetric => Family::Asymmetric,
                _ => return Err("sweep supports symmetric and asymmetric families".into()),
            };
            let config = SweepConfig {
                n,
                m,
                reps,
                shots,
                p2_grid: grid,
                plant_depth,
                family: fam,
                compiler: CompilerConfig {
                    delta_target: delta,
                    layers: layers.unwrap_or(n),
                    steps,
                    restarts,
                    seed,
                    ..CompilerConfig::default()
                },
                seed,
            };
            let rows = noise_sweep(&config)?;
            let csv = sweep_csv(&rows);
            match out {
                Some(path) => {
                    fs::write(&path, &csv)?;
                    eprintln!("wrote {}", path.display());
                }
                None => print!("{csv}"),
            }
        }
        Command::Cost {
            which,
            n,
            m,
            ram_bytes,
            ns,
            k,
            n2q,
            target,
            n_to,
        } => {
            let params = CostModelParams {
                m,
                ..CostModelParams::default()
            };
            if let Some(hi) = n_to {
                let f: fn(u32, &CostModelParams) -> f64 = match which {
                    CostKind::QuantumEve => quantum_eve_cost,
                    CostKind::ClassicalEve => classical_eve_cost,
                    _ => return Err("--n-to applies to quantum-eve and classical-eve".into()),
                };
                println!("n,seconds");
                for ni in n..=hi {
                    println!("{ni},{}", f(ni, &params));
                }
                return Ok(());
            }
            match which {
                CostKind::QuantumEve => {
                    let secs = quantum_eve_cost(n, &params);
                    println!(
                        "quantum-eve n={n}: {secs:.3e} s = {:.3e} years",
                        secs / YEAR_SECONDS
                    );
                }
                CostKind::ClassicalEve => {
                    let eve = classical_eve_cost(n, &params);
                    let honest = honest_classical_cost(n, &params);
                    println!(
                        "classical-eve n={n}: {eve:.3e} s = {:.3e} years; honest {honest:.3e} s",
                        eve / YEAR_SECONDS
                    );
                }
                CostKind::Memory => {
                    let (dense, sv) = memory_cutoffs(ram_bytes, m);
                    println!(
                        "ram={ram_bytes:.3e} bytes, m={m}: dense EVD max n = {dense}, state-vector max n = {sv}"
                    );
                }
                CostKind::Bell => {
                    println!(
                        "bell budget N_s={ns} n={n} m={m} k={k}: {}",
                        bell_budget(ns, n as u64, m as u64, k)
                    );
                }
                CostKind::Survival => {
                    println!(
                        "survival budget N_2q={n2q} target={target}: p2 <= {:.4e}",
                        survival_budget(n2q, target)
                    );
                }
            }
        }
        Command::Keygen { seed, out } => {
            let s0 = match seed {
                Some(s) => s0_from_seed(s),
                None => {
                    // entropy from the OS via file-backed randomness
                    let mut buf = [0u8; 32];
                    getrandom_fallback(&mut buf)?;
                    buf.to_vec()
                }
            };
            let encoded = hex::encode(&s0);
            match out {
                Some(path) => {
                    fs::write(&path, &encoded)?;
                    eprintln!("wrote {}", path.display());
                }
                None => println!("{encoded}"),
            }
        }
        Command::Serve {
            addr,
            s0,
            n,
            m,
            k,
            plant_depth,
            layers,
            steps,
            restarts,
            delta,
            seed,
            max_sessions,
        } => {
            let s0 = parse_s0(&s0)?;
            let config = VerifierConfig {
                n,
                m,
                k,
                plant_depth,
                schedule_id: 0,
                compiler: CompilerConfig {
                    delta_target: delta,
                    layers,
                    steps,
                    restarts,
                    seed: seed.unwrap_or(0),
                    ..CompilerConfig::default()
                },
                key_bits: 256,
                max_attempts: 1,
            };
            let listener = TcpListener::bind(&addr)?;
            eprintln!("verifier listening on {addr}");
            let mut session_seed = seed.unwrap_or(0);
            let mut served = 0usize;
            for conn in listener.incoming() {
                let mut stream = conn?;
                session_seed = session_seed.wrapping_add(1);
                let mut rng = match seed {
                    Some(_) => SeedStream::from_u64(session_seed, "serve"),
                    None => {
                        let mut ent = [0u8; 32];
                        getrandom_fallback(&mut ent)?;
                        SeedStream::new(&ent, "serve")
                    }
                };
                let outcome = verifier_session(&mut stream, &config, &s0, &mut rng)?;
                println!("{}", outcome.log_lines());
                println!(
                    "{}",
                    serde_json::json!({"event": "session_done", "accept": outcome.accepted})
                );
                served += 1;
                if max_sessions > 0 && served >= max_sessions {
                    break;
                }
            }
        }
        Command::Connect {
            addr,
            s0,
            regime,
            shots,
            p2,
            seed,
        } => {
            let s0 = parse_s0(&s0)?;
            let mut stream = TcpStream::connect(&addr)?;
            let config = ProverConfig {
                regime: regime.into(),
                eval: eval_config(shots, p2),
            };
            let mut rng = match seed {
                Some(s) => SeedStream::from_u64(s, "connect"),
                None => {
                    let mut ent = [0u8; 32];
                    getrandom_fallback(&mut ent)?;
                    SeedStream::new(&ent, "connect")
                }
            };
            let outcome = prover_session(&mut stream, &s0, &config, &mut rng)?;
            println!("{}", outcome.log_lines());
            println!(
                "{}",
                serde_json::json!({"event": "session_done", "accept": outcome.accepted})
            );
        }
    }
    Ok(())
}

/// OS entropy without an extra dependency.
fn getrandom_fallback(buf: &mut [u8]) -> std::io::Result<()> {
    use std::io::Read;
    let mut f = fs::File::open("/dev/urandom")?;
    f.read_exact(buf)
}
