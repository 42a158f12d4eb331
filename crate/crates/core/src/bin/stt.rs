use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use stt::engine::{Engine, EngineError};
use stt::gridworld::generate_world;
use stt::harness::export::{export_csv, export_ppm, report_csv, write_file};
use stt::harness::metrics::sign_test;
use stt::harness::{build_scenario, run_baseline, run_experiment, selftest, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "stt", version, about = "Simulated Tom Thumb grid-world simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random world and dump its kinds and elevation.
    Gen(Common),
    /// Run the experiment over every seed and write the CSV report.
    Run(Common),
    /// Run the pure Lévy control and compare it with the experiment.
    Baseline(Common),
    /// Dump world, trail, weights and trace of the first seed.
    Export(Common),
    /// Statistical self-checks of the samplers.
    Selftest(Common),
}

#[derive(Args)]
struct Common {
    /// `--config <file>` (flat `key = value` text), `--out <path>` (file for
    /// run and baseline, directory for gen and export), and `--key value`
    /// overrides for any config key, in any order.
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    args: Vec<String>,
}

struct Invocation {
    cfg: RunConfig,
    out: Option<PathBuf>,
}

fn pairs(args: &[String]) -> Result<Vec<(&str, &str)>, HarnessError> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .ok_or_else(|| HarnessError::Config(format!("expected --key, got {flag:?}")))?;
        let value = it
            .next()
            .ok_or_else(|| HarnessError::Config(format!("--{key} needs a value")))?;
        out.push((key, value.as_str()));
    }
    Ok(out)
}

/// Config file first, then the command-line overrides on top of it.
fn load_config(common: &Common) -> Result<Invocation, HarnessError> {
    let pairs = pairs(&common.args)?;
    let mut cfg = match pairs.iter().rev().find(|(k, _)| *k == "config") {
        Some((_, path)) => {
            let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
                path: PathBuf::from(path),
                source,
            })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    let mut out = None;
    for (key, value) in pairs {
        match key {
            "config" => {}
            "out" => out = Some(PathBuf::from(value)),
            _ => cfg.set(key, value)?,
        }
    }
    cfg.validate()?;
    Ok(Invocation { cfg, out })
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), HarnessError> {
    match out {
        Some(path) => write_file(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn out_dir(out: &Option<PathBuf>) -> Result<PathBuf, HarnessError> {
    let dir = out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir).map_err(|source| HarnessError::Io {
        path: dir.clone(),
        source,
    })?;
    Ok(dir)
}

fn gen(common: &Common) -> Result<(), HarnessError> {
    let Invocation { cfg, out } = load_config(common)?;
    let world = generate_world(cfg.size, cfg.n_mountains, cfg.world_seed)?;
    let dir = out_dir(&out)?;
    write_file(&dir.join("world.txt"), world.render_kinds().as_bytes())?;
    export_ppm(&world.elevation_pgm(), &dir.join("elevation.pgm"))?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn run(common: &Common) -> Result<(), HarnessError> {
    let Invocation { cfg, out } = load_config(common)?;
    let exp = run_experiment(&cfg)?;
    let report = &exp.report;
    eprintln!(
        "match rate {:.4} +- {:.4} over {} seeds",
        report.mean_match_rate(),
        report.std_match_rate(),
        report.runs.len()
    );
    match &out {
        Some(path) => export_csv(report, path),
        None => emit(&None, &report_csv(report)),
    }
}

fn baseline(common: &Common) -> Result<(), HarnessError> {
    let Invocation { cfg, out } = load_config(common)?;
    let stt = run_experiment(&cfg)?.report;
    let base = run_baseline(&cfg)?.report;
    let test = sign_test(&stt.match_rates(), &base.match_rates());
    eprintln!(
        "stt {:.4}, baseline {:.4}, wins {} losses {} ties {}, p = {:.3e}",
        stt.mean_match_rate(),
        base.mean_match_rate(),
        test.wins,
        test.losses,
        test.ties,
        test.p_value
    );
    match &out {
        Some(path) => export_csv(&base, path),
        None => emit(&None, &report_csv(&base)),
    }
}

fn export(common: &Common) -> Result<(), HarnessError> {
    let Invocation { cfg, out } = load_config(common)?;
    let scenario = build_scenario(&cfg)?;
    let seed = cfg.seeds[0];
    let mut engine = Engine::init_run(&scenario.world, cfg.engine_config(false)?, seed)?;
    if cfg.teaching {
        engine.teach_episode(&scenario.ground_truth)?;
    } else {
        engine.run_episode()?;
    }
    let dir = out_dir(&out)?;
    write_file(&dir.join("world.txt"), scenario.world.render_kinds().as_bytes())?;
    export_ppm(&scenario.world.elevation_pgm(), &dir.join("elevation.pgm"))?;
    export_ppm(&engine.trail().heatmap_pgm(), &dir.join("trail.pgm"))?;
    let weights_path = dir.join("weights.csv");
    let mut buf = Vec::new();
    engine
        .weights()
        .write_csv(&mut buf)
        .map_err(|e| HarnessError::Engine(EngineError::Stdp(e)))?;
    write_file(&weights_path, &buf)?;
    while !engine.is_finished() {
        engine.run_episode()?;
    }
    write_file(&dir.join("record.txt"), engine.finish().to_text().as_bytes())?;
    println!("wrote {}", dir.display());
    Ok(())
}

fn selftest_cmd(common: &Common) -> Result<bool, HarnessError> {
    let Invocation { cfg, .. } = load_config(common)?;
    let checks = selftest::run_all(cfg.seeds[0]);
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version requests are not errors; bad usage is a config error.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Gen(c) => gen(c),
        Command::Run(c) => run(c),
        Command::Baseline(c) => baseline(c),
        Command::Export(c) => export(c),
        Command::Selftest(c) => match selftest_cmd(c) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(3),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
