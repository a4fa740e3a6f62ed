//! Command-line workbench for the beam-splitting decoherence model:
//! atomic mass-ratio surveys, internal-potential curves, wavepacket
//! scenarios with recorder coupling, and the one-shot reproduction suite.

mod config;
mod output;

use clap::{Parser, Subcommand, ValueEnum};
use config::{Outputs, ScenarioConfig};
use output::{resolve, write_json, write_record_charts, write_text, CliError};
use serde_json::json;
use sgdl_core::atom::{adiabatic_survey, standard_isotopes, AdiabaticBounds, PhysicalConstants};
use sgdl_core::dynamics::scenarios::{
    erasure_scenario, pointer_sieve, scenario_a_params, scenario_b_params, sg_scenario,
    standard_candidates, standard_sieve_setup, SgParams,
};
use sgdl_core::dynamics::EnvironmentMode;
use sgdl_core::potential::{conformance_check, scaling_exponent, PotentialMethod, RadialPotential};
use sgdl_core::report::{erasure_to_csv, run_record_to_csv, svg_line_chart};
use sgdl_core::suite::{reproduce, standard_conformance_grid, SuiteOptions, Tolerances};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "sgdl",
    version,
    about = "Beam-splitting decoherence workbench: mass ratios, internal potentials, wavepacket scenarios"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    A,
    B,
}

#[derive(Subcommand)]
enum Command {
    /// Survey mass ratios of the standard isotope table against the
    /// separation windows
    Adiabatic {
        /// Write the survey rows as JSON
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Tabulate the internal-environment potential over a separation range
    Potential {
        /// Electron count (must fill closed shells)
        #[arg(long)]
        z: u32,
        #[arg(long, default_value_t = 0.05)]
        omega_min: f64,
        #[arg(long, default_value_t = 5.0)]
        omega_max: f64,
        #[arg(long, default_value_t = 64)]
        points: usize,
        /// Orbital length scale
        #[arg(long, default_value_t = 1.0)]
        a_mu: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Quadrature)]
        method: MethodArg,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Compare the closed-form potential against the quadrature route
    Conformance {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u32, 10, 28])]
        z: Vec<u32>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Fit the potential's charge-scaling exponent
    Scaling {
        #[arg(long, value_delimiter = ',', default_values_t = vec![2u32, 10, 28])]
        z: Vec<u32>,
        #[arg(long, default_value_t = 0.1)]
        omega_probe: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run a beam-splitting scenario and record its diagnostics
    Sg {
        /// a: recorder off, packets split cleanly; b: recorder driven to
        /// keep which-path records
        #[arg(long, value_enum, default_value_t = ScenarioArg::A)]
        scenario: ScenarioArg,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
        /// Base path; one chart per diagnostic series is written next to it
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Transverse-spin discriminator for a scenario
    Erasure {
        #[arg(long, value_enum, default_value_t = ScenarioArg::A)]
        scenario: ScenarioArg,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Rank the standard candidate packets by entropy production
    Sieve {
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run every published check and write one summary
    Reproduce {
        /// Skip a group of items; only "dynamics" is recognized
        #[arg(long)]
        skip: Vec<String>,
        /// JSON file overriding individual thresholds
        #[arg(long)]
        tolerances: Option<PathBuf>,
        /// Summary path (default reproduce_summary.json in the output dir)
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Execute a JSON scenario config
    Run { config: PathBuf },
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!(
                "{}",
                serde_json::to_string(&e).unwrap_or_else(|_| format!("{e:?}"))
            );
            std::process::exit(2);
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32, CliError> {
    match cmd {
        Command::Adiabatic { json } => cmd_adiabatic(json.as_deref()),
        Command::Potential {
            z,
            omega_min,
            omega_max,
            points,
            a_mu,
            method,
            csv,
            json,
            svg,
        } => cmd_potential(
            z,
            omega_min,
            omega_max,
            points,
            a_mu,
            method,
            &Outputs {
                csv_path: csv,
                json_path: json,
                svg_path: svg,
            },
        ),
        Command::Conformance { z, json } => cmd_conformance(&z, json.as_deref()),
        Command::Scaling {
            z,
            omega_probe,
            json,
        } => cmd_scaling(&z, omega_probe, json.as_deref()),
        Command::Sg {
            scenario,
            csv,
            json,
            svg,
        } => cmd_sg(
            &preset(scenario),
            scenario_label(scenario),
            &Outputs {
                csv_path: csv,
                json_path: json,
                svg_path: svg,
            },
            sgdl_core::suite::DEFAULT_SEED,
        ),
        Command::Erasure {
            scenario,
            csv,
            json,
        } => cmd_erasure(
            &preset(scenario),
            scenario_label(scenario),
            &Outputs {
                csv_path: csv,
                json_path: json,
                svg_path: None,
            },
        ),
        Command::Sieve { json } => cmd_sieve(json.as_deref()),
        Command::Reproduce {
            skip,
            tolerances,
            json,
        } => cmd_reproduce(&skip, tolerances.as_deref(), json.as_deref()),
        Command::Run { config } => cmd_run(&config),
    }
}

fn preset(s: ScenarioArg) -> SgParams {
    match s {
        ScenarioArg::A => scenario_a_params(),
        ScenarioArg::B => scenario_b_params(),
    }
}

fn scenario_label(s: ScenarioArg) -> &'static str {
    match s {
        ScenarioArg::A => "a",
        ScenarioArg::B => "b",
    }
}

fn cmd_adiabatic(json: Option<&Path>) -> Result<i32, CliError> {
    let bounds = AdiabaticBounds::default();
    let rows = adiabatic_survey(&standard_isotopes(), &PhysicalConstants::default(), &bounds)
        .map_err(|e| CliError::from_core("atom", "adiabatic", e))?;
    for r in &rows {
        let status = if r.within_bounds {
            "ok".to_string()
        } else {
            format!("VIOLATES {}", r.violations.join("; "))
        };
        println!(
            "{:8} kappa1={:.4e} kappa2={:.4e} kappa3={:.4e} correction={:.4e} {status}",
            r.atom.name,
            r.report.kappa1,
            r.report.kappa2,
            r.report.kappa3,
            r.report.correction_norm
        );
    }
    let ok = rows.iter().filter(|r| r.within_bounds).count();
    println!("within bounds: {ok} of {}", rows.len());
    if let Some(path) = json {
        let p = write_json(
            "adiabatic",
            path,
            &json!({ "bounds": bounds, "rows": rows }),
        )?;
        println!("wrote {}", p.display());
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_potential(
    z: u32,
    omega_min: f64,
    omega_max: f64,
    points: usize,
    a_mu: f64,
    method: MethodArg,
    outputs: &Outputs,
) -> Result<i32, CliError> {
    let method = match method {
        MethodArg::ClosedForm => PotentialMethod::ClosedForm,
        MethodArg::Quadrature => PotentialMethod::Quadrature,
    };
    let table = RadialPotential::tabulate(method, z, a_mu, omega_min, omega_max, points)
        .map_err(|e| CliError::from_core("potential", "potential", e))?;
    let first = table.samples.first().expect("tabulate returns points");
    let last = table.samples.last().expect("tabulate returns points");
    println!(
        "z={z} method={method} points={points} omega in [{omega_min}, {omega_max}]: V({:.4}) = {:.6e}, V({:.4}) = {:.6e}",
        first.omega, first.value, last.omega, last.value
    );
    if let Some(path) = &outputs.csv_path {
        let mut csv = String::from("omega,value\n");
        for s in &table.samples {
            csv.push_str(&format!("{},{}\n", s.omega, s.value));
        }
        let p = write_text("potential", path, &csv)?;
        println!("wrote {}", p.display());
    }
    if let Some(path) = &outputs.json_path {
        let p = write_json("potential", path, &table)?;
        println!("wrote {}", p.display());
    }
    if let Some(path) = &outputs.svg_path {
        let xs: Vec<f64> = table.samples.iter().map(|s| s.omega).collect();
        let ys: Vec<f64> = table.samples.iter().map(|s| s.value).collect();
        let svg = svg_line_chart(
            &format!("potential z={z} ({method})"),
            "omega",
            "V",
            &xs,
            &ys,
        )
        .map_err(|e| CliError::from_core("report", "potential", e))?;
        let p = write_text("potential", path, &svg)?;
        println!("wrote {}", p.display());
    }
    Ok(0)
}

fn cmd_conformance(zs: &[u32], json: Option<&Path>) -> Result<i32, CliError> {
    let grid = standard_conformance_grid();
    let mut reports = Vec::new();
    for &z in zs {
        let report = conformance_check(z, 1.0, &grid)
            .map_err(|e| CliError::from_core("potential", "conformance", e))?;
        println!(
            "z={z}: ratio_mean={:.12} rel_std={:.3e} structural_match={} exact_match={}",
            report.ratio_mean, report.ratio_rel_std, report.structural_match, report.exact_match
        );
        reports.push(report);
    }
    if let Some(path) = json {
        let p = write_json("conformance", path, &reports)?;
        println!("wrote {}", p.display());
    }
    Ok(0)
}

fn cmd_scaling(zs: &[u32], omega_probe: f64, json: Option<&Path>) -> Result<i32, CliError> {
    let report = scaling_exponent(zs, omega_probe, 1.0)
        .map_err(|e| CliError::from_core("potential", "scaling", e))?;
    println!(
        "fitted exponent {:.6} at omega={omega_probe} (fit residual {:.3e})",
        report.exponent, report.fit_residual
    );
    if let Some(path) = json {
        let p = write_json("scaling", path, &report)?;
        println!("wrote {}", p.display());
    }
    Ok(0)
}

fn cmd_sg(params: &SgParams, label: &str, outputs: &Outputs, seed: u64) -> Result<i32, CliError> {
    let (report, _) = sg_scenario(params).map_err(|e| CliError::from_core("dynamics", "sg", e))?;
    let s = report.summary;
    println!("scenario {label}: {} samples", report.record.len());
    println!(
        "  spin entropy {:.6}  separation {:.4} ({:.2} widths)  record_overlap {:.6}",
        s.final_spin_entropy, s.packet_separation, s.separation_in_widths, s.record_overlap
    );
    println!(
        "  cm_purity {:.6}  offdiag {:.6}  recorder ground fidelity {:.10}",
        s.cm_purity, s.offdiag_norm, s.r_ground_fidelity
    );
    if let Some(path) = &outputs.csv_path {
        let p = write_text("sg", path, &run_record_to_csv(&report.record))?;
        println!("wrote {}", p.display());
    }
    if let Some(path) = &outputs.json_path {
        let artifact = json!({
            "scenario": label,
            "seed": seed,
            "params": params,
            "summary": s,
            "record": report.record,
        });
        let p = write_json("sg", path, &artifact)?;
        println!("wrote {}", p.display());
    }
    if let Some(path) = &outputs.svg_path {
        for p in write_record_charts("sg", path, &report.record)? {
            println!("wrote {}", p.display());
        }
    }
    Ok(0)
}

fn cmd_erasure(params: &SgParams, label: &str, outputs: &Outputs) -> Result<i32, CliError> {
    let report =
        erasure_scenario(params).map_err(|e| CliError::from_core("dynamics", "erasure", e))?;
    println!(
        "scenario {label}: p_plus={:.8} visibility={:.6} conditioned purity={:.6}",
        report.p_plus, report.visibility_conditioned, report.cm_purity_conditioned
    );
    if let Some(path) = &outputs.csv_path {
        let p = write_text("erasure", path, &erasure_to_csv(&report))?;
        println!("wrote {}", p.display());
    }
    if let Some(path) = &outputs.json_path {
        let p = write_json(
            "erasure",
            path,
            &json!({ "scenario": label, "report": report }),
        )?;
        println!("wrote {}", p.display());
    }
    Ok(0)
}

fn cmd_sieve(json: Option<&Path>) -> Result<i32, CliError> {
    let (grid, env) = standard_sieve_setup();
    let candidates = standard_candidates(&grid);
    let report = pointer_sieve(&candidates, &grid, &env, 1.0)
        .map_err(|e| CliError::from_core("dynamics", "sieve", e))?;
    for e in &report.entries {
        println!(
            "{:12} linear entropy production {:.6}",
            e.label, e.linear_entropy_production
        );
    }
    println!(
        "spread {:.3e}{}",
        report.spread,
        if report.tied { " (tied)" } else { "" }
    );
    if let Some(path) = json {
        let p = write_json("sieve", path, &report)?;
        println!("wrote {}", p.display());
    }
    Ok(0)
}

fn cmd_reproduce(
    skip: &[String],
    tolerances: Option<&Path>,
    json: Option<&Path>,
) -> Result<i32, CliError> {
    let mut opts = SuiteOptions::default();
    for s in skip {
        if s == "dynamics" {
            opts.skip_dynamics = true;
        } else {
            return Err(CliError::new(
                "suite",
                "reproduce",
                "invalid_input",
                format!("unknown skip group '{s}', only 'dynamics' is recognized"),
            ));
        }
    }
    if let Some(path) = tolerances {
        let full = resolve(path);
        let text =
            std::fs::read_to_string(&full).map_err(|e| CliError::io("reproduce", &full, e))?;
        opts.tolerances = serde_json::from_str::<Tolerances>(&text).map_err(|e| {
            CliError::new(
                "suite",
                "reproduce",
                "config_parse",
                format!("tolerance file {}: {e}", full.display()),
            )
        })?;
    }
    let summary = reproduce(&opts);
    for item in &summary.items {
        println!(
            "{}: {}",
            item.name,
            if item.passed { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "overall: {}",
        if summary.all_passed { "PASS" } else { "FAIL" }
    );

    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    // The timestamp stays outside `summary` so the deterministic part of
    // the artifact is byte-stable across reruns.
    let artifact = json!({ "timestamp_unix_s": timestamp, "summary": summary });
    let default_path = PathBuf::from("reproduce_summary.json");
    let path = json.unwrap_or(&default_path);
    let p = write_json("reproduce", path, &artifact)?;
    println!("wrote {}", p.display());
    Ok(if summary.all_passed { 0 } else { 1 })
}

fn env_is_active(params: &SgParams) -> bool {
    !matches!(params.hamiltonian.environment.mode, EnvironmentMode::None)
}

fn cmd_run(config_path: &Path) -> Result<i32, CliError> {
    let text =
        std::fs::read_to_string(config_path).map_err(|e| CliError::io("run", config_path, e))?;
    let cfg = ScenarioConfig::parse(&text)
        .map_err(|detail| CliError::new("config", "run", "config_parse", detail))?;

    let mut sg_params = scenario_a_params();
    if let Some(grid) = &cfg.grid {
        sg_params.grid = *grid;
    }
    if let Some(ham) = &cfg.hamiltonian {
        sg_params.hamiltonian = ham.clone();
    }
    // A one-nucleon atom has no internal coordinates; pairing it with an
    // active internal environment is a contradiction, not a simulation.
    if let Some(atom) = &cfg.atom {
        if atom.mass_number == 1
            && matches!(cfg.name.as_str(), "sg" | "erasure" | "sieve")
            && env_is_active(&sg_params)
        {
            return Err(CliError::new(
                "dynamics",
                "run",
                "no_relative_system",
                format!(
                    "atom {} has a single nucleon and cannot carry the recorder environment",
                    atom.name
                ),
            ));
        }
    }

    match cfg.name.as_str() {
        "adiabatic" => cmd_adiabatic(cfg.outputs.json_path.as_deref()),
        "potential" => {
            let z = cfg.atom.as_ref().map(|a| a.electron_count).unwrap_or(2);
            cmd_potential(z, 0.05, 5.0, 64, 1.0, MethodArg::Quadrature, &cfg.outputs)
        }
        "conformance" => cmd_conformance(&[2, 10, 28], cfg.outputs.json_path.as_deref()),
        "scaling" => cmd_scaling(&[2, 10, 28], 0.1, cfg.outputs.json_path.as_deref()),
        "sg" => cmd_sg(&sg_params, &cfg.name, &cfg.outputs, cfg.seed),
        "erasure" => cmd_erasure(&sg_params, &cfg.name, &cfg.outputs),
        "sieve" => cmd_sieve(cfg.outputs.json_path.as_deref()),
        other => Err(CliError::new(
            "config",
            "run",
            "unknown_scenario",
            format!("scenario '{other}' is not one of adiabatic, potential, conformance, scaling, sg, erasure, sieve"),
        )),
    }
}
