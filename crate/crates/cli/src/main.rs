//! Command-line front end: validate scenarios, run individual pipeline
//! stages or execute a full assembly simulation.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use assembly_cli::{
    load_config_overrides, load_graph, load_reconfig_actions, load_scenario, output,
    validate_scenario, CliError,
};
use assembly_core::assignment::{assign, select_root_module, to_root_frame};
use assembly_core::config::Config;
use assembly_core::layout::unfold;
use assembly_core::scheduler::{insert_helper_actions, parallelize_reconfiguration, plan_assembly};
use assembly_core::sim::run_scenario;

#[derive(Parser)]
#[command(
    name = "assembly",
    about = "Plan and simulate parallel self-assembly of mobile modular robots",
    version
)]
struct Cli {
    /// TOML file with `[motion]` / `[sim]` parameter overrides; takes
    /// precedence over scenario-embedded overrides.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file: topology, unfoldability, spacing, config.
    Validate { scenario: PathBuf },
    /// Unfold the target topology and print the goal poses as JSON.
    Unfold {
        scenario: PathBuf,
        /// Also write layout.json and layout.svg here.
        #[arg(short, long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Select the physical root and print the optimal role mapping as JSON.
    Assign { scenario: PathBuf },
    /// Print the wave-parallel assembly schedule (helpers assigned) as JSON.
    Plan { scenario: PathBuf },
    /// Execute the scenario in the simulator and write all run artifacts.
    Run {
        scenario: PathBuf,
        #[arg(short, long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Parallelize a sequential reconfiguration action list.
    Reconfig {
        /// Initial configuration graph (JSON).
        init: PathBuf,
        /// Goal configuration graph (JSON).
        goal: PathBuf,
        /// Action list with the goal-to-module mapping (JSON).
        actions: PathBuf,
        #[arg(short, long, value_name = "DIR")]
        out: PathBuf,
    },
}

fn effective_config(base: Config, cli: &Cli) -> Result<Config, CliError> {
    let mut config = base;
    if let Some(path) = &cli.config {
        load_config_overrides(path)?.apply_to(&mut config);
    }
    config
        .validate()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(config)
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Validate { scenario } => {
            let (scenario, config) = load_scenario(scenario)?;
            let config = effective_config(config, cli)?;
            validate_scenario(&scenario, &config)?;
            println!(
                "ok: {} modules, {} helpers",
                scenario.modules.len(),
                scenario.helpers.len()
            );
            Ok(())
        }
        Command::Unfold { scenario, out } => {
            let (scenario, config) = load_scenario(scenario)?;
            let config = effective_config(config, cli)?;
            validate_scenario(&scenario, &config)?;
            let layout =
                unfold(&scenario.target).map_err(|e| CliError::Validation(e.to_string()))?;
            let json = output::to_json(layout.poses())?;
            if let Some(dir) = out {
                std::fs::create_dir_all(dir).map_err(|e| {
                    CliError::Runtime(format!("cannot create {}: {e}", dir.display()))
                })?;
                std::fs::write(dir.join("layout.json"), &json)
                    .map_err(|e| CliError::Runtime(e.to_string()))?;
                std::fs::write(
                    dir.join("layout.svg"),
                    assembly_cli::svg::render_layout(&layout),
                )
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            }
            println!("{json}");
            Ok(())
        }
        Command::Assign { scenario } => {
            let (scenario, config) = load_scenario(scenario)?;
            let config = effective_config(config, cli)?;
            validate_scenario(&scenario, &config)?;
            let layout =
                unfold(&scenario.target).map_err(|e| CliError::Validation(e.to_string()))?;
            let modules = scenario.assembly_module_set();
            let root =
                select_root_module(&modules).map_err(|e| CliError::Validation(e.to_string()))?;
            let in_root =
                to_root_frame(&modules, root).map_err(|e| CliError::Validation(e.to_string()))?;
            let mapping = assign(&layout, &in_root, (layout.root(), root))
                .map_err(|e| CliError::Validation(e.to_string()))?;
            println!("{}", output::to_json(&mapping)?);
            Ok(())
        }
        Command::Plan { scenario } => {
            let (scenario, config) = load_scenario(scenario)?;
            let config = effective_config(config, cli)?;
            validate_scenario(&scenario, &config)?;
            let layout =
                unfold(&scenario.target).map_err(|e| CliError::Validation(e.to_string()))?;
            let modules = scenario.assembly_module_set();
            let root =
                select_root_module(&modules).map_err(|e| CliError::Validation(e.to_string()))?;
            let in_root =
                to_root_frame(&modules, root).map_err(|e| CliError::Validation(e.to_string()))?;
            let mapping = assign(&layout, &in_root, (layout.root(), root))
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let schedule = plan_assembly(&scenario.target, &mapping)
                .and_then(|s| insert_helper_actions(&s, &scenario.helpers))
                .map_err(|e| CliError::Validation(e.to_string()))?;
            println!("{}", output::to_json(&schedule)?);
            Ok(())
        }
        Command::Run { scenario, out } => {
            let (scenario, config) = load_scenario(scenario)?;
            let config = effective_config(config, cli)?;
            let result = run_scenario(&scenario, &config)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            output::emit_outputs(&scenario, &result, out)?;
            println!(
                "{}: makespan {:.1} s, total travel {:.2} m, artifacts in {}",
                if result.success { "success" } else { "FAILED" },
                result.metrics.makespan_s,
                result.metrics.total_distance_m,
                out.display()
            );
            match &result.failure {
                None => Ok(()),
                Some(reason) => Err(CliError::Runtime(reason.clone())),
            }
        }
        Command::Reconfig {
            init,
            goal,
            actions,
            out,
        } => {
            let g_init = load_graph(init)?;
            let g_goal = load_graph(goal)?;
            let (mapping, pairs) = load_reconfig_actions(actions)?;
            let schedule = parallelize_reconfiguration(&g_init, &g_goal, &mapping, &pairs)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            std::fs::create_dir_all(out)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out.display())))?;
            let json = output::to_json(&schedule)?;
            std::fs::write(out.join("schedule.json"), &json)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            println!("{json}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
