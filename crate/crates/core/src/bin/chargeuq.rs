use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use chargeuq::battery::{nominal_cell, simulate_cccv, violation_check};
use chargeuq::pipeline::{
    compare_budget, export, run_campaign, run_mc_baseline, tune_protocol, violation_probability, BatteryModel,
    BudgetReport, CampaignResult, FileConfig, McBaseline,
};
use chargeuq::Result;

#[derive(Parser)]
#[command(name = "chargeuq", version, about = "Uncertainty quantification for CC-CV fast charging")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON or TOML file with [space], [protocol], [pce], [solver], [tune] sections
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Single nominal CC-CV run written as CSV
    Simulate {
        #[arg(long)]
        c_rate: Option<f64>,
        #[arg(long)]
        v_max: Option<f64>,
    },
    /// Surrogate campaign
    Campaign {
        #[command(subcommand)]
        action: RunOnly,
    },
    /// Plain Monte Carlo baseline
    Mc {
        #[command(subcommand)]
        action: McAction,
    },
    /// Total Sobol series, from a saved campaign or a fresh one
    Sobol {
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Search C-rate and voltage limit for a violation probability below epsilon
    Tune {
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Wall-clock comparison of a campaign and a Monte Carlo baseline
    Compare {
        #[arg(long)]
        campaign: Option<PathBuf>,
        #[arg(long)]
        mc: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
    },
}

#[derive(Subcommand)]
enum RunOnly {
    Run,
}

#[derive(Subcommand)]
enum McAction {
    Run {
        #[arg(long)]
        runs: Option<usize>,
    },
}

fn load(common: &Common) -> Result<FileConfig> {
    let mut cfg = match &common.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(j) = common.jobs {
        cfg.jobs = j;
    }
    Ok(cfg)
}

fn campaign(cfg: &FileConfig, dir: &Path) -> Result<CampaignResult> {
    let cc = cfg.campaign()?;
    let result = run_campaign(&cc, &BatteryModel::new(cfg.solver.clone()))?;
    let vp = violation_probability(&result, &cc.protocol).ok();
    for p in export::write_bundle(&result, vp.as_ref(), dir)? {
        println!("wrote {}", p.display());
    }
    Ok(result)
}

fn mc(cfg: &FileConfig, runs: Option<usize>, dir: &Path) -> Result<McBaseline> {
    let cc = cfg.mc_campaign()?;
    let mc = run_mc_baseline(&cc, runs.unwrap_or(cfg.mc.n_runs), &BatteryModel::new(cfg.solver.clone()))?;
    std::fs::create_dir_all(dir)?;
    for p in export::write_mc_csvs(&mc, dir)? {
        println!("wrote {}", p.display());
    }
    export::write_json(&mc, &dir.join("mc.json"))?;
    println!("{} runs in {:.2} s", mc.n_runs, mc.seconds);
    Ok(mc)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let cfg = load(&cli.common)?;
    let dir = cli.common.out_dir.as_path();
    match cli.command {
        Command::Simulate { c_rate, v_max } => {
            let mut protocol = cfg.protocol.clone();
            protocol.c_rate = c_rate.unwrap_or(protocol.c_rate);
            protocol.v_max = v_max.unwrap_or(protocol.v_max);
            let r = simulate_cccv(&nominal_cell(), &protocol, &cfg.solver)?;
            std::fs::create_dir_all(dir)?;
            let path = dir.join("simulation.csv");
            r.write_csv(std::fs::File::create(&path)?)?;
            println!(
                "switch {:?} s, end {:.1} s ({}), violations: {:?}",
                r.switch_time,
                r.end_time,
                r.termination.label(),
                violation_check(&r, &protocol)
            );
            println!("wrote {}", path.display());
        }
        Command::Campaign { action: RunOnly::Run } => {
            let r = campaign(&cfg, dir)?;
            println!("screened: {:?}; {:.2} s", r.screened, r.timing.total);
        }
        Command::Mc {
            action: McAction::Run { runs },
        } => {
            mc(&cfg, runs, dir)?;
        }
        Command::Sobol { result } => {
            let r: CampaignResult = match result {
                Some(p) => export::read_json(&p)?,
                None => run_campaign(&cfg.campaign()?, &BatteryModel::new(cfg.solver.clone()))?,
            };
            std::fs::create_dir_all(dir)?;
            println!("wrote {}", export::write_sobol_csv(&r, dir)?.display());
        }
        Command::Tune { epsilon } => {
            let cc = cfg.campaign()?;
            let eps = epsilon.unwrap_or(cfg.tune.epsilon);
            let report = tune_protocol(
                &cc.protocol,
                eps,
                &cfg.tune.grid,
                &cc,
                &BatteryModel::new(cfg.solver.clone()),
                cfg.tune.exhaustive,
            )?;
            for c in &report.candidates {
                println!(
                    "{:.2}C / {:.3} V: max P = {}, end {}",
                    c.c_rate,
                    c.v_max,
                    c.max_probability.map_or("-".into(), |p| format!("{p:.4}")),
                    c.nominal_end_time.map_or("-".into(), |t| format!("{t:.1} s")),
                );
            }
            match &report.selected_protocol {
                Some(p) => println!("selected {:.2}C / {:.3} V", p.c_rate, p.v_max),
                None => println!("no candidate below epsilon {eps}"),
            }
            std::fs::create_dir_all(dir)?;
            export::write_json(&report, &dir.join("tune.json"))?;
        }
        Command::Compare { campaign: c, mc: m, runs } => {
            let pce: CampaignResult = match c {
                Some(p) => export::read_json(&p)?,
                None => campaign(&cfg, dir)?,
            };
            let base: McBaseline = match m {
                Some(p) => export::read_json(&p)?,
                None => mc(&cfg, runs, dir)?,
            };
            let report: BudgetReport = compare_budget(&pce, &base);
            println!(
                "surrogate {:.2} s ({} runs, {} parameters) vs Monte Carlo {:.2} s ({} runs, {} parameters): ratio {:.3}",
                report.pce_seconds,
                report.pce_simulations,
                report.pce_dimension,
                report.mc_seconds,
                report.mc_simulations,
                report.mc_dimension,
                report.ratio
            );
            std::fs::create_dir_all(dir)?;
            export::write_json(&report, &dir.join("budget.json"))?;
        }
    }
    Ok(())
}
