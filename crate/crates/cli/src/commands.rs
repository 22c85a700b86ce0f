use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, Context};

use safectl::benchmark::scenario::generate_scenarios;
use safectl::benchmark::sweep::{run_batch, tradeoff_sweep, SweepGrid, SweepSpec};
use safectl::benchmark::{run_episode, PhaseReference, PhaseSlice, Scenario, ScenarioLayout};
use safectl::dynamics::RobotModel;
use safectl::io::{write_csv, write_trajectory, PhaseRow, ResultRow, ScenarioFile, SweepRow};

use crate::config::{AlgorithmChoice, Overrides, RunConfig};
use crate::{Command, Failure};

type Outcome = Result<(), Failure>;

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Usage(e.into())
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Runtime(e.into())
}

fn resolve(file: Option<&Path>, flags: Overrides) -> Result<(Overrides, RunConfig), Failure> {
    let base = match file {
        Some(path) => Overrides::from_file(path).map_err(usage)?,
        None => Overrides::default(),
    };
    let merged = base.merged(flags);
    let cfg = RunConfig::resolve(&merged).map_err(usage)?;
    Ok((merged, cfg))
}

/// Scenarios from `path`, or generated from the seed and count.
fn load_scenarios(path: Option<&Path>, given: &Overrides, cfg: &mut RunConfig) -> Result<Vec<Scenario>, Failure> {
    let Some(path) = path else {
        let layout = ScenarioLayout::for_model(&RobotModel::new(cfg.model));
        return generate_scenarios(cfg.seed, cfg.count, &layout).map_err(usage);
    };
    let reader = File::open(path)
        .with_context(|| format!("opening {}", path.display()))
        .map_err(usage)?;
    let file = ScenarioFile::read(std::io::BufReader::new(reader))
        .with_context(|| format!("reading {}", path.display()))
        .map_err(usage)?;
    match given.model {
        Some(m) if m != file.model => {
            return Err(usage(anyhow!("--model {m} does not match the {} scenario file", file.model)));
        }
        _ => cfg.model = file.model,
    }
    Ok(file.scenarios)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating {}", dir.display()))
            .map_err(runtime)?;
    }
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(runtime)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn hybrid_text(h: Option<f64>) -> String {
    h.map_or_else(|| "null".to_string(), |v| format!("{v}"))
}

pub fn dispatch(config: Option<&Path>, command: Command) -> Outcome {
    match command {
        Command::GenScenarios { settings, out } => gen_scenarios(config, settings, &out),
        Command::Run {
            settings,
            scenarios,
            out,
            trajectories,
        } => run(config, settings, scenarios.as_deref(), out.as_deref(), trajectories.as_deref()),
        Command::Sweep {
            settings,
            scenarios,
            out,
            dmin_grid,
            k_grid,
            param_grid,
        } => sweep(config, settings, scenarios.as_deref(), &out, [dmin_grid, k_grid, param_grid]),
        Command::Phase {
            settings,
            resolution,
            x_range,
            y_range,
            velocity,
            obstacle,
            goal,
            u0,
            out,
        } => {
            let slice = PhaseSlice {
                x_range: x_range.0,
                y_range: y_range.0,
                velocity: velocity.0,
                obstacle: obstacle.0,
                reference: match u0 {
                    Some(u) => PhaseReference::Constant { u: u.0 },
                    None => PhaseReference::Goal { goal: goal.0 },
                },
            };
            phase(config, settings, &resolution, &slice, out.as_deref())
        }
        Command::Compare { settings, scenarios, out } => compare(config, settings, scenarios.as_deref(), out.as_deref()),
    }
}

fn gen_scenarios(config: Option<&Path>, flags: Overrides, out: &Path) -> Outcome {
    let (_, cfg) = resolve(config, flags)?;
    let layout = ScenarioLayout::for_model(&RobotModel::new(cfg.model));
    let scenarios = generate_scenarios(cfg.seed, cfg.count, &layout).map_err(usage)?;
    let file = ScenarioFile {
        master_seed: cfg.seed,
        model: cfg.model,
        layout,
        scenarios,
    };
    file.write(create(out)?).map_err(runtime)?;
    println!(
        "wrote {} {} scenarios (seed {}) to {}",
        file.scenarios.len(),
        cfg.model,
        cfg.seed,
        out.display()
    );
    Ok(())
}

fn run(
    config: Option<&Path>,
    flags: Overrides,
    scenario_path: Option<&Path>,
    out: Option<&Path>,
    trajectories: Option<&Path>,
) -> Outcome {
    let (given, mut cfg) = resolve(config, flags)?;
    let scenarios = load_scenarios(scenario_path, &given, &mut cfg)?;
    let model = RobotModel::new(cfg.model);
    let configs: Vec<_> = cfg.algorithms.algorithms().into_iter().map(|a| cfg.controller_for(a)).collect();
    let results = run_batch(&model, &configs, &scenarios, &cfg.episode, cfg.safety_threshold).map_err(runtime)?;
    write_csv(sink(out)?, results.iter().map(|r| ResultRow::new(cfg.model, r))).map_err(runtime)?;

    if let Some(path) = trajectories {
        let mut w = create(path)?;
        for c in &configs {
            for (i, sc) in scenarios.iter().enumerate() {
                let log = run_episode(&model, c, sc, &cfg.episode).map_err(runtime)?;
                write_trajectory(&mut w, i, &log).map_err(runtime)?;
            }
        }
        w.flush().map_err(runtime)?;
    }

    let invalid: Vec<_> = results.iter().filter_map(|r| r.invalid.as_ref().map(|m| (r, m))).collect();
    for (r, msg) in &invalid {
        eprintln!("scenario {} {}: episode aborted: {msg}", r.scenario_id, r.config.algorithm);
    }
    if invalid.is_empty() {
        Ok(())
    } else {
        Err(runtime(anyhow!("{} of {} episodes were invalid", invalid.len(), results.len())))
    }
}

fn sweep(
    config: Option<&Path>,
    flags: Overrides,
    scenario_path: Option<&Path>,
    out: &Path,
    [dmin_grid, k_grid, param_grid]: [Option<Vec<f64>>; 3],
) -> Outcome {
    let (given, mut cfg) = resolve(config, flags)?;
    if param_grid.is_some() && cfg.algorithms == AlgorithmChoice::All {
        return Err(usage(anyhow!("--param-grid needs a single --alg")));
    }
    let scenarios = load_scenarios(scenario_path, &given, &mut cfg)?;
    let model = RobotModel::new(cfg.model);
    let (mut points, mut frontier, mut hybrids) = (Vec::new(), Vec::new(), Vec::new());
    for alg in cfg.algorithms.algorithms() {
        let defaults = SweepGrid::default_for(alg);
        let spec = SweepSpec {
            model: model.clone(),
            base: cfg.controller_for(alg),
            grid: SweepGrid {
                d_min: dmin_grid.clone().unwrap_or(defaults.d_min),
                k: k_grid.clone().unwrap_or(defaults.k),
                parameter: param_grid.clone().unwrap_or(defaults.parameter),
            },
            scenarios: scenarios.clone(),
            settings: cfg.episode,
            safety_threshold: cfg.safety_threshold,
        };
        spec.grid.configs(&spec.base).map_err(usage)?;
        let result = tradeoff_sweep(&spec).map_err(usage)?;
        let invalid: usize = result.points.iter().map(|p| p.invalid).sum();
        if invalid > 0 {
            eprintln!("{alg}: {invalid} episodes aborted; their grid points are excluded");
        }
        points.extend(result.points.iter().map(|p| SweepRow::new(cfg.model, p)));
        frontier.extend(result.frontier.iter().map(|p| SweepRow::new(cfg.model, p)));
        hybrids.push((alg, result.hybrid));
    }
    std::fs::create_dir_all(out)
        .with_context(|| format!("creating {}", out.display()))
        .map_err(runtime)?;
    write_csv(create(&out.join("points.csv"))?, points).map_err(runtime)?;
    write_csv(create(&out.join("frontier.csv"))?, frontier).map_err(runtime)?;
    let table = hybrid_table(cfg.model, &hybrids);
    create(&out.join("hybrid.csv"))?
        .write_all(table.as_bytes())
        .map_err(runtime)?;
    print!("{table}");
    Ok(())
}

fn hybrid_table(model: safectl::dynamics::ModelKind, rows: &[(safectl::controllers::Algorithm, Option<f64>)]) -> String {
    let mut s = String::from("algorithm,model,hybrid\n");
    for (alg, h) in rows {
        s.push_str(&format!("{alg},{model},{}\n", hybrid_text(*h)));
    }
    s
}

fn parse_resolution(s: &str) -> anyhow::Result<(usize, usize)> {
    let parse = |t: &str| t.trim().parse::<usize>().with_context(|| format!("bad resolution `{s}`"));
    match s.split_once(['x', 'X']) {
        Some((a, b)) => Ok((parse(a)?, parse(b)?)),
        None => {
            let n = parse(s)?;
            Ok((n, n))
        }
    }
}

fn phase(config: Option<&Path>, flags: Overrides, resolution: &str, slice: &PhaseSlice, out: Option<&Path>) -> Outcome {
    let (_, cfg) = resolve(config, flags)?;
    if cfg.algorithms == AlgorithmChoice::All {
        return Err(usage(anyhow!("phase needs a single --alg")));
    }
    let res = parse_resolution(resolution).map_err(usage)?;
    let cells = safectl::benchmark::phase_portrait(&cfg.controller, slice, res).map_err(usage)?;
    write_csv(sink(out)?, cells.iter().map(PhaseRow::from)).map_err(runtime)
}

fn compare(config: Option<&Path>, flags: Overrides, scenario_path: Option<&Path>, out: Option<&Path>) -> Outcome {
    let (given, mut cfg) = resolve(config, flags)?;
    let scenarios = load_scenarios(scenario_path, &given, &mut cfg)?;
    let model = RobotModel::new(cfg.model);
    let mut rows = Vec::new();
    for alg in safectl::controllers::Algorithm::ALL {
        let spec = SweepSpec {
            settings: cfg.episode,
            safety_threshold: cfg.safety_threshold,
            ..SweepSpec::new(model.clone(), alg, scenarios.clone())
        };
        let result = tradeoff_sweep(&spec).map_err(runtime)?;
        rows.push((alg, result.hybrid));
    }
    let table = hybrid_table(cfg.model, &rows);
    print!("{table}");
    if let Some(path) = out {
        create(path)?.write_all(table.as_bytes()).map_err(runtime)?;
    }
    Ok(())
}
