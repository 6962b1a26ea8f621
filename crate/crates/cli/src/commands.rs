use crate::args::{Command, Common};
use crate::config::{parse_grid, parse_time, Defaults, RunConfig};
use crate::Failure;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use surfmem::analytic::{analytic_row, compare_with_sweep, feasible_rounds, write_analytic_csv, write_comparison_csv};
use surfmem::decoder::{build_graphs, fault_distance};
use surfmem::estimator::{
    heatmap_sweep, metadata, read_sweep_csv, sweep_rounds, with_workers, write_heatmap_csv,
    write_heatmap_summary_csv, write_sweep_csv, IdleMode, SweepResult, SweepSettings,
};
use surfmem::frame::sample_shots;
use surfmem::layout::build_patch_with_order;
use surfmem::tableau::validate_circuit_determinism;
use surfmem::{build_memory_circuit, Basis, Circuit, ExperimentConfig};

type Outcome = Result<(), Failure>;

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Layout(c) => layout(&resolve(&c, "5", "z", "1")?),
        Command::EmitCircuit(c) => emit_circuit(&resolve(&c, "3", "z", "2")?),
        Command::EmitGraph(c) => emit_graph(&resolve(&c, "3", "z", "2")?),
        Command::Sweep { common, gnuplot } => sweep(&resolve(&common, "5", "all", "5:80:5")?, gnuplot),
        Command::Heatmap(c) => heatmap(&resolve(&c, "5", "all", "5:80:5")?),
        Command::Analytic {
            common,
            compare,
            cycle,
        } => analytic(&resolve(&common, "5,7,9", "all", "1")?, compare, cycle),
        Command::Validate { common, max_weight } => validate(&resolve(&common, "3", "all", "2")?, max_weight),
        Command::Sample(c) => sample(&resolve(&c, "3", "z", "2")?),
    }
}

fn resolve(common: &Common, d: &'static str, bases: &'static str, rounds: &'static str) -> Result<RunConfig, Failure> {
    Ok(RunConfig::resolve(common, &Defaults { d, bases, rounds })?)
}

fn io_fail(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Failed(format!("cannot write {}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| io_fail(path, e))
}

/// Runs `write` against the output file, or stdout when none is set.
fn emit(output: &Option<PathBuf>, write: impl FnOnce(&mut dyn Write) -> Result<(), Failure>) -> Outcome {
    match output {
        Some(path) => {
            let mut f = create(path)?;
            write(&mut f)?;
            f.flush().map_err(|e| io_fail(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush().map_err(|e| Failure::Failed(e.to_string()))
        }
    }
}

fn text(out: &mut dyn Write, s: &str) -> Outcome {
    out.write_all(s.as_bytes()).map_err(|e| Failure::Failed(e.to_string()))
}

/// `dir/name.csv` -> `dir/name<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn write_metadata(cfg: &RunConfig, command: &str, extra: serde_json::Value) -> Outcome {
    let Some(path) = &cfg.output else { return Ok(()) };
    let mut config = serde_json::to_value(cfg).map_err(|e| Failure::Failed(e.to_string()))?;
    if let (Some(obj), serde_json::Value::Object(more)) = (config.as_object_mut(), extra) {
        obj.extend(more);
    }
    let meta = metadata(command, config);
    let side = sibling(path, ".meta.json");
    let mut f = create(&side)?;
    serde_json::to_writer_pretty(&mut f, &meta).map_err(|e| io_fail(&side, e))?;
    writeln!(f).and_then(|_| f.flush()).map_err(|e| io_fail(&side, e))
}

fn single_basis(cfg: &RunConfig) -> Result<Basis, Failure> {
    match cfg.bases[..] {
        [b] => Ok(b),
        _ => Err(Failure::Usage("this command takes a single basis".into())),
    }
}

fn circuit(cfg: &RunConfig, basis: Basis) -> Result<Circuit, Failure> {
    let d = cfg.single_d()?;
    let layout = build_patch_with_order(d, cfg.cnot_order)?;
    let exp = ExperimentConfig {
        basis,
        d,
        rounds: cfg.single_rounds()?,
        noise: cfg.noise(),
        shots: cfg.shots,
        seed: cfg.seed,
    };
    exp.validate()?;
    Ok(build_memory_circuit(&exp, &layout)?)
}

fn layout(cfg: &RunConfig) -> Outcome {
    let layout = build_patch_with_order(cfg.single_d()?, cfg.cnot_order)?;
    let json = serde_json::to_string_pretty(&layout.to_json()).map_err(|e| Failure::Failed(e.to_string()))?;
    emit(&cfg.output, |out| text(out, &(json + "\n")))
}

fn emit_circuit(cfg: &RunConfig) -> Outcome {
    let c = circuit(cfg, single_basis(cfg)?)?;
    emit(&cfg.output, |out| text(out, &c.to_text()))
}

fn emit_graph(cfg: &RunConfig) -> Outcome {
    // The graphs do not depend on the memory basis.
    let c = circuit(cfg, Basis::Z)?;
    let (x, z) = build_graphs(&c)?;
    emit(&cfg.output, |out| {
        text(out, &x.to_text())?;
        text(out, &z.to_text())
    })
}

fn settings(cfg: &RunConfig) -> Result<SweepSettings, Failure> {
    let s = SweepSettings {
        d: cfg.single_d()?,
        noise: cfg.noise(),
        rounds: cfg.rounds.clone(),
        shots: cfg.shots,
        seed: cfg.seed,
        idle: IdleMode::TotalTime,
    };
    s.validate()?;
    Ok(s)
}

fn report(label: &str, r: &SweepResult) {
    let (lo, hi) = r.interval_rounds();
    let best = &r.points[r.argmin].estimate;
    eprintln!(
        "{label}argmin N = {}, optimal interval N in [{lo}, {hi}], min pL = {:.5} ± {:.5}",
        r.argmin_rounds(),
        best.pl,
        best.dpl
    );
}

fn gnuplot_script(csv: &Path) -> String {
    let name = csv.display().to_string().replace('\'', "''");
    format!(
        "set datafile separator ','\n\
         set xlabel 'stabilizer rounds N'\n\
         set ylabel 'logical failure rate p_L'\n\
         set key top center\n\
         plot '{name}' using 1:9:10 skip 1 with yerrorbars pt 7 title 'p_L', \\\n\
         \x20    '' using 1:($11 == 1 ? $9 : 1/0) skip 1 with points pt 6 ps 2 title 'optimal interval'\n"
    )
}

fn sweep(cfg: &RunConfig, gnuplot: Option<PathBuf>) -> Outcome {
    let s = settings(cfg)?;
    let result = with_workers(cfg.workers, || sweep_rounds(&s, cfg.workers))??;
    emit(&cfg.output, |out| Ok(write_sweep_csv(out, &result)?))?;
    write_metadata(cfg, "sweep", serde_json::json!({ "idle": "total" }))?;
    if let Some(path) = gnuplot {
        let csv = cfg.output.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
        let mut f = create(&path)?;
        f.write_all(gnuplot_script(&csv).as_bytes())
            .and_then(|_| f.flush())
            .map_err(|e| io_fail(&path, e))?;
    }
    report("", &result);
    Ok(())
}

fn heatmap(cfg: &RunConfig) -> Outcome {
    if cfg.grid.len() != 2 {
        return Err(Failure::Usage("heatmap needs exactly two --grid NAME=V1,V2,... axes".into()));
    }
    let a = parse_grid(&cfg.grid[0], cfg.total_time)?;
    let b = parse_grid(&cfg.grid[1], cfg.total_time)?;
    let s = settings(cfg)?;
    let cells = with_workers(cfg.workers, || heatmap_sweep(&s, (a.0, &a.1), (b.0, &b.1)))??;
    let names = (a.0, b.0);
    emit(&cfg.output, |out| Ok(write_heatmap_csv(out, names, &cells)?))?;
    match &cfg.output {
        Some(path) => {
            let side = sibling(path, "_summary.csv");
            let mut f = create(&side)?;
            write_heatmap_summary_csv(&mut f, names, &cells)?;
        }
        None => write_heatmap_summary_csv(io::stderr(), names, &cells)?,
    }
    write_metadata(cfg, "heatmap", serde_json::json!({ "idle": "total" }))
}

fn analytic(cfg: &RunConfig, compare: Option<PathBuf>, cycle: Option<String>) -> Outcome {
    let rows = cfg
        .d
        .iter()
        .map(|&d| Ok(analytic_row(&cfg.analytic_params(d)?)?))
        .collect::<Result<Vec<_>, Failure>>()?;
    let comparison = match &compare {
        None => None,
        Some(path) => {
            let file = File::open(path)
                .map_err(|e| Failure::Failed(format!("cannot read {}: {e}", path.display())))?;
            let sweep = read_sweep_csv(io::BufReader::new(file))?;
            let step = match &sweep.points[..] {
                [a, b, ..] => (b.rounds - a.rounds) as f64,
                _ => 0.0,
            };
            let params = cfg.analytic_params(cfg.single_d()?)?;
            Some(compare_with_sweep(&params, &sweep, step)?)
        }
    };
    emit(&cfg.output, |out| {
        write_analytic_csv(&mut *out, &rows)?;
        if let (None, Some(c)) = (&cfg.output, &comparison) {
            text(out, "\n")?;
            write_comparison_csv(&mut *out, &[*c])?;
        }
        Ok(())
    })?;
    if let (Some(path), Some(c)) = (&cfg.output, &comparison) {
        let side = sibling(path, "_comparison.csv");
        let mut f = create(&side)?;
        write_comparison_csv(&mut f, &[*c])?;
    }
    if let Some(cycle) = cycle {
        let t = parse_time(&cycle)?.resolve(cfg.total_time);
        eprintln!("feasible rounds in T: {}", feasible_rounds(cfg.total_time, t)?);
    }
    write_metadata(cfg, "analytic", serde_json::json!({ "k": "56/15" }))
}

fn validate(cfg: &RunConfig, max_weight: Option<usize>) -> Outcome {
    let d = cfg.single_d()?;
    let layout = build_patch_with_order(d, cfg.cnot_order)?;
    let max_weight = max_weight.unwrap_or(d);
    let mut ok = true;
    for &basis in &cfg.bases {
        let c = circuit(cfg, basis)?;
        let det = validate_circuit_determinism(&c, &layout)?;
        if det.passed() {
            println!("basis {basis}: noise-free run deterministic ({} measurements)", det.measurements);
        } else {
            ok = false;
            println!(
                "basis {basis}: noise-free run NOT deterministic ({} random measurements, {} nonzero detectors, logical ok = {})",
                det.random_measurements, det.nonzero_detectors, det.observable_ok
            );
        }
        match fault_distance(&c, max_weight) {
            Ok(Some(w)) => {
                println!("basis {basis}: fault distance = {w}");
                ok &= w >= d;
            }
            Ok(None) => println!("basis {basis}: fault distance > {max_weight}"),
            Err(e) => {
                ok = false;
                println!("basis {basis}: fault distance search failed: {e}; lower --max-weight");
            }
        }
    }
    if ok {
        println!("validation passed");
        Ok(())
    } else {
        Err(Failure::Failed("validation failed".into()))
    }
}

fn sample(cfg: &RunConfig) -> Outcome {
    let c = circuit(cfg, single_basis(cfg)?)?;
    let shots = usize::try_from(cfg.shots).map_err(|_| Failure::Usage("too many shots".into()))?;
    let batch = with_workers(cfg.workers, || sample_shots(&c, shots, cfg.seed))?;
    emit(&cfg.output, |out| {
        batch.write_packed(out).map_err(|e| Failure::Failed(e.to_string()))
    })?;
    write_metadata(cfg, "sample", serde_json::json!({ "format": "packed-v1" }))
}
