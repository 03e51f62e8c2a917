//! Subcommand orchestration: build axes, run the selected engines in a
//! dedicated worker pool, and hand the results to the exporters.
//!
//! Grid cells are dispatched by index and collected into position, so the
//! output is a pure function of the config; the worker count only changes
//! wall time, never bytes.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use lzs_core::darkstate::{spectrum_vs_detuning, DarkSystem};
use lzs_core::impulse::pattern_sweep;
use lzs_core::model::{linspace, rad_per_ns};
use lzs_core::schrodinger::{pattern_sweep_numeric, single_passage_check};
use lzs_core::spectral::{extract_ridges, ft_map, predict_arcs};
use lzs_core::stats::pearson;
use lzs_core::PatternGrid;

use crate::config::{EngineKind, RunConfig, SystemBlock};
use crate::error::CliError;
use crate::export;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Sweep,
    Ft,
    Darkstate,
    Lzcheck,
}

pub fn execute(task: Task, cfg: &RunConfig, out_dir: &Path, image: bool) -> Result<(), CliError> {
    fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    match task {
        Task::Sweep => sweep(cfg, out_dir, image),
        Task::Ft => ft(cfg, out_dir),
        Task::Darkstate => darkstate(cfg, out_dir),
        Task::Lzcheck => lzcheck(cfg, out_dir),
    }
}

/// Config echo embedded in every output header. The worker count is left
/// out on purpose: it cannot influence the data, and including it would
/// break byte-identity across pool sizes.
fn provenance(cfg: &RunConfig) -> Vec<String> {
    let mut lines = vec![format!("generator = lzs {}", env!("CARGO_PKG_VERSION"))];
    if let Some(sys) = &cfg.system {
        for (tls, &(e, d)) in sys.spec.tls().iter().zip(&sys.tls_mhz) {
            lines.push(format!(
                "tls = {e} {d} MHz = {:.8e} {:.8e} rad/ns",
                tls.epsilon, tls.delta
            ));
        }
        lines.push(format!(
            "slope = {} MHz per unit = {:.8e} rad/ns per unit",
            sys.slope_mhz,
            sys.spec.slope()
        ));
    }
    for line in cfg.canonical_text().lines() {
        if line.starts_with('[') || line.starts_with("tls =") || line.starts_with("slope =") {
            continue;
        }
        if line.starts_with("workers =") {
            continue;
        }
        lines.push(line.to_string());
    }
    lines
}

fn pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot build a {workers}-worker pool: {e}")))
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

fn sweep(cfg: &RunConfig, out_dir: &Path, image: bool) -> Result<(), CliError> {
    let sys = cfg.require_system()?;
    let (a_lo, a_hi) = cfg.require_amplitude()?;
    let t_axis = linspace(cfg.width_ns.0, cfg.width_ns.1, cfg.width_samples)?;
    let a_axis = linspace(a_lo, a_hi, cfg.amplitude_samples)?;
    let pool = pool(cfg.workers)?;
    let prov = provenance(cfg);

    let mut analytic: Option<PatternGrid> = None;
    let mut numeric: Option<PatternGrid> = None;
    if cfg.engine.runs_analytic() {
        let grid = pool.install(|| pattern_sweep(&sys.spec, &t_axis, &a_axis, cfg.stokes))?;
        emit_pattern(out_dir, "analytic", &grid, cfg, &prov, image)?;
        analytic = Some(grid);
    }
    if cfg.engine.runs_numeric() {
        let grid =
            pool.install(|| pattern_sweep_numeric(&sys.spec, &t_axis, &a_axis, &cfg.policy))?;
        emit_pattern(out_dir, "numeric", &grid, cfg, &prov, image)?;
        numeric = Some(grid);
    }
    if sys.spec.n_tls() == 2 {
        let arcs = predict_arcs(&sys.spec, &a_axis, cfg.reference_width_ns)?;
        let path = out_dir.join("arcs.csv");
        export::write_arcs(&path, &arcs, &prov)?;
        announce(&path);
    }
    if cfg.engine == EngineKind::Both {
        let path = out_dir.join("correlation.txt");
        let report = correlation_report(
            sys,
            analytic.as_ref().expect("both engines ran"),
            numeric.as_ref().expect("both engines ran"),
        )?;
        export::write_report(&path, &report)?;
        announce(&path);
    }
    Ok(())
}

fn emit_pattern(
    out_dir: &Path,
    tag: &str,
    grid: &PatternGrid,
    cfg: &RunConfig,
    prov: &[String],
    image: bool,
) -> Result<(), CliError> {
    let mut prov: Vec<String> = prov.to_vec();
    prov.insert(1, format!("engine = {tag}"));
    let path = out_dir.join(format!("pattern_{tag}.csv"));
    export::write_pattern(&path, grid, &prov)?;
    announce(&path);
    if image {
        let path = out_dir.join(format!("pattern_{tag}.pgm"));
        export::write_pgm(&path, grid)?;
        announce(&path);
    }
    let map = ft_map(grid, cfg.window)?;
    let path = out_dir.join(format!("ft_{tag}.csv"));
    export::write_ftmap(&path, &map, &prov)?;
    announce(&path);
    let ridges = extract_ridges(&map, cfg.ridge_threshold)?;
    let path = out_dir.join(format!("ridges_{tag}.csv"));
    export::write_ridges(&path, &ridges, &prov)?;
    announce(&path);
    Ok(())
}

/// Pearson correlation between the engines over the rows whose drive is
/// strong enough that every anticrossing sits below 0.9 of the peak; the
/// shallow rows compare a handful of barely-traversed cells and mostly
/// measure integrator transients.
fn correlation_report(
    sys: &SystemBlock,
    analytic: &PatternGrid,
    numeric: &PatternGrid,
) -> Result<Vec<String>, CliError> {
    let eps_max = sys.spec.tls().last().expect("at least one TLS").epsilon;
    let mut a_cells = Vec::new();
    let mut n_cells = Vec::new();
    let mut rows_used = 0usize;
    for (i, &a) in analytic.a_axis().iter().enumerate() {
        if eps_max < 0.9 * sys.spec.slope() * a {
            rows_used += 1;
            a_cells.extend(analytic.values().row(i).iter().copied());
            n_cells.extend(numeric.values().row(i).iter().copied());
        }
    }
    let r = pearson(&a_cells, &n_cells)?;
    Ok(vec![
        "# pearson correlation between the analytic and numeric patterns".into(),
        "# mask: rows with every anticrossing below 0.9 of the peak detuning".into(),
        format!("rows_used = {rows_used} of {}", analytic.a_axis().len()),
        format!("cells_used = {}", a_cells.len()),
        format!("pearson = {r:.8e}"),
    ])
}

fn ft(cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let input = cfg.ft_input.as_ref().ok_or_else(|| {
        CliError::Config("the ft subcommand needs [spectral] input = <pattern csv>".into())
    })?;
    let grid = export::read_pattern(&PathBuf::from(input))?;
    let mut prov = provenance(cfg);
    prov.insert(1, format!("source = {input}"));
    let map = ft_map(&grid, cfg.window)?;
    let path = out_dir.join("ft.csv");
    export::write_ftmap(&path, &map, &prov)?;
    announce(&path);
    let ridges = extract_ridges(&map, cfg.ridge_threshold)?;
    let path = out_dir.join("ridges.csv");
    export::write_ridges(&path, &ridges, &prov)?;
    announce(&path);
    Ok(())
}

fn darkstate(cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let dark = cfg.dark.as_ref().ok_or_else(|| {
        CliError::Config("the darkstate subcommand needs a [darkstate] section".into())
    })?;
    let template = DarkSystem::new(
        0.0,
        rad_per_ns(dark.coupling_mhz.0),
        rad_per_ns(dark.coupling_mhz.1),
    )?;
    let axis_mhz = linspace(dark.detuning_mhz.0, dark.detuning_mhz.1, dark.detuning_samples)?;
    let axis: Vec<f64> = axis_mhz.iter().map(|&w| rad_per_ns(w)).collect();
    let spectrum = spectrum_vs_detuning(&template, &axis)?;
    let state = template.dark_state()?;
    let mut lines = vec![
        "# dark-state spectrum over a qubit detuning sweep".into(),
        format!("# generator = lzs {}", env!("CARGO_PKG_VERSION")),
        format!(
            "# coupling = {} {} MHz = {:.8e} {:.8e} rad/ns",
            dark.coupling_mhz.0, dark.coupling_mhz.1, template.omega1, template.omega2
        ),
        format!(
            "# dark_state = {:.8e},{:.8e},{:.8e} (qubit, first TLS, second TLS)",
            state[0], state[1], state[2]
        ),
        format!("# dark_branch = {}", spectrum.dark_branch),
        "# columns: detuning_mhz,branch_lo_rad_ns,branch_dark_rad_ns,branch_hi_rad_ns".into(),
    ];
    for (j, &w) in axis_mhz.iter().enumerate() {
        lines.push(format!(
            "{w:.8e},{:.8e},{:.8e},{:.8e}",
            spectrum.branches[0][j], spectrum.branches[1][j], spectrum.branches[2][j]
        ));
    }
    let path = out_dir.join("darkstate.csv");
    export::write_report(&path, &lines)?;
    announce(&path);
    Ok(())
}

fn lzcheck(cfg: &RunConfig, out_dir: &Path) -> Result<(), CliError> {
    let mut lines = vec![
        "# single passage through one anticrossing: integrator vs exp(-2 pi delta)".into(),
        format!("# generator = lzs {}", env!("CARGO_PKG_VERSION")),
        "# columns: adiabaticity,numeric,closed_form,rel_error".into(),
    ];
    println!("{:>14} {:>14} {:>14} {:>12}", "adiabaticity", "numeric", "closed form", "rel error");
    for &ad in &cfg.adiabaticity {
        // unit sweep rate; the window covers both the coupling and the
        // sqrt(rate) extent of the crossing zone
        let nu = 1.0;
        let delta = (ad * nu).sqrt();
        let window = (20.0 * delta).max(20.0 * nu.sqrt());
        let numeric = single_passage_check(delta, nu, window)?;
        let want = (-2.0 * PI * ad).exp();
        let rel = (numeric - want).abs() / want;
        println!("{ad:>14.6} {numeric:>14.8} {want:>14.8} {rel:>12.2e}");
        lines.push(format!("{ad:.8e},{numeric:.8e},{want:.8e},{rel:.8e}"));
    }
    let path = out_dir.join("lzcheck.csv");
    export::write_report(&path, &lines)?;
    announce(&path);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo_cfg(extra: &str) -> RunConfig {
        let text = format!(
            "[system]\ntls = 200 12\ntls = 400 35\nslope = 400\n\n\
             [grid]\nwidth_ns = 30 60\nwidth_samples = 24\n\
             amplitude = 1.2 2.6\namplitude_samples = 6\n{extra}"
        );
        RunConfig::parse(&text).unwrap()
    }

    #[test]
    fn sweep_writes_patterns_transforms_and_arcs() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = demo_cfg("[engine]\nkind = analytic\n");
        execute(Task::Sweep, &cfg, dir.path(), true).unwrap();
        for name in
            ["pattern_analytic.csv", "pattern_analytic.pgm", "ft_analytic.csv", "ridges_analytic.csv", "arcs.csv"]
        {
            assert!(dir.path().join(name).exists(), "{name} missing");
        }
        assert!(!dir.path().join("correlation.txt").exists());
        let text = fs::read_to_string(dir.path().join("pattern_analytic.csv")).unwrap();
        assert!(text.contains("# engine = analytic"));
        assert!(text.contains("# stokes = on"));
        assert!(text.contains("MHz"), "headers must quote the original units");
        assert!(!text.contains("workers"), "worker count must stay out of file headers");
    }

    #[test]
    fn both_engines_add_a_correlation_summary() {
        let dir = tempfile::tempdir().unwrap();
        // a deliberately coarse numeric policy keeps this test quick
        let cfg = demo_cfg("[engine]\nkind = both\nmin_substeps = 200\ndt_scale = 0.1\n");
        execute(Task::Sweep, &cfg, dir.path(), false).unwrap();
        let text = fs::read_to_string(dir.path().join("correlation.txt")).unwrap();
        assert!(text.contains("pearson = "), "{text}");
        assert!(dir.path().join("pattern_numeric.csv").exists());
        assert!(!dir.path().join("pattern_analytic.pgm").exists());
    }

    #[test]
    fn ft_task_consumes_a_sweep_pattern() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = demo_cfg("");
        execute(Task::Sweep, &cfg, dir.path(), false).unwrap();
        let pattern = dir.path().join("pattern_analytic.csv");
        let text = format!("[spectral]\ninput = {}\n", pattern.display());
        let ft_cfg = RunConfig::parse(&text).unwrap();
        execute(Task::Ft, &ft_cfg, dir.path(), false).unwrap();
        assert!(dir.path().join("ft.csv").exists());
        assert!(dir.path().join("ridges.csv").exists());
        let err = execute(Task::Ft, &RunConfig::parse("").unwrap(), dir.path(), false).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn darkstate_task_reports_a_flat_zero_branch() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::parse(
            "[darkstate]\ncoupling = 40 25\ndetuning_mhz = -50 50\ndetuning_samples = 21\n",
        )
        .unwrap();
        execute(Task::Darkstate, &cfg, dir.path(), false).unwrap();
        let text = fs::read_to_string(dir.path().join("darkstate.csv")).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows.len(), 21);
        for row in rows {
            let dark: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
            assert_eq!(dark, 0.0);
        }
        let err =
            execute(Task::Darkstate, &RunConfig::parse("").unwrap(), dir.path(), false).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn lzcheck_task_tabulates_the_transition_probability() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::parse("[lzcheck]\nadiabaticity = 0.1\n").unwrap();
        execute(Task::Lzcheck, &cfg, dir.path(), false).unwrap();
        let text = fs::read_to_string(dir.path().join("lzcheck.csv")).unwrap();
        let row = text.lines().find(|l| !l.starts_with('#')).unwrap();
        let cells: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert!((cells[0] - 0.1).abs() < 1e-12);
        assert!((cells[1] - cells[2]).abs() / cells[2] < 0.02, "{cells:?}");
    }
}
