use std::path::{Path, PathBuf};

use eitfiber::bpm::{self, Absorber, BpmGrid, BpmSolver, IndexMap, PropagationSettings};
use eitfiber::config::{units, ConfigError, Launch, Scenario};
use eitfiber::consistency;
use eitfiber::dressed::{self, ControlField, DressedMode};
use eitfiber::fiber::{self, Geometry, ModeSolution};
use eitfiber::groupvel;
use eitfiber::medium::SPEED_OF_LIGHT;
use eitfiber::output::{self, OutputError, Provenance, ResultTable};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Io(#[from] OutputError),
    #[error("{0} consistency check(s) failed")]
    ChecksFailed(usize),
    #[error("scenario {name}: {source}")]
    Scenario { name: String, source: Box<CliError> },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::ChecksFailed(_) => 1,
            Self::Usage(_) => 2,
            Self::Config(_) => 3,
            Self::Numerical(_) => 4,
            Self::Io(_) => 5,
            Self::Scenario { source, .. } => source.exit_code(),
        }
    }

    pub fn in_scenario(self, name: &str) -> Self {
        Self::Scenario { name: name.to_string(), source: Box::new(self) }
    }
}

fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

pub struct Output {
    pub dir: PathBuf,
    pub gnuplot: bool,
    pub timestamp: bool,
}

impl Output {
    fn table<S: Into<String>>(&self, scenario: &Scenario, columns: impl IntoIterator<Item = S>) -> ResultTable {
        ResultTable::new(columns).with_provenance(Provenance::for_scenario(scenario, self.timestamp))
    }

    fn write(&self, table: &ResultTable, name: &str, x: &str, y: &[&str]) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        table.write(&path)?;
        if self.gnuplot {
            if let Some(script) = output::gnuplot_script(name, table, x, y) {
                output::write_atomic(&path.with_extension("gp"), script.as_bytes())?;
            }
        }
        println!("wrote {}", path.display());
        Ok(path)
    }
}

fn detuning(scenario: &Scenario, value: Option<&str>) -> Result<f64, CliError> {
    match value {
        Some(s) => Ok(units::rate("--delta", s, scenario.conventions.frequency, Some(scenario.gamma()))?),
        None => Ok(scenario.scan.operating_detuning),
    }
}

fn control(scenario: &Scenario) -> Result<ControlField, CliError> {
    scenario.control_field().map_err(numerical)
}

fn dressed_mode(scenario: &Scenario, control: &ControlField, delta: f64) -> Result<DressedMode, CliError> {
    dressed::self_consistent_mode(
        &scenario.fiber,
        &scenario.medium,
        control,
        scenario.omega0(),
        delta,
        &scenario.dressed_settings(),
    )
    .map_err(numerical)
}

pub fn mode(scenario: &Scenario, delta: Option<&str>, out: &Output) -> Result<(), CliError> {
    let delta = detuning(scenario, delta)?;
    let fiber = &scenario.fiber;
    let n_bg = scenario.medium.background_index();
    let cutoff = fiber::require_single_mode(fiber, n_bg, scenario.probe_wavelength, scenario.conventions.zeta_c)
        .map_err(numerical)?;
    let bare = fiber::solve_mode(
        fiber,
        n_bg,
        scenario.probe_wavelength,
        scenario.conventions.geometry,
        scenario.conventions.tail,
    )
    .map_err(numerical)?;
    let control = control(scenario)?;
    let dressed = dressed_mode(scenario, &control, delta)?;
    let gamma = scenario.gamma();

    println!("single-mode cutoff wavelength  {cutoff:.6e} m");
    println!("bare beta/k0                   {:.9}", bare.effective_index());
    println!(
        "bare outside fraction          {:.6}",
        scenario.reported_b(bare.energy_fraction_outside_numeric().map_err(numerical)?)
    );
    println!("delta/gamma                    {:.6e}", delta / gamma);
    println!("dressed n_bar                  {:.9} {:+.6e}i", dressed.n_bar.re, dressed.n_bar.im);
    println!("dressed beta/k0                {:.9}", dressed.beta * SPEED_OF_LIGHT / dressed.omega);
    println!("dressed outside fraction       {:.6}", scenario.reported_b(dressed.b_outside));
    println!("control G(a)/G(0)              {:.6}", control.rabi_at_wall() / control.rabi_center);
    println!("iterations                     {}", dressed.iterations);

    let mut table = out.table(
        scenario,
        ["r_m", "bare_field", "dressed_field", "control_rabi_over_gamma", "re_n_medium", "im_n_medium"],
    );
    let r_max = fiber.radius + 6.0 / dressed.profile.phi.min(bare.phi);
    let count = 401;
    for i in 0..count {
        let r = r_max * i as f64 / (count - 1) as f64;
        let (re, im) = if r <= fiber.radius {
            (fiber.n_fiber, 0.0)
        } else {
            let n = scenario.medium.index(control.rabi(r), delta).map_err(numerical)?;
            (n.re, n.im)
        };
        table.push(vec![r, bare.shape(r), dressed.profile.shape(r), control.rabi(r) / gamma, re, im])?;
    }
    out.write(&table, "mode.csv", "r_m", &["bare_field", "dressed_field"])?;
    Ok(())
}

fn scan_table(scenario: &Scenario, out: &Output, result: &dressed::ScanResult) -> Result<ResultTable, CliError> {
    let mut table =
        out.table(scenario, ["delta_over_gamma", "beta_over_k0", "re_nbar", "im_nbar", "b_outside", "iterations"]);
    for p in &result.points {
        let row = match &p.result {
            Ok(m) => vec![
                m.delta / result.gamma,
                m.beta * SPEED_OF_LIGHT / m.omega,
                m.n_bar.re,
                m.n_bar.im,
                scenario.reported_b(m.b_outside),
                m.iterations as f64,
            ],
            Err(_) => vec![p.delta / result.gamma, f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN],
        };
        table.push(row)?;
    }
    let failed: Vec<String> = result
        .points
        .iter()
        .filter_map(|p| p.result.as_ref().err().map(|e| format!("delta/gamma={:e}: {e}", p.delta / result.gamma)))
        .collect();
    if failed.len() == result.points.len() {
        return Err(CliError::Numerical(format!("every scan point failed; first: {}", failed[0])));
    }
    for f in failed {
        table.note(format!("failed {f}"));
    }
    Ok(table)
}

pub fn scan(scenario: &Scenario, out: &Output) -> Result<(), CliError> {
    let control = control(scenario)?;
    let deltas = scenario.detunings();
    let settings = scenario.dressed_settings();
    let omega0 = scenario.omega0();
    for (ctl, name) in [(control, "scan.csv"), (control.off(), "scan_no_control.csv")] {
        let result = dressed::dispersion_scan(&scenario.fiber, &scenario.medium, &ctl, omega0, &deltas, &settings);
        let table = scan_table(scenario, out, &result)?;
        out.write(&table, name, "delta_over_gamma", &["beta_over_k0", "im_nbar"])?;
        if result.failures() > 0 {
            eprintln!("warning: {} of {} points in {name} failed", result.failures(), deltas.len());
        }
    }
    Ok(())
}

pub fn vg(scenario: &Scenario, length: Option<&str>, delta: Option<&str>, out: &Output) -> Result<(), CliError> {
    let delta = detuning(scenario, delta)?;
    let length = match length {
        Some(s) => units::length("--length", s)?,
        None => scenario.group_velocity_length,
    };
    if length.is_nan() || length <= 0.0 {
        return Err(ConfigError::invalid("--length", "must be positive").into());
    }
    let control = control(scenario)?;
    let r = groupvel::group_velocity_report(
        &scenario.fiber,
        &scenario.medium,
        &control,
        scenario.omega0(),
        delta,
        scenario.solver.stencil,
        &scenario.dressed_settings(),
        length,
    )
    .map_err(numerical)?;
    let n = &r.numeric;
    println!("delta/gamma                 {:.6e}", delta / scenario.gamma());
    println!("group velocity              {:.6e} m/s", n.v_g);
    println!("delay over {:.3e} m        {:.6e} s", length, r.delay);
    println!("dbeta/domega                {:.6e} s/m", n.dbeta_domega);
    println!("Richardson v_g              {:.6e} m/s", n.v_g_refined);
    println!("truncation error (rel)      {:.3e}", n.truncation_error);
    if n.anomalous {
        println!("note: anomalous dispersion (dbeta/domega < 0)");
    }
    match &r.analytic {
        Ok(v) => println!(
            "analytic v_g                {v:.6e} m/s{}",
            if r.analytic_preconditions_met { "" } else { " (outside its derivation range)" }
        ),
        Err(e) => println!("analytic v_g                unavailable: {e}"),
    }
    println!("bulk v_g at G(a)            {:.6e} m/s{}", r.bulk.v_g, if r.bulk.stopped { " (stopped)" } else { "" });
    println!("fiber/bulk ratio            {:.6}", n.v_g / r.bulk.v_g);
    let t = &r.terms;
    println!(
        "terms: phase {:.3e}  fraction {:.3e}  material {:.3e}  profile {:.3e}",
        t.phase, t.fraction, t.material, t.profile
    );

    let mut table = out.table(
        scenario,
        [
            "delta_over_gamma",
            "v_g_m_per_s",
            "delay_s",
            "length_m",
            "v_g_refined_m_per_s",
            "truncation_error",
            "v_g_analytic_m_per_s",
            "v_g_bulk_m_per_s",
            "term_phase_s_per_m",
            "term_fraction_s_per_m",
            "term_material_s_per_m",
            "term_profile_s_per_m",
            "re_nbar",
            "im_nbar",
            "b_outside",
        ],
    );
    table.push(vec![
        delta / scenario.gamma(),
        n.v_g,
        r.delay,
        length,
        n.v_g_refined,
        n.truncation_error,
        *r.analytic.as_ref().unwrap_or(&f64::NAN),
        r.bulk.v_g,
        t.phase,
        t.fraction,
        t.material,
        t.profile,
        r.n_bar.re,
        r.n_bar.im,
        scenario.reported_b(r.b_outside),
    ])?;
    out.write(&table, "vg.csv", "delta_over_gamma", &["v_g_m_per_s"])?;
    Ok(())
}

/// Index map of the dressed fiber cross-section on the propagation grid.
pub fn dressed_index_map(
    scenario: &Scenario,
    grid: &BpmGrid,
    control: &ControlField,
    delta: f64,
) -> Result<IndexMap, CliError> {
    for &x in &grid.x {
        if x.abs() > scenario.fiber.radius {
            scenario.medium.index(control.rabi(x.abs()), delta).map_err(numerical)?;
        }
    }
    let medium = scenario.medium;
    Ok(IndexMap::fiber(grid, &scenario.fiber, |r| medium.index(control.rabi(r), delta).expect("checked above")))
}

pub fn bpm(scenario: &Scenario, length: Option<&str>, delta: Option<&str>, out: &Output) -> Result<(), CliError> {
    let delta = detuning(scenario, delta)?;
    let spec = &scenario.bpm;
    let length = match length {
        Some(s) => units::length("--length", s)?,
        None => spec.length,
    };
    if length.is_nan() || length <= 0.0 {
        return Err(ConfigError::invalid("--length", "must be positive").into());
    }
    let grid = BpmGrid::for_fiber(
        scenario.fiber.radius,
        spec.cells_per_radius,
        spec.num_x,
        scenario.probe_wavelength,
        spec.dz,
    )
    .map_err(numerical)?;
    let control = control(scenario)?;
    let dressed = dressed_mode(scenario, &control, delta)?;
    let slab: ModeSolution = fiber::solve_mode(
        &scenario.fiber,
        dressed.n_bar.re,
        scenario.probe_wavelength,
        Geometry::Planar,
        scenario.conventions.tail,
    )
    .map_err(numerical)?;
    let index = dressed_index_map(scenario, &grid, &control, delta)?;
    let mut field = match spec.launch {
        Launch::Gaussian => bpm::init_gaussian(&grid, spec.launch_fwhm.unwrap_or(2.0 * scenario.fiber.radius)),
        Launch::Mode => bpm::init_profile(&grid, |x| slab.field(x)),
    };
    let steps = (length / grid.dz).round().max(1.0) as usize;
    let settings = PropagationSettings {
        length,
        record_every: spec.record_every,
        snapshot_every: (spec.snapshots > 0).then(|| (steps / spec.snapshots).max(1)),
        fit_fraction: spec.fit_fraction,
        renormalize: true,
        fixed_reference: None,
    };
    let mut solver = BpmSolver::new(
        grid.clone(),
        spec.propagator,
        Absorber { fraction: spec.absorber_fraction, ..Absorber::default() },
    );
    let record = solver.propagate(&mut field, &index, &settings).map_err(numerical)?;

    let mut reference: Vec<f64> = grid.x.iter().map(|&x| slab.field(x).abs()).collect();
    let norm = (reference.iter().map(|v| v * v).sum::<f64>() * grid.dx).sqrt();
    reference.iter_mut().for_each(|v| *v /= norm);
    let l2 = bpm::l2_distance(&grid, &record.settled_profile, &reference);
    println!("steps                        {}", record.steps);
    println!("dx, dz                       {:.4e} m, {:.4e} m", grid.dx, grid.dz);
    println!("beta/k0 (propagation)        {:.9}", record.beta / grid.k0());
    println!("beta/k0 (slab at Re n_bar)   {:.9}", slab.beta / grid.k0());
    println!("attenuation rate             {:.6e} 1/m", record.attenuation_rate);
    println!("settled vs dressed L2        {l2:.4e}");

    let mut evolution = out.table(scenario, ["z_m", "energy", "attenuation", "n_bar", "axis_phase_rad"]);
    for s in &record.samples {
        evolution.push(vec![s.z, s.energy, s.attenuation, s.n_bar, s.axis_phase])?;
    }
    out.write(&evolution, "bpm_evolution.csv", "z_m", &["n_bar"])?;

    let mut columns =
        vec!["x_m".to_string(), "re_n".into(), "im_n".into(), "settled_profile".into(), "dressed_profile".into()];
    columns.extend(record.snapshots.iter().enumerate().map(|(i, _)| format!("profile_{i}")));
    let mut profiles = out.table(scenario, columns);
    for (i, s) in record.snapshots.iter().enumerate() {
        profiles.note(format!("profile_{i}: z = {:e} m", s.z));
    }
    let snapshot_norms: Vec<f64> = record.snapshots.iter().map(|s| grid.energy(&s.field).sqrt()).collect();
    for (j, &x) in grid.x.iter().enumerate() {
        let mut row = vec![x, index.n[j].re, index.n[j].im, record.settled_profile[j], reference[j]];
        row.extend(record.snapshots.iter().zip(&snapshot_norms).map(|(s, e)| s.field[j].norm() / e));
        profiles.push(row)?;
    }
    out.write(&profiles, "bpm_profiles.csv", "x_m", &["settled_profile", "dressed_profile"])?;
    Ok(())
}

pub fn check(dir: &Path) -> Result<(), CliError> {
    let checks = consistency::run().map_err(numerical)?;
    let mut table = ResultTable::new(["check", "value", "reference", "pass"]);
    let mut failed = 0;
    for (i, c) in checks.iter().enumerate() {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("{status}  {:<44} {:>14.6e}  (reference {:.6e}, {})", c.name, c.value, c.reference, c.tolerance);
        table.note(format!("check {i}: {} ({})", c.name, c.tolerance));
        table.push(vec![i as f64, c.value, c.reference, if c.pass { 1.0 } else { 0.0 }])?;
        failed += usize::from(!c.pass);
    }
    table.write(&dir.join("check.csv"))?;
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
