use super::config::{ExperimentConfig, Mode};
use super::output::{Cell, Table};
use super::CliError;
use crate::hilbert::{ALICE_POL, BOB_POL};
use crate::protocol::{cardinal_states, NoiseModel};
use crate::source::{basis_visibility, chsh, ChshAngles};
use crate::tomography::{teleportation_fidelity_report, Basis, FidelityMode, FidelityReport};

fn fidelity_mode(config: &ExperimentConfig, seed_offset: u64) -> FidelityMode {
    match config.mode {
        Mode::Exact => FidelityMode::Exact,
        Mode::Sampled => FidelityMode::Sampled {
            n_events: config.n_events.unwrap_or(1),
            seed: config.seed.unwrap_or(0).wrapping_add(seed_offset),
        },
    }
}

fn report(
    config: &ExperimentConfig,
    noise: &NoiseModel,
    seed_offset: u64,
) -> Result<FidelityReport, CliError> {
    teleportation_fidelity_report(
        &cardinal_states(),
        noise,
        fidelity_mode(config, seed_offset),
    )
    .map_err(|e| CliError::Config(e.to_string()))
}

/// Fidelity of the six cardinal states plus their average.
pub fn teleport_six(config: &ExperimentConfig) -> Result<Table, CliError> {
    let report = report(config, &config.noise, 0)?;
    let mut table = Table::new(vec![
        "state_label",
        "eta",
        "phase",
        "fidelity",
        "uncertainty",
    ]);
    for row in &report.rows {
        table.push(vec![
            row.label.as_str().into(),
            row.eta.into(),
            row.phase.into(),
            row.fidelity.into(),
            row.uncertainty.into(),
        ]);
    }
    table.push(vec![
        "average".into(),
        Cell::Empty,
        Cell::Empty,
        report.average.into(),
        report.average_uncertainty.into(),
    ]);
    if report.rows.iter().any(|r| r.clipped) {
        table.notes.push((
            "clipped",
            "one or more estimates were clipped to the Bloch ball".into(),
        ));
    }
    table.notes.push((
        "model_scope",
        "source white noise, path visibility and path-1 depolarizing only; other hardware imperfections are not modeled".into(),
    ));
    Ok(table)
}

/// Basis, equatorial and six-state average fidelities across the visibility
/// grid, in grid order.
pub fn sweep_visibility(config: &ExperimentConfig) -> Result<Table, CliError> {
    let mut table = Table::new(vec![
        "visibility",
        "f_basis_avg",
        "f_equatorial_avg",
        "f_six_state_avg",
    ]);
    let states = cardinal_states().len() as u64;
    for (k, &v) in config.visibility_grid.iter().enumerate() {
        let noise = NoiseModel {
            path_visibility: v,
            ..config.noise
        };
        let report = report(config, &noise, k as u64 * states)?;
        let mean = |rows: &[crate::tomography::FidelityRow]| {
            rows.iter().map(|r| r.fidelity).sum::<f64>() / rows.len() as f64
        };
        table.push(vec![
            v.into(),
            mean(&report.rows[..2]).into(),
            mean(&report.rows[2..]).into(),
            report.average.into(),
        ]);
    }
    Ok(table)
}

/// Correlation visibilities, CHSH value and density matrix of the source.
pub fn characterize_source(config: &ExperimentConfig) -> Result<Table, CliError> {
    let rho = config
        .noise
        .source()
        .map_err(|e| CliError::Config(e.to_string()))?
        .state();
    let err = |e: crate::Error| CliError::Config(e.to_string());
    let angles = ChshAngles::default();
    let bell = chsh(&rho, &angles).map_err(err)?;

    let mut table = Table::new(vec!["quantity", "value"]);
    table.push(vec![
        "visibility_hv".into(),
        basis_visibility(&rho, Basis::HV).map_err(err)?.into(),
    ]);
    table.push(vec![
        "visibility_da".into(),
        basis_visibility(&rho, Basis::DA).map_err(err)?.into(),
    ]);
    let names = ["e_a_b", "e_a_bprime", "e_aprime_b", "e_aprime_bprime"];
    for (name, e) in names.iter().zip(bell.correlations) {
        table.push(vec![(*name).into(), e.into()]);
    }
    table.push(vec!["chsh_s".into(), bell.s.into()]);
    let dim = rho.entries().nrows();
    for r in 0..dim {
        for c in 0..dim {
            let z = rho.entry(r, c);
            table.push(vec![format!("rho_re[{r}][{c}]").into(), z.re.into()]);
            table.push(vec![format!("rho_im[{r}][{c}]").into(), z.im.into()]);
        }
    }
    table.notes.push((
        "analyzer_angles_rad",
        format!(
            "a={} a'={} b={} b'={}",
            angles.a, angles.a_prime, angles.b, angles.b_prime
        ),
    ));
    table
        .notes
        .push(("rho_basis", format!("{ALICE_POL}{BOB_POL}: HH,HV,VH,VV")));
    Ok(table)
}
