//! Experiment files, presets and command entry points.
//!
//! An experiment is a small TOML document mirroring [`GapToothConfig`]
//! plus study lists and an output directory.  The subcommand functions
//! take a parsed [`ExperimentFile`], write CSV artefacts into the chosen
//! directory and print a human-readable report to the supplied sink, so
//! tests can capture both.  All floating-point output is fixed at 17
//! significant digits; reruns of the same experiment diff cleanly.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coupling::{fitted_decay_rate, run, FourierMode, GapToothConfig};
use crate::microsim::{PdeChoice, ToothGeometry};
use crate::spectra::{
    convergence_study_with_threads, micro_resolution_study_with_threads, spectrum_with_threads,
    SpectrumReport,
};
use crate::stencil::{deriv_weights, interp_weights, Side, TbcFamily, TbcSpec};
use crate::{Error, Result};

/// Declarative description of one experiment.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub geometry: GeometrySection,
    #[serde(default)]
    pub pde: PdeSection,
    pub tbc: TbcSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub initial_condition: Vec<ModeSection>,
    #[serde(default)]
    pub study: StudySection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub teeth: usize,
    pub micro_points: usize,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_length: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PdeSection {
    #[serde(default)]
    pub kind: PdeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum PdeKind {
    #[default]
    Diffusion,
    Burgers,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TbcSection {
    pub family: FamilyKind,
    pub order: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Dirichlet,
    Mixed,
    TwoPoint,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_stride: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModeSection {
    pub mode: i32,
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub teeth_list: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub micro_points_list: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

pub const PRESET_NAMES: [&str; 7] = [
    "table1", "table2", "table3", "table4", "table5", "fig1", "fig6",
];

/// The TOML text of a built-in experiment.
pub fn preset_toml(name: &str) -> Result<&'static str> {
    match name {
        "table1" => Ok(include_str!("../../presets/table1.toml")),
        "table2" => Ok(include_str!("../../presets/table2.toml")),
        "table3" => Ok(include_str!("../../presets/table3.toml")),
        "table4" => Ok(include_str!("../../presets/table4.toml")),
        "table5" => Ok(include_str!("../../presets/table5.toml")),
        "fig1" => Ok(include_str!("../../presets/fig1.toml")),
        "fig6" => Ok(include_str!("../../presets/fig6.toml")),
        other => Err(Error::config(
            "preset",
            format!(
                "unknown preset '{other}'; available: {}",
                PRESET_NAMES.join(" ")
            ),
        )),
    }
}

/// Loads an experiment from `--config` or `--preset`, then applies the
/// dotted-path overrides and the `--dt` shorthand in order.
pub fn load_experiment(
    config: Option<&Path>,
    preset: Option<&str>,
    overrides: &[String],
    dt: Option<f64>,
) -> Result<ExperimentFile> {
    let text = match (config, preset) {
        (Some(path), None) => fs::read_to_string(path).map_err(|err| {
            Error::config("config", format!("cannot read {}: {err}", path.display()))
        })?,
        (None, Some(name)) => preset_toml(name)?.to_string(),
        (None, None) => {
            return Err(Error::config(
                "config",
                "pass --config PATH or --preset NAME",
            ))
        }
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "config",
                "--config and --preset are mutually exclusive",
            ))
        }
    };
    load_experiment_str(&text, overrides, dt)
}

/// Parses experiment TOML with overrides applied; the entry point behind
/// [`load_experiment`], split out for tests.
pub fn load_experiment_str(
    text: &str,
    overrides: &[String],
    dt: Option<f64>,
) -> Result<ExperimentFile> {
    let table: toml::Table = text
        .parse()
        .map_err(|err: toml::de::Error| Error::Parse(err.to_string()))?;
    let mut value = toml::Value::Table(table);
    for item in overrides {
        apply_override(&mut value, item)?;
    }
    if let Some(dt) = dt {
        apply_override(&mut value, &format!("time.dt={dt:e}"))?;
    }
    value
        .try_into()
        .map_err(|err: toml::de::Error| Error::Parse(err.to_string()))
}

fn apply_override(root: &mut toml::Value, item: &str) -> Result<()> {
    let (path, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::config("override", format!("expected key=value, got '{item}'")))?;
    let mut segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::config(
            "override",
            format!("'{path}' is not a dotted key path"),
        ));
    }
    let last = segments.pop().expect("split always yields one segment");
    let parsed = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut table) => table.remove("v").expect("parsed the key just written"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut node = root;
    for segment in segments {
        let table = node.as_table_mut().ok_or_else(|| {
            Error::config("override", format!("'{path}' does not address a table"))
        })?;
        node = table
            .entry(segment.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    let table = node
        .as_table_mut()
        .ok_or_else(|| Error::config("override", format!("'{path}' does not address a table")))?;
    table.insert(last.to_string(), parsed);
    Ok(())
}

fn reject_param(field: &str, value: Option<f64>, family: &str) -> Result<()> {
    if value.is_some() {
        return Err(Error::config(
            field,
            format!("not used by the {family} family"),
        ));
    }
    Ok(())
}

impl TbcSection {
    fn to_family(&self) -> Result<TbcFamily> {
        match self.family {
            FamilyKind::Dirichlet => {
                reject_param("tbc.a", self.a, "dirichlet")?;
                reject_param("tbc.b", self.b, "dirichlet")?;
                reject_param("tbc.beta", self.beta, "dirichlet")?;
                Ok(TbcFamily::Dirichlet)
            }
            FamilyKind::Mixed => {
                reject_param("tbc.beta", self.beta, "mixed")?;
                let a = self
                    .a
                    .ok_or_else(|| Error::config("tbc.a", "the mixed family needs a"))?;
                let b = self
                    .b
                    .ok_or_else(|| Error::config("tbc.b", "the mixed family needs b"))?;
                Ok(TbcFamily::Mixed { a, b })
            }
            FamilyKind::TwoPoint => {
                reject_param("tbc.a", self.a, "two_point")?;
                reject_param("tbc.b", self.b, "two_point")?;
                let beta = self
                    .beta
                    .ok_or_else(|| Error::config("tbc.beta", "the two_point family needs beta"))?;
                Ok(TbcFamily::TwoPoint { beta })
            }
        }
    }
}

impl ExperimentFile {
    /// Validates the file and assembles the runnable configuration.
    pub fn to_config(&self) -> Result<GapToothConfig> {
        let geom = match self.geometry.domain_length {
            Some(length) => ToothGeometry::with_domain_length(
                self.geometry.teeth,
                self.geometry.micro_points,
                self.geometry.ratio,
                length,
            )?,
            None => ToothGeometry::new(
                self.geometry.teeth,
                self.geometry.micro_points,
                self.geometry.ratio,
            )?,
        };
        let pde = match self.pde.kind {
            PdeKind::Diffusion => {
                if self.pde.nu.is_some() {
                    return Err(Error::config(
                        "pde.nu",
                        "diffusion has unit diffusivity; nu configures burgers",
                    ));
                }
                PdeChoice::Diffusion
            }
            PdeKind::Burgers => PdeChoice::Burgers {
                nu: self.pde.nu.unwrap_or(1.0),
            },
        };
        let config = GapToothConfig {
            geom,
            pde,
            tbc: TbcSpec {
                family: self.tbc.to_family()?,
                order: self.tbc.order,
            },
            dt: self.time.dt,
            t_end: self.time.t_end.unwrap_or(1.0),
            initial_condition: self
                .initial_condition
                .iter()
                .map(|mode| FourierMode {
                    k: mode.mode,
                    amp: mode.amplitude,
                    phase: mode.phase,
                })
                .collect(),
        };
        config.validate()?;
        Ok(config)
    }
}

fn pde_label(pde: &PdeChoice) -> String {
    match pde {
        PdeChoice::Diffusion => "diffusion".into(),
        PdeChoice::Burgers { nu } => format!("burgers(nu={nu})"),
    }
}

fn family_label(family: &TbcFamily) -> String {
    match family {
        TbcFamily::Dirichlet => "dirichlet".into(),
        TbcFamily::Mixed { a, b } => format!("mixed(a={a}, b={b})"),
        TbcFamily::TwoPoint { beta } => format!("two_point(beta={beta})"),
    }
}

fn experiment_label(config: &GapToothConfig) -> String {
    format!(
        "{}, {} edges, order {}, teeth {}, micro points {}, ratio {}",
        pde_label(&config.pde),
        family_label(&config.tbc.family),
        config.tbc.order,
        config.geom.teeth(),
        config.geom.micro_points(),
        config.geom.ratio()
    )
}

fn cell(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.6}"))
}

fn csv_cell(value: Option<f64>) -> String {
    value.map_or_else(String::new, |v| format!("{v:.16e}"))
}

fn table_row(report: &SpectrumReport) -> String {
    let groups = &report.groups;
    let mark = if report.wrap_degenerate {
        "  [wrap-degenerate]"
    } else {
        ""
    };
    format!(
        "m={:>3}  mode1 {:+.3e}  pair23 {}  pair45 {}  pair67 {}  internal {:.4e}{}",
        report.config.geom.teeth(),
        groups.mode1,
        cell(groups.pair23),
        cell(groups.pair45),
        cell(groups.pair67),
        groups.leading_internal,
        mark
    )
}

fn write_artifact(
    dir: Option<&Path>,
    name: &str,
    content: &str,
    sink: &mut dyn Write,
) -> Result<()> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        fs::write(&path, content)?;
        writeln!(sink, "wrote {}", path.display())?;
    }
    Ok(())
}

/// What [`cmd_simulate`] measured, for callers that want numbers rather
/// than the printed report.
#[derive(Clone, Copy, Debug)]
pub struct SimulateSummary {
    pub dt: f64,
    pub steps: u64,
    pub snapshots: usize,
    pub max_abs_initial: f64,
    pub max_abs_final: f64,
    pub fitted_decay: Option<f64>,
}

/// Runs the scheme to `t_end` and writes `snapshots.csv` with rows
/// `(t, j, i, x, v)`; the report carries max|v| at both ends and the
/// decay rate fitted over the second half of the run.
pub fn cmd_simulate(
    file: &ExperimentFile,
    out: Option<&Path>,
    sink: &mut dyn Write,
) -> Result<SimulateSummary> {
    let config = file.to_config()?;
    let dt = config.simulation_dt();
    let steps = (config.t_end / dt).ceil() as u64;
    let stride = file
        .time
        .snapshot_stride
        .unwrap_or_else(|| ((steps / 256).max(1)) as usize);
    let traj = run(&config, stride)?;
    let summary = SimulateSummary {
        dt,
        steps,
        snapshots: traj.snapshots.len(),
        max_abs_initial: traj.max_abs(0),
        max_abs_final: traj.max_abs(traj.snapshots.len() - 1),
        fitted_decay: fitted_decay_rate(&traj, config.t_end / 2.0, config.t_end),
    };
    writeln!(sink, "simulate: {}", experiment_label(&config))?;
    writeln!(sink, "dt {:.16e}", summary.dt)?;
    writeln!(sink, "steps {}", summary.steps)?;
    writeln!(sink, "snapshots {}", summary.snapshots)?;
    writeln!(sink, "max_abs_initial {:.16e}", summary.max_abs_initial)?;
    writeln!(sink, "max_abs_final {:.16e}", summary.max_abs_final)?;
    match summary.fitted_decay {
        Some(rate) => writeln!(sink, "fitted_decay {rate:.16e}")?,
        None => writeln!(sink, "fitted_decay n/a")?,
    }
    let mut csv = String::from("t,j,i,x,v\n");
    for (t, j, i, x, v) in traj.rows() {
        csv.push_str(&format!("{t:.16e},{j},{i},{x:.16e},{v:.16e}\n"));
    }
    write_artifact(out, "snapshots.csv", &csv, sink)?;
    Ok(summary)
}

/// Growth rates for the configured teeth count, or one report row per
/// entry of `study.teeth_list`; writes `spectrum.csv`.
pub fn cmd_spectrum(
    file: &ExperimentFile,
    out: Option<&Path>,
    threads: usize,
    sink: &mut dyn Write,
) -> Result<()> {
    let base = file.to_config()?;
    let m_list = file
        .study
        .teeth_list
        .clone()
        .unwrap_or_else(|| vec![base.geom.teeth()]);
    writeln!(sink, "spectrum: {}", experiment_label(&base))?;
    let mut csv = String::from("teeth,index,growth_rate_re,growth_rate_im,unreliable\n");
    for &m in &m_list {
        let config = base.with_teeth(m)?;
        let report = spectrum_with_threads(&config, threads)?;
        writeln!(sink, "{}", table_row(&report))?;
        for (idx, rate) in report.growth_rates.iter().enumerate() {
            let flag = u8::from(report.unreliable.contains(&idx));
            csv.push_str(&format!(
                "{m},{idx},{:.16e},{:.16e},{flag}\n",
                rate.re, rate.im
            ));
        }
    }
    write_artifact(out, "spectrum.csv", &csv, sink)
}

/// Macro-refinement study over `study.teeth_list`; writes
/// `convergence.csv` with per-wavenumber errors and observed orders.
pub fn cmd_convergence(
    file: &ExperimentFile,
    out: Option<&Path>,
    threads: usize,
    sink: &mut dyn Write,
) -> Result<()> {
    let base = file.to_config()?;
    let m_list = file.study.teeth_list.clone().ok_or_else(|| {
        Error::config(
            "study.teeth_list",
            "the convergence command needs a teeth list",
        )
    })?;
    let study = convergence_study_with_threads(&base, &m_list, threads)?;
    writeln!(sink, "convergence: {}", experiment_label(&base))?;
    let mut csv = String::from(
        "teeth,mode1,pair23,pair45,pair67,leading_internal,\
         err_k1,err_k2,err_k3,order_k1,order_k2,order_k3\n",
    );
    for row in &study.rows {
        let groups = &row.groups;
        let order_text =
            row.observed_orders[0].map_or_else(|| "n/a".to_string(), |order| format!("{order:.2}"));
        let err_text = row.errors[0].map_or_else(|| "n/a".to_string(), |err| format!("{err:.3e}"));
        writeln!(
            sink,
            "m={:>3}  pair23 {}  err_k1 {}  order_k1 {}",
            row.m,
            cell(groups.pair23),
            err_text,
            order_text
        )?;
        csv.push_str(&format!(
            "{},{:.16e},{},{},{},{:.16e},{},{},{},{},{},{}\n",
            row.m,
            groups.mode1,
            csv_cell(groups.pair23),
            csv_cell(groups.pair45),
            csv_cell(groups.pair67),
            groups.leading_internal,
            csv_cell(row.errors[0]),
            csv_cell(row.errors[1]),
            csv_cell(row.errors[2]),
            csv_cell(row.observed_orders[0]),
            csv_cell(row.observed_orders[1]),
            csv_cell(row.observed_orders[2]),
        ));
    }
    write_artifact(out, "convergence.csv", &csv, sink)
}

/// Micro-refinement study over `study.micro_points_list`; writes
/// `resolution.csv` and reports the pair23 Richardson ratio and drift.
pub fn cmd_resolution(
    file: &ExperimentFile,
    out: Option<&Path>,
    threads: usize,
    sink: &mut dyn Write,
) -> Result<()> {
    let base = file.to_config()?;
    let n_list = file.study.micro_points_list.clone().ok_or_else(|| {
        Error::config(
            "study.micro_points_list",
            "the resolution command needs a micro point list",
        )
    })?;
    let study = micro_resolution_study_with_threads(&base, &n_list, threads)?;
    writeln!(sink, "resolution: {}", experiment_label(&base))?;
    let mut csv = String::from("micro_points,dt,mode1,pair23,pair45,pair67,leading_internal\n");
    for row in &study.rows {
        let groups = &row.groups;
        writeln!(
            sink,
            "n={:>3}  dt {:.3e}  pair23 {}  pair45 {}  pair67 {}",
            row.n,
            row.dt,
            cell(groups.pair23),
            cell(groups.pair45),
            cell(groups.pair67),
        )?;
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{},{},{},{:.16e}\n",
            row.n,
            row.dt,
            groups.mode1,
            csv_cell(groups.pair23),
            csv_cell(groups.pair45),
            csv_cell(groups.pair67),
            groups.leading_internal,
        ));
    }
    match study.richardson_ratio_pair23 {
        Some(ratio) => writeln!(sink, "richardson_pair23 {ratio:.3}")?,
        None => writeln!(sink, "richardson_pair23 n/a")?,
    }
    match study.max_rel_variation_pair23 {
        Some(drift) => writeln!(sink, "max_rel_variation_pair23 {drift:.3e}")?,
        None => writeln!(sink, "max_rel_variation_pair23 n/a")?,
    }
    write_artifact(out, "resolution.csv", &csv, sink)
}

/// Which stencil table [`cmd_stencil_dump`] prints.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DumpKind {
    Value,
    Derivative,
}

#[derive(Clone, Copy, Debug)]
pub struct StencilDumpArgs {
    pub r: f64,
    pub order: usize,
    pub kind: DumpKind,
    pub side: Side,
}

/// Prints the macro-grid weights of the edge value, or of `H` times the
/// edge derivative, over the offsets `-p ..= p`.
pub fn cmd_stencil_dump(
    args: &StencilDumpArgs,
    out: Option<&Path>,
    sink: &mut dyn Write,
) -> Result<()> {
    if !matches!(args.order, 2 | 4 | 6 | 8) {
        return Err(Error::config(
            "order",
            format!(
                "interpolation order must be 2, 4, 6 or 8, got {}",
                args.order
            ),
        ));
    }
    let p = args.order / 2;
    let (weights, kind_text) = match args.kind {
        DumpKind::Value => (interp_weights(args.r, p, args.side)?, "value"),
        DumpKind::Derivative => (
            deriv_weights(args.r, p, args.side)?,
            "derivative (weights of H d/dx)",
        ),
    };
    let side_text = match args.side {
        Side::Left => "left",
        Side::Right => "right",
    };
    writeln!(
        sink,
        "stencil: kind={kind_text} order={} r={} side={side_text}",
        args.order, args.r
    )?;
    let mut csv = String::from("offset,weight\n");
    for (offset, weight) in weights.iter() {
        let line = format!("{offset},{weight:.16e}");
        writeln!(sink, "{line}")?;
        csv.push_str(&line);
        csv.push('\n');
    }
    write_artifact(out, "stencil.csv", &csv, sink)
}
