//! Subcommand runners. Each writes its files into the output directory and
//! returns their paths.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use polaron_core::experiments::{
    convergence_study, fwhm_with, integrated_pl, linewidth_probe, sweep_detuning, Channel,
    FwhmOptions, IplMode, PLCurve,
};
use polaron_core::phonon::{BathFunctions, PhononRates};
use polaron_core::{DriveKind, ModelVariant, SystemParams};

use crate::config::{ChannelChoice, RunConfig};
use crate::output::{num, svg_plot, Series, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Rates,
    Sweep,
    Fwhm,
    Ipl,
    Convergence,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rates => "rates",
            Self::Sweep => "sweep",
            Self::Fwhm => "fwhm",
            Self::Ipl => "ipl",
            Self::Convergence => "convergence",
        }
    }
}

pub fn run_subcommand(cmd: Subcommand, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = Writer {
        cfg,
        out,
        cmd,
        files: Vec::new(),
    };
    match cmd {
        Subcommand::Rates => rates(&mut w)?,
        Subcommand::Sweep => sweep(&mut w)?,
        Subcommand::Fwhm => fwhm(&mut w)?,
        Subcommand::Ipl => ipl(&mut w)?,
        Subcommand::Convergence => convergence(&mut w)?,
    }
    Ok(w.files)
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    out: &'a Path,
    cmd: Subcommand,
    files: Vec<PathBuf>,
}

impl Writer<'_> {
    fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        let p = self.out.join(name);
        t.write(&p, self.cfg, self.cmd.name())
            .with_context(|| format!("writing {}", p.display()))?;
        self.files.push(p);
        Ok(())
    }

    fn plot(&mut self, name: &str, title: &str, curve: &PLCurve) -> Result<()> {
        if !self.cfg.run.plot {
            return Ok(());
        }
        let c = if self.cfg.run.normalize {
            curve.normalized()
        } else {
            curve.clone()
        };
        let svg = svg_plot(
            title,
            &c.detuning,
            &[
                Series { label: "i_x", color: "#1f5fbf", y: &c.i_x },
                Series { label: "i_c", color: "#c0392b", y: &c.i_c },
            ],
            self.cfg.run.log_y,
        );
        let p = self.out.join(name);
        fs::write(&p, svg).with_context(|| format!("writing {}", p.display()))?;
        self.files.push(p);
        Ok(())
    }
}

fn grid(cfg: &RunConfig) -> Vec<f64> {
    cfg.run.grid.points(cfg.system.delta_cx)
}

fn probe(cfg: &RunConfig) -> (Channel, f64) {
    let (auto_ch, auto_center) = linewidth_probe(&cfg.system);
    let ch = match cfg.run.channel {
        ChannelChoice::Auto => auto_ch,
        ChannelChoice::Exciton => Channel::Exciton,
        ChannelChoice::Cavity => Channel::Cavity,
    };
    (ch, cfg.run.center.unwrap_or(auto_center))
}

fn pumps(cfg: &RunConfig) -> Vec<f64> {
    if cfg.run.pumps.is_empty() {
        vec![cfg.system.drive_amplitude()]
    } else {
        cfg.run.pumps.clone()
    }
}

fn fwhm_options(cfg: &RunConfig) -> FwhmOptions {
    FwhmOptions {
        search_half_width: cfg.run.search_half_width,
        window_multiple: cfg.run.window_multiple,
        window_half_width: None,
    }
}

fn sweep_at(cfg: &RunConfig, p: &SystemParams) -> Result<PLCurve> {
    Ok(sweep_detuning(p, &cfg.bath, cfg.variant, &grid(cfg))?)
}

fn curve_title(cfg: &RunConfig, p: &SystemParams) -> String {
    format!(
        "{} drive, {} model, eta = {} ueV, T = {} K",
        p.drive,
        cfg.variant,
        p.drive_amplitude(),
        cfg.bath.temperature
    )
}

/// Phonon rates and Stark shifts against a detuning Δ that is used as Δ_xL
/// for the exciton-drive channels and as Δ_cx for the feeding channels.
fn rates(w: &mut Writer) -> Result<()> {
    let cfg = w.cfg;
    // Rates follow from the bath alone; the no-phonon variant would zero them.
    let variant = match cfg.variant {
        ModelVariant::NoPhonon => ModelVariant::Epme,
        v => v,
    };
    let funcs = BathFunctions::shared(&cfg.bath, variant)?;
    let mut t = Table::new(&[
        "detuning_ueV",
        "gamma_sig_minus",
        "gamma_sig_plus",
        "gamma_feed",
        "gamma_defeed",
        "delta_sig_minus",
        "delta_sig_plus",
        "delta_feed",
        "delta_defeed",
    ]);
    let eta_x = match cfg.system.drive {
        DriveKind::Exciton => cfg.system.eta_x,
        DriveKind::Cavity => 0.0,
    };
    for d in grid(cfg) {
        let p = SystemParams {
            delta_xl: d,
            delta_cx: d,
            eta_x,
            eta_c: 0.0,
            drive: DriveKind::Exciton,
            ..cfg.system
        };
        let r = PhononRates::compute(&p, &funcs).with_context(|| format!("rates at {d} ueV"))?;
        t.push(vec![
            num(d),
            num(r.gamma_sig_minus),
            num(r.gamma_sig_plus),
            num(r.gamma_feed),
            num(r.gamma_defeed),
            num(r.delta_sig_minus),
            num(r.delta_sig_plus),
            num(r.delta_feed),
            num(r.delta_defeed),
        ]);
    }
    w.table("rates.csv", &t)
}

fn curve_table(c: &PLCurve) -> Table {
    let mut t = Table::new(&["detuning_ueV", "i_x", "i_c"]);
    for i in 0..c.detuning.len() {
        t.push(vec![num(c.detuning[i]), num(c.i_x[i]), num(c.i_c[i])]);
    }
    t
}

fn sweep(w: &mut Writer) -> Result<()> {
    let cfg = w.cfg;
    let c = sweep_at(cfg, &cfg.system)?;
    w.table("sweep.csv", &curve_table(&c))?;
    w.plot("sweep.svg", &curve_title(cfg, &cfg.system), &c)
}

fn fwhm(w: &mut Writer) -> Result<()> {
    let cfg = w.cfg;
    let (ch, center) = probe(cfg);
    let mut t = Table::new(&["pump_ueV", "channel", "center_ueV", "fwhm_ueV", "residual"]);
    t.meta("fwhm.center_guess", center);
    for eta in pumps(cfg) {
        let p = cfg.system.with_drive_amplitude(eta);
        let c = sweep_at(cfg, &p)?;
        w.plot(&format!("sweep_eta_{eta}.svg"), &curve_title(cfg, &p), &c)?;
        let r = fwhm_with(&c, ch, center, fwhm_options(cfg))
            .with_context(|| format!("linewidth fit at pump {eta} ueV"))?;
        t.push(vec![num(eta), ch.label().into(), num(r.center), num(r.fwhm), num(r.fit_residual)]);
    }
    w.table("fwhm.csv", &t)
}

fn ipl(w: &mut Writer) -> Result<()> {
    let cfg = w.cfg;
    let (ch, center) = probe(cfg);
    let g = grid(cfg);
    let (mid, hw) = match cfg.run.ipl_half_width {
        Some(hw) => (center, hw),
        None => (0.5 * (g[0] + g[g.len() - 1]), 0.5 * (g[g.len() - 1] - g[0])),
    };
    let mut t = Table::new(&["pump_ueV", "pump_sq", "channel", "ipl_total", "ipl_lorentzian"]);
    t.meta("ipl.center", center);
    t.meta("ipl.total_range", format!("{} to {}", mid - hw, mid + hw));
    for eta in pumps(cfg) {
        let p = cfg.system.with_drive_amplitude(eta);
        let c = sweep_at(cfg, &p)?;
        let total = integrated_pl(&c, ch, IplMode::Total, mid, hw)
            .with_context(|| format!("integrating at pump {eta} ueV"))?;
        // A failed Lorentzian fit is reported as NaN so the rest of the
        // power series survives.
        let lor = match integrated_pl(&c, ch, IplMode::LorentzianOnly, center, hw) {
            Ok(v) => v,
            Err(e) => {
                log::warn!("lorentzian IPL at pump {eta} ueV: {e}");
                f64::NAN
            }
        };
        t.push(vec![num(eta), num(eta * eta), ch.label().into(), num(total), num(lor)]);
    }
    w.table("ipl.csv", &t)
}

fn convergence(w: &mut Writer) -> Result<()> {
    let cfg = w.cfg;
    let list = if cfg.run.n_max_list.is_empty() {
        match cfg.system.drive {
            DriveKind::Exciton => vec![1, 2, 3],
            DriveKind::Cavity => (2..=7).collect(),
        }
    } else {
        cfg.run.n_max_list.clone()
    };
    let tol = cfg.run.convergence_tolerance;
    let rep = convergence_study(&cfg.system, &cfg.bath, cfg.variant, &list, &grid(cfg), tol)?;
    let mut t = Table::new(&["n_max", "n_max_next", "max_rel_deviation", "below_tolerance"]);
    t.meta(
        "convergence.converged_at",
        rep.converged_at.map_or("none".to_string(), |n| n.to_string()),
    );
    for (k, d) in rep.deviations.iter().enumerate() {
        t.push(vec![
            rep.n_max[k].to_string(),
            rep.n_max[k + 1].to_string(),
            num(*d),
            (*d < tol).to_string(),
        ]);
    }
    w.table("convergence.csv", &t)
}
