use rayon::prelude::*;

use super::config::{linspace, Command, RunConfig};
use super::plot::PlotSpec;
use super::table::{Cell, SeriesTable};
use crate::bath::{fit_decay_rate, make_bath, series_from, BathPropagator};
use crate::error::{Error, Result};
use crate::gutzwiller::{
    leakage_fluctuation, numeric_boundary, solve_self_consistent, total_fluctuation, SolverOptions, TruncatedBasis,
};
use crate::model::{complex_dressed_spectrum, jc_energy, mott_lobe_interval, Branch, ModelParams};
use crate::perturbation::{boundary_kappa, chi_theta, order_parameter_or_zero};

/// Default hopping and decay cases of the time evolution, plus the
/// decoupled reference.
pub const EVOLVE_ZKAPPA: [f64; 2] = [0.2, 0.3];
pub const EVOLVE_GAMMA: [f64; 2] = [0.01, 0.02];
pub const RESTORE_GAMMA: [f64; 2] = [0.0, 0.05];
/// Restore times in units of `1/gamma`.
pub const RESTORE_TIMES: [f64; 3] = [0.0, 0.1, 0.2];
pub const DEFAULT_N_MAX: usize = 6;
pub const DEFAULT_BATH_GAMMA: f64 = 0.01;
pub const DEFAULT_BATH_MODES: usize = 2001;
pub const DEFAULT_HALF_BAND: f64 = 1.0;
/// Search interval for the numerical boundary [beta].
pub const ORACLE_BRACKET: (f64, f64) = (1e-6, 1.0);

/// Output of one subcommand: the table, diagnostics for stderr and a plot
/// recipe.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: SeriesTable,
    pub notes: Vec<String>,
    pub plot: PlotSpec,
}

pub fn run(cfg: &RunConfig) -> Result<Report> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.options.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParams(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match cfg.command {
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Bath => cmd_bath(cfg),
        Command::Boundary => cmd_boundary(cfg),
        Command::Evolve => cmd_evolve(cfg),
        Command::Restore => cmd_restore(cfg),
        Command::Gutzwiller => cmd_gutzwiller(cfg),
    })
}

/// Evaluates `f` on every item in parallel; results keep item order.
fn par_rows<T: Sync, F>(items: &[T], f: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(&T) -> Result<Vec<Cell>> + Sync + Send,
{
    items.par_iter().map(f).collect()
}

fn fill(table: &mut SeriesTable, rows: Vec<Vec<Cell>>) {
    for row in rows {
        table.push(row);
    }
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Report> {
    let p = cfg.model()?;
    let top = cfg.options.n_max.unwrap_or(5) as u32;
    let mut table = SeriesTable::new(
        "spectrum",
        &[
            ("n", ""),
            ("e_minus", "beta"),
            ("e_plus", "beta"),
            ("splitting", "beta"),
            ("re_minus", "beta"),
            ("im_minus", "beta"),
            ("re_plus", "beta"),
            ("im_plus", "beta"),
        ],
    );
    for n in 1..=top {
        let (lo, hi) = (jc_energy(&p, n, Branch::Minus), jc_energy(&p, n, Branch::Plus));
        let split = 2.0 * (f64::from(n) * p.beta * p.beta + 0.25 * p.detuning().powi(2)).sqrt();
        let [minus, plus] = complex_dressed_spectrum(&p, n)?;
        table.push(vec![
            Cell::Int(n.into()),
            lo.into(),
            hi.into(),
            split.into(),
            minus.energy.re.into(),
            minus.energy.im.into(),
            plus.energy.re.into(),
            plus.energy.im.into(),
        ]);
    }
    Ok(Report {
        table,
        notes: Vec::new(),
        plot: PlotSpec::new("n", &["splitting"], &[]),
    })
}

pub fn cmd_bath(cfg: &RunConfig) -> Result<Report> {
    let o = &cfg.options;
    let p = cfg.model()?;
    let gamma = o.gamma_c.unwrap_or(DEFAULT_BATH_GAMMA);
    let spec = make_bath(
        gamma,
        o.modes.unwrap_or(DEFAULT_BATH_MODES),
        o.half_band.unwrap_or(DEFAULT_HALF_BAND),
        p.omega_c,
    )?;
    let t_max = o.t_max.unwrap_or(4.0 / gamma);
    let steps = o.t_steps.unwrap_or(2001);
    if t_max > 0.5 * spec.recurrence_time() {
        return Err(Error::BadDiscretization(format!(
            "t_max = {t_max} runs past half the recurrence time ({})",
            0.5 * spec.recurrence_time()
        )));
    }
    let prop = BathPropagator::new(&spec)?;
    let series = series_from(&prop, t_max, steps);

    let mut notes = vec![format!(
        "modes = {}, spacing = {:.6e}, coupling = {:.6e}",
        spec.n_modes, spec.spacing, spec.coupling
    )];
    match fit_decay_rate(&series) {
        Ok(fit) => notes.push(format!(
            "gamma_fit = {fit:.9e} (target {gamma:.9e}, relative error {:.3e})",
            fit / gamma - 1.0
        )),
        Err(e) => notes.push(format!("gamma_fit unavailable: {e}")),
    }
    let checks = linspace(0.0, t_max, 11);
    let drift = checks
        .par_iter()
        .map(|&t| (prop.total_norm(t) - 1.0).abs())
        .reduce(|| 0.0, f64::max);
    notes.push(format!("max norm deviation = {drift:.3e}"));

    let mut table = SeriesTable::new(
        "bath",
        &[("t", "1/beta"), ("re_ec", ""), ("im_ec", ""), ("abs2_ec", "")],
    );
    for (t, a) in series.times.iter().zip(&series.amplitude) {
        table.push(vec![(*t).into(), a.re.into(), a.im.into(), a.norm_sqr().into()]);
    }
    Ok(Report {
        table,
        notes,
        plot: PlotSpec::new("t", &["abs2_ec"], &[]).log_y(),
    })
}

fn zero_loss_note(cfg: &RunConfig, notes: &mut Vec<String>) -> bool {
    let lossy = cfg.gamma().is_some_and(|g| g != 0.0);
    if lossy {
        notes.push("--oracle runs the Hermitian limit: gamma_a and gamma_c set to 0".into());
    }
    lossy
}

pub fn cmd_boundary(cfg: &RunConfig) -> Result<Report> {
    let o = &cfg.options;
    let mut notes = Vec::new();
    let mut p = cfg.model()?;
    if o.oracle && zero_loss_note(cfg, &mut notes) {
        p = p.with_gamma(0.0);
    }
    let t = o.time.unwrap_or(0.0);
    let (lo, hi) = mott_lobe_interval(&p)?;
    let grid = linspace(o.mu_min.unwrap_or(lo), o.mu_max.unwrap_or(hi), o.mu_steps.unwrap_or(13));
    let basis = TruncatedBasis::new(o.n_max.unwrap_or(DEFAULT_N_MAX))?;

    let mut cols = vec![("mu_tilde", ""), ("zkappa_c_perturbative", "beta")];
    if o.oracle {
        cols.extend([("zkappa_c_numeric", "beta"), ("status", "")]);
    }
    let mut table = SeriesTable::new("boundary", &cols);
    let rows = par_rows(&grid, |&mu| {
        let site = p.with_mu_tilde(mu);
        let pert = match boundary_kappa(&site, t) {
            Ok(k) => Some(k),
            Err(Error::OutsideLobe(_)) => None,
            Err(e) => return Err(e),
        };
        let mut row = vec![Cell::Num(mu), pert.into()];
        if o.oracle {
            let (numeric, status) = match pert.map(|_| numeric_boundary(&site, &basis, ORACLE_BRACKET)) {
                None => (None, "outside_lobe"),
                Some(Ok(k)) => (Some(k), "ok"),
                Some(Err(Error::BracketInvalid { .. })) => (None, "no_onset"),
                Some(Err(e)) => return Err(e),
            };
            row.extend([numeric.into(), Cell::Text(status.into())]);
        }
        Ok(row)
    })?;
    fill(&mut table, rows);
    let ys: &[&str] = if o.oracle {
        &["zkappa_c_perturbative", "zkappa_c_numeric"]
    } else {
        &["zkappa_c_perturbative"]
    };
    Ok(Report {
        table,
        notes,
        plot: PlotSpec::new("mu_tilde", ys, &[]),
    })
}

/// Decay settings for one case: explicit flags keep their split, defaults
/// divide the rate equally.
fn lossy(cfg: &RunConfig, base: &ModelParams, gamma: f64) -> ModelParams {
    if cfg.gamma().is_some() {
        *base
    } else {
        base.with_gamma(gamma)
    }
}

pub fn cmd_evolve(cfg: &RunConfig) -> Result<Report> {
    let o = &cfg.options;
    let base = cfg.model()?;
    let gammas = match cfg.gamma() {
        Some(g) if g > 0.0 => vec![g],
        Some(g) => {
            return Err(Error::InvalidParams(format!(
                "evolve needs gamma_a + gamma_c > 0, got {g}"
            )))
        }
        None => EVOLVE_GAMMA.to_vec(),
    };
    let mut cases: Vec<(f64, f64)> = match o.zkappa {
        Some(zk) => gammas.iter().map(|&g| (zk, g)).collect(),
        None => EVOLVE_ZKAPPA
            .iter()
            .flat_map(|&zk| gammas.iter().map(move |&g| (zk, g)))
            .collect(),
    };
    if o.zkappa.is_none() {
        cases.push((0.0, gammas[0]));
    }
    let times = linspace(0.0, o.t_max.unwrap_or(100.0), o.t_steps.unwrap_or(1001));
    let points: Vec<(f64, f64, f64)> = cases
        .iter()
        .flat_map(|&(zk, g)| times.iter().map(move |&t| (zk, g, t)))
        .collect();

    let mut table = SeriesTable::new(
        "evolve",
        &[
            ("zkappa", "beta"),
            ("gamma", "beta"),
            ("t", "1/beta"),
            ("psi", ""),
            ("dn_total", ""),
            ("dn_leak", ""),
            ("chi", "1/beta"),
        ],
    );
    let rows = par_rows(&points, |&(zk, g, t)| {
        let p = lossy(cfg, &base, g).with_zkappa(zk);
        let chi = if zk == 0.0 {
            f64::INFINITY
        } else {
            chi_theta(&p, t)?.chi
        };
        Ok(vec![
            zk.into(),
            g.into(),
            t.into(),
            order_parameter_or_zero(&p, t)?.into(),
            total_fluctuation(&p, t)?.into(),
            leakage_fluctuation(&p, t)?.into(),
            chi.into(),
        ])
    })?;
    fill(&mut table, rows);
    Ok(Report {
        table,
        notes: Vec::new(),
        plot: PlotSpec::new("t", &["psi", "dn_total", "dn_leak"], &["zkappa", "gamma"]).normalizable("psi"),
    })
}

pub fn cmd_restore(cfg: &RunConfig) -> Result<Report> {
    let o = &cfg.options;
    let base = cfg.model()?;
    let gammas = cfg.gamma().map_or(RESTORE_GAMMA.to_vec(), |g| vec![g]);
    let grid = linspace(0.0, o.zkappa_max.unwrap_or(0.6), o.zkappa_steps.unwrap_or(601));
    let mut points = Vec::new();
    for &g in &gammas {
        let times: Vec<f64> = if g == 0.0 {
            vec![0.0]
        } else {
            RESTORE_TIMES.iter().map(|f| f / g).collect()
        };
        for t in times {
            points.extend(grid.iter().map(|&zk| (g, t, zk)));
        }
    }

    let mut table = SeriesTable::new(
        "restore",
        &[("gamma", "beta"), ("t", "1/beta"), ("zkappa", "beta"), ("psi", "")],
    );
    let rows = par_rows(&points, |&(g, t, zk)| {
        let p = lossy(cfg, &base, g).with_zkappa(zk);
        Ok(vec![
            g.into(),
            t.into(),
            zk.into(),
            order_parameter_or_zero(&p, t)?.into(),
        ])
    })?;
    fill(&mut table, rows);
    Ok(Report {
        table,
        notes: Vec::new(),
        plot: PlotSpec::new("zkappa", &["psi"], &["gamma", "t"]),
    })
}

pub fn cmd_gutzwiller(cfg: &RunConfig) -> Result<Report> {
    let o = &cfg.options;
    let mut notes = Vec::new();
    let mut p = cfg.model()?;
    if o.oracle && zero_loss_note(cfg, &mut notes) {
        p = p.with_gamma(0.0);
    }
    let basis = TruncatedBasis::new(o.n_max.unwrap_or(DEFAULT_N_MAX))?;

    if o.oracle {
        let numeric = numeric_boundary(&p, &basis, ORACLE_BRACKET)?;
        let pert = boundary_kappa(&p, 0.0)?;
        let mut table = SeriesTable::new(
            "gutzwiller_oracle",
            &[
                ("mu_tilde", ""),
                ("zkappa_c_numeric", "beta"),
                ("zkappa_c_perturbative", "beta"),
                ("rel_diff", ""),
            ],
        );
        table.push(vec![
            p.mu_tilde.into(),
            numeric.into(),
            pert.into(),
            (numeric / pert - 1.0).into(),
        ]);
        return Ok(Report {
            table,
            notes,
            plot: PlotSpec::new("mu_tilde", &["zkappa_c_numeric", "zkappa_c_perturbative"], &[]),
        });
    }

    let grid = linspace(0.0, o.zkappa_max.unwrap_or(0.3), o.zkappa_steps.unwrap_or(31));
    let opts = SolverOptions::default();
    let mut table = SeriesTable::new(
        "gutzwiller",
        &[
            ("zkappa", "beta"),
            ("psi", ""),
            ("energy", "beta"),
            ("n_mean", ""),
            ("n_var", ""),
            ("iterations", ""),
        ],
    );
    let rows = par_rows(&grid, |&zk| {
        let sol = solve_self_consistent(&p.with_zkappa(zk), &basis, &opts)?.into_converged()?;
        Ok(vec![
            zk.into(),
            sol.psi.into(),
            sol.energy.into(),
            sol.n_mean.into(),
            sol.n_var.into(),
            Cell::Int(sol.iterations as i64),
        ])
    })?;
    fill(&mut table, rows);
    Ok(Report {
        table,
        notes,
        plot: PlotSpec::new("zkappa", &["psi"], &[]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(args: &[&str]) -> Report {
        let cfg = RunConfig::from_args(std::iter::once("jchsim").chain(args.iter().copied())).unwrap();
        run(&cfg).unwrap()
    }

    #[test]
    fn spectrum_splitting() {
        let r = report(&["spectrum"]);
        let split = r.table.column("splitting").unwrap();
        for (n, s) in split.iter().enumerate() {
            assert_eq!(*s, 2.0 * ((n + 1) as f64).sqrt());
        }
    }

    #[test]
    fn boundary_default_grid() {
        let r = report(&["boundary"]);
        let k = r.table.column("zkappa_c_perturbative").unwrap();
        assert_eq!(k.len(), 13);
        assert_eq!(k[0], 0.0);
        assert_eq!(k[12], 0.0);
        let max = k.iter().cloned().fold(0.0, f64::max);
        assert!((max - 0.1599).abs() < 2e-3, "{max}");
    }

    #[test]
    fn boundary_outside_lobe_rows() {
        let r = report(&[
            "boundary",
            "--mu-min",
            "-1.2",
            "--mu-max",
            "-0.9",
            "--mu-steps",
            "4",
            "--oracle",
        ]);
        let status = r.table.column_index("status").unwrap();
        let rows = r.table.rows();
        assert_eq!(rows[0][status], Cell::Text("outside_lobe".into()));
        assert_eq!(rows[0][1], Cell::Empty);
        assert_eq!(rows[3][status], Cell::Text("ok".into()));
    }

    #[test]
    fn boundary_time_scaling() {
        let base = report(&["boundary"]).table.column("zkappa_c_perturbative").unwrap();
        let later = report(&["boundary", "--gamma-a", "0.025", "--gamma-c", "0.025", "--time", "4"]);
        let p = ModelParams::default().with_gamma(0.05);
        for ((mu, k0), k) in later
            .table
            .column("mu_tilde")
            .unwrap()
            .iter()
            .zip(&base)
            .zip(later.table.column("zkappa_c_perturbative").unwrap())
        {
            let k_lossy0 = boundary_kappa(&p.with_mu_tilde(*mu), 0.0).unwrap();
            assert!((k - k_lossy0 * 0.4f64.exp()).abs() <= 1e-12 * k.max(1e-300));
            assert!(k >= *k0);
        }
    }

    #[test]
    fn evolve_reference_case() {
        let r = report(&["evolve", "--t-steps", "51"]);
        assert_eq!(r.table.rows().len(), 5 * 51);
        let zk = r.table.column("zkappa").unwrap();
        let psi = r.table.column("psi").unwrap();
        let total = r.table.column("dn_total").unwrap();
        let leak = r.table.column("dn_leak").unwrap();
        let t = r.table.column("t").unwrap();
        for i in 0..zk.len() {
            assert!(psi[i] >= 0.0);
            if t[i] == 0.0 {
                assert_eq!(leak[i], 0.0);
            }
            if zk[i] == 0.0 {
                assert_eq!(psi[i], 0.0);
                assert_eq!(total[i], leak[i]);
            }
        }
    }

    #[test]
    fn evolve_rejects_lossless() {
        let cfg = RunConfig::from_args(["jchsim", "evolve", "--gamma-a", "0"]).unwrap();
        assert!(matches!(run(&cfg), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn restore_zero_hopping_rows() {
        let r = report(&["restore", "--zkappa-steps", "7"]);
        assert_eq!(r.table.rows().len(), 4 * 7);
        for row in r.table.rows() {
            if row[2].as_f64() == Some(0.0) {
                assert_eq!(row[3], Cell::Num(0.0));
            }
        }
    }

    #[test]
    fn bath_defaults() {
        let r = report(&["bath", "--t-steps", "801"]);
        assert_eq!(r.table.rows().len(), 801);
        assert!(r.notes.iter().any(|n| n.starts_with("gamma_fit")));
        assert!((r.table.column("abs2_ec").unwrap()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gutzwiller_scan_and_oracle() {
        let r = report(&["gutzwiller", "--zkappa-steps", "4", "--zkappa-max", "0.3"]);
        let psi = r.table.column("psi").unwrap();
        assert_eq!(psi[0], 0.0);
        assert!(psi[3] > 0.1);
        let o = report(&["gutzwiller", "--oracle"]);
        let rel = o.table.column("rel_diff").unwrap()[0];
        assert!(rel.abs() < 0.02);
    }

    #[test]
    fn gutzwiller_rejects_loss() {
        let cfg = RunConfig::from_args(["jchsim", "gutzwiller", "--gamma-c", "0.01"]).unwrap();
        assert!(matches!(run(&cfg), Err(Error::DissipativeNotSupported { .. })));
    }
}
