use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Dressed JC spectrum for n = 1..n_max. Columns: n, e_minus, e_plus,
    /// splitting, and real/imaginary parts of the damped block eigenvalues.
    Spectrum,
    /// Cavity decay into a discretized flat bath. Columns: t, re_ec, im_ec,
    /// abs2_ec; the fitted rate is reported on stderr.
    Bath,
    /// Perturbative lobe boundary over a mu_tilde grid. Columns: mu_tilde,
    /// zkappa_c_perturbative, plus zkappa_c_numeric and status with --oracle.
    Boundary,
    /// Order parameter and number fluctuations in time. Columns: zkappa,
    /// gamma, t, psi, dn_total, dn_leak, chi.
    Evolve,
    /// Order parameter against hopping at fixed times. Columns: gamma, t,
    /// zkappa, psi.
    Restore,
    /// Numerical mean-field scan over zkappa (columns: zkappa, psi, energy,
    /// n_mean, n_var, iterations); with --oracle a single-row comparison of
    /// numerical and perturbative boundaries at mu_tilde.
    Gutzwiller,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Bath => "bath",
            Command::Boundary => "boundary",
            Command::Evolve => "evolve",
            Command::Restore => "restore",
            Command::Gutzwiller => "gutzwiller",
        }
    }
}

/// Flags shared by all subcommands. Unset values fall back to the config
/// file, then to per-command defaults.
#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Options {
    /// Atomic decay rate [beta]
    #[arg(long, global = true)]
    pub gamma_a: Option<f64>,
    /// Cavity decay rate [beta]
    #[arg(long, global = true)]
    pub gamma_c: Option<f64>,
    /// (mu - omega_c) / beta; defaults to the lossless lobe tip
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu_tilde: Option<f64>,
    /// Hopping z kappa [beta]
    #[arg(long, global = true)]
    pub zkappa: Option<f64>,
    /// Coordination number
    #[arg(long, global = true)]
    pub z: Option<u32>,
    /// Detuning omega_c - omega_a [beta]
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    /// Cavity frequency [beta]
    #[arg(long, global = true)]
    pub omega_c: Option<f64>,
    /// Photon cutoff (gutzwiller) or top manifold (spectrum)
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// End of the time grid [1/beta]
    #[arg(long, global = true)]
    pub t_max: Option<f64>,
    /// Number of time samples
    #[arg(long, global = true)]
    pub t_steps: Option<usize>,
    /// Evaluation time for boundary [1/beta]
    #[arg(long, global = true)]
    pub time: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu_min: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub mu_max: Option<f64>,
    #[arg(long, global = true)]
    pub mu_steps: Option<usize>,
    #[arg(long, global = true)]
    pub zkappa_max: Option<f64>,
    #[arg(long, global = true)]
    pub zkappa_steps: Option<usize>,
    /// Number of bath modes (odd)
    #[arg(long, global = true)]
    pub modes: Option<usize>,
    /// Bath half bandwidth [beta]
    #[arg(long, global = true)]
    pub half_band: Option<f64>,
    /// Output CSV; stdout when absent
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to available cores
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Write a gnuplot script next to the CSV
    #[arg(long, global = true)]
    pub plot: bool,
    /// Add the numerical Gutzwiller boundary (forces gamma = 0)
    #[arg(long, global = true)]
    pub oracle: bool,
}

impl Options {
    /// Fills every unset field from `fallback`.
    pub fn or(self, fallback: Options) -> Options {
        macro_rules! pick {
            ($($f:ident),*) => {
                Options {
                    $($f: self.$f.or(fallback.$f),)*
                    plot: self.plot || fallback.plot,
                    oracle: self.oracle || fallback.oracle,
                }
            };
        }
        pick!(
            gamma_a,
            gamma_c,
            mu_tilde,
            zkappa,
            z,
            delta,
            omega_c,
            n_max,
            t_max,
            t_steps,
            time,
            mu_min,
            mu_max,
            mu_steps,
            zkappa_max,
            zkappa_steps,
            modes,
            half_band,
            out,
            jobs
        )
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "jchsim",
    version,
    about = "Dissipative Jaynes-Cummings-Hubbard lattice sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// key=value file; keys are long flag names with underscores
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Parser)]
#[command(no_binary_name = true)]
struct FileOptions {
    #[command(flatten)]
    options: Options,
}

/// Parses a `key = value` file into options. Blank lines and `#` comments
/// are skipped; boolean keys take `true` or `false`.
pub fn parse_config(text: &str, origin: &Path) -> Result<Options> {
    let bad = |line: usize, msg: String| Error::InvalidParams(format!("{}:{line}: {msg}", origin.display()));
    let mut args = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(i + 1, format!("expected key = value, got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let flag = format!("--{}", key.replace('_', "-"));
        match key {
            "plot" | "oracle" => match value {
                "true" => args.push(flag),
                "false" => {}
                _ => return Err(bad(i + 1, format!("{key} must be true or false"))),
            },
            "config" => return Err(bad(i + 1, "config files cannot include each other".into())),
            _ => {
                args.push(flag);
                args.push(value.to_string());
            }
        }
    }
    FileOptions::try_parse_from(args)
        .map(|f| f.options)
        .map_err(|e| Error::InvalidParams(format!("{}: {}", origin.display(), e.render().to_string().trim())))
}

/// Fully merged configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub options: Options,
}

impl RunConfig {
    pub fn new(command: Command, options: Options) -> Result<Self> {
        let cfg = Self { command, options };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Merges command-line flags over the optional config file.
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
                    path: path.clone(),
                    source,
                })?;
                parse_config(&text, path)?
            }
            None => Options::default(),
        };
        Self::new(cli.command, cli.options.or(file))
    }

    pub fn from_args<I, T>(args: I) -> Result<Self>
    where
        I: IntoIterator<Item = T>,
        T: Into<std::ffi::OsString> + Clone,
    {
        let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidParams(e.render().to_string()))?;
        Self::from_cli(cli)
    }

    fn validate(&self) -> Result<()> {
        let o = &self.options;
        for (name, steps) in [
            ("mu_steps", o.mu_steps),
            ("zkappa_steps", o.zkappa_steps),
            ("t_steps", o.t_steps),
        ] {
            if matches!(steps, Some(n) if n < 2) {
                return Err(Error::InvalidParams(format!("{name} must be >= 2")));
            }
        }
        if o.jobs == Some(0) {
            return Err(Error::InvalidParams("jobs must be >= 1".into()));
        }
        if matches!(o.t_max, Some(t) if !(t > 0.0)) {
            return Err(Error::InvalidParams("t_max must be > 0".into()));
        }
        if matches!(o.zkappa_max, Some(k) if !(k > 0.0)) {
            return Err(Error::InvalidParams("zkappa_max must be > 0".into()));
        }
        if o.plot && o.out.is_none() {
            return Err(Error::InvalidParams("--plot needs --out".into()));
        }
        self.model()?;
        Ok(())
    }

    /// Site parameters from the flags, before any per-command overrides.
    pub fn model(&self) -> Result<ModelParams> {
        let o = &self.options;
        let base = ModelParams::default();
        let omega_c = o.omega_c.unwrap_or(base.omega_c);
        let p = ModelParams {
            omega_c,
            omega_a: omega_c - o.delta.unwrap_or(0.0),
            gamma_a: o.gamma_a.unwrap_or(0.0),
            gamma_c: o.gamma_c.unwrap_or(0.0),
            mu_tilde: o.mu_tilde.unwrap_or(base.mu_tilde),
            z: o.z.unwrap_or(base.z),
            zkappa: o.zkappa.unwrap_or(0.0),
            ..base
        };
        p.validate()?;
        Ok(p)
    }

    /// Combined decay rate if either flag was given.
    pub fn gamma(&self) -> Option<f64> {
        let o = &self.options;
        match (o.gamma_a, o.gamma_c) {
            (None, None) => None,
            (a, c) => Some(a.unwrap_or(0.0) + c.unwrap_or(0.0)),
        }
    }
}

/// `count` evenly spaced points on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let last = (count - 1) as f64;
    (0..count)
        .map(|i| {
            if i + 1 == count {
                hi
            } else {
                lo + (hi - lo) * i as f64 / last
            }
        })
        .collect()
}
