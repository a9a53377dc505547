use std::path::{Path, PathBuf};

use bpbv::bvring::Params;
use bpbv::fgl::Flavor;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "bpbv", version, about = "Exact computations in BP<m,n>*BV_k")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq)]
pub enum Command {
    /// Emit [p](t) and the π_k, and check the law.
    Pseries,
    /// Emit α, α′ and their degrees.
    Alpha,
    /// Emit the Dickson invariants and check their identities.
    Dickson,
    /// Certify α = α′, the v_i-torsion of α′ and the reduction mod I_{n+1}.
    VerifyMain,
    /// Build the A(k)* chain and run the slice checks.
    Filtration,
    /// Re-verify a stored certificate without the solver.
    Recheck { certificate: PathBuf },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Pseries => "pseries",
            Command::Alpha => "alpha",
            Command::Dickson => "dickson",
            Command::VerifyMain => "verify-main",
            Command::Filtration => "filtration",
            Command::Recheck { .. } => "recheck",
        }
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct Flags {
    #[arg(long, global = true)]
    pub prime: Option<u64>,
    #[arg(long, global = true)]
    pub m: Option<u32>,
    #[arg(long, global = true)]
    pub n: Option<u32>,
    #[arg(long, global = true)]
    pub k: Option<u32>,
    #[arg(long = "trunc-deg", global = true)]
    pub trunc_deg: Option<u32>,
    #[arg(long = "padic-prec", global = true)]
    pub padic_prec: Option<u32>,
    #[arg(long, global = true)]
    pub flavor: Option<String>,
    /// Comma list (`-4,0,6`) or inclusive range (`-20:20`, even degrees only).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub degrees: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long = "cache-dir", global = true)]
    pub cache_dir: Option<PathBuf>,
    /// key=value file whose entries override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Record wall-clock timings (makes reports non-reproducible).
    #[arg(long, global = true)]
    pub timings: bool,
}

/// Validated configuration of one run.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub p: u64,
    pub m: u32,
    pub n: u32,
    pub k: Option<u32>,
    pub trunc: Option<u32>,
    pub prec: Option<u32>,
    pub flavor: Flavor,
    pub degrees: Vec<i64>,
    pub out: Option<PathBuf>,
    pub cache_dir: Option<PathBuf>,
    pub timings: bool,
}

/// Configuration echo written at the top of every report.
#[derive(Clone, Debug, Serialize)]
pub struct ParamsEcho {
    pub command: String,
    pub p: Option<u64>,
    pub m: Option<u32>,
    pub n: Option<u32>,
    pub w: Option<u32>,
    pub k: Option<u32>,
    #[serde(rename = "D")]
    pub trunc: Option<u32>,
    #[serde(rename = "N")]
    pub prec: Option<u32>,
    pub flavor: Option<String>,
    pub degrees: Vec<i64>,
}

pub const DEFAULT_DEGREE_BOUND: i64 = 20;
/// Slice degrees beyond this are rejected; no supported truncation reaches them.
pub const MAX_DEGREE: i64 = 4096;

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim().parse().map_err(|_| CliError::Usage(format!("invalid value for {key}: {v:?}")))
}

/// Applies a `key = value` file on top of the flags.
pub fn apply_config_file(flags: &mut Flags, path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    apply_config_text(flags, &path.display().to_string(), &text)
}

/// Applies `key = value` lines. Blank lines and `#` comments are skipped;
/// `origin` only labels error messages.
pub fn apply_config_text(flags: &mut Flags, origin: &str, text: &str) -> Result<(), CliError> {
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return usage(format!("{origin}:{}: expected key=value", no + 1));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "prime" => flags.prime = Some(parse_num(key, value)?),
            "m" => flags.m = Some(parse_num(key, value)?),
            "n" => flags.n = Some(parse_num(key, value)?),
            "k" => flags.k = Some(parse_num(key, value)?),
            "trunc-deg" => flags.trunc_deg = Some(parse_num(key, value)?),
            "padic-prec" => flags.padic_prec = Some(parse_num(key, value)?),
            "flavor" => flags.flavor = Some(value.to_string()),
            "degrees" => flags.degrees = Some(value.to_string()),
            "out" => flags.out = Some(value.into()),
            "cache-dir" => flags.cache_dir = Some(value.into()),
            "timings" => flags.timings = parse_num(key, value)?,
            _ => return usage(format!("{origin}:{}: unknown key {key:?}", no + 1)),
        }
    }
    Ok(())
}

/// Parses `--degrees`: a comma list, or `lo:hi` meaning the even degrees in between.
pub fn parse_degrees(text: &str) -> Result<Vec<i64>, CliError> {
    let text = text.trim();
    let mut out: Vec<i64> = if let Some((lo, hi)) = text.split_once(':') {
        let lo: i64 = parse_num("degrees", lo)?;
        let hi: i64 = parse_num("degrees", hi)?;
        if lo.unsigned_abs() > MAX_DEGREE as u64 || hi.unsigned_abs() > MAX_DEGREE as u64 {
            return usage(format!("slice degrees must lie in -{MAX_DEGREE}..={MAX_DEGREE}"));
        }
        if lo > hi {
            return usage(format!("empty degree range {text}"));
        }
        (lo..=hi).filter(|d| d % 2 == 0).collect()
    } else {
        text.split(',').map(|d| parse_num("degrees", d)).collect::<Result<_, _>>()?
    };
    if out.iter().any(|d| d.unsigned_abs() > MAX_DEGREE as u64) {
        return usage(format!("slice degrees must lie in -{MAX_DEGREE}..={MAX_DEGREE}"));
    }
    out.sort_unstable();
    out.dedup();
    if out.is_empty() {
        return usage("no degrees given");
    }
    Ok(out)
}

impl RunConfig {
    pub fn from_flags(command: Command, flags: &Flags) -> Result<RunConfig, CliError> {
        let mut flags = flags.clone();
        if let Some(path) = flags.config.clone() {
            apply_config_file(&mut flags, &path)?;
        }
        let flavor = match &flags.flavor {
            Some(f) => f.parse().map_err(|e: bpbv::Error| CliError::Usage(e.to_string()))?,
            None => Flavor::Hazewinkel,
        };
        let degrees = match &flags.degrees {
            Some(d) => parse_degrees(d)?,
            None => (-DEFAULT_DEGREE_BOUND..=DEFAULT_DEGREE_BOUND).filter(|d| d % 2 == 0).collect(),
        };
        let needs_params = !matches!(command, Command::Recheck { .. });
        let p = match flags.prime {
            Some(p) => p,
            None if needs_params => return usage("--prime is required"),
            None => 0,
        };
        let m = flags.m.unwrap_or(0);
        let n = match (flags.n, &command) {
            (Some(n), _) => n,
            // The Dickson command only needs k and m.
            (None, Command::Dickson) | (None, Command::Recheck { .. }) => m.max(1),
            (None, _) => return usage("--n is required"),
        };
        let cfg = RunConfig {
            command,
            p,
            m,
            n,
            k: flags.k,
            trunc: flags.trunc_deg,
            prec: flags.padic_prec,
            flavor,
            degrees,
            out: flags.out,
            cache_dir: flags.cache_dir,
            timings: flags.timings,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        match self.command {
            Command::Recheck { .. } => Ok(()),
            Command::Dickson => {
                if !bpbv::scalar::is_prime(self.p) {
                    return usage(format!("{} is not prime", self.p));
                }
                match self.k {
                    Some(k) if (1..=4).contains(&k) => Ok(()),
                    Some(k) => usage(format!("dickson needs 1 ≤ k ≤ 4, got {k}")),
                    None => usage("dickson needs --k"),
                }
            }
            _ => {
                let params = self.params()?;
                if let Some(k) = self.k {
                    if k > params.w() {
                        return usage(format!("need k ≤ w = {}, got k = {k}", params.w()));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn params(&self) -> Result<Params, CliError> {
        Params::new(self.p, self.m, self.n, self.flavor, self.trunc, self.prec).map_err(|e| CliError::Usage(e.to_string()))
    }

    pub fn echo(&self) -> ParamsEcho {
        let base = ParamsEcho {
            command: self.command.name().to_string(),
            p: None,
            m: None,
            n: None,
            w: None,
            k: self.k,
            trunc: None,
            prec: None,
            flavor: None,
            degrees: Vec::new(),
        };
        match self.command {
            Command::Recheck { .. } => base,
            Command::Dickson => ParamsEcho { p: Some(self.p), m: Some(self.m), ..base },
            _ => {
                let params = self.params().expect("validated");
                ParamsEcho {
                    p: Some(params.p),
                    m: Some(params.m),
                    n: Some(params.n),
                    w: Some(params.w()),
                    trunc: Some(params.trunc),
                    prec: Some(params.prec),
                    flavor: Some(params.flavor.to_string()),
                    degrees: if self.command == Command::Filtration { self.degrees.clone() } else { Vec::new() },
                    ..base
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_ranges() {
        assert_eq!(parse_degrees("-4:3").unwrap(), vec![-4, -2, 0, 2]);
        assert_eq!(parse_degrees("6,-2,6").unwrap(), vec![-2, 6]);
        assert!(parse_degrees("3:1").is_err());
        assert!(parse_degrees("x").is_err());
        assert!(parse_degrees("-9000000000000000000:9000000000000000000").is_err());
        assert!(parse_degrees("5000").is_err());
    }

    #[test]
    fn k_above_w_is_rejected() {
        let flags = Flags { prime: Some(2), m: Some(1), n: Some(1), k: Some(2), ..Flags::default() };
        assert!(matches!(RunConfig::from_flags(Command::Alpha, &flags), Err(CliError::Usage(_))));
        let flags = Flags { k: Some(1), ..flags };
        assert!(RunConfig::from_flags(Command::Alpha, &flags).is_ok());
    }

    #[test]
    fn config_file_overrides_flags() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# grid point\nprime = 3\nflavor=araki\ndegrees = -2:2\n").unwrap();
        let flags = Flags { prime: Some(2), m: Some(1), n: Some(1), config: Some(path), ..Flags::default() };
        let cfg = RunConfig::from_flags(Command::Alpha, &flags).unwrap();
        assert_eq!(cfg.p, 3);
        assert_eq!(cfg.flavor, Flavor::Araki);
        assert_eq!(cfg.degrees, vec![-2, 0, 2]);
    }

    #[test]
    fn missing_prime() {
        assert!(RunConfig::from_flags(Command::Pseries, &Flags::default()).is_err());
    }
}
