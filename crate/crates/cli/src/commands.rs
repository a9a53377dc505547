use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use bpbv::bvring::aring::{self, ChainStep, DEFAULT_CHAIN_WINDOW};
use bpbv::bvring::{residue_map, slice, Comparison, Engine, Membership, MembershipCertificate, Params};
use bpbv::dickson::{self, SignedPoly};
use bpbv::series::TruncatedSeries;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cache::{self, hex, LawKey};
use crate::config::{Command, RunConfig};
use crate::report::{CertificateRef, CheckRecord, Report, Status};
use crate::CliError;

/// Seed of the random suites used by the `dickson` command.
pub const DICKSON_SEED: u64 = 0x5eed_d1c5;
/// Random invertible matrices tested per run of `dickson`.
pub const DET_SAMPLES: usize = 24;
const POLY_SAMPLES: usize = 40;

/// Result of one check before it is turned into a record.
pub struct Outcome {
    pub status: Status,
    pub certificate: Option<MembershipCertificate>,
    pub detail: String,
}

impl Outcome {
    pub fn new(status: Status, detail: impl Into<String>) -> Outcome {
        Outcome { status, certificate: None, detail: detail.into() }
    }

    pub fn flag(ok: bool, detail: impl Into<String>) -> Outcome {
        Outcome::new(Status::from_bool(ok), detail)
    }

    /// PASS with a certificate that must re-verify.
    pub fn certified(cert: MembershipCertificate, detail: impl Into<String>) -> Outcome {
        let ok = cert.recheck();
        Outcome { status: Status::from_bool(ok), certificate: Some(cert), detail: detail.into() }
    }
}

/// Where certificates go: `<out stem>-certs/` beside the report.
struct CertStore {
    dir: PathBuf,
    rel: String,
}

impl CertStore {
    fn for_report(out: &Path) -> CertStore {
        let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
        let rel = format!("{stem}-certs");
        let dir = out.parent().unwrap_or(Path::new("")).join(&rel);
        CertStore { dir, rel }
    }
}

/// Accumulates the report of one command.
pub struct Runner<'a> {
    cfg: &'a RunConfig,
    report: Report,
    certs: Option<CertStore>,
}

impl<'a> Runner<'a> {
    pub fn new(cfg: &'a RunConfig) -> Runner<'a> {
        Runner { cfg, report: Report::new(cfg.echo()), certs: cfg.out.as_deref().map(CertStore::for_report) }
    }

    fn cert_ref(&self, name: &str, cert: &MembershipCertificate) -> Result<CertificateRef, CliError> {
        let mut text = cert.to_json();
        text.push('\n');
        let sha256 = hex(&Sha256::digest(text.as_bytes()));
        let file = match &self.certs {
            Some(store) => {
                std::fs::create_dir_all(&store.dir)?;
                std::fs::write(store.dir.join(format!("{name}.json")), &text)?;
                Some(format!("{}/{name}.json", store.rel))
            }
            None => None,
        };
        Ok(CertificateRef { file, sha256, d_eff: cert.d_eff })
    }

    /// Runs one check and records it. Engine errors abort the command.
    pub fn check(&mut self, name: &str, f: impl FnOnce() -> bpbv::Result<Outcome>) -> Result<(), CliError> {
        let start = Instant::now();
        let outcome = f()?;
        let timing_ms = self.cfg.timings.then(|| start.elapsed().as_millis() as u64);
        let certificate = match &outcome.certificate {
            Some(c) => Some(self.cert_ref(name, c)?),
            None => None,
        };
        self.report.push(CheckRecord { name: name.to_string(), status: outcome.status, certificate, timing_ms, detail: outcome.detail });
        Ok(())
    }

    pub fn output(&mut self, key: &str, value: impl Into<Value>) {
        self.report.output(key, value);
    }

    pub fn finish(self) -> Report {
        self.report
    }
}

/// Runs the configured command and returns its report.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut r = Runner::new(cfg);
    match &cfg.command {
        Command::Pseries => pseries(cfg, &mut r)?,
        Command::Alpha => alpha(cfg, &mut r)?,
        Command::Dickson => dickson_cmd(cfg, &mut r)?,
        Command::VerifyMain => verify_main(cfg, &mut r)?,
        Command::Filtration => filtration(cfg, &mut r)?,
        Command::Recheck { certificate } => recheck(certificate, &mut r)?,
    }
    Ok(r.finish())
}

fn law_key(params: &Params, trunc: u32) -> LawKey {
    LawKey { p: params.p, n: params.n, flavor: params.flavor, trunc, prec: params.prec }
}

fn engine(cfg: &RunConfig, trunc: u32) -> Result<Engine, CliError> {
    let params = cfg.params()?;
    let law = cache::law(cfg.cache_dir.as_deref(), &law_key(&params, trunc.max(params.trunc)))?;
    Ok(Engine::from_law(params, &law)?)
}

fn named_flags(checks: &[(&'static str, bool)]) -> Outcome {
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let names: Vec<&str> = checks.iter().map(|c| c.0).collect();
    if failed.is_empty() {
        Outcome::new(Status::Pass, format!("identities hold: {}", names.join(", ")))
    } else {
        Outcome::new(Status::Fail, format!("failed: {}", failed.join(", ")))
    }
}

fn pseries(cfg: &RunConfig, r: &mut Runner) -> Result<(), CliError> {
    let params = cfg.params()?;
    let law = cache::law(cfg.cache_dir.as_deref(), &law_key(&params, params.trunc))?;
    r.check("fgl-axioms", || Ok(named_flags(&law.axiom_checks()?)))?;
    r.check("flavor-identity", || Ok(Outcome::flag(law.flavor_identity()?, format!("{} identity for [p](t)", params.flavor))))?;
    r.check("pi-decomposition", || Ok(named_flags(&law.pi_checks()?)))?;
    let pushed = law.push(params.m)?;
    r.output("p_series", pushed.p_series.render());
    let pis: BTreeMap<String, String> = pushed.pis.iter().enumerate().map(|(k, s)| (format!("pi_{k}"), s.render())).collect();
    r.output("pi", serde_json::to_value(pis).expect("string maps serialize"));
    Ok(())
}

fn degree_detail(s: &TruncatedSeries) -> Value {
    s.degree().map_or(Value::Null, Value::from)
}

fn alpha(cfg: &RunConfig, r: &mut Runner) -> Result<(), CliError> {
    let e = engine(cfg, 0)?;
    let expected = e.params.alpha_degree();
    let a = e.alpha()?;
    let ap = e.alpha_prime()?;
    r.output("alpha", a.alpha.render());
    r.output("alpha_prime", ap.render());
    r.output("expected_degree", expected);
    r.output("alpha_degree", degree_detail(&a.alpha));
    r.output("alpha_prime_degree", degree_detail(&ap));
    r.check("alpha-two-formulas", || Ok(Outcome::certified(a.agreement.clone(), "product of φ_j agrees with the product over lines")))?;
    r.check("alpha-degree", || {
        let ok = a.alpha.degree() == Some(expected) && ap.degree() == Some(expected);
        Ok(Outcome::flag(ok, format!("α and α′ homogeneous of degree {expected}")))
    })?;
    Ok(())
}

/// A random element of `Λ(a) ⊗ F_p[x]` with up to four terms, built through the parser.
fn random_poly(rng: &mut ChaCha8Rng, p: u64, k: usize) -> bpbv::Result<SignedPoly> {
    let mut terms = Vec::new();
    for _ in 0..rng.gen_range(0..5) {
        let mut factors = vec![rng.gen_range(1..p).to_string()];
        for i in 0..k {
            if rng.gen_bool(0.4) {
                factors.push(format!("a{i}"));
            }
        }
        for i in 0..k {
            let e: u32 = rng.gen_range(0..3);
            if e > 0 {
                factors.push(format!("x{i}^{e}"));
            }
        }
        terms.push(factors.join("*"));
    }
    if terms.is_empty() {
        terms.push("0".into());
    }
    SignedPoly::parse(p, k, &terms.join(" + "))
}

fn random_invertible(rng: &mut ChaCha8Rng, p: u64, k: usize) -> Vec<Vec<i64>> {
    loop {
        let g: Vec<Vec<i64>> = (0..k).map(|_| (0..k).map(|_| rng.gen_range(0..p as i64)).collect()).collect();
        if dickson::det_mod_p(&g, p) != 0 {
            return g;
        }
    }
}

fn first_failure<T: std::fmt::Debug>(items: impl IntoIterator<Item = (T, bool)>) -> Option<T> {
    items.into_iter().find(|(_, ok)| !ok).map(|(t, _)| t)
}

fn dickson_cmd(cfg: &RunConfig, r: &mut Runner) -> Result<(), CliError> {
    let (p, m) = (cfg.p, cfg.m);
    let k = cfg.k.expect("validated") as usize;
    let b = dickson::beta(p, k)?;
    let bp = dickson::beta_prime(p, k)?;
    let bs = dickson::beta_sec(p, k, m)?;
    r.output("beta", b.render());
    r.output("beta_prime", bp.render());
    r.output(&format!("beta_sec_{m}"), bs.render());
    let q = p.pow(m);
    r.check("dickson-identity", || {
        let (lhs, mid, rhs) = (bs.clone(), bp.pow(q), b.pow(q));
        let detail = if lhs == mid && mid == rhs {
            format!("β″_{m} = β′^{q} = β^{q}")
        } else {
            format!("β″_{m} = {lhs}; β′^{q} = {mid}; β^{q} = {rhs}")
        };
        Ok(Outcome::flag(lhs == mid && mid == rhs, detail))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(DICKSON_SEED);
    let samples: Vec<SignedPoly> = (0..POLY_SAMPLES).map(|_| random_poly(&mut rng, p, k)).collect::<bpbv::Result<_>>()?;
    let ops: Vec<u32> = (0..=m + k as u32).collect();
    r.check("q-squares-zero", || {
        let bad = first_failure(samples.iter().flat_map(|f| ops.iter().map(move |&i| ((i, f.render()), f.q_op(i).q_op(i).is_zero()))));
        Ok(match bad {
            None => Outcome::new(Status::Pass, format!("{} samples, Q_0..Q_{}", samples.len(), ops.len() - 1)),
            Some((i, f)) => Outcome::new(Status::Fail, format!("Q_{i}Q_{i}({f}) ≠ 0")),
        })
    })?;
    r.check("frobenius-q", || {
        let bad = first_failure(
            samples
                .iter()
                .flat_map(|f| ops.iter().map(move |&i| ((i, f.render()), f.q_op(i).frobenius_twist() == f.frobenius_twist().q_op(i + 1)))),
        );
        Ok(match bad {
            None => Outcome::new(Status::Pass, format!("{} samples, Q_0..Q_{}", samples.len(), ops.len() - 1)),
            Some((i, f)) => Outcome::new(Status::Fail, format!("F(Q_{i}({f})) ≠ Q_{}(F({f}))", i + 1)),
        })
    })?;
    r.check("det-character", || {
        let mut bad = None;
        for _ in 0..DET_SAMPLES {
            let g = random_invertible(&mut rng, p, k);
            if !dickson::det_character_holds(&g, &bp)? {
                bad = Some(g);
                break;
            }
        }
        Ok(match bad {
            None => Outcome::new(Status::Pass, format!("g*β′ = det(g)β′ for {DET_SAMPLES} random g in GL_{k}(F_{p})")),
            Some(g) => Outcome::new(Status::Fail, format!("fails for g = {g:?}")),
        })
    })?;
    Ok(())
}

/// Compares two residue maps, naming the first differing monomial.
fn compare_maps(got: &BTreeMap<Vec<u32>, u64>, want: &BTreeMap<Vec<u32>, u64>) -> Outcome {
    if got == want {
        return Outcome::new(Status::Pass, format!("{} terms agree", want.len()));
    }
    let key = got.keys().chain(want.keys()).find(|k| got.get(*k) != want.get(*k)).expect("maps differ");
    Outcome::new(
        Status::Fail,
        format!("coefficient of x^{key:?}: got {}, expected {}", got.get(key).unwrap_or(&0), want.get(key).unwrap_or(&0)),
    )
}

fn verify_main(cfg: &RunConfig, r: &mut Runner) -> Result<(), CliError> {
    let e = engine(cfg, 0)?;
    let params = e.params;
    let w = params.w();
    let degree = params.alpha_degree();
    let a = e.alpha()?;
    let ap = e.alpha_prime()?;
    r.output("alpha_degree", degree);
    r.check("alpha-two-formulas", || Ok(Outcome::certified(a.agreement.clone(), "product of φ_j agrees with the product over lines")))?;
    r.check("alpha-equals-alpha-prime", || {
        let ctx = a.alpha.ctx().clone();
        let gens = e.p_gens(&ctx, w)?;
        let d_eff = slice::default_d_eff(&ctx, &gens);
        Ok(match slice::ideal_member(&a.alpha.minus(&ap), &gens, d_eff)? {
            Membership::Found(cert) => Outcome::certified(cert, format!("α − α′ ∈ ([p](x_j) : j < {w}) in degree {degree}")),
            Membership::NotFound => Outcome::new(Status::UndecidedAtCutoff, format!("no multipliers found up to degree {d_eff}")),
        })
    })?;
    for i in params.m..=params.n {
        r.check(&format!("v{i}-alpha-prime"), || {
            Ok(Outcome::certified(e.v_alpha_prime_certificate(i)?, format!("v_{i}·α′ by cofactor expansion")))
        })?;
    }
    let beta = dickson::beta(params.p, w as usize)?.pow(params.pow(params.m));
    let want = beta.x_part().ok_or_else(|| bpbv::Error::Internal("β has exterior terms".into()))?;
    r.check("alpha-mod-top-ideal", || Ok(compare_maps(&residue_map(&a.alpha.reduce_mod_ideal(params.n + 1))?, &want)))?;
    r.check("alpha-prime-mod-top-ideal", || Ok(compare_maps(&residue_map(&ap.reduce_mod_ideal(params.n + 1))?, &want)))?;
    Ok(())
}

fn comparison_status(c: Comparison) -> Status {
    match c {
        Comparison::Equal => Status::Pass,
        Comparison::ForwardOnly => Status::UndecidedAtCutoff,
        Comparison::Mismatch => Status::Fail,
    }
}

/// Folds per-degree comparisons; the detail lists every degree that is not equal.
fn per_degree(results: &[(i64, Comparison, usize, usize)]) -> Outcome {
    let status = Status::worst(results.iter().map(|r| comparison_status(r.1)));
    let mut off: Vec<_> = results.iter().filter(|r| r.1 != Comparison::Equal).collect();
    off.sort_by_key(|r| (r.0.abs(), r.0));
    let detail = if off.is_empty() {
        format!("equal in {} degrees", results.len())
    } else {
        off.iter().map(|(d, c, a, b)| format!("degree {d}: {c:?} (ranks {a} vs {b})")).collect::<Vec<_>>().join("; ")
    };
    Outcome::new(status, detail)
}

fn filtration(cfg: &RunConfig, r: &mut Runner) -> Result<(), CliError> {
    let params = cfg.params()?;
    let window = DEFAULT_CHAIN_WINDOW;
    let margin = aring::default_kernel_margin(&params);
    let e = engine(cfg, aring::required_law_trunc(&params, window, margin))?;
    let w = params.w();
    let top = cfg.k.unwrap_or(w);
    let degrees = &cfg.degrees;
    r.output("window", window);
    r.output("kernel_margin", margin);
    let mut steps: Vec<ChainStep> = Vec::new();
    let mut chain_out = Vec::new();
    for k in 0..=top {
        let step = aring::chain_step(&e, k, window)?;
        chain_out.push(json!({
            "k": k,
            "phi_degree": step.degree(),
            "D_chain": step.trunc,
            "psi_accuracy": step.psi_accuracy,
            "theta": step.theta.render(),
        }));
        r.check(&format!("chain-{k}-theta"), || {
            let t = aring::theta_certificate(&e, &step)?;
            Ok(match t.certificate {
                Some(cert) => Outcome::certified(cert, format!("[p](t) ≡ θ_{k}(φ_{k}(t)) from {} coordinate queries", t.queries)),
                None => Outcome::new(Status::UndecidedAtCutoff, format!("undecided coordinates (i, j): {:?}", t.undecided)),
            })
        })?;
        steps.push(step);
    }
    r.output("chain", Value::Array(chain_out));
    if top == w {
        r.check("chain-remainder-mod-top-ideal", || {
            Ok(Outcome::flag(
                steps[w as usize].remainder_vanishes_mod_top_ideal(&params),
                format!("remainder of [p](t) by φ_{w} vanishes mod I_{}", params.n + 1),
            ))
        })?;
    }
    for k in 1..=top {
        r.check(&format!("chain-{k}-psi-ideal"), || {
            let res = aring::compare_with_psi(&e, &steps, k, degrees, window)?;
            Ok(per_degree(&res.iter().map(|c| (c.degree, c.comparison, c.rank_left, c.rank_right)).collect::<Vec<_>>()))
        })?;
    }
    for j in 0..=top.min(w - 1) {
        r.check(&format!("free-rank-{j}"), || {
            let mut bad = Vec::new();
            for &d in degrees {
                let rep = aring::free_rank_check(&e, &steps, j, d, window)?;
                if !rep.passed() {
                    bad.push(format!("degree {d}: length {} vs {}", rep.quotient_length, rep.predicted_length));
                }
            }
            Ok(if bad.is_empty() {
                Outcome::new(Status::Pass, format!("free of rank {} in {} degrees", steps[j as usize].degree(), degrees.len()))
            } else {
                Outcome::new(Status::Fail, bad.join("; "))
            })
        })?;
    }
    if top < w {
        return Ok(());
    }
    for j in 1..=w {
        for i in 0..j {
            r.check(&format!("chi{j}-psi{i}"), || {
                Ok(match aring::chi_psi_membership(&e, &steps, j, i)? {
                    Membership::Found(cert) => Outcome::certified(cert, format!("χ_{j}ψ_{i}(x_{i}) ∈ ([p](x_*))")),
                    Membership::NotFound => Outcome::new(Status::UndecidedAtCutoff, "no multipliers found within cutoff"),
                })
            })?;
        }
        r.check(&format!("annihilator-chi{j}"), || {
            let res: Vec<_> = degrees
                .iter()
                .map(|&d| {
                    aring::annihilator_check(&e, &steps, j, d, window, margin)
                        .map(|k| (k.degree, k.comparison, k.kernel_rank, k.expected_rank))
                })
                .collect::<bpbv::Result<_>>()?;
            Ok(per_degree(&res))
        })?;
    }
    for k in 0..=w {
        r.check(&format!("regularity-{k}"), || {
            let res: Vec<_> = degrees
                .iter()
                .map(|&d| {
                    aring::regularity_check(&e, k, d, window, margin).map(|k| (k.degree, k.comparison, k.kernel_rank, k.expected_rank))
                })
                .collect::<bpbv::Result<_>>()?;
            Ok(per_degree(&res))
        })?;
    }
    Ok(())
}

fn recheck(path: &Path, r: &mut Runner) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let cert = MembershipCertificate::from_json(&text)?;
    let residual = cert.residual();
    r.output("file_sha256", hex(&Sha256::digest(text.as_bytes())));
    r.output("d_eff", cert.d_eff);
    r.output("residual_order", residual.order().map_or(Value::Null, Value::from));
    r.check("recheck", || {
        Ok(if cert.recheck() {
            Outcome::new(Status::Pass, format!("residual vanishes through degree {}", cert.d_eff))
        } else {
            Outcome::new(Status::Fail, format!("residual starts in degree {}: {}", residual.order().unwrap_or(0), residual.render()))
        })
    })?;
    Ok(())
}
