//! Command-line front end. Every subcommand prints a JSON job report on
//! stdout; artifacts (certificates, witnesses, functionals) go to `--out`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cones::{evaluate_lex, separate_point};
use crate::error::Error;
use crate::groupalg::{laplacian, AlgebraElement, AlgebraSpec, Backend, Word};
use crate::json;
use crate::rcf::truncation_from_env;
use crate::repwitness::{refutation_witness, UNITARITY_TOLERANCE};
use crate::scalar::{fmt_rational, parse_rational};
use crate::soscone::sdp::SdpOptions;
use crate::soscone::{
    decide_sos_seeded, interior_shift_certificate, kazhdan_constant_finite, laplacian_bound,
    verify_certificate_report, GramBasis, Mode, SosVerdict, DEFAULT_SEED, FEASIBILITY_TOLERANCE,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_IN_CONE: i32 = 2;
pub const EXIT_WITNESS: i32 = 3;
pub const EXIT_UNDECIDED: i32 = 4;
pub const EXIT_MALFORMED: i32 = 64;

#[derive(Parser, Debug)]
#[command(name = "ncsos", version, about = "Sums of hermitian squares: certificates and refutations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Separate a point from a finitely generated cone by a lexicographic functional.
    Separate {
        /// Cone JSON: {"dim": n, "generators": [[...]]}.
        cone: PathBuf,
        /// Comma separated rationals, e.g. "-1,0".
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certify or refute membership of hermitian elements in the cone of sums of squares.
    Sos {
        /// Element JSON files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "full")]
        mode: String,
        /// Ball radius of the Gram basis (default: ceil(deg/2)).
        #[arg(long)]
        radius: Option<usize>,
        /// Certify b + shift·1 instead of b.
        #[arg(long)]
        shift: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Artifact path (a directory when several inputs are given).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a certificate, refutation witness or dual witness file.
    Verify { file: PathBuf },
    /// Laplacian domination constant C(b).
    LapBound {
        element: PathBuf,
        /// Comma separated generating words (default: standard generators).
        #[arg(long)]
        generators: Option<String>,
    },
    /// Spectral gap of the Laplacian of a finite group.
    Kazhdan {
        /// Algebra JSON of a finite backend.
        group: PathBuf,
        #[arg(long)]
        generators: Option<String>,
    },
}

struct Outcome {
    code: i32,
    report: Value,
}

fn digest(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn read(path: &Path) -> Result<String, Outcome> {
    fs::read_to_string(path).map_err(|e| failure("read", EXIT_MALFORMED, format!("{}: {e}", path.display())))
}

fn failure(command: &str, code: i32, message: String) -> Outcome {
    Outcome {
        code,
        report: json!({"command": command, "verdict": "error", "error": message}),
    }
}

fn error_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::InvalidGroupTable(_) => EXIT_MALFORMED,
        _ => EXIT_FAIL,
    }
}

fn write_artifact(path: &Path, v: &Value) -> Result<(), Outcome> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| failure("write", EXIT_FAIL, e.to_string()))?;
    }
    fs::write(path, json::to_pretty(v)).map_err(|e| failure("write", EXIT_FAIL, format!("{}: {e}", path.display())))
}

fn parse_words(spec: &AlgebraSpec, list: &str) -> crate::Result<Vec<Word>> {
    list.split(',').map(|w| spec.parse_word(w.trim())).collect()
}

fn solver_disclosure() -> Value {
    let o = SdpOptions::default();
    json!({
        "sdp_tolerance": o.tolerance,
        "max_iterations": o.max_iterations,
        "sdp_acceptable": o.acceptable,
        "feasibility_tolerance": FEASIBILITY_TOLERANCE,
    })
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_MALFORMED } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let start = Instant::now();
    let mut out = match cli.command {
        Command::Separate { cone, point, out } => separate(&cone, &point, out.as_deref()),
        Command::Sos {
            inputs,
            mode,
            radius,
            shift,
            seed,
            jobs,
            out,
        } => sos(&inputs, &mode, radius, shift.as_deref(), seed, jobs, out.as_deref()),
        Command::Verify { file } => verify(&file),
        Command::LapBound { element, generators } => lap_bound(&element, generators.as_deref()),
        Command::Kazhdan { group, generators } => kazhdan(&group, generators.as_deref()),
    };
    if let Value::Object(m) = &mut out.report {
        m.insert("exit_code".into(), json!(out.code));
        m.insert("timings".into(), json!({"total_ms": start.elapsed().as_millis() as u64}));
    }
    println!("{}", json::to_pretty(&out.report).trim_end());
    out.code
}

fn separate(cone_path: &Path, point: &str, out: Option<&Path>) -> Outcome {
    let text = match read(cone_path) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let parsed = json::parse(&text).and_then(|v| json::cone_from_json(&v));
    let cone = match parsed {
        Ok(c) => c,
        Err(e) => return failure("separate", error_code(&e), e.to_string()),
    };
    let x: Vec<_> = match point.split(',').map(|s| parse_rational(s.trim())).collect() {
        Ok(x) => x,
        Err(e) => return failure("separate", EXIT_MALFORMED, e.to_string()),
    };
    let mut report = json!({
        "command": "separate",
        "inputs_digest": digest(&[b"separate", text.as_bytes(), point.as_bytes()]),
        "truncation_order": truncation_from_env(),
    });
    let f = match separate_point(&cone, &x) {
        Ok(f) => f,
        Err(Error::PointInCone) => {
            report["verdict"] = json!("point_in_cone");
            return Outcome {
                code: EXIT_IN_CONE,
                report,
            };
        }
        Err(e) => return failure("separate", error_code(&e), e.to_string()),
    };
    let mut transcript = Vec::new();
    for (i, g) in cone.generators().iter().enumerate() {
        match evaluate_lex(&f, g) {
            Ok(v) => transcript.push(format!("generator {i}: phi = {v}")),
            Err(e) => return failure("separate", EXIT_FAIL, e.to_string()),
        }
    }
    match evaluate_lex(&f, &x) {
        Ok(v) => transcript.push(format!("point: phi = {v}")),
        Err(e) => return failure("separate", EXIT_FAIL, e.to_string()),
    }
    let stages = json::lex_to_json(&f);
    report["verdict"] = json!("separated");
    report["transcript"] = json!(transcript);
    match out {
        Some(p) => {
            if let Err(o) = write_artifact(p, &stages) {
                return o;
            }
            report["artifact"] = json!(p.display().to_string());
        }
        None => report["functional"] = stages,
    }
    Outcome { code: EXIT_OK, report }
}

#[allow(clippy::too_many_arguments)]
fn sos(
    inputs: &[PathBuf],
    mode: &str,
    radius: Option<usize>,
    shift: Option<&str>,
    seed: u64,
    jobs: usize,
    out: Option<&Path>,
) -> Outcome {
    let mode = match Mode::parse(mode) {
        Ok(m) => m,
        Err(e) => return failure("sos", EXIT_MALFORMED, e.to_string()),
    };
    let shift = match shift.map(parse_rational).transpose() {
        Ok(s) => s,
        Err(e) => return failure("sos", EXIT_MALFORMED, e.to_string()),
    };
    if inputs.len() == 1 {
        let artifact = out.map(Path::to_path_buf);
        return sos_one(&inputs[0], mode, radius, shift.as_ref(), seed, artifact, false);
    }
    let dir = out.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => return failure("sos", EXIT_FAIL, e.to_string()),
    };
    let results: Vec<Outcome> = pool.install(|| {
        inputs
            .par_iter()
            .map(|p| {
                let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                sos_one(p, mode, radius, shift.as_ref(), seed, Some(dir.join(stem)), true)
            })
            .collect()
    });
    let code = results.iter().map(|o| o.code).max().unwrap_or(EXIT_OK);
    Outcome {
        code,
        report: json!({
            "command": "sos",
            "verdict": "batch",
            "jobs": results.into_iter().map(|o| {
                let mut r = o.report;
                r["exit_code"] = json!(o.code);
                r
            }).collect::<Vec<_>>(),
        }),
    }
}

fn with_suffix(base: &Option<PathBuf>, default: &str, suffix: &str, batch: bool) -> PathBuf {
    match base {
        Some(p) if batch => PathBuf::from(format!("{}.{suffix}.json", p.display())),
        Some(p) => p.clone(),
        None => PathBuf::from(default),
    }
}

fn sos_one(
    path: &Path,
    mode: Mode,
    radius: Option<usize>,
    shift: Option<&crate::Rational>,
    seed: u64,
    out: Option<PathBuf>,
    batch: bool,
) -> Outcome {
    let text = match read(path) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let b = match json::parse(&text).and_then(|v| json::element_from_json(&v)) {
        Ok(b) => b,
        Err(e) => return failure("sos", error_code(&e), e.to_string()),
    };
    if !b.is_hermitian() {
        return failure("sos", EXIT_FAIL, Error::NonHermitianElement.to_string());
    }
    let spec = b.spec().clone();
    let r = radius.unwrap_or_else(|| b.degree().div_ceil(2));
    let basis = GramBasis::with_radius(&spec, mode, r);
    let shift_text = shift.map(fmt_rational);
    let mut report = json!({
        "command": "sos",
        "input": path.display().to_string(),
        "inputs_digest": digest(&[
            b"sos",
            text.as_bytes(),
            mode.as_str().as_bytes(),
            r.to_string().as_bytes(),
            shift_text.as_deref().unwrap_or("").as_bytes(),
            seed.to_string().as_bytes(),
        ]),
        "backend": spec.name(),
        "mode": mode.as_str(),
        "radius": r,
        "shift": shift_text,
        "seed": seed,
        "solver": solver_disclosure(),
        "disclosures": [
            format!("statements hold for Gram bases of ball radius {r}; infeasibility does not exclude higher-degree certificates"),
        ],
    });
    if mode == Mode::Augmentation {
        report["disclosures"]
            .as_array_mut()
            .unwrap()
            .push(json!("augmentation mode: finite sums of squares of elements of the augmentation ideal"));
    }
    let cert_path = with_suffix(&out, "certificate.json", "cert", batch);
    let witness_path = with_suffix(&out, "witness.json", "witness", batch);

    if let Some(eta) = shift {
        return match interior_shift_certificate(&b, eta, &basis) {
            Ok(cert) => emit_certificate(report, &cert, &cert_path, r),
            Err(e) => undecided(report, &e, r),
        };
    }
    match decide_sos_seeded(&b, &basis, seed) {
        Ok(SosVerdict::Certified(cert)) => emit_certificate(report, &cert, &cert_path, r),
        Ok(SosVerdict::Refuted(phi)) => {
            report["dual_value"] = json!(fmt_rational(&phi.value_at_target));
            match spec.backend {
                Backend::Free(_) | Backend::FreeStar { .. } => {
                    // the representation needs moments one radius further out
                    let wider = GramBasis::with_radius(&spec, Mode::Full, r + 1);
                    match decide_sos_seeded(&b, &wider, seed) {
                        Ok(SosVerdict::Refuted(phi2)) => match refutation_witness(&b, &phi2) {
                            Ok(w) => {
                                let v = json::witness_to_json(&w);
                                if let Err(o) = write_artifact(&witness_path, &v) {
                                    return o;
                                }
                                report["verdict"] = json!("witness");
                                report["witness_value"] = json!(w.value);
                                report["witness_dimension"] = json!(w.state.len());
                                report["artifact"] = json!(witness_path.display().to_string());
                                Outcome {
                                    code: EXIT_WITNESS,
                                    report,
                                }
                            }
                            Err(e) => undecided(report, &e, r),
                        },
                        Ok(SosVerdict::Certified(cert)) => {
                            report["disclosures"]
                                .as_array_mut()
                                .unwrap()
                                .push(json!(format!("refuted at radius {r}, certified at radius {}", r + 1)));
                            emit_certificate(report, &cert, &cert_path, r + 1)
                        }
                        Err(e) => undecided(report, &e, r),
                    }
                }
                _ => {
                    let mut v = json::dual_witness_to_json(&phi);
                    v["target"] = json::element_to_json(&b);
                    if let Err(o) = write_artifact(&witness_path, &v) {
                        return o;
                    }
                    report["verdict"] = json!("dual_witness");
                    report["artifact"] = json!(witness_path.display().to_string());
                    Outcome {
                        code: EXIT_WITNESS,
                        report,
                    }
                }
            }
        }
        Err(e) => undecided(report, &e, r),
    }
}

fn emit_certificate(mut report: Value, cert: &crate::soscone::SosCertificate, path: &Path, r: usize) -> Outcome {
    if let Err(o) = write_artifact(path, &json::certificate_to_json(cert)) {
        return o;
    }
    report["verdict"] = json!("certificate");
    report["certified_radius"] = json!(r);
    report["squares"] = json!(cert.squares.len());
    report["artifact"] = json!(path.display().to_string());
    Outcome { code: EXIT_OK, report }
}

fn undecided(mut report: Value, e: &Error, r: usize) -> Outcome {
    if matches!(e, Error::NonHermitianElement | Error::Parse(_)) {
        return failure("sos", error_code(e), e.to_string());
    }
    report["verdict"] = json!("undecided");
    report["reason"] = json!(e.to_string());
    report["advice"] = json!(format!(
        "undecided at radius {r}: retry with --radius {} or an interior --shift",
        r + 1
    ));
    Outcome {
        code: EXIT_UNDECIDED,
        report,
    }
}

fn verify(path: &Path) -> Outcome {
    let text = match read(path) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let v = match json::parse(&text) {
        Ok(v) => v,
        Err(e) => return failure("verify", EXIT_MALFORMED, e.to_string()),
    };
    let mut report = json!({
        "command": "verify",
        "file": path.display().to_string(),
        "inputs_digest": digest(&[b"verify", text.as_bytes()]),
    });
    let (ok, kind, problem) = if v.get("squares").is_some() {
        match json::certificate_from_json(&v) {
            Ok(c) => {
                let r = verify_certificate_report(&c);
                (r.ok, "certificate", r.problem)
            }
            Err(e) => return failure("verify", error_code(&e), e.to_string()),
        }
    } else if v.get("moment_matrix").is_some() {
        let parsed = json::dual_witness_from_json(&v).and_then(|w| {
            let target = json::element_in(&w.spec, v.get("target").ok_or(Error::Parse("missing target".into()))?)?;
            Ok((w, target))
        });
        match parsed {
            Ok((w, target)) => {
                let stored = v["moment_matrix"].clone();
                let recomputed = json::dual_witness_to_json(&w)["moment_matrix"].clone();
                if stored != recomputed {
                    (false, "dual_witness", Some("stored moment matrix differs from the functional".into()))
                } else if w.verify(&target) {
                    (true, "dual_witness", None)
                } else {
                    (false, "dual_witness", Some("moment matrix not PSD or value not negative".into()))
                }
            }
            Err(e) => return failure("verify", error_code(&e), e.to_string()),
        }
    } else if v.get("generators").is_some() {
        match json::witness_from_json(&v) {
            Ok(w) => match w.replay() {
                Ok(value) => {
                    let unit = w.max_unitarity_residual();
                    report["replayed_value"] = json!(value.re);
                    let problem = if (value.re - w.value).abs() > 1e-8 || value.im.abs() > 1e-8 {
                        Some(format!("replayed value {} differs from stored {}", value.re, w.value))
                    } else if unit > UNITARITY_TOLERANCE {
                        Some(format!("unitarity residual {unit:.3e}"))
                    } else if w.value >= 0.0 {
                        Some("value is not negative".into())
                    } else if (w.state.norm() - 1.0).abs() > 1e-9 {
                        Some("state is not a unit vector".into())
                    } else {
                        None
                    };
                    (problem.is_none(), "witness", problem)
                }
                Err(e) => (false, "witness", Some(e.to_string())),
            },
            Err(e) => return failure("verify", error_code(&e), e.to_string()),
        }
    } else {
        return failure("verify", EXIT_MALFORMED, "unrecognized artifact".into());
    };
    report["kind"] = json!(kind);
    report["verdict"] = json!(if ok { "valid" } else { "invalid" });
    if let Some(p) = problem {
        report["first_mismatch"] = json!(p);
    }
    Outcome {
        code: if ok { EXIT_OK } else { EXIT_FAIL },
        report,
    }
}

fn load_element(path: &Path, command: &str) -> Result<(String, AlgebraElement), Outcome> {
    let text = read(path)?;
    let b = json::parse(&text)
        .and_then(|v| json::element_from_json(&v))
        .map_err(|e| failure(command, error_code(&e), e.to_string()))?;
    Ok((text, b))
}

fn lap_bound(path: &Path, generators: Option<&str>) -> Outcome {
    let (text, b) = match load_element(path, "lap-bound") {
        Ok(x) => x,
        Err(o) => return o,
    };
    let spec = b.spec().clone();
    let s = match generators.map(|g| parse_words(&spec, g)).transpose() {
        Ok(s) => s.unwrap_or_else(|| spec.symmetric_generators()),
        Err(e) => return failure("lap-bound", EXIT_MALFORMED, e.to_string()),
    };
    match laplacian_bound(&b, &s) {
        Ok(c) => Outcome {
            code: EXIT_OK,
            report: json!({
                "command": "lap-bound",
                "inputs_digest": digest(&[b"lap-bound", text.as_bytes(), generators.unwrap_or("").as_bytes()]),
                "verdict": "bound",
                "generators": s.iter().map(|w| spec.format_word(w)).collect::<Vec<_>>(),
                "constant": fmt_rational(&c),
                "cross_term_constant": "442/625",
            }),
        },
        Err(e) => failure("lap-bound", error_code(&e), e.to_string()),
    }
}

fn kazhdan(path: &Path, generators: Option<&str>) -> Outcome {
    let text = match read(path) {
        Ok(t) => t,
        Err(o) => return o,
    };
    let spec = match json::parse(&text).and_then(|v| json::spec_from_json(&v)) {
        Ok(s) => s,
        Err(e) => return failure("kazhdan", error_code(&e), e.to_string()),
    };
    let s = match generators.map(|g| parse_words(&spec, g)).transpose() {
        Ok(s) => s.unwrap_or_else(|| spec.symmetric_generators()),
        Err(e) => return failure("kazhdan", EXIT_MALFORMED, e.to_string()),
    };
    let mut report = json!({
        "command": "kazhdan",
        "inputs_digest": digest(&[b"kazhdan", text.as_bytes(), generators.unwrap_or("").as_bytes()]),
        "generators": s.iter().map(|w| spec.format_word(w)).collect::<Vec<_>>(),
    });
    if let Err(e) = laplacian(&spec, &s) {
        return failure("kazhdan", EXIT_FAIL, e.to_string());
    }
    match kazhdan_constant_finite(&spec, &s) {
        Ok(k) => {
            report["verdict"] = json!("gap");
            report["gap_lower"] = json!(fmt_rational(&k.lower));
            report["gap_upper"] = json!(fmt_rational(&k.upper));
            report["gap"] = match &k.exact {
                Some(e) => json!(fmt_rational(e)),
                None => json!(k.value()),
            };
            Outcome { code: EXIT_OK, report }
        }
        Err(Error::NotGenerating { kernel_dim }) => {
            report["verdict"] = json!("not_generating");
            report["gap"] = json!("0");
            report["kernel_dimension"] = json!(kernel_dim);
            Outcome { code: EXIT_OK, report }
        }
        Err(e) => failure("kazhdan", error_code(&e), e.to_string()),
    }
}
