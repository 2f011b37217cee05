use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

use anomaly_core::arith::NatPrime;
use anomaly_core::curve::{Curve, QPoint};
use anomaly_core::fp::FpPoint;
use anomaly_core::ingest::ingest_curves;
use anomaly_core::local::{decompose_point, LocalCurve};
use anomaly_core::padic::DEFAULT_PRECISION;
use anomaly_core::quadratic::{anomalous_residues_d3, ImagQuadField};
use anomaly_core::survey::{emit_report, scan_family, survey_curves, FamilySpec, ReportFormat, RowSettings};
use anomaly_core::verdict::{
    all_verdicts, global_lift_verdict, prime_admissibility, AdmissibilityConfig, Conclusion,
    HypothesisRecord,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "anomaly", version, about = "Anomalous primes, torsion lifts and local decompositions")]
struct Cli {
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// p-adic working precision in digits.
    #[arg(long, global = true, value_name = "N", default_value_t = DEFAULT_PRECISION)]
    prec: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CurveArgs {
    /// Coefficient A of y^2 = x^3 + Ax + B.
    #[arg(long, allow_hyphen_values = true)]
    a: BigInt,
    /// Coefficient B of y^2 = x^3 + Ax + B.
    #[arg(long, allow_hyphen_values = true)]
    b: BigInt,
    /// Prime p >= 5.
    #[arg(long)]
    p: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Primes 5 <= p <= bound with 4p = 1 + |D| v^2.
    AnomalousPrimes {
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
        #[arg(long)]
        bound: u64,
    },
    /// Residues c mod p with y^2 = x^3 + c anomalous, for 4p = 1 + 3v^2.
    AnomalousResidues {
        #[arg(long)]
        p: u64,
    },
    /// Reduction type at p.
    Classify {
        #[command(flatten)]
        curve: CurveArgs,
    },
    /// Reduction, point count, CM field and splitting at p.
    CheckCurve {
        #[command(flatten)]
        curve: CurveArgs,
        /// Field discriminant; defaults to the CM field read off j.
        #[arg(long, allow_hyphen_values = true)]
        disc: Option<i64>,
    },
    /// Lift an F_p-point to a Q_p-point of order p.
    LiftTorsion {
        #[command(flatten)]
        curve: CurveArgs,
        /// Target as x,y mod p.
        #[arg(long)]
        target: String,
    },
    /// Split P = F + T0 and report v(t(F)).
    Decompose {
        #[command(flatten)]
        curve: CurveArgs,
        /// Point as x_num,x_den,y_num,y_den.
        #[arg(long, allow_hyphen_values = true)]
        gen: String,
    },
    /// Evaluate every decision rule on the curve at p.
    Verdict(VerdictArgs),
    /// Scan the family y^2 = x^3 + (a0 + a1 n)x + (b0 + b1 n).
    Scan(ScanArgs),
    /// Survey the curves listed in a record file.
    Report(ReportArgs),
}

#[derive(Args)]
struct VerdictArgs {
    #[command(flatten)]
    curve: CurveArgs,
    /// Asserted CM field discriminant.
    #[arg(long, allow_hyphen_values = true)]
    disc: Option<i64>,
    /// Rational point x_num,x_den,y_num,y_den for the global lift rule.
    #[arg(long, allow_hyphen_values = true)]
    gen: Option<String>,
    /// Assert the base field is unramified over Q_p.
    #[arg(long)]
    unramified: bool,
    /// Assert full p^n-torsion at level n.
    #[arg(long)]
    torsion_level: Option<u32>,
    /// Assert wild ramification of k(A[p^(n+1)])/k.
    #[arg(long)]
    wild: bool,
    /// Assert trivial Galois action on NS.
    #[arg(long)]
    trivial_ns: bool,
    /// Assert the diagonal quartic has good reduction.
    #[arg(long)]
    quartic_good: bool,
    /// Level n of the torsion tower k_n for the CM rule.
    #[arg(long)]
    tower: Option<u32>,
    /// Isogeny degree for admissibility.
    #[arg(long, default_value_t = 1)]
    isogeny_degree: u64,
    /// Field degree [K:F] for admissibility.
    #[arg(long, default_value_t = 1)]
    field_degree: u64,
    /// Asserted orders N_v, comma separated.
    #[arg(long, value_delimiter = ',')]
    nv: Vec<u64>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    a0: i64,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    a1: i64,
    #[arg(long, allow_hyphen_values = true, default_value = "-2")]
    b0: i64,
    #[arg(long, allow_hyphen_values = true, default_value = "7")]
    b1: i64,
    #[arg(long, allow_hyphen_values = true)]
    n_min: i64,
    #[arg(long, allow_hyphen_values = true)]
    n_max: i64,
    #[arg(long, default_value_t = 7)]
    p: u64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -3)]
    disc: i64,
    #[arg(long, default_value_t = 10_000)]
    height: u64,
    /// Record file with generators to use instead of the search.
    #[arg(long)]
    ingest: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Record file, one curve per line.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 7)]
    p: u64,
    #[arg(long, allow_hyphen_values = true, default_value_t = -3)]
    disc: i64,
    #[arg(long, default_value_t = 10_000)]
    height: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// A domain failure: printed structurally, exit status 1.
struct Failure {
    kind: &'static str,
    message: String,
}

fn fail<E: Display>(kind: &'static str) -> impl Fn(E) -> Failure {
    move |e| Failure {
        kind,
        message: e.to_string(),
    }
}

/// Successful output: JSON value plus its text rendering.
struct Output {
    json: Value,
    text: String,
}

fn prime(p: u64) -> Result<NatPrime, Failure> {
    NatPrime::new(p).map_err(fail("input"))
}

fn curve_of(c: &CurveArgs) -> Result<(Curve, NatPrime), Failure> {
    let curve = Curve::new(c.a.clone(), c.b.clone()).map_err(fail("curve"))?;
    Ok((curve, prime(c.p)?))
}

fn field(d: i64) -> Result<ImagQuadField, Failure> {
    ImagQuadField::new(d).map_err(fail("input"))
}

fn parse_ints(text: &str, n: usize, what: &str) -> Result<Vec<BigInt>, Failure> {
    let parts: Result<Vec<BigInt>, _> = text.split(',').map(|s| s.trim().parse::<BigInt>()).collect();
    match parts {
        Ok(v) if v.len() == n => Ok(v),
        _ => Err(Failure {
            kind: "input",
            message: format!("{what} must be {n} comma-separated integers, got {text:?}"),
        }),
    }
}

fn parse_point(text: &str, curve: &Curve) -> Result<QPoint, Failure> {
    let v = parse_ints(text, 4, "--gen")?;
    let parts: [BigInt; 4] = v.try_into().expect("length checked");
    let pt = QPoint::from_fractions(parts).ok_or(Failure {
        kind: "input",
        message: "denominators must be positive".into(),
    })?;
    if !curve.contains(&pt) {
        return Err(Failure {
            kind: "curve",
            message: format!("{pt} is not on {curve}"),
        });
    }
    Ok(pt)
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::AnomalousPrimes { disc, bound } => {
            let k = field(*disc)?;
            let primes: Vec<String> = k.anomalous_primes(*bound).iter().map(|p| p.get().to_string()).collect();
            Ok(Output {
                text: primes.join("\n"),
                json: json!({
                    "discriminant": disc.to_string(),
                    "bound": bound.to_string(),
                    "primes": primes,
                }),
            })
        }
        Command::AnomalousResidues { p } => {
            let p = prime(*p)?;
            let residues = anomalous_residues_d3(p).map_err(fail("domain"))?;
            let list: Vec<String> = residues.iter().map(|c| c.to_string()).collect();
            Ok(Output {
                text: format!("{} classes mod {}: {}", list.len(), p, list.join(" ")),
                json: json!({
                    "p": p.get().to_string(),
                    "count": list.len().to_string(),
                    "expected": ((p.get() - 1) / 6).to_string(),
                    "residues": list,
                }),
            })
        }
        Command::Classify { curve } => {
            let (e, p) = curve_of(curve)?;
            let r = e.reduction_type(p).map_err(fail("domain"))?;
            let mut json = json!({
                "curve": e.to_string(),
                "p": p.get().to_string(),
                "reduction": r.kind,
                "anomalous": r.anomalous,
            });
            if r.is_good() {
                let fp = e.reduce(p).map_err(fail("domain"))?;
                let count = fp.count_points().map_err(fail("domain"))?;
                json["count"] = json!(count.to_string());
                json["trace"] = json!((p.get() as i64 + 1 - count as i64).to_string());
            }
            Ok(Output {
                text: format!("{} at {}: {}{}", e, p, r.kind, if r.anomalous { ", anomalous" } else { "" }),
                json,
            })
        }
        Command::CheckCurve { curve, disc } => {
            let (e, p) = curve_of(curve)?;
            let r = e.reduction_type(p).map_err(fail("domain"))?;
            let detected = ImagQuadField::from_j_invariant(&e);
            let k = match disc {
                Some(d) => Some(field(*d)?),
                None => detected,
            };
            let mut json = json!({
                "curve": e.to_string(),
                "p": p.get().to_string(),
                "discriminant": e.discriminant().to_string(),
                "j_invariant": e.j_invariant().to_string(),
                "cm_field_from_j": detected.map(|k| k.discriminant().to_string()),
                "good": r.is_good(),
                "reduction": r.kind,
                "ordinary": r.is_good_ordinary(),
                "anomalous": r.anomalous,
            });
            let mut words = vec![r.kind.to_string()];
            let mut trace = None;
            if r.is_good() {
                let fp = e.reduce(p).map_err(fail("domain"))?;
                let count = fp.count_points().map_err(fail("domain"))?;
                let t = p.get() as i64 + 1 - count as i64;
                trace = Some(t);
                json["count"] = json!(count.to_string());
                json["trace"] = json!(t.to_string());
            }
            words.push(if r.anomalous { "anomalous" } else { "not anomalous" }.into());
            if let Some(k) = k {
                let splits = k.splits_completely(p);
                json["field"] = json!(k.discriminant().to_string());
                json["splits"] = json!(splits);
                words.push(format!("{} in {}", if splits { "splits" } else { "does not split" }, k));
                if let (true, Some(t)) = (splits, trace) {
                    if let Ok(pair) = k.frobenius_candidates(p, t) {
                        json["frobenius"] = json!({
                            "eta": pair.eta(),
                            "eta_bar": pair.eta_bar(),
                            "norm": pair.norm().to_string(),
                        });
                    }
                }
            }
            Ok(Output {
                text: format!("{} at {}: {}", e, p, words.join(", ")),
                json,
            })
        }
        Command::LiftTorsion { curve, target } => {
            let (e, p) = curve_of(curve)?;
            let xy = parse_ints(target, 2, "--target")?;
            let residue = |n: &BigInt| -> u64 {
                let m = BigInt::from(p.get());
                ((n % &m + &m) % &m).try_into().expect("residue fits")
            };
            let target = FpPoint::Affine {
                x: residue(&xy[0]),
                y: residue(&xy[1]),
            };
            let local = LocalCurve::new(&e, p).map_err(fail("domain"))?;
            let t0 = local.lift_p_torsion(&target, cli.prec).map_err(fail("domain"))?;
            let torsion = local
                .scalar_mul(p.get() as i64, &t0)
                .map_err(fail("precision"))?
                .is_identity();
            Ok(Output {
                text: format!("T0 = {t0}\n[{p}]T0 = O: {torsion}"),
                json: json!({
                    "p": p.get().to_string(),
                    "target": target,
                    "t0": t0,
                    "precision": cli.prec.to_string(),
                    "torsion_verified": torsion,
                }),
            })
        }
        Command::Decompose { curve, gen } => {
            let (e, p) = curve_of(curve)?;
            let pt = parse_point(gen, &e)?;
            let dec = decompose_point(&e, &pt, p, cli.prec).map_err(fail("domain"))?;
            let verified = dec.verify(&pt);
            let mut json = serde_json::to_value(&dec).expect("serializable");
            json["verified"] = json!(verified.is_ok());
            Ok(Output {
                text: format!("{dec}\ncheck F + T0 = P, F in E_1, [p]T0 = O: {}", verified.is_ok()),
                json,
            })
        }
        Command::Verdict(args) => verdict(cli, args),
        Command::Scan(args) => {
            let spec = FamilySpec::new(
                (args.a0, args.a1),
                (args.b0, args.b1),
                (args.n_min, args.n_max),
                prime(args.p)?,
                field(args.disc)?,
                args.height,
            )
            .map_err(fail("input"))?;
            let mut spec = FamilySpec {
                precision: cli.prec,
                ..spec
            };
            if let Some(path) = &args.ingest {
                let ingested = ingest_curves(path).map_err(fail("io"))?;
                for issue in ingested.malformed.iter().chain(&ingested.rejected) {
                    eprintln!("{}:{}: {}", path.display(), issue.line, issue.reason);
                }
                for c in ingested.curves {
                    if let Some(g) = c.generator {
                        spec = spec.with_generator(c.curve.a().clone(), c.curve.b().clone(), g);
                    }
                }
            }
            let report = scan_family(&spec);
            write_report(&report, args.format, &args.output, cli.json)
        }
        Command::Report(args) => {
            let ingested = ingest_curves(&args.input).map_err(fail("io"))?;
            for issue in ingested.malformed.iter().chain(&ingested.rejected) {
                eprintln!("{}:{}: {}", args.input.display(), issue.line, issue.reason);
            }
            let settings = RowSettings {
                p: prime(args.p)?,
                field: field(args.disc)?,
                height: args.height,
                precision: cli.prec,
            };
            let report = survey_curves(&ingested.curves, &settings);
            write_report(&report, args.format, &args.output, cli.json)
        }
    }
}

fn verdict(cli: &Cli, args: &VerdictArgs) -> Result<Output, Failure> {
    let (e, p) = curve_of(&args.curve)?;
    let mut h = HypothesisRecord::for_curve(&e, p);
    if let Some(d) = args.disc {
        h = h.with_cm(field(d)?);
    }
    if args.unramified {
        h = h.with_unramified(true);
    }
    if let Some(n) = args.torsion_level {
        h = h.with_torsion_level(n);
    }
    if args.wild {
        h = h.with_wild_ramification(true);
    }
    if args.trivial_ns {
        h = h.with_trivial_ns_action(true);
    }
    if args.quartic_good {
        h = h.with_quartic_good_reduction(true);
    }
    let mut verdicts = all_verdicts(&h, args.tower);
    let mut decomposition = None;
    if let Some(gen) = &args.gen {
        let pt = parse_point(gen, &e)?;
        let dec = decompose_point(&e, &pt, p, cli.prec).map_err(fail("domain"))?;
        let prior = verdicts
            .iter()
            .find(|v| v.conclusion == Conclusion::MiddleTermZpSquared)
            .cloned();
        verdicts.extend(global_lift_verdict(&dec, prior.as_ref()));
        decomposition = Some(dec);
    }
    let cfg = AdmissibilityConfig {
        isogeny_degree: args.isogeny_degree,
        field_degree: args.field_degree,
        asserted_nv: args.nv.clone(),
    };
    let admissibility = prime_admissibility(&e, &e, p, &cfg);
    let mut lines: Vec<String> = verdicts.iter().map(|v| v.to_string()).collect();
    if lines.is_empty() {
        lines.push("no rule fires".into());
    }
    lines.push(format!(
        "admissible at {}: {}",
        p,
        admissibility.admissible
    ));
    if let Some(d) = &decomposition {
        lines.push(d.to_string());
    }
    Ok(Output {
        text: lines.join("\n"),
        json: json!({
            "curve": e.to_string(),
            "p": p.get().to_string(),
            "record": h,
            "verdicts": verdicts,
            "admissibility": admissibility,
            "decomposition": decomposition,
        }),
    })
}

fn write_report(
    report: &anomaly_core::survey::SurveyReport,
    format: Format,
    output: &Option<PathBuf>,
    json: bool,
) -> Result<Output, Failure> {
    let format = match (json, format) {
        (true, _) | (_, Format::Json) => ReportFormat::Json,
        _ => ReportFormat::Csv,
    };
    let body = emit_report(report, format);
    match output {
        None => Ok(Output {
            json: serde_json::from_str(&body).unwrap_or(Value::Null),
            text: body.trim_end().to_string(),
        }),
        Some(path) => {
            std::fs::write(path, &body).map_err(fail("io"))?;
            Ok(Output {
                text: format!("wrote {} rows to {}", report.rows.len(), path.display()),
                json: json!({
                    "output": path.display().to_string(),
                    "rows": report.rows.len().to_string(),
                    "aggregate": report.aggregate,
                    "note": report.note,
                }),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("serializable"));
            } else {
                println!("{}", out.text);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&json!({"error": {"kind": f.kind, "message": f.message}}))
                        .expect("serializable")
                );
            } else {
                eprintln!("error ({}): {}", f.kind, f.message);
            }
            ExitCode::from(1)
        }
    }
}
