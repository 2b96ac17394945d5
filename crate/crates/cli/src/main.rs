use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sixops::derived::{self, Factorization};
use sixops::field::{Field, Fp, Q};
use sixops::io::{opens_to_json, parse_sheaf, sheaf_site_ref, stalks_to_json, SheafData, SiteModel};
use sixops::laws::{self, SuiteConfig};
use sixops::models::{self, Model};
use sixops::pointset::PointSet;
use sixops::presheaf::Presheaf;
use sixops::report::{self, Report};
use sixops::rho::{self, Rho};
use sixops::sheaf::StalkSheaf;
use sixops::site::validate_gt_axioms;

#[derive(Parser)]
#[command(name = "sixops", version, about = "Exact sheaf operations on finite sites")]
struct Cli {
    /// Coefficient field: `q` or `fp:<p>` with p in 2, 3, 5, 7.
    #[arg(long, global = true, env = "SIXOPS_FIELD", default_value = "q")]
    field: String,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a model (and optionally a sheaf on it) and check the covering axioms.
    Validate {
        model: String,
        #[arg(long)]
        sheaf: Option<PathBuf>,
    },
    /// Graded dimensions of H^k(X; F); F defaults to the constant sheaf.
    Cohomology {
        /// Shipped model names or files; all shipped complexes when omitted.
        models: Vec<String>,
        #[arg(long)]
        sheaf: Option<PathBuf>,
        /// Compare with Cech cohomology of the vertex-star cover.
        #[arg(long)]
        cech: bool,
    },
    /// Run the law suite.
    Verify {
        #[arg(long = "law")]
        laws: Vec<String>,
        #[arg(long = "model")]
        models: Vec<String>,
        /// Restrict the shipped map catalog, e.g. `circle->pt`.
        #[arg(long = "map")]
        maps: Vec<String>,
        /// Rerun one trial of a single law from its trial seed.
        #[arg(long)]
        replay: Option<u64>,
        /// List the laws and shipped maps instead of running.
        #[arg(long)]
        list: bool,
    },
    /// The comparison functors between a fine site and a coarse subsite.
    Rho {
        #[command(subcommand)]
        op: RhoOp,
    },
    /// f^!G for a shipped factorized map (G defaults to the constant sheaf).
    Shriek {
        map: String,
        #[arg(long)]
        sheaf: Option<PathBuf>,
    },
    /// D'F = RHom(F, k) (F defaults to the constant sheaf).
    Dual {
        model: String,
        #[arg(long)]
        sheaf: Option<PathBuf>,
    },
    /// The l.c.t. predicate for an open (comma-separated points), or every vertex star.
    Lct {
        model: String,
        #[arg(long)]
        open: Option<String>,
    },
    /// Full suite plus cohomology table of the shipped complexes.
    Report {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "law")]
        laws: Vec<String>,
    },
}

#[derive(Subcommand)]
enum RhoOp {
    /// rho_* of a fine sheaf.
    Direct { site: String, sheaf: PathBuf },
    /// rho^-1 of a coarse sheaf.
    Inverse { site: String, sheaf: PathBuf },
    /// rho_! of a fine sheaf.
    Shriek { site: String, sheaf: PathBuf },
    /// Run the rho laws on the given coarse sites (all shipped ones by default).
    Laws { sites: Vec<String> },
}

/// A command failure, mapped to the exit code.
enum Fail {
    Input(String),
    Law,
}

impl<E: std::fmt::Display> From<E> for Fail {
    fn from(e: E) -> Self {
        Fail::Input(e.to_string())
    }
}

type Res = Result<(), Fail>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match parse_field(&cli.field) {
        Some(p) => dispatch(&cli, p),
        None => Err(Fail::Input(format!("unknown field {:?}; use q or fp:<p>", cli.field))),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::Law) => ExitCode::from(1),
        Err(Fail::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

const PRIMES: [u64; 4] = [2, 3, 5, 7];

/// `0` is Q, otherwise the prime.
fn parse_field(s: &str) -> Option<u64> {
    let s = s.trim().to_ascii_lowercase();
    if s == "q" {
        return Some(0);
    }
    let p: u64 = s.strip_prefix("fp:")?.parse().ok()?;
    PRIMES.contains(&p).then_some(p)
}

macro_rules! by_field {
    ($p:expr, $f:ident, $e:expr) => {
        match $p {
            0 => $f::<Q>($e),
            2 => $f::<Fp<2>>($e),
            3 => $f::<Fp<3>>($e),
            5 => $f::<Fp<5>>($e),
            7 => $f::<Fp<7>>($e),
            _ => unreachable!("checked prime"),
        }
    };
}

fn dispatch(cli: &Cli, p: u64) -> Res {
    by_field!(p, run, cli)
}

fn run<F: Field>(cli: &Cli) -> Res {
    match &cli.cmd {
        Cmd::Validate { model, sheaf } => validate::<F>(cli, model, sheaf.as_deref()),
        Cmd::Cohomology { models, sheaf, cech } => cohomology::<F>(cli, models, sheaf.as_deref(), *cech),
        Cmd::Verify { laws, models, maps, replay, list } => {
            if *list {
                return list_laws(cli);
            }
            verify::<F>(cli, laws, models, maps, *replay)
        }
        Cmd::Rho { op } => rho_cmd::<F>(cli, op),
        Cmd::Shriek { map, sheaf } => shriek::<F>(cli, map, sheaf.as_deref()),
        Cmd::Dual { model, sheaf } => dual::<F>(cli, model, sheaf.as_deref()),
        Cmd::Lct { model, open } => lct::<F>(cli, model, open.as_deref()),
        Cmd::Report { out, laws } => report_cmd::<F>(cli, out.as_deref(), laws),
    }
}

/// A shipped model name or a path to a model file.
fn load_model(arg: &str) -> Result<(String, Model), Fail> {
    if let Some(m) = models::shipped(arg) {
        return Ok((arg.to_string(), m));
    }
    let path = Path::new(arg);
    let text = fs::read_to_string(path).map_err(|e| Fail::Input(format!("{arg}: {e}")))?;
    let file = path.file_name().and_then(|n| n.to_str()).unwrap_or(arg);
    let m = models::parse_model(file, &text).map_err(|e| Fail::Input(format!("{arg}: {e}")))?;
    let name = file.split('.').next().unwrap_or(file).to_string();
    Ok((name, m))
}

fn load_sheaf<F: Field>(path: &Path, model: &Model) -> Result<SheafData<F>, Fail> {
    let text = fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))?;
    parse_sheaf::<F>(&text, model.site()).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

/// The model a sheaf file refers to, resolved relative to the sheaf file.
fn model_of_sheaf(path: &Path) -> Result<(String, Model), Fail> {
    let text = fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))?;
    let r = sheaf_site_ref(&text).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))?;
    if models::shipped(&r).is_some() {
        return load_model(&r);
    }
    let rel = path.parent().map(|d| d.join(&r)).unwrap_or_else(|| PathBuf::from(&r));
    load_model(rel.to_str().unwrap_or(&r))
}

fn stalk_sheaf<F: Field>(path: Option<&Path>, model: &Model) -> Result<(String, StalkSheaf<F>), Fail> {
    match path {
        None => Ok(("constant".into(), StalkSheaf::constant(model.space()))),
        Some(p) => match load_sheaf::<F>(p, model)? {
            SheafData::Stalks(s) => Ok((p.display().to_string(), s)),
            SheafData::Opens(_) => Err(Fail::Input(format!("{}: expected a stalks representation", p.display()))),
        },
    }
}

fn emit(cli: &Cli, text: String, value: Value) {
    match cli.format {
        Format::Text => print!("{text}"),
        Format::Json => println!("{}", serde_json::to_string_pretty(&value).expect("json")),
    }
}

fn validate<F: Field>(cli: &Cli, arg: &str, sheaf: Option<&Path>) -> Res {
    let (name, m) = load_model(arg)?;
    let site = m.site();
    let r = validate_gt_axioms(&site.site, 200, cli.seed);
    let mut text = format!("{name}: {} points, {}\n", site.space.len(), if site.is_coarse() { "coarse site" } else { "Alexandrov site" });
    for c in &r.checks {
        text.push_str(&format!(
            "  {} {} ({} checked{})",
            c.axiom,
            if c.passed { "pass" } else { "FAIL" },
            c.checked,
            if c.exhaustive { ", exhaustive" } else { ", sampled" }
        ));
        if let Some(w) = &c.witness {
            text.push_str(&format!(": {w}"));
        }
        text.push('\n');
    }
    let mut value = json!({ "model": name, "points": site.space.len(), "coarse": site.is_coarse(), "checks": r.checks });
    let mut ok = r.all_pass();
    if let Some(p) = sheaf {
        let is_sheaf = match load_sheaf::<F>(p, &m)? {
            SheafData::Stalks(_) => true,
            SheafData::Opens(g) => g.is_sheaf(),
        };
        text.push_str(&format!("  sheaf {}: {}\n", p.display(), if is_sheaf { "sheaf condition holds" } else { "NOT a sheaf" }));
        value["sheaf"] = json!({ "path": p.display().to_string(), "is_sheaf": is_sheaf });
        ok &= is_sheaf;
    }
    emit(cli, text, value);
    if ok {
        Ok(())
    } else {
        Err(Fail::Law)
    }
}

fn cohomology<F: Field>(cli: &Cli, args: &[String], sheaf: Option<&Path>, cech: bool) -> Res {
    let mut loaded = Vec::new();
    if args.is_empty() {
        match sheaf {
            Some(p) => loaded.push(model_of_sheaf(p)?),
            None => {
                for n in models::names() {
                    let m = models::shipped(n).expect("shipped");
                    if m.complex().is_some() {
                        loaded.push((n.to_string(), m));
                    }
                }
            }
        }
    } else {
        for a in args {
            loaded.push(load_model(a)?);
        }
    }
    let mut rows = Vec::new();
    let mut extra = Vec::new();
    for (n, m) in &loaded {
        let (label, f) = stalk_sheaf::<F>(sheaf, m)?;
        let row = report::cohomology_row(n, &label, &f);
        if cech {
            let c = derived::trim(derived::cech_cohomology(&derived::star_cover(&m.space().poset), &f));
            extra.push(c);
        }
        rows.push(row);
    }
    let mut text = report::cohomology_text(&rows);
    if cech {
        text.push_str("\ncech (vertex-star cover)\n");
        for (r, c) in rows.iter().zip(&extra) {
            text.push_str(&format!("{}, {}, {}, {:?}, {}\n", r.space, r.sheaf, r.field, c, if *c == r.dims { "agrees" } else { "DIFFERS" }));
        }
    }
    let value = json!({ "schema": report::SCHEMA, "cohomology": rows, "cech": if cech { json!(extra) } else { Value::Null } });
    emit(cli, text, value);
    Ok(())
}

fn list_laws(cli: &Cli) -> Res {
    let mut text = String::from("laws:\n");
    for l in laws::LAWS {
        text.push_str(&format!("  {:<22} {}\n", l.name, l.summary));
    }
    text.push_str("maps:\n");
    let maps = laws::shipped_maps();
    for m in &maps {
        text.push_str(&format!("  {:<22} {}\n", m.name, if m.certified { "certified" } else { "uncertified" }));
    }
    let value = json!({
        "laws": laws::LAWS.iter().map(|l| json!({ "name": l.name, "summary": l.summary })).collect::<Vec<_>>(),
        "maps": maps.iter().map(|m| json!({ "name": m.name, "certified": m.certified })).collect::<Vec<_>>(),
    });
    emit(cli, text, value);
    Ok(())
}

fn suite_config(cli: &Cli, laws: &[String], models: &[String], maps: &[String]) -> Result<SuiteConfig, Fail> {
    let models = models.iter().map(|m| load_model(m).map(|(_, m)| m)).collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteConfig { laws: laws.to_vec(), trials: cli.trials, seed: cli.seed, models, maps: maps.to_vec() })
}

fn verify<F: Field>(cli: &Cli, laws_arg: &[String], models: &[String], maps: &[String], replay: Option<u64>) -> Res {
    let cfg = suite_config(cli, laws_arg, models, maps)?;
    if let Some(ts) = replay {
        let [law] = laws_arg else {
            return Err(Fail::Input("--replay needs exactly one --law".into()));
        };
        let outs = laws::replay::<F>(law, ts, &cfg)?;
        let mut text = format!("{law} trial seed {ts}\n");
        let mut failed = false;
        for o in &outs {
            text.push_str(&format!("  {:?} {} {}", o.mode, if o.ok { "ok" } else { "FAIL" }, o.instance));
            if !o.detail.is_empty() {
                text.push_str(&format!(" [{}]", o.detail));
            }
            text.push('\n');
            failed |= o.mode == laws::Mode::Assert && !o.ok;
        }
        let value = json!(outs
            .iter()
            .map(|o| json!({ "mode": o.mode, "ok": o.ok, "instance": o.instance, "detail": o.detail }))
            .collect::<Vec<_>>());
        emit(cli, text, value);
        return if failed { Err(Fail::Law) } else { Ok(()) };
    }
    let reports = laws::run_law_suite::<F>(&cfg)?;
    let r = Report::new(reports, vec![]);
    match cli.format {
        Format::Text => print!("{}", report::text(&r)),
        Format::Json => print!("{}", report::json(&r)),
    }
    if r.failed() {
        Err(Fail::Law)
    } else {
        Ok(())
    }
}

fn coarse_rho(arg: &str) -> Result<(String, Rho), Fail> {
    let (name, m) = load_model(arg)?;
    if !m.site().is_coarse() {
        return Err(Fail::Input(format!("{name} is not a coarse site")));
    }
    let rho = Rho::new(m.site().site.clone())?;
    Ok((name, rho))
}

fn presheaf_text<F: Field>(g: &Presheaf<F>) -> String {
    let lat = g.site.lattice().expect("coarse lattice");
    let mut s = String::new();
    for (i, u) in lat.opens().iter().enumerate() {
        s.push_str(&format!("  {{{}}}: {}\n", g.site.backing.as_ref().expect("backed site").poset.names_of(u).join(","), g.dim(i)));
    }
    s
}

fn stalks_text<F: Field>(f: &StalkSheaf<F>) -> String {
    let p = f.poset();
    (0..p.len()).map(|x| format!("  {}: {}\n", p.name(x), f.dim(x))).collect()
}

fn rho_cmd<F: Field>(cli: &Cli, op: &RhoOp) -> Res {
    match op {
        RhoOp::Direct { site, sheaf } | RhoOp::Shriek { site, sheaf } => {
            let (name, rho) = coarse_rho(site)?;
            let (_, m) = load_model(site)?;
            let (_, f) = stalk_sheaf::<F>(Some(sheaf), &m)?;
            let (label, g) = match op {
                RhoOp::Direct { .. } => ("rho_*", rho::rho_direct(&rho, &f)),
                _ => ("rho_!", rho::rho_shriek(&rho, &f).sheaf),
            };
            let text = format!("{label} on {name}, sections per coarse open:\n{}", presheaf_text(&g));
            let doc: Value = serde_json::from_str(&opens_to_json(&name, &g)).expect("json");
            emit(cli, text, doc);
            Ok(())
        }
        RhoOp::Inverse { site, sheaf } => {
            let (name, rho) = coarse_rho(site)?;
            let (_, m) = load_model(site)?;
            let g = match load_sheaf::<F>(sheaf, &m)? {
                SheafData::Opens(g) => g,
                SheafData::Stalks(_) => return Err(Fail::Input(format!("{}: expected an opens representation", sheaf.display()))),
            };
            if !g.is_sheaf() {
                return Err(Fail::Input(format!("{}: not a sheaf on {name}", sheaf.display())));
            }
            let f = rho::rho_inverse(&rho, &g);
            let text = format!("rho^-1 on {name}, stalks:\n{}", stalks_text(&f));
            let doc: Value = serde_json::from_str(&stalks_to_json(&name, &f)).expect("json");
            emit(cli, text, doc);
            Ok(())
        }
        RhoOp::Laws { sites } => {
            let names: Vec<String> = laws::LAWS.iter().filter(|l| l.name.starts_with("rho-")).map(|l| l.name.to_string()).collect();
            verify::<F>(cli, &names, sites, &[], None)
        }
    }
}

fn find_factorization<F: Field>(name: &str) -> Result<Factorization<F>, Fail> {
    let all = laws::shipped_factorizations::<F>();
    let names: Vec<String> = all.iter().map(|c| c.name.clone()).collect();
    all.into_iter()
        .find(|c| c.name == name)
        .map(|c| c.fact)
        .ok_or_else(|| Fail::Input(format!("unknown factorized map {name:?}; shipped: {}", names.join(", "))))
}

fn graded_text(lo: i64, dims: &[usize]) -> String {
    let parts: Vec<String> = dims.iter().enumerate().filter(|(_, &d)| d > 0).map(|(i, d)| format!("H^{}={d}", lo + i as i64)).collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" ")
    }
}

fn shriek<F: Field>(cli: &Cli, map: &str, sheaf: Option<&Path>) -> Res {
    let fact = find_factorization::<F>(map)?;
    let f = fact.composite();
    let g: StalkSheaf<F> = match sheaf {
        None => StalkSheaf::constant(&f.target),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Fail::Input(format!("{}: {e}", p.display())))?;
            let model = SiteModel::alexandrov(f.target.clone());
            match parse_sheaf::<F>(&text, &model)? {
                SheafData::Stalks(s) => s,
                SheafData::Opens(_) => return Err(Fail::Input("expected a stalks representation".into())),
            }
        }
    };
    let k = derived::upper_shriek_sheaf(&fact, &g)?;
    let global = k.global_sections();
    let h = global.cohomology();
    let stalks = derived::graded_stalks(&k);
    let p = k.poset();
    let mut text = format!("f^!G for {map}\n  global: {}\n", graded_text(global.lo, &h));
    for x in 0..p.len() {
        text.push_str(&format!("  {}: {}\n", p.name(x), graded_text(k.lo, &stalks[x])));
    }
    let value = json!({
        "map": map,
        "lo": global.lo,
        "global": h,
        "stalks": (0..p.len()).map(|x| json!({ "point": p.name(x), "lo": k.lo, "dims": stalks[x] })).collect::<Vec<_>>(),
    });
    emit(cli, text, value);
    Ok(())
}

fn dual<F: Field>(cli: &Cli, arg: &str, sheaf: Option<&Path>) -> Res {
    let (name, m) = load_model(arg)?;
    let (label, f) = stalk_sheaf::<F>(sheaf, &m)?;
    let d = derived::dual_prime(&f);
    let global = d.global_sections();
    let h = global.cohomology();
    let text = format!("D'F on {name} ({label}): {}\n", graded_text(global.lo, &h));
    emit(cli, text, json!({ "model": name, "sheaf": label, "lo": global.lo, "global": h }));
    Ok(())
}

fn lct<F: Field>(cli: &Cli, arg: &str, open: Option<&str>) -> Res {
    let (name, m) = load_model(arg)?;
    let sp = m.space().clone();
    let p = &sp.poset;
    let opens: Vec<PointSet> = match open {
        Some(s) => {
            let names: Vec<&str> = s.split(',').map(str::trim).filter(|n| !n.is_empty()).collect();
            vec![p.set_of(&names)?]
        }
        None => match m.complex() {
            Some(c) => (0..c.vertices.len()).map(|v| sp.open_star(c.index_of(&[v]).expect("vertex")).clone()).collect(),
            None => return Err(Fail::Input("--open is required for site models".into())),
        },
    };
    let mut text = String::new();
    let mut rows = Vec::new();
    for u in &opens {
        let r = derived::is_lct::<F>(&sp, u)?;
        let label = format!("{{{}}}", p.names_of(u).join(","));
        text.push_str(&format!("{name} {label}: closure {}, open {}, l.c.t. {}\n", r.closure, r.open, r.holds()));
        rows.push(json!({ "open": label, "closure": r.closure, "open_side": r.open, "lct": r.holds() }));
    }
    emit(cli, text, json!({ "model": name, "opens": rows }));
    Ok(())
}

fn report_cmd<F: Field>(cli: &Cli, out: Option<&Path>, laws_arg: &[String]) -> Res {
    let cfg = suite_config(cli, laws_arg, &[], &[])?;
    let reports = laws::run_law_suite::<F>(&cfg)?;
    let complexes: Vec<(String, Model)> = models::names()
        .into_iter()
        .filter_map(|n| {
            let m = models::shipped(n)?;
            m.complex().is_some().then(|| (n.to_string(), m))
        })
        .collect();
    let r = Report::new(reports, report::constant_cohomology::<F>(&complexes));
    let body = match cli.format {
        Format::Text => report::text(&r),
        Format::Json => report::json(&r),
    };
    match out {
        Some(p) => fs::write(p, &body).map_err(|e| Fail::Input(format!("{}: {e}", p.display())))?,
        None => print!("{body}"),
    }
    if r.failed() {
        Err(Fail::Law)
    } else {
        Ok(())
    }
}
