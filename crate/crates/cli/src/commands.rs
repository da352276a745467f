use std::fmt::Write as _;
use std::path::Path;

use padic_confluence::acceptance::{run_all, AcceptanceConfig};
use padic_confluence::confluence::{
    compatible, confluent_connection_derivative, confluent_connection_limit, DeformationFamily, DiffModule, LimitOptions,
};
use padic_confluence::gamma::{
    check_sum_identity, g0_coefficient_bound, g0_newton, g0_series, gamma_taylor, lvalues, GammaSeries,
};
use padic_confluence::padic::check_prime;
use padic_confluence::profiles::{controlling_graph_endpoint, sigma_radius_profile};
use padic_confluence::qcalc::{omega_q, q_factorial, q_factorial_valuations, q_int, twisted_power, QContext};
use padic_confluence::radius::{format_rat, parse_rat, Rat};
use padic_confluence::strat::{deform_checked, DeformOptions};
use padic_confluence::{DifferenceOperator, Error, LogRadius, NewtonPolygon, PadicScalar, Result, Scalar, Series};
use serde_json::{json, Value};

use crate::expr::parse_scalar;
use crate::input::{doc_prime, module_doc, read_json, system_doc};
use crate::output::{Manifest, Outcome, Status};

pub const MAX_PRIME: u64 = 997;
pub const MAX_PREC: i64 = 4000;
pub const MAX_ORDER: usize = 20_000;

/// Resolved numeric parameters (flag, then config file, then default).
#[derive(Clone, Debug)]
pub struct Params {
    pub p: Option<u64>,
    pub prec: i64,
    pub order: usize,
    pub seed: u64,
}

impl Params {
    pub fn check(&self) -> Result<()> {
        if let Some(p) = self.p {
            check_prime(p)?;
            if p > MAX_PRIME {
                return Err(Error::Invalid(format!("p = {p} exceeds the supported bound {MAX_PRIME}")));
            }
        }
        if !(1..=MAX_PREC).contains(&self.prec) {
            return Err(Error::Invalid(format!("precision {} outside 1..={MAX_PREC}", self.prec)));
        }
        if !(1..=MAX_ORDER).contains(&self.order) {
            return Err(Error::Invalid(format!("order {} outside 1..={MAX_ORDER}", self.order)));
        }
        Ok(())
    }

    fn prime(&self) -> Result<u64> {
        self.p.ok_or_else(|| Error::Invalid("no prime given (use --p or `p =` in the config file)".into()))
    }
}

fn outcome(stem: &str, artifact: Value, human: String, certified: Value) -> Outcome {
    Outcome { stem: stem.to_string(), artifact, human, certified, status: Status::Ok }
}

fn show_scalar(x: &PadicScalar) -> String {
    match x.to_rational() {
        Some(r) if x.is_exact() => r.to_string(),
        _ => match (x.valuation(), x.abs_precision()) {
            (Some(v), Some(n)) => format!("p^{v}·unit + O(p^{n})"),
            (None, Some(n)) => format!("O(p^{n})"),
            _ => "0".to_string(),
        },
    }
}

fn valuation_table(f: &Series<PadicScalar>, header: &str, extra: Option<&dyn Fn(i64) -> String>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{header}");
    for k in f.min_index()..=f.max_index() {
        let a = f.coeff(k);
        let v = match a.valuation() {
            Some(v) => v.to_string(),
            None => format!(">= {}", a.abs_precision().map_or("inf".into(), |n| n.to_string())),
        };
        let prec = a.abs_precision().map_or("exact".into(), |n| n.to_string());
        match extra {
            Some(f) => {
                let _ = writeln!(s, "{k:>6}  {v:>8}  {prec:>8}  {}", f(k));
            }
            None => {
                let _ = writeln!(s, "{k:>6}  {v:>8}  {prec:>8}");
            }
        }
    }
    s
}

fn vertices_text(np: &NewtonPolygon) -> String {
    let mut s = String::from("vertices:");
    for (i, (n, v)) in np.vertices.iter().enumerate() {
        let mark = if i < np.certified { "" } else { "?" };
        let _ = write!(s, " ({n},{}){mark}", format_rat(v));
    }
    if np.provisional() {
        s.push_str("   (? = provisional)");
    }
    s
}

pub fn deform(man: &mut Manifest, params: &Params, system: &Path, q: &str, h: &str) -> Result<Outcome> {
    let doc = read_json(system)?;
    let p = doc_prime(&doc, params.p)?;
    Params { p: Some(p), ..params.clone() }.check()?;
    man.input("system", doc.clone());
    man.param("p", p);
    man.param("prec", params.prec);
    man.param("order", params.order);
    man.param("q", q);
    man.param("h", h);
    let sys = system_doc(&doc, p, params.prec)?;
    let sigma = DifferenceOperator::new(parse_scalar(q, p, params.prec)?, parse_scalar(h, p, params.prec)?)?;
    let opts = DeformOptions { order: params.order as i64, prec: params.prec, n_max: 4 * params.order + 64 };
    let (a, cert) = deform_checked(&sys, &sigma, &opts)?;
    let center = show_scalar(sys.center());
    let cert_json = cert.to_json(&center);
    let mut artifact = json!({
        "p": p,
        "center": sys.center().to_json(),
        "region": sys.region.to_json(),
        "q": q,
        "h": h,
        "A": a.to_json(),
        "certificate": cert_json.clone(),
        "system": doc,
    });
    if let Some(m) = artifact.as_object_mut() {
        m.insert("min_precision".into(), json!(a.entries().iter().filter_map(|e| e.min_precision()).min()));
    }
    let mut human = format!("A for σ(T) = ({q})·T + ({h}), rank {}, order {}\n", a.rank(), params.order);
    let _ = writeln!(human, "certificate: {}", cert.verdict.as_str());
    for i in 0..a.rank() {
        for j in 0..a.rank() {
            human.push_str(&valuation_table(a.get(i, j), &format!("A[{i}][{j}]   index  valuation  precision"), None));
        }
    }
    Ok(outcome("deform", artifact, human, json!({ "verdict": cert.verdict.as_str(), "certificate": cert_json })))
}

pub fn confluence(man: &mut Manifest, params: &Params, module: &Path, method: &str, direction: &str) -> Result<Outcome> {
    let doc = read_json(module)?;
    let p = doc_prime(&doc, params.p)?;
    Params { p: Some(p), ..params.clone() }.check()?;
    man.input("module", doc.clone());
    man.param("p", p);
    man.param("prec", params.prec);
    man.param("order", params.order);
    man.param("method", method);
    let md = module_doc(&doc, p, params.prec)?;
    let module = DiffModule::new(md.a, md.sigma, md.region)?;
    let center = show_scalar(module.center());
    let order = params.order as i64;
    let (g, precision, history) = match method {
        "limit" => {
            let lim = confluent_connection_limit(&module, &LimitOptions { n_max: 8, target: 6, order })?;
            (lim.g, lim.precision, Some(lim.history))
        }
        "derivative" => {
            man.param("direction", direction);
            let sys = md.system.ok_or_else(|| {
                Error::Invalid("the derivative method needs the source system (field `system`, as written by deform)".into())
            })?;
            let (a, b) = direction
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("direction {direction:?}: expected a,b")))?;
            let (a, b) = (parse_scalar(a, p, params.prec)?, parse_scalar(b, p, params.prec)?);
            let fam = DeformationFamily { system: sys, prec: params.prec };
            let g = confluent_connection_derivative(&fam, &a, &b, order)?;
            let precision = g.entries().iter().filter_map(|e| e.min_precision()).min();
            (g, precision, None)
        }
        other => return Err(Error::Invalid(format!("unknown method {other:?} (limit or derivative)"))),
    };
    let cert = match compatible(&module, None, 32) {
        Ok(c) => c.to_json(&center),
        Err(e) => json!({ "verdict": "unavailable", "error": e.to_string() }),
    };
    let artifact = json!({
        "p": p,
        "method": method,
        "G": g.to_json(),
        "precision": precision,
        "history": history,
        "certificate": cert,
    });
    let mut human = format!("G by the {method} method, precision {}\n", precision.map_or("exact".into(), |v| format!("p^{v}")));
    if let Some(h) = &history {
        let _ = writeln!(human, "agreement per step: {h:?}");
    }
    for i in 0..g.rank() {
        for j in 0..g.rank() {
            human.push_str(&valuation_table(g.get(i, j), &format!("G[{i}][{j}]   index  valuation  precision"), None));
        }
    }
    Ok(outcome("confluence", artifact, human, json!({ "precision": precision, "certificate": cert })))
}

pub struct ProfileArgs<'a> {
    pub q: &'a str,
    pub h: &'a str,
    pub center: &'a str,
    pub from: &'a str,
    pub to: &'a str,
    pub samples: usize,
}

pub fn profile(man: &mut Manifest, params: &Params, args: &ProfileArgs) -> Result<Outcome> {
    let p = params.prime()?;
    params.check()?;
    man.param("p", p);
    man.param("q", args.q);
    man.param("h", args.h);
    man.param("center", args.center);
    man.param("from", args.from);
    man.param("to", args.to);
    man.param("samples", args.samples);
    let prec = params.prec;
    let sigma = DifferenceOperator::new(parse_scalar(args.q, p, prec)?, parse_scalar(args.h, p, prec)?)?;
    let c = parse_scalar(args.center, p, prec)?;
    let lo = LogRadius::Finite(parse_rat(args.from)?);
    let hi = LogRadius::Finite(parse_rat(args.to)?);
    let prof = sigma_radius_profile(&sigma, &c, &lo, &hi)?;
    let endpoint = match controlling_graph_endpoint(&sigma) {
        Ok(Some(a)) => json!(show_scalar(&a)),
        _ => Value::Null,
    };
    let mut table = Vec::new();
    if args.samples >= 2 {
        let n = args.samples as i64 - 1;
        for k in 0..=n {
            let r: Rat = prof.r_lo + (prof.r_hi - prof.r_lo) * Rat::new(k, n);
            if let Some(v) = prof.value_at(r) {
                table.push(json!({ "log_rho": format_rat(&r), "log_R": v.to_json_string() }));
            }
        }
    }
    let mut artifact = prof.to_json();
    let obj = artifact.as_object_mut().expect("object");
    obj.insert("breakpoints".into(), json!(prof.breakpoints().iter().map(format_rat).collect::<Vec<_>>()));
    obj.insert("fixed_point".into(), endpoint);
    obj.insert("continuous".into(), json!(prof.is_continuous()));
    obj.insert("log_convex".into(), json!(prof.is_log_convex()));
    obj.insert("samples".into(), json!(table));
    let mut human = format!(
        "R(x) = |(q−1)T + h|(x_(c,ρ)) for ρ = p^(−r), r from {} to {}\n",
        format_rat(&prof.r_lo),
        format_rat(&prof.r_hi)
    );
    human.push_str("r range                   −log_p R\n");
    for pc in &prof.pieces {
        let val = match pc.value {
            padic_confluence::profiles::PieceValue::Affine { alpha, beta } => format!("{} + {}·r", format_rat(&alpha), beta),
            padic_confluence::profiles::PieceValue::Vanishing => "vanishing".to_string(),
        };
        let _ = writeln!(human, "[{:>6}, {:>6}]          {val}", format_rat(&pc.from), format_rat(&pc.to));
    }
    Ok(outcome("profile", artifact, human, json!({ "exact": true })))
}

pub fn qcalc(man: &mut Manifest, params: &Params, q: &str, h: &str, n: u64, center: &str) -> Result<Outcome> {
    let p = params.prime()?;
    params.check()?;
    man.param("p", p);
    man.param("q", q);
    man.param("h", h);
    man.param("n", n);
    let prec = params.prec;
    let qs = parse_scalar(q, p, prec)?;
    let hs = parse_scalar(h, p, prec)?;
    let ctx = QContext::new(qs.clone(), hs.clone());
    let qi = q_int(n, &qs);
    let qf = q_factorial(n, &qs);
    let vals = q_factorial_valuations(n, &qs);
    let twisted = match DifferenceOperator::new(qs.clone(), hs) {
        Ok(sigma) if n <= 256 => {
            man.param("center", center);
            let c = parse_scalar(center, p, prec)?;
            Some(twisted_power(n as usize, &c, &sigma, n as i64).to_json())
        }
        _ => None,
    };
    let artifact = json!({
        "p": p,
        "n": n,
        "q_int": qi.to_json(),
        "q_factorial": qf.to_json(),
        "q_factorial_valuations": vals,
        "kappa": ctx.kappa,
        "omega_q": omega_q(&ctx).to_json_string(),
        "root_of_unity": ctx.is_root_of_unity(),
        "twisted_power": twisted,
    });
    let mut human = format!("[{n}]_q = {}\n[{n}]_q! = {}\n", show_scalar(&qi), show_scalar(&qf));
    let _ = writeln!(human, "kappa = {:?}, omega_q = p^-{}", ctx.kappa, omega_q(&ctx).to_json_string());
    human.push_str("k  v([k]_q!)\n");
    for (k, v) in vals.iter().enumerate() {
        let _ = writeln!(human, "{k:>4}  {}", v.map_or("inf".into(), |v| v.to_string()));
    }
    Ok(outcome("qcalc", artifact, human, json!({ "exact": qs.is_exact() })))
}

fn taylor(man: &mut Manifest, params: &Params, order: usize) -> Result<GammaSeries> {
    let p = params.prime()?;
    params.check()?;
    man.param("p", p);
    man.param("prec", params.prec);
    man.param("order", order);
    gamma_taylor(p, order, params.prec)
}

fn gamma_certified(gs: &GammaSeries) -> Value {
    json!({ "certified_b": gs.certified_b, "nodes": gs.nodes, "check_nodes": gs.check_nodes })
}

pub fn gamma_taylor_cmd(man: &mut Manifest, params: &Params) -> Result<Outcome> {
    let gs = taylor(man, params, params.order)?;
    let human = format!(
        "Γ_{} Taylor coefficients at 0, γ_j certified mod p^(N−j), N = {} ({} + {} nodes)\n{}",
        gs.p,
        gs.target,
        gs.nodes,
        gs.check_nodes,
        valuation_table(&gs.series, "     j  v(γ_j)   precision", None)
    );
    Ok(outcome("gamma-taylor", gs.to_json(), human, gamma_certified(&gs)))
}

pub fn gamma_g0(man: &mut Manifest, params: &Params) -> Result<Outcome> {
    let gs = taylor(man, params, params.order)?;
    let g0 = g0_series(&gs)?;
    let p = gs.p;
    let bound = move |k: i64| format!("bound {}", g0_coefficient_bound(p, k as u64));
    let human = valuation_table(&g0, "     k  v(g_k)   precision", Some(&bound));
    let artifact = json!({ "p": p, "g0": g0.to_json(), "lambda0": g0.coeff(0).to_json() });
    Ok(outcome("gamma-g0", artifact, human, gamma_certified(&gs)))
}

pub fn gamma_newton(man: &mut Manifest, params: &Params) -> Result<Outcome> {
    let gs = taylor(man, params, params.order)?;
    let g0 = g0_series(&gs)?;
    let np = g0_newton(&g0);
    let human = format!("Newton polygon of g_0 for p = {}, order {}\n{}\n", gs.p, params.order, vertices_text(&np));
    let artifact = json!({ "p": gs.p, "newton_polygon": np.to_json(), "certified_vertices": np.certified });
    let mut cert = gamma_certified(&gs);
    cert["certified_vertices"] = json!(np.certified);
    Ok(outcome("gamma-newton", artifact, human, cert))
}

pub fn gamma_lvalues(man: &mut Manifest, params: &Params, m_max: u64) -> Result<Outcome> {
    man.param("mmax", m_max);
    let order = params.order.max(2 * m_max as usize + 1);
    let gs = taylor(man, params, order)?;
    let table = lvalues(&gs, m_max)?;
    let mut human = String::from("     m      s   v(L_p(s))  bound  routes agree\n");
    for e in &table.entries {
        let v = e.value.valuation().map_or(format!(">= {}", e.value.abs_precision().unwrap_or(0)), |v| v.to_string());
        let _ = writeln!(human, "{:>6} {:>6} {:>10} {:>6}  {}", e.m, 1 + 2 * e.m, v, e.lower_bound, e.routes_agree);
    }
    let flagged = table.entries.iter().filter(|e| e.flagged || !e.routes_agree).count();
    let mut cert = gamma_certified(&gs);
    cert["flagged"] = json!(flagged);
    Ok(outcome("gamma-lvalues", table.to_json(), human, cert))
}

pub fn gamma_sums(man: &mut Manifest, params: &Params, ell: u32, n: u64, m_max: u64, target: i64) -> Result<Outcome> {
    man.param("ell", ell);
    man.param("n", n);
    man.param("mmax", m_max);
    man.param("target", target);
    let order = params.order.max(2 * m_max as usize + 8);
    let gs = taylor(man, params, order)?;
    let g0 = g0_series(&gs)?;
    let table = lvalues(&gs, m_max)?;
    let chk = check_sum_identity(ell, n, &table, Some(&g0), target)?;
    let mut human = format!(
        "S_{ell}({}) against the L-value series (p = {}): residual {}, dropped tail p^{}, target p^{target}\n",
        n * gs.p,
        gs.p,
        chk.residual.map_or("exact".into(), |v| format!("p^{v}")),
        format_rat(&chk.tail_bound)
    );
    if let Some(s) = chk.shortcut {
        let _ = writeln!(human, "shortcut S_1(np) = g_0(np) − g_0(0): p^{}", format_rat(&s));
    }
    let _ = writeln!(human, "{}", if chk.passed() { "PASS" } else { "FAIL" });
    let mut out = outcome("gamma-sums", chk.to_json(), human, json!({ "achieved": format_rat(&chk.achieved) }));
    if !chk.passed() {
        out.status = Status::CheckFailed;
    }
    Ok(out)
}

pub fn check(man: &mut Manifest, params: &Params) -> Result<Outcome> {
    let p = params.p.unwrap_or(3);
    Params { p: Some(p), ..params.clone() }.check()?;
    man.param("p", p);
    man.param("prec", params.prec);
    man.param("order", params.order);
    man.param("seed", params.seed);
    let cfg = AcceptanceConfig { p, prec: params.prec, order: params.order, seed: params.seed };
    let results = run_all(&cfg);
    let mut human = String::new();
    for r in &results {
        let _ = writeln!(human, "{}", r.line());
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let _ = writeln!(human, "{passed}/{} criteria passed", results.len());
    let artifact = json!({ "criteria": results.iter().map(|r| r.to_json()).collect::<Vec<_>>() });
    let mut out = outcome("check", artifact, human, json!({ "passed": passed, "total": results.len() }));
    if passed < results.len() {
        out.status = Status::CheckFailed;
    }
    Ok(out)
}
