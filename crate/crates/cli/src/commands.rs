//! The five subcommands, each producing a JSON result tree.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use semireg::algebroid::{check_algebroid, derham_complex, mask_label, standard_complex, Form, LieAlgebroidSpec};
use semireg::atiyah::{atiyah_class_pair, extension_independent, pair_curvature, reduced_atiyah, AtiyahProblem};
use semireg::deform::{
    annihilation_check, first_order_classes, run_tower, AnnihilationReport, FirstOrderSeed, LiftOutcome, ModuleProblem,
    ObstructionClass, Tower,
};
use semireg::dg::cohomology;
use semireg::exact::{fmt_q, Matrix, Q};
use semireg::liepair::{bott_connection, leray_e1, leray_filtration, LiePair};
use semireg::tot::{
    cech_cohomology, elementary_section, two_chart_atiyah, whitney_integrate, CechObject, CechReport, LMatrix, P1DeRham,
    SheafDatum, TwoChartModel,
};

use crate::schema::{InstanceFile, SheafKind, TwoChartInput};
use crate::{Command, Failure, Options};

pub fn run(cmd: Command, f: &InstanceFile, opts: &Options) -> Result<Value, Failure> {
    match cmd {
        Command::Cohomology => cmd_cohomology(f),
        Command::Pair => cmd_pair(f),
        Command::Atiyah => cmd_atiyah(f, opts),
        Command::Deform => cmd_deform(f, opts),
        Command::Tot => cmd_tot(f, opts),
    }
}

fn qs(x: &Q) -> Value {
    json!(fmt_q(x))
}

fn vec_json(v: &[Q]) -> Value {
    Value::Array(v.iter().map(qs).collect())
}

fn matrix_json(m: &Matrix) -> Value {
    Value::Array((0..m.rows).map(|r| vec_json(&m.row(r))).collect())
}

fn lmatrix_json(m: &LMatrix) -> Value {
    Value::Array((0..m.n).map(|i| Value::Array((0..m.n).map(|j| json!(m.get(i, j).to_string())).collect())).collect())
}

fn form_json(spec: &LieAlgebroidSpec, f: &Form<Matrix>) -> Value {
    Value::Object(f.terms.iter().map(|(m, x)| (mask_label(spec, *m), matrix_json(x))).collect())
}

fn scalar_form_json(spec: &LieAlgebroidSpec, f: &Form<Q>) -> Value {
    Value::Object(f.terms.iter().map(|(m, x)| (mask_label(spec, *m), qs(x))).collect())
}

fn dims_json(dims: &BTreeMap<i32, usize>) -> Value {
    Value::Object(dims.iter().map(|(k, v)| (k.to_string(), json!(v))).collect())
}

fn invariant<E: std::fmt::Display>(stage: &str) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::invariant(stage, &e.to_string())
}

fn checked_spec(f: &InstanceFile) -> Result<LieAlgebroidSpec, Failure> {
    let spec = f.spec()?;
    if let Err(v) = check_algebroid(&spec) {
        return Err(Failure::Invariant(json!({
            "stage": "algebroid",
            "message": v.to_string(),
            "violation": serde_json::to_value(&v).expect("serializable"),
        })));
    }
    Ok(spec)
}

fn require_pair(f: &InstanceFile, spec: &LieAlgebroidSpec) -> Result<LiePair, Failure> {
    f.pair(spec)?.ok_or_else(|| Failure::Schema("missing pair".into()))
}

fn problem(f: &InstanceFile) -> Result<AtiyahProblem, Failure> {
    let spec = checked_spec(f)?;
    let pair = require_pair(f, &spec)?;
    let module = f.module_on(&spec, &pair.sub)?.ok_or_else(|| Failure::Schema("missing module".into()))?;
    AtiyahProblem::new(pair, module).map_err(invariant("module"))
}

fn cmd_cohomology(f: &InstanceFile) -> Result<Value, Failure> {
    let spec = checked_spec(f)?;
    let all: Vec<usize> = (0..spec.rank()).collect();
    let conn = f.module_on(&spec, &all)?;
    let complex = match &conn {
        Some(c) => standard_complex(&spec, c).map_err(invariant("module"))?,
        None => derham_complex(&spec),
    };
    let h = cohomology(&complex).map_err(invariant("complex"))?;
    let mut classes = Map::new();
    for (n, g) in &h.groups {
        if g.dim == 0 {
            continue;
        }
        classes.insert(
            n.to_string(),
            json!({
                "basis": complex.space.bases.get(n).cloned().unwrap_or_default(),
                "representatives": g.representatives.iter().map(|r| vec_json(r)).collect::<Vec<_>>(),
            }),
        );
    }
    Ok(json!({
        "algebroid": spec.names,
        "module-dim": conn.map_or(1, |c| c.dim),
        "dims": (0..=spec.rank() as i32).map(|n| h.dim(n)).collect::<Vec<_>>(),
        "classes": classes,
    }))
}

fn cmd_pair(f: &InstanceFile) -> Result<Value, Failure> {
    let spec = checked_spec(f)?;
    let pair = require_pair(f, &spec)?;
    let all: Vec<usize> = (0..spec.rank()).collect();
    let conn = f.module_on(&spec, &all)?;
    let dim_e = conn.as_ref().map_or(1, |c| c.dim);
    let filt = leray_filtration(&pair, dim_e);
    let filtration: Vec<Value> = (0..filt.steps.len())
        .map(|p| json!({ "p": p, "dims": (0..=spec.rank() as i32).map(|k| filt.dim(p, k)).collect::<Vec<_>>() }))
        .collect();
    let bott = bott_connection(&pair);
    let bott_json: Map<String, Value> =
        pair.sub.iter().zip(&bott.mats).map(|(&a, m)| (spec.names[a].clone(), matrix_json(m))).collect();
    let e1 = leray_e1(&pair, conn.as_ref()).map_err(invariant("leray"))?;
    if !e1.agree {
        return Err(Failure::invariant("leray", "E1 via the spectral sequence differs from E1 via graded pieces"));
    }
    let page: Vec<Value> = e1.generic.iter().map(|((p, q), d)| json!({ "p": p, "q": q, "dim": d })).collect();
    let columns: std::collections::BTreeSet<i64> = e1.generic.keys().map(|(p, _)| *p).collect();
    Ok(json!({
        "sub": pair.sub.iter().map(|&i| spec.names[i].clone()).collect::<Vec<_>>(),
        "complement": pair.complement.iter().map(|&i| spec.names[i].clone()).collect::<Vec<_>>(),
        "filtration": filtration,
        "bott-connection": bott_json,
        "e1": page,
        "e1-columns": columns.len(),
        "e1-routes-agree": e1.agree,
        "total-dims": dims_json(&e1.total),
        "degenerate-at-e1": e1.degenerate,
    }))
}

fn two_chart_model(t: &TwoChartInput, opts: &Options) -> Result<TwoChartModel, Failure> {
    let g = t.transition()?;
    let probe = TwoChartModel::new(g.clone(), t.degree, (0, 0)).map_err(invariant("two-chart"))?;
    let window = opts.window.or(t.window).unwrap_or_else(|| probe.default_window());
    if window.0 > window.1 {
        return Err(Failure::Schema("window must satisfy LO <= HI".into()));
    }
    TwoChartModel::new(g, t.degree, window).map_err(invariant("two-chart"))
}

fn cmd_atiyah(f: &InstanceFile, opts: &Options) -> Result<Value, Failure> {
    if f.algebroid.is_none() {
        let t = f.two_chart.as_ref().ok_or_else(|| Failure::Schema("missing algebroid or two-chart".into()))?;
        let model = two_chart_model(t, opts)?;
        let at = two_chart_atiyah(&model, opts.nmax.max(1)).map_err(invariant("tot"))?;
        return Ok(json!({
            "model": "two-chart",
            "overlap-cocycle": lmatrix_json(&at.transition_part),
            "class": vec_json(&at.class),
            "h1-dim": at.h1_dim,
            "vanishes": at.class.iter().all(|c| *c == Q::from_integer(0.into())),
        }));
    }
    let prob = problem(f)?;
    let spec = &prob.pair.ambient;
    let v = atiyah_class_pair(&prob).map_err(invariant("atiyah"))?;
    let reduced = reduced_atiyah(&prob).map_err(invariant("atiyah"))?;
    let mut out = json!({
        "model": "pair",
        "cocycle": vec_json(&v.cocycle),
        "class": vec_json(&v.class),
        "vanishes": v.vanishes,
        "curved-class": { "class": vec_json(&v.curved.class), "cohomology-dim": v.curved.cohomology_dim, "vanishes": v.curved.vanishes },
        "reduced-class": { "vanishes": reduced.vanishes },
    });
    if v.vanishes != v.curved.vanishes {
        return Err(Failure::invariant("atiyah", "the two models of the class disagree"));
    }
    if let Some(w) = &v.witness {
        let in_g2 = pair_curvature(&prob, w).in_g2();
        if !in_g2 {
            return Err(Failure::invariant("atiyah", "witness curvature is not in G2"));
        }
        let ext: Map<String, Value> =
            prob.pair.complement.iter().zip(&w.complement).map(|(&i, m)| (spec.names[i].clone(), matrix_json(m))).collect();
        out["witness"] = json!({ "extension": ext, "curvature": form_json(spec, &pair_curvature(&prob, w).total), "curvature-in-g2": in_g2 });
    } else {
        let independent = extension_independent(&prob, opts.seed).map_err(invariant("atiyah"))?;
        out["certificate"] = json!({ "class": vec_json(&v.class), "representative": vec_json(&v.cocycle), "extension-independent": independent });
    }
    Ok(out)
}

fn annihilation_json(mp: &ModuleProblem, r: &AnnihilationReport) -> Value {
    let pa = &mp.algebra;
    let spec = &mp.problem.pair.ambient;
    json!({
        "k": r.k,
        "sigma": scalar_form_json(spec, &pa.scalar_form(&r.tau.sigma)),
        "tau-class": vec_json(&r.tau.class),
        "tau-vanishes": r.tau.vanishes,
        "primitive": r.primitive.as_ref().map(|y| scalar_form_json(spec, &pa.scalar_form(y))),
        "degenerate": r.degenerate,
        "exploratory": r.exploratory,
        "passed": r.passed,
    })
}

fn obstruction_json(mp: &ModuleProblem, ob: &ObstructionClass) -> Value {
    let spec = &mp.problem.pair.ambient;
    json!({
        "kernel": ob.kernel,
        "representative": form_json(spec, &mp.algebra.to_form(&mp.lift(&ob.representative))),
        "class": vec_json(&ob.class),
        "vanishes": ob.vanishes(),
        "lift-independent": ob.lift_independent,
        "genuine": ob.genuine(),
    })
}

fn cmd_deform(f: &InstanceFile, opts: &Options) -> Result<Value, Failure> {
    let prob = problem(f)?;
    let d = f.deformation.as_ref().ok_or_else(|| Failure::Schema("missing deformation".into()))?;
    let spec = prob.pair.ambient.clone();
    let dim = prob.dim_e();
    let mp = ModuleProblem::new(prob.clone()).map_err(invariant("deform"))?;
    let fo = first_order_classes(&mp.dgla).map_err(invariant("deform"))?;
    let h = mp.cohomology().map_err(invariant("deform"))?;
    let mut out = json!({
        "h1-dim": fo.h1_dim,
        "h2-dim": h.dim(2),
        "first-order-bijective": fo.bijective(),
    });
    if !fo.bijective() {
        return Err(Failure::invariant("deform", "first-order deformations do not match H1"));
    }
    if d.exploratory {
        let rep = mp.element(&f.form(&spec, &d.obstruction, dim)?);
        let ob = ObstructionClass::exploratory(&mp.dgla, rep).map_err(invariant("deform"))?;
        let reports = d
            .k
            .iter()
            .map(|&k| annihilation_check(&mp, &ob, k, true).map(|r| annihilation_json(&mp, &r)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(invariant("deform"))?;
        out["mode"] = json!("exploratory");
        out["obstruction"] = obstruction_json(&mp, &ob);
        out["semiregularity"] = Value::Array(reports);
        return Ok(out);
    }
    let seed = match &d.exact {
        Some(m) => FirstOrderSeed::Exact(crate::schema::matrix(m, dim)?),
        None => FirstOrderSeed::Form(f.form(&spec, &d.first_order, dim)?),
    };
    let tower = Tower { name: "input".into(), problem: prob, first_order: seed };
    let step = run_tower(&tower, opts.seed).map_err(invariant("deform"))?;
    out["mode"] = json!("certified");
    match &step.outcome {
        LiftOutcome::Lifted(x) => {
            let mut parts = Map::new();
            for (i, p) in x.parts.iter().enumerate().skip(1) {
                let label = if i == 1 { "u".to_string() } else { format!("u^{i}") };
                parts.insert(label, form_json(&spec, &step.module.algebra.to_form(&step.module.lift(p))));
            }
            out["outcome"] = json!("lifts");
            out["lift"] = Value::Object(parts);
        }
        LiftOutcome::Obstructed(ob) => {
            let mut reports = Vec::new();
            let mut failed = Vec::new();
            for &k in &d.k {
                let r = annihilation_check(&step.module, ob, k, false).map_err(invariant("deform"))?;
                if !r.passed {
                    failed.push(k);
                }
                reports.push(annihilation_json(&step.module, &r));
            }
            out["outcome"] = json!("obstructed");
            out["obstruction"] = obstruction_json(&step.module, ob);
            out["semiregularity"] = Value::Array(reports);
            if !failed.is_empty() {
                return Err(Failure::Invariant(json!({ "stage": "annihilation", "failed-k": failed, "report": out })));
            }
        }
    }
    Ok(out)
}

fn whitney_checks(sheaf: &dyn SheafDatum, nmax: usize, seed: u64, samples: usize) -> Result<Value, Failure> {
    let co = CechObject::new(sheaf, nmax.max(1)).map_err(invariant("tot"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut inverts, mut chain, mut compatible) = (true, true, true);
    for _ in 0..samples {
        let c: Vec<Q> = (0..co.cech.dim()).map(|_| Q::from_integer(rng.gen_range(-3..=3).into())).collect();
        let e = elementary_section(&co, &c);
        compatible &= e.check_compatible(&co.object).is_ok();
        inverts &= whitney_integrate(&co, &e) == c;
        chain &= whitney_integrate(&co, &e.d_tot(&co.object)) == co.cech.apply(&c);
    }
    if !(inverts && chain && compatible) {
        return Err(Failure::invariant("whitney", "integration checks failed"));
    }
    Ok(json!({
        "nmax": co.n_max(),
        "samples": samples,
        "sections-compatible": compatible,
        "integration-inverts-sections": inverts,
        "integration-is-chain-map": chain,
    }))
}

fn cech_json(r: &CechReport, render: impl Fn(&[Q]) -> Value) -> Value {
    let reps: Map<String, Value> =
        r.representatives.iter().map(|(n, vs)| (n.to_string(), Value::Array(vs.iter().map(|v| render(v)).collect()))).collect();
    json!({
        "window": [r.window.0, r.window.1],
        "dims": dims_json(&r.dims),
        "representatives": reps,
        "widened-window": [r.widened.0, r.widened.1],
        "widened-dims": dims_json(&r.widened_dims),
        "window-stable": r.stable,
    })
}

fn unstable(r: &CechReport) -> Failure {
    let (lo, hi) = semireg::exact::LaurentWindow::widened(r.widened.0, r.widened.1);
    Failure::Unstable(json!({
        "window": [r.window.0, r.window.1],
        "dims": dims_json(&r.dims),
        "widened-dims": dims_json(&r.widened_dims),
        "suggested-window": format!("{lo}:{hi}"),
    }))
}

fn cmd_tot(f: &InstanceFile, opts: &Options) -> Result<Value, Failure> {
    let t = f.two_chart.as_ref().ok_or_else(|| Failure::Schema("missing two-chart".into()))?;
    let samples = 20;
    match t.sheaf {
        SheafKind::Module => {
            let model = two_chart_model(t, opts)?;
            let report = cech_cohomology(&model).map_err(invariant("tot"))?;
            if !report.stable {
                return Err(unstable(&report));
            }
            let co = CechObject::new(&model, 1).map_err(invariant("tot"))?;
            let render = |v: &[Q]| {
                let blocks: Map<String, Value> = co
                    .cech
                    .blocks
                    .iter()
                    .map(|b| {
                        let name = format!("U{}", b.tuple.iter().map(|i| i.to_string()).collect::<String>());
                        let sec = model.section_laurent(b.mask, &v[b.offset..b.offset + b.dim]);
                        (name, Value::Array(sec.iter().map(|l| json!(l.to_string())).collect()))
                    })
                    .collect();
                Value::Object(blocks)
            };
            Ok(json!({
                "sheaf": "module",
                "rank": model.rank,
                "cohomology": cech_json(&report, render),
                "whitney": whitney_checks(&model, opts.nmax, opts.seed, samples)?,
            }))
        }
        SheafKind::DeRham => {
            let window = opts.window.or(t.window).unwrap_or((-3, 3));
            let sheaf = P1DeRham::new(window);
            let report = cech_cohomology(&sheaf).map_err(invariant("tot"))?;
            if !report.stable {
                return Err(unstable(&report));
            }
            Ok(json!({
                "sheaf": "de-rham",
                "cohomology": cech_json(&report, vec_json),
                "whitney": whitney_checks(&sheaf, opts.nmax, opts.seed, samples)?,
            }))
        }
    }
}
