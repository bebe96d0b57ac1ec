use cavity_core::hamiltonian::{ramp, to_mattis, to_mattis_penalized, MattisProgram, RampShape};
use cavity_core::instances::{
    instance_from_json, parse_cnf_with, parse_graph, parse_json_instance, parse_rational_text, rational_from_json,
    rational_to_json, CnfOptions, Instance, InstanceKind, QuboInstance,
};
use cavity_core::qubo::{
    bilp_to_qubo, hamcycle_to_qubo, jobseq_to_qubo, knapsack_to_qubo, qubo_compile_with, qubo_decode, tsp_to_qubo,
    CompiledQubo, Formulation, FormulationSource,
};
use cavity_core::reductions::{decode, encode, ProblemKind, Source, SourceInstance, SubsetSumInstance};
use cavity_core::solvers::{
    adiabatic_simulate, anneal, default_cap, oracle_subset_sum, verify_equivalence, AnnealOptions, AnnealResult,
    OracleOptions,
};
use cavity_core::Error;
use num_traits::Zero;
use serde_json::{json, Map, Value};

use crate::args::*;
use crate::artifact::*;

/// What a command produced: the artifact, its summary lines and exit code.
pub struct Outcome {
    pub artifact: Value,
    pub summary: Vec<(String, String)>,
    pub code: u8,
    pub out: Option<std::path::PathBuf>,
}

fn row(k: &str, v: impl ToString) -> (String, String) {
    (k.to_string(), v.to_string())
}

pub fn bits_to_string(x: &[bool]) -> String {
    x.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn parse_bits(s: &str) -> CliResult<Vec<bool>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(CliError::Usage(format!("assignment must be a 0/1 string, found {other:?}"))),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Loading
// ---------------------------------------------------------------------------

fn load_source(p: &ProblemInput, config: &mut Config) -> CliResult<Source> {
    let kind: ProblemKind = p.problem.into();
    if kind.needs_k() && p.k.is_none() {
        return Err(CliError::Usage(format!("--k is required for {kind}")));
    }
    if !kind.needs_k() && p.k.is_some() {
        return Err(CliError::Usage(format!("{kind} takes no --k")));
    }
    let text = read_text(&p.input)?;
    config.input(&p.input, &text);
    config.set("problem", json!(kind.tag())).set("k", json!(p.k)).set("pad", json!(p.pad));
    let instance = match kind {
        ProblemKind::Sat3 => SourceInstance::Cnf(parse_cnf_with(&text, CnfOptions { pad_to_3sat: p.pad })?),
        k if k.takes_graph() => SourceInstance::Graph(parse_graph(&text)?),
        ProblemKind::ExactCover | ProblemKind::SetPacking => match parse_json_instance(&text, InstanceKind::SetSystem)? {
            Instance::SetSystem(s) => SourceInstance::Sets(s),
            _ => unreachable!("kind selects the variant"),
        },
        _ => match parse_json_instance(&text, InstanceKind::SubsetSum)? {
            Instance::SubsetSum(r) => SourceInstance::Raw(r),
            _ => unreachable!("kind selects the variant"),
        },
    };
    Ok(Source { kind, k: p.k, instance })
}

fn encode_source(s: &Source) -> CliResult<SubsetSumInstance> {
    Ok(match &s.instance {
        SourceInstance::Raw(r) => SubsetSumInstance::from_raw(r.clone())?,
        other => encode(s.kind, other, s.k)?,
    })
}

struct Compiled {
    formulation: Option<Formulation>,
    compiled: CompiledQubo,
}

enum Loaded {
    Encoding(SubsetSumInstance),
    Compiled(Box<Compiled>),
}

impl Loaded {
    fn constraint(&self) -> &SubsetSumInstance {
        match self {
            Loaded::Encoding(i) => i,
            Loaded::Compiled(c) => &c.compiled.objective.constraint,
        }
    }

    fn cost_audit(&self) -> Value {
        match self {
            Loaded::Encoding(i) => i.to_json()["cost_audit"].clone(),
            Loaded::Compiled(c) => pipeline_audit(&c.compiled),
        }
    }

    /// The payload from which this can be reloaded.
    fn origin(&self) -> Value {
        match self {
            Loaded::Encoding(i) => {
                let mut v = i.to_json();
                v["artifact"] = json!("encoding");
                v
            }
            Loaded::Compiled(c) => {
                let mut v = compiled_payload(c);
                v["artifact"] = json!("qubo-compilation");
                v
            }
        }
    }
}

fn envelope_free(v: &Value) -> Value {
    let mut v = v.clone();
    if let Some(m) = v.as_object_mut() {
        for k in ["tool", "version", "config", "config_hash"] {
            m.remove(k);
        }
    }
    v
}

fn formulation_instance(f: &FormulationSource) -> Value {
    match f {
        FormulationSource::Bilp(b) => b.to_json(),
        FormulationSource::Knapsack(k) => k.to_json(),
        FormulationSource::JobSeq(j) => j.to_json(),
        FormulationSource::HamCycle(g) | FormulationSource::Tsp(g) => g.to_json(),
    }
}

fn build_formulation(kind: FormulationKind, text: &str) -> CliResult<Formulation> {
    let json_kind = |k: InstanceKind| parse_json_instance(text, k);
    Ok(match kind {
        FormulationKind::Bilp => match json_kind(InstanceKind::Bilp)? {
            Instance::Bilp(b) => bilp_to_qubo(&b)?,
            _ => unreachable!("kind selects the variant"),
        },
        FormulationKind::Knapsack => match json_kind(InstanceKind::Knapsack)? {
            Instance::Knapsack(k) => knapsack_to_qubo(&k)?,
            _ => unreachable!("kind selects the variant"),
        },
        FormulationKind::Jobseq => match json_kind(InstanceKind::JobSeq)? {
            Instance::JobSeq(j) => jobseq_to_qubo(&j)?,
            _ => unreachable!("kind selects the variant"),
        },
        FormulationKind::Hamcycle => hamcycle_to_qubo(&parse_graph(text)?)?,
        FormulationKind::Tsp => tsp_to_qubo(&parse_graph(text)?)?,
    })
}

fn formulation_kind(tag: &str) -> CliResult<FormulationKind> {
    Ok(match tag {
        "bilp" => FormulationKind::Bilp,
        "knapsack" => FormulationKind::Knapsack,
        "jobseq" => FormulationKind::Jobseq,
        "hamcycle" => FormulationKind::Hamcycle,
        "tsp" => FormulationKind::Tsp,
        other => return Err(Error::Domain(format!("unknown formulation {other:?}")).into()),
    })
}

fn load_compiled(v: &Value) -> CliResult<Compiled> {
    let formulation = match v.get("formulation") {
        Some(f) if !f.is_null() => {
            let kind = formulation_kind(f["formulation"].as_str().unwrap_or_default())?;
            Some(build_formulation(kind, &f["instance"].to_string())?)
        }
        _ => None,
    };
    let qubo = match &formulation {
        Some(f) => f.qubo.clone(),
        None => match instance_from_json(&v["qubo"], InstanceKind::Qubo)? {
            Instance::Qubo(q) => q,
            _ => unreachable!("kind selects the variant"),
        },
    };
    let delta = rational_from_json(&v["objective"]["delta"], "/objective/delta")?;
    let compiled = qubo_compile_with(&qubo, Some(delta))?;
    if compiled.objective.to_json() != v["objective"] {
        return Err(Error::Format {
            location: "/objective".into(),
            message: "stored objective disagrees with recompilation".into(),
        }
        .into());
    }
    Ok(Compiled { formulation, compiled })
}

fn load_value(v: &Value) -> CliResult<Loaded> {
    match v.get("artifact").and_then(Value::as_str) {
        Some("encoding") => Ok(Loaded::Encoding(SubsetSumInstance::from_json(v)?)),
        Some("qubo-compilation") => Ok(Loaded::Compiled(Box::new(load_compiled(v)?))),
        Some("mattis") => load_value(&v["origin"]),
        _ if v.get("weights").is_some() && v.get("target").is_some() => match instance_from_json(v, InstanceKind::SubsetSum)? {
            Instance::SubsetSum(r) => Ok(Loaded::Encoding(SubsetSumInstance::from_raw(r)?)),
            _ => unreachable!("kind selects the variant"),
        },
        _ => Err(Error::Format {
            location: "/artifact".into(),
            message: "expected an encoding, qubo-compilation or mattis artifact".into(),
        }
        .into()),
    }
}

fn load_artifact(path: &std::path::Path, config: &mut Config) -> CliResult<(Value, Loaded)> {
    let text = read_text(path)?;
    config.input(path, &text);
    let v = parse_json(&text)?;
    let loaded = load_value(&v)?;
    Ok((v, loaded))
}

fn load_mattis(path: &std::path::Path, config: &mut Config) -> CliResult<(MattisProgram, Loaded)> {
    let (v, loaded) = load_artifact(path, config)?;
    if v.get("artifact").and_then(Value::as_str) != Some("mattis") {
        return Err(Error::Format {
            location: "/artifact".into(),
            message: "expected a mattis artifact (run `cavity emit` first)".into(),
        }
        .into());
    }
    let program: MattisProgram = serde_json::from_value(v.clone()).map_err(|e| Error::Format {
        location: "/".into(),
        message: e.to_string(),
    })?;
    program.validate()?;
    if program.atoms != loaded.constraint().len() {
        return Err(Error::Invariant("program atom count differs from its origin".into()).into());
    }
    Ok((program, loaded))
}

// ---------------------------------------------------------------------------
// Payload pieces
// ---------------------------------------------------------------------------

fn pipeline_audit(c: &CompiledQubo) -> Value {
    let n = c.objective.parity.spins;
    let expected = json!({
        "parity_bits": n * (n - 1) / 2,
        "plaquettes": (n - 1) * (n - 2) / 2,
        "cnf_variables": (n - 1) * (n - 1),
        "cnf_clauses": 4 * (n - 1) * (n - 2),
        "weights": 2 * (n - 1) * (5 * n - 9),
    });
    let actual = json!({
        "parity_bits": c.objective.parity.pairs.len(),
        "plaquettes": c.objective.parity.plaquettes.len(),
        "cnf_variables": c.objective.cnf.num_vars,
        "cnf_clauses": c.objective.cnf.num_clauses(),
        "weights": c.objective.num_variables(),
    });
    json!({
        "formula": "2(n-1)(5n-9)",
        "n": n,
        "holds": expected == actual,
        "expected": expected,
        "actual": actual,
    })
}

fn ising_json(c: &CompiledQubo) -> Value {
    let m = &c.ising;
    let mut couplings = Vec::new();
    for i in 0..m.n {
        for j in (i + 1)..m.n {
            if !m.couplings[i][j].is_zero() {
                couplings.push(json!([i + 1, j + 1, rational_to_json(&m.couplings[i][j])]));
            }
        }
    }
    json!({
        "n": m.n,
        "couplings": couplings,
        "fields": m.fields.iter().map(rational_to_json).collect::<Vec<_>>(),
        "offset": rational_to_json(&m.offset),
    })
}

fn compiled_payload(c: &Compiled) -> Value {
    let mut m = Map::new();
    if let Some(f) = &c.formulation {
        let mut fj = f.to_json();
        fj["instance"] = formulation_instance(&f.source);
        m.insert("formulation".into(), fj);
    }
    m.insert("qubo".into(), c.compiled.source.to_json());
    m.insert("ising".into(), ising_json(&c.compiled));
    m.insert("objective".into(), c.compiled.objective.to_json());
    m.insert("cost_audit".into(), pipeline_audit(&c.compiled));
    Value::Object(m)
}

fn qubo_readout(c: &Compiled, x: &[bool]) -> CliResult<(Value, bool)> {
    let value = c.compiled.source.evaluate(x);
    let mut out = json!({
        "qubo_assignment": bits_to_string(x),
        "qubo_value": rational_to_json(&value),
    });
    let mut ok = true;
    if let Some(f) = &c.formulation {
        let d = qubo_decode(f, x)?;
        ok = d.feasible;
        out["native"] = serde_json::to_value(&d).expect("decoded solutions serialize");
    }
    Ok((out, ok))
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

pub fn encode_cmd(a: &EncodeArgs) -> CliResult<Outcome> {
    let mut config = Config::new("encode");
    let source = load_source(&a.source, &mut config)?;
    let inst = encode_source(&source)?;
    let audit = &inst.audit;
    let summary = vec![
        row("problem", source.kind),
        row("k", source.k.map_or("-".into(), |k| k.to_string())),
        row("cost formula", audit.formula),
        row("n, m", format!("{}, {}", audit.n, audit.m)),
        row("expected weights", audit.expected),
        row("emitted weights", audit.actual),
        row("audit", if audit.holds() { "holds" } else { "FAILS" }),
        row("target", &inst.target),
    ];
    Ok(Outcome {
        artifact: envelope("encoding", &config, inst.to_json()),
        summary,
        code: exit::OK,
        out: a.out.clone(),
    })
}

pub fn compile_cmd(a: &CompileArgs) -> CliResult<Outcome> {
    let mut config = Config::new("compile-qubo");
    let text = read_text(&a.input)?;
    config.input(&a.input, &text);
    config
        .set("formulation", json!(a.formulation.map(|f| format!("{f:?}").to_lowercase())))
        .set("delta", json!(a.delta));
    let formulation = a.formulation.map(|k| build_formulation(k, &text)).transpose()?;
    let qubo: QuboInstance = match &formulation {
        Some(f) => f.qubo.clone(),
        None => match parse_json_instance(&text, InstanceKind::Qubo)? {
            Instance::Qubo(q) => q,
            _ => unreachable!("kind selects the variant"),
        },
    };
    let delta = match &a.delta {
        Some(d) => Some(parse_rational_text(d).ok_or_else(|| CliError::Usage(format!("--delta {d:?} is not a rational")))?),
        None => None,
    };
    let c = Compiled {
        compiled: qubo_compile_with(&qubo, delta)?,
        formulation,
    };
    let obj = &c.compiled.objective;
    let audit = pipeline_audit(&c.compiled);
    let summary = vec![
        row("QUBO variables", qubo.n),
        row("spins (with reference)", obj.parity.spins),
        row("parity bits", obj.parity.pairs.len()),
        row("plaquettes", obj.parity.plaquettes.len()),
        row("CNF", format!("{} variables, {} clauses", obj.cnf.num_vars, obj.cnf.num_clauses())),
        row("subset-sum weights", obj.num_variables()),
        row("Δ", &obj.delta),
        row("audit 2(n-1)(5n-9)", if audit["holds"] == json!(true) { "holds" } else { "FAILS" }),
    ];
    Ok(Outcome {
        artifact: envelope("qubo-compilation", &config, compiled_payload(&c)),
        summary,
        code: exit::OK,
        out: a.out.clone(),
    })
}

pub fn emit_cmd(a: &EmitArgs) -> CliResult<Outcome> {
    let mut config = Config::new("emit");
    let (_, loaded) = load_artifact(&a.input, &mut config)?;
    config.set("ramp", json!(RampShape::from(a.ramp))).set("ramp_steps", json!(a.ramp_steps));
    let mut program = match &loaded {
        Loaded::Encoding(i) => to_mattis(i)?,
        Loaded::Compiled(c) => to_mattis_penalized(&c.compiled.objective)?,
    };
    program.schedule = ramp(a.ramp.into(), a.ramp_steps)?;
    let mut payload = program.to_json();
    payload["origin"] = envelope_free(&loaded.origin());
    payload["cost_audit"] = loaded.cost_audit();
    let max_h = program.fields.iter().fold(0.0f64, |m, h| m.max(h.abs()));
    let summary = vec![
        row("atoms", program.atoms),
        row("a_max", program.a_max),
        row("max |h|", max_h),
        row("delta_m0", program.delta_m0),
        row("scale", program.scale),
        row("offset", program.offset),
        row("ramp", format!("{:?} x {}", program.schedule.shape, program.schedule.steps)),
    ];
    Ok(Outcome {
        artifact: envelope("mattis", &config, payload),
        summary,
        code: exit::OK,
        out: a.out.clone(),
    })
}

pub fn oracle_cmd(a: &OracleArgs) -> CliResult<Outcome> {
    let mut config = Config::new("oracle");
    let inst = match a.problem {
        Some(problem) => {
            let p = ProblemInput {
                problem,
                input: a.input.clone(),
                k: a.k,
                pad: a.pad,
            };
            encode_source(&load_source(&p, &mut config)?)?
        }
        None => {
            if a.k.is_some() {
                return Err(CliError::Usage("--k needs --problem".into()));
            }
            load_artifact(&a.input, &mut config)?.1.constraint().clone()
        }
    };
    let cap = default_cap();
    config
        .set("mode", json!(format!("{:?}", a.mode).to_lowercase()))
        .set("allow_empty", json!(a.allow_empty))
        .set("cap", json!(cap));
    let r = oracle_subset_sum(
        &inst,
        OracleOptions {
            mode: a.mode.into(),
            cap,
            allow_empty: a.allow_empty,
        },
    )?;
    let decoded = match r.witnesses.first() {
        Some(w) if inst.source.kind != ProblemKind::SubsetSum || inst.len() > 0 => Some(decode(&inst, w)?),
        _ => None,
    };
    let payload = json!({
        "problem": inst.source.kind.tag(),
        "k": inst.source.k,
        "weights": inst.len(),
        "feasible": r.feasible,
        "witnesses": r.witnesses.iter().map(|w| bits_to_string(w)).collect::<Vec<_>>(),
        "explored": r.explored,
        "method": r.method,
        "decoded": decoded,
        "cost_audit": inst.to_json()["cost_audit"],
    });
    let mut summary = vec![
        row("problem", inst.source.kind),
        row("weights", inst.len()),
        row("method", format!("{:?}", r.method).to_lowercase()),
        row("explored", r.explored),
        row("feasible", r.feasible),
        row("witnesses", r.witnesses.len()),
    ];
    if let Some(d) = &decoded {
        summary.push(row("decoded", serde_json::to_string(&d.solution).unwrap_or_default()));
    }
    Ok(Outcome {
        artifact: envelope("oracle-report", &config, payload),
        summary,
        code: if r.feasible { exit::OK } else { exit::INFEASIBLE },
        out: a.out.clone(),
    })
}

pub fn solve_cmd(a: &SolveArgs) -> CliResult<Outcome> {
    let mut config = Config::new("solve");
    let (program, loaded) = load_mattis(&a.input, &mut config)?;
    config
        .set("sweeps", json!(a.sweeps))
        .set("seed", json!(a.seed))
        .set("restarts", json!(a.restarts));
    if a.restarts == 0 {
        return Err(CliError::Usage("--restarts must be at least 1".into()));
    }
    let mut best: Option<AnnealResult> = None;
    for r in 0..a.restarts {
        let run = anneal(
            &program,
            AnnealOptions {
                sweeps: a.sweeps,
                seed: a.seed.wrapping_add(r),
                ..Default::default()
            },
        )?;
        if best.as_ref().is_none_or(|b| run.best_energy < b.best_energy) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let inst = loaded.constraint();
    let witness = inst.is_witness(&best.best);
    let mut payload = json!({
        "anneal": {
            "best": bits_to_string(&best.best),
            "best_energy": best.best_energy,
            "offset": program.offset,
            "objective": program.objective(&best.best),
            "seed": best.seed,
            "sweeps": best.sweeps,
            "t0": best.t0,
            "t1": best.t1,
            "trace": best.trace,
        },
        "witness": witness,
        "cost_audit": loaded.cost_audit(),
    });
    let mut summary = vec![
        row("atoms", program.atoms),
        row("best energy", best.best_energy),
        row("offset", program.offset),
        row("reached target", witness),
    ];
    let mut ok = witness;
    if witness {
        match &loaded {
            Loaded::Encoding(i) => {
                let d = decode(i, &best.best)?;
                summary.push(row("decoded", serde_json::to_string(&d.solution).unwrap_or_default()));
                payload["decoded"] = serde_json::to_value(&d).expect("decoded solutions serialize");
            }
            Loaded::Compiled(c) => {
                let x = c
                    .compiled
                    .objective
                    .decode_qubo(&best.best)
                    .ok_or_else(|| Error::Invariant("witness violates a plaquette".into()))?;
                let (readout, native_ok) = qubo_readout(c, &x)?;
                summary.push(row("QUBO value", readout["qubo_value"].to_string().trim_matches('"')));
                payload["decoded"] = readout;
                ok = native_ok;
            }
        }
    }
    Ok(Outcome {
        artifact: envelope("solve-report", &config, payload),
        summary,
        code: if ok { exit::OK } else { exit::INFEASIBLE },
        out: a.out.clone(),
    })
}

pub fn simulate_cmd(a: &SimulateArgs) -> CliResult<Outcome> {
    let mut config = Config::new("simulate");
    let (program, loaded) = load_mattis(&a.input, &mut config)?;
    let schedule = match a.ramp {
        Some(shape) => ramp(shape.into(), program.schedule.steps.max(2))?,
        None => program.schedule.clone(),
    };
    config
        .set("time", json!(a.time))
        .set("steps", json!(a.steps))
        .set("ramp", json!(schedule.shape));
    let r = adiabatic_simulate(&program, &schedule, a.time, a.steps)?;
    let n = program.atoms;
    let label = |b: usize| bits_to_string(&(0..n).map(|i| b >> i & 1 == 1).collect::<Vec<_>>());
    let mut order: Vec<usize> = (0..r.probabilities.len()).collect();
    order.sort_by(|&x, &y| r.probabilities[y].total_cmp(&r.probabilities[x]).then(x.cmp(&y)));
    let top: Vec<Value> = order.iter().take(16).map(|&b| json!([label(b), r.probabilities[b]])).collect();
    let payload = json!({
        "success_probability": r.success_probability,
        "ground_states": r.ground_states.iter().map(|&b| label(b)).collect::<Vec<_>>(),
        "ground_energy": r.ground_energy,
        "final_energy": r.final_energy,
        "max_norm_drift": r.max_norm_drift,
        "distribution": top,
        "thresholds": {
            "success_probability": 0.9,
            "status": "property target; no reference value exists",
        },
        "cost_audit": loaded.cost_audit(),
    });
    let summary = vec![
        row("atoms", n),
        row("total time", a.time),
        row("steps", a.steps),
        row("success probability", r.success_probability),
        row("max norm drift", r.max_norm_drift),
        row("most likely", top.first().and_then(|v| v[0].as_str()).unwrap_or_default()),
    ];
    Ok(Outcome {
        artifact: envelope("simulation-report", &config, payload),
        summary,
        code: exit::OK,
        out: a.out.clone(),
    })
}

pub fn verify_cmd(a: &VerifyArgs) -> CliResult<Outcome> {
    let mut config = Config::new("verify");
    let source = load_source(&a.source, &mut config)?;
    let cap = default_cap();
    config.set("cap", json!(cap));
    let report = verify_equivalence(&source, cap)?;
    let inst = encode_source(&source)?;
    let mut payload = serde_json::to_value(&report).expect("reports serialize");
    payload["cost_audit"] = inst.to_json()["cost_audit"].clone();
    let summary = vec![
        row("problem", report.problem),
        row("weights", report.weights),
        row("agreement", report.agreement),
        row("feasible", report.original_feasible),
        row("native witnesses", report.original_witnesses),
        row("subset witnesses", report.subset_witnesses),
    ];
    Ok(Outcome {
        artifact: envelope("verify-report", &config, payload),
        summary,
        code: exit::OK,
        out: a.out.clone(),
    })
}

pub fn decode_cmd(a: &DecodeArgs) -> CliResult<Outcome> {
    let mut config = Config::new("decode");
    let (_, loaded) = load_artifact(&a.input, &mut config)?;
    config.set("assignment", json!(a.assignment));
    let bits = parse_bits(&a.assignment)?;
    let inst = loaded.constraint();
    let mut summary = Vec::new();
    let (payload, ok) = match &loaded {
        Loaded::Compiled(c) if bits.len() == c.compiled.source.n && bits.len() != inst.len() => {
            let (readout, ok) = qubo_readout(c, &bits)?;
            summary.push(row("QUBO value", readout["qubo_value"].to_string().trim_matches('"')));
            (readout, ok)
        }
        _ if bits.len() != inst.len() => {
            return Err(CliError::Usage(format!(
                "assignment has {} bits, the instance has {} weights",
                bits.len(),
                inst.len()
            )));
        }
        _ if !inst.is_witness(&bits) => {
            summary.push(row("witness", false));
            (json!({ "witness": false, "residual": inst.residual(&bits).to_string() }), false)
        }
        Loaded::Encoding(i) => {
            let d = decode(i, &bits)?;
            summary.push(row("decoded", serde_json::to_string(&d.solution).unwrap_or_default()));
            summary.extend(d.certificate.iter().map(|c| row("  check", c)));
            (json!({ "witness": true, "decoded": d }), true)
        }
        Loaded::Compiled(c) => {
            let x = c
                .compiled
                .objective
                .decode_qubo(&bits)
                .ok_or_else(|| Error::Invariant("witness violates a plaquette".into()))?;
            let (readout, ok) = qubo_readout(c, &x)?;
            summary.push(row("QUBO value", readout["qubo_value"].to_string().trim_matches('"')));
            (json!({ "witness": true, "decoded": readout }), ok)
        }
    };
    let mut payload = payload;
    payload["cost_audit"] = loaded.cost_audit();
    Ok(Outcome {
        artifact: envelope("decode-report", &config, payload),
        summary,
        code: if ok { exit::OK } else { exit::INFEASIBLE },
        out: a.out.clone(),
    })
}

