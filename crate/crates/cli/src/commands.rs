use std::fs;
use std::path::{Path, PathBuf};

use abi_core::model::norm0;
use abi_core::resonance::{identity_suite, InteractionSpec};
use abi_core::sim::io::{write_series_csv, write_snapshot};
use abi_core::sim::{
    dispersion_probe, simulate_observed, u0_smallness_probe, DecayReport, RunSummary, SimConfig, U0Report,
};
use abi_core::spectral::{assemble_a0, projectors as eigen_projectors, Branch};
use abi_core::symbolic::certify::preflight_tensor;
use abi_core::symbolic::{
    build_ideal_generators, build_interaction_tensor, certify_tensor, mutate_entry, Certificate, InteractionTensor,
    PreflightReport, TensorKind, CHAPLYGIN_COMPONENTS,
};
use abi_core::{Mat10, Vec3};
use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::config::{load_config, DecayFile, SimulateFile};
use crate::manifest::{write_json, RunManifest};
use crate::state_arg::{parse_state, parse_vec3};
use crate::{DecayArgs, IdentityArgs, KindArg, ProjectorArgs, SimulateArgs, Subsystem, VerifyArgs};
use crate::{EXIT_BLOWUP, EXIT_PASS, EXIT_VERIFY};

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn parse_entry(s: &str) -> Result<[usize; 3]> {
    let v: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad index {p:?}")))
        .collect::<Result<_>>()?;
    match v.as_slice() {
        [o, k, i] => Ok([*o, *k, *i]),
        _ => bail!("--mutate-entry needs three indices out,k,i"),
    }
}

/// `(interaction, kind)` pairs requested on the command line. Constraint
/// tensors ignore `eps1`; they are listed with `eps1 = +`.
fn selected_jobs(args: &VerifyArgs) -> Result<Vec<(InteractionSpec, TensorKind)>> {
    let filter: Vec<InteractionSpec> = args.interactions.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let mut jobs = Vec::new();
    if matches!(args.kind, KindArg::All | KindArg::N) {
        for s in InteractionSpec::all_wave() {
            if filter.is_empty() || filter.contains(&s) {
                jobs.push((s, TensorKind::N));
            }
        }
    }
    if matches!(args.kind, KindArg::All | KindArg::Nprime) {
        for s in InteractionSpec::all_wave().into_iter().filter(|s| s.eps1 == Branch::Plus) {
            if filter.is_empty() || filter.iter().any(|f| f.eps2 == s.eps2 && f.eps3 == s.eps3) {
                jobs.push((s, TensorKind::Nprime));
            }
        }
    }
    if jobs.is_empty() {
        bail!("no interaction tensor matches the selection");
    }
    Ok(jobs)
}

fn restrict_subsystem(t: InteractionTensor, sub: Subsystem) -> Result<InteractionTensor> {
    match (sub, t.kind) {
        (Subsystem::Full, _) => Ok(t),
        (Subsystem::Chaplygin, TensorKind::N) => Ok(t.restrict(&CHAPLYGIN_COMPONENTS, &CHAPLYGIN_COMPONENTS)?),
        // Only the rotational rows involve (tau, v) alone.
        (Subsystem::Chaplygin, TensorKind::Nprime) => Ok(t.restrict(&[2, 3, 4], &CHAPLYGIN_COMPONENTS)?),
    }
}

fn apply_mutation(t: &mut InteractionTensor, [o, k, i]: [usize; 3]) -> Result<()> {
    let pos = |set: &[usize], c: usize, what: &str| {
        set.iter()
            .position(|&x| x == c)
            .with_context(|| format!("{what} index {c} is not part of the {} tensor", t.kind))
    };
    let idx = t.index(pos(&t.outs, o, "output")?, pos(&t.slots, k, "slot")?, pos(&t.slots, i, "slot")?);
    mutate_entry(t, idx)?;
    Ok(())
}

#[derive(Serialize)]
struct VerifyOutput {
    subsystem: String,
    mutated_entry: Option<[usize; 3]>,
    all_residues_zero: bool,
    preflight: Vec<(String, TensorKind, PreflightReport)>,
    certificates: Vec<Certificate>,
}

pub fn verify_symbols(args: &VerifyArgs) -> Result<u8> {
    let jobs = selected_jobs(args)?;
    let mutation = args.mutate_entry.as_deref().map(parse_entry).transpose()?;
    ensure_dir(&args.out)?;
    let config = serde_json::json!({
        "kind": format!("{:?}", args.kind),
        "interactions": args.interactions,
        "subsystem": format!("{:?}", args.subsystem),
        "mutate_entry": mutation,
        "cofactors": args.cofactors,
        "preflight_samples": args.preflight_samples,
    });
    let mut manifest = RunManifest::start("verify-symbols", config, Some(args.seed));
    let mut out = VerifyOutput {
        subsystem: format!("{:?}", args.subsystem).to_lowercase(),
        mutated_entry: mutation,
        all_residues_zero: true,
        preflight: Vec::new(),
        certificates: Vec::new(),
    };
    let mut code = EXIT_PASS;
    for (spec, kind) in jobs {
        let gens = build_ideal_generators(&spec)?;
        let mut t = restrict_subsystem(build_interaction_tensor(&spec, kind)?, args.subsystem)?;
        // Gates run on the unmodified tensor; a mutation must be caught by
        // the exact reduction, not by the float cross-check.
        let pre = preflight_tensor(&t, &gens, args.preflight_samples, args.seed)?;
        let pre_ok = pre.passed();
        out.preflight.push((spec.to_string(), kind, pre.clone()));
        if !pre_ok {
            println!("FAIL preflight {kind} {spec}: {pre:?}");
            code = EXIT_VERIFY;
            out.all_residues_zero = false;
            continue;
        }
        if let Some(m) = mutation {
            apply_mutation(&mut t, m)?;
        }
        let cert = certify_tensor(&t, &gens, args.cofactors)?;
        let ok = cert.residue_zero();
        println!(
            "{} {kind:<6} {spec}  entries {:>4} structural {:>4} nonzero residues {}  ({} ms)",
            if ok { "PASS" } else { "FAIL" },
            cert.entries_total,
            cert.entries_structural,
            cert.entries_nonzero,
            cert.millis
        );
        for w in &cert.witnesses {
            println!("     witness entry {:?}: {} * {} ({} terms)", w.entry, w.coefficient, w.monomial, w.terms);
        }
        if !ok {
            code = EXIT_VERIFY;
            out.all_residues_zero = false;
        }
        out.certificates.push(cert);
    }
    let path = args.out.join("certificates.json");
    write_json(&path, &out)?;
    manifest.outputs.push(path);
    manifest.finish(&args.out, code as i32)?;
    Ok(code)
}

pub fn check_identities(args: &IdentityArgs) -> Result<u8> {
    let state = if args.state.is_empty() { None } else { Some(parse_state(&args.state)?) };
    if !(args.tolerance >= 0.0) {
        bail!("tolerance must be non-negative");
    }
    ensure_dir(&args.out)?;
    let config = serde_json::json!({ "samples": args.samples, "tolerance": args.tolerance, "state": state });
    let mut manifest = RunManifest::start("check-identities", config, Some(args.seed));
    let report = identity_suite(args.samples, args.seed, state)?;
    for s in &report.stats {
        let ok = s.evaluated > 0 && s.max_residual <= args.tolerance;
        println!(
            "{} {:<5} {}  evaluated {:>6} skipped {:>5} max residual {:.3e}",
            if ok { "PASS" } else { "FAIL" },
            s.identity,
            s.interaction,
            s.evaluated,
            s.skipped,
            s.max_residual
        );
    }
    let pass = report.passes(args.tolerance);
    let path = args.out.join("identities.json");
    write_json(&path, &serde_json::json!({ "tolerance": args.tolerance, "pass": pass, "report": report }))?;
    manifest.outputs.push(path);
    let code = if pass { EXIT_PASS } else { EXIT_VERIFY };
    manifest.finish(&args.out, code as i32)?;
    Ok(code)
}

fn snapshot_stem(i: usize) -> String {
    format!("snap_{i:04}")
}

pub fn simulate(args: &SimulateArgs) -> Result<u8> {
    let file: SimulateFile = load_config(&args.config)?;
    let plan = file.simulation.plan()?;
    if args.dry_run {
        println!("{}", serde_json::to_string_pretty(&serde_json::json!({ "config": file, "plan": plan }))?);
        return Ok(EXIT_PASS);
    }
    let snaps = args.out.join("snapshots");
    ensure_dir(&snaps)?;
    let mut manifest = RunManifest::start("simulate", serde_json::to_value(&file)?, Some(file.simulation.seed));
    let cfg: &SimConfig = &file.simulation;
    let every = file.output.snapshot_every;
    let mut written: Vec<PathBuf> = Vec::new();
    let mut sample_index = 0usize;
    let mut last_written = None;
    let run = simulate_observed(cfg, |t, u| {
        if sample_index == 0 || (every > 0 && sample_index.is_multiple_of(every)) {
            let (bin, json) = write_snapshot(&snaps, &snapshot_stem(sample_index), t, u, &cfg.state)?;
            written.extend([bin, json]);
            last_written = Some(sample_index);
        }
        sample_index += 1;
        Ok(())
    })?;
    // The last good field is always kept, also after a blow-up.
    let last = run.series.samples.len() - 1;
    if last_written != Some(last) {
        let (bin, json) = write_snapshot(&snaps, &snapshot_stem(last), run.final_time, &run.final_field, &cfg.state)?;
        written.extend([bin, json]);
    }
    let csv = args.out.join("series.csv");
    write_series_csv(&csv, &run.series)?;
    let summary: RunSummary = run.summary();
    let summary_path = args.out.join("run_summary.json");
    write_json(&summary_path, &summary)?;
    manifest.outputs.push(csv);
    manifest.outputs.push(summary_path);
    manifest.outputs.extend(written);
    let code = match &run.blowup {
        Some(e) => {
            eprintln!("blow-up: {e}");
            EXIT_BLOWUP
        }
        None => EXIT_PASS,
    };
    println!("{} samples to t = {}; outputs in {}", summary.samples, summary.final_time, args.out.display());
    manifest.finish(&args.out, code as i32)?;
    Ok(code)
}

#[derive(Serialize)]
struct DecayOutput {
    window: [f64; 2],
    quotient_window: [f64; 2],
    dispersion: Option<DecayReport>,
    dispersion_pass: Option<bool>,
    u0: Option<U0Report>,
    u0_pass: Option<bool>,
}

pub fn decay_report(args: &DecayArgs) -> Result<u8> {
    let file: DecayFile = load_config(&args.config)?;
    if file.dispersion.is_none() && file.u0.is_none() {
        bail!("config requests neither a dispersion nor a u0 probe");
    }
    if let Some(d) = &file.dispersion {
        d.state.validate()?;
        let wrap = d.t_wrap()?;
        if d.t_stop >= wrap {
            bail!("fit window ends at t = {} but the front wraps at t = {wrap:.3}", d.t_stop);
        }
    }
    if let Some(u) = &file.u0 {
        u.simulation.plan()?;
    }
    if args.dry_run {
        println!("{}", serde_json::to_string_pretty(&file)?);
        return Ok(EXIT_PASS);
    }
    ensure_dir(&args.out)?;
    let seed = file.u0.as_ref().map(|u| u.simulation.seed);
    let mut manifest = RunManifest::start("decay-report", serde_json::to_value(&file)?, seed);
    let mut out = DecayOutput {
        window: file.window,
        quotient_window: file.quotient_window,
        dispersion: None,
        dispersion_pass: None,
        u0: None,
        u0_pass: None,
    };
    if let Some(d) = &file.dispersion {
        let r = dispersion_probe(d)?;
        let pass = r.slope >= file.window[0] && r.slope <= file.window[1];
        println!(
            "{} dispersion slope {:.4} (95% CI [{:.4}, {:.4}]) over t in [{}, {}], wrap at {:.2}",
            if pass { "PASS" } else { "FAIL" },
            r.slope,
            r.ci[0],
            r.ci[1],
            r.window[0],
            r.window[1],
            r.t_wrap
        );
        out.dispersion = Some(r);
        out.dispersion_pass = Some(pass);
    }
    if let Some(u) = &file.u0 {
        let r = u0_smallness_probe(&u.simulation, u.amplitude)?;
        let pass = r.quotient_min >= file.quotient_window[0] && r.quotient_max <= file.quotient_window[1];
        println!(
            "{} u0 quotient in [{:.4}, {:.4}]",
            if pass { "PASS" } else { "FAIL" },
            r.quotient_min,
            r.quotient_max
        );
        out.u0 = Some(r);
        out.u0_pass = Some(pass);
    }
    let path = args.out.join("decay_report.json");
    write_json(&path, &out)?;
    manifest.outputs.push(path);
    let pass = out.dispersion_pass.unwrap_or(true) && out.u0_pass.unwrap_or(true);
    let code = if pass { EXIT_PASS } else { EXIT_VERIFY };
    manifest.finish(&args.out, code as i32)?;
    Ok(code)
}

fn rows(m: &Mat10) -> Vec<Vec<f64>> {
    (0..10).map(|i| (0..10).map(|j| m[(i, j)]).collect()).collect()
}

pub fn projectors(args: &ProjectorArgs) -> Result<u8> {
    let xi = Vec3::from(parse_vec3(&args.xi)?);
    let state = parse_state(&args.state)?;
    let [p0, pp, pm] = eigen_projectors(&xi, &state)?;
    let a0 = assemble_a0(&xi, &state);
    let n0 = norm0(&xi, &state);
    let value = serde_json::json!({
        "xi": [xi[0], xi[1], xi[2]],
        "state": state,
        "norm0": n0,
        "eigenvalues": { "P0": 0.0, "Pplus": n0, "Pminus": -n0 },
        "layout": abi_core::grid::COMPONENT_LAYOUT,
        "A0": rows(&a0.m),
        "P0": rows(&p0),
        "Pplus": rows(&pp),
        "Pminus": rows(&pm),
    });
    let text = serde_json::to_string_pretty(&value)?;
    match &args.out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(EXIT_PASS)
}
