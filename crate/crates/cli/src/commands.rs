//! The subcommands. Each returns an [`Outcome`]: a JSON summary plus the
//! text printed without `--json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use num_bigint::BigInt;
use serde_json::{json, Value};

use certibound_core::certify::{certify, min_eig_lower_bound, CertifyConfig, CertifyError, SpectralBound};
use certibound_core::pipeline::{involution_blocks, relax, relax_with_bases, strategy_name, RelaxOptions, Relaxation};
use certibound_core::problems::{
    bell_two_party, chsh, exact_diagonalization, heisenberg_chain, parse_catalog, tilted_chsh, ChainSpec,
};
use certibound_core::rationalize::{precertify, PreCertificate, RoundingConfig};
use certibound_core::relaxation::{ChordalStrategy, NpoProblem};
use certibound_core::scalar::{to_f64, Rational};
use certibound_core::sdpsolve::{certificate_error, solve, NumericSolution, SolveStatus, SolverConfig};
use certibound_core::verifier::verify;
use certibound_core::Error;

use crate::formats::{
    parse_float, rational, read_json, read_problem, to_json, write_json, CertificateFile, PreCertificateFile,
    ProblemFile, RelaxDecl, RunReport, SdpFile, SolutionFile, SolverDecl,
};
use crate::{Chordal, ChainArgs, CertifyArgs, Cli, CliError, Command, GenKind, RelaxArgs, ReportArgs, SolveArgs, VerifyArgs};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub json: Value,
    pub text: String,
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Relax(a) => cmd_relax(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Certify(a) => cmd_certify(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Report(a) => cmd_report(a),
        Command::Gen(g) => cmd_gen(&g.kind),
        Command::ExactEnergy(c) => cmd_exact_energy(c),
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

// ------------------------------------------------------------------ relax

fn chordal(c: Chordal) -> ChordalStrategy {
    match c {
        Chordal::Minfill => ChordalStrategy::MinFill,
        Chordal::Dense => ChordalStrategy::Dense,
    }
}

/// Rebuilds the relaxation a [`RelaxDecl`] describes.
pub fn build_relaxation(file: &ProblemFile, p: &NpoProblem, decl: &RelaxDecl) -> Result<Relaxation, CliError> {
    match decl.mode.as_str() {
        "dense" | "sparse" => {
            let strategy = match decl.chordal.as_deref() {
                None | Some("minfill") => ChordalStrategy::MinFill,
                Some("dense") => ChordalStrategy::Dense,
                Some(s) => return Err(invalid(format!("unknown chordal strategy {s:?}"))),
            };
            let opts = RelaxOptions { order: decl.order, sparse: decl.mode == "sparse", chordal: strategy };
            relax(p, &opts).map_err(invalid)
        }
        "symmetric" => {
            let sigma = file.symmetry_map()?.ok_or_else(|| invalid("problem declares no symmetry"))?;
            let [plus, minus] = involution_blocks(p, decl.order, &sigma).map_err(invalid)?;
            relax_with_bases(p, decl.order, &[Vec::from([plus, minus])]).map_err(invalid)
        }
        m => Err(invalid(format!("unknown relaxation mode {m:?}"))),
    }
}

fn cmd_relax(a: &RelaxArgs) -> Result<Outcome, CliError> {
    let (file, p) = read_problem(&a.problem)?;
    let decl = RelaxDecl {
        order: a.order,
        mode: String::from(if a.sparse {
            "sparse"
        } else if a.symmetric {
            "symmetric"
        } else {
            "dense"
        }),
        chordal: a.sparse.then(|| strategy_name(chordal(a.chordal)).to_string()),
    };
    let r = build_relaxation(&file, &p, &decl)?;
    let out = SdpFile::from_sdp(&p.name, decl.clone(), &r.sdp, p.vars());
    write_json(&a.output, &out)?;
    let dims: Vec<usize> = r.sdp.blocks.iter().map(|b| b.dim).collect();
    let text = format!(
        "{}: order {} {} relaxation, blocks {:?}, {} constraints -> {}",
        p.name,
        a.order,
        decl.mode,
        dims,
        r.sdp.constraints.len(),
        a.output.display()
    );
    Ok(Outcome {
        json: json!({
            "problem": p.name,
            "order": a.order,
            "mode": decl.mode,
            "block_dims": dims,
            "constraints": r.sdp.constraints.len(),
            "output": a.output.display().to_string(),
        }),
        text,
    })
}

// ------------------------------------------------------------------ solve

fn cmd_solve(a: &SolveArgs) -> Result<Outcome, CliError> {
    let sdp_file: SdpFile = read_json(&a.sdp)?;
    let sdp = sdp_file.to_sdp()?;
    let cfg = SolverConfig { eps_feas: a.eps_feas, gap_tol: a.gap_tol, max_iter: a.max_iter, ..SolverConfig::default() };
    let t = Instant::now();
    let (sol, solver) = match &a.import {
        Some(path) => {
            let imported: SolutionFile = read_json(path)?;
            let blocks = imported.float_blocks()?;
            let status = SolveStatus::parse(&imported.status).unwrap_or(SolveStatus::FeasibleOnly);
            let sol = NumericSolution::from_blocks(&sdp, parse_float(&imported.bound)?, blocks, status).map_err(invalid)?;
            (sol, None)
        }
        None => {
            let sol = solve(&sdp, &cfg).map_err(invalid)?;
            let decl = SolverDecl { eps_feas: a.eps_feas.to_string(), gap_tol: a.gap_tol.to_string(), max_iter: a.max_iter };
            (sol, Some(decl))
        }
    };
    let elapsed = ms(t);
    let mut out = SolutionFile::from_solution(&sdp_file.problem, sdp_file.relaxation.clone(), &sol);
    out.solver = solver;
    out.elapsed_ms = Some(elapsed);
    write_json(&a.output, &out)?;
    let summary = json!({
        "problem": sdp_file.problem,
        "status": sol.status.as_str(),
        "bound": sol.bound,
        "iterations": sol.iterations,
        "primal_infeasibility": sol.primal_infeasibility,
        "dual_infeasibility": sol.dual_infeasibility,
        "gap": sol.gap,
        "elapsed_ms": elapsed,
        "output": a.output.display().to_string(),
    });
    if sol.status == SolveStatus::Failed {
        return Err(CliError::SolveFailed(format!(
            "{} after {} iterations; last iterate saved to {}",
            sdp_file.problem,
            sol.iterations,
            a.output.display()
        )));
    }
    let text = format!(
        "{}: {} bound {:.12} ({} iterations, {:.1} ms) -> {}",
        sdp_file.problem,
        sol.status.as_str(),
        sol.bound,
        sol.iterations,
        elapsed,
        a.output.display()
    );
    Ok(Outcome { json: summary, text })
}

// ---------------------------------------------------------------- certify

/// Certified spectral bounds for every Gram block of `pre`, spread over
/// `jobs` threads. The result does not depend on `jobs`.
pub fn parallel_spectral_bounds(pre: &PreCertificate, gap: &Rational, jobs: usize) -> Result<Vec<SpectralBound>, CertifyError> {
    let n = pre.grams.len();
    let jobs = jobs.clamp(1, n.max(1));
    if jobs == 1 {
        return pre.grams.iter().map(|(_, g)| min_eig_lower_bound(g, gap)).collect();
    }
    let mut slots: Vec<Option<Result<SpectralBound, CertifyError>>> = (0..n).map(|_| None).collect();
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                s.spawn(move || {
                    (j..n).step_by(jobs).map(|i| (i, min_eig_lower_bound(&pre.grams[i].1, gap))).collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("spectral worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|r| r.expect("every block bounded")).collect()
}

fn certify_error(e: Error) -> CliError {
    match e {
        Error::Certify(CertifyError::UnsupportedConstraintFamily(v)) => {
            CliError::Unsupported(format!("variable {v} is not unipotent, projector, box- or ball-constrained; no bound"))
        }
        e => invalid(e),
    }
}

fn cmd_certify(a: &CertifyArgs) -> Result<Outcome, CliError> {
    let (file, p) = read_problem(&a.problem)?;
    let sol_file: SolutionFile = read_json(&a.solution)?;
    if sol_file.problem != p.name {
        return Err(invalid(format!("solution is for {:?}, problem is {:?}", sol_file.problem, p.name)));
    }
    let sol = sol_file.to_solution()?;
    if sol.status == SolveStatus::Failed {
        return Err(CliError::SolveFailed(String::from("solution file records a failed solve")));
    }
    let rcfg = RoundingConfig {
        eta: rational(&a.eta)?,
        max_denominator: a.max_den.parse::<BigInt>().map_err(|_| invalid(format!("bad --max-den {:?}", a.max_den)))?,
    };
    let ccfg = CertifyConfig { gap: rational(&a.gap)?, tighten: a.tighten, ..CertifyConfig::default() };
    let mut timings = BTreeMap::new();
    if let Some(t) = sol_file.elapsed_ms {
        timings.insert(String::from("solve"), t);
    }

    let t = Instant::now();
    let decl = &sol_file.relaxation;
    let r = build_relaxation(&file, &p, decl)?;
    if r.sdp.blocks.len() != sol.blocks.len()
        || r.sdp.blocks.iter().zip(&sol.blocks).any(|(b, s)| b.dim != s.dim || b.complex != s.complex)
    {
        return Err(invalid("solution blocks do not match the relaxation"));
    }
    timings.insert(String::from("relax"), ms(t));

    let t = Instant::now();
    let d_d = certificate_error(&p, &r.structures, &sol);
    let pre = precertify(&p, &r.structures, &sol, &rcfg).map_err(|e| certify_error(e.into()))?;
    timings.insert(String::from("rationalize"), ms(t));
    if let Some(path) = &a.precert {
        write_json(path, &PreCertificateFile::from_pre(&pre, &r.structures, &p))?;
    }

    let t = Instant::now();
    let bounds = parallel_spectral_bounds(&pre, &ccfg.gap, a.jobs).map_err(|e| certify_error(e.into()))?;
    timings.insert(String::from("spectral"), ms(t));

    let t = Instant::now();
    let result = certify(&p, &r.structures, &pre, &bounds, decl.order, &ccfg);
    timings.insert(String::from("certify"), ms(t));
    let (bound, cert) = match result {
        Ok(x) => x,
        Err(e) => {
            let psd = bounds.iter().all(|b| b.psd);
            let err = certify_error(e.into());
            return Err(match err {
                CliError::Unsupported(m) => CliError::Unsupported(format!("{m} (pre-certificate PSD: {psd})")),
                e => e,
            });
        }
    };
    let cfile = CertificateFile::from_certificate(&cert, &p);
    write_json(&a.output, &cfile)?;

    let report = RunReport {
        problem: p.name.clone(),
        order: decl.order,
        mode: decl.mode.clone(),
        sizes: bound.sizes.clone(),
        block_dims: r.sdp.blocks.iter().map(|b| b.dim).collect(),
        solver_status: sol.status.as_str().to_string(),
        lambda_d: sol.bound,
        d_d,
        lambda_tilde: bound.lambda_tilde.to_string(),
        mu_low: bounds.iter().map(|b| b.mu_low.to_string()).collect(),
        delta: bound.delta.to_string(),
        lambda_rat: bound.lambda_rat.to_string(),
        lambda_rat_f64: to_f64(&bound.lambda_rat),
        user_bound: cfile.user_bound.clone(),
        path: bound.path.as_str().to_string(),
        eta: rcfg.eta.to_string(),
        gap: ccfg.gap.to_string(),
        timings_ms: timings,
    };
    if let Some(path) = &a.report {
        write_json(path, &report)?;
    }
    let text = format!(
        "{}: λ_rat = {} ≈ {:.12} (λ_d = {:.12}, δ ≈ {:.3e}, {}) -> {}",
        p.name,
        bound.lambda_rat,
        report.lambda_rat_f64,
        sol.bound,
        to_f64(&bound.delta),
        report.path,
        a.output.display()
    );
    let json = serde_json::to_value(&report).expect("serializable");
    Ok(Outcome { json, text })
}

// ----------------------------------------------------------------- verify

fn cmd_verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let cfile: CertificateFile = read_json(&a.certificate)?;
    let (_, p) = read_problem(&a.problem)?;
    let cert = cfile.to_certificate(&p)?;
    let t = Instant::now();
    let mut report = verify(&p, &cert).map_err(|e| CliError::Rejected(e.to_string()))?;
    report.elapsed_ms = Some(ms(t));
    let json = json!({
        "problem": p.name,
        "valid": report.valid(),
        "bound": cfile.bound,
        "user_bound": cfile.user_bound,
        "identity_ok": report.identity_ok,
        "psd_ok": report.psd_ok,
        "constraint_family_ok": report.constraint_family_ok,
        "failing_word": report.failing_word,
        "failing_block": report.failing_block,
        "message": report.message,
        "elapsed_ms": report.elapsed_ms,
    });
    if let Some(path) = &a.report {
        write_text(path, &to_json(&json))?;
    }
    if !report.valid() {
        let mut why = Vec::new();
        if let Some(w) = &report.failing_word {
            why.push(format!("identity fails at word {w}"));
        }
        if let Some(b) = &report.failing_block {
            why.push(format!("block {b} is not PSD"));
        }
        if !report.constraint_family_ok {
            why.push(String::from("constraint-family witness fails"));
        }
        if let Some(m) = &report.message {
            why.push(m.clone());
        }
        if why.is_empty() {
            why.push(String::from("invalid"));
        }
        return Err(CliError::Rejected(why.join("; ")));
    }
    let text = format!("{}: valid, bound {} ({} blocks checked)", p.name, cfile.user_bound, report.psd_ok.len());
    Ok(Outcome { json, text })
}

// ----------------------------------------------------------------- report

pub const REPORT_HEADER: [&str; 17] = [
    "problem",
    "order",
    "mode",
    "sizes",
    "total_dim",
    "lambda_d",
    "D_d",
    "lambda_tilde",
    "mu_low_min",
    "delta",
    "delta_f64",
    "lambda_rat",
    "lambda_rat_f64",
    "path",
    "t_solve_ms",
    "t_rationalize_ms",
    "t_certify_ms",
];

fn report_row(r: &RunReport) -> Result<Vec<String>, CliError> {
    let lt = rational(&r.lambda_tilde)?;
    let lr = rational(&r.lambda_rat)?;
    // recomputed rather than copied, so the column always matches the bounds
    let delta = &lr - &lt;
    let mu_min = r
        .mu_low
        .iter()
        .map(|m| rational(m))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .min()
        .map(|m| m.to_string())
        .unwrap_or_default();
    let t = |k: &str| r.timings_ms.get(k).map(|v| format!("{v:.3}")).unwrap_or_default();
    let certify_ms: f64 = ["spectral", "certify"].iter().filter_map(|k| r.timings_ms.get(*k)).sum();
    Ok(vec![
        r.problem.clone(),
        r.order.to_string(),
        r.mode.clone(),
        r.sizes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "),
        r.block_dims.iter().sum::<usize>().to_string(),
        format!("{:?}", r.lambda_d),
        format!("{:?}", r.d_d),
        r.lambda_tilde.clone(),
        mu_min,
        delta.to_string(),
        format!("{:?}", to_f64(&delta)),
        r.lambda_rat.clone(),
        format!("{:?}", to_f64(&lr)),
        r.path.clone(),
        t("solve"),
        t("rationalize"),
        format!("{certify_ms:.3}"),
    ])
}

fn cmd_report(a: &ReportArgs) -> Result<Outcome, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(REPORT_HEADER).map_err(invalid)?;
    for path in &a.runs {
        let r: RunReport = read_json(path)?;
        w.write_record(report_row(&r)?).map_err(invalid)?;
    }
    let bytes = w.into_inner().map_err(invalid)?;
    fs::write(&a.output, bytes).map_err(|e| invalid(format!("{}: {e}", a.output.display())))?;
    Ok(Outcome {
        json: json!({ "rows": a.runs.len(), "output": a.output.display().to_string() }),
        text: format!("{} runs -> {}", a.runs.len(), a.output.display()),
    })
}

// -------------------------------------------------------------------- gen

fn chain_spec(c: &ChainArgs) -> Result<ChainSpec, CliError> {
    let spec = ChainSpec { n: c.sites, j2: rational(&c.j2)?, periodic: !c.open };
    spec.validate().map_err(invalid)?;
    Ok(spec)
}

fn write_problem(path: &Path, p: &NpoProblem) -> Result<Value, CliError> {
    write_json(path, &ProblemFile::from_problem(p))?;
    Ok(json!({ "problem": p.name, "variables": p.vars().len(), "output": path.display().to_string() }))
}

fn cmd_gen(kind: &GenKind) -> Result<Outcome, CliError> {
    let (p, out) = match kind {
        GenKind::Chsh { output } => (chsh(), output),
        GenKind::Tilted { theta_a, theta_b, output } => (tilted_chsh(&rational(theta_a)?, &rational(theta_b)?).map_err(invalid)?, output),
        GenKind::Heisenberg { chain, output } => (heisenberg_chain(&chain_spec(chain)?).map_err(invalid)?, output),
        GenKind::Bell { catalog, entry, output } => {
            let text = fs::read_to_string(catalog).map_err(|e| invalid(format!("{}: {e}", catalog.display())))?;
            let entries = parse_catalog(&text).map_err(|e| invalid(format!("{}: {e}", catalog.display())))?;
            if let Some(name) = entry {
                let (n, spec) = entries
                    .iter()
                    .find(|(n, _)| n == name)
                    .ok_or_else(|| invalid(format!("no entry {name:?} in {}", catalog.display())))?;
                (bell_two_party(n, spec).map_err(invalid)?, output)
            } else {
                fs::create_dir_all(output).map_err(|e| invalid(format!("{}: {e}", output.display())))?;
                let mut written = Vec::new();
                for (n, spec) in &entries {
                    let p = bell_two_party(n, spec).map_err(invalid)?;
                    written.push(write_problem(&output.join(format!("{n}.json")), &p)?);
                }
                return Ok(Outcome {
                    text: format!("{} problems -> {}", written.len(), output.display()),
                    json: json!({ "output": output.display().to_string(), "problems": written }),
                });
            }
        }
    };
    let json = write_problem(out, &p)?;
    Ok(Outcome { text: format!("{} -> {}", p.name, out.display()), json })
}

fn cmd_exact_energy(c: &ChainArgs) -> Result<Outcome, CliError> {
    let spec = chain_spec(c)?;
    let g = exact_diagonalization(&spec, &Rational::new(1.into(), 1_000_000_000i64.into())).map_err(invalid)?;
    Ok(Outcome {
        json: json!({
            "sites": spec.n,
            "j2": spec.j2.to_string(),
            "periodic": spec.periodic,
            "low": g.low.to_string(),
            "high": g.high.to_string(),
            "estimate": g.estimate,
            "degenerate": g.degenerate,
        }),
        text: format!(
            "E0 in [{}, {}] ≈ {:.12}{}",
            g.low,
            g.high,
            g.estimate,
            if g.degenerate { " (degenerate)" } else { "" }
        ),
    })
}
