use std::f64::consts::TAU;

use anyhow::Context;
use clap::{ArgGroup, Args};
use phasesynth::fock::VACUUM_QUADRATURE_VARIANCE;
use phasesynth::fock::{binomial, squeezed_state, FockVector, Mixture, SqueezedParams, StateSpec};
use phasesynth::phase::{canonical_distribution, uniform_grid};
use serde::Serialize;

/// Angles used for the phase-distribution summary.
const SUMMARY_GRID: usize = 720;

#[derive(Args)]
#[command(group(ArgGroup::new("state").required(true).args(["binomial", "coherent_mean", "squeezed_approx", "spec"])))]
pub struct StatesArgs {
    /// Binomial state of order N.
    #[arg(long, value_name = "N")]
    binomial: Option<usize>,
    /// Coherent state with this mean photon number and zero phase.
    #[arg(long, value_name = "MEAN")]
    coherent_mean: Option<f64>,
    /// Squeezed state whose top three amplitudes match binomial(N).
    #[arg(long, value_name = "N")]
    squeezed_approx: Option<usize>,
    /// JSON state specification, or @path to a file holding one.
    #[arg(long, value_name = "JSON")]
    spec: Option<String>,
    /// Number-state cutoff; chosen automatically when omitted.
    #[arg(long)]
    cutoff: Option<usize>,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Serialize)]
struct PhaseSummary {
    at_zero: f64,
    max: f64,
    theta_max: f64,
    min: f64,
    theta_min: f64,
}

#[derive(Serialize)]
struct MemberReport {
    weight: f64,
    cutoff: usize,
    amplitudes: Vec<[f64; 2]>,
    mean_photon_number: f64,
}

#[derive(Serialize)]
struct RatioRow {
    n: usize,
    ratio: f64,
    binomial_ratio: f64,
}

#[derive(Serialize)]
struct SqueezeReport {
    alpha: f64,
    t: f64,
    squeezing_db: f64,
    ratios: Vec<RatioRow>,
}

#[derive(Serialize)]
struct StatesReport {
    spec: StateSpec,
    members: Vec<MemberReport>,
    mean_photon_number: f64,
    phase_distribution: PhaseSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    squeezed_match: Option<SqueezeReport>,
}

fn parse_spec(raw: &str) -> anyhow::Result<StateSpec> {
    let text = match raw.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
        None => raw.to_string(),
    };
    serde_json::from_str(&text).context("invalid state specification")
}

fn spec_from_args(args: &StatesArgs) -> anyhow::Result<StateSpec> {
    Ok(if let Some(n) = args.binomial {
        StateSpec::Binomial { n }
    } else if let Some(mean) = args.coherent_mean {
        StateSpec::Coherent { alpha: None, mean_photons: Some(mean), phase: None, cutoff: args.cutoff }
    } else if let Some(n) = args.squeezed_approx {
        StateSpec::SqueezedBinomialMatch { n, cutoff: args.cutoff }
    } else {
        parse_spec(args.spec.as_deref().expect("clap enforces one state flag"))?
    })
}

fn squeeze_report(n: usize, state: &FockVector) -> anyhow::Result<SqueezeReport> {
    let params = SqueezedParams::binomial_tail_match(n)?;
    // the variance is read off a generously truncated copy
    let wide = squeezed_state(params, state.cutoff().max(4 * n + 40))?;
    let top = state.amplitude(n).re;
    let ratios = (0..=n)
        .map(|k| RatioRow { n: k, ratio: state.amplitude(k).re / top, binomial_ratio: binomial(n, k).sqrt() })
        .collect();
    Ok(SqueezeReport {
        alpha: params.alpha.re,
        t: params.t().re,
        squeezing_db: -10.0 * (wide.min_quadrature_variance() / VACUUM_QUADRATURE_VARIANCE).log10(),
        ratios,
    })
}

pub fn run(args: &StatesArgs) -> anyhow::Result<()> {
    let spec = spec_from_args(args)?;
    let state = spec.build().context("cannot build state")?;
    let thetas = uniform_grid(SUMMARY_GRID);
    let dist = canonical_distribution(&state, &thetas);
    let (mut imax, mut imin) = (0, 0);
    for (i, p) in dist.points.iter().enumerate() {
        if p.value > dist.points[imax].value {
            imax = i;
        }
        if p.value < dist.points[imin].value {
            imin = i;
        }
    }
    let members: Vec<MemberReport> = state
        .components()
        .into_iter()
        .map(|(weight, s)| MemberReport {
            weight,
            cutoff: s.cutoff(),
            amplitudes: s.amplitudes().iter().map(|c| [c.re, c.im]).collect(),
            mean_photon_number: s.mean_photon_number(),
        })
        .collect();
    let squeezed_match = match (&spec, args.squeezed_approx) {
        (StateSpec::SqueezedBinomialMatch { n, .. }, Some(_)) => {
            let pure = spec.build_pure()?;
            Some(squeeze_report(*n, &pure)?)
        }
        _ => None,
    };
    let report = StatesReport {
        mean_photon_number: state.mean_photon_number(),
        phase_distribution: PhaseSummary {
            at_zero: dist.points[0].value,
            max: dist.points[imax].value,
            theta_max: dist.points[imax].theta,
            min: dist.points[imin].value,
            theta_min: dist.points[imin].theta,
        },
        spec,
        members,
        squeezed_match,
    };
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print_text(&report);
    }
    Ok(())
}

fn print_text(r: &StatesReport) {
    println!("state: {}", serde_json::to_string(&r.spec).unwrap_or_default());
    for m in &r.members {
        if r.members.len() > 1 {
            println!("member with weight {}", m.weight);
        }
        println!("cutoff: {}", m.cutoff);
        println!("{:>4} {:>22} {:>22} {:>14}", "n", "re c_n", "im c_n", "|c_n|^2");
        for (n, [re, im]) in m.amplitudes.iter().enumerate() {
            println!("{n:>4} {re:>22.15} {im:>22.15} {:>14.6e}", re * re + im * im);
        }
    }
    println!("mean photon number: {:.6}", r.mean_photon_number);
    let p = &r.phase_distribution;
    println!(
        "phase density: P(0) = {:.6}, max {:.6} at {:.4} rad, min {:.6} at {:.4} rad (uniform 1/2pi = {:.6})",
        p.at_zero,
        p.max,
        p.theta_max,
        p.min,
        p.theta_min,
        1.0 / TAU
    );
    if let Some(s) = &r.squeezed_match {
        println!(
            "squeezed approximation: alpha = {:.12}, t = {:.12}, {:.2} dB below vacuum noise",
            s.alpha, s.t, s.squeezing_db
        );
        println!("{:>4} {:>12} {:>12} {:>10}", "n", "c_n/c_N", "binomial", "mismatch");
        for row in &s.ratios {
            let mismatch = 100.0 * (row.ratio / row.binomial_ratio - 1.0);
            println!("{:>4} {:>12.6} {:>12.6} {:>9.3}%", row.n, row.ratio, row.binomial_ratio, mismatch);
        }
    }
}
