use std::path::Path;

use localtime::bounds::{rescaled_chi_discrete, LatticeBox, LinearFunctional};
use localtime::chain::{Budget, Simulator};
use localtime::density::{density_certified, density_quadrature_refined, SeriesOptions};
use localtime::harness::{
    parallel_chunks, varadhan_check, verify_density_mc, verify_ldp_mc, verify_rayknight_mc, DensityMcConfig,
    LdpMcConfig, RayKnightMcConfig, CHUNK,
};
use localtime::{density_tridiagonal, density_upper_bound, rate_general, rate_symmetric, Generator, SimplexPoint};

use crate::config::*;
use crate::error::CliError;
use crate::report::{config_hash, num, Report, Table};

const QUADRATURE_MAX_GRID: usize = 256;

/// Run one experiment; `base` resolves relative generator paths.
pub fn run(name: &str, experiment: &Experiment, base: &Path) -> Result<Report, CliError> {
    let mut report = Report::new(name, experiment.kind(), experiment.seed(), config_hash(experiment));
    match experiment {
        Experiment::Density(c) => density(c, base, &mut report)?,
        Experiment::Bound(c) => bound(c, base, &mut report)?,
        Experiment::Rate(c) => rate(c, base, &mut report)?,
        Experiment::Ldp(c) => ldp(c, base, &mut report)?,
        Experiment::Simulate(c) => simulate(c, base, &mut report)?,
        Experiment::VerifyDensity(c) => verify_density(c, base, &mut report)?,
        Experiment::VerifyRayknight(c) => verify_rayknight(c, &mut report)?,
        Experiment::ChiDiscrete(c) => chi(c, &mut report)?,
    }
    Ok(report)
}

fn point(g: &Generator, range: &[localtime::chain::Label], l: &[f64]) -> Result<SimplexPoint, CliError> {
    let idx = resolve_all(g, "range", range)?;
    if idx.len() != l.len() {
        return Err(CliError::usage(format!("l: {} values for a range of {} states", l.len(), idx.len())));
    }
    Ok(SimplexPoint::new(&idx, l)?)
}

fn density(c: &DensityConfig, base: &Path, report: &mut Report) -> Result<(), CliError> {
    let g = c.generator.build(base)?;
    let l = point(&g, &c.range, &c.l)?;
    let a = resolve(&g, "a", &c.a)?;
    let b = resolve(&g, "b", &c.b)?;
    let mut found = Vec::new();
    if matches!(c.method, Method::Series | Method::All) {
        let v = density_certified(&g, a, b, &l, &SeriesOptions::with_tol(c.tol))?;
        report.value("density", v.value);
        report.value("tail_bound", v.tail_bound);
        report.value("order", v.order);
        found.push(("series", v.value));
    }
    if matches!(c.method, Method::Quadrature) || (c.method == Method::All && l.len() <= 4) {
        let q = density_quadrature_refined(&g, a, b, &l, c.tol.max(1e-14), QUADRATURE_MAX_GRID)?;
        report.value("quadrature", q.value);
        report.value("grid_size", q.grid_size);
        found.push(("quadrature", q.value));
    }
    if matches!(c.method, Method::Tridiagonal | Method::All) {
        match density_tridiagonal(&g, a, b, &l) {
            Ok(v) => {
                report.value("tridiagonal", v);
                found.push(("tridiagonal", v));
            }
            Err(e) if c.method == Method::All => report.value("tridiagonal", format!("not applicable: {e}")),
            Err(e) => return Err(e.into()),
        }
    }
    if c.method != Method::All && !report.values.contains_key("density") {
        report.value("density", found[0].1);
    }
    if found.len() > 1 {
        let (lo, hi) =
            found.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, v)| (lo.min(v), hi.max(v)));
        let rel = (hi - lo) / hi.abs().max(1e-300);
        let names: Vec<&str> = found.iter().map(|f| f.0).collect();
        report.criterion(
            "methods agree",
            rel <= 1e-8,
            format!("{} within {rel:.2e} relative, tol 1e-8", names.join("/")),
        );
    }
    Ok(())
}

fn bound(c: &BoundConfig, base: &Path, report: &mut Report) -> Result<(), CliError> {
    let g = c.generator.build(base)?;
    let l = point(&g, &c.range, &c.l)?;
    let a = resolve(&g, "a", &c.a)?;
    let b = resolve(&g, "b", &c.b)?;
    let rho = density_certified(&g, a, b, &l, &SeriesOptions::with_tol(c.tol))?.value;
    let upper = density_upper_bound(&g, a, b, &l)?;
    report.value("density", rho);
    report.value("bound", upper);
    report.criterion("density <= bound", rho <= upper + 1e-12, format!("{rho:e} <= {upper:e}"));
    Ok(())
}

fn rate(c: &RateConfig, base: &Path, report: &mut Report) -> Result<(), CliError> {
    let g = c.generator.build(base)?;
    let sol = rate_general(&g, &c.mu, c.tol)?;
    report.value("rate", sol.value);
    report.value("iterations", sol.iterations);
    report.value("gradient_norm", sol.final_gradient_norm);
    let mut table = Table::new(&["state", "mu", "minimizer"]);
    for (&x, m) in sol.support.iter().zip(&sol.minimizer) {
        table.push(vec![g.label(x).into(), num(c.mu[x]), num(*m)]);
    }
    if g.is_symmetric() {
        let sym = rate_symmetric(&g, &c.mu)?;
        report.value("rate_symmetric", sym);
        let err = (sym - sol.value).abs();
        report.criterion("general matches symmetric", err <= 1e-6, format!("difference {err:.2e}, tol 1e-6"));
    }
    report.table = Some(table);
    Ok(())
}

fn ldp(c: &LdpConfig, base: &Path, report: &mut Report) -> Result<(), CliError> {
    let g = c.generator.build(base)?;
    let subset = resolve_all(&g, "subset", &c.subset)?;
    let start = resolve(&g, "start", &c.start)?;
    if c.halfspace.is_none() && c.potential.is_none() {
        return Err(CliError::usage("ldp: give `halfspace` and/or `potential`"));
    }
    let mut table = Table::new(&["check", "horizon", "log_value", "bound", "dominated", "hits", "samples"]);
    for (i, &t) in c.horizons.iter().enumerate() {
        if let Some(h) = &c.halfspace {
            let r = verify_ldp_mc(&LdpMcConfig {
                generator: g.clone(),
                subset: subset.clone(),
                start,
                coefficients: h.coefficients.clone(),
                threshold: h.threshold,
                horizon: t,
                samples: c.samples,
                seed: c.seed.wrapping_add(i as u64),
            })?;
            report.criterion(
                &format!("halfspace T={t}"),
                r.dominated,
                format!("log upper 99% {:.4} <= bound {:.4} ({} hits)", r.log_upper_99, r.bound, r.hits),
            );
            table.push(vec![
                "halfspace".into(),
                num(t),
                num(r.log_upper_99),
                num(r.bound),
                r.dominated.to_string(),
                r.hits.to_string(),
                r.samples.to_string(),
            ]);
        }
        if let Some(v) = &c.potential {
            let r = varadhan_check(&g, &subset, v, start, t)?;
            report.criterion(
                &format!("linear T={t}"),
                r.dominated,
                format!("log moment {:.4} <= bound {:.4}", r.exact_log, r.bound),
            );
            table.push(vec![
                "linear".into(),
                num(t),
                num(r.exact_log),
                num(r.bound),
                r.dominated.to_string(),
                String::new(),
                String::new(),
            ]);
        }
    }
    report.table = Some(table);
    Ok(())
}

fn simulate(c: &SimulateConfig, base: &Path, report: &mut Report) -> Result<(), CliError> {
    let g = c.generator.build(base)?;
    let start = resolve(&g, "start", &c.start)?;
    let budget = Budget { max_jumps: c.max_jumps.unwrap_or(Budget::default().max_jumps), ..Budget::default() };
    let mode = match (c.horizon, &c.pivot, c.level) {
        (Some(t), None, None) => Ok(t),
        (None, Some(p), Some(h)) => Err((resolve(&g, "pivot", p)?, h)),
        _ => return Err(CliError::usage("simulate: give either `horizon`, or both `pivot` and `level`")),
    };
    let chunks = parallel_chunks(c.seed, c.samples, CHUNK, |rng, n| {
        let sim = Simulator::new(&g);
        (0..n)
            .map(|_| match mode {
                Ok(t) => sim.fixed_time(start, t, rng),
                Err((pivot, h)) => sim.inverse_local_time(start, pivot, h, budget, rng).map(|r| r.path),
            })
            .collect::<localtime::Result<Vec<_>>>()
    })?;
    let mut header = vec!["path".to_string(), "endpoint".into(), "jumps".into(), "horizon".into()];
    header.extend(g.labels().iter().map(|l| format!("l[{l}]")));
    let mut table = Table { header, rows: Vec::new() };
    let mut mean = vec![0.0; g.len()];
    for (i, p) in chunks.iter().flatten().enumerate() {
        let mut row = vec![i.to_string(), g.label(p.endpoint).into(), p.jumps.to_string(), num(p.horizon)];
        row.extend(p.local_times.iter().map(|&v| num(v)));
        table.push(row);
        mean.iter_mut().zip(&p.local_times).for_each(|(m, v)| *m += v / c.samples as f64);
    }
    let means: serde_json::Map<String, serde_json::Value> =
        g.labels().iter().zip(&mean).map(|(l, m)| (l.clone(), (*m).into())).collect();
    report.value("samples", c.samples);
    report.value("mean_local_time", means);
    report.table = Some(table);
    Ok(())
}

fn verify_density(c: &VerifyDensityConfig, base: &Path, report: &mut Report) -> Result<(), CliError> {
    let g = c.generator.build(base)?;
    let config = DensityMcConfig {
        range: resolve_all(&g, "range", &c.range)?,
        start: resolve(&g, "start", &c.start)?,
        end: resolve(&g, "end", &c.end)?,
        generator: g,
        horizon: c.horizon,
        samples: c.samples,
        bins: c.bins,
        seed: c.seed,
        tol: c.tol,
    };
    let r = verify_density_mc(&config)?;
    report.value("samples", r.samples);
    report.value("conditioned", r.conditioned);
    report.value("event_probability", r.event_probability);
    report.value("event_frequency", r.event_frequency);
    report.value("chi_square", r.chi_square.statistic);
    report.value("dof", r.chi_square.dof);
    report.value("p_value", r.chi_square.p_value);
    report.value("excluded_cells", r.excluded_cells);
    report.value("flagged_cells", r.flagged_cells);
    report.criterion(
        "chi-square",
        r.chi_square.p_value > c.alpha,
        format!("p = {:.4} over {} groups, need > {}", r.chi_square.p_value, r.chi_square.groups, c.alpha),
    );
    report.criterion("event probability", r.event_z.abs() < 4.0, format!("z = {:.2}, need |z| < 4", r.event_z));
    for check in &r.two_state {
        report.criterion(
            &check.name,
            check.z.abs() < 4.0,
            format!("frequency {:.6} vs {:.6}, z = {:.2}", check.frequency, check.exact, check.z),
        );
    }
    let mut table = Table::new(&["cell", "observed", "expected", "mass", "flagged"]);
    for cell in &r.cells {
        table.push(vec![
            cell.index.to_string(),
            cell.observed.to_string(),
            num(cell.expected),
            num(cell.mass),
            cell.flagged.to_string(),
        ]);
    }
    report.table = Some(table);
    Ok(())
}

fn verify_rayknight(c: &VerifyRayKnightConfig, report: &mut Report) -> Result<(), CliError> {
    let budget = Budget { max_jumps: c.max_jumps.unwrap_or(Budget::default().max_jumps), ..Budget::default() };
    let r = verify_rayknight_mc(&RayKnightMcConfig {
        pivot: c.pivot,
        level: c.level,
        samples: c.samples,
        seed: c.seed,
        budget,
    })?;
    report.value("samples", r.samples);
    report.value("max_moment_z", r.max_moment_z);
    report.value("independence_correlation", r.independence_correlation);
    report.criterion("moments", r.max_moment_z < 3.0, format!("max |z| = {:.2}, need < 3", r.max_moment_z));
    for atom in &r.atoms {
        let z = atom.direct_z.abs().max(atom.profile_z.abs());
        report.criterion(
            &format!("atom at {}", atom.site),
            z < 4.0,
            format!("exact {:.6}, direct z = {:.2}, profile z = {:.2}", atom.exact, atom.direct_z, atom.profile_z),
        );
    }
    report.criterion(
        "independence",
        r.independence_z.abs() < 4.0,
        format!("correlation {:.4}, z = {:.2}", r.independence_correlation, r.independence_z),
    );
    let mut table = Table::new(&[
        "site",
        "direct_mean",
        "direct_mean_se",
        "profile_mean",
        "profile_mean_se",
        "mean_z",
        "direct_variance",
        "profile_variance",
        "variance_z",
        "direct_zero_frequency",
        "profile_zero_frequency",
        "zero_z",
    ]);
    for s in &r.sites {
        table.push(vec![
            s.site.to_string(),
            num(s.direct_mean),
            num(s.direct_mean_se),
            num(s.profile_mean),
            num(s.profile_mean_se),
            num(s.mean_z),
            num(s.direct_variance),
            num(s.profile_variance),
            num(s.variance_z),
            num(s.direct_zero_frequency),
            num(s.profile_zero_frequency),
            num(s.zero_z),
        ]);
    }
    report.table = Some(table);
    Ok(())
}

fn chi(c: &ChiConfig, report: &mut Report) -> Result<(), CliError> {
    let lattice = LatticeBox { radius: c.radius, dim: c.dim };
    let potential = match &c.potential {
        Some(p) if p.len() != lattice.sites() => {
            return Err(CliError::usage(format!("potential: {} values for {} sites", p.len(), lattice.sites())))
        }
        Some(p) => p.clone(),
        None => {
            let mut p = vec![0.0; lattice.sites()];
            p[lattice.origin()] = c.delta;
            p
        }
    };
    let sol = rescaled_chi_discrete(lattice, c.alpha, &LinearFunctional { potential }, c.tol)?;
    report.value("value", sol.value);
    report.value("gradient_norm", sol.gradient_norm);
    let mut table = Table::new(&["site", "coordinates", "mu"]);
    let side = lattice.side();
    for (i, m) in sol.measure.iter().enumerate() {
        let mut coords = Vec::with_capacity(c.dim);
        let mut rest = i;
        for _ in 0..c.dim {
            coords.push((rest % side) as i64 - c.radius as i64);
            rest /= side;
        }
        let coords: Vec<String> = coords.iter().map(|v| v.to_string()).collect();
        table.push(vec![i.to_string(), coords.join(" "), num(*m)]);
    }
    report.table = Some(table);
    Ok(())
}
