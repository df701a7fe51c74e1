//! One function per subcommand; each writes its artifact family into the
//! output directory and prints a one-line summary.

use std::path::Path;

use semiflow::{
    build_operators, conjugated_period, evaluate_s, find_attractor, format_f64, format_ratio, q,
    qi, is_irreducible, is_strongly_connected_vertices, periodicity_report,
    resolvent as eval_resolvent, simulation_series, spectral_projection,
    subdivide as subdivide_graph, subdivided_period, weakstar_continuity_probe,
    AttractorCertificate, ColumnStochasticOperator, EdgeMeasure, EdgeStepFunction, Error,
    GraphSpec, PiecewiseLinear, Q, TestFunction, DEFAULT_PROJECTION_MAX_ITER,
    DEFAULT_PROJECTION_TOL,
};
use serde_json::json;

use crate::artifacts::{write_csv, write_json};
use crate::{CliError, RatioGrid, Source};

/// Loads and fully validates a graph, returning its junction operator too.
fn load_validated(source: &Source) -> Result<(GraphSpec, ColumnStochasticOperator), CliError> {
    let spec = source.load()?;
    let report = spec.validate();
    if !report.is_valid() {
        return Err(CliError::Data(Error::InvalidGraph(report)));
    }
    let (_, op) = build_operators(&spec)?;
    Ok((spec, op))
}

fn load_step(path: &Path) -> Result<EdgeStepFunction, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

fn load_measure(path: &Path) -> Result<EdgeMeasure, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

fn load_phi(path: &Path) -> Result<TestFunction, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

fn attractor_json(cert: &AttractorCertificate) -> serde_json::Value {
    json!({
        "w": cert.w.iter().map(|v| v.0).collect::<Vec<usize>>(),
        "l": cert.l,
        "delta": format_ratio(&cert.delta),
    })
}

/// `analyze`: validation, connectivity, irreducibility, attractor certificate.
pub fn analyze(source: &Source, out: &Path) -> Result<(), CliError> {
    let (spec, op) = load_validated(source)?;
    let strongly_connected = is_strongly_connected_vertices(&spec);
    let irreducible = is_irreducible(&op);
    let n = spec.vertex_count();
    let attractor = find_attractor(&spec, n, n);
    let doc = json!({
        "valid": true,
        "vertices": n,
        "edges": spec.edge_count(),
        "strongly_connected": strongly_connected,
        "irreducible": irreducible,
        "attractor": attractor.as_ref().map(attractor_json),
    });
    let path = write_json(out, "analysis.json", &doc)?;
    let cert = match &attractor {
        Some(c) => format!(
            "w={{{}}} l={} delta={}",
            c.w.iter().map(|v| v.0.to_string()).collect::<Vec<_>>().join(","),
            c.l,
            format_ratio(&c.delta)
        ),
        None => "none".into(),
    };
    println!(
        "analyze: strongly_connected={strongly_connected} irreducible={irreducible} \
         attractor={cert} -> {}",
        path.display()
    );
    Ok(())
}

/// `spectral`: period, peripheral eigenvalues, projection residual, rho.
pub fn spectral(source: &Source, tol: f64, out: &Path) -> Result<(), CliError> {
    let (_, op) = load_validated(source)?;
    let dec = spectral_projection(&op, tol, DEFAULT_PROJECTION_MAX_ITER)?;
    let doc = json!({
        "k": dec.k,
        "peripheral": dec.peripheral,
        "rho": dec.rho,
        "residual": dec.residual,
        "iterations": dec.iterations,
        "fit_window": dec.fit_window,
    });
    let path = write_json(out, "spectral.json", &doc)?;
    println!(
        "spectral: k={} rho={} residual={} -> {}",
        dec.k,
        format_f64(dec.rho),
        format_f64(dec.residual),
        path.display()
    );
    Ok(())
}

/// `simulate`: exact trajectory norms, defect, and period residual per sample.
pub fn simulate(source: &Source, init: &Path, tgrid: &RatioGrid, out: &Path) -> Result<(), CliError> {
    let (_, op) = load_validated(source)?;
    let f = load_step(init)?;
    let dec = spectral_projection(&op, DEFAULT_PROJECTION_TOL, DEFAULT_PROJECTION_MAX_ITER)?;
    let rows = simulation_series(&op, &dec, &f, &tgrid.points)?;
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                format_ratio(&r.t),
                format_f64(r.l1),
                format_f64(r.linf),
                format_f64(r.defect),
                format_f64(r.theta_residual),
            ]
        })
        .collect();
    let path = write_csv(out, "series.csv", "t,l1,linf,defect,theta_residual", &table)?;
    println!("simulate: {} samples -> {}", rows.len(), path.display());
    Ok(())
}

/// `periodicity`: defect trace and decay-rate fit; exits 1 when the observed
/// decay is slower than the spectral prediction.
pub fn periodicity(source: &Source, tgrid: Option<&RatioGrid>, out: &Path) -> Result<(), CliError> {
    let (spec, op) = load_validated(source)?;
    let dec = spectral_projection(&op, DEFAULT_PROJECTION_TOL, DEFAULT_PROJECTION_MAX_ITER)?;
    let t_max = 50 * dec.k;
    let report = periodicity_report(&op, &dec, t_max, tgrid.map(|g| g.points.as_slice()))?;

    let n = spec.vertex_count();
    let attractor = find_attractor(&spec, n, n);
    let mut doc = serde_json::to_value(&report)
        .map_err(|e| CliError::Parse { path: out.join("periodicity.json"), message: e.to_string() })?;
    doc.as_object_mut()
        .expect("report serializes to an object")
        .insert("attractor".into(), attractor.as_ref().map(attractor_json).into());
    let json_path = write_json(out, "periodicity.json", &doc)?;

    let table: Vec<Vec<String>> = report
        .samples
        .iter()
        .map(|s| vec![format_f64(s.t), format_f64(s.defect)])
        .collect();
    let csv_path = write_csv(out, "periodicity.csv", "t,defect", &table)?;
    println!(
        "periodicity: theta={} rho={} passes={} -> {} {}",
        report.theta,
        format_f64(report.rho),
        report.passes,
        json_path.display(),
        csv_path.display()
    );
    if !report.passes {
        return Err(CliError::CheckFailed(
            "defect decays slower than the spectral rate rho^t".into(),
        ));
    }
    Ok(())
}

/// `resolvent`: the Laplace series of the generator's resolvent on an s-grid.
pub fn resolvent(
    source: &Source,
    init: &Path,
    lambdas: &[f64],
    sgrid: Option<&RatioGrid>,
    tol: f64,
    out: &Path,
) -> Result<(), CliError> {
    let (_, op) = load_validated(source)?;
    let f = load_step(init)?;
    let default_grid: Vec<Q>;
    let grid: &[Q] = match sgrid {
        Some(g) => &g.points,
        None => {
            default_grid = (0..=10).map(|i| q(i, 10)).collect();
            &default_grid
        }
    };
    if let Some(s) = grid.iter().find(|s| **s > qi(1)) {
        return Err(CliError::Data(Error::MalformedStepFunction {
            reason: format!("resolvent grid point {} outside [0, 1]", format_ratio(s)),
        }));
    }

    let mut entries = Vec::new();
    let mut table = Vec::new();
    for &lambda in lambdas {
        let output = eval_resolvent(&op, lambda, &f, grid, tol)?;
        entries.push(json!({
            "lambda": lambda,
            "n_terms": output.n_terms,
            "tail_bound": output.tail_bound,
        }));
        for (i, s) in grid.iter().enumerate() {
            let mut row = vec![format_f64(lambda), format_ratio(s)];
            row.extend(output.values[i].iter().map(|v| format_f64(*v)));
            table.push(row);
        }
    }
    let header = {
        let edges: Vec<String> = (0..op.dim()).map(|j| format!("e{j}")).collect();
        format!("lambda,s,{}", edges.join(","))
    };
    let json_path = write_json(out, "resolvent.json", &json!({ "tol": tol, "lambdas": entries }))?;
    let csv_path = write_csv(out, "resolvent.csv", &header, &table)?;
    println!(
        "resolvent: {} lambda(s) on {} grid points -> {} {}",
        lambdas.len(),
        grid.len(),
        json_path.display(),
        csv_path.display()
    );
    Ok(())
}

/// `subdivide`: exact reduction of rational velocities to unit speeds.
pub fn subdivide(source: &Source, out: &Path) -> Result<(), CliError> {
    let spec = source.load()?;
    let map = subdivide_graph(&spec)?;
    let report = map.report();
    let mut doc = serde_json::to_value(&report)
        .map_err(|e| CliError::Parse { path: out.join("subdivision.json"), message: e.to_string() })?;
    let periods = match subdivided_period(&map) {
        Ok(theta_sub) => Some((theta_sub, conjugated_period(&map)?)),
        Err(Error::ReducibleOperator) => None,
        Err(e) => return Err(e.into()),
    };
    let obj = doc.as_object_mut().expect("report serializes to an object");
    match &periods {
        Some((theta_sub, theta_c)) => {
            obj.insert("subdivided_period".into(), (*theta_sub).into());
            obj.insert("conjugated_period".into(), format_ratio(theta_c).into());
        }
        None => {
            obj.insert("subdivided_period".into(), serde_json::Value::Null);
            obj.insert("conjugated_period".into(), serde_json::Value::Null);
        }
    }
    let json_path = write_json(out, "subdivision.json", &doc)?;

    let graph_text = map.subdivided.to_json()?;
    let graph_path = out.join("subdivided_graph.json");
    std::fs::write(&graph_path, graph_text + "\n")
        .map_err(|source| CliError::Io { path: graph_path.clone(), source })?;
    println!(
        "subdivide: c={} edges {} -> {} ({} {})",
        format_ratio(&map.c),
        spec.edge_count(),
        map.subdivided.edge_count(),
        json_path.display(),
        graph_path.display()
    );
    Ok(())
}

/// The default probe test function: a unit hat on every edge (Lipschitz 2).
fn default_phi(dim: usize) -> TestFunction {
    let mut phi = TestFunction::zero(dim);
    let hat = PiecewiseLinear::new(vec![qi(0), q(1, 2), qi(1)], vec![qi(0), qi(1), qi(0)])
        .expect("hat nodes are a valid partition");
    for j in 0..dim {
        phi.set_component(j, hat.clone()).expect("edge in range");
    }
    phi
}

/// `measure-sim`: variation series of the measure flow plus the
/// weak*-versus-variation continuity probe.
pub fn measure_sim(
    source: &Source,
    init: &Path,
    tgrid: &RatioGrid,
    phi: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let (_, op) = load_validated(source)?;
    let mu = load_measure(init)?;
    let phi = match phi {
        Some(path) => load_phi(path)?,
        None => default_phi(op.dim()),
    };

    let mut series = Vec::new();
    for t in &tgrid.points {
        let moved = evaluate_s(&op, t, &mu)?;
        series.push(vec![format_ratio(t), format_ratio(&moved.variation())]);
    }
    let series_path = write_csv(out, "measure_series.csv", "t,variation", &series)?;

    let probe = weakstar_continuity_probe(&op, &mu, &phi, &tgrid.points)?;
    let probe_table: Vec<Vec<String>> = probe
        .iter()
        .map(|r| vec![format_f64(r.t), format_f64(r.pairing_gap), format_f64(r.tv_gap)])
        .collect();
    let probe_path = write_csv(out, "probe.csv", "t,pairing_gap,tv_gap", &probe_table)?;
    println!(
        "measure-sim: {} samples -> {} {}",
        tgrid.points.len(),
        series_path.display(),
        probe_path.display()
    );
    Ok(())
}
