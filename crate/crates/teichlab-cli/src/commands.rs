//! The `surface`, `limit`, `track`, `hyp` and `harmonic` subcommands.

use crate::config::RunConfig;
use crate::{invalid, read_json, CliError, Report};
use clap::{Args, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use std::fmt::Write;
use std::path::{Path, PathBuf};
use teichlab::crowned::{cross_ratio, crown_residue, polygon_from_shears, CrownEnd, IdealPoint, IdealPolygon, MobiusMap};
use teichlab::flatsurf::{
    build_surface, critical_graph, cylinder_decomposition, r_neighborhood, spec_from_json, spec_to_json, stretch,
    HalfTranslationSurface,
};
use teichlab::harmonic::{
    develop_map, energy, ideal_vertices, minsky_check, solve_bochner, BochnerField, CoordinatePath, PolynomialHopf, Region,
    SolverConfig, Trajectory,
};
use teichlab::json::{num, rational};
use teichlab::limits::{assemble_limit, embed_check, truncate, FacePolicy, HalfPlaneStructure, TruncationSpec};
use teichlab::ribbon::MetricRibbonGraph;
use teichlab::svg::{critical_graph_svg, crown_svg, developed_svg, polygon_svg, Model};
use teichlab::traintrack::{
    assemble_ray_surface, check_switch_conditions, crowned_dimension, is_birecurrent, split, strebel_datum, validate,
    weights_from_json, weights_to_json, SplitKind, TrainTrack, TransverseCertificate,
};

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into())
}

pub fn load_surface(path: &Path) -> Result<HalfTranslationSurface, CliError> {
    let v = read_json(path)?;
    let at = |e: teichlab::flatsurf::SurfaceError| CliError::Invalid(format!("{}: {e}", path.display()));
    build_surface(&spec_from_json(&v).map_err(at)?).map_err(at)
}

fn load_track(path: &Path) -> Result<TrainTrack, CliError> {
    TrainTrack::from_json(&read_json(path)?).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

fn is_schema(v: &Value, family: &str) -> bool {
    v.get("schema").and_then(Value::as_str).is_some_and(|s| s.split('/').next() == Some(family))
}

/// A limit from a ribbon graph file, or from the critical graph of a surface.
fn load_limit(path: &Path, budget: f64) -> Result<(HalfPlaneStructure, Option<HalfTranslationSurface>), CliError> {
    let v = read_json(path)?;
    let at = |e: String| CliError::Invalid(format!("{}: {e}", path.display()));
    let (graph, surface) = if is_schema(&v, "teichlab.surface") {
        let s = load_surface(path)?;
        (critical_graph(&s, budget).map_err(|e| at(e.to_string()))?.graph, Some(s))
    } else {
        (MetricRibbonGraph::from_json(&v).map_err(at)?, None)
    };
    Ok((assemble_limit(&graph, &FacePolicy::Auto).map_err(|e| at(e.to_string()))?, surface))
}

fn parse_complex(s: &str) -> Result<Complex64, CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let f = |x: &str| x.parse::<f64>().map_err(|_| CliError::Invalid(format!("`{s}` is not a complex number `re,im`")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(f(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(f(re)?, f(im)?)),
        _ => Err(CliError::Invalid(format!("`{s}` is not a complex number `re,im`"))),
    }
}

fn parse_ideal(s: &str) -> Result<IdealPoint, CliError> {
    match s.trim() {
        "inf" | "∞" => Ok(IdealPoint::Infinity),
        t => t.parse::<f64>().map(IdealPoint::Finite).map_err(|_| CliError::Invalid(format!("`{s}` is not a real number or `inf`"))),
    }
}

fn nums(v: &[f64]) -> Vec<Value> {
    v.iter().map(|&x| num(x)).collect()
}

// ---------------------------------------------------------------- surface

#[derive(Subcommand)]
pub enum SurfaceCmd {
    /// Write a bundled surface: square-torus, slit-torus, strebel-one-cylinder, strebel-two-cylinders
    Example { name: String },
    /// Validate a surface and report cone points, genus and area
    Info { file: PathBuf },
    /// Apply the stretch (x, y) ↦ (x, t·y) and write the new surface
    Stretch { file: PathBuf },
    /// Critical graph of the horizontal foliation
    Graph { file: PathBuf },
    /// Horizontal cylinders of a surface whose leaves all close up
    Cylinders { file: PathBuf },
    /// Neighborhood of the cone points of radius R
    Neighborhood {
        file: PathBuf,
        #[arg(long)]
        radius: f64,
    },
}

impl SurfaceCmd {
    pub fn name(&self) -> &'static str {
        match self {
            SurfaceCmd::Example { .. } => "example",
            SurfaceCmd::Info { .. } => "info",
            SurfaceCmd::Stretch { .. } => "stretch",
            SurfaceCmd::Graph { .. } => "graph",
            SurfaceCmd::Cylinders { .. } => "cylinders",
            SurfaceCmd::Neighborhood { .. } => "neighborhood",
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            SurfaceCmd::Example { .. } => Vec::new(),
            SurfaceCmd::Info { file }
            | SurfaceCmd::Stretch { file }
            | SurfaceCmd::Graph { file }
            | SurfaceCmd::Cylinders { file }
            | SurfaceCmd::Neighborhood { file, .. } => vec![file.clone()],
        }
    }
}

pub fn surface(cmd: &SurfaceCmd, cfg: &mut RunConfig) -> Result<Vec<Report>, CliError> {
    match cmd {
        SurfaceCmd::Example { name } => {
            let spec = teichlab::catalog::closed_surfaces()
                .into_iter()
                .find(|(n, _)| n == name)
                .map(|(_, s)| s)
                .ok_or_else(|| CliError::Invalid(format!("no bundled surface `{name}`")))?;
            let s = build_surface(&spec).map_err(invalid)?;
            let mut v = spec_to_json(&spec);
            v["area"] = num(s.area());
            Ok(vec![Report::new(name.clone(), v, format!("genus {}, zero orders {:?}", s.genus(), s.zero_orders()))])
        }
        SurfaceCmd::Info { file } => {
            let s = load_surface(file)?;
            let mut v = s.report_json();
            v["schema"] = json!("teichlab.surface_report/1");
            let summary = format!("genus {}, zero orders {:?}, area {}", s.genus(), s.zero_orders(), s.area());
            Ok(vec![Report::new(format!("{}.info", stem(file)), v, summary)])
        }
        SurfaceCmd::Stretch { file } => {
            let s = load_surface(file)?;
            let st = stretch(&s, cfg.t).map_err(invalid)?;
            let mut v = spec_to_json(st.spec());
            v["area"] = num(st.area());
            v["source_area"] = num(s.area());
            v["t"] = num(cfg.t);
            let summary = format!("area {} -> {}", s.area(), st.area());
            Ok(vec![Report::new(format!("{}.stretched", stem(file)), v, summary)])
        }
        SurfaceCmd::Graph { file } => {
            let s = load_surface(file)?;
            let cg = critical_graph(&s, cfg.budget).map_err(invalid)?;
            let mut v = cg.to_json(&s);
            v["schema"] = json!("teichlab.critical_graph/1");
            let summary = format!(
                "{} saddle connections, {} unresolved rays, compact: {}",
                cg.saddle_connections().len(),
                cg.graph.rays().len(),
                cg.is_compact()
            );
            Ok(vec![Report::new(format!("{}.graph", stem(file)), v, summary).svg(critical_graph_svg(&s, &cg))])
        }
        SurfaceCmd::Cylinders { file } => {
            let s = load_surface(file)?;
            let cyl = cylinder_decomposition(&s, cfg.budget).map_err(invalid)?;
            let total: f64 = cyl.iter().map(|c| c.area()).sum();
            let v = json!({
                "schema": "teichlab.cylinders/1",
                "cylinders": cyl.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
                "total_area": num(total),
                "surface_area": num(s.area()),
            });
            let mut csv = String::from("circumference,height,modulus\n");
            for c in &cyl {
                let _ = writeln!(csv, "{},{},{}", c.circumference, c.height, c.modulus);
            }
            Ok(vec![Report::new(format!("{}.cylinders", stem(file)), v, format!("{} cylinders", cyl.len())).csv(csv)])
        }
        SurfaceCmd::Neighborhood { file, radius } => {
            cfg.extra = json!({ "radius": num(*radius) });
            if !(*radius > 0.0 && radius.is_finite()) {
                return Err(CliError::Invalid(format!("--radius must be positive, got {radius}")));
            }
            let s = load_surface(file)?;
            let n = r_neighborhood(&s, *radius).map_err(CliError::Invalid)?;
            let mut v = n.to_json();
            v["schema"] = json!("teichlab.neighborhood/1");
            let summary = format!("area {}, boundary length {}", n.area, n.boundary_length);
            Ok(vec![Report::new(format!("{}.neighborhood", stem(file)), v, summary)])
        }
    }
}

// ---------------------------------------------------------------- limit

#[derive(Subcommand)]
pub enum LimitCmd {
    /// Half-plane structure of a ribbon graph, or of a surface's critical graph
    Assemble { file: PathBuf },
    /// Cut every ray at distance CUT and every face at height HEIGHT
    Truncate {
        file: PathBuf,
        #[arg(long)]
        cut: f64,
        #[arg(long)]
        height: f64,
    },
    /// Check that the limit's graph sits in the surface stretched by t
    Embed { limit: PathBuf, surface: PathBuf },
}

impl LimitCmd {
    pub fn name(&self) -> &'static str {
        match self {
            LimitCmd::Assemble { .. } => "assemble",
            LimitCmd::Truncate { .. } => "truncate",
            LimitCmd::Embed { .. } => "embed",
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            LimitCmd::Assemble { file } | LimitCmd::Truncate { file, .. } => vec![file.clone()],
            LimitCmd::Embed { limit, surface } => vec![limit.clone(), surface.clone()],
        }
    }
}

pub fn ends_csv(h: &HalfPlaneStructure) -> String {
    let mut csv = String::from("end,kind,half_planes,residue,pole_order\n");
    for (i, e) in h.ends.iter().enumerate() {
        let (kind, m) = match e.kind {
            teichlab::limits::EndKind::Planar { m } => ("planar", m),
            teichlab::limits::EndKind::Cylindrical { .. } => ("cylindrical", 0),
        };
        let _ = writeln!(csv, "{i},{kind},{m},{},{}", e.residue, e.pole_order);
    }
    csv
}

pub fn limit(cmd: &LimitCmd, cfg: &mut RunConfig) -> Result<Vec<Report>, CliError> {
    match cmd {
        LimitCmd::Assemble { file } => {
            let (h, s) = load_limit(file, cfg.budget)?;
            let summary = format!("{} ends, {} components", h.ends.len(), h.components.len());
            let mut r = Report::new(format!("{}.limit", stem(file)), h.to_json(), summary).csv(ends_csv(&h));
            if let Some(s) = s {
                let cg = critical_graph(&s, cfg.budget).map_err(invalid)?;
                r = r.svg(critical_graph_svg(&s, &cg));
            }
            Ok(vec![r])
        }
        LimitCmd::Truncate { file, cut, height } => {
            cfg.extra = json!({ "cut": num(*cut), "height": num(*height) });
            let (h, _) = load_limit(file, cfg.budget)?;
            let tr = truncate(&h, &TruncationSpec::rectangles(&h, *cut, *height)).map_err(invalid)?;
            let mut v = spec_to_json(&tr.spec);
            v["residues"] = json!(nums(&tr.residues));
            v["limit_residues"] = json!(h.ends.iter().map(|e| num(e.residue)).collect::<Vec<_>>());
            v["area"] = num(tr.surface.area());
            let summary = format!("{} pieces, residues {:?}", tr.spec.polygons.len(), tr.residues);
            Ok(vec![Report::new(format!("{}.truncated", stem(file)), v, summary)])
        }
        LimitCmd::Embed { limit, surface } => {
            let (h, _) = load_limit(limit, cfg.budget)?;
            let s = stretch(&load_surface(surface)?, cfg.t).map_err(invalid)?;
            let rep = embed_check(&h, &s, cfg.t, cfg.budget).map_err(invalid)?;
            let mut v = rep.to_json();
            v["schema"] = json!("teichlab.embed/1");
            v["embeds"] = json!(true);
            let summary = format!("embeds at t = {}, exhaustion radius {}", cfg.t, rep.exhaustion_radius);
            Ok(vec![Report::new(format!("{}.embed", stem(surface)), v, summary)])
        }
    }
}

// ---------------------------------------------------------------- track

#[derive(Subcommand)]
pub enum TrackCmd {
    /// Write a bundled track with weights: `torus`, or `petals` (with a certificate)
    Example {
        name: String,
        /// Cusps of the outer region of the petal track
        #[arg(long, default_value_t = 3)]
        m: usize,
    },
    /// Check the complementary regions and report the census
    Validate { track: PathBuf },
    /// Check the switch conditions for a weight file
    Weights { track: PathBuf, weights: PathBuf },
    /// Recurrence, and transverse recurrence from a certificate
    Recurrence {
        track: PathBuf,
        #[arg(long)]
        certificate: Option<PathBuf>,
    },
    /// Split a large branch
    Split {
        track: PathBuf,
        weights: PathBuf,
        /// Branch name or index
        #[arg(long)]
        branch: String,
    },
    /// Dimension of the space of crowned hyperbolic surfaces
    Dimension {
        #[arg(long)]
        g: u32,
        /// Number of crowns
        #[arg(long)]
        k: usize,
        /// Number of closed geodesic boundaries
        #[arg(long)]
        l: u32,
        /// Cusps on each crown
        #[arg(long, value_delimiter = ',')]
        m: Vec<u32>,
    },
    /// Rebuild a surface with closed leaves at time t from its cylinders
    Strebel { surface: PathBuf },
}

impl TrackCmd {
    pub fn name(&self) -> &'static str {
        match self {
            TrackCmd::Example { .. } => "example",
            TrackCmd::Validate { .. } => "validate",
            TrackCmd::Weights { .. } => "weights",
            TrackCmd::Recurrence { .. } => "recurrence",
            TrackCmd::Split { .. } => "split",
            TrackCmd::Dimension { .. } => "dimension",
            TrackCmd::Strebel { .. } => "strebel",
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            TrackCmd::Validate { track } => vec![track.clone()],
            TrackCmd::Weights { track, weights } | TrackCmd::Split { track, weights, .. } => vec![track.clone(), weights.clone()],
            TrackCmd::Recurrence { track, certificate } => std::iter::once(track.clone()).chain(certificate.clone()).collect(),
            TrackCmd::Dimension { .. } | TrackCmd::Example { .. } => Vec::new(),
            TrackCmd::Strebel { surface } => vec![surface.clone()],
        }
    }
}

pub fn track(cmd: &TrackCmd, cfg: &mut RunConfig) -> Result<Vec<Report>, CliError> {
    match cmd {
        TrackCmd::Example { name, m } => {
            use teichlab::catalog;
            let q = |x: &str| teichlab::json::parse_rational(x).expect("integer literal");
            match name.as_str() {
                "torus" => {
                    let t = catalog::torus_track();
                    let w: Vec<_> = ["5", "2", "3"].iter().map(|x| q(x)).collect();
                    Ok(vec![
                        Report::new("torus", t.to_json(), "track a → b + c"),
                        Report::new("torus.weights", weights_to_json(&t, &w), "weights a = 5, b = 2, c = 3"),
                    ])
                }
                "petals" => {
                    cfg.extra = json!({ "m": m });
                    if *m < 2 {
                        return Err(CliError::Invalid(format!("--m must be at least 2, got {m}")));
                    }
                    let t = catalog::petal_track(*m);
                    // b carries the total of the petals.
                    let mut w = vec![q(&(m + 1).to_string())];
                    w.extend((0..=*m).map(|_| q("1")));
                    Ok(vec![
                        Report::new("petals", t.to_json(), format!("petal track with {} loops", m + 2)),
                        Report::new("petals.weights", weights_to_json(&t, &w), "unit petal weights"),
                        Report::new("petals.certificate", catalog::petal_certificate(*m).to_json(), "dual multicurve census"),
                    ])
                }
                other => Err(CliError::Invalid(format!("no bundled track `{other}`"))),
            }
        }
        TrackCmd::Validate { track } => {
            let t = load_track(track)?;
            let c = validate(&t).map_err(invalid)?;
            let mut v = c.to_json();
            v["schema"] = json!("teichlab.census/1");
            let summary = format!("valid: surface genus {}, {} punctures, {} cusps", c.surface_genus, c.punctures, c.corners);
            Ok(vec![Report::new(format!("{}.census", stem(track)), v, summary)])
        }
        TrackCmd::Weights { track, weights } => {
            let t = load_track(track)?;
            let w = weights_from_json(&t, &read_json(weights)?).map_err(invalid)?;
            let rep = check_switch_conditions(&t, &w).map_err(invalid)?;
            let v = json!({
                "schema": "teichlab.switch_report/1",
                "residuals": rep.residuals.iter().map(rational).collect::<Vec<_>>(),
                "pass": rep.pass(),
            });
            let residuals: Vec<String> = rep.residuals.iter().map(|r| r.to_string()).collect();
            let mut r = Report::new(format!("{}.switches", stem(weights)), v, format!("switch residuals [{}]", residuals.join(", ")));
            r.failed = !rep.pass();
            Ok(vec![r])
        }
        TrackCmd::Recurrence { track, certificate } => {
            let t = load_track(track)?;
            let cert = match certificate {
                Some(p) => Some(TransverseCertificate::from_json(&read_json(p)?).map_err(invalid)?),
                None => None,
            };
            let r = is_birecurrent(&t, cert.as_ref()).map_err(invalid)?;
            let mut v = r.to_json();
            v["schema"] = json!("teichlab.recurrence/1");
            let bi = r.recurrent && r.transversely_recurrent == Some(true);
            v["birecurrent"] = json!(bi);
            let summary = format!("recurrent: {}, transversely recurrent: {:?}", r.recurrent, r.transversely_recurrent);
            Ok(vec![Report::new(format!("{}.recurrence", stem(track)), v, summary)])
        }
        TrackCmd::Split { track, weights, branch } => {
            let t = load_track(track)?;
            let w = weights_from_json(&t, &read_json(weights)?).map_err(invalid)?;
            let e = match t.names.iter().position(|n| n == branch) {
                Some(i) => i,
                None => branch
                    .parse::<usize>()
                    .ok()
                    .filter(|&i| i < t.branches())
                    .ok_or_else(|| CliError::Invalid(format!("no branch `{branch}`")))?,
            };
            cfg.extra = json!({ "branch": t.names[e] });
            let (t2, w2, rec) = split(&t, &w, e).map_err(invalid)?;
            let kind = match rec.kind {
                SplitKind::Left => "left",
                SplitKind::Right => "right",
                SplitKind::Central => "central",
            };
            let mut tv = t2.to_json();
            tv["split"] = json!({
                "branch": t.names[e],
                "kind": kind,
                "compared": [rational(&rec.compared.0), rational(&rec.compared.1)],
                "new_weight": rational(&rec.new_weight),
                "old_of_new": rec.old_of_new,
            });
            let base = stem(track);
            Ok(vec![
                Report::new(format!("{base}.split"), tv, format!("{kind} split of `{}`", t.names[e])),
                Report::new(format!("{base}.split.weights"), weights_to_json(&t2, &w2), "weights after the split"),
            ])
        }
        TrackCmd::Dimension { g, k, l, m } => {
            cfg.extra = json!({ "g": g, "k": k, "l": l, "m": m });
            let d = crowned_dimension(*g, *k, *l, m).map_err(invalid)?;
            let v = json!({ "schema": "teichlab.dimension/1", "g": g, "k": k, "l": l, "m": m, "dimension": d });
            Ok(vec![Report::new("dimension", v, d.to_string())])
        }
        TrackCmd::Strebel { surface } => {
            let s = load_surface(surface)?;
            let mut datum = strebel_datum(&s, cfg.budget).map_err(invalid)?;
            datum.t = cfg.t;
            let a = assemble_ray_surface(&datum).map_err(invalid)?;
            let rep = embed_check(&datum.limit, &a.surface, cfg.t, cfg.budget).map_err(invalid)?;
            let mut v = spec_to_json(a.surface.spec());
            v["area"] = num(a.surface.area());
            v["genus"] = json!(a.surface.genus());
            v["zero_orders"] = json!(a.surface.zero_orders());
            v["embed"] = rep.to_json();
            let summary = format!("assembled genus {} at t = {}, area {}", a.surface.genus(), cfg.t, a.surface.area());
            Ok(vec![Report::new(format!("{}.assembled", stem(surface)), v, summary).svg(critical_graph_svg(
                &a.surface,
                &critical_graph(&a.surface, cfg.budget).map_err(invalid)?,
            ))])
        }
    }
}

// ---------------------------------------------------------------- hyp

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModelArg {
    Disk,
    HalfPlane,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Disk => Model::Disk,
            ModelArg::HalfPlane => Model::HalfPlane,
        }
    }
}

#[derive(Subcommand)]
pub enum HypCmd {
    /// Ideal polygon from shears, disk angles, a regular n-gon or a file
    Polygon {
        file: Option<PathBuf>,
        /// Fan shear coordinates (n − 3 of them)
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["angles", "regular", "file"])]
        shears: Option<Vec<f64>>,
        /// Vertex angles on the unit circle, in radians
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["regular", "file"])]
        angles: Option<Vec<f64>>,
        /// Regular ideal n-gon
        #[arg(long, conflicts_with = "file")]
        regular: Option<usize>,
        #[arg(long, value_enum, default_value = "disk")]
        model: ModelArg,
    },
    /// Cross-ratio of four ideal points (reals or `inf`)
    CrossRatio {
        #[arg(num_args = 4, allow_hyphen_values = true)]
        points: Vec<String>,
    },
    /// Truncated side lengths and metric residue of a crown
    Crown {
        file: PathBuf,
        /// Horocycle size at each cusp
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<f64>,
        #[arg(long, value_enum, default_value = "half-plane")]
        model: ModelArg,
    },
}

impl HypCmd {
    pub fn name(&self) -> &'static str {
        match self {
            HypCmd::Polygon { .. } => "polygon",
            HypCmd::CrossRatio { .. } => "cross-ratio",
            HypCmd::Crown { .. } => "crown",
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        match self {
            HypCmd::Polygon { file, .. } => file.iter().cloned().collect(),
            HypCmd::CrossRatio { .. } => Vec::new(),
            HypCmd::Crown { file, .. } => vec![file.clone()],
        }
    }
}

pub fn polygon_report(stem: &str, p: &IdealPolygon, model: Model) -> Report {
    let cr = if p.vertices.len() >= 4 { p.cyclic_cross_ratios() } else { Vec::new() };
    let mut v = p.to_json();
    v["cyclic_cross_ratios"] = json!(nums(&cr));
    v["disk_angles"] = json!(p.vertices.iter().map(|x| num(x.disk_angle())).collect::<Vec<_>>());
    let summary = format!("{} vertices, shears {:?}", p.vertices.len(), p.shears());
    Report::new(stem, v, summary).svg(polygon_svg(p, model))
}

pub fn hyp(cmd: &HypCmd, cfg: &mut RunConfig) -> Result<Vec<Report>, CliError> {
    match cmd {
        HypCmd::Polygon { file, shears, angles, regular, model } => {
            let p = if let Some(s) = shears {
                cfg.extra = json!({ "shears": nums(s) });
                polygon_from_shears(s.len() + 3, s).map_err(invalid)?
            } else if let Some(a) = angles {
                cfg.extra = json!({ "angles": nums(a) });
                IdealPolygon::new(a.iter().map(|&t| IdealPoint::from_disk_angle(t)).collect()).map_err(invalid)?
            } else if let Some(n) = regular {
                cfg.extra = json!({ "regular": n });
                let tau = std::f64::consts::TAU;
                IdealPolygon::new((0..*n).map(|k| IdealPoint::from_disk_angle(tau * k as f64 / *n as f64)).collect())
                    .map_err(invalid)?
            } else if let Some(f) = file {
                IdealPolygon::from_json(&read_json(f)?).map_err(|e| CliError::Invalid(format!("{}: {e}", f.display())))?
            } else {
                return Err(CliError::Invalid("give one of --shears, --angles, --regular or a polygon file".into()));
            };
            Ok(vec![polygon_report("polygon", &p, (*model).into())])
        }
        HypCmd::CrossRatio { points } => {
            let p: Vec<IdealPoint> = points.iter().map(|s| parse_ideal(s)).collect::<Result<_, _>>()?;
            let c = cross_ratio(p[0], p[1], p[2], p[3]).map_err(invalid)?;
            let v = json!({
                "schema": "teichlab.cross_ratio/1",
                "points": p.iter().map(|x| x.to_json()).collect::<Vec<_>>(),
                "cross_ratio": num(c),
            });
            Ok(vec![Report::new("cross_ratio", v, c.to_string())])
        }
        HypCmd::Crown { file, sizes, model } => {
            cfg.extra = json!({ "sizes": nums(sizes) });
            let crown = CrownEnd::from_json(&read_json(file)?).map_err(|e| CliError::Invalid(format!("{}: {e}", file.display())))?;
            let lengths = crown.truncated_lengths(sizes).map_err(invalid)?;
            let residue = crown_residue(&crown, sizes).map_err(invalid)?;
            let mut v = crown.to_json();
            v["schema"] = json!("teichlab.crown_report/1");
            v["sizes"] = json!(nums(sizes));
            v["truncated_lengths"] = json!(nums(&lengths));
            v["residue"] = num(residue);
            let summary = format!("{} cusps, residue {residue}", crown.m());
            Ok(vec![Report::new(format!("{}.crown", stem(file)), v, summary).svg(crown_svg(&crown, (*model).into()))])
        }
    }
}

// ---------------------------------------------------------------- harmonic

#[derive(Args, Clone)]
pub struct HopfArgs {
    /// Degree n of the monomial q = a zⁿ
    #[arg(long, conflicts_with = "hopf")]
    pub n: Option<usize>,
    /// Coefficient a of the monomial, as `re,im`
    #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
    pub coeff: String,
    /// Polynomial Hopf differential file
    #[arg(long, value_name = "FILE")]
    pub hopf: Option<PathBuf>,
}

impl HopfArgs {
    pub fn load(&self) -> Result<PolynomialHopf, CliError> {
        match (&self.hopf, self.n) {
            (Some(p), _) => PolynomialHopf::from_json(&read_json(p)?).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display()))),
            (None, Some(n)) => Ok(PolynomialHopf::monomial(parse_complex(&self.coeff)?, n)?),
            (None, None) => Err(CliError::Invalid("give --n (with optional --coeff) or --hopf FILE".into())),
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TrajectoryArg {
    Horizontal,
    Vertical,
}

#[derive(Subcommand)]
pub enum HarmonicCmd {
    /// Solve for the energy density on the square of half-side rdom
    Solve(#[command(flatten)] HopfArgs),
    /// Energy against the mass of the differential over a region
    Energy {
        #[command(flatten)]
        q: HopfArgs,
        /// Disk of this radius in the flat metric, centred at the zero
        #[arg(long, conflicts_with_all = ["disk", "rect"])]
        phi_disk: Option<f64>,
        /// Euclidean disk of this radius about the origin
        #[arg(long, conflicts_with = "rect")]
        disk: Option<f64>,
        /// Rectangle `x0,x1,y0,y1`
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        rect: Option<Vec<f64>>,
    },
    /// Ideal polygon bounding the image of the harmonic map of a monomial
    Vertices(#[command(flatten)] HopfArgs),
    /// Decay of curvature and length error of image segments with distance
    Minsky {
        #[command(flatten)]
        q: HopfArgs,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4,5,6")]
        radii: Vec<f64>,
    },
    /// Develop the image of one horizontal or vertical trajectory segment
    Develop {
        #[command(flatten)]
        q: HopfArgs,
        /// Centre of the segment, as `re,im`
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long, value_enum, default_value = "horizontal")]
        kind: TrajectoryArg,
        /// Length in the flat metric
        #[arg(long, default_value_t = 1.0)]
        length: f64,
    },
}

impl HarmonicCmd {
    pub fn name(&self) -> &'static str {
        match self {
            HarmonicCmd::Solve(_) => "solve",
            HarmonicCmd::Energy { .. } => "energy",
            HarmonicCmd::Vertices(_) => "vertices",
            HarmonicCmd::Minsky { .. } => "minsky",
            HarmonicCmd::Develop { .. } => "develop",
        }
    }

    fn hopf_args(&self) -> &HopfArgs {
        match self {
            HarmonicCmd::Solve(q) | HarmonicCmd::Vertices(q) => q,
            HarmonicCmd::Energy { q, .. } | HarmonicCmd::Minsky { q, .. } | HarmonicCmd::Develop { q, .. } => q,
        }
    }

    pub fn inputs(&self) -> Vec<PathBuf> {
        self.hopf_args().hopf.iter().cloned().collect()
    }
}

pub fn solver_config(cfg: &RunConfig) -> SolverConfig {
    SolverConfig { grid: cfg.grid, tol: cfg.tol, ..SolverConfig::default() }
}

pub fn solve(q: &PolynomialHopf, cfg: &mut RunConfig) -> Result<BochnerField, CliError> {
    let sc = solver_config(cfg);
    let hopf = q.to_json();
    match &mut cfg.extra {
        Value::Object(m) => {
            m.insert("solver".into(), sc.to_json());
            m.insert("hopf".into(), hopf);
        }
        other => *other = json!({ "solver": sc.to_json(), "hopf": hopf }),
    }
    Ok(solve_bochner(q, cfg.rdom, &sc)?)
}

pub fn harmonic(cmd: &HarmonicCmd, cfg: &mut RunConfig) -> Result<Vec<Report>, CliError> {
    let q = cmd.hopf_args().load()?;
    match cmd {
        HarmonicCmd::Solve(_) => {
            let f = solve(&q, cfg)?;
            let summary = format!("converged: residual {:e} after {} sweeps", f.residual(), f.sweeps());
            Ok(vec![Report::new("bochner", f.to_json(), summary).csv(f.to_csv())])
        }
        HarmonicCmd::Energy { phi_disk, disk, rect, .. } => {
            let region = match (phi_disk, disk, rect) {
                (Some(r), _, _) => Region::PhiDisk { radius: *r },
                (_, Some(r), _) => Region::Disk { center: Complex64::new(0.0, 0.0), radius: *r },
                (_, _, Some(v)) if v.len() == 4 => Region::Rect { x0: v[0], x1: v[1], y0: v[2], y1: v[3] },
                (_, _, Some(_)) => return Err(CliError::Invalid("--rect needs four numbers x0,x1,y0,y1".into())),
                _ => return Err(CliError::Invalid("give one of --phi-disk, --disk or --rect".into())),
            };
            cfg.extra = json!({ "region": region.to_json() });
            let f = solve(&q, cfg)?;
            let rep = energy(&f, region)?;
            let summary = format!(
                "energy {} vs 2·mass {}: lower bound {}, upper bound {}",
                rep.energy,
                2.0 * rep.norm_phi,
                rep.lower_bound_holds,
                rep.upper_bound_holds
            );
            let mut r = Report::new("energy", rep.to_json(), summary);
            r.failed = !(rep.lower_bound_holds && rep.upper_bound_holds);
            Ok(vec![r])
        }
        HarmonicCmd::Vertices(_) => {
            let f = solve(&q, cfg)?;
            let rep = ideal_vertices(&f)?;
            let summary = format!("{} ideal vertices, cross-ratio spread {:e}", rep.polygon.vertices.len(), rep.spread);
            let svg = developed_svg(&rep.rays, Some(&rep.polygon));
            Ok(vec![Report::new("ideal_vertices", rep.to_json(), summary).svg(svg)])
        }
        HarmonicCmd::Minsky { radii, .. } => {
            cfg.extra = json!({ "radii": nums(radii) });
            let f = solve(&q, cfg)?;
            let rep = minsky_check(&f, radii)?;
            let mut csv = String::from("radius,horizontal_length,length_error,max_curvature,vertical_length\n");
            for r in &rep.rows {
                let _ = writeln!(csv, "{},{},{},{},{}", r.radius, r.horizontal_length, r.length_error, r.max_curvature, r.vertical_length);
            }
            let summary = format!("fitted decay rate {:?}", rep.alpha);
            Ok(vec![Report::new("minsky", rep.to_json(), summary).csv(csv)])
        }
        HarmonicCmd::Develop { center, kind, length, .. } => {
            let c = parse_complex(center)?;
            cfg.extra = json!({ "center": [num(c.re), num(c.im)], "length": num(*length), "kind": format!("{kind:?}").to_lowercase() });
            let f = solve(&q, cfg)?;
            let traj = match kind {
                TrajectoryArg::Horizontal => Trajectory::Horizontal,
                TrajectoryArg::Vertical => Trajectory::Vertical,
            };
            let path = CoordinatePath::centered(&f, c, traj, *length)?;
            let d = develop_map(&f, &path, &MobiusMap::identity())?;
            let mut csv = String::from("x,y,image_x,image_y,arclength,curvature\n");
            for i in 0..d.domain.len() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    d.domain[i].re, d.domain[i].im, d.image[i].0, d.image[i].1, d.arclength[i], d.curvature[i]
                );
            }
            let summary = format!("image length {} for flat length {}", d.length, d.phi_length);
            Ok(vec![Report::new("developed", d.to_json(), summary).csv(csv).svg(developed_svg(&[d.image.clone()], None))])
        }
    }
}
