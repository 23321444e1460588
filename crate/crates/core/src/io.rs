//! File formats: curve, torus, report, intersection and flow-snapshot JSON;
//! sample, sweep and time-series CSV; OBJ meshes.
//!
//! Every float is written as `{:.16e}` (17 significant digits), and parsing
//! is correctly rounded, so loading a file and saving it again reproduces it
//! byte for byte.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};

use crate::curve::{radius_bounds, CurveSample, ShrinkerCurve, SweepRow};
use crate::error::{Error, Result};
use crate::flow::{Diagnostics, FlowState};
use crate::geometry::{Mat4, Point4, UnitaryMap};
use crate::registry::{Named, Registry};
use crate::surface::{build_torus, GridSpec, ProductTorus};

pub const CURVE_KIND: &str = "al_curve";
pub const TORUS_KIND: &str = "product_torus";

pub const SAMPLES_HEADER: [&str; 7] = ["s", "x", "y", "phi", "k", "r", "theta"];
pub const SWEEP_HEADER: [&str; 3] = ["r0", "delta_theta", "c_gamma"];
pub const SERIES_HEADER: [&str; 5] = ["tau", "length", "area", "isoperimetric", "shrinker_residual"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Wraps a serde_json formatter, replacing its float output.
struct Exact<F>(F);

impl<F: Formatter> Formatter for Exact<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write!(w, "{v:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// JSON text of `value`; `indent == 0` gives compact output. A trailing
/// newline is always appended. Non-finite floats come out as `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T, indent: usize) -> Result<String> {
    let mut buf = Vec::new();
    if indent == 0 {
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact(CompactFormatter));
        value.serialize(&mut ser)?;
    } else {
        let pad = vec![b' '; indent];
        let mut ser = serde_json::Serializer::with_formatter(&mut buf, Exact(PrettyFormatter::with_indent(&pad)));
        value.serialize(&mut ser)?;
    }
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(std::fs::write(path, text)?)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T, indent: usize) -> Result<()> {
    write_text(path, &to_json(value, indent)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    from_json(&std::fs::read_to_string(path)?)
}

/// `null` reads back as NaN, matching how NaN is written.
pub(crate) fn f64_or_nan<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

// ---- curves -------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleDoc {
    pub s: f64,
    pub x: f64,
    pub y: f64,
    pub phi: f64,
    pub k: f64,
}

/// On-disk curve. `q = 0` marks a curve without a closure ratio (the
/// circle, flow snapshots). `length` is the period, which the samples alone
/// do not determine; `tau` is present only on flow snapshots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveDoc {
    pub kind: String,
    pub p: u32,
    pub q: u32,
    pub c_gamma: f64,
    pub r0: f64,
    pub closure_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub samples: Vec<SampleDoc>,
}

impl CurveDoc {
    pub fn from_curve(c: &ShrinkerCurve) -> Self {
        Self {
            kind: CURVE_KIND.into(),
            p: c.p,
            q: c.q.unwrap_or(0),
            c_gamma: c.c_gamma,
            r0: c.r0,
            closure_error: c.closure_error,
            length: Some(c.length),
            tau: None,
            samples: c
                .samples
                .iter()
                .map(|s| SampleDoc {
                    s: s.s,
                    x: s.x,
                    y: s.y,
                    phi: s.phi,
                    k: s.k,
                })
                .collect(),
        }
    }

    /// Flow snapshot: the polyline as a curve (tangent and curvature from
    /// differences) carrying the initial curve's constant, plus the flow
    /// time. Snapshots have no closure ratio.
    pub fn snapshot(state: &FlowState, initial: &ShrinkerCurve) -> Result<Self> {
        let c = state.to_curve(initial.c_gamma)?;
        let mut doc = Self::from_curve(&c);
        doc.tau = Some(state.tau);
        Ok(doc)
    }

    pub fn to_curve(&self) -> Result<ShrinkerCurve> {
        if self.kind != CURVE_KIND {
            return Err(Error::Format(format!(
                "expected kind \"{CURVE_KIND}\", found \"{}\"",
                self.kind
            )));
        }
        let samples: Vec<CurveSample> = self
            .samples
            .iter()
            .map(|s| CurveSample {
                s: s.s,
                x: s.x,
                y: s.y,
                phi: s.phi,
                k: s.k,
                r: 0.0,
                theta: 0.0,
            })
            .collect();
        let length = match (self.length, samples.last()) {
            (Some(l), _) => l,
            (None, Some(last)) => {
                let first = &samples[0];
                last.s + (last.x - first.x).hypot(last.y - first.y)
            }
            (None, None) => return Err(Error::Format("curve has no samples".into())),
        };
        let q = (self.q > 0).then_some(self.q);
        let mut c = ShrinkerCurve::from_samples(samples, length, self.c_gamma, self.p, q, self.r0, self.closure_error)
            .map_err(|e| Error::Format(format!("invalid curve: {e}")))?;
        // the extremes of a solved curve are exact roots, not sample extremes
        if q.is_some() {
            if let Ok((lo, hi)) = radius_bounds(self.c_gamma * self.c_gamma) {
                (c.r_min, c.r_max) = (lo, hi);
            }
        }
        Ok(c)
    }
}

pub fn curve_to_json(c: &ShrinkerCurve, indent: usize) -> Result<String> {
    to_json(&CurveDoc::from_curve(c), indent)
}

pub fn curve_from_json(text: &str) -> Result<ShrinkerCurve> {
    from_json::<CurveDoc>(text)?.to_curve()
}

pub fn load_curve(path: &Path) -> Result<ShrinkerCurve> {
    read_json::<CurveDoc>(path)?.to_curve()
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<f64>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Format(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row.into_iter().map(fmt_f64)).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv of ASCII numbers"))
}

pub fn samples_csv(c: &ShrinkerCurve) -> Result<String> {
    csv_text(
        &SAMPLES_HEADER,
        c.samples.iter().map(|s| vec![s.s, s.x, s.y, s.phi, s.k, s.r, s.theta]),
    )
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    csv_text(&SWEEP_HEADER, rows.iter().map(|r| vec![r.r0, r.delta_theta, r.c_gamma]))
}

pub fn series_csv(series: &[Diagnostics]) -> Result<String> {
    csv_text(
        &SERIES_HEADER,
        series
            .iter()
            .map(|d| vec![d.tau, d.length, d.area, d.isoperimetric, d.shrinker_residual]),
    )
}

/// Parses a numeric CSV with the given header.
pub fn parse_csv(text: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let found = r.headers().map_err(|e| Error::Format(format!("csv: {e}")))?.clone();
    if found.iter().ne(header.iter().copied()) {
        return Err(Error::Format(format!(
            "unexpected csv header {:?}",
            found.iter().collect::<Vec<_>>()
        )));
    }
    r.records()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Format(format!("csv: {e}")))?;
            rec.iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|e| Error::Format(format!("csv field {f:?}: {e}")))
                })
                .collect()
        })
        .collect()
}

// ---- tori ---------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusDoc {
    pub kind: String,
    pub curve1: CurveDoc,
    pub curve2: CurveDoc,
    pub grid: [usize; 2],
}

impl TorusDoc {
    pub fn from_torus(t: &ProductTorus) -> Self {
        Self {
            kind: TORUS_KIND.into(),
            curve1: CurveDoc::from_curve(&t.curve1),
            curve2: CurveDoc::from_curve(&t.curve2),
            grid: [t.grid.ns, t.grid.nt],
        }
    }

    /// Rebuilds the torus; grid points are recomputed from the curves.
    pub fn to_torus(&self) -> Result<ProductTorus> {
        if self.kind != TORUS_KIND {
            return Err(Error::Format(format!(
                "expected kind \"{TORUS_KIND}\", found \"{}\"",
                self.kind
            )));
        }
        let grid = GridSpec::new(self.grid[0], self.grid[1])?;
        build_torus(&self.curve1.to_curve()?, &self.curve2.to_curve()?, grid)
    }
}

pub fn load_torus(path: &Path) -> Result<ProductTorus> {
    read_json::<TorusDoc>(path)?.to_torus()
}

// ---- matrices -----------------------------------------------------------

/// `G` as nested `[re, im]` pairs, its real form `G̃`, and the checks the
/// normalization must satisfy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitaryDoc {
    pub nu: [f64; 4],
    pub g: [[[f64; 2]; 2]; 2],
    pub g_real: Mat4,
    /// `|G ν_C − (1, 0)|`.
    pub image_error: f64,
    /// `|G̃ᵀG̃ − I|`.
    pub orthogonality_defect: f64,
    /// `|G̃J − JG̃|`.
    pub j_commutator: f64,
}

impl UnitaryDoc {
    pub fn new(nu: Point4, g: &UnitaryMap) -> Self {
        let (a, b) = nu.to_complex();
        let (ga, gb) = g.apply_complex(a, b);
        let e = &g.entries;
        Self {
            nu: nu.0,
            g: std::array::from_fn(|i| std::array::from_fn(|j| [e[i][j].re, e[i][j].im])),
            g_real: g.real_form,
            image_error: ((ga.re - 1.0).powi(2) + ga.im.powi(2) + gb.norm_sqr()).sqrt(),
            orthogonality_defect: crate::geometry::orthogonality_defect(&g.real_form),
            j_commutator: crate::geometry::j_commutator(&g.real_form),
        }
    }
}

// ---- meshes -------------------------------------------------------------

/// A fixed map `R^4 → R^3` for mesh export.
pub trait MeshProjection: Named + Send + Sync {
    fn project(&self, p: Point4) -> Result<[f64; 3]>;
}

/// Forgets `x4`. Lossy: the Clifford torus, for instance, folds onto a
/// solid cylinder shadow.
pub struct DropX4;

impl Named for DropX4 {
    fn name(&self) -> &'static str {
        "drop-x4"
    }
}

impl MeshProjection for DropX4 {
    fn project(&self, p: Point4) -> Result<[f64; 3]> {
        Ok([p.0[0], p.0[1], p.0[2]])
    }
}

/// Central projection from `eye` onto the hyperplane through the origin
/// orthogonal to `eye`, in an orthonormal basis of that hyperplane. With
/// `eye` far out on the `x4` axis this tends to [`DropX4`].
pub struct Perspective {
    eye: Point4,
    dist: f64,
    basis: [Point4; 3],
}

impl Perspective {
    pub fn new(eye: Point4) -> Result<Self> {
        let dist = eye.norm();
        if !(dist > 0.0 && dist.is_finite()) {
            return Err(Error::domain("perspective viewpoint must be a finite nonzero point"));
        }
        let n = Point4(eye.0.map(|v| v / dist));
        // Gram–Schmidt of the coordinate axes against n, keeping the three
        // best-conditioned directions in axis order
        let mut cand: Vec<(usize, Point4)> = (0..4)
            .map(|k| {
                let e = Point4::basis(k);
                let d = e.dot(n);
                (k, Point4(std::array::from_fn(|c| e.0[c] - d * n.0[c])))
            })
            .collect();
        let drop = cand
            .iter()
            .min_by(|a, b| a.1.norm().total_cmp(&b.1.norm()).then(b.0.cmp(&a.0)))
            .map(|c| c.0)
            .expect("four candidates");
        cand.retain(|c| c.0 != drop);
        let mut basis = [Point4::ZERO; 3];
        for (slot, (_, v)) in cand.into_iter().enumerate() {
            let mut w = v;
            for b in basis.iter().take(slot) {
                let d = w.dot(*b);
                w = Point4(std::array::from_fn(|c| w.0[c] - d * b.0[c]));
            }
            let len = w.norm();
            basis[slot] = Point4(w.0.map(|x| x / len));
        }
        Ok(Self { eye, dist, basis })
    }
}

impl Named for Perspective {
    fn name(&self) -> &'static str {
        "perspective"
    }
}

impl MeshProjection for Perspective {
    fn project(&self, p: Point4) -> Result<[f64; 3]> {
        let depth = p.dot(self.eye) / self.dist;
        if !(depth < self.dist) {
            return Err(Error::domain(format!(
                "point at depth {depth} is not in front of the viewpoint at distance {}",
                self.dist
            )));
        }
        let f = self.dist / (self.dist - depth);
        Ok(self.basis.map(|b| f * p.dot(b)))
    }
}

/// Default perspective viewpoint: the `x4` axis, outside every torus of
/// radius-bounded factors.
pub const DEFAULT_VIEWPOINT: Point4 = Point4::new(0.0, 0.0, 0.0, 4.0);

/// Mesh projections, default first.
pub fn mesh_projections(viewpoint: Point4) -> Result<Registry<dyn MeshProjection>> {
    let mut r: Registry<dyn MeshProjection> = Registry::new("mesh projection");
    r.register(Box::new(DropX4));
    r.register(Box::new(Perspective::new(viewpoint)?));
    Ok(r)
}

/// Wavefront OBJ of the torus grid: one vertex per grid point (row-major in
/// `(i, j)`), each periodic quad split into two triangles.
pub fn torus_obj(t: &ProductTorus, proj: &dyn MeshProjection) -> Result<String> {
    let (ns, nt) = (t.grid.ns, t.grid.nt);
    let mut out = String::new();
    writeln!(out, "# product torus {ns}x{nt}, projection {}", proj.name()).unwrap();
    for p in &t.points {
        let [x, y, z] = proj.project(*p)?;
        writeln!(out, "v {} {} {}", fmt_f64(x), fmt_f64(y), fmt_f64(z)).unwrap();
    }
    let v = |i: usize, j: usize| t.grid.index(i % ns, j % nt) + 1;
    for i in 0..ns {
        for j in 0..nt {
            let (a, b, c, d) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
            writeln!(out, "f {a} {b} {c}").unwrap();
            writeln!(out, "f {a} {c} {d}").unwrap();
        }
    }
    Ok(out)
}

/// Vertex and face counts of an OBJ text.
pub fn obj_counts(text: &str) -> (usize, usize) {
    text.lines().fold((0, 0), |(v, f), l| {
        (v + l.starts_with("v ") as usize, f + l.starts_with("f ") as usize)
    })
}
