//! Text and binary file formats. Floats are written with Rust's shortest
//! round-trip formatting, so every reader reproduces the written values
//! bit for bit.
//!
//! CSV files start with `# key=value` metadata lines, including `rows`, so a
//! file cut at a line boundary is still reported as truncated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lab::{GridField, GridSpec, PolarizationEstimate};
use crate::linalg::CVector;
use crate::phase_space::{SpacetimePoint, WaveCovector};
use crate::ray::{IntegratorInfo, Ray, RaySample};
use crate::transport::HamiltonOrbit;

pub type Metadata = BTreeMap<String, String>;

const RAY_COLUMNS: [&str; 10] = ["τ", "x0", "x1", "x2", "x3", "k0", "k1", "k2", "k3", "q"];
const GRID_MAGIC: &str = "polarwave-grid 1";

struct Table {
    meta: Metadata,
    header: Vec<String>,
    /// (line number, fields)
    rows: Vec<(usize, Vec<String>)>,
}

fn write_table(meta: &Metadata, header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
    let _ = writeln!(out, "# rows={}", rows.len());
    let _ = writeln!(out, "{}", header.join(","));
    for r in rows {
        let _ = writeln!(out, "{}", r.join(","));
    }
    out
}

fn parse_table(src: &str) -> Result<Table> {
    let mut meta = Metadata::new();
    let mut header: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    let mut last = 0;
    for (i, line) in src.lines().enumerate() {
        let n = i + 1;
        last = n;
        if let Some(rest) = line.strip_prefix('#') {
            if header.is_some() {
                return Err(Error::parse(n, "metadata after the header"));
            }
            let (k, v) = rest
                .trim()
                .split_once('=')
                .ok_or_else(|| Error::parse(n, "metadata line must read `# key=value`"))?;
            meta.insert(k.trim().to_string(), v.trim().to_string());
            continue;
        }
        let fields: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        match &header {
            None => header = Some(fields),
            Some(h) => {
                if fields.len() != h.len() {
                    return Err(Error::parse(
                        n,
                        format!("expected {} fields, found {}", h.len(), fields.len()),
                    ));
                }
                rows.push((n, fields));
            }
        }
    }
    let header = header.ok_or_else(|| Error::parse(last + 1, "missing header row"))?;
    let declared: usize = meta
        .remove("rows")
        .ok_or_else(|| Error::parse(1, "missing `rows` metadata"))?
        .parse()
        .map_err(|_| Error::parse(1, "`rows` is not a count"))?;
    if rows.len() != declared {
        return Err(Error::parse(
            last + 1,
            format!("expected {declared} data rows, found {}", rows.len()),
        ));
    }
    Ok(Table { meta, header, rows })
}

fn expect_header(t: &Table, want: &[String]) -> Result<()> {
    let line = t.meta.len() + 2;
    if t.header != want {
        return Err(Error::parse(
            line,
            format!("unexpected header `{}`", t.header.join(",")),
        ));
    }
    Ok(())
}

fn num(line: usize, col: &str, s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::parse(line, format!("column {col}: `{s}` is not a number")))?;
    Ok(v)
}

fn f(x: f64) -> String {
    format!("{x}")
}

fn meta_value<'a>(t: &'a Table, key: &str) -> Result<&'a str> {
    t.meta
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::parse(1, format!("missing `{key}` metadata")))
}

fn ray_row(s: &RaySample, q: f64) -> Vec<String> {
    std::iter::once(s.tau)
        .chain(s.x.0)
        .chain(s.k.0)
        .chain(std::iter::once(q))
        .map(f)
        .collect()
}

fn ray_meta(r: &Ray, extra: &Metadata) -> Metadata {
    let mut meta = extra.clone();
    meta.insert("method".into(), r.info().method.to_string());
    meta.insert("step".into(), f(r.info().step));
    meta
}

fn ray_from_rows(t: &Table) -> Result<Ray> {
    let info = IntegratorInfo {
        method: meta_value(t, "method")?
            .parse()
            .map_err(|_| Error::parse(1, "unknown integration method"))?,
        step: num(1, "step", meta_value(t, "step")?)?,
    };
    let mut samples = Vec::with_capacity(t.rows.len());
    let mut q = Vec::with_capacity(t.rows.len());
    for (line, row) in &t.rows {
        let v: Vec<f64> = (0..10)
            .map(|c| num(*line, RAY_COLUMNS[c], &row[c]))
            .collect::<Result<_>>()?;
        samples.push(RaySample {
            tau: v[0],
            x: SpacetimePoint([v[1], v[2], v[3], v[4]]),
            k: WaveCovector([v[5], v[6], v[7], v[8]]),
        });
        q.push(v[9]);
    }
    let first = t.rows.first().map(|r| r.0).unwrap_or(1);
    Ray::from_samples(samples, q, info).map_err(|e| Error::parse(first, e.to_string()))
}

pub fn ray_to_csv(r: &Ray, meta: &Metadata) -> String {
    let header: Vec<String> = RAY_COLUMNS.iter().map(|s| s.to_string()).collect();
    let rows: Vec<Vec<String>> = r
        .samples()
        .iter()
        .zip(r.q_values())
        .map(|(s, q)| ray_row(s, *q))
        .collect();
    write_table(&ray_meta(r, meta), &header, &rows)
}

/// Returns the ray and any metadata beyond what the ray itself records.
pub fn ray_from_csv(src: &str) -> Result<(Ray, Metadata)> {
    let t = parse_table(src)?;
    let header: Vec<String> = RAY_COLUMNS.iter().map(|s| s.to_string()).collect();
    expect_header(&t, &header)?;
    let ray = ray_from_rows(&t)?;
    let mut meta = t.meta;
    meta.remove("method");
    meta.remove("step");
    Ok((ray, meta))
}

fn orbit_header(n: usize, constraint: bool) -> Vec<String> {
    let mut h: Vec<String> = RAY_COLUMNS.iter().map(|s| s.to_string()).collect();
    for i in 0..n {
        h.push(format!("w{i}_re"));
        h.push(format!("w{i}_im"));
    }
    if constraint {
        h.push("constraint_re".into());
        h.push("constraint_im".into());
    }
    h
}

/// Ray columns, fiber components and, for four-component fibers, `k^mu w_mu`.
pub fn orbit_to_csv(o: &HamiltonOrbit, meta: &Metadata) -> String {
    let n = o.fiber_dim();
    let lorenz = o.lorenz_residuals();
    let header = orbit_header(n, lorenz.is_some());
    let r = o.ray();
    let mut m = ray_meta(r, meta);
    m.insert("fiber_dim".into(), n.to_string());
    m.insert("reprojection".into(), if o.reprojected() { "on" } else { "off" }.into());
    let rows: Vec<Vec<String>> = r
        .samples()
        .iter()
        .zip(r.q_values())
        .enumerate()
        .map(|(i, (s, q))| {
            let mut row = ray_row(s, *q);
            for z in o.omega()[i].iter() {
                row.push(f(z.re));
                row.push(f(z.im));
            }
            if let Some(l) = &lorenz {
                row.push(f(l[i].re));
                row.push(f(l[i].im));
            }
            row
        })
        .collect();
    write_table(&m, &header, &rows)
}

pub fn orbit_from_csv(src: &str) -> Result<(HamiltonOrbit, Metadata)> {
    let t = parse_table(src)?;
    let n: usize = meta_value(&t, "fiber_dim")?
        .parse()
        .map_err(|_| Error::parse(1, "`fiber_dim` is not a count"))?;
    let reprojected = match meta_value(&t, "reprojection")? {
        "on" => true,
        "off" => false,
        other => return Err(Error::parse(1, format!("bad reprojection flag `{other}`"))),
    };
    expect_header(&t, &orbit_header(n, n == 4))?;
    let ray = ray_from_rows(&t)?;
    let mut omega = Vec::with_capacity(t.rows.len());
    for (line, row) in &t.rows {
        let mut w = CVector::zeros(n);
        for i in 0..n {
            let re = num(*line, &t.header[10 + 2 * i], &row[10 + 2 * i])?;
            let im = num(*line, &t.header[11 + 2 * i], &row[11 + 2 * i])?;
            w[i] = Complex64::new(re, im);
        }
        omega.push(w);
    }
    let orbit = HamiltonOrbit::from_parts(ray, omega, reprojected)?;
    let mut meta = t.meta;
    for k in ["method", "step", "fiber_dim", "reprojection"] {
        meta.remove(k);
    }
    Ok((orbit, meta))
}

fn estimate_header() -> Vec<String> {
    let mut h: Vec<String> = ["x0", "x1", "x2", "x3", "khat1", "khat2", "khat3", "frequency"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for i in 0..4 {
        h.push(format!("w{i}_re"));
        h.push(format!("w{i}_im"));
    }
    h.push("strength".into());
    h.push("window".into());
    h
}

pub fn estimates_to_csv(est: &[PolarizationEstimate], meta: &Metadata) -> String {
    let rows: Vec<Vec<String>> = est
        .iter()
        .map(|e| {
            let mut row: Vec<String> =
                e.x.0
                    .iter()
                    .chain(&e.k_hat)
                    .chain([&e.frequency])
                    .map(|v| f(*v))
                    .collect();
            for z in &e.omega_hat {
                row.push(f(z.re));
                row.push(f(z.im));
            }
            row.push(f(e.strength));
            row.push(e.window.to_string());
            row
        })
        .collect();
    write_table(meta, &estimate_header(), &rows)
}

pub fn estimates_from_csv(src: &str) -> Result<(Vec<PolarizationEstimate>, Metadata)> {
    let t = parse_table(src)?;
    let header = estimate_header();
    expect_header(&t, &header)?;
    let mut out = Vec::with_capacity(t.rows.len());
    for (line, row) in &t.rows {
        let v: Vec<f64> = (0..17)
            .map(|c| num(*line, &header[c], &row[c]))
            .collect::<Result<_>>()?;
        let window = row[17]
            .parse()
            .map_err(|_| Error::parse(*line, format!("column window: `{}` is not an index", row[17])))?;
        out.push(PolarizationEstimate {
            x: SpacetimePoint([v[0], v[1], v[2], v[3]]),
            k_hat: [v[4], v[5], v[6]],
            frequency: v[7],
            omega_hat: std::array::from_fn(|i| Complex64::new(v[8 + 2 * i], v[9 + 2 * i])),
            strength: v[16],
            window,
        });
    }
    Ok((out, t.meta))
}

pub fn estimates_to_json(est: &[PolarizationEstimate]) -> String {
    serde_json::to_string_pretty(est).expect("estimates serialize")
}

pub fn estimates_from_json(src: &str) -> Result<Vec<PolarizationEstimate>> {
    serde_json::from_str(src).map_err(|e| Error::parse(e.line(), e.to_string()))
}

/// Text header, then little-endian `f64` pairs `(re, im)` ordered by slice,
/// component and row-major grid index.
pub fn write_grid_field(w: &mut impl Write, field: &GridField) -> Result<()> {
    let g = field.grid();
    let mut head = String::new();
    let _ = writeln!(head, "{GRID_MAGIC}");
    let _ = writeln!(head, "origin {} {} {}", f(g.origin[0]), f(g.origin[1]), f(g.origin[2]));
    let _ = writeln!(head, "extent {} {} {}", f(g.extent[0]), f(g.extent[1]), f(g.extent[2]));
    let _ = writeln!(head, "samples {} {} {}", g.samples[0], g.samples[1], g.samples[2]);
    let _ = writeln!(head, "time {} {} {}", f(g.t0), f(g.dt), g.slices);
    let _ = writeln!(head, "layout slice component x1 x2 x3 complex-f64-le");
    let _ = writeln!(head, "end");
    w.write_all(head.as_bytes())?;
    let mut body = Vec::with_capacity(field.data().len() * 16);
    for z in field.data() {
        body.extend_from_slice(&z.re.to_le_bytes());
        body.extend_from_slice(&z.im.to_le_bytes());
    }
    w.write_all(&body)?;
    Ok(())
}

pub fn grid_field_bytes(field: &GridField) -> Vec<u8> {
    let mut out = Vec::new();
    write_grid_field(&mut out, field).expect("writing to memory");
    out
}

pub fn read_grid_field(r: &mut impl Read) -> Result<GridField> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    parse_grid_field(&bytes)
}

pub fn parse_grid_field(bytes: &[u8]) -> Result<GridField> {
    let mut pos = 0;
    let mut lines: Vec<String> = Vec::new();
    loop {
        let n = lines.len() + 1;
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::parse(n, "header ends before `end`"))?;
        let line = std::str::from_utf8(&bytes[pos..pos + end]).map_err(|_| Error::parse(n, "header is not text"))?;
        pos += end + 1;
        if line == "end" {
            break;
        }
        lines.push(line.to_string());
        if lines.len() > 16 {
            return Err(Error::parse(n, "header too long"));
        }
    }
    if lines.first().map(String::as_str) != Some(GRID_MAGIC) {
        return Err(Error::parse(1, "not a grid field file"));
    }
    let mut fields: BTreeMap<&str, (usize, Vec<&str>)> = BTreeMap::new();
    for (i, l) in lines.iter().enumerate().skip(1) {
        let mut parts = l.split_whitespace();
        let key = parts.next().ok_or_else(|| Error::parse(i + 1, "empty header line"))?;
        fields.insert(key, (i + 1, parts.collect()));
    }
    let get = |key: &str, count: usize| -> Result<(usize, Vec<&str>)> {
        let (line, vals) = fields
            .get(key)
            .cloned()
            .ok_or_else(|| Error::parse(lines.len() + 1, format!("missing `{key}` line")))?;
        if vals.len() < count {
            return Err(Error::parse(line, format!("`{key}` needs {count} values")));
        }
        Ok((line, vals))
    };
    let reals = |key: &str| -> Result<[f64; 3]> {
        let (line, v) = get(key, 3)?;
        let mut out = [0.0; 3];
        for (o, s) in out.iter_mut().zip(&v) {
            *o = num(line, key, s)?;
        }
        Ok(out)
    };
    let count = |line: usize, s: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| Error::parse(line, format!("`{s}` is not a count")))
    };
    let origin = reals("origin")?;
    let extent = reals("extent")?;
    let (sl, sv) = get("samples", 3)?;
    let samples = [count(sl, sv[0])?, count(sl, sv[1])?, count(sl, sv[2])?];
    let (tl, tv) = get("time", 3)?;
    let grid = GridSpec {
        origin,
        extent,
        samples,
        t0: num(tl, "t0", tv[0])?,
        dt: num(tl, "dt", tv[1])?,
        slices: count(tl, tv[2])?,
    };
    let body_line = lines.len() + 2;
    grid.validate().map_err(|e| Error::parse(sl, e.to_string()))?;
    let expected = grid.slices * 4 * grid.points() * 16;
    let body = &bytes[pos..];
    if body.len() != expected {
        return Err(Error::parse(
            body_line,
            format!("body has {} bytes, header implies {expected}", body.len()),
        ));
    }
    let data = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    GridField::from_data(grid, data).map_err(|e| Error::parse(body_line, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::named::flat_maxwell;
    use crate::principal::decompose_principal_type;
    use crate::ray::{trace_ray, Method};
    use crate::transport::transport;

    fn sample_ray() -> Ray {
        let d = decompose_principal_type(&flat_maxwell(), None).unwrap();
        trace_ray(
            d.q(),
            SpacetimePoint::new(0.1, -0.3, 1.0 / 3.0, 2.0),
            WaveCovector::new(5.0, -3.0, -4.0, 0.0),
            (0.0, 0.5),
            0.07,
            Method::Rk4,
        )
        .unwrap()
    }

    #[test]
    fn ray_roundtrip() {
        let r = sample_ray();
        let mut meta = Metadata::new();
        meta.insert("symbol".into(), "flat-maxwell".into());
        let text = ray_to_csv(&r, &meta);
        assert!(text.contains("τ,x0,x1,x2,x3,k0,k1,k2,k3,q"));
        let (back, m) = ray_from_csv(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(m, meta);
    }

    #[test]
    fn truncated_ray_is_reported() {
        let text = ray_to_csv(&sample_ray(), &Metadata::new());
        let cut = &text[..text.len() - 12];
        match ray_from_csv(cut) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, cut.lines().count()),
            other => panic!("{other:?}"),
        }
        let whole_rows: String = text
            .lines()
            .take(text.lines().count() - 1)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(ray_from_csv(&whole_rows), Err(Error::Parse { .. })));
    }

    #[test]
    fn orbit_roundtrip() {
        let d = decompose_principal_type(&flat_maxwell(), None).unwrap();
        let w0 = CVector::from_vec(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(0.6, 0.1),
            Complex64::new(0.0, 0.8),
            Complex64::new(0.0, 0.0),
        ]);
        let o = transport(&d, &sample_ray(), &w0).unwrap();
        let text = orbit_to_csv(&o, &Metadata::new());
        assert!(text.lines().nth(5).unwrap().ends_with("constraint_re,constraint_im"));
        let (back, _) = orbit_from_csv(&text).unwrap();
        assert_eq!(back, o);
    }

    #[test]
    fn grid_roundtrip_and_mismatch() {
        let g = GridSpec::cube(8, 0.5, 2, 0.25);
        let data: Vec<Complex64> = (0..g.slices * 4 * g.points())
            .map(|i| Complex64::new((i as f64).sqrt() / 3.0, -(i as f64) * 1e-7))
            .collect();
        let field = GridField::from_data(g, data).unwrap();
        let bytes = grid_field_bytes(&field);
        assert_eq!(parse_grid_field(&bytes).unwrap(), field);
        assert!(matches!(
            parse_grid_field(&bytes[..bytes.len() - 5]),
            Err(Error::Parse { line: 8, .. })
        ));
        assert!(matches!(
            parse_grid_field(b"junk\nend\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn estimates_roundtrip() {
        let e = PolarizationEstimate {
            x: SpacetimePoint::new(1.0, 2.5, -3.0, 1e-17),
            k_hat: [0.0, 0.6, 0.8],
            frequency: 0.7853981633974487,
            omega_hat: [
                Complex64::new(0.0, 0.0),
                Complex64::new(0.1, -0.2),
                Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
                Complex64::new(-0.0, 1e-300),
            ],
            strength: 0.123456789,
            window: 3,
        };
        let list = vec![e.clone(), e];
        let (csv, _) = estimates_from_csv(&estimates_to_csv(&list, &Metadata::new())).unwrap();
        assert_eq!(csv, list);
        assert_eq!(estimates_from_json(&estimates_to_json(&list)).unwrap(), list);
    }
}
