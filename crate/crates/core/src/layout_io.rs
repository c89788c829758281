//! Obstacle layouts, measurement files and coverage rasters on disk.
//!
//! Layout files are UTF-8 CSV whose first non-blank line is a format tag:
//!
//! * `#segments`: `cx,cy,length,theta` per obstacle (meters, radians)
//! * `#endpoints`: `x1,y1,x2,y2` per obstacle
//! * `#polygons`: `id,x,y` per vertex (rows of one building are
//!   contiguous), or `id,x1,y1,x2,y2,…` with a whole building on one row
//!
//! Further lines starting with `#` and blank lines are ignored.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimators::Measurement;
use crate::geometry::{point_segment_distance, ObstacleSegment, Occluders, Point2D, GEOM_EPS};
use crate::model::{Layout, Provenance};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutFormat {
    Segments,
    Endpoints,
    Polygons,
}

impl LayoutFormat {
    pub fn tag(self) -> &'static str {
        match self {
            LayoutFormat::Segments => "#segments",
            LayoutFormat::Endpoints => "#endpoints",
            LayoutFormat::Polygons => "#polygons",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        match tag.trim().to_ascii_lowercase().as_str() {
            "#segments" => Some(LayoutFormat::Segments),
            "#endpoints" => Some(LayoutFormat::Endpoints),
            "#polygons" => Some(LayoutFormat::Polygons),
            _ => None,
        }
    }
}

/// Parsed contents of a layout file.
#[derive(Debug, Clone, PartialEq)]
pub struct LayoutFile {
    pub format: LayoutFormat,
    /// Every obstacle, with polygons already split into their edges.
    pub obstacles: Vec<ObstacleSegment>,
    /// Building outlines; empty unless the file holds polygons.
    pub buildings: Vec<Vec<Point2D>>,
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_numbers(path: &Path, line_no: usize, line: &str) -> Result<Vec<f64>> {
    line.split(',')
        .map(|f| {
            let f = f.trim();
            match f.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(parse_err(path, line_no, format!("`{f}` is not a finite number"))),
            }
        })
        .collect()
}

/// Data lines with their 1-based line numbers, comments and blanks removed.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses layout text; `path` is only used in error messages.
pub fn parse_layout(text: &str, path: &Path) -> Result<LayoutFile> {
    let (tag_line, tag) = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .find(|(_, l)| !l.is_empty())
        .ok_or_else(|| parse_err(path, 1, "missing format tag"))?;
    let format = LayoutFormat::from_tag(tag).ok_or_else(|| {
        parse_err(
            path,
            tag_line,
            format!("unknown format tag `{tag}` (expected #segments, #endpoints or #polygons)"),
        )
    })?;
    let mut out = LayoutFile {
        format,
        obstacles: Vec::new(),
        buildings: Vec::new(),
    };
    let mut current: Option<(String, Vec<Point2D>, usize)> = None;
    let mut seen_ids = std::collections::HashSet::new();
    let flush = |current: &mut Option<(String, Vec<Point2D>, usize)>, out: &mut LayoutFile| -> Result<()> {
        if let Some((_, poly, line)) = current.take() {
            let segs = polygon_to_segments(&poly).map_err(|e| parse_err(path, line, e.to_string()))?;
            out.obstacles.extend(segs);
            out.buildings.push(poly);
        }
        Ok(())
    };

    for (line_no, line) in data_lines(text).skip_while(|&(n, _)| n <= tag_line) {
        match format {
            LayoutFormat::Segments | LayoutFormat::Endpoints => {
                let v = parse_numbers(path, line_no, line)?;
                if v.len() != 4 {
                    return Err(parse_err(
                        path,
                        line_no,
                        format!("expected 4 fields, found {}", v.len()),
                    ));
                }
                let seg = if format == LayoutFormat::Segments {
                    ObstacleSegment::new(Point2D::new(v[0], v[1]), v[2], v[3])
                } else {
                    ObstacleSegment::from_endpoints(Point2D::new(v[0], v[1]), Point2D::new(v[2], v[3]))
                };
                out.obstacles
                    .push(seg.map_err(|e| parse_err(path, line_no, e.to_string()))?);
            }
            LayoutFormat::Polygons => {
                let (id, rest) = line
                    .split_once(',')
                    .ok_or_else(|| parse_err(path, line_no, "expected `id,x,y`"))?;
                let id = id.trim().to_string();
                let v = parse_numbers(path, line_no, rest)?;
                if v.len() % 2 != 0 || v.is_empty() {
                    return Err(parse_err(path, line_no, "coordinates must come in x,y pairs"));
                }
                let vertices = v.chunks(2).map(|c| Point2D::new(c[0], c[1]));
                if v.len() > 2 {
                    flush(&mut current, &mut out)?;
                    if !seen_ids.insert(id) {
                        return Err(parse_err(path, line_no, "building id repeated"));
                    }
                    current = Some((String::new(), vertices.collect(), line_no));
                    flush(&mut current, &mut out)?;
                } else {
                    match &mut current {
                        Some((cur, poly, _)) if *cur == id => poly.extend(vertices),
                        _ => {
                            flush(&mut current, &mut out)?;
                            if !seen_ids.insert(id.clone()) {
                                return Err(parse_err(
                                    path,
                                    line_no,
                                    format!("rows of building `{id}` are not contiguous"),
                                ));
                            }
                            current = Some((id, vertices.collect(), line_no));
                        }
                    }
                }
            }
        }
    }
    flush(&mut current, &mut out)?;
    Ok(out)
}

pub fn read_layout_file(path: &Path) -> Result<LayoutFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_layout(&text, path)
}

/// Keeps the obstacles that come within `radius` of the BS.
pub fn clip_to_region(obstacles: &[ObstacleSegment], radius: f64) -> Vec<ObstacleSegment> {
    obstacles
        .iter()
        .filter(|o| {
            let (a, b) = o.endpoints();
            point_segment_distance(Point2D::ORIGIN, a, b) <= radius
        })
        .copied()
        .collect()
}

/// Loads a layout file, keeping obstacles that reach into the disk of
/// `radius` around the BS when a radius is given.
pub fn load_layout(path: &Path, radius: Option<f64>) -> Result<Layout> {
    let file = read_layout_file(path)?;
    let obstacles = match radius {
        Some(r) => clip_to_region(&file.obstacles, r),
        None => file.obstacles,
    };
    Ok(Layout {
        obstacles,
        provenance: Provenance::Ingested,
    })
}

/// One obstacle per polygon edge. A repeated closing vertex and
/// zero-length edges are dropped.
pub fn polygon_to_segments(polygon: &[Point2D]) -> Result<Vec<ObstacleSegment>> {
    let mut vertices: Vec<Point2D> = Vec::with_capacity(polygon.len());
    for &p in polygon {
        if vertices.last().is_none_or(|&q: &Point2D| q.distance(p) > GEOM_EPS) {
            vertices.push(p);
        }
    }
    while vertices.len() > 1 && vertices[0].distance(vertices[vertices.len() - 1]) <= GEOM_EPS {
        vertices.pop();
    }
    if vertices.len() < 3 {
        return Err(Error::DegeneratePolygon);
    }
    let scale = vertices.iter().map(|p| p.distance(vertices[0])).fold(0.0, f64::max);
    let area = crate::geometry::shoelace(&vertices).abs();
    if area <= GEOM_EPS * scale.max(1.0) {
        return Err(Error::DegeneratePolygon);
    }
    let n = vertices.len();
    (0..n)
        .map(|i| ObstacleSegment::from_endpoints(vertices[i], vertices[(i + 1) % n]))
        .collect()
}

pub fn polygon_perimeter(polygon: &[Point2D]) -> f64 {
    let n = polygon.len();
    (0..n).map(|i| polygon[i].distance(polygon[(i + 1) % n])).sum()
}

/// Model parameters estimated from a real layout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedParams {
    /// λ̂ in m⁻².
    pub density: f64,
    /// L̂_max in meters.
    pub max_length: f64,
    pub avg_perimeter: f64,
    /// Buildings (polygon input) or obstacles (segment input) in the region.
    pub obstacle_count: usize,
}

/// Fits λ and L_max over the disk of radius `radius`.
///
/// With polygons: `λ̂ = buildings × obstacles_per_building / (πR²)` and
/// `L̂_max = avg_perimeter / 4`. With plain segments every obstacle counts
/// once and the average perimeter is taken as twice the mean segment
/// length, so `L̂_max` is half the mean length there. A building or segment counts when it comes within `radius` of
/// the BS.
pub fn fit_params(layout: &LayoutFile, radius: f64, obstacles_per_building: usize) -> Result<FittedParams> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("radius", "must be finite and > 0"));
    }
    let area = PI * radius * radius;
    let (count, per_item, avg_perimeter) = if layout.format == LayoutFormat::Polygons {
        let inside: Vec<&Vec<Point2D>> = layout
            .buildings
            .iter()
            .filter(|b| {
                let n = b.len();
                (0..n).any(|i| point_segment_distance(Point2D::ORIGIN, b[i], b[(i + 1) % n]) <= radius)
            })
            .collect();
        let perimeter = if inside.is_empty() {
            0.0
        } else {
            inside.iter().map(|b| polygon_perimeter(b)).sum::<f64>() / inside.len() as f64
        };
        (inside.len(), obstacles_per_building, perimeter)
    } else {
        let inside = clip_to_region(&layout.obstacles, radius);
        let mean_len = if inside.is_empty() {
            0.0
        } else {
            inside.iter().map(|o| o.length).sum::<f64>() / inside.len() as f64
        };
        (inside.len(), 1, 2.0 * mean_len)
    };
    Ok(FittedParams {
        density: (count * per_item) as f64 / area,
        max_length: avg_perimeter / 4.0,
        avg_perimeter,
        obstacle_count: count,
    })
}

/// `#segments` text for the given obstacles; values round-trip exactly.
pub fn layout_to_csv(obstacles: &[ObstacleSegment]) -> String {
    let mut out = String::from("#segments\n# cx,cy,length,theta\n");
    for o in obstacles {
        let _ = writeln!(out, "{},{},{},{}", o.center.x, o.center.y, o.length, o.orientation);
    }
    out
}

pub fn export_layout(obstacles: &[ObstacleSegment], path: &Path) -> Result<()> {
    std::fs::write(path, layout_to_csv(obstacles)).map_err(|e| Error::io(path, e))
}

/// `#polygons` text, one building per row.
pub fn buildings_to_csv(buildings: &[Vec<Point2D>]) -> String {
    let mut out = String::from("#polygons\n# id,x1,y1,x2,y2,...\n");
    for (id, b) in buildings.iter().enumerate() {
        let _ = write!(out, "b{id}");
        for p in b {
            let _ = write!(out, ",{},{}", p.x, p.y);
        }
        out.push('\n');
    }
    out
}

fn is_header(line: &str) -> bool {
    line.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
}

/// Reads `x,y,label` rows (label 0 = NLOS, 1 = LOS). A leading header row
/// and `#` comments are skipped.
pub fn parse_measurements(text: &str, path: &Path) -> Result<Vec<Measurement>> {
    let mut out = Vec::new();
    for (i, (line_no, line)) in data_lines(text).enumerate() {
        if i == 0 && is_header(line) {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected `x,y,label`, found {} fields", fields.len()),
            ));
        }
        let xy = parse_numbers(path, line_no, &line[..line.rfind(',').unwrap_or(0)])?;
        let los = match fields[2] {
            "1" => true,
            "0" => false,
            other => return Err(parse_err(path, line_no, format!("label `{other}` is not 0 or 1"))),
        };
        out.push(Measurement::new(Point2D::new(xy[0], xy[1]), los));
    }
    Ok(out)
}

pub fn read_measurements(path: &Path) -> Result<Vec<Measurement>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_measurements(&text, path)
}

pub fn measurements_to_csv(data: &[Measurement]) -> String {
    let mut out = String::from("x,y,label\n");
    for m in data {
        let _ = writeln!(out, "{},{},{}", m.position.x, m.position.y, m.label());
    }
    out
}

/// Reads `x,y` rows, skipping a leading header row and `#` comments.
pub fn parse_points(text: &str, path: &Path) -> Result<Vec<Point2D>> {
    let mut out = Vec::new();
    for (i, (line_no, line)) in data_lines(text).enumerate() {
        if i == 0 && is_header(line) {
            continue;
        }
        let v = parse_numbers(path, line_no, line)?;
        if v.len() != 2 {
            return Err(parse_err(
                path,
                line_no,
                format!("expected `x,y`, found {} fields", v.len()),
            ));
        }
        out.push(Point2D::new(v[0], v[1]));
    }
    Ok(out)
}

pub fn read_points(path: &Path) -> Result<Vec<Point2D>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_points(&text, path)
}

pub const RASTER_LOS: u8 = 255;
pub const RASTER_NLOS: u8 = 0;
pub const RASTER_OUTSIDE: u8 = 128;

/// Square raster covering `[-R, R]²`, row 0 at the top.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterSpec {
    pub width: usize,
    pub height: usize,
    pub radius: f64,
}

impl RasterSpec {
    pub fn new(width: usize, height: usize, radius: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("raster", "width and height must be >= 1"));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid("radius", "must be finite and > 0"));
        }
        Ok(Self { width, height, radius })
    }

    pub fn pixel_center(&self, col: usize, row: usize) -> Point2D {
        let r = self.radius;
        Point2D::new(
            -r + (col as f64 + 0.5) * 2.0 * r / self.width as f64,
            r - (row as f64 + 0.5) * 2.0 * r / self.height as f64,
        )
    }

    /// The pixel whose cell contains `p`, if any.
    pub fn pixel_of(&self, p: Point2D) -> Option<(usize, usize)> {
        let r = self.radius;
        let col = ((p.x + r) / (2.0 * r) * self.width as f64).floor();
        let row = ((r - p.y) / (2.0 * r) * self.height as f64).floor();
        let in_range = |v: f64, n: usize| v >= 0.0 && v < n as f64;
        (in_range(col, self.width) && in_range(row, self.height)).then_some((col as usize, row as usize))
    }
}

/// Pixels in row-major order: 255 where `is_los`, 0 where not, 128 for
/// pixel centres outside the disk.
pub fn render_raster(spec: &RasterSpec, mut is_los: impl FnMut(Point2D) -> bool) -> Vec<u8> {
    let mut pixels = Vec::with_capacity(spec.width * spec.height);
    for row in 0..spec.height {
        for col in 0..spec.width {
            let p = spec.pixel_center(col, row);
            pixels.push(if p.norm() >= spec.radius {
                RASTER_OUTSIDE
            } else if is_los(p) {
                RASTER_LOS
            } else {
                RASTER_NLOS
            });
        }
    }
    pixels
}

/// Ground-truth visibility raster of a layout seen from the BS.
pub fn layout_raster(spec: &RasterSpec, obstacles: &[ObstacleSegment]) -> Vec<u8> {
    let occ = Occluders::new(obstacles);
    render_raster(spec, |p| occ.is_los(Point2D::ORIGIN, p))
}

/// Binary 8-bit PGM (P5).
pub fn encode_pgm(spec: &RasterSpec, pixels: &[u8]) -> Vec<u8> {
    debug_assert_eq!(pixels.len(), spec.width * spec.height);
    let mut out = format!("P5\n{} {}\n255\n", spec.width, spec.height).into_bytes();
    out.extend_from_slice(pixels);
    out
}

pub fn export_coverage_raster(path: &Path, spec: &RasterSpec, pixels: &[u8]) -> Result<()> {
    std::fs::write(path, encode_pgm(spec, pixels)).map_err(|e| Error::io(path, e))
}

/// Decodes a P5 file written by [`encode_pgm`].
pub fn decode_pgm(bytes: &[u8]) -> Option<(usize, usize, Vec<u8>)> {
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return None;
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).ok()?.to_string());
    }
    if fields[0] != "P5" || fields[3] != "255" {
        return None;
    }
    let w: usize = fields[1].parse().ok()?;
    let h: usize = fields[2].parse().ok()?;
    let data = bytes.get(pos + 1..)?;
    (data.len() == w * h).then(|| (w, h, data.to_vec()))
}

/// Rectangular city blocks for a synthetic downtown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManhattanSpec {
    /// Buildings reaching into this disk around the BS are emitted.
    pub radius: f64,
    /// Side of each square building, meters.
    pub building_size: f64,
    /// Street width between buildings, meters.
    pub street_width: f64,
}

impl Default for ManhattanSpec {
    /// 28.6 m blocks (perimeter 114.4 m) on a 49.6 m pitch: 32 buildings
    /// reach into a 150 m cell.
    fn default() -> Self {
        Self {
            radius: 150.0,
            building_size: 28.6,
            street_width: 21.0,
        }
    }
}

/// Square buildings on a street grid with the BS at a street crossing.
/// Vertices are counter-clockwise.
pub fn manhattan_layout(spec: &ManhattanSpec) -> Result<Vec<Vec<Point2D>>> {
    if !(spec.building_size > 0.0) || !(spec.street_width >= 0.0) || !(spec.radius > 0.0) {
        return Err(Error::invalid("manhattan", "sizes must be positive"));
    }
    let pitch = spec.building_size + spec.street_width;
    let half = spec.street_width / 2.0;
    let reach = (spec.radius / pitch).ceil() as i64 + 1;
    let mut out = Vec::new();
    for j in -reach..reach {
        for i in -reach..reach {
            let x0 = half + i as f64 * pitch;
            let y0 = half + j as f64 * pitch;
            let (x1, y1) = (x0 + spec.building_size, y0 + spec.building_size);
            // Closest point of the block to the BS.
            let cx = 0f64.clamp(x0, x1);
            let cy = 0f64.clamp(y0, y1);
            if cx.hypot(cy) <= spec.radius {
                out.push(vec![
                    Point2D::new(x0, y0),
                    Point2D::new(x1, y0),
                    Point2D::new(x1, y1),
                    Point2D::new(x0, y1),
                ]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;
    use std::path::PathBuf;

    fn p() -> PathBuf {
        PathBuf::from("<inline>")
    }

    #[test]
    fn segment_row() {
        let f = parse_layout("#segments\n0,0,20,0\n", &p()).unwrap();
        assert_eq!(f.obstacles.len(), 1);
        let o = f.obstacles[0];
        assert_eq!((o.center, o.length, o.orientation), (Point2D::ORIGIN, 20.0, 0.0));
    }

    #[test]
    fn endpoint_row() {
        let f = parse_layout("#endpoints\n-10,0,10,0\n", &p()).unwrap();
        let o = f.obstacles[0];
        assert!(o.center.distance(Point2D::ORIGIN) < 1e-12);
        assert!((o.length - 20.0).abs() < 1e-12);
        assert!(o.orientation.abs() < 1e-12);
    }

    #[test]
    fn empty_and_bad_files() {
        assert!(parse_layout("#segments\n", &p()).unwrap().obstacles.is_empty());
        assert!(matches!(
            parse_layout("#circles\n", &p()),
            Err(Error::Parse { line: 1, .. })
        ));
        let err = parse_layout("#segments\n# c\n1,2,3,0\n1,2,x,0\n", &p()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 4, .. }), "{err}");
        assert!(matches!(
            parse_layout("#segments\n1,2,3\n", &p()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn polygon_rows_both_styles() {
        let text = "#polygons\na,0,0\na,4,0\na,0,3\nb,10,10,11,10,11,11,10,11\n";
        let f = parse_layout(text, &p()).unwrap();
        assert_eq!(f.buildings.len(), 2);
        assert_eq!(f.obstacles.len(), 7);
        let split = "#polygons\na,0,0\na,4,0\na,0,3\nb,10,10\nb,11,10\nb,11,11\na,5,5\n";
        assert!(matches!(parse_layout(split, &p()), Err(Error::Parse { line: 8, .. })));
        let flat = "#polygons\na,0,0\na,4,0\nb,1,1\n";
        assert!(matches!(parse_layout(flat, &p()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn square_and_triangle() {
        let sq = [
            Point2D::new(0.0, 0.0),
            Point2D::new(1.0, 0.0),
            Point2D::new(1.0, 1.0),
            Point2D::new(0.0, 1.0),
        ];
        let segs = polygon_to_segments(&sq).unwrap();
        assert_eq!(segs.len(), 4);
        let thetas: Vec<f64> = segs.iter().map(|s| s.orientation).collect();
        for (t, want) in thetas.iter().zip([0.0, FRAC_PI_2, 0.0, FRAC_PI_2]) {
            assert!((t - want).abs() < 1e-12, "{thetas:?}");
        }
        assert!(segs.iter().all(|s| (s.length - 1.0).abs() < 1e-12));
        let tri = [Point2D::new(0.0, 0.0), Point2D::new(4.0, 0.0), Point2D::new(0.0, 3.0)];
        let lens: Vec<f64> = polygon_to_segments(&tri).unwrap().iter().map(|s| s.length).collect();
        assert_eq!(lens, vec![4.0, 5.0, 3.0]);
    }

    #[test]
    fn degenerate_polygons() {
        let line = [Point2D::new(0.0, 0.0), Point2D::new(1.0, 1.0), Point2D::new(2.0, 2.0)];
        assert!(matches!(polygon_to_segments(&line), Err(Error::DegeneratePolygon)));
        let closed = [Point2D::new(0.0, 0.0), Point2D::new(1.0, 0.0), Point2D::new(0.0, 0.0)];
        assert!(polygon_to_segments(&closed).is_err());
    }

    #[test]
    fn fit_identities() {
        let buildings = manhattan_layout(&ManhattanSpec::default()).unwrap();
        let text = buildings_to_csv(&buildings);
        let f = parse_layout(&text, &p()).unwrap();
        let fit = fit_params(&f, 150.0, 2).unwrap();
        let area = PI * 150.0 * 150.0;
        assert_eq!(fit.density * area, (2 * fit.obstacle_count) as f64);
        assert!((fit.avg_perimeter - 114.4).abs() < 1e-9);
        assert!((fit.max_length - 28.6).abs() < 1e-9);
        let empty = parse_layout("#polygons\n", &p()).unwrap();
        assert_eq!(fit_params(&empty, 150.0, 2).unwrap().density, 0.0);
    }

    #[test]
    fn layout_round_trip() {
        let obs = vec![
            ObstacleSegment::new(Point2D::new(1.5, -2.25), 7.0, 0.3).unwrap(),
            ObstacleSegment::new(Point2D::new(-40.0, 12.0), 19.9, 3.0).unwrap(),
        ];
        let back = parse_layout(&layout_to_csv(&obs), &p()).unwrap().obstacles;
        assert_eq!(back, obs);
    }

    #[test]
    fn measurements_parse() {
        let m = parse_measurements("x,y,label\n1,2,1\n-3.5,4,0\n", &p()).unwrap();
        assert_eq!(
            m,
            vec![
                Measurement::new(Point2D::new(1.0, 2.0), true),
                Measurement::new(Point2D::new(-3.5, 4.0), false)
            ]
        );
        assert!(matches!(
            parse_measurements("1,2,1\n3,4,2\n", &p()),
            Err(Error::Parse { line: 2, .. })
        ));
        assert_eq!(parse_measurements(&measurements_to_csv(&m), &p()).unwrap(), m);
    }

    #[test]
    fn raster_basics() {
        let spec = RasterSpec::new(31, 31, 150.0).unwrap();
        let px = layout_raster(&spec, &[]);
        assert!(px.iter().all(|&v| v == RASTER_LOS || v == RASTER_OUTSIDE));
        assert_eq!(px[0], RASTER_OUTSIDE);
        let (c, r) = spec.pixel_of(Point2D::ORIGIN).unwrap();
        assert_eq!(px[r * 31 + c], RASTER_LOS);
        let bytes = encode_pgm(&spec, &px);
        assert_eq!(decode_pgm(&bytes).unwrap(), (31, 31, px));
    }

    #[test]
    fn raster_wedge_matches_oracle() {
        let spec = RasterSpec::new(64, 64, 150.0).unwrap();
        let wall = vec![ObstacleSegment::new(Point2D::new(50.0, 0.0), 40.0, FRAC_PI_2).unwrap()];
        let px = layout_raster(&spec, &wall);
        for row in 0..64 {
            for col in 0..64 {
                let q = spec.pixel_center(col, row);
                if q.norm() >= 150.0 {
                    continue;
                }
                let want = crate::geometry::is_los(&wall, Point2D::ORIGIN, q);
                assert_eq!(px[row * 64 + col] == RASTER_LOS, want);
            }
        }
        assert!(px.contains(&RASTER_NLOS));
    }
}
