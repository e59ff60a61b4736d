//! PLY point clouds with optional ground-truth labels, a predicted medial
//! field and colours as extra vertex properties.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimate::MedialField;
use crate::model::{GroundTruthLabel, Point3, PointCloud, Vec3};

const GT_PROPS: [&str; 5] = ["gt_radius", "gt_dx", "gt_dy", "gt_dz", "branch_id"];
const PRED_PROPS: [&str; 4] = ["pred_log_radius", "pred_dx", "pred_dy", "pred_dz"];
const COLOR_PROPS: [&str; 3] = ["red", "green", "blue"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlyFormat {
    Ascii,
    #[default]
    BinaryLittleEndian,
}

/// A cloud plus the medial field stored alongside it, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct CloudFile {
    pub cloud: PointCloud,
    pub field: Option<MedialField>,
}

pub fn read_cloud(path: impl AsRef<Path>) -> Result<CloudFile> {
    parse_cloud(&std::fs::read(path)?)
}

pub fn write_cloud(
    path: impl AsRef<Path>,
    cloud: &PointCloud,
    field: Option<&MedialField>,
    format: PlyFormat,
) -> Result<()> {
    let bytes = encode_cloud(cloud, field, format)?;
    std::fs::write(path, bytes)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "char" | "int8" => Scalar::I8,
            "uchar" | "uint8" => Scalar::U8,
            "short" | "int16" => Scalar::I16,
            "ushort" | "uint16" => Scalar::U16,
            "int" | "int32" => Scalar::I32,
            "uint" | "uint32" => Scalar::U32,
            "float" | "float32" => Scalar::F32,
            "double" | "float64" => Scalar::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Scalar::I8 | Scalar::U8 => 1,
            Scalar::I16 | Scalar::U16 => 2,
            Scalar::I32 | Scalar::U32 | Scalar::F32 => 4,
            Scalar::F64 => 8,
        }
    }

    fn decode_le(self, b: &[u8]) -> f64 {
        match self {
            Scalar::I8 => b[0] as i8 as f64,
            Scalar::U8 => b[0] as f64,
            Scalar::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Scalar::I32 => i32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::U32 => u32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F32 => f32::from_le_bytes(b[..4].try_into().unwrap()) as f64,
            Scalar::F64 => f64::from_le_bytes(b[..8].try_into().unwrap()),
        }
    }

    fn is_integer(self) -> bool {
        !matches!(self, Scalar::F32 | Scalar::F64)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Scalar(Scalar),
    List { count: Scalar, item: Scalar },
}

#[derive(Debug, Clone)]
struct Property {
    name: String,
    kind: Kind,
    offset: u64,
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    body: usize,
}

fn parse_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset: offset as u64,
        message: message.into(),
    }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut pos = 0;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut first = true;
    loop {
        let Some(nl) = bytes[pos..].iter().position(|&b| b == b'\n') else {
            return Err(parse_error(pos, "header ends before `end_header`"));
        };
        let line_start = pos;
        let raw = &bytes[pos..pos + nl];
        pos += nl + 1;
        let line = std::str::from_utf8(raw)
            .map_err(|_| parse_error(line_start, "header line is not UTF-8"))?
            .trim_end_matches('\r');
        let words: Vec<&str> = line.split_whitespace().collect();
        if first {
            if line != "ply" {
                return Err(parse_error(0, "missing `ply` magic"));
            }
            first = false;
            continue;
        }
        match words.as_slice() {
            ["end_header"] => break,
            [] | ["comment", ..] | ["obj_info", ..] => {}
            ["format", f, version] => {
                if *version != "1.0" {
                    return Err(parse_error(line_start, format!("unsupported PLY version {version}")));
                }
                format = Some(match *f {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    other => return Err(parse_error(line_start, format!("unsupported PLY format `{other}`"))),
                });
            }
            ["element", name, count] => {
                let count = count
                    .parse()
                    .map_err(|_| parse_error(line_start, format!("bad element count `{count}`")))?;
                elements.push(Element {
                    name: name.to_string(),
                    count,
                    props: Vec::new(),
                });
            }
            ["property", "list", c, i, name] => {
                let (Some(count), Some(item)) = (Scalar::parse(c), Scalar::parse(i)) else {
                    return Err(parse_error(line_start, format!("unknown list types `{c} {i}`")));
                };
                if !count.is_integer() {
                    return Err(parse_error(line_start, "list count type must be an integer"));
                }
                push_property(&mut elements, line_start, name, Kind::List { count, item })?;
            }
            ["property", t, name] => {
                let Some(s) = Scalar::parse(t) else {
                    return Err(parse_error(line_start, format!("unknown property type `{t}`")));
                };
                push_property(&mut elements, line_start, name, Kind::Scalar(s))?;
            }
            _ => return Err(parse_error(line_start, format!("unrecognised header line `{line}`"))),
        }
    }
    let format = format.ok_or_else(|| parse_error(0, "header has no `format` line"))?;
    Ok(Header {
        format,
        elements,
        body: pos,
    })
}

fn push_property(elements: &mut [Element], offset: usize, name: &str, kind: Kind) -> Result<()> {
    let Some(el) = elements.last_mut() else {
        return Err(parse_error(offset, "property declared before any element"));
    };
    if el.props.iter().any(|p| p.name == name) {
        return Err(parse_error(offset, format!("duplicate property `{name}`")));
    }
    el.props.push(Property {
        name: name.to_string(),
        kind,
        offset: offset as u64,
    });
    Ok(())
}

/// Sequential access to element records, either ascii tokens or
/// little-endian binary values.
trait Reader {
    /// Byte offset of the next value.
    fn offset(&self) -> usize;
    fn scalar(&mut self, s: Scalar) -> Result<f64>;
}

struct BinaryReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader for BinaryReader<'_> {
    fn offset(&self) -> usize {
        self.pos
    }

    fn scalar(&mut self, s: Scalar) -> Result<f64> {
        let n = s.size();
        let Some(b) = self.bytes.get(self.pos..self.pos + n) else {
            return Err(parse_error(self.pos, "payload is truncated"));
        };
        self.pos += n;
        Ok(s.decode_le(b))
    }
}

struct AsciiReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader for AsciiReader<'_> {
    fn offset(&self) -> usize {
        let skip = self.bytes[self.pos..]
            .iter()
            .position(|b| !b.is_ascii_whitespace())
            .unwrap_or(self.bytes.len() - self.pos);
        self.pos + skip
    }

    fn scalar(&mut self, s: Scalar) -> Result<f64> {
        let start = self.offset();
        let len = self.bytes[start..]
            .iter()
            .position(|b| b.is_ascii_whitespace())
            .unwrap_or(self.bytes.len() - start);
        if len == 0 {
            return Err(parse_error(start, "payload is truncated"));
        }
        self.pos = start + len;
        let tok = std::str::from_utf8(&self.bytes[start..start + len])
            .map_err(|_| parse_error(start, "value is not UTF-8"))?;
        let bad = || parse_error(start, format!("`{tok}` is not a valid {s:?} value"));
        if s.is_integer() {
            let v: i64 = tok.parse().map_err(|_| bad())?;
            Ok(v as f64)
        } else {
            tok.parse::<f64>().map_err(|_| bad())
        }
    }
}

/// Scalar property columns of one element, plus each record's start offset.
struct Table {
    columns: Vec<Option<Vec<f64>>>,
    record_offsets: Vec<usize>,
}

fn read_element(r: &mut dyn Reader, el: &Element, keep: bool) -> Result<Table> {
    let mut columns: Vec<Option<Vec<f64>>> = el
        .props
        .iter()
        .map(|p| (keep && matches!(p.kind, Kind::Scalar(_))).then(|| Vec::with_capacity(el.count)))
        .collect();
    let mut record_offsets = Vec::with_capacity(if keep { el.count } else { 0 });
    for _ in 0..el.count {
        if keep {
            record_offsets.push(r.offset());
        }
        for (p, col) in el.props.iter().zip(columns.iter_mut()) {
            match p.kind {
                Kind::Scalar(s) => {
                    let v = r.scalar(s)?;
                    if let Some(c) = col {
                        c.push(v);
                    }
                }
                Kind::List { count, item } => {
                    let at = r.offset();
                    let n = r.scalar(count)?;
                    if n < 0.0 {
                        return Err(parse_error(at, "negative list length"));
                    }
                    for _ in 0..n as usize {
                        r.scalar(item)?;
                    }
                }
            }
        }
    }
    Ok(Table {
        columns,
        record_offsets,
    })
}

/// Parses a PLY document held in memory.
pub fn parse_cloud(bytes: &[u8]) -> Result<CloudFile> {
    let header = parse_header(bytes)?;
    let Some(vi) = header.elements.iter().position(|e| e.name == "vertex") else {
        return Err(parse_error(header.body, "no `vertex` element"));
    };
    let vertex = &header.elements[vi];
    let find = |name: &str| vertex.props.iter().position(|p| p.name == name);
    let header_end = header.body;
    let require_set = |names: &[&str]| -> Result<Option<Vec<usize>>> {
        let found: Vec<Option<usize>> = names.iter().map(|n| find(n)).collect();
        if found.iter().all(Option::is_none) {
            return Ok(None);
        }
        if let Some(missing) = names.iter().zip(&found).find(|(_, f)| f.is_none()).map(|(n, _)| n) {
            let first = found.iter().flatten().next().unwrap();
            return Err(parse_error(
                vertex.props[*first].offset as usize,
                format!("property set {} is incomplete: `{missing}` is missing", names.join("/")),
            ));
        }
        for &i in found.iter().flatten() {
            if !matches!(vertex.props[i].kind, Kind::Scalar(_)) {
                return Err(parse_error(
                    vertex.props[i].offset as usize,
                    format!("`{}` must be a scalar property", vertex.props[i].name),
                ));
            }
        }
        Ok(Some(found.into_iter().flatten().collect()))
    };
    let Some(xyz) = require_set(&["x", "y", "z"])? else {
        return Err(parse_error(header_end, "vertex element lacks x/y/z"));
    };
    let gt = require_set(&GT_PROPS)?;
    let pred = require_set(&PRED_PROPS)?;
    let color = require_set(&COLOR_PROPS)?;

    let mut table = None;
    let mut ascii = AsciiReader {
        bytes,
        pos: header.body,
    };
    let mut binary = BinaryReader {
        bytes,
        pos: header.body,
    };
    let reader: &mut dyn Reader = match header.format {
        PlyFormat::Ascii => &mut ascii,
        PlyFormat::BinaryLittleEndian => &mut binary,
    };
    for (i, el) in header.elements.iter().enumerate() {
        let t = read_element(reader, el, i == vi)?;
        if i == vi {
            table = Some(t);
            // Later elements are irrelevant.
            break;
        }
    }
    let table = table.expect("vertex element read");
    let col = |i: usize| table.columns[i].as_deref().expect("scalar column");
    let n = vertex.count;

    let (x, y, z) = (col(xyz[0]), col(xyz[1]), col(xyz[2]));
    let points: Vec<Point3> = (0..n).map(|i| Vec3::new(x[i], y[i], z[i])).collect();
    for (i, p) in points.iter().enumerate() {
        if !p.is_finite() {
            return Err(parse_error(
                table.record_offsets[i],
                format!("vertex {i} has a non-finite position"),
            ));
        }
    }
    let mut cloud = PointCloud::new(points);

    if let Some(gt) = gt {
        let (r, dx, dy, dz, b) = (col(gt[0]), col(gt[1]), col(gt[2]), col(gt[3]), col(gt[4]));
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let at = table.record_offsets[i];
            if !(b[i] >= 0.0 && b[i] <= u32::MAX as f64 && b[i].fract() == 0.0) {
                return Err(parse_error(at, format!("vertex {i} has invalid branch_id {}", b[i])));
            }
            let label = GroundTruthLabel {
                radius: r[i],
                direction: Vec3::new(dx[i], dy[i], dz[i]),
                branch_id: b[i] as u32,
            };
            label
                .validate()
                .map_err(|e| parse_error(at, format!("vertex {i}: {e}")))?;
            labels.push(label);
        }
        cloud = cloud.with_labels(labels)?;
    }

    if let Some(c) = color {
        let (r, g, b) = (col(c[0]), col(c[1]), col(c[2]));
        let mut colors = Vec::with_capacity(n);
        for i in 0..n {
            let mut rgb = [0u8; 3];
            for (k, ch) in [r[i], g[i], b[i]].into_iter().enumerate() {
                if !(0.0..=255.0).contains(&ch) || ch.fract() != 0.0 {
                    return Err(parse_error(
                        table.record_offsets[i],
                        format!("vertex {i} has colour component {ch} outside 0..=255"),
                    ));
                }
                rgb[k] = ch as u8;
            }
            colors.push(rgb);
        }
        cloud = cloud.with_colors(colors)?;
    }

    let field = match pred {
        None => None,
        Some(p) => {
            let (lr, dx, dy, dz) = (col(p[0]), col(p[1]), col(p[2]), col(p[3]));
            let field = MedialField {
                log_radius: lr.to_vec(),
                direction: (0..n).map(|i| Vec3::new(dx[i], dy[i], dz[i])).collect(),
            };
            for (i, (l, d)) in lr.iter().zip(&field.direction).enumerate() {
                if !l.is_finite() || !((d.norm() - 1.0).abs() <= 1e-6) {
                    return Err(parse_error(
                        table.record_offsets[i],
                        format!("vertex {i} has an invalid predicted field"),
                    ));
                }
            }
            Some(field)
        }
    };
    Ok(CloudFile { cloud, field })
}

/// Serialises a cloud, its labels and colours when present, and `field`.
pub fn encode_cloud(cloud: &PointCloud, field: Option<&MedialField>, format: PlyFormat) -> Result<Vec<u8>> {
    if let Some(f) = field {
        f.validate(cloud.len())?;
    }
    let labels = cloud.labels();
    let colors = cloud.colors();

    let mut header = String::from("ply\n");
    header.push_str(match format {
        PlyFormat::Ascii => "format ascii 1.0\n",
        PlyFormat::BinaryLittleEndian => "format binary_little_endian 1.0\n",
    });
    let _ = writeln!(header, "element vertex {}", cloud.len());
    for p in ["x", "y", "z"] {
        let _ = writeln!(header, "property double {p}");
    }
    if labels.is_some() {
        for p in &GT_PROPS[..4] {
            let _ = writeln!(header, "property double {p}");
        }
        header.push_str("property int branch_id\n");
    }
    if field.is_some() {
        for p in PRED_PROPS {
            let _ = writeln!(header, "property double {p}");
        }
    }
    if colors.is_some() {
        for p in COLOR_PROPS {
            let _ = writeln!(header, "property uchar {p}");
        }
    }
    header.push_str("end_header\n");

    let mut out = header.into_bytes();
    for (i, p) in cloud.points().iter().enumerate() {
        let mut doubles = vec![p.x, p.y, p.z];
        let mut int = None;
        if let Some(l) = labels {
            let l = &l[i];
            doubles.extend([l.radius, l.direction.x, l.direction.y, l.direction.z]);
            int = Some(i32::try_from(l.branch_id).map_err(|_| Error::invalid("branch id exceeds int32"))?);
        }
        let mut trailing = Vec::new();
        if let Some(f) = field {
            let d = f.direction[i];
            trailing.extend([f.log_radius[i], d.x, d.y, d.z]);
        }
        let rgb = colors.map(|c| c[i]);
        match format {
            PlyFormat::BinaryLittleEndian => {
                for v in &doubles {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                if let Some(b) = int {
                    out.extend_from_slice(&b.to_le_bytes());
                }
                for v in &trailing {
                    out.extend_from_slice(&v.to_le_bytes());
                }
                if let Some(c) = rgb {
                    out.extend_from_slice(&c);
                }
            }
            PlyFormat::Ascii => {
                let mut line = String::new();
                let mut sep = "";
                for v in &doubles {
                    let _ = write!(line, "{sep}{v:?}");
                    sep = " ";
                }
                if let Some(b) = int {
                    let _ = write!(line, " {b}");
                }
                for v in &trailing {
                    let _ = write!(line, " {v:?}");
                }
                if let Some(c) = rgb {
                    let _ = write!(line, " {} {} {}", c[0], c[1], c[2]);
                }
                line.push('\n');
                out.extend_from_slice(line.as_bytes());
            }
        }
    }
    Ok(out)
}
