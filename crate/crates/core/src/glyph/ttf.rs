//! TrueType (`glyf`-flavored sfnt) parsing.
//!
//! Only the tables needed to pull outlines and advances are read:
//! `head`, `maxp`, `cmap`, `hhea`, `hmtx`, `loca` and `glyf`. Composite
//! glyphs are resolved into simple contours when an outline is requested.

use thiserror::Error;

use crate::geom::Point;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FontError {
    #[error("not a TrueType font: {0}")]
    NotTrueType(String),
    #[error("CFF-flavored OpenType fonts are not supported")]
    CffOutlines,
    #[error("missing required table `{0}`")]
    MissingTable(&'static str),
    #[error("malformed `{table}` table: {reason}")]
    Malformed { table: &'static str, reason: String },
}

fn malformed(table: &'static str, reason: impl Into<String>) -> FontError {
    FontError::Malformed {
        table,
        reason: reason.into(),
    }
}

/// Big-endian reader over one table.
#[derive(Clone)]
struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
    table: &'static str,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8], table: &'static str) -> Self {
        Reader {
            data,
            pos: 0,
            table,
        }
    }

    fn at(data: &'a [u8], pos: usize, table: &'static str) -> Self {
        Reader { data, pos, table }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FontError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| {
                malformed(
                    self.table,
                    format!("unexpected end of data at offset {}", self.pos),
                )
            })?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn skip(&mut self, n: usize) -> Result<(), FontError> {
        self.take(n).map(|_| ())
    }

    fn u8(&mut self) -> Result<u8, FontError> {
        Ok(self.take(1)?[0])
    }

    fn i8(&mut self) -> Result<i8, FontError> {
        Ok(self.u8()? as i8)
    }

    fn u16(&mut self) -> Result<u16, FontError> {
        let b = self.take(2)?;
        Ok(u16::from_be_bytes([b[0], b[1]]))
    }

    fn i16(&mut self) -> Result<i16, FontError> {
        Ok(self.u16()? as i16)
    }

    fn u32(&mut self) -> Result<u32, FontError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn f2dot14(&mut self) -> Result<f64, FontError> {
        Ok(self.i16()? as f64 / 16384.0)
    }
}

/// Unicode → glyph id mapping from one `cmap` subtable.
#[derive(Clone, Debug)]
enum CharMap {
    Segmented {
        segments: Vec<Segment4>,
        glyph_ids: Vec<u16>,
    },
    Groups(Vec<(u32, u32, u32)>),
}

#[derive(Clone, Copy, Debug)]
struct Segment4 {
    start: u16,
    end: u16,
    delta: i16,
    range_offset: u16,
}

impl CharMap {
    fn parse_format4(mut r: Reader<'_>) -> Result<CharMap, FontError> {
        let _format = r.u16()?;
        let _length = r.u16()?;
        let _language = r.u16()?;
        let seg_count_x2 = r.u16()? as usize;
        if seg_count_x2 & 1 != 0 {
            return Err(malformed("cmap", "odd segCountX2 in format 4"));
        }
        let seg_count = seg_count_x2 / 2;
        r.skip(6)?;
        let mut ends = Vec::with_capacity(seg_count);
        for _ in 0..seg_count {
            ends.push(r.u16()?);
        }
        r.skip(2)?;
        let mut starts = Vec::with_capacity(seg_count);
        for _ in 0..seg_count {
            starts.push(r.u16()?);
        }
        let mut deltas = Vec::with_capacity(seg_count);
        for _ in 0..seg_count {
            deltas.push(r.i16()?);
        }
        let mut range_offsets = Vec::with_capacity(seg_count);
        for _ in 0..seg_count {
            range_offsets.push(r.u16()?);
        }
        // The glyph id array runs to the end of the subtable; we read what
        // remains in the buffer and bounds-check on lookup.
        let mut glyph_ids = Vec::new();
        while let Ok(g) = r.u16() {
            glyph_ids.push(g);
        }
        let segments = (0..seg_count)
            .map(|i| Segment4 {
                start: starts[i],
                end: ends[i],
                delta: deltas[i],
                range_offset: range_offsets[i],
            })
            .collect();
        Ok(CharMap::Segmented {
            segments,
            glyph_ids,
        })
    }

    fn parse_format12(mut r: Reader<'_>) -> Result<CharMap, FontError> {
        let _format = r.u16()?;
        r.skip(2)?;
        let _length = r.u32()?;
        let _language = r.u32()?;
        let n = r.u32()? as usize;
        let mut groups = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let start = r.u32()?;
            let end = r.u32()?;
            let glyph = r.u32()?;
            if end < start {
                return Err(malformed("cmap", "format 12 group with end < start"));
            }
            groups.push((start, end, glyph));
        }
        Ok(CharMap::Groups(groups))
    }

    fn lookup(&self, code: u32) -> Option<u16> {
        match self {
            CharMap::Segmented {
                segments,
                glyph_ids,
            } => {
                if code > 0xFFFF {
                    return None;
                }
                let c = code as u16;
                let seg_count = segments.len();
                let i = segments.iter().position(|s| s.end >= c)?;
                let s = segments[i];
                if s.start > c {
                    return None;
                }
                let gid = if s.range_offset == 0 {
                    c.wrapping_add(s.delta as u16)
                } else {
                    let idx = (i + s.range_offset as usize / 2 + (c - s.start) as usize)
                        .checked_sub(seg_count)?;
                    let g = *glyph_ids.get(idx)?;
                    if g == 0 {
                        return None;
                    }
                    g.wrapping_add(s.delta as u16)
                };
                (gid != 0).then_some(gid)
            }
            CharMap::Groups(groups) => {
                let k = groups.partition_point(|g| g.1 < code);
                let &(start, end, glyph) = groups.get(k)?;
                if code < start || code > end {
                    return None;
                }
                let gid = glyph.checked_add(code - start)?;
                u16::try_from(gid).ok().filter(|&g| g != 0)
            }
        }
    }
}

/// One contour in font units, exactly as stored (implicit on-curve
/// midpoints are not yet inserted).
#[derive(Clone, Debug, PartialEq)]
pub struct RawContour {
    pub points: Vec<Point>,
    pub on_curve: Vec<bool>,
}

/// A resolved glyph outline in font units (y up).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outline {
    pub contours: Vec<RawContour>,
}

impl Outline {
    pub fn point_count(&self) -> usize {
        self.contours.iter().map(|c| c.points.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.contours.is_empty()
    }
}

/// Result of a Unicode lookup. `missing` is set when the font has no
/// mapping and `.notdef` (glyph 0) is returned instead.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GlyphLookup {
    pub glyph_id: u16,
    pub missing: bool,
}

const MAX_COMPONENT_DEPTH: usize = 8;

// simple glyph flags
const ON_CURVE: u8 = 0x01;
const X_SHORT: u8 = 0x02;
const Y_SHORT: u8 = 0x04;
const REPEAT: u8 = 0x08;
const X_SAME_OR_POSITIVE: u8 = 0x10;
const Y_SAME_OR_POSITIVE: u8 = 0x20;

// composite glyph flags
const ARG_1_AND_2_ARE_WORDS: u16 = 0x0001;
const ARGS_ARE_XY_VALUES: u16 = 0x0002;
const WE_HAVE_A_SCALE: u16 = 0x0008;
const MORE_COMPONENTS: u16 = 0x0020;
const WE_HAVE_AN_X_AND_Y_SCALE: u16 = 0x0040;
const WE_HAVE_A_TWO_BY_TWO: u16 = 0x0080;
const SCALED_COMPONENT_OFFSET: u16 = 0x0800;

/// A parsed TrueType font. Immutable after construction; all lookups take
/// `&self`, so a font can be shared across threads.
#[derive(Clone, Debug)]
pub struct Font {
    data: Vec<u8>,
    glyf: (usize, usize),
    loca: Vec<u32>,
    cmap: CharMap,
    advances: Vec<u16>,
    units_per_em: u16,
    num_glyphs: u16,
    family: Option<String>,
}

impl Font {
    pub fn parse(bytes: &[u8]) -> Result<Font, FontError> {
        let data = bytes.to_vec();
        let mut r = Reader::new(&data, "sfnt");
        let version = r
            .u32()
            .map_err(|_| FontError::NotTrueType("file shorter than the sfnt header".into()))?;
        match version {
            0x0001_0000 | 0x7472_7565 => {}
            0x4F54_544F => return Err(FontError::CffOutlines),
            other => {
                return Err(FontError::NotTrueType(format!(
                    "unknown sfnt version 0x{other:08x}"
                )))
            }
        }
        let num_tables = r.u16()? as usize;
        r.skip(6)?;
        let mut tables: Vec<([u8; 4], usize, usize)> = Vec::with_capacity(num_tables);
        for _ in 0..num_tables {
            let tag: [u8; 4] = r.take(4)?.try_into().expect("4 bytes");
            let _checksum = r.u32()?;
            let offset = r.u32()? as usize;
            let length = r.u32()? as usize;
            if offset.checked_add(length).is_none_or(|e| e > data.len()) {
                return Err(malformed(
                    "sfnt",
                    format!(
                        "table `{}` extends past end of file",
                        String::from_utf8_lossy(&tag)
                    ),
                ));
            }
            tables.push((tag, offset, length));
        }
        let find = |name: &'static str| -> Result<(usize, usize), FontError> {
            tables
                .iter()
                .find(|t| t.0 == name.as_bytes())
                .map(|t| (t.1, t.2))
                .ok_or(FontError::MissingTable(name))
        };
        let slice = |(off, len): (usize, usize)| &data[off..off + len];

        let head = slice(find("head")?);
        let mut hr = Reader::at(head, 18, "head");
        let units_per_em = hr.u16()?;
        if !(16..=16384).contains(&units_per_em) {
            return Err(malformed("head", format!("unitsPerEm {units_per_em} out of range")));
        }
        let loc_format = Reader::at(head, 50, "head").i16()?;

        let maxp = slice(find("maxp")?);
        let num_glyphs = Reader::at(maxp, 4, "maxp").u16()?;
        if num_glyphs == 0 {
            return Err(malformed("maxp", "font has no glyphs"));
        }

        let glyf = find("glyf")?;

        let loca_bytes = slice(find("loca")?);
        let mut lr = Reader::new(loca_bytes, "loca");
        let mut loca = Vec::with_capacity(num_glyphs as usize + 1);
        for _ in 0..=num_glyphs {
            let off = match loc_format {
                0 => lr.u16()? as u32 * 2,
                1 => lr.u32()?,
                other => {
                    return Err(malformed("head", format!("indexToLocFormat {other}")));
                }
            };
            loca.push(off);
        }
        if loca.windows(2).any(|w| w[1] < w[0]) {
            return Err(malformed("loca", "offsets are not monotonic"));
        }
        if *loca.last().expect("non-empty") as usize > glyf.1 {
            return Err(malformed("loca", "offset past end of `glyf`"));
        }

        let hhea = slice(find("hhea")?);
        let num_h_metrics = Reader::at(hhea, 34, "hhea").u16()? as usize;
        if num_h_metrics == 0 {
            return Err(malformed("hhea", "numberOfHMetrics is zero"));
        }
        let hmtx = slice(find("hmtx")?);
        let mut mr = Reader::new(hmtx, "hmtx");
        let mut advances = Vec::with_capacity(num_h_metrics);
        for _ in 0..num_h_metrics.min(num_glyphs as usize) {
            advances.push(mr.u16()?);
            mr.skip(2)?;
        }

        let cmap = parse_cmap(slice(find("cmap")?))?;
        let family = find("name").ok().and_then(|t| parse_family(slice(t)));

        Ok(Font {
            glyf,
            loca,
            cmap,
            advances,
            units_per_em,
            num_glyphs,
            family,
            data,
        })
    }

    pub fn units_per_em(&self) -> u16 {
        self.units_per_em
    }

    pub fn num_glyphs(&self) -> u16 {
        self.num_glyphs
    }

    /// Family name from the `name` table, if present and decodable.
    pub fn family_name(&self) -> Option<&str> {
        self.family.as_deref()
    }

    pub fn glyph_id(&self, ch: char) -> Option<u16> {
        self.cmap
            .lookup(ch as u32)
            .filter(|&g| g < self.num_glyphs)
    }

    /// Looks up `ch`, falling back to `.notdef` with a warning.
    pub fn lookup(&self, ch: char) -> GlyphLookup {
        match self.glyph_id(ch) {
            Some(glyph_id) => GlyphLookup {
                glyph_id,
                missing: false,
            },
            None => {
                log::warn!("no glyph for {ch:?} (U+{:04X}); using .notdef", ch as u32);
                GlyphLookup {
                    glyph_id: 0,
                    missing: true,
                }
            }
        }
    }

    pub fn advance(&self, glyph_id: u16) -> u16 {
        let i = (glyph_id as usize).min(self.advances.len() - 1);
        self.advances[i]
    }

    /// The glyph's outline with composites flattened.
    pub fn outline(&self, glyph_id: u16) -> Result<Outline, FontError> {
        let mut out = Outline::default();
        self.append_outline(glyph_id, 0, &mut out)?;
        Ok(out)
    }

    fn glyph_data(&self, glyph_id: u16) -> Result<&[u8], FontError> {
        if glyph_id >= self.num_glyphs {
            return Err(malformed(
                "glyf",
                format!("glyph id {glyph_id} out of range (numGlyphs {})", self.num_glyphs),
            ));
        }
        let start = self.loca[glyph_id as usize] as usize;
        let end = self.loca[glyph_id as usize + 1] as usize;
        let base = self.glyf.0;
        Ok(&self.data[base + start..base + end])
    }

    fn append_outline(&self, glyph_id: u16, depth: usize, out: &mut Outline) -> Result<(), FontError> {
        if depth > MAX_COMPONENT_DEPTH {
            return Err(malformed("glyf", "composite glyph nesting too deep"));
        }
        let data = self.glyph_data(glyph_id)?;
        if data.is_empty() {
            return Ok(());
        }
        let mut r = Reader::new(data, "glyf");
        let num_contours = r.i16()?;
        r.skip(8)?;
        if num_contours >= 0 {
            parse_simple(&mut r, num_contours as usize, out)
        } else {
            self.parse_composite(&mut r, depth, out)
        }
    }

    fn parse_composite(&self, r: &mut Reader<'_>, depth: usize, out: &mut Outline) -> Result<(), FontError> {
        loop {
            let flags = r.u16()?;
            let component = r.u16()?;
            let (arg1, arg2) = if flags & ARG_1_AND_2_ARE_WORDS != 0 {
                if flags & ARGS_ARE_XY_VALUES != 0 {
                    (r.i16()? as i32, r.i16()? as i32)
                } else {
                    (r.u16()? as i32, r.u16()? as i32)
                }
            } else if flags & ARGS_ARE_XY_VALUES != 0 {
                (r.i8()? as i32, r.i8()? as i32)
            } else {
                (r.u8()? as i32, r.u8()? as i32)
            };
            // [xx xy; yx yy] applied as x' = xx*x + yx*y, y' = xy*x + yy*y
            let (mut xx, mut xy, mut yx, mut yy) = (1.0, 0.0, 0.0, 1.0);
            if flags & WE_HAVE_A_SCALE != 0 {
                xx = r.f2dot14()?;
                yy = xx;
            } else if flags & WE_HAVE_AN_X_AND_Y_SCALE != 0 {
                xx = r.f2dot14()?;
                yy = r.f2dot14()?;
            } else if flags & WE_HAVE_A_TWO_BY_TWO != 0 {
                xx = r.f2dot14()?;
                xy = r.f2dot14()?;
                yx = r.f2dot14()?;
                yy = r.f2dot14()?;
            }
            let transform = |p: Point| Point::new(xx * p.x + yx * p.y, xy * p.x + yy * p.y);

            let mut child = Outline::default();
            self.append_outline(component, depth + 1, &mut child)?;
            for c in &mut child.contours {
                for p in &mut c.points {
                    *p = transform(*p);
                }
            }

            let offset = if flags & ARGS_ARE_XY_VALUES != 0 {
                let o = Point::new(arg1 as f64, arg2 as f64);
                if flags & SCALED_COMPONENT_OFFSET != 0 {
                    transform(o)
                } else {
                    o
                }
            } else {
                // point matching: align child point arg2 with parent point arg1
                let parent = nth_point(out, arg1 as usize)
                    .ok_or_else(|| malformed("glyf", "composite anchor point out of range"))?;
                let anchor = nth_point(&child, arg2 as usize)
                    .ok_or_else(|| malformed("glyf", "component anchor point out of range"))?;
                parent - anchor
            };
            for mut c in child.contours {
                for p in &mut c.points {
                    *p += offset;
                }
                out.contours.push(c);
            }
            if flags & MORE_COMPONENTS == 0 {
                return Ok(());
            }
        }
    }
}

fn nth_point(outline: &Outline, mut n: usize) -> Option<Point> {
    for c in &outline.contours {
        if n < c.points.len() {
            return Some(c.points[n]);
        }
        n -= c.points.len();
    }
    None
}

fn parse_simple(r: &mut Reader<'_>, num_contours: usize, out: &mut Outline) -> Result<(), FontError> {
    let mut ends = Vec::with_capacity(num_contours);
    for _ in 0..num_contours {
        ends.push(r.u16()? as usize);
    }
    if ends.windows(2).any(|w| w[1] <= w[0]) {
        return Err(malformed("glyf", "contour end points are not increasing"));
    }
    let Some(&last) = ends.last() else {
        return Ok(());
    };
    let n = last + 1;
    let instruction_len = r.u16()? as usize;
    r.skip(instruction_len)?;

    let mut flags = Vec::with_capacity(n);
    while flags.len() < n {
        let f = r.u8()?;
        flags.push(f);
        if f & REPEAT != 0 {
            let count = r.u8()? as usize;
            if flags.len() + count > n {
                return Err(malformed("glyf", "flag repeat overruns point count"));
            }
            flags.extend(std::iter::repeat_n(f, count));
        }
    }

    let mut xs = Vec::with_capacity(n);
    let mut acc = 0i32;
    for &f in &flags {
        acc += delta(r, f, X_SHORT, X_SAME_OR_POSITIVE)?;
        xs.push(acc);
    }
    let mut ys = Vec::with_capacity(n);
    acc = 0;
    for &f in &flags {
        acc += delta(r, f, Y_SHORT, Y_SAME_OR_POSITIVE)?;
        ys.push(acc);
    }

    let mut start = 0;
    for end in ends {
        let points = (start..=end)
            .map(|k| Point::new(xs[k] as f64, ys[k] as f64))
            .collect();
        let on_curve = (start..=end).map(|k| flags[k] & ON_CURVE != 0).collect();
        out.contours.push(RawContour { points, on_curve });
        start = end + 1;
    }
    Ok(())
}

fn delta(r: &mut Reader<'_>, flag: u8, short: u8, same_or_positive: u8) -> Result<i32, FontError> {
    Ok(if flag & short != 0 {
        let v = r.u8()? as i32;
        if flag & same_or_positive != 0 {
            v
        } else {
            -v
        }
    } else if flag & same_or_positive != 0 {
        0
    } else {
        r.i16()? as i32
    })
}

fn parse_cmap(data: &[u8]) -> Result<CharMap, FontError> {
    let mut r = Reader::new(data, "cmap");
    let _version = r.u16()?;
    let n = r.u16()? as usize;
    // (priority, offset, format); lower priority wins
    let mut best: Option<(u8, usize, u16)> = None;
    for _ in 0..n {
        let platform = r.u16()?;
        let encoding = r.u16()?;
        let offset = r.u32()? as usize;
        let format = Reader::at(data, offset, "cmap").u16()?;
        let priority = match (platform, encoding, format) {
            (3, 10, 12) => 0,
            (0, _, 12) => 1,
            (3, 1, 4) => 2,
            (0, _, 4) => 3,
            _ => continue,
        };
        if best.is_none_or(|b| priority < b.0) {
            best = Some((priority, offset, format));
        }
    }
    let (_, offset, format) =
        best.ok_or_else(|| malformed("cmap", "no Unicode subtable in format 4 or 12"))?;
    let sub = Reader::at(data, offset, "cmap");
    match format {
        4 => CharMap::parse_format4(sub),
        _ => CharMap::parse_format12(sub),
    }
}

fn parse_family(data: &[u8]) -> Option<String> {
    let mut r = Reader::new(data, "name");
    let _format = r.u16().ok()?;
    let count = r.u16().ok()? as usize;
    let storage = r.u16().ok()? as usize;
    for _ in 0..count {
        let platform = r.u16().ok()?;
        let _encoding = r.u16().ok()?;
        let _language = r.u16().ok()?;
        let name_id = r.u16().ok()?;
        let len = r.u16().ok()? as usize;
        let off = r.u16().ok()? as usize;
        if name_id != 1 {
            continue;
        }
        let bytes = data.get(storage + off..storage + off + len)?;
        return Some(match platform {
            0 | 3 => {
                let units: Vec<u16> = bytes
                    .chunks_exact(2)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]))
                    .collect();
                String::from_utf16_lossy(&units)
            }
            _ => bytes.iter().map(|&b| b as char).collect(),
        });
    }
    None
}
