//! Grayscale raster containers and PGM/PNG codecs.
//!
//! Weight maps and elevation maps both travel as single-channel rasters of
//! 8- or 16-bit unsigned samples. Values are kept exactly as stored on disk;
//! interpretation (weights, meters) happens in [`crate::grid_model`].
//!
//! Path overlays are rendered into RGB images using the figure palette in
//! [`palette`].

use std::fmt;
use std::fs;
use std::io::Cursor;
use std::path::{Path as FsPath, PathBuf};

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma, Rgb, RgbImage};
use thiserror::Error;

use crate::grid_model::CellCoord;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported raster format: {0}")]
    Format(String),
    #[error("raster invariant violated: {0}")]
    Invariant(String),
    #[error("path cell ({x}, {y}) lies outside the {width}x{height} raster")]
    OutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },
}

impl RasterError {
    fn io(path: &FsPath, source: std::io::Error) -> Self {
        RasterError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Sample depth of a grayscale raster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn bits(self) -> u8 {
        match self {
            BitDepth::Eight => 8,
            BitDepth::Sixteen => 16,
        }
    }

    pub fn max_value(self) -> u16 {
        match self {
            BitDepth::Eight => u8::MAX as u16,
            BitDepth::Sixteen => u16::MAX,
        }
    }

    /// Smallest depth able to hold `maxval`.
    pub fn for_maxval(maxval: u16) -> Self {
        if maxval <= u8::MAX as u16 {
            BitDepth::Eight
        } else {
            BitDepth::Sixteen
        }
    }
}

impl fmt::Display for BitDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-bit", self.bits())
    }
}

/// Single-channel raster with row-major samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterGrid {
    width: usize,
    height: usize,
    bit_depth: BitDepth,
    values: Vec<u16>,
}

impl RasterGrid {
    pub fn new(
        width: usize,
        height: usize,
        bit_depth: BitDepth,
        values: Vec<u16>,
    ) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::Invariant(format!(
                "dimensions must be at least 1x1, got {width}x{height}"
            )));
        }
        let expected = width.checked_mul(height).ok_or_else(|| {
            RasterError::Invariant(format!("dimensions {width}x{height} overflow"))
        })?;
        if values.len() != expected {
            return Err(RasterError::Invariant(format!(
                "expected {expected} samples for {width}x{height}, got {}",
                values.len()
            )));
        }
        let max = bit_depth.max_value();
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| **v > max) {
            return Err(RasterError::Invariant(format!(
                "sample {v} at ({}, {}) exceeds the {bit_depth} maximum {max}",
                i % width,
                i / width
            )));
        }
        Ok(RasterGrid {
            width,
            height,
            bit_depth,
            values,
        })
    }

    /// A raster with every sample set to `value`.
    pub fn filled(
        width: usize,
        height: usize,
        bit_depth: BitDepth,
        value: u16,
    ) -> Result<Self, RasterError> {
        Self::new(width, height, bit_depth, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bit_depth(&self) -> BitDepth {
        self.bit_depth
    }

    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> Option<u16> {
        (x < self.width && y < self.height).then(|| self.values[y * self.width + x])
    }

    /// Linear min-max stretch to the full 8-bit range, for display.
    pub fn contrast_stretched(&self) -> RasterGrid {
        let lo = *self.values.iter().min().expect("non-empty raster");
        let hi = *self.values.iter().max().expect("non-empty raster");
        let values = if hi == lo {
            vec![0; self.values.len()]
        } else {
            let span = (hi - lo) as f64;
            self.values
                .iter()
                .map(|&v| (((v - lo) as f64 / span) * 255.0).round() as u16)
                .collect()
        };
        RasterGrid {
            width: self.width,
            height: self.height,
            bit_depth: BitDepth::Eight,
            values,
        }
    }
}

/// On-disk encodings accepted by [`save_grayscale_raster`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RasterFormat {
    /// ASCII PGM (`P2`).
    Pgm,
    /// Binary PGM (`P5`).
    PgmBinary,
    Png,
}

impl RasterFormat {
    /// Guess from a file extension; anything but `.png` is written as ASCII PGM.
    pub fn from_path(path: &FsPath) -> Self {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("png") => RasterFormat::Png,
            _ => RasterFormat::Pgm,
        }
    }
}

const PNG_SIGNATURE: [u8; 8] = [0x89, b'P', b'N', b'G', b'\r', b'\n', 0x1a, b'\n'];

pub fn load_grayscale_raster(path: impl AsRef<FsPath>) -> Result<RasterGrid, RasterError> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| RasterError::io(path, e))?;
    decode_grayscale(&bytes)
}

/// Decode PGM (`P2`/`P5`) or single-channel PNG from memory, sniffing the magic bytes.
pub fn decode_grayscale(bytes: &[u8]) -> Result<RasterGrid, RasterError> {
    if bytes.starts_with(&PNG_SIGNATURE) {
        decode_png(bytes)
    } else if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        decode_pgm(bytes)
    } else if bytes.len() >= 2 && bytes[0] == b'P' && bytes[1].is_ascii_digit() {
        Err(RasterError::Format(format!(
            "Netpbm variant P{} is not a grayscale map (expected P2 or P5)",
            bytes[1] as char
        )))
    } else {
        Err(RasterError::Format(
            "unrecognized file signature (expected PGM or PNG)".into(),
        ))
    }
}

fn decode_png(bytes: &[u8]) -> Result<RasterGrid, RasterError> {
    let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)
        .map_err(|e| RasterError::Format(format!("PNG decode failed: {e}")))?;
    let (width, height) = (img.width() as usize, img.height() as usize);
    match img {
        DynamicImage::ImageLuma8(buf) => RasterGrid::new(
            width,
            height,
            BitDepth::Eight,
            buf.into_raw().into_iter().map(u16::from).collect(),
        ),
        DynamicImage::ImageLuma16(buf) => {
            RasterGrid::new(width, height, BitDepth::Sixteen, buf.into_raw())
        }
        other => Err(RasterError::Format(format!(
            "PNG color type {:?} has {} channels; expected single-channel grayscale",
            other.color(),
            other.color().channel_count()
        ))),
    }
}

/// Whitespace/comment aware tokenizer over a Netpbm header.
struct PgmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PgmHeader<'a> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<u32, RasterError> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(RasterError::Format(format!("PGM: missing or malformed {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| RasterError::Format(format!("PGM: {what} out of range")))
    }
}

pub fn decode_pgm(bytes: &[u8]) -> Result<RasterGrid, RasterError> {
    let binary = match bytes.get(..2) {
        Some(b"P2") => false,
        Some(b"P5") => true,
        _ => return Err(RasterError::Format("PGM: magic must be P2 or P5".into())),
    };
    let mut hdr = PgmHeader { bytes, pos: 2 };
    let width = hdr.number("width")? as usize;
    let height = hdr.number("height")? as usize;
    let maxval = hdr.number("maxval")?;
    if maxval == 0 || maxval > u16::MAX as u32 {
        return Err(RasterError::Format(format!(
            "PGM: maxval {maxval} unsupported (must be 1..=65535)"
        )));
    }
    let maxval = maxval as u16;
    let depth = BitDepth::for_maxval(maxval);
    let count = width
        .checked_mul(height)
        .ok_or_else(|| RasterError::Format("PGM: dimensions overflow".into()))?;

    let values = if binary {
        // exactly one whitespace byte separates maxval from the raster
        let data_start = hdr.pos + 1;
        let sample_bytes = if depth == BitDepth::Eight { 1 } else { 2 };
        let data = bytes
            .get(data_start..data_start + count * sample_bytes)
            .ok_or_else(|| RasterError::Format("PGM: truncated binary raster".into()))?;
        if sample_bytes == 1 {
            data.iter().map(|&b| b as u16).collect::<Vec<_>>()
        } else {
            data.chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        }
    } else {
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            let v = hdr.number("sample")?;
            if v > maxval as u32 {
                return Err(RasterError::Format(format!(
                    "PGM: sample {v} exceeds maxval {maxval}"
                )));
            }
            values.push(v as u16);
        }
        values
    };
    if let Some(v) = values.iter().find(|&&v| v > maxval) {
        return Err(RasterError::Format(format!(
            "PGM: sample {v} exceeds maxval {maxval}"
        )));
    }
    RasterGrid::new(width, height, depth, values)
}

/// ASCII PGM with the depth's full-range maxval; samples are packed into
/// lines of at most 70 characters.
pub fn encode_pgm_ascii(grid: &RasterGrid) -> Vec<u8> {
    let mut out = format!(
        "P2\n{} {}\n{}\n",
        grid.width,
        grid.height,
        grid.bit_depth.max_value()
    );
    let mut line_len = 0;
    for v in &grid.values {
        let token = v.to_string();
        if line_len > 0 && line_len + 1 + token.len() > 70 {
            out.push('\n');
            line_len = 0;
        }
        if line_len > 0 {
            out.push(' ');
            line_len += 1;
        }
        out.push_str(&token);
        line_len += token.len();
    }
    out.push('\n');
    out.into_bytes()
}

pub fn encode_pgm_binary(grid: &RasterGrid) -> Vec<u8> {
    let mut out = format!(
        "P5\n{} {}\n{}\n",
        grid.width,
        grid.height,
        grid.bit_depth.max_value()
    )
    .into_bytes();
    match grid.bit_depth {
        BitDepth::Eight => out.extend(grid.values.iter().map(|&v| v as u8)),
        BitDepth::Sixteen => {
            for v in &grid.values {
                out.extend_from_slice(&v.to_be_bytes());
            }
        }
    }
    out
}

pub fn encode_png(grid: &RasterGrid) -> Result<Vec<u8>, RasterError> {
    let (w, h) = (grid.width as u32, grid.height as u32);
    let img = match grid.bit_depth {
        BitDepth::Eight => DynamicImage::ImageLuma8(
            ImageBuffer::<Luma<u8>, _>::from_raw(
                w,
                h,
                grid.values.iter().map(|&v| v as u8).collect(),
            )
            .expect("buffer sized from grid"),
        ),
        BitDepth::Sixteen => DynamicImage::ImageLuma16(
            ImageBuffer::<Luma<u16>, _>::from_raw(w, h, grid.values.clone())
                .expect("buffer sized from grid"),
        ),
    };
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)
        .map_err(|e| RasterError::Format(format!("PNG encode failed: {e}")))?;
    Ok(buf.into_inner())
}

pub fn save_grayscale_raster(
    grid: &RasterGrid,
    path: impl AsRef<FsPath>,
    format: RasterFormat,
) -> Result<(), RasterError> {
    let path = path.as_ref();
    let bytes = match format {
        RasterFormat::Pgm => encode_pgm_ascii(grid),
        RasterFormat::PgmBinary => encode_pgm_binary(grid),
        RasterFormat::Png => encode_png(grid)?,
    };
    fs::write(path, bytes).map_err(|e| RasterError::io(path, e))
}

/// Overlay colors for each planner family.
pub mod palette {
    use image::Rgb;

    pub const ASTAR: Rgb<u8> = Rgb([0, 0, 255]);
    pub const DIJKSTRA: Rgb<u8> = Rgb([255, 215, 0]);
    pub const RRT: Rgb<u8> = Rgb([255, 0, 0]);
    pub const NIACO: Rgb<u8> = Rgb([135, 206, 250]);

    /// Default color for a planner id as used on the command line.
    pub fn for_planner(id: &str) -> Option<Rgb<u8>> {
        match id {
            "astar" | "astar3d" => Some(ASTAR),
            "dijkstra" | "dijkstra3d" => Some(DIJKSTRA),
            "rrtstar" | "rrtconnect" => Some(RRT),
            "niaco" | "niaco3d" => Some(NIACO),
            _ => None,
        }
    }
}

/// One path drawn over the base raster.
#[derive(Debug, Clone, Copy)]
pub struct OverlayLayer<'a> {
    pub cells: &'a [CellCoord],
    pub color: Rgb<u8>,
}

/// Replicate the grayscale base into RGB and paint each layer in order.
///
/// 16-bit bases are reduced to their high byte. Later layers overdraw
/// earlier ones, so layer `i` of `n` is widened by `n - 1 - i` pixels on
/// each side: coinciding paths show up as nested bands.
pub fn render_overlay(
    base: &RasterGrid,
    layers: &[OverlayLayer<'_>],
) -> Result<RgbImage, RasterError> {
    for layer in layers {
        if let Some(c) = layer
            .cells
            .iter()
            .find(|c| c.x >= base.width || c.y >= base.height)
        {
            return Err(RasterError::OutOfBounds {
                x: c.x,
                y: c.y,
                width: base.width,
                height: base.height,
            });
        }
    }
    let shift = match base.bit_depth {
        BitDepth::Eight => 0,
        BitDepth::Sixteen => 8,
    };
    let mut img = RgbImage::from_fn(base.width as u32, base.height as u32, |x, y| {
        let v = (base.values[y as usize * base.width + x as usize] >> shift) as u8;
        Rgb([v, v, v])
    });
    let (w, h) = (base.width as isize, base.height as isize);
    for (i, layer) in layers.iter().enumerate() {
        let r = (layers.len() - 1 - i) as isize;
        for c in layer.cells {
            for dy in -r..=r {
                for dx in -r..=r {
                    let (x, y) = (c.x as isize + dx, c.y as isize + dy);
                    if (0..w).contains(&x) && (0..h).contains(&y) {
                        img.put_pixel(x as u32, y as u32, layer.color);
                    }
                }
            }
        }
    }
    Ok(img)
}

pub fn encode_rgb_png(img: &RgbImage) -> Result<Vec<u8>, RasterError> {
    let mut buf = Cursor::new(Vec::new());
    img.write_to(&mut buf, ImageFormat::Png)
        .map_err(|e| RasterError::Format(format!("PNG encode failed: {e}")))?;
    Ok(buf.into_inner())
}

pub fn save_rgb_png(img: &RgbImage, path: impl AsRef<FsPath>) -> Result<(), RasterError> {
    let path = path.as_ref();
    let bytes = encode_rgb_png(img)?;
    fs::write(path, bytes).map_err(|e| RasterError::io(path, e))
}
