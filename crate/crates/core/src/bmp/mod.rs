//! Uncompressed 24-bit BMP (`BITMAPINFOHEADER`) codec.
//!
//! Only the subset used by the carving pipeline is supported: `BI_RGB`
//! compression, 24 bits per pixel, a 40-byte info header. Pixels are held in
//! visual top-down order regardless of how the file stores its rows, and
//! encoding always emits canonical bottom-up files with a 54-byte header.

mod error;

pub use error::BmpError;

/// Size of the file header plus `BITMAPINFOHEADER`.
pub const HEADER_LEN: usize = 54;
const INFO_HEADER_LEN: u32 = 40;
const MAGIC: &[u8; 2] = b"BM";

/// How rows are stored in the source file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOrder {
    BottomUp,
    TopDown,
}

/// Header fields that carry no pixel meaning but are kept so canonical files
/// re-encode byte-for-byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BmpMeta {
    pub reserved: u32,
    pub image_size_field: u32,
    pub x_pixels_per_meter: i32,
    pub y_pixels_per_meter: i32,
    pub colors_used: u32,
    pub colors_important: u32,
}

impl BmpMeta {
    /// The values most encoders write (72 DPI, explicit image size).
    pub fn standard(width: usize, height: usize) -> BmpMeta {
        BmpMeta {
            reserved: 0,
            image_size_field: (row_stride(width) * height) as u32,
            x_pixels_per_meter: 2835,
            y_pixels_per_meter: 2835,
            colors_used: 0,
            colors_important: 0,
        }
    }
}

/// A decoded 24-bit image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BmpImage {
    width: usize,
    height: usize,
    row_order: RowOrder,
    /// `(blue, green, red)` triples, row-major, visual top-down.
    pixels: Vec<[u8; 3]>,
    pixel_data_offset: usize,
    file_size: usize,
    meta: BmpMeta,
}

/// Padded row length in bytes for a 24-bit row of `width` pixels.
pub fn row_stride(width: usize) -> usize {
    (3 * width).div_ceil(4) * 4
}

/// Total size of a canonical encoding of a `width` x `height` image.
pub fn encoded_len(width: usize, height: usize) -> usize {
    HEADER_LEN + row_stride(width) * height
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

fn i32_at(b: &[u8], at: usize) -> i32 {
    u32_at(b, at) as i32
}

impl BmpImage {
    /// Builds an image from visual top-down BGR pixels with standard metadata.
    pub fn from_bgr(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<BmpImage, BmpError> {
        if width == 0 || height == 0 {
            return Err(BmpError::MalformedHeader("zero dimension".into()));
        }
        if pixels.len() != width * height {
            return Err(BmpError::PixelCount {
                expected: width * height,
                actual: pixels.len(),
            });
        }
        Ok(BmpImage {
            width,
            height,
            row_order: RowOrder::BottomUp,
            pixels,
            pixel_data_offset: HEADER_LEN,
            file_size: encoded_len(width, height),
            meta: BmpMeta::standard(width, height),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn row_order(&self) -> RowOrder {
        self.row_order
    }

    pub fn pixel_data_offset(&self) -> usize {
        self.pixel_data_offset
    }

    pub fn file_size(&self) -> usize {
        self.file_size
    }

    pub fn meta(&self) -> &BmpMeta {
        &self.meta
    }

    /// Pixels in visual top-down, row-major order as `(b, g, r)`.
    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, row: usize, col: usize) -> [u8; 3] {
        self.pixels[row * self.width + col]
    }

    /// Checks the image against a fixed profile, e.g. 32x32 / 3126 bytes.
    pub fn check_profile(&self, width: usize, height: usize, file_size: usize) -> Result<(), BmpError> {
        if self.width != width || self.height != height || self.file_size != file_size {
            return Err(BmpError::ProfileMismatch {
                expected: (width, height, file_size),
                actual: (self.width, self.height, self.file_size),
            });
        }
        Ok(())
    }
}

/// Parses a 24-bit uncompressed BMP.
pub fn parse_bmp(bytes: &[u8]) -> Result<BmpImage, BmpError> {
    if bytes.len() < 2 || &bytes[..2] != MAGIC {
        return Err(BmpError::MalformedHeader("missing BM magic".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(BmpError::Truncated {
            needed: HEADER_LEN,
            actual: bytes.len(),
        });
    }
    let declared_size = u32_at(bytes, 2) as usize;
    let reserved = u32_at(bytes, 6);
    let offset = u32_at(bytes, 10) as usize;
    let info_len = u32_at(bytes, 14);
    if info_len != INFO_HEADER_LEN {
        return Err(BmpError::UnsupportedVariant(format!(
            "info header of {info_len} bytes"
        )));
    }
    let raw_width = i32_at(bytes, 18);
    let raw_height = i32_at(bytes, 22);
    let planes = u16_at(bytes, 26);
    let bpp = u16_at(bytes, 28);
    let compression = u32_at(bytes, 30);
    if planes != 1 {
        return Err(BmpError::MalformedHeader(format!("{planes} color planes")));
    }
    if bpp != 24 {
        return Err(BmpError::UnsupportedVariant(format!("{bpp} bits per pixel")));
    }
    if compression != 0 {
        return Err(BmpError::UnsupportedVariant(format!("compression {compression}")));
    }
    if raw_width <= 0 {
        return Err(BmpError::MalformedHeader(format!("width {raw_width}")));
    }
    if raw_height == 0 || raw_height == i32::MIN {
        return Err(BmpError::MalformedHeader(format!("height {raw_height}")));
    }
    if offset < HEADER_LEN {
        return Err(BmpError::MalformedHeader(format!(
            "pixel offset {offset} inside header"
        )));
    }
    let width = raw_width as usize;
    let (height, row_order) = if raw_height < 0 {
        (raw_height.unsigned_abs() as usize, RowOrder::TopDown)
    } else {
        (raw_height as usize, RowOrder::BottomUp)
    };
    let stride = row_stride(width);
    let needed = stride
        .checked_mul(height)
        .and_then(|n| n.checked_add(offset))
        .ok_or_else(|| BmpError::MalformedHeader("dimensions overflow".into()))?;
    if declared_size > bytes.len() || needed > bytes.len() {
        return Err(BmpError::Truncated {
            needed: needed.max(declared_size),
            actual: bytes.len(),
        });
    }

    let mut pixels = Vec::with_capacity(width * height);
    for visual_row in 0..height {
        let stored_row = match row_order {
            RowOrder::BottomUp => height - 1 - visual_row,
            RowOrder::TopDown => visual_row,
        };
        let start = offset + stored_row * stride;
        pixels.extend(
            bytes[start..start + 3 * width]
                .chunks_exact(3)
                .map(|p| [p[0], p[1], p[2]]),
        );
    }

    Ok(BmpImage {
        width,
        height,
        row_order,
        pixels,
        pixel_data_offset: offset,
        file_size: bytes.len(),
        meta: BmpMeta {
            reserved,
            image_size_field: u32_at(bytes, 34),
            x_pixels_per_meter: i32_at(bytes, 38),
            y_pixels_per_meter: i32_at(bytes, 42),
            colors_used: u32_at(bytes, 46),
            colors_important: u32_at(bytes, 50),
        },
    })
}

/// Emits a canonical bottom-up file: 54-byte header followed by zero-padded rows.
pub fn encode_bmp(img: &BmpImage) -> Vec<u8> {
    let stride = row_stride(img.width);
    let total = encoded_len(img.width, img.height);
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(total as u32).to_le_bytes());
    out.extend_from_slice(&img.meta.reserved.to_le_bytes());
    out.extend_from_slice(&(HEADER_LEN as u32).to_le_bytes());
    out.extend_from_slice(&INFO_HEADER_LEN.to_le_bytes());
    out.extend_from_slice(&(img.width as i32).to_le_bytes());
    out.extend_from_slice(&(img.height as i32).to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&24u16.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend_from_slice(&img.meta.image_size_field.to_le_bytes());
    out.extend_from_slice(&img.meta.x_pixels_per_meter.to_le_bytes());
    out.extend_from_slice(&img.meta.y_pixels_per_meter.to_le_bytes());
    out.extend_from_slice(&img.meta.colors_used.to_le_bytes());
    out.extend_from_slice(&img.meta.colors_important.to_le_bytes());
    debug_assert_eq!(out.len(), HEADER_LEN);

    let pad = stride - 3 * img.width;
    for row in img.pixels.chunks_exact(img.width).rev() {
        for px in row {
            out.extend_from_slice(px);
        }
        out.extend(std::iter::repeat_n(0u8, pad));
    }
    debug_assert_eq!(out.len(), total);
    out
}

/// 8-bit luminance image, row-major top-down.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    values: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, values: Vec<u8>) -> Result<GrayImage, BmpError> {
        if values.len() != width * height {
            return Err(BmpError::PixelCount {
                expected: width * height,
                actual: values.len(),
            });
        }
        Ok(GrayImage {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.values[row * self.width + col]
    }
}

/// BT.601 luma for one `(b, g, r)` pixel, rounded half away from zero.
pub fn luma([b, g, r]: [u8; 3]) -> u8 {
    // Fixed-point weights scaled by 1000 keep rounding exact.
    let scaled = 299 * r as u32 + 587 * g as u32 + 114 * b as u32;
    ((scaled + 500) / 1000).min(255) as u8
}

pub fn to_grayscale(img: &BmpImage) -> GrayImage {
    GrayImage {
        width: img.width,
        height: img.height,
        values: img.pixels.iter().copied().map(luma).collect(),
    }
}

/// Color channel of a pixel byte, in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Blue,
    Green,
    Red,
}

/// Visual position of one pixel byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PixelByte {
    pub row: usize,
    pub col: usize,
    pub channel: Channel,
}

/// Maps a file offset to the pixel byte it stores, or `None` for header,
/// gap and row-padding bytes.
pub fn byte_offset_to_pixel(img: &BmpImage, offset: usize) -> Result<Option<PixelByte>, BmpError> {
    if offset >= img.file_size {
        return Err(BmpError::OffsetOutOfRange {
            offset,
            file_size: img.file_size,
        });
    }
    let Some(rel) = offset.checked_sub(img.pixel_data_offset) else {
        return Ok(None);
    };
    let stride = row_stride(img.width);
    let stored_row = rel / stride;
    let within = rel % stride;
    if stored_row >= img.height || within >= 3 * img.width {
        return Ok(None);
    }
    let row = match img.row_order {
        RowOrder::BottomUp => img.height - 1 - stored_row,
        RowOrder::TopDown => stored_row,
    };
    let channel = match within % 3 {
        0 => Channel::Blue,
        1 => Channel::Green,
        _ => Channel::Red,
    };
    Ok(Some(PixelByte {
        row,
        col: within / 3,
        channel,
    }))
}

/// Nearest-neighbor resample to `width` x `height`.
pub fn resize_nearest(img: &BmpImage, width: usize, height: usize) -> BmpImage {
    let mut pixels = Vec::with_capacity(width * height);
    for r in 0..height {
        let src_r = r * img.height / height;
        for c in 0..width {
            let src_c = c * img.width / width;
            pixels.push(img.pixel(src_r, src_c));
        }
    }
    BmpImage::from_bgr(width, height, pixels).expect("nonzero target dimensions")
}
