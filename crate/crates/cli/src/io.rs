//! Image file IO: 8-bit grayscale and RGB PNG plus binary PGM (P5).
//!
//! Formats are detected by magic bytes on load and by extension on save.
//! RGB sources collapse to luma with the BT.601 weights; 16-bit inputs are
//! rejected with an explicit diagnostic rather than silently truncated.

use std::fs;
use std::io::BufWriter;
use std::path::Path;

use radaug_core::image::GrayImage;

use crate::error::Error;

/// Loads a PNG or PGM image as 8-bit grayscale.
pub fn load_image(path: &Path) -> Result<GrayImage, Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(&[0x89, b'P', b'N', b'G']) {
        decode_png(&bytes, path)
    } else if bytes.starts_with(b"P5") {
        decode_pgm(&bytes, path)
    } else {
        Err(Error::format(
            path,
            "unrecognized image format (expected PNG or binary PGM)",
        ))
    }
}

/// Saves as PNG or PGM depending on the file extension.
pub fn save_image(img: &GrayImage, path: &Path) -> Result<(), Error> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(|e| e.to_ascii_lowercase());
    match ext.as_deref() {
        Some("png") => encode_png(img, path),
        Some("pgm") => {
            fs::write(path, encode_pgm(img)).map_err(|e| Error::io(path, e))
        }
        _ => Err(Error::format(
            path,
            "unsupported output extension (use .png or .pgm)",
        )),
    }
}

/// BT.601 luma, rounded half away from zero.
fn luma(r: u8, g: u8, b: u8) -> u8 {
    let y = 0.299 * r as f64 + 0.587 * g as f64 + 0.114 * b as f64;
    y.round().min(255.0) as u8
}

fn decode_png(bytes: &[u8], path: &Path) -> Result<GrayImage, Error> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(path, format!("invalid PNG: {e}")))?;
    let info = reader.info();
    let bit_depth = info.bit_depth;
    let color_type = info.color_type;
    let (width, height) = (info.width, info.height);

    if bit_depth != png::BitDepth::Eight {
        return Err(Error::format(
            path,
            format!(
                "unsupported PNG bit depth {bit_depth:?}; only 8-bit images are accepted \
                 (16-bit sources must be converted first)"
            ),
        ));
    }
    if color_type != png::ColorType::Grayscale && color_type != png::ColorType::Rgb {
        return Err(Error::format(
            path,
            format!("unsupported PNG color type {color_type:?}; expected grayscale or RGB"),
        ));
    }

    let buf_len = reader
        .output_buffer_size()
        .ok_or_else(|| Error::format(path, "PNG dimensions overflow"))?;
    let mut buf = vec![0u8; buf_len];
    let frame = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(path, format!("invalid PNG data: {e}")))?;
    let data = &buf[..frame.buffer_size()];

    let pixels = match color_type {
        png::ColorType::Grayscale => data.to_vec(),
        png::ColorType::Rgb => data
            .chunks_exact(3)
            .map(|px| luma(px[0], px[1], px[2]))
            .collect(),
        _ => unreachable!("color type validated above"),
    };
    GrayImage::new(width, height, pixels).map_err(Error::Image)
}

fn encode_png(img: &GrayImage, path: &Path) -> Result<(), Error> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), img.width(), img.height());
    encoder.set_color(png::ColorType::Grayscale);
    encoder.set_depth(png::BitDepth::Eight);
    let mut writer = encoder
        .write_header()
        .map_err(|e| Error::format(path, format!("PNG encoding failed: {e}")))?;
    writer
        .write_image_data(img.pixels())
        .map_err(|e| Error::format(path, format!("PNG encoding failed: {e}")))?;
    writer
        .finish()
        .map_err(|e| Error::format(path, format!("PNG encoding failed: {e}")))
}

/// Binary PGM with maxval 255: `P5\n<w> <h>\n255\n<raw rows>`.
fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

fn decode_pgm(bytes: &[u8], path: &Path) -> Result<GrayImage, Error> {
    let bad = |message: String| Error::format(path, message);
    let mut pos = 2; // past "P5"

    // header tokens may be separated by whitespace and '#' comments
    let next_token = |pos: &mut usize| -> Result<u64, Error> {
        loop {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
            if *pos < bytes.len() && bytes[*pos] == b'#' {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
                continue;
            }
            break;
        }
        let start = *pos;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            *pos += 1;
        }
        if start == *pos {
            return Err(bad("truncated PGM header".into()));
        }
        std::str::from_utf8(&bytes[start..*pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("malformed PGM header value".into()))
    };

    let width = next_token(&mut pos)?;
    let height = next_token(&mut pos)?;
    let maxval = next_token(&mut pos)?;
    if maxval > 255 {
        return Err(Error::format(
            path,
            format!("PGM maxval {maxval} implies 16-bit samples, which are not supported"),
        ));
    }
    if maxval != 255 {
        return Err(Error::format(
            path,
            format!("PGM maxval must be 255, got {maxval}"),
        ));
    }
    if width == 0 || height == 0 || width > u32::MAX as u64 || height > u32::MAX as u64 {
        return Err(Error::format(
            path,
            format!("invalid PGM dimensions {width}x{height}"),
        ));
    }
    // exactly one whitespace byte separates the header from the raster
    if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
        return Err(Error::format(path, "missing PGM raster separator"));
    }
    pos += 1;

    let expected = width as usize * height as usize;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(Error::format(
            path,
            format!(
                "PGM raster truncated: expected {expected} bytes, found {}",
                raster.len()
            ),
        ));
    }
    if raster.len() > expected {
        return Err(Error::format(
            path,
            format!(
                "PGM raster has {} trailing bytes",
                raster.len() - expected
            ),
        ));
    }
    GrayImage::new(width as u32, height as u32, raster.to_vec()).map_err(Error::Image)
}

#[cfg(test)]
mod tests {
    use super::*;
    use radaug_core::image::GrayImage;
    use tempfile::tempdir;

    fn sample() -> GrayImage {
        GrayImage::from_fn(5, 3, |x, y| (x * 50 + y * 17) as u8).unwrap()
    }

    #[test]
    fn png_round_trip_is_lossless() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("img.png");
        let img = sample();
        save_image(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn pgm_round_trip_is_lossless() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("img.pgm");
        let img = sample();
        save_image(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }

    #[test]
    fn pgm_bytes_are_canonical() {
        let img = GrayImage::new(2, 2, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(encode_pgm(&img), b"P5\n2 2\n255\n\x01\x02\x03\x04");
    }

    #[test]
    fn pgm_header_comments_are_skipped() {
        let bytes = b"P5\n# made by hand\n2 1\n# another note\n255\n\x09\x0a";
        let img = decode_pgm(bytes, Path::new("x.pgm")).unwrap();
        assert_eq!(img.pixels(), &[9, 10]);
    }

    #[test]
    fn sixteen_bit_pgm_is_rejected_with_a_clear_message() {
        let bytes = b"P5\n2 1\n65535\n\x00\x00\x00\x00";
        let err = decode_pgm(bytes, Path::new("deep.pgm")).unwrap_err();
        assert!(err.to_string().contains("16-bit"), "{err}");
    }

    #[test]
    fn rgb_png_collapses_to_luma() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("rgb.png");
        let file = fs::File::create(&path).unwrap();
        let mut encoder = png::Encoder::new(BufWriter::new(file), 2, 1);
        encoder.set_color(png::ColorType::Rgb);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder.write_header().unwrap();
        // pure red and pure white
        writer.write_image_data(&[255, 0, 0, 255, 255, 255]).unwrap();
        writer.finish().unwrap();

        let img = load_image(&path).unwrap();
        // 0.299 * 255 = 76.245 rounds to 76
        assert_eq!(img.pixels(), &[76, 255]);
    }

    #[test]
    fn sixteen_bit_png_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("deep.png");
        let file = fs::File::create(&path).unwrap();
        let mut encoder = png::Encoder::new(BufWriter::new(file), 1, 1);
        encoder.set_color(png::ColorType::Grayscale);
        encoder.set_depth(png::BitDepth::Sixteen);
        let mut writer = encoder.write_header().unwrap();
        writer.write_image_data(&[0x12, 0x34]).unwrap();
        writer.finish().unwrap();

        let err = load_image(&path).unwrap_err();
        assert!(err.to_string().contains("bit depth"), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_magic_is_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("junk.img");
        fs::write(&path, b"BM not really an image").unwrap();
        let err = load_image(&path).unwrap_err();
        assert!(err.to_string().contains("unrecognized"), "{err}");
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let err = load_image(Path::new("/nonexistent/img.png")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn truncated_pgm_is_rejected() {
        let bytes = b"P5\n4 4\n255\nonly-a-few";
        let err = decode_pgm(bytes, Path::new("short.pgm")).unwrap_err();
        assert!(err.to_string().contains("truncated"), "{err}");
    }
}
