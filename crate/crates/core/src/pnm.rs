//! Binary Netpbm images: PPM (`P6`) and PGM (`P5`), maxval 255.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::image::Image;

fn read_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut token = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            break;
        }
        let b = byte[0];
        if b == b'#' && token.is_empty() {
            let mut line = Vec::new();
            r.read_until(b'\n', &mut line)?;
            continue;
        }
        if b.is_ascii_whitespace() {
            if token.is_empty() {
                continue;
            }
            break;
        }
        token.push(b);
    }
    if token.is_empty() {
        return Err(Error::Format("truncated header".into()));
    }
    String::from_utf8(token).map_err(|_| Error::Format("non-ASCII header".into()))
}

fn read_dim<R: BufRead>(r: &mut R, what: &str) -> Result<usize> {
    read_token(r)?
        .parse()
        .map_err(|_| Error::Format(format!("bad {what}")))
}

/// Reads magic, width, height and maxval; consumes the single whitespace
/// byte that separates the header from the raster.
fn read_header<R: BufRead>(r: &mut R, magic: &str) -> Result<(usize, usize)> {
    let m = read_token(r)?;
    if m != magic {
        return Err(Error::Format(format!("expected {magic}, found {m}")));
    }
    let width = read_dim(r, "width")?;
    let height = read_dim(r, "height")?;
    let maxval = read_dim(r, "maxval")?;
    if maxval != 255 {
        return Err(Error::Format(format!("unsupported maxval {maxval}")));
    }
    Ok((width, height))
}

pub fn read_ppm<R: BufRead>(mut r: R) -> Result<Image> {
    let (width, height) = read_header(&mut r, "P6")?;
    let mut raster = vec![0u8; width * height * 3];
    r.read_exact(&mut raster)
        .map_err(|_| Error::Format("truncated raster".into()))?;
    let pixels = raster.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    Image::new(width, height, pixels)
}

pub fn write_ppm<W: Write>(mut w: W, img: &Image) -> Result<()> {
    write!(w, "P6\n{} {}\n255\n", img.width(), img.height())?;
    let raster: Vec<u8> = img.pixels().iter().flatten().copied().collect();
    w.write_all(&raster)?;
    Ok(())
}

pub fn read_pgm<R: BufRead>(mut r: R) -> Result<(usize, usize, Vec<u8>)> {
    let (width, height) = read_header(&mut r, "P5")?;
    let mut raster = vec![0u8; width * height];
    r.read_exact(&mut raster)
        .map_err(|_| Error::Format("truncated raster".into()))?;
    Ok((width, height, raster))
}

pub fn write_pgm<W: Write>(mut w: W, width: usize, height: usize, gray: &[u8]) -> Result<()> {
    if gray.len() != width * height {
        return Err(Error::LengthMismatch {
            left: width * height,
            right: gray.len(),
        });
    }
    write!(w, "P5\n{width} {height}\n255\n")?;
    w.write_all(gray)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ppm_round_trip_with_comment() {
        let img = Image::new(2, 1, vec![[1, 2, 3], [250, 251, 252]]).unwrap();
        let mut buf = Vec::new();
        write_ppm(&mut buf, &img).unwrap();
        assert!(buf.starts_with(b"P6\n2 1\n255\n"));
        let back = read_ppm(&buf[..]).unwrap();
        assert_eq!(back, img);

        let mut commented = b"P6\n# made by hand\n2 1\n255\n".to_vec();
        commented.extend_from_slice(&[1, 2, 3, 250, 251, 252]);
        assert_eq!(read_ppm(&commented[..]).unwrap(), img);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_ppm(&b"P3\n1 1\n255\n0 0 0"[..]).is_err());
        assert!(read_ppm(&b"P6\n2 2\n255\n\x00\x00"[..]).is_err());
        assert!(read_ppm(&b"P6\n1 1\n65535\n\x00\x00\x00"[..]).is_err());
    }

    #[test]
    fn pgm_round_trip() {
        let mut buf = Vec::new();
        write_pgm(&mut buf, 3, 1, &[0, 128, 255]).unwrap();
        assert_eq!(read_pgm(&buf[..]).unwrap(), (3, 1, vec![0, 128, 255]));
    }
}
