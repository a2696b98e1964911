use super::FeatureError;

/// Row-major 8-bit grayscale image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self, FeatureError> {
        if width == 0 || height == 0 {
            return Err(FeatureError::InvalidImage(format!("dimensions must be positive, got {width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(FeatureError::InvalidImage(format!("{} pixels for a {width}x{height} image", pixels.len())));
        }
        Ok(Image { width, height, pixels })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }
}

struct HeaderReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> HeaderReader<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn read_uint(&mut self, field: &'static str) -> Result<u32, FeatureError> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            let reason = match self.bytes.get(self.pos) {
                None => "missing".to_string(),
                Some(b) => format!("unexpected byte 0x{b:02x}"),
            };
            return Err(FeatureError::BadHeader { field, reason });
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        text.parse().map_err(|_| FeatureError::BadHeader { field, reason: format!("value {text} out of range") })
    }
}

/// Decodes a binary (`P5`) PGM stream with `maxval <= 255`.
pub fn load_pgm(bytes: &[u8]) -> Result<Image, FeatureError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(FeatureError::BadMagic);
    }
    let mut r = HeaderReader { bytes, pos: 2 };
    if !r.bytes.get(r.pos).is_some_and(|b| b.is_ascii_whitespace() || *b == b'#') {
        return Err(FeatureError::BadMagic);
    }
    let width = r.read_uint("width")?;
    let height = r.read_uint("height")?;
    let maxval = r.read_uint("maxval")?;
    if width == 0 {
        return Err(FeatureError::BadHeader { field: "width", reason: "zero".into() });
    }
    if height == 0 {
        return Err(FeatureError::BadHeader { field: "height", reason: "zero".into() });
    }
    if maxval == 0 {
        return Err(FeatureError::BadHeader { field: "maxval", reason: "zero".into() });
    }
    if maxval > 255 {
        return Err(FeatureError::MaxvalTooLarge(maxval));
    }
    // exactly one whitespace byte separates the header from the raster
    match r.bytes.get(r.pos) {
        Some(b) if b.is_ascii_whitespace() => r.pos += 1,
        Some(b) => {
            return Err(FeatureError::BadHeader {
                field: "maxval",
                reason: format!("unexpected byte 0x{b:02x} after value"),
            })
        }
        None => {
            return Err(FeatureError::BadHeader { field: "maxval", reason: "missing separator before raster".into() })
        }
    }
    let (width, height) = (width as usize, height as usize);
    let expected = width * height;
    let raster = &bytes[r.pos..];
    if raster.len() < expected {
        return Err(FeatureError::TruncatedRaster { expected, found: raster.len() });
    }
    Image::new(width, height, raster[..expected].to_vec())
}
