//! PNG codec for palette-indexed masks. The palette index of a pixel is its
//! object id; palette colors are cosmetic.

use std::io::Cursor;

use thiserror::Error;

use crate::mask::{MaskError, MultiObjectMask, ObjectId};

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("malformed image: {0}")]
    Decode(String),
    #[error("unsupported mask format: {property} is {value}, expected a single-channel indexed image")]
    Format {
        property: &'static str,
        value: String,
    },
    #[error("encode failed: {0}")]
    Encode(String),
    #[error(transparent)]
    Mask(#[from] MaskError),
}

/// The standard DAVIS color table (the PASCAL VOC bit-interleaved colormap).
pub fn davis_palette() -> [[u8; 3]; 256] {
    let mut table = [[0u8; 3]; 256];
    for (i, entry) in table.iter_mut().enumerate() {
        let mut c = i;
        let (mut r, mut g, mut b) = (0u8, 0u8, 0u8);
        for j in 0..8 {
            r |= ((c & 1) as u8) << (7 - j);
            g |= (((c >> 1) & 1) as u8) << (7 - j);
            b |= (((c >> 2) & 1) as u8) << (7 - j);
            c >>= 3;
        }
        *entry = [r, g, b];
    }
    table
}

/// Decodes a single-channel PNG into a mask. Indexed images of any bit
/// depth up to 8 and 8-bit (or lower) grayscale are accepted; the raw
/// sample value is the id.
pub fn decode_mask(bytes: &[u8]) -> Result<MultiObjectMask, CodecError> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder
        .read_info()
        .map_err(|e| CodecError::Decode(e.to_string()))?;

    let (color, depth) = {
        let info = reader.info();
        (info.color_type, info.bit_depth)
    };
    match color {
        png::ColorType::Indexed | png::ColorType::Grayscale => {}
        other => {
            return Err(CodecError::Format {
                property: "color type",
                value: format!("{other:?}"),
            })
        }
    }
    let bits = match depth {
        png::BitDepth::One => 1,
        png::BitDepth::Two => 2,
        png::BitDepth::Four => 4,
        png::BitDepth::Eight => 8,
        png::BitDepth::Sixteen => {
            return Err(CodecError::Format {
                property: "bit depth",
                value: "16".into(),
            })
        }
    };

    let size = reader
        .output_buffer_size()
        .ok_or_else(|| CodecError::Decode("image too large".into()))?;
    let mut buf = vec![0u8; size];
    let out = reader
        .next_frame(&mut buf)
        .map_err(|e| CodecError::Decode(e.to_string()))?;

    let (w, h) = (out.width as usize, out.height as usize);
    let mut labels = Vec::with_capacity(w * h);
    for row in buf.chunks(out.line_size).take(h) {
        if bits == 8 {
            labels.extend_from_slice(&row[..w]);
        } else {
            let per_byte = 8 / bits;
            let mask = (1u8 << bits) - 1;
            for x in 0..w {
                let byte = row[x / per_byte];
                let shift = 8 - bits * (x % per_byte + 1);
                labels.push((byte >> shift) & mask);
            }
        }
    }
    Ok(MultiObjectMask::new(out.width, out.height, labels)?)
}

/// Encodes a mask as an 8-bit indexed PNG with the DAVIS palette. Ids above
/// `max_id` are rejected.
pub fn encode_mask_checked(mask: &MultiObjectMask, max_id: ObjectId) -> Result<Vec<u8>, CodecError> {
    mask.check_ids(max_id, None)?;
    encode_mask_raw(mask)
}

/// Encodes with the default id ceiling.
pub fn encode_mask(mask: &MultiObjectMask) -> Result<Vec<u8>, CodecError> {
    encode_mask_checked(mask, crate::mask::DEFAULT_MAX_ID)
}

/// Encodes any label, including reserved ones. Used to author void regions
/// and deliberately malformed fixtures.
pub fn encode_mask_raw(mask: &MultiObjectMask) -> Result<Vec<u8>, CodecError> {
    let palette: Vec<u8> = davis_palette().iter().flatten().copied().collect();
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, mask.width(), mask.height());
        enc.set_color(png::ColorType::Indexed);
        enc.set_depth(png::BitDepth::Eight);
        enc.set_palette(palette);
        enc.set_compression(png::Compression::Fast);
        enc.set_filter(png::Filter::Sub);
        let mut writer = enc
            .write_header()
            .map_err(|e| CodecError::Encode(e.to_string()))?;
        writer
            .write_image_data(mask.labels())
            .map_err(|e| CodecError::Encode(e.to_string()))?;
        writer
            .finish()
            .map_err(|e| CodecError::Encode(e.to_string()))?;
    }
    Ok(out)
}
