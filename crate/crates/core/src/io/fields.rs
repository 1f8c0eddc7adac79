//! Binary field container.
//!
//! Layout, all little-endian:
//!
//! | offset | size | content                                  |
//! |--------|------|------------------------------------------|
//! | 0      | 4    | magic `PFLD`                             |
//! | 4      | 2    | version                                  |
//! | 6      | 4    | grid width                               |
//! | 10     | 4    | grid height                              |
//! | 14     | 4    | grid scale factor                        |
//! | 18     | 10   | channel counts: visible, occluded, PAF, TAF, mask (u16 each) |
//! | 28     | ...  | f32 channels, row-major, in count order; vector channels as x then y |
//!
//! Several records may be concatenated into one stream.

use super::{FormatError, Position};
use crate::field::{FieldStack, Grid, ScalarField, VectorField};
use crate::model::NUM_JOINTS;

pub const FIELD_MAGIC: [u8; 4] = *b"PFLD";
pub const FIELD_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 28;

/// Total record length in bytes.
pub fn encoded_len(stack: &FieldStack) -> usize {
    HEADER_LEN + 4 * stack.grid.len() * channel_count(stack)
}

fn channel_count(stack: &FieldStack) -> usize {
    stack.visible.len()
        + stack.occluded.len()
        + 2 * stack.pafs.len()
        + 2 * stack.tafs.as_ref().map_or(0, Vec::len)
        + 1
}

fn channels(stack: &FieldStack) -> impl Iterator<Item = &ScalarField> {
    stack
        .visible
        .iter()
        .chain(&stack.occluded)
        .chain(stack.pafs.iter().flat_map(|v| [&v.x, &v.y]))
        .chain(stack.tafs.iter().flatten().flat_map(|v| [&v.x, &v.y]))
        .chain(std::iter::once(&stack.mask))
}

/// Appends one record to `out`.
pub fn encode_field_stack(stack: &FieldStack, out: &mut Vec<u8>) {
    out.reserve(encoded_len(stack));
    out.extend_from_slice(&FIELD_MAGIC);
    out.extend_from_slice(&FIELD_VERSION.to_le_bytes());
    for v in [stack.grid.width, stack.grid.height, stack.grid.scale_factor] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let tafs = stack.tafs.as_ref().map_or(0, Vec::len);
    for c in [
        stack.visible.len(),
        stack.occluded.len(),
        stack.pafs.len(),
        tafs,
        1,
    ] {
        out.extend_from_slice(&(c as u16).to_le_bytes());
    }
    for ch in channels(stack) {
        for v in ch.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}

pub fn save_field_stack(stack: &FieldStack) -> Vec<u8> {
    let mut out = Vec::new();
    encode_field_stack(stack, &mut out);
    out
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

/// Decodes the record starting at `offset`, returning it with the offset
/// just past its end.
pub fn decode_field_stack(bytes: &[u8], offset: usize) -> Result<(FieldStack, usize), FormatError> {
    let b = &bytes[offset.min(bytes.len())..];
    let at = |rel: usize| Position::Byte(offset + rel);
    if b.len() < 4 || b[..4] != FIELD_MAGIC {
        if b.len() < 4 && FIELD_MAGIC.starts_with(b) {
            return Err(FormatError::Truncated {
                position: at(0),
                expected: HEADER_LEN,
                actual: b.len(),
            });
        }
        return Err(FormatError::BadMagic { position: at(0) });
    }
    if b.len() < HEADER_LEN {
        return Err(FormatError::Truncated {
            position: at(0),
            expected: HEADER_LEN,
            actual: b.len(),
        });
    }
    let version = u16_at(b, 4);
    if version != FIELD_VERSION {
        return Err(FormatError::UnknownVersion {
            position: at(4),
            version: version as u32,
        });
    }
    let (width, height, scale) = (u32_at(b, 6), u32_at(b, 10), u32_at(b, 14));
    let malformed = |rel: usize, reason: String| FormatError::MalformedHeader {
        position: at(rel),
        reason,
    };
    if width == 0 || height == 0 {
        return Err(malformed(6, format!("empty grid {width}x{height}")));
    }
    if scale == 0 {
        return Err(malformed(14, "zero scale factor".into()));
    }
    let counts: [usize; 5] = std::array::from_fn(|i| u16_at(b, 18 + 2 * i) as usize);
    let [visible, occluded, pafs, tafs, mask] = counts;
    if visible != NUM_JOINTS {
        return Err(malformed(
            18,
            format!("{visible} visible channels, expected {NUM_JOINTS}"),
        ));
    }
    if occluded != NUM_JOINTS {
        return Err(malformed(
            20,
            format!("{occluded} occluded channels, expected {NUM_JOINTS}"),
        ));
    }
    if tafs != 0 && tafs != NUM_JOINTS {
        return Err(malformed(
            24,
            format!("{tafs} temporal channel pairs, expected 0 or {NUM_JOINTS}"),
        ));
    }
    if mask != 1 {
        return Err(malformed(26, format!("{mask} mask channels, expected 1")));
    }
    let cells = width as u64 * height as u64;
    let channels = (visible + occluded + 2 * pafs + 2 * tafs + mask) as u64;
    let expected = HEADER_LEN as u64 + 4 * cells * channels;
    if (b.len() as u64) < expected {
        return Err(FormatError::Truncated {
            position: at(0),
            expected: usize::try_from(expected).unwrap_or(usize::MAX),
            actual: b.len(),
        });
    }

    let cells = cells as usize;
    let mut cursor = HEADER_LEN;
    let next = |cursor: &mut usize| -> Result<ScalarField, FormatError> {
        let start = *cursor;
        let mut data = Vec::with_capacity(cells);
        for chunk in b[start..start + 4 * cells].chunks_exact(4) {
            let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            if !v.is_finite() {
                let rel = start + 4 * data.len();
                return Err(FormatError::InvalidValue {
                    position: at(rel),
                    reason: format!("non-finite value {v}"),
                });
            }
            data.push(v);
        }
        *cursor += 4 * cells;
        Ok(ScalarField::from_vec(width as usize, height as usize, data).expect("length checked"))
    };
    let scalars =
        |n: usize, cursor: &mut usize| (0..n).map(|_| next(cursor)).collect::<Result<Vec<_>, _>>();
    let visible_maps = scalars(visible, &mut cursor)?;
    let occluded_maps = scalars(occluded, &mut cursor)?;
    let vectors = |n: usize, cursor: &mut usize| -> Result<Vec<VectorField>, FormatError> {
        let flat = scalars(2 * n, cursor)?;
        let mut it = flat.into_iter();
        Ok((0..n)
            .map(|_| VectorField {
                x: it.next().unwrap(),
                y: it.next().unwrap(),
            })
            .collect())
    };
    let paf_maps = vectors(pafs, &mut cursor)?;
    let taf_maps = vectors(tafs, &mut cursor)?;
    let mask_map = scalars(1, &mut cursor)?.pop().unwrap();
    let stack = FieldStack {
        grid: Grid::new(width, height, scale),
        visible: visible_maps,
        occluded: occluded_maps,
        pafs: paf_maps,
        tafs: (tafs > 0).then_some(taf_maps),
        mask: mask_map,
    };
    Ok((stack, offset + cursor))
}

/// Decodes exactly one record; bytes after it are an error.
pub fn load_field_stack(bytes: &[u8]) -> Result<FieldStack, FormatError> {
    let (stack, end) = decode_field_stack(bytes, 0)?;
    if end != bytes.len() {
        return Err(FormatError::TrailingBytes {
            position: Position::Byte(end),
            count: bytes.len() - end,
        });
    }
    Ok(stack)
}

/// Decodes a concatenation of records.
pub fn decode_field_stream(bytes: &[u8]) -> Result<Vec<FieldStack>, FormatError> {
    let mut out = Vec::new();
    let mut offset = 0;
    while offset < bytes.len() {
        let (stack, end) = decode_field_stack(bytes, offset)?;
        out.push(stack);
        offset = end;
    }
    Ok(out)
}
