//! NRRD reader and writer for 3D masks.
//!
//! Reads attached-header files with integer or float samples in raw, gzip or
//! ASCII encoding; any nonzero sample counts as occupied. Voxel spacing comes
//! from `spacings` or the column norms of `space directions`; a file with
//! neither is rejected. Writes `uint8` with axis-aligned `space directions`.

use std::io::{Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use morphomics_core::{VolumeError, VoxelGrid};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum NrrdError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not an NRRD file (missing NRRD000x magic)")]
    BadMagic,
    #[error("header has no blank line terminating it")]
    UnterminatedHeader,
    #[error("missing required field `{0}`")]
    MissingField(&'static str),
    #[error("no voxel spacing: need `spacings` or `space directions`")]
    MissingSpacing,
    #[error("bad value for `{field}`: {value}")]
    BadField { field: String, value: String },
    #[error("unsupported {0}")]
    Unsupported(String),
    #[error("data holds {got} bytes, expected {expected}")]
    DataLength { expected: usize, got: usize },
    #[error(transparent)]
    Volume(#[from] VolumeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SampleType {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl SampleType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "signed char" | "int8" | "int8_t" => Self::I8,
            "uchar" | "unsigned char" | "uint8" | "uint8_t" => Self::U8,
            "short" | "short int" | "signed short" | "signed short int" | "int16" | "int16_t" => Self::I16,
            "ushort" | "unsigned short" | "unsigned short int" | "uint16" | "uint16_t" => Self::U16,
            "int" | "signed int" | "int32" | "int32_t" => Self::I32,
            "uint" | "unsigned int" | "uint32" | "uint32_t" => Self::U32,
            "float" => Self::F32,
            "double" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn nonzero(self, b: &[u8], big_endian: bool) -> bool {
        macro_rules! read {
            ($t:ty, $n:expr) => {{
                let a: [u8; $n] = b.try_into().unwrap();
                if big_endian {
                    <$t>::from_be_bytes(a)
                } else {
                    <$t>::from_le_bytes(a)
                }
            }};
        }
        match self {
            Self::I8 | Self::U8 => b[0] != 0,
            Self::I16 => read!(i16, 2) != 0,
            Self::U16 => read!(u16, 2) != 0,
            Self::I32 => read!(i32, 4) != 0,
            Self::U32 => read!(u32, 4) != 0,
            Self::F32 => read!(f32, 4) != 0.0,
            Self::F64 => read!(f64, 8) != 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Encoding {
    Raw,
    #[default]
    Gzip,
}

fn bad(field: &str, value: &str) -> NrrdError {
    NrrdError::BadField {
        field: field.to_string(),
        value: value.to_string(),
    }
}

fn parse_numbers<const N: usize>(field: &str, s: &str) -> Result<[f64; N], NrrdError> {
    let v: Vec<f64> = s
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad(field, s))?;
    v.try_into().map_err(|_| bad(field, s))
}

/// `(a,b,c)` vectors separated by whitespace.
fn parse_vectors(field: &str, s: &str) -> Result<Vec<[f64; 3]>, NrrdError> {
    let mut out = Vec::new();
    let mut rest = s.trim();
    while !rest.is_empty() {
        if rest.starts_with("none") {
            return Err(NrrdError::Unsupported(format!("`none` entry in `{field}`")));
        }
        let open = rest.find('(').ok_or_else(|| bad(field, s))?;
        let close = rest.find(')').ok_or_else(|| bad(field, s))?;
        if close < open {
            return Err(bad(field, s));
        }
        out.push(parse_numbers::<3>(field, &rest[open + 1..close])?);
        rest = rest[close + 1..].trim_start();
    }
    Ok(out)
}

pub fn read_nrrd(path: impl AsRef<Path>) -> Result<VoxelGrid, NrrdError> {
    parse_nrrd(&std::fs::read(path)?)
}

pub fn parse_nrrd(bytes: &[u8]) -> Result<VoxelGrid, NrrdError> {
    if !bytes.starts_with(b"NRRD000") {
        return Err(NrrdError::BadMagic);
    }
    let mut pos = 0;
    let mut lines = Vec::new();
    loop {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(NrrdError::UnterminatedHeader)?;
        let line = String::from_utf8_lossy(&bytes[pos..pos + end]);
        let line = line.trim_end_matches('\r').to_string();
        pos += end + 1;
        if line.is_empty() {
            break;
        }
        lines.push(line);
    }
    let data = &bytes[pos..];

    let mut kind = None;
    let mut dimension = None;
    let mut sizes = None;
    let mut spacings = None;
    let mut directions = None;
    let mut origin = [0.0; 3];
    let mut encoding = None;
    let mut big_endian = false;
    let mut byte_skip = 0usize;
    for line in lines.iter().skip(1) {
        if line.starts_with('#') || line.contains(":=") {
            continue;
        }
        let Some((key, value)) = line.split_once(": ") else {
            return Err(bad("header line", line));
        };
        let value = value.trim();
        match key.trim().to_ascii_lowercase().as_str() {
            "type" => {
                kind = Some(SampleType::parse(value).ok_or_else(|| NrrdError::Unsupported(format!("type `{value}`")))?)
            }
            "dimension" => dimension = Some(value.parse::<usize>().map_err(|_| bad("dimension", value))?),
            "sizes" => sizes = Some(value.to_string()),
            "spacings" => spacings = Some(parse_numbers::<3>("spacings", value)?),
            "space directions" => directions = Some(parse_vectors("space directions", value)?),
            "space origin" => {
                let v = parse_vectors("space origin", value)?;
                origin = *v.first().ok_or_else(|| bad("space origin", value))?;
            }
            "encoding" => encoding = Some(value.to_ascii_lowercase()),
            "endian" => big_endian = value == "big",
            "byte skip" | "byteskip" => {
                byte_skip = value
                    .parse::<usize>()
                    .map_err(|_| NrrdError::Unsupported(format!("byte skip `{value}`")))?
            }
            "data file" | "datafile" => return Err(NrrdError::Unsupported("detached data file".into())),
            _ => {}
        }
    }
    let kind = kind.ok_or(NrrdError::MissingField("type"))?;
    let dimension = dimension.ok_or(NrrdError::MissingField("dimension"))?;
    if dimension != 3 {
        return Err(NrrdError::Unsupported(format!("dimension {dimension}")));
    }
    let sizes = parse_numbers::<3>("sizes", &sizes.ok_or(NrrdError::MissingField("sizes"))?)?;
    if sizes.iter().any(|s| *s < 1.0 || s.fract() != 0.0) {
        return Err(bad("sizes", &format!("{sizes:?}")));
    }
    let dims = sizes.map(|s| s as usize);
    let spacing = match (spacings, directions) {
        (Some(s), _) => s,
        (None, Some(d)) => {
            if d.len() != 3 {
                return Err(bad("space directions", &format!("{} vectors", d.len())));
            }
            let oblique = (0..3).any(|i| (0..3).any(|j| i != j && d[i][j] != 0.0));
            if oblique {
                log::warn!("oblique space directions; using axis lengths only");
            }
            [0, 1, 2].map(|i| (d[i][0] * d[i][0] + d[i][1] * d[i][1] + d[i][2] * d[i][2]).sqrt())
        }
        (None, None) => return Err(NrrdError::MissingSpacing),
    };
    let encoding = encoding.ok_or(NrrdError::MissingField("encoding"))?;
    let count = dims[0] * dims[1] * dims[2];
    let occupied: Vec<bool> = match encoding.as_str() {
        "raw" | "gzip" | "gz" => {
            let payload = if encoding == "raw" {
                data.get(byte_skip..).unwrap_or(&[]).to_vec()
            } else {
                let mut out = Vec::with_capacity(count * kind.size());
                GzDecoder::new(data).read_to_end(&mut out)?;
                out.get(byte_skip..).unwrap_or(&[]).to_vec()
            };
            let expected = count * kind.size();
            if payload.len() < expected {
                return Err(NrrdError::DataLength {
                    expected,
                    got: payload.len(),
                });
            }
            payload[..expected]
                .chunks_exact(kind.size())
                .map(|c| kind.nonzero(c, big_endian))
                .collect()
        }
        "ascii" | "text" | "txt" => {
            let text = String::from_utf8_lossy(data);
            let values: Vec<bool> = text
                .split_whitespace()
                .map(|t| t.parse::<f64>().map(|v| v != 0.0))
                .collect::<Result<_, _>>()
                .map_err(|_| bad("ascii data", "non-numeric token"))?;
            if values.len() < count {
                return Err(NrrdError::DataLength {
                    expected: count,
                    got: values.len(),
                });
            }
            values[..count].to_vec()
        }
        other => return Err(NrrdError::Unsupported(format!("encoding `{other}`"))),
    };
    Ok(VoxelGrid::new(dims, spacing, origin, occupied)?)
}

/// Serialized `uint8` NRRD with values 0/1.
pub fn to_nrrd_bytes(grid: &VoxelGrid, encoding: Encoding) -> Vec<u8> {
    let [nx, ny, nz] = grid.dims();
    let [sx, sy, sz] = grid.spacing();
    let [ox, oy, oz] = grid.origin();
    let enc = match encoding {
        Encoding::Raw => "raw",
        Encoding::Gzip => "gzip",
    };
    let mut out = format!(
        "NRRD0004\n\
         type: uint8\n\
         dimension: 3\n\
         space: left-posterior-superior\n\
         sizes: {nx} {ny} {nz}\n\
         space directions: ({sx},0,0) (0,{sy},0) (0,0,{sz})\n\
         kinds: domain domain domain\n\
         endian: little\n\
         encoding: {enc}\n\
         space origin: ({ox},{oy},{oz})\n\n"
    )
    .into_bytes();
    let payload = grid.to_bytes();
    match encoding {
        Encoding::Raw => out.extend_from_slice(&payload),
        Encoding::Gzip => {
            let mut gz = GzEncoder::new(out, Compression::default());
            gz.write_all(&payload).expect("writing to memory");
            return gz.finish().expect("writing to memory");
        }
    }
    out
}

pub fn write_nrrd(path: impl AsRef<Path>, grid: &VoxelGrid, encoding: Encoding) -> Result<(), NrrdError> {
    std::fs::write(path, to_nrrd_bytes(grid, encoding))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> VoxelGrid {
        let mut g = VoxelGrid::empty([3, 4, 5], [0.5, 0.75, 1.25], [-1.0, 2.5, 10.0]).unwrap();
        g.set(1, 2, 3, true);
        g.set(0, 0, 0, true);
        g.set(2, 3, 4, true);
        g
    }

    #[test]
    fn round_trip_both_encodings() {
        let g = sample();
        for enc in [Encoding::Raw, Encoding::Gzip] {
            assert_eq!(parse_nrrd(&to_nrrd_bytes(&g, enc)).unwrap(), g);
        }
    }

    #[test]
    fn gzip_output_is_deterministic() {
        assert_eq!(
            to_nrrd_bytes(&sample(), Encoding::Gzip),
            to_nrrd_bytes(&sample(), Encoding::Gzip)
        );
    }

    #[test]
    fn reads_spacings_and_wide_types() {
        let mut bytes = b"NRRD0005\n# comment\ntype: short\ndimension: 3\nsizes: 2 1 1\nspacings: 1 2 3\nendian: big\nencoding: raw\n\n".to_vec();
        bytes.extend_from_slice(&[0, 0, 1, 0]);
        let g = parse_nrrd(&bytes).unwrap();
        assert_eq!(g.spacing(), [1.0, 2.0, 3.0]);
        assert_eq!(g.data(), &[false, true]);
        assert_eq!(g.origin(), [0.0; 3]);
    }

    #[test]
    fn reads_ascii() {
        let bytes =
            b"NRRD0004\ntype: float\ndimension: 3\nsizes: 2 2 1\nspacings: 1 1 1\nencoding: ascii\n\n0 1.5\n0 -2\n";
        assert_eq!(parse_nrrd(bytes).unwrap().data(), &[false, true, false, true]);
    }

    #[test]
    fn rejects_bad_headers() {
        let no_spacing = b"NRRD0004\ntype: uint8\ndimension: 3\nsizes: 1 1 1\nencoding: raw\n\n\x01";
        assert!(matches!(parse_nrrd(no_spacing), Err(NrrdError::MissingSpacing)));
        let short = b"NRRD0004\ntype: uint8\ndimension: 3\nsizes: 2 2 2\nspacings: 1 1 1\nencoding: raw\n\n\x01";
        assert!(matches!(
            parse_nrrd(short),
            Err(NrrdError::DataLength { expected: 8, got: 1 })
        ));
        assert!(matches!(parse_nrrd(b"P5\n"), Err(NrrdError::BadMagic)));
        let detached =
            b"NRRD0004\ntype: uint8\ndimension: 3\nsizes: 1 1 1\nspacings: 1 1 1\ndata file: x.raw\nencoding: raw\n\n";
        assert!(matches!(parse_nrrd(detached), Err(NrrdError::Unsupported(_))));
        let two_d = b"NRRD0004\ntype: uint8\ndimension: 2\nsizes: 1 1\nencoding: raw\n\n\x01";
        assert!(matches!(parse_nrrd(two_d), Err(NrrdError::Unsupported(_))));
    }
}
