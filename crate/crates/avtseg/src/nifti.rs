//! NIfTI-1 single-file (`.nii`, `.nii.gz`) reader and writer.
//!
//! Supports rank-3 volumes stored as uint8 (2), int16 (4), float32 (16) or
//! float64 (64). Orientation fields (qform/sform) are carried through
//! unchanged; only the translation is used, as the volume origin.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use avtseg_core::volume::{Grid, Volume, VolumeKind};
use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

pub const HEADER_SIZE: usize = 348;
/// Header plus the 4-byte extension flag.
pub const MIN_VOX_OFFSET: usize = 352;
pub const MAGIC_SINGLE: &[u8; 4] = b"n+1\0";
pub const MAGIC_PAIR: &[u8; 4] = b"ni1\0";

#[derive(Debug, thiserror::Error)]
pub enum NiftiError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("input shorter than the {HEADER_SIZE}-byte header ({0} bytes)")]
    ShortHeader(usize),
    #[error("cannot determine byte order: dim[0] is not in 1..=7 either way")]
    Endianness,
    #[error("sizeof_hdr is {0}, expected 348")]
    HeaderSize(i32),
    #[error("unsupported magic {0:?} (only single-file \"n+1\" is supported)")]
    Magic([u8; 4]),
    #[error("rank {0} volumes are not supported (need 3)")]
    Rank(i16),
    #[error("invalid dimension {0:?}")]
    Dims([i16; 8]),
    #[error("non-positive or non-finite voxel spacing {0:?}")]
    Pixdim([f32; 3]),
    #[error("unsupported datatype code {0}")]
    Datatype(i16),
    #[error("bitpix {bitpix} does not match datatype {datatype}")]
    Bitpix { datatype: i16, bitpix: i16 },
    #[error("invalid vox_offset {0}")]
    VoxOffset(f32),
    #[error("truncated payload: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("value {value} at voxel {index} cannot be stored as {datatype:?}")]
    NotRepresentable {
        datatype: Datatype,
        index: usize,
        value: f64,
    },
    #[error("{kind:?} volumes cannot be written as {datatype:?}")]
    KindDatatype { kind: VolumeKind, datatype: Datatype },
    #[error(transparent)]
    Volume(#[from] avtseg_core::Error),
}

pub type Result<T, E = NiftiError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Datatype {
    Uint8,
    Int16,
    Float32,
    Float64,
}

impl Datatype {
    pub fn from_code(code: i16) -> Option<Self> {
        match code {
            2 => Some(Self::Uint8),
            4 => Some(Self::Int16),
            16 => Some(Self::Float32),
            64 => Some(Self::Float64),
            _ => None,
        }
    }

    pub fn code(self) -> i16 {
        match self {
            Self::Uint8 => 2,
            Self::Int16 => 4,
            Self::Float32 => 16,
            Self::Float64 => 64,
        }
    }

    pub fn bitpix(self) -> i16 {
        match self {
            Self::Uint8 => 8,
            Self::Int16 => 16,
            Self::Float32 => 32,
            Self::Float64 => 64,
        }
    }

    pub fn bytes(self) -> usize {
        self.bitpix() as usize / 8
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Endianness {
    #[default]
    Little,
    Big,
}

/// Every field of the 348-byte NIfTI-1 header, in file order.
#[derive(Clone, Debug, PartialEq)]
pub struct NiftiHeader {
    pub sizeof_hdr: i32,
    pub data_type: [u8; 10],
    pub db_name: [u8; 18],
    pub extents: i32,
    pub session_error: i16,
    pub regular: u8,
    pub dim_info: u8,
    pub dim: [i16; 8],
    pub intent_p1: f32,
    pub intent_p2: f32,
    pub intent_p3: f32,
    pub intent_code: i16,
    pub datatype: i16,
    pub bitpix: i16,
    pub slice_start: i16,
    pub pixdim: [f32; 8],
    pub vox_offset: f32,
    pub scl_slope: f32,
    pub scl_inter: f32,
    pub slice_end: i16,
    pub slice_code: u8,
    pub xyzt_units: u8,
    pub cal_max: f32,
    pub cal_min: f32,
    pub slice_duration: f32,
    pub toffset: f32,
    pub glmax: i32,
    pub glmin: i32,
    pub descrip: [u8; 80],
    pub aux_file: [u8; 24],
    pub qform_code: i16,
    pub sform_code: i16,
    pub quatern_b: f32,
    pub quatern_c: f32,
    pub quatern_d: f32,
    pub qoffset_x: f32,
    pub qoffset_y: f32,
    pub qoffset_z: f32,
    pub srow_x: [f32; 4],
    pub srow_y: [f32; 4],
    pub srow_z: [f32; 4],
    pub intent_name: [u8; 16],
    pub magic: [u8; 4],
    pub endianness: Endianness,
}

impl Default for NiftiHeader {
    fn default() -> Self {
        Self {
            sizeof_hdr: HEADER_SIZE as i32,
            data_type: [0; 10],
            db_name: [0; 18],
            extents: 0,
            session_error: 0,
            regular: b'r',
            dim_info: 0,
            dim: [3, 1, 1, 1, 1, 1, 1, 1],
            intent_p1: 0.0,
            intent_p2: 0.0,
            intent_p3: 0.0,
            intent_code: 0,
            datatype: Datatype::Float32.code(),
            bitpix: Datatype::Float32.bitpix(),
            slice_start: 0,
            pixdim: [1.0; 8],
            vox_offset: MIN_VOX_OFFSET as f32,
            scl_slope: 1.0,
            scl_inter: 0.0,
            slice_end: 0,
            slice_code: 0,
            xyzt_units: 2, // millimeters
            cal_max: 0.0,
            cal_min: 0.0,
            slice_duration: 0.0,
            toffset: 0.0,
            glmax: 0,
            glmin: 0,
            descrip: [0; 80],
            aux_file: [0; 24],
            qform_code: 1,
            sform_code: 0,
            quatern_b: 0.0,
            quatern_c: 0.0,
            quatern_d: 0.0,
            qoffset_x: 0.0,
            qoffset_y: 0.0,
            qoffset_z: 0.0,
            srow_x: [1.0, 0.0, 0.0, 0.0],
            srow_y: [0.0, 1.0, 0.0, 0.0],
            srow_z: [0.0, 0.0, 1.0, 0.0],
            intent_name: [0; 16],
            magic: *MAGIC_SINGLE,
            endianness: Endianness::Little,
        }
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
    big: bool,
}

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let out: [u8; N] = self.bytes[self.pos..self.pos + N].try_into().expect("header length checked");
        self.pos += N;
        out
    }

    fn u8(&mut self) -> u8 {
        self.take::<1>()[0]
    }

    fn i16(&mut self) -> i16 {
        let b = self.take();
        if self.big { i16::from_be_bytes(b) } else { i16::from_le_bytes(b) }
    }

    fn i32(&mut self) -> i32 {
        let b = self.take();
        if self.big { i32::from_be_bytes(b) } else { i32::from_le_bytes(b) }
    }

    fn f32(&mut self) -> f32 {
        let b = self.take();
        if self.big { f32::from_be_bytes(b) } else { f32::from_le_bytes(b) }
    }

    fn i16s<const N: usize>(&mut self) -> [i16; N] {
        std::array::from_fn(|_| self.i16())
    }

    fn f32s<const N: usize>(&mut self) -> [f32; N] {
        std::array::from_fn(|_| self.f32())
    }
}

impl NiftiHeader {
    /// Parses and validates the first 348 bytes of `bytes`.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_SIZE {
            return Err(NiftiError::ShortHeader(bytes.len()));
        }
        let dim0_le = i16::from_le_bytes([bytes[40], bytes[41]]);
        let dim0_be = i16::from_be_bytes([bytes[40], bytes[41]]);
        let big = if (1..=7).contains(&dim0_le) {
            false
        } else if (1..=7).contains(&dim0_be) {
            true
        } else {
            return Err(NiftiError::Endianness);
        };
        let mut c = Cursor { bytes, pos: 0, big };
        let header = Self {
            sizeof_hdr: c.i32(),
            data_type: c.take(),
            db_name: c.take(),
            extents: c.i32(),
            session_error: c.i16(),
            regular: c.u8(),
            dim_info: c.u8(),
            dim: c.i16s(),
            intent_p1: c.f32(),
            intent_p2: c.f32(),
            intent_p3: c.f32(),
            intent_code: c.i16(),
            datatype: c.i16(),
            bitpix: c.i16(),
            slice_start: c.i16(),
            pixdim: c.f32s(),
            vox_offset: c.f32(),
            scl_slope: c.f32(),
            scl_inter: c.f32(),
            slice_end: c.i16(),
            slice_code: c.u8(),
            xyzt_units: c.u8(),
            cal_max: c.f32(),
            cal_min: c.f32(),
            slice_duration: c.f32(),
            toffset: c.f32(),
            glmax: c.i32(),
            glmin: c.i32(),
            descrip: c.take(),
            aux_file: c.take(),
            qform_code: c.i16(),
            sform_code: c.i16(),
            quatern_b: c.f32(),
            quatern_c: c.f32(),
            quatern_d: c.f32(),
            qoffset_x: c.f32(),
            qoffset_y: c.f32(),
            qoffset_z: c.f32(),
            srow_x: c.f32s(),
            srow_y: c.f32s(),
            srow_z: c.f32s(),
            intent_name: c.take(),
            magic: c.take(),
            endianness: if big { Endianness::Big } else { Endianness::Little },
        };
        debug_assert_eq!(c.pos, HEADER_SIZE);
        header.validate()?;
        Ok(header)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizeof_hdr != HEADER_SIZE as i32 {
            return Err(NiftiError::HeaderSize(self.sizeof_hdr));
        }
        if &self.magic != MAGIC_SINGLE {
            return Err(NiftiError::Magic(self.magic));
        }
        if self.dim[0] != 3 {
            return Err(NiftiError::Rank(self.dim[0]));
        }
        if self.dim[1..4].iter().any(|&d| d <= 0) {
            return Err(NiftiError::Dims(self.dim));
        }
        let spacing = [self.pixdim[1], self.pixdim[2], self.pixdim[3]];
        if spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(NiftiError::Pixdim(spacing));
        }
        let datatype = self.datatype()?;
        if self.bitpix != datatype.bitpix() {
            return Err(NiftiError::Bitpix {
                datatype: self.datatype,
                bitpix: self.bitpix,
            });
        }
        let off = self.vox_offset;
        if !(off.is_finite() && off >= MIN_VOX_OFFSET as f32 && off.fract() == 0.0 && off < 1e9) {
            return Err(NiftiError::VoxOffset(off));
        }
        Ok(())
    }

    pub fn datatype(&self) -> Result<Datatype> {
        Datatype::from_code(self.datatype).ok_or(NiftiError::Datatype(self.datatype))
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.dim[1] as usize, self.dim[2] as usize, self.dim[3] as usize]
    }

    pub fn spacing(&self) -> [f64; 3] {
        [self.pixdim[1] as f64, self.pixdim[2] as f64, self.pixdim[3] as f64]
    }

    /// Translation of the qform (or sform when only that is set).
    pub fn origin(&self) -> [f64; 3] {
        let o = if self.qform_code > 0 {
            [self.qoffset_x, self.qoffset_y, self.qoffset_z]
        } else if self.sform_code > 0 {
            [self.srow_x[3], self.srow_y[3], self.srow_z[3]]
        } else {
            [0.0; 3]
        };
        o.map(|v| if v.is_finite() { v as f64 } else { 0.0 })
    }

    fn voxel_count(&self) -> Option<usize> {
        self.dims().iter().try_fold(1usize, |acc, &d| acc.checked_mul(d))
    }

    /// Serializes the header, always little-endian.
    pub fn to_bytes(&self) -> [u8; HEADER_SIZE] {
        let mut out = Vec::with_capacity(HEADER_SIZE);
        let i16s = |out: &mut Vec<u8>, v: &[i16]| v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        let f32s = |out: &mut Vec<u8>, v: &[f32]| v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes()));
        out.extend_from_slice(&self.sizeof_hdr.to_le_bytes());
        out.extend_from_slice(&self.data_type);
        out.extend_from_slice(&self.db_name);
        out.extend_from_slice(&self.extents.to_le_bytes());
        i16s(&mut out, &[self.session_error]);
        out.extend_from_slice(&[self.regular, self.dim_info]);
        i16s(&mut out, &self.dim);
        f32s(&mut out, &[self.intent_p1, self.intent_p2, self.intent_p3]);
        i16s(&mut out, &[self.intent_code, self.datatype, self.bitpix, self.slice_start]);
        f32s(&mut out, &self.pixdim);
        f32s(&mut out, &[self.vox_offset, self.scl_slope, self.scl_inter]);
        i16s(&mut out, &[self.slice_end]);
        out.extend_from_slice(&[self.slice_code, self.xyzt_units]);
        f32s(&mut out, &[self.cal_max, self.cal_min, self.slice_duration, self.toffset]);
        out.extend_from_slice(&self.glmax.to_le_bytes());
        out.extend_from_slice(&self.glmin.to_le_bytes());
        out.extend_from_slice(&self.descrip);
        out.extend_from_slice(&self.aux_file);
        i16s(&mut out, &[self.qform_code, self.sform_code]);
        f32s(
            &mut out,
            &[self.quatern_b, self.quatern_c, self.quatern_d, self.qoffset_x, self.qoffset_y, self.qoffset_z],
        );
        f32s(&mut out, &self.srow_x);
        f32s(&mut out, &self.srow_y);
        f32s(&mut out, &self.srow_z);
        out.extend_from_slice(&self.intent_name);
        out.extend_from_slice(&self.magic);
        out.try_into().expect("header serializes to 348 bytes")
    }
}

/// Kind to assign to non-label data on read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KindHint {
    #[default]
    Hu,
    Probability,
}

fn is_gzip(bytes: &[u8]) -> bool {
    bytes.starts_with(&[0x1f, 0x8b])
}

fn gunzip(bytes: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    GzDecoder::new(bytes).read_to_end(&mut out)?;
    Ok(out)
}

/// Decodes a `.nii` payload (optionally gzip-wrapped).
///
/// uint8 data whose values are all 0 or 1 becomes a label volume; anything
/// else takes the kind given by `hint`.
pub fn read_volume(bytes: &[u8], hint: KindHint) -> Result<(Volume, NiftiHeader)> {
    let inflated;
    let bytes = if is_gzip(bytes) {
        inflated = gunzip(bytes)?;
        &inflated[..]
    } else {
        bytes
    };
    let header = NiftiHeader::parse(bytes)?;
    let datatype = header.datatype()?;
    let offset = header.vox_offset as usize;
    let count = header.voxel_count();
    let needed = count
        .and_then(|n| n.checked_mul(datatype.bytes()))
        .and_then(|n| n.checked_add(offset))
        .ok_or(NiftiError::Dims(header.dim))?;
    if bytes.len() < needed {
        return Err(NiftiError::Truncated {
            needed,
            available: bytes.len(),
        });
    }
    let payload = &bytes[offset..needed];
    let big = header.endianness == Endianness::Big;
    let raw: Vec<f64> = match datatype {
        Datatype::Uint8 => payload.iter().map(|&b| b as f64).collect(),
        Datatype::Int16 => payload
            .chunks_exact(2)
            .map(|c| {
                let b = [c[0], c[1]];
                (if big { i16::from_be_bytes(b) } else { i16::from_le_bytes(b) }) as f64
            })
            .collect(),
        Datatype::Float32 => payload
            .chunks_exact(4)
            .map(|c| {
                let b = [c[0], c[1], c[2], c[3]];
                (if big { f32::from_be_bytes(b) } else { f32::from_le_bytes(b) }) as f64
            })
            .collect(),
        Datatype::Float64 => payload
            .chunks_exact(8)
            .map(|c| {
                let b: [u8; 8] = c.try_into().expect("chunk of 8");
                if big { f64::from_be_bytes(b) } else { f64::from_le_bytes(b) }
            })
            .collect(),
    };
    let (slope, inter) = (header.scl_slope as f64, header.scl_inter as f64);
    let scaled = slope != 0.0 && slope.is_finite() && inter.is_finite() && (slope, inter) != (1.0, 0.0);
    let data: Vec<f64> = if scaled {
        raw.iter().map(|v| v * slope + inter).collect()
    } else {
        raw
    };
    let label = datatype == Datatype::Uint8 && data.iter().all(|&v| v == 0.0 || v == 1.0);
    let kind = match (label, hint) {
        (true, _) => VolumeKind::Label,
        (false, KindHint::Hu) => VolumeKind::Hu,
        (false, KindHint::Probability) => VolumeKind::Probability,
    };
    let grid = Grid::new(header.dims(), header.spacing(), header.origin())?;
    let volume = Volume::new(grid, kind, data)?;
    Ok((volume, header))
}

pub fn read_volume_file(path: impl AsRef<Path>, hint: KindHint) -> Result<(Volume, NiftiHeader)> {
    read_volume(&std::fs::read(path)?, hint)
}

/// Reads and validates only the header, without touching the voxel data.
pub fn read_header_file(path: impl AsRef<Path>) -> Result<NiftiHeader> {
    let mut file = File::open(path)?;
    let mut magic = [0u8; 2];
    let mut head = Vec::with_capacity(HEADER_SIZE);
    let got = file.read(&mut magic)?;
    head.extend_from_slice(&magic[..got]);
    let mut buf = Vec::with_capacity(HEADER_SIZE);
    if got == 2 && is_gzip(&magic) {
        let chained = std::io::Cursor::new(magic).chain(file);
        GzDecoder::new(chained).take(HEADER_SIZE as u64).read_to_end(&mut buf)?;
    } else {
        buf = head;
        file.take((HEADER_SIZE - buf.len()) as u64).read_to_end(&mut buf)?;
    }
    NiftiHeader::parse(&buf)
}

fn encode(v: &Volume, datatype: Datatype) -> Result<Vec<u8>> {
    match (v.kind(), datatype) {
        (VolumeKind::Label, Datatype::Uint8) => {}
        (VolumeKind::Label, _) | (VolumeKind::Probability, Datatype::Uint8 | Datatype::Int16) => {
            return Err(NiftiError::KindDatatype {
                kind: v.kind(),
                datatype,
            })
        }
        _ => {}
    }
    let mut out = Vec::with_capacity(v.len() * datatype.bytes());
    for (index, &value) in v.data().iter().enumerate() {
        let bad = || NiftiError::NotRepresentable {
            datatype,
            index,
            value,
        };
        match datatype {
            Datatype::Uint8 => {
                if value.fract() != 0.0 || !(0.0..=255.0).contains(&value) {
                    return Err(bad());
                }
                out.push(value as u8);
            }
            Datatype::Int16 => {
                if value.fract() != 0.0 || !(-32768.0..=32767.0).contains(&value) {
                    return Err(bad());
                }
                out.extend_from_slice(&(value as i16).to_le_bytes());
            }
            Datatype::Float32 => {
                let single = value as f32;
                if !single.is_finite() {
                    return Err(bad());
                }
                out.extend_from_slice(&single.to_le_bytes());
            }
            Datatype::Float64 => out.extend_from_slice(&value.to_le_bytes()),
        }
    }
    Ok(out)
}

/// Encodes a volume as an uncompressed single-file NIfTI-1 image.
///
/// With a `template`, every header field not describing the data layout
/// (orientation, descriptions, units, intent) is copied from it.
pub fn write_volume(v: &Volume, datatype: Datatype, template: Option<&NiftiHeader>) -> Result<Vec<u8>> {
    let data = encode(v, datatype)?;
    let mut h = match template {
        Some(t) => t.clone(),
        None => {
            let o = v.origin();
            NiftiHeader {
                qoffset_x: o[0] as f32,
                qoffset_y: o[1] as f32,
                qoffset_z: o[2] as f32,
                ..NiftiHeader::default()
            }
        }
    };
    let [nx, ny, nz] = v.dims();
    let dim_of = |n: usize| i16::try_from(n).map_err(|_| NiftiError::Dims(h.dim));
    h.dim = [3, dim_of(nx)?, dim_of(ny)?, dim_of(nz)?, 1, 1, 1, 1];
    let s = v.spacing();
    h.pixdim[1..4].copy_from_slice(&[s[0] as f32, s[1] as f32, s[2] as f32]);
    if h.pixdim[0] != 1.0 && h.pixdim[0] != -1.0 {
        h.pixdim[0] = 1.0;
    }
    h.sizeof_hdr = HEADER_SIZE as i32;
    h.datatype = datatype.code();
    h.bitpix = datatype.bitpix();
    h.vox_offset = MIN_VOX_OFFSET as f32;
    h.scl_slope = 1.0;
    h.scl_inter = 0.0;
    h.magic = *MAGIC_SINGLE;
    h.endianness = Endianness::Little;
    let mut out = Vec::with_capacity(MIN_VOX_OFFSET + data.len());
    out.extend_from_slice(&h.to_bytes());
    out.extend_from_slice(&[0; 4]);
    out.extend_from_slice(&data);
    Ok(out)
}

/// Writes `bytes` to `path`, gzip-compressing when the name ends in `.gz`.
/// Compressed output carries no timestamp, so it is reproducible.
pub fn write_bytes(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let gz = path.extension().is_some_and(|e| e == "gz");
    let mut file = std::io::BufWriter::new(File::create(path)?);
    if gz {
        let mut enc = GzEncoder::new(file, Compression::default());
        enc.write_all(bytes)?;
        enc.finish()?.flush()?;
    } else {
        file.write_all(bytes)?;
        file.flush()?;
    }
    Ok(())
}

pub fn write_volume_file(
    path: impl AsRef<Path>,
    v: &Volume,
    datatype: Datatype,
    template: Option<&NiftiHeader>,
) -> Result<()> {
    write_bytes(path, &write_volume(v, datatype, template)?)
}

/// The natural on-disk type for a volume kind.
pub fn default_datatype(kind: VolumeKind) -> Datatype {
    match kind {
        VolumeKind::Label => Datatype::Uint8,
        VolumeKind::Hu => Datatype::Int16,
        VolumeKind::Probability => Datatype::Float64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Hand-built 2x2x2 int16 file, written field by field at the offsets
    /// of the NIfTI-1 layout.
    fn handmade(scl_slope: f32, scl_inter: f32, magic: &[u8; 4], big: bool) -> Vec<u8> {
        let mut b = vec![0u8; 352];
        let put16 = |b: &mut Vec<u8>, at: usize, v: i16| {
            b[at..at + 2].copy_from_slice(&if big { v.to_be_bytes() } else { v.to_le_bytes() })
        };
        let put32 = |b: &mut Vec<u8>, at: usize, v: i32| {
            b[at..at + 4].copy_from_slice(&if big { v.to_be_bytes() } else { v.to_le_bytes() })
        };
        let putf = |b: &mut Vec<u8>, at: usize, v: f32| {
            b[at..at + 4].copy_from_slice(&if big { v.to_be_bytes() } else { v.to_le_bytes() })
        };
        put32(&mut b, 0, 348);
        for (i, d) in [3i16, 2, 2, 2, 1, 1, 1, 1].into_iter().enumerate() {
            put16(&mut b, 40 + 2 * i, d);
        }
        put16(&mut b, 70, 4);
        put16(&mut b, 72, 16);
        for (i, p) in [1.0f32, 1.0, 1.0, 1.0].into_iter().enumerate() {
            putf(&mut b, 76 + 4 * i, p);
        }
        putf(&mut b, 108, 352.0);
        putf(&mut b, 112, scl_slope);
        putf(&mut b, 116, scl_inter);
        b[344..348].copy_from_slice(magic);
        for v in 0i16..8 {
            b.extend_from_slice(&if big { v.to_be_bytes() } else { v.to_le_bytes() });
        }
        b
    }

    #[test]
    fn reads_handmade_int16() {
        let (v, h) = read_volume(&handmade(0.0, 0.0, MAGIC_SINGLE, false), KindHint::Hu).unwrap();
        assert_eq!(v.dims(), [2, 2, 2]);
        assert_eq!(v.spacing(), [1.0; 3]);
        assert_eq!(v.data(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);
        assert_eq!(v.kind(), VolumeKind::Hu);
        assert_eq!(h.endianness, Endianness::Little);
        assert_eq!(h.datatype().unwrap(), Datatype::Int16);
    }

    #[test]
    fn reads_big_endian() {
        let (v, h) = read_volume(&handmade(0.0, 0.0, MAGIC_SINGLE, true), KindHint::Hu).unwrap();
        assert_eq!(h.endianness, Endianness::Big);
        assert_eq!(v.data()[7], 7.0);
    }

    #[test]
    fn applies_slope_and_intercept() {
        let (v, _) = read_volume(&handmade(2.0, 1.0, MAGIC_SINGLE, false), KindHint::Hu).unwrap();
        assert_eq!(v.data()[3], 7.0);
    }

    #[test]
    fn rejects_pair_magic() {
        assert!(matches!(
            read_volume(&handmade(0.0, 0.0, MAGIC_PAIR, false), KindHint::Hu),
            Err(NiftiError::Magic(_))
        ));
    }

    #[test]
    fn rejects_truncation_and_bad_fields() {
        let good = handmade(0.0, 0.0, MAGIC_SINGLE, false);
        assert!(matches!(read_volume(&good[..360], KindHint::Hu), Err(NiftiError::Truncated { .. })));
        assert!(matches!(read_volume(&good[..100], KindHint::Hu), Err(NiftiError::ShortHeader(100))));
        let mut bad = good.clone();
        bad[70] = 8; // int32
        assert!(matches!(read_volume(&bad, KindHint::Hu), Err(NiftiError::Datatype(8))));
        let mut bad = good.clone();
        bad[40] = 4;
        assert!(matches!(read_volume(&bad, KindHint::Hu), Err(NiftiError::Rank(4))));
        let mut bad = good.clone();
        bad[80..84].copy_from_slice(&(-1.0f32).to_le_bytes());
        assert!(matches!(read_volume(&bad, KindHint::Hu), Err(NiftiError::Pixdim(_))));
        let mut bad = good.clone();
        bad[72] = 8;
        assert!(matches!(read_volume(&bad, KindHint::Hu), Err(NiftiError::Bitpix { .. })));
        let mut bad = good;
        bad[40] = 0x55;
        bad[41] = 0x55;
        assert!(matches!(read_volume(&bad, KindHint::Hu), Err(NiftiError::Endianness)));
    }

    #[test]
    fn header_round_trips_through_bytes() {
        let (_, h) = read_volume(&handmade(0.0, 0.0, MAGIC_SINGLE, false), KindHint::Hu).unwrap();
        assert_eq!(NiftiHeader::parse(&h.to_bytes()).unwrap(), h);
    }

    #[test]
    fn write_rejects_lossy_targets() {
        let grid = Grid::with_dims([2, 1, 1]).unwrap();
        let p = Volume::new(grid, VolumeKind::Probability, vec![0.25, 1.0]).unwrap();
        assert!(matches!(write_volume(&p, Datatype::Int16, None), Err(NiftiError::KindDatatype { .. })));
        assert!(write_volume(&p, Datatype::Float32, None).is_ok());
        let hu = Volume::new(grid, VolumeKind::Hu, vec![-40000.0, 0.0]).unwrap();
        assert!(matches!(write_volume(&hu, Datatype::Int16, None), Err(NiftiError::NotRepresentable { .. })));
        let frac = Volume::new(grid, VolumeKind::Hu, vec![0.5, 0.0]).unwrap();
        assert!(write_volume(&frac, Datatype::Int16, None).is_err());
        let m = Volume::new(grid, VolumeKind::Label, vec![0.0, 1.0]).unwrap();
        assert!(matches!(write_volume(&m, Datatype::Int16, None), Err(NiftiError::KindDatatype { .. })));
    }

    #[test]
    fn template_fields_survive_a_write() {
        let mut template = NiftiHeader {
            sform_code: 2,
            srow_x: [0.5, 0.1, 0.0, -12.0],
            quatern_c: 0.25,
            ..NiftiHeader::default()
        };
        template.descrip[..5].copy_from_slice(b"hello");
        let grid = Grid::with_dims([3, 2, 1]).unwrap();
        let v = Volume::filled(grid, VolumeKind::Hu, 12.0).unwrap();
        let bytes = write_volume(&v, Datatype::Int16, Some(&template)).unwrap();
        let (_, h) = read_volume(&bytes, KindHint::Hu).unwrap();
        assert_eq!(h.srow_x, template.srow_x);
        assert_eq!(h.quatern_c, 0.25);
        assert_eq!(h.descrip, template.descrip);
        assert_eq!(h.sform_code, 2);
    }

    #[test]
    fn origin_round_trips() {
        let grid = Grid::new([2, 2, 2], [0.7, 0.7, 2.5], [-10.0, 4.5, 100.0]).unwrap();
        let v = Volume::filled(grid, VolumeKind::Hu, 1.0).unwrap();
        let (back, _) = read_volume(&write_volume(&v, Datatype::Int16, None).unwrap(), KindHint::Hu).unwrap();
        assert_eq!(back.origin(), [-10.0, 4.5, 100.0]);
        assert_eq!(back.spacing(), [0.7f32 as f64, 0.7f32 as f64, 2.5]);
    }
}
