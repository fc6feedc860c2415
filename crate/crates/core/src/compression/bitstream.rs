//! `.hnrv` container: header, per-tensor records, trailing CRC-32.
//!
//! All integers are little-endian.
//!
//! ```text
//! magic "HNRV" | u16 version | u8 kind (0 compressed, 1 checkpoint)
//! u32 config length | config text (key=value lines)
//! u32 num_frames | u32 stored count | u32 stored frame index * stored count
//! u32 tensor count | record * tensor count
//! u32 CRC-32 of every preceding byte
//!
//! record:
//!   u16 name length | name | u8 ndim | u32 dim * ndim | u8 mode
//!   mode 0 (float32):   u64 bit length | f32 values
//!   modes 1..=3:        u8 bits | f64 mu_min | f64 mu_max, then
//!     1 (fixed width):  u64 bit length | codes packed MSB-first
//!     2 (huffman):      u32 first symbol | u32 table length |
//!                       code lengths as nibbles (high nibble first) |
//!                       u64 bit length | canonical codes packed MSB-first
//!     3 (run):          u32 symbol | u64 bit length (0)
//! ```

use super::huffman::{pack_fixed, unpack_fixed, HuffmanStream, huffman_decode};
use super::quant::{check_bits, dequantize, QuantSpec};
use crate::arch::HNeRVConfig;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HNRV";
pub const VERSION: u16 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContainerKind {
    Compressed,
    Checkpoint,
}

#[derive(Clone, Debug, PartialEq)]
pub enum TensorPayload {
    Float32(Vec<f32>),
    Fixed { spec: QuantSpec, bytes: Vec<u8>, bit_len: u64 },
    Huffman { spec: QuantSpec, stream: HuffmanStream },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TensorRecord {
    pub name: String,
    pub shape: Vec<usize>,
    pub payload: TensorPayload,
}

impl TensorRecord {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mode_name(&self) -> &'static str {
        match &self.payload {
            TensorPayload::Float32(_) => "float32",
            TensorPayload::Fixed { .. } => "fixed",
            TensorPayload::Huffman { stream: HuffmanStream::Run { .. }, .. } => "run",
            TensorPayload::Huffman { .. } => "huffman",
        }
    }

    pub fn quant_spec(&self) -> Option<QuantSpec> {
        match &self.payload {
            TensorPayload::Float32(_) => None,
            TensorPayload::Fixed { spec, .. } | TensorPayload::Huffman { spec, .. } => Some(*spec),
        }
    }

    pub fn payload_bits(&self) -> u64 {
        match &self.payload {
            TensorPayload::Float32(v) => 32 * v.len() as u64,
            TensorPayload::Fixed { bit_len, .. } => *bit_len,
            TensorPayload::Huffman { stream, .. } => stream.payload_bits(),
        }
    }

    /// Quantization codes; `None` for float payloads.
    pub fn codes(&self) -> Result<Option<Vec<u32>>> {
        let n = self.len();
        let codes = match &self.payload {
            TensorPayload::Float32(_) => return Ok(None),
            TensorPayload::Fixed { spec, bytes, bit_len } => unpack_fixed(bytes, *bit_len, spec.bits, n)?,
            TensorPayload::Huffman { stream, .. } => huffman_decode(stream)?,
        };
        if codes.len() != n {
            return Err(Error::format(format!("tensor {:?} decodes to the wrong symbol count", self.name)));
        }
        if let Some(spec) = self.quant_spec() {
            if codes.iter().any(|&c| c > spec.max_code()) {
                return Err(Error::format(format!("tensor {:?} has a code outside its range", self.name)));
            }
        }
        Ok(Some(codes))
    }

    pub fn values(&self) -> Result<Vec<f32>> {
        match (&self.payload, self.codes()?) {
            (TensorPayload::Float32(v), _) => Ok(v.clone()),
            (_, Some(codes)) => Ok(dequantize(&codes, &self.quant_spec().expect("quantized payload"))),
            _ => unreachable!("quantized payload always yields codes"),
        }
    }

    /// Builds a record from codes, keeping Huffman only when it is smaller.
    pub fn from_codes(name: String, shape: Vec<usize>, codes: &[u32], spec: QuantSpec, entropy: bool) -> Result<Self> {
        let fixed = || {
            let (bytes, bit_len) = pack_fixed(codes, spec.bits);
            TensorPayload::Fixed { spec, bytes, bit_len }
        };
        let payload = if entropy {
            let stream = super::huffman::huffman_encode(codes)?;
            let huff = TensorPayload::Huffman { spec, stream };
            let a = TensorRecord { name: name.clone(), shape: shape.clone(), payload: huff };
            let b = TensorRecord { name: name.clone(), shape: shape.clone(), payload: fixed() };
            if a.encoded_len() < b.encoded_len() {
                a.payload
            } else {
                b.payload
            }
        } else {
            fixed()
        };
        Ok(TensorRecord { name, shape, payload })
    }

    pub fn encoded_len(&self) -> usize {
        let mut out = Vec::new();
        self.write(&mut out);
        out.len()
    }

    fn write(&self, out: &mut Vec<u8>) {
        out.extend((self.name.len() as u16).to_le_bytes());
        out.extend(self.name.as_bytes());
        out.push(self.shape.len() as u8);
        for &d in &self.shape {
            out.extend((d as u32).to_le_bytes());
        }
        let spec_bytes = |out: &mut Vec<u8>, s: &QuantSpec| {
            out.push(s.bits);
            out.extend(s.mu_min.to_le_bytes());
            out.extend(s.mu_max.to_le_bytes());
        };
        let payload = |out: &mut Vec<u8>, bytes: &[u8], bit_len: u64| {
            out.extend(bit_len.to_le_bytes());
            out.extend(bytes);
        };
        match &self.payload {
            TensorPayload::Float32(v) => {
                out.push(0);
                out.extend((32 * v.len() as u64).to_le_bytes());
                for x in v {
                    out.extend(x.to_le_bytes());
                }
            }
            TensorPayload::Fixed { spec, bytes, bit_len } => {
                out.push(1);
                spec_bytes(out, spec);
                payload(out, bytes, *bit_len);
            }
            TensorPayload::Huffman { spec, stream } => match stream {
                HuffmanStream::Coded { first, lengths, bytes, bit_len, .. } => {
                    out.push(2);
                    spec_bytes(out, spec);
                    out.extend(first.to_le_bytes());
                    out.extend((lengths.len() as u32).to_le_bytes());
                    for pair in lengths.chunks(2) {
                        out.push(pair[0] << 4 | pair.get(1).copied().unwrap_or(0));
                    }
                    payload(out, bytes, *bit_len);
                }
                HuffmanStream::Run { symbol, .. } => {
                    out.push(3);
                    spec_bytes(out, spec);
                    out.extend(symbol.to_le_bytes());
                    payload(out, &[], 0);
                }
                HuffmanStream::Empty => {
                    out.push(3);
                    spec_bytes(out, spec);
                    out.extend(0u32.to_le_bytes());
                    payload(out, &[], 0);
                }
            },
        }
    }

    fn read(r: &mut Reader) -> Result<Self> {
        let name_len = r.u16()? as usize;
        let name = String::from_utf8(r.bytes(name_len)?.to_vec())
            .map_err(|_| Error::format("tensor name is not UTF-8"))?;
        let ndim = r.u8()? as usize;
        let shape = (0..ndim).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
        if ndim == 0 || shape.contains(&0) {
            return Err(Error::format(format!("tensor {name:?} has an invalid shape {shape:?}")));
        }
        let n = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| Error::format("tensor shape overflows"))?;
        let mode = r.u8()?;
        let spec = |r: &mut Reader| -> Result<QuantSpec> {
            let bits = r.u8()?;
            check_bits(bits).map_err(|_| Error::format(format!("tensor {name:?} has invalid bit width {bits}")))?;
            let spec = QuantSpec { bits, mu_min: r.f64()?, mu_max: r.f64()? };
            if !(spec.mu_min.is_finite() && spec.mu_max.is_finite() && spec.mu_min <= spec.mu_max) {
                return Err(Error::format(format!("tensor {name:?} has an invalid range")));
            }
            Ok(spec)
        };
        let payload = match mode {
            0 => {
                let (bytes, bit_len) = r.payload()?;
                if bit_len != 32 * n as u64 {
                    return Err(Error::format(format!("tensor {name:?} float payload has the wrong size")));
                }
                TensorPayload::Float32(
                    bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect(),
                )
            }
            1 => {
                let spec = spec(r)?;
                let (bytes, bit_len) = r.payload()?;
                TensorPayload::Fixed { spec, bytes: bytes.to_vec(), bit_len }
            }
            2 => {
                let spec = spec(r)?;
                let first = r.u32()?;
                let table_len = r.u32()? as usize;
                if table_len > super::huffman::MAX_ALPHABET {
                    return Err(Error::format("Huffman table too large"));
                }
                let packed = r.bytes(table_len.div_ceil(2))?;
                let lengths = (0..table_len)
                    .map(|i| if i % 2 == 0 { packed[i / 2] >> 4 } else { packed[i / 2] & 0x0f })
                    .collect();
                let (bytes, bit_len) = r.payload()?;
                TensorPayload::Huffman {
                    spec,
                    stream: HuffmanStream::Coded { first, lengths, bytes: bytes.to_vec(), bit_len, count: n },
                }
            }
            3 => {
                let spec = spec(r)?;
                let symbol = r.u32()?;
                let (_, bit_len) = r.payload()?;
                if bit_len != 0 {
                    return Err(Error::format("run record carries a payload"));
                }
                TensorPayload::Huffman { spec, stream: HuffmanStream::Run { symbol, count: n } }
            }
            m => return Err(Error::format(format!("tensor {name:?} has unknown mode {m}"))),
        };
        Ok(TensorRecord { name, shape, payload })
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::format("bitstream truncated"))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.bytes(2)?.try_into().expect("2 bytes")))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(8)?.try_into().expect("8 bytes")))
    }

    fn payload(&mut self) -> Result<(&'a [u8], u64)> {
        let bit_len = self.u64()?;
        let n = usize::try_from(bit_len.div_ceil(8)).map_err(|_| Error::format("payload too large"))?;
        Ok((self.bytes(n)?, bit_len))
    }
}

/// Parsed container.
#[derive(Clone, Debug, PartialEq)]
pub struct Bitstream {
    pub kind: ContainerKind,
    pub config: HNeRVConfig,
    pub num_frames: usize,
    pub frame_ids: Vec<usize>,
    pub tensors: Vec<TensorRecord>,
}

/// Byte accounting of a serialized container.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub header_bytes: usize,
    pub record_bytes: Vec<usize>,
    pub checksum_bytes: usize,
}

impl Layout {
    pub fn total(&self) -> usize {
        self.header_bytes + self.record_bytes.iter().sum::<usize>() + self.checksum_bytes
    }
}

impl Bitstream {
    fn header(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend(MAGIC);
        out.extend(VERSION.to_le_bytes());
        out.push(match self.kind {
            ContainerKind::Compressed => 0,
            ContainerKind::Checkpoint => 1,
        });
        let text = self.config.to_text();
        out.extend((text.len() as u32).to_le_bytes());
        out.extend(text.as_bytes());
        out.extend((self.num_frames as u32).to_le_bytes());
        out.extend((self.frame_ids.len() as u32).to_le_bytes());
        for &t in &self.frame_ids {
            out.extend((t as u32).to_le_bytes());
        }
        out.extend((self.tensors.len() as u32).to_le_bytes());
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header();
        for t in &self.tensors {
            t.write(&mut out);
        }
        let crc = crc32fast::hash(&out);
        out.extend(crc.to_le_bytes());
        out
    }

    pub fn layout(&self) -> Layout {
        Layout {
            header_bytes: self.header().len(),
            record_bytes: self.tensors.iter().map(TensorRecord::encoded_len).collect(),
            checksum_bytes: 4,
        }
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() + 2 + 4 {
            return Err(Error::format("file too short for an HNRV container"));
        }
        let (body, tail) = bytes.split_at(bytes.len() - 4);
        let stored = u32::from_le_bytes(tail.try_into().expect("4 bytes"));
        let computed = crc32fast::hash(body);
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }
        let mut r = Reader { buf: body, pos: 0 };
        if r.bytes(4)? != MAGIC {
            return Err(Error::format("not an HNRV container"));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(Error::Version { found: version, expected: VERSION });
        }
        let kind = match r.u8()? {
            0 => ContainerKind::Compressed,
            1 => ContainerKind::Checkpoint,
            k => return Err(Error::format(format!("unknown container kind {k}"))),
        };
        let text_len = r.u32()? as usize;
        let text = std::str::from_utf8(r.bytes(text_len)?).map_err(|_| Error::format("config is not UTF-8"))?;
        let config = HNeRVConfig::from_text(text)?;
        let num_frames = r.u32()? as usize;
        let stored_count = r.u32()? as usize;
        if stored_count > num_frames {
            return Err(Error::format("more stored frames than frames"));
        }
        let frame_ids = (0..stored_count).map(|_| r.u32().map(|t| t as usize)).collect::<Result<Vec<_>>>()?;
        let count = r.u32()? as usize;
        let mut tensors = Vec::new();
        for _ in 0..count {
            tensors.push(TensorRecord::read(&mut r)?);
        }
        if r.pos != body.len() {
            return Err(Error::format("trailing bytes after the last tensor record"));
        }
        Ok(Bitstream { kind, config, num_frames, frame_ids, tensors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::quant::quantize;

    fn sample() -> Bitstream {
        let values: Vec<f32> = (0..50).map(|i| ((i * 7) % 13) as f32 / 13.0 - 0.3).collect();
        let (codes, spec) = quantize(&values, 8, false).unwrap();
        Bitstream {
            kind: ContainerKind::Compressed,
            config: HNeRVConfig::preset("desk").unwrap(),
            num_frames: 4,
            frame_ids: vec![1, 3],
            tensors: vec![
                TensorRecord::from_codes("a".into(), vec![5, 10], &codes, spec, true).unwrap(),
                TensorRecord::from_codes("b".into(), vec![50], &codes, spec, false).unwrap(),
                TensorRecord::from_codes("c".into(), vec![40], &[2; 40], spec, true).unwrap(),
                TensorRecord { name: "d".into(), shape: vec![2], payload: TensorPayload::Float32(vec![1.5, -2.0]) },
            ],
        }
    }

    #[test]
    fn round_trip_and_layout() {
        let b = sample();
        let bytes = b.to_bytes();
        assert_eq!(Bitstream::from_bytes(&bytes).unwrap(), b);
        assert_eq!(b.layout().total(), bytes.len());
        assert_eq!(b.tensors[2].mode_name(), "run");
        assert_eq!(b.tensors[1].mode_name(), "fixed");
    }

    #[test]
    fn corruption_is_checksum_error() {
        let bytes = sample().to_bytes();
        for i in 0..bytes.len() {
            let mut bad = bytes.clone();
            bad[i] ^= 0x10;
            assert!(matches!(Bitstream::from_bytes(&bad), Err(Error::Checksum { .. })), "byte {i}");
        }
        assert!(Bitstream::from_bytes(&bytes[..3]).is_err());
        assert!(Bitstream::from_bytes(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn version_mismatch() {
        let mut bytes = sample().to_bytes();
        bytes[4] = 9;
        let n = bytes.len();
        let crc = crc32fast::hash(&bytes[..n - 4]);
        bytes[n - 4..].copy_from_slice(&crc.to_le_bytes());
        assert!(matches!(Bitstream::from_bytes(&bytes), Err(Error::Version { found: 9, expected: 1 })));
    }
}
