//! Canonical Huffman coding of quantization codes.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Longest code length; lengths fit in a nibble.
pub const MAX_CODE_LEN: u8 = 15;
pub const MAX_ALPHABET: usize = 1 << 16;

/// MSB-first bit sink.
#[derive(Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_len: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `n` bits of `value`, most significant first.
    pub fn write(&mut self, value: u32, n: u8) {
        for i in (0..n).rev() {
            let bit = (value >> i) & 1;
            if self.bit_len % 8 == 0 {
                self.bytes.push(0);
            }
            if bit == 1 {
                let last = self.bytes.len() - 1;
                self.bytes[last] |= 0x80 >> (self.bit_len % 8);
            }
            self.bit_len += 1;
        }
    }

    pub fn bit_len(&self) -> u64 {
        self.bit_len
    }

    pub fn finish(self) -> (Vec<u8>, u64) {
        (self.bytes, self.bit_len)
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    bit_len: u64,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8], bit_len: u64) -> Result<Self> {
        if bit_len > bytes.len() as u64 * 8 {
            return Err(Error::format("bit length exceeds payload"));
        }
        Ok(BitReader { bytes, bit_len, pos: 0 })
    }

    pub fn bit(&mut self) -> Result<u32> {
        if self.pos >= self.bit_len {
            return Err(Error::format("payload ended early"));
        }
        let b = (self.bytes[(self.pos / 8) as usize] >> (7 - self.pos % 8)) & 1;
        self.pos += 1;
        Ok(b as u32)
    }

    pub fn read(&mut self, n: u8) -> Result<u32> {
        let mut v = 0;
        for _ in 0..n {
            v = (v << 1) | self.bit()?;
        }
        Ok(v)
    }

    pub fn remaining(&self) -> u64 {
        self.bit_len - self.pos
    }
}

pub fn pack_fixed(codes: &[u32], bits: u8) -> (Vec<u8>, u64) {
    let mut w = BitWriter::new();
    for &c in codes {
        w.write(c, bits);
    }
    w.finish()
}

pub fn unpack_fixed(bytes: &[u8], bit_len: u64, bits: u8, count: usize) -> Result<Vec<u32>> {
    if bit_len != count as u64 * bits as u64 {
        return Err(Error::format("fixed-width payload length does not match the symbol count"));
    }
    let mut r = BitReader::new(bytes, bit_len)?;
    (0..count).map(|_| r.read(bits)).collect()
}

/// Entropy-coded symbol stream.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HuffmanStream {
    Empty,
    /// Every symbol equal.
    Run { symbol: u32, count: usize },
    /// Code lengths for symbols `first..first + lengths.len()`, then the payload.
    Coded { first: u32, lengths: Vec<u8>, bytes: Vec<u8>, bit_len: u64, count: usize },
}

impl HuffmanStream {
    pub fn payload_bits(&self) -> u64 {
        match self {
            HuffmanStream::Coded { bit_len, .. } => *bit_len,
            _ => 0,
        }
    }
}

/// Code lengths bounded by `max_len`, halving frequencies until they fit.
pub fn code_lengths(freqs: &[u64], max_len: u8) -> Vec<u8> {
    let mut f: Vec<u64> = freqs.to_vec();
    loop {
        let lengths = unbounded_lengths(&f);
        if lengths.iter().all(|&l| l <= max_len) {
            return lengths;
        }
        for v in f.iter_mut().filter(|v| **v > 0) {
            *v = v.div_ceil(2);
        }
    }
}

fn unbounded_lengths(freqs: &[u64]) -> Vec<u8> {
    let mut lengths = vec![0u8; freqs.len()];
    let leaves: Vec<usize> = (0..freqs.len()).filter(|&s| freqs[s] > 0).collect();
    match leaves.len() {
        0 => return lengths,
        1 => {
            lengths[leaves[0]] = 1;
            return lengths;
        }
        _ => {}
    }
    let mut parent: Vec<usize> = vec![usize::MAX; leaves.len()];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        leaves.iter().enumerate().map(|(i, &s)| Reverse((freqs[s], i))).collect();
    while heap.len() > 1 {
        let Reverse((fa, a)) = heap.pop().expect("heap has two nodes");
        let Reverse((fb, b)) = heap.pop().expect("heap has two nodes");
        let id = parent.len();
        parent.push(usize::MAX);
        parent[a] = id;
        parent[b] = id;
        heap.push(Reverse((fa + fb, id)));
    }
    for (i, &s) in leaves.iter().enumerate() {
        let mut depth = 0u8;
        let mut n = i;
        while parent[n] != usize::MAX {
            n = parent[n];
            depth = depth.saturating_add(1);
        }
        lengths[s] = depth;
    }
    lengths
}

/// Canonical codes: symbols ordered by (length, symbol).
fn canonical_codes(lengths: &[u8]) -> Vec<u32> {
    let mut order: Vec<usize> = (0..lengths.len()).filter(|&s| lengths[s] > 0).collect();
    order.sort_by_key(|&s| (lengths[s], s));
    let mut codes = vec![0u32; lengths.len()];
    let (mut code, mut prev) = (0u32, 0u8);
    for s in order {
        code <<= lengths[s] - prev;
        prev = lengths[s];
        codes[s] = code;
        code += 1;
    }
    codes
}

pub fn huffman_encode(symbols: &[u32]) -> Result<HuffmanStream> {
    let Some(&max) = symbols.iter().max() else {
        return Ok(HuffmanStream::Empty);
    };
    if max as usize >= MAX_ALPHABET {
        return Err(Error::usage(format!("symbol {max} outside the 16-bit alphabet")));
    }
    let min = *symbols.iter().min().expect("non-empty");
    if min == max {
        return Ok(HuffmanStream::Run { symbol: min, count: symbols.len() });
    }
    let mut freqs = vec![0u64; (max - min + 1) as usize];
    for &s in symbols {
        freqs[(s - min) as usize] += 1;
    }
    let lengths = code_lengths(&freqs, MAX_CODE_LEN);
    let codes = canonical_codes(&lengths);
    let mut w = BitWriter::new();
    for &s in symbols {
        let i = (s - min) as usize;
        w.write(codes[i], lengths[i]);
    }
    let (bytes, bit_len) = w.finish();
    Ok(HuffmanStream::Coded { first: min, lengths, bytes, bit_len, count: symbols.len() })
}

pub fn huffman_decode(stream: &HuffmanStream) -> Result<Vec<u32>> {
    let (first, lengths, bytes, bit_len, count) = match stream {
        HuffmanStream::Empty => return Ok(Vec::new()),
        HuffmanStream::Run { symbol, count } => return Ok(vec![*symbol; *count]),
        HuffmanStream::Coded { first, lengths, bytes, bit_len, count } => (*first, lengths, bytes, *bit_len, *count),
    };
    if lengths.iter().any(|&l| l > MAX_CODE_LEN) {
        return Err(Error::format("code length exceeds the maximum"));
    }
    let mut per_len = [0u32; MAX_CODE_LEN as usize + 1];
    for &l in lengths.iter().filter(|&&l| l > 0) {
        per_len[l as usize] += 1;
    }
    let kraft: f64 = (1..=MAX_CODE_LEN as usize).map(|l| per_len[l] as f64 / (1u64 << l) as f64).sum();
    if kraft > 1.0 + 1e-12 || kraft == 0.0 {
        return Err(Error::format("code lengths do not form a prefix code"));
    }
    let mut sorted: Vec<u32> = (0..lengths.len() as u32).filter(|&s| lengths[s as usize] > 0).collect();
    sorted.sort_by_key(|&s| (lengths[s as usize], s));
    let mut first_code = [0u32; MAX_CODE_LEN as usize + 2];
    let mut first_index = [0u32; MAX_CODE_LEN as usize + 2];
    let (mut code, mut index) = (0u32, 0u32);
    for l in 1..=MAX_CODE_LEN as usize {
        code = (code + per_len[l - 1]) << 1;
        first_code[l] = code;
        first_index[l] = index;
        index += per_len[l];
    }
    let mut r = BitReader::new(bytes, bit_len)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut c = 0u32;
        let mut found = None;
        for l in 1..=MAX_CODE_LEN as usize {
            c = (c << 1) | r.bit()?;
            let offset = c.wrapping_sub(first_code[l]);
            if c >= first_code[l] && offset < per_len[l] {
                found = Some(sorted[(first_index[l] + offset) as usize]);
                break;
            }
        }
        let s = found.ok_or_else(|| Error::format("invalid Huffman code in payload"))?;
        out.push(first + s);
    }
    if r.remaining() != 0 {
        return Err(Error::format("trailing bits after the last Huffman symbol"));
    }
    Ok(out)
}
